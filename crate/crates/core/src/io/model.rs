//! Binary model files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! "BPINR1" version:u8 kind:u8 precision:u8
//! activation:u8 activation_param:f64 input_dim:u32 encoding:u32 seed:u64
//! loss:u8 plane_bits:u32 bit_depth:u32 map_offset:u32 map_planes:u32 n_map:u32
//! channels:u32 ndim:u32 extents:u32*ndim
//! flags:u8 layers:u32 (d_in:u32 d_out:u32 layer_flag:u8)*layers
//! payload
//! ```
//!
//! Dense payload: per layer, weights (row-major `d_out x d_in`) then biases,
//! in the stored precision. Ternary payload: all weights 2-bit packed in
//! layer order (four per byte, low bits first; `00 = 0`, `01 = +1`,
//! `10 = -1`), then one `f32` scale per layer.

use std::path::Path;

use crate::error::{Error, Result};
use crate::network::ternary::{TernaryLayer, TernaryMlp};
use crate::network::{ActivationKind, Layer, Mlp, Precision, Real};
use crate::training::{BitMapping, LossKind};

pub const MAGIC: &[u8; 6] = b"BPINR1";
pub const VERSION: u8 = 1;
const FMT: &str = "model";

const FLAG_TERNARY: u8 = 1;
const FLAG_NO_BIAS: u8 = 2;

/// Everything needed to turn a model back into a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMeta {
    pub loss: LossKind,
    pub plane_bits: u32,
    pub bit_depth: u32,
    pub mapping: BitMapping,
    /// Number of planes the model was trained on.
    pub planes: usize,
    pub shape: Vec<usize>,
    pub channels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Dense32(Mlp<f32>),
    Dense64(Mlp<f64>),
    Ternary32(TernaryMlp<f32>),
    Ternary64(TernaryMlp<f64>),
}

impl SavedModel {
    pub fn is_ternary(&self) -> bool {
        matches!(self, SavedModel::Ternary32(_) | SavedModel::Ternary64(_))
    }

    pub fn precision(&self) -> Precision {
        match self {
            SavedModel::Dense32(_) | SavedModel::Ternary32(_) => Precision::Binary32,
            _ => Precision::Binary64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub meta: ModelMeta,
    pub model: SavedModel,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::format(FMT, "truncated file"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn activation_code(a: ActivationKind) -> (u8, f64) {
    match a {
        ActivationKind::Sine { omega0 } => (0, omega0),
        ActivationKind::ReluPosEnc { num_frequencies } => (1, num_frequencies as f64),
        ActivationKind::Gauss { scale } => (2, scale),
        ActivationKind::Gelu => (3, 0.0),
        ActivationKind::Tanh => (4, 0.0),
        ActivationKind::Relu => (5, 0.0),
    }
}

fn activation_from(code: u8, p: f64) -> Result<ActivationKind> {
    Ok(match code {
        0 => ActivationKind::Sine { omega0: p },
        1 => ActivationKind::ReluPosEnc {
            num_frequencies: p as usize,
        },
        2 => ActivationKind::Gauss { scale: p },
        3 => ActivationKind::Gelu,
        4 => ActivationKind::Tanh,
        5 => ActivationKind::Relu,
        c => return Err(Error::format(FMT, format!("unknown activation code {c}"))),
    })
}

fn loss_code(l: LossKind) -> u8 {
    match l {
        LossKind::Bce => 0,
        LossKind::Mse => 1,
        LossKind::Mae => 2,
    }
}

fn loss_from(code: u8) -> Result<LossKind> {
    Ok(match code {
        0 => LossKind::Bce,
        1 => LossKind::Mse,
        2 => LossKind::Mae,
        c => return Err(Error::format(FMT, format!("unknown loss code {c}"))),
    })
}

fn ternary_code(q: i8) -> u8 {
    match q {
        1 => 0b01,
        -1 => 0b10,
        _ => 0b00,
    }
}

/// Bytes of a ternary payload: packed weights plus one scale per layer.
pub fn ternary_payload_len(weights: usize, layers: usize) -> usize {
    weights.div_ceil(4) + 4 * layers
}

struct Common {
    activation: ActivationKind,
    input_dim: usize,
    encoding: usize,
    seed: u64,
    flags: u8,
    shapes: Vec<(usize, usize, u8)>,
}

fn dense_common<T: Real>(m: &Mlp<T>) -> Common {
    let no_bias = m.layers().iter().all(|l| l.bias.is_none());
    Common {
        activation: m.activation(),
        input_dim: m.input_dim(),
        encoding: 0,
        seed: m.seed(),
        flags: if no_bias { FLAG_NO_BIAS } else { 0 },
        shapes: m.layers().iter().map(|l| (l.d_in, l.d_out, l.bias.is_some() as u8)).collect(),
    }
}

fn ternary_common<T: Real>(m: &TernaryMlp<T>) -> Common {
    Common {
        activation: ActivationKind::Gelu,
        input_dim: m.input_dim(),
        encoding: m.encoding(),
        seed: m.seed(),
        flags: FLAG_TERNARY | FLAG_NO_BIAS,
        shapes: m.layers().iter().map(|l| (l.d_in, l.d_out, l.normalize_input as u8)).collect(),
    }
}

fn write_dense<T: Real>(w: &mut Writer, m: &Mlp<T>) {
    for l in m.layers() {
        l.weight.iter().chain(l.bias.iter().flatten()).for_each(|v| v.write_le(&mut w.0));
    }
}

fn write_ternary<T: Real>(w: &mut Writer, m: &TernaryMlp<T>) {
    let mut packed = Vec::new();
    let mut byte = 0u8;
    let mut fill = 0;
    for q in m.layers().iter().flat_map(|l| l.quantized.iter()) {
        byte |= ternary_code(*q) << (2 * fill);
        fill += 1;
        if fill == 4 {
            packed.push(byte);
            byte = 0;
            fill = 0;
        }
    }
    if fill > 0 {
        packed.push(byte);
    }
    w.0.extend_from_slice(&packed);
    for l in m.layers() {
        let beta = l.beta.to_f32().unwrap_or(f32::NAN);
        w.0.extend_from_slice(&beta.to_le_bytes());
    }
}

pub fn encode_model(file: &ModelFile) -> Vec<u8> {
    let common = match &file.model {
        SavedModel::Dense32(m) => dense_common(m),
        SavedModel::Dense64(m) => dense_common(m),
        SavedModel::Ternary32(m) => ternary_common(m),
        SavedModel::Ternary64(m) => ternary_common(m),
    };
    let meta = &file.meta;
    let mut w = Writer(MAGIC.to_vec());
    w.u8(VERSION);
    w.u8(file.model.is_ternary() as u8);
    w.u8(match file.model.precision() {
        Precision::Binary32 => 0,
        Precision::Binary64 => 1,
    });
    let (code, param) = activation_code(common.activation);
    w.u8(code);
    w.f64(param);
    w.u32(common.input_dim);
    w.u32(common.encoding);
    w.u64(common.seed);
    w.u8(loss_code(meta.loss));
    w.u32(meta.plane_bits as usize);
    w.u32(meta.bit_depth as usize);
    w.u32(meta.mapping.offset);
    w.u32(meta.planes);
    w.u32(meta.mapping.n_map);
    w.u32(meta.channels);
    w.u32(meta.shape.len());
    meta.shape.iter().for_each(|&e| w.u32(e));
    w.u8(common.flags);
    w.u32(common.shapes.len());
    for &(i, o, f) in &common.shapes {
        w.u32(i);
        w.u32(o);
        w.u8(f);
    }
    match &file.model {
        SavedModel::Dense32(m) => write_dense(&mut w, m),
        SavedModel::Dense64(m) => write_dense(&mut w, m),
        SavedModel::Ternary32(m) => write_ternary(&mut w, m),
        SavedModel::Ternary64(m) => write_ternary(&mut w, m),
    }
    w.0
}

fn read_dense<T: Real>(r: &mut Reader, c: &Common) -> Result<Mlp<T>> {
    let size = T::PRECISION.bytes();
    let mut layers = Vec::with_capacity(c.shapes.len());
    for &(d_in, d_out, has_bias) in &c.shapes {
        let mut vals = |n: usize| -> Result<Vec<T>> { Ok(r.take(n * size)?.chunks_exact(size).map(T::read_le).collect()) };
        let weight = vals(d_in * d_out)?;
        let bias = if has_bias == 1 { Some(vals(d_out)?) } else { None };
        layers.push(Layer::new(d_in, d_out, weight, bias)?);
    }
    Mlp::from_layers(c.input_dim, c.activation, c.seed, layers)
}

fn read_ternary<T: Real>(r: &mut Reader, c: &Common) -> Result<TernaryMlp<T>> {
    let total: usize = c.shapes.iter().map(|s| s.0 * s.1).sum();
    let packed = r.take(total.div_ceil(4))?;
    let mut codes = (0..total).map(|j| (packed[j / 4] >> (2 * (j % 4))) & 0b11);
    let mut quantized = Vec::with_capacity(c.shapes.len());
    for &(d_in, d_out, _) in &c.shapes {
        let q = (&mut codes)
            .take(d_in * d_out)
            .map(|code| match code {
                0b00 => Ok(0i8),
                0b01 => Ok(1),
                0b10 => Ok(-1),
                _ => Err(Error::format(FMT, "invalid ternary code 11")),
            })
            .collect::<Result<Vec<_>>>()?;
        quantized.push(q);
    }
    let layers = c
        .shapes
        .iter()
        .zip(quantized)
        .map(|(&(d_in, d_out, norm), q)| {
            let beta = f32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
            TernaryLayer::from_quantized(d_in, d_out, q, T::from_f64_lossy(beta as f64), norm == 1)
        })
        .collect::<Result<Vec<_>>>()?;
    TernaryMlp::from_layers(c.input_dim, c.encoding, c.seed, layers)
}

pub fn decode_model(bytes: &[u8]) -> Result<ModelFile> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(6).ok() != Some(&MAGIC[..]) {
        return Err(Error::format(FMT, "bad magic"));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Version {
            found: version,
            expected: VERSION,
        });
    }
    let ternary = match r.u8()? {
        0 => false,
        1 => true,
        k => return Err(Error::format(FMT, format!("unknown model kind {k}"))),
    };
    let precision = match r.u8()? {
        0 => Precision::Binary32,
        1 => Precision::Binary64,
        p => return Err(Error::format(FMT, format!("unknown precision code {p}"))),
    };
    let code = r.u8()?;
    let param = r.f64()?;
    let activation = activation_from(code, param)?;
    let input_dim = r.u32()?;
    let encoding = r.u32()?;
    let seed = r.u64()?;
    let loss = loss_from(r.u8()?)?;
    let plane_bits = r.u32()? as u32;
    let bit_depth = r.u32()? as u32;
    let offset = r.u32()?;
    let planes = r.u32()?;
    let n_map = r.u32()?;
    let channels = r.u32()?;
    let ndim = r.u32()?;
    if ndim > 16 {
        return Err(Error::format(FMT, format!("{ndim} grid axes")));
    }
    let shape = (0..ndim).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let flags = r.u8()?;
    if (flags & FLAG_TERNARY != 0) != ternary {
        return Err(Error::format(FMT, "ternary flag disagrees with model kind"));
    }
    let count = r.u32()?;
    if count == 0 || count > 4096 {
        return Err(Error::format(FMT, format!("{count} layers")));
    }
    let shapes = (0..count)
        .map(|_| Ok((r.u32()?, r.u32()?, r.u8()?)))
        .collect::<Result<Vec<_>>>()?;
    let c = Common {
        activation,
        input_dim,
        encoding,
        seed,
        flags,
        shapes,
    };
    let model = match (ternary, precision) {
        (false, Precision::Binary32) => SavedModel::Dense32(read_dense(&mut r, &c)?),
        (false, Precision::Binary64) => SavedModel::Dense64(read_dense(&mut r, &c)?),
        (true, Precision::Binary32) => SavedModel::Ternary32(read_ternary(&mut r, &c)?),
        (true, Precision::Binary64) => SavedModel::Ternary64(read_ternary(&mut r, &c)?),
    };
    if r.pos != bytes.len() {
        return Err(Error::format(FMT, format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(ModelFile {
        meta: ModelMeta {
            loss,
            plane_bits,
            bit_depth,
            mapping: BitMapping { offset, n_map },
            planes,
            shape,
            channels,
        },
        model,
    })
}

pub fn save_model(file: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_model(file)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
