use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use bpinr::applications::{
    bias_profile, dense_equivalent, expand_bit_depth, fit_audio_fp32, fit_ternary, hypothesis_sweep, ModelSize, TernarySpec,
};
use bpinr::bounds::{coefficient, format_sig3, lipschitz_estimate, upper_bound, BoundQuery};
use bpinr::io::{
    encode_model, read_netpbm, read_wav, save_model, write_csv, write_json, write_netpbm, write_wav, ModelFile, ModelMeta,
    SavedModel, WavAudio, WavSamples,
};
use bpinr::network::{ActivationKind, Mlp, NetSpec, Real};
use bpinr::training::{fit, verify_lossless, BatchMode, BitMapping, LossKind, LosslessCheck, LrDecay, TrainConfig, TrainReport};
use bpinr::{decompose, recompose, DigitalSignal, MetricReport, QuantizedStack};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_LOSSLESS: u8 = 3;

#[derive(Parser, Serialize)]
#[command(name = "bpinr", version, about = "Lossless implicit neural representations by bit-plane decomposition")]
struct Cli {
    /// Worker threads; results are identical for any count.
    #[arg(long, global = true, env = "BPINR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Fit a network to every plane of an image.
    Fit(FitArgs),
    /// Split an image into k-bit planes.
    Decompose(DecomposeArgs),
    /// Reassemble an image from `decompose` output.
    Recompose(RecomposeArgs),
    /// Print the parameter upper bound for ε-accurate fits.
    Bound(BoundArgs),
    /// Per-plane BER over a non-decomposed fit.
    Bitbias(BitbiasArgs),
    /// Iterations-to-lossless across plane widths.
    Sweep(SweepArgs),
    /// Predict missing low-order planes of a 16-bit image.
    Expand(ExpandArgs),
    /// Fit one bit-plane with a ternary-weight network.
    Ternary(TernaryArgs),
    /// Fit the bit patterns of a WAV clip.
    Audio(AudioArgs),
    /// Compare two images.
    Metrics(MetricsArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum LossArg {
    Bce,
    Mse,
    Mae,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Bce => LossKind::Bce,
            LossArg::Mse => LossKind::Mse,
            LossArg::Mae => LossKind::Mae,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ActArg {
    Sine,
    ReluPe,
    Gauss,
    Gelu,
    Tanh,
    Relu,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Preset {
    /// Width 128, depth 3.
    Desk,
    /// Width 512, depth 5.
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PrecisionArg {
    Binary32,
    Binary64,
}

#[derive(Args, Serialize, Clone)]
struct TrainArgs {
    /// Bits per plane.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    #[arg(long, value_enum, default_value = "sine")]
    act: ActArg,
    /// Sine frequency ω0.
    #[arg(long, default_value_t = ActivationKind::DEFAULT_OMEGA0)]
    w0: f64,
    /// Positional-encoding octaves for relu-pe.
    #[arg(long, default_value_t = ActivationKind::DEFAULT_FREQUENCIES)]
    frequencies: usize,
    #[arg(long, default_value_t = ActivationKind::DEFAULT_GAUSS_SCALE)]
    gauss_scale: f64,
    /// Hidden width (default 512, or the preset's).
    #[arg(long)]
    width: Option<usize>,
    /// Hidden layers (default 5, or the preset's).
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 20_000)]
    iters: usize,
    /// Iterations between lossless checks.
    #[arg(long, default_value_t = 50)]
    check_interval: usize,
    /// Mini-batch size in points; full batch when absent.
    #[arg(long)]
    batch: Option<usize>,
    /// Multiply the learning rate by this factor every --lr-decay-every steps.
    #[arg(long, requires = "lr_decay_every")]
    lr_decay: Option<f64>,
    #[arg(long, requires = "lr_decay")]
    lr_decay_every: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "binary32")]
    precision: PrecisionArg,
}

/// Training settings after presets and per-command defaults.
#[derive(Serialize)]
struct Resolved {
    plane_bits: u32,
    net: NetSpec,
    precision: &'static str,
    train: TrainConfig,
}

impl TrainArgs {
    fn net_spec(&self) -> NetSpec {
        let (w, d) = match self.preset {
            Some(Preset::Desk) => (128, 3),
            Some(Preset::Full) | None => (512, 5),
        };
        let activation = match self.act {
            ActArg::Sine => ActivationKind::Sine { omega0: self.w0 },
            ActArg::ReluPe => ActivationKind::ReluPosEnc {
                num_frequencies: self.frequencies,
            },
            ActArg::Gauss => ActivationKind::Gauss { scale: self.gauss_scale },
            ActArg::Gelu => ActivationKind::Gelu,
            ActArg::Tanh => ActivationKind::Tanh,
            ActArg::Relu => ActivationKind::Relu,
        };
        NetSpec::new(self.width.unwrap_or(w), self.depth.unwrap_or(d), activation)
    }

    fn config(&self, default_loss: LossKind) -> TrainConfig {
        TrainConfig {
            loss: self.loss.map_or(default_loss, Into::into),
            learning_rate: self.lr,
            max_iterations: self.iters,
            check_interval: self.check_interval,
            batch_mode: self.batch.map_or(BatchMode::FullBatch, BatchMode::MiniBatch),
            seed: self.seed,
            lr_decay: self.lr_decay.zip(self.lr_decay_every).map(|(factor, every)| LrDecay { factor, every }),
        }
    }

    fn resolve(&self, default_k: u32, default_loss: LossKind) -> Resolved {
        Resolved {
            plane_bits: self.k.unwrap_or(default_k),
            net: self.net_spec(),
            precision: match self.precision {
                PrecisionArg::Binary32 => "binary32",
                PrecisionArg::Binary64 => "binary64",
            },
            train: self.config(default_loss),
        }
    }
}

#[derive(Args, Serialize)]
struct FitArgs {
    /// Binary PGM/PPM image (8 or 16 bits).
    input: PathBuf,
    #[command(flatten)]
    train: TrainArgs,
    /// Exit with status 3 unless the fit ends lossless.
    #[arg(long)]
    require_lossless: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct DecomposeArgs {
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Output directory for plane images and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct RecomposeArgs {
    /// Directory written by `decompose`.
    dir: PathBuf,
    /// Output image path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct BoundArgs {
    #[arg(long, default_value_t = 2)]
    dim: u32,
    /// Bit depths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8])]
    bits: Vec<u32>,
    /// L1 Lipschitz constant.
    #[arg(long, default_value_t = 1.0)]
    lipschitz: f64,
    /// Estimate the Lipschitz constant from an image instead.
    #[arg(long, conflicts_with = "lipschitz")]
    lipschitz_from: Option<PathBuf>,
    /// Domain interval [a, b] of every axis.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_hyphen_values = true, default_values_t = [-1.0, 1.0])]
    domain: Vec<f64>,
}

#[derive(Args, Serialize)]
struct BitbiasArgs {
    input: PathBuf,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    input: PathBuf,
    /// Plane widths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4])]
    ks: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = [0, 1, 2])]
    seeds: Vec<u64>,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct ExpandArgs {
    /// 16-bit PGM/PPM image.
    input: PathBuf,
    /// Most significant planes to train on.
    #[arg(long, default_value_t = 8)]
    train_msbs: u32,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct TernaryArgs {
    input: PathBuf,
    /// Bit-plane to fit (0 = LSB); defaults to the MSB.
    #[arg(long)]
    plane: Option<u32>,
    /// Sinusoidal octaves appended to the coordinates.
    #[arg(long, default_value_t = 4)]
    encoding: usize,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long)]
    require_lossless: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct AudioArgs {
    /// Mono or multi-channel WAV (first channel used), PCM16 or float32.
    input: PathBuf,
    #[command(flatten)]
    train: TrainArgs,
    #[arg(long)]
    require_lossless: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct MetricsArgs {
    reference: PathBuf,
    candidate: PathBuf,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Written next to the plane images by `decompose`.
#[derive(Serialize, Deserialize)]
struct Manifest {
    shape: Vec<usize>,
    channels: usize,
    bit_depth: u32,
    plane_bits: u32,
    /// Plane files, least significant first.
    planes: Vec<String>,
}

fn print_config<T: Serialize>(command: &str, value: &T) -> Result<()> {
    let mut v = serde_json::to_value(value)?;
    if let Some(map) = v.as_object_mut() {
        map.insert("command".into(), json!(command));
    }
    println!("config: {v}");
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn meta_for(signal: &DigitalSignal, k: u32, loss: LossKind, mapping: BitMapping) -> ModelMeta {
    ModelMeta {
        loss,
        plane_bits: k,
        bit_depth: signal.bit_depth(),
        mapping,
        planes: (signal.bit_depth() / k) as usize,
        shape: signal.shape().to_vec(),
        channels: signal.channels(),
    }
}

fn input_dim(signal: &DigitalSignal, k: u32) -> usize {
    signal.shape().len() + usize::from(signal.bit_depth() / k > 1)
}

struct DenseFit {
    model: SavedModel,
    report: TrainReport,
    check: LosslessCheck,
}

fn fit_dense_as<T: Real>(signal: &DigitalSignal, r: &Resolved, wrap: fn(Mlp<T>) -> SavedModel) -> Result<DenseFit> {
    let net: Mlp<T> = r.net.build(input_dim(signal, r.plane_bits), signal.channels(), r.train.seed)?;
    let (net, report) = fit(signal, r.plane_bits, net, &r.train)?;
    let check = verify_lossless(&net, signal, r.plane_bits, r.train.loss)?;
    Ok(DenseFit {
        model: wrap(net),
        report,
        check,
    })
}

fn fit_dense(signal: &DigitalSignal, args: &TrainArgs, r: &Resolved) -> Result<DenseFit> {
    match args.precision {
        PrecisionArg::Binary32 => fit_dense_as::<f32>(signal, r, SavedModel::Dense32),
        PrecisionArg::Binary64 => fit_dense_as::<f64>(signal, r, SavedModel::Dense64),
    }
}

fn report_line(report: &TrainReport) -> String {
    match (report.iteration_at_lossless, report.last()) {
        (Some(it), _) => format!("lossless at iteration {it}"),
        (None, Some(c)) => format!("not lossless after {} iterations: BER {} PSNR {:.3} dB", c.iteration, c.ber, c.psnr),
        (None, None) => "no checkpoints".into(),
    }
}

fn write_run(out: &Path, stem: &str, report: &TrainReport, summary: serde_json::Value) -> Result<()> {
    ensure_dir(out)?;
    write_csv(report, out.join(format!("{stem}.csv")))?;
    write_json(&json!({ "report": report, "summary": summary }), out.join(format!("{stem}.json")))?;
    Ok(())
}

fn lossless_status(require: bool, lossless: bool) -> u8 {
    if require && !lossless {
        eprintln!("error: fit did not reach lossless reconstruction");
        EXIT_NOT_LOSSLESS
    } else {
        0
    }
}

fn cmd_fit(a: &FitArgs) -> Result<u8> {
    let signal = read_netpbm(&a.input)?;
    let r = a.train.resolve(1, LossKind::Bce);
    print_config("fit", &json!({ "input": a.input, "resolved": r, "out": a.out }))?;
    let f = fit_dense(&signal, &a.train, &r)?;
    let stem = format!("fit_s{}", r.train.seed);
    let planes = (signal.bit_depth() / r.plane_bits) as usize;
    write_run(&a.out, &stem, &f.report, json!({ "lossless": f.check.is_lossless, "ber": f.check.ber }))?;
    save_model(
        &ModelFile {
            meta: meta_for(&signal, r.plane_bits, r.train.loss, BitMapping::contiguous(planes)),
            model: f.model,
        },
        a.out.join(format!("{stem}.bpinr")),
    )?;
    if signal.bit_depth() == 8 || signal.bit_depth() == 16 {
        write_netpbm(&f.check.reconstructed, a.out.join(format!("{stem}.{}", netpbm_ext(&signal))))?;
    }
    println!("{}", report_line(&f.report));
    Ok(lossless_status(a.require_lossless, f.check.is_lossless))
}

fn netpbm_ext(signal: &DigitalSignal) -> &'static str {
    if signal.channels() == 3 {
        "ppm"
    } else {
        "pgm"
    }
}

fn cmd_decompose(a: &DecomposeArgs) -> Result<u8> {
    print_config("decompose", a)?;
    let signal = read_netpbm(&a.input)?;
    let stack = decompose(&signal, a.k)?;
    ensure_dir(&a.out)?;
    let plane_depth = if a.k <= 8 { 8 } else { 16 };
    let mut names = Vec::new();
    for (i, plane) in stack.planes().iter().enumerate() {
        let name = format!("plane_{i:02}.{}", netpbm_ext(&signal));
        let img = DigitalSignal::new(signal.shape().to_vec(), signal.channels(), plane_depth, plane.clone())?;
        write_netpbm(&img, a.out.join(&name))?;
        names.push(name);
    }
    let manifest = Manifest {
        shape: signal.shape().to_vec(),
        channels: signal.channels(),
        bit_depth: signal.bit_depth(),
        plane_bits: a.k,
        planes: names,
    };
    fs::write(a.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    println!("wrote {} planes to {}", stack.plane_count(), a.out.display());
    Ok(0)
}

fn cmd_recompose(a: &RecomposeArgs) -> Result<u8> {
    print_config("recompose", a)?;
    let text = fs::read_to_string(a.dir.join("manifest.json")).with_context(|| format!("reading manifest in {}", a.dir.display()))?;
    let m: Manifest = serde_json::from_str(&text)?;
    let planes = m
        .planes
        .iter()
        .map(|name| {
            let img = read_netpbm(a.dir.join(name))?;
            if img.shape() != m.shape.as_slice() || img.channels() != m.channels {
                bail!("{name} does not match the manifest shape");
            }
            Ok(img.into_samples())
        })
        .collect::<Result<Vec<_>>>()?;
    let stack = QuantizedStack::from_planes(m.shape, m.channels, m.bit_depth, m.plane_bits, planes)?;
    let signal = recompose(&stack)?;
    write_netpbm(&signal, &a.out)?;
    println!("wrote {}", a.out.display());
    Ok(0)
}

fn cmd_bound(a: &BoundArgs) -> Result<u8> {
    let lipschitz = match &a.lipschitz_from {
        Some(p) => lipschitz_estimate(&read_netpbm(p)?, a.domain[0], a.domain[1])?,
        None => a.lipschitz,
    };
    print_config("bound", &json!({ "dim": a.dim, "bits": a.bits, "lipschitz": lipschitz, "domain": a.domain }))?;
    let first = BoundQuery::new(a.dim, 1, lipschitz, a.domain[0], a.domain[1])?;
    println!("coefficient c = {:.6e}", coefficient(&first));
    println!("{:>4}  {:>10}  {:>34}  {:>12}", "n", "factor/c", "exact factor", "absolute");
    for &n in &a.bits {
        let ub = upper_bound(&BoundQuery::new(a.dim, n, lipschitz, a.domain[0], a.domain[1])?)?;
        let abs = ub.absolute.map_or_else(|| "saturated".to_string(), |v| format!("{v:.4e}"));
        println!("{n:>4}  {:>10}  {:>34}  {abs:>12}", format_sig3(&ub.relative), ub.relative.to_string());
    }
    Ok(0)
}

fn cmd_bitbias(a: &BitbiasArgs) -> Result<u8> {
    let signal = read_netpbm(&a.input)?;
    let r = a.train.resolve(signal.bit_depth(), LossKind::Mse);
    print_config("bitbias", &json!({ "input": a.input, "resolved": r, "out": a.out }))?;
    let f = fit_dense(&signal, &a.train, &r)?;
    let profile = bias_profile(&f.report)?;
    let stem = format!("bitbias_s{}", r.train.seed);
    write_run(&a.out, &stem, &f.report, serde_json::to_value(&profile)?)?;
    for (it, c) in profile.iterations.iter().zip(&profile.lsb_correlation) {
        match c {
            Some(c) => println!("iteration {it}: lsb correlation {c:.4}"),
            None => println!("iteration {it}: lsb correlation undefined"),
        }
    }
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs) -> Result<u8> {
    let signal = read_netpbm(&a.input)?;
    let r = a.train.resolve(1, LossKind::Mse);
    print_config("sweep", &json!({ "input": a.input, "ks": a.ks, "seeds": a.seeds, "resolved": r, "out": a.out }))?;
    let result = hypothesis_sweep(&signal, &a.ks, &r.net, &r.train, &a.seeds)?;
    ensure_dir(&a.out)?;
    write_json(&result, a.out.join("sweep.json"))?;
    let mut csv = String::from("k,epsilon,relative_factor,seed,iterations\n");
    for rec in &result.records {
        for (seed, it) in rec.seeds.iter().zip(&rec.iterations) {
            let it = it.map_or_else(|| "capped".to_string(), |v| v.to_string());
            csv += &format!("{},{},{},{seed},{it}\n", rec.k, rec.epsilon, rec.relative_factor);
        }
        println!("k={} median iterations {}", rec.k, rec.median);
    }
    fs::write(a.out.join("sweep.csv"), csv)?;
    println!("medians nondecreasing in k: {}", result.nondecreasing);
    Ok(0)
}

fn cmd_expand(a: &ExpandArgs) -> Result<u8> {
    let signal = read_netpbm(&a.input)?;
    let r = a.train.resolve(1, LossKind::Bce);
    print_config("expand", &json!({ "input": a.input, "train_msbs": a.train_msbs, "resolved": r, "out": a.out }))?;
    let (net, result) = expand_bit_depth(&signal, a.train_msbs, &r.net, &r.train)?;
    let stem = format!("expand_s{}", r.train.seed);
    write_run(&a.out, &stem, &result.report, serde_json::to_value(&result)?)?;
    write_netpbm(&result.predicted, a.out.join(format!("{stem}.{}", netpbm_ext(&signal))))?;
    let msbs = a.train_msbs as usize;
    save_model(
        &ModelFile {
            meta: ModelMeta {
                planes: msbs,
                ..meta_for(&signal, 1, r.train.loss, BitMapping { offset: 16 - msbs, n_map: 16 })
            },
            model: SavedModel::Dense32(net),
        },
        a.out.join(format!("{stem}.bpinr")),
    )?;
    println!(
        "PSNR expansion {:.3} dB, zero padding {:.3} dB, bit replication {:.3} dB",
        result.metrics.psnr, result.zero_padding.psnr, result.bit_replication.psnr
    );
    Ok(0)
}

fn cmd_ternary(a: &TernaryArgs) -> Result<u8> {
    let signal = read_netpbm(&a.input)?;
    let plane = a.plane.unwrap_or(signal.bit_depth() - 1);
    if plane >= signal.bit_depth() {
        bail!("plane {plane} does not exist in a {}-bit image", signal.bit_depth());
    }
    let r = a.train.resolve(1, LossKind::Bce);
    let spec = TernarySpec {
        hidden_dim: r.net.hidden_dim,
        depth: r.net.depth,
        encoding: a.encoding,
    };
    print_config(
        "ternary",
        &json!({ "input": a.input, "plane": plane, "spec": spec, "train": r.train, "out": a.out }),
    )?;
    let bits = decompose(&signal, 1)?.planes()[plane as usize].clone();
    let target = DigitalSignal::new(signal.shape().to_vec(), signal.channels(), 1, bits)?;
    let f = fit_ternary(&target, &spec, &r.train)?;
    let stem = format!("ternary_p{plane}_s{}", r.train.seed);
    let file = ModelFile {
        meta: meta_for(&target, 1, r.train.loss, BitMapping::contiguous(1)),
        model: SavedModel::Ternary32(f.net.clone()),
    };
    let ternary_bytes = encode_model(&file).len();
    let dense = dense_equivalent(&f.net)?;
    let dense_bytes = encode_model(&ModelFile {
        meta: file.meta.clone(),
        model: SavedModel::Dense32(dense),
    })
    .len();
    save_model(&file, a.out.join(format!("{stem}.bpinr")))?;
    let size: ModelSize = f.size;
    write_run(
        &a.out,
        &stem,
        &f.report,
        json!({ "size": size, "ternary_file_bytes": ternary_bytes, "binary32_file_bytes": dense_bytes }),
    )?;
    println!("{}", report_line(&f.report));
    println!("model file {ternary_bytes} bytes (binary32 equivalent {dense_bytes} bytes)");
    Ok(lossless_status(a.require_lossless, f.report.is_lossless()))
}

fn cmd_audio(a: &AudioArgs) -> Result<u8> {
    let audio = read_wav(&a.input)?;
    let stem = format!("audio_s{}", a.train.seed);
    ensure_dir(&a.out)?;
    let lossless = match &audio.samples {
        WavSamples::Float32(samples) => {
            let r = a.train.resolve(1, LossKind::Bce);
            print_config("audio", &json!({ "input": a.input, "format": "float32", "resolved": r, "out": a.out }))?;
            let f = fit_audio_fp32(samples, &r.net, &r.train)?;
            write_run(&a.out, &stem, &f.report, json!({ "exact": f.exact }))?;
            let signal = bpinr::signal::fp32_bits_signal(samples)?;
            save_model(
                &ModelFile {
                    meta: meta_for(&signal, 1, r.train.loss, BitMapping::contiguous(32)),
                    model: SavedModel::Dense32(f.net),
                },
                a.out.join(format!("{stem}.bpinr")),
            )?;
            write_wav(
                &WavAudio {
                    sample_rate: audio.sample_rate,
                    samples: WavSamples::Float32(f.reconstructed),
                },
                a.out.join(format!("{stem}.wav")),
            )?;
            println!("{}", report_line(&f.report));
            f.exact
        }
        WavSamples::Pcm16(samples) => {
            let signal = bpinr::io::pcm16_to_signal(samples)?;
            let r = a.train.resolve(1, LossKind::Bce);
            print_config("audio", &json!({ "input": a.input, "format": "pcm16", "resolved": r, "out": a.out }))?;
            let f = fit_dense(&signal, &a.train, &r)?;
            write_run(&a.out, &stem, &f.report, json!({ "exact": f.check.is_lossless }))?;
            let planes = (16 / r.plane_bits) as usize;
            save_model(
                &ModelFile {
                    meta: meta_for(&signal, r.plane_bits, r.train.loss, BitMapping::contiguous(planes)),
                    model: f.model,
                },
                a.out.join(format!("{stem}.bpinr")),
            )?;
            write_wav(
                &WavAudio {
                    sample_rate: audio.sample_rate,
                    samples: WavSamples::Pcm16(bpinr::io::signal_to_pcm16(&f.check.reconstructed)?),
                },
                a.out.join(format!("{stem}.wav")),
            )?;
            println!("{}", report_line(&f.report));
            f.check.is_lossless
        }
    };
    Ok(lossless_status(a.require_lossless, lossless))
}

fn cmd_metrics(a: &MetricsArgs) -> Result<u8> {
    print_config("metrics", a)?;
    let x = read_netpbm(&a.reference)?;
    let y = read_netpbm(&a.candidate)?;
    let report = MetricReport::compute(&x, &y)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &a.out {
        write_json(&report, out)?;
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Recompose(a) => cmd_recompose(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Bitbias(a) => cmd_bitbias(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Expand(a) => cmd_expand(a),
        Command::Ternary(a) => cmd_ternary(a),
        Command::Audio(a) => cmd_audio(a),
        Command::Metrics(a) => cmd_metrics(a),
    }
}

/// Help and version go to stdout as usual; usage errors become one line.
fn parse_args() -> std::result::Result<Cli, ExitCode> {
    use clap::error::ErrorKind;
    Cli::try_parse().map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => e.exit(),
        _ => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{line} (see --help)");
            ExitCode::from(EXIT_USAGE)
        }
    })
}

fn main() -> ExitCode {
    let cli = match parse_args() {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
