//! Binary Netpbm (P5 gray, P6 RGB) at 8 or 16 bits. Comments are dropped.

use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{max_level, DigitalSignal};

const FMT: &str = "netpbm";

fn is_space(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c)
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' && self.bytes[self.pos] != b'\r' {
                    self.pos += 1;
                }
            } else if is_space(b) {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(FMT, format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::format(FMT, format!("{what} out of range")))
    }
}

pub fn parse_netpbm(bytes: &[u8]) -> Result<DigitalSignal> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        Some(b"P1" | b"P2" | b"P3" | b"P4" | b"P7") => {
            return Err(Error::unsupported(FMT, "only binary P5 and P6 are supported"))
        }
        _ => return Err(Error::format(FMT, "bad magic")),
    };
    let mut h = Header { bytes, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::format(FMT, "zero image extent"));
    }
    let bit_depth = match maxval {
        255 => 8,
        65535 => 16,
        0 => return Err(Error::format(FMT, "maxval 0")),
        m => return Err(Error::unsupported(FMT, format!("maxval {m} (only 255 and 65535)"))),
    };
    match bytes.get(h.pos) {
        Some(&b) if is_space(b) => h.pos += 1,
        _ => return Err(Error::format(FMT, "header not terminated by whitespace")),
    }
    let count = width
        .checked_mul(height)
        .and_then(|v| v.checked_mul(channels))
        .ok_or_else(|| Error::format(FMT, "image too large"))?;
    let bps = if bit_depth == 8 { 1 } else { 2 };
    let data = &bytes[h.pos..];
    if data.len() < count * bps {
        return Err(Error::format(FMT, format!("truncated payload: {} of {} bytes", data.len(), count * bps)));
    }
    let samples: Vec<u32> = if bps == 1 {
        data[..count].iter().map(|&b| b as u32).collect()
    } else {
        data[..2 * count]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect()
    };
    DigitalSignal::new(vec![height, width], channels, bit_depth, samples)
}

pub fn encode_netpbm(signal: &DigitalSignal) -> Result<Vec<u8>> {
    let shape = signal.shape();
    if shape.len() != 2 {
        return Err(Error::unsupported(FMT, format!("{}-D signal; Netpbm images are 2-D", shape.len())));
    }
    let magic = match signal.channels() {
        1 => "P5",
        3 => "P6",
        c => return Err(Error::unsupported(FMT, format!("{c} channels (only 1 or 3)"))),
    };
    let n = signal.bit_depth();
    if n != 8 && n != 16 {
        return Err(Error::unsupported(FMT, format!("bit depth {n} (only 8 and 16)")));
    }
    let mut out = format!("{magic}\n{} {}\n{}\n", shape[1], shape[0], max_level(n)).into_bytes();
    if n == 8 {
        out.extend(signal.samples().iter().map(|&v| v as u8));
    } else {
        for &v in signal.samples() {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
    }
    Ok(out)
}

pub fn read_netpbm(path: impl AsRef<Path>) -> Result<DigitalSignal> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_netpbm(&bytes)
}

pub fn write_netpbm(signal: &DigitalSignal, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_netpbm(signal)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
