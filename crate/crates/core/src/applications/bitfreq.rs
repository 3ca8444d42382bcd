use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::DigitalSignal;

/// A constant 16-bit value described by how often its bits change along the
/// bit axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BitFrequency {
    /// 0
    DcLow,
    /// 65535
    DcHigh,
    /// `1010101010101010` = 43690
    Alternating,
    /// `0101010101010101` = 21845
    InverseAlternating,
    /// `c` full cycles over 16 bits: bit `i` is `floor(2 c i / 16) mod 2`.
    Cycles(u32),
    Pattern(u32),
}

impl BitFrequency {
    pub fn value(self) -> Result<u32> {
        match self {
            BitFrequency::DcLow => Ok(0),
            BitFrequency::DcHigh => Ok(0xffff),
            BitFrequency::Alternating => Ok(0xaaaa),
            BitFrequency::InverseAlternating => Ok(0x5555),
            BitFrequency::Cycles(c) if c <= 8 => Ok((0..16).map(|i| ((2 * c * i / 16) % 2) << i).sum()),
            BitFrequency::Cycles(c) => Err(Error::Invalid(format!("{c} cycles do not fit in 16 bits (max 8)"))),
            BitFrequency::Pattern(p) if p <= 0xffff => Ok(p),
            BitFrequency::Pattern(p) => Err(Error::Invalid(format!("pattern {p} exceeds 16 bits"))),
        }
    }
}

impl std::str::FromStr for BitFrequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "dc-low" => BitFrequency::DcLow,
            "dc-high" => BitFrequency::DcHigh,
            "alternating" => BitFrequency::Alternating,
            "inverse" => BitFrequency::InverseAlternating,
            _ => {
                if let Some(c) = s.strip_prefix("cycles:") {
                    BitFrequency::Cycles(c.parse().map_err(|_| Error::Invalid(format!("bad cycle count {c:?}")))?)
                } else {
                    BitFrequency::Pattern(s.parse().map_err(|_| Error::Invalid(format!("unknown bit frequency {s:?}")))?)
                }
            }
        })
    }
}

/// A 16-bit image of equal-width vertical bands, one constant value each.
pub fn make_bitfreq_image(width: usize, height: usize, frequencies: &[BitFrequency]) -> Result<DigitalSignal> {
    if width == 0 || height == 0 {
        return Err(Error::Invalid("image extents must be positive".into()));
    }
    if frequencies.is_empty() || frequencies.len() > width {
        return Err(Error::Invalid(format!("{} bands do not fit in width {width}", frequencies.len())));
    }
    let values = frequencies.iter().map(|f| f.value()).collect::<Result<Vec<_>>>()?;
    let bands = values.len();
    let row: Vec<u32> = (0..width).map(|x| values[x * bands / width]).collect();
    DigitalSignal::mono(vec![height, width], 16, row.repeat(height))
}
