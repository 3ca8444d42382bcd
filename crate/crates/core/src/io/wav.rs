//! RIFF/WAVE with 16-bit PCM or 32-bit IEEE float samples.

use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::DigitalSignal;

const FMT: &str = "wav";
const TAG_PCM: u16 = 1;
const TAG_FLOAT: u16 = 3;
const TAG_EXTENSIBLE: u16 = 0xfffe;

#[derive(Debug, Clone, PartialEq)]
pub enum WavSamples {
    Pcm16(Vec<i16>),
    Float32(Vec<f32>),
}

impl WavSamples {
    pub fn len(&self) -> usize {
        match self {
            WavSamples::Pcm16(v) => v.len(),
            WavSamples::Float32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One channel of audio; multi-channel files keep the first channel.
#[derive(Debug, Clone, PartialEq)]
pub struct WavAudio {
    pub sample_rate: u32,
    pub samples: WavSamples,
}

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

pub fn parse_wav(bytes: &[u8]) -> Result<WavAudio> {
    if bytes.len() < 12 || &bytes[..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::unsupported(FMT, "not a RIFF/WAVE container"));
    }
    let mut pos = 12;
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        let end = body.checked_add(size).filter(|&e| e <= bytes.len());
        match id {
            b"fmt " => {
                let end = end.ok_or_else(|| Error::format(FMT, "truncated fmt chunk"))?;
                if size < 16 {
                    return Err(Error::format(FMT, "fmt chunk too short"));
                }
                let mut tag = u16_at(bytes, body);
                if tag == TAG_EXTENSIBLE {
                    if size < 40 {
                        return Err(Error::format(FMT, "extensible fmt chunk too short"));
                    }
                    tag = u16_at(bytes, body + 24);
                }
                let channels = u16_at(bytes, body + 2);
                let rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                if channels == 0 {
                    return Err(Error::format(FMT, "zero channels"));
                }
                fmt = Some((tag, channels, rate, bits));
                pos = end + (size & 1);
            }
            b"data" => {
                let (tag, channels, rate, bits) = fmt.ok_or_else(|| Error::format(FMT, "data chunk before fmt chunk"))?;
                let end = end.ok_or_else(|| Error::format(FMT, "truncated data chunk"))?;
                let data = &bytes[body..end];
                let frame = channels as usize * (bits as usize / 8);
                let samples = match (tag, bits) {
                    (TAG_PCM, 16) => WavSamples::Pcm16(
                        data.chunks_exact(frame).map(|f| i16::from_le_bytes([f[0], f[1]])).collect(),
                    ),
                    (TAG_FLOAT, 32) => WavSamples::Float32(
                        data.chunks_exact(frame)
                            .map(|f| f32::from_le_bytes([f[0], f[1], f[2], f[3]]))
                            .collect(),
                    ),
                    (TAG_PCM | TAG_FLOAT, b) => return Err(Error::unsupported(FMT, format!("{b}-bit samples for format tag {tag}"))),
                    (t, _) => return Err(Error::unsupported(FMT, format!("format tag {t}"))),
                };
                if !data.len().is_multiple_of(frame) {
                    return Err(Error::format(FMT, "data chunk is not a whole number of frames"));
                }
                return Ok(WavAudio {
                    sample_rate: rate,
                    samples,
                });
            }
            _ => pos = body.saturating_add(size).saturating_add(size & 1),
        }
    }
    Err(Error::format(FMT, "no data chunk"))
}

pub fn encode_wav(audio: &WavAudio) -> Vec<u8> {
    let (tag, bits, data): (u16, u16, Vec<u8>) = match &audio.samples {
        WavSamples::Pcm16(v) => (TAG_PCM, 16, v.iter().flat_map(|s| s.to_le_bytes()).collect()),
        WavSamples::Float32(v) => (TAG_FLOAT, 32, v.iter().flat_map(|s| s.to_le_bytes()).collect()),
    };
    let block = bits / 8;
    let mut out = Vec::with_capacity(44 + data.len() + 1);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data.len() + (data.len() & 1)) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&audio.sample_rate.to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate * block as u32).to_le_bytes());
    out.extend_from_slice(&block.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data.len() as u32).to_le_bytes());
    out.extend_from_slice(&data);
    if data.len() & 1 == 1 {
        out.push(0);
    }
    out
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<WavAudio> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_wav(&bytes)
}

pub fn write_wav(audio: &WavAudio, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_wav(audio)).map_err(|e| Error::io(path, e))
}

/// Offset-binary 16-bit signal: `-32768 -> 0`, `32767 -> 65535`.
pub fn pcm16_to_signal(samples: &[i16]) -> Result<DigitalSignal> {
    DigitalSignal::mono(
        vec![samples.len()],
        16,
        samples.iter().map(|&s| (s as i32 + 32768) as u32).collect(),
    )
}

pub fn signal_to_pcm16(signal: &DigitalSignal) -> Result<Vec<i16>> {
    if signal.bit_depth() != 16 || signal.channels() != 1 {
        return Err(Error::Invalid("PCM16 needs a 16-bit single-channel signal".into()));
    }
    Ok(signal.samples().iter().map(|&v| (v as i32 - 32768) as i16).collect())
}
