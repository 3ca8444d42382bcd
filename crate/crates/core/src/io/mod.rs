//! Readers and writers for images, audio, models and result tables.

mod model;
mod netpbm;
mod wav;

use std::path::Path;

use serde::Serialize;

pub use model::{
    decode_model, encode_model, load_model, save_model, ternary_payload_len, ModelFile, ModelMeta, SavedModel, MAGIC, VERSION,
};
pub use netpbm::{encode_netpbm, parse_netpbm, read_netpbm, write_netpbm};
pub use wav::{encode_wav, parse_wav, pcm16_to_signal, read_wav, signal_to_pcm16, write_wav, WavAudio, WavSamples};

use crate::error::{Error, Result};
use crate::training::{Checkpoint, TrainReport};

pub fn write_csv(report: &TrainReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    report.write_csv(std::io::BufWriter::new(file))
}

/// Parses a report CSV back into checkpoints.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<Checkpoint>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv(file)
}

pub fn parse_csv<R: std::io::Read>(input: R) -> Result<Vec<Checkpoint>> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers()?.len();
    if width < 4 {
        return Err(Error::format("csv", "expected iteration,loss,ber,psnr columns"));
    }
    let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::format("csv", format!("bad number {s:?}"))) };
    r.records()
        .map(|rec| {
            let rec = rec?;
            Ok(Checkpoint {
                iteration: rec[0].parse().map_err(|_| Error::format("csv", format!("bad iteration {:?}", &rec[0])))?,
                loss: num(&rec[1])?,
                ber: num(&rec[2])?,
                psnr: num(&rec[3])?,
                per_plane_ber: (4..width).map(|i| num(&rec[i])).collect::<Result<_>>()?,
            })
        })
        .collect()
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::training::TrainConfig;

    fn report(records: Vec<Checkpoint>) -> TrainReport {
        TrainReport {
            records,
            iteration_at_lossless: None,
            wall_time_secs: 0.0,
            config: TrainConfig::default(),
            plane_bits: 1,
            bit_depth: 4,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let text = report(vec![]).to_csv_string().unwrap();
        assert_eq!(text, "iteration,loss,ber,psnr,ber_plane_0,ber_plane_1,ber_plane_2,ber_plane_3\n");
        assert!(parse_csv(text.as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn rows_parse_back_exactly() {
        let rows = vec![
            Checkpoint {
                iteration: 50,
                loss: 0.1 + 0.2,
                ber: 1.0 / 3.0,
                psnr: 27.123456789012345,
                per_plane_ber: vec![0.5, 1e-17, 0.0, 1.0],
            },
            Checkpoint {
                iteration: 100,
                loss: 1e-300,
                ber: 0.0,
                psnr: f64::INFINITY,
                per_plane_ber: vec![0.0; 4],
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_csv(&report(rows.clone()), &p).unwrap();
        assert_eq!(read_csv(&p).unwrap(), rows);
    }

    #[test]
    fn json_summary_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_json(&report(vec![]), &p).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v["bit_depth"], 4);
    }
}
