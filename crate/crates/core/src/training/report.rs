use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::training::TrainConfig;

/// Metrics taken at one lossless check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub iteration: usize,
    pub loss: f64,
    pub ber: f64,
    #[serde(with = "crate::metrics::float_or_string")]
    pub psnr: f64,
    /// Bit-basis BER per plane, least significant first.
    pub per_plane_ber: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub records: Vec<Checkpoint>,
    pub iteration_at_lossless: Option<usize>,
    pub wall_time_secs: f64,
    pub config: TrainConfig,
    pub plane_bits: u32,
    pub bit_depth: u32,
}

impl TrainReport {
    pub fn is_lossless(&self) -> bool {
        self.iteration_at_lossless.is_some()
    }

    pub fn last(&self) -> Option<&Checkpoint> {
        self.records.last()
    }

    /// One row per checkpoint: `iteration,loss,ber,psnr,ber_plane_0..`.
    ///
    /// Floats use Rust's shortest round-trip formatting; infinite PSNR is `inf`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["iteration".to_string(), "loss".into(), "ber".into(), "psnr".into()];
        header.extend((0..self.bit_depth).map(|i| format!("ber_plane_{i}")));
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.iteration.to_string(), r.loss.to_string(), r.ber.to_string(), r.psnr.to_string()];
            row.extend(r.per_plane_ber.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| crate::Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}
