//! Result records and their CSV / JSON encodings.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::OutputFormat;
use crate::modem::{ModulationParams, TransformKind};
use crate::{Error, Result};

/// One point of one curve. Carries enough metadata to re-run the point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub scheme: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub kind: TransformKind,
    pub constellation: String,
    pub x_name: String,
    pub x_value: f64,
    pub y_name: String,
    /// Empty when the point was skipped.
    pub y_value: Option<f64>,
    pub trials: u64,
    pub errors: u64,
    pub ci_halfwidth: f64,
    pub seed: u64,
}

impl ResultRecord {
    /// A record for scheme `p` with zeroed counters.
    pub fn for_scheme(experiment: &str, p: &ModulationParams, constellation: &str, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            scheme: p.scheme_label(),
            m: p.m,
            n: p.n,
            kind: p.kind,
            constellation: constellation.to_string(),
            x_name: String::new(),
            x_value: 0.0,
            y_name: String::new(),
            y_value: None,
            trials: 0,
            errors: 0,
            ci_halfwidth: 0.0,
            seed,
        }
    }

    pub fn x(mut self, name: &str, value: f64) -> Self {
        self.x_name = name.to_string();
        self.x_value = value;
        self
    }

    pub fn y(mut self, name: &str, value: Option<f64>) -> Self {
        self.y_name = name.to_string();
        self.y_value = value;
        self
    }

    /// Sets `y = errors/trials` with its Wilson half-width.
    pub fn proportion(mut self, name: &str, errors: u64, trials: u64) -> Self {
        let (p, half) = wilson_interval(errors, trials);
        self.y_name = name.to_string();
        self.y_value = Some(p);
        self.errors = errors;
        self.trials = trials;
        self.ci_halfwidth = half;
        self
    }

    pub fn is_skipped(&self) -> bool {
        self.y_value.is_none()
    }
}

/// 95% two-sided normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Point estimate `k/n` and the half-width of the 95% Wilson score interval.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (p, half)
}

/// Lower and upper ends of the 95% Wilson interval.
pub fn wilson_bounds(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let (_, half) = wilson_interval(successes, trials);
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

pub fn write_csv<W: Write>(records: &[ResultRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Io(e.to_string()))
}

pub fn write_json<W: Write>(records: &[ResultRecord], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, records).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_records<W: Write>(records: &[ResultRecord], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(records, out),
        OutputFormat::Json => write_json(records, out),
    }
}

pub fn to_bytes(records: &[ResultRecord], format: OutputFormat) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_records(records, format, &mut buf)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_values() {
        // 10 of 100: centre 0.1148, half-width 0.0596
        let (p, half) = wilson_interval(10, 100);
        assert_eq!(p, 0.1);
        assert!((half - 0.059_6).abs() < 1e-4, "{half}");
        let (lo, hi) = wilson_bounds(10, 100);
        assert!((lo - 0.055_2).abs() < 1e-4 && (hi - 0.174_4).abs() < 1e-4, "{lo} {hi}");
        let (lo0, hi0) = wilson_bounds(0, 50);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0 && hi0 < 0.1);
        assert_eq!(wilson_interval(0, 0), (0.0, 0.0));
    }

    #[test]
    fn csv_header_and_round_trip() {
        let p = ModulationParams::fresnel(2, 4);
        let recs = vec![
            ResultRecord::for_scheme("ber", &p, "qpsk", 7)
                .x("snr_db", 14.0)
                .proportion("ber", 3, 1000),
            ResultRecord::for_scheme("tab", &p, "bpsk", 0)
                .x("N", 4.0)
                .y("skipped", None),
        ];
        let bytes = to_bytes(&recs, OutputFormat::Csv).unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with(
            "experiment,scheme,M,N,kind,constellation,x_name,x_value,y_name,y_value,trials,errors,ci_halfwidth,seed\n"
        ));
        assert!(text.contains("ber,\"VOCDM(2,4)\",2,4,fresnel,qpsk,snr_db,14.0,ber,0.003,1000,3,"));
        assert_eq!(read_csv(bytes.as_slice()).unwrap(), recs);
        assert!(recs[1].is_skipped());
    }

    #[test]
    fn json_mirror_has_same_fields() {
        let p = ModulationParams::fourier(1, 3);
        let recs = vec![ResultRecord::for_scheme("t", &p, "bpsk", 1).x("N", 3.0).y("overall_papr", Some(3.0))];
        let v: serde_json::Value = serde_json::from_slice(&to_bytes(&recs, OutputFormat::Json).unwrap()).unwrap();
        let obj = v[0].as_object().unwrap();
        assert_eq!(obj.len(), 14);
        assert_eq!(obj["M"], 1);
        assert_eq!(obj["kind"], "fourier");
        assert_eq!(obj["scheme"], "OTFS(1,3)");
    }
}
