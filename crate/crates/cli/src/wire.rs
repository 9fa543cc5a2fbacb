//! File and stdout encodings.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use elliptic_dm::verify::{canonical_float, VerificationReport};
use elliptic_dm::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for WireComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<WireComplex> for Complex64 {
    fn from(z: WireComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireParams {
    pub u: Vec<WireComplex>,
    pub v: Vec<WireComplex>,
    pub a12: WireComplex,
}

impl From<&ModelParams> for WireParams {
    fn from(p: &ModelParams) -> Self {
        Self {
            u: p.u.iter().map(|&z| z.into()).collect(),
            v: p.v.iter().map(|&z| z.into()).collect(),
            a12: p.a12.into(),
        }
    }
}

impl From<WireParams> for ModelParams {
    fn from(p: WireParams) -> Self {
        ModelParams::new(
            p.u.into_iter().map(Into::into).collect(),
            p.v.into_iter().map(Into::into).collect(),
            p.a12.into(),
        )
    }
}

/// Parses `re:im` items separated by commas; a bare `re` has zero imaginary part.
pub fn parse_complex_list(text: &str) -> std::result::Result<Vec<Complex64>, String> {
    text.split(',')
        .map(|item| {
            let item = item.trim();
            let (re, im) = item.split_once(':').unwrap_or((item, "0"));
            let re: f64 = re.trim().parse().map_err(|_| format!("bad real part in {item:?}"))?;
            let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part in {item:?}"))?;
            Ok(Complex64::new(re, im))
        })
        .collect()
}

/// Writes `contents` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().context("output path has no file name")?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    {
        let mut file = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        file.write_all(contents)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub const REPORT_COLUMNS: [&str; 10] = ["check_id", "M", "N", "x", "seed", "residual", "tol", "status", "ms", "detail"];

pub fn report_csv(report: &VerificationReport) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(REPORT_COLUMNS)?;
    for r in &report.records {
        let x: Vec<String> = r.x.iter().map(|x| x.to_string()).collect();
        writer.write_record([
            r.check_id.clone(),
            r.m.to_string(),
            r.n.to_string(),
            x.join(";"),
            r.seed.to_string(),
            r.residual.map(canonical_float).unwrap_or_default(),
            canonical_float(r.tol),
            r.status.to_string(),
            canonical_float(r.ms),
            r.detail.clone().unwrap_or_default(),
        ])?;
    }
    Ok(writer.into_inner()?)
}

/// A flat record of named values, written as one JSON object or a one-row CSV.
#[derive(Debug, Default)]
pub struct Row {
    pub fields: Vec<(String, serde_json::Value)>,
}

impl Row {
    pub fn push(&mut self, key: &str, value: impl Serialize) {
        self.fields.push((key.to_string(), serde_json::to_value(value).expect("value serializes")));
    }

    pub fn json(&self) -> String {
        let map: serde_json::Map<String, serde_json::Value> = self.fields.iter().cloned().collect();
        let mut s = serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("object serializes");
        s.push('\n');
        s
    }

    /// Complex values become `<key>_re` and `<key>_im` columns; floats use the
    /// canonical format.
    pub fn csv(&self) -> Result<Vec<u8>> {
        let mut header = Vec::new();
        let mut values = Vec::new();
        for (key, value) in &self.fields {
            match value {
                serde_json::Value::Object(obj) if obj.contains_key("re") && obj.contains_key("im") => {
                    header.push(format!("{key}_re"));
                    values.push(cell(&obj["re"]));
                    header.push(format!("{key}_im"));
                    values.push(cell(&obj["im"]));
                }
                other => {
                    header.push(key.clone());
                    values.push(cell(other));
                }
            }
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&header)?;
        writer.write_record(&values)?;
        Ok(writer.into_inner()?)
    }
}

fn cell(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::Number(n) if n.is_f64() => canonical_float(n.as_f64().unwrap_or(f64::NAN)),
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}
