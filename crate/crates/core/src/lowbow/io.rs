//! Curve files.
//!
//! JSON lines: one object per curve,
//! `{"locations": [...], "points": [[...], ...], "sigma": 0.2, "c": 0.005, "kernel": "gaussian"}`,
//! optionally with `id`, `label` and (for Beta kernels) `beta_floor`. An
//! infinite scale is written as the string `"inf"`.
//!
//! CSV: one block per curve. A comment line carries the provenance as
//! tab-separated `key=value` pairs, then a `mu,p1,…,p|V|` header, then one
//! row per sample with `μ` in the first column:
//!
//! ```text
//! # id=0	label=A	sigma=0.2	c=0.005	kernel=gaussian	beta_floor=1.01
//! mu,p1,p2
//! 0,0.93,0.07
//! ...
//! ```
//!
//! Floats are written in shortest round-trip form, so both formats restore
//! the curve exactly.

#![allow(clippy::tabs_in_doc_comments)]

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{LowbowCurve, Provenance};
use crate::error::{Error, Result};
use crate::geometry::SimplexPoint;
use crate::kernels::{KernelFamily, DEFAULT_BETA_FLOOR};

/// A curve with optional document metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCurve {
    pub id: Option<String>,
    pub label: Option<String>,
    pub curve: LowbowCurve,
}

impl From<LowbowCurve> for LabeledCurve {
    fn from(curve: LowbowCurve) -> Self {
        Self {
            id: None,
            label: None,
            curve,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    locations: Vec<f64>,
    points: Vec<SimplexPoint>,
    #[serde(serialize_with = "write_scale", deserialize_with = "read_scale")]
    sigma: f64,
    c: f64,
    kernel: KernelFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta_floor: Option<f64>,
}

fn write_scale<S: Serializer>(sigma: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if sigma.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*sigma)
    }
}

fn read_scale<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Scale {
        Number(f64),
        Text(String),
    }
    match Scale::deserialize(d)? {
        Scale::Number(x) => Ok(x),
        Scale::Text(s) => s.parse().map_err(serde::de::Error::custom),
    }
}

impl From<&LabeledCurve> for CurveJson {
    fn from(lc: &LabeledCurve) -> Self {
        let prov = lc.curve.provenance();
        Self {
            id: lc.id.clone(),
            label: lc.label.clone(),
            locations: lc.curve.locations().to_vec(),
            points: lc.curve.points().to_vec(),
            sigma: prov.sigma,
            c: prov.c,
            kernel: prov.kernel,
            beta_floor: (prov.kernel == KernelFamily::Beta).then_some(prov.beta_floor),
        }
    }
}

impl TryFrom<CurveJson> for LabeledCurve {
    type Error = Error;

    fn try_from(j: CurveJson) -> Result<Self> {
        let provenance = Provenance {
            sigma: j.sigma,
            c: j.c,
            kernel: j.kernel,
            beta_floor: j.beta_floor.unwrap_or(DEFAULT_BETA_FLOOR),
        };
        Ok(Self {
            id: j.id,
            label: j.label,
            curve: LowbowCurve::new(j.locations, j.points, provenance)?,
        })
    }
}

pub fn write_curves_jsonl<W: Write>(curves: &[LabeledCurve], mut out: W) -> Result<()> {
    for c in curves {
        serde_json::to_writer(&mut out, &CurveJson::from(c))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_curves_jsonl<R: BufRead>(input: R) -> Result<Vec<LabeledCurve>> {
    let mut curves = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CurveJson = serde_json::from_str(&line)?;
        curves.push(record.try_into()?);
    }
    Ok(curves)
}

pub fn write_curves_csv<W: Write>(curves: &[LabeledCurve], mut out: W) -> Result<()> {
    for lc in curves {
        let prov = lc.curve.provenance();
        let mut meta = Vec::new();
        if let Some(id) = &lc.id {
            meta.push(format!("id={id}"));
        }
        if let Some(label) = &lc.label {
            meta.push(format!("label={label}"));
        }
        meta.push(format!("sigma={}", prov.sigma));
        meta.push(format!("c={}", prov.c));
        meta.push(format!("kernel={}", prov.kernel));
        meta.push(format!("beta_floor={}", prov.beta_floor));
        writeln!(out, "# {}", meta.join("\t"))?;
        let columns: Vec<String> = (1..=lc.curve.vocab_size())
            .map(|j| format!("p{j}"))
            .collect();
        writeln!(out, "mu,{}", columns.join(","))?;
        for (mu, p) in lc.curve.locations().iter().zip(lc.curve.points()) {
            writeln!(out, "{mu},{}", p.to_csv_row())?;
        }
    }
    Ok(())
}

struct CsvBlock {
    id: Option<String>,
    label: Option<String>,
    provenance: Provenance,
    locations: Vec<f64>,
    points: Vec<SimplexPoint>,
}

impl CsvBlock {
    fn parse_header(meta: &str) -> Result<Self> {
        let mut block = CsvBlock {
            id: None,
            label: None,
            provenance: Provenance {
                sigma: f64::NAN,
                c: f64::NAN,
                kernel: KernelFamily::TruncatedGaussian,
                beta_floor: DEFAULT_BETA_FLOOR,
            },
            locations: Vec::new(),
            points: Vec::new(),
        };
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|e| Error::Parse(format!("{v:?}: {e}")))
        };
        for field in meta.split('\t').filter(|f| !f.is_empty()) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("curve header field {field:?}")))?;
            match key {
                "id" => block.id = Some(value.to_string()),
                "label" => block.label = Some(value.to_string()),
                "sigma" => block.provenance.sigma = num(value)?,
                "c" => block.provenance.c = num(value)?,
                "kernel" => block.provenance.kernel = value.parse()?,
                "beta_floor" => block.provenance.beta_floor = num(value)?,
                _ => return Err(Error::Parse(format!("unknown curve header key {key:?}"))),
            }
        }
        Ok(block)
    }

    fn finish(self) -> Result<LabeledCurve> {
        Ok(LabeledCurve {
            id: self.id,
            label: self.label,
            curve: LowbowCurve::new(self.locations, self.points, self.provenance)?,
        })
    }
}

pub fn read_curves_csv<R: BufRead>(input: R) -> Result<Vec<LabeledCurve>> {
    let mut curves = Vec::new();
    let mut block: Option<CsvBlock> = None;
    for line in input.lines() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some(done) = block.take() {
                curves.push(done.finish()?);
            }
            block = Some(CsvBlock::parse_header(meta.trim_start())?);
            continue;
        }
        let current = block
            .as_mut()
            .ok_or_else(|| Error::Parse("curve rows before a '#' header line".into()))?;
        if line.starts_with("mu") {
            continue;
        }
        let (mu, coords) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("curve row {line:?}")))?;
        current.locations.push(
            mu.parse()
                .map_err(|e| Error::Parse(format!("{mu:?}: {e}")))?,
        );
        current.points.push(SimplexPoint::from_csv_row(coords)?);
    }
    if let Some(done) = block {
        curves.push(done.finish()?);
    }
    Ok(curves)
}

/// Reads a curve file in either format, chosen by its first character.
pub fn read_curves(path: &Path) -> Result<Vec<LabeledCurve>> {
    let text = std::fs::read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        read_curves_jsonl(text.as_bytes())
    } else {
        read_curves_csv(text.as_bytes())
    }
}
