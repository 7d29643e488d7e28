//! CSV, JSON and 16-bit PGM renderings of a sweep result.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SweepError};
use crate::plan::SweepPlan;
use crate::record::{MeasureRecord, CSV_COLUMNS};
use crate::run::{CellFailure, SweepResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Measures rendered as heatmaps.
pub const HEATMAP_MEASURES: [&str; 4] = ["overlap", "sigma_prime", "eta_cl", "eta_q"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Pgm,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "pgm" => Ok(Self::Pgm),
            other => Err(format!("unknown format {other:?} (expected csv, json or pgm)")),
        }
    }
}

/// One `#` line with the plan, the header, then one row per record.
pub fn write_csv<W: Write>(mut w: W, result: &SweepResult) -> std::io::Result<()> {
    writeln!(w, "# plan: {}", result.plan.fingerprint())?;
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for r in &result.records {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    schema_version: u32,
    plan: SweepPlan,
    records: Vec<MeasureRecord>,
    failures: Vec<CellFailure>,
}

pub fn write_json<W: Write>(w: W, result: &SweepResult) -> serde_json::Result<()> {
    let doc = JsonDocument {
        schema_version: SCHEMA_VERSION,
        plan: result.plan.clone(),
        records: result.records.clone(),
        failures: result.failures.clone(),
    };
    serde_json::to_writer_pretty(w, &doc)
}

pub fn read_json<R: Read>(r: R) -> std::result::Result<SweepResult, String> {
    let doc: JsonDocument = serde_json::from_reader(r).map_err(|e| e.to_string())?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(format!("unsupported schema_version {}", doc.schema_version));
    }
    doc.plan.validate().map_err(|e| e.to_string())?;
    let mut records = doc.records;
    records.sort_by_key(|r| r.cell_index);
    Ok(SweepResult {
        plan: doc.plan,
        records,
        failures: doc.failures,
    })
}

/// Measures accepted by [`heatmap`].
pub const KNOWN_MEASURES: [&str; 7] = [
    "overlap",
    "sigma_prime",
    "eta_cl",
    "eta_q",
    "eta_cl_noisy",
    "overlap_literal",
    "leakage",
];

fn measure_value(r: &MeasureRecord, measure: &str) -> Option<f64> {
    Some(match measure {
        "overlap" => r.overlap,
        "sigma_prime" => r.sigma_prime,
        "eta_cl" => r.eta_cl,
        "eta_q" => r.eta_q,
        "eta_cl_noisy" => r.eta_cl_noisy,
        "overlap_literal" => r.overlap_literal,
        "leakage" => r.leakage,
        _ => return None,
    })
}

/// A measure on the `(k, gamma)` grid of one `hbar_eff`: row `i` holds
/// `gamma_values[i]`, column `j` holds `k_values[j]`. Values are scaled
/// linearly from `[min, max]` onto `0..=65535`; missing cells are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub measure: String,
    pub hbar_eff: f64,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u16>,
    pub min: f64,
    pub max: f64,
    pub missing: usize,
}

pub fn heatmap(result: &SweepResult, measure: &str, hbar_index: usize) -> Option<Heatmap> {
    if !KNOWN_MEASURES.contains(&measure) {
        return None;
    }
    let plan = &result.plan;
    let hbar_eff = *plan.hbar_list.get(hbar_index)?;
    let (width, height) = (plan.k_values.len(), plan.gamma_values.len());
    let first = hbar_index * width * height;
    let values: Vec<Option<f64>> = (first..first + width * height)
        .map(|i| result.by_index(i).and_then(|r| measure_value(r, measure)))
        .collect();
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let min = present.iter().copied().fold(f64::INFINITY, f64::min);
    let max = present.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let pixels = values
        .iter()
        .map(|v| match v {
            Some(v) if span > 0.0 => ((v - min) / span * 65535.0).round() as u16,
            _ => 0,
        })
        .collect();
    Some(Heatmap {
        measure: measure.to_string(),
        hbar_eff,
        width,
        height,
        pixels,
        min: if present.is_empty() { f64::NAN } else { min },
        max: if present.is_empty() { f64::NAN } else { max },
        missing: values.iter().filter(|v| v.is_none()).count(),
    })
}

/// Binary P5 with maxval 65535, samples big-endian.
pub fn write_pgm<W: Write>(mut w: W, map: &Heatmap) -> std::io::Result<()> {
    write!(w, "P5\n# {} hbar_eff={}\n{} {}\n65535\n", map.measure, map.hbar_eff, map.width, map.height)?;
    let bytes: Vec<u8> = map.pixels.iter().flat_map(|p| p.to_be_bytes()).collect();
    w.write_all(&bytes)
}

pub fn pgm_sidecar(map: &Heatmap, plan: &SweepPlan) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "measure = {}", map.measure);
    let _ = writeln!(s, "hbar_eff = {}", map.hbar_eff);
    let _ = writeln!(s, "width = {} (k, ascending left to right)", map.width);
    let _ = writeln!(s, "height = {} (gamma, ascending top to bottom)", map.height);
    let _ = writeln!(s, "k_range = {} .. {}", plan.k_values[0], plan.k_values[map.width - 1]);
    let _ = writeln!(s, "gamma_range = {} .. {}", plan.gamma_values[0], plan.gamma_values[map.height - 1]);
    let _ = writeln!(s, "min = {}", map.min);
    let _ = writeln!(s, "max = {}", map.max);
    let _ = writeln!(s, "pixel = round((value - min) / (max - min) * 65535)");
    let _ = writeln!(s, "missing_cells = {} (rendered as 0)", map.missing);
    let _ = writeln!(s, "plan = {}", plan.fingerprint());
    s
}

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(SweepError::io(path))?;
    fs::write(path, buf).map_err(SweepError::io(path))
}

/// Writes `sweep.csv`, `sweep.json`, or one `<measure>_h<i>.pgm` plus a
/// `.txt` scale sidecar per heatmap measure and `hbar_eff` into `dir`.
pub fn emit(result: &SweepResult, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(SweepError::io(dir))?;
    match format {
        Format::Csv => {
            let path = dir.join("sweep.csv");
            write_file(&path, |b| write_csv(b, result))?;
            Ok(vec![path])
        }
        Format::Json => {
            let path = dir.join("sweep.json");
            let mut buf = Vec::new();
            write_json(&mut buf, result).map_err(|source| SweepError::Json {
                path: path.clone(),
                source,
            })?;
            fs::write(&path, buf).map_err(SweepError::io(&path))?;
            Ok(vec![path])
        }
        Format::Pgm => {
            let mut paths = Vec::new();
            for h in 0..result.plan.hbar_list.len() {
                for measure in HEATMAP_MEASURES {
                    let map = heatmap(result, measure, h).expect("known measure and hbar index");
                    let pgm = dir.join(format!("{measure}_h{h}.pgm"));
                    write_file(&pgm, |b| write_pgm(b, &map))?;
                    let txt = pgm.with_extension("txt");
                    fs::write(&txt, pgm_sidecar(&map, &result.plan)).map_err(SweepError::io(&txt))?;
                    paths.push(pgm);
                    paths.push(txt);
                }
            }
            Ok(paths)
        }
    }
}
