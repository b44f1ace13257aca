//! Point-pattern files: a CSV of coordinates plus a JSON sidecar describing the window.
//!
//! Coordinates are written with 17 significant digits so a write/read cycle is bit-exact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Configuration, Window};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct WindowSidecar {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PatternSidecar {
    dim: usize,
    window: WindowSidecar,
}

/// Sidecar path for a pattern CSV: `pattern.csv` -> `pattern.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn axis_names(dim: usize) -> Vec<String> {
    (0..dim)
        .map(|k| match k {
            0 => "x".to_string(),
            1 => "y".to_string(),
            2 => "z".to_string(),
            _ => format!("x{}", k + 1),
        })
        .collect()
}

pub fn format_coord(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_pattern(config: &Configuration, csv_path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_path(csv_path)?;
    wtr.write_record(axis_names(config.dim()))?;
    for x in config.points() {
        wtr.write_record(x.iter().map(|v| format_coord(*v)))?;
    }
    wtr.flush()?;
    let sidecar = PatternSidecar {
        dim: config.dim(),
        window: WindowSidecar {
            lower: config.window().lower().to_vec(),
            upper: config.window().upper().to_vec(),
        },
    };
    fs::write(sidecar_path(csv_path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn read_pattern(csv_path: &Path) -> Result<Configuration> {
    let side_path = sidecar_path(csv_path);
    let sidecar: PatternSidecar = serde_json::from_str(&fs::read_to_string(&side_path)?)?;
    let window = Window::new(sidecar.window.lower, sidecar.window.upper)?;
    if window.dim() != sidecar.dim {
        return Err(Error::Format {
            path: side_path,
            reason: format!("dim {} disagrees with window dimension {}", sidecar.dim, window.dim()),
        });
    }
    let mut rdr = csv::Reader::from_path(csv_path)?;
    let header = rdr.headers()?.clone();
    let expected = axis_names(sidecar.dim);
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Format {
            path: csv_path.to_path_buf(),
            reason: format!("header {:?} does not match {:?}", header.iter().collect::<Vec<_>>(), expected),
        });
    }
    let mut coords = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for field in rec.iter() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Format {
                path: csv_path.to_path_buf(),
                reason: format!("row {}: cannot parse {field:?}", row + 1),
            })?;
            coords.push(v);
        }
    }
    Configuration::from_flat(window, coords)
}
