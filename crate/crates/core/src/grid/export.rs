use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::GridResult;
use crate::error::IoError;
use crate::scalar::Scalar;

pub const GRID_CSV_HEADER: &str = "x,y,best_server,rsrp_dbw,sinr_db,throughput_bps";

/// Writes the raster as CSV, one row per cell in row-major order, four decimals.
pub fn write_grid_csv<T: Scalar, W: Write>(g: &GridResult<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{GRID_CSV_HEADER}")?;
    for c in &g.cells {
        writeln!(
            out,
            "{:.4},{:.4},{},{:.4},{:.4},{:.4}",
            c.position.x,
            c.position.y,
            g.best_server_label(c),
            c.rsrp_dbw(),
            c.sinr_db,
            c.throughput_bps
        )?;
    }
    out.flush()
}

pub fn export_grid<T: Scalar>(g: &GridResult<T>, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::new(path, e))?;
    write_grid_csv(g, BufWriter::new(file)).map_err(|e| IoError::new(path, e))
}

/// One parsed export row.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub x: f64,
    pub y: f64,
    pub best_server: String,
    pub rsrp_dbw: f64,
    pub sinr_db: f64,
    pub throughput_bps: f64,
}

/// Reads a file written by [`export_grid`].
pub fn read_grid_csv(path: &Path) -> Result<Vec<GridRow>, IoError> {
    let bad = |msg: String| IoError::new(path, std::io::Error::new(std::io::ErrorKind::InvalidData, msg));
    let file = File::open(path).map_err(|e| IoError::new(path, e))?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h == GRID_CSV_HEADER => {}
        Some(Err(e)) => return Err(IoError::new(path, e)),
        _ => return Err(bad("missing or unexpected header".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| IoError::new(path, e))?;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(format!("line {}: expected 6 fields", i + 2)));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("line {}: {e}", i + 2)));
        rows.push(GridRow {
            x: num(f[0])?,
            y: num(f[1])?,
            best_server: f[2].to_string(),
            rsrp_dbw: num(f[3])?,
            sinr_db: num(f[4])?,
            throughput_bps: num(f[5])?,
        });
    }
    Ok(rows)
}
