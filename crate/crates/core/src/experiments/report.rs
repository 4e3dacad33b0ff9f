//! Cell CSV and key=value summary.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::fit::{sort_cells, Cell, RateFit};
use crate::error::{LabError, Result};

pub const CELL_HEADER: &str = "d,N,p,model,spectrum_id,mean_error,std_error,theory_bound,ratio,seed";

pub fn write_cells_csv<W: Write>(cells: &[Cell], mut out: W) -> Result<()> {
    let mut sorted = cells.to_vec();
    sort_cells(&mut sorted);
    writeln!(out, "{CELL_HEADER}")?;
    for c in &sorted {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.d, c.n, c.p, c.model, c.spectrum_id, c.mean_error, c.std_error, c.theory_bound, c.ratio, c.seed
        )?;
    }
    Ok(())
}

pub fn read_cells_csv(text: &str) -> Result<Vec<Cell>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CELL_HEADER => {}
        _ => return Err(LabError::Parse(format!("expected header '{CELL_HEADER}'"))),
    }
    let mut cells = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(LabError::Parse(format!("row {}: expected 10 fields, got {}", i + 2, f.len())));
        }
        let num = |k: usize| -> Result<f64> { f[k].parse().map_err(|_| LabError::Parse(format!("row {}: bad number '{}'", i + 2, f[k]))) };
        let int = |k: usize| -> Result<u64> { f[k].parse().map_err(|_| LabError::Parse(format!("row {}: bad integer '{}'", i + 2, f[k]))) };
        cells.push(Cell {
            d: int(0)? as usize,
            n: int(1)? as usize,
            p: int(2)? as u32,
            model: f[3].to_string(),
            spectrum_id: f[4].to_string(),
            mean_error: num(5)?,
            std_error: num(6)?,
            theory_bound: num(7)?,
            ratio: num(8)?,
            seed: int(9)?,
        });
    }
    Ok(cells)
}

/// `report.csv` -> `report.summary`.
pub fn summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("summary")
}

/// One block per fit, then global `key = value` lines.
pub fn render_summary(fits: &[RateFit], global: &[(String, String)]) -> String {
    let mut s = String::new();
    for (i, fit) in fits.iter().enumerate() {
        let head = fit.cells.first();
        let _ = writeln!(s, "[curve {i}]");
        if let Some(c) = head {
            let _ = writeln!(s, "model = {}\nspectrum = {}\nd = {}\np = {}", c.model, c.spectrum_id, c.d, c.p);
        }
        let _ = writeln!(s, "cells = {}", fit.cells.len());
        match fit.slope {
            Some(sl) => {
                let _ = writeln!(s, "slope = {}\nslope_ci_low = {}\nslope_ci_high = {}\nslope_points = {}", sl.slope, sl.ci_low, sl.ci_high, sl.points);
            }
            None => {
                let _ = writeln!(s, "slope = none");
            }
        }
        let _ = writeln!(s, "ratio_spread = {}", fit.ratio_spread);
        for f in &fit.flags {
            let _ = writeln!(s, "flag = {f}");
        }
        s.push('\n');
    }
    if !global.is_empty() {
        s.push_str("[global]\n");
        for (k, v) in global {
            let _ = writeln!(s, "{k} = {v}");
        }
    }
    s
}

/// Writes the cell CSV to `path` and the summary next to it.
pub fn emit_report(fits: &[RateFit], global: &[(String, String)], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let cells: Vec<Cell> = fits.iter().flat_map(|f| f.cells.iter().cloned()).collect();
    let mut buf = Vec::new();
    write_cells_csv(&cells, &mut buf)?;
    std::fs::write(path, buf)?;
    std::fs::write(summary_path(path), render_summary(fits, global))?;
    Ok(())
}
