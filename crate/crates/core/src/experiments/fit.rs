//! Log-log rate fits and ratio spreads over experiment cells.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::distributions::{materialize_spectrum, SpectrumSpec, Spectrum};
use crate::complexity::effective_rank;
use crate::error::{LabError, Result};

/// Aggregated result of one `(d, N, p)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub d: usize,
    pub n: usize,
    pub p: u32,
    pub model: String,
    pub spectrum_id: String,
    pub mean_error: f64,
    pub std_error: f64,
    pub theory_bound: f64,
    pub ratio: f64,
    pub seed: u64,
}

impl Cell {
    /// Effective rank recovered from the spectrum id.
    pub fn effective_rank(&self) -> Result<f64> {
        Ok(effective_rank(&spectrum_from_id(&self.spectrum_id, self.d)?))
    }

    /// `N >= r^{p-1}`.
    pub fn in_large_n_regime(&self) -> Result<bool> {
        Ok(self.n as f64 >= regime_threshold(self.effective_rank()?, self.p))
    }

    fn key(&self) -> (&str, &str, u32, usize, usize) {
        (&self.model, &self.spectrum_id, self.p, self.d, self.n)
    }
}

/// Inverse of [`SpectrumSpec::id`].
pub fn spectrum_from_id(id: &str, d: usize) -> Result<Spectrum> {
    materialize_spectrum(&SpectrumSpec::parse(&id.replace(';', ","), d)?)
}

pub fn regime_threshold(eff_rank: f64, p: u32) -> f64 {
    eff_rank.powi(p as i32 - 1)
}

/// OLS slope of `ln(mean_error)` on `ln(N)` with a 95% Student-t interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Sorted by `(model, spectrum, p, d, N)`.
    pub cells: Vec<Cell>,
    pub slope: Option<SlopeFit>,
    pub ratio_spread: f64,
    pub flags: Vec<String>,
}

impl RateFit {
    /// Cells without a slope, e.g. when too few are in the large-N regime.
    pub fn unfitted(mut cells: Vec<Cell>, flag: impl Into<String>) -> Self {
        sort_cells(&mut cells);
        let ratio_spread = ratio_spread(&cells);
        Self { cells, slope: None, ratio_spread, flags: vec![flag.into()] }
    }
}

pub fn sort_cells(cells: &mut [Cell]) {
    cells.sort_by(|a, b| a.key().cmp(&b.key()));
}

/// Max over min of `mean_error / theory_bound`; 1 for an empty set.
pub fn ratio_spread(cells: &[Cell]) -> f64 {
    spread(cells.iter().map(|c| c.ratio))
}

pub(crate) fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    if lo.is_finite() { hi / lo } else { 1.0 }
}

pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(LabError::TooFewCells { need: 3, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(LabError::InvalidParameter("all N values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = (ssr / (n - 2) as f64 / sxx).sqrt();
    let tq = StudentsT::new(0.0, 1.0, (n - 2) as f64)
        .map_err(|e| LabError::InvalidParameter(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(SlopeFit { slope, intercept, ci_low: slope - tq * se, ci_high: slope + tq * se, points: n })
}

/// Slope over the large-N cells of one `(d, p)` curve; the spread uses all
/// cells.
pub fn fit_rates(cells: &[Cell]) -> Result<RateFit> {
    for c in cells {
        if !(c.theory_bound > 0.0) || !c.ratio.is_finite() {
            return Err(LabError::InvalidParameter(format!("cell d={} N={} has bound {} ratio {}", c.d, c.n, c.theory_bound, c.ratio)));
        }
    }
    let mut sorted = cells.to_vec();
    sort_cells(&mut sorted);
    let mut eligible = Vec::new();
    for c in &sorted {
        if c.in_large_n_regime()? && c.mean_error > 0.0 {
            eligible.push(c);
        }
    }
    if eligible.len() < 4 {
        return Err(LabError::TooFewCells { need: 4, got: eligible.len() });
    }
    let x: Vec<f64> = eligible.iter().map(|c| (c.n as f64).ln()).collect();
    let y: Vec<f64> = eligible.iter().map(|c| c.mean_error.ln()).collect();
    let slope = ols_slope(&x, &y)?;
    Ok(RateFit { ratio_spread: ratio_spread(&sorted), cells: sorted, slope: Some(slope), flags: Vec::new() })
}
