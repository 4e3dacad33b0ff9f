//! Effective rank, radius, Gaussian complexity and `L^p` marginal norms.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::distributions::{DistModel, Spectrum};
use crate::error::{LabError, Result};
use crate::seed::stream;
use crate::sphere_norm::TargetSet;
use crate::stats::{mean_and_se, odd_double_factorial};

pub const DEFAULT_GAUSS_TRIALS: usize = 100_000;
const MIN_GAUSS_TRIALS: usize = 1_000;
const CHUNK: usize = 4096;

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// `tr(Sigma) / |Sigma|`.
pub fn effective_rank(spectrum: &Spectrum) -> f64 {
    spectrum.trace() / spectrum.op_norm()
}

/// `rad(Sigma^{1/2} S^{d-1}) = |Sigma|^{1/2}`.
pub fn ellipsoid_radius(spectrum: &Spectrum) -> f64 {
    spectrum.op_norm().sqrt()
}

/// `gamma(T) = E sup_{v in T} |<g, v>|` by Monte Carlo. For spheres and
/// ellipsoids each trial is the closed form `|Sigma^{1/2} g|_2`; finite sets
/// are maximized exhaustively.
pub fn gauss_complexity_mc(t: &TargetSet, trials: usize, seed: u64) -> Result<McEstimate> {
    if trials < MIN_GAUSS_TRIALS {
        return Err(LabError::InvalidParameter(format!(
            "gaussian complexity needs at least {MIN_GAUSS_TRIALS} trials"
        )));
    }
    let d = t.dim();
    if d == 0 {
        return Err(LabError::UnsupportedSet("empty set".into()));
    }
    let scale = t.scale();
    let chunks = trials.div_ceil(CHUNK);
    let per_trial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream(seed, c as u64, "gauss-complexity");
            let len = CHUNK.min(trials - c * CHUNK);
            let mut out = Vec::with_capacity(len);
            let mut g = DVector::zeros(d);
            for _ in 0..len {
                g.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
                let sup = match (&scale, t) {
                    (Some(s), _) => g.component_mul(s).norm(),
                    (None, TargetSet::Finite { points }) => points.iter().map(|p| p.dot(&g).abs()).fold(0.0, f64::max),
                    (None, _) => unreachable!("only finite sets lack a scale"),
                };
                out.push(sup);
            }
            out
        })
        .collect();
    let (estimate, std_error) = mean_and_se(&per_trial);
    Ok(McEstimate { estimate, std_error })
}

/// `|<X, v>|_{L^p}` with `X = Sigma^{1/2} Z`.
///
/// Gaussian with even integer `p` uses `((p-1)!!)^{1/p} (v^T Sigma v)^{1/2}`;
/// everything else averages `m` frozen-seed draws, with a delta-method
/// standard error.
pub fn lp_marginal_norm(model: DistModel, spectrum: &Spectrum, v: &DVector<f64>, p: f64, m: usize, seed: u64) -> Result<McEstimate> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(LabError::ExponentTooSmall { min: 1.0, got: p });
    }
    if v.len() != spectrum.dim() {
        return Err(LabError::DimensionMismatch { expected: spectrum.dim(), got: v.len() });
    }
    if model == DistModel::Gaussian && p.fract() == 0.0 && (p as u32).is_multiple_of(2) {
        let k = p as u32;
        return Ok(McEstimate {
            estimate: odd_double_factorial(k).powf(1.0 / p) * spectrum.quadratic_form(v).sqrt(),
            std_error: 0.0,
        });
    }
    if m < 2 {
        return Err(LabError::InvalidParameter("need at least 2 draws".into()));
    }
    let sv = spectrum.sqrt_diag().component_mul(v);
    let mut rng = stream(seed, 0, "lp-marginal");
    let mut z = vec![0.0; v.len()];
    let draws: Vec<f64> = (0..m)
        .map(|_| {
            model.draw_into(&mut rng, &mut z);
            let x: f64 = z.iter().zip(sv.iter()).map(|(a, b)| a * b).sum();
            x.abs().powf(p)
        })
        .collect();
    let (mean, se) = mean_and_se(&draws);
    let value = mean.powf(1.0 / p);
    let std_error = if mean > 0.0 { value / (p * mean) * se } else { 0.0 };
    Ok(McEstimate { estimate: value, std_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityProfile {
    pub eff_rank: f64,
    pub radius: f64,
    pub gauss_complexity: f64,
    pub gauss_std_error: f64,
    pub trace: f64,
    pub op_norm: f64,
}

/// Profile of the ellipsoid `Sigma^{1/2} S^{d-1}`.
pub fn complexity_profile(spectrum: &Spectrum, trials: usize, seed: u64) -> Result<ComplexityProfile> {
    let gamma = gauss_complexity_mc(&TargetSet::Ellipsoid { spectrum: spectrum.clone() }, trials, seed)?;
    Ok(ComplexityProfile {
        eff_rank: effective_rank(spectrum),
        radius: ellipsoid_radius(spectrum),
        gauss_complexity: gamma.estimate,
        gauss_std_error: gamma.std_error,
        trace: spectrum.trace(),
        op_norm: spectrum.op_norm(),
    })
}
