//! The `l^q` matrix deviation process
//! `Z_v = | |A v|_q - N^{1/q} |<Z, v>|_{L^q} |` for a random `N x d` matrix
//! `A` with isotropic subgaussian rows, and empirical checks of its
//! subgaussian increments, of the tail of `sup_{v in T} Z_v`, and of the
//! symmetrization inequality for centered moment sums.
//!
//! The randomness in every check is over `A`: increments are measured by
//! resampling whole batches, never by varying `v` within one batch.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::complexity::{gauss_complexity_mc, lp_marginal_norm, DEFAULT_GAUSS_TRIALS};
use crate::distributions::{estimate_psi2, materialize_spectrum, sample_anisotropic, sample_isotropic, DistModel, SampleBatch, Spectrum, SpectrumSpec, PSI2_DEFAULT_TOL};
use crate::error::{LabError, Result};
use crate::seed::{stream, SeedTrace};
use crate::sphere_norm::ascent::{self, AscentSettings, SphereObjective};
use crate::sphere_norm::grid::{argmax_abs, grid_directions, scale_directions};
use crate::sphere_norm::{SupMethod, SupResult, TargetSet};
use crate::stats::{mean_and_se, median, relative_spread, upper_quantile};
use crate::tensor_moments::{Power, PopulationOracle, DEFAULT_ORACLE_DRAWS};

const RADEMACHER_ENUMERATION_DIM: usize = 12;

/// All sign vectors with first entry `+1`. Under `|.|^q` this half of the
/// cube has the same average as the whole cube.
fn sign_patterns(d: usize) -> DMatrix<f64> {
    let rows = 1usize << (d - 1);
    DMatrix::from_fn(rows, d, |i, j| if j == 0 || (i >> (j - 1)) & 1 == 0 { 1.0 } else { -1.0 })
}

/// `v -> |<Z, v>|_{L^q}` for an isotropic model.
#[derive(Debug, Clone)]
pub enum MarginalLq {
    /// Rotation-invariant laws: `c1 * |v|_2`.
    Radial { c1: f64 },
    /// `(E |<W, v>|^q)^{1/q}` over a frozen reference sample.
    Sampled { oracle: PopulationOracle, power: Power },
}

impl MarginalLq {
    /// Gaussian and uniform-sphere laws are rotation invariant and use the
    /// radial form (closed form for Gaussian with even `q`). Rademacher
    /// enumerates its support when `d <= 12` and otherwise freezes `m`
    /// reference draws.
    pub fn for_model(model: DistModel, d: usize, q: f64, m: usize, seed: u64) -> Result<Self> {
        let id = materialize_spectrum(&SpectrumSpec::identity(d))?;
        match model {
            DistModel::Gaussian | DistModel::UniformSphereScaled => {
                let e1 = DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 });
                let c1 = lp_marginal_norm(model, &id, &e1, q, m, seed)?.estimate;
                Ok(MarginalLq::Radial { c1 })
            }
            DistModel::Rademacher => {
                let power = Power::abs(q)?;
                let oracle = if d <= RADEMACHER_ENUMERATION_DIM {
                    PopulationOracle::from_reference(model, id, sign_patterns(d), power)?
                } else {
                    PopulationOracle::for_model(model, id, power, m, seed)?
                };
                Ok(MarginalLq::Sampled { oracle, power })
            }
        }
    }

    pub fn value(&self, v: &DVector<f64>, q: f64) -> f64 {
        match self {
            MarginalLq::Radial { c1 } => c1 * v.norm(),
            MarginalLq::Sampled { oracle, power } => {
                oracle.value(v, *power).expect("dimension checked by caller").max(0.0).powf(1.0 / q)
            }
        }
    }

    pub fn value_and_gradient(&self, v: &DVector<f64>, q: f64) -> (f64, DVector<f64>) {
        match self {
            MarginalLq::Radial { c1 } => {
                let n = v.norm();
                let g = if n > 0.0 { v * (c1 / n) } else { DVector::zeros(v.len()) };
                (c1 * n, g)
            }
            MarginalLq::Sampled { oracle, power } => {
                let c = self.value(v, q);
                if c == 0.0 {
                    return (0.0, DVector::zeros(v.len()));
                }
                let g = oracle.gradient(v, *power).expect("dimension checked by caller");
                (c, g * (c.powf(1.0 - q) / q))
            }
        }
    }

    /// [`Self::value`] at every column of `dirs`.
    pub fn values_on(&self, dirs: &DMatrix<f64>, q: f64) -> Vec<f64> {
        match self {
            MarginalLq::Radial { c1 } => dirs.column_iter().map(|c| c1 * c.norm()).collect(),
            MarginalLq::Sampled { oracle, power } => oracle
                .values_on(dirs, *power)
                .expect("dimension checked by caller")
                .into_iter()
                .map(|m| m.max(0.0).powf(1.0 / q))
                .collect(),
        }
    }
}

/// `|t|^q`, with `powi` for integer `q`.
#[inline]
fn abs_pow(t: f64, q: f64) -> f64 {
    if q.fract() == 0.0 && q <= 64.0 {
        t.abs().powi(q as i32)
    } else {
        t.abs().powf(q)
    }
}

/// `|X v|_q` and its gradient in `v`.
fn lq_norm_and_gradient(x: &DMatrix<f64>, v: &DVector<f64>, q: f64) -> (f64, DVector<f64>) {
    let y = x * v;
    let s: f64 = y.iter().map(|t| abs_pow(*t, q)).sum();
    if s == 0.0 {
        return (0.0, DVector::zeros(v.len()));
    }
    let norm = s.powf(1.0 / q);
    let w = y.map(|t| abs_pow(t, q - 1.0) * t.signum());
    (norm, x.tr_mul(&w) * norm.powf(1.0 - q))
}

/// Model, shape and `l^q` index of the process.
#[derive(Debug, Clone)]
pub struct DeviationSetup {
    pub model: DistModel,
    pub dim: usize,
    pub n: usize,
    /// The `l^q` index (`2(p-1)` or `2p` in the moment bound).
    pub q: f64,
    pub marginal: MarginalLq,
}

impl DeviationSetup {
    pub fn new(model: DistModel, dim: usize, n: usize, q: f64, seed: u64) -> Result<Self> {
        if !(q >= 2.0) {
            return Err(LabError::ExponentTooSmall { min: 2.0, got: q });
        }
        if n == 0 || dim == 0 {
            return Err(LabError::InvalidParameter("need n >= 1 and d >= 1".into()));
        }
        let marginal = MarginalLq::for_model(model, dim, q, DEFAULT_ORACLE_DRAWS, seed)?;
        Ok(Self { model, dim, n, q, marginal })
    }

    pub fn sample(&self, trace: &SeedTrace) -> Result<SampleBatch> {
        sample_isotropic(self.model, self.dim, self.n, trace)
    }

    pub fn process<'a>(&'a self, batch: &'a SampleBatch) -> Result<DeviationProcess<'a>> {
        if batch.dim() != self.dim {
            return Err(LabError::DimensionMismatch { expected: self.dim, got: batch.dim() });
        }
        Ok(DeviationProcess { setup: self, batch })
    }
}

/// `Z_v` for one realization of `A`.
#[derive(Debug, Clone, Copy)]
pub struct DeviationProcess<'a> {
    setup: &'a DeviationSetup,
    batch: &'a SampleBatch,
}

impl DeviationProcess<'_> {
    fn n_root(&self) -> f64 {
        (self.batch.n() as f64).powf(1.0 / self.setup.q)
    }

    /// `|A v|_q`.
    pub fn lq_norm(&self, v: &DVector<f64>) -> f64 {
        let y = &self.batch.rows * v;
        y.iter().map(|t| abs_pow(*t, self.setup.q)).sum::<f64>().powf(1.0 / self.setup.q)
    }

    /// `N^{1/q} |<Z, v>|_{L^q}`.
    pub fn centering(&self, v: &DVector<f64>) -> f64 {
        self.n_root() * self.setup.marginal.value(v, self.setup.q)
    }

    /// Signed deviation `|A v|_q - N^{1/q} |<Z, v>|_{L^q}`.
    pub fn signed(&self, v: &DVector<f64>) -> f64 {
        self.lq_norm(v) - self.centering(v)
    }

    pub fn eval_z(&self, v: &DVector<f64>) -> f64 {
        self.signed(v).abs()
    }

    /// `(|A u|_q, N^{1/q} |<Z,u>|_{L^q})` for every column `u` of `dirs`.
    pub fn parts_on(&self, dirs: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
        let q = self.setup.q;
        let y = &self.batch.rows * dirs;
        let norms = y
            .column_iter()
            .map(|c| c.iter().map(|t| abs_pow(*t, q)).sum::<f64>().powf(1.0 / q))
            .collect();
        let r = self.n_root();
        let cent = self.setup.marginal.values_on(dirs, q).into_iter().map(|c| c * r).collect();
        (norms, cent)
    }

    /// `Z_u` for every column of `dirs`.
    pub fn z_on(&self, dirs: &DMatrix<f64>) -> Vec<f64> {
        let (a, b) = self.parts_on(dirs);
        a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).collect()
    }
}

impl SphereObjective for DeviationProcess<'_> {
    fn dim(&self) -> usize {
        self.setup.dim
    }

    fn value(&self, v: &DVector<f64>) -> f64 {
        self.signed(v)
    }

    fn value_and_gradient(&self, v: &DVector<f64>) -> (f64, DVector<f64>) {
        let q = self.setup.q;
        let (norm, g) = lq_norm_and_gradient(&self.batch.rows, v, q);
        let (c, gc) = self.setup.marginal.value_and_gradient(v, q);
        let r = self.n_root();
        (norm - r * c, g - gc * r)
    }
}

/// How `sup_{v in T} Z_v` is computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupRoute {
    Grid { resolution: usize },
    Ascent(AscentSettings),
}

/// `sup_{v in T} Z_v` for one realization.
pub fn sup_z(proc: &DeviationProcess<'_>, t: &TargetSet, route: SupRoute) -> Result<SupResult> {
    let d = proc.setup.dim;
    if t.dim() != d {
        return Err(LabError::DimensionMismatch { expected: d, got: t.dim() });
    }
    let (dirs, method) = match (t, route) {
        (TargetSet::Finite { points }, _) => {
            let mut m = DMatrix::zeros(d, points.len());
            for (k, p) in points.iter().enumerate() {
                m.set_column(k, p);
            }
            (m, SupMethod::Grid)
        }
        (_, SupRoute::Grid { resolution }) => {
            let scale = t.scale().expect("sphere or ellipsoid");
            (scale_directions(&grid_directions(d, resolution)?, &scale), SupMethod::Grid)
        }
        (_, SupRoute::Ascent(settings)) => {
            let scale = t.scale().expect("sphere or ellipsoid");
            let pb = ascent::Pullback { inner: proc, scale: scale.clone() };
            let out = ascent::maximize_abs(&pb, None, &settings);
            let mut argmax = scale.component_mul(&out.point);
            ascent::canonicalize(&mut argmax);
            return Ok(SupResult {
                value: proc.eval_z(&argmax),
                argmax,
                restarts_used: out.starts,
                best_restart_spread: out.spread,
                method: SupMethod::Ascent,
                converged_restarts: out.converged_starts,
                grid_error_bound: None,
            });
        }
    };
    let values = proc.z_on(&dirs);
    let (k, value) = argmax_abs(&values).ok_or_else(|| LabError::UnsupportedSet("empty set".into()))?;
    let mut argmax = dirs.column(k).into_owned();
    if !matches!(t, TargetSet::Finite { .. }) {
        ascent::canonicalize(&mut argmax);
    }
    Ok(SupResult {
        value,
        argmax,
        restarts_used: 0,
        best_restart_spread: 0.0,
        method,
        converged_restarts: 0,
        grid_error_bound: None,
    })
}

/// Empirical psi2 norm of `Z_v - Z_u` relative to `|u - v|_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairIncrement {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub distance: f64,
    pub psi2: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncrementReport {
    pub pairs: Vec<PairIncrement>,
    pub skipped: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub resample_trials: usize,
    pub seed: u64,
}

/// Increment ratios for explicit pairs. Batch `r` is drawn from stream
/// `(seed, r, "deviation-resample")` and shared by all pairs.
pub fn increment_ratios(setup: &DeviationSetup, pairs: &[(DVector<f64>, DVector<f64>)], resample_trials: usize, seed: u64) -> Result<IncrementReport> {
    let kept: Vec<&(DVector<f64>, DVector<f64>)> = pairs.iter().filter(|(u, v)| u != v).collect();
    let skipped = pairs.len() - kept.len();
    let mut dirs = DMatrix::zeros(setup.dim, 2 * kept.len());
    for (k, (u, v)) in kept.iter().enumerate() {
        if u.len() != setup.dim || v.len() != setup.dim {
            return Err(LabError::DimensionMismatch { expected: setup.dim, got: u.len().max(v.len()) });
        }
        dirs.set_column(2 * k, u);
        dirs.set_column(2 * k + 1, v);
    }
    let per_trial: Vec<Vec<f64>> = (0..resample_trials)
        .into_par_iter()
        .map(|r| {
            let batch = setup.sample(&SeedTrace::new(seed, r as u64, "deviation-resample"))?;
            Ok(setup.process(&batch)?.z_on(&dirs))
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(kept.len());
    for (k, (u, v)) in kept.iter().enumerate() {
        let inc: Vec<f64> = per_trial.iter().map(|z| z[2 * k + 1] - z[2 * k]).collect();
        let psi2 = estimate_psi2(&inc, PSI2_DEFAULT_TOL)?;
        let distance = (u - v).norm();
        out.push(PairIncrement {
            u: (*u).clone(),
            v: (*v).clone(),
            distance,
            psi2,
            ratio: psi2 / distance,
        });
    }
    let ratios: Vec<f64> = out.iter().map(|p| p.ratio).collect();
    Ok(IncrementReport {
        max_ratio: ratios.iter().copied().fold(f64::NAN, f64::max),
        median_ratio: median(&ratios),
        pairs: out,
        skipped,
        resample_trials,
        seed,
    })
}

/// `pair_count` random pairs of unit vectors (pair `j` from stream
/// `(seed, j, "deviation-pair")`), then [`increment_ratios`].
pub fn increment_subgauss_check(setup: &DeviationSetup, pair_count: usize, resample_trials: usize, seed: u64) -> Result<IncrementReport> {
    let pairs: Vec<(DVector<f64>, DVector<f64>)> = (0..pair_count)
        .map(|j| {
            let mut rng = stream(seed, j as u64, "deviation-pair");
            let a = ascent::restart_point(setup.dim, rng.random(), 0);
            let b = ascent::restart_point(setup.dim, rng.random(), 1);
            (a, b)
        })
        .collect();
    increment_ratios(setup, &pairs, resample_trials, seed)
}

pub const INCREMENT_HEADER: &str = "pair,distance,psi2,ratio,resample_trials,seed";

pub fn write_increments_csv<W: Write>(rep: &IncrementReport, mut out: W) -> Result<()> {
    writeln!(out, "{INCREMENT_HEADER}")?;
    for (j, p) in rep.pairs.iter().enumerate() {
        writeln!(out, "{},{},{},{},{},{}", j, p.distance, p.psi2, p.ratio, rep.resample_trials, rep.seed)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupTailRow {
    pub u: f64,
    /// `2 e^{-u^2}`.
    pub alpha: f64,
    /// Smallest constant with exceedance frequency at most `alpha` for this `u`.
    pub c_u: f64,
    /// Frequency of `sup > fitted_c (gamma + u rad)`.
    pub exceed_freq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupTailReport {
    pub gamma: f64,
    pub gamma_std_error: f64,
    pub radius: f64,
    pub rows: Vec<SupTailRow>,
    /// Smallest constant satisfying every `u` simultaneously.
    pub fitted_c: f64,
    pub halves: [f64; 2],
    pub sups: Vec<f64>,
    /// False when the sup came from non-certified ascent.
    pub certified: bool,
    /// Fraction of trials where no ascent start converged.
    pub nonconverged_rate: f64,
    pub trials: usize,
    pub seed: u64,
}

impl SupTailReport {
    pub fn half_spread(&self) -> f64 {
        relative_spread(self.halves[0], self.halves[1])
    }
}

fn fit_tail_constant(sups: &[f64], gamma: f64, radius: f64, u_grid: &[f64]) -> Vec<f64> {
    u_grid
        .iter()
        .map(|&u| {
            let ratios: Vec<f64> = sups.iter().map(|s| s / (gamma + u * radius)).collect();
            upper_quantile(&ratios, 2.0 * (-u * u).exp())
        })
        .collect()
}

/// Tail of `sup_{v in T} Z_v` against `C (gamma(T) + u rad(T))`. The grid
/// route is used when `d <= 3`; otherwise multi-start ascent (reported as
/// non-certified).
pub fn sup_tail_check(
    setup: &DeviationSetup,
    t: &TargetSet,
    u_grid: &[f64],
    trials: usize,
    seed: u64,
    grid_resolution: usize,
    ascent: &AscentSettings,
) -> Result<SupTailReport> {
    if trials < 2 || u_grid.is_empty() {
        return Err(LabError::InvalidParameter("need at least 2 trials and one u".into()));
    }
    let route = if setup.dim <= 3 {
        SupRoute::Grid { resolution: grid_resolution }
    } else {
        SupRoute::Ascent(*ascent)
    };
    let gamma = gauss_complexity_mc(t, DEFAULT_GAUSS_TRIALS, seed ^ 0x9a33a)?;
    let radius = t.radius();
    let results: Vec<SupResult> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let batch = setup.sample(&SeedTrace::new(seed, j as u64, "sup-tail"))?;
            sup_z(&setup.process(&batch)?, t, route)
        })
        .collect::<Result<_>>()?;
    let sups: Vec<f64> = results.iter().map(|r| r.value).collect();
    let failures = results.iter().filter(|r| r.optimizer_failed()).count();

    let per_u = fit_tail_constant(&sups, gamma.estimate, radius, u_grid);
    let fitted_c = per_u.iter().copied().fold(0.0, f64::max);
    let mid = trials / 2;
    let half = |s: &[f64]| fit_tail_constant(s, gamma.estimate, radius, u_grid).into_iter().fold(0.0, f64::max);
    let rows = u_grid
        .iter()
        .zip(&per_u)
        .map(|(&u, &c_u)| {
            let bound = fitted_c * (gamma.estimate + u * radius);
            SupTailRow {
                u,
                alpha: 2.0 * (-u * u).exp(),
                c_u,
                exceed_freq: sups.iter().filter(|&&s| s > bound).count() as f64 / trials as f64,
            }
        })
        .collect();
    Ok(SupTailReport {
        gamma: gamma.estimate,
        gamma_std_error: gamma.std_error,
        radius,
        rows,
        fitted_c,
        halves: [half(&sups[..mid]), half(&sups[mid..])],
        sups,
        certified: matches!(route, SupRoute::Grid { .. }),
        nonconverged_rate: failures as f64 / trials as f64,
        trials,
        seed,
    })
}

pub const SUP_TAIL_HEADER: &str = "u,alpha,c_u,exceed_freq,fitted_C,fitted_C_half1,fitted_C_half2,gamma,radius,trials,seed";

pub fn write_sup_tail_csv<W: Write>(rep: &SupTailReport, mut out: W) -> Result<()> {
    writeln!(out, "{SUP_TAIL_HEADER}")?;
    for r in &rep.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.u, r.alpha, r.c_u, r.exceed_freq, rep.fitted_c, rep.halves[0], rep.halves[1], rep.gamma, rep.radius, rep.trials, rep.seed
        )?;
    }
    Ok(())
}

/// Monte Carlo estimates of both sides of
/// `E sup |sum_i (g(<X_i,v>) - E g)| <= 2 E sup |sum_i eps_i g(<X_i,v>)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizationReport {
    pub model: DistModel,
    pub p: f64,
    pub dim: usize,
    pub n: usize,
    pub trials: usize,
    pub lhs: f64,
    pub lhs_std_error: f64,
    pub rhs: f64,
    pub rhs_std_error: f64,
    /// `sqrt(se_L^2 + 4 se_R^2)`.
    pub combined_std_error: f64,
    /// `lhs <= 2 rhs + 3 combined_std_error`.
    pub holds: bool,
    pub seed: u64,
}

/// Both suprema are taken over the same direction grid (`d <= 3`), with
/// population moments evaluated once per grid point.
#[allow(clippy::too_many_arguments)]
pub fn verify_symmetrization(
    model: DistModel,
    spectrum: &Spectrum,
    t: &TargetSet,
    power: Power,
    n: usize,
    trials: usize,
    seed: u64,
    resolution: usize,
) -> Result<SymmetrizationReport> {
    let d = spectrum.dim();
    if t.dim() != d {
        return Err(LabError::DimensionMismatch { expected: d, got: t.dim() });
    }
    if trials < 2 || n == 0 {
        return Err(LabError::InvalidParameter("need n >= 1 and at least 2 trials".into()));
    }
    let dirs = match t {
        TargetSet::Finite { points } => {
            let mut m = DMatrix::zeros(d, points.len());
            for (k, p) in points.iter().enumerate() {
                m.set_column(k, p);
            }
            m
        }
        _ => {
            if d > 3 {
                return Err(LabError::GridDimension(d));
            }
            scale_directions(&grid_directions(d, resolution)?, &t.scale().expect("sphere or ellipsoid"))
        }
    };
    let oracle = PopulationOracle::for_model(model, spectrum.clone(), power, DEFAULT_ORACLE_DRAWS, seed ^ 0x0ac1e)?;
    let pop = oracle.values_on(&dirs, power)?;

    let per_trial: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let trace = SeedTrace::new(seed, j as u64, "symmetrization");
            let batch = sample_anisotropic(model, spectrum, n, &trace)?;
            let mut rng = trace.child("signs").rng();
            let signs: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            let y = &batch.rows * &dirs;
            let mut lhs = 0.0f64;
            let mut rhs = 0.0f64;
            for (k, col) in y.column_iter().enumerate() {
                let mut centered = 0.0;
                let mut rademacher = 0.0;
                for (i, x) in col.iter().enumerate() {
                    let g = power.apply(*x);
                    centered += g - pop[k];
                    rademacher += signs[i] * g;
                }
                lhs = lhs.max(centered.abs());
                rhs = rhs.max(rademacher.abs());
            }
            Ok((lhs, rhs))
        })
        .collect::<Result<_>>()?;
    let ls: Vec<f64> = per_trial.iter().map(|x| x.0).collect();
    let rs: Vec<f64> = per_trial.iter().map(|x| x.1).collect();
    let (lhs, lse) = mean_and_se(&ls);
    let (rhs, rse) = mean_and_se(&rs);
    let combined = (lse * lse + 4.0 * rse * rse).sqrt();
    Ok(SymmetrizationReport {
        model,
        p: power.p(),
        dim: d,
        n,
        trials,
        lhs,
        lhs_std_error: lse,
        rhs,
        rhs_std_error: rse,
        combined_std_error: combined,
        holds: lhs <= 2.0 * rhs + 3.0 * combined,
        seed,
    })
}

pub const SYMMETRIZATION_HEADER: &str = "model,p,d,n,trials,lhs,lhs_se,rhs,rhs_se,combined_se,holds,seed";

pub fn write_symmetrization_csv<W: Write>(reports: &[SymmetrizationReport], mut out: W) -> Result<()> {
    writeln!(out, "{SYMMETRIZATION_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.model, r.p, r.dim, r.n, r.trials, r.lhs, r.lhs_std_error, r.rhs, r.rhs_std_error, r.combined_std_error, r.holds, r.seed
        )?;
    }
    Ok(())
}
