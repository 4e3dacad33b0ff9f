//! Monte Carlo grids over `(d, N, p)`: per-cell empirical errors, the
//! predicted rates, slope fits and reports.

pub mod config;
pub mod fit;
pub mod report;

use rand::Rng;
use rayon::prelude::*;

pub use config::{ExperimentConfig, TKind};
pub use fit::{fit_rates, ratio_spread, Cell, RateFit, SlopeFit};
pub use report::emit_report;

use crate::complexity::effective_rank;
use crate::distributions::{materialize_spectrum, sample_anisotropic, sample_isotropic, Spectrum, SpectrumSpec};
use crate::error::{LabError, Result};
use crate::seed::{stream, SeedTrace};
use crate::sphere_norm::{sup_ascent, sup_exact_p2, SupResult, TargetSet};
use crate::stats::{compensated_sum, mean_and_se};
use crate::tensor_moments::{MomentFunctional, PopulationOracle, Power};

/// Fraction of non-converged ascents above which a cell is flagged.
pub const FAILURE_RATE_LIMIT: f64 = 0.05;

/// `|Sigma|^{p/2} (r^{p/2} / N + sqrt(r / N))` with constant 1.
pub fn theory_bound(spectrum: &Spectrum, n: usize, p: u32) -> f64 {
    let r = effective_rank(spectrum);
    let n = n as f64;
    let p = p as f64;
    spectrum.op_norm().powf(p / 2.0) * (r.powf(p / 2.0) / n + (r / n).sqrt())
}

/// `(gamma^p + sqrt(N) gamma rad^{p-1}) / N`. Rejects `gamma` below the
/// Jensen lower bound `sqrt(2/pi) rad`.
pub fn theory_bound_t(gamma: f64, radius: f64, n: usize, p: u32) -> Result<f64> {
    let floor = (2.0 / std::f64::consts::PI).sqrt() * radius;
    if !(gamma >= floor * (1.0 - 1e-12)) || radius < 0.0 {
        return Err(LabError::JensenViolation { gamma, radius });
    }
    let n = n as f64;
    let p = p as i32;
    Ok((gamma.powi(p) + n.sqrt() * gamma * radius.powi(p - 1)) / n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDiagnostics {
    pub method: &'static str,
    pub max_restart_spread: f64,
    pub mean_restart_spread: f64,
    pub failure_rate: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub cell: Cell,
    pub diagnostics: CellDiagnostics,
    /// Per-trial suprema in trial order.
    pub errors: Vec<f64>,
}

fn spectrum_for(cfg: &ExperimentConfig, d: usize) -> Result<(SpectrumSpec, Spectrum)> {
    let spec = SpectrumSpec::parse(&cfg.spectrum, d)?;
    let spectrum = materialize_spectrum(&spec)?;
    Ok((spec, spectrum))
}

/// Seed of the population oracle for dimension `d` and power `p`.
fn oracle_seed(master: u64, d: usize, p: u32) -> u64 {
    stream(master, 0, &format!("oracle/d={d}/p={p}")).random()
}

/// Mean over trials of `sup_{v in T} |(1/N) sum <X_i,v>^p - E <X,v>^p|`.
/// Trial `j` draws from `(master_seed, j, "cell/d=../N=..")`, so cells that
/// differ only in `p` or `T` reuse the same samples.
pub fn run_cell(cfg: &ExperimentConfig, d: usize, n: usize, p: u32, trials: usize) -> Result<CellOutcome> {
    if trials == 0 {
        return Err(LabError::InvalidParameter("trials must be positive".into()));
    }
    let (spec, spectrum) = spectrum_for(cfg, d)?;
    let power = Power::signed(p)?;
    let (oracle_spectrum, t) = match cfg.t_kind {
        TKind::Sphere => (spectrum.clone(), TargetSet::Sphere { dim: d }),
        TKind::Ellipsoid => (materialize_spectrum(&SpectrumSpec::identity(d))?, TargetSet::Ellipsoid { spectrum: spectrum.clone() }),
    };
    let oracle = PopulationOracle::for_model(cfg.model, oracle_spectrum, power, cfg.oracle_draws, oracle_seed(cfg.master_seed, d, p))?;
    let purpose = format!("cell/d={d}/N={n}");

    let results: Vec<SupResult> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let trace = SeedTrace::new(cfg.master_seed, j as u64, purpose.clone());
            let batch = match cfg.t_kind {
                TKind::Sphere => sample_anisotropic(cfg.model, &spectrum, n, &trace)?,
                TKind::Ellipsoid => sample_isotropic(cfg.model, d, n, &trace)?,
            };
            let f = MomentFunctional::new(&batch, power, &oracle)?;
            if p == 2 {
                sup_exact_p2(&f, &t)
            } else {
                let settings = crate::sphere_norm::ascent::AscentSettings {
                    seed: trace.child("restarts").rng().random(),
                    ..cfg.ascent
                };
                sup_ascent(&f, &t, &settings)
            }
        })
        .collect::<Result<_>>()?;

    let errors: Vec<f64> = results.iter().map(|r| r.value).collect();
    let (mean_error, std_error) = mean_and_se(&errors);
    let failures = results.iter().filter(|r| r.optimizer_failed()).count();
    let failure_rate = failures as f64 / trials as f64;
    let spreads: Vec<f64> = results.iter().map(|r| r.best_restart_spread).collect();
    let bound = theory_bound(&spectrum, n, p);
    Ok(CellOutcome {
        cell: Cell {
            d,
            n,
            p,
            model: cfg.model.name().to_string(),
            spectrum_id: spec.id(),
            mean_error,
            std_error,
            theory_bound: bound,
            ratio: mean_error / bound,
            seed: cfg.master_seed,
        },
        diagnostics: CellDiagnostics {
            method: results[0].method.name(),
            max_restart_spread: spreads.iter().copied().fold(0.0, f64::max),
            mean_restart_spread: compensated_sum(spreads.iter().copied()) / trials as f64,
            failure_rate,
            flagged: failure_rate > FAILURE_RATE_LIMIT,
        },
        errors,
    })
}

/// Planned cell with its work estimate `trials * N * d * restarts * iters`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPlan {
    pub d: usize,
    pub n: usize,
    pub p: u32,
    pub work: f64,
    pub over_budget: bool,
}

pub fn plan(cfg: &ExperimentConfig) -> Vec<CellPlan> {
    let mut out = Vec::new();
    for &d in &cfg.d_list {
        for &p in &cfg.p_list {
            for &n in &cfg.n_list {
                let per_trial = if p == 2 { 1.0 } else { 2.0 * cfg.ascent.restarts as f64 * cfg.ascent.max_iters as f64 };
                let work = cfg.trials_per_cell as f64 * n as f64 * d as f64 * per_trial;
                let over_budget = cfg.budget.is_some_and(|b| work > b);
                out.push(CellPlan { d, n, p, work, over_budget });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// One fit per `(d, p)` curve, `d` outer.
    pub fits: Vec<RateFit>,
    pub outcomes: Vec<CellOutcome>,
    /// `key = value` lines for the summary.
    pub global: Vec<(String, String)>,
    pub flagged_cells: usize,
    pub skipped_cells: usize,
}

/// Runs every planned cell, fits each `(d, p)` curve and collects the
/// cross-dimension ratio spread per `p`.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    cfg.validate()?;
    let mut fits = Vec::new();
    let mut outcomes = Vec::new();
    let mut global = Vec::new();
    let mut flagged = 0;
    let mut skipped = 0;
    let plans = plan(cfg);
    for &d in &cfg.d_list {
        for &p in &cfg.p_list {
            let mut cells = Vec::new();
            let mut flags = Vec::new();
            for pl in plans.iter().filter(|pl| pl.d == d && pl.p == p) {
                if pl.over_budget {
                    skipped += 1;
                    flags.push(format!("skipped N={} (work {:e} over budget)", pl.n, pl.work));
                    continue;
                }
                let out = run_cell(cfg, d, pl.n, p, cfg.trials_per_cell)?;
                if out.diagnostics.flagged {
                    flagged += 1;
                    flags.push(format!("N={} optimizer failure rate {}", pl.n, out.diagnostics.failure_rate));
                }
                cells.push(out.cell.clone());
                outcomes.push(out);
            }
            let mut fit = if cfg.trials_per_cell < 30 {
                RateFit::unfitted(cells, "no slope: fewer than 30 trials per cell")
            } else {
                fit_rates(&cells).unwrap_or_else(|e| RateFit::unfitted(cells, format!("no slope: {e}")))
            };
            fit.flags.extend(flags);
            fits.push(fit);
        }
    }
    for &p in &cfg.p_list {
        let cells: Vec<Cell> = fits.iter().flat_map(|f| f.cells.iter()).filter(|c| c.p == p).cloned().collect();
        global.push((format!("ratio_spread_p{p}"), ratio_spread(&cells).to_string()));
    }
    global.push(("regime".into(), "N >= r^(p-1)".into()));
    global.push(("flagged_cells".into(), flagged.to_string()));
    global.push(("skipped_cells".into(), skipped.to_string()));
    Ok(Simulation { fits, outcomes, global, flagged_cells: flagged, skipped_cells: skipped })
}
