use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tensorlab::complexity::{complexity_profile, DEFAULT_GAUSS_TRIALS};
use tensorlab::deviation::{increment_subgauss_check, sup_tail_check, verify_symmetrization, write_increments_csv, write_sup_tail_csv, write_symmetrization_csv, DeviationSetup};
use tensorlab::distributions::{materialize_spectrum, DistModel, SpectrumSpec};
use tensorlab::experiments::{self, config::ExperimentConfig, fit, report};
use tensorlab::order_stats::{verify_lemma_grid, write_tail_reports_csv, ScalarKind, ScalarLaw};
use tensorlab::sphere_norm::ascent::AscentSettings;
use tensorlab::sphere_norm::TargetSet;
use tensorlab::tensor_moments::Power;
use tensorlab::{LabError, Result};

/// Monte Carlo lab for suprema of centered empirical moment tensors.
#[derive(Parser)]
#[command(name = "tensorlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a (d, N, p) grid from a config file and write the cell report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refit slopes from an existing cell CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Order-statistics tail check for i.i.d. subgaussian scalars.
    VerifyLemma {
        #[arg(long, default_value = "gaussian")]
        law: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long = "t", default_values_t = [3.0, 5.0, 8.0])]
        ts: Vec<f64>,
        #[arg(long = "q", default_values_t = [2.0, 4.0])]
        qs: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Increment and supremum-tail checks for the l^q deviation process.
    VerifyDeviation {
        #[arg(long, default_value = "gaussian")]
        model: DistModel,
        #[arg(long, default_value_t = 5)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 4.0)]
        q: f64,
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        #[arg(long, default_value_t = 2000)]
        resample_trials: usize,
        /// Dimension of the supremum-tail check (grid for d <= 3).
        #[arg(long, default_value_t = 2)]
        tail_d: usize,
        #[arg(long, default_value_t = 10_000)]
        tail_trials: usize,
        #[arg(long = "u", default_values_t = [1.0, 2.0, 3.0])]
        us: Vec<f64>,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        increments_out: Option<PathBuf>,
        #[arg(long)]
        tail_out: Option<PathBuf>,
    },
    /// Compare a centered supremum with twice its Rademacher-symmetrized version.
    VerifySymmetrization {
        /// Repeatable; all models when omitted.
        #[arg(long = "model")]
        models: Vec<DistModel>,
        #[arg(long = "p", default_values_t = [2, 4])]
        ps: Vec<u32>,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Effective rank, radius and Gaussian complexity of an ellipsoid.
    Complexity {
        #[arg(long)]
        spectrum: String,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = DEFAULT_GAUSS_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Outcome {
    Ok,
    Flagged,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Simulate { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let path = out
                .or_else(|| cfg.output_path.clone())
                .ok_or_else(|| LabError::Config { line: 0, msg: "no output path (set output or pass --out)".into() })?;
            let plans = experiments::plan(&cfg);
            let total: f64 = plans.iter().filter(|p| !p.over_budget).map(|p| p.work).sum();
            eprintln!("cells = {}, over budget = {}, work estimate = {total:e}", plans.len(), plans.iter().filter(|p| p.over_budget).count());
            let sim = experiments::simulate(&cfg)?;
            report::emit_report(&sim.fits, &sim.global, &path)?;
            eprintln!("wrote {} and {}", path.display(), report::summary_path(&path).display());
            Ok(if sim.flagged_cells > 0 { Outcome::Flagged } else { Outcome::Ok })
        }
        Command::Fit { input, out } => {
            let cells = report::read_cells_csv(&std::fs::read_to_string(&input)?)?;
            let mut curves: Vec<Vec<fit::Cell>> = Vec::new();
            for c in cells {
                match curves.iter_mut().find(|g| {
                    let h = &g[0];
                    (h.model.as_str(), h.spectrum_id.as_str(), h.d, h.p) == (c.model.as_str(), c.spectrum_id.as_str(), c.d, c.p)
                }) {
                    Some(g) => g.push(c),
                    None => curves.push(vec![c]),
                }
            }
            let mut fits: Vec<fit::RateFit> = curves
                .into_iter()
                .map(|g| fit::fit_rates(&g).unwrap_or_else(|e| fit::RateFit::unfitted(g, format!("no slope: {e}"))))
                .collect();
            fits.sort_by(|a, b| {
                let ka = (&a.cells[0].model, &a.cells[0].spectrum_id, a.cells[0].p, a.cells[0].d);
                let kb = (&b.cells[0].model, &b.cells[0].spectrum_id, b.cells[0].p, b.cells[0].d);
                ka.cmp(&kb)
            });
            report::emit_report(&fits, &[], &out)?;
            Ok(Outcome::Ok)
        }
        Command::VerifyLemma { law, n, ts, qs, trials, seed, out } => {
            let kind = match law.as_str() {
                "gaussian" => ScalarKind::Gaussian,
                "rademacher" => ScalarKind::Rademacher,
                other => return Err(LabError::UnknownModel(other.to_string())),
            };
            let reports = verify_lemma_grid(&ScalarLaw::normalized(kind), n, &ts, &qs, trials, seed)?;
            write_tail_reports_csv(&reports, sink(out.as_deref())?)?;
            let bad = reports.iter().any(|r| r.exceed_freq_head > r.alpha() || r.exceed_freq_tail > r.alpha());
            Ok(if bad { Outcome::Flagged } else { Outcome::Ok })
        }
        Command::VerifyDeviation { model, d, n, q, pairs, resample_trials, tail_d, tail_trials, us, grid, seed, increments_out, tail_out } => {
            let setup = DeviationSetup::new(model, d, n, q, seed)?;
            let inc = increment_subgauss_check(&setup, pairs, resample_trials, seed)?;
            write_increments_csv(&inc, sink(increments_out.as_deref())?)?;
            let tail_setup = DeviationSetup::new(model, tail_d, n, q, seed)?;
            let tail = sup_tail_check(&tail_setup, &TargetSet::Sphere { dim: tail_d }, &us, tail_trials, seed, grid, &AscentSettings::default())?;
            write_sup_tail_csv(&tail, sink(tail_out.as_deref())?)?;
            let flagged = inc.max_ratio > 3.0 * inc.median_ratio || tail.nonconverged_rate > experiments::FAILURE_RATE_LIMIT;
            Ok(if flagged { Outcome::Flagged } else { Outcome::Ok })
        }
        Command::VerifySymmetrization { models, ps, d, n, trials, grid, seed, out } => {
            let models = if models.is_empty() { DistModel::ALL.to_vec() } else { models };
            let spectrum = materialize_spectrum(&SpectrumSpec::identity(d))?;
            let mut reports = Vec::new();
            for &model in &models {
                for &p in &ps {
                    reports.push(verify_symmetrization(model, &spectrum, &TargetSet::Sphere { dim: d }, Power::signed(p)?, n, trials, seed, grid)?);
                }
            }
            write_symmetrization_csv(&reports, sink(out.as_deref())?)?;
            Ok(if reports.iter().all(|r| r.holds) { Outcome::Ok } else { Outcome::Flagged })
        }
        Command::Complexity { spectrum, d, trials, seed, out } => {
            let spec = SpectrumSpec::parse(&spectrum, d)?;
            let prof = complexity_profile(&materialize_spectrum(&spec)?, trials, seed)?;
            let mut w = sink(out.as_deref())?;
            writeln!(w, "spectrum_id,d,eff_rank,radius,gauss_complexity,gauss_std_error,trace,op_norm,seed")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                spec.id(), d, prof.eff_rank, prof.radius, prof.gauss_complexity, prof.gauss_std_error, prof.trace, prof.op_norm, seed
            )?;
            Ok(Outcome::Ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = std::env::var("STLAB_THREADS").ok().and_then(|s| s.parse().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: {e}");
        }
    }
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged) => {
            eprintln!("some checks were flagged");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
