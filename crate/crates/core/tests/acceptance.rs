//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tensorlab::complexity::{gauss_complexity_mc, DEFAULT_GAUSS_TRIALS};
use tensorlab::deviation::{increment_subgauss_check, sup_tail_check, verify_symmetrization, DeviationSetup};
use tensorlab::distributions::{materialize_spectrum, sample_anisotropic, DistModel, Spectrum, SpectrumKind, SpectrumSpec};
use tensorlab::experiments::{self, fit, ExperimentConfig};
use tensorlab::order_stats::{verify_lemma_grid, ScalarKind, ScalarLaw};
use tensorlab::seed::{stream, SeedTrace};
use tensorlab::sphere_norm::ascent::AscentSettings;
use tensorlab::sphere_norm::{sup_ascent, sup_exact_p2, sup_grid, TargetSet};
use tensorlab::stats::relative_spread;
use tensorlab::tensor_moments::{MomentFunctional, PopulationOracle, Power, PowerMode};

const SEED: u64 = 20_240_611;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn rng(purpose: &str) -> ChaCha8Rng {
    stream(SEED, 0, purpose)
}

fn random_model(r: &mut ChaCha8Rng) -> DistModel {
    DistModel::ALL[r.random_range(0..3)]
}

fn random_spectrum(r: &mut ChaCha8Rng, d: usize) -> Spectrum {
    let kind = match r.random_range(0..4) {
        0 => SpectrumKind::FlatTop { rank: r.random_range(1..=d) },
        1 => SpectrumKind::PolyDecay { alpha: r.random_range(0.0..2.0) },
        2 => SpectrumKind::ExpDecay { beta: r.random_range(0.0..1.0) },
        _ => SpectrumKind::Explicit((0..d).map(|_| r.random_range(0.05..3.0)).collect()),
    };
    materialize_spectrum(&SpectrumSpec::new(kind, d)).unwrap()
}

fn random_unit(r: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    let v = DVector::from_fn(d, |_, _| r.random_range(-1.0..1.0));
    let n = v.norm();
    v / n
}

fn oracle_for(model: DistModel, spectrum: &Spectrum, power: Power, m: usize, seed: u64) -> PopulationOracle {
    PopulationOracle::for_model(model, spectrum.clone(), power, m, seed).unwrap()
}

fn within_time(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

/// Exact eigen route vs ascent for p = 2.
fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut r = rng("c1");
    let power = Power::signed(2).unwrap();
    // random starts only: the default warm start is the exact answer for p = 2
    let settings = AscentSettings { restarts: 4, warm_start: false, ..Default::default() };
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let d = r.random_range(2..=50);
        let n = r.random_range(d..=500);
        let model = random_model(&mut r);
        let spectrum = random_spectrum(&mut r, d);
        let oracle = oracle_for(model, &spectrum, power, 20_000, i);
        let t = if r.random_bool(0.5) { TargetSet::Sphere { dim: d } } else { TargetSet::Ellipsoid { spectrum: spectrum.clone() } };
        let batch = sample_anisotropic(model, &spectrum, n, &SeedTrace::new(SEED, i, "c1")).unwrap();
        let f = MomentFunctional::new(&batch, power, &oracle).unwrap();
        let exact = sup_exact_p2(&f, &t).unwrap().value;
        let asc = sup_ascent(&f, &t, &settings).unwrap().value;
        // absolute floor for batches whose centered matrix vanishes exactly
        worst = worst.max((asc - exact).abs() / exact.max(1e-6));
    }
    let el = start.elapsed();
    verdict(worst <= 1e-6 && within_time(el, 60), format!("max rel diff {worst:.2e} over 100 instances, {:.1}s", el.as_secs_f64()))
}

/// Ascent vs the exhaustive grid in d = 2, 3.
fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut r = rng("c2");
    let mut worst_excess: f64 = 0.0;
    let mut count = 0;
    let mut fails = 0;
    for d in [2usize, 3] {
        let spectrum = random_spectrum(&mut r, d);
        let resolution = if d == 2 { 100_000 } else { 200_000 };
        for p in [2u32, 3, 4] {
            let power = Power::signed(p).unwrap();
            let oracles: Vec<PopulationOracle> = DistModel::ALL.iter().map(|&m| oracle_for(m, &spectrum, power, 200_000, 17)).collect();
            for b in 0..50u64 {
                let which = (b % 3) as usize;
                let n = r.random_range(10..=60);
                let batch = sample_anisotropic(DistModel::ALL[which], &spectrum, n, &SeedTrace::new(SEED, b, format!("c2/{d}/{p}"))).unwrap();
                let f = MomentFunctional::new(&batch, power, &oracles[which]).unwrap();
                let t = TargetSet::Sphere { dim: d };
                let g = sup_grid(&f, &t, resolution).unwrap().value;
                let a = sup_ascent(&f, &t, &AscentSettings::default()).unwrap().value;
                let tol = 1e-3f64.max(1e-3 * g.abs());
                let diff = (a - g).abs();
                worst_excess = worst_excess.max(diff / tol);
                count += 1;
                if diff > tol {
                    fails += 1;
                }
            }
        }
    }
    let el = start.elapsed();
    verdict(
        fails == 0 && within_time(el, 300),
        format!("{count} comparisons, {fails} outside tolerance, worst diff/tol {worst_excess:.3}, {:.1}s", el.as_secs_f64()),
    )
}

/// Analytic centered gradient vs central differences.
fn criterion_3() -> Verdict {
    let mut r = rng("c3");
    let powers = [
        Power::signed(2).unwrap(),
        Power::signed(3).unwrap(),
        Power::signed(4).unwrap(),
        Power::abs(2.5).unwrap(),
        Power::abs(3.5).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for i in 0..60u64 {
        let d = r.random_range(2..=8);
        let model = random_model(&mut r);
        let power = powers[(i % 5) as usize];
        let spectrum = random_spectrum(&mut r, d);
        let oracle = if model == DistModel::Gaussian && power.mode() == PowerMode::SignedPower {
            PopulationOracle::gaussian_closed_form(spectrum.clone())
        } else {
            PopulationOracle::mc(model, spectrum.clone(), 20_000, i).unwrap()
        };
        let batch = sample_anisotropic(model, &spectrum, 40, &SeedTrace::new(SEED, i, "c3")).unwrap();
        let f = MomentFunctional::new(&batch, power, &oracle).unwrap();
        let v = random_unit(&mut r, d) * r.random_range(0.5..1.5);
        let g = f.centered_gradient(&v).unwrap();
        let h = 1e-5;
        let fd = DVector::from_fn(d, |j, _| {
            let mut a = v.clone();
            let mut b = v.clone();
            a[j] += h;
            b[j] -= h;
            (f.centered_value(&a).unwrap() - f.centered_value(&b).unwrap()) / (2.0 * h)
        });
        worst = worst.max((&fd - &g).norm() / g.norm().max(1e-8));
    }
    verdict(worst <= 1e-5, format!("max rel error {worst:.2e} over 60 cases"))
}

/// Gaussian closed form vs a 10^6-draw Monte Carlo oracle.
fn criterion_4() -> Verdict {
    let mut r = rng("c4");
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let d = r.random_range(1..=6);
        let p = [2u32, 4, 6, 8][(i % 4) as usize];
        let spectrum = random_spectrum(&mut r, d);
        let v = random_unit(&mut r, d);
        let power = Power::signed(p).unwrap();
        let closed = PopulationOracle::gaussian_closed_form(spectrum.clone()).population_moment(&v, power).unwrap().value;
        let mc = PopulationOracle::mc(DistModel::Gaussian, spectrum, 1_000_000, i).unwrap().population_moment(&v, power).unwrap();
        worst = worst.max((mc.value - closed).abs() / mc.std_error);
    }
    verdict(worst <= 4.0, format!("max |mc - closed| / se = {worst:.2} over 20 cases"))
}

/// Jensen lower bound and trace upper bound for the Gaussian complexity.
fn criterion_5() -> Verdict {
    let mut r = rng("c5");
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::INFINITY;
    for i in 0..30u64 {
        let d = r.random_range(1..=60);
        let spectrum = random_spectrum(&mut r, d);
        let t = TargetSet::Ellipsoid { spectrum: spectrum.clone() };
        let g = gauss_complexity_mc(&t, DEFAULT_GAUSS_TRIALS, i).unwrap();
        let lower = (2.0 / std::f64::consts::PI).sqrt() * t.radius();
        worst_low = worst_low.min((g.estimate + 3.0 * g.std_error - lower) / g.std_error);
        worst_high = worst_high.min((spectrum.trace().sqrt() + 3.0 * g.std_error - g.estimate) / g.std_error);
    }
    verdict(
        worst_low >= 0.0 && worst_high >= 0.0,
        format!("min slack (in se): lower {worst_low:.2}, upper {worst_high:.2} over 30 spectra"),
    )
}

fn rate_config(d: usize, p: u32, spectrum: &str, n_list: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        spectrum: spectrum.to_string(),
        d_list: vec![d],
        p_list: vec![p],
        n_list,
        trials_per_cell: 100,
        ascent: AscentSettings { restarts: 8, ..Default::default() },
        master_seed: SEED,
        ..Default::default()
    }
}

fn rate_grid() -> Vec<usize> {
    (8..=13).map(|k| 1usize << k).collect()
}

/// Slopes for criterion 6 and the cells reused by criterion 7.
fn criterion_6() -> (Verdict, Vec<fit::RateFit>) {
    let start = Instant::now();
    let mut fits = Vec::new();
    let mut parts = Vec::new();
    let mut ok = true;
    for (d, p) in [(5usize, 2u32), (10, 2), (5, 3)] {
        let sim = experiments::simulate(&rate_config(d, p, "identity", rate_grid())).unwrap();
        let fit = sim.fits.into_iter().next().unwrap();
        match fit.slope {
            Some(s) => {
                ok &= (-0.65..=-0.35).contains(&s.slope);
                parts.push(format!("(d={d},p={p}) slope {:.3} [{:.3},{:.3}]", s.slope, s.ci_low, s.ci_high));
            }
            None => {
                ok = false;
                parts.push(format!("(d={d},p={p}) no slope: {:?}", fit.flags));
            }
        }
        ok &= sim.flagged_cells == 0;
        fits.push(fit);
    }
    let el = start.elapsed();
    ok &= within_time(el, 1200);
    (verdict(ok, format!("{}, {:.1}s", parts.join("; "), el.as_secs_f64())), fits)
}

/// ratio_spread per curve: criterion-6 cells grouped by p, and flat_top(r).
fn criterion_7(rate_fits: &[fit::RateFit]) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [2u32, 3] {
        let cells: Vec<fit::Cell> = rate_fits.iter().flat_map(|f| f.cells.iter()).filter(|c| c.p == p).cloned().collect();
        let s = fit::ratio_spread(&cells);
        ok &= s <= 6.0;
        parts.push(format!("identity p={p} ({} cells) spread {s:.3}", cells.len()));
    }
    let mut flat = Vec::new();
    for r in [2usize, 8, 32] {
        let sim = experiments::simulate(&rate_config(50, 2, &format!("flat_top:{r}"), rate_grid())).unwrap();
        flat.extend(sim.fits.into_iter().flat_map(|f| f.cells));
    }
    let s = fit::ratio_spread(&flat);
    ok &= s <= 6.0;
    parts.push(format!("flat_top r in {{2,8,32}} d=50 ({} cells) spread {s:.3}", flat.len()));
    verdict(ok, parts.join("; "))
}

/// Order-statistics tail check at lemma scale.
fn criterion_8() -> Verdict {
    let start = Instant::now();
    let reports = verify_lemma_grid(&ScalarLaw::normalized(ScalarKind::Gaussian), 1000, &[3.0, 5.0, 8.0], &[2.0, 4.0], 100_000, SEED).unwrap();
    let mut ok = true;
    let mut worst_freq: f64 = 0.0;
    let mut worst_half: f64 = 0.0;
    for rep in &reports {
        let a = rep.alpha();
        ok &= rep.resolvable && rep.exceed_freq_head <= a && rep.exceed_freq_tail <= a;
        worst_freq = worst_freq.max(rep.exceed_freq_head.max(rep.exceed_freq_tail) / a);
        let h = relative_spread(rep.head_halves[0], rep.head_halves[1]).max(relative_spread(rep.tail_halves[0], rep.tail_halves[1]));
        worst_half = worst_half.max(h);
    }
    let el = start.elapsed();
    ok &= worst_half <= 0.25 && within_time(el, 300);
    verdict(
        ok,
        format!("{} (t,q) cells, max freq/alpha {worst_freq:.3}, max half spread {worst_half:.3}, {:.1}s", reports.len(), el.as_secs_f64()),
    )
}

/// Increment ratios and the supremum-tail constant of the deviation process.
fn criterion_9() -> Verdict {
    let setup = DeviationSetup::new(DistModel::Gaussian, 5, 100, 4.0, SEED).unwrap();
    let inc = increment_subgauss_check(&setup, 50, 2000, SEED).unwrap();
    let tail_setup = DeviationSetup::new(DistModel::Gaussian, 2, 100, 4.0, SEED).unwrap();
    let tail = sup_tail_check(&tail_setup, &TargetSet::Sphere { dim: 2 }, &[1.0, 2.0, 3.0], 10_000, SEED, 1024, &AscentSettings::default()).unwrap();
    let ratio = inc.max_ratio / inc.median_ratio;
    let half = tail.half_spread();
    verdict(
        ratio <= 3.0 && half <= 0.30 && tail.certified,
        format!(
            "max/median increment ratio {ratio:.3} ({} pairs); fitted C {:.4}, halves {:.4}/{:.4} (spread {half:.3})",
            inc.pairs.len(),
            tail.fitted_c,
            tail.halves[0],
            tail.halves[1]
        ),
    )
}

/// Symmetrization on d = 2 for two powers and three models.
fn criterion_10() -> Verdict {
    let spectrum = materialize_spectrum(&SpectrumSpec::identity(2)).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for model in DistModel::ALL {
        for p in [2u32, 4] {
            let rep = verify_symmetrization(model, &spectrum, &TargetSet::Sphere { dim: 2 }, Power::signed(p).unwrap(), 50, 2000, SEED, 512).unwrap();
            ok &= rep.holds;
            parts.push(format!("{model}/p={p}: L={:.2} 2R={:.2}", rep.lhs, 2.0 * rep.rhs));
        }
    }
    verdict(ok, parts.join("; "))
}

fn run_cli(args: &[&str], threads: &str) -> bool {
    Command::new(env!("CARGO_BIN_EXE_tensorlab"))
        .args(args)
        .env("STLAB_THREADS", threads)
        .stderr(std::process::Stdio::null())
        .stdout(std::process::Stdio::null())
        .status()
        .map(|s| s.code() == Some(0) || s.code() == Some(2))
        .unwrap_or(false)
}

/// Every subcommand twice (different thread counts), byte-compared.
fn criterion_11() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let cfg = p("grid.cfg");
    std::fs::write(
        &cfg,
        "model = rademacher\nspectrum = poly_decay:1\nd = 3\np = 2\np = 4\nN = 32\nN = 64\nN = 128\nN = 256\ntrials = 30\nrestarts = 4\noracle_draws = 50000\nseed = 4\n",
    )
    .unwrap();
    let mut mismatched = Vec::new();
    let mut failed = Vec::new();
    for run in ["a", "b"] {
        let threads = if run == "a" { "1" } else { "3" };
        let o = |stem: &str| p(&format!("{stem}_{run}.csv"));
        let cmds: Vec<Vec<String>> = vec![
            vec!["simulate".into(), "--config".into(), cfg.clone(), "--seed".into(), "9".into(), "--out".into(), o("sim")],
            vec!["fit".into(), "--input".into(), o("sim"), "--out".into(), o("fit")],
            vec!["verify-lemma".into(), "--n".into(), "200".into(), "--trials".into(), "5000".into(), "--seed".into(), "3".into(), "--out".into(), o("lemma")],
            vec![
                "verify-deviation".into(), "--d".into(), "3".into(), "--n".into(), "40".into(), "--pairs".into(), "20".into(),
                "--resample-trials".into(), "1000".into(), "--tail-trials".into(), "300".into(), "--grid".into(), "128".into(),
                "--increments-out".into(), o("inc"), "--tail-out".into(), o("tail"),
            ],
            vec!["verify-symmetrization".into(), "--trials".into(), "200".into(), "--grid".into(), "64".into(), "--out".into(), o("sym")],
            vec!["complexity".into(), "--spectrum".into(), "exp_decay:0.3".into(), "--d".into(), "20".into(), "--trials".into(), "5000".into(), "--out".into(), o("cx")],
        ];
        for c in &cmds {
            let args: Vec<&str> = c.iter().map(String::as_str).collect();
            if !run_cli(&args, threads) {
                failed.push(c[0].clone());
            }
        }
    }
    let files = ["sim", "fit", "lemma", "inc", "tail", "sym", "cx"];
    for f in files {
        let a = std::fs::read(p(&format!("{f}_a.csv")));
        let b = std::fs::read(p(&format!("{f}_b.csv")));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b && !a.is_empty() => {}
            _ => mismatched.push(f),
        }
    }
    for f in ["sim", "fit"] {
        let a = std::fs::read(Path::new(&p(&format!("{f}_a.summary"))));
        let b = std::fs::read(Path::new(&p(&format!("{f}_b.summary"))));
        if a.is_err() || a.ok() != b.ok() {
            mismatched.push(f);
        }
    }
    verdict(
        mismatched.is_empty() && failed.is_empty(),
        format!("{} outputs compared, mismatched {:?}, failed commands {:?}", files.len() + 2, mismatched, failed),
    )
}

fn main() {
    // numeric arguments select criteria, e.g. `cargo test --test acceptance -- 2 9`
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let wanted = |id: u32| only.is_empty() || only.contains(&id);
    let mut results: Vec<(u32, Verdict)> = Vec::new();
    let mut record = |id: u32, name: &str, v: Verdict| {
        println!("criterion {id:>2} [{}] {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        results.push((id, v));
    };
    let simple: [(u32, &str, fn() -> Verdict); 5] = [
        (1, "p=2 exactness", criterion_1),
        (2, "oracle equivalence", criterion_2),
        (3, "gradient check", criterion_3),
        (4, "moment oracle", criterion_4),
        (5, "complexity sanity", criterion_5),
    ];
    for (id, name, f) in simple {
        if wanted(id) {
            record(id, name, f());
        }
    }
    if wanted(6) || wanted(7) {
        let (v6, fits) = criterion_6();
        if wanted(6) {
            record(6, "rate slope", v6);
        }
        if wanted(7) {
            record(7, "dimension-free ratio", criterion_7(&fits));
        }
    }
    let rest: [(u32, &str, fn() -> Verdict); 4] = [
        (8, "order-statistics tail", criterion_8),
        (9, "deviation increments and tail", criterion_9),
        (10, "symmetrization", criterion_10),
        (11, "determinism", criterion_11),
    ];
    for (id, name, f) in rest {
        if wanted(id) {
            record(id, name, f());
        }
    }
    let failed = results.iter().filter(|r| !r.1.pass).count();
    println!("acceptance: {} passed, {} failed", results.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
