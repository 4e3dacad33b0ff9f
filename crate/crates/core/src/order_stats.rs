//! Order statistics of independent subgaussian samples.
//!
//! For `|X_i|_{psi2} <= 1`, `t > 0` and `k = t / ln_+(e n / t)`, with high
//! probability `sum_{i <= 3k} (X*_i)^2 <= C t` and
//! `sum_{i > k} (X*_i)^q <= C_q n`, where `X*` is the nonincreasing
//! rearrangement of `|X_1|, ..., |X_n|`. The verifier estimates both
//! constants as empirical `(1 - 2 e^{-t})`-quantiles.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::seed::SeedTrace;
use crate::stats::{exceed_freq, upper_quantile};

/// `t / ln_+(e n / t)`, with `1/0 = +inf`.
pub fn threshold_k(t: f64, n: usize) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(LabError::InvalidParameter(format!("t must be positive, got {t}")));
    }
    if n == 0 {
        return Err(LabError::InvalidParameter("n must be at least 1".into()));
    }
    let ln_plus = (std::f64::consts::E * n as f64 / t).ln().max(0.0);
    if ln_plus == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(t / ln_plus)
    }
}

/// `floor(factor * k)` capped at `n`.
pub fn cutoff(k: f64, factor: f64, n: usize) -> usize {
    let m = (factor * k).floor();
    if m >= n as f64 {
        n
    } else {
        m as usize
    }
}

/// `|X_1|, ..., |X_n|` in nonincreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangedSample {
    pub sorted_abs: Vec<f64>,
    pub seed_trace: Option<SeedTrace>,
}

impl RearrangedSample {
    pub fn len(&self) -> usize {
        self.sorted_abs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_abs.is_empty()
    }
}

pub fn rearrange(values: &[f64]) -> Result<RearrangedSample> {
    if values.is_empty() {
        return Err(LabError::InvalidParameter("cannot rearrange an empty sample".into()));
    }
    let mut sorted_abs: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    // stable, so equal magnitudes keep their original order
    sorted_abs.sort_by(|a, b| b.total_cmp(a));
    Ok(RearrangedSample { sorted_abs, seed_trace: None })
}

/// `sum_{i <= m} (X*_i)^2`; `m` is capped at `n`, empty sums are zero.
pub fn head_sum(r: &RearrangedSample, m: usize) -> f64 {
    r.sorted_abs[..m.min(r.len())].iter().map(|x| x * x).sum()
}

/// `sum_{i > m} (X*_i)^q`.
pub fn tail_qsum(r: &RearrangedSample, m: usize, q: f64) -> f64 {
    r.sorted_abs[m.min(r.len())..].iter().map(|x| x.powf(q)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Gaussian,
    Rademacher,
    Zero,
}

/// `scale * Y` for a standard scalar law `Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLaw {
    pub kind: ScalarKind,
    pub scale: f64,
}

impl ScalarLaw {
    /// Rescaled so that the psi2 norm is exactly 1.
    pub fn normalized(kind: ScalarKind) -> Self {
        let scale = match kind {
            ScalarKind::Gaussian => (3.0f64 / 8.0).sqrt(),
            ScalarKind::Rademacher => 2f64.ln().sqrt(),
            ScalarKind::Zero => 1.0,
        };
        Self { kind, scale }
    }

    /// Analytic psi2 norm: `sqrt(8/3)` for N(0,1), `1/sqrt(ln 2)` for signs.
    pub fn psi2(&self) -> f64 {
        let base = match self.kind {
            ScalarKind::Gaussian => (8.0f64 / 3.0).sqrt(),
            ScalarKind::Rademacher => 1.0 / 2f64.ln().sqrt(),
            ScalarKind::Zero => 0.0,
        };
        self.scale.abs() * base
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let y = match self.kind {
            ScalarKind::Gaussian => rng.sample(StandardNormal),
            ScalarKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ScalarKind::Zero => 0.0,
        };
        self.scale * y
    }
}

/// Lemma verification for one `(n, t, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub n: usize,
    pub t: f64,
    pub q: f64,
    pub k: f64,
    pub trials: usize,
    /// Fraction of trials with `head_sum(floor(3k)) > fitted_c_head * t`.
    pub exceed_freq_head: f64,
    /// Fraction of trials with `tail_qsum(floor(k), q) > fitted_c_tail * n`.
    pub exceed_freq_tail: f64,
    pub fitted_c_head: f64,
    pub fitted_c_tail: f64,
    /// Same quantile for `head_sum(floor(k))`, logged next to the `3k` version.
    pub fitted_c_head_k: f64,
    /// Head and tail constants refitted on each disjoint half of the trials.
    pub head_halves: [f64; 2],
    pub tail_halves: [f64; 2],
    /// `trials >= max(10^3, 20 e^t)`: the failure probability is resolvable.
    pub resolvable: bool,
    pub seed: u64,
}

impl TailReport {
    /// Failure probability `2 e^{-t}` of the lemma.
    pub fn alpha(&self) -> f64 {
        2.0 * (-self.t).exp()
    }
}

/// Per-trial normalized sums for every `(t, q)`.
#[derive(Debug, Clone)]
pub struct LemmaRatios {
    pub n: usize,
    pub ts: Vec<f64>,
    pub qs: Vec<f64>,
    /// `head[ti][trial] = head_sum(floor(3k)) / t`.
    pub head: Vec<Vec<f64>>,
    /// `head_k[ti][trial] = head_sum(floor(k)) / t`.
    pub head_k: Vec<Vec<f64>>,
    /// `tail[ti][qi][trial] = tail_qsum(floor(k), q) / n`.
    pub tail: Vec<Vec<Vec<f64>>>,
}

/// Samples `trials` vectors of `n` draws (trial `j` on stream
/// `(seed, j, "lemma")`) and records both normalized sums for every pair.
pub fn lemma_ratios(law: &ScalarLaw, n: usize, ts: &[f64], qs: &[f64], trials: usize, seed: u64) -> Result<LemmaRatios> {
    let psi = law.psi2();
    if psi > 1.0 + 1e-12 {
        return Err(LabError::NotNormalized(psi));
    }
    if qs.iter().any(|q| !(*q >= 2.0)) {
        return Err(LabError::ExponentTooSmall { min: 2.0, got: qs.iter().copied().fold(f64::NAN, f64::min) });
    }
    if trials == 0 || n == 0 {
        return Err(LabError::InvalidParameter("need n >= 1 and trials >= 1".into()));
    }
    let ks: Vec<f64> = ts.iter().map(|&t| threshold_k(t, n)).collect::<Result<_>>()?;
    let cuts: Vec<(usize, usize)> = ks.iter().map(|&k| (cutoff(k, 3.0, n), cutoff(k, 1.0, n))).collect();

    // one row per trial: [head per t, head_k per t, tail per (t, q)]
    let width = ts.len() * (2 + qs.len());
    let rows: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let trace = SeedTrace::new(seed, j as u64, "lemma");
            let mut rng = trace.rng();
            let draws: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
            let mut r = rearrange(&draws).expect("n >= 1");
            r.seed_trace = Some(trace);
            let mut row = Vec::with_capacity(width);
            for (ti, &t) in ts.iter().enumerate() {
                row.push(head_sum(&r, cuts[ti].0) / t);
            }
            for (ti, &t) in ts.iter().enumerate() {
                row.push(head_sum(&r, cuts[ti].1) / t);
            }
            for cut in &cuts {
                for &q in qs {
                    row.push(tail_qsum(&r, cut.1, q) / n as f64);
                }
            }
            row
        })
        .collect();

    let col = |c: usize| -> Vec<f64> { rows.iter().map(|r| r[c]).collect() };
    let nt = ts.len();
    Ok(LemmaRatios {
        n,
        ts: ts.to_vec(),
        qs: qs.to_vec(),
        head: (0..nt).map(col).collect(),
        head_k: (0..nt).map(|ti| col(nt + ti)).collect(),
        tail: (0..nt)
            .map(|ti| (0..qs.len()).map(|qi| col(2 * nt + ti * qs.len() + qi)).collect())
            .collect(),
    })
}

fn halves(values: &[f64], alpha: f64) -> [f64; 2] {
    let mid = values.len() / 2;
    [upper_quantile(&values[..mid], alpha), upper_quantile(&values[mid..], alpha)]
}

/// Reports for every `(t, q)` pair, sharing samples across pairs.
pub fn verify_lemma_grid(law: &ScalarLaw, n: usize, ts: &[f64], qs: &[f64], trials: usize, seed: u64) -> Result<Vec<TailReport>> {
    let ratios = lemma_ratios(law, n, ts, qs, trials, seed)?;
    let mut out = Vec::with_capacity(ts.len() * qs.len());
    for (ti, &t) in ts.iter().enumerate() {
        let alpha = 2.0 * (-t).exp();
        let head = &ratios.head[ti];
        let c_head = upper_quantile(head, alpha);
        for (qi, &q) in qs.iter().enumerate() {
            let tail = &ratios.tail[ti][qi];
            let c_tail = upper_quantile(tail, alpha);
            out.push(TailReport {
                n,
                t,
                q,
                k: threshold_k(t, n)?,
                trials,
                exceed_freq_head: exceed_freq(head, c_head),
                exceed_freq_tail: exceed_freq(tail, c_tail),
                fitted_c_head: c_head,
                fitted_c_tail: c_tail,
                fitted_c_head_k: upper_quantile(&ratios.head_k[ti], alpha),
                head_halves: halves(head, alpha),
                tail_halves: halves(tail, alpha),
                resolvable: trials as f64 >= 1e3f64.max(20.0 * t.exp()),
                seed,
            });
        }
    }
    Ok(out)
}

pub fn verify_lemma(law: &ScalarLaw, n: usize, t: f64, q: f64, trials: usize, seed: u64) -> Result<TailReport> {
    Ok(verify_lemma_grid(law, n, &[t], &[q], trials, seed)?.remove(0))
}

pub const TAIL_REPORT_HEADER: &str = "n,t,q,k,trials,fitted_C_head,fitted_C_tail,exceed_head,exceed_tail,seed";

pub fn write_tail_reports_csv<W: Write>(reports: &[TailReport], mut out: W) -> Result<()> {
    writeln!(out, "{TAIL_REPORT_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n, r.t, r.q, r.k, r.trials, r.fitted_c_head, r.fitted_c_tail, r.exceed_freq_head, r.exceed_freq_tail, r.seed
        )?;
    }
    Ok(())
}
