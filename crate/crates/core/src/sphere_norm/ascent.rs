//! Multi-start projected gradient ascent on the unit sphere.
//!
//! The engine maximizes `|h(v)|` for any smooth `h` exposed through
//! [`SphereObjective`]: each start ascends `+h` and `-h` separately so the
//! kink of `|.|` at zero is never crossed. Steps are
//! `v <- normalize(v + alpha * grad_S h(v))` with Armijo backtracking; the
//! trial step is the Barzilai-Borwein step along the previous move (unit
//! step on the first iteration).

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::seed::stream;

/// A smooth function on `R^d` restricted to the unit sphere.
pub trait SphereObjective: Sync {
    fn dim(&self) -> usize;
    fn value(&self, v: &DVector<f64>) -> f64;
    fn value_and_gradient(&self, v: &DVector<f64>) -> (f64, DVector<f64>);
}

/// `u -> h(s * u)` (elementwise), mapping the sphere onto the ellipsoid
/// `diag(s) S^{d-1}`.
pub struct Pullback<'o, O: ?Sized> {
    pub inner: &'o O,
    pub scale: DVector<f64>,
}

impl<O: SphereObjective + ?Sized> SphereObjective for Pullback<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, u: &DVector<f64>) -> f64 {
        self.inner.value(&self.scale.component_mul(u))
    }

    fn value_and_gradient(&self, u: &DVector<f64>) -> (f64, DVector<f64>) {
        let (f, g) = self.inner.value_and_gradient(&self.scale.component_mul(u));
        (f, g.component_mul(&self.scale))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentSettings {
    /// Random starts, in addition to the optional warm start.
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop when `|grad_S h| <= tol * max(1, |h|)`.
    pub tol: f64,
    /// Seed of the restart schedule; start `j` is drawn from stream `(seed, j)`.
    pub seed: u64,
    /// Let callers add a problem-specific warm start.
    pub warm_start: bool,
}

impl Default for AscentSettings {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 2000,
            tol: 1e-8,
            seed: 0x5eed,
            warm_start: true,
        }
    }
}

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
/// Largest move `alpha * |grad|` per step (radians, roughly).
const MAX_MOVE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOutcome {
    /// `|h(point)|`.
    pub value: f64,
    pub point: DVector<f64>,
    pub converged: bool,
    pub iterations: usize,
}

fn project(g: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    g - v * g.dot(v)
}

/// Ascends `sign * h` from `start`.
pub fn ascend<O: SphereObjective + ?Sized>(obj: &O, sign: f64, start: &DVector<f64>, settings: &AscentSettings) -> AscentOutcome {
    let mut v = start.normalize();
    let (f0, g0) = obj.value_and_gradient(&v);
    let mut f = sign * f0;
    let mut pg = project(&(g0 * sign), &v);
    let mut alpha = 1.0f64;
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iters {
        let gnorm = pg.norm();
        if gnorm <= settings.tol * f.abs().max(1.0) {
            converged = true;
            break;
        }
        if let Some((vp, pgp)) = &prev {
            let s = &v - vp;
            let y = &pg - pgp;
            let sy = s.dot(&y);
            if sy < 0.0 {
                alpha = s.norm_squared() / -sy;
            } else {
                alpha *= 2.0;
            }
        }
        alpha = alpha.min(MAX_MOVE / gnorm);

        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let cand = (&v + &pg * alpha).normalize();
            let fc = sign * obj.value(&cand);
            if fc >= f + ARMIJO_C * alpha * gnorm * gnorm {
                accepted = Some(cand);
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        let Some(next) = accepted else {
            // no ascent possible at working precision
            break;
        };
        let (fn_, gn) = obj.value_and_gradient(&next);
        prev = Some((std::mem::replace(&mut v, next), pg));
        f = sign * fn_;
        pg = project(&(gn * sign), &v);
    }
    if !converged {
        converged = pg.norm() <= settings.tol * f.abs().max(1.0);
    }
    AscentOutcome {
        value: f.abs(),
        point: v,
        converged,
        iterations,
    }
}

/// Random start `j` of the schedule.
pub fn restart_point(dim: usize, seed: u64, j: usize) -> DVector<f64> {
    let mut rng = stream(seed, j as u64, "ascent-restart");
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 0.0 {
            return v / n;
        }
    }
}

/// Flips `v` so its first nonzero coordinate is positive.
pub fn canonicalize(v: &mut DVector<f64>) {
    if let Some(first) = v.iter().find(|x| **x != 0.0) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
}

/// Orders candidates by value (descending), then by lexicographically
/// smallest point.
pub fn better(a: (f64, &DVector<f64>), b: (f64, &DVector<f64>)) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            for (x, y) in a.1.iter().zip(b.1.iter()) {
                match x.total_cmp(y) {
                    std::cmp::Ordering::Less => return true,
                    std::cmp::Ordering::Greater => return false,
                    _ => {}
                }
            }
            false
        }
    }
}

/// Aggregate of a multi-start run of `max |h|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartOutcome {
    pub value: f64,
    /// Canonical maximizer on the sphere.
    pub point: DVector<f64>,
    pub starts: usize,
    pub converged_starts: usize,
    /// max - min over per-start optima.
    pub spread: f64,
    pub iterations: usize,
}

/// Maximizes `|h|` over the sphere from the warm start (if any) plus
/// `settings.restarts` random starts. Starts run in parallel; the reduction
/// is deterministic.
pub fn maximize_abs<O: SphereObjective + ?Sized>(
    obj: &O,
    warm_start: Option<&DVector<f64>>,
    settings: &AscentSettings,
) -> MultiStartOutcome {
    let dim = obj.dim();
    let mut starts: Vec<DVector<f64>> = Vec::with_capacity(settings.restarts + 1);
    if let Some(w) = warm_start.filter(|_| settings.warm_start) {
        if w.norm() > 0.0 {
            starts.push(w.normalize());
        }
    }
    starts.extend((0..settings.restarts).map(|j| restart_point(dim, settings.seed, j)));

    let per_start: Vec<(AscentOutcome, bool, usize)> = starts
        .par_iter()
        .map(|s| {
            let up = ascend(obj, 1.0, s, settings);
            let down = ascend(obj, -1.0, s, settings);
            let iters = up.iterations + down.iterations;
            let conv = up.converged || down.converged;
            let mut best = if down.value > up.value { down } else { up };
            canonicalize(&mut best.point);
            best.value = obj.value(&best.point).abs();
            (best, conv, iters)
        })
        .collect();

    let mut best: Option<&AscentOutcome> = None;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (o, _, _) in &per_start {
        lo = lo.min(o.value);
        hi = hi.max(o.value);
        if best.is_none_or(|b| better((o.value, &o.point), (b.value, &b.point))) {
            best = Some(o);
        }
    }
    let best = best.expect("at least one start");
    MultiStartOutcome {
        value: best.value,
        point: best.point.clone(),
        starts: per_start.len(),
        converged_starts: per_start.iter().filter(|(_, c, _)| *c).count(),
        spread: hi - lo,
        iterations: per_start.iter().map(|(_, _, i)| i).sum(),
    }
}
