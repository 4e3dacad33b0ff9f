//! The centered empirical moment functional
//! `F(v) = (1/N) sum_i g(<X_i, v>) - E g(<X, v>)` with `g(x) = x^p` or `|x|^p`.
//!
//! The moment tensor `(1/N) sum_i X_i^{(x)p}` is never formed; every query
//! costs `O(N d)` through the inner products `X v`. A dense materializer is
//! kept for small `(d, p)` as a cross-check.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::distributions::{sample_anisotropic, DistModel, SampleBatch, Spectrum};
use crate::error::{LabError, Result};
use crate::seed::SeedTrace;
use crate::stats::{mean_and_se, odd_double_factorial};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    /// `x^p`, integer `p` only.
    SignedPower,
    /// `|x|^p`, any real `p >= 2`.
    AbsPower,
}

/// Validated exponent and mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power {
    p: f64,
    mode: PowerMode,
    int_p: Option<i32>,
}

impl Power {
    pub fn new(p: f64, mode: PowerMode) -> Result<Self> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(LabError::ExponentTooSmall { min: 2.0, got: p });
        }
        let int_p = (p.fract() == 0.0 && p <= 64.0).then_some(p as i32);
        if mode == PowerMode::SignedPower && p.fract() != 0.0 {
            return Err(LabError::NonIntegerSignedPower(p));
        }
        Ok(Self { p, mode, int_p })
    }

    pub fn signed(p: u32) -> Result<Self> {
        Self::new(p as f64, PowerMode::SignedPower)
    }

    pub fn abs(p: f64) -> Result<Self> {
        Self::new(p, PowerMode::AbsPower)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mode(&self) -> PowerMode {
        self.mode
    }

    /// Integer exponent, when there is one.
    pub fn integer(&self) -> Option<i32> {
        self.int_p
    }

    pub fn is_even_integer(&self) -> bool {
        matches!(self.int_p, Some(k) if k % 2 == 0)
    }

    /// True when `g(-x) = -g(x)`, i.e. signed mode with odd `p`.
    pub fn is_odd_signed(&self) -> bool {
        self.mode == PowerMode::SignedPower && matches!(self.int_p, Some(k) if k % 2 != 0)
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match (self.mode, self.int_p) {
            (PowerMode::SignedPower, Some(k)) => x.powi(k),
            (PowerMode::AbsPower, Some(k)) => x.abs().powi(k),
            _ => x.abs().powf(self.p),
        }
    }

    /// `g'(x)`; zero at the origin, where `|x|^p` is differentiable for `p > 1`.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match (self.mode, self.int_p) {
            (PowerMode::SignedPower, Some(k)) => self.p * x.powi(k - 1),
            (PowerMode::AbsPower, Some(k)) => self.p * x.abs().powi(k - 1) * x.signum(),
            _ if x == 0.0 => 0.0,
            _ => self.p * x.abs().powf(self.p - 1.0) * x.signum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationKind {
    /// `E<X,v>^p = (p-1)!! (v^T Sigma v)^{p/2}` for even `p`, zero for odd `p`.
    GaussianClosedForm,
    /// Average over a frozen reference sample of `m` draws.
    McOracle { m: usize, seed: u64 },
}

/// Population moment `E g(<X, v>)` for `X = Sigma^{1/2} Z`.
#[derive(Debug, Clone)]
pub struct PopulationOracle {
    kind: PopulationKind,
    model: DistModel,
    spectrum: Spectrum,
    reference: Option<DMatrix<f64>>,
    /// Polynomial form of the reference average for one integer power.
    poly: Option<Arc<MonomialPolynomial>>,
}

/// Population value with its Monte Carlo standard error (0 for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationValue {
    pub value: f64,
    pub std_error: f64,
}

pub const DEFAULT_ORACLE_DRAWS: usize = 1_000_000;

impl PopulationOracle {
    pub fn gaussian_closed_form(spectrum: Spectrum) -> Self {
        Self {
            kind: PopulationKind::GaussianClosedForm,
            model: DistModel::Gaussian,
            spectrum,
            reference: None,
            poly: None,
        }
    }

    /// Draws and freezes `m` reference samples from `model` with covariance
    /// `diag(spectrum)`.
    pub fn mc(model: DistModel, spectrum: Spectrum, m: usize, seed: u64) -> Result<Self> {
        let trace = SeedTrace::new(seed, 0, "population-oracle");
        let reference = sample_anisotropic(model, &spectrum, m, &trace)?.rows;
        Ok(Self {
            kind: PopulationKind::McOracle { m, seed },
            model,
            spectrum,
            reference: Some(reference),
            poly: None,
        })
    }

    /// Closed form for Gaussian signed moments, otherwise a frozen-sample
    /// oracle with `m` draws.
    pub fn for_model(model: DistModel, spectrum: Spectrum, power: Power, m: usize, seed: u64) -> Result<Self> {
        if model == DistModel::Gaussian && power.mode() == PowerMode::SignedPower {
            Ok(Self::gaussian_closed_form(spectrum))
        } else if power.is_odd_signed() {
            // symmetric law: identically zero, no reference sample needed
            Ok(Self {
                kind: PopulationKind::McOracle { m: 0, seed },
                model,
                spectrum,
                reference: None,
                poly: None,
            })
        } else {
            let mut oracle = Self::mc(model, spectrum, m, seed)?;
            oracle.cache_polynomial(power);
            Ok(oracle)
        }
    }

    /// Oracle over a caller-supplied reference sample (rows of `reference`),
    /// e.g. the full support of a discrete law.
    pub fn from_reference(model: DistModel, spectrum: Spectrum, reference: DMatrix<f64>, power: Power) -> Result<Self> {
        check_dim(spectrum.dim(), reference.ncols())?;
        if reference.nrows() == 0 {
            return Err(LabError::TooFewSamples { min: 1, got: 0 });
        }
        let mut oracle = Self {
            kind: PopulationKind::McOracle { m: reference.nrows(), seed: 0 },
            model,
            spectrum,
            reference: Some(reference),
            poly: None,
        };
        oracle.cache_polynomial(power);
        Ok(oracle)
    }

    fn cache_polynomial(&mut self, power: Power) {
        if let Some(p) = polynomial_power(power) {
            if monomial_count(self.dim(), p) <= MAX_MONOMIALS {
                self.poly = Some(Arc::new(MonomialPolynomial::from_reference(self.reference(), p)));
            }
        }
    }

    pub fn kind(&self) -> PopulationKind {
        self.kind
    }

    pub fn model(&self) -> DistModel {
        self.model
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    fn check(&self, power: Power) -> Result<()> {
        if self.kind == PopulationKind::GaussianClosedForm && power.mode() != PowerMode::SignedPower {
            return Err(LabError::ClosedFormUnavailable);
        }
        Ok(())
    }

    fn reference(&self) -> &DMatrix<f64> {
        self.reference.as_ref().expect("reference sample present for non-odd moments")
    }

    pub fn population_moment(&self, v: &DVector<f64>, power: Power) -> Result<PopulationValue> {
        self.check(power)?;
        check_dim(self.dim(), v.len())?;
        if power.is_odd_signed() {
            return Ok(PopulationValue { value: 0.0, std_error: 0.0 });
        }
        match self.kind {
            PopulationKind::GaussianClosedForm => {
                let k = power.integer().expect("signed power is integral") as u32;
                let q = self.spectrum.quadratic_form(v);
                Ok(PopulationValue {
                    value: odd_double_factorial(k) * q.powi(k as i32 / 2),
                    std_error: 0.0,
                })
            }
            PopulationKind::McOracle { .. } => {
                let y = self.reference() * v;
                let g: Vec<f64> = y.iter().map(|&x| power.apply(x)).collect();
                let (value, std_error) = mean_and_se(&g);
                Ok(PopulationValue { value, std_error })
            }
        }
    }

    pub fn population_gradient(&self, v: &DVector<f64>, power: Power) -> Result<DVector<f64>> {
        self.check(power)?;
        check_dim(self.dim(), v.len())?;
        if power.is_odd_signed() {
            return Ok(DVector::zeros(v.len()));
        }
        match self.kind {
            PopulationKind::GaussianClosedForm => {
                let k = power.integer().expect("signed power is integral");
                let q = self.spectrum.quadratic_form(v);
                let coef = k as f64 * odd_double_factorial(k as u32) * q.powi(k / 2 - 1);
                Ok(DVector::from_iterator(
                    v.len(),
                    self.spectrum.values().iter().zip(v.iter()).map(|(l, x)| coef * l * x),
                ))
            }
            PopulationKind::McOracle { .. } => {
                let w = self.reference();
                let y = w * v;
                let dy = y.map(|x| power.derivative(x));
                Ok(w.tr_mul(&dy) / w.nrows() as f64)
            }
        }
    }

    fn cached_poly(&self, power: Power) -> Option<&MonomialPolynomial> {
        let p = polynomial_power(power)?;
        self.poly.as_deref().filter(|poly| poly.degree == p)
    }

    /// Population value without a standard error. Uses the cached
    /// polynomial form of the reference average when available.
    pub fn value(&self, v: &DVector<f64>, power: Power) -> Result<f64> {
        match self.cached_poly(power) {
            Some(poly) => {
                self.check(power)?;
                check_dim(self.dim(), v.len())?;
                Ok(poly.eval(v.as_slice()))
            }
            None => Ok(self.population_moment(v, power)?.value),
        }
    }

    /// Gradient counterpart of [`Self::value`].
    pub fn gradient(&self, v: &DVector<f64>, power: Power) -> Result<DVector<f64>> {
        match self.cached_poly(power) {
            Some(poly) => {
                self.check(power)?;
                check_dim(self.dim(), v.len())?;
                Ok(poly.gradient(v.as_slice()))
            }
            None => self.population_gradient(v, power),
        }
    }

    /// Population moments at every column of `dirs` (`d x K`).
    pub fn values_on(&self, dirs: &DMatrix<f64>, power: Power) -> Result<Vec<f64>> {
        self.check(power)?;
        check_dim(self.dim(), dirs.nrows())?;
        let k = dirs.ncols();
        if power.is_odd_signed() {
            return Ok(vec![0.0; k]);
        }
        match self.kind {
            PopulationKind::GaussianClosedForm => dirs
                .column_iter()
                .map(|c| self.population_moment(&c.into_owned(), power).map(|pv| pv.value))
                .collect(),
            PopulationKind::McOracle { .. } => {
                if let Some(poly) = self.cached_poly(power) {
                    return Ok(poly.eval_columns(dirs));
                }
                let w = self.reference();
                let (m, d) = (w.nrows() as f64, w.ncols());
                match polynomial_power(power) {
                    Some(p) if monomial_count(d, p) * (m + k as f64) < m * k as f64 / 4.0 => {
                        Ok(MonomialPolynomial::from_reference(w, p).eval_columns(dirs))
                    }
                    _ => Ok(mean_powers_on(w, dirs, power)),
                }
            }
        }
    }

    /// `E X X^T` as seen by this oracle.
    pub fn second_moment_matrix(&self) -> DMatrix<f64> {
        match self.kind {
            PopulationKind::GaussianClosedForm => DMatrix::from_diagonal(&DVector::from_column_slice(self.spectrum.values())),
            PopulationKind::McOracle { .. } => match &self.reference {
                Some(w) => w.tr_mul(w) / w.nrows() as f64,
                None => DMatrix::from_diagonal(&DVector::from_column_slice(self.spectrum.values())),
            },
        }
    }

    /// Upper bound on `sup_{|v| <= 1} |E g(<X,v>)|`, used for grid error bounds.
    pub fn abs_bound(&self, power: Power) -> f64 {
        match self.kind {
            PopulationKind::GaussianClosedForm => match power.integer() {
                Some(k) if k % 2 == 0 => odd_double_factorial(k as u32) * self.spectrum.op_norm().powi(k / 2),
                _ => 0.0,
            },
            PopulationKind::McOracle { .. } => match &self.reference {
                Some(w) => mean_row_norm_pow(w, power.p()),
                None => 0.0,
            },
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(LabError::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// `(1/n) sum_i |x_i|^p` over the rows of `x`.
pub(crate) fn mean_row_norm_pow(x: &DMatrix<f64>, p: f64) -> f64 {
    let n = x.nrows();
    (0..n).map(|i| x.row(i).norm().powf(p)).sum::<f64>() / n as f64
}

/// For each column `u` of `dirs`, `(1/n) sum_i g(<x_i, u>)`, in chunks that
/// keep the `n x chunk` product under ~32 MB.
pub(crate) fn mean_powers_on(x: &DMatrix<f64>, dirs: &DMatrix<f64>, power: Power) -> Vec<f64> {
    let n = x.nrows();
    let k = dirs.ncols();
    let chunk = (4_000_000 / n.max(1)).clamp(1, k.max(1));
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    while start < k {
        let len = chunk.min(k - start);
        let y = x * dirs.columns(start, len);
        for c in y.column_iter() {
            out.push(c.iter().map(|&t| power.apply(t)).sum::<f64>() / n as f64);
        }
        start += len;
    }
    out
}

/// Largest expansion cached by [`PopulationOracle::for_model`].
const MAX_MONOMIALS: f64 = 2000.0;

/// Integer power whose reference average is a polynomial in `v`.
fn polynomial_power(power: Power) -> Option<u32> {
    match power.integer() {
        Some(p) if power.mode() == PowerMode::SignedPower || power.is_even_integer() => Some(p as u32),
        _ => None,
    }
}

/// Number of monomials of total degree `p` in `d` variables, as `f64`.
fn monomial_count(d: usize, p: u32) -> f64 {
    // C(p + d - 1, d - 1)
    (1..d).fold(1.0, |acc, j| acc * (p as f64 + j as f64) / j as f64)
}

/// `v -> (1/M) sum_i <w_i, v>^p` expanded as
/// `sum_alpha (p! / alpha!) mean(w^alpha) v^alpha`.
#[derive(Debug)]
struct MonomialPolynomial {
    degree: u32,
    /// Nonzero `(coordinate, exponent)` pairs of each monomial.
    terms: Vec<Vec<(usize, u32)>>,
    coefficients: Vec<f64>,
}

fn exponent_vectors(d: usize, p: u32) -> Vec<Vec<u32>> {
    if d == 1 {
        return vec![vec![p]];
    }
    let mut out = Vec::new();
    for first in (0..=p).rev() {
        for mut rest in exponent_vectors(d - 1, p - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl MonomialPolynomial {
    fn from_reference(w: &DMatrix<f64>, p: u32) -> Self {
        let d = w.ncols();
        let m = w.nrows();
        let stride = p as usize + 1;
        let factorial = |k: u32| (1..=k).fold(1.0, |a, j| a * j as f64);
        let terms: Vec<Vec<(usize, u32)>> = exponent_vectors(d, p)
            .into_iter()
            .map(|alpha| alpha.into_iter().enumerate().filter(|(_, a)| *a > 0).collect())
            .collect();
        let mut sums = vec![0.0; terms.len()];
        let mut powers = vec![1.0; d * stride];
        for i in 0..m {
            for j in 0..d {
                let x = w[(i, j)];
                for e in 1..stride {
                    powers[j * stride + e] = powers[j * stride + e - 1] * x;
                }
            }
            for (s, term) in sums.iter_mut().zip(&terms) {
                *s += term.iter().map(|&(j, a)| powers[j * stride + a as usize]).product::<f64>();
            }
        }
        let coefficients = terms
            .iter()
            .zip(&sums)
            .map(|(term, s)| factorial(p) / term.iter().map(|&(_, a)| factorial(a)).product::<f64>() * s / m as f64)
            .collect();
        Self { degree: p, terms, coefficients }
    }

    fn eval(&self, v: &[f64]) -> f64 {
        self.terms
            .iter()
            .zip(&self.coefficients)
            .map(|(term, c)| c * term.iter().map(|&(j, a)| v[j].powi(a as i32)).product::<f64>())
            .sum()
    }

    fn gradient(&self, v: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(v.len());
        for (term, c) in self.terms.iter().zip(&self.coefficients) {
            for (k, &(j, aj)) in term.iter().enumerate() {
                let rest: f64 = term
                    .iter()
                    .enumerate()
                    .map(|(i, &(jj, a))| if i == k { v[jj].powi(a as i32 - 1) } else { v[jj].powi(a as i32) })
                    .product();
                g[j] += c * aj as f64 * rest;
            }
        }
        g
    }

    fn eval_columns(&self, dirs: &DMatrix<f64>) -> Vec<f64> {
        dirs.column_iter().map(|v| self.eval(v.as_slice())).collect()
    }
}

/// `F(v)` bound to one batch and one population oracle. Immutable; safe to
/// evaluate concurrently.
#[derive(Debug, Clone, Copy)]
pub struct MomentFunctional<'a> {
    batch: &'a SampleBatch,
    power: Power,
    population: &'a PopulationOracle,
}

impl<'a> MomentFunctional<'a> {
    pub fn new(batch: &'a SampleBatch, power: Power, population: &'a PopulationOracle) -> Result<Self> {
        check_dim(population.dim(), batch.dim())?;
        population.check(power)?;
        Ok(Self { batch, power, population })
    }

    pub fn batch(&self) -> &SampleBatch {
        self.batch
    }

    pub fn power(&self) -> Power {
        self.power
    }

    pub fn population(&self) -> &PopulationOracle {
        self.population
    }

    pub fn dim(&self) -> usize {
        self.batch.dim()
    }

    /// `(1/N) sum_i g(<X_i, v>)`.
    pub fn empirical_moment(&self, v: &DVector<f64>) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        let y = &self.batch.rows * v;
        Ok(y.iter().map(|&x| self.power.apply(x)).sum::<f64>() / self.batch.n() as f64)
    }

    pub fn population_moment(&self, v: &DVector<f64>) -> Result<PopulationValue> {
        self.population.population_moment(v, self.power)
    }

    /// Empirical minus population moment.
    pub fn centered_value(&self, v: &DVector<f64>) -> Result<f64> {
        Ok(self.empirical_moment(v)? - self.population.value(v, self.power)?)
    }

    pub fn centered_gradient(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.centered_value_and_gradient(v)?.1)
    }

    /// Value and gradient sharing one pass over `X v`.
    pub fn centered_value_and_gradient(&self, v: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        check_dim(self.dim(), v.len())?;
        let n = self.batch.n() as f64;
        let y = &self.batch.rows * v;
        let emp = y.iter().map(|&x| self.power.apply(x)).sum::<f64>() / n;
        let dy = y.map(|x| self.power.derivative(x));
        let grad = self.batch.rows.tr_mul(&dy) / n;
        let pop = self.population.value(v, self.power)?;
        let pop_grad = self.population.gradient(v, self.power)?;
        Ok((emp - pop, grad - pop_grad))
    }

    /// Centered values at every column of `dirs` (`d x K`).
    pub fn centered_values_on(&self, dirs: &DMatrix<f64>) -> Result<Vec<f64>> {
        check_dim(self.dim(), dirs.nrows())?;
        let emp = mean_powers_on(&self.batch.rows, dirs, self.power);
        let pop = self.population.values_on(dirs, self.power)?;
        Ok(emp.into_iter().zip(pop).map(|(e, p)| e - p).collect())
    }

    /// Lipschitz constant of `F` on the unit ball (w.r.t. the Euclidean norm).
    pub fn lipschitz_bound(&self) -> f64 {
        let p = self.power.p();
        p * (mean_row_norm_pow(&self.batch.rows, p) + self.population.abs_bound(self.power))
    }
}

pub const DENSE_MAX_DIM: usize = 6;
pub const DENSE_MAX_ORDER: u32 = 4;

/// Dense `(1/N) sum_i X_i^{(x)p}` as a flat row-major `d^p` array.
pub fn dense_moment_tensor(batch: &SampleBatch, p: u32) -> Result<Vec<f64>> {
    let d = batch.dim();
    if d > DENSE_MAX_DIM || p > DENSE_MAX_ORDER || p == 0 {
        return Err(LabError::InvalidParameter(format!(
            "dense tensor limited to d <= {DENSE_MAX_DIM}, 1 <= p <= {DENSE_MAX_ORDER}"
        )));
    }
    let size = d.pow(p);
    let mut t = vec![0.0; size];
    let n = batch.n();
    for i in 0..n {
        let row = batch.rows.row(i);
        for (flat, slot) in t.iter_mut().enumerate() {
            let mut idx = flat;
            let mut prod = 1.0;
            for _ in 0..p {
                prod *= row[idx % d];
                idx /= d;
            }
            *slot += prod;
        }
    }
    t.iter_mut().for_each(|x| *x /= n as f64);
    Ok(t)
}

/// `<T, v^{(x)p}>` for a flat dense tensor.
pub fn contract_dense(tensor: &[f64], d: usize, p: u32, v: &DVector<f64>) -> f64 {
    tensor
        .iter()
        .enumerate()
        .map(|(flat, t)| {
            let mut idx = flat;
            let mut prod = *t;
            for _ in 0..p {
                prod *= v[idx % d];
                idx /= d;
            }
            prod
        })
        .sum()
}

/// CSV dump: one row per entry, `i1,...,ip,value` with the first index
/// most significant.
pub fn write_dense_csv<W: Write>(tensor: &[f64], d: usize, p: u32, mut out: W) -> Result<()> {
    let header: Vec<String> = (1..=p).map(|k| format!("i{k}")).collect();
    writeln!(out, "{},value", header.join(","))?;
    for (flat, value) in tensor.iter().enumerate() {
        let mut idx = vec![0usize; p as usize];
        let mut rest = flat;
        for k in (0..p as usize).rev() {
            idx[k] = rest % d;
            rest /= d;
        }
        let cols: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        writeln!(out, "{},{}", cols.join(","), value)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{materialize_spectrum, sample_isotropic, SpectrumSpec};

    fn batch(rows: &[&[f64]]) -> SampleBatch {
        let d = rows[0].len();
        let flat: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        SampleBatch {
            rows: DMatrix::from_row_slice(rows.len(), d, &flat),
            seed_trace: SeedTrace::new(0, 0, "manual"),
        }
    }

    fn gauss(d: usize) -> PopulationOracle {
        PopulationOracle::gaussian_closed_form(materialize_spectrum(&SpectrumSpec::identity(d)).unwrap())
    }

    #[test]
    fn empirical_moment_hand_cases() {
        let pop = gauss(2);
        let b = batch(&[&[1.0, 0.0]]);
        let f = MomentFunctional::new(&b, Power::signed(2).unwrap(), &pop).unwrap();
        assert_eq!(f.empirical_moment(&DVector::from_vec(vec![1.0, 0.0])).unwrap(), 1.0);

        let b = batch(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        let f = MomentFunctional::new(&b, Power::signed(3).unwrap(), &pop).unwrap();
        assert_eq!(f.empirical_moment(&DVector::from_vec(vec![1.0, 0.0])).unwrap(), 0.0);

        let b = batch(&[&[1.0, 1.0], &[2.0, 0.0]]);
        let f = MomentFunctional::new(&b, Power::signed(2).unwrap(), &pop).unwrap();
        let s = 0.5f64.sqrt();
        let m = f.empirical_moment(&DVector::from_vec(vec![s, s])).unwrap();
        assert!((m - 2.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let pop = gauss(2);
        let b = batch(&[&[1.0, 0.0]]);
        let f = MomentFunctional::new(&b, Power::signed(2).unwrap(), &pop).unwrap();
        assert_eq!(
            f.empirical_moment(&DVector::from_vec(vec![1.0])),
            Err(LabError::DimensionMismatch { expected: 2, got: 1 })
        );
        let pop3 = gauss(3);
        assert!(MomentFunctional::new(&b, Power::signed(2).unwrap(), &pop3).is_err());
    }

    #[test]
    fn power_validation() {
        assert!(matches!(Power::new(2.5, PowerMode::SignedPower), Err(LabError::NonIntegerSignedPower(_))));
        assert!(Power::abs(2.5).is_ok());
        assert!(matches!(Power::abs(1.5), Err(LabError::ExponentTooSmall { .. })));
    }

    #[test]
    fn closed_form_population_values() {
        let pop = gauss(2);
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(pop.population_moment(&e1, Power::signed(2).unwrap()).unwrap().value, 1.0);
        let s = 0.5f64.sqrt();
        let u = DVector::from_vec(vec![s, -s]);
        let v4 = pop.population_moment(&u, Power::signed(4).unwrap()).unwrap().value;
        assert!((v4 - 3.0).abs() < 1e-14);
        let aniso = PopulationOracle::gaussian_closed_form(Spectrum::try_from(vec![5.0, 2.0]).unwrap());
        assert_eq!(aniso.population_moment(&u, Power::signed(3).unwrap()).unwrap().value, 0.0);
        assert_eq!(
            pop.population_moment(&e1, Power::abs(2.0).unwrap()),
            Err(LabError::ClosedFormUnavailable)
        );
    }

    #[test]
    fn centered_value_hand_case() {
        let pop = gauss(2);
        let b = batch(&[&[1.0, 0.0]]);
        let f = MomentFunctional::new(&b, Power::signed(2).unwrap(), &pop).unwrap();
        assert_eq!(f.centered_value(&DVector::from_vec(vec![0.0, 1.0])).unwrap(), -1.0);
    }

    #[test]
    fn exact_isotropic_second_moment_centers_to_zero() {
        // rows sqrt(2) e_1, sqrt(2) e_2: (1/N) sum X X^T = I exactly
        let r = 2f64.sqrt();
        let b = batch(&[&[r, 0.0], &[0.0, r]]);
        let pop = gauss(2);
        let f = MomentFunctional::new(&b, Power::signed(2).unwrap(), &pop).unwrap();
        let v = DVector::from_vec(vec![0.6, 0.8]);
        assert!(f.centered_value(&v).unwrap().abs() < 1e-15);
    }

    #[test]
    fn mc_oracle_matches_closed_form_p4() {
        let spec = materialize_spectrum(&SpectrumSpec::identity(2)).unwrap();
        let mc = PopulationOracle::mc(DistModel::Gaussian, spec, 1_000_000, 3).unwrap();
        let s = 0.5f64.sqrt();
        let v = DVector::from_vec(vec![s, s]);
        let pv = mc.population_moment(&v, Power::signed(4).unwrap()).unwrap();
        assert!((pv.value - 3.0).abs() < 3.0 * pv.std_error, "{pv:?}");
    }

    #[test]
    fn rademacher_fourth_moment_via_oracle() {
        // E<Z,v>^4 = 3 |v|^4 - 2 sum v_j^4 for independent signs
        let spec = materialize_spectrum(&SpectrumSpec::identity(3)).unwrap();
        let power = Power::signed(4).unwrap();
        let pop = PopulationOracle::for_model(DistModel::Rademacher, spec, power, 200_000, 5).unwrap();
        let v = DVector::from_vec(vec![0.2, -0.5, 0.7]);
        let n2 = v.norm_squared();
        let exact = 3.0 * n2 * n2 - 2.0 * v.iter().map(|x: &f64| x.powi(4)).sum::<f64>();
        let pv = pop.population_moment(&v, power).unwrap();
        assert!((pv.value - exact).abs() < 4.0 * pv.std_error);
    }

    #[test]
    fn odd_signed_oracle_is_exactly_zero() {
        let spec = materialize_spectrum(&SpectrumSpec::identity(3)).unwrap();
        let power = Power::signed(3).unwrap();
        let pop = PopulationOracle::for_model(DistModel::UniformSphereScaled, spec, power, 1000, 1).unwrap();
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(pop.population_moment(&v, power).unwrap().value, 0.0);
        assert_eq!(pop.population_gradient(&v, power).unwrap(), DVector::zeros(3));
    }

    #[test]
    fn dense_tensor_contraction_matches_lazy_evaluation() {
        let b = sample_isotropic(DistModel::Gaussian, 3, 40, &SeedTrace::new(2, 0, "dense")).unwrap();
        let pop = gauss(3);
        let v = DVector::from_vec(vec![0.3, -0.4, 0.5]);
        for p in 2..=4u32 {
            let t = dense_moment_tensor(&b, p).unwrap();
            let f = MomentFunctional::new(&b, Power::signed(p).unwrap(), &pop).unwrap();
            let lazy = f.empirical_moment(&v).unwrap();
            assert!((contract_dense(&t, 3, p, &v) - lazy).abs() < 1e-12 * (1.0 + lazy.abs()));
        }
        assert!(dense_moment_tensor(&b, 5).is_err());
    }

    #[test]
    fn dense_csv_layout() {
        let b = batch(&[&[1.0, 2.0]]);
        let t = dense_moment_tensor(&b, 2).unwrap();
        let mut out = Vec::new();
        write_dense_csv(&t, 2, 2, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "i1,i2,value\n0,0,1\n0,1,2\n1,0,2\n1,1,4\n");
    }

    #[test]
    fn monomial_expansion_matches_direct_average() {
        let trace = SeedTrace::new(8, 0, "mono");
        let w = sample_isotropic(DistModel::Rademacher, 3, 500, &trace).unwrap().rows;
        assert_eq!(exponent_vectors(3, 4).len(), 15);
        assert_eq!(monomial_count(3, 4), 15.0);
        let dirs = DMatrix::from_fn(3, 7, |i, j| ((i * 7 + j) as f64).sin());
        for p in [2u32, 3, 4, 6] {
            let poly = MonomialPolynomial::from_reference(&w, p).eval_columns(&dirs);
            let direct = mean_powers_on(&w, &dirs, Power::signed(p).unwrap());
            for (a, b) in poly.iter().zip(&direct) {
                assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()), "p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn cached_polynomial_matches_reference_average() {
        let s = materialize_spectrum(&SpectrumSpec::explicit(vec![2.0, 1.0, 0.3])).unwrap();
        for power in [Power::signed(4).unwrap(), Power::abs(2.0).unwrap()] {
            let o = PopulationOracle::for_model(DistModel::Rademacher, s.clone(), power, 5000, 2).unwrap();
            assert!(o.poly.is_some());
            let v = DVector::from_vec(vec![0.2, -0.9, 0.4]);
            let direct = o.population_moment(&v, power).unwrap().value;
            assert!((o.value(&v, power).unwrap() - direct).abs() < 1e-12 * direct);
            let g = o.gradient(&v, power).unwrap();
            let g_direct = o.population_gradient(&v, power).unwrap();
            assert!((g - &g_direct).norm() < 1e-12 * g_direct.norm());
        }
        // a different power falls back to the reference sample
        let o = PopulationOracle::for_model(DistModel::Rademacher, s, Power::signed(4).unwrap(), 5000, 2).unwrap();
        let v = DVector::from_vec(vec![0.2, -0.9, 0.4]);
        let p6 = Power::signed(6).unwrap();
        assert_eq!(o.value(&v, p6).unwrap(), o.population_moment(&v, p6).unwrap().value);
    }

    #[test]
    fn batched_values_match_pointwise() {
        let b = sample_isotropic(DistModel::Gaussian, 2, 30, &SeedTrace::new(4, 0, "grid")).unwrap();
        let pop = gauss(2);
        let f = MomentFunctional::new(&b, Power::signed(4).unwrap(), &pop).unwrap();
        let dirs = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.6, 0.0, 1.0, 0.8]);
        let batched = f.centered_values_on(&dirs).unwrap();
        for (k, c) in dirs.column_iter().enumerate() {
            let single = f.centered_value(&c.into_owned()).unwrap();
            assert!((batched[k] - single).abs() < 1e-12);
        }
    }
}
