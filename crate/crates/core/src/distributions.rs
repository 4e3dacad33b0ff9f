//! Covariance spectra and mean-zero subgaussian samplers.
//!
//! Covariances are diagonal: every quantity the lab measures is invariant
//! under orthogonal conjugation, so anisotropy enters only through the
//! eigenvalue profile. [`sample_rotated`] exists for regression tests that
//! want a non-diagonal covariance anyway.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{LabError, Result};
use crate::seed::SeedTrace;

/// Shape of the eigenvalue profile.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumKind {
    /// `rank` unit eigenvalues followed by zeros.
    FlatTop { rank: usize },
    /// `lambda_i = i^(-alpha)`, `i = 1..=d`.
    PolyDecay { alpha: f64 },
    /// `lambda_i = exp(-beta * (i - 1))`.
    ExpDecay { beta: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    pub dim: usize,
}

impl SpectrumSpec {
    pub fn new(kind: SpectrumKind, dim: usize) -> Self {
        Self { kind, dim }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(SpectrumKind::FlatTop { rank: dim }, dim)
    }

    pub fn flat_top(rank: usize, dim: usize) -> Self {
        Self::new(SpectrumKind::FlatTop { rank }, dim)
    }

    pub fn explicit(values: Vec<f64>) -> Self {
        let dim = values.len();
        Self::new(SpectrumKind::Explicit(values), dim)
    }

    /// Parses `identity`, `flat_top:R`, `poly_decay:A`, `exp_decay:B` or
    /// `explicit:v1,v2,...` for dimension `dim`. For `explicit` the dimension
    /// is the number of listed values.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let text = text.trim();
        let (head, arg) = match text.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (text, None),
        };
        let bad = || LabError::Parse(format!("bad spectrum `{text}`"));
        let num = |a: Option<&str>| -> Result<f64> { a.ok_or_else(bad)?.parse::<f64>().map_err(|_| bad()) };
        let kind = match head {
            "identity" => SpectrumKind::FlatTop { rank: dim },
            "flat_top" => SpectrumKind::FlatTop {
                rank: arg.ok_or_else(bad)?.parse().map_err(|_| bad())?,
            },
            "poly_decay" => SpectrumKind::PolyDecay { alpha: num(arg)? },
            "exp_decay" => SpectrumKind::ExpDecay { beta: num(arg)? },
            "explicit" => {
                let values = arg
                    .ok_or_else(bad)?
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(Self::explicit(values));
            }
            _ => return Err(bad()),
        };
        Ok(Self::new(kind, dim))
    }

    /// Stable identifier used in report rows.
    pub fn id(&self) -> String {
        match &self.kind {
            SpectrumKind::FlatTop { rank } if *rank == self.dim => "identity".to_string(),
            SpectrumKind::FlatTop { rank } => format!("flat_top:{rank}"),
            SpectrumKind::PolyDecay { alpha } => format!("poly_decay:{alpha}"),
            SpectrumKind::ExpDecay { beta } => format!("exp_decay:{beta}"),
            SpectrumKind::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("explicit:{}", parts.join(";"))
            }
        }
    }
}

/// Materialized eigenvalues: nonincreasing, length `d`, first entry positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn trace(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn op_norm(&self) -> f64 {
        self.0[0]
    }

    pub fn sqrt_diag(&self) -> DVector<f64> {
        DVector::from_iterator(self.0.len(), self.0.iter().map(|l| l.sqrt()))
    }

    /// Multiplies every eigenvalue by `c > 0`.
    pub fn scaled(&self, c: f64) -> Spectrum {
        Spectrum(self.0.iter().map(|l| l * c).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&l| l == 1.0)
    }

    /// `v^T Sigma v`.
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        self.0.iter().zip(v.iter()).map(|(l, x)| l * x * x).sum()
    }
}

impl TryFrom<Vec<f64>> for Spectrum {
    type Error = LabError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        materialize_spectrum(&SpectrumSpec::explicit(values))
    }
}

pub fn materialize_spectrum(spec: &SpectrumSpec) -> Result<Spectrum> {
    let d = spec.dim;
    if d == 0 {
        return Err(LabError::ZeroDimension);
    }
    let values = match &spec.kind {
        SpectrumKind::FlatTop { rank } => {
            if *rank > d {
                return Err(LabError::RankExceedsDimension { rank: *rank, dim: d });
            }
            if *rank == 0 {
                return Err(LabError::ZeroSpectrum);
            }
            (0..d).map(|i| if i < *rank { 1.0 } else { 0.0 }).collect()
        }
        SpectrumKind::PolyDecay { alpha } => {
            if !(*alpha > 0.0) || !alpha.is_finite() {
                return Err(LabError::InvalidParameter(format!("poly_decay alpha must be positive, got {alpha}")));
            }
            (1..=d).map(|i| (i as f64).powf(-alpha)).collect()
        }
        SpectrumKind::ExpDecay { beta } => {
            if !(*beta > 0.0) || !beta.is_finite() {
                return Err(LabError::InvalidParameter(format!("exp_decay beta must be positive, got {beta}")));
            }
            (0..d).map(|i| (-beta * i as f64).exp()).collect()
        }
        SpectrumKind::Explicit(v) => {
            if v.len() != d {
                return Err(LabError::DimensionMismatch { expected: d, got: v.len() });
            }
            if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
                return Err(LabError::InvalidParameter("explicit eigenvalues must be finite and nonnegative".into()));
            }
            let mut v = v.clone();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        }
    };
    if values[0] <= 0.0 {
        return Err(LabError::ZeroSpectrum);
    }
    Ok(Spectrum(values))
}

/// Isotropic mean-zero subgaussian laws on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistModel {
    Gaussian,
    /// Independent symmetric signs.
    Rademacher,
    /// Uniform on the sphere of radius `sqrt(d)`.
    UniformSphereScaled,
}

impl DistModel {
    pub const ALL: [DistModel; 3] = [DistModel::Gaussian, DistModel::Rademacher, DistModel::UniformSphereScaled];

    pub fn name(&self) -> &'static str {
        match self {
            DistModel::Gaussian => "gaussian",
            DistModel::Rademacher => "rademacher",
            DistModel::UniformSphereScaled => "uniform_sphere_scaled",
        }
    }

    /// Fills `out` with one isotropic draw.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            DistModel::Gaussian => out.iter_mut().for_each(|x| *x = rng.sample(StandardNormal)),
            DistModel::Rademacher => out
                .iter_mut()
                .for_each(|x| *x = if rng.random::<bool>() { 1.0 } else { -1.0 }),
            DistModel::UniformSphereScaled => loop {
                out.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
                let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    let s = (out.len() as f64).sqrt() / norm;
                    out.iter_mut().for_each(|x| *x *= s);
                    break;
                }
            },
        }
    }
}

impl fmt::Display for DistModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistModel {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(DistModel::Gaussian),
            "rademacher" => Ok(DistModel::Rademacher),
            "uniform_sphere_scaled" | "sphere" => Ok(DistModel::UniformSphereScaled),
            other => Err(LabError::UnknownModel(other.to_string())),
        }
    }
}

/// `N x d` matrix of i.i.d. rows and the stream that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub rows: DMatrix<f64>,
    pub seed_trace: SeedTrace,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    /// `(1/N) sum_i X_i X_i^T`.
    pub fn second_moment(&self) -> DMatrix<f64> {
        self.rows.tr_mul(&self.rows) / self.n() as f64
    }
}

pub fn sample_isotropic(model: DistModel, d: usize, n: usize, seed_trace: &SeedTrace) -> Result<SampleBatch> {
    if d == 0 {
        return Err(LabError::ZeroDimension);
    }
    if n == 0 {
        return Err(LabError::InvalidParameter("sample size must be at least 1".into()));
    }
    let mut rng = seed_trace.rng();
    let mut rows = DMatrix::zeros(n, d);
    let mut buf = vec![0.0; d];
    for i in 0..n {
        model.draw_into(&mut rng, &mut buf);
        for (j, x) in buf.iter().enumerate() {
            rows[(i, j)] = *x;
        }
    }
    Ok(SampleBatch {
        rows,
        seed_trace: seed_trace.clone(),
    })
}

/// Rows `diag(sqrt(lambda)) Z_i` with `Z_i` from [`sample_isotropic`] on the
/// same stream.
pub fn sample_anisotropic(model: DistModel, spectrum: &Spectrum, n: usize, seed_trace: &SeedTrace) -> Result<SampleBatch> {
    let mut batch = sample_isotropic(model, spectrum.dim(), n, seed_trace)?;
    for (j, s) in spectrum.sqrt_diag().iter().enumerate() {
        if *s != 1.0 {
            batch.rows.column_mut(j).scale_mut(*s);
        }
    }
    Ok(batch)
}

/// Rows `Q diag(sqrt(lambda)) Z_i` for an orthogonal `rotation = Q`.
pub fn sample_rotated(
    model: DistModel,
    spectrum: &Spectrum,
    rotation: &DMatrix<f64>,
    n: usize,
    seed_trace: &SeedTrace,
) -> Result<SampleBatch> {
    let d = spectrum.dim();
    if rotation.nrows() != d || rotation.ncols() != d {
        return Err(LabError::DimensionMismatch { expected: d, got: rotation.nrows() });
    }
    let mut batch = sample_anisotropic(model, spectrum, n, seed_trace)?;
    batch.rows = &batch.rows * rotation.transpose();
    Ok(batch)
}

pub const PSI2_DEFAULT_TOL: f64 = 1e-6;

/// Empirical psi2 norm `inf { t > 0 : mean(exp(z^2 / t^2)) <= 2 }`, found by
/// bisection to relative tolerance `tol`.
///
/// The lower end of the bracket, `max|z| / sqrt(ln(2n))`, is where the single
/// largest term alone already reaches `2n`; below it the constraint cannot
/// hold, and above it every exponent is at most `ln(2n)`, so no overflow.
pub fn estimate_psi2(samples: &[f64], tol: f64) -> Result<f64> {
    const MIN_SAMPLES: usize = 100;
    if samples.len() < MIN_SAMPLES {
        return Err(LabError::TooFewSamples { min: MIN_SAMPLES, got: samples.len() });
    }
    let max_abs = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !max_abs.is_finite() {
        return Err(LabError::InvalidParameter("non-finite sample".into()));
    }
    if max_abs == 0.0 {
        return Ok(0.0);
    }
    let n = samples.len() as f64;
    let excess = |t: f64| -> f64 {
        let inv = 1.0 / (t * t);
        samples.iter().map(|z| (z * z * inv).exp()).sum::<f64>() / n - 2.0
    };
    let mut lo = max_abs / (2.0 * n).ln().sqrt();
    let mut hi = max_abs * 10.0;
    let (f_lo, f_hi) = (excess(lo), excess(hi));
    if !(f_lo >= 0.0 && f_hi <= 0.0) {
        return Err(LabError::BracketFailure);
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn trace(tag: &str) -> SeedTrace {
        SeedTrace::new(11, 0, tag)
    }

    #[test]
    fn flat_top_spectrum() {
        let s = materialize_spectrum(&SpectrumSpec::flat_top(3, 5)).unwrap();
        assert_eq!(s.values(), &[1.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(s.trace() / s.op_norm(), 3.0);
    }

    #[test]
    fn explicit_passes_through() {
        let s = materialize_spectrum(&SpectrumSpec::explicit(vec![2.0, 1.0])).unwrap();
        assert_eq!(s.values(), &[2.0, 1.0]);
    }

    #[test]
    fn poly_decay_values() {
        let s = materialize_spectrum(&SpectrumSpec::new(SpectrumKind::PolyDecay { alpha: 1.0 }, 4)).unwrap();
        let expect = [1.0, 0.5, 1.0 / 3.0, 0.25];
        for (a, b) in s.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn spectrum_errors() {
        assert_eq!(materialize_spectrum(&SpectrumSpec::identity(0)), Err(LabError::ZeroDimension));
        assert!(matches!(
            materialize_spectrum(&SpectrumSpec::flat_top(6, 5)),
            Err(LabError::RankExceedsDimension { .. })
        ));
        assert!(materialize_spectrum(&SpectrumSpec::new(SpectrumKind::ExpDecay { beta: 0.0 }, 3)).is_err());
        assert!(materialize_spectrum(&SpectrumSpec::new(SpectrumKind::PolyDecay { alpha: -1.0 }, 3)).is_err());
        assert_eq!(materialize_spectrum(&SpectrumSpec::explicit(vec![0.0, 0.0])), Err(LabError::ZeroSpectrum));
    }

    #[test]
    fn spectrum_parse_roundtrip_ids() {
        for text in ["identity", "flat_top:2", "poly_decay:1.5", "exp_decay:0.25"] {
            let spec = SpectrumSpec::parse(text, 6).unwrap();
            assert_eq!(spec.id(), text);
        }
        let e = SpectrumSpec::parse("explicit:3,1", 0).unwrap();
        assert_eq!(e.dim, 2);
        assert!(SpectrumSpec::parse("wobbly:3", 4).is_err());
    }

    #[test]
    fn unknown_model_is_rejected() {
        assert_eq!("cauchy".parse::<DistModel>(), Err(LabError::UnknownModel("cauchy".into())));
    }

    #[test]
    fn rademacher_support() {
        let b = sample_isotropic(DistModel::Rademacher, 2, 4, &trace("r")).unwrap();
        assert_eq!((b.n(), b.dim()), (4, 2));
        assert!(b.rows.iter().all(|x| *x == 1.0 || *x == -1.0));
    }

    #[test]
    fn sphere_rows_have_norm_sqrt_d() {
        let b = sample_isotropic(DistModel::UniformSphereScaled, 3, 1, &trace("s")).unwrap();
        assert!((b.rows.row(0).norm() - 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn gaussian_covariance_near_identity() {
        let b = sample_isotropic(DistModel::Gaussian, 10, 100_000, &trace("g")).unwrap();
        let dev = b.second_moment() - DMatrix::identity(10, 10);
        let eig = SymmetricEigen::new(dev).eigenvalues;
        let op = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(op < 0.05, "operator deviation {op}");
    }

    #[test]
    fn anisotropic_scaling() {
        let s = Spectrum::try_from(vec![1.0, 0.0]).unwrap();
        let b = sample_anisotropic(DistModel::Gaussian, &s, 50, &trace("a")).unwrap();
        assert!(b.rows.column(1).iter().all(|x| *x == 0.0));

        let s = Spectrum::try_from(vec![4.0, 1.0]).unwrap();
        let b = sample_anisotropic(DistModel::Rademacher, &s, 1, &trace("b")).unwrap();
        assert_eq!(b.rows[(0, 0)].abs(), 2.0);
        assert_eq!(b.rows[(0, 1)].abs(), 1.0);

        let id = materialize_spectrum(&SpectrumSpec::identity(4)).unwrap();
        let a = sample_anisotropic(DistModel::UniformSphereScaled, &id, 20, &trace("c")).unwrap();
        let z = sample_isotropic(DistModel::UniformSphereScaled, 4, 20, &trace("c")).unwrap();
        assert_eq!(a, z);
    }

    #[test]
    fn rotation_preserves_second_moment_spectrum() {
        let s = Spectrum::try_from(vec![3.0, 1.0]).unwrap();
        let (c, sn) = (0.6f64, 0.8f64);
        let q = DMatrix::from_row_slice(2, 2, &[c, -sn, sn, c]);
        let b = sample_rotated(DistModel::Gaussian, &s, &q, 40_000, &trace("rot")).unwrap();
        let mut eig: Vec<f64> = SymmetricEigen::new(b.second_moment()).eigenvalues.iter().copied().collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        assert!((eig[0] - 3.0).abs() < 0.1 && (eig[1] - 1.0).abs() < 0.05, "{eig:?}");
    }

    #[test]
    fn psi2_of_constant_and_zero() {
        let c = 1.7;
        let v = vec![c; 200];
        let t = estimate_psi2(&v, 1e-10).unwrap();
        assert!((t - c / 2f64.ln().sqrt()).abs() < 1e-8 * t);
        assert_eq!(estimate_psi2(&[0.0; 150], 1e-6).unwrap(), 0.0);
        assert!(matches!(estimate_psi2(&[1.0; 10], 1e-6), Err(LabError::TooFewSamples { .. })));
    }

    #[test]
    fn psi2_of_standard_normal() {
        // exact value sqrt(8/3) ~ 1.633 solves (1 - 2/t^2)^(-1/2) = 2
        let b = sample_isotropic(DistModel::Gaussian, 1, 1_000_000, &trace("psi")).unwrap();
        let z: Vec<f64> = b.rows.iter().copied().collect();
        let t = estimate_psi2(&z, PSI2_DEFAULT_TOL).unwrap();
        let exact = (8.0f64 / 3.0).sqrt();
        assert!((t - exact).abs() < 0.05 * exact, "psi2 estimate {t}");
    }
}
