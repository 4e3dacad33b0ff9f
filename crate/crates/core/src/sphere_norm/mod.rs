//! `sup_{v in T} |F(v)|`, the estimation error of the empirical moment
//! tensor, over the sphere or an ellipsoid `Sigma^{1/2} S^{d-1}`.
//!
//! Three routes: an exact eigen path for `p = 2`, multi-start projected
//! gradient ascent for any `p`, and an exhaustive grid oracle for `d <= 3`.

pub mod ascent;
pub mod grid;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::distributions::Spectrum;
use crate::error::{LabError, Result};
use crate::tensor_moments::{MomentFunctional, PowerMode};

pub use ascent::{AscentSettings, SphereObjective};

/// Index set of the supremum.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSet {
    Sphere { dim: usize },
    /// `diag(sqrt(lambda)) S^{d-1}`.
    Ellipsoid { spectrum: Spectrum },
    /// Finitely many points, evaluated exhaustively.
    Finite { points: Vec<DVector<f64>> },
}

impl TargetSet {
    pub fn dim(&self) -> usize {
        match self {
            TargetSet::Sphere { dim } => *dim,
            TargetSet::Ellipsoid { spectrum } => spectrum.dim(),
            TargetSet::Finite { points } => points.first().map_or(0, |p| p.len()),
        }
    }

    /// `rad(T) = sup_{v in T} |v|_2`.
    pub fn radius(&self) -> f64 {
        match self {
            TargetSet::Sphere { .. } => 1.0,
            TargetSet::Ellipsoid { spectrum } => spectrum.op_norm().sqrt(),
            TargetSet::Finite { points } => points.iter().map(|p| p.norm()).fold(0.0, f64::max),
        }
    }

    /// Elementwise map from the unit sphere onto `T`, if `T` is a sphere or
    /// ellipsoid.
    pub fn scale(&self) -> Option<DVector<f64>> {
        match self {
            TargetSet::Sphere { dim } => Some(DVector::from_element(*dim, 1.0)),
            TargetSet::Ellipsoid { spectrum } => Some(spectrum.sqrt_diag()),
            TargetSet::Finite { .. } => None,
        }
    }

    /// `c T` for `c > 0`.
    pub fn dilate(&self, c: f64) -> TargetSet {
        match self {
            TargetSet::Sphere { dim } => TargetSet::Ellipsoid {
                spectrum: Spectrum::try_from(vec![c * c; *dim]).expect("positive spectrum"),
            },
            TargetSet::Ellipsoid { spectrum } => TargetSet::Ellipsoid {
                spectrum: spectrum.scaled(c * c),
            },
            TargetSet::Finite { points } => TargetSet::Finite {
                points: points.iter().map(|p| p * c).collect(),
            },
        }
    }

    fn check(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(LabError::DimensionMismatch { expected: d, got: self.dim() });
        }
        if let TargetSet::Finite { points } = self {
            if points.is_empty() || points.iter().any(|p| p.len() != d) {
                return Err(LabError::UnsupportedSet("finite set must be nonempty with points of matching dimension".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupMethod {
    ExactEig,
    Ascent,
    Grid,
}

impl SupMethod {
    pub fn name(&self) -> &'static str {
        match self {
            SupMethod::ExactEig => "exact_eig",
            SupMethod::Ascent => "ascent",
            SupMethod::Grid => "grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupResult {
    pub value: f64,
    /// Maximizer in `T`, first nonzero coordinate positive.
    pub argmax: DVector<f64>,
    pub restarts_used: usize,
    /// max - min over per-restart optima (0 for non-ascent methods).
    pub best_restart_spread: f64,
    pub method: SupMethod,
    pub converged_restarts: usize,
    /// Error bound of the grid route; `None` for other methods.
    pub grid_error_bound: Option<f64>,
}

impl SupResult {
    /// Ascent where no start met the tolerance.
    pub fn optimizer_failed(&self) -> bool {
        self.method == SupMethod::Ascent && self.converged_restarts == 0
    }
}

/// `F` as a [`SphereObjective`]. Construction checks dimensions once.
pub struct CenteredObjective<'f, 'a> {
    f: &'f MomentFunctional<'a>,
}

impl<'f, 'a> CenteredObjective<'f, 'a> {
    pub fn new(f: &'f MomentFunctional<'a>) -> Self {
        Self { f }
    }
}

impl SphereObjective for CenteredObjective<'_, '_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn value(&self, v: &DVector<f64>) -> f64 {
        self.f.centered_value(v).expect("dimension checked at construction")
    }

    fn value_and_gradient(&self, v: &DVector<f64>) -> (f64, DVector<f64>) {
        self.f
            .centered_value_and_gradient(v)
            .expect("dimension checked at construction")
    }
}

/// `M = (1/N) sum X_i X_i^T - E X X^T`, conjugated by `diag(scale)`.
fn quadratic_slice(f: &MomentFunctional<'_>, scale: &DVector<f64>) -> DMatrix<f64> {
    let mut m = f.batch().second_moment() - f.population().second_moment_matrix();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= scale[i] * scale[j];
        }
    }
    m
}

/// Eigenvector of the largest-magnitude eigenvalue (ties: smaller index).
fn top_abs_eigen(m: DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut best = 0;
    for k in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[k].abs() > eig.eigenvalues[best].abs() {
            best = k;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

pub fn sup_exact_p2(f: &MomentFunctional<'_>, t: &TargetSet) -> Result<SupResult> {
    let power = f.power();
    if power.integer() != Some(2) || power.mode() != PowerMode::SignedPower {
        return Err(LabError::NotQuadratic(power.p()));
    }
    t.check(f.dim())?;
    let scale = t
        .scale()
        .ok_or_else(|| LabError::UnsupportedSet("exact path needs a sphere or ellipsoid".into()))?;
    let (lambda, u) = top_abs_eigen(quadratic_slice(f, &scale));
    let mut argmax = scale.component_mul(&u);
    ascent::canonicalize(&mut argmax);
    Ok(SupResult {
        value: lambda.abs(),
        argmax,
        restarts_used: 0,
        best_restart_spread: 0.0,
        method: SupMethod::ExactEig,
        converged_restarts: 0,
        grid_error_bound: None,
    })
}

pub fn sup_ascent(f: &MomentFunctional<'_>, t: &TargetSet, settings: &AscentSettings) -> Result<SupResult> {
    if settings.restarts == 0 {
        return Err(LabError::InvalidParameter("at least one restart required".into()));
    }
    t.check(f.dim())?;
    let obj = CenteredObjective::new(f);
    let Some(scale) = t.scale() else {
        return enumerate_finite(&obj, t);
    };
    let warm = top_abs_eigen(quadratic_slice(f, &scale)).1;
    let pullback = ascent::Pullback { inner: &obj, scale: scale.clone() };
    let out = ascent::maximize_abs(&pullback, Some(&warm), settings);
    let mut argmax = scale.component_mul(&out.point);
    ascent::canonicalize(&mut argmax);
    Ok(SupResult {
        value: obj.value(&argmax).abs(),
        argmax,
        restarts_used: out.starts,
        best_restart_spread: out.spread,
        method: SupMethod::Ascent,
        converged_restarts: out.starts.min(out.converged_starts),
        grid_error_bound: None,
    })
}

fn enumerate_finite<O: SphereObjective + ?Sized>(obj: &O, t: &TargetSet) -> Result<SupResult> {
    let TargetSet::Finite { points } = t else {
        unreachable!("only finite sets lack a scale")
    };
    let values: Vec<f64> = points.iter().map(|p| obj.value(p)).collect();
    let (k, value) = grid::argmax_abs(&values).expect("nonempty set");
    Ok(SupResult {
        value,
        argmax: points[k].clone(),
        restarts_used: 0,
        best_restart_spread: 0.0,
        method: SupMethod::Grid,
        converged_restarts: 0,
        grid_error_bound: Some(0.0),
    })
}

/// Exhaustive oracle for `d in {2, 3}`. The reported `grid_error_bound` is
/// `Lip(F on rad(T) ball) * rad(T) * covering radius`.
pub fn sup_grid(f: &MomentFunctional<'_>, t: &TargetSet, resolution: usize) -> Result<SupResult> {
    t.check(f.dim())?;
    let Some(scale) = t.scale() else {
        return enumerate_finite(&CenteredObjective::new(f), t);
    };
    let d = f.dim();
    let dirs = grid::scale_directions(&grid::grid_directions(d, resolution)?, &scale);
    let values = f.centered_values_on(&dirs)?;
    let (k, value) = grid::argmax_abs(&values).expect("nonempty grid");
    let mut argmax = dirs.column(k).into_owned();
    ascent::canonicalize(&mut argmax);
    let rad = t.radius();
    let bound = f.lipschitz_bound() * rad.powf(f.power().p()) * grid::covering_radius(d, resolution);
    Ok(SupResult {
        value,
        argmax,
        restarts_used: 0,
        best_restart_spread: 0.0,
        method: SupMethod::Grid,
        converged_restarts: 0,
        grid_error_bound: Some(bound),
    })
}
