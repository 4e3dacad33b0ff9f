//! Brute-force direction grids for `d in {2, 3}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};

/// Chordal covering-radius constant of the Fibonacci sphere: every unit
/// vector lies within `FIB_COVER / sqrt(n)` of a grid point (measured
/// worst case is about 2.7).
pub const FIB_COVER: f64 = 3.6;

/// Unit directions as columns of a `d x K` matrix.
///
/// `d = 2`: `resolution` angles `k pi / resolution` on the half circle
/// (objectives here are even in `v`). `d = 3`: a Fibonacci sphere with
/// `resolution` points.
pub fn grid_directions(d: usize, resolution: usize) -> Result<DMatrix<f64>> {
    if resolution == 0 {
        return Err(LabError::InvalidParameter("grid resolution must be positive".into()));
    }
    match d {
        2 => Ok(DMatrix::from_fn(2, resolution, |r, k| {
            let theta = std::f64::consts::PI * k as f64 / resolution as f64;
            if r == 0 {
                theta.cos()
            } else {
                theta.sin()
            }
        })),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let n = resolution as f64;
            let mut m = DMatrix::zeros(3, resolution);
            for i in 0..resolution {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                m[(0, i)] = r * phi.cos();
                m[(1, i)] = r * phi.sin();
                m[(2, i)] = z;
            }
            Ok(m)
        }
        other => Err(LabError::GridDimension(other)),
    }
}

/// Upper bound on the chordal distance from any unit vector (up to sign
/// for `d = 2`) to the nearest grid direction.
pub fn covering_radius(d: usize, resolution: usize) -> f64 {
    match d {
        2 => std::f64::consts::PI / (2.0 * resolution as f64),
        _ => FIB_COVER / (resolution as f64).sqrt(),
    }
}

/// Index and value of the largest `|values[k]|`, first index on ties.
pub fn argmax_abs(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.iter().enumerate() {
        let a = v.abs();
        if best.is_none_or(|(_, b)| a > b) {
            best = Some((k, a));
        }
    }
    best
}

/// Scales each column of `dirs` elementwise by `scale` (maps grid
/// directions onto an ellipsoid).
pub fn scale_directions(dirs: &DMatrix<f64>, scale: &DVector<f64>) -> DMatrix<f64> {
    let mut out = dirs.clone();
    for mut c in out.column_iter_mut() {
        c.component_mul_assign(scale);
    }
    out
}
