//! Small 2D Gaussian helpers shared by sensing, mapping and planning.

use nalgebra::{Matrix2, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::grid::Point;

pub type Cov2 = Matrix2<f64>;

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym_eigenvalues(m: &Cov2) -> [f64; 2] {
    let a = m[(0, 0)];
    let d = m[(1, 1)];
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mean - r, mean + r]
}

pub fn is_symmetric(m: &Cov2, tol: f64) -> bool {
    (m[(0, 1)] - m[(1, 0)]).abs() <= tol
}

/// Symmetric with non-negative eigenvalues, up to `tol`.
pub fn is_psd(m: &Cov2, tol: f64) -> bool {
    m.iter().all(|v| v.is_finite()) && is_symmetric(m, tol) && sym_eigenvalues(m)[0] >= -tol
}

pub fn symmetrize(m: &Cov2) -> Cov2 {
    0.5 * (m + m.transpose())
}

/// A matrix `S` with `S S^T = cov`, valid for singular PSD input.
pub fn sqrt_psd(cov: &Cov2) -> Cov2 {
    let eig = SymmetricEigen::new(symmetrize(cov));
    let mut s = eig.eigenvectors;
    for k in 0..2 {
        let l = eig.eigenvalues[k].max(0.0).sqrt();
        s[(0, k)] *= l;
        s[(1, k)] *= l;
    }
    s
}

/// One draw from N(0, cov).
pub fn sample_zero_mean<R: Rng + ?Sized>(cov: &Cov2, rng: &mut R) -> Point {
    let z = Point::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    sqrt_psd(cov) * z
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}
