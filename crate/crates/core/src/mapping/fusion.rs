//! Gaussian position fusion for map objects from range-bearing measurements
//! taken at an uncertain robot pose.
//!
//! The measurement model is `h(m, x) = (|m - x|, atan2(m_y - x_y, m_x - x_x))`.
//! It is linearized at the prior object mean and the pose mean. The pose is
//! not estimated here, so its uncertainty is marginalized out: it enters as
//! extra measurement noise `J_x Σ_p J_x^T`. What remains is a standard
//! extended Kalman update of the object position alone.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::gauss::{self, Cov2};
use crate::grid::Point;
use crate::world::{RangeBearing, RobotPoseBelief};

const SINGULAR_JITTER: f64 = 1e-12;

/// Expected measurement and its Jacobian with respect to the object
/// position. The Jacobian with respect to the pose is the negation.
pub fn measurement_model(object: &Point, pose: &Point) -> Result<(RangeBearing, Matrix2<f64>)> {
    let d = object - pose;
    let q = d.norm_squared();
    let r = q.sqrt();
    if !(r > 1e-9) {
        return Err(Error::DegenerateGeometry);
    }
    let h = RangeBearing {
        range: r,
        bearing: d.y.atan2(d.x),
    };
    let jac = Matrix2::new(d.x / r, d.y / r, -d.y / q, d.x / q);
    Ok((h, jac))
}

fn invert(m: &Matrix2<f64>) -> Matrix2<f64> {
    m.try_inverse()
        .or_else(|| (m + Matrix2::identity() * SINGULAR_JITTER).try_inverse())
        .unwrap_or_else(Matrix2::zeros)
}

/// Posterior `(mean, covariance)` of an object position after one
/// measurement `z` (bearing in the world frame).
pub fn fuse_position(
    prior_mu: &Point,
    prior_sigma: &Cov2,
    pose: &RobotPoseBelief,
    z: &RangeBearing,
    meas_cov: &Cov2,
) -> Result<(Point, Cov2)> {
    let (expected, h_m) = measurement_model(prior_mu, &pose.mean)?;
    let h_x = -h_m;
    let noise = h_x * pose.covariance * h_x.transpose() + meas_cov;
    let innovation_cov = h_m * prior_sigma * h_m.transpose() + noise;
    let gain = prior_sigma * h_m.transpose() * invert(&innovation_cov);
    let innovation = Point::new(
        z.range - expected.range,
        gauss::wrap_angle(z.bearing - expected.bearing),
    );
    let mu = prior_mu + gain * innovation;
    let a = Matrix2::identity() - gain * h_m;
    // Joseph form keeps the result symmetric PSD
    let sigma = a * prior_sigma * a.transpose() + gain * noise * gain.transpose();
    Ok((mu, gauss::symmetrize(&sigma)))
}

/// Position implied by a single measurement, and its covariance, used to
/// initialize new objects and to gate associations.
pub fn implied_position(pose: &RobotPoseBelief, z: &RangeBearing, meas_cov: &Cov2) -> (Point, Cov2) {
    let (s, c) = z.bearing.sin_cos();
    let p = pose.mean + Point::new(c, s) * z.range;
    let g = Matrix2::new(c, -z.range * s, s, z.range * c);
    let cov = g * meas_cov * g.transpose() + pose.covariance;
    (p, gauss::symmetrize(&cov))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_measurement_collapses_covariance() {
        let mu = Point::new(3.0, 1.0);
        let sigma = Cov2::identity() * 0.5;
        let pose = RobotPoseBelief::exact(Point::new(0.0, 0.0));
        let (z, _) = measurement_model(&mu, &pose.mean).unwrap();
        let (m2, s2) = fuse_position(&mu, &sigma, &pose, &z, &(Cov2::identity() * 1e-14)).unwrap();
        assert!((m2 - mu).norm() < 1e-12);
        assert!(s2.norm() < 1e-10, "{s2}");
    }

    #[test]
    fn one_dimensional_product_of_gaussians() {
        // robot on the x axis, object prior N(0, 1) along x, range implies x = 2 with variance 1
        let pose = RobotPoseBelief::exact(Point::new(-10.0, 0.0));
        let z = RangeBearing {
            range: 12.0,
            bearing: 0.0,
        };
        let meas = Cov2::new(1.0, 0.0, 0.0, 1e-4);
        let (mu, sigma) = fuse_position(&Point::zeros(), &Cov2::identity(), &pose, &z, &meas).unwrap();
        assert!((mu.x - 1.0).abs() < 1e-12);
        assert!((sigma[(0, 0)] - 0.5).abs() < 1e-12);
        assert!(sigma[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn coincident_positions_error() {
        let pose = RobotPoseBelief::exact(Point::new(1.0, 1.0));
        let z = RangeBearing {
            range: 1.0,
            bearing: 0.0,
        };
        let r = fuse_position(&Point::new(1.0, 1.0), &Cov2::identity(), &pose, &z, &Cov2::identity());
        assert!(matches!(r, Err(Error::DegenerateGeometry)));
    }

    #[test]
    fn implied_position_geometry() {
        let pose = RobotPoseBelief::exact(Point::new(1.0, 2.0));
        let z = RangeBearing {
            range: 2.0,
            bearing: std::f64::consts::FRAC_PI_2,
        };
        let (p, cov) = implied_position(&pose, &z, &Cov2::new(0.01, 0.0, 0.0, 0.0001));
        assert!((p - Point::new(1.0, 4.0)).norm() < 1e-12);
        // range noise along y, bearing noise along x scaled by r^2
        assert!((cov[(1, 1)] - 0.01).abs() < 1e-12);
        assert!((cov[(0, 0)] - 0.0004).abs() < 1e-12);
    }
}
