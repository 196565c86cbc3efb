//! The positive coefficient map: given a symmetric matrix `R` near the
//! identity, find weights `c_i > 0` with `sum_i c_i xi_i xi_i^T = R`.
//!
//! The system is underdetermined (15 unknowns, 6 equations), so the map is
//! pinned down by maximum entropy: `c_i = exp(<theta, A_i>)` for a dual
//! vector `theta` in the 6-dimensional space of symmetric matrices, where
//! `A_i = vec6(xi_i xi_i^T)`.  Solving `sum_i c_i A_i = vec6(R)` for `theta`
//! by a damped Newton iteration gives coefficients that are automatically
//! positive, depend smoothly on `R` (the Newton matrix
//! `G = sum_i c_i A_i A_i^T` is positive definite, so the implicit function
//! theorem applies), and at `R = Id` reproduce the uniform weights `1/5`
//! exactly because the directions satisfy `sum_i xi_i xi_i^T = 5 Id`.

use nalgebra::{Matrix3, SMatrix, SVector};

use super::directions::DirectionSet;
use crate::{JetkitError, Result};

type Vec6 = SVector<f64, 6>;
type Mat6 = SMatrix<f64, 6, 6>;

const SQRT2: f64 = std::f64::consts::SQRT_2;
const NEWTON_TOL: f64 = 1e-13;
const MAX_ITERS: usize = 200;
const EXP_CLIP: f64 = 60.0;

/// Isometric embedding of symmetric 3x3 matrices into R^6, so that the
/// Euclidean inner product of images equals the Frobenius inner product.
fn vec6(m: &Matrix3<f64>) -> Vec6 {
    Vec6::from_column_slice(&[
        m[(0, 0)],
        m[(1, 1)],
        m[(2, 2)],
        SQRT2 * m[(0, 1)],
        SQRT2 * m[(0, 2)],
        SQRT2 * m[(1, 2)],
    ])
}

/// Value and directional derivatives of the coefficient map along a given
/// symmetric perturbation, produced by implicit differentiation.
#[derive(Debug, Clone)]
pub struct GammaJet {
    /// Squared coefficients `c_i = gamma_i^2`.
    pub c: Vec<f64>,
    /// `gamma_i = sqrt(c_i)`.
    pub gamma: Vec<f64>,
    /// First directional derivatives of `c` along the perturbation.
    pub dc: Vec<f64>,
    /// First directional derivatives of `gamma`.
    pub dgamma: Vec<f64>,
    /// Second directional derivatives of `c` (straight-line curve).
    pub d2c: Vec<f64>,
    /// Second directional derivatives of `gamma`.
    pub d2gamma: Vec<f64>,
}

/// Newton solver for the coefficient map over a fixed direction set.
pub struct GammaSolver {
    cols: Vec<Vec6>,
    /// Admissible operator-norm distance from the identity.
    pub radius: f64,
}

impl GammaSolver {
    pub fn new(set: &DirectionSet) -> Self {
        let cols = set
            .frames
            .iter()
            .map(|f| {
                let xi = f.xi();
                let m = Matrix3::from_fn(|r, c| xi[r] * xi[c]);
                vec6(&m)
            })
            .collect();
        GammaSolver { cols, radius: 0.5 }
    }

    pub fn n_directions(&self) -> usize {
        self.cols.len()
    }

    /// Validate that `r` is symmetric and within the admissible ball.
    fn admit(&self, r: &Matrix3<f64>) -> Result<()> {
        let asym = (r - r.transpose()).norm();
        if asym > 1e-12 {
            return Err(JetkitError::Shape(format!(
                "coefficient map needs a symmetric matrix; antisymmetric part {asym:.3e}"
            )));
        }
        let dev = r - Matrix3::identity();
        let op_norm = dev
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |m, &e| m.max(e.abs()));
        if op_norm > self.radius {
            return Err(JetkitError::OutOfBall {
                op_norm,
                radius: self.radius,
            });
        }
        Ok(())
    }

    /// Dual residual `sum_i c_i A_i - vec6(R)` and the coefficients at a
    /// given dual point.
    fn residual(&self, theta: &Vec6, target: &Vec6) -> (Vec<f64>, Vec6) {
        let c: Vec<f64> = self
            .cols
            .iter()
            .map(|a| theta.dot(a).clamp(-EXP_CLIP, EXP_CLIP).exp())
            .collect();
        let mut f = -target;
        for (ci, a) in c.iter().zip(&self.cols) {
            f += a * *ci;
        }
        (c, f)
    }

    /// Solve for the squared coefficients `c_i` with `sum c_i xi_i xi_i^T = R`.
    pub fn coefficients(&self, r: &Matrix3<f64>) -> Result<Vec<f64>> {
        Ok(self.solve_dual(r)?.1)
    }

    /// Solve and return `(theta, c)`.
    fn solve_dual(&self, r: &Matrix3<f64>) -> Result<(Vec6, Vec<f64>)> {
        self.admit(r)?;
        let target = vec6(r);
        // Start at the exact dual point for R = Id: <theta0, A_i> = ln(1/5)
        // for every i because tr(xi xi^T) = 1.
        let w = (1.0f64 / 5.0).ln();
        let mut theta = Vec6::from_column_slice(&[w, w, w, 0.0, 0.0, 0.0]);
        let (mut c, mut f) = self.residual(&theta, &target);
        for iter in 0..MAX_ITERS {
            let res = f.norm();
            if res <= NEWTON_TOL {
                return Ok((theta, c));
            }
            let mut g = Mat6::zeros();
            for (ci, a) in c.iter().zip(&self.cols) {
                g += a * a.transpose() * *ci;
            }
            let chol = g.cholesky().ok_or(JetkitError::GammaNoConvergence {
                residual: res,
                iters: iter,
            })?;
            let step = chol.solve(&f);
            // Damped update: backtrack until the residual actually drops.
            let mut t = 1.0;
            loop {
                let trial = theta - step * t;
                let (c_trial, f_trial) = self.residual(&trial, &target);
                if f_trial.norm() < res || t < 1e-4 {
                    theta = trial;
                    c = c_trial;
                    f = f_trial;
                    break;
                }
                t *= 0.5;
            }
        }
        Err(JetkitError::GammaNoConvergence {
            residual: f.norm(),
            iters: MAX_ITERS,
        })
    }

    /// `gamma_i = sqrt(c_i)`.
    pub fn gamma(&self, r: &Matrix3<f64>) -> Result<Vec<f64>> {
        Ok(self.coefficients(r)?.iter().map(|c| c.sqrt()).collect())
    }

    /// Reconstruct `sum_i c_i xi_i xi_i^T` from coefficients (for residual
    /// checks against the input matrix).
    pub fn reconstruct(&self, c: &[f64]) -> Matrix3<f64> {
        let mut v = Vec6::zeros();
        for (ci, a) in c.iter().zip(&self.cols) {
            v += a * *ci;
        }
        let mut m = Matrix3::zeros();
        m[(0, 0)] = v[0];
        m[(1, 1)] = v[1];
        m[(2, 2)] = v[2];
        m[(0, 1)] = v[3] / SQRT2;
        m[(1, 0)] = v[3] / SQRT2;
        m[(0, 2)] = v[4] / SQRT2;
        m[(2, 0)] = v[4] / SQRT2;
        m[(1, 2)] = v[5] / SQRT2;
        m[(2, 1)] = v[5] / SQRT2;
        m
    }

    /// Frobenius norm of `reconstruct(solve(R)) - R`.
    pub fn reconstruction_residual(&self, r: &Matrix3<f64>) -> Result<f64> {
        let c = self.coefficients(r)?;
        Ok((self.reconstruct(&c) - r).norm())
    }

    /// Coefficients plus first and second directional derivatives along the
    /// straight line `R + s * dR`, by implicit differentiation of the dual
    /// system (no finite differences).
    pub fn jet(&self, r: &Matrix3<f64>, dr: &Matrix3<f64>) -> Result<GammaJet> {
        let (theta, c) = self.solve_dual(r)?;
        let _ = theta;
        let n = self.cols.len();
        let mut g = Mat6::zeros();
        for (ci, a) in c.iter().zip(&self.cols) {
            g += a * a.transpose() * *ci;
        }
        let chol = g.cholesky().ok_or(JetkitError::GammaNoConvergence {
            residual: f64::NAN,
            iters: 0,
        })?;
        let dtarget = vec6(&dr.clone_owned());
        let dtheta = chol.solve(&dtarget);
        let dc: Vec<f64> = (0..n).map(|i| c[i] * self.cols[i].dot(&dtheta)).collect();
        // Second derivative: G d2theta = -dG dtheta (the target is linear
        // in s, so its second derivative vanishes).
        let mut dg_dtheta = Vec6::zeros();
        for (dci, a) in dc.iter().zip(&self.cols) {
            dg_dtheta += a * (*dci * a.dot(&dtheta));
        }
        let d2theta = chol.solve(&(-dg_dtheta));
        let d2c: Vec<f64> = (0..n)
            .map(|i| {
                let adth = self.cols[i].dot(&dtheta);
                dc[i] * adth + c[i] * self.cols[i].dot(&d2theta)
            })
            .collect();
        let gamma: Vec<f64> = c.iter().map(|v| v.sqrt()).collect();
        let dgamma: Vec<f64> = (0..n).map(|i| dc[i] / (2.0 * gamma[i])).collect();
        let d2gamma: Vec<f64> = (0..n)
            .map(|i| d2c[i] / (2.0 * gamma[i]) - dc[i] * dc[i] / (4.0 * c[i] * gamma[i]))
            .collect();
        Ok(GammaJet {
            c,
            gamma,
            dc,
            dgamma,
            d2c,
            d2gamma,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::directions::DirectionSet;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn solver() -> GammaSolver {
        GammaSolver::new(&DirectionSet::canonical())
    }

    fn mat(rows: [[f64; 3]; 3]) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| rows[r][c])
    }

    /// Deviation used by the frozen-value tests below.
    fn r_test() -> Matrix3<f64> {
        Matrix3::identity()
            - mat([
                [0.10, 0.03, -0.02],
                [0.03, -0.05, 0.04],
                [-0.02, 0.04, -0.05],
            ])
    }

    #[test]
    fn identity_gives_uniform_fifth() {
        let s = solver();
        let c = s.coefficients(&Matrix3::identity()).unwrap();
        for ci in c {
            assert_abs_diff_eq!(ci, 0.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn frozen_coefficients_off_identity() {
        // Independently computed dual solve for Id - Rt with
        // Rt = [[0.10,0.03,-0.02],[0.03,-0.05,0.04],[-0.02,0.04,-0.05]].
        let expected = [
            0.20613082079019379,
            0.22853433406344684,
            0.25104454657650810,
            0.21033831300945727,
            0.18122387595992526,
            0.18055177610047704,
            0.20578468086980300,
            0.17822922867041133,
            0.17287643594501712,
            0.17870392514048020,
            0.20783602238170737,
            0.18676635759772159,
            0.13734030832202487,
            0.23725415737569500,
            0.23738521719713157,
        ];
        let s = solver();
        let c = s.coefficients(&r_test()).unwrap();
        for (got, want) in c.iter().zip(expected.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-9);
        }
        assert!(s.reconstruction_residual(&r_test()).unwrap() < 1e-12);
    }

    #[test]
    fn jet_matches_frozen_finite_differences() {
        // Central differences of the dual solve at Id - Rt along dR, with
        // h = 1e-6, computed by an independent implementation.
        let dr = mat([
            [0.01, -0.004, 0.002],
            [-0.004, 0.006, 0.001],
            [0.002, 0.001, -0.016],
        ]);
        let expected_dc_head = [-0.00228139, -0.0041261, -0.00181436, -0.00161457];
        let s = solver();
        let jet = s.jet(&r_test(), &dr).unwrap();
        for (got, want) in jet.dc.iter().zip(expected_dc_head.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-7);
        }
    }

    #[test]
    fn jet_derivatives_match_in_situ_finite_differences() {
        let s = solver();
        let dr = mat([
            [0.013, 0.007, -0.003],
            [0.007, -0.011, 0.002],
            [-0.003, 0.002, 0.005],
        ]);
        let r = r_test();
        let jet = s.jet(&r, &dr).unwrap();
        let h = 1e-5;
        let cp = s.coefficients(&(r + dr * h)).unwrap();
        let cm = s.coefficients(&(r - dr * h)).unwrap();
        for i in 0..15 {
            let fd1 = (cp[i] - cm[i]) / (2.0 * h);
            let fd2 = (cp[i] - 2.0 * jet.c[i] + cm[i]) / (h * h);
            assert_abs_diff_eq!(jet.dc[i], fd1, epsilon = 1e-6 * jet.dc[i].abs().max(1e-3));
            assert_abs_diff_eq!(jet.d2c[i], fd2, epsilon = 1e-3 * jet.d2c[i].abs().max(1.0));
            let gp = cp[i].sqrt();
            let gm = cm[i].sqrt();
            let fd_gamma = (gp - gm) / (2.0 * h);
            assert_abs_diff_eq!(jet.dgamma[i], fd_gamma, epsilon = 1e-6);
        }
    }

    #[test]
    fn out_of_ball_is_rejected() {
        let s = solver();
        let r = Matrix3::identity() * 1.6;
        match s.coefficients(&r) {
            Err(JetkitError::OutOfBall { op_norm, radius }) => {
                assert!(op_norm > radius);
            }
            other => panic!("expected OutOfBall, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let s = solver();
        let mut r = Matrix3::identity();
        r[(0, 1)] = 0.01;
        assert!(matches!(s.coefficients(&r), Err(JetkitError::Shape(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        /// Invariant: everywhere on the admissible ball the solve succeeds,
        /// all coefficients are strictly positive, and the reconstruction
        /// reproduces the input to near machine precision.
        #[test]
        fn coefficients_positive_and_exact_on_ball(
            e in proptest::array::uniform6(-1.0f64..1.0),
            scale in 0.0f64..0.49,
        ) {
            let dev = mat([
                [e[0], e[3], e[4]],
                [e[3], e[1], e[5]],
                [e[4], e[5], e[2]],
            ]);
            let op = dev
                .symmetric_eigenvalues()
                .iter()
                .fold(0.0f64, |m, &x| m.max(x.abs()));
            let r = if op > 0.0 {
                Matrix3::identity() + dev * (scale / op)
            } else {
                Matrix3::identity()
            };
            let s = solver();
            let c = s.coefficients(&r).unwrap();
            prop_assert!(c.iter().all(|&ci| ci > 0.0));
            let res = (s.reconstruct(&c) - r).norm();
            prop_assert!(res < 1e-11, "residual {res}");
        }
    }
}
