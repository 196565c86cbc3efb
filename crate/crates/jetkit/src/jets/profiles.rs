//! Compactly supported jet profiles with exact derivative calculus.
//!
//! The longitudinal profile is `psi(u) = c_psi * exp(-1/(1-u^2))` on
//! `(-1, 1)`; the transverse potential is `Theta(z) = c_theta * h(|z|^2)`
//! with `h(s) = exp(-1/(1-s))` on the unit disc, and the transverse profile
//! is `theta = -Lap(Theta)`.  The constants are fixed once by quadrature so
//! that `||psi||_{L2(R)} = sqrt(2*pi)` and `||theta||_{L2(R2)} = 2*pi`;
//! `theta` integrates to zero identically because it is a Laplacian of a
//! compactly supported function.
//!
//! No finite differences appear anywhere: derivatives of the exponentials
//! come from closed-form derivatives of the inner rational functions fed
//! through a Leibniz recurrence, and mixed partials of the radial factors
//! are represented as exact term lists `sum c * z1^p * z2^q * h^(j)(s)`
//! that differentiate symbolically.

use std::collections::BTreeMap;

use crate::quadrature::{integrate, integrate_panels};
use crate::{JetkitError, Result};

/// `binom(n, k)` as f64 for the small orders used by the recurrences.
fn binom(n: usize, k: usize) -> f64 {
    let mut out = 1.0f64;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Derivatives `f^(0..=kmax)(u)` of the 1D bump `f(u) = exp(-1/(1-u^2))`
/// (zero outside the open support).
///
/// With `g(u) = -1/(1-u^2) = -(1/2)[1/(1-u) + 1/(1+u)]` the inner function
/// has the closed-form derivatives
/// `g^(m) = -(m!/2) [ (1-u)^-(m+1) + (-1)^m (1+u)^-(m+1) ]`,
/// and `f^(k+1) = sum_j binom(k, j) g^(j+1) f^(k-j)`.
pub fn bump1_derivs(u: f64, kmax: usize) -> Vec<f64> {
    if !(u.abs() < 1.0) {
        return vec![0.0; kmax + 1];
    }
    let om = 1.0 - u;
    let op = 1.0 + u;
    // g[m] = g^(m)(u) for m = 1..=kmax (index 0 unused).
    let mut g = vec![0.0f64; kmax + 1];
    let mut fact = 1.0f64;
    let mut om_pow = 1.0 / (om * om);
    let mut op_pow = 1.0 / (op * op);
    for m in 1..=kmax {
        fact *= m as f64;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        g[m] = -(fact / 2.0) * (om_pow + sign * op_pow);
        om_pow /= om;
        op_pow /= op;
    }
    let mut f = vec![0.0; kmax + 1];
    f[0] = (-1.0 / (om * op)).exp();
    for k in 0..kmax {
        let mut acc = 0.0;
        for j in 0..=k {
            acc += binom(k, j) * g[j + 1] * f[k - j];
        }
        f[k + 1] = acc;
    }
    f
}

/// Derivatives `h^(0..=jmax)(s)` of `h(s) = exp(-1/(1-s))` (zero for
/// `s >= 1`).  Uses `sigma(s) = -1/(1-s)`, `sigma^(m) = -m! (1-s)^-(m+1)`.
pub fn radial_h_derivs(s: f64, jmax: usize) -> Vec<f64> {
    if !(s < 1.0) {
        return vec![0.0; jmax + 1];
    }
    let om = 1.0 - s;
    let mut sig = vec![0.0; jmax + 1];
    let mut fact = 1.0f64;
    let mut pow = 1.0 / (om * om);
    for m in 1..=jmax {
        fact *= m as f64;
        sig[m] = -fact * pow;
        pow /= om;
    }
    let mut h = vec![0.0; jmax + 1];
    h[0] = (-1.0 / om).exp();
    for k in 0..jmax {
        let mut acc = 0.0;
        for j in 0..=k {
            acc += binom(k, j) * sig[j + 1] * h[k - j];
        }
        h[k + 1] = acc;
    }
    h
}

/// One term `coeff * z1^p1 * z2^p2 * h^(j)(z1^2 + z2^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radial2Term {
    pub coeff: f64,
    pub p1: u32,
    pub p2: u32,
    pub j: u32,
}

/// Exact symbolic representation of iterated partial derivatives of radial
/// bump expressions on the plane.
#[derive(Debug, Clone)]
pub struct Radial2Table {
    pub terms: Vec<Radial2Term>,
    pub jmax: u32,
}

impl Radial2Table {
    fn from_map(map: BTreeMap<(u32, u32, u32), f64>) -> Self {
        let terms: Vec<Radial2Term> = map
            .into_iter()
            .filter(|&(_, c)| c != 0.0)
            .map(|((p1, p2, j), coeff)| Radial2Term { coeff, p1, p2, j })
            .collect();
        let jmax = terms.iter().map(|t| t.j).max().unwrap_or(0);
        Radial2Table { terms, jmax }
    }

    /// The bare potential `h(s)`.
    pub fn potential_base() -> Self {
        Radial2Table {
            terms: vec![Radial2Term {
                coeff: 1.0,
                p1: 0,
                p2: 0,
                j: 0,
            }],
            jmax: 0,
        }
    }

    /// `-Lap h(|z|^2) = -(4 s h'' + 4 h')`, the unnormalized transverse
    /// profile.
    pub fn profile_base() -> Self {
        Radial2Table {
            terms: vec![
                Radial2Term {
                    coeff: -4.0,
                    p1: 2,
                    p2: 0,
                    j: 2,
                },
                Radial2Term {
                    coeff: -4.0,
                    p1: 0,
                    p2: 2,
                    j: 2,
                },
                Radial2Term {
                    coeff: -4.0,
                    p1: 0,
                    p2: 0,
                    j: 1,
                },
            ],
            jmax: 2,
        }
    }

    /// Exact partial derivative along `z1` (axis 0) or `z2` (axis 1).
    pub fn diff(&self, axis: usize) -> Self {
        let mut map: BTreeMap<(u32, u32, u32), f64> = BTreeMap::new();
        for t in &self.terms {
            let (p, q) = (t.p1, t.p2);
            // Product-rule part on the monomial.
            let (dp, dq, fall) = if axis == 0 {
                (p.wrapping_sub(1), q, p)
            } else {
                (p, q.wrapping_sub(1), q)
            };
            if fall > 0 {
                *map.entry((dp, dq, t.j)).or_insert(0.0) += t.coeff * fall as f64;
            }
            // Chain-rule part: d/dz s = 2 z_axis raises the monomial and j.
            let (cp, cq) = if axis == 0 { (p + 1, q) } else { (p, q + 1) };
            *map.entry((cp, cq, t.j + 1)).or_insert(0.0) += 2.0 * t.coeff;
        }
        Radial2Table::from_map(map)
    }

    /// Evaluate with precomputed `h` derivatives (`h[j] = h^(j)(s)`).
    pub fn eval_with(&self, z1: f64, z2: f64, h: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += t.coeff * z1.powi(t.p1 as i32) * z2.powi(t.p2 as i32) * h[t.j as usize];
        }
        acc
    }

    pub fn eval(&self, z1: f64, z2: f64) -> f64 {
        let s = z1 * z1 + z2 * z2;
        if s >= 1.0 {
            return 0.0;
        }
        let h = radial_h_derivs(s, self.jmax as usize);
        self.eval_with(z1, z2, &h)
    }
}

/// Largest mixed-derivative order the eager table cache covers (the scaling
/// surveys go to order 10 and need one extra order on the potential).
pub const MAX_TABLE_ORDER: u32 = 12;

/// Normalized profile family with cached derivative tables.
pub struct JetProfiles {
    /// `psi = c_psi * exp(-1/(1-u^2))`.
    pub c_psi: f64,
    /// `Theta = c_theta * h(|z|^2)`, `theta = -c_theta * Lap h`.
    pub c_theta: f64,
    profile_tabs: BTreeMap<(u32, u32), Radial2Table>,
    potential_tabs: BTreeMap<(u32, u32), Radial2Table>,
}

fn build_tables(base: Radial2Table) -> BTreeMap<(u32, u32), Radial2Table> {
    let mut tabs = BTreeMap::new();
    tabs.insert((0, 0), base);
    // Fill by increasing total order; each entry differentiates a
    // previously computed parent.
    for total in 1..=MAX_TABLE_ORDER {
        for a in 0..=total {
            let b = total - a;
            let (parent, axis) = if a > 0 { ((a - 1, b), 0) } else { ((a, b - 1), 1) };
            let t = tabs[&parent].diff(axis);
            tabs.insert((a, b), t);
        }
    }
    tabs
}

impl JetProfiles {
    pub fn new() -> Self {
        // ||psi||_L2(R)^2 = c_psi^2 * int f^2 = 2*pi.
        let i_psi = integrate(-1.0, 1.0, 80, |u| {
            let f = bump1_derivs(u, 0)[0];
            f * f
        });
        let c_psi = (crate::TAU / i_psi).sqrt();
        // ||theta||_L2(R2) = c_theta * ||Lap h||_L2(R2) = 2*pi.
        let lap_sq = integrate(0.0, 1.0, 120, |rho| {
            let s = rho * rho;
            let h = radial_h_derivs(s, 2);
            let lap = 4.0 * s * h[2] + 4.0 * h[1];
            lap * lap * rho
        }) * crate::TAU;
        let c_theta = crate::TAU / lap_sq.sqrt();
        JetProfiles {
            c_psi,
            c_theta,
            profile_tabs: build_tables(Radial2Table::profile_base()),
            potential_tabs: build_tables(Radial2Table::potential_base()),
        }
    }

    /// `d^k psi / du^k` at `u` (profile coordinates).
    pub fn psi_deriv(&self, k: usize, u: f64) -> f64 {
        self.c_psi * bump1_derivs(u, k)[k]
    }

    /// All of `psi^(0..=kmax)` at once.
    pub fn psi_derivs_upto(&self, kmax: usize, u: f64) -> Vec<f64> {
        let mut d = bump1_derivs(u, kmax);
        for v in &mut d {
            *v *= self.c_psi;
        }
        d
    }

    fn table(&self, potential: bool, order: (u32, u32)) -> Result<&Radial2Table> {
        let tabs = if potential {
            &self.potential_tabs
        } else {
            &self.profile_tabs
        };
        tabs.get(&order).ok_or_else(|| {
            JetkitError::Params(format!(
                "profile derivative order {order:?} exceeds table cache ({MAX_TABLE_ORDER})"
            ))
        })
    }

    /// `∂^order theta` at `z` (profile coordinates).
    pub fn theta_deriv(&self, order: (u32, u32), z1: f64, z2: f64) -> f64 {
        self.c_theta
            * self
                .table(false, order)
                .expect("order within table cache")
                .eval(z1, z2)
    }

    /// `∂^order Theta` at `z` (profile coordinates).
    pub fn potential_deriv(&self, order: (u32, u32), z1: f64, z2: f64) -> f64 {
        self.c_theta
            * self
                .table(true, order)
                .expect("order within table cache")
                .eval(z1, z2)
    }

    /// `(int_R |psi^(k)|^p du)^(1/p)` in profile coordinates, by composite
    /// quadrature (panels confine the kinks of `|.|^p`).
    pub fn psi_lp(&self, k: usize, p: f64) -> f64 {
        let v = integrate_panels(-1.0, 1.0, 24, 20, |u| {
            self.psi_deriv(k, u).abs().powf(p)
        });
        v.powf(1.0 / p)
    }

    /// Same for `int_R psi^(k) du` (signed, for mean checks).
    pub fn psi_integral(&self, k: usize) -> f64 {
        integrate(-1.0, 1.0, 80, |u| self.psi_deriv(k, u))
    }

    /// `(int_{R^2} |T|^p dz)^(1/p)` for the magnitude of a list of derivative
    /// components of `theta` (`potential = false`) or `Theta` (`true`):
    /// `T(z) = sqrt(sum_i (∂^{orders[i]} prof)^2)`.  Polar composite
    /// quadrature; the angular direction is smooth and periodic, so the
    /// trapezoid rule there is spectrally accurate.
    pub fn radial2_mag_lp(&self, potential: bool, orders: &[(u32, u32)], p: f64) -> Result<f64> {
        let tabs: Vec<&Radial2Table> = orders
            .iter()
            .map(|&o| self.table(potential, o))
            .collect::<Result<_>>()?;
        let jmax = tabs.iter().map(|t| t.jmax).max().unwrap_or(0) as usize;
        let n_ang = 128usize;
        let val = integrate_panels(0.0, 1.0, 12, 16, |rho| {
            let s = rho * rho;
            let h = radial_h_derivs(s, jmax);
            let mut ang = 0.0;
            for ia in 0..n_ang {
                let phi = crate::TAU * ia as f64 / n_ang as f64;
                let (z1, z2) = (rho * phi.cos(), rho * phi.sin());
                let mag2: f64 = tabs
                    .iter()
                    .map(|t| {
                        let v = t.eval_with(z1, z2, &h);
                        v * v
                    })
                    .sum();
                ang += mag2.sqrt().powf(p);
            }
            ang * (crate::TAU / n_ang as f64) * rho
        });
        Ok((val * self.c_theta.powf(p)).powf(1.0 / p))
    }

    /// Signed integral `int_{R^2} ∂^order prof dz` (for mean checks).
    /// Structural zeros (divergence-form integrands) must come out below
    /// 1e-12, so this uses a denser radial rule than the norm quadratures.
    pub fn radial2_integral(&self, potential: bool, order: (u32, u32)) -> Result<f64> {
        let tab = self.table(potential, order)?;
        let jmax = tab.jmax as usize;
        let n_ang = 128usize;
        let val = integrate_panels(0.0, 1.0, 24, 20, |rho| {
            let s = rho * rho;
            let h = radial_h_derivs(s, jmax);
            let mut ang = 0.0;
            for ia in 0..n_ang {
                let phi = crate::TAU * ia as f64 / n_ang as f64;
                ang += tab.eval_with(rho * phi.cos(), rho * phi.sin(), &h);
            }
            ang * (crate::TAU / n_ang as f64) * rho
        });
        Ok(val * self.c_theta)
    }

    /// Fourier coefficient of the rescaled periodized longitudinal profile
    /// `psi_r(u) = r^(-1/2) psi(u/r)` on the circle:
    /// `(2*pi)^(-1) int_T psi_r(u) e^(-i m u) du` (real by evenness).
    /// `power = 1` gives the profile itself, `power = 2` its square.
    pub fn psi_fourier(&self, r: f64, m: i64, power: u32) -> f64 {
        let scale = match power {
            1 => r.sqrt() / crate::TAU,
            2 => 1.0 / crate::TAU,
            _ => panic!("psi_fourier supports power 1 or 2"),
        };
        // substitute w = u/r: int = r^(1-power/2) int psi(w)^power cos(m r w) dw
        integrate(-1.0, 1.0, 160, |w| {
            let f = self.c_psi * bump1_derivs(w, 0)[0];
            f.powi(power as i32) * (m as f64 * r * w).cos()
        }) * scale
    }

    /// Fourier coefficient of the rescaled periodized transverse profile
    /// `theta_r(z) = r^(-1) theta(z/r)` on the 2-torus at integer mode
    /// `m = (m1, m2)`: depends only on `|m|` by radial symmetry.
    /// `power = 1` or `2`.
    pub fn theta_fourier(&self, r: f64, m_norm: f64, power: u32) -> f64 {
        let scale = match power {
            1 => r / (crate::TAU * crate::TAU),
            2 => 1.0 / (crate::TAU * crate::TAU),
            _ => panic!("theta_fourier supports power 1 or 2"),
        };
        let tab = self.table(false, (0, 0)).expect("base table");
        let n_ang = 256usize;
        integrate_panels(0.0, 1.0, 24, 20, |rho| {
            let s = rho * rho;
            let h = radial_h_derivs(s, tab.jmax as usize);
            // The profile is radial, so only the plane wave needs the
            // angular sweep; its average over the circle is real.
            let v = self.c_theta * tab.eval_with(rho, 0.0, &h);
            let mut ang = 0.0;
            for ia in 0..n_ang {
                let phi = crate::TAU * ia as f64 / n_ang as f64;
                ang += (m_norm * r * rho * phi.cos()).cos();
            }
            v.powi(power as i32) * ang * rho / n_ang as f64
        }) * crate::TAU
            * scale
    }
}

impl Default for JetProfiles {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bump_derivatives_match_frozen_values() {
        // Independently computed (30-digit arithmetic) derivatives of
        // f(u) = exp(-1/(1-u^2)) at u = 0.3.
        let d = bump1_derivs(0.3, 5);
        assert_abs_diff_eq!(d[1], -0.24144698260322942, epsilon = 1e-15);
        assert_abs_diff_eq!(d[2], -0.9482744472325039, epsilon = 1e-14);
        assert_abs_diff_eq!(d[5], -4.125089646961627, epsilon = 5e-13);
    }

    #[test]
    fn radial_table_matches_frozen_mixed_partial() {
        // d^2/du^2 d/dv of h(u^2+v^2) at (0.2, -0.1), frozen from an
        // independent high-precision implementation.
        let tab = Radial2Table::potential_base().diff(0).diff(0).diff(1);
        assert_abs_diff_eq!(tab.eval(0.2, -0.1), 0.16512426032246362, epsilon = 1e-14);
    }

    #[test]
    fn normalization_constants_match_frozen_values() {
        let p = JetProfiles::new();
        assert_abs_diff_eq!(p.c_psi, 6.87105699337935683, epsilon = 1e-10);
        assert_abs_diff_eq!(p.c_theta, 1.15172924291788026, epsilon = 1e-10);
    }

    #[test]
    fn point_values_match_frozen_values() {
        let p = JetProfiles::new();
        assert_abs_diff_eq!(p.psi_deriv(0, 0.3), 2.28969094944756835, epsilon = 1e-10);
        assert_abs_diff_eq!(
            p.potential_deriv((0, 0), 0.2, -0.1),
            4.01974318598388169e-1,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            p.theta_deriv((0, 0), 0.2, -0.1),
            1.87043705003846350,
            epsilon = 1e-10
        );
    }

    #[test]
    fn l2_normalizations_hit_targets() {
        let p = JetProfiles::new();
        let psi_l2 = p.psi_lp(0, 2.0);
        assert_abs_diff_eq!(psi_l2, crate::TAU.sqrt(), epsilon = 1e-8);
        let theta_l2 = p.radial2_mag_lp(false, &[(0, 0)], 2.0).unwrap();
        assert_abs_diff_eq!(theta_l2, crate::TAU, epsilon = 1e-8);
    }

    #[test]
    fn theta_mean_vanishes() {
        let p = JetProfiles::new();
        let mean = p.radial2_integral(false, (0, 0)).unwrap();
        assert!(mean.abs() <= 1e-10, "theta mean {mean}");
    }

    #[test]
    fn profile_table_equals_minus_laplacian_of_potential() {
        let p = JetProfiles::new();
        // theta = -(Theta_uu + Theta_vv) pointwise.
        for &(z1, z2) in &[(0.1, 0.2), (0.5, -0.3), (-0.7, 0.1), (0.0, 0.0)] {
            let lap = p.potential_deriv((2, 0), z1, z2) + p.potential_deriv((0, 2), z1, z2);
            assert_abs_diff_eq!(p.theta_deriv((0, 0), z1, z2), -lap, epsilon = 1e-12);
        }
    }

    #[test]
    fn table_derivatives_match_finite_differences() {
        let tab = Radial2Table::profile_base();
        let d1 = tab.diff(0);
        let d2 = d1.diff(1);
        let h = 1e-6;
        let (z1, z2) = (0.3, -0.4);
        let fd1 = (tab.eval(z1 + h, z2) - tab.eval(z1 - h, z2)) / (2.0 * h);
        assert_abs_diff_eq!(d1.eval(z1, z2), fd1, epsilon = 1e-6);
        let fd2 = (d1.eval(z1, z2 + h) - d1.eval(z1, z2 - h)) / (2.0 * h);
        assert_abs_diff_eq!(d2.eval(z1, z2), fd2, epsilon = 1e-5);
    }

    #[test]
    fn fourier_zero_modes_are_exact_means() {
        let p = JetProfiles::new();
        // <psi_r^2>_T = 1 and <theta_r^2>_{T^2} = 1 by the L2 targets;
        // <theta_r> = 0; <psi_r> = r^(1/2) * int psi / (2 pi).
        let r = 0.25;
        assert_abs_diff_eq!(p.psi_fourier(r, 0, 2), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(p.theta_fourier(r, 0.0, 2), 1.0, epsilon = 1e-8);
        assert!(p.theta_fourier(r, 0.0, 1).abs() < 1e-12);
    }
}
