//! Nonlocal calculus on tube-aligned fields, evaluated pointwise.
//!
//! Fields supported on thin periodic tubes factor into a radial transverse
//! profile times a longitudinal harmonic in phase coordinates `(u, v, s)`
//! (two transverse axes and the tube axis).  For such a field
//! `f(u, v, s) = T(rho) g(s)`, with `rho = sqrt(u^2 + v^2)`, the inverse
//! Laplacian splits over longitudinal harmonics `e^{i m s}` into screened
//! radial problems
//!
//! ```text
//! (d^2/drho^2 + (1/rho) d/drho - m^2) X_m = T,
//! ```
//!
//! whose bounded decaying solutions are tabulated here once per harmonic by
//! variation of parameters with modified Bessel kernels.  Everything the
//! scheme needs from the Helmholtz pieces of a tube field — the solenoidal
//! projector applied to `f xi`, its gradient part, the pressure-like scalar,
//! and their derivatives up to third order — then becomes a finite sum of
//! periodized images of these radial tables, with no grid in sight.  The same
//! harmonic data doubles as exact lattice statistics: the module also bins
//! the integer frequency lattice by transverse radius and accumulates
//! Parseval sums for the norms the reports quote.
//!
//! Tables depend only on the profile radii, not on the tube direction or the
//! anisotropy rate, so one set serves every direction of a jet family.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::jets::profiles::JetProfiles;
use crate::quadrature::gauss_legendre;
use crate::{JetkitError, Result, TAU};

// ---------------------------------------------------------------------------
// Modified Bessel functions (scaled), via integral representations.
// ---------------------------------------------------------------------------

/// Exponentially scaled `(e^{-z} I_0(z), e^{-z} I_1(z))` for `z >= 0`.
///
/// Trapezoid rule on the periodic even integrand `exp(z(cos t - 1))` over
/// `[0, pi]`, which converges spectrally; a ten-term asymptotic series takes
/// over for large arguments.
pub fn bessel_i01_scaled(z: f64) -> (f64, f64) {
    assert!(z >= 0.0 && z.is_finite(), "bessel argument must be finite and nonnegative");
    if z > 40.0 {
        let (i0, i1, _, _) = bessel_asymptotic(z);
        return (i0, i1);
    }
    let n = 48 + (3.2 * z).ceil() as usize;
    let h = PI / n as f64;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 0..=n {
        let t = h * k as f64;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        let c = t.cos();
        let e = (z * (c - 1.0)).exp();
        s0 += w * e;
        s1 += w * e * c;
    }
    (s0 * h / PI, s1 * h / PI)
}

/// Exponentially scaled `(e^{z} K_0(z), e^{z} K_1(z))` for `z > 0`.
///
/// Trapezoid rule on `exp(-z(cosh t - 1))` over `[0, T]` with `T` chosen so
/// the tail is below 1e-19; the integrand is even at `t = 0` and
/// exponentially small at `T`, so the rule is spectrally accurate.
pub fn bessel_k01_scaled(z: f64) -> (f64, f64) {
    assert!(z > 0.0 && z.is_finite(), "bessel argument must be finite and positive");
    if z > 40.0 {
        let (_, _, k0, k1) = bessel_asymptotic(z);
        return (k0, k1);
    }
    let t_cut = (1.0 + 43.8 / z).acosh();
    let n = 320usize;
    let h = t_cut / n as f64;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in 0..=n {
        let t = h * k as f64;
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        let c = t.cosh();
        let e = (-z * (c - 1.0)).exp();
        s0 += w * e;
        s1 += w * e * c;
    }
    (s0 * h, s1 * h)
}

/// Ten-term large-argument expansions of the four scaled kernels.
fn bessel_asymptotic(z: f64) -> (f64, f64, f64, f64) {
    let mut i0 = 0.0;
    let mut i1 = 0.0;
    let mut k0 = 0.0;
    let mut k1 = 0.0;
    // mu = 4 nu^2; shared term recurrence t_k = t_{k-1} (mu - (2k-1)^2)/(8kz).
    for (mu, ii, kk) in [(0.0, &mut i0, &mut k0), (4.0, &mut i1, &mut k1)] {
        let mut term = 1.0f64;
        let mut sign = 1.0f64;
        for k in 0..10 {
            *kk += term;
            *ii += sign * term;
            let j = (2 * k + 1) as f64;
            term *= (mu - j * j) / (8.0 * (k + 1) as f64 * z);
            sign = -sign;
        }
    }
    let front_i = 1.0 / (TAU * z).sqrt();
    let front_k = (PI / (2.0 * z)).sqrt();
    (front_i * i0, front_i * i1, front_k * k0, front_k * k1)
}

/// Unscaled `I_0` (for tests and small-argument use).
pub fn bessel_i0(z: f64) -> f64 {
    bessel_i01_scaled(z).0 * z.exp()
}

/// Unscaled `I_1`.
pub fn bessel_i1(z: f64) -> f64 {
    bessel_i01_scaled(z).1 * z.exp()
}

/// Unscaled `K_0`.
pub fn bessel_k0(z: f64) -> f64 {
    bessel_k01_scaled(z).0 * (-z).exp()
}

/// Unscaled `K_1`.
pub fn bessel_k1(z: f64) -> f64 {
    bessel_k01_scaled(z).1 * (-z).exp()
}

/// Bessel function of the first kind `J_0`, used by the radial Fourier
/// transform tables.  Power series up to `z = 14`, Hankel asymptotics beyond
/// (absolute accuracy ~1e-9 in the asymptotic range, far below the transform
/// magnitudes it multiplies there).
pub fn bessel_j0(z: f64) -> f64 {
    let z = z.abs();
    if z <= 14.0 {
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            term *= -q / ((k * k) as f64);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        // Hankel expansion with b_k = prod (2j-1)^2 / (k! (8z)^k):
        // P = b0 - b2 + b4 - ..., Q = -b1 + b3 - b5 + ...
        let mut bk = 1.0f64;
        let mut p = 0.0;
        let mut q = 0.0;
        for k in 0..9usize {
            let s = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += s * bk;
            } else {
                q += -s * bk;
            }
            let j = (2 * k + 1) as f64;
            bk *= j * j / (8.0 * (k + 1) as f64 * z);
        }
        let chi = z - PI / 4.0;
        (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

// ---------------------------------------------------------------------------
// Phase-space jets.
// ---------------------------------------------------------------------------

/// Multi-index order of each `PhaseJet` slot: `(du, dv, ds)` with total <= 3.
pub const JET_ORDERS: [(u8, u8, u8); 20] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (2, 0, 0),
    (1, 1, 0),
    (1, 0, 1),
    (0, 2, 0),
    (0, 1, 1),
    (0, 0, 2),
    (3, 0, 0),
    (2, 1, 0),
    (2, 0, 1),
    (1, 2, 0),
    (1, 1, 1),
    (1, 0, 2),
    (0, 3, 0),
    (0, 2, 1),
    (0, 1, 2),
    (0, 0, 3),
];

/// Transverse 2-D multi-indices `(du, dv)` with total <= 3, in the order the
/// radial-to-Cartesian accumulator fills them.
const TRANS_ORDERS: [(u8, u8); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

/// `COMPOSE[t][k]` is the `JET_ORDERS` slot of transverse order
/// `TRANS_ORDERS[t]` combined with `k` longitudinal derivatives.
const COMPOSE: [&[usize]; 10] = [
    &[0, 3, 9, 19],
    &[1, 6, 15],
    &[2, 8, 18],
    &[4, 12],
    &[5, 14],
    &[7, 17],
    &[10],
    &[11],
    &[13],
    &[16],
];

/// All phase-space derivatives of a scalar up to total order three.
#[derive(Clone, Copy, Debug, Default)]
pub struct PhaseJet {
    /// Components ordered as in [`JET_ORDERS`].
    pub d: [f64; 20],
}

impl PhaseJet {
    /// Slot index of the multi-index `(du, dv, ds)`; panics if the total
    /// order exceeds three.
    pub fn slot(du: u8, dv: u8, ds: u8) -> usize {
        JET_ORDERS
            .iter()
            .position(|&o| o == (du, dv, ds))
            .expect("phase-jet order out of range")
    }

    /// Derivative of the given multi-index order.
    pub fn get(&self, du: u8, dv: u8, ds: u8) -> f64 {
        self.d[Self::slot(du, dv, ds)]
    }

    /// The scalar value itself.
    pub fn value(&self) -> f64 {
        self.d[0]
    }

    /// First derivatives `(f_u, f_v, f_s)`.
    pub fn grad(&self) -> [f64; 3] {
        [self.d[1], self.d[2], self.d[3]]
    }

    /// Symmetric matrix of second derivatives in `(u, v, s)`.
    pub fn hess(&self) -> [[f64; 3]; 3] {
        let (uu, uv, us, vv, vs, ss) =
            (self.d[4], self.d[5], self.d[6], self.d[7], self.d[8], self.d[9]);
        [[uu, uv, us], [uv, vv, vs], [us, vs, ss]]
    }

    /// Third derivative by axes (symmetric in the arguments).
    pub fn third(&self, a: usize, b: usize, c: usize) -> f64 {
        let mut n = [0u8; 3];
        for ax in [a, b, c] {
            n[ax] += 1;
        }
        self.get(n[0], n[1], n[2])
    }

    /// Phase-space Laplacian `f_uu + f_vv + f_ss`.
    pub fn laplacian(&self) -> f64 {
        self.d[4] + self.d[7] + self.d[9]
    }

    /// Gradient of the phase-space Laplacian.
    pub fn laplacian_grad(&self) -> [f64; 3] {
        [
            self.d[10] + self.d[13] + self.d[15],
            self.d[11] + self.d[16] + self.d[18],
            self.d[12] + self.d[17] + self.d[19],
        ]
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &PhaseJet) {
        for (a, b) in self.d.iter_mut().zip(other.d.iter()) {
            *a += c * b;
        }
    }

    /// `c * self`.
    pub fn scaled(&self, c: f64) -> PhaseJet {
        let mut out = *self;
        for a in out.d.iter_mut() {
            *a *= c;
        }
        out
    }
}

/// Radial derivatives of one image of a tabulated potential, packaged with
/// the two combinations the Cartesian chain rule needs.
#[derive(Clone, Copy, Debug, Default)]
struct RadialEval {
    v: f64,
    d1: f64,
    d2: f64,
    d3: f64,
    /// `X' / rho` (finite on the axis).
    p: f64,
    /// `X''/rho - X'/rho^2` (finite on the axis).
    rr: f64,
}

/// Accumulate the Cartesian transverse derivatives of `X(|z|)` at offset
/// `(du, dv)` into the ten-slot transverse jet.
fn add_radial_cartesian(trans: &mut [f64; 10], e: &RadialEval, du: f64, dv: f64, rho: f64) {
    let (n1, n2) = if rho > 1e-300 { (du / rho, dv / rho) } else { (1.0, 0.0) };
    let (n11, n22, n12) = (n1 * n1, n2 * n2, n1 * n2);
    trans[0] += e.v;
    trans[1] += e.d1 * n1;
    trans[2] += e.d1 * n2;
    trans[3] += e.d2 * n11 + e.p * (1.0 - n11);
    trans[4] += (e.d2 - e.p) * n12;
    trans[5] += e.d2 * n22 + e.p * (1.0 - n22);
    trans[6] += e.d3 * n11 * n1 + 3.0 * e.rr * n1 * (1.0 - n11);
    trans[7] += e.d3 * n11 * n2 + e.rr * n2 * (1.0 - 3.0 * n11);
    trans[8] += e.d3 * n22 * n1 + e.rr * n1 * (1.0 - 3.0 * n22);
    trans[9] += e.d3 * n22 * n2 + 3.0 * e.rr * n2 * (1.0 - n22);
}

// ---------------------------------------------------------------------------
// Radial sources and screened potentials.
// ---------------------------------------------------------------------------

/// A compactly supported radial source term for the screened problems.
pub trait RadialSource: Sync {
    /// Radius beyond which the source vanishes identically.
    fn support(&self) -> f64;

    /// `[T, T', T'']` at the given radius (all zero beyond the support).
    fn derivs(&self, rho: f64) -> [f64; 3];
}

/// The squared transverse profile `T(rho) = theta(rho/r)^2 / r^2`.
pub struct SquaredTransverse {
    profiles: Arc<JetProfiles>,
    r_perp: f64,
}

impl SquaredTransverse {
    pub fn new(profiles: Arc<JetProfiles>, r_perp: f64) -> Self {
        SquaredTransverse { profiles, r_perp }
    }
}

impl RadialSource for SquaredTransverse {
    fn support(&self) -> f64 {
        self.r_perp
    }

    fn derivs(&self, rho: f64) -> [f64; 3] {
        let r = self.r_perp;
        if rho >= r {
            return [0.0; 3];
        }
        let w = rho / r;
        // Along the positive u-axis the Cartesian u-derivatives of the radial
        // profile coincide with radial derivatives.
        let f0 = self.profiles.theta_deriv((0, 0), w, 0.0);
        let f1 = self.profiles.theta_deriv((1, 0), w, 0.0);
        let f2 = self.profiles.theta_deriv((2, 0), w, 0.0);
        [
            f0 * f0 / (r * r),
            2.0 * f0 * f1 / (r * r * r),
            2.0 * (f1 * f1 + f0 * f2) / (r * r * r * r),
        ]
    }
}

/// Tabulated decaying solution of one screened radial problem
/// `(Lap_2 - m^2) X = T`, with value and three radial derivatives.
///
/// Built by variation of parameters with exponentially scaled kernels, so the
/// construction never overflows however deep the screening.  A dense table
/// covers the source support, a coarser one the exponential tail, and a
/// two-term even Taylor series covers the axis.
pub struct RadialPotential {
    m: f64,
    support: f64,
    /// Table extent; the potential is below ~1e-15 of its scale beyond.
    reach: f64,
    core_h: f64,
    /// `[X, X', X'', X''']` at `i * core_h`, `i = 0..=n_core`.
    core: [Vec<f64>; 4],
    tail_h: f64,
    /// Same four arrays at `support + i * tail_h` (empty if the tail is
    /// already negligible at the support edge).
    tail: [Vec<f64>; 4],
    x0_axis: f64,
    x2_axis: f64,
    x4_axis: f64,
}

const CORE_INTERVALS: usize = 256;

impl RadialPotential {
    /// Solve for harmonic index `m >= 1` against the given source.
    pub fn build(source: &dyn RadialSource, m: f64) -> Self {
        assert!(m >= 1.0, "harmonic index must be >= 1");
        let supp = source.support();
        assert!(supp > 0.0, "source support must be positive");
        let h = supp / CORE_INTERVALS as f64;
        let (gl_x, gl_w) = gauss_legendre(8);

        // Scaled cumulative kernel integrals at the core nodes:
        //   fwd_i  = e^{-m rho_i} int_0^{rho_i}  I0(mt) T(t) t dt
        //   bwd_i  = e^{+m rho_i} int_{rho_i}^{supp} K0(mt) T(t) t dt
        // Both recurrences only ever multiply by factors <= 1.
        let n_core = CORE_INTERVALS;
        let mut fwd = vec![0.0f64; n_core + 1];
        let mut bwd = vec![0.0f64; n_core + 1];
        let decay = (-m * h).exp();
        for i in 1..=n_core {
            let (lo, hi) = (h * (i - 1) as f64, h * i as f64);
            let mut acc = 0.0;
            for (&x, &w) in gl_x.iter().zip(gl_w.iter()) {
                let t = 0.5 * (lo + hi) + 0.5 * h * x;
                let src = source.derivs(t)[0];
                if src != 0.0 {
                    let i0 = bessel_i01_scaled(m * t).0;
                    acc += w * i0 * (m * (t - hi)).exp() * src * t;
                }
            }
            fwd[i] = fwd[i - 1] * decay + acc * 0.5 * h;
        }
        for i in (0..n_core).rev() {
            let (lo, hi) = (h * i as f64, h * (i + 1) as f64);
            let mut acc = 0.0;
            for (&x, &w) in gl_x.iter().zip(gl_w.iter()) {
                let t = 0.5 * (lo + hi) + 0.5 * h * x;
                let src = source.derivs(t)[0];
                if src != 0.0 {
                    let k0 = bessel_k01_scaled(m * t).0;
                    acc += w * k0 * (-m * (t - lo)).exp() * src * t;
                }
            }
            bwd[i] = bwd[i + 1] * decay + acc * 0.5 * h;
        }

        // Node values from the variation-of-parameters formula; second and
        // third derivatives through the differential equation itself.
        let mut core: [Vec<f64>; 4] = Default::default();
        for arr in core.iter_mut() {
            arr.resize(n_core + 1, 0.0);
        }
        let x0_axis = -bwd[0];
        let t_axis = source.derivs(0.0);
        let x2_axis = (t_axis[0] + m * m * x0_axis) / 4.0;
        let x4_axis = (0.5 * t_axis[2] + m * m * x2_axis) / 16.0;
        core[0][0] = x0_axis;
        core[1][0] = 0.0;
        core[2][0] = 2.0 * x2_axis;
        core[3][0] = 0.0;
        for i in 1..=n_core {
            let rho = h * i as f64;
            let z = m * rho;
            let (i0, i1) = bessel_i01_scaled(z);
            let (k0, k1) = bessel_k01_scaled(z);
            let x = -(k0 * fwd[i] + i0 * bwd[i]);
            let x1 = m * (k1 * fwd[i] - i1 * bwd[i]);
            let src = source.derivs(rho);
            let x2 = src[0] - x1 / rho + m * m * x;
            let x3 = src[1] - x2 / rho + x1 / (rho * rho) + m * m * x1;
            core[0][i] = x;
            core[1][i] = x1;
            core[2][i] = x2;
            core[3][i] = x3;
        }

        // Exponential tail: X = -C K0(m rho) with C = int_0^supp I0 T t dt,
        // kept in scaled form so nothing overflows.  The extent covers decay
        // to ~1e-10 of the edge value; for small m that means 34/m overall.
        let reach = (34.0 / m).max(supp + 23.0 / m);
        let tail_h = 0.02 / m;
        let n_tail = if reach > supp {
            ((reach - supp) / tail_h).ceil() as usize
        } else {
            0
        };
        let mut tail: [Vec<f64>; 4] = Default::default();
        for arr in tail.iter_mut() {
            arr.resize(n_tail + 1, 0.0);
        }
        let c_scaled = fwd[n_core]; // e^{-m supp} * C
        for j in 0..=n_tail {
            let rho = supp + tail_h * j as f64;
            let z = m * rho;
            let (k0, k1) = bessel_k01_scaled(z);
            let damp = (m * (supp - rho)).exp();
            let x = -c_scaled * k0 * damp;
            let x1 = c_scaled * m * k1 * damp;
            let x2 = -x1 / rho + m * m * x;
            let x3 = -x2 / rho + x1 / (rho * rho) + m * m * x1;
            tail[0][j] = x;
            tail[1][j] = x1;
            tail[2][j] = x2;
            tail[3][j] = x3;
        }

        RadialPotential {
            m,
            support: supp,
            reach,
            core_h: h,
            core,
            tail_h,
            tail,
            x0_axis,
            x2_axis,
            x4_axis,
        }
    }

    /// Largest radius at which the potential is non-negligible.
    pub fn reach(&self) -> f64 {
        self.reach
    }

    /// Value and derivatives at one radius.  Cubic Hermite interpolation
    /// pairs each array with the next derivative; the third derivative uses
    /// four-point Lagrange.  Near the axis an even Taylor series avoids the
    /// cancellation in `X''/rho - X'/rho^2`.
    fn eval(&self, rho: f64) -> RadialEval {
        if rho >= self.reach {
            return RadialEval::default();
        }
        if rho < self.core_h {
            let r2 = rho * rho;
            let (x2, x4) = (self.x2_axis, self.x4_axis);
            return RadialEval {
                v: self.x0_axis + x2 * r2 + x4 * r2 * r2,
                d1: 2.0 * x2 * rho + 4.0 * x4 * r2 * rho,
                d2: 2.0 * x2 + 12.0 * x4 * r2,
                d3: 24.0 * x4 * rho,
                p: 2.0 * x2 + 4.0 * x4 * r2,
                rr: 8.0 * x4 * rho,
            };
        }
        let (arrs, h, x0) = if rho <= self.support || self.tail[0].is_empty() {
            (&self.core, self.core_h, 0.0)
        } else {
            (&self.tail, self.tail_h, self.support)
        };
        let n = arrs[0].len();
        let pos = ((rho - x0) / h).min((n - 1) as f64 - 1e-9).max(0.0);
        let i = (pos.floor() as usize).min(n - 2);
        let t = pos - i as f64;
        let herm = |f: &[f64], d: &[f64]| -> f64 {
            let (f0, f1, d0, d1) = (f[i], f[i + 1], d[i] * h, d[i + 1] * h);
            let t2 = t * t;
            let t3 = t2 * t;
            f0 * (2.0 * t3 - 3.0 * t2 + 1.0)
                + f1 * (3.0 * t2 - 2.0 * t3)
                + d0 * (t3 - 2.0 * t2 + t)
                + d1 * (t3 - t2)
        };
        let v = herm(&arrs[0], &arrs[1]);
        let d1 = herm(&arrs[1], &arrs[2]);
        let d2 = herm(&arrs[2], &arrs[3]);
        // 4-point Lagrange for the third derivative.
        let i0 = i.saturating_sub(1).min(n - 4);
        let x = pos - i0 as f64;
        let f3 = &arrs[3];
        let mut d3 = 0.0;
        for a in 0..4 {
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    l *= (x - b as f64) / (a as f64 - b as f64);
                }
            }
            d3 += l * f3[i0 + a];
        }
        RadialEval {
            v,
            d1,
            d2,
            d3,
            p: d1 / rho,
            rr: d2 / rho - d1 / (rho * rho),
        }
    }
}

// ---------------------------------------------------------------------------
// Radial Fourier transform tables.
// ---------------------------------------------------------------------------

/// Uniformly sampled radial transform `rho -> t_hat(rho)` with four-point
/// Lagrange interpolation; zero beyond the adaptive extent.
pub struct HankelTable {
    dr: f64,
    vals: Vec<f64>,
}

impl HankelTable {
    pub fn at(&self, rho: f64) -> f64 {
        let pos = rho.abs() / self.dr;
        let n = self.vals.len();
        if pos >= (n - 1) as f64 {
            return 0.0;
        }
        let i0 = (pos.floor() as usize).saturating_sub(1).min(n - 4);
        let x = pos - i0 as f64;
        let mut out = 0.0;
        for a in 0..4 {
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    l *= (x - b as f64) / (a as f64 - b as f64);
                }
            }
            out += l * self.vals[i0 + a];
        }
        out
    }

    /// Largest tabulated radius.
    pub fn extent(&self) -> f64 {
        self.dr * (self.vals.len() - 1) as f64
    }
}

/// Build the transverse transform table
/// `t_hat(rho) = scale * int_0^1 theta(q)^power J_0(r rho q) q dq`
/// by composite quadrature, growing the extent until three consecutive
/// chunks stay below 1e-13 of the running maximum.
fn hankel_table(profiles: &JetProfiles, r_perp: f64, power: u32) -> Result<HankelTable> {
    let scale = match power {
        1 => r_perp / TAU,
        2 => 1.0 / TAU,
        _ => unreachable!(),
    };
    let dr = 0.02 / r_perp;
    let chunk = 256usize;
    let max_nodes = 40_000usize;
    let node = |rho: f64| -> f64 {
        let panels = 8 + (r_perp * rho / 3.0).ceil() as usize;
        crate::quadrature::integrate_panels(0.0, 1.0, panels, 10, |q| {
            let th = profiles.theta_deriv((0, 0), q, 0.0);
            th.powi(power as i32) * bessel_j0(r_perp * rho * q) * q
        }) * scale
    };
    let mut vals: Vec<f64> = Vec::new();
    let mut peak = 0.0f64;
    let mut quiet_chunks = 0usize;
    while quiet_chunks < 3 {
        let start = vals.len();
        if start + chunk > max_nodes {
            return Err(JetkitError::UnderResolved(format!(
                "transverse transform table did not decay within {} nodes (r_perp = {:.3e})",
                max_nodes, r_perp
            )));
        }
        let mut new_vals: Vec<f64> = (start..start + chunk)
            .into_par_iter()
            .map(|i| node(dr * i as f64))
            .collect();
        let chunk_max = new_vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        vals.append(&mut new_vals);
        peak = peak.max(chunk_max);
        if chunk_max < 1e-13 * peak {
            quiet_chunks += 1;
        } else {
            quiet_chunks = 0;
        }
    }
    Ok(HankelTable { dr, vals })
}

// ---------------------------------------------------------------------------
// Lattice statistics.
// ---------------------------------------------------------------------------

/// Exact Parseval sums over the phase frequency lattice for the unit-envelope
/// tube fields.  All sums run over nonzero modes `m = (m_perp, m3)`; writing
/// `f1 = t1(|m_perp|) g1(m3)` (profile) and `f2 = t2(|m_perp|) g2(m3)`
/// (squared profile), with longitudinal weight `w = m3^2/|m|^2`:
#[derive(Clone, Copy, Debug, Default)]
pub struct LatticeNorms {
    /// `sum f1^2` — the mean square of the profile field itself.
    pub wp_l2_sq: f64,
    /// `sum f2^2 w` — the gradient (curl-free) part of the squared field.
    pub q_part_l2_sq: f64,
    /// `sum f2^2 (1 - w)` — the solenoidal part of the squared field.
    pub p_part_l2_sq: f64,
    /// `sum f1 f2 (1 - w)` — pairing of the profile field with the
    /// solenoidal part of its square.
    pub wp_dot_p_part: f64,
    /// `sum (f2 w)^2` — the pressure-like scalar of the squared field.
    pub pressure_l2_sq: f64,
}

// ---------------------------------------------------------------------------
// The assembled tables.
// ---------------------------------------------------------------------------

/// Everything the scheme tabulates once per profile-radius pair: harmonic
/// coefficients, screened radial potentials, transform tables, and lattice
/// statistics.  Directions enter only later, through the frame used to read
/// phase coordinates off a spatial point, so one table set serves a whole
/// jet family.
pub struct TubeTables {
    r_perp: f64,
    r_par: f64,
    profiles: Arc<JetProfiles>,
    /// Circle harmonics of the periodized longitudinal profile.
    g1: Vec<f64>,
    /// Same for its square.
    g2: Vec<f64>,
    /// Screened potentials for harmonics `1..=g2.len()-1`.
    pots: Vec<RadialPotential>,
    t1: HankelTable,
    t2: HankelTable,
    norms: LatticeNorms,
}

/// Decay cap for the longitudinal harmonic expansions.  The profile spectra
/// decay stretched-exponentially, so the weighted cutoff below lands near
/// m ~ 400 / r_par; the cap guards radii too small to tabulate.
const HARMONIC_CAP: usize = 2048;

/// Circle harmonics of the periodized longitudinal profile (or its square),
/// `(2 pi)^{-1} int psi_r(s)^power cos(m s) ds`, by composite quadrature with
/// panel count tied to the oscillation of the mode.  Truncated once the
/// coefficients, weighted by `1 + m^2` (the strongest consumer weight), stay
/// below `tol` relative to their running peak.
fn harmonic_coeffs(
    profiles: &JetProfiles,
    r_par: f64,
    power: u32,
    tol_weighted: f64,
) -> Result<Vec<f64>> {
    let scale = match power {
        1 => r_par.sqrt() / TAU,
        2 => 1.0 / TAU,
        _ => unreachable!(),
    };
    let mut coeffs = Vec::new();
    let mut peak = 0.0f64;
    let mut quiet = 0usize;
    for m in 0..=HARMONIC_CAP {
        let panels = 8 + ((m as f64) * r_par / 2.0).ceil() as usize;
        let c = crate::quadrature::integrate_panels(-1.0, 1.0, panels, 10, |w| {
            profiles.psi_deriv(0, w).powi(power as i32) * (m as f64 * r_par * w).cos()
        }) * scale;
        coeffs.push(c);
        let weighted = c.abs() * (1.0 + (m * m) as f64);
        peak = peak.max(weighted);
        if weighted < tol_weighted * peak {
            quiet += 1;
            if quiet == 8 && m >= 8 {
                coeffs.truncate(coeffs.len() - 8);
                return Ok(coeffs);
            }
        } else {
            quiet = 0;
        }
    }
    Err(JetkitError::UnderResolved(format!(
        "longitudinal harmonics did not decay within {} modes (r_par = {:.3e})",
        HARMONIC_CAP, r_par
    )))
}

impl TubeTables {
    /// Build all tables for one radius pair.  Cost is dominated by the
    /// screened radial solves, parallelized over harmonics.
    pub fn new(profiles: Arc<JetProfiles>, r_perp: f64, r_par: f64) -> Result<Self> {
        if !(r_perp > 0.0 && r_perp <= 0.5 && r_perp.is_finite()) {
            return Err(JetkitError::Params(format!(
                "transverse radius {r_perp:.3e} outside (0, 0.5]"
            )));
        }
        if !(r_par >= r_perp && r_par <= 0.5 && r_par.is_finite()) {
            return Err(JetkitError::Params(format!(
                "longitudinal radius {r_par:.3e} outside [r_perp, 0.5]"
            )));
        }
        let g1 = harmonic_coeffs(&profiles, r_par, 1, 1e-10)?;
        let g2 = harmonic_coeffs(&profiles, r_par, 2, 1e-10)?;
        let source = SquaredTransverse::new(profiles.clone(), r_perp);
        let m_top = g2.len() - 1;
        if (m_top as f64) * r_perp > 600.0 {
            return Err(JetkitError::UnderResolved(format!(
                "screened solves need m * r_perp <= 600, got {} * {:.3e}",
                m_top, r_perp
            )));
        }
        let pots: Vec<RadialPotential> = (1..=m_top)
            .into_par_iter()
            .map(|m| RadialPotential::build(&source, m as f64))
            .collect();
        let t1 = hankel_table(&profiles, r_perp, 1)?;
        let t2 = hankel_table(&profiles, r_perp, 2)?;
        let mut tables = TubeTables {
            r_perp,
            r_par,
            profiles,
            g1,
            g2,
            pots,
            t1,
            t2,
            norms: LatticeNorms::default(),
        };
        tables.norms = tables.compute_lattice_norms()?;
        Ok(tables)
    }

    pub fn r_perp(&self) -> f64 {
        self.r_perp
    }

    pub fn r_par(&self) -> f64 {
        self.r_par
    }

    /// Longitudinal harmonics of the profile (index = mode number).
    pub fn g1(&self) -> &[f64] {
        &self.g1
    }

    /// Longitudinal harmonics of the squared profile.
    pub fn g2(&self) -> &[f64] {
        &self.g2
    }

    /// Transverse transform of the profile at transverse radius `rho`.
    pub fn t1_at(&self, rho: f64) -> f64 {
        self.t1.at(rho)
    }

    /// Transverse transform of the squared profile.
    pub fn t2_at(&self, rho: f64) -> f64 {
        self.t2.at(rho)
    }

    /// Mean of the squared-profile field over the phase torus.
    pub fn cell_mean(&self) -> f64 {
        self.t2.at(0.0) * self.g2[0]
    }

    /// Precomputed Parseval sums.
    pub fn lattice(&self) -> &LatticeNorms {
        &self.norms
    }

    /// Harmonic coefficient pairs `(A_m, B_m)` so that
    /// `Phi = sum_m X_m(rho) (A_m cos(m s) + B_m sin(m s))`
    /// solves `Lap_ph Phi = d/ds (T g)`: the potential whose phase gradient
    /// is the curl-free part of the squared field times the tube axis.
    pub fn q_potential_coeffs(&self) -> Vec<(f64, f64)> {
        (1..self.g2.len())
            .map(|m| (0.0, -2.0 * m as f64 * self.g2[m]))
            .collect()
    }

    /// Coefficients of `dPhi/ds`, the pressure-like scalar of the squared
    /// field (per unit envelope).
    pub fn p_potential_coeffs(&self) -> Vec<(f64, f64)> {
        (1..self.g2.len())
            .map(|m| {
                let mf = m as f64;
                (-2.0 * mf * mf * self.g2[m], 0.0)
            })
            .collect()
    }

    /// Phase jet of a harmonic potential sum at phase point `(u, v, s)`:
    /// `sum_m X_m(rho) (A_m cos(m s) + B_m sin(m s))` with all derivatives to
    /// order three, summed over periodized images in the transverse plane.
    pub fn potential_jet(&self, u: f64, v: f64, s: f64, coeffs: &[(f64, f64)]) -> PhaseJet {
        let u = wrap_angle(u);
        let v = wrap_angle(v);
        let mut jet = PhaseJet::default();
        let m_max = coeffs.len().min(self.pots.len());
        for (mi, &(a, b)) in coeffs.iter().take(m_max).enumerate() {
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let pot = &self.pots[mi];
            let m = pot.m;
            let reach = pot.reach;
            // High harmonics only reach the tube's own cell: skip them fast
            // when the probe is outside their radius (every other image is at
            // least 2 pi - pi sqrt(2) > 1.8 away).
            if reach < 1.8 && u * u + v * v > reach * reach {
                continue;
            }
            let jr = ((reach + PI * 1.4143) / TAU).ceil() as i64;
            let mut trans = [0.0f64; 10];
            for jx in -jr..=jr {
                let du = u - TAU * jx as f64;
                if du.abs() > reach {
                    continue;
                }
                for jy in -jr..=jr {
                    let dv = v - TAU * jy as f64;
                    let rho = (du * du + dv * dv).sqrt();
                    if rho > reach {
                        continue;
                    }
                    let e = pot.eval(rho);
                    add_radial_cartesian(&mut trans, &e, du, dv, rho);
                }
            }
            let ms = m * s;
            let (sin, cos) = ms.sin_cos();
            let c0 = a * cos + b * sin;
            let c1 = m * (b * cos - a * sin);
            let c = [c0, c1, -m * m * c0, -m * m * c1];
            for (ti, slots) in COMPOSE.iter().enumerate() {
                let tv = trans[ti];
                if tv == 0.0 {
                    continue;
                }
                for (k, &slot) in slots.iter().enumerate() {
                    jet.d[slot] += tv * c[k];
                }
            }
        }
        jet
    }

    /// Batched, parallel version of [`potential_jet`].
    pub fn potential_jet_batch(&self, pts: &[[f64; 3]], coeffs: &[(f64, f64)]) -> Vec<PhaseJet> {
        pts.par_iter()
            .map(|p| self.potential_jet(p[0], p[1], p[2], coeffs))
            .collect()
    }

    /// Phase jet of the squared-profile field `T(rho) g(s)` itself (exact
    /// profile calculus, single transverse image since the support is well
    /// inside the cell).
    pub fn local_jet(&self, u: f64, v: f64, s: f64) -> PhaseJet {
        let u = wrap_angle(u);
        let v = wrap_angle(v);
        let s = wrap_angle(s);
        let mut jet = PhaseJet::default();
        let r = self.r_perp;
        let rl = self.r_par;
        if u * u + v * v >= r * r || s.abs() >= rl {
            return jet;
        }
        // Transverse factor: Cartesian derivatives of theta(z/r)^2 / r^2.
        let (zu, zv) = (u / r, v / r);
        let mut th = [[0.0f64; 4]; 4];
        for i in 0..4usize {
            for j in 0..4usize {
                if i + j <= 3 {
                    th[i][j] = self.profiles.theta_deriv((i as u32, j as u32), zu, zv);
                }
            }
        }
        let binom = [[1.0f64, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [
            1.0, 3.0, 3.0, 1.0,
        ]];
        let mut tfac = [0.0f64; 10];
        for (ti, &(i, j)) in TRANS_ORDERS.iter().enumerate() {
            let (i, j) = (i as usize, j as usize);
            let mut sum = 0.0;
            for p in 0..=i {
                for q in 0..=j {
                    sum += binom[i][p] * binom[j][q] * th[p][q] * th[i - p][j - q];
                }
            }
            tfac[ti] = sum / r.powi(2 + (i + j) as i32);
        }
        // Longitudinal factor: derivatives of psi(s/rl)^2 / rl.
        let w = s / rl;
        let ps = self.profiles.psi_derivs_upto(3, w);
        let mut gfac = [0.0f64; 4];
        for k in 0..4usize {
            let mut sum = 0.0;
            for p in 0..=k {
                sum += binom[k][p] * ps[p] * ps[k - p];
            }
            gfac[k] = sum / rl.powi(1 + k as i32);
        }
        for (ti, slots) in COMPOSE.iter().enumerate() {
            for (k, &slot) in slots.iter().enumerate() {
                jet.d[slot] = tfac[ti] * gfac[k];
            }
        }
        jet
    }

    /// Fused Parseval pass over the integer lattice, binned by `|m_perp|^2`.
    fn compute_lattice_norms(&self) -> Result<LatticeNorms> {
        let rho_max = self.t1.extent().max(self.t2.extent());
        if rho_max > 4000.0 {
            return Err(JetkitError::UnderResolved(format!(
                "lattice statistics need transform extent <= 4000, got {rho_max:.1}"
            )));
        }
        let n_max = (rho_max * rho_max).ceil() as usize;
        // r2(n): number of integer pairs with m1^2 + m2^2 = n.
        let mut hist = vec![0u32; n_max + 1];
        let p_max = rho_max.floor() as i64;
        for m1 in 0..=p_max {
            let m1sq = (m1 * m1) as usize;
            if m1sq > n_max {
                break;
            }
            for m2 in 0..=m1 {
                let n = m1sq + (m2 * m2) as usize;
                if n > n_max {
                    break;
                }
                let mult = if m1 == 0 && m2 == 0 {
                    1
                } else if m2 == 0 || m1 == m2 {
                    4
                } else {
                    8
                };
                hist[n] += mult;
            }
        }
        let bins: Vec<(u32, u32)> = hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(n, &c)| (n as u32, c))
            .collect();
        drop(hist);
        let pre: Vec<(f64, f64, f64, f64)> = bins
            .par_iter()
            .map(|&(n, c)| {
                let rho = (n as f64).sqrt();
                (n as f64, c as f64, self.t1.at(rho), self.t2.at(rho))
            })
            .collect();

        let m3_max = self.g1.len().max(self.g2.len()) - 1;
        let g_scale = self.g1[0].abs().max(self.g2[0].abs());
        let partials: Vec<LatticeNorms> = (0..=m3_max)
            .into_par_iter()
            .map(|m3| {
                let mut out = LatticeNorms::default();
                let m3sq = (m3 * m3) as f64;
                let factor = if m3 == 0 { 1.0 } else { 2.0 };
                let c1 = self.g1.get(m3).copied().unwrap_or(0.0);
                let c2 = self.g2.get(m3).copied().unwrap_or(0.0);
                if c1.abs().max(c2.abs()) < 1e-10 * g_scale {
                    return out;
                }
                for &(n, count, t1v, t2v) in pre.iter() {
                    if m3 == 0 && n == 0.0 {
                        continue;
                    }
                    let wgt = m3sq / (n + m3sq);
                    let f1 = t1v * c1;
                    let f2 = t2v * c2;
                    let cc = count * factor;
                    out.wp_l2_sq += cc * f1 * f1;
                    out.q_part_l2_sq += cc * f2 * f2 * wgt;
                    out.p_part_l2_sq += cc * f2 * f2 * (1.0 - wgt);
                    out.wp_dot_p_part += cc * f1 * f2 * (1.0 - wgt);
                    out.pressure_l2_sq += cc * (f2 * wgt) * (f2 * wgt);
                }
                out
            })
            .collect();
        let mut total = LatticeNorms::default();
        for p in partials {
            total.wp_l2_sq += p.wp_l2_sq;
            total.q_part_l2_sq += p.q_part_l2_sq;
            total.p_part_l2_sq += p.p_part_l2_sq;
            total.wp_dot_p_part += p.wp_dot_p_part;
            total.pressure_l2_sq += p.pressure_l2_sq;
        }
        Ok(total)
    }
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y >= PI {
        y - TAU
    } else {
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use std::sync::OnceLock;

    fn profiles() -> Arc<JetProfiles> {
        static P: OnceLock<Arc<JetProfiles>> = OnceLock::new();
        P.get_or_init(|| Arc::new(JetProfiles::new())).clone()
    }

    fn tables() -> &'static TubeTables {
        static T: OnceLock<TubeTables> = OnceLock::new();
        T.get_or_init(|| TubeTables::new(profiles(), 0.25, 0.35).expect("tables"))
    }

    #[test]
    fn bessel_values_match_references() {
        // Frozen reference values of the classical special functions.
        assert!((bessel_i0(1.0) - 1.2660658777520082).abs() < 1e-12);
        assert!((bessel_i1(1.0) - 0.5651591039924851).abs() < 1e-12);
        assert!((bessel_k0(1.0) - 0.42102443824070834).abs() < 1e-12);
        assert!((bessel_k0(2.0) - 0.11389387274953344).abs() < 1e-12);
        assert!((bessel_k1(1.0) - 0.6019072301972346).abs() < 1e-12);
        assert!((bessel_j0(1.0) - 0.7651976865579666).abs() < 1e-12);
        assert!((bessel_j0(5.0) + 0.17759677131433830).abs() < 1e-12);
        assert!((bessel_j0(20.0) - 0.16702466434058315).abs() < 1e-9);
    }

    #[test]
    fn bessel_wronskian_holds_across_scales() {
        for &z in &[0.1, 0.7, 1.0, 3.0, 7.0, 15.0, 30.0, 39.9, 40.1, 60.0, 200.0] {
            let w = bessel_i0(z) * bessel_k1(z) + bessel_i1(z) * bessel_k0(z);
            let rel = (w - 1.0 / z).abs() * z;
            assert!(rel < 1e-11, "wronskian off by {rel:.3e} at z = {z}");
        }
    }

    #[test]
    fn j0_series_and_asymptotics_agree_at_the_seam() {
        for i in 0..20 {
            let z = 14.0 + 0.35 * i as f64;
            let q = 0.25 * z * z;
            let mut term = 1.0;
            let mut series = 1.0;
            for k in 1..80 {
                term *= -q / ((k * k) as f64);
                series += term;
                if term.abs() < 1e-19 * series.abs().max(1.0) {
                    break;
                }
            }
            assert!(
                (bessel_j0(z) - series).abs() < 3e-9,
                "J0 mismatch at z = {z}: {} vs {}",
                bessel_j0(z),
                series
            );
        }
    }

    /// Manufactured screened problem with a Gaussian solution.
    struct GaussianSource {
        w: f64,
        m: f64,
    }

    impl GaussianSource {
        fn x_derivs(&self, rho: f64) -> [f64; 4] {
            let w2 = self.w * self.w;
            let x = (-(rho * rho) / w2).exp();
            [
                x,
                -2.0 * rho / w2 * x,
                (-2.0 / w2 + 4.0 * rho * rho / (w2 * w2)) * x,
                (12.0 * rho / (w2 * w2) - 8.0 * rho.powi(3) / (w2 * w2 * w2)) * x,
            ]
        }
    }

    impl RadialSource for GaussianSource {
        fn support(&self) -> f64 {
            6.0 * self.w
        }

        fn derivs(&self, rho: f64) -> [f64; 3] {
            if rho >= self.support() {
                return [0.0; 3];
            }
            let w2 = self.w * self.w;
            let x = self.x_derivs(rho);
            let t = (4.0 * rho * rho / w2 - 4.0) / w2 - self.m * self.m;
            let tp = 16.0 * rho / (w2 * w2) - 8.0 * rho.powi(3) / (w2 * w2 * w2)
                + 2.0 * self.m * self.m * rho / w2;
            let tpp_part = (-2.0 * rho / w2) * (16.0 * rho / (w2 * w2)
                - 8.0 * rho.powi(3) / (w2 * w2 * w2)
                + 2.0 * self.m * self.m * rho / w2)
                + 16.0 / (w2 * w2)
                - 24.0 * rho * rho / (w2 * w2 * w2)
                + 2.0 * self.m * self.m / w2;
            [t * x[0], tp * x[0], tpp_part * x[0]]
        }
    }

    #[test]
    fn screened_solve_reproduces_a_manufactured_solution() {
        for &m in &[1.0, 4.0, 17.0] {
            let src = GaussianSource { w: 0.05, m };
            let pot = RadialPotential::build(&src, m);
            // Scales of each derivative order, for relative comparisons.
            let scale = [1.0, 1.0 / 0.05, 1.0 / 0.05f64.powi(2), 1.0 / 0.05f64.powi(3)];
            for i in 0..=200 {
                let rho = 4.0 * 0.05 * i as f64 / 200.0;
                let want = src.x_derivs(rho);
                let got = pot.eval(rho);
                let have = [got.v, got.d1, got.d2, got.d3];
                for k in 0..4 {
                    let err = (have[k] - want[k]).abs() / scale[k];
                    assert!(
                        err < 1e-9,
                        "order {k} at rho = {rho:.4}, m = {m}: err {err:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn screened_solve_satisfies_its_equation_between_nodes() {
        let t = tables();
        let src = SquaredTransverse::new(profiles(), t.r_perp);
        for (mi, pot) in t.pots.iter().enumerate().step_by(37) {
            let m = (mi + 1) as f64;
            let t_max = src.derivs(0.45 * t.r_perp)[0].abs().max(1e-3);
            for i in 1..40 {
                // Off-node radii inside the support.
                let rho = t.r_perp * (i as f64 + 0.371) / 41.0;
                let e = pot.eval(rho);
                let resid = e.d2 + e.d1 / rho - m * m * e.v - src.derivs(rho)[0];
                assert!(
                    resid.abs() < 1e-6 * t_max,
                    "ODE residual {resid:.3e} at rho = {rho:.4}, m = {m}"
                );
            }
        }
    }

    #[test]
    fn transform_tables_are_normalized() {
        let t = tables();
        assert!((t.t2_at(0.0) - 1.0).abs() < 1e-10, "t2(0) = {}", t.t2_at(0.0));
        assert!(t.t1_at(0.0).abs() < 1e-10, "t1(0) = {}", t.t1_at(0.0));
        assert!((t.g2()[0] - 1.0).abs() < 1e-10, "g2(0) = {}", t.g2()[0]);
        // Spot-check the fast transform against the direct quadrature.
        let p = profiles();
        for &rho in &[3.0, 17.5, 44.2] {
            let direct = p.theta_fourier(t.r_perp, rho, 2);
            assert!(
                (t.t2_at(rho) - direct).abs() < 1e-8,
                "t2({rho}) = {} vs direct {}",
                t.t2_at(rho),
                direct
            );
            let direct1 = p.theta_fourier(t.r_perp, rho, 1);
            assert!((t.t1_at(rho) - direct1).abs() < 1e-8);
        }
    }

    #[test]
    fn potential_jet_solves_the_phase_poisson_problem() {
        // Lap_ph Phi must equal d/ds of the local squared field, and the two
        // sides come from entirely different code paths (screened tables vs
        // profile calculus).
        let t = tables();
        let coeffs = t.q_potential_coeffs();
        let scale = 1.0 / (t.r_perp * t.r_perp * t.r_par * t.r_par);
        let probes = [
            [0.03, -0.02, 0.05],
            [0.1, 0.05, -0.2],
            [-0.21, 0.11, 0.31],
            [0.0, 0.0, 0.09],
            [0.24, 0.0, 0.0],
            [1.3, 0.4, 0.8], // outside the tube: local side vanishes
        ];
        for p in probes {
            let pot = t.potential_jet(p[0], p[1], p[2], &coeffs);
            let loc = t.local_jet(p[0], p[1], p[2]);
            let resid = pot.laplacian() - loc.get(0, 0, 1);
            assert!(
                resid.abs() < 1e-7 * scale,
                "poisson residual {resid:.3e} at {p:?}"
            );
        }
    }

    #[test]
    fn potential_jet_matches_a_lattice_fourier_sum() {
        // Independent route: sum the transverse transform over the integer
        // frequency lattice for a single longitudinal harmonic.
        let t = tables();
        let m3 = 2usize;
        let cut = t.t2.extent();
        let kmax = cut.floor() as i64;
        let eval = |u: f64, v: f64| -> f64 {
            let mut sum = 0.0;
            for k1 in -kmax..=kmax {
                for k2 in -kmax..=kmax {
                    let nsq = (k1 * k1 + k2 * k2) as f64;
                    if nsq > cut * cut {
                        continue;
                    }
                    let th = t.t2_at(nsq.sqrt());
                    if th == 0.0 {
                        continue;
                    }
                    sum += th / (nsq + (m3 * m3) as f64)
                        * (k1 as f64 * u + k2 as f64 * v).cos();
                }
            }
            -sum
        };
        // potential_jet with a unit cosine coefficient on harmonic m3.
        let mut coeffs = vec![(0.0, 0.0); m3];
        coeffs[m3 - 1] = (1.0, 0.0);
        for (u, v) in [(0.0, 0.0), (0.11, -0.07), (0.8, 0.3), (2.4, -1.9)] {
            let via_tables = t.potential_jet(u, v, 0.0, &coeffs).value();
            let via_lattice = eval(u, v);
            assert!(
                (via_tables - via_lattice).abs() < 1e-7,
                "potential mismatch at ({u}, {v}): {via_tables} vs {via_lattice}"
            );
        }
    }

    #[test]
    fn local_jet_matches_finite_differences() {
        let t = tables();
        let (u, v, s) = (0.05, -0.08, 0.1);
        let h = 1e-4;
        let f = |u: f64, v: f64, s: f64| t.local_jet(u, v, s).value();
        let jet = t.local_jet(u, v, s);
        let fd_u = (f(u + h, v, s) - f(u - h, v, s)) / (2.0 * h);
        let fd_vv = (f(u, v + h, s) - 2.0 * f(u, v, s) + f(u, v - h, s)) / (h * h);
        let fd_uvs = (f(u + h, v + h, s + h) - f(u + h, v + h, s - h) - f(u + h, v - h, s + h)
            + f(u + h, v - h, s - h)
            - f(u - h, v + h, s + h)
            + f(u - h, v + h, s - h)
            + f(u - h, v - h, s + h)
            - f(u - h, v - h, s - h))
            / (8.0 * h * h * h);
        let scale = jet.value().abs().max(1.0);
        assert!((jet.get(1, 0, 0) - fd_u).abs() < 1e-5 * scale / t.r_perp);
        assert!((jet.get(0, 2, 0) - fd_vv).abs() < 2e-4 * scale / (t.r_perp * t.r_perp));
        assert!(
            (jet.get(1, 1, 1) - fd_uvs).abs()
                < 2e-3 * scale / (t.r_perp * t.r_perp * t.r_par)
        );
    }

    #[test]
    fn lattice_norms_match_profile_quadratures() {
        let t = tables();
        let p = profiles();
        let n = t.lattice();
        // Mean square of the profile field factorizes into profile integrals
        // that are both exactly one by normalization.
        assert!(
            (n.wp_l2_sq - 1.0).abs() < 1e-6,
            "wp mean square = {}",
            n.wp_l2_sq
        );
        // Mean square of the squared field, minus its mean, must equal the
        // sum of the gradient and solenoidal parts.
        // Mean of T^2 over the 2-torus: (2 pi r^2)^(-1) int_0^1 theta^4 q dq.
        let theta4 = integrate(0.0, 1.0, 160, |q| {
            let th = p.theta_deriv((0, 0), q, 0.0);
            th.powi(4) * q
        }) / (TAU * t.r_perp * t.r_perp);
        let psi4 = integrate(-1.0, 1.0, 160, |w| {
            let ps = p.psi_deriv(0, w);
            ps.powi(4)
        }) / (TAU * t.r_par);
        let mean_sq_f2 = theta4 * psi4;
        let mean_f2 = t.cell_mean();
        let fluct = mean_sq_f2 - mean_f2 * mean_f2;
        let parts = n.q_part_l2_sq + n.p_part_l2_sq;
        assert!(
            (parts - fluct).abs() < 1e-6 * fluct.abs().max(1.0),
            "parseval split {parts} vs quadrature {fluct}"
        );
    }

    #[test]
    fn harmonic_synthesis_recovers_the_longitudinal_profile() {
        let t = tables();
        let p = profiles();
        for &s in &[0.0, 0.07, -0.19, 0.33] {
            let mut g = t.g2()[0];
            for (m, &c) in t.g2().iter().enumerate().skip(1) {
                g += 2.0 * c * (m as f64 * s).cos();
            }
            let w = s / t.r_par;
            let direct = if w.abs() < 1.0 {
                let ps = p.psi_deriv(0, w);
                ps * ps / t.r_par
            } else {
                0.0
            };
            assert!(
                (g - direct).abs() < 1e-9 * (1.0 / t.r_par),
                "g2 synthesis at s = {s}: {g} vs {direct}"
            );
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn poisson_identity_holds_at_random_phase_points(
            u in -3.14f64..3.14,
            v in -3.14f64..3.14,
            s in -3.14f64..3.14,
        ) {
            let t = tables();
            let coeffs = t.q_potential_coeffs();
            let scale = 1.0 / (t.r_perp * t.r_perp * t.r_par * t.r_par);
            let pot = t.potential_jet(u, v, s, &coeffs);
            let loc = t.local_jet(u, v, s);
            let resid = pot.laplacian() - loc.get(0, 0, 1);
            proptest::prop_assert!(resid.abs() < 1e-6 * scale);
        }
    }
}
