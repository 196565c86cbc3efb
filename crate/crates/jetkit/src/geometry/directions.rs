//! The canonical direction set: fifteen unit vectors with orthonormal
//! companion frames, all with entries in `(1/3)Z`, plus phase shifts on a
//! common rational sub-lattice of the torus.
//!
//! Everything here is exact integer data.  Each direction is stored as
//! `3*xi`, `3*a`, `3*b` (integer vectors of squared length 9), so that
//! orthonormality and the right-handedness identity `(3xi) x (3a) = 3*(3b)`
//! can be verified in integer arithmetic.  The shifts are multiples of
//! `2*pi/720`, which makes pairwise tube separation a statement about
//! integers as well; [`DirectionSet::disjointness_certificate`] evaluates it
//! without floating-point geometry.

use serde::{Deserialize, Serialize};

use crate::{JetkitError, Result, TAU};

/// One direction with its orthonormal companion frame and phase shift.
///
/// The unit vectors are `xi = xi3/3`, `a = a3/3`, `b = b3/3`; the shift is
/// `alpha = 2*pi*shift_num/shift_denom` (the denominator lives on the parent
/// [`DirectionSet`]).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub xi3: [i64; 3],
    pub a3: [i64; 3],
    pub b3: [i64; 3],
    pub shift_num: [i64; 3],
}

impl Frame {
    pub fn xi(&self) -> [f64; 3] {
        third(self.xi3)
    }
    pub fn a(&self) -> [f64; 3] {
        third(self.a3)
    }
    pub fn b(&self) -> [f64; 3] {
        third(self.b3)
    }
}

fn third(v: [i64; 3]) -> [f64; 3] {
    [v[0] as f64 / 3.0, v[1] as f64 / 3.0, v[2] as f64 / 3.0]
}

fn idot(x: [i64; 3], y: [i64; 3]) -> i64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

fn icross(x: [i64; 3], y: [i64; 3]) -> [i64; 3] {
    [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ]
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Raw table: (3xi, 3a, 3b, shift numerators).  Twelve members of the
/// (1,2,2)/3 family plus the three coordinate axes.
const FRAME_TABLE: [([i64; 3], [i64; 3], [i64; 3], [i64; 3]); 15] = [
    ([1, 2, 2], [-2, -1, 2], [2, -2, 1], [95, 233, 171]),
    ([1, 2, -2], [-2, -1, -2], [-2, 2, 1], [66, 3, 101]),
    ([1, -2, 2], [-2, -2, -1], [2, -1, -2], [13, 20, 349]),
    ([1, -2, -2], [-2, -2, 1], [-2, 1, -2], [33, 179, 148]),
    ([2, 1, 2], [-2, 2, 1], [-1, -2, 2], [106, 47, 35]),
    ([2, 1, -2], [-2, 2, -1], [1, 2, 2], [179, 113, 251]),
    ([2, -1, 2], [-2, -2, 1], [1, -2, -2], [41, 30, 138]),
    ([2, -1, -2], [-2, -2, -1], [-1, 2, -2], [23, 104, 367]),
    ([2, 2, 1], [-2, 1, 2], [1, -2, 2], [80, 478, 115]),
    ([2, 2, -1], [-2, 1, -2], [-1, 2, 2], [107, 616, 96]),
    ([2, -2, 1], [-2, -1, 2], [-1, -2, -2], [254, 39, 62]),
    ([2, -2, -1], [-2, -1, -2], [1, 2, -2], [175, 89, 10]),
    ([3, 0, 0], [0, 3, 0], [0, 0, 3], [677, 109, 188]),
    ([0, 3, 0], [0, 0, 3], [3, 0, 0], [24, 707, 228]),
    ([0, 0, 3], [3, 0, 0], [0, 3, 0], [96, 146, 222]),
];

/// Result of the exact pairwise tube-separation analysis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DisjointnessCertificate {
    /// Worst-pair separation margin, in cycles of the common phase
    /// functional (i.e. `dist(., Z)` divided by the kernel weight).
    pub score_cycles: f64,
    /// Largest transverse tube radius for which all pairs stay disjoint.
    pub max_r_perp: f64,
    /// Indices of the pair achieving the minimum.
    pub worst_pair: (usize, usize),
}

/// The fifteen-direction set with its frame multiplicity and shift lattice.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionSet {
    pub frames: Vec<Frame>,
    /// Frame multiplicity: jet phases carry a factor `n_star * kappa`.
    pub n_star: u32,
    /// Shifts are `2*pi*shift_num/shift_denom`.
    pub shift_denom: i64,
}

impl DirectionSet {
    /// The canonical embedded set.  Panics never: the table is validated at
    /// construction and is covered by exact integer tests.
    pub fn canonical() -> Self {
        let frames = FRAME_TABLE
            .iter()
            .map(|&(xi3, a3, b3, shift_num)| Frame {
                xi3,
                a3,
                b3,
                shift_num,
            })
            .collect();
        let set = DirectionSet {
            frames,
            n_star: 3,
            shift_denom: 720,
        };
        set.validate()
            .expect("embedded direction table failed validation");
        set
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Shift vector `alpha` for direction `i`.
    pub fn shift(&self, i: usize) -> [f64; 3] {
        let s = self.frames[i].shift_num;
        let d = self.shift_denom as f64;
        [
            TAU * s[0] as f64 / d,
            TAU * s[1] as f64 / d,
            TAU * s[2] as f64 / d,
        ]
    }

    /// Exact structural validation: unit lengths, orthogonality,
    /// right-handedness, and shift-range checks, all in integer arithmetic.
    pub fn validate(&self) -> Result<()> {
        if self.shift_denom <= 0 {
            return Err(JetkitError::Geometry("shift_denom must be positive".into()));
        }
        for (i, f) in self.frames.iter().enumerate() {
            for (name, v) in [("xi", f.xi3), ("a", f.a3), ("b", f.b3)] {
                if idot(v, v) != 9 {
                    return Err(JetkitError::Geometry(format!(
                        "frame {i}: 3*{name} must have squared length 9, got {}",
                        idot(v, v)
                    )));
                }
            }
            if idot(f.xi3, f.a3) != 0 || idot(f.xi3, f.b3) != 0 || idot(f.a3, f.b3) != 0 {
                return Err(JetkitError::Geometry(format!(
                    "frame {i} is not orthogonal"
                )));
            }
            let c = icross(f.xi3, f.a3);
            if c != [3 * f.b3[0], 3 * f.b3[1], 3 * f.b3[2]] {
                return Err(JetkitError::Geometry(format!(
                    "frame {i} is not right-handed: (3xi)x(3a) != 3*(3b)"
                )));
            }
            if f.shift_num.iter().any(|&s| s < 0 || s >= self.shift_denom) {
                return Err(JetkitError::Geometry(format!(
                    "frame {i}: shift numerators must lie in [0, {})",
                    self.shift_denom
                )));
            }
        }
        Ok(())
    }

    /// Exact pairwise tube-separation certificate for phase multiplier
    /// `kappa` (a positive integer: the jet phases are `n_star*kappa`-fold).
    ///
    /// For directions `i != j`, the supports of the transverse profiles are
    /// tubes `dist((n_star*kappa*(x - alpha) . (a, b)), 2*pi*Z^2) <= r_perp`.
    /// The image of `x -> n_star*kappa*(x.a_i, x.b_i, x.a_j, x.b_j)` together
    /// with the `2*pi*Z^4` periodicity is constrained by the primitive
    /// integer kernel `u` of the stacked frame matrix: `u . w` is constant
    /// modulo `2*pi` on the reachable set.  If that constant sits farther
    /// from `2*pi*Z` than `r_perp * (|u_12| + |u_34|)`, the tubes cannot
    /// meet.  All quantities reduce to integers over `3 * shift_denom`.
    pub fn disjointness_certificate(&self, kappa: u64) -> Result<DisjointnessCertificate> {
        if kappa == 0 {
            return Err(JetkitError::Geometry("kappa must be a positive integer".into()));
        }
        let mut best = f64::INFINITY;
        let mut worst_pair = (0usize, 0usize);
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                let score = self.pair_margin_cycles(i, j, kappa)?;
                if score < best {
                    best = score;
                    worst_pair = (i, j);
                }
            }
        }
        Ok(DisjointnessCertificate {
            score_cycles: best,
            max_r_perp: TAU * best,
            worst_pair,
        })
    }

    /// Separation margin for one pair, in cycles per unit kernel weight.
    fn pair_margin_cycles(&self, i: usize, j: usize, kappa: u64) -> Result<f64> {
        let (fi, fj) = (&self.frames[i], &self.frames[j]);
        // Stacked 4x3 integer matrix M with rows 3a_i, 3b_i, 3a_j, 3b_j.
        let rows = [fi.a3, fi.b3, fj.a3, fj.b3];
        // Primitive kernel of M^T via signed 3x3 minors (cofactors of the
        // 4x4 matrix [M | *] along the artificial column).
        let mut u = [0i64; 4];
        for k in 0..4 {
            let sub: Vec<[i64; 3]> = (0..4).filter(|&r| r != k).map(|r| rows[r]).collect();
            let det = sub[0][0] * (sub[1][1] * sub[2][2] - sub[1][2] * sub[2][1])
                - sub[0][1] * (sub[1][0] * sub[2][2] - sub[1][2] * sub[2][0])
                + sub[0][2] * (sub[1][0] * sub[2][1] - sub[1][1] * sub[2][0]);
            u[k] = if k % 2 == 0 { det } else { -det };
        }
        if u == [0; 4] {
            return Err(JetkitError::Geometry(format!(
                "directions {i}, {j}: stacked frame matrix is rank-deficient"
            )));
        }
        let g = u.iter().fold(0, |acc, &v| gcd(acc, v));
        for v in &mut u {
            *v /= g;
        }
        // w_i = u1*(3a_i) + u2*(3b_i), w_j = u3*(3a_j) + u4*(3b_j).
        let wi: [i64; 3] = std::array::from_fn(|c| u[0] * fi.a3[c] + u[1] * fi.b3[c]);
        let wj: [i64; 3] = std::array::from_fn(|c| u[2] * fj.a3[c] + u[3] * fj.b3[c]);
        // Phase offset of the invariant functional, in cycles:
        // (n_star*kappa/3) * (s_i.w_i + s_j.w_j) / shift_denom, and
        // n_star = 3 keeps this an integer over shift_denom.
        let num = (self.n_star as i64)
            * (kappa as i64)
            * (idot(fi.shift_num, wi) + idot(fj.shift_num, wj));
        let den = 3 * self.shift_denom;
        let frac = (num.rem_euclid(den)) as f64 / den as f64;
        let dist_cycles = frac.min(1.0 - frac);
        let weight = norm2(u[0], u[1]) + norm2(u[2], u[3]);
        Ok(dist_cycles / weight)
    }

    /// Error out (naming the offending pair) if tubes of radius `r_perp`
    /// are not certifiably disjoint at phase multiplier `kappa`.
    pub fn check_tube_radius(&self, r_perp: f64, kappa: u64) -> Result<()> {
        let cert = self.disjointness_certificate(kappa)?;
        if r_perp >= cert.max_r_perp {
            return Err(JetkitError::ShiftCollision {
                first: cert.worst_pair.0,
                second: cert.worst_pair.1,
                separation: cert.max_r_perp,
                required: r_perp,
            });
        }
        Ok(())
    }
}

fn norm2(x: i64, y: i64) -> f64 {
    ((x * x + y * y) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn canonical_set_is_exactly_orthonormal() {
        let set = DirectionSet::canonical();
        assert_eq!(set.len(), 15);
        set.validate().unwrap();
        // f64 cross-check of the unit frame.
        for f in &set.frames {
            let (xi, a, b) = (f.xi(), f.a(), f.b());
            for v in [xi, a, b] {
                let n: f64 = v.iter().map(|x| x * x).sum();
                assert_abs_diff_eq!(n, 1.0, epsilon = 1e-15);
            }
            let d: f64 = xi.iter().zip(a.iter()).map(|(x, y)| x * y).sum();
            assert_abs_diff_eq!(d, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn direction_second_moments_sum_to_five_identity() {
        let set = DirectionSet::canonical();
        let mut m = [[0.0f64; 3]; 3];
        for f in &set.frames {
            let xi = f.xi();
            for r in 0..3 {
                for c in 0..3 {
                    m[r][c] += xi[r] * xi[c];
                }
            }
        }
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 5.0 } else { 0.0 };
                assert_abs_diff_eq!(m[r][c], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn disjointness_certificate_matches_frozen_values() {
        let set = DirectionSet::canonical();
        let c1 = set.disjointness_certificate(1).unwrap();
        assert_abs_diff_eq!(c1.score_cycles, 0.017685, epsilon = 2e-6);
        assert_abs_diff_eq!(c1.max_r_perp, 0.11112, epsilon = 2e-5);
        let c2 = set.disjointness_certificate(2).unwrap();
        assert_abs_diff_eq!(c2.score_cycles, 0.017572, epsilon = 2e-6);
        assert_abs_diff_eq!(c2.max_r_perp, 0.11041, epsilon = 2e-5);
        // At triple phase multiplicity two shifted tubes meet exactly; the
        // certificate must report a zero margin rather than a false pass.
        let c3 = set.disjointness_certificate(3).unwrap();
        assert!(c3.score_cycles < 1e-12);
    }

    #[test]
    fn tube_radius_checks_split_at_certified_bound() {
        let set = DirectionSet::canonical();
        set.check_tube_radius(1.0 / 16.0, 1).unwrap();
        set.check_tube_radius(1.0 / 32.0, 1).unwrap();
        let err = set.check_tube_radius(1.0 / 8.0, 1).unwrap_err();
        match err {
            JetkitError::ShiftCollision { .. } => {}
            other => panic!("expected ShiftCollision, got {other}"),
        }
    }

    #[test]
    fn golden_file_matches_embedded_table() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/golden/direction_set.json");
        let text = std::fs::read_to_string(path).unwrap();
        let golden: DirectionSet = serde_json::from_str(&text).unwrap();
        let set = DirectionSet::canonical();
        assert_eq!(golden.n_star, set.n_star);
        assert_eq!(golden.shift_denom, set.shift_denom);
        assert_eq!(golden.frames, set.frames);
    }
}
