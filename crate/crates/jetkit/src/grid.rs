//! Collocation grid on the periodic box `[0, 2π)^3` plus an optional uniform
//! time grid.

use crate::{JetkitError, Result, TAU};
use serde::{Deserialize, Serialize};

/// Uniform time grid `t_j = t0 + j·dt`, `j = 0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, len: usize) -> Result<Self> {
        if !(dt > 0.0) || len < 1 {
            return Err(JetkitError::Grid(format!(
                "time grid needs dt > 0 and len >= 1, got dt = {dt}, len = {len}"
            )));
        }
        Ok(TimeGrid { t0, dt, len })
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + self.dt * j as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |j| self.time(j))
    }

    /// Index of the last grid time `<= t` (within 1e-12 slack).
    pub fn floor_index(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt + 1e-12;
        if x < 0.0 {
            None
        } else {
            Some((x.floor() as usize).min(self.len - 1))
        }
    }
}

/// Spatial collocation grid: `N` points per axis, spacing `2π/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n: usize,
    /// Optional uniform time grid for trajectory data attached to this grid.
    pub time: Option<TimeGrid>,
}

impl TorusGrid {
    /// A spatial grid with `n` even and at least 8.
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(JetkitError::Grid(format!(
                "grid size must be even and >= 8, got {n}"
            )));
        }
        Ok(TorusGrid { n, time: None })
    }

    pub fn with_time(mut self, time: TimeGrid) -> Self {
        self.time = Some(time);
        self
    }

    /// Grid spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Coordinate of index `i` along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    /// Signed integer frequency for FFT bin `i` (standard layout;
    /// `i <= N/2 ↦ i`, else `i − N`). The Nyquist bin maps to `+N/2`.
    pub fn freq(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Largest resolvable |k| per axis (`N/2`).
    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Total number of spatial points.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Lebesgue volume of the periodic box, `(2π)^3`.
    pub fn volume(&self) -> f64 {
        TAU * TAU * TAU
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Check two grids match spatially.
    pub fn assert_same_space(&self, other: &TorusGrid) -> Result<()> {
        if self.n != other.n {
            return Err(JetkitError::Shape(format!(
                "grid sizes differ: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_tiny() {
        assert!(TorusGrid::new(7).is_err());
        assert!(TorusGrid::new(6).is_err());
        assert!(TorusGrid::new(8).is_ok());
    }

    #[test]
    fn freq_layout_round_trips() {
        let g = TorusGrid::new(8).unwrap();
        let freqs: Vec<i64> = (0..8).map(|i| g.freq(i)).collect();
        assert_eq!(freqs, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn time_floor_index() {
        let tg = TimeGrid::new(0.0, 0.5, 5).unwrap();
        assert_eq!(tg.floor_index(0.9), Some(1));
        assert_eq!(tg.floor_index(-0.1), None);
        assert_eq!(tg.floor_index(100.0), Some(4));
    }
}
