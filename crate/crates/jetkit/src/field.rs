//! Grid-sampled fields on the periodic box `[0, 2π)³`.
//!
//! A [`TorusField`] stores one flat component axis in front of the three
//! spatial axes (`[comp, x, y, z]`): scalars have 1 component, vectors 3,
//! rank-2 tensors 9 in row-major order (`T_{ij}` at component `3 i + j`).
//! All integrals use the full box measure, so `‖1‖_{L²} = (2π)^{3/2}`.

use crate::grid::TorusGrid;
use crate::{JetkitError, Result};
use ndarray::{Array3, Array4, ArrayView3, ArrayViewMut3, Axis};
use num_complex::Complex64;

/// Number of components carried by a field of the given tensor rank.
pub fn ncomp(rank: usize) -> usize {
    match rank {
        0 => 1,
        1 => 3,
        2 => 9,
        r => panic!("unsupported tensor rank {r}"),
    }
}

/// Flat component index of the `(i, j)` entry of a rank-2 tensor.
#[inline]
pub fn tidx(i: usize, j: usize) -> usize {
    3 * i + j
}

#[derive(Debug, Clone)]
pub struct TorusField {
    pub grid: TorusGrid,
    pub rank: usize,
    pub data: Array4<f64>,
}

impl TorusField {
    pub fn zeros(grid: &TorusGrid, rank: usize) -> Self {
        let n = grid.n;
        TorusField {
            grid: grid.clone(),
            rank,
            data: Array4::zeros((ncomp(rank), n, n, n)),
        }
    }

    /// Sample a function of the spatial point into a new field.
    /// The closure fills one value per component.
    pub fn from_fn<F>(grid: &TorusGrid, rank: usize, mut f: F) -> Self
    where
        F: FnMut(f64, f64, f64, usize) -> f64,
    {
        let mut out = Self::zeros(grid, rank);
        let n = grid.n;
        for c in 0..ncomp(rank) {
            for i in 0..n {
                let x = grid.coord(i);
                for j in 0..n {
                    let y = grid.coord(j);
                    for k in 0..n {
                        let z = grid.coord(k);
                        out.data[[c, i, j, k]] = f(x, y, z, c);
                    }
                }
            }
        }
        out
    }

    pub fn scalar_from_fn<F: FnMut(f64, f64, f64) -> f64>(grid: &TorusGrid, mut f: F) -> Self {
        Self::from_fn(grid, 0, |x, y, z, _| f(x, y, z))
    }

    pub fn vector_from_fn<F: FnMut(f64, f64, f64) -> [f64; 3]>(
        grid: &TorusGrid,
        mut f: F,
    ) -> Self {
        let mut cache = [0.0; 3];
        let mut last = (f64::NAN, f64::NAN, f64::NAN);
        Self::from_fn(grid, 1, move |x, y, z, c| {
            if (x, y, z) != last {
                cache = f(x, y, z);
                last = (x, y, z);
            }
            cache[c]
        })
    }

    pub fn ncomp(&self) -> usize {
        ncomp(self.rank)
    }

    pub fn comp(&self, c: usize) -> ArrayView3<'_, f64> {
        self.data.index_axis(Axis(0), c)
    }

    pub fn comp_mut(&mut self, c: usize) -> ArrayViewMut3<'_, f64> {
        self.data.index_axis_mut(Axis(0), c)
    }

    pub fn assert_compatible(&self, other: &Self) -> Result<()> {
        self.grid.assert_same_space(&other.grid)?;
        if self.rank != other.rank {
            return Err(JetkitError::Shape(format!(
                "rank mismatch: {} vs {}",
                self.rank, other.rank
            )));
        }
        Ok(())
    }

    // ---- linear ops ----

    pub fn scale(&mut self, s: f64) {
        self.data.mapv_inplace(|v| v * s);
    }

    pub fn axpy(&mut self, a: f64, other: &Self) -> Result<()> {
        self.assert_compatible(other)?;
        self.data.zip_mut_with(&other.data, |u, &v| *u += a * v);
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    // ---- pointwise algebra ----

    /// Pointwise inner product of two fields of equal rank (scalar output).
    pub fn dot(&self, other: &Self) -> Result<TorusField> {
        self.assert_compatible(other)?;
        let mut out = TorusField::zeros(&self.grid, 0);
        {
            let mut acc = out.comp_mut(0);
            for c in 0..self.ncomp() {
                let a = self.comp(c);
                let b = other.comp(c);
                ndarray::Zip::from(&mut acc).and(&a).and(&b).for_each(|o, &u, &v| *o += u * v);
            }
        }
        Ok(out)
    }

    /// Pointwise squared magnitude summed over components (scalar output).
    pub fn magnitude_squared(&self) -> TorusField {
        let mut out = TorusField::zeros(&self.grid, 0);
        let mut acc = out.comp_mut(0);
        for c in 0..self.ncomp() {
            let a = self.comp(c);
            ndarray::Zip::from(&mut acc).and(&a).for_each(|o, &u| *o += u * u);
        }
        drop(acc);
        out
    }

    /// Multiply every component by a scalar field.
    pub fn mul_scalar_field(&self, s: &TorusField) -> Result<Self> {
        self.grid.assert_same_space(&s.grid)?;
        if s.rank != 0 {
            return Err(JetkitError::Shape("expected scalar multiplier".into()));
        }
        let mut out = self.clone();
        let sv = s.comp(0);
        for c in 0..out.ncomp() {
            out.comp_mut(c).zip_mut_with(&sv, |u, &w| *u *= w);
        }
        Ok(out)
    }

    /// Outer product of two vector fields: `(v ⊗ w)_{ij} = v_i w_j`.
    pub fn outer(v: &Self, w: &Self) -> Result<Self> {
        v.grid.assert_same_space(&w.grid)?;
        if v.rank != 1 || w.rank != 1 {
            return Err(JetkitError::Shape("outer product needs two vectors".into()));
        }
        let mut out = TorusField::zeros(&v.grid, 2);
        for i in 0..3 {
            for j in 0..3 {
                let vi = v.comp(i);
                let wj = w.comp(j);
                let mut o = out.comp_mut(tidx(i, j));
                ndarray::Zip::from(&mut o).and(&vi).and(&wj).for_each(|t, &a, &b| *t = a * b);
            }
        }
        Ok(out)
    }

    /// Tensor–vector contraction over the second index: `(T v)_i = T_{ij} v_j`.
    pub fn matvec(t: &Self, v: &Self) -> Result<Self> {
        t.grid.assert_same_space(&v.grid)?;
        if t.rank != 2 || v.rank != 1 {
            return Err(JetkitError::Shape("matvec needs tensor and vector".into()));
        }
        let mut out = TorusField::zeros(&v.grid, 1);
        for i in 0..3 {
            let mut o = out.comp_mut(i);
            for j in 0..3 {
                let tij = t.comp(tidx(i, j));
                let vj = v.comp(j);
                ndarray::Zip::from(&mut o).and(&tij).and(&vj).for_each(|u, &a, &b| *u += a * b);
            }
        }
        Ok(out)
    }

    /// Pointwise trace of a rank-2 field (scalar output).
    pub fn trace(&self) -> Result<Self> {
        if self.rank != 2 {
            return Err(JetkitError::Shape("trace needs a rank-2 field".into()));
        }
        let mut out = TorusField::zeros(&self.grid, 0);
        let mut acc = out.comp_mut(0);
        for i in 0..3 {
            let d = self.comp(tidx(i, i));
            ndarray::Zip::from(&mut acc).and(&d).for_each(|o, &u| *o += u);
        }
        drop(acc);
        Ok(out)
    }

    /// Symmetric trace-free part: `(T + Tᵀ)/2 − (tr T / 3) Id`.
    pub fn sym_tracefree(&self) -> Result<Self> {
        if self.rank != 2 {
            return Err(JetkitError::Shape("sym_tracefree needs a rank-2 field".into()));
        }
        let mut out = TorusField::zeros(&self.grid, 2);
        let tr = self.trace()?;
        for i in 0..3 {
            for j in 0..3 {
                let a = self.comp(tidx(i, j));
                let b = self.comp(tidx(j, i));
                let mut o = out.comp_mut(tidx(i, j));
                ndarray::Zip::from(&mut o).and(&a).and(&b).for_each(|t, &u, &v| *t = 0.5 * (u + v));
                if i == j {
                    let trv = tr.comp(0);
                    ndarray::Zip::from(&mut o).and(&trv).for_each(|t, &u| *t -= u / 3.0);
                }
            }
        }
        Ok(out)
    }

    /// Pointwise Frobenius norm of a rank-2 field (scalar output).
    pub fn frobenius(&self) -> Result<Self> {
        if self.rank != 2 {
            return Err(JetkitError::Shape("frobenius needs a rank-2 field".into()));
        }
        let mut out = self.magnitude_squared();
        out.comp_mut(0).mapv_inplace(f64::sqrt);
        Ok(out)
    }

    // ---- integrals ----

    /// Mean of one component over the box.
    pub fn mean(&self, c: usize) -> f64 {
        self.comp(c).mean().unwrap()
    }

    /// `∫ f_c dx` over the box (mean × (2π)³).
    pub fn integral(&self, c: usize) -> f64 {
        self.mean(c) * self.grid.volume()
    }

    /// Squared L² norm over all components: `Σ_c ∫ f_c²`.
    pub fn l2_norm_squared(&self) -> f64 {
        let mut acc = 0.0;
        for c in 0..self.ncomp() {
            let v = self.comp(c);
            acc += v.iter().map(|u| u * u).sum::<f64>();
        }
        acc * self.grid.volume() / (self.grid.len() as f64)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_squared().sqrt()
    }

    /// Sup over grid points of the pointwise Euclidean magnitude.
    pub fn sup_norm(&self) -> f64 {
        let n = self.grid.n;
        let mut best = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut m = 0.0;
                    for c in 0..self.ncomp() {
                        let v = self.data[[c, i, j, k]];
                        m += v * v;
                    }
                    best = best.max(m);
                }
            }
        }
        best.sqrt()
    }

    /// Remove the component means (grid projection onto mean-zero fields).
    pub fn remove_mean(&mut self) {
        for c in 0..self.ncomp() {
            let m = self.mean(c);
            self.comp_mut(c).mapv_inplace(|v| v - m);
        }
    }

    // ---- spectral round trip ----

    /// Fourier coefficients of one component (signed frequency layout).
    pub fn to_spectral(&self, c: usize) -> Array3<Complex64> {
        let mut buf = self.comp(c).mapv(|v| Complex64::new(v, 0.0));
        crate::fft::to_spectral_3d(&mut buf);
        buf
    }

    /// Overwrite one component from Fourier coefficients.
    pub fn set_from_spectral(&mut self, c: usize, coeffs: &Array3<Complex64>) {
        let mut buf = coeffs.clone();
        crate::fft::from_spectral_3d(&mut buf);
        let mut tgt = self.comp_mut(c);
        ndarray::Zip::from(&mut tgt).and(&buf).for_each(|t, z| *t = z.re);
    }
}
