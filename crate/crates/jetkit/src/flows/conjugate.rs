//! Flow-conjugated differential and nonlocal operators.
//!
//! For a volume-preserving warp `phi`, the conjugated operator is
//! `op^phi f = [op(f o phi^{-1})] o phi`: pull the field back along the
//! inverse map, apply the plain spectral operator, and push the result
//! forward again.  Both compositions go through the truncated-Fourier
//! evaluation of [`crate::flows::compose`], so the only approximation is
//! the spectral truncation of the intermediate fields — there is no
//! interpolation stencil, and the identity flow degenerates to the plain
//! operator through the very same code path.

use crate::field::TorusField;
use crate::flows::compose::compose_at_points;
use crate::flows::flowmap::FlowMap;
use crate::spectral;
use crate::{JetkitError, Result};

/// Operators available in flow-conjugated form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjOp {
    Div,
    Grad,
    Curl,
    Laplacian,
    LerayP,
    LerayQ,
    Antidivergence,
}

impl ConjOp {
    pub fn label(&self) -> &'static str {
        match self {
            ConjOp::Div => "div",
            ConjOp::Grad => "grad",
            ConjOp::Curl => "curl",
            ConjOp::Laplacian => "laplacian",
            ConjOp::LerayP => "leray_P",
            ConjOp::LerayQ => "leray_Q",
            ConjOp::Antidivergence => "antidivergence",
        }
    }

    fn apply_plain(&self, f: &TorusField) -> Result<TorusField> {
        match self {
            ConjOp::Div => spectral::divergence(f),
            ConjOp::Grad => spectral::gradient(f),
            ConjOp::Curl => spectral::curl(f),
            ConjOp::Laplacian => Ok(spectral::laplacian(f)),
            ConjOp::LerayP => spectral::leray(f),
            ConjOp::LerayQ => spectral::gradient_part(f),
            ConjOp::Antidivergence => spectral::antidivergence(f),
        }
    }
}

/// Pull a field back along the inverse warp: `f o phi^{-1}` on the grid.
pub fn pullback(f: &TorusField, flow: &FlowMap, idx: usize, rel_cutoff: f64) -> Result<TorusField> {
    let pts = flow.inverse_positions(idx)?;
    compose_at_points(f, &pts, &flow.grid, rel_cutoff)
}

/// Push a field forward along the warp: `f o phi` on the grid.
pub fn pushforward(
    f: &TorusField,
    flow: &FlowMap,
    idx: usize,
    rel_cutoff: f64,
) -> Result<TorusField> {
    let pts = flow.positions(idx)?;
    compose_at_points(f, &pts, &flow.grid, rel_cutoff)
}

/// `op^phi f = [op(f o phi^{-1})] o phi` at output index `idx`.
pub fn conjugate_apply(
    op: ConjOp,
    f: &TorusField,
    flow: &FlowMap,
    idx: usize,
    rel_cutoff: f64,
) -> Result<TorusField> {
    if f.grid.n != flow.grid.n {
        return Err(JetkitError::Grid(format!(
            "field on a {}^3 grid conjugated by a flow on {}^3",
            f.grid.n, flow.grid.n
        )));
    }
    let pulled = pullback(f, flow, idx, rel_cutoff)?;
    let acted = op.apply_plain(&pulled)?;
    pushforward(&acted, flow, idx, rel_cutoff)
}
