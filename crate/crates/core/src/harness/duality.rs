//! Weak-form duality check for the periodic resolvent solve.
//!
//! For force data F the solution u is divergence free, so testing the dual
//! problem λw − Δw + ∇π = ū (with the plain, unconjugated pairing) against u
//! kills the pressure and leaves
//!
//! ```text
//! λ⟨w, u⟩ + ⟨∇w, ∇u⟩ = ⟨ū, u⟩ = ‖u‖₂².
//! ```
//!
//! On the torus both sides are exact integrals of trigonometric polynomials,
//! so for band-limited data the identity holds to rounding error. It is an
//! end-to-end check that the solver really inverts the weak formulation: the
//! two solves enter through independent data, and any asymmetry in the
//! multiplier, projection, or normalization shows up as a gap.

use crate::deriv;
use crate::error::Result;
use crate::field::{RhsTriple, VectorField};
use crate::grid::TorusGrid;
use crate::harness::data;
use crate::norms::{lq_norm_vec, pair_bilinear};
use crate::sector::ResolventParam;
use crate::wholespace::solve_whole_space;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct DualityReport {
    /// λ⟨w, u⟩ + ⟨∇w, ∇u⟩.
    pub paired: Complex64,
    /// ‖u‖₂².
    pub energy: f64,
    /// |paired − energy| / energy.
    pub rel_gap: f64,
}

fn conjugate(v: &VectorField) -> Result<VectorField> {
    VectorField::from_components(
        v.components()
            .iter()
            .map(|c| c.map(|z| z.conj()))
            .map(Ok)
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Gradient of one velocity component as a vector field, for pairing.
fn component_gradients(v: &VectorField) -> Result<Vec<VectorField>> {
    v.components().iter().map(deriv::gradient).collect()
}

pub fn duality_check(grid: &TorusGrid, seed: u64, lambda: Complex64) -> Result<DualityReport> {
    let param = ResolventParam::new(lambda)?;

    let force = data::band_limited_vector(grid, seed, grid.axis(0).n / 4)?;
    let u = solve_whole_space(&RhsTriple::from_force(force), &param)?.u;

    let dual_data = conjugate(&u)?;
    let w = solve_whole_space(&RhsTriple::from_force(dual_data), &param)?.u;

    let mut paired = lambda * pair_bilinear(&w, &u)?;
    let grads_w = component_gradients(&w)?;
    let grads_u = component_gradients(&u)?;
    for (gw, gu) in grads_w.iter().zip(&grads_u) {
        paired += pair_bilinear(gw, gu)?;
    }

    let energy = lq_norm_vec(&u, 2.0)?.powi(2);
    let rel_gap = (paired - energy).norm() / energy.max(1e-300);
    Ok(DualityReport { paired, energy, rel_gap })
}
