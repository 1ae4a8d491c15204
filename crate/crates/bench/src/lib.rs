//! Shared setup for the solver benchmarks; see `benches/resolvent.rs`.

use stokes_core::field::RhsTriple;
use stokes_core::harness::data;
use stokes_core::{Complex64, ScalarField, SlabGrid, TorusGrid, VectorField};

pub fn torus_problem(d: usize, n: usize) -> (TorusGrid, RhsTriple) {
    let grid = TorusGrid::cubic(d, n, std::f64::consts::TAU).expect("valid benchmark grid");
    let rhs = data::band_limited_rhs(&grid, 1, true, true, true).expect("benchmark data");
    (grid, rhs)
}

pub fn slab_problem(d: usize, n: usize, n_vertical: usize) -> (SlabGrid, RhsTriple) {
    let slab = SlabGrid::isotropic(d, n, std::f64::consts::TAU, n_vertical, 8.0)
        .expect("valid benchmark slab");
    let rhs = data::parity_rhs_on_slab(&slab, 1, true, true, true).expect("benchmark data");
    (slab, rhs)
}

pub fn iteration_state(slab: &SlabGrid) -> (VectorField, ScalarField) {
    data::trace_zero_state(slab, 2).expect("benchmark state")
}

pub fn unit_lambda() -> Complex64 {
    Complex64::new(1.0, 0.5)
}
