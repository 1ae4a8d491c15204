//! Pseudo-spectral solvers for the Stokes resolvent problem
//!
//! ```text
//! -Δu + ∇p + λu = F + div(f),   div(u) = g,
//! ```
//!
//! with λ in a sector Σ_θ of the cut complex plane, on three discrete
//! domain surrogates:
//!
//! * a periodic box (whole-space surrogate), solved exactly mode by mode;
//! * a slab [0,H] with a Dirichlet wall at x_d = 0 (half-space surrogate),
//!   solved by reflection onto a doubled torus plus an explicit boundary
//!   corrector;
//! * the region above a small-Lipschitz graph x_d = ψ(x'), flattened to the
//!   slab and solved by a contractive remainder iteration.
//!
//! The [`harness`] module drives sector sweeps, duality and semigroup checks,
//! and writes deterministic CSV/JSON reports; the companion CLI crate exposes
//! it as subcommands.
//!
//! Fields are immutable after construction: every operation returns new
//! fields. All data paths are band-limited (|ξ|_∞ ≤ n/4 by default), so the
//! discrete solvers operate in their exactness class and residuals are
//! checked near machine precision rather than at a discretization-error
//! scale.

// Validation guards are written `!(x > 0.0)` on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Numeric kernels index several arrays by one loop variable; zips would
// obscure the stencils.
#![allow(clippy::needless_range_loop)]

pub mod cmath;
pub mod deriv;
pub mod dump;
pub mod error;
pub mod fft;
pub mod field;
pub mod graph;
pub mod grid;
pub mod halfspace;
pub mod harness;
pub mod norms;
pub mod sector;
pub mod wholespace;

pub use error::{Error, Result};
pub use field::{RhsTriple, ScalarField, TensorField, VectorField};
pub use grid::{Grid, SlabGrid, TorusGrid};
pub use sector::{principal_sqrt, ResolventParam, Sector};

/// Complex double, the scalar type of every field in the crate.
pub type Complex64 = num_complex::Complex64;
