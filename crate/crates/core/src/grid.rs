//! Structured grids: periodic boxes and Dirichlet slabs.
//!
//! A [`TorusGrid`] is a product of periodic axes, each with its own point
//! count and period; the cubic constructor covers the common isotropic case.
//! A [`SlabGrid`] is a periodic horizontal torus times a non-periodic
//! vertical axis with nodes x_d = j·h, j = 0..n_vertical, including both the
//! wall x_d = 0 and the lid x_d = H. Its [`SlabGrid::doubled_torus`] is the
//! reflection domain used by the half-space solver: vertical period 2H with
//! 2(n_vertical − 1) points, so slab nodes embed exactly into torus nodes.
//!
//! Frequencies follow the Fourier-series convention ξ_k = (2π/L)·k with
//! signed k ∈ [−n/2, n/2]. The Nyquist index is ambiguous in sign; odd
//! multipliers (iξ_j, cross products ξ_jξ_k) treat it as zero so real fields
//! stay conjugate-symmetric, while even ones (ξ_j², |ξ|²) keep it.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusAxis {
    pub n: usize,
    pub period: f64,
}

impl TorusAxis {
    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    axes: Vec<TorusAxis>,
}

impl TorusGrid {
    pub fn new(axes: Vec<TorusAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("torus needs at least one axis".into()));
        }
        for ax in &axes {
            if ax.n < 4 || ax.n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis point count must be even and >= 4, got {}",
                    ax.n
                )));
            }
            if !(ax.period > 0.0) {
                return Err(Error::InvalidGrid(format!("period must be positive, got {}", ax.period)));
            }
        }
        Ok(TorusGrid { axes })
    }

    /// Isotropic box: d axes, n points each (power of two by convention),
    /// side length `period`.
    pub fn cubic(d: usize, n: usize, period: f64) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {d}")));
        }
        if !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("cubic grids use power-of-two n, got {n}")));
        }
        Self::new(vec![TorusAxis { n, period }; d])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, a: usize) -> TorusAxis {
        self.axes[a]
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|ax| ax.n).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|ax| ax.n).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|ax| ax.spacing()).product()
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(|ax| ax.period).product()
    }

    pub fn node(&self, axis: usize, i: usize) -> f64 {
        i as f64 * self.axes[axis].spacing()
    }

    /// Signed frequency index: k for k ≤ n/2, k − n above; Nyquist maps to +n/2.
    pub fn signed_index(&self, axis: usize, k: usize) -> i64 {
        let n = self.axes[axis].n;
        if k <= n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    /// Frequency table with the even (Nyquist-keeping) convention.
    pub fn freqs_even(&self, axis: usize) -> Vec<f64> {
        let ax = self.axes[axis];
        (0..ax.n)
            .map(|k| TAU / ax.period * self.signed_index(axis, k) as f64)
            .collect()
    }

    /// Frequency table with the odd convention: the Nyquist entry is zero.
    pub fn freqs_odd(&self, axis: usize) -> Vec<f64> {
        let ax = self.axes[axis];
        (0..ax.n)
            .map(|k| {
                if k == ax.n / 2 {
                    0.0
                } else {
                    TAU / ax.period * self.signed_index(axis, k) as f64
                }
            })
            .collect()
    }

    /// Grid with each axis padded to ceil(3n/2) points (same periods); used
    /// for dealiased pointwise products.
    pub fn padded_3_2(&self) -> Result<TorusGrid> {
        let axes = self
            .axes
            .iter()
            .map(|ax| {
                let mut n = ax.n * 3 / 2;
                if n % 2 != 0 {
                    n += 1;
                }
                TorusAxis { n, period: ax.period }
            })
            .collect();
        TorusGrid::new(axes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlabGrid {
    pub horizontal: TorusGrid,
    pub n_vertical: usize,
    pub height: f64,
}

impl SlabGrid {
    pub fn new(horizontal: TorusGrid, n_vertical: usize, height: f64) -> Result<Self> {
        if n_vertical < 7 {
            // Fourth-order one-sided second-derivative stencils need 6 nodes.
            return Err(Error::InvalidGrid(format!(
                "slab needs at least 7 vertical nodes, got {n_vertical}"
            )));
        }
        if !(n_vertical - 1).is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_vertical - 1 must be even so the doubled torus has even size, got {n_vertical}"
            )));
        }
        if !(height > 0.0) {
            return Err(Error::InvalidGrid(format!("height must be positive, got {height}")));
        }
        Ok(SlabGrid { horizontal, n_vertical, height })
    }

    /// d = 2 or 3 convenience: (d−1)-dimensional horizontal torus with n
    /// points per axis and period L, plus the vertical axis.
    pub fn isotropic(d: usize, n: usize, period: f64, n_vertical: usize, height: f64) -> Result<Self> {
        if !(2..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {d}")));
        }
        let horizontal = TorusGrid::new(vec![TorusAxis { n, period }; d - 1])?;
        Self::new(horizontal, n_vertical, height)
    }

    pub fn dim(&self) -> usize {
        self.horizontal.dim() + 1
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut s = self.horizontal.shape();
        s.push(self.n_vertical);
        s
    }

    pub fn len(&self) -> usize {
        self.horizontal.len() * self.n_vertical
    }

    pub fn is_empty(&self) -> bool {
        // The constructor enforces at least 7 vertical nodes.
        false
    }

    pub fn dx_vertical(&self) -> f64 {
        self.height / (self.n_vertical - 1) as f64
    }

    pub fn vertical_node(&self, j: usize) -> f64 {
        j as f64 * self.dx_vertical()
    }

    pub fn cell_volume(&self) -> f64 {
        self.horizontal.cell_volume() * self.dx_vertical()
    }

    /// Reflection domain: same horizontal axes, vertical axis periodic with
    /// period 2H and 2(n_vertical − 1) points. Torus node j ≤ n_vertical − 1
    /// is slab node j; node j > n_vertical − 1 sits at x_d = j·h − 2H < 0 and
    /// mirrors slab node 2(n_vertical − 1) − j.
    pub fn doubled_torus(&self) -> TorusGrid {
        let mut axes = Vec::with_capacity(self.dim());
        for a in 0..self.horizontal.dim() {
            axes.push(self.horizontal.axis(a));
        }
        axes.push(TorusAxis {
            n: 2 * (self.n_vertical - 1),
            period: 2.0 * self.height,
        });
        TorusGrid::new(axes).expect("doubled torus dimensions are valid by construction")
    }
}

/// Either grid kind; fields carry this so differential operators can
/// dispatch (spectral everywhere on a torus, finite differences along the
/// slab vertical).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Grid {
    Torus(TorusGrid),
    Slab(SlabGrid),
}

impl Grid {
    pub fn dim(&self) -> usize {
        match self {
            Grid::Torus(g) => g.dim(),
            Grid::Slab(g) => g.dim(),
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        match self {
            Grid::Torus(g) => g.shape(),
            Grid::Slab(g) => g.shape(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Torus(g) => g.len(),
            Grid::Slab(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        match self {
            Grid::Torus(g) => g.cell_volume(),
            Grid::Slab(g) => g.cell_volume(),
        }
    }

    pub fn as_torus(&self) -> Result<&TorusGrid> {
        match self {
            Grid::Torus(g) => Ok(g),
            Grid::Slab(_) => Err(Error::GridMismatch("expected a torus grid, got a slab".into())),
        }
    }

    pub fn as_slab(&self) -> Result<&SlabGrid> {
        match self {
            Grid::Slab(g) => Ok(g),
            Grid::Torus(_) => Err(Error::GridMismatch("expected a slab grid, got a torus".into())),
        }
    }
}

impl From<TorusGrid> for Grid {
    fn from(g: TorusGrid) -> Self {
        Grid::Torus(g)
    }
}

impl From<SlabGrid> for Grid {
    fn from(g: SlabGrid) -> Self {
        Grid::Slab(g)
    }
}
