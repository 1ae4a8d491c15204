//! Complex-valued fields on structured grids.
//!
//! All three field ranks store one `ArrayD<Complex64>` per component with
//! shape equal to the grid shape (slab fields keep the vertical axis last).
//! Fields are immutable after construction: arithmetic returns new fields.
//! Binary operations insist on identical grids.

use crate::error::{Error, Result};
use crate::grid::Grid;
use ndarray::{ArrayD, Dimension};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: ArrayD<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: impl Into<Grid>) -> Self {
        let grid = grid.into();
        let data = ArrayD::from_elem(grid.shape(), Complex64::new(0.0, 0.0));
        ScalarField { grid, data }
    }

    pub fn from_data(grid: impl Into<Grid>, data: ArrayD<Complex64>) -> Result<Self> {
        let grid = grid.into();
        if data.shape() != grid.shape().as_slice() {
            return Err(Error::GridMismatch(format!(
                "data shape {:?} does not match grid shape {:?}",
                data.shape(),
                grid.shape()
            )));
        }
        Ok(ScalarField { grid, data })
    }

    /// Sample a function of the physical coordinates onto the grid.
    pub fn from_fn(grid: impl Into<Grid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let grid = grid.into();
        let shape = grid.shape();
        let mut field = ScalarField::zeros(grid.clone());
        let mut coords = vec![0.0; shape.len()];
        for (idx, v) in field.data.indexed_iter_mut() {
            for (a, &i) in idx.slice().iter().enumerate() {
                coords[a] = node_coord(&grid, a, i);
            }
            *v = f(&coords);
        }
        field
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &ArrayD<Complex64> {
        &self.data
    }

    pub fn into_data(self) -> ArrayD<Complex64> {
        self.data
    }

    pub(crate) fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            data: self.data.mapv(&f),
        }
    }

    pub fn scale(&self, c: Complex64) -> ScalarField {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip(other, |a, b| a - b)
    }

    pub(crate) fn zip(
        &self,
        other: &ScalarField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("binary field op across different grids".into()));
        }
        let mut data = self.data.clone();
        data.zip_mut_with(&other.data, |a, &b| *a = f(*a, b));
        Ok(ScalarField { grid: self.grid.clone(), data })
    }

    /// Mean value (plain average over nodes; equals the zero-frequency
    /// Fourier coefficient on a torus).
    pub fn mean(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.im.abs()))
    }
}

fn node_coord(grid: &Grid, axis: usize, i: usize) -> f64 {
    match grid {
        Grid::Torus(g) => g.node(axis, i),
        Grid::Slab(g) => {
            if axis + 1 == g.dim() {
                g.vertical_node(i)
            } else {
                g.horizontal.node(axis, i)
            }
        }
    }
}

/// d-component field (velocities, body forces).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn zeros(grid: impl Into<Grid>) -> Self {
        let grid = grid.into();
        let d = grid.dim();
        VectorField {
            comps: (0..d).map(|_| ScalarField::zeros(grid.clone())).collect(),
        }
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let grid = comps
            .first()
            .ok_or_else(|| Error::InvalidParam("vector field needs components".into()))?
            .grid()
            .clone();
        if comps.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "vector field needs {} components, got {}",
                grid.dim(),
                comps.len()
            )));
        }
        if comps.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch("vector components on different grids".into()));
        }
        Ok(VectorField { comps })
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, j: usize) -> &ScalarField {
        &self.comps[j]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.comps
    }

    pub fn scale(&self, c: Complex64) -> VectorField {
        VectorField {
            comps: self.comps.iter().map(|f| f.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, ScalarField::add)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, ScalarField::sub)
    }

    fn zip(
        &self,
        other: &VectorField,
        f: impl Fn(&ScalarField, &ScalarField) -> Result<ScalarField>,
    ) -> Result<VectorField> {
        if self.dim() != other.dim() {
            return Err(Error::GridMismatch("vector dimension mismatch".into()));
        }
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { comps })
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0f64, |m, c| m.max(c.max_abs()))
    }
}

/// d×d-component field (the divergence-form datum f = (f_jk)); the first
/// index is the derivative direction, the second the equation component:
/// (div f)_k = Σ_j ∂_j f_jk. Stored row-major, entry (j,k) at j·d + k.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    d: usize,
    comps: Vec<ScalarField>,
}

impl TensorField {
    pub fn zeros(grid: impl Into<Grid>) -> Self {
        let grid = grid.into();
        let d = grid.dim();
        TensorField {
            d,
            comps: (0..d * d).map(|_| ScalarField::zeros(grid.clone())).collect(),
        }
    }

    pub fn from_components(comps: Vec<ScalarField>) -> Result<Self> {
        let grid = comps
            .first()
            .ok_or_else(|| Error::InvalidParam("tensor field needs components".into()))?
            .grid()
            .clone();
        let d = grid.dim();
        if comps.len() != d * d {
            return Err(Error::GridMismatch(format!(
                "tensor field needs {} components, got {}",
                d * d,
                comps.len()
            )));
        }
        if comps.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch("tensor components on different grids".into()));
        }
        Ok(TensorField { d, comps })
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn comp(&self, j: usize, k: usize) -> &ScalarField {
        &self.comps[j * self.d + k]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn set_comp(&mut self, j: usize, k: usize, value: ScalarField) -> Result<()> {
        if value.grid() != self.grid() {
            return Err(Error::GridMismatch("tensor component on a different grid".into()));
        }
        self.comps[j * self.d + k] = value;
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> TensorField {
        TensorField {
            d: self.d,
            comps: self.comps.iter().map(|f| f.scale(c)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0f64, |m, c| m.max(c.max_abs()))
    }
}

/// Right-hand side (F, f, g) of the resolvent problem; absent slots are
/// identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsTriple {
    pub force: Option<VectorField>,
    pub stress: Option<TensorField>,
    pub div: Option<ScalarField>,
}

impl RhsTriple {
    pub fn zero() -> Self {
        RhsTriple { force: None, stress: None, div: None }
    }

    pub fn from_force(force: VectorField) -> Self {
        RhsTriple { force: Some(force), stress: None, div: None }
    }

    pub fn grid(&self) -> Result<Grid> {
        let grids: Vec<&Grid> = self
            .force
            .iter()
            .map(|f| f.grid())
            .chain(self.stress.iter().map(|f| f.grid()))
            .chain(self.div.iter().map(|f| f.grid()))
            .collect();
        let first = grids
            .first()
            .ok_or_else(|| Error::InvalidParam("empty rhs has no grid".into()))?;
        if grids.iter().any(|g| g != first) {
            return Err(Error::GridMismatch("rhs slots on different grids".into()));
        }
        Ok((*first).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.force.is_none() && self.stress.is_none() && self.div.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use std::f64::consts::TAU;

    #[test]
    fn sampling_and_arithmetic() {
        let grid = TorusGrid::cubic(2, 8, TAU).unwrap();
        let f = ScalarField::from_fn(grid.clone(), |x| Complex64::new(x[0].cos(), 0.0));
        let g = f.scale(Complex64::new(2.0, 0.0));
        let sum = f.add(&g).unwrap();
        let expected = ScalarField::from_fn(grid, |x| Complex64::new(3.0 * x[0].cos(), 0.0));
        assert!(sum.sub(&expected).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = ScalarField::zeros(TorusGrid::cubic(2, 8, TAU).unwrap());
        let b = ScalarField::zeros(TorusGrid::cubic(2, 16, TAU).unwrap());
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn tensor_indexing() {
        let grid = TorusGrid::cubic(2, 8, TAU).unwrap();
        let mut t = TensorField::zeros(grid.clone());
        let one = ScalarField::from_fn(grid, |_| Complex64::new(1.0, 0.0));
        t.set_comp(1, 0, one).unwrap();
        assert!(t.comp(1, 0).max_abs() > 0.5);
        assert_eq!(t.comp(0, 1).max_abs(), 0.0);
    }
}
