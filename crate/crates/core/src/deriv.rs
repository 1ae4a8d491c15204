//! Differential operators on fields.
//!
//! Torus fields differentiate spectrally (exact for band-limited data).
//! Slab fields differentiate spectrally along the horizontal axes and with
//! fourth-order finite differences along the non-periodic vertical axis:
//! centered five-point stencils inside, one-sided/biased stencils of the
//! same order at the two nodes adjacent to each end.

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use ndarray::{Axis, Dimension};
use num_complex::Complex64;

// Fourth-order first-derivative stencils, premultiplied by 12h.
const D1_INTERIOR: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D1_EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
// Fourth-order second-derivative stencils, premultiplied by 12h².
const D2_INTERIOR: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];

fn fd_line(src: &[Complex64], dst: &mut [Complex64], h: f64, order: usize) {
    let n = src.len();
    let zero = Complex64::new(0.0, 0.0);
    let dot = |coefs: &[f64], start: usize, reversed: bool| -> Complex64 {
        let mut acc = zero;
        for (o, &c) in coefs.iter().enumerate() {
            let i = if reversed { start - o } else { start + o };
            acc += c * src[i];
        }
        acc
    };
    match order {
        1 => {
            let scale = 1.0 / (12.0 * h);
            dst[0] = dot(&D1_EDGE0, 0, false) * scale;
            dst[1] = dot(&D1_EDGE1, 0, false) * scale;
            for i in 2..n - 2 {
                dst[i] = dot(&D1_INTERIOR, i - 2, false) * scale;
            }
            // Mirrored stencils flip sign for odd derivative order.
            dst[n - 2] = -dot(&D1_EDGE1, n - 1, true) * scale;
            dst[n - 1] = -dot(&D1_EDGE0, n - 1, true) * scale;
        }
        2 => {
            let scale = 1.0 / (12.0 * h * h);
            dst[0] = dot(&D2_EDGE0, 0, false) * scale;
            dst[1] = dot(&D2_EDGE1, 0, false) * scale;
            for i in 2..n - 2 {
                dst[i] = dot(&D2_INTERIOR, i - 2, false) * scale;
            }
            dst[n - 2] = dot(&D2_EDGE1, n - 1, true) * scale;
            dst[n - 1] = dot(&D2_EDGE0, n - 1, true) * scale;
        }
        _ => unreachable!("only first and second derivatives are provided"),
    }
}

/// ∂^order/∂x_d^order along the slab vertical axis.
pub fn vertical_derivative(field: &ScalarField, order: usize) -> Result<ScalarField> {
    let slab = field.grid().as_slab()?;
    if !(order == 1 || order == 2) {
        return Err(Error::InvalidParam(format!("vertical derivative order must be 1 or 2, got {order}")));
    }
    let h = slab.dx_vertical();
    let axis = Axis(slab.dim() - 1);
    let mut data = field.data().clone();
    let mut src = vec![Complex64::new(0.0, 0.0); slab.n_vertical];
    let mut dst = vec![Complex64::new(0.0, 0.0); slab.n_vertical];
    for mut lane in data.lanes_mut(axis) {
        for (s, v) in src.iter_mut().zip(lane.iter()) {
            *s = *v;
        }
        fd_line(&src, &mut dst, h, order);
        for (v, d) in lane.iter_mut().zip(dst.iter()) {
            *v = *d;
        }
    }
    ScalarField::from_data(field.grid().clone(), data)
}

/// First derivative along any axis: spectral on a torus or a horizontal slab
/// axis, finite differences on the slab vertical.
pub fn partial(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    match field.grid() {
        Grid::Torus(_) => fft::spectral_derivative(field, axis),
        Grid::Slab(slab) => {
            if axis + 1 == slab.dim() {
                vertical_derivative(field, 1)
            } else {
                fft::spectral_derivative(field, axis)
            }
        }
    }
}

pub fn gradient(field: &ScalarField) -> Result<VectorField> {
    let d = field.grid().dim();
    let comps = (0..d).map(|a| partial(field, a)).collect::<Result<Vec<_>>>()?;
    VectorField::from_components(comps)
}

pub fn divergence(field: &VectorField) -> Result<ScalarField> {
    let mut acc = partial(field.comp(0), 0)?;
    for a in 1..field.dim() {
        acc = acc.add(&partial(field.comp(a), a)?)?;
    }
    Ok(acc)
}

pub fn laplacian(field: &ScalarField) -> Result<ScalarField> {
    match field.grid() {
        Grid::Torus(grid) => {
            let mut spec = fft::forward(field)?;
            let tables: Vec<Vec<f64>> = (0..grid.dim()).map(|a| grid.freqs_even(a)).collect();
            for (idx, v) in spec.coef_mut().indexed_iter_mut() {
                let xi2: f64 = idx
                    .slice()
                    .iter()
                    .enumerate()
                    .map(|(a, &k)| tables[a][k] * tables[a][k])
                    .sum();
                *v *= Complex64::new(-xi2, 0.0);
            }
            Ok(fft::backward(&spec))
        }
        Grid::Slab(slab) => {
            let mut acc = vertical_derivative(field, 2)?;
            for a in 0..slab.dim() - 1 {
                let da = fft::spectral_derivative(field, a)?;
                acc = acc.add(&fft::spectral_derivative(&da, a)?)?;
            }
            Ok(acc)
        }
    }
}
