//! Discrete Fourier transforms and spectral bookkeeping.
//!
//! Convention: the forward transform is mean-preserving,
//!
//! ```text
//! ĥ(k) = (1/N) Σ_x h(x) e^{−i ξ_k · x},    h(x) = Σ_k ĥ(k) e^{+i ξ_k · x},
//! ```
//!
//! i.e. coefficients are Fourier-series coefficients of the trigonometric
//! interpolant; a constant field c has coefficient c at frequency zero.
//! Multiplier formulas are normalization-independent; Parseval picks up the
//! box volume: Σ_x |h|²·cellVolume = volume · Σ_k |ĥ(k)|².
//!
//! Torus fields transform along every axis; slab fields only along the
//! horizontal axes, leaving vertical node columns in physical space.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::{Grid, SlabGrid, TorusGrid};
use ndarray::{ArrayD, Axis, Dimension};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<PlanCache> = OnceLock::new();
    let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut plans = plans.lock().expect("fft plan cache poisoned");
    plans
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// Unnormalized in-place transform along one axis of a dynamic array.
pub(crate) fn transform_axis(data: &mut ArrayD<Complex64>, axis: usize, forward: bool) {
    let n = data.shape()[axis];
    let fft = plan(n, forward);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for mut lane in data.lanes_mut(Axis(axis)) {
        for (dst, src) in line.iter_mut().zip(lane.iter()) {
            *dst = *src;
        }
        fft.process_with_scratch(&mut line, &mut scratch);
        for (dst, src) in lane.iter_mut().zip(line.iter()) {
            *dst = *src;
        }
    }
}

/// Fourier coefficients of a torus field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: TorusGrid,
    coef: ArrayD<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: TorusGrid) -> Self {
        let coef = ArrayD::from_elem(grid.shape(), Complex64::new(0.0, 0.0));
        Spectrum { grid, coef }
    }

    pub fn from_coef(grid: TorusGrid, coef: ArrayD<Complex64>) -> Result<Self> {
        if coef.shape() != grid.shape().as_slice() {
            return Err(Error::GridMismatch("coefficient shape != grid shape".into()));
        }
        Ok(Spectrum { grid, coef })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coef(&self) -> &ArrayD<Complex64> {
        &self.coef
    }

    pub fn coef_mut(&mut self) -> &mut ArrayD<Complex64> {
        &mut self.coef
    }

    /// Largest |signed index| with a coefficient above `floor`, per axis.
    pub fn band_limit(&self, floor: f64) -> Vec<i64> {
        let d = self.grid.dim();
        let mut band = vec![0i64; d];
        for (idx, v) in self.coef.indexed_iter() {
            if v.norm() > floor {
                for (a, &k) in idx.slice().iter().enumerate() {
                    band[a] = band[a].max(self.grid.signed_index(a, k).abs());
                }
            }
        }
        band
    }
}

pub fn forward(field: &ScalarField) -> Result<Spectrum> {
    let grid = field.grid().as_torus()?.clone();
    let mut coef = field.data().clone();
    for a in 0..grid.dim() {
        transform_axis(&mut coef, a, true);
    }
    let scale = 1.0 / grid.len() as f64;
    coef.mapv_inplace(|v| v * scale);
    Ok(Spectrum { grid, coef })
}

pub fn backward(spectrum: &Spectrum) -> ScalarField {
    let mut data = spectrum.coef.clone();
    for a in 0..spectrum.grid.dim() {
        transform_axis(&mut data, a, false);
    }
    ScalarField::from_data(spectrum.grid.clone(), data).expect("shape preserved by fft")
}

pub fn forward_vector(field: &VectorField) -> Result<Vec<Spectrum>> {
    field.components().iter().map(forward).collect()
}

pub fn backward_vector(spectra: &[Spectrum]) -> Result<VectorField> {
    VectorField::from_components(spectra.iter().map(backward).collect())
}

/// Horizontal-mode representation of a slab field: transformed along the
/// horizontal axes, vertical axis (last) left nodal.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabSpectrum {
    slab: SlabGrid,
    coef: ArrayD<Complex64>,
}

impl SlabSpectrum {
    pub fn zeros(slab: SlabGrid) -> Self {
        let coef = ArrayD::from_elem(slab.shape(), Complex64::new(0.0, 0.0));
        SlabSpectrum { slab, coef }
    }

    pub fn slab(&self) -> &SlabGrid {
        &self.slab
    }

    pub fn coef(&self) -> &ArrayD<Complex64> {
        &self.coef
    }

    pub fn coef_mut(&mut self) -> &mut ArrayD<Complex64> {
        &mut self.coef
    }
}

pub fn forward_horizontal(field: &ScalarField) -> Result<SlabSpectrum> {
    let slab = field.grid().as_slab()?.clone();
    let mut coef = field.data().clone();
    for a in 0..slab.horizontal.dim() {
        transform_axis(&mut coef, a, true);
    }
    let scale = 1.0 / slab.horizontal.len() as f64;
    coef.mapv_inplace(|v| v * scale);
    Ok(SlabSpectrum { slab, coef })
}

pub fn backward_horizontal(spectrum: &SlabSpectrum) -> ScalarField {
    let mut data = spectrum.coef.clone();
    for a in 0..spectrum.slab.horizontal.dim() {
        transform_axis(&mut data, a, false);
    }
    ScalarField::from_data(spectrum.slab.clone(), data).expect("shape preserved by fft")
}

/// ∂/∂x_axis on a torus via the odd multiplier iξ (Nyquist zeroed).
pub fn spectral_derivative(field: &ScalarField, axis: usize) -> Result<ScalarField> {
    match field.grid() {
        Grid::Torus(_) => {
            let mut spec = forward(field)?;
            derivative_in_place(&mut spec, axis)?;
            Ok(backward(&spec))
        }
        Grid::Slab(slab) => {
            if axis + 1 == slab.dim() {
                return Err(Error::InvalidParam(
                    "vertical slab derivatives are finite-difference; use deriv::vertical_derivative".into(),
                ));
            }
            let mut spec = forward_horizontal(field)?;
            let freqs = slab.horizontal.freqs_odd(axis);
            apply_axis_table(spec.coef_mut(), axis, &freqs, |v, xi| {
                v * Complex64::new(0.0, xi)
            });
            Ok(backward_horizontal(&spec))
        }
    }
}

/// Same derivative applied directly to torus coefficients.
pub fn derivative_in_place(spectrum: &mut Spectrum, axis: usize) -> Result<()> {
    if axis >= spectrum.grid.dim() {
        return Err(Error::InvalidParam(format!("axis {axis} out of range")));
    }
    let freqs = spectrum.grid.freqs_odd(axis);
    apply_axis_table(&mut spectrum.coef, axis, &freqs, |v, xi| {
        v * Complex64::new(0.0, xi)
    });
    Ok(())
}

pub(crate) fn apply_axis_table(
    coef: &mut ArrayD<Complex64>,
    axis: usize,
    table: &[f64],
    f: impl Fn(Complex64, f64) -> Complex64,
) {
    for (idx, v) in coef.indexed_iter_mut() {
        *v = f(*v, table[idx.slice()[axis]]);
    }
}

/// Copy the coefficients of `src` into the matching signed frequencies of a
/// larger grid (zero padding). Nyquist rows of the source are split evenly
/// onto ±n/2 of the target so the padded interpolant is the symmetric one.
pub fn pad_spectrum(src: &Spectrum, target: &TorusGrid) -> Result<Spectrum> {
    let d = src.grid.dim();
    if target.dim() != d {
        return Err(Error::GridMismatch("padding changes dimension".into()));
    }
    for a in 0..d {
        if target.axis(a).n < src.grid.axis(a).n {
            return Err(Error::GridMismatch("pad target smaller than source".into()));
        }
        if (target.axis(a).period - src.grid.axis(a).period).abs() > 1e-12 * src.grid.axis(a).period {
            return Err(Error::GridMismatch("pad target has different period".into()));
        }
    }
    let mut out = Spectrum::zeros(target.clone());
    let src_shape = src.grid.shape();
    for (idx, &v) in src.coef.indexed_iter() {
        // Destination indices along each axis with Nyquist split.
        let mut targets: Vec<Vec<(usize, f64)>> = Vec::with_capacity(d);
        for a in 0..d {
            let k = idx.slice()[a];
            let n_src = src_shape[a];
            let n_dst = target.axis(a).n;
            let signed = src.grid.signed_index(a, k);
            if n_dst == n_src {
                targets.push(vec![(k, 1.0)]);
            } else if k == n_src / 2 {
                targets.push(vec![(n_src / 2, 0.5), (n_dst - n_src / 2, 0.5)]);
            } else if signed >= 0 {
                targets.push(vec![(signed as usize, 1.0)]);
            } else {
                targets.push(vec![((n_dst as i64 + signed) as usize, 1.0)]);
            }
        }
        let mut stack: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
        for axis_targets in &targets {
            let mut next = Vec::with_capacity(stack.len() * axis_targets.len());
            for (prefix, w) in &stack {
                for (i, wa) in axis_targets {
                    let mut p = prefix.clone();
                    p.push(*i);
                    next.push((p, w * wa));
                }
            }
            stack = next;
        }
        for (pos, w) in stack {
            out.coef[pos.as_slice()] += v * w;
        }
    }
    Ok(out)
}

/// Keep only the signed frequencies representable on `target` (band
/// truncation, the inverse of [`pad_spectrum`]). Content at or beyond the
/// target Nyquist is dropped.
pub fn truncate_spectrum(src: &Spectrum, target: &TorusGrid) -> Result<Spectrum> {
    let d = src.grid.dim();
    if target.dim() != d {
        return Err(Error::GridMismatch("truncation changes dimension".into()));
    }
    for a in 0..d {
        if target.axis(a).n > src.grid.axis(a).n {
            return Err(Error::GridMismatch("truncate target larger than source".into()));
        }
    }
    let mut out = Spectrum::zeros(target.clone());
    for (idx, v) in out.coef.indexed_iter_mut() {
        let mut src_idx = Vec::with_capacity(d);
        let mut keep = true;
        for a in 0..d {
            let k = idx.slice()[a];
            let n_dst = target.axis(a).n;
            let n_src = src.grid.axis(a).n;
            let signed = target.signed_index(a, k);
            if k == n_dst / 2 {
                // Target Nyquist: dropped, the odd-multiplier convention
                // zeroes it anyway.
                keep = false;
                break;
            }
            let s = if signed >= 0 { signed as usize } else { (n_src as i64 + signed) as usize };
            src_idx.push(s);
        }
        if keep {
            *v = src.coef[src_idx.as_slice()];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use std::f64::consts::TAU;

    fn grid2() -> TorusGrid {
        TorusGrid::cubic(2, 16, TAU).unwrap()
    }

    #[test]
    fn constant_field_maps_to_zero_frequency() {
        let c = Complex64::new(2.5, -1.0);
        let field = ScalarField::from_fn(grid2(), |_| c);
        let spec = forward(&field).unwrap();
        assert!((spec.coef()[[0, 0]] - c).norm() < 1e-14);
        let total: f64 = spec.coef().iter().map(|v| v.norm()).sum();
        assert!((total - c.norm()) < 1e-12);
    }

    #[test]
    fn single_mode_lands_on_its_index() {
        // h = e^{i(2x - 3y)} → coefficient 1 at (2, 16-3).
        let field = ScalarField::from_fn(grid2(), |x| {
            Complex64::new(0.0, 2.0 * x[0] - 3.0 * x[1]).exp()
        });
        let spec = forward(&field).unwrap();
        assert!((spec.coef()[[2, 13]] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        assert_eq!(spec.band_limit(1e-10), vec![2, 3]);
    }

    #[test]
    fn roundtrip_is_identity() {
        let field = ScalarField::from_fn(grid2(), |x| {
            Complex64::new((3.0 * x[0]).cos() * x[1].sin(), (2.0 * x[1]).cos())
        });
        let back = backward(&forward(&field).unwrap());
        assert!(back.sub(&field).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn derivative_is_exact_on_trig_polynomials() {
        let field = ScalarField::from_fn(grid2(), |x| {
            Complex64::new((5.0 * x[0]).sin() + (2.0 * x[1]).cos(), 0.0)
        });
        let expected = ScalarField::from_fn(grid2(), |x| {
            Complex64::new(5.0 * (5.0 * x[0]).cos(), 0.0)
        });
        let d = spectral_derivative(&field, 0).unwrap();
        assert!(d.sub(&expected).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn pad_then_truncate_roundtrips() {
        let field = ScalarField::from_fn(grid2(), |x| {
            Complex64::new((4.0 * x[0]).cos() * (3.0 * x[1]).sin(), x[0].sin())
        });
        let spec = forward(&field).unwrap();
        let padded = pad_spectrum(&spec, &grid2().padded_3_2().unwrap()).unwrap();
        // Padded interpolant evaluates to the same physical values.
        let fine = backward(&padded);
        let coarse_vals = field.data();
        for i in 0..4 {
            for j in 0..4 {
                // Every 3rd fine node lines up with every 2nd coarse node:
                // 24 fine nodes over the same period as 16 coarse nodes.
                let fv = fine.data()[[3 * i, 3 * j]];
                let cv = coarse_vals[[2 * i, 2 * j]];
                assert!((fv - cv).norm() < 1e-12);
            }
        }
        let back = truncate_spectrum(&padded, spec.grid()).unwrap();
        let diff: f64 = (back.coef() - spec.coef()).iter().map(|v| v.norm()).sum();
        assert!(diff < 1e-12);
    }
}
