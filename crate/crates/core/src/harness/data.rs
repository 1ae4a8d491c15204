//! Deterministic band-limited test data.
//!
//! Every generator is a pure function of (grid, seed): coefficients are drawn
//! from a ChaCha8 stream in a fixed iteration order, so reports built from
//! the same configuration are byte-identical across runs and thread counts.
//!
//! Fields are real, band-limited to |k|_∞ ≤ n/4 per axis (unless a tighter
//! band is requested), and normalized to unit L². Keeping a factor-two margin
//! below Nyquist means differentiation and dealiased products never touch the
//! ambiguous top modes. Divergence data g is projected to zero mean, which the
//! solvers require for a periodic pressure.
//!
//! Coefficients carry a 1/(1 + |k|²) spectral tilt: a generic smooth field,
//! not white spectral noise. Every in-band mode stays active, but the low
//! modes dominate the norms, so the |λ| = 1 calibration row of a sweep sits
//! in the range of scales the data actually occupies.

use crate::error::Result;
use crate::fft;
use crate::field::{RhsTriple, ScalarField, TensorField, VectorField};
use crate::grid::{SlabGrid, TorusGrid};
use crate::halfspace::{restrict_to_slab, symmetrize_doubled, Parity};
use crate::norms::{lq_norm, lq_norm_tensor, lq_norm_vec};
use ndarray::Dimension;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Decorrelates the streams of the individual rhs slots and components.
fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Default band: a quarter of the smallest axis resolution.
fn default_band(grid: &TorusGrid) -> usize {
    (0..grid.dim()).map(|a| grid.axis(a).n / 4).min().unwrap_or(1)
}

/// Real scalar field with independent uniform coefficients on all modes with
/// |signed k| ≤ band on every axis, Hermitian-symmetrized and normalized to
/// unit L² norm.
pub fn band_limited_scalar(grid: &TorusGrid, seed: u64, band: usize) -> Result<ScalarField> {
    let field = raw_band_limited(grid, seed, band)?;
    normalize(field)
}

/// Real vector field; each component gets its own coefficient stream.
pub fn band_limited_vector(grid: &TorusGrid, seed: u64, band: usize) -> Result<VectorField> {
    let comps = (0..grid.dim())
        .map(|j| raw_band_limited(grid, sub_seed(seed, 0x10 + j as u64), band))
        .collect::<Result<Vec<_>>>()?;
    let field = VectorField::from_components(comps)?;
    let scale = 1.0 / lq_norm_vec(&field, 2.0)?;
    Ok(field.scale(Complex64::new(scale, 0.0)))
}

/// Right-hand side triple with the requested slots populated. The divergence
/// datum is mean-free; every present slot has unit L² norm.
pub fn band_limited_rhs(
    grid: &TorusGrid,
    seed: u64,
    with_force: bool,
    with_stress: bool,
    with_div: bool,
) -> Result<RhsTriple> {
    let band = default_band(grid);
    let d = grid.dim();
    let force = if with_force {
        Some(band_limited_vector(grid, sub_seed(seed, 0x100), band)?)
    } else {
        None
    };
    let stress = if with_stress {
        let comps = (0..d * d)
            .map(|jk| raw_band_limited(grid, sub_seed(seed, 0x200 + jk as u64), band))
            .collect::<Result<Vec<_>>>()?;
        let tensor = TensorField::from_components(comps)?;
        let scale = 1.0 / lq_norm_tensor(&tensor, 2.0)?;
        Some(tensor.scale(Complex64::new(scale, 0.0)))
    } else {
        None
    };
    let div = if with_div {
        let g = raw_band_limited(grid, sub_seed(seed, 0x300), band)?;
        let mean = g.mean();
        Some(normalize(g.map(|v| v - mean))?)
    } else {
        None
    };
    Ok(RhsTriple { force, stress, div })
}

/// Slab right-hand side whose even/odd reflection to the doubled torus is
/// exact: horizontal force components and the diagonal/horizontal stress
/// blocks extend evenly, everything carrying a single vertical index extends
/// oddly (and therefore vanishes on both walls), and g extends evenly with
/// zero doubled-torus mean.
pub fn parity_rhs_on_slab(
    slab: &SlabGrid,
    seed: u64,
    with_force: bool,
    with_stress: bool,
    with_div: bool,
) -> Result<RhsTriple> {
    let d = slab.dim();
    let vertical = d - 1;
    let force = if with_force {
        let comps = (0..d)
            .map(|j| {
                let parity = if j == vertical { Parity::Odd } else { Parity::Even };
                parity_scalar(slab, sub_seed(seed, 0x100 + j as u64), parity, false)
            })
            .collect::<Result<Vec<_>>>()?;
        let field = VectorField::from_components(comps)?;
        let scale = 1.0 / lq_norm_vec(&field, 2.0)?;
        Some(field.scale(Complex64::new(scale, 0.0)))
    } else {
        None
    };
    let stress = if with_stress {
        let comps = (0..d * d)
            .map(|jk| {
                let (j, k) = (jk / d, jk % d);
                let parity = if (j == vertical) != (k == vertical) {
                    Parity::Odd
                } else {
                    Parity::Even
                };
                parity_scalar(slab, sub_seed(seed, 0x200 + jk as u64), parity, false)
            })
            .collect::<Result<Vec<_>>>()?;
        let tensor = TensorField::from_components(comps)?;
        let scale = 1.0 / lq_norm_tensor(&tensor, 2.0)?;
        Some(tensor.scale(Complex64::new(scale, 0.0)))
    } else {
        None
    };
    let div = if with_div {
        let g = parity_scalar(slab, sub_seed(seed, 0x300), Parity::Even, true)?;
        Some(normalize(g)?)
    } else {
        None
    };
    Ok(RhsTriple { force, stress, div })
}

/// Velocity/pressure pair with both traces of u exactly zero (all components
/// built odd about both walls); used to probe operators that act on
/// solution-like states rather than data.
pub fn trace_zero_state(slab: &SlabGrid, seed: u64) -> Result<(VectorField, ScalarField)> {
    let d = slab.dim();
    let comps = (0..d)
        .map(|j| parity_scalar(slab, sub_seed(seed, 0x400 + j as u64), Parity::Odd, false))
        .collect::<Result<Vec<_>>>()?;
    let u = VectorField::from_components(comps)?;
    let scale = 1.0 / lq_norm_vec(&u, 2.0)?;
    let p = normalize(parity_scalar(slab, sub_seed(seed, 0x500), Parity::Even, true)?)?;
    Ok((u.scale(Complex64::new(scale, 0.0)), p))
}

fn parity_scalar(slab: &SlabGrid, seed: u64, parity: Parity, mean_free: bool) -> Result<ScalarField> {
    let torus = slab.doubled_torus();
    let band = default_band(&torus);
    let raw = raw_band_limited(&torus, seed, band)?;
    let mut sym = symmetrize_doubled(&raw, parity)?;
    if mean_free {
        let mean = sym.mean();
        sym = sym.map(|v| v - mean);
    }
    restrict_to_slab(&sym, slab)
}

fn raw_band_limited(grid: &TorusGrid, seed: u64, band: usize) -> Result<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = fft::Spectrum::zeros(grid.clone());
    let d = grid.dim();
    let shape = grid.shape();
    {
        let coef = spec.coef_mut();
        for (idx, v) in coef.indexed_iter_mut() {
            let in_band = (0..d).all(|a| {
                let k = grid.signed_index(a, idx.slice()[a]).unsigned_abs() as usize;
                k <= band && k < shape[a] / 2
            });
            if in_band {
                let k2: f64 = (0..d)
                    .map(|a| {
                        let k = grid.signed_index(a, idx.slice()[a]) as f64;
                        k * k
                    })
                    .sum();
                let draw = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                *v = draw / (1.0 + k2);
            }
        }
    }
    // Hermitian pairing makes the synthesis real; the stray O(1e-16) imaginary
    // FFT noise is dropped so parity reflections stay exact.
    let sym = hermitian_part(&spec);
    let field = fft::backward(&sym);
    Ok(field.map(|v| Complex64::new(v.re, 0.0)))
}

fn hermitian_part(spec: &fft::Spectrum) -> fft::Spectrum {
    let grid = spec.grid().clone();
    let shape = grid.shape();
    let mut out = fft::Spectrum::zeros(grid);
    for (idx, v) in out.coef_mut().indexed_iter_mut() {
        let neg: Vec<usize> = idx
            .slice()
            .iter()
            .zip(&shape)
            .map(|(&k, &n)| (n - k) % n)
            .collect();
        *v = 0.5 * (spec.coef()[idx.slice()] + spec.coef()[neg.as_slice()].conj());
    }
    out
}

fn normalize(field: ScalarField) -> Result<ScalarField> {
    let norm = lq_norm(&field, 2.0)?;
    Ok(field.scale(Complex64::new(1.0 / norm, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deriv;
    use std::f64::consts::TAU;

    #[test]
    fn scalar_data_is_real_banded_and_normalized() {
        let grid = TorusGrid::cubic(2, 32, TAU).unwrap();
        let f = band_limited_scalar(&grid, 42, 8).unwrap();
        assert_eq!(f.max_imag_abs(), 0.0);
        assert!((lq_norm(&f, 2.0).unwrap() - 1.0).abs() < 1e-13);
        let spec = fft::forward(&f).unwrap();
        let band = spec.band_limit(1e-13);
        assert!(band.iter().all(|&b| b <= 8), "band {band:?}");
    }

    #[test]
    fn generation_is_deterministic_and_seed_sensitive() {
        let grid = TorusGrid::cubic(2, 16, TAU).unwrap();
        let a = band_limited_scalar(&grid, 7, 4).unwrap();
        let b = band_limited_scalar(&grid, 7, 4).unwrap();
        let c = band_limited_scalar(&grid, 8, 4).unwrap();
        assert_eq!(a.data(), b.data());
        assert!(a.sub(&c).unwrap().max_abs() > 1e-3);
    }

    #[test]
    fn rhs_slots_respect_flags_and_mean() {
        let grid = TorusGrid::cubic(2, 16, TAU).unwrap();
        let rhs = band_limited_rhs(&grid, 3, true, false, true).unwrap();
        assert!(rhs.force.is_some());
        assert!(rhs.stress.is_none());
        let g = rhs.div.as_ref().unwrap();
        assert!(g.mean().norm() < 1e-15);
    }

    #[test]
    fn parity_rhs_extends_exactly() {
        let slab = SlabGrid::isotropic(2, 16, TAU, 17, 4.0).unwrap();
        let rhs = parity_rhs_on_slab(&slab, 11, true, true, true).unwrap();
        let force = rhs.force.as_ref().unwrap();
        // Vertical component is odd: zero on both walls.
        let nv = slab.n_vertical;
        let ud = force.comp(1).data();
        for i in 0..16 {
            assert_eq!(ud[[i, 0]], Complex64::new(0.0, 0.0));
            assert_eq!(ud[[i, nv - 1]], Complex64::new(0.0, 0.0));
        }
        // Odd stress slots vanish on the walls too.
        let f01 = rhs.stress.as_ref().unwrap().comp(0, 1).data();
        for i in 0..16 {
            assert_eq!(f01[[i, 0]], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn trace_zero_state_really_has_zero_trace() {
        let slab = SlabGrid::isotropic(2, 16, TAU, 17, 4.0).unwrap();
        let (u, _p) = trace_zero_state(&slab, 5).unwrap();
        let nv = slab.n_vertical;
        for j in 0..2 {
            let data = u.comp(j).data();
            for i in 0..16 {
                assert_eq!(data[[i, 0]], Complex64::new(0.0, 0.0));
                assert_eq!(data[[i, nv - 1]], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn band_margin_survives_differentiation() {
        // Differentiating band-limited data must not create new modes.
        let grid = TorusGrid::cubic(2, 16, TAU).unwrap();
        let f = band_limited_scalar(&grid, 9, 4).unwrap();
        let df = deriv::partial(&f, 0).unwrap();
        let band = fft::forward(&df).unwrap().band_limit(1e-12);
        assert!(band.iter().all(|&b| b <= 4));
    }
}
