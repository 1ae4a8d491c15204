//! Discrete L^q norms, pairings, and the negative-Sobolev surrogate.
//!
//! The L^q norm is the plain quadrature (Σ |v_i|^q · cellVolume)^{1/q} with
//! uniform weights; vector and tensor fields use the pointwise Euclidean or
//! Frobenius magnitude. The W^{−1,q} surrogate for divergence data g is
//! ‖∇Δ^{−1}g‖_q, computed spectrally with the zero mode annihilated.

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{ScalarField, TensorField, VectorField};
use ndarray::Dimension;
use num_complex::Complex64;

fn lq_from_magnitudes(mags: impl Iterator<Item = f64>, cell_volume: f64, q: f64) -> f64 {
    if q == 2.0 {
        let sum: f64 = mags.map(|m| m * m).sum();
        (sum * cell_volume).sqrt()
    } else {
        let sum: f64 = mags.map(|m| m.powf(q)).sum();
        (sum * cell_volume).powf(1.0 / q)
    }
}

pub fn lq_norm(field: &ScalarField, q: f64) -> Result<f64> {
    check_q(q)?;
    Ok(lq_from_magnitudes(
        field.data().iter().map(|v| v.norm()),
        field.grid().cell_volume(),
        q,
    ))
}

pub fn lq_norm_vec(field: &VectorField, q: f64) -> Result<f64> {
    check_q(q)?;
    let n = field.comp(0).data().len();
    let mags = (0..n).map(|i| {
        let s: f64 = field
            .components()
            .iter()
            .map(|c| {
                let v = c.data().as_slice().expect("standard layout")[i];
                v.norm_sqr()
            })
            .sum();
        s.sqrt()
    });
    Ok(lq_from_magnitudes(mags, field.grid().cell_volume(), q))
}

pub fn lq_norm_tensor(field: &TensorField, q: f64) -> Result<f64> {
    check_q(q)?;
    let n = field.comp(0, 0).data().len();
    let mags = (0..n).map(|i| {
        let s: f64 = field
            .components()
            .iter()
            .map(|c| c.data().as_slice().expect("standard layout")[i].norm_sqr())
            .sum();
        s.sqrt()
    });
    Ok(lq_from_magnitudes(mags, field.grid().cell_volume(), q))
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParam(format!("q must lie in (1, ∞), got {q}")));
    }
    Ok(())
}

pub fn sup_norm(field: &ScalarField) -> f64 {
    field.max_abs()
}

pub fn sup_norm_vec(field: &VectorField) -> f64 {
    field.max_abs()
}

/// Bilinear pairing Σ a·b · cellVolume (no conjugation), the discrete
/// analogue of the distributional pairing used in the duality argument.
pub fn pair_bilinear(a: &VectorField, b: &VectorField) -> Result<Complex64> {
    pair_with(a, b, |x, y| x * y)
}

/// Sesquilinear pairing Σ a·conj(b) · cellVolume.
pub fn pair_sesquilinear(a: &VectorField, b: &VectorField) -> Result<Complex64> {
    pair_with(a, b, |x, y| x * y.conj())
}

fn pair_with(
    a: &VectorField,
    b: &VectorField,
    f: impl Fn(Complex64, Complex64) -> Complex64,
) -> Result<Complex64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("pairing across different grids".into()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (ca, cb) in a.components().iter().zip(b.components()) {
        for (&x, &y) in ca.data().iter().zip(cb.data().iter()) {
            acc += f(x, y);
        }
    }
    Ok(acc * a.grid().cell_volume())
}

/// ∇Δ^{−1}g on a torus: coefficients (−iξ_j/|ξ|²)·ĝ, zero at ξ = 0.
/// Returns the vector field, so ‖·‖ choices stay with the caller.
pub fn grad_inverse_laplacian(g: &ScalarField) -> Result<VectorField> {
    let grid = g.grid().as_torus()?.clone();
    let spec = fft::forward(g)?;
    let d = grid.dim();
    let even: Vec<Vec<f64>> = (0..d).map(|a| grid.freqs_even(a)).collect();
    let odd: Vec<Vec<f64>> = (0..d).map(|a| grid.freqs_odd(a)).collect();
    let mut out = Vec::with_capacity(d);
    for j in 0..d {
        let mut comp = fft::Spectrum::zeros(grid.clone());
        for (idx, v) in comp.coef_mut().indexed_iter_mut() {
            let ks = idx.slice();
            let xi2: f64 = (0..d).map(|a| even[a][ks[a]] * even[a][ks[a]]).sum();
            if xi2 > 0.0 {
                let m = Complex64::new(0.0, -odd[j][ks[j]] / xi2);
                *v = m * spec.coef()[ks];
            }
        }
        out.push(fft::backward(&comp));
    }
    VectorField::from_components(out)
}

/// Scale-correct stand-in for ‖g‖_{W^{−1,q}}: the L^q norm of ∇Δ^{−1}g.
pub fn neg_sobolev_surrogate(g: &ScalarField, q: f64) -> Result<f64> {
    lq_norm_vec(&grad_inverse_laplacian(g)?, q)
}

/// Componentwise variant for vector-valued data; Frobenius magnitude.
pub fn neg_sobolev_surrogate_vec(g: &VectorField, q: f64) -> Result<f64> {
    check_q(q)?;
    let grads = g
        .components()
        .iter()
        .map(grad_inverse_laplacian)
        .collect::<Result<Vec<_>>>()?;
    let n = g.comp(0).data().len();
    let mags = (0..n).map(|i| {
        let s: f64 = grads
            .iter()
            .flat_map(|gv| gv.components())
            .map(|c| c.data().as_slice().expect("standard layout")[i].norm_sqr())
            .sum();
        s.sqrt()
    });
    Ok(lq_from_magnitudes(mags, g.grid().cell_volume(), q))
}

/// Parseval check value: volume · Σ_k |ĥ(k)|², which must equal ‖h‖₂².
pub fn spectral_energy(field: &ScalarField) -> Result<f64> {
    let spec = fft::forward(field)?;
    let grid = field.grid().as_torus()?;
    Ok(grid.volume() * spec.coef().iter().map(|v| v.norm_sqr()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use std::f64::consts::{PI, TAU};

    fn grid2() -> TorusGrid {
        TorusGrid::cubic(2, 32, TAU).unwrap()
    }

    #[test]
    fn l2_of_sine_is_exact() {
        // ‖sin x₁‖₂ on [0,2π)² is √(2π²) = π√2; the quadrature is exact for
        // trig polynomials.
        let f = ScalarField::from_fn(grid2(), |x| Complex64::new(x[0].sin(), 0.0));
        let n = lq_norm(&f, 2.0).unwrap();
        assert!((n - PI * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn parseval() {
        let f = ScalarField::from_fn(grid2(), |x| {
            Complex64::new((3.0 * x[0]).cos() + 0.5 * (x[1]).sin(), 0.25 * (2.0 * x[0] + x[1]).cos())
        });
        let phys = lq_norm(&f, 2.0).unwrap().powi(2);
        let spec = spectral_energy(&f).unwrap();
        assert!((phys - spec).abs() <= 1e-12 * phys);
    }

    #[test]
    fn surrogate_closed_form() {
        // g = cos x₁: Δ^{−1}g = −cos x₁, ∇Δ^{−1}g = (sin x₁, 0), ‖·‖₂ = π√2.
        let g = ScalarField::from_fn(grid2(), |x| Complex64::new(x[0].cos(), 0.0));
        let n = neg_sobolev_surrogate(&g, 2.0).unwrap();
        assert!((n - PI * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn surrogate_bounded_by_lq_at_q2() {
        // ‖∇Δ^{−1}∂_j h‖₂ ≤ ‖h‖₂ mode by mode (|ξ_j|·|ξ|/|ξ|² ≤ 1).
        let h = ScalarField::from_fn(grid2(), |x| {
            Complex64::new((2.0 * x[0] + x[1]).sin() + (3.0 * x[1]).cos(), (x[0] - x[1]).sin())
        });
        let dh = fft::spectral_derivative(&h, 0).unwrap();
        let lhs = neg_sobolev_surrogate(&dh, 2.0).unwrap();
        let rhs = lq_norm(&h, 2.0).unwrap();
        assert!(lhs <= rhs * (1.0 + 1e-10), "{lhs} vs {rhs}");
    }

    #[test]
    fn surrogate_homogeneity_at_general_q() {
        let g = ScalarField::from_fn(grid2(), |x| {
            Complex64::new((2.0 * x[0]).cos() * x[1].sin(), 0.0)
        });
        for q in [1.5, 3.0] {
            let base = neg_sobolev_surrogate(&g, q).unwrap();
            assert!(base.is_finite() && base > 0.0);
            let scaled = neg_sobolev_surrogate(&g.scale(Complex64::new(-2.5, 0.0)), q).unwrap();
            assert!((scaled - 2.5 * base).abs() <= 1e-12 * scaled);
        }
    }

    #[test]
    fn pairings_differ_by_conjugation() {
        let a = VectorField::from_components(vec![
            ScalarField::from_fn(grid2(), |x| Complex64::new(x[0].sin(), x[1].cos())),
            ScalarField::from_fn(grid2(), |_| Complex64::new(0.0, 0.0)),
        ])
        .unwrap();
        let bil = pair_bilinear(&a, &a).unwrap();
        let ses = pair_sesquilinear(&a, &a).unwrap();
        assert!(ses.im.abs() < 1e-12);
        assert!(ses.re > 0.0);
        assert!((bil - ses).norm() > 1e-3); // genuinely different pairings
    }
}
