//! Whole-space (periodic box) Stokes resolvent solver.
//!
//! Each mode is the 2x2 saddle-point system of the discrete equations
//!
//! ```text
//! (λ + |ξ|²) û + i ξ̃ p̂ = F̂ + i ξ̃·f̂ =: D,      i ξ̃ · û = ĝ,
//! ```
//!
//! solved exactly: p̂ = ((λ + |ξ|²) ĝ − i ξ̃·D) / |ξ̃|² and û = (D − i ξ̃ p̂)
//! / (λ + |ξ|²). Two frequency conventions appear because sampled derivatives
//! of the trigonometric interpolant use them: |ξ|² (the Laplacian) keeps the
//! Nyquist frequency, while ξ̃ (every first derivative: gradient, divergence)
//! zeroes it. Away from Nyquist planes the conventions agree and the formulas
//! reduce to the familiar û = (λ+|ξ|²)^{-1} P(ξ)(F̂+iξ·f̂) plus a potential
//! part for g. On Nyquist planes pressure still adjusts û to meet ĝ through
//! whatever components of ξ̃ survive; where ξ̃ = 0 entirely no divergence can
//! be produced at all, so ĝ must vanish there (for the zero mode that is the
//! usual zero-mean condition, and û(0) = F̂(0)/λ).

use crate::error::{Error, Result};
use crate::fft::{self, Spectrum};
use crate::field::{RhsTriple, ScalarField, VectorField};
use crate::grid::TorusGrid;
use crate::norms;
use crate::sector::ResolventParam;
use ndarray::Dimension;
use crate::{deriv, Complex64};

/// Relative tolerance on the mean of divergence data.
pub const MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct WholeSpaceSolution {
    pub u: VectorField,
    pub p: ScalarField,
    pub lambda: ResolventParam,
}

/// Velocity multiplier U(ξ,λ) and pressure row P(ξ) at one frequency, acting
/// on the assembled data D = F̂ + iξ̃·f̂. `xi` uses the even convention and
/// feeds λ + |ξ|², `xi_odd` the Nyquist-zeroed one and forms the projector;
/// passing the same slice for both is correct away from Nyquist indices.
/// Where ξ̃ vanishes but ξ does not, the projector is the identity and the
/// pressure row is zero: sampled first derivatives cannot act there.
pub fn stokes_multiplier(
    xi: &[f64],
    xi_odd: &[f64],
    lambda: Complex64,
) -> (Vec<Vec<Complex64>>, Vec<Complex64>) {
    let d = xi.len();
    let xi2: f64 = xi.iter().map(|x| x * x).sum();
    let xo2: f64 = xi_odd.iter().map(|x| x * x).sum();
    let zero = Complex64::new(0.0, 0.0);
    let mut u = vec![vec![zero; d]; d];
    let mut p = vec![zero; d];
    if xi2 == 0.0 {
        let inv = Complex64::new(1.0, 0.0) / lambda;
        for (j, row) in u.iter_mut().enumerate() {
            row[j] = inv;
        }
        return (u, p);
    }
    let denom = Complex64::new(1.0, 0.0) / (lambda + xi2);
    for j in 0..d {
        for k in 0..d {
            let proj = if xo2 == 0.0 {
                if j == k { 1.0 } else { 0.0 }
            } else {
                let cross = xi_odd[j] * xi_odd[k] / xo2;
                if j == k { 1.0 - cross } else { -cross }
            };
            u[j][k] = denom * proj;
        }
        if xo2 > 0.0 {
            p[j] = Complex64::new(0.0, -xi_odd[j] / xo2);
        }
    }
    (u, p)
}

struct ModeTables {
    even: Vec<Vec<f64>>,
    odd: Vec<Vec<f64>>,
}

impl ModeTables {
    fn new(grid: &TorusGrid) -> Self {
        let d = grid.dim();
        ModeTables {
            even: (0..d).map(|a| grid.freqs_even(a)).collect(),
            odd: (0..d).map(|a| grid.freqs_odd(a)).collect(),
        }
    }

    fn xi2(&self, ks: &[usize]) -> f64 {
        ks.iter()
            .enumerate()
            .map(|(a, &k)| self.even[a][k] * self.even[a][k])
            .sum()
    }
}

fn require_zero_mean(g: &ScalarField) -> Result<()> {
    let mean = g.mean().norm();
    let scale = g.max_abs().max(1e-300);
    if mean > MEAN_TOL * scale {
        return Err(Error::NonzeroMean(mean));
    }
    Ok(())
}

/// Exact mode-wise solve. Data slots may be any mix of (F, f, g); g needs
/// zero mean and no content on modes whose sampled first derivatives all
/// vanish. Returns the unique decaying-representative solution with
/// mean-zero pressure.
pub fn solve_whole_space(rhs: &RhsTriple, lambda: &ResolventParam) -> Result<WholeSpaceSolution> {
    let grid = rhs.grid()?.as_torus()?.clone();
    let d = grid.dim();
    if let Some(g) = &rhs.div {
        require_zero_mean(g)?;
    }
    let g_scale = rhs.div.as_ref().map_or(0.0, |g| g.max_abs()).max(1e-300);
    let tables = ModeTables::new(&grid);

    let force_spec = rhs.force.as_ref().map(fft::forward_vector).transpose()?;
    let stress_spec: Option<Vec<Vec<Spectrum>>> = rhs
        .stress
        .as_ref()
        .map(|f| {
            (0..d)
                .map(|j| (0..d).map(|k| fft::forward(f.comp(j, k))).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let g_spec = rhs.div.as_ref().map(fft::forward).transpose()?;

    let mut u_spec: Vec<Spectrum> = (0..d).map(|_| Spectrum::zeros(grid.clone())).collect();
    let mut p_spec = Spectrum::zeros(grid.clone());

    let shape = grid.shape();
    let total = grid.len();
    let mut ks = vec![0usize; d];
    for flat in 0..total {
        let mut rem = flat;
        for a in (0..d).rev() {
            ks[a] = rem % shape[a];
            rem /= shape[a];
        }
        let xi2 = tables.xi2(&ks);

        // data_k = F̂_k + i ξ_ℓ f̂_ℓk at this mode
        let mut data = [Complex64::new(0.0, 0.0); 3];
        if let Some(fs) = &force_spec {
            for k in 0..d {
                data[k] += fs[k].coef().as_slice().unwrap()[flat];
            }
        }
        if let Some(ss) = &stress_spec {
            for k in 0..d {
                for l in 0..d {
                    let xi_l = tables.odd[l][ks[l]];
                    data[k] += Complex64::new(0.0, xi_l) * ss[l][k].coef().as_slice().unwrap()[flat];
                }
            }
        }

        let mut u_mode = [Complex64::new(0.0, 0.0); 3];
        let mut p_mode = Complex64::new(0.0, 0.0);
        let ghat = g_spec
            .as_ref()
            .map_or(Complex64::new(0.0, 0.0), |gs| gs.coef().as_slice().unwrap()[flat]);
        if xi2 == 0.0 {
            // Zero mode: pure lambda lift; ĝ(0) ≈ 0 was checked up front.
            for k in 0..d {
                u_mode[k] = data[k] / lambda.lambda;
            }
        } else {
            let denom = Complex64::new(1.0, 0.0) / (lambda.lambda + xi2);
            let mut xo2 = 0.0f64;
            for a in 0..d {
                let x = tables.odd[a][ks[a]];
                xo2 += x * x;
            }
            if xo2 == 0.0 {
                // All first derivatives vanish here (pure Nyquist mode), so
                // neither pressure nor divergence can act.
                if ghat.norm() > MEAN_TOL * g_scale {
                    return Err(Error::UnresolvableDivergence(ghat.norm()));
                }
                for j in 0..d {
                    u_mode[j] = denom * data[j];
                }
            } else {
                let mut xd = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    xd += Complex64::new(0.0, tables.odd[j][ks[j]]) * data[j];
                }
                p_mode = ((lambda.lambda + xi2) * ghat - xd) / xo2;
                for j in 0..d {
                    let xj = Complex64::new(0.0, tables.odd[j][ks[j]]);
                    u_mode[j] = denom * (data[j] - xj * p_mode);
                }
            }
        }
        for j in 0..d {
            u_spec[j].coef_mut().as_slice_mut().unwrap()[flat] = u_mode[j];
        }
        p_spec.coef_mut().as_slice_mut().unwrap()[flat] = p_mode;
    }

    Ok(WholeSpaceSolution {
        u: fft::backward_vector(&u_spec)?,
        p: fft::backward(&p_spec),
        lambda: *lambda,
    })
}

/// ΔG = g on the torus; g must have zero mean, Ĝ(0) = 0.
pub fn poisson_solve(g: &ScalarField) -> Result<ScalarField> {
    let grid = g.grid().as_torus()?.clone();
    require_zero_mean(g)?;
    let mut spec = fft::forward(g)?;
    let tables = ModeTables::new(&grid);
    for (idx, v) in spec.coef_mut().indexed_iter_mut() {
        let xi2 = tables.xi2(idx.slice());
        *v = if xi2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            -*v / xi2
        };
    }
    Ok(fft::backward(&spec))
}

/// Helmholtz (Leray) projection onto fields whose sampled divergence
/// vanishes. Uses the first-derivative (odd) frequency convention, so it is
/// the identity wherever ξ̃ = 0: on the zero mode and on pure Nyquist modes,
/// whose sampled divergence is zero already.
pub fn leray_project(v: &VectorField) -> Result<VectorField> {
    let grid = v.grid().as_torus()?.clone();
    let d = grid.dim();
    let tables = ModeTables::new(&grid);
    let specs = fft::forward_vector(v)?;
    let mut out: Vec<Spectrum> = (0..d).map(|_| Spectrum::zeros(grid.clone())).collect();
    let total = grid.len();
    let shape = grid.shape();
    let mut ks = vec![0usize; d];
    for flat in 0..total {
        let mut rem = flat;
        for a in (0..d).rev() {
            ks[a] = rem % shape[a];
            rem /= shape[a];
        }
        let mut xo2 = 0.0f64;
        for a in 0..d {
            let x = tables.odd[a][ks[a]];
            xo2 += x * x;
        }
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                let vk = specs[k].coef().as_slice().unwrap()[flat];
                if xo2 == 0.0 {
                    if j == k {
                        acc += vk;
                    }
                } else {
                    let cross = tables.odd[j][ks[j]] * tables.odd[k][ks[k]] / xo2;
                    let proj = if j == k { 1.0 - cross } else { -cross };
                    acc += proj * vk;
                }
            }
            out[j].coef_mut().as_slice_mut().unwrap()[flat] = acc;
        }
    }
    fft::backward_vector(&out)
}

/// Pointwise residual of the momentum and divergence equations, computed
/// through the generic differential operators rather than the solver's own
/// multiplier path.
#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub momentum: VectorField,
    pub divergence: ScalarField,
    pub momentum_rel: f64,
    pub divergence_rel: f64,
}

pub fn residual(
    u: &VectorField,
    p: &ScalarField,
    rhs: &RhsTriple,
    lambda: &ResolventParam,
) -> Result<ResidualReport> {
    let d = u.dim();
    let mut mom_comps = Vec::with_capacity(d);
    let mut mom_scale = 0.0f64;
    for j in 0..d {
        let lap = deriv::laplacian(u.comp(j))?;
        let dp = deriv::partial(p, j)?;
        let mut r = lap
            .scale(Complex64::new(-1.0, 0.0))
            .add(&dp)?
            .add(&u.comp(j).scale(lambda.lambda))?;
        mom_scale += norms::lq_norm(&lap, 2.0)?
            + norms::lq_norm(&dp, 2.0)?
            + lambda.lambda.norm() * norms::lq_norm(u.comp(j), 2.0)?;
        if let Some(force) = &rhs.force {
            r = r.sub(force.comp(j))?;
            mom_scale += norms::lq_norm(force.comp(j), 2.0)?;
        }
        if let Some(stress) = &rhs.stress {
            for l in 0..d {
                let dfl = deriv::partial(stress.comp(l, j), l)?;
                r = r.sub(&dfl)?;
                mom_scale += norms::lq_norm(&dfl, 2.0)?;
            }
        }
        mom_comps.push(r);
    }
    let momentum = VectorField::from_components(mom_comps)?;

    let mut div = deriv::divergence(u)?;
    let mut div_scale = norms::lq_norm(&div, 2.0)?;
    if let Some(g) = &rhs.div {
        div = div.sub(g)?;
        div_scale += norms::lq_norm(g, 2.0)?;
    }

    let momentum_rel = norms::lq_norm_vec(&momentum, 2.0)? / mom_scale.max(1e-300);
    let divergence_rel = norms::lq_norm(&div, 2.0)? / div_scale.max(1e-300);
    Ok(ResidualReport {
        momentum,
        divergence: div,
        momentum_rel,
        divergence_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::harness::data;
    use std::f64::consts::TAU;

    fn param(re: f64, im: f64) -> ResolventParam {
        ResolventParam::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn multiplier_at_zero_frequency() {
        let lambda = Complex64::new(2.0, 1.0);
        let (u, p) = stokes_multiplier(&[0.0, 0.0], &[0.0, 0.0], lambda);
        let inv = Complex64::new(1.0, 0.0) / lambda;
        assert!((u[0][0] - inv).norm() < 1e-15 && (u[1][1] - inv).norm() < 1e-15);
        assert_eq!(u[0][1], Complex64::new(0.0, 0.0));
        assert_eq!(p[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn multiplier_projects_along_xi() {
        let xi = [1.0, 2.0];
        let (u, _) = stokes_multiplier(&xi, &xi, Complex64::new(1.0, 0.0));
        // U ξ = 0: the velocity symbol annihilates gradients.
        for j in 0..2 {
            let v: Complex64 = (0..2).map(|k| u[j][k] * xi[k]).sum();
            assert!(v.norm() < 1e-15);
        }
    }

    #[test]
    fn cosine_forcing_closed_form() {
        // F = (cos x₂, 0), λ = 1: u = (cos x₂ / 2, 0), p = 0.
        let grid = TorusGrid::cubic(2, 16, TAU).unwrap();
        let force = VectorField::from_components(vec![
            ScalarField::from_fn(grid.clone(), |x| Complex64::new(x[1].cos(), 0.0)),
            ScalarField::zeros(grid.clone()),
        ])
        .unwrap();
        let sol = solve_whole_space(&RhsTriple::from_force(force), &param(1.0, 0.0)).unwrap();
        let expect = ScalarField::from_fn(grid, |x| Complex64::new(0.5 * x[1].cos(), 0.0));
        assert!(sol.u.comp(0).sub(&expect).unwrap().max_abs() < 1e-12);
        assert!(sol.u.comp(1).max_abs() < 1e-13);
        assert!(sol.p.max_abs() < 1e-13);
    }

    #[test]
    fn divergence_data_closed_form() {
        // g = cos x₁, λ = 1: G = −cos x₁, u = (sin x₁, 0), p = 2 cos x₁.
        let grid = TorusGrid::cubic(2, 16, TAU).unwrap();
        let g = ScalarField::from_fn(grid.clone(), |x| Complex64::new(x[0].cos(), 0.0));
        let pot = poisson_solve(&g).unwrap();
        let expect_pot = ScalarField::from_fn(grid.clone(), |x| Complex64::new(-x[0].cos(), 0.0));
        assert!(pot.sub(&expect_pot).unwrap().max_abs() < 1e-13);

        let rhs = RhsTriple { force: None, stress: None, div: Some(g) };
        let sol = solve_whole_space(&rhs, &param(1.0, 0.0)).unwrap();
        let expect_u = ScalarField::from_fn(grid.clone(), |x| Complex64::new(x[0].sin(), 0.0));
        let expect_p = ScalarField::from_fn(grid, |x| Complex64::new(2.0 * x[0].cos(), 0.0));
        assert!(sol.u.comp(0).sub(&expect_u).unwrap().max_abs() < 1e-12);
        assert!(sol.u.comp(1).max_abs() < 1e-13);
        assert!(sol.p.sub(&expect_p).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn nonzero_mean_divergence_is_rejected() {
        let grid = TorusGrid::cubic(2, 8, TAU).unwrap();
        let g = ScalarField::from_fn(grid, |x| Complex64::new(1.0 + x[0].cos(), 0.0));
        let rhs = RhsTriple { force: None, stress: None, div: Some(g) };
        assert!(matches!(
            solve_whole_space(&rhs, &param(1.0, 0.0)),
            Err(Error::NonzeroMean(_))
        ));
    }

    #[test]
    fn random_rhs_solves_to_machine_precision() {
        let grid = TorusGrid::cubic(2, 32, TAU).unwrap();
        let lambda = param(0.3, 2.0);
        for seed in 0..3u64 {
            let rhs = data::band_limited_rhs(&grid, seed, true, true, true).unwrap();
            let sol = solve_whole_space(&rhs, &lambda).unwrap();
            let rep = residual(&sol.u, &sol.p, &rhs, &lambda).unwrap();
            assert!(rep.momentum_rel < 1e-12, "momentum residual {}", rep.momentum_rel);
            assert!(rep.divergence_rel < 1e-12, "divergence residual {}", rep.divergence_rel);
            // Pressure mean is pinned to zero.
            assert!(sol.p.mean().norm() < 1e-13);
        }
    }

    #[test]
    fn leray_is_idempotent_and_divergence_free() {
        let grid = TorusGrid::cubic(2, 32, TAU).unwrap();
        let v = data::band_limited_vector(&grid, 7, 8).unwrap();
        let pv = leray_project(&v).unwrap();
        let ppv = leray_project(&pv).unwrap();
        let div = deriv::divergence(&pv).unwrap();
        let scale = norms::lq_norm_vec(&v, 2.0).unwrap();
        assert!(norms::lq_norm(&div, 2.0).unwrap() < 1e-11 * scale);
        assert!(
            pv.sub(&ppv).unwrap().max_abs() < 1e-12 * v.max_abs(),
            "projection not idempotent"
        );
        // Gradients are annihilated.
        let phi = data::band_limited_scalar(&grid, 11, 8).unwrap();
        let grad = deriv::gradient(&phi).unwrap();
        let pg = leray_project(&grad).unwrap();
        assert!(norms::lq_norm_vec(&pg, 2.0).unwrap() < 1e-11 * norms::lq_norm_vec(&grad, 2.0).unwrap());
    }

    #[test]
    fn sesquilinear_energy_identity() {
        // ⟨∇u,∇w⟩ + λ⟨u,w⟩ = ⟨F,w⟩ for div-free F and div-free test field w.
        let grid = TorusGrid::cubic(2, 32, TAU).unwrap();
        let lambda = param(0.5, 1.5);
        let force = leray_project(&data::band_limited_vector(&grid, 3, 8).unwrap()).unwrap();
        let w_data = leray_project(&data::band_limited_vector(&grid, 5, 8).unwrap()).unwrap();
        let sol = solve_whole_space(&RhsTriple::from_force(force.clone()), &lambda).unwrap();
        let w = solve_whole_space(&RhsTriple::from_force(w_data), &lambda).unwrap();

        let mut grad_pair = Complex64::new(0.0, 0.0);
        for j in 0..2 {
            let gu = deriv::gradient(sol.u.comp(j)).unwrap();
            let gw = deriv::gradient(w.u.comp(j)).unwrap();
            grad_pair += norms::pair_sesquilinear(&gu, &gw).unwrap();
        }
        let lhs = grad_pair + lambda.lambda * norms::pair_sesquilinear(&sol.u, &w.u).unwrap();
        let rhs_pair = norms::pair_sesquilinear(&force, &w.u).unwrap();
        assert!(
            (lhs - rhs_pair).norm() <= 1e-10 * rhs_pair.norm(),
            "identity off by {}",
            (lhs - rhs_pair).norm() / rhs_pair.norm()
        );
    }
}
