//! Closed-form vertical kernels of the boundary corrector.
//!
//! After the periodic solve on the reflection domain, the solution has a
//! spurious horizontal trace at the wall. Per horizontal frequency ξ′ the
//! corrector removes it with an explicit solution of the homogeneous
//! resolvent system on x_d > 0. Everything is built from two decay rates,
//!
//! ```text
//! b = √(λ + s²),    s = |ξ′|,    a = b − s  (computed as λ/(b + s)),
//! ```
//!
//! and the scalar kernel m0(s, x) = (e^{−bx} − e^{−sx}) / a, evaluated in the
//! cancellation-free form e^{−sx}·expm1(−a x)/a. Derivatives use the exact
//! identities
//!
//! ```text
//! m0'  = −s·m0 − e^{−bx}
//! m0'' = b²·m0 + (b+s)·e^{−sx}
//! m0''' = b²·m0' − s(b+s)·e^{−sx}
//! ```
//!
//! rather than chained differences, so a sign slip in one routine cannot
//! silently cancel in another; the tests difference them numerically.

use crate::cmath;
use crate::error::Result;
use crate::sector::principal_sqrt;
use num_complex::Complex64;

/// Kernel bundle for one horizontal frequency magnitude s ≥ 0.
#[derive(Debug, Clone, Copy)]
pub struct ModeKernel {
    pub s: f64,
    pub lambda: Complex64,
    /// Fast decay rate √(λ + s²); Re b > 0 throughout the sector.
    pub b: Complex64,
    /// Rate gap b − s in the subtraction-free form λ/(b + s).
    pub a: Complex64,
}

impl ModeKernel {
    pub fn new(s: f64, lambda: Complex64) -> Result<Self> {
        let b = principal_sqrt(lambda + s * s)?;
        let a = lambda / (b + s);
        Ok(ModeKernel { s, lambda, b, a })
    }

    /// e^{−b x}.
    pub fn exp_fast(&self, x: f64) -> Complex64 {
        (-self.b * x).exp()
    }

    /// e^{−s x}.
    pub fn exp_slow(&self, x: f64) -> f64 {
        (-self.s * x).exp()
    }

    /// m0(s, x) = (e^{−bx} − e^{−sx})/a; vanishes at the wall.
    pub fn m0(&self, x: f64) -> Complex64 {
        cmath::expm1(-self.a * x) * self.exp_slow(x) / self.a
    }

    /// ∂_x m0; equals −1 exactly at x = 0 for every s and λ.
    pub fn dm0(&self, x: f64) -> Complex64 {
        -(self.s * self.m0(x) + self.exp_fast(x))
    }

    /// ∂_x² m0 through the second-derivative identity.
    pub fn d2m0(&self, x: f64) -> Complex64 {
        self.b * self.b * self.m0(x) + (self.b + self.s) * self.exp_slow(x)
    }

    /// ∂_x³ m0 through the third-derivative identity.
    pub fn d3m0(&self, x: f64) -> Complex64 {
        self.b * self.b * self.dm0(x) - self.s * (self.b + self.s) * self.exp_slow(x)
    }
}

/// One row/column entry of the corrector symbol: velocity rows j < d act on
/// boundary component k, row j = d − 1 is the vertical velocity, row d the
/// pressure. Defined for any real ξ′ ≠ 0 so it can be differenced in ξ′.
pub fn corrector_symbol(
    d: usize,
    row: usize,
    col: usize,
    lambda: Complex64,
    xi: &[f64],
    x: f64,
) -> Complex64 {
    let s2: f64 = xi.iter().map(|v| v * v).sum();
    let s = s2.sqrt();
    let zero = Complex64::new(0.0, 0.0);
    if s == 0.0 {
        // Horizontal-constant limit: plain exponential lift, no pressure.
        if row == col && row < d - 1 {
            let q = principal_sqrt(lambda).expect("lambda validated by caller");
            return (-q * x).exp();
        }
        return zero;
    }
    let kern = ModeKernel::new(s, lambda).expect("lambda validated by caller");
    if row < d - 1 {
        let cross = xi[row] * xi[col] / s2;
        let delta = if row == col { 1.0 } else { 0.0 };
        -kern.dm0(x) * cross + (delta - cross) * kern.exp_fast(x)
    } else if row == d - 1 {
        Complex64::new(0.0, xi[col]) * kern.m0(x)
    } else {
        Complex64::new(0.0, -xi[col] / s) * (kern.b + s) * kern.exp_slow(x)
    }
}

/// Where and at which derivative order the weighted symbol sup was attained.
#[derive(Debug, Clone)]
pub struct DecayProbeReport {
    pub sup: f64,
    pub arg_s: f64,
    pub arg_x: f64,
    pub order: Vec<usize>,
}

/// Empirical Mikhlin-type bound: sup of |s^{|α|} ∂_ξ′^α m(ξ′, x)| · (1+x) ·
/// e^{+δ s x} over the sample set, with ξ′-derivatives up to `max_order`
/// taken by central differences along the first axis direction. A finite,
/// grid-stable value is evidence of symbol decay with margin δ.
pub fn decay_probe(
    kernel: impl Fn(&[f64], f64) -> Complex64,
    dim_xi: usize,
    max_order: usize,
    delta: f64,
    s_samples: &[f64],
    x_samples: &[f64],
) -> DecayProbeReport {
    let mut best = DecayProbeReport { sup: 0.0, arg_s: 0.0, arg_x: 0.0, order: vec![0; dim_xi] };
    let orders = multi_indices(dim_xi, max_order);
    for &s in s_samples {
        let mut xi = vec![0.0; dim_xi];
        xi[0] = s;
        for &x in x_samples {
            for alpha in &orders {
                let total: usize = alpha.iter().sum();
                let v = fd_derivative(&kernel, &xi, x, alpha);
                let value = v.norm() * s.powi(total as i32) * (1.0 + x) * (delta * s * x).exp();
                if value > best.sup {
                    best = DecayProbeReport { sup: value, arg_s: s, arg_x: x, order: alpha.clone() };
                }
            }
        }
    }
    best
}

/// One probe report per (row, col) entry of the corrector symbol family.
pub type EntryReports = Vec<(usize, usize, DecayProbeReport)>;

/// Probe every entry of the corrector symbol family; returns the overall
/// report plus one per (row, col) entry.
pub fn corrector_decay_probe(
    d: usize,
    lambda: Complex64,
    delta: f64,
    s_samples: &[f64],
    x_samples: &[f64],
) -> Result<(DecayProbeReport, EntryReports)> {
    crate::sector::principal_sqrt(lambda)?;
    let dim_xi = d - 1;
    let max_order = (d - 1) / 2 + 1;
    let mut entries = Vec::new();
    let mut best: Option<DecayProbeReport> = None;
    for row in 0..=d {
        for col in 0..d - 1 {
            let rep = decay_probe(
                |xi, x| corrector_symbol(d, row, col, lambda, xi, x),
                dim_xi,
                max_order,
                delta,
                s_samples,
                x_samples,
            );
            if best.as_ref().is_none_or(|b| rep.sup > b.sup) {
                best = Some(rep.clone());
            }
            entries.push((row, col, rep));
        }
    }
    Ok((best.expect("at least one entry"), entries))
}

fn multi_indices(dim: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; dim]];
    let mut frontier = out.clone();
    for _ in 0..max_total {
        let mut next = Vec::new();
        for alpha in &frontier {
            for j in 0..dim {
                let mut a = alpha.clone();
                a[j] += 1;
                if !out.contains(&a) {
                    out.push(a.clone());
                    next.push(a);
                }
            }
        }
        frontier = next;
    }
    out
}

/// Central differences in ξ′ for |α| ≤ 2; the probe only reports a sup, so
/// second-difference noise of order ε/h² is acceptable.
fn fd_derivative(
    kernel: &impl Fn(&[f64], f64) -> Complex64,
    xi: &[f64],
    x: f64,
    alpha: &[usize],
) -> Complex64 {
    let total: usize = alpha.iter().sum();
    let s: f64 = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = 1e-2 * s.max(1.0);
    let at = |shifts: &[(usize, f64)]| {
        let mut p = xi.to_vec();
        for &(j, dv) in shifts {
            p[j] += dv;
        }
        kernel(&p, x)
    };
    match total {
        0 => kernel(xi, x),
        1 => {
            let j = alpha.iter().position(|&a| a > 0).unwrap();
            (at(&[(j, h)]) - at(&[(j, -h)])) / (2.0 * h)
        }
        2 => {
            if let Some(j) = alpha.iter().position(|&a| a == 2) {
                (at(&[(j, h)]) - 2.0 * kernel(xi, x) + at(&[(j, -h)])) / (h * h)
            } else {
                let i = alpha.iter().position(|&a| a == 1).unwrap();
                let j = alpha.iter().rposition(|&a| a == 1).unwrap();
                (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                    + at(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h)
            }
        }
        _ => panic!("probe derivatives implemented up to order 2, got {total}"),
    }
}
