//! Sector geometry and resolvent parameters.
//!
//! The resolvent parameter lives in Σ_θ = { z ≠ 0 : |arg z| < π − θ } for an
//! aperture parameter θ ∈ (0, π/2). Everything downstream needs the principal
//! square root √λ, whose real part is bounded below by |λ|^{1/2}·cos((π−θ)/2)
//! on the sector; that positivity is what makes the half-space kernels decay.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Sector Σ_θ (aperture π − θ around the positive real axis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    /// θ ∈ (0, π/2); the sector is |arg λ| < π − θ.
    pub theta: f64,
    /// Optional inner radius: when set, |λ| ≥ delta is also required.
    pub delta: Option<f64>,
}

impl Sector {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParam(format!(
                "theta must lie in (0, pi/2), got {theta}"
            )));
        }
        Ok(Sector { theta, delta: None })
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    /// Membership test with the principal argument; λ = 0 is always outside.
    pub fn contains(&self, lambda: Complex64) -> bool {
        if lambda == Complex64::new(0.0, 0.0) {
            return false;
        }
        if let Some(delta) = self.delta {
            if lambda.norm() < delta {
                return false;
            }
        }
        lambda.arg().abs() < std::f64::consts::PI - self.theta
    }

    /// λ = |λ|·e^{i·frac·(π−θ)}: polar coordinates along the sector rays,
    /// frac ∈ (−1, 1). Used by sweep configs ("angle fractions").
    pub fn lambda_at(&self, abs: f64, frac: f64) -> Complex64 {
        Complex64::from_polar(abs, frac * (std::f64::consts::PI - self.theta))
    }
}

/// Principal square root: branch cut on the negative real axis, Re √z ≥ 0.
///
/// On the cut itself (z real negative) the root with positive imaginary part
/// is returned. Errors on z = 0 so callers never propagate a silent 0/0.
pub fn principal_sqrt(z: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::SqrtOfZero);
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Ok(Complex64::new(0.0, (-z.re).sqrt()));
    }
    Ok(z.sqrt())
}

/// λ together with its cached principal root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventParam {
    pub lambda: Complex64,
    pub sqrt_lambda: Complex64,
}

impl ResolventParam {
    /// Accepts any λ ≠ 0 off the negative real axis; sector membership is
    /// checked separately where a θ is in scope.
    pub fn new(lambda: Complex64) -> Result<Self> {
        let sqrt_lambda = principal_sqrt(lambda)?;
        Ok(ResolventParam { lambda, sqrt_lambda })
    }

    pub fn in_sector(lambda: Complex64, sector: &Sector) -> Result<Self> {
        if !sector.contains(lambda) {
            return Err(Error::OutsideSector(lambda));
        }
        Self::new(lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sector_membership() {
        let sector = Sector::new(PI / 4.0).unwrap();
        assert!(sector.contains(Complex64::new(1.0, 0.0)));
        assert!(sector.contains(Complex64::from_polar(2.0, 0.9 * (PI - PI / 4.0))));
        assert!(!sector.contains(Complex64::from_polar(2.0, 1.1 * (PI - PI / 4.0))));
        assert!(!sector.contains(Complex64::new(-1.0, 0.0)));
        assert!(!sector.contains(Complex64::new(0.0, 0.0)));
        let with_delta = sector.with_delta(0.5);
        assert!(!with_delta.contains(Complex64::new(0.25, 0.0)));
        assert!(with_delta.contains(Complex64::new(0.75, 0.0)));
    }

    #[test]
    fn sqrt_branch() {
        // sqrt(i) = e^{iπ/4}; frozen expected value.
        let r = principal_sqrt(Complex64::new(0.0, 1.0)).unwrap();
        let expected = Complex64::new(0.5f64.sqrt(), 0.5f64.sqrt());
        assert!((r - expected).norm() < 1e-15);
        // On the cut: positive imaginary root.
        let c = principal_sqrt(Complex64::new(-4.0, 0.0)).unwrap();
        assert!((c - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        let c = principal_sqrt(Complex64::new(-4.0, -0.0)).unwrap();
        assert!((c - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!(principal_sqrt(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn sqrt_real_part_positive_on_sector() {
        let sector = Sector::new(PI / 4.0).unwrap();
        let floor = |abs: f64| abs.sqrt() * ((PI - sector.theta) / 2.0).cos();
        for i in 0..200 {
            let abs = 10f64.powf(-3.0 + 6.0 * (i as f64) / 199.0);
            for frac in [-0.99, -0.5, 0.0, 0.5, 0.99] {
                let lam = sector.lambda_at(abs, frac);
                let p = ResolventParam::in_sector(lam, &sector).unwrap();
                assert!(
                    p.sqrt_lambda.re >= floor(abs) * (1.0 - 1e-12),
                    "Re sqrt({lam}) = {} below sector floor {}",
                    p.sqrt_lambda.re,
                    floor(abs)
                );
            }
        }
    }

    #[test]
    fn sqrt_is_locally_continuous() {
        // 100 nearby sectorial pairs: |h| ≤ 1e-8|z| must move the root by
        // ≤ 1e-7|√z| (no branch-cut crossing inside the sector).
        let sector = Sector::new(PI / 4.0).unwrap();
        for i in 0..100 {
            let t = i as f64 / 99.0;
            let z = sector.lambda_at(10f64.powf(-2.0 + 4.0 * t), 0.95 - 1.9 * t);
            let h = z * Complex64::new(0.6e-8, -0.8e-8);
            let a = principal_sqrt(z).unwrap();
            let b = principal_sqrt(z + h).unwrap();
            assert!((a - b).norm() <= 1e-7 * a.norm());
        }
    }
}
