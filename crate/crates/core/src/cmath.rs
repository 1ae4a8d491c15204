//! Small complex-arithmetic helpers that the standard library and
//! `num-complex` do not provide.

use num_complex::Complex64;

/// exp(z) - 1, accurate for small |z|.
///
/// Splits into real calls: the real part is expm1(x)·cos y - 2·sin²(y/2),
/// the imaginary part e^x·sin y. Each term is evaluated without
/// cancellation, so the result is correct to a few ulps of |expm1(z)| for
/// all z; the naive `z.exp() - 1` loses all digits for |z| ≲ 1e-8.
pub fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half_sin = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * half_sin * half_sin;
    let im = x.exp() * y.sin();
    Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_at_moderate_arguments() {
        for &z in &[
            Complex64::new(0.7, -1.3),
            Complex64::new(-2.0, 3.0),
            Complex64::new(1e-3, 1e-3),
        ] {
            let naive = z.exp() - Complex64::new(1.0, 0.0);
            let diff = (expm1(z) - naive).norm();
            assert!(diff <= 1e-15 * naive.norm().max(1.0), "z = {z}, diff = {diff}");
        }
    }

    #[test]
    fn small_argument_first_order() {
        // expm1(z) = z + z²/2 + O(z³); at |z| = 1e-9 the quadratic term is
        // 5e-19, far below the tolerance, while naive evaluation would only
        // be correct to ~1e-16 absolute.
        let z = Complex64::new(3e-10, -4e-10);
        let err = (expm1(z) - (z + z * z * 0.5)).norm();
        assert!(err < 1e-24, "err = {err}");
    }

    #[test]
    fn zero_is_exact() {
        assert_eq!(expm1(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
    }
}
