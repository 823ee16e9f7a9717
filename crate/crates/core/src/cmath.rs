//! Complex `log1p` / `expm1`, needed for the closed-form primitives when the
//! argument of the logarithm is close to 1.

use num_complex::Complex64;

/// Principal `ln(1 + w)`.
pub(crate) fn log1p(w: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    Complex64::new(re, im)
}

/// `exp(u) - 1`.
pub(crate) fn expm1(u: Complex64) -> Complex64 {
    let half = (0.5 * u.im).sin();
    let re = u.re.exp_m1() * u.im.cos() - 2.0 * half * half;
    let im = u.re.exp() * u.im.sin();
    Complex64::new(re, im)
}
