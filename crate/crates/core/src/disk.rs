//! Geometry of the open unit disk: automorphisms, the pseudohyperbolic and
//! hyperbolic distances, separation tests and quasi-uniform probe lattices.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this to the unit circle are rejected.
pub const BOUNDARY_GUARD: f64 = 1e-15;

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct DiskPoint {
    re: f64,
    im: f64,
}

impl DiskPoint {
    pub const ORIGIN: DiskPoint = DiskPoint { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) || re.hypot(im) >= 1.0 - BOUNDARY_GUARD {
            return Err(Error::OutsideDisk { re, im });
        }
        Ok(Self { re, im })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::from_complex(Complex64::from_polar(r, theta))
    }

    /// Real-axis shorthand, mostly useful in tests and examples.
    pub fn real(x: f64) -> Result<Self> {
        Self::new(x, 0.0)
    }

    pub fn re(self) -> f64 {
        self.re
    }

    pub fn im(self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn modulus(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// `1 - |z|^2`, factored to keep digits near the boundary.
    pub fn one_minus_modulus_sq(self) -> f64 {
        one_minus_abs_sq(self.to_complex())
    }
}

impl From<DiskPoint> for Complex64 {
    fn from(p: DiskPoint) -> Self {
        p.to_complex()
    }
}

impl From<DiskPoint> for [f64; 2] {
    fn from(p: DiskPoint) -> Self {
        [p.re, p.im]
    }
}

impl TryFrom<[f64; 2]> for DiskPoint {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        DiskPoint::new(v[0], v[1])
    }
}

/// `1 - |w|^2` for an arbitrary complex number.
pub(crate) fn one_minus_abs_sq(w: Complex64) -> f64 {
    let m = w.norm();
    (1.0 - m) * (1.0 + m)
}

pub(crate) fn moebius_c(a: Complex64, z: Complex64) -> Complex64 {
    (a - z) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

pub(crate) fn moebius_deriv_c(a: Complex64, z: Complex64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) - a.conj() * z;
    Complex64::new(a.norm_sqr() - 1.0, 0.0) / (d * d)
}

/// The involutive automorphism `psi_a(z) = (a - z) / (1 - conj(a) z)`.
pub fn moebius(a: DiskPoint, z: DiskPoint) -> Complex64 {
    moebius_c(a.into(), z.into())
}

/// `psi_a'(z) = (|a|^2 - 1) / (1 - conj(a) z)^2`.
pub fn moebius_deriv(a: DiskPoint, z: DiskPoint) -> Complex64 {
    moebius_deriv_c(a.into(), z.into())
}

/// Pseudohyperbolic distance `|z - w| / |1 - conj(z) w|`.
pub fn pseudo_hyperbolic(z: DiskPoint, w: DiskPoint) -> f64 {
    pseudo_hyperbolic_c(z.into(), w.into())
}

pub(crate) fn pseudo_hyperbolic_c(z: Complex64, w: Complex64) -> f64 {
    let num = (z - w).norm();
    if num == 0.0 {
        return 0.0;
    }
    num / (Complex64::new(1.0, 0.0) - z.conj() * w).norm()
}

/// `1 - rho(z, w)^2` through `(1 - |z|^2)(1 - |w|^2) / |1 - conj(z) w|^2`,
/// which stays accurate when rho is close to 1.
pub fn one_minus_pseudo_sq(z: DiskPoint, w: DiskPoint) -> f64 {
    let zc = z.to_complex();
    let wc = w.to_complex();
    let d = (Complex64::new(1.0, 0.0) - zc.conj() * wc).norm_sqr();
    z.one_minus_modulus_sq() * w.one_minus_modulus_sq() / d
}

/// Hyperbolic distance `artanh rho(z, w)`.
pub fn hyperbolic(z: DiskPoint, w: DiskPoint) -> f64 {
    let rho = pseudo_hyperbolic(z, w);
    if rho == 0.0 {
        return 0.0;
    }
    // 1 - rho from the factored identity; artanh = (ln(1+rho) - ln(1-rho)) / 2
    let one_minus_rho = one_minus_pseudo_sq(z, w) / (1.0 + rho);
    0.5 * (rho.ln_1p() - one_minus_rho.ln())
}

/// True iff every pair of distinct entries is more than `r` apart in rho.
pub fn is_r_separated(points: &[DiskPoint], r: f64) -> Result<bool> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "separation constant must lie in (0, 1), got {r}"
        )));
    }
    if points.is_empty() {
        return Err(Error::InvalidParameter("point list is empty".into()));
    }
    for (i, &z) in points.iter().enumerate() {
        for &w in &points[i + 1..] {
            if pseudo_hyperbolic(z, w) <= r {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Pseudohyperbolic distance between `s` and `s e^{i gamma}`.
fn chord_rho(s: f64, gamma: f64) -> f64 {
    let num = 2.0 * s * (0.5 * gamma).sin();
    let den = (Complex64::new(1.0, 0.0) - Complex64::from_polar(s * s, gamma)).norm();
    num / den
}

/// A deterministic lattice such that every point with `|z| <= r_max` lies
/// within pseudohyperbolic distance `step` of some lattice point.
///
/// Circles are placed at equal hyperbolic spacing and each circle carries as
/// many equally spaced points as its hyperbolic length requires. The radial
/// and angular half-gaps each use less than half of the hyperbolic budget
/// `artanh(step)`, so the triangle inequality gives strict coverage.
pub fn hyperbolic_lattice(r_max: f64, step: f64) -> Result<Vec<DiskPoint>> {
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lattice radius must lie in (0, 1), got {r_max}"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lattice step must be positive, got {step}"
        )));
    }
    let budget = step.min(1.0 - 1e-12).atanh();
    let spacing = 0.95 * budget;
    let half = 0.5 * spacing;
    let target = r_max.atanh();
    let rho_half = half.tanh();

    let mut points = vec![DiskPoint::ORIGIN];
    let mut ring = 0usize;
    while (ring as f64) * spacing + half < target {
        ring += 1;
        let s = (ring as f64 * spacing).tanh();
        // largest angular half-gap gamma with chord_rho(s, gamma) <= rho_half
        let (mut lo, mut hi) = (0.0f64, PI);
        if chord_rho(s, hi) <= rho_half {
            lo = hi;
        } else {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if chord_rho(s, mid) <= rho_half {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let count = ((PI / lo).ceil() as usize).max(1);
        let offset = if ring % 2 == 1 { PI / count as f64 } else { 0.0 };
        for j in 0..count {
            let theta = offset + 2.0 * PI * j as f64 / count as f64;
            points.push(DiskPoint::from_polar(s, theta)?);
        }
    }
    Ok(points)
}
