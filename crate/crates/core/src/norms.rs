//! Harmonic alpha-Bloch seminorms and norms, little-Bloch boundary decay,
//! the growth bound behind norm-implies-uniform convergence, and a checker
//! for lower-bound pairs `|h'| + |g'| >= (1 - |z|)^{-alpha}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::disk::{one_minus_abs_sq, DiskPoint};
use crate::error::{Error, Result};
use crate::function::{AnalyticMap, HarmonicMap};
pub use crate::sup::{Budget, DecayProfile, DecayVerdict, SupEstimate, SupStatus, TracePoint};
use crate::sup::{adaptive_sup, circle_profile};

/// Exponent of the Bloch weight `(1 - |z|^2)^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Alpha(f64);

impl Alpha {
    pub const ONE: Alpha = Alpha(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Alpha(value))
        } else {
            Err(Error::InvalidParameter(format!("alpha must be positive, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

pub(crate) fn weight(one_minus_sq: f64, alpha: Alpha) -> f64 {
    if alpha.0 == 1.0 {
        one_minus_sq
    } else {
        one_minus_sq.powf(alpha.0)
    }
}

pub(crate) fn intensity_c(f: &HarmonicMap, alpha: Alpha, z: Complex64) -> Result<f64> {
    let dh = f.h.jet_c(z)?.1;
    let dg = f.g.jet_c(z)?.1;
    Ok(weight(one_minus_abs_sq(z), alpha) * (dh.norm() + dg.norm()))
}

/// `(1 - |z|^2)^alpha (|f_z(z)| + |f_zbar(z)|)`.
pub fn local_intensity(f: &HarmonicMap, alpha: Alpha, z: DiskPoint) -> Result<f64> {
    intensity_c(f, alpha, z.to_complex())
}

/// `|||f|||_{HB(alpha)}`, the supremum of [`local_intensity`] over the disk.
pub fn seminorm(f: &HarmonicMap, alpha: Alpha, budget: &Budget) -> Result<SupEstimate> {
    adaptive_sup(|z| intensity_c(f, alpha, z), budget)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate {
    /// `|f(0)| + |||f|||`.
    pub value: f64,
    pub at_origin: f64,
    pub seminorm: SupEstimate,
}

impl NormEstimate {
    pub fn status(&self) -> SupStatus {
        self.seminorm.status
    }
}

/// `||f|| = |f(0)| + |||f|||`; inherits the seminorm status.
pub fn norm(f: &HarmonicMap, alpha: Alpha, budget: &Budget) -> Result<NormEstimate> {
    let at_origin = f.eval(DiskPoint::ORIGIN)?.norm();
    let seminorm = seminorm(f, alpha, budget)?;
    Ok(NormEstimate {
        value: at_origin + seminorm.value,
        at_origin,
        seminorm,
    })
}

/// Circle maxima of the intensity at each radius, with a verdict on whether
/// they vanish at the boundary (membership in the little space).
pub fn little_bloch_profile(
    f: &HarmonicMap,
    alpha: Alpha,
    radii: &[f64],
    budget: &Budget,
) -> Result<DecayProfile> {
    circle_profile(|z| intensity_c(f, alpha, z), radii, budget)
}

/// `I_alpha(s) = int_0^1 (1 - s t)^{-alpha} dt`, with `I_alpha(0) = 1`.
pub fn growth_integral(alpha: Alpha, s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    let l = (-s).ln_1p();
    if alpha.0 == 1.0 {
        -l / s
    } else {
        ((1.0 - alpha.0) * l).exp_m1() / ((alpha.0 - 1.0) * s)
    }
}

/// Bound on `|f(z) - f(0)|` given the norm `||f||` and `f(0)`:
/// `|z| (||f|| - |f(0)|) I_alpha(|z|)`.
pub fn growth_bound(norm_value: f64, f0: Complex64, alpha: Alpha, z: DiskPoint) -> Result<f64> {
    if norm_value.is_nan() || norm_value < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "norm must be non-negative, got {norm_value}"
        )));
    }
    let semi = (norm_value - f0.norm()).max(0.0);
    let s = z.modulus();
    Ok(s * semi * growth_integral(alpha, s))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCheck {
    pub min_ratio: f64,
    pub witness: DiskPoint,
}

impl PairCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_ratio >= 1.0 - tol
    }
}

/// Minimum over `grid` of `(|h'(z)| + |g'(z)|) (1 - |z|)^alpha`.
pub fn extremal_pair_check(
    h: &AnalyticMap,
    g: &AnalyticMap,
    alpha: Alpha,
    grid: &[DiskPoint],
) -> Result<PairCheck> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid is empty".into()));
    }
    let mut best = PairCheck {
        min_ratio: f64::INFINITY,
        witness: grid[0],
    };
    for &z in grid {
        let sum = h.deriv(z)?.norm() + g.deriv(z)?.norm();
        let ratio = sum * (1.0 - z.modulus()).powf(alpha.0);
        if ratio < best.min_ratio {
            best = PairCheck {
                min_ratio: ratio,
                witness: z,
            };
        }
    }
    Ok(best)
}
