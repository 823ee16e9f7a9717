//! Analytic maps as expression trees with exact structural derivatives, and
//! harmonic functions `f = h + conj(g)` built from pairs of them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::cmath::{expm1, log1p};
use crate::disk::{moebius_c, moebius_deriv_c, one_minus_abs_sq, DiskPoint};
use crate::error::{Error, Result};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Truncated power series `sum_{n <= degree} c_n z^n`, treated as a function
/// on the disk only.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    pub coeffs: Vec<Complex64>,
    pub degree: usize,
    /// Declared bound `|c_n| <= M` for every `n`, used for tail estimates.
    pub coeff_bound: Option<f64>,
}

impl PowerSeries {
    fn active(&self) -> &[Complex64] {
        let n = (self.degree + 1).min(self.coeffs.len());
        &self.coeffs[..n]
    }

    /// Bound on the discarded tail at `|z| <= r`: `M r^{N+1} / (1 - r)`.
    pub fn tail_bound(&self, r: f64) -> Option<f64> {
        let m = self.coeff_bound?;
        Some(m * r.powi(self.degree as i32 + 1) / (1.0 - r))
    }

    /// Value at `z` together with the tail bound at `|z|`, when one is declared.
    pub fn eval_with_tail(&self, z: DiskPoint) -> (Complex64, Option<f64>) {
        let (v, _) = horner(self.active(), z.to_complex());
        (v, self.tail_bound(z.modulus()))
    }
}

/// Finite expression tree for a function analytic on the unit disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticMap {
    /// `sum c_k z^k`; entire, so no disk restriction.
    Polynomial(Vec<Complex64>),
    /// `rotation * psi_a(z)`.
    Moebius { a: DiskPoint, rotation: Complex64 },
    /// `rotation * prod_k psi_{a_k}(z)`.
    Blaschke {
        zeros: Vec<DiskPoint>,
        rotation: Complex64,
    },
    PowerSeries(PowerSeries),
    Scale(Box<AnalyticMap>, Complex64),
    Compose(Box<AnalyticMap>, Box<AnalyticMap>),
    Product(Box<AnalyticMap>, Box<AnalyticMap>),
    AffineCombo(Vec<(Complex64, AnalyticMap)>),
    /// Primitive vanishing at 0 of `-(1 - |a|^2)^alpha (1 - conj(a) z)^{-2 alpha}`,
    /// a continuous branch of `(psi_a')^alpha`.
    AntiderivativePower { a: DiskPoint, alpha: f64 },
    /// Primitive vanishing at 0 of `(1 - conj(zeta) z)^{-alpha}`, `|zeta| = 1`:
    /// the boundary limit of the family above, singular at `zeta`.
    BoundaryPrimitive { zeta: Complex64, alpha: f64 },
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = ZERO;
    let mut d = ZERO;
    for &c in coeffs.iter().rev() {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

fn require_disk(node: &'static str, z: Complex64) -> Result<()> {
    if z.norm() < 1.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { node, point: z })
    }
}

fn is_unimodular(u: Complex64) -> bool {
    (u.norm_sqr() - 1.0).abs() <= 4.0 * f64::EPSILON
}

fn is_unimodular_monomial(c: &[Complex64]) -> bool {
    match c.split_last() {
        Some((lead, rest)) => !rest.is_empty() && rest.iter().all(|x| *x == ZERO) && is_unimodular(*lead),
        None => false,
    }
}

/// `1 - |psi_a(z)|^2 = (1 - |a|^2)(1 - |z|^2) / |1 - conj(a) z|^2`.
fn moebius_defect(a: DiskPoint, z: Complex64, dz: f64) -> f64 {
    a.one_minus_modulus_sq() * dz / (ONE - a.to_complex().conj() * z).norm_sqr()
}

fn check_unit(what: &str, u: Complex64) -> Result<()> {
    if (u.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "{what} must have modulus 1, got |{u}| = {}",
            u.norm()
        )));
    }
    Ok(())
}

/// Value and derivative of the primitive of `(1 - b z)^{-beta}` vanishing at 0,
/// assuming `Re(1 - b z) > 0`.
fn power_primitive(b: Complex64, beta: f64, z: Complex64) -> (Complex64, Complex64) {
    if b == ZERO {
        return (z, ONE);
    }
    let log = log1p(-b * z);
    let deriv = (log * -beta).exp();
    let value = if beta == 1.0 {
        -log / b
    } else {
        expm1(log * (1.0 - beta)) / (b * (beta - 1.0))
    };
    (value, deriv)
}

impl AnalyticMap {
    pub fn zero() -> Self {
        AnalyticMap::Polynomial(Vec::new())
    }

    pub fn constant(c: Complex64) -> Self {
        AnalyticMap::Polynomial(vec![c])
    }

    pub fn identity() -> Self {
        AnalyticMap::Polynomial(vec![ZERO, ONE])
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![ZERO; n + 1];
        c[n] = ONE;
        AnalyticMap::Polynomial(c)
    }

    pub fn polynomial(coeffs: Vec<Complex64>) -> Self {
        AnalyticMap::Polynomial(coeffs)
    }

    pub fn moebius(a: DiskPoint) -> Self {
        AnalyticMap::Moebius { a, rotation: ONE }
    }

    pub fn rotated_moebius(a: DiskPoint, rotation: Complex64) -> Result<Self> {
        check_unit("rotation", rotation)?;
        Ok(AnalyticMap::Moebius { a, rotation })
    }

    pub fn blaschke(zeros: Vec<DiskPoint>, rotation: Complex64) -> Result<Self> {
        check_unit("rotation", rotation)?;
        Ok(AnalyticMap::Blaschke { zeros, rotation })
    }

    pub fn power_series(coeffs: Vec<Complex64>, degree: usize, coeff_bound: Option<f64>) -> Self {
        AnalyticMap::PowerSeries(PowerSeries {
            coeffs,
            degree,
            coeff_bound,
        })
    }

    pub fn scale(self, factor: Complex64) -> Self {
        AnalyticMap::Scale(Box::new(self), factor)
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: AnalyticMap, inner: AnalyticMap) -> Self {
        AnalyticMap::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn product(left: AnalyticMap, right: AnalyticMap) -> Self {
        AnalyticMap::Product(Box::new(left), Box::new(right))
    }

    pub fn affine(terms: Vec<(Complex64, AnalyticMap)>) -> Self {
        AnalyticMap::AffineCombo(terms)
    }

    /// The extremal map `phi_a`: `phi_a(0) = 0` and `|phi_a'| = |psi_a'|^alpha`.
    ///
    /// The derivative is `-(1 - |a|^2)^alpha (1 - conj(a) z)^{-2 alpha}`, which
    /// equals `psi_a'` when `alpha = 1` and is continuous on the disk because
    /// `Re(1 - conj(a) z) > 0` there.
    pub fn extremal(a: DiskPoint, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(AnalyticMap::AntiderivativePower { a, alpha })
    }

    pub fn boundary_primitive(zeta: Complex64, alpha: f64) -> Result<Self> {
        check_unit("zeta", zeta)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(AnalyticMap::BoundaryPrimitive { zeta, alpha })
    }

    pub fn eval(&self, z: DiskPoint) -> Result<Complex64> {
        self.eval_c(z.to_complex())
    }

    pub fn deriv(&self, z: DiskPoint) -> Result<Complex64> {
        Ok(self.jet_c(z.to_complex())?.1)
    }

    /// Value and derivative in one pass.
    pub fn jet(&self, z: DiskPoint) -> Result<(Complex64, Complex64)> {
        self.jet_c(z.to_complex())
    }

    pub(crate) fn eval_c(&self, z: Complex64) -> Result<Complex64> {
        use AnalyticMap::*;
        Ok(match self {
            Polynomial(c) => horner(c, z).0,
            PowerSeries(s) => {
                require_disk("series", z)?;
                horner(s.active(), z).0
            }
            Moebius { a, rotation } => {
                require_disk("moebius", z)?;
                rotation * moebius_c(a.to_complex(), z)
            }
            Blaschke { zeros, rotation } => {
                require_disk("blaschke", z)?;
                zeros
                    .iter()
                    .fold(*rotation, |acc, a| acc * moebius_c(a.to_complex(), z))
            }
            Scale(inner, c) => c * inner.eval_c(z)?,
            Compose(outer, inner) => outer.eval_c(inner.eval_c(z)?)?,
            Product(l, r) => l.eval_c(z)? * r.eval_c(z)?,
            AffineCombo(terms) => {
                let mut acc = ZERO;
                for (w, m) in terms {
                    acc += w * m.eval_c(z)?;
                }
                acc
            }
            AntiderivativePower { .. } | BoundaryPrimitive { .. } => self.jet_c(z)?.0,
        })
    }

    pub(crate) fn jet_c(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        use AnalyticMap::*;
        Ok(match self {
            Polynomial(c) => horner(c, z),
            PowerSeries(s) => {
                require_disk("series", z)?;
                horner(s.active(), z)
            }
            Moebius { a, rotation } => {
                require_disk("moebius", z)?;
                let a = a.to_complex();
                (rotation * moebius_c(a, z), rotation * moebius_deriv_c(a, z))
            }
            Blaschke { zeros, rotation } => {
                require_disk("blaschke", z)?;
                let mut v = *rotation;
                let mut d = ZERO;
                for a in zeros {
                    let a = a.to_complex();
                    let (f, df) = (moebius_c(a, z), moebius_deriv_c(a, z));
                    d = d * f + v * df;
                    v *= f;
                }
                (v, d)
            }
            Scale(inner, c) => {
                let (v, d) = inner.jet_c(z)?;
                (c * v, c * d)
            }
            Compose(outer, inner) => {
                let (w, dw) = inner.jet_c(z)?;
                let (v, dv) = outer.jet_c(w)?;
                (v, dv * dw)
            }
            Product(l, r) => {
                let (a, da) = l.jet_c(z)?;
                let (b, db) = r.jet_c(z)?;
                (a * b, da * b + a * db)
            }
            AffineCombo(terms) => {
                let mut v = ZERO;
                let mut d = ZERO;
                for (w, m) in terms {
                    let (mv, md) = m.jet_c(z)?;
                    v += w * mv;
                    d += w * md;
                }
                (v, d)
            }
            AntiderivativePower { a, alpha } => {
                require_disk("extremal", z)?;
                let ac = a.to_complex();
                let k = -a.one_minus_modulus_sq().powf(*alpha);
                let (v, d) = power_primitive(ac.conj(), 2.0 * alpha, z);
                (k * v, k * d)
            }
            BoundaryPrimitive { zeta, alpha } => {
                require_disk("boundary", z)?;
                power_primitive(zeta.conj(), *alpha, z)
            }
        })
    }

    /// `1 - |self(z)|^2` given `dz = 1 - |z|^2`. Nodes that preserve the unit
    /// circle propagate `dz` exactly, so images near the circle keep their
    /// relative accuracy.
    pub(crate) fn defect_c(&self, z: Complex64, dz: f64) -> Result<f64> {
        use AnalyticMap::*;
        match self {
            Polynomial(c) if is_unimodular_monomial(c) => {
                // 1 - |z|^{2n} = (1 - |z|^2) sum_{k<n} |z|^{2k}
                let s = z.norm_sqr();
                Ok(dz * (0..c.len() - 1).fold(0.0, |acc, _| acc * s + 1.0))
            }
            Scale(inner, c) if is_unimodular(*c) => inner.defect_c(z, dz),
            Moebius { a, .. } => {
                require_disk("moebius", z)?;
                Ok(moebius_defect(*a, z, dz))
            }
            Blaschke { zeros, .. } => {
                require_disk("blaschke", z)?;
                // 1 - prod x_k = sum_k (1 - x_k) prod_{j<k} x_j
                let mut acc = 0.0;
                let mut prod = 1.0;
                for a in zeros {
                    acc += moebius_defect(*a, z, dz) * prod;
                    prod *= moebius_c(a.to_complex(), z).norm_sqr();
                }
                Ok(acc)
            }
            Compose(outer, inner) => {
                let w = inner.eval_c(z)?;
                outer.defect_c(w, inner.defect_c(z, dz)?)
            }
            _ => Ok(one_minus_abs_sq(self.eval_c(z)?)),
        }
    }

    /// Polynomial degree when the tree is a (possibly scaled) polynomial.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            AnalyticMap::Polynomial(c) => Some(c.iter().rposition(|x| *x != ZERO).unwrap_or(0)),
            AnalyticMap::Scale(inner, _) => inner.polynomial_degree(),
            AnalyticMap::Compose(o, i) => Some(o.polynomial_degree()? * i.polynomial_degree()?),
            AnalyticMap::Product(l, r) => Some(l.polynomial_degree()? + r.polynomial_degree()?),
            _ => None,
        }
    }
}

/// Harmonic function `f = h + conj(g)` with `h`, `g` analytic on the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicMap {
    pub h: AnalyticMap,
    pub g: AnalyticMap,
}

impl HarmonicMap {
    pub fn new(h: AnalyticMap, g: AnalyticMap) -> Self {
        Self { h, g }
    }

    pub fn analytic(h: AnalyticMap) -> Self {
        Self::new(h, AnalyticMap::zero())
    }

    /// `phi_a + conj(phi_a)`, whose alpha-Bloch seminorm is exactly 2.
    pub fn extremal(a: DiskPoint, alpha: f64) -> Result<Self> {
        let phi = AnalyticMap::extremal(a, alpha)?;
        Ok(Self::new(phi.clone(), phi))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.h.clone().scale(c), self.g.clone().scale(c.conj()))
    }

    pub fn eval(&self, z: DiskPoint) -> Result<Complex64> {
        Ok(self.h.eval(z)? + self.g.eval(z)?.conj())
    }

    /// `(f_z, f_zbar) = (h'(z), conj(g'(z)))`.
    pub fn wirtinger(&self, z: DiskPoint) -> Result<(Complex64, Complex64)> {
        Ok((self.h.deriv(z)?, self.g.deriv(z)?.conj()))
    }

    /// `|f_z| + |f_zbar|`.
    pub fn gradient_sum(&self, z: DiskPoint) -> Result<f64> {
        Ok(self.h.deriv(z)?.norm() + self.g.deriv(z)?.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SelfMapStatus {
    Verified,
    Violated,
    Inconclusive,
}

/// Result of screening a map for `phi(D) ⊂ D` by sampling circles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMapVerdict {
    pub verdict: SelfMapStatus,
    pub max_modulus_seen: f64,
    pub witness: DiskPoint,
    /// Circle maxima extrapolate to 1 at the boundary (inner-function-like).
    pub boundary_contact: bool,
    pub circle_maxima: Vec<f64>,
}

/// Golden-section maximisation of `f` on `[lo, hi]`, returning the best point
/// seen (never worse than the midpoint).
pub(crate) fn golden_max<F>(mut f: F, lo: f64, hi: f64, iters: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mid = 0.5 * (lo + hi);
    let mut best = (f(mid)?, mid);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    for (v, x) in [(fc, c), (fd, d)] {
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

/// Maximum of `f(r e^{i theta})` over the circle: `count` equally spaced
/// samples, then golden-section polish around the best few local maxima
/// and around any `hints`.
pub(crate) fn circle_max<F>(f: F, r: f64, count: usize, hints: &[f64]) -> Result<(f64, f64)>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let count = count.max(8);
    let dt = 2.0 * PI / count as f64;
    let vals = (0..count)
        .map(|j| f(Complex64::from_polar(r, j as f64 * dt)))
        .collect::<Result<Vec<_>>>()?;
    let mut peaks: Vec<usize> = (0..count)
        .filter(|&j| {
            let prev = vals[(j + count - 1) % count];
            let next = vals[(j + 1) % count];
            vals[j] >= prev && vals[j] >= next
        })
        .collect();
    peaks.sort_by(|&x, &y| vals[y].total_cmp(&vals[x]).then(x.cmp(&y)));
    peaks.truncate(4);

    let mut best = (f64::NEG_INFINITY, 0.0);
    for (j, v) in vals.iter().enumerate() {
        if *v > best.0 {
            best = (*v, j as f64 * dt);
        }
    }
    let starts = peaks
        .iter()
        .map(|&j| j as f64 * dt)
        .chain(hints.iter().copied());
    for t in starts {
        let (v, th) = golden_max(|th| f(Complex64::from_polar(r, th)), t - dt, t + dt, 48)?;
        if v > best.0 {
            best = (v, th.rem_euclid(2.0 * PI));
        }
    }
    Ok(best)
}

/// Numerical screening of `phi(D) ⊂ D` by the maximum modulus principle:
/// sample `|m|` on the circles `|z| = r_k`.
///
/// Any sample with `|m| >= 1` is a violation. Otherwise the map is accepted
/// unless the circle maxima decrease (which an analytic map cannot do) or a
/// linear extrapolation of the outermost maxima leaves the disk before `r = 1`.
pub fn validate_self_map(m: &AnalyticMap, radii: &[f64], angular_count: usize) -> Result<SelfMapVerdict> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::InvalidParameter("radii must lie in (0, 1)".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("radii must be strictly increasing".into()));
    }
    let mut maxima = Vec::with_capacity(radii.len());
    let mut best = (f64::NEG_INFINITY, DiskPoint::ORIGIN);
    let mut hint: Vec<f64> = Vec::new();
    for &r in radii {
        let (v, th) = circle_max(|z| Ok(m.eval_c(z)?.norm()), r, angular_count, &hint)?;
        hint = vec![th];
        maxima.push(v);
        if v > best.0 {
            best = (v, DiskPoint::from_polar(r, th)?);
        }
        if v >= 1.0 {
            return Ok(SelfMapVerdict {
                verdict: SelfMapStatus::Violated,
                max_modulus_seen: v,
                witness: best.1,
                boundary_contact: false,
                circle_maxima: maxima,
            });
        }
    }
    let monotone = maxima.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12) - 1e-15);
    let extrapolated = match radii.len() {
        1 => maxima[0],
        n => {
            let slope = (maxima[n - 1] - maxima[n - 2]) / (radii[n - 1] - radii[n - 2]);
            maxima[n - 1] + slope.max(0.0) * (1.0 - radii[n - 1])
        }
    };
    let verdict = if monotone && extrapolated <= 1.0 + 1e-6 {
        SelfMapStatus::Verified
    } else {
        SelfMapStatus::Inconclusive
    };
    Ok(SelfMapVerdict {
        verdict,
        max_modulus_seen: best.0,
        witness: best.1,
        boundary_contact: extrapolated >= 1.0 - 1e-6,
        circle_maxima: maxima,
    })
}

/// Radii `1 - 2^{-k}`, `k = 1..=k_max`.
pub fn dyadic_radii(k_max: usize) -> Vec<f64> {
    (1..=k_max).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect()
}
