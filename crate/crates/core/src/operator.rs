//! The weight `tau_{phi,alpha}(z) = (1-|z|^2)^alpha |phi'(z)| / (1-|phi(z)|^2)^alpha`,
//! its supremum and boundary limits, the pullback `f ∘ phi`, and the
//! boundedness/compactness decision table built from them.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::disk::{one_minus_abs_sq, DiskPoint};
use crate::error::{Error, Result};
use crate::function::{
    circle_max, dyadic_radii, validate_self_map, AnalyticMap, HarmonicMap, SelfMapStatus, SelfMapVerdict,
};
use crate::norms::{weight, Alpha};
use crate::sup::{
    adaptive_sup, circle_profile, decay_verdict, Budget, DecayProfile, DecayVerdict, SupEstimate, SupStatus,
};

/// Screening resolution used when constructing [`TauParams`].
const SCREEN_LEVELS: usize = 20;
const SCREEN_ANGLES: usize = 256;

/// A screened self-map together with the weight exponent.
#[derive(Debug, Clone)]
pub struct TauParams {
    pub phi: AnalyticMap,
    pub alpha: Alpha,
    pub screening: SelfMapVerdict,
}

impl TauParams {
    /// Screens `phi` with [`validate_self_map`]; a violation is an error.
    pub fn new(phi: AnalyticMap, alpha: Alpha) -> Result<Self> {
        let screening = validate_self_map(&phi, &dyadic_radii(SCREEN_LEVELS), SCREEN_ANGLES)?;
        if screening.verdict == SelfMapStatus::Violated {
            return Err(Error::NotSelfMap {
                witness: screening.witness.to_complex(),
                modulus: screening.max_modulus_seen,
            });
        }
        Ok(Self { phi, alpha, screening })
    }

    pub(crate) fn tau_c(&self, z: Complex64) -> Result<f64> {
        let (w, dw) = self.phi.jet_c(z)?;
        let dz = one_minus_abs_sq(z);
        let den = self.phi.defect_c(z, dz)?;
        if den.is_nan() || den <= 0.0 {
            return Err(Error::NotSelfMap {
                witness: z,
                modulus: w.norm(),
            });
        }
        Ok(weight(dz / den, self.alpha) * dw.norm())
    }

    /// `(|phi(z)|, tau(z))`.
    pub(crate) fn image_and_tau(&self, z: Complex64) -> Result<(f64, f64)> {
        let w = self.phi.eval_c(z)?;
        Ok((w.norm(), self.tau_c(z)?))
    }
}

pub fn tau(p: &TauParams, z: DiskPoint) -> Result<f64> {
    p.tau_c(z.to_complex())
}

/// Adaptive `sup_D tau`.
pub fn tau_sup(p: &TauParams, budget: &Budget) -> Result<SupEstimate> {
    adaptive_sup(|z| p.tau_c(z), budget)
}

/// Circle maxima of `tau` as `|z| -> 1`.
pub fn boundary_profile_by_base(p: &TauParams, radii: &[f64], budget: &Budget) -> Result<DecayProfile> {
    circle_profile(|z| p.tau_c(z), radii, budget)
}

/// `delta_k = 2^{-k}` for `k = 1..=max(1, k_max / 2)`.
pub fn default_deltas(budget: &Budget) -> Vec<f64> {
    (1..=(budget.k_max / 2).max(1)).map(|k| 0.5f64.powi(k as i32)).collect()
}

/// Sup of `tau` over the sampled regions `{z : |phi(z)| > 1 - delta_k}`.
///
/// Samples are the polar grid of `budget` plus, for each level, the point of
/// maximal `|phi|` on its outer circle. By the maximum modulus principle the
/// latter decide whether a region is empty. Empty regions report value 0; if
/// the maxima of `|phi|` have converged below `1 - delta`, the limit holds
/// vacuously. The profile's `radii` are the thresholds `1 - delta_k`.
pub fn boundary_profile_by_image(p: &TauParams, deltas: &[f64], budget: &Budget) -> Result<DecayProfile> {
    if deltas.is_empty()
        || deltas.iter().any(|&d| !(d > 0.0 && d < 1.0))
        || deltas.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidParameter(
            "deltas must be strictly decreasing in (0, 1)".into(),
        ));
    }
    budget.validate()?;
    let thresholds: Vec<f64> = deltas.iter().map(|d| 1.0 - d).collect();
    let mut best: Vec<Option<(f64, Complex64)>> = vec![None; deltas.len()];
    let mut absorb = |modulus: f64, t: f64, z: Complex64| {
        for (slot, &th) in best.iter_mut().zip(&thresholds) {
            if modulus > th && slot.is_none_or(|(v, _)| t > v) {
                *slot = Some((t, z));
            }
        }
    };

    let mut circle_moduli = Vec::with_capacity(budget.k_max);
    let mut hint = Vec::new();
    for level in budget.levels() {
        let samples = (0..level.len())
            .into_par_iter()
            .map(|idx| {
                let z = level.point(idx);
                p.image_and_tau(z).map(|(m, t)| (m, t, z))
            })
            .collect::<Result<Vec<_>>>()?;
        for (m, t, z) in samples {
            absorb(m, t, z);
        }
        let (m, th) = circle_max(
            |z| Ok(p.phi.eval_c(z)?.norm()),
            level.r_hi,
            level.angular,
            &hint,
        )?;
        hint = vec![th];
        let z = Complex64::from_polar(level.r_hi, th);
        absorb(m, p.tau_c(z)?, z);
        circle_moduli.push(m);
    }

    let values: Vec<f64> = best.iter().map(|s| s.map_or(0.0, |(v, _)| v)).collect();
    let witnesses = best
        .iter()
        .map(|s| DiskPoint::from_complex(s.map_or(Complex64::new(0.0, 0.0), |(_, z)| z)))
        .collect::<Result<Vec<_>>>()?;

    let first_empty = best.iter().position(Option::is_none);
    let (verdict, vacuous) = match first_empty {
        None => (decay_verdict(&values, budget), false),
        Some(_) => {
            let n = circle_moduli.len();
            let settled = n >= 3 && {
                let tail = &circle_moduli[n - 3..];
                tail[2] - tail[0] <= budget.rel_tol * tail[2]
            };
            if settled {
                (DecayVerdict::DecaysToZero, true)
            } else {
                (DecayVerdict::Inconclusive, false)
            }
        }
    };
    Ok(DecayProfile {
        radii: thresholds,
        values,
        witnesses,
        verdict,
        vacuous,
    })
}

/// `C_phi f = f ∘ phi = h ∘ phi + conj(g ∘ phi)`.
pub fn pullback(phi: &AnalyticMap, f: &HarmonicMap) -> HarmonicMap {
    HarmonicMap::new(
        AnalyticMap::compose(f.h.clone(), phi.clone()),
        AnalyticMap::compose(f.g.clone(), phi.clone()),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    fn from_sup(s: SupStatus) -> Self {
        match s {
            SupStatus::Converged => Verdict::Yes,
            SupStatus::Diverging => Verdict::No,
            SupStatus::Inconclusive => Verdict::Inconclusive,
        }
    }

    fn from_decay(d: DecayVerdict) -> Self {
        match d {
            DecayVerdict::DecaysToZero => Verdict::Yes,
            DecayVerdict::Stabilizes | DecayVerdict::Grows => Verdict::No,
            DecayVerdict::Inconclusive => Verdict::Inconclusive,
        }
    }

    /// Three-valued conjunction: a definite `No` on either side wins.
    fn and(self, other: Self) -> Self {
        match (self, other) {
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            (Verdict::Yes, Verdict::Yes) => Verdict::Yes,
            _ => Verdict::Inconclusive,
        }
    }

    pub fn is_definite(self) -> bool {
        self != Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Criterion {
    #[serde(rename = "bounded_HB_to_HB")]
    BoundedHbToHb,
    #[serde(rename = "bounded_HB0_to_HB")]
    BoundedHb0ToHb,
    #[serde(rename = "bounded_HB_to_HB0")]
    BoundedHbToHb0,
    #[serde(rename = "bounded_HB0_to_HB0")]
    BoundedHb0ToHb0,
    #[serde(rename = "compact_HB_to_HB")]
    CompactHbToHb,
    #[serde(rename = "compact_HB0_variants")]
    CompactHb0Variants,
}

impl Criterion {
    pub const ALL: [Criterion; 6] = [
        Criterion::BoundedHbToHb,
        Criterion::BoundedHb0ToHb,
        Criterion::BoundedHbToHb0,
        Criterion::BoundedHb0ToHb0,
        Criterion::CompactHbToHb,
        Criterion::CompactHb0Variants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::BoundedHbToHb => "bounded_HB_to_HB",
            Criterion::BoundedHb0ToHb => "bounded_HB0_to_HB",
            Criterion::BoundedHbToHb0 => "bounded_HB_to_HB0",
            Criterion::BoundedHb0ToHb0 => "bounded_HB0_to_HB0",
            Criterion::CompactHbToHb => "compact_HB_to_HB",
            Criterion::CompactHb0Variants => "compact_HB0_variants",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub alpha: Alpha,
    pub tau_sup: SupEstimate,
    pub boundary_limit_by_base: DecayProfile,
    pub boundary_limit_by_image: DecayProfile,
    pub phi_little_bloch: DecayProfile,
    pub verdicts: Vec<(Criterion, Verdict)>,
}

impl ClassificationReport {
    pub fn verdict(&self, c: Criterion) -> Verdict {
        self.verdicts
            .iter()
            .find(|(k, _)| *k == c)
            .map(|(_, v)| *v)
            .unwrap_or(Verdict::Inconclusive)
    }

    pub fn all_inconclusive(&self) -> bool {
        self.verdicts.iter().all(|(_, v)| !v.is_definite())
    }
}

/// Applies the decision table to the four pieces of evidence.
pub fn decide(
    tau_sup: SupStatus,
    by_base: DecayVerdict,
    by_image: DecayVerdict,
    phi_little: DecayVerdict,
) -> Vec<(Criterion, Verdict)> {
    let bounded = Verdict::from_sup(tau_sup);
    let base = Verdict::from_decay(by_base);
    vec![
        (Criterion::BoundedHbToHb, bounded),
        (Criterion::BoundedHb0ToHb, bounded),
        (Criterion::BoundedHbToHb0, base),
        (Criterion::BoundedHb0ToHb0, Verdict::from_decay(phi_little).and(bounded)),
        (Criterion::CompactHbToHb, Verdict::from_decay(by_image).and(bounded)),
        (Criterion::CompactHb0Variants, base),
    ]
}

/// Boundedness and compactness verdicts for `C_phi` on the harmonic
/// alpha-Bloch spaces.
pub fn classify(p: &TauParams, budget: &Budget) -> Result<ClassificationReport> {
    let sup = tau_sup(p, budget)?;
    if p.alpha == Alpha::ONE && sup.value > 1.0 + 1e-9 {
        log::warn!(
            "tau exceeds 1 at alpha = 1 ({}); Schwarz-Pick says this cannot happen",
            sup.value
        );
    }
    let radii = budget.dyadic_radii();
    let by_base = boundary_profile_by_base(p, &radii, budget)?;
    let by_image = boundary_profile_by_image(p, &default_deltas(budget), budget)?;
    let phi_little = circle_profile(
        |z| {
            let d = p.phi.jet_c(z)?.1;
            Ok(weight(one_minus_abs_sq(z), p.alpha) * d.norm())
        },
        &radii,
        budget,
    )?;
    let verdicts = decide(sup.status, by_base.verdict, by_image.verdict, phi_little.verdict);
    Ok(ClassificationReport {
        alpha: p.alpha,
        tau_sup: sup,
        boundary_limit_by_base: by_base,
        boundary_limit_by_image: by_image,
        phi_little_bloch: phi_little,
        verdicts,
    })
}
