//! Evidence for closed range of `C_phi`: the level sets
//! `Omega_c = {tau >= c}`, their images `G_c = phi(Omega_c)`, r-net coverage,
//! annulus containment, and upper estimates of the sampling constant and of
//! the lower bound `||C_phi f|| >= eps ||f||`.

mod preimage;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disk::{hyperbolic_lattice, pseudo_hyperbolic_c, DiskPoint};
use crate::error::{Error, Result};
use crate::function::HarmonicMap;
use crate::norms::{intensity_c, norm, seminorm, Alpha, NormEstimate};
use crate::operator::{pullback, tau_sup, TauParams};
use crate::sup::{Budget, SupEstimate, SupStatus};

pub use preimage::{newton, SeedOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaPoint {
    pub z: DiskPoint,
    pub tau: f64,
}

/// Sampled `Omega_c`: qualifying grid points plus level-set crossings located
/// by bisection along each grid ray.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSetSample {
    pub c: f64,
    pub points: Vec<OmegaPoint>,
    pub k_max: usize,
    pub max_angular: usize,
    pub radial_per_level: usize,
}

impl LevelSetSample {
    /// Smallest `|z|` in the sample.
    pub fn inner_radius(&self) -> Option<f64> {
        self.points.iter().map(|p| p.z.modulus()).reduce(f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImagePoint {
    pub w: DiskPoint,
    pub preimage: DiskPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageSetSample {
    pub points: Vec<ImagePoint>,
}

impl ImageSetSample {
    pub fn inner_radius(&self) -> Option<f64> {
        self.points.iter().map(|p| p.w.modulus()).reduce(f64::min)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in (0, 1), got {v}")))
    }
}

/// Samples `Omega_c` on the polar grid of `grid`.
pub fn omega_sample(p: &TauParams, c: f64, grid: &Budget) -> Result<LevelSetSample> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    grid.validate()?;
    let mut points = Vec::new();
    for level in grid.levels() {
        let rays = (0..level.angular)
            .into_par_iter()
            .map(|j| {
                let theta = level.theta(j);
                let mut out = Vec::new();
                let mut prev: Option<(f64, f64)> = None;
                for (i, &r) in level.radii.iter().enumerate() {
                    // one copy of the origin
                    if r == 0.0 && j > 0 {
                        continue;
                    }
                    let t = p.tau_c(Complex64::from_polar(r, theta))?;
                    if let Some((r_prev, t_prev)) = prev {
                        if (t_prev >= c) != (t >= c) {
                            out.push(bisect_crossing(p, c, theta, (r_prev, t_prev), (r, t))?);
                        }
                    }
                    // the outer radius is re-sampled as the next level's inner one
                    let last = i + 1 == level.radii.len() && level.k < grid.k_max;
                    if t >= c && !last {
                        out.push((r, theta, t));
                    }
                    prev = Some((r, t));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        for (r, theta, t) in rays.into_iter().flatten() {
            points.push(OmegaPoint {
                z: DiskPoint::from_polar(r, theta)?,
                tau: t,
            });
        }
    }
    Ok(LevelSetSample {
        c,
        points,
        k_max: grid.k_max,
        max_angular: grid.max_angular,
        radial_per_level: grid.radial_per_level,
    })
}

fn bisect_crossing(
    p: &TauParams,
    c: f64,
    theta: f64,
    a: (f64, f64),
    b: (f64, f64),
) -> Result<(f64, f64, f64)> {
    // keep `inside` on the qualifying side
    let (mut inside, mut outside) = if a.1 >= c { (a, b) } else { (b, a) };
    for _ in 0..60 {
        let r = 0.5 * (inside.0 + outside.0);
        if r == inside.0 || r == outside.0 {
            break;
        }
        let t = p.tau_c(Complex64::from_polar(r, theta))?;
        if t >= c {
            inside = (r, t);
        } else {
            outside = (r, t);
        }
    }
    Ok((inside.0, theta, inside.1))
}

/// `G_c = phi(Omega_c)` with preimages retained.
pub fn g_sample(p: &TauParams, omega: &LevelSetSample) -> Result<ImageSetSample> {
    let points = omega
        .points
        .iter()
        .map(|o| {
            let w = p.phi.eval(o.z)?;
            Ok(ImagePoint {
                w: DiskPoint::from_complex(w).map_err(|_| Error::NotSelfMap {
                    witness: o.z.to_complex(),
                    modulus: w.norm(),
                })?,
                preimage: o.z,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageSetSample { points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetCheckResult {
    pub r: f64,
    pub probes_total: usize,
    pub probes_covered: usize,
    /// Largest distance from a probe to the sample (1 when the sample is empty).
    pub worst_gap: f64,
    pub worst_probe: DiskPoint,
}

impl NetCheckResult {
    pub fn full_coverage(&self) -> bool {
        self.probes_covered == self.probes_total
    }
}

/// Default probes: a pseudohyperbolic lattice reaching `|z| <= 0.99`.
pub fn default_probes() -> Vec<DiskPoint> {
    hyperbolic_lattice(0.99, 0.5).expect("fixed lattice parameters are valid")
}

/// Sorted-by-modulus index for nearest-point queries in rho.
struct RadialIndex {
    pts: Vec<(f64, Complex64)>,
}

impl RadialIndex {
    fn new(g: &ImageSetSample) -> Self {
        let mut pts: Vec<(f64, Complex64)> = g
            .points
            .iter()
            .map(|p| (p.w.modulus(), p.w.to_complex()))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { pts }
    }

    /// Minimum rho from `z` to the sample. `rho(z, w)` is bounded below by
    /// `| |z| - |w| | / (1 - |z||w|)`, which grows monotonically as `|w|`
    /// moves away from `|z|`, so the scan stops once that bound is beaten.
    fn nearest(&self, z: Complex64) -> f64 {
        let s = z.norm();
        let lower = |t: f64| (s - t).abs() / (1.0 - s * t);
        let start = self.pts.partition_point(|p| p.0 < s);
        let mut best = f64::INFINITY;
        let mut up = start;
        let mut down = start;
        loop {
            let up_ok = up < self.pts.len() && lower(self.pts[up].0) < best;
            let down_ok = down > 0 && lower(self.pts[down - 1].0) < best;
            if !up_ok && !down_ok {
                break;
            }
            if up_ok {
                best = best.min(pseudo_hyperbolic_c(z, self.pts[up].1));
                up += 1;
            }
            if down_ok {
                best = best.min(pseudo_hyperbolic_c(z, self.pts[down - 1].1));
                down -= 1;
            }
        }
        best
    }
}

/// Checks whether the sample is an r-net for the probe set.
pub fn net_check(g: &ImageSetSample, r: f64, probes: &[DiskPoint]) -> Result<NetCheckResult> {
    check_unit_interval("r", r)?;
    if probes.is_empty() {
        return Err(Error::InvalidParameter("probe set is empty".into()));
    }
    if g.is_empty() {
        return Ok(NetCheckResult {
            r,
            probes_total: probes.len(),
            probes_covered: 0,
            worst_gap: 1.0,
            worst_probe: probes[0],
        });
    }
    let index = RadialIndex::new(g);
    let gaps: Vec<f64> = probes.par_iter().map(|p| index.nearest(p.to_complex())).collect();
    let mut worst = (f64::NEG_INFINITY, probes[0]);
    let mut covered = 0;
    for (gap, probe) in gaps.iter().zip(probes) {
        if *gap < r {
            covered += 1;
        }
        if *gap > worst.0 {
            worst = (*gap, *probe);
        }
    }
    Ok(NetCheckResult {
        r,
        probes_total: probes.len(),
        probes_covered: covered,
        worst_gap: worst.0,
        worst_probe: worst.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnulusParams {
    /// Outermost probe ring; targets lie in `r0 < |w| <= r_max`.
    pub r_max: f64,
    pub rings: usize,
    pub probes_per_ring: usize,
    pub seeds: usize,
    pub max_iter: usize,
}

impl Default for AnnulusParams {
    fn default() -> Self {
        Self {
            r_max: 0.95,
            rings: 4,
            probes_per_ring: 16,
            seeds: 8,
            max_iter: 80,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AnnulusVerdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusResult {
    pub r0: f64,
    pub verdict: AnnulusVerdict,
    pub probes: usize,
    pub accepted: usize,
    pub unresolved: usize,
    /// Targets with no acceptable preimage.
    pub failures: Vec<DiskPoint>,
}

enum ProbeOutcome {
    Accepted,
    Rejected,
    Unresolved,
}

fn probe_target(p: &TauParams, c: f64, w: Complex64, deg: usize, params: &AnnulusParams) -> Result<ProbeOutcome> {
    let radius = w.norm().powf(1.0 / deg as f64).min(1.0 - 1e-6);
    let base = w.arg() / deg as f64;
    let mut unresolved = false;
    for s in 0..params.seeds {
        let seed = Complex64::from_polar(radius, base + s as f64 * PI / 4.0);
        match newton(&p.phi, w, seed, params.max_iter) {
            SeedOutcome::Converged(z) => {
                if p.tau_c(z)? >= c {
                    return Ok(ProbeOutcome::Accepted);
                }
            }
            SeedOutcome::Escaped => {}
            SeedOutcome::Stalled => unresolved = true,
        }
    }
    Ok(if unresolved {
        ProbeOutcome::Unresolved
    } else {
        ProbeOutcome::Rejected
    })
}

/// Tests whether `G_c` contains the annulus `r0 < |w| <= r_max` by solving
/// `phi(z) = w` from multi-start seeds and requiring `tau(z) >= c`.
pub fn annulus_check(p: &TauParams, c: f64, r0: f64, params: &AnnulusParams) -> Result<AnnulusResult> {
    check_unit_interval("r0", r0)?;
    check_unit_interval("annulus r_max", params.r_max)?;
    if r0 >= params.r_max || params.rings == 0 || params.probes_per_ring == 0 || params.seeds == 0 {
        return Err(Error::InvalidParameter("degenerate annulus parameters".into()));
    }
    let deg = p.phi.polynomial_degree().filter(|&d| d > 0).unwrap_or(1);
    let targets: Vec<Complex64> = (1..=params.rings)
        .flat_map(|i| {
            let rad = r0 + (params.r_max - r0) * i as f64 / params.rings as f64;
            (0..params.probes_per_ring)
                .map(move |j| Complex64::from_polar(rad, 2.0 * PI * j as f64 / params.probes_per_ring as f64))
        })
        .collect();
    let outcomes = targets
        .par_iter()
        .map(|&w| probe_target(p, c, w, deg, params))
        .collect::<Result<Vec<_>>>()?;
    let mut accepted = 0;
    let mut unresolved = 0;
    let mut failures = Vec::new();
    for (o, w) in outcomes.iter().zip(&targets) {
        match o {
            ProbeOutcome::Accepted => accepted += 1,
            ProbeOutcome::Unresolved => unresolved += 1,
            ProbeOutcome::Rejected => failures.push(DiskPoint::from_complex(*w)?),
        }
    }
    let verdict = if !failures.is_empty() {
        AnnulusVerdict::Fails
    } else if unresolved > 0 {
        AnnulusVerdict::Inconclusive
    } else {
        AnnulusVerdict::Holds
    };
    Ok(AnnulusResult {
        r0,
        verdict,
        probes: targets.len(),
        accepted,
        unresolved,
        failures,
    })
}

/// A named member of a test family.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub id: String,
    pub f: HarmonicMap,
}

/// `phi_a + conj(phi_a)` for `a` on a pseudohyperbolic lattice, plus the
/// monomials `z^n`, `1 <= n <= max_degree`.
pub fn default_test_family(alpha: Alpha, r_max: f64, step: f64, max_degree: usize) -> Result<Vec<TestFunction>> {
    let mut family = Vec::new();
    for a in hyperbolic_lattice(r_max, step)? {
        family.push(TestFunction {
            id: format!("extremal(a={:+.6}{:+.6}i)", a.re(), a.im()),
            f: HarmonicMap::extremal(a, alpha.value())?,
        });
    }
    for n in 1..=max_degree {
        family.push(TestFunction {
            id: format!("monomial(n={n})"),
            f: HarmonicMap::analytic(crate::function::AnalyticMap::monomial(n)),
        });
    }
    Ok(family)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingEstimate {
    /// Minimum over the family of `sup_G intensity / seminorm`; an upper bound
    /// on the true sampling constant.
    pub s_est: f64,
    pub minimizer: String,
    pub family_size: usize,
    pub skipped: Vec<String>,
}

/// Members whose seminorm is usable as a denominator.
struct Normed<'a> {
    member: &'a TestFunction,
    seminorm: f64,
}

fn usable_members<'a>(
    family: &'a [TestFunction],
    alpha: Alpha,
    budget: &Budget,
) -> Result<(Vec<Normed<'a>>, Vec<String>)> {
    let estimates = family
        .par_iter()
        .map(|m| seminorm(&m.f, alpha, budget))
        .collect::<Result<Vec<SupEstimate>>>()?;
    let mut ok = Vec::new();
    let mut skipped = Vec::new();
    for (m, est) in family.iter().zip(estimates) {
        if est.status != SupStatus::Converged {
            log::warn!("skipping {}: seminorm {:?}", m.id, est.status);
            skipped.push(m.id.clone());
        } else if est.value <= 0.0 {
            log::warn!("skipping {}: zero seminorm", m.id);
            skipped.push(m.id.clone());
        } else {
            ok.push(Normed {
                member: m,
                seminorm: est.value,
            });
        }
    }
    Ok((ok, skipped))
}

fn sampling_from(g: &ImageSetSample, alpha: Alpha, members: &[Normed<'_>], skipped: Vec<String>, family_size: usize) -> Result<SamplingEstimate> {
    if members.is_empty() {
        return Err(Error::InvalidParameter("no family member has a usable seminorm".into()));
    }
    let ratios = members
        .par_iter()
        .map(|m| {
            let mut sup = 0.0f64;
            for pt in &g.points {
                sup = sup.max(intensity_c(&m.member.f, alpha, pt.w.to_complex())?);
            }
            Ok(sup / m.seminorm)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = (f64::INFINITY, 0usize);
    for (i, r) in ratios.iter().enumerate() {
        if *r < best.0 {
            best = (*r, i);
        }
    }
    Ok(SamplingEstimate {
        s_est: best.0,
        minimizer: members[best.1].member.id.clone(),
        family_size,
        skipped,
    })
}

pub fn sampling_constant_estimate(
    g: &ImageSetSample,
    alpha: Alpha,
    family: &[TestFunction],
    budget: &Budget,
) -> Result<SamplingEstimate> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("test family is empty".into()));
    }
    let (members, skipped) = usable_members(family, alpha, budget)?;
    sampling_from(g, alpha, &members, skipped, family.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedBelowEstimate {
    /// Minimum over the family of `||C_phi f|| / ||f||`; an upper bound on
    /// the best lower-bound constant.
    pub eps_est: f64,
    pub minimizer: String,
    /// `sup tau`, when the caller computed it.
    pub tau_sup: Option<f64>,
    pub skipped: Vec<String>,
}

pub fn bounded_below_estimate(p: &TauParams, family: &[TestFunction], budget: &Budget) -> Result<BoundedBelowEstimate> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("test family is empty".into()));
    }
    let (members, skipped) = usable_members(family, p.alpha, budget)?;
    bounded_below_from(p, &members, skipped, budget)
}

fn bounded_below_from(
    p: &TauParams,
    members: &[Normed<'_>],
    mut skipped: Vec<String>,
    budget: &Budget,
) -> Result<BoundedBelowEstimate> {
    let results = members
        .par_iter()
        .map(|m| {
            let f0 = m.member.f.eval(DiskPoint::ORIGIN)?.norm();
            let npb = norm(&pullback(&p.phi, &m.member.f), p.alpha, budget)?;
            Ok((f0 + m.seminorm, npb))
        })
        .collect::<Result<Vec<(f64, NormEstimate)>>>()?;
    let mut best = (f64::INFINITY, String::new());
    for (m, (nf, npb)) in members.iter().zip(results) {
        if npb.status() != SupStatus::Converged {
            log::warn!("skipping {} in bounded-below estimate: {:?}", m.member.id, npb.status());
            skipped.push(m.member.id.clone());
            continue;
        }
        let ratio = npb.value / nf;
        if ratio < best.0 {
            best = (ratio, m.member.id.clone());
        }
    }
    if best.0.is_infinite() {
        return Err(Error::InvalidParameter("no family member has a usable norm".into()));
    }
    Ok(BoundedBelowEstimate {
        eps_est: best.0,
        minimizer: best.1,
        tau_sup: None,
        skipped,
    })
}

/// Knobs for [`closed_range_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RangeBudget {
    pub sup: Budget,
    /// Grid for the level sets.
    pub omega: Budget,
    /// Budget for test-function norms.
    pub family: Budget,
    pub probe_r_max: f64,
    pub probe_step: f64,
    pub annulus: AnnulusParams,
    pub r0_sweep: Vec<f64>,
    pub family_r_max: f64,
    pub family_step: f64,
    pub family_max_degree: usize,
    pub bounded_below_threshold: f64,
    /// Fixed net radius; when absent it is derived from `c` and `sup tau`.
    pub net_radius: Option<f64>,
}

impl Default for RangeBudget {
    fn default() -> Self {
        Self {
            sup: Budget::default(),
            omega: Budget {
                k_max: 10,
                max_angular: 4096,
                radial_per_level: 4,
                ..Budget::default()
            },
            family: Budget {
                k_max: 12,
                max_angular: 512,
                ..Budget::default()
            },
            probe_r_max: 0.99,
            probe_step: 0.5,
            annulus: AnnulusParams::default(),
            r0_sweep: vec![0.3, 0.45, 0.6, 0.75, 0.9],
            family_r_max: 0.9,
            family_step: 0.5,
            family_max_degree: 8,
            bounded_below_threshold: 0.25,
            net_radius: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RangeEvidence {
    EvidenceFor,
    EvidenceAgainst,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub c: f64,
    #[serde(skip)]
    pub omega: LevelSetSample,
    #[serde(skip)]
    pub gset: ImageSetSample,
    pub omega_size: usize,
    pub omega_inner_radius: Option<f64>,
    pub g_inner_radius: Option<f64>,
    pub net: NetCheckResult,
    pub annulus: Vec<AnnulusResult>,
    pub sampling: SamplingEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedRangeReport {
    pub alpha: Alpha,
    pub tau_sup: SupEstimate,
    pub levels: Vec<LevelReport>,
    pub bounded_below: BoundedBelowEstimate,
    pub aggregate: RangeEvidence,
}

/// Net radius from the constructive argument: with `c = eps / 2` and
/// `K = sup tau`, `r = sqrt(1 - (c / K)^{1/alpha})`, clamped to `[0.1, 0.99]`.
pub fn derived_net_radius(c: f64, k: f64, alpha: Alpha) -> f64 {
    let q = (c / k).clamp(0.0, 1.0);
    (1.0 - q.powf(1.0 / alpha.value())).max(0.0).sqrt().clamp(0.1, 0.99)
}

/// Runs every closed-range diagnostic for each `c` and aggregates them.
///
/// `EvidenceFor` when some `G_c` passes an annulus test; `EvidenceAgainst`
/// when the bounded-below estimate is under the threshold and no `G_c` is a
/// net for the probes; otherwise `Inconclusive`.
pub fn closed_range_report(p: &TauParams, c_grid: &[f64], budget: &RangeBudget) -> Result<ClosedRangeReport> {
    if c_grid.is_empty() {
        return Err(Error::InvalidParameter("c grid is empty".into()));
    }
    let sup = tau_sup(p, &budget.sup)?;
    if sup.status == SupStatus::Diverging {
        return Err(Error::NotBounded(format!(
            "sup tau is diverging (last level sup {})",
            sup.trace.last().map_or(f64::NAN, |t| t.level_sup)
        )));
    }
    let family = default_test_family(p.alpha, budget.family_r_max, budget.family_step, budget.family_max_degree)?;
    let (members, skipped) = usable_members(&family, p.alpha, &budget.family)?;
    let mut bounded_below = bounded_below_from(p, &members, skipped.clone(), &budget.family)?;
    bounded_below.tau_sup = Some(sup.value);
    let probes = hyperbolic_lattice(budget.probe_r_max, budget.probe_step)?;

    let mut levels = Vec::with_capacity(c_grid.len());
    for &c in c_grid {
        let omega = omega_sample(p, c, &budget.omega)?;
        let gset = g_sample(p, &omega)?;
        let r = budget
            .net_radius
            .unwrap_or_else(|| derived_net_radius(c, sup.value, p.alpha));
        let net = net_check(&gset, r, &probes)?;
        let annulus = budget
            .r0_sweep
            .iter()
            .map(|&r0| annulus_check(p, c, r0, &budget.annulus))
            .collect::<Result<Vec<_>>>()?;
        let sampling = sampling_from(&gset, p.alpha, &members, skipped.clone(), family.len())?;
        levels.push(LevelReport {
            c,
            omega_size: omega.points.len(),
            omega_inner_radius: omega.inner_radius(),
            g_inner_radius: gset.inner_radius(),
            omega,
            gset,
            net,
            annulus,
            sampling,
        });
    }

    let any_annulus = levels
        .iter()
        .any(|l| l.annulus.iter().any(|a| a.verdict == AnnulusVerdict::Holds));
    let no_net = levels.iter().all(|l| !l.net.full_coverage());
    let aggregate = if any_annulus {
        RangeEvidence::EvidenceFor
    } else if no_net && bounded_below.eps_est < budget.bounded_below_threshold {
        RangeEvidence::EvidenceAgainst
    } else {
        RangeEvidence::Inconclusive
    };
    Ok(ClosedRangeReport {
        alpha: p.alpha,
        tau_sup: sup,
        levels,
        bounded_below,
        aggregate,
    })
}
