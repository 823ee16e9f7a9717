//! Adaptive supremum search over the disk on dyadic annuli.
//!
//! Level `k` covers `1 - 2^{-(k-1)} <= |z| <= 1 - 2^{-k}` with a polar grid
//! whose angular resolution grows like `1 / (1 - r)`, capped by the budget.
//! The best local maxima of each level are polished by successive 5x5
//! subdivision and a golden-section pass in radius and angle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::function::{circle_max, golden_max};

/// Refinement schedule and verdict thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    /// Deepest level; the outermost radius is `1 - 2^{-k_max}`.
    pub k_max: usize,
    /// Angular count on radius `r` is `ceil(2 pi / ((1 - r) quality))`.
    pub quality: f64,
    pub min_angular: usize,
    pub max_angular: usize,
    /// Radial subdivisions per level (the grid has one more radius).
    pub radial_per_level: usize,
    /// Local maxima polished per level.
    pub refine_cells: usize,
    pub refine_rounds: usize,
    /// Converged when the running maximum moved by at most this much
    /// (relative) over the last three levels.
    pub rel_tol: f64,
    /// Diverging when level sups grew by more than this factor on the last
    /// two consecutive levels.
    pub growth_factor: f64,
    pub decay_tol: f64,
    /// Relative spread of a profile tail still counted as stable.
    pub stabilize_tol: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            k_max: 20,
            quality: 0.25,
            min_angular: 32,
            max_angular: 2048,
            radial_per_level: 6,
            refine_cells: 16,
            refine_rounds: 8,
            rel_tol: 1e-4,
            growth_factor: 1.5,
            decay_tol: 1e-3,
            stabilize_tol: 1e-2,
        }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("budget: {m}")));
        if self.k_max == 0 || self.k_max > 48 {
            return bad("k_max must lie in 1..=48");
        }
        if self.quality.is_nan() || self.quality <= 0.0 {
            return bad("quality must be positive");
        }
        if self.min_angular == 0 || self.max_angular < self.min_angular {
            return bad("need 0 < min_angular <= max_angular");
        }
        if self.radial_per_level == 0 {
            return bad("radial_per_level must be positive");
        }
        if !(self.rel_tol >= 0.0 && self.growth_factor > 1.0 && self.decay_tol > 0.0) {
            return bad("tolerances out of range");
        }
        if self.stabilize_tol.is_nan() || self.stabilize_tol < 0.0 {
            return bad("stabilize_tol must be non-negative");
        }
        Ok(())
    }

    pub fn angular_count(&self, r: f64) -> usize {
        let n = (2.0 * PI / ((1.0 - r) * self.quality)).ceil();
        (n as usize).clamp(self.min_angular, self.max_angular)
    }

    pub fn level(&self, k: usize) -> Level {
        let r_lo = dyadic(k - 1);
        let r_hi = dyadic(k);
        let n = self.radial_per_level;
        let radii = (0..=n)
            .map(|i| r_lo + (r_hi - r_lo) * i as f64 / n as f64)
            .collect();
        Level {
            k,
            r_lo,
            r_hi,
            radii,
            angular: self.angular_count(r_hi),
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = Level> + '_ {
        (1..=self.k_max).map(|k| self.level(k))
    }

    /// Outer radii of the levels, `1 - 2^{-k}`.
    pub fn dyadic_radii(&self) -> Vec<f64> {
        (1..=self.k_max).map(dyadic).collect()
    }
}

fn dyadic(k: usize) -> f64 {
    1.0 - 0.5f64.powi(k as i32)
}

/// One annulus of the refinement schedule.
#[derive(Debug, Clone)]
pub struct Level {
    pub k: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub radii: Vec<f64>,
    pub angular: usize,
}

impl Level {
    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.angular as f64
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point by flat index, radius-major.
    pub fn point(&self, idx: usize) -> Complex64 {
        let (i, j) = (idx / self.angular, idx % self.angular);
        Complex64::from_polar(self.radii[i], self.theta(j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SupStatus {
    Converged,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub radius: f64,
    pub level_sup: f64,
}

/// Numerical supremum over the disk with its refinement evidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    pub status: SupStatus,
    pub witness: DiskPoint,
    pub trace: Vec<TracePoint>,
    /// Aitken extrapolation of the running maximum, when the last increments
    /// shrink geometrically.
    pub extrapolated: Option<f64>,
    pub evaluations: usize,
}

fn checked(v: f64, z: Complex64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { point: z })
    }
}

struct Polish<'a, F> {
    f: &'a F,
    r_lo: f64,
    r_hi: f64,
    rounds: usize,
}

impl<F> Polish<'_, F>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    fn eval(&self, r: f64, t: f64) -> Result<f64> {
        let z = Complex64::from_polar(r, t);
        (self.f)(z).and_then(|v| checked(v, z))
    }

    fn run(&self, r0: f64, t0: f64, mut dr: f64, mut dt: f64) -> Result<(f64, f64, f64, usize)> {
        const OFFS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let (mut r, mut t) = (r0, t0);
        let mut best = self.eval(r, t)?;
        let mut evals = 1;
        for _ in 0..self.rounds {
            let (cr, ct) = (r, t);
            for &a in &OFFS {
                let rr = (cr + a * dr).clamp(self.r_lo, self.r_hi);
                for &b in &OFFS {
                    if a == 0.0 && b == 0.0 {
                        continue;
                    }
                    let tt = ct + b * dt;
                    let v = self.eval(rr, tt)?;
                    evals += 1;
                    if v > best {
                        best = v;
                        r = rr;
                        t = tt;
                    }
                }
            }
            dr *= 0.5;
            dt *= 0.5;
        }
        let lo = (r - 2.0 * dr).max(self.r_lo);
        let hi = (r + 2.0 * dr).min(self.r_hi);
        if hi > lo {
            let (v, rr) = golden_max(|x| self.eval(x, t), lo, hi, 40)?;
            evals += 43;
            if v > best {
                best = v;
                r = rr;
            }
        }
        let (v, tt) = golden_max(|x| self.eval(r, x), t - 2.0 * dt, t + 2.0 * dt, 40)?;
        evals += 43;
        if v > best {
            best = v;
            t = tt;
        }
        Ok((best, r, t.rem_euclid(2.0 * PI), evals))
    }
}

/// Adaptive estimate of `sup_{z in D} f(z)`.
///
/// Evaluation errors (domain violations, non-finite values) abort the search;
/// an exhausted budget only degrades the status to `Inconclusive`.
pub fn adaptive_sup<F>(f: F, budget: &Budget) -> Result<SupEstimate>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    budget.validate()?;
    let mut trace = Vec::with_capacity(budget.k_max);
    let mut best = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
    let mut evaluations = 0usize;
    let mut hints: Vec<f64> = Vec::new();

    for level in budget.levels() {
        let m = level.angular;
        let nr = level.radii.len();
        let vals = (0..level.len())
            .into_par_iter()
            .map(|idx| {
                let z = level.point(idx);
                f(z).and_then(|v| checked(v, z))
            })
            .collect::<Result<Vec<f64>>>()?;
        evaluations += vals.len();

        let mut level_best = (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
        for (idx, &v) in vals.iter().enumerate() {
            if v > level_best.0 {
                level_best = (v, level.point(idx));
            }
        }

        // local maxima over the 8-neighbourhood, angle periodic
        let at = |i: usize, j: usize| vals[i * m + j % m];
        let mut peaks: Vec<usize> = (0..vals.len())
            .filter(|&idx| {
                let (i, j) = (idx / m, idx % m);
                let v = vals[idx];
                let i_lo = i.saturating_sub(1);
                let i_hi = (i + 1).min(nr - 1);
                (i_lo..=i_hi).all(|ii| (0..3).all(|dj| at(ii, j + m - 1 + dj) <= v))
            })
            .collect();
        peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        peaks.truncate(budget.refine_cells);

        let dr = (level.r_hi - level.r_lo) / budget.radial_per_level as f64;
        let dt = 2.0 * PI / m as f64;
        let mid = 0.5 * (level.r_lo + level.r_hi);
        let seeds: Vec<(f64, f64)> = peaks
            .iter()
            .map(|&idx| (level.radii[idx / m], level.theta(idx % m)))
            .chain(hints.iter().map(|&t| (mid, t)))
            .collect();

        let polish = Polish {
            f: &f,
            r_lo: level.r_lo,
            r_hi: level.r_hi,
            rounds: budget.refine_rounds,
        };
        let refined = seeds
            .par_iter()
            .map(|&(r, t)| polish.run(r, t, dr, dt))
            .collect::<Result<Vec<_>>>()?;

        let mut ranked: Vec<(f64, f64, f64)> = Vec::with_capacity(refined.len());
        for (v, r, t, n) in refined {
            evaluations += n;
            ranked.push((v, r, t));
            if v > level_best.0 {
                level_best = (v, Complex64::from_polar(r, t));
            }
        }
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
        hints = ranked.iter().take(4).map(|x| x.2).collect();

        trace.push(TracePoint {
            radius: level.r_hi,
            level_sup: level_best.0,
        });
        if level_best.0 > best.0 {
            best = level_best;
        }
    }

    let status = sup_status(&trace, budget);
    let extrapolated = aitken(&trace);
    Ok(SupEstimate {
        value: best.0,
        status,
        witness: DiskPoint::from_complex(best.1)?,
        trace,
        extrapolated,
        evaluations,
    })
}

fn running_max(trace: &[TracePoint]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    trace
        .iter()
        .map(|t| {
            m = m.max(t.level_sup);
            m
        })
        .collect()
}

pub(crate) fn sup_status(trace: &[TracePoint], budget: &Budget) -> SupStatus {
    let n = trace.len();
    if n < 3 {
        return SupStatus::Inconclusive;
    }
    let s: Vec<f64> = trace[n - 3..].iter().map(|t| t.level_sup).collect();
    let gf = budget.growth_factor;
    if s[0] > 0.0 && s[1] > gf * s[0] && s[2] > gf * s[1] {
        return SupStatus::Diverging;
    }
    let m = running_max(trace);
    if m[n - 1] - m[n - 3] <= budget.rel_tol * m[n - 1].abs() {
        return SupStatus::Converged;
    }
    SupStatus::Inconclusive
}

fn aitken(trace: &[TracePoint]) -> Option<f64> {
    let m = running_max(trace);
    let n = m.len();
    if n < 3 {
        return None;
    }
    let d1 = m[n - 2] - m[n - 3];
    let d2 = m[n - 1] - m[n - 2];
    if d1 > 0.0 && d2 > 0.0 && d2 < d1 {
        Some(m[n - 1] + d2 * d2 / (d1 - d2))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayVerdict {
    DecaysToZero,
    Stabilizes,
    Grows,
    Inconclusive,
}

/// Sampled boundary behaviour of a nonnegative quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub witnesses: Vec<DiskPoint>,
    pub verdict: DecayVerdict,
    /// The approach region was empty from some point on, so the limit holds
    /// vacuously.
    pub vacuous: bool,
}

/// Verdict on the tail of a profile sampled towards the boundary.
pub fn decay_verdict(values: &[f64], budget: &Budget) -> DecayVerdict {
    let n = values.len();
    if n < 3 {
        return DecayVerdict::Inconclusive;
    }
    let t = &values[n - 3..];
    let slack = |x: f64| x * (1.0 + 1e-9) + 1e-300;
    let non_increasing = t[1] <= slack(t[0]) && t[2] <= slack(t[1]);
    if t[2] <= budget.decay_tol && non_increasing {
        return DecayVerdict::DecaysToZero;
    }
    if n >= 4 {
        let q = &values[n - 4..];
        if q.iter().all(|&v| v > 0.0) && q.windows(2).all(|w| w[1] <= 0.95 * w[0]) {
            return DecayVerdict::DecaysToZero;
        }
    }
    let gf = budget.growth_factor;
    if t[0] > 0.0 && t[1] > gf * t[0] && t[2] > gf * t[1] {
        return DecayVerdict::Grows;
    }
    let hi = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = t.iter().cloned().fold(f64::INFINITY, f64::min);
    if hi > budget.decay_tol && hi - lo <= budget.stabilize_tol * hi {
        return DecayVerdict::Stabilizes;
    }
    DecayVerdict::Inconclusive
}

/// Maxima of `f` over the circles `|z| = r` for each radius, chaining the
/// previous witness angle as a refinement hint.
pub fn circle_profile<F>(f: F, radii: &[f64], budget: &Budget) -> Result<DecayProfile>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "profile radii must be strictly increasing in (0, 1)".into(),
        ));
    }
    let g = |z: Complex64| f(z).and_then(|v| checked(v, z));
    let mut values = Vec::with_capacity(radii.len());
    let mut witnesses = Vec::with_capacity(radii.len());
    let mut hint: Vec<f64> = Vec::new();
    for &r in radii {
        let (v, th) = circle_max(g, r, budget.angular_count(r), &hint)?;
        hint = vec![th];
        values.push(v);
        witnesses.push(DiskPoint::from_polar(r, th)?);
    }
    let verdict = decay_verdict(&values, budget);
    Ok(DecayProfile {
        radii: radii.to_vec(),
        values,
        witnesses,
        verdict,
        vacuous: false,
    })
}
