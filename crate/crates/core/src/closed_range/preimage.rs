//! Damped Newton iteration for `phi(z) = w` inside the disk.

use num_complex::Complex64;

use crate::function::AnalyticMap;

/// Iterates closer than this to the unit circle count as having escaped.
const ESCAPE_RADIUS: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedOutcome {
    Converged(Complex64),
    /// The iteration was pushed to the unit circle: no preimage near this seed.
    Escaped,
    Stalled,
}

pub fn newton(phi: &AnalyticMap, target: Complex64, seed: Complex64, max_iter: usize) -> SeedOutcome {
    let tol = 1e-13 * target.norm().max(1.0);
    let mut z = seed;
    let Ok(mut fz) = phi.jet_c(z) else {
        return SeedOutcome::Stalled;
    };
    for _ in 0..max_iter {
        let res = fz.0 - target;
        let res_norm = res.norm();
        if res_norm <= tol {
            return SeedOutcome::Converged(z);
        }
        if fz.1.norm() < 1e-300 {
            return SeedOutcome::Stalled;
        }
        let step = res / fz.1;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-9 {
            let cand = z - step * lambda;
            if cand.norm() < ESCAPE_RADIUS {
                if let Ok(j) = phi.jet_c(cand) {
                    if (j.0 - target).norm() < res_norm {
                        z = cand;
                        fz = j;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            // the full Newton step points out of the disk and no damped step helps
            let full = z - step;
            return if full.norm() >= 1.0 || z.norm() > 1.0 - 1e-6 {
                SeedOutcome::Escaped
            } else {
                SeedOutcome::Stalled
            };
        }
        if z.norm() > ESCAPE_RADIUS - 1e-12 {
            return SeedOutcome::Escaped;
        }
    }
    if (fz.0 - target).norm() <= tol {
        SeedOutcome::Converged(z)
    } else if z.norm() > 1.0 - 1e-6 {
        SeedOutcome::Escaped
    } else {
        SeedOutcome::Stalled
    }
}
