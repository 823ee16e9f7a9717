#![allow(dead_code)]

use std::f64::consts::PI;

use blochcomp::{AnalyticMap, Complex64, DiskPoint, HarmonicMap};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn disk_point(max_r: f64) -> impl Strategy<Value = DiskPoint> {
    (0.0..max_r, 0.0..2.0 * PI).prop_map(|(r, t)| DiskPoint::from_polar(r, t).unwrap())
}

pub fn unit() -> impl Strategy<Value = Complex64> {
    (0.0..2.0 * PI).prop_map(|t| Complex64::from_polar(1.0, t))
}

pub fn random_point(rng: &mut ChaCha8Rng, max_r: f64) -> DiskPoint {
    let r = max_r * rng.gen::<f64>().sqrt();
    DiskPoint::from_polar(r, rng.gen_range(0.0..2.0 * PI)).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))
}

fn random_coeffs(rng: &mut ChaCha8Rng, degree: usize, scale: f64) -> Vec<Complex64> {
    (0..=degree)
        .map(|_| Complex64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
        .collect()
}

/// Polynomial whose coefficient moduli sum to at most `total`.
pub fn small_poly(rng: &mut ChaCha8Rng, degree: usize, total: f64) -> AnalyticMap {
    let raw = random_coeffs(rng, degree, 1.0);
    let s: f64 = raw.iter().map(|c| c.norm()).sum();
    AnalyticMap::polynomial(raw.into_iter().map(|c| c * (total / s)).collect())
}

/// A random analytic self-map of the disk built from the self-map node kinds.
pub fn random_self_map(rng: &mut ChaCha8Rng, depth: usize) -> AnalyticMap {
    let pick = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..6) };
    match pick {
        0 => AnalyticMap::rotated_moebius(random_point(rng, 0.9), random_unit(rng)).unwrap(),
        1 => {
            let n = rng.gen_range(1..4);
            let zeros = (0..n).map(|_| random_point(rng, 0.9)).collect();
            AnalyticMap::blaschke(zeros, random_unit(rng)).unwrap()
        }
        2 => {
            let (degree, total) = (rng.gen_range(1..5), rng.gen_range(0.3..0.95));
            small_poly(rng, degree, total)
        }
        3 => AnalyticMap::compose(random_self_map(rng, depth - 1), random_self_map(rng, depth - 1)),
        4 => AnalyticMap::product(random_self_map(rng, depth - 1), random_self_map(rng, depth - 1)),
        _ => {
            let w = rng.gen_range(0.05..0.95);
            AnalyticMap::affine(vec![
                (Complex64::new(w, 0.0), random_self_map(rng, depth - 1)),
                (Complex64::new(1.0 - w, 0.0), random_self_map(rng, depth - 1)),
            ])
        }
    }
}

/// A random analytic function on the disk, using every node kind.
pub fn random_function(rng: &mut ChaCha8Rng, depth: usize) -> AnalyticMap {
    let pick = if depth == 0 { rng.gen_range(0..5) } else { rng.gen_range(0..10) };
    match pick {
        0 => {
            let degree = rng.gen_range(0..6);
            AnalyticMap::polynomial(random_coeffs(rng, degree, 1.0))
        }
        1 => AnalyticMap::power_series(random_coeffs(rng, 20, 1.0), rng.gen_range(5..20), Some(1.5)),
        2 => AnalyticMap::extremal(random_point(rng, 0.9), rng.gen_range(0.3..3.0)).unwrap(),
        3 => AnalyticMap::boundary_primitive(random_unit(rng), rng.gen_range(0.3..3.0)).unwrap(),
        4 => random_self_map(rng, 0),
        5 => AnalyticMap::compose(random_function(rng, depth - 1), random_self_map(rng, 1)),
        6 => AnalyticMap::product(random_function(rng, depth - 1), random_function(rng, depth - 1)),
        7 => random_function(rng, depth - 1).scale(Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))),
        8 => AnalyticMap::affine(vec![
            (Complex64::new(rng.gen_range(-1.0..1.0), 0.5), random_function(rng, depth - 1)),
            (Complex64::new(0.0, rng.gen_range(-1.0..1.0)), random_function(rng, depth - 1)),
        ]),
        _ => random_self_map(rng, depth),
    }
}

pub fn random_harmonic(rng: &mut ChaCha8Rng, depth: usize) -> HarmonicMap {
    HarmonicMap::new(random_function(rng, depth), random_function(rng, depth))
}

/// Fourth-order central difference of an analytic function along `dir`.
pub fn fd_derivative(f: impl Fn(Complex64) -> Complex64, z: Complex64, h: f64, dir: Complex64) -> Complex64 {
    let s = dir * h;
    (-f(z + s * 2.0) + f(z + s) * 8.0 - f(z - s) * 8.0 + f(z - s * 2.0)) / (s * 12.0)
}

/// Fourth-order partials `(f_x, f_y)` of a complex function of the plane.
pub fn fd_partials(f: impl Fn(Complex64) -> Complex64, z: Complex64, h: f64) -> (Complex64, Complex64) {
    let d = |dir: Complex64| {
        let s = dir * h;
        (-f(z + s * 2.0) + f(z + s) * 8.0 - f(z - s) * 8.0 + f(z - s * 2.0)) / (12.0 * h)
    };
    (d(Complex64::new(1.0, 0.0)), d(Complex64::new(0.0, 1.0)))
}

/// Brute-force maximum of `f` over `n_r x n_t` polar samples: half the radii
/// uniform on `[0, 0.99]`, half log-spaced out to `1 - r_gap`.
pub fn dense_grid_max(f: impl Fn(Complex64) -> f64 + Sync, n_r: usize, n_t: usize, r_gap: f64) -> f64 {
    use rayon::prelude::*;
    let half = n_r / 2;
    let radii: Vec<f64> = (0..n_r)
        .map(|i| {
            if i < half {
                0.99 * i as f64 / (half - 1) as f64
            } else {
                let t = (i - half + 1) as f64 / (n_r - half) as f64;
                1.0 - 0.01 * (r_gap / 0.01).powf(t)
            }
        })
        .collect();
    radii
        .par_iter()
        .map(|&r| {
            (0..n_t)
                .map(|j| f(Complex64::from_polar(r, 2.0 * PI * j as f64 / n_t as f64)))
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}
