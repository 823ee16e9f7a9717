mod common;

use std::num::NonZeroUsize;

use blochcomp::disk::moebius_deriv;
use blochcomp::function::{validate_self_map, SelfMapStatus};
use blochcomp::{AnalyticMap, Complex64, DiskPoint, Error, HarmonicMap};
use common::{disk_point, fd_derivative, fd_partials, random_function, random_harmonic, random_point};
use gauss_quad::GaussLegendre;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn at(f: &AnalyticMap) -> impl Fn(Complex64) -> Complex64 + '_ {
    move |z| f.eval(DiskPoint::from_complex(z).unwrap()).unwrap()
}

/// `phi(z)` as `z * int_0^1 phi'(t z) dt` by Gauss-Legendre.
fn primitive_by_quadrature(deriv: impl Fn(Complex64) -> Complex64, z: Complex64) -> Complex64 {
    let gl = GaussLegendre::new(NonZeroUsize::new(200).unwrap());
    let re = gl.integrate(0.0, 1.0, |t| (deriv(z * t) * z).re);
    let im = gl.integrate(0.0, 1.0, |t| (deriv(z * t) * z).im);
    Complex64::new(re, im)
}

#[test]
fn derivatives_match_finite_differences_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 1000 {
        let f = random_function(&mut rng, 3);
        let z = random_point(&mut rng, 0.8);
        let Ok((v, d)) = f.jet(z) else { continue };
        if !(v.norm() < 1e6 && d.norm() < 1e6) {
            continue;
        }
        assert_eq!(v, f.eval(z).unwrap());
        assert_eq!(d, f.deriv(z).unwrap());
        let h = 1e-3 * (1.0 - z.modulus());
        let scale = d.norm().max(v.norm()).max(1.0);
        for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            let fd = fd_derivative(at(&f), z.to_complex(), h, dir);
            assert!((fd - d).norm() < 1e-6 * scale, "{f:?} at {z:?}: {fd} vs {d}");
        }
        checked += 1;
    }
}

#[test]
fn wirtinger_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 500 {
        let f = random_harmonic(&mut rng, 2);
        let z = random_point(&mut rng, 0.8);
        let Ok((fz, fzb)) = f.wirtinger(z) else { continue };
        let scale = fz.norm().max(fzb.norm()).max(1.0);
        if scale > 1e6 {
            continue;
        }
        let h = 1e-3 * (1.0 - z.modulus());
        let (fx, fy) = fd_partials(|w| f.eval(DiskPoint::from_complex(w).unwrap()).unwrap(), z.to_complex(), h);
        let i = Complex64::new(0.0, 1.0);
        assert!(((fx - i * fy) * 0.5 - fz).norm() < 1e-6 * scale);
        assert!(((fx + i * fy) * 0.5 - fzb).norm() < 1e-6 * scale);
        assert!((f.gradient_sum(z).unwrap() - (fz.norm() + fzb.norm())).abs() < 1e-12 * scale);
        checked += 1;
    }
}

#[test]
fn extremal_values_match_quadrature() {
    for &alpha in &[0.5, 1.0, 1.5, 2.0, 3.7] {
        for &(ar, ai) in &[(0.1, 0.0), (0.5, 0.0), (0.45, 0.779), (-0.3, -0.6), (0.0, 0.0)] {
            let a = DiskPoint::new(ar, ai).unwrap();
            let phi = AnalyticMap::extremal(a, alpha).unwrap();
            let k = a.one_minus_modulus_sq().powf(alpha);
            let deriv = |w: Complex64| -(Complex64::new(1.0, 0.0) - a.to_complex().conj() * w).powf(-2.0 * alpha) * k;
            for &(zr, zi) in &[(0.3, 0.2), (-0.7, 0.1), (0.6, -0.6), (0.05, 0.0)] {
                let z = DiskPoint::new(zr, zi).unwrap();
                let oracle = primitive_by_quadrature(deriv, z.to_complex());
                let got = phi.eval(z).unwrap();
                assert!((got - oracle).norm() < 1e-12, "alpha {alpha}, a {a:?}, z {z:?}: {got} vs {oracle}");
            }
        }
    }
}

#[test]
fn boundary_primitive_matches_quadrature() {
    let zeta = Complex64::from_polar(1.0, 0.7);
    for &alpha in &[0.5, 1.0, 2.0] {
        let f = AnalyticMap::boundary_primitive(zeta, alpha).unwrap();
        let deriv = |w: Complex64| (Complex64::new(1.0, 0.0) - zeta.conj() * w).powf(-alpha);
        let z = DiskPoint::new(0.4, 0.3).unwrap();
        let oracle = primitive_by_quadrature(deriv, z.to_complex());
        assert!((f.eval(z).unwrap() - oracle).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn extremal_modulus_is_a_power_of_the_automorphism(
        a in disk_point(0.95), z in disk_point(0.95), alpha in 0.2f64..4.0,
    ) {
        let d = AnalyticMap::extremal(a, alpha).unwrap().deriv(z).unwrap();
        let expected = moebius_deriv(a, z).norm().powf(alpha);
        prop_assert!((d.norm() - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn extremal_is_continuous_across_the_real_line_of_conj_a_z(
        a in disk_point(0.95), s in -0.9f64..0.9, alpha in 0.2f64..4.0,
    ) {
        prop_assume!(a.modulus() > 1e-3);
        // points with conj(a) z real lie on the line through 0 in direction a
        let dir = a.to_complex() / a.modulus();
        let z = dir * s;
        let eps = Complex64::new(0.0, 1e-9) * dir;
        let phi = AnalyticMap::extremal(a, alpha).unwrap();
        let plus = phi.jet(DiskPoint::from_complex(z + eps).unwrap()).unwrap();
        let minus = phi.jet(DiskPoint::from_complex(z - eps).unwrap()).unwrap();
        let scale = plus.1.norm().max(1.0);
        prop_assert!((plus.0 - minus.0).norm() < 1e-7 * scale);
        prop_assert!((plus.1 - minus.1).norm() < 1e-6 * scale);
    }

    #[test]
    fn extremal_at_alpha_one_is_shifted_automorphism(a in disk_point(0.95), z in disk_point(0.95)) {
        let phi = AnalyticMap::extremal(a, 1.0).unwrap();
        let psi = AnalyticMap::moebius(a);
        let expected = psi.eval(z).unwrap() - a.to_complex();
        prop_assert!((phi.eval(z).unwrap() - expected).norm() < 1e-12);
    }
}

#[test]
fn harmonic_scaling_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let f: HarmonicMap = random_harmonic(&mut rng, 2);
        let z = random_point(&mut rng, 0.7);
        let c = Complex64::new(0.7, -1.3);
        let (Ok(v), Ok(sv)) = (f.eval(z), f.scale(c).eval(z)) else { continue };
        assert!((sv - v * c).norm() <= 1e-12 * v.norm().max(1.0) * c.norm());
    }
}

#[test]
fn self_map_screening_of_random_blaschke_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let radii = blochcomp::function::dyadic_radii(16);
    for _ in 0..20 {
        let zeros = (0..3).map(|_| random_point(&mut rng, 0.9)).collect();
        let b = AnalyticMap::blaschke(zeros, Complex64::new(1.0, 0.0)).unwrap();
        let v = validate_self_map(&b, &radii, 128).unwrap();
        assert_eq!(v.verdict, SelfMapStatus::Verified);
        assert!(v.boundary_contact);
    }
    let out = AnalyticMap::identity().scale(Complex64::new(1.2, 0.0));
    let v = validate_self_map(&out, &radii, 128).unwrap();
    assert_eq!(v.verdict, SelfMapStatus::Violated);
    assert!(v.max_modulus_seen >= 1.0);
    assert!(out.eval(v.witness).unwrap().norm() >= 1.0);
}

#[test]
fn composition_outside_the_disk_is_a_domain_error() {
    let grow = AnalyticMap::identity().scale(Complex64::new(3.0, 0.0));
    let f = AnalyticMap::compose(AnalyticMap::moebius(DiskPoint::new(0.2, 0.0).unwrap()), grow);
    let err = f.eval(DiskPoint::new(0.5, 0.0).unwrap()).unwrap_err();
    assert!(matches!(err, Error::Domain { .. }));
}
