//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails if any criterion does.
//!
//! Run with `cargo test -p blochcomp-cli --test acceptance -- --nocapture`.

use std::f64::consts::{FRAC_PI_3, PI};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use blochcomp::closed_range::{annulus_check, closed_range_report, g_sample, omega_sample, RangeBudget, RangeEvidence};
use blochcomp::disk::{moebius, moebius_deriv, pseudo_hyperbolic};
use blochcomp::norms::{growth_bound, growth_integral, local_intensity, norm, seminorm};
use blochcomp::operator::{classify, pullback, tau};
use blochcomp::closed_range::AnnulusVerdict;
use blochcomp::{
    Alpha, AnalyticMap, Budget, Complex64, Criterion, DiskPoint, HarmonicMap, SupStatus, TauParams, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type CriterionFn = fn() -> Outcome;
type Expectation = Vec<(Criterion, Verdict)>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn point(rng: &mut ChaCha8Rng, max_r: f64) -> DiskPoint {
    DiskPoint::from_polar(max_r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI)).unwrap()
}

fn unit(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))
}

fn poly(rng: &mut ChaCha8Rng, degree: usize, total: f64) -> AnalyticMap {
    let raw: Vec<Complex64> = (0..=degree)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let s: f64 = raw.iter().map(|z| z.norm()).sum();
    AnalyticMap::polynomial(raw.into_iter().map(|z| z * (total / s)).collect())
}

fn self_map(rng: &mut ChaCha8Rng, depth: usize) -> AnalyticMap {
    match rng.gen_range(0..if depth == 0 { 3 } else { 4 }) {
        0 => AnalyticMap::rotated_moebius(point(rng, 0.9), unit(rng)).unwrap(),
        1 => {
            let zeros = (0..rng.gen_range(1..4)).map(|_| point(rng, 0.9)).collect();
            AnalyticMap::blaschke(zeros, unit(rng)).unwrap()
        }
        2 => {
            let (d, t) = (rng.gen_range(1..5), rng.gen_range(0.3..0.95));
            poly(rng, d, t)
        }
        _ => AnalyticMap::compose(self_map(rng, depth - 1), self_map(rng, depth - 1)),
    }
}

fn family_function(rng: &mut ChaCha8Rng, alpha: f64) -> HarmonicMap {
    match rng.gen_range(0..3) {
        0 => HarmonicMap::extremal(point(rng, 0.95), alpha).unwrap(),
        1 => HarmonicMap::new(
            AnalyticMap::boundary_primitive(unit(rng), alpha).unwrap(),
            AnalyticMap::boundary_primitive(unit(rng), alpha).unwrap(),
        ),
        _ => {
            let (dh, dg) = (rng.gen_range(1..=6), rng.gen_range(0..=6));
            HarmonicMap::new(poly(rng, dh, 2.0), poly(rng, dg, 1.0))
        }
    }
}

fn crit_geometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 3];
    for _ in 0..1000 {
        let (a, z, w) = (point(&mut rng, 0.99), point(&mut rng, 0.99), point(&mut rng, 0.99));
        let back = moebius(a, DiskPoint::from_complex(moebius(a, z)).unwrap());
        worst[0] = worst[0].max((back - z.to_complex()).norm());
        let za = DiskPoint::from_complex(moebius(a, z)).unwrap();
        let wa = DiskPoint::from_complex(moebius(a, w)).unwrap();
        worst[1] = worst[1].max((pseudo_hyperbolic(za, wa) - pseudo_hyperbolic(z, w)).abs());
        let rho = pseudo_hyperbolic(z, w);
        let rhs = z.one_minus_modulus_sq() * moebius_deriv(w, z).norm();
        worst[2] = worst[2].max((1.0 - rho * rho - rhs).abs());
    }
    check(worst.iter().all(|&e| e < 1e-10), || format!("max errors {worst:?}"))?;
    Ok(format!("max errors involution {:.1e}, invariance {:.1e}, identity {:.1e}", worst[0], worst[1], worst[2]))
}

fn crit_automorphism_weight() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let phi = AnalyticMap::rotated_moebius(point(&mut rng, 0.99), unit(&mut rng)).unwrap();
        let p = TauParams::new(phi, Alpha::ONE).map_err(|e| e.to_string())?;
        let t = tau(&p, point(&mut rng, 0.999)).map_err(|e| e.to_string())?;
        worst = worst.max((t - 1.0).abs());
    }
    check(worst < 1e-9, || format!("max |tau - 1| = {worst:e}"))?;
    Ok(format!("max |tau - 1| = {worst:.1e}"))
}

fn crit_extremal_seminorm() -> Outcome {
    let budget = Budget::default();
    let mut worst = (0.0f64, 0.0f64, Duration::ZERO);
    for a in [
        DiskPoint::new(0.1, 0.0).unwrap(),
        DiskPoint::new(0.5, 0.0).unwrap(),
        DiskPoint::from_polar(0.9, FRAC_PI_3).unwrap(),
    ] {
        for al in [0.5, 1.0, 2.0] {
            let f = HarmonicMap::extremal(a, al).unwrap();
            let start = Instant::now();
            let est = seminorm(&f, Alpha::new(al).unwrap(), &budget).map_err(|e| e.to_string())?;
            let took = start.elapsed();
            let dist = pseudo_hyperbolic(est.witness, a);
            check((est.value - 2.0).abs() < 1e-3, || format!("a {a:?}, alpha {al}: seminorm {}", est.value))?;
            check(dist < 0.05, || format!("a {a:?}, alpha {al}: witness at rho {dist}"))?;
            check(took < Duration::from_secs(1), || format!("a {a:?}, alpha {al}: took {took:?}"))?;
            worst = (worst.0.max((est.value - 2.0).abs()), worst.1.max(dist), worst.2.max(took));
        }
    }
    Ok(format!("max |s - 2| = {:.1e}, max witness rho = {:.1e}, slowest {:?}", worst.0, worst.1, worst.2))
}

fn crit_pullback_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 1000 {
        let al = rng.gen_range(0.3..3.0);
        let alpha = Alpha::new(al).unwrap();
        let phi = self_map(&mut rng, 2);
        let f = family_function(&mut rng, al);
        let z = point(&mut rng, 0.95);
        let p = match TauParams::new(phi.clone(), alpha) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let w = DiskPoint::from_complex(phi.eval(z).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let lhs = local_intensity(&pullback(&phi, &f), alpha, z).map_err(|e| e.to_string())?;
        let rhs = tau(&p, z).map_err(|e| e.to_string())? * local_intensity(&f, alpha, w).map_err(|e| e.to_string())?;
        let scale = lhs.abs().max(rhs.abs());
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
        n += 1;
    }
    check(worst < 1e-10, || format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.1e}"))
}

fn crit_classification() -> Outcome {
    use Verdict::{No, Yes};
    let budget = Budget::default();
    let run = |phi: AnalyticMap| -> Result<blochcomp::ClassificationReport, String> {
        let p = TauParams::new(phi, Alpha::ONE).map_err(|e| e.to_string())?;
        classify(&p, &budget).map_err(|e| e.to_string())
    };
    let cases: Vec<(&str, AnalyticMap, Expectation)> = vec![
        (
            "identity",
            AnalyticMap::identity(),
            vec![(Criterion::BoundedHbToHb, Yes), (Criterion::CompactHbToHb, No)],
        ),
        (
            "scale 0.5",
            AnalyticMap::identity().scale(c(0.5)),
            vec![(Criterion::CompactHbToHb, Yes), (Criterion::BoundedHbToHb0, Yes)],
        ),
        (
            "z^2",
            AnalyticMap::monomial(2),
            vec![
                (Criterion::BoundedHbToHb, Yes),
                (Criterion::CompactHbToHb, No),
                (Criterion::BoundedHbToHb0, No),
            ],
        ),
        (
            "psi_0.5",
            AnalyticMap::moebius(DiskPoint::new(0.5, 0.0).unwrap()),
            vec![(Criterion::BoundedHbToHb, Yes), (Criterion::CompactHbToHb, No)],
        ),
    ];
    let mut inconclusive = 0;
    for (name, phi, expected) in cases {
        let r = run(phi)?;
        for (k, v) in expected {
            check(r.verdict(k) == v, || format!("{name}: {} is {:?}", k.name(), r.verdict(k)))?;
        }
        inconclusive += r.verdicts.iter().filter(|(_, v)| !v.is_definite()).count();
        match name {
            "z^2" => check((r.tau_sup.value - 1.0).abs() < 1e-3, || format!("z^2: sup tau {}", r.tau_sup.value))?,
            "psi_0.5" => {
                check((r.tau_sup.value - 1.0).abs() < 1e-9, || format!("psi: sup tau {}", r.tau_sup.value))?
            }
            _ => {}
        }
    }
    check(inconclusive == 0, || format!("{inconclusive} inconclusive verdicts"))?;
    Ok("all four reference maps match; no inconclusive verdicts".into())
}

fn crit_closed_range() -> Outcome {
    let rb = RangeBudget::default();
    let sq = TauParams::new(AnalyticMap::monomial(2), Alpha::ONE).map_err(|e| e.to_string())?;
    let om = omega_sample(&sq, 0.9, &rb.omega).map_err(|e| e.to_string())?;
    let g = g_sample(&sq, &om).map_err(|e| e.to_string())?;
    let (t, gi) = (om.inner_radius().unwrap_or(f64::NAN), g.inner_radius().unwrap_or(f64::NAN));
    check((t - 0.6268).abs() <= 0.005, || format!("omega threshold {t}"))?;
    check((gi - 0.3929).abs() <= 0.01, || format!("image inner radius {gi}"))?;
    let ann = annulus_check(&sq, 0.9, 0.45, &rb.annulus).map_err(|e| e.to_string())?;
    check(ann.verdict == AnnulusVerdict::Holds, || format!("annulus {:?}", ann.verdict))?;

    let half = TauParams::new(AnalyticMap::identity().scale(c(0.5)), Alpha::ONE).map_err(|e| e.to_string())?;
    let rep = closed_range_report(&half, &[0.1, 0.25, 0.5, 0.75, 0.9], &rb).map_err(|e| e.to_string())?;
    check(rep.aggregate == RangeEvidence::EvidenceAgainst, || format!("scale 0.5: {:?}", rep.aggregate))?;

    let id = TauParams::new(AnalyticMap::identity(), Alpha::ONE).map_err(|e| e.to_string())?;
    let rep = closed_range_report(&id, &[0.5], &rb).map_err(|e| e.to_string())?;
    check(rep.aggregate == RangeEvidence::EvidenceFor, || format!("identity: {:?}", rep.aggregate))?;
    Ok(format!("threshold {t:.6}, image inner radius {gi:.6}; annulus holds; verdicts as expected"))
}

fn crit_growth_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let budget = Budget::default();
    let (mut pairs, mut violations) = (0, 0);
    while pairs < 1000 {
        let al = rng.gen_range(0.3..3.0);
        let alpha = Alpha::new(al).unwrap();
        let f = family_function(&mut rng, al).scale(Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
        let n = norm(&f, alpha, &budget).map_err(|e| e.to_string())?;
        if n.status() != SupStatus::Converged {
            continue;
        }
        let f0 = f.eval(DiskPoint::ORIGIN).map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let z = point(&mut rng, 0.999);
            let lhs = (f.eval(z).map_err(|e| e.to_string())? - f0).norm();
            let bound = growth_bound(n.value, f0, alpha, z).map_err(|e| e.to_string())?;
            if lhs > bound {
                violations += 1;
            }
            pairs += 1;
        }
    }
    check(violations == 0, || format!("{violations} violations"))?;
    let factor = 0.5 * growth_integral(Alpha::ONE, 0.5);
    check((factor - 2f64.ln()).abs() < 1e-12, || format!("factor at 1/2 is {factor}"))?;
    Ok(format!("{pairs} pairs, 0 violations; factor at |z| = 0.5 is {factor:.15}"))
}

fn dense_grid_max(f: &HarmonicMap, alpha: Alpha) -> f64 {
    use rayon::prelude::*;
    let (n_r, n_t) = (1000usize, 1000usize);
    let half = n_r / 2;
    (0..n_r)
        .into_par_iter()
        .map(|i| {
            let r = if i < half {
                0.99 * i as f64 / (half - 1) as f64
            } else {
                let t = (i - half + 1) as f64 / (n_r - half) as f64;
                1.0 - 0.01 * (1e-4f64 / 0.01).powf(t)
            };
            (0..n_t)
                .map(|j| {
                    let z = DiskPoint::from_polar(r, 2.0 * PI * j as f64 / n_t as f64).unwrap();
                    local_intensity(f, alpha, z).unwrap()
                })
                .fold(0.0f64, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

fn crit_seminorm_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let budget = Budget::default();
    let mut worst = 0.0f64;
    for i in 0..20 {
        let (dh, dg) = (rng.gen_range(1..=6), rng.gen_range(0..=6));
        let (th, tg) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..3.0));
        let f = HarmonicMap::new(poly(&mut rng, dh, th), poly(&mut rng, dg, tg));
        let alpha = Alpha::new([0.5, 1.0, 2.0][i % 3]).unwrap();
        let est = seminorm(&f, alpha, &budget).map_err(|e| e.to_string())?;
        let oracle = dense_grid_max(&f, alpha);
        let rel = (est.value - oracle).abs() / oracle;
        check(rel <= 1e-3, || format!("pair {i}: adaptive {} vs grid {oracle}", est.value))?;
        worst = worst.max(rel);
    }
    Ok(format!("20 pairs, max relative difference {worst:.1e}"))
}

fn blochcomp(args: &[&str], spec: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_blochcomp"))
        .args(args)
        .arg("--spec")
        .arg(spec)
        .output()
        .expect("binary runs")
}

fn crit_cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let sq = write("square.json", r#"{"map":{"type":"poly","coeffs":[[0,0],[0,0],[1,0]]}}"#);
    let a = blochcomp(&["tau-profile"], &sq);
    let b = blochcomp(&["tau-profile"], &sq);
    check(a.status.code() == Some(0), || format!("tau-profile exit {:?}", a.status.code()))?;
    check(!a.stdout.is_empty() && a.stdout == b.stdout, || "tau-profile output differs between runs".into())?;

    let invalid = write("invalid.json", r#"{"map":{"type":"blaschke","zeros":[[0.2,0],[1.2,0]]}}"#);
    let out = blochcomp(&["classify"], &invalid);
    check(out.status.code() == Some(1), || format!("invalid document exit {:?}", out.status.code()))?;

    // tangent to the circle at 1 with a cusp: every verdict needs deep levels
    let borderline = write(
        "borderline.json",
        r#"{"map":{"type":"affine","terms":[
            {"weight":[1,0],"map":{"type":"poly","coeffs":[[0.06696700846319259,0]]}},
            {"weight":[0.09330329915368074,0],"map":{"type":"boundary","zeta":[1,0],"alpha":0.9}}]},
          "alpha":1.0}"#,
    );
    let out = blochcomp(&["classify", "--kmax", "2"], &borderline);
    check(out.status.code() == Some(2), || format!("borderline exit {:?}", out.status.code()))?;
    Ok("tau-profile is byte-identical across runs; exit codes 0, 1 and 2 as documented".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, CriterionFn); 9] = [
        ("geometry identities", crit_geometry),
        ("automorphism weight", crit_automorphism_weight),
        ("extremal seminorm", crit_extremal_seminorm),
        ("pullback chain rule", crit_pullback_identity),
        ("classification table", crit_classification),
        ("closed-range evidence", crit_closed_range),
        ("growth bound", crit_growth_bound),
        ("seminorm oracle", crit_seminorm_oracle),
        ("cli determinism and exit codes", crit_cli),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                println!("FAIL {} {name} ({secs:.1}s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
