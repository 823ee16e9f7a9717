use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::time::Instant;

use blochcomp::closed_range::{
    closed_range_report, default_probes, derived_net_radius, g_sample, net_check, omega_sample, ImageSetSample,
    LevelSetSample, RangeBudget, RangeEvidence,
};
use blochcomp::norms::norm;
use blochcomp::operator::{classify, tau, tau_sup};
use blochcomp::{Criterion, DecayProfile, DiskPoint, SupEstimate, SupStatus, TauParams, Verdict};
use serde_json::{json, Value};

use crate::csv::{num, write_rows};
use crate::{usage, Command, Context, Failure, RunRecord, EXIT_DEFINITE, EXIT_INCONCLUSIVE};

const DEFAULT_C: f64 = 0.5;
const DEFAULT_C_GRID: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
const DEFAULT_PROFILE_LEVELS: usize = 12;
const MAX_PROFILE_LEVELS: usize = 48;

struct Run<'a, 'b> {
    ctx: &'a Context<'b>,
    out: &'a mut dyn Write,
    verdicts: BTreeMap<String, String>,
    timings: BTreeMap<String, f64>,
    /// Effective values of defaulted parameters.
    resolved: serde_json::Map<String, Value>,
}

impl Run<'_, '_> {
    fn timed<T>(&mut self, label: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let v = f();
        self.timings.insert(label.to_string(), start.elapsed().as_secs_f64() * 1e3);
        v
    }

    fn header(&mut self) -> std::io::Result<()> {
        let budget = serde_json::to_string(&self.ctx.budget).expect("budget serializes");
        writeln!(self.out, "command: {}", self.ctx.command.name())?;
        writeln!(self.out, "input sha256: {}", self.ctx.digest)?;
        writeln!(self.out, "alpha: {}", self.ctx.alpha.value())?;
        writeln!(self.out, "budget: {budget}")?;
        for (k, v) in &self.resolved {
            writeln!(self.out, "{}: {v}", k.replace('_', " "))?;
        }
        Ok(())
    }

    fn resolve(&mut self, key: &str, value: impl serde::Serialize) {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.resolved.insert(key.to_string(), v);
    }

    fn params(&self) -> Result<TauParams, Failure> {
        let phi = self.ctx.doc.map.clone().ok_or_else(|| usage("the document has no `map`"))?;
        Ok(TauParams::new(phi, self.ctx.alpha)?)
    }

    fn finish(self, code: i32) -> Result<i32, Failure> {
        if let Some(dir) = &self.ctx.opts.out {
            let o = self.ctx.opts;
            let mut parameters = json!({
                "alpha": self.ctx.alpha.value(),
                "c": o.c,
                "r": o.r,
                "r0": o.r0,
                "kmax": o.kmax,
                "rays": o.rays,
                "budget": self.ctx.budget,
            });
            parameters
                .as_object_mut()
                .expect("parameters are an object")
                .extend(self.resolved);
            let record = RunRecord {
                input_digest: self.ctx.digest.clone(),
                command: self.ctx.command.name().to_string(),
                parameters,
                verdicts: self.verdicts,
                timings_ms: self.timings,
            };
            record.write(dir)?;
        }
        Ok(code)
    }
}

fn point(z: DiskPoint) -> String {
    format!("({}, {})", num(z.re()), num(z.im()))
}

fn sup_line(label: &str, s: &SupEstimate) -> String {
    let extra = s.extrapolated.map(|e| format!(", extrapolated {}", num(e))).unwrap_or_default();
    format!(
        "{label}: {} [{:?}] at {}{extra}, {} evaluations",
        num(s.value),
        s.status,
        point(s.witness),
        s.evaluations
    )
}

fn profile_line(label: &str, p: &DecayProfile) -> String {
    let tail: Vec<String> = p
        .radii
        .iter()
        .zip(&p.values)
        .rev()
        .take(3)
        .rev()
        .map(|(r, v)| format!("{}@{}", num(*v), num(*r)))
        .collect();
    let vacuous = if p.vacuous { " (vacuous)" } else { "" };
    format!("{label}: {:?}{vacuous}; tail {}", p.verdict, tail.join(" "))
}

fn c_values(ctx: &Context<'_>, default: &[f64]) -> Result<Vec<f64>, Failure> {
    let cs = if ctx.opts.c.is_empty() {
        default.to_vec()
    } else {
        ctx.opts.c.clone()
    };
    if let Some(bad) = cs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(usage(format!("--c must be positive, got {bad}")));
    }
    Ok(cs)
}

fn range_budget(ctx: &Context<'_>) -> RangeBudget {
    let mut rb = RangeBudget {
        sup: ctx.budget.clone(),
        net_radius: ctx.opts.r,
        ..RangeBudget::default()
    };
    if let Some(k) = ctx.opts.kmax {
        rb.omega.k_max = k;
        rb.family.k_max = rb.family.k_max.min(k);
    }
    if let Some(r0) = ctx.opts.r0 {
        rb.r0_sweep = vec![r0];
    }
    rb
}

fn write_clouds(ctx: &Context<'_>, omega: &LevelSetSample, g: &ImageSetSample) -> Result<(), Failure> {
    let Some(dir) = &ctx.opts.out else { return Ok(()) };
    let mut w = BufWriter::new(File::create(dir.join("omega.csv"))?);
    write_rows(&mut w, "re,im,tau", omega.points.iter().map(|o| vec![o.z.re(), o.z.im(), o.tau]))?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(dir.join("gset.csv"))?);
    write_rows(
        &mut w,
        "re,im,preimage_re,preimage_im",
        g.points.iter().map(|p| vec![p.w.re(), p.w.im(), p.preimage.re(), p.preimage.im()]),
    )?;
    w.flush()?;
    Ok(())
}

pub(crate) fn dispatch(ctx: &Context<'_>, out: &mut dyn Write) -> Result<i32, Failure> {
    if let Some(dir) = &ctx.opts.out {
        fs::create_dir_all(dir)?;
    }
    let mut run = Run {
        ctx,
        out,
        verdicts: BTreeMap::new(),
        timings: BTreeMap::new(),
        resolved: serde_json::Map::new(),
    };
    let code = match ctx.command {
        Command::Classify => cmd_classify(&mut run)?,
        Command::TauProfile => cmd_tau_profile(&mut run)?,
        Command::Omega => cmd_omega(&mut run)?,
        Command::ClosedRange => cmd_closed_range(&mut run)?,
        Command::Seminorm => cmd_seminorm(&mut run)?,
        Command::NetCheck => cmd_net_check(&mut run)?,
    };
    run.finish(code)
}

fn cmd_classify(run: &mut Run<'_, '_>) -> Result<i32, Failure> {
    let p = run.params()?;
    let budget = run.ctx.budget.clone();
    let report = run.timed("classify", || classify(&p, &budget))?;
    run.header()?;
    writeln!(run.out, "{}", sup_line("sup tau", &report.tau_sup))?;
    writeln!(run.out, "{}", profile_line("tau as |z| -> 1", &report.boundary_limit_by_base))?;
    writeln!(run.out, "{}", profile_line("tau as |phi(z)| -> 1", &report.boundary_limit_by_image))?;
    writeln!(run.out, "{}", profile_line("phi in little Bloch", &report.phi_little_bloch))?;
    for (k, v) in &report.verdicts {
        writeln!(run.out, "{}: {v:?}", k.name())?;
        run.verdicts.insert(k.name().to_string(), format!("{v:?}"));
    }
    writeln!(
        run.out,
        "bounded: {:?}; compact: {:?}; HB→HB₀: {:?}",
        report.verdict(Criterion::BoundedHbToHb),
        report.verdict(Criterion::CompactHbToHb),
        report.verdict(Criterion::BoundedHbToHb0)
    )?;
    Ok(if report.all_inconclusive() {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_DEFINITE
    })
}

fn cmd_tau_profile(run: &mut Run<'_, '_>) -> Result<i32, Failure> {
    let p = run.params()?;
    let levels = run.ctx.opts.kmax.unwrap_or(DEFAULT_PROFILE_LEVELS);
    let rays = run.ctx.opts.rays;
    run.resolve("levels", levels);
    if levels == 0 || levels > MAX_PROFILE_LEVELS || rays == 0 {
        return Err(usage(format!(
            "tau-profile needs 1 <= --kmax <= {MAX_PROFILE_LEVELS} and --rays >= 1"
        )));
    }
    let rows = run.timed("tau_profile", || {
        let mut rows = Vec::with_capacity(levels * rays);
        for k in 1..=levels {
            let r = 1.0 - 0.5f64.powi(k as i32);
            for j in 0..rays {
                let theta = 2.0 * PI * j as f64 / rays as f64;
                rows.push(vec![r, theta, tau(&p, DiskPoint::from_polar(r, theta)?)?]);
            }
        }
        Ok::<_, blochcomp::Error>(rows)
    })?;
    match &run.ctx.opts.out {
        Some(dir) => {
            let mut w = BufWriter::new(File::create(dir.join("tau_profile.csv"))?);
            write_rows(&mut w, "r,theta,tau", rows)?;
            w.flush()?;
        }
        None => write_rows(run.out, "r,theta,tau", rows)?,
    }
    Ok(EXIT_DEFINITE)
}

fn cmd_omega(run: &mut Run<'_, '_>) -> Result<i32, Failure> {
    let p = run.params()?;
    let c = c_values(run.ctx, &[DEFAULT_C])?[0];
    let grid = range_budget(run.ctx).omega;
    run.resolve("c_used", [c]);
    run.resolve("omega_grid", &grid);
    let omega = run.timed("omega", || omega_sample(&p, c, &grid))?;
    let g = g_sample(&p, &omega)?;
    if run.ctx.opts.out.is_some() {
        write_clouds(run.ctx, &omega, &g)?;
        run.header()?;
        writeln!(run.out, "c: {}", num(c))?;
        writeln!(run.out, "omega points: {}", omega.points.len())?;
        if let (Some(a), Some(b)) = (omega.inner_radius(), g.inner_radius()) {
            writeln!(run.out, "omega inner radius: {}", num(a))?;
            writeln!(run.out, "image inner radius: {}", num(b))?;
        }
    } else {
        write_rows(run.out, "re,im,tau", omega.points.iter().map(|o| vec![o.z.re(), o.z.im(), o.tau]))?;
    }
    Ok(EXIT_DEFINITE)
}

fn cmd_closed_range(run: &mut Run<'_, '_>) -> Result<i32, Failure> {
    let p = run.params()?;
    let cs = c_values(run.ctx, &DEFAULT_C_GRID)?;
    let rb = range_budget(run.ctx);
    run.resolve("c_used", &cs);
    run.resolve("range_budget", &rb);
    let report = run.timed("closed_range", || closed_range_report(&p, &cs, &rb))?;
    write_clouds(run.ctx, &report.levels[0].omega, &report.levels[0].gset)?;
    run.header()?;
    writeln!(run.out, "{}", sup_line("sup tau", &report.tau_sup))?;
    let bb = &report.bounded_below;
    writeln!(run.out, "bounded-below estimate: {} (minimizer {})", num(bb.eps_est), bb.minimizer)?;
    for l in &report.levels {
        writeln!(run.out, "c = {}", num(l.c))?;
        writeln!(run.out, "  omega points: {}", l.omega_size)?;
        if let (Some(a), Some(b)) = (l.omega_inner_radius, l.g_inner_radius) {
            writeln!(run.out, "  omega inner radius: {}; image inner radius: {}", num(a), num(b))?;
        }
        writeln!(
            run.out,
            "  net r = {}: {}/{} probes covered, worst gap {} at {}",
            num(l.net.r),
            l.net.probes_covered,
            l.net.probes_total,
            num(l.net.worst_gap),
            point(l.net.worst_probe)
        )?;
        for a in &l.annulus {
            writeln!(
                run.out,
                "  annulus r0 = {}: {:?} ({} accepted, {} unresolved, {} failed)",
                num(a.r0),
                a.verdict,
                a.accepted,
                a.unresolved,
                a.failures.len()
            )?;
        }
        writeln!(
            run.out,
            "  sampling estimate: {} (minimizer {})",
            num(l.sampling.s_est),
            l.sampling.minimizer
        )?;
    }
    writeln!(run.out, "closed range: {:?}", report.aggregate)?;
    run.verdicts.insert("closed_range".into(), format!("{:?}", report.aggregate));
    Ok(if report.aggregate == RangeEvidence::Inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_DEFINITE
    })
}

fn cmd_seminorm(run: &mut Run<'_, '_>) -> Result<i32, Failure> {
    let f = run
        .ctx
        .doc
        .function
        .clone()
        .ok_or_else(|| usage("seminorm needs `h`, `g` or `extremal` in the document"))?;
    let budget = run.ctx.budget.clone();
    let alpha = run.ctx.alpha;
    let n = run.timed("seminorm", || norm(&f, alpha, &budget))?;
    run.header()?;
    writeln!(run.out, "{}", sup_line("seminorm", &n.seminorm))?;
    writeln!(run.out, "|f(0)|: {}", num(n.at_origin))?;
    writeln!(run.out, "norm: {}", num(n.value))?;
    writeln!(run.out, "status: {:?}", n.status())?;
    run.verdicts.insert("seminorm".into(), format!("{:?}", n.status()));
    Ok(if n.status() == SupStatus::Inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_DEFINITE
    })
}

fn cmd_net_check(run: &mut Run<'_, '_>) -> Result<i32, Failure> {
    let p = run.params()?;
    let c = c_values(run.ctx, &[DEFAULT_C])?[0];
    let rb = range_budget(run.ctx);
    run.resolve("c_used", [c]);
    run.resolve("omega_grid", &rb.omega);
    let r = match run.ctx.opts.r {
        Some(r) => r,
        None => {
            let s = tau_sup(&p, &rb.sup)?;
            if s.status == SupStatus::Diverging {
                return Err(blochcomp::Error::NotBounded("sup tau is diverging".into()).into());
            }
            derived_net_radius(c, s.value, p.alpha)
        }
    };
    let omega = run.timed("omega", || omega_sample(&p, c, &rb.omega))?;
    let g = g_sample(&p, &omega)?;
    let res = run.timed("net_check", || net_check(&g, r, &default_probes()))?;
    write_clouds(run.ctx, &omega, &g)?;
    run.header()?;
    writeln!(run.out, "c: {}", num(c))?;
    writeln!(run.out, "r: {}", num(r))?;
    writeln!(run.out, "probes covered: {}/{}", res.probes_covered, res.probes_total)?;
    writeln!(run.out, "worst gap: {} at {}", num(res.worst_gap), point(res.worst_probe))?;
    let verdict = if res.full_coverage() { Verdict::Yes } else { Verdict::No };
    writeln!(run.out, "r-net: {verdict:?}")?;
    run.verdicts.insert("r_net".into(), format!("{verdict:?}"));
    Ok(EXIT_DEFINITE)
}
