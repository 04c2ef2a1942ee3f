use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde_json::json;
use sticky_core::flow::{dermoune_identity_residuals, right_derivative_check};
use sticky_core::fuzz::{check_instance, sample_horizon, FuzzConfig, InstanceOutcome, Suite};
use sticky_core::gas::{
    jump_measures, position_space_residuals, velocity_coincidence_times, velocity_space_fields,
    velocity_space_residuals, ResidualReport,
};
use sticky_core::{
    cluster_aggregates, format_ranges, gvp_equivalence_check, simulate, Error, InitialData, ShockTimeline,
    TestFunction, Tolerances,
};

use crate::instance::InstanceFile;
use crate::output::{num, Artifacts};
use crate::GlobalArgs;

pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Instance file (JSON).
    pub instance: PathBuf,
    /// Simulation horizon; defaults to the instance's `t_end`, else runs to the last shock.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Uniform trajectory samples on [0, horizon], in addition to the shock times.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct GvpArgs {
    pub instance: PathBuf,
    /// Comma-separated evaluation times.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub times: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct GasArgs {
    pub instance: PathBuf,
    /// Time window `t1:t2` with 0 < t1 < t2.
    #[arg(long, value_parser = parse_window)]
    pub window: (f64, f64),
    /// Test function `kind:center:width` with kind bump, spline or cosine
    /// (width is the radius, or the knot spacing for splines). Repeatable.
    /// Defaults to all three shapes centered on the occupied range.
    #[arg(long = "test-function", value_parser = parse_test_function)]
    pub test_functions: Vec<TestFunction>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// Number of random instances.
    #[arg(long, default_value_t = 1000)]
    pub count: u64,
    /// Largest particle count.
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shift the first merged velocity by this amount; the suites must notice.
    #[arg(long)]
    pub inject_fault: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DermouneArgs {
    pub instance: PathBuf,
    /// Comma-separated times; defaults to 20 evenly spaced times before the sampling horizon.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub times: Vec<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected t1:t2")?;
    let t1: f64 = a.trim().parse().map_err(|e| format!("t1: {e}"))?;
    let t2: f64 = b.trim().parse().map_err(|e| format!("t2: {e}"))?;
    if !(0.0 < t1 && t1 < t2 && t2.is_finite()) {
        return Err(format!("need 0 < t1 < t2 < inf, got {t1}:{t2}"));
    }
    Ok((t1, t2))
}

fn parse_test_function(s: &str) -> std::result::Result<TestFunction, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Loaded {
    file: InstanceFile,
    data: InitialData,
    tol: Tolerances,
}

fn load(global: &GlobalArgs, path: &Path) -> Result<Loaded> {
    let file = InstanceFile::load(path)?;
    let data = file
        .to_data()
        .with_context(|| format!("invalid instance {}", path.display()))?;
    let tol = tolerances(global, file.tolerances());
    Ok(Loaded { file, data, tol })
}

fn tolerances(global: &GlobalArgs, mut tol: Tolerances) -> Tolerances {
    if let Some(abs) = global.tol_abs {
        tol.abs = abs;
    }
    if let Some(rel) = global.tol_rel {
        tol.rel = rel;
    }
    tol
}

fn check_tolerances(tol: &Tolerances) -> Result<()> {
    for (name, v) in [("abs", tol.abs), ("rel", tol.rel), ("event", tol.event)] {
        if !(v >= 0.0 && v.is_finite()) {
            bail!("tolerance `{name}` must be finite and non-negative, got {v}");
        }
    }
    Ok(())
}

fn tol_json(tol: &Tolerances) -> serde_json::Value {
    json!({"abs": tol.abs, "rel": tol.rel, "event": tol.event})
}

fn ranges_label(ranges: &[(usize, usize)]) -> String {
    ranges
        .iter()
        .map(|&(a, b)| format!("{a}-{b}"))
        .collect::<Vec<_>>()
        .join("|")
}

pub fn simulate_cmd(global: &GlobalArgs, args: &SimulateArgs) -> Result<Verdict> {
    let inst = load(global, &args.instance)?;
    check_tolerances(&inst.tol)?;
    let t_end = args.t_end.or(inst.file.t_end).unwrap_or(f64::INFINITY);
    let timeline = simulate(&inst.data, t_end, &inst.tol)?;
    let horizon = if t_end.is_finite() { t_end } else { sample_horizon(&timeline) };

    let mut out = Artifacts::create(&global.out_dir)?;
    write_events(&mut out, &timeline)?;
    write_segments(&mut out, &timeline)?;

    let mut times: Vec<f64> = match args.samples {
        0 => Vec::new(),
        1 => vec![0.0],
        k => (0..k).map(|i| horizon * i as f64 / (k - 1) as f64).collect(),
    };
    times.extend(timeline.event_times().into_iter().filter(|&s| s <= horizon));
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut rows = Vec::new();
    for &t in &times {
        let seg = timeline.segment_at(t)?;
        for (c, p) in seg.partition.clusters().iter().zip(&seg.paths) {
            for i in c.first..=c.last {
                rows.push(vec![num(t), i.to_string(), num(p.eval(t)), num(p.velocity(t)), num(p.acceleration())]);
            }
        }
    }
    out.table("trajectory.csv", &["t", "particle", "x", "v", "theta"], rows)?;

    let shocks = timeline.events().len();
    println!(
        "{} particle(s), {} shock(s){}, {} cluster(s) at t = {}",
        inst.data.len(),
        shocks,
        timeline
            .first_shock_time()
            .map_or(String::new(), |s| format!(" (first at {s})")),
        timeline.segment_at(horizon)?.partition.len(),
        horizon
    );
    println!("wrote {}", out.dir().display());
    out.finish(
        "simulate",
        json!({"instance": inst.file, "t_end": t_end.is_finite().then_some(t_end), "samples": args.samples,
               "tolerances": tol_json(&inst.tol)}),
        "pass",
    )?;
    Ok(Verdict::Pass)
}

fn write_events(out: &mut Artifacts, timeline: &ShockTimeline) -> Result<()> {
    let data = timeline.initial();
    let mut rows = Vec::new();
    for e in timeline.events() {
        for m in &e.merges {
            let (g, d) = m.merged;
            let agg = cluster_aggregates(data, g, d, e.time)?;
            rows.push(vec![
                num(e.time),
                format!("{g}-{d}"),
                ranges_label(&m.parts),
                num(agg.mass),
                num(agg.position),
                num(agg.velocity),
                num(agg.acceleration),
            ]);
        }
    }
    out.table(
        "events.csv",
        &["time", "merged", "parts", "mass", "position", "velocity", "acceleration"],
        rows,
    )
}

fn write_segments(out: &mut Artifacts, timeline: &ShockTimeline) -> Result<()> {
    let mut rows = Vec::new();
    for (k, seg) in timeline.segments().iter().enumerate() {
        for (c, p) in seg.partition.clusters().iter().zip(&seg.paths) {
            rows.push(vec![
                k.to_string(),
                num(seg.start),
                num(seg.end),
                format!("{}-{}", c.first, c.last),
                num(c.mass),
                num(p.c0),
                num(p.c1),
                num(p.c2),
            ]);
        }
    }
    out.table(
        "segments.csv",
        &["segment", "start", "end", "cluster", "mass", "c0", "c1", "c2"],
        rows,
    )
}

pub fn gvp(global: &GlobalArgs, args: &GvpArgs) -> Result<Verdict> {
    let inst = load(global, &args.instance)?;
    check_tolerances(&inst.tol)?;
    if let Some(bad) = args.times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        bail!("times must be finite and non-negative, got {bad}");
    }
    let report = match gvp_equivalence_check(&inst.data, &args.times, &inst.tol) {
        Err(e @ Error::InadmissibleData { .. }) => {
            return Err(anyhow::Error::new(e).context(
                "refusing to evaluate: a trailing particle with larger acceleration can catch up, \
                 stick, and the merged cluster can then be overtaken from behind, so the partition \
                 is not determined by endpoint tests",
            ))
        }
        r => r?,
    };
    let timeline = simulate(
        &inst.data,
        args.times.iter().copied().fold(1.0, f64::max),
        &inst.tol,
    )?;
    let shocks = timeline.event_times();
    let mut out = Artifacts::create(&global.out_dir)?;
    let rows: Vec<Vec<String>> = report
        .comparisons
        .iter()
        .map(|c| {
            let at_shock = shocks.iter().any(|s| (s - c.t).abs() <= inst.tol.event_window(c.t));
            vec![
                num(c.t),
                format_ranges(&c.simulated),
                match &c.variational {
                    Ok(r) => format_ranges(r),
                    Err(e) => format!("error: {e}"),
                },
                if c.matches() { "MATCH" } else { "MISMATCH" }.to_string(),
                at_shock.to_string(),
            ]
        })
        .collect();
    out.table("gvp.csv", &["t", "simulated", "variational", "verdict", "at_shock"], rows)?;
    for c in report.mismatches() {
        eprintln!("mismatch at t = {}: simulated {}, variational {:?}", c.t, format_ranges(&c.simulated), c.variational);
    }
    if report.acceleration_ties {
        println!("note: consecutive equal accelerations present");
    }
    let verdict = Verdict::from_pass(report.all_match());
    println!(
        "{}/{} times match; wrote {}",
        report.comparisons.len() - report.mismatches().count(),
        report.comparisons.len(),
        out.dir().display()
    );
    out.finish(
        "gvp",
        json!({"instance": inst.file, "times": args.times, "tolerances": tol_json(&inst.tol)}),
        verdict.label(),
    )?;
    Ok(verdict)
}

/// Bump/spline/cosine centered on `[lo, hi]` with half-width covering it plus one unit.
fn default_functions(lo: f64, hi: f64) -> Vec<TestFunction> {
    TestFunction::builtins(0.5 * (lo + hi), 0.5 * (hi - lo) + 1.0).to_vec()
}

fn span(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn gas(global: &GlobalArgs, args: &GasArgs) -> Result<Verdict> {
    let inst = load(global, &args.instance)?;
    check_tolerances(&inst.tol)?;
    let (t1, t2) = args.window;
    let t_end = args.t_end.or(inst.file.t_end).unwrap_or(t2);
    let timeline = simulate(&inst.data, t_end, &inst.tol)?;
    if t2 > timeline.t_end() {
        return Err(Error::WindowOutOfRange { t1, t2, t_end: timeline.t_end() }.into());
    }

    let mut probe = vec![t1, t2];
    probe.extend(timeline.shocks_in(t1, t2));
    let (mut xs, mut vs) = (Vec::new(), Vec::new());
    for &t in &probe {
        xs.extend(timeline.positions_at(t)?);
        vs.extend(timeline.velocities_at(t)?);
        vs.extend(timeline.velocities_at_left(t)?);
    }
    let (pos_fns, vel_fns) = if args.test_functions.is_empty() {
        let (xl, xh) = span(xs);
        let (vl, vh) = span(vs);
        (default_functions(xl, xh), default_functions(vl, vh))
    } else {
        (args.test_functions.clone(), args.test_functions.clone())
    };

    let mut report = ResidualReport::default();
    for f in &pos_fns {
        report.extend(position_space_residuals(&timeline, f, t1, t2)?);
    }
    for f in &vel_fns {
        report.extend(velocity_space_residuals(&timeline, f, t1, t2)?);
    }

    let mut out = Artifacts::create(&global.out_dir)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.space.to_string(),
                r.equation.to_string(),
                r.test_function.clone(),
                num(r.t1),
                num(r.t2),
                num(r.lhs),
                num(r.transport),
                num(r.source),
                num(r.jump),
                num(r.residual),
                num(r.residual_without_jump),
                num(r.quad_error),
                num(r.threshold()),
                r.passes().to_string(),
            ]
        })
        .collect();
    out.table(
        "residuals.csv",
        &[
            "space", "equation", "test_function", "t1", "t2", "lhs", "transport", "source", "jump", "residual",
            "residual_without_jump", "quad_error", "threshold", "pass",
        ],
        rows,
    )?;

    let mut jumps = Vec::new();
    for s in timeline.shocks_in(t1, t2) {
        let (dmu, dwmu) = jump_measures(&timeline, s)?;
        let slack = inst.tol.abs;
        for (v, w) in dmu.coalesced(slack).atoms() {
            jumps.push(vec![num(s), "mu".to_string(), num(*v), num(*w)]);
        }
        for (v, w) in dwmu.coalesced(slack).atoms() {
            jumps.push(vec![num(s), "w_mu".to_string(), num(*v), num(*w)]);
        }
    }
    out.table("jumps.csv", &["t", "measure", "velocity", "weight"], jumps)?;

    let mut congestion = Vec::new();
    for c in velocity_coincidence_times(&timeline) {
        if c.t < t1 || c.t > t2 {
            continue;
        }
        let fields = velocity_space_fields(&timeline, c.t)?;
        let atom = fields
            .current
            .iter()
            .min_by(|a, b| (a.velocity - c.velocity).abs().total_cmp(&(b.velocity - c.velocity).abs()));
        if let Some(atom) = atom {
            congestion.push(vec![
                num(c.t),
                ranges_label(&[c.clusters.0, c.clusters.1]),
                num(atom.velocity),
                num(atom.weight),
                num(atom.w),
                num(atom.a),
            ]);
        }
    }
    out.table("congestion.csv", &["t", "clusters", "velocity", "weight", "w", "a"], congestion)?;

    for r in report.failures() {
        eprintln!(
            "residual {} eq {} [{}]: {:e} > {:e}",
            r.space,
            r.equation,
            r.test_function,
            r.residual.abs(),
            r.threshold()
        );
    }
    let verdict = Verdict::from_pass(report.passes());
    println!(
        "{} residual rows, {} failing, max |residual| {:e}; wrote {}",
        report.rows.len(),
        report.failures().count(),
        report.max_residual(),
        out.dir().display()
    );
    let names = |fs: &[TestFunction]| fs.iter().map(|f| f.name().to_string()).collect::<Vec<_>>();
    out.finish(
        "gas",
        json!({"instance": inst.file, "window": [t1, t2], "t_end": t_end,
               "position_test_functions": names(&pos_fns), "velocity_test_functions": names(&vel_fns),
               "tolerances": tol_json(&inst.tol)}),
        verdict.label(),
    )?;
    Ok(verdict)
}

pub fn fuzz(global: &GlobalArgs, args: &FuzzArgs) -> Result<Verdict> {
    if args.count == 0 {
        bail!("--count must be at least 1");
    }
    if args.n_max == 0 {
        bail!("--n-max must be at least 1");
    }
    if let Some(d) = args.inject_fault {
        if !d.is_finite() {
            bail!("--inject-fault must be finite, got {d}");
        }
    }
    let mut config = FuzzConfig::new(args.seed, args.n_max);
    config.tolerances = tolerances(global, config.tolerances);
    config.inject_fault = args.inject_fault;
    check_tolerances(&config.tolerances)?;

    let outcomes: Vec<InstanceOutcome> = (0..args.count)
        .into_par_iter()
        .map(|i| check_instance(&config, i))
        .collect::<sticky_core::Result<_>>()?;

    let mut out = Artifacts::create(&global.out_dir)?;
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| {
            let suites: Vec<String> = Suite::ALL
                .iter()
                .filter(|s| o.violations.iter().any(|v| v.suite == **s))
                .map(Suite::to_string)
                .collect();
            vec![
                o.index.to_string(),
                o.data.len().to_string(),
                o.shocks.to_string(),
                if o.passed() { "pass" } else { "fail" }.to_string(),
                suites.join("|"),
                o.violations.first().map_or(String::new(), |v| v.detail.clone()),
            ]
        })
        .collect();
    out.table(
        "fuzz_summary.csv",
        &["index", "particles", "shocks", "status", "failed_suites", "first_violation"],
        rows,
    )?;

    let failed: Vec<&InstanceOutcome> = outcomes.iter().filter(|o| !o.passed()).collect();
    for o in &failed {
        let mut repro = InstanceFile::from_data(&o.data);
        repro.seed = Some(args.seed);
        out.text(&format!("failures/instance_{}.json", o.index), &(repro.to_json() + "\n"))?;
    }

    for suite in Suite::ALL {
        let n = outcomes
            .iter()
            .filter(|o| o.violations.iter().any(|v| v.suite == suite))
            .count();
        println!("{suite:<13} {n} failing instance(s)");
    }
    for o in failed.iter().take(5) {
        println!(
            "instance {} failed ({} violation(s)): {}",
            o.index,
            o.violations.len(),
            o.violations[0].detail
        );
        println!("{}", InstanceFile::from_data(&o.data).to_json());
    }
    println!(
        "{}/{} instances passed; wrote {}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        out.dir().display()
    );
    let verdict = Verdict::from_pass(failed.is_empty());
    out.finish(
        "fuzz",
        json!({"count": args.count, "n_max": args.n_max, "seed": args.seed, "inject_fault": args.inject_fault,
               "tolerances": tol_json(&config.tolerances)}),
        verdict.label(),
    )?;
    Ok(verdict)
}

pub fn dermoune(global: &GlobalArgs, args: &DermouneArgs) -> Result<Verdict> {
    const STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
    let inst = load(global, &args.instance)?;
    check_tolerances(&inst.tol)?;
    let t_end = args.t_end.or(inst.file.t_end).unwrap_or(f64::INFINITY);
    let timeline = simulate(&inst.data, t_end, &inst.tol)?;
    let times = if args.times.is_empty() {
        let h = sample_horizon(&timeline);
        (1..=20).map(|k| h * k as f64 / 21.0).collect()
    } else {
        args.times.clone()
    };
    if let Some(bad) = times.iter().find(|t| !(**t >= 0.0 && **t <= timeline.t_end())) {
        return Err(Error::TimeOutOfRange { t: *bad, t_end: timeline.t_end() }.into());
    }

    let violations = sticky_core::fuzz::dermoune_suite(&timeline, &times);

    let mut identity_rows = Vec::new();
    let mut derivative_rows = Vec::new();
    for &t in &times {
        let r = dermoune_identity_residuals(&timeline, t)?;
        identity_rows.push(vec![
            num(t),
            num(r.position),
            num(r.velocity),
            num(r.acceleration),
            num(r.scale),
            r.within(1e-12).to_string(),
        ]);
        let steps: Vec<f64> = STEPS.iter().copied().filter(|&h| t + h <= timeline.t_end()).collect();
        if steps.is_empty() {
            continue;
        }
        let report = right_derivative_check(&timeline, t, &steps)?;
        for c in &report.clusters {
            for s in &c.samples {
                derivative_rows.push(vec![
                    num(t),
                    format!("{}-{}", c.first, c.last),
                    num(s.h),
                    num(s.position_error),
                    num(s.position_predicted),
                    num(s.velocity_error),
                    s.below_gap.to_string(),
                ]);
            }
        }
    }

    let mut out = Artifacts::create(&global.out_dir)?;
    out.table(
        "dermoune.csv",
        &["t", "position_residual", "velocity_residual", "acceleration_residual", "scale", "pass"],
        identity_rows,
    )?;
    out.table(
        "derivatives.csv",
        &["t", "cluster", "h", "position_error", "position_predicted", "velocity_error", "below_gap"],
        derivative_rows,
    )?;
    for v in &violations {
        eprintln!("{}: {}", v.suite, v.detail);
    }
    let verdict = Verdict::from_pass(violations.is_empty());
    println!(
        "{} time(s), {} violation(s); wrote {}",
        times.len(),
        violations.len(),
        out.dir().display()
    );
    out.finish(
        "dermoune",
        json!({"instance": inst.file, "times": times, "t_end": t_end.is_finite().then_some(t_end),
               "tolerances": tol_json(&inst.tol)}),
        verdict.label(),
    )?;
    Ok(verdict)
}
