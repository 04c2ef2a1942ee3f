//! Seeded random instances and the invariant suites run against them.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::InitialData;
use crate::dynamics::{simulate, Segment, ShockTimeline};
use crate::error::Result;
use crate::flow::{dermoune_identity_residuals, right_derivative_check};
use crate::gas::{congestion_delay, velocity_space_fields};
use crate::gvp::gvp_equivalence_check;
use crate::tolerance::Tolerances;

/// Generator for instance `index` of run `seed`: ChaCha8 seeded with `seed`,
/// one stream per instance so instances are independent of scheduling.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Random GVP-admissible instance with `n` particles: positions sorted
/// uniform on `[0, n]`, masses log-uniform on `[0.1, 10]`, velocities
/// standard normal, accelerations standard normal sorted descending.
pub fn random_admissible(rng: &mut impl Rng, n: usize) -> InitialData {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * n as f64).collect();
        x.sort_by(f64::total_cmp);
        let m = (0..n).map(|_| 10f64.powf(rng.random_range(-1.0..=1.0))).collect();
        let v = (0..n).map(|_| normal.sample(rng)).collect();
        let mut th: Vec<f64> = (0..n).map(|_| normal.sample(rng)).collect();
        th.sort_by(|a, b| b.total_cmp(a));
        if let Ok(d) = InitialData::new(x, m, v, th) {
            return d;
        }
    }
}

/// Instance `index` of run `seed`, with `N` uniform on `1..=n_max`.
pub fn random_instance(seed: u64, index: u64, n_max: usize) -> InitialData {
    let mut rng = instance_rng(seed, index);
    let n = rng.random_range(1..=n_max.max(1));
    random_admissible(&mut rng, n)
}

/// Sampling horizon: a quarter past the last shock, at least 1.
pub fn sample_horizon(timeline: &ShockTimeline) -> f64 {
    let last = timeline.event_times().last().copied().unwrap_or(0.0);
    (1.25 * last).max(1.0).min(timeline.t_end())
}

/// `count` ascending times uniform on `(0, horizon)` at least `min_gap` away from every shock.
pub fn times_avoiding_shocks(
    rng: &mut impl Rng,
    timeline: &ShockTimeline,
    count: usize,
    horizon: f64,
    min_gap: f64,
) -> Vec<f64> {
    let shocks = timeline.event_times();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let t = rng.random::<f64>() * horizon;
        if t > 0.0 && shocks.iter().all(|s| (s - t).abs() >= min_gap) {
            out.push(t);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Conservation,
    NonCrossing,
    Gvp,
    Dermoune,
    Congestion,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Conservation,
        Suite::NonCrossing,
        Suite::Gvp,
        Suite::Dermoune,
        Suite::Congestion,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Conservation => "conservation",
            Suite::NonCrossing => "non-crossing",
            Suite::Gvp => "gvp",
            Suite::Dermoune => "dermoune",
            Suite::Congestion => "congestion",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub suite: Suite,
    pub detail: String,
}

fn violation(suite: Suite, detail: String) -> Violation {
    Violation { suite, detail }
}

/// Per-cluster masses are the exact left-to-right member sums, total force
/// is constant to `1e-12` relative and momentum is affine with slope `Σmθ`
/// to `1e-12` relative, on every segment and at every grid time.
pub fn conservation_check(timeline: &ShockTimeline, horizon: f64, grid: usize) -> Vec<Violation> {
    let data = timeline.initial();
    let (m, th) = (data.masses(), data.accelerations());
    let force = data.total_force();
    let force_scale: f64 = m.iter().zip(th).map(|(m, t)| m * t.abs()).sum();
    let mut out = Vec::new();

    for (k, seg) in timeline.segments().iter().enumerate() {
        for c in seg.partition.clusters() {
            let mut exact = 0.0;
            for &mj in &m[c.first..=c.last] {
                exact += mj;
            }
            if c.mass != exact {
                out.push(violation(
                    Suite::Conservation,
                    format!("segment {k}: cluster {}-{} mass {} != {}", c.first, c.last, c.mass, exact),
                ));
            }
        }
        let f: f64 = seg
            .partition
            .clusters()
            .iter()
            .zip(&seg.paths)
            .map(|(c, p)| c.mass * p.acceleration())
            .sum();
        if (f - force).abs() > 1e-12 * force_scale.max(f64::MIN_POSITIVE) {
            out.push(violation(
                Suite::Conservation,
                format!("segment {k}: total force {f} != {force}"),
            ));
        }
        let mid = if seg.end.is_finite() { 0.5 * (seg.start + seg.end) } else { seg.start + 1.0 };
        if let Some(v) = momentum_violation(data, seg, mid) {
            out.push(v);
        }
    }

    for i in 0..=grid {
        let t = horizon * i as f64 / grid as f64;
        let Ok(seg) = timeline.segment_at(t) else { continue };
        if let Some(v) = momentum_violation(data, seg, t) {
            out.push(v);
            break;
        }
    }
    out
}

fn momentum_violation(data: &InitialData, seg: &Segment, t: f64) -> Option<Violation> {
    let (m, v, th) = (data.masses(), data.velocities(), data.accelerations());
    let p: f64 = seg
        .partition
        .clusters()
        .iter()
        .zip(&seg.paths)
        .map(|(c, q)| c.mass * q.velocity(t))
        .sum();
    let expected = data.total_momentum() + t * data.total_force();
    let scale: f64 = (0..data.len()).map(|j| m[j] * (v[j].abs() + t * th[j].abs())).sum();
    ((p - expected).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE)).then(|| {
        violation(Suite::Conservation, format!("t={t:e}: momentum {p} != {expected}"))
    })
}

/// Cluster positions are ordered on a uniform grid of `grid + 1` times and
/// just before and after every shock.
pub fn non_crossing_check(timeline: &ShockTimeline, horizon: f64, grid: usize) -> Vec<Violation> {
    let tol = timeline.tolerances();
    let mut probes: Vec<(f64, bool)> = (0..=grid).map(|i| (horizon * i as f64 / grid as f64, false)).collect();
    for s in timeline.event_times() {
        let eps = tol.event_window(s);
        probes.push((s - eps, true));
        probes.push((s + eps, false));
    }
    let mut out = Vec::new();
    for (t, left) in probes {
        if t < 0.0 || t > timeline.t_end() {
            continue;
        }
        let seg = if left { timeline.segment_left_of(t) } else { timeline.segment_at(t) };
        let Ok(seg) = seg else { continue };
        let xs: Vec<f64> = seg.paths.iter().map(|p| p.eval(t)).collect();
        if let Some(k) = xs.windows(2).position(|w| !tol.at_least(w[1], w[0])) {
            out.push(violation(
                Suite::NonCrossing,
                format!("t={t:e}: cluster {k} at {} passes cluster {} at {}", xs[k], k + 1, xs[k + 1]),
            ));
            break;
        }
    }
    out
}

/// Variational partitions equal simulated ones at `times`.
pub fn gvp_suite(data: &InitialData, times: &[f64], tol: &Tolerances) -> Vec<Violation> {
    match gvp_equivalence_check(data, times, tol) {
        Ok(report) => report
            .mismatches()
            .map(|c| violation(Suite::Gvp, format!("t={:e}: simulated {:?}, variational {:?}", c.t, c.simulated, c.variational)))
            .collect(),
        Err(e) => vec![violation(Suite::Gvp, e.to_string())],
    }
}

/// Conditional-expectation identities at `times` to `1e-12·(1 + scale)`, and
/// right finite differences matching `½h|θ̄|` (positions) and zero
/// (velocities) for steps below the next shock.
pub fn dermoune_suite(timeline: &ShockTimeline, times: &[f64]) -> Vec<Violation> {
    const STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
    let mut out = Vec::new();
    for &t in times {
        let r = match dermoune_identity_residuals(timeline, t) {
            Ok(r) => r,
            Err(e) => {
                out.push(violation(Suite::Dermoune, e.to_string()));
                continue;
            }
        };
        if !r.within(1e-12) {
            out.push(violation(Suite::Dermoune, format!("t={t:e}: residuals {r:?}")));
        }
        let steps: Vec<f64> = STEPS.iter().copied().filter(|&h| t + h <= timeline.t_end()).collect();
        let Ok(report) = right_derivative_check(timeline, t, &steps) else { continue };
        // rounding in a difference quotient of magnitude-`scale` values
        let noise = |h: f64| 64.0 * f64::EPSILON * (1.0 + r.scale + t) / h;
        for c in &report.clusters {
            for s in c.samples.iter().filter(|s| s.below_gap) {
                let pos_ok = (s.position_error - s.position_predicted).abs() <= noise(s.h) + 1e-9 * s.position_predicted;
                let vel_ok = s.velocity_error <= noise(s.h);
                if !pos_ok || !vel_ok {
                    out.push(violation(
                        Suite::Dermoune,
                        format!("t={t:e}, cluster {}-{}, h={:e}: {s:?}", c.first, c.last, s.h),
                    ));
                }
            }
        }
    }
    out
}

/// `a(·, t) ≡ 0` at `samples` times spread over `(0, δ)`.
pub fn congestion_suite(timeline: &ShockTimeline, samples: usize) -> Vec<Violation> {
    let delta = congestion_delay(timeline).min(timeline.t_end()).min(1e3);
    let mut out = Vec::new();
    for k in 1..=samples {
        let t = delta * k as f64 / (samples + 1) as f64;
        match velocity_space_fields(timeline, t) {
            Ok(f) => {
                if let Some(a) = f.current.iter().find(|a| a.a != 0.0) {
                    out.push(violation(
                        Suite::Congestion,
                        format!("t={t:e} < δ={delta:e}: a({}) = {}", a.velocity, a.a),
                    ));
                }
            }
            Err(e) => out.push(violation(Suite::Congestion, e.to_string())),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub n_max: usize,
    pub tolerances: Tolerances,
    /// Shift applied to the first merged velocity, to check the harness.
    pub inject_fault: Option<f64>,
    pub grid: usize,
    pub gvp_times: usize,
    pub dermoune_times: usize,
}

impl FuzzConfig {
    pub fn new(seed: u64, n_max: usize) -> Self {
        Self {
            seed,
            n_max,
            tolerances: Tolerances::default(),
            inject_fault: None,
            grid: 1000,
            gvp_times: 5,
            dermoune_times: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub index: u64,
    pub data: InitialData,
    pub shocks: usize,
    pub violations: Vec<Violation>,
}

impl InstanceOutcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Generates instance `index` and runs every suite on it.
pub fn check_instance(config: &FuzzConfig, index: u64) -> Result<InstanceOutcome> {
    let data = random_instance(config.seed, index, config.n_max);
    let tol = &config.tolerances;
    let mut timeline = simulate(&data, f64::INFINITY, tol)?;
    if let Some(delta) = config.inject_fault {
        timeline = timeline.with_perturbed_merge_velocity(delta);
    }
    let horizon = sample_horizon(&timeline);
    // separate stream from the generator so sampling never shifts instances
    let mut rng = instance_rng(config.seed ^ 0x0005_eed0_f5a3_b1e5, index);

    let mut violations = conservation_check(&timeline, horizon, config.grid);
    violations.extend(non_crossing_check(&timeline, horizon, config.grid));
    let gvp_times = times_avoiding_shocks(&mut rng, &timeline, config.gvp_times, horizon, 1e-6);
    violations.extend(gvp_suite(&data, &gvp_times, tol));
    let d_times = times_avoiding_shocks(&mut rng, &timeline, config.dermoune_times, horizon, 1e-6);
    violations.extend(dermoune_suite(&timeline, &d_times));
    violations.extend(congestion_suite(&timeline, 20));

    Ok(InstanceOutcome {
        index,
        shocks: timeline.events().len(),
        data,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_admissible() {
        for i in 0..50 {
            let a = random_instance(7, i, 12);
            assert_eq!(a, random_instance(7, i, 12));
            assert!(a.gvp_admissible());
            assert!(!a.is_empty() && a.len() <= 12);
            assert!(a.masses().iter().all(|&m| (0.1..=10.0).contains(&m)));
            assert!(a.positions().iter().all(|&x| (0.0..=a.len() as f64).contains(&x)));
        }
        assert_ne!(random_instance(7, 0, 12), random_instance(8, 0, 12));
    }

    #[test]
    fn clean_instances_pass_every_suite() {
        let config = FuzzConfig::new(11, 8);
        for i in 0..20 {
            let out = check_instance(&config, i).unwrap();
            assert!(out.passed(), "instance {i}: {:?}", out.violations);
        }
    }

    #[test]
    fn injected_fault_is_reported_by_conservation() {
        let mut config = FuzzConfig::new(3, 8);
        config.inject_fault = Some(1e-3);
        let mut caught = 0;
        for i in 0..20 {
            let out = check_instance(&config, i).unwrap();
            if out.shocks > 0 {
                assert!(out.violations.iter().any(|v| v.suite == Suite::Conservation), "instance {i}");
                caught += 1;
            }
        }
        assert!(caught > 0);
    }

    #[test]
    fn avoided_times_keep_their_distance() {
        let d = InitialData::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let tl = simulate(&d, 3.0, &Tolerances::default()).unwrap();
        let mut rng = instance_rng(1, 1);
        let ts = times_avoiding_shocks(&mut rng, &tl, 100, 3.0, 0.1);
        assert!(ts.iter().all(|t| (t - 1.0).abs() >= 0.1 && *t > 0.0 && *t < 3.0));
        assert!(ts.windows(2).all(|w| w[0] <= w[1]));
    }
}
