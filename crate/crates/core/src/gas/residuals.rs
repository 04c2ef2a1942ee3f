//! Weak-form residuals of the position-space and velocity-space gas systems.

use std::fmt;

use super::fields::{group_by_velocity, velocity_space_fields};
use super::quadrature::{integrate, Integral};
use super::test_function::TestFunction;
use crate::data::cluster_aggregates;
use crate::dynamics::{Segment, ShockTimeline};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::quadratic::{quadratic_meet_times_with, QuadraticPath};

/// Default tolerance of the time quadrature over a whole window.
pub const QUAD_TOL: f64 = 1e-10;

/// Absolute floor of the pass criterion.
pub const RESIDUAL_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Position,
    Velocity,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Space::Position => "position",
            Space::Velocity => "velocity",
        })
    }
}

/// One weak-form equation tested against one function on one window.
///
/// `residual = lhs − transport − source − jump`, where `lhs` is the
/// difference of the boundary terms at `t2` and `t1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualRow {
    pub space: Space,
    /// 1 for the density equation, 2 for the momentum equation.
    pub equation: u8,
    pub test_function: String,
    pub t1: f64,
    pub t2: f64,
    pub lhs: f64,
    pub transport: f64,
    pub source: f64,
    pub jump: f64,
    pub residual: f64,
    pub residual_without_jump: f64,
    pub quad_tol: f64,
    pub quad_error: f64,
}

impl ResidualRow {
    #[allow(clippy::too_many_arguments)]
    fn new(
        space: Space,
        equation: u8,
        f: &TestFunction,
        (t1, t2): (f64, f64),
        lhs: f64,
        transport: Integral,
        source: Integral,
        jump: f64,
        quad_tol: f64,
    ) -> Self {
        let residual_without_jump = lhs - transport.value - source.value;
        Self {
            space,
            equation,
            test_function: f.name().to_string(),
            t1,
            t2,
            lhs,
            transport: transport.value,
            source: source.value,
            jump,
            residual: residual_without_jump - jump,
            residual_without_jump,
            quad_tol,
            quad_error: transport.error + source.error,
        }
    }

    pub fn threshold(&self) -> f64 {
        (10.0 * self.quad_tol).max(RESIDUAL_FLOOR)
    }

    pub fn passes(&self) -> bool {
        self.residual.abs() <= self.threshold()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualReport {
    pub rows: Vec<ResidualRow>,
}

impl ResidualReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(ResidualRow::passes)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualRow> {
        self.rows.iter().filter(|r| !r.passes())
    }

    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    pub fn extend(&mut self, other: ResidualReport) {
        self.rows.extend(other.rows);
    }
}

fn check_window(timeline: &ShockTimeline, t1: f64, t2: f64) -> Result<()> {
    if !(0.0 < t1 && t1 < t2 && t2 <= timeline.t_end()) || !t2.is_finite() {
        return Err(Error::WindowOutOfRange {
            t1,
            t2,
            t_end: timeline.t_end(),
        });
    }
    Ok(())
}

/// `[t1, t2]` cut at the shock times inside it.
fn pieces(timeline: &ShockTimeline, t1: f64, t2: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![t1];
    cuts.extend(timeline.shocks_in(t1, t2).into_iter().filter(|&s| s < t2));
    cuts.push(t2);
    cuts.windows(2).map(|w| (w[0], w[1])).filter(|(a, b)| b > a).collect()
}

/// Times in `(a, b)` where a cluster's position (or velocity) reaches one of
/// `breaks`; the composed integrands have kinks there.
fn crossings(seg: &Segment, a: f64, b: f64, breaks: &[f64], space: Space) -> Vec<f64> {
    let mut out = Vec::new();
    for p in &seg.paths {
        for &x in breaks {
            match space {
                Space::Position => {
                    let level = QuadraticPath::new(x, 0.0, 0.0);
                    if let Ok(roots) = quadratic_meet_times_with(p, &level, a, 0.0, 0.0) {
                        out.extend(roots.iter().map(|m| m.time).filter(|&t| t < b));
                    }
                }
                Space::Velocity => {
                    if p.c2 != 0.0 {
                        let t = (x - p.c1) / p.c2;
                        if a < t && t < b {
                            out.push(t);
                        }
                    }
                }
            }
        }
    }
    out
}

/// `∫_{t1}^{t2} g(segment, t) dt`, one adaptive quadrature per piece between
/// shocks and between times where the integrand loses smoothness.
fn integrate_over_segments(
    timeline: &ShockTimeline,
    (t1, t2): (f64, f64),
    tol: f64,
    (breaks, space): (&[f64], Space),
    g: impl Fn(&Segment, f64) -> f64,
) -> Result<Integral> {
    let mut parts = Vec::new();
    for (a, b) in pieces(timeline, t1, t2) {
        let seg = timeline.segment_at(0.5 * (a + b))?;
        let mut cuts = vec![a];
        cuts.extend(crossings(seg, a, b, breaks, space));
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        parts.extend(cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| (seg, w[0], w[1])));
    }
    let share = tol / parts.len().max(1) as f64;
    let mut total = Integral::default();
    for (seg, a, b) in parts {
        total = total + integrate(|t| g(seg, t), a, b, share);
    }
    Ok(total)
}

/// Sum over clusters of `mass/M · h(x, v, θ)` at time `t`.
fn cluster_sum(seg: &Segment, total: f64, t: f64, h: impl Fn(f64, f64, f64) -> f64) -> f64 {
    seg.partition
        .clusters()
        .iter()
        .zip(&seg.paths)
        .map(|(c, p)| c.mass / total * h(p.eval(t), p.velocity(t), p.acceleration()))
        .sum()
}

/// Residuals of the forced pressureless system in position space,
/// `ρ = Law(X_t)`, `u`, `γ` the Eulerian velocity and acceleration:
///
/// 1. `∫f dρ_{t2} − ∫f dρ_{t1} = ∫∫ f′u dρ dt`
/// 2. `∫fu dρ_{t2} − ∫fu dρ_{t1} = ∫∫ f′u² dρ dt + ∫∫ fγ dρ dt`
pub fn position_space_residuals(timeline: &ShockTimeline, f: &TestFunction, t1: f64, t2: f64) -> Result<ResidualReport> {
    position_space_residuals_with(timeline, f, t1, t2, QUAD_TOL)
}

pub fn position_space_residuals_with(
    timeline: &ShockTimeline,
    f: &TestFunction,
    t1: f64,
    t2: f64,
    quad_tol: f64,
) -> Result<ResidualReport> {
    check_window(timeline, t1, t2)?;
    let total = timeline.initial().total_mass();
    let boundary = |t: f64, h: &dyn Fn(f64, f64, f64) -> f64| -> Result<f64> {
        Ok(cluster_sum(timeline.segment_at(t)?, total, t, h))
    };

    let density = |x: f64, _v: f64, _a: f64| f.value(x);
    let momentum = |x: f64, v: f64, _a: f64| f.value(x) * v;
    let lhs1 = boundary(t2, &density)? - boundary(t1, &density)?;
    let lhs2 = boundary(t2, &momentum)? - boundary(t1, &momentum)?;

    let breaks = f.breakpoints();
    let kinks = (breaks.as_slice(), Space::Position);
    let tr1 = integrate_over_segments(timeline, (t1, t2), quad_tol, kinks, |seg, t| {
        cluster_sum(seg, total, t, |x, v, _| f.derivative(x) * v)
    })?;
    let tr2 = integrate_over_segments(timeline, (t1, t2), quad_tol, kinks, |seg, t| {
        cluster_sum(seg, total, t, |x, v, _| f.derivative(x) * v * v)
    })?;
    let src2 = integrate_over_segments(timeline, (t1, t2), quad_tol, kinks, |seg, t| {
        cluster_sum(seg, total, t, |x, _, a| f.value(x) * a)
    })?;

    let w = (t1, t2);
    Ok(ResidualReport {
        rows: vec![
            ResidualRow::new(Space::Position, 1, f, w, lhs1, tr1, Integral::default(), 0.0, quad_tol),
            ResidualRow::new(Space::Position, 2, f, w, lhs2, tr2, src2, 0.0, quad_tol),
        ],
    })
}

/// `Δμ = μ(·, s) − μ(·, s⁻)` and `Δ(wμ) = wμ(·, s) − w⁻μ(·, s⁻)` at time `s`.
pub fn jump_measures(timeline: &ShockTimeline, s: f64) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let fields = velocity_space_fields(timeline, s)?;
    Ok((
        fields.mu().minus(&fields.mu_left()),
        fields.w_mu().minus(&fields.w_mu_left()),
    ))
}

/// `(∫f dΔμ, ∫f dΔ(wμ))` summed over shocks in `(t1, t2]`, computed from the
/// recorded merges and the initial data only.
pub fn merge_jump_integrals(timeline: &ShockTimeline, f: &TestFunction, t1: f64, t2: f64) -> Result<(f64, f64)> {
    let data = timeline.initial();
    let total = data.total_mass();
    let (mut jump_mu, mut jump_wmu) = (0.0, 0.0);
    for event in timeline.events().iter().filter(|e| t1 < e.time && e.time <= t2) {
        let s = event.time;
        for merge in &event.merges {
            let after = cluster_aggregates(data, merge.merged.0, merge.merged.1, s)?;
            jump_mu += after.mass / total * f.value(after.velocity);
            jump_wmu += after.mass / total * after.acceleration * f.value(after.velocity);
            for &(g, d) in &merge.parts {
                let before = cluster_aggregates(data, g, d, s)?;
                jump_mu -= before.mass / total * f.value(before.velocity);
                jump_wmu -= before.mass / total * before.acceleration * f.value(before.velocity);
            }
        }
    }
    Ok((jump_mu, jump_wmu))
}

/// Residuals of the velocity-space system with `μ = Law(V_t)`, `ν ≡ 0`:
///
/// 1. `∫f dμ_{t2} − ∫f dμ_{t1} = ∫∫ f′w dμ dt + Σ_s ∫f dΔμ(s)`
/// 2. `∫fw dμ_{t2} − ∫fw dμ_{t1} = ∫∫ f′(w² + a) dμ dt + Σ_s ∫f dΔ(wμ)(s)`
///
/// with `s` ranging over the shocks in `(t1, t2]`.
pub fn velocity_space_residuals(timeline: &ShockTimeline, f: &TestFunction, t1: f64, t2: f64) -> Result<ResidualReport> {
    velocity_space_residuals_with(timeline, f, t1, t2, QUAD_TOL)
}

pub fn velocity_space_residuals_with(
    timeline: &ShockTimeline,
    f: &TestFunction,
    t1: f64,
    t2: f64,
    quad_tol: f64,
) -> Result<ResidualReport> {
    check_window(timeline, t1, t2)?;
    let data = timeline.initial();
    let tol = timeline.tolerances();

    let (a, b) = (velocity_space_fields(timeline, t1)?, velocity_space_fields(timeline, t2)?);
    let lhs1 = b.mu().integrate(|v| f.value(v)) - a.mu().integrate(|v| f.value(v));
    let lhs2 = b.w_mu().integrate(|v| f.value(v)) - a.w_mu().integrate(|v| f.value(v));

    let breaks = f.breakpoints();
    let kinks = (breaks.as_slice(), Space::Velocity);
    let tr1 = integrate_over_segments(timeline, (t1, t2), quad_tol, kinks, |seg, t| {
        group_by_velocity(data, seg, t, tol)
            .iter()
            .map(|at| at.weight * f.derivative(at.velocity) * at.w)
            .sum()
    })?;
    let tr2 = integrate_over_segments(timeline, (t1, t2), quad_tol, kinks, |seg, t| {
        group_by_velocity(data, seg, t, tol)
            .iter()
            .map(|at| at.weight * f.derivative(at.velocity) * (at.w * at.w + at.a))
            .sum()
    })?;

    let (mut jump1, mut jump2) = (0.0, 0.0);
    for s in timeline.shocks_in(t1, t2) {
        let (dmu, dwmu) = jump_measures(timeline, s)?;
        jump1 += dmu.integrate(|v| f.value(v));
        jump2 += dwmu.integrate(|v| f.value(v));
    }

    let w = (t1, t2);
    let zero = Integral::default();
    Ok(ResidualReport {
        rows: vec![
            ResidualRow::new(Space::Velocity, 1, f, w, lhs1, tr1, zero, jump1, quad_tol),
            ResidualRow::new(Space::Velocity, 2, f, w, lhs2, tr2, zero, jump2, quad_tol),
        ],
    })
}

/// `Δμ([lo, hi] × (t1, t2])`: net normalized mass whose velocity enters the
/// closed interval `[lo, hi]` at shocks in the window.
pub fn threshold_crossing_measure(timeline: &ShockTimeline, (lo, hi): (f64, f64), t1: f64, t2: f64) -> Result<f64> {
    if !(t1 < t2) {
        return Err(Error::WindowOutOfRange {
            t1,
            t2,
            t_end: timeline.t_end(),
        });
    }
    let mut total = 0.0;
    for s in timeline.shocks_in(t1, t2) {
        let (dmu, _) = jump_measures(timeline, s)?;
        total += dmu.mass_in(lo, hi);
    }
    Ok(total)
}
