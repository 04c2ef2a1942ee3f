//! Initial-time limits of the velocity-space fields and the conditions under
//! which the jump and congestion terms can be dropped.

use super::fields::{group_by_velocity, velocity_coincidence_times, velocity_space_fields, VelocityAtom};
use super::residuals::velocity_space_residuals;
use super::test_function::TestFunction;
use crate::dynamics::ShockTimeline;
use crate::error::Result;

/// Times at which the initial limits are probed, largest first.
pub const LIMIT_TIMES: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, PartialEq)]
pub struct LimitRow {
    pub test_function: String,
    pub t: f64,
    /// `|∫g dμ_t − ∫g dμ₀|`.
    pub mu_gap: f64,
    /// `|∫gw dμ_t − ∫gw₀ dμ₀|`.
    pub w_gap: f64,
    /// `|∫ga dμ_t|`.
    pub a_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialLimitsReport {
    pub rows: Vec<LimitRow>,
    /// `(t, sup_g mu_gap, sup_g w_gap, sup_g a_gap)` per probed time: the
    /// distance to the initial data seen through the whole test family.
    pub family_gaps: Vec<(f64, f64, f64, f64)>,
    /// The family gaps are non-increasing along `LIMIT_TIMES`.
    pub monotone: bool,
    /// `a₀ = Var[Γ₀ | V₀]` is not identically zero.
    pub a0_nonzero: bool,
    /// `∫ga dμ_t` vanished at every probed time.
    pub a_mu_vanishes: bool,
    /// `lim (aμ) = 0 ≠ a₀μ₀` observed.
    pub non_commutation: bool,
}

impl InitialLimitsReport {
    pub fn max_gap_at_smallest_time(&self) -> f64 {
        self.family_gaps
            .last()
            .map_or(0.0, |&(_, m, w, a)| m.max(w).max(a))
    }

    pub fn converges(&self) -> bool {
        self.monotone && self.a_mu_vanishes
    }
}

fn integral(atoms: &[VelocityAtom], g: impl Fn(&VelocityAtom) -> f64) -> f64 {
    atoms.iter().map(|a| a.weight * g(a)).sum()
}

/// Probes `∫g dμ_t → ∫g dμ₀`, `∫gw dμ_t → ∫gw₀ dμ₀` and `∫ga dμ_t → 0` at
/// `t ∈ LIMIT_TIMES`. Monotonicity is judged on the supremum over `g_list`
/// of each gap, up to rounding (`1e-15`); a single `g` can see its leading
/// term cancel and is not expected to decrease on its own.
pub fn initial_limits_check(timeline: &ShockTimeline, g_list: &[TestFunction]) -> Result<InitialLimitsReport> {
    let data = timeline.initial();
    let tol = timeline.tolerances();
    let initial = group_by_velocity(data, timeline.segment_at(0.0)?, 0.0, tol);
    let a0_nonzero = initial.iter().any(|a| a.a > 0.0);

    let mut rows = Vec::new();
    let mut family_gaps = Vec::new();
    for &t in &LIMIT_TIMES {
        let fields = velocity_space_fields(timeline, t)?;
        let mut sup = (t, 0.0f64, 0.0f64, 0.0f64);
        for g in g_list {
            let mu0 = integral(&initial, |a| g.value(a.velocity));
            let w0 = integral(&initial, |a| g.value(a.velocity) * a.w);
            let row = LimitRow {
                test_function: g.name().to_string(),
                t,
                mu_gap: (integral(&fields.current, |a| g.value(a.velocity)) - mu0).abs(),
                w_gap: (integral(&fields.current, |a| g.value(a.velocity) * a.w) - w0).abs(),
                a_gap: integral(&fields.current, |a| g.value(a.velocity) * a.a).abs(),
            };
            sup.1 = sup.1.max(row.mu_gap);
            sup.2 = sup.2.max(row.w_gap);
            sup.3 = sup.3.max(row.a_gap);
            rows.push(row);
        }
        family_gaps.push(sup);
    }
    let slack = 1e-15;
    let monotone = family_gaps
        .windows(2)
        .all(|w| w[1].1 <= w[0].1 + slack && w[1].2 <= w[0].2 + slack && w[1].3 <= w[0].3 + slack);
    let a_mu_vanishes = rows.iter().all(|r| r.a_gap == 0.0);
    Ok(InitialLimitsReport {
        rows,
        family_gaps,
        monotone,
        a0_nonzero,
        a_mu_vanishes,
        non_commutation: a0_nonzero && a_mu_vanishes,
    })
}

/// A sampled time where `a(·, t)` is non-zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CongestionPoint {
    pub t: f64,
    pub velocity: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorollaryReport {
    /// End of the inspected window: the first shock, else `t_end`, else 10.
    pub horizon: f64,
    pub first_shock: Option<f64>,
    /// No shock inside the inspected window, so `μ` is weakly continuous there.
    pub mu_continuous: bool,
    /// `a = 0` at every grid sample (a set of full `μ dt` measure).
    pub a_zero_sampled: bool,
    /// Velocity-coincidence times with a non-zero conditional variance.
    pub congestion_points: Vec<CongestionPoint>,
    /// Equal initial velocities imply equal initial accelerations.
    pub acceleration_function_of_velocity: bool,
    /// Jump-free velocity residuals on `(0, T)`, when the previous flag holds.
    pub no_jump_residuals_pass: Option<bool>,
    pub max_no_jump_residual: f64,
}

impl CorollaryReport {
    /// `a = 0` holds pointwise as well, not only almost everywhere.
    pub fn a_identically_zero(&self) -> bool {
        self.a_zero_sampled && self.congestion_points.is_empty()
    }
}

const GRID: usize = 200;

/// Inspects the hypotheses that let the velocity system drop its jump and
/// congestion terms before the first shock, and verifies the reduced system
/// there when they hold.
pub fn corollary_conditions_check(timeline: &ShockTimeline) -> Result<CorollaryReport> {
    let data = timeline.initial();
    let tol = timeline.tolerances();
    let first_shock = timeline.first_shock_time();
    let cap = if timeline.t_end().is_finite() { timeline.t_end() } else { 10.0 };
    let horizon = first_shock.unwrap_or(cap).min(cap);

    let mut a_zero_sampled = true;
    for k in 1..GRID {
        let t = horizon * k as f64 / GRID as f64;
        let fields = velocity_space_fields(timeline, t)?;
        a_zero_sampled &= fields.current.iter().all(|a| a.a == 0.0);
    }

    let mut congestion_points = Vec::new();
    for c in velocity_coincidence_times(timeline) {
        if c.t > timeline.t_end() {
            continue;
        }
        let fields = velocity_space_fields(timeline, c.t)?;
        for atom in fields.current.iter().filter(|a| a.a > 0.0 && tol.close(a.velocity, c.velocity)) {
            congestion_points.push(CongestionPoint {
                t: c.t,
                velocity: atom.velocity,
                a: atom.a,
            });
        }
    }
    congestion_points.dedup();

    let initial = group_by_velocity(data, timeline.segment_at(0.0)?, 0.0, tol);
    let acceleration_function_of_velocity = initial.iter().all(|a| a.a == 0.0);

    let mut no_jump_residuals_pass = None;
    let mut max_no_jump_residual = 0.0;
    if acceleration_function_of_velocity && horizon > 0.0 {
        let (t1, t2) = (0.01 * horizon, 0.99 * horizon);
        let v1 = velocity_space_fields(timeline, t1)?.current;
        let v2 = velocity_space_fields(timeline, t2)?.current;
        let lo = v1.iter().chain(&v2).map(|a| a.velocity).fold(f64::INFINITY, f64::min);
        let hi = v1.iter().chain(&v2).map(|a| a.velocity).fold(f64::NEG_INFINITY, f64::max);
        let half = 0.5 * (hi - lo) + 1.0;
        let mut pass = true;
        for f in TestFunction::builtins(0.5 * (lo + hi), half) {
            for row in velocity_space_residuals(timeline, &f, t1, t2)?.rows {
                let r = row.residual_without_jump.abs();
                max_no_jump_residual = f64::max(max_no_jump_residual, r);
                pass &= r <= row.threshold();
            }
        }
        no_jump_residuals_pass = Some(pass);
    }

    Ok(CorollaryReport {
        horizon,
        first_shock,
        mu_continuous: !timeline.shocks_in(0.0, horizon).iter().any(|&s| s < horizon),
        a_zero_sampled,
        congestion_points,
        acceleration_function_of_velocity,
        no_jump_residuals_pass,
        max_no_jump_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::InitialData;
    use crate::dynamics::simulate;
    use crate::tolerance::Tolerances;

    fn timeline(x: &[f64], m: &[f64], v: &[f64], th: &[f64]) -> ShockTimeline {
        let d = InitialData::new(x.to_vec(), m.to_vec(), v.to_vec(), th.to_vec()).unwrap();
        simulate(&d, f64::INFINITY, &Tolerances::default()).unwrap()
    }

    fn g_list() -> Vec<TestFunction> {
        let mut g = TestFunction::builtins(0.0, 3.0).to_vec();
        g.push(TestFunction::custom("one", |_| 1.0, |_| 0.0, (f64::NEG_INFINITY, f64::INFINITY)));
        g
    }

    #[test]
    fn distinct_velocities_converge() {
        let tl = timeline(&[0.0, 1.0, 2.5], &[1.0, 2.0, 0.5], &[0.3, -0.2, 0.9], &[1.0, 0.0, -0.5]);
        let r = initial_limits_check(&tl, &g_list()).unwrap();
        assert!(r.converges(), "{r:?}");
        assert!(!r.a0_nonzero && !r.non_commutation);
        assert!(r.max_gap_at_smallest_time() < 1e-3);
        for row in r.rows.iter().filter(|r| r.test_function == "one") {
            assert!(row.mu_gap < 1e-15);
        }
    }

    #[test]
    fn tied_velocities_do_not_commute() {
        let tl = timeline(&[0.0, 1.0], &[1.0, 1.0], &[0.5, 0.5], &[1.0, -1.0]);
        let r = initial_limits_check(&tl, &g_list()).unwrap();
        assert!(r.a0_nonzero);
        assert!(r.a_mu_vanishes);
        assert!(r.non_commutation);
        assert!(r.monotone, "{r:?}");
    }

    #[test]
    fn equal_accelerations_satisfy_the_reduced_system() {
        let tl = timeline(&[0.0, 1.0, 3.0], &[1.0, 1.0, 2.0], &[1.0, 0.0, -1.0], &[0.7; 3]);
        let r = corollary_conditions_check(&tl).unwrap();
        assert!(r.a_identically_zero());
        assert!(r.mu_continuous);
        assert_eq!(r.no_jump_residuals_pass, Some(true), "{r:?}");
    }

    #[test]
    fn designed_congestion_is_flagged() {
        let tl = timeline(&[0.0, 10.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]);
        let r = corollary_conditions_check(&tl).unwrap();
        assert!(r.a_zero_sampled);
        assert_eq!(r.congestion_points.len(), 1);
        assert_eq!(r.congestion_points[0].t, 1.0);
        assert!((r.congestion_points[0].a - 0.25).abs() < 1e-12);
        assert!(!r.a_identically_zero());
        assert_eq!(r.no_jump_residuals_pass, Some(true));
    }

    #[test]
    fn single_particle_is_trivial() {
        let tl = timeline(&[0.0], &[1.0], &[1.0], &[-2.0]);
        let r = corollary_conditions_check(&tl).unwrap();
        assert!(r.first_shock.is_none());
        assert_eq!(r.horizon, 10.0);
        assert!(r.a_identically_zero());
        assert_eq!(r.no_jump_residuals_pass, Some(true));
    }
}
