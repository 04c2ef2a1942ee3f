//! Flow map and Eulerian fields of a completed timeline.
//!
//! With `X₀ ~ P₀/ΣP₀` and `X_t = φ(X₀, t)`, conditioning on `X_t` groups the
//! initial atoms exactly by cluster. The checks here compare the engine's
//! cluster paths against conditional expectations computed by direct
//! weighted sums over the initial data.

use crate::dynamics::ShockTimeline;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// Evaluators for `φ`, `v`, `θ` (Lagrangian) and `u`, `γ` (Eulerian, on the support of `P_t`).
#[derive(Debug, Clone, Copy)]
pub struct FlowField<'a> {
    timeline: &'a ShockTimeline,
}

impl<'a> FlowField<'a> {
    pub fn new(timeline: &'a ShockTimeline) -> Self {
        Self { timeline }
    }

    pub fn timeline(&self) -> &'a ShockTimeline {
        self.timeline
    }

    /// `φ(x_i, t)`.
    pub fn phi(&self, i: usize, t: f64) -> Result<f64> {
        let seg = self.timeline.segment_at(t)?;
        let k = self.cluster_index(seg, i)?;
        Ok(seg.paths[k].eval(t))
    }

    /// `v(x_i, t)`.
    pub fn velocity(&self, i: usize, t: f64) -> Result<f64> {
        let seg = self.timeline.segment_at(t)?;
        let k = self.cluster_index(seg, i)?;
        Ok(seg.paths[k].velocity(t))
    }

    /// `θ(x_i, t)`.
    pub fn acceleration(&self, i: usize, t: f64) -> Result<f64> {
        let seg = self.timeline.segment_at(t)?;
        let k = self.cluster_index(seg, i)?;
        Ok(seg.paths[k].acceleration())
    }

    fn cluster_index(&self, seg: &crate::dynamics::Segment, i: usize) -> Result<usize> {
        seg.partition.cluster_of(i).ok_or(Error::IndexOutOfRange {
            first: i,
            last: i,
            len: self.timeline.initial().len(),
        })
    }

    /// Cluster located at `y` at time `t`, if any.
    fn cluster_at(&self, y: f64, t: f64) -> Result<usize> {
        let seg = self.timeline.segment_at(t)?;
        let tol = self.timeline.tolerances();
        seg.paths
            .iter()
            .position(|p| tol.close(p.eval(t), y))
            .ok_or(Error::OutsideSupport { point: y, t })
    }

    /// Eulerian velocity `u(y, t)`; undefined off the support of `P_t`.
    pub fn eulerian_velocity(&self, y: f64, t: f64) -> Result<f64> {
        let k = self.cluster_at(y, t)?;
        Ok(self.timeline.segment_at(t)?.paths[k].velocity(t))
    }

    /// Eulerian acceleration `γ(y, t)`; undefined off the support of `P_t`.
    pub fn eulerian_acceleration(&self, y: f64, t: f64) -> Result<f64> {
        let k = self.cluster_at(y, t)?;
        Ok(self.timeline.segment_at(t)?.paths[k].acceleration())
    }

    /// `ρ(·, t) = Law(X_t)`: one atom per cluster, weights normalized to one.
    pub fn density(&self, t: f64) -> Result<DiscreteMeasure> {
        let seg = self.timeline.segment_at(t)?;
        let total = self.timeline.initial().total_mass();
        Ok(DiscreteMeasure::new(
            seg.partition
                .clusters()
                .iter()
                .zip(&seg.paths)
                .map(|(c, p)| (p.eval(t), c.mass / total))
                .collect(),
        ))
    }
}

/// Cluster-wise conditional expectations of the initial data at time `t`,
/// computed by direct summation over each cluster's members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMoments {
    /// `E[X₀ + t·u₀(X₀) + ½t²·γ₀(X₀) | X_t]`.
    pub position: f64,
    /// `E[u₀(X₀) + t·γ₀(X₀) | X_t]`.
    pub velocity: f64,
    /// `E[γ₀(X₀) | X_t]`.
    pub acceleration: f64,
    /// `E[|X₀| + t·|u₀| + ½t²·|γ₀| | X_t]`, the magnitude the residuals are measured against.
    pub scale: f64,
}

pub fn conditional_moments(timeline: &ShockTimeline, first: usize, last: usize, t: f64) -> ConditionalMoments {
    let data = timeline.initial();
    let (mut m, mut x, mut v, mut a, mut s) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for j in first..=last {
        let p = data.particle(j);
        m += p.m;
        x += p.m * (p.x + t * p.v + 0.5 * t * t * p.theta);
        v += p.m * (p.v + t * p.theta);
        a += p.m * p.theta;
        s += p.m * (p.x.abs() + t * p.v.abs() + 0.5 * t * t * p.theta.abs());
    }
    ConditionalMoments {
        position: x / m,
        velocity: v / m,
        acceleration: a / m,
        scale: s / m,
    }
}

/// Largest residuals of the three conditional-expectation identities at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DermouneResiduals {
    pub t: f64,
    pub position: f64,
    pub velocity: f64,
    pub acceleration: f64,
    /// Largest `E[|X₀| + t|u₀| + ½t²|γ₀| | X_t]` over clusters.
    pub scale: f64,
}

impl DermouneResiduals {
    pub fn max(&self) -> f64 {
        self.position.max(self.velocity).max(self.acceleration)
    }

    /// All residuals within `rel · (1 + scale)`.
    pub fn within(&self, rel: f64) -> bool {
        self.max() <= rel * (1.0 + self.scale)
    }
}

/// Residuals of `X_t = E[X₀ + tu₀ + ½t²γ₀ | X_t]`, `u(X_t,t) = E[u₀ + tγ₀ | X_t]`
/// and `γ(X_t,t) = E[γ₀ | X_t]`, maximized over clusters.
pub fn dermoune_identity_residuals(timeline: &ShockTimeline, t: f64) -> Result<DermouneResiduals> {
    let seg = timeline.segment_at(t)?;
    let mut out = DermouneResiduals {
        t,
        position: 0.0,
        velocity: 0.0,
        acceleration: 0.0,
        scale: 0.0,
    };
    for (c, p) in seg.partition.clusters().iter().zip(&seg.paths) {
        let e = conditional_moments(timeline, c.first, c.last, t);
        out.position = out.position.max((p.eval(t) - e.position).abs());
        out.velocity = out.velocity.max((p.velocity(t) - e.velocity).abs());
        out.acceleration = out.acceleration.max((p.acceleration() - e.acceleration).abs());
        out.scale = out.scale.max(e.scale);
    }
    Ok(out)
}

/// True iff grouping the atoms of `P_t` by position (within `tol.abs`)
/// reproduces the timeline's partition at `t`.
pub fn measurability_coherent(timeline: &ShockTimeline, t: f64) -> Result<bool> {
    let positions = timeline.positions_at(t)?;
    let tol = timeline.tolerances();
    let mut ranges = Vec::new();
    let mut start = 0;
    for i in 1..=positions.len() {
        if i == positions.len() || positions[i] - positions[i - 1] > tol.abs {
            ranges.push((start, i - 1));
            start = i;
        }
    }
    Ok(ranges == timeline.partition_at(t)?.ranges())
}

/// One finite-difference step of the right-derivative check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeSample {
    pub h: f64,
    /// `|(φ(t+h) − φ(t))/h − E[u₀ + tγ₀ | X_t]|`.
    pub position_error: f64,
    /// Leading-order prediction `½·h·|θ̄|`.
    pub position_predicted: f64,
    /// `|(u(X_{t+h}, t+h) − u(X_t, t))/h − E[γ₀ | X_t]|`.
    pub velocity_error: f64,
    /// `h` is below the distance to the next shock.
    pub below_gap: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDerivatives {
    pub first: usize,
    pub last: usize,
    pub acceleration: f64,
    pub samples: Vec<DerivativeSample>,
}

impl ClusterDerivatives {
    /// Observed convergence orders `log(e_k/e_{k+1}) / log(h_k/h_{k+1})` of the
    /// position error between consecutive steps below the gap.
    pub fn observed_orders(&self) -> Vec<f64> {
        self.samples
            .windows(2)
            .filter(|w| w[0].below_gap && w[1].below_gap)
            .filter(|w| w[0].position_error > 0.0 && w[1].position_error > 0.0)
            .map(|w| (w[0].position_error / w[1].position_error).ln() / (w[0].h / w[1].h).ln())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    pub t: f64,
    /// Distance from `t` to the next shock (infinite when none remains).
    pub gap_to_next_shock: f64,
    pub clusters: Vec<ClusterDerivatives>,
}

/// Finite-difference check of the right-hand derivatives of `X_t` and `u(X_t, t)`.
pub fn right_derivative_check(timeline: &ShockTimeline, t: f64, h_list: &[f64]) -> Result<DerivativeReport> {
    if h_list.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let seg = timeline.segment_at(t)?;
    let gap = timeline
        .event_times()
        .into_iter()
        .find(|&s| s > t)
        .map_or(f64::INFINITY, |s| s - t);
    let flow = FlowField::new(timeline);
    let mut clusters = Vec::with_capacity(seg.partition.len());
    for (c, p) in seg.partition.clusters().iter().zip(&seg.paths) {
        let e = conditional_moments(timeline, c.first, c.last, t);
        let x0 = p.eval(t);
        let v0 = p.velocity(t);
        let samples = h_list
            .iter()
            .map(|&h| {
                let x1 = flow.phi(c.first, t + h)?;
                let v1 = flow.velocity(c.first, t + h)?;
                Ok(DerivativeSample {
                    h,
                    position_error: ((x1 - x0) / h - e.velocity).abs(),
                    position_predicted: 0.5 * h * e.acceleration.abs(),
                    velocity_error: ((v1 - v0) / h - e.acceleration).abs(),
                    below_gap: h < gap,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        clusters.push(ClusterDerivatives {
            first: c.first,
            last: c.last,
            acceleration: e.acceleration,
            samples,
        });
    }
    Ok(DerivativeReport {
        t,
        gap_to_next_shock: gap,
        clusters,
    })
}
