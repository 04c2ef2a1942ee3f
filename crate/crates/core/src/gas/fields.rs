//! Velocity-space measure fields: `μ = Law(V_t)`, `w = E[Γ₀ | V_t]`,
//! `a = Var[Γ_t | V_t]`, and their left limits.

use crate::data::InitialData;
use crate::dynamics::{Segment, ShockTimeline};
use crate::error::Result;
use crate::measure::DiscreteMeasure;
use crate::tolerance::Tolerances;

/// One atom of `μ(·, t)` with the conditional moments of the acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityAtom {
    pub velocity: f64,
    /// Normalized mass of all clusters moving at this velocity.
    pub weight: f64,
    /// `w = E[Γ₀ | V = velocity]`, from the initial accelerations.
    pub w: f64,
    /// `E[Γ_t | V = velocity]`, from the current cluster accelerations.
    pub current_mean: f64,
    /// `a = Var[Γ_t | V = velocity]`.
    pub a: f64,
}

/// Velocity-space fields at one time, right-continuous value and left limit.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityFields {
    pub t: f64,
    pub current: Vec<VelocityAtom>,
    pub left: Vec<VelocityAtom>,
}

fn measure_of(atoms: &[VelocityAtom], density: impl Fn(&VelocityAtom) -> f64) -> DiscreteMeasure {
    DiscreteMeasure::new(atoms.iter().map(|a| (a.velocity, a.weight * density(a))).collect())
}

fn lookup<'a>(atoms: &'a [VelocityAtom], x: f64, tol: &Tolerances) -> Option<&'a VelocityAtom> {
    atoms.iter().find(|a| tol.close(a.velocity, x))
}

impl VelocityFields {
    /// `μ(·, t)`.
    pub fn mu(&self) -> DiscreteMeasure {
        measure_of(&self.current, |_| 1.0)
    }

    /// `μ(·, t⁻)`.
    pub fn mu_left(&self) -> DiscreteMeasure {
        measure_of(&self.left, |_| 1.0)
    }

    /// `w·μ`.
    pub fn w_mu(&self) -> DiscreteMeasure {
        measure_of(&self.current, |a| a.w)
    }

    /// `w⁻·μ⁻`.
    pub fn w_mu_left(&self) -> DiscreteMeasure {
        measure_of(&self.left, |a| a.w)
    }

    /// `a·μ`.
    pub fn a_mu(&self) -> DiscreteMeasure {
        measure_of(&self.current, |a| a.a)
    }

    /// `(w² + a)·μ`.
    pub fn w2a_mu(&self) -> DiscreteMeasure {
        measure_of(&self.current, |a| a.w * a.w + a.a)
    }

    pub fn w_at(&self, x: f64, tol: &Tolerances) -> Option<f64> {
        lookup(&self.current, x, tol).map(|a| a.w)
    }

    pub fn w_left_at(&self, x: f64, tol: &Tolerances) -> Option<f64> {
        lookup(&self.left, x, tol).map(|a| a.w)
    }

    pub fn a_at(&self, x: f64, tol: &Tolerances) -> Option<f64> {
        lookup(&self.current, x, tol).map(|a| a.a)
    }
}

/// Groups the clusters of `seg` by velocity at time `t`.
pub(crate) fn group_by_velocity(data: &InitialData, seg: &Segment, t: f64, tol: &Tolerances) -> Vec<VelocityAtom> {
    let total = data.total_mass();
    let mut clusters: Vec<(f64, f64, f64, usize, usize)> = seg
        .partition
        .clusters()
        .iter()
        .zip(&seg.paths)
        .map(|(c, p)| (p.velocity(t), c.mass, p.acceleration(), c.first, c.last))
        .collect();
    clusters.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut atoms = Vec::new();
    let mut start = 0;
    for end in 1..=clusters.len() {
        let split = end == clusters.len() || {
            let (prev, next) = (clusters[end - 1].0, clusters[end].0);
            next - prev > tol.slack(prev.abs().max(next.abs()))
        };
        if !split {
            continue;
        }
        let group = &clusters[start..end];
        let mass: f64 = group.iter().map(|c| c.1).sum();
        let velocity = group.iter().map(|c| c.1 * c.0).sum::<f64>() / mass;
        let current_mean = group.iter().map(|c| c.1 * c.2).sum::<f64>() / mass;
        let a = group
            .iter()
            .map(|c| c.1 * (c.2 - current_mean).powi(2))
            .sum::<f64>()
            / mass;
        let mut initial_force = 0.0;
        for &(_, _, _, g, d) in group {
            for j in g..=d {
                initial_force += data.masses()[j] * data.accelerations()[j];
            }
        }
        atoms.push(VelocityAtom {
            velocity,
            weight: mass / total,
            w: initial_force / mass,
            current_mean,
            a,
        });
        start = end;
    }
    atoms
}

/// `μ`, `μ⁻`, `w`, `w⁻` and `a` at time `t`, with atoms grouped by velocity
/// within the timeline's tolerance.
pub fn velocity_space_fields(timeline: &ShockTimeline, t: f64) -> Result<VelocityFields> {
    let tol = timeline.tolerances();
    let data = timeline.initial();
    let current = group_by_velocity(data, timeline.segment_at(t)?, t, tol);
    let left = group_by_velocity(data, timeline.segment_left_of(t)?, t, tol);
    Ok(VelocityFields { t, current, left })
}

/// `t ↦ μ(·, t)` together with its weighted variants and jump times.
#[derive(Debug, Clone, Copy)]
pub struct VelocityMeasureField<'a> {
    timeline: &'a ShockTimeline,
}

impl<'a> VelocityMeasureField<'a> {
    pub fn new(timeline: &'a ShockTimeline) -> Self {
        Self { timeline }
    }

    pub fn fields(&self, t: f64) -> Result<VelocityFields> {
        velocity_space_fields(self.timeline, t)
    }

    pub fn at(&self, t: f64) -> Result<DiscreteMeasure> {
        Ok(self.fields(t)?.mu())
    }

    pub fn left_limit(&self, t: f64) -> Result<DiscreteMeasure> {
        Ok(self.fields(t)?.mu_left())
    }

    pub fn w_mu(&self, t: f64) -> Result<DiscreteMeasure> {
        Ok(self.fields(t)?.w_mu())
    }

    pub fn w2a_mu(&self, t: f64) -> Result<DiscreteMeasure> {
        Ok(self.fields(t)?.w2a_mu())
    }

    /// Times where the field may jump: the shock times.
    pub fn discontinuities(&self) -> Vec<f64> {
        self.timeline.event_times()
    }
}

/// A time at which two clusters of one segment share a velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coincidence {
    pub t: f64,
    pub velocity: f64,
    pub clusters: ((usize, usize), (usize, usize)),
}

/// Roots of `v_i(t) = v_j(t)` for every pair of distinct-acceleration clusters,
/// restricted to the segment where both clusters exist. Sorted by time.
pub fn velocity_coincidence_times(timeline: &ShockTimeline) -> Vec<Coincidence> {
    let mut out = Vec::new();
    for seg in timeline.segments() {
        let clusters = seg.partition.clusters();
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (p, q) = (&seg.paths[i], &seg.paths[j]);
                if p.c2 == q.c2 {
                    continue;
                }
                let t = (q.c1 - p.c1) / (p.c2 - q.c2);
                if t > 0.0 && t >= seg.start && t < seg.end {
                    out.push(Coincidence {
                        t,
                        velocity: p.velocity(t),
                        clusters: (clusters[i].range(), clusters[j].range()),
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    out
}

/// The onset delay `δ = min(T, inf{t > 0 : v_i ≠ v_j, v_i + tθ_i = v_j + tθ_j})`
/// with `T` the first shock time; infinite when neither occurs.
pub fn congestion_delay(timeline: &ShockTimeline) -> f64 {
    let data = timeline.initial();
    let (v, th) = (data.velocities(), data.accelerations());
    let mut delta = timeline.first_shock_time().unwrap_or(f64::INFINITY);
    for i in 0..data.len() {
        for j in i + 1..data.len() {
            if v[i] != v[j] && th[i] != th[j] {
                let t = (v[j] - v[i]) / (th[i] - th[j]);
                if t > 0.0 {
                    delta = delta.min(t);
                }
            }
        }
    }
    delta
}
