//! Event-driven construction of the shock timeline.
//!
//! Between collisions every cluster follows the barycentric parabola of its
//! members. The engine repeatedly finds the earliest crossing between
//! adjacent clusters, merges every run of clusters that meet at that instant
//! and re-derives the merged paths from the initial data.

use crate::data::{cluster_path, Cluster, InitialData, Partition};
use crate::error::{Error, Result};
use crate::quadratic::{quadratic_meet_times_with, QuadraticPath};
use crate::tolerance::Tolerances;

/// Clusters `parts` combined into `merged` at a shock.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub parts: Vec<(usize, usize)>,
    pub merged: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShockEvent {
    pub time: f64,
    pub merges: Vec<Merge>,
}

/// A constant partition on `[start, end]` with one path per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub partition: Partition,
    pub paths: Vec<QuadraticPath>,
}

impl Segment {
    fn cluster_values(&self, n: usize, value: impl Fn(&QuadraticPath) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (c, p) in self.partition.clusters().iter().zip(&self.paths) {
            let v = value(p);
            out[c.first..=c.last].fill(v);
        }
        out
    }
}

/// Complete history of the sticky dynamics on `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockTimeline {
    initial: InitialData,
    t_end: f64,
    tol: Tolerances,
    events: Vec<ShockEvent>,
    segments: Vec<Segment>,
}

/// Earliest upcoming collision between adjacent clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Collision {
    pub time: f64,
    /// Runs of adjacent cluster indices `(first, last)` that meet at `time`.
    pub groups: Vec<(usize, usize)>,
}

fn first_meet(left: &QuadraticPath, right: &QuadraticPath, after: f64, tol: &Tolerances) -> Option<f64> {
    match quadratic_meet_times_with(left, right, after, tol.rel, 0.0) {
        Ok(roots) => roots.first().map(|m| m.time),
        Err(_) => Some(after),
    }
}

/// Connected runs of adjacent pairs flagged in `touching` (`touching[i]`
/// links clusters `i` and `i + 1`).
fn runs(touching: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < touching.len() {
        if touching[i] {
            let start = i;
            while i < touching.len() && touching[i] {
                i += 1;
            }
            out.push((start, i));
        } else {
            i += 1;
        }
    }
    out
}

/// Finds the next collision strictly after `t_now` among adjacent `paths`.
///
/// Pairs meeting within `tol.event_window(t*)` of the earliest time `t*` are
/// grouped into connected runs.
pub fn next_collision(paths: &[QuadraticPath], t_now: f64, tol: &Tolerances) -> Option<Collision> {
    let times: Vec<Option<f64>> = paths
        .windows(2)
        .map(|w| first_meet(&w[0], &w[1], t_now, tol))
        .collect();
    let t_star = times.iter().flatten().copied().min_by(f64::total_cmp)?;
    let window = tol.event_window(t_star);
    let touching: Vec<bool> = times
        .iter()
        .map(|t| t.is_some_and(|t| t <= t_star + window))
        .collect();
    Some(Collision {
        time: t_star,
        groups: runs(&touching),
    })
}

struct State<'a> {
    data: &'a InitialData,
    ranges: Vec<(usize, usize)>,
    formation: Vec<f64>,
    paths: Vec<QuadraticPath>,
}

impl<'a> State<'a> {
    fn new(data: &'a InitialData) -> Self {
        let n = data.len();
        Self {
            data,
            ranges: (0..n).map(|i| (i, i)).collect(),
            formation: vec![0.0; n],
            paths: (0..n)
                .map(|i| cluster_path(data, i, i).expect("index in range"))
                .collect(),
        }
    }

    /// Merges each run of cluster indices into one cluster formed at `t`.
    fn merge(&mut self, groups: &[(usize, usize)], t: f64) {
        for &(a, b) in groups.iter().rev() {
            let range = (self.ranges[a].0, self.ranges[b].1);
            let path = cluster_path(self.data, range.0, range.1).expect("valid range");
            self.ranges.splice(a..=b, [range]);
            self.formation.splice(a..=b, [t]);
            self.paths.splice(a..=b, [path]);
        }
    }

    fn partition(&self) -> Partition {
        let clusters = self
            .ranges
            .iter()
            .zip(&self.formation)
            .map(|(&(g, d), &t)| Cluster::new(self.data, g, d, t).expect("valid range"))
            .collect();
        Partition::new(clusters, self.data.len()).expect("contiguous cover")
    }

    /// Adjacent pairs already in contact at `t`: overlapping, or meeting
    /// within the event window around `t`.
    fn contacts(&self, t: f64, tol: &Tolerances) -> Vec<bool> {
        let window = tol.event_window(t);
        self.paths
            .windows(2)
            .map(|w| {
                let (l, r) = (w[0].eval(t), w[1].eval(t));
                if r - l < -tol.slack(l.abs().max(r.abs())) {
                    return true;
                }
                first_meet(&w[0], &w[1], t - window, tol).is_some_and(|m| m <= t + window)
            })
            .collect()
    }
}

/// Runs the sticky dynamics up to `t_end` (`f64::INFINITY` runs until no
/// further collision is possible).
pub fn simulate(data: &InitialData, t_end: f64, tol: &Tolerances) -> Result<ShockTimeline> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    let mut state = State::new(data);
    let mut segments = Vec::new();
    let mut events = Vec::new();
    let mut t_now = 0.0;

    while let Some(collision) = next_collision(&state.paths, t_now, tol) {
        let t_star = collision.time;
        if t_star > t_end {
            break;
        }
        segments.push(Segment {
            start: t_now,
            end: t_star,
            partition: state.partition(),
            paths: state.paths.clone(),
        });
        let before = state.ranges.clone();
        state.merge(&collision.groups, t_star);
        loop {
            let touching = state.contacts(t_star, tol);
            let groups = runs(&touching);
            if groups.is_empty() {
                break;
            }
            state.merge(&groups, t_star);
        }
        let merges = state
            .ranges
            .iter()
            .filter_map(|&(g, d)| {
                let parts: Vec<_> = before
                    .iter()
                    .copied()
                    .filter(|&(a, b)| g <= a && b <= d)
                    .collect();
                (parts.len() > 1).then_some(Merge { parts, merged: (g, d) })
            })
            .collect();
        events.push(ShockEvent { time: t_star, merges });
        t_now = t_star;
    }
    segments.push(Segment {
        start: t_now,
        end: t_end,
        partition: state.partition(),
        paths: state.paths.clone(),
    });

    Ok(ShockTimeline {
        initial: data.clone(),
        t_end,
        tol: *tol,
        events,
        segments,
    })
}

impl ShockTimeline {
    pub fn initial(&self) -> &InitialData {
        &self.initial
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn events(&self) -> &[ShockEvent] {
        &self.events
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn event_times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time).collect()
    }

    pub fn first_shock_time(&self) -> Option<f64> {
        self.events.first().map(|e| e.time)
    }

    /// Shock times in the half-open window `(t1, t2]`.
    pub fn shocks_in(&self, t1: f64, t2: f64) -> Vec<f64> {
        self.events
            .iter()
            .map(|e| e.time)
            .filter(|&s| t1 < s && s <= t2)
            .collect()
    }

    pub(crate) fn check_time(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 || t > self.t_end {
            return Err(Error::TimeOutOfRange { t, t_end: self.t_end });
        }
        Ok(())
    }

    /// Segment in force at `t` (right-continuous at shocks).
    pub fn segment_at(&self, t: f64) -> Result<&Segment> {
        self.check_time(t)?;
        let k = self.segments.partition_point(|s| s.start <= t);
        Ok(&self.segments[k.saturating_sub(1)])
    }

    /// Segment whose interval `(start, end]` contains `t`; the first segment at `t = 0`.
    pub fn segment_left_of(&self, t: f64) -> Result<&Segment> {
        self.check_time(t)?;
        let k = self.segments.partition_point(|s| s.end < t);
        Ok(&self.segments[k.min(self.segments.len() - 1)])
    }

    pub fn partition_at(&self, t: f64) -> Result<&Partition> {
        Ok(&self.segment_at(t)?.partition)
    }

    pub fn partition_left_of(&self, t: f64) -> Result<&Partition> {
        Ok(&self.segment_left_of(t)?.partition)
    }

    pub fn positions_at(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.initial.len();
        Ok(self.segment_at(t)?.cluster_values(n, |p| p.eval(t)))
    }

    pub fn velocities_at(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.initial.len();
        Ok(self.segment_at(t)?.cluster_values(n, |p| p.velocity(t)))
    }

    pub fn accelerations_at(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.initial.len();
        Ok(self.segment_at(t)?.cluster_values(n, |p| p.acceleration()))
    }

    pub fn positions_at_left(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.initial.len();
        Ok(self.segment_left_of(t)?.cluster_values(n, |p| p.eval(t)))
    }

    pub fn velocities_at_left(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.initial.len();
        Ok(self.segment_left_of(t)?.cluster_values(n, |p| p.velocity(t)))
    }

    pub fn accelerations_at_left(&self, t: f64) -> Result<Vec<f64>> {
        let n = self.initial.len();
        Ok(self.segment_left_of(t)?.cluster_values(n, |p| p.acceleration()))
    }

    /// Returns a copy whose first merged cluster has its velocity shifted by
    /// `delta` right after the first shock. Used to check that the
    /// verification suites catch broken conservation.
    #[doc(hidden)]
    pub fn with_perturbed_merge_velocity(mut self, delta: f64) -> Self {
        if let Some(first) = self.events.first() {
            let merged = first.merges[0].merged;
            let seg = &mut self.segments[1];
            if let Some(k) = seg.partition.clusters().iter().position(|c| c.range() == merged) {
                seg.paths[k].c1 += delta;
            }
        }
        self
    }
}

/// Partitions at each of the ascending `times` obtained by explicit time
/// stepping with step `dt`: every cluster is advanced along its barycentric
/// parabola and adjacent clusters that are out of order, or closer than
/// `tol.abs`, are merged at each step boundary.
pub fn brute_force_partitions(
    data: &InitialData,
    times: &[f64],
    dt: f64,
    tol: &Tolerances,
) -> Result<Vec<Partition>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if times.windows(2).any(|w| w[0] > w[1]) || times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidArgument("sample times must be ascending and non-negative".into()));
    }
    let mut state = State::new(data);
    let mut positions: Vec<f64> = Vec::with_capacity(data.len());
    let mut out = Vec::with_capacity(times.len());
    let mut step: u64 = 0;
    let mut s = 0.0;
    for &t in times {
        while s < t {
            step += 1;
            s = (step as f64 * dt).min(t);
            loop {
                positions.clear();
                positions.extend(state.paths.iter().map(|p| p.eval(s)));
                let hit = positions.windows(2).position(|w| w[1] - w[0] <= tol.abs);
                match hit {
                    Some(i) => state.merge(&[(i, i + 1)], s),
                    None => break,
                }
            }
        }
        out.push(state.partition());
    }
    Ok(out)
}

pub fn brute_force_partition(data: &InitialData, t: f64, dt: f64, tol: &Tolerances) -> Result<Partition> {
    Ok(brute_force_partitions(data, &[t], dt, tol)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(x: &[f64], m: &[f64], v: &[f64], th: &[f64]) -> InitialData {
        InitialData::new(x.to_vec(), m.to_vec(), v.to_vec(), th.to_vec()).unwrap()
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn head_on_pair() {
        let d = data(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[0.0, 0.0]);
        let tl = simulate(&d, f64::INFINITY, &tol()).unwrap();
        assert_eq!(tl.events().len(), 1);
        assert!((tl.events()[0].time - 1.0).abs() < 1e-15);
        assert_eq!(tl.events()[0].merges[0].merged, (0, 1));
        let after = &tl.segments()[1].paths[0];
        for t in [1.0, 1.5, 4.0] {
            assert!((after.eval(t) - (1.0 + 0.5 * (t - 1.0))).abs() < 1e-14);
            assert!((after.velocity(t) - 0.5).abs() < 1e-15);
        }
        assert_eq!(tl.velocities_at(1.0).unwrap(), vec![0.5, 0.5]);
        assert_eq!(tl.velocities_at_left(1.0).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn accelerated_pair_meets_at_sqrt2() {
        let d = data(&[0.0, 2.0], &[1.0, 3.0], &[0.0, 0.0], &[1.0, -1.0]);
        let tl = simulate(&d, f64::INFINITY, &tol()).unwrap();
        let s = 2f64.sqrt();
        assert_eq!(tl.events().len(), 1);
        assert!((tl.events()[0].time - s).abs() < 1e-15);
        let acc = tl.accelerations_at(s).unwrap();
        assert_eq!(acc, vec![-0.5, -0.5]);
        let v = tl.velocities_at(s).unwrap();
        // brute-force summation oracle for the merged velocity
        let oracle = (1.0 * (0.0 + s * 1.0) + 3.0 * (0.0 + -s)) / 4.0;
        assert!((v[0] - oracle).abs() < 1e-15);
        assert!((v[0] + s / 2.0).abs() < 1e-15);
    }

    #[test]
    fn free_flight_for_single_particle() {
        let d = data(&[1.0], &[2.0], &[0.5], &[-2.0]);
        let tl = simulate(&d, 10.0, &tol()).unwrap();
        assert!(tl.events().is_empty());
        assert_eq!(tl.segments().len(), 1);
        let t = 3.0;
        assert_eq!(tl.positions_at(t).unwrap()[0], 1.0 + 0.5 * t - t * t);
    }

    #[test]
    fn symmetric_triple_merges_at_once() {
        let d = data(&[0.0, 1.0, 2.0], &[1.0; 3], &[1.0, 0.0, -1.0], &[0.0; 3]);
        let col = next_collision(&simulate(&d, 0.5, &tol()).unwrap().segments()[0].paths, 0.0, &tol()).unwrap();
        assert!((col.time - 1.0).abs() < 1e-15);
        assert_eq!(col.groups, vec![(0, 2)]);
        let tl = simulate(&d, f64::INFINITY, &tol()).unwrap();
        assert_eq!(tl.events().len(), 1);
        assert_eq!(tl.events()[0].merges[0].parts, vec![(0, 0), (1, 1), (2, 2)]);
        let oracle = brute_force_partition(&d, 1.5, 1e-5, &tol()).unwrap();
        assert_eq!(oracle.ranges(), vec![(0, 2)]);
    }

    #[test]
    fn parallel_rest_never_collides() {
        let d = data(&[0.0, 1.0], &[1.0, 1.0], &[0.0, 0.0], &[0.0, 0.0]);
        let tl = simulate(&d, 1.0, &tol()).unwrap();
        assert!(next_collision(&tl.segments()[0].paths, 0.0, &tol()).is_none());
    }

    #[test]
    fn catching_up_under_acceleration() {
        let d = data(&[0.0, 1.0], &[1.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]);
        assert!(d.gvp_admissible());
        let tl = simulate(&d, 1.0, &tol()).unwrap();
        let col = next_collision(&tl.segments()[0].paths, 0.0, &tol()).unwrap();
        assert!((col.time - (1.0 + 3f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn time_range_is_enforced() {
        let d = data(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[0.0, 0.0]);
        let tl = simulate(&d, 2.0, &tol()).unwrap();
        assert!(matches!(tl.positions_at(2.5), Err(Error::TimeOutOfRange { .. })));
        assert!(matches!(tl.positions_at(-0.1), Err(Error::TimeOutOfRange { .. })));
        assert_eq!(tl.positions_at(0.0).unwrap(), vec![0.0, 1.0]);
        assert_eq!(tl.velocities_at(0.0).unwrap(), vec![1.0, 0.0]);
        assert!(simulate(&d, 0.0, &tol()).is_err());
    }

    #[test]
    fn all_merged_acceleration_is_force_average() {
        let d = data(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0], &[3.0, 0.0, -3.0], &[2.0, 1.0, -1.0]);
        let tl = simulate(&d, f64::INFINITY, &tol()).unwrap();
        let last = tl.segments().last().unwrap();
        assert_eq!(last.partition.ranges(), vec![(0, 2)]);
        let expected = (2.0 + 2.0 - 3.0) / 6.0;
        assert!((last.paths[0].c2 - expected).abs() < 1e-15);
    }

    #[test]
    fn brute_force_singleton() {
        let d = data(&[0.0], &[1.0], &[1.0], &[1.0]);
        let p = brute_force_partition(&d, 1.0, 1e-3, &tol()).unwrap();
        assert_eq!(p.ranges(), vec![(0, 0)]);
    }

    #[test]
    fn fault_injection_changes_velocity() {
        let d = data(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[0.0, 0.0]);
        let tl = simulate(&d, 2.0, &tol()).unwrap().with_perturbed_merge_velocity(1e-3);
        assert!((tl.velocities_at(1.5).unwrap()[0] - 0.501).abs() < 1e-12);
    }
}
