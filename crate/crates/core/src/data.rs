//! Initial particle data, cluster aggregates and partitions.

use crate::error::{Error, Result};
use crate::quadratic::QuadraticPath;

/// One initial particle: position, mass, velocity and acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub x: f64,
    pub m: f64,
    pub v: f64,
    pub theta: f64,
}

/// Validated initial state `(P₀, u₀, γ₀)` of the particle system.
///
/// Positions are strictly increasing and masses strictly positive. The data
/// is immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    positions: Vec<f64>,
    masses: Vec<f64>,
    velocities: Vec<f64>,
    accelerations: Vec<f64>,
    gvp_admissible: bool,
}

impl InitialData {
    pub fn new(
        positions: Vec<f64>,
        masses: Vec<f64>,
        velocities: Vec<f64>,
        accelerations: Vec<f64>,
    ) -> Result<Self> {
        let n = positions.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        for (field, values) in [
            ("positions", &positions),
            ("masses", &masses),
            ("velocities", &velocities),
            ("accelerations", &accelerations),
        ] {
            if values.len() != n {
                return Err(Error::LengthMismatch {
                    field,
                    expected: n,
                    got: values.len(),
                });
            }
            if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { field, index });
            }
        }
        for (index, w) in positions.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::NonIncreasingPositions {
                    index: index + 1,
                    left: w[0],
                    right: w[1],
                });
            }
        }
        if let Some(index) = masses.iter().position(|&m| m <= 0.0) {
            return Err(Error::NonPositiveMass {
                index,
                mass: masses[index],
            });
        }
        let gvp_admissible = accelerations.windows(2).all(|w| w[0] >= w[1]);
        Ok(Self {
            positions,
            masses,
            velocities,
            accelerations,
            gvp_admissible,
        })
    }

    pub fn from_particles(particles: &[Particle]) -> Result<Self> {
        Self::new(
            particles.iter().map(|p| p.x).collect(),
            particles.iter().map(|p| p.m).collect(),
            particles.iter().map(|p| p.v).collect(),
            particles.iter().map(|p| p.theta).collect(),
        )
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// Always false: validation rejects empty input.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn accelerations(&self) -> &[f64] {
        &self.accelerations
    }

    pub fn particle(&self, i: usize) -> Particle {
        Particle {
            x: self.positions[i],
            m: self.masses[i],
            v: self.velocities[i],
            theta: self.accelerations[i],
        }
    }

    pub fn particles(&self) -> impl Iterator<Item = Particle> + '_ {
        (0..self.len()).map(|i| self.particle(i))
    }

    /// True iff initial accelerations are non-increasing in index.
    pub fn gvp_admissible(&self) -> bool {
        self.gvp_admissible
    }

    /// First index where the accelerations increase, if any.
    pub fn first_acceleration_increase(&self) -> Option<usize> {
        self.accelerations
            .windows(2)
            .position(|w| w[0] < w[1])
    }

    pub fn admissibility_error(&self) -> Option<Error> {
        self.first_acceleration_increase()
            .map(|i| Error::InadmissibleData {
                index: i + 1,
                left: self.accelerations[i],
                right: self.accelerations[i + 1],
            })
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn total_force(&self) -> f64 {
        self.masses
            .iter()
            .zip(&self.accelerations)
            .map(|(m, a)| m * a)
            .sum()
    }

    pub fn total_momentum(&self) -> f64 {
        self.masses
            .iter()
            .zip(&self.velocities)
            .map(|(m, v)| m * v)
            .sum()
    }

    pub(crate) fn check_range(&self, first: usize, last: usize) -> Result<()> {
        if first > last || last >= self.len() {
            return Err(Error::IndexOutOfRange {
                first,
                last,
                len: self.len(),
            });
        }
        Ok(())
    }
}

/// Summation strategy for cluster aggregates. Both sum left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Summation {
    #[default]
    Naive,
    Kahan,
}

#[derive(Default)]
struct Accumulator {
    kahan: bool,
    sum: f64,
    carry: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        if self.kahan {
            let y = x - self.carry;
            let t = self.sum + y;
            self.carry = (t - self.sum) - y;
            self.sum = t;
        } else {
            self.sum += x;
        }
    }
}

/// Barycentric state of an index interval at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    pub mass: f64,
    pub acceleration: f64,
    pub velocity: f64,
    pub position: f64,
}

/// Mass, mean acceleration, mean velocity and barycenter of particles `first..=last`
/// moved freely to time `t`.
pub fn cluster_aggregates(data: &InitialData, first: usize, last: usize, t: f64) -> Result<Aggregates> {
    cluster_aggregates_with(data, first, last, t, Summation::Naive)
}

pub fn cluster_aggregates_with(
    data: &InitialData,
    first: usize,
    last: usize,
    t: f64,
    summation: Summation,
) -> Result<Aggregates> {
    data.check_range(first, last)?;
    let kahan = summation == Summation::Kahan;
    let mut mass = Accumulator { kahan, ..Default::default() };
    let mut force = Accumulator { kahan, ..Default::default() };
    let mut momentum = Accumulator { kahan, ..Default::default() };
    let mut moment = Accumulator { kahan, ..Default::default() };
    for j in first..=last {
        let Particle { x, m, v, theta } = data.particle(j);
        mass.add(m);
        force.add(m * theta);
        momentum.add(m * (v + t * theta));
        moment.add(m * (x + t * v + 0.5 * t * t * theta));
    }
    let mass = mass.sum;
    Ok(Aggregates {
        mass,
        acceleration: force.sum / mass,
        velocity: momentum.sum / mass,
        position: moment.sum / mass,
    })
}

/// Barycentric trajectory of the composite particle formed by `first..=last`.
///
/// Valid from the moment the cluster forms; the composition never changes
/// afterwards, so the global barycentric formula holds for all later times.
pub fn cluster_path(data: &InitialData, first: usize, last: usize) -> Result<QuadraticPath> {
    let a = cluster_aggregates(data, first, last, 0.0)?;
    Ok(QuadraticPath::new(a.position, a.velocity, a.acceleration))
}

/// A contiguous run of initial particles that move together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub first: usize,
    pub last: usize,
    pub mass: f64,
    pub acceleration: f64,
    pub velocity_at_formation: f64,
    pub position_at_formation: f64,
    /// Time the cluster was formed. Clusters reconstructed from a single-time
    /// characterization record the evaluation time instead.
    pub formation_time: f64,
}

impl Cluster {
    pub fn new(data: &InitialData, first: usize, last: usize, formation_time: f64) -> Result<Self> {
        let a = cluster_aggregates(data, first, last, formation_time)?;
        Ok(Self {
            first,
            last,
            mass: a.mass,
            acceleration: a.acceleration,
            velocity_at_formation: a.velocity,
            position_at_formation: a.position,
            formation_time,
        })
    }

    #[inline]
    pub fn range(&self) -> (usize, usize) {
        (self.first, self.last)
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.first <= i && i <= self.last
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.last - self.first + 1
    }
}

/// Ordered disjoint cover of `0..N` by clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    clusters: Vec<Cluster>,
}

impl Partition {
    /// Builds a partition, checking contiguity and coverage of `0..n`.
    pub fn new(clusters: Vec<Cluster>, n: usize) -> Result<Self> {
        let mut expected = 0;
        for c in &clusters {
            if c.first != expected || c.last < c.first {
                return Err(Error::InvalidArgument(format!(
                    "clusters are not contiguous at index {expected}"
                )));
            }
            expected = c.last + 1;
        }
        if expected != n {
            return Err(Error::InvalidArgument(format!(
                "clusters cover 0..{expected}, expected 0..{n}"
            )));
        }
        Ok(Self { clusters })
    }

    pub fn singletons(data: &InitialData) -> Self {
        let clusters = (0..data.len())
            .map(|i| Cluster::new(data, i, i, 0.0).expect("index in range"))
            .collect();
        Self { clusters }
    }

    /// Partition from index ranges, with cluster state recorded at time `t`.
    pub fn from_ranges(data: &InitialData, ranges: &[(usize, usize)], t: f64) -> Result<Self> {
        let clusters = ranges
            .iter()
            .map(|&(g, d)| Cluster::new(data, g, d, t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(clusters, data.len())
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn ranges(&self) -> Vec<(usize, usize)> {
        self.clusters.iter().map(Cluster::range).collect()
    }

    /// Same index ranges, ignoring recorded state.
    pub fn same_ranges(&self, other: &Partition) -> bool {
        self.clusters.len() == other.clusters.len()
            && self
                .clusters
                .iter()
                .zip(&other.clusters)
                .all(|(a, b)| a.range() == b.range())
    }

    /// Index of the cluster containing particle `i`.
    pub fn cluster_of(&self, i: usize) -> Option<usize> {
        let k = self.clusters.partition_point(|c| c.last < i);
        (k < self.clusters.len() && self.clusters[k].contains(i)).then_some(k)
    }
}

/// Renders ranges as `0-1|2-2|3-5`.
pub fn format_ranges(ranges: &[(usize, usize)]) -> String {
    ranges
        .iter()
        .map(|(g, d)| format!("{g}-{d}"))
        .collect::<Vec<_>>()
        .join("|")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(x: [f64; 2], m: [f64; 2], v: [f64; 2], th: [f64; 2]) -> InitialData {
        InitialData::new(x.to_vec(), m.to_vec(), v.to_vec(), th.to_vec()).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(two([0.0, 1.0], [1.0, 1.0], [1.0, 0.0], [0.0, 0.0]).gvp_admissible());
        assert!(!two([0.0, 10.0], [1.0, 1.0], [0.0, 1.0], [0.0, 1.0]).gvp_admissible());
        let err = InitialData::new(vec![1.0, 1.0], vec![1.0; 2], vec![0.0; 2], vec![0.0; 2]);
        assert!(matches!(err, Err(Error::NonIncreasingPositions { index: 1, .. })));
        let err = InitialData::new(vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0; 2], vec![0.0; 2]);
        assert!(matches!(err, Err(Error::NonPositiveMass { index: 1, .. })));
        assert_eq!(InitialData::new(vec![], vec![], vec![], vec![]), Err(Error::EmptyInput));
        let err = InitialData::new(vec![0.0], vec![1.0, 2.0], vec![0.0], vec![0.0]);
        assert!(matches!(err, Err(Error::LengthMismatch { field: "masses", .. })));
        let err = InitialData::new(vec![0.0], vec![1.0], vec![f64::NAN], vec![0.0]);
        assert!(matches!(err, Err(Error::NonFinite { field: "velocities", .. })));
    }

    #[test]
    fn ties_are_admissible() {
        let d = InitialData::new(vec![0.0, 1.0, 2.0], vec![1.0; 3], vec![0.0; 3], vec![1.0, 1.0, -2.0]).unwrap();
        assert!(d.gvp_admissible());
        assert!(d.admissibility_error().is_none());
    }

    #[test]
    fn singleton_aggregates_are_the_particle() {
        let d = two([0.0, 2.0], [1.0, 3.0], [0.5, 0.0], [1.0, -1.0]);
        let t = 0.7;
        let a = cluster_aggregates(&d, 0, 0, t).unwrap();
        assert_eq!(a.mass, 1.0);
        assert_eq!(a.acceleration, 1.0);
        assert_eq!(a.velocity, 0.5 + t);
        assert_eq!(a.position, 0.5 * t + 0.5 * t * t);
    }

    #[test]
    fn pair_aggregates_match_hand_sums() {
        let d = two([0.0, 2.0], [1.0, 3.0], [0.0, 0.0], [1.0, -1.0]);
        let a = cluster_aggregates(&d, 0, 1, 0.0).unwrap();
        assert_eq!((a.mass, a.acceleration, a.velocity, a.position), (4.0, -0.5, 0.0, 1.5));
        let s = 2f64.sqrt();
        let a = cluster_aggregates(&d, 0, 1, s).unwrap();
        // direct summation oracle: (1·√2 + 3·(−√2)) / 4
        let oracle = (1.0 * s + 3.0 * (-s)) / 4.0;
        assert!((a.velocity - oracle).abs() < 1e-15);
        assert!((a.velocity + s / 2.0).abs() < 1e-15);
    }

    #[test]
    fn aggregates_reject_bad_ranges() {
        let d = two([0.0, 2.0], [1.0, 3.0], [0.0, 0.0], [1.0, -1.0]);
        assert!(matches!(cluster_aggregates(&d, 1, 0, 0.0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(cluster_aggregates(&d, 0, 2, 0.0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn kahan_and_naive_agree_on_small_sums() {
        let d = InitialData::new(
            vec![0.0, 1.0, 2.5, 4.0],
            vec![0.3, 2.0, 1.1, 7.0],
            vec![1.0, -0.5, 0.25, 0.0],
            vec![2.0, 1.0, 0.0, -3.0],
        )
        .unwrap();
        let a = cluster_aggregates_with(&d, 0, 3, 1.3, Summation::Naive).unwrap();
        let b = cluster_aggregates_with(&d, 0, 3, 1.3, Summation::Kahan).unwrap();
        assert!((a.position - b.position).abs() < 1e-14);
        assert!((a.velocity - b.velocity).abs() < 1e-14);
    }

    #[test]
    fn partition_validation_and_lookup() {
        let d = InitialData::new(vec![0.0, 1.0, 2.0], vec![1.0; 3], vec![0.0; 3], vec![0.0; 3]).unwrap();
        let p = Partition::from_ranges(&d, &[(0, 1), (2, 2)], 0.0).unwrap();
        assert_eq!(p.cluster_of(1), Some(0));
        assert_eq!(p.cluster_of(2), Some(1));
        assert_eq!(p.cluster_of(3), None);
        assert!(Partition::from_ranges(&d, &[(0, 0), (2, 2)], 0.0).is_err());
        assert!(Partition::from_ranges(&d, &[(0, 1)], 0.0).is_err());
        assert_eq!(format_ranges(&p.ranges()), "0-1|2-2");
    }
}
