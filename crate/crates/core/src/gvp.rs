//! Cluster reconstruction from the generalized variational principle.
//!
//! At a fixed time `t`, every initial particle is moved freely,
//! `η(t) = η + t·u₀(η) + ½t²·γ₀(η)`, and clusters are characterized by
//! inequalities between mass-weighted averages of `η(t)` over index
//! intervals. For non-increasing initial accelerations this reproduces the
//! partition of the sticky dynamics without simulating it.

use crate::data::{InitialData, Partition};
use crate::dynamics::simulate;
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// Prefix sums of `m`, `m·x`, `m·u₀`, `m·γ₀` for O(1) interval averages of `η(t)`.
#[derive(Debug, Clone)]
pub struct GvpFunctional<'a> {
    data: &'a InitialData,
    t: f64,
    tol: Tolerances,
    mass: Vec<f64>,
    moment: Vec<f64>,
}

impl<'a> GvpFunctional<'a> {
    /// Builds the functional at time `t`. Admissibility is not required here;
    /// it is enforced by [`clusters_from_gvp`].
    pub fn new(data: &'a InitialData, t: f64, tol: Tolerances) -> Self {
        let n = data.len();
        let mut mass = Vec::with_capacity(n + 1);
        let mut moment = Vec::with_capacity(n + 1);
        mass.push(0.0);
        moment.push(0.0);
        let (mut sm, mut sx, mut sv, mut sa) = (0.0, 0.0, 0.0, 0.0);
        for p in data.particles() {
            sm += p.m;
            sx += p.m * p.x;
            sv += p.m * p.v;
            sa += p.m * p.theta;
            mass.push(sm);
            // η(t) moment assembled from the separate prefix sums
            moment.push(sx + t * sv + 0.5 * t * t * sa);
        }
        Self {
            data,
            t,
            tol,
            mass,
            moment,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Mass-weighted average of `η(t)` over indices `first..=last`.
    pub fn average(&self, first: usize, last: usize) -> Result<f64> {
        self.data.check_range(first, last)?;
        Ok(self.avg(first, last))
    }

    #[inline]
    fn avg(&self, first: usize, last: usize) -> f64 {
        (self.moment[last + 1] - self.moment[first]) / (self.mass[last + 1] - self.mass[first])
    }

    fn check_index(&self, i: usize) -> Result<()> {
        self.data.check_range(i, i)
    }

    /// Compares `[first, split−1]` against `[split, last]`: true iff the left
    /// average is at least the right average.
    pub fn interior_condition(&self, first: usize, last: usize, split: usize) -> Result<bool> {
        if !(first < split && split <= last) {
            return Err(Error::IndexOutOfRange {
                first,
                last: split,
                len: self.len(),
            });
        }
        self.data.check_range(first, last)?;
        Ok(self.tol.at_least(self.avg(first, split - 1), self.avg(split, last)))
    }

    /// Left-endpoint test at index `alpha`: every average over `[j, α−1]`
    /// lies strictly below every average over `[α, k]`.
    pub fn is_left_endpoint(&self, alpha: usize) -> Result<bool> {
        self.check_index(alpha)?;
        if alpha == 0 {
            return Ok(true);
        }
        let left = (0..alpha)
            .map(|j| self.avg(j, alpha - 1))
            .fold(f64::NEG_INFINITY, f64::max);
        let right = (alpha..self.len())
            .map(|k| self.avg(alpha, k))
            .fold(f64::INFINITY, f64::min);
        Ok(self.tol.strictly_less(left, right))
    }

    /// Right-endpoint test at index `beta`: every average over `[j, β]`
    /// lies strictly below every average over `[β+1, k]`.
    pub fn is_right_endpoint(&self, beta: usize) -> Result<bool> {
        self.check_index(beta)?;
        let n = self.len();
        if beta + 1 == n {
            return Ok(true);
        }
        let left = (0..=beta)
            .map(|j| self.avg(j, beta))
            .fold(f64::NEG_INFINITY, f64::max);
        let right = (beta + 1..n)
            .map(|k| self.avg(beta + 1, k))
            .fold(f64::INFINITY, f64::min);
        Ok(self.tol.strictly_less(left, right))
    }

    pub fn left_endpoints(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.is_left_endpoint(i).expect("index in range"))
            .collect()
    }

    pub fn right_endpoints(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.is_right_endpoint(i).expect("index in range"))
            .collect()
    }

    /// Checks a candidate cluster `[first, last]`: both endpoint tests pass,
    /// every interior split satisfies the interior condition and no interior
    /// index passes either endpoint test.
    pub fn certifies(&self, first: usize, last: usize) -> Result<bool> {
        self.data.check_range(first, last)?;
        if !self.is_left_endpoint(first)? || !self.is_right_endpoint(last)? {
            return Ok(false);
        }
        for y in first + 1..=last {
            if !self.interior_condition(first, last, y)? {
                return Ok(false);
            }
            if self.is_left_endpoint(y)? || self.is_right_endpoint(y - 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Pairs sorted left and right endpoints into index ranges, requiring
/// `α₁ = 0 ≤ β₁ < α₂ = β₁ + 1 ≤ β₂ < … ≤ β_k = N − 1`.
fn pair_endpoints(lefts: &[usize], rights: &[usize], n: usize, t: f64) -> Result<Vec<(usize, usize)>> {
    let fail = |detail: String| Error::InconsistentEndpoints { t, detail };
    if lefts.len() != rights.len() {
        return Err(fail(format!(
            "{} left endpoints {:?} vs {} right endpoints {:?}",
            lefts.len(),
            lefts,
            rights.len(),
            rights
        )));
    }
    let mut expected = 0;
    let mut out = Vec::with_capacity(lefts.len());
    for (&a, &b) in lefts.iter().zip(rights) {
        if a != expected || b < a {
            return Err(fail(format!("left endpoints {lefts:?} and right endpoints {rights:?} do not interleave")));
        }
        out.push((a, b));
        expected = b + 1;
    }
    if expected != n {
        return Err(fail(format!("endpoints cover 0..{expected}, expected 0..{n}")));
    }
    Ok(out)
}

/// The cluster partition at time `t`, built from endpoint tests alone.
///
/// The caller must not evaluate exactly at a shock time, where strict
/// inequalities degenerate; an inconsistent endpoint set is reported as an
/// error rather than repaired.
pub fn clusters_from_gvp(data: &InitialData, t: f64, tol: &Tolerances) -> Result<Partition> {
    if let Some(err) = data.admissibility_error() {
        return Err(err);
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    let f = GvpFunctional::new(data, t, *tol);
    let ranges = pair_endpoints(&f.left_endpoints(), &f.right_endpoints(), data.len(), t)?;
    Partition::from_ranges(data, &ranges, t)
}

/// Partition from the classical principle for unaccelerated particles,
/// evaluated by direct summation of `x + t·u₀` (accelerations ignored).
pub fn classical_partition(data: &InitialData, t: f64, tol: &Tolerances) -> Result<Partition> {
    let n = data.len();
    let avg = |a: usize, b: usize| {
        let (mut m, mut s) = (0.0, 0.0);
        for p in data.particles().skip(a).take(b + 1 - a) {
            m += p.m;
            s += p.m * (p.x + t * p.v);
        }
        s / m
    };
    let left_ok = |alpha: usize| {
        (0..alpha).all(|y1| (alpha..n).all(|y2| tol.strictly_less(avg(y1, alpha - 1), avg(alpha, y2))))
    };
    let right_ok = |beta: usize| {
        (0..=beta).all(|y1| (beta + 1..n).all(|y2| tol.strictly_less(avg(y1, beta), avg(beta + 1, y2))))
    };
    let lefts: Vec<usize> = (0..n).filter(|&a| left_ok(a)).collect();
    let rights: Vec<usize> = (0..n).filter(|&b| right_ok(b)).collect();
    let ranges = pair_endpoints(&lefts, &rights, n, t)?;
    Partition::from_ranges(data, &ranges, t)
}

/// Outcome of comparing the variational partition with the simulated one at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct GvpComparison {
    pub t: f64,
    pub simulated: Vec<(usize, usize)>,
    /// Ranges from the endpoint tests, or the error message when the endpoint
    /// set was inconsistent.
    pub variational: std::result::Result<Vec<(usize, usize)>, String>,
}

impl GvpComparison {
    pub fn matches(&self) -> bool {
        self.variational.as_ref().is_ok_and(|r| *r == self.simulated)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GvpReport {
    pub comparisons: Vec<GvpComparison>,
    /// Consecutive equal initial accelerations are present.
    pub acceleration_ties: bool,
}

impl GvpReport {
    pub fn mismatches(&self) -> impl Iterator<Item = &GvpComparison> {
        self.comparisons.iter().filter(|c| !c.matches())
    }

    pub fn all_match(&self) -> bool {
        self.mismatches().next().is_none()
    }
}

/// Compares [`clusters_from_gvp`] with the simulated partition at each time.
pub fn gvp_equivalence_check(data: &InitialData, times: &[f64], tol: &Tolerances) -> Result<GvpReport> {
    if let Some(err) = data.admissibility_error() {
        return Err(err);
    }
    let horizon = times.iter().copied().fold(0.0, f64::max).max(1.0);
    let timeline = simulate(data, horizon, tol)?;
    let comparisons = times
        .iter()
        .map(|&t| {
            let simulated = timeline.partition_at(t)?.ranges();
            let variational = clusters_from_gvp(data, t, tol)
                .map(|p| p.ranges())
                .map_err(|e| e.to_string());
            Ok(GvpComparison { t, simulated, variational })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GvpReport {
        comparisons,
        acceleration_ties: data.accelerations().windows(2).any(|w| w[0] == w[1]),
    })
}
