//! Quadratic trajectories and their crossing times.

use crate::error::{Error, Result};

/// `t ↦ c0 + c1·t + (c2/2)·t²`; `c2` is the acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPath {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl QuadraticPath {
    pub const fn new(c0: f64, c1: f64, c2: f64) -> Self {
        Self { c0, c1, c2 }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.c0 + t * (self.c1 + 0.5 * self.c2 * t)
    }

    #[inline]
    pub fn velocity(&self, t: f64) -> f64 {
        self.c1 + self.c2 * t
    }

    #[inline]
    pub fn acceleration(&self) -> f64 {
        self.c2
    }

    /// Coefficient-wise difference `self − other`.
    pub fn minus(&self, other: &QuadraticPath) -> QuadraticPath {
        QuadraticPath::new(self.c0 - other.c0, self.c1 - other.c1, self.c2 - other.c2)
    }
}

/// A crossing of two paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Meet {
    pub time: f64,
    /// Double root: the paths touch without crossing.
    pub tangent: bool,
}

/// Real roots of `a·t² + b·t + c` in ascending order, with a tangency flag.
///
/// Coefficients within `rel` of cancellation are treated as zero, so that
/// equal accelerations fall back to the linear case. Returns `None` when all
/// three coefficients vanish.
fn real_roots(p: &QuadraticPath, q: &QuadraticPath, rel: f64, abs: f64) -> Option<Vec<Meet>> {
    let d = p.minus(q);
    let a = 0.5 * d.c2;
    let b = d.c1;
    let c = d.c0;
    let a_zero = d.c2.abs() <= rel * (p.c2.abs() + q.c2.abs());
    let b_zero = b.abs() <= rel * (p.c1.abs() + q.c1.abs());
    let c_zero = c.abs() <= abs + rel * (p.c0.abs() + q.c0.abs());

    if a_zero {
        if b_zero {
            return if c_zero { None } else { Some(Vec::new()) };
        }
        return Some(vec![Meet { time: -c / b, tangent: false }]);
    }

    let disc = b * b - 4.0 * a * c;
    let disc_scale = 16.0 * f64::EPSILON * (b * b + 4.0 * (a * c).abs());
    if disc < -disc_scale {
        return Some(Vec::new());
    }
    if disc <= disc_scale {
        return Some(vec![Meet { time: -b / (2.0 * a), tangent: true }]);
    }
    // Citardauq form for the root that would suffer cancellation.
    let sq = disc.sqrt();
    let qq = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if qq == 0.0 {
        (0.0, 0.0)
    } else {
        (qq / a, c / qq)
    };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    Some(vec![
        Meet { time: lo, tangent: false },
        Meet { time: hi, tangent: false },
    ])
}

/// All real crossings of `p` and `q` strictly after `after`, ascending.
pub fn quadratic_meet_times(p: &QuadraticPath, q: &QuadraticPath, after: f64) -> Result<Vec<Meet>> {
    quadratic_meet_times_with(p, q, after, 1e-12, 0.0)
}

pub fn quadratic_meet_times_with(
    p: &QuadraticPath,
    q: &QuadraticPath,
    after: f64,
    rel: f64,
    abs: f64,
) -> Result<Vec<Meet>> {
    let roots = real_roots(p, q, rel, abs).ok_or(Error::IdenticalPaths)?;
    Ok(roots.into_iter().filter(|m| m.time > after).collect())
}

/// Checks "Q1(s) > Q2(s) for all s > t1" by root analysis, given
/// `Q1 ≢ Q2`, `Q1'' ≥ Q2''`, `t0 < t1`, `Q1(t0) ≤ Q2(t0)` and `Q1(t1) ≥ Q2(t1)`.
///
/// Under those preconditions the answer is always `true`; the function exists
/// so that the claim can be exercised against arbitrary inputs. The two value
/// comparisons accept a deficit of `1e-9·(1 + |Q2|)`, the accuracy of
/// [`quadratic_meet_times`], so a computed crossing time can serve as `t1`.
pub fn lemma_quadratic_dominance(q1: &QuadraticPath, q2: &QuadraticPath, t0: f64, t1: f64) -> Result<bool> {
    if q1 == q2 {
        return Err(Error::PreconditionViolated("Q1 and Q2 are identical".into()));
    }
    if q1.c2 < q2.c2 {
        return Err(Error::PreconditionViolated(format!(
            "second derivatives not ordered: {} < {}",
            q1.c2, q2.c2
        )));
    }
    if !(t0 < t1) {
        return Err(Error::PreconditionViolated(format!("t0 = {t0} is not below t1 = {t1}")));
    }
    let slack = |t: f64| 1e-9 * (1.0 + q2.eval(t).abs());
    if q1.eval(t0) > q2.eval(t0) + slack(t0) {
        return Err(Error::PreconditionViolated("Q1(t0) > Q2(t0)".into()));
    }
    if q1.eval(t1) < q2.eval(t1) - slack(t1) {
        return Err(Error::PreconditionViolated("Q1(t1) < Q2(t1)".into()));
    }

    // A root sitting at t1 itself may come back perturbed by rounding.
    let guard = t1 + 1e-9 * (1.0 + t1.abs());
    let roots = match real_roots(q1, q2, 0.0, 0.0) {
        Some(r) => r,
        None => return Ok(false),
    };
    if roots.iter().any(|m| m.time > guard) {
        return Ok(false);
    }
    let probe = roots
        .iter()
        .map(|m| m.time)
        .fold(guard, f64::max)
        + 1.0;
    Ok(q1.eval(probe) > q2.eval(probe))
}
