//! Comparison tolerances shared by every module.

/// Absolute/relative tolerances used for floating-point equality tests.
///
/// Two reals `a`, `b` are considered equal when
/// `|a - b| <= abs + rel * max(|a|, |b|)`. Simultaneous collisions are grouped
/// when their times differ by at most `event * (1 + t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    pub event: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            abs: 1e-9,
            rel: 1e-12,
            event: 1e-9,
        }
    }
}

impl Tolerances {
    /// Allowed deviation when comparing quantities of magnitude `scale`.
    #[inline]
    pub fn slack(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }

    #[inline]
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.slack(a.abs().max(b.abs()))
    }

    /// Strict `a < b` outside of the tolerance band.
    #[inline]
    pub fn strictly_less(&self, a: f64, b: f64) -> bool {
        a < b - self.slack(a.abs().max(b.abs()))
    }

    /// `a >= b` allowing for the tolerance band.
    #[inline]
    pub fn at_least(&self, a: f64, b: f64) -> bool {
        a >= b - self.slack(a.abs().max(b.abs()))
    }

    /// Width of the window around `t` inside which collisions are simultaneous.
    #[inline]
    pub fn event_window(&self, t: f64) -> f64 {
        self.event * (1.0 + t.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strictness_treats_band_as_equality() {
        let tol = Tolerances::default();
        assert!(!tol.strictly_less(1.0, 1.0 + 5e-10));
        assert!(tol.strictly_less(1.0, 1.0 + 5e-9));
        assert!(tol.at_least(1.0, 1.0 + 5e-10));
        assert!(!tol.at_least(1.0, 1.0 + 5e-9));
        assert!(tol.close(1e6, 1e6 + 1e-7));
    }
}
