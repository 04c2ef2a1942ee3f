use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::Error;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// `(1 − s²)³` on `|s| < 1`.
    Bump,
    /// Cubic B-spline on `|s| < 2`.
    Spline,
    /// `cos²(πs/2)` on `|s| < 1`.
    Cosine,
    Custom { f: RealFn, df: RealFn },
}

/// A C¹ function with compact support, given together with its derivative.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    shape: Shape,
    center: f64,
    scale: f64,
    support: (f64, f64),
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

impl TestFunction {
    /// Smooth bump `(1 − s²)³`, `s = (x − center)/radius`.
    pub fn bump(center: f64, radius: f64) -> Self {
        Self {
            name: format!("bump:{center}:{radius}"),
            shape: Shape::Bump,
            center,
            scale: radius,
            support: (center - radius, center + radius),
        }
    }

    /// Cubic B-spline with knot spacing `h`, supported on `center ± 2h`.
    pub fn spline(center: f64, h: f64) -> Self {
        Self {
            name: format!("spline:{center}:{h}"),
            shape: Shape::Spline,
            center,
            scale: h,
            support: (center - 2.0 * h, center + 2.0 * h),
        }
    }

    /// `cos²(π s / 2)`, `s = (x − center)/radius`.
    pub fn cosine(center: f64, radius: f64) -> Self {
        Self {
            name: format!("cosine:{center}:{radius}"),
            shape: Shape::Cosine,
            center,
            scale: radius,
            support: (center - radius, center + radius),
        }
    }

    /// Arbitrary function with its derivative. `f` and `df` must vanish
    /// outside `support`; an unbounded support is allowed for bounded `g`
    /// in limit checks.
    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
    ) -> Self {
        Self {
            name: name.into(),
            shape: Shape::Custom {
                f: Arc::new(f),
                df: Arc::new(df),
            },
            center: 0.0,
            scale: 1.0,
            support,
        }
    }

    /// The three built-in shapes, centered at `center` with a common half-width.
    pub fn builtins(center: f64, half_width: f64) -> [TestFunction; 3] {
        [
            Self::bump(center, half_width),
            Self::spline(center, 0.5 * half_width),
            Self::cosine(center, half_width),
        ]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Points where `f` may fail to be C², i.e. where `f′` may have a kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Spline => (-2..=2).map(|k| self.center + k as f64 * self.scale).collect(),
            _ => [self.support.0, self.support.1]
                .into_iter()
                .filter(|x| x.is_finite())
                .collect(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.scale;
        match &self.shape {
            Shape::Bump => {
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - s * s).powi(3)
                }
            }
            Shape::Spline => {
                let a = s.abs();
                if a >= 2.0 {
                    0.0
                } else if a >= 1.0 {
                    (2.0 - a).powi(3) / 6.0
                } else {
                    2.0 / 3.0 - a * a + 0.5 * a * a * a
                }
            }
            Shape::Cosine => {
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    (0.5 * std::f64::consts::PI * s).cos().powi(2)
                }
            }
            Shape::Custom { f, .. } => f(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.scale;
        let ds = 1.0 / self.scale;
        match &self.shape {
            Shape::Bump => {
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    -6.0 * s * (1.0 - s * s).powi(2) * ds
                }
            }
            Shape::Spline => {
                let a = s.abs();
                let sign = s.signum();
                if a >= 2.0 {
                    0.0
                } else if a >= 1.0 {
                    -0.5 * (2.0 - a).powi(2) * sign * ds
                } else {
                    (-2.0 * a + 1.5 * a * a) * sign * ds
                }
            }
            Shape::Cosine => {
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    -0.5 * std::f64::consts::PI * (std::f64::consts::PI * s).sin() * ds
                }
            }
            Shape::Custom { df, .. } => df(x),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    /// Parses `bump:<center>:<radius>`, `spline:<center>:<h>` or `cosine:<center>:<radius>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::InvalidArgument(format!("invalid test function `{s}`, expected kind:center:width"));
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let center: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let width: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        if parts.next().is_some() || !(width > 0.0) || !center.is_finite() {
            return Err(bad());
        }
        match kind.trim() {
            "bump" => Ok(Self::bump(center, width)),
            "spline" => Ok(Self::spline(center, width)),
            "cosine" => Ok(Self::cosine(center, width)),
            _ => Err(bad()),
        }
    }
}
