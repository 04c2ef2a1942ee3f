//! Instance files: a JSON object with a `particles` array.
//!
//! ```json
//! {
//!   "particles": [
//!     {"x": 0.0, "m": 1.0, "v": 1.0, "theta": 0.0},
//!     {"x": 1.0, "m": 1.0, "v": 0.0, "theta": 0.0}
//!   ],
//!   "t_end": 3.0,
//!   "tolerances": {"abs": 1e-9}
//! }
//! ```

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sticky_core::{InitialData, Particle, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleEntry {
    pub x: f64,
    pub m: f64,
    pub v: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, mut tol: Tolerances) -> Tolerances {
        if let Some(abs) = self.abs {
            tol.abs = abs;
        }
        if let Some(rel) = self.rel {
            tol.rel = rel;
        }
        if let Some(event) = self.event {
            tol.event = event;
        }
        tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub particles: Vec<ParticleEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceOverrides>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn from_data(data: &InitialData) -> Self {
        Self {
            particles: data
                .particles()
                .map(|p| ParticleEntry {
                    x: p.x,
                    m: p.m,
                    v: p.v,
                    theta: p.theta,
                })
                .collect(),
            t_end: None,
            seed: None,
            tolerances: None,
        }
    }

    pub fn to_data(&self) -> Result<InitialData> {
        let particles: Vec<Particle> = self
            .particles
            .iter()
            .map(|p| Particle {
                x: p.x,
                m: p.m,
                v: p.v,
                theta: p.theta,
            })
            .collect();
        Ok(InitialData::from_particles(&particles)?)
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances
            .as_ref()
            .map_or_else(Tolerances::default, |o| o.apply(Tolerances::default()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"particles":[{"x":0,"m":1,"v":1,"theta":0},{"x":1,"m":2,"v":0,"theta":-0.1}],"t_end":3}"#;
        let inst = InstanceFile::parse(text).unwrap();
        let data = inst.to_data().unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(inst.t_end, Some(3.0));
        let again = InstanceFile::parse(&InstanceFile::from_data(&data).to_json()).unwrap();
        assert_eq!(again.to_data().unwrap(), data);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let text = "{\n  \"particles\": [],\n  \"colour\": 1\n}";
        let err = InstanceFile::parse(text).unwrap_err().to_string();
        assert!(err.contains("unknown field") && err.contains("line 3"), "{err}");
    }

    #[test]
    fn overrides_apply_per_field() {
        let o = ToleranceOverrides {
            rel: Some(1e-10),
            ..Default::default()
        };
        let t = o.apply(Tolerances::default());
        assert_eq!(t.rel, 1e-10);
        assert_eq!(t.abs, Tolerances::default().abs);
    }
}
