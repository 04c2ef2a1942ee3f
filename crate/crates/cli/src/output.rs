use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// Decimal rendering with 17 significant digits, enough to round-trip binary64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes CSV tables and a manifest listing them into one directory.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, usize)>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn table<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        w.write_record(header)?;
        let mut count = 0;
        for row in rows {
            w.write_record(row)?;
            count += 1;
        }
        w.flush()?;
        self.files.push((name.to_string(), count));
        Ok(())
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push((name.to_string(), 1));
        Ok(())
    }

    /// Writes `manifest.json`. Contains no timestamps or paths so that reruns
    /// are byte-identical.
    pub fn finish(self, command: &str, parameters: Value, verdict: &str) -> Result<()> {
        let files: Vec<Value> = self
            .files
            .iter()
            .map(|(name, rows)| json!({"file": name, "rows": rows}))
            .collect();
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "parameters": parameters,
            "verdict": verdict,
            "files": files,
        });
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2f64.sqrt(), 1e-300, 6.02214076e23] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
