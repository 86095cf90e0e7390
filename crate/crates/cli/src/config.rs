//! Run configuration: defaults, then `ROTORLAB_SEED`, then a key=value
//! file, then command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rotorlab::suite::SuiteConfig;

pub const SEED_ENV: &str = "ROTORLAB_SEED";

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mass: f64,
    pub ell: f64,
    pub nu: f64,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    /// Where the report document goes; stdout when unset.
    pub report: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let s = SuiteConfig::default();
        RunConfig {
            mass: s.mass,
            ell: s.ell,
            nu: s.nu,
            seed: s.seed,
            tolerances: BTreeMap::new(),
            report: None,
        }
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .with_context(|| format!("`{key}` expects a number, got `{value}`"))
}

impl RunConfig {
    /// Defaults with the seed taken from the environment when set.
    pub fn from_env(seed_var: Option<String>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(s) = seed_var {
            cfg.set("seed", &s).with_context(|| format!("in {SEED_ENV}"))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "mass" | "M" => self.mass = number(key, value)?,
            "ell" | "l" => self.ell = number(key, value)?,
            "nu" => self.nu = number(key, value)?,
            "seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .with_context(|| format!("`seed` expects a non-negative integer, got `{value}`"))?
            }
            "report" | "output" => self.report = Some(PathBuf::from(value.trim())),
            _ => match key.strip_prefix("tol.") {
                Some(name) if !name.is_empty() => {
                    self.tolerances.insert(name.to_string(), number(key, value)?);
                }
                _ => bail!("unknown configuration key `{key}`"),
            },
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`, got `{raw}`", n + 1);
            };
            self.set(k, v).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        self.apply_text(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            bail!("mass must be positive, got {}", self.mass);
        }
        if !(self.ell > 0.0 && self.ell.is_finite()) {
            bail!("length must be positive, got {}", self.ell);
        }
        if !self.nu.is_finite() {
            bail!("nu must be finite");
        }
        Ok(())
    }

    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            mass: self.mass,
            ell: self.ell,
            nu: self.nu,
            seed: self.seed,
            tolerances: self.tolerances.clone(),
        }
    }

    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}
