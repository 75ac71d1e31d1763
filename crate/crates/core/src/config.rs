//! Run configuration: TOML file plus dotted-key overrides.
//!
//! Values resolve as built-in defaults, then the config file, then
//! `--section.key value` overrides. Unknown keys are errors at every level.

use std::path::Path;

use crate::denoise::DenoiseOptions;
use crate::error::{Error, Result};
use crate::extend::ExtensionOptions;
use crate::models::{DimerSpec, NoiseSpec, SshSpec, TimeGrid};
use crate::poles::SINGULAR_TOL;
use crate::spectrum::DEFAULT_GRID_POINTS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Dimer,
    Ssh,
}

/// Which generator to run and on what time grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub dt: f64,
    /// Number of samples, `t = 0 .. (n - 1) dt`.
    pub n: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { kind: ModelKind::Dimer, dt: 0.1, n: 101 }
    }
}

impl ModelConfig {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.dt, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PoleOptions {
    /// Number of poles; estimated from the spectrum of the Gramian when absent.
    pub rank: Option<usize>,
    pub singular_tol: f64,
}

impl Default for PoleOptions {
    fn default() -> Self {
        Self { rank: None, singular_tol: SINGULAR_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumOptions {
    pub tau: f64,
    pub points: usize,
    /// Grid bounds; `-pi/dt` and `pi/dt` when absent.
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    /// Positivity tolerance; the truncation-tail bound when absent.
    pub tol: Option<f64>,
    /// Number of dominant peaks to report.
    pub peaks: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { tau: 100.0, points: DEFAULT_GRID_POINTS, omega_min: None, omega_max: None, tol: None, peaks: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Noise seed; takes precedence over `noise.seed`.
    pub seed: Option<u64>,
    pub model: ModelConfig,
    pub dimer: DimerSpec,
    pub ssh: SshSpec,
    pub noise: NoiseSpec,
    pub denoise: DenoiseOptions,
    pub extend: ExtensionOptions,
    pub poles: PoleOptions,
    pub spectrum: SpectrumOptions,
}

impl RunConfig {
    /// Resolves defaults, an optional TOML file, and `(key, value)`
    /// overrides in that order.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut root = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>().map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for (key, raw) in overrides {
            set_dotted(&mut root, key, parse_scalar(raw))?;
        }
        let cfg: RunConfig = toml::Value::Table(root).try_into().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        Ok(cfg)
    }

    /// Noise settings with the top-level seed applied.
    pub fn effective_noise(&self) -> NoiseSpec {
        NoiseSpec { seed: self.seed.unwrap_or(self.noise.seed), ..self.noise }
    }

    /// Every leaf key, dotted, in declaration order.
    pub fn keys() -> Vec<String> {
        let value = toml::Value::try_from(Self::fully_specified()).expect("config serializes");
        let mut out = Vec::new();
        leaf_keys(&value, "", &mut out);
        out
    }

    /// Defaults with every optional field filled, so serialization lists
    /// all keys.
    fn fully_specified() -> Self {
        let mut c = Self { seed: Some(1), ..Self::default() };
        c.denoise.conv_tol = Some(1.0);
        c.denoise.f0_known = Some(1.0);
        c.denoise.penalty.bracket = Some(1.0);
        c.denoise.penalty.cost_tol = Some(1.0);
        c.poles.rank = Some(1);
        c.spectrum.omega_min = Some(-1.0);
        c.spectrum.omega_max = Some(1.0);
        c.spectrum.tol = Some(1.0);
        c
    }

    /// One section as flat `key: value` pairs, e.g. for metadata files.
    pub fn section_entries(&self, section: &str) -> Vec<(String, String)> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = Vec::new();
        if let Some(v) = value.get(section) {
            flatten(v, section, &mut out);
        }
        out
    }
}

fn leaf_keys(v: &toml::Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        toml::Value::Table(t) => {
            for (k, child) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                leaf_keys(child, &key, out);
            }
        }
        _ => out.push(prefix.to_string()),
    }
}

fn flatten(v: &toml::Value, prefix: &str, out: &mut Vec<(String, String)>) {
    match v {
        toml::Value::Table(t) => {
            for (k, child) in t {
                flatten(child, &format!("{prefix}.{k}"), out);
            }
        }
        toml::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// A TOML literal when `raw` is one, otherwise a string.
fn parse_scalar(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_dotted(root: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("malformed key `{key}`")));
    }
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| Error::Parse(format!("`{part}` in `{key}` is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::DenoiseStrategy;
    use crate::extend::ExtensionStrategy;
    use std::io::Write;

    fn over(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults() {
        let c = RunConfig::load(None, &[]).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.denoise.max_iter, 500);
        assert_eq!(c.extend.grid, 41);
        assert_eq!(c.spectrum.tau, 100.0);
    }

    #[test]
    fn file_then_flags() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "seed = 7\n[denoise]\nmax_iter = 50\nstrategy = \"penalty\"\n[extend]\nstrategy = \"central\"").unwrap();
        let c = RunConfig::load(Some(f.path()), &over(&[("denoise.max_iter", "60"), ("ssh.delta", "0")])).unwrap();
        assert_eq!(c.denoise.max_iter, 60);
        assert_eq!(c.denoise.strategy, DenoiseStrategy::Penalty);
        assert_eq!(c.extend.strategy, ExtensionStrategy::Central);
        assert_eq!(c.ssh.delta, 0.0);
        assert_eq!(c.effective_noise().seed, 7);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::load(None, &over(&[("denoise.max_iters", "5")])).is_err());
        assert!(RunConfig::load(None, &over(&[("nosuch", "5")])).is_err());
        assert!(RunConfig::load(None, &over(&[("denoise.penalty.foo", "5")])).is_err());
        assert!(RunConfig::load(None, &over(&[("extend.strategy", "bogus")])).is_err());
        assert!(RunConfig::load(None, &over(&[("denoise.max_iter", "many")])).is_err());
        assert!(RunConfig::load(None, &over(&[("model..n", "5")])).is_err());
    }

    #[test]
    fn key_list_covers_every_field() {
        let keys = RunConfig::keys();
        for k in ["seed", "model.kind", "dimer.u", "ssh.convention", "noise.target", "denoise.f0_known", "denoise.penalty.line_search", "extend.singular_tol", "poles.rank", "spectrum.omega_max"] {
            assert!(keys.iter().any(|x| x == k), "{k}");
        }
        // Every listed key is accepted as an override.
        for k in &keys {
            let v = toml::Value::try_from(RunConfig::fully_specified()).unwrap();
            let mut cur = &v;
            for p in k.split('.') {
                cur = cur.get(p).unwrap();
            }
            let raw = match cur {
                toml::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            RunConfig::load(None, &over(&[(k, &raw)])).unwrap_or_else(|e| panic!("{k} = {raw}: {e}"));
        }
    }

    #[test]
    fn section_entries_flatten() {
        let e = RunConfig::default().section_entries("dimer");
        assert!(e.contains(&("dimer.u".to_string(), "5.0".to_string())));
        assert!(e.contains(&("dimer.spin".to_string(), "up".to_string())));
    }
}
