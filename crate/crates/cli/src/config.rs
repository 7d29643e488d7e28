//! JSON run configuration. Every section and field is optional; missing
//! values take the defaults below and unknown keys are rejected.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use qfric_core::moyal::{Profile, SymbolSpec};
use qfric_core::params::HBAR_PRESETS;
use qfric_core::ModelParams;
use qfric_sweep::plan::{GAMMA_MAX, GAMMA_MIN};
use qfric_sweep::{Budgets, Format, SweepPlan};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "QFRIC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "qfric-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Scaled kick strength `K = k hbar_eff`.
    pub k: f64,
    pub gamma: f64,
    pub hbar_eff: f64,
    pub a: f64,
    pub phi: f64,
    pub diffusion: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            k: 4.56,
            gamma: 0.56,
            hbar_eff: 0.137,
            a: 0.5,
            phi: FRAC_PI_2,
            diffusion: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalConfig {
    pub noisy: bool,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self { noisy: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub k_range: [f64; 2],
    pub k_count: usize,
    pub gamma_range: [f64; 2],
    pub gamma_count: usize,
    pub hbar_list: Vec<f64>,
    pub workers: usize,
    /// Defaults to `sweep.ckpt` in the output directory.
    pub checkpoint: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            k_range: [0.5, 10.0],
            k_count: 20,
            gamma_range: [GAMMA_MIN, GAMMA_MAX],
            gamma_count: 20,
            hbar_list: vec![0.137],
            workers: 1,
            checkpoint: None,
            formats: vec![Format::Csv, Format::Json, Format::Pgm],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Linear,
    PowerLaw { exponent: f64 },
}

/// Friction symbol checked by `verify` in addition to the built-in checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolConfig {
    pub profile: ProfileConfig,
    pub l: f64,
    pub hbar: f64,
    pub nu: f64,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        Self {
            profile: ProfileConfig::Linear,
            l: 1.0 / (2.0 * PI),
            hbar: 0.01,
            nu: 0.3,
        }
    }
}

impl SymbolConfig {
    pub fn spec(&self) -> Result<SymbolSpec, CliError> {
        let profile = match self.profile {
            ProfileConfig::Linear => Profile::Linear,
            ProfileConfig::PowerLaw { exponent } => Profile::PowerLaw { exponent },
        };
        SymbolSpec {
            l: self.l,
            profile,
            hbar: self.hbar,
            nu: self.nu,
            diffusion_d: 0.0,
        }
        .validated()
        .map_err(|e| CliError::config("symbol", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Also write the Wigner function of the final quantum state.
    pub wigner: bool,
    /// Also write the final density matrix as a binary snapshot.
    pub snapshot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            wigner: false,
            snapshot: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verbosity {
    Quiet,
    #[default]
    Normal,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub budgets: Budgets,
    pub classical: ClassicalConfig,
    pub sweep: SweepConfig,
    pub symbol: Option<SymbolConfig>,
    pub output: OutputConfig,
    pub seed: u64,
    pub verbosity: Verbosity,
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub hbar_preset: Option<f64>,
    pub quiet: bool,
}

/// Accepts a preset value (`0.137`) or its index (`0`, `1`, `2`).
pub fn parse_hbar_preset(s: &str) -> Result<f64, String> {
    let presets = HBAR_PRESETS.map(|h| h.to_string()).join(", ");
    if let Ok(i) = s.parse::<usize>() {
        return HBAR_PRESETS.get(i).copied().ok_or_else(|| format!("preset index {i} out of range (presets: {presets})"));
    }
    let v: f64 = s.parse().map_err(|_| format!("expected one of {presets} or an index"))?;
    HBAR_PRESETS
        .iter()
        .copied()
        .find(|h| (h - v).abs() < 1e-12)
        .ok_or_else(|| format!("{v} is not a preset (presets: {presets})"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Applies flags, fills the output directory from the environment if
    /// neither flag nor file sets it, and validates.
    pub fn resolve(mut self, o: &Overrides, env_out_dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(w) = o.workers {
            self.sweep.workers = w;
        }
        if let Some(dir) = &o.out_dir {
            self.output.dir = Some(dir.clone());
        }
        if self.output.dir.is_none() {
            self.output.dir = Some(env_out_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)));
        }
        if let Some(f) = &o.formats {
            self.sweep.formats = f.clone();
        }
        if let Some(h) = o.hbar_preset {
            self.model.hbar_eff = h;
            self.sweep.hbar_list = vec![h];
        }
        if o.quiet {
            self.verbosity = Verbosity::Quiet;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model_params()?;
        self.sweep_plan()?;
        if self.sweep.workers == 0 {
            return Err(CliError::config("sweep.workers", "must be at least 1"));
        }
        if self.sweep.formats.is_empty() {
            return Err(CliError::config("sweep.formats", "at least one format is required"));
        }
        if let Some(s) = &self.symbol {
            s.spec()?;
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let m = &self.model;
        let field = |name: &str, ok: bool, why: &str| -> Result<(), CliError> {
            if ok {
                Ok(())
            } else {
                Err(CliError::config(format!("model.{name}"), why))
            }
        };
        field("k", m.k.is_finite() && m.k >= 0.0, "must be finite and nonnegative")?;
        field("gamma", m.gamma > 0.0 && m.gamma <= 1.0, "must lie in (0, 1]")?;
        field("hbar_eff", m.hbar_eff > 0.0 && m.hbar_eff.is_finite(), "must be positive")?;
        field("a", m.a.is_finite(), "must be finite")?;
        field("phi", m.phi.is_finite(), "must be finite")?;
        field("diffusion", m.diffusion >= 0.0 && m.diffusion.is_finite(), "must be nonnegative")?;
        ModelParams::from_scaled_kick(m.k, m.gamma, m.hbar_eff)
            .and_then(|p| p.with_harmonic(m.a, m.phi))
            .and_then(|p| p.with_diffusion(m.diffusion))
            .map_err(|e| CliError::config("model", e))
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan, CliError> {
        let s = &self.sweep;
        SweepPlan::grid(
            (s.k_range[0], s.k_range[1]),
            s.k_count,
            (s.gamma_range[0], s.gamma_range[1]),
            s.gamma_count,
            s.hbar_list.clone(),
            self.budgets,
            self.seed,
        )
        .map_err(|e| CliError::config("sweep", e))
    }

    pub fn out_dir(&self) -> &Path {
        self.output.dir.as_deref().unwrap_or(Path::new(DEFAULT_OUT_DIR))
    }

    pub fn quiet(&self) -> bool {
        self.verbosity == Verbosity::Quiet
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
