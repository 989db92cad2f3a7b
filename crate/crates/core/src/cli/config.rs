use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::TargetState;
use crate::protocol::{Engine, NoiseModel, Sampling, SweepKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Entangle,
    Transfer,
    Echo,
    Fringe,
    Lossbudget,
    Eq5check,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Entangle => "entangle",
            Experiment::Transfer => "transfer",
            Experiment::Echo => "echo",
            Experiment::Fringe => "fringe",
            Experiment::Lossbudget => "lossbudget",
            Experiment::Eq5check => "eq5check",
        }
    }
}

/// Base parameter set that `[noise]` entries override.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Quoted device values plus fitted error parameters.
    Calibrated,
    /// Quoted device values only.
    Device,
    Ideal,
}

impl Profile {
    pub fn model(self) -> NoiseModel {
        match self {
            Profile::Calibrated => NoiseModel::calibrated(),
            Profile::Device => NoiseModel::device(),
            Profile::Ideal => NoiseModel::ideal(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Named(NamedTarget),
    /// `cos(θ/2)|H⟩ + e^{iφ} sin(θ/2)|V⟩`.
    Bloch {
        theta: f64,
        phi: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedTarget {
    H,
    DPlus,
    SigmaPlus,
}

impl TargetSpec {
    pub fn state(&self) -> TargetState {
        match *self {
            TargetSpec::Named(NamedTarget::H) => TargetState::h(),
            TargetSpec::Named(NamedTarget::DPlus) => TargetState::d_plus(),
            TargetSpec::Named(NamedTarget::SigmaPlus) => TargetState::sigma_plus(),
            TargetSpec::Bloch { theta, phi } => TargetState::from_bloch(theta, phi),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            TargetSpec::Named(NamedTarget::H) => "h".into(),
            TargetSpec::Named(NamedTarget::DPlus) => "d_plus".into(),
            TargetSpec::Named(NamedTarget::SigmaPlus) => "sigma_plus".into(),
            TargetSpec::Bloch { theta, phi } => format!("bloch({theta};{phi})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransferConfig {
    pub targets: Vec<TargetSpec>,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            targets: vec![
                TargetSpec::Named(NamedTarget::H),
                TargetSpec::Named(NamedTarget::DPlus),
                TargetSpec::Named(NamedTarget::SigmaPlus),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub sequence: SweepKind,
    /// Empty selects the default grid of the sequence.
    pub spans_ns: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { sequence: SweepKind::Echo, spans_ns: Vec::new() }
    }
}

impl SweepConfig {
    pub fn spans(&self) -> Vec<f64> {
        if !self.spans_ns.is_empty() {
            return self.spans_ns.clone();
        }
        match self.sequence {
            SweepKind::Echo => vec![38.0, 500.0, 1000.0, 1500.0, 2000.0, 3000.0, 4000.0, 5000.0],
            SweepKind::Ramsey => (0..13).map(|i| 0.25 * f64::from(i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FringeConfig {
    /// RF phase points over `[0, 2π)`.
    pub steps: u32,
}

impl Default for FringeConfig {
    fn default() -> Self {
        Self { steps: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Eq5Config {
    /// Random targets in addition to `|H⟩`, `|D⁺⟩`, `|σ⁺⟩`.
    pub samples: u32,
}

impl Default for Eq5Config {
    fn default() -> Self {
        Self { samples: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default = "default_profile")]
    pub profile: Profile,
    /// Overrides on top of the profile, same layout as [`NoiseModel`].
    #[serde(default)]
    pub noise: toml::Table,
    #[serde(default)]
    pub transfer: TransferConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub fringe: FringeConfig,
    #[serde(default)]
    pub eq5: Eq5Config,
}

fn default_trials() -> u64 {
    10_000
}

fn default_seed() -> u64 {
    1
}

fn default_engine() -> Engine {
    Engine::MonteCarlo
}

fn default_profile() -> Profile {
    Profile::Calibrated
}

fn merge(base: &mut toml::Table, overrides: &toml::Table) {
    for (k, v) in overrides {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

impl RunConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            trials: default_trials(),
            seed: default_seed(),
            engine: default_engine(),
            output_path: None,
            profile: default_profile(),
            noise: toml::Table::new(),
            transfer: TransferConfig::default(),
            sweep: SweepConfig::default(),
            fringe: FringeConfig::default(),
            eq5: Eq5Config::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    /// Reads a config echoed into a CSV header: the `# ` comment lines
    /// before the column row.
    pub fn from_csv_header(csv: &str) -> Result<Self> {
        let body: String = csv
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| format!("{}\n", l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#'))))
            .collect();
        Self::from_toml(&body)
    }

    /// Profile with the `[noise]` overrides applied.
    pub fn noise_model(&self) -> Result<NoiseModel> {
        let mut table = toml::Table::try_from(self.profile.model()).map_err(|e| Error::ConfigParse(e.to_string()))?;
        merge(&mut table, &self.noise);
        let model: NoiseModel = table.try_into().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn sampling(&self) -> Sampling {
        Sampling { trials: self.trials, seed: self.seed, engine: self.engine }
    }

    /// The config with every default spelled out: the noise table holds the
    /// full resolved model and the sweep grid is explicit.
    pub fn effective(&self) -> Result<Self> {
        let model = self.noise_model()?;
        let mut out = self.clone();
        out.noise = toml::Table::try_from(model).map_err(|e| Error::ConfigParse(e.to_string()))?;
        out.sweep.spans_ns = self.sweep.spans();
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.sampling().validate()?;
        self.noise_model()?;
        if self.experiment == Experiment::Fringe && self.fringe.steps < 3 {
            return Err(Error::InvalidParameter("fringe needs at least 3 phase steps".into()));
        }
        if self.sweep.spans().iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::InvalidParameter("sweep spans must be non-negative".into()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = RunConfig::from_toml("experiment = \"transfer\"").unwrap();
        assert_eq!(c.trials, 10_000);
        assert_eq!(c.engine, Engine::MonteCarlo);
        assert_eq!(c.noise_model().unwrap(), NoiseModel::calibrated());
        assert_eq!(c.transfer.targets.len(), 3);
    }

    #[test]
    fn overrides_merge_into_profile() {
        let c = RunConfig::from_toml(
            "experiment = \"echo\"\nprofile = \"device\"\nengine = \"mc\"\n[noise.spin]\nt2_echo_us = 3.0\n",
        )
        .unwrap();
        let m = c.noise_model().unwrap();
        assert_eq!(m.spin.t2_echo_us, 3.0);
        assert_eq!(m.spin.t2_star_ns, 1.7);
        assert_eq!(m.source, NoiseModel::device().source);
    }

    #[test]
    fn parse_and_parameter_errors_are_distinct() {
        assert_eq!(RunConfig::from_toml("experiment = 3").unwrap_err().exit_code(), 2);
        assert_eq!(RunConfig::from_toml("experiment = \"nope\"").unwrap_err().exit_code(), 2);
        let unknown = RunConfig::from_toml("experiment = \"echo\"\n[noise.spin]\nt2 = 1.0\n").unwrap();
        assert_eq!(unknown.noise_model().unwrap_err().exit_code(), 2);
        let bad = RunConfig::from_toml("experiment = \"echo\"\n[noise.spin]\nt2_star_ns = -1.0\n").unwrap();
        assert_eq!(bad.validate().unwrap_err().exit_code(), 3);
    }

    #[test]
    fn effective_config_round_trips() {
        let mut c = RunConfig::new(Experiment::Transfer);
        c.transfer.targets.push(TargetSpec::Bloch { theta: 0.3, phi: 1.1 });
        c.noise.insert(
            "timing".into(),
            toml::Value::Table({
                let mut t = toml::Table::new();
                t.insert("storage_half_span_ns".into(), toml::Value::Float(25.0));
                t
            }),
        );
        let eff = c.effective().unwrap();
        let text = eff.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, eff);
        assert_eq!(back.effective().unwrap(), eff);
        assert_eq!(back.noise_model().unwrap(), c.noise_model().unwrap());
    }
}
