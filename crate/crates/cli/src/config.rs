//! JSON run configuration.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use irfloquet_core::dynamics::DriveRegime;
use irfloquet_core::oracle::{HilbertConfig, IntegrationConfig, MasterEquation, Method};
use irfloquet_core::params::{
    linspace, CavityParams, DriveParams, MoleculeParams, ProbeParams, TruncationPolicy,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Spectrum,
    SpectrumOffres,
    CavitySpectrum,
    Coherence,
    Susceptibility,
    Quasienergies,
    Oracle,
    Validate,
    Sumrule,
}

impl Mode {
    pub const ALL: [Mode; 9] = [
        Mode::Spectrum,
        Mode::SpectrumOffres,
        Mode::CavitySpectrum,
        Mode::Coherence,
        Mode::Susceptibility,
        Mode::Quasienergies,
        Mode::Oracle,
        Mode::Validate,
        Mode::Sumrule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::SpectrumOffres => "spectrum-offres",
            Mode::CavitySpectrum => "cavity-spectrum",
            Mode::Coherence => "coherence",
            Mode::Susceptibility => "susceptibility",
            Mode::Quasienergies => "quasienergies",
            Mode::Oracle => "oracle",
            Mode::Validate => "validate",
            Mode::Sumrule => "sumrule",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Mode::ALL.iter().map(|m| m.name()).collect();
                CliError::Config(format!(
                    "unknown mode `{s}` (expected one of {})",
                    known.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.points == 0 {
            return Err(CliError::Config("grid needs at least one point".into()));
        }
        match self.spacing {
            Spacing::Linear => Ok(linspace(self.start, self.stop, self.points)),
            Spacing::Log => {
                if !(self.start > 0.0 && self.stop > 0.0) {
                    return Err(CliError::Config("log grid needs positive bounds".into()));
                }
                let mut values: Vec<f64> = linspace(self.start.ln(), self.stop.ln(), self.points)
                    .into_iter()
                    .map(f64::exp)
                    .collect();
                // Keep the end points exact.
                values[0] = self.start;
                if self.points > 1 {
                    values[self.points - 1] = self.stop;
                }
                Ok(values)
            }
        }
    }
}

fn zero() -> f64 {
    0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSection {
    pub lambda: f64,
    pub nu: f64,
    pub gamma: f64,
    #[serde(default = "zero")]
    pub gamma_phi: f64,
    pub big_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    #[serde(default = "zero")]
    pub eta_d: f64,
    pub omega_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub eta_p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detunings: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub g: f64,
    pub kappa: f64,
    pub omega_c: f64,
    #[serde(default = "zero")]
    pub eta_d_c: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_series: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max_cap: Option<usize>,
}

fn default_n_vib() -> usize {
    6
}

fn default_true() -> bool {
    true
}

fn default_max_dim() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertSection {
    #[serde(default = "default_n_vib")]
    pub n_vib: usize,
    #[serde(default)]
    pub n_cav: usize,
    #[serde(default = "default_true")]
    pub rotating_frame: bool,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
}

impl Default for HilbertSection {
    fn default() -> Self {
        Self {
            n_vib: default_n_vib(),
            n_cav: 0,
            rotating_frame: true,
            max_dim: default_max_dim(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    #[default]
    Rk4,
    Adaptive,
}

fn default_rtol() -> f64 {
    1e-8
}

fn default_atol() -> f64 {
    1e-12
}

fn default_relax_times() -> f64 {
    14.0
}

/// Unset `dt`/`t_end` are chosen per run from the model's frequencies and
/// slowest decay rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub method: MethodName,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_relax_times")]
    pub relax_times: f64,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: None,
            method: MethodName::Rk4,
            rtol: default_rtol(),
            atol: default_atol(),
            relax_times: default_relax_times(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeName {
    #[default]
    Resonant,
    OffResonant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceSection {
    pub delta_p: f64,
    #[serde(default)]
    pub regime: RegimeName,
    /// Sample times of the trajectory; ignored when a scan is configured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Grid>,
}

fn default_m_max() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuasienergySection {
    #[serde(default = "default_m_max")]
    pub m_max: usize,
}

fn default_tolerance() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

/// One-parameter sweep: `key` is a dotted config path set to each grid value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub key: String,
    pub grid: Grid,
}

/// A labelled copy of the run with dotted-path overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub label: String,
    pub set: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub molecule: Option<MoleculeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavitySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hilbert: Option<HilbertSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integration: Option<IntegrationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub susceptibility: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasienergies: Option<QuasienergySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn missing(section: &str, mode: Mode) -> CliError {
    CliError::Config(format!(
        "mode `{}` needs a `{section}` section",
        mode.name()
    ))
}

impl RunConfig {
    /// Parses JSON text; serde's message carries the line and column.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serialises")
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        self.mode.ok_or_else(|| {
            CliError::Config("no mode given on the command line or in the config".into())
        })
    }

    pub fn molecule(&self) -> Result<MoleculeParams<f64>, CliError> {
        let m = self
            .molecule
            .as_ref()
            .ok_or_else(|| missing("molecule", self.mode.unwrap_or(Mode::Spectrum)))?;
        Ok(MoleculeParams::new(
            m.lambda,
            m.nu,
            m.gamma,
            m.gamma_phi,
            m.big_gamma,
        )?)
    }

    pub fn drive(&self) -> Result<DriveParams<f64>, CliError> {
        let d = self
            .drive
            .as_ref()
            .ok_or_else(|| missing("drive", self.mode.unwrap_or(Mode::Spectrum)))?;
        Ok(DriveParams::new(d.eta_d, d.omega_d)?)
    }

    pub fn cavity(&self) -> Result<Option<CavityParams<f64>>, CliError> {
        self.cavity
            .as_ref()
            .map(|c| CavityParams::new(c.g, c.kappa, c.omega_c, c.eta_d_c).map_err(CliError::from))
            .transpose()
    }

    pub fn require_cavity(&self) -> Result<CavityParams<f64>, CliError> {
        self.cavity()?
            .ok_or_else(|| missing("cavity", self.mode.unwrap_or(Mode::CavitySpectrum)))
    }

    pub fn eta_p(&self) -> Result<f64, CliError> {
        self.probe
            .as_ref()
            .map(|p| p.eta_p)
            .ok_or_else(|| missing("probe", self.mode.unwrap_or(Mode::Spectrum)))
    }

    /// Probe amplitude with its detuning grid.
    pub fn probe(&self) -> Result<ProbeParams<f64>, CliError> {
        let p = self
            .probe
            .as_ref()
            .ok_or_else(|| missing("probe", self.mode.unwrap_or(Mode::Spectrum)))?;
        let detunings = match (&p.detunings, &p.grid) {
            (Some(d), None) => d.clone(),
            (None, Some(g)) => g.values()?,
            _ => {
                return Err(CliError::Config(
                    "probe needs exactly one of `detunings` and `grid`".into(),
                ))
            }
        };
        Ok(ProbeParams::new(p.eta_p, detunings)?)
    }

    pub fn policy(&self) -> Result<TruncationPolicy<f64>, CliError> {
        let t = self.truncation.clone().unwrap_or_default();
        let d = TruncationPolicy::<f64>::default();
        Ok(TruncationPolicy::new(
            t.eps_series.unwrap_or(d.eps_series()),
            t.n_max_cap.unwrap_or(d.n_max_cap()),
            t.m_max_cap.unwrap_or(d.m_max_cap()),
        )?)
    }

    pub fn hilbert(&self) -> Result<HilbertConfig, CliError> {
        let h = self.hilbert.clone().unwrap_or_default();
        Ok(HilbertConfig::default()
            .with_max_dim(h.max_dim)
            .with_rotating_frame(h.rotating_frame)
            .with_levels(h.n_vib, h.n_cav)?)
    }

    /// Integration settings for one model, filling unset fields
    /// automatically.
    pub fn integration(&self, model: &MasterEquation) -> Result<IntegrationConfig, CliError> {
        let s = self.integration.clone().unwrap_or_default();
        let mut cfg = IntegrationConfig::auto(model, s.relax_times)?;
        if let Some(dt) = s.dt {
            cfg = cfg.with_dt(dt)?;
        }
        if let Some(t_end) = s.t_end {
            cfg = cfg.with_t_end(t_end)?;
        }
        let method = match s.method {
            MethodName::Rk4 => Method::Rk4,
            MethodName::Adaptive => Method::Adaptive {
                rtol: s.rtol,
                atol: s.atol,
            },
        };
        Ok(cfg.with_method(method))
    }

    pub fn coherence(&self) -> Result<(&CoherenceSection, DriveRegime), CliError> {
        let c = self
            .coherence
            .as_ref()
            .ok_or_else(|| missing("coherence", Mode::Coherence))?;
        let regime = match c.regime {
            RegimeName::Resonant => DriveRegime::Resonant,
            RegimeName::OffResonant => DriveRegime::OffResonant,
        };
        Ok((c, regime))
    }

    pub fn tolerance(&self) -> f64 {
        self.validate
            .as_ref()
            .map_or(default_tolerance(), |v| v.tolerance)
    }

    pub fn m_max(&self) -> usize {
        self.quasienergies
            .as_ref()
            .map_or(default_m_max(), |q| q.m_max)
    }
}

/// Sets `key` (dotted path, e.g. `molecule.gamma_phi`) in a JSON config,
/// creating intermediate objects.
pub fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed key `{key}`")));
    }
    for part in &parts[..parts.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::Config(format!("`{key}`: `{part}` is not inside an object"))
        })?;
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("`{key}` does not address an object field")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Parses a `key=value` override; the value is read as JSON when possible
/// and as a string otherwise.
pub fn parse_override(text: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{text}` is not key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}
