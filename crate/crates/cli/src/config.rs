//! Scenario configuration: the on-disk format, its validation, and the
//! translation into core types.
//!
//! Configs are TOML files: top-level scalars first, then the `[geometry]`,
//! `[input_state]`, `[modes]`, `[tolerances]` sections and `[[sweep]]` axis
//! tables. Unknown keys are rejected so typos surface as parse errors with
//! the offending path.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rindler_core::bogoliubov::Orientation;
use rindler_core::channel::LogBase;

/// Envelope width used by every preset.
pub const DEFAULT_LENGTH: f64 = 2.0;

/// Central frequency used by every preset: `sqrt(k0^2 + m^2)` for the
/// wavenumber `k0 = 5` and mass `0.1`, i.e. "about 5".
pub fn default_omega0() -> f64 {
    25.01f64.sqrt()
}

fn default_mass() -> f64 {
    0.1
}

fn default_a_conv() -> f64 {
    1.0
}

fn default_mbar() -> f64 {
    1.0
}

fn default_length() -> f64 {
    DEFAULT_LENGTH
}

/// Configuration errors carry the path of the offending field.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

impl ConfigError {
    fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Field {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Built-in scenario names plus the user-supplied `custom` marker.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig12,
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
            Preset::Fig9 => "fig9",
            Preset::Fig10 => "fig10",
            Preset::Fig12 => "fig12",
            Preset::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "fig4" => Some(Preset::Fig4),
            "fig5" => Some(Preset::Fig5),
            "fig6" => Some(Preset::Fig6),
            "fig7" => Some(Preset::Fig7),
            "fig8" => Some(Preset::Fig8),
            "fig9" => Some(Preset::Fig9),
            "fig10" => Some(Preset::Fig10),
            "fig12" => Some(Preset::Fig12),
            _ => None,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Logarithm base for negativity and the capacity bounds.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseChoice {
    #[serde(rename = "2")]
    Two,
    #[default]
    #[serde(rename = "e")]
    Natural,
}

impl BaseChoice {
    pub fn to_core(self) -> LogBase {
        match self {
            BaseChoice::Two => LogBase::Two,
            BaseChoice::Natural => LogBase::Natural,
        }
    }
}

/// Relative orientation of the two accelerated observers.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationChoice {
    #[default]
    Counter,
    Parallel,
}

impl OrientationChoice {
    pub fn to_core(self) -> Orientation {
        match self {
            OrientationChoice::Counter => Orientation::Counter,
            OrientationChoice::Parallel => Orientation::Parallel,
        }
    }
}

/// How the accelerated-frame output modes are chosen.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputModeKind {
    #[default]
    Passive,
    Active,
}

impl fmt::Display for OutputModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputModeKind::Passive => "passive",
            OutputModeKind::Active => "active",
        })
    }
}

/// Wedge layout and the two proper accelerations.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default)]
    pub orientation: OrientationChoice,
    #[serde(default)]
    pub separation: f64,
    pub accel_i: f64,
    pub accel_ii: f64,
}

/// Input two-mode Gaussian state.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputStateConfig {
    #[default]
    Vacuum,
    SqueezedThermal {
        #[serde(default)]
        r: f64,
        #[serde(default)]
        n: f64,
    },
    Coherent {
        d: [f64; 4],
    },
}

/// Optional per-packet overrides of the shared mode parameters.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeOverride {
    pub length: Option<f64>,
    pub omega0: Option<f64>,
}

impl ModeOverride {
    fn is_empty(&self) -> bool {
        self.length.is_none() && self.omega0.is_none()
    }
}

/// Envelope width and central frequency of the four packets: shared
/// defaults plus per-packet overrides.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_omega0")]
    pub omega0: f64,
    #[serde(default)]
    pub input_i: ModeOverride,
    #[serde(default)]
    pub input_ii: ModeOverride,
    #[serde(default)]
    pub output_i: ModeOverride,
    #[serde(default)]
    pub output_ii: ModeOverride,
}

impl Default for ModesConfig {
    fn default() -> Self {
        ModesConfig {
            length: DEFAULT_LENGTH,
            omega0: default_omega0(),
            input_i: ModeOverride::default(),
            input_ii: ModeOverride::default(),
            output_i: ModeOverride::default(),
            output_ii: ModeOverride::default(),
        }
    }
}

impl ModesConfig {
    /// Resolved `(length, omega0)` of one packet slot.
    pub fn resolve(&self, slot: ModeSlot) -> (f64, f64) {
        let over = match slot {
            ModeSlot::InputI => &self.input_i,
            ModeSlot::InputII => &self.input_ii,
            ModeSlot::OutputI => &self.output_i,
            ModeSlot::OutputII => &self.output_ii,
        };
        (
            over.length.unwrap_or(self.length),
            over.omega0.unwrap_or(self.omega0),
        )
    }
}

/// The four packet slots of a scenario.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ModeSlot {
    InputI,
    InputII,
    OutputI,
    OutputII,
}

/// Parameters a sweep axis may vary.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    /// Both proper accelerations together.
    Accel,
    AccelI,
    AccelII,
    Separation,
    /// Envelope width of all four packets.
    Length,
    /// Central frequency of all four packets.
    Omega0,
    /// Squeezing of the input state.
    R,
    /// Thermal occupation of the input state.
    N,
}

impl AxisName {
    pub fn name(self) -> &'static str {
        match self {
            AxisName::Accel => "accel",
            AxisName::AccelI => "accel_i",
            AxisName::AccelII => "accel_ii",
            AxisName::Separation => "separation",
            AxisName::Length => "length",
            AxisName::Omega0 => "omega0",
            AxisName::R => "r",
            AxisName::N => "n",
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    #[default]
    Lin,
    Log,
}

/// One sweep axis: `points` samples of `name` between `min` and `max`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: AxisScale,
}

impl SweepAxis {
    /// The sampled grid values; a single point pins the axis at `min`.
    pub fn values(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.min];
        }
        let n = self.points;
        match self.scale {
            AxisScale::Lin => (0..n)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64)
                .collect(),
            AxisScale::Log => {
                let (a, b) = (self.min.ln(), self.max.ln());
                (0..n)
                    .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

/// Convergence bookkeeping for the cross-noise quadratures. A point counts
/// as converged when the internal refinement succeeded *and* the reported
/// error estimate is below `cross_abs + cross_rel * |value|`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_cross_rel")]
    pub cross_rel: f64,
    #[serde(default = "default_cross_abs")]
    pub cross_abs: f64,
}

fn default_cross_rel() -> f64 {
    0.05
}

fn default_cross_abs() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            cross_rel: default_cross_rel(),
            cross_abs: default_cross_abs(),
        }
    }
}

/// A full scenario description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Preset,
    #[serde(default = "default_mass")]
    pub mass: f64,
    #[serde(default = "default_a_conv")]
    pub a_conv: f64,
    /// Mean photon number constraint entering the classical capacity bound.
    #[serde(default = "default_mbar")]
    pub mbar: f64,
    #[serde(default)]
    pub log_base: BaseChoice,
    #[serde(default)]
    pub mode_kind: OutputModeKind,
    /// When set, the wedge separation is re-derived at every sweep point as
    /// `fixed_span - 1/accel_i - 1/accel_ii`, keeping the distance between
    /// the packet centers constant.
    #[serde(default)]
    pub fixed_span: Option<f64>,
    /// CSV destination; relative paths are resolved against the output
    /// directory. Defaults to `<scenario>.csv`.
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Cache directory override (see the cache module for the resolution
    /// order).
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub input_state: InputStateConfig,
    #[serde(default)]
    pub modes: ModesConfig,
    #[serde(default)]
    pub sweep: Vec<SweepAxis>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ScenarioConfig {
    /// Parses and validates a config file.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: ScenarioConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every invariant, reporting the first violation with its field
    /// path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [
            ("mass", self.mass),
            ("a_conv", self.a_conv),
            ("geometry.accel_i", self.geometry.accel_i),
            ("geometry.accel_ii", self.geometry.accel_ii),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ConfigError::field(
                    field,
                    format!("must be positive and finite, got {value}"),
                ));
            }
        }
        if !(self.mbar >= 0.0 && self.mbar.is_finite()) {
            return Err(ConfigError::field(
                "mbar",
                format!("must be non-negative and finite, got {}", self.mbar),
            ));
        }
        if !self.geometry.separation.is_finite() {
            return Err(ConfigError::field("geometry.separation", "must be finite"));
        }
        if let Some(span) = self.fixed_span {
            if !span.is_finite() {
                return Err(ConfigError::field("fixed_span", "must be finite"));
            }
        }
        for (field, value) in [
            ("tolerances.cross_rel", self.tolerances.cross_rel),
            ("tolerances.cross_abs", self.tolerances.cross_abs),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ConfigError::field(
                    field,
                    format!("must be non-negative and finite, got {value}"),
                ));
            }
        }
        self.validate_modes()?;
        self.validate_input_state()?;
        self.validate_sweep()?;
        Ok(())
    }

    fn validate_modes(&self) -> Result<(), ConfigError> {
        let slots = [
            ("modes.input_i", ModeSlot::InputI),
            ("modes.input_ii", ModeSlot::InputII),
            ("modes.output_i", ModeSlot::OutputI),
            ("modes.output_ii", ModeSlot::OutputII),
        ];
        for (field, slot) in slots {
            let (length, omega0) = self.modes.resolve(slot);
            if !(length > 0.0 && length.is_finite()) {
                return Err(ConfigError::field(
                    format!("{field}.length"),
                    format!("must be positive and finite, got {length}"),
                ));
            }
            if !(omega0 > self.mass && omega0.is_finite()) {
                return Err(ConfigError::field(
                    format!("{field}.omega0"),
                    format!("must exceed the mass {}, got {omega0}", self.mass),
                ));
            }
        }
        if self.mode_kind == OutputModeKind::Active
            && (!self.modes.output_i.is_empty() || !self.modes.output_ii.is_empty())
        {
            return Err(ConfigError::field(
                "modes.output_i",
                "active outputs are projected from the inputs; output overrides have no effect",
            ));
        }
        Ok(())
    }

    fn validate_input_state(&self) -> Result<(), ConfigError> {
        match self.input_state {
            InputStateConfig::Vacuum => Ok(()),
            InputStateConfig::SqueezedThermal { r, n } => {
                if !r.is_finite() {
                    return Err(ConfigError::field("input_state.r", "must be finite"));
                }
                if !(n >= 0.0 && n.is_finite()) {
                    return Err(ConfigError::field(
                        "input_state.n",
                        format!("must be non-negative and finite, got {n}"),
                    ));
                }
                Ok(())
            }
            InputStateConfig::Coherent { d } => {
                if d.iter().all(|v| v.is_finite()) {
                    Ok(())
                } else {
                    Err(ConfigError::field("input_state.d", "must be finite"))
                }
            }
        }
    }

    fn validate_sweep(&self) -> Result<(), ConfigError> {
        for (i, axis) in self.sweep.iter().enumerate() {
            let field = |part: &str| format!("sweep[{i}].{part}");
            if axis.points < 1 {
                return Err(ConfigError::field(field("points"), "must be at least 1"));
            }
            if !(axis.min.is_finite() && axis.max.is_finite() && axis.min <= axis.max) {
                return Err(ConfigError::field(
                    field("min"),
                    format!("need finite min <= max, got [{}, {}]", axis.min, axis.max),
                ));
            }
            let positive = matches!(
                axis.name,
                AxisName::Accel
                    | AxisName::AccelI
                    | AxisName::AccelII
                    | AxisName::Length
                    | AxisName::Omega0
            );
            if positive && axis.min <= 0.0 {
                return Err(ConfigError::field(
                    field("min"),
                    format!("{} values must be positive", axis.name.name()),
                ));
            }
            if axis.scale == AxisScale::Log && axis.min <= 0.0 {
                return Err(ConfigError::field(
                    field("scale"),
                    "log scale requires positive bounds",
                ));
            }
            if axis.name == AxisName::N && axis.min < 0.0 {
                return Err(ConfigError::field(
                    field("min"),
                    "thermal occupation must be non-negative",
                ));
            }
            match axis.name {
                AxisName::R | AxisName::N => {
                    if !matches!(self.input_state, InputStateConfig::SqueezedThermal { .. }) {
                        return Err(ConfigError::field(
                            field("name"),
                            "sweeping r or n requires input_state.kind = \"squeezed_thermal\"",
                        ));
                    }
                }
                AxisName::Separation if self.fixed_span.is_some() => {
                    return Err(ConfigError::field(
                        field("name"),
                        "separation is derived from fixed_span and cannot be swept",
                    ));
                }
                _ => {}
            }
            for other in &self.sweep[..i] {
                if other.name == axis.name {
                    return Err(ConfigError::field(
                        field("name"),
                        format!("axis {} appears more than once", axis.name.name()),
                    ));
                }
            }
        }
        Ok(())
    }

    /// CSV file name for this scenario when `output_path` is not given.
    pub fn default_output_name(&self) -> String {
        format!("{}.csv", self.scenario)
    }
}
