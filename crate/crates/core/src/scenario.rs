//! Named experiment presets and the scenario file format.
//!
//! A scenario file is a single TOML document whose keys mirror
//! [`ScenarioSpec`]. Every table is optional and falls back to the reference
//! setup; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::control::ControllerParams;
use crate::dynamics::{DampingModel, FrictionConfig, MotionState, PlantParams};
use crate::error::{Error, Result};
use crate::executor::{run, ExecutorConfig, Setup, SettlingReport, Trajectory};

pub const PRESETS: [&str; 5] = [
    "fig1_overdamped",
    "fig1_underdamped",
    "fig2_underdamped_hybrid",
    "fig4_timevarying",
    "fig5_coulomb",
];

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variants {
    ImpulsesOn,
    ImpulsesOff,
    #[default]
    Both,
}

impl Variants {
    pub fn runs_on(self) -> bool {
        matches!(self, Variants::ImpulsesOn | Variants::Both)
    }

    pub fn runs_off(self) -> bool {
        matches!(self, Variants::ImpulsesOff | Variants::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub variants: Variants,
    pub plant: PlantParams,
    pub damping: DampingModel,
    pub friction: FrictionConfig,
    pub controller: ControllerParams,
    pub executor: ExecutorConfig,
    pub initial: MotionState,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            variants: Variants::Both,
            plant: PlantParams::default(),
            damping: DampingModel::default(),
            friction: FrictionConfig::default(),
            controller: ControllerParams::default(),
            executor: ExecutorConfig::default(),
            initial: MotionState::default(),
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        self.setup().validate()?;
        if !self.initial.is_finite() {
            return Err(Error::NonFinite {
                context: "initial state",
            });
        }
        if self.initial.t < 0.0 || self.initial.t >= self.executor.t_end {
            return Err(crate::error::invalid(
                "initial.t",
                "must lie in [0, t_end)",
            ));
        }
        Ok(())
    }

    pub fn setup(&self) -> Setup<'_> {
        Setup {
            params: &self.plant,
            damping: &self.damping,
            friction: &self.friction,
            controller: &self.controller,
            config: &self.executor,
        }
    }

    /// Replaces the noise seed of a time-varying damping model. Other
    /// models have no seed and are left untouched.
    pub fn with_seed(mut self, new_seed: u64) -> Self {
        if let DampingModel::TimeVarying { seed, .. } = &mut self.damping {
            *seed = new_seed;
        }
        self
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Applies a `dotted.path=value` override. The value is parsed as a TOML
    /// literal, falling back to a bare string.
    pub fn with_override(&self, assignment: &str) -> Result<Self> {
        let (path, raw) = assignment.split_once('=').ok_or_else(|| Error::Override {
            path: assignment.into(),
            reason: "expected path=value".into(),
        })?;
        let path = path.trim();
        let fail = |reason: String| Error::Override {
            path: path.into(),
            reason,
        };
        let mut root = toml::Table::try_from(self).map_err(|e| fail(e.to_string()))?;
        let mut value = parse_literal(raw.trim());

        let keys: Vec<&str> = path.split('.').collect();
        let (last, parents) = keys.split_last().ok_or_else(|| fail("empty path".into()))?;
        let mut table = &mut root;
        for key in parents {
            table = match table.get_mut(*key) {
                Some(toml::Value::Table(t)) => t,
                _ => return Err(fail(format!("no table `{key}`"))),
            };
        }
        match (table.get(*last), &value) {
            (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => {
                value = toml::Value::Float(*i as f64);
            }
            (None, _) => {
                return Err(fail(format!("unknown key `{last}`")));
            }
            _ => {}
        }
        table.insert((*last).to_string(), value);

        let spec: Self = toml::Value::Table(root)
            .try_into()
            .map_err(|e: toml::de::Error| fail(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Reference presets for the three experiments plus the two PD baselines.
pub fn preset(name: &str) -> Result<ScenarioSpec> {
    let plant = PlantParams::default();
    let base = ScenarioSpec {
        name: name.to_string(),
        plant,
        ..ScenarioSpec::default()
    };
    let spec = match name {
        "fig1_overdamped" => ScenarioSpec {
            variants: Variants::ImpulsesOff,
            damping: DampingModel::Constant { value: plant.d_hi },
            ..base
        },
        "fig1_underdamped" => ScenarioSpec {
            variants: Variants::ImpulsesOff,
            damping: DampingModel::Constant { value: plant.d_lo },
            ..base
        },
        "fig2_underdamped_hybrid" => ScenarioSpec {
            damping: DampingModel::Constant { value: plant.d_lo },
            ..base
        },
        "fig4_timevarying" => ScenarioSpec {
            damping: DampingModel::time_varying(DEFAULT_SEED, &plant),
            ..base
        },
        "fig5_coulomb" => ScenarioSpec {
            plant: PlantParams {
                coulomb: 1.0,
                ..plant
            },
            damping: DampingModel::Constant { value: plant.d_lo },
            friction: FrictionConfig {
                enabled: true,
                ..FrictionConfig::default()
            },
            initial: MotionState::new(0.0, 0.15, 0.0),
            ..base
        },
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    spec.validate()?;
    Ok(spec)
}

/// Settling reports of an on/off pair and their differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub on: SettlingReport,
    pub off: SettlingReport,
    /// `settling(on) / settling(off)`, when both settle.
    pub settling_ratio: Option<f64>,
    /// `settling(off) − settling(on)`, when both settle.
    pub settling_gain: Option<f64>,
    pub jump_count: usize,
    /// `peak_speed(on) / peak_speed(off)`; informational only.
    pub peak_speed_ratio: f64,
}

impl Comparison {
    pub fn new(on: &SettlingReport, off: &SettlingReport) -> Self {
        let both = on.settling_time.zip(off.settling_time);
        Self {
            on: *on,
            off: *off,
            settling_ratio: both.and_then(|(a, b)| (b > 0.0).then(|| a / b)),
            settling_gain: both.map(|(a, b)| b - a),
            jump_count: on.jump_count,
            peak_speed_ratio: if off.peak_speed > 0.0 {
                on.peak_speed / off.peak_speed
            } else {
                f64::INFINITY
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub on: Option<Trajectory>,
    pub off: Option<Trajectory>,
    pub comparison: Option<Comparison>,
}

/// Runs the variants requested by `spec`; the on/off pair runs on two
/// threads.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioOutcome> {
    spec.validate()?;
    let setup = spec.setup();
    let simulate = |impulses: bool| run(spec.initial, &setup, impulses);
    let (on, off) = match spec.variants {
        Variants::ImpulsesOn => (Some(simulate(true)?), None),
        Variants::ImpulsesOff => (None, Some(simulate(false)?)),
        Variants::Both => {
            let (on, off) = std::thread::scope(|scope| {
                let handle = scope.spawn(|| simulate(true));
                let off = simulate(false);
                (handle.join().expect("simulation thread panicked"), off)
            });
            (Some(on?), Some(off?))
        }
    };
    let comparison = match (&on, &off) {
        (Some(a), Some(b)) => Some(Comparison::new(&a.metrics, &b.metrics)),
        _ => None,
    };
    Ok(ScenarioOutcome {
        on,
        off,
        comparison,
    })
}
