//! Plant state, parameters, damping models and the continuous flow field.
//!
//! The closed loop between jumps is
//!
//! ```text
//! m·ẍ = u_cont − d(t)·ẋ − F_c·sgn(ẋ)
//! ```
//!
//! where `u_cont` is the PD force supplied by [`crate::control::pd_control`].
//! The derivative feedback is deliberately *not* part of [`flow_field`]; the
//! plant and the regulator stay separate so the same field can be driven by
//! other continuous laws in tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Continuous state `(x, ẋ)` stamped with its time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionState {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

impl MotionState {
    pub const fn new(t: f64, x: f64, v: f64) -> Self {
        Self { t, x, v }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.v.is_finite()
    }
}

impl Default for MotionState {
    fn default() -> Self {
        Self::new(0.0, 0.5, 0.0)
    }
}

/// Plant and PD parameters. Defaults are the normalized reference setup
/// (m = 0.1, K = 10, D = 0.5, damping in [0.15, 1.5]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    pub mass: f64,
    /// Proportional gain K.
    pub kp: f64,
    /// Derivative gain D.
    pub kd: f64,
    pub d_lo: f64,
    pub d_hi: f64,
    /// Coulomb friction coefficient F_c.
    pub coulomb: f64,
    pub setpoint: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            mass: 0.1,
            kp: 10.0,
            kd: 0.5,
            d_lo: 0.15,
            d_hi: 1.5,
            coulomb: 0.0,
            setpoint: 0.0,
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("plant.mass", self.mass),
            ("plant.kp", self.kp),
            ("plant.kd", self.kd),
            ("plant.d_lo", self.d_lo),
            ("plant.d_hi", self.d_hi),
            ("plant.coulomb", self.coulomb),
            ("plant.setpoint", self.setpoint),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(invalid(name, format!("{value} is not finite")));
            }
        }
        if self.mass <= 0.0 {
            return Err(invalid("plant.mass", "must be > 0"));
        }
        if self.kp < 0.0 {
            return Err(invalid("plant.kp", "must be >= 0"));
        }
        if self.kd < 0.0 {
            return Err(invalid("plant.kd", "must be >= 0"));
        }
        if self.d_lo <= 0.0 {
            return Err(invalid("plant.d_lo", "must be > 0"));
        }
        if self.d_hi < self.d_lo {
            return Err(invalid("plant.d_hi", "must be >= d_lo"));
        }
        if self.coulomb < 0.0 {
            return Err(invalid("plant.coulomb", "must be >= 0"));
        }
        Ok(())
    }

    pub fn clamp_damping(&self, d: f64) -> f64 {
        d.clamp(self.d_lo, self.d_hi)
    }

    /// Dead-zone half width `F_c / K` of PD control under Coulomb friction.
    pub fn dead_zone(&self) -> f64 {
        if self.kp > 0.0 {
            self.coulomb / self.kp
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrictionConfig {
    pub enabled: bool,
    /// Karnopp stiction velocity threshold.
    pub v_stick: f64,
}

impl Default for FrictionConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            v_stick: 1e-5,
        }
    }
}

impl FrictionConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.v_stick.is_finite() || (self.enabled && self.v_stick <= 0.0) {
            return Err(invalid("friction.v_stick", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Friction acts only when enabled and the plant carries a Coulomb term.
    pub fn active(&self, params: &PlantParams) -> bool {
        self.enabled && params.coulomb > 0.0
    }

    /// Karnopp stick condition: slow enough and the driving force cannot
    /// break away.
    pub fn sticks(&self, params: &PlantParams, v: f64, u_cont: f64) -> bool {
        self.active(params) && v.abs() < self.v_stick && u_cont.abs() <= params.coulomb
    }
}

/// Damping coefficient models. Every emitted value is clamped into the
/// owning plant's `[d_lo, d_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingModel {
    Constant {
        value: f64,
    },
    /// Uniform white noise per grid step through a first-order low-pass,
    /// normalized to unit stationary deviation, then `bias + noise_scale·y`.
    TimeVarying {
        seed: u64,
        time_constant: f64,
        noise_scale: f64,
        bias: f64,
    },
    /// `(t, d)` breakpoints, piecewise constant, holding the last value.
    Schedule {
        breakpoints: Vec<[f64; 2]>,
    },
}

impl Default for DampingModel {
    fn default() -> Self {
        DampingModel::Constant { value: 0.15 }
    }
}

impl DampingModel {
    /// Time-varying model with the default shaping for `params`: 50 ms
    /// filter, bias at mid-range.
    pub fn time_varying(seed: u64, params: &PlantParams) -> Self {
        DampingModel::TimeVarying {
            seed,
            time_constant: 0.05,
            noise_scale: 0.3,
            bias: 0.5 * (params.d_lo + params.d_hi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DampingModel::Constant { value } => {
                if !value.is_finite() || *value < 0.0 {
                    return Err(invalid("damping.value", "must be finite and >= 0"));
                }
            }
            DampingModel::TimeVarying {
                time_constant,
                noise_scale,
                bias,
                ..
            } => {
                if !time_constant.is_finite() || *time_constant <= 0.0 {
                    return Err(invalid("damping.time_constant", "must be > 0"));
                }
                if !noise_scale.is_finite() || *noise_scale < 0.0 {
                    return Err(invalid("damping.noise_scale", "must be >= 0"));
                }
                if !bias.is_finite() {
                    return Err(invalid("damping.bias", "must be finite"));
                }
            }
            DampingModel::Schedule { breakpoints } => {
                if breakpoints.is_empty() {
                    return Err(invalid("damping.breakpoints", "must not be empty"));
                }
                if breakpoints.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(invalid("damping.breakpoints", "must be finite"));
                }
                if breakpoints.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(invalid(
                        "damping.breakpoints",
                        "times must be strictly increasing",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            DampingModel::TimeVarying { seed, .. } => Some(*seed),
            _ => None,
        }
    }
}

/// Stateful evaluator of a [`DampingModel`] on a fixed time grid. The noise
/// generator is owned here, one per simulation.
#[derive(Debug, Clone)]
pub struct DampingSignal {
    lo: f64,
    hi: f64,
    source: Source,
}

#[derive(Debug, Clone)]
enum Source {
    Constant(f64),
    Schedule(Vec<[f64; 2]>),
    Noise(Box<FilteredNoise>),
}

#[derive(Debug, Clone)]
struct FilteredNoise {
    rng: ChaCha8Rng,
    pole: f64,
    norm: f64,
    scale: f64,
    bias: f64,
    state: f64,
    emitted: Vec<f64>,
}

impl FilteredNoise {
    fn new(seed: u64, time_constant: f64, scale: f64, bias: f64, dt: f64) -> Self {
        let pole = (-dt / time_constant).exp();
        // stationary variance of the filter output for U(-1, 1) input
        let var = (1.0 - pole) / (1.0 + pole) / 3.0;
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            pole,
            norm: if var > 0.0 { var.sqrt().recip() } else { 0.0 },
            scale,
            bias,
            state: 0.0,
            emitted: Vec::new(),
        }
    }

    fn fill_to(&mut self, index: usize, lo: f64, hi: f64) {
        while self.emitted.len() <= index {
            let w: f64 = self.rng.random_range(-1.0..1.0);
            self.state = self.pole * self.state + (1.0 - self.pole) * w;
            let d = self.bias + self.scale * self.norm * self.state;
            self.emitted.push(d.clamp(lo, hi));
        }
    }
}

impl DampingSignal {
    pub fn new(model: &DampingModel, params: &PlantParams, dt: f64) -> Result<Self> {
        model.validate()?;
        if !dt.is_finite() || dt <= 0.0 {
            return Err(invalid("executor.dt", "must be > 0"));
        }
        let source = match model {
            DampingModel::Constant { value } => Source::Constant(*value),
            DampingModel::Schedule { breakpoints } => Source::Schedule(breakpoints.clone()),
            DampingModel::TimeVarying {
                seed,
                time_constant,
                noise_scale,
                bias,
            } => Source::Noise(Box::new(FilteredNoise::new(
                *seed,
                *time_constant,
                *noise_scale,
                *bias,
                dt,
            ))),
        };
        Ok(Self {
            lo: params.d_lo,
            hi: params.d_hi,
            source,
        })
    }

    /// Damping for the grid step starting at `t` (index `grid_index`).
    pub fn at(&mut self, t: f64, grid_index: usize) -> f64 {
        let (lo, hi) = (self.lo, self.hi);
        match &mut self.source {
            Source::Constant(d) => d.clamp(lo, hi),
            Source::Schedule(points) => {
                let idx = points.partition_point(|p| p[0] <= t);
                points[idx.saturating_sub(1)][1].clamp(lo, hi)
            }
            Source::Noise(noise) => {
                noise.fill_to(grid_index, lo, hi);
                noise.emitted[grid_index]
            }
        }
    }
}

/// One-shot damping lookup. For time-varying models this regenerates the
/// sequence from the seed, so it is O(grid_index); simulations should hold a
/// [`DampingSignal`] instead.
pub fn damping_at(
    model: &DampingModel,
    params: &PlantParams,
    dt: f64,
    t: f64,
    grid_index: usize,
) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid("t", "must be finite and >= 0"));
    }
    Ok(DampingSignal::new(model, params, dt)?.at(t, grid_index))
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Right-hand side `(ẋ, ẍ)` of the plant between jumps.
pub fn flow_field(
    state: &MotionState,
    params: &PlantParams,
    d_now: f64,
    u_cont: f64,
    friction: &FrictionConfig,
) -> Result<(f64, f64)> {
    if !state.x.is_finite() || !state.v.is_finite() || !d_now.is_finite() || !u_cont.is_finite()
    {
        return Err(Error::NonFinite {
            context: "flow_field",
        });
    }
    if d_now < params.d_lo || d_now > params.d_hi {
        return Err(invalid(
            "d_now",
            format!("{d_now} outside [{}, {}]", params.d_lo, params.d_hi),
        ));
    }
    if friction.sticks(params, state.v, u_cont) {
        return Ok((0.0, 0.0));
    }
    let coulomb = if friction.active(params) {
        params.coulomb * sgn(state.v)
    } else {
        0.0
    };
    Ok((state.v, (u_cont - d_now * state.v - coulomb) / params.mass))
}
