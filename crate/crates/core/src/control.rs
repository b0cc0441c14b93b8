//! PD regulator, impulsive gain laws and the jump map.
//!
//! Impulses act only on velocity: the input couples through `B = (0, 1/m)ᵀ`,
//! so a jump never moves position or time.
//!
//! * Position axis (`x = 0`): `v⁺ = v − (2α/m)·sgn(v)` with `α = γ·m·|v|`,
//!   i.e. `v⁺ = (1 − 2γ)·v`. `γ = ½` lands on the origin, `γ = 1` mirrors the
//!   velocity forever, hence `½ ≤ γ < 1`.
//! * Velocity axis (`ẋ = 0`): `v⁺ = v − (c·β/m)·sgn(x)` with
//!   `β = |x|·d̄/(2c)`, which puts the state on the critically damped
//!   trajectory designed for the upper damping bound `d̄`: `v⁺ = −x·d̄/(2m)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{MotionState, PlantParams};
use crate::error::{invalid, Error, Result};

/// How the weighting `c` is chosen at a velocity-axis event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CMode {
    /// 2 at an effective zero crossing, 1 at a sticking stop.
    #[default]
    Auto,
    Fixed1,
    Fixed2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerParams {
    /// `α / (m·|ẋ₀|)`, in `[0.5, 1)`.
    pub gamma: f64,
    /// Upper damping bound the controller believes in; may differ from the
    /// plant's true `d_hi`.
    pub d_hi_assumed: f64,
    pub c_mode: CMode,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            gamma: 0.6,
            d_hi_assumed: 1.5,
            c_mode: CMode::Auto,
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.5 && self.gamma < 1.0) {
            return Err(invalid(
                "controller.gamma",
                format!("{} outside [0.5, 1)", self.gamma),
            ));
        }
        if !self.d_hi_assumed.is_finite() || self.d_hi_assumed <= 0.0 {
            return Err(invalid("controller.d_hi_assumed", "must be finite and > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guard {
    /// `x = 0`
    PositionAxis,
    /// `ẋ = 0`
    VelocityAxis,
}

impl Guard {
    pub fn as_str(self) -> &'static str {
        match self {
            Guard::PositionAxis => "position",
            Guard::VelocityAxis => "velocity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    /// Trajectory passes through the axis with nonzero acceleration.
    EffectiveCrossing,
    /// Motion stopped at the axis (stiction), no sign reversal.
    StickingStop,
}

/// Weighting `c` of the velocity-axis impulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weight {
    Single,
    Twofold,
}

impl Weight {
    pub fn value(self) -> f64 {
        match self {
            Weight::Single => 1.0,
            Weight::Twofold => 2.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Weight::Single => 1,
            Weight::Twofold => 2,
        }
    }
}

/// Sign of each coordinate on the way into an event, from the last nonzero
/// sample. Resolves `sgn(0)` in the jump map.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Approach {
    pub x_sign: f64,
    pub v_sign: f64,
}

impl Approach {
    pub fn observe(&mut self, s: &MotionState) {
        if s.x != 0.0 {
            self.x_sign = s.x.signum();
        }
        if s.v != 0.0 {
            self.v_sign = s.v.signum();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub t: f64,
    pub guard: Guard,
    pub crossing: CrossingKind,
    pub pre: MotionState,
    pub post: MotionState,
    /// α for position-axis events, β for velocity-axis events.
    pub gain: f64,
    pub c: Weight,
    /// `m·(v⁺ − v)`.
    pub impulse_momentum: f64,
    /// Event time came from the linear-interpolation fallback.
    pub interpolated: bool,
}

pub fn pd_control(state: &MotionState, params: &PlantParams) -> f64 {
    params.kp * (params.setpoint - state.x) - params.kd * state.v
}

pub fn alpha_gain(v0: f64, params: &PlantParams, ctrl: &ControllerParams) -> f64 {
    ctrl.gamma * params.mass * v0.abs()
}

pub fn beta_gain(x0: f64, c: Weight, ctrl: &ControllerParams) -> f64 {
    x0.abs() * ctrl.d_hi_assumed / (2.0 * c.value())
}

pub fn c_weight(kind: CrossingKind, ctrl: &ControllerParams) -> Weight {
    match (ctrl.c_mode, kind) {
        (CMode::Fixed1, _) => Weight::Single,
        (CMode::Fixed2, _) => Weight::Twofold,
        (CMode::Auto, CrossingKind::EffectiveCrossing) => Weight::Twofold,
        (CMode::Auto, CrossingKind::StickingStop) => Weight::Single,
    }
}

fn sign_or(value: f64, fallback: f64) -> f64 {
    if value != 0.0 {
        value.signum()
    } else {
        fallback
    }
}

/// Applies the jump for `guard` at `pre`. The returned event carries
/// `crossing = EffectiveCrossing` and `interpolated = false`; the executor
/// overwrites both from its detector.
pub fn jump_map(
    pre: &MotionState,
    guard: Guard,
    c: Weight,
    params: &PlantParams,
    ctrl: &ControllerParams,
    approach: &Approach,
    event_tol: f64,
) -> Result<(MotionState, JumpEvent)> {
    let m = params.mass;
    let (post_v, gain, c_used) = match guard {
        Guard::PositionAxis => {
            if pre.x.abs() > event_tol {
                return Err(Error::GuardMismatch {
                    guard: "position",
                    state: *pre,
                    tol: event_tol,
                });
            }
            // α/m = γ·|v| kept in ratio form so γ = ½ and γ = 1 are exact
            let per_mass = ctrl.gamma * pre.v.abs();
            let dv = 2.0 * per_mass;
            (
                pre.v - dv * sign_or(pre.v, approach.v_sign),
                per_mass * m,
                Weight::Twofold,
            )
        }
        Guard::VelocityAxis => {
            if pre.v.abs() > event_tol {
                return Err(Error::GuardMismatch {
                    guard: "velocity",
                    state: *pre,
                    tol: event_tol,
                });
            }
            let beta = beta_gain(pre.x, c, ctrl);
            let dv = c.value() * beta / m;
            (pre.v - dv * sign_or(pre.x, approach.x_sign), beta, c)
        }
    };
    let post = MotionState::new(pre.t, pre.x, post_v);
    let event = JumpEvent {
        t: pre.t,
        guard,
        crossing: CrossingKind::EffectiveCrossing,
        pre: *pre,
        post,
        gain,
        c: c_used,
        impulse_momentum: m * (post_v - pre.v),
        interpolated: false,
    };
    Ok((post, event))
}
