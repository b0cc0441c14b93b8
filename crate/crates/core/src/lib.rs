//! Impulse-based hybrid motion control of second-order plants.
//!
//! A PD-controlled mass with uncertain, possibly time-varying damping (and
//! optionally Coulomb friction) flows continuously until its state hits one
//! of the phase-plane axes. There an impulsive control action makes the
//! velocity jump:
//!
//! * on `x = 0` the velocity is scaled by `1 − 2γ`, killing most of it;
//! * on `ẋ = 0` (or at a stiction stop) the velocity is set to
//!   `−x·d̄/(2m)`, the start of a critically damped approach for the upper
//!   damping bound `d̄`.
//!
//! Modules:
//!
//! * [`dynamics`]: state, plant, damping models, flow field
//! * [`control`]: PD law, gain laws, jump map
//! * [`executor`]: fixed-step hybrid simulation with event location
//! * [`oracle`]: closed-form linear solutions for testing
//! * [`scenario`]: experiment presets and the scenario file format

pub mod control;
pub mod dynamics;
pub mod error;
pub mod executor;
pub mod oracle;
pub mod scenario;

pub use control::{
    alpha_gain, beta_gain, c_weight, jump_map, pd_control, Approach, CMode, ControllerParams,
    CrossingKind, Guard, JumpEvent, Weight,
};
pub use dynamics::{
    damping_at, flow_field, DampingModel, DampingSignal, FrictionConfig, MotionState, PlantParams,
};
pub use error::{Error, Result};
pub use executor::{
    detect_guard, initial_guard, locate_event, run, step_flow, ExecutorConfig, FlowContext, GuardContext,
    Located, Setup, SettlingReport, StepOutcome, Trajectory,
};
pub use oracle::{exact_state, velocity_jump_target, LinearSystem, Regime};
pub use scenario::{
    preset, run_scenario, Comparison, ScenarioOutcome, ScenarioSpec, Variants, PRESETS,
};
