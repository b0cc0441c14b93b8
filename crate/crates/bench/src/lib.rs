//! Shared inputs for the criterion benches.

use impulse_core::{preset, ScenarioSpec};

/// Presets worth timing end to end, with impulses on.
pub const BENCH_PRESETS: [&str; 3] = ["fig2_underdamped_hybrid", "fig4_timevarying", "fig5_coulomb"];

pub fn spec(name: &str) -> ScenarioSpec {
    preset(name).expect("built-in preset")
}
