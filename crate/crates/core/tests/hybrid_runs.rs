use impulse_core::{
    preset, run, run_scenario, DampingModel, Error, Guard, MotionState, ScenarioSpec, Trajectory,
    Variants,
};
use proptest::prelude::*;

fn fig2_with(d: f64) -> ScenarioSpec {
    let mut spec = preset("fig2_underdamped_hybrid").unwrap();
    spec.damping = DampingModel::Constant { value: d };
    spec
}

fn simulate(spec: &ScenarioSpec, impulses: bool) -> Trajectory {
    run(spec.initial, &spec.setup(), impulses).unwrap()
}

fn energy(spec: &ScenarioSpec, s: &MotionState) -> f64 {
    0.5 * spec.plant.mass * s.v * s.v + 0.5 * spec.plant.kp * s.x * s.x
}

fn check_jump_contracts(spec: &ScenarioSpec, tr: &Trajectory) {
    let tol = spec.executor.event_tol;
    let gamma = spec.controller.gamma;
    let target = spec.controller.d_hi_assumed / (2.0 * spec.plant.mass);
    for ev in &tr.jumps {
        assert_eq!(ev.post.x, ev.pre.x);
        assert_eq!(ev.post.t, ev.pre.t);
        match ev.guard {
            Guard::PositionAxis => {
                assert!(ev.pre.x.abs() <= tol, "{ev:?}");
                let expect = (1.0 - 2.0 * gamma).abs() * ev.pre.v.abs();
                assert!((ev.post.v.abs() - expect).abs() <= 1e-12, "{ev:?}");
            }
            Guard::VelocityAxis => {
                assert!(ev.pre.v.abs() <= tol, "{ev:?}");
                assert!((ev.post.v + ev.pre.x * target).abs() <= 1e-12, "{ev:?}");
            }
        }
    }
    assert!(tr.jumps.windows(2).all(|w| w[0].t <= w[1].t));
    assert!(tr.samples.windows(2).all(|w| w[0].t <= w[1].t));
    assert_eq!(tr.samples.len(), tr.damping.len());
}

#[test]
fn baselines_oscillate_or_not() {
    let under = preset("fig1_underdamped").unwrap();
    let tr = simulate(&under, false);
    assert!(tr.sign_changes() >= 3);
    assert!(tr.metrics.overshoot > 0.1);
    assert!(tr.jumps.is_empty());

    let over = preset("fig1_overdamped").unwrap();
    let tr = simulate(&over, false);
    assert_eq!(tr.sign_changes(), 0);
    assert!(tr.metrics.overshoot < 1e-6);
}

#[test]
fn hybrid_run_is_faster_on_low_damping() {
    let out = run_scenario(&preset("fig2_underdamped_hybrid").unwrap()).unwrap();
    let cmp = out.comparison.unwrap();
    assert!(cmp.on.settling_time.unwrap() < cmp.off.settling_time.unwrap());
    assert!(cmp.jump_count >= 1);
}

#[test]
fn resting_offset_gets_an_initial_kick() {
    let spec = fig2_with(0.15);
    let tr = simulate(&spec, true);
    let first = tr.jumps[0];
    assert_eq!(first.t, 0.0);
    assert_eq!(first.guard, Guard::VelocityAxis);
    assert!((first.post.v - -3.75).abs() < 1e-12);
}

#[test]
fn runs_are_deterministic() {
    let spec = preset("fig4_timevarying").unwrap();
    let a = simulate(&spec, true);
    let b = simulate(&spec, true);
    assert_eq!(a, b);
    let c = simulate(&spec.clone().with_seed(7), true);
    assert_ne!(a.damping, c.damping);
}

#[test]
fn time_varying_trace_respects_bounds() {
    for seed in [1, 42, 1234] {
        let spec = preset("fig4_timevarying").unwrap().with_seed(seed);
        let tr = simulate(&spec, false);
        let p = spec.plant;
        assert!(tr.damping.iter().all(|d| (p.d_lo..=p.d_hi).contains(d)));
        let spread = tr.damping.iter().copied().fold(f64::MIN, f64::max)
            - tr.damping.iter().copied().fold(f64::MAX, f64::min);
        assert!(spread > 0.1, "seed {seed}: trace barely varies");
    }
}

#[test]
fn coulomb_stall_and_escape() {
    let spec = preset("fig5_coulomb").unwrap();
    let off = simulate(&spec, false);
    let x = off.metrics.final_state.x;
    assert!(x > 0.01 && x <= 0.1, "{x}");
    assert_eq!(off.metrics.final_state.v, 0.0);

    let on = simulate(&spec, true);
    assert!(on.first_below(0.01).is_some());
    assert!(on.jumps.len() >= 2);
    assert!(on.metrics.jump_count < 10_000);
    check_jump_contracts(&spec, &on);
}

#[test]
fn jump_cap_reports_partial_trajectory() {
    let mut spec = fig2_with(0.15);
    spec.executor.max_jumps = 3;
    match run(spec.initial, &spec.setup(), true) {
        Err(Error::ZenoSuspected {
            max_jumps, partial, ..
        }) => {
            assert_eq!(max_jumps, 3);
            assert_eq!(partial.jumps.len(), 3);
        }
        other => panic!("expected a Zeno error, got {other:?}"),
    }
}

#[test]
fn gamma_sweep_converges() {
    for gamma in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let mut spec = fig2_with(0.15);
        spec.controller.gamma = gamma;
        let tr = simulate(&spec, true);
        assert!(tr.first_below(0.01).is_some(), "gamma {gamma}");
        check_jump_contracts(&spec, &tr);
    }
}

#[test]
fn controller_bound_mismatch_still_converges() {
    // controller believes the damping is larger than it ever is
    let mut spec = fig2_with(0.15);
    spec.controller.d_hi_assumed = 3.0;
    let tr = simulate(&spec, true);
    assert!(tr.first_below(0.01).is_some());
    check_jump_contracts(&spec, &tr);
}

#[test]
fn off_only_scenario_has_no_comparison() {
    let mut spec = fig2_with(0.5);
    spec.variants = Variants::ImpulsesOff;
    let out = run_scenario(&spec).unwrap();
    assert!(out.on.is_none() && out.comparison.is_none());
    assert!(out.off.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn baseline_energy_never_increases(d in 0.15f64..=1.5, x0 in -1.0f64..1.0, v0 in -3.0f64..3.0) {
        let mut spec = fig2_with(d);
        spec.executor.t_end = 1.0;
        spec.initial = MotionState::new(0.0, x0, v0);
        let tr = simulate(&spec, false);
        for w in tr.samples.windows(2) {
            prop_assert!(energy(&spec, &w[1]) <= energy(&spec, &w[0]) + 1e-8);
        }
    }

    #[test]
    fn impulses_converge_for_any_constant_damping(d in 0.15f64..=1.5) {
        let spec = fig2_with(d);
        let tr = simulate(&spec, true);
        let hit = tr.samples.iter().any(|s| s.x.abs() < 1e-2 && s.v.abs() < 1e-1);
        prop_assert!(hit, "d = {}", d);
        check_jump_contracts(&spec, &tr);
    }

    #[test]
    fn jump_contracts_hold_from_random_starts(x0 in -1.0f64..1.0, v0 in -5.0f64..5.0, seed in 0u64..1000) {
        let mut spec = preset("fig4_timevarying").unwrap().with_seed(seed);
        spec.executor.t_end = 1.0;
        spec.initial = MotionState::new(0.0, x0, v0);
        let tr = simulate(&spec, true);
        check_jump_contracts(&spec, &tr);
        prop_assert!(tr.metrics.jump_count < 10_000);
    }
}
