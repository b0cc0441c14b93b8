//! Closed-form solutions of the linear closed loop (no friction, constant
//! damping, no impulses). Used as independent references for the executor.

use crate::dynamics::{MotionState, PlantParams};

/// Relative width of the critically damped band on the discriminant.
pub const CRITICAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

/// `ẋ = A·x + B·z` with `A = [[0, 1], [−K/m, −(d+D)/m]]`, `B = (0, 1/m)ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSystem {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    mass: f64,
    stiffness: f64,
    total_damping: f64,
}

impl LinearSystem {
    pub fn new(params: &PlantParams, d: f64) -> Self {
        let m = params.mass;
        Self {
            a: [[0.0, 1.0], [-params.kp / m, -(d + params.kd) / m]],
            b: [0.0, 1.0 / m],
            mass: m,
            stiffness: params.kp,
            total_damping: d + params.kd,
        }
    }

    /// `(d+D)² − 4mK`.
    pub fn discriminant(&self) -> f64 {
        self.total_damping * self.total_damping - 4.0 * self.mass * self.stiffness
    }

    pub fn regime(&self) -> Regime {
        let disc = self.discriminant();
        let scale = 4.0 * self.mass * self.stiffness;
        if disc.abs() <= CRITICAL_TOL * scale {
            Regime::Critical
        } else if disc < 0.0 {
            Regime::Underdamped
        } else {
            Regime::Overdamped
        }
    }

    /// Damped natural frequency `√(K/m − σ²)`; zero unless underdamped.
    pub fn damped_frequency(&self) -> f64 {
        let sigma = self.decay_rate();
        (self.stiffness / self.mass - sigma * sigma).max(0.0).sqrt()
    }

    /// `σ = (d+D)/(2m)`; the double pole is `−σ` when critically damped.
    pub fn decay_rate(&self) -> f64 {
        self.total_damping / (2.0 * self.mass)
    }
}

/// `exp(A·(t − t₀))·x₀` from the eigenstructure.
pub fn exact_state(sys: &LinearSystem, x0: &MotionState, t: f64) -> MotionState {
    let tau = t - x0.t;
    if tau == 0.0 {
        return *x0;
    }
    let (p, v) = (x0.x, x0.v);
    let sigma = sys.decay_rate();
    let w0_sq = sys.stiffness / sys.mass;
    let (x, xd) = match sys.regime() {
        Regime::Underdamped => {
            let wd = sys.damped_frequency();
            let (s, c) = (wd * tau).sin_cos();
            let e = (-sigma * tau).exp();
            (
                e * (p * c + (v + sigma * p) / wd * s),
                e * (v * c - (w0_sq * p + sigma * v) / wd * s),
            )
        }
        Regime::Critical => {
            let lambda = -sigma;
            let e = (lambda * tau).exp();
            let c2 = v - lambda * p;
            (e * (p + c2 * tau), e * (v + lambda * c2 * tau))
        }
        Regime::Overdamped => {
            let root = (sigma * sigma - w0_sq).sqrt();
            let (r1, r2) = (-sigma + root, -sigma - root);
            let (e1, e2) = ((r1 * tau).exp(), (r2 * tau).exp());
            let (k1, k2) = (v - r2 * p, v - r1 * p);
            let den = r1 - r2;
            ((k1 * e1 - k2 * e2) / den, (r1 * k1 * e1 - r2 * k2 * e2) / den)
        }
    };
    MotionState::new(t, x, xd)
}

/// Velocity needed at a velocity-axis stop at `x0`: the exact requirement
/// `−x0·(d̄ − d)/(2m)` and the robust target `−x0·d̄/(2m)`.
pub fn velocity_jump_target(x0: f64, d_true: f64, d_hi: f64, m: f64) -> (f64, f64) {
    (-x0 * (d_hi - d_true) / (2.0 * m), -x0 * d_hi / (2.0 * m))
}
