//! Classic-control simulators: Mountain Car, Acrobot, CartPole and Puddle World.
//!
//! All four are plain value-semantics state machines. [`EnvSpec::step`] draws
//! any stochastic terms from the caller's random stream; [`EnvSpec::lookahead`]
//! evaluates the same transition with the noise fixed at its mean, which is
//! what greedy action selection uses as a one-step model.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvId {
    MountainCar,
    Acrobot,
    CartPole,
    PuddleWorld,
}

impl EnvId {
    pub const ALL: [EnvId; 4] = [
        EnvId::MountainCar,
        EnvId::Acrobot,
        EnvId::CartPole,
        EnvId::PuddleWorld,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvId::MountainCar => "mountain-car",
            EnvId::Acrobot => "acrobot",
            EnvId::CartPole => "cartpole",
            EnvId::PuddleWorld => "puddle-world",
        }
    }
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mountain-car" => Ok(EnvId::MountainCar),
            "acrobot" => Ok(EnvId::Acrobot),
            "cartpole" => Ok(EnvId::CartPole),
            "puddle-world" => Ok(EnvId::PuddleWorld),
            _ => Err(format!(
                "unknown env `{s}` (expected mountain-car, acrobot, cartpole or puddle-world)"
            )),
        }
    }
}

/// Physical state in the environment's own units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvState(pub Vec<f64>);

impl EnvState {
    pub fn new(values: Vec<f64>) -> Self {
        EnvState(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for EnvState {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub next_state: EnvState,
    pub reward: f64,
    pub terminal: bool,
}

/// Static description of one task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub id: EnvId,
    pub state_dim: usize,
    pub action_count: usize,
    pub gamma: f64,
    /// Per-dimension `(min, max)`; every state produced by `reset`/`step` lies inside.
    pub state_bounds: Vec<(f64, f64)>,
    /// Truncation horizon for training episodes, if the task has one.
    pub episode_cap: Option<u64>,
}

// Mountain Car
const MC_X_MIN: f64 = -1.2;
const MC_X_MAX: f64 = 0.5;
const MC_V_MAX: f64 = 0.07;

// Acrobot
const AB_DT: f64 = 0.2;
const AB_LINK_LENGTH_1: f64 = 1.0;
const AB_LINK_MASS_1: f64 = 1.0;
const AB_LINK_MASS_2: f64 = 1.0;
const AB_LINK_COM_1: f64 = 0.5;
const AB_LINK_COM_2: f64 = 0.5;
const AB_LINK_MOI: f64 = 1.0;
const AB_GRAVITY: f64 = 9.8;
const AB_MAX_VEL_1: f64 = 4.0 * PI;
const AB_MAX_VEL_2: f64 = 9.0 * PI;

// CartPole
const CP_GRAVITY: f64 = 9.8;
const CP_MASS_CART: f64 = 1.0;
const CP_MASS_POLE: f64 = 0.1;
const CP_HALF_LENGTH: f64 = 0.5;
const CP_FORCE: f64 = 10.0;
const CP_TAU: f64 = 0.02;
const CP_X_LIMIT: f64 = 2.4;
const CP_THETA_LIMIT: f64 = 12.0 * PI / 180.0;
const CP_VEL_LIMIT: f64 = 3.0;
const CP_ANG_VEL_LIMIT: f64 = 3.5;
pub const CARTPOLE_EPISODE_CAP: u64 = 500;

// Puddle World
const PW_STEP: f64 = 0.05;
const PW_NOISE_STD: f64 = 0.01;
const PW_PUDDLE_RADIUS: f64 = 0.1;
const PW_PENALTY_SCALE: f64 = 400.0;
const PW_GOAL_SUM: f64 = 1.9;
const PW_PUDDLES: [((f64, f64), (f64, f64)); 2] =
    [((0.1, 0.75), (0.45, 0.75)), ((0.45, 0.4), (0.45, 0.8))];

/// Puddle World action encoding.
pub mod puddle_action {
    pub const UP: usize = 0;
    pub const DOWN: usize = 1;
    pub const LEFT: usize = 2;
    pub const RIGHT: usize = 3;
    pub const STAY: usize = 4;
}

/// Mountain Car action encoding.
pub mod mountain_car_action {
    pub const REVERSE: usize = 0;
    pub const ZERO: usize = 1;
    pub const FORWARD: usize = 2;
}

impl EnvSpec {
    pub fn new(id: EnvId) -> Self {
        match id {
            EnvId::MountainCar => EnvSpec {
                id,
                state_dim: 2,
                action_count: 3,
                gamma: 0.99,
                state_bounds: vec![(MC_X_MIN, MC_X_MAX), (-MC_V_MAX, MC_V_MAX)],
                episode_cap: None,
            },
            EnvId::Acrobot => EnvSpec {
                id,
                state_dim: 4,
                action_count: 3,
                gamma: 0.99,
                state_bounds: vec![
                    (-PI, PI),
                    (-PI, PI),
                    (-AB_MAX_VEL_1, AB_MAX_VEL_1),
                    (-AB_MAX_VEL_2, AB_MAX_VEL_2),
                ],
                episode_cap: None,
            },
            EnvId::CartPole => EnvSpec {
                id,
                state_dim: 4,
                action_count: 2,
                gamma: 1.0,
                state_bounds: vec![
                    (-CP_X_LIMIT, CP_X_LIMIT),
                    (-CP_VEL_LIMIT, CP_VEL_LIMIT),
                    (-CP_THETA_LIMIT, CP_THETA_LIMIT),
                    (-CP_ANG_VEL_LIMIT, CP_ANG_VEL_LIMIT),
                ],
                episode_cap: Some(CARTPOLE_EPISODE_CAP),
            },
            EnvId::PuddleWorld => EnvSpec {
                id,
                state_dim: 2,
                action_count: 5,
                gamma: 0.999,
                state_bounds: vec![(0.0, 1.0), (0.0, 1.0)],
                episode_cap: None,
            },
        }
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> EnvState {
        match self.id {
            EnvId::MountainCar => EnvState(vec![rng.random_range(-0.6..-0.4), 0.0]),
            EnvId::Acrobot => EnvState(vec![0.0; 4]),
            EnvId::CartPole => EnvState((0..4).map(|_| rng.random_range(-0.05..=0.05)).collect()),
            EnvId::PuddleWorld => EnvState(vec![0.2, 0.4]),
        }
    }

    /// Advances one step, sampling noise from `rng` where the task has any.
    ///
    /// Panics if `action >= action_count`.
    pub fn step<R: Rng + ?Sized>(&self, s: &EnvState, action: usize, rng: &mut R) -> StepOutcome {
        self.check(s, action);
        let noise = match self.id {
            EnvId::PuddleWorld => {
                let nx: f64 = rng.sample(StandardNormal);
                let ny: f64 = rng.sample(StandardNormal);
                [nx * PW_NOISE_STD, ny * PW_NOISE_STD]
            }
            _ => [0.0, 0.0],
        };
        self.transition(s, action, noise)
    }

    /// Mean-dynamics model: `step` with every stochastic term at its mean.
    pub fn lookahead(&self, s: &EnvState, action: usize) -> StepOutcome {
        self.check(s, action);
        self.transition(s, action, [0.0, 0.0])
    }

    /// Whether `s` already satisfies the task's goal condition.
    pub fn is_terminal(&self, s: &EnvState) -> bool {
        match self.id {
            EnvId::MountainCar => s[0] >= MC_X_MAX,
            EnvId::Acrobot => acrobot_goal(s),
            EnvId::CartPole => s[0].abs() > CP_X_LIMIT || s[2].abs() > CP_THETA_LIMIT,
            EnvId::PuddleWorld => s[0] + s[1] >= PW_GOAL_SUM,
        }
    }

    fn check(&self, s: &EnvState, action: usize) {
        assert!(
            action < self.action_count,
            "action {action} out of range for {} ({} actions)",
            self.id,
            self.action_count
        );
        assert_eq!(
            s.len(),
            self.state_dim,
            "state dimension mismatch for {}",
            self.id
        );
    }

    fn transition(&self, s: &EnvState, action: usize, noise: [f64; 2]) -> StepOutcome {
        match self.id {
            EnvId::MountainCar => mountain_car(s, action),
            EnvId::Acrobot => acrobot(s, action),
            EnvId::CartPole => cartpole(s, action),
            EnvId::PuddleWorld => puddle_world(s, action, noise),
        }
    }
}

fn mountain_car(s: &EnvState, action: usize) -> StepOutcome {
    let (x, v) = (s[0], s[1]);
    let throttle = action as f64 - 1.0;
    let mut v1 = (v + 0.001 * throttle - 0.0025 * (3.0 * x).cos()).clamp(-MC_V_MAX, MC_V_MAX);
    let x1 = (x + v1).clamp(MC_X_MIN, MC_X_MAX);
    if x1 <= MC_X_MIN {
        v1 = 0.0;
    }
    let terminal = x1 >= MC_X_MAX;
    StepOutcome {
        next_state: EnvState(vec![x1, v1]),
        reward: if terminal { 0.0 } else { -1.0 },
        terminal,
    }
}

fn acrobot_goal(s: &[f64]) -> bool {
    -s[0].cos() - (s[0] + s[1]).cos() > 1.0
}

fn acrobot_derivs(y: [f64; 4], torque: f64) -> [f64; 4] {
    let (m1, m2) = (AB_LINK_MASS_1, AB_LINK_MASS_2);
    let (l1, lc1, lc2) = (AB_LINK_LENGTH_1, AB_LINK_COM_1, AB_LINK_COM_2);
    let (i1, i2) = (AB_LINK_MOI, AB_LINK_MOI);
    let g = AB_GRAVITY;
    let [theta1, theta2, dtheta1, dtheta2] = y;

    let d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos()) + i1 + i2;
    let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
    let phi2 = m2 * lc2 * g * (theta1 + theta2 - PI / 2.0).cos();
    let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * theta2.sin()
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
        + (m1 * lc1 + m2 * l1) * g * (theta1 - PI / 2.0).cos()
        + phi2;
    let ddtheta2 =
        (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * theta2.sin() - phi2)
            / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    [dtheta1, dtheta2, ddtheta1, ddtheta2]
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = (x + PI).rem_euclid(two_pi) - PI;
    if y < -PI {
        y = -PI;
    }
    y
}

fn acrobot(s: &EnvState, action: usize) -> StepOutcome {
    let torque = action as f64 - 1.0;
    let y0 = [s[0], s[1], s[2], s[3]];
    let add = |a: [f64; 4], b: [f64; 4], h: f64| -> [f64; 4] {
        [
            a[0] + h * b[0],
            a[1] + h * b[1],
            a[2] + h * b[2],
            a[3] + h * b[3],
        ]
    };
    let k1 = acrobot_derivs(y0, torque);
    let k2 = acrobot_derivs(add(y0, k1, AB_DT / 2.0), torque);
    let k3 = acrobot_derivs(add(y0, k2, AB_DT / 2.0), torque);
    let k4 = acrobot_derivs(add(y0, k3, AB_DT), torque);
    let mut y = [0.0; 4];
    for i in 0..4 {
        y[i] = y0[i] + AB_DT / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let next = vec![
        wrap_angle(y[0]),
        wrap_angle(y[1]),
        y[2].clamp(-AB_MAX_VEL_1, AB_MAX_VEL_1),
        y[3].clamp(-AB_MAX_VEL_2, AB_MAX_VEL_2),
    ];
    let terminal = acrobot_goal(&next);
    StepOutcome {
        next_state: EnvState(next),
        reward: if terminal { 0.0 } else { -1.0 },
        terminal,
    }
}

fn cartpole(s: &EnvState, action: usize) -> StepOutcome {
    let (x, x_dot, theta, theta_dot) = (s[0], s[1], s[2], s[3]);
    let force = if action == 1 { CP_FORCE } else { -CP_FORCE };
    let total_mass = CP_MASS_CART + CP_MASS_POLE;
    let pole_mass_length = CP_MASS_POLE * CP_HALF_LENGTH;
    let (sin, cos) = theta.sin_cos();

    let temp = (force + pole_mass_length * theta_dot * theta_dot * sin) / total_mass;
    let theta_acc = (CP_GRAVITY * sin - cos * temp)
        / (CP_HALF_LENGTH * (4.0 / 3.0 - CP_MASS_POLE * cos * cos / total_mass));
    let x_acc = temp - pole_mass_length * theta_acc * cos / total_mass;

    let x1 = x + CP_TAU * x_dot;
    let x_dot1 = x_dot + CP_TAU * x_acc;
    let theta1 = theta + CP_TAU * theta_dot;
    let theta_dot1 = theta_dot + CP_TAU * theta_acc;

    let terminal = x1.abs() > CP_X_LIMIT || theta1.abs() > CP_THETA_LIMIT;
    StepOutcome {
        next_state: EnvState(vec![
            x1.clamp(-CP_X_LIMIT, CP_X_LIMIT),
            x_dot1.clamp(-CP_VEL_LIMIT, CP_VEL_LIMIT),
            theta1.clamp(-CP_THETA_LIMIT, CP_THETA_LIMIT),
            theta_dot1.clamp(-CP_ANG_VEL_LIMIT, CP_ANG_VEL_LIMIT),
        ]),
        reward: 1.0,
        terminal,
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// Distance from `(x, y)` to the nearest puddle axis segment.
pub fn puddle_distance(x: f64, y: f64) -> f64 {
    PW_PUDDLES
        .iter()
        .map(|&(a, b)| segment_distance((x, y), a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Non-positive puddle penalty at `(x, y)`: `-400 * (0.1 - d)` inside a puddle, else 0.
pub fn puddle_penalty(x: f64, y: f64) -> f64 {
    let d = puddle_distance(x, y);
    if d < PW_PUDDLE_RADIUS {
        -PW_PENALTY_SCALE * (PW_PUDDLE_RADIUS - d)
    } else {
        0.0
    }
}

fn puddle_world(s: &EnvState, action: usize, noise: [f64; 2]) -> StepOutcome {
    let (dx, dy) = match action {
        puddle_action::UP => (0.0, PW_STEP),
        puddle_action::DOWN => (0.0, -PW_STEP),
        puddle_action::LEFT => (-PW_STEP, 0.0),
        puddle_action::RIGHT => (PW_STEP, 0.0),
        _ => (0.0, 0.0),
    };
    let x = (s[0] + dx + noise[0]).clamp(0.0, 1.0);
    let y = (s[1] + dy + noise[1]).clamp(0.0, 1.0);
    let terminal = x + y >= PW_GOAL_SUM;
    let reward = if terminal {
        0.0
    } else {
        -1.0 + puddle_penalty(x, y)
    };
    StepOutcome {
        next_state: EnvState(vec![x, y]),
        reward,
        terminal,
    }
}

pub const GRID_POSITIONS: usize = 171;
pub const GRID_VELOCITIES: usize = 141;

/// The 171 × 141 Mountain Car evaluation grid, position-major.
pub fn grid_states(spec: &EnvSpec) -> Result<Vec<EnvState>> {
    if spec.id != EnvId::MountainCar {
        return Err(Error::InvalidArgument(format!(
            "grid evaluation is only defined for mountain-car, not {}",
            spec.id
        )));
    }
    let mut out = Vec::with_capacity(GRID_POSITIONS * GRID_VELOCITIES);
    for i in 0..GRID_POSITIONS {
        let x = (i as f64 - 120.0) / 100.0;
        for j in 0..GRID_VELOCITIES {
            let v = (j as f64 - 70.0) / 1000.0;
            out.push(EnvState(vec![x, v]));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::{stream, Stream};
    use approx::assert_abs_diff_eq;

    #[test]
    fn spec_shapes() {
        let expect = [
            (EnvId::MountainCar, 2, 3, 0.99),
            (EnvId::Acrobot, 4, 3, 0.99),
            (EnvId::CartPole, 4, 2, 1.0),
            (EnvId::PuddleWorld, 2, 5, 0.999),
        ];
        for (id, dim, actions, gamma) in expect {
            let spec = EnvSpec::new(id);
            assert_eq!(spec.state_dim, dim);
            assert_eq!(spec.action_count, actions);
            assert_eq!(spec.gamma, gamma);
            assert_eq!(spec.state_bounds.len(), dim);
            assert_eq!(id.name().parse::<EnvId>().unwrap(), id);
        }
    }

    #[test]
    fn resets() {
        let mut rng = stream(3, Stream::Env, 0);
        let mc = EnvSpec::new(EnvId::MountainCar);
        for _ in 0..1000 {
            let s = mc.reset(&mut rng);
            assert!((-0.6..-0.4).contains(&s[0]));
            assert_eq!(s[1], 0.0);
        }
        assert_eq!(EnvSpec::new(EnvId::Acrobot).reset(&mut rng).0, vec![0.0; 4]);
        assert_eq!(
            EnvSpec::new(EnvId::PuddleWorld).reset(&mut rng).0,
            vec![0.2, 0.4]
        );
        let cp = EnvSpec::new(EnvId::CartPole);
        for _ in 0..100 {
            assert!(cp.reset(&mut rng).iter().all(|c| c.abs() <= 0.05));
        }
    }

    #[test]
    fn mountain_car_zero_throttle() {
        let mc = EnvSpec::new(EnvId::MountainCar);
        let out = mc.lookahead(&EnvState(vec![-0.5, 0.0]), mountain_car_action::ZERO);
        assert_abs_diff_eq!(out.next_state[1], -0.000176843, epsilon = 1e-9);
        assert_abs_diff_eq!(out.next_state[0], -0.500176843, epsilon = 1e-9);
        assert_eq!(out.reward, -1.0);
        assert!(!out.terminal);
    }

    #[test]
    fn mountain_car_reaches_goal() {
        let mc = EnvSpec::new(EnvId::MountainCar);
        let out = mc.lookahead(&EnvState(vec![0.499, 0.07]), mountain_car_action::FORWARD);
        assert!(out.terminal);
        assert_eq!(out.reward, 0.0);
        assert_eq!(out.next_state[0], 0.5);
        assert_eq!(out.next_state[1], 0.07);
    }

    #[test]
    fn mountain_car_left_wall_stops() {
        let mc = EnvSpec::new(EnvId::MountainCar);
        let out = mc.lookahead(&EnvState(vec![-1.19, -0.05]), mountain_car_action::REVERSE);
        assert_eq!(out.next_state.0, vec![-1.2, 0.0]);
    }

    #[test]
    fn puddle_rewards() {
        let pw = EnvSpec::new(EnvId::PuddleWorld);
        let on_axis = pw.lookahead(&EnvState(vec![0.3, 0.75]), puddle_action::STAY);
        assert_abs_diff_eq!(on_axis.reward, -41.0, epsilon = 1e-12);
        let clear = pw.lookahead(&EnvState(vec![0.3, 0.9]), puddle_action::STAY);
        assert_eq!(clear.reward, -1.0);
        let up = pw.lookahead(&EnvState(vec![0.5, 0.5]), puddle_action::UP);
        assert_eq!(up.next_state.0, vec![0.5, 0.55]);
    }

    #[test]
    fn puddle_goal_is_terminal_with_zero_reward() {
        let pw = EnvSpec::new(EnvId::PuddleWorld);
        let out = pw.lookahead(&EnvState(vec![0.95, 0.93]), puddle_action::RIGHT);
        assert!(out.terminal);
        assert_eq!(out.reward, 0.0);
    }

    #[test]
    fn puddle_noise_and_clipping() {
        let pw = EnvSpec::new(EnvId::PuddleWorld);
        let mut rng = stream(1, Stream::Env, 0);
        let mut moved = 0;
        for _ in 0..200 {
            let out = pw.step(&EnvState(vec![0.0, 0.5]), puddle_action::LEFT, &mut rng);
            assert!(out.next_state.iter().all(|c| (0.0..=1.0).contains(c)));
            if out.next_state[1] != 0.5 {
                moved += 1;
            }
        }
        assert!(moved > 190);
    }

    #[test]
    fn deterministic_envs_match_lookahead() {
        let mut rng = stream(9, Stream::Env, 0);
        for id in [EnvId::MountainCar, EnvId::Acrobot, EnvId::CartPole] {
            let spec = EnvSpec::new(id);
            let mut s = spec.reset(&mut rng);
            for k in 0..50 {
                let a = k % spec.action_count;
                let stepped = spec.step(&s, a, &mut rng);
                assert_eq!(stepped, spec.lookahead(&s, a));
                if stepped.terminal {
                    break;
                }
                s = stepped.next_state;
            }
        }
    }

    #[test]
    fn acrobot_swings_and_stays_bounded() {
        let spec = EnvSpec::new(EnvId::Acrobot);
        let mut s = EnvState(vec![0.0; 4]);
        let mut reached = false;
        // energy pumping: torque along the second joint's velocity
        for _ in 0..2000 {
            let a = if s[3] >= 0.0 { 2 } else { 0 };
            let out = spec.lookahead(&s, a);
            for (c, &(lo, hi)) in out.next_state.iter().zip(&spec.state_bounds) {
                assert!(*c >= lo && *c <= hi);
            }
            if out.terminal {
                reached = true;
                break;
            }
            s = out.next_state;
        }
        assert!(reached);
    }

    #[test]
    fn acrobot_rest_is_equilibrium() {
        let spec = EnvSpec::new(EnvId::Acrobot);
        let out = spec.lookahead(&EnvState(vec![0.0; 4]), 1);
        for c in out.next_state.iter() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cartpole_falls_and_rewards_one() {
        let spec = EnvSpec::new(EnvId::CartPole);
        let mut s = EnvState(vec![0.0, 0.0, 0.01, 0.0]);
        let mut steps = 0;
        loop {
            let out = spec.lookahead(&s, 1);
            assert_eq!(out.reward, 1.0);
            steps += 1;
            if out.terminal {
                break;
            }
            s = out.next_state;
            assert!(steps < 500);
        }
        assert!(steps < 100);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn invalid_action_panics() {
        let spec = EnvSpec::new(EnvId::CartPole);
        spec.lookahead(&EnvState(vec![0.0; 4]), 2);
    }

    #[test]
    fn grid() {
        let mc = EnvSpec::new(EnvId::MountainCar);
        let g = grid_states(&mc).unwrap();
        assert_eq!(g.len(), 24_111);
        assert_eq!(g[0].0, vec![-1.2, -0.07]);
        assert_eq!(g[g.len() - 1].0, vec![0.5, 0.07]);
        assert_eq!(g[1].0, vec![-1.2, -0.069]);
        assert!(grid_states(&EnvSpec::new(EnvId::Acrobot)).is_err());
    }

    #[test]
    fn wrap_angle_range() {
        for k in -20..20 {
            let a = wrap_angle(k as f64 * 0.7);
            assert!((-PI..=PI).contains(&a));
            assert_abs_diff_eq!((a - k as f64 * 0.7).sin(), 0.0, epsilon = 1e-9);
        }
    }
}
