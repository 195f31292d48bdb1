//! Two-timescale update engine and the single-timescale baselines.
//!
//! The slow process does residual-gradient descent on the squared one-step TD
//! error of `V_{theta_bar, w}` over the stacked vector `(w, theta_bar)`, and is
//! projected onto a Euclidean ball. The fast process is semi-gradient TD(0) on
//! `theta` with the attentive features at the current `w`.

use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::features::{attention_with_jacobian, AttentionWeights, KernelSpec, NormalizedState};
use crate::vfa::{dot, TileApproximator, ValueApproximator};
use crate::{Error, Result};

/// Exponentially decaying step size `initial * decay^t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub initial: f64,
    pub decay: f64,
}

impl StepSchedule {
    pub fn new(initial: f64, decay: f64) -> Result<Self> {
        if !(initial > 0.0 && initial.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "schedule initial value must be positive, got {initial}"
            )));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "schedule decay must lie in (0, 1], got {decay}"
            )));
        }
        Ok(StepSchedule { initial, decay })
    }

    pub fn value(&self, t: u64) -> f64 {
        self.initial * self.decay.powf(t as f64)
    }
}

pub fn schedule_value(schedule: &StepSchedule, t: u64) -> f64 {
    schedule.value(t)
}

/// Euclidean ball of radius `radius` around the origin, counting how often it clips.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSet {
    pub radius: f64,
    pub trigger_count: u64,
}

impl ProjectionSet {
    pub fn new(radius: f64) -> Result<Self> {
        if radius > 0.0 && !radius.is_nan() {
            Ok(ProjectionSet {
                radius,
                trigger_count: 0,
            })
        } else {
            Err(Error::InvalidArgument(format!(
                "projection radius must be positive, got {radius}"
            )))
        }
    }

    /// Projects the concatenation of `parts` onto the ball, in place.
    pub fn project_stacked(&mut self, parts: &mut [&mut [f64]]) -> bool {
        let norm = parts
            .iter()
            .flat_map(|p| p.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt();
        if norm <= self.radius {
            return false;
        }
        let scale = self.radius / norm;
        for p in parts.iter_mut() {
            for x in p.iter_mut() {
                *x *= scale;
            }
        }
        self.trigger_count += 1;
        true
    }
}

pub fn project(x: &[f64], set: &mut ProjectionSet) -> Vec<f64> {
    let mut out = x.to_vec();
    set.project_stacked(&mut [&mut out]);
    out
}

/// Parameters of both timescales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerState {
    /// Fast weights of the linear head.
    pub theta: Vec<f64>,
    /// Slow auxiliary weights paired with `w`.
    pub theta_bar: Vec<f64>,
    pub w: AttentionWeights,
    pub t: u64,
}

impl LearnerState {
    /// Zero-initialized state: zero values and uniform attention.
    pub fn new(state_dim: usize) -> Self {
        LearnerState {
            theta: Vec::new(),
            theta_bar: Vec::new(),
            w: AttentionWeights::zeros(state_dim),
            t: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta
            .iter()
            .chain(&self.theta_bar)
            .chain(self.w.iter())
            .all(|x| x.is_finite())
    }

    pub fn fast<'a>(
        &'a self,
        kernel: KernelSpec,
        dictionary: &'a Dictionary,
    ) -> ValueApproximator<'a> {
        ValueApproximator::new(
            &self.theta,
            kernel,
            crate::vfa::Sparsifier::Attentive(&self.w),
            dictionary,
        )
    }
}

/// One observed transition between normalized states.
#[derive(Clone, Copy, Debug)]
pub struct Transition<'a> {
    pub state: &'a NormalizedState,
    pub reward: f64,
    pub next: &'a NormalizedState,
    pub terminal: bool,
    pub gamma: f64,
}

pub fn td_error(reward: f64, gamma: f64, v_next: f64, v_cur: f64, terminal: bool) -> f64 {
    let bootstrap = if terminal { 0.0 } else { gamma * v_next };
    reward + bootstrap - v_cur
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TdErrorPair {
    pub delta_slow: f64,
    pub delta_fast: f64,
}

/// Kernel values, attention and its Jacobian at one state.
struct Expansion {
    features: Vec<f64>,
    kernels: Vec<f64>,
    jacobian: Vec<Vec<f64>>,
}

impl Expansion {
    fn new(w: &[f64], s: &NormalizedState, dictionary: &Dictionary, kernel: &KernelSpec) -> Self {
        let protos = dictionary.prototypes();
        let grad = attention_with_jacobian(w, s, protos);
        let kernels: Vec<f64> = protos.iter().map(|p| kernel.eval(s, p)).collect();
        let features = kernels
            .iter()
            .zip(&grad.weights)
            .map(|(k, a)| k * a)
            .collect();
        Expansion {
            features,
            kernels,
            jacobian: grad.jacobian,
        }
    }

    /// `d V_{theta_bar, w} / d w = sum_i theta_bar_i k_i (d a_i / d w)`.
    fn grad_w(&self, theta_bar: &[f64], dim: usize) -> Vec<f64> {
        let mut g = vec![0.0; dim];
        for ((tb, k), row) in theta_bar.iter().zip(&self.kernels).zip(&self.jacobian) {
            let c = tb * k;
            for (gk, rk) in g.iter_mut().zip(row) {
                *gk += c * rk;
            }
        }
        g
    }
}

fn check_dims(state: &LearnerState, dictionary: &Dictionary) {
    assert_eq!(
        state.theta.len(),
        dictionary.len(),
        "theta length does not match dictionary size"
    );
    assert_eq!(
        state.theta_bar.len(),
        dictionary.len(),
        "theta_bar length does not match dictionary size"
    );
}

/// Slow-process increment before scaling by the step size.
#[derive(Clone, Debug, PartialEq)]
pub struct SlowDirection {
    pub delta: f64,
    /// `delta * (dV(S)/dw - gamma dV(S')/dw)`
    pub w: Vec<f64>,
    /// `delta * (phi_w(S) - gamma phi_w(S'))`
    pub theta_bar: Vec<f64>,
}

struct Pass {
    cur: Expansion,
    next: Option<Expansion>,
}

impl Pass {
    fn new(
        state: &LearnerState,
        dictionary: &Dictionary,
        kernel: &KernelSpec,
        tr: &Transition,
    ) -> Self {
        check_dims(state, dictionary);
        let cur = Expansion::new(&state.w, tr.state, dictionary, kernel);
        let next = (!tr.terminal).then(|| Expansion::new(&state.w, tr.next, dictionary, kernel));
        Pass { cur, next }
    }

    fn delta(&self, weights: &[f64], tr: &Transition) -> f64 {
        let v_next = self
            .next
            .as_ref()
            .map_or(0.0, |n| dot(weights, &n.features));
        td_error(
            tr.reward,
            tr.gamma,
            v_next,
            dot(weights, &self.cur.features),
            tr.terminal,
        )
    }

    fn slow(&self, state: &LearnerState, tr: &Transition) -> SlowDirection {
        let delta = self.delta(&state.theta_bar, tr);
        let dim = state.w.len();
        let mut gw = self.cur.grad_w(&state.theta_bar, dim);
        let mut gtb = self.cur.features.clone();
        if let Some(next) = &self.next {
            for (g, n) in gw.iter_mut().zip(next.grad_w(&state.theta_bar, dim)) {
                *g -= tr.gamma * n;
            }
            for (g, n) in gtb.iter_mut().zip(&next.features) {
                *g -= tr.gamma * n;
            }
        }
        gw.iter_mut().for_each(|g| *g *= delta);
        gtb.iter_mut().for_each(|g| *g *= delta);
        SlowDirection {
            delta,
            w: gw,
            theta_bar: gtb,
        }
    }
}

/// Residual-gradient direction on `(w, theta_bar)` for one transition.
///
/// Equals `-1/2` times the gradient of the squared TD error of `V_{theta_bar, w}`.
pub fn slow_direction(
    state: &LearnerState,
    dictionary: &Dictionary,
    kernel: &KernelSpec,
    tr: &Transition,
) -> SlowDirection {
    Pass::new(state, dictionary, kernel, tr).slow(state, tr)
}

fn apply_slow(
    state: &mut LearnerState,
    dir: &SlowDirection,
    alpha: f64,
    projection: &mut ProjectionSet,
) {
    for (x, d) in state.theta_bar.iter_mut().zip(&dir.theta_bar) {
        *x += alpha * d;
    }
    for (x, d) in state.w.0.iter_mut().zip(&dir.w) {
        *x += alpha * d;
    }
    projection.project_stacked(&mut [&mut state.w.0, &mut state.theta_bar]);
}

/// Projected residual-gradient step on `(w, theta_bar)`; returns the slow TD error.
pub fn slow_update(
    state: &mut LearnerState,
    dictionary: &Dictionary,
    kernel: &KernelSpec,
    tr: &Transition,
    alpha: f64,
    projection: &mut ProjectionSet,
) -> f64 {
    let dir = slow_direction(state, dictionary, kernel, tr);
    apply_slow(state, &dir, alpha, projection);
    dir.delta
}

/// Unprojected semi-gradient TD(0) step on `theta`; returns the fast TD error.
pub fn fast_update(
    state: &mut LearnerState,
    dictionary: &Dictionary,
    kernel: &KernelSpec,
    tr: &Transition,
    beta: f64,
) -> f64 {
    let pass = Pass::new(state, dictionary, kernel, tr);
    let delta = pass.delta(&state.theta, tr);
    semi_gradient_update(&mut state.theta, &pass.cur.features, delta, beta);
    delta
}

/// One full two-timescale step: slow projected update, then fast update.
///
/// Both updates are computed from the parameters held before the call, so the
/// fast step sees the attention weights `w_t` rather than `w_{t+1}`.
pub fn oaktd_step(
    state: &mut LearnerState,
    dictionary: &Dictionary,
    kernel: &KernelSpec,
    tr: &Transition,
    alpha: f64,
    beta: f64,
    projection: &mut ProjectionSet,
) -> TdErrorPair {
    let pass = Pass::new(state, dictionary, kernel, tr);
    let slow = pass.slow(state, tr);
    let delta_fast = pass.delta(&state.theta, tr);
    apply_slow(state, &slow, alpha, projection);
    semi_gradient_update(&mut state.theta, &pass.cur.features, delta_fast, beta);
    state.t += 1;
    TdErrorPair {
        delta_slow: slow.delta,
        delta_fast,
    }
}

pub fn semi_gradient_update(theta: &mut [f64], features: &[f64], delta: f64, step: f64) {
    assert_eq!(theta.len(), features.len(), "dimension mismatch");
    for (t, f) in theta.iter_mut().zip(features) {
        *t += step * delta * f;
    }
}

/// Semi-gradient TD(0) for a kernel baseline (plain or selective features).
pub fn kernel_baseline_update(
    approx: &ValueApproximator,
    theta: &mut [f64],
    tr: &Transition,
    alpha: f64,
) -> f64 {
    let phi = approx.feature_vector(tr.state);
    let v_next = if tr.terminal {
        0.0
    } else {
        approx.value(tr.next)
    };
    let delta = td_error(
        tr.reward,
        tr.gamma,
        v_next,
        dot(approx.theta, &phi),
        tr.terminal,
    );
    semi_gradient_update(theta, &phi, delta, alpha);
    delta
}

/// Semi-gradient TD(0) over binary tile features.
pub fn tile_update(approx: &mut TileApproximator, tr: &Transition, alpha: f64) -> f64 {
    let active = approx.active(tr.state);
    let v_cur: f64 = active.iter().map(|&i| approx.theta[i]).sum();
    let v_next = if tr.terminal {
        0.0
    } else {
        approx.value(tr.next)
    };
    let delta = td_error(tr.reward, tr.gamma, v_next, v_cur, tr.terminal);
    for i in active {
        approx.theta[i] += alpha * delta;
    }
    delta
}
