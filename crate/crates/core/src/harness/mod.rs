//! Training loop, greedy evaluation and multi-seed orchestration.
//!
//! Control is ε-greedy over a one-step lookahead: the greedy action maximizes
//! `r(s, a) + gamma V(s')` under the environment's mean-dynamics model.

mod probes;

pub use probes::{
    attention_dump, dictionary_stats, grid_eval, interference_probe, mstde_estimate,
    sample_state_pairs, DictionaryStats, GridCell, InterferenceRecord,
};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algo, ExperimentConfig, Hyperparameters};
use crate::dictionary::{extend_parameters, Dictionary};
use crate::envs::{EnvId, EnvSpec, EnvState, StepOutcome};
use crate::features::{normalize, KernelSpec, NormalizedState, TileCodingSpec};
use crate::learners::{
    kernel_baseline_update, oaktd_step, tile_update, LearnerState, ProjectionSet, Transition,
};
use crate::seeding::{stream, Stream};
use crate::vfa::{Sparsifier, TileApproximator, ValueApproximator};
use crate::{Error, Result};

/// Anything that assigns a value to a physical state.
pub trait StateValue {
    fn state_value(&self, s: &EnvState) -> f64;
}

impl<F: Fn(&EnvState) -> f64> StateValue for F {
    fn state_value(&self, s: &EnvState) -> f64 {
        self(s)
    }
}

/// Learned parameters of one algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Attentive {
        dictionary: Dictionary,
        learner: LearnerState,
        kernel: KernelSpec,
        projection: ProjectionSet,
    },
    Kernel {
        dictionary: Dictionary,
        theta: Vec<f64>,
        kernel: KernelSpec,
        /// `Some(mu2)` for the selective gate, `None` for plain kernels.
        selective: Option<f64>,
    },
    Tile(TileApproximator),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub env: EnvId,
    pub algo: Algo,
    pub bounds: Vec<(f64, f64)>,
    pub gamma: f64,
    pub model: Model,
}

impl Agent {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        let spec = EnvSpec::new(config.env);
        let h = &config.hyper;
        let dictionary = || Dictionary::new(h.mu1, KernelSpec::new(h.sigma1)?);
        let model = match config.algo {
            Algo::Oaktd => Model::Attentive {
                dictionary: dictionary()?,
                learner: LearnerState::new(spec.state_dim),
                kernel: KernelSpec::new(h.sigma2)?,
                projection: ProjectionSet::new(h.radius)?,
            },
            Algo::Oktd | Algo::Osktd => Model::Kernel {
                dictionary: dictionary()?,
                theta: Vec::new(),
                kernel: KernelSpec::new(h.sigma2)?,
                selective: (config.algo == Algo::Osktd).then_some(h.mu2),
            },
            Algo::TileTd => Model::Tile(TileApproximator::new(TileCodingSpec::uniform(
                h.tilings,
                h.tiles,
                spec.state_dim,
            )?)),
        };
        Ok(Agent {
            env: config.env,
            algo: config.algo,
            bounds: spec.state_bounds,
            gamma: spec.gamma,
            model,
        })
    }

    pub fn normalize(&self, s: &EnvState) -> NormalizedState {
        normalize(s, &self.bounds)
    }

    pub fn dictionary(&self) -> Option<&Dictionary> {
        match &self.model {
            Model::Attentive { dictionary, .. } | Model::Kernel { dictionary, .. } => {
                Some(dictionary)
            }
            Model::Tile(_) => None,
        }
    }

    pub fn learner(&self) -> Option<&LearnerState> {
        match &self.model {
            Model::Attentive { learner, .. } => Some(learner),
            _ => None,
        }
    }

    pub fn projection_triggers(&self) -> u64 {
        match &self.model {
            Model::Attentive { projection, .. } => projection.trigger_count,
            _ => 0,
        }
    }

    /// The kernel value function used for control, if the model has one.
    pub fn approximator(&self) -> Option<ValueApproximator<'_>> {
        match &self.model {
            Model::Attentive {
                dictionary,
                learner,
                kernel,
                ..
            } if !dictionary.is_empty() => Some(learner.fast(*kernel, dictionary)),
            Model::Kernel {
                dictionary,
                theta,
                kernel,
                selective,
            } if !dictionary.is_empty() => {
                let sparsifier = match selective {
                    Some(mu2) => Sparsifier::Selective { mu2: *mu2 },
                    None => Sparsifier::Plain,
                };
                Some(ValueApproximator::new(
                    theta, *kernel, sparsifier, dictionary,
                ))
            }
            _ => None,
        }
    }

    /// `V_{theta_bar, w}`, the slow-timescale value function.
    pub fn slow_approximator(&self) -> Option<ValueApproximator<'_>> {
        match &self.model {
            Model::Attentive {
                dictionary,
                learner,
                kernel,
                ..
            } if !dictionary.is_empty() => Some(ValueApproximator::new(
                &learner.theta_bar,
                *kernel,
                Sparsifier::Attentive(&learner.w),
                dictionary,
            )),
            _ => None,
        }
    }

    pub fn value_normalized(&self, s: &NormalizedState) -> f64 {
        match &self.model {
            Model::Tile(t) => t.value(s),
            _ => self.approximator().map_or(0.0, |v| v.value(s)),
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.model {
            Model::Attentive { learner, .. } => learner.is_finite(),
            Model::Kernel { theta, .. } => theta.iter().all(|x| x.is_finite()),
            Model::Tile(t) => t.theta.iter().all(|x| x.is_finite()),
        }
    }

    /// Learns from one transition observed at global step `t`.
    pub fn observe(&mut self, s: &EnvState, outcome: &StepOutcome, t: u64, h: &Hyperparameters) {
        let cur = self.normalize(s);
        let next = self.normalize(&outcome.next_state);
        let tr = Transition {
            state: &cur,
            reward: outcome.reward,
            next: &next,
            terminal: outcome.terminal,
            gamma: self.gamma,
        };
        let alpha = h.alpha.value(t);
        let beta = h.beta.value(t);
        match &mut self.model {
            Model::Attentive {
                dictionary,
                learner,
                kernel,
                projection,
            } => {
                dictionary.maybe_add(&cur, t);
                dictionary.maybe_add(&next, t);
                extend_parameters(learner, dictionary.len()).expect("dictionary never shrinks");
                oaktd_step(learner, dictionary, kernel, &tr, alpha, beta, projection);
            }
            Model::Kernel {
                dictionary,
                theta,
                kernel,
                selective,
            } => {
                dictionary.maybe_add(&cur, t);
                dictionary.maybe_add(&next, t);
                theta.resize(dictionary.len(), 0.0);
                let sparsifier = match selective {
                    Some(mu2) => Sparsifier::Selective { mu2: *mu2 },
                    None => Sparsifier::Plain,
                };
                let snapshot = theta.clone();
                let approx = ValueApproximator::new(&snapshot, *kernel, sparsifier, dictionary);
                kernel_baseline_update(&approx, theta, &tr, beta);
            }
            Model::Tile(approx) => {
                tile_update(approx, &tr, beta);
            }
        }
    }
}

impl StateValue for Agent {
    fn state_value(&self, s: &EnvState) -> f64 {
        self.value_normalized(&self.normalize(s))
    }
}

/// Greedy action under one-step lookahead; ties are broken uniformly at random.
pub fn greedy_action<V, R>(spec: &EnvSpec, v: &V, s: &EnvState, rng: &mut R) -> usize
where
    V: StateValue + ?Sized,
    R: Rng + ?Sized,
{
    let q: Vec<f64> = (0..spec.action_count)
        .map(|a| {
            let out = spec.lookahead(s, a);
            let bootstrap = if out.terminal {
                0.0
            } else {
                spec.gamma * v.state_value(&out.next_state)
            };
            out.reward + bootstrap
        })
        .collect();
    let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..q.len()).filter(|&a| q[a] == best).collect();
    match ties.len() {
        0 => rng.random_range(0..spec.action_count),
        1 => ties[0],
        n => ties[rng.random_range(0..n)],
    }
}

pub fn epsilon_greedy_action<V, R>(
    spec: &EnvSpec,
    v: &V,
    s: &EnvState,
    epsilon: f64,
    rng: &mut R,
) -> usize
where
    V: StateValue + ?Sized,
    R: Rng + ?Sized,
{
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..spec.action_count)
    } else {
        greedy_action(spec, v, s, rng)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub step: u64,
    pub mean_return: f64,
    pub std_return: f64,
    pub episodes: usize,
}

/// Undiscounted return of one greedy episode from `start`, truncated at `cap` steps.
pub fn run_greedy_episode<V, R>(
    spec: &EnvSpec,
    v: &V,
    start: EnvState,
    cap: u64,
    rng: &mut R,
) -> f64
where
    V: StateValue + ?Sized,
    R: Rng + ?Sized,
{
    if spec.is_terminal(&start) {
        return 0.0;
    }
    let mut s = start;
    let mut ret = 0.0;
    for _ in 0..cap {
        let a = greedy_action(spec, v, &s, rng);
        let out = spec.step(&s, a, rng);
        ret += out.reward;
        if out.terminal {
            break;
        }
        s = out.next_state;
    }
    ret
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn evaluate<V, R>(spec: &EnvSpec, v: &V, episodes: usize, cap: u64, rng: &mut R) -> EvalRecord
where
    V: StateValue + ?Sized,
    R: Rng + ?Sized,
{
    assert!(cap > 0, "evaluation cap must be positive");
    let returns: Vec<f64> = (0..episodes)
        .map(|_| {
            let start = spec.reset(rng);
            run_greedy_episode(spec, v, start, cap, rng)
        })
        .collect();
    let (mean_return, std_return) = mean_std(&returns);
    EvalRecord {
        step: 0,
        mean_return,
        std_return,
        episodes,
    }
}

/// Dictionary growth summary of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryTrace {
    pub size: usize,
    pub last_add_step: Option<u64>,
    pub total_steps: u64,
}

#[derive(Clone, Debug)]
pub struct TrainOutput {
    pub seed: u64,
    pub log: Vec<EvalRecord>,
    pub trace: Option<DictionaryTrace>,
    pub agent: Agent,
}

impl TrainOutput {
    pub fn final_eval(&self) -> Option<&EvalRecord> {
        self.log.last()
    }
}

/// Runs one seeded training job for `config.total_steps` environment steps.
pub fn train(config: &ExperimentConfig, seed: u64) -> Result<TrainOutput> {
    let spec = EnvSpec::new(config.env);
    let h = &config.hyper;
    let mut agent = Agent::new(config)?;
    let mut env_rng = stream(seed, Stream::Env, 0);
    let mut policy_rng = stream(seed, Stream::Policy, 0);
    let cap = match config.episode_cap {
        0 => u64::MAX,
        c => c,
    };
    let mut log = Vec::new();
    let mut s = spec.reset(&mut env_rng);
    let mut episode_len = 0u64;

    for t in 0..config.total_steps {
        let epsilon = h.epsilon.value(t);
        let a = epsilon_greedy_action(&spec, &agent, &s, epsilon, &mut policy_rng);
        let out = spec.step(&s, a, &mut env_rng);
        agent.observe(&s, &out, t, h);
        if !agent.is_finite() {
            return Err(Error::NonFinite {
                step: t,
                what: "learner parameters",
            });
        }
        episode_len += 1;
        if out.terminal || episode_len >= cap {
            s = spec.reset(&mut env_rng);
            episode_len = 0;
        } else {
            s = out.next_state;
        }
        if (t + 1) % config.eval_every == 0 {
            let mut eval_rng = stream(seed, Stream::Eval, t + 1);
            let mut rec = evaluate(
                &spec,
                &agent,
                config.eval_episodes,
                config.eval_cap,
                &mut eval_rng,
            );
            rec.step = t + 1;
            log.push(rec);
        }
    }

    let trace = agent.dictionary().map(|d| DictionaryTrace {
        size: d.len(),
        last_add_step: d.last_add_step(),
        total_steps: config.total_steps,
    });
    Ok(TrainOutput {
        seed,
        log,
        trace,
        agent,
    })
}

/// Trains every seed of `config` in parallel; results come back in seed order.
pub fn train_seeds(config: &ExperimentConfig) -> Vec<Result<TrainOutput>> {
    config
        .seeds
        .par_iter()
        .map(|&seed| train(config, seed))
        .collect()
}
