//! Diagnostics computed on frozen snapshots: grid returns, interference,
//! attention maps, dictionary stability and the slow objective.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mean_std, run_greedy_episode, DictionaryTrace, StateValue};
use crate::dictionary::Dictionary;
use crate::envs::{grid_states, EnvSpec};
use crate::features::{attention, squared_distance, NormalizedState};
use crate::learners::{td_error, Transition};
use crate::seeding::{stream, Stream};
use crate::vfa::ValueApproximator;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub position: f64,
    pub velocity: f64,
    #[serde(rename = "return")]
    pub ret: f64,
}

/// One greedy episode from every Mountain Car grid state.
///
/// Tie-breaking randomness for cell `i` comes from its own stream, so results
/// do not depend on scheduling.
pub fn grid_eval<V>(spec: &EnvSpec, v: &V, cap: u64, seed: u64) -> Result<Vec<GridCell>>
where
    V: StateValue + Sync + ?Sized,
{
    let states = grid_states(spec)?;
    Ok(states
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = stream(seed, Stream::Probe, i as u64);
            let (position, velocity) = (s[0], s[1]);
            let ret = run_greedy_episode(spec, v, s, cap, &mut rng);
            GridCell {
                position,
                velocity,
                ret,
            }
        })
        .collect())
}

/// Gradient overlap of a state pair. Full pairwise interference also needs
/// the unknown true value function, so only the overlap factor is recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterferenceRecord {
    pub state: NormalizedState,
    pub other: NormalizedState,
    pub overlap: f64,
    pub distance: f64,
}

pub fn interference_probe(
    v: &ValueApproximator,
    pairs: &[(NormalizedState, NormalizedState)],
) -> Vec<InterferenceRecord> {
    pairs
        .iter()
        .map(|(s, t)| InterferenceRecord {
            state: s.clone(),
            other: t.clone(),
            overlap: v.gradient_overlap(s, t),
            distance: squared_distance(s, t).sqrt(),
        })
        .collect()
}

/// Uniform random pairs in the unit cube.
pub fn sample_state_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    count: usize,
) -> Vec<(NormalizedState, NormalizedState)> {
    let point = |rng: &mut R| NormalizedState((0..dim).map(|_| rng.random()).collect());
    (0..count).map(|_| (point(rng), point(rng))).collect()
}

/// Attention of each state over the dictionary; one row per state.
pub fn attention_dump(
    w: &[f64],
    dictionary: &Dictionary,
    states: &[NormalizedState],
) -> Vec<Vec<f64>> {
    states
        .iter()
        .map(|s| attention(w, s, dictionary.prototypes()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryStats {
    pub runs: usize,
    pub size_mean: f64,
    pub size_std: f64,
    /// Mean over runs of `100 * last_add_step / total_steps`.
    pub convergence_fraction_mean: f64,
    pub convergence_fraction_std: f64,
}

/// Mean and population standard deviation of final size and convergence point.
pub fn dictionary_stats(runs: &[DictionaryTrace]) -> Result<DictionaryStats> {
    if runs.is_empty() {
        return Err(Error::InvalidArgument(
            "dictionary statistics need at least one run".into(),
        ));
    }
    let sizes: Vec<f64> = runs.iter().map(|r| r.size as f64).collect();
    let fractions: Vec<f64> = runs
        .iter()
        .map(|r| match (r.last_add_step, r.total_steps) {
            (Some(step), total) if total > 0 => 100.0 * step as f64 / total as f64,
            _ => 0.0,
        })
        .collect();
    let (size_mean, size_std) = mean_std(&sizes);
    let (convergence_fraction_mean, convergence_fraction_std) = mean_std(&fractions);
    Ok(DictionaryStats {
        runs: runs.len(),
        size_mean,
        size_std,
        convergence_fraction_mean,
        convergence_fraction_std,
    })
}

/// Mean squared TD error of `v_bar` over a batch of transitions.
pub fn mstde_estimate(v_bar: &ValueApproximator, transitions: &[Transition]) -> Result<f64> {
    if transitions.is_empty() {
        return Err(Error::InvalidArgument("MSTDE over an empty batch".into()));
    }
    let total: f64 = transitions
        .iter()
        .map(|tr| {
            let v_next = if tr.terminal {
                0.0
            } else {
                v_bar.value(tr.next)
            };
            td_error(
                tr.reward,
                tr.gamma,
                v_next,
                v_bar.value(tr.state),
                tr.terminal,
            )
            .powi(2)
        })
        .sum();
    Ok(total / transitions.len() as f64)
}
