//! Online dictionary built with a kernel-distance novelty test.
//!
//! A state joins the dictionary when its kernel-induced distance
//! `2 - 2 k(s, s_i)` to every stored prototype exceeds `mu1`. Prototypes are
//! never removed or reordered, so parameter vectors indexed by prototype only
//! ever grow at the tail (see [`extend_parameters`]).

use serde::{Deserialize, Serialize};

use crate::features::{KernelSpec, NormalizedState};
use crate::learners::LearnerState;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dictionary {
    prototypes: Vec<NormalizedState>,
    add_steps: Vec<u64>,
    mu1: f64,
    kernel: KernelSpec,
}

impl Dictionary {
    pub fn new(mu1: f64, kernel: KernelSpec) -> Result<Self> {
        if !(mu1 > 0.0 && mu1.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "novelty threshold mu1 must be positive, got {mu1}"
            )));
        }
        Ok(Dictionary {
            prototypes: Vec::new(),
            add_steps: Vec::new(),
            mu1,
            kernel,
        })
    }

    pub fn len(&self) -> usize {
        self.prototypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prototypes.is_empty()
    }

    pub fn prototypes(&self) -> &[NormalizedState] {
        &self.prototypes
    }

    /// Step index at which each prototype was inserted.
    pub fn add_steps(&self) -> &[u64] {
        &self.add_steps
    }

    pub fn last_add_step(&self) -> Option<u64> {
        self.add_steps.last().copied()
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    /// `min_i (2 - 2 k(s_i, s))`, or `+inf` when empty.
    pub fn novelty_distance(&self, s: &NormalizedState) -> f64 {
        self.prototypes
            .iter()
            .map(|p| self.kernel.feature_distance(p, s))
            .fold(f64::INFINITY, f64::min)
    }

    /// Appends `s` if it is novel; returns whether it was added.
    pub fn maybe_add(&mut self, s: &NormalizedState, step: u64) -> bool {
        if let Some(p) = self.prototypes.first() {
            assert_eq!(p.dim(), s.dim(), "dictionary dimension mismatch");
        }
        if self.novelty_distance(s) > self.mu1 {
            self.prototypes.push(s.clone());
            self.add_steps.push(step);
            true
        } else {
            false
        }
    }

    /// Smallest pairwise kernel distance, `+inf` for fewer than two prototypes.
    pub fn min_pairwise_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.prototypes.iter().enumerate() {
            for b in &self.prototypes[i + 1..] {
                best = best.min(self.kernel.feature_distance(a, b));
            }
        }
        best
    }

    /// Exhaustive check that every pair satisfies `2 - 2 k > mu1`.
    pub fn separation_holds(&self) -> bool {
        self.min_pairwise_distance() > self.mu1
    }
}

/// Zero-pads `theta` and `theta_bar` to `new_size`; `w` is untouched.
pub fn extend_parameters(state: &mut LearnerState, new_size: usize) -> Result<()> {
    if new_size < state.theta.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot shrink parameters from {} to {new_size}",
            state.theta.len()
        )));
    }
    state.theta.resize(new_size, 0.0);
    state.theta_bar.resize(new_size, 0.0);
    Ok(())
}
