//! Kernel value-function approximators over a dictionary, plus the tile-coded
//! linear baseline.
//!
//! Every kernel variant has the form `V(s) = sum_i theta_i k(s, s_i) g_i(s)`
//! where the gate `g` is the sparsifier: softmax attention, a hard distance
//! selector, a constant 1, or one of the dropout / ReLU gates.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::features::{softmax_in_place, KernelSpec, NormalizedState, TileCodingSpec};

#[derive(Clone, Copy, Debug)]
pub enum Sparsifier<'a> {
    /// Softmax attention with score weights `w`.
    Attentive(&'a [f64]),
    /// Keeps kernel `i` only while `2 - 2 k(s, s_i) < mu2`.
    Selective {
        mu2: f64,
    },
    Plain,
    /// Keeps each kernel with probability `eta` while training; all-on when evaluating.
    DropoutGate {
        eta: f64,
    },
    /// Keeps kernel `i` only while `k(s, s_i) > b`.
    ReluGate {
        b: f64,
    },
}

/// Borrowed view of `(theta, sparsifier, dictionary)` that evaluates values and gradients.
#[derive(Clone, Copy, Debug)]
pub struct ValueApproximator<'a> {
    pub theta: &'a [f64],
    pub kernel: KernelSpec,
    pub sparsifier: Sparsifier<'a>,
    pub dictionary: &'a Dictionary,
}

impl<'a> ValueApproximator<'a> {
    pub fn new(
        theta: &'a [f64],
        kernel: KernelSpec,
        sparsifier: Sparsifier<'a>,
        dictionary: &'a Dictionary,
    ) -> Self {
        assert_eq!(
            theta.len(),
            dictionary.len(),
            "theta length must match dictionary size"
        );
        ValueApproximator {
            theta,
            kernel,
            sparsifier,
            dictionary,
        }
    }

    fn kernels(&self, s: &[f64]) -> Vec<f64> {
        assert!(
            !self.dictionary.is_empty(),
            "features over an empty dictionary"
        );
        self.dictionary
            .prototypes()
            .iter()
            .map(|p| self.kernel.eval(s, p))
            .collect()
    }

    /// Features in evaluation mode (dropout gates all on).
    pub fn feature_vector(&self, s: &NormalizedState) -> Vec<f64> {
        let mut k = self.kernels(s);
        match self.sparsifier {
            Sparsifier::Attentive(w) => {
                let mut scores: Vec<f64> = self
                    .dictionary
                    .prototypes()
                    .iter()
                    .map(|p| {
                        w.iter()
                            .zip(s.iter().zip(p.iter()))
                            .map(|(wk, (a, b))| wk * (a - b).abs())
                            .sum()
                    })
                    .collect();
                softmax_in_place(&mut scores);
                for (ki, ai) in k.iter_mut().zip(&scores) {
                    *ki *= ai;
                }
            }
            Sparsifier::Selective { mu2 } => {
                for ki in k.iter_mut() {
                    if 2.0 - 2.0 * *ki >= mu2 {
                        *ki = 0.0;
                    }
                }
            }
            Sparsifier::ReluGate { b } => {
                for ki in k.iter_mut() {
                    if *ki <= b {
                        *ki = 0.0;
                    }
                }
            }
            Sparsifier::Plain | Sparsifier::DropoutGate { .. } => {}
        }
        k
    }

    /// Features in training mode; only the dropout gate consumes randomness.
    pub fn feature_vector_sampled<R: Rng + ?Sized>(
        &self,
        s: &NormalizedState,
        rng: &mut R,
    ) -> Vec<f64> {
        match self.sparsifier {
            Sparsifier::DropoutGate { eta } => {
                let mut k = self.kernels(s);
                for ki in k.iter_mut() {
                    if !rng.random_bool(eta) {
                        *ki = 0.0;
                    }
                }
                k
            }
            _ => self.feature_vector(s),
        }
    }

    pub fn value(&self, s: &NormalizedState) -> f64 {
        dot(self.theta, &self.feature_vector(s))
    }

    /// `d V / d theta`, identical to the feature vector since `V` is linear in `theta`.
    pub fn grad_theta(&self, s: &NormalizedState) -> Vec<f64> {
        self.feature_vector(s)
    }

    /// `grad V(s) . grad V(s_hat)`: the part of pairwise interference the
    /// representation controls.
    pub fn gradient_overlap(&self, s: &NormalizedState, s_hat: &NormalizedState) -> f64 {
        dot(&self.grad_theta(s), &self.grad_theta(s_hat))
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear value function over binary tile features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileApproximator {
    pub coder: TileCodingSpec,
    pub theta: Vec<f64>,
}

impl TileApproximator {
    pub fn new(coder: TileCodingSpec) -> Self {
        let theta = vec![0.0; coder.feature_dim()];
        TileApproximator { coder, theta }
    }

    pub fn active(&self, s: &NormalizedState) -> Vec<usize> {
        self.coder.active(s)
    }

    pub fn value(&self, s: &NormalizedState) -> f64 {
        self.active(s).iter().map(|&i| self.theta[i]).sum()
    }
}
