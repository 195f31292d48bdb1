//! Reference computations written directly from the model definitions, kept
//! independent of the library's own feature and learner code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use oaktd::dictionary::Dictionary;
use oaktd::features::{KernelSpec, NormalizedState};
use oaktd::learners::{fast_update, LearnerState, Transition};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

pub fn attention(w: &[f64], s: &[f64], protos: &[Vec<f64>]) -> Vec<f64> {
    let scores: Vec<f64> = protos
        .iter()
        .map(|p| {
            w.iter()
                .zip(s.iter().zip(p))
                .map(|(wk, (a, b))| wk * (a - b).abs())
                .sum()
        })
        .collect();
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = scores.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = e.iter().sum();
    e.iter().map(|x| x / z).collect()
}

pub fn attentive_features(w: &[f64], s: &[f64], protos: &[Vec<f64>], sigma: f64) -> Vec<f64> {
    attention(w, s, protos)
        .iter()
        .zip(protos)
        .map(|(a, p)| a * gaussian(s, p, sigma))
        .collect()
}

pub fn plain_features(s: &[f64], protos: &[Vec<f64>], sigma: f64) -> Vec<f64> {
    protos.iter().map(|p| gaussian(s, p, sigma)).collect()
}

pub fn attentive_value(
    theta: &[f64],
    w: &[f64],
    s: &[f64],
    protos: &[Vec<f64>],
    sigma: f64,
) -> f64 {
    attentive_features(w, s, protos, sigma)
        .iter()
        .zip(theta)
        .map(|(f, t)| f * t)
        .sum()
}

pub fn random_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random::<f64>()).collect()
}

/// Dictionary holding exactly `points`, in order.
pub fn dictionary_of(points: &[Vec<f64>], sigma1: f64) -> Dictionary {
    let mut d = Dictionary::new(1e-12, KernelSpec::new(sigma1).unwrap()).unwrap();
    for (i, p) in points.iter().enumerate() {
        assert!(
            d.maybe_add(&NormalizedState(p.clone()), i as u64),
            "points must be distinct"
        );
    }
    d
}

/// A random slow-update problem: prototypes, parameters and one transition.
pub struct SlowInstance {
    pub protos: Vec<Vec<f64>>,
    pub sigma: f64,
    pub w: Vec<f64>,
    pub theta_bar: Vec<f64>,
    pub s: Vec<f64>,
    pub s_next: Vec<f64>,
    pub reward: f64,
    pub gamma: f64,
    pub terminal: bool,
}

impl SlowInstance {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let dim = rng.random_range(1..=4);
        let m = rng.random_range(1..=8);
        SlowInstance {
            protos: (0..m).map(|_| random_point(rng, dim)).collect(),
            sigma: rng.random_range(0.3..2.0),
            w: (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect(),
            theta_bar: (0..m).map(|_| rng.random_range(-5.0..5.0)).collect(),
            s: random_point(rng, dim),
            s_next: random_point(rng, dim),
            reward: rng.random_range(-2.0..2.0),
            gamma: rng.random_range(0.8..1.0),
            terminal: rng.random_bool(0.2),
        }
    }

    /// Squared TD error of `V_{theta_bar, w}` at the stacked point `x = (w, theta_bar)`, halved.
    pub fn half_sq_td(&self, x: &[f64]) -> f64 {
        let d = self.w.len();
        let (w, tb) = x.split_at(d);
        let v = attentive_value(tb, w, &self.s, &self.protos, self.sigma);
        let v1 = if self.terminal {
            0.0
        } else {
            attentive_value(tb, w, &self.s_next, &self.protos, self.sigma)
        };
        let delta = self.reward + self.gamma * v1 - v;
        0.5 * delta * delta
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.w.iter().chain(&self.theta_bar).copied().collect()
    }

    /// Central finite-difference gradient of `half_sq_td`.
    pub fn fd_gradient(&self, h: f64) -> Vec<f64> {
        let x = self.stacked();
        (0..x.len())
            .map(|k| {
                let mut p = x.clone();
                let mut m = x.clone();
                p[k] += h;
                m[k] -= h;
                (self.half_sq_td(&p) - self.half_sq_td(&m)) / (2.0 * h)
            })
            .collect()
    }
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-12);
    diff / scale
}

/// Continuing 5-state random walk on a line: right with 0.7, left with 0.3,
/// bouncing at both ends. Reward 1 for landing on the rightmost state.
pub struct Chain {
    pub positions: Vec<Vec<f64>>,
    pub p: DMatrix<f64>,
    pub reward: DMatrix<f64>,
    pub gamma: f64,
}

impl Chain {
    pub fn new() -> Self {
        let n = 5;
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            p[(i, (i + 1).min(n - 1))] += 0.7;
            p[(i, i.saturating_sub(1))] += 0.3;
        }
        let mut reward = DMatrix::zeros(n, n);
        for i in 0..n {
            reward[(i, n - 1)] = 1.0;
        }
        Chain {
            positions: (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect(),
            p,
            reward,
            gamma: 0.9,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn expected_reward(&self) -> DVector<f64> {
        DVector::from_fn(self.len(), |i, _| {
            (0..self.len())
                .map(|j| self.p[(i, j)] * self.reward[(i, j)])
                .sum()
        })
    }

    /// Stationary distribution by power iteration.
    pub fn stationary(&self) -> DVector<f64> {
        let n = self.len();
        let mut d = DVector::from_element(n, 1.0 / n as f64);
        for _ in 0..10_000 {
            d = self.p.transpose() * &d;
        }
        let total = d.sum();
        d / total
    }

    pub fn true_values(&self) -> DVector<f64> {
        let n = self.len();
        let a = DMatrix::identity(n, n) - self.gamma * &self.p;
        a.lu().solve(&self.expected_reward()).unwrap()
    }

    /// Linear TD fixed point `A^{-1} b` for feature matrix `phi` (one row per state).
    pub fn td_fixed_point(&self, phi: &DMatrix<f64>) -> DVector<f64> {
        let d = DMatrix::from_diagonal(&self.stationary());
        let b = phi.transpose() * &d * self.expected_reward();
        self.td_matrix(phi)
            .lu()
            .solve(&b)
            .expect("TD matrix is invertible")
    }

    /// `A = Phi^T D (Phi - gamma P Phi)`.
    pub fn td_matrix(&self, phi: &DMatrix<f64>) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&self.stationary());
        phi.transpose() * &d * (phi - self.gamma * &self.p * phi)
    }

    /// A step size for the expected update that is stable for features `phi`.
    pub fn stable_step(&self, phi: &DMatrix<f64>) -> f64 {
        0.5 / self.td_matrix(phi).norm()
    }

    pub fn d_norm(&self, v: &DVector<f64>) -> f64 {
        let d = self.stationary();
        (0..self.len())
            .map(|i| d[i] * v[i] * v[i])
            .sum::<f64>()
            .sqrt()
    }

    /// Runs the expected fast update, built from single-transition calls to
    /// `fast_update` weighted by `d(s) P(s, s')`, until it stops moving.
    pub fn iterate_fast(
        &self,
        w: &[f64],
        sigma2: f64,
        dictionary: &Dictionary,
        beta: f64,
        max_sweeps: usize,
    ) -> Vec<f64> {
        let n = self.len();
        let d = self.stationary();
        let kernel = KernelSpec::new(sigma2).unwrap();
        let states: Vec<NormalizedState> = self
            .positions
            .iter()
            .map(|p| NormalizedState(p.clone()))
            .collect();
        let mut learner = LearnerState::new(w.len());
        learner.w.0 = w.to_vec();
        learner.theta = vec![0.0; n];
        learner.theta_bar = vec![0.0; n];
        for _ in 0..max_sweeps {
            let mut step = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    let weight = d[i] * self.p[(i, j)];
                    if weight == 0.0 {
                        continue;
                    }
                    let mut probe = learner.clone();
                    let tr = Transition {
                        state: &states[i],
                        reward: self.reward[(i, j)],
                        next: &states[j],
                        terminal: false,
                        gamma: self.gamma,
                    };
                    fast_update(&mut probe, dictionary, &kernel, &tr, beta * weight);
                    for (s, (new, old)) in
                        step.iter_mut().zip(probe.theta.iter().zip(&learner.theta))
                    {
                        *s += new - old;
                    }
                }
            }
            let moved: f64 = step.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (t, s) in learner.theta.iter_mut().zip(&step) {
                *t += s;
            }
            if moved < 1e-14 {
                break;
            }
        }
        learner.theta
    }

    pub fn feature_matrix(&self, w: &[f64], sigma2: f64) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            attentive_features(w, &self.positions[i], &self.positions, sigma2)[j]
        })
    }
}

/// `min_{i<j} 2 - 2 k(s_i, s_j)` over a dictionary.
pub fn min_feature_distance(protos: &[NormalizedState], sigma1: f64) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..protos.len() {
        for j in i + 1..protos.len() {
            best = best.min(2.0 - 2.0 * gaussian(&protos[i], &protos[j], sigma1));
        }
    }
    best
}
