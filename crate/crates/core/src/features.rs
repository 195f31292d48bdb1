//! State normalization, the Gaussian kernel, L1-difference attention and tile coding.

use serde::{Deserialize, Serialize};

use crate::envs::EnvState;
use crate::{Error, Result};

/// A state mapped into the unit hypercube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizedState(pub Vec<f64>);

impl NormalizedState {
    /// Wraps raw values, clipping each into `[0, 1]`.
    pub fn clipped(values: Vec<f64>) -> Self {
        NormalizedState(values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl std::ops::Deref for NormalizedState {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Maps a physical state into `[0,1]^d` with fixed per-dimension bounds.
///
/// Panics on degenerate bounds or a dimension mismatch.
pub fn normalize(s: &EnvState, bounds: &[(f64, f64)]) -> NormalizedState {
    assert_eq!(s.len(), bounds.len(), "state/bounds dimension mismatch");
    NormalizedState(
        s.iter()
            .zip(bounds)
            .map(|(&x, &(lo, hi))| {
                assert!(hi > lo, "degenerate normalization bounds ({lo}, {hi})");
                ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
            })
            .collect(),
    )
}

/// Inverse of [`normalize`] for states inside the bounds.
pub fn denormalize(s: &NormalizedState, bounds: &[(f64, f64)]) -> EnvState {
    EnvState(
        s.iter()
            .zip(bounds)
            .map(|(&u, &(lo, hi))| lo + u * (hi - lo))
            .collect(),
    )
}

#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Gaussian kernel `exp(-||s - s'||^2 / (2 sigma^2))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    bandwidth: f64,
}

impl KernelSpec {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if bandwidth > 0.0 && bandwidth.is_finite() {
            Ok(KernelSpec { bandwidth })
        } else {
            Err(Error::InvalidArgument(format!(
                "kernel bandwidth must be positive, got {bandwidth}"
            )))
        }
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        (-squared_distance(a, b) / (2.0 * self.bandwidth * self.bandwidth)).exp()
    }

    /// Kernel-induced squared feature-space distance `2 - 2 k(a, b)`.
    #[inline]
    pub fn feature_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        2.0 - 2.0 * self.eval(a, b)
    }
}

pub fn gaussian_kernel(s: &NormalizedState, si: &NormalizedState, spec: &KernelSpec) -> f64 {
    spec.eval(s, si)
}

/// Component-wise absolute difference `|s_k - s_i,k|`.
pub fn psi(s: &[f64], si: &[f64]) -> Vec<f64> {
    assert_eq!(s.len(), si.len(), "dimension mismatch");
    s.iter().zip(si).map(|(a, b)| (a - b).abs()).collect()
}

#[inline]
fn score(w: &[f64], s: &[f64], si: &[f64]) -> f64 {
    assert_eq!(
        w.len(),
        s.len(),
        "attention weights/state dimension mismatch"
    );
    w.iter()
        .zip(s.iter().zip(si))
        .map(|(wk, (a, b))| wk * (a - b).abs())
        .sum()
}

/// Parameters of the attention score `e(s, s_i) = w . psi(s, s_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionWeights(pub Vec<f64>);

impl AttentionWeights {
    pub fn zeros(dim: usize) -> Self {
        AttentionWeights(vec![0.0; dim])
    }
}

impl std::ops::Deref for AttentionWeights {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Numerically stable softmax, in place.
pub fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for e in scores.iter_mut() {
        *e = (*e - max).exp();
        total += *e;
    }
    for e in scores.iter_mut() {
        *e /= total;
    }
}

/// Softmax attention of `s` over every prototype.
///
/// Panics on an empty prototype set.
pub fn attention(w: &[f64], s: &[f64], prototypes: &[NormalizedState]) -> Vec<f64> {
    assert!(!prototypes.is_empty(), "attention over an empty dictionary");
    let mut a: Vec<f64> = prototypes.iter().map(|p| score(w, s, p)).collect();
    softmax_in_place(&mut a);
    a
}

/// Attention together with its Jacobian with respect to `w`.
#[derive(Clone, Debug)]
pub struct AttentionGrad {
    pub weights: Vec<f64>,
    /// Row `i` is `d a_i / d w = a_i (psi_i - sum_j a_j psi_j)`.
    pub jacobian: Vec<Vec<f64>>,
}

pub fn attention_with_jacobian(
    w: &[f64],
    s: &[f64],
    prototypes: &[NormalizedState],
) -> AttentionGrad {
    let weights = attention(w, s, prototypes);
    let psis: Vec<Vec<f64>> = prototypes.iter().map(|p| psi(s, p)).collect();
    let mut mean = vec![0.0; s.len()];
    for (a, p) in weights.iter().zip(&psis) {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += a * v;
        }
    }
    let jacobian = weights
        .iter()
        .zip(&psis)
        .map(|(a, p)| p.iter().zip(&mean).map(|(v, m)| a * (v - m)).collect())
        .collect();
    AttentionGrad { weights, jacobian }
}

pub fn attention_jacobian(w: &[f64], s: &[f64], prototypes: &[NormalizedState]) -> Vec<Vec<f64>> {
    attention_with_jacobian(w, s, prototypes).jacobian
}

/// Uniformly offset grid tilings over the normalized state space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileCodingSpec {
    num_tilings: usize,
    tiles_per_tiling: usize,
    resolution: usize,
    dim: usize,
    /// `offsets[t][k]` is tiling `t`'s displacement along dimension `k`, in tile widths.
    offsets: Vec<Vec<f64>>,
}

impl TileCodingSpec {
    /// Builds `num_tilings` grids of `tiles_per_tiling = g^dim` cells each, tiling `t`
    /// shifted by `t / num_tilings` of a tile width along every dimension.
    pub fn uniform(num_tilings: usize, tiles_per_tiling: usize, dim: usize) -> Result<Self> {
        if num_tilings == 0 || tiles_per_tiling == 0 || dim == 0 {
            return Err(Error::InvalidArgument(
                "tile coding needs positive tilings, tiles and dimension".into(),
            ));
        }
        let resolution = integer_root(tiles_per_tiling, dim).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "tiles per tiling ({tiles_per_tiling}) is not a perfect {dim}-th power"
            ))
        })?;
        let offsets = (0..num_tilings)
            .map(|t| vec![t as f64 / num_tilings as f64; dim])
            .collect();
        Ok(TileCodingSpec {
            num_tilings,
            tiles_per_tiling,
            resolution,
            dim,
            offsets,
        })
    }

    pub fn num_tilings(&self) -> usize {
        self.num_tilings
    }

    pub fn tiles_per_tiling(&self) -> usize {
        self.tiles_per_tiling
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn feature_dim(&self) -> usize {
        self.num_tilings * self.tiles_per_tiling
    }

    /// Active feature indices for a normalized state, one per tiling.
    pub fn active(&self, s: &[f64]) -> Vec<usize> {
        assert_eq!(s.len(), self.dim, "tile coder dimension mismatch");
        let g = self.resolution;
        (0..self.num_tilings)
            .map(|t| {
                let cell = s
                    .iter()
                    .zip(&self.offsets[t])
                    .fold(0usize, |acc, (u, off)| {
                        let c = (u.clamp(0.0, 1.0) * g as f64 + off).floor() as usize;
                        acc * g + c.min(g - 1)
                    });
                t * self.tiles_per_tiling + cell
            })
            .collect()
    }
}

fn integer_root(n: usize, k: usize) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / k as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&g| g.checked_pow(k as u32) == Some(n))
}

/// Active tile indices for a physical state.
pub fn tile_features(s: &EnvState, spec: &TileCodingSpec, bounds: &[(f64, f64)]) -> Vec<usize> {
    spec.active(&normalize(s, bounds))
}
