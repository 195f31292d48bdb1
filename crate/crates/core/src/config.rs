//! Experiment configuration as flat `key = value` text.
//!
//! Resolution order: per-environment defaults, then the file, then overrides.
//! `env` must be given by the file or an override since every other default
//! depends on it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::envs::EnvId;
use crate::features::TileCodingSpec;
use crate::learners::StepSchedule;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algo {
    Oaktd,
    Oktd,
    Osktd,
    TileTd,
}

impl Algo {
    pub const ALL: [Algo; 4] = [Algo::Oaktd, Algo::Oktd, Algo::Osktd, Algo::TileTd];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Oaktd => "oaktd",
            Algo::Oktd => "oktd",
            Algo::Osktd => "osktd",
            Algo::TileTd => "tile-td",
        }
    }

    pub fn uses_dictionary(self) -> bool {
        self != Algo::TileTd
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "oaktd" => Ok(Algo::Oaktd),
            "oktd" => Ok(Algo::Oktd),
            "osktd" => Ok(Algo::Osktd),
            "tile-td" | "tiletd" | "tile" => Ok(Algo::TileTd),
            _ => Err(format!(
                "unknown algo `{s}` (expected oaktd, oktd, osktd or tile-td)"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Novelty threshold of the dictionary.
    pub mu1: f64,
    /// Dictionary kernel bandwidth.
    pub sigma1: f64,
    /// Value-function kernel bandwidth.
    pub sigma2: f64,
    /// Selective-gate threshold (OSKTD).
    pub mu2: f64,
    /// Slow step size of the two-timescale learner.
    pub alpha: StepSchedule,
    /// Fast step size; also the step size of every single-timescale baseline.
    pub beta: StepSchedule,
    pub epsilon: StepSchedule,
    pub tilings: usize,
    pub tiles: usize,
    /// Radius of the projection ball over `(w, theta_bar)`.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvId,
    pub algo: Algo,
    pub total_steps: u64,
    pub eval_every: u64,
    pub eval_episodes: usize,
    pub eval_cap: u64,
    /// Training episode truncation; 0 disables it.
    pub episode_cap: u64,
    pub seeds: Vec<u64>,
    pub hyper: Hyperparameters,
}

pub const VALID_KEYS: [&str; 21] = [
    "env",
    "algo",
    "total_steps",
    "eval_every",
    "eval_episodes",
    "eval_cap",
    "episode_cap",
    "seeds",
    "mu1",
    "sigma1",
    "sigma2",
    "mu2",
    "alpha0",
    "alpha_decay",
    "beta0",
    "beta_decay",
    "eps0",
    "eps_decay",
    "tilings",
    "tiles",
    "radius",
];

fn sched(initial: f64, decay: f64) -> StepSchedule {
    StepSchedule { initial, decay }
}

impl Hyperparameters {
    pub fn defaults(env: EnvId) -> Self {
        let epsilon = sched(1.0, 0.9999);
        let radius = 1e3;
        match env {
            EnvId::MountainCar => Hyperparameters {
                mu1: 0.1,
                sigma1: 1.0,
                sigma2: 1.0,
                mu2: 1.0,
                alpha: sched(0.05, 0.99999),
                beta: sched(0.01, 0.999999),
                epsilon,
                tilings: 16,
                tiles: 256,
                radius,
            },
            EnvId::Acrobot => Hyperparameters {
                mu1: 0.3,
                sigma1: 1.0,
                sigma2: 1.0,
                mu2: 1.0,
                alpha: sched(0.1, 0.99999),
                beta: sched(0.001, 0.999999),
                epsilon,
                tilings: 16,
                tiles: 4096,
                radius,
            },
            EnvId::CartPole => Hyperparameters {
                mu1: 0.3,
                sigma1: 1.0,
                sigma2: 1.0,
                mu2: 1.0,
                alpha: sched(0.1, 0.999999),
                beta: sched(0.01, 0.9999999),
                epsilon,
                tilings: 16,
                tiles: 4096,
                radius,
            },
            EnvId::PuddleWorld => Hyperparameters {
                mu1: 0.1,
                sigma1: 1.0,
                sigma2: 0.1,
                mu2: 1.4,
                alpha: sched(0.1, 0.99999),
                beta: sched(0.01, 0.999999),
                epsilon,
                tilings: 16,
                // 512 cells is not a square grid; 22 x 22 is the closest that is.
                tiles: 484,
                radius,
            },
        }
    }
}

impl ExperimentConfig {
    pub fn defaults(env: EnvId) -> Self {
        let (eval_cap, episode_cap) = match env {
            EnvId::CartPole => (500, crate::envs::CARTPOLE_EPISODE_CAP),
            _ => (2000, 0),
        };
        ExperimentConfig {
            env,
            algo: Algo::Oaktd,
            total_steps: 100_000,
            eval_every: 1000,
            eval_episodes: 5,
            eval_cap,
            episode_cap,
            seeds: vec![0],
            hyper: Hyperparameters::defaults(env),
        }
    }

    pub fn with_algo(mut self, algo: Algo) -> Self {
        self.algo = algo;
        self
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let h = &mut self.hyper;
        match key {
            "env" => self.env = parse(key, value)?,
            "algo" => self.algo = parse(key, value)?,
            "total_steps" => self.total_steps = parse(key, value)?,
            "eval_every" => self.eval_every = parse(key, value)?,
            "eval_episodes" => self.eval_episodes = parse(key, value)?,
            "eval_cap" => self.eval_cap = parse(key, value)?,
            "episode_cap" => self.episode_cap = parse(key, value)?,
            "seeds" => self.seeds = parse_seeds(value).map_err(|r| invalid(key, value, &r))?,
            "mu1" => h.mu1 = parse(key, value)?,
            "sigma1" => h.sigma1 = parse(key, value)?,
            "sigma2" => h.sigma2 = parse(key, value)?,
            "mu2" => h.mu2 = parse(key, value)?,
            "alpha0" => h.alpha.initial = parse(key, value)?,
            "alpha_decay" => h.alpha.decay = parse(key, value)?,
            "beta0" => h.beta.initial = parse(key, value)?,
            "beta_decay" => h.beta.decay = parse(key, value)?,
            "eps0" => h.epsilon.initial = parse(key, value)?,
            "eps_decay" => h.epsilon.decay = parse(key, value)?,
            "tilings" => h.tilings = parse(key, value)?,
            "tiles" => h.tiles = parse(key, value)?,
            "radius" => h.radius = parse(key, value)?,
            _ => return Err(unknown(key)),
        }
        Ok(())
    }

    /// Checks every invariant that cannot be expressed in the types.
    pub fn validate(&self) -> Result<()> {
        let h = &self.hyper;
        let positive = [
            ("mu1", h.mu1),
            ("sigma1", h.sigma1),
            ("sigma2", h.sigma2),
            ("mu2", h.mu2),
            ("alpha0", h.alpha.initial),
            ("beta0", h.beta.initial),
            ("radius", h.radius),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, &v.to_string(), "must be positive and finite"));
            }
        }
        for (key, s) in [
            ("alpha_decay", h.alpha),
            ("beta_decay", h.beta),
            ("eps_decay", h.epsilon),
        ] {
            if !(s.decay > 0.0 && s.decay <= 1.0) {
                return Err(invalid(key, &s.decay.to_string(), "must lie in (0, 1]"));
            }
        }
        if !(h.epsilon.initial >= 0.0 && h.epsilon.initial <= 1.0) {
            return Err(invalid(
                "eps0",
                &h.epsilon.initial.to_string(),
                "must lie in [0, 1]",
            ));
        }
        for (key, v) in [
            ("total_steps", self.total_steps),
            ("eval_every", self.eval_every),
            ("eval_episodes", self.eval_episodes as u64),
            ("eval_cap", self.eval_cap),
        ] {
            if v == 0 {
                return Err(invalid(key, "0", "must be positive"));
            }
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "", "at least one seed is required"));
        }
        if self.algo == Algo::TileTd {
            let dim = crate::envs::EnvSpec::new(self.env).state_dim;
            TileCodingSpec::uniform(h.tilings, h.tiles, dim)
                .map_err(|e| invalid("tiles", &h.tiles.to_string(), &e.to_string()))?;
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; [`parse_config`] reads it back exactly.
    pub fn serialize(&self) -> String {
        let h = &self.hyper;
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        let rows: [(&str, String); 21] = [
            ("env", self.env.to_string()),
            ("algo", self.algo.to_string()),
            ("total_steps", self.total_steps.to_string()),
            ("eval_every", self.eval_every.to_string()),
            ("eval_episodes", self.eval_episodes.to_string()),
            ("eval_cap", self.eval_cap.to_string()),
            ("episode_cap", self.episode_cap.to_string()),
            ("seeds", seeds.join(",")),
            ("mu1", h.mu1.to_string()),
            ("sigma1", h.sigma1.to_string()),
            ("sigma2", h.sigma2.to_string()),
            ("mu2", h.mu2.to_string()),
            ("alpha0", h.alpha.initial.to_string()),
            ("alpha_decay", h.alpha.decay.to_string()),
            ("beta0", h.beta.initial.to_string()),
            ("beta_decay", h.beta.decay.to_string()),
            ("eps0", h.epsilon.initial.to_string()),
            ("eps_decay", h.epsilon.decay.to_string()),
            ("tilings", h.tilings.to_string()),
            ("tiles", h.tiles.to_string()),
            ("radius", h.radius.to_string()),
        ];
        rows.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

fn unknown(key: &str) -> Error {
    Error::UnknownKey {
        key: key.to_string(),
        valid: VALID_KEYS.join(", "),
    }
}

fn invalid(key: &str, value: &str, reason: &str) -> Error {
    Error::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse::<T>()
        .map_err(|e| invalid(key, value, &e.to_string()))
}

/// Parses `a..b` (inclusive), `a,b,c`, or a single integer.
pub fn parse_seeds(text: &str) -> std::result::Result<Vec<u64>, String> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo
            .trim()
            .parse()
            .map_err(|e| format!("bad range start: {e}"))?;
        let hi = hi.trim().trim_start_matches('=');
        let hi: u64 = hi.parse().map_err(|e| format!("bad range end: {e}"))?;
        if hi < lo {
            return Err(format!("empty seed range {lo}..{hi}"));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad seed `{p}`: {e}"))
        })
        .collect()
}

/// Splits `key=value` override strings.
pub fn parse_override(text: &str) -> Result<(String, String)> {
    let (k, v) = text.split_once('=').ok_or_else(|| Error::Syntax {
        line: 0,
        text: text.to_string(),
    })?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn parse_lines(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let k = k.trim();
        if !VALID_KEYS.contains(&k) {
            return Err(unknown(k));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Resolves a config file body plus overrides into a validated config.
pub fn parse_config(text: &str, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let entries = parse_lines(text)?;
    for (k, _) in overrides {
        if !VALID_KEYS.contains(&k.as_str()) {
            return Err(unknown(k));
        }
    }
    let env_text = overrides
        .iter()
        .rev()
        .chain(entries.iter().rev())
        .find(|(k, _)| k == "env")
        .map(|(_, v)| v.clone())
        .ok_or_else(|| Error::MissingKey("env".into()))?;
    let env: EnvId = parse("env", &env_text)?;
    let mut config = ExperimentConfig::defaults(env);
    for (k, v) in entries.iter().chain(overrides) {
        config.set(k, v)?;
    }
    config.validate()?;
    Ok(config)
}
