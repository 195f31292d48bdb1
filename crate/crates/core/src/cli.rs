//! Command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, parse_override, Algo, ExperimentConfig};
use crate::envs::{EnvId, EnvSpec, EnvState};
use crate::features::NormalizedState;
use crate::harness::{
    attention_dump, dictionary_stats, evaluate, grid_eval, interference_probe, sample_state_pairs,
    train, train_seeds, DictionaryTrace, TrainOutput,
};
use crate::output::{self, CurveRow, DictStatsRow, ModelSnapshot, RunRow};
use crate::seeding::{stream, Stream};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "oaktd",
    version,
    about = "Online attentive kernel-based TD learning experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one algorithm over a set of seeds and write learning curves.
    Train(Common),
    /// Greedy evaluation of trained models.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Returns from every point of the Mountain Car state grid.
    GridEval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Attention of probe states over a trained dictionary.
    DumpAttention {
        #[command(flatten)]
        common: Common,
        /// Attention weights to use instead of the learned ones, e.g. `-0.13,-0.04`.
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        /// Physical probe states, `x1,y1;x2,y2`.
        #[arg(long, allow_hyphen_values = true)]
        states: Option<String>,
    },
    /// Gradient overlap against distance for random state pairs.
    ProbeInterference {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
    },
    /// Aggregate dictionary size and convergence point over recorded runs.
    DictStats(Common),
    /// Train every algorithm on one environment.
    Sweep(Common),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub env: Option<String>,
    #[arg(long)]
    pub algo: Option<String>,
    /// `0..9` (inclusive), `1,2,5` or a single seed.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub eval_every: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Flat `key = value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl Common {
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let text = match &self.config {
            Some(p) => fs::read_to_string(p)?,
            None => String::new(),
        };
        let mut overrides = self
            .overrides
            .iter()
            .map(|o| parse_override(o))
            .collect::<Result<Vec<_>>>()?;
        let flags = [
            ("env", self.env.clone()),
            ("algo", self.algo.clone()),
            ("seeds", self.seeds.clone()),
            ("total_steps", self.steps.map(|s| s.to_string())),
            ("eval_every", self.eval_every.map(|s| s.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                overrides.push((k.to_string(), v));
            }
        }
        parse_config(&text, &overrides)
    }
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("models"))?;
    Ok(())
}

fn model_path(dir: &Path, config: &ExperimentConfig, seed: u64) -> PathBuf {
    dir.join("models")
        .join(format!("{}_{}_seed{}.json", config.algo, config.env, seed))
}

fn training_key(config: &ExperimentConfig) -> ExperimentConfig {
    let mut c = config.clone();
    c.seeds = Vec::new();
    c
}

/// Loads the snapshot for `seed`, training (and saving) it first if it is
/// missing or was produced by a different config.
fn obtain_model(dir: &Path, config: &ExperimentConfig, seed: u64) -> Result<ModelSnapshot> {
    let path = model_path(dir, config, seed);
    if let Ok(snap) = output::load_model(&path) {
        if training_key(&snap.config) == training_key(config) && snap.seed == seed {
            return Ok(snap);
        }
    }
    let out = train(config, seed)?;
    let snap = ModelSnapshot {
        config: config.clone(),
        seed,
        agent: out.agent,
    };
    output::save_model(&path, &snap)?;
    Ok(snap)
}

fn summary_line(config: &ExperimentConfig, out: &TrainOutput) -> String {
    let mut line = format!("{} {} seed={}", config.algo, config.env, out.seed);
    if let Some(t) = &out.trace {
        line += &format!(" dict={}", t.size);
        match t.last_add_step {
            Some(s) => line += &format!(" last_add={s}"),
            None => line += " last_add=-",
        }
    }
    if let Some(r) = out.final_eval() {
        line += &format!(" final_return={:.2}±{:.2}", r.mean_return, r.std_return);
    }
    line += &format!(" projections={}", out.agent.projection_triggers());
    line
}

struct TrainArtifacts {
    curve: Vec<CurveRow>,
    runs: Vec<RunRow>,
    traces: Vec<DictionaryTrace>,
}

fn run_training(config: &ExperimentConfig, dir: &Path) -> Result<TrainArtifacts> {
    let results = train_seeds(config);
    let mut artifacts = TrainArtifacts {
        curve: Vec::new(),
        runs: Vec::new(),
        traces: Vec::new(),
    };
    let mut outputs = Vec::new();
    for r in results {
        let out = r?;
        println!("{}", summary_line(config, &out));
        artifacts.curve.extend(output::curve_rows(&out));
        artifacts
            .runs
            .push(output::run_row(&out, config.total_steps));
        artifacts.traces.extend(out.trace.clone());
        output::save_model(
            &model_path(dir, config, out.seed),
            &ModelSnapshot {
                config: config.clone(),
                seed: out.seed,
                agent: out.agent.clone(),
            },
        )?;
        outputs.push(out);
    }
    if config.algo.uses_dictionary() {
        let dicts: Vec<(u64, &crate::dictionary::Dictionary)> = outputs
            .iter()
            .filter_map(|o| o.agent.dictionary().map(|d| (o.seed, d)))
            .collect();
        output::write_dictionaries(&dir.join(output::DICTIONARY), &dicts)?;
    }
    Ok(artifacts)
}

fn cmd_train(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let art = run_training(config, dir)?;
    output::write_curve(&dir.join(output::LEARNING_CURVE), &art.curve)?;
    output::write_rows(&dir.join(output::RUNS), &art.runs)?;
    fs::write(dir.join("config.txt"), config.serialize())?;
    Ok(())
}

fn cmd_sweep(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let mut curve = Vec::new();
    let mut runs = Vec::new();
    let mut oaktd_traces = Vec::new();
    for algo in Algo::ALL {
        let c = config.clone().with_algo(algo);
        c.validate()?;
        let art = if algo == Algo::Oaktd {
            run_training(&c, dir)?
        } else {
            // keep dictionary.csv describing the attentive learner
            let tmp = TrainArtifacts {
                curve: Vec::new(),
                runs: Vec::new(),
                traces: Vec::new(),
            };
            let mut art = tmp;
            for r in train_seeds(&c) {
                let out = r?;
                println!("{}", summary_line(&c, &out));
                art.curve.extend(output::curve_rows(&out));
                art.runs.push(output::run_row(&out, c.total_steps));
            }
            art
        };
        if algo == Algo::Oaktd {
            oaktd_traces = art.traces;
        }
        curve.extend(art.curve);
        runs.extend(art.runs);
    }
    output::write_curve(&dir.join(output::LEARNING_CURVE), &curve)?;
    output::write_rows(&dir.join(output::RUNS), &runs)?;
    let stats = dictionary_stats(&oaktd_traces)?;
    output::write_rows(
        &dir.join(output::DICT_STATS),
        &[DictStatsRow::new(config.env.name(), &stats)],
    )?;
    Ok(())
}

fn cmd_dict_stats(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let path = dir.join(output::RUNS);
    let rows: Vec<RunRow> = output::read_rows(&path)?;
    let mut by_env: BTreeMap<String, Vec<DictionaryTrace>> = BTreeMap::new();
    for r in rows.into_iter().filter(|r| r.algo == config.algo.name()) {
        if let Some(size) = r.dict_size {
            by_env
                .entry(r.env.clone())
                .or_default()
                .push(DictionaryTrace {
                    size,
                    last_add_step: r.last_add_step,
                    total_steps: r.total_steps,
                });
        }
    }
    if by_env.is_empty() {
        return Err(Error::Data {
            path: path.display().to_string(),
            reason: format!("no dictionary runs recorded for algo {}", config.algo),
        });
    }
    let mut out = Vec::new();
    for (env, traces) in &by_env {
        let stats = dictionary_stats(traces)?;
        println!(
            "{env}: runs={} size={:.2}±{:.2} conv%={:.3}±{:.3}",
            stats.runs,
            stats.size_mean,
            stats.size_std,
            stats.convergence_fraction_mean,
            stats.convergence_fraction_std
        );
        out.push(DictStatsRow::new(env, &stats));
    }
    output::write_rows(&dir.join(output::DICT_STATS), &out)
}

fn cmd_eval(
    config: &ExperimentConfig,
    dir: &Path,
    episodes: Option<usize>,
    cap: Option<u64>,
) -> Result<()> {
    let spec = EnvSpec::new(config.env);
    let episodes = episodes.unwrap_or(config.eval_episodes);
    let cap = cap.unwrap_or(config.eval_cap);
    let mut rows = Vec::new();
    for &seed in &config.seeds {
        let snap = obtain_model(dir, config, seed)?;
        let mut rng = stream(seed, Stream::Eval, u64::MAX);
        let rec = evaluate(&spec, &snap.agent, episodes, cap, &mut rng);
        println!(
            "{} {} seed={} return={:.2}±{:.2}",
            config.algo, config.env, seed, rec.mean_return, rec.std_return
        );
        rows.push(CurveRow {
            algo: config.algo.to_string(),
            env: config.env.to_string(),
            seed,
            step: config.total_steps,
            mean_return: rec.mean_return,
            std_return: rec.std_return,
        });
    }
    output::write_curve(&dir.join(output::EVAL), &rows)
}

fn first_seed(config: &ExperimentConfig) -> u64 {
    config.seeds[0]
}

fn cmd_grid_eval(config: &ExperimentConfig, dir: &Path, cap: Option<u64>) -> Result<()> {
    let spec = EnvSpec::new(config.env);
    if config.env != EnvId::MountainCar {
        return Err(Error::InvalidArgument(
            "grid-eval is only defined for --env mountain-car".into(),
        ));
    }
    let seed = first_seed(config);
    let snap = obtain_model(dir, config, seed)?;
    let cells = grid_eval(&spec, &snap.agent, cap.unwrap_or(config.eval_cap), seed)?;
    let mean = cells.iter().map(|c| c.ret).sum::<f64>() / cells.len() as f64;
    println!(
        "{} seed={} grid cells={} mean_return={:.2}",
        config.algo,
        seed,
        cells.len(),
        mean
    );
    output::write_grid(&dir.join(output::GRID_EVAL), &cells)
}

fn parse_vector(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad {what} component `{p}`: {e}")))
        })
        .collect()
}

fn default_probe_states(env: EnvId) -> Vec<EnvState> {
    match env {
        EnvId::MountainCar => vec![
            EnvState(vec![-1.0, -0.07]),
            EnvState(vec![0.0, 0.0]),
            EnvState(vec![0.5, 0.07]),
        ],
        EnvId::PuddleWorld => vec![EnvState(vec![0.2, 0.4]), EnvState(vec![0.5, 0.5])],
        EnvId::Acrobot | EnvId::CartPole => vec![EnvState(vec![0.0; 4])],
    }
}

fn cmd_dump_attention(
    config: &ExperimentConfig,
    dir: &Path,
    w: Option<&str>,
    states: Option<&str>,
) -> Result<()> {
    if config.algo != Algo::Oaktd {
        return Err(Error::InvalidArgument(
            "dump-attention needs --algo oaktd".into(),
        ));
    }
    let spec = EnvSpec::new(config.env);
    let snap = obtain_model(dir, config, first_seed(config))?;
    let dictionary = snap
        .agent
        .dictionary()
        .filter(|d| !d.is_empty())
        .ok_or_else(|| Error::InvalidArgument("trained dictionary is empty".into()))?;
    let weights = match w {
        Some(text) => parse_vector(text, "w")?,
        None => snap
            .agent
            .learner()
            .map(|l| l.w.0.clone())
            .unwrap_or_default(),
    };
    if weights.len() != spec.state_dim {
        return Err(Error::InvalidArgument(format!(
            "w needs {} components, got {}",
            spec.state_dim,
            weights.len()
        )));
    }
    let probe = match states {
        Some(text) => text
            .split(';')
            .map(|s| parse_vector(s, "state").map(EnvState))
            .collect::<Result<Vec<_>>>()?,
        None => default_probe_states(config.env),
    };
    if let Some(bad) = probe.iter().find(|s| s.len() != spec.state_dim) {
        return Err(Error::InvalidArgument(format!(
            "probe state {:?} does not have {} components",
            bad.0, spec.state_dim
        )));
    }
    let normalized: Vec<NormalizedState> = probe.iter().map(|s| snap.agent.normalize(s)).collect();
    let matrix = attention_dump(&weights, dictionary, &normalized);
    println!(
        "attention {}x{} with w={:?}",
        matrix.len(),
        dictionary.len(),
        weights
    );
    output::write_attention(&dir.join(output::ATTENTION), &matrix)
}

fn cmd_probe(config: &ExperimentConfig, dir: &Path, pairs: usize) -> Result<()> {
    let seed = first_seed(config);
    let snap = obtain_model(dir, config, seed)?;
    let approx = snap.agent.approximator().ok_or_else(|| {
        Error::InvalidArgument(
            "interference probing needs a kernel algorithm with a non-empty dictionary".into(),
        )
    })?;
    let dim = snap.agent.bounds.len();
    let mut rng = stream(seed, Stream::Probe, 0);
    let sampled = sample_state_pairs(&mut rng, dim, pairs);
    let records = interference_probe(&approx, &sampled);
    println!("{} interference pairs written", records.len());
    output::write_interference(&dir.join(output::INTERFERENCE), &records)
}

/// Caps the rayon pool from `OAKTD_THREADS`, if set.
pub fn init_threads() {
    if let Some(n) = std::env::var("OAKTD_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // a second initialization attempt is harmless and ignored
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Train(c) | Command::DictStats(c) | Command::Sweep(c) => c,
        Command::Eval { common, .. }
        | Command::GridEval { common, .. }
        | Command::DumpAttention { common, .. }
        | Command::ProbeInterference { common, .. } => common,
    };
    let config = common.resolve()?;
    let dir = common.out_dir.as_path();
    prepare_out_dir(dir)?;
    match &cli.command {
        Command::Train(_) => cmd_train(&config, dir),
        Command::Sweep(_) => cmd_sweep(&config, dir),
        Command::DictStats(_) => cmd_dict_stats(&config, dir),
        Command::Eval { episodes, cap, .. } => cmd_eval(&config, dir, *episodes, *cap),
        Command::GridEval { cap, .. } => cmd_grid_eval(&config, dir, *cap),
        Command::DumpAttention { w, states, .. } => {
            cmd_dump_attention(&config, dir, w.as_deref(), states.as_deref())
        }
        Command::ProbeInterference { pairs, .. } => cmd_probe(&config, dir, *pairs),
    }
}
