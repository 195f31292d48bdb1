//! CSV artifacts and model snapshots.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::dictionary::Dictionary;
use crate::harness::{Agent, DictionaryStats, GridCell, InterferenceRecord, TrainOutput};
use crate::{Error, Result};

pub const LEARNING_CURVE: &str = "learning_curve.csv";
pub const RUNS: &str = "runs.csv";
pub const DICT_STATS: &str = "dict_stats.csv";
pub const DICTIONARY: &str = "dictionary.csv";
pub const ATTENTION: &str = "attention.csv";
pub const GRID_EVAL: &str = "grid_eval.csv";
pub const INTERFERENCE: &str = "interference.csv";
pub const EVAL: &str = "eval.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub algo: String,
    pub env: String,
    pub seed: u64,
    pub step: u64,
    pub mean_return: f64,
    pub std_return: f64,
}

/// One line per training run; `dict-stats` aggregates these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub algo: String,
    pub env: String,
    pub seed: u64,
    pub total_steps: u64,
    pub dict_size: Option<usize>,
    pub last_add_step: Option<u64>,
    pub projection_triggers: u64,
    pub final_mean_return: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictStatsRow {
    pub env: String,
    pub runs: usize,
    pub size_mean: f64,
    pub size_std: f64,
    pub conv_pct_mean: f64,
    pub conv_pct_std: f64,
}

impl DictStatsRow {
    pub fn new(env: &str, stats: &DictionaryStats) -> Self {
        DictStatsRow {
            env: env.to_string(),
            runs: stats.runs,
            size_mean: stats.size_mean,
            size_std: stats.size_std,
            conv_pct_mean: stats.convergence_fraction_mean,
            conv_pct_std: stats.convergence_fraction_std,
        }
    }
}

#[derive(Serialize)]
struct AttentionRow {
    state_index: usize,
    dict_index: usize,
    weight: f64,
}

#[derive(Serialize)]
struct InterferenceRow {
    distance: f64,
    overlap: f64,
}

pub fn curve_rows(out: &TrainOutput) -> Vec<CurveRow> {
    out.log
        .iter()
        .map(|r| CurveRow {
            algo: out.agent.algo.to_string(),
            env: out.agent.env.to_string(),
            seed: out.seed,
            step: r.step,
            mean_return: r.mean_return,
            std_return: r.std_return,
        })
        .collect()
}

pub fn run_row(out: &TrainOutput, total_steps: u64) -> RunRow {
    RunRow {
        algo: out.agent.algo.to_string(),
        env: out.agent.env.to_string(),
        seed: out.seed,
        total_steps,
        dict_size: out.trace.as_ref().map(|t| t.size),
        last_add_step: out.trace.as_ref().and_then(|t| t.last_add_step),
        projection_triggers: out.agent.projection_triggers(),
        final_mean_return: out.final_eval().map(|r| r.mean_return),
    }
}

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes rows, emitting the header even when `rows` is empty.
fn write_with_header<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve(path: &Path, rows: &[CurveRow]) -> Result<()> {
    write_with_header(
        path,
        &["algo", "env", "seed", "step", "mean_return", "std_return"],
        rows,
    )
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// `seed,index,c0..c{d-1},add_step` for every prototype of every seed.
pub fn write_dictionaries(path: &Path, dictionaries: &[(u64, &Dictionary)]) -> Result<()> {
    let dim = dictionaries
        .iter()
        .find_map(|(_, d)| d.prototypes().first().map(|p| p.dim()))
        .unwrap_or(0);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["seed".to_string(), "index".to_string()];
    header.extend((0..dim).map(|k| format!("c{k}")));
    header.push("add_step".into());
    w.write_record(&header)?;
    for (seed, d) in dictionaries {
        for (i, (p, step)) in d.prototypes().iter().zip(d.add_steps()).enumerate() {
            let mut rec = vec![seed.to_string(), i.to_string()];
            rec.extend(p.iter().map(|c| c.to_string()));
            rec.push(step.to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_attention(path: &Path, matrix: &[Vec<f64>]) -> Result<()> {
    let rows: Vec<AttentionRow> = matrix
        .iter()
        .enumerate()
        .flat_map(|(state_index, row)| {
            row.iter()
                .enumerate()
                .map(move |(dict_index, &weight)| AttentionRow {
                    state_index,
                    dict_index,
                    weight,
                })
        })
        .collect();
    write_with_header(path, &["state_index", "dict_index", "weight"], &rows)
}

pub fn write_grid(path: &Path, cells: &[GridCell]) -> Result<()> {
    write_with_header(path, &["position", "velocity", "return"], cells)
}

pub fn write_interference(path: &Path, records: &[InterferenceRecord]) -> Result<()> {
    let rows: Vec<InterferenceRow> = records
        .iter()
        .map(|r| InterferenceRow {
            distance: r.distance,
            overlap: r.overlap,
        })
        .collect();
    write_with_header(path, &["distance", "overlap"], &rows)
}

/// Trained agent together with the config that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSnapshot {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub agent: Agent,
}

pub fn save_model(path: &Path, snapshot: &ModelSnapshot) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, snapshot)?;
    w.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelSnapshot> {
    let f = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}
