//! The encode/decode grid harness.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use dualdomain::{decode, encode, sdr, tf_direct_baseline, Algorithm, EncodeSpec, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::signals::excerpt;
use crate::FrameArgs;

pub const CSV_HEADER: [&str; 11] = [
    "signal_id",
    "p_T",
    "p_TF",
    "b_T",
    "b_TF",
    "model",
    "seed",
    "bitrate",
    "sdr_db",
    "iterations",
    "wall_time_s",
];

/// How a grid cell is reconstructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analysis,
    Synthesis,
    /// Direct synthesis of the transmitted coefficients.
    TfDirect,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Analysis => "analysis",
            Method::Synthesis => "synthesis",
            Method::TfDirect => "tf_direct",
        }
    }
}

fn default_bits() -> Vec<u32> {
    vec![2, 4, 8, 16, 32]
}

fn default_models() -> Vec<Method> {
    vec![Method::Analysis]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_excerpt() -> f64 {
    1.0
}

fn default_iterations() -> usize {
    300
}

/// Grid description read from JSON. Every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    /// WAV files added to those given on the command line.
    #[serde(default)]
    pub inputs: Vec<String>,
    /// Crossed with `p_tf` unless `splits` is given.
    #[serde(default)]
    pub p_t: Vec<f64>,
    #[serde(default)]
    pub p_tf: Vec<f64>,
    /// Explicit `(p_T, p_TF)` pairs, e.g. points on an equal-bitrate line.
    #[serde(default)]
    pub splits: Option<Vec<(f64, f64)>>,
    /// Bit depths, used for both domains.
    #[serde(default = "default_bits")]
    pub bits: Vec<u32>,
    #[serde(default = "default_models")]
    pub models: Vec<Method>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_excerpt")]
    pub excerpt_seconds: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub frame: FrameArgs,
}

fn default_algorithm() -> Algorithm {
    Algorithm::Tight
}

impl Default for ExperimentGrid {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentGrid {
    pub fn from_json(text: &str) -> Result<Self> {
        let grid: Self = serde_json::from_str(text).context("invalid grid configuration")?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let fractions = self
            .p_t
            .iter()
            .chain(&self.p_tf)
            .chain(self.splits.iter().flatten().flat_map(|(a, b)| [a, b]));
        for p in fractions {
            if !(0.0..=1.0).contains(p) {
                bail!("fraction {p} outside [0, 1]");
            }
        }
        if let Some(b) = self.bits.iter().find(|b| !(1..=52).contains(*b)) {
            bail!("bit depth {b} outside 1..=52");
        }
        if !self.excerpt_seconds.is_finite() || self.excerpt_seconds <= 0.0 {
            bail!("excerpt_seconds must be positive and finite");
        }
        Ok(())
    }

    /// `(p_T, p_TF)` points of the grid, in row order.
    pub fn splits(&self) -> Vec<(f64, f64)> {
        match &self.splits {
            Some(s) => s.clone(),
            None => self
                .p_t
                .iter()
                .flat_map(|&a| self.p_tf.iter().map(move |&b| (a, b)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NamedSignal {
    pub id: String,
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub signal_id: String,
    #[serde(rename = "p_T")]
    pub p_t: f64,
    #[serde(rename = "p_TF")]
    pub p_tf: f64,
    #[serde(rename = "b_T")]
    pub b_t: u32,
    #[serde(rename = "b_TF")]
    pub b_tf: u32,
    pub model: Method,
    pub seed: u64,
    /// Bits per second of audio.
    pub bitrate: f64,
    /// NaN for a failed cell.
    pub sdr_db: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
}

struct Cell<'a> {
    signal: &'a NamedSignal,
    excerpt: &'a [f64],
    p_t: f64,
    p_tf: f64,
    bits: u32,
    method: Method,
    seed: u64,
}

/// Runs every cell of the grid on `jobs` threads. Rows come back in grid
/// order (signal, split, bits, seed, model) whatever the thread count.
pub fn run_grid(
    grid: &ExperimentGrid,
    signals: &[NamedSignal],
    jobs: usize,
) -> Result<Vec<ResultRow>> {
    grid.validate()?;
    let excerpts: Vec<Vec<f64>> = signals
        .iter()
        .map(|s| {
            excerpt(&s.samples, s.sample_rate, grid.excerpt_seconds)
                .with_context(|| format!("signal {}", s.id))
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (signal, ex) in signals.iter().zip(&excerpts) {
        for (p_t, p_tf) in grid.splits() {
            for &bits in &grid.bits {
                for &seed in &grid.seeds {
                    for &method in &grid.models {
                        cells.push(Cell {
                            signal,
                            excerpt: ex,
                            p_t,
                            p_tf,
                            bits,
                            method,
                            seed,
                        });
                    }
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("cannot start worker threads")?;
    Ok(pool.install(|| cells.par_iter().map(|cell| run_cell(grid, cell)).collect()))
}

fn run_cell(grid: &ExperimentGrid, cell: &Cell<'_>) -> ResultRow {
    let start = Instant::now();
    let duration = cell.excerpt.len() as f64 / cell.signal.sample_rate as f64;
    let outcome = (|| -> Result<(f64, usize, u64)> {
        let frame = grid.frame.build(cell.excerpt.len())?;
        let spec = EncodeSpec {
            p_t: cell.p_t,
            p_tf: cell.p_tf,
            b_t: cell.bits,
            b_tf: cell.bits,
            seed: cell.seed,
            frame,
        };
        let payload = encode(cell.excerpt, &spec)?;
        let bits = payload.bit_cost();
        let (signal, iterations) = match cell.method {
            Method::TfDirect => (tf_direct_baseline(&payload)?, 0),
            Method::Analysis | Method::Synthesis => {
                let model = if cell.method == Method::Analysis {
                    dualdomain::Model::Analysis
                } else {
                    dualdomain::Model::Synthesis
                };
                let config =
                    SolverConfig::for_algorithm(grid.algorithm).with_iterations(grid.iterations);
                let decoded = decode(&payload, model, grid.algorithm, &config)?;
                (decoded.signal, decoded.report.iterations_run)
            }
        };
        Ok((sdr(cell.excerpt, &signal)?, iterations, bits))
    })();
    let (sdr_db, iterations, bits) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!(
                "warning: cell {} p_T={} p_TF={} b={} {} seed={} failed: {e:#}",
                cell.signal.id,
                cell.p_t,
                cell.p_tf,
                cell.bits,
                cell.method.as_str(),
                cell.seed
            );
            let bits = nominal_bits(cell, grid);
            (f64::NAN, 0, bits)
        }
    };
    ResultRow {
        signal_id: cell.signal.id.clone(),
        p_t: cell.p_t,
        p_tf: cell.p_tf,
        b_t: cell.bits,
        b_tf: cell.bits,
        model: cell.method,
        seed: cell.seed,
        bitrate: bits as f64 / duration,
        sdr_db,
        iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Budget of a cell that failed before encoding finished.
fn nominal_bits(cell: &Cell<'_>, grid: &ExperimentGrid) -> u64 {
    let p = cell.excerpt.len() as f64;
    let q = grid
        .frame
        .build(cell.excerpt.len())
        .map(|f| f.coefficient_count() as f64)
        .unwrap_or(0.0);
    ((cell.p_t * p).round() * cell.bits as f64 + (cell.p_tf * q).round() * cell.bits as f64) as u64
}

/// Writes the header and all rows.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record([
            row.signal_id.clone(),
            row.p_t.to_string(),
            row.p_tf.to_string(),
            row.b_t.to_string(),
            row.b_tf.to_string(),
            row.model.as_str().to_string(),
            row.seed.to_string(),
            row.bitrate.to_string(),
            row.sdr_db.to_string(),
            row.iterations.to_string(),
            format!("{:.6}", row.wall_time_s),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
