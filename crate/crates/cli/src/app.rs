//! Argument parsing and subcommand dispatch.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dualdomain::{encode, Algorithm, EncodeSpec, Mode, Model};

use crate::experiment::{run_grid, write_csv, ExperimentGrid, NamedSignal};
use crate::reconstruct::{run_reconstruct, DegradeDomain, ReconstructOptions, Source};
use crate::signals::{multitone, peak_normalize, two_tone};
use crate::wav::{load_wav, save_wav};
use crate::FrameArgs;

#[derive(Debug, Parser)]
#[command(
    name = "dualdomain",
    version,
    about = "Audio reconstruction from time and time-frequency observations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degrade a WAV (or read a payload) and reconstruct it.
    Reconstruct(ReconstructArgs),
    /// Run an encode/decode grid and write a CSV of results.
    Experiment(ExperimentArgs),
    /// Encode a WAV into a payload file.
    Encode(EncodeArgs),
    /// Write a synthetic test signal.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Analysis,
    Synthesis,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Analysis => Model::Analysis,
            ModelArg::Synthesis => Model::Synthesis,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AlgorithmArg {
    General,
    Tight,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::General => Algorithm::General,
            AlgorithmArg::Tight => Algorithm::Tight,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Consistent,
    Inconsistent,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Consistent => Mode::Consistent,
            ModeArg::Inconsistent => Mode::Inconsistent,
        }
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1]"))
    }
}

#[derive(Debug, clap::Args)]
pub struct ReconstructArgs {
    /// Clean input WAV to degrade.
    #[arg(long, required_unless_present = "payload", conflicts_with = "payload")]
    pub input: Option<PathBuf>,
    /// Encoded payload to reconstruct instead of degrading a WAV.
    #[arg(long)]
    pub payload: Option<PathBuf>,
    /// Fraction of entries kept at random.
    #[arg(long, value_parser = fraction)]
    pub mask_keep: Option<f64>,
    /// Clipping threshold.
    #[arg(long)]
    pub clip_theta: Option<f64>,
    /// Quantizer bit depth.
    #[arg(long)]
    pub quant_bits: Option<u32>,
    #[arg(long, value_enum, default_value_t = DegradeDomain::Time)]
    pub degrade_domain: DegradeDomain,
    #[arg(long, value_enum, default_value_t = ModelArg::Analysis)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Tight)]
    pub algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Consistent)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 300)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample rate written for payload inputs.
    #[arg(long, default_value_t = 44100)]
    pub sample_rate: u32,
    #[command(flatten)]
    pub frame: FrameArgs,
    #[arg(long)]
    pub output: PathBuf,
    /// JSON report destination.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Clean reference for SDR.
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ExperimentArgs {
    /// Grid configuration (JSON).
    pub config: PathBuf,
    /// Input WAVs, in addition to those listed in the config.
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    /// Parallel grid cells.
    #[arg(long, env = "DUALDOMAIN_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, clap::Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_parser = fraction)]
    pub p_t: f64,
    #[arg(long, value_parser = fraction)]
    pub p_tf: f64,
    #[arg(long)]
    pub b_t: u32,
    #[arg(long)]
    pub b_tf: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub frame: FrameArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SignalKind {
    /// 440 Hz + 1230 Hz.
    TwoTone,
    /// Random partials over a noise floor.
    Multitone,
}

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: SignalKind,
    #[arg(long, default_value_t = 1.0)]
    pub seconds: f64,
    #[arg(long, default_value_t = 44100)]
    pub sample_rate: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Partials of the multitone signal.
    #[arg(long, default_value_t = 6)]
    pub partials: usize,
    /// Noise floor of the multitone signal, in dB below the tonal peak.
    #[arg(long, default_value_t = 60.0)]
    pub noise_db: f64,
    /// Peak amplitude of the written signal.
    #[arg(long, default_value_t = 0.9)]
    pub peak: f64,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Reconstruct(args) => reconstruct(args),
        Command::Experiment(args) => experiment(args),
        Command::Encode(args) => encode_cmd(args),
        Command::Generate(args) => generate(args),
    }
}

fn reconstruct(args: ReconstructArgs) -> Result<()> {
    let source = match (args.input, args.payload) {
        (Some(path), _) => Source::Wav(path),
        (None, Some(path)) => Source::Payload(path),
        (None, None) => unreachable!("clap requires one of --input and --payload"),
    };
    let opts = ReconstructOptions {
        source,
        mask_keep: args.mask_keep,
        clip_theta: args.clip_theta,
        quant_bits: args.quant_bits,
        domain: args.degrade_domain,
        model: args.model.into(),
        algorithm: args.algorithm.into(),
        mode: args.mode.into(),
        iterations: args.iterations,
        seed: args.seed,
        frame: args.frame,
        sample_rate: args.sample_rate,
        output: args.output,
        report: args.report,
        reference: args.reference,
    };
    let report = run_reconstruct(&opts)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read {}", args.config.display()))?;
    let grid = ExperimentGrid::from_json(&text)?;
    let paths: Vec<PathBuf> = grid
        .inputs
        .iter()
        .map(PathBuf::from)
        .chain(args.inputs)
        .collect();
    let signals = paths
        .iter()
        .map(|path| {
            let audio = load_wav(path)?;
            Ok(NamedSignal {
                id: path.file_stem().map_or_else(
                    || path.display().to_string(),
                    |s| s.to_string_lossy().into_owned(),
                ),
                samples: audio.samples,
                sample_rate: audio.sample_rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let rows = run_grid(&grid, &signals, jobs)?;
    let file = File::create(&args.output)
        .with_context(|| format!("cannot create {}", args.output.display()))?;
    write_csv(&rows, BufWriter::new(file))?;
    let failed = rows.iter().filter(|r| r.sdr_db.is_nan()).count();
    eprintln!(
        "{} rows written to {} ({failed} failed)",
        rows.len(),
        args.output.display()
    );
    Ok(())
}

fn encode_cmd(args: EncodeArgs) -> Result<()> {
    let audio = load_wav(&args.input)?;
    let y = peak_normalize(&audio.samples)?;
    let spec = EncodeSpec {
        p_t: args.p_t,
        p_tf: args.p_tf,
        b_t: args.b_t,
        b_tf: args.b_tf,
        seed: args.seed,
        frame: args.frame.build(y.len())?,
    };
    let payload = encode(&y, &spec)?;
    std::fs::write(&args.output, payload.to_json()?)
        .with_context(|| format!("cannot write {}", args.output.display()))?;
    println!(
        "{} bits ({:.1} bit/s)",
        payload.bit_cost(),
        payload.bit_cost() as f64 / audio.duration_seconds()
    );
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let len = (args.seconds * args.sample_rate as f64).round() as usize;
    let x = match args.kind {
        SignalKind::TwoTone => two_tone(len, args.sample_rate, 440.0, 1230.0),
        SignalKind::Multitone => multitone(
            args.seed,
            len,
            args.sample_rate,
            args.partials,
            args.noise_db,
        ),
    };
    let scaled: Vec<f64> = x.iter().map(|v| v * args.peak).collect();
    save_wav(&args.output, &scaled, args.sample_rate)
}
