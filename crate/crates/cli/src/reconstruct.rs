//! Single-file reconstruction: degrade (or read a payload), solve, report.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use dualdomain::degradation::Degradation;
use dualdomain::{
    codec, sdr, solve_general, solve_tight, Algorithm, BoxConstraint, ComplexBox, ComplexRecord,
    EncodedPayload, FrameSpec, Mode, Model, Primal, ProblemSpec, QuantizerSpec, SolveReport,
    SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::wav::{load_wav, save_wav};
use crate::FrameArgs;

/// Where the degradation flags apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DegradeDomain {
    #[default]
    Time,
    Tf,
    Both,
}

#[derive(Clone, Debug)]
pub enum Source {
    /// Degrade a clean WAV in memory.
    Wav(PathBuf),
    /// Reconstruct from an encoded payload file.
    Payload(PathBuf),
}

#[derive(Clone, Debug)]
pub struct ReconstructOptions {
    pub source: Source,
    /// Fraction of entries kept (random, seeded).
    pub mask_keep: Option<f64>,
    pub clip_theta: Option<f64>,
    pub quant_bits: Option<u32>,
    pub domain: DegradeDomain,
    pub model: Model,
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub iterations: usize,
    pub seed: u64,
    pub frame: FrameArgs,
    /// Sample rate for payload sources, which carry none.
    pub sample_rate: u32,
    pub output: PathBuf,
    pub report: Option<PathBuf>,
    pub reference: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructReport {
    pub model: Model,
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub sample_rate: u32,
    pub samples: usize,
    #[serde(flatten)]
    pub solve: SolveReport,
    /// Against `--reference`, when given.
    pub sdr_db: Option<f64>,
    /// Time-domain observation against `--reference`, when both exist.
    pub degraded_sdr_db: Option<f64>,
}

struct Prepared {
    frame: FrameSpec,
    box_t: BoxConstraint,
    box_tf: ComplexBox,
    /// Zero-padded time-domain observation used as the warm start.
    observation: Vec<f64>,
    signal_length: usize,
    sample_rate: u32,
    has_time_observation: bool,
}

fn keep_mask(rng: &mut ChaCha8Rng, len: usize, fraction: Option<f64>) -> Option<Vec<bool>> {
    fraction.map(|p| (0..len).map(|_| rng.random_bool(p)).collect())
}

fn prepare_wav(path: &PathBuf, opts: &ReconstructOptions) -> Result<Prepared> {
    let audio = load_wav(path)?;
    if audio.samples.is_empty() {
        bail!("{} contains no samples", path.display());
    }
    let frame = opts.frame.build(audio.samples.len())?;
    let padded = frame.pad(&audio.samples)?;
    let pad = frame.signal_length() - audio.samples.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let time = matches!(opts.domain, DegradeDomain::Time | DegradeDomain::Both);
    let tf = matches!(opts.domain, DegradeDomain::Tf | DegradeDomain::Both);

    let (observation, box_t) = if time {
        let (obs, records) = Degradation {
            keep: keep_mask(&mut rng, audio.samples.len(), opts.mask_keep),
            clip_theta: opts.clip_theta,
            quantizer: opts
                .quant_bits
                .map(|b| QuantizerSpec::new(b, 1.0))
                .transpose()?,
        }
        .apply(&audio.samples)?;
        (
            frame.pad(&obs)?,
            BoxConstraint::from_records(&records)?.extended_pinned(pad, 0.0),
        )
    } else {
        // the time domain is not observed; only the padding is known
        let mut lower = vec![f64::NEG_INFINITY; audio.samples.len()];
        let mut upper = vec![f64::INFINITY; audio.samples.len()];
        lower.resize(frame.signal_length(), 0.0);
        upper.resize(frame.signal_length(), 0.0);
        (
            vec![0.0; frame.signal_length()],
            BoxConstraint::new(lower, upper)?,
        )
    };

    let box_tf = if tf {
        let coeffs = frame.analyze(&padded)?.into_values();
        let pairs = frame.conjugate_pairs();
        let keep = keep_mask(&mut rng, pairs.len(), opts.mask_keep);
        let quantizer = match opts.quant_bits {
            Some(bits) => {
                let kept: Vec<_> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| keep.as_ref().is_none_or(|k| k[*i]))
                    .map(|(_, p)| coeffs[p.representative])
                    .collect();
                Some(QuantizerSpec::for_batch(bits, &kept)?)
            }
            None => None,
        };
        let records: Vec<ComplexRecord> = Degradation {
            keep,
            clip_theta: opts.clip_theta,
            quantizer,
        }
        .apply_conjugate(&coeffs, &pairs)?;
        ComplexBox::from_records(&records)?
    } else {
        ComplexBox::unbounded(frame.coefficient_count())
    };

    Ok(Prepared {
        frame,
        box_t,
        box_tf,
        observation,
        signal_length: audio.samples.len(),
        sample_rate: audio.sample_rate,
        has_time_observation: time,
    })
}

fn prepare_payload(path: &PathBuf, opts: &ReconstructOptions) -> Result<Prepared> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let payload = EncodedPayload::from_json(&text)?;
    let frame = payload.frame()?;
    let (box_t, box_tf) = codec::feasible_sets(&payload, &frame)?;
    Ok(Prepared {
        observation: payload.time_observation(&frame)?,
        frame,
        box_t,
        box_tf,
        signal_length: payload.signal_length,
        sample_rate: opts.sample_rate,
        has_time_observation: payload.kept_samples() > 0,
    })
}

/// Runs one reconstruction and writes the WAV (and report, if requested).
pub fn run_reconstruct(opts: &ReconstructOptions) -> Result<ReconstructReport> {
    let prepared = match &opts.source {
        Source::Wav(path) => prepare_wav(path, opts)?,
        Source::Payload(path) => prepare_payload(path, opts)?,
    };
    let Prepared {
        frame,
        box_t,
        box_tf,
        observation,
        signal_length,
        sample_rate,
        has_time_observation,
    } = prepared;

    let init = Primal::from_observation(opts.model, &frame, &observation)?;
    let problem = ProblemSpec::new(frame, opts.model, box_t, box_tf)?.with_mode(opts.mode);
    let config = SolverConfig::for_algorithm(opts.algorithm).with_iterations(opts.iterations);
    let (solution, solve_report) = match opts.algorithm {
        Algorithm::General => solve_general(&problem, &config, init)?,
        Algorithm::Tight => solve_tight(&problem, &config, init)?,
    };
    let mut signal = solution.signal;
    signal.truncate(signal_length);
    save_wav(&opts.output, &signal, sample_rate)?;

    let (sdr_db, degraded_sdr_db) = match &opts.reference {
        Some(path) => {
            let mut reference = load_wav(path)?.samples;
            reference.resize(signal_length, 0.0);
            let degraded = if has_time_observation {
                Some(sdr(&reference, &observation[..signal_length])?)
            } else {
                None
            };
            (Some(sdr(&reference, &signal)?), degraded)
        }
        None => (None, None),
    };
    let report = ReconstructReport {
        model: opts.model,
        algorithm: opts.algorithm,
        mode: opts.mode,
        sample_rate,
        samples: signal_length,
        solve: solve_report,
        sdr_db,
        degraded_sdr_db,
    };
    if let Some(path) = &opts.report {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(report)
}
