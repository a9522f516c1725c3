//! Deterministic synthetic test signals and excerpt selection.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Samples below this magnitude count as leading silence.
pub const SILENCE_THRESHOLD: f64 = 1e-4;

/// Scales `x` so that `max |x| = 1`.
pub fn peak_normalize(x: &[f64]) -> Result<Vec<f64>> {
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 || !peak.is_finite() {
        bail!("cannot peak-normalize a signal with peak {peak}");
    }
    Ok(x.iter().map(|v| v / peak).collect())
}

/// The first `seconds` of audio after leading silence, peak-normalized.
/// Shorter inputs yield whatever remains.
pub fn excerpt(samples: &[f64], sample_rate: u32, seconds: f64) -> Result<Vec<f64>> {
    let Some(start) = samples.iter().position(|v| v.abs() >= SILENCE_THRESHOLD) else {
        bail!("signal is silent");
    };
    let len = (seconds * sample_rate as f64).round() as usize;
    let end = (start + len).min(samples.len());
    peak_normalize(&samples[start..end])
}

/// Sum of two sinusoids, peak-normalized.
pub fn two_tone(len: usize, sample_rate: u32, f1: f64, f2: f64) -> Vec<f64> {
    let w = 2.0 * PI / sample_rate as f64;
    let x: Vec<f64> = (0..len)
        .map(|n| {
            let n = n as f64;
            (w * f1 * n).sin() + 0.6 * (w * f2 * n + 1.0).sin()
        })
        .collect();
    peak_normalize(&x).expect("two tones are not silent")
}

/// A few stable partials with random frequencies, amplitudes and phases over
/// a uniform noise floor `noise_db` below the tonal peak, peak-normalized.
pub fn multitone(
    seed: u64,
    len: usize,
    sample_rate: u32,
    partials: usize,
    noise_db: f64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 2.0 * PI / sample_rate as f64;
    let tones: Vec<(f64, f64, f64)> = (0..partials)
        .map(|_| {
            (
                rng.random_range(100.0..4000.0),
                rng.random_range(0.2..1.0),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    let noise = 10f64.powf(-noise_db / 20.0);
    let x: Vec<f64> = (0..len)
        .map(|n| {
            let t = n as f64;
            let tonal: f64 = tones
                .iter()
                .map(|(f, a, ph)| a * (w * f * t + ph).sin())
                .sum();
            tonal / partials as f64 + noise * rng.random_range(-1.0..1.0)
        })
        .collect();
    peak_normalize(&x).expect("multitone is not silent")
}
