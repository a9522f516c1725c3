//! Discrete Gabor transform on a cyclic signal domain, normalized to a
//! Parseval tight frame.
//!
//! Coefficients are stored frame-major: entry `q = n * channels + m` holds
//! channel `m` of the frame starting at sample `n * hop`. The phase of every
//! coefficient is taken relative to the start of its frame, so for real
//! signals channel `m` and channel `channels - m` of the same frame are
//! complex conjugates.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{power_iteration, Vector};
use crate::solver::{Algorithm, Model};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Sine,
    Hann,
    Rectangular,
}

impl WindowKind {
    /// Unnormalized window samples, sampled at half-integer positions so that
    /// none of them vanish.
    pub fn samples(self, len: usize) -> Vec<f64> {
        let n = len as f64;
        (0..len)
            .map(|i| {
                let t = std::f64::consts::PI * (i as f64 + 0.5) / n;
                match self {
                    WindowKind::Sine => t.sin(),
                    WindowKind::Hann => t.sin().powi(2),
                    WindowKind::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Sine => "sine",
            WindowKind::Hann => "hann",
            WindowKind::Rectangular => "rectangular",
        })
    }
}

/// One conjugate-symmetric group of coefficients.
///
/// `partner` is `None` for self-conjugate entries (channel 0 and, for an even
/// channel count, the Nyquist channel), which are real for real signals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConjugatePair {
    pub representative: usize,
    pub partner: Option<usize>,
}

/// Immutable description of a Gabor frame together with its FFT plans.
#[derive(Clone)]
pub struct FrameSpec {
    window_length: usize,
    hop: usize,
    channels: usize,
    signal_length: usize,
    window_kind: WindowKind,
    tight: bool,
    window: Arc<[f64]>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FrameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrameSpec")
            .field("window_length", &self.window_length)
            .field("hop", &self.hop)
            .field("channels", &self.channels)
            .field("signal_length", &self.signal_length)
            .field("window_kind", &self.window_kind)
            .field("tight", &self.tight)
            .finish()
    }
}

impl PartialEq for FrameSpec {
    fn eq(&self, other: &Self) -> bool {
        self.window_length == other.window_length
            && self.hop == other.hop
            && self.channels == other.channels
            && self.signal_length == other.signal_length
            && self.window_kind == other.window_kind
            && self.tight == other.tight
    }
}

/// Builds a Parseval tight Gabor frame with a sine window.
///
/// `signal_length` is rounded up to a multiple of `hop` (and to at least one
/// window length); callers zero-pad their signals to
/// [`FrameSpec::signal_length`].
pub fn make_tight_frame(
    window_length: usize,
    hop: usize,
    channels: usize,
    signal_length: usize,
) -> Result<FrameSpec> {
    FrameBuilder::new(window_length, hop, channels).build(signal_length)
}

#[derive(Clone, Debug)]
pub struct FrameBuilder {
    window_length: usize,
    hop: usize,
    channels: usize,
    window: WindowKind,
    tight: bool,
}

impl FrameBuilder {
    pub fn new(window_length: usize, hop: usize, channels: usize) -> Self {
        Self {
            window_length,
            hop,
            channels,
            window: WindowKind::Sine,
            tight: true,
        }
    }

    pub fn window(mut self, window: WindowKind) -> Self {
        self.window = window;
        self
    }

    /// Skip the Parseval normalization. Only useful for exercising code paths
    /// that must also work with non-tight frames.
    pub fn tight(mut self, tight: bool) -> Self {
        self.tight = tight;
        self
    }

    pub fn build(self, signal_length: usize) -> Result<FrameSpec> {
        let Self {
            window_length,
            hop,
            channels,
            window,
            tight,
        } = self;
        if window_length == 0 || hop == 0 || channels == 0 || signal_length == 0 {
            return Err(Error::InvalidFrame(format!(
                "dimensions must be positive (window_length={window_length}, hop={hop}, \
                 channels={channels}, signal_length={signal_length})"
            )));
        }
        if channels < window_length {
            return Err(Error::InvalidFrame(format!(
                "channels ({channels}) must be at least the window length ({window_length})"
            )));
        }
        if hop > window_length {
            return Err(Error::InvalidFrame(format!(
                "hop ({hop}) exceeds the window length ({window_length}); frames leave gaps"
            )));
        }
        let frames = signal_length.div_ceil(hop).max(window_length.div_ceil(hop));
        let padded = frames * hop;

        let mut g = window.samples(window_length);
        if tight {
            // Diagonal of A*A for the unnormalized window; it is hop-periodic.
            let mut diag = vec![0.0; hop];
            for (l, w) in g.iter().enumerate() {
                diag[l % hop] += channels as f64 * w * w;
            }
            if diag.iter().any(|&d| d <= 0.0) {
                return Err(Error::InvalidFrame(
                    "window does not cover every sample".into(),
                ));
            }
            for (l, w) in g.iter_mut().enumerate() {
                *w /= diag[l % hop].sqrt();
            }
        }

        let mut planner = FftPlanner::new();
        Ok(FrameSpec {
            window_length,
            hop,
            channels,
            signal_length: padded,
            window_kind: window,
            tight,
            window: g.into(),
            forward: planner.plan_fft_forward(channels),
            inverse: planner.plan_fft_inverse(channels),
        })
    }
}

impl FrameSpec {
    pub fn window_length(&self) -> usize {
        self.window_length
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Length `P` of the (padded) signals this frame acts on.
    pub fn signal_length(&self) -> usize {
        self.signal_length
    }

    pub fn frames(&self) -> usize {
        self.signal_length / self.hop
    }

    /// Number `Q` of coefficients.
    pub fn coefficient_count(&self) -> usize {
        self.channels * self.frames()
    }

    pub fn redundancy(&self) -> f64 {
        self.coefficient_count() as f64 / self.signal_length as f64
    }

    pub fn window_kind(&self) -> WindowKind {
        self.window_kind
    }

    pub fn is_normalized(&self) -> bool {
        self.tight
    }

    /// The stored (normalized) window.
    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Zero-pads `x` to the frame's signal length.
    pub fn pad(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() > self.signal_length {
            return Err(Error::LengthMismatch {
                expected: self.signal_length,
                actual: x.len(),
            });
        }
        let mut out = x.to_vec();
        out.resize(self.signal_length, 0.0);
        Ok(out)
    }

    pub fn analyze(&self, x: &[f64]) -> Result<Coefficients> {
        check_len(self.signal_length, x.len())?;
        let mut values = vec![Complex64::default(); self.coefficient_count()];
        self.analyze_into(x, &mut values);
        Ok(Coefficients {
            values,
            channels: self.channels,
        })
    }

    pub fn synthesize(&self, z: &Coefficients) -> Result<Vec<f64>> {
        self.synthesize_slice(&z.values)
    }

    pub fn synthesize_slice(&self, z: &[Complex64]) -> Result<Vec<f64>> {
        check_len(self.coefficient_count(), z.len())?;
        let mut out = vec![0.0; self.signal_length];
        self.synthesize_into(z, &mut out);
        Ok(out)
    }

    /// `A x` written into `out`; lengths are the caller's responsibility.
    pub(crate) fn analyze_into(&self, x: &[f64], out: &mut [Complex64]) {
        let (m, len) = (self.channels, self.signal_length);
        let mut scratch = vec![Complex64::default(); self.forward.get_inplace_scratch_len()];
        for (n, frame) in out.chunks_exact_mut(m).enumerate() {
            let start = n * self.hop;
            frame.fill(Complex64::default());
            for (l, (slot, g)) in frame.iter_mut().zip(self.window.iter()).enumerate() {
                *slot = Complex64::new(x[(start + l) % len] * g, 0.0);
            }
            self.forward.process_with_scratch(frame, &mut scratch);
        }
    }

    /// `A* z` written into `out`; lengths are the caller's responsibility.
    pub(crate) fn synthesize_into(&self, z: &[Complex64], out: &mut [f64]) {
        let (m, len) = (self.channels, self.signal_length);
        out.fill(0.0);
        let mut buf = vec![Complex64::default(); m];
        let mut scratch = vec![Complex64::default(); self.inverse.get_inplace_scratch_len()];
        for (n, frame) in z.chunks_exact(m).enumerate() {
            buf.copy_from_slice(frame);
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            let start = n * self.hop;
            for (l, g) in self.window.iter().enumerate() {
                out[(start + l) % len] += g * buf[l].re;
            }
        }
    }

    /// Conjugate-symmetric grouping of the coefficient indices, one entry per
    /// representative, in increasing index order.
    pub fn conjugate_pairs(&self) -> Vec<ConjugatePair> {
        let m = self.channels;
        let half = m / 2;
        let mut pairs = Vec::with_capacity(self.frames() * (half + 1));
        for n in 0..self.frames() {
            let base = n * m;
            for k in 0..=half {
                let partner = (m - k) % m;
                pairs.push(ConjugatePair {
                    representative: base + k,
                    partner: (partner != k).then_some(base + partner),
                });
            }
        }
        pairs
    }

    /// Relative deviation of `A*A` from the identity on a fixed random probe.
    pub fn tightness_deviation(&self) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7167);
        let x: Vec<f64> = (0..self.signal_length)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let mut z = vec![Complex64::default(); self.coefficient_count()];
        self.analyze_into(&x, &mut z);
        let mut back = vec![0.0; self.signal_length];
        self.synthesize_into(&z, &mut back);
        back.dist(&x) / x.norm()
    }

    /// Spectral norm of `sum_m L_m* L_m` for the given operator assignment,
    /// estimated by power iteration to a relative tolerance of `1e-6`.
    pub fn operator_norm(&self, composition: &Composition<'_>) -> f64 {
        operator_norm(self, composition)
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Which `sum_m L_m* L_m` to measure.
#[derive(Clone, Copy, Debug)]
pub enum Composition<'a> {
    /// The identity on the signal space.
    Identity,
    /// The operators of the solver: `W K` and `K` for [`Algorithm::Tight`],
    /// plus `L` for [`Algorithm::General`]. `None` weights mean `W = Id`.
    Assignment {
        model: Model,
        algorithm: Algorithm,
        weights: Option<&'a [f64]>,
    },
}

pub const NORM_REL_TOL: f64 = 1e-6;
const NORM_MAX_ITERATIONS: usize = 2000;

pub fn operator_norm(spec: &FrameSpec, composition: &Composition<'_>) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f726d);
    let (p, q) = (spec.signal_length(), spec.coefficient_count());
    let weight_sq =
        |q_idx: usize, weights: Option<&[f64]>| weights.map_or(1.0, |w| w[q_idx] * w[q_idx]);
    match *composition {
        Composition::Identity => {
            let x0: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            power_iteration(
                x0,
                |x: &Vec<f64>| x.clone(),
                NORM_REL_TOL,
                NORM_MAX_ITERATIONS,
            )
        }
        Composition::Assignment {
            model: Model::Analysis,
            algorithm,
            weights,
        } => {
            let x0: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut z = vec![Complex64::default(); q];
            let mut y = vec![0.0; p];
            power_iteration(
                x0,
                |x: &Vec<f64>| {
                    // A* (W^2 + 1) A x  (+ x)
                    spec.analyze_into(x, &mut z);
                    for (i, c) in z.iter_mut().enumerate() {
                        *c *= weight_sq(i, weights) + 1.0;
                    }
                    spec.synthesize_into(&z, &mut y);
                    if algorithm == Algorithm::General {
                        y.axpy(1.0, x);
                    }
                    y.clone()
                },
                NORM_REL_TOL,
                NORM_MAX_ITERATIONS,
            )
        }
        Composition::Assignment {
            model: Model::Synthesis,
            algorithm,
            weights,
        } => {
            let z0: Vec<Complex64> = (0..q)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let mut x = vec![0.0; p];
            let mut az = vec![Complex64::default(); q];
            power_iteration(
                z0,
                |z: &Vec<Complex64>| {
                    // (W^2 + 1) z  (+ A A* z)
                    let mut out: Vec<Complex64> = z
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c * (weight_sq(i, weights) + 1.0))
                        .collect();
                    if algorithm == Algorithm::General {
                        spec.synthesize_into(z, &mut x);
                        spec.analyze_into(&x, &mut az);
                        out.axpy(1.0, &az);
                    }
                    out
                },
                NORM_REL_TOL,
                NORM_MAX_ITERATIONS,
            )
        }
    }
}

/// Gabor coefficients of a signal, frame-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    pub values: Vec<Complex64>,
    channels: usize,
}

impl Coefficients {
    pub fn new(spec: &FrameSpec, values: Vec<Complex64>) -> Result<Self> {
        check_len(spec.coefficient_count(), values.len())?;
        Ok(Self {
            values,
            channels: spec.channels,
        })
    }

    pub fn zeros(spec: &FrameSpec) -> Self {
        Self {
            values: vec![Complex64::default(); spec.coefficient_count()],
            channels: spec.channels,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn frames(&self) -> usize {
        self.values.len() / self.channels
    }

    pub fn get(&self, frame: usize, channel: usize) -> Complex64 {
        self.values[frame * self.channels + channel]
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Largest deviation from conjugate symmetry across all pairs, including
    /// the imaginary part of self-conjugate entries.
    pub fn conjugate_asymmetry(&self, spec: &FrameSpec) -> f64 {
        spec.conjugate_pairs()
            .iter()
            .map(|pair| {
                let c = self.values[pair.representative];
                match pair.partner {
                    Some(p) => (self.values[p] - c.conj()).norm(),
                    None => c.im.abs(),
                }
            })
            .fold(0.0, f64::max)
    }
}
