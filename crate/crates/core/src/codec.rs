//! Two-domain encoder and decoder for bit-budget experiments.
//!
//! The encoder keeps a random subset of time samples and the largest Gabor
//! coefficients, quantizes both, and ships the resulting records. The decoder
//! turns the records into feasible sets and reconstructs with the solver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::degradation::{ComplexRecord, Degradation, QuantizerSpec, Record, Tag};
use crate::error::{Error, Result};
use crate::feasible::{BoxConstraint, ComplexBox};
use crate::frame::{FrameBuilder, FrameSpec, WindowKind};
use crate::solver::{solve, Algorithm, Model, Primal, ProblemSpec, SolveReport, SolverConfig};
use crate::Complex64;

pub const PAYLOAD_VERSION: u32 = 1;
/// Reported SDR when the estimate is exact.
pub const SDR_CAP_DB: f64 = 300.0;
/// Allowed deviation of `max |y|` from one.
pub const PEAK_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct EncodeSpec {
    /// Fraction of time samples kept.
    pub p_t: f64,
    /// Fraction of real TF degrees of freedom kept.
    pub p_tf: f64,
    pub b_t: u32,
    pub b_tf: u32,
    pub seed: u64,
    pub frame: FrameSpec,
}

impl EncodeSpec {
    fn validate(&self) -> Result<()> {
        for (name, p) in [("p_t", self.p_t), ("p_tf", self.p_tf)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must lie in [0, 1], got {p}"),
                });
            }
        }
        QuantizerSpec::new(self.b_t, 1.0)?;
        QuantizerSpec::new(self.b_tf, 1.0)?;
        Ok(())
    }
}

/// Everything the decoder receives.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedPayload {
    pub version: u32,
    /// Unpadded signal length.
    pub signal_length: usize,
    pub window_length: usize,
    pub hop: usize,
    pub channels: usize,
    pub window: WindowKind,
    pub seed: u64,
    pub p_t: f64,
    pub p_tf: f64,
    pub b_t: u32,
    pub b_tf: u32,
    /// Scale of the TF quantizer; side information outside the bit budget.
    pub tf_scale: f64,
    /// One record per unpadded sample.
    pub time_records: Vec<Record>,
    /// One record per coefficient, conjugate-mirrored.
    pub tf_records: Vec<ComplexRecord>,
}

impl EncodedPayload {
    /// Rebuilds the frame the payload was encoded with.
    pub fn frame(&self) -> Result<FrameSpec> {
        FrameBuilder::new(self.window_length, self.hop, self.channels)
            .window(self.window)
            .build(self.signal_length)
    }

    /// Time samples actually transmitted.
    pub fn kept_samples(&self) -> usize {
        self.time_records
            .iter()
            .filter(|r| r.tag != Tag::Missing)
            .count()
    }

    /// Real TF degrees of freedom transmitted. A kept conjugate pair appears
    /// as two non-missing entries and costs two reals; a kept self-conjugate
    /// entry costs one.
    pub fn kept_tf_reals(&self) -> usize {
        self.tf_records.iter().filter(|r| !r.is_missing()).count()
    }

    /// `n_T b_T + n_TF b_TF`.
    pub fn bit_cost(&self) -> u64 {
        self.kept_samples() as u64 * self.b_t as u64
            + self.kept_tf_reals() as u64 * self.b_tf as u64
    }

    /// Observed time samples, zero-padded to the frame length.
    pub fn time_observation(&self, frame: &FrameSpec) -> Result<Vec<f64>> {
        frame.pad(
            &self
                .time_records
                .iter()
                .map(|r| r.observed)
                .collect::<Vec<_>>(),
        )
    }

    /// Observed coefficients with missing entries set to zero.
    pub fn tf_observation(&self) -> Vec<Complex64> {
        self.tf_records
            .iter()
            .map(|r| {
                Complex64::new(
                    if r.re.tag == Tag::Missing {
                        0.0
                    } else {
                        r.re.observed
                    },
                    if r.im.tag == Tag::Missing {
                        0.0
                    } else {
                        r.im.observed
                    },
                )
            })
            .collect()
    }

    /// Checks lengths, record invariants and conjugate mirroring.
    pub fn validate(&self) -> Result<()> {
        if self.version != PAYLOAD_VERSION {
            return Err(Error::Payload(format!(
                "unsupported version {}",
                self.version
            )));
        }
        let frame = self.frame()?;
        if self.time_records.len() != self.signal_length {
            return Err(Error::Payload(format!(
                "{} time records for a signal of length {}",
                self.time_records.len(),
                self.signal_length
            )));
        }
        if self.tf_records.len() != frame.coefficient_count() {
            return Err(Error::Payload(format!(
                "{} TF records for {} coefficients",
                self.tf_records.len(),
                frame.coefficient_count()
            )));
        }
        let bad =
            |what: &str, i: usize| Error::Payload(format!("inconsistent {what} record at {i}"));
        for (i, r) in self.time_records.iter().enumerate() {
            if !r.is_consistent() {
                return Err(bad("time", i));
            }
        }
        for (i, r) in self.tf_records.iter().enumerate() {
            if !(r.re.is_consistent() && r.im.is_consistent()) {
                return Err(bad("TF", i));
            }
        }
        for pair in frame.conjugate_pairs() {
            if let Some(p) = pair.partner {
                if self.tf_records[p] != self.tf_records[pair.representative].conj() {
                    return Err(Error::Payload(format!(
                        "TF records {} and {p} are not conjugate",
                        pair.representative
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&Wire::from(self)).map_err(|e| Error::Payload(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: Wire = serde_json::from_str(text).map_err(|e| Error::Payload(e.to_string()))?;
        let payload = wire.into_payload()?;
        payload.validate()?;
        Ok(payload)
    }
}

fn peak(y: &[f64]) -> f64 {
    y.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Encodes a peak-normalized signal.
pub fn encode(y: &[f64], spec: &EncodeSpec) -> Result<EncodedPayload> {
    spec.validate()?;
    let max = peak(y);
    if (max - 1.0).abs() > PEAK_TOL {
        return Err(Error::NotNormalized { peak: max });
    }
    let frame = &spec.frame;
    let padded = frame.pad(y)?;
    let p = y.len();

    // time domain: uniformly random subset, quantized
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_t = (spec.p_t * p as f64).round() as usize;
    let mut keep_t = vec![false; p];
    for i in rand::seq::index::sample(&mut rng, p, n_t) {
        keep_t[i] = true;
    }
    let (_, time_records) = Degradation {
        keep: Some(keep_t),
        quantizer: Some(QuantizerSpec::new(spec.b_t, 1.0)?),
        ..Default::default()
    }
    .apply(y)?;

    // TF domain: largest pair representatives within the real budget
    let coeffs = frame.analyze(&padded)?.into_values();
    let pairs = frame.conjugate_pairs();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| {
        let (ma, mb) = (
            coeffs[pairs[a].representative].norm(),
            coeffs[pairs[b].representative].norm(),
        );
        mb.total_cmp(&ma).then(a.cmp(&b))
    });
    let mut budget = (spec.p_tf * frame.coefficient_count() as f64).round() as usize;
    let mut keep_tf = vec![false; pairs.len()];
    for i in order {
        let cost = if pairs[i].partner.is_some() { 2 } else { 1 };
        if cost <= budget {
            keep_tf[i] = true;
            budget -= cost;
        }
        if budget == 0 {
            break;
        }
    }
    let kept: Vec<Complex64> = pairs
        .iter()
        .zip(&keep_tf)
        .filter(|(_, k)| **k)
        .map(|(pair, _)| {
            let z = coeffs[pair.representative];
            // self-conjugate entries transmit only their real part
            if pair.partner.is_some() {
                z
            } else {
                Complex64::new(z.re, 0.0)
            }
        })
        .collect();
    let tf_scale = kept
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    let tf_records = if kept.is_empty() || tf_scale == 0.0 {
        // nothing worth quantizing: the kept entries are known to be zero
        Degradation {
            keep: Some(keep_tf),
            ..Default::default()
        }
        .apply_conjugate(&vec![Complex64::default(); coeffs.len()], &pairs)?
    } else {
        Degradation {
            keep: Some(keep_tf),
            quantizer: Some(QuantizerSpec::new(spec.b_tf, tf_scale)?),
            ..Default::default()
        }
        .apply_conjugate(&coeffs, &pairs)?
    };

    Ok(EncodedPayload {
        version: PAYLOAD_VERSION,
        signal_length: p,
        window_length: frame.window_length(),
        hop: frame.hop(),
        channels: frame.channels(),
        window: frame.window_kind(),
        seed: spec.seed,
        p_t: spec.p_t,
        p_tf: spec.p_tf,
        b_t: spec.b_t,
        b_tf: spec.b_tf,
        tf_scale: if tf_scale > 0.0 { tf_scale } else { 1.0 },
        time_records,
        tf_records,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    /// Reconstruction truncated to the unpadded length.
    pub signal: Vec<f64>,
    pub report: SolveReport,
}

/// The sample and coefficient boxes of a payload. Padding samples are known
/// to be zero.
pub fn feasible_sets(
    payload: &EncodedPayload,
    frame: &FrameSpec,
) -> Result<(BoxConstraint, ComplexBox)> {
    let box_t = BoxConstraint::from_records(&payload.time_records)?
        .extended_pinned(frame.signal_length() - payload.signal_length, 0.0);
    let box_tf = ComplexBox::from_records(&payload.tf_records)?;
    Ok((box_t, box_tf))
}

/// Reconstructs the signal from both sets of records.
pub fn decode(
    payload: &EncodedPayload,
    model: Model,
    algorithm: Algorithm,
    config: &SolverConfig,
) -> Result<Decoded> {
    payload.validate()?;
    let frame = payload.frame()?;
    let (box_t, box_tf) = feasible_sets(payload, &frame)?;
    let observation = payload.time_observation(&frame)?;
    let init = Primal::from_observation(model, &frame, &observation)?;
    let problem = ProblemSpec::new(frame, model, box_t, box_tf)?;
    let (solution, report) = solve(&problem, config, init, algorithm)?;
    let mut signal = solution.signal;
    signal.truncate(payload.signal_length);
    Ok(Decoded { signal, report })
}

/// Synthesizes the transmitted coefficients directly, missing ones as zero.
pub fn tf_direct_baseline(payload: &EncodedPayload) -> Result<Vec<f64>> {
    let frame = payload.frame()?;
    let mut signal = frame.synthesize_slice(&payload.tf_observation())?;
    signal.truncate(payload.signal_length);
    Ok(signal)
}

/// Signal-to-distortion ratio in dB, capped at [`SDR_CAP_DB`].
pub fn sdr(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: estimate.len(),
        });
    }
    let energy: f64 = reference.iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::ZeroReference);
    }
    let residual: f64 = reference
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    if residual == 0.0 {
        return Ok(SDR_CAP_DB);
    }
    Ok((10.0 * (energy / residual).log10()).min(SDR_CAP_DB))
}

/// A real number that may be infinite; infinities travel as `"inf"`/`"-inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Bound(f64);

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            f64::INFINITY => s.serialize_str("inf"),
            f64::NEG_INFINITY => s.serialize_str("-inf"),
            v => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Bound(v)),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(Bound(f64::INFINITY)),
                "-inf" => Ok(Bound(f64::NEG_INFINITY)),
                other => Err(de::Error::custom(format!(
                    "expected a number, \"inf\" or \"-inf\", got {other:?}"
                ))),
            },
        }
    }
}

type WireRecord = (Tag, Bound, Bound, Bound);
type WireComplexRecord = ([Tag; 2], [Bound; 2], [Bound; 2], [Bound; 2]);

#[derive(Serialize, Deserialize)]
struct WireFrame {
    window_length: usize,
    hop: usize,
    channels: usize,
    window: WindowKind,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    version: u32,
    #[serde(rename = "P")]
    p: usize,
    #[serde(rename = "Q")]
    q: usize,
    frame: WireFrame,
    seed: u64,
    #[serde(rename = "p_T")]
    p_t: f64,
    #[serde(rename = "p_TF")]
    p_tf: f64,
    #[serde(rename = "b_T")]
    b_t: u32,
    #[serde(rename = "b_TF")]
    b_tf: u32,
    tf_scale: f64,
    time_records: Vec<WireRecord>,
    tf_records: Vec<WireComplexRecord>,
}

fn to_wire(r: &Record) -> WireRecord {
    (r.tag, Bound(r.observed), Bound(r.lower), Bound(r.upper))
}

fn from_wire(w: &WireRecord) -> Record {
    Record {
        tag: w.0,
        observed: w.1 .0,
        lower: w.2 .0,
        upper: w.3 .0,
    }
}

impl From<&EncodedPayload> for Wire {
    fn from(p: &EncodedPayload) -> Self {
        Wire {
            version: p.version,
            p: p.signal_length,
            q: p.tf_records.len(),
            frame: WireFrame {
                window_length: p.window_length,
                hop: p.hop,
                channels: p.channels,
                window: p.window,
            },
            seed: p.seed,
            p_t: p.p_t,
            p_tf: p.p_tf,
            b_t: p.b_t,
            b_tf: p.b_tf,
            tf_scale: p.tf_scale,
            time_records: p.time_records.iter().map(to_wire).collect(),
            tf_records: p
                .tf_records
                .iter()
                .map(|r| {
                    let (re, im) = (to_wire(&r.re), to_wire(&r.im));
                    ([re.0, im.0], [re.1, im.1], [re.2, im.2], [re.3, im.3])
                })
                .collect(),
        }
    }
}

impl Wire {
    fn into_payload(self) -> Result<EncodedPayload> {
        if self.q != self.tf_records.len() {
            return Err(Error::Payload(format!(
                "Q = {} but {} TF records",
                self.q,
                self.tf_records.len()
            )));
        }
        Ok(EncodedPayload {
            version: self.version,
            signal_length: self.p,
            window_length: self.frame.window_length,
            hop: self.frame.hop,
            channels: self.frame.channels,
            window: self.frame.window,
            seed: self.seed,
            p_t: self.p_t,
            p_tf: self.p_tf,
            b_t: self.b_t,
            b_tf: self.b_tf,
            tf_scale: self.tf_scale,
            time_records: self.time_records.iter().map(from_wire).collect(),
            tf_records: self
                .tf_records
                .iter()
                .map(|(t, o, l, u)| ComplexRecord {
                    re: from_wire(&(t[0], o[0], l[0], u[0])),
                    im: from_wire(&(t[1], o[1], l[1], u[1])),
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests;
