//! Masking, hard clipping and mid-riser quantization, each described entry by
//! entry as a [`Record`] carrying the decision interval the true value is
//! known to lie in.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::ConjugatePair;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Reliable,
    Missing,
    ClippedLow,
    ClippedHigh,
    Quantized,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Reliable => "reliable",
            Tag::Missing => "missing",
            Tag::ClippedLow => "clipped_low",
            Tag::ClippedHigh => "clipped_high",
            Tag::Quantized => "quantized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "reliable" => Tag::Reliable,
            "missing" => Tag::Missing,
            "clipped_low" => Tag::ClippedLow,
            "clipped_high" => Tag::ClippedHigh,
            "quantized" => Tag::Quantized,
            _ => return None,
        })
    }
}

/// What is known about one real entry after degradation.
///
/// `lower`/`upper` are the closed bounds handed to the feasible set; missing
/// and saturated entries use IEEE infinities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub tag: Tag,
    pub observed: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Record {
    pub fn reliable(value: f64) -> Self {
        Self {
            tag: Tag::Reliable,
            observed: value,
            lower: value,
            upper: value,
        }
    }

    pub fn missing() -> Self {
        Self {
            tag: Tag::Missing,
            observed: 0.0,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn clipped_high(theta: f64) -> Self {
        Self {
            tag: Tag::ClippedHigh,
            observed: theta,
            lower: theta,
            upper: f64::INFINITY,
        }
    }

    pub fn clipped_low(theta: f64) -> Self {
        Self {
            tag: Tag::ClippedLow,
            observed: -theta,
            lower: f64::NEG_INFINITY,
            upper: -theta,
        }
    }

    pub fn quantized(level: f64, cell: DecisionCell) -> Self {
        Self {
            tag: Tag::Quantized,
            observed: level,
            lower: cell.lower,
            upper: cell.upper,
        }
    }

    /// The record describing `-x` given this record describes `x`.
    pub fn negated(self) -> Self {
        let tag = match self.tag {
            Tag::ClippedLow => Tag::ClippedHigh,
            Tag::ClippedHigh => Tag::ClippedLow,
            t => t,
        };
        Self {
            tag,
            observed: if self.tag == Tag::Missing {
                0.0
            } else {
                -self.observed
            },
            lower: -self.upper,
            upper: -self.lower,
        }
    }

    /// Whether the tag-specific invariants hold.
    pub fn is_consistent(&self) -> bool {
        match self.tag {
            Tag::Reliable => self.lower == self.observed && self.upper == self.observed,
            Tag::Missing => self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY,
            Tag::ClippedLow => {
                self.lower == f64::NEG_INFINITY
                    && self.upper == self.observed
                    && self.observed < 0.0
            }
            Tag::ClippedHigh => {
                self.upper == f64::INFINITY && self.lower == self.observed && self.observed > 0.0
            }
            Tag::Quantized => self.lower < self.observed && self.observed < self.upper,
        }
    }
}

/// A TF entry: real and imaginary parts are described independently.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexRecord {
    pub re: Record,
    pub im: Record,
}

impl ComplexRecord {
    pub fn missing() -> Self {
        Self {
            re: Record::missing(),
            im: Record::missing(),
        }
    }

    pub fn reliable(z: Complex64) -> Self {
        Self {
            re: Record::reliable(z.re),
            im: Record::reliable(z.im),
        }
    }

    pub fn is_missing(&self) -> bool {
        self.re.tag == Tag::Missing && self.im.tag == Tag::Missing
    }

    pub fn observed(&self) -> Complex64 {
        Complex64::new(self.re.observed, self.im.observed)
    }

    pub fn conj(self) -> Self {
        Self {
            re: self.re,
            im: self.im.negated(),
        }
    }
}

/// Decision cell of a quantizer. Cells are half-open; the closedness flags
/// record which end belongs to the cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecisionCell {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl DecisionCell {
    pub fn contains(&self, u: f64) -> bool {
        let above = if self.lower_closed {
            u >= self.lower
        } else {
            u > self.lower
        };
        let below = if self.upper_closed {
            u <= self.upper
        } else {
            u < self.upper
        };
        above && below
    }

    fn scaled(self, s: f64) -> Self {
        Self {
            lower: self.lower * s,
            upper: self.upper * s,
            ..self
        }
    }
}

/// Uniform mid-riser quantizer with `2^bits` levels covering `[-scale, scale]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizerSpec {
    bits: u32,
    scale: f64,
}

pub const MAX_BITS: u32 = 52;

impl QuantizerSpec {
    pub fn new(bits: u32, scale: f64) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::InvalidParameter {
                name: "bits",
                reason: format!("must be in 1..={MAX_BITS}, got {bits}"),
            });
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: format!("must be positive and finite, got {scale}"),
            });
        }
        Ok(Self { bits, scale })
    }

    /// Quantizer for a batch of TF coefficients, scaled by the largest real or
    /// imaginary magnitude in the batch.
    pub fn for_batch(bits: u32, values: &[Complex64]) -> Result<Self> {
        let scale = values
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: "all-zero coefficient batch cannot set a quantizer scale".into(),
            });
        }
        Self::new(bits, scale)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Unscaled distance between consecutive levels, `2^(1 - bits)`.
    pub fn step(&self) -> f64 {
        (2.0f64).powi(1 - self.bits as i32)
    }

    /// Scaled step `Δ · scale`.
    pub fn scaled_step(&self) -> f64 {
        self.step() * self.scale
    }
}

/// Quantizes `u` and returns the level together with its decision cell.
///
/// Inputs are clamped to `[-scale, scale]`; the outermost cells extend to
/// infinity.
pub fn quantize(u: f64, spec: &QuantizerSpec) -> (f64, DecisionCell) {
    let step = spec.step();
    let top = (1u64 << (spec.bits - 1)) as f64 - 1.0;
    let t = (u / spec.scale).clamp(-1.0, 1.0);
    let k = (t.abs() / step).floor().min(top);
    let outermost = k == top;
    let (level, cell) = if t >= 0.0 {
        (
            (k + 0.5) * step,
            DecisionCell {
                lower: k * step,
                upper: if outermost {
                    f64::INFINITY
                } else {
                    (k + 1.0) * step
                },
                lower_closed: true,
                upper_closed: false,
            },
        )
    } else {
        (
            -(k + 0.5) * step,
            DecisionCell {
                lower: if outermost {
                    f64::NEG_INFINITY
                } else {
                    -(k + 1.0) * step
                },
                upper: -k * step,
                lower_closed: false,
                // zero belongs to the first positive cell
                upper_closed: k > 0.0,
            },
        )
    };
    (level * spec.scale, cell.scaled(spec.scale))
}

pub fn quantize_complex(
    z: Complex64,
    spec: &QuantizerSpec,
) -> (Complex64, DecisionCell, DecisionCell) {
    let (re, re_cell) = quantize(z.re, spec);
    let (im, im_cell) = quantize(z.im, spec);
    (Complex64::new(re, im), re_cell, im_cell)
}

fn quantized_record(u: f64, spec: &QuantizerSpec) -> Record {
    let (level, cell) = quantize(u, spec);
    Record::quantized(level, cell)
}

/// Keeps the entries listed in `keep` and zeroes the others.
pub fn apply_mask(x: &[f64], keep: &[usize]) -> Result<(Vec<f64>, Vec<Record>)> {
    let mut records = vec![Record::missing(); x.len()];
    for &i in keep {
        let v = *x.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: x.len(),
        })?;
        records[i] = Record::reliable(v);
    }
    Ok((records.iter().map(|r| r.observed).collect(), records))
}

/// Hard clipping to `[-theta, theta]`; the thresholds themselves are reliable.
pub fn clip(x: &[f64], theta: f64) -> Result<(Vec<f64>, Vec<Record>)> {
    check_theta(theta)?;
    let records: Vec<Record> = x.iter().map(|&v| clip_record(v, theta)).collect();
    Ok((records.iter().map(|r| r.observed).collect(), records))
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("clipping threshold must be positive, got {theta}"),
        });
    }
    Ok(())
}

fn clip_record(v: f64, theta: f64) -> Record {
    if v > theta {
        Record::clipped_high(theta)
    } else if v < -theta {
        Record::clipped_low(theta)
    } else {
        Record::reliable(v)
    }
}

/// Quantizes every entry of `x`.
pub fn quantize_signal(x: &[f64], spec: &QuantizerSpec) -> (Vec<f64>, Vec<Record>) {
    let records: Vec<Record> = x.iter().map(|&v| quantized_record(v, spec)).collect();
    (records.iter().map(|r| r.observed).collect(), records)
}

/// A combination of the three degradations applied to one domain.
///
/// Unkept entries are missing; kept entries beyond the clipping threshold are
/// clipped; the remaining kept entries are quantized if a quantizer is given
/// and reliable otherwise.
#[derive(Clone, Debug, Default)]
pub struct Degradation {
    /// `None` keeps every entry.
    pub keep: Option<Vec<bool>>,
    pub clip_theta: Option<f64>,
    pub quantizer: Option<QuantizerSpec>,
}

impl Degradation {
    fn check(&self, len: usize) -> Result<()> {
        if let Some(keep) = &self.keep {
            if keep.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    actual: keep.len(),
                });
            }
        }
        if let Some(theta) = self.clip_theta {
            check_theta(theta)?;
        }
        Ok(())
    }

    fn record(&self, v: f64) -> Record {
        match (self.clip_theta, &self.quantizer) {
            (Some(theta), _) if v.abs() > theta => clip_record(v, theta),
            (_, Some(q)) => quantized_record(v, q),
            _ => Record::reliable(v),
        }
    }

    fn kept(&self, i: usize) -> bool {
        self.keep.as_ref().is_none_or(|k| k[i])
    }

    /// Applies the degradation to a real signal.
    pub fn apply(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<Record>)> {
        self.check(x.len())?;
        let records: Vec<Record> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.kept(i) {
                    self.record(v)
                } else {
                    Record::missing()
                }
            })
            .collect();
        Ok((records.iter().map(|r| r.observed).collect(), records))
    }

    /// Applies the degradation to conjugate-symmetric TF coefficients.
    ///
    /// `keep` (if any) is indexed by position in `pairs`. Representatives are
    /// degraded part by part and mirrored onto their partners by conjugation;
    /// the imaginary part of a kept self-conjugate entry is known to be zero.
    pub fn apply_conjugate(
        &self,
        values: &[Complex64],
        pairs: &[ConjugatePair],
    ) -> Result<Vec<ComplexRecord>> {
        self.check(pairs.len())?;
        let mut records = vec![ComplexRecord::missing(); values.len()];
        for (i, pair) in pairs.iter().enumerate() {
            if !self.kept(i) {
                continue;
            }
            let z = values[pair.representative];
            let rec = match pair.partner {
                Some(_) => ComplexRecord {
                    re: self.record(z.re),
                    im: self.record(z.im),
                },
                None => ComplexRecord {
                    re: self.record(z.re),
                    im: Record::reliable(0.0),
                },
            };
            records[pair.representative] = rec;
            if let Some(p) = pair.partner {
                records[p] = rec.conj();
            }
        }
        Ok(records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(bits: u32) -> QuantizerSpec {
        QuantizerSpec::new(bits, 1.0).unwrap()
    }

    #[test]
    fn mask_examples() {
        let (y, r) = apply_mask(&[1.0, 2.0, 3.0], &[0, 2]).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 3.0]);
        let tags: Vec<Tag> = r.iter().map(|r| r.tag).collect();
        assert_eq!(tags, vec![Tag::Reliable, Tag::Missing, Tag::Reliable]);

        let (y, r) = apply_mask(&[1.0, 2.0], &[0, 1]).unwrap();
        assert_eq!(y, vec![1.0, 2.0]);
        assert!(r.iter().all(|r| r.tag == Tag::Reliable));

        let (y, r) = apply_mask(&[1.0, 2.0], &[]).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
        assert!(r.iter().all(|r| r.tag == Tag::Missing));

        assert!(matches!(
            apply_mask(&[1.0], &[1]),
            Err(Error::IndexOutOfRange { index: 1, len: 1 })
        ));
    }

    #[test]
    fn clip_examples() {
        let (y, r) = clip(&[0.5, 1.2, -2.0], 1.0).unwrap();
        assert_eq!(y, vec![0.5, 1.0, -1.0]);
        let tags: Vec<Tag> = r.iter().map(|r| r.tag).collect();
        assert_eq!(tags, vec![Tag::Reliable, Tag::ClippedHigh, Tag::ClippedLow]);
        assert_eq!((r[1].lower, r[1].upper), (1.0, f64::INFINITY));
        assert_eq!((r[2].lower, r[2].upper), (f64::NEG_INFINITY, -1.0));

        let (y, r) = clip(&[0.1, -0.3], 0.3).unwrap();
        assert_eq!(y, vec![0.1, -0.3]);
        assert!(r.iter().all(|r| r.tag == Tag::Reliable));

        assert!(clip(&[1.0], 0.0).is_err());
        assert!(clip(&[1.0], -1.0).is_err());
    }

    #[test]
    fn quantizer_examples() {
        let spec = q(2);
        assert_eq!(spec.step(), 0.5);

        let (level, cell) = quantize(0.3, &spec);
        assert_eq!(level, 0.25);
        assert_eq!((cell.lower, cell.upper), (0.0, 0.5));

        let (level, cell) = quantize(0.0, &spec);
        assert_eq!(level, 0.25);
        assert_eq!((cell.lower, cell.upper), (0.0, 0.5));
        assert!(cell.contains(0.0));

        let (level, cell) = quantize(-0.6, &spec);
        assert_eq!(level, -0.75);
        assert_eq!((cell.lower, cell.upper), (f64::NEG_INFINITY, -0.5));

        let (level, cell) = quantize(1.0, &spec);
        assert_eq!(level, 0.75);
        assert_eq!((cell.lower, cell.upper), (0.5, f64::INFINITY));
    }

    #[test]
    fn negative_cell_boundaries() {
        let spec = q(2);
        // |u| = Δ lands in the second negative cell, which owns its upper end
        let (level, cell) = quantize(-0.5, &spec);
        assert_eq!(level, -0.75);
        assert!(cell.contains(-0.5));
        let (level, cell) = quantize(-1e-300, &spec);
        assert_eq!(level, -0.25);
        assert!(!cell.contains(0.0));
    }

    #[test]
    fn complex_quantization() {
        let spec = QuantizerSpec::new(3, 2.0).unwrap();
        let half = spec.scaled_step() / 2.0;
        let (z, _, _) = quantize_complex(Complex64::new(0.0, 0.0), &spec);
        assert_eq!(z, Complex64::new(half, half));
        let (z, _, im_cell) = quantize_complex(Complex64::new(0.7, 0.0), &spec);
        assert_eq!(z.im, half);
        assert!(im_cell.contains(0.0));

        assert!(QuantizerSpec::for_batch(4, &[Complex64::default(); 3]).is_err());
        let batch = [Complex64::new(0.5, -3.0), Complex64::new(2.0, 1.0)];
        assert_eq!(QuantizerSpec::for_batch(4, &batch).unwrap().scale(), 3.0);
    }

    #[test]
    fn quantizer_rejects_bad_specs() {
        assert!(QuantizerSpec::new(0, 1.0).is_err());
        assert!(QuantizerSpec::new(53, 1.0).is_err());
        assert!(QuantizerSpec::new(8, 0.0).is_err());
        assert!(QuantizerSpec::new(8, f64::NAN).is_err());
    }

    #[test]
    fn clipping_matches_saturated_quantizer_cells() {
        // With a very fine quantizer over [-θ, θ], the saturated cells are the
        // clipping intervals up to one step.
        let theta = 0.8;
        let spec = QuantizerSpec::new(40, theta).unwrap();
        let (_, clip_records) = clip(&[1.5, -2.0], theta).unwrap();
        for (u, rec) in [1.5, -2.0].into_iter().zip(clip_records) {
            let (_, cell) = quantize(u, &spec);
            let tol = spec.scaled_step() * 2.0;
            assert_eq!(cell.lower.is_infinite(), rec.lower.is_infinite());
            assert_eq!(cell.upper.is_infinite(), rec.upper.is_infinite());
            let finite = |a: f64, b: f64| {
                if a.is_finite() {
                    (a - b).abs() <= tol
                } else {
                    a == b
                }
            };
            assert!(finite(cell.lower, rec.lower) && finite(cell.upper, rec.upper));
        }
    }

    #[test]
    fn combined_degradation_precedence() {
        let deg = Degradation {
            keep: Some(vec![true, false, true, true]),
            clip_theta: Some(0.5),
            quantizer: Some(q(4)),
        };
        let (y, r) = deg.apply(&[0.1, 0.2, 0.9, -0.7]).unwrap();
        let tags: Vec<Tag> = r.iter().map(|r| r.tag).collect();
        assert_eq!(
            tags,
            vec![
                Tag::Quantized,
                Tag::Missing,
                Tag::ClippedHigh,
                Tag::ClippedLow
            ]
        );
        assert_eq!(y[1], 0.0);
        assert_eq!(y[2], 0.5);
        assert!(Degradation {
            keep: Some(vec![true]),
            ..Default::default()
        }
        .apply(&[1.0, 2.0])
        .is_err());
    }

    #[test]
    fn conjugate_records_mirror() {
        let pairs = [
            ConjugatePair {
                representative: 0,
                partner: None,
            },
            ConjugatePair {
                representative: 1,
                partner: Some(3),
            },
            ConjugatePair {
                representative: 2,
                partner: None,
            },
        ];
        let values = [
            Complex64::new(0.4, 0.0),
            Complex64::new(0.3, -0.2),
            Complex64::new(-0.1, 0.0),
            Complex64::new(0.3, 0.2),
        ];
        let deg = Degradation {
            keep: Some(vec![true, true, false]),
            clip_theta: None,
            quantizer: Some(QuantizerSpec::new(3, 0.4).unwrap()),
        };
        let recs = deg.apply_conjugate(&values, &pairs).unwrap();
        assert_eq!(recs[3], recs[1].conj());
        assert_eq!(recs[3].observed(), recs[1].observed().conj());
        assert_eq!(recs[0].im, Record::reliable(0.0));
        assert!(recs[2].is_missing());
        for r in recs {
            assert!(r.re.is_consistent() && r.im.is_consistent());
        }
    }

    fn bits_strategy() -> impl Strategy<Value = u32> {
        prop::sample::select(vec![1u32, 2, 3, 4, 8, 16, 32])
    }

    proptest! {
        #[test]
        fn quantizer_consistency(u in -1.0f64..=1.0, bits in bits_strategy()) {
            let spec = q(bits);
            let (level, cell) = quantize(u, &spec);
            prop_assert!(cell.contains(level));
            prop_assert!(cell.lower < level && level < cell.upper);
            prop_assert!(cell.contains(u));
            prop_assert!(level.abs() <= 1.0 - spec.step() / 2.0);
            prop_assert!((u - level).abs() <= spec.step() / 2.0);
            prop_assert_eq!(quantize(level, &spec), (level, cell));
            prop_assert!(Record::quantized(level, cell).is_consistent());
        }

        #[test]
        fn scaled_quantizer_consistency(u in -5.0f64..5.0, scale in 0.01f64..10.0, bits in bits_strategy()) {
            let spec = QuantizerSpec::new(bits, scale).unwrap();
            let (level, cell) = quantize(u, &spec);
            prop_assert!(cell.lower < level && level < cell.upper);
            prop_assert!(cell.lower <= u && u <= cell.upper);
            let (again, cell2) = quantize(level, &spec);
            prop_assert_eq!(again, level);
            prop_assert_eq!(cell2, cell);
        }

        #[test]
        fn degradation_records_are_consistent(
            x in prop::collection::vec(-2.0f64..2.0, 1..40),
            keep_seed in any::<u64>(),
            theta in prop::option::of(0.1f64..1.5),
            bits in prop::option::of(bits_strategy()),
        ) {
            let keep: Vec<bool> = (0..x.len()).map(|i| (keep_seed >> (i % 64)) & 1 == 1).collect();
            let deg = Degradation {
                keep: Some(keep.clone()),
                clip_theta: theta,
                quantizer: bits.map(|b| QuantizerSpec::new(b, 2.0).unwrap()),
            };
            let (y, records) = deg.apply(&x).unwrap();
            for ((v, r), (&orig, &k)) in y.iter().zip(&records).zip(x.iter().zip(&keep)) {
                prop_assert!(r.is_consistent(), "{:?}", r);
                prop_assert_eq!(*v, r.observed);
                prop_assert!(r.lower <= orig && orig <= r.upper);
                prop_assert_eq!(r.tag == Tag::Missing, !k);
            }
        }
    }
}
