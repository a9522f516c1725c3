//! Box-type feasible sets built from degradation records.
//!
//! Infinite bounds are plain IEEE infinities, so the entrywise projection
//! `min(upper, max(v, lower))` needs no special cases.

use num_complex::Complex64;

use crate::degradation::{ComplexRecord, Record};
use crate::error::{Error, Result};

/// Entrywise interval constraint on a real vector.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxConstraint {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

#[inline]
fn clamp(v: f64, lower: f64, upper: f64) -> f64 {
    upper.min(v.max(lower))
}

impl BoxConstraint {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_len(lower.len(), upper.len())?;
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            // also rejects NaN bounds
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(Error::InconsistentRecord {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(Self { lower, upper })
    }

    /// The whole space.
    pub fn unbounded(len: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; len],
            upper: vec![f64::INFINITY; len],
        }
    }

    /// The single point `values`.
    pub fn pinned(values: &[f64]) -> Self {
        Self {
            lower: values.to_vec(),
            upper: values.to_vec(),
        }
    }

    pub fn from_records(records: &[Record]) -> Result<Self> {
        Self::new(
            records.iter().map(|r| r.lower).collect(),
            records.iter().map(|r| r.upper).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Appends `extra` entries pinned to `value`.
    pub fn extended_pinned(mut self, extra: usize, value: f64) -> Self {
        self.lower.extend(std::iter::repeat_n(value, extra));
        self.upper.extend(std::iter::repeat_n(value, extra));
        self
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        v.len() == self.len()
            && v.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&lo, &hi))| x >= lo - tol && x <= hi + tol)
    }

    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), v.len())?;
        let mut out = vec![0.0; v.len()];
        self.project_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn project_into(&self, v: &[f64], out: &mut [f64]) {
        for (o, (&x, (&lo, &hi))) in out
            .iter_mut()
            .zip(v.iter().zip(self.lower.iter().zip(&self.upper)))
        {
            *o = clamp(x, lo, hi);
        }
    }

    pub fn distance(&self, v: &[f64]) -> Result<f64> {
        check_len(self.len(), v.len())?;
        Ok(self.dist_unchecked(v))
    }

    pub(crate) fn dist_unchecked(&self, v: &[f64]) -> f64 {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&x, (&lo, &hi))| (x - clamp(x, lo, hi)).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Proximal operator of `tau * dist(., box)`.
    pub fn prox_distance(&self, v: &[f64], tau: f64) -> Result<Vec<f64>> {
        check_len(self.len(), v.len())?;
        check_tau(tau)?;
        let mut out = vec![0.0; v.len()];
        self.prox_distance_into(v, tau, &mut out);
        Ok(out)
    }

    pub(crate) fn prox_distance_into(&self, v: &[f64], tau: f64, out: &mut [f64]) {
        self.project_into(v, out);
        let d = self.dist_unchecked(v);
        if d > tau {
            let t = tau / d;
            for (o, &x) in out.iter_mut().zip(v) {
                *o = x + t * (*o - x);
            }
        }
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("must be positive, got {tau}"),
        });
    }
    Ok(())
}

pub fn build_box(records: &[Record]) -> Result<BoxConstraint> {
    BoxConstraint::from_records(records)
}

pub fn build_complex_box(records: &[ComplexRecord]) -> Result<ComplexBox> {
    ComplexBox::from_records(records)
}

/// Box on a complex vector; real and imaginary parts are constrained
/// independently.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexBox {
    re: BoxConstraint,
    im: BoxConstraint,
}

impl ComplexBox {
    pub fn new(re: BoxConstraint, im: BoxConstraint) -> Result<Self> {
        check_len(re.len(), im.len())?;
        Ok(Self { re, im })
    }

    pub fn unbounded(len: usize) -> Self {
        Self {
            re: BoxConstraint::unbounded(len),
            im: BoxConstraint::unbounded(len),
        }
    }

    pub fn pinned(values: &[Complex64]) -> Self {
        Self {
            re: BoxConstraint::pinned(&values.iter().map(|z| z.re).collect::<Vec<_>>()),
            im: BoxConstraint::pinned(&values.iter().map(|z| z.im).collect::<Vec<_>>()),
        }
    }

    pub fn from_records(records: &[ComplexRecord]) -> Result<Self> {
        let re: Vec<Record> = records.iter().map(|r| r.re).collect();
        let im: Vec<Record> = records.iter().map(|r| r.im).collect();
        Ok(Self {
            re: BoxConstraint::from_records(&re)?,
            im: BoxConstraint::from_records(&im)?,
        })
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn re(&self) -> &BoxConstraint {
        &self.re
    }

    pub fn im(&self) -> &BoxConstraint {
        &self.im
    }

    #[inline]
    fn clamp_at(&self, i: usize, z: Complex64) -> Complex64 {
        Complex64::new(
            clamp(z.re, self.re.lower[i], self.re.upper[i]),
            clamp(z.im, self.im.lower[i], self.im.upper[i]),
        )
    }

    pub fn contains(&self, v: &[Complex64], tol: f64) -> bool {
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        let im: Vec<f64> = v.iter().map(|z| z.im).collect();
        self.re.contains(&re, tol) && self.im.contains(&im, tol)
    }

    pub fn project(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.len(), v.len())?;
        let mut out = vec![Complex64::default(); v.len()];
        self.project_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn project_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (i, (o, &z)) in out.iter_mut().zip(v).enumerate() {
            *o = self.clamp_at(i, z);
        }
    }

    pub fn distance(&self, v: &[Complex64]) -> Result<f64> {
        check_len(self.len(), v.len())?;
        Ok(self.dist_unchecked(v))
    }

    pub(crate) fn dist_unchecked(&self, v: &[Complex64]) -> f64 {
        v.iter()
            .enumerate()
            .map(|(i, &z)| (z - self.clamp_at(i, z)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn prox_distance(&self, v: &[Complex64], tau: f64) -> Result<Vec<Complex64>> {
        check_len(self.len(), v.len())?;
        check_tau(tau)?;
        let mut out = vec![Complex64::default(); v.len()];
        self.prox_distance_into(v, tau, &mut out);
        Ok(out)
    }

    pub(crate) fn prox_distance_into(&self, v: &[Complex64], tau: f64, out: &mut [Complex64]) {
        self.project_into(v, out);
        let d = self.dist_unchecked(v);
        if d > tau {
            let t = tau / d;
            for (o, &x) in out.iter_mut().zip(v) {
                *o = x + (*o - x) * t;
            }
        }
    }
}
