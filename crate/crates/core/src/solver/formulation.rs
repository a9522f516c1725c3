//! The operator pair `(L, K)` of each model, acting on its own primal type.

use num_complex::Complex64;

use crate::frame::FrameSpec;
use crate::linalg::Vector;

pub(super) trait Formulation {
    type U: Vector;

    fn primal_len(&self) -> usize;
    /// `out = K u`
    fn k(&self, u: &Self::U, out: &mut [Complex64]);
    /// `out = K* z`
    fn k_adj(&self, z: &[Complex64], out: &mut Self::U);
    /// `out = L u`
    fn l(&self, u: &Self::U, out: &mut [f64]);
    /// `out = L* x`
    fn l_adj(&self, x: &[f64], out: &mut Self::U);
}

pub(super) struct AnalysisForm<'a>(pub &'a FrameSpec);

impl Formulation for AnalysisForm<'_> {
    type U = Vec<f64>;

    fn primal_len(&self) -> usize {
        self.0.signal_length()
    }

    fn k(&self, u: &Vec<f64>, out: &mut [Complex64]) {
        self.0.analyze_into(u, out);
    }

    fn k_adj(&self, z: &[Complex64], out: &mut Vec<f64>) {
        self.0.synthesize_into(z, out);
    }

    fn l(&self, u: &Vec<f64>, out: &mut [f64]) {
        out.copy_from_slice(u);
    }

    fn l_adj(&self, x: &[f64], out: &mut Vec<f64>) {
        out.copy_from_slice(x);
    }
}

pub(super) struct SynthesisForm<'a>(pub &'a FrameSpec);

impl Formulation for SynthesisForm<'_> {
    type U = Vec<Complex64>;

    fn primal_len(&self) -> usize {
        self.0.coefficient_count()
    }

    fn k(&self, u: &Vec<Complex64>, out: &mut [Complex64]) {
        out.copy_from_slice(u);
    }

    fn k_adj(&self, z: &[Complex64], out: &mut Vec<Complex64>) {
        out.copy_from_slice(z);
    }

    fn l(&self, u: &Vec<Complex64>, out: &mut [f64]) {
        self.0.synthesize_into(u, out);
    }

    fn l_adj(&self, x: &[f64], out: &mut Vec<Complex64>) {
        self.0.analyze_into(x, out);
    }
}
