//! Weighted-ℓ1 recovery programs over box constraints, posed on an explicit
//! dense analysis matrix and handed to the conic solver.

use nalgebra::{DMatrix, DVector};

use crate::socp::ConicProgram;

/// Complex coefficients `c = (re + i im) x` of a real signal `x`.
#[derive(Clone, Debug)]
pub struct DenseAnalysis {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl DenseAnalysis {
    /// Builds the matrix column by column from a black-box analysis map that
    /// returns interleaved `(re, im)` pairs.
    pub fn from_columns(
        p: usize,
        q: usize,
        mut analyze: impl FnMut(&[f64]) -> Vec<(f64, f64)>,
    ) -> Self {
        let mut re = DMatrix::zeros(q, p);
        let mut im = DMatrix::zeros(q, p);
        let mut e = vec![0.0; p];
        for i in 0..p {
            e[i] = 1.0;
            for (k, (a, b)) in analyze(&e).into_iter().enumerate() {
                re[(k, i)] = a;
                im[(k, i)] = b;
            }
            e[i] = 0.0;
        }
        Self { re, im }
    }

    pub fn signal_len(&self) -> usize {
        self.re.ncols()
    }

    pub fn coefficient_count(&self) -> usize {
        self.re.nrows()
    }

    /// Real-inner-product adjoint applied to interleaved coefficients.
    pub fn synthesize(&self, z: &[f64]) -> Vec<f64> {
        let q = self.coefficient_count();
        let zr = DVector::from_iterator(q, z.iter().step_by(2).cloned());
        let zi = DVector::from_iterator(q, z.iter().skip(1).step_by(2).cloned());
        let x = self.re.transpose() * zr + self.im.transpose() * zi;
        x.iter().cloned().collect()
    }
}

/// Bounds and weights of one recovery instance.
#[derive(Clone, Debug)]
pub struct RecoveryInstance {
    pub analysis: DenseAnalysis,
    pub weights: Vec<f64>,
    pub t_lower: Vec<f64>,
    pub t_upper: Vec<f64>,
    pub re_lower: Vec<f64>,
    pub re_upper: Vec<f64>,
    pub im_lower: Vec<f64>,
    pub im_upper: Vec<f64>,
}

impl RecoveryInstance {
    /// `min sum w_q |A_q x|` over signals `x` in the time box with `A x` in
    /// the coefficient box.
    pub fn analysis_program(&self) -> ConicProgram {
        let a = &self.analysis;
        let (p, q) = (a.signal_len(), a.coefficient_count());
        let mut prog = ConicProgram::new(p);
        for k in 0..q {
            let mut rows = DMatrix::zeros(2, p);
            rows.set_row(0, &a.re.row(k));
            rows.set_row(1, &a.im.row(k));
            prog.add_term(self.weights[k], rows, DVector::zeros(2));
        }
        for i in 0..p {
            let mut e = DVector::zeros(p);
            e[i] = 1.0;
            prog.add_interval(e, self.t_lower[i], self.t_upper[i]);
        }
        for k in 0..q {
            add_row_interval(
                &mut prog,
                a.re.row(k).transpose(),
                self.re_lower[k],
                self.re_upper[k],
            );
            add_row_interval(
                &mut prog,
                a.im.row(k).transpose(),
                self.im_lower[k],
                self.im_upper[k],
            );
        }
        prog
    }

    /// `min sum w_q |z_q|` over interleaved coefficients `z` in the
    /// coefficient box whose synthesis lies in the time box.
    pub fn synthesis_program(&self) -> ConicProgram {
        let a = &self.analysis;
        let (p, q) = (a.signal_len(), a.coefficient_count());
        let n = 2 * q;
        let mut prog = ConicProgram::new(n);
        for k in 0..q {
            let mut rows = DMatrix::zeros(2, n);
            rows[(0, 2 * k)] = 1.0;
            rows[(1, 2 * k + 1)] = 1.0;
            prog.add_term(self.weights[k], rows, DVector::zeros(2));
        }
        for i in 0..p {
            let mut row = DVector::zeros(n);
            for k in 0..q {
                row[2 * k] = a.re[(k, i)];
                row[2 * k + 1] = a.im[(k, i)];
            }
            prog.add_interval(row, self.t_lower[i], self.t_upper[i]);
        }
        for k in 0..q {
            let mut e = DVector::zeros(n);
            e[2 * k] = 1.0;
            prog.add_interval(e.clone(), self.re_lower[k], self.re_upper[k]);
            e[2 * k] = 0.0;
            e[2 * k + 1] = 1.0;
            prog.add_interval(e, self.im_lower[k], self.im_upper[k]);
        }
        prog
    }
}

/// Rows that vanish identically (imaginary parts of real-valued channels)
/// carry no constraint as long as the interval contains zero.
fn add_row_interval(prog: &mut ConicProgram, row: DVector<f64>, lo: f64, hi: f64) {
    if row.norm() == 0.0 {
        assert!(
            lo <= 0.0 && 0.0 <= hi,
            "infeasible constraint on a zero row"
        );
        return;
    }
    prog.add_interval(row, lo, hi);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_analysis_recovers_smallest_feasible_point() {
        // A = Id on R^2 (real coefficients): min |x0| + |x1|, x0 in [1, 2], x1 free
        let analysis = DenseAnalysis {
            re: DMatrix::identity(2, 2),
            im: DMatrix::zeros(2, 2),
        };
        let inf = f64::INFINITY;
        let inst = RecoveryInstance {
            analysis,
            weights: vec![1.0, 1.0],
            t_lower: vec![1.0, -inf],
            t_upper: vec![2.0, inf],
            re_lower: vec![-inf; 2],
            re_upper: vec![inf; 2],
            im_lower: vec![-inf; 2],
            im_upper: vec![inf; 2],
        };
        let sol = inst.analysis_program().solve(&[1.5, 0.3], 1e-10);
        assert!((sol.objective - 1.0).abs() < 1e-8);
        let sol = inst.synthesis_program().solve(&[1.5, 0.0, 0.3, 0.0], 1e-10);
        assert!((sol.objective - 1.0).abs() < 1e-8);
    }
}
