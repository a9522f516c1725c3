//! Generic Condat–Vũ iteration for
//!
//! ```text
//! minimize  f(u) + g(u) + sum_m h_m(L_m u)
//! ```
//!
//! on real vectors, with `f` smooth, `g` and every `h_m` proximable. Complex
//! spaces are handled by interleaving real and imaginary parts.

use num_complex::Complex64;

use super::iterate::DualChange;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::feasible::BoxConstraint;
use crate::frame::FrameSpec;
use crate::linalg::{power_iteration, Vector};

pub trait LinearOperator {
    fn input_len(&self) -> usize;
    fn output_len(&self) -> usize;
    fn apply(&self, x: &[f64], out: &mut [f64]);
    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]);
}

/// A function with a computable proximal operator.
pub trait ProxFunction {
    /// `out = prox_{gamma f}(v)`
    fn prox(&self, v: &[f64], gamma: f64, out: &mut [f64]);
}

pub trait SmoothFunction {
    fn gradient(&self, u: &[f64], out: &mut [f64]);
    /// Lipschitz constant of the gradient.
    fn lipschitz(&self) -> f64;
}

pub struct CvTerm<'a> {
    pub function: &'a dyn ProxFunction,
    pub operator: &'a dyn LinearOperator,
}

#[derive(Default)]
pub struct CvProblem<'a> {
    pub smooth: Option<&'a dyn SmoothFunction>,
    pub prox_g: Option<&'a dyn ProxFunction>,
    pub terms: Vec<CvTerm<'a>>,
}

impl CvProblem<'_> {
    /// `||sum_m L_m* L_m||` by power iteration.
    pub fn operator_norm(&self, dim: usize) -> f64 {
        let x0: Vec<f64> = (0..dim)
            .map(|i| ((i * 7919 + 13) % 101) as f64 / 101.0 - 0.5)
            .collect();
        power_iteration(
            x0,
            |x: &Vec<f64>| {
                let mut acc = vec![0.0; dim];
                let mut back = vec![0.0; dim];
                for term in &self.terms {
                    let mut y = vec![0.0; term.operator.output_len()];
                    term.operator.apply(x, &mut y);
                    term.operator.apply_adjoint(&y, &mut back);
                    acc.axpy(1.0, &back);
                }
                acc
            },
            crate::frame::NORM_REL_TOL,
            5000,
        )
    }
}

#[derive(Clone, Debug)]
pub struct CvOutcome {
    pub primal: Vec<f64>,
    pub duals: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Relative change of the primal iterate in the final iteration.
    pub final_change: f64,
}

/// Callback receiving the iteration index and the primal iterate.
pub type Observer<'a> = dyn FnMut(usize, &[f64]) + 'a;

/// Runs the iteration from `init` (primal) with zero duals.
///
/// `observer` sees every primal iterate after it is formed.
pub fn cv_generic(
    problem: &CvProblem<'_>,
    config: &SolverConfig,
    init: &[f64],
    mut observer: Option<&mut Observer<'_>>,
) -> Result<CvOutcome> {
    let n = init.len();
    for term in &problem.terms {
        if term.operator.input_len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: term.operator.input_len(),
            });
        }
    }
    let lipschitz = problem.smooth.map_or(0.0, |f| f.lipschitz());
    config.validate(problem.operator_norm(n), lipschitz)?;
    let SolverConfig {
        tau, sigma, rho, ..
    } = *config;

    let mut u = init.to_vec();
    let mut duals: Vec<Vec<f64>> = problem
        .terms
        .iter()
        .map(|t| vec![0.0; t.operator.output_len()])
        .collect();
    let mut grad = vec![0.0; n];
    let mut back = vec![0.0; n];
    let mut iterations = 0;
    let mut change = 0.0;

    for i in 0..config.max_iterations {
        let mut dual = DualChange::default();
        // primal step argument: u - tau grad f(u) - tau sum L_m* (2 v~_m - v_m)
        let mut arg = u.clone();
        if let Some(f) = problem.smooth {
            f.gradient(&u, &mut grad);
            arg.axpy(-tau, &grad);
        }
        for (term, v) in problem.terms.iter().zip(duals.iter_mut()) {
            let m = term.operator.output_len();
            let mut lu = vec![0.0; m];
            term.operator.apply(&u, &mut lu);
            // prox_{sigma h*}(x) = x - sigma prox_{h/sigma}(x / sigma)
            let x: Vec<f64> = v.iter().zip(&lu).map(|(v, l)| v + sigma * l).collect();
            let scaled: Vec<f64> = x.iter().map(|x| x / sigma).collect();
            let mut p = vec![0.0; m];
            term.function.prox(&scaled, 1.0 / sigma, &mut p);
            let v_new: Vec<f64> = x.iter().zip(&p).map(|(x, p)| x - sigma * p).collect();
            let reflected: Vec<f64> = v_new
                .iter()
                .zip(v.iter())
                .map(|(a, b)| 2.0 * a - b)
                .collect();
            term.operator.apply_adjoint(&reflected, &mut back);
            arg.axpy(-tau, &back);
            for (v, vn) in v.iter_mut().zip(&v_new) {
                let next = rho * vn + (1.0 - rho) * *v;
                dual.add(*v, next);
                *v = next;
            }
        }
        let mut u_tilde = arg.clone();
        if let Some(g) = problem.prox_g {
            g.prox(&arg, tau, &mut u_tilde);
        }
        let mut u_next = u.clone();
        u_next.scale(1.0 - rho);
        u_next.axpy(rho, &u_tilde);

        let norm = u.norm();
        change = u_next.dist(&u);
        if norm > 0.0 {
            change /= norm;
        }
        u = u_next;
        iterations = i + 1;
        if let Some(obs) = observer.as_mut() {
            obs(iterations, &u);
        }
        if (iterations % super::FINITE_CHECK_INTERVAL == 0 || iterations == config.max_iterations)
            && !(u.all_finite() && duals.iter().all(|d| d.all_finite()))
        {
            return Err(Error::NonFinite {
                iteration: iterations,
                block: "generic iterate",
            });
        }
        if config
            .rel_tolerance
            .is_some_and(|tol| change <= tol && dual.relative() <= tol)
        {
            break;
        }
    }
    Ok(CvOutcome {
        primal: u,
        duals,
        iterations,
        final_change: change,
    })
}

pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn input_len(&self) -> usize {
        self.0
    }

    fn output_len(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y);
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }
}

impl LinearOperator for DenseOperator {
    fn input_len(&self) -> usize {
        self.cols
    }

    fn output_len(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (yi, row) in y.iter().zip(self.data.chunks_exact(self.cols)) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
    }
}

/// The Gabor analysis operator as a map from `R^P` to `R^{2Q}` with
/// interleaved real and imaginary parts.
pub struct GaborAnalysisOperator<'a>(pub &'a FrameSpec);

impl LinearOperator for GaborAnalysisOperator<'_> {
    fn input_len(&self) -> usize {
        self.0.signal_length()
    }

    fn output_len(&self) -> usize {
        2 * self.0.coefficient_count()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        let mut z = vec![Complex64::default(); self.0.coefficient_count()];
        self.0.analyze_into(x, &mut z);
        for (pair, c) in out.chunks_exact_mut(2).zip(z) {
            pair[0] = c.re;
            pair[1] = c.im;
        }
    }

    fn apply_adjoint(&self, y: &[f64], out: &mut [f64]) {
        let z: Vec<Complex64> = y
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        self.0.synthesize_into(&z, out);
    }
}

/// `sum_k w_k ||x_k||` over consecutive groups of `group` entries; `group = 1`
/// is the weighted ℓ1 norm, `group = 2` sums magnitudes of interleaved complex
/// numbers.
#[derive(Clone, Debug)]
pub struct MagnitudeL1 {
    pub group: usize,
    pub weights: Option<Vec<f64>>,
}

impl ProxFunction for MagnitudeL1 {
    fn prox(&self, v: &[f64], gamma: f64, out: &mut [f64]) {
        for (k, (chunk, o)) in v
            .chunks(self.group)
            .zip(out.chunks_mut(self.group))
            .enumerate()
        {
            let t = gamma * self.weights.as_ref().map_or(1.0, |w| w[k]);
            let mag = chunk.iter().map(|x| x * x).sum::<f64>().sqrt();
            let s = if mag <= t { 0.0 } else { 1.0 - t / mag };
            for (o, x) in o.iter_mut().zip(chunk) {
                *o = s * x;
            }
        }
    }
}

/// Indicator of a box; its prox is the projection.
pub struct BoxIndicator<'a>(pub &'a BoxConstraint);

impl ProxFunction for BoxIndicator<'_> {
    fn prox(&self, v: &[f64], _gamma: f64, out: &mut [f64]) {
        self.0.project_into(v, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_on_interval_converges_to_lower_end() {
        let l1 = MagnitudeL1 {
            group: 1,
            weights: None,
        };
        let b = BoxConstraint::new(vec![1.0], vec![2.0]).unwrap();
        let ind = BoxIndicator(&b);
        let id = IdentityOperator(1);
        let problem = CvProblem {
            terms: vec![
                CvTerm {
                    function: &l1,
                    operator: &id,
                },
                CvTerm {
                    function: &ind,
                    operator: &id,
                },
            ],
            ..Default::default()
        };
        let config = SolverConfig::tight_default().with_iterations(500);
        let out = cv_generic(&problem, &config, &[1.7], None).unwrap();
        assert!((out.primal[0] - 1.0).abs() < 1e-6, "{}", out.primal[0]);
    }

    #[test]
    fn zero_weight_fixed_point() {
        let l1 = MagnitudeL1 {
            group: 1,
            weights: Some(vec![0.0, 0.0]),
        };
        let b = BoxConstraint::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let ind = BoxIndicator(&b);
        let id = IdentityOperator(2);
        let problem = CvProblem {
            terms: vec![
                CvTerm {
                    function: &l1,
                    operator: &id,
                },
                CvTerm {
                    function: &ind,
                    operator: &id,
                },
            ],
            ..Default::default()
        };
        let mut seen = Vec::new();
        let mut obs = |_: usize, u: &[f64]| seen.push(u.to_vec());
        let config = SolverConfig::tight_default().with_iterations(20);
        let out = cv_generic(&problem, &config, &[0.25, 0.5], Some(&mut obs)).unwrap();
        assert_eq!(out.primal, vec![0.25, 0.5]);
        assert!(seen.iter().all(|u| u == &[0.25, 0.5]));
    }

    #[test]
    fn step_sizes_are_validated() {
        let l1 = MagnitudeL1 {
            group: 1,
            weights: None,
        };
        let id = IdentityOperator(1);
        let problem = CvProblem {
            terms: vec![CvTerm {
                function: &l1,
                operator: &id,
            }],
            ..Default::default()
        };
        let config = SolverConfig {
            tau: 2.0,
            sigma: 1.0,
            ..SolverConfig::tight_default()
        };
        assert!(matches!(
            cv_generic(&problem, &config, &[1.0], None),
            Err(Error::StepSize { .. })
        ));
    }

    #[test]
    fn dense_adjoint() {
        let a = DenseOperator::new(2, 3, vec![1.0, 2.0, 3.0, -1.0, 0.5, 4.0]).unwrap();
        let x = [0.3, -1.0, 2.0];
        let y = [1.5, -0.5];
        let mut ax = [0.0; 2];
        let mut aty = [0.0; 3];
        a.apply(&x, &mut ax);
        a.apply_adjoint(&y, &mut aty);
        let lhs: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&aty).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
