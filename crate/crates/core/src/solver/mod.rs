//! Condat–Vũ primal-dual splitting for
//!
//! ```text
//! minimize  || W K u ||_1   subject to  L u in Γ_T,  K u in Γ_TF
//! ```
//!
//! where `(L, K) = (A*, Id)` in the synthesis model and `(Id, A)` in the
//! analysis model. [`solve_general`] treats all three terms through dual
//! variables and works with any frame; [`solve_tight`] folds the time-domain
//! constraint into the primal step and requires a Parseval tight frame.
//! [`cv_generic`] is the plain algorithm on real vectors for arbitrary
//! operators and proximable functions.

mod cv;
mod formulation;
mod iterate;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasible::{BoxConstraint, ComplexBox};
use crate::frame::{Composition, FrameSpec};

pub use cv::{
    cv_generic, BoxIndicator, CvOutcome, CvProblem, CvTerm, DenseOperator, GaborAnalysisOperator,
    IdentityOperator, LinearOperator, MagnitudeL1, ProxFunction, SmoothFunction,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Unknowns are coefficients: `L = A*`, `K = Id`.
    Synthesis,
    /// Unknowns are samples: `L = Id`, `K = A`.
    Analysis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Three dual blocks; any frame.
    General,
    /// Two dual blocks plus the explicit prox of `ι_{Γ_T} ∘ L`; Parseval frames only.
    Tight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Hard constraints (indicator functions).
    #[default]
    Consistent,
    /// Distances to the feasible sets are penalized instead.
    Inconsistent,
}

/// Largest admissible value of `tau * sigma * ||sum L*L||`. The slack above 1
/// absorbs the power-iteration tolerance.
pub const STEP_BOUND_SLACK: f64 = 1e-6;
/// Relative deviation from `A*A = Id` tolerated by [`solve_tight`].
pub const TIGHTNESS_TOL: f64 = 1e-8;
/// Iterates are checked for NaN/inf this often.
pub const FINITE_CHECK_INTERVAL: usize = 10;

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    frame: FrameSpec,
    model: Model,
    weights: Vec<f64>,
    box_t: BoxConstraint,
    box_tf: ComplexBox,
    mode: Mode,
}

impl ProblemSpec {
    /// Problem with unit weights in consistent mode.
    pub fn new(
        frame: FrameSpec,
        model: Model,
        box_t: BoxConstraint,
        box_tf: ComplexBox,
    ) -> Result<Self> {
        if box_t.len() != frame.signal_length() {
            return Err(Error::LengthMismatch {
                expected: frame.signal_length(),
                actual: box_t.len(),
            });
        }
        if box_tf.len() != frame.coefficient_count() {
            return Err(Error::LengthMismatch {
                expected: frame.coefficient_count(),
                actual: box_tf.len(),
            });
        }
        let weights = vec![1.0; frame.coefficient_count()];
        Ok(Self {
            frame,
            model,
            weights,
            box_t,
            box_tf,
            mode: Mode::Consistent,
        })
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.frame.coefficient_count() {
            return Err(Error::LengthMismatch {
                expected: self.frame.coefficient_count(),
                actual: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("entries must be finite and nonnegative, found {w}"),
            });
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn frame(&self) -> &FrameSpec {
        &self.frame
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn box_t(&self) -> &BoxConstraint {
        &self.box_t
    }

    pub fn box_tf(&self) -> &ComplexBox {
        &self.box_tf
    }

    /// `||sum_m L_m* L_m||` for the operators `algorithm` uses.
    pub fn operator_norm(&self, algorithm: Algorithm) -> f64 {
        self.frame.operator_norm(&Composition::Assignment {
            model: self.model,
            algorithm,
            weights: Some(&self.weights),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tau: f64,
    pub sigma: f64,
    pub rho: f64,
    pub max_iterations: usize,
    /// Stop once `||u_{i+1} - u_i|| <= rel_tolerance * ||u_i||` and the dual
    /// variables have settled to the same relative tolerance.
    pub rel_tolerance: Option<f64>,
}

impl SolverConfig {
    /// `tau = sigma = sqrt(2)/2`, `rho = 1`, 300 iterations: admissible for
    /// [`solve_tight`] with unit weights, where `||sum L*L|| = 2`.
    pub fn tight_default() -> Self {
        Self {
            tau: std::f64::consts::FRAC_1_SQRT_2,
            sigma: std::f64::consts::FRAC_1_SQRT_2,
            rho: 1.0,
            max_iterations: 300,
            rel_tolerance: None,
        }
    }

    /// `tau = sigma = 1/sqrt(3)`: admissible for [`solve_general`] with unit
    /// weights and a Parseval frame, where `||sum L*L|| = 3`.
    pub fn general_default() -> Self {
        let s = 1.0 / 3f64.sqrt();
        Self {
            tau: s,
            sigma: s,
            ..Self::tight_default()
        }
    }

    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::General => Self::general_default(),
            Algorithm::Tight => Self::tight_default(),
        }
    }

    pub fn with_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_tolerance(mut self, rel_tolerance: f64) -> Self {
        self.rel_tolerance = Some(rel_tolerance);
        self
    }

    /// Checks the convergence conditions against `norm = ||sum L*L||`, with
    /// `lipschitz` the gradient Lipschitz constant of the smooth term (0 when
    /// there is none).
    pub fn validate(&self, norm: f64, lipschitz: f64) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                })
            }
        };
        positive("tau", self.tau)?;
        positive("sigma", self.sigma)?;
        let product = self.tau * (lipschitz / 2.0 + self.sigma * norm);
        if product > 1.0 + STEP_BOUND_SLACK {
            return Err(Error::StepSize {
                tau: self.tau,
                sigma: self.sigma,
                norm,
                product,
            });
        }
        let rho_max = if lipschitz > 0.0 {
            2.0 - lipschitz / 2.0 / (1.0 / self.tau - self.sigma * norm)
        } else {
            2.0
        };
        if !(self.rho > 0.0 && self.rho < rho_max) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must lie in (0, {rho_max}), got {}", self.rho),
            });
        }
        if let Some(tol) = self.rel_tolerance {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "rel_tolerance",
                    reason: format!("must be nonnegative, got {tol}"),
                });
            }
        }
        Ok(())
    }
}

/// Primal unknowns: samples in the analysis model, coefficients in the
/// synthesis model.
#[derive(Clone, Debug, PartialEq)]
pub enum Primal {
    Time(Vec<f64>),
    Coefficients(Vec<Complex64>),
}

impl Primal {
    /// Warm start from a degraded time-domain observation: the observation
    /// itself for the analysis model, its coefficients for the synthesis
    /// model.
    pub fn from_observation(model: Model, frame: &FrameSpec, observation: &[f64]) -> Result<Self> {
        Ok(match model {
            Model::Analysis => {
                check_len(frame.signal_length(), observation.len())?;
                Primal::Time(observation.to_vec())
            }
            Model::Synthesis => Primal::Coefficients(frame.analyze(observation)?.into_values()),
        })
    }

    pub fn model(&self) -> Model {
        match self {
            Primal::Time(_) => Model::Analysis,
            Primal::Coefficients(_) => Model::Synthesis,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// Reconstructed time-domain signal (`L u`).
    pub signal: Vec<f64>,
    pub primal: Primal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations_run: usize,
    /// `||u_last - u_prev|| / ||u_prev||` of the final iteration.
    pub final_primal_change: f64,
    /// `dist(L u, Γ_T)`.
    pub dist_t: f64,
    /// `dist(K u, Γ_TF)`.
    pub dist_tf: f64,
    /// `||W K u||_1`.
    pub objective: f64,
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Entrywise complex soft thresholding: magnitudes shrink by `t[q]`, phases
/// are kept.
pub fn soft_threshold(z: &[Complex64], t: &[f64]) -> Result<Vec<Complex64>> {
    check_len(z.len(), t.len())?;
    if let Some(bad) = t.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            reason: format!("must be nonnegative, got {bad}"),
        });
    }
    Ok(z.iter().zip(t).map(|(&z, &t)| shrink(z, t)).collect())
}

#[inline]
pub(crate) fn shrink(z: Complex64, t: f64) -> Complex64 {
    let mag = z.norm();
    if mag <= t {
        Complex64::default()
    } else {
        z * (1.0 - t / mag)
    }
}

/// `sum_q W[q] |(K u)[q]|`.
pub fn objective(problem: &ProblemSpec, u: &Primal) -> Result<f64> {
    let ku = match u {
        Primal::Time(x) => {
            check_model(problem, Model::Analysis)?;
            problem.frame.analyze(x)?.into_values()
        }
        Primal::Coefficients(z) => {
            check_model(problem, Model::Synthesis)?;
            check_len(problem.frame.coefficient_count(), z.len())?;
            z.clone()
        }
    };
    Ok(weighted_l1(&problem.weights, &ku))
}

pub(crate) fn weighted_l1(weights: &[f64], z: &[Complex64]) -> f64 {
    weights.iter().zip(z).map(|(w, z)| w * z.norm()).sum()
}

fn check_model(problem: &ProblemSpec, model: Model) -> Result<()> {
    if problem.model != model {
        return Err(Error::InvalidParameter {
            name: "init",
            reason: format!("{model:?} unknowns given to a {:?} problem", problem.model),
        });
    }
    Ok(())
}

/// Three-block Condat–Vũ iteration (dual variables for the sparsity term and
/// both feasible sets). Works for any frame.
pub fn solve_general(
    problem: &ProblemSpec,
    config: &SolverConfig,
    init: Primal,
) -> Result<(Solution, SolveReport)> {
    config.validate(problem.operator_norm(Algorithm::General), 0.0)?;
    iterate::run(problem, config, init, Algorithm::General)
}

/// Two-block Condat–Vũ iteration with the time-domain constraint handled in
/// the primal step. Requires a Parseval tight frame.
pub fn solve_tight(
    problem: &ProblemSpec,
    config: &SolverConfig,
    init: Primal,
) -> Result<(Solution, SolveReport)> {
    let deviation = problem.frame.tightness_deviation();
    if deviation > TIGHTNESS_TOL {
        return Err(Error::NotTight { deviation });
    }
    config.validate(problem.operator_norm(Algorithm::Tight), 0.0)?;
    iterate::run(problem, config, init, Algorithm::Tight)
}

pub fn solve(
    problem: &ProblemSpec,
    config: &SolverConfig,
    init: Primal,
    algorithm: Algorithm,
) -> Result<(Solution, SolveReport)> {
    match algorithm {
        Algorithm::General => solve_general(problem, config, init),
        Algorithm::Tight => solve_tight(problem, config, init),
    }
}
