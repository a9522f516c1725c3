//! The specialized iterations behind `solve_general` and `solve_tight`.

use num_complex::Complex64;

use super::formulation::{AnalysisForm, Formulation, SynthesisForm};
use super::{
    check_len, shrink, weighted_l1, Algorithm, Mode, Model, Primal, ProblemSpec, Solution,
    SolveReport, SolverConfig, FINITE_CHECK_INTERVAL,
};
use crate::error::{Error, Result};
use crate::linalg::Vector;

pub(super) fn run(
    problem: &ProblemSpec,
    config: &SolverConfig,
    init: Primal,
    algorithm: Algorithm,
) -> Result<(Solution, SolveReport)> {
    let frame = problem.frame();
    match (problem.model(), init) {
        (Model::Analysis, Primal::Time(u)) => {
            let form = AnalysisForm(frame);
            check_len(form.primal_len(), u.len())?;
            let (u, report) = iterate(&form, problem, config, u, algorithm)?;
            let solution = Solution {
                signal: u.clone(),
                primal: Primal::Time(u),
            };
            Ok((solution, report))
        }
        (Model::Synthesis, Primal::Coefficients(z)) => {
            let form = SynthesisForm(frame);
            check_len(form.primal_len(), z.len())?;
            let (z, report) = iterate(&form, problem, config, z, algorithm)?;
            let mut signal = vec![0.0; frame.signal_length()];
            form.l(&z, &mut signal);
            let solution = Solution {
                signal,
                primal: Primal::Coefficients(z),
            };
            Ok((solution, report))
        }
        (model, init) => Err(Error::InvalidParameter {
            name: "init",
            reason: format!("{:?} unknowns given to a {model:?} problem", init.model()),
        }),
    }
}

/// Projection onto `Γ_T` (consistent) or prox of `gamma * dist(., Γ_T)`.
fn time_prox(problem: &ProblemSpec, v: &[f64], gamma: f64, out: &mut [f64]) {
    match problem.mode() {
        Mode::Consistent => problem.box_t().project_into(v, out),
        Mode::Inconsistent => problem.box_t().prox_distance_into(v, gamma, out),
    }
}

fn tf_prox(problem: &ProblemSpec, v: &[Complex64], gamma: f64, out: &mut [Complex64]) {
    match problem.mode() {
        Mode::Consistent => problem.box_tf().project_into(v, out),
        Mode::Inconsistent => problem.box_tf().prox_distance_into(v, gamma, out),
    }
}

fn iterate<F: Formulation>(
    form: &F,
    problem: &ProblemSpec,
    config: &SolverConfig,
    mut u: F::U,
    algorithm: Algorithm,
) -> Result<(F::U, SolveReport)> {
    let frame = problem.frame();
    let (p, q) = (frame.signal_length(), frame.coefficient_count());
    let n = form.primal_len();
    let weights = problem.weights();
    let SolverConfig {
        tau, sigma, rho, ..
    } = *config;
    let zero = Complex64::default();

    // dual variables: sparsity term, TF set, time set (general only)
    let mut v_s = vec![zero; q];
    let mut v_tf = vec![zero; q];
    let mut v_t = vec![
        0.0;
        if algorithm == Algorithm::General {
            p
        } else {
            0
        }
    ];

    let mut ku = vec![zero; q];
    let mut lu = vec![0.0; p];
    let mut arg_c = vec![zero; q];
    let mut prox_c = vec![zero; q];
    let mut arg_r = vec![0.0; p];
    let mut prox_r = vec![0.0; p];
    let mut reflect_c = vec![zero; q];
    let mut reflect_r = vec![0.0; p];
    let mut adj_k = F::U::zeros(n);
    let mut adj_l = F::U::zeros(n);

    let mut iterations = 0;
    let mut change = 0.0;

    for i in 0..config.max_iterations {
        let mut dual = DualChange::default();
        form.k(&u, &mut ku);

        // h_1 = ||.||_1 through L_1 = W K, via the Moreau identity
        for j in 0..q {
            let x = v_s[j] + ku[j] * (sigma * weights[j]);
            let v_new = x - shrink(x / sigma, 1.0 / sigma) * sigma;
            reflect_c[j] = (v_new * 2.0 - v_s[j]) * weights[j];
            let next = v_new * rho + v_s[j] * (1.0 - rho);
            dual.add_complex(v_s[j], next);
            v_s[j] = next;
        }

        // ι_{Γ_TF} (or its distance) through K
        for j in 0..q {
            arg_c[j] = (v_tf[j] + ku[j] * sigma) / sigma;
        }
        tf_prox(problem, &arg_c, 1.0 / sigma, &mut prox_c);
        for j in 0..q {
            let x = v_tf[j] + ku[j] * sigma;
            let v_new = x - prox_c[j] * sigma;
            reflect_c[j] += v_new * 2.0 - v_tf[j];
            let next = v_new * rho + v_tf[j] * (1.0 - rho);
            dual.add_complex(v_tf[j], next);
            v_tf[j] = next;
        }

        let mut u_next = u.clone();
        match algorithm {
            Algorithm::General => {
                // ι_{Γ_T} through L
                form.l(&u, &mut lu);
                for j in 0..p {
                    arg_r[j] = (v_t[j] + sigma * lu[j]) / sigma;
                }
                time_prox(problem, &arg_r, 1.0 / sigma, &mut prox_r);
                for j in 0..p {
                    let x = v_t[j] + sigma * lu[j];
                    let v_new = x - sigma * prox_r[j];
                    reflect_r[j] = 2.0 * v_new - v_t[j];
                    let next = rho * v_new + (1.0 - rho) * v_t[j];
                    dual.add(v_t[j], next);
                    v_t[j] = next;
                }
                form.k_adj(&reflect_c, &mut adj_k);
                form.l_adj(&reflect_r, &mut adj_l);
                u_next.axpy(-rho * tau, &adj_k);
                u_next.axpy(-rho * tau, &adj_l);
            }
            Algorithm::Tight => {
                form.k_adj(&reflect_c, &mut adj_k);
                let mut w = u.clone();
                w.axpy(-tau, &adj_k);
                // prox of ι_{Γ_T} ∘ L for L L* = Id
                form.l(&w, &mut lu);
                time_prox(problem, &lu, tau, &mut prox_r);
                for j in 0..p {
                    reflect_r[j] = prox_r[j] - lu[j];
                }
                form.l_adj(&reflect_r, &mut adj_l);
                w.axpy(1.0, &adj_l);
                // u <- rho * w + (1 - rho) * u
                u_next.scale(1.0 - rho);
                u_next.axpy(rho, &w);
            }
        }

        let norm = u.norm();
        change = u_next.dist(&u);
        if norm > 0.0 {
            change /= norm;
        }
        u = u_next;
        iterations = i + 1;

        if iterations % FINITE_CHECK_INTERVAL == 0 || iterations == config.max_iterations {
            check_finite(&u, &v_s, &v_tf, &v_t, iterations)?;
        }
        if let Some(tol) = config.rel_tolerance {
            if change <= tol && dual.relative() <= tol {
                check_finite(&u, &v_s, &v_tf, &v_t, iterations)?;
                break;
            }
        }
    }

    form.k(&u, &mut ku);
    form.l(&u, &mut lu);
    let report = SolveReport {
        iterations_run: iterations,
        final_primal_change: change,
        dist_t: problem.box_t().dist_unchecked(&lu),
        dist_tf: problem.box_tf().dist_unchecked(&ku),
        objective: weighted_l1(weights, &ku),
    };
    Ok((u, report))
}

/// Relative change of the stacked dual variables over one iteration.
///
/// The primal iterate alone can stall while the duals still move, e.g. when a
/// warm start is reproduced exactly after one step; stopping requires both.
#[derive(Default)]
pub(super) struct DualChange {
    diff_sq: f64,
    prev_sq: f64,
    next_sq: f64,
}

impl DualChange {
    #[inline]
    pub(super) fn add(&mut self, prev: f64, next: f64) {
        self.diff_sq += (next - prev) * (next - prev);
        self.prev_sq += prev * prev;
        self.next_sq += next * next;
    }

    #[inline]
    fn add_complex(&mut self, prev: Complex64, next: Complex64) {
        self.add(prev.re, next.re);
        self.add(prev.im, next.im);
    }

    pub(super) fn relative(&self) -> f64 {
        let scale = self.prev_sq.max(self.next_sq);
        if scale == 0.0 {
            0.0
        } else {
            (self.diff_sq / scale).sqrt()
        }
    }
}

fn check_finite<U: Vector>(
    u: &U,
    v_s: &Vec<Complex64>,
    v_tf: &Vec<Complex64>,
    v_t: &Vec<f64>,
    iteration: usize,
) -> Result<()> {
    let block = if !u.all_finite() {
        "primal"
    } else if !v_s.all_finite() {
        "sparsity dual"
    } else if !v_tf.all_finite() {
        "time-frequency dual"
    } else if !v_t.all_finite() {
        "time dual"
    } else {
        return Ok(());
    };
    Err(Error::NonFinite { iteration, block })
}
