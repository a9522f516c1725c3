//! Dense log-barrier interior-point solver for small second-order cone
//! programs of the form
//!
//! ```text
//! minimize   sum_j w_j ||G_j x + g_j||
//! subject to a_i' x <= b_i,   e_k' x = d_k
//! ```
//!
//! Each norm term is lifted to an epigraph variable `t_j` with the barrier
//! `-log(t_j^2 - ||G_j x + g_j||^2)`. Equality constraints are eliminated with
//! an orthonormal null-space basis, and every centering step is a damped
//! Newton iteration.

use nalgebra::{DMatrix, DVector};

/// `w * ||rows * x + offset||`.
#[derive(Clone, Debug)]
pub struct NormTerm {
    pub weight: f64,
    pub rows: DMatrix<f64>,
    pub offset: DVector<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct ConicProgram {
    pub n: usize,
    pub terms: Vec<NormTerm>,
    /// `a' x <= b`
    pub inequalities: Vec<(DVector<f64>, f64)>,
    /// `a' x = b`
    pub equalities: Vec<(DVector<f64>, f64)>,
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Upper bound on `objective - optimum` from the barrier parameter.
    pub gap_bound: f64,
}

impl ConicProgram {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            ..Default::default()
        }
    }

    pub fn add_term(&mut self, weight: f64, rows: DMatrix<f64>, offset: DVector<f64>) {
        assert_eq!(rows.ncols(), self.n);
        assert_eq!(rows.nrows(), offset.len());
        if weight > 0.0 {
            self.terms.push(NormTerm {
                weight,
                rows,
                offset,
            });
        }
    }

    /// `lo <= a' x <= hi`, with infinite sides dropped and `lo == hi` turned
    /// into an equality.
    pub fn add_interval(&mut self, a: DVector<f64>, lo: f64, hi: f64) {
        assert_eq!(a.len(), self.n);
        if lo == hi {
            self.equalities.push((a, lo));
            return;
        }
        if hi.is_finite() {
            self.inequalities.push((a.clone(), hi));
        }
        if lo.is_finite() {
            self.inequalities.push((-a, -lo));
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        self.terms
            .iter()
            .map(|t| t.weight * (&t.rows * &x + &t.offset).norm())
            .sum()
    }

    /// Solves from a point `x0` that satisfies the equalities and lies strictly
    /// inside the inequalities. Stops once the barrier gap bound drops below
    /// `gap_tol`.
    pub fn solve(&self, x0: &[f64], gap_tol: f64) -> ConicSolution {
        let x0 = DVector::from_column_slice(x0);
        for (a, b) in &self.inequalities {
            assert!(a.dot(&x0) < *b, "starting point is not strictly feasible");
        }
        for (a, b) in &self.equalities {
            assert!(
                (a.dot(&x0) - b).abs() < 1e-9,
                "starting point violates an equality"
            );
        }

        let basis = self.null_space();
        let r = basis.ncols();
        let cones: Vec<(f64, DMatrix<f64>, DVector<f64>)> = self
            .terms
            .iter()
            .map(|t| (t.weight, &t.rows * &basis, &t.rows * &x0 + &t.offset))
            .collect();
        let ineq: Vec<(DVector<f64>, f64)> = self
            .inequalities
            .iter()
            .map(|(a, b)| (basis.transpose() * a, b - a.dot(&x0)))
            .collect();

        let m = cones.len();
        let dim = r + m;
        let mut y = DVector::zeros(dim);
        for (j, (_, _, g)) in cones.iter().enumerate() {
            y[r + j] = g.norm() + 1.0;
        }
        let nu = (2 * m + ineq.len()) as f64;
        let mut tb = 1.0;

        let barrier = |y: &DVector<f64>, tb: f64| -> Option<(f64, DVector<f64>, DMatrix<f64>)> {
            let s = y.rows(0, r);
            let mut val = 0.0;
            let mut grad = DVector::zeros(dim);
            let mut hess = DMatrix::zeros(dim, dim);
            for (j, (w, gm, g0)) in cones.iter().enumerate() {
                let t = y[r + j];
                let res = gm * s + g0;
                let slack = t * t - res.norm_squared();
                if slack.is_nan() || slack <= 0.0 || t <= 0.0 {
                    return None;
                }
                val += tb * w * t - slack.ln();
                let gtr = gm.transpose() * &res;
                grad[r + j] += tb * w - 2.0 * t / slack;
                let mut gs = grad.rows_mut(0, r);
                gs += &gtr * (2.0 / slack);
                hess[(r + j, r + j)] += -2.0 / slack + 4.0 * t * t / (slack * slack);
                let cross = &gtr * (-4.0 * t / (slack * slack));
                for i in 0..r {
                    hess[(i, r + j)] += cross[i];
                    hess[(r + j, i)] += cross[i];
                }
                let mut hs = hess.view_mut((0, 0), (r, r));
                hs += gm.transpose() * gm * (2.0 / slack)
                    + &gtr * gtr.transpose() * (4.0 / (slack * slack));
            }
            for (a, b) in &ineq {
                let slack = b - a.dot(&s);
                if slack.is_nan() || slack <= 0.0 {
                    return None;
                }
                val -= slack.ln();
                let mut gs = grad.rows_mut(0, r);
                gs += a / slack;
                let mut hs = hess.view_mut((0, 0), (r, r));
                hs += a * a.transpose() / (slack * slack);
            }
            Some((val, grad, hess))
        };

        loop {
            for _ in 0..200 {
                let (_, grad, hess) = barrier(&y, tb).expect("iterate left the domain");
                let step = match hess.clone().cholesky() {
                    Some(ch) => ch.solve(&(-&grad)),
                    None => hess
                        .clone()
                        .lu()
                        .solve(&(-&grad))
                        .expect("singular Newton system"),
                };
                let lambda_sq = -grad.dot(&step);
                if lambda_sq <= 1e-14 {
                    break;
                }
                let lambda = lambda_sq.max(0.0).sqrt();
                let mut alpha = if lambda > 0.25 {
                    1.0 / (1.0 + lambda)
                } else {
                    1.0
                };
                while barrier(&(&y + &step * alpha), tb).is_none() {
                    alpha *= 0.5;
                    assert!(alpha > 1e-20, "line search failed");
                }
                y += &step * alpha;
            }
            if nu / tb <= gap_tol {
                break;
            }
            tb *= 8.0;
        }

        let x = &x0 + &basis * y.rows(0, r);
        let x: Vec<f64> = x.iter().cloned().collect();
        ConicSolution {
            objective: self.objective(&x),
            x,
            gap_bound: nu / tb,
        }
    }

    fn null_space(&self) -> DMatrix<f64> {
        if self.equalities.is_empty() {
            return DMatrix::identity(self.n, self.n);
        }
        let k = self.equalities.len();
        // Pad to a square matrix so the SVD returns a full V.
        let rows = k.max(self.n);
        let mut e = DMatrix::zeros(rows, self.n);
        for (i, (a, _)) in self.equalities.iter().enumerate() {
            e.set_row(i, &a.transpose());
        }
        let svd = e.svd(false, true);
        let v_t = svd.v_t.expect("requested V");
        let smax = svd.singular_values.max();
        let tol = smax * 1e-10 * self.n as f64;
        let null_rows: Vec<usize> = (0..self.n)
            .filter(|&i| svd.singular_values[i] <= tol)
            .collect();
        let mut basis = DMatrix::zeros(self.n, null_rows.len());
        for (c, &i) in null_rows.iter().enumerate() {
            basis.set_column(c, &v_t.row(i).transpose());
        }
        basis
    }
}
