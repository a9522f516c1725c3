//! Box-constrained convex QP by exhaustive active-set enumeration.

use nalgebra::{DMatrix, DVector};

/// Minimizes `0.5 x'Hx - c'x` subject to `lower <= x <= upper` (finite
/// bounds, `H` positive definite) by trying every assignment of each
/// coordinate to {free, at lower, at upper} and keeping the best feasible
/// stationary point. Exponential in the dimension; meant for `n <= 8`.
pub fn solve_box_qp(h: &DMatrix<f64>, c: &DVector<f64>, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let n = c.len();
    assert!(
        n <= 12,
        "enumeration oracle is exponential in the dimension"
    );
    let mut best: Option<(f64, DVector<f64>)> = None;
    let combos = 3usize.pow(n as u32);
    let mut state = vec![0u8; n];
    for mut code in 0..combos {
        for s in state.iter_mut() {
            *s = (code % 3) as u8;
            code /= 3;
        }
        let mut x = DVector::zeros(n);
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 0).collect();
        for i in 0..n {
            match state[i] {
                1 => x[i] = lower[i],
                2 => x[i] = upper[i],
                _ => {}
            }
        }
        if !free.is_empty() {
            // H_FF x_F = c_F - H_FB x_B
            let k = free.len();
            let mut a = DMatrix::zeros(k, k);
            let mut rhs = DVector::zeros(k);
            for (r, &i) in free.iter().enumerate() {
                rhs[r] = c[i];
                for j in 0..n {
                    if state[j] != 0 {
                        rhs[r] -= h[(i, j)] * x[j];
                    }
                }
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = h[(i, j)];
                }
            }
            let Some(sol) = a.lu().solve(&rhs) else {
                continue;
            };
            for (r, &i) in free.iter().enumerate() {
                x[i] = sol[r];
            }
        }
        let feasible = (0..n).all(|i| x[i] >= lower[i] - 1e-14 && x[i] <= upper[i] + 1e-14);
        if !feasible {
            continue;
        }
        let obj = 0.5 * x.dot(&(h * &x)) - c.dot(&x);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, x));
        }
    }
    best.expect("a box always contains a vertex candidate")
        .1
        .iter()
        .cloned()
        .collect()
}

/// Euclidean projection of `v` onto `[lower, upper]` via [`solve_box_qp`].
pub fn project_box_brute(lower: &[f64], upper: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    solve_box_qp(
        &DMatrix::identity(n, n),
        &DVector::from_column_slice(v),
        lower,
        upper,
    )
}
