//! Minimal vector-space plumbing shared by the solver and the power iteration.

use num_complex::Complex64;

pub(crate) trait Vector: Clone {
    fn zeros(len: usize) -> Self;
    /// Real inner product, i.e. `Re <self, other>` for complex vectors.
    fn dot(&self, other: &Self) -> f64;
    fn axpy(&mut self, a: f64, x: &Self);
    fn scale(&mut self, a: f64);
    fn all_finite(&self) -> bool;

    fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn dist(&self, other: &Self) -> f64 {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d.norm()
    }
}

impl Vector for Vec<f64> {
    fn zeros(len: usize) -> Self {
        vec![0.0; len]
    }

    fn dot(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, x) in self.iter_mut().zip(x) {
            *s += a * x;
        }
    }

    fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|s| *s *= a);
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl Vector for Vec<Complex64> {
    fn zeros(len: usize) -> Self {
        vec![Complex64::new(0.0, 0.0); len]
    }

    fn dot(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, x) in self.iter_mut().zip(x) {
            *s += x * a;
        }
    }

    fn scale(&mut self, a: f64) {
        self.iter_mut().for_each(|s| *s *= a);
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration with a Rayleigh-quotient stopping rule.
pub(crate) fn power_iteration<V: Vector>(
    mut x: V,
    mut apply: impl FnMut(&V) -> V,
    rel_tol: f64,
    max_iterations: usize,
) -> f64 {
    let n = x.norm();
    if n == 0.0 {
        return 0.0;
    }
    x.scale(1.0 / n);
    let mut estimate = 0.0;
    for i in 0..max_iterations {
        let y = apply(&x);
        let rayleigh = x.dot(&y);
        let ny = y.norm();
        if ny == 0.0 {
            return 0.0;
        }
        if i > 0 && (rayleigh - estimate).abs() <= rel_tol * rayleigh.abs() {
            return rayleigh;
        }
        estimate = rayleigh;
        x = y;
        x.scale(1.0 / ny);
    }
    estimate
}
