//! Gaussian-process surrogate with a squared-exponential kernel and a
//! constant mean equal to the average observed loss.

use serde::{Deserialize, Serialize};

use crate::error::{FleetError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KernelParams<T> {
    /// Shared length scale; inputs live in the unit cube.
    pub length_scale: T,
    pub signal_variance: T,
    pub jitter: T,
}

impl<T: Real> Default for KernelParams<T> {
    fn default() -> Self {
        Self { length_scale: T::lit(0.2), signal_variance: T::one(), jitter: T::lit(1e-6) }
    }
}

impl<T: Real> KernelParams<T> {
    pub fn kernel(&self, a: &[T], b: &[T]) -> T {
        let d2: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
        self.signal_variance * (-d2 / (T::lit(2.0) * self.length_scale * self.length_scale)).exp()
    }
}

#[derive(Debug, Clone)]
pub struct Surrogate<T> {
    params: KernelParams<T>,
    xs: Vec<Vec<T>>,
    mean: T,
    /// Lower Cholesky factor of `K + jitter I`, row-major.
    chol: Vec<T>,
    alpha: Vec<T>,
    jitter_used: T,
}

/// In-place lower Cholesky factorization of a row-major `n x n` matrix.
fn cholesky<T: Real>(a: &mut [T], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
        for k in j + 1..n {
            a[j * n + k] = T::zero();
        }
    }
    true
}

fn solve_lower<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

fn solve_upper_t<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Fits the surrogate. If the factorization fails the jitter is raised by
/// decades, at most six times.
pub fn gp_fit<T: Real>(xs: &[Vec<T>], ys: &[T], params: KernelParams<T>) -> Result<Surrogate<T>> {
    if xs.is_empty() {
        return Err(FleetError::NoObservations);
    }
    if xs.len() != ys.len() {
        return Err(crate::error::contract(format!("{} inputs but {} losses", xs.len(), ys.len())));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(crate::error::contract("observation vectors differ in dimension"));
    }
    if let Some(y) = ys.iter().find(|y| !y.is_finite()) {
        return Err(FleetError::NonFinite(format!("observed loss {y}")));
    }
    if !(params.jitter > T::zero()) {
        return Err(crate::error::contract("jitter must be positive"));
    }
    let n = xs.len();
    let mean = ys.iter().copied().sum::<T>() / T::lit(n as f64);
    let centered: Vec<T> = ys.iter().map(|&y| y - mean).collect();
    let mut jitter = params.jitter;
    for _ in 0..7 {
        let mut k = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = params.kernel(&xs[i], &xs[j]);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
            k[i * n + i] += jitter;
        }
        if cholesky(&mut k, n) {
            let alpha = solve_upper_t(&k, n, &solve_lower(&k, n, &centered));
            return Ok(Surrogate { params, xs: xs.to_vec(), mean, chol: k, alpha, jitter_used: jitter });
        }
        jitter *= T::lit(10.0);
    }
    Err(FleetError::NotPositiveDefinite)
}

impl<T: Real> Surrogate<T> {
    pub fn n_observations(&self) -> usize {
        self.xs.len()
    }

    pub fn jitter(&self) -> T {
        self.jitter_used
    }

    /// Posterior mean and variance at `x`; the variance is clamped at 0.
    pub fn posterior_mean_var(&self, x: &[T]) -> (T, T) {
        let n = self.xs.len();
        let kstar: Vec<T> = self.xs.iter().map(|xi| self.params.kernel(xi, x)).collect();
        let mean = self.mean + kstar.iter().zip(&self.alpha).map(|(&k, &a)| k * a).sum::<T>();
        let v = solve_lower(&self.chol, n, &kstar);
        let var = self.params.signal_variance - v.iter().map(|&t| t * t).sum::<T>();
        (mean, var.max(T::zero()))
    }
}
