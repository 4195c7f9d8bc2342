use rand::Rng;
use statrs::function::erf::erfc;

use crate::scalar::Real;
use crate::shaping::gp::Surrogate;

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Expected improvement below `best` of a Gaussian with mean `mu` and
/// standard deviation `sigma`.
pub fn ei_gaussian(mu: f64, sigma: f64, best: f64) -> f64 {
    if !(sigma > 0.0) {
        return 0.0;
    }
    let z = (best - mu) / sigma;
    ((best - mu) * std_normal_cdf(z) + sigma * std_normal_pdf(z)).max(0.0)
}

pub fn expected_improvement<T: Real>(surrogate: &Surrogate<T>, x: &[T], best_loss: T) -> T {
    let (mu, var) = surrogate.posterior_mean_var(x);
    T::lit(ei_gaussian(mu.as_f64(), var.as_f64().sqrt(), best_loss.as_f64()))
}

/// Draws `n_candidates` points with `sample` and returns the one with the
/// largest expected improvement (first drawn wins ties).
pub fn propose_next<T: Real, R: Rng + ?Sized>(
    surrogate: &Surrogate<T>,
    best_loss: T,
    rng: &mut R,
    n_candidates: usize,
    mut sample: impl FnMut(&mut R) -> Vec<T>,
) -> Vec<T> {
    assert!(n_candidates >= 1, "need at least one candidate");
    let mut best = sample(rng);
    let mut best_ei = expected_improvement(surrogate, &best, best_loss);
    for _ in 1..n_candidates {
        let x = sample(rng);
        let ei = expected_improvement(surrogate, &x, best_loss);
        if ei > best_ei {
            best = x;
            best_ei = ei;
        }
    }
    best
}

/// EI argmax over a finite pool, first index on ties.
pub fn argmax_ei<T: Real>(surrogate: &Surrogate<T>, best_loss: T, pool: &[Vec<T>]) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, x) in pool.iter().enumerate() {
        let ei = expected_improvement(surrogate, x, best_loss);
        if best.is_none_or(|(_, b)| ei > b) {
            best = Some((i, ei));
        }
    }
    best.map(|(i, _)| i)
}
