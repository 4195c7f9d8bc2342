use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::scalar::Real;
use crate::shaping::acquisition::{argmax_ei, propose_next};
use crate::shaping::gp::{gp_fit, KernelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoSettings<T> {
    pub epochs: usize,
    pub n_candidates: usize,
    pub kernel: KernelParams<T>,
}

impl<T: Real> Default for BoSettings<T> {
    fn default() -> Self {
        Self { epochs: 40, n_candidates: 256, kernel: KernelParams::default() }
    }
}

impl<T: Real> BoSettings<T> {
    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }
}

/// Where proposals come from: random draws in the unit cube, or a fixed
/// finite set searched without repetition.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidatePool<T> {
    Random,
    Grid(Vec<Vec<T>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial<T> {
    pub point: Vec<T>,
    pub loss: T,
    pub goals_met: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoRun<T> {
    pub trials: Vec<Trial<T>>,
    /// Index of the goal-meeting trial with least loss, or of the least-loss
    /// trial overall when none met the goals.
    pub best: usize,
}

impl<T: Real> BoRun<T> {
    pub fn best_trial(&self) -> &Trial<T> {
        &self.trials[self.best]
    }

    pub fn goals_met(&self) -> bool {
        self.best_trial().goals_met
    }

    /// Best goal-meeting loss after each epoch (`None` until one met).
    pub fn best_so_far(&self) -> Vec<Option<T>> {
        let mut best: Option<T> = None;
        self.trials
            .iter()
            .map(|t| {
                if t.goals_met && best.is_none_or(|b| t.loss < b) {
                    best = Some(t.loss);
                }
                best
            })
            .collect()
    }
}

fn pick_best<T: Real>(trials: &[Trial<T>]) -> usize {
    let mut best: Option<usize> = None;
    for (i, t) in trials.iter().enumerate().filter(|(_, t)| t.goals_met) {
        if best.is_none_or(|b| t.loss < trials[b].loss) {
            best = Some(i);
        }
    }
    best.unwrap_or_else(|| {
        let mut b = 0;
        for (i, t) in trials.iter().enumerate() {
            if t.loss < trials[b].loss {
                b = i;
            }
        }
        b
    })
}

/// Minimizes `objective` over the unit cube. The first epoch evaluates
/// `initial` (the first pool entry for grid pools); later epochs refit the
/// surrogate and take the expected-improvement argmax.
pub fn minimize<T, R, S, F>(
    settings: &BoSettings<T>,
    initial: Vec<T>,
    pool: &CandidatePool<T>,
    rng: &mut R,
    mut sample: S,
    mut objective: F,
) -> Result<BoRun<T>>
where
    T: Real,
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Vec<T>,
    F: FnMut(&[T]) -> Result<(T, bool)>,
{
    if settings.epochs == 0 {
        return Err(contract("optimization needs at least one epoch"));
    }
    let mut remaining: Vec<Vec<T>> = match pool {
        CandidatePool::Random => Vec::new(),
        CandidatePool::Grid(points) if points.is_empty() => return Err(contract("empty candidate grid")),
        CandidatePool::Grid(points) => points.clone(),
    };
    let mut next = match pool {
        CandidatePool::Random => initial,
        CandidatePool::Grid(_) => remaining.remove(0),
    };
    let mut trials: Vec<Trial<T>> = Vec::with_capacity(settings.epochs);
    for epoch in 0..settings.epochs {
        let (loss, goals_met) = objective(&next)?;
        if !loss.is_finite() {
            return Err(crate::error::FleetError::NonFinite(format!("loss at epoch {epoch}")));
        }
        trials.push(Trial { point: next, loss, goals_met });
        if epoch + 1 == settings.epochs {
            break;
        }
        let xs: Vec<Vec<T>> = trials.iter().map(|t| t.point.clone()).collect();
        let ys: Vec<T> = trials.iter().map(|t| t.loss).collect();
        let best_loss = ys.iter().copied().fold(T::infinity(), T::min);
        let surrogate = gp_fit(&xs, &ys, settings.kernel)?;
        next = match pool {
            CandidatePool::Random => propose_next(&surrogate, best_loss, rng, settings.n_candidates, &mut sample),
            CandidatePool::Grid(_) => match argmax_ei(&surrogate, best_loss, &remaining) {
                Some(i) => remaining.remove(i),
                None => break,
            },
        };
    }
    let best = pick_best(&trials);
    Ok(BoRun { trials, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(rng: &mut ChaCha8Rng) -> Vec<f64> {
        vec![rng.gen(), rng.gen()]
    }

    #[test]
    fn finds_a_quadratic_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = |x: &[f64]| Ok(((x[0] - 0.3).powi(2) + (x[1] - 0.7).powi(2), true));
        let run = minimize(&BoSettings::default().with_epochs(30), vec![0.9, 0.1], &CandidatePool::Random, &mut rng, unit, f)
            .unwrap();
        assert!(run.best_trial().loss < 0.01, "{:?}", run.best_trial());
        let hist = run.best_so_far();
        assert!(hist.windows(2).all(|w| w[1].unwrap() <= w[0].unwrap()));
    }

    #[test]
    fn grid_pool_is_exhaustive() {
        let grid: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 / 4.0]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = Vec::new();
        let run = minimize(
            &BoSettings::default().with_epochs(10),
            vec![],
            &CandidatePool::Grid(grid),
            &mut rng,
            |_: &mut ChaCha8Rng| unreachable!(),
            |x: &[f64]| {
                seen.push(x[0]);
                Ok(((x[0] - 0.75).abs(), x[0] > 0.1))
            },
        )
        .unwrap();
        seen.sort_by(f64::total_cmp);
        assert_eq!(seen, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(run.best_trial().point, vec![0.75]);
    }

    #[test]
    fn falls_back_to_min_loss_when_nothing_meets_goals() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let run = minimize(&BoSettings::default().with_epochs(6), vec![0.5, 0.5], &CandidatePool::Random, &mut rng, unit, |x: &[f64]| {
            Ok((x[0] + 1.0, false))
        })
        .unwrap();
        assert!(!run.goals_met());
        let min = run.trials.iter().map(|t| t.loss).fold(f64::INFINITY, f64::min);
        assert_eq!(run.best_trial().loss, min);
    }
}
