//! Two-player, two-arm environment on which mUCB with observed actions and
//! independent rewards locks onto a suboptimal tuple with positive
//! probability.

use rand::Rng;

use crate::arm_space::ArmSpace;
use crate::error::Result;
use crate::rng;
use crate::scalar::Scalar;

use super::iid::{IidEnv, RewardDist};

/// Means in lexicographic order: (1,1), (1,2), (2,1), (2,2).
pub const COUNTEREXAMPLE_MEANS: [f64; 4] = [0.90, 0.88, 0.88, 0.30];

/// Half width of every uniform reward distribution.
pub const COUNTEREXAMPLE_HALF_WIDTH: f64 = 0.05;

/// Ranks of the tuples the bad event singles out.
pub const RANK_1_2: usize = 1;
pub const RANK_2_1: usize = 2;
pub const RANK_2_2: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleEnv<F> {
    inner: IidEnv<F>,
}

/// Builds the fixed counterexample environment.
pub fn build_counterexample<F: Scalar>() -> CounterexampleEnv<F> {
    let space = ArmSpace::new(vec![2, 2]).expect("2x2 space");
    let hw = F::from_f64_lossy(COUNTEREXAMPLE_HALF_WIDTH);
    let dists = COUNTEREXAMPLE_MEANS
        .iter()
        .map(|&m| RewardDist::uniform(F::from_f64_lossy(m), hw))
        .collect();
    CounterexampleEnv {
        inner: IidEnv::from_ranked(space, dists).expect("valid counterexample"),
    }
}

impl<F: Scalar> CounterexampleEnv<F> {
    pub fn as_iid(&self) -> &IidEnv<F> {
        &self.inner
    }

    pub fn into_iid(self) -> IidEnv<F> {
        self.inner
    }

    /// One trial of the bad event: each player draws one private sample
    /// of every tuple; player 1's best sample is (2,1) and player 2's best
    /// sample is (1,2).
    pub fn bad_event_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        let first: [F; 4] = std::array::from_fn(|r| self.inner.draw(r, rng));
        let second: [F; 4] = std::array::from_fn(|r| self.inner.draw(r, rng));
        strict_argmax(&first) == Some(RANK_2_1) && strict_argmax(&second) == Some(RANK_1_2)
    }

    /// Monte-Carlo estimate of the bad-event probability.
    pub fn estimate_bad_event(&self, trials: u64, seed: u64) -> Result<MonteCarloEstimate> {
        if trials == 0 {
            return Err(crate::Error::InvalidInput("trials must be >= 1".into()));
        }
        let mut stream = rng::substream(seed, &[rng::kind::ORACLE]);
        let hits = (0..trials)
            .filter(|_| self.bad_event_trial(&mut stream))
            .count() as u64;
        Ok(MonteCarloEstimate::from_counts(hits, trials))
    }
}

fn strict_argmax<F: Scalar>(xs: &[F]) -> Option<usize> {
    let (best, &value) = xs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
    let unique = xs.iter().enumerate().all(|(i, &x)| i == best || x < value);
    unique.then_some(best)
}

/// Bernoulli proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub std_error: f64,
}

impl MonteCarloEstimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            hits,
            trials,
            p_hat: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    /// `(p_hat - k*se, p_hat + k*se)`.
    pub fn interval(&self, k: f64) -> (f64, f64) {
        (
            self.p_hat - k * self.std_error,
            self.p_hat + k * self.std_error,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_tuple_gap_is_point_six() {
        let env = build_counterexample::<f64>();
        let gaps = env.as_iid().gaps();
        assert!((gaps[RANK_2_2] - 0.6).abs() < 1e-12);
        assert_eq!(gaps[0], 0.0);
    }

    #[test]
    fn competing_supports_overlap() {
        let env = build_counterexample::<f64>();
        let d = env.as_iid().dists();
        let (lo11, hi11) = d[0].support();
        for r in [RANK_1_2, RANK_2_1] {
            let (lo, hi) = d[r].support();
            assert!(hi.min(hi11) - lo.max(lo11) > 0.0);
        }
    }

    #[test]
    fn strict_argmax_needs_unique_max() {
        assert_eq!(strict_argmax(&[0.1, 0.5, 0.2]), Some(1));
        assert_eq!(strict_argmax(&[0.5, 0.5, 0.2]), None);
    }

    #[test]
    fn bad_event_has_positive_probability() {
        let env = build_counterexample::<f64>();
        let est = env.estimate_bad_event(200_000, 11).unwrap();
        assert!(est.interval(3.0).0 > 0.0, "{est:?}");
    }
}
