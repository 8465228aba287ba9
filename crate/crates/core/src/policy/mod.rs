//! Per-player learning rules.
//!
//! Every player is a state machine driven by the simulator: it is asked for
//! its own arm, then handed exactly the [`Feedback`] its information
//! structure allows.

mod agnostic;
mod dsee;
mod mucb;

pub use agnostic::AgnosticUcbPlayer;
pub use dsee::{DseeMode, DseePlayer};
pub use mucb::{joint_argmax, MucbPlayer};

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulator::Feedback;

/// A decentralized player.
pub trait Player<F: Scalar>: Send {
    /// Own arm (1-based) for round `t >= 1`.
    fn select(&mut self, t: u64) -> Result<usize>;

    /// Consumes the feedback of the round just played.
    fn observe(&mut self, feedback: &Feedback<F>) -> Result<()>;

    /// Rank of the joint tuple this player believes is being played.
    fn anticipated_joint(&self) -> Option<usize> {
        None
    }

    fn name(&self) -> &'static str;
}

/// A UCB index value; an unexplored arm ranks above every finite value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Index<F> {
    Finite(F),
    Unexplored,
}

impl<F: Scalar> Index<F> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Index::Unexplored)
    }

    pub fn finite(&self) -> Option<F> {
        match *self {
            Index::Finite(v) => Some(v),
            Index::Unexplored => None,
        }
    }

    /// Total order; index values are never NaN.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Index::Unexplored, Index::Unexplored) => Ordering::Equal,
            (Index::Unexplored, _) => Ordering::Greater,
            (_, Index::Unexplored) => Ordering::Less,
            (Index::Finite(a), Index::Finite(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
        }
    }
}

/// Pull counts and running means over a set of arms, plus the round
/// counter used for the confidence level `delta = 1/t^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbTable<F> {
    counts: Vec<u64>,
    means: Vec<F>,
    t: u64,
}

impl<F: Scalar> UcbTable<F> {
    pub fn new(arms: usize) -> Self {
        Self {
            counts: vec![0; arms],
            means: vec![F::zero(); arms],
            t: 0,
        }
    }

    pub fn arms(&self) -> usize {
        self.counts.len()
    }

    /// Completed rounds; always equals the sum of the counts.
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn mean(&self, arm: usize) -> F {
        self.means[arm]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Folds one reward into `arm` and completes the round.
    pub fn record(&mut self, arm: usize, reward: F) {
        let n = self.counts[arm] + 1;
        self.counts[arm] = n;
        let m = self.means[arm];
        self.means[arm] = m + (reward - m) / F::from_count(n);
        self.t += 1;
    }

    /// `4 ln t`, i.e. `2 ln(1/delta)` with `delta = 1/t^2`.
    pub fn bonus_numerator(&self) -> Result<F> {
        if self.t == 0 {
            return Err(Error::InvalidState(
                "UCB index is undefined before the first round".into(),
            ));
        }
        Ok(F::from_f64_lossy(4.0) * F::from_count(self.t).ln())
    }

    #[inline]
    fn index_with(&self, arm: usize, bonus_numerator: F) -> Index<F> {
        match self.counts[arm] {
            0 => Index::Unexplored,
            n => Index::Finite(self.means[arm] + (bonus_numerator / F::from_count(n)).sqrt()),
        }
    }

    /// `mean + sqrt(2 ln(1/delta) / n)` with `delta = 1/t^2`, or
    /// [`Index::Unexplored`] when the arm has never been pulled.
    pub fn index(&self, arm: usize) -> Result<Index<F>> {
        let b = self.bonus_numerator()?;
        Ok(self.index_with(arm, b))
    }

    /// Index of every arm, in arm order.
    pub fn indices(&self) -> Result<Vec<Index<F>>> {
        let b = self.bonus_numerator()?;
        Ok((0..self.arms()).map(|a| self.index_with(a, b)).collect())
    }

    /// Lowest-numbered arm among those with the largest index.
    pub(crate) fn argmax(&self) -> Result<usize> {
        let b = self.bonus_numerator()?;
        let mut best = 0;
        let mut best_idx = self.index_with(0, b);
        for a in 1..self.arms() {
            let idx = self.index_with(a, b);
            if idx.total_cmp(&best_idx) == Ordering::Greater {
                best = a;
                best_idx = idx;
            }
        }
        Ok(best)
    }

    #[cfg(test)]
    pub(crate) fn from_parts(counts: Vec<u64>, means: Vec<F>, t: u64) -> Self {
        Self { counts, means, t }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unexplored_arm_is_infinite() {
        let mut t = UcbTable::<f64>::new(2);
        t.record(0, 0.5);
        assert_eq!(t.index(1).unwrap(), Index::Unexplored);
    }

    #[test]
    fn index_arithmetic() {
        let t = UcbTable::<f64>::from_parts(vec![8, 92], vec![0.5, 0.1], 100);
        let expected = 0.5 + (4.0 * 100f64.ln() / 8.0).sqrt();
        let got = t.index(0).unwrap().finite().unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 2.017_428).abs() < 1e-6, "{got}");
    }

    #[test]
    fn bonus_vanishes_with_many_pulls() {
        let t = UcbTable::<f64>::from_parts(vec![1_000_000_000_000], vec![0.5], 100);
        let v = t.index(0).unwrap().finite().unwrap();
        assert!((v - 0.5).abs() < 1e-4);
    }

    #[test]
    fn index_undefined_at_time_zero() {
        let t = UcbTable::<f64>::new(3);
        assert!(matches!(t.index(0), Err(Error::InvalidState(_))));
    }

    #[test]
    fn running_mean_recurrence() {
        let mut t = UcbTable::<f64>::new(1);
        t.record(0, 0.7);
        assert_eq!((t.count(0), t.mean(0)), (1, 0.7));

        let mut t = UcbTable::<f64>::from_parts(vec![4], vec![0.5], 4);
        t.record(0, 1.0);
        assert_eq!(t.count(0), 5);
        assert!((t.mean(0) - 0.6).abs() < 1e-15);

        let mut t = UcbTable::<f64>::new(1);
        for _ in 0..1000 {
            t.record(0, 0.3);
        }
        assert!((t.mean(0) - 0.3).abs() < 1e-12);
        assert_eq!(t.t(), 1000);
    }

    #[test]
    fn infinite_sentinel_orders_above_finite() {
        let big = Index::Finite(f64::MAX);
        assert_eq!(Index::<f64>::Unexplored.total_cmp(&big), Ordering::Greater);
        assert_eq!(big.total_cmp(&Index::Unexplored), Ordering::Less);
    }

    #[test]
    fn works_in_single_precision() {
        let t = UcbTable::<f32>::from_parts(vec![8], vec![0.5], 100);
        let v = t.index(0).unwrap().finite().unwrap();
        assert!((v - 2.017_428).abs() < 1e-5);
    }
}
