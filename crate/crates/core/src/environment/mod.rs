//! Reward models: IID, rested Markovian, and the fixed counterexample.

mod counterexample;
mod iid;
mod markov;

pub use counterexample::{
    build_counterexample, CounterexampleEnv, MonteCarloEstimate, COUNTEREXAMPLE_HALF_WIDTH,
    COUNTEREXAMPLE_MEANS, RANK_1_2, RANK_2_1, RANK_2_2,
};
pub use iid::{IidEnv, RewardDist};
pub use markov::{stationary_distribution, ChainSpec, MarkovEnv, RestedChain};

use rand::Rng;

use crate::arm_space::{ArmSpace, ArmTuple};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Any reward model the simulator can drive.
#[derive(Debug, Clone, PartialEq)]
pub enum Environment<F> {
    Iid(IidEnv<F>),
    Markov(MarkovEnv<F>),
    Counterexample(CounterexampleEnv<F>),
}

impl<F: Scalar> Environment<F> {
    pub fn space(&self) -> &ArmSpace {
        match self {
            Environment::Iid(e) => e.space(),
            Environment::Markov(e) => e.space(),
            Environment::Counterexample(e) => e.as_iid().space(),
        }
    }

    /// True (stationary, for Markov chains) mean of every tuple, by rank.
    pub fn means(&self) -> &[F] {
        match self {
            Environment::Iid(e) => e.means(),
            Environment::Markov(e) => e.means(),
            Environment::Counterexample(e) => e.as_iid().means(),
        }
    }

    pub fn mu_star(&self) -> F {
        match self {
            Environment::Iid(e) => e.mu_star(),
            Environment::Markov(e) => e.mu_star(),
            Environment::Counterexample(e) => e.as_iid().mu_star(),
        }
    }

    pub fn gaps(&self) -> &[F] {
        match self {
            Environment::Iid(e) => e.gaps(),
            Environment::Markov(e) => e.gaps(),
            Environment::Counterexample(e) => e.as_iid().gaps(),
        }
    }

    pub fn is_markov(&self) -> bool {
        matches!(self, Environment::Markov(_))
    }

    /// One reward for the tuple at `rank`, shared by all players. Markov
    /// chains advance one step.
    #[inline]
    pub fn draw_common<R: Rng + ?Sized>(&mut self, rank: usize, rng: &mut R) -> F {
        match self {
            Environment::Iid(e) => e.draw(rank, rng),
            Environment::Markov(e) => e.step(rank, rng),
            Environment::Counterexample(e) => e.as_iid().draw(rank, rng),
        }
    }

    /// Independent draws for every player into `out`.
    #[inline]
    pub fn draw_independent<R: Rng + ?Sized>(
        &mut self,
        rank: usize,
        rng: &mut R,
        out: &mut [F],
    ) -> Result<()> {
        let iid = match self {
            Environment::Iid(e) => &*e,
            Environment::Counterexample(e) => e.as_iid(),
            Environment::Markov(_) => {
                return Err(Error::InvalidInput(
                    "independent per-player rewards are not defined for rested Markov chains"
                        .into(),
                ))
            }
        };
        for x in out.iter_mut() {
            *x = iid.draw(rank, rng);
        }
        Ok(())
    }

    /// Common-reward routing: one draw delivered to every player.
    pub fn sample_common<R: Rng + ?Sized>(&mut self, a: &ArmTuple, rng: &mut R) -> Result<F> {
        let rank = self.space().rank_of(a.components())?;
        Ok(self.draw_common(rank, rng))
    }

    /// Independent routing: one private draw per player.
    pub fn sample_independent<R: Rng + ?Sized>(
        &mut self,
        a: &ArmTuple,
        rng: &mut R,
    ) -> Result<Vec<F>> {
        let rank = self.space().rank_of(a.components())?;
        let mut out = vec![F::zero(); self.space().players()];
        self.draw_independent(rank, rng, &mut out)?;
        Ok(out)
    }

    /// Current chain state of tuple `a`, for Markov environments.
    pub fn current_state(&self, a: &ArmTuple) -> Option<usize> {
        match self {
            Environment::Markov(e) => e
                .space()
                .rank_of(a.components())
                .ok()
                .map(|r| e.current_state(r)),
            _ => None,
        }
    }
}

impl<F> From<IidEnv<F>> for Environment<F> {
    fn from(e: IidEnv<F>) -> Self {
        Environment::Iid(e)
    }
}

impl<F> From<MarkovEnv<F>> for Environment<F> {
    fn from(e: MarkovEnv<F>) -> Self {
        Environment::Markov(e)
    }
}

impl<F> From<CounterexampleEnv<F>> for Environment<F> {
    fn from(e: CounterexampleEnv<F>) -> Self {
        Environment::Counterexample(e)
    }
}
