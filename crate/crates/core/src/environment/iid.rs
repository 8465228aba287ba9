use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arm_space::{ArmSpace, ArmTuple};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reward distribution of one arm tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardDist<F> {
    /// Untruncated normal distribution.
    Gaussian { mean: F, std: F },
    /// Uniform on `[center - half_width, center + half_width]`.
    Uniform { center: F, half_width: F },
}

impl<F: Scalar> RewardDist<F> {
    pub fn gaussian(mean: F, std: F) -> Self {
        RewardDist::Gaussian { mean, std }
    }

    pub fn uniform(center: F, half_width: F) -> Self {
        RewardDist::Uniform { center, half_width }
    }

    pub fn mean(&self) -> F {
        match *self {
            RewardDist::Gaussian { mean, .. } => mean,
            RewardDist::Uniform { center, .. } => center,
        }
    }

    /// Lower and upper end of the support.
    pub fn support(&self) -> (F, F) {
        match *self {
            RewardDist::Gaussian { .. } => (F::neg_infinity(), F::infinity()),
            RewardDist::Uniform { center, half_width } => {
                (center - half_width, center + half_width)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (loc, scale, what) = match *self {
            RewardDist::Gaussian { mean, std } => (mean, std, "std"),
            RewardDist::Uniform { center, half_width } => (center, half_width, "half_width"),
        };
        if !loc.is_finite() || !scale.is_finite() {
            return Err(Error::InvalidInput(
                "distribution parameters must be finite".into(),
            ));
        }
        if scale < F::zero() {
            return Err(Error::InvalidInput(format!("{what} must be non-negative")));
        }
        Ok(())
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> F {
        match *self {
            RewardDist::Gaussian { mean, std } => mean + std * F::standard_normal(rng),
            RewardDist::Uniform { center, half_width } => {
                let two = F::one() + F::one();
                center + half_width * (two * F::unit(rng) - F::one())
            }
        }
    }
}

/// Stationary rewards: every pull of tuple `a` is an independent draw from
/// its distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct IidEnv<F> {
    space: ArmSpace,
    dists: Vec<RewardDist<F>>,
    means: Vec<F>,
    mu_star: F,
    gaps: Vec<F>,
}

impl<F: Scalar> IidEnv<F> {
    /// Builds an environment from one distribution per tuple, listed in any
    /// order.
    pub fn new(space: ArmSpace, entries: Vec<(ArmTuple, RewardDist<F>)>) -> Result<Self> {
        let mut slots: Vec<Option<RewardDist<F>>> = vec![None; space.k_max()];
        for (tuple, dist) in entries {
            let r = space.rank_of(tuple.components())?;
            if slots[r].is_some() {
                return Err(Error::InvalidInput(format!(
                    "tuple {tuple} has more than one distribution"
                )));
            }
            slots[r] = Some(dist);
        }
        let dists = slots
            .into_iter()
            .enumerate()
            .map(|(r, d)| {
                d.ok_or_else(|| {
                    Error::InvalidInput(format!("tuple {} has no distribution", space.tuple_at(r)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_ranked(space, dists)
    }

    /// Builds an environment from distributions listed in lexicographic
    /// tuple order.
    pub fn from_ranked(space: ArmSpace, dists: Vec<RewardDist<F>>) -> Result<Self> {
        if dists.len() != space.k_max() {
            return Err(Error::InvalidInput(format!(
                "expected {} distributions, got {}",
                space.k_max(),
                dists.len()
            )));
        }
        for d in &dists {
            d.validate()?;
        }
        let means: Vec<F> = dists.iter().map(RewardDist::mean).collect();
        let (mu_star, gaps) = gaps_from_means(&means);
        Ok(Self {
            space,
            dists,
            means,
            mu_star,
            gaps,
        })
    }

    /// Gaussian arms with means drawn uniformly from `mean_range` and
    /// standard deviations drawn uniformly from the half-open interval
    /// `(std_range.0, std_range.1]`.
    pub fn random_gaussian<R: Rng + ?Sized>(
        space: ArmSpace,
        mean_range: (F, F),
        std_range: (F, F),
        rng: &mut R,
    ) -> Result<Self> {
        if !(mean_range.0 <= mean_range.1) || !(std_range.0 <= std_range.1) {
            return Err(Error::InvalidInput(
                "ranges must satisfy low <= high".into(),
            ));
        }
        if std_range.0 < F::zero() {
            return Err(Error::InvalidInput("std_range must be non-negative".into()));
        }
        let dists = (0..space.k_max())
            .map(|_| {
                let mean = mean_range.0 + (mean_range.1 - mean_range.0) * F::unit(rng);
                let std = std_range.1 - (std_range.1 - std_range.0) * F::unit(rng);
                RewardDist::gaussian(mean, std)
            })
            .collect();
        Self::from_ranked(space, dists)
    }

    pub fn space(&self) -> &ArmSpace {
        &self.space
    }

    pub fn dists(&self) -> &[RewardDist<F>] {
        &self.dists
    }

    pub fn means(&self) -> &[F] {
        &self.means
    }

    pub fn mu_star(&self) -> F {
        self.mu_star
    }

    pub fn gaps(&self) -> &[F] {
        &self.gaps
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rank: usize, rng: &mut R) -> F {
        self.dists[rank].sample(rng)
    }
}

pub(crate) fn gaps_from_means<F: Scalar>(means: &[F]) -> (F, Vec<F>) {
    let mu_star = means.iter().copied().fold(F::neg_infinity(), F::max);
    (mu_star, means.iter().map(|&m| mu_star - m).collect())
}
