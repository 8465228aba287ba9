use rand::Rng;

use crate::arm_space::{ArmSpace, KSchedule};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::scalar::Scalar;
use crate::simulator::Feedback;

use super::Player;

/// Where an mDSEE player is within its explore/commit cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DseeMode {
    /// Walking the phase block that began at round `start`; each tuple is
    /// held for `repeat` rounds.
    Exploring { start: u64, repeat: u64, len: u64 },
    /// Playing its own component of the tuple at this rank.
    Committed(usize),
}

/// Deterministic sequencing of exploration and exploitation.
///
/// Phase 1 starts at round 1. Later phases start at rounds `2^n` with
/// `n >= floor(log2(K(1) * k_max)) + 1`; phase `lambda` holds every tuple
/// for `K(lambda)` rounds. Between phases the player commits to the tuple
/// with the best sample mean of its own exploration rewards. A power of two
/// that falls inside a running block is skipped.
#[derive(Debug, Clone)]
pub struct DseePlayer<F> {
    player: usize,
    space: ArmSpace,
    k_schedule: KSchedule,
    lambda: u64,
    counts: Vec<u64>,
    means: Vec<F>,
    mode: DseeMode,
    min_boundary_exp: u32,
    next_boundary: u64,
    /// Round of the last `select`, and the exploring rank it returned.
    current: Option<(u64, Option<usize>)>,
    rng: StreamRng,
}

impl<F: Scalar> DseePlayer<F> {
    /// `rng` drives the tie-break among equal sample means; it must be
    /// private to this player.
    pub fn new(
        player: usize,
        space: ArmSpace,
        k_schedule: KSchedule,
        rng: StreamRng,
    ) -> Result<Self> {
        if player >= space.players() {
            return Err(Error::InvalidInput(format!(
                "player index {player} out of range for {} players",
                space.players()
            )));
        }
        k_schedule.validate()?;
        let first = k_schedule.k(1) * space.k_max() as u64;
        // floor(log2(first)) + 1
        let min_boundary_exp = u64::BITS - first.leading_zeros();
        let k = space.k_max();
        Ok(Self {
            player,
            k_schedule,
            lambda: 0,
            counts: vec![0; k],
            means: vec![F::zero(); k],
            mode: DseeMode::Committed(0),
            min_boundary_exp,
            next_boundary: 1,
            current: None,
            space,
            rng,
        })
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    pub fn mode(&self) -> DseeMode {
        self.mode
    }

    /// Exploration samples collected per tuple, by rank.
    pub fn exploration_counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sample_means(&self) -> &[F] {
        &self.means
    }

    /// First round at which the next phase may begin.
    pub fn next_boundary(&self) -> u64 {
        self.next_boundary
    }

    fn start_phase(&mut self, t: u64) {
        self.lambda += 1;
        let repeat = self.k_schedule.k(self.lambda);
        self.mode = DseeMode::Exploring {
            start: t,
            repeat,
            len: repeat * self.space.k_max() as u64,
        };
    }

    fn finish_phase(&mut self, last_round: u64) {
        let best = self.means.iter().copied().fold(F::neg_infinity(), F::max);
        let maximizers: Vec<usize> = (0..self.means.len())
            .filter(|&r| self.means[r] == best)
            .collect();
        let pick = if maximizers.len() == 1 {
            maximizers[0]
        } else {
            maximizers[self.rng.random_range(0..maximizers.len())]
        };
        self.mode = DseeMode::Committed(pick);
        let mut exp = self.min_boundary_exp;
        while (1u64 << exp) <= last_round {
            exp += 1;
        }
        self.next_boundary = 1u64 << exp;
    }

    /// Own arm for round `t`.
    pub fn dsee_step(&mut self, t: u64) -> Result<usize> {
        if t == 0 {
            return Err(Error::InvalidInput("rounds are numbered from 1".into()));
        }
        if matches!(self.mode, DseeMode::Committed(_)) && t >= self.next_boundary {
            self.start_phase(t);
        }
        let (rank, exploring) = match self.mode {
            DseeMode::Exploring { start, repeat, len } => {
                let pos = t - start;
                debug_assert!(pos < len);
                ((pos / repeat) as usize, true)
            }
            DseeMode::Committed(rank) => (rank, false),
        };
        self.current = Some((t, exploring.then_some(rank)));
        Ok(self.space.component_at(rank, self.player))
    }
}

impl<F: Scalar> Player<F> for DseePlayer<F> {
    fn select(&mut self, t: u64) -> Result<usize> {
        self.dsee_step(t)
    }

    fn observe(&mut self, feedback: &Feedback<F>) -> Result<()> {
        let (t, explored) = self
            .current
            .take()
            .ok_or_else(|| Error::InvalidState("feedback without a prior selection".into()))?;
        if let Some(rank) = explored {
            let n = self.counts[rank] + 1;
            self.counts[rank] = n;
            let m = self.means[rank];
            self.means[rank] = m + (feedback.own_reward - m) / F::from_count(n);
            if let DseeMode::Exploring { start, len, .. } = self.mode {
                if t + 1 == start + len {
                    self.finish_phase(t);
                }
            }
        }
        Ok(())
    }

    fn anticipated_joint(&self) -> Option<usize> {
        match (self.mode, self.current) {
            (_, Some((_, Some(rank)))) => Some(rank),
            (DseeMode::Committed(rank), _) => Some(rank),
            (DseeMode::Exploring { .. }, _) => None,
        }
    }

    fn name(&self) -> &'static str {
        "mdsee"
    }
}
