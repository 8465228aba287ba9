//! Joint action sets, their lexicographic order and the exploration
//! schedules every player can reproduce without communication.
//!
//! Arm indices are 1-based everywhere they leave this module. Internally a
//! tuple is also addressed by its *rank*: its 0-based position in the
//! lexicographic enumeration, with the last player's arm varying fastest.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The product action set `K_1 x ... x K_M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArmSpace {
    arm_counts: Vec<usize>,
    /// `strides[i] = K_{i+1} * ... * K_M`, the run length of player `i`'s
    /// arm in the lexicographic enumeration.
    strides: Vec<usize>,
    k_max: usize,
}

impl ArmSpace {
    pub fn new(arm_counts: Vec<usize>) -> Result<Self> {
        if arm_counts.is_empty() {
            return Err(Error::InvalidInput(
                "an arm space needs at least one player".into(),
            ));
        }
        if let Some(i) = arm_counts.iter().position(|&k| k == 0) {
            return Err(Error::InvalidInput(format!(
                "player {} has no arms; every player needs at least one",
                i + 1
            )));
        }
        let mut strides = vec![1usize; arm_counts.len()];
        let mut acc = 1usize;
        for i in (0..arm_counts.len()).rev() {
            strides[i] = acc;
            acc = acc.checked_mul(arm_counts[i]).ok_or_else(|| {
                Error::InvalidInput("joint action set is too large to enumerate".into())
            })?;
        }
        Ok(Self {
            arm_counts,
            strides,
            k_max: acc,
        })
    }

    pub fn arm_counts(&self) -> &[usize] {
        &self.arm_counts
    }

    /// Number of players `M`.
    pub fn players(&self) -> usize {
        self.arm_counts.len()
    }

    /// Size of the joint action set, `K_1 * ... * K_M`.
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Number of consecutive rounds player `i` (0-based) holds one arm during
    /// the initial sweep: `K_{i+1} * ... * K_M`.
    pub fn hold_length(&self, player: usize) -> usize {
        self.strides[player]
    }

    /// Number of times player `i` (0-based) repeats its sweep:
    /// `K_1 * ... * K_{i-1}`.
    pub fn sweep_repeats(&self, player: usize) -> usize {
        self.arm_counts[..player].iter().product()
    }

    pub fn contains(&self, tuple: &ArmTuple) -> bool {
        self.rank_of(tuple.components()).is_ok()
    }

    /// Lexicographic rank of a tuple given by 1-based components.
    pub fn rank_of(&self, components: &[usize]) -> Result<usize> {
        if components.len() != self.arm_counts.len() {
            return Err(Error::InvalidInput(format!(
                "tuple has {} components but the space has {} players",
                components.len(),
                self.arm_counts.len()
            )));
        }
        let mut rank = 0;
        for (i, (&c, &k)) in components.iter().zip(&self.arm_counts).enumerate() {
            if c == 0 || c > k {
                return Err(Error::InvalidInput(format!(
                    "arm {c} of player {} is outside 1..={k}",
                    i + 1
                )));
            }
            rank += (c - 1) * self.strides[i];
        }
        Ok(rank)
    }

    /// Tuple at lexicographic `rank`.
    ///
    /// Panics if `rank >= k_max`.
    pub fn tuple_at(&self, rank: usize) -> ArmTuple {
        assert!(rank < self.k_max, "rank {rank} out of range");
        ArmTuple(
            (0..self.players())
                .map(|i| self.component_at(rank, i))
                .collect(),
        )
    }

    /// 1-based arm of player `i` (0-based) in the tuple at `rank`.
    #[inline]
    pub fn component_at(&self, rank: usize, player: usize) -> usize {
        (rank / self.strides[player]) % self.arm_counts[player] + 1
    }

    /// All tuples in lexicographic order.
    pub fn tuples(&self) -> impl ExactSizeIterator<Item = ArmTuple> + '_ {
        (0..self.k_max).map(move |r| self.tuple_at(r))
    }
}

/// One joint action `(a_1, ..., a_M)` with 1-based components.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmTuple(Vec<usize>);

impl ArmTuple {
    pub fn new(components: Vec<usize>) -> Self {
        Self(components)
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// 1-based arm of player `i` (0-based).
    pub fn component(&self, player: usize) -> usize {
        self.0[player]
    }
}

impl From<Vec<usize>> for ArmTuple {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for ArmTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Strict lexicographic order: the first differing component decides.
pub fn lex_compare(x: &ArmTuple, y: &ArmTuple) -> Result<Ordering> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "cannot compare a {}-tuple with a {}-tuple",
            x.len(),
            y.len()
        )));
    }
    Ok(x.0
        .iter()
        .zip(&y.0)
        .map(|(a, b)| a.cmp(b))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal))
}

/// Per-phase exploration budget `K(lambda)` of mDSEE.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KSchedule {
    /// `K(lambda) = lambda`.
    Identity,
    /// `K(lambda) = ceil(log2(lambda + 1))`.
    CeilLog2,
    /// `K(lambda) = values[lambda - 1]`; past the end of the table the
    /// budget keeps growing by one per phase from the last entry.
    Custom(Vec<u64>),
}

impl KSchedule {
    pub fn validate(&self) -> Result<()> {
        if let KSchedule::Custom(values) = self {
            if values.is_empty() {
                return Err(Error::InvalidInput(
                    "custom k_schedule needs at least one value".into(),
                ));
            }
            if values[0] == 0 {
                return Err(Error::InvalidInput(
                    "custom k_schedule values must be >= 1".into(),
                ));
            }
            if values.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidInput(
                    "custom k_schedule must be non-decreasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// Budget for phase `lambda >= 1`.
    pub fn k(&self, lambda: u64) -> u64 {
        debug_assert!(lambda >= 1);
        match self {
            KSchedule::Identity => lambda,
            // bit length of lambda == ceil(log2(lambda + 1))
            KSchedule::CeilLog2 => u64::from(u64::BITS - lambda.leading_zeros()),
            KSchedule::Custom(values) => {
                let len = values.len() as u64;
                if lambda <= len {
                    values[(lambda - 1) as usize]
                } else {
                    values[values.len() - 1] + (lambda - len)
                }
            }
        }
    }
}

/// The `k_max`-round sweep of the mUCB warm-up, in lexicographic order.
///
/// Player `i` holds each arm for `K_{i+1} * ... * K_M` rounds and repeats
/// its sweep `K_1 * ... * K_{i-1}` times; the joint sequence this produces is
/// the lexicographic enumeration.
pub fn initial_schedule(space: &ArmSpace) -> Schedule<'_> {
    Schedule {
        space,
        repeat: 1,
        pos: 0,
        len: space.k_max() as u64,
    }
}

/// Exploration block of mDSEE phase `lambda`: the initial sweep with every
/// tuple held for `K(lambda)` consecutive rounds.
pub fn dsee_schedule<'a>(
    space: &'a ArmSpace,
    k_schedule: &KSchedule,
    lambda: u64,
) -> Result<Schedule<'a>> {
    if lambda < 1 {
        return Err(Error::InvalidInput("phase index must be >= 1".into()));
    }
    let repeat = k_schedule.k(lambda);
    Ok(Schedule {
        space,
        repeat,
        pos: 0,
        len: repeat * space.k_max() as u64,
    })
}

/// Lazily generated joint action sequence.
#[derive(Debug, Clone)]
pub struct Schedule<'a> {
    space: &'a ArmSpace,
    repeat: u64,
    pos: u64,
    len: u64,
}

impl Schedule<'_> {
    /// Rank of the tuple at absolute position `pos` of this schedule.
    #[inline]
    pub fn rank_at(&self, pos: u64) -> usize {
        (pos / self.repeat) as usize
    }

    pub fn total_len(&self) -> u64 {
        self.len
    }
}

impl Iterator for Schedule<'_> {
    type Item = ArmTuple;

    fn next(&mut self) -> Option<ArmTuple> {
        if self.pos >= self.len {
            return None;
        }
        let t = self.space.tuple_at(self.rank_at(self.pos));
        self.pos += 1;
        Some(t)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.len - self.pos) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Schedule<'_> {}
