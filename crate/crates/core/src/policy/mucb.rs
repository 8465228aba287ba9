use std::cmp::Ordering;

use crate::arm_space::{ArmSpace, ArmTuple};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulator::Feedback;

use super::{Index, Player, UcbTable};

/// Multi-player UCB over joint tuples.
///
/// After the shared warm-up sweep, each player computes the joint tuple with
/// the largest index, breaking ties towards the lexicographically smallest
/// tuple, and plays its own component of it. With common rewards every
/// player holds the same table, so all of them pick the same tuple without
/// seeing each other's actions.
#[derive(Debug, Clone)]
pub struct MucbPlayer<F> {
    player: usize,
    space: ArmSpace,
    table: UcbTable<F>,
    anticipated: Option<usize>,
    awaiting_feedback: bool,
}

impl<F: Scalar> MucbPlayer<F> {
    pub fn new(player: usize, space: ArmSpace) -> Result<Self> {
        if player >= space.players() {
            return Err(Error::InvalidInput(format!(
                "player index {player} out of range for {} players",
                space.players()
            )));
        }
        Ok(Self {
            player,
            table: UcbTable::new(space.k_max()),
            space,
            anticipated: None,
            awaiting_feedback: false,
        })
    }

    pub fn table(&self) -> &UcbTable<F> {
        &self.table
    }

    pub fn space(&self) -> &ArmSpace {
        &self.space
    }

    pub fn anticipated_tuple(&self) -> Option<ArmTuple> {
        self.anticipated.map(|r| self.space.tuple_at(r))
    }

    pub fn ucb_index(&self, a: &ArmTuple) -> Result<Index<F>> {
        let rank = self.space.rank_of(a.components())?;
        self.table.index(rank)
    }

    pub fn in_warm_up(&self) -> bool {
        (self.table.t() as usize) < self.space.k_max()
    }

    /// Picks the index-maximizing joint tuple and returns this player's
    /// component of it.
    pub fn mucb_select(&mut self) -> Result<usize> {
        if self.in_warm_up() {
            return Err(Error::InvalidState(
                "mUCB selection requested before the warm-up sweep finished".into(),
            ));
        }
        let indices = self.table.indices()?;
        let rank = joint_argmax(&indices, 0..indices.len());
        self.anticipated = Some(rank);
        self.awaiting_feedback = true;
        Ok(self.space.component_at(rank, self.player))
    }

    /// Folds `reward` into `tuple` (or into the anticipated tuple when
    /// none is given) and advances the round counter.
    pub fn mucb_update(&mut self, reward: F, tuple: Option<&ArmTuple>) -> Result<()> {
        if !self.awaiting_feedback {
            return Err(Error::InvalidState(
                "update without a prior selection".into(),
            ));
        }
        let rank = match tuple {
            Some(a) => self.space.rank_of(a.components())?,
            None => self.anticipated.expect("selection recorded"),
        };
        self.table.record(rank, reward);
        self.awaiting_feedback = false;
        Ok(())
    }
}

/// Rank of the largest index; ties go to the lexicographically smallest
/// tuple. The result does not depend on the order `ranks` is visited in.
pub fn joint_argmax<F: Scalar>(
    indices: &[Index<F>],
    ranks: impl IntoIterator<Item = usize>,
) -> usize {
    let mut best: Option<usize> = None;
    for r in ranks {
        best = match best {
            None => Some(r),
            Some(b) => match indices[r].total_cmp(&indices[b]) {
                Ordering::Greater => Some(r),
                Ordering::Equal if r < b => Some(r),
                _ => Some(b),
            },
        };
    }
    best.expect("non-empty index table")
}

impl<F: Scalar> Player<F> for MucbPlayer<F> {
    fn select(&mut self, _t: u64) -> Result<usize> {
        if self.in_warm_up() {
            // the warm-up sweep visits tuples in rank order
            let rank = self.table.t() as usize;
            self.anticipated = Some(rank);
            self.awaiting_feedback = true;
            Ok(self.space.component_at(rank, self.player))
        } else {
            self.mucb_select()
        }
    }

    fn observe(&mut self, feedback: &Feedback<F>) -> Result<()> {
        self.mucb_update(feedback.own_reward, feedback.joint_action.as_ref())
    }

    fn anticipated_joint(&self) -> Option<usize> {
        self.anticipated
    }

    fn name(&self) -> &'static str {
        "mucb"
    }
}
