use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simulator::Feedback;

use super::{Player, UcbTable};

/// Single-player UCB over the player's own arms, ignoring everyone else.
#[derive(Debug, Clone)]
pub struct AgnosticUcbPlayer<F> {
    player: usize,
    table: UcbTable<F>,
    last_arm: Option<usize>,
}

impl<F: Scalar> AgnosticUcbPlayer<F> {
    pub fn new(player: usize, own_arms: usize) -> Result<Self> {
        if own_arms == 0 {
            return Err(Error::InvalidInput(
                "a player needs at least one arm".into(),
            ));
        }
        Ok(Self {
            player,
            table: UcbTable::new(own_arms),
            last_arm: None,
        })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn table(&self) -> &UcbTable<F> {
        &self.table
    }

    /// Round-robin over own arms for the first `K_i` rounds, then the
    /// largest index with ties going to the smallest arm.
    pub fn agnostic_select(&mut self) -> Result<usize> {
        let done = self.table.t() as usize;
        let arm = if done < self.table.arms() {
            done
        } else {
            self.table.argmax()?
        };
        self.last_arm = Some(arm);
        Ok(arm + 1)
    }
}

impl<F: Scalar> Player<F> for AgnosticUcbPlayer<F> {
    fn select(&mut self, _t: u64) -> Result<usize> {
        self.agnostic_select()
    }

    fn observe(&mut self, feedback: &Feedback<F>) -> Result<()> {
        let arm = self
            .last_arm
            .take()
            .ok_or_else(|| Error::InvalidState("feedback without a prior selection".into()))?;
        self.table.record(arm, feedback.own_reward);
        Ok(())
    }

    fn name(&self) -> &'static str {
        "agnostic_ucb"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fb(x: f64) -> Feedback<f64> {
        Feedback {
            own_reward: x,
            joint_action: None,
            common: true,
        }
    }

    #[test]
    fn initial_round_robin() {
        let mut p = AgnosticUcbPlayer::<f64>::new(0, 3).unwrap();
        for t in 1..=3 {
            assert_eq!(p.select(t).unwrap(), t as usize);
            p.observe(&fb(0.0)).unwrap();
        }
    }

    #[test]
    fn dominant_mean_selected() {
        let mut p = AgnosticUcbPlayer::<f64>::new(0, 2).unwrap();
        for t in 0..100 {
            let arm = (t % 2) as usize;
            p.last_arm = Some(arm);
            p.observe(&fb(if arm == 0 { 0.9 } else { 0.1 })).unwrap();
        }
        assert_eq!(p.agnostic_select().unwrap(), 1);
    }

    #[test]
    fn fewer_pulls_win_on_equal_means() {
        let mut p = AgnosticUcbPlayer::<f64> {
            player: 0,
            table: UcbTable::from_parts(vec![10, 20], vec![0.5, 0.5], 30),
            last_arm: None,
        };
        assert_eq!(p.agnostic_select().unwrap(), 1);
    }

    #[test]
    fn equal_indices_pick_smallest_arm() {
        let mut p = AgnosticUcbPlayer::<f64> {
            player: 0,
            table: UcbTable::from_parts(vec![10, 10], vec![0.5, 0.5], 20),
            last_arm: None,
        };
        assert_eq!(p.agnostic_select().unwrap(), 1);
    }
}
