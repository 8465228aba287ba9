//! Episode loop, information routing and regret accounting.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::mean_and_std;
use crate::arm_space::{ArmSpace, ArmTuple, KSchedule};
use crate::config::ExperimentConfig;
use crate::environment::Environment;
use crate::error::{Error, Result};
use crate::policy::{AgnosticUcbPlayer, DseePlayer, MucbPlayer, Player};
use crate::rng::{self, StreamRng};
use crate::scalar::{CompensatedSum, Scalar};

/// Which information each player receives after a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemVariant {
    /// Actions unobserved, reward common to all players.
    A,
    /// Actions observed, independent rewards per player.
    #[serde(rename = "B_prime")]
    BPrime,
    /// Actions unobserved, independent rewards per player.
    B,
}

impl ProblemVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemVariant::A => "A",
            ProblemVariant::BPrime => "B_prime",
            ProblemVariant::B => "B",
        }
    }
}

impl fmt::Display for ProblemVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardModel {
    #[default]
    Iid,
    Markov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Mucb,
    Mdsee,
    AgnosticUcb,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Mucb => "mucb",
            Algorithm::Mdsee => "mdsee",
            Algorithm::AgnosticUcb => "agnostic_ucb",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Compatibility rules between algorithms, information structures and
/// reward models.
///
/// * Markovian rewards are only modelled with a common reward (variant A).
/// * mUCB needs either a common reward (A) or observed actions (B'); under
///   B it is only run on request, to exhibit its failure.
pub fn check_compatibility(
    algorithm: Algorithm,
    variant: ProblemVariant,
    reward_model: RewardModel,
    allow_negative_result: bool,
) -> Result<()> {
    if reward_model == RewardModel::Markov && variant != ProblemVariant::A {
        return Err(Error::Config(format!(
            "reward_model = markov requires variant = A (got {variant})"
        )));
    }
    if algorithm == Algorithm::Mucb && variant == ProblemVariant::B && !allow_negative_result {
        return Err(Error::Config(
            "algorithm = mucb with variant = B needs unobserved actions resolved by a common \
             reward; set allow_negative_result = true to run it anyway"
                .into(),
        ));
    }
    Ok(())
}

/// What one player is handed after a round.
#[derive(Debug, Clone, PartialEq)]
pub struct Feedback<F> {
    pub own_reward: F,
    /// Realized joint action; present only when actions are observable.
    pub joint_action: Option<ArmTuple>,
    /// Whether every player received this same reward.
    pub common: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<F> {
    pub t: u64,
    pub pseudo_regret: F,
    /// `t * mu_star` minus the rewards player 1 collected.
    pub realized_regret: F,
    /// `|pseudo_regret - sum_a gap_a * pulls_a|`.
    pub decomposition_residual: F,
}

/// Regret and pull-count accounting for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger<F> {
    gaps: Vec<F>,
    mu_star: F,
    pseudo: CompensatedSum<F>,
    reward: CompensatedSum<F>,
    pulls: Vec<u64>,
    t: u64,
    checkpoints: Vec<Checkpoint<F>>,
    coordination_violations: u64,
    final_joint: Option<ArmTuple>,
}

impl<F: Scalar> RegretLedger<F> {
    pub fn new(gaps: Vec<F>, mu_star: F) -> Self {
        let k = gaps.len();
        Self {
            gaps,
            mu_star,
            pseudo: CompensatedSum::new(),
            reward: CompensatedSum::new(),
            pulls: vec![0; k],
            t: 0,
            checkpoints: Vec::new(),
            coordination_violations: 0,
            final_joint: None,
        }
    }

    #[inline]
    pub fn record(&mut self, rank: usize, reward: F) {
        self.pseudo.add(self.gaps[rank]);
        self.reward.add(reward);
        self.pulls[rank] += 1;
        self.t += 1;
    }

    pub fn pseudo_regret(&self) -> F {
        self.pseudo.value()
    }

    pub fn realized_regret(&self) -> F {
        F::from_count(self.t) * self.mu_star - self.reward.value()
    }

    /// `sum_a gap_a * pulls_a`.
    pub fn decomposed_regret(&self) -> F {
        let mut s = CompensatedSum::new();
        for (g, &n) in self.gaps.iter().zip(&self.pulls) {
            s.add(*g * F::from_count(n));
        }
        s.value()
    }

    pub fn checkpoint(&mut self) -> &Checkpoint<F> {
        let pseudo = self.pseudo_regret();
        self.checkpoints.push(Checkpoint {
            t: self.t,
            pseudo_regret: pseudo,
            realized_regret: self.realized_regret(),
            decomposition_residual: (pseudo - self.decomposed_regret()).abs(),
        });
        self.checkpoints.last().unwrap()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn rounds(&self) -> u64 {
        self.t
    }

    pub fn checkpoints(&self) -> &[Checkpoint<F>] {
        &self.checkpoints
    }

    /// Rounds in which some player's anticipated joint tuple differed from
    /// the realized one.
    pub fn coordination_violations(&self) -> u64 {
        self.coordination_violations
    }

    /// Joint tuple played in the last round.
    pub fn final_joint(&self) -> Option<&ArmTuple> {
        self.final_joint.as_ref()
    }

    pub fn max_decomposition_residual(&self) -> F {
        self.checkpoints
            .iter()
            .map(|c| c.decomposition_residual)
            .fold(F::zero(), F::max)
    }
}

/// Dense for the first 100 rounds, then 50 points per decade, plus the
/// horizon itself.
pub fn default_grid(horizon: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = (1..=horizon.min(100)).collect();
    let decades = (horizon as f64).log10();
    let steps = (decades * 50.0 + 1e-9).floor() as u64;
    for k in 0..=steps {
        let t = 10f64.powf(k as f64 / 50.0).round() as u64;
        if t >= 1 && t <= horizon {
            grid.push(t);
        }
    }
    grid.push(horizon);
    grid.sort_unstable();
    grid.dedup();
    grid
}

#[derive(Debug, Clone, Default)]
pub struct EpisodeOptions {
    /// Checkpoint rounds; [`default_grid`] when `None`.
    pub grid: Option<Vec<u64>>,
    pub allow_negative_result: bool,
    /// Record the joint action of every round.
    pub trace: bool,
}

pub struct Episode<F> {
    pub ledger: RegretLedger<F>,
    /// Rank of the joint tuple of every round, when tracing.
    pub trace: Option<Vec<usize>>,
}

/// Runs one episode of `horizon` rounds.
pub fn run_episode<F: Scalar>(
    env: &mut Environment<F>,
    variant: ProblemVariant,
    players: &mut [Box<dyn Player<F>>],
    horizon: u64,
    seed: u64,
) -> Result<RegretLedger<F>> {
    run_episode_with(
        env,
        variant,
        players,
        horizon,
        seed,
        &EpisodeOptions::default(),
    )
    .map(|e| e.ledger)
}

pub fn run_episode_with<F: Scalar>(
    env: &mut Environment<F>,
    variant: ProblemVariant,
    players: &mut [Box<dyn Player<F>>],
    horizon: u64,
    seed: u64,
    options: &EpisodeOptions,
) -> Result<Episode<F>> {
    let space = env.space().clone();
    let m = space.players();
    if players.len() != m {
        return Err(Error::Config(format!(
            "{} players supplied for a {m}-player arm space",
            players.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::Config("horizon must be >= 1".into()));
    }
    let model = if env.is_markov() {
        RewardModel::Markov
    } else {
        RewardModel::Iid
    };
    for p in players.iter() {
        let algorithm = match p.name() {
            "mucb" => Some(Algorithm::Mucb),
            "mdsee" => Some(Algorithm::Mdsee),
            "agnostic_ucb" => Some(Algorithm::AgnosticUcb),
            _ => None,
        };
        match algorithm {
            Some(a) => check_compatibility(a, variant, model, options.allow_negative_result)?,
            None if model == RewardModel::Markov && variant != ProblemVariant::A => {
                return Err(Error::Config("markov rewards require variant A".into()))
            }
            None => {}
        }
    }

    let grid = match &options.grid {
        Some(g) => g.clone(),
        None => default_grid(horizon),
    };
    let mut next_checkpoint = grid.iter().copied().filter(|&t| t <= horizon).peekable();

    let mut streams: Vec<StreamRng> = (0..space.k_max() as u64)
        .map(|r| rng::substream(seed, &[rng::kind::REWARD, r]))
        .collect();
    let mut ledger = RegretLedger::new(env.gaps().to_vec(), env.mu_star());
    let mut trace = options.trace.then(|| Vec::with_capacity(horizon as usize));
    let mut arms = vec![0usize; m];
    let mut rewards = vec![F::zero(); m];
    let tolerance = F::decomposition_tolerance();

    for t in 1..=horizon {
        for (arm, p) in arms.iter_mut().zip(players.iter_mut()) {
            *arm = p.select(t)?;
        }
        let rank = space.rank_of(&arms)?;
        if players
            .iter()
            .any(|p| p.anticipated_joint().is_some_and(|r| r != rank))
        {
            ledger.coordination_violations += 1;
        }

        match variant {
            ProblemVariant::A => {
                let x = env.draw_common(rank, &mut streams[rank]);
                rewards.fill(x);
            }
            ProblemVariant::B | ProblemVariant::BPrime => {
                env.draw_independent(rank, &mut streams[rank], &mut rewards)?;
            }
        }
        let joint = (variant == ProblemVariant::BPrime).then(|| ArmTuple::new(arms.clone()));
        for (p, &x) in players.iter_mut().zip(&rewards) {
            p.observe(&Feedback {
                own_reward: x,
                joint_action: joint.clone(),
                common: variant == ProblemVariant::A,
            })?;
        }

        ledger.record(rank, rewards[0]);
        if let Some(tr) = trace.as_mut() {
            tr.push(rank);
        }
        if next_checkpoint.peek() == Some(&t) {
            next_checkpoint.next();
            let c = ledger.checkpoint();
            if c.decomposition_residual > tolerance {
                return Err(Error::Decomposition {
                    t,
                    pseudo: c.pseudo_regret.to_f64_lossy(),
                    decomposed: ledger.decomposed_regret().to_f64_lossy(),
                });
            }
        }
    }
    ledger.final_joint = Some(ArmTuple::new(arms));
    Ok(Episode { ledger, trace })
}

/// Fresh players for one run. Player-private randomness is derived from
/// the run seed.
pub fn build_players<F: Scalar>(
    algorithm: Algorithm,
    space: &ArmSpace,
    k_schedule: &KSchedule,
    run_seed: u64,
) -> Result<Vec<Box<dyn Player<F>>>> {
    (0..space.players())
        .map(|i| -> Result<Box<dyn Player<F>>> {
            Ok(match algorithm {
                Algorithm::Mucb => Box::new(MucbPlayer::new(i, space.clone())?),
                Algorithm::Mdsee => Box::new(DseePlayer::new(
                    i,
                    space.clone(),
                    k_schedule.clone(),
                    rng::substream(run_seed, &[rng::kind::PLAYER, i as u64]),
                )?),
                Algorithm::AgnosticUcb => {
                    Box::new(AgnosticUcbPlayer::new(i, space.arm_counts()[i])?)
                }
            })
        })
        .collect()
}

/// Per-run ledgers and per-checkpoint aggregates of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentResult<F> {
    pub config: ExperimentConfig,
    pub grid: Vec<u64>,
    pub means: Vec<F>,
    pub gaps: Vec<F>,
    pub seeds: Vec<u64>,
    pub runs: Vec<RegretLedger<F>>,
    /// Mean pseudo-regret across runs, per checkpoint.
    pub mean: Vec<F>,
    /// Sample standard deviation (n - 1), zero for a single run.
    pub std: Vec<F>,
}

impl<F: Scalar> ExperimentResult<F> {
    /// `runs x checkpoints` matrix of pseudo-regret.
    pub fn regret_matrix(&self) -> Vec<Vec<F>> {
        self.runs
            .iter()
            .map(|l| l.checkpoints().iter().map(|c| c.pseudo_regret).collect())
            .collect()
    }

    pub fn space(&self) -> ArmSpace {
        ArmSpace::new(self.config.arm_counts.clone()).expect("validated config")
    }
}

/// Runs `config.runs` independent episodes with seeds `seed, seed + 1, ...`
/// against one environment realization.
pub fn run_experiment<F: Scalar>(config: &ExperimentConfig) -> Result<ExperimentResult<F>> {
    config.validate()?;
    let env: Environment<F> = config.build_environment()?;
    let grid = config.grid();
    let space = env.space().clone();
    let options = EpisodeOptions {
        grid: Some(grid.clone()),
        allow_negative_result: config.allow_negative_result,
        trace: false,
    };
    let seeds: Vec<u64> = (0..config.runs)
        .map(|r| config.seed.wrapping_add(r))
        .collect();
    let runs = seeds
        .par_iter()
        .map(|&seed| {
            let mut env = env.clone();
            let mut players = build_players(config.algorithm, &space, &config.k_schedule, seed)?;
            run_episode_with(
                &mut env,
                config.variant,
                &mut players,
                config.horizon,
                seed,
                &options,
            )
            .map(|e| e.ledger)
        })
        .collect::<Result<Vec<_>>>()?;

    let columns = grid.len();
    let mut mean = Vec::with_capacity(columns);
    let mut std = Vec::with_capacity(columns);
    for c in 0..columns {
        let column: Vec<F> = runs
            .iter()
            .map(|l| l.checkpoints()[c].pseudo_regret)
            .collect();
        let (m, s) = mean_and_std(&column);
        mean.push(m);
        std.push(s);
    }
    Ok(ExperimentResult {
        config: config.clone(),
        grid,
        means: env.means().to_vec(),
        gaps: env.gaps().to_vec(),
        seeds,
        runs,
        mean,
        std,
    })
}
