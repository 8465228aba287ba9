//! Decentralized multi-player multi-armed bandits under information
//! asymmetry.
//!
//! `M` cooperating players each choose one of their own arms every round;
//! the reward depends on the joint tuple. What a player learns afterwards
//! depends on the [`ProblemVariant`]:
//!
//! * `A`: the common reward, but not the others' actions,
//! * `B_prime`: the others' actions and a private i.i.d. reward,
//! * `B`: only a private i.i.d. reward.
//!
//! The crate provides the reward models ([`environment`]), the learning
//! rules ([`policy`]: mUCB, mDSEE and a per-player agnostic UCB), an
//! episode runner with exact pseudo-regret accounting ([`simulator`]), the
//! closed-form mUCB regret bounds ([`analysis`]) and the experiment
//! config/CSV plumbing behind the `mmab` binary.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix it to `f64`.

// `!(x >= lo)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod arm_space;
pub mod config;
pub mod environment;
mod error;
pub mod output;
pub mod policy;
pub mod rng;
mod scalar;
pub mod simulator;

pub use arm_space::{dsee_schedule, initial_schedule, lex_compare, ArmSpace, ArmTuple, KSchedule};
pub use config::{parse_config, ExperimentConfig};
pub use error::{Error, Result};
pub use scalar::{CompensatedSum, Scalar};
pub use simulator::{
    run_episode, run_experiment, Algorithm, ExperimentResult, Feedback, ProblemVariant,
    RegretLedger, RewardModel,
};

pub type Environment64 = environment::Environment<f64>;
pub type IidEnv64 = environment::IidEnv<f64>;
pub type MarkovEnv64 = environment::MarkovEnv<f64>;
pub type CounterexampleEnv64 = environment::CounterexampleEnv<f64>;
pub type UcbTable64 = policy::UcbTable<f64>;
pub type MucbPlayer64 = policy::MucbPlayer<f64>;
pub type DseePlayer64 = policy::DseePlayer<f64>;
pub type AgnosticUcbPlayer64 = policy::AgnosticUcbPlayer<f64>;
pub type RegretLedger64 = simulator::RegretLedger<f64>;
pub type ExperimentResult64 = simulator::ExperimentResult<f64>;
pub type BoundInput64 = analysis::BoundInput<f64>;

pub type Environment32 = environment::Environment<f32>;
pub type UcbTable32 = policy::UcbTable<f32>;
pub type RegretLedger32 = simulator::RegretLedger<f32>;
