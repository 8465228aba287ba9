use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arm_space::{ArmSpace, ArmTuple};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::iid::gaps_from_means;

/// Parameters of one finite-state reward chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec<F> {
    /// Reward emitted in each state, in `[0, 1]`.
    pub rewards: Vec<F>,
    /// Row-stochastic transition matrix, `transition[s][s']`.
    pub transition: Vec<Vec<F>>,
    #[serde(default)]
    pub initial_state: usize,
}

/// A rested Markov chain: it only moves when its own tuple is pulled.
#[derive(Debug, Clone, PartialEq)]
pub struct RestedChain<F> {
    spec: ChainSpec<F>,
    state: usize,
    stationary: Vec<F>,
    stationary_mean: F,
}

impl<F: Scalar> RestedChain<F> {
    pub fn new(spec: ChainSpec<F>) -> Result<Self> {
        let n = spec.rewards.len();
        if n == 0 {
            return Err(Error::InvalidInput(
                "a chain needs at least one state".into(),
            ));
        }
        if spec.transition.len() != n || spec.transition.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput(format!(
                "transition matrix must be {n}x{n}"
            )));
        }
        if spec.initial_state >= n {
            return Err(Error::InvalidInput(format!(
                "initial_state {} out of range for {n} states",
                spec.initial_state
            )));
        }
        if spec
            .rewards
            .iter()
            .any(|&r| !(r >= F::zero() && r <= F::one()))
        {
            return Err(Error::InvalidInput(
                "state rewards must lie in [0, 1]".into(),
            ));
        }
        let tol = F::from_f64_lossy(1e-9).max(F::epsilon() * F::from_count(64 * n as u64));
        for (s, row) in spec.transition.iter().enumerate() {
            if row.iter().any(|&p| !(p >= F::zero()) || !p.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "row {s} has a negative or non-finite entry"
                )));
            }
            let sum = row.iter().fold(F::zero(), |a, &p| a + p);
            if (sum - F::one()).abs() > tol {
                return Err(Error::InvalidInput(format!("row {s} sums to {sum}, not 1")));
            }
        }
        let adjacency: Vec<Vec<usize>> = spec
            .transition
            .iter()
            .map(|row| (0..n).filter(|&j| row[j] > F::zero()).collect())
            .collect();
        if !is_irreducible(&adjacency) {
            return Err(Error::InvalidInput(
                "transition matrix is not irreducible".into(),
            ));
        }
        let period = period(&adjacency);
        if period != 1 {
            return Err(Error::InvalidInput(format!(
                "transition matrix is periodic (period {period})"
            )));
        }
        let stationary = stationary_distribution(&spec.transition)?;
        let stationary_mean = stationary
            .iter()
            .zip(&spec.rewards)
            .fold(F::zero(), |acc, (&p, &r)| acc + p * r);
        Ok(Self {
            state: spec.initial_state,
            spec,
            stationary,
            stationary_mean,
        })
    }

    pub fn spec(&self) -> &ChainSpec<F> {
        &self.spec
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn stationary(&self) -> &[F] {
        &self.stationary
    }

    pub fn stationary_mean(&self) -> F {
        self.stationary_mean
    }

    /// Emits the current state's reward, then moves one step.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> F {
        let reward = self.spec.rewards[self.state];
        let u = F::unit(rng);
        let row = &self.spec.transition[self.state];
        let mut acc = F::zero();
        let mut next = row.len() - 1;
        for (j, &p) in row.iter().enumerate() {
            acc = acc + p;
            if u < acc {
                next = j;
                break;
            }
        }
        // Rounding can leave the cumulative sum just short of 1; never land
        // on a zero-probability state in that case.
        while row[next] <= F::zero() {
            next -= 1;
        }
        self.state = next;
        reward
    }
}

fn reachable_from(adjacency: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adjacency.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

fn is_irreducible(adjacency: &[Vec<usize>]) -> bool {
    (0..adjacency.len()).all(|s| reachable_from(adjacency, s).into_iter().all(|x| x))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period of an irreducible chain: gcd of `level(u) + 1 - level(v)` over all
/// edges, with BFS levels from state 0.
fn period(adjacency: &[Vec<usize>]) -> usize {
    let n = adjacency.len();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g = 0;
    for (u, succ) in adjacency.iter().enumerate() {
        for &v in succ {
            let d = (level[u] + 1).abs_diff(level[v]);
            g = gcd(g, d);
        }
    }
    g
}

/// Solves `pi P = pi`, `sum(pi) = 1` by Gaussian elimination with partial
/// pivoting on `(P^T - I)` with the last equation replaced by normalization.
pub fn stationary_distribution<F: Scalar>(transition: &[Vec<F>]) -> Result<Vec<F>> {
    let n = transition.len();
    let mut a = vec![vec![F::zero(); n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = transition[j][i] - if i == j { F::one() } else { F::zero() };
        }
    }
    a[n - 1][..n].fill(F::one());
    a[n - 1][n] = F::one();

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().partial_cmp(&a[s][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= F::epsilon() {
            return Err(Error::InvalidInput(
                "stationary distribution is not unique".into(),
            ));
        }
        a.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col {
                let factor = row[col] / pivot_row[col];
                if factor != F::zero() {
                    for (x, &v) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                        *x = *x - factor * v;
                    }
                }
            }
        }
    }
    Ok((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Rested Markovian rewards, one chain per tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovEnv<F> {
    space: ArmSpace,
    chains: Vec<RestedChain<F>>,
    means: Vec<F>,
    mu_star: F,
    gaps: Vec<F>,
}

impl<F: Scalar> MarkovEnv<F> {
    pub fn new(space: ArmSpace, entries: Vec<(ArmTuple, ChainSpec<F>)>) -> Result<Self> {
        let mut slots: Vec<Option<ChainSpec<F>>> = vec![None; space.k_max()];
        for (tuple, spec) in entries {
            let r = space.rank_of(tuple.components())?;
            if slots[r].is_some() {
                return Err(Error::InvalidInput(format!(
                    "tuple {tuple} has more than one chain"
                )));
            }
            slots[r] = Some(spec);
        }
        let chains = slots
            .into_iter()
            .enumerate()
            .map(|(r, s)| {
                let spec = s.ok_or_else(|| {
                    Error::InvalidInput(format!("tuple {} has no chain", space.tuple_at(r)))
                })?;
                RestedChain::new(spec)
            })
            .collect::<Result<Vec<_>>>()?;
        let means: Vec<F> = chains.iter().map(RestedChain::stationary_mean).collect();
        let (mu_star, gaps) = gaps_from_means(&means);
        Ok(Self {
            space,
            chains,
            means,
            mu_star,
            gaps,
        })
    }

    pub fn space(&self) -> &ArmSpace {
        &self.space
    }

    pub fn chains(&self) -> &[RestedChain<F>] {
        &self.chains
    }

    /// Stationary mean reward of every tuple.
    pub fn means(&self) -> &[F] {
        &self.means
    }

    pub fn mu_star(&self) -> F {
        self.mu_star
    }

    pub fn gaps(&self) -> &[F] {
        &self.gaps
    }

    pub fn current_state(&self, rank: usize) -> usize {
        self.chains[rank].state()
    }

    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, rank: usize, rng: &mut R) -> F {
        self.chains[rank].step(rng)
    }
}
