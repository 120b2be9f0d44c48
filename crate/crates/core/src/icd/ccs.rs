//! Metropolis–Hastings sampling of fixed-size candidate subsets.
//!
//! States are `L_s`-subsets of the pool. The energy rewards confidence and
//! pairwise Hamming diversity:
//!
//! ```text
//! E(S) = −Σ_{i ∈ S} conf_i − λ · Σ_{i < j ∈ S} d_H(m̃_i, m̃_j)
//! ```
//!
//! A move swaps one uniformly chosen member for one uniformly chosen
//! non-member and is accepted with probability `min(1, exp(−β ΔE))`, which
//! leaves `π(S) ∝ exp(−β E(S))` invariant. [`exact_kernel`] builds the full
//! transition matrix for small pools.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ccg::CandidatePool;
use super::IcdError;
use crate::bits::hamming;

/// Largest state space [`exact_kernel`] will enumerate.
pub const MAX_EXACT_STATES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub beta: f64,
    pub lambda: f64,
    pub n_step: usize,
    pub seed: u64,
}

impl SamplerParams {
    pub fn validate(&self) -> Result<(), IcdError> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(IcdError::Params(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(IcdError::Params(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Sorted member indices into the pool.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubsetState {
    pub members: Vec<usize>,
}

impl SubsetState {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

/// Pool confidences and pairwise distances, precomputed once.
#[derive(Debug, Clone)]
pub struct EnergyTable {
    conf: Vec<f64>,
    dist: Vec<Vec<u32>>,
}

impl EnergyTable {
    pub fn new(pool: &CandidatePool) -> Self {
        let c = &pool.candidates;
        let dist = c
            .iter()
            .map(|a| c.iter().map(|b| hamming(&a.bits, &b.bits) as u32).collect())
            .collect();
        Self {
            conf: pool.confs(),
            dist,
        }
    }

    pub fn len(&self) -> usize {
        self.conf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conf.is_empty()
    }

    pub fn energy(&self, s: &SubsetState, lambda: f64) -> f64 {
        let m = &s.members;
        let conf: f64 = m.iter().map(|&i| self.conf[i]).sum();
        let mut pairs = 0u64;
        for (a, &i) in m.iter().enumerate() {
            for &j in &m[a + 1..] {
                pairs += u64::from(self.dist[i][j]);
            }
        }
        -conf - lambda * pairs as f64
    }

    /// `E(S') − E(S)` for swapping `out` (a member) for `inn` (a non-member).
    pub fn delta(&self, s: &SubsetState, out: usize, inn: usize, lambda: f64) -> f64 {
        let mut d_pairs = 0i64;
        for &j in &s.members {
            if j != out {
                d_pairs += i64::from(self.dist[inn][j]) - i64::from(self.dist[out][j]);
            }
        }
        -(self.conf[inn] - self.conf[out]) - lambda * d_pairs as f64
    }
}

pub fn energy(s: &SubsetState, pool: &CandidatePool, lambda: f64) -> f64 {
    EnergyTable::new(pool).energy(s, lambda)
}

pub fn acceptance_prob(delta_e: f64, beta: f64) -> f64 {
    if delta_e <= 0.0 {
        1.0
    } else {
        (-beta * delta_e).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub removed: usize,
    pub added: usize,
    pub acceptance_prob: f64,
    pub accepted: bool,
    /// Energy after the step.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub state: SubsetState,
    pub initial: SubsetState,
    pub trace: Vec<StepRecord>,
}

impl SampleResult {
    pub fn accepted(&self) -> usize {
        self.trace.iter().filter(|r| r.accepted).count()
    }
}

fn check_sizes(l_c: usize, l_s: usize) -> Result<(), IcdError> {
    if l_s == 0 || l_s + 2 > l_c {
        return Err(IcdError::SubsetSize { l_s, l_c });
    }
    Ok(())
}

/// One proposal/accept step; the uniform draw is consumed even when the
/// move is downhill so the random stream does not depend on energies.
pub fn mh_step<R: Rng + ?Sized>(
    s: &SubsetState,
    table: &EnergyTable,
    params: &SamplerParams,
    current_energy: f64,
    rng: &mut R,
) -> (SubsetState, StepRecord) {
    let l_c = table.len();
    let l_s = s.len();
    let out = s.members[rng.random_range(0..l_s)];
    let nth = rng.random_range(0..l_c - l_s);
    let inn = (0..l_c).filter(|&i| !s.contains(i)).nth(nth).expect("non-member exists");
    let delta = table.delta(s, out, inn, params.lambda);
    let a = acceptance_prob(delta, params.beta);
    let u: f64 = rng.random();
    if u <= a {
        let mut members: Vec<usize> = s.members.iter().copied().filter(|&i| i != out).collect();
        members.push(inn);
        let next = SubsetState::new(members);
        let record = StepRecord {
            removed: out,
            added: inn,
            acceptance_prob: a,
            accepted: true,
            energy: current_energy + delta,
        };
        (next, record)
    } else {
        let record = StepRecord {
            removed: out,
            added: inn,
            acceptance_prob: a,
            accepted: false,
            energy: current_energy,
        };
        (s.clone(), record)
    }
}

/// Runs `n_step` moves from the top-`L_s` candidates.
pub fn mh_sample(pool: &CandidatePool, l_s: usize, params: &SamplerParams) -> Result<SampleResult, IcdError> {
    params.validate()?;
    check_sizes(pool.len(), l_s)?;
    let table = EnergyTable::new(pool);
    let initial = SubsetState::new((0..l_s).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut state = initial.clone();
    let mut e = table.energy(&state, params.lambda);
    let mut trace = Vec::with_capacity(params.n_step);
    for _ in 0..params.n_step {
        let (next, rec) = mh_step(&state, &table, params, e, &mut rng);
        e = rec.energy;
        state = next;
        trace.push(rec);
    }
    Ok(SampleResult {
        state,
        initial,
        trace,
    })
}

/// Exact chain objects over an enumerated state space.
#[derive(Debug, Clone)]
pub struct ExactKernel {
    pub states: Vec<SubsetState>,
    pub pi: Vec<f64>,
    /// Row-stochastic: `p[i][j]` is the probability of moving from state `i` to `j`.
    pub p: Vec<Vec<f64>>,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1, |acc, i| acc * (n as u128 - i) / (i + 1))
}

pub fn exact_kernel(pool: &CandidatePool, l_s: usize, params: &SamplerParams) -> Result<ExactKernel, IcdError> {
    params.validate()?;
    let l_c = pool.len();
    check_sizes(l_c, l_s)?;
    let size = binomial(l_c, l_s);
    if size > MAX_EXACT_STATES as u128 {
        return Err(IcdError::StateSpaceTooLarge(size));
    }
    let table = EnergyTable::new(pool);
    let states: Vec<SubsetState> = combinations(l_c, l_s).into_iter().map(SubsetState::new).collect();
    let index: HashMap<&SubsetState, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let energies: Vec<f64> = states.iter().map(|s| table.energy(s, params.lambda)).collect();
    let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-params.beta * (e - e_min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let pi = weights.iter().map(|w| w / z).collect();

    let q = 1.0 / (l_s * (l_c - l_s)) as f64;
    let n = states.len();
    let mut p = vec![vec![0.0; n]; n];
    for (i, s) in states.iter().enumerate() {
        // rejected proposals stay put
        let mut stay = 0.0;
        for &out in &s.members {
            for inn in (0..l_c).filter(|&j| !s.contains(j)) {
                let mut m: Vec<usize> = s.members.iter().copied().filter(|&x| x != out).collect();
                m.push(inn);
                let j = index[&SubsetState::new(m)];
                let a = acceptance_prob(energies[j] - energies[i], params.beta);
                p[i][j] += q * a;
                stay += q * (1.0 - a);
            }
        }
        p[i][i] = stay;
    }
    Ok(ExactKernel { states, pi, p })
}

impl ExactKernel {
    pub fn index_of(&self, s: &SubsetState) -> Option<usize> {
        self.states.binary_search(s).ok()
    }

    /// Time-averaged state occupancy of a seeded chain of `n_step` moves.
    pub fn empirical(&self, pool: &CandidatePool, l_s: usize, params: &SamplerParams) -> Result<Vec<f64>, IcdError> {
        let run = mh_sample(pool, l_s, params)?;
        let mut counts = vec![0u64; self.states.len()];
        let mut state = run.initial.clone();
        for rec in &run.trace {
            if rec.accepted {
                let mut m: Vec<usize> = state.members.iter().copied().filter(|&x| x != rec.removed).collect();
                m.push(rec.added);
                state = SubsetState::new(m);
            }
            counts[self.index_of(&state).expect("state in space")] += 1;
        }
        let total = run.trace.len().max(1) as f64;
        Ok(counts.iter().map(|&c| c as f64 / total).collect())
    }
}

impl ExactKernel {
    pub fn max_row_sum_error(&self) -> f64 {
        self.p
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.p.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `max |π_i P_ij − π_j P_ji|`.
    pub fn max_detailed_balance_error(&self) -> f64 {
        let n = self.states.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.pi[i] * self.p[i][j] - self.pi[j] * self.p[j][i]).abs());
            }
        }
        worst
    }

    /// `max_j |(πP)_j − π_j|`.
    pub fn stationarity_error(&self) -> f64 {
        let n = self.states.len();
        (0..n)
            .map(|j| ((0..n).map(|i| self.pi[i] * self.p[i][j]).sum::<f64>() - self.pi[j]).abs())
            .fold(0.0, f64::max)
    }

    fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k] != 0.0 {
                    for j in 0..n {
                        out[i][j] += a[i][k] * b[k][j];
                    }
                }
            }
        }
        out
    }

    /// Whether every state reaches every other within `steps` moves, i.e.
    /// `Σ_{t=1..steps} P^t` is positive off the diagonal.
    pub fn reachable_within(&self, steps: usize) -> bool {
        let n = self.states.len();
        let mut power = self.p.clone();
        let mut acc = self.p.clone();
        for _ in 1..steps {
            power = Self::matmul(&power, &self.p);
            for i in 0..n {
                for j in 0..n {
                    acc[i][j] += power[i][j];
                }
            }
        }
        (0..n).all(|i| (0..n).all(|j| i == j || acc[i][j] > 0.0))
    }

    /// Smallest `m ≤ max_power` with `P^m` entrywise positive. A positive
    /// power proves the chain irreducible and aperiodic.
    pub fn positive_power(&self, max_power: usize) -> Option<usize> {
        let mut power = self.p.clone();
        for m in 1..=max_power {
            if power.iter().flatten().all(|&x| x > 0.0) {
                return Some(m);
            }
            power = Self::matmul(&power, &self.p);
        }
        None
    }

    /// Aperiodicity witness for every state: a self-loop, or positive return
    /// probability at both 2 and 3 steps (gcd 1).
    pub fn aperiodic(&self) -> bool {
        let p2 = Self::matmul(&self.p, &self.p);
        let p3 = Self::matmul(&p2, &self.p);
        (0..self.states.len()).all(|i| self.p[i][i] > 0.0 || (p2[i][i] > 0.0 && p3[i][i] > 0.0))
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
