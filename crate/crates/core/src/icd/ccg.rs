//! Top-`L_c` bit-flip candidates by aggregate confidence.
//!
//! Flipping position `p` changes its confidence term from `ρ_p` to `1 − ρ_p`,
//! so the best pattern flips exactly the positions with `ρ_p < 0.5`, and any
//! other pattern costs `Σ_{p ∈ D} |2ρ_p − 1|` where `D` is where it departs
//! from the best one. Patterns are therefore produced as the k smallest
//! subset sums of those deviation costs, by best-first search over the
//! sorted costs, never touching the `2^K` space.
//!
//! Ranking is exact: reliabilities are snapped to a grid of step
//! [`RHO_GRID`] and costs are integers on that grid, so equal-confidence
//! patterns are true ties. Ties are ordered by fewer flips, then by the
//! lexicographically smallest flip set.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::IcdError;

/// Reliability resolution used for ranking.
pub const RHO_GRID: f64 = 1e-12;
const GRID_SCALE: f64 = 1e12;
const GRID_ONE: u64 = 1_000_000_000_000;

/// Largest equal-cost class collected before giving up.
pub const MAX_TIE_CLASS: usize = 1 << 21;

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Sorted flipped positions.
    pub flips: Vec<usize>,
    pub bits: Vec<u8>,
    pub rho_tilde: Vec<f64>,
    pub conf: f64,
}

impl Candidate {
    pub fn new(m_hat: &[u8], rho: &[f64], flips: Vec<usize>) -> Self {
        let mut bits = m_hat.to_vec();
        let mut rho_tilde = rho.to_vec();
        for &p in &flips {
            bits[p] ^= 1;
            rho_tilde[p] = 1.0 - rho[p];
        }
        let conf = rho_tilde.iter().sum();
        Self {
            flips,
            bits,
            rho_tilde,
            conf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub candidates: Vec<Candidate>,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn confs(&self) -> Vec<f64> {
        self.candidates.iter().map(|c| c.conf).collect()
    }
}

/// `ρ` on the ranking grid, `0..=10^12`.
pub fn grid_rho(rho: f64) -> u64 {
    (rho.clamp(0.0, 1.0) * GRID_SCALE).round() as u64
}

/// Integer confidence of flip set `flips` on the ranking grid.
pub fn grid_conf(rho: &[f64], flips: &[usize]) -> u64 {
    let mut flipped = vec![false; rho.len()];
    for &p in flips {
        flipped[p] = true;
    }
    rho.iter()
        .zip(&flipped)
        .map(|(&r, &f)| if f { GRID_ONE - grid_rho(r) } else { grid_rho(r) })
        .sum()
}

fn check_inputs(m_hat: &[u8], rho: &[f64], l_c: usize) -> Result<(), IcdError> {
    if m_hat.len() != rho.len() {
        return Err(IcdError::Shape(format!(
            "{} bits with {} reliabilities",
            m_hat.len(),
            rho.len()
        )));
    }
    if let Some(p) = rho.iter().position(|r| !(0.0..=1.0).contains(r)) {
        return Err(IcdError::Shape(format!("reliability {} at {p} outside [0, 1]", rho[p])));
    }
    let k = m_hat.len();
    if l_c == 0 || (k < 64 && l_c as u128 > 1u128 << k) {
        return Err(IcdError::Capacity { l_c, k });
    }
    Ok(())
}

// Subsets in sorted-cost index space; `last` is the largest index present.
#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Node {
    cost: u64,
    members: Vec<usize>,
}

pub fn ccg_generate(m_hat: &[u8], rho: &[f64], l_c: usize) -> Result<CandidatePool, IcdError> {
    check_inputs(m_hat, rho, l_c)?;
    let k = m_hat.len();
    let half = GRID_ONE / 2;
    let g: Vec<u64> = rho.iter().map(|&r| grid_rho(r)).collect();
    let base_flip: Vec<bool> = g.iter().map(|&r| r < half).collect();
    let dev: Vec<u64> = g.iter().map(|&r| (2 * r).abs_diff(GRID_ONE)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&p| (dev[p], p));
    let sorted_cost: Vec<u64> = order.iter().map(|&p| dev[p]).collect();

    // (cost, deviation set in original positions)
    let mut collected: Vec<(u64, Vec<usize>)> = vec![(0, Vec::new())];
    let mut heap = BinaryHeap::new();
    if k > 0 {
        heap.push(Reverse(Node {
            cost: sorted_cost[0],
            members: vec![0],
        }));
    }
    let mut boundary: Option<u64> = (l_c == 1).then_some(0);
    let mut class_size = 0usize;
    while let Some(Reverse(node)) = heap.pop() {
        if let Some(b) = boundary {
            if node.cost > b {
                break;
            }
            class_size += 1;
            if class_size > MAX_TIE_CLASS {
                return Err(IcdError::TieClassTooLarge(MAX_TIE_CLASS));
            }
        }
        let last = *node.members.last().unwrap();
        if last + 1 < k {
            let mut add = node.members.clone();
            add.push(last + 1);
            heap.push(Reverse(Node {
                cost: node.cost + sorted_cost[last + 1],
                members: add,
            }));
            let mut shift = node.members.clone();
            *shift.last_mut().unwrap() = last + 1;
            heap.push(Reverse(Node {
                cost: node.cost - sorted_cost[last] + sorted_cost[last + 1],
                members: shift,
            }));
        }
        let positions = node.members.iter().map(|&i| order[i]).collect();
        collected.push((node.cost, positions));
        if boundary.is_none() && collected.len() == l_c {
            boundary = Some(node.cost);
        }
    }

    let mut ranked: Vec<(u64, usize, Vec<usize>)> = collected
        .into_iter()
        .map(|(cost, dev_set)| {
            let mut in_dev = vec![false; k];
            for p in dev_set {
                in_dev[p] = true;
            }
            let flips: Vec<usize> = (0..k).filter(|&p| base_flip[p] != in_dev[p]).collect();
            (cost, flips.len(), flips)
        })
        .collect();
    ranked.sort_unstable();
    ranked.truncate(l_c);
    Ok(CandidatePool {
        candidates: ranked
            .into_iter()
            .map(|(_, _, flips)| Candidate::new(m_hat, rho, flips))
            .collect(),
    })
}

/// Exhaustive ranking over all `2^K` patterns; for tests on small `K`.
pub fn brute_force_top(m_hat: &[u8], rho: &[f64], l_c: usize) -> Result<Vec<Vec<usize>>, IcdError> {
    check_inputs(m_hat, rho, l_c)?;
    let k = m_hat.len();
    assert!(k <= 20, "brute force limited to K ≤ 20");
    let mut all: Vec<(Reverse<u64>, usize, Vec<usize>)> = (0u32..1 << k)
        .map(|mask| {
            let flips: Vec<usize> = (0..k).filter(|&p| mask >> p & 1 == 1).collect();
            (Reverse(grid_conf(rho, &flips)), flips.len(), flips)
        })
        .collect();
    all.sort_unstable();
    Ok(all.into_iter().take(l_c).map(|(_, _, f)| f).collect())
}
