use serde::{Deserialize, Serialize};

use super::{sigmoid, BlockDecodeResult, ReliabilityDecoder};
use crate::channel::SoftObservation;
use crate::code::LinearBlockCode;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BpParams {
    pub max_iter: usize,
    pub llr_clamp: f64,
}

impl Default for BpParams {
    fn default() -> Self {
        Self {
            max_iter: 20,
            llr_clamp: 30.0,
        }
    }
}

/// Sum-product belief propagation with a flooding schedule.
///
/// Channel LLRs are `2·h·y/σ²`. Decoding stops as soon as the hard decision
/// has zero syndrome; otherwise the iterate with the fewest unsatisfied
/// checks is returned (later iterates win ties; iterate 0 is the raw channel
/// decision). `ρ_d = sigmoid(|LLR_d|)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BpDecoder {
    pub params: BpParams,
}

impl BpDecoder {
    pub fn new(params: BpParams) -> Self {
        Self { params }
    }

    /// Posterior LLRs and convergence info; the decision rule is LLR ≥ 0 → 0.
    pub fn posterior(&self, code: &LinearBlockCode, obs: &SoftObservation) -> (Vec<f64>, bool, usize) {
        let n = code.n();
        assert_eq!(obs.len(), n, "observation length must equal code length");
        let clamp = self.params.llr_clamp;
        let var2 = obs.sigma_n * obs.sigma_n;
        let channel: Vec<f64> = obs
            .y
            .iter()
            .zip(&obs.h)
            .map(|(&y, &h)| (2.0 * h * y / var2).clamp(-clamp, clamp))
            .collect();

        let checks = code.check_neighbors();
        // edge-indexed messages, grouped by check
        let offsets: Vec<usize> = std::iter::once(0)
            .chain(checks.iter().scan(0, |acc, c| {
                *acc += c.len();
                Some(*acc)
            }))
            .collect();
        let edges = *offsets.last().unwrap();
        let mut v2c = vec![0.0; edges];
        for (c, vars) in checks.iter().enumerate() {
            for (e, &v) in vars.iter().enumerate() {
                v2c[offsets[c] + e] = channel[v];
            }
        }
        let mut c2v = vec![0.0; edges];

        let mut posterior = channel.clone();
        let mut best = posterior.clone();
        let mut best_unsat = unsatisfied(code, &posterior);
        if best_unsat == 0 {
            return (posterior, true, 0);
        }
        let mut best_iter = 0;
        let mut tanh_buf = Vec::new();

        for iter in 1..=self.params.max_iter {
            for (c, vars) in checks.iter().enumerate() {
                let base = offsets[c];
                tanh_buf.clear();
                tanh_buf.extend((0..vars.len()).map(|e| (v2c[base + e] / 2.0).tanh()));
                // product excluding self via prefix/suffix
                let d = vars.len();
                let mut prefix = vec![1.0; d + 1];
                for e in 0..d {
                    prefix[e + 1] = prefix[e] * tanh_buf[e];
                }
                let mut suffix = 1.0;
                for e in (0..d).rev() {
                    let prod = prefix[e] * suffix;
                    c2v[base + e] = (2.0 * prod.atanh()).clamp(-clamp, clamp);
                    suffix *= tanh_buf[e];
                }
            }

            posterior.copy_from_slice(&channel);
            for (c, vars) in checks.iter().enumerate() {
                for (e, &v) in vars.iter().enumerate() {
                    posterior[v] += c2v[offsets[c] + e];
                }
            }
            for (c, vars) in checks.iter().enumerate() {
                for (e, &v) in vars.iter().enumerate() {
                    let i = offsets[c] + e;
                    v2c[i] = (posterior[v] - c2v[i]).clamp(-clamp, clamp);
                }
            }
            for p in posterior.iter_mut() {
                *p = p.clamp(-clamp, clamp);
            }

            let unsat = unsatisfied(code, &posterior);
            if unsat == 0 {
                return (posterior, true, iter);
            }
            if unsat <= best_unsat {
                best_unsat = unsat;
                best.copy_from_slice(&posterior);
                best_iter = iter;
            }
        }
        (best, false, best_iter)
    }
}

fn hard(llr: &[f64]) -> Vec<u8> {
    llr.iter().map(|&l| u8::from(l < 0.0)).collect()
}

fn unsatisfied(code: &LinearBlockCode, llr: &[f64]) -> usize {
    let x = hard(llr);
    code.check_neighbors()
        .iter()
        .filter(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ x[v]) == 1)
        .count()
}

impl ReliabilityDecoder for BpDecoder {
    fn decode_block(&self, code: &LinearBlockCode, obs: &SoftObservation) -> BlockDecodeResult {
        let (llr, converged, iterations) = self.posterior(code, obs);
        BlockDecodeResult {
            x_hat_b: hard(&llr),
            rho: llr.iter().map(|l| sigmoid(l.abs())).collect(),
            converged,
            iterations,
        }
    }
}
