//! Central moments split into blocks of the binomial expansion
//! `μ_n = Σ_{i=0}^{n} (−1)^i C(n,i) E[Y]^i E[Y^{n−i}]`.
//!
//! Indices `0..n` are partitioned into `k` contiguous blocks. Block `j`
//! starting at index `s_j` factors out `E[Y]^{s_j}`; the remainder
//! `S_j = Σ_{i∈block} (−1)^i C(n,i) E[Y]^{i−s_j} E[Y^{n−i}]` is a sum of
//! products of expectations and therefore has an unbiased estimator using
//! at most `⌈n/k⌉` observations. Then `μ_n = Σ_j E[Y]^{s_j} S_j`.

use serde::Serialize;

use crate::error::{ElicitError, Result};
use crate::space::{Distribution, OutcomeSpace};

use super::estimator::SumProductEstimator;

/// One summand `coefficient · E[Y]^{mean_power} · E[Y^{raw_power}]` of a block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentTerm {
    pub index: u32,
    pub coefficient: f64,
    pub mean_power: u32,
    pub raw_power: u32,
}

impl MomentTerm {
    /// Observations an unbiased product estimator of this term needs.
    pub fn observations(&self) -> usize {
        self.mean_power as usize + usize::from(self.raw_power > 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentBlock {
    /// Power of `E[Y]` factored out of the block.
    pub mean_power: u32,
    pub terms: Vec<MomentTerm>,
}

impl MomentBlock {
    pub fn observations(&self) -> usize {
        self.terms
            .iter()
            .map(MomentTerm::observations)
            .max()
            .unwrap_or(0)
            .max(1)
    }

    /// Exact block value from the moments of `p`.
    pub fn value(&self, p: &Distribution) -> f64 {
        let mean = p.mean();
        self.terms
            .iter()
            .map(|t| t.coefficient * mean.powi(t.mean_power as i32) * p.raw_moment(t.raw_power))
            .sum()
    }

    /// Unbiased estimator of the block on `space`, arity [`Self::observations`].
    pub fn estimator(&self, space: &OutcomeSpace) -> SumProductEstimator {
        let m = self.observations();
        let values = space.values();
        let ones = vec![1.0; values.len()];
        let identity = values.to_vec();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut factors = Vec::with_capacity(m);
                if t.raw_power > 0 {
                    factors.push(values.iter().map(|v| v.powi(t.raw_power as i32)).collect());
                }
                for _ in 0..t.mean_power {
                    factors.push(identity.clone());
                }
                factors.resize(m, ones.clone());
                for v in &mut factors[0] {
                    *v *= t.coefficient;
                }
                factors
            })
            .collect();
        SumProductEstimator::new(terms).expect("moment block estimator is well-formed")
    }
}

/// The block decomposition of `μ_n` into `k` pieces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralMomentPlan {
    pub order: u32,
    pub blocks: Vec<MomentBlock>,
}

pub fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Splits the expansion of `μ_n` into `k` contiguous blocks.
///
/// Indices `0..n-1` are divided as evenly as possible (sizes differ by at
/// most one), and index `n` joins the last block: its term `(−1)^n E[Y]^n`
/// needs only as many observations as that block's length.
pub fn central_moment_plan(n: u32, k: u32) -> Result<CentralMomentPlan> {
    if k < 1 || k > n {
        return Err(ElicitError::InvalidInput(format!(
            "block count k = {k} must satisfy 1 <= k <= n = {n}"
        )));
    }
    let (q, rem) = (n / k, n % k);
    let mut blocks = Vec::with_capacity(k as usize);
    let mut start = 0u32;
    for j in 0..k {
        let len = q + u32::from(j < rem);
        let mut end = start + len - 1;
        if j == k - 1 {
            end = n;
        }
        let terms = (start..=end)
            .map(|i| MomentTerm {
                index: i,
                coefficient: if i % 2 == 0 { 1.0 } else { -1.0 } * binomial(n, i),
                mean_power: i - start,
                raw_power: n - i,
            })
            .collect();
        blocks.push(MomentBlock {
            mean_power: start,
            terms,
        });
        start = end + 1;
    }
    Ok(CentralMomentPlan { order: n, blocks })
}

impl CentralMomentPlan {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Largest observation count over the blocks.
    pub fn observations(&self) -> usize {
        self.blocks.iter().map(MomentBlock::observations).max().unwrap_or(1)
    }

    /// Reports elicited: one per block, plus `E[Y]` when some block factors it.
    pub fn report_dim(&self) -> usize {
        self.blocks.len() + usize::from(self.blocks.iter().any(|b| b.mean_power > 0))
    }

    /// `μ_n = Σ_j E[Y]^{s_j} S_j`.
    pub fn reconstruct(&self, mean: f64, block_values: &[f64]) -> Result<f64> {
        if block_values.len() != self.blocks.len() {
            return Err(ElicitError::InvalidInput(format!(
                "{} block values for {} blocks",
                block_values.len(),
                self.blocks.len()
            )));
        }
        Ok(self
            .blocks
            .iter()
            .zip(block_values)
            .map(|(b, s)| mean.powi(b.mean_power as i32) * s)
            .sum())
    }

    /// Reconstruction through the blocks' unbiased estimators.
    pub fn evaluate_via_estimators(&self, p: &Distribution) -> Result<f64> {
        let values = self
            .blocks
            .iter()
            .map(|b| b.estimator(p.space()).expectation(p))
            .collect::<Result<Vec<_>>>()?;
        self.reconstruct(p.mean(), &values)
    }
}

/// `Σ_{i=0}^{n} (−1)^i C(n,i) E[Y]^i E[Y^{n−i}]`.
pub fn central_moment_expansion(p: &Distribution, n: u32) -> f64 {
    let mean = p.mean();
    (0..=n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(n, i) * mean.powi(i as i32) * p.raw_moment(n - i)
        })
        .sum()
}
