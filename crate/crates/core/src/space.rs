//! Finite outcome spaces, distributions over them, and i.i.d. product tuples.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ElicitError, Result};

/// Sums within this distance of one are accepted as-is.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Sums within this distance of one are renormalized; anything farther is rejected.
pub const RENORMALIZE_TOL: f64 = 1e-9;

/// A finite, ordered set of outcomes, each carrying a numeric value.
///
/// Moment-type properties read `values`; norm and indicator constructions
/// only look at outcome identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSpace {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl OutcomeSpace {
    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(ElicitError::InvalidSpace(format!(
                "{} labels but {} values",
                labels.len(),
                values.len()
            )));
        }
        if labels.len() < 2 {
            return Err(ElicitError::InvalidSpace(
                "at least two outcomes are required".into(),
            ));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(ElicitError::InvalidSpace(format!(
                    "duplicate label `{label}`"
                )));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(ElicitError::InvalidSpace(format!("non-finite value {v}")));
        }
        Ok(Self { labels, values })
    }

    /// Outcomes labelled by their index, carrying the given values.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let labels = (0..values.len()).map(|i| i.to_string()).collect();
        Self::new(labels, values.to_vec())
    }

    /// `n` categorical outcomes valued `0, 1, ..., n-1`.
    pub fn categorical(n: usize) -> Result<Self> {
        let values: Vec<f64> = (0..n).map(|i| i as f64).collect();
        Self::from_values(&values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The first `k` outcomes as a space of their own.
    pub fn face(&self, k: usize) -> Result<Self> {
        if k > self.len() {
            return Err(ElicitError::InvalidSpace(format!(
                "face of size {k} requested from a space of {} outcomes",
                self.len()
            )));
        }
        Self::new(self.labels[..k].to_vec(), self.values[..k].to_vec())
    }
}

/// A probability vector over an [`OutcomeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    space: Arc<OutcomeSpace>,
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates and, for rounding-level deviations, renormalizes `probs`.
    pub fn new(space: Arc<OutcomeSpace>, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.len() {
            return Err(ElicitError::InvalidDistribution(format!(
                "{} probabilities for {} outcomes",
                probs.len(),
                space.len()
            )));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() {
                return Err(ElicitError::InvalidDistribution(format!(
                    "non-finite entry {p}"
                )));
            }
            if *p < 0.0 {
                if *p < -NORMALIZATION_TOL {
                    return Err(ElicitError::InvalidDistribution(format!(
                        "negative entry {p}"
                    )));
                }
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        let gap = (total - 1.0).abs();
        if gap > RENORMALIZE_TOL {
            return Err(ElicitError::InvalidDistribution(format!(
                "entries sum to {total}"
            )));
        }
        if gap > NORMALIZATION_TOL {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Self { space, probs })
    }

    /// Point mass on outcome `idx`.
    pub fn point_mass(space: Arc<OutcomeSpace>, idx: usize) -> Result<Self> {
        if idx >= space.len() {
            return Err(ElicitError::OutcomeOutOfRange {
                index: idx,
                size: space.len(),
            });
        }
        let mut probs = vec![0.0; space.len()];
        probs[idx] = 1.0;
        Self::new(space, probs)
    }

    pub fn uniform(space: Arc<OutcomeSpace>) -> Self {
        let n = space.len();
        Self {
            space,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn space(&self) -> &Arc<OutcomeSpace> {
        &self.space
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `E_p[f(Y)]` for a function tabulated over outcomes.
    pub fn expect_table(&self, table: &[f64]) -> f64 {
        self.probs.iter().zip(table).map(|(p, f)| p * f).sum()
    }

    /// `E_p[h(value(Y))]`.
    pub fn expect<F: Fn(f64) -> f64>(&self, h: F) -> f64 {
        self.probs
            .iter()
            .zip(self.space.values())
            .map(|(p, v)| p * h(*v))
            .sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v)
    }

    /// `E_p[Y^k]`.
    pub fn raw_moment(&self, k: u32) -> f64 {
        self.expect(|v| v.powi(k as i32))
    }

    /// Whether every coordinate is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// The joint law of `m` i.i.d. draws, as a vector over `Y^m` in
    /// lexicographic tuple order (first observation most significant).
    pub fn product_vector(&self, m: usize) -> Vec<f64> {
        let mut out = vec![1.0];
        for _ in 0..m {
            let mut next = Vec::with_capacity(out.len() * self.probs.len());
            for &w in &out {
                next.extend(self.probs.iter().map(|p| w * p));
            }
            out = next;
        }
        out
    }
}

/// A tuple `(ω1, …, ωm)` of outcome indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProductIndex(Vec<usize>);

impl ProductIndex {
    pub fn new(indices: Vec<usize>, space: &OutcomeSpace) -> Result<Self> {
        if indices.is_empty() {
            return Err(ElicitError::InvalidInput(
                "a product index needs at least one observation".into(),
            ));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= space.len()) {
            return Err(ElicitError::OutcomeOutOfRange {
                index: bad,
                size: space.len(),
            });
        }
        Ok(Self(indices))
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for ProductIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `p^m(ω1..ωm) = ∏ p(ωi)`.
pub fn product_prob(p: &Distribution, idx: &ProductIndex, m: usize) -> Result<f64> {
    if idx.arity() != m {
        return Err(ElicitError::ArityMismatch {
            expected: m,
            got: idx.arity(),
        });
    }
    if let Some(&bad) = idx.as_slice().iter().find(|&&i| i >= p.len()) {
        return Err(ElicitError::OutcomeOutOfRange {
            index: bad,
            size: p.len(),
        });
    }
    Ok(idx.as_slice().iter().map(|&i| p.prob(i)).product())
}

/// Position of `tuple` in the lexicographic enumeration of `Y^m`.
pub fn flat_index(tuple: &[usize], n: usize) -> usize {
    tuple.iter().fold(0, |acc, &i| acc * n + i)
}

/// Lexicographic iterator over all tuples in `{0..n}^m`.
#[derive(Debug, Clone)]
pub struct Tuples {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Tuples {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            current: vec![0; m],
            done: n == 0,
        }
    }
}

impl Iterator for Tuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut pos = self.current.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.current[pos] += 1;
            if self.current[pos] < self.n {
                break;
            }
            self.current[pos] = 0;
        }
        Some(out)
    }
}

/// All tuples of `Y^m` in lexicographic order.
pub fn tuples(n: usize, m: usize) -> Tuples {
    Tuples::new(n, m)
}

/// Every composition `k/N` of the simplex over `space`, in ascending
/// lexicographic order of `(k_1, …, k_n)`.
pub fn simplex_grid(space: &Arc<OutcomeSpace>, resolution: usize) -> Result<Vec<Distribution>> {
    if resolution == 0 {
        return Err(ElicitError::InvalidInput(
            "grid resolution must be at least 1".into(),
        ));
    }
    let n = space.len();
    let mut out = Vec::new();
    let mut counts = vec![0usize; n];
    compositions(&mut counts, 0, resolution, &mut |ks| {
        let probs = ks
            .iter()
            .map(|&k| k as f64 / resolution as f64)
            .collect::<Vec<_>>();
        out.push(Distribution {
            space: Arc::clone(space),
            probs,
        });
    });
    Ok(out)
}

/// Grid points whose coordinates are all at least `1/N` (the open simplex).
pub fn interior_grid(space: &Arc<OutcomeSpace>, resolution: usize) -> Result<Vec<Distribution>> {
    Ok(simplex_grid(space, resolution)?
        .into_iter()
        .filter(Distribution::is_interior)
        .collect())
}

fn compositions(counts: &mut [usize], pos: usize, remaining: usize, emit: &mut dyn FnMut(&[usize])) {
    let last = counts.len() - 1;
    if pos == last {
        counts[pos] = remaining;
        emit(counts);
        return;
    }
    for k in 0..=remaining {
        counts[pos] = k;
        compositions(counts, pos + 1, remaining - k, emit);
    }
}

/// Wire form of a distribution: outcome values plus probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionLiteral {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl DistributionLiteral {
    pub fn into_distribution(self) -> Result<Distribution> {
        let space = match self.labels {
            Some(labels) => OutcomeSpace::new(labels, self.values)?,
            None => OutcomeSpace::from_values(&self.values)?,
        };
        Distribution::new(Arc::new(space), self.probs)
    }
}

impl From<&Distribution> for DistributionLiteral {
    fn from(p: &Distribution) -> Self {
        Self {
            values: p.space().values().to_vec(),
            probs: p.probs().to_vec(),
            labels: Some(p.space().labels().to_vec()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(values: &[f64]) -> Arc<OutcomeSpace> {
        Arc::new(OutcomeSpace::from_values(values).unwrap())
    }

    #[test]
    fn space_rejects_bad_input() {
        assert!(OutcomeSpace::from_values(&[1.0]).is_err());
        assert!(OutcomeSpace::from_values(&[1.0, f64::NAN]).is_err());
        assert!(OutcomeSpace::new(vec!["a".into(), "a".into()], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn distribution_normalization_rules() {
        let s = space(&[0.0, 1.0]);
        let p = Distribution::new(s.clone(), vec![0.5, 0.5 + 5e-10]).unwrap();
        assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Distribution::new(s.clone(), vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(s.clone(), vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(s, vec![1.0]).is_err());
    }

    #[test]
    fn product_prob_examples() {
        let s = space(&[0.0, 1.0]);
        let point = Distribution::new(s.clone(), vec![1.0, 0.0]).unwrap();
        let idx = ProductIndex::new(vec![0, 0], &s).unwrap();
        assert_eq!(product_prob(&point, &idx, 2).unwrap(), 1.0);

        let half = Distribution::uniform(s.clone());
        let idx = ProductIndex::new(vec![0, 1], &s).unwrap();
        assert_eq!(product_prob(&half, &idx, 2).unwrap(), 0.25);
        assert!(matches!(
            product_prob(&half, &idx, 3),
            Err(ElicitError::ArityMismatch { expected: 3, got: 2 })
        ));

        let s3 = space(&[0.0, 1.0, 2.0]);
        let p = Distribution::new(s3.clone(), vec![0.5, 0.25, 0.25]).unwrap();
        let idx = ProductIndex::new(vec![0, 1, 2], &s3).unwrap();
        let expected = 0.5 * 0.25 * 0.25;
        assert!((product_prob(&p, &idx, 3).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn tuples_are_lexicographic() {
        let all: Vec<Vec<usize>> = tuples(2, 2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        for (i, t) in tuples(3, 3).enumerate() {
            assert_eq!(flat_index(&t, 3), i);
        }
        assert_eq!(tuples(4, 3).count(), 64);
    }

    #[test]
    fn simplex_grid_counts() {
        let s3 = space(&[0.0, 1.0, 2.0]);
        assert_eq!(simplex_grid(&s3, 1).unwrap().len(), 3);
        let two = simplex_grid(&s3, 2).unwrap();
        assert_eq!(two.len(), 6);
        assert!(two.iter().any(|p| p.probs() == [0.5, 0.5, 0.0]));
        assert_eq!(simplex_grid(&space(&[0.0, 1.0]), 10).unwrap().len(), 11);
        assert_eq!(simplex_grid(&space(&[1.0, 2.0, 3.0, 4.0]), 10).unwrap().len(), 286);
        assert!(simplex_grid(&s3, 0).is_err());
        assert_eq!(interior_grid(&s3, 10).unwrap().len(), 36);
    }

    #[test]
    fn product_vector_matches_examples() {
        let s = space(&[0.0, 1.0]);
        let p = Distribution::new(s.clone(), vec![0.3, 0.7]).unwrap();
        let v = p.product_vector(2);
        let expected = [0.09, 0.21, 0.21, 0.49];
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let e0 = Distribution::point_mass(s, 0).unwrap().product_vector(3);
        assert_eq!(e0[0], 1.0);
        assert!(e0[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn literal_round_trip() {
        let lit: DistributionLiteral =
            serde_json::from_str(r#"{"values":[1,3],"probs":[0.5,0.5]}"#).unwrap();
        let p = lit.into_distribution().unwrap();
        assert_eq!(p.mean(), 2.0);
    }
}
