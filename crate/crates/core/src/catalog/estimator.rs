//! Unbiased sum-of-products estimators and the losses built from them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ElicitError, Result};
use crate::loss::MultiObsLoss;
use crate::space::{flat_index, tuples, Distribution, OutcomeSpace};

/// `g(ω1..ωm) = Σ_i ∏_j f_ij(ω_j)`, each `f_ij` tabulated over the outcomes.
///
/// With i.i.d. observations `E[g] = Σ_i ∏_j E_p[f_ij]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EstimatorDoc", into = "EstimatorDoc")]
pub struct SumProductEstimator {
    terms: Vec<Vec<Vec<f64>>>,
    obs_count: usize,
    outcome_count: usize,
}

/// JSON document form: terms → factors → per-outcome values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorDoc {
    pub terms: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<EstimatorDoc> for SumProductEstimator {
    type Error = ElicitError;

    fn try_from(doc: EstimatorDoc) -> Result<Self> {
        Self::new(doc.terms)
    }
}

impl From<SumProductEstimator> for EstimatorDoc {
    fn from(est: SumProductEstimator) -> Self {
        EstimatorDoc { terms: est.terms }
    }
}

impl SumProductEstimator {
    pub fn new(terms: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| ElicitError::InvalidInput("estimator has no terms".into()))?;
        let obs_count = first.len();
        if obs_count == 0 {
            return Err(ElicitError::InvalidInput(
                "estimator products need at least one factor".into(),
            ));
        }
        let outcome_count = first[0].len();
        if outcome_count < 2 {
            return Err(ElicitError::InvalidInput(
                "factor tables must cover at least two outcomes".into(),
            ));
        }
        for (i, term) in terms.iter().enumerate() {
            if term.len() != obs_count {
                return Err(ElicitError::InvalidInput(format!(
                    "term {i} has {} factors, expected {obs_count}",
                    term.len()
                )));
            }
            for (j, table) in term.iter().enumerate() {
                if table.len() != outcome_count {
                    return Err(ElicitError::InvalidInput(format!(
                        "factor ({i},{j}) has {} entries, expected {outcome_count}",
                        table.len()
                    )));
                }
                if table.iter().any(|v| !v.is_finite()) {
                    return Err(ElicitError::InvalidInput(format!(
                        "factor ({i},{j}) has a non-finite entry"
                    )));
                }
            }
        }
        Ok(Self {
            terms,
            obs_count,
            outcome_count,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ElicitError::InvalidInput(e.to_string()))
    }

    pub fn terms(&self) -> &[Vec<Vec<f64>>] {
        &self.terms
    }

    pub fn obs_count(&self) -> usize {
        self.obs_count
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_count
    }

    /// `g` at one outcome tuple.
    pub fn evaluate(&self, tuple: &[usize]) -> f64 {
        self.terms
            .iter()
            .map(|term| term.iter().zip(tuple).map(|(f, &w)| f[w]).product::<f64>())
            .sum()
    }

    /// `g` over all of `Y^m`, lexicographic order.
    pub fn table(&self) -> Vec<f64> {
        tuples(self.outcome_count, self.obs_count)
            .map(|t| self.evaluate(&t))
            .collect()
    }

    /// `Σ_i ∏_j E_p[f_ij(Y)]`.
    pub fn expectation(&self, p: &Distribution) -> Result<f64> {
        if p.len() != self.outcome_count {
            return Err(ElicitError::InvalidInput(format!(
                "estimator covers {} outcomes, distribution has {}",
                self.outcome_count,
                p.len()
            )));
        }
        Ok(self
            .terms
            .iter()
            .map(|term| term.iter().map(|f| p.expect_table(f)).product::<f64>())
            .sum())
    }

    /// Every factor table of the first factor scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for term in &mut out.terms {
            for v in &mut term[0] {
                *v *= c;
            }
        }
        out
    }

    /// Pads every product with constant-one factors up to `m` observations.
    pub fn padded(&self, m: usize) -> Result<Self> {
        if m < self.obs_count {
            return Err(ElicitError::InvalidInput(format!(
                "cannot pad an estimator of arity {} down to {m}",
                self.obs_count
            )));
        }
        let ones = vec![1.0; self.outcome_count];
        let terms = self
            .terms
            .iter()
            .map(|term| {
                let mut t = term.clone();
                t.resize(m, ones.clone());
                t
            })
            .collect();
        Self::new(terms)
    }
}

/// `½(y1 − y2)²`, the two-observation unbiased variance estimator.
pub fn variance_estimator(space: &OutcomeSpace) -> SumProductEstimator {
    let v = space.values();
    let half_sq: Vec<f64> = v.iter().map(|x| 0.5 * x * x).collect();
    let ones = vec![1.0; v.len()];
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    SumProductEstimator::new(vec![
        vec![half_sq.clone(), ones.clone()],
        vec![neg, v.to_vec()],
        vec![ones, half_sq],
    ])
    .expect("well-formed variance estimator")
}

/// `y1 · y2`, unbiased for `E[Y]²`.
pub fn squared_mean_estimator(space: &OutcomeSpace) -> SumProductEstimator {
    let v = space.values().to_vec();
    SumProductEstimator::new(vec![vec![v.clone(), v]]).expect("well-formed estimator")
}

/// `y`, unbiased for `E[Y]`.
pub fn mean_estimator(space: &OutcomeSpace) -> SumProductEstimator {
    SumProductEstimator::new(vec![vec![space.values().to_vec()]]).expect("well-formed estimator")
}

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-9 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// Squared loss `(r − g(ω⃗))²` against the estimator; elicits `E[g]`.
///
/// The report box is the range of `g`, which always contains `E[g]`.
pub fn estimator_loss(est: &SumProductEstimator) -> MultiObsLoss {
    let table = Arc::new(est.table());
    let n = est.outcome_count();
    let lo = table.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = table.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let g = Arc::clone(&table);
    let v = Arc::clone(&table);
    MultiObsLoss::new(
        format!("estimator(m={})", est.obs_count()),
        est.obs_count(),
        vec![widen(lo, hi)],
        Arc::new(move |r: &[f64], t: &[usize]| (r[0] - g[flat_index(t, n)]).powi(2)),
    )
    .expect("estimator range is a valid box")
    .with_identification(Arc::new(move |r: &[f64], t: &[usize]| {
        vec![r[0] - v[flat_index(t, n)]]
    }))
    .with_outcome_count(n)
}

/// `(r − 1{ω1 = … = ωk})²`; elicits `Σ_ω p(ω)^k`.
pub fn knorm_loss(k: usize) -> Result<MultiObsLoss> {
    if k < 2 {
        return Err(ElicitError::InvalidInput(format!(
            "k-norm loss needs k >= 2, got {k}"
        )));
    }
    fn all_equal(t: &[usize]) -> f64 {
        if t.windows(2).all(|w| w[0] == w[1]) {
            1.0
        } else {
            0.0
        }
    }
    Ok(MultiObsLoss::new(
        format!("knorm{k}"),
        k,
        vec![(0.0, 1.0)],
        Arc::new(|r: &[f64], t: &[usize]| (r[0] - all_equal(t)).powi(2)),
    )?
    .with_identification(Arc::new(|r: &[f64], t: &[usize]| vec![r[0] - all_equal(t)])))
}

/// `b(ω⃗) r² − 2 a(ω⃗) r`, minimized in expectation at `E[a] / E[b]`.
///
/// Both estimators are read on the leading observations of a tuple whose
/// length is the larger of the two arities.
pub fn ratio_loss(
    numer: &SumProductEstimator,
    denom: &SumProductEstimator,
    report_box: (f64, f64),
) -> Result<MultiObsLoss> {
    if numer.outcome_count() != denom.outcome_count() {
        return Err(ElicitError::InvalidInput(
            "numerator and denominator cover different outcome counts".into(),
        ));
    }
    let m = numer.obs_count().max(denom.obs_count());
    let n = numer.outcome_count();
    let (ma, mb) = (numer.obs_count(), denom.obs_count());
    let a = Arc::new(numer.table());
    let b = Arc::new(denom.table());
    let (a2, b2) = (Arc::clone(&a), Arc::clone(&b));
    let denom_check = denom.clone();
    Ok(MultiObsLoss::new(
        format!("ratio(m={m})"),
        m,
        vec![report_box],
        Arc::new(move |r: &[f64], t: &[usize]| {
            let av = a[flat_index(&t[..ma], n)];
            let bv = b[flat_index(&t[..mb], n)];
            bv * r[0] * r[0] - 2.0 * av * r[0]
        }),
    )?
    .with_identification(Arc::new(move |r: &[f64], t: &[usize]| {
        let av = a2[flat_index(&t[..ma], n)];
        let bv = b2[flat_index(&t[..mb], n)];
        vec![bv * r[0] - av]
    }))
    .with_domain(Arc::new(move |p: &Distribution| {
        let eb = denom_check.expectation(p)?;
        if eb > 0.0 {
            Ok(())
        } else {
            Err(ElicitError::OutsideDomain {
                name: "ratio loss".into(),
                reason: format!("denominator expectation {eb} is not positive"),
            })
        }
    }))
    .with_outcome_count(n))
}

/// A monomial `∏ p(ω)` given by the multiset of outcome indices it multiplies.
pub type Monomial = Vec<usize>;

/// Sum-of-products estimator for a polynomial in `p`: each monomial becomes
/// a product of indicators `1_ω`, padded with constant one up to `m`.
pub fn polynomial_estimator(
    coeffs: &[(Monomial, f64)],
    m: usize,
    outcome_count: usize,
) -> Result<SumProductEstimator> {
    if m == 0 {
        return Err(ElicitError::InvalidInput("m must be at least 1".into()));
    }
    if coeffs.is_empty() {
        return Err(ElicitError::InvalidInput("polynomial has no terms".into()));
    }
    let ones = vec![1.0; outcome_count];
    let mut terms = Vec::with_capacity(coeffs.len());
    for (monomial, c) in coeffs {
        if monomial.len() > m {
            return Err(ElicitError::InvalidInput(format!(
                "monomial {monomial:?} has degree {} > m = {m}",
                monomial.len()
            )));
        }
        let mut factors = Vec::with_capacity(m);
        for &w in monomial {
            if w >= outcome_count {
                return Err(ElicitError::OutcomeOutOfRange {
                    index: w,
                    size: outcome_count,
                });
            }
            let mut ind = vec![0.0; outcome_count];
            ind[w] = 1.0;
            factors.push(ind);
        }
        factors.resize(m, ones.clone());
        for v in &mut factors[0] {
            *v *= c;
        }
        terms.push(factors);
    }
    SumProductEstimator::new(terms)
}

/// Squared loss eliciting the polynomial `Σ c · ∏ p(ω)` with `m` observations.
pub fn polynomial_loss(
    coeffs: &[(Monomial, f64)],
    m: usize,
    outcome_count: usize,
) -> Result<MultiObsLoss> {
    let est = polynomial_estimator(coeffs, m, outcome_count)?;
    Ok(estimator_loss(&est).renamed(format!("polynomial(m={m})")))
}
