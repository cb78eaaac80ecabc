//! Multi-observation loss functions and their exact expectations under `p^m`.

use std::fmt;
use std::sync::Arc;

use crate::error::{ElicitError, Result};
use crate::space::{tuples, Distribution};

pub type LossFn = Arc<dyn Fn(&[f64], &[usize]) -> f64 + Send + Sync>;
pub type IdentificationFn = Arc<dyn Fn(&[f64], &[usize]) -> Vec<f64> + Send + Sync>;
pub type DomainFn = Arc<dyn Fn(&Distribution) -> Result<()> + Send + Sync>;

/// `ℓ(r, ω1, …, ωm)` with a declared report box.
#[derive(Clone)]
pub struct MultiObsLoss {
    name: String,
    report_dim: usize,
    obs_count: usize,
    report_box: Vec<(f64, f64)>,
    outcome_count: Option<usize>,
    finite_reports: Option<usize>,
    eval: LossFn,
    identification: Option<IdentificationFn>,
    domain: Option<DomainFn>,
}

impl MultiObsLoss {
    pub fn new(
        name: impl Into<String>,
        obs_count: usize,
        report_box: Vec<(f64, f64)>,
        eval: LossFn,
    ) -> Result<Self> {
        let name = name.into();
        if obs_count == 0 {
            return Err(ElicitError::InvalidInput(format!(
                "loss `{name}` needs at least one observation"
            )));
        }
        if report_box.is_empty() {
            return Err(ElicitError::InvalidInput(format!(
                "loss `{name}` declares an empty report box"
            )));
        }
        for &(lo, hi) in &report_box {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ElicitError::InvalidInput(format!(
                    "loss `{name}` has an invalid report interval [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            name,
            report_dim: report_box.len(),
            obs_count,
            report_box,
            outcome_count: None,
            finite_reports: None,
            eval,
            identification: None,
            domain: None,
        })
    }

    pub fn with_identification(mut self, v: IdentificationFn) -> Self {
        self.identification = Some(v);
        self
    }

    /// Tie the loss to a space of `n` outcomes (tabulated losses).
    pub fn with_outcome_count(mut self, n: usize) -> Self {
        self.outcome_count = Some(n);
        self
    }

    pub fn with_domain(mut self, domain: DomainFn) -> Self {
        self.domain = Some(domain);
        self
    }

    /// Mark the report space as the finite set `{0, …, count-1}`.
    pub fn with_finite_reports(mut self, count: usize) -> Self {
        self.finite_reports = Some(count);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn report_dim(&self) -> usize {
        self.report_dim
    }

    pub fn obs_count(&self) -> usize {
        self.obs_count
    }

    pub fn report_box(&self) -> &[(f64, f64)] {
        &self.report_box
    }

    pub fn outcome_count(&self) -> Option<usize> {
        self.outcome_count
    }

    pub fn finite_reports(&self) -> Option<usize> {
        self.finite_reports
    }

    pub fn has_identification(&self) -> bool {
        self.identification.is_some()
    }

    /// Raw pointwise loss.
    pub fn eval(&self, report: &[f64], tuple: &[usize]) -> f64 {
        (self.eval)(report, tuple)
    }

    /// Raw pointwise identification value, if the loss carries one.
    pub fn identify(&self, report: &[f64], tuple: &[usize]) -> Option<Vec<f64>> {
        self.identification.as_ref().map(|v| v(report, tuple))
    }

    /// Checks the loss-specific domain (e.g. a positive denominator).
    pub fn check_domain(&self, p: &Distribution) -> Result<()> {
        match &self.domain {
            Some(check) => check(p),
            None => Ok(()),
        }
    }

    pub fn check_report(&self, report: &[f64]) -> Result<()> {
        if report.len() != self.report_dim {
            return Err(ElicitError::ReportDimension {
                expected: self.report_dim,
                got: report.len(),
            });
        }
        for (coord, (&value, &(lo, hi))) in report.iter().zip(&self.report_box).enumerate() {
            let slack = 1e-12 * (hi - lo).max(1.0);
            if !(value >= lo - slack && value <= hi + slack) {
                return Err(ElicitError::ReportOutOfBox { coord, value, lo, hi });
            }
        }
        Ok(())
    }

    fn check_distribution(&self, p: &Distribution) -> Result<()> {
        if let Some(n) = self.outcome_count {
            if n != p.len() {
                return Err(ElicitError::InvalidInput(format!(
                    "loss `{}` is tabulated over {n} outcomes, distribution has {}",
                    self.name,
                    p.len()
                )));
            }
        }
        Ok(())
    }

    /// Precomputes the support of `p^m` so the expected loss can be
    /// evaluated repeatedly at different reports.
    pub fn under<'a>(&'a self, p: &Distribution) -> Result<ExpectedLoss<'a>> {
        self.check_distribution(p)?;
        let m = self.obs_count;
        let weights = p.product_vector(m);
        let mut support = Vec::new();
        let mut support_weights = Vec::new();
        for (tuple, w) in tuples(p.len(), m).zip(weights) {
            if w > 0.0 {
                support.extend_from_slice(&tuple);
                support_weights.push(w);
            }
        }
        Ok(ExpectedLoss {
            loss: self,
            support,
            weights: support_weights,
        })
    }
}

impl fmt::Debug for MultiObsLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiObsLoss")
            .field("name", &self.name)
            .field("report_dim", &self.report_dim)
            .field("obs_count", &self.obs_count)
            .field("report_box", &self.report_box)
            .field("identification", &self.identification.is_some())
            .finish()
    }
}

/// The expected loss `r ↦ E_{p^m}[ℓ(r, ω⃗)]` for a fixed `p`.
pub struct ExpectedLoss<'a> {
    loss: &'a MultiObsLoss,
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl ExpectedLoss<'_> {
    pub fn loss(&self) -> &MultiObsLoss {
        self.loss
    }

    fn tuples(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.support
            .chunks_exact(self.loss.obs_count)
            .zip(self.weights.iter().copied())
    }

    /// Expected loss without report validation.
    pub fn value(&self, report: &[f64]) -> f64 {
        self.tuples()
            .map(|(t, w)| w * self.loss.eval(report, t))
            .sum()
    }

    pub fn identification(&self, report: &[f64]) -> Result<Vec<f64>> {
        let v = self
            .loss
            .identification
            .as_ref()
            .ok_or_else(|| ElicitError::MissingIdentification(self.loss.name.clone()))?;
        let mut acc = vec![0.0; self.loss.report_dim];
        for (t, w) in self.tuples() {
            for (a, x) in acc.iter_mut().zip(v(report, t)) {
                *a += w * x;
            }
        }
        Ok(acc)
    }
}

/// `E_{ω⃗∼p^m}[ℓ(r, ω⃗)]`, summed exactly over `Y^m`.
pub fn expected_loss(loss: &MultiObsLoss, report: &[f64], p: &Distribution) -> Result<f64> {
    loss.check_report(report)?;
    Ok(loss.under(p)?.value(report))
}

/// `E_{ω⃗∼p^m}[V(r, ω⃗)]`.
pub fn expected_identification(
    loss: &MultiObsLoss,
    report: &[f64],
    p: &Distribution,
) -> Result<Vec<f64>> {
    if !loss.has_identification() {
        return Err(ElicitError::MissingIdentification(loss.name.clone()));
    }
    loss.check_report(report)?;
    loss.under(p)?.identification(report)
}
