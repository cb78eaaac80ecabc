//! Properties (statistics of a distribution) and link functions.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::space::Distribution;

pub type PropertyFn = Arc<dyn Fn(&Distribution) -> Result<Vec<f64>> + Send + Sync>;
pub type LinkFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A map `ψ` from an auxiliary report to the target property, together
/// with the auxiliary property `Γ̂` it is applied to, so that `Γ = ψ ∘ Γ̂`.
#[derive(Clone)]
pub struct Link {
    name: String,
    aux_dim: usize,
    map: LinkFn,
    auxiliary: PropertyFn,
}

impl Link {
    pub fn new(name: impl Into<String>, aux_dim: usize, map: LinkFn, auxiliary: PropertyFn) -> Self {
        Self {
            name: name.into(),
            aux_dim,
            map,
            auxiliary,
        }
    }

    /// Name of the auxiliary statistic the link consumes.
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    pub fn apply(&self, report: &[f64]) -> Vec<f64> {
        (self.map)(report)
    }

    /// Exact value of the auxiliary statistic `Γ̂(p)`.
    pub fn auxiliary(&self, p: &Distribution) -> Result<Vec<f64>> {
        (self.auxiliary)(p)
    }
}

impl fmt::Debug for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Link")
            .field("name", &self.name)
            .field("aux_dim", &self.aux_dim)
            .finish()
    }
}

/// A statistic `Γ: P → R^d` with exact evaluation.
///
/// Evaluators return [`crate::ElicitError::OutsideDomain`] for distributions
/// outside a declared domain restriction.
#[derive(Clone)]
pub struct Property {
    name: String,
    report_dim: usize,
    eval: PropertyFn,
    link: Option<Link>,
    interior_only: bool,
}

impl Property {
    pub fn new(name: impl Into<String>, report_dim: usize, eval: PropertyFn) -> Self {
        Self {
            name: name.into(),
            report_dim,
            eval,
            link: None,
            interior_only: false,
        }
    }

    /// Scalar property from a plain closure.
    pub fn scalar<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Distribution) -> Result<f64> + Send + Sync + 'static,
    {
        Self::new(name, 1, Arc::new(move |p| f(p).map(|v| vec![v])))
    }

    pub fn with_link(mut self, link: Link) -> Self {
        self.link = Some(link);
        self
    }

    /// Restrict numerical checks to the open simplex.
    pub fn interior_only(mut self) -> Self {
        self.interior_only = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn report_dim(&self) -> usize {
        self.report_dim
    }

    pub fn link(&self) -> Option<&Link> {
        self.link.as_ref()
    }

    pub fn is_interior_only(&self) -> bool {
        self.interior_only
    }

    pub fn evaluate(&self, p: &Distribution) -> Result<Vec<f64>> {
        (self.eval)(p)
    }

    /// First coordinate of the property value.
    pub fn evaluate_scalar(&self, p: &Distribution) -> Result<f64> {
        Ok(self.evaluate(p)?[0])
    }
}

impl fmt::Debug for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Property")
            .field("name", &self.name)
            .field("report_dim", &self.report_dim)
            .field("link", &self.link)
            .field("interior_only", &self.interior_only)
            .finish()
    }
}
