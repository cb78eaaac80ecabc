//! Named properties and the loss constructions that elicit them.

pub mod estimator;
pub mod moments;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{ElicitError, Result};
use crate::loss::MultiObsLoss;
use crate::property::{Link, Property};
use crate::space::{Distribution, OutcomeSpace};

pub use estimator::{
    estimator_loss, knorm_loss, mean_estimator, polynomial_estimator, polynomial_loss, ratio_loss,
    squared_mean_estimator, variance_estimator, Monomial, SumProductEstimator,
};
pub use moments::{central_moment_expansion, central_moment_plan, CentralMomentPlan};

/// Properties the catalog knows how to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropertyName {
    Mean,
    Variance,
    KNorm(u32),
    Dispersion,
    Sharpe,
    CentralMoment(u32),
    SineDemo,
}

/// Parses `base(k)` or `basek`.
fn parse_indexed(s: &str, base: &str) -> Option<u32> {
    let rest = s.strip_prefix(base)?;
    let inner = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .unwrap_or(rest);
    inner.parse().ok()
}

impl FromStr for PropertyName {
    type Err = ElicitError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s {
            "mean" => Some(Self::Mean),
            "variance" => Some(Self::Variance),
            "dispersion" => Some(Self::Dispersion),
            "sharpe" => Some(Self::Sharpe),
            "sine_demo" => Some(Self::SineDemo),
            _ => parse_indexed(s, "knorm")
                .filter(|&k| k >= 2)
                .map(Self::KNorm)
                .or_else(|| {
                    parse_indexed(s, "central_moment")
                        .filter(|&n| n >= 2)
                        .map(Self::CentralMoment)
                }),
        };
        parsed.ok_or_else(|| ElicitError::UnknownName {
            kind: "property",
            name: s.to_string(),
        })
    }
}

impl fmt::Display for PropertyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Mean => write!(f, "mean"),
            Self::Variance => write!(f, "variance"),
            Self::KNorm(k) => write!(f, "knorm({k})"),
            Self::Dispersion => write!(f, "dispersion"),
            Self::Sharpe => write!(f, "sharpe"),
            Self::CentralMoment(n) => write!(f, "central_moment({n})"),
            Self::SineDemo => write!(f, "sine_demo"),
        }
    }
}

/// Losses addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossName {
    /// `(r − y)²`.
    Mean1,
    /// `(r − ½(y1 − y2)²)²`.
    Variance2,
    /// `(r1 − y)² + (r2 − y²)²`.
    Moments,
    /// `(r − 1{y1 = … = yk})²`.
    KNorm(u32),
    /// Ratio loss for `Var / E[Y]`.
    Dispersion2,
    /// Ratio loss for `E[Y]² / Var`.
    Sharpe2,
    /// Single-block estimator of `μ_n` from `n` observations.
    CentralMoment(u32),
    /// Squared loss on the first `|Y| − 1` outcome indicators.
    Brier,
}

impl FromStr for LossName {
    type Err = ElicitError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parsed = match s {
            "mean1" | "mean" => Some(Self::Mean1),
            "variance2" => Some(Self::Variance2),
            "moments" | "moments2" => Some(Self::Moments),
            "dispersion2" => Some(Self::Dispersion2),
            "sharpe2" => Some(Self::Sharpe2),
            "brier" => Some(Self::Brier),
            _ => parse_indexed(s, "knorm")
                .filter(|&k| k >= 2)
                .map(Self::KNorm)
                .or_else(|| {
                    parse_indexed(s, "central_moment")
                        .filter(|&n| n >= 2)
                        .map(Self::CentralMoment)
                }),
        };
        parsed.ok_or_else(|| ElicitError::UnknownName {
            kind: "loss",
            name: s.to_string(),
        })
    }
}

impl fmt::Display for LossName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Mean1 => write!(f, "mean1"),
            Self::Variance2 => write!(f, "variance2"),
            Self::Moments => write!(f, "moments"),
            Self::KNorm(k) => write!(f, "knorm{k}"),
            Self::Dispersion2 => write!(f, "dispersion2"),
            Self::Sharpe2 => write!(f, "sharpe2"),
            Self::CentralMoment(n) => write!(f, "central_moment{n}"),
            Self::Brier => write!(f, "brier"),
        }
    }
}

fn outside(name: &str, reason: impl Into<String>) -> ElicitError {
    ElicitError::OutsideDomain {
        name: name.to_string(),
        reason: reason.into(),
    }
}

fn variance_of(p: &Distribution) -> f64 {
    let mu = p.mean();
    p.expect(|v| (v - mu) * (v - mu))
}

fn sharpe_squared(p: &Distribution) -> Result<f64> {
    let var = variance_of(p);
    let mu = p.mean();
    if var <= 0.0 {
        return Err(outside("sharpe", format!("variance {var} is not positive")));
    }
    if mu <= 0.0 {
        return Err(outside("sharpe", format!("mean {mu} is not positive")));
    }
    Ok(mu * mu / var)
}

fn sum_of_powers(p: &Distribution, k: u32) -> f64 {
    p.probs().iter().map(|q| q.powi(k as i32)).sum()
}

/// Exact evaluator for a catalog property.
pub fn named_property(name: &str) -> Result<Property> {
    Ok(property(name.parse()?))
}

pub fn property(name: PropertyName) -> Property {
    let label = name.to_string();
    match name {
        PropertyName::Mean => Property::scalar(label, |p| Ok(p.mean())),
        PropertyName::Variance => Property::scalar(label, |p| Ok(variance_of(p))),
        PropertyName::KNorm(k) => {
            let inv = 1.0 / f64::from(k);
            Property::scalar(label, move |p| Ok(sum_of_powers(p, k).powf(inv))).with_link(Link::new(
                format!("knorm({k})^{k}"),
                1,
                Arc::new(move |r: &[f64]| vec![r[0].max(0.0).powf(inv)]),
                Arc::new(move |p: &Distribution| Ok(vec![sum_of_powers(p, k)])),
            ))
        }
        PropertyName::Dispersion => Property::scalar(label, |p| {
            let mu = p.mean();
            if mu <= 0.0 {
                return Err(outside("dispersion", format!("mean {mu} is not positive")));
            }
            Ok(variance_of(p) / mu)
        }),
        PropertyName::Sharpe => Property::scalar(label, |p| sharpe_squared(p).map(f64::sqrt))
            .with_link(Link::new(
                "sharpe^2",
                1,
                Arc::new(|r: &[f64]| vec![r[0].max(0.0).sqrt()]),
                Arc::new(|p: &Distribution| sharpe_squared(p).map(|v| vec![v])),
            ))
            .interior_only(),
        PropertyName::CentralMoment(n) => Property::scalar(label, move |p| {
            let mu = p.mean();
            Ok(p.expect(|v| (v - mu).powi(n as i32)))
        }),
        PropertyName::SineDemo => Property::scalar(label, |p| {
            if p.len() != 3 {
                return Err(ElicitError::Unsupported(format!(
                    "sine_demo is defined on 3 outcomes, got {}",
                    p.len()
                )));
            }
            if !p.is_interior() {
                return Err(outside("sine_demo", "distribution is on the simplex boundary"));
            }
            Ok(sine_demo_value(p.prob(0), p.prob(1)))
        })
        .interior_only(),
    }
}

/// `p₁ − ½ sin(1/p₂)`.
pub fn sine_demo_value(p1: f64, p2: f64) -> f64 {
    p1 - 0.5 * (1.0 / p2).sin()
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi - lo < 1e-9 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// `(r − y)²` with identification `r − y`.
pub fn mean_loss(space: &OutcomeSpace) -> MultiObsLoss {
    let values: Arc<Vec<f64>> = Arc::new(space.values().to_vec());
    let v2 = Arc::clone(&values);
    MultiObsLoss::new(
        "mean1",
        1,
        vec![span(space.min_value(), space.max_value())],
        Arc::new(move |r: &[f64], t: &[usize]| (r[0] - values[t[0]]).powi(2)),
    )
    .expect("valid box")
    .with_identification(Arc::new(move |r: &[f64], t: &[usize]| vec![r[0] - v2[t[0]]]))
    .with_outcome_count(space.len())
}

pub fn variance_loss(space: &OutcomeSpace) -> MultiObsLoss {
    estimator_loss(&variance_estimator(space)).renamed("variance2")
}

/// Two-dimensional single-observation loss for `(E[Y], E[Y²])`.
pub fn moments_loss(space: &OutcomeSpace) -> MultiObsLoss {
    let values: Arc<Vec<f64>> = Arc::new(space.values().to_vec());
    let v2 = Arc::clone(&values);
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    let sq_lo = squares.iter().copied().fold(f64::INFINITY, f64::min);
    let sq_hi = squares.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    MultiObsLoss::new(
        "moments",
        1,
        vec![span(space.min_value(), space.max_value()), span(sq_lo, sq_hi)],
        Arc::new(move |r: &[f64], t: &[usize]| {
            let y = values[t[0]];
            (r[0] - y).powi(2) + (r[1] - y * y).powi(2)
        }),
    )
    .expect("valid box")
    .with_identification(Arc::new(move |r: &[f64], t: &[usize]| {
        let y = v2[t[0]];
        vec![r[0] - y, r[1] - y * y]
    }))
    .with_outcome_count(space.len())
}

/// Squared loss on the indicators of the first `|Y| − 1` outcomes; elicits
/// the distribution itself.
pub fn brier_loss(space: &OutcomeSpace) -> MultiObsLoss {
    let d = space.len() - 1;
    MultiObsLoss::new(
        "brier",
        1,
        vec![(0.0, 1.0); d],
        Arc::new(move |r: &[f64], t: &[usize]| {
            r.iter()
                .enumerate()
                .map(|(i, ri)| (ri - f64::from(u8::from(t[0] == i))).powi(2))
                .sum()
        }),
    )
    .expect("valid box")
    .with_identification(Arc::new(move |r: &[f64], t: &[usize]| {
        r.iter()
            .enumerate()
            .map(|(i, ri)| ri - f64::from(u8::from(t[0] == i)))
            .collect()
    }))
    .with_outcome_count(space.len())
}

/// Ratio loss for the index of dispersion `Var(Y) / E[Y]`.
pub fn dispersion_loss(space: &OutcomeSpace) -> MultiObsLoss {
    let range = space.max_value() - space.min_value();
    let vmin = space.min_value();
    let hi = if vmin > 0.0 {
        (range * range / (4.0 * vmin)).max(1e-6) * (1.0 + 1e-6)
    } else {
        100.0
    };
    ratio_loss(
        &variance_estimator(space),
        &mean_estimator(space),
        (0.0, hi),
    )
    .expect("estimators share the space")
    .renamed("dispersion2")
}

/// Upper end of the declared Sharpe² report interval.
pub const SHARPE2_REPORT_MAX: f64 = 1e4;

/// Ratio loss for the squared Sharpe ratio `E[Y]² / Var(Y)`.
pub fn sharpe2_loss(space: &OutcomeSpace) -> MultiObsLoss {
    ratio_loss(
        &squared_mean_estimator(space),
        &variance_estimator(space),
        (0.0, SHARPE2_REPORT_MAX),
    )
    .expect("estimators share the space")
    .renamed("sharpe2")
}

/// Single-block `n`-observation loss for `μ_n`.
pub fn central_moment_loss(space: &OutcomeSpace, n: u32) -> MultiObsLoss {
    let plan = central_moment_plan(n, 1).expect("k = 1 is always valid for n >= 1");
    estimator_loss(&plan.blocks[0].estimator(space)).renamed(format!("central_moment{n}"))
}

pub fn named_loss(name: &str, space: &OutcomeSpace) -> Result<MultiObsLoss> {
    loss(name.parse()?, space)
}

pub fn loss(name: LossName, space: &OutcomeSpace) -> Result<MultiObsLoss> {
    Ok(match name {
        LossName::Mean1 => mean_loss(space),
        LossName::Variance2 => variance_loss(space),
        LossName::Moments => moments_loss(space),
        LossName::KNorm(k) => knorm_loss(k as usize)?,
        LossName::Dispersion2 => dispersion_loss(space),
        LossName::Sharpe2 => sharpe2_loss(space),
        LossName::CentralMoment(n) => central_moment_loss(space, n),
        LossName::Brier => brier_loss(space),
    })
}

/// A `(d, m)` upper-bound construction: a `d`-dimensional `m`-observation
/// loss and the link that recovers the property from its minimizer.
#[derive(Debug, Clone)]
pub struct Construction {
    pub d: usize,
    pub m: usize,
    pub loss: MultiObsLoss,
    pub link: Option<Link>,
}

fn moments_link(name: &str, psi: fn(f64, f64) -> f64) -> Link {
    Link::new(
        format!("{name} from (E[Y], E[Y^2])"),
        2,
        Arc::new(move |r: &[f64]| vec![psi(r[0], r[1])]),
        Arc::new(|p: &Distribution| Ok(vec![p.mean(), p.raw_moment(2)])),
    )
}

type DistributionFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

fn distribution_link(name: &str, dim: usize, f: DistributionFn) -> Link {
    Link::new(
        format!("{name} from the distribution"),
        dim,
        Arc::new(move |r: &[f64]| {
            let mut probs: Vec<f64> = r.iter().map(|x| x.max(0.0)).collect();
            probs.push((1.0 - r.iter().sum::<f64>()).max(0.0));
            vec![f(&probs)]
        }),
        Arc::new(|p: &Distribution| Ok(p.probs()[..p.len() - 1].to_vec())),
    )
}

/// Upper-bound constructions of the catalog, restricted to `d <= 2`.
pub fn constructions(name: PropertyName, space: &OutcomeSpace) -> Result<Vec<Construction>> {
    let n = space.len();
    let mut out = Vec::new();
    match name {
        PropertyName::Mean => out.push(Construction {
            d: 1,
            m: 1,
            loss: mean_loss(space),
            link: None,
        }),
        PropertyName::Variance => {
            out.push(Construction {
                d: 1,
                m: 2,
                loss: variance_loss(space),
                link: None,
            });
            out.push(Construction {
                d: 2,
                m: 1,
                loss: moments_loss(space),
                link: Some(moments_link("variance", |m1, m2| m2 - m1 * m1)),
            });
        }
        PropertyName::Dispersion => {
            out.push(Construction {
                d: 1,
                m: 2,
                loss: dispersion_loss(space),
                link: None,
            });
            out.push(Construction {
                d: 2,
                m: 1,
                loss: moments_loss(space),
                link: Some(moments_link("dispersion", |m1, m2| (m2 - m1 * m1) / m1)),
            });
        }
        PropertyName::Sharpe => {
            out.push(Construction {
                d: 1,
                m: 2,
                loss: sharpe2_loss(space),
                link: property(name).link().cloned(),
            });
            out.push(Construction {
                d: 2,
                m: 1,
                loss: moments_loss(space),
                link: Some(moments_link("sharpe", |m1, m2| {
                    m1 / (m2 - m1 * m1).max(0.0).sqrt()
                })),
            });
        }
        PropertyName::KNorm(k) => {
            out.push(Construction {
                d: 1,
                m: k as usize,
                loss: knorm_loss(k as usize)?,
                link: property(name).link().cloned(),
            });
            if n - 1 <= 2 {
                let inv = 1.0 / f64::from(k);
                let link = distribution_link(
                    "knorm",
                    n - 1,
                    Arc::new(move |q: &[f64]| {
                        q.iter().map(|x| x.powi(k as i32)).sum::<f64>().powf(inv)
                    }),
                );
                out.push(Construction {
                    d: n - 1,
                    m: 1,
                    loss: brier_loss(space),
                    link: Some(link),
                });
            }
        }
        PropertyName::CentralMoment(order) => {
            out.push(Construction {
                d: 1,
                m: order as usize,
                loss: central_moment_loss(space, order),
                link: None,
            });
            if order == 2 {
                out.push(Construction {
                    d: 2,
                    m: 1,
                    loss: moments_loss(space),
                    link: Some(moments_link("central_moment(2)", |m1, m2| m2 - m1 * m1)),
                });
            }
        }
        PropertyName::SineDemo => {
            if n == 3 {
                let link = distribution_link(
                    "sine_demo",
                    2,
                    Arc::new(|q: &[f64]| sine_demo_value(q[0], q[1])),
                );
                out.push(Construction {
                    d: 2,
                    m: 1,
                    loss: brier_loss(space),
                    link: Some(link),
                });
            }
        }
    }
    Ok(out)
}

/// Observation counts `m` at which the literature marks `(1, m)` as not
/// elicitable; the frontier scan searches these cells for certificates.
pub fn claimed_refutations(name: PropertyName, max_m: usize) -> Vec<usize> {
    let claimed: Vec<usize> = match name {
        PropertyName::Mean => vec![],
        PropertyName::Variance
        | PropertyName::Dispersion
        | PropertyName::Sharpe
        | PropertyName::CentralMoment(_) => vec![1],
        PropertyName::KNorm(k) => (1..k as usize).collect(),
        PropertyName::SineDemo => (1..=max_m).collect(),
    };
    claimed.into_iter().filter(|&m| m <= max_m).collect()
}
