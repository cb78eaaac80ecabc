//! Multi-observation regression: group scattered `(x, y)` pairs into
//! pseudo-i.i.d. samples by nearby `x`, then fit with a multi-observation
//! squared loss. Includes the heteroskedasticity simulation comparing a
//! two-observation variance fit with the indirect moment route.

use std::fmt;
use std::str::FromStr;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{ElicitError, Result};

pub const ERROR_GRID_POINTS: usize = 1001;
pub const METHOD_TWO_OBSERVATION: &str = "two_observation";
pub const METHOD_INDIRECT: &str = "indirect_moments";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterMode {
    /// Overlapping windows stepping by one point.
    #[default]
    Sliding,
    /// Consecutive non-overlapping blocks; the remainder is dropped.
    Disjoint,
}

impl FromStr for ClusterMode {
    type Err = ElicitError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sliding" => Ok(Self::Sliding),
            "disjoint" => Ok(Self::Disjoint),
            _ => Err(ElicitError::UnknownName {
                kind: "cluster mode",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for ClusterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sliding => "sliding",
            Self::Disjoint => "disjoint",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterDataset {
    points: Vec<(f64, f64)>,
}

impl ScatterDataset {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(ElicitError::InvalidInput("dataset is empty".into()));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(ElicitError::InvalidInput("dataset contains non-finite values".into()));
        }
        Ok(Self { points })
    }

    /// Two-column `x,y` CSV; a non-numeric first line is taken as a header.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match fields.as_slice() {
                [x, y] => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some(p) => points.push(p),
                None if i == 0 => continue,
                None => {
                    return Err(ElicitError::InvalidInput(format!(
                        "line {}: expected `x,y`, got `{line}`",
                        i + 1
                    )))
                }
            }
        }
        Self::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredSample {
    pub x: f64,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteredDataset {
    pub mode: ClusterMode,
    pub samples: Vec<ClusteredSample>,
}

/// Sorts by `x` (ties by original position) and groups `m` consecutive
/// points; `x̄` is the window's mean covariate.
pub fn cluster_points(data: &ScatterDataset, m: usize, mode: ClusterMode) -> Result<ClusteredDataset> {
    let n = data.len();
    if m == 0 || n < m {
        return Err(ElicitError::InvalidInput(format!(
            "cannot form groups of {m} from {n} points"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| data.points[a].0.total_cmp(&data.points[b].0).then(a.cmp(&b)));
    let sorted: Vec<(f64, f64)> = order.iter().map(|&i| data.points[i]).collect();
    let starts: Vec<usize> = match mode {
        ClusterMode::Sliding => (0..=n - m).collect(),
        ClusterMode::Disjoint => (0..n / m).map(|j| j * m).collect(),
    };
    let samples = starts
        .into_iter()
        .map(|s| {
            let window = &sorted[s..s + m];
            ClusteredSample {
                x: window.iter().map(|p| p.0).sum::<f64>() / m as f64,
                ys: window.iter().map(|p| p.1).collect(),
            }
        })
        .collect();
    Ok(ClusteredDataset { mode, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub slope: f64,
}

impl LinearModel {
    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Least squares of `t` on `(1, x)` using centered sums.
pub fn ols(xs: &[f64], ts: &[f64]) -> Result<LinearModel> {
    if xs.len() != ts.len() || xs.len() < 2 {
        return Err(ElicitError::Rank(format!(
            "need at least two paired points, got {} x and {} t",
            xs.len(),
            ts.len()
        )));
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let tbar = ts.iter().sum::<f64>() / n;
    let (mut sxx, mut sxt) = (0.0, 0.0);
    for (x, t) in xs.iter().zip(ts) {
        sxx += (x - xbar) * (x - xbar);
        sxt += (x - xbar) * (t - tbar);
    }
    if !(sxx > 0.0) {
        return Err(ElicitError::Rank("all covariates are equal".into()));
    }
    let slope = sxt / sxx;
    let model = LinearModel {
        intercept: tbar - slope * xbar,
        slope,
    };
    if !(model.intercept.is_finite() && model.slope.is_finite()) {
        return Err(ElicitError::Numerical("least-squares fit is not finite".into()));
    }
    Ok(model)
}

/// Exact empirical risk minimizer of `Σ (f(x̄) − g(ys))²` over linear `f`.
pub fn fit_target_linear<G: Fn(&[f64]) -> f64>(data: &ClusteredDataset, target: G) -> Result<LinearModel> {
    let xs: Vec<f64> = data.samples.iter().map(|s| s.x).collect();
    let ts: Vec<f64> = data.samples.iter().map(|s| target(&s.ys)).collect();
    ols(&xs, &ts)
}

/// `½(y₁ − y₂)²`, unbiased for the variance of two i.i.d. draws.
pub fn half_squared_difference(ys: &[f64]) -> f64 {
    0.5 * (ys[0] - ys[1]).powi(2)
}

/// Separate linear fits of `E[Y|x]` and `E[Y²|x]`, combined as `f₂ − f₁²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndirectVariance {
    pub first: LinearModel,
    pub second: LinearModel,
}

impl IndirectVariance {
    pub fn predict(&self, x: f64) -> f64 {
        let m1 = self.first.predict(x);
        self.second.predict(x) - m1 * m1
    }
}

pub fn fit_variance_indirect(data: &ScatterDataset) -> Result<IndirectVariance> {
    let xs: Vec<f64> = data.points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = data.points.iter().map(|p| p.1).collect();
    let squares: Vec<f64> = ys.iter().map(|y| y * y).collect();
    Ok(IndirectVariance {
        first: ols(&xs, &ys)?,
        second: ols(&xs, &squares)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub amplitude: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: ClusterMode,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(ElicitError::InvalidInput(format!("n must be at least 4, got {}", self.n)));
        }
        if self.trials == 0 {
            return Err(ElicitError::InvalidInput("trials must be at least 1".into()));
        }
        if !self.amplitude.is_finite() {
            return Err(ElicitError::InvalidInput("amplitude must be finite".into()));
        }
        Ok(())
    }
}

/// Draws `(x, y)` with `x ~ U(0,1)` and `y = a sin(4πx) + Z`.
///
/// Stream: ChaCha8 seeded with `seed_from_u64`; per point one `f64` for `x`
/// then one `Open01` uniform mapped through the standard normal quantile.
pub fn generate(amplitude: f64, n: usize, seed: u64) -> ScatterDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let points = (0..n)
        .map(|_| {
            let x: f64 = rng.gen();
            let u: f64 = rng.sample(Open01);
            let z = normal.inverse_cdf(u);
            (x, amplitude * (4.0 * std::f64::consts::PI * x).sin() + z)
        })
        .collect();
    ScatterDataset { points }
}

/// Mean over an evenly spaced grid on `[0, 1]` of `(f(x) − 1)²`.
pub fn unit_variance_error<F: Fn(f64) -> f64>(f: F) -> f64 {
    let k = ERROR_GRID_POINTS;
    (0..k)
        .map(|i| {
            let x = i as f64 / (k - 1) as f64;
            (f(x) - 1.0).powi(2)
        })
        .sum::<f64>()
        / k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub mse_mean: f64,
    pub mse_median: f64,
    pub per_trial: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub config: SimConfig,
    pub methods: Vec<MethodSummary>,
}

impl SimulationResult {
    pub fn method(&self, name: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == name)
    }

    /// Rows `n,a,trials,mode,method,mse_mean,mse_median`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,a,trials,mode,method,mse_mean,mse_median\n");
        for m in &self.methods {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.config.n,
                self.config.amplitude,
                self.config.trials,
                self.config.mode,
                m.method,
                m.mse_mean,
                m.mse_median
            ));
        }
        out
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn summarize(method: &str, per_trial: Vec<f64>) -> MethodSummary {
    MethodSummary {
        method: method.to_string(),
        mse_mean: per_trial.iter().sum::<f64>() / per_trial.len() as f64,
        mse_median: median(&per_trial),
        per_trial,
    }
}

/// One trial: returns `(two-observation error, indirect error)`.
pub fn run_trial(cfg: &SimConfig, trial: usize) -> Result<(f64, f64)> {
    let data = generate(cfg.amplitude, cfg.n, cfg.seed.wrapping_add(trial as u64));
    let clustered = cluster_points(&data, 2, cfg.mode)?;
    let direct = fit_target_linear(&clustered, half_squared_difference)?;
    let indirect = fit_variance_indirect(&data)?;
    Ok((
        unit_variance_error(|x| direct.predict(x)),
        unit_variance_error(|x| indirect.predict(x)),
    ))
}

/// Trials run in parallel; trial `t` uses seed `seed + t`, so results do
/// not depend on scheduling.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimulationResult> {
    cfg.validate()?;
    let trials: Vec<(f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<_>>()?;
    let (a, b): (Vec<f64>, Vec<f64>) = trials.into_iter().unzip();
    Ok(SimulationResult {
        config: *cfg,
        methods: vec![summarize(METHOD_TWO_OBSERVATION, a), summarize(METHOD_INDIRECT, b)],
    })
}
