//! Finite properties from Voronoi diagrams in the product simplex over
//! `Y^m`. Each report label owns a site `x_r`; the property of `p` is the
//! set of labels whose site is nearest to `p^m`.

use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ElicitError, Result};
use crate::loss::MultiObsLoss;
use crate::space::{flat_index, simplex_grid, tuples, Distribution, OutcomeSpace};

/// Distances within this of the minimum count as ties.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SiteSetDoc", into = "SiteSetDoc")]
pub struct SiteSet {
    m: usize,
    outcome_count: usize,
    labels: Vec<String>,
    sites: Vec<Vec<f64>>,
    /// Vector `u` when the sites are collinear multiples of it.
    statistic: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiteSetDoc {
    pub m: usize,
    pub labels: Vec<String>,
    pub sites: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<Vec<f64>>,
}

impl TryFrom<SiteSetDoc> for SiteSet {
    type Error = ElicitError;

    fn try_from(doc: SiteSetDoc) -> Result<Self> {
        let mut set = SiteSet::new(doc.m, doc.labels, doc.sites)?;
        if let Some(u) = doc.statistic {
            set = set.with_statistic(u)?;
        }
        Ok(set)
    }
}

impl From<SiteSet> for SiteSetDoc {
    fn from(s: SiteSet) -> Self {
        Self {
            m: s.m,
            labels: s.labels,
            sites: s.sites,
            statistic: s.statistic,
        }
    }
}

/// The `n` with `n^m = dim`, if `n >= 2`.
fn outcome_count_for(dim: usize, m: usize) -> Option<usize> {
    let guess = (dim as f64).powf(1.0 / m as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&n| n >= 2 && n.checked_pow(m as u32) == Some(dim))
}

impl SiteSet {
    pub fn new(m: usize, labels: Vec<String>, sites: Vec<Vec<f64>>) -> Result<Self> {
        if m == 0 {
            return Err(ElicitError::InvalidInput("site sets need m >= 1".into()));
        }
        if labels.is_empty() || labels.len() != sites.len() {
            return Err(ElicitError::InvalidInput(format!(
                "{} labels for {} sites",
                labels.len(),
                sites.len()
            )));
        }
        let unique: HashSet<&String> = labels.iter().collect();
        if unique.len() != labels.len() {
            return Err(ElicitError::InvalidInput("site labels must be unique".into()));
        }
        let dim = sites[0].len();
        let outcome_count = outcome_count_for(dim, m).ok_or_else(|| {
            ElicitError::InvalidInput(format!("site dimension {dim} is not |Y|^{m} for any |Y| >= 2"))
        })?;
        if sites.iter().any(|s| s.len() != dim) {
            return Err(ElicitError::InvalidInput("sites differ in dimension".into()));
        }
        if sites.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ElicitError::InvalidInput("site coordinates must be finite".into()));
        }
        for i in 0..sites.len() {
            for j in i + 1..sites.len() {
                if sites[i] == sites[j] {
                    return Err(ElicitError::InvalidInput(format!(
                        "sites `{}` and `{}` coincide",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Self {
            m,
            outcome_count,
            labels,
            sites,
            statistic: None,
        })
    }

    fn with_statistic(mut self, u: Vec<f64>) -> Result<Self> {
        if u.len() != self.dim() {
            return Err(ElicitError::InvalidInput(format!(
                "statistic has {} entries, sites have {}",
                u.len(),
                self.dim()
            )));
        }
        self.statistic = Some(u);
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ElicitError::InvalidInput(format!("site set: {e}")))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_count
    }

    pub fn dim(&self) -> usize {
        self.sites[0].len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn sites(&self) -> &[Vec<f64>] {
        &self.sites
    }

    pub fn statistic(&self) -> Option<&[f64]> {
        self.statistic.as_deref()
    }

    fn embed(&self, p: &Distribution) -> Result<Vec<f64>> {
        if p.len() != self.outcome_count {
            return Err(ElicitError::InvalidInput(format!(
                "sites live over {} outcomes, distribution has {}",
                self.outcome_count,
                p.len()
            )));
        }
        Ok(p.product_vector(self.m))
    }

    fn squared_distances(&self, q: &[f64]) -> Vec<f64> {
        self.sites
            .iter()
            .map(|x| x.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect()
    }
}

/// Unit-vector sites over `Y`; the elicited property is the mode.
pub fn mode_sites(labels: Vec<String>) -> Result<SiteSet> {
    let n = labels.len();
    let sites = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    SiteSet::new(1, labels, sites)
}

/// `ℓ(r, ω⃗) = ‖x_r‖² − 2 x_r[ω⃗]`, with reports the label indices.
///
/// Under any `q` on `Y^m` its expectation is `‖q − x_r‖² − ‖q‖²`.
pub fn site_loss(sites: &SiteSet) -> MultiObsLoss {
    let n = sites.outcome_count;
    let k = sites.sites.len();
    let norms: Vec<f64> = sites.sites.iter().map(|x| x.iter().map(|v| v * v).sum()).collect();
    let table = sites.sites.clone();
    MultiObsLoss::new(
        format!("voronoi(m={})", sites.m),
        sites.m,
        vec![(0.0, (k.max(2) - 1) as f64)],
        Arc::new(move |r: &[f64], t: &[usize]| {
            let i = (r[0].round().max(0.0) as usize).min(k - 1);
            norms[i] - 2.0 * table[i][flat_index(t, n)]
        }),
    )
    .expect("label box is valid")
    .with_finite_reports(k)
    .with_outcome_count(n)
}

/// Indices of the nearest sites to `p^m`, ties within [`TIE_TOL`].
pub fn assign_indices(sites: &SiteSet, p: &Distribution) -> Result<Vec<usize>> {
    let d = sites.squared_distances(&sites.embed(p)?);
    let best = d.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((0..d.len()).filter(|&i| d[i] <= best + TIE_TOL).collect())
}

pub fn assign_cell(sites: &SiteSet, p: &Distribution) -> Result<Vec<String>> {
    Ok(assign_indices(sites, p)?
        .into_iter()
        .map(|i| sites.labels[i].clone())
        .collect())
}

/// Collinear sites `x_r = c_r u` whose cells are the bands
/// `t_{r−1} <= ⟨q, u⟩ <= t_r`.
///
/// Adjacent midpoints give `c_{r+1} = 2t_r/‖u‖² − c_r`, and ordering needs
/// `c_r < t_r/‖u‖²`. Writing every `c_r` as `±c₁ + k_r` turns these into
/// bounds on `c₁`; the midpoint of the feasible interval is used.
pub fn band_sites(u: &[f64], thresholds: &[f64], m: usize, labels: Vec<String>) -> Result<SiteSet> {
    if u.iter().any(|v| !v.is_finite()) {
        return Err(ElicitError::InvalidInput("statistic must be finite".into()));
    }
    let norm2: f64 = u.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return Err(ElicitError::InvalidInput("statistic vector is zero".into()));
    }
    if thresholds.is_empty() || labels.len() != thresholds.len() + 1 {
        return Err(ElicitError::InvalidInput(format!(
            "{} thresholds need {} labels, got {}",
            thresholds.len(),
            thresholds.len() + 1,
            labels.len()
        )));
    }
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) || thresholds.iter().any(|t| !t.is_finite()) {
        return Err(ElicitError::InvalidInput("thresholds must be finite and strictly increasing".into()));
    }
    let (umin, umax) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if let Some(t) = thresholds.iter().find(|&&t| !(t > umin && t < umax)) {
        return Err(ElicitError::Construction(format!(
            "threshold {t} is not attainable: the statistic ranges over [{umin}, {umax}]"
        )));
    }

    let s: Vec<f64> = thresholds.iter().map(|t| 2.0 * t / norm2).collect();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let (mut lo_from, mut hi_from) = (0, 0);
    // c_r = sign_r · c₁ + k_r
    let (mut sign, mut k) = (1.0, 0.0);
    for (r, &sr) in s.iter().enumerate() {
        let bound = sr / 2.0 - k;
        if sign > 0.0 {
            if bound < hi {
                hi = bound;
                hi_from = r;
            }
        } else if -bound > lo {
            lo = -bound;
            lo_from = r;
        }
        k = sr - k;
        sign = -sign;
    }
    if !(lo < hi) {
        return Err(ElicitError::Construction(format!(
            "no site spacing realizes these bands: ordering at threshold {} needs c1 > {lo}, at threshold {} needs c1 < {hi}",
            lo_from + 1,
            hi_from + 1
        )));
    }
    let c1 = if lo.is_finite() { 0.5 * (lo + hi) } else { hi - 1.0 };
    let mut coeffs = vec![c1];
    for &sr in &s {
        let prev = *coeffs.last().expect("nonempty");
        coeffs.push(sr - prev);
    }
    let sites = coeffs
        .iter()
        .map(|c| u.iter().map(|v| c * v).collect())
        .collect();
    SiteSet::new(m, labels, sites)?.with_statistic(u.to_vec())
}

/// `u(ω⃗) = 1{ω₁ = … = ω_m}`, so `⟨p^m, u⟩ = Σ p(ω)^m`.
pub fn two_norm_statistic(outcome_count: usize, m: usize) -> Vec<f64> {
    tuples(outcome_count, m)
        .map(|t| f64::from(u8::from(t.iter().all(|&w| w == t[0]))))
        .collect()
}

/// `u(ω₁, ω₂) = ½(v(ω₁) − v(ω₂))²`, so `⟨p², u⟩ = Var(p)`.
pub fn variance_statistic(space: &OutcomeSpace) -> Vec<f64> {
    let v = space.values();
    tuples(v.len(), 2)
        .map(|t| 0.5 * (v[t[0]] - v[t[1]]).powi(2))
        .collect()
}

pub fn band_labels(count: usize) -> Vec<String> {
    match count {
        2 => vec!["low".into(), "high".into()],
        3 => vec!["low".into(), "medium".into(), "high".into()],
        _ => (0..count).map(|i| format!("band{i}")).collect(),
    }
}

/// Per-distribution rows `p_0..p_{n−1},stat,labels` over the simplex grid.
///
/// `stat` is `⟨p^m, u⟩` for band sites and the squared distance to the
/// nearest site otherwise. Tied labels are joined with `|`.
pub fn cell_map(sites: &SiteSet, space: &Arc<OutcomeSpace>, resolution: usize) -> Result<String> {
    let grid = simplex_grid(space, resolution)?;
    let rows: Vec<Result<String>> = grid
        .par_iter()
        .map(|p| {
            let q = sites.embed(p)?;
            let d = sites.squared_distances(&q);
            let stat = match sites.statistic() {
                Some(u) => u.iter().zip(&q).map(|(a, b)| a * b).sum(),
                None => d.iter().copied().fold(f64::INFINITY, f64::min),
            };
            let labels = assign_cell(sites, p)?.join("|");
            let probs: Vec<String> = p.probs().iter().map(f64::to_string).collect();
            Ok(format!("{},{},{}\n", probs.join(","), stat, labels))
        })
        .collect();
    let header: Vec<String> = (0..space.len()).map(|i| format!("p_{i}")).collect();
    let mut out = format!("{},stat,labels\n", header.join(","));
    for row in rows {
        out.push_str(&row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::expected_loss;
    use crate::verifier::minimize_report;

    fn space(n: usize) -> Arc<OutcomeSpace> {
        Arc::new(OutcomeSpace::categorical(n).unwrap())
    }

    fn dist(probs: &[f64]) -> Distribution {
        Distribution::new(space(probs.len()), probs.to_vec()).unwrap()
    }

    #[test]
    fn mode_cells() {
        let sites = mode_sites(vec!["A".into(), "B".into()]).unwrap();
        assert_eq!(assign_cell(&sites, &dist(&[0.7, 0.3])).unwrap(), vec!["A"]);
        assert_eq!(assign_cell(&sites, &dist(&[0.5, 0.5])).unwrap(), vec!["A", "B"]);
        let loss = site_loss(&sites);
        assert_eq!(minimize_report(&loss, &dist(&[0.2, 0.8])).unwrap(), vec![1.0]);
        let csv = cell_map(&sites, &space(2), 2).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn two_norm_bands() {
        let u = two_norm_statistic(3, 2);
        let sites = band_sites(&u, &[0.36, 0.5], 2, band_labels(3)).unwrap();
        assert_eq!(assign_cell(&sites, &dist(&[0.5, 0.25, 0.25])).unwrap(), vec!["medium"]);
        assert_eq!(assign_cell(&sites, &dist(&[1.0 / 3.0; 3])).unwrap(), vec!["low"]);
        assert_eq!(assign_cell(&sites, &dist(&[1.0, 0.0, 0.0])).unwrap(), vec!["high"]);
    }

    #[test]
    fn expected_site_loss_identity() {
        let u = two_norm_statistic(3, 2);
        let sites = band_sites(&u, &[0.36, 0.5], 2, band_labels(3)).unwrap();
        let loss = site_loss(&sites);
        let p = dist(&[0.2, 0.3, 0.5]);
        let q = p.product_vector(2);
        let qq: f64 = q.iter().map(|v| v * v).sum();
        for (i, x) in sites.sites().iter().enumerate() {
            let d: f64 = x.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum();
            let e = expected_loss(&loss, &[i as f64], &p).unwrap();
            assert!((e - (d - qq)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_bands_and_failures() {
        let u = two_norm_statistic(2, 2);
        let sites = band_sites(&u, &[0.6], 2, band_labels(2)).unwrap();
        assert_eq!(assign_cell(&sites, &dist(&[0.5, 0.5])).unwrap(), vec!["low"]);
        assert_eq!(assign_cell(&sites, &dist(&[0.9, 0.1])).unwrap(), vec!["high"]);
        assert!(band_sites(&u, &[1.5], 2, band_labels(2)).is_err());
        assert!(band_sites(&u, &[0.6, 0.5], 2, band_labels(3)).is_err());
        assert!(SiteSet::new(1, vec!["a".into(), "b".into()], vec![vec![1.0, 0.0], vec![1.0, 0.0]]).is_err());
        assert!(SiteSet::new(2, vec!["a".into()], vec![vec![1.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"m":1,"labels":["A","B"],"sites":[[1,0],[0,1]]}"#;
        let sites = SiteSet::from_json(text).unwrap();
        assert_eq!(sites.outcome_count(), 2);
        let back = serde_json::to_string(&sites).unwrap();
        assert_eq!(SiteSet::from_json(&back).unwrap(), sites);
    }
}
