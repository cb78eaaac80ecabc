//! Numerical certification that a loss elicits a property on a grid of
//! distributions, and frontier scans over `(d, m)` cells.
//!
//! A pass is grid evidence at the stated tolerance, not a proof.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{self, claimed_refutations, Construction, PropertyName};
use crate::error::{ElicitError, Result};
use crate::loss::{ExpectedLoss, MultiObsLoss};
use crate::property::{Link, Property};
use crate::space::{interior_grid, simplex_grid, Distribution, OutcomeSpace};
use crate::witness::{
    sample_level_set, witness_search, Witness, WitnessOutcome, DEFAULT_LEVEL_TOL,
    DEFAULT_LINE_SCAN, DEFAULT_PLANE_SCAN,
};

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_COARSE_GRID: usize = 512;
/// Spread below which the objective is treated as flat.
pub const FLAT_SPREAD: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeOptions {
    pub coarse_grid: usize,
    pub width_tol: f64,
    pub sweeps: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            coarse_grid: DEFAULT_COARSE_GRID,
            width_tol: 1e-8,
            sweeps: 20,
        }
    }
}

/// Coarse grid then golden section on the best grid cell's neighbors.
fn minimize_line<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, opts: &MinimizeOptions) -> Result<f64> {
    let g = opts.coarse_grid.max(3);
    let step = (hi - lo) / (g - 1) as f64;
    let xs: Vec<f64> = (0..g).map(|i| if i == g - 1 { hi } else { lo + step * i as f64 }).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(ElicitError::Numerical(format!(
            "expected loss is {} at report {}",
            vals[i], xs[i]
        )));
    }
    let (mut best, mut vmin, mut vmax) = (0, f64::INFINITY, f64::NEG_INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v < vmin {
            vmin = v;
            best = i;
        }
        vmax = vmax.max(v);
    }
    if vmax - vmin < FLAT_SPREAD {
        return Err(ElicitError::NonUnique { spread: vmax - vmin });
    }
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(g - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > opts.width_tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    Ok(if f(x) <= vals[best] { x } else { xs[best] })
}

/// Locates `argmin_r E_{p^m}[ℓ(r, ω⃗)]` over the loss's report box.
pub fn minimize_report(loss: &MultiObsLoss, p: &Distribution) -> Result<Vec<f64>> {
    minimize_report_with(loss, p, &MinimizeOptions::default())
}

pub fn minimize_report_with(
    loss: &MultiObsLoss,
    p: &Distribution,
    opts: &MinimizeOptions,
) -> Result<Vec<f64>> {
    loss.check_domain(p)?;
    let objective = loss.under(p)?;
    if let Some(k) = loss.finite_reports() {
        return minimize_finite(&objective, k);
    }
    let bx = loss.report_box();
    match loss.report_dim() {
        1 => Ok(vec![minimize_line(|x| objective.value(&[x]), bx[0].0, bx[0].1, opts)?]),
        2 => minimize_plane(&objective, bx, opts),
        d => Err(ElicitError::Unsupported(format!(
            "report minimization covers d <= 2, loss `{}` has d = {d}",
            loss.name()
        ))),
    }
}

fn minimize_finite(objective: &ExpectedLoss<'_>, k: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = (0..k).map(|r| objective.value(&[r as f64])).collect();
    let (vmin, vmax) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if vmax - vmin < FLAT_SPREAD {
        return Err(ElicitError::NonUnique { spread: vmax - vmin });
    }
    let best = vals.iter().position(|&v| v == vmin).unwrap_or(0);
    Ok(vec![best as f64])
}

/// Coordinate alternation: each sweep minimizes along one coordinate with
/// the other fixed, starting from the box center.
fn minimize_plane(
    objective: &ExpectedLoss<'_>,
    bx: &[(f64, f64)],
    opts: &MinimizeOptions,
) -> Result<Vec<f64>> {
    let mut r = vec![0.5 * (bx[0].0 + bx[0].1), 0.5 * (bx[1].0 + bx[1].1)];
    for _ in 0..opts.sweeps.max(1) {
        let before = r.clone();
        for coord in 0..2 {
            let fixed = r.clone();
            r[coord] = minimize_line(
                |x| {
                    let mut probe = fixed.clone();
                    probe[coord] = x;
                    objective.value(&probe)
                },
                bx[coord].0,
                bx[coord].1,
                opts,
            )?;
        }
        if before == r {
            break;
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseResult {
    pub p: Vec<f64>,
    pub report: Vec<f64>,
    /// Property value implied by the report (after the link).
    pub predicted: Vec<f64>,
    pub target: Vec<f64>,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub loss: String,
    pub property: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<String>,
    pub resolution: usize,
    pub tolerance: f64,
    pub evaluated: usize,
    /// Grid points outside a declared domain.
    pub skipped: usize,
    pub worst_error: f64,
    pub pass: bool,
    pub cases: Vec<CaseResult>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn is_domain_error(e: &ElicitError) -> bool {
    matches!(e, ElicitError::OutsideDomain { .. })
}

/// The link the property itself declares, when its auxiliary dimension
/// matches the loss.
fn default_link<'a>(loss: &MultiObsLoss, property: &'a Property) -> Option<&'a Link> {
    property.link().filter(|l| l.aux_dim() == loss.report_dim())
}

fn grid_for(property: &Property, space: &Arc<OutcomeSpace>, resolution: usize) -> Result<Vec<Distribution>> {
    if property.is_interior_only() {
        interior_grid(space, resolution)
    } else {
        simplex_grid(space, resolution)
    }
}

/// Verifies on the simplex grid (interior grid for interior-only
/// properties), routing the minimizer through the property's link if it
/// declares one of matching dimension.
pub fn verify_elicits(
    loss: &MultiObsLoss,
    property: &Property,
    space: &Arc<OutcomeSpace>,
    resolution: usize,
    tol: f64,
) -> Result<VerificationReport> {
    verify_with_link(loss, property, default_link(loss, property), space, resolution, tol)
}

pub fn verify_with_link(
    loss: &MultiObsLoss,
    property: &Property,
    link: Option<&Link>,
    space: &Arc<OutcomeSpace>,
    resolution: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let grid = grid_for(property, space, resolution)?;
    verify_on(loss, property, link, &grid, resolution, tol)
}

/// Verifies over an explicit list of distributions. Cases are reported in
/// lexicographic order of `p`, so the input order does not matter.
pub fn verify_on(
    loss: &MultiObsLoss,
    property: &Property,
    link: Option<&Link>,
    dists: &[Distribution],
    resolution: usize,
    tol: f64,
) -> Result<VerificationReport> {
    if !(tol > 0.0) {
        return Err(ElicitError::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let expected_dim = link.map_or(property.report_dim(), Link::aux_dim);
    if expected_dim != loss.report_dim() {
        return Err(ElicitError::ReportDimension {
            expected: expected_dim,
            got: loss.report_dim(),
        });
    }
    let outcomes: Vec<Result<Option<CaseResult>>> = dists
        .par_iter()
        .map(|p| {
            let target = match property.evaluate(p) {
                Ok(t) => t,
                Err(e) if is_domain_error(&e) => return Ok(None),
                Err(e) => return Err(e),
            };
            let report = match minimize_report(loss, p) {
                Ok(r) => r,
                Err(e) if is_domain_error(&e) => return Ok(None),
                Err(e) => return Err(e),
            };
            let predicted = match link {
                Some(l) => l.apply(&report),
                None => report.clone(),
            };
            let error = predicted
                .iter()
                .zip(&target)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, |acc: f64, e| if e.is_nan() { f64::INFINITY } else { acc.max(e) });
            Ok(Some(CaseResult {
                p: p.probs().to_vec(),
                report,
                predicted,
                target,
                error,
            }))
        })
        .collect();
    let mut cases = Vec::with_capacity(outcomes.len());
    let mut skipped = 0;
    for o in outcomes {
        match o? {
            Some(c) => cases.push(c),
            None => skipped += 1,
        }
    }
    cases.sort_by(|a, b| lex_cmp(&a.p, &b.p));
    let worst_error = cases.iter().map(|c| c.error).fold(0.0, f64::max);
    Ok(VerificationReport {
        loss: loss.name().to_string(),
        property: property.name().to_string(),
        link: link.map(|l| l.name().to_string()),
        resolution,
        tolerance: tol,
        evaluated: cases.len(),
        skipped,
        worst_error,
        pass: !cases.is_empty() && worst_error <= tol,
        cases,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentificationReport {
    pub loss: String,
    pub property: String,
    pub resolution: usize,
    pub tolerance: f64,
    pub evaluated: usize,
    pub skipped: usize,
    /// Worst `‖E[V(Γ(p), ω⃗)]‖∞` over the grid.
    pub worst_error: f64,
    /// Smallest `‖E[V]‖∞` at the offset reports `Γ(p) ± 10·tol`.
    pub min_offset_error: f64,
    pub pass: bool,
}

/// Checks `E[V(Γ(p), ω⃗)] ≈ 0` on the grid, and that `V` is not near zero at
/// reports shifted by `10·tol` in each coordinate.
pub fn check_identification(
    loss: &MultiObsLoss,
    property: &Property,
    space: &Arc<OutcomeSpace>,
    resolution: usize,
    tol: f64,
) -> Result<IdentificationReport> {
    check_identification_with_link(loss, property, default_link(loss, property), space, resolution, tol)
}

/// As [`check_identification`], with `V` evaluated at the link's auxiliary
/// value `Γ̂(p)` when a link is given.
pub fn check_identification_with_link(
    loss: &MultiObsLoss,
    property: &Property,
    link: Option<&Link>,
    space: &Arc<OutcomeSpace>,
    resolution: usize,
    tol: f64,
) -> Result<IdentificationReport> {
    if !loss.has_identification() {
        return Err(ElicitError::MissingIdentification(loss.name().to_string()));
    }
    if !(tol > 0.0) {
        return Err(ElicitError::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let grid = grid_for(property, space, resolution)?;
    let rows: Vec<Result<Option<(f64, f64)>>> = grid
        .par_iter()
        .map(|p| {
            let target = match link {
                Some(l) => l.auxiliary(p),
                None => property.evaluate(p),
            };
            let target = match target {
                Ok(t) => t,
                Err(e) if is_domain_error(&e) => return Ok(None),
                Err(e) => return Err(e),
            };
            if target.len() != loss.report_dim() {
                return Err(ElicitError::ReportDimension {
                    expected: loss.report_dim(),
                    got: target.len(),
                });
            }
            match loss.check_domain(p) {
                Err(e) if is_domain_error(&e) => return Ok(None),
                other => other?,
            }
            let objective = loss.under(p)?;
            let norm = |v: Vec<f64>| v.iter().fold(0.0, |a: f64, x| a.max(x.abs()));
            let at_target = norm(objective.identification(&target)?);
            let mut offset = f64::INFINITY;
            for coord in 0..target.len() {
                for sign in [-1.0, 1.0] {
                    let mut r = target.clone();
                    r[coord] += sign * 10.0 * tol;
                    offset = offset.min(norm(objective.identification(&r)?));
                }
            }
            Ok(Some((at_target, offset)))
        })
        .collect();
    let (mut worst, mut min_offset, mut evaluated, mut skipped) = (0.0f64, f64::INFINITY, 0, 0);
    for row in rows {
        match row? {
            Some((z, o)) => {
                worst = worst.max(if z.is_nan() { f64::INFINITY } else { z });
                min_offset = min_offset.min(o);
                evaluated += 1;
            }
            None => skipped += 1,
        }
    }
    Ok(IdentificationReport {
        loss: loss.name().to_string(),
        property: property.name().to_string(),
        resolution,
        tolerance: tol,
        evaluated,
        skipped,
        worst_error: worst,
        min_offset_error: min_offset,
        pass: evaluated > 0 && worst <= tol && min_offset > tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Verified,
    Refuted,
    Unknown,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Verified => "verified",
            Self::Refuted => "refuted",
            Self::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierCell {
    pub d: usize,
    pub m: usize,
    pub status: CellStatus,
    pub evidence: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierOptions {
    pub max_d: usize,
    pub max_m: usize,
    pub resolution: usize,
    pub tol: f64,
    pub line_scan: usize,
    pub plane_scan: usize,
}

impl Default for FrontierOptions {
    fn default() -> Self {
        Self {
            max_d: 2,
            max_m: 2,
            resolution: 10,
            tol: DEFAULT_TOL,
            line_scan: DEFAULT_LINE_SCAN,
            plane_scan: DEFAULT_PLANE_SCAN,
        }
    }
}

/// Level pairs tried per family, as fractions of the attained range.
const LEVEL_FRACTIONS: [(f64, f64); 3] = [(0.4, 0.6), (0.3, 0.7), (0.2, 0.8)];

fn attained_range(property: &Property, space: &Arc<OutcomeSpace>, opts: &FrontierOptions) -> Option<(f64, f64)> {
    let points: Vec<Distribution> = match space.len() {
        2 => (0..=opts.line_scan)
            .filter_map(|i| {
                let s = i as f64 / opts.line_scan as f64;
                Distribution::new(Arc::clone(space), vec![1.0 - s, s]).ok()
            })
            .collect(),
        _ => simplex_grid(space, opts.plane_scan).ok()?,
    };
    let (lo, hi) = points
        .iter()
        .filter(|p| !property.is_interior_only() || p.is_interior())
        .filter_map(|p| property.evaluate_scalar(p).ok())
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    (hi > lo).then_some((lo, hi))
}

/// Searches for a non-elicitability witness at `(1, m)` on the two-outcome
/// face, then the three-outcome face.
pub fn search_refutation(
    property: &Property,
    space: &OutcomeSpace,
    m: usize,
    opts: &FrontierOptions,
) -> Result<Option<Witness>> {
    for k in [2, 3] {
        if k > space.len() {
            break;
        }
        let face = Arc::new(space.face(k)?);
        let Some((lo, hi)) = attained_range(property, &face, opts) else {
            continue;
        };
        let scan = if k == 2 { opts.line_scan } else { opts.plane_scan };
        for (f1, f2) in LEVEL_FRACTIONS {
            let (r1, r2) = (lo + f1 * (hi - lo), lo + f2 * (hi - lo));
            let (Ok(a), Ok(b)) = (
                sample_level_set(property, r1, &face, scan, DEFAULT_LEVEL_TOL),
                sample_level_set(property, r2, &face, scan, DEFAULT_LEVEL_TOL),
            ) else {
                continue;
            };
            if let WitnessOutcome::Found(w) = witness_search(&a, &b, m)? {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

fn verify_construction(
    c: &Construction,
    property: &Property,
    space: &Arc<OutcomeSpace>,
    opts: &FrontierOptions,
) -> Result<VerificationReport> {
    let link = c.link.as_ref();
    verify_with_link(&c.loss, property, link, space, opts.resolution, opts.tol)
}

/// Fills the `max_d × max_m` table for a catalog property.
///
/// Catalog constructions are verified first and propagated to all cells
/// with larger `d` or `m`. Cells where `(1, m)` is claimed impossible are
/// then searched for a witness. Everything else stays unknown.
pub fn frontier_scan(
    name: PropertyName,
    space: &Arc<OutcomeSpace>,
    opts: &FrontierOptions,
) -> Result<Vec<FrontierCell>> {
    let property = catalog::property(name);
    let constructions: Vec<Construction> = catalog::constructions(name, space)?
        .into_iter()
        .filter(|c| c.d <= opts.max_d && c.m <= opts.max_m)
        .collect();
    let reports: Vec<Result<VerificationReport>> = constructions
        .par_iter()
        .map(|c| verify_construction(c, &property, space, opts))
        .collect();

    let idx = |d: usize, m: usize| (d - 1) * opts.max_m + (m - 1);
    let mut cells: Vec<FrontierCell> = (1..=opts.max_d)
        .flat_map(|d| {
            (1..=opts.max_m).map(move |m| FrontierCell {
                d,
                m,
                status: CellStatus::Unknown,
                evidence: "none".into(),
                report: None,
                witness: None,
            })
        })
        .collect();

    let mut sources = Vec::new();
    for (c, report) in constructions.iter().zip(reports) {
        let report = report?;
        let cell = &mut cells[idx(c.d, c.m)];
        if report.pass {
            cell.status = CellStatus::Verified;
            cell.evidence = format!("verify:{}", c.loss.name());
            cell.report = Some(report);
            sources.push((c.d, c.m));
        } else if cell.status != CellStatus::Verified {
            cell.evidence = format!("verify_failed:{} worst_error={:e}", c.loss.name(), report.worst_error);
            cell.report = Some(report);
        }
    }
    for &(d0, m0) in &sources {
        let report = cells[idx(d0, m0)].report.clone();
        for d in d0..=opts.max_d {
            for m in m0..=opts.max_m {
                let cell = &mut cells[idx(d, m)];
                if cell.status != CellStatus::Verified {
                    cell.status = CellStatus::Verified;
                    cell.evidence = format!("implied:({d0},{m0})");
                    cell.report = report.clone();
                }
            }
        }
    }

    let claimed: Vec<usize> = if opts.max_d >= 1 {
        claimed_refutations(name, opts.max_m)
            .into_iter()
            .filter(|&m| cells[idx(1, m)].status != CellStatus::Verified)
            .collect()
    } else {
        Vec::new()
    };
    let found: Vec<Result<Option<Witness>>> = claimed
        .par_iter()
        .map(|&m| search_refutation(&property, space, m, opts))
        .collect();
    for (&m, w) in claimed.iter().zip(found) {
        let cell = &mut cells[idx(1, m)];
        match w? {
            Some(w) => {
                cell.status = CellStatus::Refuted;
                cell.evidence = format!("witness:m={},r1={},r2={}", w.m, w.r1, w.r2);
                cell.witness = Some(w);
            }
            None => cell.evidence = "no_witness_in_sample".into(),
        }
    }
    Ok(cells)
}

/// Frontier table as CSV with header `d,m,status,evidence`.
pub fn frontier_csv(cells: &[FrontierCell]) -> String {
    let mut out = String::from("d,m,status,evidence\n");
    for c in cells {
        let evidence = if c.evidence.contains(',') || c.evidence.contains('"') {
            format!("\"{}\"", c.evidence.replace('"', "\"\""))
        } else {
            c.evidence.clone()
        };
        out.push_str(&format!("{},{},{},{}\n", c.d, c.m, c.status, evidence));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{knorm_loss, named_loss, named_property};

    fn space(values: &[f64]) -> Arc<OutcomeSpace> {
        Arc::new(OutcomeSpace::from_values(values).unwrap())
    }

    #[test]
    fn minimizer_examples() {
        let s = space(&[0.0, 1.0]);
        let var = named_loss("variance2", &s).unwrap();
        let r = minimize_report(&var, &Distribution::uniform(Arc::clone(&s))).unwrap();
        assert!((r[0] - 0.25).abs() < 1e-6);

        let s3 = space(&[0.0, 1.0, 2.0]);
        let p = Distribution::new(Arc::clone(&s3), vec![0.5, 0.25, 0.25]).unwrap();
        let r = minimize_report(&knorm_loss(2).unwrap(), &p).unwrap();
        assert!((r[0] - 0.375).abs() < 1e-6);

        let s = space(&[1.0, 3.0]);
        let mean = named_loss("mean1", &s).unwrap();
        let r = minimize_report(&mean, &Distribution::point_mass(s, 1).unwrap()).unwrap();
        assert!((r[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn flat_objective_is_non_unique() {
        let s = space(&[0.0, 1.0]);
        let loss = MultiObsLoss::new("flat", 1, vec![(0.0, 1.0)], Arc::new(|_: &[f64], _: &[usize]| 1.0)).unwrap();
        assert!(matches!(
            minimize_report(&loss, &Distribution::uniform(s)),
            Err(ElicitError::NonUnique { .. })
        ));
    }

    #[test]
    fn verification_examples() {
        let s = space(&[0.0, 1.0, 2.0, 3.0]);
        let report = verify_elicits(
            &named_loss("variance2", &s).unwrap(),
            &named_property("variance").unwrap(),
            &s,
            10,
            1e-3,
        )
        .unwrap();
        assert!(report.pass, "worst {}", report.worst_error);
        assert_eq!(report.evaluated, 286);

        let s2 = space(&[0.0, 1.0]);
        let report = verify_elicits(
            &named_loss("mean1", &s2).unwrap(),
            &named_property("variance").unwrap(),
            &s2,
            10,
            1e-3,
        )
        .unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn identification_examples() {
        let s = space(&[1.0, 2.0, 3.0]);
        let var = named_property("variance").unwrap();
        assert!(check_identification(&named_loss("variance2", &s).unwrap(), &var, &s, 10, 1e-6).unwrap().pass);
        let disp = named_property("dispersion").unwrap();
        assert!(check_identification(&named_loss("dispersion2", &s).unwrap(), &disp, &s, 10, 1e-6).unwrap().pass);
        assert!(!check_identification(&named_loss("mean1", &s).unwrap(), &var, &s, 10, 1e-6).unwrap().pass);
    }

    #[test]
    fn variance_frontier() {
        let cells = frontier_scan(PropertyName::Variance, &space(&[0.0, 1.0, 2.0]), &FrontierOptions::default()).unwrap();
        let statuses: Vec<(usize, usize, CellStatus)> = cells.iter().map(|c| (c.d, c.m, c.status)).collect();
        assert_eq!(
            statuses,
            vec![
                (1, 1, CellStatus::Refuted),
                (1, 2, CellStatus::Verified),
                (2, 1, CellStatus::Verified),
                (2, 2, CellStatus::Verified),
            ]
        );
        assert!(frontier_csv(&cells).starts_with("d,m,status,evidence\n"));
    }
}
