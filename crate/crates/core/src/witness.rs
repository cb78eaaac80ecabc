//! Certificates of non-elicitability: convex combinations of two level sets
//! whose `m`-fold product mixtures coincide. If such a pair exists, no
//! `m`-observation loss can elicit the property directly.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ElicitError, Result};
use crate::lp::{self, LpOutcome};
use crate::property::Property;
use crate::space::{simplex_grid, Distribution, OutcomeSpace};

pub const DEFAULT_LEVEL_TOL: f64 = 1e-9;
/// Bisection target for `|Γ(p) − r|`.
pub const ROOT_TOL: f64 = 1e-12;
/// Largest residual a returned certificate may have.
pub const RESIDUAL_TOL: f64 = 1e-7;
pub const DEFAULT_LINE_SCAN: usize = 10_000;
pub const DEFAULT_PLANE_SCAN: usize = 200;

const DEDUP_TOL: f64 = 1e-9;
const WEIGHT_SLACK: f64 = 1e-12;
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Distributions found on the level set `{p : Γ(p) = r}`.
#[derive(Debug, Clone)]
pub struct LevelSetSample {
    pub property: String,
    pub value: f64,
    pub members: Vec<Distribution>,
}

impl LevelSetSample {
    pub fn new(property: impl Into<String>, value: f64, members: Vec<Distribution>) -> Result<Self> {
        if members.is_empty() {
            return Err(ElicitError::DegenerateSample(format!(
                "level set {value} has no members"
            )));
        }
        Ok(Self {
            property: property.into(),
            value,
            members,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// `p^m` as a vector over `Y^m` in lexicographic tuple order.
pub fn embed_product(p: &Distribution, m: usize) -> Vec<f64> {
    p.product_vector(m)
}

fn product_of(probs: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..m {
        out = out
            .iter()
            .flat_map(|&a| probs.iter().map(move |&q| a * q))
            .collect();
    }
    out
}

fn level_gap(property: &Property, p: &Distribution, r: f64) -> Option<f64> {
    if property.is_interior_only() && !p.is_interior() {
        return None;
    }
    property
        .evaluate(p)
        .ok()
        .map(|v| v[0] - r)
        .filter(|g| g.is_finite())
}

/// Searches a scan segment `[a, b]` (in some parameterization) for a root
/// of `f`, given opposite signs at the ends.
fn bisect<F: Fn(f64) -> Option<f64>>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> Option<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm.abs() <= ROOT_TOL || b - a <= f64::EPSILON {
            return Some(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

/// Golden-section minimum of `|f|` on `[a, b]`, for roots where `f` touches
/// zero without crossing.
fn tangency<F: Fn(f64) -> Option<f64>>(f: &F, mut a: f64, mut b: f64) -> Option<f64> {
    let g = |x: f64| f(x).map_or(f64::INFINITY, f64::abs);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > 1e-13 {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = g(d);
        }
    }
    Some(0.5 * (a + b))
}

fn push_unique(found: &mut Vec<Distribution>, p: Distribution) {
    let dup = found.iter().any(|q| {
        q.probs()
            .iter()
            .zip(p.probs())
            .all(|(a, b)| (a - b).abs() <= DEDUP_TOL)
    });
    if !dup {
        found.push(p);
    }
}

fn line_point(space: &Arc<OutcomeSpace>, s: f64) -> Option<Distribution> {
    Distribution::new(Arc::clone(space), vec![1.0 - s, s]).ok()
}

fn scan_line(
    property: &Property,
    r: f64,
    space: &Arc<OutcomeSpace>,
    resolution: usize,
    level_tol: f64,
) -> Vec<Distribution> {
    let f = |s: f64| line_point(space, s).and_then(|p| level_gap(property, &p, r));
    let xs: Vec<f64> = (0..=resolution).map(|i| i as f64 / resolution as f64).collect();
    let fs: Vec<Option<f64>> = xs.iter().map(|&s| f(s)).collect();
    let mut roots = Vec::new();
    for i in 0..xs.len() {
        let Some(fi) = fs[i] else { continue };
        if fi.abs() <= level_tol {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < xs.len() {
            if let Some(fj) = fs[i + 1] {
                if fj.abs() > level_tol && (fi < 0.0) != (fj < 0.0) {
                    if let Some(s) = bisect(&f, xs[i], xs[i + 1], fi) {
                        roots.push(s);
                    }
                }
            }
        }
        if i > 0 && i + 1 < xs.len() {
            if let (Some(fp), Some(fn_)) = (fs[i - 1], fs[i + 1]) {
                let same_sign = (fp < 0.0) == (fi < 0.0) && (fn_ < 0.0) == (fi < 0.0);
                if same_sign && fi.abs() < fp.abs() && fi.abs() <= fn_.abs() {
                    if let Some(s) = tangency(&f, xs[i - 1], xs[i + 1]) {
                        roots.push(s);
                    }
                }
            }
        }
    }
    let mut found = Vec::new();
    for s in roots {
        if let Some(p) = line_point(space, s) {
            if level_gap(property, &p, r).is_some_and(|g| g.abs() <= level_tol) {
                push_unique(&mut found, p);
            }
        }
    }
    found
}

fn plane_point(space: &Arc<OutcomeSpace>, a: &[f64], b: &[f64], t: f64) -> Option<Distribution> {
    let probs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
    Distribution::new(Arc::clone(space), probs).ok()
}

fn scan_plane(
    property: &Property,
    r: f64,
    space: &Arc<OutcomeSpace>,
    resolution: usize,
    level_tol: f64,
) -> Result<Vec<Distribution>> {
    let grid = simplex_grid(space, resolution)?;
    // Map (k0, k1) to the grid position for neighbor lookups.
    let mut lookup = std::collections::HashMap::new();
    for (pos, p) in grid.iter().enumerate() {
        let k0 = (p.prob(0) * resolution as f64).round() as usize;
        let k1 = (p.prob(1) * resolution as f64).round() as usize;
        lookup.insert((k0, k1), pos);
    }
    let gaps: Vec<Option<f64>> = grid.iter().map(|p| level_gap(property, p, r)).collect();
    let mut found = Vec::new();
    for (pos, p) in grid.iter().enumerate() {
        let Some(fi) = gaps[pos] else { continue };
        if fi.abs() <= level_tol {
            push_unique(&mut found, p.clone());
            continue;
        }
        let k0 = (p.prob(0) * resolution as f64).round() as usize;
        let k1 = (p.prob(1) * resolution as f64).round() as usize;
        let neighbors = [(k0 + 1, k1), (k0, k1 + 1), (k0 + 1, k1.wrapping_sub(1))];
        for key in neighbors {
            let Some(&other) = lookup.get(&key) else { continue };
            let Some(fj) = gaps[other] else { continue };
            if fj.abs() <= level_tol || (fi < 0.0) == (fj < 0.0) {
                continue;
            }
            let (a, b) = (p.probs(), grid[other].probs());
            let f = |t: f64| plane_point(space, a, b, t).and_then(|q| level_gap(property, &q, r));
            if let Some(t) = bisect(&f, 0.0, 1.0, fi) {
                if let Some(q) = plane_point(space, a, b, t) {
                    if level_gap(property, &q, r).is_some_and(|g| g.abs() <= level_tol) {
                        push_unique(&mut found, q);
                    }
                }
            }
        }
    }
    Ok(found)
}

/// Finds distributions with `Γ(p) = r` by a dense scan plus root refinement.
///
/// Two outcomes: the line `(1 − s, s)` at `scan_resolution` steps, refined
/// by bisection on sign changes and golden-section on touching minima.
/// Three outcomes: the simplex grid at `scan_resolution`, refined by
/// bisection along grid edges with a sign change.
pub fn sample_level_set(
    property: &Property,
    r: f64,
    space: &Arc<OutcomeSpace>,
    scan_resolution: usize,
    level_tol: f64,
) -> Result<LevelSetSample> {
    if property.report_dim() != 1 {
        return Err(ElicitError::Unsupported(format!(
            "level sets need a scalar property, `{}` has dimension {}",
            property.name(),
            property.report_dim()
        )));
    }
    if scan_resolution == 0 || !(level_tol > 0.0) || !r.is_finite() {
        return Err(ElicitError::InvalidInput(
            "scan resolution and level tolerance must be positive, value finite".into(),
        ));
    }
    let members = match space.len() {
        2 => scan_line(property, r, space, scan_resolution, level_tol),
        3 => scan_plane(property, r, space, scan_resolution, level_tol)?,
        n => {
            return Err(ElicitError::Unsupported(format!(
                "level-set scans cover 2 or 3 outcomes, got {n}; restrict to a face"
            )))
        }
    };
    if members.is_empty() {
        return Err(ElicitError::ValueNotAttained {
            property: property.name().to_string(),
            value: r,
        });
    }
    LevelSetSample::new(property.name(), r, members)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessMember {
    pub p: Vec<f64>,
    pub lambda: f64,
}

/// Equal mixtures of two level sets after the `m`-fold product embedding;
/// its existence rules out a direct `m`-observation loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub m: usize,
    pub r1: f64,
    pub r2: f64,
    pub group1: Vec<WitnessMember>,
    pub group2: Vec<WitnessMember>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessOutcome {
    Found(Witness),
    /// The LP is infeasible for these samples. This says nothing about
    /// elicitability.
    NoWitnessInSample { phase1_objective: f64 },
}

impl WitnessOutcome {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Self::Found(w) => Some(w),
            Self::NoWitnessInSample { .. } => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Self::Found(_))
    }
}

/// Solves for weights `λ₁, λ₂ >= 0` summing to one with
/// `Σ λ₁ᵢ p₁ᵢ^m = Σ λ₂ⱼ p₂ⱼ^m`.
///
/// Weights are written `λ = t + s` with a shared floor `t >= 0` that is
/// maximized, so among all certificates the most balanced one is returned.
pub fn witness_search(a: &LevelSetSample, b: &LevelSetSample, m: usize) -> Result<WitnessOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(ElicitError::DegenerateSample("a level-set sample is empty".into()));
    }
    if m == 0 {
        return Err(ElicitError::InvalidInput("m must be at least 1".into()));
    }
    if a.value == b.value {
        return Err(ElicitError::InvalidInput(format!(
            "level values must differ, both are {}",
            a.value
        )));
    }
    let n = a.members[0].len();
    if a.members.iter().chain(&b.members).any(|p| p.len() != n) {
        return Err(ElicitError::InvalidInput("level-set members live on different spaces".into()));
    }
    let e1: Vec<Vec<f64>> = a.members.iter().map(|p| embed_product(p, m)).collect();
    let e2: Vec<Vec<f64>> = b.members.iter().map(|p| embed_product(p, m)).collect();
    let (k1, k2) = (e1.len(), e2.len());
    let dim = e1[0].len();

    // Columns: t, s1 (k1), s2 (k2).
    let cols = 1 + k1 + k2;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut sum1 = vec![0.0; cols];
    sum1[0] = k1 as f64;
    sum1[1..=k1].fill(1.0);
    rows.push(sum1);
    rhs.push(1.0);
    let mut sum2 = vec![0.0; cols];
    sum2[0] = k2 as f64;
    sum2[1 + k1..].fill(1.0);
    rows.push(sum2);
    rhs.push(1.0);
    for c in 0..dim - 1 {
        let mut row = vec![0.0; cols];
        let s1: f64 = e1.iter().map(|e| e[c]).sum();
        let s2: f64 = e2.iter().map(|e| e[c]).sum();
        row[0] = s1 - s2;
        for (i, e) in e1.iter().enumerate() {
            row[1 + i] = e[c];
        }
        for (j, e) in e2.iter().enumerate() {
            row[1 + k1 + j] = -e[c];
        }
        rows.push(row);
        rhs.push(0.0);
    }
    let mut objective = vec![0.0; cols];
    objective[0] = 1.0;
    let x = match lp::maximize(&rows, &rhs, &objective)? {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Infeasible { phase1_objective } => {
            return Ok(WitnessOutcome::NoWitnessInSample { phase1_objective })
        }
        LpOutcome::Unbounded => {
            return Err(ElicitError::Numerical("witness LP reported unbounded".into()))
        }
    };
    let t = x[0];
    let members = |sample: &LevelSetSample, offset: usize| -> Vec<WitnessMember> {
        sample
            .members
            .iter()
            .enumerate()
            .map(|(i, p)| WitnessMember {
                p: p.probs().to_vec(),
                lambda: t + x[offset + i],
            })
            .filter(|w| w.lambda > 0.0)
            .collect()
    };
    let mut witness = Witness {
        m,
        r1: a.value,
        r2: b.value,
        group1: members(a, 1),
        group2: members(b, 1 + k1),
        residual: f64::NAN,
    };
    witness.residual = verify_witness(&witness)?;
    if witness.residual > RESIDUAL_TOL {
        return Err(ElicitError::Numerical(format!(
            "solver returned weights with residual {:.3e}",
            witness.residual
        )));
    }
    Ok(WitnessOutcome::Found(witness))
}

fn check_group(name: &str, group: &[WitnessMember]) -> Result<()> {
    if group.is_empty() {
        return Err(ElicitError::InvalidWitness(format!("{name} is empty")));
    }
    if let Some(w) = group.iter().find(|w| !(w.lambda >= -WEIGHT_SLACK)) {
        return Err(ElicitError::InvalidWitness(format!(
            "{name} has negative weight {}",
            w.lambda
        )));
    }
    let total: f64 = group.iter().map(|w| w.lambda).sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(ElicitError::InvalidWitness(format!(
            "{name} weights sum to {total}"
        )));
    }
    Ok(())
}

/// Recomputes both mixtures from the stored members and returns the
/// ∞-norm of their difference.
pub fn verify_witness(w: &Witness) -> Result<f64> {
    check_group("group1", &w.group1)?;
    check_group("group2", &w.group2)?;
    if w.m == 0 {
        return Err(ElicitError::InvalidWitness("m must be at least 1".into()));
    }
    let n = w.group1[0].p.len();
    if n < 2 || w.group1.iter().chain(&w.group2).any(|g| g.p.len() != n) {
        return Err(ElicitError::InvalidWitness(
            "members must share one outcome space of size >= 2".into(),
        ));
    }
    let mixture = |group: &[WitnessMember]| -> Vec<f64> {
        let mut acc = vec![0.0; n.pow(w.m as u32)];
        for member in group {
            for (a, v) in acc.iter_mut().zip(product_of(&member.p, w.m)) {
                *a += member.lambda * v;
            }
        }
        acc
    };
    let (x, y) = (mixture(&w.group1), mixture(&w.group2));
    Ok(x.iter()
        .zip(&y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
