//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the library routine it is compared against: sums run
//! over a hand-rolled odometer, minimizers are plain grid scans, and LP
//! feasibility is decided by searching a grid of mixture weights.

#![allow(dead_code)]

use std::sync::Arc;

use elicit::catalog::estimator::{ratio_loss, squared_mean_estimator, variance_estimator};
use elicit::catalog::{self, central_moment_loss, LossName};
use elicit::regression::{cluster_points, fit_target_linear, generate, half_squared_difference, ClusterMode};
use elicit::verifier::minimize_report;
use elicit::voronoi::{band_labels, band_sites, site_loss, two_norm_statistic};
use elicit::witness::{witness_search, LevelSetSample};
use elicit::{Distribution, MultiObsLoss, OutcomeSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn space(values: &[f64]) -> Arc<OutcomeSpace> {
    Arc::new(OutcomeSpace::from_values(values).unwrap())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random distribution with every probability at least `floor / n`-ish.
pub fn random_dist(rng: &mut ChaCha8Rng, space: &Arc<OutcomeSpace>, floor: f64) -> Distribution {
    let raw: Vec<f64> = (0..space.len()).map(|_| floor + rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    Distribution::new(Arc::clone(space), raw.iter().map(|v| v / total).collect()).unwrap()
}

/// Random point of the weight simplex with `k` entries.
pub fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| 0.1 + rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

// ---------------------------------------------------------------------------
// Expected loss by enumeration

/// `Σ_{ω⃗ ∈ Y^m} ∏ p(ωᵢ) ℓ(r, ω⃗)` with an explicit odometer.
pub fn naive_expected_loss(loss: &MultiObsLoss, report: &[f64], p: &Distribution) -> f64 {
    let n = p.len();
    let m = loss.obs_count();
    let mut digits = vec![0usize; m];
    let mut total = 0.0;
    loop {
        let weight: f64 = digits.iter().map(|&i| p.probs()[i]).product();
        total += weight * loss.eval(report, &digits);
        let mut pos = m;
        loop {
            if pos == 0 {
                return total;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < n {
                break;
            }
            digits[pos] = 0;
        }
    }
}

/// Catalog losses paired with the outcome values they are exercised on.
pub fn catalog_losses() -> Vec<(MultiObsLoss, Arc<OutcomeSpace>)> {
    let s012 = space(&[0.0, 1.0, 2.0]);
    let s123 = space(&[1.0, 2.0, 3.0]);
    let s01 = space(&[0.0, 1.0]);
    let mut out = Vec::new();
    for name in [LossName::Mean1, LossName::Variance2, LossName::Moments, LossName::Brier] {
        out.push((catalog::loss(name, &s012).unwrap(), Arc::clone(&s012)));
    }
    out.push((catalog::loss(LossName::Dispersion2, &s123).unwrap(), Arc::clone(&s123)));
    out.push((catalog::loss(LossName::Sharpe2, &s123).unwrap(), Arc::clone(&s123)));
    for k in [2, 3] {
        out.push((catalog::loss(LossName::KNorm(k), &s012).unwrap(), Arc::clone(&s012)));
    }
    for n in [2, 3, 4] {
        out.push((central_moment_loss(&s01, n), Arc::clone(&s01)));
    }
    out.push((central_moment_loss(&s012, 3), Arc::clone(&s012)));
    let u = two_norm_statistic(3, 2);
    let sites = band_sites(&u, &[0.36, 0.5], 2, band_labels(3)).unwrap();
    out.push((site_loss(&sites), Arc::clone(&s012)));
    out
}

/// Worst absolute gap between `expected_loss` and enumeration.
pub fn expected_loss_gap(cases_per_loss: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for (loss, sp) in catalog_losses() {
        for case in 0..cases_per_loss {
            let p = if case == 0 {
                Distribution::point_mass(Arc::clone(&sp), 0).unwrap()
            } else {
                random_dist(&mut rng, &sp, 0.0)
            };
            let report: Vec<f64> = if let Some(k) = loss.finite_reports() {
                vec![rng.gen_range(0..k) as f64]
            } else {
                loss.report_box()
                    .iter()
                    .map(|&(lo, hi)| lo + rng.gen::<f64>() * (hi - lo).min(10.0))
                    .collect()
            };
            let fast = elicit::expected_loss(&loss, &report, &p).unwrap();
            let slow = naive_expected_loss(&loss, &report, &p);
            worst = worst.max((fast - slow).abs());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Minimizers by grid scan

/// Exhaustive argmin over `points` evenly spaced values on `[lo, hi]`.
pub fn dense_argmin_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> f64 {
    let mut best = (f64::INFINITY, lo);
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// Repeated `side × side` grid scans, each zoomed around the previous best.
pub fn zoom_argmin_2d<F: Fn(f64, f64) -> f64>(f: F, bx: [(f64, f64); 2], side: usize, rounds: usize) -> [f64; 2] {
    let (mut lo, mut hi) = ([bx[0].0, bx[1].0], [bx[0].1, bx[1].1]);
    let mut best = [lo[0], lo[1]];
    for _ in 0..rounds {
        let step = [(hi[0] - lo[0]) / (side - 1) as f64, (hi[1] - lo[1]) / (side - 1) as f64];
        let mut best_v = f64::INFINITY;
        for i in 0..side {
            for j in 0..side {
                let x = [lo[0] + step[0] * i as f64, lo[1] + step[1] * j as f64];
                let v = f(x[0], x[1]);
                if v < best_v {
                    best_v = v;
                    best = x;
                }
            }
        }
        for c in 0..2 {
            lo[c] = (best[c] - 8.0 * step[c]).max(bx[c].0);
            hi[c] = (best[c] + 8.0 * step[c]).min(bx[c].1);
        }
    }
    best
}

pub const DENSE_POINTS: usize = 100_000;

/// Exhaustive scan at [`DENSE_POINTS`], then a second scan of the same size
/// over the four grid cells around the winner. The second stage brings the
/// step below 1e-5 on any box narrower than 2.5e4.
pub fn two_stage_argmin_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let coarse = dense_argmin_1d(&f, lo, hi, DENSE_POINTS);
    let step = (hi - lo) / (DENSE_POINTS - 1) as f64;
    dense_argmin_1d(&f, (coarse - 2.0 * step).max(lo), (coarse + 2.0 * step).min(hi), DENSE_POINTS)
}

/// Every catalog loss, plus a Sharpe² loss on {0,1} with a narrow box.
pub fn minimizer_oracle_losses() -> Vec<(MultiObsLoss, Arc<OutcomeSpace>)> {
    let s01 = space(&[0.0, 1.0]);
    let mut out = catalog_losses();
    let sharpe = ratio_loss(&squared_mean_estimator(&s01), &variance_estimator(&s01), (0.0, 2.0)).unwrap();
    out.push((sharpe, s01));
    out
}

fn oracle_dists(rng: &mut ChaCha8Rng, loss: &MultiObsLoss, sp: &Arc<OutcomeSpace>, count: usize) -> Vec<Distribution> {
    let mut out = Vec::new();
    while out.len() < count {
        let p = if loss.name().starts_with("ratio") && sp.len() == 2 {
            let q = 0.05 + 0.55 * rng.gen::<f64>();
            Distribution::new(Arc::clone(sp), vec![1.0 - q, q]).unwrap()
        } else {
            random_dist(rng, sp, 0.05)
        };
        if loss.check_domain(&p).is_ok() {
            out.push(p);
        }
    }
    out
}

/// Worst gap between `minimize_report` and grid scans. Finite-report losses
/// are compared by enumerating every report.
pub fn minimizer_gap(cases_per_loss: usize, seed: u64) -> (f64, usize) {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (loss, sp) in minimizer_oracle_losses() {
        let b = loss.report_box().to_vec();
        for p in oracle_dists(&mut rng, &loss, &sp, cases_per_loss) {
            let got = minimize_report(&loss, &p).unwrap();
            let oracle: Vec<f64> = if let Some(k) = loss.finite_reports() {
                let values: Vec<f64> = (0..k).map(|i| naive_expected_loss(&loss, &[i as f64], &p)).collect();
                let best = values.iter().copied().fold(f64::INFINITY, f64::min);
                vec![values.iter().position(|&v| v == best).unwrap() as f64]
            } else if b.len() == 1 {
                vec![two_stage_argmin_1d(|x| naive_expected_loss(&loss, &[x], &p), b[0].0, b[0].1)]
            } else {
                let ev = loss.under(&p).unwrap();
                zoom_argmin_2d(|x, y| ev.value(&[x, y]), [b[0], b[1]], 317, 6).to_vec()
            };
            for (g, o) in got.iter().zip(&oracle) {
                worst = worst.max((g - o).abs());
            }
            checked += 1;
        }
    }
    (worst, checked)
}

// ---------------------------------------------------------------------------
// Regression by grid ERM

/// Squared-error ERM for `t ≈ a + b x` by zoomed grid scan. The objective is
/// evaluated from running sums, which is exact up to rounding.
pub fn grid_erm_linear(xs: &[f64], ts: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let st: f64 = ts.iter().sum();
    let stt: f64 = ts.iter().map(|t| t * t).sum();
    let sxt: f64 = xs.iter().zip(ts).map(|(x, t)| x * t).sum();
    let risk = |a: f64, b: f64| stt - 2.0 * a * st - 2.0 * b * sxt + n * a * a + 2.0 * a * b * sx + b * b * sxx;
    let [a, b] = zoom_argmin_2d(risk, [(-50.0, 50.0), (-50.0, 50.0)], 401, 14);
    (a, b)
}

/// Worst coefficient gap between `fit_target_linear` and grid ERM.
pub fn regression_gap(seeds: &[u64]) -> f64 {
    let mut worst: f64 = 0.0;
    for &seed in seeds {
        for (amplitude, mode) in [(1.0, ClusterMode::Sliding), (3.0, ClusterMode::Disjoint)] {
            let data = generate(amplitude, 50, seed);
            let clustered = cluster_points(&data, 2, mode).unwrap();
            let model = fit_target_linear(&clustered, half_squared_difference).unwrap();
            let xs: Vec<f64> = clustered.samples.iter().map(|s| s.x).collect();
            let ts: Vec<f64> = clustered.samples.iter().map(|s| half_squared_difference(&s.ys)).collect();
            let (a, b) = grid_erm_linear(&xs, &ts);
            worst = worst.max((model.intercept - a).abs()).max((model.slope - b).abs());
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// Witness LP by weight-grid search

pub const WEIGHT_GRID: usize = 200;

/// All points of the `k`-weight simplex with denominator `res`.
pub fn weight_grid(k: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == k - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / res as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k, left - c, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, res, res, &mut Vec::new(), &mut out);
    out
}

fn mixtures(points: &[Vec<f64>], res: usize) -> Vec<Vec<f64>> {
    weight_grid(points.len(), res)
        .into_iter()
        .map(|w| {
            let mut acc = vec![0.0; points[0].len()];
            for (wi, x) in w.iter().zip(points) {
                for (a, v) in acc.iter_mut().zip(x) {
                    *a += wi * v;
                }
            }
            acc
        })
        .collect()
}

/// Smallest `‖Σλ₁x₁ − Σλ₂x₂‖∞` over grid weights, or infinity when every
/// pair exceeds `cutoff`.
pub fn grid_min_residual(g1: &[Vec<f64>], g2: &[Vec<f64>], res: usize, cutoff: f64) -> f64 {
    let m1 = mixtures(g1, res);
    let mut m2 = mixtures(g2, res);
    m2.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let firsts: Vec<f64> = m2.iter().map(|v| v[0]).collect();
    let mut best = cutoff;
    let mut found = false;
    for a in &m1 {
        let start = firsts.partition_point(|&f| f < a[0] - best);
        for b in &m2[start..] {
            if b[0] > a[0] + best {
                break;
            }
            let d = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            if d <= best {
                best = d;
                found = true;
            }
        }
    }
    if found {
        best
    } else {
        f64::INFINITY
    }
}

/// Residual reachable by rounding any weight pair to the grid.
pub fn rounding_bound(k1: usize, k2: usize, res: usize) -> f64 {
    (k1 + k2) as f64 / res as f64
}

pub struct LpInstance {
    pub m: usize,
    pub g1: Vec<Distribution>,
    pub g2: Vec<Distribution>,
    /// True when equal mixtures exist by construction.
    pub feasible_by_construction: bool,
}

fn bernoulli(sp: &Arc<OutcomeSpace>, q: f64) -> Distribution {
    Distribution::new(Arc::clone(sp), vec![1.0 - q, q]).unwrap()
}

/// Mixed instances: hull-intersecting groups on three outcomes (m = 1),
/// crossing chords of the Bernoulli curve (m = 2), and random groups.
pub fn lp_instances(seed: u64, count: usize) -> Vec<LpInstance> {
    let mut rng = rng(seed);
    let s3 = space(&[0.0, 1.0, 2.0]);
    let s2 = space(&[0.0, 1.0]);
    let mut out = Vec::new();
    for i in 0..count {
        let k1 = 1 + i % 3;
        let k2 = 1 + (i / 3) % 3;
        match i % 4 {
            0 => {
                let g1: Vec<_> = (0..k1).map(|_| random_dist(&mut rng, &s3, 0.2)).collect();
                let l1 = random_weights(&mut rng, k1);
                let mut centre = [0.0; 3];
                for (w, p) in l1.iter().zip(&g1) {
                    for (c, v) in centre.iter_mut().zip(p.probs()) {
                        *c += w * v;
                    }
                }
                let l2 = random_weights(&mut rng, k2);
                let mut deltas: Vec<[f64; 3]> = (0..k2)
                    .map(|_| {
                        let a = rng.gen::<f64>() - 0.5;
                        let b = rng.gen::<f64>() - 0.5;
                        [a, b, -a - b]
                    })
                    .collect();
                let mut shift = [0.0; 3];
                for j in 0..k2 - 1 {
                    for c in 0..3 {
                        shift[c] += l2[j] * deltas[j][c];
                    }
                }
                for c in 0..3 {
                    deltas[k2 - 1][c] = if k2 == 1 { 0.0 } else { -shift[c] / l2[k2 - 1] };
                }
                let mut scale: f64 = 1.0;
                for d in &deltas {
                    for c in 0..3 {
                        if d[c] < 0.0 {
                            scale = scale.min((centre[c] - 0.01) / -d[c]);
                        }
                    }
                }
                let g2 = deltas
                    .iter()
                    .map(|d| {
                        let probs: Vec<f64> = (0..3).map(|c| centre[c] + scale * d[c]).collect();
                        Distribution::new(Arc::clone(&s3), probs).unwrap()
                    })
                    .collect();
                out.push(LpInstance { m: 1, g1, g2, feasible_by_construction: true });
            }
            1 => {
                let mut a: Vec<f64> = Vec::new();
                while a.len() < 4 {
                    let x = 0.02 + 0.96 * rng.gen::<f64>();
                    if a.iter().all(|y| (x - y).abs() > 0.05) {
                        a.push(x);
                    }
                }
                a.sort_by(f64::total_cmp);
                let crossing = rng.gen::<bool>();
                let (g1, g2) = if crossing {
                    ([a[0], a[2]], [a[1], a[3]])
                } else {
                    ([a[0], a[1]], [a[2], a[3]])
                };
                out.push(LpInstance {
                    m: 2,
                    g1: g1.iter().map(|&q| bernoulli(&s2, q)).collect(),
                    g2: g2.iter().map(|&q| bernoulli(&s2, q)).collect(),
                    feasible_by_construction: crossing,
                });
            }
            2 => {
                let g1 = (0..k1).map(|_| random_dist(&mut rng, &s3, 0.0)).collect();
                let g2 = (0..k2).map(|_| random_dist(&mut rng, &s3, 0.0)).collect();
                out.push(LpInstance { m: 1, g1, g2, feasible_by_construction: false });
            }
            _ => {
                let g1 = (0..k1).map(|_| random_dist(&mut rng, &s3, 0.0)).collect();
                let g2 = (0..k2).map(|_| random_dist(&mut rng, &s3, 0.0)).collect();
                out.push(LpInstance { m: 2, g1, g2, feasible_by_construction: false });
            }
        }
    }
    out
}

#[derive(Debug, Default)]
pub struct LpTally {
    pub feasible_agree: usize,
    pub infeasible_agree: usize,
    pub ambiguous: usize,
    pub disagreements: Vec<String>,
}

/// Compares the witness LP with grid search on every instance.
///
/// The LP finding weights forces a grid pair within the rounding bound.
/// Instances built feasible must be found feasible by both; instances whose
/// grid residual exceeds twice the bound must be LP-infeasible. Random
/// instances inside that margin are counted as ambiguous.
pub fn lp_agreement(instances: &[LpInstance]) -> LpTally {
    let mut tally = LpTally::default();
    for (idx, inst) in instances.iter().enumerate() {
        let a = LevelSetSample::new("a", 0.0, inst.g1.clone()).unwrap();
        let b = LevelSetSample::new("b", 1.0, inst.g2.clone()).unwrap();
        let lp_found = witness_search(&a, &b, inst.m).unwrap().is_found();
        let x1: Vec<Vec<f64>> = inst.g1.iter().map(|p| p.product_vector(inst.m)).collect();
        let x2: Vec<Vec<f64>> = inst.g2.iter().map(|p| p.product_vector(inst.m)).collect();
        let bound = rounding_bound(x1.len(), x2.len(), WEIGHT_GRID);
        let rho = grid_min_residual(&x1, &x2, WEIGHT_GRID, 2.0 * bound);
        let mut fail = |why: &str| tally.disagreements.push(format!("instance {idx}: {why} (rho {rho:e}, bound {bound:e})"));
        if lp_found && rho > bound {
            fail("LP feasible but no grid pair within the rounding bound");
        } else if inst.feasible_by_construction {
            if !lp_found {
                fail("constructed-feasible instance reported infeasible");
            } else {
                tally.feasible_agree += 1;
            }
        } else if rho > 2.0 * bound {
            if lp_found {
                fail("grid residual beyond margin but LP feasible");
            } else {
                tally.infeasible_agree += 1;
            }
        } else if lp_found {
            tally.feasible_agree += 1;
        } else {
            tally.ambiguous += 1;
        }
    }
    tally
}
