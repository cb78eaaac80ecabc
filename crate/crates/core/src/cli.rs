//! Command-line front end. Exit codes: 0 success or pass, 1 a check ran and
//! failed (verification failed, no witness in the sample), 2 usage, input or
//! domain errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::catalog::{self, estimator_loss, PropertyName, SumProductEstimator};
use crate::error::ElicitError;
use crate::regression::{self, ClusterMode, ScatterDataset, SimConfig};
use crate::space::{DistributionLiteral, OutcomeSpace};
use crate::verifier::{self, FrontierOptions, DEFAULT_TOL};
use crate::voronoi::{self, SiteSet};
use crate::witness::{self, WitnessOutcome, DEFAULT_LEVEL_TOL, DEFAULT_LINE_SCAN, DEFAULT_PLANE_SCAN};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "elicit", version, about = "Multi-observation property elicitation toolkit")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    /// JSON file of settings; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check on a grid that a loss elicits a property.
    Verify(VerifyArgs),
    /// Search for a certificate that a property is not elicitable with m observations.
    Witness(WitnessArgs),
    /// Scan (d, m) cells for a catalog property.
    Frontier(FrontierArgs),
    /// Map Voronoi cells of a site set over the simplex grid.
    Voronoi(VoronoiArgs),
    /// Run the variance regression simulation, or fit a dataset.
    Regress(RegressArgs),
    /// Evaluate a property on one distribution.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub loss: Option<String>,
    /// Sum-of-products estimator JSON used instead of a named loss.
    #[arg(long)]
    pub estimator: Option<PathBuf>,
    #[arg(long)]
    pub property: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub outcomes: Vec<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also check the identification function.
    #[arg(long)]
    pub identification: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long)]
    pub property: Option<String>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub r1: Option<f64>,
    #[arg(long)]
    pub r2: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub outcomes: Vec<f64>,
    /// Scan resolution (default 10000 on two outcomes, 200 on three).
    #[arg(long)]
    pub scan: Option<usize>,
    #[arg(long)]
    pub level_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[arg(long)]
    pub property: Option<String>,
    #[arg(long)]
    pub max_d: Option<usize>,
    #[arg(long)]
    pub max_m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub outcomes: Vec<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VoronoiArgs {
    /// Site set JSON `{m, labels, sites}`.
    #[arg(long)]
    pub sites: Option<PathBuf>,
    /// Built-in band statistic: `two_norm` or `variance`.
    #[arg(long)]
    pub bands: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub outcomes: Vec<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `sliding` or `disjoint`.
    #[arg(long)]
    pub mode: Option<String>,
    /// Fit both methods to an `x,y` CSV instead of simulating.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub property: Option<String>,
    /// Distribution literal `{"values": [...], "probs": [...]}`.
    #[arg(long)]
    pub dist: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Settings after merging the config file under the flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub jobs: Option<usize>,
    pub loss: Option<String>,
    pub estimator: Option<PathBuf>,
    pub property: Option<String>,
    pub outcomes: Option<Vec<f64>>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub level_tol: Option<f64>,
    pub scan: Option<usize>,
    pub m: Option<usize>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub max_d: Option<usize>,
    pub max_m: Option<usize>,
    pub sites: Option<PathBuf>,
    pub bands: Option<String>,
    pub thresholds: Option<Vec<f64>>,
    pub a: Option<f64>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub data: Option<PathBuf>,
    pub dist: Option<String>,
    pub identification: Option<bool>,
    pub out: Option<PathBuf>,
}

fn nonempty(v: Vec<f64>) -> Option<Vec<f64>> {
    (!v.is_empty()).then_some(v)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    fn from_command(cmd: Command) -> Self {
        match cmd {
            Command::Verify(a) => Self {
                loss: a.loss,
                estimator: a.estimator,
                property: a.property,
                outcomes: nonempty(a.outcomes),
                grid: a.grid,
                tol: a.tol,
                identification: a.identification.then_some(true),
                out: a.out,
                ..Self::default()
            },
            Command::Witness(a) => Self {
                property: a.property,
                m: a.m,
                r1: a.r1,
                r2: a.r2,
                outcomes: nonempty(a.outcomes),
                scan: a.scan,
                level_tol: a.level_tol,
                out: a.out,
                ..Self::default()
            },
            Command::Frontier(a) => Self {
                property: a.property,
                max_d: a.max_d,
                max_m: a.max_m,
                outcomes: nonempty(a.outcomes),
                grid: a.grid,
                tol: a.tol,
                out: a.out,
                ..Self::default()
            },
            Command::Voronoi(a) => Self {
                sites: a.sites,
                bands: a.bands,
                thresholds: nonempty(a.thresholds),
                m: a.m,
                outcomes: nonempty(a.outcomes),
                grid: a.grid,
                out: a.out,
                ..Self::default()
            },
            Command::Regress(a) => Self {
                a: a.a,
                n: a.n,
                trials: a.trials,
                seed: a.seed,
                mode: a.mode,
                data: a.data,
                out: a.out,
                ..Self::default()
            },
            Command::Evaluate(a) => Self {
                property: a.property,
                dist: a.dist,
                out: a.out,
                ..Self::default()
            },
        }
    }

    /// Fields set here win; unset ones fall back to `base`.
    pub fn over(self, base: Self) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { Self { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            jobs, loss, estimator, property, outcomes, grid, tol, level_tol, scan, m, r1, r2, max_d,
            max_m, sites, bands, thresholds, a, n, trials, seed, mode, data, dist, identification, out
        )
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for (name, v) in [("tol", self.tol), ("level-tol", self.level_tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("--{name} must be positive, got {v}");
                }
            }
        }
        for (name, v) in [
            ("grid", self.grid),
            ("scan", self.scan),
            ("m", self.m),
            ("max-d", self.max_d),
            ("max-m", self.max_m),
            ("jobs", self.jobs),
            ("trials", self.trials),
        ] {
            if v == Some(0) {
                bail!("--{name} must be at least 1");
            }
        }
        Ok(())
    }

    fn require<T: Clone>(value: &Option<T>, flag: &str) -> anyhow::Result<T> {
        value.clone().ok_or_else(|| anyhow!("missing required --{flag}"))
    }

    fn space(&self, default: &[f64]) -> anyhow::Result<Arc<OutcomeSpace>> {
        let values = self.outcomes.clone().unwrap_or_else(|| default.to_vec());
        Ok(Arc::new(OutcomeSpace::from_values(&values)?))
    }
}

/// Outcome of one command: what to print and the exit code.
struct Output {
    body: String,
    code: i32,
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let tree = serde_json::to_value(value)?;
    if contains_null(&tree) {
        bail!("result contains a non-finite number");
    }
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn contains_null(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Null => true,
        serde_json::Value::Array(a) => a.iter().any(contains_null),
        serde_json::Value::Object(o) => o.values().any(contains_null),
        _ => false,
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_verify(cfg: &RunConfig) -> anyhow::Result<Output> {
    let space = cfg.space(&[0.0, 1.0])?;
    let property_name = RunConfig::require(&cfg.property, "property")?;
    let property = catalog::named_property(&property_name)?;
    let grid = cfg.grid.unwrap_or(10);
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);

    // A named loss that is one of the property's own constructions uses
    // that construction's link.
    let mut link = None;
    let loss = match (&cfg.estimator, &cfg.loss) {
        (Some(path), None) => {
            let est = SumProductEstimator::from_json(&read(path)?)?;
            if est.outcome_count() != space.len() {
                bail!(
                    "estimator tables cover {} outcomes but --outcomes has {}",
                    est.outcome_count(),
                    space.len()
                );
            }
            estimator_loss(&est)
        }
        (None, Some(name)) => {
            let loss = catalog::named_loss(name, &space)?;
            if let Ok(pname) = property_name.parse::<PropertyName>() {
                link = catalog::constructions(pname, &space)?
                    .into_iter()
                    .find(|c| c.loss.name() == loss.name() && c.link.is_some())
                    .and_then(|c| c.link);
            }
            loss
        }
        (Some(_), Some(_)) => bail!("give either --loss or --estimator, not both"),
        (None, None) => bail!("missing required --loss (or --estimator)"),
    };
    let link = link.or_else(|| property.link().filter(|l| l.aux_dim() == loss.report_dim()).cloned());
    let report = verifier::verify_with_link(&loss, &property, link.as_ref(), &space, grid, tol)?;
    let mut pass = report.pass;
    let body = if cfg.identification == Some(true) {
        let ident = verifier::check_identification_with_link(&loss, &property, link.as_ref(), &space, grid, tol)?;
        pass &= ident.pass;
        to_json(&serde_json::json!({ "verification": report, "identification": ident }))?
    } else {
        to_json(&report)?
    };
    Ok(Output {
        body,
        code: if pass { EXIT_OK } else { EXIT_FAIL },
    })
}

#[derive(Serialize)]
struct NoWitness {
    status: &'static str,
    m: usize,
    r1: f64,
    r2: f64,
    phase1_objective: f64,
}

fn cmd_witness(cfg: &RunConfig) -> anyhow::Result<Output> {
    let space = cfg.space(&[0.0, 1.0])?;
    let property = catalog::named_property(&RunConfig::require(&cfg.property, "property")?)?;
    let m = RunConfig::require(&cfg.m, "m")?;
    let r1 = RunConfig::require(&cfg.r1, "r1")?;
    let r2 = RunConfig::require(&cfg.r2, "r2")?;
    let scan = cfg
        .scan
        .unwrap_or(if space.len() == 2 { DEFAULT_LINE_SCAN } else { DEFAULT_PLANE_SCAN });
    let level_tol = cfg.level_tol.unwrap_or(DEFAULT_LEVEL_TOL);
    let a = witness::sample_level_set(&property, r1, &space, scan, level_tol)?;
    let b = witness::sample_level_set(&property, r2, &space, scan, level_tol)?;
    Ok(match witness::witness_search(&a, &b, m)? {
        WitnessOutcome::Found(w) => Output {
            body: to_json(&w)?,
            code: EXIT_OK,
        },
        WitnessOutcome::NoWitnessInSample { phase1_objective } => Output {
            body: to_json(&NoWitness {
                status: "no_witness_in_sample",
                m,
                r1,
                r2,
                phase1_objective,
            })?,
            code: EXIT_FAIL,
        },
    })
}

fn cmd_frontier(cfg: &RunConfig) -> anyhow::Result<Output> {
    let space = cfg.space(&[0.0, 1.0, 2.0])?;
    let name: PropertyName = RunConfig::require(&cfg.property, "property")?.parse()?;
    let defaults = FrontierOptions::default();
    let opts = FrontierOptions {
        max_d: cfg.max_d.unwrap_or(defaults.max_d),
        max_m: cfg.max_m.unwrap_or(defaults.max_m),
        resolution: cfg.grid.unwrap_or(defaults.resolution),
        tol: cfg.tol.unwrap_or(defaults.tol),
        ..defaults
    };
    let cells = verifier::frontier_scan(name, &space, &opts)?;
    Ok(Output {
        body: verifier::frontier_csv(&cells),
        code: EXIT_OK,
    })
}

fn cmd_voronoi(cfg: &RunConfig) -> anyhow::Result<Output> {
    let grid = cfg.grid.unwrap_or(50);
    let (sites, space) = match (&cfg.sites, &cfg.bands) {
        (Some(path), None) => {
            let sites = SiteSet::from_json(&read(path)?)?;
            let space = match &cfg.outcomes {
                Some(v) => Arc::new(OutcomeSpace::from_values(v)?),
                None => Arc::new(OutcomeSpace::categorical(sites.outcome_count())?),
            };
            (sites, space)
        }
        (None, Some(kind)) => {
            let space = cfg.space(&[0.0, 1.0, 2.0])?;
            let thresholds = RunConfig::require(&cfg.thresholds, "thresholds")?;
            let labels = voronoi::band_labels(thresholds.len() + 1);
            let sites = match kind.as_str() {
                "two_norm" => {
                    let m = cfg.m.unwrap_or(2);
                    voronoi::band_sites(&voronoi::two_norm_statistic(space.len(), m), &thresholds, m, labels)?
                }
                "variance" => {
                    if cfg.m.is_some_and(|m| m != 2) {
                        bail!("variance bands use m = 2");
                    }
                    voronoi::band_sites(&voronoi::variance_statistic(&space), &thresholds, 2, labels)?
                }
                other => {
                    return Err(ElicitError::UnknownName {
                        kind: "band statistic",
                        name: other.to_string(),
                    }
                    .into())
                }
            };
            (sites, space)
        }
        (Some(_), Some(_)) => bail!("give either --sites or --bands, not both"),
        (None, None) => bail!("missing required --sites (or --bands)"),
    };
    Ok(Output {
        body: voronoi::cell_map(&sites, &space, grid)?,
        code: EXIT_OK,
    })
}

fn cmd_regress(cfg: &RunConfig) -> anyhow::Result<Output> {
    let mode: ClusterMode = cfg.mode.as_deref().unwrap_or("sliding").parse()?;
    if let Some(path) = &cfg.data {
        let data = ScatterDataset::from_csv(&read(path)?)?;
        let clustered = regression::cluster_points(&data, 2, mode)?;
        let direct = regression::fit_target_linear(&clustered, regression::half_squared_difference)?;
        let indirect = regression::fit_variance_indirect(&data)?;
        return Ok(Output {
            body: to_json(&serde_json::json!({
                regression::METHOD_TWO_OBSERVATION: direct,
                regression::METHOD_INDIRECT: indirect,
            }))?,
            code: EXIT_OK,
        });
    }
    let sim = SimConfig {
        amplitude: RunConfig::require(&cfg.a, "a")?,
        n: RunConfig::require(&cfg.n, "n")?,
        trials: cfg.trials.unwrap_or(4000),
        seed: cfg.seed.unwrap_or(0),
        mode,
    };
    let result = regression::run_simulation(&sim)?;
    Ok(Output {
        body: result.to_csv(),
        code: EXIT_OK,
    })
}

fn cmd_evaluate(cfg: &RunConfig) -> anyhow::Result<Output> {
    let property = catalog::named_property(&RunConfig::require(&cfg.property, "property")?)?;
    let literal: DistributionLiteral = serde_json::from_str(&RunConfig::require(&cfg.dist, "dist")?)
        .context("parsing --dist")?;
    let p = literal.into_distribution()?;
    let value = property.evaluate(&p)?;
    Ok(Output {
        body: to_json(&serde_json::json!({ "property": property.name(), "value": value }))?,
        code: EXIT_OK,
    })
}

fn dispatch(kind: &str, cfg: &RunConfig) -> anyhow::Result<Output> {
    match kind {
        "verify" => cmd_verify(cfg),
        "witness" => cmd_witness(cfg),
        "frontier" => cmd_frontier(cfg),
        "voronoi" => cmd_voronoi(cfg),
        "regress" => cmd_regress(cfg),
        "evaluate" => cmd_evaluate(cfg),
        _ => unreachable!("clap restricts subcommands"),
    }
}

fn subcommand_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Verify(_) => "verify",
        Command::Witness(_) => "witness",
        Command::Frontier(_) => "frontier",
        Command::Voronoi(_) => "voronoi",
        Command::Regress(_) => "regress",
        Command::Evaluate(_) => "evaluate",
    }
}

fn execute(cli: Cli) -> anyhow::Result<Output> {
    let kind = subcommand_name(&cli.command);
    let base = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let cfg = RunConfig {
        jobs: cli.jobs,
        ..RunConfig::from_command(cli.command)
    }
    .over(base);
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .context("starting worker pool")?;
    let output = pool.install(|| dispatch(kind, &cfg))?;
    if let Some(path) = &cfg.out {
        std::fs::write(path, &output.body).with_context(|| format!("writing {}", path.display()))?;
        return Ok(Output {
            body: String::new(),
            code: output.code,
        });
    }
    Ok(output)
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli) {
        Ok(output) => {
            let _ = out.write_all(output.body.as_bytes());
            output.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}
