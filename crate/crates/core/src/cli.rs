//! Command-line interface: config loading, dispatch, and report emission.

use crate::atlas::{self, GenKind, TorusChart};
use crate::config::{mat_from_json, Config, ConfigError, MatJson};
use crate::coset::{self, PointX};
use crate::fixtures;
use crate::golden;
use crate::linalg::CMat;
use crate::moment::{self, ClosedVerdict, FlowOpts};
use crate::report::{mat_value, Report};
use crate::setup::Structure;
use clap::{Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "hgk",
    version,
    about = "Double coset structure of a reductive matrix group with two involutions: moment-map flows, Kempf-Ness membership, torus atlases"
)]
pub struct Cli {
    /// path to a JSON config
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// bundled fixture name (sl2 or sl8) instead of --config
    #[arg(long, global = true)]
    pub fixture: Option<String>,
    /// write the JSON report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tol_eq: Option<f64>,
    #[arg(long, global = true)]
    pub tol_rank: Option<f64>,
    #[arg(long, global = true)]
    pub mu_tol: Option<f64>,
    /// grid resolution per compact coordinate for stratification
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    #[arg(long, global = true)]
    pub max_group_order: Option<usize>,
    /// finite-difference step for flow gradients
    #[arg(long, global = true)]
    pub fd_step: Option<f64>,
    /// worker thread bound (default: available cores); output is identical
    /// for any value
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// validate the configured group datum and report every check
    Validate,
    /// test a matrix for group, coset-manifold, and zero-set membership
    Member { matrix: String },
    /// run the moment-map norm gradient flow from a point of X
    Flow { matrix: String },
    /// decide whether the H-orbit of a point is closed
    Closed { matrix: String },
    /// transversal slice data and principality at a point of X
    Slice { matrix: String },
    /// compute the torus, Weyl table, strata, fibers, and minimal collection
    Atlas,
    /// run a bundled example; --check exits nonzero on any mismatch
    Example {
        name: String,
        #[arg(long)]
        check: bool,
    },
}

/// Errors surfaced by command execution, split by exit-code category.
#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
}

impl From<ConfigError> for ExecError {
    fn from(e: ConfigError) -> Self {
        ExecError::Usage(e.to_string())
    }
}

type CliError = ExecError;

/// A fully resolved command against a loaded config; the embedding-friendly
/// entry point shared by the CLI and the C bindings.
#[derive(Debug)]
pub enum Invocation {
    Validate,
    Member(CMat),
    Flow(CMat),
    Closed(CMat),
    Slice(CMat),
    Atlas,
}

pub fn run_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // ignore failure when a pool is already installed
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli) {
        Ok((report, code)) => {
            let text = report.to_json();
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("error writing report: {e}");
                        return EXIT_USAGE;
                    }
                }
                None => println!("{text}"),
            }
            code
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numeric failure: {msg}");
            EXIT_NUMERIC
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match (&cli.config, &cli.fixture) {
        (Some(path), None) => Config::from_path(path)?,
        (None, Some(name)) => fixtures::bundled_config(name)
            .ok_or_else(|| CliError::Usage(format!("unknown fixture {name:?} (try sl2 or sl8)")))?,
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--config and --fixture are mutually exclusive".into()))
        }
        (None, None) => {
            return Err(CliError::Usage("one of --config or --fixture is required".into()))
        }
    };
    // flag overrides
    let n = &mut cfg.file.numerics;
    if let Some(v) = cli.tol_eq {
        n.tol_eq = v;
    }
    if let Some(v) = cli.tol_rank {
        n.tol_rank = v;
    }
    if let Some(v) = cli.mu_tol {
        n.tol_mu = v;
    }
    if let Some(v) = cli.grid {
        n.grid_n = v;
    }
    if let Some(v) = cli.seed {
        n.seed = v;
    }
    if let Some(v) = cli.max_iters {
        n.max_iters = v;
    }
    if let Some(v) = cli.max_group_order {
        n.max_group_order = v;
    }
    if let Some(v) = cli.fd_step {
        n.fd_step = v;
    }
    Ok(cfg)
}

fn parse_matrix_arg(arg: &str) -> Result<CMat, CliError> {
    let text = if let Some(path) = arg.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("reading {path}: {e}")))?
    } else {
        arg.to_string()
    };
    let j: MatJson = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("matrix argument: {e}")))?;
    mat_from_json(&j).map_err(|e| CliError::Usage(e.to_string()))
}

fn structure_of(cfg: &Config) -> Result<Structure, CliError> {
    cfg.structure().map_err(|e| match e {
        ConfigError::Setup(inner) => CliError::Numeric(inner.to_string()),
        other => CliError::Usage(other.to_string()),
    })
}

fn point_of(st: &Structure, m: CMat) -> Result<PointX, CliError> {
    PointX::from_matrix(st, m).map_err(|e| CliError::Numeric(e.to_string()))
}

fn flow_opts(cfg: &Config, st: &Structure) -> FlowOpts {
    let mut o = FlowOpts::from_structure(st);
    o.max_iters = cfg.file.numerics.max_iters;
    o.fd_step = cfg.file.numerics.fd_step;
    o.mu_tol = cfg.file.numerics.tol_mu;
    o
}

fn a0_chart(cfg: &Config, st: &Structure) -> Result<TorusChart, CliError> {
    let gens = cfg.a0_generator_coords(st)?;
    Ok(TorusChart {
        generators: gens.into_iter().map(|g| (g, GenKind::Compact)).collect(),
        base_point: st.identity(),
    })
}

fn flow_summary(tr: &moment::FlowTrace) -> serde_json::Value {
    // downsample the norm trace to at most 64 entries
    let take = 64usize;
    let stride = (tr.steps.len() / take).max(1);
    let sampled: Vec<serde_json::Value> = tr
        .steps
        .iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i + 1 == tr.steps.len())
        .map(|(i, s)| json!({"iter": i + 1, "norm_sq": s.norm_sq, "step": s.step_size}))
        .collect();
    json!({
        "converged": tr.converged,
        "reason": tr.reason,
        "iterations": tr.iterations,
        "residual": tr.residual,
        "final_gradient_norm": tr.final_gradient_norm,
        "limit": mat_value(&tr.end.mat),
        "norm_trace": sampled,
    })
}

fn chart_value(st: &Structure, chart: &TorusChart) -> serde_json::Value {
    let gens: Vec<serde_json::Value> = chart
        .generators
        .iter()
        .map(|(c, k)| {
            json!({
                "kind": k,
                "matrix": mat_value(&st.expand(c)),
            })
        })
        .collect();
    json!({
        "generators": gens,
        "base_point": mat_value(&chart.base_point),
        "compact_dim": chart.compact_dim(),
        "split_dim": chart.split_dim(),
    })
}

fn dispatch(cli: &Cli) -> Result<(Report, i32), CliError> {
    // `example` may run without --config/--fixture
    if let Command::Example { name, check } = &cli.command {
        let result = golden::run_suite(name)
            .ok_or_else(|| CliError::Usage(format!("unknown example {name:?} (try sl2 or sl8)")))?;
        let cfg = fixtures::bundled_config(name).unwrap();
        let payload = golden::suite_payload(&result);
        let report = Report::new(cfg.digest(), &format!("example {name}"), cfg.file.numerics.seed, payload);
        let code = if *check && !result.passed { EXIT_CHECK_FAILURE } else { EXIT_OK };
        for c in &result.checks {
            eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        return Ok((report, code));
    }

    let cfg = load_config(cli)?;
    let inv = match &cli.command {
        Command::Validate => Invocation::Validate,
        Command::Member { matrix } => Invocation::Member(parse_matrix_arg(matrix)?),
        Command::Flow { matrix } => Invocation::Flow(parse_matrix_arg(matrix)?),
        Command::Closed { matrix } => Invocation::Closed(parse_matrix_arg(matrix)?),
        Command::Slice { matrix } => Invocation::Slice(parse_matrix_arg(matrix)?),
        Command::Atlas => Invocation::Atlas,
        Command::Example { .. } => unreachable!("handled above"),
    };
    execute(&cfg, &inv)
}

/// Execute a resolved command against a config, producing the report and
/// the process exit code.
pub fn execute(cfg: &Config, inv: &Invocation) -> Result<(Report, i32), ExecError> {
    let seed = cfg.file.numerics.seed;
    let digest = cfg.digest();

    match inv {
        Invocation::Validate => {
            let spec = cfg.group_spec()?;
            let tol = cfg.tol();
            let (report, basis) =
                crate::setup::validate_setup(&spec, &tol).map_err(|e| CliError::Numeric(e.to_string()))?;
            let payload = json!({
                "validation": report,
                "algebra_dim": basis.dim(),
            });
            let code = if report.passed { EXIT_OK } else { EXIT_CHECK_FAILURE };
            Ok((Report::new(digest, "validate", seed, payload), code))
        }
        Invocation::Member(m) => {
            let st = structure_of(cfg)?;
            let m = m.clone();
            let in_group = st.in_group(&m).map(|_| true).unwrap_or(false);
            let (in_x, kn, mu_norm) = match PointX::from_matrix(&st, m.clone()) {
                Ok(pt) => {
                    let kn = moment::in_kempf_ness(&st, &pt)
                        .map_err(|e| CliError::Numeric(e.to_string()))?;
                    let mu_norm = moment::mu(&st, &pt).norm();
                    (true, Some(kn), Some(mu_norm))
                }
                Err(_) => (false, None, None),
            };
            let payload = json!({
                "in_group": in_group,
                "in_x": in_x,
                "kempf_ness": kn,
                "mu_norm": mu_norm,
            });
            Ok((Report::new(digest, "member", seed, payload), EXIT_OK))
        }
        Invocation::Flow(m) => {
            let st = structure_of(cfg)?;
            let pt = point_of(&st, m.clone())?;
            let opts = flow_opts(cfg, &st);
            let tr = moment::gradient_flow(&st, &pt, &opts)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            Ok((Report::new(digest, "flow", seed, flow_summary(&tr)), EXIT_OK))
        }
        Invocation::Closed(m) => {
            let st = structure_of(cfg)?;
            let pt = point_of(&st, m.clone())?;
            let opts = flow_opts(cfg, &st);
            let rep = moment::is_orbit_closed(&st, &pt, &opts)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            let payload = json!({
                "verdict": rep.verdict,
                "isotropy_dim_start": rep.isotropy_dim_start,
                "isotropy_dim_limit": rep.isotropy_dim_limit,
                "representative": mat_value(&rep.representative.mat),
                "refined_residual": rep.refined_residual,
                "flow": flow_summary(&rep.flow),
            });
            let code = if rep.verdict == ClosedVerdict::Inconclusive { EXIT_NUMERIC } else { EXIT_OK };
            Ok((Report::new(digest, "closed", seed, payload), code))
        }
        Invocation::Slice(m) => {
            let st = structure_of(cfg)?;
            let pt = point_of(&st, m.clone())?;
            let witnesses = cfg.mats(&cfg.file.candidates.component_witnesses)?;
            let (principal, diag) = coset::is_principal(&st, &pt, &witnesses);
            let tv = coset::transversal(&st, &pt);
            let weights = moment::slice_rep_weights(&st, &pt);
            let payload = json!({
                "slice_dim": tv.slice_basis.len(),
                "isotropy_dim": tv.isotropy_basis.len(),
                "fixed_algebra_dim": tv.fixed_algebra_basis.len(),
                "nonzero_weights": weights,
                "principal": principal,
                "diagnostics": diag,
            });
            Ok((Report::new(digest, "slice", seed, payload), EXIT_OK))
        }
        Invocation::Atlas => {
            let st = structure_of(cfg)?;
            let chart = a0_chart(cfg, &st)?;
            let weyl = cfg.mats(&cfg.file.candidates.weyl)?;
            let hints = cfg.mats(&cfg.file.torus.fiber_t_hints)?;
            let fiber = cfg.mats(&cfg.file.candidates.fiber)?;
            let witnesses = cfg.mats(&cfg.file.candidates.component_witnesses)?;
            let atlas = atlas::build_atlas(
                &st,
                chart,
                &weyl,
                &hints,
                &fiber,
                &witnesses,
                cfg.file.numerics.grid_n,
                cfg.file.numerics.max_group_order,
                seed,
            )
            .map_err(|e| CliError::Numeric(e.to_string()))?;
            let strata: Vec<serde_json::Value> = atlas
                .grid
                .strata
                .iter()
                .zip(atlas.fibers.iter())
                .map(|(s, f)| {
                    json!({
                        "id": s.id,
                        "isotropy_dim": s.isotropy_dim,
                        "dim": s.dim,
                        "node_count": s.node_indices.len(),
                        "representative_coords": s.representative.iter().copied().collect::<Vec<f64>>(),
                        "representative": mat_value(&s.representative_mat),
                        "witness_fixers": s.witness_fixers,
                        "wall_resolution": s.wall_resolution,
                        "fiber": {
                            "slice_dim": f.slice_noncompact_basis.len(),
                            "t_dim": f.t_basis.len(),
                            "little_weyl_order": f.little_weyl.order(),
                            "chamber": f.chamber,
                        },
                    })
                })
                .collect();
            let weyl_elements: Vec<serde_json::Value> = atlas
                .weyl
                .elements
                .iter()
                .map(|e| json!({"linear": e.action.linear, "translation": e.action.translation}))
                .collect();
            let tori: Vec<serde_json::Value> = atlas
                .minimal_tori
                .iter()
                .map(|t| {
                    json!({
                        "stratum_id": t.stratum_id,
                        "compact_dirs": t.compact_dirs,
                        "base_coords": t.base_coords.iter().copied().collect::<Vec<f64>>(),
                        "chart": chart_value(&st, &t.chart),
                    })
                })
                .collect();
            let payload = json!({
                "quotient_dim": atlas.quotient_dim,
                "a0": chart_value(&st, &atlas.a0),
                "weyl": {
                    "order": atlas.weyl.order(),
                    "closed": atlas.weyl.closed,
                    "pure_translations": atlas.weyl.pure_translation_count(),
                    "elements": weyl_elements,
                    "rejected": atlas.weyl.rejected,
                },
                "domain": atlas.grid.domain,
                "grid_n": atlas.grid.grid_n,
                "strata": strata,
                "minimal_tori": tori,
                "coverage": atlas.coverage,
            });
            Ok((Report::new(digest, "atlas", seed, payload), EXIT_OK))
        }
    }
}
