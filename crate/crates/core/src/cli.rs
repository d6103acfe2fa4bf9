//! Command-line front end: argument parsing, experiment configuration and the
//! subcommands `audit`, `spectrum`, `witness`, `inverse-norms`, `walk`,
//! `greens`, plus the `--paper` battery.
//!
//! Exit codes: 0 success, 1 property failure, 2 usage or configuration error,
//! 3 budget exceeded.

use crate::ball::DEFAULT_NODE_BUDGET;
use crate::error::{Error, Result};
use crate::group::{GroupDescriptor, GroupKind};
use crate::measure::ProbabilityMeasure;
use crate::operator::{build_operator, TruncatedConvolutionOperator};
use crate::output::{self, Format, GreensRow, WalkRow, WitnessRow};
use crate::spectral::{
    greens_partial, inverse_lp_norms, top_eigenvalue, InverseOptions, PowerOptions, SpectralReport,
    DEFAULT_CG_TOL, DEFAULT_EIGEN_TOL, DEFAULT_INVERSE_BUDGET, DEFAULT_POWER_MAX_ITERS,
};
use crate::walk::{monte_carlo_return, spectral_radius_estimate, DEFAULT_EXACT_BUDGET};
use crate::witness::{witness_ratio, WitnessReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

pub const BUDGET_ENV: &str = "SCHURLAB_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "schurlab", version, about = "Spectral gap versus l-inf invertibility of I - M on free groups")]
pub struct Cli {
    /// Run the full verification battery and print a PASS/FAIL summary.
    #[arg(long)]
    pub paper: bool,

    /// Load the experiment from a JSON config instead of flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Print the resolved configuration as JSON and exit.
    #[arg(long, global = true)]
    pub dry_run: bool,

    /// Node budget for ball enumeration.
    #[arg(long, global = true, env = BUDGET_ENV)]
    pub budget: Option<usize>,

    /// Write results to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Emit JSON instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,

    /// Omit the timestamp line from CSV output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    Free,
    Abelian,
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    /// Free group or free abelian group.
    #[arg(long, value_enum, default_value = "free")]
    pub group: GroupArg,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    /// Explicit measure such as "x:1/2,x^-1:1/2"; the uniform measure on
    /// generators when absent.
    #[arg(long)]
    pub measure: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Single radius (or n).
    #[arg(long, alias = "n")]
    pub radius: Option<u32>,
    /// Inclusive range "A..B" or list "5,10,20".
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schur-algebra audit of M_R.
    Audit {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 6)]
        radius: u32,
        /// Also write the ball as index,word_length,element CSV.
        #[arg(long)]
        dump_ball: Option<PathBuf>,
        /// Also write M_R as a coordinate list.
        #[arg(long)]
        export_operator: Option<PathBuf>,
    },
    /// Top eigenvalue of M_R over a radius sweep.
    Spectrum {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value_t = DEFAULT_EIGEN_TOL, allow_negative_numbers = true)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_POWER_MAX_ITERS)]
        max_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Lipschitz witness ratios ||(I-M) f_n|| / ||f_n|| over an n sweep.
    Witness {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        sweep: Option<String>,
    },
    /// l1, l2 and l-inf norms of (I - M_R)^-1.
    InverseNorms {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, default_value_t = DEFAULT_CG_TOL, allow_negative_numbers = true)]
        tol: f64,
        /// Largest ball for the per-column solves.
        #[arg(long, default_value_t = DEFAULT_INVERSE_BUDGET)]
        inverse_budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact return probabilities p_2n(e,e), their roots, and Monte Carlo estimates.
    Walk {
        #[command(flatten)]
        group: GroupArgs,
        /// Largest n (walks of 2n steps).
        #[arg(long, default_value_t = 15)]
        n: u32,
        /// Monte Carlo walks per row; 0 disables sampling.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Largest walk length sampled by Monte Carlo.
        #[arg(long, default_value_t = 10)]
        mc_max_steps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET)]
        exact_budget: usize,
    },
    /// Partial sums of the Green's function at e.
    Greens {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 30)]
        n: u32,
        #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET)]
        exact_budget: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Audit,
    Spectrum,
    Witness,
    InverseNorms,
    Walk,
    Greens,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "weights")]
pub enum MeasureSpec {
    Standard,
    Explicit(String),
}

/// Everything a command needs, resolved from flags or loaded from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub group: GroupKind,
    pub rank: usize,
    pub measure: MeasureSpec,
    /// Radii (audit, spectrum, inverse-norms) or n values (witness, walk, greens).
    pub sweep: Vec<u32>,
    pub tol: f64,
    pub max_iters: usize,
    pub budget: usize,
    pub inverse_budget: usize,
    pub exact_budget: usize,
    pub seed: u64,
    pub samples: u64,
    pub mc_max_steps: u32,
    pub format: Format,
    pub timestamp: bool,
    pub out: Option<PathBuf>,
    pub dump_ball: Option<PathBuf>,
    pub export_operator: Option<PathBuf>,
}

impl ExperimentConfig {
    fn base(command: CommandKind, group: &GroupArgs) -> Self {
        ExperimentConfig {
            command,
            group: match group.group {
                GroupArg::Free => GroupKind::FreeGroup,
                GroupArg::Abelian => GroupKind::FreeAbelian,
            },
            rank: group.rank,
            measure: group.measure.clone().map_or(MeasureSpec::Standard, MeasureSpec::Explicit),
            sweep: Vec::new(),
            tol: DEFAULT_EIGEN_TOL,
            max_iters: DEFAULT_POWER_MAX_ITERS,
            budget: DEFAULT_NODE_BUDGET,
            inverse_budget: DEFAULT_INVERSE_BUDGET,
            exact_budget: DEFAULT_EXACT_BUDGET,
            seed: 0,
            samples: 0,
            mc_max_steps: 0,
            format: Format::Csv,
            timestamp: true,
            out: None,
            dump_ball: None,
            export_operator: None,
        }
    }

    pub fn from_cli(cli: &Cli) -> Result<Self> {
        if let Some(path) = &cli.config {
            let text = std::fs::read_to_string(path)?;
            let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            cfg.validate()?;
            return Ok(cfg);
        }
        let command = cli
            .command
            .as_ref()
            .ok_or_else(|| Error::usage("a subcommand or --paper is required"))?;
        let mut cfg = match command {
            Command::Audit {
                group,
                radius,
                dump_ball,
                export_operator,
            } => {
                let mut c = Self::base(CommandKind::Audit, group);
                c.sweep = vec![*radius];
                c.dump_ball = dump_ball.clone();
                c.export_operator = export_operator.clone();
                c
            }
            Command::Spectrum {
                group,
                sweep,
                tol,
                max_iters,
                seed,
            } => {
                let mut c = Self::base(CommandKind::Spectrum, group);
                c.sweep = resolve_sweep(sweep.radius, sweep.sweep.as_deref())?;
                c.tol = *tol;
                c.max_iters = *max_iters;
                c.seed = *seed;
                c
            }
            Command::Witness { group, n, sweep } => {
                let mut c = Self::base(CommandKind::Witness, group);
                c.sweep = resolve_sweep(*n, sweep.as_deref())?;
                c
            }
            Command::InverseNorms {
                group,
                sweep,
                tol,
                inverse_budget,
                seed,
            } => {
                let mut c = Self::base(CommandKind::InverseNorms, group);
                c.sweep = resolve_sweep(sweep.radius, sweep.sweep.as_deref())?;
                c.tol = *tol;
                c.inverse_budget = *inverse_budget;
                c.seed = *seed;
                c
            }
            Command::Walk {
                group,
                n,
                samples,
                mc_max_steps,
                seed,
                exact_budget,
            } => {
                let mut c = Self::base(CommandKind::Walk, group);
                c.sweep = vec![*n];
                c.samples = *samples;
                c.mc_max_steps = *mc_max_steps;
                c.seed = *seed;
                c.exact_budget = *exact_budget;
                c
            }
            Command::Greens { group, n, exact_budget } => {
                let mut c = Self::base(CommandKind::Greens, group);
                c.sweep = vec![*n];
                c.exact_budget = *exact_budget;
                c
            }
        };
        if let Some(b) = cli.budget {
            cfg.budget = b;
        }
        cfg.format = if cli.json { Format::Json } else { Format::Csv };
        cfg.timestamp = !cli.no_timestamp;
        cfg.out = cli.out.clone();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects invalid combinations before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::usage("--rank must be at least 1"));
        }
        if self.sweep.is_empty() {
            return Err(Error::usage("no radius or n given (use --radius/--n or --sweep)"));
        }
        let min = *self.sweep.iter().min().unwrap();
        match self.command {
            CommandKind::Audit | CommandKind::Spectrum | CommandKind::InverseNorms if min < 1 => {
                return Err(Error::usage("radius must be at least 1"));
            }
            CommandKind::Witness | CommandKind::Walk if min < 1 => {
                return Err(Error::usage("n must be at least 1 (the bound 1/n is undefined at n = 0)"));
            }
            _ => {}
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::usage("--tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::usage("--max-iters must be positive"));
        }
        if self.command == CommandKind::Walk && self.samples > 0 && self.mc_max_steps == 0 {
            return Err(Error::usage("--mc-max-steps must be positive when sampling"));
        }
        if self.dump_ball.is_some() && self.command != CommandKind::Audit {
            return Err(Error::usage("--dump-ball is only available on audit"));
        }
        self.group_descriptor()?;
        Ok(())
    }

    pub fn group_descriptor(&self) -> Result<GroupDescriptor> {
        GroupDescriptor::new(self.group, self.rank)
    }

    pub fn measure(&self) -> Result<ProbabilityMeasure> {
        let g = self.group_descriptor()?;
        match &self.measure {
            MeasureSpec::Standard => Ok(ProbabilityMeasure::standard(&g)),
            MeasureSpec::Explicit(text) => ProbabilityMeasure::parse(&g, text),
        }
    }

    fn power_options(&self) -> PowerOptions {
        PowerOptions {
            tol: self.tol,
            max_iters: self.max_iters,
            seed: self.seed,
            ..Default::default()
        }
    }
}

/// Parses `A..B` (inclusive), `a,b,c`, or a single integer.
pub fn parse_sweep(text: &str) -> Result<Vec<u32>> {
    let bad = || Error::Parse(format!("bad sweep {text:?}; expected A..B or a,b,c"));
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn resolve_sweep(single: Option<u32>, sweep: Option<&str>) -> Result<Vec<u32>> {
    match (single, sweep) {
        (Some(_), Some(_)) => Err(Error::usage("give either a single value or --sweep, not both")),
        (Some(r), None) => Ok(vec![r]),
        (None, Some(s)) => parse_sweep(s),
        (None, None) => Ok(Vec::new()),
    }
}

/// Result of running a command: rendered output plus property failures.
#[derive(Debug, Default)]
pub struct Outcome {
    pub text: String,
    pub failures: Vec<String>,
}

impl Outcome {
    fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_PROPERTY
        }
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::Parse(_) | Error::Io(_) => EXIT_USAGE,
        Error::Capacity { .. } => EXIT_BUDGET,
        Error::Measure(_) | Error::NoConvergence { .. } => EXIT_PROPERTY,
    }
}

fn nondecreasing_failure(name: &str, values: &[(u32, f64)]) -> Option<String> {
    values
        .windows(2)
        .find(|w| w[1].1 < w[0].1)
        .map(|w| format!("{name} decreases from {} at {} to {} at {}", w[0].1, w[0].0, w[1].1, w[1].0))
}

pub fn cmd_audit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let measure = match cfg.measure() {
        Ok(m) => m,
        Err(Error::Measure(e)) => {
            return Ok(Outcome {
                text: format!("FAIL: measure validation: {e}\n"),
                failures: vec![e.to_string()],
            })
        }
        Err(e) => return Err(e),
    };
    let radius = cfg.sweep[0];
    let op: TruncatedConvolutionOperator<f64> = build_operator(&measure, radius, cfg.budget)?;
    if let Some(path) = &cfg.dump_ball {
        op.ball().write_csv(File::create(path)?)?;
    }
    if let Some(path) = &cfg.export_operator {
        op.write_coo(std::io::BufWriter::new(File::create(path)?))?;
    }
    let audit = op.schur_audit();
    let mut failures = audit.failures(&measure);
    let spectral = top_eigenvalue(&op, &cfg.power_options())?;
    if spectral.gap.is_nan() || spectral.gap <= 0.0 {
        failures.push(format!("no spectral gap: lambda_max = {}", spectral.lambda_max));
    }
    let weights: Vec<String> = measure.support().iter().map(|(_, w)| w.to_string()).collect();
    let mut weights_sorted = weights.clone();
    weights_sorted.sort();
    weights_sorted.dedup();
    let support = measure.support().len();
    let mut text = String::new();
    let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(text, "group: {}  measure: {}  radius: {radius}", measure.group(), measure.render());
    let _ = writeln!(
        text,
        "ball size {}  stored entries {}  interior rows {}  boundary rows {}",
        audit.dim, audit.nnz, audit.interior_rows, audit.boundary_rows
    );
    let _ = writeln!(
        text,
        "[{}] entries m_ij are 0 or a support weight: distinct stored values {:?}, weights {{{}}}",
        mark(audit.distinct_values.iter().all(|v| measure.support().iter().any(|(_, w)| <f64 as crate::Scalar>::from_rational(w) == *v))),
        audit.distinct_values,
        weights_sorted.join(", ")
    );
    let _ = writeln!(
        text,
        "[{}] row/column support: interior {:?}, boundary {:?}, max row {}, max column {} (|supp mu| = {support})",
        mark(audit.interior_support == (support, support) && audit.max_col_support <= support),
        audit.interior_support,
        audit.boundary_support,
        audit.max_row_support,
        audit.max_col_support
    );
    let _ = writeln!(
        text,
        "[{}] uniform l1 bounds: max row {} max column {}, symmetric {}, interior rows stochastic {}",
        mark(audit.max_row_l1 <= 1.0 && audit.max_col_l1 <= 1.0 && audit.symmetric),
        audit.max_row_l1,
        audit.max_col_l1,
        audit.symmetric,
        audit.interior_rows_stochastic
    );
    let _ = writeln!(
        text,
        "[{}] I - M_R invertible on l2: lambda_max {:.10} gap {:.10} ||(I-M_R)^-1||_2 {:.10}",
        mark(spectral.gap > 0.0),
        spectral.lambda_max,
        spectral.gap,
        spectral.l2_inv_norm
    );
    let _ = writeln!(text, "{}", if failures.is_empty() { "PASS" } else { "FAIL" });
    for f in &failures {
        let _ = writeln!(text, "  failing property: {f}");
    }
    if cfg.format == Format::Json {
        let v = serde_json::json!({
            "radius": radius,
            "ball_size": audit.dim,
            "nnz": audit.nnz,
            "distinct_values": audit.distinct_values,
            "max_row_l1": audit.max_row_l1,
            "max_col_l1": audit.max_col_l1,
            "interior_support": [audit.interior_support.0, audit.interior_support.1],
            "boundary_support": [audit.boundary_support.0, audit.boundary_support.1],
            "interior_rows": audit.interior_rows,
            "boundary_rows": audit.boundary_rows,
            "symmetric": audit.symmetric,
            "lambda_max": spectral.lambda_max,
            "gap": spectral.gap,
            "pass": failures.is_empty(),
            "failures": failures,
        });
        text = serde_json::to_string_pretty(&v).expect("json value") + "\n";
    }
    Ok(Outcome { text, failures })
}

pub fn spectrum_sweep(measure: &ProbabilityMeasure, radii: &[u32], cfg: &ExperimentConfig) -> Result<Vec<SpectralReport>> {
    radii
        .iter()
        .map(|&r| {
            let op: TruncatedConvolutionOperator<f64> = build_operator(measure, r, cfg.budget)?;
            top_eigenvalue(&op, &cfg.power_options())
        })
        .collect()
}

pub fn cmd_spectrum(cfg: &ExperimentConfig) -> Result<Outcome> {
    let measure = cfg.measure()?;
    let reports = spectrum_sweep(&measure, &cfg.sweep, cfg)?;
    let mut failures: Vec<String> = reports
        .iter()
        .filter(|r| !r.converged)
        .map(|r| format!("power iteration did not converge at R={}", r.radius))
        .collect();
    let mut sorted: Vec<(u32, f64)> = reports.iter().map(|r| (r.radius, r.lambda_max)).collect();
    sorted.sort_by_key(|p| p.0);
    failures.extend(nondecreasing_failure("lambda_max", &sorted));
    Ok(Outcome {
        text: output::render(&reports, cfg.format, cfg.timestamp)?,
        failures,
    })
}

pub fn cmd_witness(cfg: &ExperimentConfig) -> Result<Outcome> {
    let measure = cfg.measure()?;
    let reports: Vec<WitnessReport<f64>> = cfg
        .sweep
        .iter()
        .map(|&n| witness_ratio(&measure, n, cfg.budget))
        .collect::<Result<_>>()?;
    let mut failures = Vec::new();
    for r in &reports {
        if r.sup_laplacian_f > 1.0 {
            failures.push(format!("n={}: sup |(I-M) f_n| = {} exceeds 1", r.n, r.sup_laplacian_f));
        }
        if r.ratio > r.bound {
            failures.push(format!("n={}: ratio {} exceeds 1/n", r.n, r.ratio));
        }
    }
    let rows: Vec<WitnessRow> = reports.iter().map(WitnessRow::from).collect();
    Ok(Outcome {
        text: output::render(&rows, cfg.format, cfg.timestamp)?,
        failures,
    })
}

pub fn cmd_inverse_norms(cfg: &ExperimentConfig) -> Result<Outcome> {
    let measure = cfg.measure()?;
    let opts = InverseOptions {
        cg_tol: cfg.tol,
        budget: cfg.inverse_budget,
        power: cfg.power_options(),
    };
    let mut reports = Vec::new();
    for &r in &cfg.sweep {
        let op: TruncatedConvolutionOperator<f64> = build_operator(&measure, r, cfg.budget)?;
        reports.push(inverse_lp_norms(&op, &opts)?);
    }
    let failures = reports
        .iter()
        .filter(|r| r.l2_inv_norm > r.l1_inv_norm * (1.0 + 1e-9))
        .map(|r| format!("R={}: l2 norm {} exceeds l1 norm {}", r.radius, r.l2_inv_norm, r.l1_inv_norm))
        .collect();
    Ok(Outcome {
        text: output::render(&reports, cfg.format, cfg.timestamp)?,
        failures,
    })
}

pub fn cmd_walk(cfg: &ExperimentConfig) -> Result<Outcome> {
    let measure = cfg.measure()?;
    let n_max = cfg.sweep[0];
    let sweep = spectral_radius_estimate(&measure, n_max, cfg.exact_budget)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for p in &sweep.points {
        let steps = 2 * p.n;
        let mc = if cfg.samples > 0 && steps <= cfg.mc_max_steps {
            Some(monte_carlo_return(&measure, steps, cfg.samples, cfg.seed)?)
        } else {
            None
        };
        rows.push(WalkRow::new(p, mc.as_ref(), cfg.seed));
    }
    let roots: Vec<(u32, f64)> = sweep.points.iter().map(|p| (p.n, p.root_estimate)).collect();
    failures.extend(nondecreasing_failure("p_2n^(1/2n)", &roots));
    if let (Some(k), Some(last)) = (sweep.kesten_constant, sweep.points.last()) {
        eprintln!(
            "kesten constant {k:.10}; final root estimate {:.10}; gap {:.10}",
            last.root_estimate,
            k - last.root_estimate
        );
    }
    Ok(Outcome {
        text: output::render(&rows, cfg.format, cfg.timestamp)?,
        failures,
    })
}

pub fn cmd_greens(cfg: &ExperimentConfig) -> Result<Outcome> {
    let measure = cfg.measure()?;
    let sums = greens_partial(&measure, cfg.sweep[0], cfg.exact_budget)?;
    let rows: Vec<GreensRow> = sums.iter().enumerate().map(|(n, s)| GreensRow::new(n as u32, s)).collect();
    Ok(Outcome {
        text: output::render(&rows, cfg.format, cfg.timestamp)?,
        failures: Vec::new(),
    })
}

pub fn run_config(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.command {
        CommandKind::Audit => cmd_audit(cfg),
        CommandKind::Spectrum => cmd_spectrum(cfg),
        CommandKind::Witness => cmd_witness(cfg),
        CommandKind::InverseNorms => cmd_inverse_norms(cfg),
        CommandKind::Walk => cmd_walk(cfg),
        CommandKind::Greens => cmd_greens(cfg),
    }
}

/// One line of the `--paper` battery.
#[derive(Debug, Clone)]
pub struct BatteryCheck {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

/// The full verification battery on the rank-2 free group, with `Z^2` as
/// the amenable control.
pub fn paper_battery(budget: usize) -> Result<Vec<BatteryCheck>> {
    let f2 = GroupDescriptor::free_group(2)?;
    let z2 = GroupDescriptor::free_abelian(2)?;
    let mu = ProbabilityMeasure::standard(&f2);
    let nu = ProbabilityMeasure::standard(&z2);
    let mut checks = Vec::new();
    let mut push = |label: &str, passed: bool, detail: String| {
        checks.push(BatteryCheck {
            label: label.to_string(),
            passed,
            detail,
        })
    };

    let mut entries_ok = true;
    let mut support_ok = true;
    let mut l1_ok = true;
    for r in 2..=10 {
        let op: TruncatedConvolutionOperator<f64> = build_operator(&mu, r, budget)?;
        let a = op.schur_audit();
        entries_ok &= a.distinct_values == [0.25];
        support_ok &= a.interior_support == (4, 4) && a.max_row_support == 4 && a.max_col_support == 4;
        l1_ok &= a.max_row_l1 <= 1.0 && a.max_col_l1 <= 1.0;
    }
    push("entries: m_ij = 0 or 1/4", entries_ok, "R = 2..10, distinct stored entries {0.25}".into());
    push(
        "supports: rows and columns have 4 entries",
        support_ok && l1_ok,
        "R = 2..10, interior rows 4 entries, row/column l1 <= 1".into(),
    );

    let cfg = ExperimentConfig::base(
        CommandKind::Spectrum,
        &GroupArgs {
            group: GroupArg::Free,
            rank: 2,
            measure: None,
        },
    );
    let cfg = ExperimentConfig { budget, ..cfg };
    let radii: Vec<u32> = (1..=12).collect();
    let spec = spectrum_sweep(&mu, &radii, &cfg)?;
    let kesten = 3f64.sqrt() / 2.0;
    let lambdas: Vec<(u32, f64)> = spec.iter().map(|r| (r.radius, r.lambda_max)).collect();
    let monotone = nondecreasing_failure("lambda", &lambdas).is_none();
    let last = spec.last().expect("nonempty sweep");
    push(
        "l2: spectral gap persists",
        monotone && last.lambda_max < kesten + 1e-9 && last.gap > 0.1,
        format!(
            "lambda_max(M_12) = {:.8} (Kesten sqrt(3)/2 = {kesten:.8}), gap {:.6}, ||(I-M_12)^-1||_2 = {:.6} <= 2/(2-sqrt 3) = {:.7}",
            last.lambda_max,
            last.gap,
            last.l2_inv_norm,
            2.0 / (2.0 - 3f64.sqrt())
        ),
    );

    let mut witness_ok = true;
    let mut last_ratio = 0.0;
    for n in 1..=20 {
        let w: WitnessReport<f64> = witness_ratio(&mu, n, budget)?;
        witness_ok &= w.ratio <= w.bound && w.sup_laplacian_f == 1.0;
        last_ratio = w.ratio;
    }
    push(
        "l-inf: witness ratio -> 0",
        witness_ok,
        format!("n = 1..20, ratio = 1/(n+1) <= 1/n, ratio at n=20: {last_ratio:.6}"),
    );

    let opts = InverseOptions::default();
    let mut norms = Vec::new();
    for r in 1..=8 {
        let op: TruncatedConvolutionOperator<f64> = build_operator(&mu, r, budget)?;
        norms.push(inverse_lp_norms(&op, &opts)?);
    }
    let increasing = norms.windows(2).all(|w| w[1].linf_inv_norm > w[0].linf_inv_norm);
    let l2_bounded = norms.iter().all(|r| r.l2_inv_norm <= 2.0 / (2.0 - 3f64.sqrt()) + 1e-6);
    push(
        "inverse norms: l-inf grows, l2 bounded",
        increasing && l2_bounded,
        format!(
            "R = 1..8: l-inf {:.6} -> {:.6}, l2 max {:.6}",
            norms[0].linf_inv_norm,
            norms[7].linf_inv_norm,
            norms.iter().map(|r| r.l2_inv_norm).fold(0.0, f64::max)
        ),
    );

    let control = spectrum_sweep(&nu, &[5, 10, 20, 40], &cfg)?;
    let gaps: Vec<f64> = control.iter().map(|r| r.gap).collect();
    push(
        "control: Z^2 spectral gap closes",
        gaps.windows(2).all(|w| w[1] < w[0]) && gaps[3] < 0.02,
        format!("gap at R = 5, 10, 20, 40: {gaps:.6?}"),
    );
    Ok(checks)
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => output::emit(File::create(p)?, text),
        None => output::emit(std::io::stdout().lock(), text),
    }
}

/// Runs the parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = (|| -> Result<i32> {
        if cli.paper {
            let budget = cli.budget.unwrap_or(DEFAULT_NODE_BUDGET);
            let checks = paper_battery(budget)?;
            let mut text = String::new();
            for c in &checks {
                let _ = writeln!(text, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.label, c.detail);
            }
            let all = checks.iter().all(|c| c.passed);
            let _ = writeln!(text, "{}", if all { "PASS" } else { "FAIL" });
            write_output(cli.out.as_ref(), &text)?;
            return Ok(if all { EXIT_OK } else { EXIT_PROPERTY });
        }
        let cfg = ExperimentConfig::from_cli(cli)?;
        if cli.dry_run {
            let text = serde_json::to_string_pretty(&cfg).expect("config serializes") + "\n";
            write_output(None, &text)?;
            return Ok(EXIT_OK);
        }
        let outcome = run_config(&cfg)?;
        write_output(cfg.out.as_ref(), &outcome.text)?;
        for f in &outcome.failures {
            eprintln!("FAIL: {f}");
        }
        Ok(outcome.exit_code())
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let _ = std::io::stderr().flush();
            exit_code_for(&e)
        }
    }
}
