//! Subcommand dispatch for the `paritybound` binary.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::correlation::{correlation_report, GammaProvenance};
use crate::dynamics::{decay_trace, excess_positivity_window, PositivityWindow};
use crate::error::Error;
use crate::io::{envelope_json, fixture, parse_spec, Fixture, ProblemSpec, FIXTURE_NAMES};
use crate::observable::ObservableFamily;
use crate::threshold::{
    explicit_threshold_bound, l2_site_constant_bounds, l2_site_constants, seesaw_threshold, SeesawOptions,
    ThresholdResult,
};

#[derive(Debug, Parser)]
#[command(
    name = "paritybound",
    version,
    about = "Parity-defect bounds for multipartite observables"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON problem specification.
    #[arg(long, global = true, conflicts_with = "fixture")]
    pub spec: Option<PathBuf>,
    /// Built-in fixture: tripartite-pauli, chsh, pauli-site-<n>, depolarizing-demo.
    #[arg(long, global = true)]
    pub fixture: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, global = true, default_value_t = crate::linalg::DEFAULT_MAX_DIM)]
    pub max_dim: usize,
    /// Output file (default stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Compute dense exact quantities (norm, total correlation).
    #[arg(long, global = true)]
    pub exact: bool,
    /// Report attained and certified l2 site constants and the explicit threshold bound.
    #[arg(long, global = true)]
    pub site_constants: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Defect weights and denominator.
    Defects,
    /// Defect report with the exact operator norm.
    Norm,
    /// See-saw product threshold.
    Threshold,
    /// Excess, trace-distance and total-correlation bounds for a state.
    Bound {
        /// Threshold value to use instead of the spec's.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// CSV trace under product depolarizing noise.
    Decay {
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Check every built-in fixture against its expected values.
    Verify,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) | CliError::Io(_) => 1,
        }
    }
}

/// Rendered output and whether the command succeeded.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub success: bool,
}

impl Cli {
    fn seesaw_options(&self) -> SeesawOptions {
        SeesawOptions {
            restarts: self.restarts,
            max_iters: self.max_iters,
            tol: self.tol,
            seed: self.seed,
        }
    }

    fn load(&self) -> Result<(String, ProblemSpec), CliError> {
        match (&self.spec, &self.fixture) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)?;
                Ok((path.display().to_string(), parse_spec(&text)?))
            }
            (None, Some(name)) => Ok((name.clone(), fixture(name)?.spec)),
            (None, None) => Err(CliError::Usage("one of --spec or --fixture is required".into())),
        }
    }
}

/// Runs the parsed command and renders its report.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.restarts == 0 {
        return Err(CliError::Usage("--restarts must be >= 1".into()));
    }
    let ok = |text: String| Ok(Outcome { text, success: true });
    match &cli.command {
        Command::Defects | Command::Norm => {
            let exact = cli.exact || matches!(cli.command, Command::Norm);
            let (source, spec) = cli.load()?;
            let fam = spec.family()?;
            let report = fam.defect_report(exact, cli.max_dim)?;
            let name = if exact { "norm" } else { "defects" };
            ok(envelope_json(name, &source, report))
        }
        Command::Threshold => {
            let (source, spec) = cli.load()?;
            let fam = spec.family()?;
            let result = seesaw_threshold(&fam, &cli.seesaw_options())?;
            let (constants, bounds, bound) = if cli.site_constants {
                let c = l2_site_constants(&fam, cli.restarts, cli.seed)?;
                let u = l2_site_constant_bounds(&fam)?;
                let b = explicit_threshold_bound(&u)?;
                (Some(c), Some(u), Some(b))
            } else {
                (None, None, None)
            };
            #[derive(Serialize)]
            struct ThresholdReport {
                #[serde(flatten)]
                result: ThresholdResult,
                site_constants: Option<Vec<f64>>,
                site_constant_bounds: Option<Vec<f64>>,
                explicit_bound: Option<f64>,
            }
            ok(envelope_json(
                "threshold",
                &source,
                ThresholdReport {
                    result,
                    site_constants: constants,
                    site_constant_bounds: bounds,
                    explicit_bound: bound,
                },
            ))
        }
        Command::Bound { gamma } => {
            let (source, spec) = cli.load()?;
            let fam = spec.family()?;
            let rho = spec
                .density_state()?
                .ok_or_else(|| CliError::Usage("`bound` needs a state in the spec or fixture".into()))?;
            let (g, provenance) = resolve_gamma(cli, &spec, &fam, *gamma)?;
            let defects = fam.defect_report(false, cli.max_dim)?;
            let report = correlation_report(&fam, &rho, g, provenance, &defects, cli.exact, cli.max_dim)?;
            ok(envelope_json("bound", &source, report))
        }
        Command::Decay { gamma, t_max, steps } => {
            let (_, spec) = cli.load()?;
            let t_max = t_max
                .or_else(|| spec.decay.as_ref().and_then(|d| d.t_max))
                .ok_or_else(|| CliError::Usage("`decay` needs --t-max".into()))?;
            let steps = steps
                .or_else(|| spec.decay.as_ref().and_then(|d| d.steps))
                .ok_or_else(|| CliError::Usage("`decay` needs --steps".into()))?;
            if steps < 2 || !(t_max > 0.0) || !t_max.is_finite() {
                return Err(CliError::Usage(format!(
                    "`decay` needs --steps >= 2 and --t-max > 0 (got steps={steps}, t_max={t_max})"
                )));
            }
            let fam = spec.family()?;
            let rho = spec
                .density_state()?
                .ok_or_else(|| CliError::Usage("`decay` needs a state in the spec or fixture".into()))?;
            let (g, _) = resolve_gamma(cli, &spec, &fam, *gamma)?;
            let denominator = fam.defect_report(false, cli.max_dim)?.denominator;
            let trace = decay_trace(&fam, &rho, g, denominator, t_max, steps, cli.max_dim)?;
            ok(trace.to_csv())
        }
        Command::Verify => {
            let rows = verify_rows(&cli.seesaw_options(), cli.max_dim)?;
            let success = rows.iter().all(|r| r.pass);
            Ok(Outcome {
                text: render_table(&rows),
                success,
            })
        }
    }
}

/// Threshold for `bound` / `decay`: flag, then spec gamma, then spec or
/// computed site constants, finally a see-saw estimate.
fn resolve_gamma(
    cli: &Cli,
    spec: &ProblemSpec,
    fam: &ObservableFamily,
    flag: Option<f64>,
) -> Result<(f64, GammaProvenance), CliError> {
    if let Some(g) = flag {
        return Ok((g, GammaProvenance::UserSupplied));
    }
    if let Some(g) = spec.gamma {
        return Ok((g, spec.gamma_kind.unwrap_or(GammaProvenance::UserSupplied)));
    }
    if let Some(c) = &spec.c_constants {
        check_site_constants(cli, fam, c)?;
        return Ok((explicit_threshold_bound(c)?, GammaProvenance::CertifiedUpperBound));
    }
    if cli.site_constants {
        let c = l2_site_constant_bounds(fam)?;
        return Ok((explicit_threshold_bound(&c)?, GammaProvenance::CertifiedUpperBound));
    }
    let r = seesaw_threshold(fam, &cli.seesaw_options())?;
    Ok((r.gamma, GammaProvenance::HeuristicEstimate))
}

/// Rejects supplied constants below a value some local state already attains.
fn check_site_constants(cli: &Cli, fam: &ObservableFamily, c: &[f64]) -> Result<(), CliError> {
    let reached = l2_site_constants(fam, cli.restarts, cli.seed)?;
    for (r, (&given, &seen)) in c.iter().zip(&reached).enumerate() {
        if given < seen - 1e-9 {
            return Err(Error::Validation(format!(
                "c_constants[{r}] = {given} is below {seen}, which a local state attains"
            ))
            .into());
        }
    }
    Ok(())
}

/// One line of the `verify` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub fixture: String,
    pub quantity: String,
    pub measured: f64,
    pub expected: f64,
    pub tol: f64,
    pub pass: bool,
}

fn row(fx: &Fixture, key: &str, measured: f64) -> VerifyRow {
    let e = fx
        .expected(key)
        .unwrap_or_else(|| panic!("fixture {} lacks {key}", fx.name));
    VerifyRow {
        fixture: fx.name.clone(),
        quantity: key.to_string(),
        measured,
        expected: e.value,
        tol: e.tol,
        pass: (measured - e.value).abs() <= e.tol,
    }
}

/// Recomputes every fixture quantity.
pub fn verify_rows(opts: &SeesawOptions, max_dim: usize) -> Result<Vec<VerifyRow>, Error> {
    let mut rows = Vec::new();
    for name in FIXTURE_NAMES {
        let fx = fixture(name)?;
        let fam = fx.spec.family()?;
        let rho = fx.spec.density_state()?;
        match *name {
            "tripartite-pauli" => {
                let rep = fam.defect_report(true, max_dim)?;
                rows.push(row(&fx, "phi[0][1]", rep.phi[0][1]));
                rows.push(row(&fx, "phi[0][2]", rep.phi[0][2]));
                rows.push(row(&fx, "phi[1][2]", rep.phi[1][2]));
                rows.push(row(&fx, "denominator", rep.denominator));
                rows.push(row(&fx, "exact_norm_sq", rep.exact_norm_sq.unwrap_or(f64::NAN)));
            }
            "chsh" => {
                let rho = rho.expect("chsh fixture has a state");
                let rep = fam.defect_report(true, max_dim)?;
                rows.push(row(&fx, "phi[0][3]", rep.phi[0][3]));
                rows.push(row(&fx, "phi[1][2]", rep.phi[1][2]));
                rows.push(row(&fx, "denominator", rep.denominator));
                rows.push(row(&fx, "exact_norm_sq", rep.exact_norm_sq.unwrap_or(f64::NAN)));
                rows.push(row(&fx, "seesaw_gamma", seesaw_threshold(&fam, opts)?.gamma));
                let c = l2_site_constant_bounds(&fam)?;
                rows.push(row(&fx, "explicit_bound", explicit_threshold_bound(&c)?));
                let gamma = fx.spec.gamma.expect("chsh gamma");
                let c = correlation_report(&fam, &rho, gamma, GammaProvenance::Exact, &rep, true, max_dim)?;
                rows.push(row(&fx, "expectation", c.expectation));
                rows.push(row(&fx, "excess", c.excess));
                rows.push(row(&fx, "trace_dist_lb", c.trace_dist_lb));
                rows.push(row(&fx, "itot_lb", c.itot_lb));
                rows.push(row(&fx, "itot_exact", c.itot_exact.unwrap_or(f64::NAN)));
            }
            "depolarizing-demo" => {
                let rho = rho.expect("demo fixture has a state");
                let decay = fx.spec.decay.as_ref().expect("demo decay settings");
                let (t_max, steps) = (decay.t_max.unwrap_or(1.0), decay.steps.unwrap_or(101));
                let gamma = fx.spec.gamma.expect("demo gamma");
                let denominator = fam.defect_report(false, max_dim)?.denominator;
                let trace = decay_trace(&fam, &rho, gamma, denominator, t_max, steps, max_dim)?;
                rows.push(row(&fx, "expectation_t0", trace.expectation[0]));
                // first grid time with zero excess, compared within one grid step
                let first_zero = trace
                    .times
                    .iter()
                    .zip(&trace.excess)
                    .find(|(_, &e)| e == 0.0)
                    .map(|(&t, _)| t)
                    .unwrap_or(f64::INFINITY);
                let mut r = row(&fx, "window_end", first_zero);
                let step = t_max / (steps - 1) as f64;
                r.tol = step;
                r.pass = match excess_positivity_window(trace.expectation[0], gamma, fam.sites()) {
                    PositivityWindow::Until(end) => {
                        (first_zero - end).abs() <= step && (end - r.expected).abs() < 1e-12
                    }
                    _ => false,
                };
                rows.push(r);
            }
            _ => {
                let rep = fam.defect_report(false, max_dim)?;
                rows.push(row(&fx, "denominator", rep.denominator));
                let c = l2_site_constants(&fam, opts.restarts, opts.seed)?;
                let worst = c
                    .iter()
                    .copied()
                    .max_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()))
                    .unwrap_or(f64::NAN);
                rows.push(row(&fx, "site_constant", worst));
                let u = l2_site_constant_bounds(&fam)?;
                let worst = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                rows.push(row(&fx, "site_constant_bound", worst));
                let bound = explicit_threshold_bound(&u)?;
                rows.push(row(&fx, "explicit_bound", bound));
                rows.push(row(&fx, "seesaw_gamma", seesaw_threshold(&fam, opts)?.gamma));
                // coefficient of (Tr(rho B) - 1)_+^2 in the explicit bound
                let unit = crate::correlation::itot_lower_bound(1.0, rep.denominator)?;
                rows.push(row(&fx, "itot_coefficient", unit));
            }
        }
    }
    Ok(rows)
}

fn render_table(rows: &[VerifyRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:<16} {:>22} {:>22} {:>9}  status",
        "fixture", "quantity", "measured", "expected", "tol"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<18} {:<16} {:>22.15} {:>22.15} {:>9.1e}  {}",
            r.fixture,
            r.quantity,
            r.measured,
            r.expected,
            r.tol,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    let _ = writeln!(out, "{} checks, {} failed", rows.len(), failed);
    out
}
