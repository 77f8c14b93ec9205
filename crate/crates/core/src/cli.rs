//! Command-line front end: argument parsing, dispatch, rendering and exit codes.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::barriers::{
    self, barrier_sign_check, cutoff_scaling_check, find_log_barrier_kappa, make_log_barrier, make_phi_eps,
    make_psi_eps, make_theta_eps, phi_eps_threshold, psi_eps_threshold, sample_radii, supercritical_check,
    theta_eps_threshold, BarrierKind, Direction,
};
use crate::error::Error;
use crate::fundamental::{c_beta_sweep, CBetaResult};
use crate::kernel::KernelEvaluator;
use crate::params::FracParams;
use crate::quadrature::QuadratureSpec;
use crate::radial_operator::{verify_fundamental_identity, verify_log_harmonic};
use crate::report::{Report, Verdict, SCHEMA_VERSION};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "fracplap", version, about = "Fundamental solutions and barriers of the fractional p-Laplacian")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; `verify` defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate C(beta) at one beta or along a grid.
    Cbeta(CbetaArgs),
    /// Check an identity or barrier inequality and emit a report.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Evaluate the angular kernel K(rho).
    Kernel(KernelArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long = "N")]
    pub n: u32,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub p: f64,
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    /// Relative tolerance of every adaptive integral.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_subdivisions: usize,
    /// Cross-check principal values against extrapolated truncations.
    #[arg(long)]
    pub dual_path: bool,
}

impl QuadArgs {
    fn spec(&self) -> Result<QuadratureSpec<f64>, Error> {
        let spec = QuadratureSpec {
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            dual_path: self.dual_path,
            ..QuadratureSpec::default()
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct CbetaArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "beta_grid", required_unless_present = "beta_grid")]
    pub beta: Option<f64>,
    /// `from:to:steps`, inclusive of both ends.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub beta_grid: Option<Grid>,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.from + (self.to - self.from) * i as f64 / last)
            .collect()
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected from:to:steps, got '{s}'"));
    }
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
    let from = num(parts[0])?;
    let to = num(parts[1])?;
    let steps: usize = parts[2].trim().parse().map_err(|e| format!("'{}': {e}", parts[2]))?;
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(format!("grid '{s}' needs finite ends and steps >= 1"));
    }
    Ok(Grid { from, to, steps })
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// (-Delta_p)^s |x|^beta = C(beta) |x|^(beta(p-1)-sp).
    Fundamental {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,5")]
        radii: Vec<f64>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// ln|x| is harmonic when ps = N.
    Log {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,3")]
        radii: Vec<f64>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// phi_eps is a subsolution on A(r, 4r).
    Phi {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        /// Defaults to half the sufficient threshold.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// psi_eps is a subsolution on A(r/2, 2r).
    Psi {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// theta_eps is a subsolution on A(r, R) when N < ps.
    Theta {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.5)]
        r: f64,
        #[arg(long = "R", default_value_t = 4.0)]
        big_r: f64,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// The log barrier is a subsolution on A(r, R) when ps = N.
    Logbarrier {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1.2)]
        r: f64,
        #[arg(long = "R", default_value_t = 4.0)]
        big_r: f64,
        /// Defaults to the smallest power of two that makes h nonpositive.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// sup PV(m mu(|x|/R)) R^ps / m^(p-1) does not depend on R.
    Cutoff {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1.0)]
        m: f64,
        #[arg(long = "R", value_delimiter = ',', default_value = "1,2,4")]
        big_r: Vec<f64>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// (1+|x|)^-kappa is a supersolution for supercritical q.
    Supercritical {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        q: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,8")]
        radii: Vec<f64>,
        #[command(flatten)]
        quad: QuadArgs,
    },
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long = "N", default_value_t = 2)]
    pub n: u32,
    #[arg(long, default_value_t = 0.5)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub rho: Vec<f64>,
    /// Also evaluate K by direct angular quadrature.
    #[arg(long)]
    pub compare: bool,
}

/// Rendered output plus the exit code it implies.
struct Outcome {
    text: String,
    code: i32,
}

#[derive(Serialize)]
struct Table<'a, R: Serialize> {
    schema_version: u32,
    kind: &'a str,
    params: FracParams,
    rows: Vec<R>,
}

#[derive(Serialize)]
struct CbetaRow {
    beta: f64,
    value: f64,
    err_est: f64,
    predicted_sign: &'static str,
    rhs_exponent: f64,
}

impl From<&CBetaResult> for CbetaRow {
    fn from(c: &CBetaResult) -> Self {
        Self {
            beta: c.beta,
            value: c.value,
            err_est: c.err_est,
            predicted_sign: c.predicted_sign.as_str(),
            rhs_exponent: c.rhs_exponent,
        }
    }
}

#[derive(Serialize)]
struct KernelRow {
    rho: f64,
    k: f64,
    /// `G(rho^2)`, inside the unit ball only.
    g: Option<f64>,
    /// `(1-rho)^(1+ps) G(rho^2)`, inside the unit ball only.
    h: Option<f64>,
    k_theta: Option<f64>,
    rel_diff: Option<f64>,
}

/// Prefix shared by every CSV line.
#[derive(Serialize)]
struct CsvHead {
    schema_version: u32,
    kind: &'static str,
    n: u32,
    s: f64,
    p: f64,
}

#[derive(Serialize)]
struct CbetaCsv {
    schema_version: u32,
    kind: &'static str,
    n: u32,
    s: f64,
    p: f64,
    beta: f64,
    value: f64,
    err_est: f64,
    predicted_sign: &'static str,
    rhs_exponent: f64,
}

#[derive(Serialize)]
struct KernelCsv {
    schema_version: u32,
    kind: &'static str,
    n: u32,
    s: f64,
    p: f64,
    rho: f64,
    k: f64,
    g: Option<f64>,
    h: Option<f64>,
    k_theta: Option<f64>,
    rel_diff: Option<f64>,
}

fn render_table<R: Serialize, C: Serialize>(
    kind: &'static str,
    params: FracParams,
    rows: Vec<R>,
    format: Format,
    csv_line: impl Fn(CsvHead, &R) -> C,
) -> Result<String, Error> {
    let io = |e: String| Error::domain("output", e);
    match format {
        Format::Json => {
            let t = Table {
                schema_version: SCHEMA_VERSION,
                kind,
                params,
                rows,
            };
            serde_json::to_string_pretty(&t).map(|s| s + "\n").map_err(|e| io(e.to_string()))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                let head = CsvHead {
                    schema_version: SCHEMA_VERSION,
                    kind,
                    n: params.n(),
                    s: params.s(),
                    p: params.p(),
                };
                w.serialize(csv_line(head, row)).map_err(|e| io(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| io(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| io(e.to_string()))
        }
    }
}

fn render_report(report: &Report, format: Format) -> Result<Outcome, Error> {
    let text = match format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    };
    let code = if report.passed() { EXIT_PASS } else { EXIT_FAIL };
    Ok(Outcome { text, code })
}

fn params_of(a: &ParamArgs) -> Result<FracParams, Error> {
    FracParams::new(a.n, a.s, a.p)
}

fn cmd_cbeta(args: &CbetaArgs, format: Format) -> Result<Outcome, Error> {
    let params = params_of(&args.params)?;
    let spec = args.quad.spec()?;
    let grid = match (&args.beta, &args.beta_grid) {
        (Some(b), _) => vec![*b],
        (None, Some(g)) => g.points(),
        (None, None) => unreachable!("clap requires one of --beta, --beta-grid"),
    };
    let rows = c_beta_sweep(&params, &grid, &spec)
        .into_iter()
        .map(|r| r.map(|c| CbetaRow::from(&c)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Outcome {
        text: render_table("cbeta", params, rows, format, |h, r| CbetaCsv {
            schema_version: h.schema_version,
            kind: h.kind,
            n: h.n,
            s: h.s,
            p: h.p,
            beta: r.beta,
            value: r.value,
            err_est: r.err_est,
            predicted_sign: r.predicted_sign,
            rhs_exponent: r.rhs_exponent,
        })?,
        code: EXIT_PASS,
    })
}

fn cmd_kernel(args: &KernelArgs, format: Format) -> Result<Outcome, Error> {
    let params = FracParams::new(args.n, args.s, args.p)?;
    let ke = KernelEvaluator::new(&params)?;
    let mut rows = Vec::with_capacity(args.rho.len());
    for &rho in &args.rho {
        let k = ke.k_eval(rho)?;
        let inside = rho < 1.0;
        let g = if inside { Some(ke.g_rho(rho, 1.0 - rho)?) } else { None };
        let h = if inside { Some(ke.h_rho(rho, 1.0 - rho)?) } else { None };
        let k_theta = if args.compare { Some(ke.k_theta(rho)?) } else { None };
        let rel_diff = k_theta.map(|t| (k - t).abs() / t.abs());
        rows.push(KernelRow {
            rho,
            k,
            g,
            h,
            k_theta,
            rel_diff,
        });
    }
    Ok(Outcome {
        text: render_table("kernel", params, rows, format, |h, r| KernelCsv {
            schema_version: h.schema_version,
            kind: h.kind,
            n: h.n,
            s: h.s,
            p: h.p,
            rho: r.rho,
            k: r.k,
            g: r.g,
            h: r.h,
            k_theta: r.k_theta,
            rel_diff: r.rel_diff,
        })?,
        code: EXIT_PASS,
    })
}

fn cmd_verify(cmd: &VerifyCommand, format: Format) -> Result<Outcome, Error> {
    let report = match cmd {
        VerifyCommand::Fundamental {
            params,
            beta,
            radii,
            quad,
        } => verify_fundamental_identity(&params_of(params)?, *beta, radii, &quad.spec()?)?,
        VerifyCommand::Log { params, radii, quad } => verify_log_harmonic(&params_of(params)?, radii, &quad.spec()?)?,
        VerifyCommand::Phi {
            params,
            beta,
            r,
            eps,
            samples,
            quad,
        } => {
            let params = params_of(params)?;
            let spec = quad.spec()?;
            let threshold = phi_eps_threshold(&params, *beta, *r, &spec)?;
            let eps = eps.unwrap_or(0.5 * threshold);
            let profile = make_phi_eps(&params, *beta, eps)?;
            let ke = KernelEvaluator::new(&params)?;
            barrier_sign_check(BarrierKind::PhiEps, &profile, (*r, 4.0 * r), *samples, &|_| 0.0, Direction::AtMost, &ke, &spec)?
                .with_parameter("beta", *beta)
                .with_parameter("r", *r)
                .with_parameter("eps", eps)
                .with_parameter("eps_threshold", threshold)
                .to_report()
        }
        VerifyCommand::Psi {
            params,
            beta,
            r,
            eps,
            samples,
            quad,
        } => {
            let params = params_of(params)?;
            let spec = quad.spec()?;
            let threshold = psi_eps_threshold(&params, *beta, &spec)?;
            let eps = eps.unwrap_or(0.5 * threshold);
            let profile = make_psi_eps(&params, *beta, eps, *r)?;
            let ke = KernelEvaluator::new(&params)?;
            let dn = barriers::psi_dn_constant(&ke, *beta, &spec)?;
            barrier_sign_check(BarrierKind::PsiEps, &profile, (0.5 * r, 2.0 * r), *samples, &|_| 0.0, Direction::AtMost, &ke, &spec)?
                .with_parameter("beta", *beta)
                .with_parameter("r", *r)
                .with_parameter("eps", eps)
                .with_parameter("eps_threshold", threshold)
                .with_parameter("r_eps", barriers::psi_r_eps(*beta, eps, *r))
                .with_parameter("d_n", dn)
                .to_report()
        }
        VerifyCommand::Theta {
            params,
            beta,
            r,
            big_r,
            m,
            eps,
            samples,
            quad,
        } => {
            let params = params_of(params)?;
            let spec = quad.spec()?;
            let threshold = theta_eps_threshold(&params, *beta, *big_r, &spec)?;
            let eps = eps.unwrap_or(0.5 * threshold);
            let profile = make_theta_eps(&params, *beta, eps, *big_r, *m)?;
            let ke = KernelEvaluator::new(&params)?;
            barrier_sign_check(BarrierKind::ThetaEps, &profile, (*r, *big_r), *samples, &|_| 0.0, Direction::AtMost, &ke, &spec)?
                .with_parameter("beta", *beta)
                .with_parameter("r", *r)
                .with_parameter("R", *big_r)
                .with_parameter("m", *m)
                .with_parameter("eps", eps)
                .with_parameter("eps_threshold", threshold)
                .to_report()
        }
        VerifyCommand::Logbarrier {
            params,
            eps,
            r,
            big_r,
            kappa,
            samples,
            quad,
        } => {
            let params = params_of(params)?;
            let spec = quad.spec()?;
            let ke = KernelEvaluator::new(&params)?;
            let kappa = match kappa {
                Some(k) => *k,
                None => {
                    // calibrate on the same radii the check uses
                    let probe = make_log_barrier(&params, *eps, 1.0, *big_r)?;
                    let radii = sample_radii(&probe, *r, *big_r, *samples);
                    find_log_barrier_kappa(&ke, *eps, &radii, &spec)?
                }
            };
            let profile = make_log_barrier(&params, *eps, kappa, *big_r)?;
            barrier_sign_check(BarrierKind::LogBarrier, &profile, (*r, *big_r), *samples, &|_| 0.0, Direction::AtMost, &ke, &spec)?
                .with_parameter("eps", *eps)
                .with_parameter("r", *r)
                .with_parameter("R", *big_r)
                .with_parameter("kappa", kappa)
                .to_report()
        }
        VerifyCommand::Cutoff {
            params,
            m,
            big_r,
            samples,
            quad,
        } => {
            let params = params_of(params)?;
            let ke = KernelEvaluator::new(&params)?;
            let out = cutoff_scaling_check(&ke, *m, big_r, *samples, &quad.spec()?)?;
            let rows = out.checks.iter().flat_map(|c| c.to_report().rows).collect();
            let mut report = Report::new("cutoff", params).with_rows(rows).with_parameter("m", *m);
            for (r, v) in &out.normalized_sups {
                report = report.with_parameter(&format!("normalized_sup_R{r}"), *v);
            }
            report = report.with_parameter("spread", out.spread);
            report.verdict = out.aggregate;
            report
        }
        VerifyCommand::Supercritical { params, q, radii, quad } => {
            let params = params_of(params)?;
            let ke = KernelEvaluator::new(&params)?;
            supercritical_check(&params, *q, radii, &ke, &quad.spec()?)?.to_report()
        }
    };
    debug_assert!(report.verdict == Verdict::Pass || report.verdict == Verdict::Fail);
    render_report(&report, format)
}

fn exit_code_for(e: &Error) -> i32 {
    if e.is_domain() {
        EXIT_DOMAIN
    } else {
        EXIT_NUMERICAL
    }
}

/// Configures the thread pool from `FRACPLAP_THREADS` (unset or 0 means automatic).
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("FRACPLAP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("FRACPLAP_THREADS = '{raw}' is not a nonnegative integer"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let result = match &cli.command {
        Command::Cbeta(a) => cmd_cbeta(a, cli.format.unwrap_or(Format::Csv)),
        Command::Kernel(a) => cmd_kernel(a, cli.format.unwrap_or(Format::Csv)),
        Command::Verify(v) => cmd_verify(v, cli.format.unwrap_or(Format::Json)),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, &outcome.text),
        None => std::io::stdout().lock().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_NUMERICAL;
    }
    outcome.code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("-1.8:0.4:12").unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 12);
        assert_eq!(pts[0], -1.8);
        assert!((pts[11] - 0.4).abs() < 1e-15);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:2:3").is_err());
        assert!(parse_grid("1:2:0").is_err());
    }

    #[test]
    fn usage_errors_map_to_64() {
        assert_eq!(run(["fracplap", "cbeta", "--N", "3"]), EXIT_USAGE);
        assert_eq!(run(["fracplap", "bogus"]), EXIT_USAGE);
        assert_eq!(
            run(["fracplap", "cbeta", "--N", "2", "--s", "0.5", "--p", "2", "--beta-grid", "1:2"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
