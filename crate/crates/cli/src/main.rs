//! `richlab` — experiment harness for Richardson-extrapolation studies.
//!
//! Each subcommand runs one experiment family at its built-in defaults,
//! writes sweep and diagnosis CSVs (plus a text summary where a table is the
//! natural product), and prints one verdict line per diagnosed series. All
//! experiments are deterministic; rerunning any subcommand with `--no-meta`
//! reproduces every artifact byte for byte.

mod config;
mod error;
mod runners;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_order, parse_tolerance, parse_u32, resolve, ConfigFile};
use error::CliError;
use richlab::integrators::Method;
use richlab::iontrap::SwitchingKind;
use runners::Ctx;

#[derive(Parser)]
#[command(
    name = "richlab",
    version,
    about = "Richardson extrapolation experiment harness",
    propagate_version = true
)]
struct Cli {
    /// Directory artifacts are written to (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<String>,

    /// Omit provenance comments (timestamp, tool, command) from artifacts so
    /// reruns are byte-identical.
    #[arg(long, global = true)]
    no_meta: bool,

    /// Optional `key = value` config file; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trapezoid refinement sweeps (integrands: exp on [0,1], sqrt on [0,1]).
    Quad(QuadArgs),
    /// D-20 howitzer maximum-range sweeps over the bundled drag tables.
    Ballistics(BallisticsArgs),
    /// Four-ion trap kinetic-energy sweeps with optional force switching.
    Iontrap(IontrapArgs),
    /// SHAKE-constrained four-bead chain energy sweeps.
    Shake(ShakeArgs),
    /// Diagnose an existing sweep CSV.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct QuadArgs {
    /// Which integrand to sweep: exp, sqrt, or all.
    #[arg(long, value_name = "NAME")]
    integrand: Option<String>,
    /// Coarsest refinement level (h_k = (b-a)·2^-k).
    #[arg(long, value_name = "K")]
    kmin: Option<String>,
    /// Finest refinement level.
    #[arg(long, value_name = "K")]
    kmax: Option<String>,
}

#[derive(Args)]
struct BallisticsArgs {
    /// Integrator: rk1, rk2, rk3, or rk4.
    #[arg(long, value_name = "NAME")]
    method: Option<String>,
    /// Impact-event tolerance; accepts 2^-N literals (e.g. 2^-53).
    #[arg(long, value_name = "TOL")]
    event_tol: Option<String>,
    /// Drag table: G1, G2, G5, G6, G7, G8, or all.
    #[arg(long, value_name = "SHELL")]
    shell: Option<String>,
    /// Coarsest sweep level (h_k = 8·2^-k seconds).
    #[arg(long, value_name = "K")]
    kmin: Option<String>,
    /// Finest sweep level.
    #[arg(long, value_name = "K")]
    kmax: Option<String>,
}

#[derive(Args)]
struct IontrapArgs {
    /// Integrator: rk1, rk2, rk3, or rk4.
    #[arg(long, value_name = "NAME")]
    method: Option<String>,
    /// Force switching function: none, g2, or g4.
    #[arg(long, value_name = "KIND")]
    switching: Option<String>,
    /// Coarsest sweep level (n = 2^k steps to t_end).
    #[arg(long, value_name = "K")]
    kmin: Option<String>,
    /// Finest sweep level. Default depends on the integrator's cost: 20 for
    /// rk1, 16 for rk2, 14 for rk3/rk4, and 14 whenever switching is g2.
    #[arg(long, value_name = "K")]
    kmax: Option<String>,
}

#[derive(Args)]
struct ShakeArgs {
    /// Constraint tolerance; accepts 2^-N literals.
    #[arg(long, value_name = "TOL")]
    tau: Option<String>,
    /// Coarsest sweep level (n = 32·2^k steps to t_end).
    #[arg(long, value_name = "K")]
    kmin: Option<String>,
    /// Finest sweep level.
    #[arg(long, value_name = "K")]
    kmax: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Sweep CSV to diagnose (k,h,A columns; diagnosis files work too).
    #[arg(long, value_name = "PATH")]
    input: Option<String>,
    /// Nominal order p; omitted means the order is inferred from the data.
    #[arg(long, value_name = "P")]
    p: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let out_dir = resolve(
        cli.output_dir.as_deref(),
        &cfg,
        "output-dir",
        "out".to_string(),
        |s| Ok(s.to_string()),
    )?;
    let no_meta = cli.no_meta || resolve(None, &cfg, "no-meta", false, config::parse_bool)?;

    match &cli.command {
        Command::Quad(args) => {
            let integrand = resolve(
                args.integrand.as_deref(),
                &cfg,
                "integrand",
                "all".to_string(),
                |s| Ok(s.to_string()),
            )?;
            let kmin = resolve(args.kmin.as_deref(), &cfg, "kmin", 0, parse_u32)?;
            let kmax = resolve(args.kmax.as_deref(), &cfg, "kmax", 19, parse_u32)?;
            let cmd = format!("quad --integrand {integrand} --kmin {kmin} --kmax {kmax}");
            let ctx = Ctx::new(PathBuf::from(out_dir), no_meta, &cmd)?;
            runners::run_quad(&ctx, &integrand, kmin, kmax)
        }
        Command::Ballistics(args) => {
            let method: Method =
                resolve(args.method.as_deref(), &cfg, "method", Method::Rk1, |s| s.parse())?;
            let event_tol = resolve(
                args.event_tol.as_deref(),
                &cfg,
                "event-tol",
                (-53f64).exp2(),
                parse_tolerance,
            )?;
            let shell = resolve(args.shell.as_deref(), &cfg, "shell", "all".to_string(), |s| {
                Ok(s.to_string())
            })?;
            let kmin = resolve(args.kmin.as_deref(), &cfg, "kmin", 1, parse_u32)?;
            let kmax = resolve(args.kmax.as_deref(), &cfg, "kmax", 12, parse_u32)?;
            let cmd = format!(
                "ballistics --method {} --event-tol {event_tol:e} --shell {shell} --kmin {kmin} --kmax {kmax}",
                method.name()
            );
            let ctx = Ctx::new(PathBuf::from(out_dir), no_meta, &cmd)?;
            runners::run_ballistics(&ctx, method, event_tol, &shell, kmin, kmax)
        }
        Command::Iontrap(args) => {
            let method: Method =
                resolve(args.method.as_deref(), &cfg, "method", Method::Rk2, |s| s.parse())?;
            let switching: SwitchingKind = resolve(
                args.switching.as_deref(),
                &cfg,
                "switching",
                SwitchingKind::None,
                |s| s.parse(),
            )?;
            let kmin = resolve(args.kmin.as_deref(), &cfg, "kmin", 6, parse_u32)?;
            let default_kmax = if switching == SwitchingKind::G2Step {
                14
            } else {
                match method {
                    Method::Rk1 => 20,
                    Method::Rk2 => 16,
                    Method::Rk3 | Method::Rk4 => 14,
                }
            };
            let kmax = resolve(args.kmax.as_deref(), &cfg, "kmax", default_kmax, parse_u32)?;
            let cmd = format!(
                "iontrap --method {} --switching {} --kmin {kmin} --kmax {kmax}",
                method.name(),
                switching.name()
            );
            let ctx = Ctx::new(PathBuf::from(out_dir), no_meta, &cmd)?;
            runners::run_iontrap(&ctx, method, switching, kmin, kmax)
        }
        Command::Shake(args) => {
            let tau = resolve(args.tau.as_deref(), &cfg, "tau", 1e-12, parse_tolerance)?;
            let kmin = resolve(args.kmin.as_deref(), &cfg, "kmin", 0, parse_u32)?;
            let kmax = resolve(args.kmax.as_deref(), &cfg, "kmax", 11, parse_u32)?;
            let cmd = format!("shake --tau {tau:e} --kmin {kmin} --kmax {kmax}");
            let ctx = Ctx::new(PathBuf::from(out_dir), no_meta, &cmd)?;
            runners::run_shake(&ctx, tau, kmin, kmax)
        }
        Command::Analyze(args) => {
            let input = resolve(args.input.as_deref(), &cfg, "input", String::new(), |s| {
                Ok(s.to_string())
            })?;
            if input.is_empty() {
                return Err(CliError::Usage("--input is required for analyze".to_string()));
            }
            let p_nominal = match (args.p.as_deref(), cfg.get("p")) {
                (Some(raw), _) => Some(
                    parse_order(raw).map_err(|msg| CliError::Usage(format!("--p {raw}: {msg}")))?,
                ),
                (None, Some(raw)) => Some(
                    parse_order(raw)
                        .map_err(|msg| CliError::Config(format!("key `p` = {raw}: {msg}")))?,
                ),
                (None, None) => None,
            };
            let cmd = match p_nominal {
                Some(p) => format!("analyze --input {input} --p {p}"),
                None => format!("analyze --input {input}"),
            };
            let ctx = Ctx::new(PathBuf::from(out_dir), no_meta, &cmd)?;
            runners::run_analyze(&ctx, std::path::Path::new(&input), p_nominal)
        }
    }
}
