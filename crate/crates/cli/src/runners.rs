//! Subcommand execution: run the experiment, write artifacts, print verdicts.
//!
//! Every artifact is assembled in memory and written in one call, so a
//! failing disk leaves no torn files, and every sweep/diagnosis CSV obeys the
//! `sweep_io` dialect — any of them can be fed back through `analyze`.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use richlab::ballistics::{maxrange_sweep, ShellSpec};
use richlab::constrained_md::{energy_sweep, tail_oscillation, ConstrainedSystem};
use richlab::dragmodel::{load, ShellModel};
use richlab::extrapolation::{diagnose, ConvergenceDiagnosis, SampleSweep};
use richlab::integrators::Method;
use richlab::iontrap::{
    equilibrium_edge, kinetic_energy_sweep, IonSystem, SwitchingFunction, SwitchingKind,
};
use richlab::quadrature::{exp_integrand, refinement_sweep_range, sqrt_integrand};
use richlab::sweep_io::{read_sweep, write_diagnosis, write_sweep, SweepIoError};

use crate::error::CliError;

/// Shared run context: where artifacts go and which provenance comments (if
/// any) they carry. An empty `meta` makes every artifact byte-reproducible.
pub struct Ctx {
    out_dir: PathBuf,
    meta: Vec<String>,
}

impl Ctx {
    pub fn new(out_dir: PathBuf, no_meta: bool, cmd: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(&out_dir).map_err(|e| {
            CliError::OutputDir(format!("cannot create {}: {e}", out_dir.display()))
        })?;
        let meta = if no_meta {
            Vec::new()
        } else {
            vec![
                format!("generated: {}", chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ")),
                format!("tool: richlab {}", env!("CARGO_PKG_VERSION")),
                format!("cmd: {cmd}"),
            ]
        };
        Ok(Ctx { out_dir, meta })
    }

    fn write_file(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| {
            CliError::OutputDir(format!("cannot write {}: {e}", path.display()))
        })?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn write_sweep_and_diag(
        &self,
        stem: &str,
        sweep: &SampleSweep,
        diagnosis: &ConvergenceDiagnosis,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write_sweep(&mut buf, sweep, &self.meta).expect("in-memory write cannot fail");
        self.write_file(&format!("{stem}_sweep.csv"), &buf)?;
        buf.clear();
        write_diagnosis(&mut buf, sweep, diagnosis, &self.meta)
            .expect("in-memory write cannot fail");
        self.write_file(&format!("{stem}_diag.csv"), &buf)
    }
}

/// One-line diagnosis summary, printed to stdout per experiment.
fn verdict_line(name: &str, d: &ConvergenceDiagnosis) -> String {
    let window = match d.asymptotic_window {
        Some((lo, hi)) => format!("{lo}..{hi}"),
        None => "none".to_string(),
    };
    let p_hat = d.p_hat.map_or("nan".to_string(), |v| v.to_string());
    let m_hat = d.m_hat.map_or("nan".to_string(), |v| v.to_string());
    format!(
        "{name}: verdict={} window={window} p_hat={p_hat} m_hat={m_hat}",
        d.verdict
    )
}

/// Trapezoid refinement experiments on the bundled integrands.
pub fn run_quad(ctx: &Ctx, integrand: &str, k_min: u32, k_max: u32) -> Result<(), CliError> {
    if k_min > k_max {
        return Err(CliError::Usage(format!("kmin {k_min} exceeds kmax {k_max}")));
    }
    if k_max > 26 {
        return Err(CliError::Usage(format!("kmax {k_max} exceeds the limit 26")));
    }
    let names: Vec<&str> = match integrand {
        "exp" => vec!["exp"],
        "sqrt" => vec!["sqrt"],
        "all" => vec!["exp", "sqrt"],
        other => {
            return Err(CliError::Usage(format!(
                "--integrand {other}: expected exp, sqrt, or all"
            )))
        }
    };
    for name in names {
        let label = format!("rint_{name}");
        let sweep = match name {
            "exp" => refinement_sweep_range(&exp_integrand(), &label, k_min, k_max),
            _ => refinement_sweep_range(&sqrt_integrand(), &label, k_min, k_max),
        };
        let d = diagnose(&sweep, None);
        ctx.write_sweep_and_diag(&label, &sweep, &d)?;
        println!("{}", verdict_line(&label, &d));
    }
    Ok(())
}

/// Max-range sweeps for the D-20 howitzer across the selected drag tables.
pub fn run_ballistics(
    ctx: &Ctx,
    method: Method,
    event_tol: f64,
    shell: &str,
    k_min: u32,
    k_max: u32,
) -> Result<(), CliError> {
    if !(1..=16).contains(&k_min) || k_max > 16 || k_min > k_max {
        return Err(CliError::Usage(format!(
            "sweep levels must satisfy 1 <= kmin <= kmax <= 16, got {k_min}..{k_max}"
        )));
    }
    if !(event_tol > 0.0 && event_tol < 1.0) {
        return Err(CliError::Usage(format!(
            "event-tol must lie in (0, 1), got {event_tol}"
        )));
    }
    let shells: Vec<ShellModel> = if shell == "all" {
        ShellModel::ALL.to_vec()
    } else {
        vec![shell
            .parse()
            .map_err(|e: String| CliError::Usage(format!("--shell {shell}: {e}")))?]
    };

    let mut summary: Vec<(String, f64, Option<f64>)> = Vec::new();
    for s in &shells {
        let table =
            load(*s).map_err(|e| CliError::Data(format!("drag table {}: {e}", s.name())))?;
        let spec = ShellSpec::d20(table);
        let stem = format!("maxrange_{}_{}", method.name(), s.name().to_ascii_lowercase());
        let sweep = maxrange_sweep(&spec, method, event_tol, k_min, k_max, &stem)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let d = diagnose(&sweep, Some(method.order() as f64));
        ctx.write_sweep_and_diag(&stem, &sweep, &d)?;
        println!("{}", verdict_line(&stem, &d));
        let range = sweep.value(k_max).expect("sweep covers kmax");
        let estimate = d
            .estimates
            .iter()
            .find(|&&(k, _)| k == k_max)
            .map(|&(_, r)| r.abs());
        summary.push((s.name().to_string(), range, estimate));
    }

    let mut table = String::new();
    table.push_str("Shell type | Maximum range (m) | Error estimate (m)\n");
    table.push_str("-----------|-------------------|-------------------\n");
    for (name, range, estimate) in &summary {
        let est = match estimate {
            Some(r) => format!("{r:.3}"),
            None => "nan".to_string(),
        };
        table.push_str(&format!("{name:<10} | {range:>17.1} | {est:>18}\n"));
    }
    ctx.write_file(
        &format!("maxrange_{}_summary.txt", method.name()),
        table.as_bytes(),
    )?;
    print!("{table}");
    Ok(())
}

/// End-time kinetic-energy sweeps for the four-ion trap.
pub fn run_iontrap(
    ctx: &Ctx,
    method: Method,
    switching: SwitchingKind,
    k_min: u32,
    k_max: u32,
) -> Result<(), CliError> {
    if k_min > k_max || k_max > richlab::iontrap::KE_SWEEP_K_LIMIT {
        return Err(CliError::Usage(format!(
            "sweep levels must satisfy kmin <= kmax <= {}, got {k_min}..{k_max}",
            richlab::iontrap::KE_SWEEP_K_LIMIT
        )));
    }
    let system = IonSystem::default_trap();
    let sf = match switching {
        SwitchingKind::None => SwitchingFunction::none(),
        kind => {
            let rho = equilibrium_edge(&system).map_err(|e| CliError::Runtime(e.to_string()))?;
            SwitchingFunction::new(kind, rho)
        }
    };
    let stem = format!("iontrap_{}_{}", method.name(), switching.name());
    let sweep = kinetic_energy_sweep(&system, &sf, method, k_min, k_max, &stem)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let d = diagnose(&sweep, Some(method.order() as f64));
    ctx.write_sweep_and_diag(&stem, &sweep, &d)?;
    println!("{}", verdict_line(&stem, &d));
    Ok(())
}

/// SHAKE energy sweeps on the quartic four-bead chain.
pub fn run_shake(ctx: &Ctx, tau: f64, k_min: u32, k_max: u32) -> Result<(), CliError> {
    if k_min > k_max || k_max > 24 {
        return Err(CliError::Usage(format!(
            "sweep levels must satisfy kmin <= kmax <= 24, got {k_min}..{k_max}"
        )));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(CliError::Usage(format!("tau must lie in (0, 1), got {tau}")));
    }
    let system = ConstrainedSystem::quartic_chain();
    let n_list: Vec<u64> = (k_min..=k_max).map(|k| 32u64 << k).collect();
    let tau_text = format!("{tau:e}");
    let stem = format!("shake_{tau_text}");
    let es = energy_sweep(&system, tau, &n_list, &stem)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    for (part, sweep) in [("kinetic", &es.kinetic), ("potential", &es.potential)] {
        let d = diagnose(sweep, Some(2.0));
        ctx.write_sweep_and_diag(&format!("{stem}_{part}"), sweep, &d)?;
        println!("{}", verdict_line(&format!("{stem}_{part}"), &d));
    }

    let kinetic: Vec<f64> = es.rows.iter().map(|r| r.kinetic).collect();
    let potential: Vec<f64> = es.rows.iter().map(|r| r.potential).collect();
    let mut summary = String::new();
    summary.push_str("        n            h                  kinetic                potential                    total   max_residual\n");
    for row in &es.rows {
        summary.push_str(&format!(
            "{:>9} {:>12} {:>24.16e} {:>24.16e} {:>24.16e} {:>14.3e}\n",
            row.n, row.h, row.kinetic, row.potential, row.total, row.max_residual
        ));
    }
    summary.push_str(&format!(
        "tail oscillation (kinetic, last 4 second differences): {:e}\n",
        tail_oscillation(&kinetic, 4)
    ));
    summary.push_str(&format!(
        "tail oscillation (potential, last 4 second differences): {:e}\n",
        tail_oscillation(&potential, 4)
    ));
    ctx.write_file(&format!("{stem}_summary.txt"), summary.as_bytes())?;
    Ok(())
}

/// Diagnose an existing sweep CSV.
pub fn run_analyze(ctx: &Ctx, input: &Path, p_nominal: Option<f64>) -> Result<(), CliError> {
    let file = File::open(input)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", input.display())))?;
    let sweep = read_sweep(BufReader::new(file)).map_err(|e| match e {
        SweepIoError::Io(err) => {
            CliError::Data(format!("cannot read {}: {err}", input.display()))
        }
        other => CliError::Runtime(format!("{}: {other}", input.display())),
    })?;
    let d = diagnose(&sweep, p_nominal);

    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".to_string());
    let out_stem = match stem.strip_suffix("_sweep") {
        Some(base) => base.to_string(),
        None => stem,
    };
    let mut buf = Vec::new();
    write_diagnosis(&mut buf, &sweep, &d, &ctx.meta).expect("in-memory write cannot fail");
    ctx.write_file(&format!("{out_stem}_diag.csv"), &buf)?;

    let name = if sweep.label().is_empty() {
        out_stem
    } else {
        sweep.label().to_string()
    };
    println!("{}", verdict_line(&name, &d));
    Ok(())
}
