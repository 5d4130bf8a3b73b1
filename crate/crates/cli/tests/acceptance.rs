//! Acceptance gate: ten numbered end-to-end checks covering every experiment
//! family, the closed-form theory limits, the oracle suite, and artifact
//! determinism. Each check prints one `acceptance N: PASS — ...` line (visible
//! with `--nocapture`); a failed assertion marks the criterion failed.
//!
//! Run with `cargo test -p richlab-cli --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::{E, FRAC_PI_4};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use richlab::atmosphere::{
    isa_sample, GAS_CONSTANT_AIR, HEAT_CAPACITY_RATIO, LAPSE_RATE, SEA_LEVEL_PRESSURE,
    SEA_LEVEL_TEMPERATURE, STANDARD_GRAVITY, STRATOSPHERE_TEMPERATURE, TROPOPAUSE_ALTITUDE,
};
use richlab::ballistics::{
    fly, maxrange_sweep, LaunchSetup, ShellSpec, D20_MUZZLE_SPEED,
};
use richlab::constrained_md::{
    energy_sweep, solve_constraints, tail_oscillation, Bond, ConstrainedSystem, ShakeSettings,
};
use richlab::dragmodel::{bundled, DragTable, ShellModel};
use richlab::extrapolation::{
    diagnose, richardson_estimate, richardson_fraction, validate_estimates, ConvergenceDiagnosis,
    Verdict,
};
use richlab::integrators::Method;
use richlab::iontrap::{
    equilibrium_edge, evolve, kinetic_energy_sweep, IonSystem, SwitchingFunction, SwitchingKind,
};
use richlab::quadrature::{exp_integrand, refinement_sweep, sqrt_integrand};

fn within_budget(t0: Instant, seconds: f64, what: &str) -> f64 {
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < seconds, "{what} took {elapsed:.1} s, budget {seconds} s");
    elapsed
}

fn window(d: &ConvergenceDiagnosis) -> (u32, u32) {
    d.asymptotic_window.expect("asymptotic window")
}

fn fraction_at(d: &ConvergenceDiagnosis, k: u32) -> f64 {
    d.fractions
        .iter()
        .find(|e| e.k == k)
        .and_then(|e| e.value)
        .unwrap_or_else(|| panic!("no usable fraction at level {k}"))
}

#[test]
fn acceptance_01_trapezoid_smooth_convergence() {
    let t0 = Instant::now();
    let sweep = refinement_sweep(&exp_integrand(), "rint_exp", 12);
    let d = diagnose(&sweep, None);

    assert_eq!(d.verdict, Verdict::AsymptoticRangeFound);
    let (lo, hi) = window(&d);
    assert!(lo <= 3 && hi >= 9, "window {lo}..{hi} must cover 3..9");
    let m_hat = d.m_hat.unwrap();
    assert!((m_hat - 2.0).abs() <= 0.1, "fraction-decay slope {m_hat} outside 2 +/- 0.1");
    // |F - 4| falls monotonically across the required levels.
    for k in 3..9 {
        let here = (fraction_at(&d, k) - 4.0).abs();
        let next = (fraction_at(&d, k + 1) - 4.0).abs();
        assert!(next < here, "|F-4| must decrease from k={k} ({here:.3e}) to k={} ({next:.3e})", k + 1);
    }

    // Error-estimate accuracy against the exact integral: below 1e-2 from
    // k = 6 on, and improving with k (coarse levels are uniformly worse).
    let scores: BTreeMap<u32, f64> = validate_estimates(&d, &sweep, E - 1.0)
        .into_iter()
        .filter_map(|(k, s)| s.map(|v| (k, v)))
        .collect();
    let mut tail_worst = 0.0f64;
    for (&k, &rel) in &scores {
        if k >= 6 {
            assert!(rel < 1e-2, "estimate accuracy {rel:.2e} at k={k} fails 1e-2");
            tail_worst = tail_worst.max(rel);
        }
    }
    for k in 1..6 {
        assert!(
            scores[&(k + 1)] < scores[&k],
            "estimate accuracy must improve from k={k} ({:.2e}) to k={} ({:.2e})",
            scores[&k],
            k + 1,
            scores[&(k + 1)]
        );
    }
    let head_best = (1..=4).map(|k| scores[&k]).fold(f64::INFINITY, f64::min);
    assert!(
        tail_worst < head_best,
        "estimates beyond k=6 (worst {tail_worst:.2e}) must beat every coarse level (best {head_best:.2e})"
    );

    let dt = within_budget(t0, 1.0, "trapezoid exp sweep");
    println!(
        "acceptance 1: PASS — window {lo}..{hi}, slope {m_hat:.3}, estimate accuracy <= {tail_worst:.1e} past k=6 ({dt:.2} s)"
    );
}

#[test]
fn acceptance_02_trapezoid_nonsmooth_orders() {
    let t0 = Instant::now();
    let sweep = refinement_sweep(&sqrt_integrand(), "rint_sqrt", 19);
    let d = diagnose(&sweep, None);

    assert_eq!(d.verdict, Verdict::AsymptoticRangeFound);
    let (lo, hi) = window(&d);
    assert!(lo <= 4 && hi >= 16, "window {lo}..{hi} must cover 4..16");
    let p_hat = d.p_hat.unwrap();
    let m_hat = d.m_hat.unwrap();
    assert!((p_hat - 1.5).abs() <= 0.03, "p_hat {p_hat} outside 1.5 +/- 0.03");
    assert!((m_hat - 0.5).abs() <= 0.05, "m_hat {m_hat} outside 0.5 +/- 0.05");

    // Estimates validated against the exact integral 2/3.
    let scores = validate_estimates(&d, &sweep, 2.0 / 3.0);
    for (k, rel) in scores {
        let rel = rel.expect("nonzero true error");
        if k >= 4 {
            assert!(rel < 5e-2, "estimate accuracy {rel:.2e} at k={k} fails 5e-2");
        }
        if k >= 10 {
            assert!(rel < 1e-2, "estimate accuracy {rel:.2e} at k={k} fails 1e-2");
        }
    }

    let dt = within_budget(t0, 5.0, "trapezoid sqrt sweep");
    println!("acceptance 2: PASS — window {lo}..{hi}, p_hat {p_hat:.4}, m_hat {m_hat:.3} ({dt:.2} s)");
}

#[test]
fn acceptance_03_two_term_model_limits() {
    let t0 = Instant::now();
    let (t_true, alpha, beta) = (1.0, 0.8, 0.6);
    for (p, q) in [(1.0f64, 2.0f64), (2.0, 4.0), (1.5, 2.0)] {
        let a = |h: f64| t_true - alpha * h.powf(p) - beta * h.powf(q);
        let m = q - p;

        // Defect of the error estimate, scaled by h^q: for a pure two-term
        // model the limit (1 - (2^q-1)/(2^p-1))·beta is met at any level.
        let h = (-8f64).exp2();
        let r = richardson_estimate(a(h), a(2.0 * h), p).unwrap();
        let defect = ((t_true - a(h)) - r) / h.powf(q);
        let defect_limit = (1.0 - (q.exp2() - 1.0) / (p.exp2() - 1.0)) * beta;
        let defect_err = (defect / defect_limit - 1.0).abs();
        assert!(
            defect_err < 0.01,
            "(p,q)=({p},{q}): defect {defect:.6} vs limit {defect_limit:.6} off by {defect_err:.2e}"
        );

        // Fraction limit 2^p and decay slope m = q - p, read off at a level
        // fine enough that the h^m contamination sits below 1%.
        let k_fine: i32 = if m < 1.5 { 17 } else { 12 };
        let f_at = |k: i32| {
            let h = (-k as f64).exp2();
            richardson_fraction(a(h), a(2.0 * h), a(4.0 * h)).unwrap()
        };
        let f_fine = f_at(k_fine);
        let fraction_err = (f_fine / p.exp2() - 1.0).abs();
        assert!(
            fraction_err < 0.01,
            "(p,q)=({p},{q}): fraction {f_fine:.6} vs limit {} off by {fraction_err:.2e}",
            p.exp2()
        );

        let defect_of = |k: i32| (f_at(k) - p.exp2()).abs();
        let slope = (defect_of(k_fine - 1) / defect_of(k_fine)).log2();
        let slope_err = (slope / m - 1.0).abs();
        assert!(
            slope_err < 0.01,
            "(p,q)=({p},{q}): fraction-decay slope {slope:.4} vs {m} off by {slope_err:.2e}"
        );
    }
    let dt = within_budget(t0, 1.0, "two-term model checks");
    println!("acceptance 3: PASS — defect limit, fraction limit, and slope within 1% for all three (p,q) pairs ({dt:.2} s)");
}

#[test]
fn acceptance_04_ballistics_first_order_recovery() {
    let t0 = Instant::now();
    let tol = (-53f64).exp2();
    let mut details = Vec::new();
    for shell in [ShellModel::G1, ShellModel::G7, ShellModel::G8] {
        let spec = ShellSpec::d20(bundled(shell).clone());
        let sweep = maxrange_sweep(&spec, Method::Rk1, tol, 1, 12, shell.name()).unwrap();
        let d = diagnose(&sweep, Some(1.0));
        assert_eq!(d.verdict, Verdict::AsymptoticRangeFound, "{}", shell.name());
        let (lo, hi) = window(&d);
        assert!(hi >= 12, "{}: k=12 must sit inside the window, got {lo}..{hi}", shell.name());
        let p_hat = d.p_hat.unwrap();
        let m_hat = d.m_hat.unwrap();
        assert!((p_hat - 1.0).abs() <= 0.05, "{}: p_hat {p_hat} outside 1 +/- 0.05", shell.name());
        assert!((m_hat - 1.0).abs() <= 0.2, "{}: m_hat {m_hat} outside 1 +/- 0.2", shell.name());
        details.push(format!("{} p_hat {p_hat:.3} m_hat {m_hat:.3}", shell.name()));
    }
    let dt = within_budget(t0, 120.0, "rk1 max-range sweeps");
    println!("acceptance 4: PASS — {} ({dt:.1} s)", details.join(", "));
}

#[test]
fn acceptance_05_ballistics_shell_ranking() {
    let t0 = Instant::now();
    let tol = (-53f64).exp2();
    let mut ranges: Vec<(ShellModel, f64, f64)> = Vec::new();
    for shell in ShellModel::ALL {
        let spec = ShellSpec::d20(bundled(shell).clone());
        let sweep = maxrange_sweep(&spec, Method::Rk1, tol, 11, 12, shell.name()).unwrap();
        let d = diagnose(&sweep, Some(1.0));
        let range = sweep.value(12).unwrap();
        let estimate = d
            .estimates
            .iter()
            .find(|&&(k, _)| k == 12)
            .map(|&(_, r)| r.abs())
            .expect("estimate at the finest level");
        ranges.push((shell, range, estimate));
    }

    let &(_, g7_range, _) = ranges.iter().find(|(s, _, _)| *s == ShellModel::G7).unwrap();
    assert!(
        (16_600.0..=18_300.0).contains(&g7_range),
        "G7 range {g7_range:.1} m outside 16.6..18.3 km"
    );
    for &(shell, range, estimate) in &ranges {
        assert!(estimate < 1.0, "{}: error estimate {estimate:.3} m at h=2^-9 fails 1 m", shell.name());
        if shell != ShellModel::G7 {
            assert!(
                range < g7_range - 400.0,
                "{}: range {range:.1} m not at least 400 m below G7's {g7_range:.1} m",
                shell.name()
            );
        }
    }

    let dt = within_budget(t0, 120.0, "six-shell ranking");
    let list = ranges
        .iter()
        .map(|(s, r, _)| format!("{} {:.0}", s.name(), r))
        .collect::<Vec<_>>()
        .join(", ");
    println!("acceptance 5: PASS — G7 strictly dominant by > 400 m, estimates < 1 m ({list}) ({dt:.1} s)");
}

#[test]
fn acceptance_06_event_tolerance_destroys_the_expansion() {
    let t0 = Instant::now();
    let shells = [ShellModel::G1, ShellModel::G7, ShellModel::G8];

    // Sloppy impact location: the computational error floods the h^2 term.
    let mut no_evidence = 0;
    for shell in shells {
        let spec = ShellSpec::d20(bundled(shell).clone());
        let sweep =
            maxrange_sweep(&spec, Method::Rk2, (-11f64).exp2(), 1, 12, shell.name()).unwrap();
        let d = diagnose(&sweep, Some(2.0));
        if d.verdict == Verdict::NoExpansionEvidence {
            no_evidence += 1;
        }
    }
    assert!(no_evidence >= 2, "only {no_evidence} of 3 shells lost the expansion at tol 2^-11");

    // Tight impact location restores clean second order.
    let mut p_hats = Vec::new();
    for shell in shells {
        let spec = ShellSpec::d20(bundled(shell).clone());
        let sweep =
            maxrange_sweep(&spec, Method::Rk2, (-53f64).exp2(), 1, 12, shell.name()).unwrap();
        let d = diagnose(&sweep, Some(2.0));
        assert_eq!(d.verdict, Verdict::AsymptoticRangeFound, "{} at tol 2^-53", shell.name());
        let p_hat = d.p_hat.unwrap();
        assert!(
            (p_hat - 2.0).abs() <= 0.1,
            "{}: p_hat {p_hat} outside 2 +/- 0.1 at tol 2^-53",
            shell.name()
        );
        p_hats.push(format!("{} {p_hat:.3}", shell.name()));
    }

    let dt = within_budget(t0, 180.0, "rk2 event-tolerance comparison");
    println!(
        "acceptance 6: PASS — {no_evidence}/3 shells NO_EXPANSION_EVIDENCE at 2^-11; tight tolerance gives {} ({dt:.1} s)",
        p_hats.join(", ")
    );
}

#[test]
fn acceptance_07_switching_function_smoothness() {
    let t0 = Instant::now();
    let system = IonSystem::default_trap();
    let rho = equilibrium_edge(&system).unwrap();
    let kmax = |m: Method| match m {
        Method::Rk1 => 20,
        Method::Rk2 => 16,
        Method::Rk3 | Method::Rk4 => 14,
    };

    // Smooth force fields (no switching, and the C^inf mollified cutoff)
    // recover each integrator's nominal order.
    let mut details = Vec::new();
    for method in Method::ALL {
        for kind in [SwitchingKind::None, SwitchingKind::G4Smooth] {
            let sf = match kind {
                SwitchingKind::None => SwitchingFunction::none(),
                other => SwitchingFunction::new(other, rho),
            };
            let sweep =
                kinetic_energy_sweep(&system, &sf, method, 6, kmax(method), "acceptance").unwrap();
            let d = diagnose(&sweep, Some(method.order() as f64));
            assert_eq!(
                d.verdict,
                Verdict::AsymptoticRangeFound,
                "{} with {}",
                method.name(),
                kind.name()
            );
            let p_hat = d.p_hat.unwrap();
            let nominal = method.order() as f64;
            assert!(
                (p_hat - nominal).abs() <= 0.15,
                "{} with {}: p_hat {p_hat} outside {nominal} +/- 0.15",
                method.name(),
                kind.name()
            );
            details.push(format!("{}/{} {p_hat:.2}", method.name(), kind.name()));
        }
    }

    // The discontinuous step cutoff destroys the expansion for at least
    // three of the four integrators.
    let mut no_evidence = 0;
    for method in Method::ALL {
        let sf = SwitchingFunction::new(SwitchingKind::G2Step, rho);
        let sweep = kinetic_energy_sweep(&system, &sf, method, 6, 14, "acceptance").unwrap();
        let d = diagnose(&sweep, Some(method.order() as f64));
        if d.verdict == Verdict::NoExpansionEvidence {
            no_evidence += 1;
        }
    }
    assert!(no_evidence >= 3, "only {no_evidence} of 4 integrators lost the expansion under g2");

    let dt = within_budget(t0, 120.0, "ion-trap switching comparison");
    println!(
        "acceptance 7: PASS — {}; g2 gives NO_EXPANSION_EVIDENCE on {no_evidence}/4 ({dt:.1} s)",
        details.join(", ")
    );
}

#[test]
fn acceptance_08_constraint_tolerance_pathology() {
    let t0 = Instant::now();
    let system = ConstrainedSystem::quartic_chain();
    let n_list: Vec<u64> = (0..=11).map(|k| 32u64 << k).collect();

    let tight = energy_sweep(&system, 1e-12, &n_list, "tight").unwrap();
    let d = diagnose(&tight.kinetic, Some(2.0));
    assert_eq!(d.verdict, Verdict::AsymptoticRangeFound, "tau = 1e-12");
    let p_hat = d.p_hat.unwrap();
    assert!((p_hat - 2.0).abs() <= 0.15, "p_hat {p_hat} outside 2 +/- 0.15 at tau 1e-12");

    let loose = energy_sweep(&system, 1e-4, &n_list, "loose").unwrap();
    let d_loose = diagnose(&loose.kinetic, Some(2.0));
    assert_eq!(d_loose.verdict, Verdict::NoExpansionEvidence, "tau = 1e-4");

    let osc = |sweep: &richlab::constrained_md::EnergySweep| {
        let kes: Vec<f64> = sweep.rows.iter().map(|r| r.kinetic).collect();
        tail_oscillation(&kes, 4)
    };
    let ratio = osc(&loose) / osc(&tight);
    assert!(ratio >= 10.0, "loose/tight oscillation ratio {ratio:.1} below 10");

    let dt = within_budget(t0, 60.0, "constraint-tolerance sweeps");
    println!("acceptance 8: PASS — tight p_hat {p_hat:.3}, loose NO_EXPANSION_EVIDENCE, oscillation ratio {ratio:.0}x ({dt:.1} s)");
}

#[test]
fn acceptance_09_oracle_suite() {
    let t0 = Instant::now();

    // (a) Vacuum ballistics against the closed-form range at 45 degrees:
    // first-order error decay for rk1, exactness (to roundoff) for rk4.
    let vacuum = ShellSpec::d20(
        DragTable::from_knots(vec![0.0, 2.5, 5.0], vec![0.0, 0.0, 0.0]).unwrap(),
    );
    let closed = D20_MUZZLE_SPEED * D20_MUZZLE_SPEED / STANDARD_GRAVITY;
    let tol = (-53f64).exp2();
    let err = |k: i32, method: Method| {
        let setup = LaunchSetup::new(FRAC_PI_4, (-k as f64).exp2(), method, tol).unwrap();
        (fly(&vacuum, &setup).unwrap().range - closed).abs()
    };
    for k in [4, 8] {
        let order = (err(k, Method::Rk1) / err(k + 1, Method::Rk1)).log2();
        assert!((order - 1.0).abs() <= 0.05, "vacuum rk1 order {order:.3} at k={k}");
    }
    let rk4_rel = (fly(&vacuum, &LaunchSetup::new(FRAC_PI_4, 1.0, Method::Rk4, tol).unwrap())
        .unwrap()
        .range
        - closed)
        .abs()
        / closed;
    assert!(rk4_rel < 1e-12, "vacuum rk4 relative error {rk4_rel:.2e}");

    // (b) ISA against an independent barometric evaluation.
    for altitude in [-500.0, 0.0, 4321.0, 10_999.0, 11_000.0, 15_000.0, 20_000.0] {
        let s = isa_sample(altitude);
        let (g, r) = (STANDARD_GRAVITY, GAS_CONSTANT_AIR);
        let (t_ref, p_ref) = if altitude <= TROPOPAUSE_ALTITUDE {
            let t = SEA_LEVEL_TEMPERATURE + LAPSE_RATE * altitude;
            (t, SEA_LEVEL_PRESSURE * (t / SEA_LEVEL_TEMPERATURE).powf(-g / (LAPSE_RATE * r)))
        } else {
            let t_tp = SEA_LEVEL_TEMPERATURE + LAPSE_RATE * TROPOPAUSE_ALTITUDE;
            let p_tp =
                SEA_LEVEL_PRESSURE * (t_tp / SEA_LEVEL_TEMPERATURE).powf(-g / (LAPSE_RATE * r));
            let t = STRATOSPHERE_TEMPERATURE;
            (t, p_tp * (-g * (altitude - TROPOPAUSE_ALTITUDE) / (r * t)).exp())
        };
        let rho_ref = p_ref / (r * t_ref);
        let a_ref = (HEAT_CAPACITY_RATIO * r * t_ref).sqrt();
        for (got, want, what) in [
            (s.temperature, t_ref, "temperature"),
            (s.pressure, p_ref, "pressure"),
            (s.density, rho_ref, "density"),
            (s.speed_of_sound, a_ref, "speed of sound"),
        ] {
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "ISA {what} at {altitude} m: {got} vs {want}"
            );
        }
    }

    // (c) Spline interpolation reproduces every knot of every bundled table.
    for shell in ShellModel::ALL {
        let table = bundled(shell);
        for (mach, cd) in table.knots() {
            assert!(
                (table.cd(mach) - cd).abs() <= 1e-12 * cd.abs().max(1.0),
                "{} knot at M={mach}",
                shell.name()
            );
        }
    }

    // (d) Tetrahedron equilibrium: closed form vs force balance, and both vs
    // the edge the damped dynamics actually relax to.
    let mut system = IonSystem::default_trap();
    let edge = equilibrium_edge(&system).unwrap();
    let closed_edge = (4.0 * system.coulomb_constant * system.charge * system.charge
        / system.spring_k)
        .cbrt();
    assert!((edge - closed_edge).abs() <= 1e-12 * closed_edge);
    system.t_end = 80.0;
    let relaxed = evolve(&system, &SwitchingFunction::none(), Method::Rk4, 8000).unwrap();
    assert!(relaxed.kinetic_energy() < 1e-9, "trap failed to relax");
    let mut mean_edge = 0.0;
    let mut pairs = 0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let (a, b) = (relaxed.positions[i], relaxed.positions[j]);
            mean_edge +=
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            pairs += 1;
        }
    }
    mean_edge /= pairs as f64;
    assert!(
        ((mean_edge - edge) / edge).abs() < 1e-6,
        "relaxed edge {mean_edge} vs equilibrium {edge}"
    );

    // (e) Single-bond constraint multiplier against the quadratic's root.
    let diatomic = ConstrainedSystem::new(
        vec![1.0, 1.0],
        vec![Bond { a: 0, b: 1, length: 1.0 }],
        vec![-0.5, 0.0, 0.0, 0.5, 0.0, 0.0],
        vec![0.0; 6],
        1.0,
        Box::new(|_q, out| out.fill(0.0)),
        Box::new(|_q| 0.0),
    )
    .unwrap();
    let (h, tau) = (0.1, 1e-12);
    let settings = ShakeSettings::new(h, tau, 100).unwrap();
    let trial = vec![-0.65, 0.0, 0.0, 0.65, 0.0, 0.0];
    let solution =
        solve_constraints(&trial, diatomic.initial_positions(), &diatomic, &settings).unwrap();
    let (a, b, c) = (4.0 * 2.0 * 2.0, -4.0 * 2.0 * 1.3, 1.3f64 * 1.3 - 1.0);
    let gamma_closed = 2.0 * c / (-b + (b * b - 4.0 * a * c).sqrt());
    let lambda_closed = gamma_closed / (h * h);
    assert!(
        ((solution.lambdas[0] - lambda_closed) / lambda_closed).abs() < tau,
        "lambda {} vs closed form {lambda_closed}",
        solution.lambdas[0]
    );

    let dt = within_budget(t0, 30.0, "oracle suite");
    println!("acceptance 9: PASS — vacuum order, ISA, spline knots, tetrahedron, and constraint multiplier oracles agree ({dt:.1} s)");
}

#[test]
fn acceptance_10_artifact_determinism() {
    let t0 = Instant::now();
    let bin = env!("CARGO_BIN_EXE_richlab");

    let snapshot = |dir: &Path| -> BTreeMap<String, Vec<u8>> {
        let mut files = BTreeMap::new();
        for entry in std::fs::read_dir(dir).expect("read dir") {
            let entry = entry.expect("entry");
            let name = entry.file_name().to_string_lossy().into_owned();
            files.insert(name, std::fs::read(entry.path()).expect("read artifact"));
        }
        files
    };

    let runs: &[&[&str]] = &[
        &["quad", "--kmax", "9"],
        &["ballistics", "--shell", "G7", "--kmax", "5"],
        &["iontrap", "--method", "rk3", "--switching", "g4", "--kmax", "11"],
        &["shake", "--kmax", "6"],
    ];
    let mut artifact_total = 0;
    for args in runs {
        let mut snaps = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let status = Command::new(bin)
                .args(*args)
                .args(["--no-meta", "--output-dir", dir.path().to_str().unwrap()])
                .status()
                .expect("spawn richlab");
            assert!(status.success(), "{args:?} failed");
            // analyze every sweep the run produced, into the same directory
            for name in snapshot(dir.path()).keys() {
                if name.ends_with("_sweep.csv") {
                    let input = dir.path().join(name);
                    let status = Command::new(bin)
                        .args(["analyze", "--input", input.to_str().unwrap(), "--no-meta"])
                        .args(["--output-dir", dir.path().to_str().unwrap()])
                        .status()
                        .expect("spawn richlab analyze");
                    assert!(status.success(), "analyze of {name} failed");
                }
            }
            snaps.push(snapshot(dir.path()));
        }
        assert!(!snaps[0].is_empty(), "{args:?} wrote nothing");
        assert_eq!(snaps[0], snaps[1], "rerun of {args:?} changed artifacts");
        artifact_total += snaps[0].len();
    }

    let parallel = if cfg!(feature = "parallel") { "with" } else { "without" };
    let dt = within_budget(t0, 120.0, "determinism reruns");
    println!(
        "acceptance 10: PASS — {artifact_total} artifacts byte-identical across reruns, {parallel} parallel sweeps ({dt:.1} s)"
    );
}
