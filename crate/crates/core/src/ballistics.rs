//! Planar point-mass exterior ballistics: gravity plus Mach-dependent drag,
//! ground-impact event location, range-vs-elevation maximization, and
//! step-size sweeps of the maximum range for convergence diagnosis.
//!
//! The state vector is `y = [x, altitude, vx, vy]`. A shot launches from the
//! origin at ground level; flight ends at the first integration step whose
//! endpoint altitude is at or below zero, after which the final partial step
//! length is solved by bisection so the shell lands on —rather than under—
//! the ground. The partial step uses the same Runge–Kutta method as the main
//! integration: the event solve is part of the numerical method whose
//! convergence is being studied, not an exact oracle bolted onto it.

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::atmosphere::{isa_sample, STANDARD_GRAVITY};
use crate::dragmodel::DragTable;
use crate::exec;
use crate::extrapolation::{ExtrapolationError, SampleSweep};
use crate::integrators::{rk_step, IntegratorError, Method, RkStepper};
use crate::solvers::{bisect, golden_max, Bracket, SolverError, DEFAULT_BISECT_MAX_ITER, DEFAULT_GOLDEN_TOL};

/// D-20 howitzer shell diameter, m.
pub const D20_DIAMETER: f64 = 0.1524;

/// D-20 OF-540 shell mass, kg.
pub const D20_MASS: f64 = 43.56;

/// D-20 full-charge muzzle speed, m/s.
pub const D20_MUZZLE_SPEED: f64 = 655.0;

/// Flights longer than this are treated as non-terminating.
pub const MAX_FLIGHT_TIME: f64 = 1.0e4;

/// Base step of maximum-range sweeps: h_k = 8·2⁻ᵏ seconds.
pub const MAXRANGE_SWEEP_H0: f64 = 8.0;

/// Largest refinement level accepted by [`maxrange_sweep`].
pub const MAXRANGE_SWEEP_K_LIMIT: u32 = 16;

#[derive(Debug, Error)]
pub enum BallisticsError {
    #[error("invalid shot parameter: {msg}")]
    InvalidParameter { msg: String },
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error("event location failed: {0}")]
    EventLocation(SolverError),
    #[error("range maximization failed: {0}")]
    Maximization(SolverError),
    #[error("shell still aloft after {limit} s; aborting")]
    FlightTimeExceeded { limit: f64 },
    #[error(transparent)]
    Sweep(#[from] ExtrapolationError),
}

/// Physical description of a shell: point mass plus a drag family.
#[derive(Debug, Clone)]
pub struct ShellSpec {
    pub mass: f64,
    pub diameter: f64,
    pub muzzle_speed: f64,
    pub drag: DragTable,
}

impl ShellSpec {
    pub fn new(mass: f64, diameter: f64, muzzle_speed: f64, drag: DragTable) -> Result<Self, BallisticsError> {
        for (name, v) in [("mass", mass), ("diameter", diameter), ("muzzle_speed", muzzle_speed)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(BallisticsError::InvalidParameter {
                    msg: format!("{name} must be positive and finite, got {v}"),
                });
            }
        }
        Ok(Self { mass, diameter, muzzle_speed, drag })
    }

    /// The D-20 reproduction parameters with the given drag table.
    pub fn d20(drag: DragTable) -> Self {
        Self { mass: D20_MASS, diameter: D20_DIAMETER, muzzle_speed: D20_MUZZLE_SPEED, drag }
    }

    fn cross_section(&self) -> f64 {
        PI * self.diameter * self.diameter / 4.0
    }
}

/// Numerical parameters of one shot.
#[derive(Debug, Clone, Copy)]
pub struct LaunchSetup {
    /// Elevation above the horizon, radians, in [0, π/2].
    pub elevation: f64,
    /// Time step, s.
    pub h: f64,
    pub method: Method,
    /// Event-location tolerance relative to the step: the final partial step
    /// is resolved to an absolute tolerance of `h·event_tol`.
    pub event_tol: f64,
}

impl LaunchSetup {
    pub fn new(elevation: f64, h: f64, method: Method, event_tol: f64) -> Result<Self, BallisticsError> {
        if !(elevation.is_finite() && (0.0..=FRAC_PI_2).contains(&elevation)) {
            return Err(BallisticsError::InvalidParameter {
                msg: format!("elevation must lie in [0, π/2], got {elevation}"),
            });
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(BallisticsError::InvalidParameter { msg: format!("step must be positive, got {h}") });
        }
        if !(event_tol.is_finite() && event_tol > 0.0 && event_tol < 1.0) {
            return Err(BallisticsError::InvalidParameter {
                msg: format!("event_tol must lie in (0, 1), got {event_tol}"),
            });
        }
        Ok(Self { elevation, h, method, event_tol })
    }
}

/// Ground-impact summary. `state` is `[x, altitude, vx, vy]` after the
/// adjusted final step; `altitude` is within the event tolerance of zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impact {
    pub range: f64,
    pub time: f64,
    pub state: [f64; 4],
}

impl Impact {
    pub fn speed(&self) -> f64 {
        self.state[2].hypot(self.state[3])
    }
}

/// Right-hand side of the trajectory ODE for a shell.
///
/// Drag force is ½·ρ·‖v‖²·Cd(M)·(πd²/4) opposing the velocity, i.e. the
/// acceleration is `(0, −g0) − (ρ‖v‖·Cd·πd²/(8m))·v`.
pub fn shell_ode(spec: &ShellSpec) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    let area = spec.cross_section();
    move |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (vx, vy) = (y[2], y[3]);
        let speed = vx.hypot(vy);
        let atm = isa_sample(y[1]);
        let cd = spec.drag.cd(speed / atm.speed_of_sound);
        let k = atm.density * speed * cd * area / (2.0 * spec.mass);
        dy[0] = vx;
        dy[1] = vy;
        dy[2] = -k * vx;
        dy[3] = -STANDARD_GRAVITY - k * vy;
    }
}

/// Trajectory samples `(t, [x, altitude, vx, vy])`, step endpoints only.
pub type Trajectory = Vec<(f64, [f64; 4])>;

/// Fly one shot and return the impact summary. No trajectory is stored, so
/// sweeps over many step sizes stay cheap.
pub fn fly(spec: &ShellSpec, setup: &LaunchSetup) -> Result<Impact, BallisticsError> {
    fly_inner(spec, setup, None)
}

/// Fly one shot, also recording the state at every step endpoint (including
/// launch and the adjusted final step).
pub fn fly_traced(spec: &ShellSpec, setup: &LaunchSetup) -> Result<(Impact, Trajectory), BallisticsError> {
    let mut trace = Trajectory::new();
    let impact = fly_inner(spec, setup, Some(&mut trace))?;
    Ok((impact, trace))
}

fn fly_inner(
    spec: &ShellSpec,
    setup: &LaunchSetup,
    mut trace: Option<&mut Trajectory>,
) -> Result<Impact, BallisticsError> {
    let h = setup.h;
    let theta = setup.elevation;
    let mut y = [
        0.0,
        0.0,
        spec.muzzle_speed * theta.cos(),
        spec.muzzle_speed * theta.sin(),
    ];
    if let Some(tr) = trace.as_deref_mut() {
        tr.push((0.0, y));
    }
    let mut f = shell_ode(spec);
    let mut stepper = RkStepper::new(setup.method, 4);
    let max_steps = (MAX_FLIGHT_TIME / h).ceil() as u64;
    for n in 0..max_steps {
        let t = n as f64 * h;
        let prev = y;
        stepper.step(&mut f, t, &mut y, h)?;
        if y[1] > 0.0 {
            if let Some(tr) = trace.as_deref_mut() {
                tr.push((t + h, y));
            }
            continue;
        }
        // First step-end at or below ground: adjust the final step length.
        // At launch the altitude is exactly zero, which a rising shot must
        // not mistake for an impact, so the bracket is nudged off zero.
        let lo = if n == 0 && prev[3] > 0.0 { h * 2f64.powi(-20) } else { 0.0 };
        let mut stage_err = None;
        let g = |s: f64| match rk_step(setup.method, &mut f, t, &prev, s) {
            Ok(ys) => ys[1],
            Err(e) => {
                stage_err = Some(e);
                f64::NAN
            }
        };
        let bracket = Bracket::new(lo, h).map_err(BallisticsError::EventLocation)?;
        let s = bisect(g, bracket, h * setup.event_tol, DEFAULT_BISECT_MAX_ITER).map_err(|e| {
            match stage_err {
                Some(ie) => BallisticsError::Integrator(ie),
                None => BallisticsError::EventLocation(e),
            }
        })?;
        let state_vec = rk_step(setup.method, &mut shell_ode(spec), t, &prev, s)?;
        let state: [f64; 4] = state_vec.try_into().expect("state has four components");
        let impact = Impact { range: state[0], time: t + s, state };
        if let Some(tr) = trace.as_deref_mut() {
            tr.push((impact.time, state));
        }
        return Ok(impact);
    }
    Err(BallisticsError::FlightTimeExceeded { limit: MAX_FLIGHT_TIME })
}

/// Range as a function of elevation with everything else fixed.
pub fn range_function<'a>(
    spec: &'a ShellSpec,
    h: f64,
    method: Method,
    event_tol: f64,
) -> impl Fn(f64) -> Result<f64, BallisticsError> + 'a {
    move |theta: f64| {
        let setup = LaunchSetup::new(theta, h, method, event_tol)?;
        Ok(fly(spec, &setup)?.range)
    }
}

/// Golden-section maximization of the range function over elevations
/// [0, π/2]. Returns `(θ*, range*)`.
pub fn max_range(
    spec: &ShellSpec,
    h: f64,
    method: Method,
    event_tol: f64,
) -> Result<(f64, f64), BallisticsError> {
    let range_of = range_function(spec, h, method, event_tol);
    let mut first_err = None;
    let phi = |theta: f64| match range_of(theta) {
        Ok(r) => r,
        Err(e) => {
            if first_err.is_none() {
                first_err = Some(e);
            }
            f64::NAN
        }
    };
    let bracket = Bracket::new(0.0, FRAC_PI_2).map_err(BallisticsError::Maximization)?;
    match golden_max(phi, bracket, DEFAULT_GOLDEN_TOL) {
        Ok((theta, range)) => Ok((theta, range)),
        Err(e) => Err(first_err.unwrap_or(BallisticsError::Maximization(e))),
    }
}

/// Maximum range at step sizes h_k = 8·2⁻ᵏ for k in `k_lo..=k_hi`, as a
/// sweep ready for convergence diagnosis. Levels run in parallel when the
/// `parallel` feature is on; assembly order is by k either way.
pub fn maxrange_sweep(
    spec: &ShellSpec,
    method: Method,
    event_tol: f64,
    k_lo: u32,
    k_hi: u32,
    label: &str,
) -> Result<SampleSweep, BallisticsError> {
    if !(1 <= k_lo && k_lo <= k_hi && k_hi <= MAXRANGE_SWEEP_K_LIMIT) {
        return Err(BallisticsError::InvalidParameter {
            msg: format!("sweep levels must satisfy 1 ≤ k_lo ≤ k_hi ≤ {MAXRANGE_SWEEP_K_LIMIT}, got {k_lo}..={k_hi}"),
        });
    }
    let ks: Vec<u32> = (k_lo..=k_hi).collect();
    let entries = exec::try_ordered_map(ks, |k| {
        let h = MAXRANGE_SWEEP_H0 * (-(k as f64)).exp2();
        max_range(spec, h, method, event_tol).map(|(_, range)| (k, range))
    })?;
    Ok(SampleSweep::new(MAXRANGE_SWEEP_H0, label, entries)?)
}
