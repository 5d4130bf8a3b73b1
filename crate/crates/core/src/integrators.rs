//! Fixed-step explicit Runge–Kutta steppers of orders 1–4 for first-order
//! vector ODEs `y' = F(t, y)`.
//!
//! The four methods are Euler (`rk1`), Heun's explicit trapezoidal rule
//! (`rk2`), Kutta's third-order rule (`rk3`), and the classical fourth-order
//! scheme (`rk4`). Step times are computed as `t0 + n·h` rather than by
//! accumulation so the time grid carries no drift into the error signal.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntegratorError {
    #[error("non-finite stage value at t = {t}, stage {stage}")]
    NonFiniteStage { t: f64, stage: usize },
}

/// Explicit RK method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Rk1,
    Rk2,
    Rk3,
    Rk4,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Rk1, Method::Rk2, Method::Rk3, Method::Rk4];

    /// Consistency order of the scheme.
    pub fn order(self) -> u32 {
        match self {
            Method::Rk1 => 1,
            Method::Rk2 => 2,
            Method::Rk3 => 3,
            Method::Rk4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Rk1 => "rk1",
            Method::Rk2 => "rk2",
            Method::Rk3 => "rk3",
            Method::Rk4 => "rk4",
        }
    }

    fn tableau(self) -> &'static Tableau {
        match self {
            Method::Rk1 => &RK1,
            Method::Rk2 => &RK2,
            Method::Rk3 => &RK3,
            Method::Rk4 => &RK4,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk1" => Ok(Method::Rk1),
            "rk2" => Ok(Method::Rk2),
            "rk3" => Ok(Method::Rk3),
            "rk4" => Ok(Method::Rk4),
            other => Err(format!("unknown method `{other}` (expected rk1..rk4)")),
        }
    }
}

/// Butcher tableau of an explicit method: nodes `c`, strictly lower
/// triangular stage matrix `a` (row `i` holds the coefficients of stage
/// `i+1`), and weights `b`.
struct Tableau {
    c: &'static [f64],
    a: &'static [&'static [f64]],
    b: &'static [f64],
}

static RK1: Tableau = Tableau { c: &[0.0], a: &[], b: &[1.0] };
static RK2: Tableau = Tableau { c: &[0.0, 1.0], a: &[&[1.0]], b: &[0.5, 0.5] };
static RK3: Tableau = Tableau {
    c: &[0.0, 0.5, 1.0],
    a: &[&[0.5], &[-1.0, 2.0]],
    b: &[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
};
static RK4: Tableau = Tableau {
    c: &[0.0, 0.5, 0.5, 1.0],
    a: &[&[0.5], &[0.0, 0.5], &[0.0, 0.0, 1.0]],
    b: &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
};

/// Reusable stepper holding the stage scratch space for one state dimension.
pub struct RkStepper {
    method: Method,
    dim: usize,
    stages: Vec<f64>,
    ytmp: Vec<f64>,
}

impl RkStepper {
    pub fn new(method: Method, dim: usize) -> Self {
        let n_stages = method.tableau().b.len();
        Self { method, dim, stages: vec![0.0; n_stages * dim], ytmp: vec![0.0; dim] }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Advance `y` in place by one step of size `h` starting at time `t`.
    pub fn step<F>(&mut self, f: &mut F, t: f64, y: &mut [f64], h: f64) -> Result<(), IntegratorError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        assert_eq!(y.len(), self.dim, "state dimension mismatch");
        let tab = self.method.tableau();
        let n_stages = tab.b.len();
        for i in 0..n_stages {
            self.ytmp.copy_from_slice(y);
            for j in 0..i {
                let a_ij = tab.a[i - 1][j];
                if a_ij != 0.0 {
                    let kj = &self.stages[j * self.dim..(j + 1) * self.dim];
                    for (yt, &k) in self.ytmp.iter_mut().zip(kj) {
                        *yt += h * a_ij * k;
                    }
                }
            }
            let ki = &mut self.stages[i * self.dim..(i + 1) * self.dim];
            f(t + tab.c[i] * h, &self.ytmp, ki);
            if ki.iter().any(|v| !v.is_finite()) {
                return Err(IntegratorError::NonFiniteStage { t, stage: i });
            }
        }
        for i in 0..n_stages {
            let ki = &self.stages[i * self.dim..(i + 1) * self.dim];
            let bi = tab.b[i];
            for (yv, &k) in y.iter_mut().zip(ki) {
                *yv += h * bi * k;
            }
        }
        Ok(())
    }
}

/// One explicit RK step; returns the advanced state, inputs untouched.
pub fn rk_step<F>(method: Method, f: &mut F, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>, IntegratorError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut out = y.to_vec();
    RkStepper::new(method, y.len()).step(f, t, &mut out, h)?;
    Ok(out)
}

/// Integrate `n_steps` uniform steps, returning the whole trajectory
/// including the initial state.
pub fn integrate_fixed<F>(
    method: Method,
    f: &mut F,
    t0: f64,
    y0: &[f64],
    h: f64,
    n_steps: u64,
) -> Result<Vec<(f64, Vec<f64>)>, IntegratorError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut stepper = RkStepper::new(method, y0.len());
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(n_steps as usize + 1);
    out.push((t0, y.clone()));
    for n in 0..n_steps {
        let t = t0 + n as f64 * h;
        stepper.step(f, t, &mut y, h)?;
        out.push((t0 + (n + 1) as f64 * h, y.clone()));
    }
    Ok(out)
}

/// Integrate `n_steps` uniform steps, returning only the final state.
pub fn integrate_endpoint<F>(
    method: Method,
    f: &mut F,
    t0: f64,
    y0: &[f64],
    h: f64,
    n_steps: u64,
) -> Result<Vec<f64>, IntegratorError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut stepper = RkStepper::new(method, y0.len());
    let mut y = y0.to_vec();
    for n in 0..n_steps {
        let t = t0 + n as f64 * h;
        stepper.step(f, t, &mut y, h)?;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrapolation::{diagnose, SampleSweep, Verdict};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn exp_ode(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[0];
    }

    #[test]
    fn euler_update() {
        for h in [0.5, 0.1, 0.01] {
            let y = rk_step(Method::Rk1, &mut exp_ode, 0.0, &[1.0], h).unwrap();
            assert_relative_eq!(y[0], 1.0 + h, max_relative = 1e-15);
        }
    }

    #[test]
    fn heun_update_matches_series() {
        for h in [0.5, 0.1, 0.01] {
            let y = rk_step(Method::Rk2, &mut exp_ode, 0.0, &[1.0], h).unwrap();
            assert_relative_eq!(y[0], 1.0 + h + 0.5 * h * h, max_relative = 1e-15);
        }
    }

    #[test]
    fn classical_rk4_update() {
        // y' = y, h = 0.1: the update reproduces the Taylor series of e^h
        // through h⁴/24 exactly.
        let y = rk_step(Method::Rk4, &mut exp_ode, 0.0, &[1.0], 0.1).unwrap();
        assert_abs_diff_eq!(y[0], 1.105_170_833_333_333_3, epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        for m in Method::ALL {
            let sum: f64 = m.tableau().b.iter().sum();
            assert_relative_eq!(sum, 1.0, max_relative = 1e-15);
            assert_eq!(m.tableau().c.len(), m.tableau().b.len());
            assert_eq!(m.tableau().a.len() + 1, m.tableau().b.len());
        }
    }

    #[test]
    fn zero_steps_gives_initial_state() {
        let traj = integrate_fixed(Method::Rk3, &mut exp_ode, 2.0, &[5.0], 0.25, 0).unwrap();
        assert_eq!(traj, vec![(2.0, vec![5.0])]);
    }

    #[test]
    fn zero_rhs_keeps_state_constant() {
        let mut zero = |_t: f64, _y: &[f64], dy: &mut [f64]| dy.fill(0.0);
        for m in Method::ALL {
            let y = integrate_endpoint(m, &mut zero, 0.0, &[1.5, -2.5], 0.125, 64).unwrap();
            assert_eq!(y, vec![1.5, -2.5]);
        }
    }

    #[test]
    fn harmonic_oscillator_rk4() {
        // y'' = −y as a first-order system; position matches cos(1) to 1e−9.
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let y = integrate_endpoint(Method::Rk4, &mut f, 0.0, &[1.0, 0.0], 0.01, 100).unwrap();
        assert_abs_diff_eq!(y[0], 1.0f64.cos(), epsilon = 1e-9);
    }

    #[test]
    fn empirical_order_matches_nominal() {
        // Endpoint sweep of y' = y over [0, 1]; the diagnosed order must be
        // the nominal order of each method. This couples the integrators to
        // the extrapolation module as its own oracle.
        for m in Method::ALL {
            let k_max = if m.order() <= 2 { 14 } else { 10 };
            let entries: Vec<(u32, f64)> = (0..=k_max)
                .map(|k| {
                    let n = 1u64 << k;
                    let h = 1.0 / n as f64;
                    let y = integrate_endpoint(m, &mut exp_ode, 0.0, &[1.0], h, n).unwrap();
                    (k, y[0])
                })
                .collect();
            let sweep = SampleSweep::new(1.0, "exp endpoint", entries).unwrap();
            let d = diagnose(&sweep, Some(m.order() as f64));
            assert_eq!(d.verdict, Verdict::AsymptoticRangeFound, "{}", m.name());
            assert_abs_diff_eq!(d.p_hat.unwrap(), m.order() as f64, epsilon = 0.1);
        }
    }

    #[test]
    fn linear_problems_commute_with_state_scaling() {
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = 2.5 * y[0];
        for m in Method::ALL {
            let base = integrate_endpoint(m, &mut f, 0.0, &[1.0], 0.01, 100).unwrap();
            let scaled = integrate_endpoint(m, &mut f, 0.0, &[3.0], 0.01, 100).unwrap();
            assert_relative_eq!(scaled[0], 3.0 * base[0], max_relative = 1e-13);
        }
    }

    #[test]
    fn trajectories_are_deterministic() {
        let mut f = |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0] * (1.0 + 0.3 * t.sin());
        };
        let a = integrate_fixed(Method::Rk4, &mut f, 0.0, &[1.0, 0.5], 0.01, 500).unwrap();
        let b = integrate_fixed(Method::Rk4, &mut f, 0.0, &[1.0, 0.5], 0.01, 500).unwrap();
        assert_eq!(a, b, "identical inputs must give bitwise-identical trajectories");
    }

    #[test]
    fn blowup_reports_time_and_stage() {
        // y' = y² from y0 = 1: the exact solution blows up at t = 1; the
        // discrete orbit overflows a handful of steps later.
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0];
        let err = integrate_endpoint(Method::Rk1, &mut f, 0.0, &[1.0], 0.05, 10_000).unwrap_err();
        let IntegratorError::NonFiniteStage { t, stage } = err;
        assert!(t > 1.0 && t < 2.5, "overflow shortly after t = 1, got {t}");
        assert_eq!(stage, 0);
    }
}
