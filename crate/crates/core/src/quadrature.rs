//! Composite trapezoidal quadrature and its refinement sweeps.
//!
//! The rule is evaluated with the textbook formula
//! `A_h = ½h·Σ_j [f(x_j) + f(x_{j+1})]`, summed left to right with no
//! compensation: the point of these sweeps is to watch the error expansion
//! (and, at very fine steps, the subtractive-cancellation tail) exactly as a
//! straightforward implementation produces them.

use crate::exec;
use crate::extrapolation::SampleSweep;

/// A definite integral target: integrand, interval, and (when known) the
/// true value used to validate error estimates.
#[derive(Debug, Clone, Copy)]
pub struct Integrand<F> {
    pub f: F,
    pub a: f64,
    pub b: f64,
    pub t_true: Option<f64>,
}

impl<F: Fn(f64) -> f64> Integrand<F> {
    pub fn new(f: F, a: f64, b: f64, t_true: Option<f64>) -> Self {
        assert!(a < b, "integration interval must satisfy a < b");
        Self { f, a, b, t_true }
    }
}

/// `∫₀¹ eˣ dx = e − 1`.
pub fn exp_integrand() -> Integrand<fn(f64) -> f64> {
    Integrand::new(f64::exp, 0.0, 1.0, Some(std::f64::consts::E - 1.0))
}

/// `∫₀¹ √x dx = 2/3`. The integrand is finite on the whole interval but not
/// smooth at 0, which caps the observable order at p = 3/2.
pub fn sqrt_integrand() -> Integrand<fn(f64) -> f64> {
    Integrand::new(f64::sqrt, 0.0, 1.0, Some(2.0 / 3.0))
}

/// Composite trapezoidal rule with `n` uniform intervals, summed left to
/// right.
pub fn trapezoid<F: Fn(f64) -> f64>(integrand: &Integrand<F>, n: u64) -> f64 {
    assert!(n >= 1, "need at least one interval");
    let h = (integrand.b - integrand.a) / n as f64;
    let mut sum = 0.0;
    for j in 0..n {
        let x0 = integrand.a + j as f64 * h;
        let x1 = integrand.a + (j + 1) as f64 * h;
        sum += (integrand.f)(x0) + (integrand.f)(x1);
    }
    0.5 * h * sum
}

/// Refinement sweep over `k = 0..=k_max` with `n = 2^k` intervals, so
/// `h_k = (b − a)·2^{-k}`.
pub fn refinement_sweep<F: Fn(f64) -> f64 + Sync + Send>(
    integrand: &Integrand<F>,
    label: &str,
    k_max: u32,
) -> SampleSweep {
    refinement_sweep_range(integrand, label, 0, k_max)
}

/// Refinement sweep over an explicit inclusive level range.
pub fn refinement_sweep_range<F: Fn(f64) -> f64 + Sync + Send>(
    integrand: &Integrand<F>,
    label: &str,
    k_min: u32,
    k_max: u32,
) -> SampleSweep {
    assert!(k_min <= k_max, "empty refinement range");
    let ks: Vec<u32> = (k_min..=k_max).collect();
    let values = exec::ordered_map(ks.clone(), |k| trapezoid(integrand, 1u64 << k));
    let entries = ks.into_iter().zip(values).collect();
    SampleSweep::new(integrand.b - integrand.a, label, entries)
        .expect("refinement sweep construction cannot fail")
}
