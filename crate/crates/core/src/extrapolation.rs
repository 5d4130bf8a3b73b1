//! Richardson error estimates, fraction series, and convergence-order
//! diagnosis over step-halving sample sweeps.
//!
//! Given approximations `A_h` of a target `T` computed at step sizes
//! `h_k = h0·2^{-k}`, a method with an asymptotic error expansion
//! `T − A_h = α·h^p + β·h^q + O(h^r)` exposes its orders through two
//! derived quantities:
//!
//! * the error estimate `R_h = (A_h − A_{2h}) / (2^p − 1)`, which tracks the
//!   true error to leading order, and
//! * the fraction `F_h = (A_{2h} − A_{4h}) / (A_h − A_{2h})`, which tends to
//!   `2^p` with a log-linear defect of slope `m = q − p`.
//!
//! [`diagnose`] automates what is usually done by eyeballing a fraction
//! plot: it finds the contiguous window of refinement levels over which
//! `−log2|F − 2^p|` grows linearly in `k`, and reports the empirical order
//! `p_hat`, the defect slope `m_hat`, and a verdict. No window means the data
//! shows no evidence of an expansion — either because the step sizes are not
//! yet small enough, because rounding already dominates, or because the underlying
//! problem is not smooth enough to have one.

use thiserror::Error;

/// Minimum number of sweep entries for `diagnose` to attempt a verdict.
const MIN_ENTRIES_FOR_VERDICT: usize = 6;
/// Minimum window length (in consecutive refinement levels) for acceptance.
const MIN_WINDOW_LEN: usize = 4;
/// Acceptable range for the fitted slope of `−log2|F − 2^p|` vs `k`.
const SLOPE_MIN: f64 = 0.1;
const SLOPE_MAX: f64 = 6.0;
/// Maximum RMS residual (log2 units) of the window fit.
const RMS_MAX: f64 = 0.5;
/// A window is only believed when its fractions actually sit near the
/// reference order: `|log2(median F) − p_ref|` must not exceed this.
const COHERENCE_HALF_WIDTH: f64 = 0.5;
/// The fitted drop of `−log2|F − 2^p|` across the whole window,
/// `slope·(len−1)`, must reach this many log2 units. A noisy flat stretch
/// can sneak past the slope gate, but it cannot fake a genuine multi-octave
/// decay of the fraction defect.
const TOTAL_DROP_MIN: f64 = 1.5;
/// Fractions closer to the reference than this many units of roundoff are
/// treated as converged-to-noise and excluded from the fit.
const DEFECT_FLOOR_ULPS: f64 = 4.0;

#[derive(Debug, Error)]
pub enum ExtrapolationError {
    #[error("non-finite input: {what}")]
    NonFiniteInput { what: &'static str },
    #[error("order p must be positive and finite, got {p}")]
    NonPositiveOrder { p: f64 },
    #[error("degenerate fraction: A_h equals A_2h")]
    DegenerateFraction,
    #[error("insufficient data: need at least {needed} entries, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid sweep: {reason}")]
    InvalidSweep { reason: String },
}

/// An ordered sequence of approximations at halving step sizes.
///
/// Entry `(k, A)` is the approximation computed with step `h_k = h0·2^{-k}`.
/// Levels must be strictly increasing but need not be contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSweep {
    h0: f64,
    label: String,
    entries: Vec<(u32, f64)>,
}

impl SampleSweep {
    pub fn new(
        h0: f64,
        label: impl Into<String>,
        entries: Vec<(u32, f64)>,
    ) -> Result<Self, ExtrapolationError> {
        if !(h0.is_finite() && h0 > 0.0) {
            return Err(ExtrapolationError::InvalidSweep {
                reason: format!("base step h0 must be positive and finite, got {h0}"),
            });
        }
        for pair in entries.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(ExtrapolationError::InvalidSweep {
                    reason: format!(
                        "levels must be strictly increasing; {} follows {}",
                        pair[1].0, pair[0].0
                    ),
                });
            }
        }
        if let Some(&(k, a)) = entries.iter().find(|(_, a)| !a.is_finite()) {
            return Err(ExtrapolationError::InvalidSweep {
                reason: format!("non-finite value {a} at level {k}"),
            });
        }
        Ok(Self { h0, label: label.into(), entries })
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Step size at level `k`.
    pub fn h(&self, k: u32) -> f64 {
        self.h0 * (-(k as f64)).exp2()
    }

    /// The value at level `k`, if present.
    pub fn value(&self, k: u32) -> Option<f64> {
        self.entries
            .binary_search_by_key(&k, |&(kk, _)| kk)
            .ok()
            .map(|i| self.entries[i].1)
    }
}

/// Richardson's error estimate `R_h = (A_h − A_{2h}) / (2^p − 1)`.
pub fn richardson_estimate(a_h: f64, a_2h: f64, p: f64) -> Result<f64, ExtrapolationError> {
    if !a_h.is_finite() {
        return Err(ExtrapolationError::NonFiniteInput { what: "A_h" });
    }
    if !a_2h.is_finite() {
        return Err(ExtrapolationError::NonFiniteInput { what: "A_2h" });
    }
    if !(p.is_finite() && p > 0.0) {
        return Err(ExtrapolationError::NonPositiveOrder { p });
    }
    Ok((a_h - a_2h) / (p.exp2() - 1.0))
}

/// Richardson's fraction `F_h = (A_{2h} − A_{4h}) / (A_h − A_{2h})`.
///
/// A zero denominator (an exact tie between the two finest samples) is a
/// degenerate fraction; callers record the level as unusable rather than
/// aborting the sweep analysis.
pub fn richardson_fraction(a_h: f64, a_2h: f64, a_4h: f64) -> Result<f64, ExtrapolationError> {
    for (v, what) in [(a_h, "A_h"), (a_2h, "A_2h"), (a_4h, "A_4h")] {
        if !v.is_finite() {
            return Err(ExtrapolationError::NonFiniteInput { what });
        }
    }
    let denom = a_h - a_2h;
    if denom == 0.0 {
        return Err(ExtrapolationError::DegenerateFraction);
    }
    Ok((a_2h - a_4h) / denom)
}

/// One fraction sample; `value` is `None` when the fraction is degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionEntry {
    pub k: u32,
    pub value: Option<f64>,
}

/// The fraction series of a sweep: one entry per level `k` whose predecessors
/// `k−1` and `k−2` are also present.
pub fn fraction_series(sweep: &SampleSweep) -> Result<Vec<FractionEntry>, ExtrapolationError> {
    if sweep.len() < 3 {
        return Err(ExtrapolationError::InsufficientData { needed: 3, got: sweep.len() });
    }
    let mut out = Vec::new();
    for &(k, a_h) in sweep.entries() {
        let (prev, prev2) = match (k.checked_sub(1), k.checked_sub(2)) {
            (Some(p1), Some(p2)) => (sweep.value(p1), sweep.value(p2)),
            _ => (None, None),
        };
        if let (Some(a_2h), Some(a_4h)) = (prev, prev2) {
            let value = match richardson_fraction(a_h, a_2h, a_4h) {
                Ok(f) => Some(f),
                Err(ExtrapolationError::DegenerateFraction) => None,
                Err(e) => return Err(e),
            };
            out.push(FractionEntry { k, value });
        }
    }
    Ok(out)
}

/// Verdict of the asymptotic-window search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    AsymptoticRangeFound,
    NoExpansionEvidence,
    InsufficientData,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::AsymptoticRangeFound => "ASYMPTOTIC_RANGE_FOUND",
            Verdict::NoExpansionEvidence => "NO_EXPANSION_EVIDENCE",
            Verdict::InsufficientData => "INSUFFICIENT_DATA",
        })
    }
}

/// Result of [`diagnose`].
#[derive(Debug, Clone)]
pub struct ConvergenceDiagnosis {
    /// Fraction series (degenerate entries flagged with `value: None`).
    pub fractions: Vec<FractionEntry>,
    /// `log2(median F)` over the detected window; `None` without a window.
    pub p_hat: Option<f64>,
    /// Least-squares slope of `k ↦ −log2|F_k − 2^p_ref|` over the window
    /// (positive; estimates `m = q − p`). `None` without a window.
    pub m_hat: Option<f64>,
    /// Detected asymptotic window as an inclusive level range.
    pub asymptotic_window: Option<(u32, u32)>,
    /// Per-level Richardson estimates `(k, R_{h_k})`, computed for every `k`
    /// whose predecessor `k−1` is present, using `p_nominal` when supplied
    /// and `p_hat` otherwise. Empty when neither is available.
    pub estimates: Vec<(u32, f64)>,
    pub verdict: Verdict,
}

/// Median of a non-empty slice (average of the middle two for even lengths).
fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("median over finite values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares line fit of `ys` against `xs`; returns `(slope, rms residual)`.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    (slope, (ss / n).sqrt())
}

struct WindowCandidate {
    k_lo: u32,
    k_hi: u32,
    len: usize,
    slope: f64,
    rms: f64,
    median_f: f64,
}

/// Scan all contiguous windows of usable fractions and keep the best
/// qualifying one: longest, then smallest RMS, then smallest starting level.
fn detect_window(fractions: &[FractionEntry], p_ref: f64) -> Option<WindowCandidate> {
    let reference = p_ref.exp2();
    let floor = reference * f64::EPSILON * DEFECT_FLOOR_ULPS;

    // Usable points: defined, and not yet collapsed onto the reference value
    // (those are dominated by rounding, not by the h^m defect).
    let points: Vec<(u32, f64, f64)> = fractions
        .iter()
        .filter_map(|e| e.value.map(|f| (e.k, f)))
        .filter(|&(_, f)| (f - reference).abs() >= floor)
        .map(|(k, f)| (k, f, -(f - reference).abs().log2()))
        .collect();

    // Split into runs of consecutive levels.
    let mut runs: Vec<&[(u32, f64, f64)]> = Vec::new();
    let mut start = 0;
    for i in 1..=points.len() {
        if i == points.len() || points[i].0 != points[i - 1].0 + 1 {
            runs.push(&points[start..i]);
            start = i;
        }
    }

    let mut best: Option<WindowCandidate> = None;
    for run in runs {
        for i in 0..run.len() {
            for j in (i + MIN_WINDOW_LEN - 1)..run.len() {
                let w = &run[i..=j];
                let xs: Vec<f64> = w.iter().map(|&(k, _, _)| k as f64).collect();
                let ys: Vec<f64> = w.iter().map(|&(_, _, y)| y).collect();
                let (slope, rms) = fit_line(&xs, &ys);
                if !(slope > SLOPE_MIN && slope <= SLOPE_MAX && rms < RMS_MAX) {
                    continue;
                }
                if slope * (w.len() as f64 - 1.0) < TOTAL_DROP_MIN {
                    continue;
                }
                // Coherence guard: the window's fractions must actually sit
                // near 2^p_ref, otherwise a noise sequence whose |F − 2^p|
                // happens to decay log-linearly would be accepted.
                let mut fs: Vec<f64> = w.iter().map(|&(_, f, _)| f).collect();
                let median_f = median(&mut fs);
                if !(median_f > 0.0 && (median_f.log2() - p_ref).abs() <= COHERENCE_HALF_WIDTH) {
                    continue;
                }
                let cand = WindowCandidate {
                    k_lo: w[0].0,
                    k_hi: w[w.len() - 1].0,
                    len: w.len(),
                    slope,
                    rms,
                    median_f,
                };
                let better = match &best {
                    None => true,
                    Some(b) => {
                        (cand.len, -cand.rms, -(cand.k_lo as i64))
                            > (b.len, -b.rms, -(b.k_lo as i64))
                    }
                };
                if better {
                    best = Some(cand);
                }
            }
        }
    }
    best
}

/// Reference order for the window search when the caller supplies none:
/// `log2` of the median of the positive defined fractions, rounded to the
/// nearest quarter. The median is robust against both the pre-asymptotic head
/// and the cancellation tail of the series.
fn reference_order(fractions: &[FractionEntry]) -> Option<f64> {
    let mut positive: Vec<f64> = fractions
        .iter()
        .filter_map(|e| e.value)
        .filter(|&f| f > 0.0 && f.is_finite())
        .collect();
    if positive.is_empty() {
        return None;
    }
    let p_raw = median(&mut positive).log2();
    Some((p_raw * 4.0).round() / 4.0)
}

/// Diagnose the convergence behavior of a sweep.
///
/// When `p_nominal` is supplied (the method's theoretical order), the window
/// search uses `2^{p_nominal}` as its reference value and the error estimates
/// use `p_nominal`; otherwise the reference is inferred from the fraction
/// series itself and the estimates use the empirical `p_hat`.
pub fn diagnose(sweep: &SampleSweep, p_nominal: Option<f64>) -> ConvergenceDiagnosis {
    debug_assert!(
        p_nominal.map_or(true, |p| p.is_finite() && p > 0.0),
        "p_nominal must be positive and finite"
    );
    let fractions = fraction_series(sweep).unwrap_or_default();

    let mut diagnosis = ConvergenceDiagnosis {
        fractions,
        p_hat: None,
        m_hat: None,
        asymptotic_window: None,
        estimates: Vec::new(),
        verdict: Verdict::InsufficientData,
    };

    if sweep.len() >= MIN_ENTRIES_FOR_VERDICT {
        diagnosis.verdict = Verdict::NoExpansionEvidence;
        let p_ref = p_nominal.or_else(|| reference_order(&diagnosis.fractions));
        if let Some(p_ref) = p_ref {
            if let Some(window) = detect_window(&diagnosis.fractions, p_ref) {
                diagnosis.p_hat = Some(window.median_f.log2());
                diagnosis.m_hat = Some(window.slope);
                diagnosis.asymptotic_window = Some((window.k_lo, window.k_hi));
                diagnosis.verdict = Verdict::AsymptoticRangeFound;
            }
        }
    }

    if let Some(p_est) = p_nominal.or(diagnosis.p_hat) {
        let entries = sweep.entries();
        for &(k, a_h) in entries {
            if let Some(a_2h) = k.checked_sub(1).and_then(|p| sweep.value(p)) {
                if let Ok(r) = richardson_estimate(a_h, a_2h, p_est) {
                    diagnosis.estimates.push((k, r));
                }
            }
        }
    }

    diagnosis
}

/// Relative accuracy of the Richardson estimates against a known target:
/// `|(T − A_{h_k}) − R_{h_k}| / |T − A_{h_k}|` per estimated level.
///
/// Levels where the true error is exactly zero cannot be scored and are
/// flagged with `None`.
pub fn validate_estimates(
    diagnosis: &ConvergenceDiagnosis,
    sweep: &SampleSweep,
    t_true: f64,
) -> Vec<(u32, Option<f64>)> {
    diagnosis
        .estimates
        .iter()
        .filter_map(|&(k, r)| {
            sweep.value(k).map(|a_h| {
                let true_err = t_true - a_h;
                if true_err == 0.0 {
                    (k, None)
                } else {
                    (k, Some(((true_err - r) / true_err).abs()))
                }
            })
        })
        .collect()
}
