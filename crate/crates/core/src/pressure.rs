//! Pressure from the orbit representation, the approximation rules built
//! on it, convergence diagnostics and a brute-force finite-volume oracle.
//!
//! For a periodic representation point `ω̄` with orbit `O`,
//!
//! ```text
//! P ≈ (1/|O|) Σ_{ω ∈ O} ( -log π_n(ω) + A_Φ(ω) )
//! ```
//!
//! and the approximation improves as `n` grows.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::enumerate::DEFAULT_STATE_CAP;
use crate::error::{invalid, Error, Result};
use crate::interaction::{a_phi, partition_function_capped};
use crate::lattice::Window;
use crate::logspace::pairwise_sum;
use crate::models::{ModelInstance, Regime};
use crate::transfer::{conditional_origin_probability, free_log_partition, TransferOptions};

/// Differences at or below this multiple of the machine epsilon (relative
/// to the magnitude of the compared values) are treated as zero.
const NOISE_FLOOR_ULPS: f64 = 64.0;

/// Safety factor of empirical mode when none is given.
pub const DEFAULT_SAFETY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitTerm {
    /// `-log π_n(ω)`.
    pub i_hat: f64,
    /// `A_Φ(ω)`.
    pub a_phi: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EstimateMode {
    /// A single evaluation at a fixed `n`.
    Snapshot,
    /// `n` from the rule `C e^{-α(n+1)} < 1/N` with caller-supplied
    /// constants.
    Certified { c: f64, alpha: f64 },
    /// `n` from a fitted decay rate on a doubling ladder.
    Empirical { safety: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuaranteeKind {
    Certified,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guarantee {
    pub kind: GuaranteeKind,
    /// Requested accuracy `1/N`.
    pub target: f64,
    /// Error bound actually reached (`C e^{-α n}` or the fitted tail times
    /// the safety factor).
    pub achieved: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    /// Nats per site.
    pub value: f64,
    pub n_used: usize,
    /// The `n` selected by the certified rule; the evaluation uses `n + 1`.
    pub rule_n: Option<usize>,
    pub per_orbit_terms: Vec<OrbitTerm>,
    pub mode: EstimateMode,
    pub guarantee: Option<Guarantee>,
    pub regime: Regime,
    /// The state cap stopped the computation before the requested accuracy.
    pub best_effort: bool,
    /// Error bound reached when `best_effort` is set.
    pub achieved_bound: Option<f64>,
    pub alpha_hat: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Constant,
    NonIncreasing,
    NonDecreasing,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n_values: Vec<usize>,
    pub pi_values: Vec<f64>,
    /// `|π_{n+1} - π_n|`, one fewer entry than `pi_values`.
    pub deltas: Vec<f64>,
    /// Decay rate per unit `n` fitted to the log of the usable deltas.
    pub alpha_hat: Option<f64>,
    /// `R^2` of that fit.
    pub fit_quality: Option<f64>,
    pub usable_deltas: usize,
    pub monotone_trend: Trend,
    pub cumulative_runtime_ms: Vec<f64>,
}

fn check_model(m: &ModelInstance) -> Result<()> {
    if m.interaction.dim() != 2 {
        return invalid("pressure estimation works in two dimensions");
    }
    Ok(())
}

fn base_flags(m: &ModelInstance) -> Vec<String> {
    let mut flags = m.flags.clone();
    if m.regime == Regime::Critical {
        flags.push("rate_unguaranteed".into());
    }
    flags
}

/// Orbit average of `-log π_n(ω) + A_Φ(ω)` at a fixed `n`.
pub fn representation_value(m: &ModelInstance, n: usize) -> Result<PressureEstimate> {
    representation_value_with(m, n, &TransferOptions::default())
}

pub fn representation_value_with(m: &ModelInstance, n: usize, opts: &TransferOptions) -> Result<PressureEstimate> {
    check_model(m)?;
    let (value, terms) = orbit_average(m, n, opts)?;
    Ok(PressureEstimate {
        value,
        n_used: n,
        rule_n: None,
        per_orbit_terms: terms,
        mode: EstimateMode::Snapshot,
        guarantee: None,
        regime: m.regime,
        best_effort: false,
        achieved_bound: None,
        alpha_hat: None,
        flags: base_flags(m),
    })
}

fn orbit_average(m: &ModelInstance, n: usize, opts: &TransferOptions) -> Result<(f64, Vec<OrbitTerm>)> {
    let n = n as i64;
    let mut terms = Vec::new();
    for point in m.orbit() {
        let r = conditional_origin_probability([n, n], [n, n], &point, &m.interaction, opts)?;
        terms.push(OrbitTerm {
            i_hat: r.neg_log_probability(),
            a_phi: a_phi(&point, &m.interaction)?,
            probability: r.probability,
        });
    }
    let parts: Vec<f64> = terms.iter().map(|t| t.i_hat + t.a_phi).collect();
    Ok((pairwise_sum(&parts) / parts.len() as f64, terms))
}

/// Approximates the pressure to accuracy `1/N`.
///
/// Certified mode uses the supplied `C, α` and evaluates at `n + 1` for the
/// smallest `n` with `C e^{-α(n+1)} < 1/N`; the guarantee is certified only
/// in a guaranteed regime. Empirical mode climbs the ladder `1, 2, 4, ...`,
/// fits the decay of successive differences and stops once `safety` times
/// the extrapolated tail is below `1/(2N)`. Critical instances are
/// rejected. When the state cap stops the computation the best available
/// value is returned with `best_effort` set.
pub fn estimate_pressure(m: &ModelInstance, accuracy_n: u64, mode: EstimateMode) -> Result<PressureEstimate> {
    estimate_pressure_with(m, accuracy_n, mode, &TransferOptions::default())
}

pub fn estimate_pressure_with(
    m: &ModelInstance,
    accuracy_n: u64,
    mode: EstimateMode,
    opts: &TransferOptions,
) -> Result<PressureEstimate> {
    check_model(m)?;
    if accuracy_n == 0 {
        return invalid("accuracy N must be positive");
    }
    if m.regime == Regime::Critical {
        return Err(Error::PreconditionFailed(
            "no accuracy guarantee is available at the critical point; use representation_value".into(),
        ));
    }
    let target = 1.0 / accuracy_n as f64;
    match mode {
        EstimateMode::Snapshot => invalid("snapshot mode has no accuracy target; use representation_value"),
        EstimateMode::Certified { c, alpha } => certified(m, target, c, alpha, opts),
        EstimateMode::Empirical { safety } => empirical(m, target, safety, opts),
    }
}

/// Smallest `n >= 0` with `C e^{-α(n+1)} < target`.
pub fn certified_rule_n(c: f64, alpha: f64, target: f64) -> Result<usize> {
    if !(c > 0.0 && c.is_finite() && alpha > 0.0 && alpha.is_finite()) {
        return invalid("certified mode needs finite C > 0 and alpha > 0");
    }
    let mut n = 0usize;
    while c * (-alpha * (n as f64 + 1.0)).exp() >= target {
        n += 1;
        if n > 1_000_000 {
            return invalid("the certified rule does not terminate for these constants");
        }
    }
    Ok(n)
}

fn certified(m: &ModelInstance, target: f64, c: f64, alpha: f64, opts: &TransferOptions) -> Result<PressureEstimate> {
    let rule_n = certified_rule_n(c, alpha, target)?;
    let mut n = rule_n + 1;
    let mut best_effort = false;
    let (value, terms) = loop {
        match orbit_average(m, n, opts) {
            Ok(v) => break v,
            Err(Error::TooLarge { .. }) if n > 1 => {
                best_effort = true;
                n -= 1;
            }
            Err(e) => return Err(e),
        }
    };
    let achieved = c * (-alpha * n as f64).exp();
    let guarantee = m.regime.is_guaranteed().then_some(Guarantee {
        kind: GuaranteeKind::Certified,
        target,
        achieved,
    });
    let mut flags = base_flags(m);
    if !m.regime.is_guaranteed() {
        flags.push("constants_unverified_outside_guaranteed_regime".into());
    }
    Ok(PressureEstimate {
        value,
        n_used: n,
        rule_n: Some(rule_n),
        per_orbit_terms: terms,
        mode: EstimateMode::Certified { c, alpha },
        guarantee,
        regime: m.regime,
        best_effort,
        achieved_bound: best_effort.then_some(achieved),
        alpha_hat: None,
        flags,
    })
}

fn noise_floor(a: f64, b: f64) -> f64 {
    NOISE_FLOOR_ULPS * f64::EPSILON * a.abs().max(b.abs()).max(1.0)
}

/// Least-squares line through `(x, y)`; returns `(slope, intercept, R^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = pairwise_sum(x) / n as f64;
    let my = pairwise_sum(y) / n as f64;
    let sxx = pairwise_sum(&x.iter().map(|a| (a - mx) * (a - mx)).collect::<Vec<_>>());
    let sxy = pairwise_sum(&x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect::<Vec<_>>());
    let syy = pairwise_sum(&y.iter().map(|b| (b - my) * (b - my)).collect::<Vec<_>>());
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some((slope, intercept, r2))
}

struct Rung {
    n: usize,
    value: f64,
    terms: Vec<OrbitTerm>,
}

fn empirical(m: &ModelInstance, target: f64, safety: f64, opts: &TransferOptions) -> Result<PressureEstimate> {
    if !(safety >= 2.0 && safety.is_finite()) {
        return invalid("empirical mode needs a finite safety factor >= 2");
    }
    let goal = target / 2.0;
    let mut rungs: Vec<Rung> = Vec::new();
    let mut fit: Option<(f64, f64)> = None;
    let mut next = 1usize;
    let finish = |rung: &Rung, fit: Option<(f64, f64)>, achieved: f64, best_effort: bool| {
        let mut flags = base_flags(m);
        flags.push("heuristic_rate".into());
        PressureEstimate {
            value: rung.value,
            n_used: rung.n,
            rule_n: None,
            per_orbit_terms: rung.terms.clone(),
            mode: EstimateMode::Empirical { safety },
            guarantee: Some(Guarantee { kind: GuaranteeKind::Heuristic, target, achieved }),
            regime: m.regime,
            best_effort,
            achieved_bound: best_effort.then_some(achieved),
            alpha_hat: fit.map(|f| f.0),
            flags,
        }
    };
    loop {
        let computed = orbit_average(m, next, opts);
        let (value, terms) = match computed {
            Ok(v) => v,
            Err(Error::TooLarge { .. }) if !rungs.is_empty() => {
                let last = rungs.last().expect("nonempty");
                let achieved = match fit {
                    Some((alpha, log_c)) => safety * (log_c - alpha * last.n as f64).exp(),
                    None => {
                        if rungs.len() >= 2 {
                            safety * (last.value - rungs[rungs.len() - 2].value).abs()
                        } else {
                            f64::INFINITY
                        }
                    }
                };
                return Ok(finish(last, fit, achieved, true));
            }
            Err(e) => return Err(e),
        };
        let rung = Rung { n: next, value, terms };
        if let Some(prev) = rungs.last() {
            let delta = (rung.value - prev.value).abs();
            if delta <= noise_floor(rung.value, prev.value) {
                // the series has stopped moving
                let prev = rungs.pop().expect("nonempty");
                return Ok(finish(&prev, fit, safety * delta, false));
            }
        }
        let is_ladder = rungs.last().map_or(true, |p| rung.n == 2 * p.n);
        rungs.push(rung);
        if !is_ladder {
            let last = rungs.last().expect("nonempty");
            let (alpha, log_c) = fit.expect("off-ladder rungs follow a fit");
            let achieved = safety * (log_c - alpha * last.n as f64).exp();
            return Ok(finish(last, fit, achieved, false));
        }
        fit = fit_ladder(&rungs);
        let last_n = rungs.last().expect("nonempty").n;
        next = 2 * last_n;
        if let Some((alpha, log_c)) = fit {
            // smallest n with safety * C e^{-alpha n} < goal
            let needed = ((log_c + safety.ln() - goal.ln()) / alpha).floor() + 1.0;
            let needed = needed.max(1.0);
            if needed <= last_n as f64 {
                let last = rungs.last().expect("nonempty");
                let achieved = safety * (log_c - alpha * last.n as f64).exp();
                return Ok(finish(last, fit, achieved, false));
            }
            if needed < (2 * last_n) as f64 {
                next = needed as usize;
            }
        }
    }
}

/// Fits `log |v_{k+1} - v_k| ≈ log C - α n_k` over the ladder; needs two
/// usable differences and a positive rate.
fn fit_ladder(rungs: &[Rung]) -> Option<(f64, f64)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in rungs.windows(2) {
        let d = (w[1].value - w[0].value).abs();
        if d > noise_floor(w[0].value, w[1].value) {
            xs.push(w[0].n as f64);
            ys.push(d.ln());
        }
    }
    if xs.len() < 2 {
        return None;
    }
    let (slope, intercept, _) = linear_fit(&xs, &ys)?;
    (slope < 0.0).then_some((-slope, intercept))
}

/// `(1/|B_n|) log Z_{B_n}` with free boundary. Enumeration is used below
/// the state cap, the exact column transfer above it.
pub fn brute_force_pressure(m: &ModelInstance, n: usize) -> Result<f64> {
    check_model(m)?;
    let w = Window::block(2, n as i64)?;
    let log_z = match partition_function_capped(&w, &m.interaction, None, DEFAULT_STATE_CAP) {
        Ok(z) => z,
        Err(Error::TooLarge { .. }) => {
            let n = n as i64;
            free_log_partition(&m.interaction, [-n, -n], [n, n], &TransferOptions::default())?
        }
        Err(e) => return Err(e),
    };
    Ok(log_z / w.len() as f64)
}

/// `π_n` of the representation point for `n = 1..=n_max` with differences
/// and a log-linear fit of the differences.
pub fn convergence_probe(m: &ModelInstance, n_max: usize) -> Result<ConvergenceReport> {
    convergence_probe_with(m, n_max, &TransferOptions::default())
}

pub fn convergence_probe_with(m: &ModelInstance, n_max: usize, opts: &TransferOptions) -> Result<ConvergenceReport> {
    check_model(m)?;
    if n_max == 0 {
        return invalid("n_max must be at least 1");
    }
    let start = Instant::now();
    let mut pi_values = Vec::with_capacity(n_max);
    let mut runtimes = Vec::with_capacity(n_max);
    let point = &m.representation_point;
    for n in 1..=n_max as i64 {
        let r = conditional_origin_probability([n, n], [n, n], point, &m.interaction, opts)?;
        pi_values.push(r.probability);
        runtimes.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let n_values: Vec<usize> = (1..=n_max).collect();
    let deltas: Vec<f64> = pi_values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, &d) in deltas.iter().enumerate() {
        if d > noise_floor(pi_values[i], pi_values[i + 1]) {
            xs.push(n_values[i] as f64);
            ys.push(d.ln());
        }
    }
    let usable = xs.len();
    let (alpha_hat, fit_quality) = if usable >= 3 {
        match linear_fit(&xs, &ys) {
            Some((slope, _, r2)) => (Some(-slope), Some(r2)),
            None => (None, None),
        }
    } else {
        (None, None)
    };
    let monotone_trend = trend(&pi_values);
    Ok(ConvergenceReport {
        n_values,
        pi_values,
        deltas,
        alpha_hat,
        fit_quality,
        usable_deltas: usable,
        monotone_trend,
        cumulative_runtime_ms: runtimes,
    })
}

fn trend(values: &[f64]) -> Trend {
    let mut up = false;
    let mut down = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= noise_floor(w[0], w[1]) {
            continue;
        }
        if d > 0.0 {
            up = true;
        } else {
            down = true;
        }
    }
    match (up, down) {
        (false, false) => Trend::Constant,
        (false, true) => Trend::NonIncreasing,
        (true, false) => Trend::NonDecreasing,
        (true, true) => Trend::Mixed,
    }
}
