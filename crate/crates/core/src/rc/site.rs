//! The wired site random-cluster measure and the checks built on it.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gibbs::{gibbs_distribution, FiniteDistribution};
use crate::lattice::{components, Metric, Site, Window};
use crate::logspace::count_ln;
use crate::models::widom_rowlinson;
use crate::sft::Configuration;

/// Largest window enumerated exhaustively.
pub const MAX_SITES: usize = 24;

fn check(w: &Window, p: f64, q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("p must lie in [0, 1], got {p}"));
    }
    if !(q > 0.0 && q.is_finite()) {
        return invalid(format!("q must be positive, got {q}"));
    }
    if w.len() > MAX_SITES {
        return Err(Error::TooLarge {
            required: 2f64.powi(w.len() as i32),
            cap: 2f64.powi(MAX_SITES as i32),
            hint: "site enumeration is limited to 24 sites".into(),
        });
    }
    Ok(())
}

/// Number of clusters of ones (nearest-neighbour connectivity) that avoid
/// the inner boundary of `w`. Bit `m - 1 - i` of `ones` is site `i`.
pub fn interior_cluster_count(w: &Window, ones: usize) -> usize {
    let m = w.len();
    let sites: Vec<Site> = (0..m)
        .filter(|&i| (ones >> (m - 1 - i)) & 1 == 1)
        .map(|i| w.sites()[i].clone())
        .collect();
    let edge: std::collections::BTreeSet<Site> = w.inner_boundary(Metric::OneNorm).into_iter().collect();
    components(&sites, Metric::OneNorm)
        .iter()
        .filter(|c| c.iter().all(|s| !edge.contains(s)))
        .count()
}

/// The wired site random-cluster distribution `ψ^{(1)}_{p,q,Λ}` with weight
/// `p^{#1} (1-p)^{#0} q^{κ}`.
pub fn site_rc(w: &Window, p: f64, q: f64) -> Result<FiniteDistribution> {
    check(w, p, q)?;
    let m = w.len();
    let ln_q = q.ln();
    let lw: Vec<f64> = (0..1usize << m)
        .map(|idx| {
            let ones = idx.count_ones() as usize;
            count_ln(ones, p) + count_ln(m - ones, 1.0 - p) + interior_cluster_count(w, idx) as f64 * ln_q
        })
        .collect();
    let labels = w.sites().iter().map(|s| s.to_string()).collect();
    FiniteDistribution::from_log_weights(labels, vec![2; m], &lw)
}

/// Largest difference between the occupation image of the Widom-Rowlinson
/// measure with all-`q` boundary and `ψ^{(1)}_{p,q,Λ}` with
/// `p = λ/(1+λ)`.
pub fn wr_pushforward_check(w: &Window, q: usize, lambda: f64) -> Result<f64> {
    let model = widom_rowlinson(q, lambda)?;
    let ring = w.boundary(Metric::OneNorm);
    let boundary = Configuration::from_pairs(ring.into_iter().map(|s| (s, q as u8)))?;
    let wr = gibbs_distribution(w, &model.interaction, Some(&boundary))?;
    let image = wr.pushforward(wr.labels().to_vec(), vec![2; w.len()], |o| {
        o.iter().map(|&v| (v != 0) as usize).collect()
    })?;
    let rc = site_rc(w, lambda / (1.0 + lambda), q as f64)?;
    image.max_abs_deviation(&rc)
}

/// Sets used by the amalgamation comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgamationSets {
    /// `∂⋆Θ ∩ Λ`, conditioned to ones.
    pub delta: Vec<Site>,
    /// `Λ \ Θ̄⋆`, the freely conditioned sites.
    pub sigma: Vec<Site>,
}

/// Whether `Λ^c ∪ Θ̄⋆` is connected, checked inside a box two sites wider
/// than the closure on every side.
pub fn amalgamation_hypothesis(lambda: &Window, theta: &[Site]) -> Result<bool> {
    let theta_w = Window::explicit(theta.iter().cloned())?;
    let closure = theta_w.closure(Metric::InfNorm);
    let (mut lo, mut hi) = lambda.bounding_box();
    let (clo, chi) = closure.bounding_box();
    for k in 0..lo.len() {
        lo[k] = lo[k].min(clo[k]) - 2;
        hi[k] = hi[k].max(chi[k]) + 2;
    }
    let frame = Window::rectangle(&lo, &hi)?;
    let region: Vec<Site> = frame
        .sites()
        .iter()
        .filter(|s| !lambda.contains(s) || closure.contains(s))
        .cloned()
        .collect();
    Ok(components(&region, Metric::OneNorm).len() == 1)
}

/// `Δ` and `Σ` for `Θ ⊆ Λ`.
pub fn amalgamation_sets(lambda: &Window, theta: &[Site]) -> Result<AmalgamationSets> {
    if theta.is_empty() || theta.iter().any(|s| !lambda.contains(s)) {
        return invalid("Θ must be a nonempty subset of Λ");
    }
    let theta_w = Window::explicit(theta.iter().cloned())?;
    let closure = theta_w.closure(Metric::InfNorm);
    let delta = theta_w
        .boundary(Metric::InfNorm)
        .into_iter()
        .filter(|s| lambda.contains(s))
        .collect();
    let sigma = lambda.sites().iter().filter(|s| !closure.contains(s)).cloned().collect();
    Ok(AmalgamationSets { delta, sigma })
}

/// Largest difference, over every `τ` on `Σ = Λ \ Θ̄⋆` and every cylinder
/// on `Θ`, between `ψ^{(1)}(· | 1^Δ τ)` and `ψ^{(1)}(· | 1^Δ 0^Σ)`.
pub fn amalgamation_check(lambda: &Window, theta: &[Site], p: f64, q: f64) -> Result<f64> {
    let sets = amalgamation_sets(lambda, theta)?;
    if !amalgamation_hypothesis(lambda, theta)? {
        return Err(Error::PreconditionFailed(
            "the complement of Λ together with the star-closure of Θ is not connected".into(),
        ));
    }
    let dist = site_rc(lambda, p, q)?;
    let pos = |s: &Site| lambda.index_of(s).expect("subset of Λ");
    let theta_pos: Vec<usize> = theta.iter().map(pos).collect();
    let delta_pos: Vec<usize> = sets.delta.iter().map(pos).collect();
    let sigma_pos: Vec<usize> = sets.sigma.iter().map(pos).collect();
    let conditional = |tau: usize| -> Option<Vec<f64>> {
        let matches = |o: &[usize]| {
            delta_pos.iter().all(|&i| o[i] == 1)
                && sigma_pos.iter().enumerate().all(|(k, &i)| o[i] == (tau >> k) & 1)
        };
        let total = dist.event_probability(matches);
        if total == 0.0 {
            return None;
        }
        Some(
            (0..1usize << theta_pos.len())
                .map(|cyl| {
                    dist.event_probability(|o| {
                        matches(o) && theta_pos.iter().enumerate().all(|(k, &i)| o[i] == (cyl >> k) & 1)
                    }) / total
                })
                .collect(),
        )
    };
    let Some(reference) = conditional(0) else {
        return Err(Error::PreconditionFailed("the reference conditioning event has probability zero".into()));
    };
    let mut worst: f64 = 0.0;
    for tau in 1..(1usize << sigma_pos.len()) {
        if let Some(c) = conditional(tau) {
            for (a, b) in c.iter().zip(&reference) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}

/// `p_1(q) = pq / (pq + (1-p) q^{2d})` and `p_2(q) = pq / (pq + 1 - p)`.
pub fn single_site_bounds(p: f64, q: f64, dim: usize) -> (f64, f64) {
    let p1 = p * q / (p * q + (1.0 - p) * q.powi(2 * dim as i32));
    let p2 = p * q / (p * q + (1.0 - p));
    (p1, p2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub holds: bool,
    pub lower: f64,
    pub upper: f64,
    pub min_conditional: f64,
    pub max_conditional: f64,
}

/// Checks `p_1 ≤ ψ^{(1)}(θ(x) = 1 | τ) ≤ p_2` for every site `x` and every
/// `τ` on the rest of the window (with a `1e-12` slack).
pub fn single_site_bounds_check(w: &Window, p: f64, q: f64) -> Result<BoundsReport> {
    let dist = site_rc(w, p, q)?;
    let (lower, upper) = single_site_bounds(p, q, w.dim());
    let m = w.len();
    let probs = dist.probabilities();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let bit = 1usize << (m - 1 - i);
        for idx in 0..(1usize << m) {
            if idx & bit != 0 {
                continue;
            }
            let (w0, w1) = (probs[idx], probs[idx | bit]);
            if w0 + w1 == 0.0 {
                continue;
            }
            let c = w1 / (w0 + w1);
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    let slack = 1e-12;
    Ok(BoundsReport {
        holds: lo >= lower - slack && hi <= upper + slack,
        lower,
        upper,
        min_conditional: lo,
        max_conditional: hi,
    })
}
