//! The Potts, Widom-Rowlinson and hard-core models on `Z^2`, with their
//! representation points and parameter regimes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gibbs::{q_pi, QReport};
use crate::interaction::NNInteraction;
use crate::point::PeriodicPoint;
use crate::sft::{ConstraintSystem, Symbol};

/// Default value of the site-percolation threshold of `Z^2`, a numerical
/// estimate with no closed form.
pub const DEFAULT_P_C_SITE: f64 = 0.592746;

/// Hard-core activities delimiting the guaranteed regions.
pub const HARD_CORE_GAMMA_1: f64 = 2.48;
pub const HARD_CORE_GAMMA_2: f64 = 468.0;

/// Distance to `β_c` below which a Potts instance is flagged near-critical.
pub const NEAR_CRITICAL_WINDOW: f64 = 0.01;

const CRITICAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    GuaranteedSubcritical,
    GuaranteedSupercritical,
    Critical,
    NoGuarantee,
}

impl Regime {
    pub fn is_guaranteed(self) -> bool {
        matches!(self, Regime::GuaranteedSubcritical | Regime::GuaranteedSupercritical)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::GuaranteedSubcritical => "guaranteed_subcritical",
            Regime::GuaranteedSupercritical => "guaranteed_supercritical",
            Regime::Critical => "critical",
            Regime::NoGuarantee => "no_guarantee",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum ModelKind {
    Potts { q: usize, beta: f64 },
    #[serde(rename = "wr")]
    WidomRowlinson { q: usize, lambda: f64 },
    #[serde(rename = "hardcore")]
    HardCore { gamma: f64 },
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Potts { .. } => "potts",
            ModelKind::WidomRowlinson { .. } => "wr",
            ModelKind::HardCore { .. } => "hardcore",
        }
    }
}

/// A model ready for pressure computations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelInstance {
    pub kind: ModelKind,
    pub interaction: NNInteraction,
    pub representation_point: PeriodicPoint,
    pub thresholds: BTreeMap<String, f64>,
    pub regime: Regime,
    /// Advisory notes such as `near_critical` or `degenerate_coupling`.
    pub flags: Vec<String>,
}

impl ModelInstance {
    /// `Q(π)` compared against the site-percolation threshold.
    pub fn q_report(&self, p_c_site: f64) -> QReport {
        q_pi(&self.interaction, p_c_site)
    }

    /// The orbit of the representation point.
    pub fn orbit(&self) -> Vec<PeriodicPoint> {
        self.representation_point.orbit()
    }
}

fn numbered(from: usize, to: usize) -> Vec<String> {
    (from..=to).map(|i| i.to_string()).collect()
}

/// `β_c(q) = log(1 + √q)`.
pub fn potts_beta_c(q: usize) -> f64 {
    (1.0 + (q as f64).sqrt()).ln()
}

/// Self-dual point `p_c(q) = √q / (1 + √q)` of the bond random-cluster
/// model.
pub fn bond_p_c(q: f64) -> f64 {
    q.sqrt() / (1.0 + q.sqrt())
}

/// The dual parameter `p*` with `p*/(1-p*) = q(1-p)/p`.
pub fn dual_p(p: f64, q: f64) -> f64 {
    q * (1.0 - p) / (p + q * (1.0 - p))
}

/// Bond parameter `p = 1 - e^{-β}` attached to Potts inverse temperature.
pub fn potts_bond_p(beta: f64) -> f64 {
    -(-beta).exp_m1()
}

/// `(λ_1(q), λ_2(q)) = ((1/q) r, q^3 r)` with `r = p_c/(1 - p_c)`.
pub fn wr_thresholds(q: usize, p_c_site: f64) -> (f64, f64) {
    let r = p_c_site / (1.0 - p_c_site);
    let q = q as f64;
    (r / q, q.powi(3) * r)
}

fn potts_interaction(q: usize, beta: f64) -> Result<NNInteraction> {
    let cs = ConstraintSystem::unconstrained(numbered(1, q), 2)?;
    NNInteraction::from_fn(cs, |_| 0.0, |_, a, b| if a == b { -beta } else { 0.0 })
}

fn potts_instance(q: usize, beta: f64, regime: Regime, mut flags: Vec<String>) -> Result<ModelInstance> {
    let beta_c = potts_beta_c(q);
    if (beta - beta_c).abs() < NEAR_CRITICAL_WINDOW && regime != Regime::Critical {
        flags.push("near_critical".into());
    }
    let mut thresholds = BTreeMap::new();
    thresholds.insert("beta_c".into(), beta_c);
    thresholds.insert("p_c".into(), bond_p_c(q as f64));
    Ok(ModelInstance {
        kind: ModelKind::Potts { q, beta },
        interaction: potts_interaction(q, beta)?,
        representation_point: PeriodicPoint::constant(2, (q - 1) as Symbol),
        thresholds,
        regime,
        flags,
    })
}

/// Ferromagnetic `q`-state Potts model at inverse temperature `β > 0`,
/// represented at the all-`q` point.
pub fn potts(q: usize, beta: f64) -> Result<ModelInstance> {
    if !(2..=255).contains(&q) {
        return invalid(format!("Potts needs 2 <= q <= 255, got {q}"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return invalid(format!("Potts needs a finite beta > 0, got {beta}"));
    }
    let beta_c = potts_beta_c(q);
    let regime = if (beta - beta_c).abs() <= CRITICAL_TOL {
        Regime::Critical
    } else if beta < beta_c {
        Regime::GuaranteedSubcritical
    } else {
        Regime::GuaranteedSupercritical
    };
    potts_instance(q, beta, regime, Vec::new())
}

/// The Potts model at `β = 0`: independent uniform sites. Kept separate
/// from [`potts`], which requires `β > 0`; the instance carries the
/// `degenerate_coupling` flag.
pub fn potts_zero_coupling(q: usize) -> Result<ModelInstance> {
    if !(2..=255).contains(&q) {
        return invalid(format!("Potts needs 2 <= q <= 255, got {q}"));
    }
    potts_instance(q, 0.0, Regime::GuaranteedSubcritical, vec!["degenerate_coupling".into()])
}

/// Widom-Rowlinson model with `q` particle types and activity `λ`,
/// represented at the all-`q` point.
pub fn widom_rowlinson(q: usize, lambda: f64) -> Result<ModelInstance> {
    widom_rowlinson_with(q, lambda, DEFAULT_P_C_SITE)
}

/// As [`widom_rowlinson`] with an explicit site-percolation threshold.
pub fn widom_rowlinson_with(q: usize, lambda: f64, p_c_site: f64) -> Result<ModelInstance> {
    if !(1..=254).contains(&q) {
        return invalid(format!("Widom-Rowlinson needs 1 <= q <= 254, got {q}"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid(format!("Widom-Rowlinson needs a finite lambda > 0, got {lambda}"));
    }
    if !(p_c_site > 0.0 && p_c_site < 1.0) {
        return invalid("p_c_site must lie in (0, 1)");
    }
    let mut pairs = Vec::new();
    for a in 1..=q as Symbol {
        for b in 1..=q as Symbol {
            if a != b {
                pairs.push((a, b));
            }
        }
    }
    let cs = ConstraintSystem::new(numbered(0, q), vec![pairs.clone(), pairs])?;
    let log_lambda = lambda.ln();
    let interaction = NNInteraction::from_fn(cs, |a| if a > 0 { -log_lambda } else { 0.0 }, |_, _, _| 0.0)?;
    let (l1, l2) = wr_thresholds(q, p_c_site);
    let regime = if lambda < l1 {
        Regime::GuaranteedSubcritical
    } else if lambda > l2 {
        Regime::GuaranteedSupercritical
    } else {
        Regime::NoGuarantee
    };
    let mut thresholds = BTreeMap::new();
    thresholds.insert("lambda_1".into(), l1);
    thresholds.insert("lambda_2".into(), l2);
    thresholds.insert("p_c_site".into(), p_c_site);
    Ok(ModelInstance {
        kind: ModelKind::WidomRowlinson { q, lambda },
        interaction,
        representation_point: PeriodicPoint::constant(2, q as Symbol),
        thresholds,
        regime,
        flags: Vec::new(),
    })
}

/// Checkerboard with zeros on even sites (`Σ x_i` even).
pub fn even_checkerboard() -> PeriodicPoint {
    PeriodicPoint::from_fn(vec![2, 2], |c| ((c[0] + c[1]).rem_euclid(2) == 1) as Symbol)
        .expect("valid periods")
}

/// Checkerboard with ones on even sites, the shift of the even one by `e_1`.
pub fn odd_checkerboard() -> PeriodicPoint {
    PeriodicPoint::from_fn(vec![2, 2], |c| ((c[0] + c[1]).rem_euclid(2) == 0) as Symbol)
        .expect("valid periods")
}

/// Hard-core model with activity `γ`, represented at the odd checkerboard.
pub fn hard_core(gamma: f64) -> Result<ModelInstance> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return invalid(format!("hard-core needs a finite gamma > 0, got {gamma}"));
    }
    let cs = ConstraintSystem::new(numbered(0, 1), vec![vec![(1, 1)]; 2])?;
    let log_gamma = gamma.ln();
    let interaction = NNInteraction::from_fn(cs, |a| if a == 1 { -log_gamma } else { 0.0 }, |_, _, _| 0.0)?;
    let regime = if gamma < HARD_CORE_GAMMA_1 {
        Regime::GuaranteedSubcritical
    } else if gamma > HARD_CORE_GAMMA_2 {
        Regime::GuaranteedSupercritical
    } else {
        Regime::NoGuarantee
    };
    let mut thresholds = BTreeMap::new();
    thresholds.insert("gamma_1".into(), HARD_CORE_GAMMA_1);
    thresholds.insert("gamma_2".into(), HARD_CORE_GAMMA_2);
    Ok(ModelInstance {
        kind: ModelKind::HardCore { gamma },
        interaction,
        representation_point: odd_checkerboard(),
        thresholds,
        regime,
        flags: Vec::new(),
    })
}
