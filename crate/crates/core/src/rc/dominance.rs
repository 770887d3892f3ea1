//! Stochastic dominance on `{0,1}^k` by enumeration of increasing events.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gibbs::FiniteDistribution;

/// Largest number of binary coordinates handled.
pub const MAX_COORDINATES: usize = 5;

/// Every increasing event of `{0,1}^k` as a bitmask over outcome indices,
/// where bit `i` stands for the outcome with index `i` (first coordinate
/// most significant). The empty and the full event are included.
pub fn increasing_events(k: usize) -> Result<Vec<u64>> {
    if k > MAX_COORDINATES {
        return Err(Error::TooLarge {
            required: k as f64,
            cap: MAX_COORDINATES as f64,
            hint: "restrict both distributions to at most 5 coordinates".into(),
        });
    }
    let mut events = vec![0u64, 1];
    for j in 1..=k {
        let half = 1u32 << (j - 1);
        let mut next = Vec::new();
        for &low in &events {
            for &high in &events {
                if low & !high == 0 {
                    next.push(low | (high << half));
                }
            }
        }
        next.sort_unstable();
        events = next;
    }
    Ok(events)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub dominated: bool,
    /// `max_U a(U) - b(U)`, clamped below at zero.
    pub max_violation: f64,
    pub events_checked: usize,
}

/// Whether `a ≤_D b`: every increasing event has `a`-probability at most
/// its `b`-probability plus `tol`.
pub fn dominance_report(a: &FiniteDistribution, b: &FiniteDistribution, tol: f64) -> Result<DominanceReport> {
    if a.arities() != b.arities() || a.arities().iter().any(|&r| r != 2) {
        return invalid("dominance needs two distributions on the same {0,1}^k");
    }
    let events = increasing_events(a.arities().len())?;
    let mass = |d: &FiniteDistribution, u: u64| -> f64 {
        d.probabilities()
            .iter()
            .enumerate()
            .filter(|(i, _)| (u >> i) & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    };
    let mut worst: f64 = 0.0;
    for &u in &events {
        worst = worst.max(mass(a, u) - mass(b, u));
    }
    Ok(DominanceReport {
        dominated: worst <= tol,
        max_violation: worst,
        events_checked: events.len(),
    })
}

/// `a ≤_D b` with tolerance `1e-12`.
pub fn dominance_check(a: &FiniteDistribution, b: &FiniteDistribution) -> Result<bool> {
    Ok(dominance_report(a, b, 1e-12)?.dominated)
}
