//! Exhaustive enumeration of configurations on a window.
//!
//! Configurations are indexed in mixed radix with the first site of the
//! window most significant, so index order is the canonical order of the
//! configuration space.

use crate::error::{invalid, Error, Result};
use crate::interaction::NNInteraction;
use crate::lattice::Window;
use crate::sft::{is_feasible, Configuration, Symbol};

pub const DEFAULT_STATE_CAP: f64 = 2e7;

pub(crate) struct Enumeration {
    arity: usize,
    len: usize,
    log_weights: Vec<f64>,
}

struct SitePlan {
    /// `(earlier site index, axis, earlier site comes first in the pair)`.
    links: Vec<(usize, usize, bool)>,
    /// Log weight contributed by the site term and bonds to fixed boundary
    /// sites, per symbol.
    fixed: Vec<f64>,
}

impl Enumeration {
    pub(crate) fn run(
        w: &Window,
        phi: &NNInteraction,
        boundary: Option<&Configuration>,
        cap: f64,
    ) -> Result<Self> {
        if w.dim() != phi.dim() {
            return invalid("window and interaction differ in dimension");
        }
        let k = phi.alphabet_size();
        let m = w.len();
        let required = (k as f64).powi(m as i32);
        if required > cap {
            return Err(Error::TooLarge {
                required,
                cap,
                hint: "use the transfer engine for larger windows".into(),
            });
        }
        if let Some(b) = boundary {
            if b.window().dim() != w.dim() {
                return invalid("boundary and window differ in dimension");
            }
            for s in w.boundary(crate::lattice::Metric::OneNorm) {
                if b.get(&s).is_none() {
                    return invalid(format!("boundary condition does not cover boundary site {s}"));
                }
            }
            if !is_feasible(b, phi.constraints())? {
                return Err(Error::InfeasibleBoundary);
            }
        }
        let mut plans = Vec::with_capacity(m);
        for (i, site) in w.sites().iter().enumerate() {
            let mut links = Vec::new();
            let mut fixed: Vec<f64> = (0..k).map(|a| -phi.site_energy(a as Symbol)).collect();
            for axis in 0..w.dim() {
                for (delta, self_first) in [(1i64, true), (-1i64, false)] {
                    let nb = site.step(axis, delta);
                    if let Some(j) = w.index_of(&nb) {
                        if j < i {
                            // the pair is stored from the earlier site's view
                            links.push((j, axis, !self_first));
                        }
                    } else if let Some(b) = boundary.and_then(|b| b.get(&nb)) {
                        for (a, f) in fixed.iter_mut().enumerate() {
                            let a = a as Symbol;
                            *f += if self_first {
                                phi.bond_log_weight(axis, a, b)
                            } else {
                                phi.bond_log_weight(axis, b, a)
                            };
                        }
                    }
                }
            }
            plans.push(SitePlan { links, fixed });
        }
        let total = required as usize;
        let mut log_weights = vec![f64::NEG_INFINITY; total];
        let mut values = vec![0 as Symbol; m];
        if m > 0 {
            fill(phi, &plans, 0, 0, 0.0, k, &mut values, &mut log_weights);
        }
        Ok(Enumeration { arity: k, len: m, log_weights })
    }

    pub(crate) fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub(crate) fn into_log_weights(self) -> Vec<f64> {
        self.log_weights
    }

    pub(crate) fn decode(&self, mut idx: usize) -> Vec<Symbol> {
        let mut out = vec![0 as Symbol; self.len];
        for slot in out.iter_mut().rev() {
            *slot = (idx % self.arity) as Symbol;
            idx /= self.arity;
        }
        out
    }
}

#[allow(clippy::too_many_arguments)]
fn fill(
    phi: &NNInteraction,
    plans: &[SitePlan],
    i: usize,
    prefix: usize,
    acc: f64,
    k: usize,
    values: &mut [Symbol],
    out: &mut [f64],
) {
    let plan = &plans[i];
    for a in 0..k {
        let sym = a as Symbol;
        let mut lw = acc + plan.fixed[a];
        for &(j, axis, earlier_first) in &plan.links {
            let b = values[j];
            lw += if earlier_first {
                phi.bond_log_weight(axis, b, sym)
            } else {
                phi.bond_log_weight(axis, sym, b)
            };
        }
        if lw == f64::NEG_INFINITY {
            continue;
        }
        values[i] = sym;
        let idx = prefix * k + a;
        if i + 1 == plans.len() {
            out[idx] = lw;
        } else {
            fill(phi, plans, i + 1, idx, lw, k, values, out);
        }
    }
}
