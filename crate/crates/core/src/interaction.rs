//! Nearest-neighbour interactions, energies and exact partition functions.
//!
//! Energies are dimensionless: a configuration `θ` carries weight
//! `exp(-E(θ))`. With a boundary condition `ξ` on `∂Λ`, the energy of `θξ`
//! counts the site terms of `Λ` and every bond with at least one endpoint in
//! `Λ`. Bonds with both endpoints on the boundary are left out because they
//! only contribute a factor independent of `θ`.

use serde::{Deserialize, Serialize};

use crate::enumerate::{self, Enumeration, DEFAULT_STATE_CAP};
use crate::error::{invalid, Error, Result};
use crate::lattice::{Metric, Site, Window};
use crate::logspace::{log_sum_exp, pairwise_sum};
use crate::point::PeriodicPoint;
use crate::sft::{is_feasible, Configuration, ConstraintSystem, Symbol};

/// Shift-invariant nearest-neighbour interaction `Φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NNInteraction {
    constraints: ConstraintSystem,
    site_energy: Vec<f64>,
    /// `bond_energy[axis][a * |A| + b]`; `+inf` on forbidden pairs.
    bond_energy: Vec<Vec<f64>>,
}

/// Energy split into site and bond contributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    pub site_part: f64,
    pub bond_part: f64,
}

/// How a hat partition function was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum HatMethod {
    /// A safe symbol exists, so every feasible configuration extends.
    SafeSymbol,
    /// Configurations were kept when they extend to a feasible ring of the
    /// given width. This only approximates global admissibility.
    PaddingRing { width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatPartition {
    pub log_value: f64,
    pub method: HatMethod,
}

impl NNInteraction {
    /// `site_energy[a]` and `bond_energy[axis][a * |A| + b]`. Entries of
    /// forbidden pairs are ignored; every other entry must be finite.
    pub fn new(
        constraints: ConstraintSystem,
        site_energy: Vec<f64>,
        bond_energy: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = constraints.alphabet_size();
        if site_energy.len() != k {
            return invalid(format!("expected {k} site energies, got {}", site_energy.len()));
        }
        if site_energy.iter().any(|e| !e.is_finite()) {
            return invalid("site energies must be finite");
        }
        if bond_energy.len() != constraints.dim() {
            return invalid("one bond-energy table per axis is required");
        }
        let mut tables = Vec::with_capacity(bond_energy.len());
        for (axis, table) in bond_energy.into_iter().enumerate() {
            if table.len() != k * k {
                return invalid(format!("bond table for axis {} must have {} entries", axis + 1, k * k));
            }
            let mut t = table;
            for a in 0..k {
                for b in 0..k {
                    let e = &mut t[a * k + b];
                    if constraints.is_forbidden(axis, a as Symbol, b as Symbol) {
                        *e = f64::INFINITY;
                    } else if !e.is_finite() {
                        return invalid(format!(
                            "bond energy of allowed pair ({a},{b}) on axis {} is not finite",
                            axis + 1
                        ));
                    }
                }
            }
            tables.push(t);
        }
        Ok(NNInteraction { constraints, site_energy, bond_energy: tables })
    }

    /// Builds the tables from closures; `bond(axis, a, b)` is only called on
    /// allowed pairs.
    pub fn from_fn(
        constraints: ConstraintSystem,
        site: impl Fn(Symbol) -> f64,
        bond: impl Fn(usize, Symbol, Symbol) -> f64,
    ) -> Result<Self> {
        let k = constraints.alphabet_size();
        let site_energy = (0..k).map(|a| site(a as Symbol)).collect();
        let bond_energy = (0..constraints.dim())
            .map(|axis| {
                (0..k * k)
                    .map(|i| {
                        let (a, b) = ((i / k) as Symbol, (i % k) as Symbol);
                        if constraints.is_forbidden(axis, a, b) {
                            f64::INFINITY
                        } else {
                            bond(axis, a, b)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(constraints, site_energy, bond_energy)
    }

    pub fn constraints(&self) -> &ConstraintSystem {
        &self.constraints
    }

    pub fn alphabet_size(&self) -> usize {
        self.constraints.alphabet_size()
    }

    pub fn dim(&self) -> usize {
        self.constraints.dim()
    }

    #[inline]
    pub fn site_energy(&self, a: Symbol) -> f64 {
        self.site_energy[a as usize]
    }

    /// `None` for forbidden pairs.
    #[inline]
    pub fn bond_energy(&self, axis: usize, a: Symbol, b: Symbol) -> Option<f64> {
        let e = self.bond_energy[axis][a as usize * self.alphabet_size() + b as usize];
        e.is_finite().then_some(e)
    }

    /// `exp(-Φ(a, b))` on axis `axis`, zero for forbidden pairs.
    #[inline]
    pub fn bond_weight(&self, axis: usize, a: Symbol, b: Symbol) -> f64 {
        (-self.bond_energy[axis][a as usize * self.alphabet_size() + b as usize]).exp()
    }

    #[inline]
    pub fn site_weight(&self, a: Symbol) -> f64 {
        (-self.site_energy[a as usize]).exp()
    }

    /// `-E` contribution of a bond, `-inf` for forbidden pairs.
    #[inline]
    pub(crate) fn bond_log_weight(&self, axis: usize, a: Symbol, b: Symbol) -> f64 {
        -self.bond_energy[axis][a as usize * self.alphabet_size() + b as usize]
    }

    /// The same interaction with `c` added to every site energy.
    pub fn shift_site_energies(&self, c: f64) -> Result<Self> {
        let site = self.site_energy.iter().map(|e| e + c).collect();
        Self::new(self.constraints.clone(), site, self.bond_energy.clone())
    }
}

/// Energy of `c` counting site terms on every site and bond terms on every
/// adjacent pair inside the shape.
pub fn energy(c: &Configuration, phi: &NNInteraction) -> Result<EnergyReport> {
    if !is_feasible(c, phi.constraints())? {
        return Err(Error::InfeasibleConfiguration(
            "a forbidden adjacent pair occurs inside the shape".into(),
        ));
    }
    let site_terms: Vec<f64> = c.values().iter().map(|&a| phi.site_energy(a)).collect();
    let mut bond_terms = Vec::new();
    for (site, a) in c.iter() {
        for axis in 0..phi.dim() {
            if let Some(b) = c.get(&site.step(axis, 1)) {
                bond_terms.push(phi.bond_energy(axis, a, b).expect("feasibility checked"));
            }
        }
    }
    let site_part = pairwise_sum(&site_terms);
    let bond_part = pairwise_sum(&bond_terms);
    Ok(EnergyReport { total: site_part + bond_part, site_part, bond_part })
}

/// `A_Φ` evaluated at the translate `σ_x(ω)`, i.e. with the origin moved to
/// `x`: `-Φ(ω(x)) - Σ_i Φ(ω(x), ω(x + e_i))`.
pub fn a_phi_at(point: &PeriodicPoint, phi: &NNInteraction, x: &Site) -> Result<f64> {
    if point.dim() != phi.dim() {
        return invalid("point and interaction differ in dimension");
    }
    let a = point.value_at(x);
    phi.constraints().check_symbol(a)?;
    let mut total = -phi.site_energy(a);
    for axis in 0..phi.dim() {
        let b = point.value_at(&x.step(axis, 1));
        match phi.bond_energy(axis, a, b) {
            Some(e) => total -= e,
            None => {
                return Err(Error::InfeasibleConfiguration(format!(
                    "the point has a forbidden pair at {x} along axis {}",
                    axis + 1
                )))
            }
        }
    }
    Ok(total)
}

/// `A_Φ(ω) = -Φ(ω(0)) - Σ_i Φ(ω(0), ω(e_i))`.
pub fn a_phi(point: &PeriodicPoint, phi: &NNInteraction) -> Result<f64> {
    a_phi_at(point, phi, &Site::origin(point.dim()))
}

/// `log Z` over configurations of `w`, with or without a boundary
/// condition, by exhaustive enumeration (default cap `2·10^7` states).
pub fn partition_function(
    w: &Window,
    phi: &NNInteraction,
    boundary: Option<&Configuration>,
) -> Result<f64> {
    partition_function_capped(w, phi, boundary, DEFAULT_STATE_CAP)
}

pub fn partition_function_capped(
    w: &Window,
    phi: &NNInteraction,
    boundary: Option<&Configuration>,
    cap: f64,
) -> Result<f64> {
    let en = Enumeration::run(w, phi, boundary, cap)?;
    let z = log_sum_exp(en.log_weights());
    if boundary.is_some() && z == f64::NEG_INFINITY {
        return Err(Error::InfeasibleBoundary);
    }
    Ok(z)
}

/// Ring width used by [`hat_partition_function`] callers without a better choice.
pub const DEFAULT_PADDING: usize = 2;

/// `log Ẑ`: the sum restricted to globally admissible configurations.
///
/// With a safe symbol this equals [`partition_function`] without boundary.
/// Otherwise only configurations that extend to a feasible ring of width
/// `padding` around `w` are kept.
pub fn hat_partition_function(w: &Window, phi: &NNInteraction, padding: usize) -> Result<HatPartition> {
    if !phi.constraints().safe_symbols().is_empty() {
        return Ok(HatPartition {
            log_value: partition_function(w, phi, None)?,
            method: HatMethod::SafeSymbol,
        });
    }
    let en = Enumeration::run(w, phi, None, DEFAULT_STATE_CAP)?;
    let mut grown = w.clone();
    for _ in 0..padding {
        grown = grown.closure(Metric::OneNorm);
    }
    let ring: Vec<Site> = grown.sites().iter().filter(|s| !w.contains(s)).cloned().collect();
    let cs = phi.constraints();
    let mut kept = Vec::new();
    for (idx, &lw) in en.log_weights().iter().enumerate() {
        if lw == f64::NEG_INFINITY {
            continue;
        }
        let values = en.decode(idx);
        if extends_to(cs, w, &values, &ring) {
            kept.push(lw);
        }
    }
    Ok(HatPartition {
        log_value: log_sum_exp(&kept),
        method: HatMethod::PaddingRing { width: padding },
    })
}

/// Backtracking search for a feasible filling of `ring` next to `values`.
fn extends_to(cs: &ConstraintSystem, w: &Window, values: &[Symbol], ring: &[Site]) -> bool {
    let k = cs.alphabet_size() as Symbol;
    let ring_index: std::collections::HashMap<&Site, usize> =
        ring.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut fill: Vec<Option<Symbol>> = vec![None; ring.len()];
    let value_of = |s: &Site, fill: &[Option<Symbol>]| -> Option<Symbol> {
        if let Some(i) = w.index_of(s) {
            Some(values[i])
        } else {
            ring_index.get(s).and_then(|&i| fill[i])
        }
    };
    fn go(
        i: usize,
        ring: &[Site],
        fill: &mut Vec<Option<Symbol>>,
        k: Symbol,
        cs: &ConstraintSystem,
        value_of: &dyn Fn(&Site, &[Option<Symbol>]) -> Option<Symbol>,
    ) -> bool {
        if i == ring.len() {
            return true;
        }
        let s = &ring[i];
        for v in 0..k {
            let ok = (0..cs.dim()).all(|axis| {
                let fwd = value_of(&s.step(axis, 1), fill).map_or(true, |b| !cs.is_forbidden(axis, v, b));
                let back = value_of(&s.step(axis, -1), fill).map_or(true, |b| !cs.is_forbidden(axis, b, v));
                fwd && back
            });
            if ok {
                fill[i] = Some(v);
                if go(i + 1, ring, fill, k, cs, value_of) {
                    return true;
                }
                fill[i] = None;
            }
        }
        false
    }
    go(0, ring, &mut fill, k, cs, &value_of)
}

/// Raw enumeration access for callers that need the full weight table.
pub fn enumerate_log_weights(
    w: &Window,
    phi: &NNInteraction,
    boundary: Option<&Configuration>,
) -> Result<Vec<f64>> {
    Ok(enumerate::Enumeration::run(w, phi, boundary, DEFAULT_STATE_CAP)?.into_log_weights())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::ConstraintSystem;

    fn labels(k: usize) -> Vec<String> {
        (0..k).map(|i| i.to_string()).collect()
    }

    fn hard_core(gamma: f64) -> NNInteraction {
        let cs = ConstraintSystem::new(labels(2), vec![vec![(1, 1)]; 2]).unwrap();
        NNInteraction::from_fn(cs, |a| if a == 1 { -gamma.ln() } else { 0.0 }, |_, _, _| 0.0).unwrap()
    }

    fn potts(q: usize, beta: f64) -> NNInteraction {
        let cs = ConstraintSystem::unconstrained(labels(q), 2).unwrap();
        NNInteraction::from_fn(cs, |_| 0.0, |_, a, b| if a == b { -beta } else { 0.0 }).unwrap()
    }

    fn s(x: i64, y: i64) -> Site {
        Site::from([x, y])
    }

    #[test]
    fn energy_examples() {
        let c = Configuration::from_pairs([(s(0, 0), 1), (s(1, 0), 0)]).unwrap();
        let e = energy(&c, &hard_core(2.0)).unwrap();
        assert!((e.total + 2f64.ln()).abs() < 1e-15);

        let w = Window::block(2, 1).unwrap();
        let c = Configuration::uniform(w, 1);
        let e = energy(&c, &potts(2, 1.0)).unwrap();
        assert_eq!(e.bond_part, -12.0);
        assert_eq!(e.site_part, 0.0);

        let bad = Configuration::from_pairs([(s(0, 0), 1), (s(0, 1), 1)]).unwrap();
        assert!(matches!(energy(&bad, &hard_core(2.0)), Err(Error::InfeasibleConfiguration(_))));
    }

    #[test]
    fn hard_core_box_counts_independent_sets() {
        let w = Window::block(2, 1).unwrap();
        let z = partition_function(&w, &hard_core(1.0), None).unwrap();
        assert!((z - 63f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn potts_at_zero_coupling() {
        let w = Window::rectangle(&[0, 0], &[2, 1]).unwrap();
        let z = partition_function(&w, &potts(3, 0.0), None).unwrap();
        assert!((z - 6.0 * 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pinned_neighbour_forces_zero() {
        let w = Window::block(2, 0).unwrap();
        let b = Configuration::from_pairs([(s(1, 0), 1), (s(-1, 0), 0), (s(0, 1), 0), (s(0, -1), 0)]).unwrap();
        let z = partition_function(&w, &hard_core(3.0), Some(&b)).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn infeasible_boundary_is_reported() {
        // a symbol that may not be followed by anything on axis 1
        let cs = ConstraintSystem::new(
            labels(2),
            vec![vec![], vec![(1, 0), (1, 1), (0, 1)]],
        )
        .unwrap();
        let phi = NNInteraction::from_fn(cs, |_| 0.0, |_, _, _| 0.0).unwrap();
        let w = Window::block(2, 0).unwrap();
        let b = Configuration::from_pairs([(s(1, 0), 0), (s(-1, 0), 0), (s(0, 1), 1), (s(0, -1), 1)]).unwrap();
        assert_eq!(partition_function(&w, &phi, Some(&b)), Err(Error::InfeasibleBoundary));
    }

    #[test]
    fn too_large_is_an_error() {
        let w = Window::block(2, 3).unwrap();
        assert!(matches!(partition_function(&w, &potts(2, 0.1), None), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn site_shift_moves_log_z_exactly() {
        let w = Window::rectangle(&[0, 0], &[2, 2]).unwrap();
        let phi = hard_core(1.7);
        let z0 = partition_function(&w, &phi, None).unwrap();
        for c in [-2.5, 0.3, 4.0] {
            let z1 = partition_function(&w, &phi.shift_site_energies(c).unwrap(), None).unwrap();
            assert!((z1 - (z0 - w.len() as f64 * c)).abs() < 1e-12);
        }
    }

    #[test]
    fn hat_equals_plain_with_safe_symbol() {
        let w = Window::block(2, 1).unwrap();
        let hc = hard_core(1.3);
        let hat = hat_partition_function(&w, &hc, DEFAULT_PADDING).unwrap();
        assert_eq!(hat.method, HatMethod::SafeSymbol);
        assert_eq!(hat.log_value, partition_function(&w, &hc, None).unwrap());
        let p = potts(3, 0.7);
        assert_eq!(
            hat_partition_function(&w, &p, DEFAULT_PADDING).unwrap().log_value,
            partition_function(&w, &p, None).unwrap()
        );
    }

    #[test]
    fn hat_is_below_plain_without_safe_symbol() {
        // c may not be followed by anything vertically, so a c on the top
        // row of a window is locally fine but never extends.
        let cs = ConstraintSystem::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![(0, 1)], vec![(2, 0), (2, 1), (2, 2)]],
        )
        .unwrap();
        assert!(cs.safe_symbols().is_empty());
        let phi = NNInteraction::from_fn(cs, |a| 0.2 * a as f64, |_, a, b| if a == b { -0.3 } else { 0.0 }).unwrap();
        for w in [Window::rectangle(&[0, 0], &[1, 1]).unwrap(), Window::rectangle(&[0, 0], &[2, 1]).unwrap()] {
            let z = partition_function(&w, &phi, None).unwrap();
            let hat = hat_partition_function(&w, &phi, DEFAULT_PADDING).unwrap();
            assert_eq!(hat.method, HatMethod::PaddingRing { width: 2 });
            assert!(hat.log_value < z);
        }
    }

    #[test]
    fn extra_pinning_lowers_z() {
        let w = Window::rectangle(&[0, 0], &[1, 1]).unwrap();
        let phi = hard_core(2.0);
        let ring = w.boundary(Metric::OneNorm);
        let zeros = Configuration::from_pairs(ring.iter().map(|s| (s.clone(), 0))).unwrap();
        let z = partition_function(&w, &phi, Some(&zeros)).unwrap();
        let sub = Window::explicit(w.sites()[1..].iter().cloned()).unwrap();
        let mut pinned: Vec<(Site, Symbol)> = sub.boundary(Metric::OneNorm).into_iter().map(|s| (s, 0)).collect();
        pinned.sort();
        let b = Configuration::from_pairs(pinned).unwrap();
        let z_sub = partition_function(&sub, &phi, Some(&b)).unwrap();
        assert!(z_sub <= z);
    }
}
