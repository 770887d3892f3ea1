//! Bond random-cluster measures and planar duality.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gibbs::FiniteDistribution;
use crate::lattice::{Site, Window};
use crate::logspace::count_ln;
use crate::models::dual_p;

/// Largest bond set enumerated exhaustively.
pub const MAX_BONDS: usize = 24;

/// A nearest-neighbour bond `{lo, lo + e_axis}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bond {
    pub lo: Site,
    pub axis: usize,
}

impl Bond {
    pub fn hi(&self) -> Site {
        self.lo.step(self.axis, 1)
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.lo, self.hi())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wiring {
    /// Bonds with both endpoints in the window, clusters counted as is.
    Free,
    /// Bonds with at least one endpoint in the window, clusters meeting the
    /// exterior counted as one.
    Wired,
}

/// A bond set together with an open/closed state per bond.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondConfiguration {
    pub bonds: Vec<Bond>,
    pub open: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterCount {
    /// Components of the window under the open bonds with both endpoints
    /// inside.
    pub free_count: usize,
    /// Components of the closure, with every component meeting the
    /// exterior merged into one.
    pub wired_count: usize,
}

/// `E^0(Λ)` (free) or `E^1(Λ)` (wired), sorted by lower endpoint then axis.
pub fn bond_set(w: &Window, wiring: Wiring) -> Vec<Bond> {
    let mut out = std::collections::BTreeSet::new();
    for s in w.sites() {
        for axis in 0..w.dim() {
            for lo in [s.clone(), s.step(axis, -1)] {
                let b = Bond { lo, axis };
                let inside = [w.contains(&b.lo), w.contains(&b.hi())];
                let keep = match wiring {
                    Wiring::Free => inside[0] && inside[1],
                    Wiring::Wired => inside[0] || inside[1],
                };
                if keep {
                    out.insert(b);
                }
            }
        }
    }
    out.into_iter().collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Endpoint indices of each bond: sites of the window keep their index,
/// every outside site maps to the single exterior node `w.len()`.
fn endpoints(w: &Window, bonds: &[Bond]) -> Vec<(usize, usize)> {
    let ext = w.len();
    bonds
        .iter()
        .map(|b| {
            (
                w.index_of(&b.lo).unwrap_or(ext),
                w.index_of(&b.hi()).unwrap_or(ext),
            )
        })
        .collect()
}

fn count_components(nodes: usize, edges: &[(usize, usize)], open: impl Fn(usize) -> bool) -> usize {
    let mut uf = UnionFind::new(nodes);
    for (i, &(a, b)) in edges.iter().enumerate() {
        if open(i) {
            uf.union(a, b);
        }
    }
    (0..nodes).filter(|&i| uf.find(i) == i).count()
}

/// Cluster counts of `config` on `w`. Bonds leaving the window only enter
/// the wired count.
pub fn cluster_counts(w: &Window, config: &BondConfiguration) -> Result<ClusterCount> {
    if config.bonds.len() != config.open.len() {
        return invalid("one state per bond is required");
    }
    let edges = endpoints(w, &config.bonds);
    let ext = w.len();
    let free_edges: Vec<(usize, usize)> = edges.iter().copied().filter(|&(a, b)| a != ext && b != ext).collect();
    let free_open: Vec<bool> = edges
        .iter()
        .zip(&config.open)
        .filter(|((a, b), _)| *a != ext && *b != ext)
        .map(|(_, &o)| o)
        .collect();
    let free_count = count_components(w.len(), &free_edges, |i| free_open[i]);
    let wired_count = count_components(w.len() + 1, &edges, |i| config.open[i]);
    Ok(ClusterCount { free_count, wired_count })
}

fn check_parameters(p: f64, q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return invalid(format!("p must lie in [0, 1], got {p}"));
    }
    if !(q > 0.0 && q.is_finite()) {
        return invalid(format!("q must be positive, got {q}"));
    }
    Ok(())
}

/// Log weights `#open log p + #closed log(1-p) + k log q` over all bond
/// configurations, with the first bond most significant.
pub(crate) fn bond_log_weights(w: &Window, bonds: &[Bond], p: f64, q: f64, wiring: Wiring) -> Result<Vec<f64>> {
    check_parameters(p, q)?;
    if bonds.len() > MAX_BONDS {
        return Err(Error::TooLarge {
            required: 2f64.powi(bonds.len() as i32),
            cap: 2f64.powi(MAX_BONDS as i32),
            hint: "bond enumeration is limited to 24 bonds".into(),
        });
    }
    let edges = endpoints(w, bonds);
    let ext = w.len();
    let m = bonds.len();
    let ln_q = q.ln();
    let mut out = Vec::with_capacity(1 << m);
    for idx in 0..(1usize << m) {
        let is_open = |i: usize| (idx >> (m - 1 - i)) & 1 == 1;
        let open = idx.count_ones() as usize;
        let closed = m - open;
        let k = match wiring {
            Wiring::Free => count_components(w.len(), &edges, is_open),
            Wiring::Wired => count_components(ext + 1, &edges, is_open),
        };
        let lw = count_ln(open, p) + count_ln(closed, 1.0 - p) + k as f64 * ln_q;
        out.push(lw);
    }
    Ok(out)
}

/// The bond random-cluster distribution `φ^{(i)}_{p,q,Λ}` over the bond
/// set of the chosen wiring.
pub fn bond_rc(w: &Window, p: f64, q: f64, wiring: Wiring) -> Result<(Vec<Bond>, FiniteDistribution)> {
    let bonds = bond_set(w, wiring);
    if wiring == Wiring::Free && bonds.is_empty() {
        return invalid("the window has no internal bonds");
    }
    let lw = bond_log_weights(w, &bonds, p, q, wiring)?;
    let labels = bonds.iter().map(Bond::label).collect();
    let dist = FiniteDistribution::from_log_weights(labels, vec![2; bonds.len()], &lw)?;
    Ok((bonds, dist))
}

/// The dual bond of `b`: a horizontal bond `{(x,y),(x+1,y)}` maps to the
/// vertical bond `{(x,y-1),(x,y)}` and a vertical bond `{(x,y),(x,y+1)}` to
/// the horizontal bond `{(x-1,y),(x,y)}`.
pub fn dual_bond(b: &Bond) -> Bond {
    let c = b.lo.coords();
    match b.axis {
        0 => Bond { lo: Site::from([c[0], c[1] - 1]), axis: 1 },
        _ => Bond { lo: Site::from([c[0] - 1, c[1]]), axis: 0 },
    }
}

/// Index bijection from `E^1([-n+1, n]^2)` to `E^0([-n, n]^2)` by the dual
/// bond rule. Fails if the rule is not a bijection between the two sets.
pub fn dual_bijection(n: i64) -> Result<(Vec<Bond>, Vec<Bond>, Vec<usize>)> {
    if n < 1 {
        return invalid("duality needs n >= 1");
    }
    let primal_w = Window::rectangle(&[-n + 1, -n + 1], &[n, n])?;
    let dual_w = Window::block(2, n)?;
    let primal = bond_set(&primal_w, Wiring::Wired);
    let dual = bond_set(&dual_w, Wiring::Free);
    if primal.len() != dual.len() {
        return Err(Error::PreconditionFailed("bond sets differ in size".into()));
    }
    let mut map = Vec::with_capacity(primal.len());
    let mut hit = vec![false; dual.len()];
    for b in &primal {
        let d = dual_bond(b);
        let Ok(j) = dual.binary_search(&d) else {
            return Err(Error::PreconditionFailed(format!("dual of {} is not a dual bond", b.label())));
        };
        if hit[j] {
            return Err(Error::PreconditionFailed("dual map is not injective".into()));
        }
        hit[j] = true;
        map.push(j);
    }
    Ok((primal, dual, map))
}

/// Largest `|φ^{(1)}_{p,q,B̃_n}(w) - φ^{(0)}_{p*,q,B_n}(w*)|` over all `w`,
/// where `w*(e*) = 1 - w(e)`.
pub fn duality_check(n: i64, p: f64, q: f64) -> Result<f64> {
    check_parameters(p, q)?;
    let (primal, dual, map) = dual_bijection(n)?;
    let primal_w = Window::rectangle(&[-n + 1, -n + 1], &[n, n])?;
    let dual_w = Window::block(2, n)?;
    let lw1 = bond_log_weights(&primal_w, &primal, p, q, Wiring::Wired)?;
    let lw0 = bond_log_weights(&dual_w, &dual, dual_p(p, q), q, Wiring::Free)?;
    let labels1 = primal.iter().map(Bond::label).collect();
    let labels0 = dual.iter().map(Bond::label).collect();
    let m = primal.len();
    let wired = FiniteDistribution::from_log_weights(labels1, vec![2; m], &lw1)?;
    let free = FiniteDistribution::from_log_weights(labels0, vec![2; m], &lw0)?;
    let mut worst: f64 = 0.0;
    for idx in 0..wired.len() {
        let w = wired.decode(idx);
        let mut star = vec![0usize; m];
        for (i, &j) in map.iter().enumerate() {
            star[j] = 1 - w[i];
        }
        worst = worst.max((wired.probabilities()[idx] - free.probability(&star)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::bond_p_c;

    #[test]
    fn single_site_wired_counts() {
        let w = Window::block(2, 0).unwrap();
        let bonds = bond_set(&w, Wiring::Wired);
        assert_eq!(bonds.len(), 4);
        let closed = BondConfiguration { bonds: bonds.clone(), open: vec![false; 4] };
        assert_eq!(cluster_counts(&w, &closed).unwrap().wired_count, 2);
        for i in 0..4 {
            let mut open = vec![false; 4];
            open[i] = true;
            let c = BondConfiguration { bonds: bonds.clone(), open };
            assert_eq!(cluster_counts(&w, &c).unwrap().wired_count, 1);
        }
    }

    #[test]
    fn q_one_is_bernoulli() {
        let w = Window::rectangle(&[0, 0], &[1, 2]).unwrap();
        let (bonds, d) = bond_rc(&w, 0.37, 1.0, Wiring::Free).unwrap();
        let b = FiniteDistribution::bernoulli_product(bonds.iter().map(Bond::label).collect(), 0.37).unwrap();
        assert!(d.max_abs_deviation(&b).unwrap() < 1e-14);
    }

    #[test]
    fn degenerate_p() {
        let w = Window::rectangle(&[0, 0], &[1, 1]).unwrap();
        let (_, d) = bond_rc(&w, 0.0, 2.0, Wiring::Free).unwrap();
        assert_eq!(d.probabilities()[0], 1.0);
        let (_, d) = bond_rc(&w, 1.0, 2.0, Wiring::Wired).unwrap();
        assert_eq!(*d.probabilities().last().unwrap(), 1.0);
    }

    #[test]
    fn bijection_sizes_and_incidence() {
        for (n, size) in [(1, 12), (2, 40)] {
            let (primal, dual, map) = dual_bijection(n).unwrap();
            assert_eq!(primal.len(), size);
            assert_eq!(dual.len(), size);
            let mut sorted = map.clone();
            sorted.sort();
            assert_eq!(sorted, (0..size).collect::<Vec<_>>());
            for (i, &j) in map.iter().enumerate() {
                // a bond and its dual cross at their midpoints
                let p = &primal[i];
                let d = &dual[j];
                let mid = |b: &Bond| {
                    let c = b.lo.coords();
                    let mut m = [2 * c[0], 2 * c[1]];
                    m[b.axis] += 1;
                    m
                };
                let (mp, md) = (mid(p), mid(d));
                assert_eq!([mp[0] - 1, mp[1] - 1], md);
                assert_ne!(p.axis, d.axis);
            }
        }
    }

    #[test]
    fn duality_examples() {
        for (p, q) in [(0.6, 2.0), (bond_p_c(2.0), 2.0), (0.3, 1.0), (0.8, 1.0), (0.5, 3.0)] {
            assert!(duality_check(1, p, q).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn wired_count_bounded_by_free_plus_one() {
        let w = Window::rectangle(&[0, 0], &[1, 1]).unwrap();
        let bonds = bond_set(&w, Wiring::Wired);
        for idx in 0..(1usize << bonds.len()) {
            let open: Vec<bool> = (0..bonds.len()).map(|i| (idx >> i) & 1 == 1).collect();
            let c = cluster_counts(&w, &BondConfiguration { bonds: bonds.clone(), open }).unwrap();
            assert!(c.wired_count <= c.free_count + 1);
        }
    }
}
