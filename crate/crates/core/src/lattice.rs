//! Geometry of the hypercubic lattice `Z^d`.
//!
//! Sites are integer vectors compared lexicographically with the first
//! coordinate deciding first. Windows are finite site sets stored explicitly
//! in that order, so every enumeration and serialization built on top of a
//! window is canonical.
//!
//! Two adjacency notions are supported: the usual nearest-neighbour
//! adjacency (`Metric::OneNorm`) and the diagonal-inclusive adjacency
//! (`Metric::InfNorm`) used for star-boundaries and star-connectivity.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A point of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site(Vec<i64>);

impl Site {
    pub fn new(coords: impl Into<Vec<i64>>) -> Self {
        Site(coords.into())
    }

    pub fn origin(dim: usize) -> Self {
        Site(vec![0; dim])
    }

    /// The canonical basis vector `e_axis` (axes are 0-based here).
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut c = vec![0; dim];
        c[axis] = 1;
        Site(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn offset(&self, other: &Site) -> Site {
        debug_assert_eq!(self.dim(), other.dim());
        Site(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn minus(&self, other: &Site) -> Site {
        debug_assert_eq!(self.dim(), other.dim());
        Site(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `self + delta * e_axis`.
    pub fn step(&self, axis: usize, delta: i64) -> Site {
        let mut c = self.0.clone();
        c[axis] += delta;
        Site(c)
    }

    /// True when `self` lies in the lexicographic past `{x : x < 0}`.
    pub fn is_past(&self) -> bool {
        self.0.iter().find(|&&c| c != 0).is_some_and(|&c| c < 0)
    }

    pub fn one_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn inf_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<[i64; 2]> for Site {
    fn from(c: [i64; 2]) -> Self {
        Site(c.to_vec())
    }
}

/// Lexicographic comparison: the first coordinate where the sites differ
/// decides.
pub fn lex_compare(a: &Site, b: &Site) -> Result<Ordering> {
    if a.dim() != b.dim() {
        return invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        ));
    }
    Ok(a.0.cmp(&b.0))
}

/// Adjacency notion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Nearest neighbours: `|x - y|_1 = 1`.
    OneNorm,
    /// Neighbours including diagonals: `|x - y|_inf = 1`.
    InfNorm,
}

/// Offsets of the neighbours of the origin under `metric`, in lexicographic
/// order.
pub fn neighbour_offsets(dim: usize, metric: Metric) -> Vec<Site> {
    match metric {
        Metric::OneNorm => {
            let mut out = Vec::with_capacity(2 * dim);
            for axis in 0..dim {
                out.push(Site::unit(dim, axis).step(axis, -2));
                out.push(Site::unit(dim, axis));
            }
            out.sort();
            out
        }
        Metric::InfNorm => {
            let mut out = Vec::new();
            let total = 3usize.pow(dim as u32);
            for code in 0..total {
                let mut c = vec![0i64; dim];
                let mut rest = code;
                for slot in c.iter_mut().rev() {
                    *slot = (rest % 3) as i64 - 1;
                    rest /= 3;
                }
                if c.iter().any(|&v| v != 0) {
                    out.push(Site(c));
                }
            }
            out
        }
    }
}

/// How a window was built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// `[-n, n]^d`.
    Block { n: i64 },
    /// `{x >= 0 (lex) : -y <= x <= z}`.
    HalfBox { y: Vec<i64>, z: Vec<i64> },
    Explicit,
}

/// A finite, nonempty set of sites kept in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    dim: usize,
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    kind: WindowKind,
}

impl Window {
    fn from_sorted(dim: usize, sites: Vec<Site>, kind: WindowKind) -> Self {
        let index = sites.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Window { dim, sites, index, kind }
    }

    /// Builds a window from an arbitrary collection of sites. Duplicates are
    /// removed and the sites are put in lexicographic order.
    pub fn explicit(sites: impl IntoIterator<Item = Site>) -> Result<Self> {
        let set: BTreeSet<Site> = sites.into_iter().collect();
        let Some(first) = set.iter().next() else {
            return invalid("a window must contain at least one site");
        };
        let dim = first.dim();
        if dim == 0 || set.iter().any(|s| s.dim() != dim) {
            return invalid("all sites of a window must share one positive dimension");
        }
        Ok(Self::from_sorted(dim, set.into_iter().collect(), WindowKind::Explicit))
    }

    /// The block `B_n = [-n, n]^d`.
    pub fn block(dim: usize, n: i64) -> Result<Self> {
        if dim == 0 || n < 0 {
            return invalid(format!("block needs dim > 0 and n >= 0, got dim={dim}, n={n}"));
        }
        let lo = vec![-n; dim];
        let hi = vec![n; dim];
        let sites = rectangle_sites(&lo, &hi);
        Ok(Self::from_sorted(dim, sites, WindowKind::Block { n }))
    }

    /// The rectangle `[lo, hi]` (coordinatewise, inclusive), as an explicit
    /// window.
    pub fn rectangle(lo: &[i64], hi: &[i64]) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(hi).any(|(a, b)| a > b) {
            return invalid("rectangle needs matching nonempty corners with lo <= hi");
        }
        Ok(Self::from_sorted(lo.len(), rectangle_sites(lo, hi), WindowKind::Explicit))
    }

    /// The half-box `S_{y,z} = {x >= 0 (lex) : -y <= x <= z}`.
    pub fn half_box(y: &[i64], z: &[i64]) -> Result<Self> {
        if y.len() != z.len() || y.is_empty() {
            return invalid("half-box corners must have the same positive dimension");
        }
        if y.iter().chain(z).any(|&c| c < 0) {
            return invalid(format!("half-box corners must be nonnegative, got y={y:?}, z={z:?}"));
        }
        let lo: Vec<i64> = y.iter().map(|c| -c).collect();
        let sites = rectangle_sites(&lo, z)
            .into_iter()
            .filter(|s| !s.is_past())
            .collect();
        Ok(Self::from_sorted(
            y.len(),
            sites,
            WindowKind::HalfBox { y: y.to_vec(), z: z.to_vec() },
        ))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &WindowKind {
        &self.kind
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: &Site) -> bool {
        self.index.contains_key(site)
    }

    pub fn index_of(&self, site: &Site) -> Option<usize> {
        self.index.get(site).copied()
    }

    /// Exterior sites at distance one under `metric` (the outer boundary).
    pub fn boundary(&self, metric: Metric) -> Vec<Site> {
        let offsets = neighbour_offsets(self.dim, metric);
        let mut out = BTreeSet::new();
        for s in &self.sites {
            for o in &offsets {
                let t = s.offset(o);
                if !self.contains(&t) {
                    out.insert(t);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Sites of the window adjacent to its complement.
    pub fn inner_boundary(&self, metric: Metric) -> Vec<Site> {
        let offsets = neighbour_offsets(self.dim, metric);
        self.sites
            .iter()
            .filter(|s| offsets.iter().any(|o| !self.contains(&s.offset(o))))
            .cloned()
            .collect()
    }

    /// The window together with its boundary.
    pub fn closure(&self, metric: Metric) -> Window {
        let sites = self.sites.iter().cloned().chain(self.boundary(metric));
        Window::explicit(sites).expect("closure of a nonempty window is nonempty")
    }

    /// Splits the nearest-neighbour boundary of a half-box into the part in
    /// the lexicographic past (bottom) and the rest (top).
    pub fn split_boundary(&self) -> Result<(Vec<Site>, Vec<Site>)> {
        if !matches!(self.kind, WindowKind::HalfBox { .. }) {
            return Err(Error::InvalidArgument(
                "split_boundary is only defined for half-boxes".into(),
            ));
        }
        Ok(self.boundary(Metric::OneNorm).into_iter().partition(|s| s.is_past()))
    }

    /// The translate `Λ - x`.
    pub fn translate(&self, by: &Site) -> Window {
        let sites: Vec<Site> = self.sites.iter().map(|s| s.minus(by)).collect();
        Self::from_sorted(self.dim, sites, WindowKind::Explicit)
    }

    /// Lower and upper corners of the bounding rectangle.
    pub fn bounding_box(&self) -> (Vec<i64>, Vec<i64>) {
        let mut lo = self.sites[0].coords().to_vec();
        let mut hi = lo.clone();
        for s in &self.sites {
            for (k, &c) in s.coords().iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        (lo, hi)
    }
}

fn rectangle_sites(lo: &[i64], hi: &[i64]) -> Vec<Site> {
    let mut out = vec![Vec::with_capacity(lo.len())];
    for (&a, &b) in lo.iter().zip(hi) {
        let mut next = Vec::with_capacity(out.len() * (b - a + 1).max(0) as usize);
        for prefix in &out {
            for c in a..=b {
                let mut v = prefix.clone();
                v.push(c);
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter().map(Site).collect()
}

/// Connected components of `sites` under `metric`, each sorted, listed in
/// order of their smallest site.
pub fn components(sites: &[Site], metric: Metric) -> Vec<Vec<Site>> {
    let Some(first) = sites.first() else {
        return Vec::new();
    };
    let offsets = neighbour_offsets(first.dim(), metric);
    let members: BTreeSet<&Site> = sites.iter().collect();
    let mut seen: BTreeSet<&Site> = BTreeSet::new();
    let mut out = Vec::new();
    for start in &members {
        if seen.contains(start) {
            continue;
        }
        let mut comp = vec![(*start).clone()];
        seen.insert(start);
        let mut stack = vec![(*start).clone()];
        while let Some(s) = stack.pop() {
            for o in &offsets {
                let t = s.offset(o);
                if let Some(&m) = members.get(&t) {
                    if seen.insert(m) {
                        comp.push(m.clone());
                        stack.push(m.clone());
                    }
                }
            }
        }
        comp.sort();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: i64, y: i64) -> Site {
        Site::from([x, y])
    }

    #[test]
    fn half_box_unit() {
        let w = Window::half_box(&[1, 1], &[1, 1]).unwrap();
        assert_eq!(w.sites(), &[s(0, 0), s(0, 1), s(1, -1), s(1, 0), s(1, 1)]);
    }

    #[test]
    fn half_box_degenerate() {
        let w = Window::half_box(&[0, 0], &[0, 0]).unwrap();
        assert_eq!(w.sites(), &[s(0, 0)]);
    }

    #[test]
    fn half_box_rejects_negative_corner() {
        assert!(matches!(
            Window::half_box(&[-1, 0], &[0, 0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn half_box_asymmetric_matches_filtered_rectangle() {
        // Independent route: walk the rectangle [-2,1] x [-1,2] and keep the
        // sites that are not in the lexicographic past.
        let mut expected = Vec::new();
        for x in -2..=1 {
            for y in -1..=2 {
                if x > 0 || (x == 0 && y >= 0) {
                    expected.push(s(x, y));
                }
            }
        }
        let w = Window::half_box(&[2, 1], &[1, 2]).unwrap();
        assert_eq!(w.sites(), expected.as_slice());
        assert_eq!(w.len(), 7);
    }

    #[test]
    fn half_box_size_formula() {
        for n in 0..=6i64 {
            let hb = Window::half_box(&[n, n], &[n, n]).unwrap();
            let b = Window::block(2, n).unwrap();
            let expected = b.len() as i64 - (n * (2 * n + 1) + n);
            assert_eq!(hb.len() as i64, expected, "n = {n}");
        }
    }

    #[test]
    fn boundary_examples() {
        let hb = Window::half_box(&[1, 1], &[1, 1]).unwrap();
        assert_eq!(hb.boundary(Metric::OneNorm).len(), 9);
        let b0 = Window::block(2, 0).unwrap();
        assert_eq!(
            b0.boundary(Metric::OneNorm),
            vec![s(-1, 0), s(0, -1), s(0, 1), s(1, 0)]
        );
        let b1 = Window::block(2, 1).unwrap();
        let ring = b1.boundary(Metric::InfNorm);
        let expected: Vec<Site> = Window::block(2, 2)
            .unwrap()
            .sites()
            .iter()
            .filter(|x| x.inf_norm() == 2)
            .cloned()
            .collect();
        assert_eq!(ring, expected);
        assert_eq!(ring.len(), 16);
    }

    #[test]
    fn split_boundary_examples() {
        let hb = Window::half_box(&[1, 1], &[1, 1]).unwrap();
        let (bottom, top) = hb.split_boundary().unwrap();
        assert_eq!(bottom, vec![s(-1, 0), s(-1, 1), s(0, -1)]);
        assert_eq!(top.len(), 6);

        let hb0 = Window::half_box(&[0, 0], &[0, 0]).unwrap();
        let (bottom, top) = hb0.split_boundary().unwrap();
        assert_eq!(bottom, vec![s(-1, 0), s(0, -1)]);
        assert_eq!(top, vec![s(0, 1), s(1, 0)]);

        let hb2 = Window::half_box(&[2, 2], &[2, 2]).unwrap();
        let (bottom, top) = hb2.split_boundary().unwrap();
        assert_eq!(bottom.len() + top.len(), hb2.boundary(Metric::OneNorm).len());
        assert!(bottom.iter().all(|x| x.is_past()));
        assert!(top.iter().all(|x| !x.is_past() && *x != Site::origin(2)));

        let block = Window::block(2, 1).unwrap();
        assert!(block.split_boundary().is_err());
    }

    #[test]
    fn lex_compare_examples() {
        assert_eq!(lex_compare(&s(0, -1), &s(0, 0)).unwrap(), Ordering::Less);
        assert_eq!(lex_compare(&s(1, -5), &s(0, 9)).unwrap(), Ordering::Greater);
        assert_eq!(lex_compare(&s(0, 0), &s(0, 0)).unwrap(), Ordering::Equal);
        assert!(lex_compare(&s(0, 0), &Site::new(vec![0, 0, 0])).is_err());
    }

    #[test]
    fn closure_and_inner_boundary() {
        let w = Window::half_box(&[2, 1], &[1, 2]).unwrap();
        for metric in [Metric::OneNorm, Metric::InfNorm] {
            let bd = w.boundary(metric);
            assert!(bd.iter().all(|x| !w.contains(x)));
            let inner = w.inner_boundary(metric);
            assert!(inner.iter().all(|x| w.contains(x)));
            assert_eq!(w.closure(metric).len(), w.len() + bd.len());
        }
    }

    #[test]
    fn components_split_by_metric() {
        let sites = vec![s(0, 0), s(1, 1), s(3, 3)];
        assert_eq!(components(&sites, Metric::OneNorm).len(), 3);
        assert_eq!(components(&sites, Metric::InfNorm).len(), 2);
    }

    #[test]
    fn three_dimensional_block() {
        let b = Window::block(3, 1).unwrap();
        assert_eq!(b.len(), 27);
        assert_eq!(b.boundary(Metric::OneNorm).len(), 6 * 9);
    }
}
