//! Exact finite-volume Gibbs distributions by enumeration.

use serde::{Deserialize, Serialize};

use crate::enumerate::{Enumeration, DEFAULT_STATE_CAP};
use crate::error::{invalid, Error, Result};
use crate::interaction::NNInteraction;
use crate::lattice::{Metric, Site, Window};
use crate::logspace::{log_sum_exp, pairwise_sum};
use crate::point::PeriodicPoint;
use crate::sft::{Configuration, Symbol};

/// Probability table over a product space `{0..a_1} x ... x {0..a_k}`.
///
/// Outcomes are indexed in mixed radix with the first coordinate most
/// significant. Coordinates carry labels (site names, bond names).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    labels: Vec<String>,
    arities: Vec<usize>,
    probabilities: Vec<f64>,
}

const NORMALIZATION_TOL: f64 = 1e-12;

impl FiniteDistribution {
    pub fn new(labels: Vec<String>, arities: Vec<usize>, probabilities: Vec<f64>) -> Result<Self> {
        if labels.len() != arities.len() {
            return invalid("one label per coordinate is required");
        }
        if arities.iter().any(|&a| a == 0) {
            return invalid("every coordinate needs at least one value");
        }
        let size: usize = arities.iter().product();
        if probabilities.len() != size {
            return invalid(format!("expected {size} probabilities, got {}", probabilities.len()));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return invalid("probabilities must be finite and nonnegative");
        }
        let total = pairwise_sum(&probabilities);
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        Ok(FiniteDistribution { labels, arities, probabilities })
    }

    /// Normalizes `exp(log_weights)`; `-inf` entries get probability zero.
    pub fn from_log_weights(labels: Vec<String>, arities: Vec<usize>, log_weights: &[f64]) -> Result<Self> {
        let z = log_sum_exp(log_weights);
        if z == f64::NEG_INFINITY {
            return Err(Error::InfeasibleBoundary);
        }
        let probabilities = log_weights.iter().map(|&lw| (lw - z).exp()).collect();
        Self::new(labels, arities, probabilities)
    }

    /// Product of independent Bernoulli(`p`) coordinates.
    pub fn bernoulli_product(labels: Vec<String>, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return invalid("p must lie in [0, 1]");
        }
        let k = labels.len();
        let probs = (0..1usize << k)
            .map(|idx| {
                let ones = idx.count_ones() as i32;
                p.powi(ones) * (1.0 - p).powi(k as i32 - ones)
            })
            .collect();
        Self::new(labels, vec![2; k], probs)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn arities(&self) -> &[usize] {
        &self.arities
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.probabilities)
    }

    pub fn probability(&self, outcome: &[usize]) -> Result<f64> {
        Ok(self.probabilities[self.index_of(outcome)?])
    }

    pub fn index_of(&self, outcome: &[usize]) -> Result<usize> {
        if outcome.len() != self.arities.len() {
            return invalid("outcome has the wrong number of coordinates");
        }
        let mut idx = 0;
        for (&v, &a) in outcome.iter().zip(&self.arities) {
            if v >= a {
                return invalid("outcome value out of range");
            }
            idx = idx * a + v;
        }
        Ok(idx)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.arities.len()];
        for (slot, &a) in out.iter_mut().zip(&self.arities).rev() {
            *slot = idx % a;
            idx /= a;
        }
        out
    }

    /// Position of a coordinate label.
    pub fn coordinate(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Marginal on the listed coordinates, in the listed order.
    pub fn marginal(&self, coords: &[usize]) -> Result<FiniteDistribution> {
        if coords.iter().any(|&c| c >= self.arities.len()) {
            return invalid("marginal coordinate out of range");
        }
        let arities: Vec<usize> = coords.iter().map(|&c| self.arities[c]).collect();
        let labels = coords.iter().map(|&c| self.labels[c].clone()).collect();
        self.pushforward(labels, arities, |o| coords.iter().map(|&c| o[c]).collect())
    }

    /// Image distribution under `f`. Mass is accumulated in index order.
    pub fn pushforward(
        &self,
        labels: Vec<String>,
        arities: Vec<usize>,
        f: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<FiniteDistribution> {
        let size: usize = arities.iter().product();
        let mut parts: Vec<Vec<f64>> = vec![Vec::new(); size];
        for (idx, &p) in self.probabilities.iter().enumerate() {
            let image = f(&self.decode(idx));
            let mut j = 0;
            for (&v, &a) in image.iter().zip(&arities) {
                if v >= a {
                    return invalid("pushforward image out of range");
                }
                j = j * a + v;
            }
            parts[j].push(p);
        }
        let probs = parts.iter().map(|v| pairwise_sum(v)).collect();
        Self::new(labels, arities, probs)
    }

    /// Probability of an event given as a predicate on outcomes.
    pub fn event_probability(&self, event: impl Fn(&[usize]) -> bool) -> f64 {
        let hits: Vec<f64> = (0..self.len())
            .filter(|&i| event(&self.decode(i)))
            .map(|i| self.probabilities[i])
            .collect();
        pairwise_sum(&hits)
    }

    /// Largest pointwise difference of probabilities.
    pub fn max_abs_deviation(&self, other: &FiniteDistribution) -> Result<f64> {
        if self.arities != other.arities {
            return invalid("outcome spaces differ");
        }
        Ok(self
            .probabilities
            .iter()
            .zip(&other.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `d_TV(a, b) = ½ Σ |a(x) - b(x)|`.
pub fn tv_distance(a: &FiniteDistribution, b: &FiniteDistribution) -> Result<f64> {
    if a.arities != b.arities {
        return invalid("outcome spaces differ");
    }
    let diffs: Vec<f64> = a
        .probabilities
        .iter()
        .zip(&b.probabilities)
        .map(|(x, y)| (x - y).abs())
        .collect();
    Ok((0.5 * pairwise_sum(&diffs)).min(1.0))
}

/// The conditional distribution `π^ξ_Λ` (or the free `π^{(f)}_Λ` when no
/// boundary is given) over `A^Λ`, one coordinate per site.
pub fn gibbs_distribution(
    w: &Window,
    phi: &NNInteraction,
    boundary: Option<&Configuration>,
) -> Result<FiniteDistribution> {
    let en = Enumeration::run(w, phi, boundary, DEFAULT_STATE_CAP)?;
    let labels = w.sites().iter().map(|s| s.to_string()).collect();
    FiniteDistribution::from_log_weights(labels, vec![phi.alphabet_size(); w.len()], en.log_weights())
}

/// A request for `π^ξ_Λ(θ(0) = target)`.
#[derive(Debug, Clone)]
pub struct OriginQuery {
    pub window: Window,
    pub boundary: Configuration,
    pub target: Symbol,
}

impl OriginQuery {
    /// Boundary and target both read off a periodic point.
    pub fn from_point(window: Window, point: &PeriodicPoint) -> Result<Self> {
        let boundary = point.restrict_sites(&window.boundary(Metric::OneNorm))?;
        let target = point.value_at(&Site::origin(window.dim()));
        Ok(OriginQuery { window, boundary, target })
    }
}

/// Exact marginal probability of the target symbol at the origin.
pub fn origin_probability_oracle(query: &OriginQuery, phi: &NNInteraction) -> Result<f64> {
    phi.constraints().check_symbol(query.target)?;
    let origin = Site::origin(query.window.dim());
    let Some(pos) = query.window.index_of(&origin) else {
        return invalid("the window does not contain the origin");
    };
    let dist = gibbs_distribution(&query.window, phi, Some(&query.boundary))?;
    let target = query.target as usize;
    // zeros kept in place so that a forced event sums to exactly the total
    let hits: Vec<f64> = (0..dist.len())
        .map(|i| if dist.decode(i)[pos] == target { dist.probabilities[i] } else { 0.0 })
        .collect();
    Ok((pairwise_sum(&hits) / pairwise_sum(&dist.probabilities)).min(1.0))
}

/// Single-site conditional distributions for every boundary configuration
/// of `{0}` that admits at least one symbol at the origin.
fn single_site_conditionals(phi: &NNInteraction) -> Vec<(Vec<Symbol>, Vec<f64>)> {
    let d = phi.dim();
    let k = phi.alphabet_size();
    let ring: Vec<(usize, i64)> = (0..d).flat_map(|axis| [(axis, 1), (axis, -1)]).collect();
    let count = k.pow(ring.len() as u32);
    let mut out = Vec::new();
    for code in 0..count {
        let mut xi = vec![0 as Symbol; ring.len()];
        let mut rest = code;
        for slot in xi.iter_mut().rev() {
            *slot = (rest % k) as Symbol;
            rest /= k;
        }
        let log_w: Vec<f64> = (0..k)
            .map(|a| {
                let a = a as Symbol;
                let mut lw = -phi.site_energy(a);
                for (&(axis, delta), &b) in ring.iter().zip(&xi) {
                    lw += if delta > 0 {
                        phi.bond_log_weight(axis, a, b)
                    } else {
                        phi.bond_log_weight(axis, b, a)
                    };
                }
                lw
            })
            .collect();
        let z = log_sum_exp(&log_w);
        if z == f64::NEG_INFINITY {
            continue;
        }
        out.push((xi, log_w.iter().map(|lw| (lw - z).exp()).collect()));
    }
    out
}

/// Result of the single-site sensitivity computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QReport {
    pub q_pi: f64,
    pub p_c_site: f64,
    pub below_p_c: bool,
}

/// `Q(π)`: the largest total-variation distance between the origin's
/// conditional distributions under two feasible boundary configurations of
/// `{0}`.
///
/// A ring configuration counts as feasible when it leaves the origin at
/// least one symbol; with a safe symbol every such ring extends to a point
/// of the shift.
pub fn q_pi(phi: &NNInteraction, p_c_site: f64) -> QReport {
    let mut dists: Vec<Vec<f64>> = single_site_conditionals(phi).into_iter().map(|(_, d)| d).collect();
    dists.sort_by(|a, b| a.partial_cmp(b).expect("probabilities are finite"));
    dists.dedup();
    let mut best: f64 = 0.0;
    for i in 0..dists.len() {
        for j in i + 1..dists.len() {
            let diffs: Vec<f64> = dists[i].iter().zip(&dists[j]).map(|(a, b)| (a - b).abs()).collect();
            best = best.max(0.5 * pairwise_sum(&diffs));
        }
    }
    QReport { q_pi: best, p_c_site, below_p_c: best < p_c_site }
}

/// A strictly positive lower bound on conditional origin probabilities of
/// symbols allowed by the boundary, derived from single-site conditionals:
/// `m^{2d} · min_{a, ξ compatible with a} π^ξ_{0}(a)` with `m` the smallest
/// single-site probability of the best safe symbol. `None` without a safe
/// symbol.
pub fn positivity_bound(phi: &NNInteraction) -> Option<f64> {
    let safe = phi.constraints().safe_symbols();
    let conds = single_site_conditionals(phi);
    let min_allowed = conds
        .iter()
        .flat_map(|(_, d)| d.iter().copied().filter(|&p| p > 0.0))
        .fold(f64::INFINITY, f64::min);
    let m_safe = safe
        .iter()
        .map(|&s| conds.iter().map(|(_, d)| d[s as usize]).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    if safe.is_empty() || !min_allowed.is_finite() {
        return None;
    }
    Some(m_safe.powi(2 * phi.dim() as i32) * min_allowed)
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

    fn wr(q: u8, lambda: f64) -> NNInteraction {
        let mut pairs = Vec::new();
        for a in 1..=q {
            for b in 1..=q {
                if a != b {
                    pairs.push((a, b));
                }
            }
        }
        let cs = ConstraintSystem::new(labels(q as usize + 1), vec![pairs.clone(), pairs]).unwrap();
        NNInteraction::from_fn(cs, |a| if a > 0 { -lambda.ln() } else { 0.0 }, |_, _, _| 0.0).unwrap()
    }

    fn origin_window() -> Window {
        Window::block(2, 0).unwrap()
    }

    fn uniform_ring(w: &Window, a: Symbol) -> Configuration {
        Configuration::from_pairs(w.boundary(Metric::OneNorm).into_iter().map(|s| (s, a))).unwrap()
    }

    #[test]
    fn single_site_examples() {
        let w = origin_window();
        let d = gibbs_distribution(&w, &wr(2, 1.0), Some(&uniform_ring(&w, 2))).unwrap();
        assert!((d.probabilities()[0] - 0.5).abs() < 1e-15);
        assert_eq!(d.probabilities()[1], 0.0);
        assert!((d.probabilities()[2] - 0.5).abs() < 1e-15);

        let beta: f64 = 0.37;
        let d = gibbs_distribution(&w, &potts(2, beta), Some(&uniform_ring(&w, 1))).unwrap();
        let expect = (4.0 * beta).exp() / ((4.0 * beta).exp() + 1.0);
        assert!((d.probabilities()[1] - expect).abs() < 1e-14);

        let gamma = 2.7;
        let d = gibbs_distribution(&w, &hard_core(gamma), Some(&uniform_ring(&w, 0))).unwrap();
        assert!((d.probabilities()[1] - gamma / (1.0 + gamma)).abs() < 1e-14);
    }

    fn hc_even() -> PeriodicPoint {
        PeriodicPoint::from_fn(vec![2, 2], |c| ((c[0] + c[1]) % 2 != 0) as Symbol).unwrap()
    }

    fn hc_odd() -> PeriodicPoint {
        PeriodicPoint::from_fn(vec![2, 2], |c| ((c[0] + c[1]) % 2 == 0) as Symbol).unwrap()
    }

    #[test]
    fn origin_probability_examples() {
        let hc = hard_core(1.9);
        for (y, z) in [([1, 1], [1, 1]), ([0, 2], [2, 0]), ([2, 1], [1, 2])] {
            let q = OriginQuery::from_point(Window::half_box(&y, &z).unwrap(), &hc_even()).unwrap();
            assert_eq!(origin_probability_oracle(&q, &hc).unwrap(), 1.0);
        }
        let q = OriginQuery::from_point(
            Window::half_box(&[0, 0], &[0, 0]).unwrap(),
            &PeriodicPoint::constant(2, 2),
        )
        .unwrap();
        assert!((origin_probability_oracle(&q, &wr(2, 1.0)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hard_core_small_half_box_fixture() {
        let q = OriginQuery::from_point(Window::half_box(&[1, 1], &[1, 1]).unwrap(), &hc_odd()).unwrap();
        let p = origin_probability_oracle(&q, &hard_core(1.0)).unwrap();
        assert!((p - 0.5).abs() < 1e-14, "{p}");
    }

    #[test]
    fn tv_examples() {
        let a = FiniteDistribution::bernoulli_product(vec!["x".into()], 0.5).unwrap();
        let b = FiniteDistribution::bernoulli_product(vec!["x".into()], 0.25).unwrap();
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert!((tv_distance(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        let p0 = FiniteDistribution::new(vec!["x".into()], vec![3], vec![1.0, 0.0, 0.0]).unwrap();
        let p2 = FiniteDistribution::new(vec!["x".into()], vec![3], vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(tv_distance(&p0, &p2).unwrap(), 1.0);
        assert!(tv_distance(&a, &p0).is_err());
    }

    #[test]
    fn q_pi_examples() {
        let r = q_pi(&wr(2, 1.0), 0.592746);
        assert!((r.q_pi - 2.0 / 3.0).abs() < 1e-14);
        assert!(!r.below_p_c);
        for gamma in [0.5, 1.0, 4.0] {
            assert!((q_pi(&hard_core(gamma), 0.5).q_pi - gamma / (1.0 + gamma)).abs() < 1e-14);
        }
        assert_eq!(q_pi(&potts(3, 0.0), 0.5).q_pi, 0.0);
        let r = q_pi(&wr(2, 0.5), 0.592746);
        assert!((r.q_pi - 0.5).abs() < 1e-14 && r.below_p_c);
    }

    #[test]
    fn marginal_matches_direct_computation() {
        let w = Window::rectangle(&[0, 0], &[2, 1]).unwrap();
        let sub = Window::explicit([Site::from([0, 0]), Site::from([1, 1])]).unwrap();
        let phi = potts(2, 0.6);
        let d = gibbs_distribution(&w, &phi, None).unwrap();
        let coords: Vec<usize> = sub.sites().iter().map(|s| w.index_of(s).unwrap()).collect();
        let m = d.marginal(&coords).unwrap();
        // direct: sum weights with the two sites fixed
        let lw = crate::interaction::enumerate_log_weights(&w, &phi, None).unwrap();
        let z = log_sum_exp(&lw);
        for a in 0..2 {
            for b in 0..2 {
                let terms: Vec<f64> = (0..lw.len())
                    .filter(|&i| {
                        let o = d.decode(i);
                        o[coords[0]] == a && o[coords[1]] == b
                    })
                    .map(|i| lw[i])
                    .collect();
                let direct = (log_sum_exp(&terms) - z).exp();
                assert!((m.probability(&[a, b]).unwrap() - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationarity_under_translation() {
        let phi = hard_core(1.4);
        let w = Window::rectangle(&[0, 0], &[1, 2]).unwrap();
        let point = hc_odd();
        let b = point.restrict_sites(&w.boundary(Metric::OneNorm)).unwrap();
        let d = gibbs_distribution(&w, &phi, Some(&b)).unwrap();
        let x = Site::from([3, -2]);
        let wt = w.translate(&x);
        let bt = b.translate(&x);
        let dt = gibbs_distribution(&wt, &phi, Some(&bt)).unwrap();
        assert!(d.max_abs_deviation(&dt).unwrap() < 1e-12);
    }

    #[test]
    fn markov_property_on_a_ring() {
        // On the 3x3 block, conditioning on the ring of eight sites around
        // the centre makes the centre independent of the outside, so the
        // conditional of the centre equals the single-site distribution
        // with the four nearest ring sites as boundary.
        let phi = potts(2, 0.8);
        let w = Window::block(2, 1).unwrap();
        let b = Configuration::from_pairs(
            w.boundary(Metric::OneNorm).into_iter().enumerate().map(|(i, s)| (s, (i % 2) as Symbol)),
        )
        .unwrap();
        let d = gibbs_distribution(&w, &phi, Some(&b)).unwrap();
        let centre = w.index_of(&Site::origin(2)).unwrap();
        for ring_code in 0..(1usize << 8) {
            let ring_sites: Vec<usize> = (0..9).filter(|&i| i != centre).collect();
            let matches = |o: &[usize]| ring_sites.iter().enumerate().all(|(k, &i)| o[i] == (ring_code >> k) & 1);
            let joint1 = d.event_probability(|o| matches(o) && o[centre] == 1);
            let total = d.event_probability(|o| matches(o));
            let cond = joint1 / total;
            let nb = |s: Site| -> usize {
                let i = w.index_of(&s).unwrap();
                let k = ring_sites.iter().position(|&r| r == i).unwrap();
                (ring_code >> k) & 1
            };
            let agree = [[1, 0], [-1, 0], [0, 1], [0, -1]]
                .iter()
                .filter(|c| nb(Site::from(**c)) == 1)
                .count() as f64;
            let expect = (0.8 * agree).exp() / ((0.8 * agree).exp() + (0.8 * (4.0 - agree)).exp());
            assert!((cond - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn positivity_bound_holds_on_small_half_boxes() {
        for phi in [hard_core(1.0), hard_core(30.0), wr(2, 0.7), potts(3, 0.9)] {
            let bound = positivity_bound(&phi).unwrap();
            assert!(bound > 0.0);
            let points = if phi.alphabet_size() == 2 {
                vec![hc_odd(), hc_even()]
            } else {
                vec![PeriodicPoint::constant(2, (phi.alphabet_size() - 1) as Symbol)]
            };
            for p in &points {
                for (y, z) in [([1, 1], [1, 1]), ([0, 1], [2, 1]), ([1, 0], [1, 2])] {
                    let q = OriginQuery::from_point(Window::half_box(&y, &z).unwrap(), p).unwrap();
                    assert!(origin_probability_oracle(&q, &phi).unwrap() >= bound);
                }
            }
        }
    }
}
