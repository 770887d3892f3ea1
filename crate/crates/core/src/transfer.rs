//! Column transfer for conditional origin probabilities on half-boxes of
//! `Z^2`.
//!
//! The bounding box of `S_{y,z}` (columns `0..=z_1`, rows `-y_2..=z_2`) is
//! swept one site at a time. The state is the frontier: one symbol per row,
//! holding the most recently processed site of that row. Box sites outside
//! `S_{y,z}` are clamped to the point's values and sites outside the box are
//! read directly from the point. A bond is weighted when at least one of its
//! endpoints lies in `S_{y,z}`, and each bond is weighted exactly once, at
//! the later of its two endpoints in sweep order.
//!
//! Two vectors travel through the sweep: the denominator, free at the
//! origin, and the numerator, created at the origin by masking the
//! denominator to the pinned symbol. Both are renormalized after every
//! column, and the probability is the product of the per-column ratios of
//! their sums.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interaction::NNInteraction;
use crate::point::PeriodicPoint;
use crate::sft::Symbol;

pub use crate::enumerate::DEFAULT_STATE_CAP;

/// Order in which columns are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDirection {
    LeftToRight,
    /// The origin column comes last, so the numerator is carried only
    /// through the origin's own column.
    RightToLeft,
}

/// State representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferMode {
    /// Sparse when feasible columns are a small fraction of all columns.
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferOptions {
    /// Largest admissible number of states.
    pub state_cap: f64,
    pub direction: SweepDirection,
    pub mode: TransferMode,
    /// `Auto` picks the sparse representation when the fraction of
    /// feasible column words is below this value.
    pub sparse_threshold: f64,
}

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions {
            state_cap: DEFAULT_STATE_CAP,
            direction: SweepDirection::RightToLeft,
            mode: TransferMode::Auto,
            sparse_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub log_numerator: f64,
    pub log_denominator: f64,
    pub probability: f64,
    pub n_columns: usize,
    pub height: usize,
    /// Representation actually used (`Dense` or `Sparse`).
    pub mode: TransferMode,
    pub peak_states: usize,
}

impl TransferResult {
    /// `-log π`, computed from the log sums directly.
    pub fn neg_log_probability(&self) -> f64 {
        self.log_denominator - self.log_numerator
    }
}

/// `π_{y,z}(ω)`: the probability that the origin carries `ω(0)` in `S_{y,z}`
/// under boundary condition `ω`.
pub fn conditional_origin_probability(
    y: [i64; 2],
    z: [i64; 2],
    point: &PeriodicPoint,
    phi: &NNInteraction,
    opts: &TransferOptions,
) -> Result<TransferResult> {
    if phi.dim() != 2 || point.dim() != 2 {
        return invalid("the transfer engine works in two dimensions");
    }
    if y.iter().chain(&z).any(|&c| c < 0) {
        return invalid(format!("half-box corners must be nonnegative, got y={y:?}, z={z:?}"));
    }
    if point.cell().iter().any(|&a| a as usize >= phi.alphabet_size()) {
        return invalid("the point uses symbols outside the alphabet");
    }
    let (y2, z1, z2) = (y[1], z[0], z[1]);
    let interior = move |c: i64, r: i64| {
        (c == 0 && (0..=z2).contains(&r)) || ((1..=z1).contains(&c) && (-y2..=z2).contains(&r))
    };
    let exterior = |c: i64, r: i64| Some(point.value_at_coords(&[c, r]));
    let target = point.value_at_coords(&[0, 0]);
    let sweep = Sweep {
        phi,
        cols: (0, z1),
        rows: (-y2, z2),
        interior: &interior,
        exterior: &exterior,
        pin: Some(((0, 0), target)),
    };
    sweep.run(opts)
}

/// `π_n(ω) = π_{(n,n),(n,n)}(ω)` for each requested `n`, with successive
/// absolute differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiSeries {
    pub n_values: Vec<usize>,
    pub results: Vec<TransferResult>,
    pub deltas: Vec<f64>,
}

pub fn pi_n_series(
    point: &PeriodicPoint,
    phi: &NNInteraction,
    n_values: &[usize],
    opts: &TransferOptions,
) -> Result<PiSeries> {
    let mut results = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let n = n as i64;
        results.push(conditional_origin_probability([n, n], [n, n], point, phi, opts)?);
    }
    let deltas = results.windows(2).map(|w| (w[1].probability - w[0].probability).abs()).collect();
    Ok(PiSeries { n_values: n_values.to_vec(), results, deltas })
}

/// `log Z` of the rectangle `[lo, hi]` with free boundary, computed by the
/// same sweep.
pub fn free_log_partition(
    phi: &NNInteraction,
    lo: [i64; 2],
    hi: [i64; 2],
    opts: &TransferOptions,
) -> Result<f64> {
    if phi.dim() != 2 {
        return invalid("the transfer engine works in two dimensions");
    }
    if lo[0] > hi[0] || lo[1] > hi[1] {
        return invalid("empty rectangle");
    }
    let interior = |_: i64, _: i64| true;
    let exterior = |_: i64, _: i64| None;
    let sweep = Sweep {
        phi,
        cols: (lo[0], hi[0]),
        rows: (lo[1], hi[1]),
        interior: &interior,
        exterior: &exterior,
        pin: None,
    };
    Ok(sweep.run(opts)?.log_denominator)
}

/// Number of words of length `len` with no forbidden vertical pair.
pub fn feasible_column_count(phi: &NNInteraction, len: usize) -> f64 {
    let k = phi.alphabet_size();
    if len == 0 {
        return 1.0;
    }
    let cs = phi.constraints();
    let mut counts = vec![1.0f64; k];
    for _ in 1..len {
        counts = (0..k)
            .map(|b| {
                (0..k)
                    .filter(|&a| !cs.is_forbidden(1, a as Symbol, b as Symbol))
                    .map(|a| counts[a])
                    .sum()
            })
            .collect();
    }
    counts.iter().sum()
}

struct Sweep<'a> {
    phi: &'a NNInteraction,
    cols: (i64, i64),
    rows: (i64, i64),
    interior: &'a dyn Fn(i64, i64) -> bool,
    /// Value of a site that is not interior; `None` means no bond is formed.
    exterior: &'a dyn Fn(i64, i64) -> Option<Symbol>,
    pin: Option<((i64, i64), Symbol)>,
}

/// Per-site transition: `coeff[(a * k + b) * k + v]` is the weight of
/// writing `v` when the previous-column neighbour holds `a` and the site
/// below holds `b`.
struct Step {
    pos: usize,
    coeff: Vec<f64>,
    allowed: Vec<Symbol>,
    pin: Option<Symbol>,
    log_scale: f64,
}

impl Sweep<'_> {
    fn run(&self, opts: &TransferOptions) -> Result<TransferResult> {
        let k = self.phi.alphabet_size();
        let height = (self.rows.1 - self.rows.0 + 1) as usize;
        let n_columns = (self.cols.1 - self.cols.0 + 1) as usize;
        let dense_states = (k as f64).powi(height as i32);
        let feasible = feasible_column_count(self.phi, height);
        let sparse = match opts.mode {
            TransferMode::Dense => false,
            TransferMode::Sparse => true,
            TransferMode::Auto => feasible / dense_states < opts.sparse_threshold,
        };
        let required = if sparse {
            (0..=height)
                .map(|i| feasible_column_count(self.phi, i) * feasible_column_count(self.phi, height - i))
                .fold(0.0, f64::max)
        } else {
            dense_states
        };
        if required > opts.state_cap || dense_states >= u64::MAX as f64 {
            return Err(Error::TooLarge {
                required,
                cap: opts.state_cap,
                hint: "reduce the half-box height or raise the state cap".into(),
            });
        }
        if let Some(((c, r), _)) = self.pin {
            if !(self.interior)(c, r) {
                return invalid("the pinned site must be interior");
            }
        }
        let columns: Vec<i64> = match opts.direction {
            SweepDirection::LeftToRight => (self.cols.0..=self.cols.1).collect(),
            SweepDirection::RightToLeft => (self.cols.0..=self.cols.1).rev().collect(),
        };
        let dir = match opts.direction {
            SweepDirection::LeftToRight => 1,
            SweepDirection::RightToLeft => -1,
        };
        let mut state: Box<dyn StateVec> = if sparse {
            Box::new(SparseState::new(k))
        } else {
            Box::new(DenseState::new(k, height))
        };
        let mut log_den = 0.0;
        // numerator over denominator, accumulated per column once the
        // numerator exists
        let mut ratio = 1.0f64;
        let mut log_ratio = 0.0f64;
        for (ci, &c) in columns.iter().enumerate() {
            let first = ci == 0;
            let last = ci + 1 == columns.len();
            for r in self.rows.0..=self.rows.1 {
                let step = self.step(c, r, dir, first, last)?;
                log_den += step.log_scale;
                state.apply(&step);
            }
            let (sd, sn) = state.renormalize();
            if sd == 0.0 {
                return Err(Error::InfeasibleBoundary);
            }
            log_den += sd.ln();
            if let Some(sn) = sn {
                ratio *= sn / sd;
                log_ratio += (sn / sd).ln();
            }
        }
        let (log_numerator, probability) = if self.pin.is_some() {
            if !state.has_numerator() {
                return invalid("the pinned site was never visited");
            }
            (log_den + log_ratio, ratio.min(1.0))
        } else {
            (log_den, 1.0)
        };
        Ok(TransferResult {
            log_numerator,
            log_denominator: log_den,
            probability,
            n_columns,
            height,
            mode: if sparse { TransferMode::Sparse } else { TransferMode::Dense },
            peak_states: state.peak(),
        })
    }

    fn step(&self, c: i64, r: i64, dir: i64, first: bool, last: bool) -> Result<Step> {
        let phi = self.phi;
        let k = phi.alphabet_size();
        let here = (self.interior)(c, r);
        let allowed: Vec<Symbol> = if here {
            (0..k as Symbol).collect()
        } else {
            match (self.exterior)(c, r) {
                Some(v) => vec![v],
                None => return invalid(format!("site ({c},{r}) is neither interior nor clamped")),
            }
        };
        let prev_interior = !first && (self.interior)(c - dir, r);
        let below_interior = r > self.rows.0 && (self.interior)(c, r - 1);
        let prev_fixed = if first { Some((self.exterior)(c - dir, r)) } else { None };
        let below_fixed = if r == self.rows.0 { Some((self.exterior)(c, r - 1)) } else { None };
        let above = if r == self.rows.1 && here { (self.exterior)(c, r + 1) } else { None };
        let next = if last && here { (self.exterior)(c + dir, r) } else { None };

        let mut logs = vec![f64::NEG_INFINITY; k * k * k];
        for a in 0..k as Symbol {
            let prev = match prev_fixed {
                Some(p) => p,
                None => Some(a),
            };
            for b in 0..k as Symbol {
                let below = match below_fixed {
                    Some(p) => p,
                    None => Some(b),
                };
                for &v in &allowed {
                    let mut lw = if here { -phi.site_energy(v) } else { 0.0 };
                    if here || prev_interior {
                        if let Some(p) = prev {
                            lw += if dir > 0 {
                                phi.bond_log_weight(0, p, v)
                            } else {
                                phi.bond_log_weight(0, v, p)
                            };
                        }
                    }
                    if here || below_interior {
                        if let Some(q) = below {
                            lw += phi.bond_log_weight(1, q, v);
                        }
                    }
                    if let Some(u) = above {
                        lw += phi.bond_log_weight(1, v, u);
                    }
                    if let Some(nx) = next {
                        lw += if dir > 0 {
                            phi.bond_log_weight(0, v, nx)
                        } else {
                            phi.bond_log_weight(0, nx, v)
                        };
                    }
                    logs[(a as usize * k + b as usize) * k + v as usize] = lw;
                }
            }
        }
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_scale = if max.is_finite() { max } else { 0.0 };
        let coeff = logs.iter().map(|&lw| (lw - log_scale).exp()).collect();
        let pin = match self.pin {
            Some((site, target)) if site == (c, r) => Some(target),
            _ => None,
        };
        Ok(Step { pos: (r - self.rows.0) as usize, coeff, allowed, pin, log_scale })
    }
}

trait StateVec {
    fn apply(&mut self, step: &Step);
    /// Scales both vectors to unit sum and returns the previous sums.
    fn renormalize(&mut self) -> (f64, Option<f64>);
    fn has_numerator(&self) -> bool;
    fn peak(&self) -> usize;
}

struct DenseState {
    k: usize,
    den: Vec<f64>,
    num: Option<Vec<f64>>,
    scratch: Vec<f64>,
}

impl DenseState {
    fn new(k: usize, height: usize) -> Self {
        let size = k.pow(height as u32);
        let mut den = vec![0.0; size];
        den[0] = 1.0;
        DenseState { k, den, num: None, scratch: vec![0.0; size] }
    }

    fn transform(k: usize, pos: usize, coeff: &[f64], allowed: &[Symbol], src: &[f64], dst: &mut [f64]) {
        let s = k.pow(pos as u32);
        let block = if pos == 0 { 1 } else { s / k };
        let outer = src.len() / (s * k);
        dst.iter_mut().for_each(|x| *x = 0.0);
        for hi in 0..outer {
            let base = hi * s * k;
            for b in 0..(s / block) {
                let b_sym = if pos == 0 { 0 } else { b };
                for &v in allowed {
                    let v = v as usize;
                    let out = &mut dst[base + v * s + b * block..base + v * s + (b + 1) * block];
                    for a in 0..k {
                        let w = coeff[(a * k + b_sym) * k + v];
                        if w == 0.0 {
                            continue;
                        }
                        let inp = &src[base + a * s + b * block..base + a * s + (b + 1) * block];
                        for (o, i) in out.iter_mut().zip(inp) {
                            *o += w * i;
                        }
                    }
                }
            }
        }
    }
}

fn mask_digit(k: usize, pos: usize, keep: usize, vec: &mut [f64]) {
    let s = k.pow(pos as u32);
    for (i, x) in vec.iter_mut().enumerate() {
        if (i / s) % k != keep {
            *x = 0.0;
        }
    }
}

impl StateVec for DenseState {
    fn apply(&mut self, step: &Step) {
        let k = self.k;
        Self::transform(k, step.pos, &step.coeff, &step.allowed, &self.den, &mut self.scratch);
        std::mem::swap(&mut self.den, &mut self.scratch);
        if let Some(num) = self.num.as_mut() {
            Self::transform(k, step.pos, &step.coeff, &step.allowed, num, &mut self.scratch);
            std::mem::swap(num, &mut self.scratch);
        } else if let Some(t) = step.pin {
            let mut num = self.den.clone();
            mask_digit(k, step.pos, t as usize, &mut num);
            self.num = Some(num);
        }
    }

    fn renormalize(&mut self) -> (f64, Option<f64>) {
        let sd: f64 = self.den.iter().sum();
        if sd > 0.0 {
            self.den.iter_mut().for_each(|x| *x /= sd);
        }
        let sn = self.num.as_mut().map(|num| {
            let s: f64 = num.iter().sum();
            if s > 0.0 {
                num.iter_mut().for_each(|x| *x /= s);
            }
            s
        });
        (sd, sn)
    }

    fn has_numerator(&self) -> bool {
        self.num.is_some()
    }

    fn peak(&self) -> usize {
        self.den.len()
    }
}

struct SparseState {
    k: usize,
    idx: Vec<u64>,
    den: Vec<f64>,
    num: Option<Vec<f64>>,
    peak: usize,
}

impl SparseState {
    fn new(k: usize) -> Self {
        SparseState { k, idx: vec![0], den: vec![1.0], num: None, peak: 1 }
    }
}

/// Merges sorted runs of `(key, den, num)` with pairwise-distinct keys
/// across runs into one sorted run.
fn merge_disjoint(runs: Vec<(Vec<u64>, Vec<f64>, Vec<f64>)>) -> (Vec<u64>, Vec<f64>, Vec<f64>) {
    let total: usize = runs.iter().map(|r| r.0.len()).sum();
    let mut idx = Vec::with_capacity(total);
    let mut den = Vec::with_capacity(total);
    let mut num = Vec::with_capacity(total);
    let mut cursor = vec![0usize; runs.len()];
    loop {
        let mut best: Option<usize> = None;
        for (i, run) in runs.iter().enumerate() {
            if cursor[i] < run.0.len() {
                match best {
                    Some(j) if runs[j].0[cursor[j]] <= run.0[cursor[i]] => {}
                    _ => best = Some(i),
                }
            }
        }
        let Some(i) = best else { break };
        idx.push(runs[i].0[cursor[i]]);
        den.push(runs[i].1[cursor[i]]);
        num.push(runs[i].2[cursor[i]]);
        cursor[i] += 1;
    }
    (idx, den, num)
}

impl StateVec for SparseState {
    fn apply(&mut self, step: &Step) {
        let k = self.k as u64;
        let s = k.pow(step.pos as u32);
        let below_div = if step.pos == 0 { 0 } else { s / k };
        let carry_num = self.num.is_some();
        // split by the digit being replaced; each group stays sorted by key
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.k];
        for (i, &ix) in self.idx.iter().enumerate() {
            groups[((ix / s) % k) as usize].push(i);
        }
        let mut cursor = vec![0usize; self.k];
        let key_of = |i: usize, a: usize| self.idx[i] - a as u64 * s;
        let mut outs: Vec<(Vec<u64>, Vec<f64>, Vec<f64>)> =
            (0..self.k).map(|_| (Vec::new(), Vec::new(), Vec::new())).collect();
        let mut in_den = vec![0.0; self.k];
        let mut in_num = vec![0.0; self.k];
        loop {
            let mut key: Option<u64> = None;
            for a in 0..self.k {
                if cursor[a] < groups[a].len() {
                    let kk = key_of(groups[a][cursor[a]], a);
                    if key.map_or(true, |m| kk.cmp(&m) == Ordering::Less) {
                        key = Some(kk);
                    }
                }
            }
            let Some(key) = key else { break };
            for a in 0..self.k {
                in_den[a] = 0.0;
                in_num[a] = 0.0;
                if cursor[a] < groups[a].len() {
                    let i = groups[a][cursor[a]];
                    if key_of(i, a) == key {
                        in_den[a] = self.den[i];
                        if let Some(num) = &self.num {
                            in_num[a] = num[i];
                        }
                        cursor[a] += 1;
                    }
                }
            }
            let b = if step.pos == 0 { 0 } else { ((key / below_div) % k) as usize };
            for &v in &step.allowed {
                let v = v as usize;
                let mut d = 0.0;
                let mut n = 0.0;
                for a in 0..self.k {
                    let w = step.coeff[(a * self.k + b) * self.k + v];
                    d += w * in_den[a];
                    n += w * in_num[a];
                }
                if d != 0.0 {
                    let o = &mut outs[v];
                    o.0.push(key + v as u64 * s);
                    o.1.push(d);
                    o.2.push(match step.pin {
                        Some(t) if !carry_num => {
                            if t as usize == v {
                                d
                            } else {
                                0.0
                            }
                        }
                        _ => n,
                    });
                }
            }
        }
        let (idx, den, num) = merge_disjoint(outs);
        self.idx = idx;
        self.den = den;
        if carry_num || step.pin.is_some() {
            self.num = Some(num);
        }
        self.peak = self.peak.max(self.idx.len());
    }

    fn renormalize(&mut self) -> (f64, Option<f64>) {
        let sd: f64 = self.den.iter().sum();
        if sd > 0.0 {
            self.den.iter_mut().for_each(|x| *x /= sd);
        }
        let sn = self.num.as_mut().map(|num| {
            let s: f64 = num.iter().sum();
            if s > 0.0 {
                num.iter_mut().for_each(|x| *x /= s);
            }
            s
        });
        (sd, sn)
    }

    fn has_numerator(&self) -> bool {
        self.num.is_some()
    }

    fn peak(&self) -> usize {
        self.peak
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::{origin_probability_oracle, OriginQuery};
    use crate::interaction::partition_function;
    use crate::lattice::Window;
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

    fn skewed(q: usize) -> NNInteraction {
        let cs = ConstraintSystem::new(labels(q), vec![vec![(0, 1)], vec![(1, 2)]]).unwrap();
        NNInteraction::from_fn(
            cs,
            |a| 0.3 * a as f64 - 0.1,
            |axis, a, b| 0.17 * (axis as f64 + 1.0) * a as f64 - 0.41 * b as f64 + 0.05 * (a * b) as f64,
        )
        .unwrap()
    }

    fn checker(odd: bool) -> PeriodicPoint {
        PeriodicPoint::from_fn(vec![2, 2], |c| (((c[0] + c[1]) % 2 == 0) == odd) as Symbol).unwrap()
    }

    fn all_opts() -> Vec<TransferOptions> {
        let mut v = Vec::new();
        for direction in [SweepDirection::LeftToRight, SweepDirection::RightToLeft] {
            for mode in [TransferMode::Dense, TransferMode::Sparse] {
                v.push(TransferOptions { direction, mode, ..Default::default() });
            }
        }
        v
    }

    fn oracle(y: [i64; 2], z: [i64; 2], point: &PeriodicPoint, phi: &NNInteraction) -> f64 {
        let q = OriginQuery::from_point(Window::half_box(&y, &z).unwrap(), point).unwrap();
        origin_probability_oracle(&q, phi).unwrap()
    }

    #[test]
    fn even_checkerboard_is_forced() {
        for gamma in [0.3, 1.0, 50.0] {
            let r = conditional_origin_probability([3, 3], [3, 3], &checker(false), &hard_core(gamma), &Default::default())
                .unwrap();
            assert_eq!(r.probability, 1.0);
            assert_eq!(r.neg_log_probability(), 0.0);
        }
    }

    #[test]
    fn potts_without_coupling_is_uniform() {
        for q in [2usize, 3] {
            let p = PeriodicPoint::constant(2, (q - 1) as Symbol);
            for (y, z) in [([0, 0], [0, 0]), ([1, 2], [2, 1]), ([2, 2], [2, 2])] {
                let r = conditional_origin_probability(y, z, &p, &potts(q, 0.0), &Default::default()).unwrap();
                assert!((r.probability - 1.0 / q as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn matches_enumeration_on_small_half_boxes() {
        let cases: Vec<(NNInteraction, Vec<PeriodicPoint>)> = vec![
            (hard_core(1.0), vec![checker(true), checker(false)]),
            (hard_core(3.3), vec![checker(true)]),
            (potts(2, 0.7), vec![PeriodicPoint::constant(2, 1)]),
            (potts(3, 0.4), vec![PeriodicPoint::constant(2, 2), PeriodicPoint::constant(2, 0)]),
            (skewed(3), vec![PeriodicPoint::constant(2, 0), PeriodicPoint::constant(2, 2)]),
        ];
        for (phi, points) in &cases {
            for p in points {
                for y in [[0, 0], [1, 2], [2, 1]] {
                    for z in [[0, 1], [2, 2], [1, 0]] {
                        let expect = oracle(y, z, p, phi);
                        for opts in all_opts() {
                            let r = conditional_origin_probability(y, z, p, phi, &opts).unwrap();
                            assert!(
                                (r.probability - expect).abs() < 1e-12,
                                "y={y:?} z={z:?} {opts:?}: {} vs {expect}",
                                r.probability
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn free_partition_matches_enumeration() {
        for phi in [hard_core(1.0), potts(3, 0.45), skewed(3)] {
            for (lo, hi) in [([0, 0], [2, 1]), ([-1, -1], [1, 1]), ([0, 0], [0, 3])] {
                let w = Window::rectangle(&lo, &hi).unwrap();
                let z = partition_function(&w, &phi, None).unwrap();
                for opts in all_opts() {
                    let t = free_log_partition(&phi, lo, hi, &opts).unwrap();
                    assert!((t - z).abs() < 1e-11, "{lo:?} {hi:?}: {t} vs {z}");
                }
            }
        }
        let t = free_log_partition(&hard_core(1.0), [-1, -1], [1, 1], &Default::default()).unwrap();
        assert!((t - 63f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn directions_agree_on_larger_windows() {
        let phi = hard_core(1.0);
        let a = conditional_origin_probability([4, 4], [4, 4], &checker(true), &phi, &TransferOptions {
            direction: SweepDirection::LeftToRight,
            ..Default::default()
        })
        .unwrap();
        let b = conditional_origin_probability([4, 4], [4, 4], &checker(true), &phi, &Default::default()).unwrap();
        assert!((a.probability - b.probability).abs() < 1e-12);
    }

    #[test]
    fn potts_decreases_with_volume_and_increases_with_coupling() {
        let p = PeriodicPoint::constant(2, 1);
        let opts = TransferOptions::default();
        let series = pi_n_series(&p, &potts(2, 0.4), &[1, 2, 3, 4, 5, 6], &opts).unwrap();
        for w in series.results.windows(2) {
            assert!(w[1].probability < w[0].probability);
        }
        for n in 1..=4i64 {
            let mut prev = 0.0;
            for beta in [0.1, 0.5, 0.9, 1.3] {
                let r = conditional_origin_probability([n, n], [n, n], &p, &potts(2, beta), &opts).unwrap();
                assert!(r.probability >= prev);
                prev = r.probability;
            }
        }
    }

    #[test]
    fn independent_sites_give_constant_series() {
        let cs = ConstraintSystem::unconstrained(labels(2), 2).unwrap();
        let phi = NNInteraction::from_fn(cs, |a| if a == 1 { -2f64.ln() } else { 0.0 }, |_, _, _| 0.0).unwrap();
        let p = PeriodicPoint::constant(2, 1);
        let s = pi_n_series(&p, &phi, &[1, 2, 3, 4], &Default::default()).unwrap();
        for r in &s.results {
            assert!((r.probability - 2.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let opts = TransferOptions { state_cap: 1000.0, mode: TransferMode::Dense, ..Default::default() };
        let r = conditional_origin_probability([5, 5], [5, 5], &PeriodicPoint::constant(2, 0), &potts(2, 0.3), &opts);
        assert!(matches!(r, Err(Error::TooLarge { .. })));
    }

    #[test]
    fn sparse_auto_selection() {
        let r = conditional_origin_probability([8, 8], [8, 8], &checker(true), &hard_core(1.0), &Default::default())
            .unwrap();
        assert_eq!(r.mode, TransferMode::Sparse);
        let r = conditional_origin_probability([2, 2], [2, 2], &PeriodicPoint::constant(2, 0), &potts(2, 0.3), &Default::default())
            .unwrap();
        assert_eq!(r.mode, TransferMode::Dense);
    }

    #[test]
    fn huge_energies_do_not_overflow() {
        let p = PeriodicPoint::constant(2, 1);
        let r = conditional_origin_probability([3, 3], [3, 3], &p, &potts(2, 400.0), &Default::default()).unwrap();
        assert!(r.log_denominator.is_finite() && r.log_numerator.is_finite());
        assert!(r.probability > 0.999);
    }

    #[test]
    fn feasible_column_counts() {
        // hard-core columns are Fibonacci numbers
        let phi = hard_core(1.0);
        let fib = [1.0, 2.0, 3.0, 5.0, 8.0, 13.0, 21.0];
        for (len, &f) in fib.iter().enumerate() {
            assert_eq!(feasible_column_count(&phi, len), f);
        }
    }
}
