//! Nearest-neighbour shifts of finite type.
//!
//! A [`ConstraintSystem`] is an alphabet plus, for every axis `i`, a set of
//! forbidden ordered pairs: `(a, b)` is forbidden on axis `i` when `a` may
//! not sit at `x` while `b` sits at `x + e_i`.
//!
//! # Text format
//!
//! ```text
//! # hard-core constraints
//! alphabet: 0 1
//! axis 1: 1,1
//! axis 2: 1,1
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. The `alphabet:` line
//! comes first and lists whitespace-separated labels (no `,`, `:` or `#`).
//! It is followed by one `axis <i>:` line per dimension, `i = 1..d` in order,
//! each listing the forbidden pairs as `a,b` tokens.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{Site, Window};

/// Index of a symbol in its alphabet.
pub type Symbol = u8;

/// Alphabet together with per-axis forbidden adjacent pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    alphabet: Vec<String>,
    /// `forbidden[axis][a * |A| + b]`.
    forbidden: Vec<Vec<bool>>,
}

/// Outcome of the square-block D-condition check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DConditionCertificate {
    /// Padding by any of these symbols certifies the condition.
    SafeSymbol(Vec<Symbol>),
    Unknown,
}

impl ConstraintSystem {
    /// Builds a constraint system and checks that the induced shift is
    /// nonempty (a feasible point of period at most 2 along each axis exists).
    pub fn new(alphabet: Vec<String>, forbidden_pairs: Vec<Vec<(Symbol, Symbol)>>) -> Result<Self> {
        let cs = Self::new_unchecked(alphabet, forbidden_pairs)?;
        if cs.periodic_witness().is_none() {
            return invalid("the constraints admit no feasible point of period <= 2 per axis");
        }
        Ok(cs)
    }

    /// Like [`ConstraintSystem::new`] but without the nonemptiness search.
    pub fn new_unchecked(
        alphabet: Vec<String>,
        forbidden_pairs: Vec<Vec<(Symbol, Symbol)>>,
    ) -> Result<Self> {
        if alphabet.is_empty() || alphabet.len() > Symbol::MAX as usize {
            return invalid("alphabet size must be between 1 and 255");
        }
        if forbidden_pairs.is_empty() {
            return invalid("at least one axis is required");
        }
        let mut seen = HashMap::new();
        for (i, label) in alphabet.iter().enumerate() {
            if label.is_empty() || label.contains(|c: char| c.is_whitespace() || ",:#".contains(c)) {
                return invalid(format!("bad symbol label {label:?}"));
            }
            if seen.insert(label.clone(), i).is_some() {
                return invalid(format!("duplicate symbol label {label:?}"));
            }
        }
        let k = alphabet.len();
        let mut forbidden = Vec::with_capacity(forbidden_pairs.len());
        for pairs in &forbidden_pairs {
            let mut table = vec![false; k * k];
            for &(a, b) in pairs {
                if a as usize >= k || b as usize >= k {
                    return invalid(format!("forbidden pair ({a},{b}) references a foreign symbol"));
                }
                table[a as usize * k + b as usize] = true;
            }
            forbidden.push(table);
        }
        Ok(ConstraintSystem { alphabet, forbidden })
    }

    /// Constraint system with no forbidden pairs.
    pub fn unconstrained(alphabet: Vec<String>, dim: usize) -> Result<Self> {
        Self::new(alphabet, vec![Vec::new(); dim])
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn dim(&self) -> usize {
        self.forbidden.len()
    }

    pub fn symbol(&self, label: &str) -> Option<Symbol> {
        self.alphabet.iter().position(|l| l == label).map(|i| i as Symbol)
    }

    pub fn label(&self, s: Symbol) -> &str {
        &self.alphabet[s as usize]
    }

    /// Whether `(a, b)` is forbidden on `axis` (0-based).
    #[inline]
    pub fn is_forbidden(&self, axis: usize, a: Symbol, b: Symbol) -> bool {
        self.forbidden[axis][a as usize * self.alphabet.len() + b as usize]
    }

    pub fn forbidden_pairs(&self, axis: usize) -> Vec<(Symbol, Symbol)> {
        let k = self.alphabet.len();
        (0..k * k)
            .filter(|&i| self.forbidden[axis][i])
            .map(|i| ((i / k) as Symbol, (i % k) as Symbol))
            .collect()
    }

    pub fn check_symbol(&self, s: Symbol) -> Result<()> {
        if (s as usize) < self.alphabet.len() {
            Ok(())
        } else {
            invalid(format!("symbol index {s} is not in an alphabet of size {}", self.alphabet.len()))
        }
    }

    /// Symbols compatible with every symbol, in both orders, along every
    /// axis.
    pub fn safe_symbols(&self) -> Vec<Symbol> {
        let k = self.alphabet.len();
        (0..k as Symbol)
            .filter(|&a| {
                (0..self.dim()).all(|axis| {
                    (0..k as Symbol).all(|b| {
                        !self.is_forbidden(axis, a, b) && !self.is_forbidden(axis, b, a)
                    })
                })
            })
            .collect()
    }

    pub fn d_condition_certificate(&self) -> DConditionCertificate {
        let safe = self.safe_symbols();
        if safe.is_empty() {
            DConditionCertificate::Unknown
        } else {
            DConditionCertificate::SafeSymbol(safe)
        }
    }

    /// Searches for a feasible periodic point with period 1 or 2 along every
    /// axis. Returns `(periods, cell)` with the cell in lexicographic order.
    pub fn periodic_witness(&self) -> Option<(Vec<i64>, Vec<Symbol>)> {
        let d = self.dim();
        let k = self.alphabet.len();
        for mask in 0..(1usize << d) {
            let periods: Vec<i64> = (0..d).map(|i| if mask >> i & 1 == 1 { 2 } else { 1 }).collect();
            let cells: usize = periods.iter().map(|&p| p as usize).product();
            let total = k.checked_pow(cells as u32)?;
            for code in 0..total {
                let mut cell = vec![0 as Symbol; cells];
                let mut rest = code;
                for slot in cell.iter_mut().rev() {
                    *slot = (rest % k) as Symbol;
                    rest /= k;
                }
                if periodic_cell_feasible(self, &periods, &cell) {
                    return Some((periods, cell));
                }
            }
        }
        None
    }

    pub fn sft_nonempty(&self) -> bool {
        self.periodic_witness().is_some()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alphabet: {}", self.alphabet.join(" "));
        for axis in 0..self.dim() {
            let pairs: Vec<String> = self
                .forbidden_pairs(axis)
                .into_iter()
                .map(|(a, b)| format!("{},{}", self.label(a), self.label(b)))
                .collect();
            if pairs.is_empty() {
                let _ = writeln!(out, "axis {}:", axis + 1);
            } else {
                let _ = writeln!(out, "axis {}: {}", axis + 1, pairs.join(" "));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { line, message };
        let mut alphabet: Option<Vec<String>> = None;
        let mut axes: Vec<Vec<(String, String)>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((head, rest)) = line.split_once(':') else {
                return Err(perr(line_no, "expected `<key>: ...`".into()));
            };
            let head = head.trim();
            if head == "alphabet" {
                if alphabet.is_some() {
                    return Err(perr(line_no, "duplicate alphabet line".into()));
                }
                alphabet = Some(rest.split_whitespace().map(str::to_owned).collect());
                continue;
            }
            if alphabet.is_none() {
                return Err(perr(line_no, "the alphabet line must come first".into()));
            }
            let Some(idx) = head.strip_prefix("axis").map(str::trim) else {
                return Err(perr(line_no, format!("unknown key {head:?}")));
            };
            let idx: usize = idx
                .parse()
                .map_err(|_| perr(line_no, format!("bad axis index {idx:?}")))?;
            if idx != axes.len() + 1 {
                return Err(perr(line_no, format!("expected axis {}, found axis {idx}", axes.len() + 1)));
            }
            let mut pairs = Vec::new();
            for tok in rest.split_whitespace() {
                let Some((a, b)) = tok.split_once(',') else {
                    return Err(perr(line_no, format!("bad pair {tok:?}")));
                };
                pairs.push((a.to_owned(), b.to_owned()));
            }
            axes.push(pairs);
        }
        let alphabet = alphabet.ok_or_else(|| perr(0, "missing alphabet line".into()))?;
        if axes.is_empty() {
            return Err(perr(0, "no axis lines".into()));
        }
        let lookup: HashMap<&str, Symbol> = alphabet
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as Symbol))
            .collect();
        let mut pairs = Vec::with_capacity(axes.len());
        for axis in &axes {
            let mut v = Vec::with_capacity(axis.len());
            for (a, b) in axis {
                let sa = *lookup.get(a.as_str()).ok_or_else(|| perr(0, format!("unknown symbol {a:?}")))?;
                let sb = *lookup.get(b.as_str()).ok_or_else(|| perr(0, format!("unknown symbol {b:?}")))?;
                v.push((sa, sb));
            }
            pairs.push(v);
        }
        ConstraintSystem::new(alphabet, pairs)
    }
}

fn periodic_cell_feasible(cs: &ConstraintSystem, periods: &[i64], cell: &[Symbol]) -> bool {
    let d = periods.len();
    let at = |coords: &[i64]| -> Symbol {
        let mut idx = 0usize;
        for (c, p) in coords.iter().zip(periods) {
            idx = idx * *p as usize + c.rem_euclid(*p) as usize;
        }
        cell[idx]
    };
    let mut coords = vec![0i64; d];
    loop {
        let here = at(&coords);
        for axis in 0..d {
            let mut next = coords.clone();
            next[axis] += 1;
            if cs.is_forbidden(axis, here, at(&next)) {
                return false;
            }
        }
        // odometer over the fundamental domain
        let mut k = d;
        loop {
            if k == 0 {
                return true;
            }
            k -= 1;
            coords[k] += 1;
            if coords[k] < periods[k] {
                break;
            }
            coords[k] = 0;
        }
    }
}

/// A map from the sites of a window to symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    window: Window,
    values: Vec<Symbol>,
}

impl Configuration {
    /// `values` follow the window's site order.
    pub fn new(window: Window, values: Vec<Symbol>) -> Result<Self> {
        if values.len() != window.len() {
            return invalid(format!(
                "configuration has {} values for {} sites",
                values.len(),
                window.len()
            ));
        }
        Ok(Configuration { window, values })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Site, Symbol)>) -> Result<Self> {
        let mut pairs: Vec<(Site, Symbol)> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return invalid("a configuration assigns exactly one symbol per site");
        }
        let window = Window::explicit(pairs.iter().map(|p| p.0.clone()))?;
        let values = pairs.into_iter().map(|p| p.1).collect();
        Ok(Configuration { window, values })
    }

    pub fn uniform(window: Window, symbol: Symbol) -> Self {
        let values = vec![symbol; window.len()];
        Configuration { window, values }
    }

    /// Configuration on `sites` read off from `f`.
    pub fn from_fn(window: Window, f: impl Fn(&Site) -> Symbol) -> Self {
        let values = window.sites().iter().map(f).collect();
        Configuration { window, values }
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &[Symbol] {
        &self.values
    }

    pub fn get(&self, site: &Site) -> Option<Symbol> {
        self.window.index_of(site).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Site, Symbol)> + '_ {
        self.window.sites().iter().zip(self.values.iter().copied())
    }

    /// Restriction to the sites of `sub` (which must be contained in the
    /// shape).
    pub fn restrict(&self, sub: &Window) -> Result<Configuration> {
        let mut values = Vec::with_capacity(sub.len());
        for s in sub.sites() {
            match self.get(s) {
                Some(v) => values.push(v),
                None => return invalid(format!("site {s} is outside the configuration's shape")),
            }
        }
        Configuration::new(sub.clone(), values)
    }

    /// The shifted configuration `sigma_x(theta)` on `shape - x`.
    pub fn translate(&self, by: &Site) -> Configuration {
        Configuration { window: self.window.translate(by), values: self.values.clone() }
    }
}

/// True iff no axis-`i` adjacent pair inside the shape realizes a pair of
/// `E_i`.
pub fn is_feasible(c: &Configuration, cs: &ConstraintSystem) -> Result<bool> {
    if c.window.dim() != cs.dim() {
        return invalid("configuration and constraint system differ in dimension");
    }
    for &v in &c.values {
        cs.check_symbol(v)?;
    }
    for (site, a) in c.iter() {
        for axis in 0..cs.dim() {
            if let Some(b) = c.get(&site.step(axis, 1)) {
                if cs.is_forbidden(axis, a, b) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Site;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn hard_core() -> ConstraintSystem {
        ConstraintSystem::new(labels(&["0", "1"]), vec![vec![(1, 1)]; 2]).unwrap()
    }

    fn wr(q: u8) -> ConstraintSystem {
        let alphabet: Vec<String> = (0..=q).map(|i| i.to_string()).collect();
        let mut pairs = Vec::new();
        for a in 1..=q {
            for b in 1..=q {
                if a != b {
                    pairs.push((a, b));
                }
            }
        }
        ConstraintSystem::new(alphabet, vec![pairs.clone(), pairs]).unwrap()
    }

    fn row(values: &[Symbol]) -> Configuration {
        Configuration::from_pairs(
            values.iter().enumerate().map(|(i, &v)| (Site::from([i as i64, 0]), v)),
        )
        .unwrap()
    }

    #[test]
    fn feasibility_examples() {
        assert!(!is_feasible(&row(&[1, 1]), &hard_core()).unwrap());
        let single = Configuration::from_pairs([(Site::from([0, 0]), 1)]).unwrap();
        assert!(is_feasible(&single, &hard_core()).unwrap());
        assert!(is_feasible(&row(&[1, 0, 2]), &wr(2)).unwrap());
        assert!(!is_feasible(&row(&[1, 2]), &wr(2)).unwrap());
        assert!(is_feasible(&row(&[0, 3]), &hard_core()).is_err());
    }

    #[test]
    fn safe_symbol_examples() {
        let potts = ConstraintSystem::unconstrained(labels(&["1", "2", "3"]), 2).unwrap();
        assert_eq!(potts.safe_symbols(), vec![0, 1, 2]);
        assert_eq!(hard_core().safe_symbols(), vec![0]);
        assert_eq!(wr(3).safe_symbols(), vec![0]);
        assert_eq!(hard_core().d_condition_certificate(), DConditionCertificate::SafeSymbol(vec![0]));
        assert_eq!(wr(2).d_condition_certificate(), DConditionCertificate::SafeSymbol(vec![0]));

        let empty = ConstraintSystem::new_unchecked(labels(&["a"]), vec![vec![(0, 0)]; 2]).unwrap();
        assert!(empty.safe_symbols().is_empty());
        assert!(!empty.sft_nonempty());
        assert!(ConstraintSystem::new(labels(&["a"]), vec![vec![(0, 0)]; 2]).is_err());
    }

    #[test]
    fn checkerboard_has_no_safe_symbol() {
        // b is the only symbol allowed next to a, and b next to b is
        // forbidden too, so no symbol is compatible with everything.
        let cs = ConstraintSystem::new(
            labels(&["a", "b"]),
            vec![vec![(0, 0), (1, 1)], vec![(0, 0), (1, 1)]],
        )
        .unwrap();
        assert_eq!(cs.d_condition_certificate(), DConditionCertificate::Unknown);
        let (periods, _) = cs.periodic_witness().unwrap();
        assert_eq!(periods, vec![2, 2]);
    }

    #[test]
    fn text_round_trip() {
        for cs in [hard_core(), wr(2), wr(3)] {
            let text = cs.to_text();
            assert_eq!(ConstraintSystem::from_text(&text).unwrap(), cs);
        }
        let parsed = ConstraintSystem::from_text("# hc\nalphabet: 0 1\n\naxis 1: 1,1\naxis 2: 1,1\n").unwrap();
        assert_eq!(parsed, hard_core());
    }

    #[test]
    fn text_errors() {
        assert!(ConstraintSystem::from_text("axis 1: 0,0\n").is_err());
        assert!(ConstraintSystem::from_text("alphabet: a b\naxis 2: a,b\n").is_err());
        assert!(ConstraintSystem::from_text("alphabet: a b\naxis 1: a,c\n").is_err());
        assert!(ConstraintSystem::from_text("alphabet: a b\naxis 1: ab\n").is_err());
    }
}
