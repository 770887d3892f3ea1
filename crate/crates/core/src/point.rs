//! Periodic points of `A^{Z^d}` and their orbits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{Site, Window};
use crate::sft::{Configuration, ConstraintSystem, Symbol};

/// A configuration on `Z^d` with period `periods[i]` along axis `i`,
/// stored as the values on the fundamental cell `[0, p_1) x ... x [0, p_d)`
/// in lexicographic order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicPoint {
    periods: Vec<i64>,
    cell: Vec<Symbol>,
}

impl PeriodicPoint {
    pub fn new(periods: Vec<i64>, cell: Vec<Symbol>) -> Result<Self> {
        if periods.is_empty() || periods.iter().any(|&p| p < 1) {
            return invalid("periods must be positive and at least one axis is required");
        }
        let size: i64 = periods.iter().product();
        if cell.len() as i64 != size {
            return invalid(format!("cell has {} values, expected {size}", cell.len()));
        }
        Ok(PeriodicPoint { periods, cell })
    }

    /// The constant point `a^{Z^d}`.
    pub fn constant(dim: usize, a: Symbol) -> Self {
        PeriodicPoint { periods: vec![1; dim], cell: vec![a] }
    }

    /// Builds the point with the given periods from a function on the cell.
    pub fn from_fn(periods: Vec<i64>, f: impl Fn(&[i64]) -> Symbol) -> Result<Self> {
        let size: i64 = periods.iter().product();
        if periods.is_empty() || periods.iter().any(|&p| p < 1) {
            return invalid("periods must be positive and at least one axis is required");
        }
        let mut cell = Vec::with_capacity(size as usize);
        let mut coords = vec![0i64; periods.len()];
        for _ in 0..size {
            cell.push(f(&coords));
            for k in (0..periods.len()).rev() {
                coords[k] += 1;
                if coords[k] < periods[k] {
                    break;
                }
                coords[k] = 0;
            }
        }
        Ok(PeriodicPoint { periods, cell })
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[i64] {
        &self.periods
    }

    pub fn cell(&self) -> &[Symbol] {
        &self.cell
    }

    #[inline]
    pub fn value_at(&self, x: &Site) -> Symbol {
        self.value_at_coords(x.coords())
    }

    #[inline]
    pub fn value_at_coords(&self, x: &[i64]) -> Symbol {
        let mut idx = 0usize;
        for (c, p) in x.iter().zip(&self.periods) {
            idx = idx * *p as usize + c.rem_euclid(*p) as usize;
        }
        self.cell[idx]
    }

    /// The shifted point `σ_x(ω)`, with `σ_x(ω)(y) = ω(y + x)`.
    pub fn translate(&self, x: &Site) -> PeriodicPoint {
        let shift = x.coords().to_vec();
        PeriodicPoint::from_fn(self.periods.clone(), |c| {
            let moved: Vec<i64> = c.iter().zip(&shift).map(|(a, b)| a + b).collect();
            self.value_at_coords(&moved)
        })
        .expect("periods already validated")
    }

    /// Whether the two points agree everywhere on `Z^d`.
    pub fn same_point(&self, other: &PeriodicPoint) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let common: Vec<i64> = self
            .periods
            .iter()
            .zip(&other.periods)
            .map(|(&a, &b)| a / gcd(a, b) * b)
            .collect();
        let mut coords = vec![0i64; self.dim()];
        loop {
            if self.value_at_coords(&coords) != other.value_at_coords(&coords) {
                return false;
            }
            let mut k = self.dim();
            loop {
                if k == 0 {
                    return true;
                }
                k -= 1;
                coords[k] += 1;
                if coords[k] < common[k] {
                    break;
                }
                coords[k] = 0;
            }
        }
    }

    /// Distinct translates of the point, starting with the point itself and
    /// continuing in lexicographic order of the shift over the cell.
    pub fn orbit(&self) -> Vec<PeriodicPoint> {
        let mut out: Vec<PeriodicPoint> = Vec::new();
        let cell = Window::rectangle(
            &vec![0; self.dim()],
            &self.periods.iter().map(|p| p - 1).collect::<Vec<_>>(),
        )
        .expect("periods are positive");
        for shift in cell.sites() {
            let t = self.translate(shift);
            if !out.iter().any(|o| o.same_point(&t)) {
                out.push(t);
            }
        }
        out
    }

    /// Feasibility including the wrap-around adjacencies of the cell.
    pub fn is_feasible(&self, cs: &ConstraintSystem) -> bool {
        if cs.dim() != self.dim() || self.cell.iter().any(|&a| a as usize >= cs.alphabet_size()) {
            return false;
        }
        let cell = Window::rectangle(
            &vec![0; self.dim()],
            &self.periods.iter().map(|p| p - 1).collect::<Vec<_>>(),
        )
        .expect("periods are positive");
        cell.sites().iter().all(|s| {
            let a = self.value_at(s);
            (0..self.dim()).all(|axis| !cs.is_forbidden(axis, a, self.value_at(&s.step(axis, 1))))
        })
    }

    /// The configuration `ω` restricted to `sites`.
    pub fn restrict(&self, w: &Window) -> Configuration {
        Configuration::from_fn(w.clone(), |s| self.value_at(s))
    }

    /// The configuration `ω` restricted to an arbitrary list of sites.
    pub fn restrict_sites(&self, sites: &[Site]) -> Result<Configuration> {
        Configuration::from_pairs(sites.iter().map(|s| (s.clone(), self.value_at(s))))
    }
}

impl PartialEq for PeriodicPoint {
    fn eq(&self, other: &Self) -> bool {
        self.same_point(other)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
