//! The Edwards-Sokal coupling of the Potts model and the wired bond
//! random-cluster measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::gibbs_distribution;
use crate::lattice::{Metric, Window};
use crate::models::{potts, potts_bond_p};
use crate::rc::bond::{bond_rc, bond_set, Wiring};
use crate::sft::Configuration;

/// Largest joint outcome space built by [`edwards_sokal_check`].
pub const MAX_JOINT_OUTCOMES: f64 = 16_777_216.0;

/// Deviations between the two constructions of the coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingDeviation {
    /// Spin marginal of the cluster colouring against `π^{ω_q}_Λ`.
    pub site: f64,
    /// Bond marginal of the spin-first construction against `φ^{(1)}`.
    pub bond: f64,
    /// Largest pointwise difference of the two joint laws.
    pub joint: f64,
}

/// Builds the joint law of spins and bonds on `w` twice: once by colouring
/// the clusters of `φ^{(1)}_{p,q,Λ}` (clusters meeting the exterior take the
/// boundary colour, the others a uniform colour), and once by opening each
/// agreeing bond of a `π^{ω_q}_Λ` sample with probability `p = 1 - e^{-β}`.
pub fn edwards_sokal_check(w: &Window, q: usize, beta: f64) -> Result<CouplingDeviation> {
    let model = potts(q, beta)?;
    let p = potts_bond_p(beta);
    let m = w.len();
    let e = bond_set(w, Wiring::Wired).len();
    let size = (q as f64).powi(m as i32) * 2f64.powi(e as i32);
    if size > MAX_JOINT_OUTCOMES {
        return Err(Error::TooLarge {
            required: size,
            cap: MAX_JOINT_OUTCOMES,
            hint: "use a smaller window or fewer colours".into(),
        });
    }
    let (bonds, rc) = bond_rc(w, p, q as f64, Wiring::Wired)?;
    let boundary_colour = q - 1;
    let ring = w.boundary(Metric::OneNorm);
    let boundary = Configuration::from_pairs(ring.into_iter().map(|s| (s, boundary_colour as u8)))?;
    let spins = gibbs_distribution(w, &model.interaction, Some(&boundary))?;

    let ext = m;
    let ends: Vec<(usize, usize)> = bonds
        .iter()
        .map(|b| (w.index_of(&b.lo).unwrap_or(ext), w.index_of(&b.hi()).unwrap_or(ext)))
        .collect();
    let colour = |theta: &[usize], i: usize| if i == ext { boundary_colour } else { theta[i] };

    // bond-first: φ(ω) q^{-(interior clusters)} when θ is constant on clusters
    let mut joint_a = vec![0.0; spins.len() * rc.len()];
    let mut parent: Vec<usize> = Vec::with_capacity(m + 1);
    for wi in 0..rc.len() {
        let pw = rc.probabilities()[wi];
        if pw == 0.0 {
            continue;
        }
        let omega = rc.decode(wi);
        parent.clear();
        parent.extend(0..=m);
        for (k, &(a, b)) in ends.iter().enumerate() {
            if omega[k] == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let roots: Vec<usize> = (0..=m).map(|i| find(&mut parent, i)).collect();
        let interior = (0..m).filter(|&i| roots[i] == i && roots[i] != roots[ext]).count();
        let share = pw / (q as f64).powi(interior as i32);
        for ti in 0..spins.len() {
            let theta = spins.decode(ti);
            let consistent = (0..m).all(|i| {
                let r = roots[i];
                let want = if r == roots[ext] { boundary_colour } else { theta[r] };
                theta[i] == want
            });
            if consistent {
                joint_a[ti * rc.len() + wi] = share;
            }
        }
    }

    // spin-first: π(θ) times independent bonds on agreeing edges
    let mut joint_b = vec![0.0; spins.len() * rc.len()];
    for ti in 0..spins.len() {
        let pt = spins.probabilities()[ti];
        if pt == 0.0 {
            continue;
        }
        let theta = spins.decode(ti);
        let agree: Vec<bool> = ends.iter().map(|&(a, b)| colour(&theta, a) == colour(&theta, b)).collect();
        for wi in 0..rc.len() {
            let omega = rc.decode(wi);
            let mut v = pt;
            for k in 0..e {
                v *= match (agree[k], omega[k]) {
                    (true, 1) => p,
                    (true, _) => 1.0 - p,
                    (false, 1) => 0.0,
                    (false, _) => 1.0,
                };
            }
            joint_b[ti * rc.len() + wi] = v;
        }
    }

    let joint = joint_a
        .iter()
        .zip(&joint_b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let site = (0..spins.len())
        .map(|ti| {
            let row = &joint_a[ti * rc.len()..(ti + 1) * rc.len()];
            (row.iter().sum::<f64>() - spins.probabilities()[ti]).abs()
        })
        .fold(0.0, f64::max);
    let bond = (0..rc.len())
        .map(|wi| {
            let col: f64 = (0..spins.len()).map(|ti| joint_b[ti * rc.len() + wi]).sum();
            (col - rc.probabilities()[wi]).abs()
        })
        .fold(0.0, f64::max);
    Ok(CouplingDeviation { site, bond, joint })
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site() {
        let d = edwards_sokal_check(&Window::block(2, 0).unwrap(), 3, 0.8).unwrap();
        assert!(d.site <= 1e-12 && d.bond <= 1e-12 && d.joint <= 1e-12, "{d:?}");
    }

    #[test]
    fn small_rectangle() {
        let w = Window::rectangle(&[0, 0], &[1, 0]).unwrap();
        for (q, beta) in [(2, 0.4), (3, 1.1)] {
            let d = edwards_sokal_check(&w, q, beta).unwrap();
            assert!(d.site <= 1e-12 && d.bond <= 1e-12 && d.joint <= 1e-12, "{d:?}");
        }
    }

    #[test]
    fn outcome_cap() {
        let w = Window::block(2, 1).unwrap();
        assert!(matches!(edwards_sokal_check(&w, 2, 1.0), Err(Error::TooLarge { .. })));
    }
}
