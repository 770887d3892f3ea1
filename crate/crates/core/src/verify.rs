//! Named suites of exact checks with pass/fail records.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gibbs::{origin_probability_oracle, OriginQuery};
use crate::lattice::{Site, Window};
use crate::models::{bond_p_c, hard_core, potts, widom_rowlinson, ModelInstance};
use crate::rc::{
    amalgamation_check, bond_rc, dominance_report, duality_check, edwards_sokal_check, single_site_bounds_check,
    wr_pushforward_check, Bond, Wiring,
};
use crate::transfer::{conditional_origin_probability, TransferOptions};

/// Default tolerance of the exact identity suites.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
/// Default tolerance of the transfer-versus-enumeration suite.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Duality,
    Es,
    Wr,
    Amalgamation,
    Bounds,
    Dominance,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Duality,
        Suite::Es,
        Suite::Wr,
        Suite::Amalgamation,
        Suite::Bounds,
        Suite::Dominance,
        Suite::Oracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Es => "es",
            Suite::Wr => "wr",
            Suite::Amalgamation => "amalgamation",
            Suite::Bounds => "bounds",
            Suite::Dominance => "dominance",
            Suite::Oracle => "oracle",
        }
    }

    pub fn parse(name: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|s| s.as_str() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{name}`")))
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Oracle => ORACLE_TOLERANCE,
            _ => DEFAULT_TOLERANCE,
        }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: Suite,
    pub name: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckRecord {
    fn new(suite: Suite, name: String, max_deviation: f64, tolerance: f64) -> Self {
        CheckRecord { suite, name, max_deviation, tolerance, passed: max_deviation <= tolerance }
    }
}

/// Runs one suite. `tol` overrides the suite default.
pub fn run_suite(suite: Suite, tol: Option<f64>) -> Result<Vec<CheckRecord>> {
    let tol = tol.unwrap_or(suite.default_tolerance());
    if !(tol >= 0.0) {
        return invalid("tolerance must be nonnegative");
    }
    let rec = |name: String, dev: f64| CheckRecord::new(suite, name, dev, tol);
    let mut out = Vec::new();
    match suite {
        Suite::Duality => {
            for (p, q) in [(0.3, 1.0), (0.6, 2.0), (bond_p_c(2.0), 2.0), (0.5, 3.0)] {
                out.push(rec(format!("n=1 p={p} q={q}"), duality_check(1, p, q)?));
            }
        }
        Suite::Wr => {
            let w = Window::block(2, 1)?;
            for q in [1, 2, 3] {
                for lambda in [0.5, 1.0, 2.0] {
                    out.push(rec(format!("box(1) q={q} lambda={lambda}"), wr_pushforward_check(&w, q, lambda)?));
                }
            }
        }
        Suite::Es => {
            let windows = [("origin", Window::block(2, 0)?), ("square", Window::rectangle(&[0, 0], &[1, 1])?)];
            for (label, w) in &windows {
                for beta in [0.5, 1.0] {
                    let d = edwards_sokal_check(w, 2, beta)?;
                    for (part, v) in [("site", d.site), ("bond", d.bond), ("joint", d.joint)] {
                        out.push(rec(format!("{label} q=2 beta={beta} {part}"), v));
                    }
                }
            }
        }
        Suite::Amalgamation => {
            let lambda = Window::block(2, 1)?;
            let theta = [Site::from([1, 0])];
            for (p, q) in [(0.45, 2.0), (0.7, 3.0), (0.2, 1.5)] {
                out.push(rec(format!("box(1) theta=(1,0) p={p} q={q}"), amalgamation_check(&lambda, &theta, p, q)?));
            }
            let rejected = matches!(
                amalgamation_check(&Window::block(2, 2)?, &[Site::from([0, 0])], 0.5, 2.0),
                Err(Error::PreconditionFailed(_))
            );
            out.push(rec("box(2) theta=(0,0) rejected".into(), if rejected { 0.0 } else { f64::INFINITY }));
        }
        Suite::Bounds => {
            let windows = [("box(1)", Window::block(2, 1)?), ("2x3", Window::rectangle(&[0, 0], &[1, 2])?)];
            for (label, w) in &windows {
                for (p, q) in [(0.3, 2.0), (0.7, 3.0)] {
                    let r = single_site_bounds_check(w, p, q)?;
                    let violation = (r.lower - r.min_conditional).max(r.max_conditional - r.upper).max(0.0);
                    out.push(rec(format!("{label} p={p} q={q}"), violation));
                }
            }
        }
        Suite::Dominance => {
            let bond = Bond { lo: Site::from([0, 0]), axis: 0 };
            for (p, q) in [(0.5, 2.0), (0.3, 3.0)] {
                let marginal = |w: Window| -> Result<_> {
                    let (bonds, d) = bond_rc(&w, p, q, Wiring::Free)?;
                    let i = bonds.iter().position(|b| *b == bond).expect("bond (0,0)-(1,0) is inside");
                    d.marginal(&[i])
                };
                let domino = marginal(Window::rectangle(&[0, 0], &[1, 0])?)?;
                let square = marginal(Window::rectangle(&[0, 0], &[1, 1])?)?;
                let r = dominance_report(&domino, &square, tol)?;
                out.push(rec(format!("domino <= square p={p} q={q}"), r.max_violation));
            }
        }
        Suite::Oracle => {
            let models = [potts(2, 0.7)?, potts(3, 1.3)?, widom_rowlinson(1, 0.8)?, widom_rowlinson(2, 3.0)?, hard_core(1.5)?];
            for m in &models {
                let dev = oracle_deviation(m, 1)?;
                out.push(rec(format!("{} transfer vs enumeration", m.kind.name()), dev));
            }
        }
    }
    Ok(out)
}

/// Runs every suite with its default tolerance, or `tol` for all of them.
pub fn run_all(tol: Option<f64>) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for s in Suite::ALL {
        out.extend(run_suite(s, tol)?);
    }
    Ok(out)
}

/// Largest `|transfer - enumeration|` over all orbit points and all
/// half-boxes with every component of `y` and `z` at most `max_side`.
pub fn oracle_deviation(m: &ModelInstance, max_side: i64) -> Result<f64> {
    let opts = TransferOptions::default();
    let mut worst: f64 = 0.0;
    for point in m.orbit() {
        for y2 in 0..=max_side {
            for z1 in 0..=max_side {
                for z2 in 0..=max_side {
                    let w = Window::half_box(&[0, y2], &[z1, z2])?;
                    let exact = origin_probability_oracle(&OriginQuery::from_point(w, &point)?, &m.interaction)?;
                    for y1 in 0..=max_side {
                        let t = conditional_origin_probability([y1, y2], [z1, z2], &point, &m.interaction, &opts)?;
                        worst = worst.max((t.probability - exact).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}
