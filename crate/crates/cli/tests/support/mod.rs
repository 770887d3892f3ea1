//! Reference values computed independently of the library.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Largest eigenvalue, in log form per column site, of the row transfer
/// matrix of the hard-core model on a cylinder of circumference `m`
/// (activity `gamma`).
///
/// Rows are bitmasks with no two cyclically adjacent ones; two rows may be
/// stacked when they share no one. The symmetrized matrix
/// `D^{1/2} A D^{1/2}` is applied through a subset-sum transform and the
/// eigenvalue read off a Rayleigh quotient.
pub fn hard_square_cylinder(gamma: f64, m: usize) -> f64 {
    assert!(m >= 2 && m <= 22);
    let size = 1usize << m;
    let full = size - 1;
    let valid = |b: usize| b & (((b << 1) | (b >> (m - 1))) & full) == 0;
    let root_w: Vec<f64> = (0..size)
        .map(|b| if valid(b) { gamma.powf(b.count_ones() as f64 / 2.0) } else { 0.0 })
        .collect();
    let mut v: Vec<f64> = root_w.iter().map(|&w| if w > 0.0 { 1.0 } else { 0.0 }).collect();
    let mut buf = vec![0.0; size];
    let mut lambda = 0.0;
    for _ in 0..5000 {
        for b in 0..size {
            buf[b] = root_w[b] * v[b];
        }
        for bit in 0..m {
            let step = 1 << bit;
            for b in 0..size {
                if b & step != 0 {
                    buf[b] += buf[b ^ step];
                }
            }
        }
        let mut next = vec![0.0; size];
        for b in 0..size {
            if root_w[b] > 0.0 {
                next[b] = root_w[b] * buf[full ^ b];
            }
        }
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let vn: f64 = v.iter().zip(&next).map(|(a, b)| a * b).sum();
        let estimate = vn / vv;
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = next.into_iter().map(|x| x / norm).collect();
        if (estimate - lambda).abs() <= 1e-15 * estimate {
            lambda = estimate;
            break;
        }
        lambda = estimate;
    }
    lambda.ln() / m as f64
}

/// Hard-core pressure from cylinders of even circumference `m_max - 4`,
/// `m_max - 2` and `m_max`, extrapolated by Aitken's delta-squared rule.
/// The second value is the size of the extrapolation step.
pub fn hard_square_pressure(gamma: f64, m_max: usize) -> (f64, f64) {
    let f: Vec<f64> = [m_max - 4, m_max - 2, m_max].iter().map(|&m| hard_square_cylinder(gamma, m)).collect();
    let (d1, d2) = (f[1] - f[0], f[2] - f[1]);
    let limit = if d1 == d2 { f[2] } else { f[2] - d2 * d2 / (d2 - d1) };
    (limit, (limit - f[2]).abs())
}

/// `ln Z / N` of the zero-field square-lattice Ising model at coupling
/// `k`, by a periodic midpoint rule with `grid` points per axis on
/// `ln 2 + (1 / 8π²) ∫∫ ln(cosh²2K - sinh 2K (cos a + cos b)) da db`.
pub fn ising_free_energy(k: f64, grid: usize) -> f64 {
    let c2 = (2.0 * k).cosh().powi(2);
    let s = (2.0 * k).sinh();
    let h = 2.0 * PI / grid as f64;
    let cosines: Vec<f64> = (0..grid).map(|i| ((i as f64 + 0.5) * h).cos()).collect();
    let mut total = 0.0;
    for &ca in &cosines {
        let mut row = 0.0;
        for &cb in &cosines {
            row += (c2 - s * (ca + cb)).ln();
        }
        total += row;
    }
    2f64.ln() + total / (grid * grid) as f64 / 2.0
}

/// Pressure of the two-state Potts model with weight `e^{β}` per agreeing
/// bond. With `1{a = b} = (1 + σσ')/2` each bond carries `e^{β/2}` times
/// an Ising factor at `K = β/2`, and there are two bonds per site.
pub fn potts2_pressure(beta: f64) -> f64 {
    beta + ising_free_energy(beta / 2.0, 512)
}

/// Bulk pressure from four free rectangles: the perimeter and corner terms
/// of `ln Z(a, b) ≈ P ab + s (a + b) + c` cancel in
/// `ln Z(a,a) - ln Z(a,a-1) - ln Z(a-1,a) + ln Z(a-1,a-1)`.
pub fn corner_cancelled(log_z: impl Fn(i64, i64) -> f64, a: i64) -> f64 {
    log_z(a, a) - log_z(a, a - 1) - log_z(a - 1, a) + log_z(a - 1, a - 1)
}
