//! Log-space accumulation helpers.
//!
//! Weights `exp(-E)` span far more than the range of `f64`, so partition
//! sums are kept as logarithms. Summation uses a fixed pairwise tree whose
//! shape depends only on the input length, which keeps results
//! bit-reproducible.

/// `log(sum(exp(x_i)))` with a max shift and pairwise summation.
///
/// Returns `-inf` for an empty slice or when every term is `-inf`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut scaled: Vec<f64> = terms.iter().map(|&t| (t - max).exp()).collect();
    max + pairwise_sum_in_place(&mut scaled).ln()
}

/// Pairwise (tree) summation. The reduction tree is fixed by the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    let mut buf = values.to_vec();
    pairwise_sum_in_place(&mut buf)
}

fn pairwise_sum_in_place(buf: &mut [f64]) -> f64 {
    let mut len = buf.len();
    if len == 0 {
        return 0.0;
    }
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            buf[i] = buf[2 * i] + buf[2 * i + 1];
        }
        if len % 2 == 1 {
            buf[half] = buf[len - 1];
            len = half + 1;
        } else {
            len = half;
        }
    }
    buf[0]
}

/// `count * ln(x)` with the convention `0 * ln(0) = 0`.
pub(crate) fn count_ln(count: usize, x: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * x.ln()
    }
}
