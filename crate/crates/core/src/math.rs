//! Floating-point helpers that work without `std`.

pub use libm::{cos, exp, expm1, fabs as abs, hypot, log as ln, pow, sqrt};

pub const PI: f64 = core::f64::consts::PI;
pub const E: f64 = core::f64::consts::E;

/// Pairwise (cascade) summation. The result depends only on the order of
/// `xs`, never on how work was scheduled.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn max_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, |m, x| if abs(x) > m { abs(x) } else { m })
}

/// `h_k = 1 + 1/2 + ... + 1/k`.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).rev().map(|i| 1.0 / i as f64).sum()
}

/// Smallest `t >= 0` with `f(t) <= threshold`, for `f` non-increasing.
///
/// The bracket starts at `[0, scale]` and doubles until the predicate holds;
/// bisection stops once the bracket is narrower than `tol`. The returned value
/// is the right end of the final bracket, so the predicate holds there.
pub fn first_time_below(
    mut f: impl FnMut(f64) -> f64,
    threshold: f64,
    scale: f64,
    tol: f64,
) -> f64 {
    if f(0.0) <= threshold {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = if scale > 0.0 { scale } else { 1.0 };
    let mut expansions = 0;
    while f(hi) > threshold {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 2000 {
            return f64::INFINITY;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_input() {
        let xs: alloc::vec::Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&xs), 0.5 * 999.0 * 1000.0 / 2.0);
    }

    #[test]
    fn bisection_finds_log_two() {
        let t = first_time_below(|t| exp(-t), 0.5, 1.0, 1e-12);
        assert!((t - core::f64::consts::LN_2).abs() < 1e-11);
        assert!(exp(-t) <= 0.5);
    }

    #[test]
    fn bisection_returns_zero_when_already_below() {
        assert_eq!(first_time_below(|_| 0.1, 0.5, 1.0, 1e-9), 0.0);
    }

    #[test]
    fn harmonic_numbers() {
        assert_eq!(harmonic(0), 0.0);
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
    }
}
