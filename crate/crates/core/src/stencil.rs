//! One-dimensional difference stencils shared by every derivative in the crate.
//!
//! Interior points use central differences; the first and last point on an
//! axis fall back to forward and backward differences. Keeping a single
//! implementation makes the analytic mean, the deterministic divergence and
//! every Monte Carlo sample use the same floating-point evaluation order.

/// Derivative along one axis at position `k` of `n` samples spaced `h` apart.
/// `at(m)` returns the sample at position `m`.
#[inline(always)]
pub(crate) fn derivative(n: usize, h: f64, k: usize, at: impl Fn(usize) -> f64) -> f64 {
    debug_assert!(n >= 2 && k < n);
    if k == 0 {
        (at(1) - at(0)) / h
    } else if k == n - 1 {
        (at(n - 1) - at(n - 2)) / h
    } else {
        (at(k + 1) - at(k - 1)) / (2.0 * h)
    }
}

/// Variance of [`derivative`] when each sample is an independent Gaussian
/// with standard deviation `sigma(m)`.
///
/// Interior: `(s[k+1] / 2h)^2 + (s[k-1] / 2h)^2`.
/// Boundary: `(s[a]^2 + s[b]^2) / h^2` for the one-sided pair `(a, b)`.
#[inline(always)]
pub(crate) fn derivative_variance(n: usize, h: f64, k: usize, sigma: impl Fn(usize) -> f64) -> f64 {
    debug_assert!(n >= 2 && k < n);
    if k == 0 {
        let (a, b) = (sigma(1), sigma(0));
        (a * a + b * b) / (h * h)
    } else if k == n - 1 {
        let (a, b) = (sigma(n - 1), sigma(n - 2));
        (a * a + b * b) / (h * h)
    } else {
        let a = sigma(k + 1) / (2.0 * h);
        let b = sigma(k - 1) / (2.0 * h);
        a * a + b * b
    }
}
