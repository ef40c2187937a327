//! Monotone piecewise-cubic Hermite interpolation.
//!
//! Interior tangents use the weighted harmonic mean of neighbouring secant
//! slopes (Fritsch–Butland form of the Fritsch–Carlson limiter) and are zero
//! wherever the data changes direction. End tangents are zero. The result is
//! C1 and never leaves the range of the two knots bounding each interval.

use crate::scalar::{clamp, Scalar};

/// Tangents for knots `(xs[i], ys[i])`; `xs` strictly increasing.
pub fn monotone_tangents<S: Scalar>(xs: &[S], ys: &[S]) -> Vec<S> {
    let n = xs.len();
    assert_eq!(n, ys.len());
    let mut m = vec![S::zero(); n];
    if n < 3 {
        return m;
    }
    let two = S::of(2.0);
    for k in 1..n - 1 {
        let h0 = xs[k] - xs[k - 1];
        let h1 = xs[k + 1] - xs[k];
        let d0 = (ys[k] - ys[k - 1]) / h0;
        let d1 = (ys[k + 1] - ys[k]) / h1;
        if d0 == S::zero() || d1 == S::zero() || d0.signum() != d1.signum() {
            continue;
        }
        let w0 = two * h1 + h0;
        let w1 = h1 + two * h0;
        m[k] = (w0 + w1) / (w0 / d0 + w1 / d1);
    }
    m
}

/// Evaluate the interpolant at `x`. Outside `[xs[0], xs[last]]` the
/// boundary value is held; callers decide what "outside" means for them.
pub fn hermite_eval<S: Scalar>(xs: &[S], ys: &[S], ms: &[S], x: S) -> S {
    let n = xs.len();
    if n == 0 {
        return S::zero();
    }
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    // first index with xs[i] > x
    let hi = xs.partition_point(|&v| v <= x);
    let lo = hi - 1;
    if xs[lo] == x {
        return ys[lo];
    }
    let h = xs[hi] - xs[lo];
    let s = (x - xs[lo]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let one = S::one();
    let two = S::of(2.0);
    let three = S::of(3.0);
    let h00 = two * s3 - three * s2 + one;
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    let v = h00 * ys[lo] + h10 * h * ms[lo] + h01 * ys[hi] + h11 * h * ms[hi];
    // Monotone tangents keep the exact value inside the knot range; clamping
    // only strips rounding error.
    let (a, b) = (ys[lo], ys[hi]);
    clamp(v, a.min(b), a.max(b))
}

/// Owned interpolant over a fixed knot set.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic<S: Scalar> {
    xs: Vec<S>,
    ys: Vec<S>,
    ms: Vec<S>,
}

impl<S: Scalar> MonotoneCubic<S> {
    pub fn new(xs: Vec<S>, ys: Vec<S>) -> Self {
        debug_assert!(xs.windows(2).all(|w| w[0] < w[1]), "knots must increase");
        let ms = monotone_tangents(&xs, &ys);
        MonotoneCubic { xs, ys, ms }
    }

    pub fn eval(&self, x: S) -> S {
        hermite_eval(&self.xs, &self.ys, &self.ms, x)
    }

    pub fn knots(&self) -> impl Iterator<Item = (S, S)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }
}
