//! Continuous functions given by uniform samples with linear interpolation.
//!
//! Coefficient functions and right-hand sides only need to be continuous,
//! so they are carried as uniform samples on an interval, interpolated
//! linearly and extended by constant continuation outside that interval.

use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn<T> {
    lo: T,
    hi: T,
    values: Vec<T>,
}

impl<T: Real> SampledFn<T> {
    /// Uniform samples of a function on `[lo, hi]`. A single value is a
    /// constant function; `lo == hi` is allowed in that case only.
    pub fn new(lo: T, hi: T, values: Vec<T>) -> Self {
        assert!(!values.is_empty(), "sampled function needs at least one value");
        assert!(
            values.len() == 1 || hi > lo,
            "a non-constant sampled function needs lo < hi"
        );
        Self { lo, hi, values }
    }

    pub fn constant(value: T) -> Self {
        Self { lo: T::zero(), hi: T::zero(), values: vec![value] }
    }

    pub fn from_fn(lo: T, hi: T, n: usize, f: impl Fn(T) -> T) -> Self {
        assert!(n >= 2 && hi > lo);
        let step = (hi - lo) / T::from_usize(n - 1).unwrap();
        let values = (0..n).map(|i| f(lo + step * T::from_usize(i).unwrap())).collect();
        Self { lo, hi, values }
    }

    pub fn domain(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// Extrema over the sample values (the interpolant never leaves them).
    pub fn range(&self) -> (T, T) {
        let mut min = self.values[0];
        let mut max = self.values[0];
        for &v in &self.values[1..] {
            min = min.min(v);
            max = max.max(v);
        }
        (min, max)
    }

    pub fn eval(&self, t: T) -> T {
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        if t <= self.lo {
            return self.values[0];
        }
        if t >= self.hi {
            return self.values[n - 1];
        }
        let step = (self.hi - self.lo) / T::from_usize(n - 1).unwrap();
        let pos = (t - self.lo) / step;
        let idx = pos.floor().to_usize().unwrap_or(0).min(n - 2);
        let frac = pos - T::from_usize(idx).unwrap();
        self.values[idx] + (self.values[idx + 1] - self.values[idx]) * frac
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            lo: self.lo,
            hi: self.hi,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_everywhere() {
        let f = SampledFn::constant(3.0);
        assert_eq!(f.eval(-10.0), 3.0);
        assert_eq!(f.eval(0.0), 3.0);
        assert_eq!(f.eval(42.0), 3.0);
    }

    #[test]
    fn linear_interpolation_is_exact_on_lines() {
        let f = SampledFn::from_fn(0.0, 2.0, 9, |t: f64| 3.0 * t - 1.0);
        for &t in &[0.0_f64, 0.1, 0.77, 1.5, 2.0] {
            assert!((f.eval(t) - (3.0 * t - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_continuation_outside_range() {
        let f = SampledFn::new(0.0, 1.0, vec![2.0, 4.0]);
        assert_eq!(f.eval(-5.0), 2.0);
        assert_eq!(f.eval(9.0), 4.0);
    }

    #[test]
    fn range_reports_extrema() {
        let f = SampledFn::new(0.0, 1.0, vec![2.0, -1.0, 4.0]);
        assert_eq!(f.range(), (-1.0, 4.0));
    }
}
