//! Floating point abstraction shared by every numerical module.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used throughout the solvers: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Cubic Hermite interpolation on `[0, h]` at fractional position `theta`.
#[inline]
pub(crate) fn hermite<T: Real>(y0: T, d0: T, y1: T, d1: T, h: T, theta: T) -> T {
    let one = T::one();
    let two = T::of(2.0);
    let three = T::of(3.0);
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = two * t3 - three * t2 + one;
    let h10 = t3 - two * t2 + theta;
    let h01 = three * t2 - two * t3;
    let h11 = t3 - t2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Derivative (with respect to the physical coordinate) of [`hermite`].
#[inline]
pub(crate) fn hermite_slope<T: Real>(y0: T, d0: T, y1: T, d1: T, h: T, theta: T) -> T {
    let one = T::one();
    let two = T::of(2.0);
    let three = T::of(3.0);
    let four = T::of(4.0);
    let six = T::of(6.0);
    let t2 = theta * theta;
    let g00 = six * t2 - six * theta;
    let g10 = three * t2 - four * theta + one;
    let g01 = six * theta - six * t2;
    let g11 = three * t2 - two * theta;
    (g00 * y0 + g01 * y1) / h + g10 * d0 + g11 * d1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubics() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x + 0.25 * x * x * x;
        let dp = |x: f64| -2.0 + x + 0.75 * x * x;
        let (a, h) = (0.3, 0.7);
        for i in 0..=10 {
            let theta = i as f64 / 10.0;
            let x = a + theta * h;
            let y = hermite(p(a), dp(a), p(a + h), dp(a + h), h, theta);
            let d = hermite_slope(p(a), dp(a), p(a + h), dp(a + h), h, theta);
            assert!((y - p(x)).abs() < 1e-14);
            assert!((d - dp(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn literals_convert_for_both_widths() {
        assert_eq!(f32::of(0.5), 0.5f32);
        assert_eq!(f64::of_usize(7), 7.0);
    }
}
