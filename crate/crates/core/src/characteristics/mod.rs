//! Leading-order fields by the method of characteristics.
//!
//! The u-family is solved implicitly: `u` decouples, so its characteristics
//! are straight and `u0` at a point follows from one scalar root solve. The
//! v-family bends with `u0` and is traced forward as a fan of curves with
//! their variational Jacobians.

mod fan;
mod locate;

pub use fan::{build_u_fan, build_v_fan, fan_feet, v0_eval, CharField, V0};
pub(crate) use fan::{time_level, Snapshot};
pub(crate) use locate::{locate, Bracket, LocateFail, Node};

use std::cell::Cell;

use crate::expr::EvalError;
use crate::model::{ProblemSpec, Side};
use crate::roots::{rtsafe, RootError};
use crate::scalar::Real;

/// Where a field lives. The outer regions continue the smooth left and right
/// pieces of the initial data; `Inner` is the wedge between the two shocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    OuterLeft,
    OuterRight,
    Inner,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::OuterLeft => "outer_left",
            Region::OuterRight => "outer_right",
            Region::Inner => "inner",
        }
    }

    /// Side of the initial data that feeds `u0` in this region. `u` is
    /// continuous across the v-shock, so the wedge shares the right piece.
    pub fn u_side(self) -> Side {
        match self {
            Region::OuterLeft => Side::Left,
            Region::OuterRight | Region::Inner => Side::Right,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    U,
    V,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::U => "u",
            Family::V => "v",
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CharError {
    #[error("no characteristic foot found for x={x}, t={t}")]
    RootNotBracketed { x: f64, t: f64 },
    #[error("characteristics focus near x={x}, t={t}")]
    Focusing { x: f64, t: f64 },
    #[error("characteristic root search did not converge at x={x}, t={t}")]
    NoConvergence { x: f64, t: f64 },
    #[error("x={x} is outside the fan hull at t={t}")]
    OutOfHull { x: f64, t: f64 },
    #[error("fan too coarse near x={x}, t={t}")]
    TooCoarse { x: f64, t: f64 },
    #[error("t={t} is outside the stored time range")]
    TimeOutOfRange { t: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `u0` at a point, its x-derivative and the foot of the characteristic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct U0<T> {
    pub value: T,
    pub slope: T,
    pub foot: T,
}

/// Evaluates `u0` in `region` at `(x, t)`.
pub fn u0_eval<T: Real>(spec: &ProblemSpec<T>, region: Region, x: T, t: T) -> Result<U0<T>, CharError> {
    u0_eval_from(spec, region, x, t, x)
}

/// As [`u0_eval`], starting the foot search at `guess`.
pub fn u0_eval_from<T: Real>(
    spec: &ProblemSpec<T>,
    region: Region,
    x: T,
    t: T,
    guess: T,
) -> Result<U0<T>, CharError> {
    let piece = spec.initial.u(region.u_side());
    let zero = T::zero();
    if let Some(c) = piece.constant() {
        return Ok(U0 {
            value: c,
            slope: zero,
            foot: x - spec.lambda.at(c, zero)? * t,
        });
    }
    let (xf, tf) = (x.as_f64(), t.as_f64());
    let saw_fold = Cell::new(false);
    // h(xi) = xi + lambda(u(xi)) t - x is increasing while characteristics
    // do not cross
    let h = |xi: T| -> Result<(T, T), EvalError> {
        let u = piece.at(xi)?;
        let dh = T::one() + t * spec.lambda.du(u, zero)? * piece.slope(xi)?;
        if dh <= zero {
            saw_fold.set(true);
        }
        Ok((xi + spec.lambda.at(u, zero)? * t - x, dh))
    };
    let guess = if guess.is_finite() { guess } else { x };
    let (h0, _) = h(guess)?;
    let mut step = h0.abs() * T::of(1.5) + T::of(1e-9) * (T::one() + x.abs());
    let (mut lo, mut hi) = (guess, guess);
    let mut bracketed = h0 == zero;
    for _ in 0..64 {
        if bracketed {
            break;
        }
        if h0 < zero {
            lo = hi;
            hi = guess + step;
            bracketed = h(hi)?.0 >= zero;
        } else {
            hi = lo;
            lo = guess - step;
            bracketed = h(lo)?.0 <= zero;
        }
        step = step * T::of(2.0);
    }
    let root_error = |fold: bool| {
        if fold {
            CharError::Focusing { x: xf, t: tf }
        } else {
            CharError::RootNotBracketed { x: xf, t: tf }
        }
    };
    if !bracketed {
        return Err(root_error(saw_fold.get()));
    }
    let n = &spec.numerics;
    let foot = if h0 == zero {
        guess
    } else {
        match rtsafe(h, lo, hi, n.newton_tol, n.newton_max_iter) {
            Ok(root) => root,
            Err(RootError::Eval(e)) => return Err(e.into()),
            Err(RootError::NotBracketed) => return Err(root_error(saw_fold.get())),
            Err(RootError::NoConvergence) => return Err(CharError::NoConvergence { x: xf, t: tf }),
        }
    };
    let value = piece.at(foot)?;
    let rate = piece.slope(foot)?;
    let denom = T::one() + t * spec.lambda.du(value, zero)? * rate;
    if denom <= zero {
        return Err(CharError::Focusing { x: xf, t: tf });
    }
    Ok(U0 {
        value,
        slope: rate / denom,
        foot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::DECOUPLED;
    use crate::model::load_spec;

    fn smooth_right(u_right: &str) -> ProblemSpec<f64> {
        let text = DECOUPLED.replace("\"u_right\": \"0\"", &format!("\"u_right\": \"{u_right}\""));
        load_spec(&text).unwrap()
    }

    #[test]
    fn constant_state() {
        let spec: ProblemSpec<f64> = load_spec(DECOUPLED).unwrap();
        let r = u0_eval(&spec, Region::OuterLeft, 0.3, 0.2).unwrap();
        assert_eq!((r.value, r.slope), (1.0, 0.0));
        assert!((r.foot - 0.1).abs() < 1e-15);
        let r = u0_eval(&spec, Region::Inner, 0.3, 0.2).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn linear_data_expands() {
        let spec = smooth_right("x");
        for (x, t) in [(0.3, 0.2), (1.7, 0.9), (-0.4, 0.5), (0.0, 0.1)] {
            let r = u0_eval(&spec, Region::OuterRight, x, t).unwrap();
            assert!((r.value - x / (1.0 + t)).abs() < 1e-13);
            assert!((r.slope - 1.0 / (1.0 + t)).abs() < 1e-13);
            assert!((r.foot - x / (1.0 + t)).abs() < 1e-13);
        }
    }

    #[test]
    fn focusing_is_detected() {
        let spec = smooth_right("-x");
        let err = u0_eval(&spec, Region::OuterRight, 0.5, 1.0).unwrap_err();
        assert!(matches!(err, CharError::Focusing { .. }), "{err:?}");
        assert!(u0_eval(&spec, Region::OuterRight, 0.5, 0.5).is_ok());
    }

    #[test]
    fn nonlinear_data_satisfies_characteristic_relation() {
        let spec = smooth_right("0.1*sin(3*x)");
        let (x, t) = (0.37, 0.45);
        let r = u0_eval(&spec, Region::OuterRight, x, t).unwrap();
        let u = 0.1 * (3.0 * r.foot).sin();
        assert!((r.foot + u * t - x).abs() < 1e-14);
        assert!((r.value - u).abs() < 1e-15);
        let warm = u0_eval_from(&spec, Region::OuterRight, x, t, r.foot + 0.01).unwrap();
        assert!((warm.value - r.value).abs() < 1e-14);
    }
}
