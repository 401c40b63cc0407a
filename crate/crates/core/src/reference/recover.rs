use crate::expr::EvalError;
use crate::model::ProblemSpec;
use crate::roots::{rtsafe, RootError};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RecoverError {
    #[error("no v in the state box with Phi(u, v) = w")]
    OutOfRange,
    #[error("v recovery did not converge")]
    NoConvergence,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

const TOL: f64 = 1e-12;
const EDGE: f64 = 1e-9;

/// Inverts `w = Phi(u, v)` for `v`: Newton from `guess`, falling back to a
/// bracketed search over the state box.
pub fn recover_v<T: Real>(spec: &ProblemSpec<T>, u: T, w: T, guess: T) -> Result<T, RecoverError> {
    let phi = &spec.density;
    let (lo, hi) = spec.numerics.state_box.v;
    // states on the box edge drift past it by roundoff
    let pad = (hi - lo) * T::of(EDGE);
    let (lo, hi) = (lo - pad, hi + pad);
    let tol = T::of(TOL);
    let inside = |v: T| v >= lo && v <= hi;
    let mut v = if guess.is_finite() && inside(guess) { guess } else { (lo + hi) * T::of(0.5) };
    for _ in 0..spec.numerics.newton_max_iter {
        let r = phi.at(u, v)? - w;
        if r.abs() <= tol {
            return Ok(v);
        }
        let d = phi.dv(u, v)?;
        let next = v - r / d;
        if !(next.is_finite() && inside(next)) {
            break;
        }
        v = next;
    }
    let f = |v: T| -> Result<(T, T), EvalError> { Ok((phi.at(u, v)? - w, phi.dv(u, v)?)) };
    let v = rtsafe(f, lo, hi, T::epsilon(), spec.numerics.newton_max_iter).map_err(|e| match e {
        RootError::NotBracketed => RecoverError::OutOfRange,
        RootError::NoConvergence => RecoverError::NoConvergence,
        RootError::Eval(e) => RecoverError::Eval(e),
    })?;
    if (phi.at(u, v)? - w).abs() <= tol {
        Ok(v)
    } else {
        Err(RecoverError::NoConvergence)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{COUPLED, DECOUPLED};
    use crate::model::load_spec;

    #[test]
    fn identity_density() {
        let spec: ProblemSpec<f64> = load_spec(DECOUPLED).unwrap();
        assert_eq!(recover_v(&spec, 0.3, 2.7, 2.0).unwrap(), 2.7);
        let top = 3.0 + 4.0 * f64::EPSILON;
        assert_eq!(recover_v(&spec, 0.3, top, 2.9).unwrap(), top);
        assert_eq!(recover_v(&spec, 0.3, 3.001, 2.9), Err(RecoverError::OutOfRange));
    }

    #[test]
    fn reciprocal_density() {
        let spec: ProblemSpec<f64> = load_spec(COUPLED).unwrap();
        let text = COUPLED.replace("\"v\": [1.5, 3.5]", "\"v\": [0.5, 3.5]");
        let wide: ProblemSpec<f64> = load_spec(&text).unwrap();
        let v = recover_v(&wide, 1.0, -0.5, 3.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        // v = 1 lies outside the narrower box
        assert_eq!(recover_v(&spec, 1.0, -0.5, 3.0), Err(RecoverError::OutOfRange));
        let v = recover_v(&spec, 0.2, -1.0 / 2.9, f64::NAN).unwrap();
        assert!((v - 2.7).abs() < 1e-10);
    }
}
