use crate::scalar::Real;

#[derive(Debug, PartialEq)]
pub(crate) enum RootError<E> {
    NotBracketed,
    NoConvergence,
    Eval(E),
}

impl<E> From<E> for RootError<E> {
    fn from(e: E) -> Self {
        RootError::Eval(e)
    }
}

/// Newton's method safeguarded by bisection on a sign-changing bracket.
/// `f` returns the value and derivative.
pub(crate) fn rtsafe<T: Real, E>(
    mut f: impl FnMut(T) -> Result<(T, T), E>,
    lo: T,
    hi: T,
    tol: T,
    max_iter: usize,
) -> Result<T, RootError<E>> {
    let (flo, _) = f(lo)?;
    let (fhi, _) = f(hi)?;
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(RootError::NotBracketed);
    }
    // orient so that f(a) < 0 < f(b)
    let (mut a, mut b) = if flo < T::zero() { (lo, hi) } else { (hi, lo) };
    let mut x = (a + b) * T::of(0.5);
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x)?;
    // bisection alone needs about 60 halvings at double precision
    for _ in 0..max_iter + 80 {
        let newton_out = ((x - b) * dfx - fx) * ((x - a) * dfx - fx) > T::zero();
        let slow = (T::of(2.0) * fx).abs() > (dx_old * dfx).abs();
        dx_old = dx;
        if newton_out || slow || dfx == T::zero() {
            dx = (b - a) * T::of(0.5);
            x = a + dx;
        } else {
            dx = fx / dfx;
            x = x - dx;
        }
        let scale = T::one() + x.abs();
        if dx.abs() <= tol * scale {
            return Ok(x);
        }
        (fx, dfx) = f(x)?;
        if fx == T::zero() {
            return Ok(x);
        }
        if fx < T::zero() {
            a = x;
        } else {
            b = x;
        }
    }
    Err(RootError::NoConvergence)
}

/// Plain Newton iteration from `x0`, halving steps that do not reduce `|f|`.
pub(crate) fn damped_newton<T: Real, E>(
    mut f: impl FnMut(T) -> Result<(T, T), E>,
    x0: T,
    tol: T,
    max_iter: usize,
) -> Result<T, RootError<E>> {
    let mut x = x0;
    let (mut fx, mut dfx) = f(x)?;
    for _ in 0..max_iter {
        if fx == T::zero() {
            return Ok(x);
        }
        if dfx == T::zero() || !dfx.is_finite() {
            return Err(RootError::NoConvergence);
        }
        let step = fx / dfx;
        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..30 {
            let trial = x - lambda * step;
            if let Ok((ft, dft)) = f(trial) {
                if ft.abs() < fx.abs() || (lambda * step).abs() <= tol * (T::one() + x.abs()) {
                    accepted = Some((trial, ft, dft));
                    break;
                }
            }
            lambda = lambda * T::of(0.5);
        }
        let Some((trial, ft, dft)) = accepted else {
            return Err(RootError::NoConvergence);
        };
        let moved = (trial - x).abs();
        (x, fx, dfx) = (trial, ft, dft);
        if moved <= tol * (T::one() + x.abs()) {
            return Ok(x);
        }
    }
    Err(RootError::NoConvergence)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(x: f64) -> Result<(f64, f64), ()> {
        Ok((x * x * x - 2.0 * x - 5.0, 3.0 * x * x - 2.0))
    }

    #[test]
    fn safeguarded_newton_finds_root() {
        let r = rtsafe(cubic, 0.0, 4.0, 1e-14, 60).unwrap();
        assert!((r - 2.0945514815423265).abs() < 1e-13);
        assert_eq!(rtsafe(cubic, 3.0, 4.0, 1e-14, 60), Err(RootError::NotBracketed));
    }

    #[test]
    fn damped_newton_converges() {
        let r = damped_newton(cubic, 3.0, 1e-14, 60).unwrap();
        assert!((r - 2.0945514815423265).abs() < 1e-13);
        let atan = |x: f64| Ok::<_, ()>((x.atan(), 1.0 / (1.0 + x * x)));
        assert!(damped_newton(atan, 5.0, 1e-14, 60).unwrap().abs() < 1e-13);
    }
}
