use crate::roots::rtsafe;
use crate::scalar::{hermite, hermite_slope, Real};

/// One curve of a fan at a fixed time: launch parameter, position and
/// `dx/dp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Node<T> {
    pub p: T,
    pub x: T,
    pub j: T,
}

/// Result of inverting a fan at a point: the pair of adjacent nodes
/// `(lo, lo + 1)`, the fractional parameter position between them (outside
/// `[0, 1]` when extrapolating), the parameter itself and `dx/dp` there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Bracket<T> {
    pub lo: usize,
    pub theta: T,
    pub p: T,
    pub j: T,
}

impl<T: Real> Bracket<T> {
    /// Linear interpolation of per-node data.
    #[inline]
    pub fn blend(&self, a: T, b: T) -> T {
        a + (b - a) * self.theta
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum LocateFail {
    OutOfHull,
    /// Adjacent curves disagree with a cubic through them; `lo` names the
    /// offending pair.
    Coarse(usize),
    Fold(usize),
}

// Largest relative disagreement between an end slope and the secant that is
// still treated as resolved.
const SLOPE_TOL: f64 = 0.5;

/// Finds the parameter of the curve through `x` among `nodes`, sorted by
/// increasing `x`. Points up to `slack` beyond either end are extrapolated
/// linearly from the end node.
pub(crate) fn locate<T: Real>(nodes: &[Node<T>], x: T, slack: T) -> Result<Bracket<T>, LocateFail> {
    let n = nodes.len();
    if n == 0 {
        return Err(LocateFail::OutOfHull);
    }
    let (first, last) = (nodes[0], nodes[n - 1]);
    if n == 1 {
        if (x - first.x).abs() > slack || first.j == T::zero() {
            return Err(LocateFail::OutOfHull);
        }
        return Ok(Bracket {
            lo: 0,
            theta: T::zero(),
            p: first.p + (x - first.x) / first.j,
            j: first.j,
        });
    }
    if x < first.x || x > last.x {
        let (end, lo) = if x < first.x { (first, 0) } else { (last, n - 2) };
        if (x - end.x).abs() > slack {
            return Err(LocateFail::OutOfHull);
        }
        if end.j == T::zero() {
            return Err(LocateFail::Fold(lo));
        }
        let p = end.p + (x - end.x) / end.j;
        let (a, b) = (nodes[lo], nodes[lo + 1]);
        return Ok(Bracket {
            lo,
            theta: (p - a.p) / (b.p - a.p),
            p,
            j: end.j,
        });
    }
    let lo = nodes.partition_point(|nd| nd.x <= x).clamp(1, n - 1) - 1;
    resolve(nodes[lo], nodes[lo + 1], x).map_err(|f| match f {
        LocateFail::Coarse(_) => LocateFail::Coarse(lo),
        LocateFail::Fold(_) => LocateFail::Fold(lo),
        other => other,
    })
    .map(|mut b| {
        b.lo = lo;
        b
    })
}

/// Inverts the cubic Hermite interpolant of `x(p)` between two adjacent
/// nodes with `a.x <= x <= b.x`.
pub(crate) fn resolve<T: Real>(a: Node<T>, b: Node<T>, x: T) -> Result<Bracket<T>, LocateFail> {
    let h = b.p - a.p;
    let dx = b.x - a.x;
    if dx == T::zero() {
        if h == T::zero() || a.j == T::zero() {
            return Err(LocateFail::Fold(0));
        }
        return Ok(Bracket {
            lo: 0,
            theta: T::zero(),
            p: a.p,
            j: a.j,
        });
    }
    let secant = dx / h;
    let (ra, rb) = (a.j / secant, b.j / secant);
    if !(ra > T::zero() && rb > T::zero()) || !(secant * h > T::zero()) {
        return Err(LocateFail::Fold(0));
    }
    let tol = T::of(SLOPE_TOL);
    if (ra - T::one()).abs() > tol || (rb - T::one()).abs() > tol {
        return Err(LocateFail::Coarse(0));
    }
    let f = |s: T| -> Result<(T, T), ()> {
        Ok((
            hermite(a.x, a.j, b.x, b.j, h, s) - x,
            hermite_slope(a.x, a.j, b.x, b.j, h, s) * h,
        ))
    };
    let theta = if x == a.x {
        T::zero()
    } else if x == b.x {
        T::one()
    } else {
        rtsafe(f, T::zero(), T::one(), T::epsilon() * T::of(4.0), 100)
            .map_err(|_| LocateFail::Coarse(0))?
    };
    Ok(Bracket {
        lo: 0,
        theta,
        p: a.p + h * theta,
        j: hermite_slope(a.x, a.j, b.x, b.j, h, theta),
    })
}
