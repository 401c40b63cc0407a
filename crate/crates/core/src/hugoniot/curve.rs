use std::io::{self, Write};

use super::ShockSide;
use crate::scalar::{hermite, Real};

/// Samples of one shock on the time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ShockCurve<T> {
    pub side: ShockSide,
    pub dt: T,
    pub s0: Vec<T>,
    pub d0: Vec<T>,
    pub s1: Vec<T>,
    pub d1: Vec<T>,
}

impl<T: Real> ShockCurve<T> {
    pub(crate) fn new(side: ShockSide, dt: T, steps: usize) -> Self {
        let cap = steps + 1;
        ShockCurve {
            side,
            dt,
            s0: Vec::with_capacity(cap),
            d0: Vec::with_capacity(cap),
            s1: Vec::with_capacity(cap),
            d1: Vec::with_capacity(cap),
        }
    }

    pub fn len(&self) -> usize {
        self.s0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s0.is_empty()
    }

    pub fn time(&self, k: usize) -> T {
        self.dt * T::of_usize(k)
    }

    fn level(&self, t: T) -> (usize, T) {
        let last = self.len().saturating_sub(1);
        let r = (t / self.dt).max(T::zero());
        let k = r.floor().to_usize().unwrap_or(0).min(last.saturating_sub(1));
        (k, (r - T::of_usize(k)).min(T::one()))
    }

    /// Leading position at `t`, cubic in time between samples.
    pub fn s0_at(&self, t: T) -> T {
        let (k, th) = self.level(t);
        if self.len() < 2 {
            return self.s0[0];
        }
        hermite(self.s0[k], self.d0[k], self.s0[k + 1], self.d0[k + 1], self.dt, th)
    }

    /// First-order position correction at `t`.
    pub fn s1_at(&self, t: T) -> T {
        let (k, th) = self.level(t);
        if self.len() < 2 {
            return self.s1[0];
        }
        hermite(self.s1[k], self.d1[k], self.s1[k + 1], self.d1[k + 1], self.dt, th)
    }

    /// Composite position `s0 + eps s1`.
    pub fn position(&self, t: T, eps: T) -> T {
        self.s0_at(t) + eps * self.s1_at(t)
    }
}

/// Writes both shocks as CSV with one row per time level.
pub fn write_shock_csv<T: Real>(
    out: &mut impl Write,
    minus: &ShockCurve<T>,
    plus: &ShockCurve<T>,
) -> io::Result<()> {
    writeln!(out, "t,s0_minus,D0_minus,s1_minus,D1_minus,s0_plus,D0_plus,s1_plus,D1_plus")?;
    for k in 0..minus.len().min(plus.len()) {
        let row = [
            minus.time(k),
            minus.s0[k],
            minus.d0[k],
            minus.s1[k],
            minus.d1[k],
            plus.s0[k],
            plus.d0[k],
            plus.s1[k],
            plus.d1[k],
        ];
        let cells: Vec<String> = row.iter().map(|v| format!("{:.16e}", v.as_f64())).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}
