//! Finite-volume reference solver for the conservative form of the system,
//! with shock extraction and comparison against the expansion.

mod extract;
mod oracle;
mod recover;

pub use extract::{extract_shocks, front_position, write_fronts_csv};
pub use oracle::{
    compare, fit_slope, output_times, sweep, Comparison, ExactDamped, FiniteVolume, OracleRun, ShockOracle,
    ShockTrack, SweepFailure, SweepReport, SECOND_ORDER_BOUND, SLOPE_BAND,
};
pub use recover::{recover_v, RecoverError};

use std::io::{self, Write};

use crate::expansion::ExpansionError;
use crate::expr::EvalError;
use crate::model::{ModelError, ProblemSpec, Side};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum ReferenceError {
    #[error("time step {dt} too small at t={t}")]
    StepTooSmall { t: f64, dt: f64 },
    #[error("cell {cell} at t={t}: {source}")]
    Recovery {
        cell: usize,
        t: f64,
        #[source]
        source: RecoverError,
    },
    #[error("output time {t} outside [0, T]")]
    OutputTime { t: f64 },
    #[error("no {what} front at t={t}")]
    NoFront { what: &'static str, t: f64 },
    #[error("fronts closer than 10 cells at t={t}")]
    Unresolved { t: f64 },
    #[error("{what} front at x={x} is too close to the domain boundary at t={t}")]
    Margin { what: &'static str, x: f64, t: f64 },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
}

/// Cell averages at the requested output times.
#[derive(Clone, Debug)]
pub struct GridSolution<T> {
    pub x_lo: T,
    pub dx: T,
    pub cells: usize,
    pub epsilon: T,
    pub times: Vec<T>,
    pub u: Vec<Vec<T>>,
    pub w: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
    pub steps: usize,
    /// Largest `a dt / dx` over all steps.
    pub max_courant: T,
    /// Largest per-step mismatch between the change of the discrete totals
    /// of `u` and `w` and boundary flux plus source.
    pub budget_error: [T; 2],
}

impl<T: Real> GridSolution<T> {
    pub fn x_center(&self, i: usize) -> T {
        self.x_lo + self.dx * (T::of_usize(i) + T::of(0.5))
    }

    /// Writes the snapshot at output `k` as `x_center,u,v,w` rows.
    pub fn write_csv(&self, out: &mut impl Write, k: usize) -> io::Result<()> {
        writeln!(out, "x_center,u,v,w")?;
        for i in 0..self.cells {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.x_center(i).as_f64(),
                self.u[k][i].as_f64(),
                self.v[k][i].as_f64(),
                self.w[k][i].as_f64()
            )?;
        }
        Ok(())
    }
}

// five-point Gauss-Legendre rule on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Averages of `(u, Phi(u, v))` over `[a, b]` lying on one side of 0.
fn piece_average<T: Real>(spec: &ProblemSpec<T>, side: Side, a: T, b: T) -> Result<(T, T), EvalError> {
    let (up, vp) = (spec.initial.u(side), spec.initial.v(side));
    let (mid, half) = ((a + b) * T::of(0.5), (b - a) * T::of(0.5));
    let (mut su, mut sw) = (T::zero(), T::zero());
    for (x, wt) in GL_NODES.iter().zip(GL_WEIGHTS) {
        let x = mid + half * T::of(*x);
        let (u, v) = (up.at(x)?, vp.at(x)?);
        su = su + T::of(wt) * u;
        sw = sw + T::of(wt) * spec.density.at(u, v)?;
    }
    Ok((su * T::of(0.5), sw * T::of(0.5)))
}

fn initial_average<T: Real>(spec: &ProblemSpec<T>, a: T, b: T) -> Result<(T, T), EvalError> {
    let zero = T::zero();
    if b <= zero {
        piece_average(spec, Side::Left, a, b)
    } else if a >= zero {
        piece_average(spec, Side::Right, a, b)
    } else {
        let (ul, wl) = piece_average(spec, Side::Left, a, zero)?;
        let (ur, wr) = piece_average(spec, Side::Right, zero, b)?;
        let (fl, fr) = (-a / (b - a), b / (b - a));
        Ok((ul * fl + ur * fr, wl * fl + wr * fr))
    }
}

/// Solves `W_t + F(W)_x = eps S(W)` for `W = (u, Phi(u, v))` with the
/// Rusanov flux, explicit Euler steps at the configured Courant number and
/// outflow boundaries, recording the state at each of `times`.
pub fn run_reference<T: Real>(spec: &ProblemSpec<T>, times: &[T]) -> Result<GridSolution<T>, ReferenceError> {
    run_reference_on(spec, spec.numerics.fv_cells, times)
}

/// As [`run_reference`] on a grid of `cells` cells.
pub fn run_reference_on<T: Real>(
    spec: &ProblemSpec<T>,
    cells: usize,
    times: &[T],
) -> Result<GridSolution<T>, ReferenceError> {
    let n = cells;
    if n < 4 {
        return Err(ReferenceError::Usage(format!("{n} cells are too few")));
    }
    let zero = T::zero();
    let horizon = spec.horizon;
    let slop = horizon * T::of(1e-12);
    for (i, &t) in times.iter().enumerate() {
        if !(t >= zero && t <= horizon + slop) || i > 0 && t < times[i - 1] {
            return Err(ReferenceError::OutputTime { t: t.as_f64() });
        }
    }
    let eps = spec.epsilon;
    let (x_lo, x_hi) = spec.numerics.fv_domain;
    let dx = (x_hi - x_lo) / T::of_usize(n);
    let cfl = spec.numerics.fv_cfl;
    let dt_min = horizon * T::of(1e-12);

    let mut u = vec![zero; n];
    let mut w = vec![zero; n];
    let mut v = vec![zero; n];
    for i in 0..n {
        let a = x_lo + dx * T::of_usize(i);
        (u[i], w[i]) = initial_average(spec, a, a + dx)?;
        let xc = a + dx * T::of(0.5);
        let side = if xc < zero { Side::Left } else { Side::Right };
        v[i] = spec.initial.v(side).at(xc)?;
    }

    let mut out = GridSolution {
        x_lo,
        dx,
        cells: n,
        epsilon: eps,
        times: Vec::with_capacity(times.len()),
        u: Vec::new(),
        w: Vec::new(),
        v: Vec::new(),
        steps: 0,
        max_courant: zero,
        budget_error: [zero; 2],
    };
    let (mut fu, mut fw, mut speed, mut su, mut sw) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let (mut gu, mut gw) = (vec![zero; n + 1], vec![zero; n + 1]);
    let (lam, mu, phi) = (&spec.lambda, &spec.mu, &spec.density);
    let mut t = zero;
    let mut next = 0;
    loop {
        for i in 0..n {
            v[i] = recover_v(spec, u[i], w[i], v[i]).map_err(|source| ReferenceError::Recovery {
                cell: i,
                t: t.as_f64(),
                source,
            })?;
        }
        while next < times.len() && t >= times[next] - slop {
            out.times.push(times[next]);
            out.u.push(u.clone());
            out.w.push(w.clone());
            out.v.push(v.clone());
            next += 1;
        }
        if next == times.len() {
            break;
        }
        let mut amax = zero;
        for i in 0..n {
            let (ui, vi) = (u[i], v[i]);
            fu[i] = spec.u_flux.at(ui, zero)?;
            fw[i] = spec.density_flux.at(ui, vi)?;
            speed[i] = lam.at(ui, zero)?.abs().max(mu.at(ui, vi)?.abs());
            amax = amax.max(speed[i]);
            let (f, g) = (spec.f.at(ui, vi)?, spec.g.at(ui, vi)?);
            su[i] = f;
            sw[i] = phi.du(ui, vi)? * f + phi.dv(ui, vi)? * g;
        }
        let target = times[next];
        let mut dt = if amax > zero { cfl * dx / amax } else { target - t };
        if t + dt >= target - slop {
            dt = target - t;
        }
        if !(dt >= dt_min) {
            return Err(ReferenceError::StepTooSmall {
                t: t.as_f64(),
                dt: dt.as_f64(),
            });
        }
        let half = T::of(0.5);
        for k in 0..=n {
            let (l, r) = (k.saturating_sub(1), k.min(n - 1));
            let a = speed[l].max(speed[r]);
            gu[k] = half * (fu[l] + fu[r]) - half * a * (u[r] - u[l]);
            gw[k] = half * (fw[l] + fw[r]) - half * a * (w[r] - w[l]);
        }
        let ratio = dt / dx;
        let (mut before, mut after, mut source) = ([zero; 2], [zero; 2], [zero; 2]);
        for i in 0..n {
            before[0] = before[0] + u[i] * dx;
            before[1] = before[1] + w[i] * dx;
            source[0] = source[0] + su[i] * dx;
            source[1] = source[1] + sw[i] * dx;
            u[i] = u[i] - ratio * (gu[i + 1] - gu[i]) + dt * eps * su[i];
            w[i] = w[i] - ratio * (gw[i + 1] - gw[i]) + dt * eps * sw[i];
            after[0] = after[0] + u[i] * dx;
            after[1] = after[1] + w[i] * dx;
        }
        let expect = [
            -dt * (gu[n] - gu[0]) + eps * dt * source[0],
            -dt * (gw[n] - gw[0]) + eps * dt * source[1],
        ];
        for c in 0..2 {
            let miss = (after[c] - before[c] - expect[c]).abs();
            out.budget_error[c] = out.budget_error[c].max(miss);
        }
        out.max_courant = out.max_courant.max(amax * ratio);
        out.steps += 1;
        t = if dt == target - t { target } else { t + dt };
    }
    Ok(out)
}
