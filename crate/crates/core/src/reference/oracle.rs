use rayon::prelude::*;
use serde::Serialize;

use super::{extract_shocks, run_reference_on, GridSolution, ReferenceError};
use crate::expansion::Expansion;
use crate::hugoniot::ShockSide;
use crate::model::ProblemSpec;
use crate::scalar::Real;

/// Shock positions at a list of times.
#[derive(Clone, Debug, PartialEq)]
pub struct ShockTrack<T> {
    pub t: Vec<T>,
    pub minus: Vec<T>,
    pub plus: Vec<T>,
}

impl<T: Real> ShockTrack<T> {
    pub fn from_solution(sol: &GridSolution<T>) -> Result<Self, ReferenceError> {
        let mut track = ShockTrack {
            t: sol.times.clone(),
            minus: Vec::with_capacity(sol.times.len()),
            plus: Vec::with_capacity(sol.times.len()),
        };
        for k in 0..sol.times.len() {
            let (m, p) = extract_shocks(sol, k)?;
            track.minus.push(m);
            track.plus.push(p);
        }
        Ok(track)
    }
}

#[derive(Clone, Debug)]
pub struct OracleRun<T> {
    pub track: ShockTrack<T>,
    /// Estimated error of the tracked positions, zero for closed forms.
    pub grid_error: T,
    /// The finest grid solution, when there is one.
    pub solution: Option<GridSolution<T>>,
}

/// Anything that can produce "true" shock positions for a problem.
pub trait ShockOracle<T>: Sync {
    fn run(&self, spec: &ProblemSpec<T>, times: &[T]) -> Result<OracleRun<T>, ReferenceError>;
}

/// The finite-volume solver on `cells` cells, with a second run on half as
/// many cells to estimate the grid error.
#[derive(Clone, Copy, Debug)]
pub struct FiniteVolume {
    pub cells: usize,
}

impl<T: Real> ShockOracle<T> for FiniteVolume {
    fn run(&self, spec: &ProblemSpec<T>, times: &[T]) -> Result<OracleRun<T>, ReferenceError> {
        let (fine, coarse) = rayon::join(
            || run_reference_on(spec, self.cells, times),
            || run_reference_on(spec, self.cells / 2, times),
        );
        let (fine, coarse) = (fine?, coarse?);
        let track = ShockTrack::from_solution(&fine)?;
        let other = ShockTrack::from_solution(&coarse)?;
        let grid_error = track
            .minus
            .iter()
            .zip(&other.minus)
            .chain(track.plus.iter().zip(&other.plus))
            .fold(T::zero(), |e, (a, b)| e.max((*a - *b).abs()));
        Ok(OracleRun {
            track,
            grid_error,
            solution: Some(fine),
        })
    }
}

/// Closed-form shocks `D (1 - exp(-eps r t)) / (eps r)` of a problem whose
/// shock speeds decay like `exp(-eps r t)`.
#[derive(Clone, Copy, Debug)]
pub struct ExactDamped {
    pub d_minus: f64,
    pub d_plus: f64,
    pub rate: f64,
}

impl ExactDamped {
    pub fn position(&self, speed: f64, eps: f64, t: f64) -> f64 {
        let k = eps * self.rate;
        -speed * (-k * t).exp_m1() / k
    }
}

impl<T: Real> ShockOracle<T> for ExactDamped {
    fn run(&self, spec: &ProblemSpec<T>, times: &[T]) -> Result<OracleRun<T>, ReferenceError> {
        let eps = spec.epsilon.as_f64();
        let at = |d: f64| times.iter().map(|t| T::of(self.position(d, eps, t.as_f64()))).collect();
        Ok(OracleRun {
            track: ShockTrack {
                t: times.to_vec(),
                minus: at(self.d_minus),
                plus: at(self.d_plus),
            },
            grid_error: T::zero(),
            solution: None,
        })
    }
}

/// Errors of the composite shock positions against an oracle run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub epsilon: f64,
    pub e_minus: f64,
    pub e_plus: f64,
    pub e_leading_minus: f64,
    pub e_leading_plus: f64,
    pub grid_error_estimate: f64,
    pub pass: bool,
}

impl Comparison {
    /// Larger of the two shock errors.
    pub fn error(&self) -> f64 {
        self.e_minus.max(self.e_plus)
    }
}

/// Default `C` in the pass bound of [`compare`].
pub const SECOND_ORDER_BOUND: f64 = 4.0;

/// Compares `s0 + eps s1` with the oracle track, time by time. Passes when
/// each composite error is within `max(2 grid_error, c eps^2)`.
pub fn compare<T: Real>(expansion: &Expansion<T>, run: &OracleRun<T>, eps: f64, c: f64) -> Comparison {
    let curve = |side| expansion.first.curve(side);
    let tr = &run.track;
    let worst = |side: ShockSide, xs: &[T], order: f64| {
        tr.t.iter().zip(xs).fold(0.0_f64, |e, (t, x)| {
            let s = curve(side).position(*t, T::of(eps * order));
            e.max((x.as_f64() - s.as_f64()).abs())
        })
    };
    let grid = run.grid_error.as_f64();
    let (e_minus, e_plus) = (worst(ShockSide::Minus, &tr.minus, 1.0), worst(ShockSide::Plus, &tr.plus, 1.0));
    let (l_minus, l_plus) = (worst(ShockSide::Minus, &tr.minus, 0.0), worst(ShockSide::Plus, &tr.plus, 0.0));
    let bound = (2.0 * grid).max(c * eps * eps);
    Comparison {
        epsilon: eps,
        e_minus,
        e_plus,
        e_leading_minus: l_minus,
        e_leading_plus: l_plus,
        grid_error_estimate: grid,
        pass: grid.is_finite() && e_minus <= bound && e_plus <= bound,
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepFailure {
    pub epsilon: f64,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub rows: Vec<Comparison>,
    pub failures: Vec<SweepFailure>,
    pub slope_minus: Option<f64>,
    pub slope_plus: Option<f64>,
    /// Slope of the larger of the two errors.
    pub slope: Option<f64>,
    pub pass: bool,
}

pub const SLOPE_BAND: (f64, f64) = (1.8, 2.2);

/// Output times `T k / n`, `k = 1..=n`.
pub fn output_times<T: Real>(spec: &ProblemSpec<T>) -> Vec<T> {
    let n = spec.numerics.fv_outputs.max(1);
    (1..=n).map(|k| spec.horizon * T::of_usize(k) / T::of_usize(n)).collect()
}

/// Runs the oracle for each `eps` on up to `workers` threads and fits the
/// order of the composite shock error. Members that fail are reported and
/// left out of the fit.
pub fn sweep<T: Real>(
    spec: &ProblemSpec<T>,
    eps: &[f64],
    oracle: &dyn ShockOracle<T>,
    workers: usize,
) -> Result<SweepReport, ReferenceError> {
    if eps.len() < 3 || eps.windows(2).any(|w| !(w[1] < w[0])) || !(eps[eps.len() - 1] > 0.0) {
        return Err(ReferenceError::Usage(
            "the sweep needs at least three positive, strictly decreasing epsilon values".into(),
        ));
    }
    let expansion = Expansion::build(&spec.with_epsilon(eps[0])?)?;
    let times = output_times(spec);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| ReferenceError::Usage(e.to_string()))?;
    let results: Vec<(f64, Result<Comparison, ReferenceError>)> = pool.install(|| {
        eps.par_iter()
            .map(|&e| {
                let row = spec
                    .with_epsilon(e)
                    .map_err(ReferenceError::from)
                    .and_then(|s| oracle.run(&s, &times))
                    .map(|run| compare(&expansion, &run, e, SECOND_ORDER_BOUND));
                (e, row)
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (e, r) in results {
        match r {
            Ok(c) => rows.push(c),
            Err(err) => failures.push(SweepFailure {
                epsilon: e,
                error: err.to_string(),
            }),
        }
    }
    let xs: Vec<f64> = rows.iter().map(|c| c.epsilon).collect();
    let fit = |f: fn(&Comparison) -> f64| fit_slope(&xs, &rows.iter().map(f).collect::<Vec<_>>());
    let slope = fit(Comparison::error);
    let pass = failures.is_empty() && slope.is_some_and(|s| (SLOPE_BAND.0..=SLOPE_BAND.1).contains(&s));
    Ok(SweepReport {
        slope_minus: fit(|c| c.e_minus),
        slope_plus: fit(|c| c.e_plus),
        slope,
        rows,
        failures,
        pass,
    })
}
