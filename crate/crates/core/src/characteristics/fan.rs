use std::io::{self, Write};

use super::locate::{locate, resolve, LocateFail};
use super::{u0_eval_from, Bracket, CharError, Family, Node, Region};
use crate::model::{Profile, ProblemSpec};
use crate::scalar::{hermite, Real};

/// A fan of characteristic curves launched from feet on the initial line,
/// sampled on the marching time grid.
#[derive(Clone, Debug)]
pub struct CharField<T> {
    pub region: Region,
    pub family: Family,
    dt: T,
    steps: usize,
    feet: Vec<T>,
    values: Vec<T>,
    rates: Vec<T>,
    // level-major samples: index = level * curves + curve
    x: Vec<T>,
    xdot: Vec<T>,
    jac: Vec<T>,
    jdot: Vec<T>,
}

/// `v0` at a point with its x-derivative and foot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct V0<T> {
    pub value: T,
    pub slope: T,
    pub foot: T,
}

/// Feet on `[-half_width, half_width]`, clustered geometrically towards the
/// origin. Returns `2 * (count / 2) + 1` points in increasing order.
pub fn fan_feet<T: Real>(half_width: T, count: usize) -> Vec<T> {
    let m = (count / 2).max(1);
    let kappa = 3.0f64;
    let denom = kappa.exp() - 1.0;
    let side: Vec<T> = (1..=m)
        .map(|j| half_width * T::of(((kappa * j as f64 / m as f64).exp() - 1.0) / denom))
        .collect();
    side.iter()
        .rev()
        .map(|&s| -s)
        .chain(std::iter::once(T::zero()))
        .chain(side.iter().copied())
        .collect()
}

impl<T: Real> CharField<T> {
    pub fn curve_count(&self) -> usize {
        self.feet.len()
    }

    pub fn feet(&self) -> &[T] {
        &self.feet
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Value carried by curve `c`.
    pub fn value(&self, c: usize) -> T {
        self.values[c]
    }

    /// Derivative of the initial data at the foot of curve `c`.
    pub fn rate(&self, c: usize) -> T {
        self.rates[c]
    }

    pub fn sample(&self, c: usize, level: usize) -> (T, T) {
        let i = level * self.feet.len() + c;
        (self.x[i], self.jac[i])
    }

    pub fn sample_rates(&self, c: usize, level: usize) -> (T, T) {
        let i = level * self.feet.len() + c;
        (self.xdot[i], self.jdot[i])
    }

    /// Splits `t` into a level index and a fraction of the step.
    pub(crate) fn level_of(&self, t: T) -> Result<(usize, T), CharError> {
        time_level(self.dt, self.steps, t)
    }

    /// Position and Jacobian of curve `c` at time `t`, interpolated with
    /// cubic Hermite polynomials between stored levels.
    pub fn at_time(&self, c: usize, t: T) -> Result<(T, T), CharError> {
        let (k, theta) = self.level_of(t)?;
        Ok(self.at_level(c, k, theta))
    }

    #[inline]
    pub(crate) fn at_level(&self, c: usize, k: usize, theta: T) -> (T, T) {
        let n = self.feet.len();
        let (i0, i1) = (k * n + c, (k + 1).min(self.steps) * n + c);
        if theta == T::zero() || i0 == i1 {
            return (self.x[i0], self.jac[i0]);
        }
        (
            hermite(self.x[i0], self.xdot[i0], self.x[i1], self.xdot[i1], self.dt, theta),
            hermite(self.jac[i0], self.jdot[i0], self.jac[i1], self.jdot[i1], self.dt, theta),
        )
    }

    pub(crate) fn nodes_at(&self, k: usize, theta: T) -> Vec<Node<T>> {
        (0..self.feet.len())
            .map(|c| {
                let (x, j) = self.at_level(c, k, theta);
                Node { p: self.feet[c], x, j }
            })
            .collect()
    }

    /// Finds the foot of the curve through `(x, t)`. `shoot` traces one
    /// additional curve from a given foot to `t` when adjacent curves are
    /// too far apart to interpolate.
    pub(crate) fn find(
        &self,
        x: T,
        t: T,
        shoot: Option<&dyn Fn(T, T) -> Result<(T, T), CharError>>,
    ) -> Result<Bracket<T>, CharError> {
        let (k, theta) = self.level_of(t)?;
        let nodes = self.nodes_at(k, theta);
        let (xf, tf) = (x.as_f64(), t.as_f64());
        match locate(&nodes, x, T::zero()) {
            Ok(b) => Ok(b),
            Err(LocateFail::OutOfHull) => Err(CharError::OutOfHull { x: xf, t: tf }),
            Err(LocateFail::Fold(_)) => Err(CharError::Focusing { x: xf, t: tf }),
            Err(LocateFail::Coarse(lo)) => {
                let shoot = shoot.ok_or(CharError::TooCoarse { x: xf, t: tf })?;
                let (a, b) = (nodes[lo], nodes[lo + 1]);
                let p = (a.p + b.p) * T::of(0.5);
                let (xm, jm) = shoot(p, t)?;
                let mid = Node { p, x: xm, j: jm };
                let (a, b) = if x <= xm { (a, mid) } else { (mid, b) };
                let found = resolve(a, b, x).map_err(|f| match f {
                    LocateFail::Fold(_) => CharError::Focusing { x: xf, t: tf },
                    _ => CharError::TooCoarse { x: xf, t: tf },
                })?;
                // express the fraction relative to the original pair
                let theta = (found.p - nodes[lo].p) / (nodes[lo + 1].p - nodes[lo].p);
                Ok(Bracket { lo, theta, ..found })
            }
        }
    }

    /// Writes every `stride`-th level as CSV rows
    /// `region,family,xi,t,x,J,value`.
    pub fn write_csv(&self, out: &mut impl Write, stride: usize, header: bool) -> io::Result<()> {
        if header {
            writeln!(out, "region,family,xi,t,x,J,value")?;
        }
        let stride = stride.max(1);
        let mut levels: Vec<usize> = (0..=self.steps).step_by(stride).collect();
        if levels.last() != Some(&self.steps) {
            levels.push(self.steps);
        }
        for c in 0..self.feet.len() {
            for &k in &levels {
                let (x, j) = self.sample(c, k);
                writeln!(
                    out,
                    "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    self.region.name(),
                    self.family.name(),
                    self.feet[c].as_f64(),
                    (self.dt * T::of_usize(k)).as_f64(),
                    x.as_f64(),
                    j.as_f64(),
                    self.values[c].as_f64(),
                )?;
            }
        }
        Ok(())
    }
}

pub(crate) fn time_level<T: Real>(dt: T, steps: usize, t: T) -> Result<(usize, T), CharError> {
    let horizon = dt * T::of_usize(steps);
    let slop = dt * T::of(1e-9);
    if !(t >= -slop && t <= horizon + slop) {
        return Err(CharError::TimeOutOfRange { t: t.as_f64() });
    }
    let r = (t / dt).max(T::zero());
    let k = r.floor().to_usize().unwrap_or(0).min(steps.saturating_sub(1));
    let theta = (r - T::of_usize(k)).max(T::zero()).min(T::one());
    Ok((k, theta))
}

fn outer(region: Region) -> Result<(), CharError> {
    match region {
        Region::Inner => Err(CharError::OutOfHull { x: f64::NAN, t: f64::NAN }),
        _ => Ok(()),
    }
}

/// Straight u-characteristics from feet spanning the fan spread.
pub fn build_u_fan<T: Real>(spec: &ProblemSpec<T>, region: Region) -> Result<CharField<T>, CharError> {
    outer(region)?;
    let piece = spec.initial.u(region.u_side());
    let feet = fan_feet(spec.fan_spread()?, spec.numerics.fan_count);
    let (steps, dt) = spec.time_grid();
    let n = feet.len();
    let zero = T::zero();
    let mut values = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    let mut speeds = Vec::with_capacity(n);
    let mut stretch = Vec::with_capacity(n);
    for &xi in &feet {
        let (u, du) = (piece.at(xi)?, piece.slope(xi)?);
        values.push(u);
        rates.push(du);
        speeds.push(spec.lambda.at(u, zero)?);
        stretch.push(spec.lambda.du(u, zero)? * du);
    }
    let len = (steps + 1) * n;
    let mut field = CharField {
        region,
        family: Family::U,
        dt,
        steps,
        x: Vec::with_capacity(len),
        xdot: Vec::with_capacity(len),
        jac: Vec::with_capacity(len),
        jdot: Vec::with_capacity(len),
        feet,
        values,
        rates,
    };
    for k in 0..=steps {
        let t = dt * T::of_usize(k);
        for c in 0..n {
            let j = T::one() + t * stretch[c];
            if j <= zero {
                return Err(CharError::Focusing {
                    x: (field.feet[c] + speeds[c] * t).as_f64(),
                    t: t.as_f64(),
                });
            }
            field.x.push(field.feet[c] + speeds[c] * t);
            field.xdot.push(speeds[c]);
            field.jac.push(j);
            field.jdot.push(stretch[c]);
        }
    }
    Ok(field)
}

/// Right-hand side of the v-characteristic and its variational equation.
struct VCurve<'a, T> {
    spec: &'a ProblemSpec<T>,
    region: Region,
    v: T,
    rate: T,
}

impl<T: Real> VCurve<'_, T> {
    fn rhs(&self, t: T, x: T, j: T, guess: &mut T) -> Result<(T, T), CharError> {
        let u0 = u0_eval_from(self.spec, self.region, x, t, *guess)?;
        *guess = u0.foot;
        let mu = &self.spec.mu;
        let speed = mu.at(u0.value, self.v)?;
        let dj = mu.du(u0.value, self.v)? * u0.slope * j + mu.dv(u0.value, self.v)? * self.rate;
        Ok((speed, dj))
    }

    fn rk4(&self, t: T, dt: T, (x, j): (T, T), guess: &mut T) -> Result<(T, T), CharError> {
        let half = dt * T::of(0.5);
        let (a1, b1) = self.rhs(t, x, j, guess)?;
        let (a2, b2) = self.rhs(t + half, x + half * a1, j + half * b1, guess)?;
        let (a3, b3) = self.rhs(t + half, x + half * a2, j + half * b2, guess)?;
        let (a4, b4) = self.rhs(t + dt, x + dt * a3, j + dt * b3, guess)?;
        let sixth = dt / T::of(6.0);
        let two = T::of(2.0);
        Ok((
            x + sixth * (a1 + two * a2 + two * a3 + a4),
            j + sixth * (b1 + two * b2 + two * b3 + b4),
        ))
    }
}

fn v_curve<'a, T: Real>(
    spec: &'a ProblemSpec<T>,
    region: Region,
    piece: &Profile<T>,
    xi: T,
) -> Result<VCurve<'a, T>, CharError> {
    Ok(VCurve {
        spec,
        region,
        v: piece.at(xi)?,
        rate: piece.slope(xi)?,
    })
}

/// Traces one v-characteristic from foot `xi` to time `t` on the grid of
/// step `dt`, finishing with a partial step.
fn shoot_v<T: Real>(spec: &ProblemSpec<T>, region: Region, dt: T, xi: T, t: T) -> Result<(T, T), CharError> {
    let curve = v_curve(spec, region, spec.initial.v(region.u_side()), xi)?;
    let mut state = (xi, T::one());
    let mut guess = xi;
    let mut now = T::zero();
    while now + dt <= t {
        state = curve.rk4(now, dt, state, &mut guess)?;
        now = now + dt;
    }
    if t > now {
        state = curve.rk4(now, t - now, state, &mut guess)?;
    }
    Ok(state)
}

/// Traces the v-characteristics of `region` forward by classical RK4.
pub fn build_v_fan<T: Real>(spec: &ProblemSpec<T>, region: Region) -> Result<CharField<T>, CharError> {
    outer(region)?;
    let piece = spec.initial.v(region.u_side());
    let feet = fan_feet(T::of(2.0) * spec.fan_spread()?, spec.numerics.fan_count);
    let (steps, dt) = spec.time_grid();
    let n = feet.len();
    let curves = feet
        .iter()
        .map(|&xi| v_curve(spec, region, piece, xi))
        .collect::<Result<Vec<_>, _>>()?;
    let len = (steps + 1) * n;
    let mut field = CharField {
        region,
        family: Family::V,
        dt,
        steps,
        values: curves.iter().map(|c| c.v).collect(),
        rates: curves.iter().map(|c| c.rate).collect(),
        x: Vec::with_capacity(len),
        xdot: Vec::with_capacity(len),
        jac: Vec::with_capacity(len),
        jdot: Vec::with_capacity(len),
        feet: feet.clone(),
    };
    let mut state: Vec<(T, T)> = feet.iter().map(|&xi| (xi, T::one())).collect();
    let mut guess = feet.clone();
    for k in 0..=steps {
        let t = dt * T::of_usize(k);
        for c in 0..n {
            let (x, j) = state[c];
            if j <= T::zero() {
                return Err(CharError::Focusing { x: x.as_f64(), t: t.as_f64() });
            }
            let (xd, jd) = curves[c].rhs(t, x, j, &mut guess[c])?;
            field.x.push(x);
            field.jac.push(j);
            field.xdot.push(xd);
            field.jdot.push(jd);
            if c > 0 && x <= field.x[field.x.len() - 2] {
                return Err(CharError::Focusing { x: x.as_f64(), t: t.as_f64() });
            }
        }
        if k < steps {
            for c in 0..n {
                state[c] = curves[c].rk4(t, dt, state[c], &mut guess[c])?;
            }
        }
    }
    Ok(field)
}

/// A v-fan frozen at one time, for repeated lookups.
pub(crate) struct Snapshot<'a, T> {
    spec: &'a ProblemSpec<T>,
    fan: &'a CharField<T>,
    t: T,
    nodes: Vec<Node<T>>,
    constant: Option<T>,
}

impl<'a, T: Real> Snapshot<'a, T> {
    pub fn new(spec: &'a ProblemSpec<T>, fan: &'a CharField<T>, t: T) -> Result<Self, CharError> {
        let (k, theta) = fan.level_of(t)?;
        let constant = match fan.family {
            Family::V => spec.initial.v(fan.region.u_side()).constant(),
            Family::U => spec.initial.u(fan.region.u_side()).constant(),
        };
        Ok(Snapshot {
            spec,
            fan,
            t,
            nodes: fan.nodes_at(k, theta),
            constant,
        })
    }

    pub fn find(&self, x: T) -> Result<Bracket<T>, CharError> {
        let (xf, tf) = (x.as_f64(), self.t.as_f64());
        match locate(&self.nodes, x, T::zero()) {
            Ok(b) => Ok(b),
            Err(LocateFail::OutOfHull) => Err(CharError::OutOfHull { x: xf, t: tf }),
            Err(LocateFail::Fold(_)) => Err(CharError::Focusing { x: xf, t: tf }),
            Err(LocateFail::Coarse(_)) => self.fan.find(x, self.t, Some(&|xi, t| {
                shoot_v(self.spec, self.fan.region, self.fan.dt, xi, t)
            })),
        }
    }

    /// `(v0, v0_x)` at `x`, skipping the lookup for constant data.
    pub fn v0(&self, x: T) -> Result<(T, T), CharError> {
        if let Some(c) = self.constant {
            let (lo, hi) = (self.nodes[0].x, self.nodes[self.nodes.len() - 1].x);
            if x < lo || x > hi {
                return Err(CharError::OutOfHull { x: x.as_f64(), t: self.t.as_f64() });
            }
            return Ok((c, T::zero()));
        }
        let b = self.find(x)?;
        let piece = self.spec.initial.v(self.fan.region.u_side());
        Ok((piece.at(b.p)?, piece.slope(b.p)? / b.j))
    }
}

/// Evaluates `v0` from a v-fan at `(x, t)`.
pub fn v0_eval<T: Real>(spec: &ProblemSpec<T>, fan: &CharField<T>, x: T, t: T) -> Result<V0<T>, CharError> {
    let shoot = |xi: T, t: T| shoot_v(spec, fan.region, fan.dt, xi, t);
    let b = fan.find(x, t, Some(&shoot))?;
    let piece = spec.initial.v(fan.region.u_side());
    Ok(V0 {
        value: piece.at(b.p)?,
        slope: piece.slope(b.p)? / b.j,
        foot: b.p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::DECOUPLED;
    use crate::model::load_spec;

    fn spec_with(pairs: &[(&str, &str)]) -> ProblemSpec<f64> {
        let mut text = DECOUPLED.to_string();
        for (from, to) in pairs {
            assert!(text.contains(from), "{from}");
            text = text.replace(from, to);
        }
        load_spec(&text).unwrap()
    }

    #[test]
    fn feet_are_symmetric_and_clustered() {
        let feet = fan_feet(3.0f64, 16);
        assert_eq!(feet.len(), 17);
        assert_eq!(feet[8], 0.0);
        assert_eq!(feet[0], -3.0);
        assert!((feet[16] - 3.0).abs() < 1e-15);
        assert!(feet[9] - feet[8] < feet[16] - feet[15]);
        assert!(feet.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn constant_left_state_gives_straight_curves() {
        let spec: ProblemSpec<f64> = load_spec(DECOUPLED).unwrap();
        let fan = build_v_fan(&spec, Region::OuterLeft).unwrap();
        let (k, t) = (fan.steps(), 0.5);
        for c in 0..fan.curve_count() {
            let (x, j) = fan.sample(c, k);
            assert!((x - (fan.feet()[c] + 3.0 * t)).abs() < 1e-12);
            assert_eq!(j, 1.0);
        }
        let r = v0_eval(&spec, &fan, 0.4, 0.3).unwrap();
        assert_eq!((r.value, r.slope), (3.0, 0.0));
    }

    #[test]
    fn coupled_constant_coefficients() {
        let spec = spec_with(&[
            ("\"mu\": \"v\"", "\"mu\": \"2*u+v\""),
            ("\"u_right\": \"0\"", "\"u_right\": \"1\""),
            ("\"v_right\": \"2\"", "\"v_right\": \"0.5\""),
        ]);
        let fan = build_v_fan(&spec, Region::OuterRight).unwrap();
        for c in 0..fan.curve_count() {
            let (x, j) = fan.sample(c, fan.steps());
            assert!((x - (fan.feet()[c] + 2.5 * 0.5)).abs() < 1e-12);
            assert_eq!(j, 1.0);
        }
    }

    #[test]
    fn linear_data_spreads() {
        let spec = spec_with(&[("\"v_right\": \"2\"", "\"v_right\": \"2+x\"")]);
        let fan = build_v_fan(&spec, Region::OuterRight).unwrap();
        let t = 0.5;
        for c in 0..fan.curve_count() {
            let xi = fan.feet()[c];
            let (x, j) = fan.sample(c, fan.steps());
            assert!((x - (xi + (2.0 + xi) * t)).abs() < 1e-12);
            assert!((j - (1.0 + t)).abs() < 1e-12);
        }
        for (x, t) in [(1.3, 0.5), (0.2, 0.137), (2.9, 0.41)] {
            let r = v0_eval(&spec, &fan, x, t).unwrap();
            assert!((r.value - (2.0 + (x - 2.0 * t) / (1.0 + t))).abs() < 1e-12);
            assert!((r.slope - 1.0 / (1.0 + t)).abs() < 1e-12);
        }
    }

    #[test]
    fn out_of_hull_and_time() {
        let spec: ProblemSpec<f64> = load_spec(DECOUPLED).unwrap();
        let fan = build_v_fan(&spec, Region::OuterLeft).unwrap();
        let (_, right) = fan.sample(fan.curve_count() - 1, fan.steps());
        let edge = fan.sample(fan.curve_count() - 1, fan.steps()).0;
        assert!(right > 0.0);
        assert!(matches!(
            v0_eval(&spec, &fan, edge + 1.0, 0.5),
            Err(CharError::OutOfHull { .. })
        ));
        assert!(matches!(
            v0_eval(&spec, &fan, 0.0, 0.6),
            Err(CharError::TimeOutOfRange { .. })
        ));
    }

    #[test]
    fn u_fan_matches_closed_form() {
        let spec = spec_with(&[("\"u_right\": \"0\"", "\"u_right\": \"x\"")]);
        let fan = build_u_fan(&spec, Region::OuterRight).unwrap();
        let t = 0.5;
        for c in 0..fan.curve_count() {
            let xi = fan.feet()[c];
            let (x, j) = fan.sample(c, fan.steps());
            assert!((x - xi * (1.0 + t)).abs() < 1e-14);
            assert!((j - (1.0 + t)).abs() < 1e-14);
        }
    }

    #[test]
    fn csv_dump_has_one_row_per_sample() {
        let spec: ProblemSpec<f64> = load_spec(DECOUPLED).unwrap();
        let fan = build_v_fan(&spec, Region::OuterLeft).unwrap();
        let mut buf = Vec::new();
        fan.write_csv(&mut buf, 100, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + fan.curve_count() * 6);
        assert!(text.lines().nth(1).unwrap().starts_with("outer_left,v,"));
    }
}
