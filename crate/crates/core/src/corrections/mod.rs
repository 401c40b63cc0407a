//! First-order corrections `u1`, `v1`: linear transport along the
//! characteristics of the leading-order fields.

mod inner;

pub use inner::{InnerCurve, InnerFan, InnerFields};
pub(crate) use inner::{BoundaryNode, Kinematics, View};

use std::sync::Arc;

use crate::characteristics::{
    build_u_fan, build_v_fan, locate, u0_eval_from, Bracket, CharError, CharField, Family,
    LocateFail, Node, Region, Snapshot,
};
use crate::model::ProblemSpec;
use crate::scalar::{hermite, Real};

/// Leading-order fans of one outer region.
#[derive(Clone, Debug)]
pub struct OuterLeading<T> {
    pub region: Region,
    pub u_fan: Arc<CharField<T>>,
    pub v_fan: Arc<CharField<T>>,
}

pub fn build_leading<T: Real>(spec: &ProblemSpec<T>, region: Region) -> Result<OuterLeading<T>, CharError> {
    Ok(OuterLeading {
        region,
        u_fan: Arc::new(build_u_fan(spec, region)?),
        v_fan: Arc::new(build_v_fan(spec, region)?),
    })
}

/// A correction carried along the curves of a leading-order fan. Curves that
/// leave the domain where their coefficients are known hold `NaN` from then
/// on.
#[derive(Clone, Debug)]
pub struct CorrectionField<T> {
    pub region: Region,
    pub family: Family,
    geometry: Arc<CharField<T>>,
    w: Vec<T>,
    wdot: Vec<T>,
}

impl<T: Real> CorrectionField<T> {
    pub fn geometry(&self) -> &CharField<T> {
        &self.geometry
    }

    /// Stored correction on curve `c` at time level `k`.
    pub fn sample(&self, c: usize, k: usize) -> T {
        self.w[k * self.geometry.curve_count() + c]
    }

    #[inline]
    fn at_level(&self, c: usize, k: usize, theta: T) -> T {
        let n = self.geometry.curve_count();
        let (i0, i1) = (k * n + c, (k + 1).min(self.geometry.steps()) * n + c);
        if theta == T::zero() || i0 == i1 {
            return self.w[i0];
        }
        hermite(self.w[i0], self.wdot[i0], self.w[i1], self.wdot[i1], self.geometry.dt(), theta)
    }

    /// Correction at `(x, t)`: the carrying curve is found from the fan
    /// geometry and values are interpolated in the foot.
    pub fn eval(&self, x: T, t: T) -> Result<T, CharError> {
        self.snapshot(t)?.eval(x)
    }

    pub(crate) fn snapshot(&self, t: T) -> Result<CorrectionSnapshot<'_, T>, CharError> {
        let (k, theta) = self.geometry.level_of(t)?;
        let n = self.geometry.curve_count();
        Ok(CorrectionSnapshot {
            field: self,
            t,
            nodes: self.geometry.nodes_at(k, theta),
            values: (0..n).map(|c| self.at_level(c, k, theta)).collect(),
        })
    }

    /// Writes every `stride`-th level as CSV rows
    /// `region,family,xi,t,x,J,value`.
    pub fn write_csv(&self, out: &mut impl std::io::Write, stride: usize, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "region,family,xi,t,x,J,value")?;
        }
        let g = &self.geometry;
        let stride = stride.max(1);
        let mut levels: Vec<usize> = (0..=g.steps()).step_by(stride).collect();
        if levels.last() != Some(&g.steps()) {
            levels.push(g.steps());
        }
        for c in 0..g.curve_count() {
            for &k in &levels {
                let (x, j) = g.sample(c, k);
                writeln!(
                    out,
                    "{},{}1,{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    self.region.name(),
                    self.family.name(),
                    g.feet()[c].as_f64(),
                    (g.dt() * T::of_usize(k)).as_f64(),
                    x.as_f64(),
                    j.as_f64(),
                    self.sample(c, k).as_f64(),
                )?;
            }
        }
        Ok(())
    }
}

/// A correction field frozen at one time.
pub(crate) struct CorrectionSnapshot<'a, T> {
    field: &'a CorrectionField<T>,
    t: T,
    nodes: Vec<Node<T>>,
    values: Vec<T>,
}

impl<T: Real> CorrectionSnapshot<'_, T> {
    pub fn eval(&self, x: T) -> Result<T, CharError> {
        let (xf, tf) = (x.as_f64(), self.t.as_f64());
        let b: Bracket<T> = match locate(&self.nodes, x, T::zero()) {
            Ok(b) => b,
            Err(LocateFail::OutOfHull) => return Err(CharError::OutOfHull { x: xf, t: tf }),
            Err(LocateFail::Fold(_)) => return Err(CharError::Focusing { x: xf, t: tf }),
            Err(LocateFail::Coarse(lo)) => {
                let (a, c) = (self.nodes[lo], self.nodes[lo + 1]);
                let theta = (x - a.x) / (c.x - a.x);
                Bracket { lo, theta, p: a.p + (c.p - a.p) * theta, j: (c.x - a.x) / (c.p - a.p) }
            }
        };
        let value = self
            .cubic(b.lo, b.p)
            .unwrap_or_else(|| b.blend(self.values[b.lo], self.values[b.lo + 1]));
        if value.is_finite() {
            Ok(value)
        } else {
            let _ = self.field;
            Err(CharError::OutOfHull { x: xf, t: tf })
        }
    }

    /// Lagrange cubic in the foot through curves `lo-1..=lo+2`, when all four
    /// exist and carry finite values.
    fn cubic(&self, lo: usize, p: T) -> Option<T> {
        if lo == 0 || lo + 2 >= self.nodes.len() {
            return None;
        }
        let idx = [lo - 1, lo, lo + 1, lo + 2];
        if idx.iter().any(|&i| !self.values[i].is_finite()) {
            return None;
        }
        let mut sum = T::zero();
        for &i in &idx {
            let mut w = T::one();
            for &j in &idx {
                if j != i {
                    w = w * (p - self.nodes[j].p) / (self.nodes[i].p - self.nodes[j].p);
                }
            }
            sum = sum + w * self.values[i];
        }
        sum.is_finite().then_some(sum)
    }
}

fn rk4_scalar<T: Real, E>(
    dt: T,
    w: T,
    mut rhs: impl FnMut(usize, T) -> Result<T, E>,
) -> Result<T, E> {
    let half = dt * T::of(0.5);
    let k1 = rhs(0, w)?;
    let k2 = rhs(1, w + half * k1)?;
    let k3 = rhs(1, w + half * k2)?;
    let k4 = rhs(2, w + dt * k3)?;
    Ok(w + dt / T::of(6.0) * (k1 + T::of(2.0) * (k2 + k3) + k4))
}

/// Integrates `u1` along the straight u-characteristics of an outer region
/// with zero initial data.
pub fn build_u1<T: Real>(spec: &ProblemSpec<T>, leading: &OuterLeading<T>) -> Result<CorrectionField<T>, CharError> {
    let fan = &leading.u_fan;
    let (n, steps, dt) = (fan.curve_count(), fan.steps(), fan.dt());
    let zero = T::zero();
    let slopes: Vec<T> = (0..n)
        .map(|c| Ok(spec.lambda.du(fan.value(c), zero)?))
        .collect::<Result<_, CharError>>()?;
    // rhs of one curve at stage time index s (0: t_k, 1: midpoint, 2: t_k+1)
    let rhs = |snap: &Snapshot<'_, T>, c: usize, k: usize, theta: T, w: T| -> Result<T, CharError> {
        let (x, j) = fan.at_level(c, k, theta);
        let u0 = fan.value(c);
        let u0x = fan.rate(c) / j;
        let (v0, _) = snap.v0(x)?;
        Ok(-slopes[c] * u0x * w + spec.f.at(u0, v0)?)
    };
    let mut w = vec![zero; n];
    let mut out = CorrectionField {
        region: leading.region,
        family: Family::U,
        geometry: Arc::clone(fan),
        w: Vec::with_capacity((steps + 1) * n),
        wdot: Vec::with_capacity((steps + 1) * n),
    };
    let mut now = Snapshot::new(spec, &leading.v_fan, zero)?;
    for k in 0..=steps {
        let t = dt * T::of_usize(k);
        let kk = k.min(steps - 1);
        let th = if k == steps { T::one() } else { zero };
        for c in 0..n {
            out.w.push(w[c]);
            out.wdot.push(rhs(&now, c, kk, th, w[c])?);
        }
        if k == steps {
            break;
        }
        let mid = Snapshot::new(spec, &leading.v_fan, t + dt * T::of(0.5))?;
        let next = Snapshot::new(spec, &leading.v_fan, t + dt)?;
        for c in 0..n {
            let first = out.wdot[k * n + c];
            w[c] = rk4_scalar(dt, w[c], |stage, wv| match stage {
                0 => Ok(first),
                1 => rhs(&mid, c, k, T::of(0.5), wv),
                _ => rhs(&next, c, k, T::one(), wv),
            })?;
        }
        now = next;
    }
    Ok(out)
}

/// Integrates `v1` along the v-characteristics of an outer region with zero
/// initial data, reading `u1` from `u1`.
pub fn build_v1<T: Real>(
    spec: &ProblemSpec<T>,
    leading: &OuterLeading<T>,
    u1: &CorrectionField<T>,
) -> Result<CorrectionField<T>, CharError> {
    let fan = &leading.v_fan;
    let region = leading.region;
    let (n, steps, dt) = (fan.curve_count(), fan.steps(), fan.dt());
    let zero = T::zero();
    let nan = T::nan();
    let mut guess: Vec<T> = fan.feet().to_vec();
    let mut rhs = |snap: &CorrectionSnapshot<'_, T>, c: usize, k: usize, theta: T, t: T, w: T| -> Result<T, CharError> {
        let (x, j) = fan.at_level(c, k, theta);
        let u0 = u0_eval_from(spec, region, x, t, guess[c])?;
        guess[c] = u0.foot;
        let v0 = fan.value(c);
        let v0x = fan.rate(c) / j;
        let mu = &spec.mu;
        let source = spec.g.at(u0.value, v0)?;
        if v0x == zero {
            return Ok(source);
        }
        let u1 = snap.eval(x)?;
        Ok(-mu.dv(u0.value, v0)? * v0x * w - mu.du(u0.value, v0)? * v0x * u1 + source)
    };
    let mut w = vec![zero; n];
    let mut out = CorrectionField {
        region,
        family: Family::V,
        geometry: Arc::clone(fan),
        w: Vec::with_capacity((steps + 1) * n),
        wdot: Vec::with_capacity((steps + 1) * n),
    };
    let mut now = u1.snapshot(zero)?;
    for k in 0..=steps {
        let t = dt * T::of_usize(k);
        let kk = k.min(steps - 1);
        let th = if k == steps { T::one() } else { zero };
        for c in 0..n {
            let d = if w[c].is_finite() {
                rhs(&now, c, kk, th, t, w[c]).unwrap_or(nan)
            } else {
                nan
            };
            if !d.is_finite() {
                w[c] = nan;
            }
            out.w.push(w[c]);
            out.wdot.push(d);
        }
        if k == steps {
            break;
        }
        let half = dt * T::of(0.5);
        let mid = u1.snapshot(t + half)?;
        let next = u1.snapshot(t + dt)?;
        for c in 0..n {
            if !w[c].is_finite() {
                continue;
            }
            let first = out.wdot[k * n + c];
            let stepped = rk4_scalar(dt, w[c], |stage, wv| match stage {
                0 => Ok(first),
                1 => rhs(&mid, c, k, T::of(0.5), t + half, wv),
                _ => rhs(&next, c, k, T::one(), t + dt, wv),
            });
            w[c] = stepped.unwrap_or(nan);
        }
        now = next;
    }
    Ok(out)
}

/// Leading fans and first-order corrections of one outer region.
#[derive(Clone, Debug)]
pub struct OuterFields<T> {
    pub leading: OuterLeading<T>,
    pub u1: CorrectionField<T>,
    pub v1: CorrectionField<T>,
}

pub fn build_outer<T: Real>(spec: &ProblemSpec<T>, region: Region) -> Result<OuterFields<T>, CharError> {
    let leading = build_leading(spec, region)?;
    let u1 = build_u1(spec, &leading)?;
    let v1 = build_v1(spec, &leading, &u1)?;
    Ok(OuterFields { leading, u1, v1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{COUPLED, DECOUPLED};
    use crate::model::load_spec;

    #[test]
    fn damped_constant_states() {
        let spec: ProblemSpec<f64> = load_spec(DECOUPLED).unwrap();
        for (region, u0, v0) in [(Region::OuterLeft, 1.0, 3.0), (Region::OuterRight, 0.0, 2.0)] {
            let f = build_outer(&spec, region).unwrap();
            for (x, t) in [(0.0, 0.4), (0.3, 0.5), (-0.2, 0.01)] {
                assert!((f.u1.eval(x, t).unwrap() + t * u0).abs() < 1e-12);
                assert!((f.v1.eval(x, t).unwrap() + t * v0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_sources_give_zero_corrections() {
        let text = COUPLED
            .replace("\"f\": \"-u+0.2*v\"", "\"f\": \"0\"")
            .replace("\"g\": \"-v+0.5*u*u\"", "\"g\": \"0\"");
        let spec: ProblemSpec<f64> = load_spec(&text).unwrap();
        let f = build_outer(&spec, Region::OuterLeft).unwrap();
        assert_eq!(f.u1.eval(0.1, 0.3).unwrap(), 0.0);
        assert_eq!(f.v1.eval(0.1, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn scaling_sources_scales_corrections() {
        let text = DECOUPLED
            .replace("\"u_left\": \"1\"", "\"u_left\": \"1+0.1*sin(x)\"")
            .replace("\"mu\": \"v\"", "\"mu\": \"v+0.1*u\"")
            .replace("\"Psi\": \"v^2/2\"", "\"Psi\": \"v^2/2+0.1*u*v\"")
            .replace("\"v_left\": \"3\"", "\"v_left\": \"3+0.2*x\"");
        let spec: ProblemSpec<f64> = load_spec(&text).unwrap();
        let twice = spec.with_scaled_sources(2.0).unwrap();
        let a = build_outer(&spec, Region::OuterLeft).unwrap();
        let b = build_outer(&twice, Region::OuterLeft).unwrap();
        for (x, t) in [(0.0, 0.4), (-0.3, 0.25)] {
            let (u, v) = (a.u1.eval(x, t).unwrap(), a.v1.eval(x, t).unwrap());
            assert!((b.u1.eval(x, t).unwrap() - 2.0 * u).abs() <= 1e-12 * u.abs().max(1e-300));
            assert!((b.v1.eval(x, t).unwrap() - 2.0 * v).abs() <= 1e-12 * v.abs().max(1e-300));
            assert!(u.abs() > 1e-3 && v.abs() > 1e-3);
        }
    }
}
