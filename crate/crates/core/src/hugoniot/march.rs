//! Time march of the shock curves together with the inner fans.
//!
//! One step advances, in order: the inner v-curves, a new v-curve launched
//! from the minus shock, the plus shock, the inner u-curves and the inner
//! first-order `v1`. The first-order jump conditions are then solved at the
//! new level as a chain (inner `u1` on the plus shock, inner `u1` on the
//! minus shock from the u-fan, `D1-`, inner `v1` on the minus shock, inner
//! `v1` on the plus shock from the v-fan, `D1+`), inside a Heun step for
//! `s1`.

use std::collections::VecDeque;

use super::curve::ShockCurve;
use super::jump::{inner_v_state_from, GUARD};
use super::traces::{
    step1_inner_u1_boundary, step3_d1_minus, step4_inner_v1_boundary, step6_d1_plus, OneSided, ShockSide, TraceSet,
};
use super::{density_shock_speed, u_shock_speed, HugoniotError};
use crate::characteristics::{u0_eval, u0_eval_from, v0_eval, CharError, CharField, Family, Region, Snapshot, U0};
use crate::corrections::{
    BoundaryNode, InnerCurve, InnerFan, InnerFields, Kinematics, OuterFields, OuterLeading, View,
};
use crate::model::ProblemSpec;
use crate::scalar::{hermite, Real};

/// Leading-order shock curves; first-order entries are zero.
#[derive(Clone, Debug)]
pub struct LeadingShocks<T> {
    pub minus: ShockCurve<T>,
    pub plus: ShockCurve<T>,
}

/// Result of the first-order march.
#[derive(Clone, Debug)]
pub struct FirstOrder<T> {
    pub minus: ShockCurve<T>,
    pub plus: ShockCurve<T>,
    pub inner: InnerFields<T>,
    traces_minus: Vec<TraceSet<T>>,
    traces_plus: Vec<TraceSet<T>>,
}

impl<T: Real> FirstOrder<T> {
    /// Traces at time level `k`.
    pub fn traces(&self, side: ShockSide, k: usize) -> Option<&TraceSet<T>> {
        match side {
            ShockSide::Minus => self.traces_minus.get(k),
            ShockSide::Plus => self.traces_plus.get(k),
        }
    }

    pub fn levels(&self) -> usize {
        self.traces_minus.len()
    }

    pub fn curve(&self, side: ShockSide) -> &ShockCurve<T> {
        match side {
            ShockSide::Minus => &self.minus,
            ShockSide::Plus => &self.plus,
        }
    }
}

trait Context<V> {
    fn ctx(self, stage: &'static str, step: usize, t: f64) -> Result<V, HugoniotError>;
}

impl<V, E: Into<HugoniotError>> Context<V> for Result<V, E> {
    fn ctx(self, stage: &'static str, step: usize, t: f64) -> Result<V, HugoniotError> {
        self.map_err(|e| HugoniotError::March {
            step,
            t,
            stage,
            source: Box::new(e.into()),
        })
    }
}

fn minus_speed<T: Real>(spec: &ProblemSpec<T>, s: T, t: T) -> Result<T, HugoniotError> {
    let ul = u0_eval(spec, Region::OuterLeft, s, t)?;
    let ui = u0_eval(spec, Region::Inner, s, t)?;
    u_shock_speed(spec, ul.value, ui.value, t)
}

/// The minus shock depends on `u` alone and is integrated up front.
fn integrate_minus<T: Real>(spec: &ProblemSpec<T>, dt: T, steps: usize) -> Result<ShockCurve<T>, HugoniotError> {
    let mut curve = ShockCurve::new(ShockSide::Minus, dt, steps);
    let half = dt * T::of(0.5);
    let (mut s, mut d) = (T::zero(), minus_speed(spec, T::zero(), T::zero()).ctx("minus shock", 0, 0.0)?);
    for k in 0..=steps {
        curve.s0.push(s);
        curve.d0.push(d);
        curve.s1.push(T::zero());
        curve.d1.push(T::zero());
        if k == steps {
            break;
        }
        let t = dt * T::of_usize(k);
        let tf = t.as_f64();
        let k2 = minus_speed(spec, s + half * d, t + half).ctx("minus shock", k, tf)?;
        let k3 = minus_speed(spec, s + half * k2, t + half).ctx("minus shock", k, tf)?;
        let k4 = minus_speed(spec, s + dt * k3, t + dt).ctx("minus shock", k, tf)?;
        s = s + dt / T::of(6.0) * (d + T::of(2.0) * (k2 + k3) + k4);
        d = minus_speed(spec, s, t + dt).ctx("minus shock", k + 1, (t + dt).as_f64())?;
    }
    Ok(curve)
}

/// Everything known on the minus shock at one time, including the inner
/// `v0`, its rate along the shock and the launch Jacobian of the v-curve.
#[derive(Clone, Copy, Debug)]
struct MinusLaunch<T> {
    d: T,
    outer_u: U0<T>,
    outer_v: (T, T),
    inner_u: U0<T>,
    inner_v: T,
    rate: T,
    mu: T,
    j: T,
    jdot: T,
}

fn minus_launch<T: Real>(
    spec: &ProblemSpec<T>,
    left_v: &CharField<T>,
    s: T,
    t: T,
    seed: T,
) -> Result<MinusLaunch<T>, HugoniotError> {
    let zero = T::zero();
    let ul = u0_eval(spec, Region::OuterLeft, s, t)?;
    let ui = u0_eval(spec, Region::Inner, s, t)?;
    let vl = v0_eval(spec, left_v, s, t)?;
    let d = u_shock_speed(spec, ul.value, ui.value, t)?;
    let vi = inner_v_state_from(spec, (ul.value, vl.value), ui.value, d, t, seed)?;
    let (phi, psi, lam, mu) = (&spec.density, &spec.density_flux, &spec.lambda, &spec.mu);
    let (um, vm, ut) = (ul.value, vl.value, ui.value);
    let (lm, lt) = (lam.at(um, zero)?, lam.at(ut, zero)?);
    // rates of the traces along the shock
    let du_m = (d - lm) * ul.slope;
    let dv_m = (d - mu.at(um, vm)?) * vl.slope;
    let du_t = (d - lt) * ui.slope;
    let dd = ((lm - d) * du_m - (lt - d) * du_t) / (um - ut);
    // partials of d [Phi] - [Psi]
    let f_um = d * phi.du(um, vm)? - psi.du(um, vm)?;
    let f_vm = d * phi.dv(um, vm)? - psi.dv(um, vm)?;
    let f_ut = psi.du(ut, vi)? - d * phi.du(ut, vi)?;
    let f_vt = psi.dv(ut, vi)? - d * phi.dv(ut, vi)?;
    let f_d = phi.at(um, vm)? - phi.at(ut, vi)?;
    if f_vt.abs() <= T::of(GUARD) {
        return Err(HugoniotError::Degenerate {
            step: "inner v on the minus shock",
            t: t.as_f64(),
        });
    }
    let rate = -(f_um * du_m + f_vm * dv_m + f_ut * du_t + f_d * dd) / f_vt;
    let mu_in = mu.at(ut, vi)?;
    let j = d - mu_in;
    if !(j < zero) {
        return Err(HugoniotError::Degenerate {
            step: "v-curve launch",
            t: t.as_f64(),
        });
    }
    let jdot = mu.du(ut, vi)? * ui.slope * j + mu.dv(ut, vi)? * rate;
    Ok(MinusLaunch {
        d,
        outer_u: ul,
        outer_v: (vl.value, vl.slope),
        inner_u: ui,
        inner_v: vi,
        rate,
        mu: mu_in,
        j,
        jdot,
    })
}

impl<T: Real> MinusLaunch<T> {
    fn state(&self, x: T) -> Kinematics<T> {
        Kinematics {
            x,
            j: self.j,
            xdot: self.mu,
            jdot: self.jdot,
            w: T::zero(),
            wdot: T::zero(),
        }
    }

    fn traces(&self, t: T, s0: T) -> TraceSet<T> {
        TraceSet {
            side: ShockSide::Minus,
            t,
            s0,
            d0: self.d,
            s1: T::nan(),
            d1: T::nan(),
            outer: OneSided::leading(self.outer_u.value, self.outer_u.slope, self.outer_v.0, self.outer_v.1),
            inner: OneSided::leading(self.inner_u.value, self.inner_u.slope, self.inner_v, self.rate / self.j),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct PlusState<T> {
    d: T,
    u: U0<T>,
    outer_v: (T, T),
    inner_v: (T, T),
}

impl<T: Real> PlusState<T> {
    fn traces(&self, t: T, s0: T) -> TraceSet<T> {
        TraceSet {
            side: ShockSide::Plus,
            t,
            s0,
            d0: self.d,
            s1: T::nan(),
            d1: T::nan(),
            outer: OneSided::leading(self.u.value, self.u.slope, self.outer_v.0, self.outer_v.1),
            inner: OneSided::leading(self.u.value, self.u.slope, self.inner_v.0, self.inner_v.1),
        }
    }
}

fn out_of_hull<T: Real>(x: T, t: T) -> HugoniotError {
    CharError::OutOfHull {
        x: x.as_f64(),
        t: t.as_f64(),
    }
    .into()
}

fn plus_state<T: Real>(
    spec: &ProblemSpec<T>,
    s: T,
    t: T,
    fan: &View<T>,
    right: &Snapshot<'_, T>,
    slack: T,
) -> Result<PlusState<T>, HugoniotError> {
    let u = u0_eval(spec, Region::OuterRight, s, t)?;
    let outer_v = right.v0(s)?;
    let slot = fan.find(s, slack).ok_or_else(|| out_of_hull(s, t))?;
    let inner_v = fan.leading(slot);
    let d = density_shock_speed(spec, (u.value, outer_v.0), (u.value, inner_v.0), t)?;
    Ok(PlusState { d, u, outer_v, inner_v })
}

/// Position and leading data of an inner v-curve at one RK stage.
#[derive(Clone, Copy, Debug, Default)]
struct Stage<T> {
    x: T,
    j: T,
    u: T,
}

fn v_motion<T: Real>(
    spec: &ProblemSpec<T>,
    c: &InnerCurve<T>,
    x: T,
    j: T,
    t: T,
    guess: T,
) -> Result<(T, T, U0<T>), HugoniotError> {
    let u = u0_eval_from(spec, Region::Inner, x, t, guess)?;
    let mu = &spec.mu;
    let jdot = mu.du(u.value, c.value)? * u.slope * j + mu.dv(u.value, c.value)? * c.rate;
    Ok((mu.at(u.value, c.value)?, jdot, u))
}

/// Rate of inner `v1` along a v-curve; `u1` is only looked up when it
/// contributes.
fn v1_rate<T: Real>(
    spec: &ProblemSpec<T>,
    c: &InnerCurve<T>,
    st: Stage<T>,
    t: T,
    u1: &View<T>,
    slack: T,
    w: T,
) -> Result<T, HugoniotError> {
    let v0x = c.rate / st.j;
    let g = spec.g.at(st.u, c.value)?;
    if v0x == T::zero() {
        return Ok(g);
    }
    let slot = u1.find(st.x, slack).ok_or_else(|| out_of_hull(st.x, t))?;
    let mu = &spec.mu;
    Ok(-mu.dv(st.u, c.value)? * v0x * w - mu.du(st.u, c.value)? * v0x * u1.correction(slot) + g)
}

/// Rate of inner `u1` along a straight u-curve at time `t`.
fn u1_rate<T: Real>(
    spec: &ProblemSpec<T>,
    c: &InnerCurve<T>,
    t: T,
    v0: &View<T>,
    slack: T,
    w: T,
) -> Result<T, HugoniotError> {
    let x = c.param + c.now.xdot * t;
    let j = T::one() + c.now.jdot * t;
    let slot = v0.find(x, slack).ok_or_else(|| out_of_hull(x, t))?;
    let (v, _) = v0.leading(slot);
    Ok(-c.now.jdot / j * w + spec.f.at(c.value, v)?)
}

#[derive(Clone, Copy, Debug)]
struct ChainOut<T> {
    u1_plus: T,
    u1_minus: T,
    d1_minus: T,
    v1_minus: T,
    v1_plus: T,
    d1_plus: T,
}

/// The first-order jump conditions at one level as a function of `s1`.
/// `u_fan` ends with the node launched from the plus shock and `v_fan`
/// starts with the node launched from the minus shock; their corrections
/// are overwritten with the boundary values found here.
#[allow(clippy::too_many_arguments)]
fn chain<T: Real>(
    spec: &ProblemSpec<T>,
    minus: &TraceSet<T>,
    plus: &TraceSet<T>,
    u_fan: &mut View<T>,
    v_fan: &mut View<T>,
    slack: T,
    s1_minus: T,
    s1_plus: T,
) -> Result<ChainOut<T>, HugoniotError> {
    let u1_plus = step1_inner_u1_boundary(spec, plus, s1_plus)?;
    let last = u_fan.len() - 1;
    u_fan.w[last] = u1_plus;
    let slot = u_fan.find(minus.s0, slack).ok_or_else(|| out_of_hull(minus.s0, minus.t))?;
    let u1_minus = u_fan.correction(slot);
    let mut m = *minus;
    m.inner.u1 = u1_minus;
    let d1_minus = step3_d1_minus(spec, &m, s1_minus)?;
    let v1_minus = step4_inner_v1_boundary(spec, &m, s1_minus, d1_minus)?;
    v_fan.w[0] = v1_minus;
    let slot = v_fan.find(plus.s0, slack).ok_or_else(|| out_of_hull(plus.s0, plus.t))?;
    let v1_plus = v_fan.correction(slot);
    let mut p = *plus;
    p.inner.u1 = u1_plus;
    p.inner.v1 = v1_plus;
    let d1_plus = step6_d1_plus(spec, &p, s1_plus)?;
    Ok(ChainOut {
        u1_plus,
        u1_minus,
        d1_minus,
        v1_minus,
        v1_plus,
        d1_plus,
    })
}

struct Marcher<'a, T: Real> {
    spec: &'a ProblemSpec<T>,
    left: &'a OuterLeading<T>,
    right: &'a OuterLeading<T>,
    corrections: Option<(&'a OuterFields<T>, &'a OuterFields<T>)>,
    dt: T,
    steps: usize,
    slack: T,
    minus: ShockCurve<T>,
    plus: ShockCurve<T>,
    vc: VecDeque<InnerCurve<T>>,
    uc: VecDeque<InnerCurve<T>>,
    v_hist: InnerFan<T>,
    u_hist: InnerFan<T>,
    traces_minus: Vec<TraceSet<T>>,
    traces_plus: Vec<TraceSet<T>>,
    seed: T,
    stages: Vec<[Stage<T>; 4]>,
}

impl<'a, T: Real> Marcher<'a, T> {
    fn new(
        spec: &'a ProblemSpec<T>,
        left: &'a OuterLeading<T>,
        right: &'a OuterLeading<T>,
        corrections: Option<(&'a OuterFields<T>, &'a OuterFields<T>)>,
        minus: ShockCurve<T>,
    ) -> Result<Self, HugoniotError> {
        let (steps, dt) = spec.time_grid();
        let bound = spec.speed_bound()?.max(T::of(1e-3));
        let stride = (steps / (2 * spec.numerics.fan_count)).max(1);
        let seed = spec.initial.v_left.at(T::zero())?;
        Ok(Marcher {
            spec,
            left,
            right,
            corrections,
            dt,
            steps,
            slack: T::of(8.0) * bound * dt,
            minus,
            plus: ShockCurve::new(ShockSide::Plus, dt, steps),
            vc: VecDeque::new(),
            uc: VecDeque::new(),
            v_hist: InnerFan::new(Family::V, dt, steps, stride),
            u_hist: InnerFan::new(Family::U, dt, steps, stride),
            traces_minus: Vec::with_capacity(steps + 1),
            traces_plus: Vec::with_capacity(steps + 1),
            seed,
            stages: Vec::new(),
        })
    }

    fn time(&self, k: usize) -> T {
        self.dt * T::of_usize(k)
    }

    /// V-fan with curves launched up to `k_max`, newest (leftmost) first.
    fn v_view(&self, k_max: usize, theta: T, lead: Option<BoundaryNode<T>>) -> Result<View<T>, CharError> {
        let mut view = View::with_capacity(self.vc.len() + 1);
        if let Some(b) = lead {
            view.push(b.param, &b.state, b.value, b.rate);
        }
        for c in self.vc.iter().rev().filter(|c| c.launch <= k_max) {
            view.push(c.param, &c.at(self.dt, theta), c.value, c.rate);
        }
        sorted(view, self.dt * T::of_usize(k_max))
    }

    /// U-fan with every live curve, oldest (leftmost) first.
    fn u_view(&self, theta: T, tail: Option<&InnerCurve<T>>) -> Result<View<T>, CharError> {
        let mut view = View::with_capacity(self.uc.len() + 1);
        for c in self.uc.iter().chain(tail) {
            view.push(c.param, &c.at(self.dt, theta), c.value, c.rate);
        }
        sorted(view, T::nan())
    }

    fn run(mut self) -> Result<Self, HugoniotError> {
        let spec = self.spec;
        let zero = T::zero();
        let launch = minus_launch(spec, &self.left.v_fan, zero, zero, self.seed).ctx("inner launch", 0, 0.0)?;
        self.seed = launch.inner_v;
        let mut c = InnerCurve::new(0, zero, launch.inner_v, launch.rate, launch.state(zero));
        c.u0 = (launch.inner_u.value, launch.inner_u.slope);
        c.foot = launch.inner_u.foot;
        self.vc.push_back(c);
        let fan = self.v_view(0, T::one(), None).ctx("inner v-fan", 0, 0.0)?;
        let snap = Snapshot::new(spec, &self.right.v_fan, zero).ctx("plus shock", 0, 0.0)?;
        let plus = plus_state(spec, zero, zero, &fan, &snap, self.slack).ctx("plus shock", 0, 0.0)?;
        self.plus.s0.push(zero);
        self.plus.d0.push(plus.d);
        self.finish(0, launch, plus, &fan)?;
        for k in 0..self.steps {
            let (launch, plus, fan) = self.advance(k)?;
            self.finish(k + 1, launch, plus, &fan)?;
        }
        Ok(self)
    }

    /// Moves every curve and the plus shock from level `k` to `k + 1` and
    /// launches the next v-curve.
    fn advance(&mut self, k: usize) -> Result<(MinusLaunch<T>, PlusState<T>, View<T>), HugoniotError> {
        let spec = self.spec;
        let (dt, half) = (self.dt, self.dt * T::of(0.5));
        let t = self.time(k);
        let (tm, t1) = (t + half, t + dt);
        let tf = t.as_f64();
        let sixth = dt / T::of(6.0);
        let two = T::of(2.0);

        self.stages.clear();
        for c in self.vc.iter_mut() {
            let (x0, j0) = (c.now.x, c.now.j);
            let (k1x, k1j) = (c.now.xdot, c.now.jdot);
            let s1 = Stage { x: x0, j: j0, u: c.u0.0 };
            let (x2, j2) = (x0 + half * k1x, j0 + half * k1j);
            let (k2x, k2j, u2) = v_motion(spec, c, x2, j2, tm, c.foot).ctx("inner v-curves", k, tf)?;
            let (x3, j3) = (x0 + half * k2x, j0 + half * k2j);
            let (k3x, k3j, u3) = v_motion(spec, c, x3, j3, tm, u2.foot).ctx("inner v-curves", k, tf)?;
            let (x4, j4) = (x0 + dt * k3x, j0 + dt * k3j);
            let (k4x, k4j, u4) = v_motion(spec, c, x4, j4, t1, u3.foot).ctx("inner v-curves", k, tf)?;
            let x = x0 + sixth * (k1x + two * (k2x + k3x) + k4x);
            let j = j0 + sixth * (k1j + two * (k2j + k3j) + k4j);
            if !(j < T::zero()) {
                let fold = CharError::Focusing { x: x.as_f64(), t: t1.as_f64() };
                return Err(fold).ctx("inner v-curves", k, tf);
            }
            let (xdot, jdot, u) = v_motion(spec, c, x, j, t1, u4.foot).ctx("inner v-curves", k, tf)?;
            c.prev = c.now;
            c.now = Kinematics { x, j, xdot, jdot, w: c.prev.w, wdot: c.prev.wdot };
            c.u0 = (u.value, u.slope);
            c.foot = u.foot;
            self.stages.push([
                s1,
                Stage { x: x2, j: j2, u: u2.value },
                Stage { x: x3, j: j3, u: u3.value },
                Stage { x: x4, j: j4, u: u4.value },
            ]);
        }

        let (s_lo, d_lo) = (self.minus.s0[k], self.minus.d0[k]);
        let (s_hi, d_hi) = (self.minus.s0[k + 1], self.minus.d0[k + 1]);
        let s_mid = hermite(s_lo, d_lo, s_hi, d_hi, dt, T::of(0.5));
        let mid = minus_launch(spec, &self.left.v_fan, s_mid, tm, self.seed).ctx("inner launch", k, tf)?;
        let launch = minus_launch(spec, &self.left.v_fan, s_hi, t1, mid.inner_v).ctx("inner launch", k + 1, t1.as_f64())?;
        self.seed = launch.inner_v;
        let mut c = InnerCurve::new(k + 1, t1, launch.inner_v, launch.rate, launch.state(s_hi));
        c.u0 = (launch.inner_u.value, launch.inner_u.slope);
        c.foot = launch.inner_u.foot;
        self.vc.push_back(c);
        let lead = BoundaryNode {
            param: tm,
            value: mid.inner_v,
            rate: mid.rate,
            state: mid.state(s_mid),
        };
        let fan_mid = self.v_view(k, T::of(0.5), Some(lead)).ctx("inner v-fan", k, tf)?;
        let fan_end = self.v_view(k + 1, T::one(), None).ctx("inner v-fan", k + 1, t1.as_f64())?;

        let right = &self.right.v_fan;
        let snap_mid = Snapshot::new(spec, right, tm).ctx("plus shock", k, tf)?;
        let snap_end = Snapshot::new(spec, right, t1).ctx("plus shock", k, tf)?;
        let slack = self.slack;
        let (s0, k1) = (self.plus.s0[k], self.plus.d0[k]);
        let speed = |s: T, tt: T, fan: &View<T>, snap: &Snapshot<'_, T>| {
            plus_state(spec, s, tt, fan, snap, slack).map(|p| p.d).ctx("plus shock", k, tf)
        };
        let k2 = speed(s0 + half * k1, tm, &fan_mid, &snap_mid)?;
        let k3 = speed(s0 + half * k2, tm, &fan_mid, &snap_mid)?;
        let k4 = speed(s0 + dt * k3, t1, &fan_end, &snap_end)?;
        let s = s0 + sixth * (k1 + two * (k2 + k3) + k4);
        let plus = plus_state(spec, s, t1, &fan_end, &snap_end, slack).ctx("plus shock", k + 1, t1.as_f64())?;
        if !(s > s_hi) {
            return Err(HugoniotError::WedgeCollapse { t: t1.as_f64() });
        }
        self.plus.s0.push(s);
        self.plus.d0.push(plus.d);

        if self.corrections.is_some() {
            for c in self.uc.iter_mut() {
                let w0 = c.now.w;
                let k1 = c.now.wdot;
                let k2 = u1_rate(spec, c, tm, &fan_mid, slack, w0 + half * k1).ctx("inner u1", k, tf)?;
                let k3 = u1_rate(spec, c, tm, &fan_mid, slack, w0 + half * k2).ctx("inner u1", k, tf)?;
                let k4 = u1_rate(spec, c, t1, &fan_end, slack, w0 + dt * k3).ctx("inner u1", k, tf)?;
                c.prev = c.now;
                c.now.x = c.param + c.now.xdot * t1;
                c.now.j = T::one() + c.now.jdot * t1;
                c.now.w = w0 + sixth * (k1 + two * (k2 + k3) + k4);
            }
            let u_mid = self.u_view(T::of(0.5), None).ctx("inner u-fan", k, tf)?;
            let u_end = self.u_view(T::one(), None).ctx("inner u-fan", k, tf)?;
            let stages = std::mem::take(&mut self.stages);
            for (c, st) in self.vc.iter_mut().zip(&stages) {
                let w0 = c.prev.w;
                let k1 = c.prev.wdot;
                let k2 = v1_rate(spec, c, st[1], tm, &u_mid, slack, w0 + half * k1).ctx("inner v1", k, tf)?;
                let k3 = v1_rate(spec, c, st[2], tm, &u_mid, slack, w0 + half * k2).ctx("inner v1", k, tf)?;
                let k4 = v1_rate(spec, c, st[3], t1, &u_end, slack, w0 + dt * k3).ctx("inner v1", k, tf)?;
                c.now.w = w0 + sixth * (k1 + two * (k2 + k3) + k4);
            }
            self.stages = stages;
        }
        Ok((launch, plus, fan_end))
    }

    /// Solves the first-order conditions at level `k`, launches the u-curve
    /// from the plus shock and stores the level.
    fn finish(&mut self, k: usize, launch: MinusLaunch<T>, plus: PlusState<T>, v_lead: &View<T>) -> Result<(), HugoniotError> {
        let spec = self.spec;
        let t = self.time(k);
        let tf = t.as_f64();
        let zero = T::zero();
        let (s_m, s_p) = (self.minus.s0[k], self.plus.s0[k]);
        let mut tm = launch.traces(t, s_m);
        let mut tp = plus.traces(t, s_p);

        if let Some((left, right)) = self.corrections {
            tm.outer.u1 = left.u1.eval(s_m, t).ctx("outer traces", k, tf)?;
            tm.outer.v1 = left.v1.eval(s_m, t).ctx("outer traces", k, tf)?;
            tp.outer.u1 = right.u1.eval(s_p, t).ctx("outer traces", k, tf)?;
            tp.outer.v1 = right.v1.eval(s_p, t).ctx("outer traces", k, tf)?;

            let foot = plus.u.foot;
            let piece = &spec.initial.u_right;
            let rate = piece.slope(foot).ctx("inner launch", k, tf)?;
            let lam = spec.lambda.at(plus.u.value, zero).ctx("inner launch", k, tf)?;
            let lam_u = spec.lambda.du(plus.u.value, zero).ctx("inner launch", k, tf)?;
            let state = Kinematics {
                x: s_p,
                j: T::one() + lam_u * rate * t,
                xdot: lam,
                jdot: lam_u * rate,
                w: zero,
                wdot: zero,
            };
            let mut uc = InnerCurve::new(k, foot, plus.u.value, rate, state);
            uc.u0 = (plus.u.value, plus.u.slope);

            let mut u_fan = self.u_view(T::one(), Some(&uc)).ctx("inner u-fan", k, tf)?;
            let mut v_fan = self.v_view(k, T::one(), None).ctx("inner v-fan", k, tf)?;
            let slack = self.slack;
            let mut solve = |s1m: T, s1p: T| {
                chain(spec, &tm, &tp, &mut u_fan, &mut v_fan, slack, s1m, s1p).ctx("jump conditions", k, tf)
            };
            let (s1m, s1p, out) = if k == 0 {
                (zero, zero, solve(zero, zero)?)
            } else {
                let dt = self.dt;
                let (a, b) = (self.minus.s1[k - 1], self.plus.s1[k - 1]);
                let (da, db) = (self.minus.d1[k - 1], self.plus.d1[k - 1]);
                let guess = solve(a + dt * da, b + dt * db)?;
                let half = dt * T::of(0.5);
                let (s1m, s1p) = (a + half * (da + guess.d1_minus), b + half * (db + guess.d1_plus));
                (s1m, s1p, solve(s1m, s1p)?)
            };
            self.minus.s1.push(s1m);
            self.minus.d1.push(out.d1_minus);
            self.plus.s1.push(s1p);
            self.plus.d1.push(out.d1_plus);
            tm.s1 = s1m;
            tm.d1 = out.d1_minus;
            tm.inner.u1 = out.u1_minus;
            tm.inner.v1 = out.v1_minus;
            tp.s1 = s1p;
            tp.d1 = out.d1_plus;
            tp.inner.u1 = out.u1_plus;
            tp.inner.v1 = out.v1_plus;

            uc.now.w = out.u1_plus;
            uc.prev = uc.now;
            self.uc.push_back(uc);
            if let Some(c) = self.vc.back_mut() {
                c.now.w = out.v1_minus;
                c.prev = c.now;
            }
            for c in self.uc.iter_mut() {
                c.now.wdot = u1_rate(spec, c, t, v_lead, slack, c.now.w).ctx("inner u1", k, tf)?;
            }
            let u_fan = self.u_view(T::one(), None).ctx("inner u-fan", k, tf)?;
            for c in self.vc.iter_mut() {
                let st = Stage { x: c.now.x, j: c.now.j, u: c.u0.0 };
                c.now.wdot = v1_rate(spec, c, st, t, &u_fan, slack, c.now.w).ctx("inner v1", k, tf)?;
            }
            if let Some(c) = self.vc.back_mut() {
                c.prev = c.now;
            }
            if let Some(c) = self.uc.back_mut() {
                c.prev = c.now;
            }
        } else {
            self.plus.s1.push(zero);
            self.plus.d1.push(zero);
        }

        for c in self.vc.iter() {
            if c.launch == k {
                let node = BoundaryNode { param: c.param, value: c.value, rate: c.rate, state: c.now };
                self.v_hist.record_launch(c, node);
            } else {
                self.v_hist.record_state(c);
            }
        }
        for c in self.uc.iter() {
            if c.launch == k {
                let node = BoundaryNode { param: c.param, value: c.value, rate: c.rate, state: c.now };
                self.u_hist.record_launch(c, node);
            } else {
                self.u_hist.record_state(c);
            }
        }
        while self.vc.len() > 2 && self.vc[2].now.x > s_p {
            self.vc.pop_front();
        }
        while self.uc.len() > 2 && self.uc[2].now.x < s_m {
            self.uc.pop_front();
        }
        self.traces_minus.push(tm);
        self.traces_plus.push(tp);
        Ok(())
    }
}

fn sorted<T: Real>(view: View<T>, t: T) -> Result<View<T>, CharError> {
    match view.x.windows(2).position(|w| !(w[0] < w[1])) {
        None => Ok(view),
        Some(i) => Err(CharError::Focusing {
            x: view.x[i].as_f64(),
            t: t.as_f64(),
        }),
    }
}

/// Integrates the leading-order shock curves. The minus shock follows from
/// `u` alone; the plus shock needs the inner `v0`, which is carried by a fan
/// launched from the minus shock as the march proceeds.
pub fn solve_leading<T: Real>(
    spec: &ProblemSpec<T>,
    left: &OuterLeading<T>,
    right: &OuterLeading<T>,
) -> Result<LeadingShocks<T>, HugoniotError> {
    let (steps, dt) = spec.time_grid();
    let minus = integrate_minus(spec, dt, steps)?;
    let m = Marcher::new(spec, left, right, None, minus)?.run()?;
    Ok(LeadingShocks {
        minus: m.minus,
        plus: m.plus,
    })
}

/// Marches the first-order shock corrections and builds the inner fields.
pub fn march_first_order<T: Real>(
    spec: &ProblemSpec<T>,
    leading: &LeadingShocks<T>,
    left: &OuterFields<T>,
    right: &OuterFields<T>,
) -> Result<FirstOrder<T>, HugoniotError> {
    let (steps, _) = spec.time_grid();
    if leading.minus.len() != steps + 1 || leading.plus.len() != steps + 1 {
        return Err(HugoniotError::Mismatch(format!(
            "leading curves have {} samples, time grid needs {}",
            leading.minus.len(),
            steps + 1
        )));
    }
    let mut minus = leading.minus.clone();
    minus.s1.clear();
    minus.d1.clear();
    let marcher = Marcher::new(spec, &left.leading, &right.leading, Some((left, right)), minus)?;
    let slack = marcher.slack;
    let m = marcher.run()?;
    let drift = m
        .plus
        .s0
        .iter()
        .zip(&leading.plus.s0)
        .map(|(a, b)| (*a - *b).abs())
        .fold(T::zero(), |a, b| a.max(b));
    if drift > T::of(1e-9) {
        return Err(HugoniotError::Mismatch(format!(
            "plus shock differs from the supplied leading curve by {}",
            drift.as_f64()
        )));
    }
    Ok(FirstOrder {
        minus: m.minus,
        plus: m.plus,
        inner: InnerFields {
            v: m.v_hist,
            u: m.u_hist,
            slack,
        },
        traces_minus: m.traces_minus,
        traces_plus: m.traces_plus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corrections::build_outer;
    use crate::model::fixtures::{COUPLED, DECOUPLED};
    use crate::model::load_spec;

    fn run(text: &str) -> (LeadingShocks<f64>, FirstOrder<f64>) {
        let spec: ProblemSpec<f64> = load_spec(text).unwrap();
        let left = build_outer(&spec, Region::OuterLeft).unwrap();
        let right = build_outer(&spec, Region::OuterRight).unwrap();
        let lead = solve_leading(&spec, &left.leading, &right.leading).unwrap();
        let first = march_first_order(&spec, &lead, &left, &right).unwrap();
        (lead, first)
    }

    #[test]
    fn decoupled_shocks_match_exact_expansion() {
        let (lead, first) = run(DECOUPLED);
        for k in [0, 100, 250, 500] {
            let t = 1e-3 * k as f64;
            assert!((lead.minus.s0[k] - 0.5 * t).abs() < 1e-12);
            assert!((lead.plus.s0[k] - 2.5 * t).abs() < 1e-12);
            assert!((first.minus.s1[k] + 0.25 * t * t).abs() < 1e-9, "{k} {}", first.minus.s1[k]);
            assert!((first.plus.s1[k] + 1.25 * t * t).abs() < 1e-9, "{k} {}", first.plus.s1[k]);
            let tr = first.traces(ShockSide::Minus, k).unwrap();
            assert!((tr.inner.v1 + 3.0 * t).abs() < 1e-9);
            assert_eq!(tr.inner.u1, 0.0);
        }
    }

    #[test]
    fn coupled_march_runs() {
        let (lead, first) = run(COUPLED);
        let k = lead.minus.len() - 1;
        assert!(lead.minus.s0[k] < lead.plus.s0[k]);
        assert!(first.minus.s1[k].is_finite() && first.plus.s1[k].is_finite());
        let tr = first.traces(ShockSide::Minus, k).unwrap();
        assert!((tr.inner.v0 - tr.outer.v0).abs() > 1e-3);
    }
}
