//! Fields in the wedge between the shocks. Their characteristics start on
//! the shock curves, so the fans grow by one curve per time step while the
//! shocks are marched; see `hugoniot::march`.

use crate::characteristics::{time_level, CharError, Family};
use crate::scalar::{hermite, Real};

/// Position, Jacobian, carried correction and their time derivatives on one
/// curve at one time level.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Kinematics<T> {
    pub x: T,
    pub j: T,
    pub xdot: T,
    pub jdot: T,
    pub w: T,
    pub wdot: T,
}

impl<T: Real> Kinematics<T> {
    pub fn blend(a: &Self, b: &Self, dt: T, theta: T) -> Self {
        if theta == T::zero() {
            return *a;
        }
        if theta == T::one() {
            return *b;
        }
        Kinematics {
            x: hermite(a.x, a.xdot, b.x, b.xdot, dt, theta),
            j: hermite(a.j, a.jdot, b.j, b.jdot, dt, theta),
            xdot: a.xdot + (b.xdot - a.xdot) * theta,
            jdot: a.jdot + (b.jdot - a.jdot) * theta,
            w: hermite(a.w, a.wdot, b.w, b.wdot, dt, theta),
            wdot: a.wdot + (b.wdot - a.wdot) * theta,
        }
    }
}

/// A curve of an inner fan while the march is running.
#[derive(Clone, Debug)]
pub struct InnerCurve<T> {
    /// Time level at which the curve left the shock.
    pub launch: usize,
    /// Launch time for v-curves, initial-line foot for u-curves.
    pub param: T,
    /// Leading-order value carried by the curve.
    pub value: T,
    /// Derivative of `value` with respect to `param`.
    pub rate: T,
    pub(crate) now: Kinematics<T>,
    pub(crate) prev: Kinematics<T>,
    /// Leading `u0` and `u0_x` at the current position, and the foot of the
    /// u-characteristic through it.
    pub(crate) u0: (T, T),
    pub(crate) foot: T,
}

impl<T: Real> InnerCurve<T> {
    pub(crate) fn new(launch: usize, param: T, value: T, rate: T, state: Kinematics<T>) -> Self {
        InnerCurve {
            launch,
            param,
            value,
            rate,
            now: state,
            prev: state,
            u0: (T::zero(), T::zero()),
            foot: state.x,
        }
    }

    pub fn x(&self) -> T {
        self.now.x
    }

    pub fn w(&self) -> T {
        self.now.w
    }

    /// State a fraction `theta` of the way through the step just taken.
    pub(crate) fn at(&self, dt: T, theta: T) -> Kinematics<T> {
        Kinematics::blend(&self.prev, &self.now, dt, theta)
    }
}

/// A fan frozen at one time with its nodes sorted by increasing `x`.
#[derive(Clone, Debug, Default)]
pub(crate) struct View<T> {
    pub p: Vec<T>,
    pub x: Vec<T>,
    pub j: Vec<T>,
    pub value: Vec<T>,
    pub rate: Vec<T>,
    pub w: Vec<T>,
}

/// Position of a query point in a [`View`]: node pair `(lo, lo + 1)` and the
/// linear fraction between them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Slot<T> {
    pub lo: usize,
    pub hi: usize,
    pub theta: T,
}

impl<T: Real> View<T> {
    pub fn with_capacity(n: usize) -> Self {
        View {
            p: Vec::with_capacity(n),
            x: Vec::with_capacity(n),
            j: Vec::with_capacity(n),
            value: Vec::with_capacity(n),
            rate: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn push(&mut self, p: T, k: &Kinematics<T>, value: T, rate: T) {
        self.p.push(p);
        self.x.push(k.x);
        self.j.push(k.j);
        self.value.push(value);
        self.rate.push(rate);
        self.w.push(k.w);
    }

    /// Linear location of `x`; up to `slack` beyond either end is
    /// extrapolated from the end pair.
    pub fn find(&self, x: T, slack: T) -> Option<Slot<T>> {
        let n = self.x.len();
        match n {
            0 => None,
            1 => ((x - self.x[0]).abs() <= slack).then_some(Slot {
                lo: 0,
                hi: 0,
                theta: T::zero(),
            }),
            _ => {
                if x < self.x[0] - slack || x > self.x[n - 1] + slack {
                    return None;
                }
                let lo = self.x.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
                let span = self.x[lo + 1] - self.x[lo];
                if !(span > T::zero()) {
                    return None;
                }
                Some(Slot {
                    lo,
                    hi: lo + 1,
                    theta: (x - self.x[lo]) / span,
                })
            }
        }
    }

    #[inline]
    pub fn blend(&self, data: &[T], s: Slot<T>) -> T {
        data[s.lo] + (data[s.hi] - data[s.lo]) * s.theta
    }

    /// Leading value and its x-derivative `rate / j`.
    pub fn leading(&self, s: Slot<T>) -> (T, T) {
        let slope = |i: usize| self.rate[i] / self.j[i];
        let (a, b) = (slope(s.lo), slope(s.hi));
        (self.blend(&self.value, s), a + (b - a) * s.theta)
    }

    pub fn correction(&self, s: Slot<T>) -> T {
        self.blend(&self.w, s)
    }
}

/// Stored trajectory of one retained inner curve.
#[derive(Clone, Debug)]
struct HistoryCurve<T> {
    param: T,
    value: T,
    rate: T,
    first: usize,
    samples: Vec<Kinematics<T>>,
}

/// Boundary node at one time level: where the fan is fed from the shock.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct BoundaryNode<T> {
    pub param: T,
    pub value: T,
    pub rate: T,
    pub state: Kinematics<T>,
}

/// An inner fan after the march: every `stride`-th launched curve with its
/// full trajectory, plus the boundary data at every level.
#[derive(Clone, Debug)]
pub struct InnerFan<T> {
    pub family: Family,
    dt: T,
    steps: usize,
    stride: usize,
    boundary: Vec<BoundaryNode<T>>,
    history: Vec<HistoryCurve<T>>,
    live: Vec<Option<usize>>,
}

impl<T: Real> InnerFan<T> {
    pub(crate) fn new(family: Family, dt: T, steps: usize, stride: usize) -> Self {
        InnerFan {
            family,
            dt,
            steps,
            stride: stride.max(1),
            boundary: Vec::with_capacity(steps + 1),
            history: Vec::new(),
            live: Vec::new(),
        }
    }

    /// Records the boundary node of the newest level and, for every
    /// `stride`-th launch, opens a history slot for the new curve.
    pub(crate) fn record_launch(&mut self, curve: &InnerCurve<T>, boundary: BoundaryNode<T>) {
        self.boundary.push(boundary);
        let slot = (curve.launch.is_multiple_of(self.stride)).then(|| {
            self.history.push(HistoryCurve {
                param: curve.param,
                value: curve.value,
                rate: curve.rate,
                first: curve.launch,
                samples: vec![curve.now],
            });
            self.history.len() - 1
        });
        self.live.push(slot);
    }

    /// Appends the current state of a live retained curve.
    pub(crate) fn record_state(&mut self, curve: &InnerCurve<T>) {
        if let Some(Some(h)) = self.live.get(curve.launch) {
            self.history[*h].samples.push(curve.now);
        }
    }

    pub fn launched(&self) -> usize {
        self.boundary.len()
    }

    pub fn stored_curves(&self) -> usize {
        self.history.len()
    }

    /// Boundary value carried at level `k`, with the first-order datum.
    pub fn boundary_at(&self, k: usize) -> Option<(T, T, T)> {
        self.boundary.get(k).map(|b| (b.state.x, b.value, b.state.w))
    }

    /// Fan at time `t` from retained curves and the boundary node.
    pub(crate) fn view(&self, t: T) -> Result<View<T>, CharError> {
        let (k, theta) = time_level(self.dt, self.steps, t)?;
        let (k, theta) = if theta == T::one() { (k + 1, T::zero()) } else { (k, theta) };
        let top = if theta == T::zero() { k } else { k + 1 };
        if top >= self.boundary.len() {
            return Err(CharError::TimeOutOfRange { t: t.as_f64() });
        }
        let mut nodes: Vec<(T, T, T, Kinematics<T>)> = Vec::new();
        for h in &self.history {
            let last = h.first + h.samples.len() - 1;
            if h.first > k || last < top || h.first == k && theta == T::zero() {
                continue;
            }
            let a = &h.samples[k - h.first];
            let state = if theta == T::zero() {
                *a
            } else {
                Kinematics::blend(a, &h.samples[k + 1 - h.first], self.dt, theta)
            };
            nodes.push((h.param, h.value, h.rate, state));
        }
        let b = if theta == T::zero() {
            self.boundary[k]
        } else {
            let (a, c) = (&self.boundary[k], &self.boundary[k + 1]);
            let mix = |p: T, q: T| p + (q - p) * theta;
            BoundaryNode {
                param: mix(a.param, c.param),
                value: mix(a.value, c.value),
                rate: mix(a.rate, c.rate),
                state: Kinematics::blend(&a.state, &c.state, self.dt, theta),
            }
        };
        nodes.push((b.param, b.value, b.rate, b.state));
        nodes.sort_by(|a, c| a.3.x.partial_cmp(&c.3.x).unwrap_or(std::cmp::Ordering::Equal));
        let mut view = View::with_capacity(nodes.len());
        for (p, value, rate, state) in &nodes {
            view.push(*p, state, *value, *rate);
        }
        Ok(view)
    }
}

/// Inner fans produced by the march: `v` carries the leading inner `v0` and
/// the first-order `v1`; `u` carries `u1`.
#[derive(Clone, Debug)]
pub struct InnerFields<T> {
    pub v: InnerFan<T>,
    pub u: InnerFan<T>,
    /// Extrapolation allowance beyond the end nodes.
    pub(crate) slack: T,
}

impl<T: Real> InnerFields<T> {
    fn slot(&self, view: &View<T>, x: T, t: T) -> Result<Slot<T>, CharError> {
        view.find(x, self.slack).ok_or(CharError::OutOfHull {
            x: x.as_f64(),
            t: t.as_f64(),
        })
    }

    /// Leading-order inner `v0` and its x-derivative.
    pub fn v0(&self, x: T, t: T) -> Result<(T, T), CharError> {
        let view = self.v.view(t)?;
        let s = self.slot(&view, x, t)?;
        Ok(view.leading(s))
    }

    pub fn v1(&self, x: T, t: T) -> Result<T, CharError> {
        let view = self.v.view(t)?;
        let s = self.slot(&view, x, t)?;
        Ok(view.correction(s))
    }

    pub fn u1(&self, x: T, t: T) -> Result<T, CharError> {
        let view = self.u.view(t)?;
        let s = self.slot(&view, x, t)?;
        Ok(view.correction(s))
    }
}
