//! One-sided traces at a shock and the first-order jump conditions, each
//! solved as a linear equation in a single unknown.

use super::jump::GUARD;
use super::HugoniotError;
use crate::characteristics::Region;
use crate::model::ProblemSpec;
use crate::scalar::Real;

/// Which shock: `Minus` is the u-shock, `Plus` the v-shock.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShockSide {
    Minus,
    Plus,
}

impl ShockSide {
    pub fn name(self) -> &'static str {
        match self {
            ShockSide::Minus => "minus",
            ShockSide::Plus => "plus",
        }
    }

    /// Outer region adjacent to this shock.
    pub fn outer(self) -> Region {
        match self {
            ShockSide::Minus => Region::OuterLeft,
            ShockSide::Plus => Region::OuterRight,
        }
    }
}

/// Values on one side of a shock. First-order entries are `NaN` until known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneSided<T> {
    pub u0: T,
    pub u0x: T,
    pub v0: T,
    pub v0x: T,
    pub u1: T,
    pub v1: T,
}

impl<T: Real> OneSided<T> {
    pub fn leading(u0: T, u0x: T, v0: T, v0x: T) -> Self {
        OneSided {
            u0,
            u0x,
            v0,
            v0x,
            u1: T::nan(),
            v1: T::nan(),
        }
    }

    /// First-order perturbation of the trace when the shock moves by `s1`.
    fn shifted(&self, s1: T) -> (T, T) {
        (self.u1 + self.u0x * s1, self.v1 + self.v0x * s1)
    }
}

/// Everything the jump conditions need at one shock and one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSet<T> {
    pub side: ShockSide,
    pub t: T,
    pub s0: T,
    pub d0: T,
    pub s1: T,
    pub d1: T,
    pub outer: OneSided<T>,
    pub inner: OneSided<T>,
}

/// First-order residual of the u-law jump condition.
pub fn u_law_residual<T: Real>(spec: &ProblemSpec<T>, tr: &TraceSet<T>, s1: T, d1: T) -> Result<T, HugoniotError> {
    let (o, i) = (&tr.outer, &tr.inner);
    let zero = T::zero();
    let (ao, _) = o.shifted(s1);
    let (ai, _) = i.shifted(s1);
    let (lo, li) = (spec.lambda.at(o.u0, zero)?, spec.lambda.at(i.u0, zero)?);
    Ok(d1 * (o.u0 - i.u0) + tr.d0 * (ao - ai) - (lo * ao - li * ai))
}

/// First-order residual of the density-law jump condition.
pub fn density_law_residual<T: Real>(
    spec: &ProblemSpec<T>,
    tr: &TraceSet<T>,
    s1: T,
    d1: T,
) -> Result<T, HugoniotError> {
    let (o, i) = (&tr.outer, &tr.inner);
    let (ao, bo) = o.shifted(s1);
    let (ai, bi) = i.shifted(s1);
    let (phi, psi) = (&spec.density, &spec.density_flux);
    let dphi = phi.at(o.u0, o.v0)? - phi.at(i.u0, i.v0)?;
    let phi1 = phi.du(o.u0, o.v0)? * ao + phi.dv(o.u0, o.v0)? * bo
        - phi.du(i.u0, i.v0)? * ai
        - phi.dv(i.u0, i.v0)? * bi;
    let psi1 = psi.du(o.u0, o.v0)? * ao + psi.dv(o.u0, o.v0)? * bo
        - psi.du(i.u0, i.v0)? * ai
        - psi.dv(i.u0, i.v0)? * bi;
    Ok(d1 * dphi + tr.d0 * phi1 - psi1)
}

/// Root of a residual known to be affine in its argument.
pub(crate) fn solve_affine<T: Real>(
    step: &'static str,
    t: T,
    mut r: impl FnMut(T) -> Result<T, HugoniotError>,
) -> Result<T, HugoniotError> {
    let r0 = r(T::zero())?;
    let a = r(T::one())? - r0;
    if !(a.abs() > T::of(GUARD)) {
        return Err(HugoniotError::Degenerate { step, t: t.as_f64() });
    }
    Ok(-r0 / a)
}

/// Inner `u1` on the plus shock from the u-law; the speed correction does
/// not enter because `u0` is continuous there.
pub fn step1_inner_u1_boundary<T: Real>(
    spec: &ProblemSpec<T>,
    tr: &TraceSet<T>,
    s1_plus: T,
) -> Result<T, HugoniotError> {
    solve_affine("inner u1 on the plus shock", tr.t, |z| {
        let mut probe = *tr;
        probe.inner.u1 = z;
        u_law_residual(spec, &probe, s1_plus, T::zero())
    })
}

/// Speed correction of the minus shock from the u-law.
pub fn step3_d1_minus<T: Real>(spec: &ProblemSpec<T>, tr: &TraceSet<T>, s1_minus: T) -> Result<T, HugoniotError> {
    if (tr.outer.u0 - tr.inner.u0).abs() <= T::of(GUARD) {
        return Err(HugoniotError::JumpCollapse {
            what: "u",
            t: tr.t.as_f64(),
        });
    }
    solve_affine("minus speed correction", tr.t, |z| u_law_residual(spec, tr, s1_minus, z))
}

/// Inner `v1` on the minus shock from the density law, given the speed
/// correction found by [`step3_d1_minus`].
pub fn step4_inner_v1_boundary<T: Real>(
    spec: &ProblemSpec<T>,
    tr: &TraceSet<T>,
    s1_minus: T,
    d1_minus: T,
) -> Result<T, HugoniotError> {
    solve_affine("inner v1 on the minus shock", tr.t, |z| {
        let mut probe = *tr;
        probe.inner.v1 = z;
        density_law_residual(spec, &probe, s1_minus, d1_minus)
    })
}

/// Speed correction of the plus shock from the density law.
pub fn step6_d1_plus<T: Real>(spec: &ProblemSpec<T>, tr: &TraceSet<T>, s1_plus: T) -> Result<T, HugoniotError> {
    let phi = &spec.density;
    let jump = phi.at(tr.outer.u0, tr.outer.v0)? - phi.at(tr.inner.u0, tr.inner.v0)?;
    if jump.abs() <= T::of(GUARD) {
        return Err(HugoniotError::JumpCollapse {
            what: "Phi",
            t: tr.t.as_f64(),
        });
    }
    solve_affine("plus speed correction", tr.t, |z| density_law_residual(spec, tr, s1_plus, z))
}
