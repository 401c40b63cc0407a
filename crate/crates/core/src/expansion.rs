//! The assembled first-order expansion: outer fields on both sides, the
//! shock curves and the inner fields.

use crate::characteristics::{u0_eval, v0_eval, CharError, Region};
use crate::corrections::{build_outer, OuterFields};
use crate::expr::EvalError;
use crate::hugoniot::{march_first_order, solve_leading, FirstOrder, HugoniotError, LeadingShocks, ShockSide};
use crate::model::ProblemSpec;
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum ExpansionError {
    #[error(transparent)]
    Characteristics(#[from] CharError),
    #[error(transparent)]
    Hugoniot(#[from] HugoniotError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
pub struct Expansion<T> {
    pub spec: ProblemSpec<T>,
    pub left: OuterFields<T>,
    pub right: OuterFields<T>,
    pub leading: LeadingShocks<T>,
    pub first: FirstOrder<T>,
}

impl<T: Real> Expansion<T> {
    /// Builds every field; the two outer regions are independent and are
    /// built on separate threads.
    pub fn build(spec: &ProblemSpec<T>) -> Result<Self, ExpansionError> {
        let (left, right) = std::thread::scope(|s| {
            let left = s.spawn(|| build_outer(spec, Region::OuterLeft));
            let right = build_outer(spec, Region::OuterRight);
            (left.join().expect("outer field thread panicked"), right)
        });
        let (left, right) = (left?, right?);
        let leading = solve_leading(spec, &left.leading, &right.leading)?;
        let mut first = march_first_order(spec, &leading, &left, &right)?;
        // room for points between the leading and the shifted shock
        let shift = first
            .minus
            .s1
            .iter()
            .chain(&first.plus.s1)
            .fold(T::zero(), |a, b| a.max(b.abs()));
        let slack = first.inner.slack.max(T::of(1.5) * spec.epsilon * shift);
        first.inner.slack = slack;
        Ok(Expansion {
            spec: spec.clone(),
            left,
            right,
            leading,
            first,
        })
    }

    /// Composite shock position `s0 + eps s1` at `t`.
    pub fn shock(&self, side: ShockSide, t: T) -> T {
        self.first.curve(side).position(t, self.spec.epsilon)
    }

    /// Region containing `(x, t)` by the composite shock positions.
    pub fn region_at(&self, x: T, t: T) -> Region {
        if x < self.shock(ShockSide::Minus, t) {
            Region::OuterLeft
        } else if x > self.shock(ShockSide::Plus, t) {
            Region::OuterRight
        } else {
            Region::Inner
        }
    }

    fn outer(&self, region: Region) -> &OuterFields<T> {
        match region {
            Region::OuterLeft => &self.left,
            _ => &self.right,
        }
    }

    /// `(u0, v0)` at `(x, t)`.
    pub fn eval_leading(&self, x: T, t: T) -> Result<(T, T), ExpansionError> {
        let region = self.region_at(x, t);
        let u = u0_eval(&self.spec, region, x, t)?.value;
        let v = match region {
            Region::Inner => self.first.inner.v0(x, t)?.0,
            _ => v0_eval(&self.spec, &self.outer(region).leading.v_fan, x, t)?.value,
        };
        Ok((u, v))
    }

    /// `(u1, v1)` at `(x, t)`.
    pub fn eval_first_order(&self, x: T, t: T) -> Result<(T, T), ExpansionError> {
        Ok(match self.region_at(x, t) {
            Region::Inner => (self.first.inner.u1(x, t)?, self.first.inner.v1(x, t)?),
            region => {
                let f = self.outer(region);
                (f.u1.eval(x, t)?, f.v1.eval(x, t)?)
            }
        })
    }

    /// `(u, v)` to first order in `eps`.
    pub fn composite(&self, x: T, t: T) -> Result<(T, T), ExpansionError> {
        let eps = self.spec.epsilon;
        let (u0, v0) = self.eval_leading(x, t)?;
        let (u1, v1) = self.eval_first_order(x, t)?;
        Ok((u0 + eps * u1, v0 + eps * v1))
    }

    /// Largest residual of the exact jump conditions when the expansion with
    /// parameter `eps` is substituted at the shifted shocks, over every
    /// `stride`-th level.
    pub fn hugoniot_residual(&self, eps: T, stride: usize) -> Result<T, ExpansionError> {
        let spec = &self.spec;
        let zero = T::zero();
        let mut worst = zero;
        for k in (0..self.first.levels()).step_by(stride.max(1)) {
            for side in [ShockSide::Minus, ShockSide::Plus] {
                let tr = self.first.traces(side, k).expect("level in range");
                let (t, s) = (tr.t, tr.s0 + eps * tr.s1);
                let d = tr.d0 + eps * tr.d1;
                let region = side.outer();
                let f = self.outer(region);
                let uo = u0_eval(spec, region, s, t)?.value + eps * f.u1.eval(s, t)?;
                let vo = v0_eval(spec, &f.leading.v_fan, s, t)?.value + eps * f.v1.eval(s, t)?;
                let i = &tr.inner;
                let ui = u0_eval(spec, Region::Inner, s, t)?.value + eps * i.u1;
                let vi = i.v0 + eps * (i.v1 + i.v0x * tr.s1);
                let r_u = d * (uo - ui) - (spec.u_flux.at(uo, zero)? - spec.u_flux.at(ui, zero)?);
                let r_phi = d * (spec.density.at(uo, vo)? - spec.density.at(ui, vi)?)
                    - (spec.density_flux.at(uo, vo)? - spec.density_flux.at(ui, vi)?);
                worst = worst.max(r_u.abs()).max(r_phi.abs());
            }
        }
        Ok(worst)
    }
}
