//! Rankine-Hugoniot quotients and the inner state behind the u-shock.

use super::HugoniotError;
use crate::model::ProblemSpec;
use crate::roots::{damped_newton, RootError};
use crate::scalar::Real;

pub(crate) const GUARD: f64 = 1e-12;

/// Speed of the u-shock between an outer state and the inner state,
/// `[Lambda] / [u]`.
pub fn u_shock_speed<T: Real>(
    spec: &ProblemSpec<T>,
    u_out: T,
    u_in: T,
    t: T,
) -> Result<T, HugoniotError> {
    let jump = u_out - u_in;
    if jump.abs() <= T::of(GUARD) {
        return Err(HugoniotError::JumpCollapse {
            what: "u",
            t: t.as_f64(),
        });
    }
    Ok((spec.u_flux.at(u_out, T::zero())? - spec.u_flux.at(u_in, T::zero())?) / jump)
}

/// Speed of a shock in the second conservation law, `[Psi] / [Phi]`.
pub fn density_shock_speed<T: Real>(
    spec: &ProblemSpec<T>,
    (u_out, v_out): (T, T),
    (u_in, v_in): (T, T),
    t: T,
) -> Result<T, HugoniotError> {
    let jump = spec.density.at(u_out, v_out)? - spec.density.at(u_in, v_in)?;
    if jump.abs() <= T::of(GUARD) {
        return Err(HugoniotError::JumpCollapse {
            what: "Phi",
            t: t.as_f64(),
        });
    }
    Ok((spec.density_flux.at(u_out, v_out)? - spec.density_flux.at(u_in, v_in)?) / jump)
}

/// Residual of the second jump condition across a shock of speed `d`.
pub fn density_jump_residual<T: Real>(
    spec: &ProblemSpec<T>,
    (u_out, v_out): (T, T),
    (u_in, v_in): (T, T),
    d: T,
) -> Result<T, HugoniotError> {
    let dphi = spec.density.at(u_out, v_out)? - spec.density.at(u_in, v_in)?;
    let dpsi = spec.density_flux.at(u_out, v_out)? - spec.density_flux.at(u_in, v_in)?;
    Ok(d * dphi - dpsi)
}

/// Inner value of `v` behind the u-shock. When `Phi` depends on `u` the
/// second conservation law forces `v` to jump across the u-shock as well;
/// the root is continued from the outer value, which it equals whenever
/// `Phi` does not depend on `u`.
pub fn inner_v_state<T: Real>(
    spec: &ProblemSpec<T>,
    (u_out, v_out): (T, T),
    u_in: T,
    d: T,
    t: T,
) -> Result<T, HugoniotError> {
    inner_v_state_from(spec, (u_out, v_out), u_in, d, t, v_out)
}

/// As [`inner_v_state`] with the Newton iteration started at `seed`.
pub(crate) fn inner_v_state_from<T: Real>(
    spec: &ProblemSpec<T>,
    (u_out, v_out): (T, T),
    u_in: T,
    d: T,
    t: T,
    seed: T,
) -> Result<T, HugoniotError> {
    let phi_out = spec.density.at(u_out, v_out)?;
    let psi_out = spec.density_flux.at(u_out, v_out)?;
    let residual = |v: T| -> Result<(T, T), HugoniotError> {
        let value = d * (phi_out - spec.density.at(u_in, v)?)
            - (psi_out - spec.density_flux.at(u_in, v)?);
        let slope = spec.density_flux.dv(u_in, v)? - d * spec.density.dv(u_in, v)?;
        Ok((value, slope))
    };
    let n = &spec.numerics;
    damped_newton(residual, seed, n.newton_tol, n.newton_max_iter).map_err(|e| match e {
        RootError::Eval(e) => e,
        _ => HugoniotError::InnerState { t: t.as_f64() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{COUPLED, DECOUPLED};
    use crate::model::load_spec;

    #[test]
    fn burgers_and_linear_quotients() {
        let spec: ProblemSpec<f64> = load_spec(DECOUPLED).unwrap();
        assert_eq!(u_shock_speed(&spec, 1.0, 0.0, 0.0).unwrap(), 0.5);
        assert_eq!(density_shock_speed(&spec, (0.0, 2.0), (0.0, 3.0), 0.0).unwrap(), 2.5);
        assert!(matches!(
            u_shock_speed(&spec, 1.0, 1.0, 0.3),
            Err(HugoniotError::JumpCollapse { what: "u", .. })
        ));
    }

    #[test]
    fn inner_state_is_continuous_for_u_independent_density() {
        let spec: ProblemSpec<f64> = load_spec(DECOUPLED).unwrap();
        assert_eq!(inner_v_state(&spec, (1.0, 3.0), 0.0, 0.5, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn inner_state_jumps_for_coupled_density() {
        let spec: ProblemSpec<f64> = load_spec(COUPLED).unwrap();
        let v = inner_v_state(&spec, (1.0, 3.0), 0.0, 0.5, 0.0).unwrap();
        // 0.5 * (-1/4 + 1/v) = ln 4 - 1/4 - ln v
        let check = 0.5 * (-0.25 + 1.0 / v) - (4f64.ln() - 0.25 - v.ln());
        assert!(check.abs() < 1e-14);
        assert!((v - 3.0).abs() > 1e-3 && (v - 3.0).abs() < 0.1);
    }
}
