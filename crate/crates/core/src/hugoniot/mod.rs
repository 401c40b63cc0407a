//! Shock curves: leading-order Rankine-Hugoniot ODEs and the first-order
//! corrections obtained by marching the jump conditions in time.

mod curve;
mod jump;
mod march;
mod traces;

pub use curve::{write_shock_csv, ShockCurve};
pub use jump::{density_jump_residual, density_shock_speed, inner_v_state, u_shock_speed};
pub use march::{march_first_order, solve_leading, FirstOrder, LeadingShocks};
pub use traces::{
    density_law_residual, step1_inner_u1_boundary, step3_d1_minus, step4_inner_v1_boundary, step6_d1_plus,
    u_law_residual, OneSided, ShockSide, TraceSet,
};

use crate::characteristics::CharError;
use crate::expr::EvalError;

#[derive(Debug, thiserror::Error)]
pub enum HugoniotError {
    #[error("jump in {what} collapsed at t={t}")]
    JumpCollapse { what: &'static str, t: f64 },
    #[error("degenerate coefficient in {step} at t={t}")]
    Degenerate { step: &'static str, t: f64 },
    #[error("no inner state behind the u-shock at t={t}")]
    InnerState { t: f64 },
    #[error("shocks cross at t={t}")]
    WedgeCollapse { t: f64 },
    #[error("inputs disagree: {0}")]
    Mismatch(String),
    #[error("step {step} (t={t}), {stage}: {source}")]
    March {
        step: usize,
        t: f64,
        stage: &'static str,
        #[source]
        source: Box<HugoniotError>,
    },
    #[error(transparent)]
    Char(#[from] CharError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl HugoniotError {
    /// The underlying error with march context removed.
    pub fn root_cause(&self) -> &HugoniotError {
        match self {
            HugoniotError::March { source, .. } => source.root_cause(),
            other => other,
        }
    }
}
