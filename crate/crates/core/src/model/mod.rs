//! Problem definition: coefficient functions, the conservation-law pair,
//! piecewise initial data, the small parameter and numerical controls.

mod config;
mod validate;

pub use config::{InitialConfig, NumericsSection, ProblemConfig, StateBoxSection};
pub use validate::{validate, CheckResult, CheckStatus, ValidationReport};

use crate::expr::{parse, Bindings, EvalError, Expr, ParseError, Program, Var};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("field `{field}`: {source}")]
    Expression {
        field: &'static str,
        #[source]
        source: ParseError,
    },
    #[error("field `{field}` may only reference {allowed}, but references `{found}`")]
    Variables {
        field: &'static str,
        allowed: &'static str,
        found: Var,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Which half-line of the initial data a quantity belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A coefficient function of `(u, v)` with its first partial derivatives
/// compiled alongside.
#[derive(Clone, Debug)]
pub struct Coefficient<T> {
    pub source: String,
    pub expr: Expr,
    value: Program<T>,
    d_u: Program<T>,
    d_v: Program<T>,
}

impl<T: Real> Coefficient<T> {
    fn new(field: &'static str, text: &str, allow_v: bool) -> Result<Self, ModelError> {
        let expr = parse(text).map_err(|source| ModelError::Expression { field, source })?;
        let allowed = if allow_v { "u, v" } else { "u" };
        for var in expr.variables() {
            if var == Var::X || (var == Var::V && !allow_v) {
                return Err(ModelError::Variables {
                    field,
                    allowed,
                    found: var,
                });
            }
        }
        Ok(Self::from_expr(text, expr))
    }

    pub fn from_expr(source: &str, expr: Expr) -> Self {
        Coefficient {
            source: source.to_string(),
            value: expr.fold_constants().compile(),
            d_u: expr.differentiate(Var::U).compile(),
            d_v: expr.differentiate(Var::V).compile(),
            expr,
        }
    }

    #[inline]
    pub fn at(&self, u: T, v: T) -> Result<T, EvalError> {
        self.value.eval(&Bindings::uv(u, v))
    }

    #[inline]
    pub fn du(&self, u: T, v: T) -> Result<T, EvalError> {
        self.d_u.eval(&Bindings::uv(u, v))
    }

    #[inline]
    pub fn dv(&self, u: T, v: T) -> Result<T, EvalError> {
        self.d_v.eval(&Bindings::uv(u, v))
    }

    /// True when the expression does not depend on `u`.
    pub fn independent_of_u(&self) -> bool {
        !self.expr.references(Var::U)
    }
}

/// One smooth piece of initial data, a function of `x`.
#[derive(Clone, Debug)]
pub struct Profile<T> {
    pub source: String,
    pub expr: Expr,
    value: Program<T>,
    slope: Program<T>,
}

impl<T: Real> Profile<T> {
    fn new(field: &'static str, text: &str) -> Result<Self, ModelError> {
        let expr = parse(text).map_err(|source| ModelError::Expression { field, source })?;
        if let Some(found) = expr.variables().into_iter().find(|&w| w != Var::X) {
            return Err(ModelError::Variables {
                field,
                allowed: "x",
                found,
            });
        }
        Ok(Profile {
            source: text.to_string(),
            value: expr.fold_constants().compile(),
            slope: expr.differentiate(Var::X).compile(),
            expr,
        })
    }

    #[inline]
    pub fn at(&self, x: T) -> Result<T, EvalError> {
        self.value.eval(&Bindings::x(x))
    }

    #[inline]
    pub fn slope(&self, x: T) -> Result<T, EvalError> {
        self.slope.eval(&Bindings::x(x))
    }

    /// Value of the piece when it folds to a constant.
    pub fn constant(&self) -> Option<T> {
        self.value.as_const()
    }
}

/// Initial data on `x < 0` and `x > 0`; both fields are expected to jump at
/// the origin.
#[derive(Clone, Debug)]
pub struct PiecewiseInitial<T> {
    pub u_left: Profile<T>,
    pub u_right: Profile<T>,
    pub v_left: Profile<T>,
    pub v_right: Profile<T>,
}

impl<T: Real> PiecewiseInitial<T> {
    pub fn u(&self, side: Side) -> &Profile<T> {
        match side {
            Side::Left => &self.u_left,
            Side::Right => &self.u_right,
        }
    }

    pub fn v(&self, side: Side) -> &Profile<T> {
        match side {
            Side::Left => &self.v_left,
            Side::Right => &self.v_right,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateBox<T> {
    pub u: (T, T),
    pub v: (T, T),
}

impl<T: Real> StateBox<T> {
    pub fn contains(&self, u: T, v: T) -> bool {
        u >= self.u.0 && u <= self.u.1 && v >= self.v.0 && v <= self.v.1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NumericsConfig<T> {
    /// Requested marching step; the effective step divides `T` evenly.
    pub dt: T,
    pub fan_count: usize,
    pub newton_tol: T,
    pub newton_max_iter: usize,
    pub fv_cells: usize,
    pub fv_cfl: T,
    pub fv_domain: (T, T),
    pub state_box: StateBox<T>,
    pub fv_outputs: usize,
}

/// A fully parsed and compiled problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec<T> {
    pub config: ProblemConfig,
    pub lambda: Coefficient<T>,
    pub mu: Coefficient<T>,
    pub f: Coefficient<T>,
    pub g: Coefficient<T>,
    pub u_flux: Coefficient<T>,
    pub density: Coefficient<T>,
    pub density_flux: Coefficient<T>,
    pub initial: PiecewiseInitial<T>,
    pub epsilon: T,
    pub horizon: T,
    pub numerics: NumericsConfig<T>,
}

/// Parses a JSON problem document.
pub fn load_spec<T: Real>(document: &str) -> Result<ProblemSpec<T>, ModelError> {
    ProblemSpec::from_config(ProblemConfig::from_json(document)?)
}

fn positive(name: &str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ModelError::Invalid(format!("{name} must be positive")))
    }
}

fn interval(name: &str, [lo, hi]: [f64; 2]) -> Result<(f64, f64), ModelError> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok((lo, hi))
    } else {
        Err(ModelError::Invalid(format!(
            "{name} must be an increasing pair of finite numbers"
        )))
    }
}

impl<T: Real> ProblemSpec<T> {
    pub fn from_config(config: ProblemConfig) -> Result<Self, ModelError> {
        let n = &config.numerics;
        let epsilon = positive("epsilon", config.epsilon)?;
        let horizon = positive("T", config.horizon)?;
        let dt = positive("dt", n.dt)?;
        positive("newton_tol", n.newton_tol)?;
        if n.fan_count < 16 {
            return Err(ModelError::Invalid("fan_count must be at least 16".into()));
        }
        if !(n.fv_cfl > 0.0 && n.fv_cfl < 1.0) {
            return Err(ModelError::Invalid("fv_cfl must lie in (0, 1)".into()));
        }
        if n.newton_max_iter == 0 || n.fv_outputs == 0 {
            return Err(ModelError::Invalid(
                "newton_max_iter and fv_outputs must be positive".into(),
            ));
        }
        if n.fv_cells < 4 {
            return Err(ModelError::Invalid("fv_cells must be at least 4".into()));
        }
        let fv_domain = interval("fv_domain", n.fv_domain)?;
        let box_u = interval("state_box.u", n.state_box.u)?;
        let box_v = interval("state_box.v", n.state_box.v)?;

        let pair = |(a, b): (f64, f64)| (T::of(a), T::of(b));
        let numerics = NumericsConfig {
            dt: T::of(dt),
            fan_count: n.fan_count,
            newton_tol: T::of(n.newton_tol),
            newton_max_iter: n.newton_max_iter,
            fv_cells: n.fv_cells,
            fv_cfl: T::of(n.fv_cfl),
            fv_domain: pair(fv_domain),
            state_box: StateBox {
                u: pair(box_u),
                v: pair(box_v),
            },
            fv_outputs: n.fv_outputs,
        };
        let ic = &config.initial;
        Ok(ProblemSpec {
            lambda: Coefficient::new("lambda", &config.lambda, false)?,
            mu: Coefficient::new("mu", &config.mu, true)?,
            f: Coefficient::new("f", &config.f, true)?,
            g: Coefficient::new("g", &config.g, true)?,
            u_flux: Coefficient::new("Lambda", &config.u_flux, false)?,
            density: Coefficient::new("Phi", &config.density, true)?,
            density_flux: Coefficient::new("Psi", &config.density_flux, true)?,
            initial: PiecewiseInitial {
                u_left: Profile::new("initial.u_left", &ic.u_left)?,
                u_right: Profile::new("initial.u_right", &ic.u_right)?,
                v_left: Profile::new("initial.v_left", &ic.v_left)?,
                v_right: Profile::new("initial.v_right", &ic.v_right)?,
            },
            epsilon: T::of(epsilon),
            horizon: T::of(horizon),
            numerics,
            config,
        })
    }

    /// Number of marching steps and the effective step `T / K`.
    pub fn time_grid(&self) -> (usize, T) {
        let ratio = (self.horizon / self.numerics.dt).as_f64();
        let steps = ((ratio - 1e-9).ceil() as usize).max(1);
        (steps, self.horizon / T::of_usize(steps))
    }

    /// Largest of `|lambda|` and `|mu|` sampled over the state box.
    pub fn speed_bound(&self) -> Result<T, EvalError> {
        let bx = &self.numerics.state_box;
        let n = 16;
        let mut bound = T::zero();
        for i in 0..=n {
            let u = bx.u.0 + (bx.u.1 - bx.u.0) * T::of_usize(i) / T::of_usize(n);
            bound = bound.max(self.lambda.at(u, T::zero())?.abs());
            for j in 0..=n {
                let v = bx.v.0 + (bx.v.1 - bx.v.0) * T::of_usize(j) / T::of_usize(n);
                bound = bound.max(self.mu.at(u, v)?.abs());
            }
        }
        Ok(bound)
    }

    /// Half-width of the initial-line interval from which characteristic
    /// fans are launched.
    pub fn fan_spread(&self) -> Result<T, EvalError> {
        let bound = self.speed_bound()?.max(T::of(1e-3));
        Ok(T::of(3.0) * bound * self.horizon)
    }

    /// Copy of this problem with `f` and `g` scaled by `factor`.
    pub fn with_scaled_sources(&self, factor: f64) -> Result<Self, ModelError> {
        let mut config = self.config.clone();
        config.f = format!("({}) * ({:?})", config.f, factor);
        config.g = format!("({}) * ({:?})", config.g, factor);
        Self::from_config(config)
    }

    /// Copy of this problem with a different small parameter.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self, ModelError> {
        let mut config = self.config.clone();
        config.epsilon = epsilon;
        Self::from_config(config)
    }
}
