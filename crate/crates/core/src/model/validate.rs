use std::fmt;

use serde_json::{json, Map, Value};

use super::{ProblemSpec, Side};
use crate::expr::EvalError;
use crate::hugoniot::{density_shock_speed, inner_v_state, u_shock_speed, HugoniotError};
use crate::scalar::Real;

const GRID: usize = 33;
const COMPAT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Worst residual or margin; `None` when it could not be evaluated.
    pub residual: Option<f64>,
    pub location: String,
    pub mandatory: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    /// True when every mandatory check passed.
    pub fn passed(&self) -> bool {
        self.checks
            .iter()
            .all(|c| !c.mandatory || c.status == CheckStatus::Pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for c in &self.checks {
            map.insert(
                c.name.to_string(),
                json!({
                    "status": match c.status { CheckStatus::Pass => "pass", CheckStatus::Fail => "fail" },
                    "residual": c.residual.filter(|r| r.is_finite()),
                    "location": c.location,
                    "mandatory": c.mandatory,
                }),
            );
        }
        Value::Object(map)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
            };
            let residual = c
                .residual
                .map(|r| format!("{r:.3e}"))
                .unwrap_or_else(|| "n/a".into());
            let tag = if c.mandatory { "" } else { " (advisory)" };
            writeln!(
                f,
                "{status:<5} {:<26} residual {residual:<11} at {}{tag}",
                c.name, c.location
            )?;
        }
        let verdict = if self.passed() { "valid" } else { "invalid" };
        write!(f, "specification is {verdict}")
    }
}

fn result(name: &'static str, ok: bool, residual: f64, location: String) -> CheckResult {
    CheckResult {
        name,
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        residual: Some(residual),
        location,
        mandatory: true,
    }
}

fn failed(name: &'static str, reason: impl fmt::Display) -> CheckResult {
    CheckResult {
        name,
        status: CheckStatus::Fail,
        residual: None,
        location: reason.to_string(),
        mandatory: true,
    }
}

fn grid<T: Real>((lo, hi): (T, T), i: usize) -> T {
    lo + (hi - lo) * T::of_usize(i) / T::of_usize(GRID - 1)
}

/// Worst `|lhs - rhs|` relative to `1e-9 * max(1, |lhs|, |rhs|)` over the
/// state box.
fn identity_check<T: Real>(
    spec: &ProblemSpec<T>,
    name: &'static str,
    sides: impl Fn(T, T) -> Result<(T, T), EvalError>,
) -> CheckResult {
    let bx = &spec.numerics.state_box;
    let mut worst = (0.0f64, 0.0f64, String::from("-"));
    for i in 0..GRID {
        for j in 0..GRID {
            let (u, v) = (grid(bx.u, i), grid(bx.v, j));
            let here = || format!("u={}, v={}", u, v);
            let (lhs, rhs) = match sides(u, v) {
                Ok(pair) => pair,
                Err(e) => return failed(name, format!("{e} at {}", here())),
            };
            let (lhs, rhs) = (lhs.as_f64(), rhs.as_f64());
            let residual = (lhs - rhs).abs();
            let ratio = residual / (COMPAT_TOL * 1f64.max(lhs.abs()).max(rhs.abs()));
            if ratio > worst.0 || worst.2 == "-" {
                worst = (ratio, residual, here());
            }
        }
    }
    result(name, worst.0 <= 1.0, worst.1, worst.2)
}

/// Minimum of `margin(u, v)` over the state box; passes when positive.
fn margin_check<T: Real>(
    spec: &ProblemSpec<T>,
    name: &'static str,
    margin: impl Fn(T, T) -> Result<T, EvalError>,
) -> CheckResult {
    let bx = &spec.numerics.state_box;
    let mut worst: Option<(f64, String)> = None;
    for i in 0..GRID {
        for j in 0..GRID {
            let (u, v) = (grid(bx.u, i), grid(bx.v, j));
            let m = match margin(u, v) {
                Ok(m) => m.as_f64(),
                Err(e) => return failed(name, format!("{e} at u={u}, v={v}")),
            };
            if worst.as_ref().is_none_or(|(w, _)| m < *w) {
                worst = Some((m, format!("u={u}, v={v}")));
            }
        }
    }
    let (m, at) = worst.expect("nonempty grid");
    result(name, m > 0.0, m, at)
}

/// Leading-order states and speeds at the origin.
struct Origin<T> {
    u_left: T,
    u_right: T,
    v_left: T,
    v_right: T,
    v_inner: T,
    d_minus: T,
    d_plus: T,
}

fn origin<T: Real>(spec: &ProblemSpec<T>) -> Result<Origin<T>, HugoniotError> {
    let zero = T::zero();
    let ic = &spec.initial;
    let u_left = ic.u(Side::Left).at(zero)?;
    let u_right = ic.u(Side::Right).at(zero)?;
    let v_left = ic.v(Side::Left).at(zero)?;
    let v_right = ic.v(Side::Right).at(zero)?;
    let d_minus = u_shock_speed(spec, u_left, u_right, zero)?;
    let v_inner = inner_v_state(spec, (u_left, v_left), u_right, d_minus, zero)?;
    let d_plus = density_shock_speed(spec, (u_right, v_right), (u_right, v_inner), zero)?;
    Ok(Origin {
        u_left,
        u_right,
        v_left,
        v_right,
        v_inner,
        d_minus,
        d_plus,
    })
}

fn shock_checks<T: Real>(spec: &ProblemSpec<T>, o: &Origin<T>) -> Result<Vec<CheckResult>, EvalError> {
    let at0 = || String::from("t=0");
    let lam = |u: T| spec.lambda.at(u, T::zero());
    let mu = |u: T, v: T| spec.mu.at(u, v);
    let mut out = Vec::new();

    let states = [
        (o.u_left, o.v_left),
        (o.u_right, o.v_right),
        (o.u_right, o.v_inner),
    ];
    let bx = &spec.numerics.state_box;
    let outside = states.iter().find(|(u, v)| !bx.contains(*u, *v));
    out.push(match outside {
        None => result("states_in_box", true, 0.0, at0()),
        Some((u, v)) => result("states_in_box", false, 1.0, format!("u={u}, v={v}")),
    });

    let (ju, jv) = ((o.u_left - o.u_right).abs(), (o.v_left - o.v_right).abs());
    let jump = ju.min(jv).as_f64();
    out.push(result("initial_jumps", jump > 1e-12, jump, at0()));

    let (ll, lr) = (lam(o.u_left)?, lam(o.u_right)?);
    let m = (ll - o.d_minus).min(o.d_minus - lr).as_f64();
    out.push(result("lax_u_shock", m > 0.0, m, at0()));

    let (mi, mr) = (mu(o.u_right, o.v_inner)?, mu(o.u_right, o.v_right)?);
    let m = (mi - o.d_plus).min(o.d_plus - mr).as_f64();
    out.push(result("lax_v_shock", m > 0.0, m, at0()));

    let m = (o.d_plus - o.d_minus).as_f64();
    out.push(result("shock_ordering", m > 0.0, m, at0()));

    let m = (o.d_plus - lr).min(mi - o.d_minus).as_f64();
    out.push(result("transversality", m > 0.0, m, at0()));
    Ok(out)
}

fn focusing_check<T: Real>(spec: &ProblemSpec<T>) -> CheckResult {
    let name = "no_focusing";
    let spread = match spec.fan_spread() {
        Ok(s) => s,
        Err(e) => return CheckResult { mandatory: false, ..failed(name, e) },
    };
    let samples = 4 * GRID;
    let mut worst: Option<(f64, String)> = None;
    for side in [Side::Left, Side::Right] {
        let piece = spec.initial.u(side);
        for i in 0..samples {
            let xi = -spread + T::of(2.0) * spread * T::of_usize(i) / T::of_usize(samples - 1);
            let rate = piece.at(xi).and_then(|u| {
                Ok(spec.lambda.du(u, T::zero())? * piece.slope(xi)?)
            });
            let rate = match rate {
                Ok(r) => r,
                Err(e) => return CheckResult { mandatory: false, ..failed(name, e) },
            };
            let m = (T::one() + spec.horizon * rate).min(T::one()).as_f64();
            if worst.as_ref().is_none_or(|(w, _)| m < *w) {
                worst = Some((m, format!("{side:?} piece, xi={xi}, t={}", spec.horizon)));
            }
        }
    }
    let (m, at) = worst.expect("nonempty samples");
    CheckResult {
        mandatory: false,
        ..result(name, m > 0.0, m, at)
    }
}

/// Samples the structural hypotheses of the problem. Never fails; failed
/// checks are recorded in the report.
pub fn validate<T: Real>(spec: &ProblemSpec<T>) -> ValidationReport {
    let zero = T::zero();
    let mut checks = vec![
        identity_check(spec, "compatibility_flux_u", |u, _| {
            Ok((spec.u_flux.du(u, zero)?, spec.lambda.at(u, zero)?))
        }),
        identity_check(spec, "compatibility_density_u", |u, v| {
            Ok((
                spec.density_flux.du(u, v)?,
                spec.lambda.at(u, zero)? * spec.density.du(u, v)?,
            ))
        }),
        identity_check(spec, "compatibility_density_v", |u, v| {
            Ok((spec.density_flux.dv(u, v)?, spec.mu.at(u, v)? * spec.density.dv(u, v)?))
        }),
        margin_check(spec, "density_v_nonzero", |u, v| {
            Ok(spec.density.dv(u, v)?.abs() - T::of(1e-12))
        }),
        margin_check(spec, "strict_hyperbolicity", |u, v| {
            Ok(spec.mu.at(u, v)? - spec.lambda.at(u, zero)?)
        }),
    ];
    const SHOCK_CHECKS: [&str; 6] = [
        "states_in_box",
        "initial_jumps",
        "lax_u_shock",
        "lax_v_shock",
        "shock_ordering",
        "transversality",
    ];
    match origin(spec) {
        Ok(o) => match shock_checks(spec, &o) {
            Ok(list) => checks.extend(list),
            Err(e) => checks.extend(SHOCK_CHECKS.iter().map(|n| failed(n, e))),
        },
        Err(e) => checks.extend(SHOCK_CHECKS.iter().map(|n| failed(n, &e))),
    }
    checks.push(focusing_check(spec));
    ValidationReport { checks }
}
