//! One line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{smooth_expr, spec, with_field, COUPLED, DECOUPLED, SMOOTH};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use shockfit::characteristics::{build_u_fan, build_v_fan, u0_eval, CharField, Region};
use shockfit::expansion::Expansion;
use shockfit::expr::{parse, Bindings, Var};
use shockfit::hugoniot::ShockSide;
use shockfit::model::{load_spec, validate, ProblemSpec};
use shockfit::reference::{compare, fit_slope, output_times, run_reference, FiniteVolume, ShockOracle};

type Outcome = Result<String, String>;

/// Coupled pair with sources strong enough that the second-order remainder
/// stands well above the finest grid error.
const SWEEP_CASE: &str = r#"{
    "lambda": "u", "mu": "2*u+v", "f": "-6*u+1.2*v", "g": "-6*v+3*u*u",
    "Lambda": "u^2/2", "Phi": "-1/(u+v)", "Psi": "ln(u+v)-u/(u+v)",
    "initial": {"u_left": "1", "u_right": "0", "v_left": "3", "v_right": "2"},
    "epsilon": 0.08, "T": 0.75,
    "numerics": {"dt": 1e-3, "fan_count": 64, "fv_cells": 16384, "fv_domain": [-0.5, 2.0],
                 "state_box": {"u": [-0.1, 1.1], "v": [1.35, 3.5]}}
}"#;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn with_dt(s: &ProblemSpec<f64>, dt: f64) -> ProblemSpec<f64> {
    let mut c = s.config.clone();
    c.numerics.dt = dt;
    ProblemSpec::from_config(c).unwrap()
}

/// `s0` and `s1` of `D (1 - exp(-eps t)) / eps`, by central differences
/// in `eps`.
fn damped_coefficients(d: f64, t: f64) -> (f64, f64) {
    let s = |e: f64| -d * (-e * t).exp_m1() / e;
    let h = 1e-4;
    ((s(h) + s(-h)) / 2.0, (s(h) - s(-h)) / (2.0 * h))
}

fn decoupled_shocks() -> Outcome {
    let e = Expansion::build(&with_dt(&spec(DECOUPLED), 1e-4)).map_err(err)?;
    let mut worst: f64 = 0.0;
    for (curve, d) in [(&e.first.minus, 0.5), (&e.first.plus, 2.5)] {
        for k in 0..curve.len() {
            let (s0, s1) = damped_coefficients(d, curve.time(k));
            worst = worst.max((curve.s0[k] - s0).abs()).max((curve.s1[k] - s1).abs());
        }
    }
    check(worst <= 1e-6, format!("max |s - exact| = {worst:.2e} (tol 1e-6)"))
}

fn decoupled_corrections() -> Outcome {
    let e = Expansion::build(&spec(DECOUPLED)).map_err(err)?;
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for t in [0.1, 0.25, 0.4, 0.5] {
        let (a, b) = (e.first.minus.s0_at(t), e.first.plus.s0_at(t));
        for x in [a - 0.4, a - 0.05, 0.5 * (a + b), a + 0.1, b - 0.1, b + 0.05, b + 0.4] {
            let (u0, v0) = e.eval_leading(x, t).map_err(err)?;
            let (u1, v1) = e.eval_first_order(x, t).map_err(err)?;
            // each state decays like exp(-eps t)
            let rate = |q: f64| q * ((-h * t).exp() - (h * t).exp()) / (2.0 * h);
            worst = worst.max((u1 - rate(u0)).abs()).max((v1 - rate(v0)).abs());
        }
    }
    for k in 0..e.first.levels() {
        let plus = e.first.traces(ShockSide::Plus, k).unwrap();
        let minus = e.first.traces(ShockSide::Minus, k).unwrap();
        worst = worst.max(plus.inner.u1.abs()).max((minus.inner.v1 + 3.0 * minus.t).abs());
    }
    check(worst <= 1e-6, format!("max |(u1, v1) - exact| = {worst:.2e} (tol 1e-6)"))
}

fn zero_sources() -> Outcome {
    let text = with_field(&with_field(COUPLED, "f", "0"), "g", "0");
    let e = Expansion::build(&spec(&text)).map_err(err)?;
    let mut worst: f64 = 0.0;
    for c in [&e.first.minus, &e.first.plus] {
        worst = c.s1.iter().chain(&c.d1).fold(worst, |a, b| a.max(b.abs()));
    }
    for k in 0..e.first.levels() {
        for side in [ShockSide::Minus, ShockSide::Plus] {
            let tr = e.first.traces(side, k).unwrap();
            for q in [tr.outer.u1, tr.outer.v1, tr.inner.u1, tr.inner.v1] {
                worst = worst.max(q.abs());
            }
        }
    }
    for t in [0.1, 0.3, 0.5] {
        for i in 0..=40 {
            let x = -0.5 + 2.5 * i as f64 / 40.0;
            let (u1, v1) = e.eval_first_order(x, t).map_err(err)?;
            worst = worst.max(u1.abs()).max(v1.abs());
        }
    }
    check(worst <= 1e-12, format!("max first-order magnitude = {worst:.2e} (tol 1e-12)"))
}

fn hugoniot_scaling() -> Outcome {
    let base = spec(COUPLED).with_epsilon(0.1).map_err(err)?;
    let e = Expansion::build(&base).map_err(err)?;
    let eps = [0.1, 0.05, 0.025, 0.0125];
    let r: Vec<f64> = eps.iter().map(|&x| e.hugoniot_residual(x, 1)).collect::<Result<_, _>>().map_err(err)?;
    let slope = fit_slope(&eps, &r).ok_or("degenerate residuals")?;
    let shown: Vec<String> = r.iter().map(|x| format!("{x:.2e}")).collect();
    check(slope >= 1.9, format!("residual slope = {slope:.3} (min 1.9), residuals {}", shown.join(", ")))
}

fn sweep_ratio() -> Outcome {
    let base: ProblemSpec<f64> = load_spec(SWEEP_CASE).map_err(err)?;
    let report = validate(&base);
    if !report.passed() {
        return Err(format!("case fails validation: {report}"));
    }
    let e = Expansion::build(&base).map_err(err)?;
    let times = output_times(&base);
    let oracle = FiniteVolume { cells: 16384 };
    let mut rows = Vec::new();
    for eps in [0.08, 0.04] {
        let run = oracle.run(&base.with_epsilon(eps).map_err(err)?, &times).map_err(err)?;
        rows.push(compare(&e, &run, eps, f64::INFINITY));
    }
    let ratio = rows[0].error() / rows[1].error();
    let resolved = rows.iter().all(|c| c.grid_error_estimate < c.error() / 10.0);
    let grids: Vec<String> = rows
        .iter()
        .map(|c| format!("{:.2e}/{:.2e}", c.grid_error_estimate, c.error()))
        .collect();
    check(
        (3.0..=5.0).contains(&ratio) && resolved,
        format!(
            "e(0.08)/e(0.04) = {ratio:.3} (band [3, 5]), grid/e = {} (max 1/10)",
            grids.join(", ")
        ),
    )
}

/// Derivative of `x` across curves at `c` by the three-point formula on the
/// uneven feet.
fn cross_derivative(fan: &CharField<f64>, c: usize, k: usize) -> f64 {
    let xi = fan.feet();
    let (h1, h2) = (xi[c] - xi[c - 1], xi[c + 1] - xi[c]);
    let x = |i| fan.sample(i, k).0;
    -h2 / (h1 * (h1 + h2)) * x(c - 1) + (h2 - h1) / (h1 * h2) * x(c) + h1 / (h2 * (h1 + h2)) * x(c + 1)
}

fn characteristics() -> Outcome {
    let linear = spec(&with_field(DECOUPLED, "u_right", "x"));
    let mut exact: f64 = 0.0;
    for t in [0.0, 0.1, 0.3, 0.5] {
        for x in [-0.4, 0.0, 0.3, 0.9, 1.7] {
            let r = u0_eval(&linear, Region::OuterRight, x, t).map_err(err)?;
            exact = exact.max((r.value - x / (1.0 + t)).abs()).max((r.slope - 1.0 / (1.0 + t)).abs());
        }
    }
    let mut c = spec(SMOOTH).config;
    // dense enough that the difference quotient resolves the data
    c.numerics.fan_count = 4096;
    let s = ProblemSpec::from_config(c).unwrap();
    let mut jac: f64 = 0.0;
    for region in [Region::OuterLeft, Region::OuterRight] {
        for fan in [build_u_fan(&s, region).map_err(err)?, build_v_fan(&s, region).map_err(err)?] {
            for k in [fan.steps() / 2, fan.steps()] {
                for c in 1..fan.curve_count() - 1 {
                    let j = fan.sample(c, k).1;
                    jac = jac.max((j - cross_derivative(&fan, c, k)).abs() / j.abs());
                }
            }
        }
    }
    check(
        exact <= 1e-10 && jac <= 1e-4,
        format!("u0 error = {exact:.2e} (tol 1e-10), Jacobian relative error = {jac:.2e} (tol 1e-4)"),
    )
}

fn expression_derivatives() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let strategy = (smooth_expr(), (0.5f64..1.5, 0.5f64..1.5, 0.5f64..1.5), 0usize..3);
    let (mut cases, mut worst) = (0, 0.0_f64);
    while cases < 1000 {
        let (text, (u, v, x), var) = strategy.new_tree(&mut runner).map_err(err)?.current();
        let e = parse(&text).map_err(err)?;
        let var = Var::ALL[var];
        let b = Bindings::uv(u, v).with(Var::X, x);
        let exact = e.differentiate(var).eval(&b).map_err(err)?;
        if exact.abs() >= 1e4 {
            continue;
        }
        let h = 1e-6;
        let at = |s: f64| e.eval(&b.with(var, b.get(var).unwrap() + s));
        let fd = (at(h).map_err(err)? - at(-h).map_err(err)?) / (2.0 * h);
        worst = worst.max((exact - fd).abs() / exact.abs().max(1.0));
        cases += 1;
    }
    check(worst <= 1e-7, format!("{cases} cases, max relative error = {worst:.2e} (tol 1e-7)"))
}

fn conservation() -> Outcome {
    let s = spec(COUPLED);
    let sol = run_reference(&s, &output_times(&s)).map_err(err)?;
    let [bu, bw] = sol.budget_error;
    check(
        bu <= 1e-10 && bw <= 1e-10,
        format!("{} steps, budget misses u {bu:.2e}, Phi {bw:.2e} (tol 1e-10)", sol.steps),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("decoupled shock curves match the damped closed form", decoupled_shocks),
        ("decoupled corrections decay with every state", decoupled_corrections),
        ("zero sources give zero first-order terms", zero_sources),
        ("jump-condition residuals are second order", hugoniot_scaling),
        ("coupled epsilon sweep against finite volumes", sweep_ratio),
        ("characteristic fields and Jacobians", characteristics),
        ("symbolic derivatives match finite differences", expression_derivatives),
        ("finite-volume conservation budget", conservation),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let secs = started.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {} {name}: {detail} [{secs:.1}s]", i + 1);
        failed += outcome.is_err() as usize;
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
