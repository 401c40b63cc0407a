#![allow(dead_code)]

use proptest::prelude::*;
use shockfit::model::{load_spec, ProblemSpec};

/// Expression text over `u`, `v`, `x` that stays smooth for arguments in
/// [0.5, 1.5]: every quotient, logarithm and root has a positive guard.
pub fn smooth_expr() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0.25f64..2.0).prop_map(|c| format!("{c}")),
        Just("u".to_string()),
        Just("v".to_string()),
        Just("x".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})+({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})-({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(1+({b})^2)")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), 0u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("exp(sin({a}))")),
            inner.clone().prop_map(|a| format!("ln(1+({a})^2)")),
            inner.clone().prop_map(|a| format!("sqrt(2+cos({a}))")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.prop_map(|a| format!("cos({a})")),
        ]
    })
}

pub fn point() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.5f64..1.5, 0.5f64..1.5, 0.5f64..1.5)
}

pub const DECOUPLED: &str = r#"{
    "lambda": "u", "mu": "v", "f": "-u", "g": "-v",
    "Lambda": "u^2/2", "Phi": "v", "Psi": "v^2/2",
    "initial": {"u_left": "1", "u_right": "0", "v_left": "3", "v_right": "2"},
    "epsilon": 0.05, "T": 0.5,
    "numerics": {"dt": 1e-3, "fan_count": 32, "fv_cells": 400, "fv_domain": [-0.5, 2.0],
                 "state_box": {"u": [0.0, 1.0], "v": [1.5, 3.0]}}
}"#;

pub const COUPLED: &str = r#"{
    "lambda": "u", "mu": "2*u+v", "f": "-u+0.2*v", "g": "-v+0.5*u*u",
    "Lambda": "u^2/2", "Phi": "-1/(u+v)", "Psi": "ln(u+v)-u/(u+v)",
    "initial": {"u_left": "1", "u_right": "0", "v_left": "3", "v_right": "2"},
    "epsilon": 0.05, "T": 0.5,
    "numerics": {"dt": 1e-3, "fan_count": 32, "fv_cells": 400, "fv_domain": [-0.5, 2.0],
                 "state_box": {"u": [-0.2, 1.2], "v": [1.5, 3.5]}}
}"#;

/// Coupled pair with smooth, non-constant initial data on both sides.
pub const SMOOTH: &str = r#"{
    "lambda": "u", "mu": "2*u+v", "f": "-u+0.2*v", "g": "-v+0.5*u*u",
    "Lambda": "u^2/2", "Phi": "-1/(u+v)", "Psi": "ln(u+v)-u/(u+v)",
    "initial": {"u_left": "1+0.1*sin(x)", "u_right": "0.1*cos(x)-0.1", "v_left": "3+0.1*x", "v_right": "2-0.05*sin(2*x)"},
    "epsilon": 0.05, "T": 0.5,
    "numerics": {"dt": 1e-3, "fan_count": 64, "fv_cells": 400, "fv_domain": [-0.5, 2.0],
                 "state_box": {"u": [-0.3, 1.3], "v": [1.5, 3.5]}}
}"#;

pub fn spec(text: &str) -> ProblemSpec<f64> {
    load_spec(text).expect("fixture loads")
}

/// `text` with `"key": "old"` replaced by `"key": "new"`.
pub fn with_field(text: &str, key: &str, value: &str) -> String {
    let start = text.find(&format!("\"{key}\": \"")).expect("key present");
    let open = start + key.len() + 5;
    let close = open + text[open..].find('"').unwrap();
    format!("{}{}{}", &text[..open], value, &text[close..])
}
