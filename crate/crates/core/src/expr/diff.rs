use super::{Expr, Func, Var};

// Smart constructors. They fold literal subtrees and drop additive zeros and
// multiplicative ones; nothing else is simplified.

fn constant(c: f64) -> Expr {
    Expr::Const(c)
}

fn is(e: &Expr, c: f64) -> bool {
    matches!(e, Expr::Const(k) if *k == c)
}

fn folded(c: f64) -> Option<Expr> {
    c.is_finite().then_some(Expr::Const(c))
}

pub(super) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => constant(-c),
        Expr::Neg(inner) => *inner,
        other => Expr::Neg(Box::new(other)),
    }
}

pub(super) fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => constant(x + y),
        _ if is(&a, 0.0) => b,
        _ if is(&b, 0.0) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub(super) fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => constant(x - y),
        _ if is(&b, 0.0) => a,
        _ if is(&a, 0.0) => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub(super) fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => constant(x * y),
        _ if is(&a, 0.0) || is(&b, 0.0) => constant(0.0),
        _ if is(&a, 1.0) => b,
        _ if is(&b, 1.0) => a,
        _ if is(&a, -1.0) => neg(b),
        _ if is(&b, -1.0) => neg(a),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub(super) fn div(a: Expr, b: Expr) -> Expr {
    if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
        if *y != 0.0 {
            return constant(x / y);
        }
    }
    if is(&b, 1.0) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

pub(super) fn pow(a: Expr, n: u32) -> Expr {
    match (&a, n) {
        (_, 0) => constant(1.0),
        (_, 1) => a,
        (Expr::Const(c), _) => folded(c.powi(n as i32)).unwrap_or(Expr::Pow(Box::new(a), n)),
        _ => Expr::Pow(Box::new(a), n),
    }
}

pub(super) fn call(func: Func, a: Expr) -> Expr {
    if let Expr::Const(c) = a {
        let value = match func {
            Func::Exp => c.exp(),
            Func::Ln if c > 0.0 => c.ln(),
            Func::Sin => c.sin(),
            Func::Cos => c.cos(),
            Func::Sqrt if c >= 0.0 => c.sqrt(),
            _ => f64::NAN,
        };
        if let Some(e) = folded(value) {
            return e;
        }
    }
    Expr::Call(func, Box::new(a))
}

impl Expr {
    /// Exact symbolic derivative with respect to `var`.
    pub fn differentiate(&self, var: Var) -> Expr {
        match self {
            Expr::Const(_) => constant(0.0),
            Expr::Var(w) => constant(if *w == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.differentiate(var)),
            Expr::Add(a, b) => add(a.differentiate(var), b.differentiate(var)),
            Expr::Sub(a, b) => sub(a.differentiate(var), b.differentiate(var)),
            Expr::Mul(a, b) => add(
                mul(a.differentiate(var), (**b).clone()),
                mul((**a).clone(), b.differentiate(var)),
            ),
            Expr::Div(a, b) => {
                let da = a.differentiate(var);
                let db = b.differentiate(var);
                // (a/b)' = a'/b - a b' / b^2
                let first = div(da, (**b).clone());
                let second = div(mul((**a).clone(), db), pow((**b).clone(), 2));
                sub(first, second)
            }
            Expr::Pow(a, n) => match n {
                0 => constant(0.0),
                _ => mul(
                    mul(constant(*n as f64), pow((**a).clone(), n - 1)),
                    a.differentiate(var),
                ),
            },
            Expr::Call(func, a) => {
                let da = a.differentiate(var);
                let inner = (**a).clone();
                let outer = match func {
                    Func::Exp => call(Func::Exp, inner),
                    Func::Ln => div(constant(1.0), inner),
                    Func::Sin => call(Func::Cos, inner),
                    Func::Cos => neg(call(Func::Sin, inner)),
                    Func::Sqrt => div(constant(0.5), call(Func::Sqrt, inner)),
                };
                mul(outer, da)
            }
        }
    }

    /// Rebuilds the tree through the folding constructors.
    pub fn fold_constants(&self) -> Expr {
        match self {
            Expr::Const(c) => constant(*c),
            Expr::Var(w) => Expr::Var(*w),
            Expr::Neg(a) => neg(a.fold_constants()),
            Expr::Add(a, b) => add(a.fold_constants(), b.fold_constants()),
            Expr::Sub(a, b) => sub(a.fold_constants(), b.fold_constants()),
            Expr::Mul(a, b) => mul(a.fold_constants(), b.fold_constants()),
            Expr::Div(a, b) => div(a.fold_constants(), b.fold_constants()),
            Expr::Pow(a, n) => pow(a.fold_constants(), *n),
            Expr::Call(f, a) => call(*f, a.fold_constants()),
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Bindings};

    use super::*;

    fn at(e: &Expr, u: f64, v: f64) -> f64 {
        e.eval(&Bindings::uv(u, v)).unwrap()
    }

    #[test]
    fn power_rule() {
        let d = parse("u^2/2").unwrap().differentiate(Var::U);
        assert!((at(&d, 3.0, 0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn quotient_rule() {
        let d = parse("-1/(u+v)").unwrap().differentiate(Var::V);
        assert!((at(&d, 1.0, 1.0) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn independent_variable_folds_to_zero() {
        assert_eq!(parse("v").unwrap().differentiate(Var::U), Expr::Const(0.0));
        assert_eq!(parse("3*v^2 + exp(v)").unwrap().differentiate(Var::U), Expr::Const(0.0));
    }

    #[test]
    fn constant_folding_skips_invalid_literals() {
        assert_eq!(parse("2*3+1").unwrap().fold_constants(), Expr::Const(7.0));
        assert!(matches!(parse("1/0").unwrap().fold_constants(), Expr::Div(..)));
        assert!(matches!(parse("ln(0-1)").unwrap().fold_constants(), Expr::Call(..)));
    }

    #[test]
    fn function_rules() {
        let e = parse("sqrt(u)*sin(v) + cos(u*v) + ln(u)").unwrap();
        let (u, v) = (1.3f64, 0.4f64);
        let du = e.differentiate(Var::U);
        let expected = 0.5 / u.sqrt() * v.sin() - v * (u * v).sin() + 1.0 / u;
        assert!((at(&du, u, v) - expected).abs() < 1e-14);
    }
}
