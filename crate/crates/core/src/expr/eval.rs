use super::{Expr, Func, Var};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("ln of nonpositive argument {0}")]
    LnDomain(f64),
    #[error("sqrt of negative argument {0}")]
    SqrtDomain(f64),
    #[error("variable `{0}` is not bound")]
    Unbound(Var),
    #[error("result is not finite")]
    NonFinite,
}

/// Values for the variables an expression may reference.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Bindings<T> {
    pub u: Option<T>,
    pub v: Option<T>,
    pub x: Option<T>,
}

impl<T: Copy> Bindings<T> {
    pub fn uv(u: T, v: T) -> Self {
        Bindings {
            u: Some(u),
            v: Some(v),
            x: None,
        }
    }

    pub fn x(x: T) -> Self {
        Bindings {
            u: None,
            v: None,
            x: Some(x),
        }
    }

    pub fn with(mut self, var: Var, value: T) -> Self {
        match var {
            Var::U => self.u = Some(value),
            Var::V => self.v = Some(value),
            Var::X => self.x = Some(value),
        }
        self
    }

    #[inline]
    pub fn get(&self, var: Var) -> Result<T, EvalError> {
        match var {
            Var::U => self.u,
            Var::V => self.v,
            Var::X => self.x,
        }
        .ok_or(EvalError::Unbound(var))
    }
}

#[inline]
fn apply_div<T: Real>(a: T, b: T) -> Result<T, EvalError> {
    if b == T::zero() {
        Err(EvalError::DivisionByZero)
    } else {
        Ok(a / b)
    }
}

#[inline]
fn apply_call<T: Real>(func: Func, a: T) -> Result<T, EvalError> {
    match func {
        Func::Exp => Ok(a.exp()),
        Func::Ln if a > T::zero() => Ok(a.ln()),
        Func::Ln => Err(EvalError::LnDomain(a.as_f64())),
        Func::Sin => Ok(a.sin()),
        Func::Cos => Ok(a.cos()),
        Func::Sqrt if a >= T::zero() => Ok(a.sqrt()),
        Func::Sqrt => Err(EvalError::SqrtDomain(a.as_f64())),
    }
}

#[inline]
fn finite<T: Real>(value: T) -> Result<T, EvalError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(EvalError::NonFinite)
    }
}

impl Expr {
    /// Evaluates the tree directly.
    pub fn eval<T: Real>(&self, b: &Bindings<T>) -> Result<T, EvalError> {
        finite(self.eval_raw(b)?)
    }

    fn eval_raw<T: Real>(&self, b: &Bindings<T>) -> Result<T, EvalError> {
        Ok(match self {
            Expr::Const(c) => T::of(*c),
            Expr::Var(w) => b.get(*w)?,
            Expr::Neg(a) => -a.eval_raw(b)?,
            Expr::Add(a, c) => a.eval_raw(b)? + c.eval_raw(b)?,
            Expr::Sub(a, c) => a.eval_raw(b)? - c.eval_raw(b)?,
            Expr::Mul(a, c) => a.eval_raw(b)? * c.eval_raw(b)?,
            Expr::Div(a, c) => apply_div(a.eval_raw(b)?, c.eval_raw(b)?)?,
            Expr::Pow(a, n) => a.eval_raw(b)?.powi(*n as i32),
            Expr::Call(f, a) => apply_call(*f, a.eval_raw(b)?)?,
        })
    }

    /// Flattens the tree into a postfix program with literals converted to `T`.
    pub fn compile<T: Real>(&self) -> Program<T> {
        let mut em = Emitter {
            ops: Vec::with_capacity(self.size()),
            depth: 0,
            max_depth: 0,
        };
        em.emit(self);
        Program {
            ops: em.ops,
            max_depth: em.max_depth.max(1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op<T> {
    Const(T),
    Var(Var),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow(i32),
    Call(Func),
}

struct Emitter<T> {
    ops: Vec<Op<T>>,
    depth: usize,
    max_depth: usize,
}

impl<T: Real> Emitter<T> {
    fn push(&mut self, op: Op<T>, delta: isize) {
        self.ops.push(op);
        self.depth = (self.depth as isize + delta) as usize;
        self.max_depth = self.max_depth.max(self.depth);
    }

    fn emit(&mut self, e: &Expr) {
        match e {
            Expr::Const(c) => self.push(Op::Const(T::of(*c)), 1),
            Expr::Var(w) => self.push(Op::Var(*w), 1),
            Expr::Neg(a) => {
                self.emit(a);
                self.push(Op::Neg, 0);
            }
            Expr::Pow(a, n) => {
                self.emit(a);
                self.push(Op::Pow(*n as i32), 0);
            }
            Expr::Call(f, a) => {
                self.emit(a);
                self.push(Op::Call(*f), 0);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                self.emit(a);
                self.emit(b);
                let op = match e {
                    Expr::Add(..) => Op::Add,
                    Expr::Sub(..) => Op::Sub,
                    Expr::Mul(..) => Op::Mul,
                    _ => Op::Div,
                };
                self.push(op, -1);
            }
        }
    }
}

const INLINE_STACK: usize = 24;

/// Postfix form of an [`Expr`], evaluated on a small value stack. Produces
/// bitwise the same results as [`Expr::eval`].
#[derive(Clone, Debug, PartialEq)]
pub struct Program<T> {
    ops: Vec<Op<T>>,
    max_depth: usize,
}

impl<T: Real> Program<T> {
    /// The literal value when the program is a single constant.
    pub fn as_const(&self) -> Option<T> {
        match self.ops.as_slice() {
            [Op::Const(c)] => Some(*c),
            _ => None,
        }
    }

    #[inline]
    pub fn eval(&self, b: &Bindings<T>) -> Result<T, EvalError> {
        if let [Op::Const(c)] = self.ops.as_slice() {
            return Ok(*c);
        }
        if self.max_depth <= INLINE_STACK {
            let mut stack = [T::zero(); INLINE_STACK];
            self.run(&mut stack, b)
        } else {
            let mut stack = vec![T::zero(); self.max_depth];
            self.run(&mut stack, b)
        }
    }

    #[inline]
    fn run(&self, stack: &mut [T], b: &Bindings<T>) -> Result<T, EvalError> {
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Const(c) => {
                    stack[sp] = c;
                    sp += 1;
                }
                Op::Var(w) => {
                    stack[sp] = b.get(w)?;
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Pow(n) => stack[sp - 1] = stack[sp - 1].powi(n),
                Op::Call(f) => stack[sp - 1] = apply_call(f, stack[sp - 1])?,
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    sp -= 1;
                    let (a, c) = (stack[sp - 1], stack[sp]);
                    stack[sp - 1] = match *op {
                        Op::Add => a + c,
                        Op::Sub => a - c,
                        Op::Mul => a * c,
                        _ => apply_div(a, c)?,
                    };
                }
            }
        }
        finite(stack[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn spec_examples() {
        let e = parse("u^2/2").unwrap();
        assert_eq!(e.eval(&Bindings::uv(3.0, 0.0)).unwrap(), 4.5);

        let e = parse("ln(u+v)-u/(u+v)").unwrap();
        let value: f64 = e.eval(&Bindings::uv(1.0, 1.0)).unwrap();
        assert!((value - (2f64.ln() - 0.5)).abs() < 1e-15);
        assert!((value - 0.19314718).abs() < 1e-8);

        let e = parse("exp(u)").unwrap();
        assert_eq!(e.eval(&Bindings::uv(0.0, 0.0)).unwrap(), 1.0);

        let e = parse("2*u+v").unwrap();
        assert_eq!(e.eval(&Bindings::uv(1.5, 1.0)).unwrap(), 4.0);
    }

    #[test]
    fn evaluation_errors() {
        let b = Bindings::uv(2.0, 2.0);
        assert_eq!(
            parse("1/(u-v)").unwrap().eval(&b),
            Err(EvalError::DivisionByZero)
        );
        assert!(matches!(
            parse("ln(u-v)").unwrap().eval(&b),
            Err(EvalError::LnDomain(_))
        ));
        assert!(matches!(
            parse("sqrt(v-u-1)").unwrap().eval(&b),
            Err(EvalError::SqrtDomain(_))
        ));
        assert_eq!(
            parse("u + x").unwrap().eval(&b),
            Err(EvalError::Unbound(Var::X))
        );
        assert_eq!(
            parse("exp(u*1000)").unwrap().eval(&b),
            Err(EvalError::NonFinite)
        );
    }

    #[test]
    fn program_matches_tree_bitwise() {
        let texts = [
            "ln(u+v)-u/(u+v)",
            "-1/(u+v)^2 + sin(u)*cos(v) - sqrt(u*u+v*v)",
            "((((u+1)*(v+2))/((u+3)*(v+4)))^3 - exp(-u))",
        ];
        for text in texts {
            let e = parse(text).unwrap();
            let p: Program<f64> = e.compile();
            for i in 0..20 {
                let b = Bindings::uv(0.1 + 0.37 * i as f64, 0.9 - 0.01 * i as f64);
                assert_eq!(e.eval(&b).unwrap().to_bits(), p.eval(&b).unwrap().to_bits());
            }
        }
    }

    #[test]
    fn program_errors_match_tree() {
        let e = parse("1/(u-v)").unwrap();
        let p: Program<f64> = e.compile();
        assert_eq!(p.eval(&Bindings::uv(1.0, 1.0)), Err(EvalError::DivisionByZero));
        assert_eq!(p.eval(&Bindings::x(1.0)), Err(EvalError::Unbound(Var::U)));
    }

    #[test]
    fn single_precision_evaluation() {
        let p: Program<f32> = parse("u^2/2").unwrap().compile();
        assert_eq!(p.eval(&Bindings::uv(3.0f32, 0.0)).unwrap(), 4.5f32);
    }

    #[test]
    fn deep_programs_use_heap_stack() {
        // right-nested sums need one stack slot per level
        let text = (0..40).fold(String::from("u"), |acc, _| format!("u + ({acc})"));
        let e = parse(&text).unwrap();
        let p: Program<f64> = e.compile();
        assert!(p.max_depth > INLINE_STACK);
        assert_eq!(p.eval(&Bindings::uv(1.0, 0.0)).unwrap(), 41.0);
    }
}
