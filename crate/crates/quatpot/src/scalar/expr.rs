//! Closed-form scalar expressions with compiled second-order evaluation.
//!
//! `Expr` is a small AST over real variables; `compile` flattens it to a
//! postfix program evaluated on a reusable jet stack, giving the value,
//! gradient, and Hessian at a point in one pass. Non-polynomial fields
//! (regularized norms, bump cutoffs) live here; polynomial and trigonometric
//! fields have exact backends of their own.

use super::jet::Jet;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Powi(Box<Expr>, i32),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
    Ln(Box<Expr>),
    Cosh(Box<Expr>),
    Tanh(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    /// `ln(cosh(sqrt(.)))`: smooth kernel of the regularized max family.
    LogCoshSqrt(Box<Expr>),
    /// `exp(-1/(1-u^2))` for `|u| < 1`, else 0.
    Bump(Box<Expr>),
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn powi(self, k: i32) -> Expr {
        Expr::Powi(Box::new(self), k)
    }

    pub fn sqrt(self) -> Expr {
        Expr::Sqrt(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Box::new(self))
    }

    pub fn cosh(self) -> Expr {
        Expr::Cosh(Box::new(self))
    }

    pub fn tanh(self) -> Expr {
        Expr::Tanh(Box::new(self))
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn log_cosh_sqrt(self) -> Expr {
        Expr::LogCoshSqrt(Box::new(self))
    }

    pub fn bump(self) -> Expr {
        Expr::Bump(Box::new(self))
    }

    /// 1 + the largest variable index used.
    pub fn num_vars(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.num_vars().max(b.num_vars())
            }
            Expr::Neg(a)
            | Expr::Powi(a, _)
            | Expr::Sqrt(a)
            | Expr::Exp(a)
            | Expr::Ln(a)
            | Expr::Cosh(a)
            | Expr::Tanh(a)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::LogCoshSqrt(a)
            | Expr::Bump(a) => a.num_vars(),
        }
    }

    /// Sum of squares of variables `lo..hi`.
    pub fn norm_sqr(lo: usize, hi: usize) -> Expr {
        let mut acc = Expr::c(0.0);
        for i in lo..hi {
            acc = acc + Expr::var(i).powi(2);
        }
        acc
    }

    pub fn compile(&self, dim: usize) -> CompiledExpr {
        assert!(
            self.num_vars() <= dim,
            "expression uses variable {} but dim = {dim}",
            self.num_vars() - 1
        );
        let mut code = Vec::new();
        emit(self, &mut code);
        // Stack depth by simulation; every op's effect is fixed.
        let mut depth = 0usize;
        let mut max_depth = 0usize;
        for op in &code {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div => depth -= 1,
                _ => {}
            }
            max_depth = max_depth.max(depth);
        }
        CompiledExpr {
            dim,
            code,
            max_depth,
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[derive(Clone, Debug)]
enum Op {
    Const(f64),
    Var(usize),
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Powi(i32),
    Sqrt,
    Exp,
    Ln,
    Cosh,
    Tanh,
    Sin,
    Cos,
    LogCoshSqrt,
    Bump,
}

fn emit(e: &Expr, code: &mut Vec<Op>) {
    match e {
        Expr::Const(v) => code.push(Op::Const(*v)),
        Expr::Var(i) => code.push(Op::Var(*i)),
        Expr::Add(a, b) => {
            emit(a, code);
            emit(b, code);
            code.push(Op::Add);
        }
        Expr::Sub(a, b) => {
            emit(a, code);
            emit(b, code);
            code.push(Op::Sub);
        }
        Expr::Mul(a, b) => {
            emit(a, code);
            emit(b, code);
            code.push(Op::Mul);
        }
        Expr::Div(a, b) => {
            emit(a, code);
            emit(b, code);
            code.push(Op::Div);
        }
        Expr::Neg(a) => {
            emit(a, code);
            code.push(Op::Neg);
        }
        Expr::Powi(a, k) => {
            emit(a, code);
            code.push(Op::Powi(*k));
        }
        Expr::Sqrt(a) => {
            emit(a, code);
            code.push(Op::Sqrt);
        }
        Expr::Exp(a) => {
            emit(a, code);
            code.push(Op::Exp);
        }
        Expr::Ln(a) => {
            emit(a, code);
            code.push(Op::Ln);
        }
        Expr::Cosh(a) => {
            emit(a, code);
            code.push(Op::Cosh);
        }
        Expr::Tanh(a) => {
            emit(a, code);
            code.push(Op::Tanh);
        }
        Expr::Sin(a) => {
            emit(a, code);
            code.push(Op::Sin);
        }
        Expr::Cos(a) => {
            emit(a, code);
            code.push(Op::Cos);
        }
        Expr::LogCoshSqrt(a) => {
            emit(a, code);
            code.push(Op::LogCoshSqrt);
        }
        Expr::Bump(a) => {
            emit(a, code);
            code.push(Op::Bump);
        }
    }
}

/// Postfix program plus the stack bound needed to run it.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    dim: usize,
    code: Vec<Op>,
    max_depth: usize,
}

impl CompiledExpr {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Allocate an evaluation scratch usable for many points.
    pub fn new_stack(&self) -> JetStack {
        JetStack {
            slots: (0..self.max_depth.max(1))
                .map(|_| Jet::new(self.dim))
                .collect(),
            values: vec![0.0; self.max_depth.max(1)],
        }
    }

    /// Full second-order evaluation at `x`; result borrowed from the stack.
    pub fn eval_jet<'s>(&self, x: &[f64], stack: &'s mut JetStack) -> &'s Jet {
        debug_assert_eq!(x.len(), self.dim);
        let slots = &mut stack.slots;
        let mut sp = 0usize;
        for op in &self.code {
            match op {
                Op::Const(v) => {
                    slots[sp].set_const(*v);
                    sp += 1;
                }
                Op::Var(i) => {
                    slots[sp].set_var(*i, x[*i]);
                    sp += 1;
                }
                Op::Add => {
                    let (a, b) = slots.split_at_mut(sp - 1);
                    a[sp - 2].add_assign(&b[0]);
                    sp -= 1;
                }
                Op::Sub => {
                    let (a, b) = slots.split_at_mut(sp - 1);
                    a[sp - 2].sub_assign(&b[0]);
                    sp -= 1;
                }
                Op::Mul => {
                    let (a, b) = slots.split_at_mut(sp - 1);
                    a[sp - 2].mul_assign(&b[0]);
                    sp -= 1;
                }
                Op::Div => {
                    let (a, b) = slots.split_at_mut(sp - 1);
                    a[sp - 2].div_assign_consuming(&mut b[0]);
                    sp -= 1;
                }
                Op::Neg => slots[sp - 1].neg_assign(),
                Op::Powi(k) => slots[sp - 1].powi_assign(*k),
                Op::Sqrt => slots[sp - 1].sqrt_assign(),
                Op::Exp => slots[sp - 1].exp_assign(),
                Op::Ln => slots[sp - 1].ln_assign(),
                Op::Cosh => slots[sp - 1].cosh_assign(),
                Op::Tanh => slots[sp - 1].tanh_assign(),
                Op::Sin => slots[sp - 1].sin_assign(),
                Op::Cos => slots[sp - 1].cos_assign(),
                Op::LogCoshSqrt => slots[sp - 1].log_cosh_sqrt_assign(),
                Op::Bump => slots[sp - 1].bump_assign(),
            }
        }
        debug_assert_eq!(sp, 1);
        &slots[0]
    }

    /// Value-only evaluation (no derivatives), for test functions and
    /// finite-difference cross-checks.
    pub fn eval_value(&self, x: &[f64], stack: &mut JetStack) -> f64 {
        let vals = &mut stack.values;
        let mut sp = 0usize;
        for op in &self.code {
            match op {
                Op::Const(v) => {
                    vals[sp] = *v;
                    sp += 1;
                }
                Op::Var(i) => {
                    vals[sp] = x[*i];
                    sp += 1;
                }
                Op::Add => {
                    vals[sp - 2] += vals[sp - 1];
                    sp -= 1;
                }
                Op::Sub => {
                    vals[sp - 2] -= vals[sp - 1];
                    sp -= 1;
                }
                Op::Mul => {
                    vals[sp - 2] *= vals[sp - 1];
                    sp -= 1;
                }
                Op::Div => {
                    vals[sp - 2] /= vals[sp - 1];
                    sp -= 1;
                }
                Op::Neg => vals[sp - 1] = -vals[sp - 1],
                Op::Powi(k) => vals[sp - 1] = vals[sp - 1].powi(*k),
                Op::Sqrt => vals[sp - 1] = vals[sp - 1].sqrt(),
                Op::Exp => vals[sp - 1] = vals[sp - 1].exp(),
                Op::Ln => vals[sp - 1] = vals[sp - 1].ln(),
                Op::Cosh => vals[sp - 1] = vals[sp - 1].cosh(),
                Op::Tanh => vals[sp - 1] = vals[sp - 1].tanh(),
                Op::Sin => vals[sp - 1] = vals[sp - 1].sin(),
                Op::Cos => vals[sp - 1] = vals[sp - 1].cos(),
                Op::LogCoshSqrt => {
                    let (f0, _, _) = super::jet::log_cosh_sqrt_derivatives(vals[sp - 1]);
                    vals[sp - 1] = f0;
                }
                Op::Bump => {
                    let u = vals[sp - 1];
                    let w = 1.0 - u * u;
                    vals[sp - 1] = if w <= 1e-3 { 0.0 } else { (-1.0 / w).exp() };
                }
            }
        }
        debug_assert_eq!(sp, 1);
        vals[0]
    }
}

/// Reusable evaluation scratch: one jet and one value slot per stack level.
pub struct JetStack {
    slots: Vec<Jet>,
    values: Vec<f64>,
}
