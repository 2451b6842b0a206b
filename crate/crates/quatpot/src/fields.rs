//! Text mini-language for scalar fields on `H^n = R^{4n}`.
//!
//! A field spec is one of the named built-ins or a polynomial literal.
//! Coordinates are numbered `0..4n` as in [`crate::quat`]: quaternion slot
//! `a` owns coordinates `4a..4a+4`.
//!
//! ```text
//! norm2                      sum of |q_a|^2, the standard convex calibrant
//! sqrt_norm2_eps:EPS         sqrt(norm2 + EPS^2), EPS > 0
//! logcosh:EPS                EPS * ln(cosh(sqrt(norm2)/EPS)), EPS > 0
//! quadratic:m00,m01,...      x^T M x, M row-major 4n x 4n (symmetrized)
//! affine:c0,c1,...,c_4n      c0 + sum c_i x_{i-1}
//! poly:T(;T)*                sum of monomial terms T
//! ```
//!
//! A monomial term `T` is a comma-separated list of `1 + 4n` numbers: the
//! real coefficient followed by one nonnegative integer exponent per
//! coordinate. `sqrt_norm2_eps` and `logcosh` are the two designated
//! smoothing families of the cone function `sqrt(norm2)`; they share their
//! C^0 limit but differ at every positive EPS.

use crate::calculus::ScalarField;
use crate::error::{Error, Result};
use crate::quat::Complex64;
use crate::scalar::expr::Expr;
use crate::scalar::poly::Poly;

/// Parses a field spec over `H^n`. See the module docs for the grammar.
pub fn parse_field(n: usize, spec: &str) -> Result<ScalarField> {
    let d = 4 * n;
    let (name, args) = match spec.split_once(':') {
        Some((name, args)) => (name.trim(), Some(args.trim())),
        None => (spec.trim(), None),
    };
    match name {
        "norm2" => {
            no_args(name, args)?;
            ScalarField::from_poly(n, norm2_poly(d))
        }
        "sqrt_norm2_eps" => {
            let eps = positive_eps(name, args)?;
            let e = (Expr::norm_sqr(0, d) + Expr::Const(eps * eps)).sqrt();
            ScalarField::from_expr(n, &e)
        }
        "logcosh" => {
            let eps = positive_eps(name, args)?;
            let e = (Expr::norm_sqr(0, d) / Expr::Const(eps * eps)).log_cosh_sqrt()
                * Expr::Const(eps);
            ScalarField::from_expr(n, &e)
        }
        "quadratic" => {
            let m = float_list(name, args)?;
            if m.len() != d * d {
                return Err(Error::InvalidConfig(format!(
                    "quadratic needs {} = (4n)^2 entries, got {}",
                    d * d,
                    m.len()
                )));
            }
            let mut p = Poly::<f64>::constant(Complex64::new(0.0, 0.0));
            for i in 0..d {
                for j in 0..d {
                    // Symmetrize so the Hessian is exactly M + M^T.
                    let c = 0.5 * (m[i * d + j] + m[j * d + i]);
                    if c != 0.0 {
                        let term = Poly::var(i)
                            .mul(&Poly::var(j))
                            .scale(&Complex64::new(c, 0.0));
                        p = p.add(&term);
                    }
                }
            }
            ScalarField::from_poly(n, p)
        }
        "affine" => {
            let c = float_list(name, args)?;
            if c.len() != d + 1 {
                return Err(Error::InvalidConfig(format!(
                    "affine needs {} = 4n + 1 coefficients, got {}",
                    d + 1,
                    c.len()
                )));
            }
            let mut p = Poly::constant(Complex64::new(c[0], 0.0));
            for i in 0..d {
                if c[i + 1] != 0.0 {
                    p = p.add(&Poly::var(i).scale(&Complex64::new(c[i + 1], 0.0)));
                }
            }
            ScalarField::from_poly(n, p)
        }
        "poly" => {
            let body = args.filter(|a| !a.is_empty()).ok_or_else(|| {
                Error::InvalidConfig("poly needs at least one term after the colon".into())
            })?;
            let mut p = Poly::<f64>::constant(Complex64::new(0.0, 0.0));
            for term in body.split(';') {
                let nums = parse_floats(term)?;
                if nums.len() != d + 1 {
                    return Err(Error::InvalidConfig(format!(
                        "each poly term needs a coefficient plus {d} exponents, got {} numbers",
                        nums.len()
                    )));
                }
                let coeff = nums[0];
                let mut exps = Vec::with_capacity(d);
                for &e in &nums[1..] {
                    if e < 0.0 || e.fract() != 0.0 || e > 255.0 {
                        return Err(Error::InvalidConfig(format!(
                            "poly exponents must be small nonnegative integers, got {e}"
                        )));
                    }
                    exps.push(e as u8);
                }
                p = p.add(&Poly::monomial(&exps, Complex64::new(coeff, 0.0)));
            }
            ScalarField::from_poly(n, p)
        }
        other => Err(Error::InvalidConfig(format!(
            "unknown field '{other}'; expected norm2, sqrt_norm2_eps, logcosh, quadratic, affine, or poly"
        ))),
    }
}

/// `sum |q_a|^2` as a polynomial over all `4n` coordinates.
pub fn norm2_poly(d: usize) -> Poly<f64> {
    let mut p = Poly::constant(Complex64::new(0.0, 0.0));
    for i in 0..d {
        p = p.add(&Poly::var(i).mul(&Poly::var(i)));
    }
    p
}

fn no_args(name: &str, args: Option<&str>) -> Result<()> {
    match args {
        None => Ok(()),
        Some(_) => Err(Error::InvalidConfig(format!("{name} takes no arguments"))),
    }
}

fn positive_eps(name: &str, args: Option<&str>) -> Result<f64> {
    let raw = args.ok_or_else(|| {
        Error::InvalidConfig(format!("{name} needs a positive EPS after the colon"))
    })?;
    let eps: f64 = raw
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{name}: cannot parse EPS '{raw}'")))?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "{name}: EPS must be positive and finite, got {eps}"
        )));
    }
    Ok(eps)
}

fn float_list(name: &str, args: Option<&str>) -> Result<Vec<f64>> {
    let raw = args
        .ok_or_else(|| Error::InvalidConfig(format!("{name} needs a comma-separated list")))?;
    parse_floats(raw)
}

fn parse_floats(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("cannot parse number '{tok}'")))
        })
        .collect()
}
