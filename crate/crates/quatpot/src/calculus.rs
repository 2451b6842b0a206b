//! First- and second-order differential operators on form-valued fields.
//!
//! Coefficients of a [`Form`] may be polynomial or trigonometric functions
//! of the 4n real coordinates; [`DiffCoeff`] is the closure of [`Coeff`]
//! under the complex coordinate derivatives. On top of it sit the two
//! first-order operators
//!
//! ```text
//! d  w = sum_m e^m ^ (d/dzeta_m w)
//! dJ w = sum_a [ e^{2a+1} ^ (d/dzetabar_{2a} w) - e^{2a} ^ (d/dzetabar_{2a+1} w) ]
//! ```
//!
//! both odd derivations squaring to zero and anticommuting, and the second
//! order operator `delta = C_NORM d dJ` they generate. `delta` of a scalar
//! field is exactly the 2-form image of its quaternionic Hessian, which is
//! what pins the normalization: for f = |q_1|^2 the Hessian is 8 on the
//! first diagonal slot and `d dJ f = 2 e^0 ^ e^1`, so `C_NORM = 4`.
//!
//! Twist bookkeeping: `d` and `dJ` leave the twist tag untouched; `delta`
//! additionally decrements it by one and checks its input sits in the
//! natural line for its degree (degree p carries twist -p-1). The formal
//! adjoint `delta_star` runs the other way.

use crate::error::{Error, Result};
use crate::exterior::{insert_sign, rank_table, Form};
use crate::qlinalg::{HermitianQMatrix, QMatrix};
use crate::quat::{qmul, Complex64, Quat, Quaternion};
use crate::scalar::{Coeff, CompiledExpr, Expr, JetStack, Poly, Scalar, TrigPoly};

/// Normalization of the second-order operator: `delta = C_NORM * d dJ`.
/// Calibrated so that `delta(f)` equals the 2-form image of the
/// quaternionic Hessian of f, whose diagonal is the flat 4-variable
/// Laplacian per slot.
pub const C_NORM: i64 = 4;

/// Coefficient rings closed under the complex coordinate derivatives.
///
/// Index convention: `dz(m)` differentiates along the m-th complex
/// coordinate, `dzbar(m)` along its conjugate, in the coordinates fixed by
/// [`crate::quat`]: for slot a, `zeta_{2a} = t_a + i x_a` and
/// `zeta_{2a+1} = y_a - i z_a`.
pub trait DiffCoeff: Coeff {
    fn dz(&self, m: usize) -> Self;
    fn dzbar(&self, m: usize) -> Self;
}

impl<T: Scalar> DiffCoeff for Poly<T> {
    fn dz(&self, m: usize) -> Self {
        Poly::dz(self, m)
    }
    fn dzbar(&self, m: usize) -> Self {
        Poly::dzbar(self, m)
    }
}

impl DiffCoeff for TrigPoly {
    fn dz(&self, m: usize) -> Self {
        TrigPoly::dz(self, m)
    }
    fn dzbar(&self, m: usize) -> Self {
        TrigPoly::dzbar(self, m)
    }
}

/// First-order operator `d`: degree +1, twist unchanged.
pub fn del<F: DiffCoeff>(w: &Form<F>) -> Result<Form<F>> {
    let n2 = 2 * w.n();
    let out_degree = w.degree() + 1;
    if out_degree > n2 {
        return Err(Error::DegreeOverflow(out_degree, n2));
    }
    let mut out: Form<F> = Form::zero(w.n(), out_degree, w.twist());
    let (_, rank) = rank_table(n2, out_degree);
    for (mask, c) in w.iter() {
        if c.is_zero() {
            continue;
        }
        for m in 0..n2 {
            if mask & (1 << m) != 0 {
                continue;
            }
            let d = c.dz(m);
            if d.is_zero() {
                continue;
            }
            let r = rank[(mask | (1 << m)) as usize] as usize;
            let term = if insert_sign(mask, m) < 0 { d.neg() } else { d };
            out.coeffs[r] = out.coeffs[r].add(&term);
        }
    }
    Ok(out)
}

/// First-order operator `dJ`, the J-twisted companion of [`del`].
pub fn del_j<F: DiffCoeff>(w: &Form<F>) -> Result<Form<F>> {
    let n = w.n();
    let n2 = 2 * n;
    let out_degree = w.degree() + 1;
    if out_degree > n2 {
        return Err(Error::DegreeOverflow(out_degree, n2));
    }
    let mut out: Form<F> = Form::zero(n, out_degree, w.twist());
    let (_, rank) = rank_table(n2, out_degree);
    for (mask, c) in w.iter() {
        if c.is_zero() {
            continue;
        }
        for a in 0..n {
            // + e^{2a+1} d/dzetabar_{2a}   - e^{2a} d/dzetabar_{2a+1}
            for (src, tgt, pos) in [(2 * a, 2 * a + 1, true), (2 * a + 1, 2 * a, false)] {
                if mask & (1 << tgt) != 0 {
                    continue;
                }
                let d = c.dzbar(src);
                if d.is_zero() {
                    continue;
                }
                let mut neg = !pos;
                if insert_sign(mask, tgt) < 0 {
                    neg = !neg;
                }
                let term = if neg { d.neg() } else { d };
                let r = rank[(mask | (1 << tgt)) as usize] as usize;
                out.coeffs[r] = out.coeffs[r].add(&term);
            }
        }
    }
    Ok(out)
}

/// Second-order operator `delta = C_NORM d dJ`: degree +2, twist -1.
///
/// Input of degree p must carry twist -p-1 (scalar fields are degree 0,
/// twist -1). The identity `delta(w ^ delta(eta)) = delta(w) ^ delta(eta)`
/// holds for all degrees because `delta(eta)` is closed for both `d` and
/// `dJ`.
pub fn baston_delta<F: DiffCoeff>(w: &Form<F>) -> Result<Form<F>> {
    let expected = -(w.degree() as i32) - 1;
    if w.twist() != expected {
        return Err(Error::TwistMismatch {
            expected,
            got: w.twist(),
        });
    }
    let out = del(&del_j(w)?)?;
    Ok(out.scale_i64(C_NORM).with_twist(w.twist() - 1))
}

/// Interior product with the m-th coordinate vector:
/// `(iota_m w)_K = sign * w_{K + m}`, the adjoint of `e^m ^ (.)` under the
/// coefficient pairing.
pub fn interior<F: Coeff>(m: usize, w: &Form<F>) -> Form<F> {
    assert!(w.degree() >= 1, "interior product needs positive degree");
    let n2 = 2 * w.n();
    let out_degree = w.degree() - 1;
    let mut out: Form<F> = Form::zero(w.n(), out_degree, w.twist());
    let (_, rank) = rank_table(n2, out_degree);
    for (mask, c) in w.iter() {
        if mask & (1 << m) == 0 || c.is_zero() {
            continue;
        }
        let rest = mask & !(1 << m);
        let term = if insert_sign(rest, m) < 0 {
            c.neg()
        } else {
            c.clone()
        };
        let r = rank[rest as usize] as usize;
        out.coeffs[r] = out.coeffs[r].add(&term);
    }
    out
}

/// Formal adjoint of [`del`] on the torus: `-sum_m d/dzeta_m (iota_m w)`.
pub fn del_dagger<F: DiffCoeff>(w: &Form<F>) -> Result<Form<F>> {
    if w.degree() == 0 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: 0,
        });
    }
    let n2 = 2 * w.n();
    let mut out: Form<F> = Form::zero(w.n(), w.degree() - 1, w.twist());
    for m in 0..n2 {
        let im = interior(m, w);
        for (r, c) in im.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = c.dz(m);
            if !d.is_zero() {
                out.coeffs[r] = out.coeffs[r].sub(&d);
            }
        }
    }
    Ok(out)
}

/// Formal adjoint of [`del_j`] on the torus.
pub fn del_j_dagger<F: DiffCoeff>(w: &Form<F>) -> Result<Form<F>> {
    if w.degree() == 0 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            got: 0,
        });
    }
    let n = w.n();
    let mut out: Form<F> = Form::zero(n, w.degree() - 1, w.twist());
    for a in 0..n {
        let t1 = interior(2 * a + 1, w);
        for (r, c) in t1.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = c.dzbar(2 * a);
            if !d.is_zero() {
                out.coeffs[r] = out.coeffs[r].sub(&d);
            }
        }
        let t2 = interior(2 * a, w);
        for (r, c) in t2.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = c.dzbar(2 * a + 1);
            if !d.is_zero() {
                out.coeffs[r] = out.coeffs[r].add(&d);
            }
        }
    }
    Ok(out)
}

/// Formal adjoint of [`baston_delta`] under the torus-integrated coefficient
/// pairing: degree -2, twist +1. Input of degree k carries twist -k.
pub fn delta_star<F: DiffCoeff>(w: &Form<F>) -> Result<Form<F>> {
    let expected = -(w.degree() as i32);
    if w.twist() != expected {
        return Err(Error::TwistMismatch {
            expected,
            got: w.twist(),
        });
    }
    if w.degree() < 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            got: w.degree(),
        });
    }
    let out = del_j_dagger(&del_dagger(w)?)?;
    Ok(out.scale_i64(C_NORM).with_twist(w.twist() + 1))
}

/// Coefficient pairing `<a, b> = sum_K a_K b_K` (bilinear, no conjugation).
/// The twist tags are not constrained: the twist line is trivialized and the
/// pairing contracts it away.
pub fn pairing<F: Coeff>(a: &Form<F>, b: &Form<F>) -> Result<F> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch(format!(
            "pairing forms over H^{} and H^{}",
            a.n(),
            b.n()
        )));
    }
    if a.degree() != b.degree() {
        return Err(Error::DegreeMismatch {
            expected: a.degree(),
            got: b.degree(),
        });
    }
    let mut acc = F::zero();
    for (ca, cb) in a.coeffs.iter().zip(&b.coeffs) {
        acc = acc.add(&ca.mul(cb));
    }
    Ok(acc)
}

/// `integral over [0, 2pi)^{4n} of <a, b>` for trigonometric coefficients,
/// computed exactly from the zero Fourier mode.
pub fn torus_pairing_integral(a: &Form<TrigPoly>, b: &Form<TrigPoly>) -> Result<Complex64> {
    let p = pairing(a, b)?;
    Ok(p.integral(4 * a.n()))
}

/// Assemble the quaternionic Hessian from the real one.
///
/// With unit quaternions `c = (1, i, j, k)` indexing the four real
/// coordinates of each slot, `H_ij = sum_{u,v} c_u conj(c_v) S[4i+u][4j+v]`.
/// For symmetric S the result is Hermitian with diagonal equal to the
/// per-slot 4-variable Laplacian.
pub fn real_hessian_to_quaternionic(n: usize, s: &[f64]) -> Result<HermitianQMatrix> {
    let d = 4 * n;
    assert_eq!(s.len(), d * d, "row-major 4n x 4n input");
    let units = [
        Quaternion::from_real(1.0),
        Quat::i(),
        Quat::j(),
        Quat::k(),
    ];
    let mut table = [[Quat::zero(); 4]; 4];
    for u in 0..4 {
        for v in 0..4 {
            table[u][v] = qmul(&units[u], &units[v].conj());
        }
    }
    let mut entries = vec![Quat::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Quat::zero();
            for u in 0..4 {
                for v in 0..4 {
                    let s_uv = s[(4 * i + u) * d + 4 * j + v];
                    if s_uv != 0.0 {
                        acc = acc + table[u][v].scale(&s_uv);
                    }
                }
            }
            entries[i * n + j] = acc;
        }
    }
    HermitianQMatrix::from_entries(n, entries)
}

/// Real matrix of the left action `x -> T x` of a quaternionic matrix on
/// the 4r real coordinates, row-major 4r x 4c, coordinate order
/// (t, x, y, z) per slot.
pub fn realify_left(t: &QMatrix<f64>) -> Vec<f64> {
    let (r, c) = (t.rows(), t.cols());
    let (dr, dc) = (4 * r, 4 * c);
    let mut out = vec![0.0; dr * dc];
    for i in 0..r {
        for j in 0..c {
            let q = t[(i, j)];
            // left-multiplication block on (t, x, y, z)
            let block = [
                [q.t, -q.x, -q.y, -q.z],
                [q.x, q.t, -q.z, q.y],
                [q.y, q.z, q.t, -q.x],
                [q.z, -q.y, q.x, q.t],
            ];
            for (u, row) in block.iter().enumerate() {
                for (v, val) in row.iter().enumerate() {
                    out[(4 * i + u) * dc + 4 * j + v] = *val;
                }
            }
        }
    }
    out
}

fn mat_mul_rm(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

/// Scalar field on R^{4n} in one of three computational backends.
///
/// - `Poly`: real polynomial in the 4n coordinates; derivatives are exact.
/// - `Expr`: compiled smooth expression; derivatives via second-order jets.
/// - `Trig`: real trigonometric polynomial on the 2pi-periodic torus.
///
/// An optional linear precomposition `x -> f(A x)` is kept only for the
/// expression backend; the polynomial backend folds it into the
/// coefficients immediately and the trigonometric backend rejects it (a
/// linear map does not preserve periodicity).
#[derive(Clone, Debug)]
pub struct ScalarField {
    n: usize,
    backend: FieldBackend,
    transform: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub enum FieldBackend {
    Poly(Poly<f64>),
    Expr(CompiledExpr),
    Trig(TrigPoly),
}

impl ScalarField {
    pub fn from_poly(n: usize, p: Poly<f64>) -> Result<Self> {
        if p.num_vars() > 4 * n {
            return Err(Error::DimensionMismatch(format!(
                "polynomial in {} variables on H^{n} (4n = {})",
                p.num_vars(),
                4 * n
            )));
        }
        if p.max_imag() != 0.0 {
            return Err(Error::NotReal {
                max_deviation: p.max_imag(),
                tol: 0.0,
            });
        }
        Ok(ScalarField {
            n,
            backend: FieldBackend::Poly(p),
            transform: None,
        })
    }

    pub fn from_expr(n: usize, e: &Expr) -> Result<Self> {
        if e.num_vars() > 4 * n {
            return Err(Error::DimensionMismatch(format!(
                "expression in {} variables on H^{n} (4n = {})",
                e.num_vars(),
                4 * n
            )));
        }
        Ok(ScalarField {
            n,
            backend: FieldBackend::Expr(e.compile(4 * n)),
            transform: None,
        })
    }

    pub fn from_trig(n: usize, t: TrigPoly) -> Result<Self> {
        if t.num_vars() > 4 * n {
            return Err(Error::DimensionMismatch(format!(
                "trigonometric field in {} variables on H^{n} (4n = {})",
                t.num_vars(),
                4 * n
            )));
        }
        let dev = t.real_deviation();
        if dev > 1e-12 {
            return Err(Error::NotReal {
                max_deviation: dev,
                tol: 1e-12,
            });
        }
        Ok(ScalarField {
            n,
            backend: FieldBackend::Trig(t),
            transform: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> &FieldBackend {
        &self.backend
    }

    /// Replace f by `x -> f(A x)`, A row-major 4n x 4n.
    pub fn compose_linear(&self, a: &[f64]) -> Result<Self> {
        let d = 4 * self.n;
        if a.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "transform has {} entries, expected {}",
                a.len(),
                d * d
            )));
        }
        match &self.backend {
            FieldBackend::Poly(p) => {
                let rows: Vec<Vec<f64>> =
                    (0..d).map(|i| a[i * d..(i + 1) * d].to_vec()).collect();
                Ok(ScalarField {
                    n: self.n,
                    backend: FieldBackend::Poly(p.compose_linear(&rows)),
                    transform: None,
                })
            }
            FieldBackend::Expr(_) => {
                let combined = match &self.transform {
                    Some(t) => mat_mul_rm(t, a, d),
                    None => a.to_vec(),
                };
                Ok(ScalarField {
                    n: self.n,
                    backend: self.backend.clone(),
                    transform: Some(combined),
                })
            }
            FieldBackend::Trig(_) => Err(Error::UnsupportedBackend(
                "linear precomposition breaks torus periodicity",
            )),
        }
    }

    /// Point evaluation. Allocates scratch for the expression backend; use
    /// a [`HessianEvaluator`] in hot loops.
    pub fn value(&self, x: &[f64]) -> f64 {
        let d = 4 * self.n;
        assert_eq!(x.len(), d, "point dimension");
        match &self.backend {
            FieldBackend::Poly(p) => p.eval(x).re,
            FieldBackend::Trig(t) => t.eval(x).re,
            FieldBackend::Expr(c) => {
                let y = self.transformed_point(x);
                let mut stack = c.new_stack();
                c.eval_value(&y, &mut stack)
            }
        }
    }

    fn transformed_point(&self, x: &[f64]) -> Vec<f64> {
        match &self.transform {
            None => x.to_vec(),
            Some(a) => {
                let d = 4 * self.n;
                let mut y = vec![0.0; d];
                for i in 0..d {
                    let mut acc = 0.0;
                    for j in 0..d {
                        acc += a[i * d + j] * x[j];
                    }
                    y[i] = acc;
                }
                y
            }
        }
    }

    /// Exact 2-form of a polynomial field under `delta`, coefficients still
    /// polynomial. Only the polynomial backend admits this route.
    pub fn delta_form(&self) -> Result<Form<Poly<f64>>> {
        match &self.backend {
            FieldBackend::Poly(p) => {
                baston_delta(&Form::scalar(self.n, p.clone(), -1))
            }
            _ => Err(Error::UnsupportedBackend(
                "exact delta form requires the polynomial backend",
            )),
        }
    }

    pub fn hessian_evaluator(&self) -> HessianEvaluator {
        let d = 4 * self.n;
        let kind = match &self.backend {
            FieldBackend::Poly(p) => {
                let mut parts = Vec::with_capacity(d * (d + 1) / 2);
                for u in 0..d {
                    let du = p.deriv(u);
                    for v in u..d {
                        parts.push(du.deriv(v));
                    }
                }
                EvalKind::Poly {
                    value: p.clone(),
                    parts,
                }
            }
            FieldBackend::Expr(c) => EvalKind::Expr {
                stack: c.new_stack(),
                code: c.clone(),
            },
            FieldBackend::Trig(t) => {
                let mut parts = Vec::with_capacity(d * (d + 1) / 2);
                for u in 0..d {
                    let du = t.deriv(u);
                    for v in u..d {
                        parts.push(du.deriv(v));
                    }
                }
                EvalKind::Trig {
                    value: t.clone(),
                    parts,
                }
            }
        };
        HessianEvaluator {
            n: self.n,
            d,
            transform: self.transform.clone(),
            kind,
            s_inner: vec![0.0; d * d],
            s_outer: vec![0.0; d * d],
        }
    }
}

enum EvalKind {
    Poly { value: Poly<f64>, parts: Vec<Poly<f64>> },
    Expr { code: CompiledExpr, stack: JetStack },
    Trig { value: TrigPoly, parts: Vec<TrigPoly> },
}

/// Reusable evaluator for values and second derivatives of a
/// [`ScalarField`]; owns all scratch, so cloning one per worker thread
/// gives allocation-free inner loops.
pub struct HessianEvaluator {
    n: usize,
    d: usize,
    transform: Option<Vec<f64>>,
    kind: EvalKind,
    s_inner: Vec<f64>,
    s_outer: Vec<f64>,
}

/// Index of (u, v) with u <= v in the packed upper triangle of a d x d
/// symmetric matrix stored row by row.
fn upper_index(d: usize, u: usize, v: usize) -> usize {
    u * d - u * (u + 1) / 2 + v
}

impl HessianEvaluator {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn value_at(&mut self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.d);
        let y = self.apply_transform(x);
        match &mut self.kind {
            EvalKind::Poly { value, .. } => value.eval(&y).re,
            EvalKind::Trig { value, .. } => value.eval(&y).re,
            EvalKind::Expr { code, stack } => code.eval_value(&y, stack),
        }
    }

    fn apply_transform(&self, x: &[f64]) -> Vec<f64> {
        match &self.transform {
            None => x.to_vec(),
            Some(a) => {
                let d = self.d;
                let mut y = vec![0.0; d];
                for i in 0..d {
                    let mut acc = 0.0;
                    for j in 0..d {
                        acc += a[i * d + j] * x[j];
                    }
                    y[i] = acc;
                }
                y
            }
        }
    }

    /// Real 4n x 4n Hessian at x (row-major slice borrowed from scratch).
    pub fn real_hessian(&mut self, x: &[f64]) -> &[f64] {
        assert_eq!(x.len(), self.d);
        let d = self.d;
        let y = self.apply_transform(x);
        match &mut self.kind {
            EvalKind::Poly { parts, .. } => {
                for u in 0..d {
                    for v in u..d {
                        let val = parts[upper_index(d, u, v)].eval(&y).re;
                        self.s_inner[u * d + v] = val;
                        self.s_inner[v * d + u] = val;
                    }
                }
            }
            EvalKind::Trig { parts, .. } => {
                for u in 0..d {
                    for v in u..d {
                        let val = parts[upper_index(d, u, v)].eval(&y).re;
                        self.s_inner[u * d + v] = val;
                        self.s_inner[v * d + u] = val;
                    }
                }
            }
            EvalKind::Expr { code, stack } => {
                let jet = code.eval_jet(&y, stack);
                self.s_inner.copy_from_slice(&jet.h);
            }
        }
        match &self.transform {
            None => &self.s_inner,
            Some(a) => {
                // S_x = A^T S_y A
                let tmp = mat_mul_rm(&self.s_inner, a, d);
                for p in 0..d {
                    for q in 0..d {
                        let mut acc = 0.0;
                        for r in 0..d {
                            acc += a[r * d + p] * tmp[r * d + q];
                        }
                        self.s_outer[p * d + q] = acc;
                    }
                }
                &self.s_outer
            }
        }
    }

    /// Quaternionic Hessian at x.
    pub fn hessian(&mut self, x: &[f64]) -> Result<HermitianQMatrix> {
        let n = self.n;
        let s = self.real_hessian(x).to_vec();
        real_hessian_to_quaternionic(n, &s)
    }
}
