//! Quaternions, the complex splitting H = C + C·j, and the induced
//! antilinear J-map on coordinate vectors.
//!
//! Convention ledger (frozen; everything downstream depends on it):
//!
//! * A quaternion is `q = t + x·i + y·j + z·k` with `i^2 = j^2 = k^2 = -1`
//!   and `i·j = k`.
//! * The splitting writes `q = z1 + z2·j` with `z1 = t + x·i`,
//!   `z2 = y + z·i`, complex scalars embedded via `sqrt(-1) -> i`.
//! * H^n is a right H-module. Its complex coordinates in C^{2n} are, for the
//!   a-th quaternion entry (0-based), `zeta_{2a} = z1` and
//!   `zeta_{2a+1} = conj(z2)`. The conjugation on the second slot makes
//!   right multiplication by complex scalars and left multiplication by
//!   quaternionic matrices both C-linear (`q = z1 + j·conj(z2)` moves `j` to
//!   the left, past which complex scalars commute with a conjugation).
//! * Right multiplication by `j` becomes the antilinear map
//!   `J(zeta_{2a}, zeta_{2a+1}) = (-conj(zeta_{2a+1}), conj(zeta_{2a}))`,
//!   with `J∘J = -Id`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num::complex::Complex;

pub type Quat = Quaternion<f64>;
pub type Complex64 = Complex<f64>;

/// A quaternion `t + x·i + y·j + z·k` over a scalar ring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion<T> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Quaternion<T> {
    pub fn new(t: T, x: T, y: T, z: T) -> Self {
        Quaternion { t, x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn one() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    pub fn i() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn j() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn k() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    pub fn from_real(t: T) -> Self {
        Self::new(t, T::zero(), T::zero(), T::zero())
    }

    pub fn from_complex(c: &Complex<T>) -> Self {
        Self::new(c.re.clone(), c.im.clone(), T::zero(), T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.t.is_zero() && self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }

    /// Quaternionic conjugate `t - x·i - y·j - z·k`; an anti-automorphism,
    /// `conj(p·q) = conj(q)·conj(p)`.
    pub fn conj(&self) -> Self {
        Self::new(
            self.t.clone(),
            -self.x.clone(),
            -self.y.clone(),
            -self.z.clone(),
        )
    }

    /// Squared norm `t^2 + x^2 + y^2 + z^2 = q·conj(q)`; exact in the ring.
    pub fn norm_sqr(&self) -> T {
        self.t.clone() * self.t.clone()
            + self.x.clone() * self.x.clone()
            + self.y.clone() * self.y.clone()
            + self.z.clone() * self.z.clone()
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(
            self.t.clone() * s.clone(),
            self.x.clone() * s.clone(),
            self.y.clone() * s.clone(),
            self.z.clone() * s.clone(),
        )
    }

    pub fn to_f64(&self) -> Quaternion<f64> {
        Quaternion::new(
            self.t.to_f64(),
            self.x.to_f64(),
            self.y.to_f64(),
            self.z.to_f64(),
        )
    }
}

impl Quaternion<f64> {
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Multiplicative inverse `conj(q) / |q|^2`.
    pub fn inverse(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::NumericalDegeneracy(
                "inverse of zero quaternion".into(),
            ));
        }
        Ok(self.conj().scale(&(1.0 / n2)))
    }
}

impl<T: Scalar> std::ops::Add for Quaternion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> std::ops::Sub for Quaternion<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.t - o.t, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> std::ops::Neg for Quaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.t, -self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> std::ops::Mul for Quaternion<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        qmul(&self, &o)
    }
}

/// Quaternion product. Associative, bilinear, `i·j = k`, `j·i = -k`.
pub fn qmul<T: Scalar>(p: &Quaternion<T>, q: &Quaternion<T>) -> Quaternion<T> {
    let (t1, x1, y1, z1) = (p.t.clone(), p.x.clone(), p.y.clone(), p.z.clone());
    let (t2, x2, y2, z2) = (q.t.clone(), q.x.clone(), q.y.clone(), q.z.clone());
    Quaternion::new(
        t1.clone() * t2.clone()
            - x1.clone() * x2.clone()
            - y1.clone() * y2.clone()
            - z1.clone() * z2.clone(),
        t1.clone() * x2.clone() + x1.clone() * t2.clone() + y1.clone() * z2.clone()
            - z1.clone() * y2.clone(),
        t1.clone() * y2.clone() - x1.clone() * z2.clone()
            + y1.clone() * t2.clone()
            + z1.clone() * x2.clone(),
        t1 * z2 + x1 * y2 - y1 * x2 + z1 * t2,
    )
}

/// The two complex components of `q = z1 + z2·j` with `z1 = t + x·i`,
/// `z2 = y + z·i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSplit<T> {
    pub z1: Complex<T>,
    pub z2: Complex<T>,
}

/// Split `q = z1 + z2·j`. Real-linear; exact (a reshuffle of components).
pub fn complex_split<T: Scalar>(q: &Quaternion<T>) -> ComplexSplit<T> {
    ComplexSplit {
        z1: Complex::new(q.t.clone(), q.x.clone()),
        z2: Complex::new(q.y.clone(), q.z.clone()),
    }
}

/// Inverse of [`complex_split`]; `reassemble(complex_split(q)) == q` exactly.
pub fn reassemble<T: Scalar>(s: &ComplexSplit<T>) -> Quaternion<T> {
    Quaternion::new(
        s.z1.re.clone(),
        s.z1.im.clone(),
        s.z2.re.clone(),
        s.z2.im.clone(),
    )
}

/// Coordinates of one quaternion entry in C^2: `(z1, conj(z2))`.
pub fn coords<T: Scalar>(q: &Quaternion<T>) -> (Complex<T>, Complex<T>) {
    let s = complex_split(q);
    (s.z1, Complex::new(s.z2.re, -s.z2.im))
}

/// Inverse of [`coords`].
pub fn from_coords<T: Scalar>(w1: &Complex<T>, w2: &Complex<T>) -> Quaternion<T> {
    Quaternion::new(
        w1.re.clone(),
        w1.im.clone(),
        w2.re.clone(),
        -w2.im.clone(),
    )
}

/// Coordinate vector of `(q_1, ..., q_n)` in C^{2n}.
pub fn coords_vec<T: Scalar>(qs: &[Quaternion<T>]) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(2 * qs.len());
    for q in qs {
        let (w1, w2) = coords(q);
        out.push(w1);
        out.push(w2);
    }
    out
}

/// Inverse of [`coords_vec`]. Errors on odd length.
pub fn from_coords_vec<T: Scalar>(v: &[Complex<T>]) -> Result<Vec<Quaternion<T>>> {
    if v.len() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "coordinate vector length {} is odd",
            v.len()
        )));
    }
    Ok(v.chunks(2).map(|c| from_coords(&c[0], &c[1])).collect())
}

/// The antilinear J-map on C^{2n} induced by right multiplication by `j`.
///
/// `J(v)_{2a} = -conj(v_{2a+1})`, `J(v)_{2a+1} = conj(v_{2a})`. Satisfies
/// `J(λv) = conj(λ)·J(v)` and `J(J(v)) = -v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JMap {
    /// Complex dimension 2n of the coordinate space.
    pub dim: usize,
}

impl JMap {
    pub fn new(n: usize) -> Self {
        JMap { dim: 2 * n }
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        jmap_vec(v, self.dim)
    }
}

/// Generic J-map on a coordinate vector; `expected_dim` guards the shape.
pub fn jmap_vec<T: Scalar>(v: &[Complex<T>], expected_dim: usize) -> Result<Vec<Complex<T>>> {
    if v.len() != expected_dim || expected_dim % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "J-map expects a vector of even length {}, got {}",
            expected_dim,
            v.len()
        )));
    }
    let conj = |c: &Complex<T>| Complex::new(c.re.clone(), -c.im.clone());
    let mut out = Vec::with_capacity(v.len());
    for pair in v.chunks(2) {
        out.push(-conj(&pair[1]));
        out.push(conj(&pair[0]));
    }
    Ok(out)
}
