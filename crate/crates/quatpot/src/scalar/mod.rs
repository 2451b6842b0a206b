//! Scalar rings and coefficient fields.
//!
//! Most of the library runs on `f64`, but the algebraic identities (wedge
//! associativity, the differential identities, multiplicativity of the
//! second-order operator) are also checked in exact rational arithmetic.
//! [`Scalar`] abstracts the two coefficient rings; [`Coeff`] abstracts what
//! exterior forms need from their coefficients, so the same form engine works
//! over constants, polynomials, and trigonometric polynomials.

use num::complex::Complex;
use num::{BigRational, FromPrimitive, ToPrimitive};

pub use expr::{CompiledExpr, Expr, JetStack};
pub use jet::Jet;
pub use poly::Poly;
pub use trig::TrigPoly;

pub mod expr;
pub mod jet;
pub mod poly;
pub mod trig;

/// A commutative ring with ½, ordered embedding into `f64`.
///
/// Implemented by `f64` (fast path) and `BigRational` (exact path).
pub trait Scalar:
    Clone + std::fmt::Debug + num::Num + std::ops::Neg<Output = Self> + 'static
{
    fn from_i64(v: i64) -> Self;
    /// The element 1/2. Wirtinger derivatives need it exactly.
    fn half() -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn half() -> Self {
        0.5
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        <BigRational as FromPrimitive>::from_i64(v).expect("i64 embeds in BigRational")
    }
    fn half() -> Self {
        BigRational::new(1.into(), 2.into())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Coefficient ring for exterior forms.
///
/// `conj` is complex conjugation of values; for function-valued coefficients
/// it acts pointwise. `scale_i64` is exact integer scaling in every backend.
pub trait Coeff: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn conj(&self) -> Self;
    fn scale_i64(&self, k: i64) -> Self;
    /// Structural equality (exact, not tolerance-based).
    fn eq_exact(&self, other: &Self) -> bool;
}

impl<T: Scalar> Coeff for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn one() -> Self {
        Complex::new(T::one(), T::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        self.clone() + other.clone()
    }
    fn sub(&self, other: &Self) -> Self {
        self.clone() - other.clone()
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn mul(&self, other: &Self) -> Self {
        self.clone() * other.clone()
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn scale_i64(&self, k: i64) -> Self {
        let k = T::from_i64(k);
        Complex::new(self.re.clone() * k.clone(), self.im.clone() * k)
    }
    fn eq_exact(&self, other: &Self) -> bool {
        self.re == other.re && self.im == other.im
    }
}
