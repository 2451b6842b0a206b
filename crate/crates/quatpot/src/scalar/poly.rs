//! Multivariate polynomials with complex coefficients over real variables.
//!
//! Variables are the real coordinates of H^n: quaternion slot `a` owns the
//! four consecutive variables `4a..4a+4` = (t, x, y, z). Exponent vectors are
//! stored with trailing zeros trimmed, so a polynomial carries no fixed
//! variable count and the zero polynomial is context-free.
//!
//! Wirtinger derivatives follow the coordinate convention of [`crate::quat`]:
//! the complex coordinates are `w_{2a} = t + ix` and `w_{2a+1} = y - iz`, so
//!
//! ```text
//! d/dw_{2a}   = (d/dt - i d/dx)/2      d/dwbar_{2a}   = (d/dt + i d/dx)/2
//! d/dw_{2a+1} = (d/dy + i d/dz)/2      d/dwbar_{2a+1} = (d/dy - i d/dz)/2
//! ```

use super::{Coeff, Scalar};
use num::complex::Complex;
use std::collections::BTreeMap;

/// Sparse polynomial: exponent vector -> complex coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    terms: BTreeMap<Vec<u8>, Complex<T>>,
}

fn trim(mut key: Vec<u8>) -> Vec<u8> {
    while key.last() == Some(&0) {
        key.pop();
    }
    key
}

impl<T: Scalar> Poly<T> {
    pub fn zero() -> Self {
        Poly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Complex<T>) -> Self {
        let mut p = Self::zero();
        p.insert_add(Vec::new(), c);
        p
    }

    pub fn from_real(v: T) -> Self {
        Self::constant(Complex::new(v, T::zero()))
    }

    /// The monomial `x_i`.
    pub fn var(i: usize) -> Self {
        let mut key = vec![0u8; i + 1];
        key[i] = 1;
        let mut p = Self::zero();
        p.insert_add(key, Complex::new(T::one(), T::zero()));
        p
    }

    pub fn monomial(exponents: &[u8], c: Complex<T>) -> Self {
        let mut p = Self::zero();
        p.insert_add(exponents.to_vec(), c);
        p
    }

    fn insert_add(&mut self, key: Vec<u8>, c: Complex<T>) {
        if Coeff::is_zero(&c) {
            return;
        }
        let key = trim(key);
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = Coeff::add(e.get(), &c);
                if Coeff::is_zero(&sum) {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8], &Complex<T>)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// Number of variables actually touched (1 + largest used index).
    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.insert_add(k.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), Coeff::neg(v)))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Complex<T>) -> Self {
        if Coeff::is_zero(c) {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.insert_add(k.clone(), Coeff::mul(v, c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let mut key = vec![0u8; ka.len().max(kb.len())];
                for (i, e) in ka.iter().enumerate() {
                    key[i] += e;
                }
                for (i, e) in kb.iter().enumerate() {
                    key[i] = key[i].checked_add(*e).expect("polynomial degree overflow");
                }
                out.insert_add(key, Coeff::mul(va, vb));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(Complex::new(T::one(), T::zero()));
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Formal partial derivative with respect to real variable `i`.
    pub fn deriv(&self, i: usize) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            let e = k.get(i).copied().unwrap_or(0);
            if e == 0 {
                continue;
            }
            let mut key = k.clone();
            key[i] = e - 1;
            out.insert_add(key, Coeff::scale_i64(v, e as i64));
        }
        out
    }

    fn half_i() -> Complex<T> {
        Complex::new(T::zero(), T::half())
    }

    fn half_re() -> Complex<T> {
        Complex::new(T::half(), T::zero())
    }

    /// Wirtinger derivative with respect to complex coordinate `m` (0-indexed
    /// over the 2n complex coordinates; quaternion slot `m/2`).
    pub fn dz(&self, m: usize) -> Self {
        let a = m / 2;
        if m % 2 == 0 {
            // (d/dt - i d/dx)/2 on variables (4a, 4a+1)
            self.deriv(4 * a)
                .scale(&Self::half_re())
                .sub(&self.deriv(4 * a + 1).scale(&Self::half_i()))
        } else {
            // (d/dy + i d/dz)/2 on variables (4a+2, 4a+3)
            self.deriv(4 * a + 2)
                .scale(&Self::half_re())
                .add(&self.deriv(4 * a + 3).scale(&Self::half_i()))
        }
    }

    /// Conjugate Wirtinger derivative with respect to coordinate `m`.
    pub fn dzbar(&self, m: usize) -> Self {
        let a = m / 2;
        if m % 2 == 0 {
            self.deriv(4 * a)
                .scale(&Self::half_re())
                .add(&self.deriv(4 * a + 1).scale(&Self::half_i()))
        } else {
            self.deriv(4 * a + 2)
                .scale(&Self::half_re())
                .sub(&self.deriv(4 * a + 3).scale(&Self::half_i()))
        }
    }

    /// Pointwise complex conjugate (variables are real).
    pub fn conj(&self) -> Self {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), Coeff::conj(v)))
                .collect(),
        }
    }

    /// All coefficients exactly real.
    pub fn is_real_exact(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    /// Largest imaginary part over all coefficients, as `f64`.
    pub fn max_imag(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.im.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[T]) -> Complex<T> {
        let mut acc: Complex<T> = Complex::new(T::zero(), T::zero());
        for (k, v) in &self.terms {
            let mut m = T::one();
            for (i, &e) in k.iter().enumerate() {
                for _ in 0..e {
                    m = m * x.get(i).cloned().unwrap_or_else(T::zero);
                }
            }
            acc = acc + v.clone() * Complex::new(m, T::zero());
        }
        acc
    }

    /// Substitute variable `i` by `map[i]` (identity beyond `map.len()`).
    pub fn subst(&self, map: &[Poly<T>]) -> Self {
        let one = Self::constant(Complex::new(T::one(), T::zero()));
        // Memoized powers, rebuilt lazily per variable.
        let mut powers: Vec<Vec<Poly<T>>> = map.iter().map(|_| Vec::new()).collect();
        let pow_of = |i: usize, e: u8, powers: &mut Vec<Vec<Poly<T>>>| -> Poly<T> {
            if i >= map.len() {
                return Self::var(i).pow(e as u32);
            }
            while powers[i].len() <= e as usize {
                let next = match powers[i].last() {
                    None => one.clone(),
                    Some(p) => p.mul(&map[i]),
                };
                powers[i].push(next);
            }
            powers[i][e as usize].clone()
        };
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            let mut term = Self::constant(v.clone());
            for (i, &e) in k.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&pow_of(i, e, &mut powers));
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Precompose with the linear map `x -> A x`: variable `i` is replaced by
    /// `sum_j A[i][j] x_j`. `A` is row-major `dim x dim`.
    pub fn compose_linear(&self, a: &[Vec<T>]) -> Self {
        let map: Vec<Poly<T>> = a
            .iter()
            .map(|row| {
                let mut p = Self::zero();
                for (j, coef) in row.iter().enumerate() {
                    p = p.add(&Self::var(j).scale(&Complex::new(coef.clone(), T::zero())));
                }
                p
            })
            .collect();
        self.subst(&map)
    }

    pub fn to_f64(&self) -> Poly<f64> {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), Complex::new(v.re.to_f64(), v.im.to_f64())))
                .collect(),
        }
    }
}

impl<T: Scalar> Coeff for Poly<T> {
    fn zero() -> Self {
        Poly::zero()
    }
    fn one() -> Self {
        Poly::constant(Complex::new(T::one(), T::zero()))
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        Poly::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Poly::sub(self, other)
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        Poly::mul(self, other)
    }
    fn conj(&self) -> Self {
        Poly::conj(self)
    }
    fn scale_i64(&self, k: i64) -> Self {
        if k == 0 {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(key, v)| (key.clone(), Coeff::scale_i64(v, k)))
                .collect(),
        }
    }
    fn eq_exact(&self, other: &Self) -> bool {
        self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .zip(&other.terms)
                .all(|((ka, va), (kb, vb))| ka == kb && va.eq_exact(vb))
    }
}
