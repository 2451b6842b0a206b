//! Trigonometric polynomials on the torus `[0, 2pi)^d`.
//!
//! Finite Fourier sums `f(theta) = sum_k c_k exp(i k . theta)` with integer
//! frequency vectors. Products convolve frequencies, derivatives multiply by
//! `i k_j`, and the integral over the full torus is exact: `(2pi)^d c_0`.
//! This backend exists so pairings and L1-type norms can be computed without
//! quadrature error on periodic test problems.
//!
//! The torus coordinates are the real coordinates of H^n (period 2pi each),
//! so Wirtinger derivatives combine the angular derivatives exactly as in
//! [`super::poly`].

use super::Coeff;
use num::complex::Complex64;
use std::collections::BTreeMap;

/// Frequency limit; convolution checks it to keep `i8` keys safe.
const MAX_FREQ: i32 = 120;

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    terms: BTreeMap<Vec<i8>, Complex64>,
}

fn trim(mut key: Vec<i8>) -> Vec<i8> {
    while key.last() == Some(&0) {
        key.pop();
    }
    key
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::zero();
        p.insert_add(Vec::new(), c);
        p
    }

    /// `exp(i k . theta)` for one frequency vector.
    pub fn wave(freq: &[i8], c: Complex64) -> Self {
        let mut p = Self::zero();
        p.insert_add(freq.to_vec(), c);
        p
    }

    /// `cos(theta_j)` as a real trigonometric polynomial.
    pub fn cos(j: usize) -> Self {
        let mut k = vec![0i8; j + 1];
        k[j] = 1;
        let mut p = Self::wave(&k, Complex64::new(0.5, 0.0));
        k[j] = -1;
        p.insert_add(k, Complex64::new(0.5, 0.0));
        p
    }

    /// `sin(theta_j)`.
    pub fn sin(j: usize) -> Self {
        let mut k = vec![0i8; j + 1];
        k[j] = 1;
        let mut p = Self::wave(&k, Complex64::new(0.0, -0.5));
        k[j] = -1;
        p.insert_add(k, Complex64::new(0.0, 0.5));
        p
    }

    fn insert_add(&mut self, key: Vec<i8>, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let key = trim(key);
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = *e.get() + c;
                if sum == Complex64::new(0.0, 0.0) {
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

    pub fn num_vars(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.insert_add(k.clone(), *v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        TrigPoly {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        if c == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            out.insert_add(k.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let mut key = vec![0i8; ka.len().max(kb.len())];
                for (i, e) in ka.iter().enumerate() {
                    key[i] += e;
                }
                for (i, e) in kb.iter().enumerate() {
                    let sum = key[i] as i32 + *e as i32;
                    assert!(
                        sum.abs() <= MAX_FREQ,
                        "trigonometric frequency overflow: |{sum}| > {MAX_FREQ}"
                    );
                    key[i] = sum as i8;
                }
                out.insert_add(key, va * vb);
            }
        }
        out
    }

    /// Angular derivative with respect to `theta_j`.
    pub fn deriv(&self, j: usize) -> Self {
        let mut out = Self::zero();
        for (k, v) in &self.terms {
            let f = k.get(j).copied().unwrap_or(0) as f64;
            if f != 0.0 {
                out.insert_add(k.clone(), v * Complex64::new(0.0, f));
            }
        }
        out
    }

    /// Wirtinger derivative in complex coordinate `m` (see [`super::poly`]).
    pub fn dz(&self, m: usize) -> Self {
        let a = m / 2;
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, 0.5);
        if m % 2 == 0 {
            self.deriv(4 * a)
                .scale(half)
                .sub(&self.deriv(4 * a + 1).scale(half_i))
        } else {
            self.deriv(4 * a + 2)
                .scale(half)
                .add(&self.deriv(4 * a + 3).scale(half_i))
        }
    }

    pub fn dzbar(&self, m: usize) -> Self {
        let a = m / 2;
        let half = Complex64::new(0.5, 0.0);
        let half_i = Complex64::new(0.0, 0.5);
        if m % 2 == 0 {
            self.deriv(4 * a)
                .scale(half)
                .add(&self.deriv(4 * a + 1).scale(half_i))
        } else {
            self.deriv(4 * a + 2)
                .scale(half)
                .sub(&self.deriv(4 * a + 3).scale(half_i))
        }
    }

    /// Pointwise complex conjugate: `conj(c_k) exp(-i k . theta)`.
    pub fn conj(&self) -> Self {
        TrigPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (trim(k.iter().map(|e| -e).collect()), v.conj()))
                .collect(),
        }
    }

    /// Deviation from being a real-valued function: `max_k |c_{-k} - conj(c_k)|`.
    pub fn real_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, v) in &self.terms {
            let neg: Vec<i8> = trim(k.iter().map(|e| -e).collect());
            let mirrored = self.terms.get(&neg).copied().unwrap_or_default();
            worst = worst.max((mirrored - v.conj()).norm());
        }
        worst
    }

    /// Coefficient of the zero frequency (the mean value).
    pub fn zero_mode(&self) -> Complex64 {
        self.terms.get(&Vec::new()).copied().unwrap_or_default()
    }

    /// Exact integral over `[0, 2pi)^dims`.
    pub fn integral(&self, dims: usize) -> Complex64 {
        assert!(
            self.num_vars() <= dims,
            "integral over {dims} variables of a function of {}",
            self.num_vars()
        );
        self.zero_mode() * (2.0 * std::f64::consts::PI).powi(dims as i32)
    }

    pub fn eval(&self, theta: &[f64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, v) in &self.terms {
            let phase: f64 = k
                .iter()
                .enumerate()
                .map(|(i, &f)| f as f64 * theta.get(i).copied().unwrap_or(0.0))
                .sum();
            acc += v * Complex64::new(0.0, phase).exp();
        }
        acc
    }
}

impl Coeff for TrigPoly {
    fn zero() -> Self {
        TrigPoly::zero()
    }
    fn one() -> Self {
        TrigPoly::constant(Complex64::new(1.0, 0.0))
    }
    fn is_zero(&self) -> bool {
        TrigPoly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        TrigPoly::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        TrigPoly::sub(self, other)
    }
    fn neg(&self) -> Self {
        TrigPoly::neg(self)
    }
    fn mul(&self, other: &Self) -> Self {
        TrigPoly::mul(self, other)
    }
    fn conj(&self) -> Self {
        TrigPoly::conj(self)
    }
    fn scale_i64(&self, k: i64) -> Self {
        self.scale(Complex64::new(k as f64, 0.0))
    }
    fn eq_exact(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_is_pointwise() {
        let f = TrigPoly::cos(0).add(&TrigPoly::sin(1).scale(Complex64::new(2.0, 0.0)));
        let g = TrigPoly::sin(0).mul(&TrigPoly::cos(1));
        let p = f.mul(&g);
        let theta = [0.7, -1.3];
        let lhs = p.eval(&theta);
        let rhs = f.eval(&theta) * g.eval(&theta);
        assert_relative_eq!(lhs.re, rhs.re, epsilon = 1e-12);
        assert_relative_eq!(lhs.im, rhs.im, epsilon = 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = TrigPoly::cos(0).mul(&TrigPoly::cos(0)).add(&TrigPoly::sin(1));
        let df = f.deriv(0);
        let h = 1e-6;
        let at = |t0: f64| f.eval(&[t0, 0.4]).re;
        let fd = (at(0.9 + h) - at(0.9 - h)) / (2.0 * h);
        assert_relative_eq!(df.eval(&[0.9, 0.4]).re, fd, epsilon = 1e-8);
    }

    #[test]
    fn torus_integral_is_the_zero_mode() {
        // cos^2 has mean 1/2.
        let f = TrigPoly::cos(0).mul(&TrigPoly::cos(0));
        let tau = 2.0 * std::f64::consts::PI;
        assert_relative_eq!(f.integral(1).re, 0.5 * tau, epsilon = 1e-12);
        assert_relative_eq!(f.integral(3).re, 0.5 * tau.powi(3), epsilon = 1e-9);
        // odd integrand integrates to zero
        assert_eq!(TrigPoly::sin(0).integral(1), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn real_functions_have_zero_real_deviation() {
        let f = TrigPoly::cos(0).mul(&TrigPoly::sin(2)).add(&TrigPoly::cos(1));
        assert_eq!(f.real_deviation(), 0.0);
        let g = f.add(&TrigPoly::wave(&[1], Complex64::new(0.0, 1.0)));
        assert!(g.real_deviation() > 0.9);
    }

    #[test]
    fn conj_is_pointwise_conjugation() {
        let f = TrigPoly::wave(&[1, -2], Complex64::new(0.3, -0.8));
        let theta = [1.1, 0.3];
        let lhs = f.conj().eval(&theta);
        let rhs = f.eval(&theta).conj();
        assert_relative_eq!(lhs.re, rhs.re, epsilon = 1e-12);
        assert_relative_eq!(lhs.im, rhs.im, epsilon = 1e-12);
    }
}
