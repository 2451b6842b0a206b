//! Twisted exterior forms on C^{2n} and their real structure.
//!
//! A `Form` of degree p is an element of Λ^p(C^{2n})* carrying an integer
//! twist tag `w`. The twist line is globally trivialized on flat space, so
//! it participates only in bookkeeping: wedge adds twists, the real
//! structure conjugates across it.
//!
//! Basis covectors are written `e^0, ..., e^{2n-1}` in the coordinates of
//! [`crate::quat`]: covector `2a` is dual to the `z1` coordinate of
//! quaternion slot `a`, covector `2a+1` to the `conj(z2)` coordinate.
//!
//! The real structure rho is the coefficient conjugation composed with the
//! covector relabeling induced by right multiplication by j:
//!
//! ```text
//! j*: e^{2a} -> e^{2a+1},   e^{2a+1} -> -e^{2a}
//! ```
//!
//! rho squares to the identity on even degrees and to minus the identity on
//! odd degrees. Real degree-2 forms of twist -2 are exactly the image of the
//! quaternionic Hermitian matrices under [`herm_to_form`], normalized so the
//! identity matrix maps to the standard form `Omega_0 = sum_a e^{2a} ^
//! e^{2a+1}`.

use crate::error::{Error, Result};
use crate::qlinalg::HermitianQMatrix;
use crate::quat::{complex_split, Complex64, Quat, Quaternion};
use crate::scalar::Coeff;
use nalgebra::DMatrix;

/// Binomial coefficient, exact in u64 for the desk-scale range.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// All p-element subsets of {0..n2-1} as bitmasks, ascending.
pub fn subsets(n2: usize, p: usize) -> Vec<u32> {
    assert!(n2 <= 16, "index space larger than intended desk scale");
    (0u32..(1 << n2))
        .filter(|m| m.count_ones() as usize == p)
        .collect()
}

pub(crate) fn rank_table(n2: usize, p: usize) -> (Vec<u32>, Vec<u32>) {
    let masks = subsets(n2, p);
    let mut rank = vec![u32::MAX; 1 << n2];
    for (r, &m) in masks.iter().enumerate() {
        rank[m as usize] = r as u32;
    }
    (masks, rank)
}

/// Sign of sorting the concatenation (A ascending, B ascending) of two
/// disjoint index sets into ascending order.
fn merge_sign(a: u32, b: u32) -> i64 {
    debug_assert_eq!(a & b, 0);
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let i = bb.trailing_zeros();
        inversions += (a >> (i + 1)).count_ones();
        bb &= bb - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign of `e^m ^ e^K -> e^{K + m}` (moving `e^m` into sorted position).
pub(crate) fn insert_sign(mask: u32, m: usize) -> i64 {
    if (mask & ((1 << m) - 1)).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Exterior form with coefficients in any [`Coeff`] ring.
///
/// `Form<Complex64>` is the plain twisted form; polynomial or trigonometric
/// coefficients turn it into a form-valued field over R^{4n}.
#[derive(Clone, Debug)]
pub struct Form<C> {
    n: usize,
    degree: usize,
    twist: i32,
    pub(crate) coeffs: Vec<C>,
}

/// Constant-coefficient twisted form.
pub type TwistedForm = Form<Complex64>;

impl<C: Coeff> Form<C> {
    pub fn zero(n: usize, degree: usize, twist: i32) -> Self {
        let dim = binomial(2 * n, degree);
        Form {
            n,
            degree,
            twist,
            coeffs: vec![C::zero(); dim],
        }
    }

    /// Degree-0 form holding one scalar.
    pub fn scalar(n: usize, value: C, twist: i32) -> Self {
        Form {
            n,
            degree: 0,
            twist,
            coeffs: vec![value],
        }
    }

    /// Basis form `e^K` for the index set `mask`.
    pub fn basis(n: usize, mask: u32, twist: i32) -> Self {
        let degree = mask.count_ones() as usize;
        assert!(mask < (1 << (2 * n)), "index out of range for H^{n}");
        let mut f = Self::zero(n, degree, twist);
        let (_, rank) = rank_table(2 * n, degree);
        f.coeffs[rank[mask as usize] as usize] = C::one();
        f
    }

    pub fn from_fn(
        n: usize,
        degree: usize,
        twist: i32,
        mut f: impl FnMut(u32) -> C,
    ) -> Self {
        let masks = subsets(2 * n, degree);
        Form {
            n,
            degree,
            twist,
            coeffs: masks.iter().map(|&m| f(m)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn twist(&self) -> i32 {
        self.twist
    }

    /// Override the twist tag (bookkeeping only; coefficients untouched).
    pub fn with_twist(mut self, twist: i32) -> Self {
        self.twist = twist;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Iterate `(mask, coefficient)` in ascending mask order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &C)> {
        let masks = subsets(2 * self.n, self.degree);
        masks.into_iter().zip(self.coeffs.iter())
    }

    pub fn coeff(&self, mask: u32) -> C {
        let (_, rank) = rank_table(2 * self.n, self.degree);
        let r = rank[mask as usize];
        assert!(r != u32::MAX, "mask has wrong cardinality for this degree");
        self.coeffs[r as usize].clone()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "forms over H^{} and H^{}",
                self.n, other.n
            )));
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        if self.twist != other.twist {
            return Err(Error::TwistMismatch {
                expected: self.twist,
                got: other.twist,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect();
        Ok(Form {
            n: self.n,
            degree: self.degree,
            twist: self.twist,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Form {
            n: self.n,
            degree: self.degree,
            twist: self.twist,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        Form {
            n: self.n,
            degree: self.degree,
            twist: self.twist,
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        Form {
            n: self.n,
            degree: self.degree,
            twist: self.twist,
            coeffs: self.coeffs.iter().map(|c| c.scale_i64(k)).collect(),
        }
    }

    /// Wedge product. Degrees and twists add.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "forms over H^{} and H^{}",
                self.n, other.n
            )));
        }
        let degree = self.degree + other.degree;
        if degree > 2 * self.n {
            return Err(Error::DegreeOverflow(degree, 2 * self.n));
        }
        let mut out = Self::zero(self.n, degree, self.twist + other.twist);
        let (_, out_rank) = rank_table(2 * self.n, degree);
        for (ma, ca) in self.iter() {
            if ca.is_zero() {
                continue;
            }
            for (mb, cb) in other.iter() {
                if mb & ma != 0 || cb.is_zero() {
                    continue;
                }
                let sign = merge_sign(ma, mb);
                let r = out_rank[(ma | mb) as usize] as usize;
                let term = ca.mul(cb);
                let term = if sign < 0 { term.neg() } else { term };
                out.coeffs[r] = out.coeffs[r].add(&term);
            }
        }
        Ok(out)
    }

    /// The real structure rho: coefficient conjugation composed with the
    /// covector relabeling `e^{2a} -> e^{2a+1}, e^{2a+1} -> -e^{2a}`.
    pub fn apply_real_structure(&self) -> Self {
        let mut out = Self::zero(self.n, self.degree, self.twist);
        let (_, rank) = rank_table(2 * self.n, self.degree);
        let mut mapped = Vec::with_capacity(self.degree);
        for (mask, c) in self.iter() {
            if c.is_zero() {
                continue;
            }
            mapped.clear();
            let mut sign: i64 = 1;
            let mut bits = mask;
            while bits != 0 {
                let m = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if m % 2 == 0 {
                    mapped.push(m + 1);
                } else {
                    mapped.push(m - 1);
                    sign = -sign;
                }
            }
            // Sort the relabeled indices, tracking the permutation sign.
            for i in 1..mapped.len() {
                let mut j = i;
                while j > 0 && mapped[j - 1] > mapped[j] {
                    mapped.swap(j - 1, j);
                    sign = -sign;
                    j -= 1;
                }
            }
            let tmask: u32 = mapped.iter().fold(0, |acc, &m| acc | (1 << m));
            let r = rank[tmask as usize] as usize;
            let term = c.conj();
            let term = if sign < 0 { term.neg() } else { term };
            out.coeffs[r] = out.coeffs[r].add(&term);
        }
        out
    }

    /// Exact fixed-point test for the real structure.
    pub fn is_real_exact(&self) -> bool {
        self.eq_exact(&self.apply_real_structure())
    }

    pub fn eq_exact(&self, other: &Self) -> bool {
        self.n == other.n
            && self.degree == other.degree
            && self.twist == other.twist
            && self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .all(|(a, b)| a.eq_exact(b))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Form<D> {
        Form {
            n: self.n,
            degree: self.degree,
            twist: self.twist,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Wedge power `self^(^k)`.
    pub fn wedge_pow(&self, k: usize) -> Result<Self> {
        let mut acc = Form::scalar(self.n, C::one(), 0);
        for _ in 0..k {
            acc = acc.wedge(self)?;
        }
        Ok(acc)
    }
}

/// `Omega_0 = sum_a e^{2a} ^ e^{2a+1}` with coefficients in any ring.
pub fn omega0_generic<C: Coeff>(n: usize) -> Form<C> {
    let mut f = Form::zero(n, 2, -2);
    let (_, rank) = rank_table(2 * n, 2);
    for a in 0..n {
        let mask = (1u32 << (2 * a)) | (1 << (2 * a + 1));
        f.coeffs[rank[mask as usize] as usize] = C::one();
    }
    f
}

/// The standard real (1,1)-type form, image of the identity matrix.
pub fn omega0(n: usize) -> TwistedForm {
    omega0_generic(n)
}

/// The positive volume element `e^0 ^ e^1 ^ ... ^ e^{2n-1}`, twist -2n.
pub fn vol(n: usize) -> TwistedForm {
    Form::basis(n, (1u32 << (2 * n)) - 1, -(2 * n as i32))
}

impl Form<Complex64> {
    /// Largest coefficient magnitude (the scale used by tolerances).
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Distance from the fixed locus of the real structure.
    pub fn real_deviation(&self) -> f64 {
        let r = self.apply_real_structure();
        self.coeffs
            .iter()
            .zip(&r.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.real_deviation() <= tol * self.max_coeff_norm().max(1.0)
    }

    /// Pullback along the linear map `v -> M v` on C^{2n}:
    /// `(M^* w)_K = sum_L w_L det(M[L, K])`.
    pub fn pullback(&self, m: &DMatrix<Complex64>) -> Result<Self> {
        let n2 = 2 * self.n;
        if m.nrows() != n2 || m.ncols() != n2 {
            return Err(Error::DimensionMismatch(format!(
                "pullback matrix {}x{} on C^{n2}",
                m.nrows(),
                m.ncols()
            )));
        }
        let masks = subsets(n2, self.degree);
        let p = self.degree;
        let mut out = Self::zero(self.n, p, self.twist);
        for (out_r, &kmask) in masks.iter().enumerate() {
            let kcols: Vec<usize> = (0..n2).filter(|i| kmask & (1 << i) != 0).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for (lmask, c) in self.iter() {
                if c.is_zero() {
                    continue;
                }
                let lrows: Vec<usize> = (0..n2).filter(|i| lmask & (1 << i) != 0).collect();
                let mut sub = DMatrix::zeros(p, p);
                for (i, &r) in lrows.iter().enumerate() {
                    for (j, &cc) in kcols.iter().enumerate() {
                        sub[(i, j)] = m[(r, cc)];
                    }
                }
                acc += c * sub.determinant();
            }
            out.coeffs[out_r] = acc;
        }
        Ok(out)
    }

    /// The unique real `c` with `w = c . vol`, for real top-degree forms of
    /// twist `-2n`.
    pub fn top_coefficient(&self) -> Result<f64> {
        let n2 = 2 * self.n;
        if self.degree != n2 {
            return Err(Error::DegreeMismatch {
                expected: n2,
                got: self.degree,
            });
        }
        if self.twist != -(n2 as i32) {
            return Err(Error::TwistMismatch {
                expected: -(n2 as i32),
                got: self.twist,
            });
        }
        let c = self.coeffs[0];
        let scale = c.norm().max(1.0);
        if c.im.abs() > 1e-10 * scale {
            return Err(Error::NotReal {
                max_deviation: c.im.abs(),
                tol: 1e-10 * scale,
            });
        }
        Ok(c.re)
    }
}

/// Hermitian matrices as real twisted 2-forms.
///
/// Real-linear bijection normalized by `I_n -> Omega_0`; the a-th diagonal
/// unit maps to `e^{2a} ^ e^{2a+1}`. For an off-diagonal entry
/// `a_{ab} = z1 + z2 j` (a < b) the block is
///
/// ```text
/// {2a,2b}   -> conj(z2)      {2a,2b+1}   -> conj(z1)
/// {2a+1,2b} -> -z1           {2a+1,2b+1} -> z2
/// ```
///
/// which is the unique real, J-equivariant extension of the normalization:
/// rank-one matrices `beta^dagger beta` land exactly on the generator
/// `alpha ^ (j* alpha)` of the positivity cone.
pub fn herm_to_form(a: &HermitianQMatrix) -> TwistedForm {
    let n = a.n();
    let mut f = Form::zero(n, 2, -2);
    let (_, rank) = rank_table(2 * n, 2);
    let mut put = |i: usize, j: usize, v: Complex64| {
        let mask = (1u32 << i) | (1 << j);
        let r = rank[mask as usize] as usize;
        f.coeffs[r] += v;
    };
    for p in 0..n {
        put(2 * p, 2 * p + 1, Complex64::new(a.entry(p, p).t, 0.0));
        for q in (p + 1)..n {
            let s = complex_split(&a.entry(p, q));
            put(2 * p, 2 * q, s.z2.conj());
            put(2 * p, 2 * q + 1, s.z1.conj());
            put(2 * p + 1, 2 * q, -s.z1);
            put(2 * p + 1, 2 * q + 1, s.z2);
        }
    }
    f
}

/// Inverse of [`herm_to_form`] on real 2-forms of twist -2.
pub fn form_to_herm(w: &TwistedForm, tol: f64) -> Result<HermitianQMatrix> {
    if w.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            got: w.degree(),
        });
    }
    if w.twist() != -2 {
        return Err(Error::TwistMismatch {
            expected: -2,
            got: w.twist(),
        });
    }
    let n = w.n();
    let mut entries = vec![Quat::zero(); n * n];
    for p in 0..n {
        let d = w.coeff((1 << (2 * p)) | (1 << (2 * p + 1)));
        entries[p * n + p] = Quaternion::from_real(d.re);
        for q in (p + 1)..n {
            let z1 = -w.coeff((1 << (2 * p + 1)) | (1 << (2 * q)));
            let z2 = w.coeff((1 << (2 * p + 1)) | (1 << (2 * q + 1)));
            let v = Quaternion::new(z1.re, z1.im, z2.re, z2.im);
            entries[p * n + q] = v;
            entries[q * n + p] = v.conj();
        }
    }
    let h = HermitianQMatrix::from_entries(n, entries)?;
    // Realness of the input is exactly "reconstruction matches".
    let back = herm_to_form(&h);
    let dev = back
        .sub(w)
        .expect("shapes match by construction")
        .max_coeff_norm();
    let scale = w.max_coeff_norm().max(1.0);
    if dev > tol * scale {
        return Err(Error::NotReal {
            max_deviation: dev,
            tol: tol * scale,
        });
    }
    Ok(h)
}

/// Real dimension of the space of quaternionic Hermitian n x n matrices:
/// n real diagonal entries plus n(n-1)/2 quaternionic off-diagonal entries.
/// Equals dim_C Λ²(C^{2n})* = C(2n, 2), the dimension count behind the
/// bijectivity of [`herm_to_form`].
pub fn hermitian_real_dimension(n: usize) -> usize {
    n + 2 * n * (n - 1)
}
