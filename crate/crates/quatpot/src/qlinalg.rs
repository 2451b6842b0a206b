//! Quaternionic matrices, the complex embedding, and determinants.
//!
//! A quaternionic matrix acts on H^n (a right H-module) by left
//! multiplication, which is C-linear in the coordinates fixed in
//! [`crate::quat`]; `embed_complex` realizes that action as a complex
//! 2n x 2m matrix, one 2x2 block per quaternion entry. The embedding is a
//! ring homomorphism and intertwines conjugate transposes, so Hermitian
//! quaternionic matrices embed as complex Hermitian matrices whose spectrum
//! carries a quaternionic symmetry: every eigenvalue appears an even number
//! of times. The Moore determinant is the product of the paired eigenvalues,
//! each pair counted once; the Dieudonné determinant is the square root of
//! the absolute value of the embedded determinant.

use crate::error::{Error, Result};
use crate::quat::{complex_split, Complex64, Quat, Quaternion};
use crate::scalar::Scalar;
use nalgebra::{DMatrix, DVector};

/// Tolerance for validating Hermitian symmetry of input matrices.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;

/// Relative tolerance for the eigenvalue pairing check inside the Moore
/// determinant. Exactly quaternionic input pairs to machine precision; a
/// mismatch beyond this threshold means the input lost its quaternionic
/// structure and the result would be meaningless.
pub const EIGEN_PAIRING_REL_TOL: f64 = 1e-8;

/// Dense quaternionic matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion<T>>,
}

impl<T: Scalar> QMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<Quaternion<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(QMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Quaternion::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Quaternion<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = Quaternion::zero();
                for m in 0..self.cols {
                    acc = acc + self[(r, m)].clone() * other[(m, c)].clone();
                }
                out[(r, c)] = acc;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrix sum shape".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(QMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn to_f64(&self) -> QMatrix<f64> {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|q| q.to_f64()).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for QMatrix<T> {
    type Output = Quaternion<T>;
    fn index(&self, (r, c): (usize, usize)) -> &Self::Output {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for QMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Self::Output {
        &mut self.data[r * self.cols + c]
    }
}

/// Complex realization of a quaternionic matrix as a 2r x 2c complex matrix.
///
/// Entry `q = z1 + z2·j` becomes the 2x2 block
/// `[[z1, -z2], [conj(z2), conj(z1)]]` in the interleaved coordinates of
/// [`crate::quat::coords_vec`]. Ring homomorphism:
/// `embed(A·B) = embed(A)·embed(B)`, `embed(A†) = embed(A)†`.
pub fn embed_complex(a: &QMatrix<f64>) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(2 * a.rows, 2 * a.cols);
    for r in 0..a.rows {
        for c in 0..a.cols {
            let s = complex_split(&a[(r, c)]);
            m[(2 * r, 2 * c)] = s.z1;
            m[(2 * r, 2 * c + 1)] = -s.z2;
            m[(2 * r + 1, 2 * c)] = s.z2.conj();
            m[(2 * r + 1, 2 * c + 1)] = s.z1.conj();
        }
    }
    m
}

/// Hermitian quaternionic matrix: `a_ji = conj(a_ij)`, real diagonal.
///
/// The constructor validates Hermitian symmetry to [`HERMITIAN_INPUT_TOL`]
/// (relative to the largest entry) and then projects exactly, so stored
/// matrices are Hermitian to the last bit.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianQMatrix {
    n: usize,
    data: Vec<Quat>,
}

impl HermitianQMatrix {
    pub fn from_entries(n: usize, data: Vec<Quat>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{0}x{0} matrix needs {1} entries, got {2}",
                n,
                n * n,
                data.len()
            )));
        }
        let scale = data
            .iter()
            .map(|q| q.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = data[i * n + j] - data[j * n + i].conj();
                max_asym = max_asym.max(d.norm());
            }
        }
        if max_asym > HERMITIAN_INPUT_TOL * scale {
            return Err(Error::NotHermitian {
                max_asymmetry: max_asym,
                tol: HERMITIAN_INPUT_TOL * scale,
            });
        }
        // Exact Hermitian projection: average the two triangles.
        let mut sym = data;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = (sym[i * n + j] + sym[j * n + i].conj()).scale(&0.5);
                sym[i * n + j] = avg;
                sym[j * n + i] = avg.conj();
            }
            sym[i * n + i] = Quaternion::from_real(sym[i * n + i].t);
        }
        Ok(HermitianQMatrix { n, data: sym })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![Quat::zero(); n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = Quaternion::from_real(v);
        }
        HermitianQMatrix { n, data }
    }

    /// Rank-one PSD matrix `beta† beta` from a quaternionic covector.
    pub fn rank_one(beta: &[Quat]) -> Self {
        let n = beta.len();
        let mut data = vec![Quat::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = beta[i].conj() * beta[j];
            }
        }
        HermitianQMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> Quat {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Quat] {
        &self.data
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch("Hermitian sum shape".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a + *b)
            .collect();
        Ok(HermitianQMatrix { n: self.n, data })
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianQMatrix {
            n: self.n,
            data: self.data.iter().map(|q| q.scale(&s)).collect(),
        }
    }

    pub fn as_qmatrix(&self) -> QMatrix<f64> {
        QMatrix {
            rows: self.n,
            cols: self.n,
            data: self.data.clone(),
        }
    }

    pub fn embed(&self) -> DMatrix<Complex64> {
        embed_complex(&self.as_qmatrix())
    }

    /// Eigenvalues of the complex embedding, ascending. Real by symmetry;
    /// each value appears with even multiplicity.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.embed())
    }

    /// Moore determinant via eigenvalue pairing: the 2n eigenvalues of the
    /// embedding come in equal pairs; the determinant is the product over
    /// pairs, each counted once. Errors with a numerical-degeneracy report
    /// if sorted eigenvalues fail to pair within [`EIGEN_PAIRING_REL_TOL`].
    pub fn moore_det(&self) -> Result<f64> {
        let eig = self.eigenvalues();
        let scale = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = EIGEN_PAIRING_REL_TOL * scale.max(f64::MIN_POSITIVE);
        let mut det = 1.0;
        for pair in eig.chunks(2) {
            let gap = (pair[0] - pair[1]).abs();
            if gap > tol {
                return Err(Error::NumericalDegeneracy(format!(
                    "eigenvalue pairing failed: gap {gap:.3e} exceeds {tol:.3e}"
                )));
            }
            det *= 0.5 * (pair[0] + pair[1]);
        }
        Ok(det)
    }

    /// PSD test: all eigenvalues of the embedding at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.eigenvalues().iter().all(|&l| l >= -tol)
    }

    /// Smallest eigenvalue of the embedding.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Right eigenpairs, ascending: one unit quaternionic eigenvector per
    /// doubled eigenvalue of the embedding.
    ///
    /// An embedded eigenvector `w` recovers the quaternionic one slotwise
    /// as `q_a = w[2a] + conj(w[2a+1]) j`. Right multiplication by j swaps
    /// the two embedded vectors over each quaternionic eigenvalue, so
    /// keeping one representative per pair loses nothing.
    pub fn eigenpairs(&self) -> Vec<(f64, Vec<Quat>)> {
        let eig = self.embed().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .expect("eigenvalues are finite")
        });
        order
            .chunks(2)
            .map(|pair| {
                let col = eig.eigenvectors.column(pair[0]);
                let v: Vec<Quat> = (0..self.n)
                    .map(|a| {
                        let z1 = col[2 * a];
                        let z2 = col[2 * a + 1].conj();
                        Quaternion::new(z1.re, z1.im, z2.re, z2.im)
                    })
                    .collect();
                (eig.eigenvalues[pair[0]], v)
            })
            .collect()
    }
}

/// Eigenvalues of a complex Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    vals
}

/// Mixed Moore determinant by polarization:
/// `(1/n!) Σ_{∅≠S⊆[n]} (-1)^{n-|S|} moore_det(Σ_{i∈S} A_i)`.
///
/// Fully symmetric and multilinear over nonnegative combinations;
/// `mixed_moore_det(A, ..., A) = moore_det(A)`. Takes exactly n matrices of
/// size n x n. Cost grows as `2^n` Moore determinants; intended for the
/// small n this library targets.
pub fn mixed_moore_det(mats: &[HermitianQMatrix]) -> Result<f64> {
    let n = match mats.first() {
        Some(m) => m.n(),
        None => {
            return Err(Error::DimensionMismatch(
                "mixed determinant of an empty family".into(),
            ))
        }
    };
    if mats.len() != n || mats.iter().any(|m| m.n() != n) {
        return Err(Error::DimensionMismatch(format!(
            "mixed Moore determinant needs exactly n matrices of size n x n, n = {n}"
        )));
    }
    let mut acc = 0.0f64;
    for mask in 1u32..(1 << n) {
        let mut sum = HermitianQMatrix::from_diagonal(&vec![0.0; n]);
        for i in 0..n {
            if mask & (1 << i) != 0 {
                sum = sum.add(&mats[i])?;
            }
        }
        let sign = if (n - (mask.count_ones() as usize)) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        acc += sign * sum.moore_det()?;
    }
    let mut fact = 1.0f64;
    for i in 2..=n {
        fact *= i as f64;
    }
    Ok(acc / fact)
}

/// Dieudonné determinant: `|det(embed(A))|^(1/2)`.
///
/// Multiplicative, zero exactly on singular matrices, and restricts to
/// `|det|` on complex matrices.
pub fn dieudonne_det(a: &QMatrix<f64>) -> Result<f64> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch(format!(
            "Dieudonné determinant needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let det = embed_complex(a).determinant();
    Ok(det.norm().sqrt())
}

/// Solve `A·x = b` over H by Gaussian elimination with partial pivoting
/// (pivot by quaternion norm). Used for small well-conditioned systems.
pub fn solve(a: &QMatrix<f64>, b: &[Quat]) -> Result<Vec<Quat>> {
    if a.rows != a.cols || a.rows != b.len() {
        return Err(Error::DimensionMismatch("quaternionic solve shape".into()));
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let (pivot_row, pivot_norm) = (col..n)
            .map(|r| (r, m[(r, col)].norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if pivot_norm < 1e-300 {
            return Err(Error::NumericalDegeneracy("singular system".into()));
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = m[(col, c)];
                m[(col, c)] = m[(pivot_row, c)];
                m[(pivot_row, c)] = tmp;
            }
            rhs.swap(col, pivot_row);
        }
        let inv = m[(col, col)].inverse()?;
        for r in (col + 1)..n {
            let factor = m[(r, col)] * inv;
            for c in col..n {
                m[(r, c)] = m[(r, c)] - factor * m[(col, c)];
            }
            rhs[r] = rhs[r] - factor * rhs[col];
        }
    }
    let mut x = vec![Quat::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for c in (row + 1)..n {
            acc = acc - m[(row, c)] * x[c];
        }
        x[row] = m[(row, row)].inverse()? * acc;
    }
    Ok(x)
}

/// Weighted trace `Re Σ a_ii` of a Hermitian matrix.
pub fn trace(a: &HermitianQMatrix) -> f64 {
    (0..a.n()).map(|i| a.entry(i, i).t).sum()
}

/// Frobenius-type norm of the embedding (used for scale-relative tolerances).
pub fn embed_norm(a: &HermitianQMatrix) -> f64 {
    a.entries().iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// Chi-squared style check used by callers validating solve results.
pub fn residual_norm(a: &QMatrix<f64>, x: &[Quat], b: &[Quat]) -> f64 {
    let mut acc = 0.0;
    for r in 0..a.rows {
        let mut s = Quat::zero();
        for c in 0..a.cols {
            s = s + a[(r, c)] * x[c];
        }
        acc += (s - b[r]).norm_sqr();
    }
    acc.sqrt()
}

#[allow(unused)]
fn dvector_from(v: &[Complex64]) -> DVector<Complex64> {
    DVector::from_column_slice(v)
}
