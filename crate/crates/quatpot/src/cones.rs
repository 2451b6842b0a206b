//! Positivity cones of real twisted forms and sampled membership tests.
//!
//! The strong cone in degree `2k` is generated by wedges
//! `(alpha_1 ^ j*alpha_1) ^ ... ^ (alpha_k ^ j*alpha_k)` where each
//! `alpha_i` is the covector attached to a quaternionic row `beta_i`; the
//! weak (dual) cone consists of forms pairing nonnegatively against every
//! strong generator of complementary degree. Membership in either cone is
//! semidecidable by sampling: weak positivity can be *refuted* by a witness
//! generator, strong positivity can be *certified* by an explicit nonnegative
//! combination. Neither test can prove the opposite, so the inconclusive
//! outcomes are named `Consistent` and `Undecided`.
//!
//! All sampling is driven by a caller-supplied seed through a counter-based
//! stream, so results are reproducible and independent of thread count.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exterior::{form_to_herm, Form, TwistedForm};
use crate::qlinalg::QMatrix;
use crate::quat::{complex_split, Complex64, Quat};

/// Wedge of `k` covector pairs, the data of a strong-cone generator.
///
/// `betas[i]` is a quaternionic row of length `n`; `k = betas.len()` may be
/// `0` (the empty wedge, i.e. the constant function `1`) through `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeGenerator {
    n: usize,
    betas: Vec<Vec<Quat>>,
}

impl ConeGenerator {
    pub fn new(n: usize, betas: Vec<Vec<Quat>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("generator needs n >= 1".into()));
        }
        if betas.len() > n {
            return Err(Error::InvalidConfig(format!(
                "generator degree {} exceeds n = {n}",
                betas.len()
            )));
        }
        for beta in &betas {
            if beta.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "covector row has length {}, expected {n}",
                    beta.len()
                )));
            }
        }
        Ok(ConeGenerator { n, betas })
    }

    /// The empty wedge: its form is the constant `1` in degree zero.
    pub fn trivial(n: usize) -> Self {
        ConeGenerator { n, betas: vec![] }
    }

    /// Standard-basis rows; for `k = n` the form is exactly the volume form.
    pub fn standard(n: usize, k: usize) -> Result<Self> {
        let mut betas = Vec::with_capacity(k);
        for i in 0..k {
            let mut row = vec![Quat::zero(); n];
            row[i] = Quat::one();
            betas.push(row);
        }
        ConeGenerator::new(n, betas)
    }

    /// Draws `k` rows of independent standard Gaussian quaternions.
    pub fn random(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Self {
        let betas = (0..k)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        Quat::new(
                            standard_normal(rng),
                            standard_normal(rng),
                            standard_normal(rng),
                            standard_normal(rng),
                        )
                    })
                    .collect()
            })
            .collect();
        ConeGenerator { n, betas }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[Vec<Quat>] {
        &self.betas
    }

    /// The generator as a real form of degree `2k` and twist `-2k`.
    pub fn form(&self) -> TwistedForm {
        let mut acc = Form::scalar(self.n, Complex64::new(1.0, 0.0), 0);
        for beta in &self.betas {
            let (alpha, jalpha) = covector_pair(self.n, beta);
            // Degrees stay <= 2n because k <= n, so the wedges cannot fail.
            acc = acc.wedge(&alpha).unwrap().wedge(&jalpha).unwrap();
        }
        acc
    }

    /// Right-multiplies every row by `t`, matching the pullback of the form
    /// along the complex embedding of `t`.
    pub fn transformed(&self, t: &QMatrix<f64>) -> Result<Self> {
        if t.rows() != self.n || t.cols() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "transform is {}x{}, generator lives on H^{}",
                t.rows(),
                t.cols(),
                self.n
            )));
        }
        let betas = self
            .betas
            .iter()
            .map(|beta| {
                let row = QMatrix::new(1, self.n, beta.clone())?;
                let out = row.matmul(t)?;
                Ok((0..self.n).map(|a| out[(0, a)]).collect())
            })
            .collect::<Result<Vec<Vec<Quat>>>>()?;
        Ok(ConeGenerator { n: self.n, betas })
    }
}

/// Covector of a quaternionic row and its image under the j relabeling.
///
/// With `beta_a = z1 + z2 j`: `alpha[2a] = z1`, `alpha[2a+1] = -z2`, and
/// `j*alpha[2a] = conj(z2)`, `j*alpha[2a+1] = conj(z1)`. These are rows
/// `2i, 2i+1` of the complex embedding of the matrix with row `beta`.
fn covector_pair(n: usize, beta: &[Quat]) -> (TwistedForm, TwistedForm) {
    let mut alpha = Form::zero(n, 1, -1);
    let mut jalpha = Form::zero(n, 1, -1);
    for (a, q) in beta.iter().enumerate() {
        let s = complex_split(q);
        alpha.coeffs[2 * a] = s.z1;
        alpha.coeffs[2 * a + 1] = -s.z2;
        jalpha.coeffs[2 * a] = s.z2.conj();
        jalpha.coeffs[2 * a + 1] = s.z1.conj();
    }
    (alpha, jalpha)
}

/// One standard normal via Box-Muller. The sine branch is discarded to keep
/// the stream position a deterministic function of the draw count.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Default pairing tolerance: relative to the largest coefficient.
pub fn default_tol(omega: &TwistedForm) -> f64 {
    1e-9 * omega.max_coeff_norm()
}

/// Outcome of the sampled weak-positivity test.
#[derive(Clone, Debug)]
pub enum WeakPositivity {
    /// No sampled generator paired negatively. Not a proof of membership.
    Consistent,
    /// A strong generator of complementary degree pairs strictly below
    /// `-tol`; `value` is the offending top coefficient.
    Refuted { witness: ConeGenerator, value: f64 },
}

impl WeakPositivity {
    pub fn is_consistent(&self) -> bool {
        matches!(self, WeakPositivity::Consistent)
    }
}

/// Validates that `omega` is a candidate for positivity testing: real, of
/// even degree `2k`, with the matching twist `-2k`. Returns `k`.
fn positivity_degree(omega: &TwistedForm) -> Result<usize> {
    if omega.degree() % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "positivity applies to even-degree forms, got degree {}",
            omega.degree()
        )));
    }
    if omega.twist() != -(omega.degree() as i32) {
        return Err(Error::TwistMismatch {
            expected: -(omega.degree() as i32),
            got: omega.twist(),
        });
    }
    if !omega.is_real(1e-9) {
        return Err(Error::NotReal {
            max_deviation: omega.real_deviation(),
            tol: 1e-9 * omega.max_coeff_norm().max(1.0),
        });
    }
    Ok(omega.degree() / 2)
}

/// Tests `omega` against `samples` random strong generators of the
/// complementary degree. `tol` defaults to [`default_tol`].
///
/// Generators are normalized to unit coefficient scale before pairing, so
/// `tol` is calibrated purely by `omega`.
pub fn is_weakly_positive_sampled(
    omega: &TwistedForm,
    samples: u64,
    seed: u64,
    tol: Option<f64>,
) -> Result<WeakPositivity> {
    let k = positivity_degree(omega)?;
    let n = omega.n();
    let kc = n - k;
    let tol = tol.unwrap_or_else(|| default_tol(omega));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // The complement in top degree is the constant 1: a single exact check.
    let mut remaining = if kc == 0 { 1 } else { samples };
    // Degree-2 forms admit directed complements: pairing against the frame
    // spanned by all eigenvectors but one isolates the remaining eigenvalue,
    // so a small negative eigenvalue hiding among large positive ones is
    // caught without a lucky random draw. Directed candidates run first and
    // count against the sample budget.
    if k == 1 && kc > 0 {
        if let Ok(a) = form_to_herm(omega, 1e-9) {
            let pairs = a.eigenpairs();
            for e in 0..pairs.len() {
                if remaining == 0 {
                    break;
                }
                remaining -= 1;
                let betas: Vec<Vec<Quat>> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != e)
                    .map(|(_, (_, v))| v.iter().map(|w| w.conj()).collect())
                    .collect();
                let gen = ConeGenerator::new(n, betas)?;
                if let Some(refuted) = pairing_refutes(omega, gen, tol)? {
                    return Ok(refuted);
                }
            }
        }
    }
    for _ in 0..remaining {
        let gen = ConeGenerator::random(n, kc, &mut rng);
        if let Some(refuted) = pairing_refutes(omega, gen, tol)? {
            return Ok(refuted);
        }
    }
    Ok(WeakPositivity::Consistent)
}

/// One pairing sample: wedge with the normalized generator and compare the
/// top coefficient against `-tol`.
fn pairing_refutes(
    omega: &TwistedForm,
    gen: ConeGenerator,
    tol: f64,
) -> Result<Option<WeakPositivity>> {
    let xi = gen.form();
    let scale = xi.max_coeff_norm();
    if scale == 0.0 {
        return Ok(None);
    }
    let xi = xi.scale(&Complex64::new(1.0 / scale, 0.0));
    let value = omega.wedge(&xi)?.top_coefficient()?;
    if value < -tol {
        return Ok(Some(WeakPositivity::Refuted {
            witness: gen,
            value,
        }));
    }
    Ok(None)
}

/// Explicit nonnegative combination of strong generators.
#[derive(Clone, Debug)]
pub struct Certificate {
    generators: Vec<ConeGenerator>,
    weights: Vec<f64>,
}

impl Certificate {
    pub fn new(generators: Vec<ConeGenerator>, weights: Vec<f64>) -> Result<Self> {
        if generators.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} generators with {} weights",
                generators.len(),
                weights.len()
            )));
        }
        if generators.is_empty() {
            return Err(Error::InvalidConfig(
                "certificate needs at least one generator".into(),
            ));
        }
        let (n, k) = (generators[0].n(), generators[0].k());
        if !generators.iter().all(|g| g.n() == n && g.k() == k) {
            return Err(Error::InvalidConfig(
                "certificate generators must share n and degree".into(),
            ));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidConfig(
                "certificate weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Certificate {
            generators,
            weights,
        })
    }

    pub fn generators(&self) -> &[ConeGenerator] {
        &self.generators
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sums the weighted generator forms back into a single form.
    pub fn reconstruct(&self) -> TwistedForm {
        let n = self.generators[0].n();
        let k = self.generators[0].k();
        let mut acc = Form::zero(n, 2 * k, -(2 * k as i32));
        for (gen, &w) in self.generators.iter().zip(&self.weights) {
            acc = acc
                .add(&gen.form().scale(&Complex64::new(w, 0.0)))
                .expect("certificate generators share shape");
        }
        acc
    }

    /// Largest coefficient deviation between the reconstruction and `omega`.
    pub fn residual_against(&self, omega: &TwistedForm) -> Result<f64> {
        Ok(self.reconstruct().sub(omega)?.max_coeff_norm())
    }

    /// Merges two certificates; certifies the sum of the certified forms.
    /// The cone is convex, so this needs no renormalization.
    pub fn concat(mut self, other: Certificate) -> Result<Certificate> {
        let (n, k) = (self.generators[0].n(), self.generators[0].k());
        if other.generators[0].n() != n || other.generators[0].k() != k {
            return Err(Error::InvalidConfig(
                "certificates live in different cones".into(),
            ));
        }
        self.generators.extend(other.generators);
        self.weights.extend(other.weights);
        Ok(self)
    }
}

/// Outcome of the sampled strong-positivity test.
#[derive(Clone, Debug)]
pub enum StrongPositivity {
    /// `omega` was written as a nonnegative combination of the sampled
    /// generators, up to a residual below tolerance.
    Certified(Certificate),
    /// Best nonnegative fit still misses by `residual`. Not a disproof:
    /// the sampled generators may simply not span the right face.
    Undecided { residual: f64 },
}

impl StrongPositivity {
    pub fn is_certified(&self) -> bool {
        matches!(self, StrongPositivity::Certified(_))
    }
}

/// Attempts to certify `omega` as a nonnegative combination of
/// `basis_samples` random generators of the same degree, via nonnegative
/// least squares over the real and imaginary parts of all coefficients.
///
/// `tol` bounds the admissible reconstruction residual in the largest
/// coefficient; defaults to [`default_tol`].
pub fn is_strongly_positive_sampled(
    omega: &TwistedForm,
    basis_samples: usize,
    seed: u64,
    tol: Option<f64>,
) -> Result<StrongPositivity> {
    let k = positivity_degree(omega)?;
    let n = omega.n();
    let tol = tol.unwrap_or_else(|| default_tol(omega));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let dim = omega.iter().count();
    let mut gens = Vec::with_capacity(basis_samples);
    let mut scales = Vec::with_capacity(basis_samples);
    let mut a = DMatrix::zeros(2 * dim, basis_samples);
    for col in 0..basis_samples {
        let gen = ConeGenerator::random(n, k, &mut rng);
        let xi = gen.form();
        let scale = xi.max_coeff_norm().max(1e-300);
        for (row, (_, c)) in xi.iter().enumerate() {
            a[(row, col)] = c.re / scale;
            a[(dim + row, col)] = c.im / scale;
        }
        gens.push(gen);
        scales.push(scale);
    }
    let mut b = DVector::zeros(2 * dim);
    for (row, (_, c)) in omega.iter().enumerate() {
        b[row] = c.re;
        b[dim + row] = c.im;
    }

    let x = nnls(&a, &b, 10 * basis_samples.max(8));

    let mut generators = Vec::new();
    let mut weights = Vec::new();
    for j in 0..basis_samples {
        if x[j] > 0.0 {
            generators.push(gens[j].clone());
            weights.push(x[j] / scales[j]);
        }
    }
    if generators.is_empty() {
        // x = 0: only the zero form can be certified without generators.
        let residual = omega.max_coeff_norm();
        return if residual <= tol {
            let cert = Certificate::new(vec![ConeGenerator::random(n, k, &mut rng)], vec![0.0])?;
            Ok(StrongPositivity::Certified(cert))
        } else {
            Ok(StrongPositivity::Undecided { residual })
        };
    }
    let cert = Certificate::new(generators, weights)?;
    let residual = cert.residual_against(omega)?;
    if residual <= tol {
        Ok(StrongPositivity::Certified(cert))
    } else {
        Ok(StrongPositivity::Undecided { residual })
    }
}

/// Lawson-Hanson nonnegative least squares: minimizes `|a x - b|` over
/// `x >= 0`. Deterministic; `max_iter` caps the active-set loop and on
/// hitting the cap the current (feasible) iterate is returned.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> DVector<f64> {
    let ncols = a.ncols();
    let mut x = DVector::zeros(ncols);
    let mut passive = vec![false; ncols];
    let atb = a.transpose() * b;
    let w_tol = 1e-12 * atb.amax().max(1e-300);
    let mut iter = 0usize;
    loop {
        let residual = b - a * &x;
        let w = a.transpose() * &residual;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..ncols {
            if !passive[j] && w[j] > w_tol && best.is_none_or(|(_, bw)| w[j] > bw) {
                best = Some((j, w[j]));
            }
        }
        let Some((enter, _)) = best else {
            return x;
        };
        passive[enter] = true;
        loop {
            iter += 1;
            if iter > max_iter {
                return x;
            }
            let idx: Vec<usize> = (0..ncols).filter(|&j| passive[j]).collect();
            let ap = a.select_columns(&idx);
            let z = least_squares(&ap, b);
            if z.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (t, &j) in idx.iter().enumerate() {
                    x[j] = z[t];
                }
                break;
            }
            // Step from x toward z, stopping where the first passive
            // variable reaches zero; release exactly those variables.
            let mut alpha = f64::INFINITY;
            for (t, &j) in idx.iter().enumerate() {
                if z[t] <= 0.0 {
                    let d = x[j] / (x[j] - z[t]);
                    if d < alpha {
                        alpha = d;
                    }
                }
            }
            if !alpha.is_finite() {
                return x;
            }
            for (t, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[t] - x[j]);
                if z[t] <= 0.0 && x[j] <= 1e-14 * atb.amax().max(1.0) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
}

/// Minimum-norm least squares via SVD with a relative rank cutoff.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.amax();
    svd.solve(b, 1e-13 * smax.max(1e-300))
        .expect("SVD factors were requested")
}
