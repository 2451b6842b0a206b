//! Plurisubharmonicity checks, Monge-Ampere densities, mixed pairings,
//! mollified convergence experiments, and the empirical mass ratio.
//!
//! Everything here reduces to pointwise quaternionic Hessians: a field is
//! psh where its Hessian is positive semidefinite, its Monge-Ampere density
//! is the Moore determinant of that Hessian, and mixed pairings integrate a
//! test weight against the mixed determinant, padded with identity slots
//! below top degree (the matrix picture of wedging against the standard
//! Kaehler-type form of complementary degree).
//!
//! Non-smooth fields enter only through explicit smooth approximant
//! families; the convergence experiment tabulates pairings along such a
//! family so Cauchy behavior can be inspected directly.

use serde::Serialize;

use crate::calculus::ScalarField;
use crate::error::{Error, Result};
use crate::qlinalg::{mixed_moore_det, HermitianQMatrix};
use crate::quadrature::{first_violation, integrate_estimate, Domain, DomainKind, NodeSet};
use crate::scalar::expr::Expr;

/// Quadrature pairing outcome: the value, how many nodes produced it, and a
/// refinement-difference error estimate.
#[derive(Clone, Debug, Serialize)]
pub struct PairingResult {
    pub value: f64,
    pub nodes: u64,
    /// Absolute difference against one coarsening step; always >= 0.
    pub error_estimate: f64,
    /// Which rule produced the value, e.g. "gauss-legendre:6" or "qmc:100000".
    pub rule: String,
}

/// First quadrature node (in canonical index order) where the Hessian
/// fails to be positive semidefinite.
#[derive(Clone, Debug, Serialize)]
pub struct PshWitness {
    pub node_index: u64,
    pub point: Vec<f64>,
    pub min_eigenvalue: f64,
}

/// Outcome of the node-wise plurisubharmonicity check.
#[derive(Clone, Debug, Serialize)]
pub struct PshReport {
    pub psh: bool,
    pub witness: Option<PshWitness>,
    pub nodes: u64,
}

/// Smooth test weight for pairings.
///
/// On a box the weight must come from an explicit bump profile so that it is
/// compactly supported strictly inside the integration region; the profile
/// parameters are kept so the support can be checked against the box. On the
/// torus any smooth field is admissible.
#[derive(Clone, Debug)]
pub struct TestWeight {
    field: ScalarField,
    /// `(center, half_width)` per coordinate when built from a bump profile.
    support: Option<(Vec<f64>, Vec<f64>)>,
}

impl TestWeight {
    /// Product of per-axis bumps `exp(-1/(1 - u^2))` with `u = (x-c)/s`,
    /// supported on the product of intervals `[c_i - s_i, c_i + s_i]`.
    pub fn bump(n: usize, center: &[f64], half_width: &[f64]) -> Result<Self> {
        let d = 4 * n;
        if center.len() != d || half_width.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "bump profile needs {d} centers and widths, got {} and {}",
                center.len(),
                half_width.len()
            )));
        }
        if half_width.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig(
                "bump half-widths must be positive and finite".into(),
            ));
        }
        let mut e = Expr::Const(1.0);
        for i in 0..d {
            let u = (Expr::var(i) - Expr::Const(center[i])) / Expr::Const(half_width[i]);
            e = e * u.bump();
        }
        Ok(TestWeight {
            field: ScalarField::from_expr(n, &e)?,
            support: Some((center.to_vec(), half_width.to_vec())),
        })
    }

    /// Arbitrary smooth weight; admissible on the torus only.
    pub fn smooth(field: ScalarField) -> Self {
        TestWeight {
            field,
            support: None,
        }
    }

    /// The constant weight 1; admissible on the torus only.
    pub fn one(n: usize) -> Self {
        let field = ScalarField::from_expr(n, &Expr::Const(1.0)).expect("constant compiles");
        TestWeight {
            field,
            support: None,
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn is_bump(&self) -> bool {
        self.support.is_some()
    }

    /// Rejects weights that are not admissible on the domain: boxes demand a
    /// bump profile whose support stays inside the bounds.
    fn validate_for(&self, domain: &Domain) -> Result<()> {
        match domain.kind {
            DomainKind::Box { lo, hi } => {
                let Some((center, half_width)) = &self.support else {
                    return Err(Error::InvalidConfig(
                        "pairings on a box need a bump test weight supported inside it".into(),
                    ));
                };
                for (c, s) in center.iter().zip(half_width) {
                    if c - s < lo - 1e-12 || c + s > hi + 1e-12 {
                        return Err(Error::InvalidConfig(format!(
                            "bump support [{}, {}] leaves the box [{lo}, {hi}]",
                            c - s,
                            c + s
                        )));
                    }
                }
                Ok(())
            }
            DomainKind::Torus => Ok(()),
        }
    }
}

/// Checks positive semidefiniteness of the Hessian at every quadrature node.
///
/// The witness, when present, is the violating node with the smallest index
/// in canonical node order, independent of thread count. `tol` is the
/// absolute eigenvalue slack: a node fails when the smallest Hessian
/// eigenvalue drops below `-tol`. `seed` is only consulted for QMC domains.
pub fn is_psh(
    f: &ScalarField,
    domain: &Domain,
    seed: Option<u64>,
    tol: f64,
) -> Result<PshReport> {
    let d = 4 * f.n();
    let nodes = NodeSet::build(domain, d, seed)?;
    let hit = first_violation(&nodes, &|| {
        let mut ev = f.hessian_evaluator();
        move |x: &[f64]| {
            let h = ev.hessian(x).expect("real Hessian is exactly symmetric");
            let min = h.min_eigenvalue();
            (!(min >= -tol)).then_some(min)
        }
    });
    Ok(PshReport {
        psh: hit.is_none(),
        witness: hit.map(|(node_index, min_eigenvalue)| PshWitness {
            node_index,
            point: nodes.point(node_index),
            min_eigenvalue,
        }),
        nodes: nodes.len(),
    })
}

/// Monge-Ampere density at a point: the Moore determinant of the Hessian.
pub fn ma_density(f: &ScalarField, x: &[f64]) -> Result<f64> {
    let mut ev = f.hessian_evaluator();
    let h = ev.hessian(x)?;
    h.moore_det()
}

fn check_field_family(fields: &[ScalarField]) -> Result<(usize, usize)> {
    let Some(first) = fields.first() else {
        return Err(Error::InvalidConfig("at least one field is required".into()));
    };
    let n = first.n();
    if fields.iter().any(|f| f.n() != n) {
        return Err(Error::DimensionMismatch(
            "all fields must share the same n".into(),
        ));
    }
    let k = fields.len();
    if k > n {
        return Err(Error::InvalidConfig(format!(
            "mixed pairing takes at most n = {n} fields, got {k}"
        )));
    }
    Ok((n, k))
}

/// Mixed Monge-Ampere pairing of `k <= n` fields against a test weight.
///
/// The integrand at a node is `phi(x)` times the mixed Moore determinant of
/// the `k` Hessians padded with `n - k` identity slots; for `k = n` this is
/// exactly the mixed determinant of the Hessians. Symmetric in the fields,
/// bit-for-bit. Degenerate eigenvalue pairing at any node aborts the whole
/// pairing rather than silently contaminating the sum.
pub fn mixed_ma_pairing(
    fields: &[ScalarField],
    phi: &TestWeight,
    domain: &Domain,
    seed: Option<u64>,
) -> Result<PairingResult> {
    let (n, _) = check_field_family(fields)?;
    if phi.field().n() != n {
        return Err(Error::DimensionMismatch(
            "test weight lives on a different H^n".into(),
        ));
    }
    phi.validate_for(domain)?;
    let d = 4 * n;
    let est = integrate_estimate(domain, d, seed, &|| {
        let mut evs: Vec<_> = fields.iter().map(|f| f.hessian_evaluator()).collect();
        let mut phi_ev = phi.field().hessian_evaluator();
        let mut mats = vec![HermitianQMatrix::identity(n); n];
        move |x: &[f64]| {
            let w = phi_ev.value_at(x);
            if w == 0.0 {
                return 0.0; // outside the bump support
            }
            for (slot, ev) in mats.iter_mut().zip(evs.iter_mut()) {
                *slot = ev.hessian(x).expect("real Hessian is exactly symmetric");
            }
            match mixed_moore_det(&mats) {
                Ok(v) => w * v,
                // Poisoning the sum with NaN surfaces the degeneracy after
                // the deterministic reduction finishes.
                Err(_) => f64::NAN,
            }
        }
    })?;
    if est.value.is_nan() {
        return Err(Error::NumericalDegeneracy(
            "Moore determinant spectrum pairing failed at a quadrature node".into(),
        ));
    }
    Ok(PairingResult {
        value: est.value,
        nodes: est.nodes,
        error_estimate: est.error_estimate,
        rule: domain.rule_label(),
    })
}

/// One row of a convergence table: the mollification parameter, the pairing
/// it produced, and whether the member passed the psh check.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergeRow {
    pub eps: f64,
    pub psh: bool,
    pub pairing: PairingResult,
}

/// Pairings along a smoothing family, with successive gaps.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergeTable {
    pub rows: Vec<ConvergeRow>,
}

impl ConvergeTable {
    /// Successive absolute gaps `|P(eps_m) - P(eps_{m+1})|`.
    pub fn gaps(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (w[0].pairing.value - w[1].pairing.value).abs())
            .collect()
    }
}

/// Tabulates `mixed_ma_pairing` of `k` copies of the family member along
/// `eps_list`, recording the psh check per member.
///
/// A non-psh member is reported in its row, not treated as an error:
/// boundary-psh approximants may dip below zero by roundoff.
pub fn converge_experiment(
    family: &dyn Fn(f64) -> Result<ScalarField>,
    k: usize,
    phi: &TestWeight,
    domain: &Domain,
    eps_list: &[f64],
    seed: Option<u64>,
    psh_tol: f64,
) -> Result<ConvergeTable> {
    if eps_list.is_empty() {
        return Err(Error::InvalidConfig("eps list must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let field = family(eps)?;
        let fields = vec![field; k];
        let report = is_psh(&fields[0], domain, seed, psh_tol)?;
        let pairing = mixed_ma_pairing(&fields, phi, domain, seed)?;
        rows.push(ConvergeRow {
            eps,
            psh: report.psh,
            pairing,
        });
    }
    Ok(ConvergeTable { rows })
}

/// Mass-ratio report: integral of the mixed density over the inner region
/// divided by the product of sup norms on the outer region.
#[derive(Clone, Debug, Serialize)]
pub struct ClnReport {
    pub ratio: f64,
    /// L^1 mass of the mixed Monge-Ampere density over the inner region.
    pub numerator: f64,
    /// Sup of |f_i| over the outer region's nodes, one per field.
    pub sup_norms: Vec<f64>,
    pub nodes: u64,
    pub error_estimate: f64,
}

/// Ratio of the mixed Monge-Ampere mass on `inner` to the product of sup
/// norms on `outer`. Both regions must be boxes with `inner` strictly
/// inside `outer`; sups are taken over the outer region's quadrature nodes.
pub fn cln_ratio(
    fields: &[ScalarField],
    inner: &Domain,
    outer: &Domain,
    seed: Option<u64>,
) -> Result<ClnReport> {
    let (n, k) = check_field_family(fields)?;
    let d = 4 * n;
    let (DomainKind::Box { lo: ilo, hi: ihi }, DomainKind::Box { lo: olo, hi: ohi }) =
        (inner.kind, outer.kind)
    else {
        return Err(Error::InvalidConfig(
            "mass ratio needs box regions, inner strictly inside outer".into(),
        ));
    };
    if !(olo < ilo && ihi < ohi) {
        return Err(Error::InvalidConfig(format!(
            "inner box [{ilo}, {ihi}] must sit strictly inside outer box [{olo}, {ohi}]"
        )));
    }

    let est = integrate_estimate(inner, d, seed, &|| {
        let mut evs: Vec<_> = fields.iter().map(|f| f.hessian_evaluator()).collect();
        let mut mats = vec![HermitianQMatrix::identity(n); n];
        move |x: &[f64]| {
            for (slot, ev) in mats.iter_mut().zip(evs.iter_mut()) {
                *slot = ev.hessian(x).expect("real Hessian is exactly symmetric");
            }
            match mixed_moore_det(&mats) {
                Ok(v) => v.abs(),
                Err(_) => f64::NAN,
            }
        }
    })?;
    if est.value.is_nan() {
        return Err(Error::NumericalDegeneracy(
            "Moore determinant spectrum pairing failed at a quadrature node".into(),
        ));
    }

    let outer_nodes = NodeSet::build(outer, d, seed)?;
    let mut sup_norms = Vec::with_capacity(k);
    for f in fields {
        let mut ev = f.hessian_evaluator();
        let mut x = vec![0.0; d];
        let mut sup = 0.0f64;
        for idx in 0..outer_nodes.len() {
            outer_nodes.fill(idx, &mut x);
            sup = sup.max(ev.value_at(&x).abs());
        }
        if sup == 0.0 {
            return Err(Error::NumericalDegeneracy(
                "a field vanishes identically on the outer region's nodes".into(),
            ));
        }
        sup_norms.push(sup);
    }
    let denominator: f64 = sup_norms.iter().product();
    Ok(ClnReport {
        ratio: est.value / denominator,
        numerator: est.value,
        sup_norms,
        nodes: est.nodes,
        error_estimate: est.error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::weighted_sum;
    use crate::scalar::poly::Poly;
    use approx::assert_relative_eq;

    fn norm2(n: usize) -> ScalarField {
        let mut p = Poly::<f64>::constant(crate::quat::Complex64::new(0.0, 0.0));
        for i in 0..4 * n {
            p = p.add(&Poly::var(i).mul(&Poly::var(i)));
        }
        ScalarField::from_poly(n, p).unwrap()
    }

    fn sqrt_norm2_eps(n: usize, eps: f64) -> ScalarField {
        let e = (Expr::norm_sqr(0, 4 * n) + Expr::Const(eps * eps)).sqrt();
        ScalarField::from_expr(n, &e).unwrap()
    }

    fn unit_bump(n: usize, radius: f64) -> TestWeight {
        let d = 4 * n;
        TestWeight::bump(n, &vec![0.0; d], &vec![radius; d]).unwrap()
    }

    #[test]
    fn norm_squared_is_psh_and_its_negative_is_refuted_at_node_zero() {
        let domain = Domain::cube(-1.0, 1.0, 2).unwrap();
        let f = norm2(2);
        let report = is_psh(&f, &domain, None, 1e-9).unwrap();
        assert!(report.psh);
        assert!(report.witness.is_none());

        let neg = ScalarField::from_poly(
            2,
            Poly::var(0).mul(&Poly::var(0)).scale(&num_complex::Complex::new(-1.0, 0.0)),
        )
        .unwrap();
        let report = is_psh(&neg, &domain, None, 1e-9).unwrap();
        assert!(!report.psh);
        let w = report.witness.unwrap();
        assert_eq!(w.node_index, 0);
        assert_relative_eq!(w.min_eigenvalue, -2.0, epsilon = 1e-10);
    }

    #[test]
    fn designated_smooth_approximant_is_psh_on_the_unit_box() {
        let domain = Domain::cube(-1.0, 1.0, 3).unwrap();
        let f = sqrt_norm2_eps(2, 0.1);
        assert!(is_psh(&f, &domain, None, 1e-9).unwrap().psh);
    }

    #[test]
    fn ma_density_of_norm_squared_is_eight_to_the_n() {
        for n in 2..=3 {
            let f = norm2(n);
            let x: Vec<f64> = (0..4 * n).map(|i| 0.1 * i as f64 - 0.2).collect();
            assert_relative_eq!(
                ma_density(&f, &x).unwrap(),
                8f64.powi(n as i32),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn ma_density_of_affine_fields_vanishes() {
        let p = Poly::var(0)
            .scale(&num_complex::Complex::new(3.0, 0.0))
            .add(&Poly::var(5))
            .add(&Poly::constant(num_complex::Complex::new(-2.0, 0.0)));
        let f = ScalarField::from_poly(2, p).unwrap();
        let x = vec![0.3; 8];
        assert!(ma_density(&f, &x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ma_density_is_n_homogeneous_in_the_field() {
        let n = 2;
        let f = norm2(n);
        let c = 1.37;
        let scaled = ScalarField::from_poly(
            n,
            Poly::var(0)
                .mul(&Poly::var(0))
                .add(&Poly::var(1).mul(&Poly::var(1)))
                .add(&Poly::var(2).mul(&Poly::var(2)))
                .add(&Poly::var(3).mul(&Poly::var(3)))
                .add(&Poly::var(4).mul(&Poly::var(4)))
                .add(&Poly::var(5).mul(&Poly::var(5)))
                .add(&Poly::var(6).mul(&Poly::var(6)))
                .add(&Poly::var(7).mul(&Poly::var(7)))
                .scale(&num_complex::Complex::new(c, 0.0)),
        )
        .unwrap();
        let x = vec![0.25; 8];
        let base = ma_density(&f, &x).unwrap();
        let got = ma_density(&scaled, &x).unwrap();
        assert_relative_eq!(got, c.powi(n as i32) * base, max_relative = 1e-12);
    }

    #[test]
    fn ma_density_matches_the_form_route() {
        // top((Delta f)^n) = n! * ma_density for polynomial fields.
        let n = 2;
        let p = Poly::var(0)
            .mul(&Poly::var(0))
            .add(&Poly::var(1).mul(&Poly::var(1)))
            .add(&Poly::var(2).mul(&Poly::var(2)))
            .add(&Poly::var(3).mul(&Poly::var(3)))
            .add(&Poly::var(4).mul(&Poly::var(4)))
            .add(&Poly::var(5).mul(&Poly::var(5)))
            .add(&Poly::var(6).mul(&Poly::var(6)))
            .add(&Poly::var(7).mul(&Poly::var(7)))
            .add(
                &Poly::var(0)
                    .mul(&Poly::var(4))
                    .mul(&Poly::var(4))
                    .scale(&num_complex::Complex::new(0.25, 0.0)),
            );
        let f = ScalarField::from_poly(n, p).unwrap();
        let delta = f.delta_form().unwrap();
        let top = delta.wedge_pow(n).unwrap();
        for x in [[0.0; 8], [0.3; 8], [-0.2; 8]] {
            let form_value = top.coeffs[0].eval(&x).re;
            let det_value = ma_density(&f, &x).unwrap();
            assert_relative_eq!(form_value, 2.0 * det_value, max_relative = 1e-9);
        }
    }

    #[test]
    fn full_degree_pairing_reduces_to_the_plain_density_integral() {
        let n = 2;
        let f = norm2(n);
        let domain = Domain::cube(-1.0, 1.0, 3).unwrap();
        let phi = unit_bump(n, 1.0);
        let pairing = mixed_ma_pairing(&[f.clone(), f.clone()], &phi, &domain, None).unwrap();

        // Independent route: integrate phi * ma_density directly.
        let nodes = NodeSet::build(&domain, 8, None).unwrap();
        let direct = weighted_sum(&nodes, &|| {
            let mut phi_ev = phi.field().hessian_evaluator();
            let f = f.clone();
            move |x: &[f64]| phi_ev.value_at(x) * ma_density(&f, x).unwrap()
        });
        assert_relative_eq!(pairing.value, direct, max_relative = 1e-10);
        assert_eq!(pairing.rule, "gauss-legendre:3");
        assert_eq!(pairing.nodes, 3u64.pow(8));
    }

    #[test]
    fn pairing_of_affine_fields_vanishes() {
        let n = 2;
        let p = Poly::var(0).add(&Poly::var(6).scale(&num_complex::Complex::new(-2.0, 0.0)));
        let f = ScalarField::from_poly(n, p).unwrap();
        let domain = Domain::cube(-1.0, 1.0, 2).unwrap();
        let phi = unit_bump(n, 1.0);
        let pairing = mixed_ma_pairing(&[f.clone(), f], &phi, &domain, None).unwrap();
        assert!(pairing.value.abs() < 1e-12);
    }

    #[test]
    fn pairing_is_exactly_symmetric_in_the_fields() {
        let n = 2;
        let f1 = norm2(n);
        let q = Poly::var(0)
            .mul(&Poly::var(0))
            .scale(&num_complex::Complex::new(2.0, 0.0))
            .add(&Poly::var(3).mul(&Poly::var(3)))
            .add(&Poly::var(4).mul(&Poly::var(7)));
        let f2 = ScalarField::from_poly(n, q).unwrap();
        let domain = Domain::cube(-1.0, 1.0, 2).unwrap();
        let phi = unit_bump(n, 1.0);
        let a = mixed_ma_pairing(&[f1.clone(), f2.clone()], &phi, &domain, None).unwrap();
        let b = mixed_ma_pairing(&[f2, f1], &phi, &domain, None).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn pairings_of_psh_fields_against_nonnegative_weights_are_nonnegative() {
        let n = 2;
        let domain = Domain::cube(-1.0, 1.0, 3).unwrap();
        let phi = unit_bump(n, 0.8);
        for (k, fields) in [
            (1usize, vec![sqrt_norm2_eps(n, 0.3)]),
            (2, vec![sqrt_norm2_eps(n, 0.3), norm2(n)]),
        ] {
            let pairing = mixed_ma_pairing(&fields, &phi, &domain, None).unwrap();
            assert!(
                pairing.value >= -pairing.error_estimate,
                "k = {k}: value {} below -{}",
                pairing.value,
                pairing.error_estimate
            );
        }
    }

    #[test]
    fn doubling_nodes_stays_within_the_reported_error_estimate() {
        let n = 2;
        let f = sqrt_norm2_eps(n, 0.5);
        let phi = unit_bump(n, 0.9);
        let coarse = mixed_ma_pairing(
            &[f.clone(), f.clone()],
            &phi,
            &Domain::cube(-1.0, 1.0, 3).unwrap(),
            None,
        )
        .unwrap();
        let fine = mixed_ma_pairing(
            &[f.clone(), f],
            &phi,
            &Domain::cube(-1.0, 1.0, 6).unwrap(),
            None,
        )
        .unwrap();
        assert!((fine.value - coarse.value).abs() <= coarse.error_estimate);
    }

    #[test]
    fn box_pairings_reject_non_bump_weights_and_escaping_supports() {
        let n = 2;
        let f = norm2(n);
        let domain = Domain::cube(-1.0, 1.0, 2).unwrap();
        let smooth = TestWeight::smooth(norm2(n));
        assert!(matches!(
            mixed_ma_pairing(&[f.clone(), f.clone()], &smooth, &domain, None),
            Err(Error::InvalidConfig(_))
        ));
        let escaping = TestWeight::bump(n, &[0.5; 8], &[1.0; 8]).unwrap();
        assert!(matches!(
            mixed_ma_pairing(&[f.clone(), f.clone()], &escaping, &domain, None),
            Err(Error::InvalidConfig(_))
        ));
        // The torus takes any smooth weight.
        let torus = Domain::torus(2).unwrap();
        let t = crate::scalar::trig::TrigPoly::constant(crate::quat::Complex64::new(1.0, 0.0))
            .add(&crate::scalar::trig::TrigPoly::cos(0));
        let tf = ScalarField::from_trig(n, t).unwrap();
        let weight = TestWeight::smooth(tf.clone());
        assert!(mixed_ma_pairing(&[tf.clone(), tf], &weight, &torus, None).is_ok());
    }

    #[test]
    fn node_budget_violations_surface_from_pairings() {
        let n = 3;
        let f = norm2(n);
        let phi = unit_bump(n, 1.0);
        let domain = Domain::cube(-1.0, 1.0, 7).unwrap();
        assert!(matches!(
            mixed_ma_pairing(&[f.clone(), f.clone(), f.clone()], &phi, &domain, None),
            Err(Error::NodeBudgetExceeded { .. })
        ));
    }

    #[test]
    fn constant_family_produces_zero_gaps() {
        let n = 2;
        let phi = unit_bump(n, 1.0);
        let domain = Domain::cube(-1.0, 1.0, 2).unwrap();
        let table = converge_experiment(
            &|_eps| Ok(norm2(2)),
            2,
            &phi,
            &domain,
            &[0.4, 0.2, 0.1],
            None,
            1e-9,
        )
        .unwrap();
        assert_eq!(table.rows.len(), 3);
        assert!(table.rows.iter().all(|r| r.psh));
        assert!(table.gaps().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn smoothing_family_gaps_shrink_roughly_monotonically() {
        let n = 2;
        let phi = unit_bump(n, 0.9);
        // Even node count: no node sits at the origin, where the mollified
        // Hessian scales like 1/eps and would mask convergence.
        let domain = Domain::cube(-1.0, 1.0, 4).unwrap();
        let table = converge_experiment(
            &|eps| Ok(sqrt_norm2_eps(n, eps)),
            2,
            &phi,
            &domain,
            &[1.0, 0.5, 0.25],
            None,
            1e-9,
        )
        .unwrap();
        let gaps = table.gaps();
        assert!(gaps[1] < gaps[0], "gaps {gaps:?} should shrink");
    }

    #[test]
    fn mass_ratio_matches_direct_evaluation_for_norm_squared() {
        let n = 2;
        let f = norm2(n);
        let inner = Domain::cube(-1.0, 1.0, 4).unwrap();
        let outer = Domain::cube(-2.0, 2.0, 4).unwrap();
        let report = cln_ratio(&[f.clone(), f.clone()], &inner, &outer, None).unwrap();

        // Density is identically 64, so the numerator is 64 * vol; the sups
        // come from the same node scan the implementation uses.
        let vol = 2f64.powi(8);
        assert_relative_eq!(report.numerator, 64.0 * vol, max_relative = 1e-12);
        let outer_nodes = NodeSet::build(&outer, 8, None).unwrap();
        let mut ev = f.hessian_evaluator();
        let mut sup = 0.0f64;
        let mut x = vec![0.0; 8];
        for idx in 0..outer_nodes.len() {
            outer_nodes.fill(idx, &mut x);
            sup = sup.max(ev.value_at(&x).abs());
        }
        assert_relative_eq!(report.ratio, 64.0 * vol / (sup * sup), max_relative = 1e-12);
    }

    #[test]
    fn mass_ratio_is_invariant_under_field_scaling() {
        let n = 2;
        let f = norm2(n);
        let g = sqrt_norm2_eps(n, 0.4);
        let inner = Domain::cube(-1.0, 1.0, 3).unwrap();
        let outer = Domain::cube(-2.0, 2.0, 3).unwrap();
        let base = cln_ratio(&[f.clone(), g.clone()], &inner, &outer, None).unwrap();

        // Scaled copies rebuilt from scratch: 1.7 * norm2 and 0.35 * g.
        let cf = {
            let mut p = Poly::<f64>::constant(crate::quat::Complex64::new(0.0, 0.0));
            for i in 0..8 {
                p = p.add(&Poly::var(i).mul(&Poly::var(i)));
            }
            ScalarField::from_poly(n, p.scale(&num_complex::Complex::new(1.7, 0.0))).unwrap()
        };
        let cg = {
            let e = (Expr::norm_sqr(0, 8) + Expr::Const(0.16)).sqrt() * Expr::Const(0.35);
            ScalarField::from_expr(n, &e).unwrap()
        };
        let scaled = cln_ratio(&[cf, cg], &inner, &outer, None).unwrap();
        assert_relative_eq!(scaled.ratio, base.ratio, max_relative = 1e-12);
    }

    #[test]
    fn mass_ratio_rejects_bad_regions_and_zero_fields() {
        let n = 2;
        let f = norm2(n);
        let inner = Domain::cube(-1.0, 1.0, 3).unwrap();
        let outer = Domain::cube(-2.0, 2.0, 3).unwrap();
        assert!(matches!(
            cln_ratio(&[f.clone()], &outer, &inner, None),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            cln_ratio(&[f.clone()], &inner, &inner, None),
            Err(Error::InvalidConfig(_))
        ));
        let zero =
            ScalarField::from_poly(n, Poly::constant(num_complex::Complex::new(0.0, 0.0)))
                .unwrap();
        assert!(matches!(
            cln_ratio(&[zero], &inner, &outer, None),
            Err(Error::NumericalDegeneracy(_))
        ));
    }

    #[test]
    fn pairing_value_is_thread_count_independent() {
        let n = 2;
        let f = sqrt_norm2_eps(n, 0.3);
        let phi = unit_bump(n, 0.9);
        let domain = Domain::cube(-1.0, 1.0, 3).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                mixed_ma_pairing(&[f.clone(), f.clone()], &phi, &domain, None)
                    .unwrap()
                    .value
            })
        };
        assert_eq!(run(1).to_bits(), run(7).to_bits());
    }
}
