//! Acceptance suite: end-to-end checks of the library's numerical and
//! algebraic contracts, one test per criterion. Every test prints a single
//! summary line (PASS or FAIL) with the measured statistics; the thresholds
//! are the constants below and nothing else.
//!
//! Run `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::{Duration, Instant};

use num::{BigInt, BigRational};
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quatpot::calculus::{
    baston_delta, del, del_j, delta_star, realify_left, torus_pairing_integral, ScalarField,
    C_NORM,
};
use quatpot::cones::{is_weakly_positive_sampled, ConeGenerator};
use quatpot::exterior::{herm_to_form, Form};
use quatpot::fields::{norm2_poly, parse_field};
use quatpot::oracle::moore_det_reference;
use quatpot::pluripotential::{cln_ratio, converge_experiment, TestWeight};
use quatpot::qlinalg::{embed_complex, HermitianQMatrix, QMatrix};
use quatpot::quat::{Complex64, Quat, Quaternion};
use quatpot::quadrature::Domain;
use quatpot::scalar::{Poly, TrigPoly};

const MOORE_ORACLE_REL_TOL: f64 = 1e-9;
const MOORE_ORACLE_BUDGET: Duration = Duration::from_secs(30);
const MULTIPLICATIVITY_BUDGET: Duration = Duration::from_secs(120);
const FLAT_IDENTIFICATION_TOL: f64 = 1e-10;
const ADJOINT_REL_TOL: f64 = 1e-10;
const WEAK_POSITIVITY_SAMPLES: u64 = 1_000;
const CONVERGE_FINAL_GAP_FRACTION: f64 = 0.01;
const CONVERGE_FAMILY_AGREEMENT: f64 = 0.02;
const CONVERGE_BUDGET: Duration = Duration::from_secs(600);
const CLN_SCALING_REL_TOL: f64 = 1e-12;
const CLN_MAX_OVER_MEDIAN: f64 = 50.0;
const PSH_EIG_REL_TOL: f64 = 1e-9;

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(r: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - r.gen::<f64>();
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_quat(r: &mut ChaCha8Rng) -> Quat {
    Quaternion::new(gauss(r), gauss(r), gauss(r), gauss(r))
}

fn random_hermitian(n: usize, r: &mut ChaCha8Rng) -> HermitianQMatrix {
    let mut entries = vec![Quat::zero(); n * n];
    for i in 0..n {
        entries[i * n + i] = Quaternion::from_real(gauss(r));
        for j in (i + 1)..n {
            let q = random_quat(r);
            entries[i * n + j] = q;
            entries[j * n + i] = q.conj();
        }
    }
    HermitianQMatrix::from_entries(n, entries).expect("hermitian by construction")
}

fn random_gram(n: usize, r: &mut ChaCha8Rng) -> HermitianQMatrix {
    let mut a = HermitianQMatrix::from_diagonal(&vec![0.0; n]);
    for _ in 0..n {
        let row: Vec<Quat> = (0..n).map(|_| random_quat(r)).collect();
        a = a.add(&HermitianQMatrix::rank_one(&row)).expect("same size");
    }
    a
}

fn random_point(d: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| 2.0 * r.gen::<f64>() - 1.0).collect()
}

fn deg2_masks(bits: u32) -> Vec<u32> {
    (0u32..1 << bits).filter(|m| m.count_ones() == 2).collect()
}

fn rational(r: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(BigInt::from(r.gen_range(-8i64..=8)), BigInt::from(4))
}

fn random_rational_poly(d: usize, r: &mut ChaCha8Rng) -> Poly<BigRational> {
    let mut p: Poly<BigRational> = Poly::zero();
    for _ in 0..2 {
        let mut exps = vec![0u8; d];
        for _ in 0..2 {
            exps[r.gen_range(0..d)] += 1;
        }
        let c = Complex::new(rational(r), BigRational::from_integer(BigInt::from(0)));
        p = p.add(&Poly::monomial(&exps, c));
    }
    p
}

/// Random polynomial form with the twist the second-order operator expects.
fn random_rational_form(n: usize, degree: usize, r: &mut ChaCha8Rng) -> Form<Poly<BigRational>> {
    Form::from_fn(n, degree, -(degree as i32) - 1, |_| {
        random_rational_poly(4 * n, r)
    })
}

fn random_real_poly(d: usize, terms: usize, max_deg: usize, r: &mut ChaCha8Rng) -> Poly<f64> {
    let mut p: Poly<f64> = Poly::zero();
    for _ in 0..terms {
        let mut exps = vec![0u8; d];
        for _ in 0..r.gen_range(0..=max_deg) {
            exps[r.gen_range(0..d)] += 1;
        }
        let c = f64::from(r.gen_range(-8i32..=8)) / 4.0;
        p = p.add(&Poly::monomial(&exps, Complex64::new(c, 0.0)));
    }
    p
}

fn random_trig(d: usize, r: &mut ChaCha8Rng) -> TrigPoly {
    TrigPoly::cos(r.gen_range(0..d))
        .scale(Complex64::new(gauss(r), gauss(r)))
        .add(&TrigPoly::sin(r.gen_range(0..d)).scale(Complex64::new(gauss(r), gauss(r))))
        .add(
            &TrigPoly::cos(r.gen_range(0..d))
                .mul(&TrigPoly::sin(r.gen_range(0..d)))
                .scale(Complex64::new(gauss(r), 0.0)),
        )
}

fn random_trig_form(n: usize, degree: usize, twist: i32, r: &mut ChaCha8Rng) -> Form<TrigPoly> {
    Form::from_fn(n, degree, twist, |_| random_trig(4 * n, r))
}

/// Convex quadratic with spectrum bounded away from zero: x^T M x where
/// M = B^T B / d + 0.05 I for a Gaussian B.
fn random_convex_quadratic(d: usize, r: &mut ChaCha8Rng) -> Poly<f64> {
    let b: Vec<f64> = (0..d * d).map(|_| gauss(r)).collect();
    let mut p: Poly<f64> = Poly::zero();
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += b[k * d + i] * b[k * d + j];
            }
            s /= d as f64;
            if i == j {
                s += 0.05;
            }
            let mut exps = vec![0u8; d];
            exps[i] += 1;
            exps[j] += 1;
            p = p.add(&Poly::monomial(&exps, Complex64::new(s, 0.0)));
        }
    }
    p
}

#[test]
fn criterion_01_moore_determinant_matches_the_permutation_oracle() {
    let t0 = Instant::now();
    let mut r = rng(0xA1);
    let mut worst = 0.0f64;
    let mut count = 0u32;
    for n in [2usize, 3, 4] {
        for _ in 0..1000 {
            let a = random_hermitian(n, &mut r);
            let fast = a.moore_det().expect("generic spectra pair cleanly");
            let o = moore_det_reference(&a.as_qmatrix());
            let err = (fast - o.t)
                .abs()
                .max(o.x.abs())
                .max(o.y.abs())
                .max(o.z.abs());
            worst = worst.max(err / o.t.abs().max(1.0));
            count += 1;
        }
    }
    let dt = t0.elapsed();
    let ok = worst <= MOORE_ORACLE_REL_TOL && dt < MOORE_ORACLE_BUDGET;
    println!(
        "[acceptance] 1 moore determinant vs permutation oracle: {} \
         ({count} matrices, n in 2..=4, max relative error {worst:.2e} vs 1e-9, {:.1}s vs 30s)",
        status(ok),
        dt.as_secs_f64()
    );
    assert!(ok, "max relative error {worst:.3e}, elapsed {dt:?}");
}

#[test]
fn criterion_02_multiplicativity_is_exact_over_rationals() {
    let t0 = Instant::now();
    let mut r = rng(0xB2);
    let mut pairs = 0u32;
    let mut failures = 0u32;
    // Input degrees (a, b) pair to operator outputs of degree a+2 and b+2,
    // so a + b + 4 <= 2n bounds the admissible list per dimension.
    let configs: [(usize, usize, usize, u32); 7] = [
        (2, 0, 0, 100),
        (3, 0, 0, 17),
        (3, 0, 1, 17),
        (3, 1, 0, 17),
        (3, 0, 2, 17),
        (3, 2, 0, 17),
        (3, 1, 1, 17),
    ];
    for (n, da, db, reps) in configs {
        for _ in 0..reps {
            let omega = random_rational_form(n, da, &mut r);
            let eta = random_rational_form(n, db, &mut r);
            let d_eta = baston_delta(&eta).expect("twist matches degree");
            let lhs = baston_delta(&omega.wedge(&d_eta).expect("degrees fit"))
                .expect("twist matches degree");
            let rhs = baston_delta(&omega)
                .expect("twist matches degree")
                .wedge(&d_eta)
                .expect("degrees fit");
            if !lhs.sub(&rhs).expect("same shape").is_zero() {
                failures += 1;
            }
            pairs += 1;
        }
    }
    let dt = t0.elapsed();
    let ok = failures == 0 && pairs >= 200 && dt < MULTIPLICATIVITY_BUDGET;
    println!(
        "[acceptance] 2 multiplicativity over the rational backend: {} \
         ({pairs} form pairs, n in {{2,3}}, {failures} nonzero residuals, {:.1}s vs 120s)",
        status(ok),
        dt.as_secs_f64()
    );
    assert!(ok, "{failures} residuals over {pairs} pairs, elapsed {dt:?}");
}

#[test]
fn criterion_03_differential_identities_hold_exactly() {
    let mut r = rng(0xC3);
    let mut forms = 0u32;
    let mut failures = 0u32;
    for (n, max_deg) in [(2usize, 2usize), (3, 4)] {
        for degree in 0..=max_deg {
            for _ in 0..100 {
                let w = random_rational_form(n, degree, &mut r);
                let dd = del(&del(&w).unwrap()).unwrap();
                let jj = del_j(&del_j(&w).unwrap()).unwrap();
                let dj = del(&del_j(&w).unwrap()).unwrap();
                let jd = del_j(&del(&w).unwrap()).unwrap();
                if !dd.is_zero() || !jj.is_zero() || !dj.eq_exact(&jd.neg()) {
                    failures += 1;
                }
                forms += 1;
            }
        }
    }
    let ok = failures == 0 && forms == 800;
    println!(
        "[acceptance] 3 differential identities (d^2, dJ^2, anticommutation): {} \
         ({forms} rational forms across 8 configurations, {failures} violations, all exact)",
        status(ok)
    );
    assert!(ok, "{failures} violations over {forms} forms");
}

#[test]
fn criterion_04_hessian_image_matches_the_operator_with_a_frozen_constant() {
    let n = 2usize;
    let d = 4 * n;
    // Calibration input: squared norm of the first quaternion slot. The
    // ratio of the Hessian image to the mixed second-order form on the
    // {0,1} component freezes the normalization constant.
    let mut cal: Poly<f64> = Poly::zero();
    for v in 0..4 {
        let mut e = vec![0u8; v + 1];
        e[v] = 2;
        cal = cal.add(&Poly::monomial(&e, Complex64::new(1.0, 0.0)));
    }
    let cal_field = ScalarField::from_poly(n, cal.clone()).unwrap();
    let mut cal_ev = cal_field.hessian_evaluator();
    let origin = vec![0.0; d];
    let cal_form = herm_to_form(&cal_ev.hessian(&origin).unwrap());
    let cal_ddj = del(&del_j(&Form::scalar(n, cal, -1)).unwrap()).unwrap();
    let c_cal = cal_form.coeff(0b11).re / cal_ddj.coeff(0b11).eval(&origin).re;
    assert_eq!(c_cal, 4.0, "calibration must land exactly on the constant");
    assert_eq!(c_cal, C_NORM as f64);

    let mut r = rng(0xD4);
    let mut worst = 0.0f64;
    let masks = deg2_masks(2 * n as u32);
    for _ in 0..100 {
        let p = random_real_poly(d, 5, 3, &mut r);
        let field = ScalarField::from_poly(n, p.clone()).unwrap();
        let mut ev = field.hessian_evaluator();
        let ddj = del(&del_j(&Form::scalar(n, p, -1)).unwrap()).unwrap();
        for _ in 0..10 {
            let x = random_point(d, &mut r);
            let lhs = herm_to_form(&ev.hessian(&x).unwrap());
            let scale = lhs.max_coeff_norm().max(1.0);
            for &m in &masks {
                let rhs = ddj.coeff(m).eval(&x) * Complex64::new(c_cal, 0.0);
                worst = worst.max((lhs.coeff(m) - rhs).norm() / scale);
            }
        }
    }
    let ok = worst <= FLAT_IDENTIFICATION_TOL;
    println!(
        "[acceptance] 4 hessian image vs second-order operator (constant {c_cal} frozen \
         from the calibration input): {} (100 polynomials x 10 points, max deviation \
         {worst:.2e} vs 1e-10)",
        status(ok)
    );
    assert!(ok, "max deviation {worst:.3e}");
}

#[test]
fn criterion_05_operator_and_adjoint_agree_under_the_torus_pairing() {
    let n = 2usize;
    let mut r = rng(0xE5);
    let mut worst = 0.0f64;
    let mut count = 0u32;
    for _ in 0..25 {
        for (dxi, dform) in [(0usize, 2usize), (1, 3)] {
            let xi = random_trig_form(n, dxi, -(dxi as i32) - 1, &mut r);
            let f = random_trig_form(n, dform, -(dform as i32), &mut r);
            let lhs = torus_pairing_integral(&baston_delta(&xi).unwrap(), &f).unwrap();
            let rhs = torus_pairing_integral(&xi, &delta_star(&f).unwrap()).unwrap();
            let scale = lhs.norm().max(rhs.norm()).max(1e-6);
            worst = worst.max((lhs - rhs).norm() / scale);
            count += 2;
        }
    }
    let ok = worst <= ADJOINT_REL_TOL && count == 100;
    println!(
        "[acceptance] 5 adjoint identity under the torus pairing: {} \
         ({count} trigonometric fields, max relative mismatch {worst:.2e} vs 1e-10)",
        status(ok)
    );
    assert!(ok, "max relative mismatch {worst:.3e}");
}

#[test]
fn criterion_06_weak_positivity_of_two_forms_matches_the_spectrum() {
    let mut r = rng(0xF6);
    let mut psd_cases = 0u32;
    let mut indef_cases = 0u32;
    let mut mismatches = 0u32;
    let mut attempts = 0u32;
    let mut trial = 0u64;
    for n in [2usize, 3] {
        let mut done = 0u32;
        while done < 250 {
            attempts += 1;
            assert!(attempts < 50_000, "matrix sampling must terminate");
            let a = if done % 2 == 0 {
                random_gram(n, &mut r)
            } else {
                random_hermitian(n, &mut r)
            };
            let eig = a.eigenvalues();
            let scale = eig.iter().fold(1e-30f64, |m, v| m.max(v.abs()));
            let min = a.min_eigenvalue();
            // The PSD boundary itself is resampled: sign classification is
            // ill-posed there and no finite tolerance can arbitrate it.
            let expect_psd = if min >= 0.0 {
                true
            } else if min <= -1e-7 * scale {
                false
            } else {
                continue;
            };
            trial += 1;
            let verdict =
                is_weakly_positive_sampled(&herm_to_form(&a), WEAK_POSITIVITY_SAMPLES, trial, None)
                    .unwrap()
                    .is_consistent();
            if verdict != expect_psd {
                mismatches += 1;
            }
            if expect_psd {
                psd_cases += 1;
            } else {
                indef_cases += 1;
            }
            done += 1;
        }
    }
    let ok = mismatches == 0 && psd_cases + indef_cases == 500;
    println!(
        "[acceptance] 6 weak positivity equals PSD for 2-forms: {} \
         ({psd_cases} PSD + {indef_cases} indefinite matrices, n in {{2,3}}, \
         {mismatches} mismatches, refutations within {WEAK_POSITIVITY_SAMPLES} pairings)",
        status(ok)
    );
    assert!(ok, "{mismatches} mismatches");
}

#[test]
fn criterion_07_wedges_of_cone_generators_are_never_refuted() {
    let mut r = rng(0x17);
    let mut wedges = 0u32;
    let mut refuted = 0u32;
    let configs: [(usize, usize, usize, u32); 4] = [
        (2, 1, 1, 4000),
        (3, 1, 1, 2000),
        (3, 1, 2, 2000),
        (3, 2, 1, 2000),
    ];
    for (n, k1, k2, reps) in configs {
        for i in 0..reps {
            let g1 = ConeGenerator::random(n, k1, &mut r);
            let g2 = ConeGenerator::random(n, k2, &mut r);
            let w = g1.form().wedge(&g2.form()).expect("degrees fit");
            let verdict = is_weakly_positive_sampled(&w, 20, u64::from(i) + 1, None)
                .expect("well-formed positivity input");
            if !verdict.is_consistent() {
                refuted += 1;
            }
            wedges += 1;
        }
    }
    let ok = refuted == 0 && wedges == 10_000;
    println!(
        "[acceptance] 7 cone closure under wedge: {} \
         ({wedges} random generator wedges, n in {{2,3}}, {refuted} refutations)",
        status(ok)
    );
    assert!(ok, "{refuted} refutations over {wedges} wedges");
}

#[test]
fn criterion_08_smoothings_converge_and_independent_families_agree() {
    let t0 = Instant::now();
    let n = 2usize;
    let d = 4 * n;
    let eps: Vec<f64> = (0..6).map(|i| 0.4 / f64::powi(2.0, i)).collect();
    // Even per-axis node count keeps quadrature nodes away from the cone
    // point at the origin, where the smoothed Hessian scales like 1/eps.
    let domain = Domain::cube(-1.0, 1.0, 6).unwrap();
    let phi = TestWeight::bump(n, &vec![0.0; d], &vec![0.9; d]).unwrap();
    let sqrt_family = |e: f64| parse_field(n, &format!("sqrt_norm2_eps:{e}"));
    let log_family = |e: f64| parse_field(n, &format!("logcosh:{e}"));
    let ts = converge_experiment(&sqrt_family, n, &phi, &domain, &eps, None, 1e-7).unwrap();
    let tl = converge_experiment(&log_family, n, &phi, &domain, &eps, None, 1e-7).unwrap();
    let gaps = ts.gaps();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let last_sqrt = ts.rows.last().unwrap().pairing.value;
    let last_log = tl.rows.last().unwrap().pairing.value;
    let final_gap = *gaps.last().unwrap();
    let small = final_gap <= CONVERGE_FINAL_GAP_FRACTION * last_sqrt.abs();
    let family_dev = (last_sqrt - last_log).abs() / last_sqrt.abs().max(last_log.abs());
    let agree = family_dev <= CONVERGE_FAMILY_AGREEMENT;
    let all_psh = ts.rows.iter().chain(tl.rows.iter()).all(|row| row.psh);
    let dt = t0.elapsed();
    let ok = monotone && small && agree && all_psh && dt < CONVERGE_BUDGET;
    println!(
        "[acceptance] 8 smoothing convergence, eps halved 0.4 -> 0.0125: {} \
         (gaps {:?} monotone {}, final gap {:.2e} vs 1% of {:.4}, second family off by \
         {:.2e} vs 2%, all rows psh {}, {:.0}s vs 600s)",
        status(ok),
        gaps.iter().map(|g| (g * 1e6).round() / 1e6).collect::<Vec<_>>(),
        monotone,
        final_gap,
        last_sqrt,
        family_dev,
        all_psh,
        dt.as_secs_f64()
    );
    assert!(
        ok,
        "gaps {gaps:?}, final {last_sqrt} vs {last_log}, elapsed {dt:?}"
    );
}

#[test]
fn criterion_09_mass_ratio_is_scale_invariant_and_stable() {
    let n = 2usize;
    let d = 4 * n;
    let inner = Domain::cube(-1.0, 1.0, 2).unwrap();
    let outer = Domain::cube(-2.0, 2.0, 2).unwrap();
    let mut r = rng(0x29);
    let mut scaling_worst = 0.0f64;
    let mut spreads = Vec::new();
    let mut tuples = 0u32;
    for k in [1usize, 2] {
        let mut ratios = Vec::new();
        for t in 0..50u32 {
            let polys: Vec<Poly<f64>> =
                (0..k).map(|_| random_convex_quadratic(d, &mut r)).collect();
            let fields: Vec<ScalarField> = polys
                .iter()
                .map(|p| ScalarField::from_poly(n, p.clone()).unwrap())
                .collect();
            let rep = cln_ratio(&fields, &inner, &outer, None).unwrap();
            ratios.push(rep.ratio);
            tuples += 1;
            if t < 10 {
                let scaled: Vec<ScalarField> = polys
                    .iter()
                    .map(|p| {
                        let c = 0.25 + 3.75 * r.gen::<f64>();
                        ScalarField::from_poly(n, p.scale(&Complex64::new(c, 0.0))).unwrap()
                    })
                    .collect();
                let rep2 = cln_ratio(&scaled, &inner, &outer, None).unwrap();
                scaling_worst = scaling_worst.max((rep2.ratio - rep.ratio).abs() / rep.ratio);
            }
        }
        let mut sorted = ratios.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
        let median = sorted[sorted.len() / 2];
        let max = *sorted.last().unwrap();
        spreads.push((k, max / median));
    }
    let spread_ok = spreads.iter().all(|(_, s)| *s <= CLN_MAX_OVER_MEDIAN);
    let ok = scaling_worst <= CLN_SCALING_REL_TOL && spread_ok && tuples == 100;
    println!(
        "[acceptance] 9 mass-ratio stability: {} ({tuples} convex-quadratic tuples, \
         scaling deviation {scaling_worst:.2e} vs 1e-12, max/median {:?} vs 50)",
        status(ok),
        spreads
            .iter()
            .map(|(k, s)| format!("k={k}: {s:.2}"))
            .collect::<Vec<_>>()
    );
    assert!(ok, "scaling {scaling_worst:.3e}, spreads {spreads:?}");
}

#[test]
fn criterion_10_plurisubharmonicity_survives_quaternionic_linear_maps() {
    let n = 2usize;
    let d = 4 * n;
    let mut r = rng(0x3A);
    let mut checked = 0u32;
    let mut violations = 0u32;
    for t in 0..100u32 {
        let mut p = random_convex_quadratic(d, &mut r);
        if t % 3 == 0 {
            // Quartic admissible summand: the squared norm-square.
            let n2 = norm2_poly(d);
            p = p.add(&n2.mul(&n2).scale(&Complex64::new(0.25, 0.0)));
        }
        let f = ScalarField::from_poly(n, p).unwrap();
        let t_mat = loop {
            let cand = QMatrix::new(n, n, (0..n * n).map(|_| random_quat(&mut r)).collect())
                .expect("square shape");
            let sv = embed_complex(&cand).svd(false, false).singular_values;
            if sv.min() > 0.05 * sv.max() {
                break cand;
            }
        };
        let g = f.compose_linear(&realify_left(&t_mat)).unwrap();
        let mut ev = g.hessian_evaluator();
        for _ in 0..10 {
            let x = random_point(d, &mut r);
            let eig = ev.hessian(&x).unwrap().eigenvalues();
            let scale = eig.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if eig.iter().any(|&l| l < -PSH_EIG_REL_TOL * scale) {
                violations += 1;
            }
            checked += 1;
        }
    }
    let ok = violations == 0 && checked == 1000;
    println!(
        "[acceptance] 10 psh preserved by quaternionic linear maps: {} \
         (100 field/map pairs x 10 points, {violations} PSD violations)",
        status(ok)
    );
    assert!(ok, "{violations} violations");
}
