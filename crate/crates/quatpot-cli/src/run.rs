//! Subcommand implementations. Every command returns the JSON payload plus
//! its list of checks; the caller wraps both in the envelope and maps check
//! failures and library errors to exit codes.

use std::collections::BTreeMap;
use std::path::Path;

use num::{BigInt, BigRational};
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use quatpot::calculus::{
    baston_delta, del, del_j, delta_star, torus_pairing_integral, ScalarField, C_NORM,
};
use quatpot::cones::{is_weakly_positive_sampled, ConeGenerator};
use quatpot::error::{Error, Result};
use quatpot::exterior::{herm_to_form, Form};
use quatpot::fields::parse_field;
use quatpot::oracle::moore_det_reference;
use quatpot::pluripotential::{
    cln_ratio, converge_experiment, is_psh, mixed_ma_pairing, ConvergeTable, TestWeight,
};
use quatpot::qlinalg::HermitianQMatrix;
use quatpot::quat::{Complex64, Quat, Quaternion};
use quatpot::quadrature::{Domain, DomainKind};
use quatpot::scalar::{Poly, TrigPoly};

use crate::envelope::Check;
use crate::{Cli, Command, Suite};

const ORACLE_REL_TOL: f64 = 1e-9;
const ADJOINT_REL_TOL: f64 = 1e-10;
const FLAT_IDENTIFICATION_TOL: f64 = 1e-10;
const WEAK_SAMPLES: u64 = 400;
const WEDGE_SAMPLES: u64 = 20;

pub fn dispatch(cli: &Cli, config: &mut BTreeMap<String, Value>) -> Result<(Value, Vec<Check>)> {
    match &cli.command {
        Command::MooreDet { matrix } => moore_det(cli, config, matrix),
        Command::Hessian { field, point } => hessian(cli, config, field, point),
        Command::PshCheck {
            field,
            box_spec,
            torus,
        } => psh_check(cli, config, field, box_spec, *torus),
        Command::MaPairing {
            fields,
            phi,
            box_spec,
            torus,
        } => ma_pairing(cli, config, fields, phi, box_spec, *torus),
        Command::Converge {
            family,
            eps_list,
            k,
            phi,
            box_spec,
            csv,
        } => converge(cli, config, family, eps_list, *k, phi, box_spec, csv.as_deref()),
        Command::Cln {
            fields,
            inner,
            outer,
        } => cln(cli, config, fields, inner, outer),
        Command::Verify { suite } => verify(cli, config, suite),
    }
}

fn moore_det(
    cli: &Cli,
    config: &mut BTreeMap<String, Value>,
    spec: &str,
) -> Result<(Value, Vec<Check>)> {
    config.insert("matrix".into(), json!(spec));
    let a = parse_matrix(cli.n, spec)?;
    if a.n() < 2 {
        return Err(Error::InvalidConfig(format!(
            "n must be at least 2, got {}",
            a.n()
        )));
    }
    config.insert("n".into(), json!(a.n()));
    let det = a.moore_det()?;
    let data = json!({
        "n": a.n(),
        "matrix": quad_rows(&a),
        "eigenvalues": a.eigenvalues(),
        "moore_det": det,
    });
    Ok((data, vec![Check::value("moore-det", det)]))
}

fn hessian(
    cli: &Cli,
    config: &mut BTreeMap<String, Value>,
    field: &str,
    point: &str,
) -> Result<(Value, Vec<Check>)> {
    config.insert("field".into(), json!(field));
    config.insert("point".into(), json!(point));
    let f = parse_field(cli.n, field)?;
    let x = parse_floats(point)?;
    if x.len() != 4 * cli.n {
        return Err(Error::InvalidConfig(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            4 * cli.n
        )));
    }
    let mut ev = f.hessian_evaluator();
    let h = ev.hessian(&x)?;
    // The density is auxiliary here: a degenerate spectrum pairing leaves it
    // null instead of failing the whole command.
    let density = h.moore_det().ok();
    let data = json!({
        "n": cli.n,
        "point": x,
        "hessian": quad_rows(&h),
        "eigenvalues": h.eigenvalues(),
        "density": density,
    });
    let min = h.min_eigenvalue();
    Ok((data, vec![Check::value("min-eigenvalue", min)]))
}

fn psh_check(
    cli: &Cli,
    config: &mut BTreeMap<String, Value>,
    field: &str,
    box_spec: &str,
    torus: bool,
) -> Result<(Value, Vec<Check>)> {
    config.insert("field".into(), json!(field));
    insert_domain_echo(config, box_spec, torus);
    let f = parse_field(cli.n, field)?;
    let domain = build_domain(cli, box_spec, torus)?;
    let report = is_psh(&f, &domain, cli.seed, cli.tol.unwrap_or(1e-9))?;
    let detail = report
        .witness
        .as_ref()
        .map(|w| format!("Hessian not PSD at node {}", w.node_index));
    let value = report.witness.as_ref().map(|w| w.min_eigenvalue);
    let checks = vec![Check::pass_fail("psh", report.psh, value, detail)];
    Ok((serde_json::to_value(&report).expect("report serializes"), checks))
}

fn ma_pairing(
    cli: &Cli,
    config: &mut BTreeMap<String, Value>,
    fields: &[String],
    phi: &str,
    box_spec: &str,
    torus: bool,
) -> Result<(Value, Vec<Check>)> {
    config.insert("fields".into(), json!(fields));
    config.insert("phi".into(), json!(phi));
    insert_domain_echo(config, box_spec, torus);
    let parsed: Vec<ScalarField> = fields
        .iter()
        .map(|s| parse_field(cli.n, s))
        .collect::<Result<_>>()?;
    let domain = build_domain(cli, box_spec, torus)?;
    let weight = parse_phi(cli.n, phi, &domain)?;
    let pairing = mixed_ma_pairing(&parsed, &weight, &domain, cli.seed)?;
    let checks = vec![Check::value("pairing", pairing.value)];
    Ok((
        serde_json::to_value(&pairing).expect("pairing serializes"),
        checks,
    ))
}

#[allow(clippy::too_many_arguments)]
fn converge(
    cli: &Cli,
    config: &mut BTreeMap<String, Value>,
    family: &str,
    eps_list: &str,
    k: Option<usize>,
    phi: &str,
    box_spec: &str,
    csv: Option<&Path>,
) -> Result<(Value, Vec<Check>)> {
    config.insert("family".into(), json!(family));
    config.insert("eps_list".into(), json!(eps_list));
    config.insert("k".into(), json!(k));
    config.insert("phi".into(), json!(phi));
    config.insert("box".into(), json!(box_spec));
    config.insert("csv".into(), json!(csv.map(|p| p.display().to_string())));
    let n = cli.n;
    let name = family.to_owned();
    let fam = move |e: f64| -> Result<ScalarField> {
        match name.as_str() {
            "sqrt_norm2_eps" | "logcosh" => parse_field(n, &format!("{name}:{e}")),
            other => Err(Error::InvalidConfig(format!(
                "unknown smoothing family {other:?}; use sqrt_norm2_eps or logcosh"
            ))),
        }
    };
    let eps = parse_floats(eps_list)?;
    if eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidConfig(
            "epsilon schedule must be strictly positive".into(),
        ));
    }
    let k = k.unwrap_or(n);
    let domain = build_domain(cli, box_spec, false)?;
    let weight = parse_phi(n, phi, &domain)?;
    let table = converge_experiment(&fam, k, &weight, &domain, &eps, cli.seed, cli.tol.unwrap_or(1e-7))?;
    if let Some(path) = csv {
        write_eps_csv(path, &table)?;
    }
    let gaps = table.gaps();
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    let last = table.rows.last().expect("nonempty schedule");
    let final_fraction = gaps
        .last()
        .map(|g| g / last.pairing.value.abs().max(f64::MIN_POSITIVE));
    let mut checks = Vec::new();
    if gaps.len() >= 2 {
        checks.push(Check::pass_fail("gaps-monotone", monotone, None, None));
    }
    if let Some(fr) = final_fraction {
        checks.push(Check::value("final-gap-fraction", fr));
    }
    checks.push(Check::pass_fail(
        "rows-psh",
        table.rows.iter().all(|r| r.psh),
        None,
        None,
    ));
    let data = json!({
        "rows": serde_json::to_value(&table.rows).expect("rows serialize"),
        "gaps": gaps,
    });
    Ok((data, checks))
}

fn cln(
    cli: &Cli,
    config: &mut BTreeMap<String, Value>,
    fields: &[String],
    inner: &str,
    outer: &str,
) -> Result<(Value, Vec<Check>)> {
    config.insert("fields".into(), json!(fields));
    config.insert("inner".into(), json!(inner));
    config.insert("outer".into(), json!(outer));
    let parsed: Vec<ScalarField> = fields
        .iter()
        .map(|s| parse_field(cli.n, s))
        .collect::<Result<_>>()?;
    let (ilo, ihi) = parse_bounds(inner)?;
    let (olo, ohi) = parse_bounds(outer)?;
    let mut inner_d = Domain::cube(ilo, ihi, cli.nodes_per_axis)?;
    let mut outer_d = Domain::cube(olo, ohi, cli.nodes_per_axis)?;
    if let Some(s) = cli.qmc_samples {
        inner_d = inner_d.with_qmc(s);
        outer_d = outer_d.with_qmc(s);
    }
    let report = cln_ratio(&parsed, &inner_d, &outer_d, cli.seed)?;
    let checks = vec![Check::value("cln-ratio", report.ratio)];
    Ok((
        serde_json::to_value(&report).expect("report serializes"),
        checks,
    ))
}

fn verify(
    cli: &Cli,
    config: &mut BTreeMap<String, Value>,
    suite: &Suite,
) -> Result<(Value, Vec<Check>)> {
    let seed = cli.seed.ok_or_else(|| {
        Error::InvalidConfig("verification suites sample randomly; pass --seed".into())
    })?;
    let (trials, result) = match suite {
        Suite::Algebra { trials } => (*trials, verify_algebra(cli.n, seed, *trials)?),
        Suite::Multiplicativity { trials } => {
            (*trials, verify_multiplicativity(cli.n, seed, *trials)?)
        }
        Suite::Adjoint { trials } => (*trials, verify_adjoint(cli.n, seed, *trials)?),
        Suite::Cones { trials } => (*trials, verify_cones(cli.n, seed, *trials)?),
        Suite::DeltaConsistency { trials } => {
            (*trials, verify_delta_consistency(cli.n, seed, *trials)?)
        }
    };
    config.insert("trials".into(), json!(trials));
    Ok(result)
}

fn verify_algebra(n: usize, seed: u64, trials: u32) -> Result<(Value, Vec<Check>)> {
    if n > 4 {
        return Err(Error::InvalidConfig(
            "the reference determinant is factorial; use n <= 4".into(),
        ));
    }
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let a = random_hermitian(n, &mut r);
        let fast = a.moore_det()?;
        let o = moore_det_reference(&a.as_qmatrix());
        let err = (fast - o.t)
            .abs()
            .max(o.x.abs())
            .max(o.y.abs())
            .max(o.z.abs());
        worst = worst.max(err / o.t.abs().max(1.0));
    }
    let per_degree = trials.min(25).max(1);
    let mut forms = 0u32;
    let mut dd_bad = 0u32;
    let mut jj_bad = 0u32;
    let mut anti_bad = 0u32;
    for degree in 0..=(2 * n - 2) {
        for _ in 0..per_degree {
            let w = random_rational_form(n, degree, &mut r);
            if !del(&del(&w)?)?.is_zero() {
                dd_bad += 1;
            }
            if !del_j(&del_j(&w)?)?.is_zero() {
                jj_bad += 1;
            }
            if !del(&del_j(&w)?)?.eq_exact(&del_j(&del(&w)?)?.neg()) {
                anti_bad += 1;
            }
            forms += 1;
        }
    }
    let data = json!({
        "matrices": trials,
        "forms": forms,
        "max_relative_error": worst,
    });
    let checks = vec![
        Check::pass_fail("moore-oracle", worst <= ORACLE_REL_TOL, Some(worst), None),
        Check::pass_fail("d-squared-zero", dd_bad == 0, None, None),
        Check::pass_fail("dj-squared-zero", jj_bad == 0, None, None),
        Check::pass_fail("anticommutation", anti_bad == 0, None, None),
    ];
    Ok((data, checks))
}

fn verify_multiplicativity(n: usize, seed: u64, trials: u32) -> Result<(Value, Vec<Check>)> {
    let mut configs = Vec::new();
    for a in 0..=(2 * n).saturating_sub(4) {
        for b in 0..=(2 * n).saturating_sub(4) {
            if a + b + 4 <= 2 * n {
                configs.push((a, b));
            }
        }
    }
    let mut r = rng(seed);
    let mut nonzero = 0u32;
    for i in 0..trials {
        let (da, db) = configs[i as usize % configs.len()];
        let omega = random_rational_form(n, da, &mut r);
        let eta = random_rational_form(n, db, &mut r);
        let d_eta = baston_delta(&eta)?;
        let lhs = baston_delta(&omega.wedge(&d_eta)?)?;
        let rhs = baston_delta(&omega)?.wedge(&d_eta)?;
        if !lhs.sub(&rhs)?.is_zero() {
            nonzero += 1;
        }
    }
    let ok = nonzero == 0;
    let data = json!({
        "trials": trials,
        "degree_configs": configs.len(),
        "nonzero_residuals": nonzero,
        "max_residual": if ok { json!(0.0) } else { Value::Null },
    });
    let detail = format!("{trials} pairs over {} degree configurations", configs.len());
    let checks = vec![Check::pass_fail(
        "multiplicativity-exact",
        ok,
        ok.then_some(0.0),
        Some(detail),
    )];
    Ok((data, checks))
}

fn verify_adjoint(n: usize, seed: u64, trials: u32) -> Result<(Value, Vec<Check>)> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    let mut pairs = 0u32;
    for _ in 0..trials {
        for (dxi, dform) in [(0usize, 2usize), (1, 3)] {
            let xi = random_trig_form(n, dxi, -(dxi as i32) - 1, &mut r);
            let f = random_trig_form(n, dform, -(dform as i32), &mut r);
            let lhs = torus_pairing_integral(&baston_delta(&xi)?, &f)?;
            let rhs = torus_pairing_integral(&xi, &delta_star(&f)?)?;
            let scale = lhs.norm().max(rhs.norm()).max(1e-6);
            worst = worst.max((lhs - rhs).norm() / scale);
            pairs += 1;
        }
    }
    let data = json!({
        "pairs": pairs,
        "max_relative_mismatch": worst,
    });
    let checks = vec![Check::pass_fail(
        "adjoint-identity",
        worst <= ADJOINT_REL_TOL,
        Some(worst),
        None,
    )];
    Ok((data, checks))
}

fn verify_cones(n: usize, seed: u64, trials: u32) -> Result<(Value, Vec<Check>)> {
    let mut r = rng(seed);
    let mut mismatches = 0u32;
    let mut attempts = 0u32;
    let mut done = 0u32;
    while done < trials {
        attempts += 1;
        if attempts > 200 * trials {
            return Err(Error::InvalidConfig(
                "matrix sampling failed to leave the PSD boundary".into(),
            ));
        }
        let a = if done % 2 == 0 {
            random_gram(n, &mut r)
        } else {
            random_hermitian(n, &mut r)
        };
        let eig = a.eigenvalues();
        let scale = eig.iter().fold(1e-30f64, |m, v| m.max(v.abs()));
        let min = a.min_eigenvalue();
        let expect_psd = if min >= 0.0 {
            true
        } else if min <= -1e-7 * scale {
            false
        } else {
            continue;
        };
        let verdict =
            is_weakly_positive_sampled(&herm_to_form(&a), WEAK_SAMPLES, seed + u64::from(done), None)?
                .is_consistent();
        if verdict != expect_psd {
            mismatches += 1;
        }
        done += 1;
    }
    let mut refuted = 0u32;
    for i in 0..trials {
        let k2 = if n >= 3 && i % 2 == 1 { n - 1 } else { 1 };
        let g1 = ConeGenerator::random(n, 1, &mut r);
        let g2 = ConeGenerator::random(n, k2, &mut r);
        let w = g1.form().wedge(&g2.form())?;
        if !is_weakly_positive_sampled(&w, WEDGE_SAMPLES, seed + 7_000 + u64::from(i), None)?
            .is_consistent()
        {
            refuted += 1;
        }
    }
    let data = json!({
        "matrices": trials,
        "wedges": trials,
        "mismatches": mismatches,
        "refutations": refuted,
    });
    let checks = vec![
        Check::pass_fail("psd-equivalence", mismatches == 0, None, None),
        Check::pass_fail("wedge-closure", refuted == 0, None, None),
    ];
    Ok((data, checks))
}

fn verify_delta_consistency(n: usize, seed: u64, trials: u32) -> Result<(Value, Vec<Check>)> {
    let d = 4 * n;
    // Calibration input: squared norm of the first quaternion slot.
    let mut cal: Poly<f64> = Poly::zero();
    for v in 0..4 {
        let mut e = vec![0u8; v + 1];
        e[v] = 2;
        cal = cal.add(&Poly::monomial(&e, Complex64::new(1.0, 0.0)));
    }
    let cal_field = ScalarField::from_poly(n, cal.clone())?;
    let mut cal_ev = cal_field.hessian_evaluator();
    let origin = vec![0.0; d];
    let cal_form = herm_to_form(&cal_ev.hessian(&origin)?);
    let cal_ddj = del(&del_j(&Form::scalar(n, cal, -1))?)?;
    let c_cal = cal_form.coeff(0b11).re / cal_ddj.coeff(0b11).eval(&origin).re;
    let c_ok = c_cal == f64::from(C_NORM as i32);

    let mut r = rng(seed);
    let mut worst = 0.0f64;
    let masks: Vec<u32> = (0u32..1 << (2 * n)).filter(|m| m.count_ones() == 2).collect();
    for _ in 0..trials {
        let p = random_real_poly(d, 5, 3, &mut r);
        let field = ScalarField::from_poly(n, p.clone())?;
        let mut ev = field.hessian_evaluator();
        let ddj = del(&del_j(&Form::scalar(n, p, -1))?)?;
        for _ in 0..5 {
            let x = random_point(d, &mut r);
            let lhs = herm_to_form(&ev.hessian(&x)?);
            let scale = lhs.max_coeff_norm().max(1.0);
            for &m in &masks {
                let rhs = ddj.coeff(m).eval(&x) * Complex64::new(c_cal, 0.0);
                worst = worst.max((lhs.coeff(m) - rhs).norm() / scale);
            }
        }
    }
    let data = json!({
        "polynomials": trials,
        "points_each": 5,
        "constant": c_cal,
        "max_deviation": worst,
    });
    let checks = vec![
        Check::pass_fail("calibration-constant", c_ok, Some(c_cal), None),
        Check::pass_fail(
            "flat-identification",
            worst <= FLAT_IDENTIFICATION_TOL,
            Some(worst),
            None,
        ),
    ];
    Ok((data, checks))
}

// ---- input parsing ----

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("not a number: {t:?}")))
        })
        .collect()
}

fn parse_bounds(s: &str) -> Result<(f64, f64)> {
    let v = parse_floats(s)?;
    if v.len() != 2 {
        return Err(Error::InvalidConfig(format!(
            "expected `lo,hi`, got {s:?}"
        )));
    }
    Ok((v[0], v[1]))
}

fn insert_domain_echo(config: &mut BTreeMap<String, Value>, box_spec: &str, torus: bool) {
    if torus {
        config.insert("domain".into(), json!("torus"));
    } else {
        config.insert("domain".into(), json!(format!("box {box_spec}")));
    }
}

fn build_domain(cli: &Cli, box_spec: &str, torus: bool) -> Result<Domain> {
    let d = if torus {
        Domain::torus(cli.nodes_per_axis)?
    } else {
        let (lo, hi) = parse_bounds(box_spec)?;
        Domain::cube(lo, hi, cli.nodes_per_axis)?
    };
    Ok(match cli.qmc_samples {
        Some(s) => d.with_qmc(s),
        None => d,
    })
}

fn parse_phi(n: usize, spec: &str, domain: &Domain) -> Result<TestWeight> {
    if spec == "one" {
        return Ok(TestWeight::one(n));
    }
    if let Some(rest) = spec.strip_prefix("bump:") {
        let radius: f64 = rest
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad bump radius: {rest:?}")))?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidConfig(
                "bump radius must be positive and finite".into(),
            ));
        }
        let center = match domain.kind {
            DomainKind::Box { lo, hi } => 0.5 * (lo + hi),
            DomainKind::Torus => std::f64::consts::PI,
        };
        return TestWeight::bump(n, &vec![center; 4 * n], &vec![radius; 4 * n]);
    }
    Ok(TestWeight::smooth(parse_field(n, spec)?))
}

/// `identity`, `identity:N`, `diag:a,b,...`, or a JSON file of quadruples.
fn parse_matrix(default_n: usize, spec: &str) -> Result<HermitianQMatrix> {
    if spec == "identity" {
        return Ok(HermitianQMatrix::identity(default_n));
    }
    if let Some(rest) = spec.strip_prefix("identity:") {
        let n: usize = rest
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad identity size: {rest:?}")))?;
        return Ok(HermitianQMatrix::identity(n));
    }
    if let Some(rest) = spec.strip_prefix("diag:") {
        let d = parse_floats(rest)?;
        return Ok(HermitianQMatrix::from_diagonal(&d));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::InvalidConfig(format!("cannot read matrix file {spec:?}: {e}")))?;
    let rows: Vec<Vec<[f64; 4]>> = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("matrix file {spec:?}: {e}")))?;
    let n = rows.len();
    if rows.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidConfig(
            "matrix file must hold a square array of [t,x,y,z] quadruples".into(),
        ));
    }
    let entries: Vec<Quat> = rows
        .iter()
        .flatten()
        .map(|q| Quaternion::new(q[0], q[1], q[2], q[3]))
        .collect();
    HermitianQMatrix::from_entries(n, entries)
}

fn quad_rows(a: &HermitianQMatrix) -> Vec<Vec<[f64; 4]>> {
    (0..a.n())
        .map(|i| {
            (0..a.n())
                .map(|j| {
                    let q = a.entry(i, j);
                    [q.t, q.x, q.y, q.z]
                })
                .collect()
        })
        .collect()
}

fn write_eps_csv(path: &Path, table: &ConvergeTable) -> Result<()> {
    let mut s = String::from("eps,value,nodes,error_estimate,psh\n");
    for row in &table.rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            row.eps, row.pairing.value, row.pairing.nodes, row.pairing.error_estimate, row.psh
        ));
    }
    std::fs::write(path, s)
        .map_err(|e| Error::InvalidConfig(format!("cannot write CSV {path:?}: {e}")))
}

// ---- deterministic sampling ----

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
}

fn random_trig_form(n: usize, degree: usize, twist: i32, r: &mut ChaCha8Rng) -> Form<TrigPoly> {
    Form::from_fn(n, degree, twist, |_| random_trig(4 * n, r))
}
