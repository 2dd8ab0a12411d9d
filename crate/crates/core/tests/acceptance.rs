//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines are always printed; exits nonzero if any fails.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64 as c64;
use rand::Rng;

use dvkit::classify::{self, ZeroLabel};
use dvkit::cli;
use dvkit::dvrep;
use dvkit::extend::{self, ExtensionOperator};
use dvkit::grid;
use dvkit::linalg::{ONE, ZERO};
use dvkit::poly2::{self, BivariatePolynomial};
use dvkit::soscert::{self, Construction};

fn poly(n: usize, m: usize, terms: &[(usize, usize, f64)]) -> BivariatePolynomial {
    BivariatePolynomial::from_real_terms(n, m, terms).unwrap()
}

fn z3_w2() -> BivariatePolynomial {
    poly(3, 2, &[(3, 0, 1.0), (0, 2, -1.0)])
}

fn w3_z2() -> BivariatePolynomial {
    poly(2, 3, &[(0, 3, 1.0), (2, 0, -1.0)])
}

fn one_minus_z3w2_i() -> BivariatePolynomial {
    BivariatePolynomial::from_terms(3, 2, &[(0, 0, c64::new(0.0, 1.0)), (3, 2, c64::new(0.0, -1.0))]).unwrap()
}

/// Points for kernel comparisons: pairs in the closed bidisk.
fn kernel_pairs(seed: u64, count: usize) -> Vec<((c64, c64), (c64, c64))> {
    let mut rng = grid::rng(seed);
    let a = grid::random_disk(&mut rng, 2 * count, 1.0);
    let b = grid::random_disk(&mut rng, 2 * count, 1.0);
    (0..count).map(|k| ((a[2 * k], b[2 * k]), (a[2 * k + 1], b[2 * k + 1]))).collect()
}

/// Outcome of one criterion: pass flag and a one-line summary.
type Outcome = (bool, String);

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = grid::rng(1);
    let (mut worst_ref, mut worst_mod) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let (n, m) = (rng.random_range(0..=6usize), rng.random_range(0..=6usize));
        let vals: Vec<c64> = (0..(n + 1) * (m + 1)).map(|_| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let p = BivariatePolynomial::from_fn(n, m, |j, k| vals[j * (m + 1) + k]);
        let (ez, ew) = poly2::reflection_derivative_residuals(&p);
        worst_ref = worst_ref.max(ez).max(ew);
        let q = p.add(&p.reflected());
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        for _ in 0..20 {
            let z = c64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let w = c64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            worst_mod = worst_mod.max(poly2::symmetric_modulus_residual(&q, a, b, z, w));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst_ref <= 1e-12 && worst_mod <= 1e-9 && secs < 1.0;
    (ok, format!("derivative formulas {worst_ref:.2e} (≤ 1e-12), modulus identity {worst_mod:.2e} (≤ 1e-9), {secs:.2}s"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cases = [
        ("z^3 - w^2", z3_w2(), ZeroLabel::DVDefining),
        ("i(1 - z^3 w^2)", one_minus_z3w2_i(), ZeroLabel::SymmetricNonvanishingOffTorus),
        ("4 - z - w", poly(1, 1, &[(0, 0, 4.0), (1, 0, -1.0), (0, 1, -1.0)]), ZeroLabel::StableClosed),
        ("6z^3 + 6w^2", z3_w2().derived_dv_poly(), ZeroLabel::DVDefining),
    ];
    let mut ok = true;
    let mut bad = Vec::new();
    for (name, p, want) in &cases {
        let got = classify::classify_zero_set(p, 64, 1e-7).label;
        if got != *want {
            ok = false;
            bad.push(format!("{name}: {got:?}"));
        }
    }
    let expected_derived = poly(3, 2, &[(3, 0, 6.0), (0, 2, 6.0)]);
    ok &= cases[3].1.max_coeff_diff(&expected_derived) == 0.0;
    let p = z3_w2();
    let mut rng = grid::rng(2);
    let counts: Vec<usize> = grid::random_disk(&mut rng, 20, 1.0)
        .into_iter()
        .map(|z| classify::root_count_in_disk(&p, z, classify::default_quad_points(&p)).unwrap_or(usize::MAX))
        .collect();
    ok &= counts.iter().all(|&c| c == 2);
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 5.0;
    (ok, format!("labels {}, root counts all 2: {}, {secs:.2}s", if bad.is_empty() { "match".into() } else { bad.join(", ") }, counts.iter().all(|&c| c == 2)))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let q = BivariatePolynomial::constant(c64::new(-5.0, 0.0), 3, 2);
    let t = soscert::compute_moments(&q, 256).unwrap();
    let (e, f) = soscert::subspace_kernel_pair(&q, &t).unwrap();
    let mut kerr = 0.0f64;
    for (x, y) in kernel_pairs(3, 200) {
        let zz = x.0 * y.0.conj();
        let ww = x.1 * y.1.conj();
        kerr = kerr.max((poly2::kernel(&e, x, y) - (ONE + zz + zz * zz)).norm());
        kerr = kerr.max((poly2::kernel(&f, x, y) - zz.powu(3) * (ONE + ww)).norm());
    }
    let q = poly(1, 1, &[(0, 0, 4.0), (1, 0, -1.0), (0, 1, -1.0)]);
    let cert = soscert::sos_certificate(&q).unwrap();
    let appendix = matches!(cert.construction, Construction::Appendix { .. });
    let rep = soscert::verify_certificate(&q, &cert, 64);
    let resid = rep.value("identity residual (grid)").unwrap();
    let gw = soscert::gw_invertibility(&cert, 64);
    let gw_min = gw.checks.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let secs = start.elapsed().as_secs_f64();
    let ok = kerr <= 1e-9 && appendix && resid <= 1e-7 && gw.passed() && gw_min > 1e-6 && secs < 10.0;
    (ok, format!("kernel error {kerr:.2e} (≤ 1e-9), 4-z-w residual {resid:.2e} (≤ 1e-7), GW min {gw_min:.3} (> 1e-6), {secs:.2}s"))
}

fn criterion_4() -> Outcome {
    let q = poly(1, 1, &[(0, 0, 2.0), (1, 0, -1.0), (0, 1, -1.0)]);
    let cert = soscert::sos_certificate(&q).unwrap();
    let dilation = matches!(cert.construction, Construction::Dilation { .. });
    let mut kerr = 0.0f64;
    for (x, y) in kernel_pairs(4, 200) {
        let ka = 2.0 * (ONE - x.1) * (ONE - y.1).conj();
        let kb = 2.0 * (ONE - x.0) * (ONE - y.0).conj();
        kerr = kerr.max((cert.kernel_first(x, y) - ka).norm());
        kerr = kerr.max((cert.kernel_second(x, y) - kb).norm());
    }
    let resid = soscert::verify_certificate(&q, &cert, 64).value("identity residual (grid)").unwrap();
    let ok = dilation && kerr <= 1e-5 && resid <= 1e-6;
    (ok, format!("dilation route {dilation}, kernel error {kerr:.2e} (≤ 1e-5), grid residual {resid:.2e} (≤ 1e-6)"))
}

fn criterion_5() -> Outcome {
    let q = one_minus_z3w2_i();
    let cert = soscert::sym_sos_certificate(&q, 1.0, 1.0).unwrap();
    let mut kerr = 0.0f64;
    let mut ierr = 0.0f64;
    for (x, y) in kernel_pairs(5, 200) {
        let zz = x.0 * y.0.conj();
        let ww = x.1 * y.1.conj();
        let ka = 5.0 * (ONE + zz + zz * zz);
        let kb = 5.0 * zz.powu(3) * (ONE + ww);
        kerr = kerr.max((cert.kernel_first(x, y) - ka).norm());
        kerr = kerr.max((cert.kernel_second(x, y) - kb).norm());
        let (z, w) = x;
        let (r2, s2) = (z.norm_sqr(), w.norm_sqr());
        let lhs = 5.0 * (1.0 - r2.powi(3) * s2 * s2);
        let rhs = (1.0 - r2) * cert.kernel_first(x, x).re + (1.0 - s2) * cert.kernel_second(x, x).re;
        ierr = ierr.max((lhs - rhs).abs());
    }
    let ok = kerr <= 1e-8 && ierr <= 1e-8;
    (ok, format!("kernel error {kerr:.2e} (≤ 1e-8), identity error {ierr:.2e}"))
}

fn representation_summary(p: &BivariatePolynomial) -> (bool, String) {
    let out = match dvrep::represent(p, 1.0, 1.0, 7, Some(50)) {
        Ok(o) => o,
        Err(e) => return (false, format!("error: {e}")),
    };
    let r = dvrep::verify_representation(p, &out.cert, &out.rep, &out.sample, 64);
    let v = |n: &str| r.value(n).unwrap_or(f64::NAN);
    let ok = r.passed()
        && out.sample.len() >= 50
        && v("gram equality") <= 1e-8
        && v("unitarity") <= 1e-10
        && v("spectral radius of D") < 1.0
        && v("determinant vs p") <= 1e-6
        && v("boundary unitarity") <= 1e-8
        && v("eigen relation") <= 1e-7;
    let s = format!(
        "gram {:.1e}, unitarity {:.1e}, ρ(D) {:.3}, det {:.1e}, boundary {:.1e}, eigen {:.1e}",
        v("gram equality"),
        v("unitarity"),
        v("spectral radius of D"),
        v("determinant vs p"),
        v("boundary unitarity"),
        v("eigen relation")
    );
    (ok, s)
}

fn criterion_6() -> Outcome {
    let (ok1, s1) = representation_summary(&z3_w2());
    let (ok2, s2) = representation_summary(&w3_z2());
    let block = dvrep::blaschke_realization(&[ZERO; 3], 2).unwrap();
    let det = dvrep::det_representation(&block);
    let exact = det.max_coeff_diff(&z3_w2().scaled(-ONE));
    let ok = ok1 && ok2 && exact <= 1e-15;
    (ok, format!("z^3-w^2: {s1}; w^3-z^2: {s2}; block example det error {exact:.1e}"))
}

fn criterion_7() -> Outcome {
    let corpus = [
        ("z^3 - w^2", z3_w2()),
        ("w^3 - z^2", w3_z2()),
        ("w^3 - z^3", poly(3, 3, &[(0, 3, 1.0), (3, 0, -1.0)])),
        ("w^2 - z(z-1/2)/(1-z/2)", dvrep::blaschke_polynomial(&[c64::new(0.5, 0.0), ZERO], 2)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, p) in &corpus {
        match dvrep::dv_certificate(p, 1.0, 1.0) {
            Ok(cert) => {
                let r = dvrep::qmatrix_check(&cert, 64);
                let v = r.value("Q(z) min singular value").unwrap_or(f64::NAN);
                ok &= cert.smooth_on_torus && r.passed() && v > 1e-8;
                parts.push(format!("{name} {v:.2e}"));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{name} error: {e}"));
            }
        }
    }
    (ok, format!("relative σ_min of Q(z): {} (> 1e-8)", parts.join(", ")))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let p = z3_w2();
    let out = dvrep::represent(&p, 1.0, 1.0, 7, None).unwrap();
    let sample = dvrep::sample_variety(&p, 50, 8).unwrap();
    let fs = [
        ("w", poly(0, 1, &[(0, 1, 1.0)])),
        ("zw", poly(1, 1, &[(1, 1, 1.0)])),
        ("w^2", poly(0, 2, &[(0, 2, 1.0)])),
        ("z+w", poly(1, 1, &[(1, 0, 1.0), (0, 1, 1.0)])),
    ];
    let mut ok = true;
    let (mut resid, mut excess, mut cerr) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    for (_, f) in &fs {
        let op = ExtensionOperator::from_certificate(out.rep.clone(), &out.cert, f.clone()).unwrap();
        let b = extend::extension_bound(&op, 64).unwrap();
        let r = extend::verify_extension(&op, &sample, 64);
        ok &= r.passed();
        resid = resid.max(r.value("on-variety residual").unwrap());
        excess = excess.max(b.sup_f_on_bidisk - 2f64.sqrt() * b.sup_f_on_v);
        cerr = cerr.max((b.c - 2f64.sqrt()).abs());
    }
    ok &= resid <= 1e-7 && excess <= 1e-6 && cerr <= 1e-6;
    let w3z3 = poly(3, 3, &[(0, 3, 1.0), (3, 0, -1.0)]);
    let out3 = dvrep::represent(&w3z3, 1.0, 1.0, 7, None).unwrap();
    let op3 = ExtensionOperator::from_certificate(out3.rep, &out3.cert, poly(1, 1, &[(1, 1, 1.0)])).unwrap();
    let c3 = extend::extension_bound(&op3, 64).unwrap().c;
    let fam = ExtensionOperator::blaschke(&[c64::new(0.5, 0.0), ZERO], 3, poly(1, 1, &[(1, 1, 1.0)])).unwrap();
    let cf = extend::extension_bound(&fam, 64).unwrap().c;
    let secs = start.elapsed().as_secs_f64();
    ok &= (c3 - 3f64.sqrt()).abs() <= 1e-6 && (cf - 3f64.sqrt()).abs() <= 1e-6 && secs < 30.0;
    (
        ok,
        format!(
            "residual {resid:.1e} (≤ 1e-7), max|F| − √2 sup|f| = {excess:.2e} (≤ 1e-6), |C − √2| {cerr:.1e}, C(w^3 - z^3) = {c3:.9}, C(w^3 - b) = {cf:.9}, {secs:.2}s"
        ),
    )
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["dvkit"];
    full.extend_from_slice(args);
    let code = cli::main_with_args(full, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned())
}

fn write_poly(dir: &Path, name: &str, p: &BivariatePolynomial) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(p).unwrap()).unwrap();
    path.to_string_lossy().into_owned()
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let q = poly(1, 1, &[(0, 0, 4.0), (1, 0, -1.0), (0, 1, -1.0)]);
    let qpath = write_poly(d, "q.json", &q);
    let cert_path = d.join("cert.json").to_string_lossy().into_owned();
    let (c0, _) = run_cli(&["sos", &qpath, "-o", &cert_path]);
    let mut cert: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    cert["vec_first"][0]["coeffs"][0][0][0] = serde_json::json!(cert["vec_first"][0]["coeffs"][0][0][0].as_f64().unwrap() + 1e-3);
    let bad_cert = d.join("bad_cert.json");
    std::fs::write(&bad_cert, cert.to_string()).unwrap();
    let (c1, _) = run_cli(&["verify", &bad_cert.to_string_lossy(), &qpath]);

    let p = z3_w2();
    let ppath = write_poly(d, "p.json", &p);
    let rep_path = d.join("rep.json").to_string_lossy().into_owned();
    let (c2, _) = run_cli(&["represent", &ppath, "--seed", "7", "-o", &rep_path]);
    let mut rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep_path).unwrap()).unwrap();
    rep["U"][1][2][0] = serde_json::json!(rep["U"][1][2][0].as_f64().unwrap() + 1e-3);
    let bad_rep = d.join("bad_rep.json");
    std::fs::write(&bad_rep, rep.to_string()).unwrap();
    let (c3, text) = run_cli(&["verify", &bad_rep.to_string_lossy(), &ppath]);
    let report: serde_json::Value = serde_json::from_str(&text).unwrap();
    let unitarity = report["report"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "unitarity")
        .and_then(|c| c["value"].as_f64())
        .unwrap_or(f64::NAN);

    let sing = poly(2, 2, &[(0, 0, 1.0), (1, 1, -2.0), (2, 2, 1.0)]);
    let spath = write_poly(d, "sing.json", &sing);
    let (c4, _) = run_cli(&["represent", &spath]);
    let smooth = classify::torus_singularities(&sing, 64, 1e-9).smooth_on_torus;

    let ok = c0 == 0 && c1 == 2 && c2 == 0 && c3 == 2 && unitarity > 5e-4 && unitarity < 5e-3 && c4 == 2 && !smooth;
    (
        ok,
        format!(
            "corrupted certificate exit {c1}, corrupted U exit {c3} (unitarity {unitarity:.2e}), (zw-1)^2 represent exit {c4}, torus singular {}",
            !smooth
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 reflection algebra", criterion_1),
        ("2 classification", criterion_2),
        ("3 moment construction", criterion_3),
        ("4 dilation certificate", criterion_4),
        ("5 symmetric certificate", criterion_5),
        ("6 representation", criterion_6),
        ("7 refined representation", criterion_7),
        ("8 extension", criterion_8),
        ("9 negative controls", criterion_9),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!("criterion {name}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
