//! Command-line front end.
//!
//! Every command writes one JSON document tagged `"schema": "dvkit/1"`.
//! Exit codes: 0 when every check passed, 2 when a check failed or the
//! analysis rejected its input, 1 on usage and parse errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as c64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::classify::{self, ZeroLabel};
use crate::dvrep::{self, DvCertificate, UnitaryRealization};
use crate::error::DvError;
use crate::extend::{self, ExtensionOperator};
use crate::linalg::{self, CMat, ZERO};
use crate::poly2::BivariatePolynomial;
use crate::report::VerificationReport;
use crate::soscert::{self, CertificateKind, Construction, SosCertificate};

pub const SCHEMA: &str = "dvkit/1";
/// Variety samples used by the DV identity and extension checks.
const CHECK_SAMPLES: usize = 50;

#[derive(Parser, Debug)]
#[command(name = "dvkit", version, about = "Zero sets, certificates and representations of bivariate polynomials on the bidisk")]
pub struct Cli {
    /// Emit JSON (the only output format; kept for scripts that pass it).
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Grid resolution of sweeps and checks (at least 16).
    #[arg(long = "grid", default_value_t = 64)]
    pub grid: usize,
    /// Write the report here instead of stdout.
    #[arg(short = 'o', long = "output")]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Label the zero set of a polynomial.
    Classify {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Reflection, symmetry analysis and derived polynomials.
    Reflect {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Sums-of-squares certificate; symmetric when weights are given.
    Sos {
        input: PathBuf,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Unitary realization of a distinguished variety.
    Represent {
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Initial number of variety samples (default 3(n+m)).
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Extend a polynomial from a represented variety to the bidisk.
    Extend {
        rep: PathBuf,
        f: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Re-check a certificate or a realization against a polynomial.
    Verify {
        cert: PathBuf,
        poly: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in corpus and print a pass/fail matrix.
    Demo {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify { .. } => "classify",
            Command::Reflect { .. } => "reflect",
            Command::Sos { .. } => "sos",
            Command::Represent { .. } => "represent",
            Command::Extend { .. } => "extend",
            Command::Verify { .. } => "verify",
            Command::Demo { .. } => "demo",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Classify { common, .. }
            | Command::Reflect { common, .. }
            | Command::Sos { common, .. }
            | Command::Represent { common, .. }
            | Command::Extend { common, .. }
            | Command::Verify { common, .. }
            | Command::Demo { common } => common,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable files, malformed JSON.
    Usage(String),
    /// The analysis could not run on the given input.
    Analysis(DvError),
}

impl From<DvError> for CliError {
    fn from(e: DvError) -> Self {
        CliError::Analysis(e)
    }
}

/// A command's JSON payload and whether all of its checks passed.
pub struct Outcome {
    pub value: Value,
    pub passed: bool,
}

/// Realization file written by `represent` and read by `extend` and
/// `verify`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepFile {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "U", with = "linalg::serde_rows")]
    pub u: CMat,
    pub cert: DvCertificate,
    #[serde(default)]
    pub seed: u64,
}

impl RepFile {
    fn realization(&self) -> Result<UnitaryRealization, CliError> {
        let d = self.m + self.n;
        if self.u.nrows() != d || self.u.ncols() != d {
            return Err(CliError::Usage(format!("field `U`: expected a {d}×{d} matrix")));
        }
        if self.cert.degree() != (self.n, self.m) {
            return Err(CliError::Usage(format!(
                "field `cert`: degree {:?} does not match (n, m) = ({}, {})",
                self.cert.degree(),
                self.n,
                self.m
            )));
        }
        Ok(UnitaryRealization {
            m: self.m,
            n: self.n,
            u: self.u.clone(),
        })
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

fn max_value(r: &VerificationReport, names: &[&str]) -> f64 {
    names.iter().filter_map(|n| r.value(n)).fold(0.0, |a, b| if b.is_nan() { b } else { a.max(b) })
}

fn check_config(cmd: &Command) -> Result<(), CliError> {
    let c = cmd.common();
    if c.grid < 16 {
        return Err(CliError::Usage(format!("--grid must be at least 16, got {}", c.grid)));
    }
    if let Command::Classify { tol, .. } | Command::Reflect { tol, .. } = cmd {
        if !(*tol > 0.0 && *tol <= 1e-2) {
            return Err(CliError::Usage(format!("--tol must lie in (0, 1e-2], got {tol}")));
        }
    }
    let weights = match cmd {
        Command::Sos { a: Some(a), b: Some(b), .. } => Some((*a, *b)),
        Command::Sos { a: Some(a), b: None, .. } => Some((*a, 1.0)),
        Command::Sos { a: None, b: Some(b), .. } => Some((1.0, *b)),
        Command::Represent { a, b, .. } => Some((*a, *b)),
        _ => None,
    };
    if let Some((a, b)) = weights {
        soscert::check_weights(a, b).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

/// Runs a parsed command.
pub fn run(cmd: &Command) -> Result<Outcome, CliError> {
    check_config(cmd)?;
    let grid = cmd.common().grid;
    match cmd {
        Command::Classify { input, tol, .. } => {
            let p: BivariatePolynomial = read_json(input)?;
            let cls = classify::classify_zero_set(&p, grid, *tol);
            Ok(Outcome {
                value: to_value(&cls),
                passed: true,
            })
        }
        Command::Reflect { input, tol, .. } => reflect(&read_json(input)?, *tol),
        Command::Sos { input, a, b, .. } => {
            let p: BivariatePolynomial = read_json(input)?;
            let cert = match (a, b) {
                (None, None) => soscert::sos_certificate(&p)?,
                _ => soscert::sym_sos_certificate(&p, a.unwrap_or(1.0), b.unwrap_or(1.0))?,
            };
            Ok(certificate_outcome(&p, &cert, grid))
        }
        Command::Represent {
            input,
            a,
            b,
            seed,
            samples,
            ..
        } => {
            let p: BivariatePolynomial = read_json(input)?;
            let out = dvrep::represent(&p, *a, *b, *seed, *samples)?;
            let mut report = dvrep::verify_representation(&p, &out.cert, &out.rep, &out.sample, grid);
            report.extend(dvrep::verify_dv_certificate(&p, &out.cert.to_sos(), CHECK_SAMPLES, *seed));
            let file = RepFile {
                m: out.rep.m,
                n: out.rep.n,
                u: out.rep.u.clone(),
                cert: out.cert,
                seed: *seed,
            };
            let mut v = object(to_value(&file));
            v.insert("rank".into(), json!(out.rank));
            v.insert("samples".into(), json!(out.sample.len()));
            v.insert("report".into(), to_value(&report));
            Ok(Outcome {
                value: Value::Object(v),
                passed: report.passed(),
            })
        }
        Command::Extend { rep, f, seed, .. } => {
            let file: RepFile = read_json(rep)?;
            let f: BivariatePolynomial = read_json(f)?;
            extension(&file, f, *seed, grid)
        }
        Command::Verify { cert, poly, seed, .. } => {
            let p: BivariatePolynomial = read_json(poly)?;
            let raw: Value = read_json(cert)?;
            if raw.get("U").is_some() {
                let file: RepFile = serde_json::from_value(raw).map_err(|e| CliError::Usage(format!("{}: {e}", cert.display())))?;
                let rep = file.realization()?;
                let sample = dvrep::sample_variety(&p, CHECK_SAMPLES, *seed)?;
                let mut report = dvrep::verify_representation(&p, &file.cert, &rep, &sample, grid);
                report.extend(dvrep::verify_dv_certificate(&p, &file.cert.to_sos(), CHECK_SAMPLES, *seed));
                Ok(Outcome {
                    passed: report.passed(),
                    value: json!({ "report": report }),
                })
            } else {
                let c: SosCertificate =
                    serde_json::from_value(raw).map_err(|e| CliError::Usage(format!("{}: {e}", cert.display())))?;
                Ok(certificate_outcome(&p, &c, grid))
            }
        }
        Command::Demo { .. } => Ok(demo(grid)),
    }
}

fn reflect(p: &BivariatePolynomial, tol: f64) -> Result<Outcome, CliError> {
    let refl = p.reflected();
    let mut report = VerificationReport::new();
    let back = refl.reflected().max_coeff_diff(p) / p.scale().max(f64::MIN_POSITIVE);
    report.at_most("reflection involution", back, 1e-12);
    let v = json!({
        "polynomial": p,
        "reflection": refl,
        "symmetry": p.symmetry_analysis(tol),
        "symmetrized": p.symmetrize(tol).ok(),
        "swap_transform": p.swap_transform().ok(),
        "derived_dv_poly": p.derived_dv_poly(),
        "derived_symmetric_poly": p.derived_symmetric_poly(),
        "report": report,
    });
    Ok(Outcome {
        passed: report.passed(),
        value: v,
    })
}

fn certificate_outcome(p: &BivariatePolynomial, cert: &SosCertificate, grid: usize) -> Outcome {
    let mut report = soscert::verify_certificate(p, cert, grid);
    if cert.kind == CertificateKind::ColeWermer {
        report.extend(soscert::gw_invertibility(cert, grid));
    }
    let residual = max_value(
        &report,
        &["identity residual (grid)", "identity residual (random)", "polarized residual", "DV identity on variety"],
    );
    let mut v = object(to_value(cert));
    v.insert("residual".into(), json!(residual));
    v.insert("report".into(), to_value(&report));
    Outcome {
        value: Value::Object(v),
        passed: report.passed(),
    }
}

fn extension(file: &RepFile, f: BivariatePolynomial, seed: u64, grid: usize) -> Result<Outcome, CliError> {
    let rep = file.realization()?;
    let cert = &file.cert;
    let op = ExtensionOperator::from_certificate(rep, cert, f)?;
    let mut bound = extend::extension_bound(&op, grid)?;
    let (a, b) = cert.weights;
    let mut notes = Vec::new();
    match extend::swapped_constant(&cert.p, a, b, seed, grid) {
        Ok(c) => bound.c_swapped = Some(c),
        Err(e) => notes.push(format!("swapped pipeline: {e}")),
    }
    let sample = dvrep::sample_variety(&cert.p, CHECK_SAMPLES, seed)?;
    let mut report = VerificationReport::new();
    extend::verify_with_bound(&op, &sample, &bound, &mut report);
    let mut v = object(to_value(&bound));
    v.insert("C_best".into(), json!(bound.best_c()));
    v.insert("on_variety_residual".into(), json!(report.value("on-variety residual")));
    v.insert(
        "ratio".into(),
        json!(if bound.sup_f_on_v > 0.0 { Some(bound.sup_f_on_bidisk / bound.sup_f_on_v) } else { None }),
    );
    v.insert("notes".into(), json!(notes));
    v.insert("report".into(), to_value(&report));
    Ok(Outcome {
        value: Value::Object(v),
        passed: report.passed(),
    })
}

fn poly(n: usize, m: usize, terms: &[(usize, usize, f64)]) -> BivariatePolynomial {
    BivariatePolynomial::from_real_terms(n, m, terms).expect("corpus terms fit their degree")
}

fn label_check(r: &mut VerificationReport, name: &str, p: &BivariatePolynomial, want: ZeroLabel, grid: usize) {
    let cls = classify::classify_zero_set(p, grid, 1e-9);
    r.at_most(name, if cls.label == want { 0.0 } else { 1.0 }, 0.0)
        .with_note(&format!("{:?}", cls.label));
}

fn constant_check(r: &mut VerificationReport, name: &str, c: f64, want: f64) {
    r.at_most(name, (c - want).abs(), 1e-6);
}

fn dv_case(p: &BivariatePolynomial, grid: usize, extension_c: Option<f64>) -> VerificationReport {
    let mut r = VerificationReport::new();
    label_check(&mut r, "label", p, ZeroLabel::DVDefining, grid.min(32));
    let out = match dvrep::represent(p, 1.0, 1.0, 7, None) {
        Ok(o) => o,
        Err(e) => {
            r.error("representation", &e.to_string());
            return r;
        }
    };
    r.extend(dvrep::verify_representation(p, &out.cert, &out.rep, &out.sample, grid));
    if let Some(want) = extension_c {
        let zw = poly(1, 1, &[(1, 1, 1.0)]);
        match ExtensionOperator::from_certificate(out.rep, &out.cert, zw) {
            Ok(op) => match extend::extension_bound(&op, grid) {
                Ok(b) => {
                    constant_check(&mut r, "extension constant", b.c, want);
                    extend::verify_with_bound(&op, &out.sample, &b, &mut r);
                }
                Err(e) => {
                    r.error("extension constant", &e.to_string());
                }
            },
            Err(e) => {
                r.error("extension constant", &e.to_string());
            }
        }
    }
    r
}

fn blaschke_case(zeros: &[c64], m: usize, grid: usize) -> VerificationReport {
    let mut r = VerificationReport::new();
    let zw = poly(1, 1, &[(1, 1, 1.0)]);
    let op = match ExtensionOperator::blaschke(zeros, m, zw) {
        Ok(op) => op,
        Err(e) => {
            r.error("realization", &e.to_string());
            return r;
        }
    };
    label_check(&mut r, "label", &op.p, ZeroLabel::DVDefining, grid.min(32));
    r.at_most("unitarity", op.rep.unitarity_residual(), 1e-10);
    r.at_most(
        "determinant vs p",
        dvrep::proportionality_residual(&dvrep::det_representation(&op.rep), &op.p),
        1e-12,
    );
    r.extend(dvrep::phi_boundary_checks(&op.rep));
    match (extend::extension_bound(&op, grid), dvrep::sample_variety(&op.p, CHECK_SAMPLES, 7)) {
        (Ok(b), Ok(sample)) => {
            constant_check(&mut r, "extension constant", b.c, (m as f64).sqrt());
            extend::verify_with_bound(&op, &sample, &b, &mut r);
        }
        (Err(e), _) | (_, Err(e)) => {
            r.error("extension constant", &e.to_string());
        }
    }
    r
}

fn sos_case(p: &BivariatePolynomial, grid: usize, want_dilation: bool) -> VerificationReport {
    let mut r = VerificationReport::new();
    match soscert::sos_certificate(p) {
        Ok(cert) => {
            let dilation = matches!(cert.construction, Construction::Dilation { .. });
            r.at_most("construction", if dilation == want_dilation { 0.0 } else { 1.0 }, 0.0);
            r.extend(soscert::verify_certificate(p, &cert, grid));
            r.extend(soscert::gw_invertibility(&cert, grid));
        }
        Err(e) => {
            r.error("certificate", &e.to_string());
        }
    }
    r
}

fn demo(grid: usize) -> Outcome {
    let z3_w2 = poly(3, 2, &[(3, 0, 1.0), (0, 2, -1.0)]);
    let w3_z2 = poly(2, 3, &[(0, 3, 1.0), (2, 0, -1.0)]);
    let half = c64::new(0.5, 0.0);
    let mut cases: Vec<(String, VerificationReport)> = vec![
        ("z^3 - w^2".into(), dv_case(&z3_w2, grid, Some(2f64.sqrt()))),
        ("w^3 - z^2".into(), dv_case(&w3_z2, grid, None)),
    ];
    {
        let mut r = VerificationReport::new();
        let d1 = z3_w2.derived_dv_poly();
        label_check(&mut r, "derived once", &d1, ZeroLabel::DVDefining, 32);
        label_check(&mut r, "derived twice", &d1.derived_dv_poly(), ZeroLabel::DVDefining, 32);
        cases.push(("derived polynomial of z^3 - w^2".into(), r));
    }
    for (bname, zeros) in [("z^3", vec![ZERO; 3]), ("z(z-1/2)/(1-z/2)", vec![half, ZERO])] {
        for m in [2, 3] {
            cases.push((format!("w^{m} - {bname}"), blaschke_case(&zeros, m, grid)));
        }
    }
    cases.push(("2 - z - w".into(), sos_case(&poly(1, 1, &[(0, 0, 2.0), (1, 0, -1.0), (0, 1, -1.0)]), grid, true)));
    cases.push(("4 - z - w".into(), sos_case(&poly(1, 1, &[(0, 0, 4.0), (1, 0, -1.0), (0, 1, -1.0)]), grid, false)));
    {
        let mut r = VerificationReport::new();
        let p = poly(2, 2, &[(0, 0, 1.0), (1, 1, -2.0), (2, 2, 1.0)]);
        let rejected = dvrep::dv_certificate(&p, 1.0, 1.0).is_err();
        r.at_most("representation rejected", if rejected { 0.0 } else { 1.0 }, 0.0);
        let smooth = classify::torus_singularities(&p, grid, 1e-9).smooth_on_torus;
        r.at_most("torus singularity found", if smooth { 1.0 } else { 0.0 }, 0.0);
        cases.push(("(zw - 1)^2 (negative control)".into(), r));
    }
    let passed = cases.iter().all(|(_, r)| r.passed());
    let matrix: Vec<Value> = cases
        .iter()
        .map(|(name, r)| json!({ "case": name, "passed": r.passed(), "checks": r.checks }))
        .collect();
    Outcome {
        value: json!({ "matrix": matrix }),
        passed,
    }
}

/// Text lines of the demo pass/fail matrix.
fn demo_table(v: &Value) -> String {
    let mut s = String::new();
    if let Some(rows) = v.get("matrix").and_then(Value::as_array) {
        for row in rows {
            let ok = row.get("passed").and_then(Value::as_bool).unwrap_or(false);
            let name = row.get("case").and_then(Value::as_str).unwrap_or("?");
            s.push_str(&format!("{:<4}  {name}\n", if ok { "pass" } else { "FAIL" }));
        }
    }
    s
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DVKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("DVKIT_THREADS must be a positive integer, got {raw:?}")))?;
    // The global pool can only be set once per process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn envelope(command: &str, status: &str, payload: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("status".into(), json!(status));
    for (k, v) in object(payload) {
        m.insert(k, v);
    }
    Value::Object(m)
}

/// Parses `args`, runs the command and writes its report. Returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    if let Err(CliError::Usage(msg)) = configure_threads() {
        let _ = writeln!(stderr, "error: {msg}");
        return 1;
    }
    let name = cli.command.name();
    let (doc, code) = match run(&cli.command) {
        Ok(out) => {
            if let Command::Demo { .. } = cli.command {
                let _ = write!(stderr, "{}", demo_table(&out.value));
            }
            let status = if out.passed { "pass" } else { "fail" };
            (envelope(name, status, out.value), if out.passed { 0 } else { 2 })
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return 1;
        }
        Err(CliError::Analysis(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            (envelope(name, "error", json!({ "error": e.to_string() })), 2)
        }
    };
    let text = serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n";
    match &cli.command.common().output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                let _ = writeln!(stderr, "error: {}: {e}", path.display());
                return 1;
            }
        }
        None => {
            let _ = stdout.write_all(text.as_bytes());
        }
    }
    code
}
