//! Determinantal representations of distinguished varieties.
//!
//! For a distinguished variety `V = Z(p)` with `p` of degree `(n, m)`, a
//! pair of vector polynomials `P⃗` (n components) and `Q⃗` (m components)
//! satisfies, for `(z,w), (Z,W) ∈ V`,
//!
//! ```text
//! (1 − zZ̄)⟨P⃗(z,w), P⃗(Z,W)⟩ = (1 − wW̄)⟨Q⃗(z,w), Q⃗(Z,W)⟩.
//! ```
//!
//! The map `(Q⃗; zP⃗) ↦ (wQ⃗; P⃗)` is therefore isometric on sample points.
//! Any unitary extension `U = [A B; C D]` gives the matrix inner function
//! `Φ(z) = A + zB(I − zD)⁻¹C` with `Φ(z)Q⃗(z,w) = wQ⃗(z,w)` on `V`, and `p`
//! is a multiple of `det(wI − Φ(z))·det(I − zD)`.

use std::f64::consts::TAU;

use faer::Mat;
use num_complex::Complex64 as c64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{self, ZeroLabel};
use crate::error::{DvError, Result};
use crate::grid;
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::poly2::{self, BivariatePolynomial, VectorPolynomial};
use crate::report::VerificationReport;
use crate::soscert::{
    self, matrix_form_first, matrix_form_second, CertificateKind, Construction, MatrixPolynomial, SosCertificate,
    SosOptions,
};

/// Resolution of the classification and smoothness pre-checks.
const PRECHECK_GRID: usize = 32;
const PRECHECK_TOL: f64 = 1e-9;
/// Radii of the z-rings swept by [`sample_variety`].
pub const SAMPLE_RADII: [f64; 4] = [0.3, 0.5, 0.7, 0.85];
/// Relative singular-value cutoff for the numerical rank of `X`.
pub const RANK_TOL: f64 = 1e-8;
/// Relative tolerance of the Gram equality `XᴴX = YᴴY`.
pub const GRAM_TOL: f64 = 1e-8;
/// Margin below 1 required of the spectral radius of `D`.
pub const D_MARGIN: f64 = 1e-8;

/// Certificate `(P⃗, Q⃗)` for a distinguished variety.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DvCertificate {
    /// Defining polynomial after T²-symmetrization, degree `(n, m)`.
    pub p: BivariatePolynomial,
    pub weights: (f64, f64),
    /// n components of degree ≤ (n−1, m).
    #[serde(rename = "P")]
    pub p_vec: VectorPolynomial,
    /// m components of degree ≤ (n, m−1).
    #[serde(rename = "Q")]
    pub q_vec: VectorPolynomial,
    /// `Q(z)` with `Q⃗(z,w) = Q(z)(1, w, …, w^{m−1})ᵗ`.
    #[serde(rename = "Qmatrix")]
    pub q_matrix: MatrixPolynomial,
    pub smooth_on_torus: bool,
}

impl DvCertificate {
    pub fn degree(&self) -> (usize, usize) {
        self.p.degree()
    }

    /// The same data as a certificate of kind [`CertificateKind::DV`].
    pub fn to_sos(&self) -> SosCertificate {
        let (n, m) = self.degree();
        SosCertificate {
            kind: CertificateKind::DV,
            weights: Some(self.weights),
            degree: (n, m),
            vec_first: self.p_vec.clone(),
            vec_second: self.q_vec.clone(),
            matrix_first: Some(matrix_form_first(&self.p_vec, n)),
            matrix_second: Some(self.q_matrix.clone()),
            construction: Construction::Transformed,
        }
    }

    /// Columns `(Q⃗; zP⃗)` and `(wQ⃗; P⃗)` over the sample points.
    pub fn isometry_data(&self, sample: &VarietySample) -> (CMat, CMat) {
        let (n, m) = self.degree();
        let pts = &sample.points;
        let mut x = Mat::zeros(m + n, pts.len());
        let mut y = Mat::zeros(m + n, pts.len());
        for (k, &(z, w)) in pts.iter().enumerate() {
            let q = poly2::evaluate_vector(&self.q_vec, z, w);
            let p = poly2::evaluate_vector(&self.p_vec, z, w);
            for i in 0..m {
                x[(i, k)] = q[i];
                y[(i, k)] = w * q[i];
            }
            for i in 0..n {
                x[(m + i, k)] = z * p[i];
                y[(m + i, k)] = p[i];
            }
        }
        (x, y)
    }
}

/// DV certificate of `p` with weights `(a, b)`.
///
/// `p` is symmetrized, its z index reversed to `q = zⁿp(1/z, w)`, and the
/// symmetric certificate `(A⃗, B⃗)` of `q` is mapped back by
/// `P⃗ = z^{n−1}A⃗(1/z, w)`, `Q⃗ = zⁿB⃗(1/z, w)`.
pub fn dv_certificate(p: &BivariatePolynomial, a: f64, b: f64) -> Result<DvCertificate> {
    dv_certificate_with(p, a, b, &SosOptions::default())
}

pub fn dv_certificate_with(p: &BivariatePolynomial, a: f64, b: f64, opts: &SosOptions) -> Result<DvCertificate> {
    soscert::check_weights(a, b)?;
    let (n, m) = p.degree();
    if n == 0 || m == 0 {
        return Err(DvError::DegreeMismatch(format!("degree ({n}, {m}) has a zero entry")));
    }
    let cls = classify::classify_zero_set(p, PRECHECK_GRID, PRECHECK_TOL);
    if !cls.squarefree {
        return Err(DvError::NotSquarefree("repeated factor detected by resultants".into()));
    }
    if cls.label != ZeroLabel::DVDefining {
        return Err(DvError::NotDistinguished(format!("{:?}: {}", cls.label, cls.notes.join("; "))));
    }
    let ps = p.symmetrize(PRECHECK_TOL)?;
    let q = ps.swap_transform()?;
    let sym = soscert::sym_sos_certificate_with(&q, a, b, opts)?;
    let p_vec: VectorPolynomial = sym.vec_first.iter().map(|v| v.reverse_z(n - 1)).collect();
    let q_vec: VectorPolynomial = sym.vec_second.iter().map(|v| v.reverse_z(n)).collect();
    let q_matrix = matrix_form_second(&q_vec, m);
    let smooth = classify::torus_singularities(&ps, 4 * PRECHECK_GRID, PRECHECK_TOL).smooth_on_torus;
    let cert = DvCertificate {
        p: ps,
        weights: (a, b),
        p_vec,
        q_vec,
        q_matrix,
        smooth_on_torus: smooth,
    };
    if smooth {
        let (smin, scale) = qmatrix_min_singular(&cert.q_matrix, 64)?;
        if smin <= 1e-8 * scale {
            return Err(DvError::TheoremViolation(format!(
                "Q(z) nearly singular on the closed disk: σ_min = {smin:.3e}, scale {scale:.3e}"
            )));
        }
    }
    Ok(cert)
}

/// Minimum of `σ_min(Q(z))` over a closed-disk grid, and the coefficient
/// scale of `Q`.
pub fn qmatrix_min_singular(qm: &MatrixPolynomial, grid_n: usize) -> Result<(f64, f64)> {
    let pts = grid::closed_disk(grid_n);
    let mut smin = f64::INFINITY;
    for &z in &pts {
        smin = smin.min(linalg::min_singular_value(&qm.eval(z))?);
    }
    Ok((smin, qm.scale()))
}

/// Points of `V ∩ D²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarietySample {
    pub points: Vec<(c64, c64)>,
    /// `|p|` at each point.
    pub residuals: Vec<f64>,
}

impl VarietySample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples `V ∩ D²` over rings of z with seeded angular jitter, keeping
/// fiber roots inside the disk and polishing each by Newton's method in w.
///
/// Returns the first `target` points found. Fewer than `n + m` points is an
/// error since they cannot span the isometry's domain.
pub fn sample_variety(p: &BivariatePolynomial, target: usize, seed: u64) -> Result<VarietySample> {
    let (n, m) = p.degree();
    let scale = p.scale();
    let per_ring = target.div_ceil(SAMPLE_RADII.len() * m.max(1)) + 1;
    let mut rng = grid::rng(seed);
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    'rings: for &r in &SAMPLE_RADII {
        for k in 0..per_ring {
            let jitter: f64 = rng.random();
            let z = c64::from_polar(r, TAU * (k as f64 + 0.5 * jitter) / per_ring as f64);
            let f = p.fiber_in_w(z);
            let roots = match linalg::poly_roots(&f) {
                Ok(r) => r,
                Err(_) => continue,
            };
            for w0 in roots {
                if w0.norm() >= 1.0 {
                    continue;
                }
                let w = linalg::newton_polish(&f, w0, 8);
                let res = p.evaluate(z, w).norm();
                if w.norm() >= 1.0 || res > 1e-10 * scale {
                    continue;
                }
                points.push((z, w));
                residuals.push(res);
                if points.len() >= target {
                    break 'rings;
                }
            }
        }
    }
    if points.len() < n + m {
        return Err(DvError::InsufficientSpan(format!(
            "found {} variety points, need at least {}",
            points.len(),
            n + m
        )));
    }
    Ok(VarietySample { points, residuals })
}

/// Numerical rank of `X` for the given sample.
pub fn isometry_rank(cert: &DvCertificate, sample: &VarietySample) -> Result<usize> {
    let (x, _) = cert.isometry_data(sample);
    let s = linalg::singular_values(&x)?;
    let top = s.first().copied().unwrap_or(0.0);
    Ok(s.iter().filter(|&&v| v > RANK_TOL * top).count())
}

/// `max|XᴴX − YᴴY| / max|XᴴX|`.
pub fn gram_residual(x: &CMat, y: &CMat) -> f64 {
    let gx = x.adjoint() * x;
    let gy = y.adjoint() * y;
    linalg::max_abs_diff(&gx, &gy) / linalg::max_abs(&gx).max(f64::MIN_POSITIVE)
}

/// Block unitary `U = [A B; C D]` with `A` of size m×m and `D` of size n×n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryRealization {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "U", with = "linalg::serde_rows")]
    pub u: CMat,
}

impl UnitaryRealization {
    pub fn from_blocks(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> Result<Self> {
        let (m, n) = (a.nrows(), d.nrows());
        let ok = a.ncols() == m
            && b.nrows() == m
            && b.ncols() == n
            && c.nrows() == n
            && c.ncols() == m
            && d.ncols() == n;
        if !ok {
            return Err(DvError::Dimension("blocks do not form a square block matrix".into()));
        }
        let u = Mat::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - m)],
            (false, true) => c[(i - m, j)],
            (false, false) => d[(i - m, j - m)],
        });
        Ok(UnitaryRealization { m, n, u })
    }

    fn block(&self, r0: usize, rows: usize, c0: usize, cols: usize) -> CMat {
        Mat::from_fn(rows, cols, |i, j| self.u[(r0 + i, c0 + j)])
    }

    pub fn a(&self) -> CMat {
        self.block(0, self.m, 0, self.m)
    }

    pub fn b(&self) -> CMat {
        self.block(0, self.m, self.m, self.n)
    }

    pub fn c(&self) -> CMat {
        self.block(self.m, self.n, 0, self.m)
    }

    pub fn d(&self) -> CMat {
        self.block(self.m, self.n, self.m, self.n)
    }

    /// `max|UᴴU − I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let g = self.u.adjoint() * &self.u;
        linalg::max_abs_diff(&g, &linalg::identity(self.m + self.n))
    }

    pub fn d_spectral_radius(&self) -> Result<f64> {
        linalg::spectral_radius(&self.d())
    }
}

/// Unitary extension of the isometry `(Q⃗; zP⃗) ↦ (wQ⃗; P⃗)` read off the
/// sample.
///
/// The isometry on `range(X)` comes from a thin SVD of `X`; the unitary
/// completion maps an orthonormal basis of `range(X)^⊥` to one of
/// `range(Y)^⊥`, both from column-pivoted QR, so the result is a
/// deterministic function of the sample.
pub fn lurking_isometry(cert: &DvCertificate, sample: &VarietySample) -> Result<UnitaryRealization> {
    let (n, m) = cert.degree();
    let dim = m + n;
    let (x, y) = cert.isometry_data(sample);
    let gram = gram_residual(&x, &y);
    if gram.is_nan() || gram > GRAM_TOL {
        return Err(DvError::IsometryViolated(format!("relative Gram mismatch {gram:.3e}")));
    }
    let svd = linalg::thin_svd(&x)?;
    let top = svd.s.first().copied().unwrap_or(0.0);
    let r = svd.s.iter().filter(|&&v| v > RANK_TOL * top).count();
    if r == 0 {
        return Err(DvError::InsufficientSpan("X has rank 0".into()));
    }
    let ux = Mat::from_fn(dim, r, |i, j| svd.u[(i, j)]);
    let vr = Mat::from_fn(svd.v.nrows(), r, |i, j| svd.v[(i, j)] / svd.s[j]);
    let uy = linalg::polar_factor(&(&y * &vr))?;
    let cx = linalg::orthonormal_complement(&ux, dim)?;
    let cy = linalg::orthonormal_complement(&uy, dim)?;
    let mut u = &uy * ux.adjoint();
    if cx.ncols() > 0 {
        u += &cy * cx.adjoint();
    }
    let rep = UnitaryRealization { m, n, u };
    let rho = rep.d_spectral_radius()?;
    if rho >= 1.0 - D_MARGIN {
        return Err(DvError::UnimodularDEigenvalue(format!(
            "spectral radius of D is {rho:.12} (rank of X: {r} of {dim})"
        )));
    }
    Ok(rep)
}

/// `Φ(z) = A + zB(I − zD)⁻¹C`.
pub fn phi_evaluate(rep: &UnitaryRealization, z: c64) -> Result<CMat> {
    let a = rep.a();
    if rep.n == 0 {
        return Ok(a);
    }
    let lhs = linalg::identity(rep.n) - linalg::scaled(&rep.d(), z);
    let sol = linalg::solve(&lhs, &rep.c(), 1e-14)?;
    Ok(a + linalg::scaled(&(rep.b() * sol), z))
}

/// Expansion of `det(I − zD)·det(wI − Φ(z))`, which equals
/// `(−1)^{n+m} det[A − wI, zB; C, zD − I]`, at degree `(n, m)`.
///
/// The block determinant is a polynomial of degree ≤ (n, m). It is sampled
/// on the product of the (n+1)-th and (m+1)-th roots of unity and
/// recovered by the inverse discrete Fourier transform, which is exact for
/// polynomials of that degree.
pub fn det_representation(rep: &UnitaryRealization) -> BivariatePolynomial {
    let (m, n) = (rep.m, rep.n);
    let (a, b, c, d) = (rep.a(), rep.b(), rep.c(), rep.d());
    let zs = grid::circle(n + 1, 1.0);
    let ws = grid::circle(m + 1, 1.0);
    let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
    let mut vals = vec![vec![ZERO; m + 1]; n + 1];
    for (k, &z) in zs.iter().enumerate() {
        for (l, &w) in ws.iter().enumerate() {
            let mat = Mat::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
                (true, true) => a[(i, j)] - if i == j { w } else { ZERO },
                (true, false) => z * b[(i, j - m)],
                (false, true) => c[(i - m, j)],
                (false, false) => z * d[(i - m, j - m)] - if i == j { ONE } else { ZERO },
            });
            vals[k][l] = linalg::determinant(&mat) * sign;
        }
    }
    let norm = ((n + 1) * (m + 1)) as f64;
    BivariatePolynomial::from_fn(n, m, |i, j| {
        let mut acc = ZERO;
        for (k, z) in zs.iter().enumerate() {
            for (l, w) in ws.iter().enumerate() {
                acc += vals[k][l] * z.powu(i as u32).conj() * w.powu(j as u32).conj();
            }
        }
        acc / norm
    })
}

/// Relative coefficient distance between `det` and the best multiple
/// `λp`: `max|det − λp| / max|det|` with `λ` the least-squares factor.
pub fn proportionality_residual(det: &BivariatePolynomial, p: &BivariatePolynomial) -> f64 {
    let (n, m) = (det.degree().0.max(p.degree().0), det.degree().1.max(p.degree().1));
    let (dd, pp) = match (det.with_degree(n, m), p.with_degree(n, m)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return f64::INFINITY,
    };
    let num: c64 = dd.coefficients().iter().zip(pp.coefficients()).map(|(x, y)| x * y.conj()).sum();
    let den: f64 = pp.coefficients().iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 || dd.scale() == 0.0 {
        return f64::INFINITY;
    }
    dd.max_coeff_diff(&pp.scaled(num / den)) / dd.scale()
}

/// Realization `U` of the one-variable inner function
/// `b(z) = Π (z − a_k)/(1 − ā_k z)` as `b(z) = α + zβ(I − zΔ)⁻¹γ`,
/// cascading one 2×2 unitary per factor.
fn blaschke_colligation(zeros: &[c64]) -> Result<(c64, Vec<c64>, Vec<c64>, CMat)> {
    let mut alpha = ONE;
    let mut beta: Vec<c64> = Vec::new();
    let mut gamma: Vec<c64> = Vec::new();
    let mut delta: CMat = Mat::zeros(0, 0);
    for &a in zeros {
        if a.norm() >= 1.0 {
            return Err(DvError::InvalidArgument(format!("Blaschke zero {} is not in the disk", classify::fmt_c(a))));
        }
        let s = c64::new((1.0 - a.norm_sqr()).sqrt(), 0.0);
        // Factor colligation [−a, s; s, ā].
        let (a2, b2, g2, d2) = (-a, s, s, a.conj());
        let k = beta.len();
        let mut nd = Mat::zeros(k + 1, k + 1);
        for i in 0..k {
            for j in 0..k {
                nd[(i, j)] = delta[(i, j)];
            }
            nd[(k, i)] = g2 * beta[i];
        }
        nd[(k, k)] = d2;
        gamma.push(g2 * alpha);
        beta = beta.iter().map(|x| a2 * x).chain(std::iter::once(b2)).collect();
        alpha *= a2;
        delta = nd;
    }
    Ok((alpha, beta, gamma, delta))
}

/// `Φ(z)` for `V: wᵐ = b(z)` as in the companion form
/// `Φ = S + b(z)·e_{m−1}e_0ᵗ` with `S` the upward shift, realized from the
/// colligation of the Blaschke product with the given zeros.
pub fn blaschke_realization(zeros: &[c64], m: usize) -> Result<UnitaryRealization> {
    if m == 0 {
        return Err(DvError::InvalidArgument("m must be positive".into()));
    }
    let (alpha, beta, gamma, delta) = blaschke_colligation(zeros)?;
    let n = zeros.len();
    let a = Mat::from_fn(m, m, |i, j| {
        if j == i + 1 {
            ONE
        } else if i == m - 1 && j == 0 {
            alpha
        } else {
            ZERO
        }
    });
    let b = Mat::from_fn(m, n, |i, j| if i == m - 1 { beta[j] } else { ZERO });
    let c = Mat::from_fn(n, m, |i, j| if j == 0 { gamma[i] } else { ZERO });
    UnitaryRealization::from_blocks(&a, &b, &c, &delta)
}

/// `Π(1 − ā_k z)·wᵐ − Π(z − a_k)`, whose zero set is `wᵐ = b(z)`.
pub fn blaschke_polynomial(zeros: &[c64], m: usize) -> BivariatePolynomial {
    let n = zeros.len();
    let mut num = vec![ONE];
    let mut den = vec![ONE];
    for &a in zeros {
        num = mul_univariate(&num, &[-a, ONE]);
        den = mul_univariate(&den, &[ONE, -a.conj()]);
    }
    let mut p = BivariatePolynomial::zeros(n, m);
    for i in 0..=n {
        p.set_coeff(i, m, den[i]);
        p.set_coeff(i, 0, p.coeff(i, 0) - num[i]);
    }
    p
}

fn mul_univariate(a: &[c64], b: &[c64]) -> Vec<c64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// The certificate `Q⃗ = (1, w, …, w^{m−1})ᵗ` of the family `wᵐ = b(z)`,
/// with `Q(z) = I`. The companion `P⃗` is rational in general and is not
/// formed.
pub fn monomial_q(n: usize, m: usize) -> (VectorPolynomial, MatrixPolynomial) {
    let q_vec: VectorPolynomial = (0..m)
        .map(|j| BivariatePolynomial::from_terms(n, m.saturating_sub(1), &[(0, j, ONE)]).expect("in range"))
        .collect();
    let qm = matrix_form_second(&q_vec, m);
    (q_vec, qm)
}

/// Reports every claim about a realization: isometry on the sample,
/// unitarity, the spectrum of `D`, the determinant formula, the eigen
/// relation `ΦQ⃗ = wQ⃗`, inner boundary values and contractivity of `Φ`, and
/// invertibility of `Q(z)` on the closed disk when `p` is smooth on T².
pub fn verify_representation(
    p: &BivariatePolynomial,
    cert: &DvCertificate,
    rep: &UnitaryRealization,
    sample: &VarietySample,
    grid_n: usize,
) -> VerificationReport {
    let mut r = VerificationReport::new();
    let (n, m) = cert.degree();
    if (rep.n, rep.m) != (n, m) {
        r.error("block sizes", "realization block sizes differ from the certificate degree");
        return r;
    }
    let (x, y) = cert.isometry_data(sample);
    r.at_most("gram equality", gram_residual(&x, &y), GRAM_TOL);
    r.at_most("unitarity", rep.unitarity_residual(), 1e-10);
    match rep.d_spectral_radius() {
        Ok(rho) => r.at_most("spectral radius of D", rho, 1.0 - D_MARGIN),
        Err(e) => r.error("spectral radius of D", &e.to_string()),
    };
    let mut det_max = 0.0f64;
    let mut eig_max = 0.0f64;
    let mut failure = None;
    for &(z, w) in &sample.points {
        match phi_evaluate(rep, z) {
            Ok(phi) => {
                let shifted = Mat::from_fn(m, m, |i, j| if i == j { w } else { ZERO }) - &phi;
                det_max = det_max.max(linalg::determinant(&shifted).norm());
                let q = poly2::evaluate_vector(&cert.q_vec, z, w);
                let lhs = &phi * linalg::column(&q);
                let res: f64 = (0..m).map(|i| (lhs[(i, 0)] - w * q[i]).norm_sqr()).sum::<f64>().sqrt();
                eig_max = eig_max.max(res / linalg::vec_norm(&q).max(1.0));
            }
            Err(e) => failure = Some(e.to_string()),
        }
    }
    match failure {
        Some(e) => {
            r.error("det(wI − Φ(z)) on variety", &e);
            r.error("eigen relation", &e);
        }
        None => {
            r.at_most("det(wI − Φ(z)) on variety", det_max, 1e-7);
            r.at_most("eigen relation", eig_max, 1e-7);
        }
    }
    r.at_most("determinant vs p", proportionality_residual(&det_representation(rep), p), 1e-6);
    r.extend(phi_boundary_checks(rep));
    let comp = cert.p_vec.iter().chain(&cert.q_vec).map(|v| v.scale()).fold(f64::INFINITY, f64::min);
    let scale = cert.p_vec.iter().chain(&cert.q_vec).map(|v| v.scale()).fold(0.0, f64::max);
    r.above("nonzero components", comp / scale.max(f64::MIN_POSITIVE), 1e-10);
    r.extend(qmatrix_check(cert, grid_n));
    r
}

/// Inner boundary values on 128 angles and contractivity at 200 seeded
/// random points of the disk.
pub fn phi_boundary_checks(rep: &UnitaryRealization) -> VerificationReport {
    let mut r = VerificationReport::new();
    let id = linalg::identity(rep.m);
    let boundary: Result<f64> = grid::circle(128, 1.0).iter().try_fold(f64::NEG_INFINITY, |acc, &z| {
        let phi = phi_evaluate(rep, z)?;
        Ok(acc.max(linalg::max_abs_diff(&(phi.adjoint() * &phi), &id)))
    });
    match boundary {
        Ok(v) => r.at_most("boundary unitarity", v, 1e-8),
        Err(e) => r.error("boundary unitarity", &e.to_string()),
    };
    let mut rng = grid::rng(0xc0_47ac);
    let inside: Result<f64> = grid::random_disk(&mut rng, 200, 1.0).iter().try_fold(f64::NEG_INFINITY, |acc, &z| {
        Ok(acc.max(linalg::op_norm(&phi_evaluate(rep, z)?)? - 1.0))
    });
    match inside {
        Ok(v) => r.at_most("contractivity", v, 1e-8),
        Err(e) => r.error("contractivity", &e.to_string()),
    };
    r
}

/// `σ_min(Q(z))` over a closed-disk grid relative to the scale of `Q`;
/// skipped when `p` has singular points on T².
pub fn qmatrix_check(cert: &DvCertificate, grid_n: usize) -> VerificationReport {
    let mut r = VerificationReport::new();
    let name = "Q(z) min singular value";
    if !cert.smooth_on_torus {
        r.skip(name, "p is singular on T²; invertibility of Q(z) is not claimed");
        return r;
    }
    match qmatrix_min_singular(&cert.q_matrix, grid_n) {
        Ok((smin, scale)) => r.above(name, smin / scale.max(f64::MIN_POSITIVE), 1e-8),
        Err(e) => r.error(name, &e.to_string()),
    };
    r
}

/// Checks the polarized DV identity
/// `(1 − zZ̄)⟨P⃗(x),P⃗(y)⟩ = (1 − wW̄)⟨Q⃗(x),Q⃗(y)⟩` over all pairs of
/// `count` seeded variety samples, relative to `max|Q⃗|²`.
pub fn verify_dv_certificate(
    p: &BivariatePolynomial,
    cert: &SosCertificate,
    count: usize,
    seed: u64,
) -> VerificationReport {
    let mut r = VerificationReport::new();
    let name = "DV identity on variety";
    let (n, m) = cert.degree;
    if p.degree() != (n, m) || cert.vec_first.len() != n || cert.vec_second.len() != m {
        r.error(name, "certificate shape does not match the polynomial degree");
        return r;
    }
    let sample = match sample_variety(p, count, seed) {
        Ok(s) => s,
        Err(e) => {
            r.error(name, &e.to_string());
            return r;
        }
    };
    let pv: Vec<Vec<c64>> = sample.points.iter().map(|&(z, w)| poly2::evaluate_vector(&cert.vec_first, z, w)).collect();
    let qv: Vec<Vec<c64>> = sample.points.iter().map(|&(z, w)| poly2::evaluate_vector(&cert.vec_second, z, w)).collect();
    let scale = qv.iter().map(|q| q.iter().map(|x| x.norm_sqr()).sum::<f64>()).fold(0.0, f64::max).max(1.0);
    let mut worst = 0.0f64;
    for (s, &(z, w)) in sample.points.iter().enumerate() {
        for (t, &(zz, ww)) in sample.points.iter().enumerate() {
            let lhs = (1.0 - z * zz.conj()) * linalg::inner(&pv[s], &pv[t]);
            let rhs = (1.0 - w * ww.conj()) * linalg::inner(&qv[s], &qv[t]);
            let d = (lhs - rhs).norm() / scale;
            worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
        }
    }
    r.at_most(name, worst, 1e-8);
    r.at_most("degree bounds", if cert.degree_bounds_hold() { 0.0 } else { 1.0 }, 0.0);
    r
}

/// Everything produced by [`represent`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Representation {
    pub cert: DvCertificate,
    pub sample: VarietySample,
    pub rep: UnitaryRealization,
    /// Numerical rank of `X` on the final sample.
    pub rank: usize,
}

/// Sample size used when none is requested.
pub fn default_sample_count(p: &BivariatePolynomial) -> usize {
    let (n, m) = p.degree();
    3 * (n + m)
}

/// Certificate, sample and realization for `p`.
///
/// The sample grows by 10 points until the rank of `X` stops changing.
pub fn represent(
    p: &BivariatePolynomial,
    a: f64,
    b: f64,
    seed: u64,
    samples: Option<usize>,
) -> Result<Representation> {
    let cert = dv_certificate(p, a, b)?;
    represent_with_certificate(p, cert, seed, samples)
}

pub fn represent_with_certificate(
    p: &BivariatePolynomial,
    cert: DvCertificate,
    seed: u64,
    samples: Option<usize>,
) -> Result<Representation> {
    let (n, m) = p.degree();
    let mut count = samples.unwrap_or_else(|| default_sample_count(p)).max(n + m);
    let mut sample = sample_variety(p, count, seed)?;
    let mut rank = isometry_rank(&cert, &sample)?;
    for _ in 0..8 {
        if rank == n + m {
            break;
        }
        count += 10;
        let bigger = sample_variety(p, count, seed)?;
        let r2 = isometry_rank(&cert, &bigger)?;
        let saturated = r2 == rank;
        sample = bigger;
        rank = r2;
        if saturated {
            break;
        }
    }
    let rep = lurking_isometry(&cert, &sample)?;
    Ok(Representation { cert, sample, rep, rank })
}
