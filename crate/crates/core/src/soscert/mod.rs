//! Sums-of-squares certificates for stable and torus-symmetric polynomials.
//!
//! A Cole–Wermer certificate for `q` of degree `(n, m)` is a pair of
//! vector polynomials `A⃗` (n components, degree ≤ (n−1, m)) and `B⃗`
//! (m components, degree ≤ (n, m−1)) with
//!
//! ```text
//! |q|² − |q̃|² = (1 − |z|²)|A⃗|² + (1 − |w|²)|B⃗|².
//! ```
//!
//! For `q` without zeros on the closed bidisk the pair is read off two
//! reproducing kernels of the Bernstein–Szegő measure `c²/|q|² dm`. When
//! `q` is stable only on the open bidisk, certificates of `q(rz, rw)` are
//! extrapolated to `r = 1` (see [`dilation`]).

pub mod dilation;
pub mod moments;

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::classify;
use crate::error::{DvError, Result};
use crate::grid;
use crate::linalg::{self, CMat, ZERO};
use crate::poly2::{self, BivariatePolynomial, SymmetryKind, VectorPolynomial};
use crate::report::VerificationReport;

pub use moments::{compute_moments, compute_moments_fibered, default_grid_size, MomentMethod, MomentTable};

/// Node cap for the fibered moment quadrature.
pub const MAX_QUAD_NODES: usize = 1 << 20;
/// Resolution of the stability pre-checks.
const STABILITY_GRID: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    ColeWermer,
    Symmetric,
    DV,
}

/// How a certificate was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Construction {
    /// Reproducing kernels of the Bernstein–Szegő measure.
    Appendix { quad_nodes: usize },
    /// Kernel extrapolation from dilated polynomials. `discarded` is the
    /// largest eigenvalue dropped from the extrapolated kernels, relative
    /// to the largest kept.
    Dilation { radii: Vec<f64>, discarded: f64 },
    /// Derived from another certificate by a change of variables.
    Transformed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variable {
    Z,
    W,
}

/// Matrix whose entries are one-variable polynomials with ascending
/// coefficients: `entries[row][col][power]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixPolynomial {
    pub variable: Variable,
    pub entries: Vec<Vec<Vec<c64>>>,
}

impl MatrixPolynomial {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, |r| r.len())
    }

    pub fn eval(&self, x: c64) -> CMat {
        Mat::from_fn(self.rows(), self.cols(), |i, j| linalg::horner(&self.entries[i][j], x))
    }

    pub fn scale(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `x^d · conj(M(1/x̄))`, entrywise reversal with conjugation.
    pub fn reflected(&self, d: usize) -> MatrixPolynomial {
        let entries = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| {
                        assert!(e.len() <= d + 1, "entry degree exceeds reflection degree");
                        (0..=d).map(|k| e.get(d - k).map_or(ZERO, |c| c.conj())).collect()
                    })
                    .collect()
            })
            .collect();
        MatrixPolynomial {
            variable: self.variable,
            entries,
        }
    }
}

/// Reads `v⃗(z,w) = M(w)(1, z, …, z^{n−1})ᵗ`.
pub fn matrix_form_first(vec: &[BivariatePolynomial], n: usize) -> MatrixPolynomial {
    let entries = vec
        .iter()
        .map(|p| {
            (0..n)
                .map(|i| (0..=p.degree().1).map(|j| p.coeff(i, j)).collect())
                .collect()
        })
        .collect();
    MatrixPolynomial {
        variable: Variable::W,
        entries,
    }
}

/// Reads `v⃗(z,w) = M(z)(1, w, …, w^{m−1})ᵗ`.
pub fn matrix_form_second(vec: &[BivariatePolynomial], m: usize) -> MatrixPolynomial {
    let entries = vec
        .iter()
        .map(|p| {
            (0..m)
                .map(|j| (0..=p.degree().0).map(|i| p.coeff(i, j)).collect())
                .collect()
        })
        .collect();
    MatrixPolynomial {
        variable: Variable::Z,
        entries,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosCertificate {
    pub kind: CertificateKind,
    /// Weights `(a, b)` of the symmetric and DV identities.
    pub weights: Option<(f64, f64)>,
    /// Degree `(n, m)` of the certified polynomial.
    pub degree: (usize, usize),
    /// `A⃗`, `E⃗` or `P⃗`: n components of degree ≤ (n−1, m).
    pub vec_first: VectorPolynomial,
    /// `B⃗`, `F⃗` or `Q⃗`: m components of degree ≤ (n, m−1).
    pub vec_second: VectorPolynomial,
    /// `A(w)` with `A⃗ = A(w)(1, …, z^{n−1})ᵗ`.
    pub matrix_first: Option<MatrixPolynomial>,
    /// `B(z)` with `B⃗ = B(z)(1, …, w^{m−1})ᵗ`.
    pub matrix_second: Option<MatrixPolynomial>,
    pub construction: Construction,
}

impl SosCertificate {
    pub(crate) fn from_vectors(
        kind: CertificateKind,
        weights: Option<(f64, f64)>,
        degree: (usize, usize),
        vec_first: VectorPolynomial,
        vec_second: VectorPolynomial,
        construction: Construction,
    ) -> Self {
        let (n, m) = degree;
        SosCertificate {
            kind,
            weights,
            degree,
            matrix_first: Some(matrix_form_first(&vec_first, n)),
            matrix_second: Some(matrix_form_second(&vec_second, m)),
            vec_first,
            vec_second,
            construction,
        }
    }

    pub fn kernel_first(&self, x: (c64, c64), y: (c64, c64)) -> c64 {
        poly2::kernel(&self.vec_first, x, y)
    }

    pub fn kernel_second(&self, x: (c64, c64), y: (c64, c64)) -> c64 {
        poly2::kernel(&self.vec_second, x, y)
    }

    /// True when every component has the prescribed degree bounds.
    pub fn degree_bounds_hold(&self) -> bool {
        let (n, m) = self.degree;
        let within = |p: &BivariatePolynomial, bn: usize, bm: usize| {
            p.true_degree().is_none_or(|(dz, dw)| dz <= bn && dw <= bm)
        };
        self.vec_first.len() == n
            && self.vec_second.len() == m
            && self.vec_first.iter().all(|p| within(p, n.saturating_sub(1), m))
            && self.vec_second.iter().all(|p| within(p, n, m.saturating_sub(1)))
    }
}

/// Monomials `zⁱwʲ` with `i ≤ di`, `j ≤ dj`, row-major.
fn monomials(di: usize, dj: usize) -> Vec<(usize, usize)> {
    (0..=di).flat_map(|i| (0..=dj).map(move |j| (i, j))).collect()
}

/// Orthonormal (under `ρ`) basis of `span(big) ⊖ span(small)`, returned as
/// coefficient columns over `big`. `small` must be a subset of `big`.
fn complement_basis(
    moments: &MomentTable,
    big: &[(usize, usize)],
    small: &[(usize, usize)],
    expected: usize,
) -> Result<CMat> {
    let g = moments.gram(big);
    let nb = big.len();
    let idx: Vec<usize> = small
        .iter()
        .map(|s| big.iter().position(|b| b == s).expect("small ⊂ big"))
        .collect();
    // Coefficient vectors v with ⟨Σ v_b m_b, m_s⟩ = (G v)_s = 0.
    let nullspace = if idx.is_empty() {
        linalg::identity(nb)
    } else {
        let gs = Mat::from_fn(idx.len(), nb, |r, c| g[(idx[r], c)]);
        let svd = linalg::full_svd(&gs)?;
        let smax = svd.s.first().copied().unwrap_or(0.0);
        let rank = svd.s.iter().filter(|&&s| s > 1e-12 * smax).count();
        if nb - rank != expected {
            return Err(DvError::SubspaceDegenerate(format!(
                "complement has dimension {} instead of {expected}",
                nb - rank
            )));
        }
        Mat::from_fn(nb, nb - rank, |r, c| svd.v[(r, rank + c)])
    };
    if nullspace.ncols() != expected {
        return Err(DvError::SubspaceDegenerate(format!(
            "complement has dimension {} instead of {expected}",
            nullspace.ncols()
        )));
    }
    let h = nullspace.adjoint() * &g * &nullspace;
    let (vals, vecs) = linalg::hermitian_eigen(&h)?;
    let trace: f64 = (0..nb).map(|i| g[(i, i)].re).sum();
    if let Some(&lo) = vals.first() {
        if lo <= 1e-12 * trace {
            return Err(DvError::SubspaceDegenerate(format!(
                "Gram eigenvalue {lo:.3e} below clipping level"
            )));
        }
    }
    let scale = Mat::from_fn(expected, expected, |i, j| {
        if i == j {
            c64::new(vals[i].powf(-0.5), 0.0)
        } else {
            ZERO
        }
    });
    Ok(&nullspace * &vecs * &scale)
}

fn columns_to_polys(basis: &CMat, mons: &[(usize, usize)], deg: (usize, usize)) -> VectorPolynomial {
    (0..basis.ncols())
        .map(|k| {
            let mut p = BivariatePolynomial::zeros(deg.0, deg.1);
            for (r, &(i, j)) in mons.iter().enumerate() {
                p.set_coeff(i, j, basis[(r, k)]);
            }
            p
        })
        .collect()
}

/// Orthonormal bases `E⃗` of `S₁ = P(n−1, m) ⊖ w·P(n−1, m−1)` and `F⃗` of
/// `S̃₂ = P(n, m−1) ⊖ P(n−1, m−1)` in `L²(ρ)`, where `P(a, b)` denotes the
/// polynomials of degree at most `(a, b)`.
pub fn subspace_kernel_pair(
    q: &BivariatePolynomial,
    moments: &MomentTable,
) -> Result<(VectorPolynomial, VectorPolynomial)> {
    subspace_kernel_pair_ordered(q, moments, false)
}

/// As [`subspace_kernel_pair`]; `reversed` lists the monomials in reverse
/// order, which changes the orthonormal basis but not the kernels.
pub fn subspace_kernel_pair_ordered(
    q: &BivariatePolynomial,
    moments: &MomentTable,
    reversed: bool,
) -> Result<(VectorPolynomial, VectorPolynomial)> {
    let (n, m) = q.degree();
    if moments.range() != (n, m) {
        return Err(DvError::Dimension(format!(
            "moment table covers {:?}, polynomial has degree ({n},{m})",
            moments.range()
        )));
    }
    let order = |mut v: Vec<(usize, usize)>| {
        if reversed {
            v.reverse();
        }
        v
    };
    let e = if n == 0 {
        Vec::new()
    } else {
        let big = order(monomials(n - 1, m));
        let small: Vec<_> = if m == 0 {
            Vec::new()
        } else {
            monomials(n - 1, m - 1).into_iter().map(|(i, j)| (i, j + 1)).collect()
        };
        let basis = complement_basis(moments, &big, &small, n)?;
        columns_to_polys(&basis, &big, (n - 1, m))
    };
    let f = if m == 0 {
        Vec::new()
    } else {
        let big = order(monomials(n, m - 1));
        let small = if n == 0 { Vec::new() } else { monomials(n - 1, m - 1) };
        let basis = complement_basis(moments, &big, &small, m)?;
        columns_to_polys(&basis, &big, (n, m - 1))
    };
    Ok((e, f))
}

/// Tunables for certificate construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SosOptions {
    pub max_quad_nodes: usize,
    pub dilation_radii: Vec<f64>,
    pub reversed_basis: bool,
}

impl Default for SosOptions {
    fn default() -> Self {
        SosOptions {
            max_quad_nodes: MAX_QUAD_NODES,
            dilation_radii: dilation::DEFAULT_RADII.to_vec(),
            reversed_basis: false,
        }
    }
}

/// Certificate for `q` without zeros on the closed bidisk, by the
/// reproducing-kernel construction with fibered moments.
pub fn appendix_certificate(q: &BivariatePolynomial, opts: &SosOptions) -> Result<SosCertificate> {
    let t = compute_moments_fibered(q, opts.max_quad_nodes)?;
    let (e, f) = subspace_kernel_pair_ordered(q, &t, opts.reversed_basis)?;
    let c = c64::new(t.normalizer_c, 0.0);
    let a = e.iter().map(|p| p.scaled(c)).collect();
    let b = f.iter().map(|p| p.scaled(c)).collect();
    Ok(SosCertificate::from_vectors(
        CertificateKind::ColeWermer,
        None,
        q.degree(),
        a,
        b,
        Construction::Appendix { quad_nodes: t.grid_size },
    ))
}

/// Cole–Wermer certificate for `q` stable on the open bidisk.
///
/// Closed-bidisk stability uses the kernel construction directly; stability
/// on the open bidisk alone goes through the dilation fallback.
pub fn sos_certificate(q: &BivariatePolynomial) -> Result<SosCertificate> {
    sos_certificate_with(q, &SosOptions::default())
}

pub fn sos_certificate_with(q: &BivariatePolynomial, opts: &SosOptions) -> Result<SosCertificate> {
    if q.is_zero() {
        return Err(DvError::InvalidPolynomial("zero polynomial".into()));
    }
    let tol = 1e-9;
    if classify::check_stable(q, true, STABILITY_GRID, tol).is_ok() {
        match appendix_certificate(q, opts) {
            Err(DvError::ZeroOnTorus(_)) => {}
            other => return other,
        }
    }
    match classify::check_stable(q, false, STABILITY_GRID, tol) {
        Ok(()) => dilation::dilation_certificate(q, opts),
        Err(notes) => Err(DvError::NotStable(notes.join("; "))),
    }
}

/// Certificate of the symmetric identity
/// `(an+bm)|q|² − 2Re[(a z q_z + b w q_w) q̄] = (1−|z|²)|A⃗|² + (1−|w|²)|B⃗|²`
/// for an essentially T²-symmetric `q` without zeros on the open bidisk.
///
/// Built from a Cole–Wermer certificate of `g = a q̃_z + b q̃_w` (reflections
/// at the expected degrees, `g` taken at degree `(n, m)`), scaled by
/// `1/√(an+bm)`.
pub fn sym_sos_certificate(q: &BivariatePolynomial, a: f64, b: f64) -> Result<SosCertificate> {
    sym_sos_certificate_with(q, a, b, &SosOptions::default())
}

pub fn sym_sos_certificate_with(
    q: &BivariatePolynomial,
    a: f64,
    b: f64,
    opts: &SosOptions,
) -> Result<SosCertificate> {
    check_weights(a, b)?;
    let qs = symmetrized(q)?;
    let (n, m) = qs.degree();
    let g = reflected_derivative_combination(&qs, a, b);
    let weight = a * n as f64 + b * m as f64;
    if g.scale() <= 1e-12 * qs.scale() || weight <= 0.0 {
        return Err(DvError::ReflectedDerivativeVanishes("a·q̃_z + b·q̃_w is zero".into()));
    }
    let cert = match sos_certificate_with(&g, opts) {
        Ok(c) => c,
        Err(DvError::NotStable(s)) => return Err(DvError::ReflectedDerivativeVanishes(s)),
        Err(e) => return Err(e),
    };
    let k = c64::new(weight.sqrt().recip(), 0.0);
    let scale = |v: &[BivariatePolynomial]| v.iter().map(|p| p.scaled(k)).collect();
    Ok(SosCertificate::from_vectors(
        CertificateKind::Symmetric,
        Some((a, b)),
        (n, m),
        scale(&cert.vec_first),
        scale(&cert.vec_second),
        cert.construction,
    ))
}

pub(crate) fn check_weights(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) || (a == 0.0 && b == 0.0) {
        return Err(DvError::InvalidArgument(format!(
            "weights must be non-negative and not both zero, got ({a}, {b})"
        )));
    }
    Ok(())
}

/// `s·q` when `q` is essentially T²-symmetric.
fn symmetrized(q: &BivariatePolynomial) -> Result<BivariatePolynomial> {
    let s = q.symmetry_analysis(1e-9);
    if s.kind == SymmetryKind::NotSymmetric {
        return Err(DvError::NotSymmetric);
    }
    q.symmetrize(1e-9)
}

/// `a q̃_z + b q̃_w` at formal degree `(n, m)`.
pub fn reflected_derivative_combination(q: &BivariatePolynomial, a: f64, b: f64) -> BivariatePolynomial {
    let (n, m) = q.degree();
    let (qz, qw) = q.reflected_derivatives();
    let pad = |p: BivariatePolynomial| p.with_degree(n, m).expect("derivative degree fits");
    pad(qz.scaled(c64::new(a, 0.0))).add(&pad(qw.scaled(c64::new(b, 0.0))))
}

/// Left-hand side of a certificate identity, polarized:
/// the value at `(x, y)` whose diagonal `x = y` is the identity's left side.
fn identity_lhs(q: &BivariatePolynomial, cert: &SosCertificate) -> impl Fn((c64, c64), (c64, c64)) -> c64 {
    let (n, m) = cert.degree;
    let qd = q.with_degree(n, m).unwrap_or_else(|_| q.clone());
    let refl = qd.reflected();
    let (a, b) = cert.weights.unwrap_or((1.0, 1.0));
    let weight = a * n as f64 + b * m as f64;
    let zqz = BivariatePolynomial::from_fn(n, m, |i, j| qd.coeff(i, j) * (a * i as f64 + b * j as f64));
    let kind = cert.kind;
    move |x, y| {
        let qx = qd.evaluate(x.0, x.1);
        let qy = qd.evaluate(y.0, y.1).conj();
        match kind {
            CertificateKind::Symmetric => {
                let hx = zqz.evaluate(x.0, x.1);
                let hy = zqz.evaluate(y.0, y.1).conj();
                weight * qx * qy - hx * qy - qx * hy
            }
            _ => qx * qy - refl.evaluate(x.0, x.1) * refl.evaluate(y.0, y.1).conj(),
        }
    }
}

fn identity_rhs(cert: &SosCertificate, x: (c64, c64), y: (c64, c64)) -> c64 {
    (1.0 - x.0 * y.0.conj()) * cert.kernel_first(x, y) + (1.0 - x.1 * y.1.conj()) * cert.kernel_second(x, y)
}

/// Reporting threshold for identity residuals.
pub fn residual_threshold(cert: &SosCertificate) -> f64 {
    match cert.construction {
        Construction::Dilation { .. } => 1e-6,
        _ => 1e-7,
    }
}

/// Relative scale of a certificate identity for `q`.
fn identity_scale(q: &BivariatePolynomial, cert: &SosCertificate) -> f64 {
    let (n, m) = cert.degree;
    let s = q.scale().powi(2);
    match (cert.kind, cert.weights) {
        (CertificateKind::Symmetric, Some((a, b))) => s * (a * n as f64 + b * m as f64).max(1.0),
        _ => s,
    }
    .max(f64::MIN_POSITIVE)
}

/// Evaluates the certificate's identity on a `grid_n` bidisk grid, at 500
/// seeded random points of the bidisk, and in polarized form on 100 random
/// point pairs. Residuals are relative to `scale(q)²`.
///
/// DV certificates are checked on variety samples instead, via
/// [`crate::dvrep::verify_dv_certificate`].
pub fn verify_certificate(q: &BivariatePolynomial, cert: &SosCertificate, grid_n: usize) -> VerificationReport {
    if cert.kind == CertificateKind::DV {
        return crate::dvrep::verify_dv_certificate(q, cert, 50, 0);
    }
    let mut r = VerificationReport::new();
    if q.degree() != cert.degree && q.with_degree(cert.degree.0, cert.degree.1).is_err() {
        r.error("degree", "certificate degree does not match the polynomial");
        return r;
    }
    let thr = residual_threshold(cert);
    let scale = identity_scale(q, cert);
    let lhs = identity_lhs(q, cert);
    let diag = |&(z, w): &(c64, c64)| (lhs((z, w), (z, w)) - identity_rhs(cert, (z, w), (z, w))).norm() / scale;
    let pts = grid::closed_bidisk(grid_n);
    r.at_most("identity residual (grid)", grid::par_max(&pts, diag), thr);
    let mut rng = grid::rng(0x50c_e27);
    let zs = grid::random_disk(&mut rng, 500, 1.0);
    let ws = grid::random_disk(&mut rng, 500, 1.0);
    let rand: Vec<(c64, c64)> = zs.into_iter().zip(ws).collect();
    r.at_most("identity residual (random)", grid::par_max(&rand, diag), thr);
    let pairs: Vec<((c64, c64), (c64, c64))> = rand[..200].chunks(2).map(|c| (c[0], c[1])).collect();
    let polar = grid::par_max(&pairs, |&(x, y)| (lhs(x, y) - identity_rhs(cert, x, y)).norm() / scale);
    r.at_most("polarized residual", polar, thr);
    r.at_most("degree bounds", if cert.degree_bounds_hold() { 0.0 } else { 1.0 }, 0.0);
    r
}

/// Invertibility of `A(w)` and of `zⁿ conj(B(1/z̄))` over a closed-disk
/// grid. Minimum singular values must exceed `1e-6` times the matrix
/// coefficient scale.
pub fn gw_invertibility(cert: &SosCertificate, grid_n: usize) -> VerificationReport {
    let mut r = VerificationReport::new();
    if let Construction::Dilation { .. } = cert.construction {
        r.skip("A(w) min singular value", "polynomial has zeros on T²; closed-bidisk hypothesis not met");
        r.skip("z^n conj(B(1/z̄)) min singular value", "polynomial has zeros on T²; closed-bidisk hypothesis not met");
        return r;
    }
    let (n, _) = cert.degree;
    let pts = grid::closed_disk(grid_n);
    let check = |r: &mut VerificationReport, name: &str, mp: Option<MatrixPolynomial>| match mp {
        None => {
            r.skip(name, "matrix form not present");
        }
        Some(mp) if mp.rows() == 0 => {
            r.skip(name, "empty matrix");
        }
        Some(mp) => {
            let (v, _) = grid::par_argmin(&pts, |&x| linalg::min_singular_value(&mp.eval(x)).unwrap_or(0.0));
            r.above(name, v, 1e-6 * mp.scale().max(f64::MIN_POSITIVE));
        }
    };
    check(&mut r, "A(w) min singular value", cert.matrix_first.clone());
    check(
        &mut r,
        "z^n conj(B(1/z̄)) min singular value",
        cert.matrix_second.as_ref().map(|b| b.reflected(n)),
    );
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn poly(n: usize, m: usize, t: &[(usize, usize, f64)]) -> BivariatePolynomial {
        BivariatePolynomial::from_real_terms(n, m, t).unwrap()
    }

    fn kernel_points(seed: u64, count: usize) -> Vec<((c64, c64), (c64, c64))> {
        let mut rng = grid::rng(seed);
        let a = grid::random_disk(&mut rng, 4 * count, 1.0);
        a.chunks(4).map(|c| ((c[0], c[1]), (c[2], c[3]))).collect()
    }

    #[test]
    fn constant_polynomial_kernels_are_monomial() {
        let q = BivariatePolynomial::constant(c64::new(-5.0, 0.0), 3, 2);
        let t = compute_moments(&q, 256).unwrap();
        let (e, f) = subspace_kernel_pair(&q, &t).unwrap();
        assert_eq!((e.len(), f.len()), (3, 2));
        for (x, y) in kernel_points(1, 50) {
            let zz = x.0 * y.0.conj();
            let ww = x.1 * y.1.conj();
            let ke = poly2::kernel(&e, x, y);
            let kf = poly2::kernel(&f, x, y);
            assert!((ke - (1.0 + zz + zz * zz)).norm() < 1e-12);
            assert!((kf - zz.powu(3) * (1.0 + ww)).norm() < 1e-12);
            assert!((ke - poly2::kernel(&e, y, x).conj()).norm() < 1e-13);
        }
        let cert = sos_certificate(&q).unwrap();
        let gw = gw_invertibility(&cert, 32);
        assert!(gw.passed());
        assert!((gw.checks[0].value - 5.0).abs() < 1e-10);
        assert!((gw.checks[1].value - 5.0).abs() < 1e-10);
    }

    #[test]
    fn four_minus_z_minus_w() {
        let q = poly(1, 1, &[(0, 0, 4.0), (1, 0, -1.0), (0, 1, -1.0)]);
        let cert = sos_certificate(&q).unwrap();
        assert!(matches!(cert.construction, Construction::Appendix { .. }));
        let rep = verify_certificate(&q, &cert, 64);
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.value("identity residual (grid)").unwrap() <= 1e-8);
        // E is one polynomial in w of degree ≤ 1; its root lies outside D̄.
        let e = &cert.vec_first[0];
        let roots = linalg::poly_roots(&e.fiber_in_w(ZERO)).unwrap();
        assert!(roots.iter().all(|w| w.norm() > 1.0));
        assert!(gw_invertibility(&cert, 32).passed());
    }

    #[test]
    fn kernels_do_not_depend_on_basis_order() {
        let q = poly(2, 2, &[(0, 0, 5.0), (1, 0, 0.7), (0, 1, -0.4), (2, 2, 0.9), (1, 2, 0.3)]);
        let a = sos_certificate(&q).unwrap();
        let opts = SosOptions { reversed_basis: true, ..SosOptions::default() };
        let b = sos_certificate_with(&q, &opts).unwrap();
        for (x, y) in kernel_points(2, 40) {
            assert!((a.kernel_first(x, y) - b.kernel_first(x, y)).norm() < 1e-8);
            assert!((a.kernel_second(x, y) - b.kernel_second(x, y)).norm() < 1e-8);
        }
        assert!(verify_certificate(&q, &a, 32).passed());
    }

    #[test]
    fn perturbed_certificate_is_caught() {
        let q = poly(1, 1, &[(0, 0, 4.0), (1, 0, -1.0), (0, 1, -1.0)]);
        let mut cert = sos_certificate(&q).unwrap();
        let c = cert.vec_first[0].coeff(0, 0);
        cert.vec_first[0].set_coeff(0, 0, c + 1e-3);
        let rep = verify_certificate(&q, &cert, 32);
        assert!(!rep.passed());
        let v = rep.value("identity residual (grid)").unwrap();
        assert!(v > 1e-5 && v < 1e-2, "{v}");
    }

    #[test]
    fn corrupted_matrix_form_fails_gw() {
        let q = BivariatePolynomial::constant(c64::new(-5.0, 0.0), 3, 2);
        let mut cert = sos_certificate(&q).unwrap();
        // The basis is fixed only up to a unitary, so blank a whole row.
        let a = cert.matrix_first.as_mut().unwrap();
        for c in a.entries[0].iter_mut().flatten() {
            *c = ZERO;
        }
        let gw = gw_invertibility(&cert, 32);
        assert!(!gw.passed());
        assert!(gw.checks[0].value < 1e-12);
    }

    #[test]
    fn symmetric_certificate_closed_form() {
        let q = poly(3, 2, &[(0, 0, 1.0), (3, 2, -1.0)]).scaled(I);
        let cert = sym_sos_certificate(&q, 1.0, 1.0).unwrap();
        for (x, y) in kernel_points(3, 50) {
            let zz = x.0 * y.0.conj();
            let ww = x.1 * y.1.conj();
            let ka = 5.0 * (1.0 + zz + zz * zz);
            let kb = 5.0 * zz.powu(3) * (1.0 + ww);
            assert!((cert.kernel_first(x, y) - ka).norm() < 1e-10);
            assert!((cert.kernel_second(x, y) - kb).norm() < 1e-10);
        }
        assert!(verify_certificate(&q, &cert, 32).passed());
    }

    #[test]
    fn symmetric_certificate_single_weight() {
        let q = poly(3, 2, &[(0, 0, 1.0), (3, 2, -1.0)]).scaled(I);
        let cert = sym_sos_certificate(&q, 1.0, 0.0).unwrap();
        let rep = verify_certificate(&q, &cert, 32);
        assert!(rep.passed(), "{rep:?}");
        assert!(matches!(
            sym_sos_certificate(&q, 0.0, 0.0),
            Err(DvError::InvalidArgument(_))
        ));
        let not_sym = poly(1, 1, &[(0, 0, 2.0), (1, 0, -1.0)]);
        assert_eq!(sym_sos_certificate(&not_sym, 1.0, 1.0), Err(DvError::NotSymmetric));
    }

    #[test]
    fn matrix_forms_reproduce_vectors() {
        let q = poly(2, 2, &[(0, 0, 5.0), (1, 0, 0.7), (0, 1, -0.4), (2, 2, 0.9)]);
        let cert = sos_certificate(&q).unwrap();
        let (z, w) = (c64::new(0.3, -0.4), c64::new(-0.6, 0.1));
        let a = cert.matrix_first.as_ref().unwrap().eval(w);
        let b = cert.matrix_second.as_ref().unwrap().eval(z);
        for k in 0..2 {
            let va: c64 = (0..2).map(|i| a[(k, i)] * z.powu(i as u32)).sum();
            assert!((va - cert.vec_first[k].evaluate(z, w)).norm() < 1e-13);
            let vb: c64 = (0..2).map(|j| b[(k, j)] * w.powu(j as u32)).sum();
            assert!((vb - cert.vec_second[k].evaluate(z, w)).norm() < 1e-13);
        }
        assert!(cert.degree_bounds_hold());
    }

    #[test]
    fn unstable_input_is_rejected() {
        let q = poly(1, 1, &[(0, 0, 0.5), (1, 0, -1.0), (0, 1, -1.0)]);
        assert!(matches!(sos_certificate(&q), Err(DvError::NotStable(_))));
    }
}
