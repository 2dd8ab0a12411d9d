//! Certificates for polynomials stable on the open bidisk only.
//!
//! `q_r(z, w) = q(rz, rw)` has no zeros on the closed bidisk for `r < 1`, so
//! it has a kernel certificate. The vectors themselves are not continuous
//! in `r` (only up to a unitary), but the kernel matrices
//! `K_A = Σ a_k a_kᴴ` over monomial coefficients are. They approach their
//! limit like `√(1−r)`, so they are extrapolated to `r = 1` by a polynomial
//! in `s = √(1−r)` and then refactored by a Hermitian eigendecomposition.

use faer::Mat;
use num_complex::Complex64 as c64;

use super::{appendix_certificate, Construction, CertificateKind, SosCertificate, SosOptions};
use crate::error::{DvError, Result};
use crate::linalg::{self, CMat};
use crate::poly2::{BivariatePolynomial, VectorPolynomial};

pub const DEFAULT_RADII: [f64; 4] = [0.9, 0.99, 0.999, 0.9999];

/// Coefficient vectors of `vec` over monomials `i ≤ di, j ≤ dj`, stacked as
/// columns, and the kernel matrix they generate.
fn kernel_matrix(vec: &[BivariatePolynomial], di: usize, dj: usize) -> CMat {
    let dim = (di + 1) * (dj + 1);
    let cols = Mat::from_fn(dim, vec.len(), |r, k| vec[k].coeff(r / (dj + 1), r % (dj + 1)));
    &cols * cols.adjoint()
}

/// Value at `x = 0` of the interpolating polynomial through `(xs, ys)`.
pub fn neville_at_zero(xs: &[f64], ys: &[c64]) -> c64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (p[i + 1] * xs[i] - p[i] * xs[i + k]) / (xs[i] - xs[i + k]);
        }
    }
    p[0]
}

/// Top-`rank` factorization of a Hermitian PSD kernel matrix. Returns the
/// vectors and the largest discarded eigenvalue relative to the largest one.
fn refactor(k: &CMat, rank: usize, di: usize, dj: usize) -> Result<(VectorPolynomial, f64)> {
    let (vals, vecs) = linalg::hermitian_eigen(k)?;
    let dim = vals.len();
    let top = vals.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let discarded = if dim > rank {
        vals[..dim - rank].iter().map(|v| v.abs()).fold(0.0, f64::max) / top
    } else {
        0.0
    };
    let mut out = Vec::with_capacity(rank);
    // Largest eigenvalue first.
    for idx in (dim - rank..dim).rev() {
        let s = vals[idx].max(0.0).sqrt();
        let mut p = BivariatePolynomial::zeros(di, dj);
        for r in 0..dim {
            p.set_coeff(r / (dj + 1), r % (dj + 1), vecs[(r, idx)] * s);
        }
        out.push(p);
    }
    Ok((out, discarded))
}

/// Certificate for `q` by kernel extrapolation over `opts.dilation_radii`.
pub fn dilation_certificate(q: &BivariatePolynomial, opts: &SosOptions) -> Result<SosCertificate> {
    let (n, m) = q.degree();
    let radii = &opts.dilation_radii;
    if radii.len() < 2 || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(DvError::InvalidArgument("dilation radii must lie in (0, 1)".into()));
    }
    let mut ka = Vec::new();
    let mut kb = Vec::new();
    for &r in radii {
        let c = appendix_certificate(&q.dilate(r), opts)?;
        ka.push(kernel_matrix(&c.vec_first, n.saturating_sub(1), m));
        kb.push(kernel_matrix(&c.vec_second, n, m.saturating_sub(1)));
    }
    let s: Vec<f64> = radii.iter().map(|r| (1.0 - r).sqrt()).collect();
    let extrapolate = |ks: &[CMat]| -> CMat {
        let d = ks[0].nrows();
        Mat::from_fn(d, d, |i, j| {
            let ys: Vec<c64> = ks.iter().map(|k| k[(i, j)]).collect();
            neville_at_zero(&s, &ys)
        })
    };
    let (a, da) = if n == 0 {
        (Vec::new(), 0.0)
    } else {
        refactor(&extrapolate(&ka), n, n - 1, m)?
    };
    let (b, db) = if m == 0 {
        (Vec::new(), 0.0)
    } else {
        refactor(&extrapolate(&kb), m, n, m - 1)?
    };
    Ok(SosCertificate::from_vectors(
        CertificateKind::ColeWermer,
        None,
        (n, m),
        a,
        b,
        Construction::Dilation {
            radii: radii.clone(),
            discarded: da.max(db),
        },
    ))
}
