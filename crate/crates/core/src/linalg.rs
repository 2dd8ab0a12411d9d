//! Dense complex linear algebra helpers.
//!
//! Thin wrappers around `faer` so the rest of the crate deals in plain
//! `Mat<c64>` values and `Result`s instead of solver objects.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64 as c64;

use crate::error::{DvError, Result};

pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

/// `k·a`.
pub fn scaled(a: &CMat, k: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| k * a[(i, j)])
}

pub fn adjoint(a: &CMat) -> CMat {
    a.adjoint().to_owned()
}

pub fn column(v: &[c64]) -> CMat {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn col_to_vec(a: &CMat, j: usize) -> Vec<c64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

/// Largest entry modulus.
pub fn max_abs(a: &CMat) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    assert_eq!(a.ncols(), b.ncols());
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `<u, v> = sum u_j conj(v_j)`.
pub fn inner(u: &[c64], v: &[c64]) -> c64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values()
        .map_err(|e| DvError::LinearAlgebra(format!("svd: {e:?}")))
}

pub fn min_singular_value(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.last().copied().unwrap_or(0.0))
}

/// Spectral (operator 2-) norm.
pub fn op_norm(a: &CMat) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub struct ThinSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub fn thin_svd(a: &CMat) -> Result<ThinSvd> {
    let svd = a
        .thin_svd()
        .map_err(|e| DvError::LinearAlgebra(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector().iter().map(|x| x.re).collect();
    Ok(ThinSvd {
        u: svd.U().to_owned(),
        s,
        v: svd.V().to_owned(),
    })
}

pub fn full_svd(a: &CMat) -> Result<ThinSvd> {
    let svd = a
        .svd()
        .map_err(|e| DvError::LinearAlgebra(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector().iter().map(|x| x.re).collect();
    Ok(ThinSvd {
        u: svd.U().to_owned(),
        s,
        v: svd.V().to_owned(),
    })
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
///
/// Only the lower triangle is read, after explicit symmetrization so that
/// tiny asymmetries from quadrature do not bias the result.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let h = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| DvError::LinearAlgebra(format!("eigh: {e:?}")))?;
    let vals = evd.S().column_vector().iter().map(|x| x.re).collect();
    Ok((vals, evd.U().to_owned()))
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<c64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.eigenvalues()
        .map_err(|e| DvError::LinearAlgebra(format!("eig: {e:?}")))
}

pub fn spectral_radius(a: &CMat) -> Result<f64> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|x| x.norm())
        .fold(0.0, f64::max))
}

pub fn determinant(a: &CMat) -> c64 {
    if a.nrows() == 0 {
        return ONE;
    }
    a.determinant()
}

/// Solves `a x = b`, refusing when `a` is numerically singular
/// (reciprocal condition number below `rcond`).
pub fn solve(a: &CMat, b: &CMat, rcond: f64) -> Result<CMat> {
    let sv = singular_values(a)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin <= rcond * smax {
        return Err(DvError::Singular(format!(
            "condition estimate {:.3e}",
            if smax == 0.0 { 0.0 } else { smin / smax }
        )));
    }
    Ok(a.partial_piv_lu().solve(b))
}

/// Orthonormal basis of the orthogonal complement of the column span of an
/// orthonormal `basis` (N×r), as an N×(N−r) matrix.
///
/// Columns come from a column-pivoted QR of the complementary projector, so
/// the result is a deterministic function of the input.
pub fn orthonormal_complement(basis: &CMat, dim: usize) -> Result<CMat> {
    let r = basis.ncols();
    if r >= dim {
        return Ok(Mat::zeros(dim, 0));
    }
    let proj = if r == 0 {
        identity(dim)
    } else {
        identity(dim) - basis * basis.adjoint()
    };
    let qr = proj.col_piv_qr();
    let q = qr.compute_Q();
    let k = dim - r;
    let raw = Mat::from_fn(dim, k, |i, j| q[(i, j)]);
    // Re-orthogonalize against the basis once; QR of the projector already
    // spans the complement, this only cleans rounding.
    let cleaned = if r == 0 {
        raw
    } else {
        &raw - basis * (basis.adjoint() * &raw)
    };
    let qr2 = cleaned.qr();
    let q2 = qr2.compute_thin_Q();
    Ok(q2)
}

/// Unitary polar factor of a square or tall matrix with full column rank.
pub fn polar_factor(a: &CMat) -> Result<CMat> {
    let svd = thin_svd(a)?;
    Ok(&svd.u * svd.v.adjoint())
}

/// Evaluates a univariate polynomial with ascending coefficients.
pub fn horner(coeffs: &[c64], x: c64) -> c64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
}

/// Value and derivative of a univariate polynomial.
pub fn horner_with_derivative(coeffs: &[c64], x: c64) -> (c64, c64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Strips high-order coefficients that are negligible relative to the
/// largest coefficient. Returns an empty slice for the zero polynomial.
pub fn trim_univariate(coeffs: &[c64], rel: f64) -> &[c64] {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return &coeffs[..0];
    }
    let mut len = coeffs.len();
    while len > 0 && coeffs[len - 1].norm() <= rel * scale {
        len -= 1;
    }
    &coeffs[..len]
}

/// All roots of a univariate polynomial (ascending coefficients), as
/// eigenvalues of the companion matrix followed by a short Newton polish.
///
/// High-order coefficients below `1e-13` of the largest one are treated as
/// zero, so the number of roots is the numerical degree. The zero
/// polynomial and nonzero constants both yield no roots.
pub fn poly_roots(coeffs: &[c64]) -> Result<Vec<c64>> {
    let c = trim_univariate(coeffs, 1e-13);
    if c.len() <= 1 {
        return Ok(Vec::new());
    }
    let d = c.len() - 1;
    let lead = c[d];
    if d == 1 {
        return Ok(vec![-c[0] / lead]);
    }
    if d == 2 {
        // Cancellation-free quadratic formula.
        let (a, b, cc) = (c[2], c[1], c[0]);
        let disc = (b * b - 4.0 * a * cc).sqrt();
        let t = if (b.conj() * disc).re >= 0.0 { -(b + disc) / 2.0 } else { -(b - disc) / 2.0 };
        let mut roots = if t.norm() == 0.0 {
            vec![ZERO, ZERO]
        } else {
            vec![t / a, cc / t]
        };
        for r in roots.iter_mut() {
            *r = newton_polish(c, *r, 2);
        }
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        return Ok(roots);
    }
    let comp = Mat::from_fn(d, d, |i, j| {
        if j == d - 1 {
            -c[i] / lead
        } else if i == j + 1 {
            ONE
        } else {
            ZERO
        }
    });
    let mut roots = eigenvalues(&comp)?;
    for r in roots.iter_mut() {
        *r = newton_polish(c, *r, 4);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

/// A few Newton steps, keeping an iterate only when it reduces |p|.
pub fn newton_polish(coeffs: &[c64], mut x: c64, steps: usize) -> c64 {
    let (mut px, _) = horner_with_derivative(coeffs, x);
    for _ in 0..steps {
        let (p, dp) = horner_with_derivative(coeffs, x);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let cand = x - p / dp;
        let pc = horner(coeffs, cand);
        if pc.norm() < px.norm() {
            x = cand;
            px = pc;
        } else {
            break;
        }
    }
    x
}

/// Groups roots closer than `radius` into clusters, returning the cluster
/// mean and its size (multiplicity).
pub fn cluster_roots(roots: &[c64], radius: f64) -> Vec<(c64, usize)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![roots[i]];
        // Transitive closure so chains of nearby roots end up together.
        let mut k = 0;
        while k < members.len() {
            let anchor = members[k];
            for j in 0..roots.len() {
                if !used[j] && (roots[j] - anchor).norm() <= radius {
                    used[j] = true;
                    members.push(roots[j]);
                }
            }
            k += 1;
        }
        let mean = members.iter().sum::<c64>() / members.len() as f64;
        out.push((mean, members.len()));
    }
    out
}

/// Serde adapter writing a matrix as rows of `[re, im]` pairs.
pub mod serde_rows {
    use super::{c64, CMat};
    use faer::Mat;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(a: &CMat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<c64>> = (0..a.nrows())
            .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<c64>>::deserialize(d)?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(D::Error::custom("matrix rows have unequal lengths"));
        }
        Ok(Mat::from_fn(rows.len(), cols, |i, j| rows[i][j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    #[test]
    fn roots_of_unity_companion_converges() {
        // w^6 - 1 has a cyclic permutation companion; shifted QR variants
        // without exceptional shifts stall on it.
        let mut coeffs = vec![ZERO; 7];
        coeffs[0] = c(-1.0, 0.0);
        coeffs[6] = ONE;
        let roots = poly_roots(&coeffs).unwrap();
        assert_eq!(roots.len(), 6);
        for r in roots {
            assert!((r.norm() - 1.0).abs() < 1e-12);
            assert!((r.powu(6) - ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn trimmed_degree_and_constants() {
        assert!(poly_roots(&[ONE, ZERO, ZERO]).unwrap().is_empty());
        assert!(poly_roots(&[ZERO, ZERO]).unwrap().is_empty());
        let r = poly_roots(&[c(4.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c(4.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn low_degree_paths_match_companion_route() {
        // (w - 2i)(w + 0.5), expanded.
        let quad = [c(0.0, -1.0), c(0.5, -2.0), ONE];
        let r = poly_roots(&quad).unwrap();
        assert!((r[0] - c(-0.5, 0.0)).norm() < 1e-14);
        assert!((r[1] - c(0.0, 2.0)).norm() < 1e-14);
        // Cubic through the eigenvalue route.
        let cubic = [c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), ONE];
        let r = poly_roots(&cubic).unwrap();
        for (k, want) in [1.0, 2.0, 3.0].iter().enumerate() {
            assert!((r[k] - c(*want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn clustering_counts_multiplicity() {
        let roots = [c(1.0, 0.0), c(1.0 + 1e-9, 0.0), c(-2.0, 0.0)];
        let cl = cluster_roots(&roots, 1e-6);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl[0].1, 2);
        assert_eq!(cl[1].1, 1);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let basis = Mat::from_fn(4, 2, |i, j| {
            if i == j {
                c(std::f64::consts::FRAC_1_SQRT_2, 0.0)
            } else if i == j + 2 {
                c(0.0, std::f64::consts::FRAC_1_SQRT_2)
            } else {
                ZERO
            }
        });
        let comp = orthonormal_complement(&basis, 4).unwrap();
        assert_eq!(comp.ncols(), 2);
        let g = comp.adjoint() * &comp;
        assert!(max_abs_diff(&g, &identity(2)) < 1e-14);
        let cross = basis.adjoint() * &comp;
        assert!(max_abs(&cross) < 1e-14);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = Mat::from_fn(2, 2, |_, _| ONE);
        let b = column(&[ONE, ONE]);
        assert!(solve(&a, &b, 1e-12).is_err());
        let x = solve(&identity(2), &b, 1e-12).unwrap();
        assert!((x[(1, 0)] - ONE).norm() < 1e-15);
    }
}
