//! Bivariate complex polynomials with an explicit formal degree.
//!
//! The formal degree `(n, m)` is part of the value: reflection, the
//! z-reversal transform and the derived polynomials all depend on it, and a
//! polynomial whose true degree is smaller than its formal degree is a
//! different object from the same coefficients at a tighter degree.

use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{DvError, Result};
use crate::linalg::{ONE, ZERO};

/// `Σ coeffs[i][j] zⁱ wʲ` with `0 ≤ i ≤ n`, `0 ≤ j ≤ m`.
///
/// Storage is a dense row-major grid of exactly `(n+1)(m+1)` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct BivariatePolynomial {
    n: usize,
    m: usize,
    data: Vec<c64>,
}

/// Wire format: `{"degree":[n,m],"coeffs":[[[re,im],...],...]}`.
#[derive(Serialize, Deserialize)]
struct PolyJson {
    degree: [usize; 2],
    coeffs: Vec<Vec<c64>>,
}

impl TryFrom<PolyJson> for BivariatePolynomial {
    type Error = DvError;

    fn try_from(j: PolyJson) -> Result<Self> {
        let p = BivariatePolynomial::from_rows(j.coeffs)?;
        if p.degree() != (j.degree[0], j.degree[1]) {
            return Err(DvError::DegreeMismatch(format!(
                "field `degree` is {:?} but `coeffs` is {}x{}",
                j.degree,
                p.n + 1,
                p.m + 1
            )));
        }
        Ok(p)
    }
}

impl From<BivariatePolynomial> for PolyJson {
    fn from(p: BivariatePolynomial) -> Self {
        PolyJson {
            degree: [p.n, p.m],
            coeffs: p.rows(),
        }
    }
}

/// A list of polynomials read as a column vector (A⃗, B⃗, E⃗, F⃗, P⃗, Q⃗).
pub type VectorPolynomial = Vec<BivariatePolynomial>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryKind {
    T2Symmetric,
    EssentiallyT2Symmetric,
    NotSymmetric,
}

/// Outcome of comparing `q` with its reflection.
///
/// When symmetric, `q = constant · q̃` and `symmetrizing_factor · q` equals
/// its own reflection. Since reflection conjugates, the factor `s` satisfies
/// `s² = conj(constant)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryResult {
    pub kind: SymmetryKind,
    pub constant: Option<c64>,
    pub symmetrizing_factor: Option<c64>,
}

impl BivariatePolynomial {
    /// The zero polynomial at formal degree `(n, m)`.
    pub fn zeros(n: usize, m: usize) -> Self {
        BivariatePolynomial {
            n,
            m,
            data: vec![ZERO; (n + 1) * (m + 1)],
        }
    }

    pub fn constant(k: c64, n: usize, m: usize) -> Self {
        let mut p = Self::zeros(n, m);
        p.data[0] = k;
        p
    }

    /// Builds from `(i, j, c)` triples; repeated indices accumulate.
    pub fn from_terms(n: usize, m: usize, terms: &[(usize, usize, c64)]) -> Result<Self> {
        let mut p = Self::zeros(n, m);
        for &(i, j, c) in terms {
            if i > n || j > m {
                return Err(DvError::DegreeMismatch(format!(
                    "term z^{i} w^{j} exceeds formal degree ({n},{m})"
                )));
            }
            p.data[i * (m + 1) + j] += c;
        }
        Ok(p)
    }

    /// Real-coefficient convenience wrapper around [`Self::from_terms`].
    pub fn from_real_terms(n: usize, m: usize, terms: &[(usize, usize, f64)]) -> Result<Self> {
        let t: Vec<_> = terms.iter().map(|&(i, j, c)| (i, j, c64::new(c, 0.0))).collect();
        Self::from_terms(n, m, &t)
    }

    /// Builds from a rectangular grid `rows[i][j]`.
    pub fn from_rows(rows: Vec<Vec<c64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(DvError::InvalidPolynomial(
                "field `coeffs` must be a nonempty grid".into(),
            ));
        }
        let cols = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != cols) {
            return Err(DvError::InvalidPolynomial(format!(
                "field `coeffs` row {i} has length {} but row 0 has length {cols}",
                rows[i].len()
            )));
        }
        if rows.iter().flatten().any(|c| !c.is_finite()) {
            return Err(DvError::InvalidPolynomial(
                "field `coeffs` contains a non-finite number".into(),
            ));
        }
        Ok(BivariatePolynomial {
            n: rows.len() - 1,
            m: cols - 1,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds from a closure over grid indices.
    pub fn from_fn(n: usize, m: usize, f: impl Fn(usize, usize) -> c64) -> Self {
        let mut data = Vec::with_capacity((n + 1) * (m + 1));
        for i in 0..=n {
            for j in 0..=m {
                data.push(f(i, j));
            }
        }
        BivariatePolynomial { n, m, data }
    }

    pub fn degree(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn coeff(&self, i: usize, j: usize) -> c64 {
        if i > self.n || j > self.m {
            ZERO
        } else {
            self.data[i * (self.m + 1) + j]
        }
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, c: c64) {
        assert!(i <= self.n && j <= self.m, "index outside formal degree");
        self.data[i * (self.m + 1) + j] = c;
    }

    pub fn rows(&self) -> Vec<Vec<c64>> {
        self.data.chunks(self.m + 1).map(|r| r.to_vec()).collect()
    }

    pub fn coefficients(&self) -> &[c64] {
        &self.data
    }

    /// Maximum coefficient modulus; every relative tolerance uses this.
    pub fn scale(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| *c == ZERO)
    }

    /// Largest `(i, j)` with a nonzero entry in row `i` / column `j`, or
    /// `None` for the zero polynomial.
    pub fn true_degree(&self) -> Option<(usize, usize)> {
        if self.is_zero() {
            return None;
        }
        let mut dz = 0;
        let mut dw = 0;
        for i in 0..=self.n {
            for j in 0..=self.m {
                if self.coeff(i, j) != ZERO {
                    dz = dz.max(i);
                    dw = dw.max(j);
                }
            }
        }
        Some((dz, dw))
    }

    /// Same polynomial at a different formal degree.
    pub fn with_degree(&self, n: usize, m: usize) -> Result<Self> {
        if let Some((dz, dw)) = self.true_degree() {
            if dz > n || dw > m {
                return Err(DvError::DegreeMismatch(format!(
                    "true degree ({dz},{dw}) exceeds requested ({n},{m})"
                )));
            }
        }
        Ok(Self::from_fn(n, m, |i, j| self.coeff(i, j)))
    }

    /// Nested Horner: inner in `w`, outer in `z`.
    pub fn evaluate(&self, z: c64, w: c64) -> c64 {
        let mut acc = ZERO;
        for row in self.data.chunks(self.m + 1).rev() {
            let inner = row.iter().rev().fold(ZERO, |a, &c| a * w + c);
            acc = acc * z + inner;
        }
        acc
    }

    /// `(p, p_z, p_w)` at one point.
    pub fn evaluate_with_gradient(&self, z: c64, w: c64) -> (c64, c64, c64) {
        let mut p = ZERO;
        let mut pz = ZERO;
        let mut pw = ZERO;
        for row in self.data.chunks(self.m + 1).rev() {
            let mut r = ZERO;
            let mut rw = ZERO;
            for &c in row.iter().rev() {
                rw = rw * w + r;
                r = r * w + c;
            }
            pz = pz * z + p;
            p = p * z + r;
            pw = pw * z + rw;
        }
        (p, pz, pw)
    }

    /// Coefficients in `w` of the fiber polynomial `p(z, ·)`.
    pub fn fiber_in_w(&self, z: c64) -> Vec<c64> {
        let mut out = vec![ZERO; self.m + 1];
        for i in (0..=self.n).rev() {
            for (j, o) in out.iter_mut().enumerate() {
                *o = *o * z + self.coeff(i, j);
            }
        }
        out
    }

    /// Coefficients in `z` of `p(·, w)`.
    pub fn fiber_in_z(&self, w: c64) -> Vec<c64> {
        self.data
            .chunks(self.m + 1)
            .map(|row| row.iter().rev().fold(ZERO, |a, &c| a * w + c))
            .collect()
    }

    /// Coefficients in `z` of the w-leading coefficient `p_m(z)`.
    pub fn leading_w_coefficient(&self) -> Vec<c64> {
        (0..=self.n).map(|i| self.coeff(i, self.m)).collect()
    }

    pub fn partial_z(&self) -> Self {
        let n = self.n.saturating_sub(1);
        if self.n == 0 {
            return Self::zeros(0, self.m);
        }
        Self::from_fn(n, self.m, |i, j| self.coeff(i + 1, j) * (i + 1) as f64)
    }

    pub fn partial_w(&self) -> Self {
        if self.m == 0 {
            return Self::zeros(self.n, 0);
        }
        Self::from_fn(self.n, self.m - 1, |i, j| self.coeff(i, j + 1) * (j + 1) as f64)
    }

    /// `zⁿ wᵐ conj(p(1/z̄, 1/w̄))` at the given degree.
    pub fn reflect(&self, at: (usize, usize)) -> Result<Self> {
        let (n, m) = at;
        let p = self.with_degree(n, m)?;
        Ok(Self::from_fn(n, m, |i, j| p.coeff(n - i, m - j).conj()))
    }

    /// Reflection at the formal degree.
    pub fn reflected(&self) -> Self {
        Self::from_fn(self.n, self.m, |i, j| {
            self.coeff(self.n - i, self.m - j).conj()
        })
    }

    /// `(q̃_z, q̃_w)`: derivatives reflected at `(n−1, m)` and `(n, m−1)`.
    pub fn reflected_derivatives(&self) -> (Self, Self) {
        (self.partial_z().reflected(), self.partial_w().reflected())
    }

    pub fn symmetry_analysis(&self, tol: f64) -> SymmetryResult {
        let not = SymmetryResult {
            kind: SymmetryKind::NotSymmetric,
            constant: None,
            symmetrizing_factor: None,
        };
        let scale = self.scale();
        if scale == 0.0 {
            return not;
        }
        let refl = self.reflected();
        let k = self
            .data
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bk, bv), (k, c)| {
                if c.norm() > bv {
                    (k, c.norm())
                } else {
                    (bk, bv)
                }
            })
            .0;
        if refl.data[k].norm() <= tol * scale {
            return not;
        }
        let ratio = self.data[k] / refl.data[k];
        let c = ratio / ratio.norm();
        let mismatch = self
            .data
            .iter()
            .zip(&refl.data)
            .map(|(a, b)| (a - c * b).norm())
            .fold(0.0, f64::max);
        if mismatch > tol * scale {
            return not;
        }
        let kind = if (c - ONE).norm() <= tol {
            SymmetryKind::T2Symmetric
        } else {
            SymmetryKind::EssentiallyT2Symmetric
        };
        SymmetryResult {
            kind,
            constant: Some(c),
            symmetrizing_factor: Some(symmetrizing_root(c)),
        }
    }

    /// `s·q` with `s` from [`Self::symmetry_analysis`]; `s·q` is T²-symmetric.
    pub fn symmetrize(&self, tol: f64) -> Result<Self> {
        let sym = self.symmetry_analysis(tol);
        match (sym.kind, sym.symmetrizing_factor) {
            (SymmetryKind::T2Symmetric, _) => Ok(self.clone()),
            (_, Some(s)) => Ok(self.scaled(s)),
            _ => Err(DvError::NotSymmetric),
        }
    }

    /// `zⁿ p(1/z, w)`: reversal of the z index, no conjugation.
    pub fn swap_transform(&self) -> Result<Self> {
        if (0..=self.m).all(|j| self.coeff(self.n, j) == ZERO) {
            return Err(DvError::DegreeMismatch(format!(
                "z-degree is below the formal degree {} (row {} is zero)",
                self.n, self.n
            )));
        }
        Ok(self.reverse_z(self.n))
    }

    /// `zᵏ p(1/z, w)` at z-degree `k ≥ n`, without the exact-degree check.
    pub fn reverse_z(&self, k: usize) -> Self {
        assert!(k >= self.n, "reversal degree below formal degree");
        Self::from_fn(k, self.m, |i, j| self.coeff(k - i, j))
    }

    /// `m·z·p_z − n·w·p_w` at degree `(n, m)`.
    pub fn derived_dv_poly(&self) -> Self {
        let (n, m) = (self.n as f64, self.m as f64);
        Self::from_fn(self.n, self.m, |i, j| {
            self.coeff(i, j) * (m * i as f64 - n * j as f64)
        })
    }

    /// `m·n·q − m·z·q_z − n·w·q_w` at degree `(n, m)`.
    pub fn derived_symmetric_poly(&self) -> Self {
        let (n, m) = (self.n as f64, self.m as f64);
        Self::from_fn(self.n, self.m, |i, j| {
            self.coeff(i, j) * (m * n - m * i as f64 - n * j as f64)
        })
    }

    /// Exchanges the roles of `z` and `w`.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.m, self.n, |i, j| self.coeff(j, i))
    }

    /// `p(r z, r w)`.
    pub fn dilate(&self, r: f64) -> Self {
        Self::from_fn(self.n, self.m, |i, j| {
            self.coeff(i, j) * r.powi((i + j) as i32)
        })
    }

    pub fn scaled(&self, k: c64) -> Self {
        BivariatePolynomial {
            n: self.n,
            m: self.m,
            data: self.data.iter().map(|c| c * k).collect(),
        }
    }

    /// Sum at the componentwise maximum formal degree.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.n.max(other.n);
        let m = self.m.max(other.m);
        Self::from_fn(n, m, |i, j| self.coeff(i, j) + other.coeff(i, j))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(-ONE))
    }

    /// Product at the sum of formal degrees.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.n + other.n, self.m + other.m);
        let mm = out.m + 1;
        for i in 0..=self.n {
            for j in 0..=self.m {
                let a = self.coeff(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..=other.n {
                    for l in 0..=other.m {
                        out.data[(i + k) * mm + j + l] += a * other.coeff(k, l);
                    }
                }
            }
        }
        out
    }

    /// Largest coefficient difference, comparing at the larger formal degree.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let n = self.n.max(other.n);
        let m = self.m.max(other.m);
        let mut d = 0.0f64;
        for i in 0..=n {
            for j in 0..=m {
                d = d.max((self.coeff(i, j) - other.coeff(i, j)).norm());
            }
        }
        d
    }
}

/// Coefficient residuals of `z·∂_z(q̃) + (q_z)~ − n·q̃` and of its w-analogue,
/// relative to `scale(q)`. Both vanish for every `q`.
pub fn reflection_derivative_residuals(q: &BivariatePolynomial) -> (f64, f64) {
    let (n, m) = q.degree();
    let t = q.reflected();
    let (rz, rw) = q.reflected_derivatives();
    let pad = |p: BivariatePolynomial| p.with_degree(n, m).expect("reflected derivative fits");
    let zt = BivariatePolynomial::from_fn(n, m, |i, j| t.coeff(i, j) * i as f64);
    let wt = BivariatePolynomial::from_fn(n, m, |i, j| t.coeff(i, j) * j as f64);
    let s = q.scale().max(f64::MIN_POSITIVE);
    let ez = zt.add(&pad(rz)).sub(&t.scaled(c64::new(n as f64, 0.0)));
    let ew = wt.add(&pad(rw)).sub(&t.scaled(c64::new(m as f64, 0.0)));
    (ez.scale() / s, ew.scale() / s)
}

/// For T²-symmetric `q`, residual at `(z, w)` of
/// `(an+bm)²|q|² − 2(an+bm)Re[q̄(a z q_z + b w q_w)] = |a q̃_z + b q̃_w|² − |a z q_z + b w q_w|²`,
/// relative to the largest term.
pub fn symmetric_modulus_residual(q: &BivariatePolynomial, a: f64, b: f64, z: c64, w: c64) -> f64 {
    let (n, m) = q.degree();
    let k = a * n as f64 + b * m as f64;
    let (v, vz, vw) = q.evaluate_with_gradient(z, w);
    let h = a * z * vz + b * w * vw;
    let (rz, rw) = q.reflected_derivatives();
    let g = a * rz.evaluate(z, w) + b * rw.evaluate(z, w);
    let lhs = k * k * v.norm_sqr() - 2.0 * k * (v.conj() * h).re;
    let rhs = g.norm_sqr() - h.norm_sqr();
    let size = (k * k * v.norm_sqr()).max(g.norm_sqr()).max(h.norm_sqr()).max(f64::MIN_POSITIVE);
    (lhs - rhs).abs() / size
}

/// The square root `s` of `conj(c)` with `Re s ≥ 0`, and `Im s > 0` when
/// `Re s` vanishes.
pub fn symmetrizing_root(c: c64) -> c64 {
    let s = c.conj().sqrt();
    if s.re.abs() < 1e-12 {
        c64::new(0.0, s.im.abs())
    } else if s.re < 0.0 {
        -s
    } else {
        s
    }
}

/// `Σ_j E_j(x) conj(E_j(y))`.
pub fn kernel(vec: &[BivariatePolynomial], x: (c64, c64), y: (c64, c64)) -> c64 {
    vec.iter()
        .map(|e| e.evaluate(x.0, x.1) * e.evaluate(y.0, y.1).conj())
        .sum()
}

/// `Σ_j |E_j(z, w)|²`.
pub fn squared_norm(vec: &[BivariatePolynomial], z: c64, w: c64) -> f64 {
    vec.iter().map(|e| e.evaluate(z, w).norm_sqr()).sum()
}

pub fn evaluate_vector(vec: &[BivariatePolynomial], z: c64, w: c64) -> Vec<c64> {
    vec.iter().map(|e| e.evaluate(z, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use proptest::prelude::*;

    fn r(re: f64) -> c64 {
        c64::new(re, 0.0)
    }

    fn z3_minus_w2() -> BivariatePolynomial {
        BivariatePolynomial::from_real_terms(3, 2, &[(3, 0, 1.0), (0, 2, -1.0)]).unwrap()
    }

    fn one_minus_z3w2() -> BivariatePolynomial {
        BivariatePolynomial::from_real_terms(3, 2, &[(0, 0, 1.0), (3, 2, -1.0)]).unwrap()
    }

    fn two_minus_z_minus_w() -> BivariatePolynomial {
        BivariatePolynomial::from_real_terms(1, 1, &[(0, 0, 2.0), (1, 0, -1.0), (0, 1, -1.0)])
            .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(one_minus_z3w2().evaluate(ZERO, ZERO), ONE);
        assert_eq!(z3_minus_w2().evaluate(ONE, ONE), ZERO);
        assert_eq!(two_minus_z_minus_w().evaluate(ONE, ONE), ZERO);
    }

    #[test]
    fn derivative_examples() {
        let p = z3_minus_w2();
        let pz = p.partial_z();
        assert_eq!(pz.degree(), (2, 2));
        assert_eq!(pz.coeff(2, 0), r(3.0));
        assert_eq!(pz.scale(), 3.0);
        let pw = p.partial_w();
        assert_eq!(pw.degree(), (3, 1));
        assert_eq!(pw.coeff(0, 1), r(-2.0));
        assert_eq!(pw.scale(), 2.0);
        let qz = one_minus_z3w2().partial_z();
        assert_eq!(qz.coeff(2, 2), r(-3.0));
        let flat = BivariatePolynomial::constant(ONE, 0, 2).partial_z();
        assert_eq!(flat.degree(), (0, 2));
        assert!(flat.is_zero());
    }

    #[test]
    fn reflect_examples() {
        let t = two_minus_z_minus_w().reflect((1, 1)).unwrap();
        let want = BivariatePolynomial::from_real_terms(1, 1, &[(1, 1, 2.0), (1, 0, -1.0), (0, 1, -1.0)])
            .unwrap();
        assert_eq!(t, want);
        let q = one_minus_z3w2().reflect((3, 2)).unwrap();
        assert_eq!(q, one_minus_z3w2().scaled(r(-1.0)));
        assert!(two_minus_z_minus_w().reflect((0, 1)).is_err());
    }

    #[test]
    fn reflected_derivative_examples() {
        let (qz, qw) = one_minus_z3w2().reflected_derivatives();
        assert_eq!(qz.degree(), (2, 2));
        assert_eq!(qz, BivariatePolynomial::constant(r(-3.0), 2, 2));
        assert_eq!(qw, BivariatePolynomial::constant(r(-2.0), 3, 1));
        let (a, b) = BivariatePolynomial::constant(r(7.0), 2, 3).reflected_derivatives();
        assert!(a.is_zero() && b.is_zero());
    }

    #[test]
    fn symmetry_examples() {
        let s = one_minus_z3w2().symmetry_analysis(1e-12);
        assert_eq!(s.kind, SymmetryKind::EssentiallyT2Symmetric);
        assert!((s.constant.unwrap() - r(-1.0)).norm() < 1e-15);
        assert!((s.symmetrizing_factor.unwrap() - I).norm() < 1e-15);
        let s = z3_minus_w2().symmetry_analysis(1e-12);
        assert!((s.constant.unwrap() - r(-1.0)).norm() < 1e-15);
        assert_eq!(
            two_minus_z_minus_w().symmetry_analysis(1e-12).kind,
            SymmetryKind::NotSymmetric
        );
    }

    #[test]
    fn symmetrize_examples() {
        let q = one_minus_z3w2().symmetrize(1e-12).unwrap();
        assert_eq!(q, one_minus_z3w2().scaled(I));
        assert_eq!(q.reflected(), q);
        let p = z3_minus_w2().symmetrize(1e-12).unwrap();
        assert_eq!(p, z3_minus_w2().scaled(I));
        let sym = BivariatePolynomial::from_real_terms(1, 1, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(sym.symmetrize(1e-12).unwrap(), sym);
        assert_eq!(
            two_minus_z_minus_w().symmetrize(1e-12),
            Err(DvError::NotSymmetric)
        );
    }

    #[test]
    fn symmetrizing_factor_squares_to_conjugate_constant() {
        // q = e^{iθ}(1 + zw) has q̃ = e^{-iθ}(1 + zw), so c = e^{2iθ}.
        let ph = c64::from_polar(1.0, 0.7);
        let q = BivariatePolynomial::from_terms(1, 1, &[(0, 0, ph), (1, 1, ph)]).unwrap();
        let s = q.symmetry_analysis(1e-12);
        let c = s.constant.unwrap();
        assert!((c - ph * ph).norm() < 1e-14);
        let f = s.symmetrizing_factor.unwrap();
        assert!((f * f - c.conj()).norm() < 1e-14);
        let sq = q.symmetrize(1e-12).unwrap();
        assert!(sq.max_coeff_diff(&sq.reflected()) < 1e-14);
    }

    #[test]
    fn swap_examples() {
        assert_eq!(z3_minus_w2().swap_transform().unwrap(), one_minus_z3w2());
        assert_eq!(one_minus_z3w2().swap_transform().unwrap(), z3_minus_w2());
        let deficient = BivariatePolynomial::from_real_terms(2, 1, &[(1, 0, 1.0)]).unwrap();
        assert!(deficient.swap_transform().is_err());
    }

    #[test]
    fn derived_examples() {
        let d = z3_minus_w2().derived_dv_poly();
        let want = BivariatePolynomial::from_real_terms(3, 2, &[(3, 0, 6.0), (0, 2, 6.0)]).unwrap();
        assert_eq!(d, want);
        let s = one_minus_z3w2().derived_symmetric_poly();
        let want = BivariatePolynomial::from_real_terms(3, 2, &[(0, 0, 6.0), (3, 2, 6.0)]).unwrap();
        assert_eq!(s, want);
        let k = BivariatePolynomial::constant(r(2.0), 2, 3).derived_symmetric_poly();
        assert_eq!(k, BivariatePolynomial::constant(r(12.0), 2, 3));
    }

    #[test]
    fn json_round_trip_and_errors() {
        let p = z3_minus_w2().scaled(c64::new(0.5, -2.0));
        let s = serde_json::to_string(&p).unwrap();
        let back: BivariatePolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"degree":[1,1],"coeffs":[[[1,0],[0,0]],[[0,0]]]}"#;
        let e = serde_json::from_str::<BivariatePolynomial>(bad).unwrap_err();
        assert!(e.to_string().contains("coeffs"));
        let bad = r#"{"degree":[2,1],"coeffs":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        let e = serde_json::from_str::<BivariatePolynomial>(bad).unwrap_err();
        assert!(e.to_string().contains("degree"));
    }

    #[test]
    fn gradient_matches_partials() {
        let p = BivariatePolynomial::from_fn(3, 2, |i, j| c64::new(i as f64 - 1.0, j as f64 + 0.5));
        let (z, w) = (c64::new(0.3, -0.2), c64::new(-0.5, 0.4));
        let (v, vz, vw) = p.evaluate_with_gradient(z, w);
        assert!((v - p.evaluate(z, w)).norm() < 1e-14);
        assert!((vz - p.partial_z().evaluate(z, w)).norm() < 1e-14);
        assert!((vw - p.partial_w().evaluate(z, w)).norm() < 1e-14);
        let fib = p.fiber_in_w(z);
        assert!((crate::linalg::horner(&fib, w) - v).norm() < 1e-14);
        let fz = p.fiber_in_z(w);
        assert!((crate::linalg::horner(&fz, z) - v).norm() < 1e-14);
    }

    fn arb_c64() -> impl Strategy<Value = c64> {
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| c64::new(a, b))
    }

    fn arb_poly() -> impl Strategy<Value = BivariatePolynomial> {
        (0usize..=6, 0usize..=6).prop_flat_map(|(n, m)| {
            proptest::collection::vec(arb_c64(), (n + 1) * (m + 1)).prop_map(move |v| {
                BivariatePolynomial::from_fn(n, m, |i, j| v[i * (m + 1) + j])
            })
        })
    }

    fn arb_torus() -> impl Strategy<Value = (c64, c64)> {
        (0.0f64..std::f64::consts::TAU, 0.0f64..std::f64::consts::TAU)
            .prop_map(|(a, b)| (c64::from_polar(1.0, a), c64::from_polar(1.0, b)))
    }

    proptest! {
        #[test]
        fn reflect_is_an_exact_involution(p in arb_poly(), dn in 0usize..3, dm in 0usize..3) {
            let (n, m) = p.degree();
            let d = (n + dn, m + dm);
            let back = p.reflect(d).unwrap().reflect(d).unwrap();
            prop_assert_eq!(back, p.with_degree(d.0, d.1).unwrap());
        }

        #[test]
        fn reflection_preserves_modulus_on_torus(p in arb_poly(), pts in proptest::collection::vec(arb_torus(), 20)) {
            let t = p.reflected();
            let s = p.scale().max(1e-300);
            for (z, w) in pts {
                let d = (p.evaluate(z, w).norm() - t.evaluate(z, w).norm()).abs();
                prop_assert!(d <= 1e-12 * s, "{d}");
            }
        }

        #[test]
        fn swap_is_an_involution(p in arb_poly()) {
            let (n, _) = p.degree();
            prop_assume!((0..=p.degree().1).any(|j| p.coeff(n, j) != ZERO));
            prop_assume!((0..=p.degree().1).any(|j| p.coeff(0, j) != ZERO));
            let q = p.swap_transform().unwrap();
            prop_assert_eq!(q.swap_transform().unwrap(), p);
        }

        #[test]
        fn swap_preserves_symmetry_class(p in arb_poly()) {
            // Symmetrize a random polynomial by averaging with its reflection.
            let q = p.add(&p.reflected());
            prop_assume!(q.scale() > 1e-6);
            let (n, m) = q.degree();
            prop_assume!((0..=m).any(|j| q.coeff(n, j).norm() > 1e-9));
            let s = q.swap_transform().unwrap();
            prop_assert_ne!(s.symmetry_analysis(1e-10).kind, SymmetryKind::NotSymmetric);
        }

        #[test]
        fn reflected_derivative_formulas_hold(p in arb_poly()) {
            let (ez, ew) = reflection_derivative_residuals(&p);
            prop_assert!(ez <= 1e-12 && ew <= 1e-12, "{ez} {ew}");
        }

        #[test]
        fn symmetric_modulus_identity_holds(
            p in arb_poly(),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            z in arb_c64(),
            w in arb_c64(),
        ) {
            let q = p.add(&p.reflected());
            prop_assume!(q.scale() > 1e-6);
            let r = symmetric_modulus_residual(&q, a, b, z * 2.0, w * 2.0);
            prop_assert!(r <= 1e-9, "{r}");
        }

        #[test]
        fn derivatives_match_finite_differences(p in arb_poly(), z in arb_c64(), w in arb_c64()) {
            let (z, w) = (z * 0.7, w * 0.7);
            let h = 1e-5;
            let fz = (p.evaluate(z + h, w) - p.evaluate(z - h, w)) / (2.0 * h);
            let fw = (p.evaluate(z, w + h) - p.evaluate(z, w - h)) / (2.0 * h);
            let s = p.scale().max(1e-300);
            prop_assert!((fz - p.partial_z().evaluate(z, w)).norm() <= 1e-7 * s);
            prop_assert!((fw - p.partial_w().evaluate(z, w)).norm() <= 1e-7 * s);
        }
    }
}
