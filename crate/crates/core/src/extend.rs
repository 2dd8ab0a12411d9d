//! Bounded extensions from a distinguished variety to the bidisk.
//!
//! With `Φ(z)Q⃗(z,w) = wQ⃗(z,w)` on `V` and `Q⃗(z,w) = Q(z)(1, w, …)ᵗ`,
//!
//! ```text
//! F(z,w) = (1, 0, …, 0) Q(z)⁻¹ f(zI, Φ(z)) Q⃗(z,w)
//! ```
//!
//! agrees with `f` on `V`, and `|F| ≤ C sup_V |f|` on the bidisk with
//! `C = √m sup_z ‖Q(z)⁻¹‖‖Q(z)‖`.

use std::f64::consts::TAU;

use faer::Mat;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::classify;
use crate::dvrep::{self, DvCertificate, UnitaryRealization, VarietySample};
use crate::error::{DvError, Result};
use crate::grid;
use crate::linalg::{self, CMat};
use crate::poly2::{self, BivariatePolynomial, VectorPolynomial};
use crate::report::VerificationReport;
use crate::soscert::MatrixPolynomial;

/// Band around the unit circle within which fiber roots count as unimodular.
const UNIMODULAR_TOL: f64 = 1e-6;

/// `Σ c_jk z^j Φᵏ`, by Horner in `Φ` with scalar coefficients.
pub fn eval_f_of_pair(f: &BivariatePolynomial, z: c64, phi: &CMat) -> CMat {
    let m = phi.nrows();
    let (_, b) = f.degree();
    let col = f.fiber_in_w(z);
    let mut acc: CMat = Mat::zeros(m, m);
    for k in (0..=b).rev() {
        acc = &acc * phi;
        for i in 0..m {
            acc[(i, i)] += col[k];
        }
    }
    acc
}

/// The extension of `f` from `V = Z(p)` built from a realization and the
/// vector `Q⃗` it intertwines.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionOperator {
    pub p: BivariatePolynomial,
    pub rep: UnitaryRealization,
    pub q_vec: VectorPolynomial,
    pub q_matrix: MatrixPolynomial,
    pub f: BivariatePolynomial,
}

impl ExtensionOperator {
    pub fn new(
        p: BivariatePolynomial,
        rep: UnitaryRealization,
        q_vec: VectorPolynomial,
        q_matrix: MatrixPolynomial,
        f: BivariatePolynomial,
    ) -> Result<Self> {
        let m = rep.m;
        if q_vec.len() != m || q_matrix.rows() != m || q_matrix.cols() != m {
            return Err(DvError::Dimension(format!(
                "realization has m = {m}, Q has {} components and a {}×{} matrix form",
                q_vec.len(),
                q_matrix.rows(),
                q_matrix.cols()
            )));
        }
        Ok(ExtensionOperator {
            p,
            rep,
            q_vec,
            q_matrix,
            f,
        })
    }

    pub fn from_certificate(rep: UnitaryRealization, cert: &DvCertificate, f: BivariatePolynomial) -> Result<Self> {
        Self::new(cert.p.clone(), rep, cert.q_vec.clone(), cert.q_matrix.clone(), f)
    }

    /// The family `wᵐ = b(z)` with `Q⃗ = (1, w, …, w^{m−1})ᵗ`.
    pub fn blaschke(zeros: &[c64], m: usize, f: BivariatePolynomial) -> Result<Self> {
        let rep = dvrep::blaschke_realization(zeros, m)?;
        let (q_vec, q_matrix) = dvrep::monomial_q(zeros.len(), m);
        Self::new(dvrep::blaschke_polynomial(zeros, m), rep, q_vec, q_matrix, f)
    }

    pub fn with_f(&self, f: BivariatePolynomial) -> Self {
        ExtensionOperator { f, ..self.clone() }
    }

    /// Coefficients in w of `F(z, ·)`: the row `e₁ᵗ Q(z)⁻¹ f(zI, Φ(z)) Q(z)`.
    pub fn fiber_coefficients(&self, z: c64) -> Result<Vec<c64>> {
        let m = self.rep.m;
        let phi = dvrep::phi_evaluate(&self.rep, z)?;
        let qz = self.q_matrix.eval(z);
        let rhs = eval_f_of_pair(&self.f, z, &phi) * &qz;
        let sol = linalg::solve(&qz, &rhs, 1e-13)?;
        Ok((0..m).map(|j| sol[(0, j)]).collect())
    }
}

/// `F(z, w)`, with `Q(z)⁻¹` applied by a linear solve.
pub fn extend(op: &ExtensionOperator, z: c64, w: c64) -> Result<c64> {
    let phi = dvrep::phi_evaluate(&op.rep, z)?;
    let q = poly2::evaluate_vector(&op.q_vec, z, w);
    let rhs = eval_f_of_pair(&op.f, z, &phi) * linalg::column(&q);
    let sol = linalg::solve(&op.q_matrix.eval(z), &rhs, 1e-13)?;
    Ok(sol[(0, 0)])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `√m · max ‖Q(z)⁻¹‖‖Q(z)‖` over the disk grid.
    #[serde(rename = "C")]
    pub c: f64,
    /// `max ‖Q(z)⁻¹‖ |Q⃗(z,w)|` over the bidisk grid.
    pub per_point_bound: f64,
    pub sup_f_on_v: f64,
    /// `max |F|` over the bidisk grid.
    pub sup_f_on_bidisk: f64,
    /// Constant of the pipeline with `z` and `w` exchanged, when computed.
    #[serde(rename = "C_swapped", default, skip_serializing_if = "Option::is_none")]
    pub c_swapped: Option<f64>,
}

impl BoundReport {
    /// The smaller of the two constants.
    pub fn best_c(&self) -> f64 {
        self.c_swapped.map_or(self.c, |c| c.min(self.c))
    }
}

/// Extension constants and sup estimates for `op` on grids of size
/// `grid_n`.
pub fn extension_bound(op: &ExtensionOperator, grid_n: usize) -> Result<BoundReport> {
    let m = op.rep.m;
    let mut zs = grid::circle(grid_n, 1.0);
    zs.extend(grid::closed_disk(grid_n));
    let mut kappa = 0.0f64;
    for &z in &zs {
        let sv = linalg::singular_values(&op.q_matrix.eval(z))?;
        let (hi, lo) = (sv[0], sv[sv.len() - 1]);
        if lo <= 1e-14 * hi {
            return Err(DvError::Singular(format!("Q(z) at z = {}", classify::fmt_c(z))));
        }
        kappa = kappa.max(hi / lo);
    }
    let disk = grid::closed_disk(grid_n);
    let mut per_point = 0.0f64;
    let mut sup_f = 0.0f64;
    for &z in &disk {
        let lo = linalg::min_singular_value(&op.q_matrix.eval(z))?;
        let coeffs = op.fiber_coefficients(z)?;
        for &w in &disk {
            per_point = per_point.max(linalg::vec_norm(&poly2::evaluate_vector(&op.q_vec, z, w)) / lo);
            sup_f = sup_f.max(linalg::horner(&coeffs, w).norm());
        }
    }
    Ok(BoundReport {
        c: (m as f64).sqrt() * kappa,
        per_point_bound: per_point,
        sup_f_on_v: sup_norm_on_variety(&op.f, &op.p, grid_n),
        sup_f_on_bidisk: sup_f,
        c_swapped: None,
    })
}

/// `max |f|` over unimodular fiber roots at `z`, or `None` when there are
/// none.
fn torus_fiber_max(f: &BivariatePolynomial, p: &BivariatePolynomial, z: c64) -> Option<f64> {
    let roots = classify::fiber_roots(p, z).ok()?;
    roots
        .into_iter()
        .filter(|w| (w.norm() - 1.0).abs() <= UNIMODULAR_TOL)
        .map(|w| f.evaluate(z, w / w.norm()).norm())
        .reduce(f64::max)
}

/// `sup |f|` over `V ∩ T²`: a sweep of `8·grid_n` angles, refined around
/// the best angle by golden-section search.
pub fn sup_norm_on_variety(f: &BivariatePolynomial, p: &BivariatePolynomial, grid_n: usize) -> f64 {
    let count = 8 * grid_n.max(8);
    let at = |t: f64| torus_fiber_max(f, p, c64::from_polar(1.0, t)).unwrap_or(0.0);
    let (mut best, mut arg) = (0.0f64, 0.0);
    for k in 0..count {
        let t = TAU * k as f64 / count as f64;
        let v = at(t);
        if v > best {
            (best, arg) = (v, t);
        }
    }
    let h = TAU / count as f64;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (arg - h, arg + h);
    for _ in 0..60 {
        let (a, b) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (fa, fb) = (at(a), at(b));
        best = best.max(fa).max(fb);
        if fa > fb {
            hi = b;
        } else {
            lo = a;
        }
    }
    best
}

/// Checks `F = f` on the sample, the bound `max|F| ≤ C sup_V|f|` on the
/// bidisk grid, the norm step `‖f(zI, Φ(z))‖ ≤ sup_V|f|` at 100 seeded
/// points, and that interior samples stay below the boundary estimate.
pub fn verify_extension(op: &ExtensionOperator, sample: &VarietySample, grid_n: usize) -> VerificationReport {
    let mut r = VerificationReport::new();
    let bound = match extension_bound(op, grid_n) {
        Ok(b) => b,
        Err(e) => {
            r.error("extension bound", &e.to_string());
            return r;
        }
    };
    verify_with_bound(op, sample, &bound, &mut r);
    r
}

pub(crate) fn verify_with_bound(
    op: &ExtensionOperator,
    sample: &VarietySample,
    bound: &BoundReport,
    r: &mut VerificationReport,
) {
    let sup = bound.sup_f_on_v;
    let mut resid = 0.0f64;
    let mut interior = 0.0f64;
    for &(z, w) in &sample.points {
        let fv = op.f.evaluate(z, w);
        interior = interior.max(fv.norm());
        match extend(op, z, w) {
            Ok(v) => resid = resid.max((v - fv).norm()),
            Err(_) => resid = f64::NAN,
        }
    }
    r.at_most("on-variety residual", resid / (1.0 + sup), 1e-7);
    r.at_most("interior samples below boundary sup", interior - sup, 1e-7);
    r.at_most(
        "grid bound",
        bound.sup_f_on_bidisk - bound.c * sup,
        1e-6 * op.f.scale().max(1.0),
    );
    if sup > 0.0 {
        r.at_most("ratio", bound.sup_f_on_bidisk / sup, bound.c + 1e-6);
    } else {
        r.skip("ratio", "f vanishes on the variety");
    }
    let mut rng = grid::rng(0xe7_7e4d);
    let norm_step = grid::random_disk(&mut rng, 100, 1.0).iter().try_fold(f64::NEG_INFINITY, |acc, &z| {
        let phi = dvrep::phi_evaluate(&op.rep, z)?;
        Ok::<f64, DvError>(acc.max(linalg::op_norm(&eval_f_of_pair(&op.f, z, &phi))? - sup))
    });
    match norm_step {
        Ok(v) => r.at_most("norm of f(zI, Φ(z))", v, 1e-7),
        Err(e) => r.error("norm of f(zI, Φ(z))", &e.to_string()),
    };
}

/// Extension constant of the pipeline run on `p` with `z` and `w`
/// exchanged.
pub fn swapped_constant(p: &BivariatePolynomial, a: f64, b: f64, seed: u64, grid_n: usize) -> Result<f64> {
    let pt = p.transpose();
    let out = dvrep::represent(&pt, a, b, seed, None)?;
    let zero = BivariatePolynomial::zeros(0, 0);
    let op = ExtensionOperator::from_certificate(out.rep, &out.cert, zero)?;
    Ok(extension_bound(&op, grid_n)?.c)
}
