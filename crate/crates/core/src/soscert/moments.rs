//! Moments of the probability measure `c²/|q|² dm` on T².
//!
//! Two independent routes: a tensor trapezoid grid (the 2-D DFT of
//! `1/|q|²`), and a fibered rule that integrates each `w`-circle exactly by
//! residues and uses the trapezoid rule only in `z`. The fibered rule stays
//! cheap when zeros of `q` come close to T², which the dilation fallback
//! needs.

use std::f64::consts::TAU;

use faer::Mat;
use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::fmt_c;
use crate::error::{DvError, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::poly2::BivariatePolynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentMethod {
    Grid,
    Fibered,
}

/// `μ(a, b) = ∫ zᵃ wᵇ dρ` for `|a| ≤ n`, `|b| ≤ m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub q: BivariatePolynomial,
    /// `c` with `dρ = c²/|q|² dm`.
    pub normalizer_c: f64,
    /// Quadrature nodes per circle (the `z` circle for the fibered route).
    pub grid_size: usize,
    pub method: MomentMethod,
    range: (usize, usize),
    data: Vec<c64>,
}

impl MomentTable {
    pub fn range(&self) -> (usize, usize) {
        self.range
    }

    pub fn mu(&self, a: i64, b: i64) -> c64 {
        let (n, m) = (self.range.0 as i64, self.range.1 as i64);
        assert!(a.abs() <= n && b.abs() <= m, "moment ({a},{b}) outside table");
        self.data[((a + n) * (2 * m + 1) + b + m) as usize]
    }

    /// `G[r][c] = ⟨m_c, m_r⟩_ρ = μ(m_c − m_r)` for monomials `m = zⁱwʲ`.
    pub fn gram(&self, monomials: &[(usize, usize)]) -> CMat {
        Mat::from_fn(monomials.len(), monomials.len(), |r, c| {
            let (a, b) = (monomials[c].0 as i64 - monomials[r].0 as i64, monomials[c].1 as i64 - monomials[r].1 as i64);
            self.mu(a, b)
        })
    }

    fn max_diff(&self, other: &MomentTable) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Default tensor-grid resolution: the smallest power of two at least
/// `max(256, 16(n+m))`.
pub fn default_grid_size(q: &BivariatePolynomial) -> usize {
    let (n, m) = q.degree();
    256usize.max(16 * (n + m)).next_power_of_two()
}

/// Grid moments at `grid_size` and `2·grid_size`; the finer table is
/// returned when the two agree within `1e-9`.
pub fn compute_moments(q: &BivariatePolynomial, grid_size: usize) -> Result<MomentTable> {
    let coarse = grid_table(q, grid_size)?;
    let fine = grid_table(q, 2 * grid_size)?;
    let d = coarse.max_diff(&fine);
    if d > 1e-9 {
        return Err(DvError::QuadratureUnresolved(format!(
            "grid {grid_size} vs {}: moment change {d:.3e}",
            2 * grid_size
        )));
    }
    Ok(fine)
}

fn unit_roots(n: usize) -> Vec<c64> {
    (0..n).map(|k| c64::from_polar(1.0, TAU * k as f64 / n as f64)).collect()
}

fn grid_table(q: &BivariatePolynomial, size: usize) -> Result<MomentTable> {
    let (n, m) = q.degree();
    let roots = unit_roots(size);
    let thresh = 1e-10 * q.scale();
    let mb = 2 * m + 1;
    // Per z-row: S_b(z) = Σ_k w_k^b / |q(z, w_k)|² for b in −m..=m.
    let rows: Vec<Result<Vec<c64>>> = (0..size)
        .into_par_iter()
        .map(|i| {
            let z = roots[i];
            let mut s = vec![ZERO; mb];
            for (k, &w) in roots.iter().enumerate() {
                let v = q.evaluate(z, w);
                if v.norm() <= thresh {
                    return Err(DvError::ZeroOnTorus(format!("q({}, {}) ≈ 0", fmt_c(z), fmt_c(w))));
                }
                let d = 1.0 / v.norm_sqr();
                for (bi, sb) in s.iter_mut().enumerate() {
                    let b = bi as i64 - m as i64;
                    let idx = ((k as i64 * b).rem_euclid(size as i64)) as usize;
                    *sb += roots[idx] * d;
                }
            }
            Ok(s)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut data = vec![ZERO; (2 * n + 1) * mb];
    for (i, s) in rows.iter().enumerate() {
        for a in -(n as i64)..=(n as i64) {
            let za = roots[((i as i64 * a).rem_euclid(size as i64)) as usize];
            let base = ((a + n as i64) as usize) * mb;
            for (bi, sb) in s.iter().enumerate() {
                data[base + bi] += za * sb;
            }
        }
    }
    finish(q, data, (n, m), size, MomentMethod::Grid)
}

/// Normalizes raw sums so that `μ(0,0) = 1`.
fn finish(
    q: &BivariatePolynomial,
    mut data: Vec<c64>,
    range: (usize, usize),
    size: usize,
    method: MomentMethod,
) -> Result<MomentTable> {
    let (n, m) = range;
    let total = data[n * (2 * m + 1) + m].re;
    if !(total.is_finite() && total > 0.0) {
        return Err(DvError::QuadratureUnresolved("non-positive total mass".into()));
    }
    for d in data.iter_mut() {
        *d /= total;
    }
    // c² = 1 / mean(1/|q|²); the raw total is size² (or size) times that mean.
    let per_node = match method {
        MomentMethod::Grid => (size * size) as f64,
        MomentMethod::Fibered => size as f64,
    };
    Ok(MomentTable {
        q: q.clone(),
        normalizer_c: (per_node / total).sqrt(),
        grid_size: size,
        method,
        range,
        data,
    })
}

/// `I_b = ∫_T wᵇ / |f(w)|² dm(w)` for `b = 0..=bmax`.
///
/// With `g(w) = w^d conj(f)(1/w)`, the integrand equals
/// `w^{b+d−1} / (f g)(w)` times `dw/2πi`, so `I_b` is the sum of residues
/// at the roots of `f g` inside the disk. Falls back to an adaptive
/// trapezoid rule when poles nearly collide.
pub fn fiber_moments(f: &[c64], bmax: usize) -> Result<Vec<c64>> {
    let f = linalg::trim_univariate(f, 1e-14);
    if f.is_empty() {
        return Err(DvError::ZeroOnTorus("fiber polynomial vanishes identically".into()));
    }
    let d = f.len() - 1;
    if d == 0 {
        let mut out = vec![ZERO; bmax + 1];
        out[0] = c64::new(1.0 / f[0].norm_sqr(), 0.0);
        return Ok(out);
    }
    let scale = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if f[0].norm() <= 1e-12 * scale {
        return fiber_moments_trapezoid(f, bmax);
    }
    let omegas = linalg::poly_roots(f)?;
    if omegas.len() != d {
        return fiber_moments_trapezoid(f, bmax);
    }
    for w in &omegas {
        if (w.norm() - 1.0).abs() <= 1e-9 {
            return Err(DvError::ZeroOnTorus(format!("fiber root {} on T", fmt_c(*w))));
        }
    }
    let mut poles: Vec<c64> = omegas.clone();
    poles.extend(omegas.iter().map(|w| ONE / w.conj()));
    let mut sep = f64::INFINITY;
    for i in 0..poles.len() {
        for j in 0..i {
            sep = sep.min((poles[i] - poles[j]).norm());
        }
    }
    if sep < 1e-6 {
        return fiber_moments_trapezoid(f, bmax);
    }
    let lead = f[d] * f[0].conj();
    let mut out = vec![ZERO; bmax + 1];
    for (k, &rho) in poles.iter().enumerate() {
        if rho.norm() >= 1.0 {
            continue;
        }
        let mut deriv = lead;
        for (l, &tau) in poles.iter().enumerate() {
            if l != k {
                deriv *= rho - tau;
            }
        }
        let mut pw = rho.powu((d - 1) as u32) / deriv;
        for o in out.iter_mut() {
            *o += pw;
            pw *= rho;
        }
    }
    Ok(out)
}

/// Trapezoid rule on the circle, doubling until successive values agree.
fn fiber_moments_trapezoid(f: &[c64], bmax: usize) -> Result<Vec<c64>> {
    let mut k = 64usize;
    let eval = |k: usize| -> Result<Vec<c64>> {
        let mut out = vec![ZERO; bmax + 1];
        for j in 0..k {
            let w = c64::from_polar(1.0, TAU * j as f64 / k as f64);
            let v = linalg::horner(f, w);
            if v.norm() == 0.0 {
                return Err(DvError::ZeroOnTorus(format!("fiber vanishes at {}", fmt_c(w))));
            }
            let d = 1.0 / v.norm_sqr();
            let mut pw = ONE;
            for o in out.iter_mut() {
                *o += pw * d;
                pw *= w;
            }
        }
        Ok(out.into_iter().map(|x| x / k as f64).collect())
    };
    let mut prev = eval(k)?;
    while k < (1 << 18) {
        k *= 2;
        let cur = eval(k)?;
        let diff = cur.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if diff <= 1e-14 * cur[0].norm() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(DvError::QuadratureUnresolved("fiber trapezoid rule did not settle".into()))
}

/// Fibered moments: exact inner integrals in `w`, trapezoid rule in `z`
/// with node doubling until the table changes by at most `1e-13`.
pub fn compute_moments_fibered(q: &BivariatePolynomial, max_nodes: usize) -> Result<MomentTable> {
    let (n, m) = q.degree();
    let mb = 2 * m + 1;
    let sums_at = |zs: &[c64]| -> Result<Vec<c64>> {
        let rows: Vec<Result<(c64, Vec<c64>)>> = zs
            .par_iter()
            .map(|&z| fiber_moments(&q.fiber_in_w(z), m).map(|v| (z, v)))
            .collect();
        let mut data = vec![ZERO; (2 * n + 1) * mb];
        for row in rows {
            let (z, ib) = row?;
            let zinv = z.conj();
            for a in -(n as i64)..=(n as i64) {
                let za = if a >= 0 { z.powu(a as u32) } else { zinv.powu((-a) as u32) };
                let base = ((a + n as i64) as usize) * mb;
                for b in 0..=m {
                    data[base + m + b] += za * ib[b];
                    if b > 0 {
                        data[base + m - b] += za * ib[b].conj();
                    }
                }
            }
        }
        Ok(data)
    };
    let mut size = 64usize;
    let mut sums = sums_at(&unit_roots(size))?;
    let mut table = finish(q, sums.clone(), (n, m), size, MomentMethod::Fibered)?;
    while size < max_nodes {
        // The doubled grid's new nodes are the odd multiples of π/size.
        let fresh: Vec<c64> = (0..size)
            .map(|k| c64::from_polar(1.0, TAU * (2 * k + 1) as f64 / (2 * size) as f64))
            .collect();
        let add = sums_at(&fresh)?;
        for (s, a) in sums.iter_mut().zip(add) {
            *s += a;
        }
        size *= 2;
        let next = finish(q, sums.clone(), (n, m), size, MomentMethod::Fibered)?;
        let d = next.max_diff(&table);
        table = next;
        if d <= 1e-13 {
            return Ok(table);
        }
    }
    Err(DvError::QuadratureUnresolved(format!(
        "fibered moments unsettled at {size} nodes"
    )))
}
