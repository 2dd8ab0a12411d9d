//! Where a zero set sits relative to the bidisk.
//!
//! Sampling can exhibit a counterexample but cannot prove its absence, so
//! affirmative labels mean "no violation found at this resolution". The
//! report always records the resolution and tolerance that were used.

use std::f64::consts::TAU;

use faer::Mat;
use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DvError, Result};
use crate::grid;
use crate::linalg::{self, ZERO};
use crate::poly2::{BivariatePolynomial, SymmetryKind};

/// Exclusion band around T² (max metric) for the margin grids.
pub const TORUS_MARGIN: f64 = 0.02;
/// Absolute radius within which fiber roots count as one multiple root.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Largest radius of the open-disk fiber sweeps.
const OPEN_RADIUS: f64 = 1.0 - TORUS_MARGIN;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroLabel {
    /// No zeros on the open bidisk.
    StableOpen,
    /// No zeros on the closed bidisk.
    StableClosed,
    /// Zeros contained in D² ∪ T² ∪ E².
    DVDefining,
    /// No zeros on the closed bidisk except on T².
    SymmetricNonvanishingOffTorus,
    Indeterminate,
}

impl ZeroLabel {
    pub fn is_affirmative(self) -> bool {
        self != ZeroLabel::Indeterminate
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub grid_n: usize,
    pub fiber_points: usize,
    pub bidisk_points: usize,
    pub torus_margin: f64,
    pub ring_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroClass {
    pub label: ZeroLabel,
    /// Points in a forbidden region where `p` is small; empty when the label
    /// is affirmative.
    pub witnesses: Vec<(c64, c64)>,
    pub grid: GridInfo,
    pub tol: f64,
    /// Number of fiber roots in the disk, when it was constant.
    pub root_count: Option<usize>,
    pub squarefree: bool,
    /// One line per test that failed, in evaluation order.
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub points: Vec<(c64, c64)>,
    pub smooth_on_torus: bool,
}

/// Roots in `w` of `p(z, ·)`, with multiplicity.
///
/// When the w-leading coefficient vanishes at `z` the fiber has lower
/// degree and fewer roots.
pub fn fiber_roots(p: &BivariatePolynomial, z: c64) -> Result<Vec<c64>> {
    let f = p.fiber_in_w(z);
    let fs = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if fs <= 1e-14 * p.scale().max(f64::MIN_POSITIVE) {
        return Err(DvError::FiberDegenerate(fmt_c(z)));
    }
    linalg::poly_roots(&f)
}

/// Default node count for [`root_count_in_disk`].
pub fn default_quad_points(p: &BivariatePolynomial) -> usize {
    let (n, m) = p.degree();
    256usize.max(16 * (n + m))
}

/// Number of roots of `p(z, ·)` in the unit disk, by the trapezoid rule for
/// `(1/2πi)∮ p_w/p dw`, doubling the node count until two successive
/// values round to the same integer.
pub fn root_count_in_disk(p: &BivariatePolynomial, z: c64, quad_points: usize) -> Result<usize> {
    let f = p.fiber_in_w(z);
    let df: Vec<c64> = (1..f.len()).map(|j| f[j] * j as f64).collect();
    let scale = f.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(DvError::FiberDegenerate(fmt_c(z)));
    }
    let integral = |q: usize| -> Result<f64> {
        let mut acc = ZERO;
        let mut minmod = f64::INFINITY;
        for k in 0..q {
            let w = c64::from_polar(1.0, TAU * k as f64 / q as f64);
            let v = linalg::horner(&f, w);
            minmod = minmod.min(v.norm());
            acc += w * linalg::horner(&df, w) / v;
        }
        if minmod <= 1e-10 * scale {
            return Err(DvError::ZeroOnFiberCircle(fmt_c(z)));
        }
        Ok((acc / q as f64).re)
    };
    let mut q = quad_points.max(8);
    let mut prev = integral(q)?;
    for _ in 0..6 {
        q *= 2;
        let cur = integral(q)?;
        let (rp, rc) = (prev.round(), cur.round());
        if rp == rc && (cur - rc).abs() <= 0.25 && (prev - rp).abs() <= 0.25 {
            return Ok(rc.max(0.0) as usize);
        }
        prev = cur;
    }
    Err(DvError::QuadratureUnresolved(format!(
        "z = {}, last value {prev:.6}",
        fmt_c(z)
    )))
}

/// Whether `p` has no repeated factor, judged by the Sylvester matrix of
/// `(p, p_w)` in `w` and of `(p, p_z)` in `z` at five fixed generic points.
/// A direction counts as repeated only if all five resultants vanish.
pub fn is_squarefree(p: &BivariatePolynomial) -> bool {
    direction_squarefree(p) && direction_squarefree(&p.transpose())
}

fn direction_squarefree(p: &BivariatePolynomial) -> bool {
    if p.degree().1 == 0 {
        return true;
    }
    let mut rng = grid::rng(0x5eed_f00d);
    let zs = grid::random_disk(&mut rng, 5, 0.9);
    zs.iter().any(|&z| {
        let f = p.fiber_in_w(z);
        let f = linalg::trim_univariate(&f, 1e-13);
        if f.len() <= 2 {
            return true;
        }
        let df: Vec<c64> = (1..f.len()).map(|j| f[j] * j as f64).collect();
        sylvester_nonsingular(f, &df)
    })
}

fn sylvester_nonsingular(f: &[c64], g: &[c64]) -> bool {
    let normalize = |v: &[c64]| -> Vec<c64> {
        let s = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        v.iter().map(|c| c / s).collect()
    };
    let (f, g) = (normalize(f), normalize(g));
    let (df, dg) = (f.len() - 1, g.len() - 1);
    let size = df + dg;
    let mut s = Mat::<c64>::zeros(size, size);
    for r in 0..dg {
        for (k, &c) in f.iter().enumerate() {
            s[(r, r + k)] = c;
        }
    }
    for r in 0..df {
        for (k, &c) in g.iter().enumerate() {
            s[(dg + r, r + k)] = c;
        }
    }
    match linalg::singular_values(&s) {
        Ok(sv) => sv[sv.len() - 1] > 1e-10 * sv[0],
        Err(_) => false,
    }
}

struct Sweep {
    witnesses: Vec<(c64, c64)>,
    notes: Vec<String>,
}

impl Sweep {
    fn new() -> Self {
        Sweep {
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, note: String, witness: Option<(c64, c64)>) {
        self.notes.push(note);
        if let Some(x) = witness {
            self.witnesses.push(x);
        }
    }

    fn ok(&self) -> bool {
        self.notes.is_empty()
    }
}

struct Ctx<'a> {
    p: &'a BivariatePolynomial,
    scale: f64,
    tol: f64,
    ring_tol: f64,
    open_fibers: Vec<c64>,
    closed_fibers: Vec<c64>,
    circle: Vec<c64>,
    margin_grid: Vec<(c64, c64)>,
    open_bidisk: Vec<(c64, c64)>,
    closed_bidisk: Vec<(c64, c64)>,
}

/// Fiber roots over every point of `zs`, in index order.
fn sweep_roots(p: &BivariatePolynomial, zs: &[c64]) -> Vec<(c64, Result<Vec<c64>>)> {
    zs.par_iter().map(|&z| (z, fiber_roots(p, z))).collect()
}

/// Minimum of `|p|` over `pts` and its location.
fn min_modulus(p: &BivariatePolynomial, pts: &[(c64, c64)]) -> (f64, (c64, c64)) {
    let (v, k) = grid::par_argmin(pts, |&(z, w)| p.evaluate(z, w).norm());
    (v, pts.get(k).copied().unwrap_or((ZERO, ZERO)))
}

/// Smallest fiber-root modulus over the circle of radius `r`, with the best
/// sampled angles refined by golden-section search. Returns the modulus and
/// the point where it occurs; `None` when no fiber has roots.
///
/// Over a closed disk this is the minimum over the whole disk: on each
/// branch `1/w(z)` is analytic away from roots at `w = 0`, which the
/// interior sweeps catch separately.
fn min_root_modulus_on_circle(p: &BivariatePolynomial, r: f64, count: usize) -> Option<(f64, (c64, c64))> {
    let at = |theta: f64| -> Option<(f64, (c64, c64))> {
        let z = c64::from_polar(r, theta);
        let roots = fiber_roots(p, z).ok()?;
        roots
            .into_iter()
            .map(|w| (w.norm(), (z, w)))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    };
    let h = TAU / count as f64;
    let samples: Vec<Option<(f64, (c64, c64))>> =
        (0..count).into_par_iter().map(|k| at(h * k as f64)).collect();
    let mut order: Vec<usize> = (0..count).filter(|&k| samples[k].is_some()).collect();
    order.sort_by(|&a, &b| samples[a].unwrap().0.total_cmp(&samples[b].unwrap().0).then(a.cmp(&b)));
    let mut best = order.first().and_then(|&k| samples[k])?;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for &k in order.iter().take(4) {
        let (mut a, mut b) = (h * (k as f64 - 1.0), h * (k as f64 + 1.0));
        let val = |t: f64| at(t).map(|x| x.0).unwrap_or(f64::INFINITY);
        let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
        let (mut fc, mut fd) = (val(c), val(d));
        for _ in 0..60 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = val(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = val(d);
            }
        }
        if let Some(x) = at(0.5 * (a + b)) {
            if x.0 < best.0 {
                best = x;
            }
        }
    }
    Some(best)
}

/// Points of the closed bidisk at max-metric distance at least the margin
/// from T².
fn margin_grid(grid_n: usize) -> Vec<(c64, c64)> {
    grid::closed_bidisk(grid_n)
        .into_iter()
        .filter(|(z, w)| (1.0 - z.norm()).max(1.0 - w.norm()) >= TORUS_MARGIN)
        .collect()
}

/// Roots of the w-leading coefficient in the closed disk whose fiber
/// vanishes identically there (vertical lines of zeros).
fn vertical_lines(p: &BivariatePolynomial) -> Vec<c64> {
    let lead = p.leading_w_coefficient();
    let roots = linalg::poly_roots(&lead).unwrap_or_default();
    roots
        .into_iter()
        .filter(|z0| z0.norm() <= 1.0 + 1e-9)
        .filter(|&z0| {
            let f = p.fiber_in_w(z0);
            f.iter().map(|c| c.norm()).fold(0.0, f64::max) <= 1e-9 * p.scale()
        })
        .collect()
}

impl<'a> Ctx<'a> {
    fn new(p: &'a BivariatePolynomial, grid_n: usize, tol: f64) -> Self {
        let fiber_n = (grid_n * grid_n / 4).max(grid_n);
        Ctx {
            p,
            scale: p.scale(),
            tol,
            ring_tol: ring_tol(tol),
            open_fibers: grid::open_disk(fiber_n, OPEN_RADIUS),
            closed_fibers: grid::closed_disk(fiber_n),
            circle: grid::circle(grid_n.max(16) * 4, 1.0),
            margin_grid: margin_grid(grid_n),
            open_bidisk: grid::closed_bidisk(grid_n)
                .into_iter()
                .map(|(z, w)| (z * OPEN_RADIUS, w * OPEN_RADIUS))
                .collect(),
            closed_bidisk: grid::closed_bidisk(grid_n),
        }
    }

    fn dv_test(&self) -> (Sweep, Option<usize>) {
        let p = self.p;
        let (_, m) = p.degree();
        let mut s = Sweep::new();
        if m == 0 {
            s.fail("w-degree is zero; no fiber roots".into(), None);
            return (s, None);
        }
        let lead_roots = linalg::poly_roots(&p.leading_w_coefficient()).unwrap_or_default();
        for z0 in lead_roots {
            if z0.norm() <= 1.0 + self.tol {
                s.fail(
                    format!("w-leading coefficient vanishes at z = {} in the closed disk", fmt_c(z0)),
                    Some((z0, ZERO)),
                );
            }
        }
        let p0 = p.fiber_in_z(ZERO);
        let p0t = linalg::trim_univariate(&p0, 1e-13);
        if p0t.len() != p0.len() {
            s.fail("p(z, 0) has lower degree than n".into(), None);
        }
        for z0 in linalg::poly_roots(&p0).unwrap_or_default() {
            if z0.norm() >= 1.0 - self.tol {
                s.fail(
                    format!("p(z, 0) vanishes at z = {} outside the disk", fmt_c(z0)),
                    Some((z0, ZERO)),
                );
            }
        }
        for (z, roots) in sweep_roots(p, &self.open_fibers) {
            match roots {
                Err(e) => s.fail(e.to_string(), Some((z, ZERO))),
                Ok(r) => {
                    if r.len() != m {
                        s.fail(format!("fiber at z = {} has {} roots", fmt_c(z), r.len()), None);
                    }
                    for w in r {
                        if w.norm() >= 1.0 - self.tol {
                            s.fail(
                                format!("fiber root |w| = {:.6} over z = {}", w.norm(), fmt_c(z)),
                                Some((z, w)),
                            );
                        }
                    }
                }
            }
        }
        for (z, roots) in sweep_roots(p, &self.circle) {
            match roots {
                Err(e) => s.fail(e.to_string(), Some((z, ZERO))),
                Ok(r) => {
                    for w in r {
                        if (w.norm() - 1.0).abs() > self.ring_tol {
                            s.fail(
                                format!("boundary fiber root |w| = {:.6} over z = {}", w.norm(), fmt_c(z)),
                                Some((z, w)),
                            );
                        }
                    }
                }
            }
        }
        let mut count = None;
        let probes: Vec<c64> = [0.0, 0.45, 0.9]
            .iter()
            .flat_map(|&r| grid::circle(3, r).into_iter().map(move |z| z * c64::from_polar(1.0, r)))
            .collect();
        let qp = default_quad_points(p);
        for z in probes {
            match root_count_in_disk(p, z, qp) {
                Ok(k) if k == m && count.is_none() => count = Some(k),
                Ok(k) if k == m => {}
                Ok(k) => s.fail(format!("root count {k} != {m} at z = {}", fmt_c(z)), None),
                Err(e) => s.fail(e.to_string(), None),
            }
        }
        if s.ok() {
            match p.swap_transform() {
                Err(e) => s.fail(e.to_string(), None),
                Ok(q) => {
                    let (v, (z, w)) = min_modulus(&q, &self.margin_grid);
                    if v <= self.tol * self.scale {
                        // A zero of q at (z, w) is a zero of p at (1/z, w).
                        let pz = if z.norm() > 0.0 { 1.0 / z } else { c64::new(f64::INFINITY, 0.0) };
                        s.fail(format!("swapped polynomial small ({v:.3e}) off T²"), Some((pz, w)));
                    }
                }
            }
        }
        (s, count)
    }

    fn sym_off_torus_test(&self) -> Sweep {
        let p = self.p;
        let mut s = Sweep::new();
        for z0 in vertical_lines(p) {
            s.fail(format!("vertical line of zeros at z = {}", fmt_c(z0)), Some((z0, ZERO)));
        }
        let p0 = p.fiber_in_z(ZERO);
        if p0.iter().all(|c| c.norm() <= 1e-13 * self.scale) {
            s.fail("p vanishes on the line w = 0".into(), Some((ZERO, ZERO)));
        } else {
            for z0 in linalg::poly_roots(&p0).unwrap_or_default() {
                if z0.norm() <= 1.0 + self.tol {
                    s.fail(format!("p(z, 0) vanishes at z = {}", fmt_c(z0)), Some((z0, ZERO)));
                }
            }
        }
        for (z, roots) in sweep_roots(p, &self.open_fibers) {
            if let Ok(r) = roots {
                for w in r {
                    if w.norm() <= 1.0 + self.tol {
                        s.fail(
                            format!("fiber root |w| = {:.6} over z = {}", w.norm(), fmt_c(z)),
                            Some((z, w)),
                        );
                    }
                }
            }
        }
        for (z, roots) in sweep_roots(p, &self.circle) {
            if let Ok(r) = roots {
                for w in r {
                    if w.norm() < 1.0 - self.ring_tol {
                        s.fail(
                            format!("boundary fiber root |w| = {:.6} over z = {}", w.norm(), fmt_c(z)),
                            Some((z, w)),
                        );
                    }
                }
            }
        }
        let (v, x) = min_modulus(p, &self.margin_grid);
        if v <= self.tol * self.scale {
            s.fail(format!("|p| = {v:.3e} off T²"), Some(x));
        }
        s
    }

    fn stable_test(&self, closed: bool) -> Sweep {
        let p = self.p;
        let mut s = Sweep::new();
        for z0 in vertical_lines(p) {
            if closed || z0.norm() < 1.0 {
                s.fail(format!("vertical line of zeros at z = {}", fmt_c(z0)), Some((z0, ZERO)));
            }
        }
        // Closed: roots over the closed disk must leave the closed disk.
        // Open: roots over the open disk must avoid the open disk.
        let (zs, pts) = if closed {
            (&self.closed_fibers, &self.closed_bidisk)
        } else {
            (&self.open_fibers, &self.open_bidisk)
        };
        for (z, roots) in sweep_roots(p, zs) {
            if let Ok(r) = roots {
                for w in r {
                    let bad = if closed {
                        w.norm() <= 1.0 + self.tol
                    } else {
                        w.norm() < 1.0 - self.ring_tol
                    };
                    if bad {
                        s.fail(
                            format!("fiber root |w| = {:.6} over z = {}", w.norm(), fmt_c(z)),
                            Some((z, w)),
                        );
                    }
                }
            }
        }
        if closed {
            if let Some((v, x)) = min_root_modulus_on_circle(p, 1.0, self.circle.len()) {
                if v <= 1.0 + self.tol {
                    s.fail(format!("boundary fiber root |w| = {v:.9}"), Some(x));
                }
            }
        }
        let (v, x) = min_modulus(p, pts);
        if v <= self.tol * self.scale {
            s.fail(format!("|p| = {v:.3e} in the bidisk"), Some(x));
        }
        s
    }
}

/// Zero-tolerance band for roots that should lie on T.
pub fn ring_tol(tol: f64) -> f64 {
    (100.0 * tol).max(1e-6)
}

/// Runs only the stability sweep of [`classify_zero_set`]: `Ok` when no
/// zero was found on the closed (or open) bidisk, otherwise the failure
/// notes.
pub fn check_stable(
    p: &BivariatePolynomial,
    closed: bool,
    grid_n: usize,
    tol: f64,
) -> std::result::Result<(), Vec<String>> {
    let s = Ctx::new(p, grid_n, tol).stable_test(closed);
    if s.ok() {
        Ok(())
    } else {
        Err(s.notes)
    }
}

/// Labels the zero set of `p`; see [`ZeroLabel`] for the meaning of each
/// label. Labels are tried in the order DV, symmetric-off-torus, closed
/// stability, open stability.
pub fn classify_zero_set(p: &BivariatePolynomial, grid_n: usize, tol: f64) -> ZeroClass {
    let ctx = Ctx::new(p, grid_n, tol);
    let info = GridInfo {
        grid_n,
        fiber_points: ctx.open_fibers.len(),
        bidisk_points: ctx.closed_bidisk.len(),
        torus_margin: TORUS_MARGIN,
        ring_tol: ctx.ring_tol,
    };
    let squarefree = !p.is_zero() && is_squarefree(p);
    let mut notes = Vec::new();
    let mut witnesses = Vec::new();
    let done = |label, count, notes| ZeroClass {
        label,
        witnesses: Vec::new(),
        grid: info.clone(),
        tol,
        root_count: count,
        squarefree,
        notes,
    };
    if p.is_zero() {
        return ZeroClass {
            label: ZeroLabel::Indeterminate,
            witnesses,
            grid: info,
            tol,
            root_count: None,
            squarefree,
            notes: vec!["zero polynomial".into()],
        };
    }
    let symmetric = p.symmetry_analysis(tol).kind != SymmetryKind::NotSymmetric;
    if symmetric {
        let (dv, count) = ctx.dv_test();
        if dv.ok() && squarefree {
            return done(ZeroLabel::DVDefining, count, notes);
        }
        if dv.ok() {
            notes.push("DV test: zero locus passes but p is not squarefree".into());
        } else {
            notes.extend(dv.notes.iter().map(|n| format!("DV test: {n}")));
        }
        let so = ctx.sym_off_torus_test();
        if so.ok() {
            return done(ZeroLabel::SymmetricNonvanishingOffTorus, None, notes);
        }
        notes.extend(so.notes.iter().map(|n| format!("off-torus test: {n}")));
    } else {
        notes.push("not essentially T²-symmetric".into());
    }
    let sc = ctx.stable_test(true);
    if sc.ok() {
        return done(ZeroLabel::StableClosed, None, notes);
    }
    notes.extend(sc.notes.iter().map(|n| format!("closed stability: {n}")));
    let so = ctx.stable_test(false);
    if so.ok() {
        return done(ZeroLabel::StableOpen, None, notes);
    }
    notes.extend(so.notes.iter().map(|n| format!("open stability: {n}")));
    witnesses.extend(so.witnesses);
    witnesses.truncate(32);
    ZeroClass {
        label: ZeroLabel::Indeterminate,
        witnesses,
        grid: info,
        tol,
        root_count: None,
        squarefree,
        notes,
    }
}

/// Points of T² where `p`, `p_z` and `p_w` vanish together.
///
/// Candidates are unimodular fiber roots over `grid_n` angles, refined by
/// damped Gauss–Newton on the overdetermined system `(p, p_z, p_w)`.
pub fn torus_singularities(p: &BivariatePolynomial, grid_n: usize, tol: f64) -> SingularityReport {
    let scale = p.scale();
    let pz = p.partial_z();
    let pw = p.partial_w();
    let (pzz, pzw, pww) = (pz.partial_z(), pz.partial_w(), pw.partial_w());
    let circle = grid::circle(grid_n.max(8), 1.0);
    let candidates: Vec<(c64, c64)> = sweep_roots(p, &circle)
        .into_iter()
        .flat_map(|(z, r)| {
            r.unwrap_or_default()
                .into_iter()
                .filter(|w| (w.norm() - 1.0).abs() <= 1e-3)
                .map(move |w| (z, w))
                .collect::<Vec<_>>()
        })
        .collect();
    let refined: Vec<Option<(c64, c64)>> = candidates
        .par_iter()
        .map(|&(z0, w0)| {
            let (mut z, mut w) = (z0, w0);
            let resid = |z: c64, w: c64| {
                let (a, b, c) = p.evaluate_with_gradient(z, w);
                (a.norm_sqr() + b.norm_sqr() + c.norm_sqr()).sqrt()
            };
            let mut r = resid(z, w);
            for _ in 0..40 {
                if r <= 1e-3 * tol * scale {
                    break;
                }
                let (f0, f1, f2) = p.evaluate_with_gradient(z, w);
                let j = Mat::from_fn(3, 2, |i, k| match (i, k) {
                    (0, 0) => f1,
                    (0, 1) => f2,
                    (1, 0) => pzz.evaluate(z, w),
                    (1, 1) | (2, 0) => pzw.evaluate(z, w),
                    _ => pww.evaluate(z, w),
                });
                let f = linalg::column(&[f0, f1, f2]);
                let jh = j.adjoint().to_owned();
                let mut normal = &jh * &j;
                let reg = 1e-12 * linalg::max_abs(&normal).max(1e-300);
                normal[(0, 0)] += reg;
                normal[(1, 1)] += reg;
                let Ok(step) = linalg::solve(&normal, &(&jh * &f), 1e-15) else {
                    break;
                };
                let mut t = 1.0;
                let mut moved = false;
                while t > 1e-4 {
                    let (zn, wn) = (z - step[(0, 0)] * t, w - step[(1, 0)] * t);
                    let rn = resid(zn, wn);
                    if rn < r {
                        z = zn;
                        w = wn;
                        r = rn;
                        moved = true;
                        break;
                    }
                    t *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            let (a, b, c) = p.evaluate_with_gradient(z, w);
            let on_torus = (z.norm() - 1.0).abs() <= 1e-6 && (w.norm() - 1.0).abs() <= 1e-6;
            let t = tol * scale;
            (on_torus && a.norm() <= t && b.norm() <= t && c.norm() <= t).then_some((z, w))
        })
        .collect();
    let mut points: Vec<(c64, c64)> = Vec::new();
    for x in refined.into_iter().flatten() {
        if !points
            .iter()
            .any(|y| (x.0 - y.0).norm() < 1e-6 && (x.1 - y.1).norm() < 1e-6)
        {
            points.push(x);
        }
    }
    SingularityReport {
        smooth_on_torus: points.is_empty(),
        points,
    }
}

pub(crate) fn fmt_c(z: c64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}
