//! Sampling grids and seeded random points.
//!
//! Every grid is a deterministic function of its parameters. Random points
//! come from a ChaCha stream so reports are reproducible given a seed.

use std::f64::consts::TAU;

use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// `count` equally spaced points on the circle of radius `r`.
pub fn circle(count: usize, r: f64) -> Vec<c64> {
    (0..count)
        .map(|k| c64::from_polar(r, TAU * k as f64 / count as f64))
        .collect()
}

/// Polar grid of the closed disk with about `grid_n` points: `k` radii
/// in `(0, 1]` including 1, each carrying `k` angles, plus the center.
pub fn closed_disk(grid_n: usize) -> Vec<c64> {
    let k = (grid_n as f64).sqrt().ceil().max(2.0) as usize;
    let mut out = vec![c64::new(0.0, 0.0)];
    for a in 1..=k {
        let r = a as f64 / k as f64;
        // Half-step angular offset on alternate rings avoids aligned rays.
        let off = if a % 2 == 0 { 0.5 } else { 0.0 };
        for b in 0..k {
            out.push(c64::from_polar(r, TAU * (b as f64 + off) / k as f64));
        }
    }
    out
}

/// Polar grid of radii strictly below `rmax`.
pub fn open_disk(grid_n: usize, rmax: f64) -> Vec<c64> {
    closed_disk(grid_n).into_iter().map(|z| z * rmax).collect()
}

/// Product grid in the closed bidisk.
pub fn closed_bidisk(grid_n: usize) -> Vec<(c64, c64)> {
    let d = closed_disk(grid_n);
    let mut out = Vec::with_capacity(d.len() * d.len());
    for &z in &d {
        for &w in &d {
            out.push((z, w));
        }
    }
    out
}

/// Uniform points in the open disk of radius `rmax`.
pub fn random_disk(rng: &mut ChaCha8Rng, count: usize, rmax: f64) -> Vec<c64> {
    (0..count)
        .map(|_| {
            let r = rmax * rng.random::<f64>().sqrt();
            c64::from_polar(r, TAU * rng.random::<f64>())
        })
        .collect()
}

/// Uniform points on the unit circle.
pub fn random_circle(rng: &mut ChaCha8Rng, count: usize) -> Vec<c64> {
    (0..count)
        .map(|_| c64::from_polar(1.0, TAU * rng.random::<f64>()))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Maximum of `f` over `items`, evaluated in parallel; ties and order do
/// not affect the result since `max` is exact. Any NaN makes the result NaN.
pub fn par_max<T: Sync>(items: &[T], f: impl Fn(&T) -> f64 + Sync + Send) -> f64 {
    items
        .par_iter()
        .map(f)
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

/// Minimum of `f` over `items` together with the arg-min index (first one
/// on ties, so the answer does not depend on scheduling).
pub fn par_argmin<T: Sync>(items: &[T], f: impl Fn(&T) -> f64 + Sync + Send) -> (f64, usize) {
    let vals: Vec<f64> = items.par_iter().map(f).collect();
    let mut best = (f64::INFINITY, 0);
    for (k, v) in vals.into_iter().enumerate() {
        if v < best.0 {
            best = (v, k);
        }
    }
    best
}
