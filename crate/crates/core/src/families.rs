//! Seeded source-term families for verification runs.
//!
//! All randomness comes from [`Lcg64`], a 64-bit linear congruential
//! generator with the MMIX constants
//! `state ← state · 6364136223846793005 + 1442695040888963407 (mod 2⁶⁴)`.
//! Uniform reals use the top 53 bits of the new state divided by `2⁵³`, and
//! the stream is seeded by `state = seed`. Any implementation following these
//! three rules reproduces the same families bit for bit.

use std::sync::Arc;

use crate::bathtub::fill_weights;
use crate::error::{Error, Result};
use crate::grid::{GridDomain, ScalarField};

pub const LCG_MULTIPLIER: u64 = 6_364_136_223_846_793_005;
pub const LCG_INCREMENT: u64 = 1_442_695_040_888_963_407;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(LCG_MULTIPLIER).wrapping_add(LCG_INCREMENT);
        self.state
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n` (`n > 0`), by scaling the uniform real.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_f64() * n as f64) as usize).min(n - 1)
    }
}

/// Sum of 1–4 Gaussian bumps centered at random interior cells.
fn random_bumps(d: &Arc<GridDomain>, rng: &mut Lcg64) -> Vec<f64> {
    let scale = d.equivalent_ball_radius();
    let count = 1 + rng.below(4);
    let bumps: Vec<([f64; 3], f64, f64)> = (0..count)
        .map(|_| {
            let c = d.center(rng.below(d.len()));
            let width = scale * rng.uniform(0.15, 0.6);
            let amp = rng.uniform(0.5, 1.5);
            (c, width, amp)
        })
        .collect();
    (0..d.len())
        .map(|cell| {
            let x = d.center(cell);
            bumps
                .iter()
                .map(|(c, w, a)| {
                    let r2: f64 = (0..d.dim()).map(|k| (x[k] - c[k]).powi(2)).sum();
                    a * (-r2 / (w * w)).exp()
                })
                .sum()
        })
        .collect()
}

/// `‖f‖₁/‖f‖∞ = beta` needs at least one full cell on the grid.
fn check_beta(d: &GridDomain, beta: f64) -> Result<()> {
    if !(beta >= d.cell_volume() && beta <= d.measure()) {
        return Err(Error::OutOfRange { what: "beta", value: beta, lo: d.cell_volume(), hi: d.measure() });
    }
    Ok(())
}

/// Indicator of a superlevel set of a random smooth field, with mass exactly
/// `beta` (one fractional cell) and sup norm 1.
pub fn blob_indicator(d: &Arc<GridDomain>, beta: f64, rng: &mut Lcg64) -> Result<ScalarField> {
    check_beta(d, beta)?;
    let score = random_bumps(d, rng);
    let (weights, _) = fill_weights(&score, d.cell_volume(), beta);
    ScalarField::new(Arc::clone(d), weights)
}

/// `min(1, c·s)` for a random smooth bump field `s`, with `c` chosen so the
/// mass is exactly `beta` and at least one cell saturates.
pub fn clipped_bump(d: &Arc<GridDomain>, beta: f64, rng: &mut Lcg64) -> Result<ScalarField> {
    check_beta(d, beta)?;
    let vol = d.cell_volume();
    let target = beta / vol;
    let mut s = random_bumps(d, rng);
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    for v in s.iter_mut() {
        *v /= s_max;
    }
    // Sharpen until the unclipped field (c = 1) fits inside the mass budget.
    let mut rounds = 0;
    while s.iter().sum::<f64>() > target {
        rounds += 1;
        if rounds > 64 {
            return blob_indicator(d, beta, rng);
        }
        for v in s.iter_mut() {
            *v *= *v;
        }
    }
    // Mass of min(1, c·s) is continuous and non-decreasing in c; bisect.
    let mass_at = |c: f64| s.iter().map(|&v| (c * v).min(1.0)).sum::<f64>();
    let s_min = s.iter().cloned().filter(|&v| v > 0.0).fold(1.0, f64::min);
    let (mut lo, mut hi) = (1.0, 1.0 / s_min);
    if mass_at(hi) < target {
        return blob_indicator(d, beta, rng);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = hi;
    let values: Vec<f64> = s.iter().map(|&v| (c * v).min(1.0)).collect();
    let mut f = ScalarField::new(Arc::clone(d), values)?;
    // Snap the mass onto beta exactly by adjusting the largest unsaturated cell.
    let mass: f64 = f.values().iter().sum();
    let fix = target - mass;
    if let Some((i, _)) = f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < 1.0 && v + fix >= 0.0 && v + fix <= 1.0)
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
    {
        f.values_mut()[i] += fix;
    }
    if (f.values().iter().sum::<f64>() - target).abs() > 1e-13 * target.max(1.0) {
        return blob_indicator(d, beta, rng);
    }
    Ok(f)
}

/// Nonnegative random field: bumps plus an optional indicator blob.
pub fn nonnegative_field(d: &Arc<GridDomain>, rng: &mut Lcg64) -> Result<ScalarField> {
    let bumps = random_bumps(d, rng);
    let mut f = ScalarField::new(Arc::clone(d), bumps)?;
    if rng.next_f64() < 0.5 {
        let beta = d.measure() * rng.uniform(0.05, 0.5);
        let blob = blob_indicator(d, beta, rng)?;
        let amp = rng.uniform(0.2, 1.0);
        for (v, b) in f.values_mut().iter_mut().zip(blob.values()) {
            *v += amp * b;
        }
    }
    Ok(f)
}

/// Sign-changing field: a positive and a negative bump family with random
/// amplitudes, so both parts are nonzero.
pub fn sign_changing_field(d: &Arc<GridDomain>, rng: &mut Lcg64) -> Result<ScalarField> {
    let pos = random_bumps(d, rng);
    let neg = random_bumps(d, rng);
    let (a, b) = (rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0));
    let values: Vec<f64> = pos.iter().zip(&neg).map(|(p, n)| a * p - b * n).collect();
    let f = ScalarField::new(Arc::clone(d), values)?;
    if f.positive_part().norm_linf() == 0.0 || f.negative_part().norm_linf() == 0.0 {
        return sign_changing_field(d, rng);
    }
    Ok(f)
}

/// A feasible source with `‖f‖∞ = 1` and `‖f‖₁ = beta`, alternating between
/// blob indicators and clipped bumps.
pub fn feasible_source(d: &Arc<GridDomain>, beta: f64, rng: &mut Lcg64) -> Result<ScalarField> {
    if rng.next_f64() < 0.5 {
        blob_indicator(d, beta, rng)
    } else {
        clipped_bump(d, beta, rng)
    }
}
