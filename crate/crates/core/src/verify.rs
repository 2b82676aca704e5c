//! Self-checks of the finite-squeezing limits and of flat optimality.
//!
//! Each check returns a [`CheckOutcome`]; the command-line `verify`
//! subcommand exits non-zero if any fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::capacity::{
    choi_state, coherent_information_finite_s, log_negativity_finite_s, qe_single, qg_single, Bound,
};
use crate::error::Result;
use crate::gaussian::log_negativity;
use crate::multiplex::{r_for_photons, SqueezingDistribution};
use crate::optimizer::{lagrange_residual, optimize_flat, printed_derivative, unclamped_lossless};

/// N values the convergence checks run on.
pub const CONVERGENCE_N: [f64; 4] = [0.05, 0.1, 0.2, 0.3];
/// Purification squeezing at which finite-s quantities are compared to their limits.
pub const CONVERGENCE_S: f64 = 8.0;
pub const CONVERGENCE_TOL: f64 = 2e-3;
pub const DEFAULT_TRIALS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome { name: name.to_string(), passed, detail }
    }
}

/// Coherent information at `s = 8` against `-1 - ln N`, and its growth in `s`.
pub fn coherent_information_convergence() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    let mut monotone = true;
    for n in CONVERGENCE_N {
        let limit = qg_single(n)?;
        worst = worst.max((coherent_information_finite_s(n, CONVERGENCE_S)? - limit).abs());
        let mut prev = f64::NEG_INFINITY;
        for s in 0..=8 {
            let v = coherent_information_finite_s(n, s as f64)?;
            monotone &= v > prev;
            prev = v;
        }
    }
    Ok(CheckOutcome::new(
        "coherent_information_convergence",
        worst < CONVERGENCE_TOL && monotone,
        format!("max deviation {worst:.3e}, monotone in s: {monotone}"),
    ))
}

/// Largest `s` at which f64 entries of the Choi CM still pin `d_-` to 1e-9.
/// Beyond it the rounding of entries of size `cosh(2s)/2` dominates.
pub const EIGENSOLVER_MAX_S: f64 = 6.0;

/// Log-negativity at `s = 8` against `-ln N`, and agreement of the closed
/// form with the eigensolver on the reversed Choi state for `s <= 6`.
pub fn log_negativity_convergence() -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    let mut mismatch = 0.0f64;
    for n in CONVERGENCE_N {
        let closed = log_negativity_finite_s(n, CONVERGENCE_S)?;
        worst = worst.max((closed - qe_single(n)?).abs());
        for s in 0..=EIGENSOLVER_MAX_S as usize {
            let s = s as f64;
            let numeric = log_negativity(choi_state(n, s)?.cm())?;
            mismatch = mismatch.max((log_negativity_finite_s(n, s)? - numeric).abs());
        }
    }
    Ok(CheckOutcome::new(
        "log_negativity_convergence",
        worst < CONVERGENCE_TOL && mismatch < 1e-9,
        format!("max deviation {worst:.3e}, eigensolver mismatch {mismatch:.3e}"),
    ))
}

/// Spread of the Lagrange residuals of flat optima at a few energies.
pub fn flat_optimum_stationarity() -> Result<CheckOutcome> {
    let mut spread = 0.0f64;
    for n in [5.0, 30.0, 100.0] {
        for bound in [Bound::QG, Bound::QA] {
            let res = optimize_flat(n, 1.0, bound)?;
            let lam = lagrange_residual(&res.distribution, bound)?;
            let (lo, hi) = lam
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            spread = spread.max(hi - lo);
        }
    }
    Ok(CheckOutcome::new(
        "flat_optimum_stationarity",
        spread < 1e-9,
        format!("max residual spread {spread:.3e}"),
    ))
}

fn lossless_q(n: f64, bound: Bound) -> Result<f64> {
    crate::capacity::mode_capacity(r_for_photons(n), 1.0, bound)
}

fn unclamped(n: f64, bound: Bound) -> f64 {
    unclamped_lossless(r_for_photons(n), bound)
}

/// Closed-form derivatives against central differences on `n in [0.2, 5]`.
pub fn derivative_finite_difference() -> Result<CheckOutcome> {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..=96 {
        let n = 0.2 + 0.05 * i as f64;
        for bound in [Bound::QG, Bound::QA] {
            let fd = (unclamped(n + h, bound) - unclamped(n - h, bound)) / (2.0 * h);
            worst = worst.max((fd - printed_derivative(n, bound)).abs());
        }
    }
    Ok(CheckOutcome::new(
        "derivative_finite_difference",
        worst < 1e-6,
        format!("max |closed form - central difference| {worst:.3e}"),
    ))
}

/// Summary of randomised perturbations of flat distributions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub violations: usize,
    /// Smallest `q(flat) - q(perturbed)` seen over both bounds.
    pub min_gap: f64,
}

fn total_q(energies: &[f64], bound: Bound) -> Result<f64> {
    energies.iter().map(|&n| lossless_q(n, bound)).sum()
}

/// Draws `K` in `[2, 40]`, a per-mode energy above the Q_G threshold and a
/// zero-sum perturbation keeping every mode above threshold, then compares
/// both Q_G and Q_A of the flat and perturbed distributions. A violation is
/// a perturbed value at or above the flat one.
pub fn flat_dominance_trials(seed: u64, trials: usize) -> Result<TrialSummary> {
    let threshold = 0.5f64.sinh().powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut min_gap = f64::INFINITY;
    for _ in 0..trials {
        let k: usize = rng.random_range(2..=40);
        let per_mode = threshold + rng.random_range(0.05..5.0);
        let mut delta: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mean = delta.iter().sum::<f64>() / k as f64;
        delta.iter_mut().for_each(|d| *d -= mean);
        let most_negative = delta.iter().cloned().fold(0.0f64, f64::min);
        let headroom = per_mode - threshold;
        let scale = rng.random_range(0.0..0.99) * headroom / -most_negative;
        let perturbed: Vec<f64> = delta.iter().map(|d| per_mode + scale * d).collect();
        let size = delta.iter().map(|d| (scale * d).abs()).fold(0.0, f64::max);
        let flat = vec![per_mode; k];
        for bound in [Bound::QG, Bound::QA] {
            let gap = total_q(&flat, bound)? - total_q(&perturbed, bound)?;
            min_gap = min_gap.min(gap);
            let violated = if size > 1e-9 { !(gap > 0.0) } else { gap < -1e-12 };
            if violated {
                violations += 1;
            }
        }
    }
    Ok(TrialSummary { trials, violations, min_gap })
}

/// Squeezing amplitudes of a distribution with the given per-mode energies.
pub fn distribution_from_energies(energies: &[f64]) -> Result<SqueezingDistribution> {
    SqueezingDistribution::custom(energies.iter().map(|&n| r_for_photons(n)).collect())
}

/// The full suite run by `verify`.
pub fn run_all(seed: u64, trials: usize) -> Result<Vec<CheckOutcome>> {
    let summary = flat_dominance_trials(seed, trials)?;
    Ok(vec![
        coherent_information_convergence()?,
        log_negativity_convergence()?,
        flat_optimum_stationarity()?,
        derivative_finite_difference()?,
        CheckOutcome::new(
            "flat_dominance_trials",
            summary.violations == 0,
            format!(
                "{} trials, {} violations, min gap {:.3e}",
                summary.trials, summary.violations, summary.min_gap
            ),
        ),
    ])
}
