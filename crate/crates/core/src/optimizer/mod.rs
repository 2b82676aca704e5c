//! Maximising capacity bounds over squeezing distributions at fixed energy.
//!
//! Flat codings are searched over integer mode numbers; PDC codings over a
//! grid of decay constants `mu`. Everything here is deterministic: fixed
//! grids, fixed bisection and golden-section stopping rules.

pub mod search;
pub mod sweep;

use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{mode_capacity, Bound};
use crate::error::{ensure_nonnegative, ensure_unit_interval, Error, Result};
use crate::multiplex::{
    effective_mode_number, flat_distribution, gain_for_energy, pdc_effective_modes,
    pdc_mode_count, r_for_photons, squeezing_db, EnergyBudget, EnergyFamily,
    SqueezingDistribution,
};
use search::{bisect_transition, golden_max};

pub use sweep::{sweep_energy, sweep_loss, Coding, GridScale, GridSpec, SweepResult, SweepRow};

/// Number of points in [`default_mu_grid`].
pub const DEFAULT_MU_POINTS: usize = 512;
/// Upper end of [`default_mu_grid`].
pub const DEFAULT_MU_MAX: f64 = 0.995;

/// Difference in q-nats above which one curve counts as strictly better.
pub const CROSSOVER_TOL: f64 = 1e-9;

/// `512` uniform points on `[0, 0.995]`.
pub fn default_mu_grid() -> Vec<f64> {
    let n = DEFAULT_MU_POINTS;
    (0..n)
        .map(|i| DEFAULT_MU_MAX * i as f64 / (n - 1) as f64)
        .collect()
}

/// Parameters of the optimal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BestParams {
    Flat {
        #[serde(rename = "K")]
        modes: usize,
        r: f64,
    },
    Pdc {
        #[serde(rename = "B")]
        gain: f64,
        mu: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    /// Integer `K` for flat codings, effective `K` for PDC codings.
    pub best_k: f64,
    pub best_params: BestParams,
    pub best_value: f64,
    pub bound: Bound,
    pub n_ph: f64,
    pub eta: f64,
    /// `dq/dn` per mode at the optimum; only defined for flat optima with
    /// positive per-mode capacity.
    pub lagrange_multiplier: Option<f64>,
    #[serde(skip)]
    pub distribution: SqueezingDistribution,
}

impl OptResult {
    /// Largest squeezing amplitude in the optimal distribution.
    pub fn r_opt(&self) -> f64 {
        self.distribution.max_amplitude()
    }
}

fn check_energy(n_ph: f64) -> Result<()> {
    if n_ph > 0.0 && n_ph.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("mean photon number must be > 0, got {n_ph}")))
    }
}

/// Bound of `k` equally squeezed modes sharing `n_ph` photons.
pub fn q_flat(k: usize, n_ph: f64, eta: f64, bound: Bound) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("flat coding needs K >= 1"));
    }
    q_flat_continuous(k as f64, n_ph, eta, bound)
}

/// [`q_flat`] with the mode number relaxed to a real `k >= 1`.
pub fn q_flat_continuous(k: f64, n_ph: f64, eta: f64, bound: Bound) -> Result<f64> {
    if !(k >= 1.0) {
        return Err(Error::domain(format!("flat coding needs K >= 1, got {k}")));
    }
    ensure_nonnegative("mean photon number", n_ph)?;
    ensure_unit_interval("eta", eta)?;
    let r = r_for_photons(n_ph / k);
    Ok(k * mode_capacity(r, eta, bound)?)
}

/// Largest `K` searched by [`optimize_flat`].
pub fn flat_search_limit(n_ph: f64) -> usize {
    (10.0 * n_ph).ceil() as usize + 10
}

/// Best flat coding over `K = 1..=ceil(10 n_ph) + 10`; ties go to the
/// smaller `K`.
pub fn optimize_flat(n_ph: f64, eta: f64, bound: Bound) -> Result<OptResult> {
    check_energy(n_ph)?;
    ensure_unit_interval("eta", eta)?;
    let mut best = (1usize, q_flat(1, n_ph, eta, bound)?);
    for k in 2..=flat_search_limit(n_ph) {
        let v = q_flat(k, n_ph, eta, bound)?;
        if v > best.1 {
            best = (k, v);
        }
    }
    let (k, value) = best;
    let per_mode = n_ph / k as f64;
    let r = r_for_photons(per_mode);
    let lagrange_multiplier = if value > 0.0 {
        Some(marginal_rate(per_mode, eta, bound)?)
    } else {
        None
    };
    Ok(OptResult {
        best_k: k as f64,
        best_params: BestParams::Flat { modes: k, r },
        best_value: value,
        bound,
        n_ph,
        eta,
        lagrange_multiplier,
        distribution: flat_distribution(k, r)?,
    })
}

/// Continuous relaxation of [`optimize_flat`]: maximises over real `K >= 1`.
/// Returns `(K, value)`.
pub fn optimize_flat_relaxed(n_ph: f64, eta: f64, bound: Bound) -> Result<(f64, f64)> {
    check_energy(n_ph)?;
    ensure_unit_interval("eta", eta)?;
    let upper = match single_mode_threshold(bound, eta) {
        Ok(n_thr) if n_thr > 0.0 => (n_ph / n_thr).min(flat_search_limit(n_ph) as f64),
        Ok(_) => flat_search_limit(n_ph) as f64,
        Err(Error::Bracket(_)) => return Ok((1.0, 0.0)),
        Err(e) => return Err(e),
    };
    if upper <= 1.0 {
        return Ok((1.0, q_flat_continuous(1.0, n_ph, eta, bound)?));
    }
    golden_max(|k| q_flat_continuous(k, n_ph, eta, bound), 1.0, upper, 1e-10 * upper)
}

/// Bound of a PDC distribution with decay `mu` scaled to `n_ph` photons.
pub fn pdc_value(mu: f64, n_ph: f64, eta: f64, bound: Bound) -> Result<(f64, SqueezingDistribution)> {
    let modes = pdc_mode_count(mu)?;
    let dist = gain_for_energy(EnergyFamily::Pdc { mu, modes }, EnergyBudget::new(n_ph)?)?;
    let mut total = 0.0;
    for &r in dist.amplitudes() {
        total += mode_capacity(r, eta, bound)?;
    }
    Ok((total, dist))
}

/// Best PDC coding over `mu_grid`; the single-mode case `mu = 0` is always
/// a candidate. Ties go to the earlier grid point.
pub fn optimize_pdc(n_ph: f64, eta: f64, bound: Bound, mu_grid: &[f64]) -> Result<OptResult> {
    check_energy(n_ph)?;
    ensure_unit_interval("eta", eta)?;
    if let Some(&bad) = mu_grid.iter().find(|&&mu| !(0.0..1.0).contains(&mu)) {
        return Err(Error::domain(format!("mu grid entries must lie in [0, 1), got {bad}")));
    }
    let mut candidates = Vec::with_capacity(mu_grid.len() + 1);
    if mu_grid.first() != Some(&0.0) {
        candidates.push(0.0);
    }
    candidates.extend_from_slice(mu_grid);

    let values: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&mu| pdc_value(mu, n_ph, eta, bound).map(|(v, _)| (mu, v)))
        .collect::<Result<_>>()?;
    let (mu, value) = values
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });

    let (_, dist) = pdc_value(mu, n_ph, eta, bound)?;
    let gain = match dist.label() {
        crate::multiplex::Family::Pdc { gain, .. } => gain,
        _ => unreachable!("pdc_value builds PDC distributions"),
    };
    let best_k = effective_mode_number(&dist).unwrap_or_else(|_| pdc_effective_modes(mu));
    Ok(OptResult {
        best_k,
        best_params: BestParams::Pdc { gain, mu },
        best_value: value,
        bound,
        n_ph,
        eta,
        lagrange_multiplier: None,
        distribution: dist,
    })
}

/// Per-mode capacity without the `max{0, .}` clamp, lossless channel.
pub fn unclamped_lossless(r: f64, bound: Bound) -> f64 {
    match bound {
        Bound::QG => 2.0 * r - 1.0,
        Bound::QA => 2.0 * r + (-(-2.0 * r).exp()).ln_1p(),
        Bound::QE => 2.0 * r,
    }
}

/// `dq(r(n_k))/dn_k` for every mode of a lossless distribution, with
/// `r(n) = arcsinh sqrt(n)`. A distribution is stationary under the energy
/// constraint iff all entries agree.
pub fn lagrange_residual(dist: &SqueezingDistribution, bound: Bound) -> Result<Vec<f64>> {
    dist.amplitudes()
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            if !(unclamped_lossless(r, bound) > 0.0) {
                return Err(Error::domain(format!(
                    "mode {k} (r = {r}) is at or below the zero-capacity threshold of {bound}"
                )));
            }
            Ok(printed_derivative(r.sinh().powi(2), bound))
        })
        .collect()
}

/// Lossless `dq(r(n))/dn` in closed form, without any threshold check.
pub fn printed_derivative(n: f64, bound: Bound) -> f64 {
    let base = 1.0 / (n * (1.0 + n)).sqrt();
    match bound {
        Bound::QG | Bound::QE => base,
        Bound::QA => {
            let e = (2.0 * r_for_photons(n)).exp();
            e / (e - 1.0) * base
        }
    }
}

/// `dq(N(r(n), eta))/dn` at per-mode energy `n`.
pub fn marginal_rate(n: f64, eta: f64, bound: Bound) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::domain(format!("per-mode energy must be > 0, got {n}")));
    }
    ensure_unit_interval("eta", eta)?;
    let r = r_for_photons(n);
    let big_n = crate::capacity::n_from_loss(r, eta)?;
    // dN/dn = -2 eta e^{-2r} dr/dn, dr/dn = 1 / (2 sqrt(n(1+n)))
    let dn_dn = eta * (-2.0 * r).exp() / (n * (1.0 + n)).sqrt();
    Ok(match bound {
        Bound::QG | Bound::QE => dn_dn / big_n,
        Bound::QA => dn_dn / (big_n * (1.0 - big_n)),
    })
}

fn single_mode_positive(bound: Bound, eta: f64, n_ph: f64) -> Result<bool> {
    Ok(mode_capacity(r_for_photons(n_ph), eta, bound)? > 0.0)
}

/// Default search bracket for [`find_threshold`], in photons.
pub const THRESHOLD_BRACKET: (f64, f64) = (0.0, 1e4);

/// Photon number at which the single-mode bound becomes positive.
pub fn find_threshold(bound: Bound, eta: f64, bracket: (f64, f64)) -> Result<f64> {
    ensure_unit_interval("eta", eta)?;
    // any squeezing gives -ln N > 0 when eta > 0
    if bound == Bound::QE && eta > 0.0 && bracket.0 <= 0.0 && bracket.1 > 0.0 {
        return Ok(0.0);
    }
    bisect_transition(
        |n| single_mode_positive(bound, eta, n),
        bracket.0,
        bracket.1,
        1e-12,
        0.0,
    )
    .map_err(|e| match e {
        Error::Bracket(msg) => Error::Bracket(format!(
            "{bound} at eta = {eta} has no zero-capacity threshold in [{}, {}]: {msg}",
            bracket.0, bracket.1
        )),
        other => other,
    })
}

fn single_mode_threshold(bound: Bound, eta: f64) -> Result<f64> {
    find_threshold(bound, eta, THRESHOLD_BRACKET)
}

/// A capacity curve as a function of energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curve {
    pub coding: Coding,
    pub bound: Bound,
}

/// Energy at which `upper` starts to exceed `lower` (by more than
/// [`CROSSOVER_TOL`]) inside `bracket`.
pub fn find_crossover(
    upper: Curve,
    lower: Curve,
    eta: f64,
    bracket: (f64, f64),
    mu_grid: &[f64],
) -> Result<f64> {
    ensure_unit_interval("eta", eta)?;
    let ahead = |n: f64| -> Result<bool> {
        let a = sweep::evaluate(upper.coding, n, eta, upper.bound, mu_grid)?.value;
        let b = sweep::evaluate(lower.coding, n, eta, lower.bound, mu_grid)?.value;
        Ok(a - b > CROSSOVER_TOL)
    };
    bisect_transition(ahead, bracket.0, bracket.1, 0.0, 1e-7)
}

/// PDC decay constant whose untruncated effective mode number is `k`.
pub fn mu_for_effective_modes(k: f64) -> Result<f64> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::domain(format!("effective mode number must be >= 1, got {k}")));
    }
    Ok(((k - 1.0) / (k + 1.0)).sqrt())
}

/// Squeezing per mode that maximises the rate per photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalSqueezing {
    pub r: f64,
    pub db: f64,
    pub rate_per_photon: f64,
}

const SQUEEZING_SCAN_MAX: f64 = 12.0;
const SQUEEZING_SCAN_POINTS: usize = 4800;

/// Maximises `q(N(r, eta)) / sinh^2 r` over `r`: the per-mode squeezing of
/// the best flat coding in the many-photon limit.
pub fn optimal_mode_squeezing(eta: f64, bound: Bound) -> Result<OptimalSqueezing> {
    ensure_unit_interval("eta", eta)?;
    if bound == Bound::QE {
        return Err(Error::domain(
            "QE per photon grows without bound as r -> 0; no optimal squeezing",
        ));
    }
    let rate = |r: f64| -> Result<f64> { Ok(mode_capacity(r, eta, bound)? / r.sinh().powi(2)) };
    let step = SQUEEZING_SCAN_MAX / SQUEEZING_SCAN_POINTS as f64;
    let mut best = (0usize, 0.0f64);
    for i in 1..=SQUEEZING_SCAN_POINTS {
        let v = rate(i as f64 * step)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    if best.1 <= 0.0 {
        return Err(Error::domain(format!(
            "{bound} is zero for every squeezing up to r = {SQUEEZING_SCAN_MAX} at eta = {eta}"
        )));
    }
    let lo = (best.0 - 1) as f64 * step;
    let hi = ((best.0 + 1) as f64 * step).min(SQUEEZING_SCAN_MAX);
    let (r, v) = golden_max(rate, lo.max(step * 0.5), hi, 1e-12)?;
    Ok(OptimalSqueezing {
        r,
        db: squeezing_db(r)?,
        rate_per_photon: v,
    })
}
