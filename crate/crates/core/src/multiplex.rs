//! Squeezing distributions over the modes of a multiplexed EPR resource.

use serde::Serialize;

use crate::error::{ensure_nonnegative, Error, Result};

/// Relative cutoff `r_k / r_0` below which PDC modes are dropped.
pub const PDC_RELATIVE_CUTOFF: f64 = 1e-6;
/// Absolute cutoff on `r_k` for PDC truncation.
pub const PDC_ABSOLUTE_CUTOFF: f64 = 1e-12;
pub const PDC_MAX_MODES: usize = 10_000;

const GAIN_BISECTION_STEPS: usize = 200;
/// Accepted energy mismatch once bisection has run out of resolution.
const GAIN_REL_TOL: f64 = 1e-10;

/// How a distribution was generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// `r_k = B sqrt(1 - mu^2) mu^k`.
    Pdc {
        #[serde(rename = "B")]
        gain: f64,
        mu: f64,
    },
    /// `K` modes with equal squeezing `r`.
    Flat {
        #[serde(rename = "K")]
        modes: usize,
        r: f64,
    },
    Custom,
}

/// Per-mode squeezing amplitudes `r_k >= 0` of a multimode EPR state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SqueezingDistribution {
    r: Vec<f64>,
    label: Family,
}

impl SqueezingDistribution {
    pub fn custom(r: Vec<f64>) -> Result<Self> {
        Self::with_label(r, Family::Custom)
    }

    fn with_label(r: Vec<f64>, label: Family) -> Result<Self> {
        for (k, &x) in r.iter().enumerate() {
            ensure_nonnegative(&format!("r_{k}"), x)?;
        }
        Ok(SqueezingDistribution { r, label })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.r
    }

    pub fn label(&self) -> Family {
        self.label
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Largest amplitude, 0 when empty.
    pub fn max_amplitude(&self) -> f64 {
        self.r.iter().copied().fold(0.0, f64::max)
    }

    /// Normalised weights `lambda_k = r_k / sqrt(sum r_j^2)`.
    pub fn weights(&self) -> Result<Vec<f64>> {
        let norm = self.r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::domain("distribution has no squeezed mode"));
        }
        Ok(self.r.iter().map(|x| x / norm).collect())
    }
}

/// Mean photon number per arm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct EnergyBudget(pub f64);

impl EnergyBudget {
    pub fn new(n_ph: f64) -> Result<Self> {
        ensure_nonnegative("mean photon number", n_ph)?;
        Ok(EnergyBudget(n_ph))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if (0.0..1.0).contains(&mu) {
        Ok(())
    } else {
        Err(Error::domain(format!("decay mu must lie in [0, 1), got {mu}")))
    }
}

/// Unit-gain PDC profile `sqrt(1 - mu^2) mu^k`, `k = 0..modes`.
fn pdc_profile(mu: f64, modes: usize) -> Vec<f64> {
    let head = (1.0 - mu * mu).sqrt();
    let mut out = Vec::with_capacity(modes);
    let mut pow = 1.0;
    for _ in 0..modes {
        out.push(head * pow);
        pow *= mu;
    }
    out
}

/// Exponentially decaying PDC distribution over `modes` modes.
pub fn pdc_distribution(gain: f64, mu: f64, modes: usize) -> Result<SqueezingDistribution> {
    ensure_nonnegative("gain B", gain)?;
    check_mu(mu)?;
    if modes == 0 {
        return Err(Error::domain("a PDC distribution needs at least one mode"));
    }
    let r = pdc_profile(mu, modes).into_iter().map(|l| gain * l).collect();
    SqueezingDistribution::with_label(r, Family::Pdc { gain, mu })
}

/// Number of PDC modes kept for decay `mu`: modes up to and including the
/// first with `mu^k < 1e-6`, capped at [`PDC_MAX_MODES`].
pub fn pdc_mode_count(mu: f64) -> Result<usize> {
    check_mu(mu)?;
    if mu == 0.0 {
        return Ok(1);
    }
    let mut count = 1;
    let mut pow = 1.0;
    while pow >= PDC_RELATIVE_CUTOFF && count < PDC_MAX_MODES {
        count += 1;
        pow *= mu;
    }
    Ok(count)
}

/// PDC distribution ending at the first mode with `r_k < max(1e-6 r_0, 1e-12)`.
pub fn pdc_truncated(gain: f64, mu: f64) -> Result<SqueezingDistribution> {
    ensure_nonnegative("gain B", gain)?;
    let modes = pdc_mode_count(mu)?;
    let r0 = gain * (1.0 - mu * mu).sqrt();
    let cutoff = (PDC_RELATIVE_CUTOFF * r0).max(PDC_ABSOLUTE_CUTOFF);
    let mut r: Vec<f64> = pdc_profile(mu, modes).into_iter().map(|l| gain * l).collect();
    let keep = r
        .iter()
        .position(|&x| x < cutoff)
        .map_or(r.len(), |k| k + 1);
    r.truncate(keep);
    SqueezingDistribution::with_label(r, Family::Pdc { gain, mu })
}

pub fn flat_distribution(modes: usize, r: f64) -> Result<SqueezingDistribution> {
    if modes == 0 {
        return Err(Error::domain("a flat distribution needs K >= 1"));
    }
    ensure_nonnegative("squeezing amplitude r", r)?;
    SqueezingDistribution::with_label(vec![r; modes], Family::Flat { modes, r })
}

/// `sum_k sinh^2(r_k)`.
pub fn mean_photon(dist: &SqueezingDistribution) -> EnergyBudget {
    EnergyBudget(dist.r.iter().map(|r| r.sinh().powi(2)).sum())
}

/// `K = 1 / sum_k lambda_k^4`.
pub fn effective_mode_number(dist: &SqueezingDistribution) -> Result<f64> {
    let weights = dist.weights()?;
    Ok(1.0 / weights.iter().map(|l| l.powi(4)).sum::<f64>())
}

/// Closed form of `K` for the untruncated PDC family.
pub fn pdc_effective_modes(mu: f64) -> f64 {
    (1.0 + mu * mu) / (1.0 - mu * mu)
}

const DB_PER_NEPER: f64 = 20.0 * std::f64::consts::LOG10_E;

/// Squeezing in dB: `-10 log10(e^{-2r}) = 20 r log10(e)`.
pub fn squeezing_db(r: f64) -> Result<f64> {
    ensure_nonnegative("squeezing amplitude r", r)?;
    Ok(r * DB_PER_NEPER)
}

pub fn db_to_r(db: f64) -> Result<f64> {
    ensure_nonnegative("squeezing in dB", db)?;
    Ok(db / DB_PER_NEPER)
}

/// Squeezing amplitude of a single mode carrying `n` photons.
pub fn r_for_photons(n: f64) -> f64 {
    n.sqrt().asinh()
}

/// Shape of a family whose overall scale is fixed by an energy target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyFamily {
    Pdc { mu: f64, modes: usize },
    Flat { modes: usize },
}

/// Scales `family` so that its mean photon number equals `target`.
pub fn gain_for_energy(family: EnergyFamily, target: EnergyBudget) -> Result<SqueezingDistribution> {
    let n = target.value();
    ensure_nonnegative("mean photon number", n)?;
    match family {
        EnergyFamily::Flat { modes } => {
            if modes == 0 {
                return Err(Error::domain("a flat distribution needs K >= 1"));
            }
            flat_distribution(modes, r_for_photons(n / modes as f64))
        }
        EnergyFamily::Pdc { mu, modes } => {
            check_mu(mu)?;
            if modes == 0 {
                return Err(Error::domain("a PDC distribution needs at least one mode"));
            }
            let profile = pdc_profile(mu, modes);
            let gain = solve_gain(&profile, n)?;
            pdc_distribution(gain, mu, modes)
        }
    }
}

fn profile_energy(profile: &[f64], gain: f64) -> f64 {
    profile.iter().map(|l| (gain * l).sinh().powi(2)).sum()
}

/// Bisection for `B` with `sum_k sinh^2(B lambda_k) = target`.
fn solve_gain(profile: &[f64], target: f64) -> Result<f64> {
    if target == 0.0 {
        return Ok(0.0);
    }
    // sinh^2 x >= x^2 gives B <= sqrt(target / sum lambda^2)
    let norm2: f64 = profile.iter().map(|l| l * l).sum();
    let mut hi = (target / norm2).sqrt();
    while profile_energy(profile, hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..GAIN_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let e = profile_energy(profile, mid);
        if (e - target).abs() <= 4.0 * f64::EPSILON * target {
            return Ok(mid);
        }
        if e < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gain = 0.5 * (lo + hi);
    let e = profile_energy(profile, gain);
    if (e - target).abs() <= GAIN_REL_TOL * target {
        Ok(gain)
    } else {
        Err(Error::Numeric(format!(
            "gain bisection did not reach energy {target} (got {e})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pdc_without_decay_is_single_mode() {
        let d = pdc_distribution(1.3, 0.0, 4).unwrap();
        assert_eq!(d.amplitudes(), &[1.3, 0.0, 0.0, 0.0]);
        assert_eq!(effective_mode_number(&d).unwrap(), 1.0);
        assert!(pdc_distribution(1.0, 1.0, 3).is_err());
        assert_eq!(pdc_mode_count(0.0).unwrap(), 1);
    }

    #[test]
    fn pdc_effective_modes_from_geometric_sums() {
        // sum lambda^2 = 1, sum lambda^4 = (1-mu^2)^2 / (1-mu^4)
        for (mu2, k) in [(1.0 / 3.0, 2.0), (5.0 / 7.0, 6.0)] {
            let mu: f64 = f64::sqrt(mu2);
            let oracle = (1.0 - mu2 * mu2) / (1.0 - mu2).powi(2);
            assert_abs_diff_eq!(oracle, k, epsilon = 1e-12);
            assert_abs_diff_eq!(pdc_effective_modes(mu), k, epsilon = 1e-12);
            let d = pdc_truncated(2.0, mu).unwrap();
            assert_abs_diff_eq!(effective_mode_number(&d).unwrap(), k, epsilon = 1e-9);
        }
    }

    #[test]
    fn flat_family() {
        let d = flat_distribution(4, 0.5).unwrap();
        assert_eq!(effective_mode_number(&d).unwrap(), 4.0);
        assert_abs_diff_eq!(mean_photon(&d).0, 4.0 * 0.5f64.sinh().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(mean_photon(&d).0, 1.08617, epsilon = 1e-5);
        assert!(flat_distribution(0, 0.5).is_err());
        assert!(flat_distribution(2, -0.5).is_err());
        let d = flat_distribution(7, r_for_photons(3.0 / 7.0)).unwrap();
        assert_abs_diff_eq!(mean_photon(&d).0, 3.0, epsilon = 1e-14);
    }

    #[test]
    fn photon_numbers_at_thresholds() {
        assert_eq!(mean_photon(&SqueezingDistribution::custom(vec![]).unwrap()).0, 0.0);
        let r = 2f64.sqrt().ln();
        assert_abs_diff_eq!(r.sinh().powi(2), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(r, 0.34657, epsilon = 1e-5);
        assert_abs_diff_eq!(squeezing_db(r).unwrap(), 3.0103, epsilon = 1e-4);
        let d = flat_distribution(1, 0.5).unwrap();
        assert_abs_diff_eq!(mean_photon(&d).0, 0.27154, epsilon = 1e-5);
        assert_abs_diff_eq!(squeezing_db(0.5).unwrap(), 4.3429, epsilon = 1e-4);
        assert_eq!(squeezing_db(0.0).unwrap(), 0.0);
        assert!(squeezing_db(-0.1).is_err());
        assert!(db_to_r(-3.0).is_err());
    }

    #[test]
    fn effective_modes_needs_squeezing() {
        let zero = flat_distribution(3, 0.0).unwrap();
        assert!(matches!(effective_mode_number(&zero), Err(Error::Domain(_))));
    }

    #[test]
    fn energy_inversion() {
        let d = gain_for_energy(EnergyFamily::Flat { modes: 1 }, EnergyBudget(30.0)).unwrap();
        assert_abs_diff_eq!(d.amplitudes()[0], 30f64.sqrt().asinh(), epsilon = 1e-15);

        let d = gain_for_energy(EnergyFamily::Pdc { mu: 0.0, modes: 1 }, EnergyBudget(0.125)).unwrap();
        assert_abs_diff_eq!(d.amplitudes()[0], 2f64.sqrt().ln(), epsilon = 1e-10);

        for fam in [EnergyFamily::Flat { modes: 5 }, EnergyFamily::Pdc { mu: 0.6, modes: 30 }] {
            let d = gain_for_energy(fam, EnergyBudget(0.0)).unwrap();
            assert!(d.amplitudes().iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn truncation_drops_negligible_energy() {
        for mu in [0.2, 0.6, 0.9, 0.99] {
            let n = pdc_mode_count(mu).unwrap();
            assert!(mu.powi(n as i32 - 1) < PDC_RELATIVE_CUTOFF);
            let short = pdc_distribution(1.7, mu, n).unwrap();
            let long = pdc_distribution(1.7, mu, 10 * n).unwrap();
            let (a, b) = (mean_photon(&short).0, mean_photon(&long).0);
            assert!((b - a).abs() / b < 1e-9, "mu = {mu}: {a} vs {b}");
        }
    }
}
