//! Quantum-capacity bounds of the thermal-like teleportation channel.
//!
//! All quantities are in q-nats (natural logarithms). Three bounds are
//! available per mode with thermal parameter `N`:
//!
//! * `Q_G = max{0, -1 - ln N}`: single-use Gaussian coherent information,
//!   an achievable rate.
//! * `Q_A = max{0, ln(1 - N) - ln N}`: capacity of the pure-loss channel
//!   that simulates the thermal-like channel, an upper bound.
//! * `Q_E = max{0, -ln N}`: logarithmic negativity of the Choi state, an
//!   upper bound on two-way assisted rates.

use serde::{Deserialize, Serialize};

use crate::channel::{apply_teleport_to_mode, epr_cm, TeleportNoise};
use crate::error::{ensure_nonnegative, ensure_unit_interval, Error, Result};
use crate::gaussian::{g_unchecked, GaussianState};
use crate::multiplex::SqueezingDistribution;

/// Above this purification squeezing the finite-`s` expressions switch to a
/// log-domain evaluation.
const LOG_DOMAIN_S: f64 = 15.0;

/// Which capacity bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bound {
    #[serde(rename = "QG", alias = "qg")]
    QG,
    #[serde(rename = "QA", alias = "qa")]
    QA,
    #[serde(rename = "QE", alias = "qe")]
    QE,
}

impl Bound {
    pub const ALL: [Bound; 3] = [Bound::QG, Bound::QA, Bound::QE];

    /// Single-mode value at thermal parameter `n_param`.
    pub fn single(self, n_param: f64) -> Result<f64> {
        match self {
            Bound::QG => qg_single(n_param),
            Bound::QA => qa_single(n_param),
            Bound::QE => qe_single(n_param),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Bound::QG => "QG",
            Bound::QA => "QA",
            Bound::QE => "QE",
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Bound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "QG" => Ok(Bound::QG),
            "QA" => Ok(Bound::QA),
            "QE" => Ok(Bound::QE),
            _ => Err(Error::validation(format!("unknown bound {s:?}; expected QG, QA or QE"))),
        }
    }
}

fn ensure_positive_n(n_param: f64) -> Result<()> {
    if n_param > 0.0 && n_param.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("thermal parameter N must be > 0, got {n_param}")))
    }
}

pub fn qg_single(n_param: f64) -> Result<f64> {
    ensure_positive_n(n_param)?;
    Ok((-1.0 - n_param.ln()).max(0.0))
}

/// Zero for `N >= 1`, where the simulating attenuator has no transmission.
pub fn qa_single(n_param: f64) -> Result<f64> {
    ensure_positive_n(n_param)?;
    if n_param >= 1.0 {
        return Ok(0.0);
    }
    Ok(((-n_param).ln_1p() - n_param.ln()).max(0.0))
}

pub fn qe_single(n_param: f64) -> Result<f64> {
    ensure_positive_n(n_param)?;
    Ok((-n_param.ln()).max(0.0))
}

/// Thermal parameter of an EPR resource with squeezing `r` after symmetric
/// loss `eta`: `eta e^{-2r} + 1 - eta`.
pub fn n_from_loss(r: f64, eta: f64) -> Result<f64> {
    ensure_nonnegative("squeezing amplitude r", r)?;
    ensure_unit_interval("eta", eta)?;
    Ok(n_from_loss_unchecked(r, eta))
}

pub(crate) fn n_from_loss_unchecked(r: f64, eta: f64) -> f64 {
    // 1 - eta (1 - e^{-2r}), accurate for small r as well as eta -> 1
    if eta == 1.0 {
        (-2.0 * r).exp()
    } else {
        1.0 + eta * (-2.0 * r).exp_m1()
    }
}

/// Capacity bound of one EPR mode with squeezing `r` behind loss `eta`.
pub fn mode_capacity(r: f64, eta: f64, bound: Bound) -> Result<f64> {
    let n = n_from_loss(r, eta)?;
    if n == 0.0 {
        return Err(Error::domain("thermal parameter underflowed to 0"));
    }
    bound.single(n)
}

/// q-nats to qubits.
pub fn to_qubits(qnats: f64) -> f64 {
    qnats / std::f64::consts::LN_2
}

/// The Choi state of the thermal-like channel: a two-mode squeezed state
/// with squeezing `s` whose first mode passed through the channel.
pub fn choi_state(n_param: f64, s: f64) -> Result<GaussianState> {
    ensure_nonnegative("N", n_param)?;
    let purification = epr_cm(s)?;
    apply_teleport_to_mode(&purification, &TeleportNoise::thermal(n_param)?, 0)
}

/// Symplectic eigenvalue of the channel output `nu^B = N + cosh(2s)/2`.
pub fn choi_reduced_nu(n_param: f64, s: f64) -> f64 {
    n_param + 0.5 * (2.0 * s).cosh()
}

/// Symplectic eigenvalues `(nu_+, nu_-)` of the Choi state. The smaller one
/// uses `nu_+ nu_- = (1 + 2 N cosh 2s) / 4` to avoid cancellation.
pub fn choi_nu_pm(n_param: f64, s: f64) -> (f64, f64) {
    let n = n_param;
    let c = (2.0 * s).cosh();
    let a = 1.0 + 2.0 * n * n + 2.0 * n * c;
    let b = 2.0 * n * (1.0 + n * n + 2.0 * n * c).sqrt();
    let root = (a + b).sqrt();
    (0.5 * root, (1.0 + 2.0 * n * c) / (2.0 * root))
}

/// Symplectic eigenvalues `(d_+, d_-)` of the partially time-reversed Choi
/// state, rescaled by `cosh(2s)` so the expression holds for any `s`.
pub fn choi_reversed_d_pm(n_param: f64, s: f64) -> (f64, f64) {
    let n = n_param;
    let u = 1.0 / (2.0 * s).cosh();
    let a = 2.0 + 2.0 * n * u + (2.0 * n * n - 1.0) * u * u;
    let b = 2.0 * (n * u + 1.0) * (1.0 - u * u + n * n * u * u).sqrt();
    let root = (a + b).sqrt();
    let d_minus = (u + 2.0 * n) / (2.0 * root);
    let d_plus = if u > 0.0 { 0.5 * root / u } else { f64::INFINITY };
    (d_plus, d_minus)
}

/// `g(nu - 1/2)` from `ln nu`, for `nu` large enough that `nu` itself may
/// not be representable.
fn g_from_ln_nu(ln_nu: f64) -> f64 {
    let ln_w = ln_nu + (-0.5 * (-ln_nu).exp()).ln_1p();
    let x = (-ln_w).exp();
    ln_w + x.ln_1p() + if x > 0.0 { x.ln_1p() / x } else { 1.0 }
}

/// Coherent information of the thermal-like channel for an EPR input with
/// purification squeezing `s`:
/// `g(nu^B - 1/2) - g(nu_+ - 1/2) - g(nu_- - 1/2)`. Increases with `s`
/// towards `-1 - ln N`.
pub fn coherent_information_finite_s(n_param: f64, s: f64) -> Result<f64> {
    ensure_positive_n(n_param)?;
    ensure_nonnegative("purification squeezing s", s)?;
    let n = n_param;
    if s <= LOG_DOMAIN_S {
        let nu_b = choi_reduced_nu(n, s);
        let (nu_p, nu_m) = choi_nu_pm(n, s);
        let w = |nu: f64| (nu - 0.5).max(0.0);
        return Ok(g_unchecked(w(nu_b)) - g_unchecked(w(nu_p)) - g_unchecked(w(nu_m)));
    }
    // cosh(2s) = e^{2s} (1 + e^{-4s}) / 2, tracked through its logarithm
    let ln_c = 2.0 * s - std::f64::consts::LN_2 + (-4.0 * s).exp().ln_1p();
    let u = (-ln_c).exp();
    let ln_nu_b = ln_c - std::f64::consts::LN_2 + (2.0 * n * u).ln_1p();
    let beta = 2.0 * n
        + u * (1.0 + 2.0 * n * n)
        + 2.0 * n * u.sqrt() * (2.0 * n + u * (1.0 + n * n)).sqrt();
    let ln_nu_p = 0.5 * (ln_c + beta.ln()) - std::f64::consts::LN_2;
    let ln_nu_m = 0.5 * ln_c + (u + 2.0 * n).ln() - std::f64::consts::LN_2 - 0.5 * beta.ln();
    Ok(g_from_ln_nu(ln_nu_b) - g_from_ln_nu(ln_nu_p) - g_from_ln_nu(ln_nu_m))
}

/// Logarithmic negativity `max{0, -ln(2 d_-)}` of the Choi state with
/// purification squeezing `s`. Tends to `max{0, -ln N}`.
pub fn log_negativity_finite_s(n_param: f64, s: f64) -> Result<f64> {
    ensure_positive_n(n_param)?;
    ensure_nonnegative("purification squeezing s", s)?;
    let (_, d_minus) = choi_reversed_d_pm(n_param, s);
    Ok((-(2.0 * d_minus).ln()).max(0.0))
}

/// Bounds of one mode of a multiplexed resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeBounds {
    pub k: usize,
    pub r_k: f64,
    pub n_k: f64,
    pub qg: f64,
    pub qa: f64,
    pub qe: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BoundTotals {
    pub qg: f64,
    pub qa: f64,
    pub qe: f64,
}

impl BoundTotals {
    pub fn get(&self, bound: Bound) -> f64 {
        match bound {
            Bound::QG => self.qg,
            Bound::QA => self.qa,
            Bound::QE => self.qe,
        }
    }
}

/// Per-mode and summed capacity bounds of a squeezing distribution sent
/// through a channel with transmissivity `eta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityReport {
    pub per_mode: Vec<ModeBounds>,
    pub totals: BoundTotals,
    pub eta: f64,
}

pub fn report(dist: &SqueezingDistribution, eta: f64) -> Result<CapacityReport> {
    ensure_unit_interval("eta", eta)?;
    let mut per_mode = Vec::with_capacity(dist.len());
    let mut totals = BoundTotals::default();
    for (k, &r) in dist.amplitudes().iter().enumerate() {
        let n = n_from_loss(r, eta)?;
        if n == 0.0 {
            return Err(Error::domain(format!(
                "mode {k}: thermal parameter underflowed to 0 (r = {r})"
            )));
        }
        let row = ModeBounds {
            k,
            r_k: r,
            n_k: n,
            qg: qg_single(n)?,
            qa: qa_single(n)?,
            qe: qe_single(n)?,
        };
        totals.qg += row.qg;
        totals.qa += row.qa;
        totals.qe += row.qe;
        per_mode.push(row);
    }
    Ok(CapacityReport { per_mode, totals, eta })
}
