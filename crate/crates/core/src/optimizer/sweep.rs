//! Grid drivers over energy and transmissivity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{optimize_flat, optimize_pdc, pdc_value, q_flat};
use crate::capacity::{mode_capacity, Bound};
use crate::error::{ensure_unit_interval, Error, Result};
use crate::multiplex::{effective_mode_number, r_for_photons};

/// How the energy at a grid point is spread over modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "coding", rename_all = "kebab-case")]
pub enum Coding {
    Single,
    Flat {
        #[serde(rename = "K")]
        modes: usize,
    },
    Pdc {
        mu: f64,
    },
    FlatOptimal,
    PdcOptimal,
}

impl Coding {
    pub fn label(&self) -> String {
        match self {
            Coding::Single => "single".into(),
            Coding::Flat { modes } => format!("flat-K{modes}"),
            Coding::Pdc { mu } => format!("pdc-mu{mu}"),
            Coding::FlatOptimal => "flat-optimal".into(),
            Coding::PdcOptimal => "pdc-optimal".into(),
        }
    }
}

/// A bound value together with the distribution that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub value: f64,
    pub k: f64,
    pub r: f64,
}

/// Evaluates `coding` at energy `n_ph`; optimal codings are optimised for
/// `bound` alone.
pub fn evaluate(coding: Coding, n_ph: f64, eta: f64, bound: Bound, mu_grid: &[f64]) -> Result<Point> {
    if n_ph == 0.0 {
        let k = match coding {
            Coding::Flat { modes } => modes as f64,
            Coding::Pdc { mu } => super::pdc_effective_modes(mu),
            _ => 1.0,
        };
        return Ok(Point { value: 0.0, k, r: 0.0 });
    }
    match coding {
        Coding::Single => {
            let r = r_for_photons(n_ph);
            Ok(Point { value: mode_capacity(r, eta, bound)?, k: 1.0, r })
        }
        Coding::Flat { modes } => Ok(Point {
            value: q_flat(modes, n_ph, eta, bound)?,
            k: modes as f64,
            r: r_for_photons(n_ph / modes as f64),
        }),
        Coding::Pdc { mu } => {
            let (value, dist) = pdc_value(mu, n_ph, eta, bound)?;
            Ok(Point { value, k: effective_mode_number(&dist)?, r: dist.max_amplitude() })
        }
        Coding::FlatOptimal => {
            let res = optimize_flat(n_ph, eta, bound)?;
            Ok(Point { value: res.best_value, k: res.best_k, r: res.r_opt() })
        }
        Coding::PdcOptimal => {
            let res = optimize_pdc(n_ph, eta, bound, mu_grid)?;
            Ok(Point { value: res.best_value, k: res.best_k, r: res.r_opt() })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    #[serde(default)]
    pub scale: GridScale,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::validation(format!("grid needs at least 2 steps, got {}", self.steps)));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::validation(format!(
                "grid needs finite start < stop, got [{}, {}]",
                self.start, self.stop
            )));
        }
        if self.scale == GridScale::Log && !(self.start > 0.0) {
            return Err(Error::validation("log grid needs start > 0"));
        }
        Ok(())
    }

    /// Grid points in ascending order, with both ends exact.
    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let last = (self.steps - 1) as f64;
        let mut pts: Vec<f64> = (0..self.steps)
            .map(|i| {
                let t = i as f64 / last;
                match self.scale {
                    GridScale::Linear => self.start + t * (self.stop - self.start),
                    GridScale::Log => (self.start.ln() + t * (self.stop / self.start).ln()).exp(),
                }
            })
            .collect();
        pts[0] = self.start;
        pts[self.steps - 1] = self.stop;
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    #[serde(rename = "qg_qnats")]
    pub qg: f64,
    #[serde(rename = "qa_qnats")]
    pub qa: f64,
    #[serde(rename = "qe_qnats")]
    pub qe: f64,
    pub k_opt: f64,
    pub r_opt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub label: String,
    pub rows: Vec<SweepRow>,
}

fn row(x: f64, coding: Coding, n_ph: f64, eta: f64, focus: Bound, mu_grid: &[f64]) -> Result<SweepRow> {
    let mut values = [0.0; 3];
    let mut focus_point = None;
    for (slot, b) in values.iter_mut().zip(Bound::ALL) {
        let p = evaluate(coding, n_ph, eta, b, mu_grid)?;
        *slot = p.value;
        if b == focus {
            focus_point = Some(p);
        }
    }
    let p = focus_point.expect("focus is one of the three bounds");
    Ok(SweepRow { x, qg: values[0], qa: values[1], qe: values[2], k_opt: p.k, r_opt: p.r })
}

fn sweep<F>(xs: &[f64], codings: &[Coding], eval: F) -> Result<Vec<SweepResult>>
where
    F: Fn(Coding, f64) -> Result<SweepRow> + Sync,
{
    codings
        .iter()
        .map(|&c| {
            let rows = xs.par_iter().map(|&x| eval(c, x)).collect::<Result<Vec<_>>>()?;
            Ok(SweepResult { label: c.label(), rows })
        })
        .collect()
}

fn check_ascending(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::validation("sweep grid is empty"));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation("sweep grid must be strictly ascending"));
    }
    Ok(())
}

/// One result per coding, rows over the energies in `grid`. `k_opt` and
/// `r_opt` describe the distribution chosen for `focus`.
pub fn sweep_energy(
    grid: &[f64],
    eta: f64,
    codings: &[Coding],
    focus: Bound,
    mu_grid: &[f64],
) -> Result<Vec<SweepResult>> {
    check_ascending(grid)?;
    ensure_unit_interval("eta", eta)?;
    if let Some(&n) = grid.iter().find(|&&n| !(n >= 0.0)) {
        return Err(Error::validation(format!("energies must be >= 0, got {n}")));
    }
    sweep(grid, codings, |c, n| row(n, c, n, eta, focus, mu_grid))
}

/// As [`sweep_energy`] with the transmissivity varying over `grid`.
pub fn sweep_loss(
    grid: &[f64],
    n_ph: f64,
    codings: &[Coding],
    focus: Bound,
    mu_grid: &[f64],
) -> Result<Vec<SweepResult>> {
    check_ascending(grid)?;
    for &eta in grid {
        ensure_unit_interval("eta", eta)?;
    }
    if !(n_ph >= 0.0) {
        return Err(Error::validation(format!("energy must be >= 0, got {n_ph}")));
    }
    sweep(grid, codings, |c, eta| row(eta, c, n_ph, eta, focus, mu_grid))
}
