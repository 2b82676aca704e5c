//! The teleportation channel induced by a two-mode Gaussian resource, and
//! the loss, attenuator and amplifier maps acting on Gaussian states.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{ensure_nonnegative, ensure_unit_interval, Error, Result};
use crate::gaussian::{CovMatrix, GaussianState};

/// Default tolerance for recognising isotropic thermal-like noise.
pub const THERMAL_TOL: f64 = 1e-9;

/// Displacement `m_f` and noise matrix `gamma_f` of the teleportation
/// channel. The channel adds `sqrt(2) m_f` to the mean and `2 gamma_f` to
/// the covariance matrix of the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeleportNoise {
    pub mean_f: Vector2<f64>,
    pub gamma_f: Matrix2<f64>,
}

impl TeleportNoise {
    pub fn new(mean_f: Vector2<f64>, gamma_f: Matrix2<f64>) -> Result<Self> {
        if (gamma_f[(0, 1)] - gamma_f[(1, 0)]).abs() > 1e-12 * gamma_f.amax().max(1.0) {
            return Err(Error::validation("gamma_f must be symmetric"));
        }
        // 2x2 PSD: nonnegative diagonal and determinant
        let det = gamma_f.determinant();
        if gamma_f[(0, 0)] < -1e-15 || gamma_f[(1, 1)] < -1e-15 || det < -1e-15 {
            return Err(Error::validation("gamma_f must be positive semidefinite"));
        }
        Ok(TeleportNoise { mean_f, gamma_f })
    }

    /// Noise-free channel (infinitely squeezed resource).
    pub fn ideal() -> Self {
        TeleportNoise {
            mean_f: Vector2::zeros(),
            gamma_f: Matrix2::zeros(),
        }
    }

    /// Isotropic noise `2 gamma_f = N I` with zero displacement.
    pub fn thermal(n_param: f64) -> Result<Self> {
        ensure_nonnegative("N", n_param)?;
        Ok(TeleportNoise {
            mean_f: Vector2::zeros(),
            gamma_f: Matrix2::identity() * (0.5 * n_param),
        })
    }

    /// The added covariance `2 gamma_f`.
    pub fn added_noise(&self) -> Matrix2<f64> {
        self.gamma_f * 2.0
    }
}

/// Thermal-like channel adding variance `N` to each quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalLikeChannel {
    pub n_param: f64,
}

impl ThermalLikeChannel {
    pub fn new(n_param: f64) -> Result<Self> {
        ensure_nonnegative("N", n_param)?;
        Ok(ThermalLikeChannel { n_param })
    }
}

/// Beam-splitter loss with transmissivity `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    pub eta: f64,
}

impl LossModel {
    pub fn new(eta: f64) -> Result<Self> {
        ensure_unit_interval("eta", eta)?;
        Ok(LossModel { eta })
    }
}

/// Two-mode squeezed vacuum with squeezing amplitude `r`, ordered
/// `(q_A, p_A, q_B, p_B)`.
pub fn epr_cm(r: f64) -> Result<GaussianState> {
    ensure_nonnegative("squeezing amplitude r", r)?;
    let (c, s) = ((2.0 * r).cosh() * 0.5, (2.0 * r).sinh() * 0.5);
    #[rustfmt::skip]
    let cm = DMatrix::from_row_slice(4, 4, &[
        c,   0.0, s,   0.0,
        0.0, c,   0.0, -s,
        s,   0.0, c,   0.0,
        0.0, -s,  0.0, c,
    ]);
    Ok(GaussianState::from_parts_unchecked(
        DVector::zeros(4),
        CovMatrix::from_symmetric_unchecked(cm),
    ))
}

/// Orthogonal change to collective quadratures `(q_-, p_-, q_+, p_+)`:
/// `R = (1/sqrt 2) [[I, I], [-I, I]]`.
pub fn collective_transform() -> DMatrix<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let r = DMatrix::from_row_slice(4, 4, &[
        h,   0.0, h,   0.0,
        0.0, h,   0.0, h,
        -h,  0.0, h,   0.0,
        0.0, -h,  0.0, h,
    ]);
    r
}

/// Moments of `resource` in collective quadratures: `(R^T m, R^T gamma R)`.
pub fn to_collective(resource: &GaussianState) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if resource.cm().dim() != 4 {
        return Err(Error::validation(format!(
            "teleportation resource must be a two-mode state, got dimension {}",
            resource.cm().dim()
        )));
    }
    let r = collective_transform();
    let mean = r.transpose() * resource.mean();
    let cm = r.transpose() * resource.cm().matrix() * &r;
    Ok((mean, cm))
}

const Q_MINUS: usize = 0;
const P_PLUS: usize = 3;

/// Channel noise induced by a two-mode resource: the `(q_-, p_+)` entries of
/// the collective moments.
pub fn noise_from_resource(resource: &GaussianState) -> Result<TeleportNoise> {
    let (mean, cm) = to_collective(resource)?;
    let idx = [Q_MINUS, P_PLUS];
    let mean_f = Vector2::new(mean[idx[0]], mean[idx[1]]);
    let mut gamma_f = Matrix2::zeros();
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            gamma_f[(a, b)] = cm[(i, j)];
        }
    }
    // the transform leaves exact symmetry only up to rounding
    let off = 0.5 * (gamma_f[(0, 1)] + gamma_f[(1, 0)]);
    gamma_f[(0, 1)] = off;
    gamma_f[(1, 0)] = off;
    TeleportNoise::new(mean_f, gamma_f)
}

fn require_single_mode(state: &GaussianState, what: &str) -> Result<()> {
    if state.cm().dim() != 2 {
        return Err(Error::validation(format!(
            "{what} acts on a single mode, got dimension {}",
            state.cm().dim()
        )));
    }
    Ok(())
}

/// Teleports a single-mode state: `m <- m + sqrt(2) m_f`, `gamma <- gamma + 2 gamma_f`.
pub fn apply_teleport(input: &GaussianState, noise: &TeleportNoise) -> Result<GaussianState> {
    require_single_mode(input, "teleportation")?;
    let shift = noise.mean_f * std::f64::consts::SQRT_2;
    let mean = input.mean() + DVector::from_column_slice(shift.as_slice());
    let added = noise.added_noise();
    let mut cm = input.cm().matrix().clone();
    for i in 0..2 {
        for j in 0..2 {
            cm[(i, j)] += added[(i, j)];
        }
    }
    Ok(GaussianState::from_parts_unchecked(
        mean,
        CovMatrix::from_symmetric_unchecked(cm),
    ))
}

/// Applies the teleportation channel to one mode of a multimode state,
/// leaving the other modes untouched.
pub fn apply_teleport_to_mode(
    state: &GaussianState,
    noise: &TeleportNoise,
    mode: usize,
) -> Result<GaussianState> {
    if mode >= state.modes() {
        return Err(Error::validation(format!(
            "mode index {mode} out of range for {} modes",
            state.modes()
        )));
    }
    let shift = noise.mean_f * std::f64::consts::SQRT_2;
    let added = noise.added_noise();
    let mut mean = state.mean().clone();
    let mut cm = state.cm().matrix().clone();
    for i in 0..2 {
        mean[2 * mode + i] += shift[i];
        for j in 0..2 {
            cm[(2 * mode + i, 2 * mode + j)] += added[(i, j)];
        }
    }
    Ok(GaussianState::from_parts_unchecked(
        mean,
        CovMatrix::from_symmetric_unchecked(cm),
    ))
}

/// Beam-splitter loss `a -> sqrt(eta) a + sqrt(1-eta) v` on the selected
/// modes, mixing in vacuum.
pub fn apply_loss(state: &GaussianState, loss: LossModel, modes: &[usize]) -> Result<GaussianState> {
    ensure_unit_interval("eta", loss.eta)?;
    let n = state.modes();
    if let Some(&bad) = modes.iter().find(|&&m| m >= n) {
        return Err(Error::validation(format!(
            "mode index {bad} out of range for {n} modes"
        )));
    }
    let dim = 2 * n;
    let amp = loss.eta.sqrt();
    let mut scale = DVector::from_element(dim, 1.0);
    let mut selected = vec![false; n];
    for &m in modes {
        selected[m] = true;
    }
    for (m, &sel) in selected.iter().enumerate() {
        if sel {
            scale[2 * m] = amp;
            scale[2 * m + 1] = amp;
        }
    }
    let mut cm = state.cm().matrix().clone();
    for i in 0..dim {
        for j in 0..dim {
            cm[(i, j)] *= scale[i] * scale[j];
        }
    }
    for (m, &sel) in selected.iter().enumerate() {
        if sel {
            cm[(2 * m, 2 * m)] += 0.5 * (1.0 - loss.eta);
            cm[(2 * m + 1, 2 * m + 1)] += 0.5 * (1.0 - loss.eta);
        }
    }
    let mean = state.mean().component_mul(&scale);
    Ok(GaussianState::from_parts_unchecked(
        mean,
        CovMatrix::from_symmetric_unchecked(cm),
    ))
}

/// `cm <- scale * cm + added * I`, `mean <- sqrt(scale) * mean`.
fn single_mode_affine(state: &GaussianState, scale: f64, added: f64) -> GaussianState {
    let mean = state.mean() * scale.sqrt();
    let cm = state.cm().matrix() * scale + DMatrix::identity(2, 2) * added;
    GaussianState::from_parts_unchecked(mean, CovMatrix::from_symmetric_unchecked(cm))
}

/// Pure-loss attenuator with transmissivity `eta ∈ (0, 1]`.
pub fn apply_attenuator(state: &GaussianState, eta: f64) -> Result<GaussianState> {
    require_single_mode(state, "attenuator")?;
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::domain(format!("attenuator needs eta in (0, 1], got {eta}")));
    }
    Ok(single_mode_affine(state, eta, 0.5 * (1.0 - eta)))
}

/// Quantum-limited amplifier with gain `G >= 1`.
pub fn apply_amplifier(state: &GaussianState, gain: f64) -> Result<GaussianState> {
    require_single_mode(state, "amplifier")?;
    if !(gain >= 1.0) || !gain.is_finite() {
        return Err(Error::domain(format!("amplifier needs gain >= 1, got {gain}")));
    }
    Ok(single_mode_affine(state, gain, 0.5 * (gain - 1.0)))
}

/// Reads the thermal parameter `N` off isotropic, undisplaced noise.
pub fn thermal_n(noise: &TeleportNoise, tol: f64) -> Result<ThermalLikeChannel> {
    let added = noise.added_noise();
    let n = added[(0, 0)];
    let anisotropy = (added - Matrix2::identity() * n).amax();
    if anisotropy > tol {
        return Err(Error::Shape(format!(
            "channel noise {added} is not isotropic (deviation {anisotropy:e}); \
             thermal-like capacity formulas do not apply"
        )));
    }
    let displacement = noise.mean_f.norm();
    if displacement > tol {
        return Err(Error::Shape(format!(
            "channel has displacement |m_f| = {displacement:e}; \
             thermal-like capacity formulas do not apply"
        )));
    }
    ThermalLikeChannel::new(n.max(0.0))
}
