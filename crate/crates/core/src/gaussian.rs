//! Covariance matrices of bosonic Gaussian states and the spectral
//! quantities derived from them.
//!
//! Quadratures are interleaved per mode, `(q_1, p_1, ..., q_n, p_n)`, and the
//! vacuum has variance `1/2` in every quadrature.

use nalgebra::{linalg::Schur, DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Absolute slack on `nu >= 1/2` in the uncertainty check.
pub const PHYSICALITY_TOL: f64 = 1e-9;

const SCHUR_MAX_ITER: usize = 10_000;

/// Real symmetric covariance matrix of an `n`-mode state (`dim = 2n`).
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix {
    data: DMatrix<f64>,
}

impl CovMatrix {
    /// Wraps `data` after checking it is square, even-sized and symmetric.
    /// The stored matrix is the exact symmetric part of the input.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::validation(format!(
                "covariance matrix must be square with even positive dimension, got {rows}x{cols}"
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("covariance matrix has non-finite entries"));
        }
        let scale = data.amax();
        for i in 0..rows {
            for j in (i + 1)..rows {
                let diff = (data[(i, j)] - data[(j, i)]).abs();
                if diff > SYMMETRY_TOL * scale {
                    return Err(Error::validation(format!(
                        "covariance matrix is not symmetric at ({i}, {j}): {} vs {}",
                        data[(i, j)],
                        data[(j, i)]
                    )));
                }
            }
        }
        let sym = (&data + data.transpose()) * 0.5;
        Ok(CovMatrix { data: sym })
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::validation(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Vacuum covariance `(1/2) I` on `modes` modes.
    pub fn vacuum(modes: usize) -> Self {
        CovMatrix {
            data: DMatrix::identity(2 * modes, 2 * modes) * 0.5,
        }
    }

    /// Skips the checks; callers guarantee symmetry.
    pub(crate) fn from_symmetric_unchecked(data: DMatrix<f64>) -> Self {
        debug_assert!(data.is_square() && data.nrows() % 2 == 0);
        CovMatrix { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn modes(&self) -> usize {
        self.dim() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[(row, col)]
    }

    /// Slack allowed below `1/2` for this matrix. At least
    /// [`PHYSICALITY_TOL`]; grows with `|cm|^2` because the smallest
    /// symplectic eigenvalue of a strongly squeezed state is only resolved
    /// to about `eps * |cm|^2` by the stored entries.
    pub fn physicality_tol(&self) -> f64 {
        let frob2 = self.data.norm_squared();
        PHYSICALITY_TOL.max(32.0 * f64::EPSILON * frob2)
    }

    /// Checks the uncertainty relation `nu_j >= 1/2` for every mode.
    pub fn check_physical(&self) -> Result<SymplecticSpectrum> {
        let spectrum = symplectic_eigenvalues(self)?;
        let tol = self.physicality_tol();
        if let Some(nu) = spectrum.values.iter().find(|&&nu| nu < 0.5 - tol) {
            return Err(Error::validation(format!(
                "unphysical covariance matrix: symplectic eigenvalue {nu} < 1/2"
            )));
        }
        Ok(spectrum)
    }

    pub fn is_physical(&self) -> bool {
        self.check_physical().is_ok()
    }

    /// Block-diagonal sum, modes of `self` first.
    pub fn direct_sum(&self, other: &CovMatrix) -> CovMatrix {
        let (a, b) = (self.dim(), other.dim());
        let mut out = DMatrix::zeros(a + b, a + b);
        out.view_mut((0, 0), (a, a)).copy_from(&self.data);
        out.view_mut((a, a), (b, b)).copy_from(&other.data);
        CovMatrix { data: out }
    }
}

/// First and second moments of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cm: CovMatrix,
}

impl GaussianState {
    /// Builds a state, rejecting mismatched lengths and unphysical moments.
    pub fn new(mean: DVector<f64>, cm: CovMatrix) -> Result<Self> {
        if mean.len() != cm.dim() {
            return Err(Error::validation(format!(
                "mean has length {} but covariance matrix has dimension {}",
                mean.len(),
                cm.dim()
            )));
        }
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("mean vector has non-finite entries"));
        }
        cm.check_physical()?;
        Ok(GaussianState { mean, cm })
    }

    /// For moments produced by physical maps from physical states.
    pub(crate) fn from_parts_unchecked(mean: DVector<f64>, cm: CovMatrix) -> Self {
        debug_assert_eq!(mean.len(), cm.dim());
        GaussianState { mean, cm }
    }

    pub fn vacuum(modes: usize) -> Self {
        GaussianState {
            mean: DVector::zeros(2 * modes),
            cm: CovMatrix::vacuum(modes),
        }
    }

    /// Coherent state: vacuum covariance displaced to `mean`.
    pub fn coherent(mean: &[f64]) -> Result<Self> {
        if mean.is_empty() || mean.len() % 2 != 0 {
            return Err(Error::validation("coherent state needs an even, non-empty mean vector"));
        }
        let modes = mean.len() / 2;
        GaussianState::new(DVector::from_column_slice(mean), CovMatrix::vacuum(modes))
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cm(&self) -> &CovMatrix {
        &self.cm
    }

    pub fn modes(&self) -> usize {
        self.cm.modes()
    }

    pub fn into_parts(self) -> (DVector<f64>, CovMatrix) {
        (self.mean, self.cm)
    }
}

/// Symplectic eigenvalues, sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    pub values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }
}

/// `Omega ⊕ ... ⊕ Omega` with `Omega = [[0, -1], [1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = -1.0;
        omega[(2 * k + 1, 2 * k)] = 1.0;
    }
    omega
}

/// Moduli of the eigenvalues `±i nu_j` of `Omega · cm`.
///
/// The spectrum comes from a real Schur decomposition; closed forms are
/// kept out of this path so they can serve as independent checks.
pub fn symplectic_eigenvalues(cm: &CovMatrix) -> Result<SymplecticSpectrum> {
    let modes = cm.modes();
    if cm.matrix().clone().cholesky().is_none() {
        return Err(Error::validation("covariance matrix is not positive definite"));
    }
    let product = symplectic_form(modes) * cm.matrix();
    let schur = Schur::try_new(product, f64::EPSILON, SCHUR_MAX_ITER).ok_or_else(|| {
        Error::Numeric(format!(
            "Schur decomposition did not converge for covariance matrix {}",
            cm.matrix()
        ))
    })?;
    let mut moduli: Vec<f64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.im.abs())
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    // eigenvalues come in conjugate pairs ±i nu
    let values = moduli
        .chunks_exact(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect();
    Ok(SymplecticSpectrum { values })
}

/// Entropy of a thermal mode with mean occupation `w`, in nats:
/// `(w+1) ln(w+1) - w ln w`.
pub fn g_entropy(w: f64) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(Error::domain(format!("g(w) needs w >= 0, got {w}")));
    }
    Ok(g_unchecked(w))
}

pub(crate) fn g_unchecked(w: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else if w < 1.0 {
        (w + 1.0) * w.ln_1p() - w * w.ln()
    } else {
        // ln(w+1) + w ln(1 + 1/w), free of the large-w cancellation
        w.ln_1p() + w * (1.0 / w).ln_1p()
    }
}

/// Von Neumann entropy `sum_j g(nu_j - 1/2)` in nats.
pub fn von_neumann_entropy(cm: &CovMatrix) -> Result<f64> {
    let spectrum = cm.check_physical()?;
    Ok(spectrum
        .values
        .iter()
        .map(|&nu| g_unchecked((nu - 0.5).max(0.0)))
        .sum())
}

/// Partial time reversal of one mode of a two-mode state: flips the sign of
/// that mode's momentum row and column.
pub fn partial_time_reversal(cm: &CovMatrix, mode: usize) -> Result<CovMatrix> {
    if cm.dim() != 4 {
        return Err(Error::validation(format!(
            "partial time reversal needs a two-mode matrix, got dimension {}",
            cm.dim()
        )));
    }
    if mode > 1 {
        return Err(Error::validation(format!("mode index {mode} out of range for two modes")));
    }
    let p = 2 * mode + 1;
    let mut out = cm.matrix().clone();
    for j in 0..4 {
        if j != p {
            out[(p, j)] = -out[(p, j)];
            out[(j, p)] = -out[(j, p)];
        }
    }
    Ok(CovMatrix::from_symmetric_unchecked(out))
}

/// Logarithmic negativity `max{0, -ln(2 d_-)}` of a two-mode state, where
/// `d_-` is the smallest symplectic eigenvalue after partial time reversal.
pub fn log_negativity(cm: &CovMatrix) -> Result<f64> {
    if cm.dim() != 4 {
        return Err(Error::validation(format!(
            "logarithmic negativity needs a two-mode matrix, got dimension {}",
            cm.dim()
        )));
    }
    cm.check_physical()?;
    let reversed = partial_time_reversal(cm, 1)?;
    let d_minus = symplectic_eigenvalues(&reversed)?.smallest();
    Ok((-(2.0 * d_minus).ln()).max(0.0))
}
