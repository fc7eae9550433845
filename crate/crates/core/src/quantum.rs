//! Gaussian-state covariance matrices.
//!
//! Quadratures are ordered `x_1 … x_N, p_1 … p_N` and the vacuum has
//! `γ = I`. In this ordering a purification of the form `X ⊕ X⁻¹` is block
//! diagonal.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{GbiError, Result};
use crate::gauss::{check_symmetric, cholesky, spd_solve, submatrix, symmetrize, GaussianVector};
use crate::params::DerivedParams;

/// Physicality threshold on symplectic eigenvalues.
pub const PHYSICAL_TOL: f64 = 1e-9;
/// Relative tolerance for matching the `±ν` pairs of the spectrum.
pub const PAIRING_TOL: f64 = 1e-8;

/// The canonical form `[[0, I], [-I, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    omega: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        let n = n_modes;
        let mut omega = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            omega[(j, n + j)] = 1.0;
            omega[(n + j, j)] = -1.0;
        }
        Self { n_modes, omega }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.omega
    }
}

/// Covariance matrix of an `N`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCM {
    n_modes: usize,
    gamma: DMatrix<f64>,
}

impl QuantumCM {
    /// Checks shape and symmetry only; physicality is a separate question
    /// (partial transposes are routinely unphysical).
    pub fn new(gamma: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&gamma)?;
        if gamma.nrows() % 2 != 0 || gamma.nrows() == 0 {
            return Err(GbiError::Dimension(format!(
                "covariance matrix must be 2N x 2N, got {}",
                gamma.nrows()
            )));
        }
        Ok(Self {
            n_modes: gamma.nrows() / 2,
            gamma: symmetrize(&gamma),
        })
    }

    /// `x_block ⊕ p_block`.
    pub fn from_blocks(x_block: &DMatrix<f64>, p_block: &DMatrix<f64>) -> Result<Self> {
        let n = x_block.nrows();
        if p_block.nrows() != n || !x_block.is_square() || !p_block.is_square() {
            return Err(GbiError::Dimension("x and p blocks differ in shape".into()));
        }
        let mut gamma = DMatrix::zeros(2 * n, 2 * n);
        gamma.view_mut((0, 0), (n, n)).copy_from(x_block);
        gamma.view_mut((n, n), (n, n)).copy_from(p_block);
        Self::new(gamma)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            n_modes,
            gamma: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn x_block(&self) -> DMatrix<f64> {
        self.gamma
            .view((0, 0), (self.n_modes, self.n_modes))
            .clone_owned()
    }

    pub fn p_block(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        self.gamma.view((n, n), (n, n)).clone_owned()
    }

    /// Reduced state of the listed modes.
    pub fn reduce(&self, modes: &[usize]) -> Result<QuantumCM> {
        self.check_modes(modes)?;
        let idx: Vec<usize> = modes
            .iter()
            .copied()
            .chain(modes.iter().map(|m| m + self.n_modes))
            .collect();
        QuantumCM::new(submatrix(&self.gamma, &idx, &idx))
    }

    fn check_modes(&self, modes: &[usize]) -> Result<()> {
        if modes.is_empty() {
            return Err(GbiError::Domain("empty mode set".into()));
        }
        for (k, &m) in modes.iter().enumerate() {
            if m >= self.n_modes {
                return Err(GbiError::Domain(format!(
                    "mode {m} out of range for {} modes",
                    self.n_modes
                )));
            }
            if modes[..k].contains(&m) {
                return Err(GbiError::Domain(format!("mode {m} listed twice")));
            }
        }
        Ok(())
    }

    /// Symplectic spectrum, descending, one value per mode.
    ///
    /// Taken from the eigenvalues `±iν` of `Ωγ` (equivalently `±ν` of
    /// `iΩγ`) via a real Schur decomposition.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let omega = SymplecticForm::new(self.n_modes);
        let m = omega.matrix() * &self.gamma;
        let eig = m.complex_eigenvalues();
        let mut mags: Vec<f64> = eig.iter().map(|z| z.im.abs()).collect();
        if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(GbiError::Numerical("non-finite eigenvalue".into()));
        }
        mags.sort_by(|a, b| b.total_cmp(a));
        let mut out = Vec::with_capacity(self.n_modes);
        for pair in mags.chunks(2) {
            let (hi, lo) = (pair[0], pair[1]);
            if hi - lo > PAIRING_TOL * hi.max(1.0) {
                return Err(GbiError::Numerical(format!(
                    "unpaired symplectic spectrum: {hi} vs {lo}"
                )));
            }
            out.push(0.5 * (hi + lo));
        }
        Ok(out)
    }

    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        Ok(self
            .symplectic_eigenvalues()?
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }

    /// All symplectic eigenvalues at least `1 - 1e-9`.
    pub fn is_physical(&self) -> bool {
        // γ must also be positive definite; the spectrum alone does not see
        // negative-definite directions.
        cholesky(&self.gamma).is_ok()
            && self
                .symplectic_eigenvalues()
                .map(|nu| nu.iter().all(|&v| v >= 1.0 - PHYSICAL_TOL))
                .unwrap_or(false)
    }

    /// All symplectic eigenvalues within `1e-9` of one.
    pub fn is_pure(&self) -> bool {
        cholesky(&self.gamma).is_ok()
            && self
                .symplectic_eigenvalues()
                .map(|nu| nu.iter().all(|&v| (v - 1.0).abs() <= PHYSICAL_TOL))
                .unwrap_or(false)
    }

    /// Momentum sign flip on `modes`. The result need not be physical.
    pub fn partial_transpose(&self, modes: &[usize]) -> Result<QuantumCM> {
        self.check_modes(modes)?;
        let mut g = self.gamma.clone();
        let n = self.n_modes;
        for &m in modes {
            let k = n + m;
            for j in 0..2 * n {
                g[(k, j)] = -g[(k, j)];
            }
            for i in 0..2 * n {
                g[(i, k)] = -g[(i, k)];
            }
        }
        Ok(QuantumCM {
            n_modes: n,
            gamma: g,
        })
    }

    /// PPT test for the bipartition `modes | rest`.
    pub fn ppt_report(&self, modes: &[usize]) -> Result<PptReport> {
        let pt = self.partial_transpose(modes)?;
        let min_nu = pt.min_symplectic_eigenvalue()?;
        Ok(PptReport {
            min_nu,
            is_ppt: min_nu >= 1.0 - PHYSICAL_TOL,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptReport {
    pub min_nu: f64,
    pub is_ppt: bool,
}

/// `ω(m)`: diagonal `m`, off-diagonal `√(m² − 1)`.
pub fn tmsv_omega(m: f64) -> Result<DMatrix<f64>> {
    if !(m >= 1.0) || !m.is_finite() {
        return Err(GbiError::Domain(format!(
            "TMSV parameter m = {m} must be >= 1"
        )));
    }
    let off = (m * m - 1.0).sqrt();
    Ok(DMatrix::from_row_slice(2, 2, &[m, off, off, m]))
}

/// Two-mode squeezed vacuum, `ω(m) ⊕ ω(m)⁻¹`.
pub fn tmsv_cm(m: f64) -> Result<QuantumCM> {
    let w = tmsv_omega(m)?;
    // det ω = 1, so the inverse is the adjugate
    let off = w[(0, 1)];
    let inv = DMatrix::from_row_slice(2, 2, &[m, -off, -off, m]);
    QuantumCM::from_blocks(&w, &inv)
}

/// The 5×5 position covariance `X` of the purification, rows
/// `(A, B, C, E1, E2)`.
pub fn purification_x_matrix(r: f64) -> Result<DMatrix<f64>> {
    let DerivedParams {
        e2r, x, y, a, b, c, ..
    } = DerivedParams::new(r)?;
    #[rustfmt::skip]
    let rows = [
        a,         2.0 * x,  b,              2.0 * x,  0.5,
        2.0 * x,   c,        -2.0 * x,       4.0 * x,  -e2r,
        b,         -2.0 * x, a,              -2.0 * x, e2r - 0.5,
        2.0 * x,   4.0 * x,  -2.0 * x,       4.0 * x,  -2.0 * x,
        0.5,       -e2r,     e2r - 0.5,      -2.0 * x, y,
    ];
    Ok(DMatrix::from_row_slice(5, 5, &rows))
}

/// `Γ = X ⊕ X⁻¹`, a pure five-mode state.
pub fn purification_cm(r: f64) -> Result<QuantumCM> {
    let x = purification_x_matrix(r)?;
    let inv = symmetrize(&spd_solve(&x, &DMatrix::identity(5, 5))?);
    QuantumCM::from_blocks(&x, &inv)
}

/// Reduction of `Γ` to modes `A, B, C`.
pub fn bound_entangled_cm(r: f64) -> Result<QuantumCM> {
    purification_cm(r)?.reduce(&[0, 1, 2])
}

/// Position homodyne on every mode: the outcome CCM is the x-block.
pub fn homodyne_x_all<S: AsRef<str>>(cm: &QuantumCM, labels: &[S]) -> Result<GaussianVector> {
    let x = cm.x_block();
    cholesky(&x)?;
    GaussianVector::new(labels, x)
}
