//! Linear decomposition of one of Eve's variables over the protocol's
//! private sources and the other, broadcast Eve variable:
//!
//! `x_Ej = −A_p z_A − B_p z_B − C_p z_C + e x_Ek + χ_Ej`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::pi_distribution;
use super::protocol::{protocol, Splitting, SplittingProtocol};
use crate::error::{GbiError, Result};
use crate::gauss::{spd_solve, submatrix};
use crate::params::DerivedParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EveDecomposition {
    pub r: f64,
    /// Decomposed variable `x_Ej`.
    pub j: u8,
    /// Weights of `(z_A, z_B, z_C, x_Ek)` from the protocol coefficients.
    pub coeffs: [f64; 4],
    /// `⟨χ²⟩` in the standard scale, closed form.
    pub residual_variance: f64,
    /// Same weights from regressing `x_Ej` on the sources within `Π`.
    pub regression_coeffs: [f64; 4],
    pub regression_residual_variance: f64,
    /// Standard-scale covariance of `(z_A, z_B, z_C, x_Ek)`.
    #[serde(skip)]
    source_covariance: DMatrix<f64>,
}

impl EveDecomposition {
    /// Largest disagreement between the closed-form and regression paths.
    pub fn discrepancy(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.regression_coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(
                (self.residual_variance - self.regression_residual_variance).abs(),
                f64::max,
            )
    }

    /// `⟨x_Ej²⟩` rebuilt from the closed-form weights and the source
    /// covariances.
    pub fn reconstructed_variance(&self) -> f64 {
        let w = nalgebra::DVector::from_row_slice(&self.coeffs);
        (w.transpose() * &self.source_covariance * &w)[(0, 0)] + self.residual_variance
    }
}

/// Decompose `x_E1` (`j = 1`, via the `C-(AB)` protocol) or `x_E2`
/// (`j = 2`, via the `B-(AC)` protocol).
pub fn eve_decomposition(r: f64, j: u8) -> Result<EveDecomposition> {
    let params = DerivedParams::new(r)?;
    let (splitting, residual_variance) = match j {
        1 => (Splitting::CvsAB, 1.0 / (2.0 * params.y)),
        2 => (Splitting::BvsAC, 1.0 / (8.0 * params.x)),
        _ => {
            return Err(GbiError::Domain(format!(
                "Eve variable index {j} not in {{1, 2}}"
            )))
        }
    };
    let p = protocol(splitting, r)?;
    let e = p.e_weight();
    let coeffs = [-p.coeffs_p[0], -p.coeffs_p[1], -p.coeffs_p[2], e];
    let (regression_coeffs, regression_residual_variance) = regress(&p)?;
    Ok(EveDecomposition {
        r,
        j,
        coeffs,
        residual_variance,
        regression_coeffs,
        regression_residual_variance,
        source_covariance: p.source_ccm() * 0.5,
    })
}

/// Undo the displacements inside `Π` and regress the erased variable on
/// `(z_A, z_B, z_C, x_Ek)`.
fn regress(p: &SplittingProtocol) -> Result<([f64; 4], f64)> {
    let pi = pi_distribution(p.r)?;
    let k = pi.index_of(p.splitting.public_label())?;
    let target = pi.index_of(p.splitting.erased_label())?;
    let honest = [pi.index_of("A")?, pi.index_of("B")?, pi.index_of("C")?];
    // rows: z_A, z_B, z_C, x_Ek, x_Ej
    let mut t = DMatrix::zeros(5, pi.dim());
    for (row, (&col, &c)) in honest.iter().zip(&p.coeffs_x).enumerate() {
        t[(row, col)] = 1.0;
        t[(row, k)] = -c;
    }
    t[(3, k)] = 1.0;
    t[(4, target)] = 1.0;
    let joint = pi.linear_transform(&t, &["zA", "zB", "zC", "xEk", "xEj"])?;
    let s = joint.ccm();
    let src = [0, 1, 2, 3];
    let s_zz = submatrix(s, &src, &src);
    let s_zj = submatrix(s, &src, &[4]);
    let beta = spd_solve(&s_zz, &s_zj)?;
    let residual_ccm = s[(4, 4)] - (s_zj.transpose() * &beta)[(0, 0)];
    Ok((
        [beta[(0, 0)], beta[(1, 0)], beta[(2, 0)], beta[(3, 0)]],
        residual_ccm / 2.0,
    ))
}
