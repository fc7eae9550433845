//! Activation of the hidden `A-(BC)` correlations by the joint rotation
//! `(x_B ± x_C)/√2`.
//!
//! The rotated pair is relabelled `B'` (Bob's new variable) and `C'`.
//! Bob keeps the `+` branch: with Eve holding `(E1, E2)` jointly, the
//! reverse-reconciliation difference of `(A, B', E1, E2)` then equals the
//! closed form in [`delta_i_rr_closed`] for every `r`. The `−` branch
//! gives a different curve and is rejected.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use super::{delta_i, pi_distribution, InfoDifferences};
use crate::error::{GbiError, Result};
use crate::gauss::GaussianVector;
use crate::params::DerivedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActivationBranch {
    Plus,
    Minus,
}

impl ActivationBranch {
    fn sign(self) -> f64 {
        match self {
            ActivationBranch::Plus => 1.0,
            ActivationBranch::Minus => -1.0,
        }
    }
}

/// Branch handed to Bob.
pub const ACTIVATION_BRANCH: ActivationBranch = ActivationBranch::Plus;

pub const BOB_ACTIVATED: &str = "B'";
pub const CLARE_ACTIVATED: &str = "C'";

/// Rotate `B, C` into `B' = (x_B ± x_C)/√2`, `C' = (x_B ∓ x_C)/√2`,
/// keeping the position of the other labels.
pub fn activate_with(g: &GaussianVector, branch: ActivationBranch) -> Result<GaussianVector> {
    let b = g.index_of("B")?;
    let c = g.index_of("C")?;
    let n = g.dim();
    let s = branch.sign();
    let mut t = DMatrix::identity(n, n);
    t[(b, b)] = FRAC_1_SQRT_2;
    t[(b, c)] = s * FRAC_1_SQRT_2;
    t[(c, b)] = FRAC_1_SQRT_2;
    t[(c, c)] = -s * FRAC_1_SQRT_2;
    let labels: Vec<&str> = g
        .labels()
        .iter()
        .map(|l| match l.as_str() {
            "B" => BOB_ACTIVATED,
            "C" => CLARE_ACTIVATED,
            other => other,
        })
        .collect();
    g.linear_transform(&t, &labels)
}

pub fn activate(g: &GaussianVector) -> Result<GaussianVector> {
    activate_with(g, ACTIVATION_BRANCH)
}

/// Information differences of `(A, B')` against `(E1, E2)` after activation.
pub fn activated_info(r: f64, branch: ActivationBranch) -> Result<InfoDifferences> {
    let act = activate_with(&pi_distribution(r)?, branch)?;
    delta_i(&act, &["A"], &[BOB_ACTIVATED], &["E1", "E2"])
}

/// Reverse-reconciliation difference from the numeric pipeline.
pub fn activated_delta_rr(r: f64) -> Result<f64> {
    Ok(activated_info(r, ACTIVATION_BRANCH)?.delta_rr)
}

/// Closed form of the activated reverse-reconciliation difference,
/// `log₂ √(N/D)` with quartics in `e^{2r}`.
pub fn delta_i_rr_closed(r: f64) -> Result<f64> {
    let p = DerivedParams::new(r)?;
    let e = p.e2r;
    let (e2, e3, e4) = (e * e, e * e * e, e * e * e * e);
    let num = 4.0 - 1.0 / e - 11.0 * e + 20.0 * e2 - 20.0 * e3 + 16.0 * e4;
    let den = 2.0 - 8.0 * e + 10.0 * e3 + 4.0 * e4;
    let ratio = num / den;
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(GbiError::Domain(format!(
            "closed form ratio {ratio} not positive at r = {r}"
        )));
    }
    Ok(0.5 * ratio.log2())
}
