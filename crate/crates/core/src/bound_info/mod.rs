//! Constructions around the five-variable distribution `Π` with CCM `X(r)`.
//!
//! `Π` carries secret correlations across the `A-(BC)` cut only. The two
//! other cuts are covered by explicit public-communication protocols
//! ([`protocol`]), the hidden correlations are exposed by the joint
//! rotation of Bob's and Clare's variables ([`activation`]), and the
//! role of each of Eve's variables is probed by the scenarios in
//! [`scenarios`].

pub mod activation;
pub mod decomposition;
pub mod protocol;
pub mod scenarios;
pub mod search;

use serde::Serialize;

use crate::error::Result;
use crate::gauss::GaussianVector;
use crate::quantum::purification_x_matrix;
use crate::PI_LABELS;

pub use activation::{
    activate, activate_with, activated_delta_rr, delta_i_rr_closed, ActivationBranch,
    ACTIVATION_BRANCH,
};
pub use decomposition::{eve_decomposition, EveDecomposition};
pub use protocol::{compose_protocol, protocol, Splitting, SplittingProtocol};
pub use scenarios::{
    appendix_a_delta_dr, appendix_a_optimize, appendix_b_scenario, intrinsic_discard_bound,
    raw_split, scenario_drop, AppendixAOptimum, DiscardBound, Reconciliation, ScenarioResult,
    ThresholdScenario,
};
pub use search::{find_threshold, Threshold};

/// `Π(r)`: labels `(A, B, C, E1, E2)` with CCM `X(r)`.
pub fn pi_distribution(r: f64) -> Result<GaussianVector> {
    GaussianVector::new(&PI_LABELS, purification_x_matrix(r)?)
}

/// The three group informations behind the distillability criterion,
/// and the two reconciliation differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoDifferences {
    pub i_ab: f64,
    pub i_ae: f64,
    pub i_be: f64,
    /// `I_AB − I_AE`
    pub delta_dr: f64,
    /// `I_AB − I_BE`
    pub delta_rr: f64,
}

impl InfoDifferences {
    pub fn new(i_ab: f64, i_ae: f64, i_be: f64) -> Self {
        Self {
            i_ab,
            i_ae,
            i_be,
            delta_dr: i_ab - i_ae,
            delta_rr: i_ab - i_be,
        }
    }

    /// Sufficient condition for key distillability.
    pub fn distillable(&self) -> bool {
        self.delta_dr.max(self.delta_rr) > 0.0
    }
}

/// Information differences for honest groups `alice`, `bob` against `eve`.
pub fn delta_i<S: AsRef<str>>(
    g: &GaussianVector,
    alice: &[S],
    bob: &[S],
    eve: &[S],
) -> Result<InfoDifferences> {
    // reject overlaps up front, including alice/eve and bob/eve pairs
    g.conditional_mi(alice, bob, eve)?;
    Ok(InfoDifferences::new(
        g.mutual_information(alice, bob)?,
        g.mutual_information(alice, eve)?,
        g.mutual_information(bob, eve)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{homodyne_x_all, purification_cm};
    use nalgebra::DMatrix;

    #[test]
    fn pi_is_homodyned_purification() {
        for r in [0.05, 0.5, 1.3, 2.0] {
            let a = pi_distribution(r).unwrap();
            let b = homodyne_x_all(&purification_cm(r).unwrap(), &PI_LABELS).unwrap();
            assert_eq!(a, b);
        }
        let p = pi_distribution(0.5).unwrap();
        assert!((p.entry("B", "E2").unwrap() + 1f64.exp()).abs() < 1e-14);
        assert!(pi_distribution(-0.1).is_err());
    }

    #[test]
    fn independent_eve() {
        let mut m = DMatrix::identity(3, 3) * 1.5;
        m[(0, 1)] = 0.8;
        m[(1, 0)] = 0.8;
        let g = GaussianVector::new(&["a", "b", "e"], m).unwrap();
        let d = delta_i(&g, &["a"], &["b"], &["e"]).unwrap();
        assert_eq!(d.i_ae, 0.0);
        assert_eq!(d.delta_dr, d.i_ab);
        assert_eq!(d.delta_rr, d.i_ab);
        assert!(d.distillable());
    }

    #[test]
    fn raw_split_not_detected_at_half() {
        let d = raw_split(0.5).unwrap().info;
        assert!(d.delta_dr < 0.0 && d.delta_rr < 0.0, "{d:?}");
        assert!(!d.distillable());
    }

    #[test]
    fn consistency_of_stored_differences() {
        let d = delta_i(
            &pi_distribution(0.8).unwrap(),
            &["A"],
            &["B", "C"],
            &["E1", "E2"],
        )
        .unwrap();
        assert!((d.delta_dr - (d.i_ab - d.i_ae)).abs() <= 1e-12);
        assert!((d.delta_rr - (d.i_ab - d.i_be)).abs() <= 1e-12);
    }

    #[test]
    fn overlapping_groups_rejected() {
        let g = pi_distribution(0.5).unwrap();
        assert!(delta_i(&g, &["A"], &["B"], &["A"]).is_err());
    }
}
