//! The two public-communication constructions of the honest marginal.
//!
//! In each, two honest parties share a privately drawn TMSV-like pair, the
//! third draws a vacuum-variance variable, one of the pair broadcasts a
//! Gaussian variable `x_E`, and everyone displaces `x_α = z_α + α_x x_E`.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::gauss::GaussianVector;
use crate::params::DerivedParams;
use crate::quantum::tmsv_omega;

/// Index of each honest party in coefficient arrays.
pub const ALICE: usize = 0;
pub const BOB: usize = 1;
pub const CLARE: usize = 2;

pub const HONEST_LABELS: [&str; 3] = ["A", "B", "C"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Splitting {
    /// Bob alone against Alice and Clare; `x_E1` is broadcast.
    #[serde(rename = "B-(AC)")]
    BvsAC,
    /// Clare alone against Alice and Bob; `x_E2` is broadcast.
    #[serde(rename = "C-(AB)")]
    CvsAB,
}

impl Splitting {
    pub const ALL: [Splitting; 2] = [Splitting::BvsAC, Splitting::CvsAB];

    /// Honest party indices drawing the correlated pair.
    pub fn pair(self) -> [usize; 2] {
        match self {
            Splitting::BvsAC => [ALICE, CLARE],
            Splitting::CvsAB => [ALICE, BOB],
        }
    }

    pub fn lone(self) -> usize {
        match self {
            Splitting::BvsAC => BOB,
            Splitting::CvsAB => CLARE,
        }
    }

    /// Label of the broadcast variable.
    pub fn public_label(self) -> &'static str {
        match self {
            Splitting::BvsAC => "E1",
            Splitting::CvsAB => "E2",
        }
    }

    /// The Eve variable erased by this construction's discard channel.
    pub fn erased_label(self) -> &'static str {
        match self {
            Splitting::BvsAC => "E2",
            Splitting::CvsAB => "E1",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Splitting::BvsAC => "b-ac",
            Splitting::CvsAB => "c-ab",
        }
    }
}

impl fmt::Display for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Splitting::BvsAC => write!(f, "B-(AC)"),
            Splitting::CvsAB => write!(f, "C-(AB)"),
        }
    }
}

/// Full parameterization of one construction. Variances are in the
/// standard scale (`⟨z²⟩`), matrices in CCM scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingProtocol {
    pub splitting: Splitting,
    pub r: f64,
    /// CCM of the privately drawn pair, ordered as [`Splitting::pair`].
    pub private_ccm: DMatrix<f64>,
    pub solo_variance: f64,
    pub public_variance: f64,
    /// `(A_x, B_x, C_x)`
    pub coeffs_x: [f64; 3],
    /// `(A_p, B_p, C_p)`
    pub coeffs_p: [f64; 3],
}

impl SplittingProtocol {
    /// `e = −½ (A_x A_p + B_x B_p + C_x C_p)`.
    pub fn e_weight(&self) -> f64 {
        -0.5 * self
            .coeffs_x
            .iter()
            .zip(&self.coeffs_p)
            .map(|(x, p)| x * p)
            .sum::<f64>()
    }

    /// Joint CCM of `(z_A, z_B, z_C, x_E)` before displacement.
    pub fn source_ccm(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(4, 4);
        let [i, j] = self.splitting.pair();
        m[(i, i)] = self.private_ccm[(0, 0)];
        m[(i, j)] = self.private_ccm[(0, 1)];
        m[(j, i)] = self.private_ccm[(1, 0)];
        m[(j, j)] = self.private_ccm[(1, 1)];
        let k = self.splitting.lone();
        m[(k, k)] = 2.0 * self.solo_variance;
        m[(3, 3)] = 2.0 * self.public_variance;
        m
    }

    /// Displacement map `(z_A, z_B, z_C, x_E) ↦ (x_A, x_B, x_C, x_E)`.
    pub fn displacement_matrix(&self) -> DMatrix<f64> {
        let mut t = DMatrix::identity(4, 4);
        for (k, c) in self.coeffs_x.iter().enumerate() {
            t[(k, 3)] = *c;
        }
        t
    }

    pub fn labels(&self) -> [&'static str; 4] {
        ["A", "B", "C", self.splitting.public_label()]
    }
}

pub fn protocol(splitting: Splitting, r: f64) -> Result<SplittingProtocol> {
    let p = DerivedParams::new(r)?;
    Ok(match splitting {
        Splitting::BvsAC => SplittingProtocol {
            splitting,
            r,
            private_ccm: tmsv_omega(p.m_ac)?,
            solo_variance: 0.5,
            public_variance: 2.0 * p.x,
            coeffs_x: [0.5, 1.0, -0.5],
            coeffs_p: [-0.5, 1.0, -0.5],
        },
        Splitting::CvsAB => {
            let cx = -(-2.0 * r).exp_m1();
            SplittingProtocol {
                splitting,
                r,
                private_ccm: tmsv_omega(p.m_ab)?,
                solo_variance: 0.5,
                public_variance: p.y / 2.0,
                coeffs_x: [1.0 / (2.0 * p.y), -p.e2r / p.y, cx],
                coeffs_p: [-1.0 / (2.0 * p.y), -p.e2r / p.y, cx],
            }
        }
    })
}

/// Exact joint distribution of `(x_A, x_B, x_C, x_E)` produced by the protocol.
pub fn compose_protocol(p: &SplittingProtocol) -> Result<GaussianVector> {
    let sources = GaussianVector::new(&["zA", "zB", "zC", "xE"], p.source_ccm())?;
    sources.linear_transform(&p.displacement_matrix(), &p.labels())
}
