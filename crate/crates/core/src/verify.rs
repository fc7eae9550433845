//! The invariant suite behind `gbi verify`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::bound_info::activation::{activate, delta_i_rr_closed, BOB_ACTIVATED};
use crate::bound_info::protocol::{compose_protocol, protocol, Splitting, HONEST_LABELS};
use crate::bound_info::scenarios::ThresholdScenario;
use crate::bound_info::search::DEFAULT_TOL;
use crate::bound_info::{delta_i, eve_decomposition};
use crate::error::Result;
use crate::gauss::{asymmetry, cholesky, spd_solve, symmetrize, GaussianVector};
use crate::params::DerivedParams;
use crate::quantum::{purification_x_matrix, tmsv_omega, QuantumCM};
use crate::PI_LABELS;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// Worst value over the grid (or the single measured value).
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub r_grid: Vec<f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Additive perturbation of one symmetric pair of `X` entries, used to
/// confirm that the suite notices a wrong matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corruption {
    pub row: usize,
    pub col: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub r_grid: Vec<f64>,
    pub corrupt: Option<Corruption>,
    pub include_thresholds: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            r_grid: linspace(0.05, 2.0, 40),
            corrupt: None,
            include_thresholds: true,
        }
    }
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    /// Record `worst <= tol` where `worst` is the maximum of `measure` over `rs`.
    fn max_over<F>(&mut self, name: &str, tol: f64, rs: &[f64], measure: F)
    where
        F: FnMut(f64) -> Result<f64>,
    {
        self.record(name, tol, false, rs, measure)
    }

    /// As `max_over` but requires `worst < tol`.
    fn max_below<F>(&mut self, name: &str, tol: f64, rs: &[f64], measure: F)
    where
        F: FnMut(f64) -> Result<f64>,
    {
        self.record(name, tol, true, rs, measure)
    }

    fn record<F>(&mut self, name: &str, tol: f64, strict: bool, rs: &[f64], mut measure: F)
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut worst = 0.0_f64;
        let mut at = None;
        let mut failure = None;
        for &r in rs {
            match measure(r) {
                Ok(v) if v.is_nan() => {
                    failure = Some(format!("NaN at r = {r}"));
                    break;
                }
                Ok(v) => {
                    if at.is_none() || v > worst {
                        worst = v;
                        at = Some(r);
                    }
                }
                Err(e) => {
                    failure = Some(format!("r = {r}: {e}"));
                    break;
                }
            }
        }
        let (passed, detail) = match failure {
            Some(msg) => (false, msg),
            None => (
                if strict { worst < tol } else { worst <= tol },
                at.map_or("empty grid".into(), |r| format!("worst at r = {r}")),
            ),
        };
        self.checks.push(Check {
            name: name.into(),
            value: worst,
            tolerance: tol,
            passed,
            detail,
        });
    }

    fn threshold(&mut self, scenario: ThresholdScenario, expected: f64, tol: f64) {
        let name = format!("threshold_{}", scenario.key());
        match scenario.threshold(DEFAULT_TOL) {
            Ok(t) => {
                let dev = (t.root - expected).abs();
                self.checks.push(Check {
                    name,
                    value: t.root,
                    tolerance: tol,
                    passed: dev <= tol,
                    detail: format!("expected {expected} ± {tol}"),
                });
            }
            Err(e) => self.checks.push(Check {
                name,
                value: f64::NAN,
                tolerance: tol,
                passed: false,
                detail: e.to_string(),
            }),
        }
    }
}

pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let corrupt = opts.corrupt;
    let x_of = move |r: f64| -> Result<DMatrix<f64>> {
        let mut x = purification_x_matrix(r)?;
        if let Some(c) = corrupt {
            x[(c.row, c.col)] += c.delta;
            if c.row != c.col {
                x[(c.col, c.row)] += c.delta;
            }
        }
        Ok(x)
    };
    let pi_of = |r: f64| GaussianVector::new(&PI_LABELS, x_of(r)?);
    let gamma_of = |r: f64| -> Result<QuantumCM> {
        let x = x_of(r)?;
        let inv = symmetrize(&spd_solve(&x, &DMatrix::identity(5, 5))?);
        QuantumCM::from_blocks(&x, &inv)
    };
    let grid = &opts.r_grid;
    let fig_grid: Vec<f64> = grid.iter().copied().filter(|&r| r <= 1.5 + 1e-12).collect();
    let mut s = Suite { checks: Vec::new() };

    s.max_over("x_symmetric_positive_definite", 0.0, grid, |r| {
        let x = x_of(r)?;
        cholesky(&x)?;
        Ok(asymmetry(&x))
    });
    s.max_over("x_fixed_entry_a_e2", 0.0, grid, |r| {
        Ok((x_of(r)?[(0, 4)] - 0.5).abs())
    });
    for sp in Splitting::ALL {
        s.max_over(
            &format!("lopc_composition_{}", sp.slug().replace('-', "_")),
            1e-12,
            grid,
            |r| {
                let composed = compose_protocol(&protocol(sp, r)?)?.marginalize(&HONEST_LABELS)?;
                let target = pi_of(r)?.marginalize(&HONEST_LABELS)?;
                Ok((composed.ccm() - target.ccm()).amax())
            },
        );
    }
    s.max_over("conditional_mi_b_ac_given_e1", 1e-10, grid, |r| {
        pi_of(r)?.conditional_mi(&["B"], &["A", "C"], &["E1"])
    });
    s.max_over("conditional_mi_c_ab_given_e2", 1e-10, grid, |r| {
        pi_of(r)?.conditional_mi(&["C"], &["A", "B"], &["E2"])
    });
    s.max_over("purification_symplectic_purity", 1e-9, grid, |r| {
        let nu = gamma_of(r)?.symplectic_eigenvalues()?;
        Ok(nu.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max))
    });
    for (name, mode) in [("ppt_b_ac", 1usize), ("ppt_c_ab", 2)] {
        s.max_over(name, 1e-9, grid, |r| {
            let report = gamma_of(r)?.reduce(&[0, 1, 2])?.ppt_report(&[mode])?;
            Ok((1.0 - report.min_nu).max(0.0))
        });
    }
    s.max_over("eve_decomposition_paths", 1e-9, grid, |r| {
        Ok(eve_decomposition(r, 1)?
            .discrepancy()
            .max(eve_decomposition(r, 2)?.discrepancy()))
    });
    s.max_over("eve_decomposition_e2_weights", 1e-12, grid, |r| {
        let d = eve_decomposition(r, 2)?;
        let x = DerivedParams::new(r)?.x;
        let expected = [0.5, -1.0, 0.5, -0.5];
        let w = d
            .coeffs
            .iter()
            .zip(expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok(w.max((d.regression_residual_variance - 1.0 / (8.0 * x)).abs()))
    });
    s.max_over("activation_closed_vs_numeric", 1e-9, grid, |r| {
        let act = activate(&pi_of(r)?)?;
        let numeric = delta_i(&act, &["A"], &[BOB_ACTIVATED], &["E1", "E2"])?.delta_rr;
        Ok((numeric - delta_i_rr_closed(r)?).abs())
    });
    s.max_below("raw_split_undetected", 0.0, &fig_grid, |r| {
        let d = delta_i(&pi_of(r)?, &["A"], &["B", "C"], &["E1", "E2"])?;
        Ok(d.delta_dr.max(d.delta_rr))
    });
    s.max_over("tmsv_information", 1e-12, grid, |r| {
        let m = (2.0 * r).cosh();
        let g = GaussianVector::new(&["A", "B"], tmsv_omega(m)?)?;
        Ok((g.mutual_information(&["A"], &["B"])? - m.log2()).abs())
    });
    s.max_over("tmsv_difference_variance", 1e-12, grid, |r| {
        let g = GaussianVector::new(&["A", "B"], tmsv_omega((2.0 * r).cosh())?)?;
        let d = g.linear_transform(&DMatrix::from_row_slice(1, 2, &[1.0, -1.0]), &["d"])?;
        Ok((d.ccm()[(0, 0)] - 2.0 * (-2.0 * r).exp()).abs())
    });
    if opts.include_thresholds {
        s.threshold(ThresholdScenario::Activation, 0.166, 0.001);
        s.threshold(ThresholdScenario::DropE1, 0.156, 0.002);
        s.threshold(ThresholdScenario::AppendixA, 0.284, 0.002);
        s.threshold(ThresholdScenario::AppendixB1, 0.38, 0.005);
        s.threshold(ThresholdScenario::AppendixB2, 0.549, 0.005);
    }
    let passed = s.checks.iter().all(|c| c.passed);
    VerifyReport {
        r_grid: grid.clone(),
        checks: s.checks,
        passed,
    }
}
