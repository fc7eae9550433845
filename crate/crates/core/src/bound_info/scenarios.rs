//! Adversary scenarios: dropped Eve variables, locally constructed honest
//! variables, and the discard-channel bound on intrinsic information.

use nalgebra::DMatrix;
use serde::Serialize;

use super::activation::{activate, BOB_ACTIVATED};
use super::search::{find_threshold, maximize_2d, Threshold};
use super::{delta_i, pi_distribution, InfoDifferences};
use crate::error::{GbiError, Result};
use crate::gauss::GaussianVector;
use crate::params::DerivedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reconciliation {
    Direct,
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub name: String,
    pub gaussian: GaussianVector,
    /// `(alice, bob, eve)` label groups.
    pub groups: [Vec<String>; 3],
    pub info: InfoDifferences,
    pub threshold: Option<Threshold>,
}

impl ScenarioResult {
    fn evaluate(
        name: &str,
        gaussian: GaussianVector,
        alice: &[&str],
        bob: &[&str],
        eve: &[&str],
    ) -> Result<Self> {
        let info = delta_i(&gaussian, alice, bob, eve)?;
        let own = |g: &[&str]| g.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        Ok(Self {
            name: name.to_owned(),
            gaussian,
            groups: [own(alice), own(bob), own(eve)],
            info,
            threshold: None,
        })
    }

    pub fn value(&self, kind: Reconciliation) -> f64 {
        match kind {
            Reconciliation::Direct => self.info.delta_dr,
            Reconciliation::Reverse => self.info.delta_rr,
        }
    }
}

/// Discard `dropped`, then evaluate the information differences.
pub fn scenario_drop(
    g: &GaussianVector,
    dropped: &[&str],
    alice: &[&str],
    bob: &[&str],
    eve: &[&str],
) -> Result<ScenarioResult> {
    let kept = g.discard(dropped)?;
    let name = if dropped.is_empty() {
        "drop-none".to_owned()
    } else {
        format!("drop-{}", dropped.join("-"))
    };
    ScenarioResult::evaluate(&name, kept, alice, bob, eve)
}

/// `Π` across the `A-(BC)` cut with Eve holding both variables.
pub fn raw_split(r: f64) -> Result<ScenarioResult> {
    let pi = pi_distribution(r)?;
    ScenarioResult::evaluate("raw-A-(BC)", pi, &["A"], &["B", "C"], &["E1", "E2"])
}

pub fn activated_scenario(r: f64) -> Result<ScenarioResult> {
    let act = activate(&pi_distribution(r)?)?;
    ScenarioResult::evaluate("activated", act, &["A"], &[BOB_ACTIVATED], &["E1", "E2"])
}

/// `x_E1` dropped; Alice and Bob against `x_E2`.
pub fn drop_e1(r: f64) -> Result<ScenarioResult> {
    scenario_drop(&pi_distribution(r)?, &["E1"], &["A"], &["B"], &["E2"])
}

/// `x_E2` dropped; `x_A − x_B/2` against Clare with Eve holding `x_E1`.
pub fn drop_e2_combined(r: f64) -> Result<ScenarioResult> {
    let g = transformed(
        r,
        &[
            ("A'", &[("A", 1.0), ("B", -0.5)]),
            ("C", &[("C", 1.0)]),
            ("E1", &[("E1", 1.0)]),
        ],
    )?;
    ScenarioResult::evaluate("drop-E2-combined", g, &["A'"], &["C"], &["E1"])
}

type Row<'a> = (&'a str, &'a [(&'a str, f64)]);

/// Linear image of `Π(r)`: each output row is a weighted sum of `Π` labels.
fn transformed(r: f64, rows: &[Row<'_>]) -> Result<GaussianVector> {
    let pi = pi_distribution(r)?;
    let mut t = DMatrix::zeros(rows.len(), pi.dim());
    for (i, (_, terms)) in rows.iter().enumerate() {
        for (label, w) in terms.iter() {
            t[(i, pi.index_of(label)?)] += w;
        }
    }
    let labels: Vec<&str> = rows.iter().map(|(l, _)| *l).collect();
    pi.linear_transform(&t, &labels)
}

/// Direct-reconciliation difference for `x_A + g x_B` versus
/// `x_C + h x_B`, Eve holding the announced `x_B` and `x_E1`.
pub fn appendix_a_delta_dr(r: f64, g: f64, h: f64) -> Result<f64> {
    Ok(appendix_a_scenario(r, g, h)?.info.delta_dr)
}

pub fn appendix_a_scenario(r: f64, g: f64, h: f64) -> Result<ScenarioResult> {
    let dist = transformed(
        r,
        &[
            ("A'", &[("A", 1.0), ("B", g)]),
            ("C'", &[("C", 1.0), ("B", h)]),
            ("B", &[("B", 1.0)]),
            ("E1", &[("E1", 1.0)]),
        ],
    )?;
    ScenarioResult::evaluate("appendix-A", dist, &["A'"], &["C'"], &["B", "E1"])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixAOptimum {
    pub r: f64,
    pub g: f64,
    pub h: f64,
    pub delta_dr: f64,
}

pub const APPENDIX_A_GRID: (f64, f64, f64) = (-4.0, 4.0, 0.1);
pub const APPENDIX_A_XTOL: f64 = 1e-8;

/// Maximize the Appendix-A difference over the gains `(g, h)`.
///
/// The maximum sits on a one-dimensional ridge in `(g, h)`, so the
/// returned gains are one maximizer among many; only the value is unique.
pub fn appendix_a_optimize(r: f64) -> Result<AppendixAOptimum> {
    DerivedParams::new(r)?;
    let (lo, hi, step) = APPENDIX_A_GRID;
    let best = maximize_2d(
        |g, h| appendix_a_delta_dr(r, g, h),
        lo,
        hi,
        step,
        APPENDIX_A_XTOL,
    )?;
    Ok(AppendixAOptimum {
        r,
        g: best.point[0],
        h: best.point[1],
        delta_dr: best.value,
    })
}

/// Constructions available once the erased Eve variable is public.
///
/// 1. `x_A' = (x_A + x_C)/2 − x_E2` against `x_B`.
/// 2. `x_A'' = (x_A + x_C)/2` against `x_B'' = x_B + x_E2`.
/// 3. `x̄_A = e^{2r} x_A + x_B/2` against `x̄_C = x_C + y e^{−2r} x_E1`.
///
/// Eve holds `(x_E1, x_E2)` in every case.
pub fn appendix_b_scenario(r: f64, case: u8) -> Result<ScenarioResult> {
    let p = DerivedParams::new(r)?;
    let (alice, bob, g) = match case {
        1 => (
            "A'",
            "B",
            transformed(
                r,
                &[
                    ("A'", &[("A", 0.5), ("C", 0.5), ("E2", -1.0)]),
                    ("B", &[("B", 1.0)]),
                    ("E1", &[("E1", 1.0)]),
                    ("E2", &[("E2", 1.0)]),
                ],
            )?,
        ),
        2 => (
            "A''",
            "B''",
            transformed(
                r,
                &[
                    ("A''", &[("A", 0.5), ("C", 0.5)]),
                    ("B''", &[("B", 1.0), ("E2", 1.0)]),
                    ("E1", &[("E1", 1.0)]),
                    ("E2", &[("E2", 1.0)]),
                ],
            )?,
        ),
        3 => (
            "Abar",
            "Cbar",
            transformed(
                r,
                &[
                    ("Abar", &[("A", p.e2r), ("B", 0.5)]),
                    ("Cbar", &[("C", 1.0), ("E1", p.y / p.e2r)]),
                    ("E1", &[("E1", 1.0)]),
                    ("E2", &[("E2", 1.0)]),
                ],
            )?,
        ),
        _ => {
            return Err(GbiError::Domain(format!(
                "appendix-B case {case} not in 1..=3"
            )))
        }
    };
    ScenarioResult::evaluate(
        &format!("appendix-B-case-{case}"),
        g,
        &[alice],
        &[bob],
        &["E1", "E2"],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscardBound {
    pub min_value: f64,
    pub best_subset: Vec<String>,
}

/// Minimum of `I(U;V|S)` over all subsets `S` of Eve's variables, the
/// empty set included. Discard channels are a subset of all channels, so
/// this bounds the intrinsic information from above.
pub fn intrinsic_discard_bound(
    g: &GaussianVector,
    u: &[&str],
    v: &[&str],
    eve: &[&str],
) -> Result<DiscardBound> {
    if eve.len() > 20 {
        return Err(GbiError::Domain(
            "too many Eve variables for subset enumeration".into(),
        ));
    }
    let mut best: Option<DiscardBound> = None;
    for mask in 0u32..(1 << eve.len()) {
        let subset: Vec<&str> = eve
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, s)| *s)
            .collect();
        let value = g.conditional_mi(u, v, &subset)?;
        if best.as_ref().map_or(true, |b| value < b.min_value) {
            best = Some(DiscardBound {
                min_value: value,
                best_subset: subset.iter().map(|s| s.to_string()).collect(),
            });
        }
    }
    // mask 0 always runs
    Ok(best.expect("at least the empty subset"))
}

/// A scenario whose designated information difference changes sign once
/// in `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThresholdScenario {
    Activation,
    DropE1,
    AppendixA,
    AppendixB1,
    AppendixB2,
}

impl ThresholdScenario {
    pub const ALL: [ThresholdScenario; 5] = [
        ThresholdScenario::Activation,
        ThresholdScenario::DropE1,
        ThresholdScenario::AppendixA,
        ThresholdScenario::AppendixB1,
        ThresholdScenario::AppendixB2,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ThresholdScenario::Activation => "activation",
            ThresholdScenario::DropE1 => "drop_e1",
            ThresholdScenario::AppendixA => "appendix_a",
            ThresholdScenario::AppendixB1 => "appendix_b1",
            ThresholdScenario::AppendixB2 => "appendix_b2",
        }
    }

    pub fn reconciliation(self) -> Reconciliation {
        match self {
            ThresholdScenario::Activation => Reconciliation::Reverse,
            _ => Reconciliation::Direct,
        }
    }

    /// Search interval containing exactly one sign change.
    pub fn bracket(self) -> (f64, f64) {
        match self {
            ThresholdScenario::Activation => (0.05, 0.5),
            ThresholdScenario::DropE1 => (0.05, 1.0),
            ThresholdScenario::AppendixA => (0.2, 0.5),
            ThresholdScenario::AppendixB1 => (0.1, 1.0),
            ThresholdScenario::AppendixB2 => (0.1, 1.0),
        }
    }

    /// Whether the difference is positive above the root (else below it).
    pub fn positive_above(self) -> bool {
        !matches!(self, ThresholdScenario::AppendixB2)
    }

    pub fn value(self, r: f64) -> Result<f64> {
        match self {
            ThresholdScenario::AppendixA => Ok(appendix_a_optimize(r)?.delta_dr),
            _ => Ok(self.scenario(r)?.value(self.reconciliation())),
        }
    }

    /// The scenario at `r`; for Appendix A at the optimized gains.
    pub fn scenario(self, r: f64) -> Result<ScenarioResult> {
        match self {
            ThresholdScenario::Activation => activated_scenario(r),
            ThresholdScenario::DropE1 => drop_e1(r),
            ThresholdScenario::AppendixA => {
                let opt = appendix_a_optimize(r)?;
                appendix_a_scenario(r, opt.g, opt.h)
            }
            ThresholdScenario::AppendixB1 => appendix_b_scenario(r, 1),
            ThresholdScenario::AppendixB2 => appendix_b_scenario(r, 2),
        }
    }

    pub fn threshold(self, tol: f64) -> Result<Threshold> {
        find_threshold(|r| self.value(r), self.bracket(), tol)
    }

    /// Scenario at `r` with its threshold attached.
    pub fn evaluate_with_threshold(self, r: f64, tol: f64) -> Result<ScenarioResult> {
        let mut s = self.scenario(r)?;
        s.threshold = Some(self.threshold(tol)?);
        Ok(s)
    }
}
