use std::fmt::Write as _;

use gbi_core::bound_info::scenarios::drop_e1;
use gbi_core::bound_info::{
    activated_delta_rr, appendix_a_optimize, appendix_b_scenario, delta_i_rr_closed,
    eve_decomposition, protocol, raw_split, Reconciliation, Splitting, Threshold,
    ThresholdScenario,
};
use gbi_core::params::{check_r, R_MAX};
use gbi_core::quantum::{bound_entangled_cm, purification_cm, purification_x_matrix, QuantumCM};
use gbi_core::sim::{simulate as simulate_protocol, simulate_full};
use gbi_core::verify::{self, linspace, Corruption, VerifyOptions};
use gbi_core::PI_LABELS;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{csv_line, emit, format, json, kv, matrix_csv, num};
use crate::{CliError, CliResult, Format, MatrixKind, OutputArgs, ProtocolArg, RangeArgs};

/// Largest tolerated deviation of a simulated entry, in standard errors.
const MAX_DEV_IN_SE: f64 = 5.0;

pub const SWEEP_HEADER: [&str; 10] = [
    "r",
    "dIRR_act_closed",
    "dIRR_act_numeric",
    "dIDR_raw",
    "dIRR_raw",
    "dIDR_dropE1",
    "dIDR_appA",
    "dIDR_appB1",
    "dIDR_appB2",
    "dIDR_appB3",
];

fn rows_of(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn quadrature_labels(modes: &[&str]) -> Vec<String> {
    let x = modes.iter().map(|m| format!("x{m}"));
    let p = modes.iter().map(|m| format!("p{m}"));
    x.chain(p).collect()
}

#[derive(Serialize)]
struct MatrixDoc {
    what: &'static str,
    r: f64,
    labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

pub fn matrix(r: f64, what: MatrixKind, io: &OutputArgs) -> CliResult<()> {
    let fmt = format(io, Format::Csv, &[Format::Csv, Format::Json])?;
    let (name, labels, m) = match what {
        MatrixKind::X => (
            "X",
            PI_LABELS.iter().map(|s| s.to_string()).collect(),
            purification_x_matrix(r)?,
        ),
        MatrixKind::Gamma => (
            "Gamma",
            quadrature_labels(&PI_LABELS),
            purification_cm(r)?.gamma().clone(),
        ),
        MatrixKind::Reduced => (
            "reduced",
            quadrature_labels(&PI_LABELS[..3]),
            bound_entangled_cm(r)?.gamma().clone(),
        ),
    };
    let rows = rows_of(&m);
    let text = match fmt {
        Format::Json => json(&MatrixDoc {
            what: name,
            r,
            labels,
            matrix: rows,
        })?,
        _ => matrix_csv(&rows),
    };
    emit(io, &text)
}

#[derive(Serialize)]
struct SweepRow {
    r: f64,
    #[serde(rename = "dIRR_act_closed")]
    act_closed: f64,
    #[serde(rename = "dIRR_act_numeric")]
    act_numeric: f64,
    #[serde(rename = "dIDR_raw")]
    raw_dr: f64,
    #[serde(rename = "dIRR_raw")]
    raw_rr: f64,
    #[serde(rename = "dIDR_dropE1")]
    drop_e1: f64,
    #[serde(rename = "dIDR_appA")]
    app_a: f64,
    #[serde(rename = "dIDR_appB1")]
    app_b1: f64,
    #[serde(rename = "dIDR_appB2")]
    app_b2: f64,
    #[serde(rename = "dIDR_appB3")]
    app_b3: f64,
}

impl SweepRow {
    fn at(r: f64) -> gbi_core::Result<Self> {
        let raw = raw_split(r)?;
        let b = |case| {
            Ok::<_, gbi_core::GbiError>(appendix_b_scenario(r, case)?.value(Reconciliation::Direct))
        };
        Ok(SweepRow {
            r,
            act_closed: delta_i_rr_closed(r)?,
            act_numeric: activated_delta_rr(r)?,
            raw_dr: raw.info.delta_dr,
            raw_rr: raw.info.delta_rr,
            drop_e1: drop_e1(r)?.value(Reconciliation::Direct),
            app_a: appendix_a_optimize(r)?.delta_dr,
            app_b1: b(1)?,
            app_b2: b(2)?,
            app_b3: b(3)?,
        })
    }

    fn fields(&self) -> [f64; 10] {
        [
            self.r,
            self.act_closed,
            self.act_numeric,
            self.raw_dr,
            self.raw_rr,
            self.drop_e1,
            self.app_a,
            self.app_b1,
            self.app_b2,
            self.app_b3,
        ]
    }
}

fn check_range(range: &RangeArgs) -> CliResult<Vec<f64>> {
    let RangeArgs {
        r_min,
        r_max,
        steps,
    } = *range;
    if !(r_min > 0.0 && r_max <= R_MAX && r_min < r_max) {
        return Err(CliError::Usage(format!(
            "need 0 < r-min < r-max <= {R_MAX}, got [{r_min}, {r_max}]"
        )));
    }
    if steps < 2 {
        return Err(CliError::Usage(format!(
            "steps must be at least 2, got {steps}"
        )));
    }
    Ok(linspace(r_min, r_max, steps))
}

pub fn sweep(range: &RangeArgs, io: &OutputArgs) -> CliResult<()> {
    let fmt = format(io, Format::Csv, &[Format::Csv, Format::Json])?;
    let grid = check_range(range)?;
    // collect preserves grid order whatever the scheduling
    let rows = grid
        .par_iter()
        .map(|&r| SweepRow::at(r))
        .collect::<gbi_core::Result<Vec<_>>>()?;
    let text = match fmt {
        Format::Json => json(&rows)?,
        _ => {
            let mut s = csv_line(&SWEEP_HEADER.map(String::from));
            for row in &rows {
                s.push_str(&csv_line(&row.fields().map(num)));
            }
            s
        }
    };
    emit(io, &text)
}

pub fn thresholds(tol: f64, io: &OutputArgs) -> CliResult<()> {
    let fmt = format(io, Format::Json, &[Format::Csv, Format::Json])?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let found: Vec<(ThresholdScenario, Threshold)> = ThresholdScenario::ALL
        .par_iter()
        .map(|&s| s.threshold(tol).map(|t| (s, t)))
        .collect::<gbi_core::Result<_>>()
        .map_err(|e| CliError::Numerical(format!("threshold search failed: {e}")))?;
    let text = match fmt {
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> = found
                .iter()
                .map(|(s, t)| serde_json::to_value(t).map(|v| (s.key().to_owned(), v)))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            json(&map)?
        }
        _ => {
            let mut s = csv_line(
                &[
                    "scenario",
                    "root",
                    "bracket_lo",
                    "bracket_hi",
                    "achieved_tol",
                ]
                .map(String::from),
            );
            for (sc, t) in &found {
                s.push_str(&csv_line(&[
                    sc.key().to_owned(),
                    num(t.root),
                    num(t.bracket.0),
                    num(t.bracket.1),
                    num(t.achieved_tol),
                ]));
            }
            s
        }
    };
    emit(io, &text)
}

fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Usage(format!("--r-grid expects MIN:MAX:STEPS, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let r_min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let r_max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    check_range(&RangeArgs {
        r_min,
        r_max,
        steps,
    })
}

fn parse_corruption(text: &str) -> CliResult<Corruption> {
    let bad = || CliError::Usage(format!("--corrupt expects ROW,COL,DELTA, got `{text}`"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let row: usize = parts[0].parse().map_err(|_| bad())?;
    let col: usize = parts[1].parse().map_err(|_| bad())?;
    let delta: f64 = parts[2].parse().map_err(|_| bad())?;
    if row >= PI_LABELS.len() || col >= PI_LABELS.len() || !delta.is_finite() {
        return Err(bad());
    }
    Ok(Corruption { row, col, delta })
}

pub fn verify(
    r_grid: Option<&str>,
    skip_thresholds: bool,
    corrupt: Option<&str>,
    io: &OutputArgs,
) -> CliResult<()> {
    let fmt = format(io, Format::Text, &[Format::Text, Format::Json])?;
    let mut opts = VerifyOptions {
        include_thresholds: !skip_thresholds,
        ..Default::default()
    };
    if let Some(text) = r_grid {
        opts.r_grid = parse_grid(text)?;
    }
    opts.corrupt = corrupt.map(parse_corruption).transpose()?;
    let report = verify::run(&opts);
    let text = match fmt {
        Format::Json => json(&report)?,
        _ => {
            let mut s = String::new();
            for c in &report.checks {
                let _ = writeln!(
                    s,
                    "{} {:<36} value={:<24} tol={:<8} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    num(c.value),
                    num(c.tolerance),
                    c.detail
                );
            }
            let passed = report.checks.iter().filter(|c| c.passed).count();
            let _ = writeln!(
                s,
                "{passed}/{} checks passed over {} grid points",
                report.checks.len(),
                report.r_grid.len()
            );
            s
        }
    };
    emit(io, &text)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Failed(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

pub fn simulate(
    which: ProtocolArg,
    r: f64,
    samples: usize,
    seed: u64,
    io: &OutputArgs,
) -> CliResult<()> {
    format(io, Format::Json, &[Format::Json])?;
    let report = match which {
        ProtocolArg::BAc => simulate_protocol(&protocol(Splitting::BvsAC, r)?, samples, seed)?,
        ProtocolArg::CAb => simulate_protocol(&protocol(Splitting::CvsAB, r)?, samples, seed)?,
        ProtocolArg::Full => simulate_full(r, samples, seed)?,
    };
    emit(io, &json(&report)?)?;
    if report.within_se(MAX_DEV_IN_SE) {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "max deviation {} standard errors exceeds {MAX_DEV_IN_SE}",
            report.max_dev_in_se
        )))
    }
}

#[derive(Serialize)]
struct Bipartition {
    split: &'static str,
    min_nu: f64,
    is_ppt: bool,
}

#[derive(Serialize)]
struct PptDoc {
    r: Option<f64>,
    vacuum: bool,
    bipartitions: Vec<Bipartition>,
}

pub fn ppt(r: f64, vacuum: bool, io: &OutputArgs) -> CliResult<()> {
    let fmt = format(io, Format::Json, &[Format::Csv, Format::Json])?;
    let cm = if vacuum {
        QuantumCM::vacuum(3)
    } else {
        check_r(r)?;
        bound_entangled_cm(r)?
    };
    let mut bipartitions = Vec::new();
    for (split, mode) in [("A-(BC)", 0usize), ("B-(AC)", 1), ("C-(AB)", 2)] {
        let rep = cm.ppt_report(&[mode])?;
        bipartitions.push(Bipartition {
            split,
            min_nu: rep.min_nu,
            is_ppt: rep.is_ppt,
        });
    }
    let text = match fmt {
        Format::Json => json(&PptDoc {
            r: (!vacuum).then_some(r),
            vacuum,
            bipartitions,
        })?,
        _ => {
            let mut s = csv_line(&["split", "min_nu", "is_ppt"].map(String::from));
            for b in &bipartitions {
                s.push_str(&csv_line(&[
                    b.split.to_owned(),
                    num(b.min_nu),
                    b.is_ppt.to_string(),
                ]));
            }
            s
        }
    };
    emit(io, &text)
}

pub fn decompose(r: f64, j: u8, io: &OutputArgs) -> CliResult<()> {
    let fmt = format(io, Format::Text, &[Format::Text, Format::Json])?;
    let d = eve_decomposition(r, j)?;
    let text = match fmt {
        Format::Json => json(&d)?,
        _ => {
            let other = if j == 1 { "E2" } else { "E1" };
            let mut s = String::new();
            kv(&mut s, "r", num(d.r));
            kv(&mut s, "decomposed", format!("x_E{j}"));
            for (name, (c, reg)) in ["z_A", "z_B", "z_C", &format!("x_{other}")]
                .iter()
                .zip(d.coeffs.iter().zip(&d.regression_coeffs))
            {
                kv(
                    &mut s,
                    &format!("coeff {name}"),
                    format!("{} (regression {})", num(*c), num(*reg)),
                );
            }
            kv(
                &mut s,
                "residual variance",
                format!(
                    "{} (regression {})",
                    num(d.residual_variance),
                    num(d.regression_residual_variance)
                ),
            );
            kv(&mut s, "discrepancy", num(d.discrepancy()));
            s
        }
    };
    emit(io, &text)
}
