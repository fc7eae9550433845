//! Deterministic bisection and a grid + compass-search maximizer.

use serde::Serialize;

use crate::error::{GbiError, Result};

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub root: f64,
    /// Initial search interval.
    pub bracket: (f64, f64),
    /// Half-width of the final interval around `root`.
    pub achieved_tol: f64,
}

/// Bisection for a sign change of `f` on `bracket`, stopping once the
/// interval is no wider than `tol`.
pub fn find_threshold<F>(mut f: F, bracket: (f64, f64), tol: f64) -> Result<Threshold>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = bracket;
    if !(tol > 0.0) || !(lo < hi) {
        return Err(GbiError::Domain(format!(
            "bad bracket {bracket:?} or tolerance {tol}"
        )));
    }
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Threshold {
            root: lo,
            bracket,
            achieved_tol: 0.0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Threshold {
            root: hi,
            bracket,
            achieved_tol: 0.0,
        });
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(GbiError::NoBracket { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v == 0.0 {
            return Ok(Threshold {
                root: mid,
                bracket,
                achieved_tol: 0.0,
            });
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        root: 0.5 * (lo + hi),
        bracket,
        achieved_tol: 0.5 * (hi - lo),
    })
}

/// Result of [`maximize_2d`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub point: [f64; 2],
    pub value: f64,
}

/// Maximize `f` over a square: exhaustive grid with spacing `step` on
/// `[lo, hi]²`, then compass search from the best node, halving the step
/// until it drops below `xtol`. The refinement may leave the box.
pub fn maximize_2d<F>(mut f: F, lo: f64, hi: f64, step: f64, xtol: f64) -> Result<Maximum>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let nodes = ((hi - lo) / step).round() as usize + 1;
    let mut best = Maximum {
        point: [lo, lo],
        value: f64::NEG_INFINITY,
    };
    for i in 0..nodes {
        let u = lo + step * i as f64;
        for j in 0..nodes {
            let v = lo + step * j as f64;
            let val = f(u, v)?;
            if val > best.value {
                best = Maximum {
                    point: [u, v],
                    value: val,
                };
            }
        }
    }
    let mut h = step;
    while h >= xtol {
        let mut moved = false;
        for (du, dv) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
            let p = [best.point[0] + du, best.point[1] + dv];
            let val = f(p[0], p[1])?;
            // ignore rounding-level gains so flat ridges do not stall the walk
            if val - best.value > 1e-15 * (1.0 + best.value.abs()) {
                best = Maximum {
                    point: p,
                    value: val,
                };
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Ok(best)
}
