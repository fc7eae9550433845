use serde::Serialize;

use crate::error::{GbiError, Result};

/// Largest admissible squeezing. The activation closed form contains
/// `e^{8r}`, which stays far from overflow at `e^{40}`.
pub const R_MAX: f64 = 5.0;

/// Scalar quantities derived from the squeezing parameter `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub r: f64,
    /// `e^{2r}`
    pub e2r: f64,
    pub x: f64,
    pub y: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// TMSV parameter of the Alice-Clare source, `cosh 2r`.
    pub m_ac: f64,
    /// TMSV parameter of the Alice-Bob source.
    pub m_ab: f64,
}

pub fn check_r(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 && r <= R_MAX {
        Ok(())
    } else {
        Err(GbiError::Domain(format!(
            "squeezing r = {r} outside (0, {R_MAX}]"
        )))
    }
}

impl DerivedParams {
    pub fn new(r: f64) -> Result<Self> {
        check_r(r)?;
        let e2r = (2.0 * r).exp();
        let e4r = e2r * e2r;
        // expm1 keeps x accurate for small r
        let x = (2.0 * r).exp_m1() / 2.0;
        let y = e2r * (2.0 * e2r - 1.0) / (4.0 * x);
        let cosh = (2.0 * r).cosh();
        let sinh = (2.0 * r).sinh();
        Ok(Self {
            r,
            e2r,
            x,
            y,
            a: cosh + x,
            b: sinh - x,
            c: 1.0 + 4.0 * x,
            m_ac: cosh,
            m_ab: (1.0 + 2.0 * (e4r - e2r)) / (2.0 * e2r - 1.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_half() {
        let p = DerivedParams::new(0.5).unwrap();
        assert!((p.a - 2.40222).abs() < 1e-5);
        assert!((p.b - 0.31606).abs() < 1e-5);
        assert!((p.c - 4.43656).abs() < 1e-5);
        assert!((p.x - 0.85914).abs() < 1e-5);
        assert!((p.y - 3.50927).abs() < 1e-5);
        assert!((p.e2r - 2.71828).abs() < 1e-5);
        assert!((p.m_ab - 2.33098).abs() < 1e-5);
    }

    #[test]
    fn invariants_on_grid() {
        for k in 1..=100 {
            let p = DerivedParams::new(0.05 * k as f64).unwrap();
            assert!(p.x > 0.0 && p.y > 0.0);
            assert!(p.a > p.b && p.b > 0.0, "r = {}", p.r);
            assert!(p.c > 1.0 && p.m_ab >= 1.0 && p.m_ac >= 1.0);
        }
    }

    #[test]
    fn domain() {
        assert!(DerivedParams::new(0.0).is_err());
        assert!(DerivedParams::new(-1.0).is_err());
        assert!(DerivedParams::new(5.01).is_err());
        assert!(DerivedParams::new(f64::NAN).is_err());
        assert!(DerivedParams::new(5.0).is_ok());
    }
}
