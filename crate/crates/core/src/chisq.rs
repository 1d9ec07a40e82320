//! Deviation points for (noncentral) chi-square concentration.
//!
//! For `W ~ chi2_d(kappa)` and `x > 0`:
//!   `P(W > d + kappa + 2x + sqrt((4d + 8kappa) x)) <= exp(-x)`
//!   `P(W < d + kappa - sqrt((4d + 8kappa) x)) <= exp(-x)`

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareBound {
    pub d: f64,
    pub kappa: f64,
    pub x: f64,
    pub upper_tail_point: f64,
    /// May be negative, in which case the lower bound is vacuous.
    pub lower_tail_point: f64,
}

impl ChiSquareBound {
    /// The bound `exp(-x)` on each tail probability.
    pub fn tail_probability(&self) -> f64 {
        (-self.x).exp()
    }
}

pub fn chi_square_tail(d: f64, kappa: f64, x: f64) -> Result<ChiSquareBound> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::domain(format!("degrees of freedom must be positive, got {d}")));
    }
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::domain(format!("noncentrality must be nonnegative, got {kappa}")));
    }
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::domain(format!("deviation parameter must be positive, got {x}")));
    }
    let spread = ((4.0 * d + 8.0 * kappa) * x).sqrt();
    Ok(ChiSquareBound {
        d,
        kappa,
        x,
        upper_tail_point: d + kappa + 2.0 * x + spread,
        lower_tail_point: d + kappa - spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        let b = chi_square_tail(10.0, 0.0, 1.0).unwrap();
        assert!((b.upper_tail_point - (12.0 + 40f64.sqrt())).abs() < 1e-12);
        assert!((b.upper_tail_point - 18.3246).abs() < 1e-4);

        let b = chi_square_tail(5.0, 3.0, 2.0).unwrap();
        assert!((b.lower_tail_point - (8.0 - 88f64.sqrt())).abs() < 1e-12);
        assert!((b.lower_tail_point + 1.3808).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(chi_square_tail(0.0, 0.0, 1.0).is_err());
        assert!(chi_square_tail(1.0, 0.0, 0.0).is_err());
        assert!(chi_square_tail(1.0, -1.0, 1.0).is_err());
        assert!(chi_square_tail(-3.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn points_converge_to_d_as_x_vanishes() {
        let d = 7.0;
        let mut prev_gap = f64::INFINITY;
        for e in 1..12 {
            let x = 10f64.powi(-e);
            let b = chi_square_tail(d, 0.0, x).unwrap();
            assert!(b.lower_tail_point < d && b.upper_tail_point > d);
            let gap = b.upper_tail_point - b.lower_tail_point;
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-4);
    }
}
