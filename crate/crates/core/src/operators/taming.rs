use serde::{Deserialize, Serialize};

use super::OperatorError;

/// Smooth cutoff `φ_N`: zero on `[0, N]`, `x - N` beyond `N + 1`, joined by
/// the quintic `6s³ - 8s⁴ + 3s⁵` in `s = x - N`, which matches value, slope
/// and curvature at both ends. Its slope peaks at `s = 3/5` with value 1.512.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TamingFunction {
    pub level: f64,
}

impl TamingFunction {
    pub fn new(level: f64) -> Result<Self, OperatorError> {
        if !(level.is_finite() && level >= 0.0) {
            return Err(OperatorError::Invalid(format!("taming level {level} must be nonnegative")));
        }
        Ok(Self { level })
    }

    pub fn eval(&self, x: f64) -> Result<f64, OperatorError> {
        if x < 0.0 {
            return Err(OperatorError::Invalid(format!("taming function evaluated at {x} < 0")));
        }
        Ok(self.value(x))
    }

    pub fn deriv(&self, x: f64) -> Result<f64, OperatorError> {
        if x < 0.0 {
            return Err(OperatorError::Invalid(format!("taming derivative evaluated at {x} < 0")));
        }
        let s = x - self.level;
        Ok(if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            1.0
        } else {
            s * s * (18.0 - 32.0 * s + 15.0 * s * s)
        })
    }

    /// Unchecked evaluation for arguments known to be nonnegative.
    pub(crate) fn value(&self, x: f64) -> f64 {
        let s = x - self.level;
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            s
        } else {
            s * s * s * (6.0 - 8.0 * s + 3.0 * s * s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        let phi = TamingFunction::new(2.0).unwrap();
        assert_eq!(phi.eval(1.0).unwrap(), 0.0);
        assert_eq!(phi.eval(4.0).unwrap(), 2.0);
        assert_eq!(phi.eval(3.0).unwrap(), 1.0);
        assert!(phi.eval(-0.5).is_err());
        assert!(TamingFunction::new(-1.0).is_err());
    }

    #[test]
    fn slope_bound_on_dense_grid() {
        let phi = TamingFunction::new(1.0).unwrap();
        let mut max_slope: f64 = 0.0;
        for i in 0..=10_000 {
            let x = 3.0 * i as f64 / 10_000.0;
            let d = phi.deriv(x).unwrap();
            assert!(d >= 0.0);
            max_slope = max_slope.max(d);
        }
        assert!(max_slope <= 2.0 + 1e-12);
        assert!((max_slope - 1.512).abs() < 1e-3);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let phi = TamingFunction::new(0.5).unwrap();
        for &x in &[0.6, 0.9, 1.2, 1.49] {
            let h = 1e-6;
            let fd = (phi.value(x + h) - phi.value(x - h)) / (2.0 * h);
            assert!((fd - phi.deriv(x).unwrap()).abs() < 1e-8);
        }
    }
}
