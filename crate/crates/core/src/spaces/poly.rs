use serde::{Deserialize, Serialize};

/// Real polynomial `Σ_i c_i y^i`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn monomial(power: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; power + 1];
        coeffs[power] = c;
        Self { coeffs }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }

    pub fn derivative(&self) -> Self {
        Self { coeffs: self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect() }
    }

    /// Degree of the highest nonzero coefficient; 0 for constants and zero.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Growth exponent ρ in `|f(y) - f(z)| ≲ (1 + |y|^ρ + |z|^ρ)|y - z|`.
    pub fn growth_exponent(&self) -> usize {
        self.degree().saturating_sub(1)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }
}
