use std::collections::BTreeMap;

use serde::Serialize;

/// A mitigated expectation value with its sampling cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MitigatedEstimate {
    pub method: String,
    pub value: f64,
    pub std_error: f64,
    /// Variance amplification relative to one unmitigated estimate.
    pub gamma: f64,
    /// Raw values the estimate was built from.
    pub inputs: Vec<f64>,
    /// Named by-products (coefficients, acceptance probability, fit data).
    pub details: BTreeMap<String, f64>,
    pub flags: Vec<String>,
}

impl MitigatedEstimate {
    pub fn new(method: &str, value: f64, std_error: f64, gamma: f64, inputs: Vec<f64>) -> Self {
        Self {
            method: method.to_string(),
            value,
            std_error,
            gamma,
            inputs,
            details: BTreeMap::new(),
            flags: Vec::new(),
        }
    }

    pub fn with_detail(mut self, name: &str, value: f64) -> Self {
        self.details.insert(name.to_string(), value);
        self
    }

    pub fn detail(&self, name: &str) -> Option<f64> {
        self.details.get(name).copied()
    }
}

/// A measured value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub std_error: f64,
}

impl Measured {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
        }
    }
}

/// An expectation value measured at noise rate (or boost factor) `rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub rate: f64,
    pub value: f64,
    pub std_error: f64,
}

impl RatePoint {
    pub fn new(rate: f64, value: f64) -> Self {
        Self {
            rate,
            value,
            std_error: 0.0,
        }
    }
}
