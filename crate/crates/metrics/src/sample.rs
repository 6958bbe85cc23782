use serde::{Deserialize, Serialize};

use crate::{MetricsError, Result};

/// Predictions paired with observed values for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    dimension: String,
    predictions: Vec<f64>,
    truths: Vec<f64>,
}

impl PairedSample {
    pub fn new(
        dimension: impl Into<String>,
        predictions: Vec<f64>,
        truths: Vec<f64>,
    ) -> Result<Self> {
        if predictions.len() != truths.len() {
            return Err(MetricsError::LengthMismatch {
                left: predictions.len(),
                right: truths.len(),
            });
        }
        if predictions.is_empty() {
            return Err(MetricsError::Empty("paired sample"));
        }
        if let Some(i) = predictions
            .iter()
            .zip(&truths)
            .position(|(p, t)| !p.is_finite() || !t.is_finite())
        {
            return Err(MetricsError::NonFinite(i));
        }
        Ok(Self {
            dimension: dimension.into(),
            predictions,
            truths,
        })
    }

    pub fn dimension(&self) -> &str {
        &self.dimension
    }

    pub fn predictions(&self) -> &[f64] {
        &self.predictions
    }

    pub fn truths(&self) -> &[f64] {
        &self.truths
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }

    /// `prediction - truth` per pair.
    pub fn differences(&self) -> Vec<f64> {
        self.predictions
            .iter()
            .zip(&self.truths)
            .map(|(p, t)| p - t)
            .collect()
    }

    /// Same pairs with predictions and truths exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            dimension: self.dimension.clone(),
            predictions: self.truths.clone(),
            truths: self.predictions.clone(),
        }
    }
}

pub fn rmse(sample: &PairedSample) -> f64 {
    let n = sample.len() as f64;
    (sample.differences().iter().map(|d| d * d).sum::<f64>() / n).sqrt()
}

pub fn mae(sample: &PairedSample) -> f64 {
    let n = sample.len() as f64;
    sample.differences().iter().map(|d| d.abs()).sum::<f64>() / n
}
