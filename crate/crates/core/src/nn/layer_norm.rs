use serde::{Deserialize, Serialize};

use super::params::{join_name, Params};
use crate::error::{Error, Result};

pub const DEFAULT_EPSILON: f64 = 1e-5;

/// Layer normalization over the feature dimension with learnable gain and bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerNormParams {
    pub gain: Vec<f64>,
    pub bias: Vec<f64>,
    pub epsilon: f64,
}

/// Values saved by the forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct LayerNormCache {
    pub normalized: Vec<f64>,
    pub inv_std: f64,
}

impl LayerNormParams {
    pub fn new(dim: usize) -> Self {
        Self {
            gain: vec![1.0; dim],
            bias: vec![0.0; dim],
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn dim(&self) -> usize {
        self.gain.len()
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, LayerNormCache)> {
        let n = x.len();
        if n < 2 {
            return Err(Error::Shape(format!("layer norm needs dim >= 2, got {n}")));
        }
        if n != self.dim() {
            return Err(Error::Shape(format!(
                "layer norm expects dim {}, got {n}",
                self.dim()
            )));
        }
        let mean = x.iter().sum::<f64>() / n as f64;
        let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let inv_std = 1.0 / (var + self.epsilon).sqrt();
        let normalized: Vec<f64> = x.iter().map(|v| (v - mean) * inv_std).collect();
        let y = normalized
            .iter()
            .zip(self.gain.iter().zip(&self.bias))
            .map(|(h, (g, b))| g * h + b)
            .collect();
        Ok((y, LayerNormCache { normalized, inv_std }))
    }

    /// Accumulates gain/bias gradients into `grad` and returns `dx`.
    pub fn backward_into(&self, cache: &LayerNormCache, dy: &[f64], grad: &mut LayerNormParams) -> Vec<f64> {
        let n = dy.len() as f64;
        let mut dhat = Vec::with_capacity(dy.len());
        for (i, &d) in dy.iter().enumerate() {
            grad.gain[i] += d * cache.normalized[i];
            grad.bias[i] += d;
            dhat.push(d * self.gain[i]);
        }
        let sum_dhat: f64 = dhat.iter().sum();
        let sum_dhat_h: f64 = dhat.iter().zip(&cache.normalized).map(|(a, b)| a * b).sum();
        dhat.iter()
            .zip(&cache.normalized)
            .map(|(&dh, &h)| cache.inv_std / n * (n * dh - sum_dhat - h * sum_dhat_h))
            .collect()
    }
}

impl Params for LayerNormParams {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        f(&join_name(prefix, "gain"), &self.gain);
        f(&join_name(prefix, "bias"), &self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(&mut self.gain);
        f(&mut self.bias);
    }
}
