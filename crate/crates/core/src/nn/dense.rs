use serde::{Deserialize, Serialize};

use super::init::xavier_init;
use super::linalg::Matrix;
use super::params::{join_name, Params};
use crate::error::{Error, Result};

/// Fully connected layer `y = W x + b` with `W` of shape out×in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    /// Xavier-initialized weights, zero bias.
    pub fn xavier(fan_in: usize, fan_out: usize, seed: u64) -> Self {
        Self {
            weight: xavier_init(fan_in, fan_out, seed),
            bias: vec![0.0; fan_out],
        }
    }

    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: Matrix::zeros(fan_out, fan_in),
            bias: vec![0.0; fan_out],
        }
    }

    pub fn from_parts(weight: Matrix, bias: Vec<f64>) -> Result<Self> {
        if weight.rows() != bias.len() {
            return Err(Error::Shape(format!(
                "weight has {} rows but bias has {} entries",
                weight.rows(),
                bias.len()
            )));
        }
        Ok(Self { weight, bias })
    }

    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_dim() {
            return Err(Error::Shape(format!(
                "dense layer expects {} inputs, got {}",
                self.in_dim(),
                x.len()
            )));
        }
        let mut y = self.weight.matvec(x);
        for (yi, bi) in y.iter_mut().zip(&self.bias) {
            *yi += bi;
        }
        Ok(y)
    }

    /// Accumulates `dW += dy xᵀ`, `db += dy` into `grad` and returns `dx = Wᵀ dy`.
    pub fn backward_into(&self, x: &[f64], dy: &[f64], grad: &mut DenseLayer) -> Result<Vec<f64>> {
        if x.len() != self.in_dim() || dy.len() != self.out_dim() {
            return Err(Error::Shape(format!(
                "dense backward: x has {} (want {}), dy has {} (want {})",
                x.len(),
                self.in_dim(),
                dy.len(),
                self.out_dim()
            )));
        }
        grad.weight.add_outer(1.0, dy, x);
        for (g, d) in grad.bias.iter_mut().zip(dy) {
            *g += d;
        }
        Ok(self.weight.matvec_t(dy))
    }

    /// Returns `(dx, dW, db)`.
    pub fn backward(&self, x: &[f64], dy: &[f64]) -> Result<(Vec<f64>, Matrix, Vec<f64>)> {
        let mut grad = DenseLayer::zeros(self.in_dim(), self.out_dim());
        let dx = self.backward_into(x, dy, &mut grad)?;
        Ok((dx, grad.weight, grad.bias))
    }
}

impl Params for DenseLayer {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64])) {
        f(&join_name(prefix, "weight"), self.weight.as_slice());
        f(&join_name(prefix, "bias"), &self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.weight.as_mut_slice());
        f(&mut self.bias);
    }
}
