use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    pub fn forward(self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.apply(v)).collect()
    }

    /// `x` is the pre-activation and `y` the output of [`Activation::forward`].
    /// The ReLU subgradient at 0 is 0.
    pub fn backward(self, x: &[f64], y: &[f64], dy: &[f64]) -> Vec<f64> {
        match self {
            Activation::Relu => x
                .iter()
                .zip(dy)
                .map(|(&xi, &d)| if xi > 0.0 { d } else { 0.0 })
                .collect(),
            Activation::Tanh => y.iter().zip(dy).map(|(&yi, &d)| d * (1.0 - yi * yi)).collect(),
            Activation::Sigmoid => y.iter().zip(dy).map(|(&yi, &d)| d * yi * (1.0 - yi)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(Activation::Relu.apply(-1.0), 0.0);
        assert_eq!(Activation::Relu.apply(2.0), 2.0);
        assert_eq!(Activation::Tanh.apply(0.0), 0.0);
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.5);
    }

    #[test]
    fn relu_gradient_at_zero_is_zero() {
        let g = Activation::Relu.backward(&[0.0], &[0.0], &[1.0]);
        assert_eq!(g, vec![0.0]);
    }

    #[test]
    fn sigmoid_is_stable_for_large_inputs() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }
}
