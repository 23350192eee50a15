use crate::error::{Error, Result};

/// Classical momentum SGD: `v ← μ v − lr g`, `p ← p + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Momentum {
    pub mu: f64,
    pub velocity: Vec<f64>,
}

impl Momentum {
    pub fn new(len: usize, mu: f64) -> Self {
        Self {
            mu,
            velocity: vec![0.0; len],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.velocity.len() {
            return Err(Error::Shape(format!(
                "momentum step: params {}, grads {}, velocity {}",
                params.len(),
                grads.len(),
                self.velocity.len()
            )));
        }
        for ((p, g), v) in params.iter_mut().zip(grads).zip(self.velocity.iter_mut()) {
            *v = self.mu * *v - lr * g;
            *p += *v;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_momentum_is_plain_sgd() {
        let mut opt = Momentum::new(2, 0.0);
        let mut p = vec![1.0, -1.0];
        opt.step(&mut p, &[0.5, 2.0], 0.1).unwrap();
        assert_eq!(p, vec![1.0 - 0.05, -1.0 - 0.2]);
    }

    #[test]
    fn two_steps_of_constant_gradient_match_unrolled_recurrence() {
        // v1 = -lr g, v2 = -(1+μ) lr g, so Δp = -lr g (2 + μ)
        let (lr, mu, g) = (0.1, 0.9, 0.7);
        let mut opt = Momentum::new(1, mu);
        let mut p = vec![0.0];
        opt.step(&mut p, &[g], lr).unwrap();
        opt.step(&mut p, &[g], lr).unwrap();
        assert!((p[0] - (-lr * g * (2.0 + mu))).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_converges_geometrically() {
        let mut opt = Momentum::new(1, 0.9);
        let mut p = vec![0.0];
        opt.step(&mut p, &[1.0], 0.1).unwrap();
        let mut prev_v = opt.velocity[0].abs();
        for _ in 0..200 {
            opt.step(&mut p, &[0.0], 0.1).unwrap();
            let v = opt.velocity[0].abs();
            assert!(v <= 0.9 * prev_v + 1e-18);
            prev_v = v;
        }
        // limit of the geometric series: -lr (1 / (1 - μ))
        assert!((p[0] + 0.1 / (1.0 - 0.9)).abs() < 1e-8);
    }
}
