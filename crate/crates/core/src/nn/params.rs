use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A model whose parameters can be walked in a fixed order.
///
/// The visiting order defines the flat layout used by optimizers and
/// checkpoints; `visit` and `visit_mut` must agree on it.
pub trait Params {
    fn visit(&self, prefix: &str, f: &mut dyn FnMut(&str, &[f64]));

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64]));

    fn layout(&self) -> Vec<ParamSlot> {
        let mut slots = Vec::new();
        self.visit("", &mut |name, values| {
            slots.push(ParamSlot {
                name: name.to_string(),
                len: values.len(),
            })
        });
        slots
    }

    fn num_params(&self) -> usize {
        let mut n = 0;
        self.visit("", &mut |_, values| n += values.len());
        n
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.visit("", &mut |_, values| out.extend_from_slice(values));
        out
    }

    fn load_flat(&mut self, flat: &[f64]) -> Result<()> {
        let expected = self.num_params();
        if flat.len() != expected {
            return Err(Error::Shape(format!(
                "flat parameter vector has {} values, model needs {expected}",
                flat.len()
            )));
        }
        let mut offset = 0;
        self.visit_mut(&mut |values| {
            values.copy_from_slice(&flat[offset..offset + values.len()]);
            offset += values.len();
        });
        Ok(())
    }

    fn fill(&mut self, value: f64) {
        self.visit_mut(&mut |values| values.iter_mut().for_each(|v| *v = value));
    }

    /// A same-shaped value with every parameter zero, used to accumulate gradients.
    fn zeros_like(&self) -> Self
    where
        Self: Clone + Sized,
    {
        let mut z = self.clone();
        z.fill(0.0);
        z
    }
}

pub(crate) fn join_name(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSlot {
    pub name: String,
    pub len: usize,
}

/// Flat view of a model's parameters with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub layout: Vec<ParamSlot>,
    pub values: Vec<f64>,
}

impl ParamVector {
    pub fn of<P: Params + ?Sized>(model: &P) -> Self {
        Self {
            layout: model.layout(),
            values: model.flatten(),
        }
    }

    pub fn apply_to<P: Params + ?Sized>(&self, model: &mut P) -> Result<()> {
        if model.layout() != self.layout {
            return Err(Error::Shape("parameter layout does not match model".into()));
        }
        model.load_flat(&self.values)
    }
}
