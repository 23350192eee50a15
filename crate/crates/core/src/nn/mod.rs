//! Dense-network toolkit with hand-written gradients.
//!
//! Everything is `f64`. Gradients of a model are represented by a value of the
//! same type as the model (a "gradient twin"), so flattening both through
//! [`Params`] yields aligned vectors for the optimizers.

pub mod activation;
pub mod checkpoint;
pub mod dense;
pub mod gradcheck;
pub mod init;
pub mod lbfgs;
pub mod layer_norm;
pub mod linalg;
pub mod optim;
pub mod params;

pub use activation::Activation;
pub use dense::DenseLayer;
pub use gradcheck::{finite_diff_grad, max_relative_error};
pub use init::xavier_init;
pub use lbfgs::{lbfgs_minimize, LbfgsConfig, LbfgsReport};
pub use layer_norm::{LayerNormCache, LayerNormParams};
pub use linalg::Matrix;
pub use optim::Momentum;
pub use params::{ParamSlot, ParamVector, Params};
