//! Minimal differentiable-network runtime: dense, 1-D convolution and
//! LSTM layers, activations, losses, L2 regularization and Adam.

mod checkpoint;
mod layers;
mod loss;
mod lstm;
mod network;
mod optim;
mod tensor;

pub use checkpoint::{decode_network, encode_network, load_network, save_network};
pub use layers::LayerSpec;
pub use loss::{bce_grad, bce_loss, cross_entropy, cross_entropy_grad, mse_loss, PROB_CLAMP};
pub use lstm::{gated_recurrent_cell, LstmParams};
pub use network::{ForwardCache, Gradients, Network};
pub use optim::{adam_step, AdamState, AnnealSchedule};
pub use tensor::Tensor;

