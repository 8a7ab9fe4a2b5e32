//! Small deterministic tensor, layer and optimizer kernel.
//!
//! Only the fixed architectures used by this crate are supported; every
//! layer has a hand-written backward pass.

pub mod dropout;
pub mod init;
pub mod linear;
pub mod loss;
pub mod lstm;
pub mod param;
pub mod tensor;

pub use dropout::dropout_mask;
pub use init::{seeded, RunRng};
pub use linear::{affine, affine_backward, Linear};
pub use loss::{softmax, softmax_cross_entropy};
pub use lstm::{LstmStack, LstmState, LstmTrace};
pub use param::{adam_update, Adam, Parameter};
pub use tensor::Tensor;
