//! Dense tensors and the arithmetic the forward passes and losses need.

pub mod gradcheck;
pub mod io;
pub mod loss;
pub mod ops;
pub mod schedule;
mod tensor;

pub use gradcheck::grad_check;
pub use loss::{bce_grad, bce_loss, sigmoid_focal_grad, sigmoid_focal_loss, LossConfig};
pub use ops::{bilinear_upsample, conv2d, fuse_fpn, linear, max_pool, maxpool_2x1, relu, roi_align, sigmoid};
pub use schedule::{cosine_lr, ScheduleConfig};
pub use tensor::Tensor;
