//! Convolutional shape discriminator over stacked multi-view silhouettes
//! and the non-saturating adversarial losses.

mod batch;
mod checkpoint;
mod gan;
mod network;

pub use batch::{Provenance, ViewBatch};
pub use checkpoint::{
    checkpoint_bytes, load_checkpoint, params_from_bytes, save_checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use gan::{
    disc_train_step, disc_update, gan_losses, nonsat_f, nonsat_f_grad, DiscStepMetrics, GanLosses,
};
pub use network::{
    disc_forward, disc_init, DiscForward, DiscGradients, DiscParams, CHANNELS, KERNEL, LEAKY_SLOPE,
};
