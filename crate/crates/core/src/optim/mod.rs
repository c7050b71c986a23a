//! Adam, the learning-rate schedule, the finite-difference gradient checker
//! and the fitting loop over template vertex offsets.

pub mod ablation;
mod adam;
mod fit;
pub mod gradcheck;
mod gradsuite;
mod objective;
mod schedule;

pub use adam::{adam_step, AdamState};
pub use fit::{
    fit, resample, symmetric_primitive_pool, FitConfig, FitHistory, FitOutcome, FitRecord,
};
pub use gradcheck::{gradcheck, gradcheck_flat, relative_error, GradcheckReport};
pub use gradsuite::{GradcheckFixture, Term, GRADCHECK_RESOLUTION};
pub use objective::{AdversarialTerm, Evaluation, Objective};
pub use schedule::lr_at;
