use super::{DiscForward, DiscParams, ViewBatch};
use crate::error::{ensure, Result};
use crate::optim::{adam_step, AdamState};

/// `f(u) = -ln(1 + e^-u)`, evaluated without overflow.
pub fn nonsat_f(u: f64) -> f64 {
    -((-u).max(0.0) + (-u.abs()).exp().ln_1p())
}

/// `f'(u) = 1 / (1 + e^u)`.
pub fn nonsat_f_grad(u: f64) -> f64 {
    if u >= 0.0 {
        let e = (-u).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + u.exp())
    }
}

/// Losses of one discriminator evaluation on a fake and a real batch.
///
/// `generator = mean f(SD(fake)) + mean f(-SD(real))` is the generator side
/// of the adversarial objective and `discriminator = -generator`. A positive
/// logit therefore reads as "generated".
#[derive(Debug, Clone, PartialEq)]
pub struct GanLosses {
    pub generator: f64,
    pub discriminator: f64,
    pub fake_logits: Vec<f64>,
    pub real_logits: Vec<f64>,
    /// Gradient of `generator` with respect to the fake batch's pixels.
    pub fake_input_grad: Vec<f64>,
    /// Gradient of `discriminator` with respect to the parameters.
    pub param_grad: Vec<f64>,
}

pub fn gan_losses(params: &DiscParams, fake: &ViewBatch, real: &ViewBatch) -> Result<GanLosses> {
    ensure!(
        fake.len > 0 && real.len > 0,
        Validation,
        "GAN batches must be non-empty"
    );
    let ff = DiscForward::run(params, fake)?;
    let fr = DiscForward::run(params, real)?;
    let (nf, nr) = (fake.len as f64, real.len as f64);
    let generator = ff.logits.iter().map(|&u| nonsat_f(u)).sum::<f64>() / nf
        + fr.logits.iter().map(|&u| nonsat_f(-u)).sum::<f64>() / nr;
    let d_fake: Vec<f64> = ff.logits.iter().map(|&u| nonsat_f_grad(u) / nf).collect();
    let d_real: Vec<f64> = fr.logits.iter().map(|&u| -nonsat_f_grad(-u) / nr).collect();
    let gf = ff.backward(params, &d_fake)?;
    let gr = fr.backward_with(params, &d_real, false)?;
    let param_grad = gf
        .params
        .iter()
        .zip(&gr.params)
        .map(|(a, b)| -(a + b))
        .collect();
    Ok(GanLosses {
        generator,
        discriminator: -generator,
        fake_logits: ff.logits,
        real_logits: fr.logits,
        fake_input_grad: gf.input,
        param_grad,
    })
}

/// Metrics of one discriminator update, measured before the update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscStepMetrics {
    pub generator_loss: f64,
    pub discriminator_loss: f64,
    /// Fraction of real items with a negative logit.
    pub real_accuracy: f64,
    /// Fraction of fake items with a positive logit.
    pub fake_accuracy: f64,
}

impl DiscStepMetrics {
    pub fn accuracy(&self) -> f64 {
        0.5 * (self.real_accuracy + self.fake_accuracy)
    }
}

fn fraction(logits: &[f64], pred: impl Fn(f64) -> bool) -> f64 {
    logits.iter().filter(|&&u| pred(u)).count() as f64 / logits.len() as f64
}

/// One Adam step on the discriminator parameters.
pub fn disc_train_step(
    params: &mut DiscParams,
    real: &ViewBatch,
    fake: &ViewBatch,
    state: &mut AdamState,
    lr: f64,
) -> Result<DiscStepMetrics> {
    let l = gan_losses(params, fake, real)?;
    disc_update(params, &l, state, lr)
}

/// Applies the parameter gradient of an evaluation made with the current
/// `params`, as [`disc_train_step`] does.
pub fn disc_update(
    params: &mut DiscParams,
    losses: &GanLosses,
    state: &mut AdamState,
    lr: f64,
) -> Result<DiscStepMetrics> {
    adam_step(&mut params.values, &losses.param_grad, state, lr)?;
    Ok(DiscStepMetrics {
        generator_loss: losses.generator,
        discriminator_loss: losses.discriminator,
        real_accuracy: fraction(&losses.real_logits, |u| u < 0.0),
        fake_accuracy: fraction(&losses.fake_logits, |u| u > 0.0),
    })
}
