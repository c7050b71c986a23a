use crate::error::{Error, Result};
use crate::render::{downsample, downsample_adjoint, Silhouette};

use super::ImageLoss;

const UNION_FLOOR: f64 = 1e-8;

/// Soft IoU loss `1 - |s1 * s2| / |s1 + s2 - s1 * s2|`, gradient w.r.t. `s1`.
pub fn iou_loss(s1: &Silhouette, s2: &Silhouette) -> Result<ImageLoss> {
    if !s1.same_shape(s2) {
        return Err(Error::Shape(format!(
            "iou of {}x{} and {}x{}",
            s1.width, s1.height, s2.width, s2.height
        )));
    }
    let (mut inter, mut union) = (0.0, 0.0);
    for (&a, &b) in s1.values.iter().zip(&s2.values) {
        inter += a * b;
        union += a + b - a * b;
    }
    let floored = union < UNION_FLOOR;
    let u = union.max(UNION_FLOOR);
    let value = 1.0 - inter / u;
    // d(I/U)/da = (b U - I (1 - b)) / U^2; the floor cuts the U path.
    let grad = s2
        .values
        .iter()
        .map(|&b| {
            let d_ratio = if floored {
                b / u
            } else {
                (b * u - inter * (1.0 - b)) / (u * u)
            };
            -d_ratio
        })
        .collect();
    Ok(ImageLoss { value, grad })
}

/// Weighted sum of IoU losses over a pyramid: scale `i` compares both images
/// box-downsampled by `2^i`.
pub fn multiscale_silhouette_loss(
    pred: &Silhouette,
    target: &Silhouette,
    scale_weights: &[f64],
) -> Result<ImageLoss> {
    if !pred.same_shape(target) {
        return Err(Error::Shape(format!(
            "prediction {}x{} vs target {}x{}",
            pred.width, pred.height, target.width, target.height
        )));
    }
    let mut value = 0.0;
    let mut grad = vec![0.0; pred.values.len()];
    for (i, &w) in scale_weights.iter().enumerate() {
        let factor = 1usize << i;
        let p = downsample(pred, factor)?;
        let t = downsample(target, factor)?;
        let l = iou_loss(&p, &t)?;
        value += w * l.value;
        let fine = downsample_adjoint(&l.grad, pred.width, pred.height, factor);
        for (g, f) in grad.iter_mut().zip(fine) {
            *g += w * f;
        }
    }
    Ok(ImageLoss { value, grad })
}
