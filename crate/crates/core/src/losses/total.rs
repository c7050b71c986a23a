use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Weights of the combined objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LossWeights {
    /// One weight per silhouette pyramid level, finest first.
    pub scale_weights: Vec<f64>,
    pub lambda_sd: f64,
    pub lambda_sv: f64,
    pub lambda_isym: f64,
    /// Sub-weight of the Laplacian term inside the regularizer.
    pub laplacian: f64,
    /// Sub-weight of the flatten term inside the regularizer.
    pub flatten: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            scale_weights: vec![0.25; 4],
            lambda_sd: 0.1,
            lambda_sv: 0.1,
            lambda_isym: 0.1,
            laplacian: 1.0,
            flatten: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if self.scale_weights.is_empty() {
            return Err(Error::Validation(
                "at least one scale weight is required".into(),
            ));
        }
        let named = [
            ("lambda_sd", self.lambda_sd),
            ("lambda_sv", self.lambda_sv),
            ("lambda_isym", self.lambda_isym),
            ("laplacian", self.laplacian),
            ("flatten", self.flatten),
        ];
        for (name, w) in named
            .into_iter()
            .chain(self.scale_weights.iter().map(|&w| ("scale weight", w)))
        {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name} must be finite and >= 0, got {w}"
                )));
            }
        }
        Ok(())
    }
}

/// Unweighted component values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossTerms {
    pub l_sp: f64,
    pub laplacian: f64,
    pub flatten: f64,
    pub l_sd: f64,
    pub l_vsym: f64,
    pub l_isym: f64,
}

/// Component values and their weighted total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub l_sp: f64,
    pub l_r: f64,
    pub l_sd: f64,
    pub l_vsym: f64,
    pub l_isym: f64,
    pub total: f64,
}

/// `L_sp + L_r + lambda_sd L_sd + lambda_sv L_vsym + lambda_isym L_isym`.
pub fn total_loss(terms: &LossTerms, weights: &LossWeights) -> Result<LossReport> {
    let named = [
        ("l_sp", terms.l_sp),
        ("laplacian", terms.laplacian),
        ("flatten", terms.flatten),
        ("l_sd", terms.l_sd),
        ("l_vsym", terms.l_vsym),
        ("l_isym", terms.l_isym),
    ];
    if let Some((name, v)) = named.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Numeric(format!("loss term {name} is {v}")));
    }
    let l_r = weights.laplacian * terms.laplacian + weights.flatten * terms.flatten;
    let total = terms.l_sp
        + l_r
        + weights.lambda_sd * terms.l_sd
        + weights.lambda_sv * terms.l_vsym
        + weights.lambda_isym * terms.l_isym;
    Ok(LossReport {
        l_sp: terms.l_sp,
        l_r,
        l_sd: terms.l_sd,
        l_vsym: terms.l_vsym,
        l_isym: terms.l_isym,
        total,
    })
}

/// Per-vertex gradients of each active component; `None` marks an inactive term.
#[derive(Debug, Clone, Default)]
pub struct TermGradients {
    pub sp: Option<Vec<Vec3>>,
    pub laplacian: Option<Vec<Vec3>>,
    pub flatten: Option<Vec<Vec3>>,
    pub sd: Option<Vec<Vec3>>,
    pub vsym: Option<Vec<Vec3>>,
    pub isym: Option<Vec<Vec3>>,
}

/// Gradient of [`total_loss`] from component gradients, summed in a fixed order.
pub fn total_gradient(grads: &TermGradients, weights: &LossWeights, vertices: usize) -> Vec<Vec3> {
    let mut out = vec![Vec3::zeros(); vertices];
    let parts = [
        (&grads.sp, 1.0),
        (&grads.laplacian, weights.laplacian),
        (&grads.flatten, weights.flatten),
        (&grads.sd, weights.lambda_sd),
        (&grads.vsym, weights.lambda_sv),
        (&grads.isym, weights.lambda_isym),
    ];
    for (g, w) in parts {
        if let Some(g) = g {
            for (o, d) in out.iter_mut().zip(g) {
                *o += d * w;
            }
        }
    }
    out
}
