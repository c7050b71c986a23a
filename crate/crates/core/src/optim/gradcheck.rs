use crate::error::{ensure, Result};
use crate::geometry::{Mesh, Vec3};
use crate::losses::MeshLoss;

/// Outcome of a finite-difference gradient check.
#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    /// Largest relative error over smooth coordinates.
    pub max_rel_error: f64,
    /// Coordinate attaining `max_rel_error`.
    pub worst: Option<usize>,
    pub checked: usize,
    /// Coordinates whose error changed by more than 10x when halving `h`.
    pub non_smooth: Vec<usize>,
}

impl GradcheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares `loss`'s analytic gradient at `x` with central differences at
/// steps `h` and `h / 2`.
pub fn gradcheck_flat<F>(mut loss: F, x: &[f64], h: f64) -> Result<GradcheckReport>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    ensure!(
        h > 0.0 && h.is_finite(),
        Validation,
        "gradcheck step must be positive, got {h}"
    );
    let (_, analytic) = loss(x)?;
    let mut probe = x.to_vec();
    let mut central = |i: usize, step: f64, probe: &mut Vec<f64>| -> Result<f64> {
        probe[i] = x[i] + step;
        let plus = loss(probe)?.0;
        probe[i] = x[i] - step;
        let minus = loss(probe)?.0;
        probe[i] = x[i];
        Ok((plus - minus) / (2.0 * step))
    };
    let mut report = GradcheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: x.len(),
        non_smooth: Vec::new(),
    };
    for i in 0..x.len() {
        let e1 = relative_error(analytic[i], central(i, h, &mut probe)?);
        let e2 = relative_error(analytic[i], central(i, h / 2.0, &mut probe)?);
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        if hi > 10.0 * lo && hi > 1e-5 {
            report.non_smooth.push(i);
            continue;
        }
        if e1 > report.max_rel_error || report.worst.is_none() {
            report.max_rel_error = e1;
            report.worst = Some(i);
        }
    }
    Ok(report)
}

/// [`gradcheck_flat`] over the vertex coordinates of `mesh`; coordinate
/// `3 i + k` is component `k` of vertex `i`.
pub fn gradcheck<F>(mut loss: F, mesh: &Mesh, h: f64) -> Result<GradcheckReport>
where
    F: FnMut(&Mesh) -> Result<MeshLoss>,
{
    let x = mesh.flat_coords();
    gradcheck_flat(
        |coords| {
            let l = loss(&mesh.with_flat_coords(coords))?;
            Ok((l.value, flatten(&l.grad)))
        },
        &x,
        h,
    )
}

pub(crate) fn flatten(v: &[Vec3]) -> Vec<f64> {
    v.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::geometry::icosphere;

    fn quadratic(x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let v = x
            .iter()
            .enumerate()
            .map(|(i, a)| (i + 1) as f64 * a * a)
            .sum();
        let g = x
            .iter()
            .enumerate()
            .map(|(i, a)| 2.0 * (i + 1) as f64 * a)
            .collect();
        Ok((v, g))
    }

    #[test]
    fn quadratic_is_exact() {
        let r = gradcheck_flat(quadratic, &[0.3, -1.2, 2.5, 0.01], 1e-4).unwrap();
        assert!(r.max_rel_error < 1e-8, "{r:?}");
        assert!(r.non_smooth.is_empty());
    }

    #[test]
    fn sign_flip_is_detected() {
        let flipped = |x: &[f64]| {
            let (v, g) = quadratic(x)?;
            Ok((v, g.into_iter().map(|a| -a).collect()))
        };
        let r = gradcheck_flat(flipped, &[0.3, -1.2, 2.5], 1e-4).unwrap();
        assert!((r.max_rel_error - 2.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn kink_is_flagged_non_smooth() {
        // |x| at x = 7e-5: the h = 1e-4 stencil straddles the kink, the h / 2 one does not.
        let abs = |x: &[f64]| Ok((x[0].abs() + x[1] * x[1], vec![x[0].signum(), 2.0 * x[1]]));
        let r = gradcheck_flat(abs, &[7e-5, 0.7], 1e-4).unwrap();
        assert_eq!(r.non_smooth, vec![0]);
        assert!(r.max_rel_error < 1e-8);
    }

    #[test]
    fn mesh_version_indexes_coordinates() {
        let m = icosphere(0).unwrap();
        let r = gradcheck(
            |m| {
                Ok(MeshLoss {
                    value: m.vertices.iter().map(|v| v.norm_squared()).sum(),
                    grad: m.vertices.iter().map(|v| v * 2.0).collect(),
                })
            },
            &m,
            1e-5,
        )
        .unwrap();
        assert_eq!(r.checked, 36);
        assert!(r.max_rel_error < 1e-8);
    }

    #[test]
    fn rejects_non_positive_step() {
        assert!(matches!(
            gradcheck_flat(quadratic, &[1.0], 0.0),
            Err(Error::Validation(_))
        ));
    }
}
