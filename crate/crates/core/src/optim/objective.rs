use crate::discriminator::{gan_losses, DiscParams, GanLosses, Provenance, ViewBatch};
use crate::error::Result;
use crate::geometry::{Adjacency, Mesh, SymmetryPlane, Vec3};
use crate::losses::{
    flatten_loss, image_symmetry_loss, laplacian_loss, multiscale_silhouette_loss, total_gradient,
    total_loss, LossReport, LossTerms, LossWeights, MeshLoss, TermGradients,
};
use crate::render::{Camera, RenderConfig, Silhouette, SoftRender};

/// Discriminator context of the adversarial term.
#[derive(Debug, Clone, Copy)]
pub struct AdversarialTerm<'a> {
    pub params: &'a DiscParams,
    pub real: &'a ViewBatch,
}

/// The full combined objective as a function of the mesh, with everything
/// else held fixed. Terms whose weight is zero are neither evaluated nor
/// differentiated.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub target: &'a Silhouette,
    /// Viewpoint of the target silhouette; its image size must match the target.
    pub camera: Camera,
    /// Random views shared by the image symmetry and adversarial terms.
    pub views: &'a [Camera],
    pub plane: SymmetryPlane,
    pub weights: &'a LossWeights,
    pub render: RenderConfig,
    pub adjacency: &'a Adjacency,
    pub adversarial: Option<AdversarialTerm<'a>>,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: LossReport,
    pub grad: Vec<Vec3>,
    /// Renders of the mesh at `views`, present when the adversarial term ran.
    pub fake: Option<ViewBatch>,
    pub gan: Option<GanLosses>,
}

impl Objective<'_> {
    pub fn evaluate(&self, mesh: &Mesh) -> Result<Evaluation> {
        let n = mesh.vertices.len();
        let w = self.weights;
        let mut terms = LossTerms::default();
        let mut grads = TermGradients::default();

        let main = SoftRender::forward(mesh, &self.camera, &self.render)?;
        let sp = multiscale_silhouette_loss(main.silhouette(), self.target, &w.scale_weights)?;
        terms.l_sp = sp.value;
        grads.sp = Some(main.backward(&sp.grad)?);

        if w.laplacian > 0.0 {
            let l = laplacian_loss(mesh, self.adjacency);
            terms.laplacian = l.value;
            grads.laplacian = Some(l.grad);
        }
        if w.flatten > 0.0 {
            let l = flatten_loss(mesh, self.adjacency).loss;
            terms.flatten = l.value;
            grads.flatten = Some(l.grad);
        }
        if w.lambda_sv > 0.0 {
            let l = crate::losses::vertex_symmetry_loss(mesh, &self.plane)?;
            terms.l_vsym = l.value;
            grads.vsym = Some(l.grad);
        }
        if w.lambda_isym > 0.0 && !self.views.is_empty() {
            let l = image_symmetry_loss(mesh, self.views, &self.plane, &self.render)?;
            terms.l_isym = l.value;
            grads.isym = Some(l.grad);
        }
        let (mut fake, mut gan) = (None, None);
        if let Some(adv) = self
            .adversarial
            .filter(|_| w.lambda_sd > 0.0 && !self.views.is_empty())
        {
            let renders = self
                .views
                .iter()
                .map(|v| SoftRender::forward(mesh, v, &self.render))
                .collect::<Result<Vec<_>>>()?;
            let stack: Vec<Silhouette> = renders.iter().map(|r| r.silhouette().clone()).collect();
            let batch = ViewBatch::from_stacks(&[stack], Provenance::Fake)?;
            let l = gan_losses(adv.params, &batch, adv.real)?;
            let per_view = batch.resolution * batch.resolution;
            let mut g = MeshLoss::zero(n).grad;
            for (r, up) in renders.iter().zip(l.fake_input_grad.chunks(per_view)) {
                for (a, b) in g.iter_mut().zip(r.backward(up)?) {
                    *a += b;
                }
            }
            terms.l_sd = l.generator;
            grads.sd = Some(g);
            fake = Some(batch);
            gan = Some(l);
        }

        let report = total_loss(&terms, w)?;
        Ok(Evaluation {
            report,
            grad: total_gradient(&grads, w, n),
            fake,
            gan,
        })
    }

    /// Value and gradient in the shape expected by [`super::gradcheck`].
    pub fn mesh_loss(&self, mesh: &Mesh) -> Result<MeshLoss> {
        let e = self.evaluate(mesh)?;
        Ok(MeshLoss {
            value: e.report.total,
            grad: e.grad,
        })
    }
}
