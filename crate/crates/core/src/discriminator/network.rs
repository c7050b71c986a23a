use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ViewBatch;
use crate::error::{ensure, Error, Result};

/// Output channels of the three convolution layers.
pub const CHANNELS: [usize; 3] = [16, 32, 64];
pub const KERNEL: usize = 4;
pub const LEAKY_SLOPE: f64 = 0.2;

/// Weights of the shape discriminator, flattened into one vector.
///
/// Layout, in order: for each convolution layer the kernel
/// `[out][in][ky][kx]` followed by its bias `[out]`, then the final
/// linear weight over the last feature map `[c][y][x]` and its scalar bias.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscParams {
    pub views: usize,
    pub resolution: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Conv {
    cin: usize,
    cout: usize,
    /// Input side length; output is half of it.
    size: usize,
    weight: usize,
    bias: usize,
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    convs: [Conv; 3],
    linear: usize,
    linear_len: usize,
    linear_bias: usize,
    total: usize,
}

fn layout(views: usize, resolution: usize) -> Layout {
    let mut offset = 0;
    let mut cin = views;
    let mut size = resolution;
    let convs = CHANNELS.map(|cout| {
        let weight = offset;
        let bias = weight + cout * cin * KERNEL * KERNEL;
        offset = bias + cout;
        let conv = Conv {
            cin,
            cout,
            size,
            weight,
            bias,
        };
        cin = cout;
        size /= 2;
        conv
    });
    let linear_len = cin * size * size;
    Layout {
        convs,
        linear: offset,
        linear_len,
        linear_bias: offset + linear_len,
        total: offset + linear_len + 1,
    }
}

impl DiscParams {
    /// Number of parameters for the given input shape.
    pub fn param_count(views: usize, resolution: usize) -> usize {
        layout(views, resolution).total
    }

    fn layout(&self) -> Layout {
        layout(self.views, self.resolution)
    }

    pub fn validate(&self) -> Result<()> {
        check_shape(self.views, self.resolution)?;
        let n = Self::param_count(self.views, self.resolution);
        if self.values.len() != n {
            return Err(Error::Shape(format!(
                "discriminator expects {n} parameters, got {}",
                self.values.len()
            )));
        }
        ensure!(
            self.values.iter().all(|v| v.is_finite()),
            Numeric,
            "discriminator parameters must be finite"
        );
        Ok(())
    }
}

fn check_shape(views: usize, resolution: usize) -> Result<()> {
    ensure!(
        views >= 1,
        Validation,
        "discriminator needs at least one view"
    );
    ensure!(
        resolution >= 16 && resolution.is_power_of_two(),
        Validation,
        "discriminator resolution must be a power of two >= 16, got {resolution}"
    );
    Ok(())
}

/// Uniform He initialization for the convolutions, zero biases and a zero
/// final layer, so every logit is 0 at init.
pub fn disc_init(views: usize, resolution: usize, seed: u64) -> Result<DiscParams> {
    check_shape(views, resolution)?;
    let lay = layout(views, resolution);
    let mut values = vec![0.0; lay.total];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for conv in lay.convs {
        let fan_in = (conv.cin * KERNEL * KERNEL) as f64;
        let bound = (6.0 / ((1.0 + LEAKY_SLOPE * LEAKY_SLOPE) * fan_in)).sqrt();
        for w in &mut values[conv.weight..conv.bias] {
            *w = rng.gen_range(-bound..bound);
        }
    }
    Ok(DiscParams {
        views,
        resolution,
        values,
    })
}

fn leaky(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        LEAKY_SLOPE * x
    }
}

const TAPS: usize = KERNEL * KERNEL;

// Activations are channel-major matrices: entry `(c, b n² + y n + x)` is
// channel `c` of batch item `b` at pixel `(y, x)`.

/// Unfolds every 4x4 stride-2 window into a column: row `c 16 + ky 4 + kx`,
/// column `b m² + i m + j`, zero outside the image.
fn im2col(x: &DMatrix<f64>, cin: usize, n: usize, batch: usize) -> DMatrix<f64> {
    let m = n / 2;
    let rows = cin * TAPS;
    let mut cols = DMatrix::<f64>::zeros(rows, batch * m * m);
    let xs = x.as_slice();
    let out = cols.as_mut_slice();
    for b in 0..batch {
        for i in 0..m {
            for j in 0..m {
                let col = &mut out[(b * m * m + i * m + j) * rows..][..rows];
                for ky in 0..KERNEL {
                    let y = (2 * i + ky) as isize - 1;
                    if y < 0 || y >= n as isize {
                        continue;
                    }
                    for kx in 0..KERNEL {
                        let xx = (2 * j + kx) as isize - 1;
                        if xx < 0 || xx >= n as isize {
                            continue;
                        }
                        let px = b * n * n + y as usize * n + xx as usize;
                        for c in 0..cin {
                            col[c * TAPS + ky * KERNEL + kx] = xs[px * cin + c];
                        }
                    }
                }
            }
        }
    }
    cols
}

/// Adjoint of [`im2col`].
fn col2im(cols: &DMatrix<f64>, cin: usize, n: usize, batch: usize) -> DMatrix<f64> {
    let m = n / 2;
    let rows = cin * TAPS;
    let mut x = DMatrix::<f64>::zeros(cin, batch * n * n);
    let cs = cols.as_slice();
    let xs = x.as_mut_slice();
    for b in 0..batch {
        for i in 0..m {
            for j in 0..m {
                let col = &cs[(b * m * m + i * m + j) * rows..][..rows];
                for ky in 0..KERNEL {
                    let y = (2 * i + ky) as isize - 1;
                    if y < 0 || y >= n as isize {
                        continue;
                    }
                    for kx in 0..KERNEL {
                        let xx = (2 * j + kx) as isize - 1;
                        if xx < 0 || xx >= n as isize {
                            continue;
                        }
                        let px = b * n * n + y as usize * n + xx as usize;
                        for c in 0..cin {
                            xs[px * cin + c] += col[c * TAPS + ky * KERNEL + kx];
                        }
                    }
                }
            }
        }
    }
    x
}

fn kernel_matrix(p: &[f64], conv: &Conv) -> DMatrix<f64> {
    DMatrix::from_row_slice(conv.cout, conv.cin * TAPS, &p[conv.weight..conv.bias])
}

/// Activations of a whole batch kept for the backward pass.
struct Trace {
    /// Unfolded input of each conv layer.
    cols: [DMatrix<f64>; 3],
    /// Pre-activation output of each conv layer.
    pre: [DMatrix<f64>; 3],
    /// Rectified output of the last conv layer.
    features: DMatrix<f64>,
}

fn batch_matrix(batch: &ViewBatch) -> DMatrix<f64> {
    let pix = batch.resolution * batch.resolution;
    let mut x = DMatrix::<f64>::zeros(batch.views, batch.len * pix);
    for b in 0..batch.len {
        let item = batch.item(b);
        for v in 0..batch.views {
            for q in 0..pix {
                x[(v, b * pix + q)] = item[v * pix + q];
            }
        }
    }
    x
}

fn forward_batch(params: &DiscParams, lay: &Layout, batch: &ViewBatch) -> (Vec<f64>, Trace) {
    let p = &params.values;
    let len = batch.len;
    let mut x = batch_matrix(batch);
    let mut cols: [DMatrix<f64>; 3] = Default::default();
    let mut pre: [DMatrix<f64>; 3] = Default::default();
    for (l, conv) in lay.convs.iter().enumerate() {
        let c = im2col(&x, conv.cin, conv.size, len);
        let mut z = kernel_matrix(p, conv) * &c;
        for (o, mut row) in z.row_iter_mut().enumerate() {
            row.add_scalar_mut(p[conv.bias + o]);
        }
        x = z.map(leaky);
        cols[l] = c;
        pre[l] = z;
    }
    let side = lay.convs[2].size / 2;
    let pix = side * side;
    let w = &p[lay.linear..lay.linear + lay.linear_len];
    let logits = (0..len)
        .map(|b| {
            let mut acc = p[lay.linear_bias];
            for c in 0..x.nrows() {
                for q in 0..pix {
                    acc += w[c * pix + q] * x[(c, b * pix + q)];
                }
            }
            acc
        })
        .collect();
    (
        logits,
        Trace {
            cols,
            pre,
            features: x,
        },
    )
}

/// Accumulates parameter gradients into `gp`; returns the input gradient in
/// batch layout when requested.
fn backward_batch(
    params: &DiscParams,
    lay: &Layout,
    trace: &Trace,
    dlogits: &[f64],
    gp: &mut [f64],
    want_input: bool,
) -> Option<Vec<f64>> {
    let p = &params.values;
    let len = dlogits.len();
    let side = lay.convs[2].size / 2;
    let pix = side * side;
    let w = &p[lay.linear..lay.linear + lay.linear_len];
    let feats = &trace.features;
    let mut da = DMatrix::<f64>::zeros(feats.nrows(), feats.ncols());
    for (b, &d) in dlogits.iter().enumerate() {
        gp[lay.linear_bias] += d;
        for c in 0..feats.nrows() {
            for q in 0..pix {
                gp[lay.linear + c * pix + q] += d * feats[(c, b * pix + q)];
                da[(c, b * pix + q)] = d * w[c * pix + q];
            }
        }
    }
    for l in (0..3).rev() {
        let conv = &lay.convs[l];
        let dz = da.zip_map(
            &trace.pre[l],
            |d, z| if z > 0.0 { d } else { LEAKY_SLOPE * d },
        );
        let dw = &dz * trace.cols[l].transpose();
        let k = conv.cin * TAPS;
        for o in 0..conv.cout {
            for r in 0..k {
                gp[conv.weight + o * k + r] += dw[(o, r)];
            }
            gp[conv.bias + o] += dz.row(o).sum();
        }
        if l == 0 && !want_input {
            return None;
        }
        let dcols = kernel_matrix(p, conv).transpose() * &dz;
        da = col2im(&dcols, conv.cin, conv.size, len);
    }
    let views = params.views;
    let rpix = params.resolution * params.resolution;
    let mut input = vec![0.0; len * views * rpix];
    for b in 0..len {
        for v in 0..views {
            for q in 0..rpix {
                input[(b * views + v) * rpix + q] = da[(v, b * rpix + q)];
            }
        }
    }
    Some(input)
}

fn check_batch(params: &DiscParams, batch: &ViewBatch) -> Result<()> {
    if batch.views != params.views || batch.resolution != params.resolution {
        return Err(Error::Shape(format!(
            "batch of {} views at {}² does not match discriminator ({} views at {}²)",
            batch.views, batch.resolution, params.views, params.resolution
        )));
    }
    ensure!(batch.len > 0, Validation, "view batch is empty");
    if batch.data.iter().any(|v| v.is_nan()) {
        return Err(Error::Numeric("discriminator input contains NaN".into()));
    }
    Ok(())
}

/// Logits of a batch together with the activations needed by [`DiscForward::backward`].
pub struct DiscForward {
    pub logits: Vec<f64>,
    trace: Trace,
}

/// Gradients of a scalar function of the logits.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscGradients {
    /// Same layout as [`DiscParams::values`].
    pub params: Vec<f64>,
    /// Same layout as [`ViewBatch::data`]; empty when not requested.
    pub input: Vec<f64>,
}

impl DiscForward {
    pub fn run(params: &DiscParams, batch: &ViewBatch) -> Result<Self> {
        params.validate()?;
        check_batch(params, batch)?;
        let (logits, trace) = forward_batch(params, &params.layout(), batch);
        if let Some(bad) = logits.iter().find(|u| !u.is_finite()) {
            return Err(Error::Numeric(format!("discriminator logit is {bad}")));
        }
        Ok(DiscForward { logits, trace })
    }

    /// Vector-Jacobian product for upstream gradients `dlogits`.
    pub fn backward(&self, params: &DiscParams, dlogits: &[f64]) -> Result<DiscGradients> {
        self.backward_with(params, dlogits, true)
    }

    /// As [`DiscForward::backward`], skipping the input gradient unless `want_input`.
    pub fn backward_with(
        &self,
        params: &DiscParams,
        dlogits: &[f64],
        want_input: bool,
    ) -> Result<DiscGradients> {
        if dlogits.len() != self.logits.len() {
            return Err(Error::Shape(format!(
                "{} upstream gradients for {} logits",
                dlogits.len(),
                self.logits.len()
            )));
        }
        let lay = params.layout();
        let mut gp = vec![0.0; lay.total];
        let input = backward_batch(params, &lay, &self.trace, dlogits, &mut gp, want_input)
            .unwrap_or_default();
        Ok(DiscGradients { params: gp, input })
    }
}

/// Per-item logits of the discriminator.
pub fn disc_forward(params: &DiscParams, batch: &ViewBatch) -> Result<Vec<f64>> {
    Ok(DiscForward::run(params, batch)?.logits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discriminator::Provenance;

    fn batch(len: usize, views: usize, res: usize, seed: u64) -> ViewBatch {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..len * views * res * res)
            .map(|_| rng.gen::<f64>())
            .collect();
        ViewBatch {
            views,
            resolution: res,
            len,
            data,
            provenance: Provenance::Fake,
        }
    }

    fn randomized(views: usize, res: usize) -> DiscParams {
        let mut p = disc_init(views, res, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lay = p.layout();
        for v in &mut p.values[lay.convs[0].bias..] {
            *v += rng.gen_range(-0.3..0.3);
        }
        p
    }

    #[test]
    fn init_is_deterministic_with_zero_logits() {
        let a = disc_init(4, 64, 7).unwrap();
        let b = disc_init(4, 64, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, disc_init(4, 64, 8).unwrap());
        let logits = disc_forward(&a, &batch(3, 4, 64, 1)).unwrap();
        assert_eq!(logits, vec![0.0; 3]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(disc_init(0, 64, 0), Err(Error::Validation(_))));
        assert!(matches!(disc_init(4, 8, 0), Err(Error::Validation(_))));
        assert!(matches!(disc_init(4, 48, 0), Err(Error::Validation(_))));
        let p = disc_init(4, 16, 0).unwrap();
        assert!(matches!(
            disc_forward(&p, &batch(1, 2, 16, 0)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn nan_input_is_numeric_error() {
        let p = disc_init(1, 16, 0).unwrap();
        let mut b = batch(1, 1, 16, 0);
        b.data[5] = f64::NAN;
        assert!(matches!(disc_forward(&p, &b), Err(Error::Numeric(_))));
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    /// Worst relative error over coordinates where the central difference is
    /// stable under halving the step (rectifier kinks are skipped).
    fn worst_error(
        analytic: &[f64],
        coords: impl Iterator<Item = usize>,
        fd: impl Fn(usize, f64) -> f64,
    ) -> f64 {
        let h = 1e-5;
        let mut worst = 0.0f64;
        for i in coords {
            let (a, b) = (fd(i, h), fd(i, h / 2.0));
            if rel(a, b) > 1e-2 || a.abs().max(analytic[i].abs()) < 1e-6 {
                continue;
            }
            worst = worst.max(rel(analytic[i], a));
        }
        worst
    }

    #[test]
    fn param_gradients_match_finite_differences() {
        let p = randomized(2, 16);
        let b = batch(2, 2, 16, 5);
        let dl = [0.7, -1.3];
        let g = DiscForward::run(&p, &b).unwrap().backward(&p, &dl).unwrap();
        let f = |q: &DiscParams| -> f64 {
            let u = disc_forward(q, &b).unwrap();
            u[0] * dl[0] + u[1] * dl[1]
        };
        let worst = worst_error(&g.params, (0..p.values.len()).step_by(31), |i, h| {
            let mut a = p.clone();
            a.values[i] += h;
            let mut c = p.clone();
            c.values[i] -= h;
            (f(&a) - f(&c)) / (2.0 * h)
        });
        assert!(worst < 1e-3, "worst {worst}");
    }

    #[test]
    fn input_gradients_match_finite_differences() {
        let p = randomized(2, 16);
        let b = batch(1, 2, 16, 9);
        let g = DiscForward::run(&p, &b)
            .unwrap()
            .backward(&p, &[1.0])
            .unwrap();
        let worst = worst_error(&g.input, (0..b.data.len()).step_by(3), |i, h| {
            let mut a = b.clone();
            a.data[i] += h;
            let mut c = b.clone();
            c.data[i] -= h;
            (disc_forward(&p, &a).unwrap()[0] - disc_forward(&p, &c).unwrap()[0]) / (2.0 * h)
        });
        assert!(worst < 1e-3, "worst {worst}");
    }
}
