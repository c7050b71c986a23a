use crate::error::{Error, Result};

/// Row-major `height x width` occupancy image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Silhouette {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl Silhouette {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::Shape(format!(
                "{} values for a {width}x{height} silhouette",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Validation(format!(
                "silhouette value {v} outside [0, 1]"
            )));
        }
        Ok(Silhouette {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Silhouette {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                values.push(f(r, c));
            }
        }
        Silhouette {
            width,
            height,
            values,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.width + col] = v;
    }

    pub fn same_shape(&self, other: &Silhouette) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len().max(1) as f64
    }

    /// Hard mask: 1 where the value is at least `level`.
    pub fn threshold(&self, level: f64) -> Silhouette {
        Silhouette {
            width: self.width,
            height: self.height,
            values: self
                .values
                .iter()
                .map(|&v| if v >= level { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    /// Intersection over union of the two masks thresholded at 0.5.
    /// Two empty masks count as a perfect match.
    pub fn hard_iou(&self, other: &Silhouette) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let (mut inter, mut union) = (0usize, 0usize);
        for (&a, &b) in self.values.iter().zip(&other.values) {
            let (a, b) = (a >= 0.5, b >= 0.5);
            inter += (a && b) as usize;
            union += (a || b) as usize;
        }
        Ok(if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        })
    }

    /// Nearest-neighbour enlargement by an integer factor.
    pub fn upsample_nearest(&self, factor: usize) -> Silhouette {
        Silhouette::from_fn(self.width * factor, self.height * factor, |r, c| {
            self.get(r / factor, c / factor)
        })
    }
}

/// Reverses column order.
pub fn hflip(s: &Silhouette) -> Silhouette {
    let mut out = s.clone();
    for r in 0..s.height {
        out.values[r * s.width..(r + 1) * s.width].reverse();
    }
    out
}

/// Box-average pooling by `factor` along both axes.
pub fn downsample(s: &Silhouette, factor: usize) -> Result<Silhouette> {
    if factor == 0 || !s.width.is_multiple_of(factor) || !s.height.is_multiple_of(factor) {
        return Err(Error::Shape(format!(
            "factor {factor} does not divide {}x{}",
            s.width, s.height
        )));
    }
    if factor == 1 {
        return Ok(s.clone());
    }
    let (w, h) = (s.width / factor, s.height / factor);
    let norm = 1.0 / (factor * factor) as f64;
    let mut values = vec![0.0; w * h];
    for r in 0..s.height {
        let row = &s.values[r * s.width..(r + 1) * s.width];
        let out = &mut values[(r / factor) * w..(r / factor + 1) * w];
        for (c, v) in row.iter().enumerate() {
            out[c / factor] += v;
        }
    }
    for v in &mut values {
        // Clamp guards the [0, 1] invariant against summation rounding.
        *v = (*v * norm).clamp(0.0, 1.0);
    }
    Ok(Silhouette {
        width: w,
        height: h,
        values,
    })
}

/// Transpose of [`downsample`]: spreads each coarse gradient evenly over its block.
pub fn downsample_adjoint(coarse: &[f64], width: usize, height: usize, factor: usize) -> Vec<f64> {
    if factor == 1 {
        return coarse.to_vec();
    }
    let cw = width / factor;
    let norm = 1.0 / (factor * factor) as f64;
    let mut fine = vec![0.0; width * height];
    for r in 0..height {
        for c in 0..width {
            fine[r * width + c] = coarse[(r / factor) * cw + c / factor] * norm;
        }
    }
    fine
}
