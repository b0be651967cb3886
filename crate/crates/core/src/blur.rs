//! Discrete Gaussian kernels and full-frame separable blur.
//!
//! Images are row-major `f64` buffers in `[0, 1]`. Borders clamp to the
//! nearest edge pixel, which keeps constant images constant.

use thiserror::Error;

/// Kernel radius in standard deviations when none is given.
pub const DEFAULT_TRUNCATION: f64 = 3.0;

/// Sigmas below this produce the identity kernel.
pub const MIN_SIGMA: f64 = 1e-6;

/// Output height at which controller sigmas are expressed.
pub const REFERENCE_HEIGHT_PX: u32 = 1080;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlurError {
    #[error("sigma must be non-negative, got {0}")]
    NegativeSigma(f64),
    #[error("sigma must be finite, got {0}")]
    NonFiniteSigma(f64),
    #[error("truncation must be positive and finite, got {0}")]
    InvalidTruncation(f64),
    #[error("image has no pixels")]
    EmptyImage,
    #[error("image buffer length {len} does not match {width}x{height}x{channels}")]
    BadDimensions {
        width: usize,
        height: usize,
        channels: usize,
        len: usize,
    },
    #[error("unsupported channel count {0}; expected 1 or 3")]
    BadChannels(usize),
}

/// Normalized symmetric 1D Gaussian weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    radius: usize,
    weights: Vec<f64>,
}

impl Kernel1D {
    pub fn identity() -> Self {
        Self {
            radius: 0,
            weights: vec![1.0],
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_identity(&self) -> bool {
        self.radius == 0
    }
}

/// Builds a Gaussian kernel with `radius = ceil(truncation * sigma)`.
pub fn make_kernel(sigma_px: f64, truncation: f64) -> Result<Kernel1D, BlurError> {
    if !sigma_px.is_finite() {
        return Err(BlurError::NonFiniteSigma(sigma_px));
    }
    if sigma_px < 0.0 {
        return Err(BlurError::NegativeSigma(sigma_px));
    }
    if !(truncation.is_finite() && truncation > 0.0) {
        return Err(BlurError::InvalidTruncation(truncation));
    }
    if sigma_px < MIN_SIGMA {
        return Ok(Kernel1D::identity());
    }

    let radius = (truncation * sigma_px).ceil() as usize;
    let denom = 2.0 * sigma_px * sigma_px;
    // Fill one half and mirror so the weights are exactly symmetric.
    let mut weights = vec![0.0; 2 * radius + 1];
    for i in 0..=radius {
        let x = i as f64;
        let w = (-(x * x) / denom).exp();
        weights[radius + i] = w;
        weights[radius - i] = w;
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    Ok(Kernel1D { radius, weights })
}

/// Scales a sigma given at [`REFERENCE_HEIGHT_PX`] to a render target height.
pub fn scale_sigma_to_height(sigma_px: f64, height_px: u32) -> f64 {
    sigma_px * f64::from(height_px) / f64::from(REFERENCE_HEIGHT_PX)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageBuffer {
    /// Wraps `data`, clamping every value into `[0, 1]`.
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        mut data: Vec<f64>,
    ) -> Result<Self, BlurError> {
        if channels != 1 && channels != 3 {
            return Err(BlurError::BadChannels(channels));
        }
        if data.len() != width * height * channels {
            return Err(BlurError::BadDimensions {
                width,
                height,
                channels,
                len: data.len(),
            });
        }
        for v in &mut data {
            *v = clamp_unit(*v);
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(
        width: usize,
        height: usize,
        channels: usize,
        value: f64,
    ) -> Result<Self, BlurError> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: f64) {
        self.data[(y * self.width + x) * self.channels + c] = clamp_unit(value);
    }
}

// NaN maps to 0 so a clamped buffer is always finite.
fn clamp_unit(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

#[inline]
fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// Separable blur: a horizontal pass followed by a vertical pass.
pub fn blur(img: &ImageBuffer, kernel: &Kernel1D) -> Result<ImageBuffer, BlurError> {
    if img.is_empty() {
        return Err(BlurError::EmptyImage);
    }
    if kernel.is_identity() {
        return Ok(img.clone());
    }

    let (w, h, ch) = (img.width, img.height, img.channels);
    let r = kernel.radius as isize;
    let weights = kernel.weights();

    let mut horizontal = vec![0.0; img.data.len()];
    for y in 0..h {
        let row = &img.data[y * w * ch..(y + 1) * w * ch];
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, wk) in weights.iter().enumerate() {
                    let sx = clamp_index(x as isize + k as isize - r, w);
                    acc += wk * row[sx * ch + c];
                }
                horizontal[(y * w + x) * ch + c] = acc;
            }
        }
    }

    let mut out = vec![0.0; img.data.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, wk) in weights.iter().enumerate() {
                    let sy = clamp_index(y as isize + k as isize - r, h);
                    acc += wk * horizontal[(sy * w + x) * ch + c];
                }
                out[(y * w + x) * ch + c] = clamp_unit(acc);
            }
        }
    }

    Ok(ImageBuffer {
        width: w,
        height: h,
        channels: ch,
        data: out,
    })
}

/// Direct 2D convolution with a full Gaussian window. Slow; used to check
/// [`blur`].
///
/// The 2D weights are evaluated from the Gaussian directly rather than taken
/// from [`make_kernel`], so the two paths only share the radius rule.
pub fn blur_reference_2d(
    img: &ImageBuffer,
    sigma_px: f64,
    truncation: f64,
) -> Result<ImageBuffer, BlurError> {
    if img.is_empty() {
        return Err(BlurError::EmptyImage);
    }
    if !sigma_px.is_finite() {
        return Err(BlurError::NonFiniteSigma(sigma_px));
    }
    if sigma_px < 0.0 {
        return Err(BlurError::NegativeSigma(sigma_px));
    }
    if !(truncation.is_finite() && truncation > 0.0) {
        return Err(BlurError::InvalidTruncation(truncation));
    }
    if sigma_px < MIN_SIGMA {
        return Ok(img.clone());
    }

    let r = (truncation * sigma_px).ceil() as isize;
    let side = (2 * r + 1) as usize;
    let denom = 2.0 * sigma_px * sigma_px;
    let mut window = Vec::with_capacity(side * side);
    for dy in -r..=r {
        for dx in -r..=r {
            let d2 = (dx * dx + dy * dy) as f64;
            window.push((-d2 / denom).exp());
        }
    }
    let total: f64 = window.iter().sum();
    for v in &mut window {
        *v /= total;
    }

    let (w, h, ch) = (img.width, img.height, img.channels);
    let mut out = vec![0.0; img.data.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let mut acc = 0.0;
                for dy in -r..=r {
                    let sy = clamp_index(y as isize + dy, h);
                    let wrow = &window[((dy + r) as usize) * side..((dy + r) as usize + 1) * side];
                    for dx in -r..=r {
                        let sx = clamp_index(x as isize + dx, w);
                        acc += wrow[(dx + r) as usize] * img.get(sx, sy, c);
                    }
                }
                out[(y * w + x) * ch + c] = clamp_unit(acc);
            }
        }
    }

    Ok(ImageBuffer {
        width: w,
        height: h,
        channels: ch,
        data: out,
    })
}

/// Root-mean-square difference between two equally shaped images.
pub fn rms_difference(a: &ImageBuffer, b: &ImageBuffer) -> Option<f64> {
    if (a.width, a.height, a.channels) != (b.width, b.height, b.channels) || a.is_empty() {
        return None;
    }
    let sum_sq: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Some((sum_sq / a.data.len() as f64).sqrt())
}

/// Anisotropic total variation: sum of absolute neighbour differences along
/// both axes and every channel.
pub fn total_variation(img: &ImageBuffer) -> f64 {
    let (w, h, ch) = (img.width, img.height, img.channels);
    let mut tv = 0.0;
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let v = img.get(x, y, c);
                if x + 1 < w {
                    tv += (img.get(x + 1, y, c) - v).abs();
                }
                if y + 1 < h {
                    tv += (img.get(x, y + 1, c) - v).abs();
                }
            }
        }
    }
    tv
}
