//! Grayscale image container and the fixed low-level filter bank: 2-D
//! convolution, Gaussian smoothing, Laplacian edge response, Sobel gradients
//! and bicubic resampling.
//!
//! Every filter treats pixels outside the image as copies of the nearest
//! border pixel (replicate padding), so filter responses carry no artificial
//! border edges into downstream descriptors.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ImagingError {
    #[error("image dimensions must be at least 1x1")]
    EmptyImage,
    #[error("pixel buffer holds {got} values, expected {expected}")]
    PixelCountMismatch { expected: usize, got: usize },
    #[error("non-finite value at buffer index {0}")]
    NonFinite(usize),
    #[error("kernel {kernel_w}x{kernel_h} too large for {width}x{height} image")]
    KernelTooLarge {
        kernel_w: usize,
        kernel_h: usize,
        width: usize,
        height: usize,
    },
}

/// Dense row-major grid of real-valued intensities.
///
/// Decoded images live in `[0, 1]`; filter outputs may be negative or exceed
/// 1, but are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(ImagingError::PixelCountMismatch {
                expected: width * height,
                got: pixels.len(),
            });
        }
        if let Some(idx) = pixels.iter().position(|p| !math::is_finite(*p)) {
            return Err(ImagingError::NonFinite(idx));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single intensity.
    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self, ImagingError> {
        GrayImage::new(width, height, vec![value; width * height])
    }

    /// Build from a closure over `(x, y)` pixel coordinates.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, ImagingError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Pixel at signed coordinates with replicate padding outside the image.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    /// Transposed copy; rows become columns.
    pub fn transposed(&self) -> GrayImage {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for x in 0..self.width {
            for y in 0..self.height {
                pixels.push(self.get(x, y));
            }
        }
        GrayImage {
            width: self.height,
            height: self.width,
            pixels,
        }
    }
}

/// Odd-sided 2-D filter stencil, indexed by signed tap offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    radius_x: usize,
    radius_y: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    /// `weights` is row-major over `(2*radius_y+1) x (2*radius_x+1)` taps.
    pub fn new(radius_x: usize, radius_y: usize, weights: Vec<f64>) -> Result<Self, ImagingError> {
        let expected = (2 * radius_x + 1) * (2 * radius_y + 1);
        if weights.len() != expected {
            return Err(ImagingError::PixelCountMismatch {
                expected,
                got: weights.len(),
            });
        }
        if let Some(idx) = weights.iter().position(|w| !math::is_finite(*w)) {
            return Err(ImagingError::NonFinite(idx));
        }
        Ok(Kernel2D {
            radius_x,
            radius_y,
            weights,
        })
    }

    pub fn radius_x(&self) -> usize {
        self.radius_x
    }

    pub fn radius_y(&self) -> usize {
        self.radius_y
    }

    pub fn side_x(&self) -> usize {
        2 * self.radius_x + 1
    }

    pub fn side_y(&self) -> usize {
        2 * self.radius_y + 1
    }

    /// Weight at tap offset `(dx, dy)`, each in `[-radius, +radius]`.
    #[inline]
    pub fn weight(&self, dx: isize, dy: isize) -> f64 {
        let col = (dx + self.radius_x as isize) as usize;
        let row = (dy + self.radius_y as isize) as usize;
        self.weights[row * self.side_x() + col]
    }

    /// Separable kernel from the outer product of two 1-D tap rows.
    pub fn outer_product(col: &[f64], row: &[f64]) -> Result<Self, ImagingError> {
        if col.len() % 2 == 0 || row.len() % 2 == 0 {
            return Err(ImagingError::PixelCountMismatch {
                expected: col.len() | 1,
                got: col.len(),
            });
        }
        let mut weights = Vec::with_capacity(col.len() * row.len());
        for c in col {
            for r in row {
                weights.push(c * r);
            }
        }
        Kernel2D::new(row.len() / 2, col.len() / 2, weights)
    }
}

/// Correlation or (flipped-kernel) convolution with replicate padding.
fn apply_stencil(img: &GrayImage, k: &Kernel2D, flip: bool) -> GrayImage {
    let rx = k.radius_x as isize;
    let ry = k.radius_y as isize;
    let mut out = Vec::with_capacity(img.pixels.len());
    for y in 0..img.height as isize {
        for x in 0..img.width as isize {
            let mut acc = 0.0;
            for dy in -ry..=ry {
                for dx in -rx..=rx {
                    let w = k.weight(dx, dy);
                    let (sx, sy) = if flip { (x - dx, y - dy) } else { (x + dx, y + dy) };
                    acc += w * img.get_clamped(sx, sy);
                }
            }
            out.push(acc);
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: out,
    }
}

/// True 2-D convolution (kernel flipped) with replicate border padding.
///
/// The output has the same dimensions as the input. Kernels as large as
/// twice the image reject with [`ImagingError::KernelTooLarge`].
pub fn convolve2d(img: &GrayImage, k: &Kernel2D) -> Result<GrayImage, ImagingError> {
    if k.side_x() >= 2 * img.width || k.side_y() >= 2 * img.height {
        return Err(ImagingError::KernelTooLarge {
            kernel_w: k.side_x(),
            kernel_h: k.side_y(),
            width: img.width,
            height: img.height,
        });
    }
    Ok(apply_stencil(img, k, true))
}

/// Symmetric 1-D taps of the sampled Gaussian, truncated at `ceil(3*sigma)`
/// and renormalized to sum exactly 1.
pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    let radius = math::ceil(3.0 * sigma) as usize;
    let mut taps = Vec::with_capacity(2 * radius + 1);
    let denom = 2.0 * sigma * sigma;
    for k in -(radius as isize)..=(radius as isize) {
        let k = k as f64;
        taps.push(math::exp(-(k * k) / denom));
    }
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

fn convolve_rows(img: &GrayImage, taps: &[f64]) -> GrayImage {
    let radius = (taps.len() / 2) as isize;
    let mut out = Vec::with_capacity(img.pixels.len());
    for y in 0..img.height as isize {
        for x in 0..img.width as isize {
            let mut acc = 0.0;
            for (i, t) in taps.iter().enumerate() {
                let dx = i as isize - radius;
                acc += t * img.get_clamped(x + dx, y);
            }
            out.push(acc);
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: out,
    }
}

fn convolve_cols(img: &GrayImage, taps: &[f64]) -> GrayImage {
    let radius = (taps.len() / 2) as isize;
    let mut out = Vec::with_capacity(img.pixels.len());
    for y in 0..img.height as isize {
        for x in 0..img.width as isize {
            let mut acc = 0.0;
            for (i, t) in taps.iter().enumerate() {
                let dy = i as isize - radius;
                acc += t * img.get_clamped(x, y + dy);
            }
            out.push(acc);
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        pixels: out,
    }
}

/// Gaussian smoothing as two separable 1-D passes.
///
/// Equals convolution with the 2-D product kernel; the normalized taps make
/// the filter preserve constant images exactly.
pub fn gaussian_smooth(img: &GrayImage, sigma: f64) -> GrayImage {
    let taps = gaussian_taps(sigma);
    convolve_cols(&convolve_rows(img, &taps), &taps)
}

/// Which discrete Laplacian stencil to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LaplacianStencil {
    /// `{0,1,0; 1,-4,1; 0,1,0}`
    #[default]
    FourConnected,
    /// `{1,1,1; 1,-8,1; 1,1,1}`
    EightConnected,
}

impl LaplacianStencil {
    fn kernel(self) -> Kernel2D {
        let weights = match self {
            LaplacianStencil::FourConnected => {
                vec![0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0]
            }
            LaplacianStencil::EightConnected => {
                vec![1.0, 1.0, 1.0, 1.0, -8.0, 1.0, 1.0, 1.0, 1.0]
            }
        };
        Kernel2D::new(1, 1, weights).expect("3x3 stencil")
    }
}

/// Signed second-derivative edge response with the 4-connected stencil.
pub fn laplacian(img: &GrayImage) -> GrayImage {
    laplacian_with(img, LaplacianStencil::FourConnected)
}

pub fn laplacian_with(img: &GrayImage, stencil: LaplacianStencil) -> GrayImage {
    apply_stencil(img, &stencil.kernel(), true)
}

/// Horizontal and vertical Sobel gradients.
///
/// `gx` is positive where intensity increases along +x (columns), `gy` where
/// it increases along +y (rows).
pub fn sobel_gradients(img: &GrayImage) -> (GrayImage, GrayImage) {
    let sx = Kernel2D::new(
        1,
        1,
        vec![-1.0, 0.0, 1.0, -2.0, 0.0, 2.0, -1.0, 0.0, 1.0],
    )
    .expect("3x3 stencil");
    let sy = Kernel2D::new(
        1,
        1,
        vec![-1.0, -2.0, -1.0, 0.0, 0.0, 0.0, 1.0, 2.0, 1.0],
    )
    .expect("3x3 stencil");
    (apply_stencil(img, &sx, false), apply_stencil(img, &sy, false))
}

/// Cubic convolution weight (Keys kernel, a = -0.5) at distance `x`.
fn keys_weight(x: f64) -> f64 {
    let x = math::abs(x);
    if x <= 1.0 {
        (1.5 * x - 2.5) * x * x + 1.0
    } else if x < 2.0 {
        ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0
    } else {
        0.0
    }
}

/// One separable resampling pass along a row of `len_in` samples.
fn resample_axis(len_in: usize, len_out: usize, sample: impl Fn(usize) -> f64, out: &mut [f64]) {
    let scale = len_in as f64 / len_out as f64;
    for (i, slot) in out.iter_mut().enumerate() {
        // Pixel-center alignment: output center i+0.5 maps into input space.
        let src = (i as f64 + 0.5) * scale - 0.5;
        let base = math::floor(src) as isize;
        let frac = src - base as f64;
        let mut acc = 0.0;
        for tap in -1..=2isize {
            let w = keys_weight(frac - tap as f64);
            let idx = (base + tap).clamp(0, len_in as isize - 1) as usize;
            acc += w * sample(idx);
        }
        *slot = acc;
    }
}

/// Bicubic resampling with the Keys kernel (a = -0.5), pixel-center aligned,
/// edge-replicated source taps. Applied separably: rows, then columns.
pub fn resample_bicubic(img: &GrayImage, out_w: usize, out_h: usize) -> GrayImage {
    assert!(out_w >= 1 && out_h >= 1, "output dimensions must be positive");

    let mut horiz = vec![0.0; out_w * img.height];
    for y in 0..img.height {
        let row = &img.pixels[y * img.width..(y + 1) * img.width];
        resample_axis(
            img.width,
            out_w,
            |x| row[x],
            &mut horiz[y * out_w..(y + 1) * out_w],
        );
    }

    let mut out = vec![0.0; out_w * out_h];
    let mut column = vec![0.0; out_h];
    for x in 0..out_w {
        resample_axis(img.height, out_h, |y| horiz[y * out_w + x], &mut column);
        for (y, v) in column.iter().enumerate() {
            out[y * out_w + x] = *v;
        }
    }

    GrayImage {
        width: out_w,
        height: out_h,
        pixels: out,
    }
}
