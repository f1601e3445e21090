//! Pyramid histogram-of-gradients shape descriptor driven by a Laplacian
//! edge mask.
//!
//! The descriptor concatenates orientation histograms over a spatial pyramid:
//! level `l` splits the image into a `2^l x 2^l` grid of cells, and every
//! edge pixel votes its gradient magnitude into the orientation bin of the
//! cell containing it, once per level. The final vector is L1-normalized.

use alloc::vec;
use alloc::vec::Vec;

use crate::imaging::{self, GrayImage, LaplacianStencil};
use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhogError {
    #[error("gradient images differ in size: {w0}x{h0} vs {w1}x{h1}")]
    DimensionMismatch {
        w0: usize,
        h0: usize,
        w1: usize,
        h1: usize,
    },
    #[error("{width}x{height} image cannot be split into a {cells}x{cells} cell grid")]
    ImageTooSmall {
        width: usize,
        height: usize,
        cells: usize,
    },
    #[error("bins must be at least 1")]
    NoBins,
    #[error("{0} pyramid levels is beyond the supported depth of 15")]
    TooManyLevels(u32),
    #[error("edge threshold fraction {0} outside [0, 1]")]
    BadThreshold(f64),
}

/// Orientation wrap range: signed (360°) or unsigned (180°) edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleRange {
    Deg180,
    #[default]
    Deg360,
}

impl AngleRange {
    pub fn degrees(self) -> f64 {
        match self {
            AngleRange::Deg180 => 180.0,
            AngleRange::Deg360 => 360.0,
        }
    }
}

/// Descriptor configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PhogParams {
    /// Deepest pyramid level; levels `0..=levels` all contribute.
    pub levels: u32,
    /// Orientation bins per cell.
    pub bins: usize,
    /// Orientation wrap range.
    pub angle_range: AngleRange,
    /// Edge mask threshold as a fraction of the maximum |Laplacian| response.
    pub edge_threshold_frac: f64,
}

impl PhogParams {
    pub fn new(
        levels: u32,
        bins: usize,
        angle_range: AngleRange,
        edge_threshold_frac: f64,
    ) -> Result<Self, PhogError> {
        if bins == 0 {
            return Err(PhogError::NoBins);
        }
        if levels > 15 {
            return Err(PhogError::TooManyLevels(levels));
        }
        if !(0.0..=1.0).contains(&edge_threshold_frac) || !math::is_finite(edge_threshold_frac) {
            return Err(PhogError::BadThreshold(edge_threshold_frac));
        }
        Ok(PhogParams {
            levels,
            bins,
            angle_range,
            edge_threshold_frac,
        })
    }

    pub fn descriptor_length(&self) -> usize {
        descriptor_length(self.levels, self.bins)
    }
}

impl Default for PhogParams {
    /// L = 3, H = 16, 360° orientations, 10% edge threshold.
    fn default() -> Self {
        PhogParams {
            levels: 3,
            bins: 16,
            angle_range: AngleRange::Deg360,
            edge_threshold_frac: 0.1,
        }
    }
}

/// Which image the voting gradients are computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientSource {
    /// Sobel gradients of the input image; the Laplacian only gates votes.
    #[default]
    Image,
    /// Sobel gradients of the Laplacian response itself.
    Laplacian,
}

/// Knobs that alter the descriptor pipeline away from its defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhogOptions {
    pub grad_source: GradientSource,
    pub stencil: LaplacianStencil,
    /// Skip the final L1 normalization when false.
    pub normalize: bool,
}

impl PhogOptions {
    pub fn standard() -> Self {
        PhogOptions {
            grad_source: GradientSource::Image,
            stencil: LaplacianStencil::FourConnected,
            normalize: true,
        }
    }
}

/// Pixels eligible to vote into the histograms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMask {
    width: usize,
    height: usize,
    flags: Vec<bool>,
}

impl EdgeMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.flags[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }
}

/// The computed feature vector together with the parameters that shaped it.
#[derive(Debug, Clone, PartialEq)]
pub struct PhogDescriptor {
    pub values: Vec<f64>,
    pub params: PhogParams,
}

/// Total histogram entries for levels `0..=levels` at `bins` per cell:
/// `bins * (4^(levels+1) - 1) / 3`.
pub fn descriptor_length(levels: u32, bins: usize) -> usize {
    let mut cells = 0usize;
    for l in 0..=levels {
        cells += 1usize << (2 * l);
    }
    bins * cells
}

/// Per-pixel gradient magnitude `sqrt(gx^2 + gy^2)`.
pub fn gradient_magnitude(gx: &GrayImage, gy: &GrayImage) -> Result<GrayImage, PhogError> {
    check_dims(gx, gy)?;
    let pixels = gx
        .pixels()
        .iter()
        .zip(gy.pixels())
        .map(|(x, y)| math::hypot(*x, *y))
        .collect();
    Ok(GrayImage::new(gx.width(), gx.height(), pixels).expect("finite magnitudes"))
}

/// Per-pixel gradient orientation in degrees, wrapped into `[0, A)`.
///
/// Zero-gradient pixels get orientation 0; they carry no vote weight anyway.
pub fn gradient_orientation(
    gx: &GrayImage,
    gy: &GrayImage,
    angle_range: AngleRange,
) -> Result<GrayImage, PhogError> {
    check_dims(gx, gy)?;
    let wrap = angle_range.degrees();
    let pixels = gx
        .pixels()
        .iter()
        .zip(gy.pixels())
        .map(|(x, y)| {
            if *x == 0.0 && *y == 0.0 {
                return 0.0;
            }
            let mut theta = math::atan2(*y, *x).to_degrees();
            while theta < 0.0 {
                theta += wrap;
            }
            while theta >= wrap {
                theta -= wrap;
            }
            theta
        })
        .collect();
    Ok(GrayImage::new(gx.width(), gx.height(), pixels).expect("finite orientations"))
}

/// Histogram bin for an orientation: `floor(theta / (A / bins))`, clamped to
/// the last bin to absorb the `theta -> A` limit.
pub fn map_orientation_to_bin(theta: f64, angle_range: AngleRange, bins: usize) -> usize {
    let width = angle_range.degrees() / bins as f64;
    let bin = math::floor(theta / width) as isize;
    bin.clamp(0, bins as isize - 1) as usize
}

/// Flag pixels whose |Laplacian| response reaches `frac` of the maximum.
///
/// An exactly constant response (max 0) produces an all-false mask.
pub fn edge_mask(lap: &GrayImage, frac: f64) -> EdgeMask {
    let max_abs = lap
        .pixels()
        .iter()
        .fold(0.0f64, |acc, p| acc.max(math::abs(*p)));
    let flags = if max_abs == 0.0 {
        vec![false; lap.pixels().len()]
    } else {
        let cut = frac * max_abs;
        lap.pixels().iter().map(|p| math::abs(*p) >= cut).collect()
    };
    EdgeMask {
        width: lap.width(),
        height: lap.height(),
        flags,
    }
}

/// Cell index lookup for one axis of one pyramid level: `lut[coord]` is the
/// cell whose half-open span `[floor(c*len/n), floor((c+1)*len/n))` contains
/// the coordinate.
fn cell_lookup(len: usize, cells: usize) -> Vec<usize> {
    let mut lut = vec![0usize; len];
    for c in 0..cells {
        let lo = c * len / cells;
        let hi = (c + 1) * len / cells;
        for slot in &mut lut[lo..hi] {
            *slot = c;
        }
    }
    lut
}

/// Compute the descriptor with the standard pipeline options.
pub fn phog_descriptor(img: &GrayImage, params: &PhogParams) -> Result<PhogDescriptor, PhogError> {
    phog_descriptor_with(img, params, &PhogOptions::standard())
}

/// Compute the descriptor:
/// Laplacian -> edge mask, Sobel -> magnitude + orientation, then masked
/// magnitude votes into per-cell orientation histograms over every pyramid
/// level, concatenated coarse-to-fine and L1-normalized.
pub fn phog_descriptor_with(
    img: &GrayImage,
    params: &PhogParams,
    opts: &PhogOptions,
) -> Result<PhogDescriptor, PhogError> {
    let deepest = 1usize << params.levels;
    if img.width() < deepest || img.height() < deepest {
        return Err(PhogError::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            cells: deepest,
        });
    }

    let lap = imaging::laplacian_with(img, opts.stencil);
    let mask = edge_mask(&lap, params.edge_threshold_frac);
    let (gx, gy) = match opts.grad_source {
        GradientSource::Image => imaging::sobel_gradients(img),
        GradientSource::Laplacian => imaging::sobel_gradients(&lap),
    };
    let magnitude = gradient_magnitude(&gx, &gy)?;
    let orientation = gradient_orientation(&gx, &gy, params.angle_range)?;

    let mut values = vec![0.0f64; params.descriptor_length()];
    let mut level_offset = 0usize;
    for level in 0..=params.levels {
        let cells = 1usize << level;
        let col_of = cell_lookup(img.width(), cells);
        let row_of = cell_lookup(img.height(), cells);
        for (y, &cell_row) in row_of.iter().enumerate() {
            for (x, &cell_col) in col_of.iter().enumerate() {
                if !mask.get(x, y) {
                    continue;
                }
                let bin =
                    map_orientation_to_bin(orientation.get(x, y), params.angle_range, params.bins);
                let cell = cell_row * cells + cell_col;
                values[level_offset + cell * params.bins + bin] += magnitude.get(x, y);
            }
        }
        level_offset += cells * cells * params.bins;
    }

    if opts.normalize {
        let sum: f64 = values.iter().sum();
        if sum > 0.0 {
            for v in &mut values {
                *v /= sum;
            }
        }
    }

    Ok(PhogDescriptor {
        values,
        params: params.clone(),
    })
}

fn check_dims(a: &GrayImage, b: &GrayImage) -> Result<(), PhogError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(PhogError::DimensionMismatch {
            w0: a.width(),
            h0: a.height(),
            w1: b.width(),
            h1: b.height(),
        });
    }
    Ok(())
}
