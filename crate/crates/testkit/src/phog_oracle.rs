//! Brute-force per-pixel reference for the pyramid orientation-histogram
//! descriptor. Every stage is spelled out as a scalar loop over clamped
//! pixel coordinates.

/// Pipeline switches mirrored from the library's options.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub levels: u32,
    pub bins: usize,
    /// Orientation wrap range in degrees (180 or 360).
    pub angle_range: f64,
    /// Edge threshold as a fraction of the maximum |Laplacian|.
    pub edge_threshold_frac: f64,
    /// Take gradients on the Laplacian response instead of the image.
    pub gradients_on_laplacian: bool,
    /// Use the 8-connected Laplacian stencil.
    pub eight_connected: bool,
    pub normalize: bool,
}

impl OracleConfig {
    pub fn standard(levels: u32, bins: usize) -> Self {
        OracleConfig {
            levels,
            bins,
            angle_range: 360.0,
            edge_threshold_frac: 0.1,
            gradients_on_laplacian: false,
            eight_connected: false,
            normalize: true,
        }
    }
}

fn at(pixels: &[f64], w: usize, h: usize, x: isize, y: isize) -> f64 {
    let cx = x.clamp(0, w as isize - 1) as usize;
    let cy = y.clamp(0, h as isize - 1) as usize;
    pixels[cy * w + cx]
}

fn laplacian_at(pixels: &[f64], w: usize, h: usize, x: isize, y: isize, eight: bool) -> f64 {
    let c = at(pixels, w, h, x, y);
    let n4 = at(pixels, w, h, x - 1, y)
        + at(pixels, w, h, x + 1, y)
        + at(pixels, w, h, x, y - 1)
        + at(pixels, w, h, x, y + 1);
    if eight {
        let diag = at(pixels, w, h, x - 1, y - 1)
            + at(pixels, w, h, x + 1, y - 1)
            + at(pixels, w, h, x - 1, y + 1)
            + at(pixels, w, h, x + 1, y + 1);
        n4 + diag - 8.0 * c
    } else {
        n4 - 4.0 * c
    }
}

fn sobel_at(pixels: &[f64], w: usize, h: usize, x: isize, y: isize) -> (f64, f64) {
    let p = |dx: isize, dy: isize| at(pixels, w, h, x + dx, y + dy);
    let gx = -p(-1, -1) + p(1, -1) - 2.0 * p(-1, 0) + 2.0 * p(1, 0) - p(-1, 1) + p(1, 1);
    let gy = -p(-1, -1) - 2.0 * p(0, -1) - p(1, -1) + p(-1, 1) + 2.0 * p(0, 1) + p(1, 1);
    (gx, gy)
}

/// Cell index whose span `[floor(c*len/n), floor((c+1)*len/n))` holds `coord`.
fn cell_of(coord: usize, len: usize, n: usize) -> usize {
    for c in 0..n {
        if coord >= c * len / n && coord < (c + 1) * len / n {
            return c;
        }
    }
    n - 1
}

/// Compute the full descriptor the slow, obvious way.
pub fn brute_force_descriptor(pixels: &[f64], w: usize, h: usize, cfg: &OracleConfig) -> Vec<f64> {
    assert_eq!(pixels.len(), w * h);

    let mut lap = vec![0.0f64; w * h];
    for y in 0..h {
        for x in 0..w {
            lap[y * w + x] =
                laplacian_at(pixels, w, h, x as isize, y as isize, cfg.eight_connected);
        }
    }
    let max_abs = lap.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mask: Vec<bool> = if max_abs == 0.0 {
        vec![false; w * h]
    } else {
        lap.iter()
            .map(|v| v.abs() >= cfg.edge_threshold_frac * max_abs)
            .collect()
    };

    let grad_src: &[f64] = if cfg.gradients_on_laplacian {
        &lap
    } else {
        pixels
    };

    let mut len = 0usize;
    for l in 0..=cfg.levels {
        len += (1usize << (2 * l)) * cfg.bins;
    }
    let mut values = vec![0.0f64; len];

    let mut offset = 0usize;
    for level in 0..=cfg.levels {
        let n = 1usize << level;
        for y in 0..h {
            for x in 0..w {
                if !mask[y * w + x] {
                    continue;
                }
                let (gx, gy) = sobel_at(grad_src, w, h, x as isize, y as isize);
                let magnitude = (gx * gx + gy * gy).sqrt();
                let mut theta = if gx == 0.0 && gy == 0.0 {
                    0.0
                } else {
                    gy.atan2(gx).to_degrees()
                };
                while theta < 0.0 {
                    theta += cfg.angle_range;
                }
                while theta >= cfg.angle_range {
                    theta -= cfg.angle_range;
                }
                let bin_width = cfg.angle_range / cfg.bins as f64;
                let bin = ((theta / bin_width).floor() as usize).min(cfg.bins - 1);
                let cell = cell_of(y, h, n) * n + cell_of(x, w, n);
                values[offset + cell * cfg.bins + bin] += magnitude;
            }
        }
        offset += n * n * cfg.bins;
    }

    if cfg.normalize {
        let sum: f64 = values.iter().sum();
        if sum > 0.0 {
            for v in &mut values {
                *v /= sum;
            }
        }
    }
    values
}
