//! Seeded synthetic images: random textures, and line drawings of two
//! visually distinct shape families for end-to-end classification runs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random intensities in `[0, 1]`.
pub fn random_image(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..w * h).map(|_| rng.gen_range(0.0..1.0)).collect()
}

/// Random intensities on the dyadic grid `k/256`; sums and stencil products
/// on these stay exact in doubles.
pub fn random_dyadic_image(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..w * h)
        .map(|_| rng.gen_range(0u32..=256) as f64 / 256.0)
        .collect()
}

/// White elliptical ring on black background, random pose and radii.
pub fn ellipse_image(size: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let s = size as f64;
    let cx = rng.gen_range(0.4..0.6) * s;
    let cy = rng.gen_range(0.4..0.6) * s;
    let rx = rng.gen_range(0.18..0.38) * s;
    let ry = rng.gen_range(0.18..0.38) * s;
    let phi = rng.gen_range(0.0..core::f64::consts::PI);
    let (sin, cos) = phi.sin_cos();
    let band = 1.5 / rx.min(ry);

    let mut pixels = vec![0.0f64; size * size];
    for y in 0..size {
        for x in 0..size {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            let u = (dx * cos + dy * sin) / rx;
            let v = (-dx * sin + dy * cos) / ry;
            let r = (u * u + v * v).sqrt();
            if (r - 1.0).abs() < band {
                pixels[y * size + x] = 1.0;
            }
        }
    }
    pixels
}

fn segment_distance(px: f64, py: f64, ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    let (vx, vy) = (bx - ax, by - ay);
    let len_sq = vx * vx + vy * vy;
    let t = if len_sq == 0.0 {
        0.0
    } else {
        (((px - ax) * vx + (py - ay) * vy) / len_sq).clamp(0.0, 1.0)
    };
    let (qx, qy) = (ax + t * vx, ay + t * vy);
    ((px - qx).powi(2) + (py - qy).powi(2)).sqrt()
}

/// Two crossing white strokes on black background, random pose.
pub fn cross_image(size: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let s = size as f64;
    let cx = rng.gen_range(0.4..0.6) * s;
    let cy = rng.gen_range(0.4..0.6) * s;
    let theta = rng.gen_range(0.0..core::f64::consts::PI);
    let skew = rng.gen_range(-0.3..0.3);
    let angles = [theta, theta + core::f64::consts::FRAC_PI_2 + skew];
    let half_lengths = [
        rng.gen_range(0.25..0.45) * s,
        rng.gen_range(0.25..0.45) * s,
    ];
    let thickness = 1.3;

    let mut pixels = vec![0.0f64; size * size];
    for y in 0..size {
        for x in 0..size {
            let (px, py) = (x as f64, y as f64);
            for (angle, half) in angles.iter().zip(&half_lengths) {
                let (sin, cos) = angle.sin_cos();
                let (ax, ay) = (cx - half * cos, cy - half * sin);
                let (bx, by) = (cx + half * cos, cy + half * sin);
                if segment_distance(px, py, ax, ay, bx, by) < thickness {
                    pixels[y * size + x] = 1.0;
                    break;
                }
            }
        }
    }
    pixels
}

/// Binary 8-bit PGM (P5) encoding for `[0, 1]` intensities; 0 and 1 survive
/// a decode round trip exactly.
pub fn to_pgm_p5(pixels: &[f64], w: usize, h: usize) -> Vec<u8> {
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend(
        pixels
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seed_deterministic() {
        let a = ellipse_image(32, &mut rng(5));
        let b = ellipse_image(32, &mut rng(5));
        assert_eq!(a, b);
        let c = cross_image(32, &mut rng(5));
        let d = cross_image(32, &mut rng(5));
        assert_eq!(c, d);
        assert_ne!(a, c);
    }

    #[test]
    fn shapes_are_nonempty_binary_drawings() {
        let e = ellipse_image(48, &mut rng(1));
        let on = e.iter().filter(|v| **v == 1.0).count();
        assert!(on > 40, "ellipse draws {on} pixels");
        assert!(e.iter().all(|v| *v == 0.0 || *v == 1.0));

        let x = cross_image(48, &mut rng(2));
        let on = x.iter().filter(|v| **v == 1.0).count();
        assert!(on > 40, "cross draws {on} pixels");
    }
}
