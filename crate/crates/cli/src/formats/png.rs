//! PNG decoding limited to 8-bit grayscale and RGB; RGB collapses to gray
//! through the standard luminance weights.

use image::DynamicImage;
use phogsvm_core::imaging::GrayImage;

#[derive(Debug, thiserror::Error)]
pub enum PngError {
    #[error("png decode failed: {0}")]
    Decode(String),
    #[error("unsupported png pixel layout {0}; need 8-bit grayscale or rgb")]
    UnsupportedColor(String),
}

pub fn decode(bytes: &[u8]) -> Result<GrayImage, PngError> {
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| PngError::Decode(e.to_string()))?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    match decoded {
        DynamicImage::ImageLuma8(buf) => {
            let pixels = buf.into_raw().iter().map(|v| *v as f64 / 255.0).collect();
            Ok(GrayImage::new(w, h, pixels).expect("png reports valid dimensions"))
        }
        DynamicImage::ImageRgb8(buf) => {
            let raw = buf.into_raw();
            let pixels = raw
                .chunks_exact(3)
                .map(|rgb| {
                    0.299 * (rgb[0] as f64 / 255.0)
                        + 0.587 * (rgb[1] as f64 / 255.0)
                        + 0.114 * (rgb[2] as f64 / 255.0)
                })
                .collect();
            Ok(GrayImage::new(w, h, pixels).expect("png reports valid dimensions"))
        }
        other => Err(PngError::UnsupportedColor(format!("{:?}", other.color()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{ImageBuffer, Luma, Rgb};

    fn png_bytes_gray(w: u32, h: u32, f: impl Fn(u32, u32) -> u8) -> Vec<u8> {
        let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_fn(w, h, |x, y| Luma([f(x, y)]));
        let mut out = std::io::Cursor::new(Vec::new());
        DynamicImage::ImageLuma8(buf)
            .write_to(&mut out, image::ImageFormat::Png)
            .unwrap();
        out.into_inner()
    }

    fn png_bytes_rgb(w: u32, h: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> Vec<u8> {
        let buf: ImageBuffer<Rgb<u8>, Vec<u8>> = ImageBuffer::from_fn(w, h, |x, y| Rgb(f(x, y)));
        let mut out = std::io::Cursor::new(Vec::new());
        DynamicImage::ImageRgb8(buf)
            .write_to(&mut out, image::ImageFormat::Png)
            .unwrap();
        out.into_inner()
    }

    #[test]
    fn gray_png_decodes_scaled() {
        let bytes = png_bytes_gray(2, 2, |x, y| if x == y { 255 } else { 0 });
        let img = decode(&bytes).unwrap();
        assert_eq!(img.pixels(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn rgb_png_uses_luminance_weights() {
        let bytes = png_bytes_rgb(3, 1, |x, _| match x {
            0 => [255, 0, 0],
            1 => [0, 255, 0],
            _ => [0, 0, 255],
        });
        let img = decode(&bytes).unwrap();
        assert_eq!(img.get(0, 0), 0.299);
        assert_eq!(img.get(1, 0), 0.587);
        assert_eq!(img.get(2, 0), 0.114);
    }

    #[test]
    fn garbage_is_a_decode_error() {
        assert!(matches!(decode(b"not a png"), Err(PngError::Decode(_))));
    }
}
