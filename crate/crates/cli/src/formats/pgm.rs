//! Netpbm grayscale (PGM) decoding and encoding: ASCII `P2` and binary `P5`
//! with maxval up to 65535, `#` comments in the header, 16-bit samples
//! big-endian.

use phogsvm_core::imaging::GrayImage;

#[derive(Debug, thiserror::Error)]
pub enum PgmError {
    #[error("not a PGM file")]
    BadMagic,
    #[error("unexpected end of data")]
    Truncated,
    #[error("invalid header or pixel token {0:?}")]
    BadToken(String),
    #[error("maxval {0} outside 1..=65535")]
    BadMaxval(u32),
    #[error("image dimensions must be at least 1x1")]
    BadDimensions,
    #[error("pixel value {value} exceeds maxval {maxval}")]
    ValueTooLarge { value: u32, maxval: u32 },
}

struct Tokens<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(data: &'a [u8]) -> Self {
        Tokens { data, pos: 0 }
    }

    /// Skip whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        loop {
            while self.pos < self.data.len() && self.data[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.data.len() && self.data[self.pos] == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                return;
            }
        }
    }

    fn next_u32(&mut self) -> Result<u32, PgmError> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.data.len() && !self.data[self.pos].is_ascii_whitespace() {
            if self.data[self.pos] == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::Truncated);
        }
        let token = &self.data[start..self.pos];
        let text = std::str::from_utf8(token)
            .map_err(|_| PgmError::BadToken(String::from_utf8_lossy(token).into_owned()))?;
        text.parse::<u32>()
            .map_err(|_| PgmError::BadToken(text.to_owned()))
    }
}

/// Decode a PGM byte stream into `[0, 1]` intensities.
pub fn decode(bytes: &[u8]) -> Result<GrayImage, PgmError> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(PgmError::BadMagic),
    };
    let mut tokens = Tokens::new(&bytes[2..]);
    let width = tokens.next_u32()? as usize;
    let height = tokens.next_u32()? as usize;
    if width == 0 || height == 0 {
        return Err(PgmError::BadDimensions);
    }
    let maxval = tokens.next_u32()?;
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError::BadMaxval(maxval));
    }
    let scale = 1.0 / maxval as f64;
    let count = width * height;
    let mut pixels = Vec::with_capacity(count);

    if binary {
        // A single whitespace byte separates the maxval from the raster.
        let raster_at = 2 + tokens.pos + 1;
        if raster_at > bytes.len() {
            return Err(PgmError::Truncated);
        }
        let raster = &bytes[raster_at..];
        let wide = maxval > 255;
        let needed = count * if wide { 2 } else { 1 };
        if raster.len() < needed {
            return Err(PgmError::Truncated);
        }
        for i in 0..count {
            let value = if wide {
                u32::from(raster[2 * i]) << 8 | u32::from(raster[2 * i + 1])
            } else {
                u32::from(raster[i])
            };
            if value > maxval {
                return Err(PgmError::ValueTooLarge { value, maxval });
            }
            pixels.push(value as f64 * scale);
        }
    } else {
        for _ in 0..count {
            let value = tokens.next_u32()?;
            if value > maxval {
                return Err(PgmError::ValueTooLarge { value, maxval });
            }
            pixels.push(value as f64 * scale);
        }
    }

    Ok(GrayImage::new(width, height, pixels).expect("validated dimensions"))
}

/// Encode as binary 8-bit PGM, linearly rescaling the value range onto
/// 0..=255. Constant images map to black.
pub fn encode_scaled(img: &GrayImage) -> Vec<u8> {
    let (lo, hi) = img
        .pixels()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(*p), hi.max(*p))
        });
    let span = hi - lo;
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|p| {
        if span == 0.0 {
            0u8
        } else {
            ((p - lo) / span * 255.0).round() as u8
        }
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_pgm_scales_by_maxval() {
        let img = decode(b"P2\n2 2\n255\n0 255\n255 0\n").unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0, 1.0, 0.0]);

        let img = decode(b"P2 1 1 255 128").unwrap();
        assert!((img.get(0, 0) - 128.0 / 255.0).abs() < 1e-15);
        assert!((img.get(0, 0) - 0.50196).abs() < 1e-5);
    }

    #[test]
    fn comments_are_skipped() {
        let img = decode(b"P2\n# regenerated\n2 1 # dims\n10\n5 10\n").unwrap();
        assert_eq!(img.pixels(), &[0.5, 1.0]);
    }

    #[test]
    fn binary_pgm_eight_and_sixteen_bit() {
        let img = decode(b"P5\n2 1\n255\n\x00\xff").unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0]);

        // 16-bit big-endian, maxval 65535.
        let mut data = b"P5\n1 2\n65535\n".to_vec();
        data.extend([0x00, 0x00, 0xff, 0xff]);
        let img = decode(&data).unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0]);
    }

    #[test]
    fn corrupt_streams_are_rejected() {
        assert!(matches!(decode(b"P6\n1 1\n255\nxxx"), Err(PgmError::BadMagic)));
        assert!(matches!(decode(b"P5\n2 2\n255\n\x00"), Err(PgmError::Truncated)));
        assert!(matches!(decode(b"P2\n1 1\n255\n"), Err(PgmError::Truncated)));
        assert!(matches!(
            decode(b"P2\n1 1\n0\n0"),
            Err(PgmError::BadMaxval(0))
        ));
        assert!(matches!(
            decode(b"P2\n1 1\n100\n101"),
            Err(PgmError::ValueTooLarge { .. })
        ));
        assert!(matches!(
            decode(b"P2\n1 x\n255\n0"),
            Err(PgmError::BadToken(_))
        ));
    }

    #[test]
    fn scaled_encode_round_trips_extremes() {
        let img = GrayImage::new(2, 1, vec![-1.0, 3.0]).unwrap();
        let bytes = encode_scaled(&img);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.pixels(), &[0.0, 1.0]);

        let flat = GrayImage::constant(2, 2, 0.7).unwrap();
        let back = decode(&encode_scaled(&flat)).unwrap();
        assert!(back.pixels().iter().all(|p| *p == 0.0));
    }
}
