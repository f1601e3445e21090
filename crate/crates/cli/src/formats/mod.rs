//! Image file decoding, dispatched on the magic bytes.

pub mod pgm;
pub mod png;

use std::fs;
use std::path::{Path, PathBuf};

use phogsvm_core::imaging::GrayImage;

const PNG_MAGIC: &[u8] = &[0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {detail}", path.display())]
    Format { path: PathBuf, detail: String },
}

fn format_error(path: &Path, detail: impl ToString) -> LoadError {
    LoadError::Format {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

/// Decode a PGM (P2/P5) or PNG (8-bit gray/RGB) file into `[0,1]`
/// intensities.
pub fn load_image(path: &Path) -> Result<GrayImage, LoadError> {
    let bytes = fs::read(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        pgm::decode(&bytes).map_err(|e| format_error(path, e))
    } else if bytes.starts_with(PNG_MAGIC) {
        png::decode(&bytes).map_err(|e| format_error(path, e))
    } else {
        Err(format_error(
            path,
            "unsupported image format (need PGM P2/P5 or PNG)",
        ))
    }
}

/// Dump a filter response as an 8-bit PGM, value range rescaled to 0..=255.
pub fn write_debug_pgm(path: &Path, img: &GrayImage) -> Result<(), LoadError> {
    fs::write(path, pgm::encode_scaled(img)).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatch_by_magic_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let pgm_path = dir.path().join("a.pgm");
        fs::write(&pgm_path, b"P2\n1 1\n255\n128\n").unwrap();
        assert!(load_image(&pgm_path).is_ok());

        let junk = dir.path().join("junk.dat");
        fs::write(&junk, b"GIF89a").unwrap();
        assert!(matches!(
            load_image(&junk),
            Err(LoadError::Format { .. })
        ));

        let missing = dir.path().join("missing.pgm");
        assert!(matches!(load_image(&missing), Err(LoadError::Io { .. })));
    }
}
