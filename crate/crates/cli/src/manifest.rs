//! Dataset manifests: CSV files with an `id,path,label` header, labels
//! `male` (+1) or `female` (-1), relative paths resolved against the
//! manifest's directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use phogsvm_core::Label;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line 1: header must be `id,path,label`, found {found:?}")]
    BadHeader { found: String },
    #[error("line {line}: expected 3 fields `id,path,label`, found {got}")]
    FieldCount { line: usize, got: usize },
    #[error("line {line}: empty {field} field")]
    EmptyField { line: usize, field: &'static str },
    #[error("line {line}: label {value:?} is neither `male` nor `female`")]
    BadLabel { line: usize, value: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub id: String,
    pub path: PathBuf,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn parse_label(value: &str) -> Option<Label> {
    match value.to_ascii_lowercase().as_str() {
        "male" => Some(Label::Positive),
        "female" => Some(Label::Negative),
        _ => None,
    }
}

pub fn label_name(label: Label) -> &'static str {
    match label {
        Label::Positive => "male",
        Label::Negative => "female",
    }
}

pub fn load_manifest(path: &Path) -> Result<Dataset, ManifestError> {
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));

    let mut samples = Vec::new();
    let mut seen = HashSet::new();
    let mut lines = text.lines().enumerate();

    let header = lines.next().map(|(_, l)| l.trim()).unwrap_or("");
    if header != "id,path,label" {
        return Err(ManifestError::BadHeader {
            found: header.to_owned(),
        });
    }

    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(ManifestError::FieldCount {
                line,
                got: fields.len(),
            });
        }
        let (id, rel_path, label_text) = (fields[0], fields[1], fields[2]);
        if id.is_empty() {
            return Err(ManifestError::EmptyField { line, field: "id" });
        }
        if rel_path.is_empty() {
            return Err(ManifestError::EmptyField {
                line,
                field: "path",
            });
        }
        let label = parse_label(label_text).ok_or_else(|| ManifestError::BadLabel {
            line,
            value: label_text.to_owned(),
        })?;
        if !seen.insert(id.to_owned()) {
            return Err(ManifestError::DuplicateId {
                line,
                id: id.to_owned(),
            });
        }
        let rel = Path::new(rel_path);
        let resolved = if rel.is_absolute() {
            rel.to_path_buf()
        } else {
            base.join(rel)
        };
        samples.push(Sample {
            id: id.to_owned(),
            path: resolved,
            label,
        });
    }

    Ok(Dataset { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_manifest(content: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn three_line_manifest_maps_labels() {
        let (_dir, path) =
            write_manifest("id,path,label\na,one.pgm,male\nb,two.pgm,female\nc,three.pgm,male\n");
        let ds = load_manifest(&path).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(
            ds.samples.iter().map(|s| s.label).collect::<Vec<_>>(),
            vec![Label::Positive, Label::Negative, Label::Positive]
        );
    }

    #[test]
    fn labels_are_case_insensitive() {
        let (_dir, path) = write_manifest("id,path,label\na,a.pgm,Female\nb,b.pgm,MALE\n");
        let ds = load_manifest(&path).unwrap();
        assert_eq!(ds.samples[0].label, Label::Negative);
        assert_eq!(ds.samples[1].label, Label::Positive);
    }

    #[test]
    fn relative_paths_resolve_against_manifest_dir() {
        let (dir, path) = write_manifest("id,path,label\na,sub/img.pgm,male\n");
        let ds = load_manifest(&path).unwrap();
        assert_eq!(ds.samples[0].path, dir.path().join("sub/img.pgm"));
    }

    #[test]
    fn duplicate_id_names_line_and_id() {
        let (_dir, path) = write_manifest("id,path,label\nx,a.pgm,male\nx,b.pgm,female\n");
        match load_manifest(&path) {
            Err(ManifestError::DuplicateId { line, id }) => {
                assert_eq!(line, 3);
                assert_eq!(id, "x");
            }
            other => panic!("expected DuplicateId, got {other:?}"),
        }
    }

    #[test]
    fn bad_rows_are_rejected_with_line_numbers() {
        let (_dir, path) = write_manifest("id,path,label\na,b.pgm,cat\n");
        assert!(matches!(
            load_manifest(&path),
            Err(ManifestError::BadLabel { line: 2, .. })
        ));

        let (_dir, path) = write_manifest("id,path,label\nonly-two,fields\n");
        assert!(matches!(
            load_manifest(&path),
            Err(ManifestError::FieldCount { line: 2, got: 2 })
        ));

        let (_dir, path) = write_manifest("sample,file,gender\n");
        assert!(matches!(
            load_manifest(&path),
            Err(ManifestError::BadHeader { .. })
        ));
    }
}
