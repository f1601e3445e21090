//! Descriptor extraction over a dataset, and the feature file that caches
//! the result: a parameter header line, then one `id,label,v1,...,vn` row
//! per sample.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use phogsvm_core::imaging::{self, LaplacianStencil};
use phogsvm_core::phog::{
    self, AngleRange, GradientSource, PhogError, PhogOptions, PhogParams,
};
use phogsvm_core::pipeline::{FeatureSet, Preproc};
use phogsvm_core::Label;

use crate::formats::{self, LoadError};
use crate::manifest::Dataset;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("sample {id}: {source}")]
    Load { id: String, source: LoadError },
    #[error("sample {id}: {source}")]
    Descriptor { id: String, source: PhogError },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: line {line}: {detail}", path.display())]
    Schema {
        path: PathBuf,
        line: usize,
        detail: String,
    },
}

/// Run one image through the preprocessing and descriptor pipeline.
pub fn describe_image(
    img: &phogsvm_core::imaging::GrayImage,
    params: &PhogParams,
    preproc: &Preproc,
    opts: &PhogOptions,
) -> Result<Vec<f64>, PhogError> {
    let resampled = imaging::resample_bicubic(img, preproc.resample_w, preproc.resample_h);
    let smoothed = imaging::gaussian_smooth(&resampled, preproc.sigma);
    Ok(phog::phog_descriptor_with(&smoothed, params, opts)?.values)
}

/// Extract descriptors for every sample, in manifest order. Samples are
/// processed in parallel; the first failing sample (by manifest order) is
/// reported.
pub fn extract_features(
    dataset: &Dataset,
    params: &PhogParams,
    preproc: &Preproc,
    opts: &PhogOptions,
) -> Result<FeatureSet, FeatureError> {
    let rows: Vec<Result<Vec<f64>, FeatureError>> = dataset
        .samples
        .par_iter()
        .map(|sample| {
            let img = formats::load_image(&sample.path).map_err(|source| FeatureError::Load {
                id: sample.id.clone(),
                source,
            })?;
            describe_image(&img, params, preproc, opts).map_err(|source| {
                FeatureError::Descriptor {
                    id: sample.id.clone(),
                    source,
                }
            })
        })
        .collect();

    let mut features = Vec::with_capacity(rows.len());
    for row in rows {
        features.push(row?);
    }

    Ok(FeatureSet {
        ids: dataset.samples.iter().map(|s| s.id.clone()).collect(),
        features,
        labels: dataset.samples.iter().map(|s| s.label).collect(),
        params: params.clone(),
        preproc: preproc.clone(),
        options: opts.clone(),
    })
}

fn angle_code(a: AngleRange) -> u32 {
    a.degrees() as u32
}

fn header_line(fs: &FeatureSet) -> String {
    format!(
        "phogfeat v1 L={} H={} A={} t={} resample={}x{} sigma={} grad={} lap={} norm={}",
        fs.params.levels,
        fs.params.bins,
        angle_code(fs.params.angle_range),
        fs.params.edge_threshold_frac,
        fs.preproc.resample_w,
        fs.preproc.resample_h,
        fs.preproc.sigma,
        match fs.options.grad_source {
            GradientSource::Image => "image",
            GradientSource::Laplacian => "laplacian",
        },
        match fs.options.stencil {
            LaplacianStencil::FourConnected => 4,
            LaplacianStencil::EightConnected => 8,
        },
        u8::from(fs.options.normalize),
    )
}

/// Serialize to the feature file format: header, then `id,label,v...` per
/// sample with round-trip-exact decimal floats.
pub fn render_features(fs: &FeatureSet) -> String {
    let mut out = String::new();
    out.push_str(&header_line(fs));
    out.push('\n');
    for ((id, label), values) in fs.ids.iter().zip(&fs.labels).zip(&fs.features) {
        out.push_str(id);
        out.push(',');
        out.push_str(&label.to_string());
        for v in values {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_features(fs: &FeatureSet, path: &Path) -> Result<(), FeatureError> {
    fs::write(path, render_features(fs)).map_err(|source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn schema_err(path: &Path, line: usize, detail: impl ToString) -> FeatureError {
    FeatureError::Schema {
        path: path.to_path_buf(),
        line,
        detail: detail.to_string(),
    }
}

fn parse_header(path: &Path, line: &str) -> Result<(PhogParams, Preproc, PhogOptions), FeatureError> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some("phogfeat") || tokens.next() != Some("v1") {
        return Err(schema_err(path, 1, "expected `phogfeat v1` header"));
    }
    let mut levels = None;
    let mut bins = None;
    let mut angle = None;
    let mut thresh = None;
    let mut resample = None;
    let mut sigma = None;
    let mut grad = GradientSource::Image;
    let mut lap = LaplacianStencil::FourConnected;
    let mut norm = true;
    for token in tokens {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| schema_err(path, 1, format!("malformed header token {token:?}")))?;
        let bad = || schema_err(path, 1, format!("bad value for {key}: {value:?}"));
        match key {
            "L" => levels = Some(value.parse::<u32>().map_err(|_| bad())?),
            "H" => bins = Some(value.parse::<usize>().map_err(|_| bad())?),
            "A" => {
                angle = Some(match value {
                    "180" => AngleRange::Deg180,
                    "360" => AngleRange::Deg360,
                    _ => return Err(bad()),
                })
            }
            "t" => thresh = Some(value.parse::<f64>().map_err(|_| bad())?),
            "resample" => {
                let (w, h) = value.split_once('x').ok_or_else(bad)?;
                resample = Some((
                    w.parse::<usize>().map_err(|_| bad())?,
                    h.parse::<usize>().map_err(|_| bad())?,
                ));
            }
            "sigma" => sigma = Some(value.parse::<f64>().map_err(|_| bad())?),
            "grad" => {
                grad = match value {
                    "image" => GradientSource::Image,
                    "laplacian" => GradientSource::Laplacian,
                    _ => return Err(bad()),
                }
            }
            "lap" => {
                lap = match value {
                    "4" => LaplacianStencil::FourConnected,
                    "8" => LaplacianStencil::EightConnected,
                    _ => return Err(bad()),
                }
            }
            "norm" => {
                norm = match value {
                    "1" => true,
                    "0" => false,
                    _ => return Err(bad()),
                }
            }
            _ => return Err(schema_err(path, 1, format!("unknown header key {key:?}"))),
        }
    }
    let missing = |what: &str| schema_err(path, 1, format!("header missing {what}"));
    let params = PhogParams::new(
        levels.ok_or_else(|| missing("L"))?,
        bins.ok_or_else(|| missing("H"))?,
        angle.ok_or_else(|| missing("A"))?,
        thresh.ok_or_else(|| missing("t"))?,
    )
    .map_err(|e| schema_err(path, 1, e))?;
    let (resample_w, resample_h) = resample.ok_or_else(|| missing("resample"))?;
    let preproc = Preproc {
        resample_w,
        resample_h,
        sigma: sigma.ok_or_else(|| missing("sigma"))?,
    };
    let options = PhogOptions {
        grad_source: grad,
        stencil: lap,
        normalize: norm,
    };
    Ok((params, preproc, options))
}

/// Read a feature file back, validating the header and row shapes.
pub fn read_features(path: &Path) -> Result<FeatureSet, FeatureError> {
    let text = fs::read_to_string(path).map_err(|source| FeatureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_features(&text, path)
}

/// Parse the feature file format; `path` only labels error messages.
pub fn parse_features(text: &str, path: &Path) -> Result<FeatureSet, FeatureError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| schema_err(path, 1, "empty file"))?;
    let (params, preproc, options) = parse_header(path, header)?;
    let expected_len = params.descriptor_length();

    let mut ids = Vec::new();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut fields = raw.split(',');
        let id = fields
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| schema_err(path, line, "missing id"))?;
        let label = match fields.next() {
            Some("+1") | Some("1") => Label::Positive,
            Some("-1") => Label::Negative,
            other => {
                return Err(schema_err(
                    path,
                    line,
                    format!("bad label field {other:?}"),
                ))
            }
        };
        let values: Vec<f64> = fields
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| schema_err(path, line, format!("bad value: {e}")))?;
        if values.len() != expected_len {
            return Err(schema_err(
                path,
                line,
                format!("{} values, header implies {expected_len}", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(schema_err(path, line, "non-finite value"));
        }
        ids.push(id.to_owned());
        features.push(values);
        labels.push(label);
    }

    Ok(FeatureSet {
        ids,
        features,
        labels,
        params,
        preproc,
        options,
    })
}

/// Cache file name derived from the manifest content hash and every
/// parameter that shapes the descriptors.
pub fn cache_file_name(
    manifest_bytes: &[u8],
    params: &PhogParams,
    preproc: &Preproc,
    opts: &PhogOptions,
) -> String {
    let mut hasher = DefaultHasher::new();
    hasher.write(manifest_bytes);
    format!(
        "phogfeat-{:016x}-L{}H{}A{}t{}-{}x{}-s{}-{}-lap{}-n{}.csv",
        hasher.finish(),
        params.levels,
        params.bins,
        angle_code(params.angle_range),
        params.edge_threshold_frac,
        preproc.resample_w,
        preproc.resample_h,
        preproc.sigma,
        match opts.grad_source {
            GradientSource::Image => "image",
            GradientSource::Laplacian => "laplacian",
        },
        match opts.stencil {
            LaplacianStencil::FourConnected => 4,
            LaplacianStencil::EightConnected => 8,
        },
        u8::from(opts.normalize),
    )
}

/// Extract with a file cache keyed on (manifest content, parameters).
/// Returns the feature set, the cache path, and whether it was a hit.
pub fn extract_features_cached(
    manifest_path: &Path,
    dataset: &Dataset,
    params: &PhogParams,
    preproc: &Preproc,
    opts: &PhogOptions,
    cache_dir: &Path,
) -> Result<(FeatureSet, PathBuf, bool), FeatureError> {
    let manifest_bytes = fs::read(manifest_path).map_err(|source| FeatureError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let cache_path = cache_dir.join(cache_file_name(&manifest_bytes, params, preproc, opts));
    if cache_path.is_file() {
        let fs = read_features(&cache_path)?;
        return Ok((fs, cache_path, true));
    }
    let fs = extract_features(dataset, params, preproc, opts)?;
    std::fs::create_dir_all(cache_dir).map_err(|source| FeatureError::Io {
        path: cache_dir.to_path_buf(),
        source,
    })?;
    write_features(&fs, &cache_path)?;
    Ok((fs, cache_path, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use phogsvm_core::imaging::GrayImage;

    fn tiny_set() -> FeatureSet {
        FeatureSet {
            ids: vec!["a".into(), "b".into()],
            features: vec![vec![0.25, 0.5], vec![0.125, 1.0 / 3.0]],
            labels: vec![Label::Positive, Label::Negative],
            params: PhogParams::new(0, 2, AngleRange::Deg360, 0.1).unwrap(),
            preproc: Preproc {
                resample_w: 8,
                resample_h: 8,
                sigma: 0.5,
            },
            options: PhogOptions::standard(),
        }
    }

    #[test]
    fn feature_file_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        let fs = tiny_set();
        write_features(&fs, &path).unwrap();
        let back = read_features(&path).unwrap();
        assert_eq!(back, fs);
    }

    #[test]
    fn row_length_must_match_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        fs::write(
            &path,
            "phogfeat v1 L=0 H=2 A=360 t=0.1 resample=8x8 sigma=0.5 grad=image lap=4 norm=1\na,+1,0.5\n",
        )
        .unwrap();
        assert!(matches!(
            read_features(&path),
            Err(FeatureError::Schema { line: 2, .. })
        ));
    }

    #[test]
    fn header_must_parse() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        fs::write(&path, "phogfeat v2 nonsense\n").unwrap();
        assert!(matches!(
            read_features(&path),
            Err(FeatureError::Schema { line: 1, .. })
        ));
    }

    #[test]
    fn constant_images_give_zero_descriptors() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["flat1.pgm", "flat2.pgm"] {
            fs::write(dir.path().join(name), b"P2\n4 4\n255\n7 7 7 7 7 7 7 7 7 7 7 7 7 7 7 7\n")
                .unwrap();
        }
        let manifest = dir.path().join("m.csv");
        fs::write(
            &manifest,
            "id,path,label\nf1,flat1.pgm,male\nf2,flat2.pgm,female\n",
        )
        .unwrap();
        let ds = crate::manifest::load_manifest(&manifest).unwrap();
        let params = PhogParams::new(1, 4, AngleRange::Deg360, 0.1).unwrap();
        let preproc = Preproc {
            resample_w: 8,
            resample_h: 8,
            sigma: 1.0,
        };
        let fs = extract_features(&ds, &params, &preproc, &PhogOptions::standard()).unwrap();
        assert_eq!(fs.len(), 2);
        for row in &fs.features {
            assert_eq!(row.len(), 20);
            assert!(row.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn extraction_is_deterministic_and_order_preserving() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..4 {
            let img = GrayImage::from_fn(8, 8, |x, y| {
                (((x * 31 + y * 17 + i * 13) % 11) as f64) / 10.0
            })
            .unwrap();
            let mut txt = String::from("P2\n8 8\n255\n");
            for p in img.pixels() {
                txt.push_str(&format!("{} ", (p * 255.0).round() as u32));
            }
            fs::write(dir.path().join(format!("img{i}.pgm")), txt).unwrap();
        }
        let manifest = dir.path().join("m.csv");
        fs::write(
            &manifest,
            "id,path,label\ns0,img0.pgm,male\ns1,img1.pgm,female\ns2,img2.pgm,male\ns3,img3.pgm,female\n",
        )
        .unwrap();
        let ds = crate::manifest::load_manifest(&manifest).unwrap();
        let params = PhogParams::new(1, 8, AngleRange::Deg360, 0.1).unwrap();
        let preproc = Preproc {
            resample_w: 16,
            resample_h: 16,
            sigma: 1.0,
        };
        let a = extract_features(&ds, &params, &preproc, &PhogOptions::standard()).unwrap();
        let b = extract_features(&ds, &params, &preproc, &PhogOptions::standard()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ids, vec!["s0", "s1", "s2", "s3"]);
    }

    #[test]
    fn cache_hits_after_first_extraction() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("i.pgm"), b"P2\n4 4\n255\n0 9 0 9 9 0 9 0 0 9 0 9 9 0 9 0\n")
            .unwrap();
        fs::write(dir.path().join("j.pgm"), b"P2\n4 4\n255\n1 2 3 4 5 6 7 8 9 8 7 6 5 4 3 2\n")
            .unwrap();
        let manifest = dir.path().join("m.csv");
        fs::write(&manifest, "id,path,label\ni,i.pgm,male\nj,j.pgm,female\n").unwrap();
        let ds = crate::manifest::load_manifest(&manifest).unwrap();
        let params = PhogParams::new(1, 4, AngleRange::Deg360, 0.1).unwrap();
        let preproc = Preproc {
            resample_w: 8,
            resample_h: 8,
            sigma: 1.0,
        };
        let cache = dir.path().join("cache");
        let (first, path1, hit1) = extract_features_cached(
            &manifest,
            &ds,
            &params,
            &preproc,
            &PhogOptions::standard(),
            &cache,
        )
        .unwrap();
        assert!(!hit1);
        let (second, path2, hit2) = extract_features_cached(
            &manifest,
            &ds,
            &params,
            &preproc,
            &PhogOptions::standard(),
            &cache,
        )
        .unwrap();
        assert!(hit2);
        assert_eq!(path1, path2);
        assert_eq!(first, second);
    }
}
