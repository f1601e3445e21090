//! Versioned text format for trained models.
//!
//! ```text
//! phogsvm v1
//! kernel rbf gamma 1.0240000000000000e3
//! bias 7.3105251279209733e-1
//! dim 1360
//! converged 1
//! nsv 2
//! <coef> <v1> ... <vn>
//! ...
//! ```
//!
//! Floats carry 17 significant digits, so every field survives a round trip
//! bit for bit.

use std::fs;
use std::path::{Path, PathBuf};

use phogsvm_core::svm::{KernelSpec, SvmModel};

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
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

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serialize a model to the text format.
pub fn render_model(model: &SvmModel) -> String {
    let mut out = String::from("phogsvm v1\n");
    match model.kernel {
        KernelSpec::Linear => out.push_str("kernel linear\n"),
        KernelSpec::Polynomial { degree, coef0 } => {
            out.push_str(&format!("kernel poly degree {degree} coef0 {}\n", fmt17(coef0)));
        }
        KernelSpec::Rbf { gamma } => {
            out.push_str(&format!("kernel rbf gamma {}\n", fmt17(gamma)));
        }
    }
    out.push_str(&format!("bias {}\n", fmt17(model.bias)));
    out.push_str(&format!("dim {}\n", model.feature_dim));
    out.push_str(&format!("converged {}\n", u8::from(model.converged)));
    out.push_str(&format!("nsv {}\n", model.support_vectors.len()));
    for (coef, sv) in model.coefficients.iter().zip(&model.support_vectors) {
        out.push_str(&fmt17(*coef));
        for v in sv {
            out.push(' ');
            out.push_str(&fmt17(*v));
        }
        out.push('\n');
    }
    out
}

pub fn save_model(model: &SvmModel, path: &Path) -> Result<(), ModelFileError> {
    fs::write(path, render_model(model)).map_err(|source| ModelFileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

struct LineReader<'a> {
    path: &'a Path,
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> LineReader<'a> {
    fn next_line(&mut self) -> Result<(usize, &'a str), ModelFileError> {
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| ModelFileError::Schema {
                path: self.path.to_path_buf(),
                line: 0,
                detail: "file truncated".into(),
            })
    }
}

fn schema(path: &Path, line: usize, detail: impl ToString) -> ModelFileError {
    ModelFileError::Schema {
        path: path.to_path_buf(),
        line,
        detail: detail.to_string(),
    }
}

fn parse_f64(path: &Path, line: usize, text: &str) -> Result<f64, ModelFileError> {
    text.parse::<f64>()
        .map_err(|_| schema(path, line, format!("bad float {text:?}")))
}

pub fn load_model(path: &Path) -> Result<SvmModel, ModelFileError> {
    let text = fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text, path)
}

/// Parse the text format; `path` only labels error messages.
pub fn parse_model(text: &str, path: &Path) -> Result<SvmModel, ModelFileError> {
    let mut reader = LineReader {
        path,
        lines: text.lines().enumerate(),
    };

    let (n, header) = reader.next_line()?;
    if header.trim() != "phogsvm v1" {
        return Err(schema(path, n, format!("bad header {header:?}")));
    }

    let (n, kernel_line) = reader.next_line()?;
    let fields: Vec<&str> = kernel_line.split_whitespace().collect();
    let kernel = match fields.as_slice() {
        ["kernel", "linear"] => KernelSpec::Linear,
        ["kernel", "poly", "degree", d, "coef0", c0] => {
            let degree = d
                .parse::<u32>()
                .map_err(|_| schema(path, n, format!("bad degree {d:?}")))?;
            KernelSpec::Polynomial {
                degree,
                coef0: parse_f64(path, n, c0)?,
            }
        }
        ["kernel", "rbf", "gamma", g] => KernelSpec::Rbf {
            gamma: parse_f64(path, n, g)?,
        },
        _ => return Err(schema(path, n, format!("bad kernel line {kernel_line:?}"))),
    };
    kernel
        .validate()
        .map_err(|e| schema(path, n, e.to_string()))?;

    let (n, bias_line) = reader.next_line()?;
    let bias = match bias_line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["bias", b] => parse_f64(path, n, b)?,
        _ => return Err(schema(path, n, format!("bad bias line {bias_line:?}"))),
    };

    let (n, dim_line) = reader.next_line()?;
    let feature_dim = match dim_line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["dim", d] => d
            .parse::<usize>()
            .map_err(|_| schema(path, n, format!("bad dim {d:?}")))?,
        _ => return Err(schema(path, n, format!("bad dim line {dim_line:?}"))),
    };
    if feature_dim == 0 {
        return Err(schema(path, n, "dim must be positive"));
    }

    let (n, conv_line) = reader.next_line()?;
    let converged = match conv_line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["converged", "1"] => true,
        ["converged", "0"] => false,
        _ => return Err(schema(path, n, format!("bad converged line {conv_line:?}"))),
    };

    let (n, nsv_line) = reader.next_line()?;
    let nsv = match nsv_line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["nsv", v] => v
            .parse::<usize>()
            .map_err(|_| schema(path, n, format!("bad nsv {v:?}")))?,
        _ => return Err(schema(path, n, format!("bad nsv line {nsv_line:?}"))),
    };

    let mut support_vectors = Vec::with_capacity(nsv);
    let mut coefficients = Vec::with_capacity(nsv);
    for _ in 0..nsv {
        let (n, row) = reader.next_line()?;
        let mut fields = row.split_whitespace();
        let coef = parse_f64(
            path,
            n,
            fields
                .next()
                .ok_or_else(|| schema(path, n, "empty support vector line"))?,
        )?;
        if coef == 0.0 {
            return Err(schema(path, n, "zero support vector coefficient"));
        }
        let values: Vec<f64> = fields
            .map(|f| parse_f64(path, n, f))
            .collect::<Result<_, _>>()?;
        if values.len() != feature_dim {
            return Err(schema(
                path,
                n,
                format!("support vector has {} values, dim says {feature_dim}", values.len()),
            ));
        }
        coefficients.push(coef);
        support_vectors.push(values);
    }

    Ok(SvmModel {
        support_vectors,
        coefficients,
        bias,
        kernel,
        feature_dim,
        converged,
    })
}
