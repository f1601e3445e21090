//! Built-in analytic checks runnable without any external data: known
//! filter responses, descriptor identities, closed-form trainer solutions
//! and format round trips, all against hand-computed values.

use std::path::Path;

use phogsvm_core::imaging::{
    self, convolve2d, gaussian_smooth, gaussian_taps, laplacian, resample_bicubic,
    sobel_gradients, GrayImage, Kernel2D,
};
use phogsvm_core::phog::{
    descriptor_length, edge_mask, gradient_magnitude, gradient_orientation,
    map_orientation_to_bin, phog_descriptor, AngleRange, PhogParams,
};
use phogsvm_core::pipeline::eval::recognition_rate;
use phogsvm_core::pipeline::split::stratified_split;
use phogsvm_core::pipeline::{FeatureSet, Preproc};
use phogsvm_core::svm::{
    self, decision_value, dual_objective, kernel_eval, train_smo, KernelSpec, TrainConfig,
};
use phogsvm_core::Label;

pub struct CheckOutcome {
    pub name: &'static str,
    pub error: Option<String>,
}

type Check = (&'static str, fn() -> Result<(), String>);

macro_rules! ensure {
    ($cond:expr, $($arg:tt)*) => {
        match $cond {
            true => {}
            false => return Err(format!($($arg)*)),
        }
    };
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn pgm_decode_scaling() -> Result<(), String> {
    let img = crate::formats::pgm::decode(b"P2\n2 2\n255\n0 255 255 0\n")
        .map_err(|e| e.to_string())?;
    ensure!(img.pixels() == [0.0, 1.0, 1.0, 0.0], "2x2 decode mismatch");
    let img = crate::formats::pgm::decode(b"P2\n1 1\n255\n128\n").map_err(|e| e.to_string())?;
    ensure!(
        near(img.get(0, 0), 128.0 / 255.0, 1e-15),
        "1x1 decode {} != 128/255",
        img.get(0, 0)
    );
    Ok(())
}

fn identity_convolution() -> Result<(), String> {
    let img = GrayImage::from_fn(5, 4, |x, y| (x + 3 * y) as f64 / 20.0).unwrap();
    let id = Kernel2D::new(0, 0, vec![1.0]).unwrap();
    let out = convolve2d(&img, &id).map_err(|e| e.to_string())?;
    ensure!(out == img, "identity kernel changed the image");
    Ok(())
}

fn constant_convolution_gain() -> Result<(), String> {
    let img = GrayImage::constant(6, 6, 0.5).unwrap();
    let k = Kernel2D::new(1, 1, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]).unwrap();
    let out = convolve2d(&img, &k).map_err(|e| e.to_string())?;
    for p in out.pixels() {
        ensure!(near(*p, 0.5 * 4.5, 1e-12), "gain {p} != 2.25");
    }
    Ok(())
}

fn gaussian_radius_and_dc() -> Result<(), String> {
    ensure!(gaussian_taps(1.0).len() == 7, "sigma 1 should give 7 taps");
    let img = GrayImage::constant(9, 9, 0.7).unwrap();
    for p in gaussian_smooth(&img, 1.0).pixels() {
        ensure!(near(*p, 0.7, 1e-12), "dc drift {p}");
    }
    Ok(())
}

fn laplacian_identities() -> Result<(), String> {
    let flat = GrayImage::constant(5, 5, 0.9).unwrap();
    for p in laplacian(&flat).pixels() {
        ensure!(near(*p, 0.0, 1e-12), "constant response {p}");
    }
    let impulse =
        GrayImage::from_fn(5, 5, |x, y| if (x, y) == (2, 2) { 1.0 } else { 0.0 }).unwrap();
    let out = laplacian(&impulse);
    ensure!(near(out.get(2, 2), -4.0, 1e-12), "center {}", out.get(2, 2));
    for (x, y) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
        ensure!(near(out.get(x, y), 1.0, 1e-12), "neighbor ({x},{y})");
    }
    let ramp = GrayImage::from_fn(8, 8, |x, _| x as f64).unwrap();
    let out = laplacian(&ramp);
    for y in 1..7 {
        for x in 1..7 {
            ensure!(near(out.get(x, y), 0.0, 1e-12), "ramp interior ({x},{y})");
        }
    }
    Ok(())
}

fn sobel_step_edge() -> Result<(), String> {
    let img = GrayImage::from_fn(8, 8, |x, _| if x < 4 { 0.0 } else { 1.0 }).unwrap();
    let (gx, gy) = sobel_gradients(&img);
    for y in 1..7 {
        ensure!(near(gx.get(3, y), 4.0, 1e-12), "gx at step {}", gx.get(3, y));
        ensure!(near(gx.get(4, y), 4.0, 1e-12), "gx at step {}", gx.get(4, y));
        for x in 1..7 {
            ensure!(near(gy.get(x, y), 0.0, 1e-12), "gy interior ({x},{y})");
        }
    }
    Ok(())
}

fn bicubic_identities() -> Result<(), String> {
    let img = GrayImage::constant(4, 3, 0.37).unwrap();
    let out = resample_bicubic(&img, 10, 7);
    ensure!(
        out.width() == 10 && out.height() == 7,
        "bad output dimensions"
    );
    for p in out.pixels() {
        ensure!(near(*p, 0.37, 1e-12), "dc drift {p}");
    }
    let big = resample_bicubic(&GrayImage::constant(64, 64, 0.2).unwrap(), 300, 300);
    ensure!(big.width() == 300 && big.height() == 300, "not 300x300");
    Ok(())
}

fn descriptor_length_table() -> Result<(), String> {
    for (l, h, want) in [(2, 8, 168), (2, 16, 336), (3, 8, 680), (3, 16, 1360), (0, 8, 8)] {
        let got = descriptor_length(l, h);
        ensure!(got == want, "length({l},{h}) = {got}, want {want}");
    }
    Ok(())
}

fn gradient_field_identities() -> Result<(), String> {
    let three = GrayImage::constant(1, 1, 3.0).unwrap();
    let four = GrayImage::constant(1, 1, 4.0).unwrap();
    let zero = GrayImage::constant(1, 1, 0.0).unwrap();
    let one = GrayImage::constant(1, 1, 1.0).unwrap();
    let neg = GrayImage::constant(1, 1, -1.0).unwrap();
    let mag = gradient_magnitude(&three, &four).map_err(|e| e.to_string())?;
    ensure!(mag.get(0, 0) == 5.0, "3-4-5 magnitude {}", mag.get(0, 0));
    let theta = gradient_orientation(&one, &zero, AngleRange::Deg360).map_err(|e| e.to_string())?;
    ensure!(theta.get(0, 0) == 0.0, "+x orientation {}", theta.get(0, 0));
    let theta = gradient_orientation(&zero, &one, AngleRange::Deg360).map_err(|e| e.to_string())?;
    ensure!(theta.get(0, 0) == 90.0, "+y orientation {}", theta.get(0, 0));
    let theta = gradient_orientation(&neg, &zero, AngleRange::Deg180).map_err(|e| e.to_string())?;
    ensure!(theta.get(0, 0) == 0.0, "mod-180 wrap {}", theta.get(0, 0));
    ensure!(map_orientation_to_bin(0.0, AngleRange::Deg360, 8) == 0, "bin of 0");
    ensure!(map_orientation_to_bin(90.0, AngleRange::Deg360, 8) == 2, "bin of 90");
    ensure!(
        map_orientation_to_bin(359.9, AngleRange::Deg360, 8) == 7,
        "boundary clamp"
    );
    Ok(())
}

fn edge_mask_thresholds() -> Result<(), String> {
    let flat = laplacian(&GrayImage::constant(4, 4, 1.0).unwrap());
    ensure!(edge_mask(&flat, 0.5).count() == 0, "constant mask not empty");
    let impulse =
        GrayImage::from_fn(5, 5, |x, y| if (x, y) == (2, 2) { 1.0 } else { 0.0 }).unwrap();
    let lap = laplacian(&impulse);
    let mask = edge_mask(&lap, 0.5);
    ensure!(mask.count() == 1 && mask.get(2, 2), "impulse mask wrong");
    let bumpy = GrayImage::from_fn(4, 4, |x, y| ((x + 2 * y) % 3) as f64).unwrap();
    ensure!(
        edge_mask(&laplacian(&bumpy), 0.0).count() == 16,
        "zero threshold should flag all"
    );
    Ok(())
}

fn descriptor_identities() -> Result<(), String> {
    let flat = GrayImage::constant(16, 16, 0.42).unwrap();
    let params = PhogParams::new(2, 8, AngleRange::Deg360, 0.1).unwrap();
    let d = phog_descriptor(&flat, &params).map_err(|e| e.to_string())?;
    ensure!(d.values.len() == 168, "constant descriptor length");
    ensure!(d.values.iter().all(|v| *v == 0.0), "constant not all-zero");

    let step = GrayImage::from_fn(16, 16, |x, _| if x < 8 { 0.0 } else { 1.0 }).unwrap();
    let params = PhogParams::new(1, 8, AngleRange::Deg360, 0.0).unwrap();
    let d = phog_descriptor(&step, &params).map_err(|e| e.to_string())?;
    let sum: f64 = d.values.iter().sum();
    ensure!(near(sum, 1.0, 1e-9), "normalization sum {sum}");
    ensure!(d.values[0] > 0.0, "level-0 horizontal bin empty");
    ensure!(
        d.values[1..8].iter().all(|v| *v == 0.0),
        "level-0 mass outside horizontal bin"
    );
    Ok(())
}

fn kernel_values() -> Result<(), String> {
    let lin = kernel_eval(&KernelSpec::Linear, &[1.0, 2.0], &[3.0, 4.0]).map_err(|e| e.to_string())?;
    ensure!(lin == 11.0, "linear {lin}");
    let rbf = kernel_eval(&KernelSpec::Rbf { gamma: 7.0 }, &[0.5, -2.0], &[0.5, -2.0])
        .map_err(|e| e.to_string())?;
    ensure!(rbf == 1.0, "rbf self {rbf}");
    let poly = kernel_eval(
        &KernelSpec::Polynomial {
            degree: 2,
            coef0: 1.0,
        },
        &[1.0, 0.0],
        &[1.0, 0.0],
    )
    .map_err(|e| e.to_string())?;
    ensure!(poly == 4.0, "poly {poly}");
    Ok(())
}

fn two_point_closed_form() -> Result<(), String> {
    let features = vec![vec![0.0], vec![2.0]];
    let labels = vec![Label::Positive, Label::Negative];
    let cfg = TrainConfig {
        c: 10.0,
        tol: 1e-9,
        ..TrainConfig::default()
    };
    let m = train_smo(&features, &labels, &KernelSpec::Linear, &cfg).map_err(|e| e.to_string())?;
    ensure!(near(m.coefficients[0], 0.5, 1e-6), "alpha1 {}", m.coefficients[0]);
    ensure!(near(m.coefficients[1], -0.5, 1e-6), "alpha2 {}", m.coefficients[1]);
    ensure!(near(m.bias, 1.0, 1e-6), "bias {}", m.bias);
    let at_boundary = decision_value(&m, &[1.0]).map_err(|e| e.to_string())?;
    ensure!(near(at_boundary, 0.0, 1e-6), "f(1) = {at_boundary}");
    let at_margin = decision_value(&m, &[0.0]).map_err(|e| e.to_string())?;
    ensure!(near(at_margin, 1.0, 1e-6), "f(0) = {at_margin}");
    let alphas = svm::alphas_for(&m, &features);
    let obj = dual_objective(&alphas, &labels, &features, &KernelSpec::Linear)
        .map_err(|e| e.to_string())?;
    ensure!(near(obj, 0.5, 1e-9), "dual objective {obj}");
    Ok(())
}

fn xor_trains_clean() -> Result<(), String> {
    let features = vec![
        vec![0.0, 0.0],
        vec![1.0, 1.0],
        vec![0.0, 1.0],
        vec![1.0, 0.0],
    ];
    let labels = vec![
        Label::Positive,
        Label::Positive,
        Label::Negative,
        Label::Negative,
    ];
    let cfg = TrainConfig {
        c: 100.0,
        tol: 1e-6,
        ..TrainConfig::default()
    };
    let m = train_smo(&features, &labels, &KernelSpec::Rbf { gamma: 1.0 }, &cfg)
        .map_err(|e| e.to_string())?;
    for (x, want) in features.iter().zip(&labels) {
        let got = svm::predict(&m, x).map_err(|e| e.to_string())?;
        ensure!(got == *want, "xor point {x:?} predicted {got:?}");
    }
    Ok(())
}

fn recognition_arithmetic() -> Result<(), String> {
    use Label::{Negative as N, Positive as P};
    let truth = [P, P, P, P, P, N, N, N, N, N];
    let preds = [P, P, P, P, P, P, N, N, N, P];
    let report = recognition_rate(&preds, &truth).map_err(|e| e.to_string())?;
    ensure!(report.true_pos == 5 && report.true_neg == 3, "confusion counts");
    ensure!(report.recognition_rate == 0.8, "rate {}", report.recognition_rate);
    let perfect = recognition_rate(&truth, &truth).map_err(|e| e.to_string())?;
    ensure!(perfect.recognition_rate == 1.0, "perfect rate");
    let flipped: Vec<Label> = truth.iter().map(|l| l.flipped()).collect();
    let zero = recognition_rate(&flipped, &truth).map_err(|e| e.to_string())?;
    ensure!(zero.recognition_rate == 0.0, "inverted rate");
    Ok(())
}

fn split_determinism() -> Result<(), String> {
    let fs = FeatureSet {
        ids: (0..9).map(|i| format!("s{i}")).collect(),
        features: (0..9).map(|i| vec![i as f64]).collect(),
        labels: (0..9)
            .map(|i| if i < 5 { Label::Positive } else { Label::Negative })
            .collect(),
        params: PhogParams::default(),
        preproc: Preproc::default(),
        options: Default::default(),
    };
    let (train_a, test_a) = stratified_split(&fs, 11).map_err(|e| e.to_string())?;
    let (train_b, _) = stratified_split(&fs, 11).map_err(|e| e.to_string())?;
    ensure!(train_a.ids == train_b.ids, "same seed, different partition");
    ensure!(train_a.class_counts() == (3, 2), "train counts {:?}", train_a.class_counts());
    ensure!(test_a.class_counts() == (2, 2), "test counts {:?}", test_a.class_counts());
    Ok(())
}

fn model_text_round_trip() -> Result<(), String> {
    let m = train_smo(
        &[vec![0.0], vec![2.0]],
        &[Label::Positive, Label::Negative],
        &KernelSpec::Rbf { gamma: 1024.0 },
        &TrainConfig::new(10.0),
    )
    .map_err(|e| e.to_string())?;
    let text = crate::model_file::render_model(&m);
    let back = crate::model_file::parse_model(&text, Path::new("<selftest>"))
        .map_err(|e| e.to_string())?;
    ensure!(back == m, "model text round trip not exact");
    Ok(())
}

fn feature_text_round_trip() -> Result<(), String> {
    let img = GrayImage::from_fn(16, 16, |x, y| ((x * 7 + y * 3) % 5) as f64 / 4.0).unwrap();
    let params = PhogParams::new(1, 8, AngleRange::Deg360, 0.1).unwrap();
    let d = phog_descriptor(&img, &params).map_err(|e| e.to_string())?;
    let fs = FeatureSet {
        ids: vec!["probe".into()],
        features: vec![d.values],
        labels: vec![Label::Negative],
        params,
        preproc: Preproc {
            resample_w: 16,
            resample_h: 16,
            sigma: 1.0,
        },
        options: Default::default(),
    };
    let text = crate::features::render_features(&fs);
    let back = crate::features::parse_features(&text, Path::new("<selftest>"))
        .map_err(|e| e.to_string())?;
    ensure!(back == fs, "feature text round trip not exact");
    Ok(())
}

fn preprocessing_composes() -> Result<(), String> {
    let img = GrayImage::constant(32, 32, 0.6).unwrap();
    let out = imaging::gaussian_smooth(&imaging::resample_bicubic(&img, 300, 300), 1.0);
    ensure!(out.width() == 300 && out.height() == 300, "pipeline dims");
    for p in out.pixels() {
        ensure!(near(*p, 0.6, 1e-12), "pipeline dc {p}");
    }
    Ok(())
}

const CHECKS: &[Check] = &[
    ("pgm decode scaling", pgm_decode_scaling),
    ("identity convolution", identity_convolution),
    ("constant convolution gain", constant_convolution_gain),
    ("gaussian radius and dc", gaussian_radius_and_dc),
    ("laplacian identities", laplacian_identities),
    ("sobel step edge", sobel_step_edge),
    ("bicubic identities", bicubic_identities),
    ("descriptor length table", descriptor_length_table),
    ("gradient field identities", gradient_field_identities),
    ("edge mask thresholds", edge_mask_thresholds),
    ("descriptor identities", descriptor_identities),
    ("kernel values", kernel_values),
    ("two-point closed form", two_point_closed_form),
    ("xor trains clean", xor_trains_clean),
    ("recognition arithmetic", recognition_arithmetic),
    ("split determinism", split_determinism),
    ("model text round trip", model_text_round_trip),
    ("feature text round trip", feature_text_round_trip),
    ("preprocessing composes", preprocessing_composes),
];

/// Run every built-in check.
pub fn run_all() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, check)| CheckOutcome {
            name,
            error: check().err(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_check_passes() {
        for outcome in run_all() {
            assert!(
                outcome.error.is_none(),
                "{}: {}",
                outcome.name,
                outcome.error.unwrap()
            );
        }
    }
}
