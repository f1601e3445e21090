//! Soft-margin binary SVM trained by sequential minimal optimization.
//!
//! The trainer solves the dual problem
//!
//! ```text
//! maximize   sum(alpha) - 1/2 * sum_ij alpha_i alpha_j y_i y_j K(x_i, x_j)
//! subject to 0 <= alpha_i <= C,   sum_i y_i alpha_i = 0
//! ```
//!
//! by repeatedly optimizing the maximal-violating pair of multipliers in
//! closed form. Optimality is tracked through the bias bounds `b_up`/`b_low`;
//! the solver stops once every sample satisfies its KKT condition within the
//! configured tolerance.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::label::Label;
use crate::math;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SvmError {
    #[error("vector has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set contains a single class")]
    SingleClass,
    #[error("non-finite feature value in sample {sample}")]
    NonFiniteFeature { sample: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// Kernel function choice with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    Polynomial { degree: u32, coef0: f64 },
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<(), SvmError> {
        match self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree, coef0 } => {
                if *degree < 1 {
                    Err(SvmError::InvalidConfig("polynomial degree must be >= 1"))
                } else if !math::is_finite(*coef0) {
                    Err(SvmError::InvalidConfig("polynomial coef0 must be finite"))
                } else {
                    Ok(())
                }
            }
            KernelSpec::Rbf { gamma } => {
                if *gamma > 0.0 && math::is_finite(*gamma) {
                    Ok(())
                } else {
                    Err(SvmError::InvalidConfig("rbf gamma must be positive"))
                }
            }
        }
    }
}

/// Evaluate the kernel on two vectors of equal dimension.
pub fn kernel_eval(k: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, SvmError> {
    if x.len() != y.len() {
        return Err(SvmError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(eval_unchecked(k, x, y))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

fn eval_unchecked(k: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    match k {
        KernelSpec::Linear => dot(x, y),
        KernelSpec::Polynomial { degree, coef0 } => math::powi(dot(x, y) + coef0, *degree),
        KernelSpec::Rbf { gamma } => math::exp(-gamma * sq_dist(x, y)),
    }
}

/// Solver configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Soft-margin cost.
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    /// Sweep budget: the solver performs at most `max_passes * n` pair
    /// optimizations. `None` uses 10 sweeps per sample (`10 * n`).
    pub max_passes: Option<usize>,
    /// Seed for the working-pair tie-break.
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(c: f64) -> Self {
        TrainConfig {
            c,
            ..TrainConfig::default()
        }
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            tol: 1e-3,
            max_passes: None,
            seed: 0,
        }
    }
}

/// A trained classifier: the kernel expansion over its support vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// Training samples with nonzero multipliers.
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` for each support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub feature_dim: usize,
    /// False when the sweep budget ran out before the KKT gap closed; the
    /// model still holds the best multipliers found.
    pub converged: bool,
}

/// `f(x) = sum_i coef_i K(sv_i, x) + b`.
pub fn decision_value(m: &SvmModel, x: &[f64]) -> Result<f64, SvmError> {
    if x.len() != m.feature_dim {
        return Err(SvmError::DimensionMismatch {
            expected: m.feature_dim,
            got: x.len(),
        });
    }
    let mut acc = m.bias;
    for (sv, coef) in m.support_vectors.iter().zip(&m.coefficients) {
        acc += coef * eval_unchecked(&m.kernel, sv, x);
    }
    Ok(acc)
}

/// Sign of the decision value; exactly zero classifies as `Positive`.
pub fn predict(m: &SvmModel, x: &[f64]) -> Result<Label, SvmError> {
    Ok(Label::from_decision(decision_value(m, x)?))
}

/// Dual objective `sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`.
pub fn dual_objective(
    alphas: &[f64],
    labels: &[Label],
    features: &[Vec<f64>],
    kernel: &KernelSpec,
) -> Result<f64, SvmError> {
    if alphas.len() != features.len() || labels.len() != features.len() {
        return Err(SvmError::LengthMismatch {
            features: features.len(),
            labels: labels.len().min(alphas.len()),
        });
    }
    let mut quad = 0.0;
    for i in 0..alphas.len() {
        for j in 0..alphas.len() {
            if alphas[i] == 0.0 || alphas[j] == 0.0 {
                continue;
            }
            quad += alphas[i]
                * alphas[j]
                * labels[i].sign()
                * labels[j].sign()
                * eval_unchecked(kernel, &features[i], &features[j]);
        }
    }
    Ok(alphas.iter().sum::<f64>() - 0.5 * quad)
}

/// Sample is eligible to push the decision boundary up: `y=+1` below the box
/// top, or `y=-1` above the box bottom.
#[inline]
fn in_up_set(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha < c) || (y < 0.0 && alpha > 0.0)
}

#[inline]
fn in_low_set(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha > 0.0) || (y < 0.0 && alpha < c)
}

/// Argmin/argmax of `f` over the indices passing `member`, breaking exact
/// ties uniformly at random.
fn select_extreme(
    f: &[f64],
    member: impl Fn(usize) -> bool,
    take_max: bool,
    rng: &mut ChaCha8Rng,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut ties = 1u32;
    for (i, &fi) in f.iter().enumerate() {
        if !member(i) {
            continue;
        }
        match best {
            None => {
                best = Some((i, fi));
                ties = 1;
            }
            Some((_, bv)) => {
                let better = if take_max { fi > bv } else { fi < bv };
                if better {
                    best = Some((i, fi));
                    ties = 1;
                } else if fi == bv {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        best = Some((i, fi));
                    }
                }
            }
        }
    }
    best
}

/// Train a soft-margin SVM on `{+1,-1}`-labeled feature vectors.
pub fn train_smo(
    features: &[Vec<f64>],
    labels: &[Label],
    kernel: &KernelSpec,
    cfg: &TrainConfig,
) -> Result<SvmModel, SvmError> {
    if features.is_empty() {
        return Err(SvmError::EmptyTrainingSet);
    }
    if features.len() != labels.len() {
        return Err(SvmError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    if !math::is_finite(cfg.c) || cfg.c <= 0.0 {
        return Err(SvmError::InvalidConfig("C must be positive"));
    }
    if !math::is_finite(cfg.tol) || cfg.tol <= 0.0 {
        return Err(SvmError::InvalidConfig("tol must be positive"));
    }
    kernel.validate()?;

    let dim = features[0].len();
    for (i, x) in features.iter().enumerate() {
        if x.len() != dim {
            return Err(SvmError::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !math::is_finite(*v)) {
            return Err(SvmError::NonFiniteFeature { sample: i });
        }
    }
    if labels.iter().all(|l| *l == labels[0]) {
        return Err(SvmError::SingleClass);
    }

    let n = features.len();
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let c = cfg.c;

    // Dense Gram matrix; dataset sizes keep O(n^2) memory acceptable.
    let mut gram = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = eval_unchecked(kernel, &features[i], &features[j]);
            gram[i * n + j] = v;
            gram[j * n + i] = v;
        }
    }

    let mut alpha = vec![0.0f64; n];
    // F_i = f(x_i) - b - y_i; bias-free errors, so F_i - F_j = E_i - E_j.
    let mut f: Vec<f64> = y.iter().map(|yi| -yi).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_iters = cfg.max_passes.unwrap_or(10 * n).saturating_mul(n);

    // Multipliers this close to a box bound snap onto it exactly, so a
    // sub-ulp sliver of slack can never pin the working pair in place.
    let snap = 1e-12 * c.max(1.0);
    let mut converged = false;
    let mut iters = 0usize;
    let mut stalls = 0usize;
    while iters < max_iters {
        let up = select_extreme(&f, |i| in_up_set(alpha[i], y[i], c), false, &mut rng);
        let low = select_extreme(&f, |i| in_low_set(alpha[i], y[i], c), true, &mut rng);
        let (Some((i1, f1)), Some((i2, f2))) = (up, low) else {
            break;
        };
        if f2 - f1 <= cfg.tol {
            converged = true;
            break;
        }
        iters += 1;

        let (y1, y2) = (y[i1], y[i2]);
        let (a1_old, a2_old) = (alpha[i1], alpha[i2]);
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((a2_old - a1_old).max(0.0), (c + a2_old - a1_old).min(c))
        } else {
            ((a1_old + a2_old - c).max(0.0), (a1_old + a2_old).min(c))
        };
        let k11 = gram[i1 * n + i1];
        let k22 = gram[i2 * n + i2];
        let k12 = gram[i1 * n + i2];
        let eta = (k11 + k22 - 2.0 * k12).max(1e-12);
        let mut a2 = (a2_old + y2 * (f1 - f2) / eta).clamp(lo, hi);
        if a2 < snap {
            a2 = 0.0;
        } else if a2 > c - snap {
            a2 = c;
        }
        if a2 == a2_old {
            stalls += 1;
            if stalls >= 10 {
                break;
            }
            continue;
        }
        stalls = 0;
        let mut a1 = a1_old + s * (a2_old - a2);
        if a1 < snap {
            a1 = 0.0;
        } else if a1 > c - snap {
            a1 = c;
        }
        alpha[i1] = a1;
        alpha[i2] = a2;

        let d1 = (a1 - a1_old) * y1;
        let d2 = (a2 - a2_old) * y2;
        let row1 = &gram[i1 * n..(i1 + 1) * n];
        let row2 = &gram[i2 * n..(i2 + 1) * n];
        for ((fk, k1), k2) in f.iter_mut().zip(row1).zip(row2) {
            *fk += d1 * k1 + d2 * k2;
        }
    }

    // Recompute outputs exactly for the bias; the incremental F carries
    // rounding drift after many pair steps.
    let mut u = vec![0.0f64; n];
    for j in 0..n {
        if alpha[j] == 0.0 {
            continue;
        }
        let w = alpha[j] * y[j];
        let row = &gram[j * n..(j + 1) * n];
        for (uk, kjk) in u.iter_mut().zip(row) {
            *uk += w * kjk;
        }
    }

    let free: Vec<usize> = (0..n).filter(|&i| alpha[i] > 0.0 && alpha[i] < c).collect();
    let bias = if free.is_empty() {
        let mut b_up = f64::INFINITY;
        let mut b_low = f64::NEG_INFINITY;
        for i in 0..n {
            let fi = u[i] - y[i];
            if in_up_set(alpha[i], y[i], c) {
                b_up = b_up.min(fi);
            }
            if in_low_set(alpha[i], y[i], c) {
                b_low = b_low.max(fi);
            }
        }
        -(b_up + b_low) / 2.0
    } else {
        free.iter().map(|&i| y[i] - u[i]).sum::<f64>() / free.len() as f64
    };

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for i in 0..n {
        if alpha[i] > 0.0 {
            support_vectors.push(features[i].clone());
            coefficients.push(alpha[i] * y[i]);
        }
    }

    Ok(SvmModel {
        support_vectors,
        coefficients,
        bias,
        kernel: *kernel,
        feature_dim: dim,
        converged,
    })
}

/// Check the three-case KKT conditions of a trained model on its own
/// training set; returns the largest violation found.
pub fn kkt_violation(
    m: &SvmModel,
    features: &[Vec<f64>],
    labels: &[Label],
    alphas: &[f64],
    c: f64,
) -> Result<f64, SvmError> {
    if features.len() != labels.len() || features.len() != alphas.len() {
        return Err(SvmError::LengthMismatch {
            features: features.len(),
            labels: labels.len(),
        });
    }
    let mut worst = 0.0f64;
    for ((x, l), a) in features.iter().zip(labels).zip(alphas) {
        let margin = l.sign() * decision_value(m, x)?;
        let v = if *a <= 0.0 {
            1.0 - margin
        } else if *a >= c {
            margin - 1.0
        } else {
            math::abs(margin - 1.0)
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Multipliers recovered from a model against its training set: `|coef_i|`
/// for support vectors, zero elsewhere. Helper for tests and diagnostics.
pub fn alphas_for(m: &SvmModel, features: &[Vec<f64>]) -> Vec<f64> {
    let mut alphas = vec![0.0f64; features.len()];
    let mut used = vec![false; m.support_vectors.len()];
    for (x, slot) in features.iter().zip(alphas.iter_mut()) {
        for (k, sv) in m.support_vectors.iter().enumerate() {
            if !used[k] && sv == x {
                *slot = math::abs(m.coefficients[k]);
                used[k] = true;
                break;
            }
        }
    }
    alphas
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        math::abs(a - b) <= tol
    }

    #[test]
    fn kernel_eval_cases() {
        assert_eq!(
            kernel_eval(&KernelSpec::Linear, &[1.0, 2.0], &[3.0, 4.0]).unwrap(),
            11.0
        );
        let rbf = KernelSpec::Rbf { gamma: 0.7 };
        assert_eq!(kernel_eval(&rbf, &[1.0, -2.0], &[1.0, -2.0]).unwrap(), 1.0);
        let poly = KernelSpec::Polynomial {
            degree: 2,
            coef0: 1.0,
        };
        assert_eq!(kernel_eval(&poly, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 4.0);
    }

    #[test]
    fn kernel_eval_rejects_dim_mismatch() {
        assert!(matches!(
            kernel_eval(&KernelSpec::Linear, &[1.0], &[1.0, 2.0]),
            Err(SvmError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kernel_validation() {
        assert!(KernelSpec::Rbf { gamma: 0.0 }.validate().is_err());
        assert!(KernelSpec::Rbf { gamma: 2.0 }.validate().is_ok());
        assert!(KernelSpec::Polynomial {
            degree: 0,
            coef0: 0.0
        }
        .validate()
        .is_err());
    }

    fn two_point_problem() -> (Vec<Vec<f64>>, Vec<Label>) {
        (
            vec![vec![0.0], vec![2.0]],
            vec![Label::Positive, Label::Negative],
        )
    }

    #[test]
    fn two_point_closed_form() {
        let (x, y) = two_point_problem();
        let cfg = TrainConfig {
            c: 10.0,
            tol: 1e-9,
            ..TrainConfig::default()
        };
        let m = train_smo(&x, &y, &KernelSpec::Linear, &cfg).unwrap();
        assert!(m.converged);
        assert_eq!(m.support_vectors.len(), 2);
        assert!(close(m.coefficients[0], 0.5, 1e-6));
        assert!(close(m.coefficients[1], -0.5, 1e-6));
        assert!(close(m.bias, 1.0, 1e-6));
        assert!(close(decision_value(&m, &[1.0]).unwrap(), 0.0, 1e-6));
        assert!(close(decision_value(&m, &[0.0]).unwrap(), 1.0, 1e-6));
        assert_eq!(predict(&m, &[0.5]).unwrap(), Label::Positive);
        assert_eq!(predict(&m, &[1.5]).unwrap(), Label::Negative);

        let alphas = alphas_for(&m, &x);
        assert!(close(
            dual_objective(&alphas, &y, &x, &KernelSpec::Linear).unwrap(),
            0.5,
            1e-9
        ));
    }

    #[test]
    fn label_negation_negates_decision() {
        let x = vec![
            vec![0.1, 0.4],
            vec![0.9, 0.2],
            vec![0.3, 0.8],
            vec![0.7, 0.7],
            vec![0.2, 0.1],
        ];
        let y = vec![
            Label::Positive,
            Label::Negative,
            Label::Positive,
            Label::Negative,
            Label::Positive,
        ];
        let flipped: Vec<Label> = y.iter().map(|l| l.flipped()).collect();
        let cfg = TrainConfig {
            c: 5.0,
            tol: 1e-12,
            max_passes: Some(100_000),
            ..TrainConfig::default()
        };
        let k = KernelSpec::Rbf { gamma: 1.5 };
        let m = train_smo(&x, &y, &k, &cfg).unwrap();
        let mn = train_smo(&x, &flipped, &k, &cfg).unwrap();
        for probe in [&[0.5, 0.5][..], &[0.0, 1.0], &[0.9, 0.1]] {
            let d = decision_value(&m, probe).unwrap();
            let dn = decision_value(&mn, probe).unwrap();
            assert!(close(d, -dn, 1e-9), "{d} vs {dn}");
        }
    }

    #[test]
    fn xor_with_rbf_trains_clean() {
        let x = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
        ];
        let y = vec![
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
        let m = train_smo(&x, &y, &KernelSpec::Rbf { gamma: 1.0 }, &cfg).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(predict(&m, xi).unwrap(), *yi);
        }
    }

    #[test]
    fn model_respects_dual_constraints() {
        let x = vec![
            vec![0.0, 0.0],
            vec![0.2, 0.1],
            vec![1.0, 1.0],
            vec![0.9, 1.1],
            vec![0.5, 0.55],
        ];
        let y = vec![
            Label::Positive,
            Label::Positive,
            Label::Negative,
            Label::Negative,
            Label::Positive,
        ];
        let cfg = TrainConfig {
            c: 2.0,
            tol: 1e-6,
            ..TrainConfig::default()
        };
        let m = train_smo(&x, &y, &KernelSpec::Linear, &cfg).unwrap();
        let coef_sum: f64 = m.coefficients.iter().sum();
        assert!(math::abs(coef_sum) <= 1e-6);
        for coef in &m.coefficients {
            let a = math::abs(*coef);
            assert!(a > 0.0 && a <= cfg.c + 1e-9);
        }
        let alphas = alphas_for(&m, &x);
        assert!(kkt_violation(&m, &x, &y, &alphas, cfg.c).unwrap() <= cfg.tol);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![Label::Positive, Label::Positive];
        assert!(matches!(
            train_smo(&x, &y, &KernelSpec::Linear, &TrainConfig::default()),
            Err(SvmError::SingleClass)
        ));
    }

    #[test]
    fn non_finite_feature_rejected() {
        let x = vec![vec![0.0], vec![f64::NAN]];
        let y = vec![Label::Positive, Label::Negative];
        assert!(matches!(
            train_smo(&x, &y, &KernelSpec::Linear, &TrainConfig::default()),
            Err(SvmError::NonFiniteFeature { sample: 1 })
        ));
    }

    #[test]
    fn fixed_seed_reproduces_model() {
        let x = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![0.5, 0.4],
            vec![0.4, 0.6],
        ];
        let y = vec![
            Label::Positive,
            Label::Positive,
            Label::Negative,
            Label::Negative,
            Label::Positive,
            Label::Negative,
        ];
        let cfg = TrainConfig {
            c: 3.0,
            seed: 99,
            ..TrainConfig::default()
        };
        let k = KernelSpec::Rbf { gamma: 2.0 };
        let a = train_smo(&x, &y, &k, &cfg).unwrap();
        let b = train_smo(&x, &y, &k, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dual_objective_zero_at_origin() {
        let (x, y) = two_point_problem();
        assert_eq!(
            dual_objective(&[0.0, 0.0], &y, &x, &KernelSpec::Linear).unwrap(),
            0.0
        );
    }

    #[test]
    fn decision_value_rejects_wrong_dimension() {
        let (x, y) = two_point_problem();
        let m = train_smo(&x, &y, &KernelSpec::Linear, &TrainConfig::new(10.0)).unwrap();
        assert!(matches!(
            decision_value(&m, &[1.0, 2.0]),
            Err(SvmError::DimensionMismatch { .. })
        ));
    }
}
