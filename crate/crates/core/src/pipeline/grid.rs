//! Hyperparameter sweep over the soft-margin cost (and RBF width) with
//! seeded stratified cross-validation scoring, plus a holdout-scored variant.

use alloc::vec::Vec;

use crate::label::Label;
use crate::math;
use crate::pipeline::eval::{self, EvalError};
use crate::pipeline::split::{stratified_folds, SplitError};
use crate::pipeline::FeatureSet;
use crate::svm::{self, KernelSpec, SvmError, TrainConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid has no cells")]
    EmptyGrid,
    #[error("holdout set is empty")]
    EmptyHoldout,
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("training failed at C={c}, gamma={gamma:?}: {source}")]
    Train {
        c: f64,
        gamma: Option<f64>,
        source: SvmError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Kernel family being swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Linear,
    Polynomial,
    Rbf,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Linear => "linear",
            KernelKind::Polynomial => "poly",
            KernelKind::Rbf => "rbf",
        }
    }
}

/// The sweep ranges. `gamma_values` only applies to the RBF kernel; the
/// polynomial degree and offset stay fixed across cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub kernel: KernelKind,
    pub c_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub degree: u32,
    pub coef0: f64,
}

fn pow2_range(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi)
        .map(|e| {
            let p = math::powi(2.0, e.unsigned_abs());
            if e < 0 {
                1.0 / p
            } else {
                p
            }
        })
        .collect()
}

impl GridSpec {
    /// The standard powers-of-two sweep: C over `2^-5..=2^10` (16 values)
    /// and, for RBF, gamma over `2^-10..=2^10` (21 values).
    pub fn standard_sweep(kernel: KernelKind) -> Self {
        GridSpec {
            kernel,
            c_values: pow2_range(-5, 10),
            gamma_values: match kernel {
                KernelKind::Rbf => pow2_range(-10, 10),
                _ => Vec::new(),
            },
            degree: 3,
            coef0: 1.0,
        }
    }

    /// All cells in sweep order: C ascending, then gamma ascending.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut cells = Vec::new();
        for &c in &self.c_values {
            match self.kernel {
                KernelKind::Rbf => {
                    for &gamma in &self.gamma_values {
                        cells.push(GridCell {
                            c,
                            gamma: Some(gamma),
                        });
                    }
                }
                _ => cells.push(GridCell { c, gamma: None }),
            }
        }
        cells
    }

    pub fn kernel_spec(&self, cell: &GridCell) -> KernelSpec {
        match self.kernel {
            KernelKind::Linear => KernelSpec::Linear,
            KernelKind::Polynomial => KernelSpec::Polynomial {
                degree: self.degree,
                coef0: self.coef0,
            },
            KernelKind::Rbf => KernelSpec::Rbf {
                gamma: cell.gamma.unwrap_or(1.0),
            },
        }
    }
}

/// One point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub c: f64,
    pub gamma: Option<f64>,
}

/// Score of one cell: per-fold recognition rates and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CellScore {
    pub cell: GridCell,
    pub mean_rate: f64,
    pub fold_rates: Vec<f64>,
    /// False when any fold's solver ran out of sweeps; the score still uses
    /// the returned model.
    pub all_converged: bool,
}

/// Sweep result: the winning cell and the full score table in sweep order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub best: GridCell,
    pub scores: Vec<CellScore>,
}

/// Precomputed fold assignment shared by every cell of a sweep.
#[derive(Debug, Clone)]
pub struct CvPlan {
    fold_of: Vec<usize>,
    folds: usize,
}

impl CvPlan {
    pub fn new(labels: &[Label], folds: usize, seed: u64) -> Result<Self, GridError> {
        Ok(CvPlan {
            fold_of: stratified_folds(labels, folds, seed)?,
            folds,
        })
    }

    pub fn folds(&self) -> usize {
        self.folds
    }
}

fn train_and_rate(
    train: &FeatureSet,
    holdout_features: &[Vec<f64>],
    holdout_labels: &[Label],
    spec: &KernelSpec,
    cell: &GridCell,
    cfg: &TrainConfig,
) -> Result<(f64, bool), GridError> {
    let cell_cfg = TrainConfig {
        c: cell.c,
        ..cfg.clone()
    };
    let model =
        svm::train_smo(&train.features, &train.labels, spec, &cell_cfg).map_err(|source| {
            GridError::Train {
                c: cell.c,
                gamma: cell.gamma,
                source,
            }
        })?;
    let predictions: Vec<Label> = holdout_features
        .iter()
        .map(|x| svm::predict(&model, x))
        .collect::<Result<_, _>>()
        .map_err(|source| GridError::Train {
            c: cell.c,
            gamma: cell.gamma,
            source,
        })?;
    let report = eval::recognition_rate(&predictions, holdout_labels)?;
    Ok((report.recognition_rate, model.converged))
}

/// Cross-validated score of one cell under a shared fold plan.
pub fn score_cell_cv(
    train: &FeatureSet,
    plan: &CvPlan,
    grid: &GridSpec,
    cell: &GridCell,
    cfg: &TrainConfig,
) -> Result<CellScore, GridError> {
    let spec = grid.kernel_spec(cell);
    let mut fold_rates = Vec::with_capacity(plan.folds);
    let mut all_converged = true;
    for fold in 0..plan.folds {
        let train_idx: Vec<usize> = (0..train.len())
            .filter(|&i| plan.fold_of[i] != fold)
            .collect();
        let hold_idx: Vec<usize> = (0..train.len())
            .filter(|&i| plan.fold_of[i] == fold)
            .collect();
        let sub = train.select(&train_idx);
        let hold_features: Vec<Vec<f64>> =
            hold_idx.iter().map(|&i| train.features[i].clone()).collect();
        let hold_labels: Vec<Label> = hold_idx.iter().map(|&i| train.labels[i]).collect();
        let (rate, converged) =
            train_and_rate(&sub, &hold_features, &hold_labels, &spec, cell, cfg)?;
        fold_rates.push(rate);
        all_converged &= converged;
    }
    let mean_rate = fold_rates.iter().sum::<f64>() / fold_rates.len() as f64;
    Ok(CellScore {
        cell: *cell,
        mean_rate,
        fold_rates,
        all_converged,
    })
}

/// Score of one cell trained on all of `train` and rated on `test`.
pub fn score_cell_holdout(
    train: &FeatureSet,
    test: &FeatureSet,
    grid: &GridSpec,
    cell: &GridCell,
    cfg: &TrainConfig,
) -> Result<CellScore, GridError> {
    if test.is_empty() {
        return Err(GridError::EmptyHoldout);
    }
    let spec = grid.kernel_spec(cell);
    let (rate, converged) = train_and_rate(train, &test.features, &test.labels, &spec, cell, cfg)?;
    Ok(CellScore {
        cell: *cell,
        mean_rate: rate,
        fold_rates: alloc::vec![rate],
        all_converged: converged,
    })
}

/// Index of the winning score: highest mean rate, ties resolved toward the
/// earlier cell, i.e. smaller C then smaller gamma in sweep order.
pub fn select_best(scores: &[CellScore]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(b) if s.mean_rate > scores[b].mean_rate => best = Some(i),
            _ => {}
        }
    }
    best
}

/// Sweep every cell with k-fold cross-validation inside the training set.
pub fn grid_search(
    train: &FeatureSet,
    grid: &GridSpec,
    cfg: &TrainConfig,
    folds: usize,
) -> Result<GridOutcome, GridError> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(GridError::EmptyGrid);
    }
    let plan = CvPlan::new(&train.labels, folds, cfg.seed)?;
    let scores: Vec<CellScore> = cells
        .iter()
        .map(|cell| score_cell_cv(train, &plan, grid, cell, cfg))
        .collect::<Result<_, _>>()?;
    let best = scores[select_best(&scores).expect("non-empty grid")].cell;
    Ok(GridOutcome { best, scores })
}

/// Sweep every cell scoring directly on a held-out test set.
pub fn grid_search_holdout(
    train: &FeatureSet,
    test: &FeatureSet,
    grid: &GridSpec,
    cfg: &TrainConfig,
) -> Result<GridOutcome, GridError> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(GridError::EmptyGrid);
    }
    let scores: Vec<CellScore> = cells
        .iter()
        .map(|cell| score_cell_holdout(train, test, grid, cell, cfg))
        .collect::<Result<_, _>>()?;
    let best = scores[select_best(&scores).expect("non-empty grid")].cell;
    Ok(GridOutcome { best, scores })
}
