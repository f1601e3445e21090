//! Parallel drivers for the hyperparameter sweep: cells are scored
//! concurrently and the table is assembled back in grid order, so results
//! are independent of scheduling.

use rayon::prelude::*;

use phogsvm_core::pipeline::grid::{
    score_cell_cv, score_cell_holdout, select_best, CvPlan, GridCell, GridError, GridOutcome,
    GridSpec,
};
use phogsvm_core::pipeline::FeatureSet;
use phogsvm_core::svm::{self, SvmError, SvmModel, TrainConfig};

/// Cross-validated sweep over every cell, cells scored in parallel.
pub fn sweep_cv(
    train: &FeatureSet,
    grid: &GridSpec,
    cfg: &TrainConfig,
    folds: usize,
) -> Result<GridOutcome, GridError> {
    let plan = CvPlan::new(&train.labels, folds, cfg.seed)?;
    let cells = grid.cells();
    let scores = cells
        .par_iter()
        .map(|cell| score_cell_cv(train, &plan, grid, cell, cfg))
        .collect::<Result<Vec<_>, GridError>>()?;
    let best = scores[select_best(&scores).ok_or(GridError::EmptyGrid)?].cell;
    Ok(GridOutcome { best, scores })
}

/// Holdout-scored sweep over every cell, cells scored in parallel.
pub fn sweep_holdout(
    train: &FeatureSet,
    test: &FeatureSet,
    grid: &GridSpec,
    cfg: &TrainConfig,
) -> Result<GridOutcome, GridError> {
    let cells = grid.cells();
    let scores = cells
        .par_iter()
        .map(|cell| score_cell_holdout(train, test, grid, cell, cfg))
        .collect::<Result<Vec<_>, GridError>>()?;
    let best = scores[select_best(&scores).ok_or(GridError::EmptyGrid)?].cell;
    Ok(GridOutcome { best, scores })
}

/// Train a final model on the full training set at one grid cell.
pub fn train_at_cell(
    train: &FeatureSet,
    grid: &GridSpec,
    cell: GridCell,
    cfg: &TrainConfig,
) -> Result<SvmModel, SvmError> {
    let spec = grid.kernel_spec(&cell);
    let cell_cfg = TrainConfig {
        c: cell.c,
        ..cfg.clone()
    };
    svm::train_smo(&train.features, &train.labels, &spec, &cell_cfg)
}
