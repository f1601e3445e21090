//! Command-line front end: `extract`, `train`, `predict`, `evaluate`,
//! `grid-search` and `selftest` subcommands with reproducible, scriptable
//! output. Exit codes: 0 success, 1 invalid input, 2 runtime failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use phogsvm_core::imaging::{self, LaplacianStencil};
use phogsvm_core::phog::{AngleRange, GradientSource, PhogError, PhogOptions, PhogParams};
use phogsvm_core::pipeline::eval::{self, EvalError};
use phogsvm_core::pipeline::grid::{GridError, GridOutcome, GridSpec, KernelKind};
use phogsvm_core::pipeline::split::{stratified_split, SplitError};
use phogsvm_core::pipeline::{FeatureSet, Preproc};
use phogsvm_core::svm::{self, KernelSpec, SvmError, SvmModel, TrainConfig};
use phogsvm_core::Label;

use crate::features::{
    describe_image, extract_features, extract_features_cached, read_features, write_features,
    FeatureError,
};
use crate::formats::{self, LoadError};
use crate::manifest::{label_name, load_manifest, ManifestError};
use crate::model_file::{load_model, save_model, ModelFileError};
use crate::report::{self, ProtocolRow};
use crate::selftest;
use crate::sweep::{sweep_cv, sweep_holdout, train_at_cell};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Model(#[from] ModelFileError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Phog(#[from] PhogError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{failed} of {total} self-test checks failed")]
    SelftestFailed { failed: usize, total: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl CliError {
    /// 1 for faulty input (flags, file contents, shapes), 2 for runtime
    /// failures (I/O, internal).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_)
            | CliError::Svm(_)
            | CliError::Grid(_)
            | CliError::Split(_)
            | CliError::Eval(_)
            | CliError::Phog(_) => 1,
            CliError::Manifest(ManifestError::Io { .. }) => 2,
            CliError::Manifest(_) => 1,
            CliError::Load(LoadError::Io { .. }) => 2,
            CliError::Load(LoadError::Format { .. }) => 1,
            CliError::Feature(FeatureError::Io { .. }) => 2,
            CliError::Feature(FeatureError::Load {
                source: LoadError::Io { .. },
                ..
            }) => 2,
            CliError::Feature(_) => 1,
            CliError::Model(ModelFileError::Io { .. }) => 2,
            CliError::Model(_) => 1,
            CliError::Io { .. } | CliError::SelftestFailed { .. } | CliError::ThreadPool(_) => 2,
        }
    }
}

fn validation(msg: impl ToString) -> CliError {
    CliError::Validation(msg.to_string())
}

#[derive(Debug, Clone, Copy)]
struct Dims {
    w: usize,
    h: usize,
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let (w, h) = s
        .split_once('x')
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let w = w.parse::<usize>().map_err(|_| format!("bad width {w:?}"))?;
    let h = h.parse::<usize>().map_err(|_| format!("bad height {h:?}"))?;
    if w == 0 || h == 0 {
        return Err("dimensions must be at least 1x1".into());
    }
    Ok(Dims { w, h })
}

fn parse_angle(s: &str) -> Result<u32, String> {
    match s {
        "180" => Ok(180),
        "360" => Ok(360),
        _ => Err(format!("angle must be 180 or 360, got {s:?}")),
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum KernelArg {
    Linear,
    Poly,
    Rbf,
}

impl KernelArg {
    fn kind(self) -> KernelKind {
        match self {
            KernelArg::Linear => KernelKind::Linear,
            KernelArg::Poly => KernelKind::Polynomial,
            KernelArg::Rbf => KernelKind::Rbf,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GradSourceArg {
    Image,
    Laplacian,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum StencilArg {
    Four,
    Eight,
}

/// Flags shaping the descriptor and preprocessing.
#[derive(Args, Debug, Clone)]
struct DescriptorArgs {
    /// Deepest pyramid level (levels 0..=L all contribute)
    #[arg(long, default_value_t = 3)]
    levels: u32,
    /// Orientation histogram bins per cell
    #[arg(long, default_value_t = 16)]
    bins: usize,
    /// Orientation wrap range in degrees (180 or 360)
    #[arg(long, default_value_t = 360, value_parser = parse_angle)]
    angle: u32,
    /// Edge mask threshold as a fraction of the max |Laplacian|
    #[arg(long = "edge-thresh", default_value_t = 0.1)]
    edge_thresh: f64,
    /// Gaussian smoothing sigma (pixels)
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Resampling target, WxH
    #[arg(long, default_value = "300x300", value_parser = parse_dims)]
    resample: Dims,
    /// Image the voting gradients are taken on
    #[arg(long = "grad-source", value_enum, default_value_t = GradSourceArg::Image)]
    grad_source: GradSourceArg,
    /// Laplacian stencil connectivity
    #[arg(long, value_enum, default_value_t = StencilArg::Four)]
    laplacian: StencilArg,
    /// Keep raw vote mass instead of L1-normalizing the descriptor
    #[arg(long = "no-normalize")]
    no_normalize: bool,
}

impl DescriptorArgs {
    fn params(&self) -> Result<PhogParams, CliError> {
        if self.levels > 12 {
            return Err(validation("--levels larger than 12 is not supported"));
        }
        if self.bins == 0 {
            return Err(validation("--bins must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.edge_thresh) {
            return Err(validation("--edge-thresh must lie in [0, 1]"));
        }
        let angle = if self.angle == 180 {
            AngleRange::Deg180
        } else {
            AngleRange::Deg360
        };
        PhogParams::new(self.levels, self.bins, angle, self.edge_thresh)
            .map_err(|e| validation(format!("descriptor flags: {e}")))
    }

    fn preproc(&self) -> Result<Preproc, CliError> {
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(validation("--sigma must be positive"));
        }
        Ok(Preproc {
            resample_w: self.resample.w,
            resample_h: self.resample.h,
            sigma: self.sigma,
        })
    }

    fn options(&self) -> PhogOptions {
        PhogOptions {
            grad_source: match self.grad_source {
                GradSourceArg::Image => GradientSource::Image,
                GradSourceArg::Laplacian => GradientSource::Laplacian,
            },
            stencil: match self.laplacian {
                StencilArg::Four => LaplacianStencil::FourConnected,
                StencilArg::Eight => LaplacianStencil::EightConnected,
            },
            normalize: !self.no_normalize,
        }
    }
}

/// Flags configuring the solver and kernel.
#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Kernel function (defaults to rbf)
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Soft-margin cost
    #[arg(long = "C", default_value_t = 4.0)]
    c: f64,
    /// RBF kernel width
    #[arg(long, default_value_t = 1024.0)]
    gamma: f64,
    /// Polynomial kernel degree
    #[arg(long, default_value_t = 3)]
    degree: u32,
    /// Polynomial kernel offset
    #[arg(long, default_value_t = 1.0)]
    coef0: f64,
    /// Solver KKT tolerance
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Solver sweep budget (defaults to 10 sweeps per sample)
    #[arg(long = "max-passes")]
    max_passes: Option<usize>,
}

impl SolverArgs {
    fn validate_common(&self) -> Result<(), CliError> {
        if !self.c.is_finite() || self.c <= 0.0 {
            return Err(validation("--C must be positive"));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(validation("--tol must be positive"));
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(validation("--gamma must be positive"));
        }
        if self.degree == 0 {
            return Err(validation("--degree must be at least 1"));
        }
        Ok(())
    }

    fn kernel_spec(&self) -> KernelSpec {
        match self.kernel.unwrap_or(KernelArg::Rbf) {
            KernelArg::Linear => KernelSpec::Linear,
            KernelArg::Poly => KernelSpec::Polynomial {
                degree: self.degree,
                coef0: self.coef0,
            },
            KernelArg::Rbf => KernelSpec::Rbf { gamma: self.gamma },
        }
    }

    fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            c: self.c,
            tol: self.tol,
            max_passes: self.max_passes,
            seed,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "phogsvm",
    version,
    about = "Shape-descriptor extraction and kernel SVM classification for grayscale images"
)]
struct Cli {
    /// Worker threads for extraction and grid search (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute descriptors for every image in a manifest
    Extract(ExtractCmd),
    /// Train a classifier from a feature file
    Train(TrainCmd),
    /// Classify images with a trained model
    Predict(PredictCmd),
    /// Score a model against a labeled feature file
    Evaluate(EvaluateCmd),
    /// Sweep C (and gamma) over the powers-of-two grid
    #[command(name = "grid-search")]
    GridSearch(GridSearchCmd),
    /// Run the built-in analytic checks
    Selftest,
}

#[derive(Args, Debug)]
struct ExtractCmd {
    /// Dataset manifest (CSV: id,path,label)
    #[arg(long)]
    manifest: PathBuf,
    /// Output feature file
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    descriptor: DescriptorArgs,
    /// Dump per-sample filter responses as PGM files into this directory
    #[arg(long = "debug-dump")]
    debug_dump: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainCmd {
    /// Input feature file
    #[arg(long)]
    features: PathBuf,
    /// Output model file
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Seed for the solver's working-pair tie-break
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PredictCmd {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    descriptor: DescriptorArgs,
    /// Images to classify
    #[arg(required = true)]
    images: Vec<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateCmd {
    /// Trained model file
    #[arg(long)]
    model: PathBuf,
    /// Labeled feature file to score
    #[arg(long)]
    features: PathBuf,
    /// Write a machine-readable report here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridSearchCmd {
    /// Feature file(s); repeat the flag for several descriptor configurations
    #[arg(long)]
    features: Vec<PathBuf>,
    /// Extract features from this manifest instead (cached)
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Cache directory for features extracted from --manifest
    #[arg(long = "cache-dir")]
    cache_dir: Option<PathBuf>,
    #[command(flatten)]
    descriptor: DescriptorArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Cross-validation folds within the training half
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// Seed for splitting, fold assignment and the solver
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Repeat the split+sweep with consecutive seeds and aggregate
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Score cells on the held-out test half directly and emit a
    /// descriptor-by-kernel table
    #[arg(long = "paper-protocol")]
    paper_protocol: bool,
    /// Write the machine-readable cell table here
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the winning model here
    #[arg(long)]
    model: Option<PathBuf>,
}

/// Parse and execute; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    let result = match cli.threads {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(CliError::ThreadPool(e.to_string())),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Extract(cmd) => run_extract(cmd),
        Command::Train(cmd) => run_train(cmd),
        Command::Predict(cmd) => run_predict(cmd),
        Command::Evaluate(cmd) => run_evaluate(cmd),
        Command::GridSearch(cmd) => run_grid_search(cmd),
        Command::Selftest => run_selftest(),
    }
}

fn run_extract(cmd: ExtractCmd) -> Result<(), CliError> {
    let params = cmd.descriptor.params()?;
    let preproc = cmd.descriptor.preproc()?;
    let opts = cmd.descriptor.options();
    let dataset = load_manifest(&cmd.manifest)?;
    let fs = extract_features(&dataset, &params, &preproc, &opts)?;
    write_features(&fs, &cmd.features)?;
    println!(
        "extracted {} descriptors of length {}",
        fs.len(),
        params.descriptor_length()
    );
    println!("features -> {}", cmd.features.display());

    if let Some(dir) = cmd.debug_dump {
        fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        for sample in &dataset.samples {
            let img = formats::load_image(&sample.path)?;
            let resampled = imaging::resample_bicubic(&img, preproc.resample_w, preproc.resample_h);
            let smoothed = imaging::gaussian_smooth(&resampled, preproc.sigma);
            let lap = imaging::laplacian_with(&smoothed, opts.stencil);
            let (gx, gy) = imaging::sobel_gradients(&smoothed);
            let magnitude = phogsvm_core::phog::gradient_magnitude(&gx, &gy)?;
            formats::write_debug_pgm(&dir.join(format!("{}-laplacian.pgm", sample.id)), &lap)?;
            formats::write_debug_pgm(
                &dir.join(format!("{}-magnitude.pgm", sample.id)),
                &magnitude,
            )?;
        }
        println!("filter dumps -> {}", dir.display());
    }
    Ok(())
}

fn run_train(cmd: TrainCmd) -> Result<(), CliError> {
    cmd.solver.validate_common()?;
    let fs = read_features(&cmd.features)?;
    let kernel = cmd.solver.kernel_spec();
    let cfg = cmd.solver.train_config(cmd.seed);
    let model = svm::train_smo(&fs.features, &fs.labels, &kernel, &cfg)?;
    if !model.converged {
        eprintln!("warning: solver hit the sweep budget before meeting --tol; saving best model found");
    }
    save_model(&model, &cmd.model)?;
    println!(
        "trained on {} samples: {} support vectors, bias {:.6}, converged {}",
        fs.len(),
        model.support_vectors.len(),
        model.bias,
        model.converged
    );
    println!("model -> {}", cmd.model.display());
    Ok(())
}

fn descriptor_dimension_check(
    produced: usize,
    model: &SvmModel,
    descriptor: &DescriptorArgs,
) -> Result<(), CliError> {
    if produced != model.feature_dim {
        return Err(validation(format!(
            "descriptor length {produced} (from --levels {} --bins {}) does not match the model's feature dimension {}",
            descriptor.levels, descriptor.bins, model.feature_dim
        )));
    }
    Ok(())
}

fn run_predict(cmd: PredictCmd) -> Result<(), CliError> {
    let params = cmd.descriptor.params()?;
    let preproc = cmd.descriptor.preproc()?;
    let opts = cmd.descriptor.options();
    let model = load_model(&cmd.model)?;
    descriptor_dimension_check(params.descriptor_length(), &model, &cmd.descriptor)?;
    for path in &cmd.images {
        let img = formats::load_image(path)?;
        let descriptor = describe_image(&img, &params, &preproc, &opts)?;
        let label = svm::predict(&model, &descriptor)?;
        println!("{}\t{}", path.display(), label_name(label));
    }
    Ok(())
}

fn predictions_for(model: &SvmModel, fs: &FeatureSet) -> Result<Vec<Label>, CliError> {
    if let Some(row) = fs.features.first() {
        if row.len() != model.feature_dim {
            return Err(validation(format!(
                "feature file vectors have length {}, model expects {}",
                row.len(),
                model.feature_dim
            )));
        }
    }
    let mut predictions = Vec::with_capacity(fs.len());
    for row in &fs.features {
        predictions.push(svm::predict(model, row)?);
    }
    Ok(predictions)
}

fn run_evaluate(cmd: EvaluateCmd) -> Result<(), CliError> {
    let model = load_model(&cmd.model)?;
    let fs = read_features(&cmd.features)?;
    let predictions = predictions_for(&model, &fs)?;
    let report = eval::recognition_rate(&predictions, &fs.labels)?;
    print!("{}", report::eval_text(&report));
    if let Some(out) = cmd.out {
        fs::write(&out, report::eval_csv(&report)).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
        println!("report -> {}", out.display());
    }
    Ok(())
}

fn run_selftest() -> Result<(), CliError> {
    let outcomes = selftest::run_all();
    let total = outcomes.len();
    let mut failed = 0;
    for outcome in outcomes {
        match outcome.error {
            None => println!("PASS {}", outcome.name),
            Some(reason) => {
                failed += 1;
                println!("FAIL {}: {reason}", outcome.name);
            }
        }
    }
    println!("{} passed, {failed} failed", total - failed);
    if failed > 0 {
        return Err(CliError::SelftestFailed { failed, total });
    }
    Ok(())
}

fn grid_for(kind: KernelKind, solver: &SolverArgs) -> GridSpec {
    let mut grid = GridSpec::standard_sweep(kind);
    grid.degree = solver.degree;
    grid.coef0 = solver.coef0;
    grid
}

fn sweep_summary(grid: &GridSpec) -> String {
    match grid.kernel {
        KernelKind::Rbf => format!(
            "{} C values x {} gamma values = {} cells",
            grid.c_values.len(),
            grid.gamma_values.len(),
            grid.cells().len()
        ),
        _ => format!("{} C values", grid.c_values.len()),
    }
}

fn load_feature_sources(cmd: &GridSearchCmd) -> Result<Vec<FeatureSet>, CliError> {
    match (&cmd.manifest, cmd.features.is_empty()) {
        (Some(_), false) => Err(validation(
            "pass either --features or --manifest, not both",
        )),
        (None, true) => Err(validation(
            "grid-search needs --features <file> or --manifest <file>",
        )),
        (None, false) => cmd
            .features
            .iter()
            .map(|p| read_features(p).map_err(CliError::from))
            .collect(),
        (Some(manifest_path), true) => {
            let dataset = load_manifest(manifest_path)?;
            let preproc = cmd.descriptor.preproc()?;
            let opts = cmd.descriptor.options();
            let cache_dir = cmd.cache_dir.clone().unwrap_or_else(|| {
                manifest_path
                    .parent()
                    .unwrap_or_else(|| Path::new(""))
                    .join(".phog-cache")
            });
            let configs: Vec<(u32, usize)> = if cmd.paper_protocol {
                vec![(2, 8), (2, 16), (3, 8), (3, 16)]
            } else {
                vec![(cmd.descriptor.levels, cmd.descriptor.bins)]
            };
            let mut sets = Vec::new();
            for (levels, bins) in configs {
                let mut descriptor = cmd.descriptor.clone();
                descriptor.levels = levels;
                descriptor.bins = bins;
                let params = descriptor.params()?;
                let (fs, cache_path, hit) = extract_features_cached(
                    manifest_path,
                    &dataset,
                    &params,
                    &preproc,
                    &opts,
                    &cache_dir,
                )?;
                eprintln!(
                    "features L={levels} H={bins}: {} ({})",
                    cache_path.display(),
                    if hit { "cache hit" } else { "extracted" }
                );
                sets.push(fs);
            }
            Ok(sets)
        }
    }
}

fn run_grid_search(cmd: GridSearchCmd) -> Result<(), CliError> {
    cmd.solver.validate_common()?;
    if cmd.repeats == 0 {
        return Err(validation("--repeats must be at least 1"));
    }
    if cmd.folds < 2 {
        return Err(validation("--folds must be at least 2"));
    }
    let sources = load_feature_sources(&cmd)?;
    if cmd.paper_protocol {
        run_protocol_sweep(&cmd, &sources)
    } else {
        if sources.len() != 1 {
            return Err(validation(
                "default grid-search takes exactly one --features file; \
                 multiple files only combine with --paper-protocol",
            ));
        }
        run_cv_sweep(&cmd, &sources[0])
    }
}

fn run_cv_sweep(cmd: &GridSearchCmd, fs: &FeatureSet) -> Result<(), CliError> {
    let kind = cmd.solver.kernel.unwrap_or(KernelArg::Rbf).kind();
    let grid = grid_for(kind, &cmd.solver);
    println!(
        "sweep: {} kernel, {}, {}-fold cross-validation",
        kind.name(),
        sweep_summary(&grid),
        cmd.folds
    );

    let mut test_rates = Vec::with_capacity(cmd.repeats);
    let mut first_outcome: Option<GridOutcome> = None;
    let mut first_model: Option<SvmModel> = None;
    for rep in 0..cmd.repeats {
        let seed = cmd.seed.wrapping_add(rep as u64);
        let (train, test) = stratified_split(fs, seed)?;
        let cfg = cmd.solver.train_config(seed);
        let outcome = sweep_cv(&train, &grid, &cfg, cmd.folds)?;
        let model = train_at_cell(&train, &grid, outcome.best, &cfg)?;
        let predictions = predictions_for(&model, &test)?;
        let report = eval::recognition_rate(&predictions, &test.labels)?;

        if rep == 0 {
            print!("{}", report::grid_table_text(kind, &outcome));
            print!("{}", report::eval_text(&report));
        }
        let best_score = outcome
            .scores
            .iter()
            .find(|s| s.cell == outcome.best)
            .map(|s| s.mean_rate)
            .unwrap_or(0.0);
        println!(
            "repeat {rep}: seed={seed} best C={} gamma={} cv={:.4} test={:.4}",
            report::fmt_pow2(outcome.best.c),
            outcome
                .best
                .gamma
                .map_or_else(|| "-".to_string(), report::fmt_pow2),
            best_score,
            report.recognition_rate
        );
        test_rates.push(report.recognition_rate);
        if rep == 0 {
            first_outcome = Some(outcome);
            first_model = Some(model);
        }
    }

    let (mean, deviation) = report::mean_and_deviation(&test_rates);
    println!(
        "test rate over {} repeat(s): mean={mean:.4} deviation={deviation:.4}",
        cmd.repeats
    );

    if let Some(out) = &cmd.out {
        let outcome = first_outcome.as_ref().expect("at least one repeat");
        fs::write(out, report::grid_cells_csv(outcome)).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
        println!("cell table -> {}", out.display());
    }
    if let Some(model_path) = &cmd.model {
        let model = first_model.as_ref().expect("at least one repeat");
        save_model(model, model_path)?;
        println!("model -> {}", model_path.display());
    }
    Ok(())
}

fn run_protocol_sweep(cmd: &GridSearchCmd, sources: &[FeatureSet]) -> Result<(), CliError> {
    let kinds: Vec<KernelKind> = match cmd.solver.kernel {
        Some(arg) => vec![arg.kind()],
        None => vec![KernelKind::Linear, KernelKind::Polynomial, KernelKind::Rbf],
    };

    let mut rows: Vec<ProtocolRow> = Vec::new();
    let mut best_row: Option<(usize, f64)> = None;
    let mut winners: Vec<(FeatureSet, GridSpec, phogsvm_core::pipeline::grid::GridCell)> =
        Vec::new();
    for fs in sources {
        let (train, test) = stratified_split(fs, cmd.seed)?;
        for &kind in &kinds {
            let grid = grid_for(kind, &cmd.solver);
            let cfg = cmd.solver.train_config(cmd.seed);
            let outcome = sweep_holdout(&train, &test, &grid, &cfg)?;
            let rate = outcome
                .scores
                .iter()
                .find(|s| s.cell == outcome.best)
                .map(|s| s.mean_rate)
                .unwrap_or(0.0);
            rows.push(ProtocolRow {
                levels: fs.params.levels,
                bins: fs.params.bins,
                feature_len: fs.params.descriptor_length(),
                kernel: kind,
                rate,
                best_c: outcome.best.c,
                best_gamma: outcome.best.gamma,
            });
            let improved = match best_row {
                None => true,
                Some((_, best_rate)) => rate > best_rate,
            };
            if improved {
                best_row = Some((rows.len() - 1, rate));
            }
            winners.push((train.clone(), grid, outcome.best));
        }
    }

    print!("{}", report::protocol_table_text(&rows));
    if let Some(out) = &cmd.out {
        fs::write(out, report::protocol_csv(&rows)).map_err(|source| CliError::Io {
            path: out.clone(),
            source,
        })?;
        println!("report -> {}", out.display());
    }
    if let Some(model_path) = &cmd.model {
        let (idx, _) = best_row.ok_or(GridError::EmptyGrid)?;
        let (train, grid, cell) = &winners[idx];
        let cfg = cmd.solver.train_config(cmd.seed);
        let model = train_at_cell(train, grid, *cell, &cfg)?;
        save_model(&model, model_path)?;
        println!("model -> {}", model_path.display());
    }
    Ok(())
}
