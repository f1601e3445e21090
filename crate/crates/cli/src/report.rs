//! Deterministic report rendering: human tables for stdout and
//! machine-readable CSV for `--out`. Nothing here may embed timestamps or
//! absolute paths, so identical runs stay byte-identical.

use phogsvm_core::pipeline::eval::EvalReport;
use phogsvm_core::pipeline::grid::{GridOutcome, KernelKind};

/// Render a value as `2^k` when it is an exact power of two.
pub fn fmt_pow2(x: f64) -> String {
    if x > 0.0 {
        let exp = x.log2();
        if exp.fract() == 0.0 && exp.abs() <= 64.0 {
            return format!("2^{}", exp as i64);
        }
    }
    format!("{x}")
}

fn fmt_gamma(gamma: Option<f64>) -> String {
    gamma.map_or_else(|| "-".to_string(), fmt_pow2)
}

pub fn eval_text(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "confusion counts: TP={} TN={} FP={} FN={} (total {})\n",
        report.true_pos,
        report.true_neg,
        report.false_pos,
        report.false_neg,
        report.total()
    ));
    out.push_str(&format!(
        "recognition rate: {:.4}\n",
        report.recognition_rate
    ));
    out
}

/// One line: `tp,tn,fp,fn,rate`.
pub fn eval_csv(report: &EvalReport) -> String {
    format!(
        "tp,tn,fp,fn,rate\n{},{},{},{},{}\n",
        report.true_pos,
        report.true_neg,
        report.false_pos,
        report.false_neg,
        report.recognition_rate
    )
}

/// Human-readable sweep table, one row per cell plus the winner.
pub fn grid_table_text(kernel: KernelKind, outcome: &GridOutcome) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>8}  {:>8}  {:>9}  flagged\n",
        "C", "gamma", "mean rate"
    ));
    for score in &outcome.scores {
        out.push_str(&format!(
            "{:>8}  {:>8}  {:>9.4}  {}\n",
            fmt_pow2(score.cell.c),
            fmt_gamma(score.cell.gamma),
            score.mean_rate,
            if score.all_converged { "" } else { "!" }
        ));
    }
    out.push_str(&format!(
        "best ({}): C={} gamma={}\n",
        kernel.name(),
        fmt_pow2(outcome.best.c),
        fmt_gamma(outcome.best.gamma)
    ));
    out
}

/// Machine-readable sweep: `C,gamma,mean_rate,fold_rates...` per cell.
pub fn grid_cells_csv(outcome: &GridOutcome) -> String {
    let mut out = String::new();
    for score in &outcome.scores {
        out.push_str(&format!(
            "{},{},{}",
            score.cell.c,
            score.cell.gamma.map_or_else(String::new, |g| format!("{g}")),
            score.mean_rate
        ));
        for rate in &score.fold_rates {
            out.push_str(&format!(",{rate}"));
        }
        out.push('\n');
    }
    out
}

/// One row of the descriptor-by-kernel protocol report.
#[derive(Debug, Clone)]
pub struct ProtocolRow {
    pub levels: u32,
    pub bins: usize,
    pub feature_len: usize,
    pub kernel: KernelKind,
    pub rate: f64,
    pub best_c: f64,
    pub best_gamma: Option<f64>,
}

pub fn protocol_table_text(rows: &[ProtocolRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>2} {:>3} {:>7} {:>7} {:>7} {:>8} {:>8}\n",
        "L", "H", "length", "kernel", "rate", "best C", "best g"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:>2} {:>3} {:>7} {:>7} {:>7.4} {:>8} {:>8}\n",
            r.levels,
            r.bins,
            r.feature_len,
            r.kernel.name(),
            r.rate,
            fmt_pow2(r.best_c),
            fmt_gamma(r.best_gamma)
        ));
    }
    out
}

/// Machine-readable protocol report, one row per line.
pub fn protocol_csv(rows: &[ProtocolRow]) -> String {
    let mut out = String::from("L,H,length,kernel,rate,best_c,best_gamma\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.levels,
            r.bins,
            r.feature_len,
            r.kernel.name(),
            r.rate,
            r.best_c,
            r.best_gamma.map_or_else(String::new, |g| format!("{g}"))
        ));
    }
    out
}

/// Mean and sample standard deviation of repeated rates.
pub fn mean_and_deviation(rates: &[f64]) -> (f64, f64) {
    let n = rates.len() as f64;
    let mean = rates.iter().sum::<f64>() / n;
    if rates.len() < 2 {
        return (mean, 0.0);
    }
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
