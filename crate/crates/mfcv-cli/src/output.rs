//! Result artifacts: CSV traces, aggregate summaries, plots and the echoed
//! configuration, written atomically (temp directory + rename).

use std::fs;
use std::path::{Path, PathBuf};

use mfcv::error::{MfcvError, Result};
use mfcv::harness::{RunRecord, SuiteReport};

use crate::config::ResolvedConfig;
use crate::plots;

/// Paths of everything a run produces.
#[derive(Debug, Clone)]
pub struct OutputBundle {
    pub dir: PathBuf,
    pub trace_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub fidelity_hist_path: PathBuf,
    pub runs_path: PathBuf,
    pub config_echo_path: PathBuf,
    pub plot_paths: Vec<PathBuf>,
}

/// 17 significant digits, enough to reproduce the f64 bit pattern.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trace_header(dim: usize) -> String {
    let mut cols = vec!["iteration".to_string(), "batch_index".to_string()];
    cols.extend((0..dim).map(|i| format!("x_{i}")));
    cols.extend(
        ["s", "y", "query_cost", "cumulative_cost", "rmse", "fallback_flag"]
            .iter()
            .map(|s| s.to_string()),
    );
    cols.join(",")
}

pub fn trace_csv(run: &RunRecord, dim: usize) -> String {
    let mut out = String::new();
    out.push_str(&trace_header(dim));
    out.push('\n');
    for row in &run.rows {
        let mut cols = vec![row.iteration.to_string(), row.batch_index.to_string()];
        cols.extend(row.x.iter().map(|v| fmt_f64(*v)));
        cols.push(fmt_f64(row.s));
        cols.push(fmt_f64(row.y));
        cols.push(fmt_f64(row.query_cost));
        cols.push(fmt_f64(row.cumulative_cost));
        cols.push(fmt_f64(row.rmse));
        cols.push(if row.fallback { "1" } else { "0" }.to_string());
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

fn summary_csv(report: &SuiteReport) -> String {
    let mut out = String::from("strategy,cost,mean_rmse,std_rmse\n");
    for row in &report.summary {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.strategy.name(),
            fmt_f64(row.cost),
            fmt_f64(row.mean_rmse),
            fmt_f64(row.std_rmse)
        ));
    }
    out
}

fn fidelity_hist_csv(report: &SuiteReport) -> String {
    let mut out = String::from("strategy,s_lo,s_hi,count,fraction\n");
    for row in &report.fidelity_hist {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.strategy.name(),
            fmt_f64(row.lo),
            fmt_f64(row.hi),
            row.count,
            fmt_f64(row.fraction)
        ));
    }
    out
}

fn runs_csv(report: &SuiteReport) -> String {
    let mut out = String::from(
        "strategy,repetition,initial_rmse,final_rmse,final_cost,fallbacks,wall_seconds\n",
    );
    for run in &report.runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            run.strategy.name(),
            run.repetition,
            fmt_f64(run.initial_rmse),
            fmt_f64(run.final_rmse()),
            fmt_f64(run.final_cost()),
            run.fallback_count,
            fmt_f64(run.iteration_seconds.iter().sum::<f64>())
        ));
    }
    out
}

/// Prepare the staging directory next to the final location, so the final
/// rename stays on one filesystem. Errors out before any computation if the
/// destination is unwritable.
pub fn prepare_staging(out_dir: &Path) -> Result<tempfile::TempDir> {
    let parent = out_dir.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(p) = parent {
        fs::create_dir_all(p)?;
    }
    let staging = tempfile::Builder::new()
        .prefix(".mfcv-staging-")
        .tempdir_in(parent.unwrap_or_else(|| Path::new(".")))?;
    Ok(staging)
}

/// Write all artifacts into the staging directory and atomically move it to
/// `out_dir`. An existing bundle at the destination is replaced.
pub fn write_bundle(
    staging: tempfile::TempDir,
    out_dir: &Path,
    resolved: &ResolvedConfig,
    report: &SuiteReport,
) -> Result<OutputBundle> {
    let dim = resolved.experiments[0].benchmark.input_dim();
    let dir = staging.path();

    let mut trace_names = Vec::new();
    for run in &report.runs {
        let name = format!("trace_{}_rep{}.csv", run.strategy.name(), run.repetition);
        fs::write(dir.join(&name), trace_csv(run, dim))?;
        trace_names.push(name);
    }
    fs::write(dir.join("summary.csv"), summary_csv(report))?;
    fs::write(dir.join("fidelity_hist.csv"), fidelity_hist_csv(report))?;
    fs::write(dir.join("runs.csv"), runs_csv(report))?;
    fs::write(dir.join("config_echo.toml"), resolved.echo_toml())?;
    if !report.failures.is_empty() {
        fs::write(dir.join("failures.txt"), report.failures.join("\n"))?;
    }

    let plots_dir = dir.join("plots");
    fs::create_dir_all(&plots_dir)?;
    let mut plot_names = Vec::new();
    {
        let svg = plots::rmse_vs_cost_svg(&report.summary);
        fs::write(plots_dir.join("rmse_vs_cost.svg"), svg)?;
        plot_names.push("plots/rmse_vs_cost.svg".to_string());
        let svg = plots::fidelity_hist_svg(&report.fidelity_hist);
        fs::write(plots_dir.join("fidelity_hist.svg"), svg)?;
        plot_names.push("plots/fidelity_hist.svg".to_string());
    }

    // Swap into place.
    let staged = staging.keep();
    if out_dir.exists() {
        if !out_dir.join("config_echo.toml").exists() {
            fs::remove_dir_all(&staged).ok();
            return Err(MfcvError::InvalidConfig(format!(
                "output directory {} exists and is not a previous result bundle",
                out_dir.display()
            )));
        }
        fs::remove_dir_all(out_dir)?;
    }
    fs::rename(&staged, out_dir)?;

    Ok(OutputBundle {
        dir: out_dir.to_path_buf(),
        trace_paths: trace_names.iter().map(|n| out_dir.join(n)).collect(),
        summary_path: out_dir.join("summary.csv"),
        fidelity_hist_path: out_dir.join("fidelity_hist.csv"),
        runs_path: out_dir.join("runs.csv"),
        config_echo_path: out_dir.join("config_echo.toml"),
        plot_paths: plot_names.iter().map(|n| out_dir.join(n)).collect(),
    })
}

/// Run the configured suite and write its artifacts.
pub fn run_command(resolved: &ResolvedConfig) -> Result<(SuiteReport, OutputBundle)> {
    let staging = prepare_staging(&resolved.out_dir)?;
    let report = mfcv::harness::run_suite(&resolved.experiments)?;
    let bundle = write_bundle(staging, &resolved.out_dir, resolved, &report)?;
    Ok((report, bundle))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_significant_digits_and_lossless() {
        for v in [550.0, 0.1, -3.3223680114155156, 1e-300, std::f64::consts::PI] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s}");
            let mantissa = s.split('e').next().unwrap();
            let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
            assert_eq!(digits, 17, "{s}");
        }
    }

    #[test]
    fn trace_header_layout_is_pinned() {
        assert_eq!(
            trace_header(2),
            "iteration,batch_index,x_0,x_1,s,y,query_cost,cumulative_cost,rmse,fallback_flag"
        );
    }
}
