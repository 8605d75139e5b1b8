//! End-to-end artifact tests: bundle layout, config echo round trip, CSV
//! schema and rerun reproducibility.

use mfcv_cli::config::{parse_config, resolve, FileConfig, Overrides};
use mfcv_cli::output::run_command;

fn tiny_config(out: &str) -> FileConfig {
    toml::from_str(&format!(
        r#"
benchmark = "multimodal"
seed = 31
strategies = ["sobol"]
iterations = 3
repetitions = 2
n_seed = 8
n_test = 10
out = "{out}"

[train]
restarts = 2
max_evals_per_restart = 60

[acquisition]
fantasy_samples = 8
inner_opt_restarts = 1
candidate_grid_size = 16
"#
    ))
    .unwrap()
}

#[test]
fn bundle_contains_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bundle");
    let resolved = resolve(tiny_config(&out.display().to_string())).unwrap();
    let (report, bundle) = run_command(&resolved).unwrap();

    assert_eq!(report.runs.len(), 2);
    assert_eq!(bundle.trace_paths.len(), 2);
    for p in &bundle.trace_paths {
        assert!(p.exists(), "{p:?} missing");
        let text = std::fs::read_to_string(p).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "iteration,batch_index,x_0,x_1,s,y,query_cost,cumulative_cost,rmse,fallback_flag"
        );
        assert_eq!(lines.count(), 3);
    }
    assert!(bundle.summary_path.exists());
    assert!(bundle.fidelity_hist_path.exists());
    assert!(bundle.config_echo_path.exists());
    for p in &bundle.plot_paths {
        assert!(p.exists());
        let svg = std::fs::read_to_string(p).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    // The echoed config parses back to the identical resolved config.
    let echoed = parse_config(Some(&bundle.config_echo_path), &Overrides::default()).unwrap();
    assert_eq!(echoed, resolved);

    // Summary has one block per strategy present.
    let summary = std::fs::read_to_string(&bundle.summary_path).unwrap();
    assert!(summary.starts_with("strategy,cost,mean_rmse,std_rmse"));
    assert!(summary.lines().skip(1).all(|l| l.starts_with("sobol,")));
}

#[test]
fn rerun_reproduces_traces_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    let resolved_a = resolve(tiny_config(&out_a.display().to_string())).unwrap();
    let resolved_b = resolve(tiny_config(&out_b.display().to_string())).unwrap();
    let (_, bundle_a) = run_command(&resolved_a).unwrap();
    let (_, bundle_b) = run_command(&resolved_b).unwrap();
    for (pa, pb) in bundle_a.trace_paths.iter().zip(&bundle_b.trace_paths) {
        let a = std::fs::read(pa).unwrap();
        let b = std::fs::read(pb).unwrap();
        assert_eq!(a, b, "trace differs between identical runs");
    }
}

#[test]
fn existing_bundle_is_replaced_but_foreign_dirs_are_protected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bundle");
    let resolved = resolve(tiny_config(&out.display().to_string())).unwrap();
    run_command(&resolved).unwrap();
    // Re-running over a previous bundle succeeds.
    run_command(&resolved).unwrap();
    // A directory that is not a bundle is refused.
    let foreign = tmp.path().join("precious");
    std::fs::create_dir_all(foreign.join("data")).unwrap();
    let mut cfg = tiny_config(&foreign.display().to_string());
    cfg.iterations = 1;
    cfg.repetitions = 1;
    let resolved = resolve(cfg).unwrap();
    assert!(run_command(&resolved).is_err());
    assert!(foreign.join("data").exists());
}
