use std::fs;

use rfauth::attacker::{FoolingCurve, IterationRecord};
use rfauth::harness::*;
use rfauth::impairments::ChannelKind;

/// A configuration small enough for CI: short packets, tiny networks.
pub fn tiny_config(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        experiment: kind,
        n_authorized: 3,
        n_outliers: 3,
        n_per_tx: 30,
        epochs: 2,
        snr_list: vec![20.0],
        epsilon_list: vec![0.2],
        channel_kinds: vec![ChannelKind::Awgn],
        seeds: vec![7],
        budget: 5,
        transfer_eval_packets: 10,
        ..ExperimentConfig::default()
    };
    cfg.link.packet_symbols = 32;
    cfg.discriminator.feature_filters = vec![4];
    cfg.discriminator.classifier_hidden = vec![8];
    cfg.attack.hidden = 8;
    cfg.attack.eval_packets = 10;
    cfg.attack.pretrain_packets = 4;
    cfg.attack.pretrain_epochs = 2;
    cfg
}

fn lines(path: &std::path::Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

fn quiet(_: &str) {}

#[test]
fn noiseless_smoke_run_emits_one_row_per_iteration() {
    let mut cfg = tiny_config(ExperimentKind::SnrSweep);
    cfg.snr_list = vec![f64::INFINITY];
    let results = run_snr_sweep(&cfg, &mut quiet).unwrap();
    assert_eq!(results.cells.len(), 1);
    let cell = &results.cells[0];
    assert_eq!(cell.curve.len(), 5);
    assert!(!cell.converged);
    let dir = tempfile::tempdir().unwrap();
    export_csv(&results, dir.path()).unwrap();
    let h = lines(&dir.path().join(HISTORY_FILE));
    assert_eq!(h.len(), 6);
    assert!(h[1].contains(",inf,"));
    let summary = read_summary(&dir.path().join(SUMMARY_FILE)).unwrap();
    assert_eq!(summary[0].snr_db, f64::INFINITY);
    assert_eq!(summary[0].iterations, 5);
}

#[test]
fn feedback_counter_matches_budget_arithmetic() {
    let cfg = tiny_config(ExperimentKind::Single);
    let results = run_single(&cfg, &mut quiet).unwrap();
    let curve = &results.cells[0].curve;
    for r in &curve.records {
        assert_eq!(r.feedback_count, 32 * r.iteration as u64);
        assert_eq!(r.updates, r.iteration as u64);
    }
    for w in curve.records.windows(2) {
        assert!(w[1].iteration > w[0].iteration);
        assert!(w[1].feedback_count >= w[0].feedback_count);
    }
}

#[test]
fn sweeps_are_deterministic_to_the_byte() {
    let mut cfg = tiny_config(ExperimentKind::EpsilonSweep);
    cfg.epsilon_list = vec![0.0, 0.3];
    cfg.budget = 3;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    export_csv(&run_experiment(&cfg, &mut quiet).unwrap(), a.path()).unwrap();
    export_csv(&run_experiment(&cfg, &mut quiet).unwrap(), b.path()).unwrap();
    for f in [HISTORY_FILE, SUMMARY_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn zero_epsilon_leaves_fooling_rate_unchanged() {
    let mut cfg = tiny_config(ExperimentKind::EpsilonSweep);
    cfg.epsilon_list = vec![0.0];
    let results = run_epsilon_sweep(&cfg, &mut quiet).unwrap();
    let cell = &results.cells[0];
    // With ε = 0 every transmission is the undistorted packet, so each
    // evaluation is a draw of the initial acceptance rate.
    assert!(cell.curve.records.iter().all(|r| (0.0..=1.0).contains(&r.fooling_rate)));
    assert!(cell.curve.records.iter().all(|r| r.mean_reward >= 0.0 && r.mean_reward <= 1.0));
}

#[test]
fn transferability_matrix_shape() {
    let cfg = tiny_config(ExperimentKind::Transferability);
    let results = run_transferability(&cfg, &mut quiet).unwrap();
    assert_eq!(results.transfers.len(), 1);
    let m = &results.transfers[0];
    assert_eq!(m.train_ids, vec!["disc_1", "disc_2"]);
    assert_eq!(m.test_ids, vec!["disc_1", "disc_2", "dclass_1", "dclass_2", "ova_1", "ova_2"]);
    assert!(m.entries.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    let dir = tempfile::tempdir().unwrap();
    export_csv(&results, dir.path()).unwrap();
    let t = lines(&dir.path().join(TRANSFER_FILE));
    assert_eq!(t[0], "seed,train_id,test_id,fooling_rate");
    assert_eq!(t.len(), 13);
    let rows = read_transfer(&dir.path().join(TRANSFER_FILE)).unwrap();
    assert_eq!(rows.len(), 12);
    let report = render_report(dir.path()).unwrap();
    assert!(report.contains("dclass_2"));
}

fn cell_with(rates: &[f64]) -> CellResult {
    CellResult {
        key: CellKey {
            experiment: ExperimentKind::Single,
            seed: 1,
            channel: ChannelKind::Awgn,
            snr_db: 20.0,
            epsilon: 0.2,
            target: "disc_1".into(),
        },
        heldout_accuracy: 0.987654321,
        initial_fooling: 0.0,
        final_fooling: 0.123456789,
        converged: false,
        convergence_updates: rates.len() as u64,
        curve: FoolingCurve {
            initial: 0.0,
            records: rates
                .iter()
                .enumerate()
                .map(|(i, &r)| IterationRecord {
                    iteration: i + 1,
                    fooling_rate: r,
                    feedback_count: 256 * (i as u64 + 1),
                    updates: i as u64 + 1,
                    mean_reward: r / 3.0,
                    wall_seconds: 0.5 * i as f64,
                })
                .collect(),
        },
        wall_seconds: 12.5,
    }
}

#[test]
fn three_record_curve_gives_four_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    write_history(&path, &[cell_with(&[0.1, 0.2, 0.3])]).unwrap();
    let l = lines(&path);
    assert_eq!(l.len(), 4);
    assert!(l[0].starts_with("experiment,seed,channel,snr_db,epsilon,target,iteration"));
    assert!(!l[0].contains("wall"));
}

#[test]
fn summary_round_trips_to_six_digits() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let cell = cell_with(&[0.5]);
    write_summary(&path, std::slice::from_ref(&cell)).unwrap();
    let rows = read_summary(&path).unwrap();
    let close = |a: f64, b: f64| ((a - b) / b).abs() < 5e-6;
    assert!(close(rows[0].heldout_accuracy, cell.heldout_accuracy));
    assert!(close(rows[0].final_fooling, cell.final_fooling));
    assert_eq!(rows[0].feedback_count, 256);
}

#[test]
fn timing_goes_to_log_not_csv() {
    let dir = tempfile::tempdir().unwrap();
    let results = ExperimentResults { cells: vec![cell_with(&[0.1])], transfers: vec![] };
    export_csv(&results, dir.path()).unwrap();
    let log = fs::read_to_string(dir.path().join(TIMING_FILE)).unwrap();
    assert!(log.contains("12.5s"));
    assert!(!fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap().contains("12.5"));
    assert!(export_csv(&ExperimentResults::default(), dir.path()).is_err());
}

#[test]
fn export_reports_unwritable_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let err = write_summary(&blocker.join("s.csv"), &[cell_with(&[0.1])]).unwrap_err();
    assert!(err.to_string().contains("file"));
}
