//! End-to-end harness tests: experiment runs, artifacts, determinism, and
//! the CLI binary surface.

use pricenet::mathcore::ActivationKind;
use pricenet::nn::{count_params, InitKind, LayerKind, NetworkSpec};
use pricenet::sampling::ProblemKind;
use pricenet_harness::{
    report, run_experiment, ExperimentConfig, ReportFormat,
};
use std::path::Path;
use std::process::Command;

fn tiny_cfg(dir: &Path) -> ExperimentConfig {
    let spec = NetworkSpec {
        input_dim: 4,
        layers: 2,
        nodes: 8,
        kind: LayerKind::Highway,
        hidden_act: ActivationKind::Tanh,
        gate_act: ActivationKind::Tanh,
        init: InitKind::GlorotNormal,
    };
    let mut cfg = ExperimentConfig::new("Tiny Highway", ProblemKind::BsPrice, spec);
    cfg.n_samples = 400;
    cfg.n_test = 100;
    cfg.train.epochs = 2;
    cfg.train.learning_rate = 1e-4;
    cfg.out_dir = Some(dir.to_path_buf());
    cfg
}

#[test]
fn experiment_round_trip_and_determinism() {
    let dir = std::env::temp_dir().join(format!("pricenet_exp_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = tiny_cfg(&dir);

    let (rec1, hist1) = run_experiment(&cfg).unwrap();
    let (rec2, hist2) = run_experiment(&cfg).unwrap();

    // identical seeds: identical MSE and loss curves; wall clock may differ
    assert_eq!(rec1.test_mse.to_bits(), rec2.test_mse.to_bits());
    assert_eq!(hist1.train_loss, hist2.train_loss);
    assert_eq!(hist1.val_loss, hist2.val_loss);
    assert_eq!(rec1.parameters, count_params(&cfg.spec));

    // artifacts exist
    assert!(dir.join("tiny_highway.model.txt").exists());
    assert!(dir.join("tiny_highway.history.csv").exists());
    assert!(dir.join("tiny_highway.record.csv").exists());

    // saved model reloads and re-evaluates to the recorded MSE
    let (spec, params) = pricenet::nn::read_model(&dir.join("tiny_highway.model.txt")).unwrap();
    assert_eq!(spec, cfg.spec);
    let (_, _, test_g) = pricenet_harness::experiment::prepare_data(&cfg).unwrap();
    let mse = pricenet::optim::evaluate(&spec, &params, &test_g).unwrap();
    assert_eq!(mse.to_bits(), rec1.test_mse.to_bits());

    // history csv has header + one row per epoch
    let hist_text = std::fs::read_to_string(dir.join("tiny_highway.history.csv")).unwrap();
    let rows: Vec<&str> = hist_text.lines().collect();
    assert!(rows[0].starts_with('#'));
    assert_eq!(rows[1], "epoch,train_loss,val_loss,seconds");
    assert_eq!(rows.len(), 2 + cfg.train.epochs);

    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn records_report_round_trip() {
    let dir = std::env::temp_dir().join(format!("pricenet_rep_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = tiny_cfg(&dir);
    let (rec, _) = run_experiment(&cfg).unwrap();

    let paths = report(std::slice::from_ref(&rec), ReportFormat::Table, &dir.join("records")).unwrap();
    let parsed = pricenet_harness::parse_records_csv(&paths[1]).unwrap();
    assert_eq!(parsed.len(), 1);
    assert_eq!(parsed[0].model, rec.model);
    assert_eq!(parsed[0].parameters, rec.parameters);
    assert_eq!(parsed[0].test_mse.to_bits(), rec.test_mse.to_bits());
    std::fs::remove_dir_all(&dir).ok();
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pricenet"))
}

#[test]
fn cli_generate_is_byte_identical_and_loadable() {
    let dir = std::env::temp_dir().join(format!("pricenet_cli_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out1 = dir.join("a.csv");
    let out2 = dir.join("b.csv");
    for out in [&out1, &out2] {
        let status = cli()
            .args(["generate", "--problem", "bs", "--n", "100", "--seed", "7"])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b, "same seed must give byte-identical files");

    let grid = pricenet::sampling::read_dataset(&out1).unwrap();
    assert_eq!(grid.len(), 100);
    assert_eq!(grid.problem, ProblemKind::BsPrice);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cli_train_and_evaluate() {
    let dir = std::env::temp_dir().join(format!("pricenet_cli_tr_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut cfg = tiny_cfg(&dir);
    cfg.name = "CLI Highway".into();
    let cfg_path = dir.join("exp.cfg");
    cfg.write_file(&cfg_path).unwrap();

    let output = cli().args(["train", "--config"]).arg(&cfg_path).output().unwrap();
    assert!(
        output.status.success(),
        "train failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("test MSE"), "{stdout}");

    // generate a test set and evaluate the saved model on it
    let data = dir.join("test.csv");
    assert!(cli()
        .args(["generate", "--problem", "bs", "--n", "50", "--seed", "9"])
        .arg("--out")
        .arg(&data)
        .status()
        .unwrap()
        .success());
    let output = cli()
        .args(["evaluate", "--model"])
        .arg(dir.join("cli_highway.model.txt"))
        .arg("--dataset")
        .arg(&data)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(String::from_utf8_lossy(&output.stdout).contains("MSE"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cli_oracle_params_reports_documented_discrepancy() {
    let output = cli().args(["oracle", "--check", "params"]).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("PASS"), "{stdout}");
    // the published-vs-formula parameter count gap must be reported
    assert!(stdout.contains("33459") || stdout.contains("33,459"), "{stdout}");
    assert!(stdout.contains("158"), "{stdout}");
}

#[test]
fn cli_rejects_bad_flags() {
    let output = cli().args(["suite", "--name", "bogus", "--problem", "bs"]).output().unwrap();
    assert!(!output.status.success());
    let output = cli().args(["oracle", "--check", "bogus"]).output().unwrap();
    assert!(!output.status.success());
    let output = cli().args(["nonsense"]).output().unwrap();
    assert!(!output.status.success());
}
