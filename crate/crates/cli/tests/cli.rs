use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tulik_core::inference::Method;
use tulik_core::io::{load_params, read_report, save_params, DatasetFile, ReportLine};
use tulik_core::model::{KernelParams, KernelTensor, TimeGrid};
use tulik_core::predict::{no_event_probability, step_probabilities};
use tulik_core::simulate::simulate_dataset;
use tulik_core::ModelParams;

fn tulik(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tulik")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = tulik(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

/// Exit code and the parsed single-line stderr error.
fn fails(args: &[&str]) -> (i32, serde_json::Value) {
    let out = tulik(args);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "stderr: {stderr}");
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).expect("stderr is JSON");
    let code = out.status.code().unwrap();
    assert_eq!(err["exit_code"], code);
    (code, err)
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }
}

fn small_params() -> ModelParams {
    let g = TimeGrid::new(0.5, 10, 3).unwrap();
    let k = KernelTensor::from_fn(g, 2, |i, t, a, b| 0.05 + 0.02 * ((i + t) as f64 + (a * 2 + b) as f64).cos());
    ModelParams::new(vec![0.3, 0.2], KernelParams::TimeVarying(k)).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn simulate_writes_preset_shape_with_truth() {
    let d = Dir::new();
    ok(&["simulate", "--preset", "paper-timeonly-small", "--num", "40", "--seed", "7", "--out", &d.s("a.bin")]);
    let file = DatasetFile::load(&d.path("a.bin")).unwrap();
    assert_eq!((file.grid.n(), file.grid.memory(), file.nodes), (32, 8, 1));
    assert_eq!(file.trajectories.len(), 40);
    assert!(file.truth.is_some());
    assert_eq!(file.notes["source"], "paper-timeonly-small");
    assert_eq!(file.notes["quadrature_order"], "8");

    ok(&["simulate", "--preset", "paper-network", "--num", "3", "--seed", "7", "--out", &d.s("n.bin")]);
    let net = DatasetFile::load(&d.path("n.bin")).unwrap();
    assert_eq!((net.nodes, net.edges.len()), (5, 8));
}

#[test]
fn simulate_zero_trajectories_and_determinism() {
    let d = Dir::new();
    ok(&["simulate", "--preset", "paper-stationary", "--num", "0", "--seed", "1", "--out", &d.s("empty.bin")]);
    let empty = DatasetFile::load(&d.path("empty.bin")).unwrap();
    assert!(empty.trajectories.is_empty());
    assert_eq!((empty.grid.n(), empty.grid.memory()), (32, 16));

    for name in ["x.bin", "y.bin"] {
        ok(&["simulate", "--preset", "paper-network", "--num", "25", "--seed", "9", "--out", &d.s(name)]);
    }
    ok(&["simulate", "--preset", "paper-network", "--num", "25", "--seed", "10", "--out", &d.s("z.bin")]);
    let read = |n: &str| std::fs::read(d.path(n)).unwrap();
    assert_eq!(read("x.bin"), read("y.bin"));
    assert_ne!(read("x.bin"), read("z.bin"));
}

#[test]
fn simulate_from_parameter_file_matches_the_library() {
    let d = Dir::new();
    let p = small_params();
    save_params(&d.path("p.txt"), &p).unwrap();
    ok(&["simulate", "--params", &d.s("p.txt"), "--num", "30", "--seed", "4", "--out", &d.s("d.bin")]);
    let file = DatasetFile::load(&d.path("d.bin")).unwrap();
    assert_eq!(file.trajectories, simulate_dataset(&p, 30, 4).unwrap());
    assert_eq!(file.truth.as_ref(), Some(&p));
}

fn epochs(report: &[ReportLine]) -> Vec<f64> {
    report
        .iter()
        .filter_map(|l| match l {
            ReportLine::Epoch { nll, .. } => Some(*nll),
            ReportLine::Summary { .. } => None,
        })
        .collect()
}

fn summary(report: &[ReportLine]) -> (Method, tulik_core::inference::TrainConfig) {
    match report.last().unwrap() {
        ReportLine::Summary { metadata, config, .. } => (metadata.method, config.clone()),
        ReportLine::Epoch { .. } => panic!("report must end with a summary"),
    }
}

#[test]
fn train_is_deterministic_and_reports_each_epoch() {
    let d = Dir::new();
    ok(&["simulate", "--preset", "paper-timeonly-small", "--num", "800", "--seed", "1", "--out", &d.s("d.bin")]);
    std::fs::write(d.path("c.cfg"), "max_epochs = 8\nbatch_size = 100\n").unwrap();
    for run in ["1", "2"] {
        ok(&[
            "train",
            "--data",
            &d.s("d.bin"),
            "--config",
            &d.s("c.cfg"),
            "--out",
            &d.s(&format!("p{run}.txt")),
            "--report",
            &d.s(&format!("r{run}.jsonl")),
        ]);
    }
    let text = |n: &str| std::fs::read_to_string(d.path(n)).unwrap();
    assert_eq!(text("p1.txt"), text("p2.txt"));
    assert_eq!(text("r1.jsonl"), text("r2.jsonl"));

    let report = read_report(std::fs::File::open(d.path("r1.jsonl")).map(std::io::BufReader::new).unwrap()).unwrap();
    let nll = epochs(&report);
    assert_eq!(nll.len(), 8);
    assert!(nll[7] < nll[0], "NLL {nll:?}");
    let fitted = load_params(&d.path("p1.txt")).unwrap();
    assert_eq!(fitted.grid().n(), 32);
}

#[test]
fn methods_differ_only_in_field_selection() {
    let d = Dir::new();
    ok(&["simulate", "--preset", "paper-timeonly-small", "--num", "200", "--seed", "1", "--out", &d.s("d.bin")]);
    std::fs::write(d.path("c.cfg"), "max_epochs = 2\nbatch_size = 100\n").unwrap();
    let mut configs = Vec::new();
    for m in ["vi", "gd"] {
        let report = d.s(&format!("{m}.jsonl"));
        ok(&[
            "train",
            "--data",
            &d.s("d.bin"),
            "--config",
            &d.s("c.cfg"),
            "--method",
            m,
            "--out",
            &d.s("p.txt"),
            "--report",
            &report,
        ]);
        let lines = read_report(std::io::BufReader::new(std::fs::File::open(&report).unwrap())).unwrap();
        configs.push(summary(&lines));
    }
    assert_eq!((configs[0].0, configs[1].0), (Method::Vi, Method::Gd));
    // the small preset uses a different schedule per method; everything else agrees
    let mut gd = configs[1].1.clone();
    gd.method = Method::Vi;
    gd.lr_schedule = configs[0].1.lr_schedule.clone();
    assert_eq!(gd, configs[0].1);
}

#[test]
fn step_predictions_match_the_library_bit_for_bit() {
    let d = Dir::new();
    let p = small_params();
    save_params(&d.path("p.txt"), &p).unwrap();
    ok(&["simulate", "--params", &d.s("p.txt"), "--num", "6", "--seed", "2", "--out", &d.s("d.bin")]);
    ok(&["predict", "--params", &d.s("p.txt"), "--data", &d.s("d.bin"), "--mode", "step", "--out", &d.s("s.csv")]);
    let rows = csv_rows(&d.path("s.csv"));
    let data = DatasetFile::load(&d.path("d.bin")).unwrap();
    assert_eq!(rows.len(), 6 * 10 * 2);
    for row in rows {
        let (m, t, u): (usize, usize, usize) =
            (row[0].parse().unwrap(), row[1].parse().unwrap(), row[2].parse().unwrap());
        let want = step_probabilities(&p, &data.trajectories[m]).unwrap()[(t - 1) * 2 + u];
        assert_eq!(row[3].parse::<f64>().unwrap().to_bits(), want.to_bits());
        assert_eq!(&row[4], "");
    }
}

#[test]
fn interval_rows_partition_the_window() {
    let d = Dir::new();
    let p = small_params();
    save_params(&d.path("p.txt"), &p).unwrap();
    ok(&["simulate", "--params", &d.s("p.txt"), "--num", "5", "--seed", "3", "--out", &d.s("d.bin")]);
    let args = [
        "predict",
        "--params",
        &d.s("p.txt"),
        "--data",
        &d.s("d.bin"),
        "--mode",
        "interval",
        "--from",
        "3",
        "--to",
        "8",
    ];
    ok(&[&args[..], &["--out", &d.s("i.csv")]].concat());
    let rows = csv_rows(&d.path("i.csv"));
    assert_eq!(rows.len(), 5 * 3);
    let data = DatasetFile::load(&d.path("d.bin")).unwrap();
    for (m, chunk) in rows.chunks(3).enumerate() {
        assert_eq!(&chunk[2][1], "none");
        let total: f64 = chunk.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let none = no_event_probability(&p, &data.trajectories[m], 3, 8).unwrap();
        assert_eq!(chunk[2][2].parse::<f64>().unwrap(), none);
    }
    ok(&[&args[..], &["--node", "1", "--out", &d.s("one.csv")]].concat());
    let one = csv_rows(&d.path("one.csv"));
    assert_eq!(one.len(), 5);
    assert_eq!(one[0][2], rows[1][2]);
}

#[test]
fn infeasible_trajectories_get_error_rows() {
    let d = Dir::new();
    let g = TimeGrid::new(0.5, 10, 3).unwrap();
    let bad =
        ModelParams::new(vec![0.3], KernelParams::TimeVarying(KernelTensor::from_fn(g, 1, |_, _, _, _| -1.0))).unwrap();
    let good = ModelParams::zero_kernel(g, 1, 0.5, false).unwrap();
    save_params(&d.path("bad.txt"), &bad).unwrap();
    save_params(&d.path("good.txt"), &good).unwrap();
    ok(&["simulate", "--params", &d.s("good.txt"), "--num", "20", "--seed", "1", "--out", &d.s("d.bin")]);
    ok(&["predict", "--params", &d.s("bad.txt"), "--data", &d.s("d.bin"), "--out", &d.s("s.csv")]);
    let rows = csv_rows(&d.path("s.csv"));
    let data = DatasetFile::load(&d.path("d.bin")).unwrap();
    let errors: Vec<_> = rows.iter().filter(|r| !r[4].is_empty()).collect();
    let infeasible = data.trajectories.iter().filter(|t| step_probabilities(&bad, t).is_err()).count();
    assert!(infeasible > 0);
    assert_eq!(errors.len(), infeasible);
    assert!(errors.iter().all(|r| r[1].is_empty() && r[3].is_empty() && r[4].contains("infeasible")));
}

fn eval_json(d: &Dir, params: &str, data: &str, extra: &[&str]) -> serde_json::Value {
    let out = d.s("eval.json");
    ok(&[&["eval", "--params", params, "--data", data, "--out", &out][..], extra].concat());
    serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap()
}

#[test]
fn eval_against_truth() {
    let d = Dir::new();
    let p = small_params();
    save_params(&d.path("truth.txt"), &p).unwrap();
    ok(&["simulate", "--params", &d.s("truth.txt"), "--num", "20", "--seed", "5", "--out", &d.s("d.bin")]);

    let same = eval_json(&d, &d.s("truth.txt"), &d.s("d.bin"), &[]);
    for part in ["mu", "kernel", "prediction"] {
        for norm in ["l1", "l2", "linf"] {
            assert_eq!(same["truth"][part][norm], 0.0, "{part} {norm}");
        }
    }

    let (mu, mut k) = p.clone().into_parts();
    k.scale(2.0);
    let doubled = ModelParams::new(mu.iter().map(|m| 2.0 * m).collect(), k).unwrap();
    save_params(&d.path("double.txt"), &doubled).unwrap();
    let twice = eval_json(&d, &d.s("double.txt"), &d.s("d.bin"), &["--truth", &d.s("truth.txt")]);
    for part in ["mu", "kernel"] {
        for norm in ["l1", "l2", "linf"] {
            let v = twice["truth"][part][norm].as_f64().unwrap();
            assert!((v - 1.0).abs() < 1e-12, "{part} {norm}: {v}");
        }
    }

    let classified = eval_json(&d, &d.s("truth.txt"), &d.s("d.bin"), &["--target-node", "1"]);
    let c = &classified["classification"];
    assert_eq!(c["node"], 1);
    let (tpr, tnr, ba) = (c["tpr"].as_f64().unwrap(), c["tnr"].as_f64().unwrap(), c["ba"].as_f64().unwrap());
    assert_eq!(ba, 0.5 * (tpr + tnr));
}

#[test]
fn eval_without_truth_reports_fit_only() {
    let d = Dir::new();
    let p = small_params();
    save_params(&d.path("p.txt"), &p).unwrap();
    let file = DatasetFile::new(*p.grid(), 2, simulate_dataset(&p, 10, 1).unwrap()).unwrap();
    file.save(&d.path("bare.bin")).unwrap();
    let v = eval_json(&d, &d.s("p.txt"), &d.s("bare.bin"), &[]);
    assert!(v["truth"].is_null());
    assert!(v["fit"]["mean_nll"].as_f64().unwrap() > 0.0);
    assert_eq!(v["trajectories"], 10);
}

#[test]
fn aggregate_reports_mean_and_sample_deviation() {
    let d = Dir::new();
    std::fs::write(d.path("a.json"), r#"{"truth": {"kernel": {"l2": 0.1}}, "n": 4, "tag": "x"}"#).unwrap();
    std::fs::write(d.path("b.json"), r#"{"truth": {"kernel": {"l2": 0.3}}, "n": 4, "tag": "y"}"#).unwrap();
    ok(&["aggregate", &d.s("a.json"), &d.s("b.json"), "--out", &d.s("agg.json")]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path("agg.json")).unwrap()).unwrap();
    assert_eq!(v["runs"], 2);
    let k = &v["metrics"]["truth.kernel.l2"];
    assert!((k["mean"].as_f64().unwrap() - 0.2).abs() < 1e-15);
    assert!((k["std"].as_f64().unwrap() - 0.02f64.sqrt()).abs() < 1e-15);
    assert_eq!(v["metrics"]["n"]["std"], 0.0);

    std::fs::write(d.path("c.json"), r#"{"other": 1}"#).unwrap();
    let (code, _) = fails(&["aggregate", &d.s("a.json"), &d.s("c.json"), "--out", &d.s("agg.json")]);
    assert_eq!(code, 3);
}

#[test]
fn error_paths_use_exit_codes_and_json() {
    let d = Dir::new();
    let (code, err) = fails(&["train", "--data", &d.s("missing.bin"), "--out", &d.s("p.txt")]);
    assert_eq!((code, err["error"].as_str().unwrap()), (2, "usage"));

    assert_eq!(fails(&["simulate", "--preset", "paper-nope", "--num", "1", "--seed", "1", "--out", &d.s("x")]).0, 2);
    assert_eq!(fails(&["frobnicate"]).0, 2);
    assert_eq!(fails(&["predict", "--params", "p", "--data", "d", "--mode", "interval", "--out", "o"]).0, 2);

    std::fs::write(d.path("junk.bin"), b"not a dataset").unwrap();
    assert_eq!(fails(&["train", "--data", &d.s("junk.bin"), "--out", &d.s("p.txt")]).0, 3);

    // parameters on a different grid than the data
    ok(&["simulate", "--preset", "paper-timeonly-small", "--num", "3", "--seed", "1", "--out", &d.s("d.bin")]);
    save_params(&d.path("other.txt"), &small_params()).unwrap();
    assert_eq!(
        fails(&["predict", "--params", &d.s("other.txt"), "--data", &d.s("d.bin"), "--out", &d.s("o.csv")]).0,
        3
    );

    std::fs::write(d.path("bad.cfg"), "learning_rate = 3\n").unwrap();
    assert_eq!(fails(&["train", "--data", &d.s("d.bin"), "--config", &d.s("bad.cfg"), "--out", &d.s("p.txt")]).0, 3);

    // a kernel that drives every intensity negative cannot be simulated
    let g = TimeGrid::new(0.5, 10, 3).unwrap();
    let doomed =
        ModelParams::new(vec![0.5], KernelParams::TimeVarying(KernelTensor::from_fn(g, 1, |_, _, _, _| -5.0))).unwrap();
    save_params(&d.path("doomed.txt"), &doomed).unwrap();
    let (code, err) = fails(&[
        "simulate",
        "--params",
        &d.s("doomed.txt"),
        "--num",
        "200",
        "--seed",
        "1",
        "--max-redraws",
        "0",
        "--out",
        &d.s("x.bin"),
    ]);
    assert_eq!((code, err["error"].as_str().unwrap()), (4, "numeric"));
}

#[test]
fn thread_cap_is_validated() {
    let d = Dir::new();
    let out = Command::new(env!("CARGO_BIN_EXE_tulik"))
        .args(["simulate", "--preset", "paper-timeonly-small", "--num", "2", "--seed", "1", "--out", &d.s("a.bin")])
        .env("TULIK_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_tulik"))
        .args(["simulate", "--preset", "paper-timeonly-small", "--num", "2", "--seed", "1", "--out", &d.s("a.bin")])
        .env("TULIK_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
}
