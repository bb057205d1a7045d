use kakeya_lab::plot::ols;
use kakeya_lab::{emit_plot, run, ExperimentConfig, HarnessError, Subcommand};
use proptest::prelude::*;
use std::path::Path;
use std::process::Command;

const EXE: &str = env!("CARGO_BIN_EXE_kakeya-lab");

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn exit_code(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(EXE).args(args).output().unwrap();
    (out.status.code(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn usage_errors_name_the_key() {
    let cases = [
        (r#"{"delta_list": [], "seed": 1}"#, "delta_list: must not be empty"),
        (r#"{"delta_list": [0.1, 0.2], "seed": 1}"#, "strictly decreasing"),
        (r#"{"delta_list": [0.5, 1.5], "seed": 1}"#, "(0, 1)"),
        (r#"{"delta_list": [0.1], "seed": 1, "trials": 0}"#, "trials"),
        (r#"{"delta_list": [0.1]}"#, "seed"),
        (r#"{"delta_list": [0.1], "seed": 1, "bogus": 3}"#, "bogus"),
        (
            r#"{"delta_list": [0.1], "seed": 1, "settings": [{"kind": "HomogeneousKakeya", "layers": [2, 0]}]}"#,
            "last layer must be nonempty",
        ),
        (r#"{"delta_list": [0.1], "seed": 1, "axioms": {"run": [6]}}"#, "axioms.run"),
    ];
    for (text, needle) in cases {
        match ExperimentConfig::from_json(text) {
            Err(e @ HarnessError::Usage(_)) => {
                assert_eq!(e.exit_code(), 2);
                assert!(e.to_string().contains(needle), "{text}: {e}");
            }
            other => panic!("{text}: expected a usage error, got {other:?}"),
        }
    }
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"delta_list": [], "seed": 1}"#);
    let (code, err) = exit_code(&["dimension", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, Some(2));
    assert!(err.contains("delta_list"));
    let (code, _) = exit_code(&["dimension", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, Some(2));
    let (code, _) = exit_code(&["nonsense", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, Some(2));
    let good = write(dir.path(), "dim.json", r#"{"delta_list": [0.25, 0.125, 0.0625], "seed": 1}"#);
    let out = dir.path().join("out");
    let (code, err) = exit_code(&["dimension", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, Some(0), "{err}");
    assert!(out.join("dimension_report.json").exists());
}

#[test]
fn degenerate_plot_warns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "flat.csv", "delta,count\n0.5,3\n0.5,3\n");
    let svg = std::fs::read_to_string(emit_plot(&csv, "delta", "count", true).unwrap()).unwrap();
    assert!(svg.contains("degenerate fit"));
    assert!(!svg.contains("slope"));
}

#[test]
fn plot_reports_the_slope() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (1..=6).map(|k| format!("{},{}\n", k as f64, (k * k) as f64)).collect();
    let csv = write(dir.path(), "sq.csv", &format!("x,y\n{rows}"));
    let svg_path = emit_plot(&csv, "x", "y", true).unwrap();
    assert_eq!(svg_path, dir.path().join("sq.svg"));
    let svg = std::fs::read_to_string(svg_path).unwrap();
    assert!(svg.contains("slope 2.00"), "{svg}");
    assert!(svg.starts_with("<svg"));
}

#[test]
fn plot_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(dir.path(), "a.csv", "x,y\n1,2\n");
    assert!(matches!(emit_plot(&csv, "x", "z", false), Err(HarnessError::Input(_))));
    let bad = write(dir.path(), "b.csv", "x,y\n1,oops\n");
    assert!(matches!(emit_plot(&bad, "x", "y", false), Err(HarnessError::Input(_))));
    // nonpositive values are dropped from log-log plots with a warning
    let neg = write(dir.path(), "c.csv", "x,y\n1,1\n2,4\n-1,3\n4,16\n");
    let svg = std::fs::read_to_string(emit_plot(&neg, "x", "y", true).unwrap()).unwrap();
    assert!(svg.contains("nonpositive"));
}

#[test]
fn volume_csv_slope_is_the_fitted_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_json(
        r#"{"setting": {"kind": "HomogeneousKakeya", "layers": [1, 1]},
            "delta_list": [0.125, 0.0625, 0.03125, 0.015625], "seed": 3, "trials": 10,
            "axioms": {"run": [1]}}"#,
    )
    .unwrap();
    let rep = run(&cfg, Subcommand::Axioms, dir.path()).unwrap();
    let t_hat = rep.checks[0].values["T"];
    let mut rdr = csv::Reader::from_path(dir.path().join("axioms_0_homogeneouskakeya_volume.csv")).unwrap();
    let pts: Vec<(f64, f64)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse::<f64>().unwrap().ln(), r[1].parse::<f64>().unwrap().ln())
        })
        .collect();
    let (slope, _) = ols(&pts).unwrap();
    assert!((slope - t_hat).abs() < 1e-9, "{slope} vs {t_hat}");
    assert!(rep.outputs.contains(&"axioms_report.json".to_string()));
}

#[test]
fn seed_flag_changes_only_seeded_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b.json", r#"{"setting": {"kind": "EuclideanKakeya", "n": 2}, "delta_list": [0.25, 0.125], "seed": 8}"#);
    let run_with = |seed: &str, tag: &str| {
        let out = dir.path().join(tag);
        let (code, err) = exit_code(&["bush", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(code.is_some_and(|c| c <= 1), "{err}");
        std::fs::read_to_string(out.join("bush_report.json")).unwrap()
    };
    let a = run_with("8", "a");
    let b = run_with("8", "b");
    let c = run_with("9", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(c.contains("\"seed\": 9"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ols_recovers_lines(m in -5.0f64..5.0, b in -5.0f64..5.0, xs in prop::collection::btree_set(-100i32..100, 2..20)) {
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x as f64 / 10.0, m * x as f64 / 10.0 + b)).collect();
        let (sm, sb) = ols(&pts).unwrap();
        prop_assert!((sm - m).abs() < 1e-9 && (sb - b).abs() < 1e-9);
    }

    #[test]
    fn config_roundtrip(seed in any::<u64>(), trials in 1usize..100, k in 3usize..8) {
        let deltas: Vec<f64> = (1..=k).map(|j| 2f64.powi(-(j as i32))).collect();
        let text = serde_json::json!({"delta_list": deltas, "seed": seed, "trials": trials}).to_string();
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        let again = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        prop_assert_eq!(cfg, again);
    }
}
