use std::path::Path;
use std::process::{Command, Output};

use compress_cert::bounds::{
    binomial_approx_bound, binomial_tail_bound, kl_compression_bound, linear_compression_bound_grid, p2l_bound,
    BoundInputs, LambdaGrid,
};
use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compress-cert")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn bound_all_matches_library_calls() {
    let out = cli(&["bound", "--n", "10597", "--m", "92"]);
    let got = stdout_json(&out);
    let inputs = BoundInputs::new(10597, 92, 0.0, 0.01);
    let want = vec![
        kl_compression_bound(&inputs).unwrap(),
        linear_compression_bound_grid(&inputs, 0.5, &LambdaGrid::default()).unwrap().0,
        binomial_approx_bound(&inputs).unwrap(),
        binomial_tail_bound(&inputs).unwrap(),
        p2l_bound(92, 10597, 0.01).unwrap(),
    ];
    assert_eq!(got, serde_json::to_value(&want).unwrap());
}

#[test]
fn bound_single_kind() {
    let got = stdout_json(&cli(&["bound", "--kind", "kl", "--n", "10597", "--m", "92", "--loss", "0", "--delta", "0.01"]));
    let arr = got.as_array().unwrap();
    assert_eq!(arr.len(), 1);
    let v = arr[0]["value"].as_f64().unwrap();
    assert!((v - 0.0505).abs() < 5e-4, "{v}");

    let got = stdout_json(&cli(&["bound", "--kind", "p2l", "--n", "10597", "--m", "92"]));
    let v = got[0]["value"].as_f64().unwrap();
    assert!((0.0099..=0.0109).contains(&v), "{v}");
}

#[test]
fn bound_lossy_all_skips_consistent_only_bounds() {
    let got = stdout_json(&cli(&["bound", "--n", "1000", "--m", "10", "--loss", "0.05"]));
    let kinds: Vec<&str> = got.as_array().unwrap().iter().map(|c| c["kind"].as_str().unwrap()).collect();
    assert!(!kinds.contains(&"p2l"), "{kinds:?}");
    assert!(kinds.contains(&"kl") && kinds.contains(&"linear"));
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    for (args, flag) in [
        (&["bound", "--n", "100", "--m", "5", "--loss", "1.5"][..], "--loss"),
        (&["bound", "--n", "100", "--m", "500"][..], "--m"),
        (&["bound", "--n", "100", "--m", "5", "--delta", "1"][..], "--delta"),
        (&["bound", "--kind", "p2l", "--n", "100", "--m", "5", "--loss", "0.1"][..], "--loss"),
    ] {
        let out = cli(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(flag), "{args:?}");
    }
    assert_eq!(cli(&["bound", "--kind", "nope", "--n", "1", "--m", "0"]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_files_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = cli(&[
        "train", "--task", "regress", "--dataset", "/nonexistent/data.csv", "--learner", "tree", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = cli(&["select", "--trace", "/nonexistent/trace.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn train_classify_writes_traces_report_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = |out: &Path| {
        cli(&[
            "train", "--task", "classify", "--dataset", "synth:classify:n=400,d=2,sep=3", "--learner", "mlp",
            "--hidden", "8", "--lr", "0.01", "--seeds", "1,2", "--out", out.to_str().unwrap(),
        ])
    };
    let out = args(&a);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(args(&b).status.success());
    assert_eq!(read_dir_sorted(&a), read_dir_sorted(&b));

    let report: Value = serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["format"], "compress-cert-report");
    assert_eq!(report["seeds"].as_array().unwrap().len(), 2);
    assert!(report["aggregate"]["kl_bound"]["mean"].as_f64().unwrap() > 0.0);

    let trace = a.join("trace_seed1.csv");
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("iteration,m,complement_loss,kl_bound,binom_bound,p2l_bound,val_loss"));

    for crit in ["min-kl", "final", "min-val"] {
        let row = stdout_json(&cli(&["select", "--trace", trace.to_str().unwrap(), "--criterion", crit]));
        assert!(row["m"].as_u64().is_some(), "{crit}: {row}");
    }
    let bad = cli(&["select", "--trace", trace.to_str().unwrap(), "--criterion", "best"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn train_regress_csv_has_no_p2l_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let mut text = String::from("x1,x2,y\n");
    for i in 0..120 {
        let (x1, x2) = (i as f64 / 10.0, ((i * 7) % 13) as f64);
        text.push_str(&format!("{x1},{x2},{}\n", 2.0 * x1 - x2 + 0.1 * ((i * 3) % 5) as f64));
    }
    std::fs::write(&csv, text).unwrap();
    let out_dir = dir.path().join("out");
    let out = cli(&[
        "train", "--task", "regress", "--dataset", csv.to_str().unwrap(), "--learner", "forest", "--n-estimators",
        "5", "--seeds", "3", "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    let certs = report["seeds"][0]["returned"]["certificates"].as_array().unwrap();
    let kinds: Vec<&str> = certs.iter().map(|c| c["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"kl") && kinds.contains(&"linear"), "{kinds:?}");
    assert!(!kinds.contains(&"p2l") && !kinds.contains(&"binom"), "{kinds:?}");
    assert!(report["seeds"][0]["test_loss"].as_f64().is_some());
}
