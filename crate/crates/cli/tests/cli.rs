mod common;

use common::*;
use msumma::{parse_problem, run, Command as Cmd, Flags};

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn heat_verdict_directions() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("heat.msp");
    let o = msumma(&["verdict", p.to_str().unwrap(), "--directions", "0,1.57,3.14", "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let verdicts: Vec<&str> = rep["verdicts"].as_array().unwrap().iter().map(|v| v["verdict"].as_str().unwrap()).collect();
    assert_eq!(verdicts, ["singular", "summable", "summable"]);
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("run_record.json").exists());
}

#[test]
fn heat_gevrey_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("heat.msp");
    let o = msumma(&["gevrey", p.to_str().unwrap(), "--json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let first = rows[0]["estimate"]["order_hat"].as_f64().unwrap();
    assert!((first - 1.0).abs() < 0.05, "{first}");
    let sup = rows[1]["estimate"]["order_hat"].as_f64().unwrap();
    assert!((sup - 1.0).abs() < 0.05, "{sup}");
}

#[test]
fn solve_is_byte_identical() {
    let p = problem("two_level.msp");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = msumma(&["solve", p.to_str().unwrap()], d.path());
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["solution.bis", "run_record.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn report_bundle_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("heat.msp");
    let o = msumma(&["report", p.to_str().unwrap(), "--t", "0.05i", "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    for f in ["bundle.json", "coefficients.csv", "poles.csv", "growth.csv", "verdicts.csv", "run_record.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let bundle: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("bundle.json")).unwrap()).unwrap();
    assert!(schema_errors(&validator(), &bundle["summability"]).is_empty());
    let v = bundle["resummation"]["value"].as_array().unwrap();
    assert!((v[0].as_f64().unwrap() - 0.976155).abs() < 1e-5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.msp");
    std::fs::write(&bad, "equation: L - ;\n").unwrap();
    assert_eq!(msumma(&["verdict", bad.to_str().unwrap()], dir.path()).status.code(), Some(2));

    std::fs::write(&bad, "equation: L^2 - Z;\ndata: [1];\n").unwrap();
    let o = msumma(&["solve", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("add 1 more"));

    let heat = problem("heat.msp");
    let o = msumma(&["resum", heat.to_str().unwrap(), "--t", "0.05"], dir.path());
    assert_eq!(o.status.code(), Some(4));

    let missing = dir.path().join("missing.msp");
    assert_ne!(msumma(&["solve", missing.to_str().unwrap()], dir.path()).status.code(), Some(0));
}

#[test]
fn seed_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("heat.msp");
    let o = std::process::Command::new(env!("CARGO_BIN_EXE_msumma"))
        .args(["verdict", p.to_str().unwrap(), "--directions", "1.57"])
        .current_dir(dir.path())
        .env("MSUMMA_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let rec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("run_record.json")).unwrap()).unwrap();
    assert_eq!(rec["seed"], 7);
    assert_eq!(rec["input_hash"].as_str().unwrap().len(), 64);

    let o = std::process::Command::new(env!("CARGO_BIN_EXE_msumma"))
        .args(["verdict", p.to_str().unwrap()])
        .current_dir(dir.path())
        .env("MSUMMA_SEED", "seven")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn corpus_reports_match_schema() {
    let v = validator();
    for p in corpus() {
        let text = std::fs::read_to_string(&p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let flags = Flags {
            out: dir.path().to_path_buf(),
            ..Flags::default()
        };
        let out = run(Cmd::Verdict, &text, &flags).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let rep: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        let errs = schema_errors(&v, &rep);
        assert!(errs.is_empty(), "{}: {errs:?}", p.display());
        assert!(out.files.iter().any(|f| f.ends_with("report.json")));
    }
}

#[test]
fn schema_rejects_tampered_report() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(problem("heat.msp")).unwrap();
    let flags = Flags {
        out: dir.path().to_path_buf(),
        directions: Some(vec![0.0]),
        ..Flags::default()
    };
    run(Cmd::Verdict, &text, &flags).unwrap();
    let mut rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    rep["verdicts"][0]["verdict"] = "maybe".into();
    assert!(!schema_errors(&validator(), &rep).is_empty());
}

#[test]
fn corpus_round_trips_through_printer() {
    for p in corpus() {
        let text = std::fs::read_to_string(&p).unwrap();
        let pf = parse_problem(&text).unwrap();
        assert_eq!(parse_problem(&pf.to_string()).unwrap(), pf, "{}", p.display());
    }
}

#[test]
fn malformed_positions() {
    let cases = malformed();
    assert_eq!(cases.len(), 10);
    for (text, line, column) in cases {
        let e = parse_problem(&text).expect_err(&text);
        assert_eq!((e.line, e.column), (line, column), "{text:?}: {e}");
    }
}
