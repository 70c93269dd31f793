use std::process::{Command, Output};

use zeta_saddle::cli::{DirectReport, SaddleTableOutput, ValueTableOutput};
use zeta_saddle::sdexp::EvaluationReport;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeta-saddle"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

#[test]
fn eval_both_matches_table_row() {
    let text = ok(&["eval", "--n", "20", "--a", "2", "--sigma", "0.5", "--mode", "both"]);
    let r: EvaluationReport = serde_json::from_str(&text).unwrap();
    let d = r.direct.unwrap();
    assert!((d.re + 0.0085839350).abs() < 1e-10 && (d.im + 0.0372653861).abs() < 1e-10);
    assert!((r.asymptotic.re + 0.00858386).abs() < 2e-8 && (r.asymptotic.im + 0.03726493).abs() < 2e-8);
    assert_eq!(r.m, 7);
    assert!(r.rel_err.is_some() && r.abs_err.is_some());
}

#[test]
fn json_round_trip() {
    for args in [
        vec![
            "eval",
            "--n",
            "50",
            "--a",
            "5",
            "--mode",
            "asymptotic",
            "--format",
            "json",
        ],
        vec!["eval", "--n", "20", "--a", "1", "--trace-classify"],
    ] {
        let text = ok(&args);
        let r: EvaluationReport = serde_json::from_str(&text).unwrap();
        let again: EvaluationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(r, again);
        assert!(r.m >= r.k_star);
        assert_eq!(r.direct.is_some(), r.rel_err.is_some());
    }
}

#[test]
fn asymptotic_mode_reports_saddle_magnitudes() {
    let text = ok(&[
        "eval",
        "--n",
        "50",
        "--a",
        "5",
        "--mode",
        "asymptotic",
        "--format",
        "json",
    ]);
    let r: EvaluationReport = serde_json::from_str(&text).unwrap();
    assert!(r.direct.is_none() && r.rel_err.is_none());
    let i2 = r.per_saddle.iter().find(|t| t.k == 2).unwrap().i_hat;
    assert!((i2 - 0.019205).abs() < 2e-5);
}

#[test]
fn n_zero() {
    let out = run(&["eval", "--n", "0", "--a", "1", "--sigma", "2", "--mode", "direct"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["eval", "--n", "0", "--a", "1", "--mode", "asymptotic"]);
    assert_eq!(out.status.code(), Some(1));
    let text = ok(&["eval", "--n", "0", "--s-real", "2", "--s-imag", "0", "--mode", "direct"]);
    let r: DirectReport = serde_json::from_str(&text).unwrap();
    assert!((r.direct.re - 1.0).abs() < 1e-15 && r.direct.im.abs() < 1e-15);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["eval", "--n", "20"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "--n", "20", "--a", "-1"]).status.code(), Some(1));
    assert_eq!(
        run(&["eval", "--n", "20", "--a", "1", "--order", "3"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["table", "5"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // s = 1 is the pole of the prefactor
    let out = run(&["eval", "--n", "3", "--s-real", "1", "--s-imag", "0", "--mode", "direct"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["eval", "--n", "2000", "--a", "1", "--mode", "direct"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_and_text_formats() {
    let csv = ok(&["eval", "--n", "20", "--a", "1", "--format", "csv"]);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(header.contains(&"asymptotic_re") && header.contains(&"rel_err"));
    assert_eq!(lines.count(), 1);
    let text = ok(&["eval", "--n", "20", "--a", "1", "--format", "text"]);
    assert!(text.contains("asymptotic"));
}

#[test]
fn tables_are_deterministic() {
    for id in ["1", "2", "3", "4"] {
        for format in ["text", "json", "csv"] {
            let a = ok(&["table", id, "--format", format]);
            let b = ok(&["table", id, "--format", format]);
            assert_eq!(a, b, "table {id} {format}");
        }
    }
}

#[test]
fn saddle_table_annotations() {
    let t: SaddleTableOutput = serde_json::from_str(&ok(&["table", "1", "--format", "json"])).unwrap();
    assert_eq!(t.cells.len(), 14);
    assert!(!t.notes.is_empty());
    assert!(t.cells.iter().filter(|c| c.annotation.is_some()).all(|c| c
        .annotation
        .as_ref()
        .unwrap()
        .contains("recomputed")));
}

#[test]
fn value_tables_have_reference_layout() {
    let t: ValueTableOutput = serde_json::from_str(&ok(&["table", "4", "--format", "json"])).unwrap();
    let ms: Vec<usize> = t.rows.iter().map(|r| r.m).collect();
    assert_eq!(ms, vec![16, 31, 46, 61, 76]);
    let t: ValueTableOutput = serde_json::from_str(&ok(&["table", "3", "--format", "json"])).unwrap();
    assert_eq!(t.rows.len(), 6);
    let csv = ok(&["table", "2", "--format", "csv"]);
    assert!(csv.lines().next().unwrap().contains("rel_err"));
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn trace_paths_export() {
    let csv = ok(&["trace", "--n", "20", "--a", "1", "--what", "paths"]);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,path,endpoint,tau,re_w,im_w,re_psi,im_psi_continued"
    );
    let mut ends = std::collections::BTreeMap::new();
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        ends.entry(f[0].parse::<usize>().unwrap())
            .or_insert_with(Vec::new)
            .push(f[2].to_string());
    }
    assert_eq!(ends.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3, 4]);
    assert!(ends[&4].iter().any(|e| e == "escape"));
    for k in 1..=3 {
        assert!(ends[&k].iter().all(|e| e.starts_with("singularity")));
    }
}

fn rows(csv: &str) -> Vec<(usize, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.parse().unwrap(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn trace_omega_minimum() {
    let r = rows(&ok(&["trace", "--n", "50", "--a", "3.14159265", "--what", "omega"]));
    let (k, w) = r.iter().copied().min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
    assert_eq!(k, 2);
    assert!((w - 0.02235).abs() < 5e-5);
}

#[test]
fn trace_ihat_decays_after_peak() {
    let r = rows(&ok(&["trace", "--n", "50", "--a", "5", "--what", "ihat"]));
    assert_eq!(r.len(), 41);
    let peak = r.iter().enumerate().max_by(|x, y| x.1 .1.total_cmp(&y.1 .1)).unwrap().0;
    assert!(r[peak..].windows(2).all(|w| w[1].1 < w[0].1));
    assert!(r[peak].1 - r.last().unwrap().1 > 10.0);
}
