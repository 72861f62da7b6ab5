use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use i3_core::analysis::{synthetic_corpus, CorrelationMatrix, RankingTable, SyntheticConfig};
use i3_core::corpus::write_publications;
use i3_core::fixtures::worked_example_corpus;
use i3_core::report::IndicatorRow;
use i3_core::stats::ComparisonReport;
use tempfile::TempDir;

fn i3(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_i3"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = i3(args);
    assert!(
        out.status.success(),
        "i3 {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn worked_file(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("worked.csv");
    write_publications(
        &worked_example_corpus(),
        std::fs::File::create(&path).unwrap(),
    )
    .unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn csv_field<'a>(text: &'a str, unit: &str, column: &str) -> &'a str {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    let row = lines.find(|l| l.starts_with(&format!("{unit},"))).unwrap();
    row.split(',').nth(idx).unwrap()
}

#[test]
fn compute_worked_example() {
    let dir = TempDir::new().unwrap();
    let input = worked_file(&dir);
    let out = stdout(&["compute", "-i", p(&input), "--unit", "PLOS ONE"]);
    assert_eq!(out.lines().count(), 2);
    assert_eq!(csv_field(&out, "PLOS ONE", "i3"), "78733.00");
    assert_eq!(csv_field(&out, "PLOS ONE", "i3_per_n"), "2.621");
    assert_eq!(csv_field(&out, "PLOS ONE", "i3_max"), "3004200.00");
}

#[test]
fn ptop10_scheme_counts_top_ten() {
    let dir = TempDir::new().unwrap();
    let input = worked_file(&dir);
    let standard = stdout(&["compute", "-i", p(&input)]);
    let ptop = stdout(&["compute", "-i", p(&input), "--scheme", "90-1"]);
    for unit in ["PLOS ONE", "RSC ADV", "OTHER"] {
        assert_eq!(
            csv_field(&ptop, unit, "i3"),
            csv_field(&standard, unit, "top-10%")
        );
    }
}

#[test]
fn compare_with_expectation_and_between_units() {
    let dir = TempDir::new().unwrap();
    let input = worked_file(&dir);
    let expected = stdout(&["compare", "-i", p(&input), "PLOS ONE", "--expected"]);
    let sum = expected.lines().find(|l| l.starts_with("sum,")).unwrap();
    assert!(sum.contains(",12875.494,"), "{sum}");

    let json = stdout(&[
        "compare",
        "-i",
        p(&input),
        "PLOS ONE",
        "--expected",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!((v["totals"]["cramers_v"].as_f64().unwrap() - 0.271).abs() < 1e-3);
    assert!((v["totals"]["cohens_w"].as_f64().unwrap() - 0.387).abs() < 1e-3);
    assert_eq!(v["second"], "expected");

    let json = stdout(&[
        "compare",
        "-i",
        p(&input),
        "PLOS ONE",
        "RSC ADV",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!((v["totals"]["cramers_v"].as_f64().unwrap() - 0.0521).abs() < 5e-4);
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn unit_against_itself_is_null() {
    let dir = TempDir::new().unwrap();
    let input = worked_file(&dir);
    let json = stdout(&[
        "compare",
        "-i",
        p(&input),
        "RSC ADV",
        "RSC ADV",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["totals"]["chi_square"].as_f64().unwrap(), 0.0);
    assert_eq!(v["totals"]["cramers_v"].as_f64().unwrap(), 0.0);
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["residual"]["value"].as_f64().unwrap(), 0.0);
        assert_eq!(row["z"]["z"].as_f64().unwrap(), 0.0);
        assert_eq!(row["cohens_h"].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn breakdown_shows_both_normalizations() {
    let dir = TempDir::new().unwrap();
    let input = worked_file(&dir);
    let out = stdout(&[
        "compute",
        "-i",
        p(&input),
        "--unit",
        "PLOS ONE",
        "--breakdown",
        "--format",
        "markdown",
    ]);
    assert!(out.contains("78733"), "{out}");
    assert!(out.contains("99-100"), "{out}");
}

#[test]
fn rank_orders_units() {
    let dir = TempDir::new().unwrap();
    let input = worked_file(&dir);
    let out = stdout(&[
        "rank",
        "-i",
        p(&input),
        "--by",
        "i3_per_n",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let order: Vec<&str> = rows
        .iter()
        .map(|r| r["unit_id"].as_str().unwrap())
        .collect();
    assert_eq!(order, ["OTHER", "RSC ADV", "PLOS ONE"]);

    let top = stdout(&["rank", "-i", p(&input), "--top", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&top).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
    assert_eq!(v["rows"][0]["unit_id"], "OTHER");
}

fn simulated(dir: &TempDir, seed: &str) -> (PathBuf, String) {
    let path = dir.path().join(format!("sim-{seed}.csv"));
    let summary = stdout(&[
        "simulate",
        "--seed",
        seed,
        "--units",
        "6",
        "--papers-min",
        "30",
        "--papers-max",
        "90",
        "-o",
        p(&path),
    ]);
    (path, summary)
}

#[test]
fn simulate_is_seeded() {
    let dir = TempDir::new().unwrap();
    let (a, sa) = simulated(&dir, "5");
    let b = dir.path().join("again.csv");
    let sb = stdout(&[
        "simulate",
        "--seed",
        "5",
        "--units",
        "6",
        "--papers-min",
        "30",
        "--papers-max",
        "90",
        "-o",
        p(&b),
    ]);
    assert_eq!(sa, sb);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (c, _) = simulated(&dir, "6");
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    assert_eq!(sa.lines().next().unwrap(), "unit_id,papers,citations");
    assert_eq!(sa.lines().count(), 7);
}

#[test]
fn correlate_joins_metrics() {
    let dir = TempDir::new().unwrap();
    let (input, _) = simulated(&dir, "11");
    let compute = stdout(&["compute", "-i", p(&input)]);
    let metrics = dir.path().join("metrics.csv");
    let mut text = String::from("unit_id,n_pub,jif2\n");
    for i in 0..6 {
        let unit = format!("U{i:04}");
        text.push_str(&format!(
            "{unit},{},{}\n",
            100,
            csv_field(&compute, &unit, "i3")
        ));
    }
    text.push_str("ELSEWHERE,5,1.0\n");
    std::fs::write(&metrics, text).unwrap();

    let out = stdout(&[
        "correlate",
        "-i",
        p(&input),
        "--metrics",
        p(&metrics),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let vars: Vec<&str> = v["variables"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert_eq!(vars, ["n_pub", "jif2", "i3", "i3_field", "i3_per_n"]);
    assert_eq!(v["sample_size"], 6);
    assert!((v["values"][1][2].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["values"][0][2].is_null());
    assert!(v["values"][0][0].is_null());

    let md = stdout(&[
        "correlate",
        "-i",
        p(&input),
        "--metrics",
        p(&metrics),
        "--format",
        "markdown",
    ]);
    assert!(md.contains("n/a"));
}

#[test]
fn validate_reports_anomalies() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("pubs.csv");
    std::fs::write(
        &input,
        "paper_id,unit_id,citations,categories\nA,U,3,X;X\nB,V,0,Y\n",
    )
    .unwrap();
    let metrics = dir.path().join("m.csv");
    std::fs::write(&metrics, "unit_id,jif2\nU,1.5\nW,2\n").unwrap();
    let out = i3(&["validate", "-i", p(&input), "--metrics", p(&metrics)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 2, "{text}");

    let json = stdout(&[
        "validate",
        "-i",
        p(&input),
        "--metrics",
        p(&metrics),
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["anomalies"].as_array().unwrap().len(), 2);
}

#[test]
fn jsonl_input_matches_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("s.csv");
    let jsonl = dir.path().join("s.jsonl");
    let synth = synthetic_corpus(&SyntheticConfig::default()).unwrap();
    write_publications(&synth.corpus, std::fs::File::create(&csv).unwrap()).unwrap();
    i3_core::corpus::write_publications_json(&synth.corpus, std::fs::File::create(&jsonl).unwrap())
        .unwrap();
    assert_eq!(
        stdout(&["compute", "-i", p(&csv), "--normalize", "field"]),
        stdout(&[
            "compute",
            "-i",
            p(&jsonl),
            "--input-format",
            "jsonl",
            "--normalize",
            "field"
        ])
    );
}

#[test]
fn output_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let input = worked_file(&dir);
    let out = dir.path().join("out.json");
    assert_eq!(
        stdout(&[
            "compute",
            "-i",
            p(&input),
            "--format",
            "json",
            "-o",
            p(&out)
        ]),
        ""
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let input = worked_file(&dir);
    let code = |args: &[&str]| i3(args).status.code().unwrap();

    assert_eq!(code(&["compute", "-i", p(&input)]), 0);
    assert_eq!(code(&["compute", "-i", p(&input), "--unit", "NOPE"]), 1);
    assert_eq!(
        code(&["compute", "-i", p(&dir.path().join("missing.csv"))]),
        1
    );
    assert_eq!(code(&["compare", "-i", p(&input), "PLOS ONE", "NOPE"]), 1);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "paper_id,unit_id,citations,categories\nA,U,-4,X\n").unwrap();
    let out = i3(&["compute", "-i", p(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    assert_eq!(
        code(&["compute", "-i", p(&input), "--scheme", "99-1,90-10"]),
        2
    );
    assert_eq!(
        code(&[
            "compute",
            "-i",
            p(&input),
            "--normalize",
            "field",
            "--mode",
            "at-or-above"
        ]),
        2
    );
    assert_eq!(code(&["compare", "-i", p(&input), "PLOS ONE"]), 2);
    assert_eq!(
        code(&[
            "compare",
            "-i",
            p(&input),
            "PLOS ONE",
            "RSC ADV",
            "--expected"
        ]),
        2
    );
    assert_eq!(code(&["compute", "--bogus"]), 2);
    assert_eq!(code(&["compute", "-i", p(&input), "--breakdown"]), 2);
}

#[test]
fn unit_rows_add_up_to_population_layers() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("two.csv");
    let cfg = SyntheticConfig {
        seed: 3,
        units: 2,
        papers_per_unit: 150..=400,
        mu: 0.8,
        ..Default::default()
    };
    let synth = synthetic_corpus(&cfg).unwrap();
    write_publications(&synth.corpus, std::fs::File::create(&input).unwrap()).unwrap();

    let json = stdout(&["compute", "-i", p(&input), "--format", "json"]);
    let rows: Vec<IndicatorRow> = serde_json::from_str(&json).unwrap();
    assert_eq!(rows.len(), 2);

    // Threshold at rank ceil(n·share) of the descending list; count every paper at or above it.
    let mut all = synth.corpus.citations();
    all.sort_unstable_by(|a, b| b.cmp(a));
    let n = all.len();
    for (i, boundary) in [99.0, 90.0, 50.0].into_iter().enumerate() {
        let rank = (n as f64 * (100.0 - boundary) / 100.0).ceil() as usize;
        let threshold = all[rank.max(1) - 1];
        let layer = all.iter().filter(|&&c| c >= threshold).count() as f64;
        let summed: f64 = rows.iter().map(|r| r.counts.cumulative[i]).sum();
        assert_eq!(summed, layer, "top-{}%", 100.0 - boundary);
    }
    let total: f64 = rows.iter().map(|r| r.counts.total).sum();
    assert_eq!(total, n as f64);
}

#[test]
fn correlation_matrix_is_symmetric() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("fifty.csv");
    let cfg = SyntheticConfig {
        seed: 50,
        units: 50,
        papers_per_unit: 20..=120,
        ..Default::default()
    };
    let synth = synthetic_corpus(&cfg).unwrap();
    write_publications(&synth.corpus, std::fs::File::create(&input).unwrap()).unwrap();
    let metrics = dir.path().join("metrics.csv");
    let mut text = String::from("unit_id,n_pub,n_cit\n");
    for (unit, size) in &synth.unit_sizes {
        text.push_str(&format!("{unit},{size},{}\n", synth.unit_citations[unit]));
    }
    std::fs::write(&metrics, text).unwrap();

    let json = stdout(&[
        "correlate",
        "-i",
        p(&input),
        "--metrics",
        p(&metrics),
        "--format",
        "json",
    ]);
    let m: CorrelationMatrix = serde_json::from_str(&json).unwrap();
    assert_eq!(m.sample_size, 50);
    assert_eq!(m.variables.len(), 5);
    for i in 0..m.variables.len() {
        assert_eq!(m.values[i][i], Some(1.0));
        for j in 0..m.variables.len() {
            assert_eq!(m.values[i][j], m.values[j][i]);
            let r = m.values[i][j].unwrap();
            assert!((-1.0..=1.0).contains(&r));
        }
    }
}

#[test]
fn json_output_reparses() {
    let dir = TempDir::new().unwrap();
    let input = worked_file(&dir);
    let json = stdout(&[
        "compare",
        "-i",
        p(&input),
        "PLOS ONE",
        "RSC ADV",
        "--format",
        "json",
    ]);
    let report: ComparisonReport = serde_json::from_str(&json).unwrap();
    assert_eq!(report.first, "PLOS ONE");
    assert_eq!(report.second, "RSC ADV");
    assert_eq!(report.totals.df, 3);

    let json = stdout(&[
        "rank",
        "-i",
        p(&input),
        "--by",
        "i3_field",
        "--format",
        "json",
    ]);
    let table: RankingTable = serde_json::from_str(&json).unwrap();
    assert_eq!(table.key, "i3_field");
    let ranks: Vec<usize> = table.rows.iter().map(|r| r.rank).collect();
    assert_eq!(ranks, [1, 2, 3]);

    let json = stdout(&[
        "compute",
        "-i",
        p(&input),
        "--scheme",
        "PR6",
        "--format",
        "json",
    ]);
    let rows: Vec<IndicatorRow> = serde_json::from_str(&json).unwrap();
    assert!(rows
        .iter()
        .all(|r| r.result.scheme == "PR6" && r.counts.distinct.len() == 6));
}
