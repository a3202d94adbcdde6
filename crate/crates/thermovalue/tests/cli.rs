//! End-to-end checks of the `thermovalue` binary: exit codes, output
//! schemas, and byte-for-byte determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermovalue"))
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn dataset_arg() -> String {
    data_dir().display().to_string()
}

/// Copies the reference dataset into a temp dir so tests can damage it.
fn copy_dataset(dir: &Path) {
    for name in ["elements.csv", "prices.csv", "deflator.csv"] {
        std::fs::copy(data_dir().join(name), dir.join(name)).unwrap();
    }
}

#[test]
fn validate_reports_65_elements() {
    let out = run(&["validate", "--dataset", &dataset_arg()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("65 elements"), "{text}");
    assert!(text.contains("integrity: OK"));
}

#[test]
fn validate_missing_deflator_exits_1_and_names_file() {
    let tmp = tempfile::tempdir().unwrap();
    copy_dataset(tmp.path());
    std::fs::remove_file(tmp.path().join("deflator.csv")).unwrap();
    let out = run(&["validate", "--dataset", &tmp.path().display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("deflator.csv"), "{}", stderr(&out));
}

#[test]
fn validate_orphan_symbol_exits_2_and_lists_it() {
    let tmp = tempfile::tempdir().unwrap();
    copy_dataset(tmp.path());
    let prices = tmp.path().join("prices.csv");
    let mut text = std::fs::read_to_string(&prices).unwrap();
    text.push_str("Xq,1998,1.0,USD_per_kg,\n");
    std::fs::write(&prices, text).unwrap();
    let out = run(&["validate", "--dataset", &tmp.path().display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Xq"), "{}", stderr(&out));
}

#[test]
fn validate_parse_error_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    copy_dataset(tmp.path());
    let elements = tmp.path().join("elements.csv");
    let mut text = std::fs::read_to_string(&elements).unwrap();
    text.push_str("Zq,Broken,-4,1.0,solid,1.0,1.0,1,mid\n");
    std::fs::write(&elements, text).unwrap();
    let out = run(&["validate", "--dataset", &tmp.path().display().to_string()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("non-positive numeric field"));
}

#[test]
fn dataset_dir_comes_from_env_when_flag_absent() {
    let out = bin()
        .args(["validate"])
        .env("THERMOVALUE_DATASET", dataset_arg())
        .output()
        .unwrap();
    assert!(out.status.success());

    let out = bin()
        .args(["validate"])
        .env_remove("THERMOVALUE_DATASET")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn compute_emits_all_elements_sorted() {
    let out = run(&["compute", "--dataset", &dataset_arg()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "symbol,c_pure_mol_L,c_env_mol_L,delta_g_kJ_mol,delta_g0_kJ_mol,sigma_e_kJ_mol"
    );
    assert_eq!(lines.len(), 66);
    let symbols: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    let mut sorted = symbols.clone();
    sorted.sort();
    assert_eq!(symbols, sorted);
}

#[test]
fn compute_exclude_drops_rows() {
    let out = run(&["compute", "--dataset", &dataset_arg(), "--exclude", "Au"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 65);
    assert!(!text.lines().any(|l| l.starts_with("Au,")));
}

#[test]
fn exclude_unknown_symbol_exits_4() {
    let out = run(&["compute", "--dataset", &dataset_arg(), "--exclude", "Qq"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn crustal_only_drops_gases() {
    let tmp = tempfile::tempdir().unwrap();
    copy_dataset(tmp.path());
    let elements = tmp.path().join("elements.csv");
    let mut text = std::fs::read_to_string(&elements).unwrap();
    text.push_str("Xe,Xenon,131.29,0.0059,gas,0.00003,0.1,1,low\n");
    std::fs::write(&elements, text).unwrap();
    let dir = tmp.path().display().to_string();

    let with_gas = run(&["compute", "--dataset", &dir]);
    assert_eq!(stdout(&with_gas).lines().count(), 67);
    let crustal = run(&["compute", "--dataset", &dir, "--crustal-only"]);
    assert_eq!(stdout(&crustal).lines().count(), 66);
    assert!(!stdout(&crustal).contains("Xe,"));
}

#[test]
fn fit_sparse_year_exits_3() {
    let out = run(&[
        "fit",
        "--dataset",
        &dataset_arg(),
        "--year",
        "1800",
        "--ratio",
        "13",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("insufficient data"));
}

#[test]
fn fit_bad_ratio_exits_4() {
    let out = run(&[
        "fit",
        "--dataset",
        &dataset_arg(),
        "--year",
        "1998",
        "--ratio",
        "-2",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn fit_writes_model_json() {
    let tmp = tempfile::tempdir().unwrap();
    let model_path = tmp.path().join("model.json");
    let out = run(&[
        "fit",
        "--dataset",
        &dataset_arg(),
        "--year",
        "1998",
        "--ratio",
        "13",
        "--out",
        &model_path.display().to_string(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    assert_eq!(json["ratio"], 13.0);
    assert_eq!(json["fit_year"], 1998);
    assert_eq!(json["n"], 65);
    assert!(json["pearson_r"].as_f64().unwrap() > 0.75);
}

#[test]
fn fit_grid_search_scan_csv_on_stdout() {
    let out = run(&[
        "fit",
        "--dataset",
        &dataset_arg(),
        "--year",
        "1998",
        "--ratio",
        "fit",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("ratio,pearson_r"), "{text}");
    // summary line plus header plus 200 grid rows
    assert_eq!(text.lines().filter(|l| l.contains(',')).count(), 201);
}

#[test]
fn correlate_full_period_has_40_rows() {
    let out = run(&[
        "correlate",
        "--dataset",
        &dataset_arg(),
        "--years",
        "1959:1998",
        "--ratio",
        "13",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "year,n,pearson_r");
    assert_eq!(lines.count(), 40);
}

#[test]
fn correlate_single_year_matches_fit() {
    let fit_out = run(&[
        "fit",
        "--dataset",
        &dataset_arg(),
        "--year",
        "1998",
        "--ratio",
        "13",
    ]);
    let fit_text = stdout(&fit_out);
    let fit_r = fit_text
        .split_whitespace()
        .skip_while(|w| *w != "r")
        .nth(1)
        .unwrap()
        .to_string();

    let corr_out = run(&[
        "correlate",
        "--dataset",
        &dataset_arg(),
        "--years",
        "1998:1998",
        "--ratio",
        "13",
    ]);
    let corr_text = stdout(&corr_out);
    let row = corr_text.lines().nth(1).unwrap();
    let corr_r = row.split(',').nth(2).unwrap();
    assert_eq!(corr_r, fit_r, "fit `{fit_text}` vs correlate `{corr_text}`");
}

#[test]
fn correlate_reversed_range_exits_4() {
    let out = run(&[
        "correlate",
        "--dataset",
        &dataset_arg(),
        "--years",
        "1998:1959",
        "--ratio",
        "13",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn unknown_flag_exits_4() {
    let out = run(&["compute", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn plot_fig3_has_labelled_colored_points_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let svg_path = tmp.path().join("fig3.svg");
    let out = run(&[
        "plot",
        "--dataset",
        &dataset_arg(),
        "--fig",
        "3",
        "--year",
        "1998",
        "--out",
        &svg_path.display().to_string(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains(r#"version="1.1""#));
    // 65 points plus 3 legend markers
    assert_eq!(svg.matches("<circle").count(), 68);
    for color in ["#d62728", "#2ca02c", "#1f77b4"] {
        assert!(svg.contains(color), "missing class colour {color}");
    }
    assert!(svg.contains("stroke-dasharray"), "fit line missing");
    for sym in ["Au", "Cs", "Fe", "Zr"] {
        assert!(svg.contains(&format!(">{sym}</text>")), "missing label {sym}");
    }
    // points CSV alongside
    let csv = std::fs::read_to_string(tmp.path().join("fig3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 66);
    assert!(csv.starts_with("symbol,energy_kj_mol,log10_price_1992usd_mol,gibbs_class"));
}

#[test]
fn plot_fig4_annotation_matches_fit_r() {
    let tmp = tempfile::tempdir().unwrap();
    let svg_path = tmp.path().join("fig4.svg");
    let out = run(&[
        "plot",
        "--dataset",
        &dataset_arg(),
        "--fig",
        "4",
        "--year",
        "1998",
        "--ratio",
        "13",
        "--out",
        &svg_path.display().to_string(),
    ]);
    assert!(out.status.success());
    let svg = std::fs::read_to_string(&svg_path).unwrap();

    let fit_out = run(&[
        "fit",
        "--dataset",
        &dataset_arg(),
        "--year",
        "1998",
        "--ratio",
        "13",
    ]);
    let fit_text = stdout(&fit_out);
    let fit_r = fit_text
        .split_whitespace()
        .skip_while(|w| *w != "r")
        .nth(1)
        .unwrap();
    assert!(
        svg.contains(&format!("r = {fit_r}")),
        "fit r {fit_r} not annotated in SVG"
    );
}

#[test]
fn plot_excluding_unpriced_element_is_identity() {
    // Cs has no 1997 quote, so excluding it must not change the points
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.svg");
    let b = tmp.path().join("b.svg");
    let base = run(&[
        "plot",
        "--dataset",
        &dataset_arg(),
        "--fig",
        "3",
        "--year",
        "1997",
        "--out",
        &a.display().to_string(),
    ]);
    assert!(base.status.success());
    let excl = run(&[
        "plot",
        "--dataset",
        &dataset_arg(),
        "--fig",
        "3",
        "--year",
        "1997",
        "--exclude",
        "Cs",
        "--out",
        &b.display().to_string(),
    ]);
    assert!(excl.status.success());
    let csv_a = std::fs::read_to_string(tmp.path().join("a.csv")).unwrap();
    let csv_b = std::fs::read_to_string(tmp.path().join("b.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
}

#[test]
fn plot_bad_fig_exits_4() {
    let out = run(&[
        "plot",
        "--dataset",
        &dataset_arg(),
        "--fig",
        "5",
        "--year",
        "1998",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for pass in ["one", "two"] {
        let svg = tmp.path().join(format!("{pass}.svg"));
        let compute = run(&["compute", "--dataset", &dataset_arg()]);
        let fit = run(&[
            "fit",
            "--dataset",
            &dataset_arg(),
            "--year",
            "1998",
            "--ratio",
            "fit",
        ]);
        let corr = run(&[
            "correlate",
            "--dataset",
            &dataset_arg(),
            "--years",
            "1959:1998",
            "--ratio",
            "13",
        ]);
        let plot = run(&[
            "plot",
            "--dataset",
            &dataset_arg(),
            "--fig",
            "4",
            "--year",
            "1998",
            "--ratio",
            "13",
            "--out",
            &svg.display().to_string(),
        ]);
        assert!(plot.status.success());
        outputs.push((
            compute.stdout,
            fit.stdout,
            corr.stdout,
            std::fs::read(&svg).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}
