use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cpl(args: &[&str]) -> Output {
    cpl_env(args, None)
}

fn cpl_env(args: &[&str], res: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cpl"));
    cmd.args(args).current_dir(root()).env_remove("CPL_DEFAULT_RES");
    if let Some(v) = res {
        cmd.env("CPL_DEFAULT_RES", v);
    }
    cmd.output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn assert_schema(schema: &str, doc: &Value) {
    let path = root().join("schemas").join(schema);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

fn csv_rows(text: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text).records().map(Result::unwrap).collect()
}

fn column(out: &[u8], name: &str) -> Vec<String> {
    let mut reader = csv::Reader::from_reader(out);
    let k = reader.headers().unwrap().iter().position(|h| h == name).unwrap();
    reader.records().map(|r| r.unwrap()[k].to_string()).collect()
}

#[test]
fn rnt_report_schwarzschild() {
    let out = cpl(&["rnt-report", "--n", "3", "--m", "1", "--q", "0"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["r_plus"].as_f64().unwrap(), 2.0);
    assert_schema("rnt-report.schema.json", &doc);
}

#[test]
fn rnt_report_penrose_equality() {
    let doc = json(&cpl(&["rnt-report", "--n", "3", "--m", "1", "--q", "0.5"]));
    assert!(doc["penrose"]["slack"].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(doc["penrose"]["verdict"], "pass");
}

#[test]
fn rnt_report_rejects_naked_singularity() {
    let out = cpl(&["rnt-report", "--n", "3", "--m", "1", "--q", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("naked singularity regime"));
}

#[test]
fn rnt_report_extremal_has_no_embedding() {
    let doc = json(&cpl(&["rnt-report", "--n", "4", "--m", "1", "--q", "1"]));
    assert!(doc["extremal"].as_bool().unwrap());
    assert!(doc["embedding"].is_null());
    assert_schema("rnt-report.schema.json", &doc);
}

#[test]
fn bad_arguments_exit_with_input_error() {
    assert_eq!(cpl(&["rnt-report", "--n", "3", "--m", "x", "--q", "0"]).status.code(), Some(2));
    assert_eq!(cpl(&["rnt-report", "--n", "2", "--m", "1", "--q", "0"]).status.code(), Some(2));
    assert_eq!(cpl(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(cpl(&["--help"]).status.code(), Some(0));
}

#[test]
fn sphere_run_keeps_m_constant() {
    let out = cpl(&["imcf-run", "--n", "3", "--shape", "sphere", "--res", "32", "--t-end", "1", "--sample-every", "5"]);
    assert!(out.status.success());
    let m: Vec<f64> = column(&out.stdout, "M").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(m.len(), 21);
    assert!(m.iter().all(|v| (v - m[0]).abs() < 1e-10 * m[0]));
    let summary: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_schema("imcf-summary.schema.json", &summary);
    assert_eq!(summary["monotone_decay"]["verdict"], "pass");
}

#[test]
fn spheroid_run_m_is_non_increasing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("series.csv");
    let summary = dir.path().join("summary.json");
    let out = cpl(&[
        "imcf-run", "--n", "4", "--shape", "spheroid", "--polar", "2", "--res", "32", "--t-end", "1",
        "--sample-every", "1", "--csv", csv.to_str().unwrap(), "--summary", summary.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read(&csv).unwrap();
    let m: Vec<f64> = column(&text, "M").iter().map(|v| v.parse().unwrap()).collect();
    assert!(m.windows(2).all(|w| w[1] <= w[0] + 1e-8));
    let header = csv::Reader::from_reader(text.as_slice()).headers().unwrap().clone();
    assert_eq!(header.iter().collect::<Vec<_>>(), ["t", "area", "intH", "roundness", "M", "I0", "I1", "I2"]);
    // 17 significant digits in every cell
    assert!(csv_rows(&text).iter().flatten().all(|cell| cell.split('e').next().unwrap().trim_start_matches('-').len() == 18));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_schema("imcf-summary.schema.json", &doc);
}

#[test]
fn invalid_surface_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    let grid = cpl_core::surface::SphereGrid::axisymmetric(3, 8).unwrap();
    let sphere = cpl_core::surface::make_sphere(grid, 1.0).unwrap();
    let good = cpl_core::surface::io::write_table(&sphere, None);
    std::fs::write(&path, &good).unwrap();
    let ok = cpl(&["imcf-run", "--shape", "file", "--surface", path.to_str().unwrap(), "--t-end", "0.1"]);
    assert!(ok.status.success());
    // rho <= 0 on one node
    let last = good.lines().last().unwrap();
    let bad_row = last.rsplit_once(' ').unwrap().0.to_string() + " -1.0";
    std::fs::write(&path, good.replace(last, &bad_row)).unwrap();
    let out = cpl(&["imcf-run", "--shape", "file", "--surface", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive"));
    assert_eq!(cpl(&["imcf-run", "--shape", "file"]).status.code(), Some(2));
}

#[test]
fn resolution_comes_from_the_environment() {
    let run = |res: Option<&str>, flag: &[&str]| {
        let mut args = vec!["imcf-run", "--t-end", "0"];
        args.extend_from_slice(flag);
        cpl_env(&args, res)
    };
    let from_env: Value = serde_json::from_slice(&run(Some("20"), &[]).stderr).unwrap();
    assert_eq!(from_env["grid"]["n_theta"], 20);
    let flag_wins: Value = serde_json::from_slice(&run(Some("20"), &["--res", "24"]).stderr).unwrap();
    assert_eq!(flag_wins["grid"]["n_theta"], 24);
    let default: Value = serde_json::from_slice(&run(None, &[]).stderr).unwrap();
    assert_eq!(default["grid"]["n_theta"], 128);
    assert_eq!(run(Some("many"), &[]).status.code(), Some(2));
}

#[test]
fn verify_rnt_data_passes() {
    let out = cpl(&["verify", "--data", "data/rnt_n4_m2_q1.toml"]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_schema("verify.schema.json", &doc);
    assert!((doc["mass"]["total"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(doc["all_pass"].as_bool().unwrap());
    let certs = doc["certificates"].as_array().unwrap();
    assert!(certs.iter().all(|c| c["verdict"] == "pass"));
}

#[test]
fn verify_reduced_charge_has_positive_penrose_slack() {
    let doc = json(&cpl(&["verify", "--data", "data/rnt_n4_m2_q1_charge09.toml"]));
    let penrose = doc["certificates"].as_array().unwrap().iter().find(|c| c["name"] == "penrose").unwrap().clone();
    assert_eq!(penrose["verdict"], "pass");
    assert!(penrose["slack"].as_f64().unwrap() > penrose["tolerance"].as_f64().unwrap());
}

#[test]
fn verify_rejects_energy_violation() {
    let out = cpl(&["verify", "--data", "data/rnt_n4_m2_q1_charge11.toml"]);
    assert_eq!(out.status.code(), Some(4));
    let doc = json(&out);
    assert_schema("verify-rejected.schema.json", &doc);
    assert!(doc["residual_profile"].as_array().unwrap().iter().any(|s| s["value"].as_f64().unwrap() < 0.0));
}

#[test]
fn verify_missing_file_exits_2() {
    assert_eq!(cpl(&["verify", "--data", "data/missing.toml"]).status.code(), Some(2));
}

#[test]
fn sweep_rows_saturate_penrose() {
    let out = cpl(&["sweep", "--n", "3,4,5", "--m", "1", "--q", "0,0.5,0.99", "--jobs", "3"]);
    assert!(out.status.success());
    let slack = column(&out.stdout, "penrose_slack");
    assert_eq!(slack.len(), 9);
    assert!(slack.iter().all(|s| s.parse::<f64>().unwrap().abs() < 1e-10));
}

#[test]
fn sweep_marks_extremal_and_invalid_rows() {
    let out = cpl(&["sweep", "--n", "3", "--m", "1", "--q", "1,2"]);
    assert!(out.status.success());
    let rows = csv_rows(&out.stdout);
    let status = column(&out.stdout, "status");
    let extremal = column(&out.stdout, "extremal");
    let embedding = column(&out.stdout, "embedding_u_at_2r_plus");
    let error = column(&out.stdout, "error");
    assert_eq!(rows.len(), 2);
    assert_eq!((status[0].as_str(), extremal[0].as_str(), embedding[0].as_str()), ("ok", "true", "n/a"));
    assert_eq!(status[1], "error");
    assert!(error[1].contains("naked singularity"));
}

#[test]
fn sweep_empty_grid_exits_2() {
    assert_eq!(cpl(&["sweep", "--n", "3", "--m", "1"]).status.code(), Some(2));
    assert_eq!(cpl(&["sweep", "--n", "3", "--m", "1", "--q"]).status.code(), Some(2));
}

#[test]
fn sweep_order_does_not_depend_on_jobs() {
    let args = ["sweep", "--n", "3,4,5,7", "--m", "0.5,1,2", "--q", "0,0.3,0.9"];
    let one = cpl(&[&args[..], &["--jobs", "1"]].concat());
    let four = cpl(&[&args[..], &["--jobs", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn breakdown_maps_to_exit_3() {
    let e: cpl_cli::CliError = cpl_core::Error::FlowBreakdown { t: 0.5, reason: "H <= 0".into() }.into();
    assert_eq!(e.status as i32, 3);
    let e: cpl_cli::CliError = cpl_core::Error::Domain("x".into()).into();
    assert_eq!(e.status as i32, 2);
}
