use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hstar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hstar")).args(args).output().expect("run hstar")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_data_writes_summary_and_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "gen-data", "--domain", "pancake", "--n", "5", "--count", "300", "--seed", "7", "--csv", "--out",
        path(dir.path()),
    ];
    let first = hstar(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let out = stdout(&first);
    assert!(out.contains("count=300"), "{out}");
    assert!(out.contains("label_min=") && out.contains("label_max="));
    let file = dir.path().join("pancake_n5_300_seed7.hslb");
    let bytes = fs::read(&file).unwrap();
    let csv = fs::read_to_string(dir.path().join("pancake_n5_300_seed7.csv")).unwrap();
    assert_eq!(csv.lines().count(), 301);

    let again = hstar(&args);
    assert!(again.status.success());
    assert_eq!(fs::read(&file).unwrap(), bytes);
}

#[test]
fn missing_domain_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hstar(&["gen-data", "--n", "5", "--count", "10", "--out", path(dir.path())]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("--domain"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn invalid_values_fail_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    for bad in [
        vec!["sweep", "--domain", "pancake", "--sizes", "5..4"],
        vec!["sweep", "--domain", "pancake", "--n", "4", "--loss", "true"],
        vec!["sweep", "--domain", "nope", "--n", "4"],
        vec!["sweep", "--domain", "pancake", "--n", "4", "--profile", "huge"],
    ] {
        let mut args = bad.clone();
        args.extend(["--out", path(&out)]);
        let o = hstar(&args);
        assert!(!o.status.success(), "{bad:?} should fail");
        assert!(!out.exists(), "{bad:?} wrote output");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# dataset\ndomain=bw\nn=3\ncount=50\nseed=3\n").unwrap();
    let o = hstar(&["gen-data", "--config", path(&cfg), "--seed", "4", "--out", path(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("bw_n3_50_seed4.hslb").exists());

    fs::write(&cfg, "domain=bw\nbogus=1\n").unwrap();
    let o = hstar(&["gen-data", "--config", path(&cfg), "--n", "3", "--count", "5"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn sweep_streams_progress_resumes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let args = [
        "sweep", "--domain", "pancake", "--sizes", "4..6", "--train-count", "200", "--test-count", "200",
        "--restarts", "2", "--max-epochs", "100", "--criterion", "threshold", "--threshold", "1.0", "--seed", "5",
        "--out", path(&out),
    ];
    let o = hstar(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("probe\t")), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("record\t")).count(), 3, "{text}");
    let results = out.join("results.csv");
    let csv = fs::read_to_string(&results).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("pancake,")).count(), 3);

    let again = hstar(&args);
    assert!(again.status.success());
    assert!(stdout(&again).contains("new_records=0"));
    assert_eq!(fs::read_to_string(&results).unwrap(), csv);

    let mut changed = args.to_vec();
    let seed = changed.len() - 3;
    changed[seed] = "6";
    let clash = hstar(&changed);
    assert!(!clash.status.success(), "manifest mismatch must be rejected");

    let report_dir = dir.path().join("report");
    let r = hstar(&["report", "--results", path(&results), "--out", path(&report_dir)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let svg = fs::read_to_string(report_dir.join("pancake.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let points = fs::read_to_string(report_dir.join("points.csv")).unwrap();
    assert_eq!(points.lines().count(), 4, "{points}");
}

#[test]
fn report_on_empty_results_draws_axes() {
    let dir = tempfile::tempdir().unwrap();
    let o = hstar(&["report", "--out", path(dir.path()), "--epsilon", "1", "--c-values", "10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("results.svg").exists());
    let curves = fs::read_to_string(dir.path().join("loss_curves.csv")).unwrap();
    assert!(curves.lines().next().unwrap().starts_with("x,l,l_eps_c10"));
    let half = curves.lines().find(|l| l.starts_with("0.5,")).expect("row at x = eps/2");
    assert_eq!(half.split(',').nth(2).unwrap().parse::<f64>().unwrap(), 0.125);
}

#[test]
fn report_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "not,a,results\nfile\n").unwrap();
    let o = hstar(&["report", "--results", path(&bad), "--out", path(dir.path())]);
    assert!(!o.status.success());
}

#[test]
fn verify_small_domain_prints_ok() {
    let o = hstar(&["verify", "--domain", "tsp", "--n", "6"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("OK:"));
    let o = hstar(&["verify", "--domain", "pancake", "--n", "40"]);
    assert!(!o.status.success());
}
