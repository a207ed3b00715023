use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_emi");

fn emi(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing in\n{out}"))
        .parse()
        .unwrap()
}

fn assert_error_line(o: &Output, code: i32, kind: &str) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", stderr(o));
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("error[{kind}]: ")), "{err}");
}

#[test]
fn help_matches_golden_files() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases: [(&[&str], &str); 6] = [
        (&["--help"], "help.txt"),
        (&["eval", "--help"], "help_eval.txt"),
        (&["run", "--help"], "help_run.txt"),
        (&["convergence", "--help"], "help_convergence.txt"),
        (&["export-mms", "--help"], "help_export-mms.txt"),
        (&["validate-analytic", "--help"], "help_validate-analytic.txt"),
    ];
    for (args, file) in cases {
        let o = emi(args, &dir);
        assert!(o.status.success());
        let golden = std::fs::read_to_string(dir.join(file)).unwrap();
        assert_eq!(stdout(&o), golden, "{file}");
    }
}

#[test]
fn eval_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = emi(&["eval", "--preset", "exp1", "--r", "6", "--t", "1.5707963"], tmp.path());
    assert!(o.status.success());
    let t: f64 = "1.5707963".parse().unwrap();
    let expected = 10.0 * 6f64.ln() * t.sin() + 5.0;
    assert!((value(&stdout(&o), "u_e") - expected).abs() < 1e-12);
    assert!((value(&stdout(&o), "u_e") - 22.9176).abs() < 1e-4);

    let o = emi(&["eval", "--preset", "exp3", "--x", "0", "--y", "0", "--z", "0", "--t", "0", "--cell", "1"], tmp.path());
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(value(&out, "u_i1"), 2.0);
    assert!(!out.contains("u_i2"));

    let o = emi(&["eval", "--preset", "exp1", "--r", "9", "--t", "1"], tmp.path());
    assert_error_line(&o, 2, "config");
    assert!(stderr(&o).contains("domain"));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        &["eval", "--preset", "exp7", "--t", "0"][..],
        &["run", "--unknown-flag"],
        &["convergence", "--preset", "exp1", "--schedule", "0.4:7,0.5:14"],
        &["export-mms", "--samples", "3"],
        &["run", "--preset", "exp1", "--snapshot", "--c-l", "0.4", "--n-f", "2"],
        &["run", "--timestamp", "../escape"],
    ] {
        assert_error_line(&emi(args, tmp.path()), 2, "config");
    }
    std::fs::write(tmp.path().join("bad.toml"), "preset = \"exp1\"\ncolour = 3\n").unwrap();
    let o = emi(&["run", "--config", "bad.toml"], tmp.path());
    assert_error_line(&o, 2, "config");
    assert!(stderr(&o).contains("colour"));
    std::fs::write(tmp.path().join("bad2.toml"), "[solver]\ntolerence = 1e-8\n").unwrap();
    assert_error_line(&emi(&["run", "--config", "bad2.toml"], tmp.path()), 2, "config");
}

#[test]
fn numeric_failures_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let o = emi(&["validate-analytic", "--preset", "exp1", "--samples", "50", "--threshold", "1e-30"], tmp.path());
    assert_error_line(&o, 3, "numeric");
    let o = emi(&["validate-analytic", "--preset", "exp2", "--samples", "100"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("run.toml"),
        "preset = \"exp2\"\noutput_dir = \"from_file\"\n[run]\nc_l = 0.4\nn_f = 3\n[time]\nt_end = 1.0\n",
    )
    .unwrap();
    let o = emi(&["run", "--config", "run.toml", "--timestamp", "a"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("exp2 c_l=0.4 n_f=3 t=[0.25, 1]"));
    assert!(tmp.path().join("from_file/exp2_a.csv").exists());

    let o = emi(
        &["run", "--config", "run.toml", "--preset", "exp1", "--n-f", "4", "--output-dir", "flags", "--timestamp", "b"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("exp1 c_l=0.4 n_f=4 t=[0.25, 1]"));
    assert!(tmp.path().join("flags/exp1_b.md").exists());
}

#[test]
fn convergence_reports_are_named_and_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    for stamp in ["first", "second"] {
        let o = emi(
            &["convergence", "--preset", "exp1", "--schedule", "0.4:7,0.2:14", "--output-dir", "r", "--timestamp", stamp],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let r = tmp.path().join("r");
    for ext in ["csv", "md"] {
        let a = std::fs::read(r.join(format!("exp1_first.{ext}"))).unwrap();
        let b = std::fs::read(r.join(format!("exp1_second.{ext}"))).unwrap();
        assert_eq!(a, b);
    }
    let names: Vec<String> = std::fs::read_dir(&r)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.len(), 4, "leftover temporary files: {names:?}");

    let o = emi(&["convergence", "--preset", "exp1", "--schedule", "0.4:7,0.2:14", "--output-dir", "d"], tmp.path());
    assert!(o.status.success());
    let name = std::fs::read_dir(tmp.path().join("d"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .find(|n| n.ends_with(".csv"))
        .unwrap();
    let stamp = name.strip_prefix("exp1_").unwrap().strip_suffix(".csv").unwrap();
    assert_eq!(stamp.len(), "20260101T000000Z".len());
    assert!(stamp.ends_with('Z') && stamp.as_bytes()[8] == b'T');
}

#[test]
fn zero_amplitude_export_is_all_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = emi(
        &["export-mms", "--samples", "8", "--times", "0,1", "--amplitudes", "0,0,0,0", "--b", "0", "--prefix", "zero"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let meta = std::fs::read_to_string(tmp.path().join("zero_metadata.toml")).unwrap();
    assert!(meta.contains("mms_periods") && meta.contains("version = 2"));
    for (file, first_field) in [("zero_volume.csv", 5), ("zero_interface.csv", 9), ("zero_boundary.csv", 7)] {
        let text = std::fs::read_to_string(tmp.path().join(file)).unwrap();
        let mut lines = text.lines();
        lines.next();
        let mut n = 0;
        for line in lines {
            for f in line.split(',').skip(first_field).filter(|f| !f.is_empty()) {
                assert_eq!(f.parse::<f64>().unwrap(), 0.0, "{file}: {line}");
            }
            n += 1;
        }
        assert!(n > 0);
    }
}
