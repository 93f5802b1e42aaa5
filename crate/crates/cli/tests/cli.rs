use std::fs;
use std::process::{Command, Output};

fn optpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optpd")).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn preset_with_overlay_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let overlay = dir.path().join("small.toml");
    fs::write(&overlay, "L_values = [1.5]\n[lattice]\nwidth = 30\nheight = 30\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = optpd(&[
        "run",
        overlay.to_str().unwrap(),
        "--preset",
        "table2",
        "--out",
        out_dir.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.contains("L=1.5")).count(), 6);
    assert!(out_dir.join("summary.json").exists());
    assert!(out_dir.join("census-DCA.csv").exists());

    let snapshot = fs::read_dir(out_dir.join("snapshots")).unwrap().next().unwrap().unwrap().path();
    let out = optpd(&["inspect", snapshot.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("grid 30x30  L=1.5"), "{report}");
    assert!(report.contains("C clusters:"), "{report}");
    assert!(optpd(&["inspect", snapshot.to_str().unwrap(), "--four-way"]).status.success());
}

fn rejects(config: &str, needle: &str) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, config).unwrap();
    let out = optpd(&["run", path.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains(needle), "{err}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_configs_fail_with_a_diagnostic() {
    rejects(
        "environment = \"lattice\"\nL_values = [3.5]\n[[seed]]\nkind = \"uniform_random\"\nstrategies = [\"C\", \"D\", \"A\"]\n",
        "L",
    );
    rejects("environment = \"lattice\"\ncolour = 1\n", "colour");
    rejects("environment = [\n", "line");
}

#[test]
fn run_needs_a_config_or_preset() {
    let out = optpd(&["run"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--preset"));
    assert!(!optpd(&["run", "--preset", "nope"]).status.success());
    assert!(!optpd(&["inspect", "/nonexistent/snap.txt"]).status.success());
}
