use std::path::Path;
use std::process::{Command, Output};

fn bench() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cqnc-bench"));
    c.env_remove("CQNC_OUTPUT_DIR");
    c
}

fn run_ok(args: &[&str]) -> Output {
    let out = bench().args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(args: &[&str]) -> i32 {
    bench().args(args).output().unwrap().status.code().unwrap()
}

fn small_run(dir: &Path, preset: &str) {
    run_ok(&["run", "--preset", preset, "--set", "sweep.count=11", "--out", dir.to_str().unwrap()]);
}

#[test]
fn run_writes_both_formats_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_run(a.path(), "fig2b");
    small_run(b.path(), "fig2b");
    for ext in ["csv", "json"] {
        let pa = a.path().join(format!("fig2b.{ext}"));
        let pb = b.path().join(format!("fig2b.{ext}"));
        assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(&pb).unwrap(), "{ext}");
    }
}

#[test]
fn output_dir_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let out = bench()
        .args(["run", "--preset", "fig3a", "--set", "sweep.count=5", "--format", "csv"])
        .env("CQNC_OUTPUT_DIR", d.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.path().join("fig3a.csv").exists());
    assert!(!d.path().join("fig3a.json").exists());
}

#[test]
fn compare_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    small_run(d.path(), "fig2b");
    let csv = d.path().join("fig2b.csv");
    let json = d.path().join("fig2b.json");
    let (c, j) = (csv.to_str().unwrap(), json.to_str().unwrap());
    assert_eq!(code(&["compare", c, j, "--tolerance", "0"]), 0);

    // Scale every value of one total column by 1 + 1e-6.
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let col = header.split(',').position(|h| h == "N10.total").unwrap();
    let mut bumped = format!("{header}\n");
    for l in lines {
        let mut f: Vec<String> = l.split(',').map(str::to_owned).collect();
        let v: f64 = f[col].parse().unwrap();
        f[col] = format!("{:.16e}", v * (1.0 + 1e-6));
        bumped.push_str(&f.join(","));
        bumped.push('\n');
    }
    let p = d.path().join("bumped.csv");
    std::fs::write(&p, bumped).unwrap();
    let p = p.to_str().unwrap();
    assert_eq!(code(&["compare", c, p]), 1);
    assert_eq!(code(&["compare", c, p, "--tolerance", "1e-5"]), 0);
    assert_eq!(code(&["compare", c, p, "--columns", "N0.total"]), 0);

    let other = tempfile::tempdir().unwrap();
    run_ok(&["run", "--preset", "fig2b", "--set", "sweep.count=12", "--out", other.path().to_str().unwrap()]);
    let o = other.path().join("fig2b.csv");
    assert_eq!(code(&["compare", c, o.to_str().unwrap()]), 1);
}

#[test]
fn cqnc_engine_refuses_mismatched_atoms() {
    let d = tempfile::tempdir().unwrap();
    let out = bench()
        .args(["run", "--preset", "fig2b", "--set", "atomic.coupling_mismatch=1e-3", "--out"])
        .arg(d.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn validate_flags_narrow_squeezing_bandwidth() {
    assert_eq!(code(&["validate", "--preset", "fig2b"]), 0);
    assert_eq!(code(&["validate", "--preset", "fig2b", "--set", "squeezing.bandwidth_x_hz=1"]), 1);
}

#[test]
fn presets_list_and_show() {
    let out = run_ok(&["presets", "list"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    let shown = String::from_utf8(run_ok(&["presets", "show", "fig4"]).stdout).unwrap();
    assert!(shown.parse::<toml::Table>().is_ok());
    assert_eq!(code(&["presets", "show", "fig9"]), 1);
}

#[test]
fn config_errors_exit_one() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("bad.toml");
    std::fs::write(&p, "schema_version = 1\nname = \"bad\"\n[mechanical]\nomega_m_hz = 3e5\n").unwrap();
    let out = bench().args(["run", "--config"]).arg(&p).arg("--out").arg(d.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert_eq!(code(&["run", "--preset", "fig2b", "--set", "cavity.nonsense=1"]), 1);
}

#[test]
fn shown_preset_runs_as_config_file() {
    let d = tempfile::tempdir().unwrap();
    let doc = run_ok(&["presets", "show", "fig5b"]).stdout;
    let p = d.path().join("mine.toml");
    std::fs::write(&p, doc).unwrap();
    let dir = d.path().to_str().unwrap();
    run_ok(&["run", "--config", p.to_str().unwrap(), "--set", "sweep.count=7", "--out", dir, "--name", "a"]);
    run_ok(&["run", "--preset", "fig5b", "--set", "sweep.count=7", "--out", dir, "--name", "b"]);
    let (a, b) = (d.path().join("a.csv"), d.path().join("b.csv"));
    assert_eq!(code(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--tolerance", "0"]), 0);
}
