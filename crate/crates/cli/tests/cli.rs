//! End-to-end runs of the `kdim` binary against golden outputs.
//!
//! Set `KDIM_UPDATE_GOLDEN=1` to rewrite the files under `tests/golden`.

use std::path::{Path, PathBuf};
use std::process::Command;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn golden_dir(case: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(case)
}

fn out_dir(case: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(case);
    let _ = std::fs::remove_dir_all(&d);
    d
}

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn kdim(args: &[&str], config: &Path, out: &Path, extra: &[&str]) -> Outcome {
    let o = Command::new(env!("CARGO_BIN_EXE_kdim"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("run kdim");
    Outcome {
        code: o.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
    }
}

/// Manifest text without the run-dependent lines.
fn stable_manifest(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("\"wall_clock_secs\"") && !l.contains("\"threads\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn check_golden(case: &str, out: &Path, files: &[&str]) {
    let golden = golden_dir(case);
    let update = std::env::var_os("KDIM_UPDATE_GOLDEN").is_some();
    for name in files.iter().copied().chain(["manifest.json"]) {
        let mut got = std::fs::read_to_string(out.join(name)).unwrap_or_else(|e| panic!("{case}/{name}: {e}"));
        if name == "manifest.json" {
            got = stable_manifest(&got);
        }
        let path = golden.join(name);
        if update {
            std::fs::create_dir_all(&golden).unwrap();
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("missing golden {}: {e}", path.display()));
        assert!(got == want, "{case}/{name} differs from golden");
    }
}

fn golden_case(case: &str, args: &[&str], files: &[&str], expect_code: i32) -> Outcome {
    let out = out_dir(case);
    let o = kdim(args, &fixtures().join(format!("{case}.json")), &out, &["--seed", "7", "--threads", "1"]);
    assert_eq!(o.code, expect_code, "{case}: stdout {} stderr {}", o.stdout, o.stderr);
    check_golden(case, &out, files);
    o
}

#[test]
fn entropy_singleton_golden() {
    golden_case("entropy_singleton", &["entropy"], &["entropy.json", "entropy.csv"], 0);
}

#[test]
fn entropy_disk_golden() {
    golden_case("entropy_disk", &["entropy"], &["entropy.json", "entropy.csv"], 0);
}

#[test]
fn kdim_disk_golden() {
    let o = golden_case("kdim_disk", &["kdim"], &["psi.json", "psi.csv"], 0);
    assert!(o.stdout.contains("psi_upper"));
}

#[test]
fn smallpoly_found_golden() {
    let o = golden_case("smallpoly_curve", &["smallpoly"], &["certificate.json"], 0);
    assert!(o.stdout.starts_with("found"));
}

#[test]
fn smallpoly_not_found_exits_3() {
    golden_case("smallpoly_disk_exhaustive", &["smallpoly"], &["not_found.json"], 3);
}

#[test]
fn witness_build_golden() {
    golden_case("witness_build", &["witness", "build"], &["witness.json"], 0);
}

#[test]
fn witness_check_prints_margin() {
    let o = golden_case("witness_check", &["witness", "check"], &["oracle.json"], 0);
    assert!(o.stdout.contains("margin = +"), "{}", o.stdout);
}

#[test]
fn gevrey_golden() {
    golden_case("gevrey_rational", &["gevrey"], &["gevrey.json"], 0);
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let first = out_dir("rerun_first");
    let o = kdim(&["kdim"], &fixtures().join("kdim_disk.json"), &first, &["--seed", "3"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let second = out_dir("rerun_second");
    let o = kdim(&["kdim"], &first.join("manifest.json"), &second, &[]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    for name in ["psi.json", "psi.csv"] {
        assert_eq!(std::fs::read(first.join(name)).unwrap(), std::fs::read(second.join(name)).unwrap(), "{name}");
    }
    let m1 = std::fs::read_to_string(first.join("manifest.json")).unwrap();
    let m2 = std::fs::read_to_string(second.join("manifest.json")).unwrap();
    assert_eq!(stable_manifest(&m1), stable_manifest(&m2));
}

#[test]
fn seed_enters_the_digest() {
    let a = out_dir("seed_a");
    let b = out_dir("seed_b");
    let cfg = fixtures().join("entropy_singleton.json");
    assert_eq!(kdim(&["entropy"], &cfg, &a, &["--seed", "1"]).code, 0);
    assert_eq!(kdim(&["entropy"], &cfg, &b, &["--seed", "2"]).code, 0);
    let da = std::fs::read_to_string(a.join("entropy.json")).unwrap();
    let db = std::fs::read_to_string(b.join("entropy.json")).unwrap();
    assert_ne!(da.lines().nth(1), db.lines().nth(1));
}

#[test]
fn malformed_json_reports_position() {
    let o = kdim(&["entropy"], &fixtures().join("malformed.json"), &out_dir("malformed"), &[]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("line 3, column 21"), "{}", o.stderr);
}

#[test]
fn unknown_subcommand_is_rejected() {
    let o = kdim(&["entropyy"], &fixtures().join("entropy_singleton.json"), &out_dir("unknown"), &[]);
    assert_eq!(o.code, 2);
}

#[test]
fn unknown_config_field_is_a_validation_error() {
    let dir = out_dir("unknown_field");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"r": 0.5, "degree": 1, "radius": 2}"#).unwrap();
    let o = kdim(&["witness", "build"], &cfg, &dir.join("out"), &[]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("radius"), "{}", o.stderr);
}

#[test]
fn low_precision_exits_4() {
    let o = kdim(&["smallpoly"], &fixtures().join("smallpoly_curve.json"), &out_dir("lowprec"), &["--precision-bits", "8"]);
    assert_eq!(o.code, 4, "{}", o.stderr);
}

#[test]
fn manifest_of_another_command_is_rejected() {
    let first = out_dir("cross_first");
    assert_eq!(kdim(&["witness", "build"], &fixtures().join("witness_build.json"), &first, &[]).code, 0);
    let o = kdim(&["gevrey"], &first.join("manifest.json"), &out_dir("cross_second"), &[]);
    assert_eq!(o.code, 2);
}
