use std::path::Path;
use std::process::{Command, Output};

use tat_cli::io::{read_grid, read_panel};
use tat_core::validate::parse_reports;

fn tat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tat")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("{body}\n[output]\ndir = {:?}\nkinds = [\"wave\", \"mean\", \"radon\"]\n", dir))
        .unwrap();
    path.to_str().unwrap().to_string()
}

const BUMP: &str = r#"
dim = 3
[phantom]
components = [{ kind = "smooth_bump", center = [0.1, 0.0, 0.0], radius = 0.45 }]
[grid]
sphere_resolution = 16
recon_points_per_axis = 9
"#;

#[test]
fn zero_phantom_gives_zero_panels_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "dim = 2\n[grid]\nsphere_resolution = 8\nrecon_points_per_axis = 5");
    let out = tat(&["forward", "-c", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for kind in ["wave", "mean", "radon"] {
        let p = read_panel(&dir.path().join(format!("{kind}.tatp"))).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
    }
    let out = tat(&["recon", "-c", &cfg, "-p", dir.path().join("wave.tatp").to_str().unwrap()]);
    assert!(out.status.success());
    let metrics = String::from_utf8(out.stdout).unwrap();
    for key in ["l2", "linf", "relative_l2"] {
        assert!(metrics.contains(&format!("\n{key}\t0.000000000e0\n")), "{metrics}");
    }
    assert!(read_grid(&dir.path().join("recon.tatg")).unwrap().values.iter().all(|&v| v == 0.0));
}

#[test]
fn end_to_end_bump_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BUMP);
    assert!(tat(&["phantom", "-c", &cfg]).status.success());
    assert!(tat(&["forward", "-c", &cfg]).status.success());
    let out = tat(&["recon", "-c", &cfg, "-p", dir.path().join("wave.tatp").to_str().unwrap()]);
    assert!(out.status.success());
    let metrics = String::from_utf8(out.stdout).unwrap();
    let rel: f64 = metrics.lines().find_map(|l| l.strip_prefix("relative_l2\t")).unwrap().parse().unwrap();
    assert!(rel < 0.05, "{metrics}");

    let truth = dir.path().join("phantom.tatg");
    let recon = dir.path().join("recon.tatg");
    let out = tat(&[
        "compare",
        truth.to_str().unwrap(),
        recon.to_str().unwrap(),
        "-o",
        dir.path().to_str().unwrap(),
        "--through",
        "0.1,0,0",
    ]);
    assert!(out.status.success());
    let slice = std::fs::read_to_string(dir.path().join("slice.txt")).unwrap();
    let mut lines = slice.lines();
    assert_eq!(lines.next(), Some("# x f_true f_recon"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 9);
    let peak = rows.iter().max_by(|a, b| a[1].total_cmp(&b[1])).unwrap();
    assert!((peak[1] - peak[2]).abs() < 0.05 * peak[1]);

    let same = tat(&["compare", truth.to_str().unwrap(), truth.to_str().unwrap(), "-o", dir.path().to_str().unwrap()]);
    assert!(String::from_utf8(same.stdout).unwrap().contains("linf\t0.000000000e0"));
    let diff = std::fs::read_to_string(dir.path().join("diff.txt")).unwrap();
    assert!(diff.lines().skip(1).all(|l| l.ends_with(" 0.000000000e0")));
}

#[test]
fn kind_mismatch_names_both_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{BUMP}\n[formula]\nvariant = \"kernel_kn\""));
    assert!(tat(&["forward", "-c", &cfg]).status.success());
    let out = tat(&["recon", "-c", &cfg, "-p", dir.path().join("wave.tatp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("radon") && err.contains("wave"), "{err}");
}

#[test]
fn corrupt_files_exit_3_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BUMP);
    assert!(tat(&["forward", "-c", &cfg]).status.success());
    let path = dir.path().join("wave.tatp");
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 5);
    std::fs::write(&path, &bytes).unwrap();
    let out = tat(&["recon", "-c", &cfg, "-p", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(&format!("byte {}", bytes.len())), "{err}");

    let grid = dir.path().join("bad.tatg");
    std::fs::write(&grid, b"TATX n=3\n").unwrap();
    let out = tat(&["compare", grid.to_str().unwrap(), grid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("byte 0"));
    let out = tat(&["recon", "-c", &cfg, "-p", dir.path().join("missing.tatp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn mismatched_grids_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BUMP);
    assert!(tat(&["phantom", "-c", &cfg]).status.success());
    let other = dir.path().join("other");
    std::fs::create_dir(&other).unwrap();
    let cfg2 = write_config(&other, &BUMP.replace("recon_points_per_axis = 9", "recon_points_per_axis = 5"));
    assert!(tat(&["phantom", "-c", &cfg2]).status.success());
    let out = tat(&[
        "compare",
        dir.path().join("phantom.tatg").to_str().unwrap(),
        other.join("phantom.tatg").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_and_config_errors_exit_1() {
    assert_eq!(tat(&["recon"]).status.code(), Some(1));
    assert_eq!(tat(&["bogus"]).status.code(), Some(1));
    assert_eq!(tat(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "dim = 3\nunknown_key = 2");
    assert_eq!(tat(&["forward", "-c", &cfg]).status.code(), Some(1));
}

#[test]
fn exterior_phantom_needs_flag() {
    let dir = tempfile::tempdir().unwrap();
    let body = "dim = 2\n[phantom]\ncomponents = [{ kind = \"ball\", center = [0.8, 0.0], radius = 0.4 }]\n[grid]\nsphere_resolution = 8";
    let cfg = write_config(dir.path(), body);
    let out = tat(&["forward", "-c", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(tat(&["forward", "-c", &cfg, "--allow-exterior"]).status.success());
}

#[test]
fn validate_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "dim = 3\n[validate]\ndims = [3]");
    let out = tat(&["validate", "-c", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("validate.txt")).unwrap();
    let reports = parse_reports(&text).unwrap();
    assert_eq!(reports.len(), 8);
    assert!(reports.iter().all(|r| r.ok()));

    let cfg = write_config(dir.path(), "dim = 3\n[validate]\ndims = [3]\nnegative_controls = true");
    assert_eq!(tat(&["validate", "-c", &cfg]).status.code(), Some(2));
    let text = std::fs::read_to_string(dir.path().join("validate.txt")).unwrap();
    assert_eq!(parse_reports(&text).unwrap().iter().filter(|r| !r.ok()).count(), 2);
}
