use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mvmedian::io::{encode_pnm, read_pfm, write_pfm};
use mvmedian::ImageGrid;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mvmedian"));
    c.env_remove("MVMEDIAN_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = path(dir, name);
    fs::write(&p, text).unwrap();
    p
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn pgm(dir: &TempDir, name: &str, rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> PathBuf {
    let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
    let img = ImageGrid::new(vec![rows, cols], 1, data).unwrap();
    let p = path(dir, name);
    fs::write(&p, encode_pnm(&img, 255).unwrap()).unwrap();
    p
}

#[test]
fn oja_quadrilateral_gives_diagonal_intersection() {
    let dir = TempDir::new().unwrap();
    let input = csv(&dir, "quad.csv", "x,y\n0,0\n4,0\n5,3\n1,4\n");
    let out = path(&dir, "r.json");
    ok(&["median", "--in", s(&input), "--method", "oja", "--out", s(&out)]);
    let r = json(&out);
    let p: Vec<f64> = serde_json::from_value(r["representative"].clone()).unwrap();
    // (0,0)-(5,3) meets (4,0)-(1,4) at t = 16/29.
    let t = 16.0 / 29.0;
    assert!((p[0] - 5.0 * t).abs() < 1e-8 && (p[1] - 3.0 * t).abs() < 1e-8, "{p:?}");
    assert!(r["status"].is_string());
}

#[test]
fn empty_csv_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let input = csv(&dir, "empty.csv", "x,y\n");
    let out = run(&["median", "--in", s(&input), "--method", "l1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let input = csv(&dir, "p.csv", "x,y\n0,0\n1,1\n");
    assert_eq!(run(&["median", "--in", s(&input), "--method", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["median", "--in", s(&path(&dir, "missing.csv"))]).status.code(), Some(2));
    assert_eq!(run(&["median", "--in", s(&input), "--method", "rank"]).status.code(), Some(2));
    assert_eq!(run(&["median", "--in", s(&input), "--bogus"]).status.code(), Some(2));
}

#[test]
fn halfspace_reports_depth() {
    let dir = TempDir::new().unwrap();
    let input = csv(&dir, "inner.csv", "x,y\n0,0\n6,0\n0,6\n1,2\n");
    let stdout = ok(&["median", "--in", s(&input), "--method", "halfspace"]).stdout;
    let r: Value = serde_json::from_slice(&stdout).unwrap();
    assert_eq!(r["depth"].as_f64(), Some(2.0));
    assert!(r["median_set"].as_array().is_some_and(|v| !v.is_empty()));
}

#[test]
fn checkerboard_is_a_root_signal() {
    let dir = TempDir::new().unwrap();
    let input = pgm(&dir, "board.pgm", 12, 16, |i, j| if (i + j) % 2 == 0 { 200.0 } else { 30.0 });
    let out = path(&dir, "out.pgm");
    ok(&[
        "filter",
        "--in",
        s(&input),
        "--out",
        s(&out),
        "--aggregator",
        "rank",
        "--radius",
        "1.5",
        "--iterations",
        "1",
    ]);
    assert_eq!(fs::read(&input).unwrap(), fs::read(&out).unwrap());
}

#[test]
fn constant_colour_image_is_unchanged() {
    let dir = TempDir::new().unwrap();
    let img = ImageGrid::new(vec![6, 7], 3, [10.0, 120.0, 240.0].repeat(42)).unwrap();
    let input = path(&dir, "c.ppm");
    fs::write(&input, encode_pnm(&img, 255).unwrap()).unwrap();
    let out = path(&dir, "out.ppm");
    ok(&["filter", "--in", s(&input), "--out", s(&out), "--aggregator", "l1"]);
    assert_eq!(fs::read(&input).unwrap(), fs::read(&out).unwrap());
}

#[test]
fn stripes_invert_and_return() {
    let dir = TempDir::new().unwrap();
    let input = pgm(&dir, "stripes.pgm", 9, 10, |_, j| if j % 2 == 0 { 255.0 } else { 0.0 });
    let once = path(&dir, "once.pgm");
    let twice = path(&dir, "twice.pgm");
    ok(&["filter", "--in", s(&input), "--out", s(&once), "--aggregator", "rank", "--iterations", "1"]);
    ok(&["filter", "--in", s(&input), "--out", s(&twice), "--aggregator", "rank", "--iterations", "2"]);
    assert_ne!(fs::read(&input).unwrap(), fs::read(&once).unwrap());
    assert_eq!(fs::read(&input).unwrap(), fs::read(&twice).unwrap());
}

#[test]
fn mcm_leaves_a_linear_ramp_alone() {
    let dir = TempDir::new().unwrap();
    let (rows, cols) = (10, 12);
    let data = (0..rows * cols).map(|k| 0.25 * (k / cols) as f64 - 0.75 * (k % cols) as f64).collect();
    let ramp = ImageGrid::new(vec![rows, cols], 1, data).unwrap();
    let input = path(&dir, "ramp.pfm");
    write_pfm(&input, &ramp).unwrap();
    let prefix = path(&dir, "mcm");
    ok(&["pde", "--rhs", "mcm", "--in", s(&input), "--steps", "5", "--dt", "0.1", "--out", s(&prefix)]);
    let last = read_pfm(format!("{}_00005.pfm", s(&prefix))).unwrap();
    assert_eq!(fs::read(&input).unwrap(), fs::read(format!("{}_00005.pfm", s(&prefix))).unwrap());
    assert_eq!(last.data(), ramp.data());
    let summary = json(Path::new(&format!("{}_summary.json", s(&prefix))));
    assert_eq!(summary["steps"].as_u64(), Some(5));
}

#[test]
fn verify_guichard_morel_errors_decrease() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "gm.json");
    ok(&[
        "verify",
        "--experiment",
        "guichard_morel",
        "--radii",
        "0.4,0.2,0.1",
        "--samples",
        "20000",
        "--max-samples",
        "0",
        "--out",
        s(&out),
    ]);
    let r = json(&out);
    let e: Vec<f64> = serde_json::from_value(r["relative_errors"].clone()).unwrap();
    assert_eq!(e.len(), 3);
    assert!(e[2] < e[0], "{e:?}");
    assert!(path(&dir, "gm_trials.csv").exists());
}

#[test]
fn depth_raster_peaks_at_the_inner_point() {
    let dir = TempDir::new().unwrap();
    let input = csv(&dir, "inner.csv", "x,y\n0,0\n6,0\n0,6\n1,2\n");
    let out = path(&dir, "depth.pfm");
    ok(&["depth", "--in", s(&input), "--grid", "12", "12", "--out", s(&out)]);
    let img = read_pfm(&out).unwrap();
    let max = img.data().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(max, 2.0);
    // Cell width 0.5; row 0 is the top, y = 6.
    let (i, j) = (((6.0 - 2.0) / 0.5) as usize, (1.0 / 0.5) as usize);
    assert_eq!(img.data()[i * 12 + j], 2.0);
}

#[test]
fn help_documents_defaults() {
    for (cmd, needles) in [
        ("median", &["[default: l1]"][..]),
        ("filter", &["[default: rank]", "[default: mirror]", "[default: 1]"]),
        ("pde", &["[default: 10", "[default: 1]"]),
        ("verify", &["[default: 20240917]", "[default: 100]"]),
        ("depth", &["[default: 256 256]"]),
    ] {
        let text = String::from_utf8(ok(&[cmd, "--help"]).stdout).unwrap();
        for n in needles {
            assert!(text.contains(n), "{cmd} --help lacks {n}:\n{text}");
        }
        assert!(text.contains("--threads"));
    }
}

#[test]
fn config_file_supplies_flags_and_rejects_unknown_keys() {
    let dir = TempDir::new().unwrap();
    let input = csv(&dir, "quad.csv", "x,y\n0,0\n4,0\n5,3\n1,4\n");
    let cfg = path(&dir, "cfg.toml");
    fs::write(&cfg, format!("threads = 1\n[median]\nin = {:?}\nmethod = \"halfspace\"\n", s(&input))).unwrap();
    let r: Value = serde_json::from_slice(&ok(&["--config", s(&cfg), "median"]).stdout).unwrap();
    assert_eq!(r["method"], "halfspace");
    let r: Value = serde_json::from_slice(&ok(&["--config", s(&cfg), "median", "--method", "l1"]).stdout).unwrap();
    assert_eq!(r["method"], "l1");

    fs::write(&cfg, "[median]\nmethd = \"l1\"\n").unwrap();
    assert_eq!(run(&["--config", s(&cfg), "median", "--in", s(&input)]).status.code(), Some(2));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out = path(&dir, &format!("eq{threads}.json"));
        ok(&[
            "--threads",
            threads,
            "verify",
            "--experiment",
            "equivariance:oja:affine",
            "--trials",
            "12",
            "--out",
            s(&out),
        ]);
        reports.push((fs::read(&out).unwrap(), fs::read(path(&dir, &format!("eq{threads}_trials.csv"))).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);

    let data = (0..16 * 16 * 3).map(|k| ((k * 37 + k / 3 * 91) % 256) as f64).collect();
    let input = path(&dir, "noise.ppm");
    fs::write(&input, encode_pnm(&ImageGrid::new(vec![16, 16], 3, data).unwrap(), 255).unwrap()).unwrap();
    let a = path(&dir, "a.ppm");
    let b = path(&dir, "b.ppm");
    ok(&["--threads", "1", "filter", "--in", s(&input), "--out", s(&a), "--aggregator", "l1"]);
    bin()
        .env("MVMEDIAN_THREADS", "3")
        .args(["filter", "--in", s(&input), "--out", s(&b), "--aggregator", "l1"])
        .status()
        .unwrap()
        .success()
        .then_some(())
        .unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
