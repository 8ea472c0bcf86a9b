//! End-to-end runs of the `tprod` binary.

use std::path::Path;
use std::process::{Command, Output};

use tubal::io;
use tubal::report::{read_json, FactorManifest, ProblemManifest, SolveReport};
use tubal::{relative_error, tprod, Tensor3};

fn tprod_cmd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tprod")).args(args).current_dir(dir).output().expect("run tprod")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = tprod_cmd(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn gravity_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&["generate", "--kind", "gravity", "--n", "32", "--d", "0.8", "--alpha", "0.46", "--xtrue", "ones:3", "--seeds", "1..3", "--out", "p"], d);
    assert_eq!(io::load(d.join("p/A.t3b")).unwrap().shape(), (32, 32, 32));
    assert_eq!(io::load(d.join("p/Xtrue.t3b")).unwrap().shape(), (32, 3, 32));
    assert_eq!(io::load(d.join("p/L.t3b")).unwrap().shape(), (31, 32, 32));
    let m: ProblemManifest = read_json(d.join("p/manifest.json")).unwrap();
    assert_eq!(m.seeds, vec![1, 2, 3]);
    assert!(d.join("p/B_3.t3b").is_file());

    let text = ok(&["decompose", "tgsvd", "--a", "p/A.t3b", "--b", "p/L.t3b", "--out", "f"], d);
    assert!(text.contains("pass"));
    for f in ["U", "V", "X", "DA", "DB"] {
        assert!(d.join(format!("f/{f}.t3b")).is_file());
    }
    let fm: FactorManifest = read_json(d.join("f/manifest.json")).unwrap();
    assert_eq!(fm.factors.len(), 5);
    assert_eq!(fm.ranks.as_deref(), Some(&[32usize; 32][..]));
    assert_eq!(fm.uniform, Some(true));
    assert!(fm.residuals.values().all(|&r| r <= 1e-9), "{:?}", fm.residuals);

    ok(&["solve", "--problem", "p", "--mu", "7.13e-2", "--oracle", "normal", "--out", "s"], d);
    let r: SolveReport = read_json(d.join("s/report.json")).unwrap();
    assert!(r.passed);
    assert_eq!(r.errors.len(), 3);
    assert!(r.max_normal_residual <= 1e-8);
    assert!(r.oracle_deviation.unwrap() <= 1e-8);
    assert!(r.mean_error.unwrap() < 0.1);
    // The stored solution is the one the report scored.
    let x = io::load(d.join("s/X_2.t3b")).unwrap();
    let xt = io::load(d.join("p/Xtrue.t3b")).unwrap();
    assert_eq!(relative_error(&x, &xt).unwrap(), r.errors[1]);
    assert!(d.join("s/summary.txt").is_file());

    ok(&["solve", "--problem", "p", "--mu-grid", "1e-4:1e4:9", "--out", "sw"], d);
    let sw: SolveReport = read_json(d.join("sw/report.json")).unwrap();
    let sweep = sw.sweep.unwrap();
    let best = sweep.iter().map(|p| p.mean_error).fold(f64::INFINITY, f64::min);
    assert_eq!(sw.mean_error, Some(best));
    ok(&["image", "plot", "--report", "sw/report.json", "--out", "sweep.svg"], d);
    assert!(std::fs::read_to_string(d.join("sweep.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn tcsd_rejects_non_orthogonal_input() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let q = Tensor3::from_fn(10, 3, 2, |i, j, k| (i + 2 * j + k) as f64 * 0.1);
    io::save(d.join("Q.t3b"), &q).unwrap();
    let out = tprod_cmd(&["decompose", "tcsd", "--q", "Q.t3b", "--m1", "6"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not orthonormal"));
}

#[test]
fn tsvd_and_tcsd_commands_write_factors() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let a = Tensor3::from_fn(6, 4, 3, |i, j, k| ((i * 7 + j * 3 + k * 5) % 11) as f64 - 5.0);
    io::save(d.join("A.t3b"), &a).unwrap();
    ok(&["decompose", "tsvd", "--a", "A.t3b", "--out", "svd"], d);
    let u = io::load(d.join("svd/U.t3b")).unwrap();
    let q = tubal::tsvd(&a).unwrap().u.sub_tensor(0..6, 0..2).unwrap();
    io::save(d.join("Q.t3b"), &q).unwrap();
    ok(&["decompose", "tcsd", "--q", "Q.t3b", "--m1", "3", "--out", "csd"], d);
    ok(&["decompose", "tcsd-general", "--q", "svd/U.t3b", "--m1", "3", "--n1", "2", "--out", "gcsd"], d);
    let m: FactorManifest = read_json(d.join("csd/manifest.json")).unwrap();
    assert!(m.passed && m.factors.len() == 5);
    assert_eq!(u.shape(), (6, 6, 3));
    // Missing operand is reported before any work.
    let out = tprod_cmd(&["decompose", "tgsvd", "--a", "A.t3b"], d);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runs_are_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for out in ["p1", "p2"] {
        ok(&["generate", "--n", "16", "--seeds", "4,9", "--out", out], d);
        ok(&["solve", "--problem", out, "--mu", "0.1", "--out", &format!("{out}/s")], d);
    }
    for f in ["A.t3b", "B_4.t3b", "B_9.t3b", "Xtrue.t3b", "s/X_9.t3b"] {
        assert_eq!(std::fs::read(d.join("p1").join(f)).unwrap(), std::fs::read(d.join("p2").join(f)).unwrap(), "{f}");
    }
    let r1: SolveReport = read_json(d.join("p1/s/report.json")).unwrap();
    let r2: SolveReport = read_json(d.join("p2/s/report.json")).unwrap();
    assert_eq!(r1.without_timing(), r2.without_timing());
}

#[test]
fn image_round_trip_and_panel() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let img = image::GrayImage::from_fn(20, 12, |x, y| image::Luma([(x * 11 + y * 5) as u8]));
    img.save(d.join("in.png")).unwrap();
    ok(&["image", "import", "--input", "in.png", "--out", "x.t3b"], d);
    assert_eq!(io::load(d.join("x.t3b")).unwrap().shape(), (12, 1, 20));
    ok(&["image", "export", "--input", "x.t3b", "--out", "out.png"], d);
    assert_eq!(image::open(d.join("out.png")).unwrap().to_luma8(), img);
    ok(&["image", "panel", "--inputs", "x.t3b", "in.png", "--out", "panel.png"], d);
    assert_eq!(image::open(d.join("panel.png")).unwrap().width(), 46);
    let out = tprod_cmd(&["generate", "--kind", "gaussian", "--n", "16", "--xtrue", "image:in.png", "--out", "bad"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("16x16"));
}

#[test]
fn blurred_constant_image_is_flat_inside() {
    let n = 300;
    let a = tubal::problems::BlurSpec::gaussian(n, 9).operator().unwrap();
    let b = tprod(&a, &Tensor3::ones(n, 1, n)).unwrap();
    // Rows feel the truncated kernel near the top and bottom edges only;
    // the tube direction wraps circularly.
    let mid = b.get(n / 2, 0, n / 2);
    for i in 10..n - 10 {
        for k in 0..n {
            assert!((b.get(i, 0, k) - mid).abs() <= 1e-12 * mid);
        }
    }
    assert!(b.get(0, 0, 0) < 0.9 * mid);
}

#[test]
fn restoration_beats_blurred_input() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&["generate", "--kind", "gaussian", "--n", "48", "--sigma", "3", "--band", "9", "--seeds", "1", "--out", "g"], d);
    ok(&["solve", "--problem", "g", "--mu-grid", "1e-2:1e8:21", "--out", "s"], d);
    let r: SolveReport = read_json(d.join("s/report.json")).unwrap();
    let blurred = relative_error(&io::load(d.join("g/B_1.t3b")).unwrap(), &io::load(d.join("g/Xtrue.t3b")).unwrap()).unwrap();
    assert!(r.mean_error.unwrap() < blurred, "{} vs {blurred}", r.mean_error.unwrap());
    ok(&["image", "panel", "--inputs", "g/Xtrue.t3b", "g/B_1.t3b", "s/X_1.t3b", "--out", "panel.png"], d);
}
