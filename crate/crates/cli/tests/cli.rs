use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lpcascade"))
}

fn run(args: &[&str], config: Option<(&Path, &str)>) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    if let Some((path, text)) = config {
        fs::write(path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn construct_euler_writes_sixteen_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(
        &["construct", "--out", out.to_str().unwrap()],
        Some((&dir.path().join("c.cfg"), "kind = euler\ns = 1\nQ = 6\n")),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let field = lpcascade::SpectralField::from_json(&fs::read_to_string(out.join("field.json")).unwrap()).unwrap();
    assert_eq!(field.len(), 16);
    assert!(out.join("manifest.json").exists());
    assert!(out.join("config.txt").exists());
}

#[test]
fn gap_failure_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = "kind = nse\nshells = 3, 7\nc = 0.2\neps = 0.5\n";
    let o = run(&["construct", "--out", out.to_str().unwrap()], Some((&dir.path().join("c.cfg"), cfg)));
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &["construct", "--out", out.to_str().unwrap(), "--set", "eps=0.51"],
        Some((&dir.path().join("c.cfg"), cfg)),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("construction.json")).unwrap()).unwrap();
    assert_eq!(rep["gaps"]["pass"], serde_json::Value::Bool(true));
    assert_eq!(csv_rows(&out.join("blocks.csv")).len(), 12);
}

#[test]
fn missing_key_and_unknown_key_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["construct", "--out", out.to_str().unwrap()], Some((&dir.path().join("c.cfg"), "kind = euler\ns = 1\n")));
    assert_eq!(o.status.code(), Some(2));
    let o = run(
        &["construct", "--out", out.to_str().unwrap()],
        Some((&dir.path().join("c.cfg"), "kind = euler\ns = 1\nQ = 4\nbogus = 3\n")),
    );
    assert_eq!(o.status.code(), Some(2));
    // --out is required
    let o = bin().args(["construct", "--set", "kind=euler"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transfer_has_one_row_per_probe() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(
        &["analyze", "transfer", "--out", out.to_str().unwrap()],
        Some((&dir.path().join("c.cfg"), "kind = euler\ns = 1\nQ = 8\n")),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("transfer.csv"));
    assert_eq!(rows.len(), 7);
    for r in rows {
        let im_f2: f64 = r[4].parse().unwrap();
        assert!(im_f2 > 0.0);
    }
}

#[test]
fn triads_edge_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(
        &["analyze", "triads", "--out", out.to_str().unwrap()],
        Some((&dir.path().join("c.cfg"), "kind = nse\nshells = 2, 5\nc = 0.2\neps = 0.51\n")),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("triads.csv"));
    assert_eq!(rows.len(), 2);
    // C vanishes for the first block, A for the last
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 0.0);
    for r in &rows {
        assert!(r[7].parse::<f64>().unwrap() < 1e-10);
    }
}

#[test]
fn triads_on_huge_blocks_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(
        &["analyze", "triads", "--out", out.to_str().unwrap(), "--set", "j=2"],
        Some((&dir.path().join("c.cfg"), "kind = nse\nshells = 3, 8, 17\nc = 0.2\neps = 0.51\n")),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible block"));
}

#[test]
fn besov_weights_of_single_mode_shells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(
        &["analyze", "besov", "--out", out.to_str().unwrap()],
        Some((&dir.path().join("c.cfg"), "kind = euler\ns = 1\nQ = 6\nbesov_s = 1\nbesov_r = inf\n")),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("besov.csv"));
    // shell q holds the cosine 2^{-q} cos(2^q x) alone for q = 1..Q
    let mut seen = 0;
    for r in rows {
        let q: i32 = r[0].parse().unwrap();
        if (1..=6).contains(&q) {
            let w: f64 = r[3].parse().unwrap();
            assert!((w - 1.0).abs() <= 1e-9, "q={q} weight {w}");
            seen += 1;
        }
    }
    assert_eq!(seen, 6);
}

#[test]
fn bony_parts_sum_to_trilinear() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(
        &["analyze", "bony", "--out", out.to_str().unwrap()],
        Some((&dir.path().join("c.cfg"), "kind = nse\nshells = 3\nc = 0.2\neps = 0.51\nq = 2, 3\n")),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for r in csv_rows(&out.join("bony.csv")) {
        let sum: f64 = r[5].parse().unwrap();
        let direct: f64 = r[6].parse().unwrap();
        assert!((sum - direct).abs() <= 1e-10 * direct.abs().max(1e-300));
    }
}

const EVOLVE: &str = "kind = euler\ns = 1\nQ = 3\nN = 32\ndt = 1e-3\nT = 5e-3\nprobe_shells = 1, 2\nbesov = 1:2\n";

#[test]
fn evolve_is_deterministic_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = dir.path().join("c.cfg");
    for out in [&a, &b] {
        let o = run(&["evolve", "--out", out.to_str().unwrap()], Some((&cfg, EVOLVE)));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let da = fs::read(a.join("diagnostics.csv")).unwrap();
    assert_eq!(da, fs::read(b.join("diagnostics.csv")).unwrap());
    // re-run from the written config
    let c = dir.path().join("c");
    let o = bin()
        .args(["evolve", "--out", c.to_str().unwrap(), "--config", a.join("config.txt").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(da, fs::read(c.join("diagnostics.csv")).unwrap());
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(c.join("manifest.json")).unwrap());

    let rows = csv_rows(&a.join("diagnostics.csv"));
    assert_eq!(rows.len(), 6);
    let header = csv::Reader::from_path(a.join("diagnostics.csv")).unwrap().headers().unwrap().clone();
    assert!(header.iter().any(|h| h == "probe_2_1_u2_im"));
    assert!(header.iter().any(|h| h == "probe_4_1_u2_im"));
    assert!(!header.iter().any(|h| h.starts_with("probe_8_1")));
}

#[test]
fn evolve_t_zero_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["evolve", "--out", out.to_str().unwrap(), "--set", "T=0"], Some((&dir.path().join("c.cfg"), EVOLVE)));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("diagnostics.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "0");
}

#[test]
fn evolve_refuses_band_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["evolve", "--out", out.to_str().unwrap(), "--set", "Q=5"], Some((&dir.path().join("c.cfg"), EVOLVE)));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dealias band"));
}

#[test]
fn report_concatenates_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let o = run(
        &["analyze", "transfer", "--out", a.to_str().unwrap()],
        Some((&dir.path().join("c.cfg"), "kind = euler\ns = 1\nQ = 4\n")),
    );
    assert!(o.status.success());
    let r = dir.path().join("r");
    let o = bin().args(["report", "--in", a.to_str().unwrap(), "--out", r.to_str().unwrap()]).output().unwrap();
    assert!(o.status.success());
    let text = fs::read_to_string(r.join("report.csv")).unwrap();
    assert!(text.starts_with("# source: "));
    assert!(text.contains("command: analyze transfer"));
    assert!(text.contains("q,re_f1"));
}
