use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rwl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rwl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_NS: &str = "[study]\nkind = \"ns-run\"\n[grid]\nL = 6.283185307179586\nnx = 16\nnz = 4\n\
                        [physics]\neps = [0.2, 0.1]\n[run]\nt_end = 0.1\ndt = 0.01\nsnapshot_stride = 5\ntolerance = 1e-3\n";

#[test]
fn same_config_gives_identical_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ns.toml", SMALL_NS);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        let o = rwl(&["--threads", "1", "ns-run", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ma = fs::read_to_string(a.join("MANIFEST")).unwrap();
    let mb = fs::read_to_string(b.join("MANIFEST")).unwrap();
    assert!(ma.starts_with("status = COMPLETE\n"));
    assert!(ma.contains("  eps_0.1/ns.csv\n"));
    assert_eq!(ma, mb);
    assert_eq!(fs::read_to_string(a.join("config.toml")).unwrap(), SMALL_NS);
}

#[test]
fn config_errors_are_listed_with_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "bad.toml",
        "[study]\nkind = \"ns-run\"\n[grid]\nnx = 33\n[physics]\ngamma = 1.2\nbogus = 3\n",
    );
    let out = tmp.path().join("out");
    let o = rwl(&["ns-run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4:") && err.contains("even"), "{err}");
    assert!(err.contains("line 6:") && err.contains("γ must exceed 3/2"), "{err}");
    assert!(err.contains("line 7:") && err.contains("unknown key 'bogus'"), "{err}");
    // nothing is written for an invalid configuration
    assert!(!out.exists());
}

#[test]
fn limit_study_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "limit.toml",
        "[study]\nkind = \"limit-study\"\n[grid]\nL = 6.283185307179586\nnx = 32\nnz = 4\n\
         [physics]\neps = [0.2, 0.1]\n[data]\npreset = \"vortex-pair\"\namplitude = 1.0\n\
         [run]\nt_end = 0.2\ndt = 0.01\nsnapshot_stride = 5\ndump_fields = false\n",
    );
    let out = tmp.path().join("out");
    let o = rwl(&["limit-study", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for eps in ["eps_0.2", "eps_0.1"] {
        for f in ["ns.csv", "bounds.csv", "limit_error.csv", "rel_entropy.csv", "final/sigma.rwl"] {
            assert!(out.join(eps).join(f).is_file(), "missing {eps}/{f}");
        }
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert!(lines.next().unwrap().starts_with("delta,eps,sigma_l2,"));
    assert_eq!(lines.count(), 2);
    let manifest = fs::read_to_string(out.join("MANIFEST")).unwrap();
    assert!(manifest.contains("  summary.csv\n"));
}

#[test]
fn failed_run_leaves_incomplete_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "project.toml",
        "[study]\nkind = \"project\"\n[grid]\nnx = 16\nnz = 4\n[data]\npreset = \"dumps\"\ninput = \"/nonexistent/rwl\"\n",
    );
    let out = tmp.path().join("out");
    let o = rwl(&["project", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    let manifest = fs::read_to_string(out.join("MANIFEST")).unwrap();
    assert!(manifest.starts_with("status = INCOMPLETE\n"), "{manifest}");
    assert!(manifest.contains("  config.toml\n"));
}

#[test]
fn project_round_trips_through_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let first = write_config(
        tmp.path(),
        "p1.toml",
        "[study]\nkind = \"project\"\n[grid]\nnx = 32\nnz = 4\n[data]\npreset = \"reference\"\ndelta = 0.25\n",
    );
    let a = tmp.path().join("a");
    let o = rwl(&["project", "--config", &first, "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let input = a.join("input");
    let second = write_config(
        tmp.path(),
        "p2.toml",
        &format!(
            "[study]\nkind = \"project\"\n[grid]\nnx = 32\nnz = 4\n[data]\npreset = \"dumps\"\ninput = \"{}\"\ndelta = 0.25\n",
            input.display()
        ),
    );
    let b = tmp.path().join("b");
    let o = rwl(&["project", "--config", &second, "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["orthogonality.csv", "delta_0.25/q.rwl", "delta_0.25/V_3.rwl"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn invariant_failure_exits_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    // a tolerance no run can meet
    let cfg = write_config(
        tmp.path(),
        "qg.toml",
        "[study]\nkind = \"qg-run\"\n[grid]\nnx = 32\n[run]\nt_end = 1.0\ndt = 0.05\ntolerance = 1e-300\n",
    );
    let out = tmp.path().join("out");
    let o = rwl(&["qg-run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let checks = fs::read_to_string(out.join("checks.txt")).unwrap();
    assert!(checks.contains("FAIL energy_relative_drift"));
}

#[test]
fn selftest_subset_runs() {
    let o = rwl(&["selftest", "--only", "1,5,9"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS criterion")).count(), 3, "{text}");
}
