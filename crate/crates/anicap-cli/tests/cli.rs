use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn anicap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anicap")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn run(sub: &str, cfg: &str, out: &Path) -> (i32, Value) {
    let o = anicap(&[sub, "--config", cfg, "--out", out.to_str().unwrap()]);
    (o.status.code().unwrap(), report(out))
}

const ISO_SOLVE: &str = "n = 1\nomega0 = -0.5\n[norm]\nfamily = \"isotropic\"\n[solve]\np = 1.0\nf = \"1\"\n";

#[test]
fn solve_isotropic_curve_recovers_the_cap() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "c.toml", ISO_SOLVE);
    let out = t.path().join("out");
    let (code, r) = run("solve", &cfg, &out);
    assert_eq!(code, 0);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["task"], "solve");
    assert!(r["result"]["sup_error_vs_ell"].as_f64().unwrap() < 1e-6, "{}", r["result"]);
    for f in ["solution.csv", "curve.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
}

#[test]
fn surface_outputs_include_a_mesh() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "c.toml",
        "n = 2\nomega0 = -0.3\n[norm]\nfamily = \"isotropic\"\n[grid]\nresolution = \"8x16\"\n[measures]\nbody = \"ell\"\n",
    );
    let out = t.path().join("out");
    let (code, r) = run("measures", &cfg, &out);
    assert_eq!(code, 0, "{r}");
    let obj = std::fs::read_to_string(out.join("surface.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 8 * 16);
    assert!(obj.lines().any(|l| l.starts_with("f ")));
}

#[test]
fn condition_failure_is_a_result_not_an_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "c.toml", "n = 2\nomega0 = 0.5\n[norm]\nfamily = \"isotropic\"\n");
    let out = t.path().join("out");
    let (code, r) = run("check-condition", &cfg, &out);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["holds"], false);
}

#[test]
fn malformed_config_exits_with_config_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "c.toml", "n = 1\n[norm\nfamily = 3\n");
    let o = anicap(&["solve", "--config", &cfg, "--out", t.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).lines().last().unwrap()).unwrap();
    assert_eq!(err["error"], "ConfigError");

    // semantic errors still leave a report behind
    let cfg = write(t.path(), "d.toml", "n = 1\nomega0 = 2.0\n[norm]\nfamily = \"isotropic\"\n");
    let out = t.path().join("d");
    let (code, r) = run("check-norm", &cfg, &out);
    assert_eq!(code, 2);
    assert_eq!(r["status"], "error");
    assert_eq!(r["error"]["class"], "ConfigError");
}

#[test]
fn module_errors_exit_with_three() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "c.toml",
        "n = 2\nomega0 = 0.5\n[norm]\nfamily = \"isotropic\"\n[grid]\nresolution = \"8x16\"\n[solve]\np = 1.0\n",
    );
    let out = t.path().join("out");
    let (code, r) = run("solve", &cfg, &out);
    assert_eq!(code, 3, "{r}");
    assert_eq!(r["status"], "error");
    assert_eq!(r["error"]["class"], "ConditionFailed");
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "c.toml",
        "n = 1\nomega0 = -0.4\nseed = 3\n[norm]\nfamily = \"isotropic\"\n[grid]\nresolution = \"64\"\n[measures]\nbody = \"1.1*ell + 0.05*k1\"\nmc_samples = 5000\n",
    );
    let a = t.path().join("a");
    let b = t.path().join("b");
    assert_eq!(run("measures", &cfg, &a).0, 0);
    assert_eq!(run("measures", &cfg, &b).0, 0);
    let ra = std::fs::read_to_string(a.join("report.json")).unwrap();
    let rb = std::fs::read_to_string(b.join("report.json")).unwrap().replace(b.to_str().unwrap(), a.to_str().unwrap());
    assert_eq!(ra, rb);
}

#[test]
fn verify_exit_status_follows_the_suite() {
    let t = tempfile::tempdir().unwrap();
    let base = "n = 2\nomega0 = -0.3\n[norm]\nfamily = \"perturbed\"\nmatrix = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]\nepsilon = 0.05\nterms = [{ coef = 1.0, exps = [2, 2, 0] }]\n[grid]\nresolution = \"16x32\"\n";
    let good = write(t.path(), "g.toml", &format!("{base}[verify]\nspectral_cap = \"16x32\"\n"));
    let bad = write(t.path(), "b.toml", &format!("{base}[verify]\nspectral_cap = \"16x32\"\ncorrupt_q = 0.05\n"));
    let (code, r) = run("verify", &good, &t.path().join("g"));
    assert_eq!(code, 0, "{}", r["result"]);
    assert_eq!(r["result"]["passed"], true);
    let (code, r) = run("verify", &bad, &t.path().join("b"));
    assert_eq!(code, 1);
    assert_eq!(r["status"], "failed");
}

#[test]
fn flags_override_the_config_and_run_uses_its_task() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "c.toml", &format!("task = \"solve\"\n{ISO_SOLVE}"));
    let out = t.path().join("out");
    let o = anicap(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--resolution", "40", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["task"], "solve");
    assert_eq!(r["config"]["grid"]["resolution"], "40");
    assert_eq!(r["config"]["seed"], 9);
    assert_eq!(r["result"]["grid"]["primary"], 40);
}

#[test]
fn batch_runs_every_config() {
    let t = tempfile::tempdir().unwrap();
    let a = write(t.path(), "a.toml", &format!("task = \"solve\"\n{ISO_SOLVE}"));
    let b = write(t.path(), "b.toml", "task = \"check-norm\"\nn = 2\n[norm]\nfamily = \"isotropic\"\n");
    let out = t.path().join("out");
    let o = anicap(&["batch", &a, &b, "--jobs", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(report(&out.join("a"))["task"], "solve");
    assert_eq!(report(&out.join("b"))["task"], "check-norm");
}
