use std::path::PathBuf;
use std::process::{Command, Output};

fn holant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holant")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("holant-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_grid(name: &str, args: &[&str]) -> PathBuf {
    let out = holant(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = scratch(name);
    std::fs::write(&path, out.stdout).unwrap();
    path
}

#[test]
fn classify_generalized_equality() {
    let out = holant(&["classify", "--params", "1,0,0,0,0,1,0,0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("GeneralTractable"));
}

#[test]
fn classify_json_schema() {
    let out = holant(&["--json", "classify", "--params", "1,0,0,2,-1/2,1,0,0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "classify");
    assert_eq!(v["result"]["label"], "PlanarTractable");
    let cert = v["certificate"].as_array().unwrap();
    assert!(!cert.is_empty());
    for step in cert {
        for key in ["lemma", "condition", "witness"] {
            assert!(step.get(key).is_some(), "missing {key}");
        }
    }
    assert!(v.get("inputs").is_some());
}

#[test]
fn eval_is_deterministic_and_checked() {
    let g = write_grid("oct.grid", &["gen", "octahedron", "--sig", "[1,0,0,1, 0,2,1,0, 0,1,2,0, 1,0,0,1]"]);
    let p = g.to_str().unwrap();
    let a = holant(&["eval", "--engine", "brute", p]);
    let b = holant(&["eval", "--engine", "brute", p]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let auto = holant(&["eval", "--engine", "auto", "--check", p]);
    assert!(auto.status.success());
    assert!(stdout(&auto).contains("agrees"));
    assert_eq!(stdout(&a).split_whitespace().next(), stdout(&auto).split_whitespace().next());
}

#[test]
fn engine_mismatch_is_a_domain_error() {
    let g = write_grid("dense.grid", &["gen", "octahedron", "--sig", "[1,0,0,1, 0,2,1,0, 0,1,2,0, 1,0,0,1]"]);
    let out = holant(&["eval", "--engine", "fkt", g.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EvalError"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(holant(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(holant(&["classify", "--params", "1,2,3"]).status.code(), Some(2));
    assert_eq!(holant(&["eval", "/definitely/not/here.grid"]).status.code(), Some(2));
}

#[test]
fn valiant_ok_on_generated_grids() {
    let g = write_grid("rand.grid", &["--seed", "7", "gen", "random", "--edges", "14", "--sig", "[1,0,0,2, 0,3,1,0, 0,1,-1,0, 5,0,0,1]"]);
    for t in ["Z", "H", "[1,2;3,5]"] {
        let out = holant(&["verify", "valiant", "--t", t, g.to_str().unwrap()]);
        assert_eq!(stdout(&out).trim(), "OK", "T = {t}");
    }
}

#[test]
fn seeded_generation_repeats() {
    let a = holant(&["--seed", "11", "gen", "instance", "--kind", "affine"]);
    let b = holant(&["--seed", "11", "gen", "instance", "--kind", "affine"]);
    let c = holant(&["--seed", "12", "gen", "instance", "--kind", "affine"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn grid_commands_on_octahedron() {
    let g = write_grid("eq4.grid", &["gen", "octahedron"]);
    let p = g.to_str().unwrap();
    assert!(stdout(&holant(&["grid", "check-planar", p])).contains("V=6 E=12 F=8"));
    assert!(stdout(&holant(&["grid", "orient", "--even", p])).starts_with("128 even"));
    assert!(stdout(&holant(&["grid", "orient", "--eulerian", p])).starts_with("38 Eulerian"));
}

#[test]
fn lattice_and_mobius() {
    let basis = stdout(&holant(&["lattice", "basis", "1,1,-1"]));
    assert!(basis.starts_with("rank 3"));
    assert!(basis.contains("(0, 0, 2)"));
    assert_eq!(stdout(&holant(&["lattice", "subset", "1,1,-1", "1,1,I"])).trim(), "false");
    let orbit = stdout(&holant(&["mobius", "orbit", "--lambda", "1/2", "--t0", "I", "-n", "10"]));
    assert!(orbit.contains("distinct: true, on circle: true"));
    let flip = stdout(&holant(&["mobius", "orbit", "--matrix", "1,1/2*I,1/2*I,-1", "--t0", "I", "-n", "4"]));
    assert!(flip.contains("period: 2, projective order: 2"));
}

#[test]
fn interp_and_gadget_files() {
    let input = scratch("interp.json");
    // N_1(3) = 1 + 2*3 + 3*9
    std::fs::write(&input, r#"{"m": 2, "xs": ["2"], "ys": ["3"], "z": ["1", "2", "3"]}"#).unwrap();
    assert_eq!(stdout(&holant(&["interp", "conformal", input.to_str().unwrap()])).trim(), "34");
    let gad = scratch("g.gad");
    std::fs::write(&gad, "E = [1,0,0,2, 0,3,4,0, 0,5,6,0, 7,0,0,8]\n(loop34 (rot E 1) NEQ2)\n").unwrap();
    let out = holant(&["gadget", "eval", "--check", gad.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("agrees"));
}

#[test]
fn selftest_subset_passes() {
    let out = holant(&["selftest", "--criterion", "4,10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("criterion  4 PASS"));
    assert!(text.contains("criterion 10 PASS"));
}

#[test]
fn grid_eval_with_external_darts() {
    let path = scratch("ext.grid");
    std::fs::write(
        &path,
        "[signatures]\nf = [1,0,0,0, 0,0,0,0, 0,0,0,0, 0,0,0,1]\n[vertices]\nv0: f\nv1: f\n[edges]\n\
         v0.0 v1.0 EQ2\nv0.1 v1.3 EQ2\nv0.2 v1.2 [1, 0, 0, 2]\n[external]\nv0.3 v1.1\n",
    )
    .unwrap();
    assert_eq!(stdout(&holant(&["grid", "eval", path.to_str().unwrap()])).trim(), "[1, 0, 0, 2]");
}
