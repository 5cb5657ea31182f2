use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graph-hardy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn graph-hardy")
}

fn json_of(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write_f0(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("f0.csv");
    std::fs::write(&path, "vertex,value\n0,1\n1,-1\n").unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn quadnorm_k2l_is_four() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_f0(&dir);
    let v = json_of(&run(&["quadnorm", "k2l", "--f", &f, "--beta", "1"]));
    assert!((v["norm"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn geometry_reports_doubling() {
    let v = json_of(&run(&["geometry", "lazy_cycle_16"]));
    let c = v["doubling_constant"].as_f64().unwrap();
    assert!((1.0..=4.0).contains(&c), "{c}");
}

#[test]
fn bmo_k2l_csv() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_f0(&dir);
    let out = run(&["bmo", "k2l", "--f", &f, "--smax", "2", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[0].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn decompose_k2l_single_molecule() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_f0(&dir);
    let v = json_of(&run(&["decompose", "k2l", "--f", &f]));
    assert_eq!(v["count"], 1);
    assert!(v["l2_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn gaffney_writes_svg_to_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("plots");
    let out = run(&[
        "gaffney",
        "lazy_cycle_32",
        "--family",
        "heat",
        "--E",
        "16",
        "--F",
        "0",
        "--s",
        "1..40",
        "--format",
        "svg",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(out_dir.join("gaffney.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn riesz_random_suite() {
    let v = json_of(&run(&["riesz", "lazy_cycle_16", "--suite", "random", "--n", "3", "--seed", "5"]));
    assert_eq!(v["entries"].as_array().unwrap().len(), 3);
    assert!(v["max_chain_defect"].as_f64().unwrap() < 1e-9);
}

#[test]
fn zoo_round_trips_through_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["zoo", "lazy_path_8~2", "--format", "csv"]);
    assert!(out.status.success());
    let path = dir.path().join("g.txt");
    std::fs::write(&path, &out.stdout).unwrap();
    let v = json_of(&run(&["geometry", path.to_str().unwrap()]));
    assert!(v["doubling_constant"].as_f64().is_some());
}

#[test]
fn selftest_passes() {
    let v = json_of(&run(&["selftest"]));
    assert_eq!(v["passed"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_f0(&dir);
    let missing = dir.path().join("missing.csv");
    assert_eq!(run(&["quadnorm", "k2l", "--f", missing.to_str().unwrap()]).status.code(), Some(2));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "vertex,value\n0,abc\n").unwrap();
    assert_eq!(run(&["quadnorm", "k2l", "--f", bad.to_str().unwrap()]).status.code(), Some(2));

    // not mean-zero
    let ones = dir.path().join("ones.csv");
    std::fs::write(&ones, "vertex,value\n0,1\n1,1\n").unwrap();
    assert_eq!(run(&["decompose", "k2l", "--f", ones.to_str().unwrap()]).status.code(), Some(1));

    assert_eq!(run(&["decompose", "k2l", "--f", &f, "--format", "svg"]).status.code(), Some(1));
    assert_eq!(run(&["geometry", "no_such_graph"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn nonconvergent_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    let body: String = (0..32).map(|x| format!("{x},{}\n", if x < 16 { 1.0 } else { -1.0 })).collect();
    std::fs::write(&f, format!("vertex,value\n{body}")).unwrap();
    let out = run(&["decompose", "lazy_cycle_32", "--f", f.to_str().unwrap(), "--lmax", "1", "--tol", "1e-14"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
