use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lefschetz"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn last_line(o: &Output) -> String {
    stdout(o).lines().last().unwrap_or("").to_string()
}

#[test]
fn affine_corpus_file_passes() {
    let path = scenario("affine_x_plus_1_p3.scn");
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(last_line(&o), "OK 3/3");
}

#[test]
fn corrupted_file_fails_with_report() {
    let path = scenario("corrupted_affine_z4.scn");
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(last_line(&o), "FAIL 2/3");
    assert!(stdout(&o).contains("  1 |      0 |      2 |"));
}

#[test]
fn reports_are_byte_identical() {
    let path = scenario("ordinary_f5_proper_mul.scn");
    let args = ["--budget", "16", "verify", path.to_str().unwrap()];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn zp_demo_matches_golden() {
    let o = run(&["zp-demo", "--q", "2,9", "--m", "1..3"]);
    let golden = include_str!("golden/zp_demo.txt");
    assert_eq!(stdout(&o), golden);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn twist_override_replaces_file_range() {
    let path = scenario("affine_x_plus_1_p2.scn");
    let o = run(&["--m", "2,4", "fix-count", path.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(text.contains("  4 |           16 |           16 | OK"), "{text}");
    assert_eq!(last_line(&o), "OK 2/2");
}

#[test]
fn parse_errors_name_key_and_line() {
    let dir = std::env::temp_dir().join(format!("lefschetz-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.scn");
    std::fs::write(&bad, "space = affine_line\np = 3\nfoo = 1\n").unwrap();
    let good = scenario("affine_x_plus_1_p2.scn");
    let o = run(&["verify", bad.to_str().unwrap(), good.to_str().unwrap()]);
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert!(err.contains("line 3: unknown key `foo`"), "{err}");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(last_line(&o), "FAIL 3/4");
    std::fs::write(&bad, "space = open_elliptic\np = 5\ncurve = 2, 2, 0\nm_range = 1\n").unwrap();
    let o = run(&["verify", bad.to_str().unwrap()]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 3: key `curve`"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn lemma5_is_seeded() {
    let args = ["--seed", "7", "lemma5", "--p", "3", "--n", "2", "--degree", "2", "--modules", "25"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(last_line(&a), "OK 1/1");
    assert!(stdout(&a).starts_with("seed=7\n"));
}

#[test]
fn hasse_witt_and_woods_hole_on_curves() {
    let files: Vec<String> = ["supersingular_f7_open.scn", "ordinary_f5_open.scn", "ordinary_f9_proper.scn"]
        .iter()
        .map(|f| scenario(f).to_str().unwrap().to_string())
        .collect();
    let mut args = vec!["hasse-witt"];
    args.extend(files.iter().map(String::as_str));
    let o = run(&args);
    assert_eq!(last_line(&o), "OK 3/3");
    assert!(stdout(&o).contains("supersingular"));
    args[0] = "woods-hole";
    let o = run(&args);
    assert_eq!(last_line(&o), "OK 7/7");
}

#[test]
fn line_scenarios_are_rejected_by_curve_commands() {
    let path = scenario("affine_x_plus_1_p2.scn");
    let o = run(&["woods-hole", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("ERROR: this command needs an elliptic scenario"));
}
