use std::process::Command;

fn svstab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_svstab")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn infsup_table_row() {
    let (code, stdout, _) = svstab(&["infsup", "--mesh", "malkus", "--n", "5", "--degree", "1", "--omega", "5", "--eps", "1e-7"]);
    assert_eq!(code, 0);
    let row = stdout.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(&cols[..3], &["1", "5", "5"]);
    assert_eq!(cols[4], "4.084e-2");
    assert_eq!(cols[5], "malkus");
}

#[test]
fn json_round_trip_reproduces_lambda() {
    let (code, stdout, _) = svstab(&["infsup", "--mesh", "type1", "--n", "3", "--degree", "3", "--format", "json"]);
    assert_eq!(code, 0);
    let record = svstab::report::RunRecord::from_json(stdout.trim()).unwrap();
    let again = record.rerun().unwrap();
    let lambda = |r: &svstab::report::RunRecord| match r {
        svstab::report::RunRecord::Infsup { result, .. } => result.lambda1,
        _ => panic!("wrong record"),
    };
    assert_eq!(lambda(&record), lambda(&again));
}

#[test]
fn table_output_is_deterministic() {
    let args = ["elasticity", "--mesh", "type1", "--coarse-n", "2", "--degree", "2", "--gamma", "0,10"];
    let (code, first, _) = svstab(&args);
    assert_eq!(code, 0);
    assert_eq!(first, svstab(&args).1);
    assert_eq!(first.lines().count(), 2);
}

#[test]
fn oracle_identity_pencil() {
    let (code, stdout, _) = svstab(&["oracle", "--mesh", "type1", "--n", "2", "--degree", "2", "--identity-pencil"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("dense lambda1      1.000000000000e0"));
    assert!(stdout.contains("dense lambda max   1.000000000000e0"));
}

#[test]
fn oracle_reports_agreement() {
    let (code, stdout, _) = svstab(&["oracle", "--mesh", "malkus", "--n", "2", "--degree", "1", "--seed", "3"]);
    assert_eq!(code, 0);
    let diff: f64 = stdout.lines().find(|l| l.contains("relative diff")).unwrap().split_whitespace().last().unwrap().parse().unwrap();
    assert!(diff < 1e-6);
}

#[test]
fn oracle_refuses_large_meshes() {
    let (code, _, stderr) = svstab(&["oracle", "--mesh", "type1", "--n", "20", "--degree", "4"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("too large"));
}

#[test]
fn non_convergence_exit_code() {
    let (code, stdout, _) = svstab(&["infsup", "--mesh", "malkus", "--n", "3", "--degree", "1", "--max-iters", "2"]);
    assert_eq!(code, 2);
    assert!(stdout.contains(" no"));
}

#[test]
fn usage_errors() {
    assert_eq!(svstab(&["infsup", "--mesh", "hexagon", "--n", "2", "--degree", "1"]).0, 1);
    assert_eq!(svstab(&["infsup", "--n", "2", "--degree", "1"]).0, 1);
    assert_eq!(svstab(&["elasticity", "--mesh", "malkus", "--coarse-n", "2", "--degree", "2"]).0, 1);
    assert_eq!(svstab(&["infsup", "--mesh", "malkus", "--n", "3", "--degree", "1", "--sigma", "1.5"]).0, 1);
    assert_eq!(svstab(&["--help"]).0, 0);
    assert_eq!(svstab(&["--version"]).0, 0);
}

#[test]
fn degenerate_initial_field_is_reported() {
    let (code, _, stderr) = svstab(&["infsup", "--mesh", "malkus", "--n", "3", "--degree", "1", "--omega", "0"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("omega"));
}
