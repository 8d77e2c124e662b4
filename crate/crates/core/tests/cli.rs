use std::fs;
use std::process::{Command, Output};

fn spinrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinrad"))
        .args(args)
        .env_remove("SPINRAD_REL_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn vacuum_plate_gives_zero_kernels() {
    let o = spinrad(&["psi", "--n", "1", "--x", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2], "0");
    assert_eq!(rows[0][3], "0");
}

#[test]
fn cold_plate_equilibrium_ratio() {
    let o = spinrad(&["equilibrium", "--t2", "0K", "--omega", "1e6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("theta1_star,T1_K,theta1_over_omega")));
    let ratio: f64 = data_rows(&text)[0][2].parse().unwrap();
    assert!((ratio - 2.2225516807337873).abs() < 1e-12, "{ratio}");
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["sweep", "--axis", "omega", "--values", "1e6:1e12:7", "--spacing", "log"];
    let a = spinrad(&args);
    let b = spinrad(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn replay_reproduces_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 7] = [
        &["psi", "--n", "3", "--x", "0:5:4"],
        &["rates", "--omega", "1e9", "--t2", "1K", "--t1", "2K"],
        &["equilibrium", "--omega", "1e10", "--t2", "300mK"],
        &["curve", "--points", "9", "--mode", "fixed"],
        &["table", "--n-list", "3,10", "--t2-list", "1,10"],
        &["dynamics", "--omega", "1e9", "--t-end", "1e-3", "--stride", "2.5e-4"],
        &["sweep", "--axis", "n", "--values", "1.5:30:5"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let path = dir.path().join(format!("run{i}.csv"));
        let path = path.to_str().unwrap();
        let mut full = args.to_vec();
        full.extend(["-o", path]);
        let o = spinrad(&full);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        let original = fs::read_to_string(path).unwrap();
        let again = spinrad(&["replay", path]);
        assert!(again.status.success(), "{args:?}: {}", stderr(&again));
        assert_eq!(stdout(&again), original, "{args:?}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# scenario\nradius = 20nm\nomega = 1e8\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let text = stdout(&spinrad(&["rates", "--config", cfg, "--omega", "3e8"]));
    assert!(text.contains("# radius = 2e-6cm"), "{text}");
    assert!(text.contains("# omega = 300000000s^-1"), "{text}");
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n = 3\nradius = fifty\n").unwrap();
    let o = spinrad(&["rates", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[config]"), "{err}");
    assert!(err.contains("bad.cfg:2: field 'radius'"), "{err}");

    fs::write(&cfg, "spin = 3\n").unwrap();
    let err = stderr(&spinrad(&["rates", "--config", cfg.to_str().unwrap()]));
    assert!(err.contains("bad.cfg:1: unknown field 'spin'"), "{err}");
}

#[test]
fn exit_codes() {
    assert_eq!(spinrad(&["--help"]).status.code(), Some(0));
    assert_eq!(spinrad(&["rates", "--t-end", "3"]).status.code(), Some(2));
    assert_eq!(spinrad(&["rates", "--radius", "50"]).status.code(), Some(2));
    let o = spinrad(&["equilibrium", "--t2", "0K", "--omega", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[degenerate]"));
    let o = spinrad(&["rates", "-o", "/nonexistent-dir/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error[io]"));
    assert_eq!(spinrad(&["replay", "/nonexistent-dir/in.csv"]).status.code(), Some(1));
}

#[test]
fn tolerance_from_environment_is_recorded() {
    let o = Command::new(env!("CARGO_BIN_EXE_spinrad"))
        .args(["rates"])
        .env("SPINRAD_REL_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("# rel_tol = 1e-6"), "{}", stdout(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_spinrad"))
        .args(["rates", "--rel-tol", "1e-9"])
        .env("SPINRAD_REL_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("# rel_tol = 1e-9"), "{}", stdout(&o));
}
