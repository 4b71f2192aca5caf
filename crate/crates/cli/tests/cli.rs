use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bifurcata"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("spawn bifurcata")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn branch_ids(csv: &str) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for line in csv.lines().skip(1) {
        let id = line.split(',').next().unwrap().to_string();
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    ids
}

#[test]
fn diagram_outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["diagram", "--grid", "60"], d.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["diagram.csv", "diagram.json", "diagram.svg"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f} differs");
    }
    let csv = read(a.path(), "diagram.csv");
    assert!(csv.starts_with("branch_id,lambda,beta1,beta2,u1,d,morse\n"));
    let ids = branch_ids(&csv);
    for id in ["trivial", "odd-k1+", "odd-k1-", "even-k1+", "even-k1-", "odd-k2+", "odd-k2-"] {
        assert!(ids.contains(&id.to_string()), "{ids:?}");
    }
    // λ₄ = 4π² lies beyond the default λ_max = 15
    assert!(!ids.iter().any(|i| i.starts_with("even-k2")));
    assert!(ids.contains(&"secondary-k1+".to_string()) && ids.contains(&"secondary-k1-".to_string()));

    // the plot carries one polyline per CSV branch, in CSV order
    let svg = read(a.path(), "diagram.svg");
    let drawn: Vec<&str> = svg
        .lines()
        .filter_map(|l| l.strip_prefix("<polyline id=\""))
        .map(|l| l.split('"').next().unwrap())
        .collect();
    assert_eq!(drawn, ids.iter().map(String::as_str).collect::<Vec<_>>());
}

#[test]
fn empty_range_gives_trivial_branch_only() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["diagram", "--lambda-max", "0.5"], d.path());
    assert_eq!(code(&o), 0);
    assert_eq!(branch_ids(&read(d.path(), "diagram.csv")), ["trivial"]);
}

#[test]
fn sine_has_the_cubic_branch_structure() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["diagram", "--grid", "60"], d.path());
    assert_eq!(code(&o), 0);
    let cubic = branch_ids(&read(d.path(), "diagram.csv"));
    // λ₁ scales with 1/f′(0), so the same ratio λ_max/λ₁ means λ_max = 15/π
    let lm = (15.0 / std::f64::consts::PI).to_string();
    let o = run(&["diagram", "--grid", "60", "--nonlinearity", "sine", "--lambda-max", &lm], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let sine = branch_ids(&read(d.path(), "diagram.csv"));
    assert_eq!(cubic.len(), sine.len(), "{cubic:?} vs {sine:?}");
}

#[test]
fn configuration_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["diagram", "--a", "0"], d.path())), 2);
    assert_eq!(code(&run(&["verify", "--a", "-1"], d.path())), 2);

    let cfg = d.path().join("bad.toml");
    std::fs::write(&cfg, "[problem]\na = -0.5\n").unwrap();
    assert_eq!(code(&run(&["verify", "--config", cfg.to_str().unwrap()], d.path())), 2);
    std::fs::write(&cfg, "[problem]\nstrength = 1\n").unwrap();
    assert_eq!(code(&run(&["diagram", "--config", cfg.to_str().unwrap()], d.path())), 2);
    // a custom f outside the admissible class cannot drive a computation
    std::fs::write(&cfg, "[problem]\nnonlinearity = \"custom\"\ncoefficients = [0, 1, 1, -2]\n").unwrap();
    assert_eq!(code(&run(&["diagram", "--config", cfg.to_str().unwrap()], d.path())), 2);

    let o = Command::new(env!("CARGO_BIN_EXE_bifurcata"))
        .args(["bifpoints", "--out"])
        .arg(d.path())
        .env("BIFURCATA_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn numerical_failure_exits_with_three_and_names_the_operation() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["morse", "--lambda", "100"], d.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invert_branch"));
}

#[test]
fn bifpoints_reports_one_point_per_sign() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bifurcata"))
        .args(["bifpoints", "--k", "1", "--out"])
        .arg(d.path())
        .env("BIFURCATA_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let csv = read(d.path(), "bifpoints.csv");
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(2).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], -rows[1][0]);
    assert!((rows[0][2] - 1.140187).abs() < 1e-5, "λ* = {}", rows[0][2]);
    assert!(rows[0][3].abs() < 1e-9);
}

#[test]
fn morse_indices_straddling_the_secondary_point() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["morse", "--lambda", "1.0,1.1,1.3", "--grid", "800"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let idx: Vec<String> = read(d.path(), "morse.csv")
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().to_string())
        .collect();
    assert_eq!(idx, ["1", "1", "0"]);

    let o = run(&["morse", "--family", "even", "--beta", "0.2,0.5", "--grid", "400"], d.path());
    assert_eq!(code(&o), 0);
    assert!(read(d.path(), "morse.csv").lines().skip(1).all(|l| l.split(',').nth(3) == Some("2")));
}

#[test]
fn even_profile_is_symmetric() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["profile", "--family", "even", "--beta", "0.4"], d.path());
    assert_eq!(code(&o), 0);
    let csv = read(d.path(), "profile.csv");
    assert!(csv.starts_with("s,u_left,u_right,ux_left,ux_right\n"));
    let mut n = 0;
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(v[1], v[2]);
        assert_eq!(v[3], -v[4]);
        n += 1;
    }
    assert_eq!(n, 201);
    assert!(d.path().join("profile.json").exists());
}

#[test]
fn branch_command_writes_selected_branch() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["branch", "--k", "1", "--family", "odd", "--sign", "-", "--grid", "30"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(d.path(), "branch-odd-k1-.csv");
    // 31 amplitudes including β = 0, cut at λ_max = 15
    let rows = csv.lines().count() - 1;
    assert!(rows > 20 && rows <= 31, "{rows}");
    for line in csv.lines().skip(1) {
        let f: Vec<f64> = line.split(',').skip(1).take(2).map(|x| x.parse().unwrap()).collect();
        assert!(f[0] <= 15.0 && f[1] <= 0.0);
    }
    let o = run(&["branch", "--family", "secondary", "--lambda-max", "5"], d.path());
    assert_eq!(code(&o), 0);
    assert!(read(d.path(), "branch-secondary-k1+.csv").lines().count() > 50);
}

#[test]
fn verify_reports_checks_as_json() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--skip-acceptance"], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(d.path(), "verify.json")).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"].as_array().unwrap().len() >= 10);

    // an even term breaks oddness: the report says so and the exit code is 1
    let cfg = d.path().join("even.toml");
    std::fs::write(&cfg, "[problem]\nnonlinearity = \"custom\"\ncoefficients = [0, 1, 0.5, -1.5]\n").unwrap();
    let o = run(&["verify", "--skip-acceptance", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(code(&o), 1);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let basic = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "conditions.basic")
        .unwrap();
    assert_eq!(basic["passed"], false);
}
