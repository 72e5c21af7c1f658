use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn quadsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadsurf")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

/// Header and rows of a telemetry CSV, skipping `#` comments.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows =
        rdr.records().map(|r| r.unwrap().iter().map(|x| x.parse::<f64>().unwrap_or(f64::NAN)).collect()).collect();
    (header, rows)
}

#[test]
fn hover_csv_is_at_equilibrium() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("hover.csv");
    let o = quadsurf(&["simulate", "--scenario", "hover", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("completed = true"));
    let (header, rows) = read_csv(&out);
    assert_eq!(rows.len(), 1001);
    assert!(rows.iter().all(|r| r.len() == header.len()));
    let error_cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| {
            ["psi", "e_r", "e_omega", "e_x", "e_v", "s_r", "s_x"]
                .iter()
                .any(|p| h == p || h.starts_with(&format!("{p}_")))
        })
        .map(|(i, _)| i)
        .collect();
    assert_eq!(error_cols.len(), 19);
    let f = header.iter().position(|h| h == "f").unwrap();
    let mg = 1.225 * 9.81;
    for r in &rows {
        assert!(error_cols.iter().all(|&i| r[i].abs() <= 1e-9));
        assert!((r[f] - mg).abs() <= 1e-9 * mg);
    }
}

#[test]
fn csv_is_documented_and_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg =
        write(&dir, "run.toml", "scenario = \"cmstep\"\nhorizon = 0.5\nseed = 11\n[initial]\nrandom_tilt = 0.2\n");
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = quadsurf(&["simulate", &cfg, "--seed", seed, "-o", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    let (a, b, c) = (run("a.csv", "11"), run("b.csv", "11"), run("c.csv", "12"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    for col in header.split(',') {
        let stem = col.trim_end_matches(|c: char| c.is_ascii_digit()).trim_end_matches('_');
        let documented = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .any(|l| l.starts_with(&format!("#   {col}:")) || l.starts_with(&format!("#   {stem}_*:")));
        assert!(documented, "column {col} is not documented");
    }
}

#[test]
fn step90_converges() {
    let o = quadsurf(&["simulate", "--scenario", "step90"]);
    assert_eq!(o.status.code(), Some(0));
    let psi: f64 = stdout(&o).lines().find_map(|l| l.strip_prefix("final_psi = ")).unwrap().parse().unwrap();
    assert!(psi < 1e-6);
}

#[test]
fn aggressive_runs_to_completion() {
    let o = quadsurf(&["simulate", "--scenario", "aggressive"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("t_end = 10\n"));
}

#[test]
fn config_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.toml", "dt = -0.001\n");
    assert_eq!(quadsurf(&["simulate", &bad]).status.code(), Some(1));
    assert_eq!(quadsurf(&["simulate", "--scenario", "nowhere"]).status.code(), Some(1));
    let missing = dir.path().join("missing.toml");
    assert_eq!(quadsurf(&["simulate", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn controller_error_exits_two_with_time() {
    let dir = TempDir::new().unwrap();
    write(&dir, "up.toml", "[[phase]]\nstart = 0.0\nend = 1.0\ntype = \"position_step\"\ntarget = [0.0, 0.0, 0.0]\nheading = [0.0, 0.0, 1.0]\n");
    let cfg = write(&dir, "run.toml", "scenario = \"up.toml\"\n");
    let o = quadsurf(&["simulate", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("failure_time = 0\n"), "{text}");
    assert!(text.contains("parallel"), "{text}");
}

#[test]
fn check_gains_reports_and_gates() {
    let o = quadsurf(&["check-gains", "--scenario", "cmstep", "--b", "15.0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for key in
        ["eta_condition = pass", "theta_max_no_xv = ", "no_xv.w3_condition = ", "tau = ", "attitude_e_omega0_max = "]
    {
        assert!(text.contains(key), "missing {key}");
    }
    assert_eq!(quadsurf(&["check-gains", "--scenario", "aggressive"]).status.code(), Some(0));

    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "edge.toml", "[gains.attitude]\nk_r = 400.0\nk_omega = 40.0\neta = 0.25\n");
    let o = quadsurf(&["check-gains", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violated = eta > k_R/k_omega^2"));
}

#[test]
fn compare_identical_is_tie() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.toml", "scenario = \"cmstep\"\nhorizon = 0.5\n");
    let out = dir.path().join("d.csv");
    let o = quadsurf(&["compare", &a, &a, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict = tie"));
    let (header, rows) = read_csv(&out);
    let d = header.iter().position(|h| h == "delta_f_rms").unwrap();
    assert_eq!(rows.len(), 501);
    assert!(rows.iter().all(|r| r[d] == 0.0));
}

#[test]
fn compare_half_thrust_is_cheaper_throughout() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.toml", "scenario = \"hover\"\n[quad]\nmass = 0.6125\n");
    let b = write(&dir, "b.toml", "scenario = \"hover\"\n");
    let out = dir.path().join("d.csv");
    let o = quadsurf(&["compare", &a, &b, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict = proposed"));
    let (header, rows) = read_csv(&out);
    let d = header.iter().position(|h| h == "delta_f_rms").unwrap();
    assert!(rows.iter().all(|r| r[d] < 0.0));
}

#[test]
fn compare_against_pd_benchmark() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.toml", "scenario = \"cmstep\"\nhorizon = 2.0\n");
    let b = write(&dir, "b.toml", "scenario = \"cmstep\"\nhorizon = 2.0\ncontroller = \"pd\"\n");
    let out = dir.path().join("d.csv");
    let o = quadsurf(&["compare", &a, &b, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("verdict = ")));
    assert_eq!(read_csv(&out).1.len(), 2001);
}

#[test]
fn compare_rejects_mismatched_grids() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.toml", "scenario = \"hover\"\n");
    let b = write(&dir, "b.toml", "scenario = \"hover\"\ndt = 0.002\n");
    let o = quadsurf(&["compare", &a, &b]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grids do not match"));
}
