use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
[model]
kind = "heat"
volume = 0.5
cases = [{ source = { kind = "bump", center = [0.5, 0.5] }, sink_tags = [0] }]

[mesh]
bounds = [0.0, 0.0, 1.0, 1.0]
nx = 16
ny = 16

[initial]
centers = [[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]]
radii = [0.2, 0.2, 0.2, 0.2]

[velocity]
boundary_normal_penalty = 1e4
zero_dirichlet = false

[params]
niter = 4

[output]
snapshot_every = 2
"#;

fn shapeopt(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shapeopt"));
    cmd.args(args).env_remove("SHAPEOPT_OUTPUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn unknown_subcommand_exits_with_usage_error() {
    assert_eq!(shapeopt(&["optimize"], &[]).status.code(), Some(2));
}

#[test]
fn run_writes_history_and_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let out = tmp.path().join("out");
    let o = shapeopt(&["run", &cfg, "--no-timing", "--output", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("history.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("iter,J,L,ctrn_err,t_end,steps,Btt,wall_ms,lambda_0,mu_0,z_0,C_0,delta"));
    assert_eq!(lines.len(), 5);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(7) == Some("0.000")));
    for f in ["config.toml", "phi_initial.vtk", "phi_0000.vtk", "phi_0002.vtk", "phi_final.vtk"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let vtk = std::fs::read_to_string(out.join("phi_0002.vtk")).unwrap();
    assert!(vtk.contains("SCALARS phi") && vtk.contains("VECTORS theta"));
}

#[test]
fn repeated_runs_give_identical_histories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let read = |name: &str| {
        let dir = tmp.path().join(name);
        let o = shapeopt(&["run", &cfg, "--no-timing", "--seed", "3", "--output", dir.to_str().unwrap()], &[]);
        assert!(o.status.success());
        std::fs::read(dir.join("history.csv")).unwrap()
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn output_directory_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &CONFIG.replace("niter = 4", "niter = 1"));
    let env_dir = tmp.path().join("from_env");
    let o = shapeopt(&["run", &cfg, "--no-timing"], &[("SHAPEOPT_OUTPUT_DIR", &env_dir)]);
    assert!(o.status.success());
    assert!(env_dir.join("history.csv").exists());
    let flag_dir = tmp.path().join("from_flag");
    let o = shapeopt(&["run", &cfg, "--output", flag_dir.to_str().unwrap()], &[("SHAPEOPT_OUTPUT_DIR", &env_dir)]);
    assert!(o.status.success());
    assert!(flag_dir.join("history.csv").exists());
}

#[test]
fn invalid_config_fails_with_message() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{}\nctrn_tol = -1\n", CONFIG));
    let o = shapeopt(&["run", &cfg], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ctrn_tol"));
    let o = shapeopt(&["mesh-info", "/nonexistent.toml"], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn mesh_info_reports_diameter() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let o = shapeopt(&["mesh-info", &cfg], &[]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success());
    assert!(text.contains("triangles      512"), "{text}");
    assert!(text.contains(&format!("{:.6e}", 4.0 / (512.0 * 3f64.sqrt()))), "{text}");
}

#[test]
fn check_derivative_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &CONFIG.replace("nx = 16\nny = 16", "nx = 32\nny = 32"));
    let o = shapeopt(&["check-derivative", &cfg], &[]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert!(text.contains("PASS"));
}

#[test]
fn bench_prints_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let o = shapeopt(&["bench", &cfg, "--threads", "2", "--repeats", "1"], &[]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("heat"));
}
