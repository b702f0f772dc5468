use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use damposc_cli::commands::{CLASSICAL_HEADER, CONVERGENCE_HEADER, DENSITY_HEADER, OBSERVABLES_HEADER};

const SMALL: &str = r#"{
  "mass": 1, "lambda": 0.05, "omega": 1, "x0": -1, "v0": 0,
  "grid": { "x_min": -8, "x_max": 8, "n_points": 256 },
  "evolution": { "dt": 0.01, "n_steps": 160, "sample_every": 40 },
  "classical": { "t_end": 10, "dt": 0.01, "output_every": 50 },
  "pathint": { "omega_t": 0.785, "slices": [16, 32, 64], "grid": { "x_min": -8, "x_max": 8, "n_points": 128 } }
}"#;

fn damposc(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_damposc"));
    cmd.args(args).env_remove("DAMPOSC_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.json");
    fs::write(&path, text).unwrap();
    path
}

fn run_in(sub: &str, config: &Path, out: &Path) -> Output {
    damposc(&[sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()], &[])
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn each_command_writes_its_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    for sub in ["classical", "evolve", "pathint"] {
        let o = run_in(sub, &cfg, &out);
        assert!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(header(&out.join("classical.csv")), CLASSICAL_HEADER.join(","));
    assert_eq!(header(&out.join("density.csv")), DENSITY_HEADER.join(","));
    assert_eq!(header(&out.join("observables.csv")), OBSERVABLES_HEADER.join(","));
    assert_eq!(header(&out.join("kernel_convergence.csv")), CONVERGENCE_HEADER.join(","));
    let svg = fs::read_to_string(out.join("fig1.svg")).unwrap();
    // snapshots at 0, 40, 80, 120, 160 steps
    assert_eq!(svg.matches(r#"class="snapshot""#).count(), 5);
    assert_eq!(svg.matches(r#"class="analytic""#).count(), 5);
    assert!(svg.contains("data-peak-x=") && svg.contains("data-integral="));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for sub in ["evolve", "pathint"] {
        assert!(run_in(sub, &cfg, &a).status.success());
        let o = damposc(
            &[sub, "--sequential", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()],
            &[],
        );
        assert!(o.status.success());
    }
    for name in ["density.csv", "observables.csv", "fig1.svg", "kernel_convergence.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn out_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("from_env");
    let o = damposc(&["classical", "--config", cfg.to_str().unwrap()], &[("DAMPOSC_OUT", &out)]);
    assert!(o.status.success());
    assert!(out.join("classical.csv").exists());
}

#[test]
fn verify_passes_and_tamper_fails_with_code_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("v");
    let o = run_in("verify", &cfg, &out);
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("0 failed"), "{text}");
    assert_eq!(fs::read_to_string(out.join("verify_report.txt")).unwrap(), text);

    let o = damposc(
        &["verify", "--tamper-h", "0.1", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(4));
    let text = String::from_utf8_lossy(&o.stdout);
    let failing: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{text}");
    assert!(failing[0].contains("hamiltonian_zero"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let missing = dir.path().join("nope.json");
    assert_eq!(run_in("classical", &missing, &out).status.code(), Some(2));

    let bad = write_config(dir.path(), r#"{"mass": 1, "lambda": 0.01, "omega": 1, "x0": -1, "v0": 0, "colour": 3}"#);
    let o = run_in("classical", &bad, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let critical = write_config(dir.path(), r#"{"mass": 1, "lambda": 1, "omega": 1, "x0": -1, "v0": 0}"#);
    assert_eq!(run_in("classical", &critical, &out).status.code(), Some(3));

    assert_eq!(damposc(&["frobnicate"], &[]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        damposc_cli::parse_config(&fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
