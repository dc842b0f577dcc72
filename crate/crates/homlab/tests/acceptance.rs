//! Acceptance criteria 1-8, one line each.

use std::fs;
use std::path::Path;
use std::process::Command;

use homlab::experiment::{timed, verify_contraction, verify_layered_tensor, verify_manufactured, SweepOutcome};
use homlab::{cmd_micro, cmd_sweep, ExperimentConfig, RunOptions};
use homlab_core::CellGeometry;

const SWEEP: &str = r#"{
  "schema_version": 1,
  "name": "order-gate",
  "geometry": { "hole_half_width": 0.25, "n": 16, "n_per_cell": 16 },
  "coefficient": { "kind": "constant", "value": 1.0 },
  "reaction": { "kind": "linear", "lambda": 0.1, "source": 1.0, "lipschitz": 0.1 },
  "expansion": { "order": 2, "r": 0 },
  "sweep": { "eps": [0.25, 0.125, 0.0625, 0.03125] },
  "seed": 7
}"#;

const COMPAT: &str = r#"{
  "schema_version": 1,
  "name": "compat",
  "geometry": { "hole_half_width": 0.25, "n": 16 },
  "coefficient": { "kind": "constant", "value": 1.0 },
  "reaction": { "kind": "constant", "lambda": 0.3 },
  "expansion": { "order": 2, "r": 2 },
  "sweep": { "eps": [0.25, 0.125, 0.0625] }
}"#;

const KAPPA: &str = r#"{
  "schema_version": 1,
  "name": "kappa",
  "geometry": { "hole_half_width": 0.25, "n": 16 },
  "coefficient": { "kind": "constant", "value": 1.0 },
  "reaction": { "kind": "tanh", "lambda": 40.0 },
  "expansion": { "order": 2, "r": 2 },
  "sweep": { "eps": [0.25, 0.125, 0.0625] }
}"#;

const TANH_MICRO: &str = r#"{
  "schema_version": 1,
  "name": "tanh-micro",
  "geometry": { "hole_half_width": 0.25, "n": 8 },
  "coefficient": { "kind": "layered", "a": 1.0, "b": 3.0 },
  "reaction": { "kind": "tanh", "lambda": 2.0 },
  "expansion": { "order": 2, "r": 2 },
  "micro": { "eps": 0.125 }
}"#;

struct Outcome {
    passed: bool,
    detail: String,
}

fn line(n: usize, title: &str, o: &Outcome) -> bool {
    println!("criterion {n} {}: {title}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    o.passed
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    Outcome { passed: false, detail: format!("error: {e}") }
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(format!("{name}.json"));
    fs::write(&path, text).unwrap();
    path
}

fn run_binary(config: &Path, out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_homlab"))
        .args(["sweep", "--config"])
        .arg(config)
        .arg("--output")
        .arg(out)
        .output()
        .expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn criterion_1() -> Outcome {
    let (r, secs) = timed(verify_manufactured);
    match r {
        Ok(p) => Outcome {
            passed: p.passed && secs < 10.0,
            detail: format!(
                "L2 order {:.4}, H1 order {:.4}, {secs:.2} s",
                p.detail["l2_order"].as_f64().unwrap(),
                p.detail["h1_order"].as_f64().unwrap()
            ),
        },
        Err(e) => failed(e),
    }
}

fn criterion_2() -> Outcome {
    let (r, secs) = timed(verify_layered_tensor);
    match r {
        Ok(p) => Outcome {
            passed: p.passed && secs < 5.0,
            detail: format!(
                "identity error {:.2e}, layered diag ({:.6}, {:.6}), {secs:.2} s",
                p.detail["identity_error"].as_f64().unwrap(),
                p.detail["layered"][0][0].as_f64().unwrap(),
                p.detail["layered"][1][1].as_f64().unwrap()
            ),
        },
        Err(e) => failed(e),
    }
}

fn criterion_3() -> Outcome {
    let (r, secs) = timed(|| -> homlab::Result<Vec<_>> {
        Ok(vec![
            verify_contraction(CellGeometry::unperforated(16)?)?,
            verify_contraction(CellGeometry::new(0.25, 16)?)?,
        ])
    });
    match r {
        Ok(ps) => Outcome {
            passed: ps.iter().all(|p| p.passed) && secs < 30.0,
            detail: ps
                .iter()
                .map(|p| {
                    format!(
                        "ratio {:.4} (kappa 0.5), worst bound margin {:.2e}",
                        p.detail["observed_ratio"].as_f64().unwrap(),
                        p.detail["worst_margin"].as_f64().unwrap()
                    )
                })
                .collect::<Vec<_>>()
                .join("; ")
                + &format!(", {secs:.2} s"),
        },
        Err(e) => failed(e),
    }
}

fn criterion_4(sweep: &homlab::Result<SweepOutcome>, secs: f64) -> Outcome {
    match sweep {
        Ok(s) => Outcome {
            passed: s.report.order_gate_passed() && secs < 300.0,
            detail: format!(
                "slope {:.4} >= {:.2}, r2 {:.4} >= 0.95, errors [{}], {secs:.1} s",
                s.report.slope.unwrap_or(f64::NAN),
                s.report.theory_order - 0.1,
                s.report.r2.unwrap_or(f64::NAN),
                s.points.iter().map(|p| format!("{:.4e}", p.error)).collect::<Vec<_>>().join(", ")
            ),
        },
        Err(e) => failed(e),
    }
}

fn criterion_5(dir: &Path) -> Outcome {
    let config = write_config(dir, "compat", COMPAT);
    let runs: Vec<(i32, String)> = (0..2).map(|k| run_binary(&config, &dir.join(format!("compat-{k}")))).collect();
    Outcome {
        passed: runs.iter().all(|(code, err)| *code == 4 && err.contains("COMPAT")) && runs[0].1 == runs[1].1,
        detail: format!("exit codes {} and {}: {}", runs[0].0, runs[1].0, runs[0].1.trim()),
    }
}

fn criterion_6(dir: &Path) -> Outcome {
    let config = write_config(dir, "kappa", KAPPA);
    let (code, err) = run_binary(&config, &dir.join("kappa"));
    Outcome {
        passed: code == 3 && err.contains("kappa_p =") && err.contains("C_p ="),
        detail: format!("exit code {code}: {}", err.trim()),
    }
}

fn criterion_7(sweeps: &[&homlab::Result<SweepOutcome>], dir: &Path) -> Outcome {
    let mut residuals = Vec::new();
    for s in sweeps {
        match s {
            Ok(s) => residuals.extend(s.points.iter().map(|p| p.energy_identity_residual)),
            Err(e) => return failed(e),
        }
    }
    let micro = ExperimentConfig::from_json(TANH_MICRO)
        .and_then(|c| cmd_micro(&c, &RunOptions { output: Some(dir.join("micro")), ..Default::default() }));
    match micro {
        Ok(m) => residuals.push(m.metadata["energy_identity_residual"].as_f64().unwrap()),
        Err(e) => return failed(e),
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    Outcome {
        passed: worst <= 1e-6,
        detail: format!("{} microsolves, largest relative residual {worst:.3e} <= 1e-6", residuals.len()),
    }
}

fn criterion_8(a: &homlab::Result<SweepOutcome>, b: &homlab::Result<SweepOutcome>) -> Outcome {
    let (Ok(a), Ok(b)) = (a, b) else {
        return Outcome { passed: false, detail: "a sweep failed".into() };
    };
    let mut same = Vec::new();
    for file in ["report.csv", "summary.json", "points.json"] {
        let x = fs::read(a.dir.join(file)).unwrap();
        let y = fs::read(b.dir.join(file)).unwrap();
        same.push(format!("{file} {}", if x == y { "identical" } else { "DIFFERENT" }));
        if x != y {
            return Outcome { passed: false, detail: same.join(", ") };
        }
    }
    Outcome { passed: true, detail: same.join(", ") }
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let config = ExperimentConfig::from_json(SWEEP).unwrap();
    let (first, secs) = timed(|| cmd_sweep(&config, &RunOptions { output: Some(dir.join("first")), ..Default::default() }));
    let second = cmd_sweep(&config, &RunOptions { output: Some(dir.join("second")), jobs: Some(2), ..Default::default() });

    let results = [
        line(1, "FEM manufactured solution orders", &criterion_1()),
        line(2, "effective tensor exactness", &criterion_2()),
        line(3, "Picard contraction bound", &criterion_3()),
        line(4, "eps order gate", &criterion_4(&first, secs)),
        line(5, "COMPAT surfacing", &criterion_5(dir)),
        line(6, "KAPPA gate", &criterion_6(dir)),
        line(7, "energy identity on every microsolve", &criterion_7(&[&first, &second], dir)),
        line(8, "reproducibility", &criterion_8(&first, &second)),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
