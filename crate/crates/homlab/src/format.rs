//! Plain-text dumps and the corrector archive.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use homlab_core::fem::sparse::CsrMatrix;
use homlab_core::hierarchy::Correctors;
use homlab_core::{CorrectorHierarchy, Gauge, IterationTrace, QuadMesh, ScalarField};
use serde_json::{json, Value};

use crate::error::{AppError, Result};

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// `NODES`, `ELEMS`, `FACES` and `PERIODIC` sections, each headed by its count.
pub fn mesh_dump(mesh: &QuadMesh, periodic: &[(usize, usize)]) -> String {
    let mut s = String::new();
    writeln!(s, "NODES {}", mesh.node_count()).unwrap();
    for (i, p) in mesh.nodes.iter().enumerate() {
        writeln!(s, "{i} {} {}", float(p[0]), float(p[1])).unwrap();
    }
    writeln!(s, "ELEMS {}", mesh.element_count()).unwrap();
    for (i, e) in mesh.elements.iter().enumerate() {
        writeln!(s, "{i} {} {} {} {}", e[0], e[1], e[2], e[3]).unwrap();
    }
    writeln!(s, "FACES {}", mesh.faces.len()).unwrap();
    for (i, f) in mesh.faces.iter().enumerate() {
        writeln!(s, "{} {i} {} {}", f.tag, f.nodes[0], f.nodes[1]).unwrap();
    }
    writeln!(s, "PERIODIC {}", periodic.len()).unwrap();
    for (a, b) in periodic {
        writeln!(s, "{a} {b}").unwrap();
    }
    s
}

/// `FIELD <mesh hash> <gauge>` followed by one value per line.
pub fn field_dump(field: &ScalarField) -> String {
    let mut s = String::with_capacity(24 * (field.len() + 1));
    writeln!(s, "FIELD {:016x} {}", field.mesh_id, field.gauge).unwrap();
    for v in &field.values {
        s.push_str(&float(*v));
        s.push('\n');
    }
    s
}

pub fn parse_field(text: &str) -> Result<ScalarField> {
    let bad = |msg: String| AppError::Config(format!("malformed field dump: {msg}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "FIELD" {
        return Err(bad(format!("header {header:?}")));
    }
    let mesh_id = u64::from_str_radix(parts[1], 16).map_err(|e| bad(format!("mesh hash: {e}")))?;
    let gauge: Gauge = parts[2].parse().map_err(|_| bad(format!("gauge {:?}", parts[2])))?;
    let values = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse::<f64>().map_err(|e| bad(format!("value {l:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalarField::new(mesh_id, values, gauge))
}

/// `MATRIX <n> <nnz>` followed by `i j value` triplets.
pub fn matrix_dump(a: &CsrMatrix) -> String {
    let mut s = String::new();
    writeln!(s, "MATRIX {} {}", a.dim(), a.nnz()).unwrap();
    for (i, j, v) in a.triplets() {
        writeln!(s, "{i} {j} {}", float(v)).unwrap();
    }
    s
}

pub fn trace_json(t: &IterationTrace) -> Value {
    json!({
        "level": t.level,
        "iterations": t.iterations,
        "converged": t.converged,
        "increments": t.increments,
        "defects": t.defects,
        "observed_ratio": t.observed_ratio,
        "kappa_p": t.kappa_p,
        "c_p": t.c_p,
        "norm_u1": t.norm_u1,
        "bounds": t.bounds,
    })
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(AppError::io(path))
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json value serializes");
    text.push('\n');
    write(path, &text)
}

/// Writes one field dump per component, the cell mesh and `manifest.json`
/// into `dir`.
pub fn write_hierarchy(dir: &Path, h: &CorrectorHierarchy) -> Result<Value> {
    fs::create_dir_all(dir).map_err(AppError::io(dir))?;
    write(&dir.join("cell.mesh"), &mesh_dump(&h.cell.mesh, &h.cell.periodic_pairs()))?;
    let mut components = Vec::new();
    let mut put = |name: String, field: &ScalarField| -> Result<()> {
        let file = format!("{name}.field");
        write(&dir.join(&file), &field_dump(field))?;
        components.push(json!({ "name": name, "file": file, "mesh": format!("{:016x}", field.mesh_id) }));
        Ok(())
    };
    let traces: Vec<Value> = h.traces().into_iter().map(trace_json).collect();
    match &h.correctors {
        Correctors::Classical(c) => {
            for j in 0..2 {
                put(format!("chi_{}", j + 1), &c.chi[j])?;
            }
            for i in 0..2 {
                for j in 0..2 {
                    put(format!("theta_{}{}", i + 1, j + 1), &c.theta[i][j])?;
                }
            }
            put("u0".into(), &c.u0)?;
            write(&dir.join("macro.mesh"), &mesh_dump(&c.macro_mesh, &[]))?;
        }
        Correctors::Nonlinear(n) => {
            for (m, f) in n.levels.iter().enumerate() {
                put(format!("u_{m}"), f)?;
            }
        }
    }
    let manifest = json!({
        "order": h.config.order,
        "r": h.config.r,
        "mode": match h.mode() {
            homlab_core::Mode::Classical => "classical",
            homlab_core::Mode::Nonlinear => "nonlinear",
        },
        "macro_gradient": h.config.macro_gradient,
        "d_hom": h.d_hom(),
        "porosity": h.porosity,
        "alpha": h.alpha,
        "kappa_p": h.kappa_p,
        "c_p": h.c_p,
        "cell": {
            "hole_half_width": h.cell.geometry.hole_half_width(),
            "n": h.cell.geometry.resolution(),
            "mesh": format!("{:016x}", h.cell.mesh.id()),
        },
        "components": components,
        "traces": traces,
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use homlab_core::{build_cell_mesh, CellGeometry};

    #[test]
    fn field_round_trip_is_exact() {
        let f = ScalarField::new(0xdead_beef, vec![0.1, -1.0 / 3.0, 1e-300, 6.02e23], Gauge::ZeroMean);
        let text = field_dump(&f);
        assert!(text.starts_with("FIELD 00000000deadbeef zero-mean\n"));
        let g = parse_field(&text).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn malformed_fields_are_rejected() {
        assert!(parse_field("").is_err());
        assert!(parse_field("FIELD zz none\n1.0\n").is_err());
        assert!(parse_field("FIELD 00 sideways\n").is_err());
        assert!(parse_field("FIELD 00 none\nabc\n").is_err());
    }

    #[test]
    fn mesh_dump_sections() {
        let cell = build_cell_mesh(CellGeometry::new(0.25, 8).unwrap());
        let text = mesh_dump(&cell.mesh, &cell.periodic_pairs());
        let headers: Vec<&str> = text.lines().filter(|l| l.starts_with(char::is_alphabetic)).collect();
        assert_eq!(headers.len(), 4 + cell.mesh.faces.len());
        assert!(text.contains("ELEMS 48\n"));
        assert!(text.lines().any(|l| l.starts_with("hole ")));
        assert!(text.contains(&format!("PERIODIC {}\n", cell.periodic_pairs().len())));
    }
}
