use std::f64::consts::PI;

use homlab_core::fem::assembly::{assemble_reaction_load, stiffness_from_values};
use homlab_core::fem::norms::{h1_error, h1_norm, l2_error};
use homlab_core::fem::{apply_dirichlet, assemble_load, assemble_mass, assemble_stiffness, solve_spd, GaugedSystem};
use homlab_core::geometry::{FaceTag, PeriodicRole};
use homlab_core::hierarchy::classical::{effective_tensor, solve_classical_correctors, solve_homogenized_macro};
use homlab_core::picard::iterate;
use homlab_core::*;
use nalgebra::{DMatrix, DVector};

fn slope(h: &[f64], e: &[f64]) -> f64 {
    let samples: Vec<_> = h.iter().zip(e).map(|(&eps, &error)| ConvergenceSample { eps, error }).collect();
    fit_convergence_order(&samples, 3).unwrap().slope.unwrap()
}

#[test]
fn manufactured_solution_orders() {
    let exact = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin();
    let grad = |x: [f64; 2]| {
        [PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos()]
    };
    let (mut hs, mut l2, mut h1) = (vec![], vec![], vec![]);
    for n in [16, 32, 64] {
        let mesh = QuadMesh::unit_square(n).unwrap();
        let system = assemble_stiffness(&mesh, &CoefficientSpec::constant(1.0).unwrap()).unwrap();
        let rhs = assemble_load(&mesh, |x| 2.0 * PI * PI * exact(x));
        let reduced = apply_dirichlet(&system, &mesh, FaceTag::Outer, 0.0).with_rhs(&rhs);
        let u = solve_spd(&reduced, 1e-12).unwrap();
        hs.push(1.0 / n as f64);
        l2.push(l2_error(&mesh, &u, exact));
        h1.push(h1_error(&mesh, &u, grad));
    }
    let (p2, p1) = (slope(&hs, &l2), slope(&hs, &h1));
    assert!((p2 - 2.0).abs() <= 0.2, "L2 order {p2}");
    assert!((p1 - 1.0).abs() <= 0.2, "H1 order {p1}");
}

/// `-Δu = 1` on the unit square with zero boundary values, at the centre.
fn series_center() -> f64 {
    let mut s = 0.0;
    for m in (1..400).step_by(2) {
        for n in (1..400).step_by(2) {
            let (mf, nf) = (m as f64, n as f64);
            let sign = if ((m + n) / 2 - 1) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * 16.0 / (PI.powi(4) * mf * nf * (mf * mf + nf * nf));
        }
    }
    s
}

#[test]
fn poisson_center_matches_series() {
    let oracle = series_center();
    assert!((oracle - 0.0736713).abs() < 1e-6, "{oracle}");

    let mesh = QuadMesh::unit_square(64).unwrap();
    let one = ReactionSpec::builtin(ReactionKind::Constant(1.0)).unwrap();
    let (u, trace) = solve_homogenized_macro(&mesh, [[1.0, 0.0], [0.0, 1.0]], &one, 1.0, &PicardOptions::default()).unwrap();
    let c = mesh.node_at(32, 32).unwrap();
    assert!((u[c] - oracle).abs() < 2e-4, "{} vs {oracle}", u[c]);
    assert!(trace.iterations <= 2);

    // the same problem posed on Ω^ε without holes
    let p = MicroProblem {
        mesh: build_perforated_mesh(CellGeometry::unperforated(16).unwrap(), 4).unwrap(),
        coefficient: CoefficientSpec::constant(1.0).unwrap(),
        reaction: one,
    };
    let s = solve_microscale(&p, &PicardOptions::default()).unwrap();
    assert!((s.u.values[p.mesh.mesh.node_at(32, 32).unwrap()] - u[c]).abs() < 1e-10);
}

#[test]
fn linear_picard_matches_dense_solve() {
    let (lambda, source) = (0.8, 1.0);
    let p = MicroProblem {
        mesh: build_perforated_mesh(CellGeometry::new(0.25, 4).unwrap(), 3).unwrap(),
        coefficient: CoefficientSpec::new(Coefficient::Layered { a: 1.0, b: 2.0 }, 1.0, 2.0).unwrap(),
        reaction: ReactionSpec::builtin(ReactionKind::Linear { lambda, source }).unwrap(),
    };
    let mesh = &p.mesh.mesh;
    let s = solve_microscale(&p, &PicardOptions { tol: 1e-13, ..Default::default() }).unwrap();

    // (K - λM) u = ∫ s φ on the interior nodes
    let d = p.coefficient.element_values(mesh).unwrap();
    let k = stiffness_from_values(mesh, &d);
    let m = assemble_mass(mesh);
    let f = assemble_load(mesh, |_| source);
    let interior: Vec<usize> = (0..mesh.node_count())
        .filter(|&v| !mesh.faces_with(FaceTag::Outer).any(|face| face.nodes.contains(&v)))
        .collect();
    let n = interior.len();
    let a = DMatrix::from_fn(n, n, |i, j| k.get(interior[i], interior[j]) - lambda * m.get(interior[i], interior[j]));
    let b = DVector::from_fn(n, |i, _| f[interior[i]]);
    let x = a.lu().solve(&b).unwrap();
    for (i, &v) in interior.iter().enumerate() {
        assert!((s.u.values[v] - x[i]).abs() < 1e-8, "{} vs {}", s.u.values[v], x[i]);
    }
}

const HOLE_TENSOR_N128: f64 = 0.5776061241364808;
const HOLE_TENSOR_N32: f64 = 0.5789736555535003;

#[test]
fn hole_tensor_golden() {
    let cell = build_cell_mesh(CellGeometry::new(0.25, 32).unwrap());
    let d = vec![1.0; cell.mesh.element_count()];
    let system = GaugedSystem::periodic(&cell, &d, PeriodicRole::LowerMaster, 1e-12, 1e-8);
    let chi = solve_classical_correctors(&system, &cell.mesh, &d).unwrap();
    let t = effective_tensor(&cell.mesh, &d, &chi);
    assert!((t[0][0] - t[1][1]).abs() < 1e-8);
    assert!(t[0][1].abs() < 1e-8 && t[1][0].abs() < 1e-8);
    assert!((t[0][0] - HOLE_TENSOR_N32).abs() < 1e-9, "{}", t[0][0]);
    assert!((t[0][0] - HOLE_TENSOR_N128).abs() < 2e-3);
    // bounded by the Voigt bound (porosity) from above
    assert!(t[0][0] < 0.75);
}

#[test]
fn contraction_bound_holds_for_every_iterate() {
    let cell = build_cell_mesh(CellGeometry::unperforated(16).unwrap());
    let mesh = &cell.mesh;
    let d = vec![1.0; mesh.element_count()];
    let c_p = poincare_constant_of(&cell);
    let lambda = 0.5 / c_p;
    let reaction = ReactionSpec::builtin(ReactionKind::SinTanh { lambda }).unwrap();
    let kappa = c_p * lambda;
    let system = GaugedSystem::periodic(&cell, &d, PeriodicRole::LowerMaster, 1e-13, 1e-8);
    let mut iterates = vec![vec![0.0; mesh.node_count()]];
    let options = PicardOptions { tol: 1e-12, max_iter: 200, linear_tol: 1e-13 };
    let (u_inf, trace) = iterate(
        &options,
        0,
        vec![0.0; mesh.node_count()],
        |u| {
            let sol = system.solve_projected(&assemble_reaction_load(mesh, u, &reaction), Some(u))?;
            iterates.push(sol.values.clone());
            Ok((sol.values, sol.defect))
        },
        |v| h1_norm(mesh, v),
    )
    .unwrap();
    let trace = trace.with_kappa(kappa, c_p);
    assert!(trace.iterations > 3);
    for n in 1..iterates.len() {
        let diff: Vec<f64> = iterates[n].iter().zip(&u_inf).map(|(a, b)| a - b).collect();
        let bound = contraction_bound(kappa, n, trace.norm_u1);
        assert!(h1_norm(mesh, &diff) <= bound + 1e-8, "n = {n}");
        assert_eq!(bound, trace.bounds[n - 1]);
    }
    assert!(trace.observed_ratio.unwrap() <= kappa + 0.05);
}

fn poincare_constant_of(cell: &CellMesh) -> f64 {
    homlab_core::fem::poincare_constant(cell).unwrap()
}

#[test]
fn hole_flux_decreases_under_refinement() {
    let mut last = f64::INFINITY;
    for n in [8, 16, 32] {
        let p = MicroProblem {
            mesh: build_perforated_mesh(CellGeometry::new(0.25, n).unwrap(), 2).unwrap(),
            coefficient: CoefficientSpec::constant(1.0).unwrap(),
            reaction: ReactionSpec::builtin(ReactionKind::Linear { lambda: 0.5, source: 1.0 }).unwrap(),
        };
        let s = solve_microscale(&p, &PicardOptions::default()).unwrap();
        let r = flux_check(&p.mesh.mesh, &s.d, &s.u.values);
        assert!(r.l2 < last, "n = {n}: {} >= {last}", r.l2);
        last = r.l2;
    }
}

const ERROR_EPS_8_MACRO_128: f64 = 3.485724841093492e-3;

#[test]
fn classical_error_golden() {
    let geom = CellGeometry::new(0.25, 16).unwrap();
    let coeff = CoefficientSpec::constant(1.0).unwrap();
    let reaction = ReactionSpec::builtin(ReactionKind::Linear { lambda: 0.1, source: 1.0 }).unwrap();
    let options = HierarchyOptions { macro_resolution: 128, ..Default::default() };
    let h = CorrectorHierarchy::build(&build_cell_mesh(geom), &coeff, &reaction, ExpansionConfig::new(2, 0).unwrap(), &options)
        .unwrap();
    let p = MicroProblem { mesh: build_perforated_mesh(geom, 8).unwrap(), coefficient: coeff, reaction };
    let s = solve_microscale(&p, &PicardOptions::default()).unwrap();
    let ev = evaluate_expansion(&h, &p.mesh).unwrap();
    let err = corrector_error(&p.mesh.mesh, &s.u.values, &ev).unwrap();
    assert!((err - ERROR_EPS_8_MACRO_128).abs() < 1e-9 * ERROR_EPS_8_MACRO_128, "{err:e}");
}
