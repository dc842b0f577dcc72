//! Q1 stiffness, mass and load assembly with 2×2 Gauss quadrature.

use alloc::vec;
use alloc::vec::Vec;

use super::element::{gauss2, shape, SquareElement};
use super::sparse::CsrMatrix;
use crate::coefficient::CoefficientSpec;
use crate::error::Result;
use crate::geometry::QuadMesh;
use crate::reaction::Reaction;

/// Unconstrained linear system on all mesh nodes.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

pub(crate) fn element(mesh: &QuadMesh, e: usize) -> SquareElement {
    let (origin, h) = mesh.element_box(e);
    SquareElement { origin, h }
}

fn assemble_elementwise(mesh: &QuadMesh, local: impl Fn(usize) -> [[f64; 4]; 4]) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(16 * mesh.element_count());
    for (e, nodes) in mesh.elements.iter().enumerate() {
        let k = local(e);
        for a in 0..4 {
            for b in 0..4 {
                triplets.push((nodes[a], nodes[b], k[a][b]));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.node_count(), &triplets)
}

/// `∫ ∇φ_a · D ∇φ_b` on one square element.
pub fn element_stiffness(el: &SquareElement, tensor: [[f64; 2]; 2]) -> [[f64; 4]; 4] {
    let rule = gauss2();
    let mut k = [[0.0; 4]; 4];
    for (xi, w) in rule.points.iter().zip(rule.weights) {
        let g = el.grad(*xi);
        let jw = w * el.det();
        for a in 0..4 {
            let dg = [
                tensor[0][0] * g[a][0] + tensor[0][1] * g[a][1],
                tensor[1][0] * g[a][0] + tensor[1][1] * g[a][1],
            ];
            for b in 0..4 {
                k[b][a] += jw * (dg[0] * g[b][0] + dg[1] * g[b][1]);
            }
        }
    }
    k
}

/// Stiffness of `∇·(-d∇·)` for a piecewise-constant scalar coefficient.
pub fn stiffness_from_values(mesh: &QuadMesh, d: &[f64]) -> CsrMatrix {
    debug_assert_eq!(d.len(), mesh.element_count());
    // all elements are congruent squares, and the 2D Laplacian stiffness is scale-free
    let reference = element_stiffness(&element(mesh, 0), [[1.0, 0.0], [0.0, 1.0]]);
    assemble_elementwise(mesh, |e| reference.map(|row| row.map(|v| v * d[e])))
}

/// Stiffness of `∇·(-D∇·)` for a constant symmetric tensor `D`.
pub fn stiffness_from_tensor(mesh: &QuadMesh, tensor: [[f64; 2]; 2]) -> CsrMatrix {
    let local = element_stiffness(&element(mesh, 0), tensor);
    assemble_elementwise(mesh, |_| local)
}

/// Stiffness matrix of the coefficient on `mesh`, with a zero right-hand side.
///
/// Fails if any element value leaves the coefficient's `[α, β]` bracket.
pub fn assemble_stiffness(mesh: &QuadMesh, coeff: &CoefficientSpec) -> Result<SparseSystem> {
    let d = coeff.element_values(mesh)?;
    Ok(SparseSystem {
        matrix: stiffness_from_values(mesh, &d),
        rhs: vec![0.0; mesh.node_count()],
    })
}

/// Consistent Q1 mass matrix.
pub fn assemble_mass(mesh: &QuadMesh) -> CsrMatrix {
    let el = element(mesh, 0);
    let rule = gauss2();
    let mut m = [[0.0; 4]; 4];
    for (xi, w) in rule.points.iter().zip(rule.weights) {
        let phi = shape(*xi);
        for a in 0..4 {
            for b in 0..4 {
                m[a][b] += w * el.det() * phi[a] * phi[b];
            }
        }
    }
    assemble_elementwise(mesh, |_| m)
}

/// Visits every quadrature point: `(element, reference point, physical point, weight·|J|, shape values)`.
pub(crate) fn for_each_qp(mesh: &QuadMesh, mut f: impl FnMut(usize, [f64; 2], [f64; 2], f64, [f64; 4])) {
    let rule = gauss2();
    let phis = rule.points.map(shape);
    for e in 0..mesh.element_count() {
        let el = element(mesh, e);
        for q in 0..4 {
            f(e, rule.points[q], el.point(rule.points[q]), rule.weights[q] * el.det(), phis[q]);
        }
    }
}

/// Consistent load `b_i = ∫ f φ_i` of a function of `x`.
pub fn assemble_load(mesh: &QuadMesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
    let mut b = vec![0.0; mesh.node_count()];
    for_each_qp(mesh, |e, _, x, jw, phi| {
        let fx = f(x) * jw;
        for (a, &v) in mesh.elements[e].iter().enumerate() {
            b[v] += fx * phi[a];
        }
    });
    b
}

/// Consistent load of a nodal Q1 field.
pub fn assemble_load_field(mesh: &QuadMesh, field: &[f64]) -> Vec<f64> {
    assemble_mass(mesh).mul_vec(field)
}

/// `∫ φ_i`, i.e. the load of `f ≡ 1`.
pub fn lumped_mass(mesh: &QuadMesh) -> Vec<f64> {
    let h = mesh.spacing();
    let mut m = vec![0.0; mesh.node_count()];
    for el in &mesh.elements {
        for &v in el {
            m[v] += 0.25 * h * h;
        }
    }
    m
}

/// Load `b_i = ∫ R(y, u_h) φ_i` with `y` the cell coordinate of each quadrature point.
pub fn assemble_reaction_load(mesh: &QuadMesh, u: &[f64], reaction: &dyn Reaction) -> Vec<f64> {
    let mut b = vec![0.0; mesh.node_count()];
    for_each_qp(mesh, |e, xi, _, jw, phi| {
        let nodes = mesh.elements[e];
        let uq: f64 = (0..4).map(|a| u[nodes[a]] * phi[a]).sum();
        let r = reaction.value(mesh.cell_coordinate(e, xi), uq) * jw;
        for a in 0..4 {
            b[nodes[a]] += r * phi[a];
        }
    });
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::Coefficient;
    use crate::geometry::{build_cell_mesh, CellGeometry};

    /// Exact Q1 stiffness on the unit square by closed-form integration of
    /// products of `(1 ± x)(1 ± y)` derivatives.
    fn exact_unit_square_stiffness() -> [[f64; 4]; 4] {
        let c: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let mut k = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                // φ_a = ℓ(x) m(y) with ℓ linear; ∫ℓ_a' ℓ_b' = s_a s_b, ∫ m_a m_b = 1/3 or 1/6
                let s = |p: f64| if p == 0.0 { -1.0 } else { 1.0 };
                let mass = |p: f64, q: f64| if p == q { 1.0 / 3.0 } else { 1.0 / 6.0 };
                k[a][b] = s(c[a][0]) * s(c[b][0]) * mass(c[a][1], c[b][1])
                    + s(c[a][1]) * s(c[b][1]) * mass(c[a][0], c[b][0]);
            }
        }
        k
    }

    #[test]
    fn unit_square_element_matrix() {
        let el = SquareElement { origin: [0.0, 0.0], h: 1.0 };
        let k = element_stiffness(&el, [[1.0, 0.0], [0.0, 1.0]]);
        let exact = exact_unit_square_stiffness();
        for a in 0..4 {
            for b in 0..4 {
                assert!((k[a][b] - exact[a][b]).abs() < 1e-15);
            }
        }
        assert!((k[0][0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((k[0][1] + 1.0 / 6.0).abs() < 1e-15);
        assert!((k[0][3] + 1.0 / 6.0).abs() < 1e-15);
        assert!((k[0][2] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn stiffness_is_linear_in_coefficient_and_annihilates_constants() {
        let cell = build_cell_mesh(CellGeometry::new(0.25, 8).unwrap());
        let one = CoefficientSpec::new(Coefficient::Constant(1.0), 1.0, 1.0).unwrap();
        let three = CoefficientSpec::new(Coefficient::Constant(3.0), 3.0, 3.0).unwrap();
        let k1 = assemble_stiffness(&cell.mesh, &one).unwrap().matrix;
        let k3 = assemble_stiffness(&cell.mesh, &three).unwrap().matrix;
        for (a, b) in k1.values.iter().zip(&k3.values) {
            assert!((3.0 * a - b).abs() < 1e-14);
        }
        let row_sums = k1.mul_vec(&vec![1.0; cell.mesh.node_count()]);
        assert!(row_sums.iter().all(|s| s.abs() < 1e-14));
        assert!(k1.asymmetry() < 1e-12);
    }

    #[test]
    fn load_sums_to_area() {
        let plain = build_cell_mesh(CellGeometry::unperforated(8).unwrap());
        let holed = build_cell_mesh(CellGeometry::new(0.25, 8).unwrap());
        let s: f64 = assemble_load(&plain.mesh, |_| 1.0).iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        let s: f64 = assemble_load(&holed.mesh, |_| 1.0).iter().sum();
        assert!((s - 0.75).abs() < 1e-14);
        assert!(assemble_load(&holed.mesh, |_| 0.0).iter().all(|&v| v == 0.0));
        let lm = lumped_mass(&holed.mesh);
        let lf = assemble_load(&holed.mesh, |_| 1.0);
        for (a, b) in lm.iter().zip(&lf) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_matrix_rows_match_lumped_mass() {
        let cell = build_cell_mesh(CellGeometry::new(0.25, 8).unwrap());
        let m = assemble_mass(&cell.mesh);
        let rows = m.mul_vec(&vec![1.0; cell.mesh.node_count()]);
        for (a, b) in rows.iter().zip(lumped_mass(&cell.mesh)) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
