//! Structured quadrilateral meshes of the perforated unit cell and of the
//! ε-periodically perforated unit square.
//!
//! All meshes live on `[0,1]²` and are carved out of a uniform grid with
//! `divisions` elements per side. Grid points are indexed lexicographically
//! (x fastest); only points touched by at least one solid element become
//! mesh nodes, so node numbering skips the interior of holes.
//!
//! Element corners are stored counter-clockwise starting at the lower-left
//! corner. Local face `k` of an element joins corners `k` and `k+1`:
//! bottom, right, top, left.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const INACTIVE: usize = usize::MAX;

/// Outward unit normals of the four local faces.
pub const FACE_NORMALS: [[f64; 2]; 4] = [[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]];

/// Centered axis-aligned square hole in the unit cell `Y = [0,1]²`.
///
/// A `hole_half_width` of zero is the "no hole" sentinel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellGeometry {
    hole_half_width: f64,
    n: usize,
    hole_cells: usize,
}

impl CellGeometry {
    pub fn new(hole_half_width: f64, n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGeometry(format!(
                "cell resolution must be even and at least 4, got {n}"
            )));
        }
        if !hole_half_width.is_finite() || !(0.0..0.5).contains(&hole_half_width) {
            return Err(Error::InvalidGeometry(format!(
                "hole half width must lie in [0, 1/2), got {hole_half_width}"
            )));
        }
        let hole_cells = aligned_cells(hole_half_width, n).ok_or(Error::Misaligned {
            hole_half_width,
            n,
            smallest_valid_n: smallest_valid_resolution(hole_half_width),
        })?;
        Ok(Self { hole_half_width, n, hole_cells })
    }

    /// Cell without perforation.
    pub fn unperforated(n: usize) -> Result<Self> {
        Self::new(0.0, n)
    }

    pub fn hole_half_width(&self) -> f64 {
        self.hole_half_width
    }

    /// Elements per cell edge.
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn has_hole(&self) -> bool {
        self.hole_cells > 0
    }

    /// Number of grid cells between the cell center and the hole edge.
    pub fn hole_cells(&self) -> usize {
        self.hole_cells
    }

    /// `|Y₁| / |Y|`.
    pub fn porosity(&self) -> f64 {
        let w = 2.0 * self.hole_half_width;
        1.0 - w * w
    }

    /// Whether the local grid element `(i, j)` of the cell lies in the hole.
    pub fn is_hole_element(&self, i: usize, j: usize) -> bool {
        let lo = self.n / 2 - self.hole_cells;
        let hi = self.n / 2 + self.hole_cells;
        (lo..hi).contains(&i) && (lo..hi).contains(&j)
    }

    /// Solid elements per cell.
    pub fn solid_elements(&self) -> usize {
        self.n * self.n - 4 * self.hole_cells * self.hole_cells
    }

    /// Hole-boundary faces per cell.
    pub fn hole_faces(&self) -> usize {
        8 * self.hole_cells
    }
}

fn aligned_cells(hole_half_width: f64, n: usize) -> Option<usize> {
    let k = hole_half_width * n as f64;
    let r = k.round();
    if (k - r).abs() <= 1e-9 * (1.0 + k) {
        Some(r as usize)
    } else {
        None
    }
}

fn smallest_valid_resolution(hole_half_width: f64) -> Option<usize> {
    (4..=65536).step_by(2).find(|&n| aligned_cells(hole_half_width, n).is_some())
}

/// Boundary tag of a mesh face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceTag {
    /// Boundary of the unit square (Γ^ext, or the periodic faces of the cell).
    Outer,
    /// Boundary of a perforation (∂Y₀ or Γ^ε).
    Hole,
}

impl fmt::Display for FaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaceTag::Outer => "outer",
            FaceTag::Hole => "hole",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryFace {
    pub tag: FaceTag,
    /// Face endpoints, ordered counter-clockwise with respect to `element`.
    pub nodes: [usize; 2],
    pub element: usize,
    /// Local face index within `element`.
    pub local: usize,
    /// Outward unit normal of the meshed domain.
    pub normal: [f64; 2],
}

/// Quadrilateral mesh carved out of a uniform grid on `[0,1]²`.
#[derive(Clone, Debug)]
pub struct QuadMesh {
    divisions: usize,
    period: usize,
    pub nodes: Vec<[f64; 2]>,
    pub node_grid: Vec<[usize; 2]>,
    grid_to_node: Vec<usize>,
    pub elements: Vec<[usize; 4]>,
    pub element_grid: Vec<[usize; 2]>,
    pub faces: Vec<BoundaryFace>,
    id: u64,
}

impl QuadMesh {
    /// Builds the mesh of all grid elements for which `solid(i, j)` holds.
    ///
    /// `period` is the number of grid elements per periodicity cell; it fixes
    /// the cell coordinate `y = x/ε mod 1` attached to every point.
    fn from_grid(divisions: usize, period: usize, solid: impl Fn(usize, usize) -> bool) -> Self {
        let np = divisions + 1;
        let is_solid = |i: isize, j: isize| {
            i >= 0 && j >= 0 && (i as usize) < divisions && (j as usize) < divisions && solid(i as usize, j as usize)
        };
        let mut active = vec![false; np * np];
        for j in 0..divisions {
            for i in 0..divisions {
                if solid(i, j) {
                    for (di, dj) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                        active[(j + dj) * np + i + di] = true;
                    }
                }
            }
        }
        let nd = divisions as f64;
        let mut grid_to_node = vec![INACTIVE; np * np];
        let mut nodes = Vec::new();
        let mut node_grid = Vec::new();
        for j in 0..np {
            for i in 0..np {
                if active[j * np + i] {
                    grid_to_node[j * np + i] = nodes.len();
                    nodes.push([i as f64 / nd, j as f64 / nd]);
                    node_grid.push([i, j]);
                }
            }
        }
        let mut elements = Vec::new();
        let mut element_grid = Vec::new();
        let mut faces = Vec::new();
        for j in 0..divisions {
            for i in 0..divisions {
                if !solid(i, j) {
                    continue;
                }
                let g = |di: usize, dj: usize| grid_to_node[(j + dj) * np + i + di];
                let corners = [g(0, 0), g(1, 0), g(1, 1), g(0, 1)];
                let e = elements.len();
                let (ii, jj) = (i as isize, j as isize);
                let neighbours = [(ii, jj - 1), (ii + 1, jj), (ii, jj + 1), (ii - 1, jj)];
                for (local, &(ni, nj)) in neighbours.iter().enumerate() {
                    if is_solid(ni, nj) {
                        continue;
                    }
                    let inside = ni >= 0 && nj >= 0 && (ni as usize) < divisions && (nj as usize) < divisions;
                    faces.push(BoundaryFace {
                        tag: if inside { FaceTag::Hole } else { FaceTag::Outer },
                        nodes: [corners[local], corners[(local + 1) % 4]],
                        element: e,
                        local,
                        normal: FACE_NORMALS[local],
                    });
                }
                elements.push(corners);
                element_grid.push([i, j]);
            }
        }
        let mut mesh = Self {
            divisions,
            period,
            nodes,
            node_grid,
            grid_to_node,
            elements,
            element_grid,
            faces,
            id: 0,
        };
        mesh.id = mesh.fingerprint();
        mesh
    }

    /// Unperforated `divisions × divisions` mesh of the unit square.
    pub fn unit_square(divisions: usize) -> Result<Self> {
        if divisions == 0 {
            return Err(Error::InvalidGeometry("unit square needs at least one division".into()));
        }
        Ok(Self::from_grid(divisions, divisions, |_, _| true))
    }

    pub fn divisions(&self) -> usize {
        self.divisions
    }

    /// Grid elements per periodicity cell.
    pub fn period(&self) -> usize {
        self.period
    }

    /// Uniform grid spacing.
    pub fn spacing(&self) -> f64 {
        1.0 / self.divisions as f64
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// Node at grid point `(i, j)`, if that point belongs to the mesh.
    pub fn node_at(&self, i: usize, j: usize) -> Option<usize> {
        let np = self.divisions + 1;
        if i >= np || j >= np {
            return None;
        }
        match self.grid_to_node[j * np + i] {
            INACTIVE => None,
            v => Some(v),
        }
    }

    /// Lower-left corner and edge length of element `e`.
    pub fn element_box(&self, e: usize) -> ([f64; 2], f64) {
        (self.nodes[self.elements[e][0]], self.spacing())
    }

    /// Cell coordinate `y` of the point with reference coordinates `xi` in element `e`.
    pub fn cell_coordinate(&self, e: usize, xi: [f64; 2]) -> [f64; 2] {
        let [i, j] = self.element_grid[e];
        let p = self.period as f64;
        [
            ((i % self.period) as f64 + 0.5 * (xi[0] + 1.0)) / p,
            ((j % self.period) as f64 + 0.5 * (xi[1] + 1.0)) / p,
        ]
    }

    /// Cell coordinate of node `v`, reduced into `[0,1)²`.
    pub fn node_cell_coordinate(&self, v: usize) -> [f64; 2] {
        let [i, j] = self.node_grid[v];
        let p = self.period as f64;
        [(i % self.period) as f64 / p, (j % self.period) as f64 / p]
    }

    pub fn faces_with(&self, tag: FaceTag) -> impl Iterator<Item = &BoundaryFace> + '_ {
        self.faces.iter().filter(move |f| f.tag == tag)
    }

    /// Nodes lying on at least one face with the given tag, ascending.
    pub fn tagged_nodes(&self, tag: FaceTag) -> Vec<usize> {
        let mut mark = vec![false; self.nodes.len()];
        for f in self.faces_with(tag) {
            mark[f.nodes[0]] = true;
            mark[f.nodes[1]] = true;
        }
        (0..self.nodes.len()).filter(|&v| mark[v]).collect()
    }

    /// Measured area of the mesh.
    pub fn area(&self) -> f64 {
        let h = self.spacing();
        self.elements.len() as f64 * h * h
    }

    /// Deterministic fingerprint of the mesh topology and resolution.
    pub fn id(&self) -> u64 {
        self.id
    }

    fn fingerprint(&self) -> u64 {
        // FNV-1a over resolution, active grid points and connectivity.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.divisions as u64);
        eat(self.period as u64);
        eat(self.nodes.len() as u64);
        for g in &self.node_grid {
            eat(g[0] as u64);
            eat(g[1] as u64);
        }
        for el in &self.elements {
            for &v in el {
                eat(v as u64);
            }
        }
        h
    }
}

/// Mesh of the perforated unit cell `Y₁` with its periodic node pairing.
#[derive(Clone, Debug)]
pub struct CellMesh {
    pub geometry: CellGeometry,
    pub mesh: QuadMesh,
}

/// Which side of each periodic pair carries the degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PeriodicRole {
    /// Left and bottom nodes are masters.
    #[default]
    LowerMaster,
    /// Right and top nodes are masters.
    UpperMaster,
}

impl CellMesh {
    pub fn resolution(&self) -> usize {
        self.geometry.resolution()
    }

    /// Partner of `v` across the left/right faces.
    pub fn partner_x(&self, v: usize) -> Option<usize> {
        let n = self.resolution();
        match self.mesh.node_grid[v] {
            [0, j] => self.mesh.node_at(n, j),
            [i, j] if i == n => self.mesh.node_at(0, j),
            _ => None,
        }
    }

    /// Partner of `v` across the bottom/top faces.
    pub fn partner_y(&self, v: usize) -> Option<usize> {
        let n = self.resolution();
        match self.mesh.node_grid[v] {
            [i, 0] => self.mesh.node_at(i, n),
            [i, j] if j == n => self.mesh.node_at(i, 0),
            _ => None,
        }
    }

    /// Periodic pairs: left↔right for every row, then bottom↔top for every column.
    /// Corners appear in both lists, so all four corners are identified.
    pub fn periodic_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.resolution();
        let mut pairs = Vec::with_capacity(2 * (n + 1));
        for j in 0..=n {
            pairs.push((self.node(0, j), self.node(n, j)));
        }
        for i in 0..=n {
            pairs.push((self.node(i, 0), self.node(i, n)));
        }
        pairs
    }

    /// Node carrying the periodic degree of freedom of `v`.
    pub fn periodic_master(&self, v: usize, role: PeriodicRole) -> usize {
        let n = self.resolution();
        let [i, j] = self.mesh.node_grid[v];
        let fold = |k: usize| match role {
            PeriodicRole::LowerMaster => k % n,
            PeriodicRole::UpperMaster => {
                if k == 0 {
                    n
                } else {
                    k
                }
            }
        };
        self.node(fold(i), fold(j))
    }

    fn node(&self, i: usize, j: usize) -> usize {
        self.mesh.node_at(i, j).expect("outer cell boundary is always solid")
    }
}

/// Mesh of `Ω^ε = [0,1]² \ (holes)` with `ε = 1/K`.
#[derive(Clone, Debug)]
pub struct PerforatedMesh {
    pub geometry: CellGeometry,
    cells_per_side: usize,
    pub mesh: QuadMesh,
    /// ε-cell index (row-major, x fastest) of every element.
    pub element_cell: Vec<usize>,
}

impl PerforatedMesh {
    pub fn eps(&self) -> f64 {
        1.0 / self.cells_per_side as f64
    }

    /// `K = 1/ε`.
    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn n_per_cell(&self) -> usize {
        self.geometry.resolution()
    }
}

pub fn build_cell_mesh(geometry: CellGeometry) -> CellMesh {
    let n = geometry.resolution();
    let mesh = QuadMesh::from_grid(n, n, |i, j| !geometry.is_hole_element(i, j));
    CellMesh { geometry, mesh }
}

/// Tiles `[0,1]²` with `cells_per_side²` copies of the perforated cell.
pub fn build_perforated_mesh(geometry: CellGeometry, cells_per_side: usize) -> Result<PerforatedMesh> {
    if cells_per_side < 2 {
        return Err(Error::InvalidGeometry(format!(
            "at least 2 cells per side are required (eps = 1/K, K >= 2), got K = {cells_per_side}"
        )));
    }
    let n = geometry.resolution();
    let mesh = QuadMesh::from_grid(cells_per_side * n, n, |i, j| !geometry.is_hole_element(i % n, j % n));
    let element_cell = mesh
        .element_grid
        .iter()
        .map(|&[i, j]| (j / n) * cells_per_side + i / n)
        .collect();
    Ok(PerforatedMesh { geometry, cells_per_side, mesh, element_cell })
}

/// Converts `ε` into the integer tiling count `K = 1/ε`.
pub fn cells_per_side_for(eps: f64) -> Result<usize> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidGeometry(format!("eps must be positive, got {eps}")));
    }
    let k = 1.0 / eps;
    let r = k.round();
    if (k - r).abs() > 1e-9 * k || r < 1.0 {
        return Err(Error::InvalidGeometry(format!("eps = {eps} is not the reciprocal of an integer")));
    }
    Ok(r as usize)
}

/// Maps every node of `Ω^ε` to the cell node at `y = x/ε mod 1`.
///
/// The map works on grid indices, so it is exact.
pub fn micro_to_cell_map(pmesh: &PerforatedMesh, cmesh: &CellMesh) -> Result<Vec<usize>> {
    let n = cmesh.resolution();
    if pmesh.n_per_cell() != n {
        return Err(Error::ResolutionMismatch(format!(
            "perforated mesh has {} elements per cell, cell mesh has {n}",
            pmesh.n_per_cell()
        )));
    }
    if pmesh.geometry.hole_cells() != cmesh.geometry.hole_cells() {
        return Err(Error::ResolutionMismatch("perforated mesh and cell mesh have different holes".into()));
    }
    pmesh
        .mesh
        .node_grid
        .iter()
        .map(|&[i, j]| {
            cmesh
                .mesh
                .node_at(i % n, j % n)
                .ok_or_else(|| Error::ResolutionMismatch(format!("grid point ({i}, {j}) has no cell counterpart")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn quarter(n: usize) -> CellGeometry {
        CellGeometry::new(0.25, n).unwrap()
    }

    fn edge_multiplicity(mesh: &QuadMesh) -> HashMap<(usize, usize), usize> {
        let mut count = HashMap::new();
        for el in &mesh.elements {
            for k in 0..4 {
                let (a, b) = (el[k], el[(k + 1) % 4]);
                *count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        count
    }

    #[test]
    fn cell_counts_with_hole() {
        let c = build_cell_mesh(quarter(8));
        assert_eq!(c.mesh.element_count(), 48);
        assert_eq!(c.mesh.faces_with(FaceTag::Hole).count(), 16);
        assert_eq!(c.mesh.faces_with(FaceTag::Outer).count(), 32);
        // 81 grid points minus the 3×3 strictly inside the hole
        assert_eq!(c.mesh.node_count(), 72);
    }

    #[test]
    fn cell_counts_without_hole() {
        let c = build_cell_mesh(CellGeometry::unperforated(8).unwrap());
        assert_eq!(c.mesh.element_count(), 64);
        assert_eq!(c.mesh.faces_with(FaceTag::Hole).count(), 0);
        assert_eq!(c.mesh.node_count(), 81);
    }

    #[test]
    fn misaligned_hole_names_smallest_resolution() {
        match CellGeometry::new(0.25, 6) {
            Err(Error::Misaligned { smallest_valid_n, .. }) => assert_eq!(smallest_valid_n, Some(4)),
            other => panic!("expected misalignment, got {other:?}"),
        }
        match CellGeometry::new(0.1, 8) {
            Err(Error::Misaligned { smallest_valid_n, .. }) => assert_eq!(smallest_valid_n, Some(10)),
            other => panic!("expected misalignment, got {other:?}"),
        }
        assert!(CellGeometry::new(0.25, 5).is_err());
        assert!(CellGeometry::new(0.5, 8).is_err());
        assert!(CellGeometry::new(-0.1, 8).is_err());
    }

    #[test]
    fn porosity_matches_element_area() {
        let c = build_cell_mesh(quarter(16));
        assert!((c.mesh.area() - 0.75).abs() < 1e-14);
        assert!((c.geometry.porosity() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn perforated_counts() {
        let p = build_perforated_mesh(quarter(8), 2).unwrap();
        assert_eq!(p.mesh.element_count(), 192);
        assert_eq!(p.mesh.faces_with(FaceTag::Hole).count(), 64);
        assert_eq!(p.mesh.faces_with(FaceTag::Outer).count(), 64);

        let p3 = build_perforated_mesh(quarter(8), 3).unwrap();
        let holes: std::collections::BTreeSet<_> = p3
            .mesh
            .faces_with(FaceTag::Hole)
            .map(|f| p3.element_cell[f.element])
            .collect();
        assert_eq!(holes.len(), 9);
        assert_eq!(p3.mesh.element_count(), 9 * 48);

        let plain = build_perforated_mesh(CellGeometry::unperforated(4).unwrap(), 4).unwrap();
        assert_eq!(plain.mesh.element_count(), 256);
        assert_eq!(plain.mesh.node_count(), 17 * 17);

        assert!(build_perforated_mesh(quarter(8), 1).is_err());
    }

    #[test]
    fn holes_stay_inside_the_domain() {
        let p = build_perforated_mesh(quarter(8), 4).unwrap();
        for f in p.mesh.faces_with(FaceTag::Hole) {
            for &v in &f.nodes {
                let [x, y] = p.mesh.nodes[v];
                assert!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0);
            }
        }
    }

    #[test]
    fn conformity_and_tag_partition() {
        for mesh in [build_cell_mesh(quarter(8)).mesh, build_perforated_mesh(quarter(8), 3).unwrap().mesh] {
            let mult = edge_multiplicity(&mesh);
            assert!(mult.values().all(|&m| m == 1 || m == 2));
            let boundary: std::collections::BTreeSet<_> =
                mult.iter().filter(|(_, &m)| m == 1).map(|(&e, _)| e).collect();
            let tagged: std::collections::BTreeSet<_> = mesh
                .faces
                .iter()
                .map(|f| (f.nodes[0].min(f.nodes[1]), f.nodes[0].max(f.nodes[1])))
                .collect();
            assert_eq!(boundary, tagged);
            assert_eq!(tagged.len(), mesh.faces.len());
        }
    }

    #[test]
    fn elements_are_counter_clockwise() {
        let c = build_cell_mesh(quarter(8));
        for el in &c.mesh.elements {
            let p: Vec<_> = el.iter().map(|&v| c.mesh.nodes[v]).collect();
            let mut area2 = 0.0;
            for k in 0..4 {
                let (a, b) = (p[k], p[(k + 1) % 4]);
                area2 += a[0] * b[1] - b[0] * a[1];
            }
            assert!(area2 > 0.0);
        }
    }

    #[test]
    fn hole_faces_lie_on_removed_square() {
        let c = build_cell_mesh(quarter(8));
        for f in c.mesh.faces_with(FaceTag::Hole) {
            let [a, b] = f.nodes.map(|v| c.mesh.nodes[v]);
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let on_edge = |t: f64| (t - 0.25).abs() < 1e-14 || (t - 0.75).abs() < 1e-14;
            assert!(on_edge(mid[0]) || on_edge(mid[1]));
            assert!(mid.iter().all(|&t| (0.25 - 1e-14..=0.75 + 1e-14).contains(&t)));
            // normal points into the hole
            let probe = [mid[0] + 0.01 * f.normal[0], mid[1] + 0.01 * f.normal[1]];
            assert!(probe.iter().all(|&t| t > 0.25 && t < 0.75));
        }
    }

    #[test]
    fn periodic_pairing_is_an_involution() {
        let c = build_cell_mesh(quarter(8));
        for v in 0..c.mesh.node_count() {
            if let Some(w) = c.partner_x(v) {
                assert_eq!(c.partner_x(w), Some(v));
                let (a, b) = (c.mesh.nodes[v], c.mesh.nodes[w]);
                assert_eq!((a[0] - b[0]).abs(), 1.0);
                assert_eq!(a[1], b[1]);
            }
            if let Some(w) = c.partner_y(v) {
                assert_eq!(c.partner_y(w), Some(v));
            }
        }
        let pairs = c.periodic_pairs();
        assert_eq!(pairs.len(), 18);
        for (a, b) in pairs {
            let (p, q) = (c.mesh.nodes[a], c.mesh.nodes[b]);
            let dx = (p[0] - q[0]).abs();
            let dy = (p[1] - q[1]).abs();
            assert!((dx == 1.0 && dy == 0.0) || (dx == 0.0 && dy == 1.0));
        }
        // all four corners share one master
        let corners = [(0, 0), (8, 0), (8, 8), (0, 8)].map(|(i, j)| c.mesh.node_at(i, j).unwrap());
        for role in [PeriodicRole::LowerMaster, PeriodicRole::UpperMaster] {
            let m: Vec<_> = corners.iter().map(|&v| c.periodic_master(v, role)).collect();
            assert!(m.iter().all(|&x| x == m[0]));
        }
    }

    #[test]
    fn refinement_nests_node_sets() {
        let coarse = build_cell_mesh(quarter(8)).mesh;
        let fine = build_cell_mesh(quarter(16)).mesh;
        for &[i, j] in &coarse.node_grid {
            assert!(fine.node_at(2 * i, 2 * j).is_some());
        }
    }

    #[test]
    fn micro_map_uses_fractional_part() {
        let geom = quarter(8);
        let cell = build_cell_mesh(geom);
        let p = build_perforated_mesh(geom, 2).unwrap();
        let map = micro_to_cell_map(&p, &cell).unwrap();
        let find = |m: &QuadMesh, x: f64, y: f64| {
            (0..m.node_count()).find(|&v| m.nodes[v] == [x, y]).unwrap()
        };
        assert_eq!(cell.mesh.nodes[map[find(&p.mesh, 0.625, 0.625)]], [0.25, 0.25]);
        assert_eq!(cell.mesh.nodes[map[find(&p.mesh, 0.0, 0.0)]], [0.0, 0.0]);

        let p4 = build_perforated_mesh(geom, 4).unwrap();
        let map4 = micro_to_cell_map(&p4, &cell).unwrap();
        assert_eq!(cell.mesh.nodes[map4[find(&p4.mesh, 0.5, 0.25)]], [0.0, 0.0]);

        let other = build_cell_mesh(quarter(16));
        assert!(matches!(micro_to_cell_map(&p, &other), Err(Error::ResolutionMismatch(_))));
    }

    #[test]
    fn eps_must_tile() {
        assert_eq!(cells_per_side_for(0.125).unwrap(), 8);
        assert_eq!(cells_per_side_for(1.0 / 3.0).unwrap(), 3);
        assert!(cells_per_side_for(0.3).is_err());
    }

    #[test]
    fn mesh_ids_distinguish_meshes() {
        let a = build_cell_mesh(quarter(8)).mesh;
        let b = build_cell_mesh(quarter(16)).mesh;
        let c = build_cell_mesh(CellGeometry::unperforated(8).unwrap()).mesh;
        assert_ne!(a.id(), b.id());
        assert_ne!(a.id(), c.id());
        assert_eq!(a.id(), build_cell_mesh(quarter(8)).mesh.id());
    }
}
