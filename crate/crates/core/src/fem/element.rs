//! Bilinear reference element on `[-1,1]²` and tensor Gauss rules.
//!
//! Local corner order is counter-clockwise from the lower-left corner.

#[allow(unused_imports)]
use num_traits::Float;

const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Tensor-product Gauss-Legendre rule on the reference square.
#[derive(Clone, Copy, Debug)]
pub struct QuadRule<const N: usize> {
    pub points: [[f64; 2]; N],
    pub weights: [f64; N],
}

/// 2×2 Gauss rule, exact for bicubic integrands.
pub fn gauss2() -> QuadRule<4> {
    let g = 1.0 / 3.0_f64.sqrt();
    QuadRule {
        points: [[-g, -g], [g, -g], [g, g], [-g, g]],
        weights: [1.0; 4],
    }
}

/// 3×3 Gauss rule, exact for biquintic integrands; used for error norms.
pub fn gauss3() -> QuadRule<9> {
    let g = 0.6_f64.sqrt();
    let x = [-g, 0.0, g];
    let w = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut points = [[0.0; 2]; 9];
    let mut weights = [0.0; 9];
    for j in 0..3 {
        for i in 0..3 {
            points[3 * j + i] = [x[i], x[j]];
            weights[3 * j + i] = w[i] * w[j];
        }
    }
    QuadRule { points, weights }
}

/// Two-point Gauss rule on `[-1,1]`, used along faces.
pub fn gauss2_line() -> ([f64; 2], [f64; 2]) {
    let g = 1.0 / 3.0_f64.sqrt();
    ([-g, g], [1.0, 1.0])
}

pub fn shape(xi: [f64; 2]) -> [f64; 4] {
    CORNERS.map(|c| 0.25 * (1.0 + c[0] * xi[0]) * (1.0 + c[1] * xi[1]))
}

/// Reference gradients `∂φ/∂ξ`.
pub fn shape_grad(xi: [f64; 2]) -> [[f64; 2]; 4] {
    CORNERS.map(|c| [0.25 * c[0] * (1.0 + c[1] * xi[1]), 0.25 * c[1] * (1.0 + c[0] * xi[0])])
}

/// Square element of edge `h` with lower-left corner `origin`.
#[derive(Clone, Copy, Debug)]
pub struct SquareElement {
    pub origin: [f64; 2],
    pub h: f64,
}

impl SquareElement {
    pub fn point(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + 0.5 * (xi[0] + 1.0) * self.h,
            self.origin[1] + 0.5 * (xi[1] + 1.0) * self.h,
        ]
    }

    /// Jacobian determinant of the reference map.
    pub fn det(&self) -> f64 {
        0.25 * self.h * self.h
    }

    /// Physical shape gradients at `xi`.
    pub fn grad(&self, xi: [f64; 2]) -> [[f64; 2]; 4] {
        let s = 2.0 / self.h;
        shape_grad(xi).map(|g| [g[0] * s, g[1] * s])
    }

    /// Value and gradient of the bilinear interpolant of `vals` at `xi`.
    pub fn interpolate(&self, vals: &[f64; 4], xi: [f64; 2]) -> (f64, [f64; 2]) {
        let phi = shape(xi);
        let dphi = self.grad(xi);
        let mut v = 0.0;
        let mut g = [0.0; 2];
        for a in 0..4 {
            v += vals[a] * phi[a];
            g[0] += vals[a] * dphi[a][0];
            g[1] += vals[a] * dphi[a][1];
        }
        (v, g)
    }
}
