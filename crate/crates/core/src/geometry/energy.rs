use serde::Serialize;

use crate::exponents::Exponents;
use crate::geometry::fields::BoundaryField;
use crate::geometry::grid::Grid;

/// The three numerator integrals of the quotient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyParts {
    pub dirichlet: f64,
    pub curv_interior: f64,
    pub curv_boundary: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.dirichlet + self.curv_interior + self.curv_boundary
    }
}

/// |x|^p with a floor below which the power is taken as zero.
#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if a < 1e-300 {
        0.0
    } else {
        (p * a.ln()).exp()
    }
}

/// Discrete energy form `w ↦ wᵀAw` with the norm densities of a weighted
/// space whose metric is `e^{2u}` times the flat one and whose weight is
/// `e^{-φ̂}`.
///
/// Dirichlet part: sum over grid edges of the edge-midpoint density times
/// the squared difference quotient. Curvature parts are lumped on the
/// diagonal.
#[derive(Debug, Clone)]
pub(crate) struct Form {
    pub edges: Vec<(usize, usize, f64)>,
    pub diag_r: Vec<f64>,
    pub diag_h: Vec<f64>,
    /// Quadrature weight times the density of the interior norm.
    pub dens_i: Vec<f64>,
    /// Summed face weights times the density of the boundary norm.
    pub dens_b: Vec<f64>,
    /// Weighted volume element e^{-φ̂} dV̂ per node.
    pub mass: Vec<f64>,
    /// Weighted boundary element e^{-φ̂} dσ̂ per node.
    pub bmass: Vec<f64>,
    pub curvature: Vec<f64>,
    pub mean_curvature: BoundaryField,
}

impl Form {
    pub fn build(grid: &Grid, m: f64, phi_hat: &[f64], u: &[f64]) -> Form {
        let n = grid.dim();
        let nf = n as f64;
        let ex = Exponents::new(m, n);
        let len = grid.len();
        let u_flat = u.iter().all(|&v| v == 0.0);

        let rho: Vec<f64> = (0..len).map(|i| ((nf - 2.0) * u[i] - phi_hat[i]).exp()).collect();
        let mut edges = Vec::with_capacity(n * len);
        for k in 0..n {
            let h = grid.spacing()[k];
            for i in 0..len {
                if let Some(j) = grid.next(i, k) {
                    // trapezoid weight transverse to the edge, edge length along it
                    let transverse = grid.weights()[i] / grid.axis_weight(k, grid.axis_index(i, k));
                    let c = transverse * h * 0.5 * (rho[i] + rho[j]) / (h * h);
                    edges.push((i, j, c));
                }
            }
        }

        let curvature = scalar_curvature(grid, m, phi_hat, u, u_flat);
        let mut diag_r = vec![0.0; len];
        let mut dens_i = vec![0.0; len];
        let mut mass = vec![0.0; len];
        for i in 0..len {
            let wq = grid.weights()[i];
            diag_r[i] = wq * ex.c_r() * curvature[i] * (nf * u[i] - phi_hat[i]).exp();
            let log_density = if m > 0.0 {
                -(m - 1.0) / m * phi_hat[i] + nf * u[i]
            } else {
                (nf - 1.0) * u[i]
            };
            dens_i[i] = wq * log_density.exp();
            mass[i] = wq * (nf * u[i] - phi_hat[i]).exp();
        }

        let mut diag_h = vec![0.0; len];
        let mut dens_b = vec![0.0; len];
        let mut bmass = vec![0.0; len];
        let mut mean = Vec::with_capacity(grid.faces().len());
        for (fi, face) in grid.faces().iter().enumerate() {
            let dphi = grid.normal_derivative(phi_hat, fi);
            let du = if u_flat {
                vec![0.0; face.nodes.len()]
            } else {
                grid.normal_derivative(u, fi)
            };
            let mut hvals = Vec::with_capacity(face.nodes.len());
            for (k, &i) in face.nodes.iter().enumerate() {
                // H_ĝ − ∂̂_η φ̂ with η the outer normal
                let h = (-u[i]).exp() * ((nf - 1.0) * du[k] - dphi[k]);
                let bw = face.weights[k] * ((nf - 1.0) * u[i] - phi_hat[i]).exp();
                diag_h[i] += ex.c_h() * h * bw;
                dens_b[i] += bw;
                bmass[i] += bw;
                hvals.push(h);
            }
            mean.push(hvals);
        }

        Form {
            edges,
            diag_r,
            diag_h,
            dens_i,
            dens_b,
            mass,
            bmass,
            curvature,
            mean_curvature: BoundaryField { faces: mean },
        }
    }

    pub fn energy(&self, w: &[f64]) -> EnergyParts {
        let dirichlet = self
            .edges
            .iter()
            .map(|&(i, j, c)| {
                let d = w[j] - w[i];
                c * d * d
            })
            .sum();
        let curv_interior = self.diag_r.iter().zip(w).map(|(d, x)| d * x * x).sum();
        let curv_boundary = self.diag_h.iter().zip(w).map(|(d, x)| d * x * x).sum();
        EnergyParts {
            dirichlet,
            curv_interior,
            curv_boundary,
        }
    }

    /// out ← A w, so that the energy is wᵀAw and its gradient 2Aw.
    pub fn apply(&self, w: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (self.diag_r[i] + self.diag_h[i]) * w[i];
        }
        for &(i, j, c) in &self.edges {
            let d = c * (w[i] - w[j]);
            out[i] += d;
            out[j] -= d;
        }
    }

    /// Applies only the Dirichlet part K.
    pub fn apply_stiffness(&self, w: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(i, j, c) in &self.edges {
            let d = c * (w[i] - w[j]);
            out[i] += d;
            out[j] -= d;
        }
    }

    /// Diagonal of K.
    pub fn stiffness_diag(&self, len: usize) -> Vec<f64> {
        let mut d = vec![0.0; len];
        for &(i, j, c) in &self.edges {
            d[i] += c;
            d[j] += c;
        }
        d
    }

    /// Interior and boundary norms `(I, Bd)` of `w` for exponent `p`.
    pub fn norms(&self, p: f64, w: &[f64]) -> (f64, f64) {
        let mut int = 0.0;
        let mut bd = 0.0;
        for i in 0..w.len() {
            let wp = pow_abs(w[i], p);
            int += self.dens_i[i] * wp;
            bd += self.dens_b[i] * wp;
        }
        (int, bd)
    }
}

/// Weighted scalar curvature of `(e^{2u}δ, e^{-φ̂})`.
fn scalar_curvature(grid: &Grid, m: f64, phi: &[f64], u: &[f64], u_flat: bool) -> Vec<f64> {
    let n = grid.dim() as f64;
    let len = grid.len();
    let mut r = vec![0.0; len];
    if m > 0.0 {
        let lap = grid.laplacian(phi);
        let grad = grid.gradient(phi);
        for i in 0..len {
            let g2: f64 = grad.iter().map(|g| g[i] * g[i]).sum();
            r[i] = 2.0 * lap[i] - (m + 1.0) / m * g2;
        }
        if !u_flat {
            let gu = grid.gradient(u);
            for i in 0..len {
                let dot: f64 = gu.iter().zip(&grad).map(|(a, b)| a[i] * b[i]).sum();
                r[i] += 2.0 * (n - 2.0) * dot;
            }
        }
    }
    if !u_flat {
        let lap_u = grid.laplacian(u);
        let gu = grid.gradient(u);
        for i in 0..len {
            let g2: f64 = gu.iter().map(|g| g[i] * g[i]).sum();
            r[i] += -2.0 * (n - 1.0) * lap_u[i] - (n - 2.0) * (n - 1.0) * g2;
            r[i] *= (-2.0 * u[i]).exp();
        }
    }
    r
}
