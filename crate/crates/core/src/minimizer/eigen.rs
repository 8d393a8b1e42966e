use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{conformal_energy, MeasureSpace, ScalarField};
use crate::linalg::{dot, pcg};

/// Smallest eigenvalue of the conformal Laplacian with zero boundary values.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub rho1: f64,
    /// Nonnegative eigenfield, zero on every boundary face, unit weighted L².
    #[serde(skip)]
    pub field: ScalarField,
    /// Energy of the field over its weighted L² norm, recomputed from the
    /// energy form.
    pub rayleigh: f64,
    pub iterations: usize,
    /// Relative residual ‖Lφ − ρ₁φ‖ of the returned pair.
    pub residual: f64,
    /// Width 5h² of the band where the sign of ρ₁ is not trusted.
    pub band: f64,
    pub shift: f64,
}

impl EigenResult {
    pub fn is_indeterminate(&self) -> bool {
        self.rho1.abs() < self.band
    }
}

/// ρ₁ = inf (L ψ, ψ)/∫ψ² e^{−φ} over fields vanishing on the boundary, by
/// inverse iteration on the interior nodes. The shift sits below the
/// smallest curvature term so the shifted operator is positive definite.
pub fn dirichlet_rho1(space: &MeasureSpace, tol: f64) -> Result<EigenResult> {
    if !(tol > 0.0) {
        return Err(Error::config("numerics.eigen_tol", "tolerance must be positive"));
    }
    let grid = space.grid();
    let len = grid.len();
    let form = space.base_form();
    let ex = space.exponents();
    let free: Vec<bool> = (0..len).map(|i| !grid.is_boundary(i)).collect();
    if !free.iter().any(|&f| f) {
        return Err(Error::Precondition("grid has no interior nodes".into()));
    }
    let s = space.base_scale();
    let power = (ex.m + ex.n as f64) / ex.k();
    let mhat: Vec<f64> = (0..len)
        .map(|i| form.mass[i] * (power * space.sigma().values[i]).exp())
        .collect();
    let shift = (0..len)
        .filter(|&i| free[i])
        .map(|i| s[i] * s[i] * form.diag_r[i] / mhat[i])
        .fold(f64::INFINITY, f64::min)
        - 1.0;

    // S A S restricted to free nodes
    let apply_l = |x: &[f64], out: &mut [f64]| {
        let y: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a * b).collect();
        form.apply(&y, out);
        for i in 0..len {
            out[i] = if free[i] { out[i] * s[i] } else { 0.0 };
        }
    };
    let apply_b = |x: &[f64], out: &mut [f64]| {
        apply_l(x, out);
        for i in 0..len {
            if free[i] {
                out[i] -= shift * mhat[i] * x[i];
            } else {
                out[i] = x[i];
            }
        }
    };
    let kdiag = form.stiffness_diag(len);
    let diag: Vec<f64> = (0..len)
        .map(|i| {
            if free[i] {
                s[i] * s[i] * (kdiag[i] + form.diag_r[i]) - shift * mhat[i]
            } else {
                1.0
            }
        })
        .collect();
    let m_norm = |x: &[f64]| (0..len).map(|i| mhat[i] * x[i] * x[i]).sum::<f64>().sqrt();

    let mut x: Vec<f64> = free.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
    let nx = m_norm(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut lx = vec![0.0; len];
    let mut rho = f64::INFINITY;
    let mut y = vec![0.0; len];
    let mut residual = f64::INFINITY;
    for it in 1..=1000 {
        let rhs: Vec<f64> = (0..len).map(|i| mhat[i] * x[i]).collect();
        let out = pcg(apply_b, &diag, &rhs, &mut y, 1e-13, 20 * len);
        if !out.converged {
            return Err(Error::LinearSolve {
                iterations: out.iterations,
                shift,
                residual: out.residual,
            });
        }
        let ny = m_norm(&y);
        x = y.iter().map(|v| v / ny).collect();
        apply_l(&x, &mut lx);
        let new_rho = dot(&x, &lx);
        let res2: f64 = (0..len)
            .filter(|&i| free[i])
            .map(|i| (lx[i] - new_rho * mhat[i] * x[i]).powi(2) / mhat[i])
            .sum();
        residual = res2.sqrt() / new_rho.abs().max(1.0);
        let change = (new_rho - rho).abs();
        rho = new_rho;
        if change <= tol * rho.abs().max(1.0) && residual <= tol.sqrt() {
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            let field = ScalarField::new(x);
            let num = conformal_energy(space, &field)?.total();
            let den: f64 = (0..len).map(|i| mhat[i] * field.values[i].powi(2)).sum();
            let h = grid.max_spacing();
            return Ok(EigenResult {
                rho1: rho,
                field,
                rayleigh: num / den,
                iterations: it,
                residual,
                band: 5.0 * h * h,
                shift,
            });
        }
        // warm start for the next solve
        y.iter_mut().for_each(|v| *v /= ny);
    }
    Err(Error::NonConvergence {
        iterations: 1000,
        residual,
    })
}
