use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::geometry::energy::Form;
use crate::geometry::fields::ScalarField;
use crate::geometry::grid::Grid;

/// Bound on φ/m that keeps the interior-norm density e^{-(m-1)φ/m} finite.
pub const MAX_PHI_OVER_M: f64 = 30.0;

/// A discretized smooth metric measure space with boundary: a flat grid,
/// the weight φ with `v^m = e^{-φ}`, the parameter `m`, and a pointwise
/// conformal factor σ. The metric of the space is `e^{2σ/(m+n-2)}` times
/// the flat one and its weight is `φ - mσ/(m+n-2)`.
#[derive(Debug, Clone)]
pub struct MeasureSpace {
    grid: Grid,
    m: f64,
    phi: ScalarField,
    sigma: ScalarField,
    base: Form,
}

/// Validates and assembles a space. `sigma = None` means σ ≡ 0.
pub fn build_space(grid: Grid, m: f64, phi: ScalarField, sigma: Option<ScalarField>) -> Result<MeasureSpace> {
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::config("space.m", format!("m must be a finite number ≥ 0, got {m}")));
    }
    phi.check(&grid).map_err(|e| Error::config("space.phi", e.to_string()))?;
    let sigma = sigma.unwrap_or_else(|| ScalarField::zeros(&grid));
    sigma.check(&grid).map_err(|e| Error::config("space.sigma", e.to_string()))?;
    if m == 0.0 && !phi.is_zero() {
        return Err(Error::config("space.phi", "m = 0 requires φ ≡ 0"));
    }
    if m > 0.0 {
        let worst = phi.values.iter().fold(0.0f64, |a, v| a.max(v.abs())) / m;
        if worst > MAX_PHI_OVER_M {
            return Err(Error::config(
                "space.phi",
                format!("|φ|/m reaches {worst:.3e}, above the conditioning bound {MAX_PHI_OVER_M}"),
            ));
        }
    }
    let zeros = vec![0.0; grid.len()];
    let base = Form::build(&grid, m, &phi.values, &zeros);
    let boundary_measure: f64 = base.bmass.iter().sum();
    if !(boundary_measure > 0.0) {
        return Err(Error::config("space", "the weighted boundary measure must be positive"));
    }
    Ok(MeasureSpace {
        grid,
        m,
        phi,
        sigma,
        base,
    })
}

impl MeasureSpace {
    /// Samples φ and σ from closures over node coordinates.
    pub fn from_fns<P, S>(grid: Grid, m: f64, phi: P, sigma: S) -> Result<Self>
    where
        P: Fn(&[f64]) -> f64,
        S: Fn(&[f64]) -> f64,
    {
        let phi = ScalarField::from_fn(&grid, phi);
        let sigma = ScalarField::from_fn(&grid, sigma);
        build_space(grid, m, phi, Some(sigma))
    }

    /// Space with σ ≡ 0.
    pub fn flat_based<P: Fn(&[f64]) -> f64>(grid: Grid, m: f64, phi: P) -> Result<Self> {
        let phi = ScalarField::from_fn(&grid, phi);
        build_space(grid, m, phi, None)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.grid.dim()
    }

    pub fn exponents(&self) -> Exponents {
        Exponents::new(self.m, self.n())
    }

    /// φ of the flat base.
    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn sigma(&self) -> &ScalarField {
        &self.sigma
    }

    pub fn has_conformal_factor(&self) -> bool {
        !self.sigma.is_zero()
    }

    /// Log of the metric factor, u = σ/(m+n-2).
    pub fn metric_log_factor(&self) -> Vec<f64> {
        let k = self.exponents().k();
        self.sigma.values.iter().map(|s| s / k).collect()
    }

    /// Weight of the conformally changed space, φ̂ = φ - mσ/(m+n-2).
    pub fn effective_phi(&self) -> Vec<f64> {
        let k = self.exponents().k();
        self.phi
            .values
            .iter()
            .zip(&self.sigma.values)
            .map(|(p, s)| p - self.m * s / k)
            .collect()
    }

    /// e^{σ/2}, the factor relating fields on this space to the flat base.
    pub fn base_scale(&self) -> Vec<f64> {
        self.sigma.values.iter().map(|s| (0.5 * s).exp()).collect()
    }

    pub(crate) fn base_form(&self) -> &Form {
        &self.base
    }

    /// ∫_∂M e^{-φ̂} dσ̂.
    pub fn boundary_measure(&self) -> f64 {
        if !self.has_conformal_factor() {
            return self.base.bmass.iter().sum();
        }
        let k = self.exponents().k();
        let nf = self.n() as f64;
        self.base
            .bmass
            .iter()
            .zip(&self.sigma.values)
            .map(|(b, s)| b * ((self.m + nf - 1.0) * s / k).exp())
            .sum()
    }

    /// Maps a field on this space to the corresponding field on the base,
    /// w ↦ e^{σ/2} w.
    pub fn to_base(&self, w: &[f64]) -> Vec<f64> {
        if !self.has_conformal_factor() {
            return w.to_vec();
        }
        w.iter().zip(&self.sigma.values).map(|(x, s)| x * (0.5 * s).exp()).collect()
    }

    /// Same base data with the conformal factor replaced.
    pub(crate) fn with_sigma(&self, sigma: ScalarField) -> Result<MeasureSpace> {
        sigma.check(&self.grid).map_err(|e| Error::config("space.sigma", e.to_string()))?;
        Ok(MeasureSpace {
            grid: self.grid.clone(),
            m: self.m,
            phi: self.phi.clone(),
            sigma,
            base: self.base.clone(),
        })
    }

    pub fn check_field(&self, w: &ScalarField) -> Result<()> {
        w.check(&self.grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::half_torus(&[4, 4, 8], &[1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn rejects_weight_with_m_zero() {
        let e = MeasureSpace::flat_based(grid(), 0.0, |_| 1.0).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(MeasureSpace::flat_based(grid(), 0.0, |_| 0.0).is_ok());
    }

    #[test]
    fn rejects_negative_m_and_poor_conditioning() {
        assert!(MeasureSpace::flat_based(grid(), -1.0, |_| 0.0).is_err());
        assert!(MeasureSpace::flat_based(grid(), 0.1, |x| 10.0 * x[2]).is_err());
    }

    #[test]
    fn boundary_measure_of_flat_half_torus() {
        let s = MeasureSpace::flat_based(grid(), 1.0, |_| 0.0).unwrap();
        assert!((s.boundary_measure() - 2.0).abs() < 1e-14);
    }
}
