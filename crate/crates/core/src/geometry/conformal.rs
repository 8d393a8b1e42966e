use crate::error::Result;
use crate::geometry::energy::{EnergyParts, Form};
use crate::geometry::fields::ScalarField;
use crate::geometry::space::MeasureSpace;

/// The numerator integrals of the quotient for `w` on `space`.
///
/// On a conformally changed space the value is the base energy of
/// `e^{σ/2} w`.
pub fn conformal_energy(space: &MeasureSpace, w: &ScalarField) -> Result<EnergyParts> {
    space.check_field(w)?;
    Ok(space.base_form().energy(&space.to_base(&w.values)))
}

/// Returns the space with conformal factor σ added to the existing one;
/// the base φ is unchanged and φ̂ = φ − mσ/(m+n−2) follows.
pub fn conformal_change(space: &MeasureSpace, sigma: &ScalarField) -> Result<MeasureSpace> {
    space.check_field(sigma)?;
    space.with_sigma(space.sigma().add(sigma))
}

/// Energy form of the changed space assembled directly from its metric
/// `e^{2u}δ` and weight `e^{-φ̂}` with closed-form conformally flat
/// curvatures. Independent of the transformation law.
pub(crate) fn direct_form(space: &MeasureSpace) -> Form {
    Form::build(space.grid(), space.m(), &space.effective_phi(), &space.metric_log_factor())
}

/// Energy of `w` on `space`, computed from the curvature of the changed
/// metric rather than through the base space.
pub fn direct_energy(space: &MeasureSpace, w: &ScalarField) -> Result<EnergyParts> {
    space.check_field(w)?;
    Ok(direct_form(space).energy(&w.values))
}

/// |Ê(w) − E(e^{σ/2}w)| / max(1, |E|) where Ê is the directly assembled
/// energy of the space changed by σ and E the energy of `space`.
pub fn conformal_law_residual(space: &MeasureSpace, sigma: &ScalarField, w: &ScalarField) -> Result<f64> {
    space.check_field(w)?;
    let changed = conformal_change(space, sigma)?;
    let direct = direct_energy(&changed, w)?.total();
    let lifted: Vec<f64> = w
        .values
        .iter()
        .zip(&sigma.values)
        .map(|(x, s)| x * (0.5 * s).exp())
        .collect();
    let law = conformal_energy(space, &ScalarField::new(lifted))?.total();
    Ok((direct - law).abs() / law.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grid::Grid;
    use std::f64::consts::PI;

    fn torus(n: usize) -> Grid {
        Grid::half_torus(&[n, n, n], &[1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_field_on_flat_space_has_zero_energy() {
        let s = MeasureSpace::flat_based(torus(6), 1.0, |_| 0.0).unwrap();
        let e = conformal_energy(&s, &ScalarField::constant(s.grid(), 3.0)).unwrap();
        assert_eq!(e.total(), 0.0);
    }

    #[test]
    fn linear_field_energy_is_volume() {
        let s = MeasureSpace::flat_based(torus(6), 1.0, |_| 0.0).unwrap();
        let w = ScalarField::from_fn(s.grid(), |x| 1.0 + x[2]);
        let e = conformal_energy(&s, &w).unwrap();
        assert!((e.dirichlet - 1.0).abs() < 1e-13);
        assert_eq!(e.curv_interior, 0.0);
        assert_eq!(e.curv_boundary, 0.0);
    }

    #[test]
    fn linear_weight_constant_field() {
        let a = 1.2;
        let s = MeasureSpace::flat_based(torus(9), 1.0, |x| a * x[2]).unwrap();
        let e = conformal_energy(&s, &ScalarField::constant(s.grid(), 1.0)).unwrap();
        let ex = s.exponents();
        let weighted_volume: f64 = s
            .grid()
            .weights()
            .iter()
            .enumerate()
            .map(|(i, w)| w * (-a * s.grid().coord(i, 2)).exp())
            .sum();
        let expected_r = ex.c_r() * (-2.0 * a * a) * weighted_volume;
        let expected_h = ex.c_h() * (a - a * (-a).exp());
        assert!((e.curv_interior - expected_r).abs() < 1e-10);
        assert!((e.curv_boundary - expected_h).abs() < 1e-10);
        assert_eq!(e.dirichlet, 0.0);
    }

    #[test]
    fn identity_and_group_law() {
        let s = MeasureSpace::flat_based(torus(6), 1.0, |x| 0.3 * x[2]).unwrap();
        let s1 = ScalarField::from_fn(s.grid(), |x| 0.2 * (2.0 * PI * x[0]).sin());
        let s2 = ScalarField::from_fn(s.grid(), |x| 0.1 * x[2] * x[2]);
        let id = conformal_change(&s, &ScalarField::zeros(s.grid())).unwrap();
        assert_eq!(id.sigma(), s.sigma());
        let a = conformal_change(&conformal_change(&s, &s1).unwrap(), &s2).unwrap();
        let b = conformal_change(&s, &s1.add(&s2)).unwrap();
        for (x, y) in a.sigma().values.iter().zip(&b.sigma().values) {
            assert!((x - y).abs() <= 1e-16);
        }
        assert_eq!(a.effective_phi().len(), b.effective_phi().len());
    }

    #[test]
    fn constant_sigma_scales_boundary_measure() {
        let c = 0.4;
        let s = MeasureSpace::flat_based(torus(6), 1.0, |_| 0.0).unwrap();
        let t = conformal_change(&s, &ScalarField::constant(s.grid(), c)).unwrap();
        let ratio = t.boundary_measure() / s.boundary_measure();
        assert!((ratio - (1.5 * c).exp()).abs() < 1e-13);
    }

    #[test]
    fn law_residual_zero_and_constant() {
        let s = MeasureSpace::flat_based(torus(8), 1.0, |x| 0.5 * x[2]).unwrap();
        let w = ScalarField::from_fn(s.grid(), |x| 1.0 + 0.3 * (2.0 * PI * x[1]).cos() + x[2]);
        let r0 = conformal_law_residual(&s, &ScalarField::zeros(s.grid()), &w).unwrap();
        assert_eq!(r0, 0.0);
        let rc = conformal_law_residual(&s, &ScalarField::constant(s.grid(), 0.7), &w).unwrap();
        assert!(rc < 1e-13, "{rc}");
    }

    #[test]
    fn law_residual_converges_at_second_order() {
        let res: Vec<f64> = [16usize, 32]
            .iter()
            .map(|&n| {
                let s = MeasureSpace::flat_based(torus(n), 1.0, |x| 0.4 * x[2] + 0.1 * (2.0 * PI * x[0]).sin()).unwrap();
                let sigma = ScalarField::from_fn(s.grid(), |x| 0.3 * (2.0 * PI * x[1]).sin() * (1.0 + x[2]) + 0.2 * x[2]);
                let w = ScalarField::from_fn(s.grid(), |x| 1.0 + 0.5 * x[2] * x[2] + 0.2 * (2.0 * PI * x[0]).cos());
                conformal_law_residual(&s, &sigma, &w).unwrap()
            })
            .collect();
        let order = (res[0] / res[1]).log2();
        assert!(order > 1.7, "residuals {res:?}");
    }
}
