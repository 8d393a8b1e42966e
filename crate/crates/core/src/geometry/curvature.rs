use crate::error::{Error, Result};
use crate::geometry::fields::{BoundaryField, ScalarField};
use crate::geometry::space::MeasureSpace;

fn require_flat(space: &MeasureSpace, what: &str) -> Result<()> {
    if space.has_conformal_factor() {
        return Err(Error::Precondition(format!(
            "{what} is only available on the flat base (σ ≡ 0); energies of conformally changed spaces go through the transformation law"
        )));
    }
    Ok(())
}

/// R^m_φ = 2Δφ − ((m+1)/m)|∇φ|² on the flat base; zero when m = 0.
pub fn weighted_scalar_curvature(space: &MeasureSpace) -> Result<ScalarField> {
    require_flat(space, "weighted scalar curvature")?;
    Ok(ScalarField::new(space.base_form().curvature.clone()))
}

/// Weighted mean curvature H^m_φ = H_g − ∂φ/∂η per boundary face, η the
/// outer normal; on flat faces this is the derivative of φ along the inward
/// normal. This is the sign under which the boundary operator transforms
/// covariantly under conformal changes with m > 0.
pub fn gromov_mean_curvature(space: &MeasureSpace) -> Result<BoundaryField> {
    require_flat(space, "mean curvature")?;
    Ok(space.base_form().mean_curvature.clone())
}

/// Δ_φ w = Δw − ∇w·∇φ.
pub fn weighted_laplacian(space: &MeasureSpace, w: &ScalarField) -> Result<ScalarField> {
    require_flat(space, "weighted Laplacian")?;
    space.check_field(w)?;
    let g = space.grid();
    let mut out = g.laplacian(&w.values);
    let gw = g.gradient(&w.values);
    let gp = g.gradient(&space.phi().values);
    for (i, o) in out.iter_mut().enumerate() {
        let dot: f64 = gw.iter().zip(&gp).map(|(a, b)| a[i] * b[i]).sum();
        *o -= dot;
    }
    Ok(ScalarField::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grid::Grid;
    use std::f64::consts::PI;

    fn torus(nt: usize) -> Grid {
        Grid::half_torus(&[16, 4, nt], &[1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn linear_weight_curvatures() {
        let a = 1.5;
        let s = MeasureSpace::flat_based(torus(9), 1.0, |x| a * x[2]).unwrap();
        let r = weighted_scalar_curvature(&s).unwrap();
        assert!(r.values.iter().all(|v| (v + 2.0 * a * a).abs() < 1e-10));
        let h = gromov_mean_curvature(&s).unwrap();
        assert!(h.face(0).iter().all(|v| (v - a).abs() < 1e-12));
        assert!(h.face(1).iter().all(|v| (v + a).abs() < 1e-12));
    }

    #[test]
    fn quadratic_weight_curvature() {
        let a = 0.7;
        let s = MeasureSpace::flat_based(torus(11), 1.0, |x| a * x[2] * x[2]).unwrap();
        let r = weighted_scalar_curvature(&s).unwrap();
        for (i, v) in r.values.iter().enumerate() {
            let t = s.grid().coord(i, 2);
            assert!((v - (4.0 * a - 8.0 * a * a * t * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_unweighted_is_zero() {
        let s = MeasureSpace::flat_based(torus(8), 2.0, |_| 0.0).unwrap();
        assert!(weighted_scalar_curvature(&s).unwrap().values.iter().all(|v| *v == 0.0));
        assert!(gromov_mean_curvature(&s).unwrap().faces.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn laplacian_examples() {
        let a = 0.8;
        let s = MeasureSpace::flat_based(torus(9), 1.0, |x| a * x[2]).unwrap();
        let w = ScalarField::from_fn(s.grid(), |x| x[2]);
        let l = weighted_laplacian(&s, &w).unwrap();
        assert!(l.values.iter().all(|v| (v + a).abs() < 1e-10));

        let s = MeasureSpace::flat_based(torus(8), 1.0, |_| 0.0).unwrap();
        let w = ScalarField::from_fn(s.grid(), |x| (2.0 * PI * x[0]).sin());
        let l = weighted_laplacian(&s, &w).unwrap();
        for (i, v) in l.values.iter().enumerate() {
            let exact = -4.0 * PI * PI * w.values[i];
            assert!((v - exact).abs() < 0.07 * 4.0 * PI * PI);
        }
    }

    #[test]
    fn refused_with_conformal_factor() {
        let s = MeasureSpace::from_fns(torus(8), 1.0, |_| 0.0, |x| 0.1 * x[0]).unwrap();
        assert!(weighted_scalar_curvature(&s).is_err());
        assert!(gromov_mean_curvature(&s).is_err());
    }
}
