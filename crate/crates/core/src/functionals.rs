//! The weighted Escobar quotient, the W-functional, the τ-energy and the
//! one-variable bridge between ν and Λ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::Exponents;
use crate::geometry::energy::Form;
use crate::geometry::{direct_form, MeasureSpace, ScalarField};

/// Energy and norm integrals of a field together with its quotient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientBreakdown {
    pub dirichlet: f64,
    pub curv_interior: f64,
    pub curv_boundary: f64,
    /// ∫ |w|^p v^{m-1} dV
    pub interior_norm: f64,
    /// ∫_∂ |w|^p v^m dσ
    pub boundary_norm: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub m: f64,
    pub n: usize,
}

impl QuotientBreakdown {
    /// Numerator energy E, the sum of the three energy terms.
    pub fn energy(&self) -> f64 {
        self.dirichlet + self.curv_interior + self.curv_boundary
    }
}

pub(crate) fn breakdown(form: &Form, ex: Exponents, w: &[f64]) -> Result<QuotientBreakdown> {
    let e = form.energy(w);
    let (int, bd) = form.norms(ex.p(), w);
    if !(bd > 0.0) {
        return Err(Error::UndefinedQuotient("boundary norm vanishes".into()));
    }
    if ex.m > 0.0 && !(int > 0.0) {
        return Err(Error::UndefinedQuotient("interior norm vanishes".into()));
    }
    let inorm_factor = if ex.m == 0.0 { 1.0 } else { int.powf(ex.a()) };
    let q = e.total() * inorm_factor / bd.powf(ex.b());
    Ok(QuotientBreakdown {
        dirichlet: e.dirichlet,
        curv_interior: e.curv_interior,
        curv_boundary: e.curv_boundary,
        interior_norm: int,
        boundary_norm: bd,
        q,
        m: ex.m,
        n: ex.n,
    })
}

/// Q(w) = E · I^{m/(m+n−1)} / Bd^{(2m+n−2)/(m+n−1)}; the I factor is 1 when
/// m = 0. Sign changes of `w` do not matter: Q(|w|) = Q(w).
pub fn escobar_quotient(space: &MeasureSpace, w: &ScalarField) -> Result<QuotientBreakdown> {
    space.check_field(w)?;
    breakdown(space.base_form(), space.exponents(), &space.to_base(&w.values))
}

/// Quotient evaluated with the energy form assembled directly on the
/// conformally changed metric instead of through the base space.
pub fn direct_quotient(space: &MeasureSpace, w: &ScalarField) -> Result<QuotientBreakdown> {
    space.check_field(w)?;
    breakdown(&direct_form(space), space.exponents(), &w.values)
}

fn w_from_parts(ex: Exponents, b: &QuotientBreakdown, tau: f64) -> f64 {
    tau.powf(0.5 * ex.a()) * b.energy() + b.interior_norm / tau.sqrt() - b.boundary_norm
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Precondition(format!("τ must be positive and finite, got {tau}")));
    }
    Ok(())
}

/// W(w, τ) = τ^{m/(2(m+n−1))} E + τ^{−1/2} I − Bd.
pub fn w_functional(space: &MeasureSpace, w: &ScalarField, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    space.check_field(w)?;
    let base = space.to_base(&w.values);
    let form = space.base_form();
    let ex = space.exponents();
    let e = form.energy(&base);
    let (int, bd) = form.norms(ex.p(), &base);
    Ok(tau.powf(0.5 * ex.a()) * e.total() + int / tau.sqrt() - bd)
}

/// W evaluated with the directly assembled form of the changed space.
pub fn direct_w_functional(space: &MeasureSpace, w: &ScalarField, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    space.check_field(w)?;
    let ex = space.exponents();
    let form = direct_form(space);
    let e = form.energy(&w.values);
    let (int, bd) = form.norms(ex.p(), &w.values);
    Ok(tau.powf(0.5 * ex.a()) * e.total() + int / tau.sqrt() - bd)
}

/// Minimizer and minimum of h(τ) = B τ^p + C τ^{−q} over τ > 0:
/// τ₀ = (qC/(pB))^{1/(p+q)}, h(τ₀) = B^{q/(p+q)} C^{p/(p+q)} (q/p)^{p/(p+q)} (p+q)/q.
pub fn h_min(p: f64, q: f64, b: f64, c: f64) -> Result<(f64, f64)> {
    for (name, v) in [("p", p), ("q", q), ("B", b), ("C", c)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Precondition(format!("h_min requires {name} > 0, got {v}")));
        }
    }
    let s = p + q;
    let tau0 = (q * c / (p * b)).powf(1.0 / s);
    let min = b.powf(q / s) * c.powf(p / s) * (q / p).powf(p / s) * s / q;
    Ok((tau0, min))
}

/// A value in [−∞, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Extended {
    NegInfinity,
    Finite(f64),
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::NegInfinity => None,
        }
    }
}

/// Λ recovered from ν. A negative constant is not determined by ν = −∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LambdaFromNu {
    /// Λ ∈ [−∞, 0)
    Negative,
    Exact(f64),
}

fn check_bridge_m(m: f64) -> Result<()> {
    if m == 0.0 {
        return Err(Error::Precondition(
            "the ν–Λ bridge is not available for m = 0".into(),
        ));
    }
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Precondition(format!("m must be positive, got {m}")));
    }
    Ok(())
}

/// ν = ((2m+n−1)/m) [mΛ/(m+n−1)]^{(m+n−1)/(2m+n−1)} − 1 for Λ > 0,
/// ν = −1 for Λ = 0 and ν = −∞ for Λ < 0.
pub fn nu_lambda_bridge(lambda: Extended, m: f64, n: usize) -> Result<Extended> {
    check_bridge_m(m)?;
    let nf = n as f64;
    match lambda {
        Extended::NegInfinity => Ok(Extended::NegInfinity),
        Extended::Finite(l) if l < 0.0 => Ok(Extended::NegInfinity),
        Extended::Finite(l) if l == 0.0 => Ok(Extended::Finite(-1.0)),
        Extended::Finite(l) => {
            let expo = (m + nf - 1.0) / (2.0 * m + nf - 1.0);
            Ok(Extended::Finite(
                (2.0 * m + nf - 1.0) / m * (m * l / (m + nf - 1.0)).powf(expo) - 1.0,
            ))
        }
    }
}

/// Inverse of [`nu_lambda_bridge`].
pub fn lambda_from_nu(nu: Extended, m: f64, n: usize) -> Result<LambdaFromNu> {
    check_bridge_m(m)?;
    let nf = n as f64;
    match nu {
        Extended::NegInfinity => Ok(LambdaFromNu::Negative),
        Extended::Finite(v) if v == -1.0 => Ok(LambdaFromNu::Exact(0.0)),
        Extended::Finite(v) if v < -1.0 || !v.is_finite() => Err(Error::Precondition(format!(
            "ν must be −∞ or at least −1, got {v}"
        ))),
        Extended::Finite(v) => {
            let expo = (2.0 * m + nf - 1.0) / (m + nf - 1.0);
            Ok(LambdaFromNu::Exact(
                (m + nf - 1.0) / m * ((v + 1.0) * m / (2.0 * m + nf - 1.0)).powf(expo),
            ))
        }
    }
}

/// τ at which a normalized minimizer of Q with energy E and interior norm
/// I realizes ν: the minimizer of τ^{m/(2(m+n−1))} E + τ^{−1/2} I,
/// τ = ((m+n−1) I/(m E))^{2(m+n−1)/(2m+n−1)}.
pub fn tau_of_minimizer(m: f64, n: usize, energy: f64, interior_norm: f64) -> Result<f64> {
    check_bridge_m(m)?;
    if !(energy > 0.0 && interior_norm > 0.0) {
        return Err(Error::Precondition(
            "τ of a minimizer needs E > 0 and I > 0".into(),
        ));
    }
    let nf = n as f64;
    let k = m + nf - 1.0;
    Ok((k * interior_norm / (m * energy)).powf(2.0 * k / (2.0 * m + nf - 1.0)))
}

/// w / Bd(w)^{(m+n−2)/(2(m+n−1))}, so that the boundary norm becomes 1.
pub fn boundary_normalize(space: &MeasureSpace, w: &ScalarField) -> Result<ScalarField> {
    space.check_field(w)?;
    let ex = space.exponents();
    let (_, bd) = space.base_form().norms(ex.p(), &space.to_base(&w.values));
    if !(bd > 0.0) {
        return Err(Error::UndefinedQuotient("field has zero boundary trace".into()));
    }
    Ok(w.scaled(bd.powf(-1.0 / ex.p())))
}

/// One evaluation of the τ-energy.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyPoint {
    pub tau: f64,
    /// W at the best normalized field found.
    pub w_value: f64,
    /// Certified upper bound for ν(τ); equal to `w_value`.
    pub nu: f64,
    pub converged: bool,
    pub iterations: usize,
    #[serde(skip)]
    pub field: ScalarField,
}

/// Upper bound for ν(τ) = inf W(·, τ) over boundary-normalized fields,
/// obtained by projected descent. Any feasible value bounds the infimum,
/// so the result is reported even when the budget runs out.
pub fn tau_energy(
    space: &MeasureSpace,
    tau: f64,
    opts: &crate::minimizer::MinimizerConfig,
) -> Result<EnergyPoint> {
    check_tau(tau)?;
    let r = crate::minimizer::minimize_w(space, tau, opts)?;
    Ok(EnergyPoint {
        tau,
        w_value: r.value,
        nu: r.value,
        converged: r.converged,
        iterations: r.iterations,
        field: r.field,
    })
}

/// Evaluates the breakdown on a field already mapped to the base space
/// with a given dimensional parameter; used for continuity checks in m.
pub fn quotient_with_m(space: &MeasureSpace, m: f64, w: &ScalarField) -> Result<QuotientBreakdown> {
    let changed = crate::geometry::build_space(space.grid().clone(), m, space.phi().clone(), Some(space.sigma().clone()))?;
    escobar_quotient(&changed, w)
}

#[allow(dead_code)]
pub(crate) fn w_of_breakdown(ex: Exponents, b: &QuotientBreakdown, tau: f64) -> f64 {
    w_from_parts(ex, b, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;
    use crate::quad::golden_section;

    fn torus() -> Grid {
        Grid::half_torus(&[6, 6, 9], &[1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_on_flat_space_has_zero_quotient() {
        for m in [0.0, 0.5, 1.0, 3.0] {
            let s = MeasureSpace::flat_based(torus(), m, |_| 0.0).unwrap();
            let q = escobar_quotient(&s, &ScalarField::constant(s.grid(), 2.0)).unwrap();
            assert_eq!(q.q, 0.0);
        }
    }

    #[test]
    fn negative_weighted_curvature_gives_negative_quotient() {
        let s = MeasureSpace::flat_based(torus(), 0.5, |x| 2.0 * x[2]).unwrap();
        let q = escobar_quotient(&s, &ScalarField::constant(s.grid(), 1.0)).unwrap();
        assert!(q.q < 0.0);
    }

    #[test]
    fn zero_boundary_trace_is_undefined() {
        let s = MeasureSpace::flat_based(torus(), 1.0, |_| 0.0).unwrap();
        let w = ScalarField::from_fn(s.grid(), |x| x[2] * (1.0 - x[2]));
        assert!(matches!(escobar_quotient(&s, &w), Err(Error::UndefinedQuotient(_))));
        assert!(boundary_normalize(&s, &w).is_err());
    }

    #[test]
    fn normalization_of_constant() {
        let s = MeasureSpace::flat_based(torus(), 1.0, |_| 0.0).unwrap();
        let w = boundary_normalize(&s, &ScalarField::constant(s.grid(), 5.0)).unwrap();
        let expected = 2f64.powf(-1.0 / s.exponents().p());
        assert!(w.values.iter().all(|v| (v - expected).abs() < 1e-14));
        let again = boundary_normalize(&s, &w).unwrap();
        for (a, b) in again.values.iter().zip(&w.values) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn w_of_normalized_constant() {
        let s = MeasureSpace::flat_based(torus(), 1.0, |_| 0.0).unwrap();
        let w = boundary_normalize(&s, &ScalarField::constant(s.grid(), 1.0)).unwrap();
        let b = escobar_quotient(&s, &w).unwrap();
        let tau = 0.3;
        let val = w_functional(&s, &w, tau).unwrap();
        assert!((val - (b.interior_norm / tau.sqrt() - 1.0)).abs() < 1e-13);
        assert!(w_functional(&s, &w, 0.0).is_err());
    }

    #[test]
    fn h_min_examples() {
        let (t0, v) = h_min(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((t0 - 1.0).abs() < 1e-15 && (v - 2.0).abs() < 1e-15);
        let (t0, v) = h_min(1.0, 2.0, 1.0, 1.0).unwrap();
        assert!((t0 - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
        let h = |t: f64| t + t.powi(-2);
        let tg = golden_section(h, 0.1, 10.0, 1e-14);
        assert!(((v - h(tg)) / v).abs() < 1e-10);
        assert!(h(t0) <= h(1.01 * t0) && h(t0) <= h(0.99 * t0));
        assert!(h_min(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn bridge_branches() {
        assert_eq!(nu_lambda_bridge(Extended::Finite(0.0), 1.0, 3).unwrap(), Extended::Finite(-1.0));
        assert_eq!(nu_lambda_bridge(Extended::Finite(-1.0), 1.0, 3).unwrap(), Extended::NegInfinity);
        assert_eq!(lambda_from_nu(Extended::NegInfinity, 1.0, 3).unwrap(), LambdaFromNu::Negative);
        assert!(nu_lambda_bridge(Extended::Finite(1.0), 0.0, 3).is_err());
        let nu = nu_lambda_bridge(Extended::Finite(2.5), 1.0, 3).unwrap();
        match lambda_from_nu(nu, 1.0, 3).unwrap() {
            LambdaFromNu::Exact(l) => assert!((l - 2.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bridge_matches_h_min() {
        // inf over x = √τ of x^{a} E + x^{-1} I with E·I^a = Λ, I fixed
        let (m, n) = (1.0, 3usize);
        let ex = Exponents::new(m, n);
        let (e, i) = (1.7f64, 0.6f64);
        let lambda = e * i.powf(ex.a());
        let (x0, min) = h_min(ex.a(), 1.0, e, i).unwrap();
        let nu = nu_lambda_bridge(Extended::Finite(lambda), m, n).unwrap().finite().unwrap();
        assert!((min - (nu + 1.0)).abs() < 1e-12);
        let tau = tau_of_minimizer(m, n, e, i).unwrap();
        assert!((tau - x0 * x0).abs() < 1e-12 * tau);
    }
}
