use crate::error::{Error, Result};
use crate::special::{gamma, ln_gamma, ln_sphere_volume};

fn check_mn(m: f64, n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Precondition(format!("n must be at least 3, got {n}")));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(Error::Precondition(format!("m must be finite and ≥ 0, got {m}")));
    }
    Ok(())
}

/// Sharp constant of the weighted trace inequality on the half-space,
///
/// Λ_{m,n} = (m+n−2)² (Vol(S^{2m+n−1})^{1/(2m+n−1)} / (2(2m+n−2)))^{(2m+n−1)/(m+n−1)}
///           · (Γ(2m+n−1) / (π^m Γ(m+n−1)))^{1/(m+n−1)}.
///
/// At m = 0 this is (n−2)/2 · Vol(S^{n−1})^{1/(n−1)}.
pub fn lambda_mn(m: f64, n: usize) -> Result<f64> {
    check_mn(m, n)?;
    let nf = n as f64;
    let d = 2.0 * m + nf - 1.0;
    let k = m + nf - 1.0;
    let ln_first = ln_sphere_volume(d) / d - (2.0 * (2.0 * m + nf - 2.0)).ln();
    let ln_second = ln_gamma(d) - m * std::f64::consts::PI.ln() - ln_gamma(k);
    Ok((m + nf - 2.0).powi(2) * (d / k * ln_first + ln_second / k).exp())
}

/// ∫_{ℝ^{2m}} |y|^{2l} (a + |y|²/τ)^{−(2m+k)} dy
///   = π^m Γ(m+l) Γ(m+k−l) τ^{m+l} / (Γ(m) Γ(2m+k) a^{m+k−l}).
pub fn case_integral(k: f64, l: f64, m: f64, a: f64, tau: f64) -> Result<f64> {
    if !(k >= 0.0 && l >= 0.0) {
        return Err(Error::Precondition("k and l must be nonnegative".into()));
    }
    if !(k > l) {
        return Err(Error::Precondition(format!("the integral diverges unless k > l (k = {k}, l = {l})")));
    }
    let two_m = 2.0 * m;
    if !(two_m >= 1.0 && (two_m - two_m.round()).abs() < 1e-12) {
        return Err(Error::Precondition(format!("2m must be a positive integer, got m = {m}")));
    }
    if !(a > 0.0 && tau > 0.0) {
        return Err(Error::Precondition("a and τ must be positive".into()));
    }
    let ln = m * std::f64::consts::PI.ln() + ln_gamma(m + l) + ln_gamma(m + k - l) + (m + l) * tau.ln()
        - ln_gamma(m)
        - ln_gamma(two_m + k)
        - (m + k - l) * a.ln();
    Ok(ln.exp())
}

/// Closed form of the boundary integral of the τ-family,
/// V = π^{(n−1)/2} c^{−(n−1)/2} Γ(m+(n−1)/2) / Γ(m+n−1).
pub fn bubble_boundary_volume_exact(m: f64, n: usize) -> Result<f64> {
    check_mn(m, n)?;
    if m == 0.0 {
        return Err(Error::Precondition("the τ-family needs m > 0".into()));
    }
    let nf = n as f64;
    let c = (m + nf - 1.0) / (m * (m + nf - 2.0).powi(2));
    let h = 0.5 * (nf - 1.0);
    Ok((std::f64::consts::PI / c).powf(h) * gamma(m + h) / gamma(m + nf - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_to_infinity;
    use crate::special::sphere_volume;
    use std::f64::consts::PI;

    #[test]
    fn known_constants() {
        assert!((lambda_mn(0.0, 3).unwrap() - PI.sqrt()).abs() < 1e-12);
        let l13 = 8.0 * PI.powf(1.0 / 3.0) / 6f64.powf(4.0 / 3.0);
        assert!((lambda_mn(1.0, 3).unwrap() - l13).abs() < 1e-12);
        for n in [3usize, 4, 5, 7] {
            let escobar = 0.5 * (n as f64 - 2.0) * sphere_volume(n as f64 - 1.0).powf(1.0 / (n as f64 - 1.0));
            assert!((lambda_mn(0.0, n).unwrap() - escobar).abs() < 1e-12 * escobar);
            let near = lambda_mn(1e-9, n).unwrap();
            assert!((near / escobar - 1.0).abs() < 1e-6);
        }
        assert!(lambda_mn(1.0, 2).is_err());
    }

    #[test]
    fn case_integral_examples() {
        assert!((case_integral(1.0, 0.0, 1.0, 1.0, 1.0).unwrap() - PI / 2.0).abs() < 1e-13);
        assert!((case_integral(2.0, 1.0, 1.0, 1.0, 1.0).unwrap() - PI / 6.0).abs() < 1e-13);
        let base = case_integral(2.5, 0.5, 1.5, 1.0, 1.0).unwrap();
        let scaled = case_integral(2.5, 0.5, 1.5, 2.0, 3.0).unwrap();
        assert!((scaled - base * 3f64.powf(2.0) / 2f64.powf(3.5)).abs() < 1e-13 * scaled);
        assert!(case_integral(1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(case_integral(2.0, 0.0, 0.7, 1.0, 1.0).is_err());
    }

    #[test]
    fn case_integral_polar_oracle() {
        let (m, k, l, a, tau) = (1.5, 1.3, 0.4, 0.8, 2.0);
        let s = sphere_volume(2.0 * m - 1.0);
        let (v, _) = integrate_to_infinity(
            |r| s * r.powf(2.0 * m - 1.0 + 2.0 * l) * (a + r * r / tau).powf(-(2.0 * m + k)),
            0.0,
            1e-13,
        );
        let exact = case_integral(k, l, m, a, tau).unwrap();
        assert!((v / exact - 1.0).abs() < 1e-9);
    }

    #[test]
    fn boundary_volume_closed_form() {
        // m = 1, n = 3: c = 3/4 and ∫(1+c r²)^{-3} 2πr dr = π/(2c)
        let v = bubble_boundary_volume_exact(1.0, 3).unwrap();
        assert!((v - PI / 1.5).abs() < 1e-13);
    }
}
