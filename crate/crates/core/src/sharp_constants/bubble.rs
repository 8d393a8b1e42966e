use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::Exponents;

/// Which parametrization of the extremal family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// (2ε/((ε+t)² + |x−x₀|²))^{(m+n−2)/2}
    Epsilon,
    /// τ^{−(n−1)(m+n−2)/(4(m+n−1))} [(1+√(c/τ) t)² + c|x−x₀|²/τ]^{−(m+n−2)/2}
    Tau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub m: f64,
    pub n: usize,
    pub family: Family,
    /// ε or τ depending on the family.
    pub scale: f64,
    /// Center in the boundary hyperplane, n−1 coordinates.
    pub center: Vec<f64>,
}

impl BubbleParams {
    pub fn epsilon(m: f64, n: usize, eps: f64) -> Self {
        BubbleParams {
            m,
            n,
            family: Family::Epsilon,
            scale: eps,
            center: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn tau(m: f64, n: usize, tau: f64) -> Self {
        BubbleParams {
            m,
            n,
            family: Family::Tau,
            scale: tau,
            center: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Self {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Precondition(format!("n must be at least 3, got {}", self.n)));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::Precondition(format!("m must be ≥ 0, got {}", self.m)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Precondition(format!("bubble scale must be positive, got {}", self.scale)));
        }
        if self.center.len() != self.n - 1 {
            return Err(Error::Shape {
                expected: self.n - 1,
                found: self.center.len(),
            });
        }
        if self.family == Family::Tau && self.m == 0.0 {
            return Err(Error::Precondition("the τ-family is defined only for m > 0".into()));
        }
        Ok(())
    }
}

/// A validated member of an extremal family, evaluable anywhere on ℝ^n_+.
#[derive(Debug, Clone)]
pub struct Bubble {
    params: BubbleParams,
    ex: Exponents,
}

/// Builds the bubble for `params`.
pub fn bubble(params: BubbleParams) -> Result<Bubble> {
    params.validate()?;
    let ex = Exponents::new(params.m, params.n);
    Ok(Bubble { params, ex })
}

impl Bubble {
    pub fn params(&self) -> &BubbleParams {
        &self.params
    }

    /// Value as a function of the distance r = |x − x₀| and t.
    pub fn profile(&self, r: f64, t: f64) -> f64 {
        let half_k = 0.5 * self.ex.k();
        match self.params.family {
            Family::Epsilon => {
                let e = self.params.scale;
                (2.0 * e / ((e + t).powi(2) + r * r)).powf(half_k)
            }
            Family::Tau => {
                let tau = self.params.scale;
                let c = self.ex.bubble_c();
                let s = 1.0 + (c / tau).sqrt() * t;
                tau.powf(-self.ex.bubble_alpha()) * (s * s + c * r * r / tau).powf(-half_k)
            }
        }
    }

    /// (∂w/∂r, ∂w/∂t) of [`Bubble::profile`].
    pub fn profile_gradient(&self, r: f64, t: f64) -> (f64, f64) {
        let half_k = 0.5 * self.ex.k();
        let w = self.profile(r, t);
        match self.params.family {
            Family::Epsilon => {
                let e = self.params.scale;
                let d = (e + t).powi(2) + r * r;
                (-half_k * w * 2.0 * r / d, -half_k * w * 2.0 * (e + t) / d)
            }
            Family::Tau => {
                let tau = self.params.scale;
                let c = self.ex.bubble_c();
                let g = (c / tau).sqrt();
                let s = 1.0 + g * t;
                let d = s * s + c * r * r / tau;
                (-half_k * w * 2.0 * c * r / tau / d, -half_k * w * 2.0 * s * g / d)
            }
        }
    }

    /// Value at a point (x₁, …, x_{n−1}, t).
    pub fn eval(&self, point: &[f64]) -> f64 {
        let n = self.params.n;
        let r2: f64 = point[..n - 1]
            .iter()
            .zip(&self.params.center)
            .map(|(x, c)| (x - c) * (x - c))
            .sum();
        self.profile(r2.sqrt(), point[n - 1])
    }

    /// Supremum over the half-space, attained at (x₀, 0).
    pub fn sup(&self) -> f64 {
        self.profile(0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_family_supremum_and_concentration() {
        let b = bubble(BubbleParams::tau(1.0, 3, 1.0)).unwrap();
        assert!((b.sup() - 1.0).abs() < 1e-15);
        for &(r, t) in &[(0.1, 0.0), (0.0, 0.1), (1.0, 2.0)] {
            assert!(b.profile(r, t) < 1.0);
        }
        let mut prev = f64::INFINITY;
        for tau in [1e-2, 1e-4, 1e-6, 1e-8] {
            let v = bubble(BubbleParams::tau(1.0, 3, tau)).unwrap().eval(&[0.3, 0.0, 0.1]);
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-4);
    }

    #[test]
    fn coefficient_and_validation() {
        assert!((Exponents::new(1.0, 3).bubble_c() - 0.75).abs() < 1e-15);
        assert!(bubble(BubbleParams::tau(0.0, 3, 1.0)).is_err());
        assert!(bubble(BubbleParams::epsilon(0.0, 3, 1.0)).is_ok());
        assert!(bubble(BubbleParams::epsilon(1.0, 3, 1.0).with_center(vec![0.0])).is_err());
    }

    #[test]
    fn centered_evaluation() {
        let b = bubble(BubbleParams::epsilon(1.0, 3, 0.5).with_center(vec![1.0, -2.0])).unwrap();
        assert_eq!(b.eval(&[1.0, -2.0, 0.3]), b.profile(0.0, 0.3));
        assert!((b.eval(&[1.0, -2.0, 0.0]) - (4.0f64).powf(1.0)).abs() < 1e-14);
    }
}
