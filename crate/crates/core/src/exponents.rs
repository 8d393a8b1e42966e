//! Exponents and coefficients that depend only on `(m, n)`.

/// Dimensional data `(m, n)` and the derived exponents of the quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub m: f64,
    pub n: usize,
}

impl Exponents {
    pub fn new(m: f64, n: usize) -> Self {
        Exponents { m, n }
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// m + n − 2
    pub fn k(&self) -> f64 {
        self.m + self.nf() - 2.0
    }

    /// Critical trace exponent 2(m+n−1)/(m+n−2).
    pub fn p(&self) -> f64 {
        2.0 * (self.m + self.nf() - 1.0) / self.k()
    }

    /// Exponent on the interior norm, m/(m+n−1).
    pub fn a(&self) -> f64 {
        self.m / (self.m + self.nf() - 1.0)
    }

    /// Exponent on the boundary norm, (2m+n−2)/(m+n−1).
    pub fn b(&self) -> f64 {
        (2.0 * self.m + self.nf() - 2.0) / (self.m + self.nf() - 1.0)
    }

    /// Coefficient of R in the conformal Laplacian.
    pub fn c_r(&self) -> f64 {
        self.k() / (4.0 * (self.m + self.nf() - 1.0))
    }

    /// Coefficient of H in the boundary operator.
    pub fn c_h(&self) -> f64 {
        self.k() / (2.0 * (self.m + self.nf() - 1.0))
    }

    /// c(m, n) = (m+n−1)/(m(m+n−2)²) of the τ-bubble family.
    pub fn bubble_c(&self) -> f64 {
        (self.m + self.nf() - 1.0) / (self.m * self.k() * self.k())
    }

    /// Power τ^{-α} in front of the τ-bubble, α = (n−1)(m+n−2)/(4(m+n−1)).
    pub fn bubble_alpha(&self) -> f64 {
        (self.nf() - 1.0) * self.k() / (4.0 * (self.m + self.nf() - 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_for_m1_n3() {
        let e = Exponents::new(1.0, 3);
        assert_eq!(e.p(), 3.0);
        assert!((e.a() - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.b() - 1.0).abs() < 1e-15);
        assert!((e.c_r() - 1.0 / 6.0).abs() < 1e-15);
        assert!((e.c_h() - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.bubble_c() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn quotient_is_scale_invariant() {
        // 2·a + 2 − p·b = 0 for every (m, n)
        for &(m, n) in &[(0.0, 3), (0.5, 3), (1.0, 4), (2.5, 5)] {
            let e = Exponents::new(m, n);
            assert!((2.0 + e.p() * e.a() - e.p() * e.b()).abs() < 1e-14);
        }
    }
}
