use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size rule of the projected descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepRule {
    Fixed { step: f64 },
    /// Armijo backtracking: accept when f(new) ≤ f + armijo·⟨∇f, new − old⟩.
    Backtracking { armijo: f64, initial: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizerConfig {
    pub step: StepRule,
    pub max_iter: usize,
    /// Stopping tolerance for the preconditioned gradient norm.
    pub tol: f64,
    /// Boundary-normalize after every step.
    pub normalize: bool,
    /// Clamp negative values to 0 after every step.
    pub clamp: bool,
    pub seed: u64,
    /// Number of initial fields, the constant one included.
    pub restarts: usize,
    /// Energy of a normalized iterate below this is reported as Λ = −∞.
    pub energy_floor: f64,
    /// Quotient values below −bound are reported as Λ = −∞.
    pub divergence_bound: f64,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        MinimizerConfig {
            step: StepRule::Backtracking {
                armijo: 1e-4,
                initial: 1.0,
            },
            max_iter: 2000,
            tol: 1e-6,
            normalize: true,
            clamp: true,
            seed: 0,
            restarts: 5,
            energy_floor: -1e6,
            divergence_bound: 1e8,
        }
    }
}

impl MinimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::config("numerics.minimizer", msg));
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if !(self.divergence_bound > 0.0) {
            return bad("divergence_bound must be positive");
        }
        match self.step {
            StepRule::Fixed { step } if !(step > 0.0) => bad("fixed step must be positive"),
            StepRule::Backtracking { armijo, initial } if !(armijo > 0.0 && armijo < 1.0 && initial > 0.0) => {
                bad("armijo must lie in (0, 1) and the initial step must be positive")
            }
            _ => Ok(()),
        }
    }
}
