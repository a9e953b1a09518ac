//! Tunable constants.
//!
//! Every threshold that the asymptotic arguments leave as "sufficiently small" lives
//! here with a desk-scale default. A `ParamSet` is read from JSON with missing fields
//! filled from [`ParamSet::default`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("parameter `{0}` must be strictly positive (got {1})")]
    NotPositive(&'static str, f64),
    #[error("parameter `{0}` must be < 1 (got {1})")]
    NotBelowOne(&'static str, f64),
    #[error("tau ({tau}) must be >= nu ({nu})")]
    TauBelowNu { nu: f64, tau: f64 },
    #[error("integer parameter `{0}` must be positive")]
    ZeroCount(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamSet {
    /// Colour-class / conflict bound as a fraction of the side size.
    pub mu: f64,
    /// Switchable-edge density used by diagnostics.
    pub gamma: f64,
    /// Robust-neighbourhood threshold.
    pub nu: f64,
    /// Size window for robust expansion.
    pub tau: f64,
    /// Extremality slack; also the density constant of the colour-subset selection.
    pub epsilon: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub nu3: f64,
    pub nu4: f64,
    pub eta: f64,
    /// Universe-to-target ratio for colour-subset selection when used standalone.
    pub alpha: f64,
    pub restart_budget: u64,
    pub chain_steps: u64,
    pub retry_cap: u64,
    pub seed: u64,
    /// Largest side size for which the exhaustive conflict-free search may run.
    pub exact_threshold: usize,
    /// Largest side size for exhaustive subset enumeration in expander tests.
    pub expander_exact_threshold: usize,
    /// Trials for randomized expander testing.
    pub expander_trials: usize,
    /// Factor applied to epsilon at each classify retry.
    pub epsilon_ladder_factor: f64,
    /// Upper end of the epsilon ladder.
    pub epsilon_max: f64,
    /// Node budget for the exhaustive oracles.
    pub oracle_node_cap: u64,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            mu: 0.02,
            gamma: 0.01,
            nu: 0.25,
            tau: 0.25,
            epsilon: 0.25,
            nu1: 0.1,
            nu2: 0.1,
            nu3: 0.1,
            nu4: 0.2,
            eta: 0.25,
            alpha: 4.0,
            restart_budget: 200,
            chain_steps: 20_000,
            retry_cap: 1000,
            seed: 0,
            exact_threshold: 10,
            expander_exact_threshold: 14,
            expander_trials: 2000,
            epsilon_ladder_factor: 1.5,
            epsilon_max: 0.5,
            oracle_node_cap: 10_000_000,
        }
    }
}

impl ParamSet {
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("mu", self.mu),
            ("gamma", self.gamma),
            ("nu", self.nu),
            ("tau", self.tau),
            ("epsilon", self.epsilon),
            ("nu1", self.nu1),
            ("nu2", self.nu2),
            ("nu3", self.nu3),
            ("nu4", self.nu4),
            ("eta", self.eta),
            ("alpha", self.alpha),
            ("epsilon_ladder_factor", self.epsilon_ladder_factor),
            ("epsilon_max", self.epsilon_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(ParamError::NotPositive(name, v));
            }
        }
        for (name, v) in [
            ("mu", self.mu),
            ("gamma", self.gamma),
            ("nu", self.nu),
            ("tau", self.tau),
            ("epsilon", self.epsilon),
            ("eta", self.eta),
        ] {
            if v >= 1.0 {
                return Err(ParamError::NotBelowOne(name, v));
            }
        }
        if self.tau < self.nu {
            return Err(ParamError::TauBelowNu { nu: self.nu, tau: self.tau });
        }
        for (name, v) in [
            ("restart_budget", self.restart_budget),
            ("chain_steps", self.chain_steps),
            ("retry_cap", self.retry_cap),
            ("oracle_node_cap", self.oracle_node_cap),
        ] {
            if v == 0 {
                return Err(ParamError::ZeroCount(name));
            }
        }
        Ok(())
    }

    /// Sampling probability used by the colour-subset selection.
    pub fn delta(&self) -> f64 {
        3.0 / self.alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        assert_eq!(ParamSet::default().validate(), Ok(()));
    }

    #[test]
    fn rejects_bad_values() {
        let p = ParamSet { eta: 1.0, ..ParamSet::default() };
        assert_eq!(p.validate(), Err(ParamError::NotBelowOne("eta", 1.0)));
        let p = ParamSet { nu: 0.3, tau: 0.2, ..ParamSet::default() };
        assert!(matches!(p.validate(), Err(ParamError::TauBelowNu { .. })));
        let p = ParamSet { mu: 0.0, ..ParamSet::default() };
        assert!(matches!(p.validate(), Err(ParamError::NotPositive("mu", _))));
    }

    #[test]
    fn partial_json_fills_defaults() {
        let p: ParamSet = serde_json::from_str(r#"{"mu": 0.05, "seed": 9}"#).unwrap();
        assert_eq!(p.mu, 0.05);
        assert_eq!(p.seed, 9);
        assert_eq!(p.eta, ParamSet::default().eta);
        assert_eq!(p.delta(), 0.75);
    }
}
