//! Experiment configuration: scenario, network width, optimizer,
//! quantization and sweep axes in one JSON document.

use serde::{Deserialize, Serialize};

use crate::channel::ScenarioConfig;
use crate::error::{Error, Result};
use crate::programming::OptimizerOptions;
use crate::quantization::QuantizationSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizationPlan {
    /// Bit widths evaluated as separate architectures, in output order.
    pub bits: Vec<u32>,
    pub sweeps: usize,
}

impl QuantizationPlan {
    pub fn specs(&self) -> Result<Vec<QuantizationSpec>> {
        self.bits
            .iter()
            .map(|&b| QuantizationSpec::new(b, self.sweeps))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthSweepPlan {
    pub depths: Vec<usize>,
    pub p_t_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSweepPlan {
    pub depth: usize,
    pub p_t_dbm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    /// RF chains `r` of the proposed network and of the Butler selector.
    pub n_chains: usize,
    pub optimizer: OptimizerOptions,
    pub quantization: QuantizationPlan,
    pub depth_sweep: DepthSweepPlan,
    pub power_sweep: PowerSweepPlan,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl ExperimentConfig {
    /// N=64, r=S=4, 100 trials.
    pub fn desk() -> Self {
        Self {
            scenario: ScenarioConfig::with_array(64, 4, 100, 0),
            n_chains: 4,
            optimizer: OptimizerOptions::default(),
            quantization: QuantizationPlan {
                bits: vec![2, 4, 6],
                sweeps: 12,
            },
            depth_sweep: DepthSweepPlan {
                depths: vec![4, 8, 12, 16],
                p_t_dbm: 0.0,
            },
            power_sweep: PowerSweepPlan {
                depth: 8,
                p_t_dbm: (0..6).map(|i| -20.0 + 10.0 * i as f64).collect(),
            },
        }
    }

    /// N=512, r=S=16, 500 trials.
    pub fn paper_scale() -> Self {
        Self {
            scenario: ScenarioConfig::with_array(512, 16, 500, 0),
            n_chains: 16,
            optimizer: OptimizerOptions::default(),
            quantization: QuantizationPlan {
                bits: vec![2, 4, 6],
                sweeps: 12,
            },
            depth_sweep: DepthSweepPlan {
                depths: vec![16, 32, 48, 64],
                p_t_dbm: 0.0,
            },
            power_sweep: PowerSweepPlan {
                depth: 32,
                p_t_dbm: (0..15).map(|i| -20.0 + 5.0 * i as f64).collect(),
            },
        }
    }

    /// Sets both the channel seed and the optimizer seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.scenario.rng_seed = seed;
        self.optimizer.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.optimizer.validate()?;
        self.quantization.specs()?;
        let n = self.scenario.n_antennas;
        let s = self.scenario.n_users;
        if !(s <= self.n_chains && self.n_chains <= n) {
            return Err(Error::InvalidOrdering { n, r: self.n_chains, s });
        }
        if self.n_chains != s {
            return Err(Error::InvalidConfig(format!(
                "the FC2 baseline needs n_chains == n_users (got r={}, S={s})",
                self.n_chains
            )));
        }
        if self.depth_sweep.depths.is_empty() || self.power_sweep.p_t_dbm.is_empty() {
            return Err(Error::InvalidConfig("sweep axes must be nonempty".into()));
        }
        let powers = self
            .power_sweep
            .p_t_dbm
            .iter()
            .chain(std::iter::once(&self.depth_sweep.p_t_dbm));
        if powers.into_iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig("powers must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_validate() {
        ExperimentConfig::desk().validate().unwrap();
        ExperimentConfig::paper_scale().validate().unwrap();
        assert_eq!(
            ExperimentConfig::desk().power_sweep.p_t_dbm,
            vec![-20.0, -10.0, 0.0, 10.0, 20.0, 30.0]
        );
        let full = ExperimentConfig::paper_scale();
        assert_eq!(full.power_sweep.p_t_dbm.len(), 15);
        assert_eq!(*full.power_sweep.p_t_dbm.last().unwrap(), 50.0);
    }

    #[test]
    fn json_round_trip() {
        for cfg in [ExperimentConfig::desk().with_seed(7), ExperimentConfig::paper_scale()] {
            let text = cfg.to_json();
            let back = ExperimentConfig::from_json(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn optimizer_fields_default() {
        let mut v: serde_json::Value = serde_json::from_str(&ExperimentConfig::desk().to_json()).unwrap();
        v["optimizer"] = serde_json::json!({ "iterations": 10 });
        let cfg = ExperimentConfig::from_json(&v.to_string()).unwrap();
        assert_eq!(cfg.optimizer.iterations, 10);
        assert_eq!(cfg.optimizer.learning_rate, 0.02);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = ExperimentConfig::desk();
        cfg.n_chains = 2;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::desk();
        cfg.quantization.bits = vec![0];
        assert!(cfg.validate().is_err());
        assert!(ExperimentConfig::from_json("{\"scenario\": 3}").is_err());
    }
}
