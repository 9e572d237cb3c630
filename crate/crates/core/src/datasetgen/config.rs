use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillPolicy {
    /// Every anchor of the background receives an object.
    AllAnchors,
    /// A uniformly sized, uniformly chosen non-empty subset of anchors.
    RandomSubset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassBalance {
    /// Class first, then a crop within the class.
    UniformByClass,
    /// Uniform over all crops, so classes with more crops appear more often.
    UniformByCrop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    #[serde(default = "default_rounds")]
    pub rounds: u32,
    #[serde(default = "default_jitter")]
    pub scale_jitter: [f64; 2],
    pub seed: u64,
    #[serde(default = "default_fill")]
    pub fill_policy: FillPolicy,
    #[serde(default = "default_balance")]
    pub class_balance: ClassBalance,
    /// Drop labels whose object is hidden by later pastes beyond this fraction.
    #[serde(default)]
    pub max_occlusion: Option<f64>,
}

fn default_rounds() -> u32 {
    1
}

fn default_jitter() -> [f64; 2] {
    [1.0, 1.0]
}

fn default_fill() -> FillPolicy {
    FillPolicy::AllAnchors
}

fn default_balance() -> ClassBalance {
    ClassBalance::UniformByClass
}

impl GenConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            rounds: default_rounds(),
            scale_jitter: default_jitter(),
            seed,
            fill_policy: default_fill(),
            class_balance: default_balance(),
            max_occlusion: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be ≥ 1".into()));
        }
        let [lo, hi] = self.scale_jitter;
        if !(lo > 0.0 && lo <= hi && hi <= 2.0) {
            return Err(Error::Config(format!("scale_jitter must satisfy 0 < lo ≤ hi ≤ 2, got [{lo}, {hi}]")));
        }
        if let Some(m) = self.max_occlusion {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::Config(format!("max_occlusion must be in [0, 1], got {m}")));
            }
        }
        Ok(())
    }
}
