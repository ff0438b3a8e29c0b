use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::barrier::BarrierKind;
use crate::error::{invalid, Error, Result};

/// Which stochastic field drives the kernel update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vi,
    Gd,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vi" => Ok(Self::Vi),
            "gd" => Ok(Self::Gd),
            other => Err(Error::Format(format!("unknown method {other:?}, expected vi or gd"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Vi => "vi",
            Self::Gd => "gd",
        })
    }
}

/// Piecewise-constant learning rate: `(rate, last epoch)` pairs, epochs counted from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule {
    steps: Vec<(f64, usize)>,
}

impl LrSchedule {
    pub fn new(steps: Vec<(f64, usize)>) -> Result<Self> {
        if steps.is_empty() {
            return Err(invalid("learning rate schedule is empty"));
        }
        let mut prev = 0;
        for &(rate, until) in &steps {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(invalid(format!("learning rate must be positive, got {rate}")));
            }
            if until <= prev {
                return Err(invalid("learning rate epochs must be strictly increasing"));
            }
            prev = until;
        }
        Ok(Self { steps })
    }

    pub fn constant(rate: f64, epochs: usize) -> Result<Self> {
        Self::new(vec![(rate, epochs)])
    }

    /// `gamma_k`, or `None` past the last epoch.
    pub fn rate(&self, epoch: usize) -> Option<f64> {
        self.steps.iter().find(|(_, until)| epoch <= *until).map(|(r, _)| *r)
    }

    pub fn last_epoch(&self) -> usize {
        self.steps.last().map_or(0, |s| s.1)
    }

    pub fn steps(&self) -> &[(f64, usize)] {
        &self.steps
    }
}

impl FromStr for LrSchedule {
    type Err = Error;
    /// Parses `"0.4@100,0.2@300"`.
    fn from_str(s: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (rate, until) = part
                .split_once('@')
                .ok_or_else(|| Error::Format(format!("schedule entry {part:?} is not rate@epoch")))?;
            let rate = rate.trim().parse().map_err(|_| Error::Format(format!("bad learning rate {rate:?}")))?;
            let until = until.trim().parse().map_err(|_| Error::Format(format!("bad epoch {until:?}")))?;
            steps.push((rate, until));
        }
        Self::new(steps).map_err(|e| Error::Format(e.to_string()))
    }
}

impl fmt::Display for LrSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(|(r, u)| format!("{r}@{u}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parametrization of the learned kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelForm {
    TimeVarying,
    TimeInvariant,
}

/// Starting kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelInit {
    Zero,
    /// Every trainable entry equals `value`, except entries leaving a node in `zero_sources`.
    Constant {
        value: f64,
        zero_sources: Vec<usize>,
    },
}

/// How per-trajectory contributions inside a batch are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    /// Fixed chunking and ordered sums: bit-identical across thread counts.
    Deterministic,
    /// Work-stealing fold and reduce.
    Unordered,
}

/// How the per-epoch smoothness update is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothnessStep {
    /// `theta - gamma delta_s grad S(theta)`.
    Explicit,
    /// Proximal step with the same weight; stable for any step size.
    Implicit,
}

/// Solver hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub lr_schedule: LrSchedule,
    pub method: Method,
    pub intensity_floor: f64,
    pub barrier_weight: f64,
    pub barrier_kind: BarrierKind,
    pub smoothness_weight: f64,
    pub smoothness_step: SmoothnessStep,
    pub svd_threshold: Option<f64>,
    pub mu_mix: f64,
    pub rng_seed: u64,
    pub kernel_form: KernelForm,
    pub init: KernelInit,
    pub reduction: Reduction,
}

fn schedule(method: Method, switch: usize, end: usize) -> LrSchedule {
    let (a, b) = match method {
        Method::Vi => (0.4, 0.2),
        Method::Gd => (0.2, 0.1),
    };
    LrSchedule::new(vec![(a, switch), (b, end)]).expect("static schedule is valid")
}

impl TrainConfig {
    /// Single-node setting with `N = 32`, `N' = 8`.
    pub fn time_only_small(method: Method) -> Self {
        Self {
            batch_size: 400,
            max_epochs: 300,
            lr_schedule: schedule(method, 100, 300),
            method,
            intensity_floor: 0.01,
            barrier_weight: 0.1,
            barrier_kind: BarrierKind::Quadratic,
            smoothness_weight: 0.08,
            smoothness_step: SmoothnessStep::Explicit,
            svd_threshold: None,
            mu_mix: 0.1,
            rng_seed: 0,
            kernel_form: KernelForm::TimeVarying,
            init: KernelInit::Zero,
            reduction: Reduction::Deterministic,
        }
    }

    /// Single-node setting with `N = 320`, `N' = 80`.
    pub fn time_only_large(method: Method, svd_threshold: Option<f64>) -> Self {
        Self { smoothness_weight: 0.004, svd_threshold, ..Self::time_only_small(method) }
    }

    /// Time-invariant kernel setting.
    pub fn stationary(method: Method) -> Self {
        Self {
            max_epochs: 60,
            lr_schedule: schedule(method, 20, 60),
            smoothness_weight: 0.004,
            kernel_form: KernelForm::TimeInvariant,
            ..Self::time_only_small(method)
        }
    }

    /// Five-node network setting.
    pub fn network(method: Method, svd_threshold: Option<f64>) -> Self {
        Self {
            batch_size: 800,
            max_epochs: 150,
            lr_schedule: schedule(method, 50, 150),
            intensity_floor: 0.03,
            smoothness_weight: 0.004,
            svd_threshold,
            ..Self::time_only_small(method)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(invalid("batch size and epoch count must be positive"));
        }
        if self.lr_schedule.last_epoch() < self.max_epochs {
            return Err(invalid(format!(
                "learning rate schedule ends at epoch {} before max_epochs {}",
                self.lr_schedule.last_epoch(),
                self.max_epochs
            )));
        }
        if !(self.intensity_floor > 0.0 && self.intensity_floor.is_finite()) {
            return Err(invalid("intensity floor must be positive"));
        }
        if !(self.barrier_weight >= 0.0 && self.smoothness_weight >= 0.0) {
            return Err(invalid("penalty weights must be nonnegative"));
        }
        if let Some(tau) = self.svd_threshold {
            if !(tau > 0.0 && tau.is_finite()) {
                return Err(invalid("singular value threshold must be positive"));
            }
            if self.kernel_form == KernelForm::TimeInvariant {
                return Err(invalid("low-rank truncation needs a time-varying kernel"));
            }
        }
        if !(self.mu_mix > 0.0 && self.mu_mix < 1.0) {
            return Err(invalid(format!("mu_mix must lie in (0, 1), got {}", self.mu_mix)));
        }
        if let KernelInit::Constant { value, .. } = self.init {
            if !value.is_finite() {
                return Err(invalid("initial kernel value must be finite"));
            }
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::time_only_small(Method::Vi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_round_trip_and_lookup() {
        let s: LrSchedule = "0.4@100, 0.2@300".parse().unwrap();
        assert_eq!(s.rate(1), Some(0.4));
        assert_eq!(s.rate(100), Some(0.4));
        assert_eq!(s.rate(101), Some(0.2));
        assert_eq!(s.rate(301), None);
        assert_eq!(s.to_string().parse::<LrSchedule>().unwrap(), s);
        assert!("0.4@100,0.2@50".parse::<LrSchedule>().is_err());
        assert!("0.4".parse::<LrSchedule>().is_err());
        assert!("-1@3".parse::<LrSchedule>().is_err());
    }

    #[test]
    fn presets_validate() {
        for m in [Method::Vi, Method::Gd] {
            TrainConfig::time_only_small(m).validate().unwrap();
            TrainConfig::time_only_large(m, Some(0.6)).validate().unwrap();
            TrainConfig::stationary(m).validate().unwrap();
            TrainConfig::network(m, Some(0.8)).validate().unwrap();
        }
        let gd = TrainConfig::time_only_small(Method::Gd);
        assert_eq!(gd.lr_schedule.rate(1), Some(0.2));
        assert_eq!(gd.lr_schedule.rate(300), Some(0.1));
    }

    #[test]
    fn validation_catches_bad_values() {
        let c = TrainConfig { max_epochs: 400, ..TrainConfig::default() };
        assert!(c.validate().is_err());
        let c = TrainConfig { mu_mix: 1.0, ..TrainConfig::default() };
        assert!(c.validate().is_err());
        let mut c = TrainConfig::stationary(Method::Vi);
        c.svd_threshold = Some(0.5);
        assert!(c.validate().is_err());
    }
}
