//! Flat `key = value` training configuration.
//!
//! Absent keys take the defaults of the base preset (`preset`, default
//! `paper-timeonly-small`) for the chosen `method` (default `vi`). `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::inference::{
    BarrierKind, KernelForm, KernelInit, LrSchedule, Method, Reduction, SmoothnessStep, TrainConfig,
};
use crate::simulate::Preset;

const KEYS: [&str; 18] = [
    "preset",
    "method",
    "batch_size",
    "max_epochs",
    "lr_schedule",
    "intensity_floor",
    "barrier_weight",
    "barrier_kind",
    "smoothness_weight",
    "smoothness_step",
    "svd_threshold",
    "mu_mix",
    "rng_seed",
    "kernel_form",
    "init",
    "init_value",
    "init_zero_sources",
    "reduction",
];

/// Defaults of `preset` for `method`.
pub fn preset_config(preset: Preset, method: Method) -> TrainConfig {
    match preset {
        Preset::TimeOnlySmall => TrainConfig::time_only_small(method),
        Preset::TimeOnlyLarge => TrainConfig::time_only_large(method, None),
        Preset::Stationary => TrainConfig::stationary(method),
        Preset::Network => TrainConfig::network(method, None),
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::Format(format!("config key {key}: bad value {value:?}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("config line {}: expected key = value", k + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Format(format!("config line {}: unknown key {key:?}", k + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Format(format!("config line {}: duplicate key {key:?}", k + 1)));
        }
    }
    Ok(map)
}

/// Parses a configuration; `method` overrides the file's `method` key when given.
pub fn config_from_str(text: &str, method: Option<Method>) -> Result<TrainConfig> {
    let map = parse_entries(text)?;
    let get = |k: &str| map.get(k).map(String::as_str);
    let preset = match get("preset") {
        Some(p) => p.parse::<Preset>().map_err(|_| bad("preset", p))?,
        None => Preset::TimeOnlySmall,
    };
    let method = match (method, get("method")) {
        (Some(m), _) => m,
        (None, Some(m)) => m.parse()?,
        (None, None) => Method::Vi,
    };
    let mut c = preset_config(preset, method);
    if let Some(v) = get("batch_size") {
        c.batch_size = num("batch_size", v)?;
    }
    if let Some(v) = get("max_epochs") {
        c.max_epochs = num("max_epochs", v)?;
    }
    if let Some(v) = get("lr_schedule") {
        c.lr_schedule = v.parse::<LrSchedule>()?;
    }
    if let Some(v) = get("intensity_floor") {
        c.intensity_floor = num("intensity_floor", v)?;
    }
    if let Some(v) = get("barrier_weight") {
        c.barrier_weight = num("barrier_weight", v)?;
    }
    if let Some(v) = get("barrier_kind") {
        c.barrier_kind = match v {
            "quadratic" => BarrierKind::Quadratic,
            "log" => BarrierKind::Log,
            _ => return Err(bad("barrier_kind", v)),
        };
    }
    if let Some(v) = get("smoothness_weight") {
        c.smoothness_weight = num("smoothness_weight", v)?;
    }
    if let Some(v) = get("smoothness_step") {
        c.smoothness_step = match v {
            "explicit" => SmoothnessStep::Explicit,
            "implicit" => SmoothnessStep::Implicit,
            _ => return Err(bad("smoothness_step", v)),
        };
    }
    if let Some(v) = get("svd_threshold") {
        c.svd_threshold = if v == "none" { None } else { Some(num("svd_threshold", v)?) };
    }
    if let Some(v) = get("mu_mix") {
        c.mu_mix = num("mu_mix", v)?;
    }
    if let Some(v) = get("rng_seed") {
        c.rng_seed = num("rng_seed", v)?;
    }
    if let Some(v) = get("kernel_form") {
        c.kernel_form = match v {
            "time-varying" => KernelForm::TimeVarying,
            "time-invariant" => KernelForm::TimeInvariant,
            _ => return Err(bad("kernel_form", v)),
        };
    }
    let init = get("init").unwrap_or(match c.init {
        KernelInit::Zero => "zero",
        KernelInit::Constant { .. } => "constant",
    });
    c.init = match init {
        "zero" => {
            if get("init_value").is_some() || get("init_zero_sources").is_some() {
                return Err(Error::Format("init_value and init_zero_sources need init = constant".into()));
            }
            KernelInit::Zero
        }
        "constant" => {
            let value = num("init_value", get("init_value").ok_or_else(|| bad("init_value", ""))?)?;
            let zero_sources = match get("init_zero_sources") {
                None | Some("") => Vec::new(),
                Some(s) => s.split(',').map(|x| num("init_zero_sources", x.trim())).collect::<Result<_>>()?,
            };
            KernelInit::Constant { value, zero_sources }
        }
        other => return Err(bad("init", other)),
    };
    if let Some(v) = get("reduction") {
        c.reduction = match v {
            "deterministic" => Reduction::Deterministic,
            "unordered" => Reduction::Unordered,
            _ => return Err(bad("reduction", v)),
        };
    }
    c.validate().map_err(|e| Error::Format(format!("config: {e}")))?;
    Ok(c)
}

/// Writes every field explicitly; parses back to the same configuration.
pub fn config_to_string(c: &TrainConfig) -> String {
    let mut lines = vec![
        format!("method = {}", c.method),
        format!("batch_size = {}", c.batch_size),
        format!("max_epochs = {}", c.max_epochs),
        format!("lr_schedule = {}", c.lr_schedule),
        format!("intensity_floor = {}", c.intensity_floor),
        format!("barrier_weight = {}", c.barrier_weight),
        format!(
            "barrier_kind = {}",
            match c.barrier_kind {
                BarrierKind::Quadratic => "quadratic",
                BarrierKind::Log => "log",
            }
        ),
        format!("smoothness_weight = {}", c.smoothness_weight),
        format!(
            "smoothness_step = {}",
            match c.smoothness_step {
                SmoothnessStep::Explicit => "explicit",
                SmoothnessStep::Implicit => "implicit",
            }
        ),
        format!("svd_threshold = {}", c.svd_threshold.map_or("none".to_string(), |t| t.to_string())),
        format!("mu_mix = {}", c.mu_mix),
        format!("rng_seed = {}", c.rng_seed),
        format!(
            "kernel_form = {}",
            match c.kernel_form {
                KernelForm::TimeVarying => "time-varying",
                KernelForm::TimeInvariant => "time-invariant",
            }
        ),
    ];
    match &c.init {
        KernelInit::Zero => lines.push("init = zero".into()),
        KernelInit::Constant { value, zero_sources } => {
            lines.push("init = constant".into());
            lines.push(format!("init_value = {value}"));
            let s: Vec<String> = zero_sources.iter().map(usize::to_string).collect();
            lines.push(format!("init_zero_sources = {}", s.join(",")));
        }
    }
    lines.push(format!(
        "reduction = {}",
        match c.reduction {
            Reduction::Deterministic => "deterministic",
            Reduction::Unordered => "unordered",
        }
    ));
    lines.join("\n") + "\n"
}

pub fn load_config(path: &Path, method: Option<Method>) -> Result<TrainConfig> {
    config_from_str(&std::fs::read_to_string(path)?, method)
}
