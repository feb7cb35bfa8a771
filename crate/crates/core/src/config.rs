//! Line-based `key = value` configuration files. Blank lines and `#`
//! comments are ignored; unknown keys are errors. Values parsed here are
//! overridden by CLI flags.

use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::PipelineConfig;

/// Apply one key/value pair to a config.
pub fn apply_key_value(cfg: &mut PipelineConfig, key: &str, value: &str) -> Result<()> {
    let bad = |what: &str| Error::InvalidConfig(format!("{key}: cannot parse {value:?} as {what}"));
    match key {
        "n_keyframes" => cfg.n_keyframes = value.parse().map_err(|_| bad("integer"))?,
        "dictionary_size" => cfg.dictionary_size = value.parse().map_err(|_| bad("integer"))?,
        "kernel" => cfg.kernel = value.parse()?,
        "stride" => cfg.stride = value.parse().map_err(|_| bad("integer"))?,
        "svm_c" => cfg.svm_c = value.parse().map_err(|_| bad("number"))?,
        "svm_epochs" => cfg.svm_epochs = value.parse().map_err(|_| bad("integer"))?,
        "seed" => cfg.seed = value.parse().map_err(|_| bad("integer"))?,
        "splits" => cfg.splits = value.parse().map_err(|_| bad("integer"))?,
        "train_frac" => cfg.train_frac = value.parse().map_err(|_| bad("number"))?,
        "val_frac" => cfg.val_frac = value.parse().map_err(|_| bad("number"))?,
        "test_frac" => cfg.test_frac = value.parse().map_err(|_| bad("number"))?,
        "d_c" => cfg.d_c = Some(value.parse().map_err(|_| bad("number"))?),
        "measure_timings" => cfg.measure_timings = value.parse().map_err(|_| bad("bool"))?,
        other => return Err(Error::InvalidConfig(format!("unknown key {other:?}"))),
    }
    Ok(())
}

/// Parse a whole config file over the defaults.
pub fn parse_config(text: &str) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1)))?;
        apply_key_value(&mut cfg, key.trim(), value.trim())?;
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<PipelineConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
