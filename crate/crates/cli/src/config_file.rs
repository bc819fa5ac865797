//! Flat key=value run-configuration files.
//!
//! Every key is named identically to its engine config field; `#` starts a
//! comment line and unknown keys are errors.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mggp::engine::GpConfig;

/// Parses a config file, starting from the default settings and overriding
/// each listed key.
pub fn load_config(path: &Path) -> Result<GpConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in config file {}", path.display()))
}

pub fn parse_config(text: &str) -> Result<GpConfig> {
    let mut config = GpConfig::default();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key=value, got '{line}'", line_no + 1))?;
        let key = key.trim();
        let value = value.trim();
        apply_key(&mut config, key, value)
            .with_context(|| format!("line {}", line_no + 1))?;
    }
    config.validate()?;
    Ok(config)
}

fn apply_key(config: &mut GpConfig, key: &str, value: &str) -> Result<()> {
    fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
        value
            .parse()
            .map_err(|_| anyhow!("key {key}: cannot parse '{value}'"))
    }
    match key {
        "population_size" => config.population_size = parse(key, value)?,
        "generations" => config.generations = parse(key, value)?,
        "tournament_size" => config.tournament_size = parse(key, value)?,
        "max_depth" => config.max_depth = parse(key, value)?,
        "max_trees" => config.max_trees = parse(key, value)?,
        "p_crossover" => config.p_crossover = parse(key, value)?,
        "p_mutation" => config.p_mutation = parse(key, value)?,
        "p_reproduction" => config.p_reproduction = parse(key, value)?,
        "fitness_target" => config.fitness_target = parse(key, value)?,
        "elitism_count" => config.elitism_count = parse(key, value)?,
        "rng_seed" => config.rng_seed = parse(key, value)?,
        "p_var" => config.p_var = parse(key, value)?,
        "p_high_level_crossover" => config.p_high_level_crossover = parse(key, value)?,
        "const_range" => {
            let (lo, hi) = value
                .split_once(',')
                .ok_or_else(|| anyhow!("key const_range: expected 'low,high'"))?;
            config.const_range = (parse(key, lo.trim())?, parse(key, hi.trim())?);
        }
        other => bail!("unknown config key '{other}'"),
    }
    Ok(())
}
