//! World configuration from a `key = value` file: entity counts, arena
//! size, horizon, and the dynamics switches. Unset keys keep their
//! defaults; unknown keys and malformed values are errors.

use rapidlearn_core::world::{ExtractRule, ItemStart, WorldConfig};
use thiserror::Error;

/// A line or value the parser cannot accept.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    /// A non-comment line without a `key = value` shape.
    #[error("line {0}: expected `key = value`")]
    Shape(usize),
    /// A key the configuration does not define.
    #[error("line {0}: unknown key `{1}`")]
    UnknownKey(usize, String),
    /// A value that does not parse for its key.
    #[error("line {0}: bad value `{2}` for `{1}`")]
    BadValue(usize, String, String),
}

fn parse_item_start(v: &str) -> Option<ItemStart> {
    match v {
        "absent" => Some(ItemStart::Absent),
        "inventory" => Some(ItemStart::InInventory),
        "world" => Some(ItemStart::InWorld),
        _ => None,
    }
}

fn parse_extract(v: &str) -> Option<ExtractRule> {
    match v {
        "tree" => Some(ExtractRule::FromTree),
        "rubber_tree" => Some(ExtractRule::FromRubberTree),
        "placed_tap" => Some(ExtractRule::FromPlacedTap),
        _ => None,
    }
}

/// Parses a world config file. Blank lines and `#` comments are skipped.
pub fn parse_world_config(src: &str) -> Result<WorldConfig, ConfigError> {
    let mut cfg = WorldConfig::default();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let n = i + 1;
        let (key, value) = line.split_once('=').ok_or(ConfigError::Shape(n))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || ConfigError::BadValue(n, key.to_string(), value.to_string());
        match key {
            "width" => cfg.width = value.parse().map_err(|_| bad())?,
            "height" => cfg.height = value.parse().map_err(|_| bad())?,
            "trees" => cfg.trees = value.parse().map_err(|_| bad())?,
            "crafting_tables" => cfg.crafting_tables = value.parse().map_err(|_| bad())?,
            "rubber_trees" => cfg.rubber_trees = value.parse().map_err(|_| bad())?,
            "horizon" => cfg.horizon = value.parse().map_err(|_| bad())?,
            "axe" => cfg.axe = parse_item_start(value).ok_or_else(bad)?,
            "water" => cfg.water = parse_item_start(value).ok_or_else(bad)?,
            "table_on_fire" => cfg.table_on_fire = value.parse().map_err(|_| bad())?,
            "break_requires_axe" => {
                cfg.break_requires_axe = value.parse().map_err(|_| bad())?
            }
            "break_disabled" => cfg.break_disabled = value.parse().map_err(|_| bad())?,
            "scrape_enabled" => cfg.scrape_enabled = value.parse().map_err(|_| bad())?,
            "extract" => cfg.extract = parse_extract(value).ok_or_else(bad)?,
            _ => return Err(ConfigError::UnknownKey(n, key.to_string())),
        }
    }
    Ok(cfg)
}
