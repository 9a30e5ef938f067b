//! Simulation configuration: the bounded 2D area, the agent population,
//! the zone contracts and the ask-price parameters.
//!
//! Configs are plain TOML. Every field has a default, so a config file only
//! needs the values it overrides. The default scenario is a 1000x1000 area
//! with a 3x3 grid of disc zones and a center-weighted agent spawn, one
//! simulated day at one tick per minute.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::currency::Currency;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("failed to parse config: {0}")]
    Parse(#[from] toml::de::Error),
}

impl ConfigError {
    fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

/// Zone geometry. Boundaries are closed: a point on the edge is inside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Disc { x: f64, y: f64, radius: f64 },
    Rect { x_min: f64, y_min: f64, x_max: f64, y_max: f64 },
}

impl Region {
    pub fn contains(&self, px: f64, py: f64) -> bool {
        match *self {
            Region::Disc { x, y, radius } => {
                let (dx, dy) = (px - x, py - y);
                dx * dx + dy * dy <= radius * radius
            }
            Region::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => px >= x_min && px <= x_max && py >= y_min && py <= y_max,
        }
    }
}

/// One zone-bound smart contract: where it collects, how many distinct
/// persons it needs per round, and how fresh their data must be.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneSpec {
    pub id: u32,
    pub region: Region,
    /// Minimum number of fresh offers required before anyone is paid.
    pub min_persons: u32,
    /// Maximum data age in simulated seconds for an offer to count.
    pub freshness_window: u64,
    /// Grid coordinates for heatmap export; optional for free-form layouts.
    #[serde(default)]
    pub grid_row: Option<u32>,
    #[serde(default)]
    pub grid_col: Option<u32>,
}

/// Where agents start out. `Center` draws from a clamped normal around the
/// area midpoint, which concentrates traffic on central zones the way city
/// centers concentrate footfall; `Uniform` spreads agents evenly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpawnModel {
    Uniform,
    Center,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub area_width: f64,
    pub area_height: f64,
    pub num_agents: usize,
    /// Simulated seconds per tick.
    pub step_length_seconds: u64,
    /// Ticks per run; the default spans one simulated day.
    pub total_steps: u64,
    /// Maximum per-tick displacement along each axis.
    pub walk_step: f64,
    pub initial_ask: Currency,
    pub ask_delta: Currency,
    pub ask_floor: Currency,
    /// Per-tick probability that an agent senses a new datum.
    pub sensing_probability: f64,
    pub spawn: SpawnModel,
    /// Standard deviation of the `Center` spawn, in length units.
    pub spawn_spread: f64,
    pub rng_seed: u64,
    pub zones: Vec<ZoneSpec>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            area_width: 1000.0,
            area_height: 1000.0,
            num_agents: 100,
            step_length_seconds: 60,
            total_steps: 1440,
            walk_step: 10.0,
            initial_ask: Currency::from_units(1.0),
            ask_delta: Currency::from_units(0.1),
            ask_floor: Currency::from_units(0.1),
            sensing_probability: 1.0,
            spawn: SpawnModel::Center,
            spawn_spread: 100.0,
            rng_seed: 42,
            zones: grid_zones(3, 3, 1000.0, 1000.0, 250.0, 7, 3600),
        }
    }
}

/// Builds a `rows` x `cols` grid of disc zones covering the area, all with
/// the same threshold and freshness window. Zone ids are row-major.
pub fn grid_zones(
    rows: u32,
    cols: u32,
    area_width: f64,
    area_height: f64,
    radius: f64,
    min_persons: u32,
    freshness_window: u64,
) -> Vec<ZoneSpec> {
    let mut zones = Vec::with_capacity((rows * cols) as usize);
    for row in 0..rows {
        for col in 0..cols {
            zones.push(ZoneSpec {
                id: row * cols + col,
                region: Region::Disc {
                    x: (col as f64 + 0.5) * area_width / cols as f64,
                    y: (row as f64 + 0.5) * area_height / rows as f64,
                    radius,
                },
                min_persons,
                freshness_window,
                grid_row: Some(row),
                grid_col: Some(col),
            });
        }
    }
    zones
}

impl SimConfig {
    pub fn from_toml_str(s: &str) -> Result<SimConfig, ConfigError> {
        let cfg: SimConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    /// Simulated seconds covered by a full run.
    pub fn horizon_seconds(&self) -> u64 {
        self.total_steps * self.step_length_seconds
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::invalid(key, format!("must be positive, got {v}")));
            }
            Ok(())
        }
        positive("area_width", self.area_width)?;
        positive("area_height", self.area_height)?;
        if self.step_length_seconds == 0 {
            return Err(ConfigError::invalid("step_length_seconds", "must be at least 1"));
        }
        if self.total_steps == 0 {
            return Err(ConfigError::invalid("total_steps", "must be at least 1"));
        }
        if !(self.walk_step.is_finite() && self.walk_step >= 0.0) {
            return Err(ConfigError::invalid(
                "walk_step",
                format!("must be non-negative, got {}", self.walk_step),
            ));
        }
        if self.initial_ask <= Currency::ZERO {
            return Err(ConfigError::invalid("initial_ask", "must be positive"));
        }
        if self.ask_delta <= Currency::ZERO {
            return Err(ConfigError::invalid("ask_delta", "must be positive"));
        }
        if self.ask_floor < Currency::ZERO {
            return Err(ConfigError::invalid("ask_floor", "must be non-negative"));
        }
        if self.initial_ask < self.ask_floor {
            return Err(ConfigError::invalid(
                "initial_ask",
                "must not be below ask_floor",
            ));
        }
        if !(0.0..=1.0).contains(&self.sensing_probability) {
            return Err(ConfigError::invalid(
                "sensing_probability",
                format!("must be within [0, 1], got {}", self.sensing_probability),
            ));
        }
        if self.spawn == SpawnModel::Center {
            positive("spawn_spread", self.spawn_spread)?;
        }
        if self.zones.is_empty() {
            return Err(ConfigError::invalid("zones", "at least one zone is required"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, zone) in self.zones.iter().enumerate() {
            if !seen.insert(zone.id) {
                return Err(ConfigError::invalid(
                    format!("zones[{i}].id"),
                    format!("duplicate zone id {}", zone.id),
                ));
            }
            if zone.min_persons == 0 {
                return Err(ConfigError::invalid(
                    format!("zones[{i}].min_persons"),
                    "min_persons must be at least 1",
                ));
            }
            match zone.region {
                Region::Disc { radius, .. } => {
                    positive(&format!("zones[{i}].region.radius"), radius)?;
                }
                Region::Rect {
                    x_min,
                    y_min,
                    x_max,
                    y_max,
                } => {
                    if x_min > x_max || y_min > y_max {
                        return Err(ConfigError::invalid(
                            format!("zones[{i}].region"),
                            "rect bounds are inverted",
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_spans_a_day() {
        let cfg = SimConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.horizon_seconds(), 86_400);
        assert_eq!(cfg.zones.len(), 9);
        assert_eq!(cfg.initial_ask, Currency::from_milli(1000));
        assert_eq!(cfg.ask_delta, Currency::from_milli(100));
    }

    #[test]
    fn toml_round_trip_preserves_the_config() {
        let cfg = SimConfig::default();
        let text = cfg.to_toml_string();
        let back = SimConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let cfg = SimConfig::from_toml_str("num_agents = 25\nrng_seed = 7\n").unwrap();
        assert_eq!(cfg.num_agents, 25);
        assert_eq!(cfg.rng_seed, 7);
        assert_eq!(cfg.total_steps, 1440);
    }

    #[test]
    fn zero_min_persons_error_names_the_key() {
        let mut cfg = SimConfig::default();
        cfg.zones[2].min_persons = 0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("zones[2].min_persons"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(SimConfig::from_toml_str("num_agnets = 25\n").is_err());
    }

    #[test]
    fn boundary_points_are_inside() {
        let disc = Region::Disc {
            x: 0.0,
            y: 0.0,
            radius: 5.0,
        };
        assert!(disc.contains(5.0, 0.0));
        assert!(!disc.contains(5.01, 0.0));
        let rect = Region::Rect {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 2.0,
            y_max: 2.0,
        };
        assert!(rect.contains(2.0, 2.0));
        assert!(!rect.contains(2.0, 2.1));
    }

    #[test]
    fn grid_zone_ids_are_row_major() {
        let zones = grid_zones(2, 3, 600.0, 400.0, 50.0, 5, 600);
        assert_eq!(zones.len(), 6);
        assert_eq!(zones[4].id, 4);
        assert_eq!((zones[4].grid_row, zones[4].grid_col), (Some(1), Some(1)));
        match zones[0].region {
            Region::Disc { x, y, .. } => {
                assert!((x - 100.0).abs() < 1e-9);
                assert!((y - 100.0).abs() < 1e-9);
            }
            _ => panic!("grid zones are discs"),
        }
    }
}
