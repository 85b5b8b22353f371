//! TOML configuration mirroring every tunable default.
//!
//! ```toml
//! [synth]
//! variants = 12
//! lights_per_variant = 2
//! blur_sigma = [1.5, 2.5]
//!
//! [appearance]
//! palette_bandwidth = 0.08
//!
//! [render]
//! ambient = 0.7
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::appearance::{Palette, PaletteEntry, PseudoAlbedoConfig, PALETTE_BANDWIDTH};
use crate::render::RenderParams;
use crate::synth::SynthRanges;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub synth: SynthSection,
    pub appearance: AppearanceSection,
    pub render: RenderParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSection {
    /// Depth variants per print.
    pub variants: usize,
    /// Distinct light environments rendered per variant.
    pub lights_per_variant: usize,
    #[serde(flatten)]
    pub ranges: SynthRanges,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            variants: 10,
            lights_per_variant: 1,
            ranges: SynthRanges::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppearanceSection {
    pub palette_bandwidth: f64,
    /// Colours for synthetic albedo.
    pub palette: Vec<PaletteEntry>,
    pub pseudo: PseudoAlbedoConfig,
}

impl Default for AppearanceSection {
    fn default() -> Self {
        AppearanceSection {
            palette_bandwidth: PALETTE_BANDWIDTH,
            palette: vec![
                PaletteEntry { rgb: [0.16, 0.16, 0.18], proportion: 0.5 },
                PaletteEntry { rgb: [0.55, 0.56, 0.58], proportion: 0.3 },
                PaletteEntry { rgb: [0.78, 0.32, 0.18], proportion: 0.2 },
            ],
            pseudo: PseudoAlbedoConfig::default(),
        }
    }
}

impl AppearanceSection {
    pub fn palette(&self) -> Result<Palette> {
        Palette::new(self.palette.clone())
    }
}

impl Config {
    /// Parses TOML; keys absent from the default configuration are rejected.
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::parse(text).map_err(|e| Error::arg(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::format(path, e))
    }

    fn parse(text: &str) -> std::result::Result<Self, String> {
        let given: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        let known = toml::Table::try_from(Config::default()).expect("config serializes");
        // flattened sections bypass serde's own unknown-field check
        check_keys(&given, &known, "")?;
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn check_keys(given: &toml::Table, known: &toml::Table, prefix: &str) -> std::result::Result<(), String> {
    for (key, value) in given {
        let path = format!("{prefix}{key}");
        match (value, known.get(key)) {
            (_, None) => return Err(format!("unknown key `{path}`")),
            (toml::Value::Table(g), Some(toml::Value::Table(k))) => check_keys(g, k, &format!("{path}."))?,
            _ => {}
        }
    }
    Ok(())
}
