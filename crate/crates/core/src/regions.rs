//! Per-region fit settings, read from a small TOML file.

use serde::{Deserialize, Serialize};

use crate::data_io::GrowthSeries;
use crate::error::{Error, Result};
use crate::fitting::{
    compose_ratio, fit_hyperbolic, fit_piecewise, Breakpoint, BridgeDegree, ComponentFit, PiecewiseConfig, RatioFit,
    DEFAULT_BRIDGE_WIDTH, DEFAULT_FIT_WINDOW,
};
use crate::model::YearWindow;

/// The settings shipped in `data/regions.toml`.
pub const BUILTIN_REGIONS: &str = include_str!("../../../data/regions.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Developed,
    LessDeveloped,
    Mixed,
}

impl Category {
    /// Takeoff year conventionally claimed for this group.
    pub fn takeoff_candidate(&self) -> Option<f64> {
        match self {
            Category::Developed => Some(1750.0),
            Category::LessDeveloped => Some(1900.0),
            Category::Mixed => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionSettings {
    pub name: String,
    pub category: Category,
    pub window: YearWindow,
    pub breakpoint: Option<Breakpoint>,
    pub bridge_width: f64,
    pub bridge_degree: BridgeDegree,
}

impl RegionSettings {
    /// Settings for a region missing from the file.
    pub fn fallback(name: &str) -> Self {
        RegionSettings {
            name: name.to_string(),
            category: Category::Mixed,
            window: DEFAULT_FIT_WINDOW,
            breakpoint: None,
            bridge_width: DEFAULT_BRIDGE_WIDTH,
            bridge_degree: BridgeDegree::Cubic,
        }
    }

    pub fn piecewise_config(&self) -> Option<PiecewiseConfig> {
        self.breakpoint.map(|breakpoint| PiecewiseConfig {
            window: self.window,
            breakpoint,
            bridge_width: self.bridge_width,
            degree: self.bridge_degree,
        })
    }

    /// Single or two-segment fit of one component.
    pub fn fit_component(&self, series: &GrowthSeries) -> Result<ComponentFit> {
        match self.piecewise_config() {
            Some(cfg) => fit_piecewise(series, &cfg).map(ComponentFit::Piecewise),
            None => fit_hyperbolic(series, &self.window).map(ComponentFit::Single),
        }
    }

    /// GDP/cap trajectory from the region's component fits.
    pub fn fit_ratio(&self, gdp: &GrowthSeries, pop: &GrowthSeries) -> Result<RatioFit> {
        let g = self.fit_component(gdp)?;
        let p = self.fit_component(pop)?;
        compose_ratio(g, p, gdp, pop, self.bridge_degree)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionConfig {
    pub regions: Vec<RegionSettings>,
    default: RegionSettings,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    default: RawDefault,
    #[serde(default)]
    region: Vec<RawRegion>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDefault {
    window: Option<String>,
    bridge_width: Option<f64>,
    bridge_degree: Option<u8>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    name: String,
    category: Category,
    window: Option<String>,
    breakpoint: Option<String>,
    bridge_width: Option<f64>,
    bridge_degree: Option<u8>,
}

fn degree(d: Option<u8>, fallback: BridgeDegree) -> Result<BridgeDegree> {
    match d {
        None => Ok(fallback),
        Some(d) => BridgeDegree::from_degree(d)
            .ok_or_else(|| Error::InvalidSeries(format!("bridge degree must be 1 or 3, got {d}"))),
    }
}

fn width(w: Option<f64>, fallback: f64) -> Result<f64> {
    match w {
        None => Ok(fallback),
        Some(w) if w > 0.0 && w.is_finite() => Ok(w),
        Some(w) => Err(Error::InvalidWindow(format!("bridge width must be positive, got {w}"))),
    }
}

impl RegionConfig {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_REGIONS).expect("bundled region settings are valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Schema {
            line: e.span().map(|s| text[..s.start].lines().count().max(1)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        let default = RegionSettings {
            name: String::new(),
            category: Category::Mixed,
            window: match raw.default.window {
                Some(w) => w.parse()?,
                None => DEFAULT_FIT_WINDOW,
            },
            breakpoint: None,
            bridge_width: width(raw.default.bridge_width, DEFAULT_BRIDGE_WIDTH)?,
            bridge_degree: degree(raw.default.bridge_degree, BridgeDegree::Cubic)?,
        };
        let regions = raw
            .region
            .into_iter()
            .map(|r| {
                Ok(RegionSettings {
                    category: r.category,
                    window: match r.window {
                        Some(w) => w.parse()?,
                        None => default.window,
                    },
                    breakpoint: r.breakpoint.map(|b| b.parse()).transpose()?,
                    bridge_width: width(r.bridge_width, default.bridge_width)?,
                    bridge_degree: degree(r.bridge_degree, default.bridge_degree)?,
                    name: r.name,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RegionConfig { regions, default })
    }

    pub fn get(&self, name: &str) -> RegionSettings {
        self.regions
            .iter()
            .find(|r| r.name == name)
            .cloned()
            .unwrap_or_else(|| RegionSettings {
                name: name.to_string(),
                ..self.default.clone()
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_settings() {
        let cfg = RegionConfig::builtin();
        assert_eq!(cfg.regions.len(), 7);
        assert_eq!(cfg.regions[0].name, "World");
        let africa = cfg.get("Africa");
        assert_eq!(africa.breakpoint, Some(Breakpoint::Auto));
        assert_eq!(africa.window, YearWindow::new(1.0, 1950.0).unwrap());
        assert_eq!(africa.bridge_width, 20.0);
        let la = cfg.get("Latin America");
        assert_eq!(la.breakpoint, Some(Breakpoint::Year(1550.0)));
        assert_eq!(la.bridge_width, 100.0);
        assert_eq!(cfg.get("World").window, DEFAULT_FIT_WINDOW);
        assert_eq!(cfg.get("Atlantis").category, Category::Mixed);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RegionConfig::parse("[[region]]\nname = \"X\"\ncategory = \"developed\"\ncolour = 1\n").is_err());
        assert!(RegionConfig::parse("[default]\nbridge_degree = 2\n").is_err());
        assert!(RegionConfig::parse("[default]\nwindow = \"1950:1\"\n").is_err());
    }
}
