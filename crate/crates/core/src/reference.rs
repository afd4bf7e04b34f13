//! Published GDP and population hyperbola parameters, in billions of 1990
//! GK$ and billions of persons.

use serde::Serialize;

use crate::error::Result;
use crate::model::{HyperbolicModel, RatioModel};

/// `(a1, k1)` for GDP and `(a2, k2)` for population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedParams {
    pub region: &'static str,
    pub a1: f64,
    pub k1: f64,
    pub a2: f64,
    pub k2: f64,
}

impl PublishedParams {
    pub fn gdp(&self) -> Result<HyperbolicModel> {
        HyperbolicModel::unbounded(self.a1, self.k1)
    }

    pub fn pop(&self) -> Result<HyperbolicModel> {
        HyperbolicModel::unbounded(self.a2, self.k2)
    }

    pub fn ratio(&self) -> Result<RatioModel> {
        RatioModel::new(self.gdp()?, self.pop()?)
    }

    pub fn gdp_singularity(&self) -> f64 {
        self.a1 / self.k1
    }

    pub fn pop_singularity(&self) -> f64 {
        self.a2 / self.k2
    }
}

const fn p(region: &'static str, a1: f64, k1: f64, a2: f64, k2: f64) -> PublishedParams {
    PublishedParams { region, a1, k1, a2, k2 }
}

pub const WORLD: PublishedParams = p("World", 1.684e-2, 8.539e-6, 7.739e0, 3.765e-3);
pub const WESTERN_EUROPE: PublishedParams = p("Western Europe", 9.859e-2, 5.112e-5, 7.542e1, 3.749e-2);
pub const EASTERN_EUROPE: PublishedParams = p("Eastern Europe", 7.749e-1, 4.048e-4, 3.055e2, 1.525e-1);
pub const FORMER_USSR: PublishedParams = p("Former USSR", 6.547e-1, 3.452e-4, 2.618e2, 1.333e-1);
pub const ASIA: PublishedParams = p("Asia", 2.303e-2, 1.129e-5, 1.068e1, 4.999e-3);

/// Slow segment, AD 1 to 1820.
pub const AFRICA_EARLY: PublishedParams = p("Africa", 1.244e-1, 5.030e-5, 5.794e1, 2.473e-2);
/// Fast segment, from 1840.
pub const AFRICA_LATE: PublishedParams = p("Africa", 4.192e-1, 2.126e-4, 1.571e2, 7.834e-2);

/// Slow segment as given in the regional discussion.
pub const LATIN_AMERICA_EARLY: PublishedParams = p("Latin America", 4.421e-1, 2.093e-4, 1.765e2, 8.242e-2);
/// Slow segment as listed in the summary table. Its `k1, a2, k2` equal
/// Africa's fast segment, which looks like a copy error; kept for reference.
pub const LATIN_AMERICA_EARLY_TABLE: PublishedParams = p("Latin America", 4.421e-1, 2.126e-4, 1.571e2, 7.834e-2);
/// Fast segment, from 1600.
pub const LATIN_AMERICA_LATE: PublishedParams = p("Latin America", 1.570e0, 8.224e-4, 6.561e2, 3.371e-1);

/// Single-segment regions, in table order.
pub const SINGLE_SEGMENT: [PublishedParams; 5] = [WORLD, WESTERN_EUROPE, EASTERN_EUROPE, FORMER_USSR, ASIA];

/// The first table row for each of the seven regions.
pub const TABLE: [PublishedParams; 7] = [
    WORLD,
    WESTERN_EUROPE,
    EASTERN_EUROPE,
    FORMER_USSR,
    ASIA,
    AFRICA_EARLY,
    LATIN_AMERICA_EARLY_TABLE,
];

pub fn lookup(region: &str) -> Option<PublishedParams> {
    TABLE.iter().copied().find(|p| p.region == region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MonotonicityClass;

    #[test]
    fn table_duplication_is_visible() {
        assert_eq!(LATIN_AMERICA_EARLY_TABLE.k1, AFRICA_LATE.k1);
        assert_eq!(LATIN_AMERICA_EARLY_TABLE.a2, AFRICA_LATE.a2);
        assert_eq!(LATIN_AMERICA_EARLY_TABLE.k2, AFRICA_LATE.k2);
        assert_ne!(LATIN_AMERICA_EARLY.k1, LATIN_AMERICA_EARLY_TABLE.k1);
    }

    #[test]
    fn classes() {
        for p in SINGLE_SEGMENT {
            assert_eq!(
                p.ratio().unwrap().classify(),
                MonotonicityClass::IncreasingToInfinity,
                "{}",
                p.region
            );
        }
        assert_eq!(
            AFRICA_EARLY.ratio().unwrap().classify(),
            MonotonicityClass::DecreasingToZero
        );
    }

    #[test]
    fn singularities() {
        assert!((WESTERN_EUROPE.gdp_singularity() - 1928.6).abs() < 0.1);
        assert!((EASTERN_EUROPE.gdp_singularity() - 1914.3).abs() < 0.1);
        assert!((FORMER_USSR.gdp_singularity() - 1896.6).abs() < 0.1);
    }
}
