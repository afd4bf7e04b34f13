//! Fixtures shared by the benchmarks.

use hypergrowth_core::{parse_series_csv, GrowthSeries, SeriesKind};

const EXCERPT: &str = include_str!("../../../data/maddison_excerpt.csv");

/// One series from the bundled excerpt, in model units.
pub fn excerpt(region: &str, kind: SeriesKind) -> GrowthSeries {
    parse_series_csv(EXCERPT.as_bytes())
        .expect("bundled excerpt parses")
        .into_iter()
        .find(|s| s.region() == region && s.kind() == kind)
        .expect("series present")
        .to_model_units()
}
