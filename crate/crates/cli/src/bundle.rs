//! Machine-readable results shared by every subcommand.

use hypergrowth_core::{
    Bridge, ComponentFit, Diagnosis, FitReport, Location, MonotonicityClass, PiecewiseTrajectory, RatioFit,
    SegmentModel, SeriesKind, Trajectory, Unit, YearWindow,
};
use serde::{Deserialize, Serialize};

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub version: u32,
    pub command: String,
    pub region: String,
    pub kind: SeriesKind,
    /// Unit of the `observed` and `fitted` columns.
    pub unit: Unit,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Breakpoints>,
    pub segments: Vec<SegmentSummary>,
    pub bridges: Vec<Bridge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotonicity_class: Option<MonotonicityClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<Diagnosis>,
    pub table: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakpoints {
    pub gdp: Option<f64>,
    pub population: Option<f64>,
}

/// One segment's parameters. GDP uses `a1, k1`, population `a2, k2`, and a
/// hyperbola fitted directly to another kind uses `a, k`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SegmentSummary {
    pub id: String,
    pub window: Option<YearWindow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singularity_gdp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singularity_population: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singularity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared_reciprocal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<MonotonicityClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub year: f64,
    pub observed: f64,
    /// Missing past the trajectory's singularity.
    pub fitted: Option<f64>,
    /// Relative residual; missing where it is not finite.
    pub residual: Option<f64>,
    pub segment: String,
}

fn singularity(a: f64, k: f64) -> Option<f64> {
    (k > 0.0).then(|| a / k)
}

fn segment_id(i: usize) -> String {
    format!("segment-{}", i + 1)
}

/// Per-year rows of `points` against `trajectory`.
pub fn table(points: &[(f64, f64)], trajectory: &PiecewiseTrajectory) -> Vec<TableRow> {
    points
        .iter()
        .map(|&(year, observed)| TableRow {
            year,
            observed,
            fitted: trajectory.value(year).ok(),
            residual: Some(trajectory.relative_deviation(year, observed)).filter(|r| r.is_finite()),
            segment: match trajectory.locate(year) {
                Location::Segment(i) => segment_id(i),
                Location::Bridge(_) => "bridge".to_string(),
            },
        })
        .collect()
}

/// Segment summaries for a single-series fit.
pub fn component_segments(fit: &ComponentFit, kind: SeriesKind) -> Vec<SegmentSummary> {
    let reports: Vec<&FitReport> = match fit {
        ComponentFit::Single(r) => vec![r],
        ComponentFit::Piecewise(p) => vec![&p.left, &p.right],
    };
    fit.trajectory()
        .segments()
        .iter()
        .zip(reports)
        .enumerate()
        .map(|(i, (seg, report))| {
            let m = match seg.model {
                SegmentModel::Hyperbolic(m) => m,
                SegmentModel::Ratio(_) => unreachable!("component fits hold hyperbolas"),
            };
            let (a, k, t) = (Some(m.a()), Some(m.k()), singularity(m.a(), m.k()));
            let mut s = SegmentSummary {
                id: segment_id(i),
                window: Some(seg.window),
                r_squared_reciprocal: Some(report.r_squared_reciprocal),
                n_points: Some(report.n_points),
                ..SegmentSummary::default()
            };
            match kind {
                SeriesKind::Gdp => (s.a1, s.k1, s.singularity_gdp) = (a, k, t),
                SeriesKind::Population => (s.a2, s.k2, s.singularity_population) = (a, k, t),
                SeriesKind::GdpPerCapita => (s.a, s.k, s.singularity) = (a, k, t),
            }
            s
        })
        .collect()
}

/// Segment summaries for a GDP/cap trajectory.
pub fn ratio_segments(fit: &RatioFit) -> Vec<SegmentSummary> {
    fit.trajectory
        .segments()
        .iter()
        .enumerate()
        .map(|(i, seg)| {
            let r = match seg.model {
                SegmentModel::Ratio(r) => r,
                SegmentModel::Hyperbolic(_) => unreachable!("ratio fits hold ratio segments"),
            };
            let (g, p) = (r.gdp(), r.pop());
            SegmentSummary {
                id: segment_id(i),
                window: Some(seg.window),
                a1: Some(g.a()),
                k1: Some(g.k()),
                singularity_gdp: singularity(g.a(), g.k()),
                a2: Some(p.a()),
                k2: Some(p.k()),
                singularity_population: singularity(p.a(), p.k()),
                class: Some(r.classify()),
                ..SegmentSummary::default()
            }
        })
        .collect()
}

pub fn breakpoint_of(fit: &ComponentFit) -> Option<f64> {
    match fit {
        ComponentFit::Piecewise(p) => Some(p.breakpoint),
        ComponentFit::Single(_) => None,
    }
}
