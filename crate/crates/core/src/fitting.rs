//! Parameter estimation on the reciprocal line, two-segment fits and the
//! polynomial bridges that join segments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data_io::{derive_per_capita, GrowthSeries};
use crate::error::{Error, Result};
use crate::linreg;
use crate::model::{HyperbolicModel, RatioModel, Trajectory, YearWindow};

/// Fit window used when a region has no configured one.
pub const DEFAULT_FIT_WINDOW: YearWindow = YearWindow { lo: 1000.0, hi: 1950.0 };

pub const DEFAULT_BRIDGE_WIDTH: f64 = 20.0;

const MIN_POINTS: usize = 3;
const REFINE_MAX_ITER: usize = 50;

/// A fitted hyperbola with goodness-of-fit on the points used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: HyperbolicModel,
    /// Window requested by the caller. The model's own window is the span of
    /// the data actually used, cut short of the singularity if needed.
    pub fit_window: YearWindow,
    pub r_squared_reciprocal: f64,
    pub years: Vec<f64>,
    /// `(observed - fitted) / fitted` at each of `years`.
    pub residuals: Vec<f64>,
    pub n_points: usize,
}

impl FitReport {
    /// Builds a report for given parameters against `points`.
    fn evaluate(a: f64, k: f64, points: &[(f64, f64)], fit_window: YearWindow) -> Result<Self> {
        let window = validity_window(a, k, points)?;
        let model = HyperbolicModel::new(a, k, window)?;
        let years: Vec<f64> = points.iter().map(|p| p.0).collect();
        let residuals = points.iter().map(|&(t, v)| model.relative_deviation(t, v)).collect();
        let recip: Vec<f64> = points.iter().map(|p| 1.0 / p.1).collect();
        let mean = recip.iter().sum::<f64>() / recip.len() as f64;
        let ss_tot: f64 = recip.iter().map(|y| (y - mean).powi(2)).sum();
        let ss_res: f64 = points
            .iter()
            .zip(&recip)
            .map(|(&(t, _), y)| (y - model.reciprocal(t)).powi(2))
            .sum();
        let r_squared_reciprocal = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
        Ok(FitReport {
            model,
            fit_window,
            r_squared_reciprocal,
            n_points: years.len(),
            years,
            residuals,
        })
    }

    /// Sum of squared relative residuals.
    pub fn objective(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum()
    }
}

/// `[first, last]` observation year, cut back to the last observation before
/// `a/k` when the singularity falls inside the data.
fn validity_window(a: f64, k: f64, points: &[(f64, f64)]) -> Result<YearWindow> {
    let first = points[0].0;
    let last = points[points.len() - 1].0;
    if k <= 0.0 || a <= 0.0 {
        return Err(Error::NonHyperbolic { a, k });
    }
    let singularity = a / k;
    if singularity <= first {
        return Err(Error::NonHyperbolic { a, k });
    }
    let hi = if singularity > last {
        last
    } else {
        points
            .iter()
            .map(|p| p.0)
            .filter(|&t| t < singularity)
            .fold(first, f64::max)
    };
    YearWindow::new(first, hi)
}

fn window_points(series: &GrowthSeries, window: &YearWindow) -> Result<Vec<(f64, f64)>> {
    let points = series.in_window(window);
    if points.len() < MIN_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_POINTS,
            found: points.len(),
        });
    }
    if let Some(&(year, value)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::NonPositiveValue { year, value });
    }
    Ok(points)
}

/// Ordinary least squares of `1/value` against year over `window`.
pub fn fit_hyperbolic(series: &GrowthSeries, window: &YearWindow) -> Result<FitReport> {
    let points = window_points(series, window)?;
    fit_points(&points, *window)
}

fn fit_points(points: &[(f64, f64)], fit_window: YearWindow) -> Result<FitReport> {
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| 1.0 / p.1).collect();
    let line = linreg::ols(&x, &y).ok_or(Error::InsufficientData {
        needed: MIN_POINTS,
        found: 1,
    })?;
    let (a, k) = (line.intercept, -line.slope);
    let mut report = FitReport::evaluate(a, k, points, fit_window)?;
    report.r_squared_reciprocal = line.r_squared;
    Ok(report)
}

/// Polishes a reciprocal-space fit by minimising squared relative residuals
/// in value space. Steps that do not lower the objective are rejected, and
/// `a`, `k` stay positive.
pub fn refine_fit(report: &FitReport, series: &GrowthSeries) -> Result<FitReport> {
    let points: Vec<(f64, f64)> = report
        .years
        .iter()
        .map(|&t| {
            series
                .value_at(t)
                .map(|v| (t, v))
                .ok_or_else(|| Error::InvalidSeries(format!("series has no observation at {t}")))
        })
        .collect::<Result<_>>()?;

    // r_i = v_i (a - k t_i) - 1 is linear in (a, k), so each Gauss-Newton
    // step is a 2x2 least-squares solve. Years are centred for conditioning.
    let tc = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let objective = |a: f64, k: f64| -> f64 { points.iter().map(|&(t, v)| (v * (a - k * t) - 1.0).powi(2)).sum() };

    let mut best = report.clone();
    let (mut a, mut k) = (report.model.a(), report.model.k());
    let mut f = objective(a, k);
    for _ in 0..REFINE_MAX_ITER {
        let (mut s11, mut s12, mut s22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(t, v) in &points {
            let j1 = v;
            let j2 = -v * (t - tc);
            let r = v * (a - k * t) - 1.0;
            s11 += j1 * j1;
            s12 += j1 * j2;
            s22 += j2 * j2;
            g1 += j1 * r;
            g2 += j2 * r;
        }
        let det = s11 * s22 - s12 * s12;
        if det <= 0.0 {
            break;
        }
        // step in (a_c, k) where a_c = a - k tc
        let da_c = -(s22 * g1 - s12 * g2) / det;
        let dk = -(s11 * g2 - s12 * g1) / det;
        let da = da_c + dk * tc;

        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-6 {
            let (na, nk) = (a + lambda * da, k + lambda * dk);
            if na > 0.0 && nk > 0.0 {
                let nf = objective(na, nk);
                if nf < f {
                    if let Ok(r) = FitReport::evaluate(na, nk, &points, report.fit_window) {
                        a = na;
                        k = nk;
                        f = nf;
                        best = r;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Ok(best);
        }
    }
    Err(Error::DidNotConverge {
        iterations: REFINE_MAX_ITER,
        best: Box::new(best),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Breakpoint {
    Auto,
    Year(f64),
}

impl FromStr for Breakpoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(Breakpoint::Auto);
        }
        crate::data_io::parse_year(s)
            .map(Breakpoint::Year)
            .ok_or_else(|| Error::InvalidWindow(format!("bad breakpoint {s:?}")))
    }
}

impl fmt::Display for Breakpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Breakpoint::Auto => f.write_str("auto"),
            Breakpoint::Year(y) => write!(f, "{y}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BridgeDegree {
    Linear,
    Cubic,
}

impl BridgeDegree {
    pub fn from_degree(d: u8) -> Option<Self> {
        match d {
            1 => Some(BridgeDegree::Linear),
            3 => Some(BridgeDegree::Cubic),
            _ => None,
        }
    }
}

/// Polynomial in `(t - interval.lo)` covering a transition interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bridge {
    pub interval: YearWindow,
    /// Lowest power first.
    pub coefficients: Vec<f64>,
}

impl Bridge {
    pub fn eval(&self, year: f64) -> f64 {
        let x = year - self.interval.lo;
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn slope(&self, year: f64) -> f64 {
        let x = year - self.interval.lo;
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * x + i as f64 * c)
    }
}

/// Joins `left` at `interval.lo` to `right` at `interval.hi`.
///
/// Linear matches values; cubic is the Hermite interpolant matching values
/// and slopes.
pub fn interpolate_transition(
    left: &dyn Trajectory,
    right: &dyn Trajectory,
    interval: YearWindow,
    degree: BridgeDegree,
) -> Result<Bridge> {
    let y0 = left.value(interval.lo)?;
    let y1 = right.value(interval.hi)?;
    let h = interval.span();
    if h <= 0.0 {
        return Err(Error::InvalidWindow(format!("empty bridge interval {interval}")));
    }
    let coefficients = match degree {
        BridgeDegree::Linear => vec![y0, (y1 - y0) / h],
        BridgeDegree::Cubic => {
            let d0 = left.derivative(interval.lo)?;
            let d1 = right.derivative(interval.hi)?;
            let m = (y1 - y0) / h;
            vec![y0, d0, (3.0 * m - 2.0 * d0 - d1) / h, (d0 + d1 - 2.0 * m) / (h * h)]
        }
    };
    Ok(Bridge { interval, coefficients })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SegmentModel {
    Hyperbolic(HyperbolicModel),
    Ratio(RatioModel),
}

impl Trajectory for SegmentModel {
    fn value(&self, year: f64) -> Result<f64> {
        match self {
            SegmentModel::Hyperbolic(m) => m.value(year),
            SegmentModel::Ratio(m) => m.value(year),
        }
    }

    fn derivative(&self, year: f64) -> Result<f64> {
        match self {
            SegmentModel::Hyperbolic(m) => m.derivative(year),
            SegmentModel::Ratio(m) => m.derivative(year),
        }
    }

    fn relative_deviation(&self, year: f64, observed: f64) -> f64 {
        match self {
            SegmentModel::Hyperbolic(m) => m.relative_deviation(year, observed),
            SegmentModel::Ratio(m) => m.relative_deviation(year, observed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub window: YearWindow,
    pub model: SegmentModel,
}

/// Where a year falls on a piecewise trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Segment(usize),
    Bridge(usize),
}

/// Ordered segments joined by bridges. Before the first segment and after
/// the last one the nearest segment's model is extrapolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseTrajectory {
    segments: Vec<Segment>,
    bridges: Vec<Bridge>,
}

impl PiecewiseTrajectory {
    pub fn single(window: YearWindow, model: SegmentModel) -> Self {
        PiecewiseTrajectory {
            segments: vec![Segment { window, model }],
            bridges: Vec::new(),
        }
    }

    /// Two segments with a bridge over the gap between their windows.
    pub fn two_segment(left: Segment, right: Segment, degree: BridgeDegree) -> Result<Self> {
        if left.window.hi >= right.window.lo {
            return Err(Error::InvalidWindow(format!(
                "segment windows {} and {} are not disjoint and ordered",
                left.window, right.window
            )));
        }
        let interval = YearWindow::new(left.window.hi, right.window.lo)?;
        let bridge = interpolate_transition(&left.model, &right.model, interval, degree)?;
        Ok(PiecewiseTrajectory {
            segments: vec![left, right],
            bridges: vec![bridge],
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn bridges(&self) -> &[Bridge] {
        &self.bridges
    }

    pub fn locate(&self, year: f64) -> Location {
        if let Some(i) = self.segments.iter().position(|s| s.window.contains(year)) {
            return Location::Segment(i);
        }
        if let Some(i) = self
            .bridges
            .iter()
            .position(|b| year > b.interval.lo && year < b.interval.hi)
        {
            return Location::Bridge(i);
        }
        if year < self.segments[0].window.lo {
            Location::Segment(0)
        } else {
            Location::Segment(self.segments.len() - 1)
        }
    }
}

impl Trajectory for PiecewiseTrajectory {
    fn value(&self, year: f64) -> Result<f64> {
        match self.locate(year) {
            Location::Segment(i) => self.segments[i].model.value(year),
            Location::Bridge(i) => Ok(self.bridges[i].eval(year)),
        }
    }

    fn derivative(&self, year: f64) -> Result<f64> {
        match self.locate(year) {
            Location::Segment(i) => self.segments[i].model.derivative(year),
            Location::Bridge(i) => Ok(self.bridges[i].slope(year)),
        }
    }

    fn relative_deviation(&self, year: f64, observed: f64) -> f64 {
        match self.locate(year) {
            Location::Segment(i) => self.segments[i].model.relative_deviation(year, observed),
            Location::Bridge(i) => observed / self.bridges[i].eval(year) - 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConfig {
    pub window: YearWindow,
    pub breakpoint: Breakpoint,
    pub bridge_width: f64,
    pub degree: BridgeDegree,
}

impl Default for PiecewiseConfig {
    fn default() -> Self {
        PiecewiseConfig {
            window: DEFAULT_FIT_WINDOW,
            breakpoint: Breakpoint::Auto,
            bridge_width: DEFAULT_BRIDGE_WIDTH,
            degree: BridgeDegree::Cubic,
        }
    }
}

/// Result of a two-segment fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFit {
    pub breakpoint: f64,
    pub bridge_width: f64,
    pub left: FitReport,
    pub right: FitReport,
    pub trajectory: PiecewiseTrajectory,
    /// Sum of squared relative residuals of every observation in the window
    /// against the whole trajectory, bridge included.
    pub objective: f64,
}

/// Fits one hyperbola left of `b - width/2` and another right of
/// `b + width/2`, joined by a bridge.
///
/// With [`Breakpoint::Auto`] every observation year leaving at least three
/// points on each side is tried; the lowest trajectory objective wins and
/// ties go to the earliest year.
pub fn fit_piecewise(series: &GrowthSeries, config: &PiecewiseConfig) -> Result<PiecewiseFit> {
    if !(config.bridge_width > 0.0) {
        return Err(Error::InvalidWindow(format!(
            "bridge width must be positive, got {}",
            config.bridge_width
        )));
    }
    let points = series.in_window(&config.window);
    match config.breakpoint {
        Breakpoint::Year(b) => fit_at(&points, b, config),
        Breakpoint::Auto => {
            let half = config.bridge_width / 2.0;
            let mut best: Option<PiecewiseFit> = None;
            let mut last_err = None;
            for &(b, _) in &points {
                let left = points.iter().filter(|p| p.0 <= b - half).count();
                let right = points.iter().filter(|p| p.0 >= b + half).count();
                if left < MIN_POINTS || right < MIN_POINTS {
                    continue;
                }
                match fit_at(&points, b, config) {
                    Ok(fit) => {
                        if best.as_ref().is_none_or(|cur| fit.objective < cur.objective) {
                            best = Some(fit);
                        }
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            best.ok_or_else(|| {
                last_err.unwrap_or(Error::InsufficientData {
                    needed: 2 * MIN_POINTS,
                    found: points.len(),
                })
            })
        }
    }
}

fn fit_at(points: &[(f64, f64)], b: f64, config: &PiecewiseConfig) -> Result<PiecewiseFit> {
    let half = config.bridge_width / 2.0;
    let lo = points.first().map_or(config.window.lo, |p| p.0);
    let hi = points.last().map_or(config.window.hi, |p| p.0);
    let left_window = YearWindow::new(lo.min(b - half), b - half)?;
    let right_window = YearWindow::new(b + half, hi.max(b + half))?;

    let side = |w: &YearWindow| -> Result<Vec<(f64, f64)>> {
        let pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| w.contains(p.0)).collect();
        if pts.len() < MIN_POINTS {
            return Err(Error::InsufficientData {
                needed: MIN_POINTS,
                found: pts.len(),
            });
        }
        Ok(pts)
    };
    let left = fit_points(&side(&left_window)?, left_window)?;
    let right = fit_points(&side(&right_window)?, right_window)?;

    let left_model = left.model.with_window(left_window)?;
    // the late segment may reach its singularity inside the data
    let right_window = YearWindow::new(right_window.lo, right.model.window().hi.max(right_window.lo))?;
    let right_model = right.model.with_window(right_window)?;
    let trajectory = PiecewiseTrajectory::two_segment(
        Segment {
            window: left_window,
            model: SegmentModel::Hyperbolic(left_model),
        },
        Segment {
            window: right_window,
            model: SegmentModel::Hyperbolic(right_model),
        },
        config.degree,
    )?;
    let objective = points
        .iter()
        .map(|&(t, v)| trajectory.relative_deviation(t, v).powi(2))
        .sum();
    Ok(PiecewiseFit {
        breakpoint: b,
        bridge_width: config.bridge_width,
        left,
        right,
        trajectory,
        objective,
    })
}

/// Either a single hyperbola or a two-segment fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ComponentFit {
    Single(FitReport),
    Piecewise(PiecewiseFit),
}

impl ComponentFit {
    pub fn trajectory(&self) -> PiecewiseTrajectory {
        match self {
            ComponentFit::Single(r) => PiecewiseTrajectory::single(r.model.window(), SegmentModel::Hyperbolic(r.model)),
            ComponentFit::Piecewise(p) => p.trajectory.clone(),
        }
    }

    /// The last (latest) fitted hyperbola.
    pub fn last(&self) -> &FitReport {
        match self {
            ComponentFit::Single(r) => r,
            ComponentFit::Piecewise(p) => &p.right,
        }
    }

    pub fn first(&self) -> &FitReport {
        match self {
            ComponentFit::Single(r) => r,
            ComponentFit::Piecewise(p) => &p.left,
        }
    }
}

/// GDP/cap trajectory built from independent GDP and population fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioFit {
    pub gdp: ComponentFit,
    pub pop: ComponentFit,
    pub trajectory: PiecewiseTrajectory,
    pub years: Vec<f64>,
    /// Relative residuals of observed GDP/cap against the trajectory.
    pub residuals: Vec<f64>,
}

impl RatioFit {
    /// Ratio model of the earliest segment pair.
    pub fn first_model(&self) -> RatioModel {
        match self.trajectory.segments()[0].model {
            SegmentModel::Ratio(r) => r,
            SegmentModel::Hyperbolic(_) => unreachable!("ratio trajectories hold ratio segments"),
        }
    }

    /// Ratio model of the latest segment pair.
    pub fn last_model(&self) -> RatioModel {
        match self.trajectory.segments().last().map(|s| s.model) {
            Some(SegmentModel::Ratio(r)) => r,
            _ => unreachable!("ratio trajectories hold ratio segments"),
        }
    }
}

/// Fits GDP and population independently over `window` and composes them.
pub fn fit_ratio(gdp: &GrowthSeries, pop: &GrowthSeries, window: &YearWindow) -> Result<RatioFit> {
    let g = fit_hyperbolic(gdp, window)?;
    let p = fit_hyperbolic(pop, window)?;
    compose_ratio(
        ComponentFit::Single(g),
        ComponentFit::Single(p),
        gdp,
        pop,
        BridgeDegree::Cubic,
    )
}

/// Pairs component segments into ratio segments.
///
/// When either component is piecewise the ratio has two segments; the gap
/// between them spans both components' transition intervals.
pub fn compose_ratio(
    gdp_fit: ComponentFit,
    pop_fit: ComponentFit,
    gdp: &GrowthSeries,
    pop: &GrowthSeries,
    degree: BridgeDegree,
) -> Result<RatioFit> {
    let trajectory = match (&gdp_fit, &pop_fit) {
        (ComponentFit::Single(g), ComponentFit::Single(p)) => {
            let r = RatioModel::new(g.model, p.model)?;
            PiecewiseTrajectory::single(r.window(), SegmentModel::Ratio(r))
        }
        _ => {
            let gap_lo = gap_edge(&gdp_fit, true).min(gap_edge(&pop_fit, true));
            let gap_hi = gap_edge(&gdp_fit, false).max(gap_edge(&pop_fit, false));
            let lo = gdp_fit.first().model.window().lo.max(pop_fit.first().model.window().lo);
            let hi = gdp_fit.last().model.window().hi.min(pop_fit.last().model.window().hi);
            let left_window = YearWindow::new(lo.min(gap_lo), gap_lo)?;
            let right_window = YearWindow::new(gap_hi, hi.max(gap_hi))?;
            let left = RatioModel::new(
                gdp_fit.first().model.with_window(left_window)?,
                pop_fit.first().model.with_window(left_window)?,
            )?;
            let right = RatioModel::new(
                gdp_fit.last().model.with_window(right_window)?,
                pop_fit.last().model.with_window(right_window)?,
            )?;
            PiecewiseTrajectory::two_segment(
                Segment {
                    window: left_window,
                    model: SegmentModel::Ratio(left),
                },
                Segment {
                    window: right_window,
                    model: SegmentModel::Ratio(right),
                },
                degree,
            )?
        }
    };

    let window = YearWindow::new(
        gdp_fit.first().fit_window.lo.max(pop_fit.first().fit_window.lo),
        gdp_fit.last().fit_window.hi.min(pop_fit.last().fit_window.hi),
    )?;
    let per_capita = derive_per_capita(gdp, pop)?.restrict(&window);
    let years = per_capita.years();
    let residuals = per_capita
        .points()
        .iter()
        .map(|&(t, v)| trajectory.relative_deviation(t, v))
        .collect();
    Ok(RatioFit {
        gdp: gdp_fit,
        pop: pop_fit,
        trajectory,
        years,
        residuals,
    })
}

/// Start (`lower`) or end of a component's transition interval. A single
/// fit has no transition, so it never narrows the gap.
fn gap_edge(fit: &ComponentFit, lower: bool) -> f64 {
    match fit {
        ComponentFit::Piecewise(p) => {
            let half = p.bridge_width / 2.0;
            if lower {
                p.breakpoint - half
            } else {
                p.breakpoint + half
            }
        }
        ComponentFit::Single(_) => {
            if lower {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_io::{synthesize_hyperbolic, SeriesKind, Unit};

    const MADDISON_YEARS: [f64; 10] = [
        1.0, 1000.0, 1500.0, 1600.0, 1700.0, 1820.0, 1870.0, 1913.0, 1950.0, 1960.0,
    ];

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn exact_round_trip() {
        let years = [1.0, 1000.0, 1500.0, 1820.0, 1900.0, 1950.0];
        let s = synthesize_hyperbolic(7.739, 3.765e-3, &years, 0.0, 0).unwrap();
        let r = fit_hyperbolic(&s, &YearWindow::unbounded()).unwrap();
        assert!(rel(r.model.a(), 7.739) < 1e-9);
        assert!(rel(r.model.k(), 3.765e-3) < 1e-9);
        assert!(r.r_squared_reciprocal > 1.0 - 1e-12);
        assert_eq!(r.n_points, 6);
        assert_eq!(r.residuals.len(), 6);
        assert_eq!(r.model.window(), YearWindow::new(1.0, 1950.0).unwrap());
    }

    #[test]
    fn africa_population_refit_singularity() {
        let s = synthesize_hyperbolic(5.794e1, 2.473e-2, &MADDISON_YEARS, 0.0, 0).unwrap();
        let r = fit_hyperbolic(&s, &YearWindow::unbounded()).unwrap();
        assert!((r.model.singularity_time().unwrap() - 2343.0).abs() < 1.0);
    }

    #[test]
    fn zero_value_is_rejected() {
        assert!(matches!(
            GrowthSeries::new(
                "z",
                SeriesKind::Gdp,
                Unit::MillionGK1990Dollars,
                vec![(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]
            ),
            Err(Error::NonPositiveValue { .. })
        ));
    }

    #[test]
    fn insufficient_and_non_hyperbolic() {
        let s = synthesize_hyperbolic(1.0, 1e-4, &[1.0, 2.0], 0.0, 0).unwrap();
        assert!(matches!(
            fit_hyperbolic(&s, &YearWindow::unbounded()),
            Err(Error::InsufficientData { needed: 3, found: 2 })
        ));
        let decaying = GrowthSeries::new(
            "d",
            SeriesKind::Population,
            Unit::MillionPersons,
            vec![(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)],
        )
        .unwrap();
        assert!(matches!(
            fit_hyperbolic(&decaying, &YearWindow::unbounded()),
            Err(Error::NonHyperbolic { .. })
        ));
        let empty = YearWindow::new(5000.0, 6000.0).unwrap();
        let s = synthesize_hyperbolic(1.0, 1e-4, &[1.0, 2.0, 3.0], 0.0, 0).unwrap();
        assert!(matches!(
            fit_hyperbolic(&s, &empty),
            Err(Error::InsufficientData { found: 0, .. })
        ));
    }

    #[test]
    fn validity_window_stops_before_singularity() {
        // the line through these reciprocals reaches zero at 4.41
        let s = GrowthSeries::new(
            "s",
            SeriesKind::Population,
            Unit::MillionPersons,
            vec![
                (0.0, 1.0),
                (1.0, 1.25),
                (2.0, 2.0),
                (3.0, 5.0),
                (4.0, 100.0),
                (5.0, 1000.0),
            ],
        )
        .unwrap();
        let r = fit_hyperbolic(&s, &YearWindow::unbounded()).unwrap();
        let ts = r.model.singularity_time().unwrap();
        assert!((ts - 4.41096).abs() < 1e-4, "{ts}");
        assert_eq!(r.model.window().hi, 4.0);
        assert_eq!(r.n_points, 6);
        assert!(r.residuals[5] < 0.0);
    }

    #[test]
    fn refine_is_fixed_point_on_exact_data() {
        let s = synthesize_hyperbolic(0.1244, 5.03e-5, &MADDISON_YEARS, 0.0, 0).unwrap();
        let r = fit_hyperbolic(&s, &YearWindow::unbounded()).unwrap();
        let refined = refine_fit(&r, &s).unwrap();
        assert!(rel(refined.model.a(), r.model.a()) < 1e-12);
        assert!(rel(refined.model.k(), r.model.k()) < 1e-12);
        // a second pass starts at the minimum and must not move
        let again = refine_fit(&refined, &s).unwrap();
        assert_eq!(again, refined);
    }

    #[test]
    fn refine_lowers_relative_objective() {
        let years: Vec<f64> = (0..12).map(|i| 1000.0 + 80.0 * i as f64).collect();
        let exact = synthesize_hyperbolic(7.739, 3.765e-3, &years, 0.0, 0).unwrap();
        let noisy: Vec<(f64, f64)> = exact
            .points()
            .iter()
            .enumerate()
            .map(|(i, &(t, v))| {
                let late = i >= 8;
                let e = if late {
                    if i % 2 == 0 {
                        0.05
                    } else {
                        -0.05
                    }
                } else {
                    0.0
                };
                (t, v * (1.0 + e))
            })
            .collect();
        let s = exact
            .relabel("n", SeriesKind::Population, Unit::MillionPersons)
            .unwrap();
        let s = GrowthSeries::new(s.region(), s.kind(), s.unit(), noisy).unwrap();
        let ols = fit_hyperbolic(&s, &YearWindow::unbounded()).unwrap();
        let refined = refine_fit(&ols, &s).unwrap();
        assert!(refined.objective() <= ols.objective());
        assert!(refined.model.a() > 0.0 && refined.model.k() > 0.0);
    }

    #[test]
    fn bridges_match_endpoints() {
        let m = HyperbolicModel::unbounded(0.1244, 5.03e-5).unwrap();
        let w = YearWindow::new(1820.0, 1840.0).unwrap();
        for degree in [BridgeDegree::Linear, BridgeDegree::Cubic] {
            let b = interpolate_transition(&m, &m, w, degree).unwrap();
            assert!(rel(b.eval(1820.0), m.eval(1820.0).unwrap()) < 1e-12);
            assert!(rel(b.eval(1840.0), m.eval(1840.0).unwrap()) < 1e-12);
        }
        let b = interpolate_transition(&m, &m, w, BridgeDegree::Cubic).unwrap();
        assert!(rel(b.slope(1820.0), m.slope(1820.0).unwrap()) < 1e-9);
        assert!(rel(b.slope(1840.0), m.slope(1840.0).unwrap()) < 1e-9);
    }

    #[test]
    fn bridge_fails_past_singularity() {
        let m = HyperbolicModel::unbounded(1.0, 1e-3).unwrap();
        let w = YearWindow::new(990.0, 1010.0).unwrap();
        assert!(matches!(
            interpolate_transition(&m, &m, w, BridgeDegree::Linear),
            Err(Error::SingularityReached { .. })
        ));
    }

    #[test]
    fn piecewise_on_single_regime() {
        let years: Vec<f64> = (0..15).map(|i| 1.0 + 130.0 * i as f64).collect();
        let s = synthesize_hyperbolic(5.794e1, 2.473e-2, &years, 0.0, 0).unwrap();
        let cfg = PiecewiseConfig {
            window: YearWindow::unbounded(),
            ..PiecewiseConfig::default()
        };
        let p = fit_piecewise(&s, &cfg).unwrap();
        assert!(rel(p.left.model.a(), p.right.model.a()) < 1e-6);
        assert!(rel(p.left.model.k(), p.right.model.k()) < 1e-6);
    }

    #[test]
    fn piecewise_recovers_regime_change() {
        // slow regime up to 1800, fast regime from 1820 on
        let slow = HyperbolicModel::unbounded(0.1244, 5.03e-5).unwrap();
        let fast = HyperbolicModel::unbounded(0.4192, 2.126e-4).unwrap();
        let mut points = Vec::new();
        for i in 0..10 {
            let t = 1000.0 + 80.0 * i as f64;
            points.push((t, slow.eval(t).unwrap()));
        }
        for t in [1820.0, 1850.0, 1870.0, 1900.0, 1913.0, 1930.0, 1950.0] {
            points.push((t, fast.eval(t).unwrap()));
        }
        let s = GrowthSeries::new("r", SeriesKind::Gdp, Unit::BillionGK1990Dollars, points).unwrap();
        let cfg = PiecewiseConfig {
            window: YearWindow::unbounded(),
            ..PiecewiseConfig::default()
        };
        let p = fit_piecewise(&s, &cfg).unwrap();
        assert!(
            p.breakpoint == 1720.0 || p.breakpoint == 1800.0 || p.breakpoint == 1820.0,
            "{}",
            p.breakpoint
        );
        assert!(rel(p.right.model.k(), 2.126e-4) < 0.05);
    }

    #[test]
    fn fixed_breakpoint_windows() {
        let years: Vec<f64> = (0..12).map(|i| 1.0 + 170.0 * i as f64).collect();
        let s = synthesize_hyperbolic(7.739, 3.765e-3, &years, 0.0, 0).unwrap();
        let cfg = PiecewiseConfig {
            window: YearWindow::unbounded(),
            breakpoint: Breakpoint::Year(1000.0),
            bridge_width: 100.0,
            degree: BridgeDegree::Linear,
        };
        let p = fit_piecewise(&s, &cfg).unwrap();
        let segs = p.trajectory.segments();
        assert_eq!(segs[0].window.hi, 950.0);
        assert_eq!(segs[1].window.lo, 1050.0);
        assert_eq!(
            p.trajectory.bridges()[0].interval,
            YearWindow::new(950.0, 1050.0).unwrap()
        );
        assert_eq!(p.trajectory.locate(1000.0), Location::Bridge(0));
        assert_eq!(p.trajectory.locate(5.0), Location::Segment(0));
        assert_eq!(p.trajectory.locate(1900.0), Location::Segment(1));

        let cfg = PiecewiseConfig {
            breakpoint: Breakpoint::Year(200.0),
            ..cfg
        };
        assert!(matches!(fit_piecewise(&s, &cfg), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn ratio_of_identical_series_is_one() {
        let years = [1.0, 500.0, 1000.0, 1500.0];
        let pop = synthesize_hyperbolic(7.739, 3.765e-3, &years, 0.0, 0).unwrap();
        let gdp = pop
            .clone()
            .relabel("synthetic", SeriesKind::Gdp, Unit::MillionGK1990Dollars)
            .unwrap();
        let fit = fit_ratio(&gdp, &pop, &YearWindow::unbounded()).unwrap();
        for t in [1.0, 700.0, 1500.0] {
            assert!((fit.trajectory.value(t).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
        assert!(matches!(
            fit_ratio(&gdp, &pop, &YearWindow::new(3000.0, 4000.0).unwrap()),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn breakpoint_parsing() {
        assert_eq!("auto".parse::<Breakpoint>().unwrap(), Breakpoint::Auto);
        assert_eq!("1550".parse::<Breakpoint>().unwrap(), Breakpoint::Year(1550.0));
        assert!("soon".parse::<Breakpoint>().is_err());
    }
}
