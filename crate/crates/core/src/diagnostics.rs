//! Reciprocal linearity, stagnation, takeoff and divergence checks.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data_io::{derive_per_capita, GrowthSeries};
use crate::error::{Error, Result};
use crate::fitting::{fit_hyperbolic, RatioFit};
use crate::linreg;
use crate::model::{HyperbolicModel, RatioModel, Trajectory, YearWindow};

pub const DEFAULT_CANDIDATES: [f64; 2] = [1750.0, 1900.0];

/// Above this many residuals the sign-run null is simulated.
pub const EXACT_RUNS_LIMIT: usize = 20;

const MIN_STAGNATION_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticConfig {
    /// Relative deviation counted as a departure from trend.
    pub threshold: f64,
    /// Consecutive departures needed to call a divergence.
    pub persistence: usize,
    /// Trend counts as flat when `k * span / a` is below this.
    pub flatness: f64,
    /// Step-to-step relative change that counts as a real up or down move.
    pub oscillation_amplitude: f64,
    /// Length of the stagnation window before a takeoff candidate; `None`
    /// reaches back to the first observation.
    pub pre_window: Option<f64>,
    pub post_window: f64,
    /// When set, a takeoff also requires the data not to come back to the
    /// old trend within this many years after the post window.
    pub return_window: Option<f64>,
    pub simulations: usize,
    pub seed: u64,
}

impl Default for DiagnosticConfig {
    fn default() -> Self {
        DiagnosticConfig {
            threshold: 0.10,
            persistence: 3,
            flatness: 0.05,
            oscillation_amplitude: 0.10,
            pre_window: None,
            post_window: 100.0,
            return_window: None,
            simulations: 100_000,
            seed: 0x5eed,
        }
    }
}

/// R^2 of the least-squares line through `(t, 1/value)`.
pub fn reciprocal_linearity(series: &GrowthSeries, window: &YearWindow) -> Result<f64> {
    let points = series.in_window(window);
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            found: points.len(),
        });
    }
    if let Some(&(year, value)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::NonPositiveValue { year, value });
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| 1.0 / p.1).collect();
    linreg::ols(&x, &y)
        .map(|f| f.r_squared)
        .ok_or(Error::InsufficientData { needed: 3, found: 1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StagnationReason {
    /// The trend is not a growing hyperbola.
    NonHyperbolic,
    /// The fitted trend barely moves over the window.
    Flat,
    /// Residual signs look random and the series swings up and down.
    Oscillating,
    /// None of the above: the series grows along its trend.
    Growing,
}

/// How much the sign-run statistic can tell with this many points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerClass {
    Low,
    Moderate,
    High,
}

impl PowerClass {
    pub fn for_points(n: usize) -> Self {
        match n {
            0..=7 => PowerClass::Low,
            8..=19 => PowerClass::Moderate,
            _ => PowerClass::High,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stagnation {
    pub verdict: Verdict,
    pub reason: StagnationReason,
    pub window: YearWindow,
    pub n_points: usize,
    /// `k * span / a` of the trend; for a ratio trend the smaller of the two
    /// components. `None` when the trend is not hyperbolic.
    pub flatness: Option<f64>,
    pub sign_runs: usize,
    /// Central 90% range of the run count under random signs.
    pub runs_interval: (usize, usize),
    /// Two-sided tail probability of the observed run count.
    pub runs_p_value: f64,
    /// Direction changes among significant consecutive moves.
    pub reversals: usize,
    pub power: PowerClass,
}

impl Stagnation {
    pub fn is_present(&self) -> bool {
        self.verdict == Verdict::Present
    }
}

/// Number of runs of equal sign. Zero counts as positive.
pub fn sign_runs(residuals: &[f64]) -> usize {
    if residuals.is_empty() {
        return 0;
    }
    1 + residuals.windows(2).filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0)).count()
}

/// Probability of each run count `0..=n` for `n` independent fair signs.
///
/// Exact enumeration up to [`EXACT_RUNS_LIMIT`], seeded simulation beyond.
pub fn runs_null_distribution(n: usize, simulations: usize, seed: u64) -> Vec<f64> {
    let mut counts = vec![0u64; n + 1];
    if n == 0 {
        counts[0] = 1;
        return vec![1.0];
    }
    let total = if n <= EXACT_RUNS_LIMIT {
        let mask: u64 = (1u64 << (n - 1)) - 1;
        for x in 0u64..(1u64 << n) {
            let changes = ((x ^ (x >> 1)) & mask).count_ones() as usize;
            counts[1 + changes] += 1;
        }
        1u64 << n
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..simulations {
            let mut prev: bool = rng.gen();
            let mut runs = 1;
            for _ in 1..n {
                let s: bool = rng.gen();
                if s != prev {
                    runs += 1;
                }
                prev = s;
            }
            counts[runs] += 1;
        }
        simulations.max(1) as u64
    };
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

fn runs_summary(runs: usize, n: usize, cfg: &DiagnosticConfig) -> ((usize, usize), f64) {
    let pmf = runs_null_distribution(n, cfg.simulations, cfg.seed);
    let mut cdf = 0.0;
    let mut lo = None;
    let mut hi = None;
    for (r, p) in pmf.iter().enumerate() {
        cdf += p;
        if lo.is_none() && cdf >= 0.05 {
            lo = Some(r);
        }
        if hi.is_none() && cdf >= 0.95 {
            hi = Some(r);
        }
    }
    let below: f64 = pmf[..=runs.min(n)].iter().sum();
    let above: f64 = pmf[runs.min(n)..].iter().sum();
    let p = (2.0 * below.min(above)).min(1.0);
    ((lo.unwrap_or(0), hi.unwrap_or(n)), p)
}

/// Direction changes between consecutive moves larger than `amplitude`
/// (relative). Small moves are ignored.
pub fn significant_reversals(values: &[f64], amplitude: f64) -> usize {
    let mut last: Option<bool> = None;
    let mut reversals = 0;
    for w in values.windows(2) {
        let change = w[1] / w[0] - 1.0;
        if change.abs() <= amplitude {
            continue;
        }
        let up = change > 0.0;
        if let Some(prev) = last {
            if prev != up {
                reversals += 1;
            }
        }
        last = Some(up);
    }
    reversals
}

fn stagnation_points(series: &GrowthSeries, window: &YearWindow) -> Result<Vec<(f64, f64)>> {
    let points = series.in_window(window);
    if points.len() < MIN_STAGNATION_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_STAGNATION_POINTS,
            found: points.len(),
        });
    }
    Ok(points)
}

fn span(points: &[(f64, f64)]) -> f64 {
    points[points.len() - 1].0 - points[0].0
}

fn verdict_from(
    points: &[(f64, f64)],
    trend: Option<(&dyn Trajectory, f64)>,
    window: YearWindow,
    cfg: &DiagnosticConfig,
) -> Stagnation {
    let n = points.len();
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();
    let reversals = significant_reversals(&values, cfg.oscillation_amplitude);
    let (sign_runs, runs_interval, runs_p_value, flatness) = match trend {
        Some((model, flatness)) => {
            let residuals: Vec<f64> = points.iter().map(|&(t, v)| model.relative_deviation(t, v)).collect();
            let runs = sign_runs(&residuals);
            let (interval, p) = runs_summary(runs, n, cfg);
            (runs, interval, p, Some(flatness))
        }
        None => (0, (0, 0), 1.0, None),
    };
    let reason = match flatness {
        None => StagnationReason::NonHyperbolic,
        Some(f) if f < cfg.flatness => StagnationReason::Flat,
        Some(_) => {
            let random_signs = sign_runs >= runs_interval.0 && sign_runs <= runs_interval.1;
            if random_signs && reversals >= 2 {
                StagnationReason::Oscillating
            } else {
                StagnationReason::Growing
            }
        }
    };
    Stagnation {
        verdict: if reason == StagnationReason::Growing {
            Verdict::Absent
        } else {
            Verdict::Present
        },
        reason,
        window,
        n_points: n,
        flatness,
        sign_runs,
        runs_interval,
        runs_p_value,
        reversals,
        power: PowerClass::for_points(n),
    }
}

/// Stagnation check against a hyperbolic trend fitted to the series itself.
pub fn stagnation_test(series: &GrowthSeries, window: &YearWindow, cfg: &DiagnosticConfig) -> Result<Stagnation> {
    let points = stagnation_points(series, window)?;
    match fit_hyperbolic(series, window) {
        Ok(fit) => {
            let m = fit.model;
            let flatness = m.k() * span(&points) / m.a();
            Ok(verdict_from(&points, Some((&m, flatness)), *window, cfg))
        }
        Err(Error::NonHyperbolic { .. }) => Ok(verdict_from(&points, None, *window, cfg)),
        Err(e) => Err(e),
    }
}

/// Stagnation check on GDP/cap against the ratio of separate GDP and
/// population fits. Either component failing to grow hyperbolically, or
/// being flat, counts as stagnation.
pub fn stagnation_test_per_capita(
    gdp: &GrowthSeries,
    pop: &GrowthSeries,
    window: &YearWindow,
    cfg: &DiagnosticConfig,
) -> Result<Stagnation> {
    let per_capita = derive_per_capita(gdp, pop)?;
    let points = stagnation_points(&per_capita, window)?;
    match ratio_trend(gdp, pop, window) {
        Ok((model, g_span, p_span)) => {
            let flatness = (model.gdp().k() * g_span / model.gdp().a()).min(model.pop().k() * p_span / model.pop().a());
            Ok(verdict_from(&points, Some((&model, flatness)), *window, cfg))
        }
        Err(Error::NonHyperbolic { .. }) => Ok(verdict_from(&points, None, *window, cfg)),
        Err(e) => Err(e),
    }
}

fn ratio_trend(gdp: &GrowthSeries, pop: &GrowthSeries, window: &YearWindow) -> Result<(RatioModel, f64, f64)> {
    let g = fit_hyperbolic(gdp, window)?;
    let p = fit_hyperbolic(pop, window)?;
    let g_span = g.model.window().span();
    let p_span = p.model.window().span();
    Ok((RatioModel::new(g.model, p.model)?, g_span, p_span))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TakeoffVerdict {
    Detected,
    NotDetected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Takeoff {
    pub verdict: TakeoffVerdict,
    pub candidate: f64,
    pub stagnation: Stagnation,
    /// Smallest relative excess of post-window data over the extrapolated
    /// pre-window trend. Only computed when the pre-window is stagnant.
    pub min_post_excess: Option<f64>,
}

impl Takeoff {
    pub fn is_detected(&self) -> bool {
        self.verdict == TakeoffVerdict::Detected
    }
}

fn pre_window(series: &GrowthSeries, candidate: f64, cfg: &DiagnosticConfig) -> Result<YearWindow> {
    let lo = match cfg.pre_window {
        Some(w) => candidate - w,
        None => series.first_year().unwrap_or(candidate),
    };
    YearWindow::new(lo.min(candidate), candidate)
}

fn post_points(series: &GrowthSeries, candidate: f64, cfg: &DiagnosticConfig) -> Result<Vec<(f64, f64)>> {
    let post: Vec<(f64, f64)> = series
        .points()
        .iter()
        .copied()
        .filter(|p| p.0 > candidate && p.0 <= candidate + cfg.post_window)
        .collect();
    if post.is_empty() {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    Ok(post)
}

fn constant_trend(points: &[(f64, f64)]) -> Result<HyperbolicModel> {
    let mean = points.iter().map(|p| 1.0 / p.1).sum::<f64>() / points.len() as f64;
    HyperbolicModel::unbounded(mean, 0.0)
}

fn takeoff_verdict(
    series: &GrowthSeries,
    candidate: f64,
    stagnation: Stagnation,
    trend: &dyn Trajectory,
    cfg: &DiagnosticConfig,
) -> Result<Takeoff> {
    let post = post_points(series, candidate, cfg)?;
    if !stagnation.is_present() {
        return Ok(Takeoff {
            verdict: TakeoffVerdict::NotDetected,
            candidate,
            stagnation,
            min_post_excess: None,
        });
    }
    let min_excess = post
        .iter()
        .map(|&(t, v)| trend.relative_deviation(t, v))
        .fold(f64::INFINITY, f64::min);
    let mut detected = min_excess > cfg.threshold;
    if let (true, Some(rw)) = (detected, cfg.return_window) {
        let end = candidate + cfg.post_window;
        let returned = series
            .points()
            .iter()
            .filter(|p| p.0 > end && p.0 <= end + rw)
            .any(|&(t, v)| trend.relative_deviation(t, v).abs() <= cfg.threshold);
        detected = !returned;
    }
    Ok(Takeoff {
        verdict: if detected {
            TakeoffVerdict::Detected
        } else {
            TakeoffVerdict::NotDetected
        },
        candidate,
        stagnation,
        min_post_excess: Some(min_excess),
    })
}

/// Takeoff at `candidate`: the pre-window is stagnant and every post-window
/// point sits more than `threshold` above the extrapolated pre-window trend.
pub fn takeoff_test(series: &GrowthSeries, candidate: f64, cfg: &DiagnosticConfig) -> Result<Takeoff> {
    let pre = pre_window(series, candidate, cfg)?;
    let stagnation = stagnation_test(series, &pre, cfg)?;
    let trend = match fit_hyperbolic(series, &pre) {
        Ok(fit) => fit.model,
        Err(Error::NonHyperbolic { .. }) => constant_trend(&series.in_window(&pre))?,
        Err(e) => return Err(e),
    };
    takeoff_verdict(series, candidate, stagnation, &trend, cfg)
}

/// [`takeoff_test`] on GDP/cap, with the pre-window trend taken from the
/// component fits.
pub fn takeoff_test_per_capita(
    gdp: &GrowthSeries,
    pop: &GrowthSeries,
    candidate: f64,
    cfg: &DiagnosticConfig,
) -> Result<Takeoff> {
    let per_capita = derive_per_capita(gdp, pop)?;
    let pre = pre_window(&per_capita, candidate, cfg)?;
    let stagnation = stagnation_test_per_capita(gdp, pop, &pre, cfg)?;
    match ratio_trend(gdp, pop, &pre) {
        Ok((model, _, _)) => takeoff_verdict(&per_capita, candidate, stagnation, &model, cfg),
        Err(Error::NonHyperbolic { .. }) => {
            let flat = constant_trend(&per_capita.in_window(&pre))?;
            takeoff_verdict(&per_capita, candidate, stagnation, &flat, cfg)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Slower,
    Faster,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Slower => f.write_str("Slower"),
            Direction::Faster => f.write_str("Faster"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub year: f64,
    pub direction: Direction,
}

/// Earliest year, at or after `from`, that starts a run of `persistence`
/// consecutive observations all deviating from `model` by more than
/// `threshold` in the same direction.
pub fn detect_divergence(
    series: &GrowthSeries,
    model: &dyn Trajectory,
    from: f64,
    threshold: f64,
    persistence: usize,
) -> Result<Option<Divergence>> {
    let persistence = persistence.max(1);
    let points: Vec<(f64, f64)> = series.points().iter().copied().filter(|p| p.0 >= from).collect();
    if points.len() < persistence {
        return Err(Error::InsufficientData {
            needed: persistence,
            found: points.len(),
        });
    }
    let flags: Vec<Option<Direction>> = points
        .iter()
        .map(|&(t, v)| {
            let d = model.relative_deviation(t, v);
            if d > threshold {
                Some(Direction::Faster)
            } else if d < -threshold {
                Some(Direction::Slower)
            } else {
                None
            }
        })
        .collect();
    for start in 0..=(flags.len() - persistence) {
        if let Some(dir) = flags[start] {
            if flags[start..start + persistence].iter().all(|f| *f == Some(dir)) {
                return Ok(Some(Divergence {
                    year: points[start].0,
                    direction: dir,
                }));
            }
        }
    }
    Ok(None)
}

/// Full battery for one series or one region's GDP/cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    pub reciprocal_r2: f64,
    pub stagnation: Stagnation,
    pub takeoffs: Vec<Takeoff>,
    pub divergence: Option<Divergence>,
}

impl Diagnosis {
    pub fn any_takeoff(&self) -> bool {
        self.takeoffs.iter().any(Takeoff::is_detected)
    }
}

/// Runs every check on a region's GDP/cap.
///
/// Stagnation is judged from the first observation to the latest candidate;
/// divergence is measured against the latest segment of `fit`.
pub fn diagnose_per_capita(
    gdp: &GrowthSeries,
    pop: &GrowthSeries,
    fit: &RatioFit,
    candidates: &[f64],
    cfg: &DiagnosticConfig,
) -> Result<Diagnosis> {
    let per_capita = derive_per_capita(gdp, pop)?;
    let first = per_capita.first_year().ok_or(Error::NoCommonYears)?;
    let last_candidate = candidates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let stag_window = YearWindow::new(
        first,
        if last_candidate.is_finite() {
            last_candidate
        } else {
            f64::MAX
        },
    )?;
    let stagnation = stagnation_test_per_capita(gdp, pop, &stag_window, cfg)?;
    let takeoffs = candidates
        .iter()
        .map(|&c| takeoff_test_per_capita(gdp, pop, c, cfg))
        .collect::<Result<Vec<_>>>()?;
    let last = fit.last_model();
    let divergence = detect_divergence(&per_capita, &last, last.window().lo, cfg.threshold, cfg.persistence)?;
    Ok(Diagnosis {
        reciprocal_r2: reciprocal_linearity(&per_capita, &YearWindow::unbounded())?,
        stagnation,
        takeoffs,
        divergence,
    })
}

/// Runs every check on a single series against its own fit.
pub fn diagnose_series(
    series: &GrowthSeries,
    model: &HyperbolicModel,
    candidates: &[f64],
    cfg: &DiagnosticConfig,
) -> Result<Diagnosis> {
    let first = series
        .first_year()
        .ok_or(Error::InsufficientData { needed: 5, found: 0 })?;
    let last_candidate = candidates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let stag_window = YearWindow::new(
        first,
        if last_candidate.is_finite() {
            last_candidate
        } else {
            f64::MAX
        },
    )?;
    let stagnation = stagnation_test(series, &stag_window, cfg)?;
    let takeoffs = candidates
        .iter()
        .map(|&c| takeoff_test(series, c, cfg))
        .collect::<Result<Vec<_>>>()?;
    let divergence = detect_divergence(series, model, model.window().lo, cfg.threshold, cfg.persistence)?;
    Ok(Diagnosis {
        reciprocal_r2: reciprocal_linearity(series, &YearWindow::unbounded())?,
        stagnation,
        takeoffs,
        divergence,
    })
}
