//! Hyperbolic growth `S(t) = 1 / (a - k t)` and the ratio of two such curves.
//!
//! Years are real numbers in astronomical numbering (year 0 is 1 BC). All
//! types here are immutable once built; every operation is a pure function.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Component, Error, Result};

/// Closed interval of years `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearWindow {
    pub lo: f64,
    pub hi: f64,
}

impl YearWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidWindow(format!("non-finite bound {lo}:{hi}")));
        }
        if lo > hi {
            return Err(Error::InvalidWindow(format!("{lo} > {hi}")));
        }
        Ok(YearWindow { lo, hi })
    }

    /// Window covering every representable year.
    pub fn unbounded() -> Self {
        YearWindow {
            lo: f64::MIN,
            hi: f64::MAX,
        }
    }

    pub fn contains(&self, year: f64) -> bool {
        year >= self.lo && year <= self.hi
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn intersect(&self, other: &YearWindow) -> Option<YearWindow> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(YearWindow { lo, hi })
    }
}

impl fmt::Display for YearWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl std::str::FromStr for YearWindow {
    type Err = Error;

    /// Parses `LO:HI`.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidWindow(format!("expected LO:HI, got {s:?}")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidWindow(format!("bad year {v:?}")))
        };
        YearWindow::new(parse(lo)?, parse(hi)?)
    }
}

/// Anything that yields a value and a slope at a given year.
pub trait Trajectory {
    fn value(&self, year: f64) -> Result<f64>;
    fn derivative(&self, year: f64) -> Result<f64>;

    /// `observed / model - 1`, defined even where the model has diverged.
    ///
    /// Past a singularity that sends the model to infinity the deviation is
    /// `-1`; past one that sends it to zero it is `+inf`.
    fn relative_deviation(&self, year: f64, observed: f64) -> f64 {
        match self.value(year) {
            Ok(v) => observed / v - 1.0,
            Err(_) => -1.0,
        }
    }
}

/// `S(t) = 1 / (a - k t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicModel {
    a: f64,
    k: f64,
    window: YearWindow,
}

impl HyperbolicModel {
    /// Requires `a > 0`, `k >= 0` and, when `k > 0`, a singularity strictly
    /// after the end of `window`.
    pub fn new(a: f64, k: f64, window: YearWindow) -> Result<Self> {
        if !a.is_finite() || !k.is_finite() {
            return Err(Error::InvalidModel(format!("non-finite parameters a={a}, k={k}")));
        }
        if a <= 0.0 {
            return Err(Error::InvalidModel(format!("a must be positive, got {a}")));
        }
        if k < 0.0 {
            return Err(Error::InvalidModel(format!(
                "k must be non-negative (decaying hyperbolas are not modelled), got {k}"
            )));
        }
        if k > 0.0 && a / k <= window.hi {
            return Err(Error::InvalidModel(format!(
                "singularity {} lies inside the window {window}",
                a / k
            )));
        }
        Ok(HyperbolicModel { a, k, window })
    }

    /// Model with no declared window restriction.
    pub fn unbounded(a: f64, k: f64) -> Result<Self> {
        let hi = if k > 0.0 { next_down(a / k) } else { f64::MAX };
        Self::new(a, k, YearWindow { lo: f64::MIN, hi })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn window(&self) -> YearWindow {
        self.window
    }

    /// Same parameters, different validity window.
    pub fn with_window(&self, window: YearWindow) -> Result<Self> {
        Self::new(self.a, self.k, window)
    }

    /// The reciprocal line `a - k t`. Negative past the singularity.
    pub fn reciprocal(&self, year: f64) -> f64 {
        self.a - self.k * year
    }

    pub fn eval(&self, year: f64) -> Result<f64> {
        let d = self.reciprocal(year);
        if d <= 0.0 {
            return Err(Error::SingularityReached {
                year,
                singularity: self.a / self.k,
                component: None,
            });
        }
        Ok(1.0 / d)
    }

    pub fn singularity_time(&self) -> Result<f64> {
        if self.k == 0.0 {
            return Err(Error::NoSingularity);
        }
        Ok(self.a / self.k)
    }

    /// Relative growth rate `S'/S = k S(t)`.
    pub fn growth_rate(&self, year: f64) -> Result<f64> {
        Ok(self.k * self.eval(year)?)
    }

    /// `S'(t) = k S(t)^2`.
    pub fn slope(&self, year: f64) -> Result<f64> {
        let s = self.eval(year)?;
        Ok(self.k * s * s)
    }
}

impl Trajectory for HyperbolicModel {
    fn value(&self, year: f64) -> Result<f64> {
        self.eval(year)
    }

    fn derivative(&self, year: f64) -> Result<f64> {
        self.slope(year)
    }

    fn relative_deviation(&self, year: f64, observed: f64) -> f64 {
        let d = self.reciprocal(year);
        if d <= 0.0 {
            -1.0
        } else {
            observed * d - 1.0
        }
    }
}

/// Direction in which a ratio of two hyperbolas moves over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MonotonicityClass {
    IncreasingToInfinity,
    DecreasingToZero,
    Constant,
}

impl fmt::Display for MonotonicityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MonotonicityClass::IncreasingToInfinity => "IncreasingToInfinity",
            MonotonicityClass::DecreasingToZero => "DecreasingToZero",
            MonotonicityClass::Constant => "Constant",
        };
        f.write_str(s)
    }
}

/// Relative width of the band in which `k1 a2 - k2 a1` counts as zero.
pub const CONSTANT_CLASS_TOLERANCE: f64 = 1e-12;

/// GDP hyperbola divided by population hyperbola, i.e. income per capita.
///
/// Equivalently `(a2 - k2 t) / (a1 - k1 t)`: a GDP hyperbola modulated by the
/// population's reciprocal line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioModel {
    gdp: HyperbolicModel,
    pop: HyperbolicModel,
    window: YearWindow,
}

impl RatioModel {
    pub fn new(gdp: HyperbolicModel, pop: HyperbolicModel) -> Result<Self> {
        let window = gdp.window.intersect(&pop.window).ok_or_else(|| {
            Error::InvalidWindow(format!(
                "component windows {} and {} do not overlap",
                gdp.window, pop.window
            ))
        })?;
        Ok(RatioModel { gdp, pop, window })
    }

    pub fn gdp(&self) -> &HyperbolicModel {
        &self.gdp
    }

    pub fn pop(&self) -> &HyperbolicModel {
        &self.pop
    }

    pub fn window(&self) -> YearWindow {
        self.window
    }

    pub fn eval(&self, year: f64) -> Result<f64> {
        let g = self.gdp.reciprocal(year);
        let p = self.pop.reciprocal(year);
        if g <= 0.0 || p <= 0.0 {
            return Err(self.first_divergence(year));
        }
        Ok(p / g)
    }

    /// `d/dt (p/g) = (k1 a2 - k2 a1) / g^2`.
    pub fn slope(&self, year: f64) -> Result<f64> {
        let g = self.gdp.reciprocal(year);
        if g <= 0.0 || self.pop.reciprocal(year) <= 0.0 {
            return Err(self.first_divergence(year));
        }
        Ok(self.modulation() / (g * g))
    }

    pub fn classify(&self) -> MonotonicityClass {
        let lhs = self.gdp.k * self.pop.a;
        let rhs = self.pop.k * self.gdp.a;
        let diff = lhs - rhs;
        if diff.abs() <= CONSTANT_CLASS_TOLERANCE * lhs.max(rhs) {
            MonotonicityClass::Constant
        } else if diff > 0.0 {
            MonotonicityClass::IncreasingToInfinity
        } else {
            MonotonicityClass::DecreasingToZero
        }
    }

    /// `k1 a2 - k2 a1`; its sign is the sign of the slope everywhere.
    fn modulation(&self) -> f64 {
        self.gdp.k * self.pop.a - self.pop.k * self.gdp.a
    }

    fn first_divergence(&self, year: f64) -> Error {
        let tg = self.gdp.singularity_time().unwrap_or(f64::INFINITY);
        let tp = self.pop.singularity_time().unwrap_or(f64::INFINITY);
        let (singularity, component) = if tg <= tp {
            (tg, Component::Gdp)
        } else {
            (tp, Component::Population)
        };
        Error::SingularityReached {
            year,
            singularity,
            component: Some(component),
        }
    }
}

impl Trajectory for RatioModel {
    fn value(&self, year: f64) -> Result<f64> {
        self.eval(year)
    }

    fn derivative(&self, year: f64) -> Result<f64> {
        self.slope(year)
    }

    fn relative_deviation(&self, year: f64, observed: f64) -> f64 {
        let g = self.gdp.reciprocal(year);
        let p = self.pop.reciprocal(year);
        if g > 0.0 && p > 0.0 {
            return observed * g / p - 1.0;
        }
        match self.first_divergence(year) {
            Error::SingularityReached {
                component: Some(Component::Population),
                ..
            } => f64::INFINITY,
            _ => -1.0,
        }
    }
}

fn next_down(x: f64) -> f64 {
    if x.is_finite() && x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world_gdp() -> HyperbolicModel {
        HyperbolicModel::unbounded(1.684e-2, 8.539e-6).unwrap()
    }

    fn world_pop() -> HyperbolicModel {
        HyperbolicModel::unbounded(7.739, 3.765e-3).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn eval_examples() {
        assert!(rel(world_gdp().eval(0.0).unwrap(), 1.0 / 0.01684) < 1e-15);
        assert!(rel(world_gdp().eval(0.0).unwrap(), 59.38) < 1e-4);
        let constant = HyperbolicModel::unbounded(1.0, 0.0).unwrap();
        assert_eq!(constant.eval(-5000.0).unwrap(), 1.0);
        assert_eq!(constant.eval(1e6).unwrap(), 1.0);
        // a/k = 1972.12...; 1972.1 is still just before it, 1972.2 is past.
        assert!(world_gdp().eval(1972.1).is_ok());
        assert!(matches!(
            world_gdp().eval(1972.2),
            Err(Error::SingularityReached { .. })
        ));
        let at = world_gdp().singularity_time().unwrap();
        assert!(matches!(world_gdp().eval(at), Err(Error::SingularityReached { .. })));
    }

    #[test]
    fn reciprocal_examples() {
        assert!((world_pop().reciprocal(1000.0) - 3.974).abs() < 1e-12);
        assert_eq!(HyperbolicModel::unbounded(5.0, 0.0).unwrap().reciprocal(1e6), 5.0);
        let r = world_gdp().reciprocal(2000.0);
        assert!(r < 0.0);
        assert!((r - (0.01684 - 0.017078)).abs() < 1e-15);
    }

    #[test]
    fn singularity_examples() {
        let africa_pop = HyperbolicModel::unbounded(5.794e1, 2.473e-2).unwrap();
        let africa_gdp = HyperbolicModel::unbounded(1.244e-1, 5.030e-5).unwrap();
        assert!((africa_pop.singularity_time().unwrap() - 2343.0).abs() < 1.0);
        assert!((africa_gdp.singularity_time().unwrap() - 2473.0).abs() < 1.0);
        assert!(matches!(
            HyperbolicModel::unbounded(1.0, 0.0).unwrap().singularity_time(),
            Err(Error::NoSingularity)
        ));
    }

    #[test]
    fn growth_rate_examples() {
        let m = world_gdp();
        let rate = m.growth_rate(1000.0).unwrap();
        assert!(rel(rate, 8.539e-6 / 8.301e-3) < 1e-12);
        assert!(rel(rate, 1.029e-3) < 1e-3);
        let flat = HyperbolicModel::unbounded(3.0, 0.0).unwrap();
        assert_eq!(flat.growth_rate(1234.0).unwrap(), 0.0);
        assert!(m.growth_rate(1980.0).is_err());
    }

    #[test]
    fn ratio_examples() {
        let world = RatioModel::new(world_gdp(), world_pop()).unwrap();
        assert!(rel(world.eval(1000.0).unwrap(), 3.974 / 0.008301) < 1e-12);
        assert!(rel(world.eval(1000.0).unwrap(), 478.7) < 1e-4);

        let same = RatioModel::new(world_pop(), world_pop()).unwrap();
        assert_eq!(same.eval(1500.0).unwrap(), 1.0);
        assert_eq!(same.classify(), MonotonicityClass::Constant);

        let africa = RatioModel::new(
            HyperbolicModel::unbounded(1.244e-1, 5.030e-5).unwrap(),
            HyperbolicModel::unbounded(5.794e1, 2.473e-2).unwrap(),
        )
        .unwrap();
        let (early, late) = (africa.eval(1.0).unwrap(), africa.eval(1800.0).unwrap());
        assert!((early - 465.8).abs() < 0.1, "{early}");
        assert!((late - 396.6).abs() < 0.1, "{late}");
        assert_eq!(africa.classify(), MonotonicityClass::DecreasingToZero);
        assert_eq!(world.classify(), MonotonicityClass::IncreasingToInfinity);
    }

    #[test]
    fn ratio_names_first_component_to_diverge() {
        let world = RatioModel::new(world_gdp(), world_pop()).unwrap();
        match world.eval(2000.0) {
            Err(Error::SingularityReached {
                component: Some(Component::Gdp),
                singularity,
                ..
            }) => assert!((singularity - 1972.1).abs() < 0.1),
            other => panic!("unexpected {other:?}"),
        }
        let africa = RatioModel::new(
            HyperbolicModel::unbounded(1.244e-1, 5.030e-5).unwrap(),
            HyperbolicModel::unbounded(5.794e1, 2.473e-2).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            africa.eval(2400.0),
            Err(Error::SingularityReached {
                component: Some(Component::Population),
                ..
            })
        ));
        assert_eq!(africa.relative_deviation(2400.0, 10.0), f64::INFINITY);
        assert_eq!(world.relative_deviation(2000.0, 10.0), -1.0);
    }

    #[test]
    fn construction_rejects_bad_parameters() {
        let w = YearWindow::new(1.0, 1950.0).unwrap();
        assert!(HyperbolicModel::new(-1.0, 1e-3, w).is_err());
        assert!(HyperbolicModel::new(1.0, -1e-3, w).is_err());
        assert!(HyperbolicModel::new(f64::NAN, 1e-3, w).is_err());
        // singularity at 1000 inside [1, 1950]
        assert!(HyperbolicModel::new(1.0, 1e-3, w).is_err());
        assert!(HyperbolicModel::new(1.0, 0.0, w).is_ok());
        assert!(YearWindow::new(10.0, 1.0).is_err());
    }

    #[test]
    fn ratio_requires_overlapping_windows() {
        let a = HyperbolicModel::new(1.0, 0.0, YearWindow::new(0.0, 10.0).unwrap()).unwrap();
        let b = HyperbolicModel::new(1.0, 0.0, YearWindow::new(20.0, 30.0).unwrap()).unwrap();
        assert!(RatioModel::new(a, b).is_err());
    }

    #[test]
    fn window_parsing() {
        let w: YearWindow = "1:1950".parse().unwrap();
        assert_eq!((w.lo, w.hi), (1.0, 1950.0));
        let w: YearWindow = "-10000:1".parse().unwrap();
        assert_eq!(w.lo, -10000.0);
        assert!("1950:1".parse::<YearWindow>().is_err());
        assert!("1950".parse::<YearWindow>().is_err());
    }
}
