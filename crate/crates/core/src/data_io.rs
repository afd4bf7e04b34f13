//! Time series ingestion: tidy CSV, the Maddison horizontal layout, per-capita
//! derivation and seeded synthetic fixtures.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::YearWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Population,
    Gdp,
    GdpPerCapita,
}

impl SeriesKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeriesKind::Population => "population",
            SeriesKind::Gdp => "gdp",
            SeriesKind::GdpPerCapita => "gdp_per_capita",
        }
    }

    /// Unit used by the Maddison tables.
    pub fn native_unit(&self) -> Unit {
        match self {
            SeriesKind::Population => Unit::MillionPersons,
            SeriesKind::Gdp => Unit::MillionGK1990Dollars,
            SeriesKind::GdpPerCapita => Unit::GK1990DollarsPerCapita,
        }
    }
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeriesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "population" => Ok(SeriesKind::Population),
            "gdp" => Ok(SeriesKind::Gdp),
            "gdp_per_capita" => Ok(SeriesKind::GdpPerCapita),
            other => Err(Error::InvalidSeries(format!("unknown kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    MillionPersons,
    BillionPersons,
    MillionGK1990Dollars,
    BillionGK1990Dollars,
    GK1990DollarsPerCapita,
}

impl Unit {
    pub fn fits(&self, kind: SeriesKind) -> bool {
        matches!(
            (kind, self),
            (SeriesKind::Population, Unit::MillionPersons | Unit::BillionPersons)
                | (SeriesKind::Gdp, Unit::MillionGK1990Dollars | Unit::BillionGK1990Dollars)
                | (SeriesKind::GdpPerCapita, Unit::GK1990DollarsPerCapita)
        )
    }

    fn is_billion(&self) -> bool {
        matches!(self, Unit::BillionPersons | Unit::BillionGK1990Dollars)
    }
}

/// A region's observations of one variable, years strictly increasing and
/// values strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    region: String,
    kind: SeriesKind,
    unit: Unit,
    points: Vec<(f64, f64)>,
}

impl GrowthSeries {
    pub fn new(region: impl Into<String>, kind: SeriesKind, unit: Unit, points: Vec<(f64, f64)>) -> Result<Self> {
        let region = region.into();
        if !unit.fits(kind) {
            return Err(Error::InvalidSeries(format!("unit {unit:?} does not fit kind {kind}")));
        }
        for (i, &(year, value)) in points.iter().enumerate() {
            if !year.is_finite() {
                return Err(Error::InvalidSeries(format!("non-finite year {year}")));
            }
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositiveValue { year, value });
            }
            if i > 0 && points[i - 1].0 >= year {
                return Err(Error::InvalidSeries(format!("years not strictly increasing at {year}")));
            }
        }
        Ok(GrowthSeries {
            region,
            kind,
            unit,
            points,
        })
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn years(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn first_year(&self) -> Option<f64> {
        self.points.first().map(|p| p.0)
    }

    pub fn last_year(&self) -> Option<f64> {
        self.points.last().map(|p| p.0)
    }

    pub fn value_at(&self, year: f64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == year).map(|p| p.1)
    }

    /// Observations with years inside `window`.
    pub fn in_window(&self, window: &YearWindow) -> Vec<(f64, f64)> {
        self.points.iter().copied().filter(|p| window.contains(p.0)).collect()
    }

    /// Sub-series restricted to `window`.
    pub fn restrict(&self, window: &YearWindow) -> GrowthSeries {
        GrowthSeries {
            points: self.in_window(window),
            ..self.clone()
        }
    }

    /// Same points under different labels.
    pub fn relabel(self, region: impl Into<String>, kind: SeriesKind, unit: Unit) -> Result<Self> {
        GrowthSeries::new(region, kind, unit, self.points)
    }

    /// Every value multiplied by `factor`, years shifted by `shift`.
    pub fn transformed(&self, factor: f64, shift: f64) -> Result<Self> {
        GrowthSeries::new(
            self.region.clone(),
            self.kind,
            self.unit,
            self.points.iter().map(|&(t, v)| (t + shift, v * factor)).collect(),
        )
    }

    /// Rescales population and GDP to billions, the units in which fitted
    /// `(a, k)` values are reported. Per-capita series are unchanged.
    pub fn to_model_units(&self) -> GrowthSeries {
        let unit = match self.unit {
            Unit::MillionPersons => Unit::BillionPersons,
            Unit::MillionGK1990Dollars => Unit::BillionGK1990Dollars,
            other => {
                return GrowthSeries {
                    unit: other,
                    ..self.clone()
                }
            }
        };
        GrowthSeries {
            unit,
            points: self.points.iter().map(|&(t, v)| (t, v * 1e-3)).collect(),
            ..self.clone()
        }
    }
}

/// Parses a year cell. Accepts `1820`, `-10000`, `−10000` (U+2212),
/// `10000 BC` and `AD 1`. BC years map to astronomical numbering, so
/// `1 BC` is year 0.
pub fn parse_year(cell: &str) -> Option<f64> {
    let s = cell.trim().replace('\u{2212}', "-");
    let upper = s.to_ascii_uppercase();
    let (body, bc) = if let Some(b) = upper.strip_suffix("BC") {
        (b.trim().to_string(), true)
    } else if let Some(b) = upper.strip_suffix("BCE") {
        (b.trim().to_string(), true)
    } else if let Some(b) = upper.strip_prefix("AD") {
        (b.trim().to_string(), false)
    } else {
        (upper.trim().to_string(), false)
    };
    let y: f64 = body.parse().ok()?;
    if !y.is_finite() {
        return None;
    }
    if bc {
        (y >= 1.0).then_some(1.0 - y)
    } else {
        Some(y)
    }
}

/// Reads the tidy `region,kind,year,value` layout.
///
/// Series come back in order of first appearance, points sorted by year.
pub fn parse_series_csv<R: Read>(reader: R) -> Result<Vec<GrowthSeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut groups: Vec<((String, SeriesKind), Vec<(f64, f64)>)> = Vec::new();
    let mut index: HashMap<(String, SeriesKind), usize> = HashMap::new();
    let mut seen_header = false;

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if !seen_header {
            let cols: Vec<&str> = record.iter().collect();
            if cols != ["region", "kind", "year", "value"] {
                return Err(Error::Schema {
                    line,
                    message: format!("expected header region,kind,year,value, got {}", cols.join(",")),
                });
            }
            seen_header = true;
            continue;
        }
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if record.len() != 4 {
            return Err(Error::Schema {
                line,
                message: format!("expected 4 columns, got {}", record.len()),
            });
        }
        let region = record[0].to_string();
        if region.is_empty() {
            return Err(Error::Value {
                line,
                message: "empty region".into(),
            });
        }
        let kind: SeriesKind = record[1].parse().map_err(|_| Error::Value {
            line,
            message: format!("unknown kind {:?}", &record[1]),
        })?;
        let year = parse_year(&record[2]).ok_or_else(|| Error::Value {
            line,
            message: format!("unparseable year {:?}", &record[2]),
        })?;
        let value: f64 = record[3].parse().map_err(|_| Error::Value {
            line,
            message: format!("unparseable value {:?}", &record[3]),
        })?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Value {
                line,
                message: format!("value must be positive, got {value}"),
            });
        }
        let key = (region, kind);
        let slot = *index.entry(key.clone()).or_insert_with(|| {
            groups.push((key.clone(), Vec::new()));
            groups.len() - 1
        });
        groups[slot].1.push((year, value));
    }
    if !seen_header {
        return Err(Error::Schema {
            line: 1,
            message: "missing header".into(),
        });
    }

    groups
        .into_iter()
        .map(|((region, kind), mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::DuplicateYear {
                    region,
                    kind: kind.to_string(),
                    year: w[0].0,
                });
            }
            GrowthSeries::new(region, kind, kind.native_unit(), points)
        })
        .collect()
}

/// Writes series in the tidy layout. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn write_series_csv<W: Write>(series: &[GrowthSeries], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["region", "kind", "year", "value"])?;
    for s in series {
        for &(year, value) in &s.points {
            w.write_record([
                s.region.as_str(),
                s.kind.as_str(),
                &year.to_string(),
                &value.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Transposes a horizontal table (`region,<year>,<year>,...`) into series.
///
/// Blank or non-numeric cells are missing data and are skipped. Every value
/// is multiplied by `scale` (Maddison population sheets are in thousands,
/// so pass `1e-3` to get millions). Columns with a blank header are ignored.
pub fn convert_maddison_horizontal<R: Read>(reader: R, kind: SeriesKind, scale: f64) -> Result<Vec<GrowthSeries>> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidSeries(format!("scale must be positive, got {scale}")));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(h) => h?,
        None => {
            return Err(Error::Schema {
                line: 1,
                message: "empty input".into(),
            })
        }
    };
    let mut columns: Vec<(usize, f64)> = Vec::new();
    for (i, cell) in header.iter().enumerate().skip(1) {
        if cell.is_empty() {
            continue;
        }
        let year = parse_year(cell).ok_or_else(|| Error::Schema {
            line: 1,
            message: format!("unparseable year header {cell:?}"),
        })?;
        if columns.iter().any(|&(_, y)| y == year) {
            return Err(Error::Schema {
                line: 1,
                message: format!("duplicate year header {cell:?}"),
            });
        }
        columns.push((i, year));
    }
    if columns.is_empty() {
        return Err(Error::Schema {
            line: 1,
            message: "no year columns".into(),
        });
    }

    let mut out: Vec<GrowthSeries> = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let region = record.get(0).unwrap_or("");
        if region.is_empty() {
            continue;
        }
        if out.iter().any(|s| s.region == region) {
            return Err(Error::Schema {
                line,
                message: format!("region {region:?} appears twice"),
            });
        }
        let mut points = Vec::new();
        for &(col, year) in &columns {
            let cell = record.get(col).unwrap_or("");
            let cleaned: String = cell.chars().filter(|c| *c != ',' && !c.is_whitespace()).collect();
            let Ok(raw) = cleaned.parse::<f64>() else {
                continue;
            };
            if !raw.is_finite() {
                continue;
            }
            let value = raw * scale;
            if value <= 0.0 {
                return Err(Error::Value {
                    line,
                    message: format!("{region} {year}: value must be positive, got {raw}"),
                });
            }
            points.push((year, value));
        }
        if points.is_empty() {
            continue;
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        out.push(GrowthSeries::new(region, kind, kind.native_unit(), points)?);
    }
    Ok(out)
}

/// Pointwise `gdp / pop` at the years both series share.
pub fn derive_per_capita(gdp: &GrowthSeries, pop: &GrowthSeries) -> Result<GrowthSeries> {
    if gdp.region != pop.region {
        return Err(Error::RegionMismatch(gdp.region.clone(), pop.region.clone()));
    }
    if gdp.kind != SeriesKind::Gdp {
        return Err(Error::KindMismatch {
            expected: SeriesKind::Gdp.to_string(),
            found: gdp.kind.to_string(),
        });
    }
    if pop.kind != SeriesKind::Population {
        return Err(Error::KindMismatch {
            expected: SeriesKind::Population.to_string(),
            found: pop.kind.to_string(),
        });
    }
    if gdp.unit.is_billion() != pop.unit.is_billion() {
        return Err(Error::InvalidSeries(format!(
            "unit scales differ: {:?} vs {:?}",
            gdp.unit, pop.unit
        )));
    }
    let points: Vec<(f64, f64)> = gdp
        .points
        .iter()
        .filter_map(|&(t, g)| pop.value_at(t).map(|p| (t, g / p)))
        .collect();
    if points.is_empty() {
        return Err(Error::NoCommonYears);
    }
    GrowthSeries::new(
        gdp.region.clone(),
        SeriesKind::GdpPerCapita,
        Unit::GK1990DollarsPerCapita,
        points,
    )
}

/// Samples `1/(a - k t)` at `years`, each value multiplied by `1 + e` with `e`
/// uniform in `[-noise, noise]` from a ChaCha8 stream seeded by `seed`.
///
/// The result is labelled as a synthetic population series in millions.
pub fn synthesize_hyperbolic(a: f64, k: f64, years: &[f64], noise: f64, seed: u64) -> Result<GrowthSeries> {
    if !(0.0..1.0).contains(&noise) {
        return Err(Error::InvalidSeries(format!("noise must be in [0, 1), got {noise}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(years.len());
    for &t in years {
        let d = a - k * t;
        if d <= 0.0 {
            return Err(Error::SingularityReached {
                year: t,
                singularity: a / k,
                component: None,
            });
        }
        let e = if noise > 0.0 {
            rng.gen_range(-noise..=noise)
        } else {
            0.0
        };
        points.push((t, (1.0 / d) * (1.0 + e)));
    }
    GrowthSeries::new("synthetic", SeriesKind::Population, Unit::MillionPersons, points)
}
