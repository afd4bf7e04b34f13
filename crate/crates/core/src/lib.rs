//! Hyperbolic growth models `S(t) = 1/(a - k t)`, their ratios, fitting on
//! the reciprocal line and diagnostics for stagnation, takeoff and
//! divergence in long-run GDP and population series.
//!
//! ```
//! use hypergrowth_core::{fit_hyperbolic, synthesize_hyperbolic, YearWindow};
//!
//! let years = [1.0, 1000.0, 1500.0, 1820.0, 1900.0, 1950.0];
//! let series = synthesize_hyperbolic(7.739, 3.765e-3, &years, 0.0, 42).unwrap();
//! let fit = fit_hyperbolic(&series, &YearWindow::unbounded()).unwrap();
//! assert!((fit.model.singularity_time().unwrap() - 2055.5).abs() < 0.1);
//! ```

pub mod data_io;
pub mod diagnostics;
pub mod error;
pub mod fitting;
pub mod linreg;
pub mod model;
pub mod reference;
pub mod regions;

pub use data_io::{
    convert_maddison_horizontal, derive_per_capita, parse_series_csv, parse_year, synthesize_hyperbolic,
    write_series_csv, GrowthSeries, SeriesKind, Unit,
};
pub use diagnostics::{
    detect_divergence, diagnose_per_capita, diagnose_series, reciprocal_linearity, stagnation_test,
    stagnation_test_per_capita, takeoff_test, takeoff_test_per_capita, Diagnosis, DiagnosticConfig, Direction,
    Divergence, PowerClass, Stagnation, StagnationReason, Takeoff, TakeoffVerdict, Verdict,
};
pub use error::{Component, Error, Result};
pub use fitting::{
    compose_ratio, fit_hyperbolic, fit_piecewise, fit_ratio, interpolate_transition, refine_fit, Breakpoint, Bridge,
    BridgeDegree, ComponentFit, FitReport, Location, PiecewiseConfig, PiecewiseFit, PiecewiseTrajectory, RatioFit,
    Segment, SegmentModel, DEFAULT_BRIDGE_WIDTH, DEFAULT_FIT_WINDOW,
};
pub use model::{HyperbolicModel, MonotonicityClass, RatioModel, Trajectory, YearWindow};
pub use regions::{Category, RegionConfig, RegionSettings};
