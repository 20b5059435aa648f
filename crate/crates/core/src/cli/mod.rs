//! Presets, runs, artifact export and closure search behind the `spinhodo`
//! command-line tool.

mod closure;
mod output;
mod preset;
mod run;

use std::path::Path;

pub use closure::{closure_residual, closure_search, ClosureRow, ClosureSystem};
pub use output::{
    plot_script, trajectory_header, write_artifacts, write_geometry_csv, write_trajectory_csv,
    GEOMETRY_HEADER,
};
pub use preset::{preset, Bound, Expectation, FigurePreset, PresetName, Quantity, Tolerance};
pub use run::{
    run, CheckResult, EventSummary, ObservedRanges, Range, RunOutput, RunReport, RunSpec, System,
    TrajectoryRow,
};

use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;

/// Environment variable overriding the relative tolerance (the absolute
/// tolerance follows at 1/100 of it).
pub const TOLERANCE_ENV: &str = "SPINHODO_TOL";

/// Default integrator settings, with [`TOLERANCE_ENV`] applied when set.
pub fn config_from_env() -> Result<IntegratorConfig> {
    let cfg = IntegratorConfig::default();
    match std::env::var(TOLERANCE_ENV) {
        Ok(s) => {
            let tol: f64 = s.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("{TOLERANCE_ENV}='{s}' is not a number"))
            })?;
            let cfg = cfg.with_tolerance(tol);
            cfg.validate()?;
            Ok(cfg)
        }
        Err(std::env::VarError::NotPresent) => Ok(cfg),
        Err(e) => Err(Error::InvalidArgument(format!("{TOLERANCE_ENV}: {e}"))),
    }
}

/// Runs a named preset without writing anything.
pub fn evaluate_preset(name: PresetName, cfg: &IntegratorConfig) -> Result<RunOutput> {
    let p = preset(name);
    run(name.as_str(), &p.spec, &p.expected, cfg)
}

/// Runs a named preset and writes its artifacts into `out_dir`.
pub fn run_preset(name: PresetName, out_dir: &Path, cfg: &IntegratorConfig) -> Result<RunReport> {
    let out = evaluate_preset(name, cfg)?;
    write_artifacts(&out, out_dir)?;
    Ok(out.report)
}

/// Runs arbitrary parameters for `periods` natural periods and writes the
/// artifacts into `out_dir`.
pub fn simulate(
    system: System,
    periods: f64,
    analytic: bool,
    out_dir: &Path,
    cfg: &IntegratorConfig,
) -> Result<RunReport> {
    if !(periods > 0.0 && periods.is_finite()) {
        return Err(Error::InvalidArgument("periods must be positive".into()));
    }
    let natural_period = system.natural_period()?;
    let spec = RunSpec {
        system,
        duration: periods * natural_period,
        natural_period,
        analytic,
    };
    let out = run("custom", &spec, &[], cfg)?;
    write_artifacts(&out, out_dir)?;
    Ok(out.report)
}
