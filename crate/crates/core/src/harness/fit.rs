use crate::error::{Error, Result};
use crate::estimators::{build_system, sandwich_covariance, solve, EmpiricalSystem, EstimateResult};
use crate::geometry::Configuration;
use crate::models::ModelSpec;
use crate::mple::{build_quadrature, fit_mple};

use super::plan::EstimatorSpec;

/// Fits one estimator to a pattern. Variational estimators also return their empirical
/// system so callers can pool it.
pub fn fit_pattern(
    config: &Configuration,
    model: &ModelSpec,
    spec: &EstimatorSpec,
) -> Result<(EstimateResult, Option<EmpiricalSystem>)> {
    let (result, system) = fit_keeping_system(config, model, spec)?;
    Ok((result?, system))
}

/// Like [`fit_pattern`], but a failed solve still hands back the system that was built.
pub(crate) fn fit_keeping_system(
    config: &Configuration,
    model: &ModelSpec,
    spec: &EstimatorSpec,
) -> Result<(Result<EstimateResult>, Option<EmpiricalSystem>)> {
    let basis = model.basis()?;
    let taper = model.taper()?;
    let Some((variant, opts)) = spec.variational() else {
        let EstimatorSpec::Mple { grid_res, rescale } = spec else { unreachable!() };
        let unit = rescale.or_else(|| model.sigma()).unwrap_or(1.0);
        let q = build_quadrature(config, &basis, *grid_res, unit)?;
        return Ok((fit_mple(&q), None));
    };
    let system = build_system(config, &basis, &taper, variant, &opts)?;
    let result = solve(&system).and_then(|mut result| {
        if let EstimatorSpec::Grid { cell_side, covariance: true, .. } = spec {
            let cov = sandwich_covariance(config, &basis, &taper, *cell_side, &opts, &result.theta, basis.range())?;
            result.covariance = Some(cov.theta);
        }
        Ok(result)
    });
    Ok((result, Some(system)))
}

/// Short status tag for a failed fit.
pub fn status_of(err: &Error) -> String {
    match err {
        Error::SingularSystem { .. } => "singular".into(),
        Error::Diverged { .. } => "diverged".into(),
        Error::InfeasibleData { .. } => "infeasible".into(),
        Error::Empty(_) => "empty".into(),
        Error::InsufficientCells { .. } => "insufficient-cells".into(),
        other => format!("error: {other}"),
    }
}
