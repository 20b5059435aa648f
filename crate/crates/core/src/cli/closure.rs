//! Enumeration of commensurate frequency pairs that close the trajectory.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, OutputMode};
use crate::qubit::{
    closed_trajectory_amplitude_qubit, closed_trajectory_period_qubit, integrate_bloch,
    DampingParams, FieldParams, InitialAngles,
};
use crate::qutrit::{
    bloch8_from_density, closed_trajectory_amplitude_qutrit, closed_trajectory_period_qutrit,
    integrate_qutrit, AnisotropyParams, DensityMatrix3,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum ClosureSystem {
    /// Circular field with drive frequency `omega` and longitudinal `H`.
    Qubit { omega: f64, big_h: f64 },
    /// Static transverse field with anisotropy `Q`, `d`.
    Qutrit { q: f64, d: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureRow {
    pub x: i64,
    pub y: i64,
    /// `None` when the pair admits no real amplitude.
    pub h: Option<f64>,
    pub period: Option<f64>,
    /// Distance between start and end state after one common period.
    pub residual: Option<f64>,
}

impl ClosureRow {
    pub fn feasible(&self) -> bool {
        self.h.is_some()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Integrates one common period for the pair `(x, y)` and returns the
/// amplitude, period and closure residual.
pub fn closure_residual(
    system: ClosureSystem,
    x: i64,
    y: i64,
    cfg: &IntegratorConfig,
) -> Result<ClosureRow> {
    let infeasible = ClosureRow {
        x,
        y,
        h: None,
        period: None,
        residual: None,
    };
    match system {
        ClosureSystem::Qubit { omega, big_h } => {
            let Some(h) = closed_trajectory_amplitude_qubit(x, y, omega, big_h)? else {
                return Ok(infeasible);
            };
            let period = closed_trajectory_period_qubit(x, omega);
            let start = InitialAngles::NORTH.to_vector();
            let sol = integrate_bloch(
                &FieldParams::circular(h, big_h, omega),
                &DampingParams::NONE,
                start,
                (0.0, period),
                2,
                OutputMode::Land,
                cfg,
            )?;
            Ok(ClosureRow {
                x,
                y,
                h: Some(h),
                period: Some(period),
                residual: Some(distance(&sol.states[1], &start)),
            })
        }
        ClosureSystem::Qutrit { q, d } => {
            let h = match closed_trajectory_amplitude_qutrit(x, y, q, d) {
                Ok(h) => h,
                Err(Error::Domain(_)) => return Ok(infeasible),
                Err(e) => return Err(e),
            };
            let period = closed_trajectory_period_qutrit(x, q, d);
            let north = DensityMatrix3::north();
            let sol = integrate_qutrit(
                &FieldParams::circular(h, 0.0, 0.0),
                &AnisotropyParams::new(q, d)?,
                &north,
                (0.0, period),
                2,
                OutputMode::Land,
                cfg,
            )?;
            let a = bloch8_from_density(&north, 0.0);
            let b = bloch8_from_density(&sol.states[1], period);
            Ok(ClosureRow {
                x,
                y,
                h: Some(h),
                period: Some(period),
                residual: Some(distance(&a.q, &b.q)),
            })
        }
    }
}

/// All coprime pairs `1 ≤ x ≤ x_max`, `1 ≤ y ≤ y_max` with their closure
/// amplitude and residual.
pub fn closure_search(
    system: ClosureSystem,
    x_max: i64,
    y_max: i64,
    cfg: &IntegratorConfig,
) -> Result<Vec<ClosureRow>> {
    if x_max < 1 || y_max < 1 {
        return Err(Error::InvalidArgument(
            "x_max and y_max must be at least 1".into(),
        ));
    }
    let mut rows = Vec::new();
    for x in 1..=x_max {
        for y in 1..=y_max {
            if gcd(x, y) == 1 {
                rows.push(closure_residual(system, x, y, cfg)?);
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qutrit_pairs() {
        let cfg = IntegratorConfig::default().with_tolerance(1e-12);
        let row = closure_residual(ClosureSystem::Qutrit { q: 1.0, d: 0.0 }, 4, 5, &cfg).unwrap();
        assert!((row.h.unwrap() - 0.375).abs() < 1e-15);
        assert!(row.residual.unwrap() < 1e-5);
        let bad = closure_residual(ClosureSystem::Qutrit { q: 1.0, d: 0.0 }, 5, 4, &cfg).unwrap();
        assert!(!bad.feasible());
    }

    #[test]
    fn qubit_pair() {
        let cfg = IntegratorConfig::default().with_tolerance(1e-12);
        let row = closure_residual(
            ClosureSystem::Qubit {
                omega: 0.2,
                big_h: 0.2,
            },
            1,
            1,
            &cfg,
        )
        .unwrap();
        assert!((row.h.unwrap() - 0.2).abs() < 1e-15);
        assert!(row.residual.unwrap() < 1e-6);
    }

    #[test]
    fn search_skips_redundant_pairs() {
        let cfg = IntegratorConfig::default();
        let rows = closure_search(ClosureSystem::Qutrit { q: 1.0, d: 0.0 }, 2, 2, &cfg).unwrap();
        let pairs: Vec<(i64, i64)> = rows.iter().map(|r| (r.x, r.y)).collect();
        assert_eq!(pairs, vec![(1, 1), (1, 2), (2, 1)]);
        assert!(closure_search(ClosureSystem::Qutrit { q: 1.0, d: 0.0 }, 0, 2, &cfg).is_err());
    }
}
