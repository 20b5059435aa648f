//! The ten named parameter sets and the extrema quoted for each.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::run::{RunSpec, System};
use crate::error::{Error, Result};
use crate::qubit::{DampingParams, FieldParams, InitialAngles};
use crate::qutrit::AnisotropyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetName {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
}

impl PresetName {
    pub const ALL: [PresetName; 10] = [
        PresetName::Fig1,
        PresetName::Fig2,
        PresetName::Fig3,
        PresetName::Fig4,
        PresetName::Fig5,
        PresetName::Fig6,
        PresetName::Fig7,
        PresetName::Fig8,
        PresetName::Fig9,
        PresetName::Fig10,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Fig1 => "fig1",
            PresetName::Fig2 => "fig2",
            PresetName::Fig3 => "fig3",
            PresetName::Fig4 => "fig4",
            PresetName::Fig5 => "fig5",
            PresetName::Fig6 => "fig6",
            PresetName::Fig7 => "fig7",
            PresetName::Fig8 => "fig8",
            PresetName::Fig9 => "fig9",
            PresetName::Fig10 => "fig10",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{s}' (fig1..fig10)")))
    }
}

/// Quantity a caption bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Spin-flip probability (qubit) or `P₋₁` (qutrit).
    Probability,
    Speed,
    Curvature,
    Torsion,
    ThetaDot,
    PhiDot,
    /// Third component of the unit polarization vector.
    PolarizationZ,
    /// Total path length.
    ArcLength,
    TorsionSignChanges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Min,
    Max,
    /// A single total (arc length, sign-change count).
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Tolerance {
    /// `|observed − expected| ≤ r·max(|expected|, 0.01)`.
    Relative(f64),
    /// Same sign and `expected/f ≤ observed ≤ expected·f` in magnitude.
    Factor(f64),
    Exact,
}

impl Tolerance {
    pub fn accepts(self, expected: f64, observed: f64) -> bool {
        if !observed.is_finite() {
            return false;
        }
        match self {
            Tolerance::Relative(r) => (observed - expected).abs() <= r * expected.abs().max(0.01),
            Tolerance::Factor(f) => {
                if expected == 0.0 {
                    return observed == 0.0;
                }
                let ratio = observed / expected;
                ratio >= 1.0 / f && ratio <= f
            }
            Tolerance::Exact => observed == expected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub quantity: Quantity,
    pub bound: Bound,
    pub value: f64,
    pub tolerance: Tolerance,
}

const REL: Tolerance = Tolerance::Relative(0.05);
const SPIKE: Tolerance = Tolerance::Factor(2.0);

fn e(quantity: Quantity, bound: Bound, value: f64, tolerance: Tolerance) -> Expectation {
    Expectation {
        quantity,
        bound,
        value,
        tolerance,
    }
}

#[derive(Debug, Clone)]
pub struct FigurePreset {
    pub name: PresetName,
    pub spec: RunSpec,
    pub expected: Vec<Expectation>,
}

fn rabi_frequency(h: f64, big_h: f64, omega: f64) -> f64 {
    ((big_h - omega).powi(2) + h * h).sqrt()
}

fn qubit(
    field: FieldParams,
    theta0: f64,
    phi0: f64,
    duration: f64,
    natural_period: f64,
) -> RunSpec {
    RunSpec {
        system: System::Qubit {
            field,
            damping: DampingParams::NONE,
            init: InitialAngles { theta0, phi0 },
        },
        duration,
        natural_period,
        analytic: false,
    }
}

pub fn preset(name: PresetName) -> FigurePreset {
    use Bound::*;
    use Quantity::*;

    let tilted = (1.0f64 / 3.0f64.sqrt()).acos();
    let (spec, expected) = match name {
        PresetName::Fig1 | PresetName::Fig2 => {
            let (h, big_h, w) = (-0.6, 0.45, 3.0);
            let period = TAU / rabi_frequency(h, big_h, w);
            let periods = if name == PresetName::Fig1 { 1.0 } else { 7.0 };
            let spec = qubit(
                FieldParams::circular(h, big_h, w),
                tilted,
                0.0,
                periods * period,
                period,
            );
            let expected = if name == PresetName::Fig2 {
                vec![
                    e(Probability, Min, 0.06, REL),
                    e(Probability, Max, 0.211, REL),
                    e(ArcLength, Total, 10.44, REL),
                ]
            } else {
                Vec::new()
            };
            (spec, expected)
        }
        PresetName::Fig3 | PresetName::Fig7 => {
            let (h, big_h, w) = (0.6, 0.5, 3.0);
            let period = TAU / rabi_frequency(h, big_h, w);
            if name == PresetName::Fig3 {
                let spec = qubit(
                    FieldParams::circular(h, big_h, w),
                    tilted,
                    FRAC_PI_4,
                    6.0 * period,
                    period,
                );
                let expected = vec![
                    e(Probability, Min, 0.19, REL),
                    e(Probability, Max, 0.4, REL),
                    e(Speed, Min, 0.015, REL),
                    e(Speed, Max, 0.78, REL),
                    e(PhiDot, Min, -0.02, REL),
                    e(PhiDot, Max, 0.67, REL),
                    e(ThetaDot, Min, -0.6, REL),
                    e(ThetaDot, Max, 0.6, REL),
                    e(Curvature, Min, 1.0, REL),
                    e(Curvature, Max, 8500.0, SPIKE),
                    e(Torsion, Min, -1550.0, SPIKE),
                    e(Torsion, Max, 1550.0, SPIKE),
                    e(ArcLength, Total, 8.6, REL),
                ];
                (spec, expected)
            } else {
                let spec = qubit(
                    FieldParams::linear(h, big_h, w),
                    tilted,
                    FRAC_PI_4,
                    14.66,
                    period,
                );
                let expected = vec![
                    e(Speed, Min, 0.14, REL),
                    e(Speed, Max, 0.77, REL),
                    e(Curvature, Min, 1.0, REL),
                    e(Curvature, Max, 22.0, SPIKE),
                    e(Torsion, Min, -200.0, SPIKE),
                    e(Torsion, Max, 350.0, SPIKE),
                    e(PhiDot, Min, 0.08, REL),
                    e(PhiDot, Max, 0.87, REL),
                    e(ThetaDot, Min, -0.58, REL),
                    e(ThetaDot, Max, 0.6, REL),
                    e(Probability, Min, 0.14, REL),
                    e(Probability, Max, 0.3, REL),
                    e(ArcLength, Total, 6.44, REL),
                ];
                (spec, expected)
            }
        }
        PresetName::Fig4 => {
            let (h, big_h, w) = (0.5, 0.05, 0.5);
            let period = TAU / rabi_frequency(h, big_h, w);
            let spec = qubit(
                FieldParams::circular(h, big_h, w),
                PI,
                3.0 * FRAC_PI_4,
                4.0 * period,
                period,
            );
            let expected = vec![
                e(Speed, Min, 0.005, REL),
                e(Speed, Max, 0.5, REL),
                e(Curvature, Min, 1.5, REL),
                e(Curvature, Max, 25000.0, SPIKE),
                e(Torsion, Min, -20.0, SPIKE),
                e(Torsion, Max, 20.0, SPIKE),
                e(PhiDot, Min, -0.003, REL),
                e(PhiDot, Max, 0.28, REL),
                e(ThetaDot, Min, -0.5, REL),
                e(ThetaDot, Max, 0.5, REL),
                e(Probability, Min, 0.45, REL),
                e(Probability, Max, 1.0, REL),
                e(ArcLength, Total, 14.0, REL),
            ];
            (spec, expected)
        }
        PresetName::Fig5 | PresetName::Fig6 => {
            let (h, w) = if name == PresetName::Fig5 {
                (0.5, 0.2)
            } else {
                (0.5, 5.0)
            };
            let period = TAU / h;
            let spec = qubit(
                FieldParams::circular(h, w, w),
                0.0,
                FRAC_PI_4,
                period,
                period,
            );
            let expected = if name == PresetName::Fig5 {
                vec![
                    e(Probability, Min, 0.0, REL),
                    e(Probability, Max, 1.0, REL),
                    e(Speed, Min, 0.5, REL),
                    e(Speed, Max, 0.54, REL),
                    e(Curvature, Min, 1.0, REL),
                    e(Curvature, Max, 1.28, REL),
                    e(Torsion, Min, -0.64, REL),
                    e(Torsion, Max, 0.64, REL),
                    e(ArcLength, Total, 6.53, REL),
                ]
            } else {
                vec![
                    e(Probability, Min, 0.0, REL),
                    e(Probability, Max, 1.0, REL),
                    e(Speed, Min, 0.47, REL),
                    e(Speed, Max, 5.02, REL),
                    e(Curvature, Min, 1.0, REL),
                    e(Curvature, Max, 20.0, REL),
                    e(Torsion, Min, -0.55, REL),
                    e(Torsion, Max, 0.55, REL),
                    e(ArcLength, Total, 40.84, REL),
                ]
            };
            (spec, expected)
        }
        PresetName::Fig8 | PresetName::Fig9 | PresetName::Fig10 => {
            let (q, h): (f64, f64) = (1.0, 0.375);
            let f = (4.0 * h * h + q * q).sqrt();
            let period = TAU / f;
            let spec = RunSpec {
                system: System::Qutrit {
                    field: FieldParams::circular(h, 0.0, 0.0),
                    anisotropy: AnisotropyParams { q, d: 0.0 },
                },
                duration: 10.0 * period,
                natural_period: period,
                analytic: false,
            };
            let expected = match name {
                PresetName::Fig8 => vec![
                    e(Probability, Max, 1.0, REL),
                    e(PolarizationZ, Min, -1.0, REL),
                    e(PolarizationZ, Max, 1.0, REL),
                ],
                PresetName::Fig10 => vec![
                    e(ArcLength, Total, 22.13, REL),
                    e(Curvature, Min, 0.005, SPIKE),
                    e(Curvature, Max, 29.0, SPIKE),
                    e(Torsion, Min, -1e-26, SPIKE),
                    e(Torsion, Max, 1e-26, SPIKE),
                    e(TorsionSignChanges, Total, 28.0, Tolerance::Exact),
                ],
                _ => Vec::new(),
            };
            (spec, expected)
        }
    };
    FigurePreset {
        name,
        spec,
        expected,
    }
}
