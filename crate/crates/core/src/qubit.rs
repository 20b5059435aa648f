//! Qubit drive fields, the damped Bloch equations, and their exact solutions.

use serde::{Deserialize, Serialize};

use crate::elliptic::EllipticModulus;
use crate::error::{Error, Result};
use crate::integrator::{self, IntegratorConfig, OutputMode, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    /// `(h cos ωt, h sin ωt, H)`
    Circular,
    /// `(h cos ωt, 0, H)`
    Linear,
    /// `(h cn(ωt|k), h sn(ωt|k), H dn(ωt|k))`
    EllipticConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub h1: f64,
    pub h2: f64,
    #[serde(rename = "H")]
    pub big_h: f64,
    pub omega: f64,
    pub k: EllipticModulus,
    pub mode: FieldMode,
}

impl FieldParams {
    pub fn circular(h: f64, big_h: f64, omega: f64) -> Self {
        FieldParams {
            h1: h,
            h2: h,
            big_h,
            omega,
            k: EllipticModulus::ZERO,
            mode: FieldMode::Circular,
        }
    }

    pub fn linear(h: f64, big_h: f64, omega: f64) -> Self {
        FieldParams {
            h1: h,
            h2: 0.0,
            big_h,
            omega,
            k: EllipticModulus::ZERO,
            mode: FieldMode::Linear,
        }
    }

    pub fn elliptic(h: f64, big_h: f64, omega: f64, k: EllipticModulus) -> Self {
        FieldParams {
            h1: h,
            h2: h,
            big_h,
            omega,
            k,
            mode: FieldMode::EllipticConsistent,
        }
    }

    /// Transverse amplitude `h` (equal to `h1` in every mode).
    pub fn h(&self) -> f64 {
        self.h1
    }

    /// Detuning `δ = H − ω`.
    pub fn detuning(&self) -> f64 {
        self.big_h - self.omega
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.h1, self.h2, self.big_h, self.omega]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument(
                "field parameters must be finite".into(),
            ));
        }
        let ok = match self.mode {
            FieldMode::Circular => self.k.k() == 0.0 && self.h1 == self.h2,
            FieldMode::Linear => self.k.k() == 0.0 && self.h2 == 0.0,
            FieldMode::EllipticConsistent => self.h1 == self.h2,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "field amplitudes/modulus inconsistent with {:?} mode",
                self.mode
            )))
        }
    }
}

/// Magnetic field (in frequency units) at time `t`.
pub fn field_at(t: f64, fp: &FieldParams) -> [f64; 3] {
    let phase = fp.omega * t;
    match fp.mode {
        FieldMode::Circular => {
            let (s, c) = phase.sin_cos();
            [fp.h1 * c, fp.h2 * s, fp.big_h]
        }
        FieldMode::Linear => [fp.h1 * phase.cos(), 0.0, fp.big_h],
        FieldMode::EllipticConsistent => {
            let j = fp.k.sncndn(phase);
            [fp.h1 * j.cn, fp.h2 * j.sn, fp.big_h * j.dn]
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DampingParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub r_eq: f64,
}

impl DampingParams {
    pub const NONE: DampingParams = DampingParams {
        gamma1: 0.0,
        gamma2: 0.0,
        r_eq: 0.0,
    };

    /// Uniform decay at rate `gamma` toward the origin.
    pub fn uniform(gamma: f64) -> Self {
        DampingParams {
            gamma1: gamma,
            gamma2: gamma,
            r_eq: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1 >= 0.0 && self.gamma2 >= 0.0 && self.r_eq.is_finite()) {
            return Err(Error::InvalidArgument(
                "relaxation rates must be non-negative".into(),
            ));
        }
        if !(self.gamma1.is_finite() && self.gamma2.is_finite()) {
            return Err(Error::InvalidArgument(
                "relaxation rates must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub r: [f64; 3],
    pub t: f64,
}

impl BlochState {
    pub fn length(&self) -> f64 {
        bloch_length(&self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialAngles {
    pub theta0: f64,
    pub phi0: f64,
}

impl InitialAngles {
    pub const NORTH: InitialAngles = InitialAngles {
        theta0: 0.0,
        phi0: 0.0,
    };

    pub fn new(theta0: f64, phi0: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta0) {
            return Err(Error::domain(format!("theta0 = {theta0} outside [0, pi]")));
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi0) {
            return Err(Error::domain(format!("phi0 = {phi0} outside [0, 2pi)")));
        }
        Ok(InitialAngles { theta0, phi0 })
    }

    /// Unit Bloch vector of the corresponding pure state.
    pub fn to_vector(self) -> [f64; 3] {
        let (st, ct) = self.theta0.sin_cos();
        let (sp, cp) = self.phi0.sin_cos();
        [cp * st, sp * st, ct]
    }
}

/// Damped Bloch equations `dR/dt = h × R` with transverse rate `γ2` and
/// longitudinal relaxation at `γ1` toward `r_eq`.
pub fn bloch_rhs(t: f64, r: &[f64; 3], fp: &FieldParams, dp: &DampingParams) -> [f64; 3] {
    let h = field_at(t, fp);
    [
        h[1] * r[2] - h[2] * r[1] - dp.gamma2 * r[0],
        h[2] * r[0] - h[0] * r[2] - dp.gamma2 * r[1],
        h[0] * r[1] - h[1] * r[0] - dp.gamma1 * (r[2] - dp.r_eq),
    ]
}

/// Integrates the Bloch equations from `r0` at `t_span.0` onto a uniform grid.
pub fn integrate_bloch(
    fp: &FieldParams,
    dp: &DampingParams,
    r0: [f64; 3],
    t_span: (f64, f64),
    samples: usize,
    mode: OutputMode,
    cfg: &IntegratorConfig,
) -> Result<Solution<3>> {
    fp.validate()?;
    dp.validate()?;
    let grid = integrator::uniform_grid(t_span.0, t_span.1, samples);
    integrator::integrate_on(|t, r| bloch_rhs(t, r, fp, dp), r0, &grid, mode, cfg)
}

/// `sin x / x`, continuous at the origin.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Exact solution for the circular field with uniform decay `gamma`, from
/// the pure state given by `ang`.
///
/// Written with `sin(Ωt)/Ω` and `(1 − cos Ωt)/Ω²` so it stays finite as the
/// generalized Rabi frequency `Ω` goes to zero.
pub fn analytic_rabi_general(
    t: f64,
    ang: InitialAngles,
    h: f64,
    big_h: f64,
    omega: f64,
    gamma: f64,
) -> BlochState {
    let delta = big_h - omega;
    let rabi = (delta * delta + h * h).sqrt();
    let c = (rabi * t).cos();
    let s1 = t * sinc(rabi * t);
    let half = sinc(0.5 * rabi * t);
    let c2 = 0.5 * t * t * half * half;

    let (st, ct) = ang.theta0.sin_cos();
    let (sp, cp) = ang.phi0.sin_cos();
    let (swt, cwt) = (omega * t).sin_cos();
    let decay = (-gamma * t).exp();

    let r1 = -(st * (delta * cp * s1 + c * sp) - h * ct * s1) * swt
        + (h * delta * ct * c2 + st * (cp * (1.0 - delta * delta * c2) - delta * sp * s1)) * cwt;
    let r2 = (st * cp * (1.0 - delta * delta * c2) + delta * h * ct * c2 - delta * st * sp * s1)
        * swt
        - (h * ct * s1 - delta * st * cp * s1 - st * sp * c) * cwt;
    let r3 = ct * (1.0 - h * h * c2) + h * st * (delta * cp * c2 + sp * s1);

    BlochState {
        r: [decay * r1, decay * r2, decay * r3],
        t,
    }
}

/// Exact solution at resonance in the consistent elliptic field, starting
/// from the north pole.
pub fn analytic_elliptic_resonance(
    t: f64,
    h: f64,
    omega: f64,
    k: EllipticModulus,
    gamma: f64,
) -> BlochState {
    let j = k.sncndn(omega * t);
    let (s, c) = (h * t).sin_cos();
    let decay = (-gamma * t).exp();
    BlochState {
        r: [decay * j.sn * s, -decay * j.cn * s, decay * c],
        t,
    }
}

/// Probability `(1 − R3)/2` of finding the spin flipped.
pub fn spin_flip_probability(r3: f64) -> Result<f64> {
    if !(r3.abs() <= 1.0 + 1e-9) {
        return Err(Error::domain(format!("|R3| = {} exceeds 1", r3.abs())));
    }
    Ok((0.5 * (1.0 - r3)).clamp(0.0, 1.0))
}

pub fn bloch_length(r: &[f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

/// Energy `Tr(ρĤ) = ½ h·R`.
pub fn qubit_energy(r: &[f64; 3], h: &[f64; 3]) -> f64 {
    0.5 * (r[0] * h[0] + r[1] * h[1] + r[2] * h[2])
}

/// Transverse amplitude that closes the circular-field trajectory after `x`
/// drive periods and `y` Rabi periods, or `None` if none exists.
///
/// The positive root is returned; its negative is equally valid.
pub fn closed_trajectory_amplitude_qubit(
    x: i64,
    y: i64,
    omega: f64,
    big_h: f64,
) -> Result<Option<f64>> {
    if x == 0 {
        return Err(Error::domain("x must be non-zero"));
    }
    let ratio = y as f64 * omega / x as f64;
    let delta = big_h - omega;
    let radicand = ratio * ratio - delta * delta;
    if radicand < 0.0 {
        Ok(None)
    } else {
        Ok(Some(radicand.sqrt()))
    }
}

/// Common period `2π|x/ω|` of a closed circular-field trajectory.
pub fn closed_trajectory_period_qubit(x: i64, omega: f64) -> f64 {
    std::f64::consts::TAU * (x as f64 / omega).abs()
}
