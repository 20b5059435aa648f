//! Error-controlled Dormand–Prince 5(4) integration with uniform output.
//!
//! States are fixed-size real arrays; complex matrix systems are flattened by
//! the caller. Two output modes are offered: dense-output interpolation onto
//! the grid, and re-integration that clips steps so every grid point is an
//! actual step end (no interpolation error, smoother for finite differences).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub output_points_per_period: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            output_points_per_period: 2000,
        }
    }
}

impl IntegratorConfig {
    /// Same config with `rel_tol = tol` and `abs_tol = tol / 100`.
    pub fn with_tolerance(self, tol: f64) -> Self {
        IntegratorConfig {
            rel_tol: tol,
            abs_tol: tol * 1e-2,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "integrator tolerances must be positive".into(),
            ));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidArgument("max_step must be positive".into()));
        }
        if self.output_points_per_period < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 output points per period".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputMode {
    /// Continuous extension of the 5(4) pair evaluated at grid points.
    Interpolate,
    /// Steps are shortened so that each grid point is reached exactly.
    Land,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct IntegrationStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    /// Largest accepted local error estimate, in units of the tolerance.
    pub max_error_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub stats: IntegrationStats,
}

/// `n` equally spaced points covering `[t0, t1]`, endpoints included.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let dt = (t1 - t0) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { t1 } else { t0 + dt * i as f64 })
                .collect()
        }
    }
}

/// Integrates `y' = rhs(t, y)` and samples it on a uniform grid of `samples`
/// points over `t_span` by dense-output interpolation.
pub fn integrate<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    t_span: (f64, f64),
    samples: usize,
    cfg: &IntegratorConfig,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let grid = uniform_grid(t_span.0, t_span.1, samples);
    integrate_on(rhs, y0, &grid, OutputMode::Interpolate, cfg)
}

/// Re-integrates onto a uniform grid of `n >= 7` points, landing a step on
/// every grid point.
pub fn resample_uniform<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    t_span: (f64, f64),
    n: usize,
    cfg: &IntegratorConfig,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if n < 7 {
        return Err(Error::InvalidArgument(format!(
            "uniform resampling needs at least 7 points, got {n}"
        )));
    }
    let grid = uniform_grid(t_span.0, t_span.1, n);
    integrate_on(rhs, y0, &grid, OutputMode::Land, cfg)
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

// PI controller constants.
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 50_000_000;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn scaled_rms<const N: usize>(
    v: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    cfg: &IntegratorConfig,
) -> f64 {
    if N == 0 {
        return 0.0;
    }
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = cfg.abs_tol + cfg.rel_tol * y0[i].abs().max(y1[i].abs());
            (v[i] / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    cfg: &IntegratorConfig,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let d0 = scaled_rms(y0, y0, y0, cfg);
    let d1 = scaled_rms(f0, y0, y0, cfg);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = combine(y0, h0, &[(1.0, f0)]);
    let f1 = rhs(t0 + h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = scaled_rms(&diff, y0, y0, cfg) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(cfg.max_step)
}

/// Integrates over the (strictly increasing) `times` grid, starting from
/// `y0` at `times[0]`.
pub fn integrate_on<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    times: &[f64],
    mode: OutputMode,
    cfg: &IntegratorConfig,
) -> Result<Solution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    cfg.validate()?;
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty output grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "output times must be finite and strictly increasing".into(),
        ));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial state is not finite".into()));
    }

    let t_end = *times.last().unwrap();
    let mut stats = IntegrationStats::default();
    let mut out_t = Vec::with_capacity(times.len());
    let mut out_y = Vec::with_capacity(times.len());
    out_t.push(times[0]);
    out_y.push(y0);
    if times.len() == 1 {
        return Ok(Solution {
            times: out_t,
            states: out_y,
            stats,
        });
    }

    let mut t = times[0];
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    stats.rhs_evaluations += 1;
    let mut h = initial_step(&mut rhs, t, &y, &k1, cfg);
    stats.rhs_evaluations += 1;
    let mut next = 1usize;
    let mut err_prev = 1e-4f64;
    let mut last_rejected = false;

    while next < times.len() {
        if stats.accepted_steps + stats.rejected_steps > MAX_STEPS {
            return Err(Error::Integration {
                t_last: t,
                reason: "step budget exhausted".into(),
            });
        }
        let target = match mode {
            OutputMode::Land => times[next],
            OutputMode::Interpolate => t_end,
        };
        let mut step = h.min(cfg.max_step);
        let mut lands = false;
        if t + step >= target || (target - t - step) < 1e-12 * step {
            step = target - t;
            lands = true;
        }
        if !(step > 1e-14 * t.abs().max(1.0)) {
            return Err(Error::Integration {
                t_last: t,
                reason: format!("step size underflow (h = {step:e})"),
            });
        }

        let k2 = rhs(t + C2 * step, &combine(&y, step, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * step, &combine(&y, step, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            t + C4 * step,
            &combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            t + C5 * step,
            &combine(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + step,
            &combine(
                &y,
                step,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = combine(
            &y,
            step,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let t_new = if lands { target } else { t + step };
        let k7 = rhs(t_new, &y_new);
        stats.rhs_evaluations += 6;

        let mut err_vec = [0.0; N];
        for i in 0..N {
            err_vec[i] = step
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = scaled_rms(&err_vec, &y, &y_new, cfg);
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                t_last: t,
                reason: "non-finite state or error estimate".into(),
            });
        }

        if err <= 1.0 {
            stats.accepted_steps += 1;
            stats.max_error_estimate = stats.max_error_estimate.max(err);

            // Emit grid points inside (t, t_new].
            let mut dense: Option<[[f64; N]; 4]> = None;
            while next < times.len() && times[next] <= t_new {
                let tout = times[next];
                if tout == t_new {
                    out_y.push(y_new);
                } else {
                    let coeffs = dense.get_or_insert_with(|| {
                        let mut r = [[0.0; N]; 4];
                        for i in 0..N {
                            let dy = y_new[i] - y[i];
                            let bspl = step * k1[i] - dy;
                            r[0][i] = dy;
                            r[1][i] = bspl;
                            r[2][i] = dy - step * k7[i] - bspl;
                            r[3][i] = step
                                * (D1 * k1[i]
                                    + D3 * k3[i]
                                    + D4 * k4[i]
                                    + D5 * k5[i]
                                    + D6 * k6[i]
                                    + D7 * k7[i]);
                        }
                        r
                    });
                    let theta = (tout - t) / step;
                    let theta1 = 1.0 - theta;
                    let mut yo = [0.0; N];
                    for i in 0..N {
                        yo[i] = y[i]
                            + theta
                                * (coeffs[0][i]
                                    + theta1
                                        * (coeffs[1][i]
                                            + theta * (coeffs[2][i] + theta1 * coeffs[3][i])));
                    }
                    out_y.push(yo);
                }
                out_t.push(tout);
                next += 1;
            }

            let mut fac = err.max(1e-300).powf(ALPHA) / err_prev.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = step / fac;
            if last_rejected {
                h_new = h_new.min(step);
            }
            // A clipped landing step says little about the natural step size.
            if lands && step < h {
                h_new = h_new.max(h);
            }
            err_prev = err.max(1e-4);
            last_rejected = false;
            h = h_new;
            t = t_new;
            y = y_new;
            k1 = k7;
        } else {
            stats.rejected_steps += 1;
            let fac = (err.powf(ALPHA) / SAFETY).min(1.0 / FAC_MIN);
            h = step / fac;
            last_rejected = true;
        }
    }

    Ok(Solution {
        times: out_t,
        states: out_y,
        stats,
    })
}
