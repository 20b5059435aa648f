//! Spin-1 (qutrit) dynamics with quadrupole anisotropy.
//!
//! The density matrix is evolved directly under `∂ρ/∂t = −i[Ĥ, ρ]` and the
//! 8-component generalized Bloch vector is read off afterwards with a fixed
//! Hermitian basis normalized to `Tr(ΛαΛβ) = 3δαβ`.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{self, IntegratorConfig, OutputMode, Solution};
use crate::qubit::{field_at, sinc, FieldParams};

pub type CMatrix3 = Matrix3<Complex64>;

const SQRT_3_2: f64 = 1.224_744_871_391_589;
const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;
const SQRT_6: f64 = 2.449_489_742_783_178;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real_matrix(m: [[f64; 3]; 3]) -> CMatrix3 {
    CMatrix3::from_fn(|i, j| c(m[i][j], 0.0))
}

/// Spin-1 matrices `(S1, S2, S3)` in the `|+1⟩, |0⟩, |−1⟩` basis.
pub fn spin_matrices() -> [CMatrix3; 3] {
    let r = FRAC_1_SQRT_2;
    let s1 = real_matrix([[0.0, r, 0.0], [r, 0.0, r], [0.0, r, 0.0]]);
    let mut s2 = CMatrix3::zeros();
    s2[(0, 1)] = c(0.0, -r);
    s2[(1, 0)] = c(0.0, r);
    s2[(1, 2)] = c(0.0, -r);
    s2[(2, 1)] = c(0.0, r);
    let s3 = real_matrix([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
    [s1, s2, s3]
}

/// The eight basis matrices `Λ1..Λ8`. The first three are the scaled spin
/// operators; `Λ6` measures the population of `|0⟩` against the outer levels.
pub fn bloch_basis() -> [CMatrix3; 8] {
    let [s1, s2, s3] = spin_matrices();
    let k = c(SQRT_3_2, 0.0);
    let mut y13 = CMatrix3::zeros();
    y13[(0, 2)] = c(0.0, -1.0);
    y13[(2, 0)] = c(0.0, 1.0);
    let x13 = real_matrix([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]);
    let r = FRAC_1_SQRT_2;
    [
        s1 * k,
        s2 * k,
        s3 * k,
        y13 * k,
        (s3 * s2 + s2 * s3) * k,
        real_matrix([[r, 0.0, 0.0], [0.0, -2.0 * r, 0.0], [0.0, 0.0, r]]),
        (s3 * s1 + s1 * s3) * k,
        x13 * k,
    ]
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AnisotropyParams {
    #[serde(rename = "Q")]
    pub q: f64,
    pub d: f64,
}

impl AnisotropyParams {
    pub fn new(q: f64, d: f64) -> Result<Self> {
        if !(q.is_finite() && d.is_finite()) {
            return Err(Error::InvalidArgument(
                "anisotropy constants must be finite".into(),
            ));
        }
        Ok(AnisotropyParams { q, d })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix3(CMatrix3);

impl DensityMatrix3 {
    /// Validates Hermiticity and unit trace (to 1e-12) and positivity
    /// (eigenvalues above −1e-9).
    pub fn new(rho: CMatrix3) -> Result<Self> {
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("density matrix has non-finite entries"));
        }
        let asym = (rho - rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > 1e-12 {
            return Err(Error::domain(format!(
                "density matrix not Hermitian ({asym:e})"
            )));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::domain(format!("density matrix trace is {tr}")));
        }
        let out = DensityMatrix3(hermitize(&rho));
        let min = out
            .eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-9 {
            return Err(Error::domain(format!(
                "density matrix has eigenvalue {min:e}"
            )));
        }
        Ok(out)
    }

    /// The pure state `|+1⟩⟨+1|`, the north pole of the polarization sphere.
    pub fn north() -> Self {
        let mut m = CMatrix3::zeros();
        m[(0, 0)] = c(1.0, 0.0);
        DensityMatrix3(m)
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix3(CMatrix3::identity() / c(3.0, 0.0))
    }

    pub fn matrix(&self) -> &CMatrix3 {
        &self.0
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        let ev = self.0.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2]];
        out.sort_by(|a, b| a.total_cmp(b));
        out
    }
}

fn hermitize(m: &CMatrix3) -> CMatrix3 {
    (m + m.adjoint()) * c(0.5, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qutrit8 {
    pub q: [f64; 8],
    pub t: f64,
}

impl Qutrit8 {
    pub fn norm(&self) -> f64 {
        self.q.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn populations(&self) -> Result<Populations> {
        populations(self.q[2], self.q[5])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub p_plus: f64,
    pub p_zero: f64,
    pub p_minus: f64,
}

impl Populations {
    pub fn sum(&self) -> f64 {
        self.p_plus + self.p_zero + self.p_minus
    }
}

/// `Ĥ = h(t)·S + Q(S3² − 2/3) + d(S1² − S2²)`.
pub fn qutrit_hamiltonian(t: f64, fp: &FieldParams, ap: &AnisotropyParams) -> CMatrix3 {
    let [s1, s2, s3] = spin_matrices();
    let h = field_at(t, fp);
    let two_thirds = CMatrix3::identity() * c(2.0 / 3.0, 0.0);
    s1 * c(h[0], 0.0)
        + s2 * c(h[1], 0.0)
        + s3 * c(h[2], 0.0)
        + (s3 * s3 - two_thirds) * c(ap.q, 0.0)
        + (s1 * s1 - s2 * s2) * c(ap.d, 0.0)
}

/// `−i[Ĥ(t), ρ]`, formed as `−i(A − A†)` with `A = Ĥρ` so the result is
/// Hermitian to the last bit.
pub fn qutrit_rhs(t: f64, rho: &CMatrix3, fp: &FieldParams, ap: &AnisotropyParams) -> CMatrix3 {
    let a = qutrit_hamiltonian(t, fp, ap) * rho;
    (a - a.adjoint()) * c(0.0, -1.0)
}

/// Row-major real/imaginary interleaving used for integration.
pub fn flatten(m: &CMatrix3) -> [f64; 18] {
    let mut out = [0.0; 18];
    for i in 0..3 {
        for j in 0..3 {
            let z = m[(i, j)];
            out[2 * (3 * i + j)] = z.re;
            out[2 * (3 * i + j) + 1] = z.im;
        }
    }
    out
}

pub fn unflatten(v: &[f64; 18]) -> CMatrix3 {
    CMatrix3::from_fn(|i, j| c(v[2 * (3 * i + j)], v[2 * (3 * i + j) + 1]))
}

pub struct QutritSolution {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix3>,
    pub stats: integrator::IntegrationStats,
}

/// Integrates the von Neumann equation onto a uniform grid. Output states are
/// re-symmetrized; a Hermiticity drift above 1e-12 is reported as a failure.
pub fn integrate_qutrit(
    fp: &FieldParams,
    ap: &AnisotropyParams,
    rho0: &DensityMatrix3,
    t_span: (f64, f64),
    samples: usize,
    mode: OutputMode,
    cfg: &IntegratorConfig,
) -> Result<QutritSolution> {
    fp.validate()?;
    let grid = integrator::uniform_grid(t_span.0, t_span.1, samples);
    let rhs = |t: f64, y: &[f64; 18]| flatten(&qutrit_rhs(t, &unflatten(y), fp, ap));
    let Solution {
        times,
        states,
        stats,
    } = integrator::integrate_on(rhs, flatten(rho0.matrix()), &grid, mode, cfg)?;
    let mut out = Vec::with_capacity(states.len());
    for (t, y) in times.iter().zip(&states) {
        let m = unflatten(y);
        let drift = (m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if drift > 1e-12 {
            return Err(Error::Integration {
                t_last: *t,
                reason: format!("Hermiticity drift {drift:e}"),
            });
        }
        out.push(DensityMatrix3(hermitize(&m)));
    }
    Ok(QutritSolution {
        times,
        states: out,
        stats,
    })
}

/// `qα = Tr(ρΛα)`.
pub fn bloch8_from_density(rho: &DensityMatrix3, t: f64) -> Qutrit8 {
    let basis = bloch_basis();
    let mut q = [0.0; 8];
    for (qa, l) in q.iter_mut().zip(&basis) {
        *qa = (rho.matrix() * l).trace().re;
    }
    Qutrit8 { q, t }
}

/// Inverse of [`bloch8_from_density`]: `ρ = (E + Σ qαΛα)/3`.
pub fn density_from_bloch8(q: &Qutrit8) -> Result<DensityMatrix3> {
    let basis = bloch_basis();
    let mut m = CMatrix3::identity();
    for (qa, l) in q.q.iter().zip(&basis) {
        m += l * c(*qa, 0.0);
    }
    DensityMatrix3::new(m / c(3.0, 0.0))
}

/// Level populations from the two diagonal components `q3`, `q6`.
pub fn populations(q3: f64, q6: f64) -> Result<Populations> {
    let p = Populations {
        p_plus: (2.0 + SQRT_6 * q3 + std::f64::consts::SQRT_2 * q6) / 6.0,
        p_zero: (1.0 - std::f64::consts::SQRT_2 * q6) / 3.0,
        p_minus: (2.0 - SQRT_6 * q3 + std::f64::consts::SQRT_2 * q6) / 6.0,
    };
    for v in [p.p_plus, p.p_zero, p.p_minus] {
        if !(-1e-9..=1.0 + 1e-9).contains(&v) {
            return Err(Error::domain(format!(
                "population {v} outside [0, 1]; (q3, q6) = ({q3}, {q6}) is not a state"
            )));
        }
    }
    Ok(p)
}

/// Unit polarization `(q1, q2, q3)/N`, or `None` when `N` is too small to
/// define a direction.
pub fn qutrit_polarization(q: &Qutrit8) -> Option<[f64; 3]> {
    let n = (q.q[0] * q.q[0] + q.q[1] * q.q[1] + q.q[2] * q.q[2]).sqrt();
    if n > 1e-12 {
        Some([q.q[0] / n, q.q[1] / n, q.q[2] / n])
    } else {
        None
    }
}

/// Exact resonance (`ω = H`, `d = 0`) solution from the north pole.
///
/// Uses `σ = sin(ft/2)/f` so that `f = √(4h² + Q²) → 0` needs no special case.
pub fn analytic_qutrit_resonance(t: f64, h: f64, q: f64, omega: f64) -> Qutrit8 {
    let f = (4.0 * h * h + q * q).sqrt();
    let sigma = 0.5 * t * sinc(0.5 * f * t);
    let cf = (0.5 * f * t).cos();
    let (sq, cq) = (0.5 * q * t).sin_cos();
    let (sw, cw) = (omega * t).sin_cos();
    let (s2w, c2w) = (2.0 * omega * t).sin_cos();
    let hs = SQRT_6 * h * sigma;
    let h2s2 = h * h * sigma * sigma;
    Qutrit8 {
        q: [
            hs * (cq * sw + q * sigma * cw),
            hs * (q * sigma * sw - cq * cw),
            SQRT_3_2 * (q * sigma * sq + cf * cq),
            SQRT_3_2 * (-2.0 * h2s2 * s2w + (cf * sq - q * sigma * cq) * c2w),
            hs * (sq * sw - cf * cw),
            FRAC_1_SQRT_2 - 3.0 * std::f64::consts::SQRT_2 * h2s2,
            hs * (cf * sw + sq * cw),
            SQRT_3_2 * ((q * sigma * cq - cf * sq) * s2w - 2.0 * h2s2 * c2w),
        ],
        t,
    }
}

/// Static transverse amplitude `h ≥ 0` that closes the trajectory, with
/// `x` and `y` counting the two incommensurate level splittings.
///
/// In a static field `(h, 0, 0)` the levels split into `Q/3 − d` and a pair
/// separated by `f' = √((Q + d)² + 4h²)`; closure requires
/// `x f' = y |Q − 3d|`. With `d = 0` this is `h = Q√(y² − x²)/(2x)`.
/// The negative of the returned value also closes.
pub fn closed_trajectory_amplitude_qutrit(x: i64, y: i64, q: f64, d: f64) -> Result<f64> {
    if x == 0 {
        return Err(Error::domain("x must be non-zero"));
    }
    if y.abs() < x.abs() {
        return Err(Error::domain(format!(
            "|y| = {} < |x| = {}",
            y.abs(),
            x.abs()
        )));
    }
    let gap = q - 3.0 * d;
    if gap == 0.0 {
        return Err(Error::domain("Q = 3d leaves no reference splitting"));
    }
    let ratio = y as f64 * gap / x as f64;
    let radicand = ratio * ratio - (q + d) * (q + d);
    if radicand < 0.0 {
        return Err(Error::domain(format!(
            "no real amplitude for (x, y) = ({x}, {y}) at Q = {q}, d = {d}"
        )));
    }
    Ok(0.5 * radicand.sqrt())
}

/// Common period `4π|x|/|Q − 3d|` of a closed static-field trajectory.
pub fn closed_trajectory_period_qutrit(x: i64, q: f64, d: f64) -> f64 {
    4.0 * std::f64::consts::PI * (x as f64).abs() / (q - 3.0 * d).abs()
}

/// Angular frequency of the population swing between `|+1⟩` and `|−1⟩` in a
/// static transverse field: `|f' − (Q − 3d)|/2`.
pub fn two_photon_frequency(h: f64, q: f64, d: f64) -> f64 {
    let fp = ((q + d) * (q + d) + 4.0 * h * h).sqrt();
    0.5 * (fp - (q - 3.0 * d)).abs()
}
