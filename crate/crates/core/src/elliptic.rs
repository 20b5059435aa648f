//! Jacobi elliptic functions and the elliptic integrals used by the field
//! model and the resonance arc-length formula.
//!
//! Convention: functions taking an [`EllipticModulus`] use the modulus `k`
//! (so `sn(u|k)` has quarter period `K(k)`); [`incomplete_e`] takes the
//! parameter `m` directly, because the resonance path length needs `m < 0`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

const MAX_AGM_STEPS: usize = 64;

/// Elliptic modulus `k` with `0 <= k <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub const ZERO: EllipticModulus = EllipticModulus(0.0);
    pub const ONE: EllipticModulus = EllipticModulus(1.0);

    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && (0.0..=1.0).contains(&k) {
            Ok(EllipticModulus(k))
        } else {
            Err(Error::domain(format!(
                "elliptic modulus must lie in [0, 1], got {k}"
            )))
        }
    }

    /// The modulus `k`.
    pub fn k(self) -> f64 {
        self.0
    }

    /// The parameter `m = k^2`.
    pub fn parameter(self) -> f64 {
        self.0 * self.0
    }

    /// `sn`, `cn`, `dn` at `u`; non-finite `u` propagates as NaN.
    pub fn sncndn(self, u: f64) -> JacobiTriple {
        sncndn_landen(u, self.parameter())
    }
}

impl TryFrom<f64> for EllipticModulus {
    type Error = Error;

    fn try_from(k: f64) -> Result<Self> {
        EllipticModulus::new(k)
    }
}

impl From<EllipticModulus> for f64 {
    fn from(k: EllipticModulus) -> f64 {
        k.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// `(sn(u|k), cn(u|k), dn(u|k))`.
pub fn jacobi_sncndn(u: f64, k: EllipticModulus) -> Result<JacobiTriple> {
    if !u.is_finite() {
        return Err(Error::domain(format!(
            "Jacobi argument must be finite, got {u}"
        )));
    }
    Ok(k.sncndn(u))
}

// Descending Landen transformation driven by the arithmetic-geometric mean.
fn sncndn_landen(u: f64, m: f64) -> JacobiTriple {
    if m == 0.0 {
        let (s, c) = u.sin_cos();
        return JacobiTriple {
            sn: s,
            cn: c,
            dn: 1.0,
        };
    }
    if m == 1.0 {
        let sech = 1.0 / u.cosh();
        return JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }

    let mut a = [0.0f64; MAX_AGM_STEPS + 1];
    let mut c = [0.0f64; MAX_AGM_STEPS + 1];
    a[0] = 1.0;
    c[0] = m.sqrt();
    let mut b = (1.0 - m).sqrt();
    let mut n = 0;
    while c[n].abs() > f64::EPSILON * a[n] && n < MAX_AGM_STEPS {
        let (an, bn) = (a[n], b);
        a[n + 1] = 0.5 * (an + bn);
        c[n + 1] = 0.5 * (an - bn);
        b = (an * bn).sqrt();
        n += 1;
    }

    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = k'² + m cn² stays accurate near the zeros of cn.
    let dn = ((1.0 - m) + m * cn * cn).sqrt();
    JacobiTriple { sn, cn, dn }
}

fn agm_terms(m: f64) -> (f64, f64) {
    // Returns (AGM(1, sqrt(1-m)), sum_{n>=0} 2^(n-1) c_n^2).
    // c_0^2 = m, which also covers m < 0.
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut weight = 0.5;
    let mut sum = weight * m;
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        let c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        weight *= 2.0;
        sum += weight * c * c;
    }
    (a, sum)
}

/// Complete elliptic integral of the first kind `K(k)`.
pub fn complete_k(k: EllipticModulus) -> Result<f64> {
    if k.k() == 1.0 {
        return Err(Error::Divergence("K(k) diverges at k = 1".into()));
    }
    let (agm, _) = agm_terms(k.parameter());
    Ok(PI / (2.0 * agm))
}

/// Complete elliptic integral of the second kind `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`
/// for parameter `m <= 1`.
pub fn complete_e(m: f64) -> Result<f64> {
    if !m.is_finite() || m > 1.0 {
        return Err(Error::domain(format!(
            "complete E requires finite m <= 1, got {m}"
        )));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    let (agm, sum) = agm_terms(m);
    Ok(PI / (2.0 * agm) * (1.0 - sum))
}

/// `F(φ|m) = ∫₀^φ (1 − m sin²ϑ)^{1/2} dϑ`.
///
/// The integrand power is +1/2, i.e. this is Legendre's integral of the second
/// kind. `m` may be negative; for `m > 1` the integral is defined only while
/// `m sin²ϑ <= 1` along the whole range.
pub fn incomplete_e(phi: f64, m: f64) -> Result<f64> {
    if !(phi.is_finite() && m.is_finite()) {
        return Err(Error::domain("incomplete E needs finite arguments"));
    }
    if m > 1.0 {
        let limit = (1.0 / m.sqrt()).asin();
        if phi.abs() > limit {
            return Err(Error::domain(format!(
                "integrand becomes imaginary: m sin^2 exceeds 1 beyond |phi| = {limit}"
            )));
        }
        return Ok(incomplete_e_principal(phi, m));
    }

    // Reduce to |r| <= π/2 using E(φ + nπ) = E(φ) + 2n E(m).
    let n = (phi / PI).round();
    let r = phi - n * PI;
    let base = incomplete_e_principal(r, m);
    if n == 0.0 {
        Ok(base)
    } else {
        Ok(base + 2.0 * n * complete_e(m)?)
    }
}

fn incomplete_e_principal(r: f64, m: f64) -> f64 {
    let (s, c) = r.sin_cos();
    if m == 1.0 {
        return s;
    }
    let x = c * c;
    let y = 1.0 - m * s * s;
    s * carlson_rf(x, y, 1.0) - m / 3.0 * s * s * s * carlson_rd(x, y, 1.0)
}

/// The same integral as [`incomplete_e`] by adaptive Gauss–Kronrod quadrature.
///
/// Slower, but independent of the Carlson reduction; used as a fallback and
/// cross-check.
pub fn incomplete_e_quadrature(phi: f64, m: f64) -> Result<f64> {
    if !(phi.is_finite() && m.is_finite()) {
        return Err(Error::domain("incomplete E needs finite arguments"));
    }
    if m > 1.0 && phi.abs() > (1.0 / m.sqrt()).asin() {
        return Err(Error::domain("integrand becomes imaginary on the range"));
    }
    // Split at multiples of π/2 where the integrand may have a kink (m = 1).
    let mut total = 0.0;
    let mut a = 0.0;
    let sign = phi.signum();
    let end = phi.abs();
    while a < end {
        let b = (a + FRAC_PI_2).min(end);
        total += quadrature::integrate(
            |t: f64| {
                let s = t.sin();
                (1.0 - m * s * s).max(0.0).sqrt()
            },
            a,
            b,
            1e-15,
        )?;
        a = b;
    }
    Ok(sign * total)
}

// Carlson's symmetric integrals by the duplication theorem.
fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 0.0025;
    const C1: f64 = 1.0 / 24.0;
    const C2: f64 = 0.1;
    const C3: f64 = 3.0 / 44.0;
    const C4: f64 = 1.0 / 14.0;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        xt = 0.25 * (xt + lambda);
        yt = 0.25 * (yt + lambda);
        zt = 0.25 * (zt + lambda);
        let ave = (xt + yt + zt) / 3.0;
        let dx = (ave - xt) / ave;
        let dy = (ave - yt) / ave;
        let dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 + (C1 * e2 - C2 - C3 * e3) * e2 + C4 * e3) / ave.sqrt();
        }
    }
}

fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const ERRTOL: f64 = 0.0015;
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    let (mut xt, mut yt, mut zt) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    loop {
        let (sx, sy, sz) = (xt.sqrt(), yt.sqrt(), zt.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (zt + lambda));
        fac *= 0.25;
        xt = 0.25 * (xt + lambda);
        yt = 0.25 * (yt + lambda);
        zt = 0.25 * (zt + lambda);
        let ave = 0.2 * (xt + yt + 3.0 * zt);
        let dx = (ave - xt) / ave;
        let dy = (ave - yt) / ave;
        let dz = (ave - zt) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= ERRTOL {
            let ea = dx * dy;
            let eb = dz * dz;
            let ec = ea - eb;
            let ed = ea - 6.0 * eb;
            let ee = ed + ec + ec;
            return 3.0 * sum
                + fac
                    * (1.0
                        + ed * (-C1 + C5 * ed - C6 * dz * ee)
                        + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
                    / (ave * ave.sqrt());
        }
    }
}
