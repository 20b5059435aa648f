//! Geometry of the apex trajectory on the unit sphere: spherical angles,
//! nutation/precession rates, Frenet curvature, torsion, speed and arc length,
//! plus cusp and self-intersection detection.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::elliptic::incomplete_e;
use crate::error::{Error, Result};

/// Samples with `p1² + p2²` below this are treated as sitting on a pole.
pub const POLE_EPS: f64 = 1e-12;

/// Cusp criterion: speed below this fraction of the median speed...
pub const CUSP_SPEED_RATIO: f64 = 0.05;
/// ...and curvature above this multiple of the median curvature.
pub const CUSP_CURVATURE_RATIO: f64 = 50.0;

/// Absolute torsion dead-band for sign-change counting.
pub const TORSION_DEAD_BAND: f64 = 1e-12;

/// Unit polarization vectors on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub p: Vec<[f64; 3]>,
}

impl Trajectory {
    /// Checks strictly increasing times, unit-length vectors (to 1e-9) and a
    /// uniform step (to 1e-9 relative).
    pub fn new(times: Vec<f64>, p: Vec<[f64; 3]>) -> Result<Self> {
        if times.len() != p.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times but {} vectors",
                times.len(),
                p.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "times must be strictly increasing".into(),
            ));
        }
        if let Some((i, v)) = p
            .iter()
            .enumerate()
            .find(|(_, v)| (norm(v) - 1.0).abs() > 1e-9)
        {
            return Err(Error::domain(format!(
                "sample {i} has length {} (not a unit vector)",
                norm(v)
            )));
        }
        if times.len() > 2 {
            let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
            let uneven = times
                .windows(2)
                .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(times[0].abs() * 1e-7));
            if uneven {
                return Err(Error::InvalidArgument("time grid is not uniform".into()));
            }
        }
        Ok(Trajectory { times, p })
    }

    /// Normalizes arbitrary non-zero vectors (e.g. a decaying Bloch vector).
    pub fn from_vectors(times: Vec<f64>, v: &[[f64; 3]]) -> Result<Self> {
        let mut p = Vec::with_capacity(v.len());
        for (i, r) in v.iter().enumerate() {
            let n = norm(r);
            if !(n > 1e-300) || !n.is_finite() {
                return Err(Error::domain(format!("vector {i} has no direction")));
            }
            p.push([r[0] / n, r[1] / n, r[2] / n]);
        }
        Trajectory::new(times, p)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Applies a rigid rotation (row-major 3×3) to every sample.
    pub fn rotated(&self, m: &[[f64; 3]; 3]) -> Self {
        Trajectory {
            times: self.times.clone(),
            p: self.p.iter().map(|v| mat_vec(m, v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometrySample {
    pub t: f64,
    pub theta: f64,
    /// Unwrapped azimuth; interpolated across pole samples.
    pub phi: f64,
    /// `None` at the poles.
    pub theta_dot: Option<f64>,
    pub phi_dot: Option<f64>,
    pub curvature: f64,
    pub torsion: f64,
    pub speed: f64,
    pub arc_length: f64,
    /// `false` where the speed is too small for curvature and torsion to
    /// carry information.
    pub reliable: bool,
}

pub(crate) fn norm(v: &[f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn mat_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

/// Polar angle `arccos p3` and, away from the poles, the azimuth in `(−π, π]`.
pub fn spherical_angles(p: &[f64; 3]) -> (f64, Option<f64>) {
    let theta = p[2].clamp(-1.0, 1.0).acos();
    let rho2 = p[0] * p[0] + p[1] * p[1];
    let phi = (rho2 > POLE_EPS).then(|| p[1].atan2(p[0]));
    (theta, phi)
}

/// Continuous azimuth from a wrapped sequence. Pole samples (`None`) are
/// filled by linear interpolation in time between their defined neighbours.
pub fn unwrap_phi(times: &[f64], phi: &[Option<f64>]) -> Vec<f64> {
    use std::f64::consts::{PI, TAU};
    let mut out = vec![f64::NAN; phi.len()];
    let mut prev: Option<f64> = None;
    for (o, v) in out.iter_mut().zip(phi) {
        if let Some(raw) = v {
            let val = match prev {
                None => *raw,
                Some(p) => raw + TAU * ((p - raw + PI) / TAU).floor(),
            };
            *o = val;
            prev = Some(val);
        }
    }
    let defined: Vec<usize> = (0..out.len()).filter(|&i| out[i].is_finite()).collect();
    if defined.is_empty() {
        return vec![0.0; phi.len()];
    }
    for i in 0..out.len() {
        if out[i].is_finite() {
            continue;
        }
        let after = defined.partition_point(|&j| j < i);
        out[i] = match (after.checked_sub(1).map(|k| defined[k]), defined.get(after)) {
            (Some(a), Some(&b)) => {
                let w = (times[i] - times[a]) / (times[b] - times[a]);
                out[a] + w * (out[b] - out[a])
            }
            (Some(a), None) => out[a],
            (None, Some(&b)) => out[b],
            (None, None) => unreachable!(),
        };
    }
    out
}

/// Nutation and precession rates `(θ′, φ′)` of a unit vector precessing
/// about the field `h` (`p′ = h × p`). Either is `None` at the poles.
pub fn angular_velocities(p: &[f64; 3], h: &[f64; 3]) -> (Option<f64>, Option<f64>) {
    let rho2 = p[0] * p[0] + p[1] * p[1];
    if rho2 <= POLE_EPS {
        return (None, None);
    }
    let sin_theta = (1.0 - p[2] * p[2]).max(rho2).sqrt();
    let theta_dot = (h[1] * p[0] - h[0] * p[1]) / sin_theta;
    let phi_dot = h[2] - (h[0] * p[0] + h[1] * p[1]) * p[2] / rho2;
    (Some(theta_dot), Some(phi_dot))
}

/// Same rates from a tangent vector `p′` instead of the field.
fn angular_rates_from_tangent(p: &[f64; 3], dp: &[f64; 3]) -> (Option<f64>, Option<f64>) {
    let rho2 = p[0] * p[0] + p[1] * p[1];
    if rho2 <= POLE_EPS {
        return (None, None);
    }
    let theta_dot = -dp[2] / rho2.sqrt();
    let phi_dot = (p[0] * dp[1] - p[1] * dp[0]) / rho2;
    (Some(theta_dot), Some(phi_dot))
}

/// Finite-difference weights for derivatives `0..=m` at `z` from nodes `x`.
fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

const STENCIL: usize = 7;

/// Seven-point first to third derivative weights on a unit-spaced grid, for
/// every position of the evaluation point inside the stencil.
fn stencil_weights() -> [[[f64; STENCIL]; 3]; STENCIL] {
    let nodes: Vec<f64> = (0..STENCIL).map(|i| i as f64).collect();
    let mut out = [[[0.0; STENCIL]; 3]; STENCIL];
    for (pos, slot) in out.iter_mut().enumerate() {
        let w = fornberg(pos as f64, &nodes, 3);
        for d in 0..3 {
            slot[d].copy_from_slice(&w[d + 1]);
        }
    }
    out
}

/// First three derivatives of a uniformly sampled vector series using
/// centered seven-point stencils (shifted near the ends).
pub fn derivatives(dt: f64, values: &[[f64; 3]]) -> Result<Vec<[[f64; 3]; 3]>> {
    let n = values.len();
    if n < STENCIL {
        return Err(Error::InvalidArgument(format!(
            "need at least {STENCIL} samples, got {n}"
        )));
    }
    let weights = stencil_weights();
    let scale = [1.0 / dt, 1.0 / (dt * dt), 1.0 / (dt * dt * dt)];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let lo = i.saturating_sub(STENCIL / 2).min(n - STENCIL);
        let w = &weights[i - lo];
        let mut d = [[0.0; 3]; 3];
        for (order, dv) in d.iter_mut().enumerate() {
            for (j, wj) in w[order].iter().enumerate() {
                let v = &values[lo + j];
                for c in 0..3 {
                    dv[c] += wj * v[c];
                }
            }
            for c in dv.iter_mut() {
                *c *= scale[order];
            }
        }
        out.push(d);
    }
    Ok(out)
}

/// Derivative of a uniformly sampled scalar series (seven-point stencils).
pub fn scalar_derivative(dt: f64, values: &[f64]) -> Result<Vec<f64>> {
    let lifted: Vec<[f64; 3]> = values.iter().map(|&v| [v, 0.0, 0.0]).collect();
    Ok(derivatives(dt, &lifted)?.iter().map(|d| d[0][0]).collect())
}

/// Cumulative integral of a uniformly sampled series, integrating the local
/// cubic interpolant over each interval.
pub fn cumulative_integral(dt: f64, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut s = vec![0.0; n];
    if n < 2 {
        return s;
    }
    if n < 4 {
        for i in 1..n {
            s[i] = s[i - 1] + 0.5 * dt * (f[i - 1] + f[i]);
        }
        return s;
    }
    for i in 0..n - 1 {
        let piece = if i == 0 {
            9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
        } else if i == n - 2 {
            f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]
        } else {
            -f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2]
        };
        s[i + 1] = s[i] + dt / 24.0 * piece;
    }
    s
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Curvature `|p′×p″|/|p′|³`, torsion `(p′, p″, p‴)/|p′×p″|²`, speed `|p′|`
/// and arc length for every sample, with angle rates taken from `p′`.
pub fn frenet_geometry(traj: &Trajectory) -> Result<Vec<GeometrySample>> {
    let n = traj.len();
    if n < STENCIL {
        return Err(Error::InvalidArgument(format!(
            "need at least {STENCIL} samples, got {n}"
        )));
    }
    let dt = (traj.times[n - 1] - traj.times[0]) / (n - 1) as f64;
    let ders = derivatives(dt, &traj.p)?;
    let speed: Vec<f64> = ders.iter().map(|d| norm(&d[0])).collect();
    let arc = cumulative_integral(dt, &speed);
    let median_speed = median(speed.iter().copied());
    let floor = 1e-7 * median_speed;

    let angles: Vec<(f64, Option<f64>)> = traj.p.iter().map(spherical_angles).collect();
    let raw_phi: Vec<Option<f64>> = angles.iter().map(|a| a.1).collect();
    let phi = unwrap_phi(&traj.times, &raw_phi);

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let [d1, d2, d3] = ders[i];
        let b = cross(&d1, &d2);
        let b2 = dot(&b, &b);
        let v = speed[i];
        let curvature = b2.sqrt() / (v * v * v);
        let torsion = dot(&b, &d3) / b2;
        let reliable = v > floor && b2 > 0.0 && curvature.is_finite() && torsion.is_finite();
        let (theta_dot, phi_dot) = angular_rates_from_tangent(&traj.p[i], &d1);
        out.push(GeometrySample {
            t: traj.times[i],
            theta: angles[i].0,
            phi: phi[i],
            theta_dot,
            phi_dot,
            curvature,
            torsion,
            speed: v,
            arc_length: arc[i],
            reliable,
        });
    }
    Ok(out)
}

/// Samples at each end of a trajectory that only one-sided stencils reach.
pub const EDGE_SAMPLES: usize = STENCIL / 2;

/// Frenet geometry of samples `margin..len - margin`, with the outer samples
/// serving only as stencil support. Arc length restarts at zero.
pub fn frenet_geometry_interior(traj: &Trajectory, margin: usize) -> Result<Vec<GeometrySample>> {
    let n = traj.len();
    if n < 2 * margin + 1 {
        return Err(Error::InvalidArgument(format!(
            "{n} samples leave nothing inside a margin of {margin}"
        )));
    }
    let mut all = frenet_geometry(traj)?;
    all.truncate(n - margin);
    let mut inner = all.split_off(margin);
    let s0 = inner[0].arc_length;
    for s in &mut inner {
        s.arc_length -= s0;
    }
    Ok(inner)
}

/// Overrides the angle rates with the field form, for trajectories driven by
/// a known field with `p′ = h × p`.
pub fn apply_field_rates(samples: &mut [GeometrySample], p: &[[f64; 3]], fields: &[[f64; 3]]) {
    for ((s, pv), h) in samples.iter_mut().zip(p).zip(fields) {
        let (a, b) = angular_velocities(pv, h);
        s.theta_dot = a;
        s.phi_dot = b;
    }
}

/// Closed-form curvature, torsion, speed and arc length of the trajectory at
/// exact resonance in a circular field, starting at the north pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceGeometry {
    pub curvature: f64,
    pub torsion: f64,
    pub speed: f64,
    pub arc_length: f64,
}

pub fn resonance_geometry(t: f64, h: f64, omega: f64) -> Result<ResonanceGeometry> {
    if h == 0.0 {
        return Err(Error::domain("resonance geometry needs h != 0"));
    }
    let (h2, w2) = (h * h, omega * omega);
    let c2 = (2.0 * h * t).cos();
    let c4 = (4.0 * h * t).cos();
    let g = 4.0 * (w2 * w2 - h2 * h2 + 3.0 * w2 * h2) * w2 * c2 - (w2 - h2) * w2 * w2 * c4;
    let num = (h2 + 3.0 * w2) * (8.0 * h2 * h2 + 4.0 * w2 * h2 + w2 * w2) - g;
    let den = 2.0 * h2 + w2 - w2 * c2;
    let curvature = num.sqrt() / den.powf(1.5);
    let torsion = -4.0
        * h
        * omega
        * (4.0 * h2 * h2 + 7.0 * w2 * h2 + w2 * w2 + w2 * (h2 - w2) * c2)
        * (h * t).sin()
        / num;
    let speed = (0.5 * den).sqrt();
    let arc_length = incomplete_e(h.abs() * t, -w2 / h2)?;
    Ok(ResonanceGeometry {
        curvature,
        torsion,
        speed,
        arc_length,
    })
}

/// `1/k² + (k′/(v k² κ))² − 1` where `k′ = dk/dt`; `None` when torsion or
/// speed is too small for the expression to be meaningful.
pub fn adjoining_sphere_residual(sample: &GeometrySample, k_prime: f64) -> Option<f64> {
    let (k, kappa, v) = (sample.curvature, sample.torsion, sample.speed);
    if !sample.reliable || kappa.abs() < 1e-8 || v < 1e-8 || !k_prime.is_finite() {
        return None;
    }
    let ratio = k_prime / (v * k * k * kappa);
    Some(1.0 / (k * k) + ratio * ratio - 1.0)
}

/// Time derivative of the curvature series.
pub fn curvature_rate(samples: &[GeometrySample]) -> Result<Vec<f64>> {
    let n = samples.len();
    if n < STENCIL {
        return Err(Error::InvalidArgument("too few samples".into()));
    }
    let dt = (samples[n - 1].t - samples[0].t) / (n - 1) as f64;
    let k: Vec<f64> = samples.iter().map(|s| s.curvature).collect();
    scalar_derivative(dt, &k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspEvent {
    pub index: usize,
    pub t: f64,
    pub speed: f64,
    pub curvature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopEvent {
    /// Start times of the two crossing segments.
    pub t_first: f64,
    pub t_second: f64,
    pub point: [f64; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrajectoryEvents {
    pub cusps: Vec<CuspEvent>,
    pub loops: Vec<LoopEvent>,
}

/// Finds cusps (local speed minima with a curvature spike, relative to the
/// medians) and proper self-crossings of the spherical polyline.
pub fn cusp_and_loop_detector(traj: &Trajectory, geometry: &[GeometrySample]) -> TrajectoryEvents {
    let mut events = TrajectoryEvents::default();
    let n = geometry.len().min(traj.len());
    if n >= 3 {
        let ms = median(geometry.iter().map(|g| g.speed));
        let mk = median(geometry.iter().map(|g| g.curvature));
        for i in 1..n - 1 {
            let g = &geometry[i];
            let local_min = g.speed <= geometry[i - 1].speed && g.speed < geometry[i + 1].speed;
            if local_min
                && g.speed < CUSP_SPEED_RATIO * ms
                && g.curvature > CUSP_CURVATURE_RATIO * mk
            {
                events.cusps.push(CuspEvent {
                    index: i,
                    t: g.t,
                    speed: g.speed,
                    curvature: g.curvature,
                });
            }
        }
    }
    events.loops = self_intersections(traj);
    events
}

/// Proper crossing of the short great-circle arcs `ab` and `cd`, with a
/// small angular tolerance so shared or touching endpoints do not count.
fn arcs_cross(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], d: &[f64; 3]) -> Option<[f64; 3]> {
    const TOL: f64 = 1e-9;
    let n1 = cross(a, b);
    let n2 = cross(c, d);
    let (l1, l2) = (norm(&n1), norm(&n2));
    if l1 == 0.0 || l2 == 0.0 {
        return None;
    }
    let sc = dot(&n1, c) / l1;
    let sd = dot(&n1, d) / l1;
    let sa = dot(&n2, a) / l2;
    let sb = dot(&n2, b) / l2;
    let straddles = |u: f64, v: f64| (u > TOL && v < -TOL) || (u < -TOL && v > TOL);
    if !(straddles(sc, sd) && straddles(sa, sb)) {
        return None;
    }
    let ab = [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let cd = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
    if dot(&ab, &cd) <= 0.0 {
        return None;
    }
    let mut x = cross(&n1, &n2);
    let lx = norm(&x);
    if lx == 0.0 {
        return None;
    }
    if dot(&x, &ab) < 0.0 {
        x = [-x[0], -x[1], -x[2]];
    }
    Some([x[0] / lx, x[1] / lx, x[2] / lx])
}

fn self_intersections(traj: &Trajectory) -> Vec<LoopEvent> {
    let p = &traj.p;
    let n = p.len();
    if n < 4 {
        return Vec::new();
    }
    let seg_len: Vec<f64> = p
        .windows(2)
        .map(|w| norm(&[w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]]))
        .collect();
    let typical = median(seg_len.iter().copied());
    let cell = (4.0 * typical).max(1e-9);
    let key = |v: f64| (v / cell).floor() as i64;

    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for s in 0..n - 1 {
        let (a, b) = (&p[s], &p[s + 1]);
        // The arc bulges outside its chord by at most len²/8.
        let pad = seg_len[s] * seg_len[s] / 8.0 + 1e-12;
        let lo: Vec<i64> = (0..3).map(|c| key(a[c].min(b[c]) - pad)).collect();
        let hi: Vec<i64> = (0..3).map(|c| key(a[c].max(b[c]) + pad)).collect();
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    grid.entry((x, y, z)).or_default().push(s);
                }
            }
        }
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for bucket in grid.values() {
        for (ii, &i) in bucket.iter().enumerate() {
            for &j in &bucket[ii + 1..] {
                let (i, j) = if i < j { (i, j) } else { (j, i) };
                if j <= i + 1 || !seen.insert((i, j)) {
                    continue;
                }
                if let Some(point) = arcs_cross(&p[i], &p[i + 1], &p[j], &p[j + 1]) {
                    out.push(LoopEvent {
                        t_first: traj.times[i],
                        t_second: traj.times[j],
                        point,
                    });
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.t_first
            .total_cmp(&b.t_first)
            .then(a.t_second.total_cmp(&b.t_second))
    });
    out
}

/// Number of torsion sign changes among reliable samples. Samples inside the
/// dead-band are skipped, unless the whole series lies inside it, in which
/// case the raw signs are used.
pub fn torsion_sign_changes(samples: &[GeometrySample]) -> usize {
    let vals: Vec<f64> = samples
        .iter()
        .filter(|s| s.reliable && s.torsion.is_finite())
        .map(|s| s.torsion)
        .collect();
    let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let band = if max < TORSION_DEAD_BAND {
        0.0
    } else {
        TORSION_DEAD_BAND
    };
    let mut last = 0.0f64;
    let mut count = 0;
    for v in vals {
        if v.abs() <= band {
            continue;
        }
        let s = v.signum();
        if last != 0.0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}
