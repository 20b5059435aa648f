//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
//!
//! Runs without the libtest harness so the lines always appear; the process
//! exits non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinhodo::cli::{self, Bound, ClosureSystem, PresetName, Quantity, RunOutput, System};
use spinhodo::elliptic::{jacobi_sncndn, EllipticModulus};
use spinhodo::geometry::{
    adjoining_sphere_residual, curvature_rate, frenet_geometry, resonance_geometry, GeometrySample,
    Trajectory,
};
use spinhodo::integrator::{IntegratorConfig, OutputMode};
use spinhodo::qubit::{
    analytic_elliptic_resonance, analytic_rabi_general, integrate_bloch, DampingParams,
    FieldParams, InitialAngles,
};
use spinhodo::qutrit::{
    analytic_qutrit_resonance, bloch8_from_density, integrate_qutrit, two_photon_frequency,
    AnisotropyParams, DensityMatrix3,
};

// Pinned tolerances.
const SPECIAL_FUNCTION_TOL: f64 = 1e-10;
const SPECIAL_FUNCTION_BUDGET_S: f64 = 1.0;
const RABI_DRAWS: usize = 50;
const RABI_TOL: f64 = 1e-8;
const RABI_BUDGET_S: f64 = 30.0;
const RESONANCE_IDENTITY_TOL: f64 = 1e-12;
const RESONANCE_GEOMETRY_TOL: f64 = 1e-6;
const ARC_LENGTH_REL_TOL: f64 = 0.005;
const CAPTION_REL_TOL: f64 = 0.05;
const CAPTION_SPIKE_FACTOR: f64 = 2.0;
const CAPTION_BUDGET_S: f64 = 120.0;
const PRECESSION_TOL: f64 = 1e-8;
/// Samples with `sin θ` below this are pole neighbourhoods, where `φ′`
/// carries a `1/sin²θ` amplification of the state error.
const POLE_EXCLUSION_SIN: f64 = 0.1;
const SPHERE_RESIDUAL_TOL: f64 = 1e-4;
const SPHERE_RESIDUAL_FRACTION: f64 = 0.95;
/// Smallest acceptable error reduction per grid halving.
const SPHERE_RESIDUAL_MIN_ORDER: f64 = 3.5;
const QUTRIT_ORACLE_TOL: f64 = 1e-8;
const FLIP_TOL: f64 = 1e-8;
const QUTRIT_RETURN_TOL: f64 = 1e-6;
const QUTRIT_CLOSURE_TOL: f64 = 1e-5;
const QUBIT_CLOSURE_TOL: f64 = 1e-6;
const QUBIT_CLOSURE_PAIRS: usize = 10;
const TWO_PHOTON_RATIO: (f64, f64) = (1.7, 2.3);
const LENGTH_DRIFT_TOL: f64 = 1e-9;
const TRACE_PURITY_TOL: f64 = 1e-9;
const POPULATION_SUM_TOL: f64 = 1e-12;
const ROTATION_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Outcome {
            pass,
            summary: summary.into(),
            details: Vec::new(),
        }
    }
}

fn tight() -> IntegratorConfig {
    IntegratorConfig::default().with_tolerance(1e-12)
}

fn preset_run(name: PresetName) -> RunOutput {
    cli::evaluate_preset(name, &IntegratorConfig::default()).expect("preset run")
}

fn special_function_limits() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let n = 20_001;
    for i in 0..n {
        let u = -10.0 + 20.0 * i as f64 / (n - 1) as f64;
        let z = jacobi_sncndn(u, EllipticModulus::ZERO).unwrap();
        let o = jacobi_sncndn(u, EllipticModulus::ONE).unwrap();
        let sech = 1.0 / u.cosh();
        for (a, b) in [
            (z.sn, u.sin()),
            (z.cn, u.cos()),
            (z.dn, 1.0),
            (o.sn, u.tanh()),
            (o.cn, sech),
            (o.dn, sech),
        ] {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome::new(
        worst < SPECIAL_FUNCTION_TOL && elapsed < SPECIAL_FUNCTION_BUDGET_S,
        format!("max |error| {worst:.2e} over {n} points, {elapsed:.3} s"),
    )
}

fn rabi_analytic_vs_numeric() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for draw in 0..RABI_DRAWS {
        let h: f64 = rng.gen_range(-5.0..5.0);
        let big_h: f64 = rng.gen_range(-5.0..5.0);
        let omega: f64 = rng.gen_range(-5.0..5.0);
        let gamma = rng.gen_range(0.0..0.5);
        let ang = InitialAngles::new(rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU)).unwrap();
        let rabi = ((big_h - omega) * (big_h - omega) + h * h).sqrt();
        let duration = 5.0 * TAU / rabi;
        let sol = integrate_bloch(
            &FieldParams::circular(h, big_h, omega),
            &DampingParams::uniform(gamma),
            ang.to_vector(),
            (0.0, duration),
            1001,
            OutputMode::Interpolate,
            &tight(),
        );
        let sol = match sol {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("draw {draw}: {e}"));
                continue;
            }
        };
        let mut dev: f64 = 0.0;
        for (t, r) in sol.times.iter().zip(&sol.states) {
            let a = analytic_rabi_general(*t, ang, h, big_h, omega, gamma).r;
            for c in 0..3 {
                dev = dev.max((a[c] - r[c]).abs());
            }
        }
        if dev >= RABI_TOL {
            failures.push(format!(
                "draw {draw}: h={h:.3} H={big_h:.3} w={omega:.3} g={gamma:.3} deviation {dev:.2e}"
            ));
        }
        worst = worst.max(dev);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let mut out = Outcome::new(
        failures.is_empty() && worst < RABI_TOL && elapsed < RABI_BUDGET_S,
        format!(
            "{RABI_DRAWS} draws, 5 Rabi periods each: max deviation {worst:.2e}, {elapsed:.2} s"
        ),
    );
    out.details = failures;
    out
}

fn resonance_identity() -> Outcome {
    let (h, omega, gamma) = (0.7, 1.9, 0.05);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let t = 0.02 * i as f64;
        let r12 = analytic_elliptic_resonance(t, h, omega, EllipticModulus::ZERO, gamma).r;
        // Rabi triple from the north pole at zero detuning.
        let e = (-gamma * t).exp();
        let (sh, ch) = (h * t).sin_cos();
        let (sw, cw) = (omega * t).sin_cos();
        let r10 = [e * sh * sw, -e * sh * cw, e * ch];
        for c in 0..3 {
            worst = worst.max((r12[c] - r10[c]).abs());
        }
    }
    Outcome::new(
        worst < RESONANCE_IDENTITY_TOL,
        format!("1000-point grid, max |difference| {worst:.2e}"),
    )
}

fn resonance_geometry_match() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for name in [PresetName::Fig5, PresetName::Fig6] {
        let out = preset_run(name);
        let (h, omega) = match out.report.spec.system {
            System::Qubit { field, .. } => (field.h(), field.omega),
            _ => unreachable!(),
        };
        let traj = out.trajectory().unwrap();
        let events = spinhodo::geometry::cusp_and_loop_detector(&traj, &out.geometry);
        let near_cusp = |i: usize| events.cusps.iter().any(|c| c.index.abs_diff(i) <= 3);
        let (mut dk, mut dtau, mut dv) = (0.0f64, 0.0f64, 0.0f64);
        for (i, g) in out.geometry.iter().enumerate() {
            if !g.reliable || near_cusp(i) {
                continue;
            }
            let r = resonance_geometry(g.t, h, omega).unwrap();
            dk = dk.max((g.curvature - r.curvature).abs());
            dtau = dtau.max((g.torsion - r.torsion).abs());
            dv = dv.max((g.speed - r.speed).abs());
        }
        let last = out.geometry.last().unwrap();
        let s_ref = resonance_geometry(last.t, h, omega).unwrap().arc_length;
        let s_rel = (last.arc_length - s_ref).abs() / s_ref;
        let ok = dk < RESONANCE_GEOMETRY_TOL
            && dtau < RESONANCE_GEOMETRY_TOL
            && dv < RESONANCE_GEOMETRY_TOL
            && s_rel < ARC_LENGTH_REL_TOL;
        pass &= ok;
        details.push(format!(
            "{name}: |dk| {dk:.2e}, |dtorsion| {dtau:.2e}, |dv| {dv:.2e}, s {:.5} vs {s_ref:.5} ({:.3}%), {} cusps {}",
            last.arc_length,
            100.0 * s_rel,
            events.cusps.len(),
            if ok { "ok" } else { "FAIL" }
        ));
    }
    Outcome {
        pass,
        summary: "closed-form curvature, torsion, speed and arc length vs finite differences"
            .into(),
        details,
    }
}

struct CaptionItem {
    preset: PresetName,
    quantity: Quantity,
    bound: Bound,
    expected: f64,
    spike: bool,
}

fn caption_items() -> Vec<CaptionItem> {
    use Bound::*;
    use PresetName::*;
    use Quantity::*;
    let item = |preset, quantity, bound, expected, spike| CaptionItem {
        preset,
        quantity,
        bound,
        expected,
        spike,
    };
    vec![
        item(Fig2, Probability, Min, 0.06, false),
        item(Fig2, Probability, Max, 0.211, false),
        item(Fig2, ArcLength, Total, 10.44, false),
        item(Fig3, ArcLength, Total, 8.6, false),
        item(Fig3, Speed, Min, 0.015, false),
        item(Fig3, Speed, Max, 0.78, false),
        item(Fig3, Curvature, Max, 8500.0, true),
        item(Fig4, ArcLength, Total, 14.0, false),
        item(Fig4, Curvature, Max, 25000.0, true),
        item(Fig5, ArcLength, Total, 6.53, false),
        item(Fig5, Speed, Min, 0.5, false),
        item(Fig5, Speed, Max, 0.54, false),
        item(Fig5, Curvature, Min, 1.0, false),
        item(Fig5, Curvature, Max, 1.28, false),
        item(Fig5, Torsion, Min, -0.64, false),
        item(Fig5, Torsion, Max, 0.64, false),
        item(Fig5, Probability, Min, 0.0, false),
        item(Fig5, Probability, Max, 1.0, false),
        item(Fig6, ArcLength, Total, 40.84, false),
        item(Fig6, Speed, Min, 0.47, false),
        item(Fig6, Speed, Max, 5.02, false),
        item(Fig6, Curvature, Min, 1.0, false),
        item(Fig6, Curvature, Max, 20.0, false),
        item(Fig7, ArcLength, Total, 6.44, false),
        item(Fig7, Speed, Min, 0.14, false),
        item(Fig7, Speed, Max, 0.77, false),
        item(Fig10, ArcLength, Total, 22.13, false),
        item(Fig10, Curvature, Min, 0.005, true),
        item(Fig10, Curvature, Max, 29.0, true),
        item(Fig10, TorsionSignChanges, Total, 28.0, false),
    ]
}

fn observed(out: &RunOutput, q: Quantity, b: Bound) -> f64 {
    let o = &out.report.observed;
    let r = match q {
        Quantity::Probability => o.probability,
        Quantity::Speed => o.speed,
        Quantity::Curvature => o.curvature,
        Quantity::Torsion => o.torsion,
        Quantity::ThetaDot => o.theta_dot,
        Quantity::PhiDot => o.phi_dot,
        Quantity::PolarizationZ => o.polarization_z,
        Quantity::ArcLength => return o.arc_length,
        Quantity::TorsionSignChanges => return out.report.events.torsion_sign_changes as f64,
    };
    if b == Bound::Min {
        r.min
    } else {
        r.max
    }
}

fn caption_regression() -> Outcome {
    let start = Instant::now();
    let mut runs = std::collections::HashMap::new();
    let mut details = Vec::new();
    let mut failed = 0;
    let items = caption_items();
    for it in &items {
        let out = runs
            .entry(it.preset)
            .or_insert_with(|| preset_run(it.preset));
        let obs = observed(out, it.quantity, it.bound);
        let (ok, rule) = if it.quantity == Quantity::TorsionSignChanges {
            (obs == it.expected, "exact".to_string())
        } else if it.spike {
            let ratio = obs / it.expected;
            (
                (1.0 / CAPTION_SPIKE_FACTOR..=CAPTION_SPIKE_FACTOR).contains(&ratio),
                format!("ratio {ratio:.3}"),
            )
        } else {
            let rel = (obs - it.expected).abs() / it.expected.abs().max(0.01);
            (rel <= CAPTION_REL_TOL, format!("{:.2}%", 100.0 * rel))
        };
        if !ok {
            failed += 1;
        }
        details.push(format!(
            "{} {:?} {:?}: expected {} observed {obs:.6} ({rule}) {}",
            it.preset,
            it.quantity,
            it.bound,
            it.expected,
            if ok { "ok" } else { "FAIL" }
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    Outcome {
        pass: failed == 0 && elapsed < CAPTION_BUDGET_S,
        summary: format!(
            "{} of {} caption values within tolerance, {elapsed:.1} s",
            items.len() - failed,
            items.len()
        ),
        details,
    }
}

fn resonance_rates() -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for name in [PresetName::Fig5, PresetName::Fig6] {
        let out = preset_run(name);
        let (h, omega) = match out.report.spec.system {
            System::Qubit { field, .. } => (field.h(), field.omega),
            _ => unreachable!(),
        };
        let (mut dphi, mut dtheta) = (0.0f64, 0.0f64);
        let mut sign_errors = 0;
        let mut used = 0;
        for g in &out.geometry {
            if g.theta.sin() < POLE_EXCLUSION_SIN {
                continue;
            }
            let (Some(td), Some(pd)) = (g.theta_dot, g.phi_dot) else {
                continue;
            };
            used += 1;
            dphi = dphi.max((pd - omega).abs());
            dtheta = dtheta.max((td.abs() - h.abs()).abs());
            if td.signum() != (h * (h * g.t).sin()).signum() {
                sign_errors += 1;
            }
        }
        // Sign of the nutation rate between consecutive multiples of π/h.
        let flips = out
            .geometry
            .windows(2)
            .filter(|w| match (w[0].theta_dot, w[1].theta_dot) {
                (Some(a), Some(b)) => a.signum() != b.signum(),
                _ => false,
            })
            .count();
        let duration = out.report.spec.duration;
        let expected_flips = ((duration * h.abs() / PI).ceil() as usize).saturating_sub(1);
        let flip_times_ok =
            out.geometry
                .windows(2)
                .all(|w| match (w[0].theta_dot, w[1].theta_dot) {
                    (Some(a), Some(b)) if a.signum() != b.signum() => {
                        let n = (w[1].t * h.abs() / PI).round();
                        (w[0].t..=w[1].t).contains(&(n * PI / h.abs()))
                    }
                    _ => true,
                });
        let ok = dphi < PRECESSION_TOL
            && dtheta < PRECESSION_TOL
            && sign_errors == 0
            && flip_times_ok
            && flips <= expected_flips.max(1);
        pass &= ok;
        details.push(format!(
            "{name}: {used} samples off-pole, max |phi' - w| {dphi:.2e}, max ||theta'| - |h|| {dtheta:.2e}, sign mismatches {sign_errors}, flips at n*pi/h {} {}",
            flip_times_ok,
            if ok { "ok" } else { "FAIL" }
        ));
    }
    Outcome {
        pass,
        summary: "precession rate equals w, nutation rate equals |h| with sign of sin(ht)".into(),
        details,
    }
}

fn sphere_residuals(samples: &[GeometrySample]) -> Vec<f64> {
    let kp = curvature_rate(samples).unwrap();
    samples
        .iter()
        .zip(&kp)
        .filter_map(|(s, k)| adjoining_sphere_residual(s, *k))
        .map(f64::abs)
        .collect()
}

fn percentile(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    v[((v.len() - 1) as f64 * q).round() as usize]
}

fn adjoining_sphere() -> Outcome {
    let out = preset_run(PresetName::Fig5);
    let res = sphere_residuals(&out.geometry);
    let good = res.iter().filter(|r| **r < SPHERE_RESIDUAL_TOL).count();
    let fraction = good as f64 / out.geometry.len() as f64;

    // Refinement study on the closed-form trajectory so that integration
    // error does not mask the finite-difference error.
    let (h, omega) = (0.5, 0.2);
    let period = TAU / h;
    let level = |n: usize| {
        let times = spinhodo::integrator::uniform_grid(0.0, period, n);
        let p: Vec<[f64; 3]> = times
            .iter()
            .map(|&t| analytic_rabi_general(t, InitialAngles::NORTH, h, omega, omega, 0.0).r)
            .collect();
        let g = frenet_geometry(&Trajectory::from_vectors(times, &p).unwrap()).unwrap();
        percentile(sphere_residuals(&g), SPHERE_RESIDUAL_FRACTION)
    };
    let levels: Vec<(usize, f64)> = [126, 251, 501].iter().map(|&n| (n, level(n))).collect();
    let orders: Vec<f64> = levels
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).log2())
        .collect();
    let order_ok = orders.iter().all(|o| *o >= SPHERE_RESIDUAL_MIN_ORDER);
    let mut o = Outcome::new(
        fraction >= SPHERE_RESIDUAL_FRACTION && order_ok,
        format!(
            "{:.2}% of samples below {SPHERE_RESIDUAL_TOL:e}; observed orders {:?}",
            100.0 * fraction,
            orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>()
        ),
    );
    o.details = levels
        .iter()
        .map(|(n, r)| format!("{n} points: 95th percentile residual {r:.3e}"))
        .collect();
    o
}

fn qutrit_oracle() -> Outcome {
    let (h, q): (f64, f64) = (0.375, 1.0);
    let f = (4.0 * h * h + q * q).sqrt();
    let period = 10.0 * TAU / f;
    let n = 20_001;
    let sol = integrate_qutrit(
        &FieldParams::circular(h, 0.0, 0.0),
        &AnisotropyParams::new(q, 0.0).unwrap(),
        &DensityMatrix3::north(),
        (0.0, period),
        n,
        OutputMode::Land,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for (t, rho) in sol.times.iter().zip(&sol.states) {
        let num = bloch8_from_density(rho, *t);
        let exact = analytic_qutrit_resonance(*t, h, q, 0.0);
        for a in 0..8 {
            worst = worst.max((num.q[a] - exact.q[a]).abs());
        }
    }
    let mid = bloch8_from_density(&sol.states[(n - 1) / 2], sol.times[(n - 1) / 2]);
    let flip = (mid.populations().unwrap().p_minus - 1.0).abs();
    let start = bloch8_from_density(&DensityMatrix3::north(), 0.0);
    let end = bloch8_from_density(sol.states.last().unwrap(), period);
    let ret = start
        .q
        .iter()
        .zip(&end.q)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    Outcome::new(
        worst < QUTRIT_ORACLE_TOL && flip < FLIP_TOL && ret < QUTRIT_RETURN_TOL,
        format!(
            "max |q_num - q_exact| {worst:.2e}; |P(-1) - 1| at half period {flip:.2e}; return distance {ret:.2e}"
        ),
    )
}

fn closure_conditions() -> Outcome {
    let cfg = tight();
    let mut details = Vec::new();
    let mut pass = true;

    let qutrit = cli::closure_search(ClosureSystem::Qutrit { q: 1.0, d: 0.0 }, 6, 6, &cfg).unwrap();
    let feasible: Vec<_> = qutrit.iter().filter(|r| r.feasible()).collect();
    let worst_qutrit = feasible
        .iter()
        .map(|r| r.residual.unwrap())
        .fold(0.0, f64::max);
    let infeasible_ok = qutrit.iter().all(|r| r.feasible() == (r.y >= r.x));
    pass &= worst_qutrit < QUTRIT_CLOSURE_TOL && infeasible_ok;
    details.push(format!(
        "qutrit Q=1: {} feasible coprime pairs up to 6, max residual {worst_qutrit:.2e}; infeasible exactly when y < x: {infeasible_ok}",
        feasible.len()
    ));

    let qubit = cli::closure_search(
        ClosureSystem::Qubit {
            omega: 1.0,
            big_h: 0.7,
        },
        4,
        4,
        &cfg,
    )
    .unwrap();
    let pairs: Vec<_> = qubit
        .iter()
        .filter(|r| r.feasible())
        .take(QUBIT_CLOSURE_PAIRS)
        .collect();
    let worst_qubit = pairs
        .iter()
        .map(|r| r.residual.unwrap())
        .fold(0.0, f64::max);
    pass &= pairs.len() == QUBIT_CLOSURE_PAIRS && worst_qubit < QUBIT_CLOSURE_TOL;
    details.push(format!(
        "qubit w=1, H=0.7: {} pairs, max residual {worst_qubit:.2e}",
        pairs.len()
    ));
    Outcome {
        pass,
        summary: "closure amplitudes return the state after one common period".into(),
        details,
    }
}

/// Frequency of the slow population swing between |+1> and |-1>, taken as
/// the lower of the two strongest spectral lines of q3(t).
fn measured_two_photon_frequency(h: f64, q: f64, d: f64) -> f64 {
    let duration = 400.0;
    let n = 8001;
    let sol = integrate_qutrit(
        &FieldParams::circular(h, 0.0, 0.0),
        &AnisotropyParams::new(q, d).unwrap(),
        &DensityMatrix3::north(),
        (0.0, duration),
        n,
        OutputMode::Interpolate,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let signal: Vec<(f64, f64)> = sol
        .times
        .iter()
        .zip(&sol.states)
        .map(|(t, rho)| {
            let w = 0.5 - 0.5 * (TAU * t / duration).cos();
            (*t, w * bloch8_from_density(rho, *t).q[2])
        })
        .collect();
    let power = |nu: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in &signal {
            let (s, c) = (nu * t).sin_cos();
            re += v * c;
            im -= v * s;
        }
        re * re + im * im
    };
    let step = 0.002;
    let grid: Vec<f64> = (1..1500).map(|i| i as f64 * step).collect();
    let spectrum: Vec<f64> = grid.iter().map(|&nu| power(nu)).collect();
    let mut peaks: Vec<(f64, f64)> = (1..spectrum.len() - 1)
        .filter(|&i| spectrum[i] > spectrum[i - 1] && spectrum[i] >= spectrum[i + 1])
        .map(|i| {
            // Parabolic refinement of the peak position.
            let (a, b, c) = (spectrum[i - 1], spectrum[i], spectrum[i + 1]);
            let shift = 0.5 * (a - c) / (a - 2.0 * b + c);
            (grid[i] + shift * step, b)
        })
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks[0].0.min(peaks[1].0)
}

fn anisotropy_two_photon() -> Outcome {
    let (h, q) = (0.375, 1.0);
    let base = measured_two_photon_frequency(h, q, 0.0);
    let aniso = measured_two_photon_frequency(h, q, 0.1);
    let ratio = aniso / base;
    let predicted = two_photon_frequency(h, q, 0.1) / two_photon_frequency(h, q, 0.0);
    Outcome::new(
        (TWO_PHOTON_RATIO.0..=TWO_PHOTON_RATIO.1).contains(&ratio),
        format!(
            "two-photon frequency d=0: {base:.4}, d=0.1: {aniso:.4}, ratio {ratio:.3} (level-splitting prediction {predicted:.3}); required [{}, {}]",
            TWO_PHOTON_RATIO.0, TWO_PHOTON_RATIO.1
        ),
    )
}

fn rotation(seed: u64) -> [[f64; 3]; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b, c) = (
        rng.gen_range(0.0..TAU),
        rng.gen_range(0.0..PI),
        rng.gen_range(0.0..TAU),
    );
    let rz = |t: f64| {
        [
            [t.cos(), -t.sin(), 0.0],
            [t.sin(), t.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ]
    };
    let ry = |t: f64| {
        [
            [t.cos(), 0.0, t.sin()],
            [0.0, 1.0, 0.0],
            [-t.sin(), 0.0, t.cos()],
        ]
    };
    let mul = |x: [[f64; 3]; 3], y: [[f64; 3]; 3]| {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        m
    };
    mul(mul(rz(a), ry(b)), rz(c))
}

/// Largest relative change of curvature, torsion, speed and arc length.
fn rotation_deviation(traj: &Trajectory, m: &[[f64; 3]; 3]) -> [f64; 4] {
    let a = frenet_geometry(traj).unwrap();
    let b = frenet_geometry(&traj.rotated(m)).unwrap();
    let mut dev = [0.0f64; 4];
    for (x, y) in a.iter().zip(&b) {
        let pairs = [
            (x.curvature, y.curvature),
            (x.torsion, y.torsion),
            (x.speed, y.speed),
            (x.arc_length, y.arc_length),
        ];
        for (d, (u, v)) in dev.iter_mut().zip(pairs) {
            *d = d.max((u - v).abs() / u.abs().max(1.0));
        }
    }
    dev
}

fn invariants() -> Outcome {
    let mut details = Vec::new();

    let fig2 = preset_run(PresetName::Fig2);
    let drift = fig2
        .rows
        .iter()
        .map(|r| (r.state.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs())
        .fold(0.0, f64::max);
    details.push(format!("Bloch length drift (fig2, 7 periods): {drift:.2e}"));

    let (h, q): (f64, f64) = (0.375, 1.0);
    let period = 10.0 * TAU / (4.0 * h * h + q * q).sqrt();
    let sol = integrate_qutrit(
        &FieldParams::circular(h, 0.0, 0.0),
        &AnisotropyParams::new(q, 0.1).unwrap(),
        &DensityMatrix3::north(),
        (0.0, period),
        4001,
        OutputMode::Land,
        &IntegratorConfig::default(),
    )
    .unwrap();
    let (mut trace_dev, mut purity_dev, mut pop_dev) = (0.0f64, 0.0f64, 0.0f64);
    for (t, rho) in sol.times.iter().zip(&sol.states) {
        trace_dev = trace_dev.max((rho.matrix().trace().re - 1.0).abs());
        purity_dev = purity_dev.max((rho.purity() - 1.0).abs());
        let pops = bloch8_from_density(rho, *t).populations().unwrap();
        pop_dev = pop_dev.max((pops.sum() - 1.0).abs());
    }
    details.push(format!(
        "qutrit (d=0.1) trace drift {trace_dev:.2e}, purity drift {purity_dev:.2e}, population sum error {pop_dev:.2e}"
    ));

    let traj = fig2.trajectory().unwrap();
    let m = rotation(7);
    let rot_dev = rotation_deviation(&traj, &m);
    details.push(format!(
        "Frenet quantities of fig2 under a random rotation, max relative change: k {:.2e}, torsion {:.2e}, v {:.2e}, s {:.2e}",
        rot_dev[0], rot_dev[1], rot_dev[2], rot_dev[3]
    ));
    // Informational: the torsion change is rounding in the rotated samples
    // amplified by the third-difference stencil, so it scales like dt^-3.
    for stride in [4, 16] {
        let coarse = Trajectory::new(
            traj.times.iter().step_by(stride).copied().collect(),
            traj.p.iter().step_by(stride).copied().collect(),
        )
        .unwrap();
        let d = rotation_deviation(&coarse, &m);
        details.push(format!(
            "  same check on every {stride}th sample: torsion {:.2e}",
            d[1]
        ));
    }
    let rot_dev = rot_dev.iter().copied().fold(0.0, f64::max);

    Outcome {
        pass: drift < LENGTH_DRIFT_TOL
            && trace_dev < TRACE_PURITY_TOL
            && purity_dev < TRACE_PURITY_TOL
            && pop_dev < POPULATION_SUM_TOL
            && rot_dev < ROTATION_TOL,
        summary: "conservation laws and rotation invariance".into(),
        details,
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("special-function limits", special_function_limits),
        ("qubit closed form vs integration", rabi_analytic_vs_numeric),
        ("elliptic resonance solution at k=0", resonance_identity),
        ("resonance geometry", resonance_geometry_match),
        ("figure caption regression", caption_regression),
        ("resonance angular velocities", resonance_rates),
        ("adjoining-sphere identity", adjoining_sphere),
        ("qutrit closed form", qutrit_oracle),
        ("closure conditions", closure_conditions),
        ("anisotropy and two-photon frequency", anisotropy_two_photon),
        ("invariant suite", invariants),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!(
            "{} criterion {:>2} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.summary
        );
        for d in &o.details {
            println!("       {d}");
        }
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!(
            "acceptance: {} of {} criteria fail: {failed:?}",
            failed.len(),
            criteria.len()
        );
        std::process::exit(1);
    }
}
