//! CSV, JSON and gnuplot artifacts for a run.
//!
//! `trajectory.csv`: `t`, the state (`R1..R3` or `q1..q8`), `p1..p3`,
//! `h1..h3`, for qutrits `P_plus,P_zero,P_minus`, then `P`, `E`.
//!
//! `geometry.csv`: `t,theta,phi,theta_dot,phi_dot,curvature,torsion,speed,
//! arc_length,reliable`. Undefined angle rates are left empty.
//!
//! Numbers are written with 17 significant digits.

use std::fs;
use std::path::Path;

use super::run::RunOutput;
use crate::error::{Error, Result};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn trajectory_header(state_len: usize, with_populations: bool) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    let prefix = if state_len == 3 { "R" } else { "q" };
    h.extend((1..=state_len).map(|i| format!("{prefix}{i}")));
    h.extend(["p1", "p2", "p3", "h1", "h2", "h3"].map(String::from));
    if with_populations {
        h.extend(["P_plus", "P_zero", "P_minus"].map(String::from));
    }
    h.extend(["P", "E"].map(String::from));
    h
}

pub const GEOMETRY_HEADER: [&str; 10] = [
    "t",
    "theta",
    "phi",
    "theta_dot",
    "phi_dot",
    "curvature",
    "torsion",
    "speed",
    "arc_length",
    "reliable",
];

pub fn write_trajectory_csv(out: &RunOutput, path: &Path) -> Result<()> {
    let state_len = out.rows.first().map_or(3, |r| r.state.len());
    let with_pops = out.rows.first().is_some_and(|r| r.populations.is_some());
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(trajectory_header(state_len, with_pops))?;
    for r in &out.rows {
        let mut rec = vec![num(r.t)];
        rec.extend(r.state.iter().map(|v| num(*v)));
        rec.extend(r.p.iter().chain(&r.field).map(|v| num(*v)));
        if let Some(p) = &r.populations {
            rec.extend([p.p_plus, p.p_zero, p.p_minus].map(num));
        }
        rec.push(num(r.probability));
        rec.push(num(r.energy));
        w.write_record(rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_geometry_csv(out: &RunOutput, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(GEOMETRY_HEADER)?;
    for g in &out.geometry {
        w.write_record([
            num(g.t),
            num(g.theta),
            num(g.phi),
            opt(g.theta_dot),
            opt(g.phi_dot),
            num(g.curvature),
            num(g.torsion),
            num(g.speed),
            num(g.arc_length),
            (g.reliable as u8).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Gnuplot script drawing the hodograph and the geometry time series from
/// the two CSV files in the same directory.
pub fn plot_script(out: &RunOutput) -> String {
    let state_len = out.rows.first().map_or(3, |r| r.state.len());
    let with_pops = out.rows.first().is_some_and(|r| r.populations.is_some());
    let header = trajectory_header(state_len, with_pops);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap() + 1;
    let (p1, p2, p3, prob) = (col("p1"), col("p2"), col("p3"), col("P"));
    format!(
        r#"# {name}: apex hodograph and geometry
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 1400,1000
set output '{name}.png'
set multiplot layout 2,2 title '{name}'

set view equal xyz
set xrange [-1:1]; set yrange [-1:1]; set zrange [-1:1]
set parametric
set urange [0:2*pi]; set vrange [-pi/2:pi/2]
set isosamples 13,9
splot cos(u)*cos(v),sin(u)*cos(v),sin(v) with lines lc rgb '#cccccc' notitle, \
      'trajectory.csv' using {p1}:{p2}:{p3} with lines lw 1.5 title 'apex'
unset parametric
unset view; set autoscale

set xlabel 't'
set logscale y
plot 'geometry.csv' using 1:($10 > 0 ? $6 : NaN) with lines title 'curvature k'
unset logscale y

plot 'geometry.csv' using 1:($10 > 0 ? $7 : NaN) with lines title 'torsion', \
     '' using 1:8 with lines title 'speed v', \
     '' using 1:4 with lines title "theta'", \
     '' using 1:5 with lines title "phi'"

plot 'trajectory.csv' using 1:{prob} with lines title 'P', \
     'geometry.csv' using 1:9 axes x1y2 with lines title 'arc length s'
unset multiplot
"#,
        name = out.report.name
    )
}

/// Writes `trajectory.csv`, `geometry.csv`, `report.json` and `plot.gp`.
pub fn write_artifacts(out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_trajectory_csv(out, &dir.join("trajectory.csv"))?;
    write_geometry_csv(out, &dir.join("geometry.csv"))?;
    let report_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(&out.report)?;
    fs::write(&report_path, json + "\n").map_err(|e| Error::io(&report_path, e))?;
    let plot_path = dir.join("plot.gp");
    fs::write(&plot_path, plot_script(out)).map_err(|e| Error::io(&plot_path, e))?;
    Ok(())
}
