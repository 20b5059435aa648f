use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use spinhodo::cli::{self, ClosureSystem, PresetName, RunReport, System};
use spinhodo::elliptic::EllipticModulus;
use spinhodo::qubit::{DampingParams, FieldParams, InitialAngles};
use spinhodo::qutrit::AnisotropyParams;
use spinhodo::Result;

#[derive(Parser)]
#[command(
    name = "spinhodo",
    version,
    about = "Qubit and qutrit polarization dynamics and hodograph geometry"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemArg {
    Qubit,
    Qutrit,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Circular,
    Linear,
    Elliptic,
}

#[derive(Subcommand)]
enum Command {
    /// Run one of the figure presets (fig1..fig10) and write its artifacts.
    Preset {
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run arbitrary parameters.
    Simulate {
        #[arg(long, value_enum, default_value = "qubit")]
        system: SystemArg,
        #[arg(long, value_enum, default_value = "circular")]
        mode: ModeArg,
        /// Transverse amplitude.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.5)]
        h: f64,
        /// Longitudinal amplitude.
        #[arg(long = "H", allow_hyphen_values = true, default_value_t = 0.0)]
        big_h: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        omega: f64,
        /// Elliptic modulus k (elliptic mode only).
        #[arg(long, default_value_t = 0.0)]
        modulus: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma1: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma2: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        req: f64,
        /// Axial anisotropy (qutrit).
        #[arg(long = "Q", allow_hyphen_values = true, default_value_t = 0.0)]
        q: f64,
        /// Transverse anisotropy (qutrit).
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        d: f64,
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        #[arg(long, default_value_t = 0.0)]
        phi0: f64,
        /// Duration in natural periods.
        #[arg(long, default_value_t = 1.0)]
        periods: f64,
        /// Use the closed-form solution and report its deviation from integration.
        #[arg(long)]
        analytic: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Tabulate amplitudes that close the trajectory and their residuals.
    Closure {
        #[arg(long, value_enum, default_value = "qutrit")]
        system: SystemArg,
        #[arg(long, default_value_t = 6)]
        xmax: i64,
        #[arg(long, default_value_t = 6)]
        ymax: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.2)]
        omega: f64,
        #[arg(long = "H", allow_hyphen_values = true, default_value_t = 0.2)]
        big_h: f64,
        #[arg(long = "Q", allow_hyphen_values = true, default_value_t = 1.0)]
        q: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        d: f64,
    },
}

fn summarize(report: &RunReport, out: &std::path::Path) {
    println!(
        "{}: {} samples, arc length {:.6}",
        report.name, report.samples, report.observed.arc_length
    );
    if let Some(dev) = report.analytic_deviation {
        println!("  closed form vs integration: max deviation {dev:.3e}");
    }
    for c in &report.checks {
        println!(
            "  [{}] {:?} {:?}: expected {} observed {:.6}",
            if c.pass { "ok" } else { "off" },
            c.quantity,
            c.bound,
            c.expected,
            c.observed
        );
    }
    println!("  artifacts in {}", out.display());
}

fn execute(args: Args) -> Result<()> {
    let cfg = cli::config_from_env()?;
    match args.command {
        Command::Preset { name, out } => {
            let name: PresetName = name.parse()?;
            let report = cli::run_preset(name, &out, &cfg)?;
            summarize(&report, &out);
        }
        Command::Simulate {
            system,
            mode,
            h,
            big_h,
            omega,
            modulus,
            gamma1,
            gamma2,
            req,
            q,
            d,
            theta0,
            phi0,
            periods,
            analytic,
            out,
        } => {
            let field = match mode {
                ModeArg::Circular => FieldParams::circular(h, big_h, omega),
                ModeArg::Linear => FieldParams::linear(h, big_h, omega),
                ModeArg::Elliptic => {
                    FieldParams::elliptic(h, big_h, omega, EllipticModulus::new(modulus)?)
                }
            };
            let system = match system {
                SystemArg::Qubit => System::Qubit {
                    field,
                    damping: DampingParams {
                        gamma1,
                        gamma2,
                        r_eq: req,
                    },
                    init: InitialAngles::new(theta0, phi0)?,
                },
                SystemArg::Qutrit => System::Qutrit {
                    field,
                    anisotropy: AnisotropyParams::new(q, d)?,
                },
            };
            let report = cli::simulate(system, periods, analytic, &out, &cfg)?;
            summarize(&report, &out);
        }
        Command::Closure {
            system,
            xmax,
            ymax,
            omega,
            big_h,
            q,
            d,
        } => {
            let system = match system {
                SystemArg::Qubit => ClosureSystem::Qubit { omega, big_h },
                SystemArg::Qutrit => ClosureSystem::Qutrit { q, d },
            };
            let rows = cli::closure_search(system, xmax, ymax, &cfg)?;
            println!("x,y,h,period,residual");
            for r in rows {
                let f =
                    |v: Option<f64>| v.map_or("infeasible".to_string(), |v| format!("{v:.16e}"));
                println!(
                    "{},{},{},{},{}",
                    r.x,
                    r.y,
                    f(r.h),
                    f(r.period),
                    f(r.residual)
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
