use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dynbc_core::analysis::{find_l_star, g2_decay, DampedConvolution};
use dynbc_core::dynbc::{error_vs_limit, inf_over_window, solve_window, ProblemSpec};
use dynbc_core::kernels::{ExteriorPoint, KernelContext};
use dynbc_core::limit::{f1_apply, s2_apply, BoundaryDatum};
use dynbc_core::lower_bound::{decay_certificate, lower_point, LowerBoundSpec};
use dynbc_core::radial::RadialProfile;
use dynbc_lab::config::{parse_radius_policy, RawConfig};
use dynbc_lab::criteria::{criterion1, kernel_mass_errors};
use dynbc_lab::harness::{picard_discrepancy, run_sweep, Tier, XVAL_THRESHOLD};
use dynbc_lab::report::{emit_report, read_report_json, write_report_csv, write_trajectory_csv};
use dynbc_lab::LabError;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "dynbc",
    version,
    about = "Large-diffusion limit lab for the exterior dynamical-boundary heat problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quadrature of the evolving kernel against its mass law.
    KernelsCheck,
    /// S2(t)psi and F1[psi] at one point for a constant datum.
    LimitEval {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        psi: f64,
    },
    /// One direct solve; writes the trajectory as t,r,u rows.
    Solve {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long)]
        epsilon: f64,
        /// `upper` (phi = r^-(N-2), phi_b = 1) or `lower` (cut off at r = 2, phi_b = 0).
        #[arg(long, default_value = "upper")]
        data: String,
        #[arg(long, default_value_t = 1.0)]
        t1: f64,
        #[arg(long, default_value_t = 2.0)]
        t2: f64,
        #[arg(long, default_value = "standard")]
        tier: String,
        #[arg(long)]
        grid_nodes: Option<usize>,
        #[arg(long)]
        r_policy: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Epsilon sweep from a key=value config; writes <out>.csv and <out>.json.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Picard decomposition against the direct solver.
    Picard {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.5)]
        t1: f64,
        #[arg(long, default_value_t = 1.0)]
        t2: f64,
        #[arg(long, default_value = "standard")]
        tier: String,
    },
    /// Subsolution comparison at one epsilon and the long-time certificate.
    LowerBound {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e3)]
        t_max: f64,
        #[arg(long, default_value = "standard")]
        tier: String,
    },
    /// Damped convolution threshold and long-time decay fits, as JSON.
    Analysis {
        #[arg(long, default_value_t = 0.25)]
        a: f64,
        #[arg(long, default_value_t = 0.25)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Summarizes a JSON report; optionally rewrites its CSV.
    Report {
        input: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn tier_resolution(
    tier: &str,
    nodes: Option<usize>,
    r_policy: Option<&str>,
) -> Result<dynbc_core::dynbc::Resolution, LabError> {
    let mut res = tier.parse::<Tier>()?.resolution();
    if let Some(n) = nodes {
        if n < 10 {
            return Err(LabError::Config("grid_nodes must be at least 10".into()));
        }
        res.nodes = n;
    }
    if let Some(p) = r_policy {
        res.radius = parse_radius_policy(p)?;
    }
    Ok(res)
}

fn config_err(e: dynbc_core::Error) -> LabError {
    LabError::Config(e.to_string())
}

fn run(cmd: Command) -> Result<bool, LabError> {
    match cmd {
        Command::KernelsCheck => {
            for (dim, t, r, err) in kernel_mass_errors()? {
                println!("N={dim} t={t} |x|={r} rel_err={err:.3e}");
            }
            let out = criterion1()?;
            println!("{}", out.line());
            Ok(out.passed)
        }
        Command::LimitEval { dim, r, t, psi } => {
            let ctx = KernelContext::new(dim).map_err(config_err)?;
            let x = ExteriorPoint::on_axis(dim, r).map_err(config_err)?;
            let datum = BoundaryDatum::Constant(psi);
            let s2 = s2_apply(&ctx, &datum, &x, t)?;
            let f1 = f1_apply(&ctx, &datum, &x, t)?;
            println!(
                "{}",
                json!({ "dim": dim, "r": r, "t": t, "psi": psi, "s2": s2, "f1": f1 })
            );
            Ok(true)
        }
        Command::Solve {
            dim,
            epsilon,
            data,
            t1,
            t2,
            tier,
            grid_nodes,
            r_policy,
            out,
        } => {
            let res = tier_resolution(&tier, grid_nodes, r_policy.as_deref())?;
            let spec = match data.as_str() {
                "upper" => ProblemSpec::new(dim, epsilon, RadialProfile::harmonic(dim), 1.0),
                "lower" => LowerBoundSpec::standard(dim).and_then(|s| s.problem(epsilon)),
                other => return Err(LabError::Config(format!("unknown data `{other}`"))),
            }
            .map_err(config_err)?;
            if !(t1 > 0.0 && t2 >= t1) {
                return Err(LabError::Config("need 0 < t1 <= t2".into()));
            }
            let traj = solve_window(&spec, (t1, t2), &res)?;
            let k_r = (1.5, 2.0);
            let summary = if data == "upper" {
                json!({ "sup_error_vs_limit": error_vs_limit(&traj, &spec, k_r, (t1, t2))? })
            } else {
                json!({ "inf_u": inf_over_window(&traj, k_r, (t1, t2))? })
            };
            println!(
                "{}",
                json!({ "epsilon": epsilon, "steps": traj.steps, "boundary_residual": traj.boundary_residual,
                        "R": traj.grid().outer_radius(), "grid_nodes": traj.grid().len(), "functional": summary })
            );
            if let Some(path) = out {
                write_trajectory_csv(&traj, BufWriter::new(File::create(path)?))?;
            }
            Ok(true)
        }
        Command::Sweep { config, out } => {
            let cfg = RawConfig::load(&config)?.to_sweep()?;
            let rep = run_sweep(&cfg)?;
            let (csv, json_path) = emit_report(&rep, &out)?;
            if let Some(fit) = &rep.fit {
                println!(
                    "slope {:.6} leave-one-out {:.4} residual {:.3e}",
                    fit.slope, fit.leave_one_out, fit.residual
                );
            }
            for c in rep.validation.iter().filter(|c| c.flagged) {
                println!(
                    "Richardson flag: eps {} {} shift {:.3}",
                    c.epsilon, c.variant, c.shift
                );
            }
            println!("wrote {} and {}", csv.display(), json_path.display());
            println!("{}", if rep.passed() { "PASS" } else { "FAIL" });
            Ok(rep.passed())
        }
        Command::Picard {
            dim,
            epsilon,
            t1,
            t2,
            tier,
        } => {
            let res = tier_resolution(&tier, None, None)?;
            if !(t1 > 0.0 && t2 >= t1) {
                return Err(LabError::Config("need 0 < t1 <= t2".into()));
            }
            ProblemSpec::new(dim, epsilon, RadialProfile::harmonic(dim), 1.0)
                .map_err(config_err)?;
            let x = picard_discrepancy(dim, epsilon, (t1, t2), &res)?;
            println!(
                "{}",
                json!({ "discrepancy": x.discrepancy, "L": x.l, "contraction": x.contraction, "iterations": x.iterations })
            );
            Ok(x.discrepancy < XVAL_THRESHOLD && x.contraction <= 0.55)
        }
        Command::LowerBound {
            dim,
            epsilon,
            t_max,
            tier,
        } => {
            let res = tier_resolution(&tier, None, None)?;
            let spec = LowerBoundSpec::standard(dim).map_err(config_err)?;
            if !(t_max >= 1.0) {
                return Err(LabError::Config("t_max must be at least 1".into()));
            }
            spec.problem(epsilon).map_err(config_err)?;
            let p = lower_point(&spec, epsilon, &res)?;
            let cert = decay_certificate(&spec, (1.0, t_max), 40, res.nodes)?;
            println!(
                "{}",
                json!({ "epsilon": epsilon, "inf_u": p.inf_u, "inf_z": p.inf_z, "comparison_margin": p.comparison_margin,
                        "certificate": cert.value, "certificate_argmin": [cert.argmin.0, cert.argmin.1],
                        "plateau_variation": cert.plateau_variation() })
            );
            Ok(p.inf_u > 0.0 && cert.value > 0.0)
        }
        Command::Analysis {
            a,
            b,
            gamma,
            horizon,
            delta,
        } => {
            let p = DampedConvolution::new(a, b, gamma, horizon, delta).map_err(config_err)?;
            let found = find_l_star(&p)?;
            let g2: Vec<_> = [1.0, 2.0]
                .into_iter()
                .map(|g| {
                    g2_decay(3, g, &[1.0, 4.0, 16.0], 2000)
                        .map(|f| json!({ "gamma": g, "slope": f.slope }))
                })
                .collect::<Result<_, _>>()?;
            println!(
                "{}",
                serde_json::to_string_pretty(
                    &json!({ "l_star": found.l_star, "trace": found.trace,
                    "nonincreasing": found.is_nonincreasing(1e-10), "g2_decay": g2 })
                )?
            );
            Ok(true)
        }
        Command::Report { input, csv } => {
            let rep = read_report_json(&input)?;
            println!(
                "scenario {} N={} points {}",
                rep.scenario,
                rep.dim,
                rep.points.len()
            );
            if let Some(fit) = &rep.fit {
                println!(
                    "slope {:.6} leave-one-out {:.4}",
                    fit.slope, fit.leave_one_out
                );
            }
            if let Some(path) = csv {
                write_report_csv(&rep, BufWriter::new(File::create(path)?))?;
            }
            println!("{}", if rep.passed() { "PASS" } else { "FAIL" });
            Ok(rep.passed())
        }
    }
}
