//! Thin command-line front end over [`lgtq::runner`].
//!
//! Configuration comes from a JSON file (`--config`), a named preset
//! (`--preset`), or the built-in defaults, with individual keys overridable
//! by flags. Exit codes: 0 on success, 1 when a computation or check inside
//! a command fails, 2 for configuration, I/O, or parse problems.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use lgtq::runner::{self, GateSource, GeometryChoice, RunConfig};
use lgtq::circuit::TrotterOrder;
use lgtq::Error;

#[derive(Parser)]
#[command(
    name = "lgtq",
    version,
    about = "Simulation stack for a finite-group lattice gauge theory on qudit hardware"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in preset: fig2, fig3, or sm_fig2.
    #[arg(long, global = true, conflicts_with = "config", value_name = "NAME")]
    preset: Option<String>,

    /// Output directory (defaults to the configured one, else runs/<experiment>).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Experiment name override.
    #[arg(long, global = true)]
    experiment: Option<String>,

    /// Electric coupling λ_E.
    #[arg(long, global = true)]
    lambda_e: Option<f64>,

    /// Magnetic coupling λ_B.
    #[arg(long, global = true)]
    lambda_b: Option<f64>,

    /// Temporal lattice spacing a_t.
    #[arg(long, global = true)]
    a_t: Option<f64>,

    /// Trotter step size.
    #[arg(long, global = true)]
    dt: Option<f64>,

    /// Number of Trotter steps for quench runs.
    #[arg(long, global = true)]
    n_steps: Option<usize>,

    /// Record observables every this many steps.
    #[arg(long, global = true)]
    record_every: Option<usize>,

    /// Final time for step-size scans.
    #[arg(long, global = true)]
    t_final: Option<f64>,

    /// Product formula order: first or second.
    #[arg(long, global = true)]
    order: Option<String>,

    /// Comma-separated step counts for step-size scans, e.g. 3,4,6,8.
    #[arg(long, global = true, value_name = "LIST")]
    scan_steps: Option<String>,

    /// Dimensionless pulse area ΩT.
    #[arg(long, global = true)]
    omega_t: Option<f64>,

    /// Interaction-to-Rabi ratio V/Ω.
    #[arg(long, global = true)]
    v_over_omega: Option<f64>,

    /// Decay ratio γ_e/Ω of the optically excited level.
    #[arg(long, global = true)]
    gamma_e_over_omega: Option<f64>,

    /// Decay ratio γ_r/Ω of the interacting level.
    #[arg(long, global = true)]
    gamma_r_over_omega: Option<f64>,

    /// Auxiliary coupling as a fraction of Ω.
    #[arg(long, global = true)]
    omega_p_ratio: Option<f64>,

    /// Rabi frequency Ω in rad/s (ratios above are kept).
    #[arg(long, global = true)]
    omega: Option<f64>,

    /// Dead time per atom-pair rearrangement, seconds.
    #[arg(long, global = true)]
    move_dead_time: Option<f64>,

    /// Lattice: single_plaquette, two_link_ring, or a geometry JSON path.
    #[arg(long, global = true)]
    geometry: Option<String>,

    /// Gate source: ideal, pulse_simulated, or a bank JSON path.
    #[arg(long, global = true)]
    gate_source: Option<String>,

    /// Group definition JSON path (defaults to the built-in eight-element
    /// quaternion group).
    #[arg(long, global = true, value_name = "PATH")]
    group_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively audit the group: construction axioms plus
    /// permutation-level identities of the regular actions.
    GroupCheck,
    /// Final-state infidelity against exact evolution over a grid of step
    /// sizes at fixed final time.
    TrotterScan,
    /// Trotterized quench from the trivial state, with energies, norm
    /// decay, and overlap with exact evolution.
    Quench,
    /// Pulse-simulate the group-multiplication entangler on qudit registers
    /// and the lowered three-qubit program, side by side.
    GateFidelity,
    /// Gate-error surface of the magnetic phase gate over pulse area and
    /// decay rate.
    ErrorScan,
    /// Duration and entangling-gate-count comparison between the qudit and
    /// qubit register layouts.
    CostReport,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(match e {
            Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            _ => 1,
        });
    }
}

fn run(cli: &Cli) -> lgtq::Result<()> {
    let mut config = match (&cli.config, &cli.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(name)) => RunConfig::preset(name)?,
        (None, None) => RunConfig::default(),
    };
    apply_overrides(&mut config, cli)?;
    let out = config.resolve_out_dir(cli.out.as_deref());

    match cli.command {
        Command::GroupCheck => {
            let report = runner::cmd_group_check(&config, &out)?;
            println!(
                "group of order {} passed every exhaustive check \
                 ({} composition pairs, {} commutation pairs)",
                report.order, report.composition_pairs_checked, report.commutation_pairs_checked
            );
        }
        Command::TrotterScan => {
            let report = runner::cmd_trotter_scan(&config, &out)?;
            for p in &report.points {
                println!("dt={:<12.6} n={:<4} infidelity={:.3e}", p.dt, p.n_steps, p.infidelity);
            }
            if let Some(slope) = report.slope {
                println!("log-log slope {slope:.3}");
            }
            println!("minimum {:.3e} at dt={:.6}", report.min_infidelity, report.min_dt);
        }
        Command::Quench => {
            let report = runner::cmd_quench(&config, &out)?;
            println!(
                "{} steps recorded; per-step norm loss {:.4e} (spread {:.2}), \
                 E/B correlation {:+.3}, final overlap {:.4}",
                report.trotter.len(),
                report.fit.per_step_loss,
                report.fit.loss_relative_spread,
                report.fit.e_b_correlation,
                report.fit.final_fidelity
            );
        }
        Command::GateFidelity => {
            let report = runner::cmd_gate_fidelity(&config, &out)?;
            println!(
                "qudit entangler: state fidelity {:.4}, mean gate fidelity {:.6}, \
                 {} rotations in {} windows",
                report.qudit.state_fidelity,
                report.qudit.mean_gate_fidelity,
                report.qudit.rotations,
                report.qudit.windows
            );
            println!(
                "qubit program:   state fidelity {:.4}, per-gate fidelity {:.6}, \
                 {} entangling gates",
                report.qubit.state_fidelity, report.qubit.gate_fidelity, report.qubit.entangling_gates
            );
        }
        Command::ErrorScan => {
            let report = runner::cmd_error_scan(&config, &out)?;
            for row in &report.rows {
                match row.power_law_slope {
                    Some(slope) => println!(
                        "γ/Ω={:<8.1e} power-law slope {slope:.2}, saturation {:.3e}",
                        row.gamma_ratio, row.saturation
                    ),
                    None => println!(
                        "γ/Ω={:<8.1e} saturation {:.3e}",
                        row.gamma_ratio, row.saturation
                    ),
                }
            }
        }
        Command::CostReport => {
            let report = runner::cmd_cost_report(&config, &out)?;
            println!(
                "qudit step: {} windows + {} rearrangements = {:.3e} s",
                report.qudit.windows, report.qudit.pair_sessions, report.qudit.total
            );
            println!(
                "qubit step: {} windows + {} rearrangements = {:.3e} s",
                report.qubit.windows, report.qubit.pair_sessions, report.qubit.total
            );
            println!("duration ratio {:.1}", report.duration_ratio);
            println!(
                "entangler: {} rotations (formula {}), {} windows",
                report.theta_rotations, report.theta_rotations_formula, report.theta_windows
            );
        }
    }
    println!("artifacts in {}", out.display());
    Ok(())
}

fn apply_overrides(config: &mut RunConfig, cli: &Cli) -> lgtq::Result<()> {
    if let Some(v) = &cli.experiment {
        config.experiment = v.clone();
    }
    if let Some(v) = cli.lambda_e {
        config.model.lambda_e = v;
    }
    if let Some(v) = cli.lambda_b {
        config.model.lambda_b = v;
    }
    if let Some(v) = cli.a_t {
        config.model.a_t = v;
    }
    if let Some(v) = cli.dt {
        config.trotter.dt = v;
    }
    if let Some(v) = cli.n_steps {
        config.trotter.n_steps = v;
    }
    if let Some(v) = cli.record_every {
        config.trotter.record_every = v;
    }
    if let Some(v) = cli.t_final {
        config.trotter.t_final = v;
    }
    if let Some(v) = &cli.order {
        config.trotter.order = match v.to_ascii_lowercase().as_str() {
            "first" | "1" => TrotterOrder::First,
            "second" | "2" => TrotterOrder::Second,
            other => {
                return Err(Error::Config(format!(
                    "order must be 'first' or 'second', got '{other}'"
                )));
            }
        };
    }
    if let Some(list) = &cli.scan_steps {
        let steps: Result<Vec<usize>, _> =
            list.split(',').map(|s| s.trim().parse::<usize>()).collect();
        config.trotter.scan_steps = steps
            .map_err(|e| Error::Config(format!("bad scan step list '{list}': {e}")))?;
    }

    let any_ratio = cli.omega_t.is_some()
        || cli.v_over_omega.is_some()
        || cli.gamma_e_over_omega.is_some()
        || cli.gamma_r_over_omega.is_some()
        || cli.omega.is_some();
    if any_ratio {
        // Capture the current dimensionless ratios, then rebuild the
        // dimensionful fields around the (possibly overridden) Ω.
        let hw = &mut config.hardware;
        let omega_t = cli.omega_t.unwrap_or_else(|| hw.omega_t());
        let v_ratio = cli.v_over_omega.unwrap_or_else(|| hw.v_ratio());
        let gamma_e = cli.gamma_e_over_omega.unwrap_or_else(|| hw.gamma_e_ratio());
        let gamma_r = cli.gamma_r_over_omega.unwrap_or_else(|| hw.gamma_r_ratio());
        let omega = cli.omega.unwrap_or(hw.omega);
        hw.omega = omega;
        hw.t = omega_t / omega;
        hw.v = v_ratio * omega;
        hw.gamma_e = gamma_e * omega;
        hw.gamma_r = gamma_r * omega;
    }
    if let Some(v) = cli.omega_p_ratio {
        config.hardware.omega_p_ratio = v;
    }
    if let Some(v) = cli.move_dead_time {
        config.hardware.move_dead_time = v;
    }

    if let Some(v) = &cli.geometry {
        config.geometry = match v.as_str() {
            "single_plaquette" | "single-plaquette" => GeometryChoice::SinglePlaquette,
            "two_link_ring" | "two-link-ring" => GeometryChoice::TwoLinkRing,
            path => GeometryChoice::Custom(PathBuf::from(path)),
        };
    }
    if let Some(v) = &cli.gate_source {
        config.gate_source = match v.as_str() {
            "ideal" => GateSource::Ideal,
            "pulse_simulated" | "pulse-simulated" => GateSource::PulseSimulated,
            path => GateSource::CachedBank(PathBuf::from(path)),
        };
    }
    if let Some(path) = &cli.group_file {
        config.group_file = Some(path.clone());
    }
    Ok(())
}
