//! Wall-clock budget of one plaquette step on the native-qudit platform
//! versus the all-qubit compilation.
//!
//! Counts pulse windows and entangling sessions for both platforms, applies
//! the window time 2T = 2 OmegaT / Omega and a per-session atom-movement
//! dead time, and prints the resulting durations. The qudit platform needs
//! a handful of pair sessions; the qubit compilation needs thousands of
//! two-qubit gates, each with its own rearrangement, which is what makes it
//! roughly two orders of magnitude slower.
//!
//! Run with:
//!     cargo run --release --example hardware_cost_report

use std::env;
use std::time::{SystemTime, UNIX_EPOCH};

use lgtq::runner::{cmd_cost_report, RunConfig};
use lgtq::Result;

fn main() -> Result<()> {
    let config = RunConfig::default();
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).unwrap().as_nanos();
    let out = env::temp_dir().join(format!("lgtq-cost-{}", nanos));
    let report = cmd_cost_report(&config, &out)?;

    println!("multiplication gate: {} rotations over {} windows per controlled block ladder",
        report.theta_rotations, report.theta_windows);
    println!("closed-form rotation count 2(2d-1)(d-1): {}", report.theta_rotations_formula);

    let c = &report.entangling_counts;
    println!("\nqubit compilation entangling gates:");
    println!(
        "  multiplication: {} (controlled-U) / {} (CNOT+ciY)",
        c.theta_two_qubit_controlled_u, c.theta_cnot_plus_controlled_iy
    );
    println!(
        "  plaquette step: {} (controlled-U) / {} (CNOT+ciY)",
        c.plaquette_two_qubit_controlled_u, c.plaquette_cnot_plus_controlled_iy
    );

    println!("\nwindow time 2T = {:.3e} s, movement dead time {:.1e} s per session",
        report.window_time, report.move_dead_time);
    for (name, p) in [("qudit", &report.qudit), ("qubit", &report.qubit)] {
        println!(
            "  {:>5}: {:>6} windows, {:>5} pair sessions -> {:.3e} s pulses + {:.3e} s movement = {:.3e} s",
            name, p.windows, p.pair_sessions, p.pulse_time, p.movement_time, p.total
        );
    }
    println!("\nqubit/qudit duration ratio: {:.1}", report.duration_ratio);
    println!("full artifact: {}", out.join("cost_report.json").display());
    Ok(())
}
