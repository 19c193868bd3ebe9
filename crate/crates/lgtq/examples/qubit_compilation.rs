//! Cost of running the same model on a qubit machine: compile the
//! group-multiplication gate and the full plaquette step to qubit circuits
//! and count entangling gates at two lowering levels.
//!
//! Each Q8 link needs three qubits. The multiplication gate compiles to
//! multi-controlled phase/permutation layers; lowering stops either at
//! generic two-qubit controlled-unitaries or goes all the way to
//! CNOT + controlled-iY. Multi-controlled Toffolis dominate the budget, so
//! their ladder costs are printed as well.
//!
//! Run with:
//!     cargo run --release --example qubit_compilation

use lgtq::qubit::{count_entangling, toffoli_cost, LoweringLevel, ProgramKind};
use lgtq::Result;

fn main() -> Result<()> {
    println!("entangling-gate counts per program and lowering level:\n");
    println!(
        "{:>24} {:>22} {:>22}",
        "program", "two-qubit controlled-U", "CNOT + controlled-iY"
    );
    for (kind, name) in [
        (ProgramKind::ThetaGate, "one multiplication"),
        (ProgramKind::PlaquetteTrotterStep, "one plaquette step"),
    ] {
        let coarse = count_entangling(kind, LoweringLevel::TwoQubitControlledU);
        let fine = count_entangling(kind, LoweringLevel::CnotPlusControlledIY);
        println!("{:>24} {:>22} {:>22}", name, coarse, fine);
    }

    println!("\nmulti-controlled Toffoli ladder:");
    println!(
        "{:>10} {:>22} {:>22}",
        "controls", "two-qubit controlled-U", "CNOT + controlled-iY"
    );
    for n in 2..=4 {
        println!(
            "{:>10} {:>22} {:>22}",
            n,
            toffoli_cost(n, LoweringLevel::TwoQubitControlledU)?,
            toffoli_cost(n, LoweringLevel::CnotPlusControlledIY)?
        );
    }

    println!(
        "\n(noisy end-to-end comparison against the native qudit gate:\n\
         cargo run --release -- gate-fidelity --preset fig2)"
    );
    Ok(())
}
