//! Classical simulation stack for a finite-group lattice gauge theory on
//! qudit hardware.
//!
//! The crate models every layer of a digital quantum simulation of a
//! Kogut–Susskind-type Hamiltonian for the quaternion group Q8, from the
//! abstract group algebra down to the atomic physics of the gates:
//!
//! * [`group`] — finite groups given by Cayley tables (Q8 built in), regular
//!   representations, characters, and a JSON interchange format.
//! * [`model`] — the gauge Hamiltonian on a lattice of group-valued links:
//!   electric transfer matrix, magnetic plaquette phases, exact evolution by
//!   dense eigendecomposition, and gauge-invariance utilities.
//! * [`circuit`] — qudit circuits (controlled group multiplications,
//!   plaquette circuits, Trotter steps) applied to state vectors, with
//!   optional substitution of pulse-simulated faulty gates.
//! * [`pulse`] — the hardware layer: holonomic two-level rotations from
//!   Gaussian pulse pairs on a (d+3)-level atom, lossy time-dependent
//!   Schrödinger integration, unitary-to-pulse compilation, and the
//!   blockade-based two-atom controlled gate.
//! * [`qubit`] — the three-qubit-per-link baseline: binary encoding,
//!   multi-controlled circuits, lowering to two-qubit gates, entangling-gate
//!   counts, and the noisy program simulation.
//! * [`runner`] — configuration, presets, and the command entry points used
//!   by the `lgtq` binary and by the runnable examples.
//!
//! The primary interface is the `examples/` directory (one runnable example
//! per capability); the thin `lgtq` binary exposes the same entry points as
//! subcommands for scripted use.

pub mod circuit;
pub mod error;
pub mod group;
pub mod linalg;
pub mod model;
pub mod pulse;
pub mod qubit;
pub mod runner;
pub mod tol;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
