//! Centralized numeric tolerances with their justification.
//!
//! Every threshold used by library assertions and by the acceptance suite is
//! defined here; no ad-hoc magic numbers at call sites.

/// Exact-arithmetic comparisons in f64 (compositions of table lookups,
/// signed permutations, short products of exact matrices). f64 carries
/// ~15.9 digits; 1e-12 leaves three digits of slack for rounding.
pub const EXACT: f64 = 1e-12;

/// Comparisons after dense eigendecompositions or long matrix products
/// (O(n³) rounding accumulation).
pub const LINALG: f64 = 1e-9;

/// Agreement between the eigendecomposition evolution and an independent
/// fourth-order integrator oracle run at small step size.
pub const EVOLVE_VS_ORACLE: f64 = 1e-8;

/// Commutator norms that must vanish (gauge invariance of the Hamiltonian
/// and of ideal Trotter steps).
pub const GAUGE_COMMUTATOR: f64 = 1e-10;

/// Ideal-circuit matrix identities verified through gate composition
/// (plaquette circuit vs. direct diagonal, lowered vs. unlowered programs).
pub const CIRCUIT_IDENTITY: f64 = 1e-9;

/// Relative local error target for the adaptive lossy-TDSE integrator.
pub const TDSE_RTOL: f64 = 1e-9;

/// Absolute floor used alongside [`TDSE_RTOL`] in the step controller.
pub const TDSE_ATOL: f64 = 1e-12;

/// Convergence of the pulse-delay root finder on the rotation angle (rad).
pub const CALIBRATION_ANGLE: f64 = 1e-6;

/// Eigenvalue floor below which the electric transfer matrix is treated as
/// numerically singular and its logarithm refused.
pub const TRANSFER_EIGENVALUE_FLOOR: f64 = 1e-14;

/// Unitary reconstruction error (up to global phase) allowed for two-level
/// decompositions and pulse-sequence oracles in the adiabatic-ideal limit.
pub const DECOMPOSITION: f64 = 1e-9;

/// Fidelity deficit allowed when reconstructing group permutation gates
/// from their rotation sequences with ideal (instantaneous) rotations.
pub const SEQUENCE_FIDELITY_DEFICIT: f64 = 1e-4;

/// Fitted log–log slope tolerances for Trotter error scaling: the quartic
/// (second-order splitting) fit may bend slightly at the large-step end of
/// a decade, so it gets the wider band.
pub const SLOPE_TOL_ORDER1: f64 = 0.2;
pub const SLOPE_TOL_ORDER2: f64 = 0.3;

/// Hard cap on state-vector dimension (d^links); 8^4 = 4096 is the largest
/// geometry exercised, the cap allows head-room up to ~16 qubits' worth.
pub const DIMENSION_CAP: usize = 1 << 16;
