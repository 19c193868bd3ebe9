//! Three-qubit baseline for the group-register processor comparison.
//!
//! Each Q8 register is encoded in three qubits. Right multiplications become
//! short X/CNOT circuits, their controlled versions become Toffoli-family
//! gates, and every Toffoli-family gate lowers to two-qubit primitives via
//! the gray-code construction. The module tallies entangling gates at each
//! lowering level and reruns the fully lowered group-multiplication program
//! with a pulse-simulated two-qubit gate substituted for every entangling
//! gate, single-qubit gates staying exact.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::group::{Element, FiniteGroup};
use crate::linalg::{C64, CMat, CVec};
use crate::model::{magnetic_phase, WordFactor};
use crate::pulse::{
    average_gate_fidelity, controlled_schedule, controlled_unitary_pulse_sim, AtomLevelScheme,
    ControlledGateResult, HardwareParams, PulseContext, PulseSchedule, Rotation,
};
use crate::{Error, Result};

/// Qubits per encoded group register.
pub const REGISTER_QUBITS: usize = 3;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Bit patterns s₁s₂s₃ (s₁ most significant) for the canonical element order
/// (1, −1, I, −I, J, −J, K, −K). The middle bit s₂ carries the overall sign;
/// (s₁, s₃) select the axis: 1 ↔ 00, I ↔ 01, K ↔ 10, J ↔ 11.
const ENCODING_BITS: [u8; 8] = [0b000, 0b010, 0b001, 0b011, 0b101, 0b111, 0b100, 0b110];

/// Bijection between Q8 element indices and three-bit strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitEncoding {
    to_bits: [u8; 8],
    from_bits: [u8; 8],
}

impl QubitEncoding {
    /// The fixed sign-plus-axis encoding used by every circuit here.
    pub fn standard() -> Self {
        let to_bits = ENCODING_BITS;
        let mut from_bits = [0u8; 8];
        for (g, &bits) in to_bits.iter().enumerate() {
            from_bits[bits as usize] = g as u8;
        }
        QubitEncoding { to_bits, from_bits }
    }

    /// Three-bit pattern of one element, s₁ in the most significant bit.
    pub fn encode(&self, g: Element) -> u8 {
        self.to_bits[g]
    }

    /// Element index of one three-bit pattern.
    pub fn decode(&self, bits: u8) -> Element {
        self.from_bits[bits as usize] as Element
    }

    /// The pattern as a string such as "010".
    pub fn bit_string(&self, g: Element) -> String {
        format!("{:03b}", self.encode(g))
    }

    /// 8×8 permutation matrix |enc(g)⟩⟨g| mapping the canonical element
    /// basis into the encoded bit basis.
    pub fn permutation_matrix(&self) -> CMat {
        let mut m = CMat::zeros((8, 8));
        for g in 0..8 {
            m[[self.encode(g) as usize, g]] = ONE;
        }
        m
    }
}

impl Default for QubitEncoding {
    fn default() -> Self {
        QubitEncoding::standard()
    }
}

// ---------------------------------------------------------------------------
// 2×2 matrix helpers
// ---------------------------------------------------------------------------

/// Single-qubit matrix in row-major order.
pub type Mat2 = [[C64; 2]; 2];

const IDENTITY2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
/// iY = R_y(−π): the real antisymmetric rotation the elementary entangling
/// gate applies on its target.
const IY: Mat2 = [[ZERO, ONE], [C64::new(-1.0, 0.0), ZERO]];
const HADAMARD: Mat2 = {
    const H: C64 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    const NH: C64 = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[H, H], [H, NH]]
};

fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            *slot = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn mat2_dagger(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

fn mat2_scale(a: &Mat2, s: C64) -> Mat2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

#[cfg(test)]
fn mat2_pow(a: &Mat2, k: u32) -> Mat2 {
    let mut out = IDENTITY2;
    for _ in 0..k {
        out = mat2_mul(&out, a);
    }
    out
}

fn mat2_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            worst = worst.max((a[r][c] - b[r][c]).norm());
        }
    }
    worst
}

fn diag2(a: C64, b: C64) -> Mat2 {
    [[a, ZERO], [ZERO, b]]
}

/// diag(1, e^{iα}).
fn phase_gate(alpha: f64) -> Mat2 {
    diag2(ONE, C64::from_polar(1.0, alpha))
}

/// R_z(θ) = diag(e^{−iθ/2}, e^{iθ/2}).
fn rz(theta: f64) -> Mat2 {
    diag2(
        C64::from_polar(1.0, -0.5 * theta),
        C64::from_polar(1.0, 0.5 * theta),
    )
}

/// R_y(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]].
fn ry(theta: f64) -> Mat2 {
    let (s, c) = (0.5 * theta).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

/// m-th root of a 2×2 unitary along its own rotation axis: writing
/// u = e^{iα}(cos(θ/2)·1 − i·sin(θ/2)·n̂·σ), the root is the same form at
/// (α/m, θ/m), so root^m = u exactly.
fn unitary_root(u: &Mat2, m: u32) -> Mat2 {
    if m == 1 {
        return *u;
    }
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let alpha = 0.5 * det.arg();
    let w = mat2_scale(u, C64::from_polar(1.0, -alpha));
    let tr = w[0][0] + w[1][1];
    debug_assert!(tr.im.abs() < 1e-9, "determinant-stripped trace must be real");
    let cos_half = (0.5 * tr.re).clamp(-1.0, 1.0);
    let theta = 2.0 * cos_half.acos();
    let phase = C64::from_polar(1.0, alpha / m as f64);
    let sin_half = (0.5 * theta).sin();
    if sin_half < 1e-12 {
        if cos_half > 0.0 {
            // w ≈ 1: only the scalar phase needs a root.
            return mat2_scale(&IDENTITY2, phase);
        }
        // w ≈ −1: a full 2π rotation with no preferred axis; use z.
        let half = PI / m as f64;
        return mat2_scale(
            &diag2(
                C64::from_polar(1.0, -half),
                C64::from_polar(1.0, half),
            ),
            phase,
        );
    }
    // Generator n̂·σ recovered from the traceless part of w.
    let scale = C64::new(0.0, -sin_half);
    let mut gen = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let diag = if r == c { C64::new(cos_half, 0.0) } else { ZERO };
            gen[r][c] = (w[r][c] - diag) / scale;
        }
    }
    let (s, c) = (0.5 * theta / m as f64).sin_cos();
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (cc, slot) in row.iter_mut().enumerate() {
            let diag = if r == cc { C64::new(c, 0.0) } else { ZERO };
            *slot = phase * (diag - C64::new(0.0, s) * gen[r][cc]);
        }
    }
    out
}

/// Angles (α, β, γ, δ) with u = e^{iα}·R_z(β)·R_y(γ)·R_z(δ).
fn zyz_angles(u: &Mat2) -> (f64, f64, f64, f64) {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let alpha = 0.5 * det.arg();
    let w = mat2_scale(u, C64::from_polar(1.0, -alpha));
    let gamma = 2.0 * w[1][0].norm().atan2(w[0][0].norm());
    // w₁₁ = e^{i(β+δ)/2} cos(γ/2) and w₁₀ = e^{i(β−δ)/2} sin(γ/2), both
    // prefactors non-negative for γ ∈ [0, π].
    let sum = if w[1][1].norm() > 1e-12 {
        2.0 * w[1][1].arg()
    } else {
        0.0
    };
    let diff = if w[1][0].norm() > 1e-12 {
        2.0 * w[1][0].arg()
    } else {
        0.0
    };
    (alpha, 0.5 * (sum + diff), gamma, 0.5 * (sum - diff))
}

// ---------------------------------------------------------------------------
// Gates and circuits
// ---------------------------------------------------------------------------

/// One gate: a single-qubit unitary on `target`, conditioned on every listed
/// control qubit sitting in |1⟩. An empty control list is a plain
/// single-qubit gate.
#[derive(Debug, Clone)]
pub struct QubitGate {
    pub controls: Vec<usize>,
    pub target: usize,
    pub matrix: Mat2,
}

/// Structural classification of a gate, derived from its control count and
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    PauliX,
    Hadamard,
    OtherSingle,
    Cnot,
    ControlledIY,
    /// Single-control gate with a general single-qubit unitary.
    ControlledU,
    /// Two or more controls, diagonal action.
    ControlledPhase,
    /// Two or more controls, general action.
    ToffoliFamily,
}

impl QubitGate {
    /// True for every gate touching two or more qubits.
    pub fn is_entangling(&self) -> bool {
        !self.controls.is_empty()
    }

    /// Total qubits the gate touches.
    pub fn wires(&self) -> usize {
        self.controls.len() + 1
    }

    pub fn kind(&self) -> GateKind {
        let eq = |m: &Mat2| mat2_diff(&self.matrix, m) < 1e-12;
        match self.controls.len() {
            0 => {
                if eq(&PAULI_X) {
                    GateKind::PauliX
                } else if eq(&HADAMARD) {
                    GateKind::Hadamard
                } else {
                    GateKind::OtherSingle
                }
            }
            1 => {
                if eq(&PAULI_X) {
                    GateKind::Cnot
                } else if eq(&IY) {
                    GateKind::ControlledIY
                } else {
                    GateKind::ControlledU
                }
            }
            _ => {
                if self.matrix[0][1].norm() + self.matrix[1][0].norm() < 1e-12 {
                    GateKind::ControlledPhase
                } else {
                    GateKind::ToffoliFamily
                }
            }
        }
    }
}

/// Elementary gate sets the lowering passes target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoweringLevel {
    /// Toffoli-family gates expanded into CNOTs plus two-qubit controlled
    /// single-qubit unitaries.
    TwoQubitControlledU,
    /// Every entangling gate expressed as a controlled-iY with exact
    /// single-qubit dressing.
    CnotPlusControlledIY,
}

/// Ordered gate list over a fixed set of qubits, applied first-to-last.
#[derive(Debug, Clone)]
pub struct QubitCircuit {
    n_qubits: usize,
    gates: Vec<QubitGate>,
}

impl QubitCircuit {
    pub fn new(n_qubits: usize) -> Self {
        QubitCircuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[QubitGate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Gates touching two or more qubits.
    pub fn entangling_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_entangling()).count()
    }

    fn push_gate(&mut self, gate: QubitGate) {
        assert!(gate.target < self.n_qubits, "target qubit out of range");
        assert!(
            gate.controls.iter().all(|&q| q < self.n_qubits),
            "control qubit out of range"
        );
        assert!(
            !gate.controls.contains(&gate.target),
            "target cannot also be a control"
        );
        let mut seen = gate.controls.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), gate.controls.len(), "duplicate control qubit");
        self.gates.push(gate);
    }

    pub fn x(&mut self, q: usize) {
        self.push_gate(QubitGate {
            controls: Vec::new(),
            target: q,
            matrix: PAULI_X,
        });
    }

    pub fn single(&mut self, q: usize, matrix: Mat2) {
        self.push_gate(QubitGate {
            controls: Vec::new(),
            target: q,
            matrix,
        });
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        self.push_gate(QubitGate {
            controls: vec![control],
            target,
            matrix: PAULI_X,
        });
    }

    pub fn controlled_iy(&mut self, control: usize, target: usize) {
        self.push_gate(QubitGate {
            controls: vec![control],
            target,
            matrix: IY,
        });
    }

    pub fn controlled(&mut self, controls: &[usize], target: usize, matrix: Mat2) {
        assert!(!controls.is_empty(), "use single() for uncontrolled gates");
        self.push_gate(QubitGate {
            controls: controls.to_vec(),
            target,
            matrix,
        });
    }

    pub fn append(&mut self, other: &QubitCircuit) {
        assert_eq!(self.n_qubits, other.n_qubits, "qubit counts must match");
        for gate in &other.gates {
            self.push_gate(gate.clone());
        }
    }

    /// Apply the circuit to a state vector of dimension 2^n in place.
    /// Qubit 0 owns the most significant bit of the basis index.
    pub fn apply_to(&self, state: &mut CVec) {
        assert_eq!(state.len(), 1usize << self.n_qubits);
        for gate in &self.gates {
            apply_gate(state, self.n_qubits, gate);
        }
    }

    /// Dense matrix of the whole circuit (small registers only).
    pub fn unitary(&self) -> CMat {
        assert!(self.n_qubits <= 10, "matrix build capped at 10 qubits");
        let dim = 1usize << self.n_qubits;
        let mut out = CMat::zeros((dim, dim));
        for col in 0..dim {
            let mut state = CVec::zeros(dim);
            state[col] = ONE;
            self.apply_to(&mut state);
            for row in 0..dim {
                out[[row, col]] = state[row];
            }
        }
        out
    }

    /// Rewrite every gate down to the requested elementary set. Exact as an
    /// operator: the lowered circuit's matrix equals the original's.
    pub fn lowered(&self, level: LoweringLevel) -> QubitCircuit {
        let mut out = QubitCircuit::new(self.n_qubits);
        for gate in &self.gates {
            lower_into(&mut out, gate, level);
        }
        out
    }
}

fn apply_gate(state: &mut CVec, n_qubits: usize, gate: &QubitGate) {
    let tbit = 1usize << (n_qubits - 1 - gate.target);
    let cmask: usize = gate
        .controls
        .iter()
        .map(|&q| 1usize << (n_qubits - 1 - q))
        .sum();
    let m = &gate.matrix;
    for idx in 0..state.len() {
        if idx & tbit == 0 && idx & cmask == cmask {
            let hi = idx | tbit;
            let a = state[idx];
            let b = state[hi];
            state[idx] = m[0][0] * a + m[0][1] * b;
            state[hi] = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// Apply a 4×4 operator given in (target, control) level order — index
/// t·2 + c — to one wire pair of the register.
fn apply_two_qubit(state: &mut CVec, n_qubits: usize, m: &CMat, target: usize, control: usize) {
    let tb = 1usize << (n_qubits - 1 - target);
    let cb = 1usize << (n_qubits - 1 - control);
    for base in 0..state.len() {
        if base & tb == 0 && base & cb == 0 {
            let idx = [base, base | cb, base | tb, base | tb | cb];
            let v = [state[idx[0]], state[idx[1]], state[idx[2]], state[idx[3]]];
            for r in 0..4 {
                let mut acc = ZERO;
                for (s, &vs) in v.iter().enumerate() {
                    acc += m[[r, s]] * vs;
                }
                state[idx[r]] = acc;
            }
        }
    }
}

fn lower_into(out: &mut QubitCircuit, gate: &QubitGate, level: LoweringLevel) {
    match gate.controls.len() {
        0 => out.push_gate(gate.clone()),
        1 => match level {
            LoweringLevel::TwoQubitControlledU => out.push_gate(gate.clone()),
            LoweringLevel::CnotPlusControlledIY => lower_single_control(out, gate),
        },
        _ => {
            for g in gray_code_expansion(&gate.controls, gate.target, &gate.matrix) {
                lower_into(out, &g, level);
            }
        }
    }
}

/// Expand an n-controlled U (n ≥ 2) into 2ⁿ−2 CNOTs among the controls and
/// 2ⁿ−1 controlled powers of V = U^(1/2^(n−1)) on the target, walking the
/// non-empty control subsets in gray-code order. The alternating V/V†
/// pattern makes every control pattern accumulate exactly the right power.
fn gray_code_expansion(controls: &[usize], target: usize, u: &Mat2) -> Vec<QubitGate> {
    let n = controls.len();
    debug_assert!(n >= 2);
    let v = unitary_root(u, 1u32 << (n - 1));
    let vdg = mat2_dagger(&v);
    let high = |bits: usize| usize::BITS as usize - 1 - bits.leading_zeros() as usize;
    let mut out = Vec::with_capacity((1usize << (n + 1)) - 3);
    let mut prev = 0usize;
    for k in 1..(1usize << n) {
        let gray = k ^ (k >> 1);
        let top = high(gray);
        if k >= 2 {
            let changed = (gray ^ prev).trailing_zeros() as usize;
            let src = if changed == top { high(prev) } else { changed };
            out.push(QubitGate {
                controls: vec![controls[src]],
                target: controls[top],
                matrix: PAULI_X,
            });
        }
        out.push(QubitGate {
            controls: vec![controls[top]],
            target,
            matrix: if k % 2 == 1 { v } else { vdg },
        });
        prev = gray;
    }
    out
}

/// CNOT as a controlled-iY with exact single-qubit dressing:
/// CNOT = diag(1, −i)_c · S†_t · C(iY) · S_t.
fn push_cnot_as_ciy(out: &mut QubitCircuit, control: usize, target: usize) {
    out.single(target, phase_gate(FRAC_PI_2));
    out.controlled_iy(control, target);
    out.single(target, phase_gate(-FRAC_PI_2));
    out.single(control, phase_gate(-FRAC_PI_2));
}

/// Rewrite one single-control gate into controlled-iY primitives. A general
/// controlled-V costs two of them: with V = e^{iα} R_z(β) R_y(γ) R_z(δ) and
/// A = R_z(β)R_y(γ/2), B = R_y(−γ/2)R_z(−(δ+β)/2), C = R_z((δ−β)/2), the
/// identities A·B·C = 1 and A·X·B·X·C = e^{−iα}V give
/// C-V = P(α)_c · A_t · CNOT · B_t · CNOT · C_t.
fn lower_single_control(out: &mut QubitCircuit, gate: &QubitGate) {
    let control = gate.controls[0];
    let target = gate.target;
    if mat2_diff(&gate.matrix, &IY) < 1e-14 {
        out.controlled_iy(control, target);
    } else if mat2_diff(&gate.matrix, &PAULI_X) < 1e-14 {
        push_cnot_as_ciy(out, control, target);
    } else {
        let (alpha, beta, gamma, delta) = zyz_angles(&gate.matrix);
        out.single(target, rz(0.5 * (delta - beta)));
        push_cnot_as_ciy(out, control, target);
        out.single(
            target,
            mat2_mul(&ry(-0.5 * gamma), &rz(-0.5 * (delta + beta))),
        );
        push_cnot_as_ciy(out, control, target);
        out.single(target, mat2_mul(&rz(beta), &ry(0.5 * gamma)));
        out.single(control, phase_gate(alpha));
    }
}

// ---------------------------------------------------------------------------
// Q8 register circuits
// ---------------------------------------------------------------------------

/// One step of a register circuit: a bit flip or an in-register CNOT, wire
/// indices 0 = s₁, 1 = s₂, 2 = s₃.
#[derive(Debug, Clone, Copy)]
enum Step {
    Flip(usize),
    /// (control, target).
    Cx(usize, usize),
}

use Step::{Cx, Flip};

/// Time-ordered X/CNOT steps realizing right multiplication |h⟩ → |h·g⟩ for
/// each element in canonical order.
const THETA_STEPS: [&[Step]; 8] = [
    &[],
    &[Flip(1)],
    &[Cx(2, 1), Flip(2)],
    &[Flip(2), Cx(2, 1)],
    &[Flip(2), Cx(0, 1), Flip(0)],
    &[Flip(0), Cx(0, 1), Flip(2)],
    &[Cx(0, 1), Cx(2, 1), Flip(0)],
    &[Flip(0), Cx(2, 1), Cx(0, 1)],
];

/// Emit the steps onto `wires`, each gate picking up `extra` as additional
/// controls (used for the value-selected blocks).
fn emit_steps(qc: &mut QubitCircuit, steps: &[Step], extra: &[usize], wires: [usize; 3]) {
    for &step in steps {
        match step {
            Flip(t) => {
                if extra.is_empty() {
                    qc.x(wires[t]);
                } else {
                    qc.controlled(extra, wires[t], PAULI_X);
                }
            }
            Cx(c0, t) => {
                if extra.is_empty() {
                    qc.cnot(wires[c0], wires[t]);
                } else {
                    let mut controls = extra.to_vec();
                    controls.push(wires[c0]);
                    qc.controlled(&controls, wires[t], PAULI_X);
                }
            }
        }
    }
}

/// Three-qubit circuit for right multiplication |h⟩ → |h·g⟩ under the
/// standard encoding.
pub fn theta_qubit_circuit(g: Element) -> QubitCircuit {
    assert!(g < 8, "quaternion element index out of range");
    let mut qc = QubitCircuit::new(REGISTER_QUBITS);
    emit_steps(&mut qc, THETA_STEPS[g], &[], [0, 1, 2]);
    qc
}

/// Append the controlled right multiplication by `rmul`, selected on the
/// control register holding `value`. Selector wires whose encoded bit is 0
/// are sandwiched with X so plain all-ones controls implement the match.
fn emit_controlled_multiply(
    qc: &mut QubitCircuit,
    enc: &QubitEncoding,
    control_wires: [usize; 3],
    target_wires: [usize; 3],
    value: Element,
    rmul: Element,
) {
    if rmul == 0 {
        return;
    }
    let bits = enc.encode(value);
    let negated: Vec<usize> = (0..3)
        .filter(|w| bits >> (2 - w) & 1 == 0)
        .map(|w| control_wires[w])
        .collect();
    for &w in &negated {
        qc.x(w);
    }
    emit_steps(qc, THETA_STEPS[rmul], &control_wires, target_wires);
    for &w in &negated {
        qc.x(w);
    }
}

/// Six-qubit controlled multiplication C_{θ(g)}(g): target register on wires
/// 0–2, control register on wires 3–5, so the basis index is
/// (target bits)·8 + (control bits).
pub fn controlled_theta_qubit_circuit(g: Element) -> QubitCircuit {
    assert!(g < 8, "quaternion element index out of range");
    let mut qc = QubitCircuit::new(2 * REGISTER_QUBITS);
    emit_controlled_multiply(
        &mut qc,
        &QubitEncoding::standard(),
        [3, 4, 5],
        [0, 1, 2],
        g,
        g,
    );
    qc
}

/// The full group-multiplication program |g⟩|g′⟩ → |g·g′⟩|g′⟩: the product
/// of controlled blocks over every control value.
pub fn theta_qubit_program() -> QubitCircuit {
    let enc = QubitEncoding::standard();
    let mut qc = QubitCircuit::new(2 * REGISTER_QUBITS);
    for g in 1..8 {
        emit_controlled_multiply(&mut qc, &enc, [3, 4, 5], [0, 1, 2], g, g);
    }
    qc
}

/// Three-qubit circuit for the diagonal magnetic phase exp(−2i·λ_B·χ(g)·dt)
/// on one encoded register: a doubly-controlled phase on the sign qubit,
/// both axis qubits required to be zero.
pub fn magnetic_phase_qubit_circuit(group: &FiniteGroup, lambda_b: f64, dt: f64) -> QubitCircuit {
    assert_eq!(group.order(), 8, "the encoding is specific to Q8");
    let mut qc = QubitCircuit::new(REGISTER_QUBITS);
    emit_magnetic_phase(&mut qc, group, lambda_b, dt, [0, 1, 2]);
    qc
}

fn emit_magnetic_phase(
    qc: &mut QubitCircuit,
    group: &FiniteGroup,
    lambda_b: f64,
    dt: f64,
    wires: [usize; 3],
) {
    // Only the two sign states ±1 (encodings 000 and 010) carry a nonzero
    // character, so the whole diagonal reduces to one two-controlled gate.
    let plus = magnetic_phase(group, lambda_b, dt, 0);
    let minus = magnetic_phase(group, lambda_b, dt, 1);
    qc.x(wires[0]);
    qc.x(wires[2]);
    qc.controlled(&[wires[0], wires[2]], wires[1], diag2(plus, minus));
    qc.x(wires[0]);
    qc.x(wires[2]);
}

/// Qubit program of one plaquette phase circuit: the multiplication ladder
/// accumulates the oriented word onto the host register (the first,
/// uninverted word factor), the doubly-controlled phase acts there, and the
/// ladder uncomputes in reverse. Link ℓ occupies wires 3ℓ…3ℓ+2.
pub fn plaquette_qubit_circuit(
    group: &FiniteGroup,
    lambda_b: f64,
    dt: f64,
    word: &[WordFactor],
) -> Result<QubitCircuit> {
    assert_eq!(group.order(), 8, "the encoding is specific to Q8");
    let (host, host_inverted) = *word
        .first()
        .ok_or_else(|| Error::Config("empty plaquette word".into()))?;
    if host_inverted {
        return Err(Error::Config(
            "plaquette word must start with an uninverted host link".into(),
        ));
    }
    let mut links_seen = vec![host];
    for &(l, _) in &word[1..] {
        if links_seen.contains(&l) {
            return Err(Error::Config(format!(
                "plaquette word repeats link {l}; accumulation needs distinct links"
            )));
        }
        links_seen.push(l);
    }
    let enc = QubitEncoding::standard();
    let n_links = 1 + *links_seen.iter().max().expect("non-empty");
    let wires = |l: usize| [3 * l, 3 * l + 1, 3 * l + 2];
    let mut qc = QubitCircuit::new(3 * n_links);
    let ladder = |qc: &mut QubitCircuit, link: usize, dagger: bool| {
        for h in 1..8 {
            let p = if dagger { group.inv(h) } else { h };
            emit_controlled_multiply(qc, &enc, wires(link), wires(host), h, p);
        }
    };
    for &(l, inverted) in &word[1..] {
        ladder(&mut qc, l, inverted);
    }
    emit_magnetic_phase(&mut qc, group, lambda_b, dt, wires(host));
    for &(l, inverted) in word[1..].iter().rev() {
        ladder(&mut qc, l, !inverted);
    }
    Ok(qc)
}

// ---------------------------------------------------------------------------
// Oracles from the group layer
// ---------------------------------------------------------------------------

/// 8×8 permutation the encoded right multiplication must equal.
pub fn encoded_theta_matrix(group: &FiniteGroup, enc: &QubitEncoding, g: Element) -> CMat {
    let mut m = CMat::zeros((8, 8));
    for h in 0..8 {
        m[[
            enc.encode(group.mul(h, g)) as usize,
            enc.encode(h) as usize,
        ]] = ONE;
    }
    m
}

/// 64×64 oracle for the value-selected multiplication, encoded bit order
/// (target bits major).
pub fn encoded_c_theta_matrix(
    group: &FiniteGroup,
    enc: &QubitEncoding,
    value: Element,
    rmul: Element,
) -> CMat {
    let mut m = CMat::zeros((64, 64));
    for t in 0..8 {
        for c in 0..8 {
            let col = (enc.encode(t) as usize) * 8 + enc.encode(c) as usize;
            let out_t = if c == value { group.mul(t, rmul) } else { t };
            let row = (enc.encode(out_t) as usize) * 8 + enc.encode(c) as usize;
            m[[row, col]] = ONE;
        }
    }
    m
}

/// 64×64 oracle for the full multiplication program |g⟩|g′⟩ → |g·g′⟩|g′⟩.
pub fn encoded_theta_program_matrix(group: &FiniteGroup, enc: &QubitEncoding) -> CMat {
    let mut m = CMat::zeros((64, 64));
    for t in 0..8 {
        for c in 0..8 {
            let col = (enc.encode(t) as usize) * 8 + enc.encode(c) as usize;
            let row = (enc.encode(group.mul(t, c)) as usize) * 8 + enc.encode(c) as usize;
            m[[row, col]] = ONE;
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Entangling-gate budgets
// ---------------------------------------------------------------------------

/// Programs whose entangling budget the platform comparison tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgramKind {
    /// One full group-multiplication gate.
    ThetaGate,
    /// One plaquette phase circuit (multiplication ladder, host phase,
    /// uncompute) for the standard four-link plaquette.
    PlaquetteTrotterStep,
}

/// Entangling-gate total of one program at one lowering level, tallied by
/// expanding the actual circuits gate by gate.
pub fn count_entangling(program: ProgramKind, level: LoweringLevel) -> usize {
    let circuit = match program {
        ProgramKind::ThetaGate => theta_qubit_program(),
        ProgramKind::PlaquetteTrotterStep => plaquette_qubit_circuit(
            &FiniteGroup::q8(),
            1.0,
            0.25,
            &[(0, false), (1, false), (2, true), (3, true)],
        )
        .expect("fixed plaquette word is valid"),
    };
    circuit.lowered(level).entangling_count()
}

/// Two-qubit cost of one n-controlled unitary at the given lowering level,
/// obtained by expanding an actual gate.
pub fn toffoli_cost(n_controls: usize, level: LoweringLevel) -> Result<usize> {
    if !(2..=4).contains(&n_controls) {
        return Err(Error::Config(format!(
            "Toffoli-family cost defined for 2–4 controls, got {n_controls}"
        )));
    }
    let mut qc = QubitCircuit::new(n_controls + 1);
    let controls: Vec<usize> = (0..n_controls).collect();
    qc.controlled(&controls, n_controls, PAULI_X);
    Ok(qc.lowered(level).entangling_count())
}

// ---------------------------------------------------------------------------
// Noisy program simulation
// ---------------------------------------------------------------------------

/// The exact two-qubit controlled-iY in (target, control) level order:
/// iY on the target when the control sits in |1⟩.
pub fn ideal_controlled_iy_matrix() -> CMat {
    let mut m = CMat::eye(4);
    m[[1, 1]] = ZERO;
    m[[3, 3]] = ZERO;
    m[[1, 3]] = ONE;
    m[[3, 1]] = C64::new(-1.0, 0.0);
    m
}

/// Single-atom pulse schedule of the iY rotation on a two-level register.
fn iy_pulse_schedule() -> PulseSchedule {
    let mut sched = PulseSchedule::new(2);
    sched.push_target(Rotation::y(0, 1, -PI));
    sched
}

/// Pulse-simulate the elementary two-qubit gate: each qubit lives in two
/// ground levels of an atom (plus the p/e/r auxiliaries), and the
/// interaction-mediated controlled protocol conditions the iY rotation on
/// the control qubit's |1⟩ level. Returns the sub-unitary effective 4×4
/// matrix and its pulse budget.
pub fn faulty_controlled_iy(hw: &HardwareParams) -> Result<ControlledGateResult> {
    let ctx = PulseContext::new(*hw, 2);
    controlled_unitary_pulse_sim(&ctx, &iy_pulse_schedule(), 1)
}

/// Pulse budget (rotations, windows) of one elementary two-qubit gate,
/// counted from its controlled-protocol schedule without simulating it.
pub fn controlled_iy_budget() -> (usize, usize) {
    let scheme = AtomLevelScheme::new(2);
    let sched = controlled_schedule(&iy_pulse_schedule(), &scheme, 1);
    (sched.rotation_count(), sched.window_count())
}

/// Fidelity summary of the fully lowered multiplication program run with a
/// substituted two-qubit gate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QubitThetaBenchmark {
    /// Entangling gates in the lowered program.
    pub entangling_gates: usize,
    /// Average gate fidelity of the substituted two-qubit gate against the
    /// exact controlled-iY.
    pub gate_fidelity: f64,
    /// Overlap |⟨ψ_ideal|ψ⟩|² of the benchmark preparation, decay included.
    pub state_fidelity: f64,
    /// Surviving squared norm of the benchmark state.
    pub norm: f64,
}

/// Run the lowered program on the benchmark state — identity on the product
/// register, uniform superposition on the multiplier — substituting `gate`
/// (4×4, (target, control) level order) for every entangling gate.
/// Returns (overlap fidelity with the ideal outcome, surviving norm).
pub fn run_theta_program_with_gate(gate: &CMat) -> (f64, f64) {
    let program = theta_qubit_program().lowered(LoweringLevel::CnotPlusControlledIY);
    run_lowered_benchmark(&program, gate)
}

fn run_lowered_benchmark(program: &QubitCircuit, gate: &CMat) -> (f64, f64) {
    assert_eq!(gate.nrows(), 4, "substituted gate must be two-qubit");
    assert_eq!(program.n_qubits(), 2 * REGISTER_QUBITS);
    let enc = QubitEncoding::standard();
    let amp = C64::new(1.0 / (8.0f64).sqrt(), 0.0);
    let mut state = CVec::zeros(64);
    for c in 0..8 {
        state[enc.encode(c) as usize] = amp;
    }
    for g in program.gates() {
        if g.controls.is_empty() {
            apply_gate(&mut state, program.n_qubits(), g);
        } else {
            assert_eq!(
                g.kind(),
                GateKind::ControlledIY,
                "lowered program may only contain controlled-iY entanglers"
            );
            apply_two_qubit(&mut state, program.n_qubits(), gate, g.target, g.controls[0]);
        }
    }
    // Ideal outcome: both registers hold the multiplier.
    let mut overlap = ZERO;
    for c in 0..8 {
        let b = enc.encode(c) as usize;
        overlap += amp.conj() * state[b * 8 + b];
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum();
    (overlap.norm_sqr(), norm)
}

/// Simulate the entangling-state preparation on the qubit platform: lower
/// the multiplication program to controlled-iY level, pulse-simulate that
/// single two-qubit gate once, and substitute it for all entangling gates.
pub fn noisy_qubit_theta_sim(hw: &HardwareParams) -> Result<QubitThetaBenchmark> {
    let program = theta_qubit_program().lowered(LoweringLevel::CnotPlusControlledIY);
    let entangling_gates = program.entangling_count();
    let result = faulty_controlled_iy(hw)?;
    let gate_fidelity = average_gate_fidelity(
        &ideal_controlled_iy_matrix(),
        &result.effective,
        &[0, 1, 2, 3],
    );
    let (state_fidelity, norm) = run_lowered_benchmark(&program, &result.effective);
    Ok(QubitThetaBenchmark {
        entangling_gates,
        gate_fidelity,
        state_fidelity,
        norm,
    })
}
