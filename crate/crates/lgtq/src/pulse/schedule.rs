//! Pulse schedules: ordered two-level rotations realizing qudit gates.
//!
//! A schedule entry is one rotation R^{(i,j)}_{x/y}(φ) addressed to one atom;
//! each rotation expands into one or two Gaussian pulse windows (a window
//! reaches at most a quarter turn). Builders cover the hand-listed
//! right-multiplication sequences for the eight-element quaternion register,
//! a general two-level decomposition of arbitrary unitaries, and the
//! interaction-mediated controlled-gate protocol.

use ndarray_linalg::Determinant;

use crate::group::FiniteGroup;
use crate::linalg::{dagger, C64, CMat};
use crate::pulse::holonomic::{ideal_rotation, split_angle};
use crate::pulse::{AtomLevelScheme, HardwareParams, PulseContext};
use crate::{Error, Result};

use std::f64::consts::{FRAC_PI_2, PI};

/// Which atom of a gate a rotation addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomRole {
    Target,
    Control,
}

/// One two-level rotation R^{(i,j)}_δ(φ) = u(φ/2, δ) on a level pair.
/// δ = π is a Y rotation, δ = π/2 an X rotation.
#[derive(Debug, Clone, Copy)]
pub struct Rotation {
    pub level_i: usize,
    pub level_j: usize,
    pub phi: f64,
    pub delta: f64,
}

impl Rotation {
    pub fn y(level_i: usize, level_j: usize, phi: f64) -> Self {
        Rotation {
            level_i,
            level_j,
            phi,
            delta: PI,
        }
    }

    pub fn x(level_i: usize, level_j: usize, phi: f64) -> Self {
        Rotation {
            level_i,
            level_j,
            phi,
            delta: FRAC_PI_2,
        }
    }

    /// The exact 2×2 matrix of this rotation.
    pub fn block(&self) -> CMat {
        ideal_rotation(0.5 * self.phi, self.delta)
    }

    /// Pulse windows needed: one per cap-sized piece of α = φ/2.
    pub fn windows(&self) -> usize {
        if self.phi == 0.0 {
            0
        } else {
            split_angle(0.5 * self.phi)
        }
    }
}

/// A rotation bound to an atom, with Rydberg-swap entries marked for
/// bookkeeping (they move population to the interacting level).
#[derive(Debug, Clone, Copy)]
pub struct ScheduledRotation {
    pub atom: AtomRole,
    pub rotation: Rotation,
    pub rydberg_swap: bool,
}

/// One expanded pulse window: a single Gaussian pair producing u(α, δ).
#[derive(Debug, Clone, Copy)]
pub struct WindowSpec {
    pub atom: AtomRole,
    pub level_i: usize,
    pub level_j: usize,
    pub alpha: f64,
    pub delta: f64,
}

/// An ordered pulse program on one or two atoms (entry 0 runs first).
#[derive(Debug, Clone)]
pub struct PulseSchedule {
    pub d: usize,
    pub entries: Vec<ScheduledRotation>,
}

impl PulseSchedule {
    pub fn new(d: usize) -> Self {
        PulseSchedule {
            d,
            entries: Vec::new(),
        }
    }

    pub fn push_target(&mut self, rotation: Rotation) {
        self.entries.push(ScheduledRotation {
            atom: AtomRole::Target,
            rotation,
            rydberg_swap: false,
        });
    }

    /// Number of scheduled rotations (Rydberg swaps included).
    pub fn rotation_count(&self) -> usize {
        self.entries.len()
    }

    /// Number of physical pulse windows after splitting large angles.
    pub fn window_count(&self) -> usize {
        self.entries.iter().map(|e| e.rotation.windows()).sum()
    }

    /// True when any entry addresses the control atom.
    pub fn involves_control(&self) -> bool {
        self.entries.iter().any(|e| e.atom == AtomRole::Control)
    }

    /// Expand rotations into per-window specifications, in time order.
    pub fn windows(&self) -> Vec<WindowSpec> {
        let mut out = Vec::with_capacity(self.window_count());
        for entry in &self.entries {
            let rot = entry.rotation;
            let alpha_total = 0.5 * rot.phi;
            if alpha_total == 0.0 {
                continue;
            }
            let k = split_angle(alpha_total);
            for _ in 0..k {
                out.push(WindowSpec {
                    atom: entry.atom,
                    level_i: rot.level_i,
                    level_j: rot.level_j,
                    alpha: alpha_total / k as f64,
                    delta: rot.delta,
                });
            }
        }
        out
    }

    /// Wall-clock length: one window time per pulse window, plus one
    /// transport dead time when the schedule spans two atoms.
    pub fn duration(&self, hw: &HardwareParams) -> f64 {
        let mut t = self.window_count() as f64 * hw.t;
        if self.involves_control() {
            t += hw.move_dead_time;
        }
        t
    }

    /// Exact operator the schedule would implement with perfect rotations,
    /// on an `n`-level single atom. Panics if any entry addresses the
    /// control atom.
    pub fn ideal_matrix(&self, n: usize) -> CMat {
        let mut acc = CMat::eye(n);
        for entry in &self.entries {
            assert_eq!(
                entry.atom,
                AtomRole::Target,
                "ideal_matrix only covers single-atom schedules"
            );
            let rot = entry.rotation;
            let block = rot.block();
            let mut full = CMat::eye(n);
            full[[rot.level_i, rot.level_i]] = block[[0, 0]];
            full[[rot.level_i, rot.level_j]] = block[[0, 1]];
            full[[rot.level_j, rot.level_i]] = block[[1, 0]];
            full[[rot.level_j, rot.level_j]] = block[[1, 1]];
            acc = full.dot(&acc);
        }
        acc
    }
}

/// Hand-listed Y-rotation sequences (time order) realizing the eight
/// right-multiplication permutations of the quaternion register. Entries are
/// (i, j, φ).
const Q8_SEQUENCES: [&[(usize, usize, f64)]; 8] = [
    // identity
    &[],
    // −1: swap the four sign pairs
    &[
        (6, 7, PI),
        (5, 6, 2.0 * PI),
        (4, 5, PI),
        (2, 3, PI),
        (1, 2, 2.0 * PI),
        (0, 1, PI),
    ],
    // i
    &[
        (7, 5, PI),
        (4, 6, PI),
        (6, 7, PI),
        (3, 4, 2.0 * PI),
        (1, 3, PI),
        (2, 1, PI),
        (0, 2, PI),
    ],
    // −i
    &[
        (5, 7, PI),
        (6, 5, PI),
        (4, 6, PI),
        (2, 4, 2.0 * PI),
        (1, 2, PI),
        (3, 1, PI),
        (0, 3, PI),
    ],
    // j
    &[
        (3, 7, PI),
        (6, 3, PI),
        (2, 6, PI),
        (5, 2, 2.0 * PI),
        (1, 5, PI),
        (4, 1, PI),
        (0, 4, PI),
    ],
    // −j
    &[
        (7, 3, PI),
        (2, 6, PI),
        (6, 7, PI),
        (4, 2, 2.0 * PI),
        (1, 4, PI),
        (5, 1, PI),
        (0, 5, PI),
    ],
    // k
    &[
        (5, 3, PI),
        (2, 4, PI),
        (4, 5, PI),
        (7, 2, 2.0 * PI),
        (1, 7, PI),
        (6, 1, PI),
        (0, 6, PI),
    ],
    // −k
    &[
        (3, 5, PI),
        (4, 3, PI),
        (2, 4, PI),
        (6, 2, 2.0 * PI),
        (1, 6, PI),
        (7, 1, PI),
        (0, 7, PI),
    ],
];

/// Seven-rotation variant for right-multiplication by −1, used inside the
/// controlled-gate builder so that every controlled block lowers to the same
/// rotation budget (seven rotations before the swap sandwich).
const Q8_MINUS_ONE_BUILD: &[(usize, usize, f64)] = &[
    (0, 1, PI),
    (2, 3, PI),
    (4, 5, PI),
    (6, 7, PI),
    (0, 2, 2.0 * PI),
    (4, 5, 2.0 * PI),
    (5, 6, 2.0 * PI),
];

/// The hand-listed pulse sequence for right multiplication by element `g` on
/// the eight-level quaternion register.
pub fn q8_permutation_schedule(g: usize) -> PulseSchedule {
    assert!(g < 8, "quaternion element index out of range");
    let mut sched = PulseSchedule::new(8);
    for &(i, j, phi) in Q8_SEQUENCES[g] {
        sched.push_target(Rotation::y(i, j, phi));
    }
    sched
}

/// The sequence used for the target-side block of controlled gates: the same
/// hand-listed sequences, with the −1 block in its seven-rotation form.
pub fn theta_build_schedule(g: usize) -> PulseSchedule {
    assert!(g < 8, "quaternion element index out of range");
    if g == 1 {
        let mut sched = PulseSchedule::new(8);
        for &(i, j, phi) in Q8_MINUS_ONE_BUILD {
            sched.push_target(Rotation::y(i, j, phi));
        }
        sched
    } else {
        q8_permutation_schedule(g)
    }
}

/// Level-pair connectivity available to a decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    /// Only pairs of adjacent levels (i, i+1).
    Consecutive,
    /// Any level pair; requires a monomial (signed/phased permutation)
    /// input and uses one unit per transposition.
    AllToAll,
}

/// One special-unitary block acting on a level pair.
#[derive(Debug, Clone)]
pub struct TwoLevelUnit {
    pub level_i: usize,
    pub level_j: usize,
    /// 2×2 block with determinant 1.
    pub block: CMat,
}

impl TwoLevelUnit {
    /// Embed into an n-level identity.
    pub fn embed(&self, n: usize) -> CMat {
        let mut full = CMat::eye(n);
        full[[self.level_i, self.level_i]] = self.block[[0, 0]];
        full[[self.level_i, self.level_j]] = self.block[[0, 1]];
        full[[self.level_j, self.level_i]] = self.block[[1, 0]];
        full[[self.level_j, self.level_j]] = self.block[[1, 1]];
        full
    }
}

/// The SU(2) row transform sending (a, b)ᵀ to (√(|a|²+|b|²), 0)ᵀ.
fn zeroing_block(a: C64, b: C64) -> (f64, CMat) {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let mut m = CMat::eye(2);
    if r > 0.0 {
        let x = a.conj() / r;
        let y = b.conj() / r;
        m[[0, 0]] = x;
        m[[0, 1]] = y;
        m[[1, 0]] = -y.conj();
        m[[1, 1]] = x.conj();
    }
    (r, m)
}

/// Apply a 2×2 block to rows (i, j) of `a` from the left.
fn apply_rows(a: &mut CMat, block: &CMat, i: usize, j: usize) {
    let n = a.ncols();
    for c in 0..n {
        let (ai, aj) = (a[[i, c]], a[[j, c]]);
        a[[i, c]] = block[[0, 0]] * ai + block[[0, 1]] * aj;
        a[[j, c]] = block[[1, 0]] * ai + block[[1, 1]] * aj;
    }
}

fn is_negligible(block: &CMat) -> bool {
    let eye = CMat::eye(2);
    block
        .iter()
        .zip(eye.iter())
        .all(|(a, b)| (a - b).norm() < 1e-12)
}

/// Split a unitary into two-level special-unitary blocks, returned in time
/// order (index 0 applied first). The product of the embedded blocks equals
/// the input up to one global phase.
///
/// Consecutive connectivity eliminates column by column with adjacent-pair
/// Givens blocks (at most d(d−1)/2 units). All-to-all connectivity accepts
/// monomial matrices only and uses one unit per transposition (at most d−1
/// units for a permutation).
pub fn decompose_unitary(u: &CMat, connectivity: Connectivity) -> Result<Vec<TwoLevelUnit>> {
    let d = u.nrows();
    if u.ncols() != d {
        return Err(Error::Decomposition("input must be square".into()));
    }
    let uerr = crate::linalg::unitarity_error(u);
    if uerr > 1e-10 {
        return Err(Error::Decomposition(format!(
            "input is not unitary (deviation {uerr:.3e})"
        )));
    }
    // Normalize the determinant so the elimination terminates on the
    // identity exactly; the dropped d-th root of det becomes the global
    // phase of the reconstruction.
    let det = u.det().map_err(|e| Error::Decomposition(e.to_string()))?;
    let phase = C64::from_polar(1.0, -det.arg() / d as f64);
    let mut a = u.mapv(|z| z * phase);

    // Elimination blocks in the order applied to the input from the left.
    let mut applied: Vec<TwoLevelUnit> = Vec::new();
    match connectivity {
        Connectivity::Consecutive => {
            for col in 0..d.saturating_sub(1) {
                for row in (col + 1..d).rev() {
                    if a[[row, col]].norm() < 1e-14 {
                        continue;
                    }
                    let (_, block) = zeroing_block(a[[row - 1, col]], a[[row, col]]);
                    apply_rows(&mut a, &block, row - 1, row);
                    if !is_negligible(&block) {
                        applied.push(TwoLevelUnit {
                            level_i: row - 1,
                            level_j: row,
                            block,
                        });
                    }
                }
            }
        }
        Connectivity::AllToAll => {
            for col in 0..d {
                let mut support: Vec<usize> =
                    (0..d).filter(|&r| a[[r, col]].norm() > 1e-10).collect();
                if support.len() != 1 {
                    return Err(Error::Decomposition(
                        "all-to-all decomposition requires a monomial (phased permutation) matrix"
                            .into(),
                    ));
                }
                let row = support.pop().expect("one support row");
                if row == col {
                    continue; // diagonal phases are folded afterwards
                }
                let (_, block) = zeroing_block(a[[col, col]], a[[row, col]]);
                apply_rows(&mut a, &block, col, row);
                if !is_negligible(&block) {
                    applied.push(TwoLevelUnit {
                        level_i: col,
                        level_j: row,
                        block,
                    });
                }
            }
        }
    }

    // The residue is diagonal and unimodular with unit determinant. The
    // consecutive elimination pins every pivot to +1 as it goes; the
    // monomial path leaves signs/phases behind (a plain swap has
    // determinant −1, so each transposition parks a sign on the diagonal).
    let off_diag_clean = (0..d).all(|r| (0..d).all(|c| r == c || a[[r, c]].norm() < 1e-9));
    if !off_diag_clean {
        return Err(Error::Decomposition(
            "elimination left a non-diagonal residue".into(),
        ));
    }
    let wrap = |x: f64| x.sin().atan2(x.cos());
    let diagonal_unit = |i: usize, j: usize, theta: f64| {
        let mut block = CMat::zeros((2, 2));
        block[[0, 0]] = C64::from_polar(1.0, theta);
        block[[1, 1]] = C64::from_polar(1.0, -theta);
        TwoLevelUnit {
            level_i: i,
            level_j: j,
            block,
        }
    };
    let mut diagonal_units: Vec<TwoLevelUnit> = Vec::new();
    match connectivity {
        Connectivity::Consecutive => {
            // Telescoping cumulative phases on adjacent pairs.
            let mut cum = 0.0f64;
            for k in 0..d.saturating_sub(1) {
                cum = wrap(cum + a[[k, k]].arg());
                if cum.abs() > 1e-12 {
                    diagonal_units.push(diagonal_unit(k, k + 1, cum));
                }
            }
        }
        Connectivity::AllToAll => {
            // Chain only the levels that carry a phase: one unit cancels the
            // pending level and shifts its phase onto the next carrier. The
            // unit determinant guarantees the chain closes.
            let mut pending: Option<(usize, f64)> = None;
            for k in 0..d {
                let phase = wrap(a[[k, k]].arg());
                if phase.abs() <= 1e-12 {
                    continue;
                }
                match pending {
                    None => pending = Some((k, phase)),
                    Some((prev, carry)) => {
                        diagonal_units.push(diagonal_unit(prev, k, carry));
                        let combined = wrap(phase + carry);
                        pending = if combined.abs() > 1e-12 {
                            Some((k, combined))
                        } else {
                            None
                        };
                    }
                }
            }
            if let Some((_, carry)) = pending {
                if carry.abs() > 1e-9 {
                    return Err(Error::Decomposition(
                        "diagonal residue does not close to unit determinant".into(),
                    ));
                }
            }
        }
    }

    // Reconstruction reads U = B₁† B₂† … B_m† D, so in time order the
    // diagonal units run first, then the elimination blocks daggered and
    // reversed.
    let mut units = diagonal_units;
    units.extend(applied.into_iter().rev().map(|u| TwoLevelUnit {
        level_i: u.level_i,
        level_j: u.level_j,
        block: dagger(&u.block),
    }));
    Ok(units)
}

/// Express one special-unitary two-level block as at most three axis
/// rotations on the same pair, in time order.
pub fn rotations_for_unit(unit: &TwoLevelUnit) -> Vec<Rotation> {
    let b = &unit.block;
    let (i, j) = (unit.level_i, unit.level_j);
    let imag_mass: f64 = b.iter().map(|z| z.im.abs()).sum();
    if imag_mass < 1e-12 {
        // Pure Y rotation.
        let phi = 2.0 * b[[1, 0]].re.atan2(b[[0, 0]].re);
        return if phi.abs() < 1e-12 {
            vec![]
        } else {
            vec![Rotation::y(i, j, phi)]
        };
    }
    let x_like = b[[0, 0]].im.abs() < 1e-12
        && b[[1, 1]].im.abs() < 1e-12
        && b[[0, 1]].re.abs() < 1e-12
        && b[[1, 0]].re.abs() < 1e-12
        && (b[[0, 1]] - b[[1, 0]]).norm() < 1e-12;
    if x_like {
        let phi = 2.0 * (-b[[0, 1]].im).atan2(b[[0, 0]].re);
        return if phi.abs() < 1e-12 {
            vec![]
        } else {
            vec![Rotation::x(i, j, phi)]
        };
    }
    // General case: conjugate by the Hadamard reflection, read Euler angles
    // about z–y–z, and map back to x–y–x.
    let h = {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = CMat::zeros((2, 2));
        m[[0, 0]] = C64::new(s, 0.0);
        m[[0, 1]] = C64::new(s, 0.0);
        m[[1, 0]] = C64::new(s, 0.0);
        m[[1, 1]] = C64::new(-s, 0.0);
        m
    };
    let m = h.dot(b).dot(&h);
    let (m00, m10) = (m[[0, 0]], m[[1, 0]]);
    let beta = 2.0 * m10.norm().atan2(m00.norm());
    let (aa, cc) = if m00.norm() < 1e-12 {
        (2.0 * m10.arg(), 0.0)
    } else if m10.norm() < 1e-12 {
        (-2.0 * m00.arg(), 0.0)
    } else {
        (-m00.arg() + m10.arg(), -m00.arg() - m10.arg())
    };
    // b = Rx(aa) · Ry(−beta) · Rx(cc): time order is rightmost first.
    let seq = [
        Rotation::x(i, j, cc),
        Rotation::y(i, j, -beta),
        Rotation::x(i, j, aa),
    ];
    seq.into_iter().filter(|r| r.phi.abs() > 1e-12).collect()
}

/// Decompose a d×d unitary into a pulse schedule on a single atom.
pub fn single_qudit_schedule(u: &CMat, connectivity: Connectivity) -> Result<PulseSchedule> {
    let d = u.nrows();
    let mut sched = PulseSchedule::new(d);
    for unit in decompose_unitary(u, connectivity)? {
        for rot in rotations_for_unit(&unit) {
            sched.push_target(rot);
        }
    }
    Ok(sched)
}

/// Pulse schedule of a right-multiplication permutation for an arbitrary
/// group register (all-to-all pairs, one unit per transposition).
pub fn permutation_schedule(group: &FiniteGroup, g: usize) -> Result<PulseSchedule> {
    let perm = group.right_regular(g).matrix();
    single_qudit_schedule(&perm, Connectivity::AllToAll)
}

/// Lower a single-atom schedule into the two-atom controlled protocol:
/// run U on the target, swap the control's j₀ level into the interacting
/// level, run U† on the target with every rotation routed through the
/// interacting level, and swap the control back.
pub fn controlled_schedule(
    u_sched: &PulseSchedule,
    scheme: &AtomLevelScheme,
    j0: usize,
) -> PulseSchedule {
    let r = scheme.r();
    let mut out = PulseSchedule::new(u_sched.d);
    for entry in &u_sched.entries {
        assert_eq!(entry.atom, AtomRole::Target);
        let rot = entry.rotation;
        assert!(
            rot.level_i < scheme.d && rot.level_j < scheme.d,
            "the target block must act on computational levels"
        );
        out.entries.push(*entry);
    }
    out.entries.push(ScheduledRotation {
        atom: AtomRole::Control,
        rotation: Rotation::y(j0, r, PI),
        rydberg_swap: true,
    });
    for entry in u_sched.entries.iter().rev() {
        let rot = entry.rotation;
        // Inverse rotation R^{(i,j)}(−φ) via the interacting level. The swap
        // sandwich inverts the sign of Y angles by itself, so the inner Y
        // angle stays +φ while X angles flip.
        let inner_phi = if (rot.delta - PI).abs() < 1e-12 {
            rot.phi
        } else {
            -rot.phi
        };
        out.entries.push(ScheduledRotation {
            atom: AtomRole::Target,
            rotation: Rotation::y(rot.level_i, r, PI),
            rydberg_swap: true,
        });
        out.entries.push(ScheduledRotation {
            atom: AtomRole::Target,
            rotation: Rotation {
                level_i: rot.level_j,
                level_j: r,
                phi: inner_phi,
                delta: rot.delta,
            },
            rydberg_swap: false,
        });
        out.entries.push(ScheduledRotation {
            atom: AtomRole::Target,
            rotation: Rotation::y(rot.level_i, r, -PI),
            rydberg_swap: true,
        });
    }
    out.entries.push(ScheduledRotation {
        atom: AtomRole::Control,
        rotation: Rotation::y(j0, r, -PI),
        rydberg_swap: true,
    });
    out
}

/// Report of one realized schedule.
#[derive(Debug, Clone, Copy)]
pub struct ScheduleReport {
    pub rotations: usize,
    pub windows: usize,
    pub duration: f64,
}

/// Simulate a single-atom schedule at the pulse level and project onto the
/// computational levels. The returned matrix is d×d and sub-unitary under
/// decay.
pub fn simulate_single_qudit_schedule(
    ctx: &PulseContext,
    sched: &PulseSchedule,
) -> Result<(CMat, ScheduleReport)> {
    let scheme = ctx.scheme;
    assert_eq!(sched.d, scheme.d, "schedule dimension must match the atom");
    let n = scheme.n_levels();
    let mut acc = CMat::eye(n);
    for win in sched.windows() {
        assert_eq!(
            win.atom,
            AtomRole::Target,
            "single-atom simulation cannot run control-atom windows"
        );
        assert!(
            win.level_j != scheme.r() && win.level_i != scheme.r(),
            "single-atom gates must not touch the interacting level"
        );
        let u4 = ctx.window_propagator(win.alpha, win.delta, false, false)?;
        let full = crate::pulse::holonomic::embed_quad(
            &u4,
            win.level_i,
            win.level_j,
            &scheme,
            C64::new(1.0, 0.0),
        );
        acc = full.dot(&acc);
    }
    let mut out = CMat::zeros((scheme.d, scheme.d));
    for r in 0..scheme.d {
        for c in 0..scheme.d {
            out[[r, c]] = acc[[r, c]];
        }
    }
    Ok((
        out,
        ScheduleReport {
            rotations: sched.rotation_count(),
            windows: sched.window_count(),
            duration: sched.duration(&ctx.hw),
        },
    ))
}

/// Rotation and window totals of the full six-gate-per-link entangler: the
/// seven controlled right-multiplication blocks of one link-to-link
/// group multiplication.
pub fn theta_controlled_totals(scheme: &AtomLevelScheme) -> (usize, usize) {
    let mut rotations = 0;
    let mut windows = 0;
    for h in 1..8 {
        let c = controlled_schedule(&theta_build_schedule(h), scheme, h);
        rotations += c.rotation_count();
        windows += c.window_count();
    }
    (rotations, windows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FiniteGroup;
    use crate::linalg::{max_abs_diff, max_abs_diff_up_to_phase};
    use crate::model::{electric_gate, magnetic_phase, ModelParams};
    use ndarray_linalg::QR;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn q8_right_matrix(g: usize) -> CMat {
        FiniteGroup::q8().right_regular(g).matrix()
    }

    #[test]
    fn hand_listed_sequences_reproduce_right_multiplication_exactly() {
        for g in 0..8 {
            let sched = q8_permutation_schedule(g);
            let m = sched.ideal_matrix(8);
            let target = q8_right_matrix(g);
            assert!(
                max_abs_diff(&m, &target) < 1e-12,
                "sequence for element {g} deviates"
            );
        }
    }

    #[test]
    fn seven_rotation_variant_matches_minus_one() {
        let sched = theta_build_schedule(1);
        assert_eq!(sched.rotation_count(), 7);
        let m = sched.ideal_matrix(8);
        assert!(max_abs_diff(&m, &q8_right_matrix(1)) < 1e-12);
    }

    #[test]
    fn sequence_rotation_and_window_counts() {
        let rot_counts: Vec<usize> = (0..8)
            .map(|g| q8_permutation_schedule(g).rotation_count())
            .collect();
        assert_eq!(rot_counts, vec![0, 6, 7, 7, 7, 7, 7, 7]);
        for g in 2..8 {
            assert_eq!(q8_permutation_schedule(g).window_count(), 16);
        }
        assert_eq!(q8_permutation_schedule(1).window_count(), 16);
        assert_eq!(theta_build_schedule(1).window_count(), 20);
    }

    #[test]
    fn controlled_blocks_hit_the_published_budget() {
        let scheme = AtomLevelScheme::new(8);
        for h in 1..8 {
            let c = controlled_schedule(&theta_build_schedule(h), &scheme, h);
            assert_eq!(c.rotation_count(), 30, "element {h}");
            let expected_windows = if h == 1 { 72 } else { 64 };
            assert_eq!(c.window_count(), expected_windows, "element {h}");
        }
        let (rotations, windows) = theta_controlled_totals(&scheme);
        assert_eq!(rotations, 210);
        assert_eq!(windows, 456);
    }

    #[test]
    fn controlled_budget_respects_the_general_bound() {
        // Each controlled block fits inside (6d(d−1)+2) windows.
        let scheme = AtomLevelScheme::new(8);
        let bound = 6 * 8 * 7 + 2;
        for h in 1..8 {
            let c = controlled_schedule(&theta_build_schedule(h), &scheme, h);
            assert!(c.window_count() <= bound);
        }
    }

    fn random_unitary(d: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = CMat::zeros((d, d));
        for r in 0..d {
            for c in 0..d {
                m[[r, c]] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let (q, r) = m.qr().expect("qr");
        // Fix the phase convention so columns are well-spread.
        let mut qq = q;
        for k in 0..d {
            let ph = r[[k, k]] / C64::new(r[[k, k]].norm(), 0.0);
            for row in 0..d {
                qq[[row, k]] *= ph;
            }
        }
        qq
    }

    fn reconstruct_units(units: &[TwoLevelUnit], d: usize) -> CMat {
        let mut acc = CMat::eye(d);
        for u in units {
            acc = u.embed(d).dot(&acc);
        }
        acc
    }

    fn reconstruct_schedule(sched: &PulseSchedule, d: usize) -> CMat {
        sched.ideal_matrix(d)
    }

    #[test]
    fn consecutive_decomposition_counts_and_reconstructs() {
        let d = 8;
        let u = random_unitary(d, 11);
        let units = decompose_unitary(&u, Connectivity::Consecutive).unwrap();
        assert!(units.len() <= d * (d - 1) / 2, "got {} units", units.len());
        for unit in &units {
            assert_eq!(unit.level_j, unit.level_i + 1);
            let det = unit.block[[0, 0]] * unit.block[[1, 1]]
                - unit.block[[0, 1]] * unit.block[[1, 0]];
            assert!((det - C64::new(1.0, 0.0)).norm() < 1e-10);
        }
        let rec = reconstruct_units(&units, d);
        assert!(max_abs_diff_up_to_phase(&rec, &u) < 1e-9);
    }

    #[test]
    fn identity_decomposes_to_nothing() {
        let u = CMat::eye(6);
        assert!(decompose_unitary(&u, Connectivity::Consecutive)
            .unwrap()
            .is_empty());
        assert!(decompose_unitary(&u, Connectivity::AllToAll)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn permutations_fit_the_transposition_budget() {
        for g in 1..8 {
            let target = q8_right_matrix(g);
            let units = decompose_unitary(&target, Connectivity::AllToAll).unwrap();
            assert!(units.len() <= 7, "element {g}: {} units", units.len());
            let rec = reconstruct_units(&units, 8);
            assert!(max_abs_diff_up_to_phase(&rec, &target) < 1e-9);
        }
    }

    #[test]
    fn dense_input_is_rejected_by_all_to_all() {
        let u = random_unitary(4, 3);
        assert!(matches!(
            decompose_unitary(&u, Connectivity::AllToAll),
            Err(Error::Decomposition(_))
        ));
    }

    #[test]
    fn non_unitary_input_is_rejected() {
        let mut u = CMat::eye(3);
        u[[0, 0]] = C64::new(1.3, 0.0);
        assert!(matches!(
            decompose_unitary(&u, Connectivity::Consecutive),
            Err(Error::Decomposition(_))
        ));
    }

    #[test]
    fn unit_lowering_reconstructs_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            // Random SU(2): exp(−i n·σ θ/2) via Euler angles.
            let (a, b, c) = (
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.0..3.0),
                rng.gen_range(-3.0..3.0),
            );
            let unit = TwoLevelUnit {
                level_i: 2,
                level_j: 3,
                block: Rotation::x(0, 1, a)
                    .block()
                    .dot(&Rotation::y(0, 1, b).block())
                    .dot(&Rotation::x(0, 1, c).block()),
            };
            let rots = rotations_for_unit(&unit);
            assert!(rots.len() <= 3, "trial {trial}");
            let mut acc = CMat::eye(2);
            for r in &rots {
                assert_eq!((r.level_i, r.level_j), (2, 3));
                acc = r.block().dot(&acc);
            }
            assert!(
                max_abs_diff(&acc, &unit.block) < 1e-9,
                "trial {trial} deviates"
            );
        }
    }

    #[test]
    fn real_blocks_lower_to_one_rotation() {
        let unit = TwoLevelUnit {
            level_i: 0,
            level_j: 1,
            block: Rotation::y(0, 1, 1.3).block(),
        };
        assert_eq!(rotations_for_unit(&unit).len(), 1);
        // −1 on both levels: a full-turn Y rotation, four π/4 windows.
        let neg = TwoLevelUnit {
            level_i: 0,
            level_j: 1,
            block: Rotation::y(0, 1, 2.0 * PI).block(),
        };
        let rots = rotations_for_unit(&neg);
        assert_eq!(rots.len(), 1);
        assert_eq!(rots[0].windows(), 4);
    }

    #[test]
    fn diagonal_phase_gate_is_one_unit_three_rotations() {
        // The plaquette phase gate at a small step: phases on the two sign
        // levels only, identity elsewhere.
        let group = FiniteGroup::q8();
        let mut u = CMat::eye(8);
        for g in 0..8 {
            u[[g, g]] = magnetic_phase(&group, 1.0, 0.1, g);
        }
        let units = decompose_unitary(&u, Connectivity::Consecutive).unwrap();
        assert_eq!(units.len(), 1);
        let sched = single_qudit_schedule(&u, Connectivity::Consecutive).unwrap();
        assert!(sched.rotation_count() <= 3);
        let rec = reconstruct_schedule(&sched, 8);
        assert!(max_abs_diff_up_to_phase(&rec, &u) < 1e-9);
    }

    #[test]
    fn electric_gate_schedule_respects_the_rotation_bound() {
        let group = FiniteGroup::q8();
        let params = ModelParams::default();
        let u = electric_gate(&group, &params, 0.1).unwrap();
        let sched = single_qudit_schedule(&u, Connectivity::Consecutive).unwrap();
        assert!(
            sched.rotation_count() <= 3 * 8 * 7 / 2,
            "{} rotations",
            sched.rotation_count()
        );
        let rec = reconstruct_schedule(&sched, 8);
        assert!(max_abs_diff_up_to_phase(&rec, &u) < 1e-9);
    }

    #[test]
    fn generic_permutation_schedule_matches_hand_listed_targets() {
        let group = FiniteGroup::q8();
        for g in 0..8 {
            let sched = permutation_schedule(&group, g).unwrap();
            let rec = reconstruct_schedule(&sched, 8);
            assert!(max_abs_diff_up_to_phase(&rec, &q8_right_matrix(g)) < 1e-9);
        }
    }

    #[test]
    fn controlled_schedule_structure() {
        let scheme = AtomLevelScheme::new(8);
        let c = controlled_schedule(&theta_build_schedule(2), &scheme, 2);
        // First block: the seven target rotations.
        assert!(c.entries[..7]
            .iter()
            .all(|e| e.atom == AtomRole::Target && !e.rydberg_swap));
        // Then the control swap.
        assert_eq!(c.entries[7].atom, AtomRole::Control);
        assert!(c.entries[7].rydberg_swap);
        assert_eq!(c.entries[7].rotation.level_i, 2);
        assert_eq!(c.entries[7].rotation.level_j, scheme.r());
        // Last entry: the swap back.
        let last = c.entries.last().unwrap();
        assert_eq!(last.atom, AtomRole::Control);
        assert!((last.rotation.phi + PI).abs() < 1e-12);
        // The inverse block routes every rotation through the interacting
        // level in swap sandwiches.
        let inner = &c.entries[8..c.entries.len() - 1];
        assert_eq!(inner.len(), 21);
        for triple in inner.chunks(3) {
            assert!(triple[0].rydberg_swap && triple[2].rydberg_swap);
            assert_eq!(triple[1].rotation.level_j, scheme.r());
        }
    }

    #[test]
    fn schedule_duration_counts_windows_and_transport() {
        let mut hw = HardwareParams::default();
        hw.move_dead_time = 2.0 * hw.t;
        let scheme = AtomLevelScheme::new(8);
        let single = theta_build_schedule(2);
        assert!((single.duration(&hw) - 16.0 * hw.t).abs() < 1e-18);
        let c = controlled_schedule(&single, &scheme, 2);
        assert!((c.duration(&hw) - (64.0 + 2.0) * hw.t).abs() < 1e-18);
    }
}
