//! Trotterized circuit engine.
//!
//! Time evolution is compiled into link-local gates:
//!
//! * the electric propagator `U^E(dt)` on every link,
//! * for each plaquette, a conjugation sandwich that accumulates the
//!   oriented plaquette word onto a host link with group-multiplication
//!   gates Θ, applies the diagonal magnetic phase there, and uncomputes.
//!
//! The multiplication gate `Θ_{t|c}` sends |g_t⟩|g_c⟩ → |g_t·g_c⟩|g_c⟩ and
//! factors into controlled permutations, one per control value. Circuits
//! are lists of [`GateOp`]; the same runner executes ideal gates and
//! "realized" d²×d² matrices substituted from a pulse-level gate bank
//! (possibly subnormalized when decay is modelled).
//!
//! Gate sequences are stored in time order: index 0 acts first.

use std::collections::HashMap;

use serde::Serialize;

use crate::group::{Element, FiniteGroup, Permutation};
use crate::linalg::{kron, CMat, C64};
use crate::model::{
    electric_gate, magnetic_phase, GroupRegisterState, LatticeModel, WordFactor,
};
use crate::{Error, Result};

/// Trotter product formula variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub enum TrotterOrder {
    /// Electric then magnetic, one full step each: global error O(dt).
    First,
    /// Half electric, magnetic, half electric: global error O(dt²).
    Second,
}

/// One gate acting on the link registers.
#[derive(Debug, Clone)]
pub enum GateOp {
    /// Arbitrary d×d matrix on one link.
    LinkMatrix { link: usize, matrix: CMat },
    /// Diagonal phases on one link, indexed by group element.
    LinkPhases { link: usize, phases: Vec<C64> },
    /// Permute `target` by `perm` when `control` holds `value`.
    ControlledPermutation {
        control: usize,
        value: Element,
        target: usize,
        perm: Permutation,
    },
    /// Arbitrary d²×d² matrix on an ordered pair of links (`slow` is the
    /// pair's slow digit).
    TwoLinkMatrix {
        slow: usize,
        fast: usize,
        matrix: CMat,
    },
}

/// Apply one gate in place.
pub fn apply_gate(state: &mut GroupRegisterState, op: &GateOp) {
    match op {
        GateOp::LinkMatrix { link, matrix } => state.apply_link_op(*link, matrix),
        GateOp::LinkPhases { link, phases } => state.apply_link_phases(*link, phases),
        GateOp::ControlledPermutation {
            control,
            value,
            target,
            perm,
        } => state.apply_controlled_permutation(*control, *value, *target, perm),
        GateOp::TwoLinkMatrix { slow, fast, matrix } => {
            state.apply_two_link_op(*slow, *fast, matrix)
        }
    }
}

/// Apply a gate list in time order.
pub fn apply_circuit(state: &mut GroupRegisterState, ops: &[GateOp]) {
    for op in ops {
        apply_gate(state, op);
    }
}

/// Count of elementary circuit operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpCounts {
    /// Gates touching a single link.
    pub single_link: usize,
    /// Controlled/two-link gates.
    pub two_link: usize,
}

/// Tally single- versus two-link gates.
pub fn count_ops(ops: &[GateOp]) -> OpCounts {
    let mut c = OpCounts {
        single_link: 0,
        two_link: 0,
    };
    for op in ops {
        match op {
            GateOp::LinkMatrix { .. } | GateOp::LinkPhases { .. } => c.single_link += 1,
            GateOp::ControlledPermutation { .. } | GateOp::TwoLinkMatrix { .. } => c.two_link += 1,
        }
    }
    c
}

/// The group-multiplication gate Θ_{target|control} (or its inverse):
/// one controlled right-multiplication per non-identity control value.
/// With `dagger`, each block right-multiplies by the inverse element,
/// giving |g_t⟩|g_c⟩ → |g_t·g_c⁻¹⟩|g_c⟩.
pub fn theta_ops(
    group: &FiniteGroup,
    target: usize,
    control: usize,
    dagger: bool,
) -> Vec<GateOp> {
    (1..group.order())
        .map(|h| {
            let p = if dagger { group.inv(h) } else { h };
            GateOp::ControlledPermutation {
                control,
                value: h,
                target,
                perm: group.right_regular(p),
            }
        })
        .collect()
}

/// Magnetic phase gate on the host link: diag over group elements of
/// exp(−2i·λ_B·χ(g)·dt).
pub fn magnetic_host_gate(group: &FiniteGroup, lambda_b: f64, dt: f64, link: usize) -> GateOp {
    GateOp::LinkPhases {
        link,
        phases: (0..group.order())
            .map(|g| magnetic_phase(group, lambda_b, dt, g))
            .collect(),
    }
}

/// Circuit applying the diagonal plaquette phase exp(−2i·λ_B·χ(word)·dt).
///
/// The first word factor is the host link (must enter uninverted). The
/// remaining factors are multiplied onto the host with Θ gates (inverted
/// factors use Θ†), the diagonal phase acts on the host, and the Θ ladder
/// is uncomputed in reverse.
pub fn plaquette_circuit(
    group: &FiniteGroup,
    lambda_b: f64,
    dt: f64,
    word: &[WordFactor],
) -> Result<Vec<GateOp>> {
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
    let mut ops = Vec::new();
    for &(l, inverted) in &word[1..] {
        ops.extend(theta_ops(group, host, l, inverted));
    }
    ops.push(magnetic_host_gate(group, lambda_b, dt, host));
    for &(l, inverted) in word[1..].iter().rev() {
        ops.extend(theta_ops(group, host, l, !inverted));
    }
    Ok(ops)
}

/// One ideal Trotter step for the model, in time order.
pub fn trotter_step(model: &LatticeModel, dt: f64, order: TrotterOrder) -> Result<Vec<GateOp>> {
    let group = model.group();
    let params = model.params();
    let electric_full = |ops: &mut Vec<GateOp>, step_dt: f64| -> Result<()> {
        let u = electric_gate(group, params, step_dt)?;
        for link in 0..model.geometry().n_links() {
            ops.push(GateOp::LinkMatrix {
                link,
                matrix: u.clone(),
            });
        }
        Ok(())
    };
    let magnetic_all = |ops: &mut Vec<GateOp>| -> Result<()> {
        for word in model.geometry().plaquettes() {
            ops.extend(plaquette_circuit(group, params.lambda_b, dt, word)?);
        }
        Ok(())
    };
    let mut ops = Vec::new();
    match order {
        TrotterOrder::First => {
            electric_full(&mut ops, dt)?;
            magnetic_all(&mut ops)?;
        }
        TrotterOrder::Second => {
            electric_full(&mut ops, dt / 2.0)?;
            magnetic_all(&mut ops)?;
            electric_full(&mut ops, dt / 2.0)?;
        }
    }
    Ok(ops)
}

/// Concrete matrices substituted for every gate kind in a Trotter step.
///
/// `c_theta` is keyed by (control value, right-multiplication element); the
/// entry is the full d²×d² two-link matrix in target-slow order. An ideal
/// bank reproduces the abstract circuit exactly; a pulse-level bank carries
/// the hardware's coherent error and decay.
pub struct RealizedTrotterGates {
    pub c_theta: HashMap<(Element, Element), CMat>,
    /// Realized U^E(dt), d×d.
    pub electric: CMat,
    /// Realized U^E(dt/2) for the symmetric splitting.
    pub electric_half: CMat,
    /// Realized host-link magnetic phase gate, d×d.
    pub magnetic_host: CMat,
}

/// The (control value, right-multiplication element) pairs a geometry's
/// plaquette circuits require, forward and uncompute sections included.
pub fn required_c_theta_pairs(group: &FiniteGroup) -> Vec<(Element, Element)> {
    let mut pairs = Vec::new();
    for h in 1..group.order() {
        pairs.push((h, h));
        if group.inv(h) != h {
            pairs.push((h, group.inv(h)));
        }
    }
    pairs
}

/// Exact d²×d² matrix of one controlled right-multiplication block
/// (target ⊗ control order).
pub fn c_theta_matrix(group: &FiniteGroup, value: Element, rmul: Element) -> CMat {
    let d = group.order();
    let perm = group.right_regular(rmul).matrix();
    let eye = CMat::eye(d);
    let mut acc = CMat::zeros((d * d, d * d));
    for c in 0..d {
        let mut proj = CMat::zeros((d, d));
        proj[[c, c]] = C64::new(1.0, 0.0);
        let block = if c == value { &perm } else { &eye };
        acc = acc + kron(block, &proj);
    }
    acc
}

impl RealizedTrotterGates {
    /// Bank of exact matrices; running it must agree with the abstract
    /// circuit to rounding error.
    pub fn ideal(model: &LatticeModel, dt: f64) -> Result<Self> {
        let group = model.group();
        let params = model.params();
        let mut c_theta = HashMap::new();
        for (value, rmul) in required_c_theta_pairs(group) {
            c_theta.insert((value, rmul), c_theta_matrix(group, value, rmul));
        }
        let d = group.order();
        let mut magnetic_host = CMat::zeros((d, d));
        for g in 0..d {
            magnetic_host[[g, g]] = magnetic_phase(group, params.lambda_b, dt, g);
        }
        Ok(RealizedTrotterGates {
            c_theta,
            electric: electric_gate(group, params, dt)?,
            electric_half: electric_gate(group, params, dt / 2.0)?,
            magnetic_host,
        })
    }

    fn theta_ops(
        &self,
        group: &FiniteGroup,
        target: usize,
        control: usize,
        dagger: bool,
    ) -> Result<Vec<GateOp>> {
        (1..group.order())
            .map(|h| {
                let p = if dagger { group.inv(h) } else { h };
                let matrix = self
                    .c_theta
                    .get(&(h, p))
                    .ok_or_else(|| {
                        Error::BankMismatch(format!(
                            "gate bank is missing the controlled gate (value {h}, element {p})"
                        ))
                    })?
                    .clone();
                Ok(GateOp::TwoLinkMatrix {
                    slow: target,
                    fast: control,
                    matrix,
                })
            })
            .collect()
    }

    /// One Trotter step with every gate replaced by its realized matrix.
    pub fn step_ops(&self, model: &LatticeModel, order: TrotterOrder) -> Result<Vec<GateOp>> {
        let group = model.group();
        let nl = model.geometry().n_links();
        let electric_all = |ops: &mut Vec<GateOp>, u: &CMat| {
            for link in 0..nl {
                ops.push(GateOp::LinkMatrix {
                    link,
                    matrix: u.clone(),
                });
            }
        };
        let magnetic_all = |ops: &mut Vec<GateOp>| -> Result<()> {
            for word in model.geometry().plaquettes() {
                let (host, host_inverted) = *word
                    .first()
                    .ok_or_else(|| Error::Config("empty plaquette word".into()))?;
                if host_inverted {
                    return Err(Error::Config(
                        "plaquette word must start with an uninverted host link".into(),
                    ));
                }
                for &(l, inverted) in &word[1..] {
                    ops.extend(self.theta_ops(group, host, l, inverted)?);
                }
                ops.push(GateOp::LinkMatrix {
                    link: host,
                    matrix: self.magnetic_host.clone(),
                });
                for &(l, inverted) in word[1..].iter().rev() {
                    ops.extend(self.theta_ops(group, host, l, !inverted)?);
                }
            }
            Ok(())
        };
        let mut ops = Vec::new();
        match order {
            TrotterOrder::First => {
                electric_all(&mut ops, &self.electric);
                magnetic_all(&mut ops)?;
            }
            TrotterOrder::Second => {
                electric_all(&mut ops, &self.electric_half);
                magnetic_all(&mut ops)?;
                electric_all(&mut ops, &self.electric_half);
            }
        }
        Ok(ops)
    }
}

/// One recorded point of a Trotterized run.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub t: f64,
    /// Σ_ℓ ⟨h_E(ℓ)⟩.
    pub electric: f64,
    /// ⟨H_B⟩.
    pub magnetic: f64,
    /// ⟨ψ|ψ⟩ (drops below 1 when the gate bank carries decay).
    pub norm: f64,
    /// Raw |⟨ψ_exact(t)|ψ⟩|², no renormalization.
    pub fidelity: f64,
}

/// Run `n_steps` repetitions of a step circuit, recording observables,
/// norm, and overlap with the exactly evolved state every `record_every`
/// steps (plus the initial and final points).
pub fn trotter_trajectory(
    model: &LatticeModel,
    initial: &GroupRegisterState,
    step_ops: &[GateOp],
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<Vec<TrajectoryPoint>> {
    let every = record_every.max(1);
    let mut state = initial.clone();
    let mut points = Vec::new();
    let record =
        |step: usize, state: &GroupRegisterState, points: &mut Vec<TrajectoryPoint>| -> Result<()> {
            let t = step as f64 * dt;
            let exact = model.exact_evolve(initial, t)?;
            points.push(TrajectoryPoint {
                step,
                t,
                electric: model.electric_energy(state),
                magnetic: model.magnetic_energy(state),
                norm: state.norm_sq(),
                fidelity: exact.fidelity(state),
            });
            Ok(())
        };
    record(0, &state, &mut points)?;
    for step in 1..=n_steps {
        apply_circuit(&mut state, step_ops);
        if step % every == 0 || step == n_steps {
            record(step, &state, &mut points)?;
        }
    }
    Ok(points)
}

/// Exact-evolution reference trajectory sampled on the same grid.
pub fn exact_trajectory(
    model: &LatticeModel,
    initial: &GroupRegisterState,
    dt: f64,
    n_steps: usize,
    record_every: usize,
) -> Result<Vec<TrajectoryPoint>> {
    let every = record_every.max(1);
    let mut points = Vec::new();
    for step in (0..=n_steps).filter(|s| s % every == 0 || *s == 0 || *s == n_steps) {
        let t = step as f64 * dt;
        let state = model.exact_evolve(initial, t)?;
        points.push(TrajectoryPoint {
            step,
            t,
            electric: model.electric_energy(&state),
            magnetic: model.magnetic_energy(&state),
            norm: state.norm_sq(),
            fidelity: 1.0,
        });
    }
    Ok(points)
}

/// One point of a step-size convergence scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanPoint {
    pub dt: f64,
    pub n_steps: usize,
    /// 1 − |⟨ψ_exact(T)|ψ_trotter(T)⟩|², floored at machine noise.
    pub infidelity: f64,
}

/// Evolve to fixed final time with varying step counts and measure the
/// final-state infidelity against exact evolution.
pub fn trotter_infidelity_scan(
    model: &LatticeModel,
    initial: &GroupRegisterState,
    t_final: f64,
    steps: &[usize],
    order: TrotterOrder,
) -> Result<Vec<ScanPoint>> {
    let exact = model.exact_evolve(initial, t_final)?;
    steps
        .iter()
        .map(|&n| {
            let dt = t_final / n as f64;
            let ops = trotter_step(model, dt, order)?;
            let mut state = initial.clone();
            for _ in 0..n {
                apply_circuit(&mut state, &ops);
            }
            let infidelity = (1.0 - exact.fidelity(&state)).max(1e-16);
            Ok(ScanPoint {
                dt,
                n_steps: n,
                infidelity,
            })
        })
        .collect()
}

/// Least-squares slope and intercept of ln(y) against ln(x).
pub fn log_log_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}
