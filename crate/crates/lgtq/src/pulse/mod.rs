//! Pulse-level model of the qudit processor.
//!
//! Group elements live in d ground levels of one atom; three auxiliary
//! levels (p, e, r) support holonomic rotations and an interaction-mediated
//! controlled-unitary protocol. This module turns abstract gates into pulse
//! schedules, integrates the lossy dynamics, and packages the resulting
//! effective matrices into banks the circuit engine can run.

pub mod bank;
pub mod holonomic;
pub mod integrator;
pub mod schedule;
pub mod twoatom;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::linalg::{C64, CMat};
use crate::{Error, Result};

pub use holonomic::{
    fit_rotation, holonomic_hamiltonian, ideal_rotation, simulate_two_level_pulse,
    CalibrationCurve, GaussianPulsePair, RotationFit, TwoLevelPulseReport,
};
pub use integrator::{dp54, evolve_propagator, integrate_lossy_tdse};
pub use schedule::{
    controlled_schedule, decompose_unitary, permutation_schedule, q8_permutation_schedule,
    rotations_for_unit, simulate_single_qudit_schedule, single_qudit_schedule,
    theta_build_schedule, theta_controlled_totals, AtomRole, Connectivity, PulseSchedule,
    Rotation, ScheduleReport, ScheduledRotation, TwoLevelUnit, WindowSpec,
};
pub use twoatom::{controlled_unitary_pulse_sim, ControlledGateResult};

/// Physical drive, loss, and interaction parameters of the pulse model.
///
/// All rates are angular (rad/s); `t` is the length of one pulse window in
/// seconds. The dimensionless combinations ΩT, V/Ω, γ/Ω fix the physics;
/// `omega` sets the wall-clock scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareParams {
    /// Peak Rabi frequency Ω of the Gaussian legs.
    pub omega: f64,
    /// Constant auxiliary coupling as a fraction of Ω.
    pub omega_p_ratio: f64,
    /// Pulse window length T.
    pub t: f64,
    /// Population decay rate of the optically excited level e.
    pub gamma_e: f64,
    /// Population decay rate of the Rydberg level r.
    pub gamma_r: f64,
    /// Diagonal two-atom interaction V on |r r⟩.
    pub v: f64,
    /// Extra dead time per two-atom gate for atom transport, seconds.
    pub move_dead_time: f64,
}

impl Default for HardwareParams {
    fn default() -> Self {
        let omega = 2.0 * std::f64::consts::PI * 1.0e8; // 2π × 100 MHz
        HardwareParams {
            omega,
            omega_p_ratio: 0.5,
            t: 300.0 / omega,
            gamma_e: 1e-6 * omega,
            gamma_r: 1e-6 * omega,
            v: 5.0 * omega,
            move_dead_time: 0.0,
        }
    }
}

impl HardwareParams {
    /// Build from the dimensionless combinations, keeping the default Ω.
    pub fn from_ratios(
        omega_t: f64,
        v_over_omega: f64,
        gamma_e_over_omega: f64,
        gamma_r_over_omega: f64,
        omega_p_ratio: f64,
    ) -> Self {
        let omega = 2.0 * std::f64::consts::PI * 1.0e8;
        HardwareParams {
            omega,
            omega_p_ratio,
            t: omega_t / omega,
            gamma_e: gamma_e_over_omega * omega,
            gamma_r: gamma_r_over_omega * omega,
            v: v_over_omega * omega,
            move_dead_time: 0.0,
        }
    }

    /// Dimensionless pulse area ΩT.
    pub fn omega_t(&self) -> f64 {
        self.omega * self.t
    }

    /// Interaction-to-drive ratio V/Ω.
    pub fn v_ratio(&self) -> f64 {
        self.v / self.omega
    }

    /// Decay-to-drive ratio γ_e/Ω.
    pub fn gamma_e_ratio(&self) -> f64 {
        self.gamma_e / self.omega
    }

    /// Decay-to-drive ratio γ_r/Ω.
    pub fn gamma_r_ratio(&self) -> f64 {
        self.gamma_r / self.omega
    }

    /// Reject negative parameters; warn (via the returned message) when the
    /// pulse area is too small for the adiabatic gate construction.
    pub fn validate(&self) -> Result<Option<String>> {
        let fields = [
            ("omega", self.omega),
            ("omega_p_ratio", self.omega_p_ratio),
            ("t", self.t),
            ("gamma_e", self.gamma_e),
            ("gamma_r", self.gamma_r),
            ("v", self.v),
            ("move_dead_time", self.move_dead_time),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::Config(format!(
                    "hardware parameter {name} must be a non-negative finite number, got {value}"
                )));
            }
        }
        if self.omega_t() < 50.0 {
            return Ok(Some(format!(
                "pulse area ΩT = {:.1} is small; holonomic gates assume ΩT ≫ 1",
                self.omega_t()
            )));
        }
        Ok(None)
    }

    /// Stable content hash used to key gate banks to the parameters that
    /// produced them.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for value in [
            self.omega,
            self.omega_p_ratio,
            self.t,
            self.gamma_e,
            self.gamma_r,
            self.v,
            self.move_dead_time,
        ] {
            hasher.update(value.to_bits().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// Index layout of one atom: d computational ground levels in the group's
/// canonical order, then the auxiliary ground level p, the optically excited
/// level e, and the strongly interacting level r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomLevelScheme {
    pub d: usize,
}

impl AtomLevelScheme {
    pub fn new(d: usize) -> Self {
        AtomLevelScheme { d }
    }

    /// Auxiliary ground level index.
    pub fn p(&self) -> usize {
        self.d
    }

    /// Optically excited level index.
    pub fn e(&self) -> usize {
        self.d + 1
    }

    /// Interacting (Rydberg) level index.
    pub fn r(&self) -> usize {
        self.d + 2
    }

    /// Total levels per atom.
    pub fn n_levels(&self) -> usize {
        self.d + 3
    }
}

/// Cache key for one integrated pulse window: quantized angle and axis, plus
/// which decay/shift profile applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct WindowKey {
    alpha_q: i64,
    delta_q: i64,
    /// The second pair level is the interacting level r.
    pair_with_r: bool,
    /// A blockade partner sits in its own r level (shift applies).
    blocked: bool,
}

fn quantize(x: f64) -> i64 {
    (x * 1e10).round() as i64
}

/// Shared state for pulse-level simulations at fixed hardware parameters:
/// the lazily built calibration curve and a cache of integrated windows.
pub struct PulseContext {
    pub hw: HardwareParams,
    pub scheme: AtomLevelScheme,
    curve: Mutex<Option<Arc<CalibrationCurve>>>,
    windows: Mutex<HashMap<WindowKey, Arc<CMat>>>,
    delays: Mutex<HashMap<i64, f64>>,
}

impl PulseContext {
    pub fn new(hw: HardwareParams, d: usize) -> Self {
        PulseContext {
            hw,
            scheme: AtomLevelScheme::new(d),
            curve: Mutex::new(None),
            windows: Mutex::new(HashMap::new()),
            delays: Mutex::new(HashMap::new()),
        }
    }

    /// Build a context reusing a calibration curve already swept at the same
    /// pulse area and auxiliary coupling. The curve is loss-free by
    /// construction, so it remains valid when only the decay rates differ.
    pub fn with_curve(hw: HardwareParams, d: usize, curve: Arc<CalibrationCurve>) -> Self {
        assert!(
            (curve.omega_t - hw.omega_t()).abs() < 1e-9
                && (curve.omega_p_ratio - hw.omega_p_ratio).abs() < 1e-12,
            "calibration curve was swept at different drive parameters"
        );
        PulseContext {
            hw,
            scheme: AtomLevelScheme::new(d),
            curve: Mutex::new(Some(curve)),
            windows: Mutex::new(HashMap::new()),
            delays: Mutex::new(HashMap::new()),
        }
    }

    /// The calibration curve for these parameters, building it on first use.
    pub fn calibration(&self) -> Result<Arc<CalibrationCurve>> {
        {
            let guard = self.curve.lock().expect("calibration lock");
            if let Some(curve) = guard.as_ref() {
                return Ok(Arc::clone(curve));
            }
        }
        let built = Arc::new(CalibrationCurve::build(
            self.hw.omega_t(),
            self.hw.omega_p_ratio,
        )?);
        let mut guard = self.curve.lock().expect("calibration lock");
        if guard.is_none() {
            *guard = Some(Arc::clone(&built));
        }
        Ok(guard.as_ref().map(Arc::clone).expect("curve present"))
    }

    /// Delay (τ/T) realizing one window's rotation angle, solved once per
    /// distinct angle and memoized.
    pub fn delay_for(&self, alpha: f64) -> Result<f64> {
        let key = quantize(alpha);
        {
            let guard = self.delays.lock().expect("delay memo lock");
            if let Some(&tau) = guard.get(&key) {
                return Ok(tau);
            }
        }
        let tau = self.calibration()?.solve_delay(alpha)?;
        self.delays
            .lock()
            .expect("delay memo lock")
            .insert(key, tau);
        Ok(tau)
    }

    /// Integrated four-level propagator of one window, cached by angle, axis,
    /// and decay/shift profile. `pair_with_r` marks (x, r) pairs; `blocked`
    /// applies the partner-in-r energy shift.
    pub(crate) fn window_propagator(
        &self,
        alpha: f64,
        delta: f64,
        pair_with_r: bool,
        blocked: bool,
    ) -> Result<Arc<CMat>> {
        let blocked = blocked && pair_with_r;
        let key = WindowKey {
            alpha_q: quantize(alpha),
            delta_q: quantize(delta),
            pair_with_r,
            blocked,
        };
        {
            let guard = self.windows.lock().expect("window cache lock");
            if let Some(hit) = guard.get(&key) {
                return Ok(Arc::clone(hit));
            }
        }
        // At very short pulse areas the delay↔angle curve loses its odd
        // symmetry and may cover only one sign of angle. A rotation by −α
        // about the opposite in-plane axis is the same rotation, so fall
        // back to that exact equivalent before giving up.
        let (tau_frac, delta) = match self.delay_for(alpha) {
            Ok(tau) => (tau, delta),
            Err(Error::Calibration(_)) => {
                (self.delay_for(-alpha)?, delta + std::f64::consts::PI)
            }
            Err(e) => return Err(e),
        };
        let hw = &self.hw;
        let w = holonomic::QuadWindow {
            omega_t: hw.omega_t(),
            omega_p_t: hw.omega_p_ratio * hw.omega_t(),
            tau_frac,
            delta,
            gamma_e_t: hw.gamma_e * hw.t,
            gamma_g1_t: if pair_with_r { hw.gamma_r * hw.t } else { 0.0 },
            shift_g1_t: if blocked { hw.v * hw.t } else { 0.0 },
        };
        let u4 = Arc::new(holonomic::quad_propagator(&w)?);
        let mut guard = self.windows.lock().expect("window cache lock");
        let entry = guard.entry(key).or_insert_with(|| Arc::clone(&u4));
        Ok(Arc::clone(entry))
    }

    /// Number of distinct windows integrated so far.
    pub fn cached_windows(&self) -> usize {
        self.windows.lock().expect("window cache lock").len()
    }
}

/// Average gate fidelity of a simulated operator against a target unitary on
/// a subspace: F = (Tr(MM†) + |Tr M|²) / (n(n+1)) with M = U_target† P U_sim P,
/// where P projects the full space onto the n listed levels.
pub fn average_gate_fidelity(u_target: &CMat, u_sim_full: &CMat, subspace: &[usize]) -> f64 {
    let n = subspace.len();
    assert_eq!(u_target.nrows(), n, "target must act on the subspace");
    let mut block = CMat::zeros((n, n));
    for (r, &fr) in subspace.iter().enumerate() {
        for (c, &fc) in subspace.iter().enumerate() {
            block[[r, c]] = u_sim_full[[fr, fc]];
        }
    }
    let m = crate::linalg::dagger(u_target).dot(&block);
    let trace_mmd: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let trace_m: C64 = (0..n).map(|i| m[[i, i]]).sum();
    (trace_mmd + trace_m.norm_sqr()) / (n * (n + 1)) as f64
}

#[cfg(test)]
pub(crate) mod testctx {
    use super::*;
    use once_cell::sync::Lazy;

    /// Lossless context with a strong blockade, shared across pulse tests so
    /// the calibration sweep and window integrations run once.
    pub(crate) static IDEAL: Lazy<PulseContext> =
        Lazy::new(|| PulseContext::new(HardwareParams::from_ratios(300.0, 50.0, 0.0, 0.0, 0.5), 8));

    /// Context at the default lossy parameters.
    pub(crate) static DEFAULT: Lazy<PulseContext> =
        Lazy::new(|| PulseContext::new(HardwareParams::default(), 8));
}
