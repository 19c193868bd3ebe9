//! Run configuration, presets, and the command entry points shared by the
//! `lgtq` binary and the runnable examples.
//!
//! Every command takes a validated [`RunConfig`] plus an output directory,
//! computes, and then writes deterministic artifacts: CSV tables, JSON
//! reports, and a `manifest.json` carrying the fully resolved configuration
//! and the crate version. Validation happens before any computation, so an
//! invalid configuration never leaves partial outputs behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuit::{
    apply_circuit, exact_trajectory, log_log_slope, trotter_infidelity_scan, trotter_trajectory,
    RealizedTrotterGates, ScanPoint, TrajectoryPoint, TrotterOrder,
};
use crate::group::{Element, FiniteGroup, Permutation};
use crate::linalg::CMat;
use crate::model::{
    electric_gate, magnetic_phase, GroupRegisterState, LatticeGeometry, LatticeModel, LinkEnd,
    ModelParams, WordFactor,
};
use crate::pulse::bank::{
    benchmark_theta_entangler, realize_c_theta_bank, realize_single_qudit_gate,
    realize_trotter_gates, single_gate_error_scan, EntanglerBenchmark, GateBankFile, HwScanPoint,
};
use crate::pulse::{
    single_qudit_schedule, theta_controlled_totals, AtomLevelScheme, Connectivity, HardwareParams,
    PulseContext,
};
use crate::qubit::{
    controlled_iy_budget, count_entangling, noisy_qubit_theta_sim, toffoli_cost, LoweringLevel,
    ProgramKind, QubitThetaBenchmark,
};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Lattice selection: a built-in geometry or a JSON description on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryChoice {
    /// Four links around one face; the standard benchmark lattice.
    SinglePlaquette,
    /// Two links between two vertices; small enough for dense cross-checks.
    TwoLinkRing,
    /// Geometry loaded from a JSON file (see [`load_geometry_file`]).
    Custom(PathBuf),
}

impl Default for GeometryChoice {
    fn default() -> Self {
        GeometryChoice::SinglePlaquette
    }
}

/// Where the Trotter-step gate matrices come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateSource {
    /// Exact unitaries; no hardware model involved.
    Ideal,
    /// Every gate realized through the pulse-level simulation at the
    /// configured hardware parameters.
    PulseSimulated,
    /// Gates loaded from a bank file previously produced by a
    /// pulse-simulated run under identical hardware and couplings.
    CachedBank(PathBuf),
}

impl Default for GateSource {
    fn default() -> Self {
        GateSource::Ideal
    }
}

/// Step-size and duration settings for Trotterized evolution and scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrotterConfig {
    pub order: TrotterOrder,
    /// Step size (in units of 1/λ_B) used by `quench`.
    pub dt: f64,
    /// Number of steps run by `quench`.
    pub n_steps: usize,
    /// Record observables every this many steps.
    pub record_every: usize,
    /// Fixed final time targeted by `trotter-scan`.
    pub t_final: f64,
    /// Step counts n (step size t_final/n) visited by `trotter-scan`.
    pub scan_steps: Vec<usize>,
}

impl Default for TrotterConfig {
    fn default() -> Self {
        TrotterConfig {
            order: TrotterOrder::Second,
            dt: 1.0 / 3.0,
            n_steps: 12,
            record_every: 1,
            t_final: 1.0,
            scan_steps: vec![3, 4, 6, 8, 11, 16, 22, 30],
        }
    }
}

/// Grid for the single-atom gate-error surface scanned by `error-scan`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorScanConfig {
    /// Dimensionless pulse areas ΩT.
    pub omega_ts: Vec<f64>,
    /// Decay-to-Rabi ratios γ/Ω, applied to both decay channels.
    pub gamma_ratios: Vec<f64>,
    /// Step size of the scanned magnetic phase gate.
    pub dt: f64,
}

impl Default for ErrorScanConfig {
    fn default() -> Self {
        ErrorScanConfig {
            omega_ts: vec![30.0, 100.0, 300.0, 1000.0, 3000.0],
            gamma_ratios: vec![0.0, 1e-7, 1e-6, 1e-5],
            dt: 0.1,
        }
    }
}

/// Everything one experiment needs, serializable as a single JSON file and
/// overridable per key from the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Experiment name; also the default output subdirectory.
    pub experiment: String,
    pub model: ModelParams,
    pub trotter: TrotterConfig,
    pub hardware: HardwareParams,
    pub geometry: GeometryChoice,
    pub error_scan: ErrorScanConfig,
    /// Output directory; `runs/<experiment>` when unset.
    pub output_dir: Option<PathBuf>,
    pub gate_source: GateSource,
    /// Optional group definition file; the built-in eight-element
    /// quaternion group when unset.
    pub group_file: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: "default".into(),
            model: ModelParams::default(),
            trotter: TrotterConfig::default(),
            hardware: HardwareParams::default(),
            geometry: GeometryChoice::default(),
            error_scan: ErrorScanConfig::default(),
            output_dir: None,
            gate_source: GateSource::default(),
            group_file: None,
        }
    }
}

impl RunConfig {
    /// Built-in presets: `fig2` (pulse-level gate-fidelity comparison),
    /// `fig3` (quench and step-size scan with pulse-simulated gates), and
    /// `sm_fig2` (single-gate error surface over drive area and decay).
    pub fn preset(name: &str) -> Result<RunConfig> {
        let mut config = RunConfig {
            experiment: name.into(),
            ..RunConfig::default()
        };
        match name {
            "fig2" => {
                config.gate_source = GateSource::PulseSimulated;
            }
            "fig3" => {
                config.gate_source = GateSource::PulseSimulated;
                config.trotter = TrotterConfig {
                    order: TrotterOrder::Second,
                    dt: 1.0 / 3.0,
                    n_steps: 12,
                    record_every: 1,
                    t_final: 1.0,
                    scan_steps: vec![1, 2, 3, 4, 6],
                };
            }
            "sm_fig2" => {
                config.error_scan = ErrorScanConfig::default();
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown preset '{other}' (available: fig2, fig3, sm_fig2)"
                )));
            }
        }
        Ok(config)
    }

    pub fn from_json_str(text: &str) -> Result<RunConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    /// Check every field range and the existence of every referenced file.
    /// Commands call this before touching any input or producing any output.
    pub fn validate(&self) -> Result<()> {
        if self.experiment.is_empty() {
            return Err(Error::Config("experiment name must not be empty".into()));
        }
        require_positive("model.lambda_e", self.model.lambda_e)?;
        require_non_negative("model.lambda_b", self.model.lambda_b)?;
        require_positive("model.a_t", self.model.a_t)?;
        require_positive("trotter.dt", self.trotter.dt)?;
        require_positive("trotter.t_final", self.trotter.t_final)?;
        if self.trotter.n_steps == 0 {
            return Err(Error::Config("trotter.n_steps must be at least 1".into()));
        }
        if self.trotter.record_every == 0 {
            return Err(Error::Config("trotter.record_every must be at least 1".into()));
        }
        if self.trotter.scan_steps.is_empty() {
            return Err(Error::Config("trotter.scan_steps must not be empty".into()));
        }
        if self.trotter.scan_steps.contains(&0) {
            return Err(Error::Config("trotter.scan_steps entries must be at least 1".into()));
        }
        self.hardware.validate()?;
        require_positive("error_scan.dt", self.error_scan.dt)?;
        if self.error_scan.omega_ts.is_empty() {
            return Err(Error::Config("error_scan.omega_ts must not be empty".into()));
        }
        for &v in &self.error_scan.omega_ts {
            require_positive("error_scan.omega_ts", v)?;
        }
        if self.error_scan.gamma_ratios.is_empty() {
            return Err(Error::Config("error_scan.gamma_ratios must not be empty".into()));
        }
        for &v in &self.error_scan.gamma_ratios {
            require_non_negative("error_scan.gamma_ratios", v)?;
        }
        if let Some(path) = &self.group_file {
            require_file("group_file", path)?;
        }
        if let GeometryChoice::Custom(path) = &self.geometry {
            require_file("geometry", path)?;
        }
        if let GateSource::CachedBank(path) = &self.gate_source {
            require_file("gate_source.cached_bank", path)?;
        }
        Ok(())
    }

    /// The group this run works with.
    pub fn group(&self) -> Result<FiniteGroup> {
        match &self.group_file {
            Some(path) => FiniteGroup::from_json_file(path),
            None => Ok(FiniteGroup::q8()),
        }
    }

    /// The lattice this run works with.
    pub fn build_geometry(&self) -> Result<LatticeGeometry> {
        match &self.geometry {
            GeometryChoice::SinglePlaquette => Ok(LatticeGeometry::single_plaquette()),
            GeometryChoice::TwoLinkRing => Ok(LatticeGeometry::two_link_ring()),
            GeometryChoice::Custom(path) => load_geometry_file(path),
        }
    }

    pub fn build_model(&self) -> Result<LatticeModel> {
        LatticeModel::new(self.group()?, self.build_geometry()?, self.model)
    }

    /// Output directory precedence: command-line override, then the
    /// configured directory, then `runs/<experiment>`.
    pub fn resolve_out_dir(&self, cli_out: Option<&Path>) -> PathBuf {
        if let Some(path) = cli_out {
            return path.to_path_buf();
        }
        if let Some(path) = &self.output_dir {
            return path.clone();
        }
        PathBuf::from("runs").join(&self.experiment)
    }
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Config(format!(
            "{name} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

fn require_non_negative(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::Config(format!(
            "{name} must be non-negative and finite, got {value}"
        )));
    }
    Ok(())
}

fn require_file(name: &str, path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Config(format!(
            "{name} references '{}', which does not exist",
            path.display()
        )));
    }
    Ok(())
}

/// On-disk lattice description: plaquette words as `[link, inverted]` pairs
/// and, optionally, vertex incidence lists with link ends `"out"` / `"in"`.
#[derive(Debug, Serialize, Deserialize)]
struct GeometryFile {
    n_links: usize,
    plaquettes: Vec<Vec<WordFactor>>,
    #[serde(default)]
    vertices: Vec<Vec<(usize, String)>>,
}

/// Load and validate a lattice geometry from its JSON description.
pub fn load_geometry_file(path: &Path) -> Result<LatticeGeometry> {
    let text = fs::read_to_string(path)?;
    let parsed: GeometryFile = serde_json::from_str(&text)?;
    let mut vertices = Vec::with_capacity(parsed.vertices.len());
    for vertex in &parsed.vertices {
        let mut incidences = Vec::with_capacity(vertex.len());
        for (link, end) in vertex {
            let end = match end.as_str() {
                "out" => LinkEnd::Out,
                "in" => LinkEnd::In,
                other => {
                    return Err(Error::Config(format!(
                        "geometry link end must be \"out\" or \"in\", got \"{other}\""
                    )));
                }
            };
            incidences.push((*link, end));
        }
        vertices.push(incidences);
    }
    LatticeGeometry::new(parsed.n_links, parsed.plaquettes.clone(), vertices)
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut payload = serde_json::to_string_pretty(value)?;
    payload.push('\n');
    write_text(path, &payload)
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    code_version: &'a str,
    config: &'a RunConfig,
}

/// Record the fully resolved configuration next to a command's outputs.
fn write_manifest(out_dir: &Path, command: &str, config: &RunConfig) -> Result<()> {
    write_json(
        &out_dir.join("manifest.json"),
        &Manifest {
            command,
            code_version: env!("CARGO_PKG_VERSION"),
            config,
        },
    )
}

fn scan_csv(points: &[ScanPoint]) -> String {
    let mut csv = String::from("dt,n_steps,infidelity\n");
    for p in points {
        csv.push_str(&format!("{},{},{}\n", p.dt, p.n_steps, p.infidelity));
    }
    csv
}

fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut csv =
        String::from("step,t,electric,magnetic,norm,fidelity,electric_corrected,magnetic_corrected\n");
    for p in points {
        let (ec, mc) = corrected_energies(p);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.step, p.t, p.electric, p.magnetic, p.norm, p.fidelity, ec, mc
        ));
    }
    csv
}

/// Energies of the surviving (renormalized) state.
fn corrected_energies(p: &TrajectoryPoint) -> (f64, f64) {
    if p.norm > 0.0 {
        (p.electric / p.norm, p.magnetic / p.norm)
    } else {
        (0.0, 0.0)
    }
}

fn error_scan_csv(points: &[HwScanPoint]) -> String {
    let mut csv = String::from("omega_t,gamma_ratio,infidelity\n");
    for p in points {
        csv.push_str(&format!("{},{},{}\n", p.omega_t, p.gamma_ratio, p.infidelity));
    }
    csv
}

// ---------------------------------------------------------------------------
// group-check
// ---------------------------------------------------------------------------

/// Summary of a passed exhaustive group audit.
#[derive(Debug, Clone, Serialize)]
pub struct GroupCheckReport {
    pub order: usize,
    pub labels: Vec<String>,
    pub class_sizes: Vec<usize>,
    /// (a, b) pairs whose sequential right multiplications were compared
    /// against the product element's permutation on every state.
    pub composition_pairs_checked: usize,
    /// (a, b) pairs checked for commuting left and right multiplications.
    pub commutation_pairs_checked: usize,
}

/// Re-run every structural audit on a group: the construction-time axioms
/// (closure, associativity, identity, inverses, character consistency) plus
/// exhaustive permutation-level identities of the regular actions. Returns a
/// located error at the first violation.
pub fn exhaustive_group_checks(group: &FiniteGroup) -> Result<GroupCheckReport> {
    let n = group.order();
    let labels: Vec<String> = (0..n).map(|g| group.label(g).to_string()).collect();
    let table: Vec<Vec<Element>> = (0..n)
        .map(|a| (0..n).map(|b| group.mul(a, b)).collect())
        .collect();
    let chars: Vec<f64> = (0..n).map(|g| group.char_fund(g)).collect();
    // Rebuilding from parts re-runs every construction-time validation.
    FiniteGroup::from_parts(labels.clone(), table, chars)?;

    let right: Vec<Permutation> = (0..n).map(|g| group.right_regular(g)).collect();
    let left: Vec<Permutation> = (0..n).map(|g| group.left_regular(g)).collect();

    for a in 0..n {
        for b in 0..n {
            let ab = group.mul(a, b);
            for g in 0..n {
                // Multiplying by a then b must equal multiplying by a·b.
                if right[b].apply(right[a].apply(g)) != right[ab].apply(g) {
                    return Err(Error::InvalidGroup(format!(
                        "sequential right multiplication by ({a}, {b}) differs from \
                         right multiplication by their product at state {g}"
                    )));
                }
                // Left and right multiplications act on opposite sides and
                // must commute.
                if left[a].apply(right[b].apply(g)) != right[b].apply(left[a].apply(g)) {
                    return Err(Error::InvalidGroup(format!(
                        "left multiplication by {a} does not commute with right \
                         multiplication by {b} at state {g}"
                    )));
                }
            }
        }
    }
    for g in 0..n {
        let gi = group.inv(g);
        if group.inv(gi) != g {
            return Err(Error::InvalidGroup(format!(
                "inversion is not an involution at element {g}"
            )));
        }
        if right[gi] != right[g].inverse() {
            return Err(Error::InvalidGroup(format!(
                "right multiplication by the inverse of {g} is not the inverse \
                 permutation"
            )));
        }
    }

    Ok(GroupCheckReport {
        order: n,
        labels,
        class_sizes: group.conjugacy_classes().iter().map(|c| c.len()).collect(),
        composition_pairs_checked: n * n,
        commutation_pairs_checked: n * n,
    })
}

/// Audit the configured group exhaustively and write `group_check.json`.
pub fn cmd_group_check(config: &RunConfig, out_dir: &Path) -> Result<GroupCheckReport> {
    config.validate()?;
    let group = config.group()?;
    let report = exhaustive_group_checks(&group)?;
    ensure_dir(out_dir)?;
    write_json(&out_dir.join("group_check.json"), &report)?;
    write_manifest(out_dir, "group-check", config)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// trotter-scan
// ---------------------------------------------------------------------------

/// Result of a step-size scan at fixed final time.
#[derive(Debug, Clone, Serialize)]
pub struct TrotterScanReport {
    pub order: TrotterOrder,
    pub points: Vec<ScanPoint>,
    /// Log-log slope of infidelity against step size, fitted over points
    /// above the numerical noise floor (ideal gates only).
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    /// Grid point with the smallest infidelity.
    pub min_dt: f64,
    pub min_infidelity: f64,
}

/// Floor below which scan points are treated as numerical noise and
/// excluded from slope fits.
const SLOPE_FIT_FLOOR: f64 = 1e-13;

/// Evolve to the configured final time with each configured step count and
/// measure final-state infidelity against exact evolution. Writes
/// `trotter_scan.csv` and `trotter_scan.json`.
pub fn cmd_trotter_scan(config: &RunConfig, out_dir: &Path) -> Result<TrotterScanReport> {
    config.validate()?;
    let model = config.build_model()?;
    let initial = model.trivial_state();
    let tc = &config.trotter;

    let points = match &config.gate_source {
        GateSource::Ideal => {
            trotter_infidelity_scan(&model, &initial, tc.t_final, &tc.scan_steps, tc.order)?
        }
        GateSource::PulseSimulated => {
            let group = model.group();
            let params = model.params();
            let ctx = PulseContext::new(config.hardware, group.order());
            // The controlled blocks are step-size independent: realize them
            // once and rebuild only the single-atom gates per step size.
            let c_theta = realize_c_theta_bank(&ctx, group)?;
            realized_scan(&model, &initial, tc.t_final, &tc.scan_steps, tc.order, |dt| {
                Ok(RealizedTrotterGates {
                    c_theta: c_theta.clone(),
                    electric: realize_single_qudit_gate(&ctx, &electric_gate(group, params, dt)?)?,
                    electric_half: realize_single_qudit_gate(
                        &ctx,
                        &electric_gate(group, params, 0.5 * dt)?,
                    )?,
                    magnetic_host: realize_single_qudit_gate(
                        &ctx,
                        &magnetic_link_gate(group, params.lambda_b, dt),
                    )?,
                })
            })?
        }
        GateSource::CachedBank(_) => {
            return Err(Error::Config(
                "step-size scans rebuild step-size-dependent gates; \
                 use gate_source \"ideal\" or \"pulse_simulated\""
                    .into(),
            ));
        }
    };

    let (slope, intercept) = if config.gate_source == GateSource::Ideal {
        let fit: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| p.infidelity > SLOPE_FIT_FLOOR)
            .map(|p| (p.dt, p.infidelity))
            .collect();
        if fit.len() >= 2 {
            let (s, i) = log_log_slope(&fit);
            (Some(s), Some(i))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };
    let best = points
        .iter()
        .min_by(|a, b| a.infidelity.partial_cmp(&b.infidelity).expect("finite"))
        .expect("scan_steps validated non-empty");

    let report = TrotterScanReport {
        order: tc.order,
        slope,
        intercept,
        min_dt: best.dt,
        min_infidelity: best.infidelity,
        points,
    };
    ensure_dir(out_dir)?;
    write_text(&out_dir.join("trotter_scan.csv"), &scan_csv(&report.points))?;
    write_json(&out_dir.join("trotter_scan.json"), &report)?;
    write_manifest(out_dir, "trotter-scan", config)?;
    Ok(report)
}

/// The host-link magnetic phase gate as a d×d diagonal matrix.
pub fn magnetic_link_gate(group: &FiniteGroup, lambda_b: f64, dt: f64) -> CMat {
    let d = group.order();
    let mut m = CMat::eye(d);
    for g in 0..d {
        m[[g, g]] = magnetic_phase(group, lambda_b, dt, g);
    }
    m
}

/// Step-size scan with a caller-supplied gate bank per step size.
fn realized_scan(
    model: &LatticeModel,
    initial: &GroupRegisterState,
    t_final: f64,
    steps: &[usize],
    order: TrotterOrder,
    mut gates_at: impl FnMut(f64) -> Result<RealizedTrotterGates>,
) -> Result<Vec<ScanPoint>> {
    let exact = model.exact_evolve(initial, t_final)?;
    let mut points = Vec::with_capacity(steps.len());
    for &n in steps {
        let dt = t_final / n as f64;
        let ops = gates_at(dt)?.step_ops(model, order)?;
        let mut state = initial.clone();
        for _ in 0..n {
            apply_circuit(&mut state, &ops);
        }
        points.push(ScanPoint {
            dt,
            n_steps: n,
            infidelity: (1.0 - exact.fidelity(&state)).max(1e-16),
        });
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// quench
// ---------------------------------------------------------------------------

/// Fit summary of a quench run.
#[derive(Debug, Clone, Serialize)]
pub struct QuenchFit {
    /// Mean fractional norm loss per step.
    pub per_step_loss: f64,
    /// Largest relative deviation of any step's loss from the mean
    /// (zero when the mean loss is itself numerically zero).
    pub loss_relative_spread: f64,
    /// Pearson correlation between the norm-corrected electric and magnetic
    /// energies along the Trotterized trajectory.
    pub e_b_correlation: f64,
    /// Raw overlap with the exactly evolved state at the final time.
    pub final_fidelity: f64,
}

/// Trajectories and fits from a quench run.
#[derive(Debug, Clone, Serialize)]
pub struct QuenchReport {
    pub trotter: Vec<TrajectoryPoint>,
    pub exact: Vec<TrajectoryPoint>,
    pub fit: QuenchFit,
}

/// Evolve the trivial initial state under repeated Trotter steps, recording
/// energies, norm, and overlap with exact evolution. Writes
/// `quench_trotter.csv`, `quench_exact.csv`, and `quench_fit.json`; a
/// pulse-simulated run also saves its gate bank to `bank.json` for reuse.
pub fn cmd_quench(config: &RunConfig, out_dir: &Path) -> Result<QuenchReport> {
    config.validate()?;
    let model = config.build_model()?;
    let initial = model.trivial_state();
    let tc = &config.trotter;

    let gates = acquire_bank(config, &model, tc.dt, Some(out_dir))?;
    let ops = gates.step_ops(&model, tc.order)?;
    let trotter = trotter_trajectory(&model, &initial, &ops, tc.dt, tc.n_steps, tc.record_every)?;
    let exact = exact_trajectory(&model, &initial, tc.dt, tc.n_steps, tc.record_every)?;

    let (per_step_loss, loss_relative_spread) = norm_loss_stats(&trotter);
    let corrected: Vec<(f64, f64)> = trotter.iter().map(corrected_energies).collect();
    let es: Vec<f64> = corrected.iter().map(|p| p.0).collect();
    let bs: Vec<f64> = corrected.iter().map(|p| p.1).collect();
    let fit = QuenchFit {
        per_step_loss,
        loss_relative_spread,
        e_b_correlation: pearson(&es, &bs),
        final_fidelity: trotter.last().expect("at least the initial point").fidelity,
    };

    ensure_dir(out_dir)?;
    write_text(&out_dir.join("quench_trotter.csv"), &trajectory_csv(&trotter))?;
    write_text(&out_dir.join("quench_exact.csv"), &trajectory_csv(&exact))?;
    write_json(&out_dir.join("quench_fit.json"), &fit)?;
    write_manifest(out_dir, "quench", config)?;
    Ok(QuenchReport { trotter, exact, fit })
}

/// Obtain the step gates for the configured source. A pulse-simulated bank
/// is saved to `save_dir/bank.json` so later runs can load it back.
fn acquire_bank(
    config: &RunConfig,
    model: &LatticeModel,
    dt: f64,
    save_dir: Option<&Path>,
) -> Result<RealizedTrotterGates> {
    match &config.gate_source {
        GateSource::Ideal => RealizedTrotterGates::ideal(model, dt),
        GateSource::PulseSimulated => {
            let group = model.group();
            let ctx = PulseContext::new(config.hardware, group.order());
            let gates = realize_trotter_gates(&ctx, group, model.params(), dt)?;
            if let Some(dir) = save_dir {
                ensure_dir(dir)?;
                GateBankFile::from_realized(&config.hardware, model.params(), group.order(), dt, &gates)
                    .save(&dir.join("bank.json"))?;
            }
            Ok(gates)
        }
        GateSource::CachedBank(path) => {
            GateBankFile::load(path)?.to_realized(&config.hardware, model.params(), dt)
        }
    }
}

/// Mean per-step fractional norm loss and its largest relative deviation.
/// Consecutive records `k` steps apart contribute the per-step rate
/// `1 − (norm ratio)^{1/k}`.
fn norm_loss_stats(points: &[TrajectoryPoint]) -> (f64, f64) {
    let mut losses = Vec::new();
    for w in points.windows(2) {
        let steps = (w[1].step - w[0].step) as f64;
        if steps > 0.0 && w[0].norm > 0.0 {
            let ratio = (w[1].norm / w[0].norm).max(0.0);
            losses.push(1.0 - ratio.powf(1.0 / steps));
        }
    }
    if losses.is_empty() {
        return (0.0, 0.0);
    }
    let mean = losses.iter().sum::<f64>() / losses.len() as f64;
    if mean.abs() < 1e-12 {
        return (mean, 0.0);
    }
    let spread = losses
        .iter()
        .map(|l| (l - mean).abs() / mean.abs())
        .fold(0.0, f64::max);
    (mean, spread)
}

/// Pearson correlation coefficient; zero for degenerate series.
fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return 0.0;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx <= 0.0 || vy <= 0.0 {
        return 0.0;
    }
    cov / (vx.sqrt() * vy.sqrt())
}

// ---------------------------------------------------------------------------
// gate-fidelity
// ---------------------------------------------------------------------------

/// Side-by-side fidelity of the full group-multiplication entangler on the
/// qudit register and of the equivalent lowered three-qubit program.
#[derive(Debug, Clone, Serialize)]
pub struct GateFidelityReport {
    pub qudit: EntanglerBenchmark,
    pub qubit: QubitThetaBenchmark,
}

/// Pulse-simulate the group-multiplication entangler on both register
/// layouts at the configured hardware parameters and write
/// `gate_fidelity.json`. The three-qubit baseline is specific to the
/// eight-element group.
pub fn cmd_gate_fidelity(config: &RunConfig, out_dir: &Path) -> Result<GateFidelityReport> {
    config.validate()?;
    let group = config.group()?;
    if group.order() != 8 {
        return Err(Error::Config(
            "the qubit baseline compares against the eight-element group; \
             remove group_file or point it at that group"
                .into(),
        ));
    }
    let ctx = PulseContext::new(config.hardware, group.order());
    let qudit = benchmark_theta_entangler(&ctx, &group)?;
    let qubit = noisy_qubit_theta_sim(&config.hardware)?;
    let report = GateFidelityReport { qudit, qubit };
    ensure_dir(out_dir)?;
    write_json(&out_dir.join("gate_fidelity.json"), &report)?;
    write_manifest(out_dir, "gate-fidelity", config)?;
    Ok(report)
}

// ---------------------------------------------------------------------------
// error-scan
// ---------------------------------------------------------------------------

/// Per-decay-row fit of the gate-error surface.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorScanRowFit {
    pub gamma_ratio: f64,
    /// Log-log slope of infidelity against ΩT over the clearly decreasing
    /// part of the row (points more than 10× above the row minimum); absent
    /// when fewer than two such points exist.
    pub power_law_slope: Option<f64>,
    /// Smallest infidelity in the row.
    pub saturation: f64,
}

/// Gate-error surface of the host-link magnetic phase gate.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorScanReport {
    pub points: Vec<HwScanPoint>,
    pub rows: Vec<ErrorScanRowFit>,
}

/// Sweep the pulse area ΩT and the decay ratio γ/Ω for the single-atom
/// magnetic phase gate, fitting each decay row with a power law and a
/// saturation floor. Writes `error_scan.csv` and `error_scan.json`.
pub fn cmd_error_scan(config: &RunConfig, out_dir: &Path) -> Result<ErrorScanReport> {
    config.validate()?;
    let group = config.group()?;
    let target = magnetic_link_gate(&group, config.model.lambda_b, config.error_scan.dt);
    let points = single_gate_error_scan(
        &target,
        &config.error_scan.omega_ts,
        &config.error_scan.gamma_ratios,
        config.hardware.omega_p_ratio,
    )?;
    let rows = error_scan_row_fits(&points, &config.error_scan.gamma_ratios);
    let report = ErrorScanReport { points, rows };
    ensure_dir(out_dir)?;
    write_text(&out_dir.join("error_scan.csv"), &error_scan_csv(&report.points))?;
    write_json(&out_dir.join("error_scan.json"), &report)?;
    write_manifest(out_dir, "error-scan", config)?;
    Ok(report)
}

fn error_scan_row_fits(points: &[HwScanPoint], gamma_ratios: &[f64]) -> Vec<ErrorScanRowFit> {
    gamma_ratios
        .iter()
        .map(|&gamma_ratio| {
            let mut row: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.gamma_ratio == gamma_ratio)
                .map(|p| (p.omega_t, p.infidelity))
                .collect();
            row.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
            let saturation = row.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let falling: Vec<(f64, f64)> = row
                .iter()
                .copied()
                .filter(|p| p.1 > 10.0 * saturation)
                .collect();
            let power_law_slope = if falling.len() >= 2 {
                Some(log_log_slope(&falling).0)
            } else {
                None
            };
            ErrorScanRowFit {
                gamma_ratio,
                power_law_slope,
                saturation,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// cost-report
// ---------------------------------------------------------------------------

/// Wall-clock budget of one second-order Trotter step on one platform.
#[derive(Debug, Clone, Serialize)]
pub struct PlatformCost {
    /// Pulse windows on the critical path.
    pub windows: usize,
    /// Time spent pulsing: windows × window length.
    pub pulse_time: f64,
    /// Atom-pair arrangements that must be formed sequentially.
    pub pair_sessions: usize,
    /// Time spent rearranging: pair sessions × move dead time.
    pub movement_time: f64,
    pub total: f64,
}

/// Entangling-gate counts of the qubit baseline at both lowering levels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntanglingCounts {
    /// Group-multiplication program, counting n-controlled-U as one gate
    /// after lowering to two-qubit controlled-U gates.
    pub theta_two_qubit_controlled_u: usize,
    /// Group-multiplication program lowered all the way to CNOT plus
    /// controlled-iY.
    pub theta_cnot_plus_controlled_iy: usize,
    /// Full plaquette Trotter step at the two-qubit controlled-U level.
    pub plaquette_two_qubit_controlled_u: usize,
    /// Full plaquette Trotter step at the CNOT plus controlled-iY level.
    pub plaquette_cnot_plus_controlled_iy: usize,
    /// Per-gate costs of 2-, 3-, and 4-controlled single-target gates at
    /// the two-qubit controlled-U level.
    pub toffoli_two_qubit_controlled_u: Vec<usize>,
    /// The same at the CNOT plus controlled-iY level.
    pub toffoli_cnot_plus_controlled_iy: Vec<usize>,
}

/// Duration and gate-count comparison between the two register layouts.
#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    /// Rabi frequency the durations are quoted at.
    pub omega: f64,
    /// Length of one pulse window.
    pub window_time: f64,
    /// Dead time charged per atom-pair arrangement.
    pub move_dead_time: f64,
    pub qudit: PlatformCost,
    pub qubit: PlatformCost,
    /// Qubit total over qudit total.
    pub duration_ratio: f64,
    /// Rotations (one Gaussian pulse pair each) across all controlled
    /// group-multiplication blocks of the entangler.
    pub theta_rotations: usize,
    /// Pulse windows after splitting large rotation angles.
    pub theta_windows: usize,
    /// Closed-form rotation count 2(2d−1)(d−1) at d = 8.
    pub theta_rotations_formula: usize,
    pub entangling_counts: EntanglingCounts,
}

/// Compare the wall-clock duration and gate counts of one second-order
/// Trotter step on the canonical four-link single-plaquette lattice, qudit
/// registers against lowered three-qubit registers. Single-atom gates run
/// in parallel across links; entangling blocks serialize on the shared host
/// register. The qubit side charges only entangling gates (its single-qubit
/// gates are ignored), so its total is a lower bound. Writes
/// `cost_report.json`.
pub fn cmd_cost_report(config: &RunConfig, out_dir: &Path) -> Result<CostReport> {
    config.validate()?;
    let group = config.group()?;
    if group.order() != 8 {
        return Err(Error::Config(
            "the cost comparison is defined for the eight-element group".into(),
        ));
    }
    let params = &config.model;
    let dt = config.trotter.dt;
    let hw = &config.hardware;
    let geometry = LatticeGeometry::single_plaquette();
    let word_len = geometry.plaquettes()[0].len();
    let ladders = 2 * (word_len - 1);

    let electric_half_windows =
        single_qudit_schedule(&electric_gate(&group, params, 0.5 * dt)?, Connectivity::Consecutive)?
            .window_count();
    let magnetic_windows = single_qudit_schedule(
        &magnetic_link_gate(&group, params.lambda_b, dt),
        Connectivity::Consecutive,
    )?
    .window_count();
    let scheme = AtomLevelScheme::new(group.order());
    let (theta_rotations, theta_windows) = theta_controlled_totals(&scheme);

    // Two electric passes (parallel across links, so one gate deep each),
    // the serialized entangler ladders, and the host magnetic gate.
    let qudit_windows = 2 * electric_half_windows + ladders * theta_windows + magnetic_windows;
    let qudit = platform_cost(qudit_windows, ladders, hw);

    let ciy_gates = count_entangling(ProgramKind::PlaquetteTrotterStep, LoweringLevel::CnotPlusControlledIY);
    let (_, ciy_windows) = controlled_iy_budget();
    let qubit = platform_cost(ciy_gates * ciy_windows, ciy_gates, hw);

    let d = group.order();
    let duration_ratio = qubit.total / qudit.total;
    let report = CostReport {
        omega: hw.omega,
        window_time: hw.t,
        move_dead_time: hw.move_dead_time,
        qudit,
        qubit,
        duration_ratio,
        theta_rotations,
        theta_windows,
        theta_rotations_formula: 2 * (2 * d - 1) * (d - 1),
        entangling_counts: EntanglingCounts {
            theta_two_qubit_controlled_u: count_entangling(
                ProgramKind::ThetaGate,
                LoweringLevel::TwoQubitControlledU,
            ),
            theta_cnot_plus_controlled_iy: count_entangling(
                ProgramKind::ThetaGate,
                LoweringLevel::CnotPlusControlledIY,
            ),
            plaquette_two_qubit_controlled_u: count_entangling(
                ProgramKind::PlaquetteTrotterStep,
                LoweringLevel::TwoQubitControlledU,
            ),
            plaquette_cnot_plus_controlled_iy: ciy_gates,
            toffoli_two_qubit_controlled_u: (2..=4)
                .map(|c| toffoli_cost(c, LoweringLevel::TwoQubitControlledU))
                .collect::<Result<_>>()?,
            toffoli_cnot_plus_controlled_iy: (2..=4)
                .map(|c| toffoli_cost(c, LoweringLevel::CnotPlusControlledIY))
                .collect::<Result<_>>()?,
        },
    };
    ensure_dir(out_dir)?;
    write_json(&out_dir.join("cost_report.json"), &report)?;
    write_manifest(out_dir, "cost-report", config)?;
    Ok(report)
}

fn platform_cost(windows: usize, pair_sessions: usize, hw: &HardwareParams) -> PlatformCost {
    let pulse_time = windows as f64 * hw.t;
    let movement_time = pair_sessions as f64 * hw.move_dead_time;
    PlatformCost {
        windows,
        pulse_time,
        pair_sessions,
        movement_time,
        total: pulse_time + movement_time,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "lgtq-runner-{tag}-{}-{}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .expect("clock after epoch")
                .as_nanos()
        ));
        fs::create_dir_all(&dir).expect("create temp dir");
        dir
    }

    #[test]
    fn presets_are_valid_and_roundtrip_through_json() {
        for name in ["fig2", "fig3", "sm_fig2"] {
            let config = RunConfig::preset(name).expect("known preset");
            config.validate().expect("preset validates");
            let json = config.to_json_string();
            let back = RunConfig::from_json_str(&json).expect("roundtrip parses");
            assert_eq!(config, back, "preset {name} drifts through JSON");
        }
        assert!(matches!(RunConfig::preset("nope"), Err(Error::Config(_))));
    }

    #[test]
    fn empty_config_file_uses_defaults() {
        let config = RunConfig::from_json_str("{}").expect("all fields defaulted");
        assert_eq!(config, RunConfig::default());
        config.validate().expect("defaults validate");
    }

    #[test]
    fn validation_rejects_bad_values_and_missing_files() {
        let mut config = RunConfig::default();
        config.trotter.dt = 0.0;
        assert!(matches!(config.validate(), Err(Error::Config(_))));

        let mut config = RunConfig::default();
        config.trotter.scan_steps.clear();
        assert!(matches!(config.validate(), Err(Error::Config(_))));

        let mut config = RunConfig::default();
        config.model.lambda_e = f64::NAN;
        assert!(matches!(config.validate(), Err(Error::Config(_))));

        let mut config = RunConfig::default();
        config.gate_source = GateSource::CachedBank(PathBuf::from("/no/such/bank.json"));
        assert!(matches!(config.validate(), Err(Error::Config(_))));

        let mut config = RunConfig::default();
        config.group_file = Some(PathBuf::from("/no/such/group.json"));
        assert!(matches!(config.validate(), Err(Error::Config(_))));

        // Unknown keys are configuration errors, not silent drops.
        assert!(RunConfig::from_json_str("{\"experimnet\": \"typo\"}").is_err());
    }

    #[test]
    fn group_check_passes_default_and_custom_rejects_corrupt() {
        let dir = temp_dir("group-check");
        let config = RunConfig::default();
        let report = cmd_group_check(&config, &dir).expect("default group passes");
        assert_eq!(report.order, 8);
        assert_eq!(report.class_sizes, vec![1, 1, 2, 2, 2]);
        assert!(dir.join("group_check.json").is_file());
        assert!(dir.join("manifest.json").is_file());

        // A two-element group given by file passes.
        let z2 = dir.join("z2.json");
        fs::write(
            &z2,
            r#"{"labels":["e","x"],"cayley":[[0,1],[1,0]],"char_fund":[1.0,-1.0]}"#,
        )
        .expect("write group file");
        let mut config = RunConfig::default();
        config.group_file = Some(z2);
        let report = cmd_group_check(&config, &dir).expect("two-element group passes");
        assert_eq!(report.order, 2);

        // A corrupted table (repeated entry in a row) is rejected with a
        // located violation, and the failure is not a configuration error.
        let bad = dir.join("bad.json");
        fs::write(
            &bad,
            r#"{"labels":["e","x"],"cayley":[[0,1],[1,1]],"char_fund":[1.0,-1.0]}"#,
        )
        .expect("write group file");
        let mut config = RunConfig::default();
        config.group_file = Some(bad);
        match cmd_group_check(&config, &dir) {
            Err(Error::InvalidGroup(msg)) => {
                assert!(!msg.is_empty(), "violation message should locate the problem")
            }
            other => panic!("expected InvalidGroup, got {other:?}"),
        }
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn ideal_scan_recovers_second_order_slope_and_is_deterministic() {
        let dir = temp_dir("scan");
        let mut config = RunConfig::default();
        config.geometry = GeometryChoice::TwoLinkRing;
        config.trotter.scan_steps = vec![8, 12, 16, 24, 32];
        let report = cmd_trotter_scan(&config, &dir).expect("ideal scan runs");
        let slope = report.slope.expect("ideal scan fits a slope");
        assert!(
            (slope - 4.0).abs() < 0.3,
            "second-order infidelity slope {slope} should be near 4"
        );
        assert!(report.min_dt <= 1.0 / 32.0 + 1e-12);
        let first = fs::read(dir.join("trotter_scan.csv")).expect("csv written");
        let report2 = cmd_trotter_scan(&config, &dir).expect("rerun");
        let second = fs::read(dir.join("trotter_scan.csv")).expect("csv written");
        assert_eq!(first, second, "scan output must be bit-identical across runs");
        assert_eq!(report.points.len(), report2.points.len());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn zero_magnetic_coupling_makes_trotterization_exact() {
        let dir = temp_dir("lambda-b-zero");
        let mut config = RunConfig::default();
        config.geometry = GeometryChoice::TwoLinkRing;
        config.model.lambda_b = 0.0;
        config.trotter.scan_steps = vec![2, 5];
        let report = cmd_trotter_scan(&config, &dir).expect("scan runs");
        for p in &report.points {
            assert!(
                p.infidelity <= 1e-12,
                "with only the electric term the splitting is exact, got {}",
                p.infidelity
            );
        }
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn ideal_quench_conserves_norm_and_anticorrelates_energies() {
        let dir = temp_dir("quench");
        let mut config = RunConfig::default();
        config.geometry = GeometryChoice::TwoLinkRing;
        let report = cmd_quench(&config, &dir).expect("ideal quench runs");
        assert!(report.fit.per_step_loss.abs() < 1e-10, "ideal gates keep norm");
        assert_eq!(report.fit.loss_relative_spread, 0.0);
        assert!(
            report.fit.e_b_correlation < 0.0,
            "electric and magnetic energies should move against each other, got {}",
            report.fit.e_b_correlation
        );
        assert!(report.fit.final_fidelity > 0.9);
        assert_eq!(report.trotter.len(), report.exact.len());
        // The exact trajectory conserves total energy.
        let e0 = report.exact.first().expect("points").electric
            + report.exact.first().expect("points").magnetic;
        for p in &report.exact {
            assert!((p.electric + p.magnetic - e0).abs() < 1e-8);
        }
        assert!(dir.join("quench_trotter.csv").is_file());
        assert!(dir.join("quench_exact.csv").is_file());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn quench_roundtrips_through_cached_bank() {
        let dir = temp_dir("bank-roundtrip");
        let mut config = RunConfig::default();
        config.geometry = GeometryChoice::TwoLinkRing;
        let model = config.build_model().expect("model builds");
        let gates = RealizedTrotterGates::ideal(&model, config.trotter.dt).expect("ideal gates");
        let bank_path = dir.join("bank.json");
        GateBankFile::from_realized(&config.hardware, &config.model, 8, config.trotter.dt, &gates)
            .save(&bank_path)
            .expect("bank saves");

        config.gate_source = GateSource::CachedBank(bank_path.clone());
        let report = cmd_quench(&config, &dir).expect("cached-bank quench runs");
        assert!(report.fit.per_step_loss.abs() < 1e-10);

        // A bank keyed to a different step size is refused.
        config.trotter.dt = 0.5;
        match cmd_quench(&config, &dir) {
            Err(Error::BankMismatch(_)) => {}
            other => panic!("expected BankMismatch, got {other:?}"),
        }
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn custom_geometry_file_loads_and_matches_builtin() {
        let dir = temp_dir("geometry");
        let path = dir.join("ring.json");
        fs::write(
            &path,
            r#"{
  "n_links": 2,
  "plaquettes": [[[0, false], [1, true]]],
  "vertices": [[[0, "out"], [1, "out"]], [[0, "in"], [1, "in"]]]
}"#,
        )
        .expect("write geometry");
        let mut config = RunConfig::default();
        config.geometry = GeometryChoice::Custom(path);
        let geometry = config.build_geometry().expect("geometry loads");
        assert_eq!(geometry, LatticeGeometry::two_link_ring());

        let bad = dir.join("bad.json");
        fs::write(
            &bad,
            r#"{"n_links": 1, "plaquettes": [[[3, false]]], "vertices": []}"#,
        )
        .expect("write geometry");
        config.geometry = GeometryChoice::Custom(bad);
        assert!(config.build_geometry().is_err(), "out-of-range link index");
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn cost_report_pins_counts_and_duration_band() {
        let dir = temp_dir("cost");
        let mut config = RunConfig::default();
        config.hardware.move_dead_time = 50e-6;
        let report = cmd_cost_report(&config, &dir).expect("cost report runs");
        assert_eq!(report.theta_rotations, 210);
        assert_eq!(report.theta_rotations_formula, 210);
        assert_eq!(report.theta_windows, 456);
        let counts = &report.entangling_counts;
        assert_eq!(counts.theta_two_qubit_controlled_u, 349);
        assert_eq!(counts.theta_cnot_plus_controlled_iy, 532);
        assert_eq!(counts.plaquette_two_qubit_controlled_u, 2099);
        assert_eq!(counts.plaquette_cnot_plus_controlled_iy, 3200);
        assert_eq!(counts.toffoli_two_qubit_controlled_u, vec![5, 13, 29]);
        assert_eq!(counts.toffoli_cnot_plus_controlled_iy, vec![8, 20, 44]);
        assert_eq!(report.qubit.pair_sessions, 3200);
        assert_eq!(report.qudit.pair_sessions, 6);
        // At 2π·100 MHz with a 50 µs rearrangement the qudit step sits near
        // a millisecond and the lowered qubit program runs about a hundred
        // times longer.
        assert!(
            report.qudit.total > 0.5e-3 && report.qudit.total < 2.0e-3,
            "qudit step duration {} outside the expected band",
            report.qudit.total
        );
        assert!(
            report.duration_ratio > 50.0 && report.duration_ratio < 200.0,
            "duration ratio {} outside the expected band",
            report.duration_ratio
        );
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn error_scan_reports_rows_and_writes_surface() {
        let dir = temp_dir("error-scan");
        let mut config = RunConfig::default();
        config.error_scan.omega_ts = vec![100.0, 300.0];
        config.error_scan.gamma_ratios = vec![0.0, 1e-5];
        let report = cmd_error_scan(&config, &dir).expect("error scan runs");
        assert_eq!(report.points.len(), 4);
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            assert!(row.saturation > 0.0 && row.saturation < 1.0);
        }
        let csv = fs::read_to_string(dir.join("error_scan.csv")).expect("csv written");
        assert!(csv.starts_with("omega_t,gamma_ratio,infidelity\n"));
        assert_eq!(csv.lines().count(), 5);
        fs::remove_dir_all(&dir).ok();
    }
}
