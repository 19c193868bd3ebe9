//! Lattice gauge model on group-valued link registers.
//!
//! A state assigns one group element to every link of a small lattice.
//! The Hamiltonian is a sum of two pieces:
//!
//! * an electric term per link, `h_E = −log T`, where the transfer matrix
//!   `T[g′, g] = exp(β·χ(g′g⁻¹))` with `β = 2/(λ_E·a_t)` couples group
//!   registers through the faithful-irrep character χ, and
//! * a magnetic term per plaquette, diagonal in the group basis with value
//!   `2·λ_B·χ(g₁g₂g₃⁻¹g₄⁻¹)` on the oriented product of the four links.
//!
//! `T` must be positive definite for the logarithm to exist; construction
//! fails hard if any eigenvalue drops below
//! [`crate::tol::TRANSFER_EIGENVALUE_FLOOR`].
//!
//! The module also provides the state container with fast in-place
//! link-local operator application (the kernels the circuit engine runs on),
//! exact evolution through a cached dense eigendecomposition, energy
//! observables, and vertex gauge transformations for invariance checks.

use ndarray::{Array1, Array2};
use once_cell::sync::OnceCell;

use crate::group::{Element, FiniteGroup, Permutation};
use crate::linalg::{eigh_symmetric, CMat, CVec, C64};
use crate::{Error, Result};

/// Couplings and temporal spacing of the model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelParams {
    /// Electric coupling λ_E.
    pub lambda_e: f64,
    /// Magnetic coupling λ_B.
    pub lambda_b: f64,
    /// Temporal lattice spacing a_t entering the transfer matrix.
    pub a_t: f64,
}

impl Default for ModelParams {
    /// Couplings used by the reference quench: λ_E/λ_B = 2.88 at a_t = 1.
    fn default() -> Self {
        ModelParams {
            lambda_e: 2.88,
            lambda_b: 1.0,
            a_t: 1.0,
        }
    }
}

/// Whether a link points out of or into a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkEnd {
    /// The link leaves the vertex (vertex is its source).
    Out,
    /// The link arrives at the vertex (vertex is its target).
    In,
}

/// One factor of an oriented plaquette word: link index and whether the
/// link enters inverted.
pub type WordFactor = (usize, bool);

/// Links, oriented plaquette words, and vertex incidence of a small lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGeometry {
    n_links: usize,
    /// Each plaquette is the ordered word g₁^±·g₂^±·… read left to right.
    plaquettes: Vec<Vec<WordFactor>>,
    /// For each vertex, the incident links and their direction at it.
    vertices: Vec<Vec<(usize, LinkEnd)>>,
}

impl LatticeGeometry {
    /// Validate link indices and build a geometry.
    pub fn new(
        n_links: usize,
        plaquettes: Vec<Vec<WordFactor>>,
        vertices: Vec<Vec<(usize, LinkEnd)>>,
    ) -> Result<Self> {
        if n_links == 0 {
            return Err(Error::Config("geometry needs at least one link".into()));
        }
        let link_ok = |l: usize| l < n_links;
        if plaquettes
            .iter()
            .flatten()
            .any(|&(l, _)| !link_ok(l))
        {
            return Err(Error::Config("plaquette word references unknown link".into()));
        }
        if vertices.iter().flatten().any(|&(l, _)| !link_ok(l)) {
            return Err(Error::Config("vertex incidence references unknown link".into()));
        }
        Ok(LatticeGeometry {
            n_links,
            plaquettes,
            vertices,
        })
    }

    /// The minimal closed geometry: four links around one square.
    ///
    /// Orientation: links 0 and 1 run along the word direction, links 2 and
    /// 3 against it, so the plaquette word is g₁g₂g₃⁻¹g₄⁻¹. The four
    /// vertices see (link, direction): v0 = (0 out, 3 out),
    /// v1 = (0 in, 1 out), v2 = (1 in, 2 in), v3 = (2 out, 3 in).
    pub fn single_plaquette() -> Self {
        LatticeGeometry::new(
            4,
            vec![vec![(0, false), (1, false), (2, true), (3, true)]],
            vec![
                vec![(0, LinkEnd::Out), (3, LinkEnd::Out)],
                vec![(0, LinkEnd::In), (1, LinkEnd::Out)],
                vec![(1, LinkEnd::In), (2, LinkEnd::In)],
                vec![(2, LinkEnd::Out), (3, LinkEnd::In)],
            ],
        )
        .expect("built-in geometry is valid")
    }

    /// A two-link ring: plaquette word g₁g₂⁻¹, two vertices. Small enough
    /// (dimension d²) for exhaustive dense cross-checks.
    pub fn two_link_ring() -> Self {
        LatticeGeometry::new(
            2,
            vec![vec![(0, false), (1, true)]],
            vec![
                vec![(0, LinkEnd::Out), (1, LinkEnd::Out)],
                vec![(0, LinkEnd::In), (1, LinkEnd::In)],
            ],
        )
        .expect("built-in geometry is valid")
    }

    /// Number of links.
    pub fn n_links(&self) -> usize {
        self.n_links
    }

    /// Oriented plaquette words.
    pub fn plaquettes(&self) -> &[Vec<WordFactor>] {
        &self.plaquettes
    }

    /// Vertex incidence lists.
    pub fn vertices(&self) -> &[Vec<(usize, LinkEnd)>] {
        &self.vertices
    }
}

/// Digits of a flat register index, link 0 slowest.
pub fn decode_config(d: usize, n_links: usize, mut index: usize) -> Vec<Element> {
    let mut config = vec![0; n_links];
    for l in (0..n_links).rev() {
        config[l] = index % d;
        index /= d;
    }
    config
}

/// Flat register index of a configuration, link 0 slowest.
pub fn encode_config(d: usize, config: &[Element]) -> usize {
    config.iter().fold(0, |acc, &g| acc * d + g)
}

/// State vector over group-valued link registers.
///
/// Basis index convention: link 0 is the **slowest** digit, so
/// `index = Σ_ℓ g_ℓ · d^(L−1−ℓ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRegisterState {
    /// Amplitudes, length d^L.
    pub amps: CVec,
    d: usize,
    n_links: usize,
}

impl GroupRegisterState {
    /// Total Hilbert-space dimension d^L, guarded by
    /// [`crate::tol::DIMENSION_CAP`].
    pub fn dimension(d: usize, n_links: usize) -> Result<usize> {
        let mut dim: usize = 1;
        for _ in 0..n_links {
            dim = dim
                .checked_mul(d)
                .filter(|&v| v <= crate::tol::DIMENSION_CAP)
                .ok_or(Error::DimensionCap {
                    dim: usize::MAX,
                    cap: crate::tol::DIMENSION_CAP,
                })?;
        }
        Ok(dim)
    }

    /// All-zero state container (useful as a scratch buffer).
    pub fn zeros(d: usize, n_links: usize) -> Result<Self> {
        let dim = Self::dimension(d, n_links)?;
        Ok(GroupRegisterState {
            amps: CVec::zeros(dim),
            d,
            n_links,
        })
    }

    /// Basis state for one definite link configuration.
    pub fn basis(d: usize, config: &[Element]) -> Result<Self> {
        let mut st = Self::zeros(d, config.len())?;
        let idx = st.index_of(config)?;
        st.amps[idx] = C64::new(1.0, 0.0);
        Ok(st)
    }

    /// Basis state with every link set to the same element.
    pub fn uniform_basis(d: usize, n_links: usize, g: Element) -> Result<Self> {
        Self::basis(d, &vec![g; n_links])
    }

    /// Wrap an amplitude vector (length must be d^L).
    pub fn from_amplitudes(d: usize, n_links: usize, amps: CVec) -> Result<Self> {
        let dim = Self::dimension(d, n_links)?;
        if amps.len() != dim {
            return Err(Error::Config(format!(
                "amplitude vector length {} does not match d^L = {dim}",
                amps.len()
            )));
        }
        Ok(GroupRegisterState { amps, d, n_links })
    }

    /// Per-link register dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of links.
    pub fn n_links(&self) -> usize {
        self.n_links
    }

    /// Total dimension.
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Stride of a link digit in the flat index.
    fn stride(&self, link: usize) -> usize {
        self.d.pow((self.n_links - 1 - link) as u32)
    }

    /// Flat index of a configuration.
    pub fn index_of(&self, config: &[Element]) -> Result<usize> {
        if config.len() != self.n_links || config.iter().any(|&g| g >= self.d) {
            return Err(Error::Config(format!(
                "configuration {config:?} does not fit {} links of dimension {}",
                self.n_links, self.d
            )));
        }
        Ok(config.iter().fold(0, |acc, &g| acc * self.d + g))
    }

    /// Configuration encoded by a flat index.
    pub fn config_of(&self, index: usize) -> Vec<Element> {
        decode_config(self.d, self.n_links, index)
    }

    /// Digit of one link in a flat index.
    pub fn digit(&self, index: usize, link: usize) -> Element {
        (index / self.stride(link)) % self.d
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &GroupRegisterState) -> C64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Squared norm ⟨ψ|ψ⟩ (can drift below 1 under lossy gate banks).
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Raw squared overlap |⟨self|other⟩|², with no renormalization.
    pub fn fidelity(&self, other: &GroupRegisterState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// Apply a d×d operator to one link register, in place.
    pub fn apply_link_op(&mut self, link: usize, op: &CMat) {
        let d = self.d;
        let s = self.stride(link);
        let outer = self.amps.len() / (s * d);
        let mut col = vec![C64::new(0.0, 0.0); d];
        for o in 0..outer {
            for i in 0..s {
                let base = o * s * d + i;
                for (k, c) in col.iter_mut().enumerate() {
                    *c = self.amps[base + k * s];
                }
                for r in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, c) in col.iter().enumerate() {
                        acc += op[[r, k]] * *c;
                    }
                    self.amps[base + r * s] = acc;
                }
            }
        }
    }

    /// ⟨ψ| O_link |ψ⟩ for a real-symmetric single-link operator.
    pub fn expect_link_op(&self, link: usize, op: &Array2<f64>) -> f64 {
        let d = self.d;
        let s = self.stride(link);
        let outer = self.amps.len() / (s * d);
        let mut acc = 0.0;
        for o in 0..outer {
            for i in 0..s {
                let base = o * s * d + i;
                for r in 0..d {
                    for k in 0..d {
                        let term = self.amps[base + r * s].conj()
                            * self.amps[base + k * s]
                            * op[[r, k]];
                        acc += term.re;
                    }
                }
            }
        }
        acc
    }

    /// Apply a d²×d² operator to an ordered pair of link registers, in
    /// place. The operator's row/column index is `g_a·d + g_b`, i.e. link
    /// `a` is the slow digit of the pair (Kronecker order `a ⊗ b`).
    pub fn apply_two_link_op(&mut self, a: usize, b: usize, op: &CMat) {
        assert_ne!(a, b, "two-link operator needs distinct links");
        let d = self.d;
        let d2 = d * d;
        let sa = self.stride(a);
        let sb = self.stride(b);
        let mut fiber = vec![C64::new(0.0, 0.0); d2];
        for idx in 0..self.amps.len() {
            if (idx / sa) % d != 0 || (idx / sb) % d != 0 {
                continue;
            }
            for ga in 0..d {
                for gb in 0..d {
                    fiber[ga * d + gb] = self.amps[idx + ga * sa + gb * sb];
                }
            }
            for ga in 0..d {
                for gb in 0..d {
                    let r = ga * d + gb;
                    let mut acc = C64::new(0.0, 0.0);
                    for (c, f) in fiber.iter().enumerate() {
                        acc += op[[r, c]] * *f;
                    }
                    self.amps[idx + ga * sa + gb * sb] = acc;
                }
            }
        }
    }

    /// Permute one link register conditioned on another register's value:
    /// whenever `control` holds `value`, send target digit t → perm(t).
    pub fn apply_controlled_permutation(
        &mut self,
        control: usize,
        value: Element,
        target: usize,
        perm: &Permutation,
    ) {
        let d = self.d;
        let sc = self.stride(control);
        let st = self.stride(target);
        let mut scratch = vec![C64::new(0.0, 0.0); d];
        // Iterate over all indices whose control digit equals `value` and
        // whose target digit is 0; shuffle the d-entry target fiber.
        for idx in 0..self.amps.len() {
            if (idx / sc) % d != value || (idx / st) % d != 0 {
                continue;
            }
            for (t, s) in scratch.iter_mut().enumerate() {
                *s = self.amps[idx + t * st];
            }
            for (t, s) in scratch.iter().enumerate() {
                self.amps[idx + perm.apply(t) * st] = *s;
            }
        }
    }

    /// Permute a single link register unconditionally.
    pub fn apply_permutation(&mut self, link: usize, perm: &Permutation) {
        let d = self.d;
        let s = self.stride(link);
        let mut scratch = vec![C64::new(0.0, 0.0); d];
        for idx in 0..self.amps.len() {
            if (idx / s) % d != 0 {
                continue;
            }
            for (t, sc) in scratch.iter_mut().enumerate() {
                *sc = self.amps[idx + t * s];
            }
            for (t, sc) in scratch.iter().enumerate() {
                self.amps[idx + perm.apply(t) * s] = *sc;
            }
        }
    }

    /// Multiply amplitudes by a per-value phase of one link register.
    pub fn apply_link_phases(&mut self, link: usize, phases: &[C64]) {
        let d = self.d;
        let s = self.stride(link);
        for (idx, a) in self.amps.iter_mut().enumerate() {
            *a *= phases[(idx / s) % d];
        }
    }

    /// Apply a global permutation of basis configurations.
    pub fn apply_basis_permutation(&mut self, perm: &Permutation) {
        let mut out = CVec::zeros(self.amps.len());
        for (src, &a) in self.amps.iter().enumerate() {
            out[perm.apply(src)] = a;
        }
        self.amps = out;
    }

    /// Multiply each basis amplitude by a configuration-dependent phase.
    pub fn apply_phase_by_index(&mut self, mut f: impl FnMut(usize) -> C64) {
        for (idx, a) in self.amps.iter_mut().enumerate() {
            *a *= f(idx);
        }
    }
}

/// Transfer matrix `T[g′, g] = exp(β·χ(g′g⁻¹))`, β = 2/(λ_E·a_t).
/// Real and symmetric because χ is a class function symmetric under
/// inversion.
pub fn electric_transfer_matrix(group: &FiniteGroup, params: &ModelParams) -> Array2<f64> {
    let n = group.order();
    let beta = 2.0 / (params.lambda_e * params.a_t);
    Array2::from_shape_fn((n, n), |(gp, g)| {
        (beta * group.char_fund(group.mul(gp, group.inv(g)))).exp()
    })
}

/// Eigendecomposition of the transfer matrix with the positivity guard;
/// returns (eigenvalues ascending, orthonormal eigenvectors as columns).
fn transfer_eig(group: &FiniteGroup, params: &ModelParams) -> Result<(Array1<f64>, Array2<f64>)> {
    let t = electric_transfer_matrix(group, params);
    let (w, v) = eigh_symmetric(&t)?;
    if let Some(&min) = w
        .iter()
        .min_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"))
    {
        if min < crate::tol::TRANSFER_EIGENVALUE_FLOOR {
            return Err(Error::TransferNotPositive {
                value: min,
                floor: crate::tol::TRANSFER_EIGENVALUE_FLOOR,
            });
        }
    }
    Ok((w, v))
}

/// Single-link electric Hamiltonian `h_E = −log T` (real symmetric).
pub fn electric_hamiltonian(group: &FiniteGroup, params: &ModelParams) -> Result<Array2<f64>> {
    let (w, v) = transfer_eig(group, params)?;
    let n = group.order();
    let mut h = Array2::zeros((n, n));
    for k in 0..n {
        let lam = -w[k].ln();
        for i in 0..n {
            for j in 0..n {
                h[[i, j]] += lam * v[[i, k]] * v[[j, k]];
            }
        }
    }
    Ok(h)
}

/// Single-link electric propagator `U = exp(−i·h_E·dt)`.
pub fn electric_gate(group: &FiniteGroup, params: &ModelParams, dt: f64) -> Result<CMat> {
    let (w, v) = transfer_eig(group, params)?;
    let n = group.order();
    let mut u = CMat::zeros((n, n));
    for k in 0..n {
        // e^{−i(−ln w)dt} = e^{i·ln(w)·dt}
        let phase = C64::from_polar(1.0, w[k].ln() * dt);
        for i in 0..n {
            for j in 0..n {
                u[[i, j]] += phase * v[[i, k]] * v[[j, k]];
            }
        }
    }
    Ok(u)
}

/// Diagonal magnetic phase `f(g) = exp(−2i·λ_B·χ(g)·δt)` for one
/// plaquette-holonomy value g.
pub fn magnetic_phase(group: &FiniteGroup, lambda_b: f64, dt: f64, g: Element) -> C64 {
    C64::from_polar(1.0, -2.0 * lambda_b * group.char_fund(g) * dt)
}

/// A concrete model instance: group + geometry + couplings, with the
/// single-link electric term precomputed and the full-space
/// eigendecomposition cached after first use.
pub struct LatticeModel {
    group: FiniteGroup,
    geom: LatticeGeometry,
    params: ModelParams,
    h_link: Array2<f64>,
    full_eig: OnceCell<(Array1<f64>, Array2<f64>)>,
}

impl LatticeModel {
    /// Build a model; fails if the transfer matrix is not positive definite
    /// or the total dimension exceeds the cap.
    pub fn new(group: FiniteGroup, geom: LatticeGeometry, params: ModelParams) -> Result<Self> {
        GroupRegisterState::dimension(group.order(), geom.n_links())?;
        let h_link = electric_hamiltonian(&group, &params)?;
        Ok(LatticeModel {
            group,
            geom,
            params,
            h_link,
            full_eig: OnceCell::new(),
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geom
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// The precomputed single-link electric Hamiltonian.
    pub fn h_link(&self) -> &Array2<f64> {
        &self.h_link
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        GroupRegisterState::dimension(self.group.order(), self.geom.n_links())
            .expect("checked at construction")
    }

    /// Fresh state with every link holding the group identity.
    pub fn trivial_state(&self) -> GroupRegisterState {
        GroupRegisterState::uniform_basis(self.group.order(), self.geom.n_links(), 0)
            .expect("checked at construction")
    }

    /// Group element of one plaquette word in a basis configuration.
    pub fn plaquette_element(&self, config: &[Element], plaquette: &[WordFactor]) -> Element {
        let mut acc = self.group.identity();
        for &(link, inverted) in plaquette {
            let g = if inverted {
                self.group.inv(config[link])
            } else {
                config[link]
            };
            acc = self.group.mul(acc, g);
        }
        acc
    }

    /// Diagonal magnetic energy of one basis index: Σ_□ 2·λ_B·χ(word).
    pub fn magnetic_diagonal(&self, index: usize) -> f64 {
        let config = decode_config(self.group.order(), self.geom.n_links(), index);
        self.geom
            .plaquettes()
            .iter()
            .map(|p| 2.0 * self.params.lambda_b * self.group.char_fund(self.plaquette_element(&config, p)))
            .sum()
    }

    /// Dense real-symmetric Hamiltonian over the full register space.
    pub fn hamiltonian(&self) -> Array2<f64> {
        let dim = self.dim();
        let d = self.group.order();
        let nl = self.geom.n_links();
        let probe = GroupRegisterState::zeros(d, nl).expect("checked at construction");
        let mut h = Array2::zeros((dim, dim));
        // Electric part: h_link acting on each link digit.
        for link in 0..nl {
            let s = probe.stride(link);
            for idx in 0..dim {
                let g = (idx / s) % d;
                let base = idx - g * s;
                for gp in 0..d {
                    h[[base + gp * s, idx]] += self.h_link[[gp, g]];
                }
            }
        }
        // Magnetic part: diagonal.
        for idx in 0..dim {
            h[[idx, idx]] += self.magnetic_diagonal(idx);
        }
        h
    }

    /// H|ψ⟩ without materializing the dense Hamiltonian.
    pub fn apply_hamiltonian(&self, state: &GroupRegisterState) -> GroupRegisterState {
        let mut acc = GroupRegisterState::zeros(self.group.order(), self.geom.n_links())
            .expect("checked at construction");
        let h_link_c = self.h_link.mapv(|x| C64::new(x, 0.0));
        for link in 0..self.geom.n_links() {
            let mut part = state.clone();
            part.apply_link_op(link, &h_link_c);
            acc.amps = acc.amps + &part.amps;
        }
        for (idx, a) in state.amps.iter().enumerate() {
            acc.amps[idx] += C64::new(self.magnetic_diagonal(idx), 0.0) * a;
        }
        acc
    }

    /// Eigendecomposition of the dense Hamiltonian, computed once.
    pub fn eig(&self) -> Result<&(Array1<f64>, Array2<f64>)> {
        self.full_eig
            .get_or_try_init(|| eigh_symmetric(&self.hamiltonian()))
    }

    /// Exact evolution ψ(t) = e^{−iHt}ψ through the cached
    /// eigendecomposition. Runs as four real matrix-vector products so the
    /// eigenvector matrix stays real.
    pub fn exact_evolve(&self, state: &GroupRegisterState, t: f64) -> Result<GroupRegisterState> {
        let (w, v) = self.eig()?;
        let re = state.amps.mapv(|z| z.re);
        let im = state.amps.mapv(|z| z.im);
        // Eigenbasis coefficients c = Vᵀψ, then phase rotation by e^{−iωt}.
        let cre = v.t().dot(&re);
        let cim = v.t().dot(&im);
        let mut rot_re = Array1::zeros(cre.len());
        let mut rot_im = Array1::zeros(cre.len());
        for k in 0..cre.len() {
            let (s, c) = (-w[k] * t).sin_cos();
            rot_re[k] = cre[k] * c - cim[k] * s;
            rot_im[k] = cre[k] * s + cim[k] * c;
        }
        let out_re = v.dot(&rot_re);
        let out_im = v.dot(&rot_im);
        let amps = CVec::from_shape_fn(out_re.len(), |i| C64::new(out_re[i], out_im[i]));
        GroupRegisterState::from_amplitudes(self.group.order(), self.geom.n_links(), amps)
    }

    /// Σ_ℓ ⟨h_E(ℓ)⟩.
    pub fn electric_energy(&self, state: &GroupRegisterState) -> f64 {
        (0..self.geom.n_links())
            .map(|l| state.expect_link_op(l, &self.h_link))
            .sum()
    }

    /// ⟨H_B⟩ = Σ over basis weight × diagonal magnetic value.
    pub fn magnetic_energy(&self, state: &GroupRegisterState) -> f64 {
        state
            .amps
            .iter()
            .enumerate()
            .map(|(idx, a)| a.norm_sqr() * self.magnetic_diagonal(idx))
            .sum()
    }

    /// ⟨H⟩.
    pub fn total_energy(&self, state: &GroupRegisterState) -> f64 {
        self.electric_energy(state) + self.magnetic_energy(state)
    }

    /// Basis permutation implementing a gauge transformation by h at one
    /// vertex: out-links are left-multiplied by h, in-links right-multiplied
    /// by h⁻¹. Commutes with the Hamiltonian when χ is a class function.
    pub fn gauge_transformation(&self, vertex: usize, h: Element) -> Permutation {
        let d = self.group.order();
        let nl = self.geom.n_links();
        let per_link: Vec<Option<Permutation>> = (0..nl)
            .map(|l| {
                self.geom.vertices()[vertex]
                    .iter()
                    .find(|&&(link, _)| link == l)
                    .map(|&(_, end)| match end {
                        LinkEnd::Out => self.group.left_regular(h),
                        LinkEnd::In => self.group.right_regular(self.group.inv(h)),
                    })
            })
            .collect();
        let images = (0..self.dim())
            .map(|idx| {
                let mut config = decode_config(d, nl, idx);
                for (l, p) in per_link.iter().enumerate() {
                    if let Some(p) = p {
                        config[l] = p.apply(config[l]);
                    }
                }
                encode_config(d, &config)
            })
            .collect();
        Permutation { images }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm, kron, max_abs_diff, unitarity_error, ONE};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn q8_model(geom: LatticeGeometry) -> LatticeModel {
        LatticeModel::new(FiniteGroup::q8(), geom, ModelParams::default()).unwrap()
    }

    fn random_state(d: usize, n_links: usize, seed: u64) -> GroupRegisterState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = GroupRegisterState::dimension(d, n_links).unwrap();
        let mut amps = CVec::zeros(dim);
        for a in amps.iter_mut() {
            *a = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.mapv_inplace(|a| a / norm);
        GroupRegisterState::from_amplitudes(d, n_links, amps).unwrap()
    }

    #[test]
    fn transfer_matrix_frozen_values_and_symmetry() {
        let g = FiniteGroup::q8();
        let params = ModelParams::default();
        let t = electric_transfer_matrix(&g, &params);
        let beta: f64 = 2.0 / 2.88;
        // Diagonal: χ(identity) = 2. Paired-element entries: χ(−1) = −2.
        assert!((t[[0, 0]] - (2.0 * beta).exp()).abs() < crate::tol::EXACT);
        assert!((t[[1, 0]] - (-2.0 * beta).exp()).abs() < crate::tol::EXACT);
        // Everything else: χ = 0.
        assert!((t[[2, 0]] - 1.0).abs() < crate::tol::EXACT);
        for i in 0..8 {
            for j in 0..8 {
                assert!((t[[i, j]] - t[[j, i]]).abs() < crate::tol::EXACT);
            }
        }
    }

    /// Independent spectral oracle: for a kernel K[g′,g] = f(g′g⁻¹) built
    /// from a class function f, the eigenvalues are Σ_g f(g)·χ_ρ(g)/d_ρ with
    /// multiplicity d_ρ², over the irreps ρ. For Q8 and f = exp(β·χ):
    /// trivial irrep → e^{2β}+e^{−2β}+6, the three sign irreps →
    /// e^{2β}+e^{−2β}−2 each, the 2-dim irrep → e^{2β}−e^{−2β} (×4).
    #[test]
    fn transfer_matrix_spectrum_matches_character_sums() {
        let g = FiniteGroup::q8();
        let params = ModelParams::default();
        let t = electric_transfer_matrix(&g, &params);
        let (mut w, _) = eigh_symmetric(&t).unwrap();
        let beta: f64 = 2.0 / 2.88;
        let c = (2.0 * beta).exp() + (-2.0 * beta).exp();
        let mut expected = vec![
            c + 6.0,
            c - 2.0,
            c - 2.0,
            c - 2.0,
            (2.0 * beta).exp() - (-2.0 * beta).exp(),
        ];
        expected.extend([expected[4]; 3]);
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut wv: Vec<f64> = w.iter().copied().collect();
        wv.sort_by(|a, b| a.partial_cmp(b).unwrap());
        w = Array1::from_vec(wv);
        for (a, b) in w.iter().zip(expected.iter()) {
            assert!((a - b).abs() < crate::tol::LINALG, "{a} vs {b}");
        }
    }

    #[test]
    fn electric_hamiltonian_exponentiates_back_to_transfer_matrix() {
        let g = FiniteGroup::q8();
        let params = ModelParams::default();
        let t = electric_transfer_matrix(&g, &params);
        let h = electric_hamiltonian(&g, &params).unwrap();
        // Second route: Taylor-series matrix exponential of −h.
        let exp_minus_h = expm(&h.mapv(|x| C64::new(-x, 0.0)));
        let t_c = t.mapv(|x| C64::new(x, 0.0));
        assert!(max_abs_diff(&exp_minus_h, &t_c) < crate::tol::LINALG);
    }

    #[test]
    fn electric_gate_is_unitary_and_matches_series_exponential() {
        let g = FiniteGroup::q8();
        let params = ModelParams::default();
        let dt = 0.37;
        let u = electric_gate(&g, &params, dt).unwrap();
        assert!(unitarity_error(&u) < crate::tol::LINALG);
        let h = electric_hamiltonian(&g, &params).unwrap();
        let u2 = expm(&h.mapv(|x| C64::new(0.0, -x * dt)));
        assert!(max_abs_diff(&u, &u2) < crate::tol::LINALG);
    }

    #[test]
    fn degenerate_transfer_matrix_is_rejected() {
        // Z2 with the trivial character: T is the all-equal matrix, rank 1,
        // so −log T does not exist and construction must fail loudly.
        let z2 = FiniteGroup::from_parts(
            vec!["1".into(), "-1".into()],
            vec![vec![0, 1], vec![1, 0]],
            vec![1.0, 1.0],
        )
        .unwrap();
        let err = electric_hamiltonian(&z2, &ModelParams::default()).unwrap_err();
        match err {
            Error::TransferNotPositive { value, floor } => {
                assert!(value < floor);
            }
            other => panic!("expected TransferNotPositive, got {other:?}"),
        }
    }

    #[test]
    fn state_indexing_round_trips() {
        let st = GroupRegisterState::zeros(8, 4).unwrap();
        assert_eq!(st.dim(), 4096);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let config: Vec<usize> = (0..4).map(|_| rng.gen_range(0..8)).collect();
            let idx = st.index_of(&config).unwrap();
            assert_eq!(st.config_of(idx), config);
            for l in 0..4 {
                assert_eq!(st.digit(idx, l), config[l]);
            }
        }
        // Link 0 is the slowest digit.
        assert_eq!(st.index_of(&[1, 0, 0, 0]).unwrap(), 512);
        assert_eq!(st.index_of(&[0, 0, 0, 1]).unwrap(), 1);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        assert!(GroupRegisterState::zeros(8, 5).is_ok()); // 32768
        let err = GroupRegisterState::zeros(8, 6).unwrap_err(); // 262144
        match err {
            Error::DimensionCap { cap, .. } => assert_eq!(cap, crate::tol::DIMENSION_CAP),
            other => panic!("expected DimensionCap, got {other:?}"),
        }
    }

    #[test]
    fn link_kernels_match_dense_kronecker_products() {
        let d = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let op = CMat::from_shape_fn((d, d), |_| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let eye = CMat::eye(d);
        let st0 = random_state(d, 2, 3);

        // Link 0 (slow digit) is the left Kronecker factor.
        let mut via_kernel = st0.clone();
        via_kernel.apply_link_op(0, &op);
        let dense = kron(&op, &eye);
        let expected = dense.dot(&st0.amps);
        let diff: f64 = via_kernel
            .amps
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < crate::tol::EXACT);

        let mut via_kernel = st0.clone();
        via_kernel.apply_link_op(1, &op);
        let dense = kron(&eye, &op);
        let expected = dense.dot(&st0.amps);
        let diff: f64 = via_kernel
            .amps
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < crate::tol::EXACT);
    }

    #[test]
    fn two_link_kernel_matches_dense_kronecker_product() {
        let d = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let op = CMat::from_shape_fn((d * d, d * d), |_| {
            C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        // Three links; act on the pair (2, 0): link 2 is the pair's slow
        // digit even though it is the register's fastest.
        let st0 = random_state(d, 3, 37);
        let mut via_kernel = st0.clone();
        via_kernel.apply_two_link_op(2, 0, &op);

        // Dense route: permute register order (0,1,2) → (2,0,1), apply
        // op ⊗ 1, permute back.
        let probe = GroupRegisterState::zeros(d, 3).unwrap();
        let reorder = Permutation {
            images: (0..st0.dim())
                .map(|idx| {
                    let c = probe.config_of(idx);
                    encode_config(d, &[c[2], c[0], c[1]])
                })
                .collect(),
        };
        let mut dense_route = st0.clone();
        dense_route.apply_basis_permutation(&reorder);
        let big = kron(&op, &CMat::eye(d));
        dense_route.amps = big.dot(&dense_route.amps);
        dense_route.apply_basis_permutation(&reorder.inverse());

        let diff: f64 = via_kernel
            .amps
            .iter()
            .zip(dense_route.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < crate::tol::EXACT, "diff = {diff:e}");
    }

    #[test]
    fn controlled_permutation_matches_dense_construction() {
        let g = FiniteGroup::q8();
        let d = 8;
        let value = 4;
        let perm = g.right_regular(value);
        let st0 = random_state(d, 2, 5);

        // Control = link 1, target = link 0.
        let mut via_kernel = st0.clone();
        via_kernel.apply_controlled_permutation(1, value, 0, &perm);

        // Dense: Σ_c (P if c == value else 1) ⊗ |c⟩⟨c|  (target is slow).
        let mut dense = CMat::zeros((64, 64));
        for c in 0..d {
            let mut proj = CMat::zeros((d, d));
            proj[[c, c]] = ONE;
            let block = if c == value { perm.matrix() } else { CMat::eye(d) };
            let term = kron(&block, &proj);
            dense = dense + term;
        }
        let expected = dense.dot(&st0.amps);
        let diff: f64 = via_kernel
            .amps
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < crate::tol::EXACT);
    }

    #[test]
    fn expectation_kernel_matches_dense_quadratic_form() {
        let g = FiniteGroup::q8();
        let params = ModelParams::default();
        let h = electric_hamiltonian(&g, &params).unwrap();
        let st = random_state(8, 2, 9);
        let via_kernel = st.expect_link_op(0, &h);
        let dense = kron(&h.mapv(|x| C64::new(x, 0.0)), &CMat::eye(8));
        let hpsi = dense.dot(&st.amps);
        let direct: C64 = st.amps.iter().zip(hpsi.iter()).map(|(a, b)| a.conj() * b).sum();
        assert!(direct.im.abs() < crate::tol::LINALG);
        assert!((via_kernel - direct.re).abs() < crate::tol::LINALG);
    }

    #[test]
    fn hamiltonian_matvec_matches_dense_matrix() {
        let model = q8_model(LatticeGeometry::two_link_ring());
        let h = model.hamiltonian();
        let st = random_state(8, 2, 13);
        let via_kernels = model.apply_hamiltonian(&st);
        let hc = h.mapv(|x| C64::new(x, 0.0));
        let expected = hc.dot(&st.amps);
        let diff: f64 = via_kernels
            .amps
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < crate::tol::LINALG);
    }

    /// Exact evolution cross-checked against an independent integrator:
    /// classical RK4 on iψ̇ = Hψ with a conservative step.
    #[test]
    fn exact_evolution_matches_rk4_oracle() {
        let model = q8_model(LatticeGeometry::two_link_ring());
        let st0 = random_state(8, 2, 17);
        let t = 0.8;
        let exact = model.exact_evolve(&st0, t).unwrap();
        assert!((exact.norm_sq() - 1.0).abs() < crate::tol::LINALG);

        let n_steps = 4000;
        let dt = t / n_steps as f64;
        let mut psi = st0;
        let deriv = |s: &GroupRegisterState| {
            let mut hs = model.apply_hamiltonian(s);
            hs.amps.mapv_inplace(|z| C64::new(0.0, -1.0) * z);
            hs
        };
        for _ in 0..n_steps {
            let k1 = deriv(&psi);
            let mut s2 = psi.clone();
            s2.amps = s2.amps + k1.amps.mapv(|z| z * C64::new(dt / 2.0, 0.0));
            let k2 = deriv(&s2);
            let mut s3 = psi.clone();
            s3.amps = s3.amps + k2.amps.mapv(|z| z * C64::new(dt / 2.0, 0.0));
            let k3 = deriv(&s3);
            let mut s4 = psi.clone();
            s4.amps = s4.amps + k3.amps.mapv(|z| z * C64::new(dt, 0.0));
            let k4 = deriv(&s4);
            psi.amps = psi.amps
                + (k1.amps
                    + k2.amps.mapv(|z| z * C64::new(2.0, 0.0))
                    + k3.amps.mapv(|z| z * C64::new(2.0, 0.0))
                    + k4.amps)
                    .mapv(|z| z * C64::new(dt / 6.0, 0.0));
        }
        let diff: f64 = exact
            .amps
            .iter()
            .zip(psi.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < crate::tol::EVOLVE_VS_ORACLE, "diff = {diff:e}");
    }

    #[test]
    fn energies_are_conserved_under_exact_evolution() {
        let model = q8_model(LatticeGeometry::two_link_ring());
        let st0 = random_state(8, 2, 19);
        let e0 = model.total_energy(&st0);
        let st1 = model.exact_evolve(&st0, 1.3).unwrap();
        let e1 = model.total_energy(&st1);
        assert!((e0 - e1).abs() < crate::tol::LINALG);
    }

    #[test]
    fn gauge_transformations_commute_with_hamiltonian() {
        let model = q8_model(LatticeGeometry::single_plaquette());
        let st = random_state(8, 4, 23);
        for vertex in 0..4 {
            for h in 0..8 {
                let p = model.gauge_transformation(vertex, h);
                // Hψ then permute …
                let mut route_a = model.apply_hamiltonian(&st);
                route_a.apply_basis_permutation(&p);
                // … versus permute then H.
                let mut route_b = st.clone();
                route_b.apply_basis_permutation(&p);
                let route_b = model.apply_hamiltonian(&route_b);
                let diff: f64 = route_a
                    .amps
                    .iter()
                    .zip(route_b.amps.iter())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(
                    diff < crate::tol::GAUGE_COMMUTATOR,
                    "vertex {vertex}, h {h}: commutator {diff:e}"
                );
            }
        }
    }

    #[test]
    fn gauge_transformations_form_a_group_action() {
        let model = q8_model(LatticeGeometry::two_link_ring());
        let g = model.group().clone();
        for vertex in 0..2 {
            for h1 in 0..8 {
                for h2 in 0..8 {
                    let p1 = model.gauge_transformation(vertex, h1);
                    let p2 = model.gauge_transformation(vertex, h2);
                    let p12 = model.gauge_transformation(vertex, g.mul(h1, h2));
                    assert_eq!(p1.compose(&p2), p12);
                }
            }
        }
    }

    #[test]
    fn observables_are_gauge_invariant() {
        let model = q8_model(LatticeGeometry::single_plaquette());
        let st = random_state(8, 4, 29);
        let e = model.electric_energy(&st);
        let b = model.magnetic_energy(&st);
        for vertex in 0..4 {
            let p = model.gauge_transformation(vertex, 5);
            let mut st2 = st.clone();
            st2.apply_basis_permutation(&p);
            assert!((model.electric_energy(&st2) - e).abs() < crate::tol::LINALG);
            assert!((model.magnetic_energy(&st2) - b).abs() < crate::tol::LINALG);
        }
    }

    #[test]
    fn magnetic_diagonal_examples() {
        let model = q8_model(LatticeGeometry::single_plaquette());
        let st = model.trivial_state();
        // All-identity configuration: word = identity, χ = 2.
        let idx = st.index_of(&[0, 0, 0, 0]).unwrap();
        assert!((model.magnetic_diagonal(idx) - 4.0).abs() < crate::tol::EXACT);
        // g₁ = −1 flips the word to −1, χ = −2.
        let idx = st.index_of(&[1, 0, 0, 0]).unwrap();
        assert!((model.magnetic_diagonal(idx) + 4.0).abs() < crate::tol::EXACT);
        // Word cancelling to identity: g₁ = I, g₄ = I with others trivial is
        // I·1·1·I⁻¹ = 1.
        let idx = st.index_of(&[2, 0, 0, 2]).unwrap();
        assert!((model.magnetic_diagonal(idx) - 4.0).abs() < crate::tol::EXACT);
        // Non-commuting pair: g₁ = I, g₂ = J, word = IJ = K, χ = 0.
        let idx = st.index_of(&[2, 4, 0, 0]).unwrap();
        assert!(model.magnetic_diagonal(idx).abs() < crate::tol::EXACT);
    }

    #[test]
    fn magnetic_phase_matches_hamiltonian_diagonal() {
        let g = FiniteGroup::q8();
        let lambda_b = 0.7;
        let dt = 0.21;
        for e in 0..8 {
            let phase = magnetic_phase(&g, lambda_b, dt, e);
            let energy = 2.0 * lambda_b * g.char_fund(e);
            let expected = C64::from_polar(1.0, -energy * dt);
            assert!((phase - expected).norm() < crate::tol::EXACT);
            assert!((phase.norm() - 1.0).abs() < crate::tol::EXACT);
        }
    }
}
