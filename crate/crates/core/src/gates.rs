//! Operators acting on an [`MpsState`].
//!
//! * one-qubit gates touch a single site tensor;
//! * adjacent two-qubit gates merge two sites and split them again through the
//!   local reduced density matrix;
//! * general two-qubit operators and C^k-NOT gates build an enlarged network
//!   (operator-augmented chain, or the three-term sum `Ψ − PΨ + X_t PΨ`) and
//!   refactorize it with [`compress`];
//! * projectors clamp one site and recompress the whole chain.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::compress::{compress, SumOfMps};
use crate::error::{SimError, SimResult};
use crate::linalg::{c, eigh_descending, is_unitary, CMatrix};
use crate::mps::{MpsState, SiteTensor};

/// Below this norm a projected state is considered to have vanished.
pub const ZERO_WEIGHT_TOL: f64 = 1e-14;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateLabel {
    H,
    X,
    Custom,
}

/// A 2×2 operator `O(k | i)` on one site.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleQubitGate {
    matrix: Matrix2<C64>,
    label: GateLabel,
    unitary: bool,
}

impl SingleQubitGate {
    /// Any 2×2 matrix, row-major `[[a, b], [c, d]]`.
    pub fn new(matrix: [[C64; 2]; 2]) -> Self {
        let m = Matrix2::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1]);
        let dyn_m = CMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
        Self { matrix: m, label: GateLabel::Custom, unitary: is_unitary(&dyn_m, UNITARY_TOL) }
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            matrix: Matrix2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)),
            label: GateLabel::H,
            unitary: true,
        }
    }

    pub fn pauli_x() -> Self {
        Self {
            matrix: Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            label: GateLabel::X,
            unitary: true,
        }
    }

    /// `|b⟩⟨b|`; not unitary.
    pub fn projector(outcome: u8) -> Self {
        let (p0, p1) = if outcome == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
        Self::new([[c(p0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(p1, 0.0)]])
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn label(&self) -> GateLabel {
        self.label
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }
}

/// A 4×4 operator `O(k_j, k_l | i_j, i_l)` on sites `j < l`, row and column
/// index `2·first + second`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitGate {
    matrix: CMatrix,
    sites: (usize, usize),
}

impl TwoQubitGate {
    /// `matrix` acts on `(first, second)` in that order; the pair is
    /// normalized so that the stored sites are increasing.
    pub fn new(first: usize, second: usize, matrix: CMatrix) -> SimResult<Self> {
        if matrix.shape() != (4, 4) {
            return Err(SimError::MalformedGate(format!(
                "two-qubit matrix must be 4x4, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SimError::MalformedGate("non-finite matrix entry".into()));
        }
        if first == second {
            return Err(SimError::DuplicateSite(first));
        }
        if first < second {
            return Ok(Self { matrix, sites: (first, second) });
        }
        let swap = |k: usize| ((k & 1) << 1) | (k >> 1);
        let swapped = CMatrix::from_fn(4, 4, |r, col| matrix[(swap(r), swap(col))]);
        Ok(Self { matrix: swapped, sites: (second, first) })
    }

    pub fn cnot(control: usize, target: usize) -> SimResult<Self> {
        let mut m = CMatrix::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            m[(r, col)] = c(1.0, 0.0);
        }
        Self::new(control, target, m)
    }

    pub fn cz(a: usize, b: usize) -> SimResult<Self> {
        let mut m = CMatrix::identity(4, 4);
        m[(3, 3)] = c(-1.0, 0.0);
        Self::new(a, b, m)
    }

    pub fn identity(a: usize, b: usize) -> SimResult<Self> {
        Self::new(a, b, CMatrix::identity(4, 4))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn sites(&self) -> (usize, usize) {
        self.sites
    }

    pub fn is_adjacent(&self) -> bool {
        self.sites.1 == self.sites.0 + 1
    }

    pub fn is_unitary(&self) -> bool {
        is_unitary(&self.matrix, UNITARY_TOL)
    }

    /// Operator Schmidt decomposition `O = Σ_s A_s ⊗ B_s` with the negligible
    /// terms dropped.
    fn operator_schmidt(&self) -> Vec<(Matrix2<C64>, Matrix2<C64>)> {
        // W[(k_j, i_j), (k_l, i_l)] = O[(k_j, k_l), (i_j, i_l)]
        let w = CMatrix::from_fn(4, 4, |a, b| {
            let (kj, ij) = (a >> 1, a & 1);
            let (kl, il) = (b >> 1, b & 1);
            self.matrix[(2 * kj + kl, 2 * ij + il)]
        });
        let svd = w.svd(true, true);
        let u = svd.u.expect("left vectors requested");
        let v_t = svd.v_t.expect("right vectors requested");
        let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let mut terms = Vec::new();
        for s in 0..4 {
            let sigma = svd.singular_values[s];
            if sigma <= 1e-14 * largest {
                continue;
            }
            let a = Matrix2::from_fn(|k, i| u[(2 * k + i, s)] * sigma);
            let b = Matrix2::from_fn(|k, i| v_t[(s, 2 * k + i)]);
            terms.push((a, b));
        }
        if terms.is_empty() {
            terms.push((Matrix2::zeros(), Matrix2::zeros()));
        }
        terms
    }
}

/// Generalized Toffoli: flips `target` iff every control is `|1⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CkNotGate {
    controls: Vec<usize>,
    target: usize,
}

impl CkNotGate {
    pub fn new(controls: impl IntoIterator<Item = usize>, target: usize) -> SimResult<Self> {
        let mut seen = BTreeSet::new();
        for q in controls {
            if !seen.insert(q) {
                return Err(SimError::DuplicateSite(q));
            }
        }
        if seen.is_empty() {
            return Err(SimError::NoControls);
        }
        if seen.contains(&target) {
            return Err(SimError::OverlappingControlTarget(target));
        }
        Ok(Self { controls: seen.into_iter().collect(), target })
    }

    /// Controls in increasing order.
    pub fn controls(&self) -> &[usize] {
        &self.controls
    }

    pub fn target(&self) -> usize {
        self.target
    }
}

/// `P_b = |b⟩⟨b|` on one site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SiteProjector {
    pub site: usize,
    pub outcome: u8,
    pub renormalize: bool,
}

impl SiteProjector {
    pub fn new(site: usize, outcome: u8, renormalize: bool) -> SimResult<Self> {
        if outcome > 1 {
            return Err(SimError::InvalidBit(char::from(b'0' + outcome.min(9))));
        }
        Ok(Self { site, outcome, renormalize })
    }
}

/// Every operator the engine understands.
#[derive(Clone, Debug, PartialEq)]
pub enum GateOp {
    Single { site: usize, gate: SingleQubitGate },
    Two(TwoQubitGate),
    CkNot(CkNotGate),
    Projector(SiteProjector),
}

impl GateOp {
    pub fn h(site: usize) -> Self {
        GateOp::Single { site, gate: SingleQubitGate::hadamard() }
    }

    pub fn x(site: usize) -> Self {
        GateOp::Single { site, gate: SingleQubitGate::pauli_x() }
    }

    /// Sites the operator touches, in ascending order.
    pub fn sites(&self) -> Vec<usize> {
        match self {
            GateOp::Single { site, .. } => vec![*site],
            GateOp::Two(g) => vec![g.sites.0, g.sites.1],
            GateOp::CkNot(g) => {
                let mut v = g.controls.clone();
                v.push(g.target);
                v.sort_unstable();
                v
            }
            GateOp::Projector(p) => vec![p.site],
        }
    }

    /// Whether the operator preserves the norm.
    pub fn is_unitary(&self) -> bool {
        match self {
            GateOp::Single { gate, .. } => gate.is_unitary(),
            GateOp::Two(g) => g.is_unitary(),
            GateOp::CkNot(_) => true,
            GateOp::Projector(_) => false,
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateOp::Single { site, gate } => match gate.label {
                GateLabel::H => write!(f, "h {site}"),
                GateLabel::X => write!(f, "x {site}"),
                GateLabel::Custom => write!(f, "u {site}"),
            },
            GateOp::Two(g) => write!(f, "g2 {} {}", g.sites.0, g.sites.1),
            GateOp::CkNot(g) => {
                write!(f, "cknot")?;
                for q in &g.controls {
                    write!(f, " {q}")?;
                }
                write!(f, " -> {}", g.target)
            }
            GateOp::Projector(p) => write!(f, "proj {} {}", p.site, p.outcome),
        }
    }
}

fn apply_local(site: &SiteTensor, m: &Matrix2<C64>) -> [CMatrix; 2] {
    let [u0, u1] = site.slices();
    [u0 * m[(0, 0)] + u1 * m[(0, 1)], u0 * m[(1, 0)] + u1 * m[(1, 1)]]
}

impl MpsState {
    /// `V_j(k) = Σ_i O(k, i) U_j(i)`; every other site is untouched.
    pub fn apply_single(&mut self, gate: &SingleQubitGate, site: usize) -> SimResult<()> {
        self.check_site(site)?;
        let [v0, v1] = apply_local(self.site(site)?, &gate.matrix);
        let t = self.site_mut(site);
        *t.slice_mut(0) = v0;
        *t.slice_mut(1) = v1;
        Ok(())
    }

    /// Nearest-neighbour gate: contract sites `j, j+1` with the operator and
    /// split through the eigenvectors of the local two-site density matrix.
    pub fn apply_two_adjacent(&mut self, gate: &TwoQubitGate) -> SimResult<()> {
        let (j, l) = gate.sites;
        if !gate.is_adjacent() {
            return Err(SimError::NotAdjacent(j, l));
        }
        self.check_site(l)?;
        let left = self.site(j)?.clone();
        let right = self.site(l)?.clone();
        let (xl, xr) = (left.left_dim(), right.right_dim());
        // theta[(k_j, xl), (k_l, xr)]
        let mut theta = CMatrix::zeros(2 * xl, 2 * xr);
        for ij in 0..2 {
            for il in 0..2 {
                let pair = left.slice(ij) * right.slice(il);
                for kj in 0..2 {
                    for kl in 0..2 {
                        let g = gate.matrix[(2 * kj + kl, 2 * ij + il)];
                        if g == C64::new(0.0, 0.0) {
                            continue;
                        }
                        theta
                            .view_mut((kj * xl, kl * xr), (xl, xr))
                            .zip_apply(&pair, |t, p| *t += g * p);
                    }
                }
            }
        }
        let rho = &theta * theta.adjoint();
        let (values, vectors) = eigh_descending(rho);
        let spectrum = crate::compress::select_spectrum(j, values, &self.policy())?;
        let iso = vectors.columns(0, spectrum.kept_rank).into_owned();
        let rest = iso.adjoint() * &theta;
        let new_left = SiteTensor::new(j, iso.rows(0, xl).into_owned(), iso.rows(xl, xl).into_owned())?;
        let new_right = SiteTensor::new(l, rest.columns(0, xr).into_owned(), rest.columns(xr, xr).into_owned())?;
        self.replace_pair(j, new_left, new_right);
        Ok(())
    }

    /// Any two-qubit operator: the operator's Schmidt terms are threaded along
    /// the bonds between `j` and `l` and the enlarged chain is recompressed.
    pub fn apply_two_general(&mut self, gate: &TwoQubitGate) -> SimResult<()> {
        let (j, l) = gate.sites;
        self.check_site(j)?;
        self.check_site(l)?;
        let terms = gate.operator_schmidt();
        let rank = terms.len();
        let eye = CMatrix::identity(rank, rank);
        let mut sites = Vec::with_capacity(self.len());
        for (k, t) in self.sites().iter().enumerate() {
            let site = k + 1;
            let new = if site == j {
                let (xl, xr) = (t.left_dim(), t.right_dim());
                let mut out = [CMatrix::zeros(xl, xr * rank), CMatrix::zeros(xl, xr * rank)];
                for (s, (a, _)) in terms.iter().enumerate() {
                    let local = apply_local(t, a);
                    for kk in 0..2 {
                        for col in 0..xr {
                            out[kk].column_mut(col * rank + s).copy_from(&local[kk].column(col));
                        }
                    }
                }
                let [o0, o1] = out;
                SiteTensor::new(site, o0, o1)?
            } else if site > j && site < l {
                SiteTensor::new(site, t.slice(0).kronecker(&eye), t.slice(1).kronecker(&eye))?
            } else if site == l {
                let (xl, xr) = (t.left_dim(), t.right_dim());
                let mut out = [CMatrix::zeros(xl * rank, xr), CMatrix::zeros(xl * rank, xr)];
                for (s, (_, b)) in terms.iter().enumerate() {
                    let local = apply_local(t, b);
                    for kk in 0..2 {
                        for row in 0..xl {
                            out[kk].row_mut(row * rank + s).copy_from(&local[kk].row(row));
                        }
                    }
                }
                let [o0, o1] = out;
                SiteTensor::new(site, o0, o1)?
            } else {
                t.clone()
            };
            sites.push(new);
        }
        let augmented = MpsState::from_sites(sites, self.policy())?;
        let (state, _) = compress(&SumOfMps::single(augmented), self.policy())?;
        *self = state;
        Ok(())
    }

    /// Adjacent pairs take the local fast path; everything else the full sweep.
    pub fn apply_two(&mut self, gate: &TwoQubitGate) -> SimResult<()> {
        if gate.is_adjacent() {
            self.apply_two_adjacent(gate)
        } else {
            self.apply_two_general(gate)
        }
    }

    /// `Ψ − PΨ + X_t PΨ`, with `P` clamping every control to `|1⟩`, then
    /// recompressed.
    pub fn apply_cknot(&mut self, gate: &CkNotGate) -> SimResult<()> {
        self.check_site(gate.target)?;
        for &q in &gate.controls {
            self.check_site(q)?;
        }
        let mut clamped = self.clone();
        for &q in &gate.controls {
            clamped.site_mut(q).clamp_to(1);
        }
        let mut flipped = clamped.clone();
        flipped.site_mut(gate.target).swap_physical();
        let one = C64::new(1.0, 0.0);
        let sum = SumOfMps::new(vec![(one, self.clone()), (-one, clamped), (one, flipped)])?;
        let (state, _) = compress(&sum, self.policy())?;
        *self = state;
        Ok(())
    }

    /// Applies `P_b` at one site and recompresses; returns `⟨Ψ|P_b|Ψ⟩`.
    pub fn apply_projector(&mut self, proj: &SiteProjector) -> SimResult<f64> {
        self.check_site(proj.site)?;
        let mut projected = self.clone();
        projected.site_mut(proj.site).clamp_to(proj.outcome as usize);
        let weight = projected.norm_sqr();
        if weight.is_nan() || weight < ZERO_WEIGHT_TOL {
            return Err(SimError::ZeroWeightProjection { weight });
        }
        let (mut state, _) = compress(&SumOfMps::single(projected), self.policy())?;
        if proj.renormalize {
            state.normalize();
        }
        *self = state;
        Ok(weight)
    }

    /// Dispatches any [`GateOp`]; projectors report their weight.
    pub fn apply(&mut self, op: &GateOp) -> SimResult<Option<f64>> {
        match op {
            GateOp::Single { site, gate } => self.apply_single(gate, *site).map(|_| None),
            GateOp::Two(g) => self.apply_two(g).map(|_| None),
            GateOp::CkNot(g) => self.apply_cknot(g).map(|_| None),
            GateOp::Projector(p) => self.apply_projector(p).map(Some),
        }
    }
}
