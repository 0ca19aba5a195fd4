//! Tensor-product (matrix product) representation of an `L`-qubit pure state.
//!
//! Site `α` holds a three-index tensor `U_α(i, x_left, x_right)` stored as two
//! bond matrices, one per physical value `i ∈ {0, 1}`. The amplitude of a basis
//! string is the product of the selected bond matrices:
//!
//! ```text
//!   x_1=1      x_2        x_3               x_L      x_{L+1}=1
//!     ── U_1 ────── U_2 ────── ... ── U_L ──
//!         |          |                  |
//!         i_1        i_2                i_L
//! ```
//!
//! Sites are addressed 1-based throughout the public API, so that site `α`
//! sits between bonds `α` and `α + 1`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::compress::{select_spectrum, BondSpectrum};
use crate::error::{SimError, SimResult};
use crate::linalg::{eigh_descending, CMatrix};

/// Qubit count above which dense conversions are refused by default.
pub const DEFAULT_DENSE_CAP: usize = 20;

/// A basis string `i_1 i_2 ... i_L`, site 1 first (most significant bit).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new(bits: Vec<u8>) -> SimResult<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(SimError::InvalidBit(char::from(b'0' + b.min(9))));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// The `len`-bit string whose binary value is `index`.
    pub fn from_index(index: usize, len: usize) -> Self {
        Self((0..len).map(|k| ((index >> (len - 1 - k)) & 1) as u8).collect())
    }

    /// Binary value with site 1 as the most significant bit.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    /// Bit at 1-based `site`.
    pub fn bit(&self, site: usize) -> u8 {
        self.0[site - 1]
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push(bit & 1);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        BitString(bits)
    }
}

impl FromStr for BitString {
    type Err = SimError;

    fn from_str(s: &str) -> SimResult<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(SimError::InvalidBit(other)),
            })
            .collect::<SimResult<Vec<u8>>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// How aggressively reduced density matrices are cut during recompression.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    /// Eigenvalues at or below `eigenvalue_floor * λ_max` are treated as zero.
    pub eigenvalue_floor: f64,
    /// Optional bond-dimension cap; makes compression lossy when it binds.
    pub max_bond: Option<usize>,
}

impl TruncationPolicy {
    pub const DEFAULT_FLOOR: f64 = 1e-12;

    pub fn new(eigenvalue_floor: f64, max_bond: Option<usize>) -> SimResult<Self> {
        if !eigenvalue_floor.is_finite() || eigenvalue_floor < 0.0 {
            return Err(SimError::InvalidPolicy(format!(
                "eigenvalue floor must be a finite nonnegative number, got {eigenvalue_floor}"
            )));
        }
        if max_bond == Some(0) {
            return Err(SimError::InvalidPolicy("max_bond must be positive".into()));
        }
        Ok(Self { eigenvalue_floor, max_bond })
    }

    /// Keeps every eigenvalue above the default floor, with no cap.
    pub fn exact() -> Self {
        Self { eigenvalue_floor: Self::DEFAULT_FLOOR, max_bond: None }
    }

    pub fn is_exact(&self) -> bool {
        self.max_bond.is_none()
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::exact()
    }
}

/// One site `U_α(i, x_α, x_{α+1})`: a `left × right` bond matrix per physical value.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor {
    site: usize,
    slices: [CMatrix; 2],
}

impl SiteTensor {
    pub fn new(site: usize, zero: CMatrix, one: CMatrix) -> SimResult<Self> {
        if zero.shape() != one.shape() {
            return Err(SimError::MalformedGate(format!(
                "site {site}: physical slices have shapes {:?} and {:?}",
                zero.shape(),
                one.shape()
            )));
        }
        if zero.nrows() == 0 || zero.ncols() == 0 {
            return Err(SimError::MalformedGate(format!("site {site}: empty bond")));
        }
        Ok(Self { site, slices: [zero, one] })
    }

    /// Product-state site with local amplitudes `(a0, a1)`.
    pub fn product(site: usize, a0: C64, a1: C64) -> Self {
        Self {
            site,
            slices: [CMatrix::from_element(1, 1, a0), CMatrix::from_element(1, 1, a1)],
        }
    }

    pub fn site(&self) -> usize {
        self.site
    }

    pub fn left_dim(&self) -> usize {
        self.slices[0].nrows()
    }

    pub fn right_dim(&self) -> usize {
        self.slices[0].ncols()
    }

    /// Bond matrix for physical value `i`.
    pub fn slice(&self, i: usize) -> &CMatrix {
        &self.slices[i]
    }

    pub fn slice_mut(&mut self, i: usize) -> &mut CMatrix {
        &mut self.slices[i]
    }

    pub fn slices(&self) -> &[CMatrix; 2] {
        &self.slices
    }

    /// Keeps only physical value `outcome` by zeroing the other slice.
    pub(crate) fn clamp_to(&mut self, outcome: usize) {
        self.slices[1 - outcome].fill(C64::new(0.0, 0.0));
    }

    /// Exchanges the two physical slices (bit flip on this site).
    pub(crate) fn swap_physical(&mut self) {
        self.slices.swap(0, 1);
    }

    pub(crate) fn set_site(&mut self, site: usize) {
        self.site = site;
    }

    /// Number of stored complex entries.
    pub fn len(&self) -> usize {
        2 * self.left_dim() * self.right_dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A chain of `L` site tensors with open boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct MpsState {
    sites: Vec<SiteTensor>,
    policy: TruncationPolicy,
}

impl MpsState {
    /// Assembles a chain, checking boundary and bond-matching invariants.
    pub fn from_sites(sites: Vec<SiteTensor>, policy: TruncationPolicy) -> SimResult<Self> {
        if sites.is_empty() {
            return Err(SimError::EmptySystem);
        }
        let len = sites.len();
        if sites[0].left_dim() != 1 {
            return Err(SimError::LengthMismatch { expected: 1, found: sites[0].left_dim() });
        }
        if sites[len - 1].right_dim() != 1 {
            return Err(SimError::LengthMismatch { expected: 1, found: sites[len - 1].right_dim() });
        }
        for pair in sites.windows(2) {
            if pair[0].right_dim() != pair[1].left_dim() {
                return Err(SimError::LengthMismatch {
                    expected: pair[0].right_dim(),
                    found: pair[1].left_dim(),
                });
            }
        }
        let mut sites = sites;
        for (k, s) in sites.iter_mut().enumerate() {
            s.set_site(k + 1);
        }
        Ok(Self { sites, policy })
    }

    /// `|bits⟩` as a product state with every `U_α = (1,0)ᵀ` or `(0,1)ᵀ`.
    pub fn from_basis_state(bits: &BitString) -> SimResult<Self> {
        if bits.is_empty() {
            return Err(SimError::EmptySystem);
        }
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let sites = bits
            .bits()
            .iter()
            .enumerate()
            .map(|(k, &b)| {
                if b == 0 {
                    SiteTensor::product(k + 1, one, zero)
                } else {
                    SiteTensor::product(k + 1, zero, one)
                }
            })
            .collect();
        Ok(Self { sites, policy: TruncationPolicy::default() })
    }

    /// `|0…0⟩` on `qubits` sites.
    pub fn zeros(qubits: usize) -> SimResult<Self> {
        Self::from_basis_state(&BitString::zeros(qubits))
    }

    /// `2^{-L/2} Σ_i |i⟩` with every `U_α = (1/√2, 1/√2)ᵀ`.
    pub fn from_uniform_superposition(qubits: usize) -> SimResult<Self> {
        if qubits == 0 {
            return Err(SimError::EmptySystem);
        }
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let sites = (1..=qubits).map(|k| SiteTensor::product(k, a, a)).collect();
        Ok(Self { sites, policy: TruncationPolicy::default() })
    }

    /// Factorizes a dense amplitude vector (site 1 = most significant bit) by
    /// successive reduced-density-matrix splits under `policy`.
    pub fn from_dense(amplitudes: &[C64], policy: TruncationPolicy) -> SimResult<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(SimError::LengthMismatch { expected: dim.next_power_of_two().max(2), found: dim });
        }
        let qubits = dim.trailing_zeros() as usize;
        // rest[(y, r)]: left bond y, remaining sites encoded in r (current site is the MSB).
        let mut rest = CMatrix::from_row_slice(1, dim, amplitudes);
        let mut sites = Vec::with_capacity(qubits);
        for site in 1..qubits {
            let y = rest.nrows();
            let half = rest.ncols() / 2;
            let block = CMatrix::from_fn(2 * y, half, |row, col| {
                let (i, y0) = (row / y, row % y);
                rest[(y0, i * half + col)]
            });
            let rho = &block * block.adjoint();
            let (values, vectors) = eigh_descending(rho);
            let spectrum = select_spectrum(site, values, &policy)?;
            let kept = spectrum.kept_rank;
            let iso = vectors.columns(0, kept).into_owned();
            sites.push(SiteTensor::new(
                site,
                iso.rows(0, y).into_owned(),
                iso.rows(y, y).into_owned(),
            )?);
            rest = iso.adjoint() * block;
        }
        let y = rest.nrows();
        sites.push(SiteTensor::new(
            qubits,
            rest.columns(0, 1).into_owned(),
            rest.columns(1, 1).into_owned(),
        )?);
        debug_assert_eq!(sites[qubits - 1].left_dim(), y);
        Self::from_sites(sites, policy)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn set_policy(&mut self, policy: TruncationPolicy) {
        self.policy = policy;
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    /// Tensor at 1-based `site`.
    pub fn site(&self, site: usize) -> SimResult<&SiteTensor> {
        self.check_site(site)?;
        Ok(&self.sites[site - 1])
    }

    pub(crate) fn site_mut(&mut self, site: usize) -> &mut SiteTensor {
        &mut self.sites[site - 1]
    }

    pub(crate) fn replace_pair(&mut self, site: usize, left: SiteTensor, right: SiteTensor) {
        self.sites[site - 1] = left;
        self.sites[site] = right;
    }

    pub(crate) fn check_site(&self, site: usize) -> SimResult<()> {
        if site == 0 || site > self.len() {
            Err(SimError::SiteOutOfRange { site, qubits: self.len() })
        } else {
            Ok(())
        }
    }

    /// The bond vector `m_1, …, m_{L+1}`; the two ends are always 1.
    pub fn bond_dims(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.sites.iter().map(SiteTensor::right_dim))
            .collect()
    }

    /// Interior bond dimensions `m_2, …, m_L`. Under exact compression these
    /// are the Schmidt ranks across each cut.
    pub fn schmidt_ranks(&self) -> Vec<usize> {
        self.sites[..self.len() - 1].iter().map(SiteTensor::right_dim).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.sites.iter().map(SiteTensor::right_dim).max().unwrap_or(1)
    }

    /// Bytes held by the site tensors.
    pub fn memory_bytes(&self) -> usize {
        self.sites.iter().map(SiteTensor::len).sum::<usize>() * std::mem::size_of::<C64>()
    }

    /// `⟨bits|Ψ⟩` as a product of the selected bond matrices.
    pub fn amplitude(&self, bits: &BitString) -> SimResult<C64> {
        if bits.len() != self.len() {
            return Err(SimError::LengthMismatch { expected: self.len(), found: bits.len() });
        }
        let mut row = self.sites[0].slice(bits.bit(1) as usize).clone();
        for (site, &b) in self.sites.iter().zip(bits.bits()).skip(1) {
            row *= site.slice(b as usize);
        }
        Ok(row[(0, 0)])
    }

    /// Dense amplitude vector, refusing states above [`DEFAULT_DENSE_CAP`] qubits.
    pub fn to_dense(&self) -> SimResult<Vec<C64>> {
        self.to_dense_capped(DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_capped(&self, cap: usize) -> SimResult<Vec<C64>> {
        if self.len() > cap {
            return Err(SimError::DenseCapExceeded { qubits: self.len(), cap });
        }
        // rows[prefix] is the 1 × m row vector of the contracted prefix.
        let mut rows: Vec<CMatrix> = vec![CMatrix::from_element(1, 1, C64::new(1.0, 0.0))];
        for site in &self.sites {
            rows = rows
                .iter()
                .flat_map(|r| [r * site.slice(0), r * site.slice(1)])
                .collect();
        }
        Ok(rows.into_iter().map(|r| r[(0, 0)]).collect())
    }

    /// `⟨Ψ|Ψ⟩`.
    pub fn norm_sqr(&self) -> f64 {
        inner_product_unchecked(self, self).re
    }

    /// Multiplies the state by `factor`, absorbing it into the last site.
    pub fn scale(&mut self, factor: C64) {
        let last = self.len();
        let site = self.site_mut(last);
        for i in 0..2 {
            *site.slice_mut(i) *= factor;
        }
    }

    /// Scales to unit norm; returns the norm before scaling.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            self.scale(C64::new(1.0 / norm, 0.0));
        }
        norm
    }

    /// Recompresses the chain in place with its own policy and returns the spectra.
    pub fn recompress(&mut self) -> SimResult<Vec<BondSpectrum>> {
        let sum = crate::compress::SumOfMps::single(self.clone());
        let (state, spectra) = crate::compress::compress(&sum, self.policy)?;
        *self = state;
        Ok(spectra)
    }
}

/// `⟨a|b⟩` by a right-to-left environment sweep, keeping only the current
/// environment matrix.
pub fn inner_product(a: &MpsState, b: &MpsState) -> SimResult<C64> {
    if a.len() != b.len() {
        return Err(SimError::LengthMismatch { expected: a.len(), found: b.len() });
    }
    Ok(inner_product_unchecked(a, b))
}

fn inner_product_unchecked(a: &MpsState, b: &MpsState) -> C64 {
    let mut env = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for (sa, sb) in a.sites.iter().zip(&b.sites).rev() {
        env = transfer(sb.slices(), sa.slices(), &env);
    }
    env[(0, 0)]
}

/// One step of the right environment recursion:
/// `X_α = Σ_i K^i · X_{α+1} · (B^i)†`, with `K` the ket and `B` the bra site.
pub(crate) fn transfer(ket: &[CMatrix; 2], bra: &[CMatrix; 2], env: &CMatrix) -> CMatrix {
    let y0 = &ket[0] * env;
    let y1 = &ket[1] * env;
    y0 * bra[0].adjoint() + y1 * bra[1].adjoint()
}

/// Cached right environments of `⟨bra|ket⟩`.
///
/// `right_env(α)` is `X_α(x_α, x'_α)`, the contraction of sites `α..=L` of the
/// ket against the bra; `right_env(L + 1)` is the trivial `1 × 1` identity.
/// `partial_row(α, i)` is the intermediate `Y_α = K_α^i · X_{α+1}`.
#[derive(Clone, Debug)]
pub struct EnvCache {
    right_envs: Vec<CMatrix>,
    partial_rows: Vec<[CMatrix; 2]>,
}

impl EnvCache {
    pub fn new(bra: &MpsState, ket: &MpsState) -> SimResult<Self> {
        if bra.len() != ket.len() {
            return Err(SimError::LengthMismatch { expected: bra.len(), found: ket.len() });
        }
        Ok(Self::from_chains(ket.sites(), bra.sites()))
    }

    pub(crate) fn from_chains(ket: &[SiteTensor], bra: &[SiteTensor]) -> Self {
        let len = ket.len();
        let mut right_envs = vec![CMatrix::zeros(0, 0); len + 1];
        let mut partial_rows = Vec::with_capacity(len);
        right_envs[len] = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        for k in (0..len).rev() {
            let env = &right_envs[k + 1];
            let y0 = ket[k].slice(0) * env;
            let y1 = ket[k].slice(1) * env;
            right_envs[k] = &y0 * bra[k].slice(0).adjoint() + &y1 * bra[k].slice(1).adjoint();
            partial_rows.push([y0, y1]);
        }
        partial_rows.reverse();
        Self { right_envs, partial_rows }
    }

    /// `X_α` for 1-based `α ∈ [1, L + 1]`.
    pub fn right_env(&self, alpha: usize) -> &CMatrix {
        &self.right_envs[alpha - 1]
    }

    /// `Y_α^i` for 1-based `α ∈ [1, L]`.
    pub fn partial_row(&self, alpha: usize, i: usize) -> &CMatrix {
        &self.partial_rows[alpha - 1][i]
    }

    /// `⟨bra|ket⟩ = X_1(1, 1)`.
    pub fn overlap(&self) -> C64 {
        self.right_envs[0][(0, 0)]
    }
}
