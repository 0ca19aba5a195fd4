//! Density-matrix recompression of a (sum of) tensor-product states.
//!
//! The sweep runs left to right. At cut `α` the left block (new bond `y_α`
//! plus physical index `i_α`) is contracted against the cached right
//! environment of the whole input network to form the reduced density matrix
//!
//! ```text
//!   ρ_α(i, y | i', y') = Σ_{x, x'} M_α(i, y, x) X_{α+1}(x, x') M_α*(i', y', x')
//! ```
//!
//! where `M_α = C_α · U_α` and `C_α` is the projection of the already-fixed
//! new tensors onto the old network. `ρ_α` is diagonalized, its leading
//! eigenvectors become `V_α`, and `C_{α+1} = V_α† M_α` is carried forward.
//! The last site absorbs the remaining weight, so every `V_α` with `α < L` is
//! a left isometry and each `ρ_α` carries the exact Schmidt spectrum.

use num_complex::Complex64 as C64;

use crate::error::{SimError, SimResult};
use crate::linalg::{eigh_descending, hermitian_deviation, CMatrix};
use crate::mps::{EnvCache, MpsState, SiteTensor, TruncationPolicy};

/// Relative size of the tolerated anti-Hermitian part of a density matrix.
const HERMITIAN_TOL: f64 = 1e-9;
/// Relative size of negative eigenvalues that are clamped rather than rejected.
const NEGATIVE_TOL: f64 = 1e-12;

/// Eigenvalues of one reduced density matrix, sorted in decreasing order.
#[derive(Clone, Debug, PartialEq)]
pub struct BondSpectrum {
    /// Site `α` whose right bond this spectrum sets (the cut between `α` and `α + 1`).
    pub cut: usize,
    pub eigenvalues: Vec<f64>,
    pub kept_rank: usize,
}

impl BondSpectrum {
    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Sum of the eigenvalues that were not kept.
    pub fn discarded_weight(&self) -> f64 {
        self.eigenvalues[self.kept_rank..].iter().sum()
    }
}

/// Clamps round-off negatives and selects the kept rank under `policy`.
pub(crate) fn select_spectrum(
    cut: usize,
    mut eigenvalues: Vec<f64>,
    policy: &TruncationPolicy,
) -> SimResult<BondSpectrum> {
    let largest = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let neg_tol = NEGATIVE_TOL * largest.max(1.0);
    for value in eigenvalues.iter_mut() {
        if *value < 0.0 {
            if *value < -neg_tol {
                return Err(SimError::NegativeEigenvalue { cut, value: *value });
            }
            *value = 0.0;
        }
    }
    let threshold = policy.eigenvalue_floor * largest;
    let mut kept = eigenvalues.iter().take_while(|&&v| v > threshold && v > 0.0).count();
    if let Some(cap) = policy.max_bond {
        kept = kept.min(cap);
    }
    Ok(BondSpectrum { cut, eigenvalues, kept_rank: kept.max(1) })
}

/// Checks, symmetrizes and diagonalizes `ρ`; returns the spectrum and the
/// kept eigenvectors as columns.
fn split_cut(cut: usize, rho: CMatrix, policy: &TruncationPolicy) -> SimResult<(BondSpectrum, CMatrix)> {
    let scale = rho.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let deviation = hermitian_deviation(&rho);
    if deviation > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(SimError::NonHermitianDensity { cut, deviation });
    }
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let (values, vectors) = eigh_descending(rho);
    let spectrum = select_spectrum(cut, values, policy)?;
    let iso = vectors.columns(0, spectrum.kept_rank).into_owned();
    Ok((spectrum, iso))
}

fn stack(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    let (y, x) = top.shape();
    let mut out = CMatrix::zeros(2 * y, x);
    out.rows_mut(0, y).copy_from(top);
    out.rows_mut(y, y).copy_from(bottom);
    out
}

fn isometry_site(site: usize, iso: &CMatrix, y: usize) -> SimResult<SiteTensor> {
    SiteTensor::new(site, iso.rows(0, y).into_owned(), iso.rows(y, y).into_owned())
}

/// A weighted sum `Σ_a c_a |Ψ_a⟩` of chains sharing the same length.
#[derive(Clone, Debug)]
pub struct SumOfMps {
    terms: Vec<(C64, MpsState)>,
}

impl SumOfMps {
    pub fn new(terms: Vec<(C64, MpsState)>) -> SimResult<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(SimError::EmptySum);
        };
        let len = first.len();
        if let Some((_, bad)) = terms.iter().find(|(_, s)| s.len() != len) {
            return Err(SimError::LengthMismatch { expected: len, found: bad.len() });
        }
        Ok(Self { terms })
    }

    pub fn single(state: MpsState) -> Self {
        Self { terms: vec![(C64::new(1.0, 0.0), state)] }
    }

    pub fn terms(&self) -> &[(C64, MpsState)] {
        &self.terms
    }

    /// Number of sites shared by every term.
    pub fn qubits(&self) -> usize {
        self.terms[0].1.len()
    }

    /// Weighted dense sum of the terms.
    pub fn to_dense(&self) -> SimResult<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); 1 << self.qubits()];
        for (coeff, state) in &self.terms {
            for (o, a) in out.iter_mut().zip(state.to_dense()?) {
                *o += coeff * a;
            }
        }
        Ok(out)
    }

    /// Direct-sum concatenation: coefficients go into site 1, bonds are stacked
    /// block-diagonally, and the last site is stacked vertically.
    pub fn to_block_chain(&self) -> Vec<SiteTensor> {
        let len = self.qubits();
        let mut chain = Vec::with_capacity(len);
        for k in 0..len {
            let parts: Vec<(C64, &SiteTensor)> =
                self.terms.iter().map(|(c, s)| (*c, &s.sites()[k])).collect();
            let left: usize = if k == 0 { 1 } else { parts.iter().map(|(_, t)| t.left_dim()).sum() };
            let right: usize =
                if k + 1 == len { 1 } else { parts.iter().map(|(_, t)| t.right_dim()).sum() };
            let mut slices = [CMatrix::zeros(left, right), CMatrix::zeros(left, right)];
            let (mut r0, mut c0) = (0, 0);
            for (coeff, t) in parts {
                let (l, r) = (t.left_dim(), t.right_dim());
                for (i, out) in slices.iter_mut().enumerate() {
                    let mut block = t.slice(i).clone();
                    if k == 0 {
                        block *= coeff;
                    }
                    out.view_mut((r0, c0), (l, r)).zip_apply(&block, |o, b| *o += b);
                }
                if k != 0 {
                    r0 += l;
                }
                if k + 1 != len {
                    c0 += r;
                }
            }
            let [s0, s1] = slices;
            chain.push(SiteTensor::new(k + 1, s0, s1).expect("block shapes agree"));
        }
        chain
    }
}

/// How the density matrices of a multi-term sum are assembled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SumMechanics {
    /// Concatenate the terms into one chain with direct-sum bonds.
    #[default]
    Block,
    /// Keep the terms separate and accumulate all pairwise cross environments.
    PerTerm,
}

/// Refactorizes `input` into a single chain; see the module docs.
pub fn compress(input: &SumOfMps, policy: TruncationPolicy) -> SimResult<(MpsState, Vec<BondSpectrum>)> {
    compress_with(input, policy, SumMechanics::Block)
}

pub fn compress_with(
    input: &SumOfMps,
    policy: TruncationPolicy,
    mechanics: SumMechanics,
) -> SimResult<(MpsState, Vec<BondSpectrum>)> {
    let (sites, spectra) = match mechanics {
        SumMechanics::Block => sweep_chain(&input.to_block_chain(), &policy)?,
        SumMechanics::PerTerm => sweep_terms(input, &policy)?,
    };
    Ok((MpsState::from_sites(sites, policy)?, spectra))
}

fn sweep_chain(chain: &[SiteTensor], policy: &TruncationPolicy) -> SimResult<(Vec<SiteTensor>, Vec<BondSpectrum>)> {
    let len = chain.len();
    let env = EnvCache::from_chains(chain, chain);
    let mut carry = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    let mut sites = Vec::with_capacity(len);
    let mut spectra = Vec::with_capacity(len.saturating_sub(1));
    for (k, tensor) in chain.iter().enumerate().take(len - 1) {
        let site = k + 1;
        let y = carry.nrows();
        let m = stack(&(&carry * tensor.slice(0)), &(&carry * tensor.slice(1)));
        let rho = &m * env.right_env(site + 1) * m.adjoint();
        let (spectrum, iso) = split_cut(site, rho, policy)?;
        sites.push(isometry_site(site, &iso, y)?);
        carry = iso.adjoint() * m;
        spectra.push(spectrum);
    }
    let last = &chain[len - 1];
    sites.push(SiteTensor::new(len, &carry * last.slice(0), &carry * last.slice(1))?);
    Ok((sites, spectra))
}

fn sweep_terms(input: &SumOfMps, policy: &TruncationPolicy) -> SimResult<(Vec<SiteTensor>, Vec<BondSpectrum>)> {
    let terms = input.terms();
    let len = input.qubits();
    // cross[a][b] caches the environments of ⟨Ψ_b|Ψ_a⟩.
    let cross: Vec<Vec<EnvCache>> = terms
        .iter()
        .map(|(_, ket)| terms.iter().map(|(_, bra)| EnvCache::from_chains(ket.sites(), bra.sites())).collect())
        .collect();
    let mut carries = vec![CMatrix::from_element(1, 1, C64::new(1.0, 0.0)); terms.len()];
    let mut sites = Vec::with_capacity(len);
    let mut spectra = Vec::with_capacity(len.saturating_sub(1));
    for site in 1..len {
        let y = carries[0].nrows();
        let blocks: Vec<CMatrix> = terms
            .iter()
            .zip(&carries)
            .map(|((_, s), c)| {
                let t = &s.sites()[site - 1];
                stack(&(c * t.slice(0)), &(c * t.slice(1)))
            })
            .collect();
        let mut rho = CMatrix::zeros(2 * y, 2 * y);
        for (a, ma) in blocks.iter().enumerate() {
            let weighted = ma * terms[a].0;
            for (b, mb) in blocks.iter().enumerate() {
                let env = cross[a][b].right_env(site + 1);
                rho += &weighted * env * (mb * terms[b].0).adjoint();
            }
        }
        let (spectrum, iso) = split_cut(site, rho, policy)?;
        sites.push(isometry_site(site, &iso, y)?);
        let proj = iso.adjoint();
        carries = blocks.iter().map(|m| &proj * m).collect();
        spectra.push(spectrum);
    }
    let y = carries[0].nrows();
    let mut last = [CMatrix::zeros(y, 1), CMatrix::zeros(y, 1)];
    for ((coeff, s), c) in terms.iter().zip(&carries) {
        let t = &s.sites()[len - 1];
        for (i, out) in last.iter_mut().enumerate() {
            *out += c * t.slice(i) * *coeff;
        }
    }
    let [l0, l1] = last;
    sites.push(SiteTensor::new(len, l0, l1)?);
    Ok((sites, spectra))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::BitString;

    fn basis(s: &str) -> MpsState {
        MpsState::from_basis_state(&s.parse::<BitString>().unwrap()).unwrap()
    }

    fn ghz4() -> SumOfMps {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        SumOfMps::new(vec![(h, basis("0000")), (h, basis("1111"))]).unwrap()
    }

    #[test]
    fn single_basis_term_is_unchanged() {
        let input = SumOfMps::single(basis("0110"));
        let (out, spectra) = compress(&input, TruncationPolicy::exact()).unwrap();
        assert_eq!(out.schmidt_ranks(), vec![1, 1, 1]);
        assert!(spectra.iter().all(|s| s.kept_rank == 1));
        assert_eq!(out.to_dense().unwrap(), basis("0110").to_dense().unwrap());
    }

    #[test]
    fn ghz_like_sum_has_rank_two_with_half_spectra() {
        for mech in [SumMechanics::Block, SumMechanics::PerTerm] {
            let (out, spectra) = compress_with(&ghz4(), TruncationPolicy::exact(), mech).unwrap();
            assert_eq!(out.schmidt_ranks(), vec![2, 2, 2]);
            for s in &spectra {
                assert_eq!(s.kept_rank, 2);
                assert!((s.eigenvalues[0] - 0.5).abs() < 1e-14);
                assert!((s.eigenvalues[1] - 0.5).abs() < 1e-14);
                assert!(s.eigenvalues[2..].iter().all(|v| v.abs() < 1e-14));
            }
        }
    }

    #[test]
    fn cknot_three_term_identity_on_satisfied_controls() {
        // Controls 1,2 definitely |11⟩, target 4: Ψ0 − PΨ0 + X_4 PΨ0 = X_4 Ψ0.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let a = C64::new(h, 0.0);
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let psi = MpsState::from_sites(
            vec![
                SiteTensor::product(1, z, o),
                SiteTensor::product(2, z, o),
                SiteTensor::product(3, a, a),
                SiteTensor::product(4, C64::new(0.6, 0.0), C64::new(0.0, 0.8)),
            ],
            TruncationPolicy::exact(),
        )
        .unwrap();
        let clamped = psi.clone();
        let mut flipped = clamped.clone();
        flipped.site_mut(4).swap_physical();
        let sum = SumOfMps::new(vec![
            (o, psi.clone()),
            (-o, clamped),
            (o, flipped),
        ])
        .unwrap();
        let (out, spectra) = compress(&sum, TruncationPolicy::exact()).unwrap();
        assert!(spectra.iter().all(|s| s.kept_rank == 1));
        // dense arithmetic: target slices swapped
        let dense_in = psi.to_dense().unwrap();
        let got = out.to_dense().unwrap();
        for idx in 0..16 {
            let want = dense_in[idx ^ 1];
            assert!((got[idx] - want).norm() < 1e-14, "index {idx}");
        }
    }

    #[test]
    fn lossy_cap_limits_rank_and_reports_discarded_weight() {
        let policy = TruncationPolicy::new(TruncationPolicy::DEFAULT_FLOOR, Some(1)).unwrap();
        let (out, spectra) = compress(&ghz4(), policy).unwrap();
        assert_eq!(out.schmidt_ranks(), vec![1, 1, 1]);
        assert!((spectra[0].discarded_weight() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_sum_compresses_to_zero_state() {
        let one = C64::new(1.0, 0.0);
        let sum = SumOfMps::new(vec![(one, basis("01")), (-one, basis("01"))]).unwrap();
        let (out, _) = compress(&sum, TruncationPolicy::exact()).unwrap();
        assert!(out.norm_sqr().abs() < 1e-30);
    }

    #[test]
    fn mismatched_terms_rejected() {
        let one = C64::new(1.0, 0.0);
        assert!(SumOfMps::new(vec![(one, basis("01")), (one, basis("011"))]).is_err());
        assert!(matches!(SumOfMps::new(vec![]), Err(SimError::EmptySum)));
    }

    #[test]
    fn negative_eigenvalues_are_clamped_or_rejected() {
        let p = TruncationPolicy::exact();
        let s = select_spectrum(1, vec![1.0, -1e-15], &p).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 0.0]);
        assert_eq!(s.kept_rank, 1);
        assert!(matches!(
            select_spectrum(1, vec![1.0, -1e-3], &p),
            Err(SimError::NegativeEigenvalue { .. })
        ));
    }

    #[test]
    fn non_hermitian_density_is_rejected() {
        let mut rho = CMatrix::identity(2, 2);
        rho[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(
            split_cut(3, rho, &TruncationPolicy::exact()),
            Err(SimError::NonHermitianDensity { cut: 3, .. })
        ));
    }

    #[test]
    fn single_site_chain() {
        let one = C64::new(1.0, 0.0);
        let sum = SumOfMps::new(vec![(one, basis("0")), (C64::new(0.0, 1.0), basis("1"))]).unwrap();
        let (out, spectra) = compress(&sum, TruncationPolicy::exact()).unwrap();
        assert!(spectra.is_empty());
        let d = out.to_dense().unwrap();
        assert_eq!(d, vec![one, C64::new(0.0, 1.0)]);
    }
}
