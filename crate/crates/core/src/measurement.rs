//! Stochastic projective measurement.
//!
//! For site `i` draw `r` uniformly from `[0, 1)` and apply `P_1` when
//! `⟨Ψ|n̂_i|Ψ⟩ > r`, otherwise `P_0`, then renormalize. When the outcome is
//! certain to within [`DETERMINISTIC_TOL`] no number is drawn, so both
//! backends consume the random stream identically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backend::Backend;
use crate::error::SimResult;
use crate::gates::SiteProjector;
use crate::mps::{BitString, MpsState};

/// Expectations closer than this to 0 or 1 are projected without a draw.
pub const DETERMINISTIC_TOL: f64 = 1e-14;

/// The reproducible generator used by every measurement sequence.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub site: usize,
    /// The uniform draw; `None` when the outcome was deterministic.
    pub r: Option<f64>,
    pub expectation: f64,
    pub outcome: u8,
    /// `⟨Ψ|P_outcome|Ψ⟩` before renormalization.
    pub weight: f64,
}

/// `⟨Ψ|n̂|Ψ⟩ / ⟨Ψ|Ψ⟩` at one site, `n̂ = |1⟩⟨1|`.
pub fn expectation_n(state: &MpsState, site: usize) -> SimResult<f64> {
    state.check_site(site)?;
    let mut projected = state.clone();
    projected.site_mut(site).clamp_to(1);
    let p1 = projected.norm_sqr() / state.norm_sqr();
    Ok(p1.clamp(0.0, 1.0))
}

/// Outcome selection: `≤ r` gives 0, `> r` gives 1.
pub fn select_outcome<R: Rng + ?Sized>(expectation: f64, rng: &mut R) -> (Option<f64>, u8) {
    if expectation < DETERMINISTIC_TOL {
        return (None, 0);
    }
    if expectation > 1.0 - DETERMINISTIC_TOL {
        return (None, 1);
    }
    let r: f64 = rng.random();
    (Some(r), u8::from(expectation > r))
}

/// Measures one site, collapsing `state` in place.
pub fn measure_qubit<B: Backend, R: Rng + ?Sized>(
    state: &mut B,
    site: usize,
    rng: &mut R,
) -> SimResult<MeasurementRecord> {
    let expectation = state.expectation_n(site)?;
    let (r, outcome) = select_outcome(expectation, rng);
    let weight = state.project(&SiteProjector { site, outcome, renormalize: true })?;
    Ok(MeasurementRecord { site, r, expectation, outcome, weight })
}

/// Measures sites `1..=L` in order.
pub fn measure_all<B: Backend, R: Rng + ?Sized>(
    state: &mut B,
    rng: &mut R,
) -> SimResult<(BitString, Vec<MeasurementRecord>)> {
    measure_sites(state, 1..=state.qubits(), rng)
}

/// Measures the given sites in order.
pub fn measure_sites<B: Backend, R: Rng + ?Sized>(
    state: &mut B,
    sites: impl IntoIterator<Item = usize>,
    rng: &mut R,
) -> SimResult<(BitString, Vec<MeasurementRecord>)> {
    let mut bits = BitString::zeros(0);
    let mut records = Vec::new();
    for site in sites {
        let rec = measure_qubit(state, site, rng)?;
        bits.push(rec.outcome);
        records.push(rec);
    }
    Ok((bits, records))
}
