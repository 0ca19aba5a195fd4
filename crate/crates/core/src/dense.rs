//! Full state-vector reference simulator.
//!
//! Amplitudes are indexed with site 1 as the most significant bit, matching
//! [`BitString::index`]. Every operation is the plain matrix action on the
//! `2^L` vector.

use num_complex::Complex64 as C64;

use crate::error::{SimError, SimResult};
use crate::gates::{CkNotGate, GateOp, SiteProjector, SingleQubitGate, TwoQubitGate, ZERO_WEIGHT_TOL};
use crate::mps::{BitString, DEFAULT_DENSE_CAP};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    qubits: usize,
    amplitudes: Vec<C64>,
}

impl DenseState {
    /// `|0…0⟩` under the default qubit cap.
    pub fn zeros(qubits: usize) -> SimResult<Self> {
        Self::zeros_capped(qubits, DEFAULT_DENSE_CAP)
    }

    pub fn zeros_capped(qubits: usize, cap: usize) -> SimResult<Self> {
        Self::from_basis_state_capped(&BitString::zeros(qubits), cap)
    }

    pub fn from_basis_state(bits: &BitString) -> SimResult<Self> {
        Self::from_basis_state_capped(bits, DEFAULT_DENSE_CAP)
    }

    pub fn from_basis_state_capped(bits: &BitString, cap: usize) -> SimResult<Self> {
        let qubits = bits.len();
        if qubits == 0 {
            return Err(SimError::EmptySystem);
        }
        if qubits > cap {
            return Err(SimError::DenseCapExceeded { qubits, cap });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << qubits];
        amplitudes[bits.index()] = C64::new(1.0, 0.0);
        Ok(Self { qubits, amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<C64>) -> SimResult<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(SimError::LengthMismatch { expected: dim.next_power_of_two().max(2), found: dim });
        }
        Ok(Self { qubits: dim.trailing_zeros() as usize, amplitudes })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, bits: &BitString) -> SimResult<C64> {
        if bits.len() != self.qubits {
            return Err(SimError::LengthMismatch { expected: self.qubits, found: bits.len() });
        }
        Ok(self.amplitudes[bits.index()])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum()
    }

    fn mask(&self, site: usize) -> SimResult<usize> {
        if site == 0 || site > self.qubits {
            return Err(SimError::SiteOutOfRange { site, qubits: self.qubits });
        }
        Ok(1 << (self.qubits - site))
    }

    pub fn apply_single(&mut self, gate: &SingleQubitGate, site: usize) -> SimResult<()> {
        let mask = self.mask(site)?;
        let m = gate.matrix();
        for idx in (0..self.amplitudes.len()).filter(|i| i & mask == 0) {
            let (a0, a1) = (self.amplitudes[idx], self.amplitudes[idx | mask]);
            self.amplitudes[idx] = m[(0, 0)] * a0 + m[(0, 1)] * a1;
            self.amplitudes[idx | mask] = m[(1, 0)] * a0 + m[(1, 1)] * a1;
        }
        Ok(())
    }

    pub fn apply_two(&mut self, gate: &TwoQubitGate) -> SimResult<()> {
        let (j, l) = gate.sites();
        let (mj, ml) = (self.mask(j)?, self.mask(l)?);
        let m = gate.matrix();
        for idx in (0..self.amplitudes.len()).filter(|i| i & (mj | ml) == 0) {
            let slots = [idx, idx | ml, idx | mj, idx | mj | ml];
            let v: Vec<C64> = slots.iter().map(|&s| self.amplitudes[s]).collect();
            for (r, &slot) in slots.iter().enumerate() {
                self.amplitudes[slot] = (0..4).map(|col| m[(r, col)] * v[col]).sum();
            }
        }
        Ok(())
    }

    pub fn apply_cknot(&mut self, gate: &CkNotGate) -> SimResult<()> {
        let tmask = self.mask(gate.target())?;
        let mut cmask = 0;
        for &q in gate.controls() {
            cmask |= self.mask(q)?;
        }
        for idx in 0..self.amplitudes.len() {
            if idx & cmask == cmask && idx & tmask == 0 {
                self.amplitudes.swap(idx, idx | tmask);
            }
        }
        Ok(())
    }

    /// Applies `P_b`; returns `⟨Ψ|P_b|Ψ⟩`.
    pub fn apply_projector(&mut self, proj: &SiteProjector) -> SimResult<f64> {
        let mask = self.mask(proj.site)?;
        let want = if proj.outcome == 1 { mask } else { 0 };
        let weight: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if weight.is_nan() || weight < ZERO_WEIGHT_TOL {
            return Err(SimError::ZeroWeightProjection { weight });
        }
        let scale = if proj.renormalize { 1.0 / weight.sqrt() } else { 1.0 };
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask == want {
                *a *= scale;
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        Ok(weight)
    }

    /// Exact action of any [`GateOp`].
    pub fn apply(&mut self, op: &GateOp) -> SimResult<Option<f64>> {
        match op {
            GateOp::Single { site, gate } => self.apply_single(gate, *site).map(|_| None),
            GateOp::Two(g) => self.apply_two(g).map(|_| None),
            GateOp::CkNot(g) => self.apply_cknot(g).map(|_| None),
            GateOp::Projector(p) => self.apply_projector(p).map(Some),
        }
    }

    /// Marginal `(p0, p1)` of one site.
    pub fn measure_probabilities(&self, site: usize) -> SimResult<(f64, f64)> {
        let mask = self.mask(site)?;
        let (mut p0, mut p1) = (0.0, 0.0);
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i & mask == 0 {
                p0 += a.norm_sqr();
            } else {
                p1 += a.norm_sqr();
            }
        }
        let total = p0 + p1;
        Ok((p0 / total, p1 / total))
    }
}
