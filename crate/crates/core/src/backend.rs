//! A common face for the tensor-product engine and the dense oracle, so that
//! circuits, measurements and Grover runs are written once.

use num_complex::Complex64 as C64;

use crate::dense::DenseState;
use crate::error::SimResult;
use crate::gates::{GateOp, SiteProjector};
use crate::mps::{BitString, MpsState};

pub trait Backend: Clone {
    fn qubits(&self) -> usize;

    /// Applies `op`; projectors return `Some(weight)`.
    fn apply(&mut self, op: &GateOp) -> SimResult<Option<f64>>;

    fn project(&mut self, proj: &SiteProjector) -> SimResult<f64>;

    /// Probability of reading `1` at `site`.
    fn expectation_n(&self, site: usize) -> SimResult<f64>;

    fn amplitude(&self, bits: &BitString) -> SimResult<C64>;

    fn norm_sqr(&self) -> f64;

    /// Largest bond dimension, when the backend has one.
    fn max_bond(&self) -> Option<usize>;

    /// Interior bond dimensions, when the backend has them.
    fn schmidt_ranks(&self) -> Option<Vec<usize>>;

    /// Bytes held by the state representation.
    fn memory_bytes(&self) -> usize;
}

impl Backend for MpsState {
    fn qubits(&self) -> usize {
        self.len()
    }

    fn apply(&mut self, op: &GateOp) -> SimResult<Option<f64>> {
        MpsState::apply(self, op)
    }

    fn project(&mut self, proj: &SiteProjector) -> SimResult<f64> {
        self.apply_projector(proj)
    }

    fn expectation_n(&self, site: usize) -> SimResult<f64> {
        crate::measurement::expectation_n(self, site)
    }

    fn amplitude(&self, bits: &BitString) -> SimResult<C64> {
        MpsState::amplitude(self, bits)
    }

    fn norm_sqr(&self) -> f64 {
        MpsState::norm_sqr(self)
    }

    fn max_bond(&self) -> Option<usize> {
        Some(MpsState::max_bond(self))
    }

    fn schmidt_ranks(&self) -> Option<Vec<usize>> {
        Some(MpsState::schmidt_ranks(self))
    }

    fn memory_bytes(&self) -> usize {
        MpsState::memory_bytes(self)
    }
}

impl Backend for DenseState {
    fn qubits(&self) -> usize {
        DenseState::qubits(self)
    }

    fn apply(&mut self, op: &GateOp) -> SimResult<Option<f64>> {
        DenseState::apply(self, op)
    }

    fn project(&mut self, proj: &SiteProjector) -> SimResult<f64> {
        self.apply_projector(proj)
    }

    fn expectation_n(&self, site: usize) -> SimResult<f64> {
        self.measure_probabilities(site).map(|(_, p1)| p1)
    }

    fn amplitude(&self, bits: &BitString) -> SimResult<C64> {
        DenseState::amplitude(self, bits)
    }

    fn norm_sqr(&self) -> f64 {
        DenseState::norm_sqr(self)
    }

    fn max_bond(&self) -> Option<usize> {
        None
    }

    fn schmidt_ranks(&self) -> Option<Vec<usize>> {
        None
    }

    fn memory_bytes(&self) -> usize {
        std::mem::size_of_val(self.amplitudes())
    }
}
