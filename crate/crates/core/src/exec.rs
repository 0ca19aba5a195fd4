//! Executing a [`Circuit`] on any [`Backend`].

use rand::Rng;

use crate::backend::Backend;
use crate::circuit::{Circuit, Op};
use crate::error::{SimError, SimResult};
use crate::measurement::{measure_qubit, MeasurementRecord};
use crate::mps::BitString;

/// State after one program step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub step: usize,
    pub op: String,
    pub max_bond: Option<usize>,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotResult {
    /// Outcomes of every measurement, in program order.
    pub bits: BitString,
    pub records: Vec<MeasurementRecord>,
    pub trace: Vec<StepTrace>,
}

/// Runs `circuit` once starting from `initial`; returns the shot and the final state.
pub fn run_shot<B: Backend, R: Rng + ?Sized>(
    circuit: &Circuit,
    initial: &B,
    rng: &mut R,
    trace: bool,
) -> SimResult<(ShotResult, B)> {
    if initial.qubits() != circuit.qubits() {
        return Err(SimError::LengthMismatch { expected: circuit.qubits(), found: initial.qubits() });
    }
    let mut state = initial.clone();
    let mut bits = BitString::zeros(0);
    let mut records = Vec::new();
    let mut steps = Vec::new();
    for (step, op) in circuit.ops().iter().enumerate() {
        let label = match op {
            Op::Gate(g) => {
                state.apply(g)?;
                g.to_string()
            }
            Op::Measure(q) => {
                let rec = measure_qubit(&mut state, *q, rng)?;
                bits.push(rec.outcome);
                records.push(rec);
                format!("measure {q}")
            }
            Op::MeasureAll => {
                for q in 1..=state.qubits() {
                    let rec = measure_qubit(&mut state, q, rng)?;
                    bits.push(rec.outcome);
                    records.push(rec);
                }
                "measure_all".to_string()
            }
        };
        if trace {
            steps.push(StepTrace { step, op: label, max_bond: state.max_bond(), norm: state.norm_sqr().sqrt() });
        }
    }
    Ok((ShotResult { bits, records, trace: steps }, state))
}

/// `shots` independent executions sharing one random stream.
pub fn run_shots<B: Backend, R: Rng + ?Sized>(
    circuit: &Circuit,
    initial: &B,
    shots: usize,
    rng: &mut R,
    trace: bool,
) -> SimResult<Vec<ShotResult>> {
    (0..shots).map(|_| run_shot(circuit, initial, rng, trace).map(|(r, _)| r)).collect()
}
