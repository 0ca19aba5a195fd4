//! Grover search with an oracle built from `t` C^n-NOT gates.
//!
//! Layout: register qubits `1..=n`, ancilla `n + 1` prepared in `|−⟩`.
//!
//! * Oracle: for each solution `s`, X on the register bits where `s` is 0,
//!   C^n-NOT from the whole register onto the ancilla, undo the X gates.
//!   The ancilla in `|−⟩` turns each C^n-NOT into a phase flip of `|s⟩`.
//! * Diffusion: `H^⊗n X^⊗n (H_n C^{n−1}NOT H_n) X^⊗n H^⊗n`, i.e. inversion
//!   about the mean up to a global phase.
//!
//! After `k` rounds every solution has probability `sin²((2k+1)θ/2) / t`
//! with `θ = 2·asin √(t/N)`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;

use crate::backend::Backend;
use crate::circuit::{Circuit, Op};
use crate::error::{SimError, SimResult};
use crate::gates::{CkNotGate, GateOp};
use crate::measurement::measure_sites;
use crate::mps::BitString;

#[derive(Clone, Debug, PartialEq)]
pub struct GroverSpec {
    n: usize,
    solutions: Vec<BitString>,
    iterations: usize,
    probe: BitString,
}

impl GroverSpec {
    /// Validates the solution set; iterations default to [`optimal_iterations`]
    /// and the probe to the lexicographically largest solution.
    pub fn new(n: usize, solutions: impl IntoIterator<Item = BitString>) -> SimResult<Self> {
        if n == 0 || n > 62 {
            return Err(SimError::InvalidGroverSpec(format!("register size {n} must be in 1..=62")));
        }
        let mut set = BTreeSet::new();
        for s in solutions {
            if s.len() != n {
                return Err(SimError::InvalidGroverSpec(format!("solution {s} does not have {n} bits")));
            }
            if !set.insert(s.clone()) {
                return Err(SimError::InvalidGroverSpec(format!("duplicate solution {s}")));
            }
        }
        let t = set.len();
        if t == 0 {
            return Err(SimError::InvalidGroverSpec("at least one solution is required".into()));
        }
        if (t as u64) >= (1u64 << n) {
            return Err(SimError::InvalidGroverSpec(format!("t = {t} must be smaller than N = 2^{n}")));
        }
        let solutions: Vec<BitString> = set.into_iter().collect();
        let probe = solutions.last().cloned().expect("nonempty");
        let mut spec = Self { n, solutions, iterations: 0, probe };
        spec.iterations = optimal_iterations(&spec);
        Ok(spec)
    }

    /// `t` distinct solutions; `|1…1⟩` is always among them, the rest are drawn from `rng`.
    pub fn with_random_solutions<R: Rng + ?Sized>(n: usize, t: usize, rng: &mut R) -> SimResult<Self> {
        if n == 0 || n > 62 || t == 0 || (t as u64) >= (1u64 << n) {
            return Err(SimError::InvalidGroverSpec(format!("cannot draw t = {t} solutions for n = {n}")));
        }
        let top = (1u64 << n) - 1;
        let mut set = BTreeSet::from([top]);
        while set.len() < t {
            set.insert(rng.random_range(0..=top));
        }
        Self::new(n, set.into_iter().map(|v| BitString::from_index(v as usize, n)))
    }

    pub fn with_iterations(mut self, k: usize) -> Self {
        self.iterations = k;
        self
    }

    pub fn with_probe(mut self, probe: BitString) -> SimResult<Self> {
        if !self.solutions.contains(&probe) {
            return Err(SimError::InvalidGroverSpec(format!("probe {probe} is not a solution")));
        }
        self.probe = probe;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Database size `N = 2^n`.
    pub fn size(&self) -> f64 {
        (self.n as f64).exp2()
    }

    pub fn t(&self) -> usize {
        self.solutions.len()
    }

    pub fn solutions(&self) -> &[BitString] {
        &self.solutions
    }

    pub fn is_solution(&self, bits: &BitString) -> bool {
        self.solutions.binary_search(bits).is_ok()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn probe(&self) -> &BitString {
        &self.probe
    }

    /// `θ = 2·asin √(t/N)`.
    pub fn theta(&self) -> f64 {
        2.0 * (self.t() as f64 / self.size()).sqrt().asin()
    }

    /// Qubits in the circuit, register plus ancilla.
    pub fn qubits(&self) -> usize {
        self.n + 1
    }
}

/// Probability of one fixed solution after `k` rounds: `sin²((2k+1)θ/2) / t`.
pub fn analytic_solution_probability(spec: &GroverSpec, k: usize) -> f64 {
    let s = ((2 * k + 1) as f64 * spec.theta() / 2.0).sin();
    s * s / spec.t() as f64
}

/// Probability of one fixed non-solution: `cos²((2k+1)θ/2) / (N − t)`.
pub fn analytic_nonsolution_probability(spec: &GroverSpec, k: usize) -> f64 {
    let c = ((2 * k + 1) as f64 * spec.theta() / 2.0).cos();
    c * c / (spec.size() - spec.t() as f64)
}

/// Per-basis-state probabilities along a run.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticTrace {
    pub solution_amplitude_sq: Vec<f64>,
    pub nonsolution_amplitude_sq: Vec<f64>,
}

pub fn analytic_trace(spec: &GroverSpec, max_k: usize) -> AnalyticTrace {
    AnalyticTrace {
        solution_amplitude_sq: (0..=max_k).map(|k| analytic_solution_probability(spec, k)).collect(),
        nonsolution_amplitude_sq: (0..=max_k).map(|k| analytic_nonsolution_probability(spec, k)).collect(),
    }
}

/// The `k` maximizing the solution probability over `0..=⌈π√(N/t)/4⌉ + 1`.
pub fn optimal_iterations(spec: &GroverSpec) -> usize {
    let window = (PI * (spec.size() / spec.t() as f64).sqrt() / 4.0).ceil() as usize + 1;
    let mut best = (0, f64::NEG_INFINITY);
    for k in 0..=window {
        let p = analytic_solution_probability(spec, k);
        if p > best.1 {
            best = (k, p);
        }
    }
    best.0
}

/// Register Hadamards and the ancilla prepared in `|−⟩`.
pub fn initialization_ops(spec: &GroverSpec) -> Vec<Op> {
    let anc = spec.n + 1;
    let mut ops: Vec<Op> = (1..=spec.n).map(|q| Op::Gate(GateOp::h(q))).collect();
    ops.push(Op::Gate(GateOp::x(anc)));
    ops.push(Op::Gate(GateOp::h(anc)));
    ops
}

/// One Grover round: oracle then diffusion.
pub fn grover_operator_ops(spec: &GroverSpec) -> Vec<Op> {
    let n = spec.n;
    let register: Vec<usize> = (1..=n).collect();
    let gate = |g: GateOp| Op::Gate(g);
    let mut ops = Vec::new();
    for s in &spec.solutions {
        let zeros: Vec<usize> = register.iter().copied().filter(|&q| s.bit(q) == 0).collect();
        ops.extend(zeros.iter().map(|&q| gate(GateOp::x(q))));
        ops.push(gate(GateOp::CkNot(CkNotGate::new(register.clone(), n + 1).expect("valid oracle gate"))));
        ops.extend(zeros.iter().map(|&q| gate(GateOp::x(q))));
    }
    ops.extend(register.iter().map(|&q| gate(GateOp::h(q))));
    ops.extend(register.iter().map(|&q| gate(GateOp::x(q))));
    ops.push(gate(GateOp::h(n)));
    if n == 1 {
        ops.push(gate(GateOp::x(1)));
    } else {
        ops.push(gate(GateOp::CkNot(CkNotGate::new(1..n, n).expect("valid diffusion gate"))));
    }
    ops.push(gate(GateOp::h(n)));
    ops.extend(register.iter().map(|&q| gate(GateOp::x(q))));
    ops.extend(register.iter().map(|&q| gate(GateOp::h(q))));
    ops
}

/// The full program: initialization, `spec.iterations()` rounds, then a
/// measurement of every register qubit.
pub fn build_grover_circuit(spec: &GroverSpec) -> Circuit {
    let mut ops = initialization_ops(spec);
    let round = grover_operator_ops(spec);
    for _ in 0..spec.iterations {
        ops.extend(round.iter().cloned());
    }
    ops.extend((1..=spec.n).map(Op::Measure));
    let mut c = Circuit::new(spec.qubits(), ops).expect("sites in range by construction");
    c.name = Some(format!("grover n={} t={} k={}", spec.n, spec.t(), spec.iterations));
    c
}

/// Register probability of `bits`, summed over the ancilla.
pub fn register_probability<B: Backend>(state: &B, bits: &BitString) -> SimResult<f64> {
    let p0 = state.amplitude(&bits.concat(&BitString::zeros(1)))?.norm_sqr();
    let p1 = state.amplitude(&bits.concat(&"1".parse()?))?.norm_sqr();
    Ok(p0 + p1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Register probability of the probed solution.
    pub prob: f64,
    /// Largest bond seen while executing this round (initialization for `k = 0`).
    pub max_bond: Option<usize>,
    /// Time since the start of initialization.
    pub elapsed_seconds: f64,
    /// Bond dimension between register and ancilla after the round.
    pub ancilla_bond: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub max_bond: Option<usize>,
    pub peak_memory_bytes: usize,
    /// One register readout per shot.
    pub measured: Vec<BitString>,
}

impl RunTrace {
    pub fn elapsed_seconds(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.elapsed_seconds)
    }
}

/// Executes `spec` from `initial` (the all-zero state on `n + 1` qubits),
/// recording after every round, then reads the register out `shots` times
/// from copies of the final state.
pub fn run_grover<B: Backend, R: Rng + ?Sized>(
    spec: &GroverSpec,
    initial: &B,
    shots: usize,
    rng: &mut R,
) -> SimResult<RunTrace> {
    if initial.qubits() != spec.qubits() {
        return Err(SimError::LengthMismatch { expected: spec.qubits(), found: initial.qubits() });
    }
    let start = Instant::now();
    let mut state = initial.clone();
    let mut peak = state.memory_bytes();
    let mut run_max: Option<usize> = state.max_bond();
    let mut records = Vec::with_capacity(spec.iterations + 1);

    let mut execute = |state: &mut B, ops: &[Op]| -> SimResult<Option<usize>> {
        let mut round_max = state.max_bond();
        for op in ops {
            if let Op::Gate(g) = op {
                state.apply(g)?;
            }
            round_max = round_max.max(state.max_bond());
            peak = peak.max(state.memory_bytes());
        }
        Ok(round_max)
    };
    let ancilla_bond = |state: &B| state.schmidt_ranks().map(|r| r.last().copied().unwrap_or(1));

    let init_max = execute(&mut state, &initialization_ops(spec))?;
    run_max = run_max.max(init_max);
    records.push(IterationRecord {
        k: 0,
        prob: register_probability(&state, &spec.probe)?,
        max_bond: init_max,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        ancilla_bond: ancilla_bond(&state),
    });
    let round = grover_operator_ops(spec);
    for k in 1..=spec.iterations {
        let round_max = execute(&mut state, &round)?;
        run_max = run_max.max(round_max);
        records.push(IterationRecord {
            k,
            prob: register_probability(&state, &spec.probe)?,
            max_bond: round_max,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            ancilla_bond: ancilla_bond(&state),
        });
    }
    let mut measured = Vec::with_capacity(shots);
    for _ in 0..shots {
        let mut copy = state.clone();
        let (bits, _) = measure_sites(&mut copy, 1..=spec.n, rng)?;
        measured.push(bits);
    }
    Ok(RunTrace { records, max_bond: run_max, peak_memory_bytes: peak, measured })
}
