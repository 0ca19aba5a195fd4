//! Workloads shared by the engine benchmarks.

use mpssim::grover::{grover_operator_ops, initialization_ops};
use mpssim::{seeded_rng, CMatrix, Complex64, GroverSpec, MpsState, Op, SiteTensor, SumOfMps, TruncationPolicy};
use rand::Rng;

/// Grover state on `n + 1` qubits after `k` rounds, with `t` solutions.
pub fn grover_state(n: usize, t: usize, k: usize) -> (GroverSpec, MpsState) {
    let spec = GroverSpec::with_random_solutions(n, t, &mut seeded_rng(n as u64)).expect("valid grid point");
    let mut state = MpsState::zeros(spec.qubits()).expect("nonempty");
    apply_ops(&mut state, &initialization_ops(&spec));
    let round = grover_operator_ops(&spec);
    for _ in 0..k {
        apply_ops(&mut state, &round);
    }
    (spec, state)
}

pub fn apply_ops(state: &mut MpsState, ops: &[Op]) {
    for op in ops {
        if let Op::Gate(g) = op {
            state.apply(g).expect("gate applies");
        }
    }
}

/// Normalized chain with every interior bond at `min(bond, 2^cut)`.
pub fn random_state(len: usize, bond: usize, seed: u64) -> MpsState {
    let mut rng = seeded_rng(seed);
    let dims: Vec<usize> =
        (0..=len).map(|cut| if cut == 0 || cut == len { 1 } else { bond.min(1 << cut.min(len - cut).min(20)) }).collect();
    let mut draw = |r: usize, c: usize| {
        CMatrix::from_fn(r, c, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    };
    let sites = (0..len)
        .map(|k| {
            let (l, r) = (dims[k], dims[k + 1]);
            SiteTensor::new(k + 1, draw(l, r), draw(l, r)).expect("shapes agree")
        })
        .collect();
    let mut state = MpsState::from_sites(sites, TruncationPolicy::default()).expect("bonds agree");
    state.normalize();
    state
}

/// `terms` random chains with equal weight.
pub fn random_sum(len: usize, bond: usize, terms: usize, seed: u64) -> SumOfMps {
    SumOfMps::new((0..terms).map(|i| (Complex64::new(1.0, 0.0), random_state(len, bond, seed + i as u64))).collect())
        .expect("nonempty sum")
}
