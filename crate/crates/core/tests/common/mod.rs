//! Random inputs, dense comparisons and property checks shared by the
//! integration suites and the acceptance runner.
#![allow(dead_code)]

use mpssim::{
    analytic_solution_probability, compress_with, inner_product, measure_qubit, optimal_iterations, parse, render,
    run_grover, BitString, CMatrix, CkNotGate, Circuit, Complex64 as C64, DenseState, EnvCache, GateOp, GroverSpec,
    MpsState, Op, SimRng, SingleQubitGate, SiteProjector, SiteTensor, SumMechanics, SumOfMps, TruncationPolicy,
    TwoQubitGate,
};
use mpssim::measurement::expectation_n;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

pub fn random_c64<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_c64(rng))
}

/// Haar-ish unitary from the QR factor of a random complex matrix.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    random_matrix(dim, dim, rng).qr().q()
}

pub fn random_single<R: Rng>(rng: &mut R) -> SingleQubitGate {
    let u = random_unitary(2, rng);
    SingleQubitGate::new([[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]])
}

/// Normalized random chain with bonds up to `max_bond`, never exceeding the
/// largest rank a cut can carry.
pub fn random_mps<R: Rng>(len: usize, max_bond: usize, rng: &mut R) -> MpsState {
    let bonds: Vec<usize> = (0..=len)
        .map(|cut| {
            if cut == 0 || cut == len {
                return 1;
            }
            let cap = 1usize << cut.min(len - cut).min(10);
            rng.random_range(1..=max_bond.min(cap))
        })
        .collect();
    let sites = (0..len)
        .map(|k| {
            let (l, r) = (bonds[k], bonds[k + 1]);
            SiteTensor::new(k + 1, random_matrix(l, r, rng), random_matrix(l, r, rng)).unwrap()
        })
        .collect();
    let mut state = MpsState::from_sites(sites, TruncationPolicy::default()).unwrap();
    state.normalize();
    state
}

pub fn pick_distinct<R: Rng>(len: usize, count: usize, rng: &mut R) -> Vec<usize> {
    let mut sites: Vec<usize> = (1..=len).collect();
    sites.shuffle(rng);
    sites.truncate(count);
    sites
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateKind {
    H,
    X,
    U,
    TwoAdjacent,
    TwoDistant,
    CkNot,
}

impl GateKind {
    pub const ALL: [GateKind; 6] =
        [GateKind::H, GateKind::X, GateKind::U, GateKind::TwoAdjacent, GateKind::TwoDistant, GateKind::CkNot];

    pub fn available(self, len: usize) -> bool {
        match self {
            GateKind::TwoAdjacent | GateKind::CkNot => len >= 2,
            GateKind::TwoDistant => len >= 3,
            _ => true,
        }
    }
}

pub fn random_gate_of<R: Rng>(kind: GateKind, len: usize, rng: &mut R) -> GateOp {
    match kind {
        GateKind::H => GateOp::h(rng.random_range(1..=len)),
        GateKind::X => GateOp::x(rng.random_range(1..=len)),
        GateKind::U => GateOp::Single { site: rng.random_range(1..=len), gate: random_single(rng) },
        GateKind::TwoAdjacent => {
            let j = rng.random_range(1..len);
            let (a, b) = if rng.random::<bool>() { (j, j + 1) } else { (j + 1, j) };
            GateOp::Two(TwoQubitGate::new(a, b, random_unitary(4, rng)).unwrap())
        }
        GateKind::TwoDistant => {
            let (a, b) = loop {
                let s = pick_distinct(len, 2, rng);
                if s[0].abs_diff(s[1]) > 1 {
                    break (s[0], s[1]);
                }
            };
            GateOp::Two(TwoQubitGate::new(a, b, random_unitary(4, rng)).unwrap())
        }
        GateKind::CkNot => {
            let k = rng.random_range(1..len);
            let mut sites = pick_distinct(len, k + 1, rng);
            let target = sites.pop().unwrap();
            GateOp::CkNot(CkNotGate::new(sites, target).unwrap())
        }
    }
}

pub fn random_unitary_gate<R: Rng>(len: usize, rng: &mut R) -> GateOp {
    let kinds: Vec<GateKind> = GateKind::ALL.into_iter().filter(|k| k.available(len)).collect();
    let kind = kinds[rng.random_range(0..kinds.len())];
    random_gate_of(kind, len, rng)
}

/// A projector whose outcome carries at least `min_prob` of the weight.
pub fn likely_projector<R: Rng>(dense: &DenseState, min_prob: f64, rng: &mut R) -> SiteProjector {
    let site = rng.random_range(1..=dense.qubits());
    let (p0, p1) = dense.measure_probabilities(site).unwrap();
    let outcome = match (p0 >= min_prob, p1 >= min_prob) {
        (true, true) => u8::from(rng.random::<bool>()),
        (true, false) => 0,
        _ => 1,
    };
    SiteProjector::new(site, outcome, true).unwrap()
}

pub fn dense_of(state: &MpsState) -> DenseState {
    DenseState::from_amplitudes(state.to_dense().unwrap()).unwrap()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn dense_norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// `|⟨a|b⟩|² / (‖a‖²‖b‖²)`.
pub fn fidelity(a: &[C64], b: &[C64]) -> f64 {
    let overlap: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    overlap.norm_sqr() / (dense_norm_sqr(a) * dense_norm_sqr(b))
}

/// Numerical Schmidt ranks of a dense vector at every interior cut.
pub fn dense_schmidt_ranks(amps: &[C64], len: usize) -> Vec<usize> {
    (1..len)
        .map(|cut| {
            let rows = 1usize << cut;
            let cols = 1usize << (len - cut);
            let m = CMatrix::from_fn(rows, cols, |r, c| amps[r * cols + c]);
            let sv = m.singular_values();
            let top = sv.max();
            sv.iter().filter(|&&s| s * s > 1e-12 * top * top).count().max(1)
        })
        .collect()
}

/// Random sum of up to three random chains.
pub fn random_sum<R: Rng>(len: usize, rng: &mut R) -> SumOfMps {
    let terms = rng.random_range(1..=3);
    SumOfMps::new((0..terms).map(|_| (random_c64(rng), random_mps(len, 4, rng))).collect()).unwrap()
}

pub fn random_circuit<R: Rng>(len: usize, gates: usize, rng: &mut R) -> Circuit {
    let mut ops = Vec::with_capacity(gates + 1);
    for _ in 0..gates {
        let op = match rng.random_range(0..10) {
            0 => Op::Gate(GateOp::Projector(
                SiteProjector::new(rng.random_range(1..=len), rng.random_range(0..2), true).unwrap(),
            )),
            1 => Op::Measure(rng.random_range(1..=len)),
            _ => Op::Gate(random_unitary_gate(len, rng)),
        };
        ops.push(op);
    }
    if rng.random::<bool>() {
        ops.push(Op::MeasureAll);
    }
    let mut c = Circuit::new(len, ops).unwrap();
    if rng.random::<bool>() {
        c.name = Some(format!("random-{len}"));
        c.seed = Some(rng.random());
    }
    c
}

// ---- properties ----

pub fn check_linearity(seed: u64, len: usize) -> Check {
    let mut r = rng(seed);
    let a = random_mps(len, 3, &mut r);
    let b = random_mps(len, 3, &mut r);
    let d = random_mps(len, 3, &mut r);
    let (alpha, beta) = (random_c64(&mut r), random_c64(&mut r));
    let sum = SumOfMps::new(vec![(alpha, b.clone()), (beta, d.clone())]).unwrap();
    let combo = MpsState::from_sites(sum.to_block_chain(), TruncationPolicy::default()).unwrap();
    let ab = inner_product(&a, &b).unwrap();
    let ad = inner_product(&a, &d).unwrap();
    let right = inner_product(&a, &combo).unwrap();
    ensure!((right - (alpha * ab + beta * ad)).norm() < 1e-12, "linearity off by {}", (right - (alpha * ab + beta * ad)).norm());
    let left = inner_product(&combo, &a).unwrap();
    let expected = alpha.conj() * ab.conj() + beta.conj() * ad.conj();
    ensure!((left - expected).norm() < 1e-12, "conjugate linearity off by {}", (left - expected).norm());
    Ok(())
}

pub fn check_compress_fidelity(seed: u64, len: usize, mechanics: SumMechanics) -> Check {
    let mut r = rng(seed);
    let sum = random_sum(len, &mut r);
    let target = sum.to_dense().unwrap();
    if dense_norm_sqr(&target) < 1e-20 {
        return Ok(());
    }
    let (out, spectra) = compress_with(&sum, TruncationPolicy::default(), mechanics).map_err(|e| e.to_string())?;
    let f = fidelity(&out.to_dense().unwrap(), &target);
    ensure!((f - 1.0).abs() < 1e-10, "fidelity {f} with {mechanics:?}");
    ensure!(spectra.len() + 1 == len, "expected {} spectra, got {}", len - 1, spectra.len());
    ensure!(out.schmidt_ranks() == dense_schmidt_ranks(&target, len), "non-minimal ranks {:?}", out.bond_dims());
    Ok(())
}

pub fn check_spectrum_trace(seed: u64, len: usize) -> Check {
    let mut r = rng(seed);
    let sum = random_sum(len, &mut r);
    let norm = dense_norm_sqr(&sum.to_dense().unwrap()).sqrt();
    if norm < 1e-10 {
        return Ok(());
    }
    let scaled =
        SumOfMps::new(sum.terms().iter().map(|(c, s)| (c / norm, s.clone())).collect()).unwrap();
    for mechanics in [SumMechanics::Block, SumMechanics::PerTerm] {
        let (_, spectra) = compress_with(&scaled, TruncationPolicy::default(), mechanics).map_err(|e| e.to_string())?;
        for s in &spectra {
            ensure!((s.trace() - 1.0).abs() < 1e-10, "cut {} trace {}", s.cut, s.trace());
            ensure!(s.eigenvalues.iter().all(|&l| l >= 0.0), "negative eigenvalue at cut {}", s.cut);
            ensure!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]), "unsorted spectrum at cut {}", s.cut);
            let top = s.eigenvalues[0];
            let above = s.eigenvalues.iter().filter(|&&l| l > 1e-12 * top).count().max(1);
            ensure!(s.kept_rank == above, "cut {} kept {} of {above}", s.cut, s.kept_rank);
        }
    }
    Ok(())
}

/// `X_α` recomputed by enumerating every suffix bit pattern.
fn brute_right_env(ket: &MpsState, bra: &MpsState, alpha: usize) -> CMatrix {
    let len = ket.len();
    if alpha == len + 1 {
        return CMatrix::identity(1, 1);
    }
    let kl = ket.site(alpha).unwrap().left_dim();
    let bl = bra.site(alpha).unwrap().left_dim();
    let mut x = CMatrix::zeros(kl, bl);
    let width = len - alpha + 1;
    for idx in 0..1usize << width {
        let suffix = BitString::from_index(idx, width);
        let mut kv = CMatrix::identity(kl, kl);
        let mut bv = CMatrix::identity(bl, bl);
        for (off, &bit) in suffix.bits().iter().enumerate() {
            kv *= ket.site(alpha + off).unwrap().slice(bit as usize);
            bv *= bra.site(alpha + off).unwrap().slice(bit as usize);
        }
        x += &kv * bv.adjoint();
    }
    x
}

pub fn check_env_cache(seed: u64, len: usize) -> Check {
    let mut r = rng(seed);
    let ket = random_mps(len, 4, &mut r);
    let bra = random_mps(len, 4, &mut r);
    let cache = EnvCache::new(&bra, &ket).unwrap();
    let direct = inner_product(&bra, &ket).unwrap();
    let dense: C64 = bra.to_dense().unwrap().iter().zip(ket.to_dense().unwrap()).map(|(b, k)| b.conj() * k).sum();
    ensure!((cache.overlap() - direct).norm() < 1e-12, "cache vs direct {}", (cache.overlap() - direct).norm());
    ensure!((direct - dense).norm() < 1e-12, "direct vs dense {}", (direct - dense).norm());
    for alpha in 1..=len + 1 {
        let brute = brute_right_env(&ket, &bra, alpha);
        let diff = (cache.right_env(alpha) - &brute).norm();
        ensure!(diff < 1e-12, "X_{alpha} differs by {diff}");
    }
    for alpha in 1..=len {
        for i in 0..2 {
            let y = ket.site(alpha).unwrap().slice(i) * cache.right_env(alpha + 1);
            ensure!((cache.partial_row(alpha, i) - y).norm() < 1e-12, "Y_{alpha}^{i} inconsistent");
        }
    }
    Ok(())
}

pub fn check_rank_minimality(seed: u64, left: usize, right: usize) -> Check {
    let mut r = rng(seed);
    let a = random_mps(left, 4, &mut r);
    let b = random_mps(right, 4, &mut r);
    let mut sites: Vec<SiteTensor> = a.sites().to_vec();
    sites.extend(b.sites().iter().cloned());
    let product = MpsState::from_sites(sites, TruncationPolicy::default()).unwrap();
    let dense = product.to_dense().unwrap();
    let from_dense = MpsState::from_dense(&dense, TruncationPolicy::default()).map_err(|e| e.to_string())?;
    ensure!(from_dense.bond_dims()[left] == 1, "from_dense bond at separable cut is {}", from_dense.bond_dims()[left]);
    let doubled = SumOfMps::new(vec![(C64::new(0.5, 0.0), product.clone()), (C64::new(0.0, 0.5), product)]).unwrap();
    for mechanics in [SumMechanics::Block, SumMechanics::PerTerm] {
        let (out, spectra) = compress_with(&doubled, TruncationPolicy::default(), mechanics).map_err(|e| e.to_string())?;
        ensure!(spectra[left - 1].kept_rank == 1, "{mechanics:?} kept {} at separable cut", spectra[left - 1].kept_rank);
        ensure!(out.bond_dims()[left] == 1, "{mechanics:?} output bond {}", out.bond_dims()[left]);
    }
    Ok(())
}

pub fn check_norm_conservation(seed: u64, len: usize, kind: GateKind) -> Check {
    if !kind.available(len) {
        return Ok(());
    }
    let mut r = rng(seed);
    let mut state = random_mps(len, 4, &mut r);
    let before = state.norm_sqr().sqrt();
    let gate = random_gate_of(kind, len, &mut r);
    state.apply(&gate).map_err(|e| e.to_string())?;
    let after = state.norm_sqr().sqrt();
    ensure!((after - before).abs() < 1e-12, "{gate}: norm {before} -> {after}");
    Ok(())
}

pub fn check_dense_equivalence(seed: u64, len: usize, kind: GateKind) -> Check {
    if !kind.available(len) {
        return Ok(());
    }
    let mut r = rng(seed);
    let mut state = random_mps(len, 4, &mut r);
    let mut dense = dense_of(&state);
    let gate = random_gate_of(kind, len, &mut r);
    let bonds_in = state.bond_dims();
    state.apply(&gate).map_err(|e| e.to_string())?;
    dense.apply(&gate).map_err(|e| e.to_string())?;
    let mps_amps = state.to_dense().unwrap();
    let diff = max_abs_diff(&mps_amps, dense.amplitudes());
    ensure!(diff < 1e-10, "{gate}: max amplitude difference {diff}");
    if kind == GateKind::CkNot {
        let exact = dense_schmidt_ranks(&mps_amps, len);
        ensure!(state.schmidt_ranks() == exact, "{gate}: ranks {:?} vs exact {exact:?}", state.schmidt_ranks());
        for (cut, (&out, &inp)) in state.bond_dims().iter().zip(&bonds_in).enumerate() {
            ensure!(out <= 3 * inp, "{gate}: bond {cut} grew {inp} -> {out}");
        }
    }
    Ok(())
}

pub fn check_cknot_involution(seed: u64, len: usize) -> Check {
    if len < 2 {
        return Ok(());
    }
    let mut r = rng(seed);
    let original = random_mps(len, 4, &mut r);
    let gate = random_gate_of(GateKind::CkNot, len, &mut r);
    let mut state = original.clone();
    state.apply(&gate).map_err(|e| e.to_string())?;
    state.apply(&gate).map_err(|e| e.to_string())?;
    let f = fidelity(&state.to_dense().unwrap(), &original.to_dense().unwrap());
    ensure!((f - 1.0).abs() < 1e-10, "{gate} twice: fidelity {f}");
    Ok(())
}

pub fn check_projector_idempotence(seed: u64, len: usize) -> Check {
    let mut r = rng(seed);
    let mut state = random_mps(len, 4, &mut r);
    let proj = likely_projector(&dense_of(&state), 0.05, &mut r);
    state.apply_projector(&proj).map_err(|e| e.to_string())?;
    let once = state.to_dense().unwrap();
    let weight = state.apply_projector(&proj).map_err(|e| e.to_string())?;
    ensure!((weight - 1.0).abs() < 1e-12, "second projection weight {weight}");
    let diff = max_abs_diff(&state.to_dense().unwrap(), &once);
    ensure!(diff < 1e-12, "second projection moved amplitudes by {diff}");
    ensure!((state.norm_sqr() - 1.0).abs() < 1e-12, "projected norm {}", state.norm_sqr());
    Ok(())
}

pub fn check_collapse(seed: u64, len: usize) -> Check {
    let mut r = rng(seed);
    let mut state = random_mps(len, 4, &mut r);
    let dense = dense_of(&state);
    let site = r.random_range(1..=len);
    let (_, p1) = dense.measure_probabilities(site).unwrap();
    let rec = measure_qubit(&mut state, site, &mut r).map_err(|e| e.to_string())?;
    ensure!((rec.expectation - p1).abs() < 1e-12, "expectation {} vs dense {p1}", rec.expectation);
    if let Some(draw) = rec.r {
        ensure!((rec.outcome == 1) == (rec.expectation > draw), "selection rule violated");
    }
    let expected_weight = if rec.outcome == 1 { rec.expectation } else { 1.0 - rec.expectation };
    ensure!((rec.weight - expected_weight).abs() < 1e-10, "weight {} vs {expected_weight}", rec.weight);
    let after = expectation_n(&state, site).unwrap();
    ensure!((after - f64::from(rec.outcome)).abs() < 1e-12, "post-collapse expectation {after}");
    ensure!((state.norm_sqr() - 1.0).abs() < 1e-12, "post-collapse norm {}", state.norm_sqr());
    Ok(())
}

/// Exact joint distribution of sequential measurement in a random site
/// order, compared against `|amplitude|²`.
pub fn check_order_independence(seed: u64, len: usize) -> Check {
    let mut r = rng(seed);
    let state = random_mps(len, 4, &mut r);
    let dense = state.to_dense().unwrap();
    let mut order: Vec<usize> = (1..=len).collect();
    order.shuffle(&mut r);
    for (idx, amp) in dense.iter().enumerate() {
        let bits = BitString::from_index(idx, len);
        let mut s = state.clone();
        let mut prob = 1.0;
        for &site in &order {
            let p1 = expectation_n(&s, site).unwrap();
            let b = bits.bit(site);
            let p = if b == 1 { p1 } else { 1.0 - p1 };
            if p < 1e-14 {
                prob = 0.0;
                break;
            }
            prob *= p;
            s.apply_projector(&SiteProjector::new(site, b, true).unwrap()).map_err(|e| e.to_string())?;
        }
        let expected = amp.norm_sqr();
        ensure!((prob - expected).abs() < 1e-10, "P({bits}) in order {order:?}: {prob} vs {expected}");
    }
    Ok(())
}

pub fn check_parser_round_trip(seed: u64, len: usize, gates: usize) -> Check {
    let mut r = rng(seed);
    let circuit = random_circuit(len, gates, &mut r);
    let text = render(&circuit);
    let back = parse(&text).map_err(|d| format!("{d:?}\n{text}"))?;
    ensure!(back == circuit, "round trip changed the circuit:\n{text}");
    Ok(())
}

pub fn check_grover_round_trip(n: usize, t: usize, seed: u64) -> Check {
    let spec = GroverSpec::with_random_solutions(n, t, &mut rng(seed)).map_err(|e| e.to_string())?;
    let circuit = mpssim::build_grover_circuit(&spec);
    let back = parse(&render(&circuit)).map_err(|d| format!("{d:?}"))?;
    ensure!(back == circuit, "grover circuit n={n} t={t} did not round trip");
    Ok(())
}

pub fn check_dense_round_trip(seed: u64, len: usize) -> Check {
    let mut r = rng(seed);
    let amps: Vec<C64> = (0..1usize << len).map(|_| random_c64(&mut r)).collect();
    let state = MpsState::from_dense(&amps, TruncationPolicy::default()).map_err(|e| e.to_string())?;
    let diff = max_abs_diff(&state.to_dense().unwrap(), &amps);
    ensure!(diff < 1e-10, "from_dense/to_dense differs by {diff}");
    Ok(())
}

/// Every round up to the first maximum follows the closed form; bonds stay
/// within `t + 1` and the ancilla stays unentangled.
pub fn check_grover_trace(n: usize, t: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let spec = GroverSpec::with_random_solutions(n, t, &mut r).map_err(|e| e.to_string())?;
    let spec = spec.clone().with_iterations(optimal_iterations(&spec));
    let initial = MpsState::zeros(spec.qubits()).unwrap();
    let trace = run_grover(&spec, &initial, 0, &mut r).map_err(|e| e.to_string())?;
    for rec in &trace.records {
        let expected = analytic_solution_probability(&spec, rec.k);
        ensure!((rec.prob - expected).abs() < 1e-10, "n={n} t={t} k={}: {} vs {expected}", rec.k, rec.prob);
        ensure!(rec.ancilla_bond == Some(1), "n={n} t={t} k={}: ancilla bond {:?}", rec.k, rec.ancilla_bond);
    }
    let m = trace.max_bond.unwrap();
    ensure!(m <= t + 1, "n={n} t={t}: max bond {m}");
    Ok(())
}

pub fn check_ancilla_minus(n: usize, t: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let spec = GroverSpec::with_random_solutions(n, t, &mut r).map_err(|e| e.to_string())?;
    let circuit = mpssim::build_grover_circuit(&spec);
    let mut state = MpsState::zeros(spec.qubits()).unwrap();
    for op in circuit.ops() {
        if let Op::Gate(g) = op {
            state.apply(g).map_err(|e| e.to_string())?;
        }
    }
    let amps = state.to_dense().unwrap();
    for pair in amps.chunks(2) {
        ensure!((pair[0] + pair[1]).norm() < 1e-12, "ancilla not in |−⟩: {pair:?}");
    }
    Ok(())
}
