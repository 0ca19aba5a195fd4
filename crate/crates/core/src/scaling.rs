//! Timing sweeps of Grover runs over `(n, t)` and the `A·√N·log₂N` fit.

use crate::error::SimResult;
use crate::grover::{run_grover, GroverSpec};
use crate::measurement::seeded_rng;
use crate::mps::{MpsState, TruncationPolicy};

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub t: usize,
    pub k_max: usize,
    /// Median wall time of a run from `k = 0` to `k_max`.
    pub time_s: f64,
    pub max_bond: usize,
    /// Peak size of the site tensors during the run.
    pub mem_bytes: usize,
}

/// One grid point: a discarded warm-up run, then the median of `repeats` runs.
/// Solutions always contain `|1…1⟩`; the others come from `seed`.
pub fn bench_point(n: usize, t: usize, repeats: usize, policy: TruncationPolicy, seed: u64) -> SimResult<BenchRow> {
    let mut rng = seeded_rng(seed ^ ((n as u64) << 32) ^ t as u64);
    let spec = GroverSpec::with_random_solutions(n, t, &mut rng)?;
    let initial = MpsState::zeros(spec.qubits())?.with_policy(policy);
    run_grover(&spec, &initial, 0, &mut rng)?;
    let mut times = Vec::with_capacity(repeats.max(1));
    let mut last = None;
    for _ in 0..repeats.max(1) {
        let trace = run_grover(&spec, &initial, 0, &mut rng)?;
        times.push(trace.elapsed_seconds());
        last = Some(trace);
    }
    let trace = last.expect("at least one repeat");
    Ok(BenchRow {
        n,
        t,
        k_max: spec.iterations(),
        time_s: median(&mut times),
        max_bond: trace.max_bond.unwrap_or(1),
        mem_bytes: trace.peak_memory_bytes,
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

/// `√N · log₂N` for `N = 2^n`.
pub fn sqrt_n_log_n(n: usize) -> f64 {
    (n as f64 / 2.0).exp2() * n as f64
}

/// Fit of `time ≈ A·√N·log₂N` for one `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub t: usize,
    pub a: f64,
    /// `(n, measured / fitted)` per row.
    pub residual_ratios: Vec<(usize, f64)>,
}

impl ScalingFit {
    /// Largest of `ratio` and `1/ratio` over all rows.
    pub fn worst_factor(&self) -> f64 {
        self.residual_ratios.iter().map(|&(_, r)| r.max(1.0 / r)).fold(1.0, f64::max)
    }
}

/// Least squares in log space, so `A` is the geometric mean of `time / (√N log₂N)`.
pub fn fit_sqrt_n_log_n(rows: &[BenchRow], t: usize) -> Option<ScalingFit> {
    let pts: Vec<&BenchRow> = rows.iter().filter(|r| r.t == t && r.time_s > 0.0).collect();
    if pts.is_empty() {
        return None;
    }
    let log_a = pts.iter().map(|r| (r.time_s / sqrt_n_log_n(r.n)).ln()).sum::<f64>() / pts.len() as f64;
    let a = log_a.exp();
    let residual_ratios = pts.iter().map(|r| (r.n, r.time_s / (a * sqrt_n_log_n(r.n)))).collect();
    Some(ScalingFit { t, a, residual_ratios })
}
