use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use mpssim::{
    analytic_solution_probability, bench_point, fit_sqrt_n_log_n, parse_report, run_grover, run_shots, seeded_rng,
    BitString, DenseState, GroverSpec, MpsState, RunTrace, Severity, ShotResult, SimError, TruncationPolicy,
    DEFAULT_DENSE_CAP,
};
use serde_json::json;

use crate::output::{opt, Format, Sink, SCHEMA_VERSION};
use crate::CliError;

pub const DENSE_CAP_VAR: &str = "MPSSIM_DENSE_CAP";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Mps,
    Dense,
}

impl BackendKind {
    fn name(self) -> &'static str {
        match self {
            BackendKind::Mps => "mps",
            BackendKind::Dense => "dense",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct EngineArgs {
    /// Relative eigenvalue floor below which Schmidt values are dropped.
    #[arg(long, default_value_t = TruncationPolicy::DEFAULT_FLOOR)]
    pub floor: f64,
    /// Bond dimension cap; enables lossy compression.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_bond: Option<u64>,
}

impl EngineArgs {
    fn policy(&self) -> Result<TruncationPolicy, CliError> {
        TruncationPolicy::new(self.floor, self.max_bond.map(|m| m as usize)).map_err(|e| CliError::Input(e.to_string()))
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write results here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Circuit source file.
    pub file: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendKind::Mps)]
    pub backend: BackendKind,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    /// Defaults to the circuit's `# seed:` comment, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Emit max bond and norm after every step.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct GroverArgs {
    /// Search register size.
    #[arg(long)]
    pub n: usize,
    /// Comma-separated solution bit strings.
    #[arg(long, value_delimiter = ',', conflicts_with = "random_solutions", required_unless_present = "random_solutions")]
    pub solutions: Vec<String>,
    /// Draw this many solutions (always including 1…1).
    #[arg(long)]
    pub random_solutions: Option<usize>,
    /// Iteration count; defaults to the first maximum.
    #[arg(long)]
    pub k: Option<usize>,
    /// Solution whose probability is traced; defaults to the largest.
    #[arg(long)]
    pub probe: Option<String>,
    /// Add the closed-form probability column.
    #[arg(long)]
    pub analytic: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = BackendKind::Mps)]
    pub backend: BackendKind,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 8)]
    pub n_min: usize,
    #[arg(long, default_value_t = 20)]
    pub n_max: usize,
    /// Comma-separated solution counts.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    pub t: Vec<usize>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn dense_cap() -> Result<usize, CliError> {
    match std::env::var(DENSE_CAP_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Input(format!("{DENSE_CAP_VAR}={v:?} is not a qubit count"))),
        Err(_) => Ok(DEFAULT_DENSE_CAP),
    }
}

fn exec_err(e: SimError) -> CliError {
    match e {
        SimError::DenseCapExceeded { .. } => CliError::Input(e.to_string()),
        other => CliError::Exec(other.to_string()),
    }
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.file).map_err(|e| CliError::Io(format!("{}: {e}", args.file.display())))?;
    let report = parse_report(&text);
    let file = args.file.display();
    for d in &report.diagnostics {
        eprintln!("{file}:{d}");
    }
    let Some(circuit) = report.circuit else {
        let errors = report.diagnostics.iter().filter(|d| d.severity == Severity::Error).count();
        return Err(CliError::Input(format!("{file}: {errors} error(s)")));
    };
    let policy = args.engine.policy()?;
    let seed = args.seed.or(circuit.seed).unwrap_or(0);
    let mut rng = seeded_rng(seed);
    let shots = args.shots as usize;
    let results = match args.backend {
        BackendKind::Mps => {
            let init = MpsState::zeros(circuit.qubits()).map_err(exec_err)?.with_policy(policy);
            run_shots(&circuit, &init, shots, &mut rng, args.trace)
        }
        BackendKind::Dense => {
            let init = DenseState::zeros_capped(circuit.qubits(), dense_cap()?).map_err(exec_err)?;
            run_shots(&circuit, &init, shots, &mut rng, args.trace)
        }
    }
    .map_err(exec_err)?;

    let mut sink = Sink::open(args.output.out.as_deref(), args.output.format)?;
    let name = circuit.name.as_deref().unwrap_or("");
    match sink.format() {
        Format::Csv => {
            sink.comment(&format!(
                "mpssim run v{SCHEMA_VERSION} backend={} seed={seed} shots={shots} qubits={} name={name}",
                args.backend.name(),
                circuit.qubits()
            ))?;
            if args.trace {
                sink.row(["shot", "step", "op", "max_bond", "norm", "outcome"])?;
            } else {
                sink.row(["shot", "outcome"])?;
            }
            for (shot, res) in results.iter().enumerate() {
                write_shot_csv(&mut sink, shot, res, args.trace)?;
            }
        }
        Format::Jsonl => {
            sink.json(&json!({
                "schema": "mpssim.run",
                "version": SCHEMA_VERSION,
                "backend": args.backend.name(),
                "seed": seed,
                "shots": shots,
                "qubits": circuit.qubits(),
                "name": circuit.name,
            }))?;
            for (shot, res) in results.iter().enumerate() {
                let mut rec = json!({ "shot": shot, "outcome": res.bits.to_string() });
                if args.trace {
                    rec["trace"] = res
                        .trace
                        .iter()
                        .map(|s| json!({ "step": s.step, "op": s.op, "max_bond": s.max_bond, "norm": s.norm }))
                        .collect();
                }
                sink.json(&rec)?;
            }
        }
    }
    sink.finish()
}

/// Trace rows carry the outcome string measured so far.
fn write_shot_csv(sink: &mut Sink, shot: usize, res: &ShotResult, trace: bool) -> Result<(), CliError> {
    if !trace {
        return sink.row([shot.to_string(), res.bits.to_string()]);
    }
    let mut measured = 0;
    for step in &res.trace {
        measured += match step.op.as_str() {
            "measure_all" => res.bits.len() - measured,
            op if op.starts_with("measure ") => 1,
            _ => 0,
        };
        let so_far: String = res.bits.to_string().chars().take(measured).collect();
        sink.row([
            shot.to_string(),
            step.step.to_string(),
            step.op.clone(),
            opt(step.max_bond),
            step.norm.to_string(),
            so_far,
        ])?;
    }
    Ok(())
}

fn parse_bits(s: &str) -> Result<BitString, CliError> {
    s.trim().parse().map_err(|e: SimError| CliError::Input(format!("{s:?}: {e}")))
}

pub fn grover(args: &GroverArgs) -> Result<(), CliError> {
    let policy = args.engine.policy()?;
    let mut rng = seeded_rng(args.seed);
    let spec_err = |e: SimError| CliError::Input(e.to_string());
    let mut spec = match args.random_solutions {
        Some(t) => GroverSpec::with_random_solutions(args.n, t, &mut rng).map_err(spec_err)?,
        None => {
            let sols = args.solutions.iter().map(|s| parse_bits(s)).collect::<Result<Vec<_>, _>>()?;
            GroverSpec::new(args.n, sols).map_err(spec_err)?
        }
    };
    if let Some(k) = args.k {
        spec = spec.with_iterations(k);
    }
    if let Some(p) = &args.probe {
        spec = spec.with_probe(parse_bits(p)?).map_err(spec_err)?;
    }
    let shots = args.shots as usize;
    let trace = match args.backend {
        BackendKind::Mps => {
            let init = MpsState::zeros(spec.qubits()).map_err(exec_err)?.with_policy(policy);
            run_grover(&spec, &init, shots, &mut rng)
        }
        BackendKind::Dense => {
            let init = DenseState::zeros_capped(spec.qubits(), dense_cap()?).map_err(exec_err)?;
            run_grover(&spec, &init, shots, &mut rng)
        }
    }
    .map_err(exec_err)?;
    let mut sink = Sink::open(args.output.out.as_deref(), args.output.format)?;
    write_grover(&mut sink, args, &spec, &trace)?;
    sink.finish()
}

fn write_grover(sink: &mut Sink, args: &GroverArgs, spec: &GroverSpec, trace: &RunTrace) -> Result<(), CliError> {
    let solutions: Vec<String> = spec.solutions().iter().map(|s| s.to_string()).collect();
    match sink.format() {
        Format::Csv => {
            sink.comment(&format!(
                "mpssim grover v{SCHEMA_VERSION} backend={} seed={} n={} t={} k={} probe={} solutions={}",
                args.backend.name(),
                args.seed,
                spec.n(),
                spec.t(),
                spec.iterations(),
                spec.probe(),
                solutions.join(";")
            ))?;
            let mut header = vec!["k", "prob", "max_bond", "elapsed_seconds"];
            if args.analytic {
                header.push("analytic");
            }
            sink.row(header)?;
            for rec in &trace.records {
                let mut row =
                    vec![rec.k.to_string(), rec.prob.to_string(), opt(rec.max_bond), rec.elapsed_seconds.to_string()];
                if args.analytic {
                    row.push(analytic_solution_probability(spec, rec.k).to_string());
                }
                sink.row(row)?;
            }
            let hits = trace.measured.iter().filter(|b| spec.is_solution(b)).count();
            sink.comment(&format!(
                "max_bond={} peak_memory_bytes={} solution_hits={hits}/{}",
                opt(trace.max_bond),
                trace.peak_memory_bytes,
                trace.measured.len()
            ))?;
            for (shot, bits) in trace.measured.iter().enumerate() {
                sink.comment(&format!("shot {shot}: {bits}"))?;
            }
        }
        Format::Jsonl => {
            sink.json(&json!({
                "schema": "mpssim.grover",
                "version": SCHEMA_VERSION,
                "backend": args.backend.name(),
                "seed": args.seed,
                "n": spec.n(),
                "t": spec.t(),
                "k": spec.iterations(),
                "probe": spec.probe().to_string(),
                "solutions": solutions,
            }))?;
            for rec in &trace.records {
                let mut v = json!({
                    "k": rec.k,
                    "prob": rec.prob,
                    "max_bond": rec.max_bond,
                    "elapsed_seconds": rec.elapsed_seconds,
                });
                if args.analytic {
                    v["analytic"] = json!(analytic_solution_probability(spec, rec.k));
                }
                sink.json(&v)?;
            }
            let measured: Vec<String> = trace.measured.iter().map(|b| b.to_string()).collect();
            sink.json(&json!({
                "max_bond": trace.max_bond,
                "peak_memory_bytes": trace.peak_memory_bytes,
                "measured": measured,
            }))?;
        }
    }
    Ok(())
}

pub fn bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.n_min == 0 || args.n_min > args.n_max {
        return Err(CliError::Input(format!("empty range --n-min {} --n-max {}", args.n_min, args.n_max)));
    }
    if args.t.is_empty() || args.t.contains(&0) {
        return Err(CliError::Input("--t needs positive solution counts".into()));
    }
    let policy = args.engine.policy()?;
    let mut sink = Sink::open(args.output.out.as_deref(), args.output.format)?;
    let ts: Vec<String> = args.t.iter().map(|t| t.to_string()).collect();
    match sink.format() {
        Format::Csv => {
            sink.comment(&format!(
                "mpssim bench v{SCHEMA_VERSION} seed={} repeats={} floor={:e} max_bond={} t={}",
                args.seed,
                args.repeats,
                args.engine.floor,
                args.engine.max_bond.map(|m| m.to_string()).unwrap_or_default(),
                ts.join(";")
            ))?;
            sink.row(["n", "t", "k_max", "time_s", "max_bond", "mem_bytes"])?;
        }
        Format::Jsonl => sink.json(&json!({
            "schema": "mpssim.bench",
            "version": SCHEMA_VERSION,
            "seed": args.seed,
            "repeats": args.repeats,
            "t": args.t,
        }))?,
    }
    let mut rows = Vec::new();
    for n in args.n_min..=args.n_max {
        for &t in &args.t {
            match bench_point(n, t, args.repeats as usize, policy, args.seed) {
                Ok(row) => {
                    match sink.format() {
                        Format::Csv => sink.row([
                            row.n.to_string(),
                            row.t.to_string(),
                            row.k_max.to_string(),
                            row.time_s.to_string(),
                            row.max_bond.to_string(),
                            row.mem_bytes.to_string(),
                        ])?,
                        Format::Jsonl => sink.json(&json!({
                            "n": row.n, "t": row.t, "k_max": row.k_max, "time_s": row.time_s,
                            "max_bond": row.max_bond, "mem_bytes": row.mem_bytes,
                        }))?,
                    }
                    rows.push(row);
                }
                Err(e) => {
                    eprintln!("bench n={n} t={t}: {e}");
                    match sink.format() {
                        Format::Csv => sink.comment(&format!("error n={n} t={t}: {e}"))?,
                        Format::Jsonl => sink.json(&json!({ "n": n, "t": t, "error": e.to_string() }))?,
                    }
                }
            }
        }
    }
    for &t in &args.t {
        let Some(fit) = fit_sqrt_n_log_n(&rows, t) else { continue };
        let ratios: Vec<String> = fit.residual_ratios.iter().map(|(n, q)| format!("{n}:{q:.3}")).collect();
        match sink.format() {
            Format::Csv => sink.comment(&format!(
                "fit t={t} time=A*sqrt(N)*log2(N) A={:e} worst_factor={:.3} ratios={}",
                fit.a,
                fit.worst_factor(),
                ratios.join(" ")
            ))?,
            Format::Jsonl => sink.json(&json!({
                "fit": { "t": t, "a": fit.a, "worst_factor": fit.worst_factor(), "ratios": fit.residual_ratios },
            }))?,
        }
    }
    sink.finish()
}
