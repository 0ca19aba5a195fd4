//! Plain-text circuit programs (`.qc`).
//!
//! ```text
//! # qcfmt 1
//! qubits 2
//! h 1
//! cknot 1 -> 2
//! measure_all
//! ```
//!
//! One statement per line, `#` starts a comment, keywords are
//! case-insensitive and sites are 1-based. Statements:
//!
//! | statement                          | meaning                                  |
//! |------------------------------------|------------------------------------------|
//! | `qubits L`                         | header, first statement                  |
//! | `h q`, `x q`                       | Hadamard, NOT                             |
//! | `u q a_re a_im b_re b_im … d_im`   | arbitrary 2×2 `[[a,b],[c,d]]`             |
//! | `g2 q1 q2 <16 re/im pairs>`         | 4×4 operator on `(q1, q2)`, row-major     |
//! | `cknot c1 [c2 …] -> t`             | generalized Toffoli                       |
//! | `proj q b`                         | renormalized projector onto `|b⟩`         |
//! | `measure q`, `measure_all`         | projective measurement                    |
//!
//! Comments of the form `# name: …` and `# seed: …` carry circuit metadata.
//! Parsing never stops at the first error; every malformed line yields one
//! diagnostic.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{SimError, SimResult};
use crate::gates::{CkNotGate, GateLabel, GateOp, SingleQubitGate, SiteProjector, TwoQubitGate};
use crate::linalg::CMatrix;

pub const FORMAT_VERSION: u32 = 1;

/// One program step.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Gate(GateOp),
    Measure(usize),
    MeasureAll,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    qubits: usize,
    ops: Vec<Op>,
    pub name: Option<String>,
    pub seed: Option<u64>,
}

impl Circuit {
    pub fn new(qubits: usize, ops: Vec<Op>) -> SimResult<Self> {
        if qubits == 0 {
            return Err(SimError::EmptySystem);
        }
        for op in &ops {
            let sites = match op {
                Op::Gate(g) => g.sites(),
                Op::Measure(q) => vec![*q],
                Op::MeasureAll => vec![],
            };
            if let Some(&bad) = sites.iter().find(|&&q| q == 0 || q > qubits) {
                return Err(SimError::SiteOutOfRange { site: bad, qubits });
            }
        }
        Ok(Self { qubits, ops, name: None, seed: None })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn push(&mut self, op: Op) -> SimResult<()> {
        let mut ops = std::mem::take(&mut self.ops);
        ops.push(op);
        let checked = Circuit::new(self.qubits, ops)?;
        self.ops = checked.ops;
        Ok(())
    }

    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, Op::Gate(_))).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// Everything the parser found: the circuit, if no errors occurred, and all
/// diagnostics (errors and warnings) in line order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseReport {
    pub circuit: Option<Circuit>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseReport {
    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

/// Parses a program, returning only the error diagnostics on failure.
pub fn parse(text: &str) -> Result<Circuit, Vec<ParseDiagnostic>> {
    let report = parse_report(text);
    match report.circuit {
        Some(c) => Ok(c),
        None => Err(report.diagnostics.into_iter().filter(|d| d.severity == Severity::Error).collect()),
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (pos, ch) = chars[k];
        let arrow = ch == '-' && chars.get(k + 1).is_some_and(|&(_, n)| n == '>');
        if ch.is_whitespace() || arrow {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..pos], column: line[..s].chars().count() + 1 });
            }
            if arrow {
                out.push(Token { text: &line[pos..pos + 2], column: line[..pos].chars().count() + 1 });
                k += 1;
            }
        } else if start.is_none() {
            start = Some(pos);
        }
        k += 1;
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], column: line[..s].chars().count() + 1 });
    }
    out
}

struct LineError {
    column: usize,
    message: String,
}

fn err<T>(column: usize, message: impl Into<String>) -> Result<T, LineError> {
    Err(LineError { column, message: message.into() })
}

struct Parser {
    qubits: Option<usize>,
}

impl Parser {
    fn site(&self, tok: &Token<'_>) -> Result<usize, LineError> {
        let q: usize = match tok.text.parse() {
            Ok(q) => q,
            Err(_) => return err(tok.column, format!("expected a site index, found `{}`", tok.text)),
        };
        let upper = self.qubits.unwrap_or(usize::MAX);
        if q == 0 || q > upper {
            return err(tok.column, format!("site {q} out of range (1..={upper})"));
        }
        Ok(q)
    }

    fn real(tok: &Token<'_>) -> Result<f64, LineError> {
        match tok.text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => err(tok.column, format!("expected a finite number, found `{}`", tok.text)),
        }
    }

    fn complexes(toks: &[Token<'_>]) -> Result<Vec<C64>, LineError> {
        toks.chunks(2)
            .map(|pair| Ok(C64::new(Self::real(&pair[0])?, Self::real(&pair[1])?)))
            .collect()
    }

    fn arity(kw: &Token<'_>, args: &[Token<'_>], want: usize) -> Result<(), LineError> {
        if args.len() != want {
            return err(kw.column, format!("`{}` takes {want} argument(s), found {}", kw.text, args.len()));
        }
        Ok(())
    }

    /// Returns the parsed op and an optional warning.
    fn statement(&self, kw: &Token<'_>, args: &[Token<'_>]) -> Result<(Op, Option<String>), LineError> {
        let keyword = kw.text.to_ascii_lowercase();
        let op = match keyword.as_str() {
            "h" | "x" => {
                Self::arity(kw, args, 1)?;
                let site = self.site(&args[0])?;
                let gate = if keyword == "h" { SingleQubitGate::hadamard() } else { SingleQubitGate::pauli_x() };
                Op::Gate(GateOp::Single { site, gate })
            }
            "u" => {
                Self::arity(kw, args, 9)?;
                let site = self.site(&args[0])?;
                let v = Self::complexes(&args[1..])?;
                let gate = SingleQubitGate::new([[v[0], v[1]], [v[2], v[3]]]);
                let warn = (!gate.is_unitary()).then(|| "matrix is not unitary".to_string());
                return Ok((Op::Gate(GateOp::Single { site, gate }), warn));
            }
            "g2" => {
                Self::arity(kw, args, 34)?;
                let q1 = self.site(&args[0])?;
                let q2 = self.site(&args[1])?;
                if q1 == q2 {
                    return err(args[1].column, format!("`g2` needs two distinct sites, got {q1} twice"));
                }
                let v = Self::complexes(&args[2..])?;
                let gate = TwoQubitGate::new(q1, q2, CMatrix::from_row_slice(4, 4, &v))
                    .map_err(|e| LineError { column: kw.column, message: e.to_string() })?;
                let warn = (!gate.is_unitary()).then(|| "matrix is not unitary".to_string());
                return Ok((Op::Gate(GateOp::Two(gate)), warn));
            }
            "cknot" => {
                let arrows: Vec<usize> =
                    args.iter().enumerate().filter(|(_, t)| t.text == "->").map(|(k, _)| k).collect();
                let &[split] = arrows.as_slice() else {
                    return err(kw.column, "`cknot` needs exactly one `->` between controls and target");
                };
                if split == 0 {
                    return err(args[0].column, "`cknot` needs at least one control");
                }
                if args.len() != split + 2 {
                    return err(args[split].column, "`cknot` needs exactly one target after `->`");
                }
                let controls =
                    args[..split].iter().map(|t| self.site(t)).collect::<Result<Vec<_>, _>>()?;
                let target = self.site(&args[split + 1])?;
                let gate = CkNotGate::new(controls, target)
                    .map_err(|e| LineError { column: kw.column, message: e.to_string() })?;
                Op::Gate(GateOp::CkNot(gate))
            }
            "proj" => {
                Self::arity(kw, args, 2)?;
                let site = self.site(&args[0])?;
                let outcome = match args[1].text {
                    "0" => 0,
                    "1" => 1,
                    other => return err(args[1].column, format!("projector outcome must be 0 or 1, found `{other}`")),
                };
                Op::Gate(GateOp::Projector(SiteProjector { site, outcome, renormalize: true }))
            }
            "measure" => {
                Self::arity(kw, args, 1)?;
                Op::Measure(self.site(&args[0])?)
            }
            "measure_all" => {
                Self::arity(kw, args, 0)?;
                Op::MeasureAll
            }
            "qubits" => return err(kw.column, "duplicate `qubits` header"),
            _ => return err(kw.column, format!("unknown keyword `{}`", kw.text)),
        };
        Ok((op, None))
    }
}

/// Parses a program and collects every diagnostic.
pub fn parse_report(text: &str) -> ParseReport {
    let mut diagnostics = Vec::new();
    let mut parser = Parser { qubits: None };
    let mut header_seen = false;
    let mut ops = Vec::new();
    let mut name = None;
    let mut seed = None;
    let mut last_line = 0;

    let mut push = |line: usize, column: usize, message: String, severity| {
        diagnostics.push(ParseDiagnostic { line, column, message, severity });
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let (code, comment) = match raw.find('#') {
            Some(p) => (&raw[..p], Some((&raw[p + 1..], p))),
            None => (raw, None),
        };
        if let Some((comment, pos)) = comment {
            let body = comment.trim();
            let column = raw[..pos].chars().count() + 1;
            if let Some(v) = body.strip_prefix("name:") {
                name = Some(v.trim().to_string());
            } else if let Some(v) = body.strip_prefix("seed:") {
                match v.trim().parse::<u64>() {
                    Ok(s) => seed = Some(s),
                    Err(_) => push(line_no, column, format!("ignoring unparsable seed `{}`", v.trim()), Severity::Warning),
                }
            } else if let Some(v) = body.strip_prefix("qcfmt") {
                if v.trim().parse::<u32>().ok() != Some(FORMAT_VERSION) {
                    push(
                        line_no,
                        column,
                        format!("unsupported format version `{}`, reading as qcfmt {FORMAT_VERSION}", v.trim()),
                        Severity::Warning,
                    );
                }
            }
        }
        let tokens = tokenize(code);
        let Some((kw, args)) = tokens.split_first() else {
            continue;
        };
        if !header_seen {
            header_seen = true;
            if kw.text.eq_ignore_ascii_case("qubits") {
                let parsed = if args.len() != 1 {
                    err(kw.column, format!("`qubits` takes 1 argument, found {}", args.len()))
                } else {
                    match args[0].text.parse::<usize>() {
                        Ok(n) if n >= 1 => Ok(n),
                        _ => err(args[0].column, format!("qubit count must be a positive integer, found `{}`", args[0].text)),
                    }
                };
                match parsed {
                    Ok(n) => parser.qubits = Some(n),
                    Err(e) => push(line_no, e.column, e.message, Severity::Error),
                }
            } else {
                push(line_no, kw.column, "missing `qubits` header before the first statement".into(), Severity::Error);
            }
            continue;
        }
        match parser.statement(kw, args) {
            Ok((op, warning)) => {
                if let Some(w) = warning {
                    push(line_no, kw.column, w, Severity::Warning);
                }
                ops.push(op);
            }
            Err(e) => push(line_no, e.column, e.message, Severity::Error),
        }
    }
    if !header_seen {
        push(last_line.max(1), 1, "missing `qubits` header".into(), Severity::Error);
    }

    let has_errors = diagnostics.iter().any(|d| d.severity == Severity::Error);
    let circuit = match (has_errors, parser.qubits) {
        (false, Some(qubits)) => Circuit::new(qubits, ops).ok().map(|mut c| {
            c.name = name;
            c.seed = seed;
            c
        }),
        _ => None,
    };
    ParseReport { circuit, diagnostics }
}

fn push_complex(out: &mut String, z: C64) {
    out.push_str(&format!(" {} {}", z.re, z.im));
}

/// Canonical text for `circuit`; `parse(render(c)) == c`.
pub fn render(circuit: &Circuit) -> String {
    let mut out = String::new();
    if let Some(name) = &circuit.name {
        out.push_str(&format!("# name: {name}\n"));
    }
    if let Some(seed) = circuit.seed {
        out.push_str(&format!("# seed: {seed}\n"));
    }
    out.push_str(&format!("qubits {}\n", circuit.qubits));
    for op in &circuit.ops {
        match op {
            Op::Gate(GateOp::Single { site, gate }) => match gate.label() {
                GateLabel::H => out.push_str(&format!("h {site}")),
                GateLabel::X => out.push_str(&format!("x {site}")),
                GateLabel::Custom => {
                    out.push_str(&format!("u {site}"));
                    for r in 0..2 {
                        for col in 0..2 {
                            push_complex(&mut out, gate.entry(r, col));
                        }
                    }
                }
            },
            Op::Gate(GateOp::Two(g)) => {
                let (a, b) = g.sites();
                out.push_str(&format!("g2 {a} {b}"));
                for r in 0..4 {
                    for col in 0..4 {
                        push_complex(&mut out, g.matrix()[(r, col)]);
                    }
                }
            }
            Op::Gate(other) => out.push_str(&other.to_string()),
            Op::Measure(q) => out.push_str(&format!("measure {q}")),
            Op::MeasureAll => out.push_str("measure_all"),
        }
        out.push('\n');
    }
    out
}
