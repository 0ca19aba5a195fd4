use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;

use crate::CliError;

/// Bumped whenever a column or record layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

/// CSV or JSON-lines records with `\n` endings, to a file or stdout.
pub struct Sink {
    format: Format,
    out: Box<dyn Write>,
    csv: csv::WriterBuilder,
}

impl Sink {
    pub fn open(path: Option<&Path>, format: Format) -> Result<Self, CliError> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        let mut csv = csv::WriterBuilder::new();
        csv.terminator(csv::Terminator::Any(b'\n'));
        Ok(Self { format, out: inner, csv })
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// `# ...` line in CSV mode; ignored for JSON lines.
    pub fn comment(&mut self, text: &str) -> Result<(), CliError> {
        if self.format == Format::Csv {
            writeln!(self.out, "# {text}").map_err(io_err)?;
        }
        Ok(())
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let mut w = self.csv.from_writer(Vec::new());
        w.write_record(fields).map_err(|e| CliError::Io(e.to_string()))?;
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        self.out.write_all(&bytes).map_err(io_err)
    }

    pub fn json(&mut self, value: &serde_json::Value) -> Result<(), CliError> {
        serde_json::to_writer(&mut self.out, value).map_err(|e| CliError::Io(e.to_string()))?;
        self.out.write_all(b"\n").map_err(io_err)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(io_err)
    }
}

fn io_err(e: io::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn opt(value: Option<usize>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}
