use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => x.to_string(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

fn json_bytes(value: &impl Serialize) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Destination of a command's artifacts.
///
/// Without an output directory only the primary artifact is emitted, on
/// stdout. With one, every artifact becomes a file there and stdout lists
/// the files written.
pub struct Sink<'a> {
    out_dir: Option<PathBuf>,
    format: Format,
    stdout: &'a mut dyn Write,
}

impl<'a> Sink<'a> {
    pub fn new(out_dir: Option<PathBuf>, format: Format, stdout: &'a mut dyn Write) -> CliResult<Self> {
        if let Some(dir) = &out_dir {
            fs::create_dir_all(dir)?;
        }
        Ok(Self {
            out_dir,
            format,
            stdout,
        })
    }

    fn emit(&mut self, file: String, bytes: Vec<u8>, primary: bool) -> CliResult {
        match &self.out_dir {
            Some(dir) => {
                let path = dir.join(&file);
                fs::write(&path, bytes)?;
                writeln!(self.stdout, "{}", path.display())?;
            }
            None if primary => self.stdout.write_all(&bytes)?,
            None => {}
        }
        Ok(())
    }

    pub fn table(&mut self, name: &str, table: &Table, primary: bool) -> CliResult {
        match self.format {
            Format::Csv => self.emit(format!("{name}.csv"), table.to_csv()?, primary),
            Format::Json => self.emit(format!("{name}.json"), json_bytes(table)?, primary),
        }
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize, primary: bool) -> CliResult {
        self.emit(format!("{name}.json"), json_bytes(value)?, primary)
    }
}
