use std::path::PathBuf;

use blowup_core::analysis::{barometer, barometer_scan, DEFAULT_Z_THRESHOLD};
use blowup_core::Error;
use clap::Args;

use crate::error::{CliError, CliResult};
use crate::output::{Sink, Table};

#[derive(Debug, Args)]
pub struct BarometerArgs {
    /// CSV file with a header row, holding `t` and the level column
    pub input: PathBuf,
    /// Level column; `t` is the time column
    #[arg(long, default_value = "A")]
    pub column: String,
    /// Trailing window, in samples
    #[arg(long, default_value_t = 32)]
    pub window: usize,
    /// z-score above which positive curvature is flagged
    #[arg(long, default_value_t = DEFAULT_Z_THRESHOLD)]
    pub z: f64,
    /// Also fit every window (written as `scan` with --out)
    #[arg(long)]
    pub scan: bool,
}

fn read_series(args: &BarometerArgs) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::Reader::from_path(&args.input)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::usage(format!("{} has no `{name}` column", args.input.display())))
    };
    let (ti, ai) = (find("t")?, find(&args.column)?);
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let num = |i: usize| -> CliResult<f64> {
            let cell = record.get(i).unwrap_or("").trim();
            cell.parse()
                .map_err(|_| Error::Domain(format!("row {}: `{cell}` is not a number", row + 1)).into())
        };
        times.push(num(ti)?);
        values.push(num(ai)?);
    }
    Ok((times, values))
}

pub fn run(args: &BarometerArgs, sink: &mut Sink) -> CliResult {
    let (times, values) = read_series(args)?;
    let report = barometer(&times, &values, args.window, args.z)?;
    sink.json("barometer", &report, true)?;
    if args.scan {
        let mut table = Table::new([
            "start",
            "end",
            "t_start",
            "t_end",
            "quadratic_coeff",
            "stderr",
            "z_score",
            "flagged",
        ]);
        for r in barometer_scan(&times, &values, args.window, args.z)? {
            table.push(vec![
                r.start.into(),
                r.end.into(),
                r.t_start.into(),
                r.t_end.into(),
                r.quadratic_coeff.into(),
                r.stderr.into(),
                r.z_score.into(),
                r.flagged.to_string().into(),
            ]);
        }
        sink.table("scan", &table, false)?;
    }
    Ok(())
}
