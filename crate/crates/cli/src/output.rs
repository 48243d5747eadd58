use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use crate::CliError;

/// Numeric table with a one-line header. Values print through `Display`,
/// which is the shortest decimal that round-trips.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, sink: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<(), CliError> {
        let file = File::create(path)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
        self.write_to(io::BufWriter::new(file))
    }

    /// File when a path is given, stdout otherwise.
    pub fn emit(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) => self.write_file(p),
            None => self.write_to(io::stdout().lock()),
        }
    }
}

/// `steps` evenly spaced values from `lo` to `hi`; one step gives `[lo]`.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(CliError::Usage("grid bounds must be finite".into()));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i == steps - 1 { hi } else { lo + (hi - lo) * i as f64 / last })
        .collect())
}

/// `steps` values spaced evenly in `ln`, from `lo` to `hi`.
pub fn logspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi > 0.0) {
        return Err(CliError::Usage("log grid bounds must be > 0".into()));
    }
    let ratio = hi / lo;
    Ok(linspace(0.0, 1.0, steps)?
        .into_iter()
        .map(|s| if s == 1.0 { hi } else { lo * ratio.powf(s) })
        .collect())
}
