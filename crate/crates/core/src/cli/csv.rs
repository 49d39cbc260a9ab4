//! Plot-ready CSV emission and the matching reader.

use std::io::{self, Write};

use crate::analysis::{Field, Sample, TimeSeries};
use crate::{Error, Result};

pub const COLUMNS: [&str; 14] =
    ["t", "h_re", "h_im", "abs_h", "C_total", "C_L", "C_G", "C_12", "C_13", "C_23", "C_1_23", "C_TG", "C_BG", "M"];

fn row(s: &Sample) -> [f64; 14] {
    let mut out = [0.0; 14];
    out[0] = s.t;
    out[1] = s.h.re;
    out[2] = s.h.im;
    for (slot, name) in out[3..].iter_mut().zip(&COLUMNS[3..]) {
        let field: Field = name.parse().expect("column names are field names");
        *slot = field.value(s).unwrap_or(f64::NAN);
    }
    out
}

/// Writes the header and one row per sample with 17 significant digits.
/// Tripartite columns hold `NaN` for registers other than three qubits.
pub fn write_csv<W: Write>(series: &TimeSeries, mut w: W) -> io::Result<()> {
    writeln!(w, "{}", COLUMNS.join(","))?;
    for s in &series.samples {
        let cells: Vec<String> = row(s).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

/// Numeric table read back from CSV text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let rows = lines
            .enumerate()
            .map(|(i, line)| {
                let cells = line
                    .split(',')
                    .map(|c| {
                        c.trim().parse::<f64>().map_err(|_| Error::Parse(format!("row {}: bad number {c:?}", i + 1)))
                    })
                    .collect::<Result<Vec<f64>>>()?;
                if cells.len() != columns.len() {
                    return Err(Error::Parse(format!(
                        "row {}: {} cells, header has {}",
                        i + 1,
                        cells.len(),
                        columns.len()
                    )));
                }
                Ok(cells)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Table { columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Validation(format!("CSV has no column {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }
}
