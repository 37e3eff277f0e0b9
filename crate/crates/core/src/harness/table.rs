use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A recognition rate held as an integer number of hundredths of a percent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rate(u32);

impl Rate {
    pub const MAX: Rate = Rate(10_000);

    pub fn from_hundredths(h: u32) -> Result<Self> {
        if h > 10_000 {
            return Err(Error::size(format!("rate {h}/100 exceeds 100%")));
        }
        Ok(Rate(h))
    }

    /// `100 * correct / total`, truncated to two decimals.
    pub fn from_counts(correct: usize, total: usize) -> Result<Self> {
        if total == 0 || correct > total {
            return Err(Error::size(format!("cannot form a rate from {correct}/{total}")));
        }
        Ok(Rate((correct as u64 * 10_000 / total as u64) as u32))
    }

    pub fn hundredths(self) -> u32 {
        self.0
    }

    pub fn percent(self) -> f64 {
        f64::from(self.0) / 100.0
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

impl FromStr for Rate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("{s:?} is not a two-decimal rate"));
        let (whole, frac) = s.split_once('.').ok_or_else(bad)?;
        if frac.len() != 2 || whole.is_empty() || !(whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())) {
            return Err(bad());
        }
        let h = whole
            .parse::<u32>()
            .map_err(|_| bad())?
            .checked_mul(100)
            .ok_or_else(bad)?
            + frac.parse::<u32>().map_err(|_| bad())?;
        Rate::from_hundredths(h).map_err(|_| bad())
    }
}

/// Percentage of positions where `predicted` matches `actual`.
///
/// ```
/// use tfrs::harness::recognition_rate;
///
/// let actual: Vec<u32> = (0..102).collect();
/// let mut predicted = actual.clone();
/// for p in &mut predicted[..5] {
///     *p += 1000;
/// }
/// assert_eq!(recognition_rate(&predicted, &actual).unwrap().to_string(), "95.09");
/// ```
pub fn recognition_rate(predicted: &[u32], actual: &[u32]) -> Result<Rate> {
    if predicted.len() != actual.len() {
        return Err(Error::size(format!(
            "{} predictions for {} labels",
            predicted.len(),
            actual.len()
        )));
    }
    let correct = predicted.iter().zip(actual).filter(|(p, a)| p == a).count();
    Rate::from_counts(correct, actual.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            _ => Err(Error::Format(format!("unknown output format {s:?}"))),
        }
    }
}

/// Recognition rates laid out like the printed tables: one row per weight pair
/// or dataset, one column per eigenvector count or classifier.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultsTable {
    pub caption: String,
    /// Header of the row-label column.
    pub corner: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `cells[row][col]`
    pub cells: Vec<Vec<Rate>>,
}

impl ResultsTable {
    pub fn new(
        caption: impl Into<String>,
        corner: impl Into<String>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        cells: Vec<Vec<Rate>>,
    ) -> Result<Self> {
        if cells.len() != row_labels.len() || cells.iter().any(|r| r.len() != col_labels.len()) {
            return Err(Error::size(format!(
                "cells do not form a {}x{} grid",
                row_labels.len(),
                col_labels.len()
            )));
        }
        Ok(ResultsTable {
            caption: caption.into(),
            corner: corner.into(),
            row_labels,
            col_labels,
            cells,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.row_labels.len(), self.col_labels.len())
    }

    pub fn get(&self, row: usize, col: usize) -> Rate {
        self.cells[row][col]
    }

    /// Reads a table back from [`emit_results`] CSV output. The caption is not
    /// part of the CSV and comes back empty.
    pub fn from_csv(bytes: &[u8]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
        let mut records = reader.records();
        let csv_err = |e: csv::Error| Error::Format(e.to_string());
        let header = records
            .next()
            .ok_or_else(|| Error::Format("empty CSV".into()))?
            .map_err(csv_err)?;
        let corner = header.get(0).unwrap_or_default().to_owned();
        let col_labels: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut row_labels = Vec::new();
        let mut cells = Vec::new();
        for record in records {
            let record = record.map_err(csv_err)?;
            row_labels.push(record.get(0).unwrap_or_default().to_owned());
            cells.push(record.iter().skip(1).map(str::parse).collect::<Result<Vec<Rate>>>()?);
        }
        ResultsTable::new("", corner, row_labels, col_labels, cells)
    }
}

/// Serializes a table.
///
/// CSV has a header row (`corner`, then the column labels) and one line per
/// row. Markdown prints the caption as a paragraph, then a pipe table of
/// `rows + 2` lines.
///
/// ```
/// use tfrs::harness::{emit_results, OutputFormat, Rate, ResultsTable};
///
/// let t = ResultsTable::new(
///     "",
///     "label",
///     vec!["row".into()],
///     vec!["col".into()],
///     vec![vec![Rate::from_hundredths(5000).unwrap()]],
/// )
/// .unwrap();
/// assert_eq!(emit_results(&t, OutputFormat::Csv), b"label,col\nrow,50.00\n");
/// ```
pub fn emit_results(table: &ResultsTable, format: OutputFormat) -> Vec<u8> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let header = std::iter::once(table.corner.as_str()).chain(table.col_labels.iter().map(String::as_str));
            w.write_record(header).expect("writing to memory");
            for (label, row) in table.row_labels.iter().zip(&table.cells) {
                let cells = std::iter::once(label.clone()).chain(row.iter().map(Rate::to_string));
                w.write_record(cells).expect("writing to memory");
            }
            w.into_inner().expect("flushing to memory")
        }
        OutputFormat::Markdown => {
            let mut out = String::new();
            if !table.caption.is_empty() {
                out.push_str(&table.caption);
                out.push_str("\n\n");
            }
            let cell = |s: &str| s.replace('|', "\\|");
            out.push_str(&format!("| {} |", cell(&table.corner)));
            for c in &table.col_labels {
                out.push_str(&format!(" {} |", cell(c)));
            }
            out.push_str("\n|---|");
            out.push_str(&"---:|".repeat(table.col_labels.len()));
            out.push('\n');
            for (label, row) in table.row_labels.iter().zip(&table.cells) {
                out.push_str(&format!("| {} |", cell(label)));
                for r in row {
                    out.push_str(&format!(" {r} |"));
                }
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}
