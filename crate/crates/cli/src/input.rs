//! One-observation-per-line CSV input.

use std::io::Read;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

/// Reads observations from `path`, or stdin when the path is `-`.
pub fn read_observations(path: &Path) -> Result<Vec<f64>> {
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut text).context("reading stdin")?;
    } else {
        text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    parse_observations(&text)
}

/// A non-numeric first record is taken as a header and skipped.
pub fn parse_observations(text: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| anyhow!("malformed CSV: {e}"))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 1 {
            bail!("line {line}: expected one value per line, found {}", record.len());
        }
        let field = &record[0];
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => bail!("line {line}: non-finite value '{field}'"),
            Err(_) if index == 0 => {}
            Err(_) => bail!("line {line}: cannot parse '{field}' as a number"),
        }
    }
    if values.is_empty() {
        bail!("no observations");
    }
    Ok(values)
}

/// Comma-separated list of numbers, as taken by the grid flags.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

impl List {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        text.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", t.trim())))
            .collect::<std::result::Result<_, _>>()
            .map(List)
    }
}
