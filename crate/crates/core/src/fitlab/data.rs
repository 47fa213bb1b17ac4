//! Price and return series I/O.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub prices: Vec<f64>,
    pub source: PathBuf,
}

impl PriceSeries {
    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// Read a `date,price` CSV. Rows are returned in date order; an unsorted
/// file is re-sorted with a warning, a repeated date is an error.
pub fn load_price_series(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_price_csv(file, path)
}

fn parse_price_csv<R: Read>(reader: R, path: &Path) -> Result<PriceSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (date_col, price_col) = match (col("date"), col("price")) {
        (Some(d), Some(p)) => (d, p),
        _ => {
            return Err(parse_err(
                1,
                format!(
                    "expected header `date,price`, found `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ))
        }
    };

    let mut rows: Vec<(NaiveDate, f64, u64)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let date_s = record
            .get(date_col)
            .ok_or_else(|| parse_err(line, "missing date".into()))?;
        let price_s = record
            .get(price_col)
            .ok_or_else(|| parse_err(line, "missing price".into()))?;
        let date = NaiveDate::parse_from_str(date_s, "%Y-%m-%d")
            .map_err(|e| parse_err(line, format!("bad date {date_s:?}: {e}")))?;
        let price: f64 = price_s
            .parse()
            .map_err(|_| parse_err(line, format!("bad price {price_s:?}")))?;
        if !price.is_finite() {
            return Err(parse_err(line, format!("bad price {price_s:?}")));
        }
        if price <= 0.0 {
            return Err(Error::NonPositivePrice {
                path: path.to_path_buf(),
                line,
                price,
            });
        }
        rows.push((date, price, line));
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    if rows.windows(2).any(|w| w[1].0 < w[0].0) {
        warn!("{}: dates are not in order; sorting", path.display());
        rows.sort_by_key(|r| r.0);
    }
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateDate {
            path: path.to_path_buf(),
            line: w[1].2.max(w[0].2),
            date: w[1].0.to_string(),
        });
    }
    Ok(PriceSeries {
        dates: rows.iter().map(|r| r.0).collect(),
        prices: rows.iter().map(|r| r.1).collect(),
        source: path.to_path_buf(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnMode {
    /// `(s[i+1] − s[i]) / s[i]`
    #[default]
    Simple,
    /// `ln(s[i+1] / s[i])`
    Log,
}

impl FromStr for ReturnMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(ReturnMode::Simple),
            "log" => Ok(ReturnMode::Log),
            other => Err(Error::InvalidParameter(format!(
                "return mode must be `simple` or `log`, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    /// Where the values came from (file name or generator description).
    pub source: String,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "return #{i} is not finite: {}",
                values[i]
            )));
        }
        Ok(ReturnSeries {
            values,
            source: source.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn returns(prices: &[f64], mode: ReturnMode) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 prices, got {}",
            prices.len()
        )));
    }
    let values = prices
        .windows(2)
        .map(|w| match mode {
            ReturnMode::Simple => (w[1] - w[0]) / w[0],
            ReturnMode::Log => (w[1] / w[0]).ln(),
        })
        .collect();
    ReturnSeries::new(values, format!("{mode:?} returns").to_lowercase())
}

/// Write a one-column `return` CSV.
pub fn write_returns_csv<W: Write>(series: &ReturnSeries, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["return"])?;
    for v in &series.values {
        wtr.write_record([format!("{v:e}")])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_returns_csv(path: impl AsRef<Path>) -> Result<ReturnSeries> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("return"))
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "expected header `return`".into(),
        })?;
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let s = record.get(col).unwrap_or("");
        let v: f64 = s.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("bad return {s:?}"),
        })?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    ReturnSeries::new(values, path.display().to_string())
}
