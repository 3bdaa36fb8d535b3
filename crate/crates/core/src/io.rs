//! CSV input and output.
//!
//! Samples are stored as `i,x` with a header row. Floats are written with 17
//! significant digits so that reading a file back reproduces every value.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::dynsys::Sample;
use crate::error::{Error, Result};

/// Formats `v` like C's `%.17g`: 17 significant digits, fixed notation for
/// exponents in `[-4, 17)`, trailing zeros removed.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `i,x` rows, `i` starting at 1.
pub fn write_sample<W: Write>(sample: &Sample, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "x"])?;
    for (i, &x) in sample.values().iter().enumerate() {
        w.write_record([(i + 1).to_string(), format_float(x)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sample_file(sample: &Sample, path: &Path) -> Result<()> {
    write_sample(sample, BufWriter::new(File::create(path)?))
}

/// Reads a sample from CSV. The column named `x` is used if present,
/// otherwise the last column; a header row is optional.
pub fn read_sample<R: Read>(input: R) -> Result<Sample> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut values = Vec::new();
    let mut column: Option<usize> = None;
    for (line, record) in r.records().enumerate() {
        let record = record?;
        if record.is_empty() || (record.len() == 1 && record[0].is_empty()) {
            continue;
        }
        if line == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            column = record.iter().position(|f| f.eq_ignore_ascii_case("x"));
            if column.is_none() {
                column = Some(record.len() - 1);
            }
            continue;
        }
        let c = column.unwrap_or(record.len() - 1);
        let field = record
            .get(c)
            .ok_or_else(|| Error::Parse(format!("row {} has no column {}", line + 1, c + 1)))?;
        let v: f64 = field
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: `{field}` is not a number", line + 1)))?;
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    Sample::from_values(values).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_sample_file(path: &Path) -> Result<Sample> {
    read_sample(File::open(path)?)
}

/// Writes a header and float rows.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| format_float(v)))?;
    }
    w.flush()?;
    Ok(())
}
