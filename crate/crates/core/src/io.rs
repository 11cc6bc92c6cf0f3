//! Dataset files.
//!
//! * CSV: header `x0,...,x{d-1}`, one observation per line, values printed
//!   with Rust's shortest round-trip formatting so reading them back is
//!   bit-exact.
//! * Binary: little-endian `u64 n`, `u64 d`, then `n·d` `f64` values row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub fn write_csv<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((0..data.cols()).map(|k| format!("x{k}")))?;
    for row in data.iter_rows() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    for (k, h) in header.iter().enumerate() {
        if h.trim() != format!("x{k}") {
            return Err(Error::InvalidDataset(format!("column {k} is named {h:?}, expected x{k}")));
        }
    }
    let d = header.len();
    let mut values = Vec::new();
    let mut n = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != d {
            return Err(Error::InvalidDataset(format!("line {} has {} fields", n + 2, rec.len())));
        }
        for f in rec.iter() {
            let v: f64 = f.trim().parse().map_err(|_| {
                Error::InvalidDataset(format!("line {}: cannot parse {f:?}", n + 2))
            })?;
            values.push(v);
        }
        n += 1;
    }
    Dataset::new(n, d, values)
}

pub fn write_binary<W: Write>(data: &Dataset, mut out: W) -> Result<()> {
    out.write_all(&(data.rows() as u64).to_le_bytes())?;
    out.write_all(&(data.cols() as u64).to_le_bytes())?;
    for v in data.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Dataset> {
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word);
    input.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word);
    let len = n
        .checked_mul(d)
        .and_then(|l| usize::try_from(l).ok())
        .ok_or_else(|| Error::InvalidDataset(format!("header {n}x{d} is too large")))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(Error::InvalidDataset(format!(
            "expected {} payload bytes, found {}",
            len * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Dataset::new(n as usize, d as usize, values)
}

pub fn save_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv(data, BufWriter::new(File::create(path)?))
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    read_csv(BufReader::new(File::open(path)?))
}

pub fn save_binary(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_binary(data, BufWriter::new(File::create(path)?))
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<Dataset> {
    read_binary(BufReader::new(File::open(path)?))
}
