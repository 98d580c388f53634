//! File formats for response maps, sampling sets and target lists.
//!
//! Map CSV: the header row holds an empty corner cell followed by the RX
//! grid; every following row starts with its TX grid value, then one
//! complex cell per RX value written as `re+imj` (e.g. `1.5-0.25j`).
//!
//! Map binary, little-endian: `u32 n_tx`, `u32 n_rx`, `n_tx` f64 TX grid
//! values, `n_rx` f64 RX grid values, then `n_tx * n_rx` row-major
//! `(re, im)` f64 pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::NafPoint;
use crate::signal::ResponseMap;

pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}j", z.re, -z.im)
    } else {
        format!("{}+{}j", z.re, z.im)
    }
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("invalid complex value '{s}'"));
    let t = s.trim();
    let body = t.strip_suffix('j').ok_or_else(bad)?;
    // The separating sign is the last '+'/'-' not part of an exponent and not
    // leading the string.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im: f64 = body[split..].parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

pub fn write_map_csv<W: Write>(map: &ResponseMap, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(map.f_rx_grid().iter().map(f64::to_string));
    w.write_record(&header)?;
    for (i, row) in map.values().rows().into_iter().enumerate() {
        let mut rec = vec![map.f_tx_grid()[i].to_string()];
        rec.extend(row.iter().map(|&z| format_complex(z)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_map_csv<R: Read>(input: R) -> Result<ResponseMap> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut records = r.records();
    let header = records.next().ok_or_else(|| Error::Parse("empty map file".into()))??;
    let f_rx: Vec<f64> = header
        .iter()
        .skip(1)
        .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("invalid grid value '{s}'"))))
        .collect::<Result<_>>()?;
    let mut f_tx = Vec::new();
    let mut data = Vec::new();
    for rec in records {
        let rec = rec?;
        if rec.len() != f_rx.len() + 1 {
            return Err(Error::Parse(format!("row has {} cells, expected {}", rec.len(), f_rx.len() + 1)));
        }
        let t = &rec[0];
        f_tx.push(t.trim().parse().map_err(|_| Error::Parse(format!("invalid grid value '{t}'")))?);
        for cell in rec.iter().skip(1) {
            data.push(parse_complex(cell)?);
        }
    }
    let values = Array2::from_shape_vec((f_tx.len(), f_rx.len()), data).map_err(|e| Error::Parse(e.to_string()))?;
    ResponseMap::new(f_tx, f_rx, values)
}

pub fn write_map_binary<W: Write>(map: &ResponseMap, mut out: W) -> Result<()> {
    let (n_tx, n_rx) = map.dim();
    let dim = |n: usize| u32::try_from(n).map_err(|_| Error::InvalidGrid("map too large".into()));
    out.write_all(&dim(n_tx)?.to_le_bytes())?;
    out.write_all(&dim(n_rx)?.to_le_bytes())?;
    for &v in map.f_tx_grid().iter().chain(map.f_rx_grid()) {
        out.write_all(&v.to_le_bytes())?;
    }
    for z in map.values().iter() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_map_binary<R: Read>(mut input: R) -> Result<ResponseMap> {
    let mut u = [0u8; 4];
    let mut read_u32 = |r: &mut R| -> Result<usize> {
        r.read_exact(&mut u)?;
        Ok(u32::from_le_bytes(u) as usize)
    };
    let n_tx = read_u32(&mut input)?;
    let n_rx = read_u32(&mut input)?;
    let mut f = [0u8; 8];
    let mut read_f64 = |r: &mut R| -> Result<f64> {
        r.read_exact(&mut f)?;
        Ok(f64::from_le_bytes(f))
    };
    let f_tx = (0..n_tx).map(|_| read_f64(&mut input)).collect::<Result<Vec<_>>>()?;
    let f_rx = (0..n_rx).map(|_| read_f64(&mut input)).collect::<Result<Vec<_>>>()?;
    let mut data = Vec::with_capacity(n_tx * n_rx);
    for _ in 0..n_tx * n_rx {
        let re = read_f64(&mut input)?;
        let im = read_f64(&mut input)?;
        data.push(Complex64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Parse("trailing bytes after map data".into()));
    }
    let values = Array2::from_shape_vec((n_tx, n_rx), data).map_err(|e| Error::Parse(e.to_string()))?;
    ResponseMap::new(f_tx, f_rx, values)
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"))
}

/// Writes a map as binary for `.bin` paths and as CSV otherwise.
pub fn save_map(map: &ResponseMap, path: &Path) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    if is_binary(path) {
        write_map_binary(map, out)
    } else {
        write_map_csv(map, out)
    }
}

pub fn load_map(path: &Path) -> Result<ResponseMap> {
    let input = BufReader::new(File::open(path)?);
    if is_binary(path) {
        read_map_binary(input)
    } else {
        read_map_csv(input)
    }
}

/// One value per line.
pub fn write_values<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Target list with an `f_tx,f_rx` header.
pub fn write_truth_csv<W: Write>(truths: &[NafPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["f_tx", "f_rx"])?;
    for t in truths {
        w.write_record([t.f_tx.to_string(), t.f_rx.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_truth_csv<R: Read>(input: R) -> Result<Vec<NafPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!("truth row has {} fields, expected 2", rec.len())));
        }
        let p = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("invalid NAF value '{s}'")));
        out.push(NafPoint::new(p(&rec[0])?, p(&rec[1])?));
    }
    Ok(out)
}

pub fn load_truth(path: &Path) -> Result<Vec<NafPoint>> {
    read_truth_csv(BufReader::new(File::open(path)?))
}
