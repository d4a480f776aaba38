//! Sinogram CSV files.
//!
//! ```text
//! # geometry=H2
//! # R=1.0
//! # n_theta=256
//! # n_r=512
//! # r_max=2.0
//! 0,0,0.0
//! 0,1,1.2345e-7
//! ...
//! ```
//!
//! Values use the shortest decimal that parses back to the same `f64`, so
//! writing what was read reproduces the file byte for byte. Further
//! `# key=value` lines after the required five are kept in order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sphmean_core::{Geometry, Sinogram};

use crate::config::RunConfig;
use crate::error::{Error, Result};

const REQUIRED: [&str; 5] = ["geometry", "R", "n_theta", "n_r", "r_max"];

#[derive(Debug, Clone, PartialEq)]
pub struct SinogramFile {
    pub sinogram: Sinogram,
    /// Header entries beyond the required ones, in file order.
    pub extra: Vec<(String, String)>,
}

fn malformed(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("sinogram line {line}: {msg}"))
}

pub fn format_sinogram(g: &Sinogram, extra: &[(String, String)]) -> String {
    let mut out = String::with_capacity(24 * g.values.len() + 256);
    let _ = writeln!(out, "# geometry={}", g.geometry.name());
    let _ = writeln!(out, "# R={:?}", g.r);
    let _ = writeln!(out, "# n_theta={}", g.n_theta);
    let _ = writeln!(out, "# n_r={}", g.n_r);
    let _ = writeln!(out, "# r_max={:?}", g.r_max);
    for (k, v) in extra {
        let _ = writeln!(out, "# {k}={v}");
    }
    for j in 0..g.n_theta {
        for (k, v) in g.row(j).iter().enumerate() {
            let _ = writeln!(out, "{j},{k},{v:?}");
        }
    }
    out
}

fn parse_number<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| malformed(line, format!("cannot parse {key} = {v:?}")))
}

pub fn parse_sinogram(text: &str) -> Result<SinogramFile> {
    let mut header: Vec<(String, String)> = Vec::new();
    let mut body_start = 0;
    let mut header_lines = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.trim_end().strip_prefix('#') else { break };
        header_lines += 1;
        let Some((k, v)) = rest.trim().split_once('=') else {
            return Err(malformed(header_lines, format!("header line {:?} is not `# key=value`", line.trim_end())));
        };
        header.push((k.trim().to_string(), v.trim().to_string()));
        body_start += line.len();
    }
    for (i, key) in REQUIRED.iter().enumerate() {
        match header.get(i) {
            Some((k, _)) if k == key => {}
            Some((k, _)) => {
                return Err(malformed(i + 1, format!("expected header `{key}`, found `{k}`")));
            }
            None => return Err(malformed(i + 1, format!("missing header `{key}`"))),
        }
    }
    if let Some((i, (k, _))) = header.iter().enumerate().skip(REQUIRED.len()).find(|(_, (k, _))| REQUIRED.contains(&k.as_str())) {
        return Err(malformed(i + 1, format!("duplicate header `{k}`")));
    }
    let geometry = match header[0].1.as_str() {
        "H2" => Geometry::H2,
        "S2" => Geometry::S2,
        other => return Err(malformed(1, format!("unknown geometry {other:?}, expected H2 or S2"))),
    };
    let r: f64 = parse_number(2, "R", &header[1].1)?;
    let n_theta: usize = parse_number(3, "n_theta", &header[2].1)?;
    let n_r: usize = parse_number(4, "n_r", &header[3].1)?;
    let r_max: f64 = parse_number(5, "r_max", &header[4].1)?;
    let expected = n_theta
        .checked_mul(n_r)
        .ok_or_else(|| malformed(3, "n_theta * n_r overflows"))?;

    let mut values = vec![0.0; expected];
    let mut seen = vec![false; expected];
    let mut rows = 0usize;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text[body_start..].as_bytes());
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(format!("sinogram rows: {e}")))?;
        let line = header_lines + record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(malformed(line, format!("expected `theta_index,r_index,value`, found {} fields", record.len())));
        }
        let j: usize = parse_number(line, "theta_index", &record[0])?;
        let k: usize = parse_number(line, "r_index", &record[1])?;
        let v: f64 = parse_number(line, "value", &record[2])?;
        if !v.is_finite() {
            return Err(malformed(line, format!("non-finite value {v}")));
        }
        if j >= n_theta || k >= n_r {
            return Err(malformed(line, format!("index ({j}, {k}) outside the {n_theta} x {n_r} grid")));
        }
        let idx = j * n_r + k;
        if seen[idx] {
            return Err(malformed(line, format!("duplicate row for index ({j}, {k})")));
        }
        seen[idx] = true;
        values[idx] = v;
        rows += 1;
    }
    if rows != expected {
        return Err(Error::Format(format!(
            "sinogram has {rows} rows, expected n_theta * n_r = {n_theta} * {n_r} = {expected}"
        )));
    }
    let sinogram = Sinogram::new(geometry, r, n_theta, n_r, r_max, values)?;
    Ok(SinogramFile { sinogram, extra: header.split_off(REQUIRED.len()) })
}

pub fn write_sinogram(path: &Path, g: &Sinogram, extra: &[(String, String)]) -> Result<()> {
    fs::write(path, format_sinogram(g, extra)).map_err(|e| Error::io(path, e))
}

pub fn read_sinogram(path: &Path) -> Result<SinogramFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sinogram(&text).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Rejects sinograms whose header disagrees with the configuration.
pub fn check_against_config(g: &Sinogram, config: &RunConfig) -> Result<()> {
    let mismatch = |key: &str, file: String, cfg: String| {
        Err(Error::Config(format!("sinogram header {key}={file} does not match the configuration ({cfg})")))
    };
    if g.geometry != config.geometry {
        return mismatch("geometry", g.geometry.name().into(), config.geometry.name().into());
    }
    if g.r != config.r {
        return mismatch("R", format!("{:?}", g.r), format!("{:?}", config.r));
    }
    if g.n_theta != config.grids.n_theta {
        return mismatch("n_theta", g.n_theta.to_string(), config.grids.n_theta.to_string());
    }
    if g.n_r != config.grids.n_r {
        return mismatch("n_r", g.n_r.to_string(), config.grids.n_r.to_string());
    }
    if g.r_max != config.r_max() {
        return mismatch("r_max", format!("{:?}", g.r_max), format!("{:?}", config.r_max()));
    }
    Ok(())
}
