//! CSV artifacts (12 significant digits) and JSON sidecars.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::grid::{FrontTrace, Profile};

/// Shortest rendering of `v` with 12 significant digits.
pub fn fmt12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding can carry into a new digit (9.99… → 10.0); that is still ≤ 12 digits.
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.11e}");
        let (mant, e) = s.split_once('e').expect("exponent form");
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        format!("{mant}e{e}")
    }
}

/// Writes a header line and rows of numbers.
pub fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.into_iter().map(fmt12).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// `x,U` (or another value name) for one profile.
pub fn write_profile_csv<P: AsRef<Path>>(path: P, profile: &Profile, value_name: &str) -> Result<()> {
    let g = profile.grid;
    write_csv(
        path,
        &["x", value_name],
        profile.values.iter().enumerate().map(|(i, &u)| vec![g.x(i), u]),
    )
}

/// `t,L`.
pub fn write_front_csv<P: AsRef<Path>>(path: P, front: &FrontTrace) -> Result<()> {
    write_csv(
        path,
        &["t", "L"],
        front.times.iter().zip(&front.positions).map(|(&t, &l)| vec![t, l]),
    )
}

/// File name for a snapshot: `profile_t<time>.csv` (or with a prefix such as `profile_V`).
pub fn profile_file_name(prefix: &str, t: f64) -> String {
    format!("{prefix}_t{}.csv", fmt12(t))
}

/// Reads a two-column numeric CSV with a header line.
pub fn read_csv_columns<P: AsRef<Path>>(path: P) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for line in lines.filter(|l| !l.trim().is_empty()) {
        for (c, field) in cols.iter_mut().zip(line.split(',')) {
            let v: f64 = field.trim().parse().map_err(|_| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("bad number {field:?}"))
            })?;
            c.push(v);
        }
    }
    Ok((header, cols))
}

pub fn write_json<P: AsRef<Path>, T: Serialize>(path: P, value: &T) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    fs::write(path, text + "\n")?;
    Ok(())
}
