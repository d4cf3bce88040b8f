//! Text and CSV formats for results, with matching readers.
//!
//! Every number is written with 12 significant digits in scientific notation,
//! so identical inputs give byte-identical files.

use std::fmt::Write as _;

use crate::amo::{ButterflyDataset, ButterflyRow};
use crate::secular::DispersionSample;
use crate::spectral_set::{Band, FlatBand, Interval, SpectralSet};
use crate::{Error, Result};

/// Fixed 12-significant-digit formatting.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

fn parse_real(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("line {line}: `{field}`: {e}")))
}

fn parse_int<T: std::str::FromStr>(field: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .trim()
        .parse::<T>()
        .map_err(|e| Error::Parse(format!("line {line}: `{field}`: {e}")))
}

/// Splits a CSV document after checking its header.
fn csv_rows<'a>(text: &'a str, header: &str) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((_, h)) => return Err(Error::Parse(format!("line 1: expected header `{header}`, found `{h}`"))),
        None => return Err(Error::Parse("empty document".into())),
    }
    let n = header.split(',').count();
    let mut out = Vec::new();
    for (i, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != n {
            return Err(Error::Parse(format!("line {}: expected {n} fields, found {}", i + 1, fields.len())));
        }
        out.push((i + 1, fields));
    }
    Ok(out)
}

/// ```text
/// domain <lo> <hi>
/// band <lo> <hi> [degenerate]
/// flat <energy> infinite|finite
/// ```
pub fn write_spectral_set(set: &SpectralSet) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "domain {} {}", fmt_real(set.domain.lo), fmt_real(set.domain.hi));
    for b in &set.bands {
        let _ = write!(s, "band {} {}", fmt_real(b.lo), fmt_real(b.hi));
        s.push_str(if b.degenerate { " degenerate\n" } else { "\n" });
    }
    for f in &set.flat_bands {
        let kind = if f.infinite_multiplicity { "infinite" } else { "finite" };
        let _ = writeln!(s, "flat {} {kind}", fmt_real(f.energy));
    }
    s
}

pub fn read_spectral_set(text: &str) -> Result<SpectralSet> {
    let mut domain = None;
    let mut bands = Vec::new();
    let mut flat = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let w: Vec<&str> = l.split_whitespace().collect();
        match w.as_slice() {
            [] => {}
            [c, ..] if c.starts_with('#') => {}
            ["domain", lo, hi] => domain = Some(Interval::new(parse_real(lo, line)?, parse_real(hi, line)?)),
            ["band", lo, hi, rest @ ..] if rest.len() <= 1 => {
                let mut b = Band::new(parse_real(lo, line)?, parse_real(hi, line)?);
                b.degenerate = rest.first() == Some(&"degenerate");
                bands.push(b);
            }
            ["flat", e, kind] => flat.push(FlatBand {
                energy: parse_real(e, line)?,
                infinite_multiplicity: match *kind {
                    "infinite" => true,
                    "finite" => false,
                    other => return Err(Error::Parse(format!("line {line}: unknown multiplicity `{other}`"))),
                },
            }),
            _ => return Err(Error::Parse(format!("line {line}: cannot parse `{l}`"))),
        }
    }
    let domain = domain.ok_or_else(|| Error::Parse("missing `domain` line".into()))?;
    Ok(SpectralSet {
        bands,
        flat_bands: flat,
        domain,
    })
}

pub const SPECTRAL_CSV_HEADER: &str = "kind,lo,hi,flag";

/// Bands as `band,lo,hi,regular|degenerate`, flat bands as
/// `flat,E,E,infinite|finite`.
pub fn write_spectral_csv(set: &SpectralSet) -> String {
    let mut s = format!("{SPECTRAL_CSV_HEADER}\n");
    for b in &set.bands {
        let flag = if b.degenerate { "degenerate" } else { "regular" };
        let _ = writeln!(s, "band,{},{},{flag}", fmt_real(b.lo), fmt_real(b.hi));
    }
    for f in &set.flat_bands {
        let flag = if f.infinite_multiplicity { "infinite" } else { "finite" };
        let e = fmt_real(f.energy);
        let _ = writeln!(s, "flat,{e},{e},{flag}");
    }
    s
}

/// Reads [`write_spectral_csv`] output. The domain is not stored in the CSV
/// and is taken as the hull of the entries.
pub fn read_spectral_csv(text: &str) -> Result<SpectralSet> {
    let mut bands = Vec::new();
    let mut flat = Vec::new();
    for (line, f) in csv_rows(text, SPECTRAL_CSV_HEADER)? {
        let (lo, hi) = (parse_real(f[1], line)?, parse_real(f[2], line)?);
        match (f[0], f[3]) {
            ("band", flag @ ("regular" | "degenerate")) => {
                let mut b = Band::new(lo, hi);
                b.degenerate = flag == "degenerate";
                bands.push(b);
            }
            ("flat", flag @ ("infinite" | "finite")) => flat.push(FlatBand {
                energy: lo,
                infinite_multiplicity: flag == "infinite",
            }),
            (k, flag) => return Err(Error::Parse(format!("line {line}: unknown row `{k},{flag}`"))),
        }
    }
    let lo = bands.iter().map(|b: &Band| b.lo).chain(flat.iter().map(|f| f.energy)).fold(f64::INFINITY, f64::min);
    let hi = bands.iter().map(|b: &Band| b.hi).chain(flat.iter().map(|f| f.energy)).fold(f64::NEG_INFINITY, f64::max);
    Ok(SpectralSet {
        bands,
        flat_bands: flat,
        domain: Interval::new(lo, hi),
    })
}

pub const SCAN_CSV_HEADER: &str = "k,in_spectrum,sigma_min";

/// One row per scan sample. `k` is the signed momentum: `E = k|k|`.
pub fn write_scan_csv(samples: &[DispersionSample], rank_tol: f64) -> String {
    let mut s = format!("{SCAN_CSV_HEADER}\n");
    for x in samples {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt_real(x.momentum),
            u8::from(x.singular_value <= rank_tol),
            fmt_real(x.singular_value)
        );
    }
    s
}

/// `(k, in_spectrum, sigma_min)` rows.
pub fn read_scan_csv(text: &str) -> Result<Vec<(f64, bool, f64)>> {
    csv_rows(text, SCAN_CSV_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            let flag = match f[1].trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::Parse(format!("line {line}: in_spectrum must be 0 or 1, found `{other}`"))),
            };
            Ok((parse_real(f[0], line)?, flag, parse_real(f[2], line)?))
        })
        .collect()
}

pub const GAP_CSV_HEADER: &str = "index,e_lo,e_hi,k_lo,k_hi";

pub fn write_gap_csv(gaps: &[Interval]) -> String {
    let mut s = format!("{GAP_CSV_HEADER}\n");
    for (i, g) in gaps.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            i + 1,
            fmt_real(g.lo),
            fmt_real(g.hi),
            fmt_real(g.lo.max(0.0).sqrt()),
            fmt_real(g.hi.max(0.0).sqrt())
        );
    }
    s
}

/// Gaps in energy.
pub fn read_gap_csv(text: &str) -> Result<Vec<Interval>> {
    csv_rows(text, GAP_CSV_HEADER)?
        .into_iter()
        .map(|(line, f)| {
            parse_int::<usize>(f[0], line)?;
            Ok(Interval::new(parse_real(f[1], line)?, parse_real(f[2], line)?))
        })
        .collect()
}

pub const BUTTERFLY_CSV_HEADER: &str = "mu_p,mu_q,band_lo,band_hi";

pub fn write_butterfly_csv(data: &ButterflyDataset) -> String {
    let mut s = format!("{BUTTERFLY_CSV_HEADER}\n");
    for row in &data.rows {
        for b in &row.bands {
            let _ = writeln!(s, "{},{},{},{}", row.p, row.q, fmt_real(b.lo), fmt_real(b.hi));
        }
    }
    s
}

/// Rows grouped by frequency in file order.
pub fn read_butterfly_csv(text: &str) -> Result<Vec<ButterflyRow>> {
    let mut rows: Vec<ButterflyRow> = Vec::new();
    for (line, f) in csv_rows(text, BUTTERFLY_CSV_HEADER)? {
        let p = parse_int::<i64>(f[0], line)?;
        let q = parse_int::<u64>(f[1], line)?;
        let band = Interval::new(parse_real(f[2], line)?, parse_real(f[3], line)?);
        match rows.last_mut() {
            Some(r) if r.p == p && r.q == q => r.bands.push(band),
            _ => rows.push(ButterflyRow { p, q, bands: vec![band] }),
        }
    }
    Ok(rows)
}
