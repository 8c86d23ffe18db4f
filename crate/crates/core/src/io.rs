//! CSV and text formats shared by the command-line tool.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimator::{MarkovEstimate, Sample};
use crate::stream::TrajectoryRow;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader)
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io.to_string()),
        kind => parse_err(line, format!("{kind:?}")),
    }
}

/// Reads `k,u1,..,um,y1,..,yl`. Returns `(m, l, samples)`; `k` must count up
/// from 0.
pub fn read_samples<R: Read>(reader: R) -> Result<(usize, usize, Vec<Sample>)> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.is_empty() {
        return Err(parse_err(1, "empty file, expected a header"));
    }
    let cols: Vec<&str> = header.iter().collect();
    let m = cols.iter().filter(|c| c.starts_with('u')).count();
    let l = cols.iter().filter(|c| c.starts_with('y')).count();
    let expected: Vec<String> = std::iter::once("k".to_string())
        .chain((1..=m).map(|r| format!("u{r}")))
        .chain((1..=l).map(|j| format!("y{j}")))
        .collect();
    if cols != expected || m == 0 || l == 0 {
        return Err(parse_err(1, format!("expected header '{}', got '{}'", expected.join(","), cols.join(","))));
    }

    let mut samples = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let lineno = record_line(&rec);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 1 + m + l {
            return Err(parse_err(lineno, format!("expected {} fields, got {}", 1 + m + l, rec.len())));
        }
        let k: usize = rec[0].parse().map_err(|_| parse_err(lineno, format!("bad sample index '{}'", &rec[0])))?;
        if k != samples.len() {
            return Err(parse_err(lineno, format!("sample index {k} out of sequence, expected {}", samples.len())));
        }
        let mut values = Vec::with_capacity(m + l);
        for f in rec.iter().skip(1) {
            let v: f64 = f.parse().map_err(|_| parse_err(lineno, format!("non-numeric field '{f}'")))?;
            if !v.is_finite() {
                return Err(parse_err(lineno, format!("non-finite field '{f}'")));
            }
            values.push(v);
        }
        let y = values.split_off(m);
        samples.push(Sample::new(values, y));
    }
    Ok((m, l, samples))
}

pub fn write_samples<W: Write>(mut w: W, samples: &[Sample]) -> Result<()> {
    let (m, l) = samples.first().map_or((0, 0), |s| (s.u.len(), s.y.len()));
    let mut header = vec!["k".to_string()];
    header.extend((1..=m).map(|r| format!("u{r}")));
    header.extend((1..=l).map(|j| format!("y{j}")));
    writeln!(w, "{}", header.join(","))?;
    for (k, s) in samples.iter().enumerate() {
        write!(w, "{k}")?;
        for v in s.u.iter().chain(&s.y) {
            // Display for f64 is the shortest representation that round-trips
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn channel_header(prefix: &str, l: usize, m: usize) -> Vec<String> {
    (1..=l).flat_map(|j| (1..=m).map(move |r| format!("{prefix}_{j}_{r}"))).collect()
}

pub fn write_truth<W: Write>(mut w: W, truth: &[Vec<usize>], l: usize, m: usize) -> Result<()> {
    writeln!(w, "k,{}", channel_header("T", l, m).join(","))?;
    for (k, row) in truth.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(usize::to_string).collect();
        writeln!(w, "{k},{}", cells.join(","))?;
    }
    Ok(())
}

/// Reads a truth file; returns one row-major delay vector per sample.
pub fn read_truth<R: Read>(reader: R) -> Result<Vec<Vec<usize>>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.get(0) != Some("k") || !header.get(1).is_some_and(|c| c.starts_with("T_")) {
        return Err(parse_err(1, "truth header must be 'k,T_1_1,...'"));
    }
    let width = header.len();
    let mut truth = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let lineno = record_line(&rec);
        if rec.len() != width {
            return Err(parse_err(lineno, format!("expected {width} fields, got {}", rec.len())));
        }
        let parsed: std::result::Result<Vec<usize>, _> = rec.iter().map(str::parse::<usize>).collect();
        let parsed = parsed.map_err(|_| parse_err(lineno, "truth entries must be nonnegative integers"))?;
        if parsed[0] != truth.len() {
            return Err(parse_err(lineno, format!("sample index {} out of sequence", parsed[0])));
        }
        truth.push(parsed[1..].to_vec());
    }
    Ok(truth)
}

pub fn write_trajectory_header<W: Write>(mut w: W, l: usize, m: usize) -> Result<()> {
    writeln!(w, "k,{},{}", channel_header("d", l, m).join(","), channel_header("v", l, m).join(","))?;
    Ok(())
}

pub fn write_trajectory_row<W: Write>(mut w: W, row: &TrajectoryRow) -> Result<()> {
    write!(w, "{}", row.k)?;
    for d in &row.delays.delays {
        write!(w, ",{d}")?;
    }
    for v in &row.delays.valid {
        write!(w, ",{}", u8::from(*v))?;
    }
    writeln!(w)?;
    Ok(())
}

/// One snapshot: a line with `k`, then the `hl x m` first block column.
pub fn write_snapshot<W: Write>(mut w: W, k: usize, est: &MarkovEstimate) -> Result<()> {
    writeln!(w, "{k}")?;
    let col = est.first_block_column();
    for r in 0..col.nrows() {
        let cells: Vec<String> = (0..col.ncols()).map(|c| col[(r, c)].to_string()).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// `dir/ex1.csv` -> `dir/ex1.<suffix>`.
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    path.with_file_name(format!("{stem}.{suffix}"))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(parse_err(idx + 1, format!("expected key=value, got '{line}'")));
        };
        let key = k.trim().trim_start_matches("--").to_string();
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}
