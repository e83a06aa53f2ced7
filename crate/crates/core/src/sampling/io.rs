//! Plain-text dataset serialization.
//!
//! Format: one metadata line `# problem=<kind> seed=<u64> n=<int>`, one
//! comma-separated header of column names (inputs then `label`), then n data
//! rows. Values are rendered with 17 significant digits, which round-trips
//! every f64 bit-exactly.

use super::{ProblemKind, SampleError, SampleGrid};
use crate::mathcore::{Mat64, Vec64};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `grid` to `path`.
pub fn write_dataset(grid: &SampleGrid, path: &Path) -> Result<(), SampleError> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "# problem={} seed={} n={}",
        grid.problem.id(),
        grid.seed,
        grid.len()
    )?;
    let mut names: Vec<&str> = grid.problem.input_names().to_vec();
    names.push("label");
    writeln!(w, "{}", names.join(","))?;
    for i in 0..grid.len() {
        let mut fields: Vec<String> = grid.inputs.row(i).iter().map(|&v| fmt_f64(v)).collect();
        fields.push(fmt_f64(grid.labels[i]));
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset`]; read o write is
/// bit-identical on every field.
pub fn read_dataset(path: &Path) -> Result<SampleGrid, SampleError> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();

    let meta = lines
        .next()
        .ok_or_else(|| SampleError::Format("empty dataset file".into()))??;
    let (problem, seed, n) = parse_meta(&meta)?;

    let header = lines
        .next()
        .ok_or_else(|| SampleError::Format("missing column header".into()))??;
    let mut expected: Vec<&str> = problem.input_names().to_vec();
    expected.push("label");
    let got: Vec<&str> = header.split(',').collect();
    if got != expected {
        return Err(SampleError::Format(format!(
            "column header mismatch: expected {expected:?}, got {got:?}"
        )));
    }

    let d = problem.input_dim();
    let mut inputs = Mat64::zeros(n, d);
    let mut labels = Vec64::zeros(n);
    let mut count = 0usize;
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if count >= n {
            return Err(SampleError::Format(format!(
                "more than the declared {n} data rows"
            )));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 1 {
            return Err(SampleError::Format(format!(
                "row {count}: expected {} fields, got {}",
                d + 1,
                fields.len()
            )));
        }
        for (j, field) in fields.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|e| SampleError::Format(format!("row {count} field {j}: {e}")))?;
            if !v.is_finite() {
                return Err(SampleError::Format(format!(
                    "row {count} field {j}: non-finite value"
                )));
            }
            if j < d {
                inputs[(count, j)] = v;
            } else {
                labels[count] = v;
            }
        }
        count += 1;
    }
    if count != n {
        return Err(SampleError::Format(format!(
            "expected {n} data rows, found {count}"
        )));
    }
    Ok(SampleGrid {
        inputs,
        labels,
        problem,
        seed,
    })
}

fn parse_meta(line: &str) -> Result<(ProblemKind, u64, usize), SampleError> {
    let body = line
        .strip_prefix("# ")
        .ok_or_else(|| SampleError::Format("metadata line must start with `# `".into()))?;
    let mut problem = None;
    let mut seed = None;
    let mut n = None;
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| SampleError::Format(format!("bad metadata token `{token}`")))?;
        match key {
            "problem" => {
                problem = Some(value.parse::<ProblemKind>().map_err(SampleError::Format)?)
            }
            "seed" => {
                seed = Some(value.parse::<u64>().map_err(|e| {
                    SampleError::Format(format!("bad seed `{value}`: {e}"))
                })?)
            }
            "n" => {
                n = Some(value.parse::<usize>().map_err(|e| {
                    SampleError::Format(format!("bad row count `{value}`: {e}"))
                })?)
            }
            other => return Err(SampleError::Format(format!("unknown metadata key `{other}`"))),
        }
    }
    match (problem, seed, n) {
        (Some(p), Some(s), Some(n)) => Ok((p, s, n)),
        _ => Err(SampleError::Format(
            "metadata must contain problem, seed and n".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::build_dataset;

    fn tmp(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("pricenet_io_{}_{name}", std::process::id()));
        p
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let grid = build_dataset(ProblemKind::BsPrice, 100, 21).unwrap();
        let path = tmp("roundtrip.csv");
        write_dataset(&grid, &path).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(grid, back);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn header_names_match_box_names() {
        let grid = build_dataset(ProblemKind::HestonPrice, 5, 21).unwrap();
        let path = tmp("header.csv");
        write_dataset(&grid, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let header = text.lines().nth(1).unwrap();
        assert_eq!(header, "m,tau,r,rho,kappa,vbar,gamma,v0,label");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn truncated_file_is_a_format_error() {
        let grid = build_dataset(ProblemKind::BsPrice, 10, 21).unwrap();
        let path = tmp("trunc.csv");
        write_dataset(&grid, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(8).collect();
        std::fs::write(&path, truncated.join("\n")).unwrap();
        assert!(matches!(read_dataset(&path), Err(SampleError::Format(_))));
        std::fs::remove_file(&path).ok();
    }
}
