//! Data-dictionary CSV: header `k,u1,...,u<nu>,y1,...,y<ny>`, one row per sample.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use super::{DataDictionary, Trajectory};
use crate::error::{Error, Result};

/// Shortest round-trip decimal form; scientific notation outside `[1e-4, 1e15)`.
pub fn format_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<DataDictionary> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_dictionary(file, path)
}

pub fn save_dictionary(d: &DataDictionary, path: impl AsRef<Path>) -> Result<()> {
    let mut f = File::create(path)?;
    write_dictionary(d, &mut f)
}

pub fn write_dictionary<W: Write>(d: &DataDictionary, out: &mut W) -> Result<()> {
    let mut header = vec!["k".to_string()];
    header.extend((1..=d.n_u()).map(|i| format!("u{i}")));
    header.extend((1..=d.n_y()).map(|i| format!("y{i}")));
    writeln!(out, "{}", header.join(","))?;
    let (u, y) = (d.u.as_matrix(), d.y.as_matrix());
    for k in 0..d.len() {
        let mut row = vec![k.to_string()];
        row.extend(u.column(k).iter().map(|&v| format_f64(v)));
        row.extend(y.column(k).iter().map(|&v| format_f64(v)));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn parse_err(path: &Path, line: u64, column: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line: line as usize,
        column,
        msg: msg.into(),
    }
}

/// Parse a dictionary; `path` is only used in error messages.
pub fn read_dictionary<R: Read>(reader: R, path: &Path) -> Result<DataDictionary> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, 1, e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    if names.first() != Some(&"k") {
        return Err(parse_err(path, 1, 1, "first header column must be \"k\""));
    }
    let n_u = names
        .iter()
        .skip(1)
        .take_while(|n| n.starts_with('u'))
        .count();
    let n_y = names.len() - 1 - n_u;
    for (i, name) in names.iter().enumerate().skip(1) {
        let expected = if i <= n_u {
            format!("u{i}")
        } else {
            format!("y{}", i - n_u)
        };
        if *name != expected {
            return Err(parse_err(
                path,
                1,
                i + 1,
                format!("expected header \"{expected}\", found \"{name}\""),
            ));
        }
    }
    if n_u == 0 || n_y == 0 {
        return Err(parse_err(
            path,
            1,
            1,
            "need at least one input and one output column",
        ));
    }

    let width = names.len();
    let mut u_vals = Vec::new();
    let mut y_vals = Vec::new();
    let mut count = 0usize;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, 1, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(parse_err(
                path,
                line,
                rec.len().min(width) + 1,
                format!("row {count} has {} fields, expected {width}", rec.len()),
            ));
        }
        let k: usize = rec[0].parse().map_err(|_| {
            parse_err(
                path,
                line,
                1,
                format!("invalid sample index \"{}\"", &rec[0]),
            )
        })?;
        if k != count {
            return Err(parse_err(
                path,
                line,
                1,
                format!("sample index {k} out of sequence, expected {count}"),
            ));
        }
        for (c, field) in rec.iter().enumerate().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, line, c + 1, format!("invalid number \"{field}\"")))?;
            if c <= n_u {
                u_vals.push(v);
            } else {
                y_vals.push(v);
            }
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyTrajectory);
    }
    let u = Trajectory::from_matrix(DMatrix::from_column_slice(n_u, count, &u_vals))?;
    let y = Trajectory::from_matrix(DMatrix::from_column_slice(n_y, count, &y_vals))?;
    DataDictionary::new(u, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<DataDictionary> {
        read_dictionary(s.as_bytes(), Path::new("test.csv"))
    }

    #[test]
    fn parses_minimal_file() {
        let d = parse("k,u1,y1\n0,1.0,0.5\n1,0.0,0.25\n").unwrap();
        assert_eq!((d.len(), d.n_u(), d.n_y()), (2, 1, 1));
        assert_eq!(d.y.as_matrix()[(0, 1)], 0.25);
    }

    #[test]
    fn scientific_notation() {
        let d = parse("k,u1,u2,y1\n0,1e-3,-2.5E2,3\n").unwrap();
        assert_eq!(d.n_u(), 2);
        assert_eq!(d.u.as_matrix()[(1, 0)], -250.0);
    }

    #[test]
    fn missing_k_column() {
        let err = parse("u1,y1\n1.0,0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn ragged_row_names_row() {
        let err = parse("k,u1,y1\n0,1.0,0.5\n1,0.0\n").unwrap_err();
        match err {
            Error::Parse { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains("row 1"), "{msg}");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_number_reports_column() {
        let err = parse("k,u1,y1\n0,1.0,abc\n").unwrap_err();
        assert!(
            matches!(
                err,
                Error::Parse {
                    line: 2,
                    column: 3,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn gap_in_index() {
        assert!(parse("k,u1,y1\n0,1,1\n2,1,1\n").is_err());
    }

    #[test]
    fn format_roundtrips() {
        for v in [0.1, 1e-20, -3.25e17, 123456.789, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
