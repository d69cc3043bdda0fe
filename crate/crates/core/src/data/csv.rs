use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::points::Points;
use crate::scalar::Scalar;

/// Reads a rectangular numeric CSV. A first row that does not parse as
/// numbers is taken to be a header and skipped. Error rows are 1-based
/// record numbers in the file, columns are 1-based.
pub fn read_csv<T: Scalar, R: Read>(reader: R) -> Result<Points<T>> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);
    let mut data: Vec<T> = Vec::new();
    let mut dim: Option<usize> = None;
    let mut rows = 0usize;
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            row: line,
            col: 0,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: Vec<std::result::Result<T, usize>> = record
            .iter()
            .enumerate()
            .map(|(c, s)| s.parse::<T>().map_err(|_| c))
            .collect();
        if idx == 0 && parsed.iter().any(|p| p.is_err()) {
            dim = Some(record.len());
            continue;
        }
        match dim {
            Some(d) if d != record.len() => {
                return Err(Error::Parse {
                    row: line,
                    col: record.len().min(d) + 1,
                    message: format!("expected {d} fields, found {}", record.len()),
                })
            }
            None => dim = Some(record.len()),
            _ => {}
        }
        for (c, p) in parsed.into_iter().enumerate() {
            match p {
                Ok(v) if v.is_finite() => data.push(v),
                _ => {
                    return Err(Error::Parse {
                        row: line,
                        col: c + 1,
                        message: format!("not a finite number: {:?}", &record[c]),
                    })
                }
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Empty("CSV file has no data rows"));
    }
    Points::new(data, rows, dim.unwrap_or(0))
}

pub fn load_csv<T: Scalar>(path: &Path) -> Result<Points<T>> {
    read_csv(File::open(path)?)
}

/// Writes one row per line with no header. Values use the shortest
/// representation that parses back to the identical float.
pub fn write_csv<T: Scalar, W: Write>(points: &Points<T>, mut out: W) -> Result<()> {
    let mut line = String::new();
    for row in points.iter_rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv<T: Scalar>(points: &Points<T>, path: &Path) -> Result<()> {
    write_csv(points, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_small_matrix() {
        let p = Points::from_rows(&[[0.1f64, -2.5e-17], [1e300, 3.0]]).unwrap();
        let mut buf = Vec::new();
        write_csv(&p, &mut buf).unwrap();
        let q: Points<f64> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn header_row_is_skipped() {
        let text = "x,y\n1,2\n3,4\n";
        let p: Points<f64> = read_csv(text.as_bytes()).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn ragged_row_names_the_row() {
        let text = "1,2\n3,4\n5\n";
        match read_csv::<f64, _>(text.as_bytes()) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let text = "1,2\n3,abc\n";
        match read_csv::<f64, _>(text.as_bytes()) {
            Err(Error::Parse { row, col, .. }) => assert_eq!((row, col), (2, 2)),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_cells_are_rejected() {
        assert!(read_csv::<f64, _>("1,NaN\n".as_bytes()).is_err());
        assert!(read_csv::<f64, _>("1,inf\n".as_bytes()).is_err());
    }

    #[test]
    fn header_only_is_empty() {
        assert!(matches!(read_csv::<f64, _>("a,b\n".as_bytes()), Err(Error::Empty(_))));
    }
}
