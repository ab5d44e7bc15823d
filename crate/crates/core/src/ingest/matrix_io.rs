//! Matrix files: a header line `n=<int>` followed by `n` comma-separated rows
//! of meters. Values are written in shortest round-trip decimal form, so a
//! matrix quantized to 0.1 m prints with at most one decimal place and any
//! finite matrix reloads bit-exactly.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::IngestError;
use crate::model::DistanceMatrix;

pub fn write_matrix<W: Write>(matrix: &DistanceMatrix, mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "n={}", matrix.n())?;
    let mut line = String::new();
    for row in matrix.rows() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(writer, "{line}")?;
    }
    writer.flush()
}

pub fn read_matrix<R: Read>(reader: R) -> Result<DistanceMatrix, IngestError> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| IngestError::MalformedMatrix(e.to_string()))?,
        None => return Err(IngestError::MalformedMatrix("empty file".into())),
    };
    let n: usize = header
        .trim()
        .strip_prefix("n=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| IngestError::MalformedMatrix(format!("bad header line {header:?}")))?;

    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0usize;
    for line in lines {
        let line = line.map_err(|e| IngestError::MalformedMatrix(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        if rows > n {
            return Err(IngestError::DimensionHeader {
                header: n,
                found: "more rows".into(),
            });
        }
        let before = data.len();
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                IngestError::MalformedMatrix(format!("row {}: bad value {cell:?}", rows - 1))
            })?;
            data.push(v);
        }
        if data.len() - before != n {
            return Err(IngestError::DimensionHeader {
                header: n,
                found: format!("row {} has {} columns", rows - 1, data.len() - before),
            });
        }
    }
    if rows != n {
        return Err(IngestError::DimensionHeader {
            header: n,
            found: format!("{rows} rows"),
        });
    }
    Ok(DistanceMatrix::from_flat(n, data)?)
}

pub fn save_matrix(matrix: &DistanceMatrix, path: impl AsRef<Path>) -> Result<(), IngestError> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_matrix(matrix, &mut buf).map_err(|e| IngestError::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| IngestError::io(path, e))
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DistanceMatrix, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_matrix(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m3() -> DistanceMatrix {
        DistanceMatrix::from_rows(vec![
            vec![0.0, 100.5, 230.0],
            vec![120.0, 0.0, 99.9],
            vec![231.4, 87.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn text_layout() {
        let mut buf = Vec::new();
        write_matrix(&m3(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n=3\n0,100.5,230\n120,0,99.9\n231.4,87,0\n"
        );
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.txt");
        save_matrix(&m3(), &p).unwrap();
        assert_eq!(load_matrix(&p).unwrap(), m3());
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(
            read_matrix("".as_bytes()),
            Err(IngestError::MalformedMatrix(_))
        ));
        assert!(read_matrix("x=2\n0,1\n1,0\n".as_bytes()).is_err());
        assert!(matches!(
            read_matrix("n=3\n0,1,2\n1,0,2\n".as_bytes()),
            Err(IngestError::DimensionHeader { header: 3, .. })
        ));
        assert!(read_matrix("n=2\n0,1,5\n1,0\n".as_bytes()).is_err());
        assert!(read_matrix("n=2\n0,abc\n1,0\n".as_bytes()).is_err());
        assert!(read_matrix("n=2\n0,1\n1,0\n3,3\n".as_bytes()).is_err());
        assert!(read_matrix("n=2\n0,-1\n1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn header_150_with_149_rows() {
        let mut text = String::from("n=150\n");
        for i in 0..149 {
            let row: Vec<String> = (0..150)
                .map(|j| if i == j { "0".into() } else { "1".into() })
                .collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        assert!(matches!(
            read_matrix(text.as_bytes()),
            Err(IngestError::DimensionHeader { header: 150, .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(n in 1usize..8, vals in prop::collection::vec(0.0f64..1e7, 64)) {
            let mut rows = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        rows[i][j] = vals[(i * 8 + j) % 64];
                    }
                }
            }
            let m = DistanceMatrix::from_rows(rows).unwrap();
            let mut buf = Vec::new();
            write_matrix(&m, &mut buf).unwrap();
            let back = read_matrix(buf.as_slice()).unwrap();
            for i in 0..n {
                for (a, b) in m.row(i).iter().zip(back.row(i)) {
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
            }
        }
    }
}
