//! Matrix Market reader/writer for real square matrices (array and coordinate formats).

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{PhimvError, Result};
use crate::linop::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> PhimvError {
    PhimvError::MtxParse { line, msg: msg.into() }
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| PhimvError::Io { path: path.to_owned(), source })?;
    parse_matrix_market(&text)
}

pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
    }
    let format = match tokens[2].as_str() {
        "array" => Format::Array,
        "coordinate" => Format::Coordinate,
        other => return Err(parse_err(1, format!("unknown format `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(PhimvError::MtxField(other.to_owned())),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry `{other}`"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (size_line, size) = body.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(size_line, format!("bad size `{t}`"))))
        .collect::<Result<_>>()?;
    let expected_len = if format == Format::Coordinate { 3 } else { 2 };
    if dims.len() != expected_len {
        return Err(parse_err(size_line, "wrong number of size fields"));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows != cols {
        return Err(PhimvError::NotSquare { rows, cols });
    }
    let n = rows;
    let mut a = Array2::<f64>::zeros((n, n));

    let parse_value = |line: usize, t: &str| -> Result<f64> {
        let v: f64 = t.parse().map_err(|_| parse_err(line, format!("bad value `{t}`")))?;
        if !v.is_finite() {
            return Err(parse_err(line, "non-finite value"));
        }
        Ok(v)
    };

    match format {
        Format::Coordinate => {
            let nnz = dims[2];
            for _ in 0..nnz {
                let (ln, l) = body.next().ok_or_else(|| parse_err(size_line, "fewer entries than declared"))?;
                let f: Vec<&str> = l.split_whitespace().collect();
                if f.len() != 3 {
                    return Err(parse_err(ln, "expected `row col value`"));
                }
                let i: usize = f[0].parse().map_err(|_| parse_err(ln, "bad row index"))?;
                let j: usize = f[1].parse().map_err(|_| parse_err(ln, "bad column index"))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(ln, format!("index ({i}, {j}) out of range")));
                }
                let v = parse_value(ln, f[2])?;
                let (i, j) = (i - 1, j - 1);
                a[[i, j]] += v;
                if i != j {
                    match symmetry {
                        Symmetry::General => {}
                        Symmetry::Symmetric => a[[j, i]] += v,
                        Symmetry::SkewSymmetric => a[[j, i]] -= v,
                    }
                }
            }
        }
        Format::Array => {
            // Column-major; symmetric variants store the lower triangle only.
            for j in 0..n {
                let start = match symmetry {
                    Symmetry::General => 0,
                    Symmetry::Symmetric => j,
                    Symmetry::SkewSymmetric => j + 1,
                };
                for i in start..n {
                    let (ln, l) = body.next().ok_or_else(|| parse_err(size_line, "fewer entries than declared"))?;
                    let v = parse_value(ln, l.trim())?;
                    a[[i, j]] = v;
                    match symmetry {
                        Symmetry::General => {}
                        Symmetry::Symmetric => a[[j, i]] = v,
                        Symmetry::SkewSymmetric => a[[j, i]] = -v,
                    }
                }
            }
        }
    }
    if let Some((ln, _)) = body.next() {
        return Err(parse_err(ln, "trailing data after declared entries"));
    }
    DenseMatrix::new(a)
}

/// Writes `a` in `array real general` format with round-trip precision.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let io = |source| PhimvError::Io { path: path.to_owned(), source };
    let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
    let e = a.entries();
    let n = e.nrows();
    writeln!(f, "%%MatrixMarket matrix array real general").map_err(io)?;
    writeln!(f, "{n} {n}").map_err(io)?;
    for j in 0..n {
        for i in 0..n {
            writeln!(f, "{:e}", e[[i, j]]).map_err(io)?;
        }
    }
    f.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn array_identity() {
        let m = parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n").unwrap();
        assert_eq!(m.entries(), &Array2::<f64>::eye(2));
    }

    #[test]
    fn coordinate_single_entry() {
        let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 1\n1 2 3\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.entries(), &array![[0.0, 3.0], [0.0, 0.0]]);
    }

    #[test]
    fn symmetric_expanded() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n2 1 5\n3 3 -1\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.entries(), &array![[0.0, 5.0, 0.0], [5.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);

        let text = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        let m = parse_matrix_market(text).unwrap();
        assert_eq!(m.entries(), &array![[1.0, 2.0], [2.0, 3.0]]);
    }

    #[test]
    fn distinct_diagnostics() {
        let complex = "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1 0\n";
        assert!(matches!(parse_matrix_market(complex), Err(PhimvError::MtxField(f)) if f == "complex"));
        let rect = "%%MatrixMarket matrix array real general\n2 3\n";
        assert!(matches!(parse_matrix_market(rect), Err(PhimvError::NotSquare { rows: 2, cols: 3 })));
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 3\n";
        assert!(matches!(parse_matrix_market(bad), Err(PhimvError::MtxParse { line: 3, .. })));
        let short = "%%MatrixMarket matrix array real general\n2 2\n1\n";
        assert!(matches!(parse_matrix_market(short), Err(PhimvError::MtxParse { .. })));
        assert!(matches!(parse_matrix_market("hello"), Err(PhimvError::MtxParse { line: 1, .. })));
    }

    #[test]
    fn round_trip_bit_equal() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = Array2::from_shape_fn((6, 6), |_| rng.random_range(-1e3..1e3) * rng.random::<f64>());
        let a = DenseMatrix::new(a).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        write_matrix_market(&path, &a).unwrap();
        let b = read_matrix_market(&path).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries().iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn missing_file() {
        assert!(matches!(read_matrix_market("/nonexistent/x.mtx"), Err(PhimvError::Io { .. })));
    }
}
