//! File formats: JSON complexes, OFF triangle meshes, headerless CSV point
//! clouds, JSON cochains, and the CSV/text emitters for operators,
//! diagrams, loss histories and embeddings.
//!
//! Every floating-point value is printed with 17 significant digits so that
//! outputs round-trip exactly.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::complex::{build_complex, Cochain, SimplicialComplex};
use crate::dec::SparseOperator;
use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;
use crate::scalar::Scalar;

/// 17 significant digits: one leading digit plus 16 after the point.
pub fn format_float<T: Scalar>(value: T) -> String {
    format!("{value:.16e}")
}

/// JSON complex file: `{"maximal_simplices": [[0,1,2], ...]}`.
#[derive(Serialize, Deserialize)]
pub struct ComplexFile {
    pub maximal_simplices: Vec<Vec<usize>>,
}

pub fn complex_from_json(text: &str) -> Result<SimplicialComplex> {
    let file: ComplexFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("complex JSON: {e}")))?;
    build_complex(&file.maximal_simplices)
}

pub fn complex_to_json(maximal_simplices: &[Vec<usize>]) -> String {
    serde_json::to_string_pretty(&ComplexFile {
        maximal_simplices: maximal_simplices.to_vec(),
    })
    .expect("serializable")
}

/// OFF triangle mesh: `OFF` header, counts line, vertex coordinate lines,
/// then face lines whose vertex tuples become the maximal simplices.
/// Returns the complex together with the vertex coordinates.
pub fn complex_from_off(text: &str) -> Result<(SimplicialComplex, Array2<f64>)> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("empty OFF file".into()))?;
    if header != "OFF" {
        return Err(Error::Parse(format!("expected OFF header, got '{header}'")));
    }
    let counts = lines.next().ok_or_else(|| Error::Parse("missing OFF counts line".into()))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| Error::Parse(format!("OFF counts: {e}"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(Error::Parse("OFF counts line needs vertex and face counts".into()));
    }
    let (n_vertices, n_faces) = (counts[0], counts[1]);

    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(n_vertices);
    for i in 0..n_vertices {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("OFF vertex {i} missing")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| Error::Parse(format!("OFF vertex {i}: {e}"))))
            .collect::<Result<_>>()?;
        if row.is_empty() {
            return Err(Error::Parse(format!("OFF vertex {i} has no coordinates")));
        }
        if let Some(first) = coords.first() {
            if row.len() != first.len() {
                return Err(Error::Parse("OFF vertex rows have mixed arity".into()));
            }
        }
        coords.push(row);
    }
    let mut faces: Vec<Vec<usize>> = Vec::with_capacity(n_faces);
    for i in 0..n_faces {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("OFF face {i} missing")))?;
        let tokens: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| Error::Parse(format!("OFF face {i}: {e}"))))
            .collect::<Result<_>>()?;
        let (&arity, verts) = tokens
            .split_first()
            .ok_or_else(|| Error::Parse(format!("OFF face {i} is empty")))?;
        if verts.len() != arity {
            return Err(Error::Parse(format!(
                "OFF face {i} declares {arity} vertices but lists {}",
                verts.len()
            )));
        }
        if verts.iter().any(|&v| v >= n_vertices) {
            return Err(Error::Parse(format!("OFF face {i} references a missing vertex")));
        }
        faces.push(verts.to_vec());
    }
    // isolated vertices still belong to the complex
    let mut maximal = faces;
    for v in 0..n_vertices {
        if !maximal.iter().any(|f| f.contains(&v)) {
            maximal.push(vec![v]);
        }
    }
    let complex = build_complex(&maximal)?;
    let dim = coords.first().map_or(0, Vec::len);
    let flat: Vec<f64> = coords.into_iter().flatten().collect();
    let coords = Array2::from_shape_vec((n_vertices, dim), flat).expect("checked arity");
    Ok((complex, coords))
}

/// Headerless CSV point cloud, one point per row.
pub fn points_from_csv<T: Scalar>(text: &str) -> Result<Array2<T>> {
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<T> = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map(T::from_f64_lossy)
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, got {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("CSV has no data rows".into()));
    }
    let (n, d) = (rows.len(), rows[0].len());
    let flat: Vec<T> = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec((n, d), flat).expect("checked arity"))
}

pub fn points_to_csv<T: Scalar>(points: &Array2<T>) -> String {
    let mut out = String::new();
    for row in points.rows() {
        let line: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// JSON cochain file: `{"degree": k, "values": [[...], ...]}`.
#[derive(Serialize, Deserialize)]
pub struct CochainFile {
    pub degree: usize,
    pub values: Vec<Vec<f64>>,
}

pub fn cochain_from_json<T: Scalar>(text: &str, complex: &SimplicialComplex) -> Result<Cochain<T>> {
    let file: CochainFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("cochain JSON: {e}")))?;
    let n = file.values.len();
    let c = file.values.first().map_or(0, Vec::len);
    if file.values.iter().any(|row| row.len() != c) {
        return Err(Error::Parse("cochain value rows have mixed arity".into()));
    }
    let flat: Vec<T> = file
        .values
        .into_iter()
        .flatten()
        .map(T::from_f64_lossy)
        .collect();
    let values = Array2::from_shape_vec((n, c), flat)
        .map_err(|e| Error::Parse(format!("cochain values: {e}")))?;
    Cochain::new(complex, file.degree, values)
}

/// Coordinate text format: a `rows cols nnz` header, then one
/// `row col value` line per entry in row-major order.
pub fn operator_to_text<T: Scalar>(operator: &SparseOperator<T>) -> String {
    let mut out = format!("{} {} {}\n", operator.rows(), operator.cols(), operator.nnz());
    for &(r, c, v) in operator.entries() {
        out.push_str(&format!("{r} {c} {}\n", format_float(v)));
    }
    out
}

/// Diagram CSV: `degree,birth,death` header, `inf` for infinite deaths.
pub fn diagram_to_csv<T: Scalar>(diagram: &PersistenceDiagram<T>) -> String {
    let mut out = String::from("degree,birth,death\n");
    for degree in 0..=diagram.max_degree() {
        for point in diagram.points(degree) {
            let death = match point.death {
                Some(d) => format_float(d),
                None => "inf".to_string(),
            };
            out.push_str(&format!("{degree},{},{death}\n", format_float(point.birth)));
        }
    }
    out
}

/// Loss history CSV with an `iter,loss` header.
pub fn loss_history_to_csv<T: Scalar>(history: &[T]) -> String {
    let mut out = String::from("iter,loss\n");
    for (i, loss) in history.iter().enumerate() {
        out.push_str(&format!("{i},{}\n", format_float(*loss)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::skeleton_counts;
    use crate::dec::hodge_laplacian;

    #[test]
    fn float_format_round_trips() {
        for v in [1.0, 2f64.sqrt(), -1.0 / 3.0, 1e-300, 0.0] {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn complex_json_round_trip() {
        let text = r#"{"maximal_simplices": [[0,1,2],[1,2,3]]}"#;
        let k = complex_from_json(text).unwrap();
        assert_eq!(skeleton_counts(&k), vec![4, 5, 2]);
        let again = complex_from_json(&complex_to_json(&[vec![0, 1, 2], vec![1, 2, 3]])).unwrap();
        assert_eq!(skeleton_counts(&again), vec![4, 5, 2]);
    }

    #[test]
    fn off_reader() {
        let text = "OFF\n4 2 5\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 2\n3 1 3 2\n";
        let (k, coords) = complex_from_off(text).unwrap();
        assert_eq!(skeleton_counts(&k), vec![4, 5, 2]);
        assert_eq!(coords.nrows(), 4);
        assert_eq!(coords[(3, 0)], 1.0);
    }

    #[test]
    fn off_rejects_bad_header() {
        assert!(matches!(
            complex_from_off("NOFF\n1 0 0\n0 0 0\n"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn point_csv_round_trip() {
        let pts = ndarray::array![[0.1, 0.2], [2f64.sqrt(), -1.0]];
        let text = points_to_csv(&pts);
        let back: Array2<f64> = points_from_csv(&text).unwrap();
        assert_eq!(back, pts);
    }

    #[test]
    fn ragged_csv_rejected() {
        let err = points_from_csv::<f64>("1,2\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn cochain_json_checks_shape() {
        let k = build_complex(&[vec![0, 1], vec![1, 2]]).unwrap();
        let good = r#"{"degree": 0, "values": [[1.0],[2.0],[3.0]]}"#;
        let f: Cochain<f64> = cochain_from_json(good, &k).unwrap();
        assert_eq!(f.values().nrows(), 3);
        let bad = r#"{"degree": 1, "values": [[1.0]]}"#;
        assert!(cochain_from_json::<f64>(bad, &k).is_err());
    }

    #[test]
    fn operator_text_format() {
        let k = build_complex(&[vec![0, 1], vec![1, 2]]).unwrap();
        let l0 = hodge_laplacian::<f64>(&k, 0).unwrap();
        let text = operator_to_text(&l0);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "3 3 7");
        let first = lines.next().unwrap();
        assert!(first.starts_with("0 0 "));
        assert_eq!(text.lines().count(), 8);
    }

    #[test]
    fn diagram_csv_contains_inf() {
        use crate::persistence::{compute_persistence, vietoris_rips};
        let d = ndarray::array![[0.0, 3.0], [3.0, 0.0]];
        let filt = vietoris_rips(&d, 1, f64::INFINITY).unwrap();
        let ps = compute_persistence(&filt);
        let csv = diagram_to_csv(&ps.diagram);
        assert!(csv.starts_with("degree,birth,death\n"));
        assert!(csv.contains(",inf"));
    }
}
