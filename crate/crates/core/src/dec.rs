//! Discrete exterior calculus operators: boundary, coboundary / exterior
//! derivative, Hodge Laplacians, the graph Laplacian, and block operators
//! acting on the whole cochain space of a complex.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::complex::{Cochain, ComplexId, Degree, SimplicialComplex};
use crate::error::{Error, Result};
use crate::exact;
use crate::scalar::Scalar;

/// Domain or codomain of a sparse operator: which complex, which degree.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SpaceTag {
    pub complex: ComplexId,
    pub degree: Degree,
}

impl SpaceTag {
    pub fn new(complex: ComplexId, degree: Degree) -> Self {
        Self { complex, degree }
    }
}

/// A sparse linear map between cochain spaces, stored as coordinate
/// triplets in row-major order with no duplicates and no explicit zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator<T> {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, T)>,
    domain: SpaceTag,
    codomain: SpaceTag,
}

impl<T: Scalar> SparseOperator<T> {
    /// Builds an operator from coordinate triplets. Duplicate coordinates
    /// are summed; zeros are dropped; entries end up sorted row-major.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, T)>,
        domain: SpaceTag,
        codomain: SpaceTag,
    ) -> Result<Self> {
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::Dimension(format!(
                    "entry ({r},{c}) outside {rows}x{cols}"
                )));
            }
            *acc.entry((r, c)).or_insert_with(T::zero) += v;
        }
        let entries = acc
            .into_iter()
            .filter(|&(_, v)| v != T::zero())
            .map(|((r, c), v)| (r, c, v))
            .collect();
        Ok(Self {
            rows,
            cols,
            entries,
            domain,
            codomain,
        })
    }

    /// The zero operator of the given shape.
    pub fn zero(rows: usize, cols: usize, domain: SpaceTag, codomain: SpaceTag) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
            domain,
            codomain,
        }
    }

    /// Identity on the degree-k cochain space of a complex.
    pub fn identity(complex: &SimplicialComplex, k: usize) -> Result<Self> {
        if k > complex.dim() {
            return Err(Error::Degree(format!(
                "identity degree {k} outside 0..={}",
                complex.dim()
            )));
        }
        let n = complex.n_simplices(k);
        let tag = SpaceTag::new(complex.id(), Degree::K(k));
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, T::one())), tag, tag)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Row-major sorted `(row, col, value)` triplets.
    pub fn entries(&self) -> &[(usize, usize, T)] {
        &self.entries
    }

    pub fn domain(&self) -> SpaceTag {
        self.domain
    }

    pub fn codomain(&self) -> SpaceTag {
        self.codomain
    }

    /// Transpose with swapped domain/codomain tags. Values are carried over
    /// bitwise unchanged.
    pub fn transpose(&self) -> Self {
        let mut entries: Vec<(usize, usize, T)> =
            self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
            domain: self.codomain,
            codomain: self.domain,
        }
    }

    /// Operator composition `self * other` (apply `other` first).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut other_by_row: Vec<&[(usize, usize, T)]> = Vec::with_capacity(other.rows);
        let mut start = 0;
        for r in 0..other.rows {
            let end = other.entries[start..]
                .iter()
                .position(|&(er, _, _)| er != r)
                .map_or(other.entries.len(), |p| start + p);
            other_by_row.push(&other.entries[start..end]);
            start = end;
        }
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for &(r, k, v) in &self.entries {
            for &(_, c, w) in other_by_row[k] {
                *acc.entry((r, c)).or_insert_with(T::zero) += v * w;
            }
        }
        let entries = acc
            .into_iter()
            .filter(|&(_, v)| v != T::zero())
            .map(|((r, c), v)| (r, c, v))
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            entries,
            domain: other.domain,
            codomain: self.codomain,
        })
    }

    /// Entrywise sum; shapes and tags must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Self::from_triplets(
            self.rows,
            self.cols,
            self.entries.iter().chain(other.entries.iter()).copied(),
            self.domain,
            self.codomain,
        )
    }

    /// Entrywise negation.
    pub fn negate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, -v)).collect(),
            domain: self.domain,
            codomain: self.codomain,
        }
    }

    /// Dense copy.
    pub fn to_dense(&self) -> Array2<T> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for &(r, c, v) in &self.entries {
            out[(r, c)] = v;
        }
        out
    }

    /// Dense matrix product `A * m` without cochain bookkeeping.
    pub fn apply_dense(&self, m: &Array2<T>) -> Result<Array2<T>> {
        if m.nrows() != self.cols {
            return Err(Error::Dimension(format!(
                "operand has {} rows, operator expects {}",
                m.nrows(),
                self.cols
            )));
        }
        let mut out = Array2::zeros((self.rows, m.ncols()));
        for &(r, c, v) in &self.entries {
            for ch in 0..m.ncols() {
                out[(r, ch)] += v * m[(c, ch)];
            }
        }
        Ok(out)
    }
}

/// The boundary operator from k-chains to (k-1)-chains, shape
/// `n_{k-1} x n_k`. The column of a k-simplex carries `(-1)^i` on the face
/// obtained by deleting its i-th vertex.
pub fn boundary_matrix<T: Scalar>(complex: &SimplicialComplex, k: usize) -> Result<SparseOperator<T>> {
    let triplets = exact::boundary_triplets(complex, k)?;
    SparseOperator::from_triplets(
        complex.n_simplices(k - 1),
        complex.n_simplices(k),
        triplets
            .into_iter()
            .map(|(r, c, v)| (r, c, if v > 0 { T::one() } else { -T::one() })),
        SpaceTag::new(complex.id(), Degree::K(k)),
        SpaceTag::new(complex.id(), Degree::K(k - 1)),
    )
}

/// The k-th exterior derivative (coboundary) from k-cochains to
/// (k+1)-cochains: the exact transpose of `boundary_matrix(complex, k+1)`.
///
/// For `k == dim` there are no (k+1)-simplices and the result is the zero
/// map with zero rows.
pub fn coboundary_matrix<T: Scalar>(
    complex: &SimplicialComplex,
    k: usize,
) -> Result<SparseOperator<T>> {
    if k > complex.dim() {
        return Err(Error::Degree(format!(
            "coboundary degree {k} outside 0..={}",
            complex.dim()
        )));
    }
    if k == complex.dim() {
        return Ok(SparseOperator::zero(
            0,
            complex.n_simplices(k),
            SpaceTag::new(complex.id(), Degree::K(k)),
            SpaceTag::new(complex.id(), Degree::K(k + 1)),
        ));
    }
    Ok(boundary_matrix::<T>(complex, k + 1)?.transpose())
}

/// The k-th Hodge Laplacian `L_k = d_k^T d_k + d_{k+1} d_{k+1}^T` on
/// k-cochains (boundary notation; missing terms at k = 0 or k = dim are
/// zero). Symmetric positive semidefinite by construction.
pub fn hodge_laplacian<T: Scalar>(complex: &SimplicialComplex, k: usize) -> Result<SparseOperator<T>> {
    if k > complex.dim() {
        return Err(Error::Degree(format!(
            "laplacian degree {k} outside 0..={}",
            complex.dim()
        )));
    }
    let tag = SpaceTag::new(complex.id(), Degree::K(k));
    let n = complex.n_simplices(k);
    let mut laplacian = SparseOperator::zero(n, n, tag, tag);
    if k >= 1 {
        let bd = boundary_matrix::<T>(complex, k)?;
        laplacian = laplacian.add(&bd.transpose().matmul(&bd)?)?;
    }
    if k < complex.dim() {
        let bd = boundary_matrix::<T>(complex, k + 1)?;
        laplacian = laplacian.add(&bd.matmul(&bd.transpose())?)?;
    }
    Ok(laplacian)
}

/// Sign convention for the graph Laplacian.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum LaplacianSign {
    /// `D - A`: positive semidefinite, equal to the degree-0 Hodge
    /// Laplacian.
    #[default]
    DegreeMinusAdjacency,
    /// `A - D`: the negated convention.
    AdjacencyMinusDegree,
}

/// The graph Laplacian of the 1-skeleton. With the default `D - A`
/// convention this equals `hodge_laplacian(complex, 0)` entry for entry.
pub fn graph_laplacian<T: Scalar>(
    complex: &SimplicialComplex,
    sign: LaplacianSign,
) -> Result<SparseOperator<T>> {
    let n = complex.n_simplices(0);
    let mut triplets: Vec<(usize, usize, T)> = Vec::new();
    for edge in complex.simplices(1) {
        let u = complex.index_of(&edge.face(1)).unwrap();
        let v = complex.index_of(&edge.face(0)).unwrap();
        triplets.push((u, v, -T::one()));
        triplets.push((v, u, -T::one()));
        triplets.push((u, u, T::one()));
        triplets.push((v, v, T::one()));
    }
    let tag = SpaceTag::new(complex.id(), Degree::K(0));
    let laplacian = SparseOperator::from_triplets(n, n, triplets, tag, tag)?;
    Ok(match sign {
        LaplacianSign::DegreeMinusAdjacency => laplacian,
        LaplacianSign::AdjacencyMinusDegree => laplacian.negate(),
    })
}

/// Applies an operator to a cochain, channel by channel. The cochain must
/// live on the operator's domain complex and degree.
pub fn apply<T: Scalar>(operator: &SparseOperator<T>, f: &Cochain<T>) -> Result<Cochain<T>> {
    if f.complex_id() != operator.domain.complex {
        return Err(Error::Dimension(
            "cochain belongs to a different complex than the operator's domain".into(),
        ));
    }
    if f.degree() != operator.domain.degree {
        return Err(Error::Dimension(format!(
            "cochain degree {} does not match operator domain degree {}",
            f.degree(),
            operator.domain.degree
        )));
    }
    let out = operator.apply_dense(f.values())?;
    Ok(Cochain::from_parts(
        operator.codomain.complex,
        operator.codomain.degree,
        out,
    ))
}

/// Betti numbers `(beta_0, ..., beta_dim)` from exact integer ranks of the
/// boundary matrices: `beta_k = n_k - rank d_k - rank d_{k+1}`.
pub fn betti_numbers(complex: &SimplicialComplex) -> Vec<usize> {
    let dim = complex.dim();
    let mut ranks = vec![0usize; dim + 2];
    for k in 1..=dim {
        let triplets = exact::boundary_triplets(complex, k).unwrap();
        ranks[k] = exact::rank_exact(complex.n_simplices(k - 1), complex.n_simplices(k), &triplets);
    }
    (0..=dim)
        .map(|k| complex.n_simplices(k) - ranks[k] - ranks[k + 1])
        .collect()
}

/// Block specification for an operator on the full cochain space, the
/// direct sum of all degrees: a map from `(target degree, source degree)`
/// to the block acting between those degrees.
#[derive(Clone, Debug, Default)]
pub struct BlockSpec<T> {
    blocks: BTreeMap<(usize, usize), SparseOperator<T>>,
}

impl<T: Scalar> BlockSpec<T> {
    pub fn new() -> Self {
        Self {
            blocks: BTreeMap::new(),
        }
    }

    pub fn insert(mut self, target: usize, source: usize, block: SparseOperator<T>) -> Self {
        self.blocks.insert((target, source), block);
        self
    }

    pub fn blocks(&self) -> &BTreeMap<(usize, usize), SparseOperator<T>> {
        &self.blocks
    }
}

/// Assembles a block operator on the whole cochain space. Degrees are laid
/// out in canonical order k = 0, 1, 2, ...; unspecified blocks are zero.
pub fn block_operator<T: Scalar>(
    complex: &SimplicialComplex,
    spec: &BlockSpec<T>,
) -> Result<SparseOperator<T>> {
    let dim = complex.dim();
    let mut offsets = vec![0usize; dim + 2];
    for k in 0..=dim {
        offsets[k + 1] = offsets[k] + complex.n_simplices(k);
    }
    let total = offsets[dim + 1];

    let mut triplets = Vec::new();
    for (&(target, source), block) in &spec.blocks {
        if target > dim || source > dim {
            return Err(Error::BlockShape(format!(
                "block ({target},{source}) outside complex dimension {dim}"
            )));
        }
        let (nj, ni) = (complex.n_simplices(target), complex.n_simplices(source));
        if block.rows() != nj || block.cols() != ni {
            return Err(Error::BlockShape(format!(
                "block ({target},{source}) has shape {}x{}, expected {nj}x{ni}",
                block.rows(),
                block.cols()
            )));
        }
        if block.domain.complex != complex.id() || block.codomain.complex != complex.id() {
            return Err(Error::BlockShape(format!(
                "block ({target},{source}) was built on a different complex"
            )));
        }
        for &(r, c, v) in block.entries() {
            triplets.push((offsets[target] + r, offsets[source] + c, v));
        }
    }
    SparseOperator::from_triplets(
        total,
        total,
        triplets,
        SpaceTag::new(complex.id(), Degree::Mixed),
        SpaceTag::new(complex.id(), Degree::Mixed),
    )
}

/// All eigenvalues of a symmetric dense matrix by the cyclic Jacobi method.
/// Returned in ascending order.
pub fn symmetric_eigenvalues<T: Scalar>(matrix: &Array2<T>) -> Result<Vec<T>> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::Dimension("eigenvalues need a square matrix".into()));
    }
    let mut a = matrix.clone();
    let tol = T::epsilon() * T::from_f64_lossy(64.0);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= tol * T::from_f64_lossy(n.max(1) as f64) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::from_f64_lossy(2.0) * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = c * aip - s * aiq;
                    a[(i, q)] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[(p, i)];
                    let aqi = a[(q, i)];
                    a[(p, i)] = c * api - s * aqi;
                    a[(q, i)] = s * api + c * aqi;
                }
            }
        }
    }
    let mut eigs: Vec<T> = (0..n).map(|i| a[(i, i)]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_complex;
    use ndarray::array;

    fn path_graph() -> SimplicialComplex {
        build_complex(&[vec![0, 1], vec![1, 2]]).unwrap()
    }

    fn filled_triangle() -> SimplicialComplex {
        build_complex(&[vec![0, 1, 2]]).unwrap()
    }

    fn hollow_triangle() -> SimplicialComplex {
        build_complex(&[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    fn tetrahedron_boundary() -> SimplicialComplex {
        build_complex(&[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]).unwrap()
    }

    /// Independent rank oracle: dense Gaussian elimination in f64 with
    /// partial pivoting and a fixed tolerance.
    fn rank_dense_oracle(m: &Array2<f64>) -> usize {
        let mut a = m.clone();
        let (rows, cols) = (a.nrows(), a.ncols());
        let mut rank = 0;
        let mut row = 0;
        for col in 0..cols {
            if row == rows {
                break;
            }
            let (best, mag) = (row..rows)
                .map(|r| (r, a[(r, col)].abs()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            if mag < 1e-9 {
                continue;
            }
            for j in 0..cols {
                let tmp = a[(row, j)];
                a[(row, j)] = a[(best, j)];
                a[(best, j)] = tmp;
            }
            for r in row + 1..rows {
                let factor = a[(r, col)] / a[(row, col)];
                for j in col..cols {
                    a[(r, j)] -= factor * a[(row, j)];
                }
            }
            rank += 1;
            row += 1;
        }
        rank
    }

    #[test]
    fn boundary_of_filled_triangle() {
        let k = filled_triangle();
        let d2 = boundary_matrix::<f64>(&k, 2).unwrap();
        // edges in lexicographic order: (0,1), (0,2), (1,2)
        assert_eq!(
            d2.entries(),
            &[(0, 0, 1.0), (1, 0, -1.0), (2, 0, 1.0)]
        );
    }

    #[test]
    fn boundary_of_path_graph() {
        let k = path_graph();
        let d1 = boundary_matrix::<f64>(&k, 1).unwrap();
        assert_eq!(d1.to_dense(), array![[-1.0, 0.0], [1.0, -1.0], [0.0, 1.0]]);
    }

    #[test]
    fn boundary_squares_to_zero() {
        let k = tetrahedron_boundary();
        let d1 = boundary_matrix::<f64>(&k, 1).unwrap();
        let d2 = boundary_matrix::<f64>(&k, 2).unwrap();
        assert_eq!(d1.matmul(&d2).unwrap().nnz(), 0);
    }

    #[test]
    fn boundary_degree_out_of_range() {
        let k = path_graph();
        assert!(matches!(
            boundary_matrix::<f64>(&k, 2),
            Err(Error::Degree(_))
        ));
        assert!(matches!(
            boundary_matrix::<f64>(&k, 0),
            Err(Error::Degree(_))
        ));
    }

    #[test]
    fn coboundary_is_exact_transpose() {
        let k = path_graph();
        let d0 = coboundary_matrix::<f64>(&k, 0).unwrap();
        assert_eq!(d0.to_dense(), array![[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]]);
        let bd = boundary_matrix::<f64>(&k, 1).unwrap();
        let bt = bd.transpose();
        assert_eq!(d0.entries(), bt.entries());

        let tri = filled_triangle();
        let d1 = coboundary_matrix::<f64>(&tri, 1).unwrap();
        assert_eq!(d1.to_dense(), array![[1.0, -1.0, 1.0]]);
        let d0 = coboundary_matrix::<f64>(&tri, 0).unwrap();
        assert_eq!(d1.matmul(&d0).unwrap().nnz(), 0);
    }

    #[test]
    fn top_coboundary_is_zero_map() {
        let tri = filled_triangle();
        let d2 = coboundary_matrix::<f64>(&tri, 2).unwrap();
        assert_eq!((d2.rows(), d2.cols()), (0, 1));
        assert_eq!(d2.nnz(), 0);
    }

    #[test]
    fn hodge_laplacian_of_path_graph() {
        let k = path_graph();
        let l0 = hodge_laplacian::<f64>(&k, 0).unwrap();
        assert_eq!(
            l0.to_dense(),
            array![[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]
        );
    }

    #[test]
    fn laplacian_kernel_dimensions() {
        let hollow = hollow_triangle();
        let l1 = hodge_laplacian::<f64>(&hollow, 1).unwrap();
        let n = l1.rows();
        assert_eq!(n - rank_dense_oracle(&l1.to_dense()), 1);

        let filled = filled_triangle();
        let l1 = hodge_laplacian::<f64>(&filled, 1).unwrap();
        assert_eq!(l1.rows() - rank_dense_oracle(&l1.to_dense()), 0);
    }

    #[test]
    fn graph_laplacian_conventions() {
        let k = path_graph();
        let dma = graph_laplacian::<f64>(&k, LaplacianSign::DegreeMinusAdjacency).unwrap();
        let l0 = hodge_laplacian::<f64>(&k, 0).unwrap();
        assert_eq!(dma.entries(), l0.entries());
        let amd = graph_laplacian::<f64>(&k, LaplacianSign::AdjacencyMinusDegree).unwrap();
        assert_eq!(amd.to_dense(), -dma.to_dense());
    }

    #[test]
    fn graph_laplacian_single_vertex() {
        let k = build_complex(&[vec![5]]).unwrap();
        let l = graph_laplacian::<f64>(&k, LaplacianSign::DegreeMinusAdjacency).unwrap();
        assert_eq!((l.rows(), l.cols(), l.nnz()), (1, 1, 0));
    }

    #[test]
    fn apply_examples() {
        let k = path_graph();
        let l0 = hodge_laplacian::<f64>(&k, 0).unwrap();
        let constant = Cochain::new(&k, 0, array![[1.0], [1.0], [1.0]]).unwrap();
        assert_eq!(
            apply(&l0, &constant).unwrap().values(),
            &array![[0.0], [0.0], [0.0]]
        );

        let d0 = coboundary_matrix::<f64>(&k, 0).unwrap();
        let f = Cochain::new(&k, 0, array![[0.0], [1.0], [3.0]]).unwrap();
        let grad = apply(&d0, &f).unwrap();
        assert_eq!(grad.values(), &array![[1.0], [2.0]]);
        assert_eq!(grad.degree(), Degree::K(1));

        let id = SparseOperator::<f64>::identity(&k, 0).unwrap();
        assert_eq!(apply(&id, &f).unwrap().values(), f.values());
    }

    #[test]
    fn apply_rejects_degree_mismatch() {
        let k = path_graph();
        let d0 = coboundary_matrix::<f64>(&k, 0).unwrap();
        let f1 = Cochain::new(&k, 1, array![[1.0], [1.0]]).unwrap();
        assert!(matches!(apply(&d0, &f1), Err(Error::Dimension(_))));
    }

    #[test]
    fn betti_number_examples() {
        assert_eq!(betti_numbers(&hollow_triangle()), vec![1, 1]);
        assert_eq!(betti_numbers(&tetrahedron_boundary()), vec![1, 0, 1]);
        let two_edges = build_complex(&[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(betti_numbers(&two_edges), vec![2, 0]);
    }

    #[test]
    fn betti_matches_dense_rank_oracle() {
        for k in [hollow_triangle(), filled_triangle(), tetrahedron_boundary()] {
            let betti = betti_numbers(&k);
            for deg in 0..=k.dim() {
                let rank_down = if deg >= 1 {
                    rank_dense_oracle(&boundary_matrix::<f64>(&k, deg).unwrap().to_dense())
                } else {
                    0
                };
                let rank_up = if deg < k.dim() {
                    rank_dense_oracle(&boundary_matrix::<f64>(&k, deg + 1).unwrap().to_dense())
                } else {
                    0
                };
                assert_eq!(betti[deg], k.n_simplices(deg) - rank_down - rank_up);
            }
        }
    }

    #[test]
    fn euler_characteristic_equals_alternating_betti_sum() {
        for k in [
            hollow_triangle(),
            filled_triangle(),
            tetrahedron_boundary(),
            build_complex(&[vec![0, 1], vec![2, 3]]).unwrap(),
        ] {
            let chi: i64 = betti_numbers(&k)
                .iter()
                .enumerate()
                .map(|(deg, &b)| if deg % 2 == 0 { b as i64 } else { -(b as i64) })
                .sum();
            assert_eq!(chi, crate::complex::euler_characteristic(&k));
        }
    }

    #[test]
    fn block_operator_embedding() {
        let k = path_graph();
        let l0 = hodge_laplacian::<f64>(&k, 0).unwrap();
        let block = block_operator(&k, &BlockSpec::new().insert(0, 0, l0.clone())).unwrap();
        assert_eq!((block.rows(), block.cols()), (5, 5));
        let dense = block.to_dense();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(dense[(r, c)], l0.to_dense()[(r, c)]);
            }
        }
        for r in 3..5 {
            for c in 0..5 {
                assert_eq!(dense[(r, c)], 0.0);
                assert_eq!(dense[(c, r)], 0.0);
            }
        }
    }

    #[test]
    fn block_operator_mixed_symmetric() {
        let k = path_graph();
        let d1 = boundary_matrix::<f64>(&k, 1).unwrap();
        let block = block_operator(
            &k,
            &BlockSpec::new()
                .insert(0, 1, d1.clone())
                .insert(1, 0, d1.transpose()),
        )
        .unwrap();
        let dense = block.to_dense();
        for r in 0..5 {
            for c in 0..5 {
                assert_eq!(dense[(r, c)], dense[(c, r)]);
            }
        }
    }

    #[test]
    fn block_operator_empty_and_mismatched() {
        let k = path_graph();
        let zero = block_operator::<f64>(&k, &BlockSpec::new()).unwrap();
        assert_eq!((zero.rows(), zero.cols(), zero.nnz()), (5, 5, 0));

        let d1 = boundary_matrix::<f64>(&k, 1).unwrap();
        let bad = block_operator(&k, &BlockSpec::new().insert(1, 1, d1));
        assert!(matches!(bad, Err(Error::BlockShape(_))));
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        let m: Array2<f64> = array![[2.0, 1.0], [1.0, 2.0]];
        let eigs = symmetric_eigenvalues(&m).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn maximal_simplices() -> impl Strategy<Value = Vec<Vec<usize>>> {
            prop::collection::vec(
                prop::collection::btree_set(0usize..10, 1..=4)
                    .prop_map(|s| s.into_iter().collect::<Vec<_>>()),
                1..8,
            )
        }

        proptest! {
            #[test]
            fn boundary_composition_is_zero(maximal in maximal_simplices()) {
                let k = build_complex(&maximal).unwrap();
                for deg in 1..k.dim() {
                    let a = exact::boundary_triplets(&k, deg).unwrap();
                    let b = exact::boundary_triplets(&k, deg + 1).unwrap();
                    let product = exact::matmul_triplets(&a, &b, k.n_simplices(deg));
                    prop_assert!(product.is_empty());
                }
            }

            #[test]
            fn laplacian_is_symmetric_psd(maximal in maximal_simplices()) {
                let k = build_complex(&maximal).unwrap();
                for deg in 0..=k.dim() {
                    let l = hodge_laplacian::<f64>(&k, deg).unwrap();
                    let dense = l.to_dense();
                    for r in 0..dense.nrows() {
                        for c in 0..dense.ncols() {
                            prop_assert_eq!(dense[(r, c)], dense[(c, r)]);
                        }
                    }
                    let eigs = symmetric_eigenvalues(&dense).unwrap();
                    if let Some(min) = eigs.first() {
                        prop_assert!(*min >= -1e-10);
                    }
                }
            }

            #[test]
            fn laplacian_kernel_matches_betti(maximal in maximal_simplices()) {
                let k = build_complex(&maximal).unwrap();
                let betti = betti_numbers(&k);
                for deg in 0..=k.dim() {
                    let l = hodge_laplacian::<f64>(&k, deg).unwrap();
                    let trips: Vec<(usize, usize, i64)> = l
                        .entries()
                        .iter()
                        .map(|&(r, c, v)| (r, c, v as i64))
                        .collect();
                    let rank = exact::rank_exact(l.rows(), l.cols(), &trips);
                    prop_assert_eq!(l.rows() - rank, betti[deg]);
                }
            }

            #[test]
            fn apply_is_linear(maximal in maximal_simplices(), seed in 0u64..1000) {
                use rand::{Rng, SeedableRng};
                let k = build_complex(&maximal).unwrap();
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let n0 = k.n_simplices(0);
                let l0 = hodge_laplacian::<f64>(&k, 0).unwrap();
                let mut sample = || {
                    Array2::from_shape_fn((n0, 2), |_| rng.gen_range(-1.0..1.0))
                };
                let fa = Cochain::new(&k, 0, sample()).unwrap();
                let fb = Cochain::new(&k, 0, sample()).unwrap();
                let (alpha, beta) = (0.7, -1.3);
                let combined = Cochain::new(
                    &k,
                    0,
                    fa.values().mapv(|x| alpha * x) + fb.values().mapv(|x| beta * x),
                )
                .unwrap();
                let lhs = apply(&l0, &combined).unwrap();
                let rhs = apply(&l0, &fa).unwrap().values().mapv(|x| alpha * x)
                    + apply(&l0, &fb).unwrap().values().mapv(|x| beta * x);
                for (a, b) in lhs.values().iter().zip(rhs.iter()) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
