//! Oriented finite simplicial complexes and the cochain spaces over them.
//!
//! A complex stores, per dimension `k`, the ordered list of its k-simplices.
//! Each simplex is a strictly increasing tuple of vertex ids; the sorted
//! vertex order is the orientation convention, and the lexicographic order
//! within a dimension fixes the canonical basis used by every operator
//! matrix in [`crate::dec`].

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

static NEXT_COMPLEX_ID: AtomicU64 = AtomicU64::new(1);

/// Identity of a complex instance. Cochains and operators remember the
/// complex they were built on and refuse to mix with another one.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ComplexId(u64);

/// Degree tag of a cochain space: a single degree `k`, or the direct sum of
/// all degrees in canonical order (used by block operators).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Degree {
    K(usize),
    Mixed,
}

impl std::fmt::Display for Degree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Degree::K(k) => write!(f, "{k}"),
            Degree::Mixed => write!(f, "mixed"),
        }
    }
}

/// A simplex as a strictly increasing tuple of vertex ids.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Simplex {
    vertices: Vec<usize>,
}

impl Simplex {
    /// Builds a simplex from a vertex tuple in any order. Fails on empty
    /// tuples and repeated vertices.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidSimplex("empty vertex tuple".into()));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSimplex(format!(
                "repeated vertex in tuple {vertices:?}"
            )));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    /// Dimension k = number of vertices minus one.
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// The (k-1)-face obtained by deleting the vertex at position `i`.
    /// Position, not id: the deleted vertex is `self.vertices()[i]`.
    pub fn face(&self, i: usize) -> Simplex {
        let mut v = self.vertices.clone();
        v.remove(i);
        Simplex { vertices: v }
    }
}

/// An oriented finite simplicial complex with canonical per-dimension
/// simplex ordering.
#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    id: ComplexId,
    /// Dimension k -> lexicographically sorted k-simplices.
    simplices_by_dim: Vec<Vec<Simplex>>,
    /// Dimension k -> vertex tuple -> position in the k-th list.
    index_by_dim: Vec<HashMap<Vec<usize>, usize>>,
}

impl SimplicialComplex {
    pub fn id(&self) -> ComplexId {
        self.id
    }

    /// Maximal k with at least one k-simplex.
    pub fn dim(&self) -> usize {
        self.simplices_by_dim.len() - 1
    }

    /// Number of k-simplices; zero above the dimension.
    pub fn n_simplices(&self, k: usize) -> usize {
        self.simplices_by_dim.get(k).map_or(0, Vec::len)
    }

    /// The ordered k-simplices; empty above the dimension.
    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.simplices_by_dim.get(k).map_or(&[], Vec::as_slice)
    }

    /// Position of a simplex in its dimension's canonical list.
    pub fn index_of(&self, simplex: &Simplex) -> Option<usize> {
        self.index_by_dim
            .get(simplex.dim())?
            .get(simplex.vertices())
            .copied()
    }

    /// Original vertex ids in canonical (sorted) order. Position in this
    /// list is the dense index used by all matrices; ids need not be
    /// contiguous.
    pub fn vertex_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.simplices(0).iter().map(|s| s.vertices()[0])
    }

    /// Dense index of an original vertex id.
    pub fn vertex_index(&self, vertex_id: usize) -> Option<usize> {
        self.index_by_dim[0].get(&vec![vertex_id][..]).copied()
    }

    /// Total number of simplices across all dimensions.
    pub fn total_simplices(&self) -> usize {
        self.simplices_by_dim.iter().map(Vec::len).sum()
    }
}

/// Builds the closure of the given maximal simplices.
///
/// Every face of every input tuple is added; within each dimension the
/// simplices are sorted lexicographically, which makes the construction
/// deterministic and idempotent.
pub fn build_complex(maximal_simplices: &[Vec<usize>]) -> Result<SimplicialComplex> {
    let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for tuple in maximal_simplices {
        let simplex = Simplex::new(tuple.clone())?;
        // every nonempty subset of a simplex is a face
        let verts = simplex.vertices();
        let n = verts.len();
        for mask in 1u64..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| verts[i]).collect();
            faces.insert(subset);
        }
    }
    if faces.is_empty() {
        return Err(Error::InvalidSimplex("complex has no simplices".into()));
    }

    let dim = faces.iter().map(|f| f.len() - 1).max().unwrap();
    let mut simplices_by_dim = vec![Vec::new(); dim + 1];
    for f in faces {
        simplices_by_dim[f.len() - 1].push(Simplex { vertices: f });
    }
    // BTreeSet iteration is sorted by tuple, which is lexicographic within
    // a fixed length; per-dimension lists come out sorted already, but make
    // the invariant explicit.
    let mut index_by_dim = Vec::with_capacity(dim + 1);
    for list in &mut simplices_by_dim {
        list.sort();
        let index: HashMap<Vec<usize>, usize> = list
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices().to_vec(), i))
            .collect();
        index_by_dim.push(index);
    }

    Ok(SimplicialComplex {
        id: ComplexId(NEXT_COMPLEX_ID.fetch_add(1, Ordering::Relaxed)),
        simplices_by_dim,
        index_by_dim,
    })
}

/// Simplex counts per dimension `(n_0, ..., n_dim)`.
pub fn skeleton_counts(complex: &SimplicialComplex) -> Vec<usize> {
    (0..=complex.dim()).map(|k| complex.n_simplices(k)).collect()
}

/// Euler characteristic `chi = sum_k (-1)^k n_k`.
pub fn euler_characteristic(complex: &SimplicialComplex) -> i64 {
    (0..=complex.dim())
        .map(|k| {
            let n = complex.n_simplices(k) as i64;
            if k % 2 == 0 {
                n
            } else {
                -n
            }
        })
        .sum()
}

/// A real-valued (optionally multi-channel) function on the k-simplices of
/// one complex. Row i holds the value on the i-th k-simplex in canonical
/// order.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain<T> {
    complex: ComplexId,
    degree: Degree,
    values: Array2<T>,
}

impl<T: Scalar> Cochain<T> {
    /// Wraps a value matrix as a k-cochain, checking the row count against
    /// the complex.
    pub fn new(complex: &SimplicialComplex, k: usize, values: Array2<T>) -> Result<Self> {
        let expected = complex.n_simplices(k);
        if k > complex.dim() || expected == 0 {
            return Err(Error::Dimension(format!(
                "complex has no {k}-simplices"
            )));
        }
        if values.nrows() != expected {
            return Err(Error::Dimension(format!(
                "cochain of degree {k} needs {expected} rows, got {}",
                values.nrows()
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::Dimension("cochain needs at least one channel".into()));
        }
        Ok(Self {
            complex: complex.id(),
            degree: Degree::K(k),
            values,
        })
    }

    /// Wraps a value matrix as a mixed-degree cochain over the whole
    /// complex, degrees concatenated in order k = 0, 1, 2, ...
    pub fn mixed(complex: &SimplicialComplex, values: Array2<T>) -> Result<Self> {
        let expected = complex.total_simplices();
        if values.nrows() != expected {
            return Err(Error::Dimension(format!(
                "mixed cochain needs {expected} rows, got {}",
                values.nrows()
            )));
        }
        Ok(Self {
            complex: complex.id(),
            degree: Degree::Mixed,
            values,
        })
    }

    /// All-zero k-cochain with `channels` channels.
    pub fn zeros(complex: &SimplicialComplex, k: usize, channels: usize) -> Result<Self> {
        Self::new(complex, k, Array2::zeros((complex.n_simplices(k), channels)))
    }

    pub(crate) fn from_parts(complex: ComplexId, degree: Degree, values: Array2<T>) -> Self {
        Self {
            complex,
            degree,
            values,
        }
    }

    pub fn complex_id(&self) -> ComplexId {
        self.complex
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn into_values(self) -> Array2<T> {
        self.values
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }
}

/// A chain: a formal linear combination of k-simplices, stored as a
/// single-channel value vector in the same canonical basis as cochains.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain<T>(Cochain<T>);

impl<T: Scalar> Chain<T> {
    pub fn new(complex: &SimplicialComplex, k: usize, values: Array2<T>) -> Result<Self> {
        if values.ncols() != 1 {
            return Err(Error::Dimension(format!(
                "a chain has exactly one channel, got {}",
                values.ncols()
            )));
        }
        Ok(Self(Cochain::new(complex, k, values)?))
    }

    pub fn as_cochain(&self) -> &Cochain<T> {
        &self.0
    }

    pub fn into_cochain(self) -> Cochain<T> {
        self.0
    }
}
