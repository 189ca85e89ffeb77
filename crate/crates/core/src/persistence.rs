//! Vietoris-Rips filtrations, persistence pairings and diagrams in degrees
//! up to 2, and distances between persistence diagrams.
//!
//! Persistence is computed by the standard boundary-matrix column reduction
//! over GF(2) in filtration order. Diagram distances offer an entropically
//! regularized Sinkhorn mode and an exact matching mode; the latter doubles
//! as the test oracle and as the differentiation interface for the
//! homological embedding loss.

use std::collections::HashMap;

use crate::complex::{build_complex, SimplicialComplex, Simplex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One simplex of a filtration: its vertex tuple (as point indices), its
/// filtration value, and the longest edge realizing that value.
#[derive(Clone, Debug)]
pub struct FiltrationEntry<T> {
    pub simplex: Simplex,
    pub value: T,
    /// The vertex pair of maximal pairwise distance inside the simplex;
    /// `None` for vertices, whose value is constantly zero.
    pub max_edge: Option<(usize, usize)>,
}

/// An ordered Vietoris-Rips filtration together with its final complex.
#[derive(Clone, Debug)]
pub struct Filtration<T> {
    entries: Vec<FiltrationEntry<T>>,
    index_of: HashMap<Vec<usize>, usize>,
    complex: SimplicialComplex,
}

impl<T: Scalar> Filtration<T> {
    pub fn entries(&self) -> &[FiltrationEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The complex spanned by every simplex in the filtration.
    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn index_of(&self, vertices: &[usize]) -> Option<usize> {
        self.index_of.get(vertices).copied()
    }
}

/// Builds the Vietoris-Rips filtration of a distance matrix up to
/// `max_dim` (at most 2), discarding simplices entering after
/// `max_radius`. Vertices enter at value zero; any other simplex enters at
/// the largest pairwise distance among its vertices. Ties are broken by
/// dimension, then lexicographically.
pub fn vietoris_rips<T: Scalar>(
    distances: &ndarray::Array2<T>,
    max_dim: usize,
    max_radius: T,
) -> Result<Filtration<T>> {
    if max_dim > 2 {
        return Err(Error::UnsupportedDimension(format!(
            "Vietoris-Rips filtrations support dimension <= 2, got {max_dim}"
        )));
    }
    let n = distances.nrows();
    if distances.ncols() != n || n == 0 {
        return Err(Error::Dimension("distance matrix must be square and non-empty".into()));
    }
    let mut entries: Vec<FiltrationEntry<T>> = Vec::new();
    for i in 0..n {
        entries.push(FiltrationEntry {
            simplex: Simplex::new(vec![i])?,
            value: T::zero(),
            max_edge: None,
        });
    }
    if max_dim >= 1 {
        for i in 0..n {
            for j in i + 1..n {
                let d = distances[(i, j)];
                if d <= max_radius {
                    entries.push(FiltrationEntry {
                        simplex: Simplex::new(vec![i, j])?,
                        value: d,
                        max_edge: Some((i, j)),
                    });
                }
            }
        }
    }
    if max_dim >= 2 {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    // first maximal pair in lexicographic order wins ties
                    let pairs = [(i, j), (i, k), (j, k)];
                    let mut value = distances[(i, j)];
                    let mut max_edge = (i, j);
                    for &(u, v) in &pairs[1..] {
                        if distances[(u, v)] > value {
                            value = distances[(u, v)];
                            max_edge = (u, v);
                        }
                    }
                    if value <= max_radius {
                        entries.push(FiltrationEntry {
                            simplex: Simplex::new(vec![i, j, k])?,
                            value,
                            max_edge: Some(max_edge),
                        });
                    }
                }
            }
        }
    }
    entries.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .expect("finite filtration values")
            .then(a.simplex.dim().cmp(&b.simplex.dim()))
            .then_with(|| a.simplex.vertices().cmp(b.simplex.vertices()))
    });
    let index_of = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (e.simplex.vertices().to_vec(), i))
        .collect();
    let tuples: Vec<Vec<usize>> = entries.iter().map(|e| e.simplex.vertices().to_vec()).collect();
    let complex = build_complex(&tuples)?;
    Ok(Filtration {
        entries,
        index_of,
        complex,
    })
}

/// Birth/death pairs as indices into the filtration order; `None` death
/// means the class never dies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersistencePairing {
    by_degree: Vec<Vec<(usize, Option<usize>)>>,
}

impl PersistencePairing {
    /// Pairs of degree k, in filtration order of their birth simplex.
    pub fn pairs(&self, degree: usize) -> &[(usize, Option<usize>)] {
        self.by_degree.get(degree).map_or(&[], Vec::as_slice)
    }

    pub fn max_degree(&self) -> usize {
        self.by_degree.len().saturating_sub(1)
    }
}

/// A diagram point; `death == None` encodes an infinite class.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagramPoint<T> {
    pub birth: T,
    pub death: Option<T>,
}

impl<T: Scalar> DiagramPoint<T> {
    pub fn persistence(&self) -> Option<T> {
        self.death.map(|d| d - self.birth)
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_none()
    }
}

/// Birth/death value multisets per degree; zero-persistence pairs are
/// dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram<T> {
    by_degree: Vec<Vec<DiagramPoint<T>>>,
}

impl<T: Scalar> PersistenceDiagram<T> {
    pub fn points(&self, degree: usize) -> &[DiagramPoint<T>] {
        self.by_degree.get(degree).map_or(&[], Vec::as_slice)
    }

    pub fn max_degree(&self) -> usize {
        self.by_degree.len().saturating_sub(1)
    }
}

/// Pairings and diagrams of one filtration. The diagram is the value image
/// of the pairing minus its zero-persistence pairs; `diagram_pairs` keeps
/// the surviving pairs aligned with the diagram points, which is what the
/// gradient of the homological loss differentiates through.
#[derive(Clone, Debug)]
pub struct PersistenceStructure<T> {
    pub pairing: PersistencePairing,
    pub diagram: PersistenceDiagram<T>,
    diagram_pairs: Vec<Vec<(usize, Option<usize>)>>,
}

impl<T: Scalar> PersistenceStructure<T> {
    /// Filtration index pairs aligned one-to-one with `diagram.points(k)`.
    pub fn diagram_pairs(&self, degree: usize) -> &[(usize, Option<usize>)] {
        self.diagram_pairs.get(degree).map_or(&[], Vec::as_slice)
    }
}

/// Standard persistence column reduction over GF(2) in filtration order.
pub fn compute_persistence<T: Scalar>(filtration: &Filtration<T>) -> PersistenceStructure<T> {
    let m = filtration.len();
    let entries = filtration.entries();
    // boundary columns as sorted filtration indices of the facets
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(m);
    for entry in entries {
        let dim = entry.simplex.dim();
        let mut col: Vec<usize> = Vec::new();
        if dim > 0 {
            for i in 0..=dim {
                let idx = filtration
                    .index_of(entry.simplex.face(i).vertices())
                    .expect("faces precede cofaces in a filtration");
                col.push(idx);
            }
            col.sort_unstable();
        }
        columns.push(col);
    }

    let mut pivot_owner: Vec<Option<usize>> = vec![None; m];
    let mut death_of: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        while let Some(&low) = columns[j].last() {
            match pivot_owner[low] {
                Some(owner) => {
                    let (left, right) = columns.split_at_mut(j);
                    right[0] = xor_columns(&left[owner], &right[0]);
                }
                None => break,
            }
        }
        if let Some(&low) = columns[j].last() {
            pivot_owner[low] = Some(j);
            death_of[low] = Some(j);
        }
    }

    let max_degree = entries.iter().map(|e| e.simplex.dim()).max().unwrap_or(0);
    let mut by_degree: Vec<Vec<(usize, Option<usize>)>> = vec![Vec::new(); max_degree + 1];
    for i in 0..m {
        let creates = columns[i].is_empty();
        if creates {
            by_degree[entries[i].simplex.dim()].push((i, death_of[i]));
        }
    }

    let mut diagram: Vec<Vec<DiagramPoint<T>>> = vec![Vec::new(); max_degree + 1];
    let mut diagram_pairs: Vec<Vec<(usize, Option<usize>)>> = vec![Vec::new(); max_degree + 1];
    for (degree, pairs) in by_degree.iter().enumerate() {
        for &(birth_idx, death_idx) in pairs {
            let birth = entries[birth_idx].value;
            let death = death_idx.map(|d| entries[d].value);
            if let Some(d) = death {
                if d == birth {
                    continue; // zero persistence stays out of the diagram
                }
            }
            diagram[degree].push(DiagramPoint { birth, death });
            diagram_pairs[degree].push((birth_idx, death_idx));
        }
    }

    PersistenceStructure {
        pairing: PersistencePairing { by_degree },
        diagram: PersistenceDiagram { by_degree: diagram },
        diagram_pairs,
    }
}

fn xor_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Critical edges of one diagram point: the longest edge of the birth
/// simplex and of the death simplex. These are the distance-matrix entries
/// the diagram depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCriticalEdges {
    pub birth: Option<(usize, usize)>,
    pub death: Option<(usize, usize)>,
}

/// For every diagram point (per degree, aligned with
/// `PersistenceStructure::diagram`), the edges whose lengths equal its
/// birth and death values.
pub fn critical_edges<T: Scalar>(
    structure: &PersistenceStructure<T>,
    filtration: &Filtration<T>,
) -> Vec<Vec<PairCriticalEdges>> {
    let entries = filtration.entries();
    (0..=structure.diagram.max_degree())
        .map(|degree| {
            structure
                .diagram_pairs(degree)
                .iter()
                .map(|&(birth_idx, death_idx)| PairCriticalEdges {
                    birth: entries[birth_idx].max_edge,
                    death: death_idx.and_then(|d| entries[d].max_edge),
                })
                .collect()
        })
        .collect()
}

/// How to measure the distance between two diagrams.
#[derive(Clone, Debug)]
pub enum DistanceMethod<T> {
    /// Entropically regularized optimal matching. `epsilon == None` uses
    /// 0.01 times the largest persistence in either diagram.
    Sinkhorn { epsilon: Option<T>, iterations: usize },
    /// Exact optimal matching by exhaustive assignment (finite order) or
    /// threshold search (bottleneck).
    MatchingOracle,
}

impl<T> Default for DistanceMethod<T> {
    fn default() -> Self {
        DistanceMethod::Sinkhorn {
            epsilon: None,
            iterations: 200,
        }
    }
}

/// Distance between the degree-k parts of two diagrams.
///
/// Points may match across diagrams at L-infinity cost or rest on the
/// diagonal at half their persistence; matched costs are aggregated by the
/// order `q` (sum of q-th powers, then the q-th root; `q = infinity` gives
/// the bottleneck distance and requires the matching oracle). Infinite
/// points must come in equal numbers; they are matched by sorted birth at
/// the cost of the birth difference.
pub fn diagram_distance<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    degree: usize,
    method: &DistanceMethod<T>,
    q: T,
) -> Result<T> {
    let ((fin_a, fin_b), inf_costs) = split_points(a.points(degree), b.points(degree))?;
    match method {
        DistanceMethod::MatchingOracle => {
            if q.is_infinite() {
                let finite = bottleneck(&fin_a, &fin_b);
                Ok(inf_costs.into_iter().fold(finite, T::max))
            } else {
                let (cost, _) = oracle_matching(&fin_a, &fin_b, q);
                Ok(aggregate(cost, &inf_costs, q))
            }
        }
        DistanceMethod::Sinkhorn { epsilon, iterations } => {
            if q.is_infinite() {
                return Err(Error::Parse(
                    "the Sinkhorn method needs a finite matching order".into(),
                ));
            }
            let cost = sinkhorn_matching(&fin_a, &fin_b, *epsilon, *iterations, q)?;
            Ok(aggregate(cost, &inf_costs, q))
        }
    }
}

type FinitePoint<T> = (T, T);

#[allow(clippy::type_complexity)]
fn split_points<T: Scalar>(
    a: &[DiagramPoint<T>],
    b: &[DiagramPoint<T>],
) -> Result<((Vec<FinitePoint<T>>, Vec<FinitePoint<T>>), Vec<T>)> {
    let finite = |pts: &[DiagramPoint<T>]| {
        pts.iter()
            .filter_map(|p| p.death.map(|d| (p.birth, d)))
            .collect::<Vec<_>>()
    };
    let mut inf_a: Vec<T> = a.iter().filter(|p| p.is_infinite()).map(|p| p.birth).collect();
    let mut inf_b: Vec<T> = b.iter().filter(|p| p.is_infinite()).map(|p| p.birth).collect();
    if inf_a.len() != inf_b.len() {
        return Err(Error::InfiniteMismatch(format!(
            "diagrams carry {} and {} infinite points",
            inf_a.len(),
            inf_b.len()
        )));
    }
    inf_a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inf_b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let inf_costs = inf_a
        .iter()
        .zip(&inf_b)
        .map(|(&x, &y)| (x - y).abs())
        .collect();
    Ok(((finite(a), finite(b)), inf_costs))
}

fn aggregate<T: Scalar>(finite_cost: T, inf_costs: &[T], q: T) -> T {
    let total = finite_cost.powf(q) + inf_costs.iter().map(|c| c.powf(q)).sum();
    total.powf(T::one() / q)
}

fn linf<T: Scalar>(a: FinitePoint<T>, b: FinitePoint<T>) -> T {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn diag_cost<T: Scalar>(p: FinitePoint<T>) -> T {
    (p.1 - p.0) / T::from_f64_lossy(2.0)
}

/// One side of an optimal matching: an index into the other diagram, or
/// the diagonal.
pub type MatchPair = (Option<usize>, Option<usize>);

/// Exact optimal matching between two finite-point diagrams under order-q
/// aggregation, by exhaustive branch-and-bound over all partial matchings.
/// Intended for desk-scale diagrams (roughly 8 points a side). Returns the
/// distance and the matching realizing it.
pub fn oracle_matching<T: Scalar>(
    a: &[FinitePoint<T>],
    b: &[FinitePoint<T>],
    q: T,
) -> (T, Vec<MatchPair>) {
    struct Search<'s, T> {
        a: &'s [FinitePoint<T>],
        b: &'s [FinitePoint<T>],
        q: T,
        best: T,
        best_assign: Vec<Option<usize>>,
        assign: Vec<Option<usize>>,
        used: Vec<bool>,
    }

    impl<T: Scalar> Search<'_, T> {
        fn run(&mut self, i: usize, acc: T) {
            if acc >= self.best {
                return;
            }
            if i == self.a.len() {
                let mut total = acc;
                for (j, &used) in self.used.iter().enumerate() {
                    if !used {
                        total += diag_cost(self.b[j]).powf(self.q);
                    }
                }
                if total < self.best {
                    self.best = total;
                    self.best_assign = self.assign.clone();
                }
                return;
            }
            for j in 0..self.b.len() {
                if !self.used[j] {
                    let c = linf(self.a[i], self.b[j]).powf(self.q);
                    self.used[j] = true;
                    self.assign[i] = Some(j);
                    self.run(i + 1, acc + c);
                    self.used[j] = false;
                }
            }
            self.assign[i] = None;
            self.run(i + 1, acc + diag_cost(self.a[i]).powf(self.q));
        }
    }

    let mut search = Search {
        a,
        b,
        q,
        best: T::infinity(),
        best_assign: vec![None; a.len()],
        assign: vec![None; a.len()],
        used: vec![false; b.len()],
    };
    search.run(0, T::zero());

    let mut pairs: Vec<MatchPair> = Vec::new();
    let mut b_used = vec![false; b.len()];
    for (i, target) in search.best_assign.iter().enumerate() {
        if let Some(j) = target {
            b_used[*j] = true;
        }
        pairs.push((Some(i), *target));
    }
    for (j, used) in b_used.iter().enumerate() {
        if !used {
            pairs.push((None, Some(j)));
        }
    }
    (search.best.powf(T::one() / q), pairs)
}

/// Exact bottleneck distance between two finite-point diagrams: binary
/// search over the candidate costs with a bipartite perfect-matching
/// feasibility check on the diagonal-augmented graph.
pub fn bottleneck<T: Scalar>(a: &[FinitePoint<T>], b: &[FinitePoint<T>]) -> T {
    let (m, k) = (a.len(), b.len());
    if m == 0 && k == 0 {
        return T::zero();
    }
    let mut candidates: Vec<T> = vec![T::zero()];
    for &pa in a {
        candidates.push(diag_cost(pa));
        for &pb in b {
            candidates.push(linf(pa, pb));
        }
    }
    for &pb in b {
        candidates.push(diag_cost(pb));
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).unwrap());
    candidates.dedup();

    // left vertices: a-points then one diagonal slot per b-point;
    // right vertices: b-points then one diagonal slot per a-point.
    // a perfect matching of size m + k exists iff the bottleneck is <= t.
    let edge = |left: usize, right: usize, t: T| -> bool {
        match (left < m, right < k) {
            (true, true) => linf(a[left], b[right]) <= t,
            (true, false) => right - k == left && diag_cost(a[left]) <= t,
            (false, true) => left - m == right && diag_cost(b[right]) <= t,
            (false, false) => true,
        }
    };

    fn augment<F: Fn(usize, usize) -> bool>(
        left: usize,
        n_right: usize,
        edge: &F,
        seen: &mut [bool],
        match_of_right: &mut [Option<usize>],
    ) -> bool {
        for right in 0..n_right {
            if seen[right] || !edge(left, right) {
                continue;
            }
            seen[right] = true;
            let free = match match_of_right[right] {
                None => true,
                Some(prev) => augment(prev, n_right, edge, seen, match_of_right),
            };
            if free {
                match_of_right[right] = Some(left);
                return true;
            }
        }
        false
    }

    let feasible = |t: T| -> bool {
        let n_left = m + k;
        let n_right = k + m;
        let edge_t = |l: usize, r: usize| edge(l, r, t);
        let mut match_of_right = vec![None; n_right];
        for left in 0..n_left {
            let mut seen = vec![false; n_right];
            if !augment(left, n_right, &edge_t, &mut seen, &mut match_of_right) {
                return false;
            }
        }
        true
    };

    let mut lo = 0usize;
    let mut hi = candidates.len() - 1;
    if feasible(candidates[lo]) {
        return candidates[lo];
    }
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if feasible(candidates[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    candidates[hi]
}

/// Entropically regularized matching cost between two finite diagrams with
/// diagonal augmentation: ground costs are order-q powers of the matching
/// costs, and the returned value is the q-th root of the transported cost.
fn sinkhorn_matching<T: Scalar>(
    a: &[FinitePoint<T>],
    b: &[FinitePoint<T>],
    epsilon: Option<T>,
    iterations: usize,
    q: T,
) -> Result<T> {
    let (m, k) = (a.len(), b.len());
    if m == 0 && k == 0 {
        return Ok(T::zero());
    }
    if m == 0 {
        let total: T = b.iter().map(|&p| diag_cost(p).powf(q)).sum();
        return Ok(total.powf(T::one() / q));
    }
    if k == 0 {
        let total: T = a.iter().map(|&p| diag_cost(p).powf(q)).sum();
        return Ok(total.powf(T::one() / q));
    }
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|&(birth, death)| death - birth)
        .fold(T::zero(), T::max);
    let eps = epsilon.unwrap_or_else(|| T::from_f64_lossy(0.01) * scale);
    if eps <= T::zero() {
        return Err(Error::Parse("Sinkhorn regularization must be positive".into()));
    }

    // masses: each point carries 1, each diagonal absorbs the other side
    let rows = m + 1;
    let cols = k + 1;
    let mut cost = ndarray::Array2::<T>::zeros((rows, cols));
    for i in 0..m {
        for j in 0..k {
            cost[(i, j)] = linf(a[i], b[j]).powf(q);
        }
        cost[(i, k)] = diag_cost(a[i]).powf(q);
    }
    for j in 0..k {
        cost[(m, j)] = diag_cost(b[j]).powf(q);
    }
    cost[(m, k)] = T::zero();

    let mut mass_a = vec![T::one(); rows];
    mass_a[m] = T::from_f64_lossy(k as f64);
    let mut mass_b = vec![T::one(); cols];
    mass_b[k] = T::from_f64_lossy(m as f64);

    // log-domain Sinkhorn iterations
    let mut f = vec![T::zero(); rows];
    let mut g = vec![T::zero(); cols];
    let log_a: Vec<T> = mass_a.iter().map(|&x| x.ln()).collect();
    let log_b: Vec<T> = mass_b.iter().map(|&x| x.ln()).collect();
    for _ in 0..iterations {
        for i in 0..rows {
            let lse = log_sum_exp((0..cols).map(|j| (g[j] - cost[(i, j)]) / eps));
            f[i] = eps * (log_a[i] - lse);
        }
        for j in 0..cols {
            let lse = log_sum_exp((0..rows).map(|i| (f[i] - cost[(i, j)]) / eps));
            g[j] = eps * (log_b[j] - lse);
        }
    }
    let mut transported = T::zero();
    for i in 0..rows {
        for j in 0..cols {
            let plan = ((f[i] + g[j] - cost[(i, j)]) / eps).exp();
            transported += plan * cost[(i, j)];
        }
    }
    Ok(transported.max(T::zero()).powf(T::one() / q))
}

fn log_sum_exp<T: Scalar>(values: impl Iterator<Item = T> + Clone) -> T {
    let max = values.clone().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return T::neg_infinity();
    }
    let sum: T = values.map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn equilateral() -> ndarray::Array2<f64> {
        array![[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]
    }

    fn unit_square() -> ndarray::Array2<f64> {
        let pts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        let mut d = ndarray::Array2::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                let dx: f64 = pts[i].0 - pts[j].0;
                let dy = pts[i].1 - pts[j].1;
                d[(i, j)] = (dx * dx + dy * dy).sqrt();
            }
        }
        d
    }

    #[test]
    fn rips_of_equilateral_triangle() {
        let filt = vietoris_rips(&equilateral(), 2, f64::INFINITY).unwrap();
        let dims: Vec<usize> = filt.entries().iter().map(|e| e.simplex.dim()).collect();
        assert_eq!(dims, vec![0, 0, 0, 1, 1, 1, 2]);
        assert_eq!(filt.entries()[6].value, 1.0);
    }

    #[test]
    fn rips_of_unit_square() {
        let filt = vietoris_rips(&unit_square(), 2, f64::INFINITY).unwrap();
        let at = |v: f64, d: usize| {
            filt.entries()
                .iter()
                .filter(|e| e.simplex.dim() == d && (e.value - v).abs() < 1e-12)
                .count()
        };
        assert_eq!(at(1.0, 1), 4);
        assert_eq!(at(2f64.sqrt(), 1), 2);
        assert_eq!(at(2f64.sqrt(), 2), 4);
        assert_eq!(filt.entries().iter().filter(|e| e.simplex.dim() == 2).count(), 4);
    }

    #[test]
    fn rips_radius_cutoff() {
        let filt = vietoris_rips(&unit_square(), 2, 0.5).unwrap();
        assert_eq!(filt.len(), 4);
        assert!(filt.entries().iter().all(|e| e.simplex.dim() == 0));
    }

    #[test]
    fn rips_rejects_high_dimension() {
        let err = vietoris_rips(&equilateral(), 3, f64::INFINITY).unwrap_err();
        assert!(matches!(err, Error::UnsupportedDimension(_)));
    }

    #[test]
    fn isolated_points_never_die() {
        let filt = vietoris_rips(&unit_square(), 2, 0.0).unwrap();
        let ps = compute_persistence(&filt);
        let h0 = ps.diagram.points(0);
        assert_eq!(h0.len(), 4);
        assert!(h0.iter().all(|p| p.birth == 0.0 && p.is_infinite()));
    }

    #[test]
    fn unit_square_diagram() {
        let filt = vietoris_rips(&unit_square(), 2, f64::INFINITY).unwrap();
        let ps = compute_persistence(&filt);
        let h0 = ps.diagram.points(0);
        assert_eq!(h0.len(), 4);
        assert_eq!(h0.iter().filter(|p| p.is_infinite()).count(), 1);
        assert_eq!(
            h0.iter()
                .filter(|p| p.death.map_or(false, |d| (d - 1.0).abs() < 1e-15))
                .count(),
            3
        );
        let h1 = ps.diagram.points(1);
        assert_eq!(h1.len(), 1);
        assert!((h1[0].birth - 1.0).abs() < 1e-15);
        assert!((h1[0].death.unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn equilateral_has_no_h1() {
        // the cycle and the triangle enter at the same value
        let filt = vietoris_rips(&equilateral(), 2, f64::INFINITY).unwrap();
        let ps = compute_persistence(&filt);
        assert!(ps.diagram.points(1).is_empty());
        // the zero-persistence pair is still present in the pairing
        assert_eq!(ps.pairing.pairs(1).len(), 1);
    }

    #[test]
    fn h0_count_equals_point_count() {
        let filt = vietoris_rips(&unit_square(), 1, f64::INFINITY).unwrap();
        let ps = compute_persistence(&filt);
        assert_eq!(ps.pairing.pairs(0).len(), 4);
    }

    #[test]
    fn h0_diagram_has_n_points_one_infinite() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10 {
            let n = rng.gen_range(3..9);
            let mut d = ndarray::Array2::zeros((n, n));
            let pts: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            for i in 0..n {
                for j in 0..n {
                    let dx: f64 = pts[i].0 - pts[j].0;
                    let dy = pts[i].1 - pts[j].1;
                    d[(i, j)] = (dx * dx + dy * dy).sqrt();
                }
            }
            let filt = vietoris_rips(&d, 2, f64::INFINITY).unwrap();
            let ps = compute_persistence(&filt);
            let h0 = ps.diagram.points(0);
            assert_eq!(h0.len(), n);
            assert_eq!(h0.iter().filter(|p| p.is_infinite()).count(), 1);
        }
    }

    #[test]
    fn infinite_points_count_betti_numbers() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(78);
        for _ in 0..10 {
            let n = rng.gen_range(3..8);
            let mut d = ndarray::Array2::zeros((n, n));
            let pts: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            for i in 0..n {
                for j in 0..n {
                    let dx: f64 = pts[i].0 - pts[j].0;
                    let dy = pts[i].1 - pts[j].1;
                    d[(i, j)] = (dx * dx + dy * dy).sqrt();
                }
            }
            // a cutoff keeps some classes alive in every degree
            let filt = vietoris_rips(&d, 2, rng.gen_range(0.4..1.2)).unwrap();
            let ps = compute_persistence(&filt);
            let betti = crate::dec::betti_numbers(filt.complex());
            for (k, &expected) in betti.iter().enumerate() {
                let infinite = ps.diagram.points(k).iter().filter(|p| p.is_infinite()).count();
                assert_eq!(infinite, expected, "degree {k}");
            }
        }
    }

    /// Independent naive O(m^3) reduction: dense GF(2) columns, rescanning
    /// all earlier columns for a matching pivot at every step.
    pub(super) fn naive_reduction_pairs<T: Scalar>(
        filtration: &Filtration<T>,
    ) -> Vec<(usize, Option<usize>)> {
        let m = filtration.len();
        let mut cols: Vec<Vec<bool>> = Vec::with_capacity(m);
        for entry in filtration.entries() {
            let mut col = vec![false; m];
            let dim = entry.simplex.dim();
            if dim > 0 {
                for i in 0..=dim {
                    let idx = filtration
                        .index_of(entry.simplex.face(i).vertices())
                        .unwrap();
                    col[idx] = true;
                }
            }
            cols.push(col);
        }
        let low = |col: &Vec<bool>| col.iter().rposition(|&x| x);
        for j in 0..m {
            'reduce: loop {
                let Some(l) = low(&cols[j]) else { break };
                for jj in 0..j {
                    if low(&cols[jj]) == Some(l) {
                        let (a, b) = cols.split_at_mut(j);
                        for (x, y) in b[0].iter_mut().zip(&a[jj]) {
                            *x ^= *y;
                        }
                        continue 'reduce;
                    }
                }
                break;
            }
        }
        let mut death_of = vec![None; m];
        for (j, col) in cols.iter().enumerate() {
            if let Some(l) = low(col) {
                death_of[l] = Some(j);
            }
        }
        (0..m)
            .filter(|&i| low(&cols[i]).is_none())
            .map(|i| (i, death_of[i]))
            .collect()
    }

    #[test]
    fn reduction_matches_naive_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..25 {
            let n = rng.gen_range(2..6);
            let pts: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let mut d = ndarray::Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    let dx: f64 = pts[i].0 - pts[j].0;
                    let dy = pts[i].1 - pts[j].1;
                    d[(i, j)] = (dx * dx + dy * dy).sqrt();
                }
            }
            let filt = vietoris_rips(&d, 2, f64::INFINITY).unwrap();
            let ps = compute_persistence(&filt);
            let mut fast: Vec<(usize, Option<usize>)> = (0..=ps.pairing.max_degree())
                .flat_map(|k| ps.pairing.pairs(k).iter().copied())
                .collect();
            fast.sort_unstable();
            let mut naive = naive_reduction_pairs(&filt);
            naive.sort_unstable();
            assert_eq!(fast, naive);
        }
    }

    #[test]
    fn union_find_confirms_h0_deaths() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 7;
        let pts: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let mut d = ndarray::Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let dx: f64 = pts[i].0 - pts[j].0;
                let dy = pts[i].1 - pts[j].1;
                d[(i, j)] = (dx * dx + dy * dy).sqrt();
            }
        }
        let filt = vietoris_rips(&d, 2, f64::INFINITY).unwrap();
        let ps = compute_persistence(&filt);

        // union-find sweep over edges in filtration order
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        let mut merge_values = Vec::new();
        for entry in filt.entries() {
            if entry.simplex.dim() == 1 {
                let v = entry.simplex.vertices();
                let (ra, rb) = (find(&mut parent, v[0]), find(&mut parent, v[1]));
                if ra != rb {
                    parent[ra] = rb;
                    merge_values.push(entry.value);
                }
            }
        }
        let mut h0_deaths: Vec<f64> = ps
            .diagram
            .points(0)
            .iter()
            .filter_map(|p| p.death)
            .collect();
        h0_deaths.sort_by(|a, b| a.partial_cmp(b).unwrap());
        merge_values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(h0_deaths, merge_values);
    }

    #[test]
    fn critical_edges_of_unit_square() {
        let filt = vietoris_rips(&unit_square(), 2, f64::INFINITY).unwrap();
        let ps = compute_persistence(&filt);
        let edges = critical_edges(&ps, &filt);
        // H1: birth edge is a side (length 1), death edge a diagonal
        let h1 = &edges[1][0];
        let d = unit_square();
        let (bu, bv) = h1.birth.unwrap();
        assert!((d[(bu, bv)] - 1.0).abs() < 1e-15);
        let (du, dv) = h1.death.unwrap();
        assert!((d[(du, dv)] - 2f64.sqrt()).abs() < 1e-15);
        // vertex births carry no edge; H0 deaths carry the merging edge
        for (point, ce) in ps.diagram.points(0).iter().zip(&edges[0]) {
            assert!(ce.birth.is_none());
            match (point.death, ce.death) {
                (Some(v), Some((u, w))) => assert!((d[(u, w)] - v).abs() < 1e-15),
                (None, None) => {}
                other => panic!("inconsistent critical edge {other:?}"),
            }
        }
    }

    fn diagram_of(points: Vec<DiagramPoint<f64>>, degree: usize) -> PersistenceDiagram<f64> {
        let mut by_degree = vec![Vec::new(); degree + 1];
        by_degree[degree] = points;
        PersistenceDiagram { by_degree }
    }

    fn fin(b: f64, d: f64) -> DiagramPoint<f64> {
        DiagramPoint {
            birth: b,
            death: Some(d),
        }
    }

    #[test]
    fn identical_diagrams_have_zero_distance() {
        let a = diagram_of(vec![fin(0.0, 1.0), fin(0.5, 2.0)], 0);
        let oracle = diagram_distance(&a, &a, 0, &DistanceMethod::MatchingOracle, 1.0).unwrap();
        assert_eq!(oracle, 0.0);
        let sk = diagram_distance(&a, &a, 0, &DistanceMethod::default(), 1.0).unwrap();
        assert!(sk < 0.01 * 2.0, "sinkhorn on equal diagrams: {sk}");
    }

    #[test]
    fn single_point_shift() {
        let a = diagram_of(vec![fin(0.0, 1.0)], 0);
        let b = diagram_of(vec![fin(0.0, 1.2)], 0);
        let d = diagram_distance(&a, &b, 0, &DistanceMethod::MatchingOracle, 1.0).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
    }

    #[test]
    fn unmatched_point_rests_on_diagonal() {
        let a = diagram_of(vec![fin(0.0, 1.0)], 0);
        let b = diagram_of(vec![], 0);
        let d = diagram_distance(&a, &b, 0, &DistanceMethod::MatchingOracle, 1.0).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn infinite_points_must_balance() {
        let a = diagram_of(vec![DiagramPoint { birth: 0.0, death: None }], 0);
        let b = diagram_of(vec![], 0);
        let err = diagram_distance(&a, &b, 0, &DistanceMethod::MatchingOracle, 1.0).unwrap_err();
        assert!(matches!(err, Error::InfiniteMismatch(_)));
    }

    #[test]
    fn infinite_points_match_by_sorted_birth() {
        let inf = |b: f64| DiagramPoint { birth: b, death: None };
        let a = diagram_of(vec![inf(0.0), inf(2.0)], 1);
        let b = diagram_of(vec![inf(1.9), inf(0.3)], 1);
        let d = diagram_distance(&a, &b, 1, &DistanceMethod::MatchingOracle, 1.0).unwrap();
        assert!((d - (0.3 + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn sinkhorn_approaches_oracle_as_epsilon_shrinks() {
        let a = diagram_of(vec![fin(0.0, 1.0), fin(0.2, 0.9), fin(1.0, 2.5)], 0);
        let b = diagram_of(vec![fin(0.1, 1.1), fin(0.9, 2.2)], 0);
        let exact = diagram_distance(&a, &b, 0, &DistanceMethod::MatchingOracle, 1.0).unwrap();
        let scale = 2.5f64;
        let mut last_gap = f64::INFINITY;
        for eps_factor in [0.1, 0.01, 0.001] {
            let method = DistanceMethod::Sinkhorn {
                epsilon: Some(eps_factor * scale),
                iterations: 2000,
            };
            let approx = diagram_distance(&a, &b, 0, &method, 1.0).unwrap();
            let gap = (approx - exact).abs();
            assert!(gap <= last_gap + 1e-9, "gap grew: {gap} > {last_gap}");
            last_gap = gap;
        }
        assert!(last_gap < 5e-3, "final gap {last_gap}");
    }

    #[test]
    fn bottleneck_agrees_with_exhaustive_max_matching() {
        let a = vec![(0.0, 1.0), (0.5, 2.0), (1.0, 1.4)];
        let b = vec![(0.1, 1.05), (0.4, 1.9)];
        // exhaustive bottleneck by brute force over the same matchings
        fn brute(a: &[(f64, f64)], b: &[(f64, f64)], i: usize, used: &mut Vec<bool>, acc: f64) -> f64 {
            if i == a.len() {
                let mut worst = acc;
                for (j, &u) in used.iter().enumerate() {
                    if !u {
                        worst = worst.max(diag_cost(b[j]));
                    }
                }
                return worst;
            }
            let mut best = f64::INFINITY;
            for j in 0..b.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(brute(a, b, i + 1, used, acc.max(linf(a[i], b[j]))));
                    used[j] = false;
                }
            }
            best.min(brute(a, b, i + 1, used, acc.max(diag_cost(a[i]))))
        }
        let expected = brute(&a, &b, 0, &mut vec![false; b.len()], 0.0);
        let got = bottleneck(&a, &b);
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
    }
}
