//! Structure-preserving costs on point clouds and the embedding driver.
//!
//! Three structures are extracted from a cloud and compared between a cloud
//! and its image: the metric structure (pairwise distances), a
//! probabilistic structure (a symmetric affinity matrix summing to one),
//! and the homological structure (Vietoris-Rips persistence diagrams).
//! Each comparison is a non-negative cost with an analytic gradient, and
//! `embed` drives all three through the shared gradient-descent loop.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optim::{self, FnObjective, TrainConfig};
use crate::persistence::{
    self, compute_persistence, critical_edges, vietoris_rips, DistanceMethod, PersistenceDiagram,
};
use crate::scalar::Scalar;

/// Floor applied to low-dimensional affinities inside the KL divergence.
const AFFINITY_FLOOR: f64 = 1e-12;

/// A finite point cloud, one point per row.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    points: Array2<T>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(points: Array2<T>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::Dimension("point cloud must be non-empty".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dimension("point cloud has non-finite entries".into()));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ambient_dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<T> {
        &self.points
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> T {
        let n = self.len();
        let mut best = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.point_distance(i, j));
            }
        }
        best
    }

    fn point_distance(&self, i: usize, j: usize) -> T {
        let mut acc = T::zero();
        for c in 0..self.points.ncols() {
            let d = self.points[(i, c)] - self.points[(j, c)];
            acc += d * d;
        }
        acc.sqrt()
    }
}

/// Pairwise distances with the metric-space invariants checked on
/// construction. The triangle inequality is verified on all triples at
/// small sizes and on a seeded sample beyond that.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<T> {
    values: Array2<T>,
}

impl<T: Scalar> DistanceMatrix<T> {
    pub fn new(values: Array2<T>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n || n == 0 {
            return Err(Error::Dimension("distance matrix must be square".into()));
        }
        let slack = T::from_f64_lossy(1e-9);
        for i in 0..n {
            if values[(i, i)] != T::zero() {
                return Err(Error::Dimension("distance matrix diagonal must be zero".into()));
            }
            for j in 0..n {
                let v = values[(i, j)];
                if !v.is_finite() || v < T::zero() {
                    return Err(Error::Dimension("distances must be finite and non-negative".into()));
                }
                if (v - values[(j, i)]).abs() > slack {
                    return Err(Error::Dimension("distance matrix must be symmetric".into()));
                }
            }
        }
        let check_triple = |i: usize, j: usize, k: usize| -> Result<()> {
            if values[(i, j)] > values[(i, k)] + values[(k, j)] + slack {
                return Err(Error::Dimension(format!(
                    "triangle inequality fails on ({i},{j},{k})"
                )));
            }
            Ok(())
        };
        if n <= 25 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        check_triple(i, j, k)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7121);
            for _ in 0..500 {
                let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                check_triple(i, j, k)?;
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }
}

/// Metric used by [`distance_matrix`].
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Metric {
    #[default]
    Euclidean,
}

/// Pairwise distance matrix of a cloud.
pub fn distance_matrix<T: Scalar>(cloud: &PointCloud<T>, metric: Metric) -> DistanceMatrix<T> {
    let Metric::Euclidean = metric;
    let n = cloud.len();
    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let d = cloud.point_distance(i, j);
            values[(i, j)] = d;
            values[(j, i)] = d;
        }
    }
    DistanceMatrix { values }
}

/// A symmetric non-negative affinity matrix with zero diagonal whose
/// entries sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityMatrix<T> {
    values: Array2<T>,
}

impl<T: Scalar> AffinityMatrix<T> {
    pub fn new(values: Array2<T>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n || n == 0 {
            return Err(Error::Dimension("affinity matrix must be square".into()));
        }
        let slack = T::from_f64_lossy(1e-9);
        let mut total = T::zero();
        for i in 0..n {
            if values[(i, i)] != T::zero() {
                return Err(Error::Dimension("affinity diagonal must be zero".into()));
            }
            for j in 0..n {
                let v = values[(i, j)];
                if v < T::zero() {
                    return Err(Error::Dimension("affinities must be non-negative".into()));
                }
                if (v - values[(j, i)]).abs() > slack {
                    return Err(Error::Dimension("affinity matrix must be symmetric".into()));
                }
                total += v;
            }
        }
        if (total - T::one()).abs() > slack {
            return Err(Error::Dimension(format!(
                "affinity entries must sum to 1, got {total}"
            )));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }
}

/// Pointwise penalty used by the metric-preservation cost.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum MdsKernel {
    #[default]
    Squared,
    Absolute,
}

impl MdsKernel {
    fn eval<T: Scalar>(self, dx: T, dy: T) -> T {
        match self {
            MdsKernel::Squared => (dx - dy) * (dx - dy),
            MdsKernel::Absolute => (dx - dy).abs(),
        }
    }

    /// Derivative with respect to the second argument; the subgradient of
    /// the absolute kernel at zero is taken to be zero.
    fn derivative<T: Scalar>(self, dx: T, dy: T) -> T {
        match self {
            MdsKernel::Squared => T::from_f64_lossy(2.0) * (dy - dx),
            MdsKernel::Absolute => {
                if dy > dx {
                    T::one()
                } else if dy < dx {
                    -T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// Metric-preservation cost: the penalty summed over all ordered pairs, so
/// every unordered pair is counted twice. The diagonal contributes zero.
pub fn mds_loss<T: Scalar>(
    dx: &DistanceMatrix<T>,
    dy: &DistanceMatrix<T>,
    kernel: MdsKernel,
) -> Result<T> {
    if dx.len() != dy.len() {
        return Err(Error::Dimension(format!(
            "distance matrices have sizes {} and {}",
            dx.len(),
            dy.len()
        )));
    }
    let n = dx.len();
    let mut total = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += kernel.eval(dx.values()[(i, j)], dy.values()[(i, j)]);
            }
        }
    }
    Ok(total)
}

/// Gradient of [`mds_loss`] with respect to the embedded points. Pairs of
/// coincident embedded points contribute a zero direction.
pub fn mds_gradient<T: Scalar>(
    dx: &DistanceMatrix<T>,
    y: &PointCloud<T>,
    kernel: MdsKernel,
) -> Result<Array2<T>> {
    if dx.len() != y.len() {
        return Err(Error::Dimension(format!(
            "distance matrix has {} points, cloud has {}",
            dx.len(),
            y.len()
        )));
    }
    let n = y.len();
    let d = y.ambient_dim();
    let two = T::from_f64_lossy(2.0);
    let mut grad = Array2::zeros((n, d));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dy = y.point_distance(i, j);
            if dy == T::zero() {
                continue;
            }
            // the (i,j) and (j,i) terms contribute equally to y_i
            let coeff = two * kernel.derivative(dx.values()[(i, j)], dy) / dy;
            for c in 0..d {
                grad[(i, c)] += coeff * (y.points()[(i, c)] - y.points()[(j, c)]);
            }
        }
    }
    Ok(grad)
}

/// Gaussian conditional affinities with per-point bandwidths found by
/// bisecting to conditional Shannon entropy `ln(perplexity)`, then
/// symmetrized as `(p(j|i) + p(i|j)) / 2n`.
///
/// Rows with a single neighbor have a forced conditional distribution and
/// skip the search. Rows whose entropy cannot be brought within 1e-4 of
/// the target after 100 bisection steps are a bandwidth failure.
pub fn tsne_affinities<T: Scalar>(
    cloud: &PointCloud<T>,
    perplexity: T,
) -> Result<AffinityMatrix<T>> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::Dimension("affinities need at least two points".into()));
    }
    if perplexity.is_nan() || perplexity <= T::zero() {
        return Err(Error::Bandwidth("perplexity must be positive".into()));
    }
    let target = perplexity.ln();
    let tolerance = T::from_f64_lossy(1e-4);
    let mut conditional = Array2::<T>::zeros((n, n));
    let mut sq = Array2::<T>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let d = cloud.point_distance(i, j);
            sq[(i, j)] = d * d;
        }
    }

    for i in 0..n {
        if n == 2 {
            // single neighbor: the conditional is 1 regardless of bandwidth
            conditional[(i, 1 - i)] = T::one();
            continue;
        }
        let row: Vec<T> = (0..n).filter(|&j| j != i).map(|j| sq[(i, j)]).collect();
        let mut beta = T::one();
        let mut beta_min = T::neg_infinity();
        let mut beta_max = T::infinity();
        let mut probs = vec![T::zero(); row.len()];
        let mut converged = false;
        for _ in 0..100 {
            let entropy = row_entropy(&row, beta, &mut probs);
            let diff = entropy - target;
            if diff.abs() <= tolerance {
                converged = true;
                break;
            }
            if diff > T::zero() {
                beta_min = beta;
                beta = if beta_max.is_infinite() {
                    beta * T::from_f64_lossy(2.0)
                } else {
                    (beta + beta_max) / T::from_f64_lossy(2.0)
                };
            } else {
                beta_max = beta;
                beta = if beta_min.is_infinite() {
                    beta / T::from_f64_lossy(2.0)
                } else {
                    (beta + beta_min) / T::from_f64_lossy(2.0)
                };
            }
        }
        if !converged {
            return Err(Error::Bandwidth(format!(
                "row {i}: entropy did not reach ln(perplexity) = {target} within 100 bisections"
            )));
        }
        for (slot, j) in (0..n).filter(|&j| j != i).enumerate() {
            conditional[(i, j)] = probs[slot];
        }
    }

    let denom = T::from_f64_lossy(2.0 * n as f64);
    let mut joint = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                joint[(i, j)] = (conditional[(i, j)] + conditional[(j, i)]) / denom;
            }
        }
    }
    AffinityMatrix::new(joint)
}

/// Normalized Gaussian row and its Shannon entropy for one bandwidth.
fn row_entropy<T: Scalar>(sq_dists: &[T], beta: T, probs: &mut [T]) -> T {
    let min = sq_dists.iter().copied().fold(T::infinity(), T::min);
    let mut sum = T::zero();
    for (p, &d) in probs.iter_mut().zip(sq_dists) {
        *p = (-beta * (d - min)).exp();
        sum += *p;
    }
    let mut entropy = T::zero();
    for p in probs.iter_mut() {
        *p /= sum;
        if *p > T::zero() {
            entropy -= *p * p.ln();
        }
    }
    entropy
}

/// Kernel for the affinities of the embedded cloud.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum AffinityKernel {
    /// `(1 + |y_i - y_j|^2)^{-1}`, the heavy-tailed convention.
    #[default]
    StudentT,
    /// Unit-bandwidth Gaussian, mirroring the high-dimensional construction.
    Gaussian,
}

/// Affinities of the embedded cloud, normalized to sum to one.
pub fn low_dim_affinities<T: Scalar>(
    cloud: &PointCloud<T>,
    kernel: AffinityKernel,
) -> Result<AffinityMatrix<T>> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::Dimension("affinities need at least two points".into()));
    }
    let mut weights = Array2::zeros((n, n));
    let mut total = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = cloud.point_distance(i, j);
            let w = match kernel {
                AffinityKernel::StudentT => T::one() / (T::one() + d * d),
                AffinityKernel::Gaussian => (-(d * d)).exp(),
            };
            weights[(i, j)] = w;
            total += w;
        }
    }
    AffinityMatrix::new(weights.mapv(|w| w / total))
}

/// KL divergence `sum P ln(P/Q)` with `0 ln 0 = 0`. Both sides of the
/// ratio are floored at 1e-12, which keeps the divergence finite on
/// mismatched supports and exactly zero when `P == Q`.
pub fn kl_loss<T: Scalar>(p: &AffinityMatrix<T>, q: &AffinityMatrix<T>) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!(
            "affinity matrices have sizes {} and {}",
            p.len(),
            q.len()
        )));
    }
    let floor = T::from_f64_lossy(AFFINITY_FLOOR);
    let mut total = T::zero();
    for (pv, qv) in p.values().iter().zip(q.values().iter()) {
        if *pv > T::zero() {
            total += *pv * (pv.max(floor) / qv.max(floor)).ln();
        }
    }
    Ok(total)
}

/// Gradient of `KL(P || Q(Y))` with respect to the embedded points.
pub fn tsne_gradient<T: Scalar>(
    p: &AffinityMatrix<T>,
    y: &PointCloud<T>,
    kernel: AffinityKernel,
) -> Result<Array2<T>> {
    if p.len() != y.len() {
        return Err(Error::Dimension(format!(
            "affinity matrix has {} points, cloud has {}",
            p.len(),
            y.len()
        )));
    }
    let q = low_dim_affinities(y, kernel)?;
    let n = y.len();
    let d = y.ambient_dim();
    let four = T::from_f64_lossy(4.0);
    let mut grad = Array2::zeros((n, d));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let gap = p.values()[(i, j)] - q.values()[(i, j)];
            let factor = match kernel {
                AffinityKernel::StudentT => {
                    let dist = y.point_distance(i, j);
                    four * gap / (T::one() + dist * dist)
                }
                AffinityKernel::Gaussian => four * gap,
            };
            for c in 0..d {
                grad[(i, c)] += factor * (y.points()[(i, c)] - y.points()[(j, c)]);
            }
        }
    }
    Ok(grad)
}

/// Diagrams of a cloud in the degrees needed to cover `dims`.
fn diagrams_for<T: Scalar>(cloud: &PointCloud<T>, dims: &[usize]) -> Result<PersistenceDiagram<T>> {
    let max_hom = dims.iter().copied().max().unwrap_or(0);
    if max_hom > 1 {
        return Err(Error::UnsupportedDimension(format!(
            "homological loss supports degrees 0 and 1, got {max_hom}"
        )));
    }
    let dx = distance_matrix(cloud, Metric::Euclidean);
    let filt = vietoris_rips(dx.values(), max_hom + 1, T::infinity())?;
    Ok(compute_persistence(&filt).diagram)
}

/// Homological cost: the diagram distance summed over the requested
/// degrees with unit weights.
pub fn ph_loss<T: Scalar>(
    x: &PointCloud<T>,
    y: &PointCloud<T>,
    dims: &[usize],
    method: &DistanceMethod<T>,
) -> Result<T> {
    let weights: Vec<(usize, T)> = dims.iter().map(|&k| (k, T::one())).collect();
    ph_loss_weighted(x, y, &weights, method)
}

/// Homological cost with explicit per-degree weights.
pub fn ph_loss_weighted<T: Scalar>(
    x: &PointCloud<T>,
    y: &PointCloud<T>,
    dim_weights: &[(usize, T)],
    method: &DistanceMethod<T>,
) -> Result<T> {
    if dim_weights.is_empty() {
        return Ok(T::zero());
    }
    let dims: Vec<usize> = dim_weights.iter().map(|&(k, _)| k).collect();
    let da = diagrams_for(x, &dims)?;
    let db = diagrams_for(y, &dims)?;
    let mut total = T::zero();
    for &(k, w) in dim_weights {
        total += w * persistence::diagram_distance(&da, &db, k, method, T::one())?;
    }
    Ok(total)
}

/// Subgradient of [`ph_loss`] (matching-oracle mode, order 1) with respect
/// to the embedded points, in the current pairing and matching regime.
///
/// The cost of each matched pair flows through the active coordinate of
/// the L-infinity ground distance into the birth or death value, from
/// there into the critical edge length, and from there into the two edge
/// endpoints. Diagram points of the embedded cloud that are matched to the
/// diagonal move both their birth and death values toward each other.
pub fn ph_gradient<T: Scalar>(
    x: &PointCloud<T>,
    y: &PointCloud<T>,
    dims: &[usize],
) -> Result<Array2<T>> {
    let max_hom = dims.iter().copied().max().unwrap_or(0);
    if max_hom > 1 {
        return Err(Error::UnsupportedDimension(format!(
            "homological loss supports degrees 0 and 1, got {max_hom}"
        )));
    }
    let half = T::from_f64_lossy(0.5);
    let da = diagrams_for(x, dims)?;
    let dy = distance_matrix(y, Metric::Euclidean);
    let filt = vietoris_rips(dy.values(), max_hom + 1, T::infinity())?;
    let ps = compute_persistence(&filt);
    let edges = critical_edges(&ps, &filt);

    let n = y.len();
    let d = y.ambient_dim();
    let mut grad = Array2::zeros((n, d));
    // chain one coefficient on an edge length into the two endpoints
    let push_edge = |grad: &mut Array2<T>, edge: Option<(usize, usize)>, coeff: T| {
        let Some((u, v)) = edge else { return };
        let length = dy.values()[(u, v)];
        if length == T::zero() {
            return;
        }
        for c in 0..d {
            let unit = (y.points()[(u, c)] - y.points()[(v, c)]) / length;
            grad[(u, c)] += coeff * unit;
            grad[(v, c)] -= coeff * unit;
        }
    };

    for &k in dims {
        let a_points = da.points(k);
        let b_points = ps.diagram.points(k);
        let b_edges = edges.get(k).map_or(&[][..], Vec::as_slice);

        // finite parts keep their positions within the degree's point list
        let fin_a: Vec<(T, T)> = a_points
            .iter()
            .filter_map(|p| p.death.map(|death| (p.birth, death)))
            .collect();
        let fin_b: Vec<(usize, (T, T))> = b_points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.death.map(|death| (i, (p.birth, death))))
            .collect();
        let fin_b_points: Vec<(T, T)> = fin_b.iter().map(|&(_, p)| p).collect();
        let (_, matching) = persistence::oracle_matching(&fin_a, &fin_b_points, T::one());

        for (a_idx, b_idx) in matching {
            match (a_idx, b_idx) {
                (Some(i), Some(j)) => {
                    let (ab, ad) = fin_a[i];
                    let (orig, (bb, bd)) = fin_b[j];
                    let birth_gap = (bb - ab).abs();
                    let death_gap = (bd - ad).abs();
                    // active coordinate of the L-infinity cost; death wins
                    // ties and the subgradient of |x| at 0 is 0
                    if death_gap >= birth_gap {
                        if bd != ad {
                            let coeff = if bd > ad { T::one() } else { -T::one() };
                            push_edge(&mut grad, b_edges[orig].death, coeff);
                        }
                    } else if bb != ab {
                        let coeff = if bb > ab { T::one() } else { -T::one() };
                        push_edge(&mut grad, b_edges[orig].birth, coeff);
                    }
                }
                (None, Some(j)) => {
                    let (orig, _) = fin_b[j];
                    push_edge(&mut grad, b_edges[orig].death, half);
                    push_edge(&mut grad, b_edges[orig].birth, -half);
                }
                _ => {} // diagram points of X carry no dependence on Y
            }
        }

        // infinite points match by sorted birth at |birth difference|
        let mut inf_a: Vec<T> = a_points.iter().filter(|p| p.is_infinite()).map(|p| p.birth).collect();
        let mut inf_b: Vec<(usize, T)> = b_points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_infinite())
            .map(|(i, p)| (i, p.birth))
            .collect();
        if inf_a.len() != inf_b.len() {
            return Err(Error::InfiniteMismatch(format!(
                "diagrams carry {} and {} infinite points in degree {k}",
                inf_a.len(),
                inf_b.len()
            )));
        }
        inf_a.sort_by(|p, q| p.partial_cmp(q).unwrap());
        inf_b.sort_by(|p, q| p.1.partial_cmp(&q.1).unwrap());
        for (&ab, &(orig, bb)) in inf_a.iter().zip(&inf_b) {
            if bb > ab {
                push_edge(&mut grad, b_edges[orig].birth, T::one());
            } else if bb < ab {
                push_edge(&mut grad, b_edges[orig].birth, -T::one());
            }
        }
    }
    Ok(grad)
}

/// Embedding objective selector.
#[derive(Clone, Debug)]
pub enum EmbedMethod<T> {
    Mds { kernel: MdsKernel },
    Tsne { perplexity: T, kernel: AffinityKernel },
    Ph { dims: Vec<usize> },
}

impl<T> EmbedMethod<T> {
    pub fn name(&self) -> &'static str {
        match self {
            EmbedMethod::Mds { .. } => "mds",
            EmbedMethod::Tsne { .. } => "tsne",
            EmbedMethod::Ph { .. } => "ph",
        }
    }
}

/// Output of an embedding run.
#[derive(Clone, Debug)]
pub struct EmbeddingResult<T> {
    pub embedding: Array2<T>,
    pub loss_history: Vec<T>,
    pub method: &'static str,
    pub config: TrainConfig,
}

/// Embeds a cloud into `target_dim` dimensions by gradient descent on the
/// chosen structure-preserving loss, from a seeded uniform initialization
/// in a box of half the data diameter.
pub fn embed<T: Scalar>(
    x: &PointCloud<T>,
    method: &EmbedMethod<T>,
    target_dim: usize,
    config: &TrainConfig,
) -> Result<EmbeddingResult<T>> {
    if target_dim == 0 {
        return Err(Error::Dimension("target dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut side = (x.diameter() / T::from_f64_lossy(2.0)).to_f64().unwrap_or(1.0);
    if side <= 0.0 {
        side = 1.0;
    }
    let mut init = Array2::from_shape_fn((x.len(), target_dim), |_| {
        T::from_f64_lossy(rng.gen_range(-side / 2.0..side / 2.0))
    });
    if let EmbedMethod::Ph { .. } = method {
        // seeded jitter keeps critical edge lengths tie-free
        for v in init.iter_mut() {
            *v += T::from_f64_lossy(rng.gen_range(-1e-9..1e-9));
        }
    }
    embed_from(x, method, init, config)
}

/// Embedding run from an explicit initial configuration.
pub fn embed_from<T: Scalar>(
    x: &PointCloud<T>,
    method: &EmbedMethod<T>,
    init: Array2<T>,
    config: &TrainConfig,
) -> Result<EmbeddingResult<T>> {
    if init.nrows() != x.len() {
        return Err(Error::Dimension(format!(
            "initialization has {} rows, cloud has {}",
            init.nrows(),
            x.len()
        )));
    }
    let n = x.len();
    let target_dim = init.ncols();
    let to_cloud = move |params: &[T]| -> PointCloud<T> {
        PointCloud {
            points: Array2::from_shape_vec((n, target_dim), params.to_vec())
                .expect("parameter bookkeeping"),
        }
    };

    let (eval, grad): (Box<dyn Fn(&[T]) -> T>, Box<dyn Fn(&[T]) -> Vec<T>>) = match method {
        EmbedMethod::Mds { kernel } => {
            let dx = distance_matrix(x, Metric::Euclidean);
            let kernel = *kernel;
            let dx_grad = dx.clone();
            (
                Box::new(move |params: &[T]| {
                    let y = to_cloud(params);
                    let dy = distance_matrix(&y, Metric::Euclidean);
                    mds_loss(&dx, &dy, kernel).expect("matching sizes")
                }),
                Box::new(move |params: &[T]| {
                    let y = to_cloud(params);
                    mds_gradient(&dx_grad, &y, kernel)
                        .expect("matching sizes")
                        .into_iter()
                        .collect()
                }),
            )
        }
        EmbedMethod::Tsne { perplexity, kernel } => {
            let p = tsne_affinities(x, *perplexity)?;
            let kernel = *kernel;
            let p_grad = p.clone();
            (
                Box::new(move |params: &[T]| {
                    let y = to_cloud(params);
                    let q = low_dim_affinities(&y, kernel).expect("valid cloud");
                    kl_loss(&p, &q).expect("matching sizes")
                }),
                Box::new(move |params: &[T]| {
                    let y = to_cloud(params);
                    tsne_gradient(&p_grad, &y, kernel)
                        .expect("matching sizes")
                        .into_iter()
                        .collect()
                }),
            )
        }
        EmbedMethod::Ph { dims } => {
            let dims_eval = dims.clone();
            let dims_grad = dims.clone();
            let x_eval = x.clone();
            let x_grad = x.clone();
            (
                Box::new(move |params: &[T]| {
                    let y = to_cloud(params);
                    ph_loss(&x_eval, &y, &dims_eval, &DistanceMethod::MatchingOracle)
                        .expect("valid clouds")
                }),
                Box::new(move |params: &[T]| {
                    let y = to_cloud(params);
                    ph_gradient(&x_grad, &y, &dims_grad)
                        .expect("valid clouds")
                        .into_iter()
                        .collect()
                }),
            )
        }
    };

    let dim = n * target_dim;
    let objective = FnObjective::new(dim, move |p: &[T]| eval(p), move |p: &[T]| grad(p));
    let flat_init: Vec<T> = init.iter().copied().collect();
    let (final_params, loss_history) = optim::gradient_descent(&objective, &flat_init, config)?;
    Ok(EmbeddingResult {
        embedding: Array2::from_shape_vec((n, target_dim), final_params).expect("shape"),
        loss_history,
        method: method.name(),
        config: config.clone(),
    })
}
