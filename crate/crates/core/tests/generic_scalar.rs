//! The numeric stack instantiated at f32: the same operators, layers,
//! losses and persistence computations run at single precision, with
//! tolerances widened accordingly.

use ndarray::{array, Array2};

use cochain::complex::{build_complex, Cochain};
use cochain::dec::{apply, boundary_matrix, coboundary_matrix, hodge_laplacian};
use cochain::optim::TrainConfig;
use cochain::persistence::{compute_persistence, vietoris_rips, DistanceMethod};
use cochain::structloss::{
    distance_matrix, embed_from, kl_loss, low_dim_affinities, tsne_affinities, AffinityKernel,
    EmbedMethod, MdsKernel, Metric, PointCloud,
};
use cochain::topnet::{tn_forward, Activation, TNLayer};

#[test]
fn operators_and_layers_run_at_single_precision() {
    let complex = build_complex(&[vec![0, 1, 2]]).unwrap();
    let d1: cochain::dec::SparseOperator<f32> = boundary_matrix(&complex, 1).unwrap();
    let d2 = boundary_matrix::<f32>(&complex, 2).unwrap();
    assert_eq!(d1.matmul(&d2).unwrap().nnz(), 0);

    let l0 = hodge_laplacian::<f32>(&complex, 0).unwrap();
    let constant = Cochain::new(&complex, 0, array![[1.0f32], [1.0], [1.0]]).unwrap();
    assert!(apply(&l0, &constant)
        .unwrap()
        .values()
        .iter()
        .all(|&v| v == 0.0));

    let d0 = coboundary_matrix::<f32>(&complex, 0).unwrap();
    let layer = TNLayer::new(d0, array![[2.0f32]], Activation::Relu).unwrap();
    let f = Cochain::new(&complex, 0, array![[0.0f32], [1.0], [3.0]]).unwrap();
    let out = tn_forward(&layer, &f).unwrap();
    assert_eq!(out.values(), &array![[2.0f32], [6.0], [4.0]]);
}

#[test]
fn losses_and_persistence_run_at_single_precision() {
    let square: Array2<f32> =
        Array2::from_shape_vec((4, 2), vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
    let cloud = PointCloud::new(square).unwrap();
    let dx = distance_matrix(&cloud, Metric::Euclidean);
    let filt = vietoris_rips(dx.values(), 2, f32::INFINITY).unwrap();
    let ps = compute_persistence(&filt);
    let h1 = ps.diagram.points(1);
    assert_eq!(h1.len(), 1);
    assert!((h1[0].death.unwrap() - 2f32.sqrt()).abs() < 1e-6);

    let p = tsne_affinities(&cloud, 2.0f32).unwrap();
    let q = low_dim_affinities(&cloud, AffinityKernel::StudentT).unwrap();
    assert!(kl_loss(&p, &q).unwrap() >= 0.0);

    let same = cochain::persistence::diagram_distance(
        &ps.diagram,
        &ps.diagram,
        1,
        &DistanceMethod::MatchingOracle,
        1.0f32,
    )
    .unwrap();
    assert_eq!(same, 0.0);

    let mut config = TrainConfig::new(1e-3, 20);
    config.seed = 1;
    let result = embed_from(
        &cloud,
        &EmbedMethod::Mds {
            kernel: MdsKernel::Squared,
        },
        cloud.points().clone(),
        &config,
    )
    .unwrap();
    assert_eq!(result.loss_history[0], 0.0f32);
}
