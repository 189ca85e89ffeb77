//! Cochains on oriented finite simplicial complexes together with the
//! discrete operators that act on them, trainable topological network
//! layers built from those operators, and structure-preserving losses
//! (metric, probabilistic and homological) for embedding point clouds.
//!
//! All numeric code is generic over the scalar type via [`scalar::Scalar`];
//! `f64` aliases for the common types live at the crate root.

pub mod complex;
pub mod dec;
pub mod error;
pub mod exact;
pub mod io;
pub mod optim;
pub mod persistence;
pub mod scalar;
pub mod structloss;
pub mod topnet;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases for the main domain types.
pub type Cochain64 = complex::Cochain<f64>;
pub type Chain64 = complex::Chain<f64>;
pub type SparseOperator64 = dec::SparseOperator<f64>;
pub type TNLayer64 = topnet::TNLayer<f64>;
pub type PointCloud64 = structloss::PointCloud<f64>;
pub type DistanceMatrix64 = structloss::DistanceMatrix<f64>;
pub type AffinityMatrix64 = structloss::AffinityMatrix<f64>;
pub type PersistenceDiagram64 = persistence::PersistenceDiagram<f64>;

/// Single-precision aliases.
pub type Cochain32 = complex::Cochain<f32>;
pub type SparseOperator32 = dec::SparseOperator<f32>;
pub type PointCloud32 = structloss::PointCloud<f32>;
