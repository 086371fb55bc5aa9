pub mod boost;
pub mod christoffel;
pub mod eig;
pub mod entropy;
pub mod reduce;
pub mod residual;
pub mod spin;

/// Relative gap below which neighbouring eigenvalues form one cluster.
pub const CLUSTER_GAP: f64 = 1e-8;
