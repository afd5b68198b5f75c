//! Shared fixtures for the estimator benchmarks.

use netgeo_core::{Network, ThetaPoint};

pub fn complete_graph(n: usize) -> Network {
    Network::clique(n, n).expect("valid clique size")
}

pub fn edgeless(n: usize) -> Network {
    Network::empty(n).expect("n >= 1")
}

/// A fixed in-domain parameter point for the complete graph.
pub fn interior_theta(n: usize) -> ThetaPoint {
    ThetaPoint::new((0..n).map(|i| 2.0 + 0.25 * i as f64).collect())
}
