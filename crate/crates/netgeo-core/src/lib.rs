//! Information-geometric complexity entropy for networks.
//!
//! A network with 0/1 adjacency `A` induces a family of zero-mean Gaussian
//! distributions with covariance `C(theta) = diag(theta) + A`, parametrized
//! by the per-vertex variances over the region where `C` is positive
//! definite. The Fisher-Rao metric of that family has the closed form
//! `G = (1/2) (C^-1)∘2` (entrywise square), and the regularized Riemannian
//! volume
//!
//! ```text
//! V = ∫ exp(kappa - Tr C) log(1 + det(C)^n) sqrt(det G) dtheta
//! ```
//!
//! is finite, invariant under graph isomorphism, and normalized so that the
//! edgeless network has V = 1. The complexity entropy is `S = -log V`.
//!
//! The crate provides the graph and linear-algebra substrate, three
//! independent evaluation routes for the metric, a deterministic chunked
//! Monte Carlo volume estimator with exponential importance sampling, and
//! analytic quadrature cross-checks for the two- and three-vertex cases.

pub mod analytic;
pub mod checks;
pub mod fisher;
pub mod graph;
pub mod linalg;
pub mod quad;
mod sampler;
pub mod volume;

pub use analytic::{
    bessel_k0, default_theta3_grid, remark4_check, v2_diag_quadrature, v2_offdiag_quadrature,
    varphi, varphi_integral, varphi_root, AnalyticError, Remark4Report,
};
pub use checks::{run_all_checks, CheckConfig, CheckOutcome, CheckStatus};
pub use fisher::{
    covariance_at, fisher_entry_mc_oracle, fisher_matrix, fisher_matrix_lemma1, integrand_core,
    CoreEvaluator, FisherError, IntegrandCore, MetricEvaluation,
};
pub use graph::{GraphError, GraphFormat, Network, Permutation, ThetaPoint};
pub use linalg::{LinalgError, PDReport, SymMatrix};
pub use quad::{QuadError, QuadratureResult};
pub use sampler::MAX_QMC_DIMENSIONS;
pub use volume::{
    calibrate_kappa, entropy, estimate_volume, monotonicity_check, monotonicity_from_rows,
    simplex_table, simplex_table_with_kappa, upsilon, EntropyResult, KappaCache, KappaRecord,
    LogBase, McConfig, MonotonicityRow, SamplerKind, SimplexRow, VolumeError, VolumeEstimate,
    DEFAULT_CHUNK_SIZE,
};
