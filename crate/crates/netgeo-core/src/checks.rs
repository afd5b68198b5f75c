//! Named numerical verification checks over the whole crate: closed-form
//! versus expansion metric agreement, invariance under relabeling,
//! calibration identities, quadrature/Monte-Carlo cross-checks, and the
//! simplex monotonicity scan. The CLI `verify` command prints one line per
//! outcome.

use crate::analytic;
use crate::fisher::{self, covariance_at, fisher_matrix, fisher_matrix_lemma1, integrand_core};
use crate::graph::{Network, Permutation, ThetaPoint};
use crate::quad::integrate_segments;
use crate::volume::{self, calibrate_kappa, entropy, estimate_volume, upsilon, KappaCache, LogBase, McConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Statistically inconclusive: the error bars exceed the margin under
    /// test. Reported instead of a failure at small sample counts.
    Wide,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Wide => "WIDE",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub samples: usize,
    pub seed: u64,
    pub kappa_cache: KappaCache,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { samples: 200_000, seed: 42, kappa_cache: KappaCache::disabled() }
    }
}

/// Run every check; order is fixed.
pub fn run_all_checks(cfg: &CheckConfig) -> Vec<CheckOutcome> {
    vec![
        check_metric_expansion(cfg),
        check_metric_mc_oracle(cfg),
        check_pointwise_invariance(cfg),
        check_entropy_invariance(cfg),
        check_calibration_identity(cfg),
        check_quadrature_mc_agreement(cfg),
        check_two_vertex_inequality(),
        check_bessel_identity(),
        check_three_vertex_integral(),
        check_monotonicity(cfg),
        check_boundary_decay(),
        check_determinism(cfg),
    ]
}

fn pass_fail(ok: bool) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

/// Closed form vs the literal operator expansion, 500 random PD instances
/// per order in 2..=6, entrywise 1e-9.
fn check_metric_expansion(cfg: &CheckConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA1);
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for n in 2..=6 {
        for _ in 0..500 {
            let (net, theta) = fisher::sample_pd_case(n, &mut rng);
            let c = covariance_at(&net, &theta).unwrap();
            let g1 = fisher_matrix(&c).unwrap();
            let g2 = fisher_matrix_lemma1(&c).unwrap();
            worst = worst.max(metric_relative_deviation(&g1, &g2));
            count += n * n;
        }
    }
    CheckOutcome {
        name: "metric-closed-form-vs-expansion",
        status: pass_fail(worst <= 1e-9),
        detail: format!("max entry deviation {worst:.3e} over {count} entries (tol 1e-9)"),
    }
}

/// Entrywise deviation relative to the metric's scale. The expansion route
/// cancels terms as large as the biggest metric entry, so comparing tiny
/// entries against themselves would only measure round-off noise.
pub fn metric_relative_deviation(g1: &crate::linalg::SymMatrix, g2: &crate::linalg::SymMatrix) -> f64 {
    let n = g1.n();
    let gmax = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| g1.get(i, j).abs())
        .fold(0.0f64, f64::max);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (g1.get(i, j), g2.get(i, j));
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(gmax));
        }
    }
    worst
}

/// Score-product Monte Carlo expectation vs the closed form, 20 cases
/// within 3 standard errors each.
fn check_metric_mc_oracle(cfg: &CheckConfig) -> CheckOutcome {
    let samples = cfg.samples.clamp(1000, 100_000);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xB2);
    let mut worst_sigmas = 0.0f64;
    for case in 0..20u64 {
        let n = rng.random_range(1..=5);
        let (net, theta) = fisher::sample_pd_case(n, &mut rng);
        let mu = rng.random_range(0..n);
        let nu = rng.random_range(0..n);
        let c = covariance_at(&net, &theta).unwrap();
        let exact = fisher_matrix(&c).unwrap().get(mu, nu);
        let (est, se) =
            fisher::fisher_entry_mc_oracle(&net, &theta, mu, nu, samples, cfg.seed ^ (0xC000 + case)).unwrap();
        worst_sigmas = worst_sigmas.max((est - exact).abs() / se.max(1e-300));
    }
    CheckOutcome {
        name: "metric-gaussian-expectation-oracle",
        status: pass_fail(worst_sigmas <= 3.0),
        detail: format!("max deviation {worst_sigmas:.2} sigma over 20 cases at {samples} samples (gate 3.0)"),
    }
}

/// Trace/determinant invariants of the regularizer and metric determinant
/// under congruence by random permutations, to 1e-12.
fn check_pointwise_invariance(cfg: &CheckConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xD3);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(2..=6);
        let (net, theta) = fisher::sample_pd_case(n, &mut rng);
        let p = Permutation::random(n, &mut rng);
        let c = covariance_at(&net, &theta).unwrap();
        let cp = c.permuted(p.mapping());

        let u1 = upsilon(&c, n, 0.3);
        let u2 = upsilon(&cp, n, 0.3);
        worst = worst.max((u1 - u2).abs() / u1.abs().max(1e-300));

        let d1 = fisher_matrix(&c).unwrap().determinant();
        let d2 = fisher_matrix(&cp).unwrap().determinant();
        worst = worst.max((d1 - d2).abs() / d1.abs().max(1e-300));
    }
    CheckOutcome {
        name: "relabeling-pointwise-invariance",
        status: pass_fail(worst <= 1e-12),
        detail: format!("max relative deviation {worst:.3e} (tol 1e-12)"),
    }
}

/// End-to-end entropy agreement between a network and a random relabeling,
/// independent seeds, within 3 combined standard errors.
fn check_entropy_invariance(cfg: &CheckConfig) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xE4);
    let mut worst = 0.0f64;
    for case in 0..10u64 {
        let n = rng.random_range(2..=6);
        let net = Network::random_gnp(n, 0.5, &mut rng).unwrap();
        let p = Permutation::random(n, &mut rng);
        let relabeled = net.permuted(&p).unwrap();

        let base = McConfig::new(cfg.samples, cfg.seed);
        let (kr, _) = match cfg.kappa_cache.get_or_calibrate(n, &base, false) {
            Ok(v) => v,
            Err(e) => {
                return CheckOutcome {
                    name: "relabeling-entropy-agreement",
                    status: CheckStatus::Fail,
                    detail: format!("calibration failed: {e}"),
                }
            }
        };
        let cfg_a = McConfig::new(cfg.samples, cfg.seed ^ (0x1000 + 2 * case));
        let cfg_b = McConfig::new(cfg.samples, cfg.seed ^ (0x1001 + 2 * case));
        let va = estimate_volume(&net, kr.kappa, &cfg_a).unwrap();
        let vb = estimate_volume(&relabeled, kr.kappa, &cfg_b).unwrap();
        let (ea, eb) = match (entropy(&va, LogBase::Base2), entropy(&vb, LogBase::Base2)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                return CheckOutcome {
                    name: "relabeling-entropy-agreement",
                    status: CheckStatus::Wide,
                    detail: "volume estimate not positive at this sample count".into(),
                }
            }
        };
        let combined = (ea.entropy_stderr.powi(2) + eb.entropy_stderr.powi(2)).sqrt();
        worst = worst.max((ea.entropy - eb.entropy).abs() / combined.max(1e-300));
    }
    CheckOutcome {
        name: "relabeling-entropy-agreement",
        status: pass_fail(worst <= 3.0),
        detail: format!("max deviation {worst:.2} sigma over 10 relabeled pairs (gate 3.0)"),
    }
}

/// Re-estimating the edgeless volume with a fresh seed must return 1
/// within 3 combined standard errors, for every order 1..=6.
fn check_calibration_identity(cfg: &CheckConfig) -> CheckOutcome {
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let base = McConfig::new(cfg.samples, cfg.seed);
        let kr = match calibrate_kappa(n, &base) {
            Ok(kr) => kr,
            Err(e) => {
                return CheckOutcome {
                    name: "calibration-identity",
                    status: CheckStatus::Fail,
                    detail: format!("calibration failed at n={n}: {e}"),
                }
            }
        };
        let fresh = McConfig::new(cfg.samples, cfg.seed.wrapping_add(7919 + n as u64));
        let est = estimate_volume(&Network::empty(n).unwrap(), kr.kappa, &fresh).unwrap();
        let combined = (est.stderr.powi(2) + (est.value * kr.kappa_stderr).powi(2)).sqrt();
        worst = worst.max((est.value - 1.0).abs() / combined.max(1e-300));
    }
    CheckOutcome {
        name: "calibration-identity",
        status: pass_fail(worst <= 3.0),
        detail: format!("max deviation {worst:.2} sigma from unit volume over n=1..6 (gate 3.0)"),
    }
}

/// Monte Carlo two-vertex volumes vs the normalized Bessel-reduced
/// quadratures, within 3 combined error bars.
fn check_quadrature_mc_agreement(cfg: &CheckConfig) -> CheckOutcome {
    let base = McConfig::new(cfg.samples, cfg.seed);
    let kr = match calibrate_kappa(2, &base) {
        Ok(kr) => kr,
        Err(e) => {
            return CheckOutcome {
                name: "two-vertex-quadrature-vs-mc",
                status: CheckStatus::Fail,
                detail: format!("calibration failed: {e}"),
            }
        }
    };
    let mut worst = 0.0f64;
    let fresh = McConfig::new(cfg.samples, cfg.seed.wrapping_add(101));
    for (net, quad) in [
        (Network::empty(2).unwrap(), analytic::v2_diag_quadrature(true, kr.kappa)),
        (Network::clique(2, 2).unwrap(), analytic::v2_offdiag_quadrature(true, kr.kappa)),
    ] {
        let quad = match quad {
            Ok(q) => q,
            Err(e) => {
                return CheckOutcome {
                    name: "two-vertex-quadrature-vs-mc",
                    status: CheckStatus::Fail,
                    detail: format!("quadrature failed: {e}"),
                }
            }
        };
        let est = estimate_volume(&net, kr.kappa, &fresh).unwrap();
        let combined = (est.stderr.powi(2) + (est.value * kr.kappa_stderr).powi(2)).sqrt()
            + quad.abs_error_bound;
        worst = worst.max((est.value - quad.value).abs() / combined.max(1e-300));
    }
    CheckOutcome {
        name: "two-vertex-quadrature-vs-mc",
        status: pass_fail(worst <= 3.0),
        detail: format!("max deviation {worst:.2} combined sigma (gate 3.0)"),
    }
}

/// Quadrature proof of the two-vertex inequality: the diagonal volume
/// exceeds the edge volume by more than the summed error bounds.
fn check_two_vertex_inequality() -> CheckOutcome {
    match (analytic::v2_diag_quadrature(false, 0.0), analytic::v2_offdiag_quadrature(false, 0.0)) {
        (Ok(d), Ok(o)) => {
            let margin = d.value - o.value;
            let bound = d.abs_error_bound + o.abs_error_bound;
            CheckOutcome {
                name: "two-vertex-volume-inequality",
                status: pass_fail(margin > bound),
                detail: format!("margin {margin:.6} with error bound {bound:.1e}"),
            }
        }
        (Err(e), _) | (_, Err(e)) => CheckOutcome {
            name: "two-vertex-volume-inequality",
            status: CheckStatus::Fail,
            detail: format!("quadrature failed: {e}"),
        },
    }
}

/// `2 K0(2 sqrt(y)) = int_0^inf t^-1 exp(-t - y/t) dt` at y in {0.1, 1, 10},
/// residual below 1e-8.
fn check_bessel_identity() -> CheckOutcome {
    let mut worst = 0.0f64;
    for y in [0.1, 1.0, 10.0] {
        let integral = integrate_segments(
            |t: f64| (-t - y / t).exp() / t,
            &[1e-6, 0.1, 1.0, 5.0, 60.0],
            1e-13,
            1e-12,
            400_000,
        );
        match integral {
            Ok(r) => {
                let lhs = 2.0 * analytic::bessel_k0(2.0 * y.sqrt()).unwrap();
                worst = worst.max((lhs - r.value).abs());
            }
            Err(e) => {
                return CheckOutcome {
                    name: "bessel-product-identity",
                    status: CheckStatus::Fail,
                    detail: format!("quadrature failed: {e}"),
                }
            }
        }
    }
    CheckOutcome {
        name: "bessel-product-identity",
        status: pass_fail(worst < 1e-8),
        detail: format!("max residual {worst:.2e} (tol 1e-8)"),
    }
}

/// Three-vertex double integral positive, with the inner integral negative
/// somewhere far out on the grid.
fn check_three_vertex_integral() -> CheckOutcome {
    match analytic::remark4_check(&analytic::default_theta3_grid()) {
        Ok(report) => {
            let positive =
                report.double_integral.value > report.double_integral.abs_error_bound;
            let has_negative_tail = !report.negative_inner_theta3.is_empty();
            CheckOutcome {
                name: "three-vertex-double-integral",
                status: pass_fail(positive && has_negative_tail),
                detail: format!(
                    "value {:.4e} +- {:.1e}; inner negative at {} grid point(s)",
                    report.double_integral.value,
                    report.double_integral.abs_error_bound,
                    report.negative_inner_theta3.len()
                ),
            }
        }
        Err(e) => CheckOutcome {
            name: "three-vertex-double-integral",
            status: CheckStatus::Fail,
            detail: format!("quadrature failed: {e}"),
        },
    }
}

/// Strict decrease of simplex volumes in k for every n in 2..=6. WIDE when
/// a margin is within 3 combined standard errors of zero.
fn check_monotonicity(cfg: &CheckConfig) -> CheckOutcome {
    let mut min_sigmas = f64::INFINITY;
    let mut any_wide = false;
    for n in 2..=6 {
        let mc = McConfig::new(cfg.samples, cfg.seed);
        let rows = match volume::monotonicity_check(n, &mc) {
            Ok(rows) => rows,
            Err(e) => {
                return CheckOutcome {
                    name: "simplex-volume-monotonicity",
                    status: CheckStatus::Fail,
                    detail: format!("estimation failed at n={n}: {e}"),
                }
            }
        };
        for row in rows {
            if row.sigmas.abs() <= 3.0 {
                any_wide = true;
            } else if row.margin <= 0.0 {
                return CheckOutcome {
                    name: "simplex-volume-monotonicity",
                    status: CheckStatus::Fail,
                    detail: format!(
                        "volume increased at n={n}, k={}: margin {:.3e} ({:.1} sigma)",
                        row.k, row.margin, row.sigmas
                    ),
                };
            }
            min_sigmas = min_sigmas.min(row.sigmas);
        }
    }
    if any_wide {
        CheckOutcome {
            name: "simplex-volume-monotonicity",
            status: CheckStatus::Wide,
            detail: format!("weakest margin {min_sigmas:.1} sigma; inconclusive below 3.0"),
        }
    } else {
        CheckOutcome {
            name: "simplex-volume-monotonicity",
            status: CheckStatus::Pass,
            detail: format!("all margins positive, weakest {min_sigmas:.1} sigma (gate 3.0)"),
        }
    }
}

/// The integrand core decays to zero monotonically along the approach to
/// the domain boundary of the two-vertex edge model.
fn check_boundary_decay() -> CheckOutcome {
    let net = Network::clique(2, 2).unwrap();
    let mut last = f64::INFINITY;
    let mut monotone = true;
    for k in 2..=13 {
        let t = 1.0 + 10f64.powi(-k);
        let v = integrand_core(&net, &ThetaPoint::new(vec![t, t]));
        monotone &= v.value < last;
        last = v.value;
    }
    CheckOutcome {
        name: "boundary-decay",
        status: pass_fail(monotone && last < 1e-6),
        detail: format!("monotone decrease to {last:.2e} at t = 1+1e-13"),
    }
}

/// Bit-identical volume estimates across thread pools of different sizes.
fn check_determinism(cfg: &CheckConfig) -> CheckOutcome {
    let net = Network::clique(4, 3).unwrap();
    let mc = McConfig::new(cfg.samples.min(100_000), cfg.seed).with_chunk_size(4096);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_volume(&net, 1.0, &mc).unwrap())
    };
    let a = run(1);
    let b = run(4);
    CheckOutcome {
        name: "estimator-determinism",
        status: pass_fail(a == b),
        detail: format!("1-thread vs 4-thread estimates {}", if a == b { "bit-identical" } else { "differ" }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass_at_moderate_samples() {
        let cfg = CheckConfig { samples: 60_000, seed: 42, kappa_cache: KappaCache::disabled() };
        let outcomes = run_all_checks(&cfg);
        assert_eq!(outcomes.len(), 12);
        for o in &outcomes {
            assert_ne!(o.status, CheckStatus::Fail, "{}: {}", o.name, o.detail);
        }
    }

    #[test]
    fn tiny_samples_do_not_hard_fail() {
        let cfg = CheckConfig { samples: 1000, seed: 7, kappa_cache: KappaCache::disabled() };
        for o in run_all_checks(&cfg) {
            assert_ne!(o.status, CheckStatus::Fail, "{}: {}", o.name, o.detail);
        }
    }
}
