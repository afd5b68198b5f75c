//! Covariance parametrization and Fisher-Rao metric of the Gaussian network
//! model.
//!
//! The covariance at a parameter point is `C(theta) = diag(theta) + A` with
//! `A` the 0/1 adjacency. On the positive-definite domain, the metric is
//! `G = (1/2) (C^-1)∘2` entrywise (the square of each inverse entry), which
//! this module evaluates three independent ways: the closed form through the
//! adjugate, the literal three-term differential-operator expansion, and a
//! direct Monte Carlo expectation of score products. The volume estimator
//! consumes a fourth path, [`CoreEvaluator`], which produces
//! `log(1 + det(C)^n) * sqrt(det G)` with the `1/det^n` singularity
//! cancelled analytically against the log factor.

use crate::graph::{Network, ThetaPoint};
use crate::linalg::{cholesky_in_buf, copy_minor, det_minor, lu_det, SymMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FisherError {
    #[error("theta length {got} does not match vertex count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("index {index} out of range for order {n}")]
    IndexOutOfRange { index: usize, n: usize },
}

/// `C(theta) = diag(theta) + A`.
pub fn covariance_at(net: &Network, theta: &ThetaPoint) -> Result<SymMatrix, FisherError> {
    let n = net.n();
    if theta.len() != n {
        return Err(FisherError::LengthMismatch { expected: n, got: theta.len() });
    }
    let mut c = SymMatrix::zeros(n);
    for i in 0..n {
        c.set_sym(i, i, theta.values()[i]);
        for j in (i + 1)..n {
            if net.has_edge(i, j) {
                c.set_sym(i, j, 1.0);
            }
        }
    }
    Ok(c)
}

/// Fisher matrix `G[u][v] = (1/2) (C^-1[u][v])^2`, evaluated through the
/// adjugate and determinant rather than an explicit inverse.
pub fn fisher_matrix(c: &SymMatrix) -> Result<SymMatrix, FisherError> {
    if !c.pd_test().is_pd {
        return Err(FisherError::NotPositiveDefinite);
    }
    let det = c.determinant();
    let adj = c.adjugate();
    let n = c.n();
    let mut g = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let inv_ij = adj.get(i, j) / det;
            g.set_sym(i, j, 0.5 * inv_ij * inv_ij);
        }
    }
    Ok(g)
}

/// Fisher matrix by the literal three-term operator expansion
/// `g = f(0) + D f|0 + (1/2) D^2 f|0`, kept as an independent oracle for
/// the closed form. The terms cancel massively by design; this evaluates
/// each sum verbatim.
pub fn fisher_matrix_lemma1(c: &SymMatrix) -> Result<SymMatrix, FisherError> {
    if !c.pd_test().is_pd {
        return Err(FisherError::NotPositiveDefinite);
    }
    let n = c.n();
    let inv = c.inverse().map_err(|_| FisherError::NotPositiveDefinite)?;
    let iv = |a: usize, b: usize| inv.get(a, b);
    let cc = |a: usize, b: usize| c.get(a, b);

    let mut g = SymMatrix::zeros(n);
    for mu in 0..n {
        for nu in mu..n {
            // f_{mu nu}(0) = 1/4 c^-1_{mu mu} c^-1_{nu nu}
            let f0 = 0.25 * iv(mu, mu) * iv(nu, nu);

            // first-order term: -1/4 sum_{ij} c_ij (c^-1_{i mu} c^-1_{j mu} c^-1_{nu nu}
            //                                      + c^-1_{i nu} c^-1_{j nu} c^-1_{mu mu})
            let mut dterm = 0.0;
            for i in 0..n {
                for j in 0..n {
                    dterm += cc(i, j)
                        * (iv(i, mu) * iv(j, mu) * iv(nu, nu) + iv(i, nu) * iv(j, nu) * iv(mu, mu));
                }
            }
            dterm *= -0.25;

            // second-order term: 1/8 sum_{ijhk} c_ij c_hk (six products)
            let mut d2term = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let cij = cc(i, j);
                    if cij == 0.0 {
                        continue;
                    }
                    for h in 0..n {
                        for k in 0..n {
                            let chk = cc(h, k);
                            if chk == 0.0 {
                                continue;
                            }
                            let sum6 = iv(i, mu) * iv(j, mu) * iv(h, nu) * iv(k, nu)
                                + iv(k, mu) * iv(j, mu) * iv(h, nu) * iv(i, nu)
                                + iv(h, mu) * iv(j, mu) * iv(k, nu) * iv(i, nu)
                                + iv(k, mu) * iv(i, mu) * iv(h, nu) * iv(j, nu)
                                + iv(h, mu) * iv(i, mu) * iv(k, nu) * iv(j, nu)
                                + iv(i, nu) * iv(j, nu) * iv(h, mu) * iv(k, mu);
                            d2term += cij * chk * sum6;
                        }
                    }
                }
            }
            d2term *= 0.125;

            g.set_sym(mu, nu, f0 + dterm + d2term);
        }
    }
    Ok(g)
}

/// Monte Carlo estimate of one Fisher matrix entry as the expectation of
/// the product of score components under `x ~ N(0, C(theta))`. Returns
/// `(estimate, standard error)`; deterministic for a fixed seed.
///
/// Panics if `samples < 1000` (too few for the error estimate to mean
/// anything).
pub fn fisher_entry_mc_oracle(
    net: &Network,
    theta: &ThetaPoint,
    mu: usize,
    nu: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), FisherError> {
    assert!(samples >= 1000, "fisher_entry_mc_oracle needs at least 1000 samples");
    let n = net.n();
    if mu >= n {
        return Err(FisherError::IndexOutOfRange { index: mu, n });
    }
    if nu >= n {
        return Err(FisherError::IndexOutOfRange { index: nu, n });
    }
    let c = covariance_at(net, theta)?;
    let chol = c.cholesky().ok_or(FisherError::NotPositiveDefinite)?;
    let inv = c.inverse().map_err(|_| FisherError::NotPositiveDefinite)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = vec![0.0f64; n];
    let mut x = vec![0.0f64; n];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        // x = L z has covariance L L^t = C
        for i in 0..n {
            let mut v = 0.0;
            for (k, zk) in z.iter().enumerate().take(i + 1) {
                v += chol[i * n + k] * zk;
            }
            x[i] = v;
        }
        // score component: d/d theta^t log p = -1/2 (c^-1_{tt} - (C^-1 x)_t^2)
        let q = |t: usize| -> f64 {
            let mut v = 0.0;
            for (a, xa) in x.iter().enumerate() {
                v += inv.get(t, a) * xa;
            }
            v
        };
        let qmu = q(mu);
        let s_mu = -0.5 * (inv.get(mu, mu) - qmu * qmu);
        let s_nu = if nu == mu {
            s_mu
        } else {
            let qnu = q(nu);
            -0.5 * (inv.get(nu, nu) - qnu * qnu)
        };
        let p = s_mu * s_nu;
        sum += p;
        sum_sq += p * p;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum_sq - m * mean * mean) / (m - 1.0);
    Ok((mean, (var / m).sqrt()))
}

/// Full metric evaluation at a parameter point: covariance, determinant,
/// adjugate, domain membership, and (inside the domain) the Fisher matrix.
#[derive(Debug, Clone)]
pub struct MetricEvaluation {
    pub theta: ThetaPoint,
    pub c: SymMatrix,
    pub det_c: f64,
    pub adj_c: SymMatrix,
    /// Present exactly when `in_domain`.
    pub g: Option<SymMatrix>,
    pub in_domain: bool,
}

impl MetricEvaluation {
    pub fn evaluate(net: &Network, theta: &ThetaPoint) -> Result<MetricEvaluation, FisherError> {
        let c = covariance_at(net, theta)?;
        let in_domain = c.pd_test().is_pd;
        let det_c = c.determinant();
        let adj_c = c.adjugate();
        let g = if in_domain {
            let n = c.n();
            let mut g = SymMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let inv_ij = adj_c.get(i, j) / det_c;
                    g.set_sym(i, j, 0.5 * inv_ij * inv_ij);
                }
            }
            Some(g)
        } else {
            None
        };
        Ok(MetricEvaluation { theta: theta.clone(), c, det_c, adj_c, g, in_domain })
    }
}

/// The theta-dependent part of the volume integrand,
/// `log(1 + det(C)^n) * sqrt(det G)`, evaluated in the cancelled form. Out
/// of domain the value is exactly 0 (the indicator of the parameter space),
/// never an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrandCore {
    pub value: f64,
    pub in_domain: bool,
    /// False when the direct evaluation overflowed and the value came from
    /// the logarithmic fallback path.
    pub log_scale_ok: bool,
}

impl IntegrandCore {
    fn out_of_domain() -> Self {
        IntegrandCore { value: 0.0, in_domain: false, log_scale_ok: true }
    }
}

/// `log(1+x)/x` for `x >= 0`, by a four-term alternating series below 1e-4
/// (series error under 1e-16 there) and directly above. Handles x
/// underflowing to zero, where the ratio tends to 1.
#[inline]
pub(crate) fn log1p_over(x: f64) -> f64 {
    if x < 1e-4 {
        1.0 - x * (0.5 - x * (1.0 / 3.0 - x * 0.25))
    } else {
        x.ln_1p() / x
    }
}

/// One-shot integrand evaluation; the volume estimator keeps a reusable
/// [`CoreEvaluator`] instead.
pub fn integrand_core(net: &Network, theta: &ThetaPoint) -> IntegrandCore {
    CoreEvaluator::new(net).eval(theta.values())
}

/// Reusable, allocation-free evaluator of the stable integrand core for one
/// fixed network.
#[derive(Debug, Clone)]
pub struct CoreEvaluator {
    n: usize,
    edgeless: bool,
    adj01: Vec<f64>,
    half_pow: f64,
    c: Vec<f64>,
    chol: Vec<f64>,
    adjugate: Vec<f64>,
    squares: Vec<f64>,
    minor: Vec<f64>,
}

impl CoreEvaluator {
    pub fn new(net: &Network) -> Self {
        let n = net.n();
        let adj01: Vec<f64> = net.adj_slice().iter().map(|&v| v as f64).collect();
        CoreEvaluator {
            n,
            edgeless: net.edge_count() == 0,
            adj01,
            half_pow: (-(n as f64) / 2.0).exp2(),
            c: vec![0.0; n * n],
            chol: vec![0.0; n * n],
            adjugate: vec![0.0; n * n],
            squares: vec![0.0; n * n],
            minor: vec![0.0; if n > 1 { (n - 1) * (n - 1) } else { 1 }],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&mut self, theta: &[f64]) -> IntegrandCore {
        assert_eq!(theta.len(), self.n, "theta length must match vertex count");
        if self.edgeless {
            self.eval_diagonal(theta)
        } else {
            self.eval_generic(theta)
        }
    }

    /// Edgeless network: C is diagonal, so det C = prod(theta),
    /// sqrt(det G) = (1/2)^(n/2) / det C, and the core reduces to
    /// `log(1 + d^n) (1/2)^(n/2) / d`. The generic path produces the same
    /// values; this one just skips the factorizations.
    fn eval_diagonal(&self, theta: &[f64]) -> IntegrandCore {
        if theta.iter().any(|&t| !(t > 0.0)) {
            return IntegrandCore::out_of_domain();
        }
        let n = self.n as f64;
        let d: f64 = theta.iter().product();
        let dn = powi_pos(d, self.n);
        if d.is_finite() && dn.is_finite() {
            IntegrandCore { value: dn.ln_1p() * self.half_pow / d, in_domain: true, log_scale_ok: true }
        } else {
            let ln_d: f64 = theta.iter().map(|&t| t.ln()).sum();
            let value = (n * ln_d).max(0.0) * self.half_pow * (-ln_d).exp();
            IntegrandCore { value, in_domain: true, log_scale_ok: false }
        }
    }

    fn eval_generic(&mut self, theta: &[f64]) -> IntegrandCore {
        let n = self.n;
        // C = diag(theta) + A
        self.c.copy_from_slice(&self.adj01);
        for (i, &t) in theta.iter().enumerate() {
            self.c[i * n + i] = t;
        }

        // strict PD gate; pivots give det C for free
        self.chol.copy_from_slice(&self.c);
        if cholesky_in_buf(&mut self.chol, n).is_none() {
            return IntegrandCore::out_of_domain();
        }
        let mut root_prod = 1.0;
        for k in 0..n {
            root_prod *= self.chol[k * n + k];
        }
        let det = root_prod * root_prod;

        // adjugate by cofactor minors (upper triangle, mirrored)
        for i in 0..n {
            for j in i..n {
                copy_minor(&self.c, n, j, i, &mut self.minor);
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                let v = sign * det_minor(&mut self.minor, n - 1);
                self.adjugate[i * n + j] = v;
                self.adjugate[j * n + i] = v;
            }
        }

        for (dst, &a) in self.squares.iter_mut().zip(self.adjugate.iter()) {
            *dst = a * a;
        }
        // squares is scratch; LU may destroy it
        let det_sq = match n {
            1 => self.squares[0],
            2..=5 => crate::linalg::det_expansion(&self.squares, n),
            _ => lu_det(&mut self.squares, n),
        };

        let dn = powi_pos(det, n);
        if dn.is_finite() && det_sq.is_finite() {
            let det_sq = clamp_square_det(det_sq);
            let value = log1p_over(dn) * self.half_pow * det_sq.sqrt();
            IntegrandCore { value, in_domain: true, log_scale_ok: true }
        } else {
            self.eval_log_scale(det)
        }
    }

    /// Overflow fallback: assemble the value in log space. Only reachable
    /// for parameter magnitudes far beyond anything the exponential
    /// proposals produce.
    fn eval_log_scale(&mut self, det: f64) -> IntegrandCore {
        let n = self.n;
        let ln_d = det.ln();
        let nf = n as f64;
        let dn = powi_pos(det, n);
        let ln_log_factor = if dn.is_finite() { dn.ln_1p().ln() } else { (nf * ln_d).ln() };

        // log det(adj∘2) via per-row scaling so the squares stay bounded
        let mut log_scale_sum = 0.0;
        let mut scaled = vec![0.0; n * n];
        for i in 0..n {
            let row = &self.adjugate[i * n..(i + 1) * n];
            let m = row.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
            if m == 0.0 {
                return IntegrandCore { value: 0.0, in_domain: true, log_scale_ok: false };
            }
            log_scale_sum += 2.0 * m.ln();
            for j in 0..n {
                let r = row[j] / m;
                scaled[i * n + j] = r * r;
            }
        }
        let scaled_det = lu_det(&mut scaled, n);
        if scaled_det <= 0.0 {
            return IntegrandCore { value: 0.0, in_domain: true, log_scale_ok: false };
        }
        let log_det_sq = log_scale_sum + scaled_det.ln();

        let ln_value = ln_log_factor + self.half_pow.ln() + 0.5 * log_det_sq - nf * ln_d;
        IntegrandCore { value: ln_value.exp(), in_domain: true, log_scale_ok: false }
    }
}

/// Integer power of a positive base without the `powf` slow path.
#[inline]
fn powi_pos(base: f64, exp: usize) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

/// det(adj(C)∘2) is non-negative on the domain; tiny negative round-off is
/// clamped to zero, anything clearly negative is a linear-algebra bug.
#[inline]
fn clamp_square_det(det_sq: f64) -> f64 {
    if det_sq >= 0.0 {
        det_sq
    } else if det_sq >= -1e-14 {
        0.0
    } else {
        panic!("det(adj∘2) = {det_sq} is negative beyond round-off; linalg bug");
    }
}

/// Sample a (network, theta) pair with positive definite covariance:
/// uniform 0/1 adjacency and theta resampled until the covariance is
/// positive definite with margin (every Cholesky pivot squared at least
/// 0.05). Near-boundary draws are excluded because no finite-precision
/// route evaluates the metric meaningfully there.
pub(crate) fn sample_pd_case<R: Rng>(n: usize, rng: &mut R) -> (Network, ThetaPoint) {
    loop {
        let net = Network::random_gnp(n, 0.5, rng).expect("n >= 1");
        for _ in 0..64 {
            let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..4.0)).collect();
            let tp = ThetaPoint::new(theta);
            let c = covariance_at(&net, &tp).unwrap();
            if let Some(l) = c.cholesky() {
                let interior = (0..n).all(|k| {
                    let piv = l[k * n + k];
                    piv * piv >= 0.05
                });
                if interior {
                    return (net, tp);
                }
            }
        }
    }
}
