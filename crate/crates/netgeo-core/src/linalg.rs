//! Small dense symmetric linear algebra with exact contracts.
//!
//! Everything here targets the tiny matrices (n of a few) that parametrized
//! network covariances produce: determinants, adjugates, leading principal
//! minors and strict positive-definiteness tests. Cofactor and expansion
//! kernels are preferred over factorizations at these sizes because they
//! stay accurate when the determinant approaches zero, which is exactly
//! where the volume integrand needs them.

use thiserror::Error;

/// Errors from symmetric-matrix operations.
#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    /// Determinant is exactly zero or a factorization hit a zero pivot.
    #[error("matrix is singular")]
    Singular,
    /// Operation requires a positive definite matrix.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    /// Input grid was not square or not exactly symmetric.
    #[error("rows do not form a symmetric {0}x{0} matrix")]
    NotSymmetric(usize),
}

/// Dense symmetric matrix, stored row-major with both triangles kept in sync.
///
/// Symmetry is enforced by construction: every mutator writes both `(i, j)`
/// and `(j, i)`, and [`SymMatrix::from_rows`] rejects asymmetric input.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix of order `n` (`n >= 1`).
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix order must be positive");
        SymMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.a[i * d.len() + i] = v;
        }
        m
    }

    /// Build from full rows, requiring exact symmetry (`a[i][j] == a[j][i]`).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::NotSymmetric(n));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(LinalgError::NotSymmetric(n));
                }
            }
        }
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n..(i + 1) * n].copy_from_slice(&rows[i]);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// Set entry `(i, j)` and its mirror `(j, i)`.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    /// Row-major backing slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// Congruence by a permutation: entry `(i, j)` moves to
    /// `(mapping[i], mapping[j])`. This is `P A P^t` for the permutation
    /// matrix sending basis vector `i` to `mapping[i]`.
    pub fn permuted(&self, mapping: &[usize]) -> SymMatrix {
        assert_eq!(mapping.len(), self.n, "permutation length mismatch");
        let n = self.n;
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.a[mapping[i] * n + mapping[j]] = self.a[i * n + j];
            }
        }
        out
    }

    /// Determinant: closed forms for n <= 3, pivoted LU for n >= 4.
    pub fn determinant(&self) -> f64 {
        match self.n {
            1 => self.a[0],
            2 | 3 => det_expansion(&self.a, self.n),
            n => {
                let mut buf = self.a.clone();
                lu_det(&mut buf, n)
            }
        }
    }

    /// Adjugate via cofactor determinants: `adj[i][j] = (-1)^(i+j) det(M_ji)`
    /// where `M_ji` deletes row `j` and column `i`. Satisfies
    /// `A * adj(A) = det(A) * I` and is symmetric for symmetric `A`.
    pub fn adjugate(&self) -> SymMatrix {
        let n = self.n;
        let mut out = SymMatrix::zeros(n);
        if n == 1 {
            out.a[0] = 1.0;
            return out;
        }
        let mut minor = vec![0.0; (n - 1) * (n - 1)];
        for i in 0..n {
            for j in i..n {
                // For symmetric input, deleting (row j, col i) and
                // (row i, col j) give transposed minors with equal dets.
                copy_minor(&self.a, n, j, i, &mut minor);
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                out.set_sym(i, j, sign * det_minor(&mut minor, n - 1));
            }
        }
        out
    }

    /// Strict positive-definiteness report.
    ///
    /// `is_pd` is true iff a full Cholesky factorization exists with strictly
    /// positive pivots; no epsilon slack is applied since the parameter
    /// domain is open and boundary points must be excluded. Leading minors
    /// come from pivot products when the factorization completes, and from
    /// direct subdeterminants otherwise.
    pub fn pd_test(&self) -> PDReport {
        let n = self.n;
        let mut buf = self.a.clone();
        match cholesky_in_buf(&mut buf, n) {
            Some(()) => {
                let mut minors = Vec::with_capacity(n);
                let mut running = 1.0;
                for k in 0..n {
                    let piv = buf[k * n + k];
                    running *= piv * piv;
                    minors.push(running);
                }
                PDReport { is_pd: true, leading_minors: minors }
            }
            None => {
                let minors = (1..=n).map(|k| self.leading_minor(k)).collect();
                PDReport { is_pd: false, leading_minors: minors }
            }
        }
    }

    fn leading_minor(&self, k: usize) -> f64 {
        let mut buf = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                buf[i * k + j] = self.a[i * self.n + j];
            }
        }
        match k {
            1 => buf[0],
            2 | 3 => det_expansion(&buf, k),
            _ => lu_det(&mut buf, k),
        }
    }

    /// Inverse: `adj / det` for n <= 6, pivoted LU solve beyond.
    pub fn inverse(&self) -> Result<SymMatrix, LinalgError> {
        let n = self.n;
        if n <= 6 {
            let det = self.determinant();
            if det == 0.0 {
                return Err(LinalgError::Singular);
            }
            let mut adj = self.adjugate();
            for v in adj.a.iter_mut() {
                *v /= det;
            }
            Ok(adj)
        } else {
            let mut inv = lu_invert(&self.a, n)?;
            // The inverse of a symmetric matrix is symmetric; resync the
            // triangles against factorization round-off.
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = 0.5 * (inv[i * n + j] + inv[j * n + i]);
                    inv[i * n + j] = v;
                    inv[j * n + i] = v;
                }
            }
            Ok(SymMatrix { n, a: inv })
        }
    }

    /// Lower Cholesky factor with strictly positive pivots, if one exists.
    pub(crate) fn cholesky(&self) -> Option<Vec<f64>> {
        let mut buf = self.a.clone();
        cholesky_in_buf(&mut buf, self.n)?;
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                buf[i * n + j] = 0.0;
            }
        }
        Some(buf)
    }
}

/// Positive-definiteness report: strict factorization verdict plus the
/// sequence of leading principal minors backing it.
#[derive(Debug, Clone, PartialEq)]
pub struct PDReport {
    pub is_pd: bool,
    pub leading_minors: Vec<f64>,
}

/// Copy the minor of `a` (order `n`) deleting `del_row` and `del_col` into
/// `out`, which must have length `(n-1)^2`.
#[inline]
pub(crate) fn copy_minor(a: &[f64], n: usize, del_row: usize, del_col: usize, out: &mut [f64]) {
    let m = n - 1;
    let mut r = 0;
    for i in 0..n {
        if i == del_row {
            continue;
        }
        let mut c = 0;
        for j in 0..n {
            if j == del_col {
                continue;
            }
            out[r * m + c] = a[i * n + j];
            c += 1;
        }
        r += 1;
    }
}

/// Determinant kernel for cofactor minors: division-free expansions up to
/// order 5, pivoted LU beyond. May scribble on `buf` for the LU path.
#[inline]
pub(crate) fn det_minor(buf: &mut [f64], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1..=5 => det_expansion(buf, k),
        _ => lu_det(buf, k),
    }
}

/// Division-free determinant expansions for orders 1..=5.
#[inline]
pub(crate) fn det_expansion(a: &[f64], k: usize) -> f64 {
    match k {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        4 => det4(a),
        5 => {
            // Laplace along the first row over 4x4 complements.
            let mut sub = [0.0f64; 16];
            let mut det = 0.0;
            let mut sign = 1.0;
            for j in 0..5 {
                let aj = a[j];
                if aj != 0.0 {
                    let mut c = 0;
                    for col in 0..5 {
                        if col == j {
                            continue;
                        }
                        for row in 1..5 {
                            sub[(row - 1) * 4 + c] = a[row * 5 + col];
                        }
                        c += 1;
                    }
                    det += sign * aj * det4(&sub);
                }
                sign = -sign;
            }
            det
        }
        _ => unreachable!("det_expansion only supports k <= 5"),
    }
}

/// 4x4 determinant from complementary 2x2 minors (30 multiplies, no division).
#[inline]
fn det4(m: &[f64]) -> f64 {
    let s0 = m[0] * m[5] - m[4] * m[1];
    let s1 = m[0] * m[6] - m[4] * m[2];
    let s2 = m[0] * m[7] - m[4] * m[3];
    let s3 = m[1] * m[6] - m[5] * m[2];
    let s4 = m[1] * m[7] - m[5] * m[3];
    let s5 = m[2] * m[7] - m[6] * m[3];
    let c5 = m[10] * m[15] - m[14] * m[11];
    let c4 = m[9] * m[15] - m[13] * m[11];
    let c3 = m[9] * m[14] - m[13] * m[10];
    let c2 = m[8] * m[15] - m[12] * m[11];
    let c1 = m[8] * m[14] - m[12] * m[10];
    let c0 = m[8] * m[13] - m[12] * m[9];
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

/// In-place LU determinant with partial pivoting. Returns 0.0 on a zero
/// pivot column (exactly singular).
pub(crate) fn lu_det(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for r in (k + 1)..n {
            let v = a[r * n + k].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k {
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for r in (k + 1)..n {
            let f = a[r * n + k] / pivot;
            if f != 0.0 {
                a[r * n + k] = 0.0;
                for c in (k + 1)..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
            }
        }
    }
    det
}

/// In-place lower Cholesky with strictly positive pivots. On success the
/// lower triangle of `a` (diagonal included) holds L; None if any pivot
/// fails strict positivity.
pub(crate) fn cholesky_in_buf(a: &mut [f64], n: usize) -> Option<()> {
    for k in 0..n {
        let mut d = a[k * n + k];
        for p in 0..k {
            let l = a[k * n + p];
            d -= l * l;
        }
        if !(d > 0.0) {
            return None;
        }
        let lkk = d.sqrt();
        a[k * n + k] = lkk;
        for r in (k + 1)..n {
            let mut v = a[r * n + k];
            for p in 0..k {
                v -= a[r * n + p] * a[k * n + p];
            }
            a[r * n + k] = v / lkk;
        }
    }
    Some(())
}

/// Dense inverse via LU with partial pivoting; zero pivot means singular.
fn lu_invert(a: &[f64], n: usize) -> Result<Vec<f64>, LinalgError> {
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut piv = k;
        let mut best = lu[k * n + k].abs();
        for r in (k + 1)..n {
            let v = lu[r * n + k].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Err(LinalgError::Singular);
        }
        if piv != k {
            for c in 0..n {
                lu.swap(k * n + c, piv * n + c);
            }
            perm.swap(k, piv);
        }
        let pivot = lu[k * n + k];
        for r in (k + 1)..n {
            let f = lu[r * n + k] / pivot;
            lu[r * n + k] = f;
            for c in (k + 1)..n {
                lu[r * n + c] -= f * lu[k * n + c];
            }
        }
    }
    let mut inv = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for e in 0..n {
        for i in 0..n {
            col[i] = if perm[i] == e { 1.0 } else { 0.0 };
        }
        for i in 0..n {
            for p in 0..i {
                col[i] -= lu[i * n + p] * col[p];
            }
        }
        for i in (0..n).rev() {
            for p in (i + 1)..n {
                col[i] -= lu[i * n + p] * col[p];
            }
            col[i] /= lu[i * n + i];
        }
        for i in 0..n {
            inv[i * n + e] = col[i];
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: textbook Laplace expansion along the first row.
    fn laplace_det(a: &[f64], n: usize) -> f64 {
        if n == 1 {
            return a[0];
        }
        let m = n - 1;
        let mut sub = vec![0.0; m * m];
        let mut det = 0.0;
        let mut sign = 1.0;
        for j in 0..n {
            copy_minor(a, n, 0, j, &mut sub);
            det += sign * a[j] * laplace_det(&sub, m);
            sign = -sign;
        }
        det
    }

    fn clique_block(k: usize, t: f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(k);
        for i in 0..k {
            for j in i..k {
                m.set_sym(i, j, if i == j { t } else { 1.0 });
            }
        }
        m
    }

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set_sym(i, j, rng.random_range(-2.0..2.0));
            }
        }
        m
    }

    fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        // A^t A + eps I is positive definite.
        let mut b = vec![0.0; n * n];
        for v in b.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += b[k * n + i] * b[k * n + j];
                }
                m.set_sym(i, j, s + if i == j { 0.1 } else { 0.0 });
            }
        }
        m
    }

    #[test]
    fn determinant_identity3() {
        assert_eq!(SymMatrix::identity(3).determinant(), 1.0);
    }

    #[test]
    fn determinant_2x2_closed_form() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(m.determinant(), 3.0);
    }

    #[test]
    fn determinant_clique_block() {
        // all-equal clique block: det = (t-1)^(k-1) (t+k-1)
        let m = clique_block(3, 2.0);
        let det = m.determinant();
        assert_relative_eq!(det, 4.0, max_relative = 1e-14);
        assert_relative_eq!(det, laplace_det(m.as_slice(), 3), max_relative = 1e-14);
        for k in 2..=6 {
            let t = 1.75;
            let m = clique_block(k, t);
            let expect = (t - 1.0).powi(k as i32 - 1) * (t + k as f64 - 1.0);
            assert_relative_eq!(m.determinant(), expect, max_relative = 1e-12);
            assert_relative_eq!(m.determinant(), laplace_det(m.as_slice(), k), max_relative = 1e-12);
        }
    }

    #[test]
    fn determinant_matches_laplace_oracle_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            for _ in 0..50 {
                let m = random_sym(&mut rng, n);
                let expect = laplace_det(m.as_slice(), n);
                let scale = expect.abs().max(1.0);
                assert!((m.determinant() - expect).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn adjugate_2x2_and_identity() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let adj = m.adjugate();
        assert_eq!(adj.get(0, 0), 2.0);
        assert_eq!(adj.get(0, 1), -1.0);
        assert_eq!(adj.get(1, 0), -1.0);
        assert_eq!(adj.get(1, 1), 2.0);
        let id = SymMatrix::identity(4);
        assert_eq!(id.adjugate(), id);
        assert_eq!(SymMatrix::from_diag(&[3.0]).adjugate().get(0, 0), 1.0);
    }

    #[test]
    fn adjugate_identity_random_pd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=8 {
            for _ in 0..20 {
                let m = random_pd(&mut rng, n);
                let det = m.determinant();
                let adj = m.adjugate();
                // m * adj(m) = det(m) * I, scaled by |det|
                for i in 0..n {
                    for j in 0..n {
                        let mut s = 0.0;
                        for k in 0..n {
                            s += m.get(i, k) * adj.get(k, j);
                        }
                        let expect = if i == j { det } else { 0.0 };
                        assert!(
                            (s - expect).abs() <= 1e-9 * det.abs().max(1e-30),
                            "n={n} ({i},{j}): {s} vs {expect}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn pd_test_basics() {
        assert!(SymMatrix::identity(4).pd_test().is_pd);

        // det = 0 is on the boundary and must be excluded.
        let sing = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let rep = sing.pd_test();
        assert!(!rep.is_pd);
        assert_eq!(rep.leading_minors, vec![1.0, 0.0]);

        let m = clique_block(2, 2.0);
        let rep = m.pd_test();
        assert!(rep.is_pd);
        assert_relative_eq!(rep.leading_minors[0], 2.0, max_relative = 1e-14);
        assert_relative_eq!(rep.leading_minors[1], 3.0, max_relative = 1e-14);
    }

    #[test]
    fn pd_test_agrees_with_minor_criterion() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 2..=6 {
            for _ in 0..1000 {
                let m = if rng.random_bool(0.5) {
                    random_sym(&mut rng, n)
                } else {
                    random_pd(&mut rng, n)
                };
                let rep = m.pd_test();
                // Independent criterion: all leading minors strictly positive,
                // computed from scratch on submatrices.
                let all_pos = (1..=n).all(|k| m.leading_minor(k) > 0.0);
                assert_eq!(rep.is_pd, all_pos, "n={n} m={m:?}");
            }
        }
    }

    #[test]
    fn determinant_equals_pivot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 2..=8 {
            for _ in 0..50 {
                let m = random_pd(&mut rng, n);
                let rep = m.pd_test();
                assert!(rep.is_pd);
                let from_pivots = rep.leading_minors[n - 1];
                assert_relative_eq!(m.determinant(), from_pivots, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn inverse_diag_and_closed_form() {
        let m = SymMatrix::from_diag(&[2.0, 4.0]);
        let inv = m.inverse().unwrap();
        assert_eq!(inv.get(0, 0), 0.5);
        assert_eq!(inv.get(1, 1), 0.25);

        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_relative_eq!(inv.get(0, 0), 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(inv.get(0, 1), -1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn inverse_singular_is_error() {
        let m = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(m.inverse().unwrap_err(), LinalgError::Singular);
    }

    #[test]
    fn inverse_large_n_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let m = random_pd(&mut rng, 9);
        let inv = m.inverse().unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let mut s = 0.0;
                for k in 0..9 {
                    s += m.get(i, k) * inv.get(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-10, "({i},{j}): {s}");
            }
        }
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap_err();
        assert_eq!(err, LinalgError::NotSymmetric(2));
    }

    #[test]
    fn permuted_congruence() {
        let m = SymMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 5.0],
            vec![3.0, 5.0, 6.0],
        ])
        .unwrap();
        let p = m.permuted(&[1, 2, 0]);
        assert_eq!(p.get(1, 1), 1.0);
        assert_eq!(p.get(1, 2), 2.0);
        assert_eq!(p.get(0, 0), 6.0);
        // trace and determinant are congruence invariants
        assert_eq!(
            (0..3).map(|i| p.get(i, i)).sum::<f64>(),
            (0..3).map(|i| m.get(i, i)).sum::<f64>()
        );
        assert_relative_eq!(p.determinant(), m.determinant(), max_relative = 1e-14);
    }
}
