//! Small symmetric matrices in packed upper-triangular storage.
//!
//! Dimensions 2 through 6 cover every tensor this laboratory manipulates
//! (space dimension up to 3, space-time dimension up to 4, plus headroom for
//! synthetic studies). Determinants use closed forms up to n = 3 and a
//! partially pivoted LU beyond; accuracy at these sizes beats generality.
//!
//! The positive-semidefinite test is an eigenvalue bound with a relative
//! tolerance. A small machine slack (a fixed multiple of f64 epsilon times
//! the matrix scale) is always included so that exactly representable PSD
//! constructions, e.g. [`SymMat::rank_one`], pass even with `tol = 0`.

use crate::error::{Error, Result};

/// Smallest supported dimension. Dimension 1 exists so that Schur
/// complements of 2-by-2 matrices (gas dynamics in one space dimension)
/// have a home; field-level functionals start at dimension 2.
pub const MIN_DIM: usize = 1;
/// Largest supported dimension.
pub const MAX_DIM: usize = 6;
/// Packed length for the largest supported dimension.
pub const PACKED_MAX: usize = MAX_DIM * (MAX_DIM + 1) / 2;

/// Packed length n(n+1)/2 of an n-dimensional symmetric matrix.
#[inline]
#[must_use]
pub fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Index of entry (i, j) inside the packed upper triangle.
#[inline]
pub(crate) fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

fn check_dim(n: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Symmetric n-by-n matrix, upper triangle packed row by row.
///
/// `Copy` with a fixed backing array: cheap to pass around, while bulk
/// storage (tensor fields) keeps only the packed slices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat {
    n: usize,
    a: [f64; PACKED_MAX],
}

/// Blockwise view of a symmetric matrix: scalar corner, coupling column,
/// trailing block. The decomposition every Schur-complement argument uses.
#[derive(Clone, Debug)]
pub struct BlockSplit {
    /// Corner entry a_11.
    pub rho: f64,
    /// Coupling column a_{1,2..n}.
    pub m: Vec<f64>,
    /// Trailing (n-1)-by-(n-1) block.
    pub b: SymMat,
}

impl SymMat {
    /// Zero matrix of dimension n.
    pub fn zeros(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            n,
            a: [0.0; PACKED_MAX],
        })
    }

    /// Identity matrix of dimension n.
    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        Ok(m)
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        Ok(m)
    }

    /// Matrix from a packed upper triangle (row by row: a11, a12, ..., ann).
    pub fn from_packed(n: usize, packed: &[f64]) -> Result<Self> {
        check_dim(n)?;
        if packed.len() != packed_len(n) {
            return Err(Error::DimensionMismatch(format!(
                "packed length {} for dimension {} (want {})",
                packed.len(),
                n,
                packed_len(n)
            )));
        }
        let mut a = [0.0; PACKED_MAX];
        a[..packed.len()].copy_from_slice(packed);
        Ok(Self { n, a })
    }

    /// Assemble [[rho, m^T], [m, b]] from blocks.
    pub fn from_blocks(rho: f64, m: &[f64], b: &SymMat) -> Result<Self> {
        let n = 1 + b.n;
        check_dim(n)?;
        if m.len() != b.n {
            return Err(Error::DimensionMismatch(format!(
                "coupling column length {} for trailing block of dimension {}",
                m.len(),
                b.n
            )));
        }
        let mut out = Self::zeros(n)?;
        out.set(0, 0, rho);
        for (j, &v) in m.iter().enumerate() {
            out.set(0, j + 1, v);
        }
        for i in 0..b.n {
            for j in i..b.n {
                out.set(i + 1, j + 1, b.get(i, j));
            }
        }
        Ok(out)
    }

    /// rho * U (x) U with U = (1, u): the rank-one building block of every
    /// transport tensor. Always positive semidefinite for rho >= 0.
    pub fn rank_one(rho: f64, u: &[f64]) -> Result<Self> {
        if rho < 0.0 {
            return Err(Error::NegativeDensity(rho));
        }
        let n = 1 + u.len();
        check_dim(n)?;
        let mut big = [0.0; MAX_DIM];
        big[0] = 1.0;
        big[1..n].copy_from_slice(u);
        let mut out = Self::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                out.set(i, j, rho * big[i] * big[j]);
            }
        }
        Ok(out)
    }

    #[inline]
    #[must_use]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Packed upper triangle, row by row.
    #[must_use]
    pub fn packed(&self) -> &[f64] {
        &self.a[..packed_len(self.n)]
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + j
    }

    #[inline]
    #[must_use]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.a[k] = v;
    }

    #[must_use]
    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    #[must_use]
    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        s.sqrt()
    }

    #[must_use]
    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        for v in out.a[..packed_len(self.n)].iter_mut() {
            *v *= c;
        }
        out
    }

    /// Entrywise sum; dimensions must agree.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "sum of dimensions {} and {}",
                self.n, other.n
            )));
        }
        let mut out = *self;
        for (v, w) in out.a[..packed_len(self.n)]
            .iter_mut()
            .zip(other.a[..packed_len(self.n)].iter())
        {
            *v += *w;
        }
        Ok(out)
    }

    /// Weighted sum sum_k c_k M_k; all dimensions must agree.
    pub fn weighted_sum(mats: &[Self], coeffs: &[f64]) -> Result<Self> {
        if mats.is_empty() || mats.len() != coeffs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} matrices with {} coefficients",
                mats.len(),
                coeffs.len()
            )));
        }
        let n = mats[0].n;
        let mut out = Self::zeros(n)?;
        let len = packed_len(n);
        for (m, &c) in mats.iter().zip(coeffs) {
            if m.n != n {
                return Err(Error::DimensionMismatch(format!(
                    "weighted sum mixes dimensions {} and {}",
                    n, m.n
                )));
            }
            for k in 0..len {
                out.a[k] += c * m.a[k];
            }
        }
        Ok(out)
    }

    /// A x for a full vector x of length n.
    #[must_use]
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Quadratic form x^T A x.
    #[must_use]
    pub fn quad(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += x[i] * self.get(i, j) * x[j];
            }
        }
        s
    }

    fn full_matrix(&self) -> [[f64; MAX_DIM]; MAX_DIM] {
        let mut f = [[0.0; MAX_DIM]; MAX_DIM];
        for i in 0..self.n {
            for j in 0..self.n {
                f[i][j] = self.get(i, j);
            }
        }
        f
    }

    /// Determinant: closed form for n <= 3, pivoted elimination above.
    #[must_use]
    pub fn det(&self) -> f64 {
        let a = |i: usize, j: usize| self.get(i, j);
        match self.n {
            1 => a(0, 0),
            2 => a(0, 0) * a(1, 1) - a(0, 1) * a(0, 1),
            3 => {
                a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(1, 2))
                    - a(0, 1) * (a(0, 1) * a(2, 2) - a(1, 2) * a(0, 2))
                    + a(0, 2) * (a(0, 1) * a(1, 2) - a(1, 1) * a(0, 2))
            }
            _ => {
                let mut f = self.full_matrix();
                lu_det(&mut f, self.n)
            }
        }
    }

    /// Cofactor matrix C with A C = (det A) I. Symmetric, well defined also
    /// for singular A (where it carries the rank-deficiency structure).
    #[must_use]
    pub fn cofactor(&self) -> Self {
        let n = self.n;
        if n == 2 {
            let mut out = Self::zeros(2).expect("dimension 2 is supported");
            out.set(0, 0, self.get(1, 1));
            out.set(1, 1, self.get(0, 0));
            out.set(0, 1, -self.get(0, 1));
            return out;
        }
        let full = self.full_matrix();
        let mut out = Self::zeros(n).expect("dimension checked at construction");
        for i in 0..n {
            for j in i..n {
                let mut minor = [[0.0; MAX_DIM]; MAX_DIM];
                let mut r = 0;
                for p in 0..n {
                    if p == i {
                        continue;
                    }
                    let mut c = 0;
                    for q in 0..n {
                        if q == j {
                            continue;
                        }
                        minor[r][c] = full[p][q];
                        c += 1;
                    }
                    r += 1;
                }
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                out.set(i, j, sign * lu_det(&mut minor, n - 1));
            }
        }
        out
    }

    /// Blockwise view (corner, coupling column, trailing block).
    ///
    /// Requires n >= 3 so the trailing block is itself a supported matrix.
    pub fn block_split(&self) -> Result<BlockSplit> {
        check_dim(self.n - 1)?;
        let m = (1..self.n).map(|j| self.get(0, j)).collect();
        let mut b = SymMat::zeros(self.n - 1)?;
        for i in 1..self.n {
            for j in i..self.n {
                b.set(i - 1, j - 1, self.get(i, j));
            }
        }
        Ok(BlockSplit {
            rho: self.get(0, 0),
            m,
            b,
        })
    }

    /// Schur complement of the corner entry: (rho, S) with
    /// S = B - m (x) m / rho, so that det A = rho * det S.
    ///
    /// Errors with [`Error::NonPositivePivot`] when a_11 <= 0.
    pub fn schur_complement(&self) -> Result<(f64, SymMat)> {
        let split = self.block_split()?;
        if split.rho <= 0.0 {
            return Err(Error::NonPositivePivot(split.rho));
        }
        let mut s = split.b;
        let k = self.n - 1;
        for i in 0..k {
            for j in i..k {
                s.set(i, j, s.get(i, j) - split.m[i] * split.m[j] / split.rho);
            }
        }
        Ok((split.rho, s))
    }

    /// Eigenvalues by cyclic Jacobi, ascending. Exact enough for the PSD
    /// bound at these dimensions (off-diagonal residue below 1e-14 * scale).
    #[must_use]
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.full_matrix();
        let scale = self.frobenius().max(1e-300);
        for _sweep in 0..32 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[p][q].abs();
                }
            }
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q].abs() <= 1e-18 * scale {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
        eig
    }

    /// Positive semidefinite within slack: smallest eigenvalue at least
    /// -tol * (1 + ||A||_F), plus an intrinsic machine slack so that exact
    /// PSD constructions pass with tol = 0.
    #[must_use]
    pub fn is_psd(&self, tol: f64) -> bool {
        let scale = 1.0 + self.frobenius();
        let slack = tol * scale + 32.0 * f64::EPSILON * scale;
        self.eigenvalues()[0] >= -slack
    }
}

/// Default relative tolerance for PSD certification.
pub const PSD_TOL: f64 = 1e-10;

/// Determinant of the leading n-by-n block by LU with partial pivoting.
/// Destroys the scratch argument.
pub(crate) fn lu_det(a: &mut [[f64; MAX_DIM]; MAX_DIM], n: usize) -> f64 {
    let mut det = 1.0;
    for k in 0..n {
        let mut piv = k;
        for r in (k + 1)..n {
            if a[r][k].abs() > a[piv][k].abs() {
                piv = r;
            }
        }
        if a[piv][k] == 0.0 {
            return 0.0;
        }
        if piv != k {
            a.swap(piv, k);
            det = -det;
        }
        det *= a[k][k];
        for r in (k + 1)..n {
            let f = a[r][k] / a[k][k];
            for c in k..n {
                a[r][c] -= f * a[k][c];
            }
        }
    }
    det
}

/// Determinant of a general (not necessarily symmetric) small matrix given
/// in row-major rows. Used for correlation determinants and oracles.
pub fn general_det(rows: &[&[f64]]) -> f64 {
    let n = rows.len();
    debug_assert!(n <= MAX_DIM);
    let mut a = [[0.0; MAX_DIM]; MAX_DIM];
    for (i, row) in rows.iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        a[i][..n].copy_from_slice(row);
    }
    lu_det(&mut a, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + a.abs().max(b.abs()))
    }

    fn random_sym(rng: &mut impl Rng, n: usize, scale: f64) -> SymMat {
        let mut m = SymMat::zeros(n).unwrap();
        for i in 0..n {
            for j in i..n {
                m.set(i, j, rng.gen_range(-scale..scale));
            }
        }
        m
    }

    fn random_psd(rng: &mut impl Rng, n: usize) -> SymMat {
        // Gram matrix of a random square factor.
        let b: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut m = SymMat::zeros(n).unwrap();
        for i in 0..n {
            for j in i..n {
                let v = (0..n).map(|k| b[k][i] * b[k][j]).sum();
                m.set(i, j, v);
            }
        }
        m
    }

    #[test]
    fn det_closed_forms() {
        let m = SymMat::from_packed(2, &[2.0, 1.0, 1.0]).unwrap();
        assert_eq!(m.det(), 1.0);
        let d = SymMat::from_diag(&[1.0, 2.0, 3.0]).unwrap();
        assert!(rel(d.det(), 6.0) < 1e-15);
        let i6 = SymMat::identity(6).unwrap();
        assert!(rel(i6.det(), 1.0) < 1e-14);
    }

    #[test]
    fn det_matches_eigenvalue_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in MIN_DIM..=MAX_DIM {
            for _ in 0..50 {
                let m = random_sym(&mut rng, n, 2.0);
                let prod: f64 = m.eigenvalues().iter().product();
                assert!(rel(m.det(), prod) < 1e-10, "n = {n}");
            }
        }
    }

    #[test]
    fn cofactor_identity_and_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in MIN_DIM..=MAX_DIM {
            for _ in 0..40 {
                let m = random_sym(&mut rng, n, 1.5);
                let c = m.cofactor();
                let det = m.det();
                // A * cof(A) = det(A) I, columnwise through apply().
                for j in 0..n {
                    let col: Vec<f64> = (0..n).map(|i| c.get(i, j)).collect();
                    let prod = m.apply(&col);
                    for (i, v) in prod.iter().enumerate() {
                        let want = if i == j { det } else { 0.0 };
                        assert!(
                            (v - want).abs() <= 1e-12 * (1.0 + det.abs()) * (1.0 + m.frobenius().powi(n as i32 - 1)),
                            "n = {n}, entry ({i},{j}): {v} vs {want}"
                        );
                    }
                }
                // det(cof(A)) = det(A)^(n-1).
                assert!(
                    rel(c.det(), det.powi(n as i32 - 1)) < 1e-9,
                    "n = {n}"
                );
            }
        }
    }

    #[test]
    fn cofactor_of_singular_keeps_rank_structure() {
        let m = SymMat::from_diag(&[1.0, 1.0, 0.0]).unwrap();
        let c = m.cofactor();
        assert_eq!(c.get(2, 2), 1.0);
        assert_eq!(c.get(0, 0), 0.0);
        assert_eq!(c.get(1, 1), 0.0);
    }

    #[test]
    fn schur_hand_value() {
        // [[2,1],[1,1]]: corner 2, complement 1 - 1/2 = 1/2, det = 2 * 1/2.
        let m = SymMat::from_packed(2, &[2.0, 1.0, 1.0]).unwrap();
        let (rho, s) = m.schur_complement().unwrap();
        assert_eq!(rho, 2.0);
        assert_eq!(s.dim(), 1);
        assert!(rel(s.get(0, 0), 0.5) < 1e-15);
        assert!(rel(rho * s.det(), m.det()) < 1e-14);
    }

    #[test]
    fn schur_det_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..=MAX_DIM {
            for _ in 0..200 {
                let mut m = random_sym(&mut rng, n, 2.0);
                m.set(0, 0, rng.gen_range(0.1..3.0));
                let (rho, s) = m.schur_complement().unwrap();
                assert!(rel(rho * s.det(), m.det()) < 1e-10, "n = {n}");
            }
        }
    }

    #[test]
    fn schur_rejects_nonpositive_pivot() {
        let mut m = SymMat::identity(3).unwrap();
        m.set(0, 0, 0.0);
        assert!(matches!(
            m.schur_complement(),
            Err(Error::NonPositivePivot(_))
        ));
    }

    #[test]
    fn rank_one_is_psd_at_zero_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..=5 {
            for _ in 0..100 {
                let rho = rng.gen_range(0.0..3.0);
                let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let m = SymMat::rank_one(rho, &u).unwrap();
                assert!(m.is_psd(0.0), "d = {d}");
                assert!(m.det().abs() <= 1e-12 * (1.0 + m.frobenius().powi(d + 1)));
            }
        }
        assert!(matches!(
            SymMat::rank_one(-1.0, &[0.0]),
            Err(Error::NegativeDensity(_))
        ));
    }

    #[test]
    fn psd_detects_small_negative_eigenvalue() {
        let m = SymMat::from_diag(&[1.0, -1e-6]).unwrap();
        assert!(!m.is_psd(1e-10));
        assert!(m.is_psd(1e-5));
        let psd = SymMat::from_diag(&[1.0, 0.0]).unwrap();
        assert!(psd.is_psd(0.0));
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = SymMat::from_diag(&[3.0, -1.0, 2.0]).unwrap();
        let e = m.eigenvalues();
        assert_eq!(e, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn block_split_assembles_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 3..=MAX_DIM {
            let m = random_sym(&mut rng, n, 1.0);
            let split = m.block_split().unwrap();
            let back = SymMat::from_blocks(split.rho, &split.m, &split.b).unwrap();
            assert_eq!(m, back);
        }
    }

    #[test]
    fn psd_gram_matrices_pass_default_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in MIN_DIM..=MAX_DIM {
            for _ in 0..100 {
                let m = random_psd(&mut rng, n);
                assert!(m.is_psd(PSD_TOL));
            }
        }
    }

    #[test]
    fn general_det_small_cases() {
        assert_eq!(general_det(&[&[1.0, 2.0], &[3.0, 4.0]]), -2.0);
        let d = general_det(&[&[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0], &[0.0, 0.0, 3.0]]);
        assert!((d - 3.0).abs() < 1e-15);
    }
}
