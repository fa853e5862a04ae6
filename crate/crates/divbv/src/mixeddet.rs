//! Mixed determinants: the symmetric n-linear form whose diagonal is det.
//!
//! Two independent evaluation routes are kept side by side. The production
//! route is sign-alternating polarization over the 2^n corner sums; the
//! oracle route averages, over all permutations, the determinant of the
//! matrix assembled column by column from the arguments. They agree to
//! rounding and cross-validate each other in the test suite.

use crate::error::{Error, Result};
use crate::symmat::{self, SymMat, PSD_TOL};
use itertools::Itertools;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn check_tuple(mats: &[SymMat]) -> Result<usize> {
    if mats.is_empty() {
        return Err(Error::DimensionMismatch("empty matrix tuple".into()));
    }
    let n = mats[0].dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if mats.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices of dimension {} (a mixed determinant takes exactly n)",
            mats.len(),
            n
        )));
    }
    for (k, m) in mats.iter().enumerate() {
        if m.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "argument {k} has dimension {} in a tuple of dimension {n}",
                m.dim()
            )));
        }
    }
    Ok(n)
}

/// Mixed determinant by polarization:
/// sum over all sign vectors e in {-1,1}^n of e_1 ... e_n det(sum e_k M_k),
/// divided by 2^n n!.
pub fn mixed_det(mats: &[SymMat]) -> Result<f64> {
    let n = check_tuple(mats)?;
    let mut acc = 0.0;
    let mut coeffs = vec![0.0; n];
    for mask in 0u32..(1 << n) {
        let mut sign = 1.0;
        for (k, c) in coeffs.iter_mut().enumerate() {
            if mask & (1 << k) != 0 {
                *c = 1.0;
            } else {
                *c = -1.0;
                sign = -sign;
            }
        }
        let s = SymMat::weighted_sum(mats, &coeffs)?;
        acc += sign * s.det();
    }
    Ok(acc / (2f64.powi(n as i32) * factorial(n)))
}

/// Independent reference: average over permutations p of
/// det [ col_1(M_{p(1)}) | ... | col_n(M_{p(n)}) ].
///
/// Factorial cost; intended for cross-validation at n <= 5.
pub fn mixed_det_oracle(mats: &[SymMat]) -> Result<f64> {
    let n = check_tuple(mats)?;
    let mut acc = 0.0;
    let mut count = 0usize;
    let mut cols = vec![vec![0.0; n]; n];
    for perm in (0..n).permutations(n) {
        for (j, &src) in perm.iter().enumerate() {
            for i in 0..n {
                // Column j of M_src; rows of the assembled matrix are i.
                cols[i][j] = mats[src].get(i, j);
            }
        }
        let rows: Vec<&[f64]> = cols.iter().map(|r| r.as_slice()).collect();
        acc += symmat::general_det(&rows);
        count += 1;
    }
    Ok(acc / count as f64)
}

/// One-off mixed determinant D(B, M, ..., M) = trace(B cof(M)) / n.
///
/// The cofactor route stays valid when M is singular, which is exactly
/// where the kernel functionals need it.
pub fn mixed_det_one_off(b: &SymMat, m: &SymMat) -> Result<f64> {
    if b.dim() != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "one-off arguments of dimensions {} and {}",
            b.dim(),
            m.dim()
        )));
    }
    let n = m.dim();
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let cof = m.cofactor();
    let mut tr = 0.0;
    for i in 0..n {
        for k in 0..n {
            tr += b.get(i, k) * cof.get(k, i);
        }
    }
    Ok(tr / n as f64)
}

/// Geometric-mean lower bound against the mixed determinant on PSD tuples:
/// returns (prod det_k)^(1/n) and D(M_1, ..., M_n). The first never exceeds
/// the second beyond rounding; negative determinants from rounding are
/// clamped to zero before the root.
pub fn garding_gap(mats: &[SymMat]) -> Result<(f64, f64)> {
    let n = check_tuple(mats)?;
    for (k, m) in mats.iter().enumerate() {
        if !m.is_psd(PSD_TOL) {
            return Err(Error::NotPsd {
                index: k,
                min_eig: m.eigenvalues()[0],
            });
        }
    }
    let mut prod = 1.0;
    for m in mats {
        prod *= m.det().max(0.0);
    }
    let lhs = prod.powf(1.0 / n as f64);
    let rhs = mixed_det(mats)?;
    Ok((lhs, rhs))
}

/// Upper bound by total assembly: returns D(M_1, ..., M_n) and
/// det(M_1 + ... + M_n) / n!. On PSD tuples the first never exceeds the
/// second beyond rounding.
pub fn multilinear_upper(mats: &[SymMat]) -> Result<(f64, f64)> {
    let n = check_tuple(mats)?;
    let lhs = mixed_det(mats)?;
    let sum = SymMat::weighted_sum(mats, &vec![1.0; n])?;
    Ok((lhs, sum.det() / factorial(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + a.abs().max(b.abs()))
    }

    fn random_sym(rng: &mut impl Rng, n: usize) -> SymMat {
        let mut m = SymMat::zeros(n).unwrap();
        for i in 0..n {
            for j in i..n {
                m.set(i, j, rng.gen_range(-1.5..1.5));
            }
        }
        m
    }

    fn random_psd(rng: &mut impl Rng, n: usize) -> SymMat {
        let b: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let mut m = SymMat::zeros(n).unwrap();
        for i in 0..n {
            for j in i..n {
                m.set(i, j, (0..n).map(|k| b[k][i] * b[k][j]).sum());
            }
        }
        m
    }

    #[test]
    fn hand_value_two_diagonal_projectors() {
        let a = SymMat::from_diag(&[1.0, 0.0]).unwrap();
        let b = SymMat::from_diag(&[0.0, 1.0]).unwrap();
        let d = mixed_det(&[a, b]).unwrap();
        assert!(rel(d, 0.5) < 1e-15);
    }

    #[test]
    fn diagonal_is_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=6 {
            for _ in 0..30 {
                let m = random_sym(&mut rng, n);
                let tuple = vec![m; n];
                assert!(rel(mixed_det(&tuple).unwrap(), m.det()) < 1e-10, "n = {n}");
            }
        }
    }

    #[test]
    fn polarization_matches_permutation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in 2..=5 {
            for _ in 0..40 {
                let tuple: Vec<SymMat> = (0..n).map(|_| random_sym(&mut rng, n)).collect();
                let a = mixed_det(&tuple).unwrap();
                let b = mixed_det_oracle(&tuple).unwrap();
                assert!(rel(a, b) < 1e-10, "n = {n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn one_off_matches_polarization_and_trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 2..=6 {
            for _ in 0..30 {
                let b = random_sym(&mut rng, n);
                let m = random_sym(&mut rng, n);
                let mut tuple = vec![m; n];
                tuple[0] = b;
                let poly = mixed_det(&tuple).unwrap();
                let fast = mixed_det_one_off(&b, &m).unwrap();
                assert!(rel(poly, fast) < 1e-10, "n = {n}: {poly} vs {fast}");
            }
        }
        // B = I reduces to the trace: D(I, M, ..., M) picks up tr(cof M)/n.
        let m = SymMat::from_diag(&[2.0, 3.0]).unwrap();
        let i = SymMat::identity(2).unwrap();
        assert!(rel(mixed_det_one_off(&i, &m).unwrap(), 2.5) < 1e-14);
    }

    #[test]
    fn garding_hand_value() {
        let a = SymMat::from_diag(&[1.0, 4.0]).unwrap();
        let b = SymMat::from_diag(&[4.0, 1.0]).unwrap();
        let (lhs, rhs) = garding_gap(&[a, b]).unwrap();
        assert!(rel(lhs, 4.0) < 1e-14);
        assert!(rel(rhs, 8.5) < 1e-14);
    }

    #[test]
    fn garding_equality_at_coincident_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for n in 2..=5 {
            let m = random_psd(&mut rng, n);
            let (lhs, rhs) = garding_gap(&vec![m; n]).unwrap();
            assert!(rel(lhs, rhs) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn garding_holds_on_random_psd_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for n in 2..=5 {
            for _ in 0..300 {
                let tuple: Vec<SymMat> = (0..n).map(|_| random_psd(&mut rng, n)).collect();
                let (lhs, rhs) = garding_gap(&tuple).unwrap();
                assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()), "n = {n}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn garding_rejects_indefinite_argument() {
        let good = SymMat::identity(2).unwrap();
        let bad = SymMat::from_diag(&[1.0, -1.0]).unwrap();
        match garding_gap(&[good, bad]) {
            Err(Error::NotPsd { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn assembly_upper_bound_holds_and_is_tight_for_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for n in 2..=5 {
            for _ in 0..100 {
                let tuple: Vec<SymMat> = (0..n).map(|_| random_psd(&mut rng, n)).collect();
                let (lhs, rhs) = multilinear_upper(&tuple).unwrap();
                assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()), "n = {n}");
            }
            // All-identity tuple: D = 1, det(n I)/n! = n^n/n!.
            let tuple = vec![SymMat::identity(n).unwrap(); n];
            let (lhs, rhs) = multilinear_upper(&tuple).unwrap();
            assert!(rel(lhs, 1.0) < 1e-11);
            let nn = (n as f64).powi(n as i32) / factorial(n);
            assert!(rel(rhs, nn) < 1e-12);
        }
    }

    #[test]
    fn one_off_dominates_schur_floor_on_psd_pairs() {
        // D(F, A, ..., A) >= f_11 det(S)/n for PSD F, A with positive corner:
        // replacing A by its zero-corner Schur reduction can only decrease
        // the mixed determinant.
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for n in 2..=5 {
            for _ in 0..200 {
                let f = random_psd(&mut rng, n);
                let mut a = random_psd(&mut rng, n);
                a.set(0, 0, a.get(0, 0) + rng.gen_range(0.1..1.0));
                let (_, s) = a.schur_complement().unwrap();
                let floor = f.get(0, 0) * s.det() / n as f64;
                let val = mixed_det_one_off(&f, &a).unwrap();
                assert!(
                    val >= floor - 1e-10 * (1.0 + val.abs()),
                    "n = {n}: {val} < {floor}"
                );
            }
        }
    }

    #[test]
    fn multilinearity_in_first_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        for n in 2..=4 {
            let a = random_sym(&mut rng, n);
            let b = random_sym(&mut rng, n);
            let rest: Vec<SymMat> = (0..n - 1).map(|_| random_sym(&mut rng, n)).collect();
            let lam = rng.gen_range(-2.0..2.0);
            let combo = a.scale(lam).add(&b).unwrap();
            let mut t1 = vec![combo];
            t1.extend(rest.iter().copied());
            let mut t2 = vec![a];
            t2.extend(rest.iter().copied());
            let mut t3 = vec![b];
            t3.extend(rest.iter().copied());
            let lhs = mixed_det(&t1).unwrap();
            let rhs = lam * mixed_det(&t2).unwrap() + mixed_det(&t3).unwrap();
            assert!(rel(lhs, rhs) < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn permutation_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 4;
        let tuple: Vec<SymMat> = (0..n).map(|_| random_sym(&mut rng, n)).collect();
        let base = mixed_det(&tuple).unwrap();
        let mut shuffled = tuple.clone();
        shuffled.swap(0, 3);
        shuffled.swap(1, 2);
        assert!(rel(base, mixed_det(&shuffled).unwrap()) < 1e-12);
    }

    #[test]
    fn rejects_malformed_tuples() {
        let a = SymMat::identity(2).unwrap();
        let b = SymMat::identity(3).unwrap();
        assert!(mixed_det(&[a, a, a]).is_err());
        assert!(mixed_det(&[a, b]).is_err());
        assert!(mixed_det(&[]).is_err());
    }
}
