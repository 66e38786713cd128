//! Exact-shape arithmetic: the cubic reference product, matrix-vector
//! products and elementwise subtraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// How each accumulation step `acc := acc + x·y` is rounded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccumulationMode {
    /// Round the product, then round the sum.
    #[default]
    SeparateRounding,
    /// One rounding for the whole step. `f64::mul_add` falls back to a
    /// correctly rounded software routine on targets without hardware FMA.
    FusedMultiplyAdd,
}

impl AccumulationMode {
    #[inline(always)]
    pub fn step(self, acc: f64, x: f64, y: f64) -> f64 {
        match self {
            AccumulationMode::SeparateRounding => acc + x * y,
            AccumulationMode::FusedMultiplyAdd => x.mul_add(y, acc),
        }
    }

    /// Left-to-right dot product starting from zero.
    #[inline]
    pub fn dot(self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match self {
            AccumulationMode::SeparateRounding => x.iter().zip(y).fold(0.0, |acc, (a, b)| acc + a * b),
            AccumulationMode::FusedMultiplyAdd => x.iter().zip(y).fold(0.0, |acc, (a, b)| a.mul_add(*b, acc)),
        }
    }
}

/// Textbook triple-loop product. Entry `(i, j)` accumulates
/// `a[i][0]·b[0][j], a[i][1]·b[1][j], …` in order, so the result is fully
/// deterministic for a given mode.
pub fn oracle_multiply(a: &DenseMatrix, b: &DenseMatrix, mode: AccumulationMode) -> Result<DenseMatrix> {
    if a.cols() != b.rows() {
        return Err(Error::dimension(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    // Columns of B laid out contiguously; the summation order is unchanged.
    let bt = b.transpose();
    let (m, n) = (a.rows(), b.cols());
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        let row = a.row(i);
        for j in 0..n {
            data.push(mode.dot(row, bt.row(j)));
        }
    }
    Ok(DenseMatrix::from_parts(m, n, data))
}

/// Product of a chain `m[0] × m[1] × … × m[N-1]`, multiplied left to right.
pub fn oracle_chain(factors: &[DenseMatrix], mode: AccumulationMode) -> Result<DenseMatrix> {
    let (first, rest) = factors.split_first().ok_or_else(|| Error::domain("empty matrix chain"))?;
    rest.iter().try_fold(first.clone(), |acc, m| oracle_multiply(&acc, m, mode))
}

/// `A·x`.
pub fn matvec(a: &DenseMatrix, x: &[f64], mode: AccumulationMode) -> Result<Vec<f64>> {
    if a.cols() != x.len() {
        return Err(Error::dimension(format!(
            "cannot multiply {}x{} matrix by vector of length {}",
            a.rows(),
            a.cols(),
            x.len()
        )));
    }
    Ok((0..a.rows()).map(|i| mode.dot(a.row(i), x)).collect())
}

/// `xᵀ·A`, the row vector obtained by projecting from the left. Component
/// `j` accumulates `x[0]·a[0][j], x[1]·a[1][j], …` in order.
pub fn vecmat(x: &[f64], a: &DenseMatrix, mode: AccumulationMode) -> Result<Vec<f64>> {
    if a.rows() != x.len() {
        return Err(Error::dimension(format!(
            "cannot multiply vector of length {} by {}x{} matrix",
            x.len(),
            a.rows(),
            a.cols()
        )));
    }
    let mut acc = vec![0.0; a.cols()];
    for (i, &xi) in x.iter().enumerate() {
        for (s, &aij) in acc.iter_mut().zip(a.row(i)) {
            *s = mode.step(*s, xi, aij);
        }
    }
    Ok(acc)
}

/// Elementwise `a − b`.
pub fn subtract(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.shape() != b.shape() {
        return Err(Error::dimension(format!(
            "cannot subtract {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let data = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x - y).collect();
    Ok(DenseMatrix::from_parts(a.rows(), a.cols(), data))
}

pub fn row_sums(a: &DenseMatrix, mode: AccumulationMode) -> Vec<f64> {
    matvec(a, &vec![1.0; a.cols()], mode).expect("shape matches by construction")
}

pub fn column_sums(a: &DenseMatrix, mode: AccumulationMode) -> Vec<f64> {
    vecmat(&vec![1.0; a.rows()], a, mode).expect("shape matches by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{uniform_matrix, SeededStream};
    use proptest::prelude::*;

    const U: f64 = f64::EPSILON / 2.0;

    /// Kahan-compensated dot product, independent of `AccumulationMode`.
    fn kahan_dot(x: &[f64], y: &[f64]) -> f64 {
        let mut sum = 0.0f64;
        let mut c = 0.0f64;
        for (a, b) in x.iter().zip(y) {
            let term = a * b - c;
            let t = sum + term;
            c = (t - sum) - term;
            sum = t;
        }
        sum
    }

    fn swap_a() -> DenseMatrix {
        DenseMatrix::from_rows(&[[2.0, 3.0], [3.0, 4.0]]).unwrap()
    }

    fn swap_b() -> DenseMatrix {
        DenseMatrix::from_rows(&[[1.0, -6.0], [1.0, 6.0]]).unwrap()
    }

    fn swap_c() -> DenseMatrix {
        DenseMatrix::from_rows(&[[5.0, 6.0], [7.0, 6.0]]).unwrap()
    }

    #[test]
    fn multiplies_the_two_by_two_example() {
        for mode in [AccumulationMode::SeparateRounding, AccumulationMode::FusedMultiplyAdd] {
            let c = oracle_multiply(&swap_a(), &swap_b(), mode).unwrap();
            assert!(c.bitwise_eq(&swap_c()));
        }
    }

    #[test]
    fn identity_is_neutral() {
        let m = uniform_matrix(3, 3, SeededStream::new(1, 0));
        let p = oracle_multiply(&DenseMatrix::identity(3), &m, AccumulationMode::default()).unwrap();
        assert!(p.bitwise_eq(&m));
    }

    #[test]
    fn product_matches_compensated_reference() {
        let a = uniform_matrix(5, 4, SeededStream::new(11, 0));
        let b = uniform_matrix(4, 3, SeededStream::new(11, 1));
        let bt = b.transpose();
        for mode in [AccumulationMode::SeparateRounding, AccumulationMode::FusedMultiplyAdd] {
            let c = oracle_multiply(&a, &b, mode).unwrap();
            for i in 0..5 {
                for j in 0..3 {
                    let reference = kahan_dot(a.row(i), bt.row(j));
                    let scale: f64 = a.row(i).iter().zip(bt.row(j)).map(|(x, y)| (x * y).abs()).sum();
                    assert!((c.get(i, j) - reference).abs() <= 8.0 * U * scale);
                }
            }
        }
    }

    #[test]
    fn rejects_mismatched_shapes() {
        let a = DenseMatrix::zeros(2, 3);
        assert!(oracle_multiply(&a, &a, AccumulationMode::default()).is_err());
        assert!(matvec(&a, &[1.0, 2.0], AccumulationMode::default()).is_err());
        assert!(vecmat(&[1.0, 2.0, 3.0], &a, AccumulationMode::default()).is_err());
        assert!(subtract(&a, &DenseMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn matvec_row_checksums() {
        let y = matvec(&swap_c(), &[1.0, 1.0], AccumulationMode::default()).unwrap();
        assert_eq!(y, vec![11.0, 13.0]);
        assert_eq!(column_sums(&swap_c(), AccumulationMode::default()), vec![12.0, 12.0]);
        let z = matvec(&swap_c(), &[0.0, 0.0], AccumulationMode::default()).unwrap();
        assert_eq!(z, vec![0.0, 0.0]);
    }

    #[test]
    fn matvec_within_componentwise_bound() {
        let n = 64;
        let a = uniform_matrix(n, n, SeededStream::new(3, 0));
        let x = uniform_matrix(1, n, SeededStream::new(3, 1)).into_vec();
        for mode in [AccumulationMode::SeparateRounding, AccumulationMode::FusedMultiplyAdd] {
            let y = matvec(&a, &x, mode).unwrap();
            for (i, yi) in y.iter().enumerate() {
                let reference = kahan_dot(a.row(i), &x);
                let mag: f64 = a.row(i).iter().zip(&x).map(|(p, q)| (p * q).abs()).sum();
                assert!((yi - reference).abs() <= n as f64 * U * mag);
            }
        }
    }

    #[test]
    fn subtract_is_elementwise() {
        let c_prime = DenseMatrix::from_rows(&[[6.0, 5.0], [6.0, 7.0]]).unwrap();
        let d = subtract(&c_prime, &swap_c()).unwrap();
        assert_eq!(d.as_slice(), &[1.0, -1.0, -1.0, 1.0]);
        let m = uniform_matrix(4, 5, SeededStream::new(5, 0));
        assert_eq!(subtract(&m, &m).unwrap().max_abs(), 0.0);
        let other = uniform_matrix(4, 5, SeededStream::new(5, 1));
        let d = subtract(&m, &other).unwrap();
        for i in 0..4 {
            for j in 0..5 {
                assert_eq!(d.get(i, j).to_bits(), (m.get(i, j) - other.get(i, j)).to_bits());
            }
        }
    }

    #[test]
    fn vecmat_matches_transpose_matvec() {
        let a = uniform_matrix(7, 5, SeededStream::new(9, 0));
        let x = uniform_matrix(1, 7, SeededStream::new(9, 1)).into_vec();
        for mode in [AccumulationMode::SeparateRounding, AccumulationMode::FusedMultiplyAdd] {
            let left = vecmat(&x, &a, mode).unwrap();
            let right = matvec(&a.transpose(), &x, mode).unwrap();
            assert_eq!(left, right);
        }
    }

    fn abs_vec(v: &[f64]) -> Vec<f64> {
        v.iter().map(|x| x.abs()).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn product_then_project_matches_nested_projection(
            m in 1usize..12, p in 1usize..12, n in 1usize..12, seed in any::<u64>(),
        ) {
            let a = uniform_matrix(m, p, SeededStream::new(seed, 0));
            let b = uniform_matrix(p, n, SeededStream::new(seed, 1));
            let x = uniform_matrix(1, n, SeededStream::new(seed, 2)).into_vec();
            let mode = AccumulationMode::default();
            let ab = oracle_multiply(&a, &b, mode).unwrap();
            let lhs = matvec(&ab, &x, mode).unwrap();
            let rhs = matvec(&a, &matvec(&b, &x, mode).unwrap(), mode).unwrap();
            let mag = matvec(&a.abs(), &matvec(&b.abs(), &abs_vec(&x), mode).unwrap(), mode).unwrap();
            let len = p.max(n) as f64;
            for i in 0..m {
                prop_assert!((lhs[i] - rhs[i]).abs() <= 2.0 * len * U * mag[i]);
            }
        }

        #[test]
        fn matvec_is_linear_within_roundoff(
            n in 1usize..16, alpha in -8.0f64..8.0, seed in any::<u64>(),
        ) {
            let a = uniform_matrix(n, n, SeededStream::new(seed, 0));
            let x = uniform_matrix(1, n, SeededStream::new(seed, 1)).into_vec();
            let scaled: Vec<f64> = x.iter().map(|v| alpha * v).collect();
            let mode = AccumulationMode::default();
            let y1 = matvec(&a, &scaled, mode).unwrap();
            let y2: Vec<f64> = matvec(&a, &x, mode).unwrap().iter().map(|v| alpha * v).collect();
            let mag = matvec(&a.abs(), &abs_vec(&x), mode).unwrap();
            for i in 0..n {
                // Each side carries at most n·u relative error in the summed
                // magnitudes plus one rounding for the scaling.
                let bound = 2.0 * U * alpha.abs() * (n as f64 * mag[i] + y2[i].abs());
                prop_assert!((y1[i] - y2[i]).abs() <= bound);
            }
        }

        #[test]
        fn fused_and_separate_matvec_agree(n in 1usize..40, seed in any::<u64>()) {
            let a = uniform_matrix(n, n, SeededStream::new(seed, 0));
            let x = uniform_matrix(1, n, SeededStream::new(seed, 1)).into_vec();
            let y1 = matvec(&a, &x, AccumulationMode::SeparateRounding).unwrap();
            let y2 = matvec(&a, &x, AccumulationMode::FusedMultiplyAdd).unwrap();
            let mag = matvec(&a.abs(), &abs_vec(&x), AccumulationMode::default()).unwrap();
            for i in 0..n {
                prop_assert!((y1[i] - y2[i]).abs() <= n as f64 * U * mag[i]);
            }
        }
    }
}
