//! The 2×2 column-swap counterexample.
//!
//! `A·B = C`, and swapping the columns of `C` gives `C'`, whose row and
//! column sums equal those of `C`. Checksum schemes cannot tell them apart.

use crate::matrix::DenseMatrix;

pub fn swap2x2_a() -> DenseMatrix {
    DenseMatrix::from_rows(&[[2.0, 3.0], [3.0, 4.0]]).expect("finite fixture")
}

pub fn swap2x2_b() -> DenseMatrix {
    DenseMatrix::from_rows(&[[1.0, -6.0], [1.0, 6.0]]).expect("finite fixture")
}

pub fn swap2x2_c() -> DenseMatrix {
    DenseMatrix::from_rows(&[[5.0, 6.0], [7.0, 6.0]]).expect("finite fixture")
}

/// `C` with its two columns exchanged.
pub fn swap2x2_c_swapped() -> DenseMatrix {
    DenseMatrix::from_rows(&[[6.0, 5.0], [6.0, 7.0]]).expect("finite fixture")
}
