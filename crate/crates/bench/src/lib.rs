//! Instance generators shared by the benchmarks.

use gvfa_core::random::uniform_matrix;
use gvfa_core::{oracle_multiply, AccumulationMode, DenseMatrix, SeededStream};

/// Uniform `n × n` factors and their product.
pub fn square_instance(n: usize, seed: u64) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
    let a = uniform_matrix(n, n, SeededStream::new(seed, 0));
    let b = uniform_matrix(n, n, SeededStream::new(seed, 1));
    let c = oracle_multiply(&a, &b, AccumulationMode::default()).expect("square shapes compose");
    (a, b, c)
}
