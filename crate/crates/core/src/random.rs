//! Seeded projection vectors and test matrices.
//!
//! Every random quantity is a pure function of a [`SeededStream`]: the seed
//! keys a ChaCha8 generator and the stream index selects one of its 2^64
//! independent streams, so trials can be generated in any order or in
//! parallel without shared state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Range of the polynomial ratio `r`. It keeps `r^(n-1)` inside binary64 for
/// `n ≤ 512` and stays away from zero.
pub const POLY_RATIO_RANGE: (f64, f64) = (0.5, 1.5);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_index: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        Self { seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Stream for the `j`-th iteration of a verifier. Iteration 0 is the
    /// stream itself; later iterations re-key the seed and keep the stream
    /// index, so they never collide with neighbouring trial indices.
    pub fn iteration(&self, j: u64) -> Self {
        if j == 0 {
            return *self;
        }
        Self { seed: splitmix64(self.seed ^ splitmix64(j)), stream_index: self.stream_index }
    }

    /// An unrelated stream family for a named purpose (e.g. matrix
    /// generation versus projection sampling under the same user seed).
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            seed: splitmix64(self.seed.wrapping_add(splitmix64(tag ^ 0x005E_ED0F_5EED))),
            stream_index: self.stream_index,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Binary,
    Polynomial,
}

/// A sampled projection vector together with where it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionVector {
    pub values: Vec<f64>,
    pub family: Family,
    pub provenance: SeededStream,
    /// The ratio `r`, for polynomial vectors only.
    pub r: Option<f64>,
}

impl ProjectionVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample(family: Family, n: usize, stream: SeededStream) -> Result<Self> {
        match family {
            Family::Gaussian => sample_gaussian(n, stream),
            Family::Binary => sample_binary(n, stream),
            Family::Polynomial => sample_polynomial(n, stream),
        }
    }
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::domain("projection vector length must be positive"))
    } else {
        Ok(())
    }
}

/// `n` i.i.d. standard normal samples (ziggurat method).
pub fn sample_gaussian(n: usize, stream: SeededStream) -> Result<ProjectionVector> {
    check_len(n)?;
    let mut rng = stream.rng();
    let values = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Ok(ProjectionVector { values, family: Family::Gaussian, provenance: stream, r: None })
}

/// `n` i.i.d. fair 0/1 samples.
pub fn sample_binary(n: usize, stream: SeededStream) -> Result<ProjectionVector> {
    check_len(n)?;
    let mut rng = stream.rng();
    let values = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect();
    Ok(ProjectionVector { values, family: Family::Binary, provenance: stream, r: None })
}

/// `(1, r, r², …, r^(n-1))` with `r` uniform on [`POLY_RATIO_RANGE`].
pub fn sample_polynomial(n: usize, stream: SeededStream) -> Result<ProjectionVector> {
    check_len(n)?;
    let r = stream.rng().random_range(POLY_RATIO_RANGE.0..=POLY_RATIO_RANGE.1);
    polynomial_with_ratio(n, r, stream)
}

/// Polynomial vector for a fixed ratio. Powers are built by repeated
/// multiplication; fails if any power overflows or underflows into the
/// subnormal range, where repeated products stall instead of reaching zero.
pub fn polynomial_with_ratio(n: usize, r: f64, provenance: SeededStream) -> Result<ProjectionVector> {
    check_len(n)?;
    if !r.is_finite() || r == 0.0 {
        return Err(Error::domain(format!("polynomial ratio must be finite and nonzero, got {r}")));
    }
    let mut values = Vec::with_capacity(n);
    let mut power = 1.0f64;
    for j in 0..n {
        if !power.is_finite() || power.abs() < f64::MIN_POSITIVE {
            return Err(Error::Range(format!("r^{j} with r = {r} is not representable (got {power})")));
        }
        values.push(power);
        power *= r;
    }
    Ok(ProjectionVector { values, family: Family::Polynomial, provenance, r: Some(r) })
}

/// Matrix with i.i.d. uniform entries on `[-1, 1]`.
pub fn uniform_matrix(rows: usize, cols: usize, stream: SeededStream) -> DenseMatrix {
    let mut rng = stream.rng();
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..=1.0))
}

/// Uniform `[-1, 1]` entries scaled by `10^(-decades · t)`, where `t` runs
/// from 0 on the first column to 1 on the last. Columns of wildly different
/// magnitude make inner products cancellation-heavy.
pub fn graded_matrix(rows: usize, cols: usize, decades: f64, stream: SeededStream) -> DenseMatrix {
    let mut rng = stream.rng();
    let denom = (cols.max(2) - 1) as f64;
    DenseMatrix::from_fn(rows, cols, |_, j| {
        let scale = 10f64.powf(-decades * j as f64 / denom);
        scale * rng.random_range(-1.0..=1.0)
    })
}
