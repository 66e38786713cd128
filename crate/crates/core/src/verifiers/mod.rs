//! Matrix product verifiers.
//!
//! All verifiers compare two projections of the claimed product against
//! per-component tolerances and never form `A × B`. Each one reports the
//! number of matrix-vector passes it made in [`Verdict::ops`].

mod checksum;
mod projection;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::AccumulationMode;
use crate::matrix::DenseMatrix;
use crate::random::SeededStream;
use crate::tolerance::TolerancePolicy;

pub use checksum::{checksum_matrices, gvfa_rowcol_verify, huang_abraham_verify};
pub use projection::{chain_verify, check_chain, freivalds_verify, gvfa_verify, poly_verify};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Gvfa,
    Freivalds,
    Poly,
    GvfaRowcol,
    HuangAbraham,
    Chain,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Gvfa, Method::Freivalds, Method::Poly, Method::GvfaRowcol, Method::HuangAbraham, Method::Chain];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gvfa => "gvfa",
            Method::Freivalds => "freivalds",
            Method::Poly => "poly",
            Method::GvfaRowcol => "gvfa-rowcol",
            Method::HuangAbraham => "huang-abraham",
            Method::Chain => "chain",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::domain(format!("unknown method `{s}`")))
    }
}

/// Work performed by a verifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    /// Matrix-vector or vector-matrix passes. A pass that also accumulates
    /// the magnitudes needed by the tolerance still counts once.
    pub matvecs: usize,
    /// Scalar multiply-accumulate steps on signed values, i.e. the sum of
    /// `rows × cols` over all passes.
    pub multiply_adds: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Number of independent projections; the false-positive probability
    /// of each iteration multiplies.
    pub k: usize,
    pub policy: TolerancePolicy,
    pub mode: AccumulationMode,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { k: 1, policy: TolerancePolicy::default(), mode: AccumulationMode::default() }
    }
}

impl VerifyOptions {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_mode(mut self, mode: AccumulationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_policy(mut self, policy: TolerancePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::domain("iteration count k must be positive"));
        }
        self.policy.validate()
    }
}

/// Outcome of one verification.
///
/// `residuals[t]` and `tolerances[t]` hold `|C·ω − A·(B·ω)|` and `τ` for
/// comparison `t`. Projection verifiers make one comparison per iteration;
/// the row/column verifiers make two (right projection first, then left).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub iterations_run: usize,
    /// Largest residual component; `inf` if any residual is NaN.
    pub max_residual: f64,
    pub residuals: Vec<Vec<f64>>,
    pub tolerances: Vec<Vec<f64>>,
    pub method: Method,
    pub ops: OpCount,
}

impl Verdict {
    pub(crate) fn new(method: Method) -> Self {
        Self {
            accepted: true,
            iterations_run: 0,
            max_residual: 0.0,
            residuals: Vec::new(),
            tolerances: Vec::new(),
            method,
            ops: OpCount::default(),
        }
    }

    /// Records one comparison and returns whether it matched.
    pub(crate) fn record(&mut self, residual: Vec<f64>, tolerance: Vec<f64>) -> bool {
        let matched = mismatches(&residual, &tolerance).next().is_none();
        for &r in &residual {
            let r = if r.is_nan() { f64::INFINITY } else { r };
            self.max_residual = self.max_residual.max(r);
        }
        self.residuals.push(residual);
        self.tolerances.push(tolerance);
        self.accepted &= matched;
        matched
    }
}

/// Indices where the residual exceeds its tolerance. NaN never passes.
pub(crate) fn mismatches<'a>(residual: &'a [f64], tolerance: &'a [f64]) -> impl Iterator<Item = usize> + 'a {
    residual.iter().zip(tolerance).enumerate().filter(|(_, (r, t))| !(*r <= *t)).map(|(i, _)| i)
}

/// Where a rejected product disagrees. `implicated_cells` is the cartesian
/// product of the mismatched rows and columns: exact for a single faulty
/// entry, an over-approximation when several entries are wrong.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Localization {
    pub mismatched_rows: Vec<usize>,
    pub mismatched_cols: Vec<usize>,
    pub implicated_cells: Vec<(usize, usize)>,
}

impl Localization {
    pub(crate) fn new(mismatched_rows: Vec<usize>, mismatched_cols: Vec<usize>) -> Self {
        let implicated_cells =
            mismatched_rows.iter().flat_map(|&i| mismatched_cols.iter().map(move |&j| (i, j))).collect();
        Self { mismatched_rows, mismatched_cols, implicated_cells }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChecksumReport {
    /// `(1ᵀA)·B`, one entry per column of C.
    pub expected_col_checksum: Vec<f64>,
    /// `1ᵀC`.
    pub actual_col_checksum: Vec<f64>,
    /// `A·(B·1)`, one entry per row of C.
    pub expected_row_checksum: Vec<f64>,
    /// `C·1`.
    pub actual_row_checksum: Vec<f64>,
    #[serde(flatten)]
    pub localization: Localization,
}

pub(crate) fn check_triple(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> Result<()> {
    if a.cols() != b.rows() || c.shape() != (a.rows(), b.cols()) {
        return Err(Error::dimension(format!(
            "shapes do not compose: A {}x{}, B {}x{}, C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

/// Runs `method` on a product of `factors` claimed to equal `c`. Every
/// method except [`Method::Chain`] needs exactly two factors.
pub fn verify(
    method: Method,
    factors: &[DenseMatrix],
    c: &DenseMatrix,
    stream: SeededStream,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    let pair = || -> Result<(&DenseMatrix, &DenseMatrix)> {
        match factors {
            [a, b] => Ok((a, b)),
            _ => Err(Error::domain(format!("method {method} needs exactly two factors, got {}", factors.len()))),
        }
    };
    match method {
        Method::Gvfa => {
            let (a, b) = pair()?;
            gvfa_verify(a, b, c, stream, opts)
        }
        Method::Freivalds => {
            let (a, b) = pair()?;
            freivalds_verify(a, b, c, stream, opts)
        }
        Method::Poly => {
            let (a, b) = pair()?;
            poly_verify(a, b, c, stream, opts)
        }
        Method::GvfaRowcol => {
            let (a, b) = pair()?;
            gvfa_rowcol_verify(a, b, c, stream, opts).map(|(v, _)| v)
        }
        Method::HuangAbraham => {
            let (a, b) = pair()?;
            huang_abraham_verify(a, b, c, opts).map(|(v, _)| v)
        }
        Method::Chain => chain_verify(factors, c, stream, opts),
    }
}

/// Counts passes while delegating to the accumulation kernels. Each pass
/// optionally carries a magnitude vector through `|M|·|x|` alongside `M·x`.
pub(crate) struct Projector {
    pub mode: AccumulationMode,
    pub ops: OpCount,
}

pub(crate) struct Projected {
    pub values: Vec<f64>,
    pub magnitude: Option<Vec<f64>>,
}

impl Projector {
    pub fn new(mode: AccumulationMode) -> Self {
        Self { mode, ops: OpCount::default() }
    }

    fn tally(&mut self, m: &DenseMatrix) {
        self.ops.matvecs += 1;
        self.ops.multiply_adds += (m.rows() * m.cols()) as u64;
    }

    /// `M·x` and, if `magnitude` is given, `|M|·magnitude`.
    pub fn right(&mut self, m: &DenseMatrix, x: &[f64], magnitude: Option<&[f64]>) -> Projected {
        debug_assert_eq!(m.cols(), x.len());
        self.tally(m);
        let mode = self.mode;
        let values = (0..m.rows()).map(|i| mode.dot(m.row(i), x)).collect();
        let magnitude = magnitude.map(|w| {
            (0..m.rows()).map(|i| m.row(i).iter().zip(w).fold(0.0, |acc, (a, b)| mode.step(acc, a.abs(), *b))).collect()
        });
        Projected { values, magnitude }
    }

    /// `xᵀ·M` and, if `magnitude` is given, `magnitudeᵀ·|M|`.
    pub fn left(&mut self, x: &[f64], m: &DenseMatrix, magnitude: Option<&[f64]>) -> Projected {
        debug_assert_eq!(m.rows(), x.len());
        self.tally(m);
        let mode = self.mode;
        let mut values = vec![0.0; m.cols()];
        let mut mag = magnitude.map(|_| vec![0.0; m.cols()]);
        for i in 0..m.rows() {
            let row = m.row(i);
            for (s, &v) in values.iter_mut().zip(row) {
                *s = mode.step(*s, x[i], v);
            }
            if let (Some(acc), Some(w)) = (mag.as_mut(), magnitude) {
                for (s, &v) in acc.iter_mut().zip(row) {
                    *s = mode.step(*s, w[i], v.abs());
                }
            }
        }
        Projected { values, magnitude: mag }
    }
}

pub(crate) fn abs_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.abs()).collect()
}

pub(crate) fn residual(lhs: &[f64], rhs: &[f64]) -> Vec<f64> {
    lhs.iter().zip(rhs).map(|(x, y)| (x - y).abs()).collect()
}
