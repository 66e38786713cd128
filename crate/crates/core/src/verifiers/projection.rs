//! Single-sided projection verifiers: Gaussian, binary, polynomial and
//! chained products.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::random::{Family, ProjectionVector, SeededStream};
use crate::tolerance::{chain_inner_length, TolerancePolicy};

use super::{abs_vec, check_triple, residual, Method, Projector, Verdict, VerifyOptions};

/// Gaussian variant of Freivalds' check: for each of `k` independent
/// standard normal vectors `ω`, compares `C·ω` with `A·(B·ω)`. Stops at the
/// first mismatching iteration.
pub fn gvfa_verify(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    stream: SeededStream,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    check_triple(a, b, c)?;
    run(Method::Gvfa, Family::Gaussian, &[a, b], c, stream, opts)
}

/// Freivalds' original check with fair 0/1 vectors. For a wrong product each
/// iteration matches with probability at most 1/2.
pub fn freivalds_verify(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    stream: SeededStream,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    check_triple(a, b, c)?;
    run(Method::Freivalds, Family::Binary, &[a, b], c, stream, opts)
}

/// Projection onto `(1, r, …, r^(n-1))`. Experimental: the powers leave the
/// binary64 range for long vectors, which surfaces as a range error.
pub fn poly_verify(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    stream: SeededStream,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    check_triple(a, b, c)?;
    run(Method::Poly, Family::Polynomial, &[a, b], c, stream, opts)
}

/// Verifies `factors[0] × … × factors[N-1] = c` with `N + 1` matrix-vector
/// passes per iteration.
pub fn chain_verify(
    factors: &[DenseMatrix],
    c: &DenseMatrix,
    stream: SeededStream,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    let refs: Vec<&DenseMatrix> = factors.iter().collect();
    check_chain(&refs, c)?;
    run(Method::Chain, Family::Gaussian, &refs, c, stream, opts)
}

pub fn check_chain(factors: &[&DenseMatrix], c: &DenseMatrix) -> Result<()> {
    let (first, last) = match (factors.first(), factors.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::domain("empty matrix chain")),
    };
    for (i, w) in factors.windows(2).enumerate() {
        if w[0].cols() != w[1].rows() {
            return Err(Error::dimension(format!(
                "factor {i} is {}x{} but factor {} is {}x{}",
                w[0].rows(),
                w[0].cols(),
                i + 1,
                w[1].rows(),
                w[1].cols()
            )));
        }
    }
    if c.shape() != (first.rows(), last.cols()) {
        return Err(Error::dimension(format!(
            "chain product is {}x{} but C is {}x{}",
            first.rows(),
            last.cols(),
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

fn run(
    method: Method,
    family: Family,
    factors: &[&DenseMatrix],
    c: &DenseMatrix,
    stream: SeededStream,
    opts: &VerifyOptions,
) -> Result<Verdict> {
    opts.validate()?;
    let mut projector = Projector::new(opts.mode);
    let mut verdict = Verdict::new(method);
    for j in 0..opts.k {
        let omega = ProjectionVector::sample(family, c.cols(), stream.iteration(j as u64))?;
        let (res, tol) = project_chain(&mut projector, factors, c, &omega.values, &opts.policy);
        verdict.iterations_run += 1;
        if !verdict.record(res, tol) {
            break;
        }
    }
    verdict.ops = projector.ops;
    Ok(verdict)
}

/// One comparison of `C·ω` against `F₁·(F₂·(…(F_N·ω)))`.
fn project_chain(
    projector: &mut Projector,
    factors: &[&DenseMatrix],
    c: &DenseMatrix,
    omega: &[f64],
    policy: &TolerancePolicy,
) -> (Vec<f64>, Vec<f64>) {
    let weights = policy.needs_magnitudes().then(|| abs_vec(omega));
    let claimed = projector.right(c, omega, weights.as_deref());

    let mut values = omega.to_vec();
    let mut magnitude = weights;
    for m in factors.iter().rev() {
        let p = projector.right(m, &values, magnitude.as_deref());
        values = p.values;
        magnitude = p.magnitude;
    }

    let res = residual(&claimed.values, &values);
    let tol = match (magnitude, claimed.magnitude) {
        (Some(prod), Some(claim)) => policy.tolerances(chain_inner_length(factors), &prod, &claim),
        _ => vec![policy.absolute_value; res.len()],
    };
    (res, tol)
}
