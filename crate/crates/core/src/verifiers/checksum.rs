//! Two-sided verifiers: the row/column Gaussian check and the Huang-Abraham
//! checksum scheme. Both project `C` from the right (one value per row) and
//! from the left (one value per column), so a single wrong entry shows up as
//! one mismatched row and one mismatched column.

use crate::error::Result;
use crate::linalg::{column_sums, oracle_multiply, row_sums, AccumulationMode};
use crate::matrix::DenseMatrix;
use crate::random::{sample_gaussian, SeededStream};
use crate::tolerance::{left_inner_length, right_inner_length, TolerancePolicy};

use super::{
    abs_vec, check_triple, mismatches, residual, ChecksumReport, Localization, Method, Projector, Verdict,
    VerifyOptions,
};

/// Gaussian row and column verification.
///
/// Draws `ω_C` (length `n`) and `ω_R` (length `m`) from independent
/// streams, then compares `C·ω_C` with `A·(B·ω_C)` and `ω_Rᵀ·C` with
/// `(ω_Rᵀ·A)·B`: six matrix-vector passes and two comparisons. `opts.k` is
/// ignored; one round already fails only when both sides are fooled.
pub fn gvfa_rowcol_verify(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    stream: SeededStream,
    opts: &VerifyOptions,
) -> Result<(Verdict, Localization)> {
    check_triple(a, b, c)?;
    opts.policy.validate()?;
    let omega_col = sample_gaussian(c.cols(), stream.iteration(0))?.values;
    let omega_row = sample_gaussian(c.rows(), stream.iteration(1))?.values;
    let sides = two_sided(a, b, c, &omega_col, &omega_row, &opts.policy, opts.mode);
    Ok((sides.verdict(Method::GvfaRowcol), sides.localization()))
}

/// Huang-Abraham checksums recast as a verifier: the column checksum row
/// `(1ᵀA)·B` and the row checksum column `A·(B·1)` are computed from the
/// factors and compared with the column and row sums of `C`.
///
/// Row or column exchanges in `C` preserve both checksums and go unnoticed.
pub fn huang_abraham_verify(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    opts: &VerifyOptions,
) -> Result<(Verdict, ChecksumReport)> {
    check_triple(a, b, c)?;
    opts.policy.validate()?;
    let ones_col = vec![1.0; c.cols()];
    let ones_row = vec![1.0; c.rows()];
    let sides = two_sided(a, b, c, &ones_col, &ones_row, &opts.policy, opts.mode);
    let verdict = sides.verdict(Method::HuangAbraham);
    let localization = sides.localization();
    let report = ChecksumReport {
        expected_col_checksum: sides.left.product,
        actual_col_checksum: sides.left.claimed,
        expected_row_checksum: sides.right.product,
        actual_row_checksum: sides.right.claimed,
        localization,
    };
    Ok((verdict, report))
}

/// The full checksum matrices: `A_F` is `A` with its column-sum row
/// appended, `B_F` is `B` with its row-sum column appended, and
/// `C_F = A_F × B_F`.
pub fn checksum_matrices(
    a: &DenseMatrix,
    b: &DenseMatrix,
    mode: AccumulationMode,
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    let mut a_data = a.as_slice().to_vec();
    a_data.extend(column_sums(a, mode));
    let a_f = DenseMatrix::corrupted(a.rows() + 1, a.cols(), a_data)?;

    let sums = row_sums(b, mode);
    let mut b_data = Vec::with_capacity(b.rows() * (b.cols() + 1));
    for (i, s) in sums.iter().enumerate() {
        b_data.extend_from_slice(b.row(i));
        b_data.push(*s);
    }
    let b_f = DenseMatrix::corrupted(b.rows(), b.cols() + 1, b_data)?;

    let c_f = oracle_multiply(&a_f, &b_f, mode)?;
    Ok((a_f, b_f, c_f))
}

struct Side {
    claimed: Vec<f64>,
    product: Vec<f64>,
    residual: Vec<f64>,
    tolerance: Vec<f64>,
}

struct Sides {
    right: Side,
    left: Side,
    ops: super::OpCount,
}

impl Sides {
    fn verdict(&self, method: Method) -> Verdict {
        let mut v = Verdict::new(method);
        v.iterations_run = 1;
        v.record(self.right.residual.clone(), self.right.tolerance.clone());
        v.record(self.left.residual.clone(), self.left.tolerance.clone());
        v.ops = self.ops;
        v
    }

    fn localization(&self) -> Localization {
        Localization::new(
            mismatches(&self.right.residual, &self.right.tolerance).collect(),
            mismatches(&self.left.residual, &self.left.tolerance).collect(),
        )
    }
}

fn two_sided(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    omega_col: &[f64],
    omega_row: &[f64],
    policy: &TolerancePolicy,
    mode: AccumulationMode,
) -> Sides {
    let mut p = Projector::new(mode);
    let need = policy.needs_magnitudes();

    let w = need.then(|| abs_vec(omega_col));
    let claimed = p.right(c, omega_col, w.as_deref());
    let bw = p.right(b, omega_col, w.as_deref());
    let abw = p.right(a, &bw.values, bw.magnitude.as_deref());
    let right = finish(claimed.values, claimed.magnitude, abw.values, abw.magnitude, right_inner_length(a, b), policy);

    let w = need.then(|| abs_vec(omega_row));
    let claimed = p.left(omega_row, c, w.as_deref());
    let wa = p.left(omega_row, a, w.as_deref());
    let wab = p.left(&wa.values, b, wa.magnitude.as_deref());
    let left = finish(claimed.values, claimed.magnitude, wab.values, wab.magnitude, left_inner_length(a, b), policy);

    Sides { right, left, ops: p.ops }
}

fn finish(
    claimed: Vec<f64>,
    claimed_mag: Option<Vec<f64>>,
    product: Vec<f64>,
    product_mag: Option<Vec<f64>>,
    inner_length: usize,
    policy: &TolerancePolicy,
) -> Side {
    let residual = residual(&claimed, &product);
    let tolerance = match (product_mag, claimed_mag) {
        (Some(pm), Some(cm)) => policy.tolerances(inner_length, &pm, &cm),
        _ => vec![policy.absolute_value; residual.len()],
    };
    Side { claimed, product, residual, tolerance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::uniform_matrix;
    use crate::tolerance::{component_tolerances, component_tolerances_left, tolerance_scale};

    fn swap_fixture() -> (DenseMatrix, DenseMatrix, DenseMatrix, DenseMatrix) {
        (
            DenseMatrix::from_rows(&[[2.0, 3.0], [3.0, 4.0]]).unwrap(),
            DenseMatrix::from_rows(&[[1.0, -6.0], [1.0, 6.0]]).unwrap(),
            DenseMatrix::from_rows(&[[5.0, 6.0], [7.0, 6.0]]).unwrap(),
            DenseMatrix::from_rows(&[[6.0, 5.0], [6.0, 7.0]]).unwrap(),
        )
    }

    #[test]
    fn checksum_matrices_of_the_example() {
        let (a, b, _, _) = swap_fixture();
        let (a_f, b_f, c_f) = checksum_matrices(&a, &b, AccumulationMode::default()).unwrap();
        assert_eq!(a_f, DenseMatrix::from_rows(&[[2.0, 3.0], [3.0, 4.0], [5.0, 7.0]]).unwrap());
        assert_eq!(b_f, DenseMatrix::from_rows(&[[1.0, -6.0, -5.0], [1.0, 6.0, 7.0]]).unwrap());
        assert_eq!(c_f, DenseMatrix::from_rows(&[[5.0, 6.0, 11.0], [7.0, 6.0, 13.0], [12.0, 12.0, 24.0]]).unwrap());
    }

    #[test]
    fn huang_abraham_accepts_correct_and_swapped_products() {
        let (a, b, c, c_prime) = swap_fixture();
        let opts = VerifyOptions::default();
        let (v, report) = huang_abraham_verify(&a, &b, &c, &opts).unwrap();
        assert!(v.accepted);
        assert_eq!(report.expected_col_checksum, vec![12.0, 12.0]);
        assert_eq!(report.expected_row_checksum, vec![11.0, 13.0]);
        assert_eq!(report.actual_row_checksum, vec![11.0, 13.0]);

        // The column exchange keeps both checksum vectors intact.
        let (v, report) = huang_abraham_verify(&a, &b, &c_prime, &opts).unwrap();
        assert!(v.accepted);
        assert_eq!(v.max_residual, 0.0);
        assert_eq!(report.actual_col_checksum, vec![12.0, 12.0]);
        assert_eq!(report.actual_row_checksum, vec![11.0, 13.0]);
        assert!(report.localization.implicated_cells.is_empty());
    }

    #[test]
    fn huang_abraham_localizes_a_single_fault() {
        let (a, b, c, _) = swap_fixture();
        let bad = c.with_entry(1, 0, |x| x + 1.0);
        let (v, report) = huang_abraham_verify(&a, &b, &bad, &VerifyOptions::default()).unwrap();
        assert!(!v.accepted);
        // Column 0 sums to 13 instead of 12, row 1 to 14 instead of 13.
        assert_eq!(report.actual_col_checksum, vec![13.0, 12.0]);
        assert_eq!(report.actual_row_checksum, vec![11.0, 14.0]);
        assert_eq!(report.localization.mismatched_rows, vec![1]);
        assert_eq!(report.localization.mismatched_cols, vec![0]);
        assert_eq!(report.localization.implicated_cells, vec![(1, 0)]);
    }

    #[test]
    fn rowcol_accepts_correct_and_zero_products() {
        let (a, b, c, _) = swap_fixture();
        let (v, loc) = gvfa_rowcol_verify(&a, &b, &c, SeededStream::new(1, 0), &VerifyOptions::default()).unwrap();
        assert!(v.accepted);
        assert!(loc.implicated_cells.is_empty());
        assert_eq!(v.ops.matvecs, 6);
        let z = DenseMatrix::zeros(4, 4);
        let (v, _) = gvfa_rowcol_verify(&z, &z, &z, SeededStream::new(1, 0), &VerifyOptions::default()).unwrap();
        assert!(v.accepted);
        assert_eq!(v.max_residual, 0.0);
    }

    #[test]
    fn rowcol_localizes_a_single_fault() {
        let mut exact = 0;
        let trials = 1_000;
        for t in 0..trials {
            let a = uniform_matrix(16, 16, SeededStream::new(20, t));
            let b = uniform_matrix(16, 16, SeededStream::new(21, t));
            let c = oracle_multiply(&a, &b, AccumulationMode::default()).unwrap();
            let bad = c.with_entry(0, 1, |x| x + 1e-3);
            let (v, loc) =
                gvfa_rowcol_verify(&a, &b, &bad, SeededStream::new(22, t), &VerifyOptions::default()).unwrap();
            assert!(!v.accepted);
            if loc.implicated_cells == vec![(0, 1)] {
                exact += 1;
            }
        }
        assert!(exact as f64 >= 0.999 * trials as f64, "{exact}/{trials}");
    }

    #[test]
    fn two_sided_tolerances_match_direct_formulas() {
        let a = uniform_matrix(5, 7, SeededStream::new(3, 0));
        let b = uniform_matrix(7, 4, SeededStream::new(3, 1));
        let c = oracle_multiply(&a, &b, AccumulationMode::default()).unwrap();
        let opts = VerifyOptions::default();
        let (v, _) = huang_abraham_verify(&a, &b, &c, &opts).unwrap();
        assert!(v.accepted);
        let right = component_tolerances(&a, &b, &c, &[1.0; 4], &opts.policy).unwrap();
        let left = component_tolerances_left(&a, &b, &c, &[1.0; 5], &opts.policy, opts.mode).unwrap();
        assert_eq!(v.tolerances, vec![right.clone(), left]);
        let scale = tolerance_scale(&a, &b, &c, &opts.policy).unwrap();
        assert_eq!(scale, right.iter().cloned().fold(0.0, f64::max));
    }

    #[test]
    fn rectangular_shapes() {
        let a = uniform_matrix(3, 9, SeededStream::new(4, 0));
        let b = uniform_matrix(9, 2, SeededStream::new(4, 1));
        let c = oracle_multiply(&a, &b, AccumulationMode::default()).unwrap();
        let opts = VerifyOptions::default();
        let (v, loc) = gvfa_rowcol_verify(&a, &b, &c, SeededStream::new(4, 2), &opts).unwrap();
        assert!(v.accepted, "{loc:?}");
        assert_eq!(v.residuals[0].len(), 3);
        assert_eq!(v.residuals[1].len(), 2);
        assert!(huang_abraham_verify(&a, &b, &c, &opts).unwrap().0.accepted);
        assert!(huang_abraham_verify(&a, &b, &DenseMatrix::zeros(2, 3), &opts).is_err());
    }
}
