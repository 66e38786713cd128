use std::fmt;
use std::ops::Add;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faults::{adversarial_paired_columns, apply_fault, delta_of_chain, FaultSpec};
use crate::fixtures;
use crate::linalg::{oracle_chain, AccumulationMode};
use crate::matrix::DenseMatrix;
use crate::random::{graded_matrix, uniform_matrix, SeededStream};
use crate::tolerance::{chain_tolerance_scale, TolerancePolicy};
use crate::verifiers::{verify, Method, VerifyOptions};

use super::bound::{theorem2_bound, BoundReport};

const MATRIX_TAG: u64 = 0x4D41_5452_4958;

/// Shape of the product `C`: `m × n`, with inner dimension `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub m: usize,
    pub p: usize,
    pub n: usize,
}

impl Shape {
    pub fn square(n: usize) -> Self {
        Self { m: n, p: n, n }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixSource {
    /// I.i.d. uniform entries on `[-1, 1]`.
    #[default]
    Uniform,
    /// Uniform entries with column magnitudes spread over `decades`.
    Graded { decades: f64 },
    /// The fixed 2×2 column-swap counterexample; the configured shape is
    /// ignored.
    Swap2x2,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultPlan {
    /// `C` is left intact; acceptances then count as `false_positives` and
    /// rejections as `detections`.
    #[default]
    None,
    Fixed {
        spec: FaultSpec,
    },
    /// See [`adversarial_paired_columns`].
    AdversarialPairedColumns {
        first: usize,
        second: usize,
        magnitude: f64,
    },
    /// `C[row][col] += ratio · ε`, where `ε` is the tolerance scale of each
    /// trial's instance (largest τ for the all-ones projection).
    ScaledElement {
        row: usize,
        col: usize,
        ratio: f64,
    },
}

impl FaultPlan {
    fn resolve(&self, factors: &[DenseMatrix], c: &DenseMatrix, policy: &TolerancePolicy) -> Result<Option<FaultSpec>> {
        Ok(match *self {
            FaultPlan::None => None,
            FaultPlan::Fixed { ref spec } => Some(spec.clone()),
            FaultPlan::AdversarialPairedColumns { first, second, magnitude } => {
                Some(adversarial_paired_columns(c.rows(), first, second, magnitude))
            }
            FaultPlan::ScaledElement { row, col, ratio } => {
                let scale = chain_tolerance_scale(factors, c, policy)?;
                Some(FaultSpec::ElementPerturb { row, col, delta: ratio * scale })
            }
        })
    }
}

impl fmt::Display for FaultPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultPlan::None => f.write_str("none"),
            FaultPlan::Fixed { spec } => write!(f, "{spec}"),
            FaultPlan::AdversarialPairedColumns { first, second, magnitude } => {
                write!(f, "adversarial-paired-columns:{first},{second},{magnitude}")
            }
            FaultPlan::ScaledElement { row, col, ratio } => write!(f, "element:{row},{col},{ratio}*tau"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub shape: Shape,
    /// Number of factors; must be 2 unless `method` is [`Method::Chain`].
    /// Inner factors of a chain are `p × p`.
    pub chain_len: usize,
    pub fault: FaultPlan,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub policy: TolerancePolicy,
    pub mode: AccumulationMode,
    pub source: MatrixSource,
}

impl ExperimentConfig {
    pub fn new(method: Method, shape: Shape, fault: FaultPlan, trials: usize, seed: u64) -> Self {
        Self {
            method,
            shape,
            chain_len: 2,
            fault,
            k: 1,
            trials,
            seed,
            policy: TolerancePolicy::default(),
            mode: AccumulationMode::default(),
            source: MatrixSource::default(),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_source(mut self, source: MatrixSource) -> Self {
        self.source = source;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::domain("trials must be positive"));
        }
        let Shape { m, p, n } = self.shape;
        if self.source != MatrixSource::Swap2x2 && (m == 0 || p == 0 || n == 0) {
            return Err(Error::dimension(format!("empty shape {m}x{p}x{n}")));
        }
        if self.chain_len < 2 {
            return Err(Error::domain("a product needs at least two factors"));
        }
        if self.method != Method::Chain && self.chain_len != 2 {
            return Err(Error::domain(format!("method {} takes exactly two factors", self.method)));
        }
        if self.source == MatrixSource::Swap2x2 && self.chain_len != 2 {
            return Err(Error::domain("the 2x2 fixture has exactly two factors"));
        }
        self.options().validate()
    }

    fn options(&self) -> VerifyOptions {
        VerifyOptions { k: self.k, policy: self.policy, mode: self.mode }
    }

    fn product_shape(&self) -> Shape {
        match self.source {
            MatrixSource::Swap2x2 => Shape::square(2),
            _ => self.shape,
        }
    }

    fn factors(&self, trial: u64) -> Vec<DenseMatrix> {
        let Shape { m, p, n } = self.shape;
        let base = SeededStream::new(self.seed, trial).derive(MATRIX_TAG);
        let generate = |i: usize, rows: usize, cols: usize| {
            let stream = base.derive(i as u64);
            match self.source {
                MatrixSource::Graded { decades } => graded_matrix(rows, cols, decades, stream),
                _ => uniform_matrix(rows, cols, stream),
            }
        };
        match self.source {
            MatrixSource::Swap2x2 => vec![fixtures::swap2x2_a(), fixtures::swap2x2_b()],
            _ => {
                let last = self.chain_len - 1;
                (0..self.chain_len)
                    .map(|i| {
                        let rows = if i == 0 { m } else { p };
                        let cols = if i == last { n } else { p };
                        generate(i, rows, cols)
                    })
                    .collect()
            }
        }
    }

    /// Factors and claimed (possibly faulted) product for one trial. The
    /// claimed matrix is `None` when the fault changed nothing.
    fn instance(&self, trial: u64) -> Result<(Vec<DenseMatrix>, Option<DenseMatrix>)> {
        let factors = self.factors(trial);
        let c = oracle_chain(&factors, self.mode)?;
        let claimed = match self.fault.resolve(&factors, &c, &self.policy)? {
            None => Some(c.clone()),
            Some(spec) => {
                let injection = apply_fault(&c, &spec)?;
                (!injection.neutral).then_some(injection.matrix)
            }
        };
        Ok((factors, claimed))
    }

    fn run_trial(&self, trial: u64) -> Result<Tally> {
        let (factors, claimed) = self.instance(trial)?;
        let Some(claimed) = claimed else {
            return Ok(Tally { neutral_injections: 1, ..Tally::default() });
        };
        let verdict = verify(self.method, &factors, &claimed, SeededStream::new(self.seed, trial), &self.options())
            .map_err(|e| Error::domain(format!("trial {trial}: {e}")))?;
        Ok(if verdict.accepted {
            Tally { false_positives: 1, ..Tally::default() }
        } else {
            Tally { detections: 1, ..Tally::default() }
        })
    }

    /// Bound evaluated on trial 0's `Δ` with `ε` its tolerance scale. `None`
    /// without a fault, for a neutral fault, or when `ε` is zero.
    fn bound(&self) -> Result<Option<BoundReport>> {
        if self.fault == FaultPlan::None {
            return Ok(None);
        }
        let (factors, claimed) = self.instance(0)?;
        let Some(claimed) = claimed else {
            return Ok(None);
        };
        let epsilon = chain_tolerance_scale(&factors, &claimed, &self.policy)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) || !claimed.is_finite() {
            return Ok(None);
        }
        let delta = delta_of_chain(&factors, &claimed, self.mode)?;
        theorem2_bound(&delta, epsilon, self.k).map(Some)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    false_positives: usize,
    detections: usize,
    neutral_injections: usize,
}

impl Add for Tally {
    type Output = Tally;

    fn add(self, o: Tally) -> Tally {
        Tally {
            false_positives: self.false_positives + o.false_positives,
            detections: self.detections + o.detections,
            neutral_injections: self.neutral_injections + o.neutral_injections,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub fault_spec: String,
    /// Columns of `C`.
    pub n: usize,
    pub shape: Shape,
    pub k: usize,
    pub trials: usize,
    pub false_positives: usize,
    pub detections: usize,
    pub neutral_injections: usize,
    /// `false_positives / (trials − neutral_injections)`; `None` when every
    /// injection was neutral.
    pub empirical_fp_rate: Option<f64>,
    pub empirical_fp_rate_ci95: Option<[f64; 2]>,
    pub bound: Option<BoundReport>,
    /// Seconds.
    pub wall_time: f64,
    pub seed: u64,
}

impl ExperimentReport {
    /// `detections / (trials − neutral_injections)`.
    pub fn detection_rate(&self) -> Option<f64> {
        self.empirical_fp_rate.map(|p| 1.0 - p)
    }

    fn effective_trials(&self) -> usize {
        self.trials - self.neutral_injections
    }
}

/// 95% normal-approximation interval for a binomial proportion, clipped to
/// `[0, 1]`. `None` when `trials` is zero.
pub fn binomial_interval(successes: usize, trials: usize) -> Option<[f64; 2]> {
    if trials == 0 {
        return None;
    }
    let p = successes as f64 / trials as f64;
    let half = 1.96 * (p * (1.0 - p) / trials as f64).sqrt();
    Some([(p - half).max(0.0), (p + half).min(1.0)])
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let tally = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| config.run_trial(t))
        .try_reduce(Tally::default, |a, b| Ok(a + b))?;
    let bound = config.bound()?;
    let effective = config.trials - tally.neutral_injections;
    let empirical_fp_rate = (effective > 0).then(|| tally.false_positives as f64 / effective as f64);
    let shape = config.product_shape();
    Ok(ExperimentReport {
        method: config.method,
        fault_spec: config.fault.to_string(),
        n: shape.n,
        shape,
        k: config.k,
        trials: config.trials,
        false_positives: tally.false_positives,
        detections: tally.detections,
        neutral_injections: tally.neutral_injections,
        empirical_fp_rate,
        empirical_fp_rate_ci95: binomial_interval(tally.false_positives, effective),
        bound,
        wall_time: start.elapsed().as_secs_f64(),
        seed: config.seed,
    })
}

/// How the magnitudes given to [`magnitude_sweep`] are interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepUnit {
    /// `δ` is added to the entry as is.
    Absolute,
    /// `δ` is a multiple of each instance's tolerance scale.
    ToleranceScale,
}

/// One experiment per magnitude with a single-entry fault. The entry is
/// taken from `base.fault` when it is an element fault, else `(0, 0)`.
/// A magnitude of 0 runs without a fault.
pub fn magnitude_sweep(base: &ExperimentConfig, deltas: &[f64], unit: SweepUnit) -> Result<Vec<ExperimentReport>> {
    if deltas.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::domain("sweep magnitudes must be finite and nonnegative"));
    }
    if deltas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("sweep magnitudes must be strictly increasing"));
    }
    let (row, col) = match base.fault {
        FaultPlan::ScaledElement { row, col, .. } => (row, col),
        FaultPlan::Fixed { spec: FaultSpec::ElementPerturb { row, col, .. } } => (row, col),
        _ => (0, 0),
    };
    deltas
        .iter()
        .map(|&delta| {
            let fault = match unit {
                _ if delta == 0.0 => FaultPlan::None,
                SweepUnit::Absolute => FaultPlan::Fixed { spec: FaultSpec::ElementPerturb { row, col, delta } },
                SweepUnit::ToleranceScale => FaultPlan::ScaledElement { row, col, ratio: delta },
            };
            run_experiment(&ExperimentConfig { fault, ..base.clone() })
        })
        .collect()
}

/// Whether detection rates never drop by more than three combined binomial
/// standard deviations from one report to the next.
pub fn detection_rates_nondecreasing(reports: &[ExperimentReport]) -> bool {
    reports.windows(2).all(|w| {
        let (Some(p0), Some(p1)) = (w[0].detection_rate(), w[1].detection_rate()) else {
            return true;
        };
        let var = |p: f64, r: &ExperimentReport| p * (1.0 - p) / r.effective_trials() as f64;
        p1 >= p0 - 3.0 * (var(p0, &w[0]) + var(p1, &w[1])).sqrt()
    })
}
