//! Fault injection into a claimed product `C`.
//!
//! Faults are written in a compact grammar:
//!
//! ```text
//! element:<row>,<col>,<delta>
//! rowswap:<i1>,<i2>
//! colswap:<j1>,<j2>
//! bitflip:<row>,<col>,<bit>
//! sparse:<row>,<col>,<delta>[;<row>,<col>,<delta>]*
//! ```

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{oracle_chain, subtract, AccumulationMode};
use crate::matrix::{format_value, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellDelta {
    pub row: usize,
    pub col: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FaultSpec {
    /// `C[row][col] += delta`.
    ElementPerturb {
        row: usize,
        col: usize,
        delta: f64,
    },
    RowSwap {
        first: usize,
        second: usize,
    },
    ColSwap {
        first: usize,
        second: usize,
    },
    /// Flips bit `bit` (0 = least significant mantissa bit, 63 = sign) of
    /// the binary64 encoding of `C[row][col]`.
    BitFlip {
        row: usize,
        col: usize,
        bit: u8,
    },
    SparsePerturb(Vec<CellDelta>),
}

/// A faulted copy of `C`. `neutral` is true when the fault left every bit
/// of the matrix unchanged.
#[derive(Clone, Debug, PartialEq)]
pub struct Injection {
    pub matrix: DenseMatrix,
    pub neutral: bool,
}

impl FaultSpec {
    /// Checks the spec against a `rows × cols` target.
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let cell = |r: usize, c: usize| -> Result<()> {
            if r >= rows || c >= cols {
                Err(Error::domain(format!("cell ({r}, {c}) outside {rows}x{cols} matrix")))
            } else {
                Ok(())
            }
        };
        let delta = |d: f64| -> Result<()> {
            if d == 0.0 || !d.is_finite() {
                Err(Error::domain(format!("perturbation must be finite and nonzero, got {d}")))
            } else {
                Ok(())
            }
        };
        let pair = |a: usize, b: usize, bound: usize, what: &str| -> Result<()> {
            if a >= bound || b >= bound {
                Err(Error::domain(format!("{what} index out of range (have {bound})")))
            } else if a == b {
                Err(Error::domain(format!("{what} swap needs two distinct indices")))
            } else {
                Ok(())
            }
        };
        match self {
            FaultSpec::ElementPerturb { row, col, delta: d } => {
                cell(*row, *col)?;
                delta(*d)
            }
            FaultSpec::RowSwap { first, second } => pair(*first, *second, rows, "row"),
            FaultSpec::ColSwap { first, second } => pair(*first, *second, cols, "column"),
            FaultSpec::BitFlip { row, col, bit } => {
                cell(*row, *col)?;
                if *bit > 63 {
                    return Err(Error::domain(format!("bit index {bit} outside 0..=63")));
                }
                Ok(())
            }
            FaultSpec::SparsePerturb(cells) => {
                if cells.is_empty() {
                    return Err(Error::domain("sparse fault needs at least one cell"));
                }
                let mut seen = HashSet::new();
                for c in cells {
                    cell(c.row, c.col)?;
                    delta(c.delta)?;
                    if !seen.insert((c.row, c.col)) {
                        return Err(Error::domain(format!("cell ({}, {}) listed twice", c.row, c.col)));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Returns a faulted copy of `c`. A bit flip may produce NaN or an
/// infinity; the result then holds that value.
pub fn apply_fault(c: &DenseMatrix, spec: &FaultSpec) -> Result<Injection> {
    spec.validate(c.rows(), c.cols())?;
    let mut out = c.clone();
    let cols = c.cols();
    let data = out.data_mut();
    match spec {
        FaultSpec::ElementPerturb { row, col, delta } => data[row * cols + col] += delta,
        FaultSpec::RowSwap { first, second } => {
            for j in 0..cols {
                data.swap(first * cols + j, second * cols + j);
            }
        }
        FaultSpec::ColSwap { first, second } => {
            for i in 0..c.rows() {
                data.swap(i * cols + first, i * cols + second);
            }
        }
        FaultSpec::BitFlip { row, col, bit } => {
            let v = &mut data[row * cols + col];
            *v = f64::from_bits(v.to_bits() ^ (1u64 << bit));
        }
        FaultSpec::SparsePerturb(cells) => {
            for cd in cells {
                data[cd.row * cols + cd.col] += cd.delta;
            }
        }
    }
    let neutral = out.bitwise_eq(c);
    Ok(Injection { matrix: out, neutral })
}

/// `Δ = A·B − C_faulted` with the product from the cubic reference.
pub fn delta_of(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c_faulted: &DenseMatrix,
    mode: AccumulationMode,
) -> Result<DenseMatrix> {
    delta_of_chain(&[a.clone(), b.clone()], c_faulted, mode)
}

pub fn delta_of_chain(factors: &[DenseMatrix], c_faulted: &DenseMatrix, mode: AccumulationMode) -> Result<DenseMatrix> {
    subtract(&oracle_chain(factors, mode)?, c_faulted)
}

/// A fault whose `Δ` has column `first` equal to `magnitude·1` and column
/// `second` equal to `−magnitude·1`. A 0/1 projection sees `g = (ω₁ − ω₂)·d`,
/// which vanishes for exactly half of the outcomes: the worst case for
/// binary Freivalds.
pub fn adversarial_paired_columns(rows: usize, first: usize, second: usize, magnitude: f64) -> FaultSpec {
    // Δ = AB − C', so C' = C − Δ.
    FaultSpec::SparsePerturb(
        (0..rows)
            .flat_map(|i| {
                [
                    CellDelta { row: i, col: first, delta: -magnitude },
                    CellDelta { row: i, col: second, delta: magnitude },
                ]
            })
            .collect(),
    )
}

impl fmt::Display for FaultSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultSpec::ElementPerturb { row, col, delta } => {
                write!(f, "element:{row},{col},{}", format_value(*delta))
            }
            FaultSpec::RowSwap { first, second } => write!(f, "rowswap:{first},{second}"),
            FaultSpec::ColSwap { first, second } => write!(f, "colswap:{first},{second}"),
            FaultSpec::BitFlip { row, col, bit } => write!(f, "bitflip:{row},{col},{bit}"),
            FaultSpec::SparsePerturb(cells) => {
                f.write_str("sparse:")?;
                for (i, c) in cells.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{},{},{}", c.row, c.col, format_value(c.delta))?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for FaultSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::domain(format!("invalid fault `{s}`: {msg}"));
        let (kind, args) = s.split_once(':').ok_or_else(|| bad("expected `<kind>:<args>`"))?;
        let parts = |text: &'_ str, n: usize| -> Result<Vec<String>> {
            let p: Vec<String> = text.split(',').map(str::to_owned).collect();
            if p.len() != n {
                return Err(bad(&format!("expected {n} comma-separated fields")));
            }
            Ok(p)
        };
        let index = |t: &str| t.parse::<usize>().map_err(|_| bad(&format!("bad index `{t}`")));
        let value = |t: &str| -> Result<f64> {
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(bad(&format!("bad delta `{t}`"))),
            }
        };
        match kind {
            "element" => {
                let p = parts(args, 3)?;
                Ok(FaultSpec::ElementPerturb { row: index(&p[0])?, col: index(&p[1])?, delta: value(&p[2])? })
            }
            "rowswap" => {
                let p = parts(args, 2)?;
                Ok(FaultSpec::RowSwap { first: index(&p[0])?, second: index(&p[1])? })
            }
            "colswap" => {
                let p = parts(args, 2)?;
                Ok(FaultSpec::ColSwap { first: index(&p[0])?, second: index(&p[1])? })
            }
            "bitflip" => {
                let p = parts(args, 3)?;
                let bit = p[2]
                    .parse::<u8>()
                    .ok()
                    .filter(|b| *b <= 63)
                    .ok_or_else(|| bad(&format!("bit `{}` outside 0..=63", p[2])))?;
                Ok(FaultSpec::BitFlip { row: index(&p[0])?, col: index(&p[1])?, bit })
            }
            "sparse" => {
                let cells = args
                    .split(';')
                    .map(|cell| {
                        let p = parts(cell, 3)?;
                        Ok(CellDelta { row: index(&p[0])?, col: index(&p[1])?, delta: value(&p[2])? })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(FaultSpec::SparsePerturb(cells))
            }
            other => Err(bad(&format!("unknown kind `{other}`"))),
        }
    }
}

impl Serialize for FaultSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FaultSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
