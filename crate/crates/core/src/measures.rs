//! Matrix measures (logarithmic norms) induced by the 1, 2 and ∞ vector
//! norms, and closed forms for the measure of a second additive compound.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ensure_finite, ensure_square, symmetric_eigenvalues_desc, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    #[serde(rename = "1")]
    L1,
    #[serde(rename = "2")]
    L2,
    #[serde(rename = "inf")]
    LInf,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::L1, Norm::L2, Norm::LInf];
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "1",
            Norm::L2 => "2",
            Norm::LInf => "inf",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "l1" | "one" => Ok(Norm::L1),
            "2" | "l2" | "two" => Ok(Norm::L2),
            "inf" | "infinity" | "linf" | "∞" => Ok(Norm::LInf),
            other => Err(Error::Parse(format!(
                "unknown norm `{other}` (expected 1, 2 or inf)"
            ))),
        }
    }
}

/// `μ_p(A)`.
///
/// * `μ₁`: max over columns of `a_jj + Σ_{i≠j} |a_ij|`
/// * `μ∞`: max over rows of `a_ii + Σ_{j≠i} |a_ij|`
/// * `μ₂`: largest eigenvalue of `(A + Aᵀ)/2`
pub fn measure(a: &Matrix, p: Norm) -> Result<f64> {
    ensure_square(a)?;
    ensure_finite(a, "measure input")?;
    let n = a.nrows();
    Ok(match p {
        Norm::LInf => (0..n)
            .map(|i| {
                a[(i, i)]
                    + (0..n)
                        .filter(|&j| j != i)
                        .map(|j| a[(i, j)].abs())
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max),
        Norm::L1 => (0..n)
            .map(|j| {
                a[(j, j)]
                    + (0..n)
                        .filter(|&i| i != j)
                        .map(|i| a[(i, j)].abs())
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max),
        Norm::L2 => {
            let sym = (a + a.transpose()) * 0.5;
            symmetric_eigenvalues_desc(&sym)[0]
        }
    })
}

/// Value of `μ_p(A^[2])` together with the maximizing index pair (0-based,
/// lexicographically first among ties) for the 1 and ∞ norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondCompoundMeasure {
    pub value: f64,
    pub worst_pair: Option<(usize, usize)>,
}

/// `μ_p(A^[2])` evaluated without forming `A^[2]`.
pub fn measure_of_second_compound(a: &Matrix, p: Norm) -> Result<f64> {
    Ok(second_compound_measure_detail(a, p)?.value)
}

pub fn second_compound_measure_detail(a: &Matrix, p: Norm) -> Result<SecondCompoundMeasure> {
    ensure_square(a)?;
    let n = a.nrows();
    if n < 2 {
        return Err(Error::Dimension(format!(
            "second compound needs n ≥ 2, got n = {n}"
        )));
    }
    ensure_finite(a, "measure input")?;
    if n == 2 {
        // A^[2] is the 1×1 matrix [trace A]
        return Ok(SecondCompoundMeasure {
            value: a[(0, 0)] + a[(1, 1)],
            worst_pair: Some((0, 1)),
        });
    }
    match p {
        Norm::L2 => {
            let sym = (a + a.transpose()) * 0.5;
            let ev = symmetric_eigenvalues_desc(&sym);
            Ok(SecondCompoundMeasure {
                value: ev[0] + ev[1],
                worst_pair: None,
            })
        }
        Norm::L1 | Norm::LInf => {
            let entry = |r: usize, c: usize| {
                if p == Norm::LInf {
                    a[(r, c)]
                } else {
                    a[(c, r)]
                }
            };
            let mut best = SecondCompoundMeasure {
                value: f64::NEG_INFINITY,
                worst_pair: None,
            };
            for i in 0..n {
                for j in i + 1..n {
                    let off: f64 = (0..n)
                        .filter(|&k| k != i && k != j)
                        .map(|k| entry(i, k).abs() + entry(j, k).abs())
                        .sum();
                    let v = a[(i, i)] + a[(j, j)] + off;
                    if v > best.value {
                        best = SecondCompoundMeasure {
                            value: v,
                            worst_pair: Some((i, j)),
                        };
                    }
                }
            }
            Ok(best)
        }
    }
}
