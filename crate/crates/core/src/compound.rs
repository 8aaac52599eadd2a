//! Multiplicative and additive compound matrices.
//!
//! Row and column `α` of a `k`-th compound is indexed by the `α`-th
//! `k`-subset of `{1, …, n}` in lexicographic order. Subsets are stored
//! 0-based; [`LexIndexSet::one_based`] gives the conventional labels.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{ensure_finite, ensure_square, max_abs, Matrix};

/// Largest ambient dimension accepted by the compound constructors.
pub const MAX_COMPOUND_DIM: usize = 16;

/// Tolerance on `‖VW − I‖_max` for [`transform_add_compound`].
pub const LEFT_INVERSE_TOL: f64 = 1e-10;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All `k`-subsets of `{0, …, n−1}` in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LexIndexSet {
    n: usize,
    k: usize,
    subsets: Vec<Vec<usize>>,
}

impl LexIndexSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn get(&self, i: usize) -> Option<&[usize]> {
        self.subsets.get(i).map(Vec::as_slice)
    }

    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.subsets
            .iter()
            .map(|s| s.iter().map(|i| i + 1).collect())
            .collect()
    }

    fn positions(&self) -> HashMap<&[usize], usize> {
        self.subsets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect()
    }
}

pub fn lex_subsets(n: usize, k: usize) -> Result<LexIndexSet> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidOrder { n, k });
    }
    let mut subsets = Vec::with_capacity(binomial(n, k));
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        subsets.push(current.clone());
        // rightmost position that can still advance
        let Some(i) = (0..k).rev().find(|&i| current[i] < n - k + i) else {
            break;
        };
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
    Ok(LexIndexSet { n, k, subsets })
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_COMPOUND_DIM {
        Err(Error::Capacity {
            n,
            max: MAX_COMPOUND_DIM,
        })
    } else {
        Ok(())
    }
}

/// Determinant of a small row-major `k×k` block. Closed forms for `k ≤ 3`,
/// LU with partial pivoting above that.
fn det_small(buf: &mut [f64], k: usize) -> f64 {
    match k {
        1 => buf[0],
        2 => buf[0] * buf[3] - buf[1] * buf[2],
        3 => {
            buf[0] * (buf[4] * buf[8] - buf[5] * buf[7])
                - buf[1] * (buf[3] * buf[8] - buf[5] * buf[6])
                + buf[2] * (buf[3] * buf[7] - buf[4] * buf[6])
        }
        _ => det_lu(buf, k),
    }
}

fn det_lu(a: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i * k + col].abs().total_cmp(&a[j * k + col].abs()))
            .unwrap_or(col);
        let p = a[pivot * k + col];
        if p == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..k {
                a.swap(pivot * k + j, col * k + j);
            }
            det = -det;
        }
        det *= p;
        for i in col + 1..k {
            let factor = a[i * k + col] / p;
            if factor != 0.0 {
                for j in col..k {
                    a[i * k + j] -= factor * a[col * k + j];
                }
            }
        }
    }
    det
}

/// The `k`-th multiplicative compound: all `k×k` minors of `c` in
/// lexicographic order of row and column subsets.
pub fn mult_compound(c: &Matrix, k: usize) -> Result<Matrix> {
    let (n, m) = c.shape();
    if k == 0 || k > n.min(m) {
        return Err(Error::InvalidOrder { n: n.min(m), k });
    }
    check_capacity(n.max(m))?;
    ensure_finite(c, "compound input")?;

    let rows = lex_subsets(n, k)?;
    let cols = lex_subsets(m, k)?;
    let mut out = Matrix::zeros(rows.len(), cols.len());
    let mut buf = vec![0.0; k * k];
    for (r, alpha) in rows.subsets().iter().enumerate() {
        for (s, beta) in cols.subsets().iter().enumerate() {
            for (i, &ai) in alpha.iter().enumerate() {
                for (j, &bj) in beta.iter().enumerate() {
                    buf[i * k + j] = c[(ai, bj)];
                }
            }
            out[(r, s)] = det_small(&mut buf, k);
        }
    }
    Ok(out)
}

/// The `k`-th additive compound, built entry by entry.
///
/// Diagonal entries are `Σ_{i∈α} a_ii`. When `β` is `α` with the element at
/// position `s` replaced by a new index landing at position `t` of `β`, the
/// entry is `(−1)^(s+t) a_{α_s β_t}`. Every other entry is zero.
pub fn add_compound(a: &Matrix, k: usize) -> Result<Matrix> {
    ensure_square(a)?;
    let n = a.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidOrder { n, k });
    }
    check_capacity(n)?;
    ensure_finite(a, "compound input")?;

    let idx = lex_subsets(n, k)?;
    let pos = idx.positions();
    let mut out = Matrix::zeros(idx.len(), idx.len());
    let mut beta = Vec::with_capacity(k);
    for (r, alpha) in idx.subsets().iter().enumerate() {
        out[(r, r)] = alpha.iter().map(|&i| a[(i, i)]).sum();
        for (s, &removed) in alpha.iter().enumerate() {
            for j in (0..n).filter(|j| !alpha.contains(j)) {
                beta.clear();
                beta.extend(alpha.iter().copied().filter(|&i| i != removed));
                let t = beta.partition_point(|&i| i < j);
                beta.insert(t, j);
                let c = pos[beta.as_slice()];
                let sign = if (s + t) % 2 == 0 { 1.0 } else { -1.0 };
                out[(r, c)] = sign * a[(removed, j)];
            }
        }
    }
    Ok(out)
}

/// `V^(k) A^[k] W^(k)`, which equals `(V A W)^[k]` whenever `VW = I`.
pub fn transform_add_compound(v: &Matrix, a: &Matrix, w: &Matrix, k: usize) -> Result<Matrix> {
    ensure_square(a)?;
    let n = a.nrows();
    let m = v.nrows();
    if v.ncols() != n || w.nrows() != n || w.ncols() != m {
        return Err(Error::Dimension(format!(
            "expected V {m}x{n} and W {n}x{m}, got V {}x{} and W {}x{}",
            v.nrows(),
            v.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    let defect = max_abs(&(v * w - Matrix::identity(m, m)));
    if !(defect <= LEFT_INVERSE_TOL) {
        return Err(Error::Precondition(format!(
            "VW differs from the identity by {defect:.3e}"
        )));
    }
    if k == 0 || k > m {
        return Err(Error::InvalidOrder { n: m, k });
    }
    Ok(mult_compound(v, k)? * add_compound(a, k)? * mult_compound(w, k)?)
}
