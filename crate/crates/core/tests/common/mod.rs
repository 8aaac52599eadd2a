//! Reference implementations used as test oracles. They share no code with
//! the library: subsets are enumerated recursively, determinants use the
//! Leibniz expansion, and symmetric eigenvalues come from cyclic Jacobi.
#![allow(dead_code)]

use kcontract::matrix::{Matrix, Vector};
use nalgebra::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    if n == 0 {
        return vec![(Vec::new(), 1.0)];
    }
    let mut out = Vec::new();
    for (p, s) in permutations(n - 1) {
        // insert n-1 at every position; each shift right flips the sign
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            let sign = if (p.len() - pos) % 2 == 0 { s } else { -s };
            out.push((q, sign));
        }
    }
    out
}

pub fn leibniz_det(m: &Matrix) -> f64 {
    let n = m.nrows();
    permutations(n)
        .into_iter()
        .map(|(p, s)| s * (0..n).map(|i| m[(i, p[i])]).product::<f64>())
        .sum()
}

pub fn mult_compound(c: &Matrix, k: usize) -> Matrix {
    let rows = subsets(c.nrows(), k);
    let cols = subsets(c.ncols(), k);
    Matrix::from_fn(rows.len(), cols.len(), |i, j| {
        let sub = Matrix::from_fn(k, k, |a, b| c[(rows[i][a], cols[j][b])]);
        leibniz_det(&sub)
    })
}

/// `d/dε (I + εA)^(k)` at 0 by central difference; exact up to `O(ε²)`.
pub fn add_compound_fd(a: &Matrix, k: usize) -> Matrix {
    let eps = 1e-4;
    let n = a.nrows();
    let id = Matrix::identity(n, n);
    let plus = mult_compound(&(&id + a * eps), k);
    let minus = mult_compound(&(&id - a * eps), k);
    (plus - minus) / (2.0 * eps)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(s: &Matrix) -> Vec<f64> {
    let n = s.nrows();
    let mut a = s.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s_ = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s_ * akq;
                    a[(k, q)] = s_ * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s_ * aqk;
                    a[(q, k)] = s_ * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

pub fn measure_1(a: &Matrix) -> f64 {
    (0..a.ncols())
        .map(|j| {
            a[(j, j)]
                + (0..a.nrows())
                    .filter(|&i| i != j)
                    .map(|i| a[(i, j)].abs())
                    .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn measure_inf(a: &Matrix) -> f64 {
    measure_1(&a.transpose())
}

pub fn measure_2(a: &Matrix) -> f64 {
    jacobi_eigenvalues(&((a + a.transpose()) * 0.5))[0]
}

/// Greedy nearest matching of two complex multisets; returns the largest
/// matched distance (infinite on a length mismatch).
pub fn multiset_distance(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0_f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .expect("same length");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Products (`sum = false`) or sums of all k-subsets of `values`.
pub fn subset_combinations(values: &[Complex<f64>], k: usize, sum: bool) -> Vec<Complex<f64>> {
    subsets(values.len(), k)
        .into_iter()
        .map(|s| {
            if sum {
                s.iter().map(|&i| values[i]).sum()
            } else {
                s.iter().map(|&i| values[i]).product()
            }
        })
        .collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix_strategy(rows: usize, cols: usize, scale: f64) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-scale..scale, rows * cols)
        .prop_map(move |v| Matrix::from_row_slice(rows, cols, &v))
}

/// Square matrix with dimension in `dims`.
pub fn square_strategy(
    dims: std::ops::RangeInclusive<usize>,
    scale: f64,
) -> impl Strategy<Value = Matrix> {
    dims.prop_flat_map(move |n| matrix_strategy(n, n, scale))
}

pub fn vector_strategy(n: usize, scale: f64) -> impl Strategy<Value = Vector> {
    proptest::collection::vec(-scale..scale, n).prop_map(Vector::from_vec)
}
