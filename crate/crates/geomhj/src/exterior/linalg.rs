//! Small dense linear algebra over expressions and floats.

use crate::expr::{expand, Expr};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;

/// Largest dimension handled by symbolic cofactor expansion.
pub const SYMBOLIC_LIMIT: usize = 6;

pub type ExprMatrix = Vec<Vec<Expr>>;

fn minor_det(m: &ExprMatrix, row: usize, cols: u32, memo: &mut HashMap<(usize, u32), Expr>) -> Expr {
    let n = m.len();
    if row == n {
        return Expr::one();
    }
    if let Some(e) = memo.get(&(row, cols)) {
        return e.clone();
    }
    let mut terms = Vec::new();
    let mut sign = 1;
    for c in 0..n {
        if cols & (1 << c) != 0 {
            continue;
        }
        let a = &m[row][c];
        if !a.is_zero() {
            let sub = minor_det(m, row + 1, cols | (1 << c), memo);
            if !sub.is_zero() {
                terms.push(Expr::int(sign) * a * sub);
            }
        }
        sign = -sign;
    }
    let out = expand(&Expr::add_all(terms));
    memo.insert((row, cols), out.clone());
    out
}

/// Determinant by memoized Laplace expansion along rows.
pub fn det(m: &ExprMatrix) -> Expr {
    minor_det(m, 0, 0, &mut HashMap::new())
}

fn without(m: &ExprMatrix, r: usize, c: usize) -> ExprMatrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, e)| e.clone()).collect())
        .collect()
}

/// Symbolic inverse by adjugate, or `None` when the determinant is identically zero.
pub fn inverse(m: &ExprMatrix) -> Option<ExprMatrix> {
    let n = m.len();
    let d = det(m);
    if d.is_zero() {
        return None;
    }
    let inv_d = d.recip();
    let mut out = vec![vec![Expr::zero(); n]; n];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let cof = det(&without(m, j, i));
            if !cof.is_zero() {
                let s = if (i + j) % 2 == 0 { 1 } else { -1 };
                *slot = expand(&(Expr::int(s) * cof * &inv_d));
            }
        }
    }
    Some(out)
}

pub fn transpose(m: &ExprMatrix) -> ExprMatrix {
    let n = m.len();
    let k = m.first().map_or(0, Vec::len);
    (0..k).map(|j| (0..n).map(|i| m[i][j].clone()).collect()).collect()
}

pub fn mat_vec(m: &ExprMatrix, v: &[Expr]) -> Vec<Expr> {
    m.iter().map(|row| Expr::add_all(row.iter().zip(v).map(|(a, b)| a * b))).collect()
}

pub fn mat_mul(a: &ExprMatrix, b: &ExprMatrix) -> ExprMatrix {
    let bt = transpose(b);
    a.iter().map(|row| bt.iter().map(|col| Expr::add_all(row.iter().zip(col).map(|(x, y)| x * y))).collect()).collect()
}

pub fn to_numeric(m: &[Vec<f64>]) -> DMatrix<f64> {
    let n = m.len();
    let k = m.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, k, |i, j| m[i][j])
}

/// Solve `m x = b` numerically; `None` when singular.
pub fn solve_numeric(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let a = to_numeric(m);
    let lu = a.lu();
    lu.solve(&DVector::from_column_slice(b)).map(|x| x.iter().copied().collect())
}

/// Numerical rank with a relative singular-value threshold.
pub fn rank(rows: &[Vec<f64>], rel: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let svd = to_numeric(rows).svd(false, false);
    let s = svd.singular_values;
    let top = s.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|v| **v > rel * top).count()
}

pub fn det_numeric(m: &[Vec<f64>]) -> f64 {
    to_numeric(m).determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{canonical_eq, parse};

    fn p(s: &str) -> Expr {
        parse(s, &["x", "y"], &[] as &[&str]).unwrap()
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = vec![vec![p("1 + x^2"), p("y")], vec![p("-y"), p("x")]];
        let inv = inverse(&m).unwrap();
        let prod = mat_mul(&m, &inv);
        for i in 0..2 {
            for j in 0..2 {
                let want = Expr::int((i == j) as i64);
                assert_eq!(canonical_eq(&prod[i][j], &want), Some(true), "{}", prod[i][j]);
            }
        }
    }

    #[test]
    fn determinant_of_skew_three_is_zero() {
        let m = vec![
            vec![p("0"), p("x"), p("y")],
            vec![p("-x"), p("0"), p("1")],
            vec![p("-y"), p("-1"), p("0")],
        ];
        assert!(det(&m).is_zero());
        assert!(inverse(&m).is_none());
    }

    #[test]
    fn numeric_rank() {
        assert_eq!(rank(&[vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]], 1e-10), 1);
        assert_eq!(rank(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1e-10), 2);
    }
}
