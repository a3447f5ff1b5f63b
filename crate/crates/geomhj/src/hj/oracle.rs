//! Numeric reference solutions: fixed-step RK4 for ODE systems and Chebyshev
//! interpolants that turn sampled solutions into polynomial sections.

use crate::expr::Expr;

/// States of `y' = f(x, y)` at each of the ascending `nodes`, starting from
/// `y(x0) = y0` with steps no longer than `dt`.
pub fn rk4_at(f: impl Fn(f64, &[f64]) -> Vec<f64>, x0: f64, y0: &[f64], nodes: &[f64], dt: f64) -> Vec<Vec<f64>> {
    let mut x = x0;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(nodes.len());
    for &target in nodes {
        let span = target - x;
        let n = (span.abs() / dt).ceil().max(1.0) as usize;
        let h = span / n as f64;
        for _ in 0..n {
            y = rk4_step(&f, x, &y, h);
            x += h;
        }
        x = target;
        out.push(y.clone());
    }
    out
}

fn rk4_step(f: &impl Fn(f64, &[f64]) -> Vec<f64>, x: f64, y: &[f64], h: f64) -> Vec<f64> {
    let shift = |k: &[f64], s: f64| y.iter().zip(k).map(|(a, b)| a + s * b).collect::<Vec<_>>();
    let k1 = f(x, y);
    let k2 = f(x + h / 2.0, &shift(&k1, h / 2.0));
    let k3 = f(x + h / 2.0, &shift(&k2, h / 2.0));
    let k4 = f(x + h, &shift(&k3, h));
    (0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Chebyshev interpolant of a function on `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevFit {
    pub a: f64,
    pub b: f64,
    /// Coefficients of `T_k(t)`, `t = (2x − a − b)/(b − a)`.
    pub coeffs: Vec<f64>,
}

impl ChebyshevFit {
    /// Gauss–Chebyshev nodes of a degree-`degree` interpolant, ascending in `x`.
    pub fn nodes(a: f64, b: f64, degree: usize) -> Vec<f64> {
        let n = degree + 1;
        let mut xs: Vec<f64> = (0..n)
            .map(|k| {
                let t = (std::f64::consts::PI * (k as f64 + 0.5) / n as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * t
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        xs
    }

    /// Interpolant through values at [`ChebyshevFit::nodes`] (same order).
    pub fn from_values(a: f64, b: f64, values: &[f64]) -> ChebyshevFit {
        let n = values.len();
        let nodes = Self::nodes(a, b, n - 1);
        let ts: Vec<f64> = nodes.iter().map(|x| (2.0 * x - a - b) / (b - a)).collect();
        let coeffs = (0..n)
            .map(|j| {
                let s: f64 = ts.iter().zip(values).map(|(t, v)| v * (j as f64 * t.acos()).cos()).sum();
                s * if j == 0 { 1.0 } else { 2.0 } / n as f64
            })
            .collect();
        ChebyshevFit { a, b, coeffs }
    }

    pub fn fit(f: impl Fn(f64) -> f64, a: f64, b: f64, degree: usize) -> ChebyshevFit {
        let vals: Vec<f64> = Self::nodes(a, b, degree).into_iter().map(f).collect();
        Self::from_values(a, b, &vals)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    /// Magnitude of the last two coefficients, a truncation estimate.
    pub fn tail(&self) -> f64 {
        self.coeffs.iter().rev().take(2).map(|c| c.abs()).sum()
    }

    /// Coefficients in the monomial basis of `t`.
    pub fn monomial(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        let mut prev = vec![0.0; n];
        let mut cur = vec![0.0; n];
        prev[0] = 1.0;
        if n > 1 {
            cur[1] = 1.0;
        }
        for (k, &c) in self.coeffs.iter().enumerate() {
            let tk = match k {
                0 => prev.clone(),
                1 => cur.clone(),
                _ => {
                    let mut next = vec![0.0; n];
                    for i in 0..n - 1 {
                        next[i + 1] += 2.0 * cur[i];
                    }
                    for i in 0..n {
                        next[i] -= prev[i];
                    }
                    prev = std::mem::replace(&mut cur, next);
                    cur.clone()
                }
            };
            for i in 0..n {
                out[i] += c * tk[i];
            }
        }
        out
    }

    /// The interpolant as a Horner-form expression in the symbol `var`.
    pub fn to_expr(&self, var: &str) -> Expr {
        let t = (Expr::float(2.0) * Expr::sym(var) - Expr::float(self.a + self.b)) / Expr::float(self.b - self.a);
        let mono = self.monomial();
        let mut acc = Expr::float(*mono.last().expect("nonempty fit"));
        for &c in mono.iter().rev().skip(1) {
            acc = Expr::float(c) + &t * acc;
        }
        acc
    }
}

/// Degree-adaptive fit: the smallest degree in `[8, max_degree]` (step 4) whose
/// tail falls below `tol`, else `max_degree`.
pub fn adaptive_fit(f: impl Fn(&[f64]) -> Vec<f64>, a: f64, b: f64, max_degree: usize, tol: f64) -> ChebyshevFit {
    let mut degree = 8;
    loop {
        let nodes = ChebyshevFit::nodes(a, b, degree);
        let fit = ChebyshevFit::from_values(a, b, &f(&nodes));
        if fit.tail() < tol || degree >= max_degree {
            return fit;
        }
        degree = (degree + 4).min(max_degree);
    }
}
