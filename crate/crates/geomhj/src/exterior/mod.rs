//! Coordinate exterior calculus on a chart.
//!
//! Forms and multivectors store components by strictly increasing index tuples;
//! insertion normalizes the order and applies the permutation sign.

pub mod linalg;
mod forms;
mod multivector;
mod section;
mod vector;

pub use forms::KForm;
pub use multivector::Multivector;
pub use section::{increasing, CotangentLayout, SectionMap};
pub use vector::VectorField;

use crate::expr::{check_zero, Chart, Expr, Point, Probe, Verdict};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExteriorError {
    #[error("chart mismatch: {0:?} vs {1:?}")]
    ChartMismatch(Vec<String>, Vec<String>),
    #[error("degree {degree} exceeds chart dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("degenerate two-form at {point}: determinant {det:e}")]
    Degenerate { point: String, det: f64 },
    #[error("{0}")]
    Invalid(String),
}

pub(crate) fn same_chart(a: &Chart, b: &Chart) -> Result<(), ExteriorError> {
    if a == b {
        Ok(())
    } else {
        Err(ExteriorError::ChartMismatch(a.coords().to_vec(), b.coords().to_vec()))
    }
}

/// Sort `idx`, returning the sign of the permutation, or `None` on a repeat.
pub(crate) fn normalize(idx: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// Sparse antisymmetric components shared by forms and multivectors.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Alt {
    pub chart: Chart,
    pub degree: usize,
    pub comps: BTreeMap<Vec<usize>, Expr>,
}

impl Alt {
    pub fn new(chart: Chart, degree: usize) -> Alt {
        Alt { chart, degree, comps: BTreeMap::new() }
    }

    pub fn add_at(&mut self, idx: &[usize], e: Expr) {
        debug_assert_eq!(idx.len(), self.degree);
        if e.is_zero() {
            return;
        }
        let Some((key, sign)) = normalize(idx) else { return };
        let e = if sign < 0 { -e } else { e };
        let slot = self.comps.entry(key.clone()).or_insert_with(Expr::zero);
        *slot = &*slot + e;
        if slot.is_zero() {
            self.comps.remove(&key);
        }
    }

    pub fn get(&self, idx: &[usize]) -> Expr {
        match normalize(idx) {
            None => Expr::zero(),
            Some((key, sign)) => match self.comps.get(&key) {
                None => Expr::zero(),
                Some(e) if sign < 0 => -e,
                Some(e) => e.clone(),
            },
        }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Alt {
        let mut out = Alt::new(self.chart.clone(), self.degree);
        for (k, e) in &self.comps {
            out.add_at(k, f(e));
        }
        out
    }

    pub fn combine(&self, o: &Alt, scale: i64) -> Alt {
        let mut out = self.clone();
        for (k, e) in &o.comps {
            out.add_at(k, Expr::int(scale) * e);
        }
        out
    }

    /// Component-wise zero test; the verdict is the weakest over components.
    pub fn check_zero(&self, probe: &Probe) -> (Verdict, Option<(Vec<usize>, Point, f64)>) {
        let mut v = Verdict::Pass;
        let mut witness = None;
        let mut worst = 0.0;
        for (k, e) in &self.comps {
            let r = check_zero(e, probe);
            v = v.and(r.verdict);
            if r.verdict == Verdict::Fail && (witness.is_none() || r.max_abs > worst) {
                worst = r.max_abs;
                witness = Some((k.clone(), r.witness.unwrap_or_default(), r.max_abs));
            }
        }
        (v, witness)
    }

    /// Evaluate against covector or vector arguments as a sum of determinants.
    pub fn eval(&self, args: &[Vec<Expr>]) -> Expr {
        assert_eq!(args.len(), self.degree);
        let mut terms = Vec::new();
        for (idx, c) in &self.comps {
            let m: Vec<Vec<Expr>> = args.iter().map(|a| idx.iter().map(|&i| a[i].clone()).collect()).collect();
            let d = linalg::det(&m);
            if !d.is_zero() {
                terms.push(c * d);
            }
        }
        Expr::add_all(terms)
    }

    pub fn wedge(&self, o: &Alt) -> Alt {
        let mut out = Alt::new(self.chart.clone(), self.degree + o.degree);
        for (a, x) in &self.comps {
            for (b, y) in &o.comps {
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                out.add_at(&idx, x * y);
            }
        }
        out
    }

    pub fn render(&self, unit: impl Fn(&str) -> String, join: &str) -> String {
        if self.comps.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (idx, e) in &self.comps {
            let basis: Vec<String> = idx.iter().map(|&i| unit(self.chart.name(i))).collect();
            let basis = basis.join(join);
            let coef = e.to_string();
            parts.push(if basis.is_empty() {
                coef
            } else if e.is_one() {
                basis
            } else if matches!(e.node(), crate::expr::Node::Add(_)) || coef.starts_with('-') {
                format!("({}) {}", coef, basis)
            } else {
                format!("{} {}", coef, basis)
            });
        }
        parts.join(" + ")
    }
}
