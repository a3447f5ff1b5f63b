use super::{same_chart, ExteriorError, KForm};
use crate::expr::{check_zero, expand, Chart, EvalError, Expr, Params, Point, Probe, Verdict};
use std::collections::HashMap;
use std::fmt;

/// `X = Xⁱ ∂/∂xⁱ` with one component per chart coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Chart,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: &Chart, comps: Vec<Expr>) -> VectorField {
        assert_eq!(comps.len(), chart.dim(), "component count must match chart dimension");
        VectorField { chart: chart.clone(), comps }
    }

    pub fn zero(chart: &Chart) -> VectorField {
        VectorField::new(chart, vec![Expr::zero(); chart.dim()])
    }

    /// Coordinate field `∂/∂xⁱ`.
    pub fn basis(chart: &Chart, i: usize) -> VectorField {
        let mut v = VectorField::zero(chart);
        v.comps[i] = Expr::one();
        v
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn comp(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    /// Component along the named coordinate.
    pub fn along(&self, name: &str) -> Expr {
        self.chart.index_of(name).map_or_else(Expr::zero, |i| self.comps[i].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        Expr::add_all(
            self.comps
                .iter()
                .zip(self.chart.coords())
                .filter(|(c, _)| !c.is_zero())
                .map(|(c, x)| c * f.diff(x)),
        )
    }

    pub fn lie_bracket(&self, o: &VectorField) -> Result<VectorField, ExteriorError> {
        same_chart(&self.chart, &o.chart)?;
        let comps = (0..self.chart.dim()).map(|i| self.apply(&o.comps[i]) - o.apply(&self.comps[i])).collect();
        Ok(VectorField::new(&self.chart, comps))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> VectorField {
        VectorField::new(&self.chart, self.comps.iter().map(f).collect())
    }

    pub fn scale(&self, s: &Expr) -> VectorField {
        self.map(|c| s * c)
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        assert_eq!(self.chart, o.chart);
        VectorField::new(&self.chart, self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &VectorField) -> VectorField {
        assert_eq!(self.chart, o.chart);
        VectorField::new(&self.chart, self.comps.iter().zip(&o.comps).map(|(a, b)| a - b).collect())
    }

    pub fn expanded(&self) -> VectorField {
        self.map(expand)
    }

    pub fn substitute(&self, b: &HashMap<String, Expr>) -> VectorField {
        self.map(|c| c.substitute(b))
    }

    pub fn bind(&self, params: &Params) -> VectorField {
        self.map(|c| c.bind(params))
    }

    /// The one-form with the same components.
    pub fn to_one_form(&self) -> KForm {
        KForm::one_form(&self.chart, self.comps.clone())
    }

    pub fn evaluate(&self, pt: &Point, params: &Params) -> Result<Vec<f64>, EvalError> {
        self.comps.iter().map(|c| c.evaluate(pt, params)).collect()
    }

    /// Component-wise zero test.
    pub fn check_zero(&self, probe: &Probe) -> (Verdict, Option<(usize, Point, f64)>) {
        let mut v = Verdict::Pass;
        let mut witness = None;
        for (i, c) in self.comps.iter().enumerate() {
            let r = check_zero(c, probe);
            v = v.and(r.verdict);
            if r.verdict == Verdict::Fail && witness.is_none() {
                witness = Some((i, r.witness.unwrap_or_default(), r.max_abs));
            }
        }
        (v, witness)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, x) in self.comps.iter().zip(self.chart.coords()) {
            if c.is_zero() {
                continue;
            }
            let s = c.to_string();
            parts.push(if c.is_one() {
                format!("∂/∂{}", x)
            } else if matches!(c.node(), crate::expr::Node::Add(_)) || s.starts_with('-') {
                format!("({}) ∂/∂{}", s, x)
            } else {
                format!("{} ∂/∂{}", s, x)
            });
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}
