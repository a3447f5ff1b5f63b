use super::linalg::ExprMatrix;
use super::{same_chart, Alt, ExteriorError, KForm, VectorField};
use crate::expr::{expand, Chart, Expr, Params, Point, Probe, Verdict};
use std::collections::HashMap;
use std::fmt;

/// Contravariant antisymmetric k-tensor `Σ A^I ∂_I` over increasing tuples `I`.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector(pub(crate) Alt);

impl Multivector {
    pub fn zero(chart: &Chart, degree: usize) -> Multivector {
        Multivector(Alt::new(chart.clone(), degree))
    }

    pub fn function(chart: &Chart, f: Expr) -> Multivector {
        let mut a = Alt::new(chart.clone(), 0);
        a.add_at(&[], f);
        Multivector(a)
    }

    pub fn vector(x: &VectorField) -> Multivector {
        let mut a = Alt::new(x.chart().clone(), 1);
        for (i, c) in x.comps().iter().enumerate() {
            a.add_at(&[i], c.clone());
        }
        Multivector(a)
    }

    pub fn from_terms(chart: &Chart, degree: usize, terms: impl IntoIterator<Item = (Vec<usize>, Expr)>) -> Multivector {
        let mut a = Alt::new(chart.clone(), degree);
        for (idx, e) in terms {
            a.add_at(&idx, e);
        }
        Multivector(a)
    }

    /// Bivector from the upper triangle of an antisymmetric matrix.
    pub fn bivector_from_matrix(chart: &Chart, m: &ExprMatrix) -> Multivector {
        let n = chart.dim();
        let mut a = Alt::new(chart.clone(), 2);
        for i in 0..n {
            for j in i + 1..n {
                a.add_at(&[i, j], m[i][j].clone());
            }
        }
        Multivector(a)
    }

    pub fn chart(&self) -> &Chart {
        &self.0.chart
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn get(&self, idx: &[usize]) -> Expr {
        self.0.get(idx)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.0.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.comps.is_empty()
    }

    pub fn to_vector_field(&self) -> VectorField {
        assert_eq!(self.degree(), 1);
        let n = self.chart().dim();
        VectorField::new(self.chart(), (0..n).map(|i| self.get(&[i])).collect())
    }

    /// Full antisymmetric matrix `Λ^{ij}` of a bivector.
    pub fn matrix(&self) -> ExprMatrix {
        assert_eq!(self.degree(), 2);
        let n = self.chart().dim();
        (0..n).map(|i| (0..n).map(|j| self.get(&[i, j])).collect()).collect()
    }

    pub fn add(&self, o: &Multivector) -> Multivector {
        Multivector(self.0.combine(&o.0, 1))
    }

    pub fn sub(&self, o: &Multivector) -> Multivector {
        Multivector(self.0.combine(&o.0, -1))
    }

    pub fn scale(&self, s: &Expr) -> Multivector {
        Multivector(self.0.map(|e| s * e))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Multivector {
        Multivector(self.0.map(f))
    }

    pub fn expanded(&self) -> Multivector {
        self.map(expand)
    }

    pub fn substitute(&self, b: &HashMap<String, Expr>) -> Multivector {
        self.map(|e| e.substitute(b))
    }

    pub fn bind(&self, params: &Params) -> Multivector {
        self.map(|e| e.bind(params))
    }

    pub fn wedge(&self, o: &Multivector) -> Result<Multivector, ExteriorError> {
        same_chart(self.chart(), o.chart())?;
        Ok(Multivector(self.0.wedge(&o.0)))
    }

    /// `A(α₁, …, α_k)` on one-forms.
    pub fn eval(&self, alphas: &[&KForm]) -> Expr {
        let args: Vec<Vec<Expr>> = alphas.iter().map(|a| a.one_form_comps()).collect();
        self.0.eval(&args)
    }

    /// `A(df₁, …, df_k)`.
    pub fn eval_functions(&self, fs: &[&Expr]) -> Expr {
        let args: Vec<Vec<Expr>> =
            fs.iter().map(|f| self.chart().coords().iter().map(|x| f.diff(x)).collect()).collect();
        self.0.eval(&args)
    }

    /// `♯_Λ(α)` with components `Λ^{ij} α_j`.
    pub fn sharp(&self, alpha: &KForm) -> VectorField {
        assert_eq!(self.degree(), 2);
        let a = alpha.one_form_comps();
        let n = self.chart().dim();
        let comps = (0..n)
            .map(|i| Expr::add_all((0..n).map(|j| self.get(&[i, j]) * &a[j])))
            .collect();
        VectorField::new(self.chart(), comps)
    }

    /// Right derivative by the odd generator paired with coordinate `l`.
    fn odd_derivative(&self, l: usize) -> Alt {
        let k = self.degree();
        let mut out = Alt::new(self.chart().clone(), k.saturating_sub(1));
        for (idx, e) in &self.0.comps {
            if let Some(r) = idx.iter().position(|&i| i == l) {
                let mut rest = idx.clone();
                rest.remove(r);
                let sign = if (k - 1 - r).is_multiple_of(2) { 1 } else { -1 };
                out.add_at(&rest, Expr::int(sign) * e);
            }
        }
        out
    }

    fn coordinate_derivative(&self, l: usize) -> Alt {
        let x = self.chart().name(l).to_string();
        self.0.map(|e| e.diff(&x))
    }

    /// Schouten–Nijenhuis bracket; for two vector fields this is the Lie bracket.
    pub fn schouten(&self, o: &Multivector) -> Result<Multivector, ExteriorError> {
        same_chart(self.chart(), o.chart())?;
        let (p, q) = (self.degree(), o.degree());
        let mut out = Alt::new(self.chart().clone(), (p + q).saturating_sub(1));
        if p == 0 && q == 0 {
            return Ok(Multivector(out));
        }
        let sign = if (p + 1) * (q + 1) % 2 == 0 { 1 } else { -1 };
        for l in 0..self.chart().dim() {
            if p > 0 {
                let a = self.odd_derivative(l).wedge(&o.coordinate_derivative(l));
                out = out.combine(&a, 1);
            }
            if q > 0 {
                let b = o.odd_derivative(l).wedge(&self.coordinate_derivative(l));
                out = out.combine(&b, -sign);
            }
        }
        Ok(Multivector(out))
    }

    /// `L_X A = [X, A]`.
    pub fn lie(&self, x: &VectorField) -> Result<Multivector, ExteriorError> {
        Multivector::vector(x).schouten(self)
    }

    pub fn check_zero(&self, probe: &Probe) -> (Verdict, Option<(Vec<usize>, Point, f64)>) {
        self.0.check_zero(probe)
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.render(|x| format!("∂{}", x), "∧"))
    }
}
