use super::linalg::{self, ExprMatrix, SYMBOLIC_LIMIT};
use super::{same_chart, Alt, ExteriorError, VectorField};
use crate::expr::{expand, Chart, EvalError, Expr, Params, Point, Probe, Verdict};
use std::collections::HashMap;
use std::fmt;

/// Differential k-form `Σ ω_I dx^I` over increasing index tuples `I`.
#[derive(Clone, Debug, PartialEq)]
pub struct KForm(pub(crate) Alt);

impl KForm {
    pub fn zero(chart: &Chart, degree: usize) -> KForm {
        KForm(Alt::new(chart.clone(), degree))
    }

    /// A function as a 0-form.
    pub fn function(chart: &Chart, f: Expr) -> KForm {
        let mut a = Alt::new(chart.clone(), 0);
        a.add_at(&[], f);
        KForm(a)
    }

    pub fn one_form(chart: &Chart, comps: Vec<Expr>) -> KForm {
        assert_eq!(comps.len(), chart.dim());
        let mut a = Alt::new(chart.clone(), 1);
        for (i, c) in comps.into_iter().enumerate() {
            a.add_at(&[i], c);
        }
        KForm(a)
    }

    /// `dxⁱ` for the named coordinate.
    pub fn coordinate(chart: &Chart, name: &str) -> KForm {
        let i = chart.index_of(name).unwrap_or_else(|| panic!("no coordinate `{}`", name));
        let mut a = Alt::new(chart.clone(), 1);
        a.add_at(&[i], Expr::one());
        KForm(a)
    }

    /// `df`.
    pub fn differential(chart: &Chart, f: &Expr) -> KForm {
        KForm::one_form(chart, chart.coords().iter().map(|x| f.diff(x)).collect())
    }

    /// Build from (index tuple, coefficient) pairs; tuples need not be sorted.
    pub fn from_terms(chart: &Chart, degree: usize, terms: impl IntoIterator<Item = (Vec<usize>, Expr)>) -> KForm {
        let mut a = Alt::new(chart.clone(), degree);
        for (idx, e) in terms {
            a.add_at(&idx, e);
        }
        KForm(a)
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

    /// Value of a 0-form.
    pub fn scalar(&self) -> Expr {
        assert_eq!(self.degree(), 0);
        self.0.get(&[])
    }

    /// Components of a 1-form in chart order.
    pub fn one_form_comps(&self) -> Vec<Expr> {
        assert_eq!(self.degree(), 1);
        (0..self.chart().dim()).map(|i| self.0.get(&[i])).collect()
    }

    /// Full antisymmetric matrix `M_ij = ω(∂i, ∂j)` of a 2-form.
    pub fn matrix(&self) -> ExprMatrix {
        assert_eq!(self.degree(), 2);
        let n = self.chart().dim();
        (0..n).map(|i| (0..n).map(|j| self.0.get(&[i, j])).collect()).collect()
    }

    pub fn add(&self, o: &KForm) -> KForm {
        assert_eq!(self.degree(), o.degree());
        KForm(self.0.combine(&o.0, 1))
    }

    pub fn sub(&self, o: &KForm) -> KForm {
        assert_eq!(self.degree(), o.degree());
        KForm(self.0.combine(&o.0, -1))
    }

    pub fn scale(&self, s: &Expr) -> KForm {
        KForm(self.0.map(|e| s * e))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> KForm {
        KForm(self.0.map(f))
    }

    pub fn expanded(&self) -> KForm {
        self.map(expand)
    }

    pub fn substitute(&self, b: &HashMap<String, Expr>) -> KForm {
        self.map(|e| e.substitute(b))
    }

    pub fn bind(&self, params: &Params) -> KForm {
        self.map(|e| e.bind(params))
    }

    pub fn wedge(&self, o: &KForm) -> Result<KForm, ExteriorError> {
        same_chart(self.chart(), o.chart())?;
        Ok(KForm(self.0.wedge(&o.0)))
    }

    /// Exterior derivative; a top-degree form maps to zero.
    pub fn d(&self) -> KForm {
        let mut out = Alt::new(self.chart().clone(), self.degree() + 1);
        for (idx, e) in &self.0.comps {
            for (j, x) in self.chart().coords().iter().enumerate() {
                if idx.contains(&j) {
                    continue;
                }
                let de = e.diff(x);
                if de.is_zero() {
                    continue;
                }
                let mut k = vec![j];
                k.extend_from_slice(idx);
                out.add_at(&k, de);
            }
        }
        KForm(out)
    }

    /// Lichnerowicz differential `d_θ ω = dω − θ∧ω`.
    pub fn d_theta(&self, theta: &KForm) -> Result<KForm, ExteriorError> {
        Ok(self.d().sub(&theta.wedge(self)?))
    }

    /// `ι_X ω`.
    pub fn interior(&self, x: &VectorField) -> Result<KForm, ExteriorError> {
        same_chart(self.chart(), x.chart())?;
        if self.degree() == 0 {
            return Err(ExteriorError::Invalid("interior product of a 0-form".into()));
        }
        let mut out = Alt::new(self.chart().clone(), self.degree() - 1);
        for (idx, e) in &self.0.comps {
            for (pos, &i) in idx.iter().enumerate() {
                let xi = x.comp(i);
                if xi.is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(pos);
                let sign = if pos % 2 == 0 { 1 } else { -1 };
                out.add_at(&rest, Expr::int(sign) * xi * e);
            }
        }
        Ok(KForm(out))
    }

    /// Cartan formula `L_X = ι_X d + d ι_X`.
    pub fn lie(&self, x: &VectorField) -> Result<KForm, ExteriorError> {
        if self.degree() == 0 {
            return Ok(KForm::function(self.chart(), x.apply(&self.scalar())));
        }
        let a = self.d().interior(x)?;
        let b = self.interior(x)?.d();
        Ok(a.add(&b))
    }

    /// `ω(X₁, …, X_k)`.
    pub fn eval(&self, xs: &[&VectorField]) -> Expr {
        let args: Vec<Vec<Expr>> = xs.iter().map(|x| x.comps().to_vec()).collect();
        self.0.eval(&args)
    }

    pub fn evaluate(&self, pt: &Point, params: &Params) -> Result<Vec<(Vec<usize>, f64)>, EvalError> {
        self.0.comps.iter().map(|(k, e)| Ok((k.clone(), e.evaluate(pt, params)?))).collect()
    }

    pub fn check_zero(&self, probe: &Probe) -> (Verdict, Option<(Vec<usize>, Point, f64)>) {
        self.0.check_zero(probe)
    }

    /// `♭(X) = ι_X Ω`.
    pub fn flat(&self, x: &VectorField) -> Result<KForm, ExteriorError> {
        assert_eq!(self.degree(), 2);
        self.interior(x)
    }

    /// `♯(α)`: the unique `X` with `ι_X Ω = α`, solved symbolically.
    pub fn sharp(&self, alpha: &KForm) -> Result<VectorField, ExteriorError> {
        let inv = self.sharp_matrix()?;
        let a = alpha.one_form_comps();
        Ok(VectorField::new(self.chart(), linalg::mat_vec(&inv, &a)))
    }

    /// Matrix `S` with `♯(α) = S α`, i.e. the inverse of `Mᵀ`.
    pub fn sharp_matrix(&self) -> Result<ExprMatrix, ExteriorError> {
        assert_eq!(self.degree(), 2);
        let n = self.chart().dim();
        if n > SYMBOLIC_LIMIT {
            return Err(ExteriorError::Invalid(format!(
                "symbolic inverse limited to dimension {}; use sharp_at",
                SYMBOLIC_LIMIT
            )));
        }
        let mt = linalg::transpose(&self.matrix());
        linalg::inverse(&mt).ok_or_else(|| {
            let pt = self.chart().point(&vec![0.0; n]);
            ExteriorError::Degenerate { point: pt.to_string(), det: 0.0 }
        })
    }

    /// Pointwise numeric `♯(α)`.
    pub fn sharp_at(&self, alpha: &KForm, pt: &Point, params: &Params) -> Result<Vec<f64>, ExteriorError> {
        let n = self.chart().dim();
        let num = |e: &Expr| e.evaluate(pt, params).map_err(|err| ExteriorError::Invalid(err.to_string()));
        let mut mt = vec![vec![0.0; n]; n];
        for (i, row) in mt.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = num(&self.0.get(&[j, i]))?;
            }
        }
        let b: Vec<f64> = alpha.one_form_comps().iter().map(num).collect::<Result<_, _>>()?;
        let det = linalg::det_numeric(&mt);
        let scale = mt.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        if det.abs() <= 1e-12 * scale.powi(n as i32) {
            return Err(ExteriorError::Degenerate { point: pt.to_string(), det });
        }
        linalg::solve_numeric(&mt, &b).ok_or(ExteriorError::Degenerate { point: pt.to_string(), det })
    }

    /// Symbolic determinant of the component matrix of a 2-form.
    pub fn determinant(&self) -> Expr {
        linalg::det(&self.matrix())
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.render(|x| format!("d{}", x), "∧"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn chart() -> Chart {
        Chart::new(&["q", "p", "z"])
    }

    fn e(s: &str) -> Expr {
        parse(s, &["q", "p", "z"], &[] as &[&str]).unwrap()
    }

    #[test]
    fn derivative_of_contact_form() {
        let ch = chart();
        let eta = KForm::one_form(&ch, vec![e("-p"), e("0"), e("1")]);
        let d = eta.d();
        assert_eq!(d, KForm::from_terms(&ch, 2, [(vec![0, 1], Expr::one())]));
        assert_eq!(d.to_string(), "dq∧dp");
        let dz = VectorField::basis(&ch, 2);
        assert!(eta.interior(&dz).unwrap().scalar().is_one());
        assert!(d.interior(&dz).unwrap().is_zero());
    }

    #[test]
    fn interior_sign() {
        let ch = Chart::new(&["q", "p"]);
        let w = KForm::from_terms(&ch, 2, [(vec![0, 1], Expr::one())]);
        let dq = VectorField::basis(&ch, 0);
        let dp = VectorField::basis(&ch, 1);
        assert_eq!(w.interior(&dq).unwrap(), KForm::coordinate(&ch, "p"));
        assert_eq!(w.interior(&dp).unwrap(), KForm::coordinate(&ch, "q").scale(&Expr::int(-1)));
    }

    #[test]
    fn sharp_inverts_flat() {
        let ch = Chart::new(&["q", "p"]);
        let w = KForm::from_terms(&ch, 2, [(vec![0, 1], e("1 + q^2"))]);
        let alpha = KForm::one_form(&ch, vec![e("p"), e("q*p")]);
        let x = w.sharp(&alpha).unwrap();
        let back = w.flat(&x).unwrap().sub(&alpha).expanded();
        assert!(back.is_zero(), "{}", back);
    }

    #[test]
    fn degenerate_sharp_is_an_error() {
        let ch = chart();
        let w = KForm::from_terms(&ch, 2, [(vec![0, 1], Expr::one())]);
        let alpha = KForm::coordinate(&ch, "z");
        assert!(matches!(w.sharp(&alpha), Err(ExteriorError::Degenerate { .. })));
        let pt = ch.point(&[0.1, 0.2, 0.3]);
        assert!(matches!(w.sharp_at(&alpha, &pt, &Params::new()), Err(ExteriorError::Degenerate { .. })));
    }
}
