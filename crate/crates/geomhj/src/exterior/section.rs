use super::{ExteriorError, KForm, VectorField};
use crate::expr::{Chart, Expr};
use std::collections::HashMap;

/// A section `φ` of the projection from a total chart onto a base chart whose
/// coordinates form a subset of the total coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionMap {
    base: Chart,
    total: Chart,
    images: Vec<Expr>,
}

impl SectionMap {
    /// `fibers` gives every total coordinate that is not a base coordinate as a
    /// function of the base coordinates.
    pub fn new(base: &Chart, total: &Chart, fibers: &[(&str, Expr)]) -> Result<SectionMap, ExteriorError> {
        for b in base.coords() {
            if total.index_of(b).is_none() {
                return Err(ExteriorError::Invalid(format!("base coordinate `{}` not in total chart", b)));
            }
        }
        for (name, _) in fibers {
            if total.index_of(name).is_none() || base.index_of(name).is_some() {
                return Err(ExteriorError::Invalid(format!("`{}` is not a fiber coordinate", name)));
            }
        }
        let mut images = Vec::with_capacity(total.dim());
        for x in total.coords() {
            if base.index_of(x).is_some() {
                images.push(Expr::sym(x));
            } else {
                let e = fibers
                    .iter()
                    .find(|(n, _)| n == x)
                    .map(|(_, e)| e.clone())
                    .ok_or_else(|| ExteriorError::Invalid(format!("missing fiber component `{}`", x)))?;
                for s in e.free_symbols() {
                    if total.index_of(&s).is_some() && base.index_of(&s).is_none() {
                        return Err(ExteriorError::Invalid(format!(
                            "fiber component `{}` depends on fiber coordinate `{}`",
                            x, s
                        )));
                    }
                }
                images.push(e);
            }
        }
        Ok(SectionMap { base: base.clone(), total: total.clone(), images })
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn total(&self) -> &Chart {
        &self.total
    }

    pub fn images(&self) -> &[Expr] {
        &self.images
    }

    pub fn image(&self, name: &str) -> Expr {
        self.total.index_of(name).map_or_else(Expr::zero, |i| self.images[i].clone())
    }

    pub fn map_images(&self, f: impl Fn(&Expr) -> Expr) -> SectionMap {
        SectionMap { base: self.base.clone(), total: self.total.clone(), images: self.images.iter().map(f).collect() }
    }

    /// Substitution taking total-chart expressions to their composition with `φ`.
    pub fn binding(&self) -> HashMap<String, Expr> {
        self.total
            .coords()
            .iter()
            .zip(&self.images)
            .filter(|(x, e)| e.as_sym() != Some(x.as_str()))
            .map(|(x, e)| (x.clone(), e.clone()))
            .collect()
    }

    /// `e ∘ φ`.
    pub fn compose(&self, e: &Expr) -> Expr {
        e.substitute(&self.binding())
    }

    /// Columns `∂φ/∂uᵃ` of the Jacobian, one per base coordinate.
    pub fn jacobian_columns(&self) -> Vec<Vec<Expr>> {
        self.base.coords().iter().map(|u| self.images.iter().map(|e| e.diff(u)).collect()).collect()
    }

    /// `φ*ω` as a form on the base chart.
    pub fn pullback(&self, w: &KForm) -> Result<KForm, ExteriorError> {
        super::same_chart(w.chart(), &self.total)?;
        let k = w.degree();
        let composed = w.substitute(&self.binding());
        let cols = self.jacobian_columns();
        let mut out = KForm::zero(&self.base, k);
        for idx in increasing(self.base.dim(), k) {
            let args: Vec<Vec<Expr>> = idx.iter().map(|&a| cols[a].clone()).collect();
            let c = composed.0.eval(&args);
            out.0.add_at(&idx, c);
        }
        Ok(out)
    }

    /// `Tφ(X)` for `X` on the base, as components along `φ`.
    pub fn pushforward(&self, x: &VectorField) -> Result<VectorField, ExteriorError> {
        super::same_chart(x.chart(), &self.base)?;
        let comps = self.images.iter().map(|e| x.apply(e)).collect();
        Ok(VectorField::new(&self.total, comps))
    }

    /// `X ∘ φ`, a vector along `φ`.
    pub fn along(&self, x: &VectorField) -> Result<VectorField, ExteriorError> {
        super::same_chart(x.chart(), &self.total)?;
        Ok(x.substitute(&self.binding()))
    }

    /// `X^φ = Tπ ∘ X ∘ φ` on the base.
    pub fn project(&self, x: &VectorField) -> Result<VectorField, ExteriorError> {
        let along = self.along(x)?;
        let comps = self.base.coords().iter().map(|b| along.along(b)).collect();
        Ok(VectorField::new(&self.base, comps))
    }

    /// `Tφ(X^φ) − X∘φ`.
    pub fn relatedness_gap(&self, x: &VectorField) -> Result<VectorField, ExteriorError> {
        let projected = self.project(x)?;
        Ok(self.pushforward(&projected)?.sub(&self.along(x)?))
    }
}

/// All strictly increasing `k`-tuples in `0..n`.
pub fn increasing(n: usize, k: usize) -> Vec<Vec<usize>> {
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

/// Coordinates `(q¹…qⁿ, p₁…pₙ, extras…)` on `T*Q` or an extension of it.
#[derive(Clone, Debug, PartialEq)]
pub struct CotangentLayout {
    pub q: Vec<String>,
    pub p: Vec<String>,
    pub extra: Vec<String>,
}

impl CotangentLayout {
    pub fn new<S: AsRef<str>>(q: &[S], p: &[S], extra: &[S]) -> Result<CotangentLayout, ExteriorError> {
        if q.is_empty() || q.len() != p.len() {
            return Err(ExteriorError::Invalid("need equally many positions and momenta".into()));
        }
        let own = |v: &[S]| v.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>();
        let l = CotangentLayout { q: own(q), p: own(p), extra: own(extra) };
        let mut all = l.chart().coords().to_vec();
        all.sort();
        all.dedup();
        if all.len() != l.chart().dim() {
            return Err(ExteriorError::Invalid("coordinate names must be unique".into()));
        }
        Ok(l)
    }

    /// `(q, p)` for one degree of freedom, `(q1…qn, p1…pn)` otherwise.
    pub fn standard(n: usize, extra: &[&str]) -> CotangentLayout {
        let (q, p): (Vec<String>, Vec<String>) = if n == 1 {
            (vec!["q".into()], vec!["p".into()])
        } else {
            ((1..=n).map(|i| format!("q{}", i)).collect(), (1..=n).map(|i| format!("p{}", i)).collect())
        };
        let extra: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
        CotangentLayout::new(&q, &p, &extra).expect("standard layout")
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    pub fn chart(&self) -> Chart {
        let all: Vec<&String> = self.q.iter().chain(&self.p).chain(&self.extra).collect();
        Chart::new(&all)
    }

    pub fn base(&self) -> Chart {
        Chart::new(&self.q)
    }

    /// Base chart with the extra coordinates appended, e.g. `Q × ℝ`.
    pub fn extended_base(&self) -> Chart {
        let all: Vec<&String> = self.q.iter().chain(&self.extra).collect();
        Chart::new(&all)
    }

    /// `Ω_Q = Σ dqⁱ∧dp_i`.
    pub fn omega(&self) -> KForm {
        let ch = self.chart();
        let n = self.dof();
        KForm::from_terms(&ch, 2, (0..n).map(|i| (vec![i, n + i], Expr::one())))
    }

    /// `Θ_Q = Σ p_i dqⁱ`.
    pub fn theta(&self) -> KForm {
        let ch = self.chart();
        KForm::from_terms(&ch, 1, self.p.iter().enumerate().map(|(i, p)| (vec![i], Expr::sym(p))))
    }

    /// Liouville field `Σ p_i ∂/∂p_i`.
    pub fn liouville(&self) -> VectorField {
        let ch = self.chart();
        let n = self.dof();
        let mut c = vec![Expr::zero(); ch.dim()];
        for i in 0..n {
            c[n + i] = Expr::sym(&self.p[i]);
        }
        VectorField::new(&ch, c)
    }

    /// `α^V = −α_i ∂/∂p_i` for a one-form given by components over `Q`.
    pub fn vertical_lift(&self, alpha: &[Expr]) -> VectorField {
        let ch = self.chart();
        let n = self.dof();
        let mut c = vec![Expr::zero(); ch.dim()];
        for i in 0..n {
            c[n + i] = -&alpha[i];
        }
        VectorField::new(&ch, c)
    }

    /// Pull a form on `Q` (components in the base order) back to the total chart.
    pub fn lift_one_form(&self, alpha: &[Expr]) -> KForm {
        let ch = self.chart();
        let mut c = vec![Expr::zero(); ch.dim()];
        c[..self.dof()].clone_from_slice(&alpha[..self.dof()]);
        KForm::one_form(&ch, c)
    }

    /// Whether a form on the total chart has no `dp` legs.
    pub fn is_semibasic(&self, w: &KForm) -> bool {
        let n = self.dof();
        w.terms().all(|(idx, _)| idx.iter().all(|&i| i < n || i >= 2 * n))
    }

    /// Section `q ↦ (q, γ(q))` of `T*Q`, extras given as further fiber images.
    pub fn section(&self, gamma: &[Expr], extra: &[(&str, Expr)]) -> Result<SectionMap, ExteriorError> {
        let mut fibers: Vec<(&str, Expr)> = self.p.iter().map(String::as_str).zip(gamma.iter().cloned()).collect();
        fibers.extend(extra.iter().cloned());
        SectionMap::new(&self.base(), &self.chart(), &fibers)
    }
}
