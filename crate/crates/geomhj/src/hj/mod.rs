//! Hamilton–Jacobi residual evaluators and the γ-relatedness checker.
//!
//! Every evaluator returns an [`HJReport`] holding both sides of the
//! corresponding theorem: the residual of the Hamilton–Jacobi condition and the
//! relatedness defect `max |Tγ(X^γ) − X∘γ|` over seeded base points. The two
//! verdicts are computed independently so that their agreement can be tested.

mod complete;
pub mod oracle;

pub use complete::{complete_solution_check, CompleteReport};

use crate::dynamics::{self, DynamicsError, DynamicsSpec, Variant};
use crate::exterior::{CotangentLayout, ExteriorError, KForm, SectionMap, VectorField};
use crate::expr::{is_zero_symbolic, Chart, Expr, Point, Probe, Verdict};
use crate::nonholonomic::{bracket_generating, AlgebroidForm, AlmostLieAlgebroid, ConstrainedSystem, NonholonomicError};
use crate::structures::{self, canonical, form_vanishes, scalar_vanishes, CanonicalKind, Check, Structure, StructureError, ValidationReport};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Residual threshold relative to `1 + max |H∘γ|`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Absolute threshold on the relatedness defect.
pub const RELATEDNESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HjError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Nonholonomic(#[from] NonholonomicError),
    #[error("no sample point where the section evaluates ({0})")]
    Domain(String),
    #[error("β is not semibasic: {0}")]
    NotSemibasic(String),
    #[error("ϑ is not closed: {0}")]
    NotClosed(String),
    #[error("section does not take values in the constraint manifold: {0}")]
    OffConstraint(String),
    #[error("family Jacobian is singular: {0}")]
    Singular(String),
    #[error("{0}")]
    Invalid(String),
}

/// One residual condition with its sampled maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    /// ASCII key used in flat output.
    pub key: String,
    pub label: String,
    pub expr: Expr,
    pub max_abs: f64,
    /// Proved identically zero by canonicalization.
    pub symbolic_zero: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HJReport {
    pub evaluator: &'static str,
    pub preconditions: ValidationReport,
    pub residuals: Vec<Residual>,
    /// `1 + max |H∘γ|` over the sample points.
    pub scale: f64,
    /// `None` when no dynamics was available to compare against.
    pub relatedness: Option<f64>,
    pub samples: usize,
    pub tol: f64,
    pub relatedness_tol: f64,
    pub extras: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl HJReport {
    pub fn residual_max(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.max_abs))
    }

    pub fn residual(&self, key: &str) -> Option<&Residual> {
        self.residuals.iter().find(|r| r.key == key)
    }

    pub fn residual_ok(&self) -> bool {
        self.residual_max() <= self.tol * self.scale
    }

    pub fn related(&self) -> Option<bool> {
        self.relatedness.map(|d| d <= self.relatedness_tol)
    }

    /// Whether the residual verdict and the relatedness verdict agree.
    pub fn equivalence_holds(&self) -> Option<bool> {
        self.related().map(|r| r == self.residual_ok())
    }

    pub fn verdict(&self) -> Verdict {
        let pre = self.preconditions.verdict();
        if !self.residual_ok() {
            return Verdict::Fail;
        }
        if self.residuals.iter().all(|r| r.symbolic_zero) {
            pre
        } else {
            pre.and(Verdict::PointwisePass)
        }
    }

    pub fn with_tol(mut self, tol: f64) -> HJReport {
        self.tol = tol;
        self
    }

    pub fn with_relatedness_tol(mut self, tol: f64) -> HJReport {
        self.relatedness_tol = tol;
        self
    }

    /// One `key = value` line per check.
    pub fn to_flat(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{} = {}\n", k, v));
        line("evaluator", self.evaluator.to_string());
        for c in &self.preconditions.checks {
            line(&format!("precondition.{}", slug(&c.name)), c.verdict.to_string());
        }
        for r in &self.residuals {
            line(&format!("residual.{}.max_abs", r.key), format!("{:e}", r.max_abs));
            line(&format!("residual.{}.symbolic_zero", r.key), r.symbolic_zero.to_string());
        }
        line("residual.max_abs", format!("{:e}", self.residual_max()));
        line("residual.threshold", format!("{:e}", self.tol * self.scale));
        line("scale", format!("{:e}", self.scale));
        line("samples", self.samples.to_string());
        if let Some(d) = self.relatedness {
            line("relatedness.defect", format!("{:e}", d));
            line("relatedness.threshold", format!("{:e}", self.relatedness_tol));
            line("relatedness.related", (d <= self.relatedness_tol).to_string());
        }
        for (k, v) in &self.extras {
            line(&format!("extra.{}", k), format!("{:e}", v));
        }
        for (i, n) in self.notes.iter().enumerate() {
            line(&format!("note.{}", i), n.clone());
        }
        line("verdict", self.verdict().to_string());
        out
    }
}

impl fmt::Display for HJReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Hamilton–Jacobi report ({})", self.evaluator)?;
        for c in &self.preconditions.checks {
            write!(f, "  precondition {:<36} {}", c.name, c.verdict)?;
            if let Some(w) = &c.witness {
                write!(f, "  [{}]", w)?;
            }
            writeln!(f)?;
        }
        for r in &self.residuals {
            let how = if r.symbolic_zero { " (symbolic zero)" } else { "" };
            writeln!(f, "  residual {:<40} max {:.3e}{}", r.label, r.max_abs, how)?;
        }
        writeln!(f, "  threshold {:.3e} (scale {:.6})", self.tol * self.scale, self.scale)?;
        if let Some(d) = self.relatedness {
            writeln!(f, "  relatedness defect {:.3e} (threshold {:.0e})", d, self.relatedness_tol)?;
        }
        for (k, v) in &self.extras {
            writeln!(f, "  {} = {:.6e}", k, v)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {}", n)?;
        }
        write!(f, "  verdict: {}", self.verdict())
    }
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

/// Everything an evaluator collects before sampling.
struct Assembly {
    evaluator: &'static str,
    probe: Probe,
    pre: ValidationReport,
    residuals: Vec<(String, String, Expr)>,
    h_on: Expr,
    gap: Option<VectorField>,
    extra_exprs: Vec<(String, Expr)>,
    extras: BTreeMap<String, f64>,
    notes: Vec<String>,
}

impl Assembly {
    fn new(evaluator: &'static str, base: &Chart, probe: &Probe, h_on: Expr) -> Assembly {
        let mut p = probe.clone();
        p.chart = base.clone();
        Assembly {
            evaluator,
            probe: p,
            pre: ValidationReport::default(),
            residuals: Vec::new(),
            h_on,
            gap: None,
            extra_exprs: Vec::new(),
            extras: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn residual(&mut self, key: String, label: String, e: Expr) {
        self.residuals.push((key, label, e));
    }

    /// One residual per base coordinate.
    fn residual_form(&mut self, key: &str, label: &str, comps: Vec<Expr>, coords: &[String]) {
        for (c, e) in coords.iter().zip(comps) {
            self.residual(format!("{}.{}", key, c), format!("{} [d{}]", label, c), e);
        }
    }

    fn related_to(&mut self, x: &VectorField, section: &SectionMap) -> Result<(), HjError> {
        self.gap = Some(section.relatedness_gap(x)?);
        Ok(())
    }

    fn finish(self) -> Result<HJReport, HjError> {
        let params = &self.probe.params;
        let residuals: Vec<(String, String, Expr)> =
            self.residuals.into_iter().map(|(k, l, e)| (k, l, e.bind(params))).collect();
        let h_on = self.h_on.bind(params);
        let gap = self.gap.map(|g| g.bind(params));
        let extra_exprs: Vec<(String, Expr)> = self.extra_exprs.into_iter().map(|(k, e)| (k, e.bind(params))).collect();

        let mut all: Vec<&Expr> = residuals.iter().map(|r| &r.2).collect();
        all.push(&h_on);
        if let Some(g) = &gap {
            all.extend(g.comps());
        }
        let pts = self.probe.points_for(&all);
        if pts.is_empty() {
            let first = self.probe.sbox.points(self.probe.chart.coords(), 1, self.probe.seed);
            let why = first
                .first()
                .and_then(|p| all.iter().find_map(|e| e.evaluate(p, params).err().map(|err| format!("{} at {}", err, p))))
                .unwrap_or_else(|| "empty sample box".into());
            return Err(HjError::Domain(why));
        }
        let max_over = |e: &Expr| pts.iter().map(|p| e.evaluate(p, params).map_or(f64::NAN, f64::abs)).fold(0.0, f64::max);
        let scale = 1.0 + max_over(&h_on);
        let out: Vec<Residual> = residuals
            .into_iter()
            .map(|(key, label, e)| {
                let symbolic_zero = e.is_zero() || (e.size() < 4000 && is_zero_symbolic(&e) == Some(true));
                let max_abs = if symbolic_zero { 0.0 } else { max_over(&e) };
                Residual { key, label, expr: e, max_abs, symbolic_zero }
            })
            .collect();
        let relatedness = gap.map(|g| {
            pts.iter()
                .map(|p| g.evaluate(p, params).map_or(f64::NAN, |v| v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))))
                .fold(0.0, f64::max)
        });
        let mut extras = self.extras;
        for (k, e) in extra_exprs {
            extras.insert(k, max_over(&e));
        }
        Ok(HJReport {
            evaluator: self.evaluator,
            preconditions: self.pre,
            residuals: out,
            scale,
            relatedness,
            samples: pts.len(),
            tol: RESIDUAL_TOL,
            relatedness_tol: RELATEDNESS_TOL,
            extras,
            notes: self.notes,
        })
    }
}

/// `max |Tγ(X^γ) − X∘γ|` over `probe.count` seeded base points.
pub fn relatedness_defect(x: &VectorField, section: &SectionMap, probe: &Probe) -> Result<f64, HjError> {
    let gap = section.relatedness_gap(x)?.bind(&probe.params);
    let mut p = probe.clone();
    p.chart = section.base().clone();
    let comps: Vec<&Expr> = gap.comps().iter().collect();
    let pts = p.points_for(&comps);
    if pts.is_empty() {
        return Err(HjError::Domain(format!("relatedness gap {} does not evaluate on the box", gap.comps()[0])));
    }
    let mut worst: f64 = 0.0;
    for pt in &pts {
        let v = gap.evaluate(pt, &p.params).map_err(|e| HjError::Domain(format!("{} at {}", e, pt)))?;
        worst = v.iter().fold(worst, |m, x| m.max(x.abs()));
    }
    Ok(worst)
}

fn grad(e: &Expr, coords: &[String]) -> Vec<Expr> {
    coords.iter().map(|c| e.diff(c)).collect()
}

fn field_of(spec: &DynamicsSpec, probe: &Probe, a: &mut Assembly) -> Result<VectorField, HjError> {
    let f = dynamics::vector_field(spec, probe)?;
    if !f.checks.passed() {
        a.notes.push(format!("{} field failed a defining check: {}", spec.variant.name(), f.checks));
    }
    Ok(f.field)
}

fn closedness(name: &str, base: &Chart, comps: &[Expr], probe: &Probe) -> Check {
    form_vanishes(name, &KForm::one_form(base, comps.to_vec()).d(), probe)
}

fn dim_check(layout: &CotangentLayout, gamma: &[Expr], extras: usize) -> Result<(), HjError> {
    if gamma.len() != layout.dof() {
        return Err(HjError::Invalid(format!("section needs {} momentum components, got {}", layout.dof(), gamma.len())));
    }
    if layout.extra.len() != extras {
        return Err(HjError::Invalid(format!("layout needs {} extra coordinate(s)", extras)));
    }
    Ok(())
}

fn fibers<'a>(layout: &'a CotangentLayout, gamma: &[Expr]) -> Vec<(&'a str, Expr)> {
    layout.p.iter().map(String::as_str).zip(gamma.iter().cloned()).collect()
}

/// `d(H∘γ) = 0` for a one-form section `γ` of `T*Q`; optionally `H∘γ = E`.
pub fn hj_symplectic(layout: &CotangentLayout, h: &Expr, gamma: &[Expr], energy: Option<f64>, probe: &Probe) -> Result<HJReport, HjError> {
    dim_check(layout, gamma, 0)?;
    let base = layout.base();
    let section = layout.section(gamma, &[])?;
    let h_on = section.compose(h);
    let mut a = Assembly::new("symplectic", &base, probe, h_on.clone());
    a.pre.push(closedness("dγ = 0", &base, gamma, probe));
    a.residual_form("dHg", "d(H∘γ)", grad(&h_on, base.coords()), base.coords());
    if let Some(e) = energy {
        a.residual("energy".into(), "H∘γ − E".into(), &h_on - Expr::float(e));
    }
    let s = canonical(CanonicalKind::Symplectic, layout)?.structure;
    let x = field_of(&DynamicsSpec::hamiltonian(s, h.clone()), probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

/// Time-dependent problem on `ℝ × Q` with extended Hamiltonian `H + e`.
///
/// `gamma = [γ_t, γ_1, …, γ_n]` is a section over `(t, q)`; its `e`-component is
/// `γ_t`. The residual is the set of `dqⁱ` components of `d(H^e∘γ)`.
pub fn hj_tdep(layout: &CotangentLayout, time: &str, energy: &str, h: &Expr, gamma: &[Expr], probe: &Probe) -> Result<HJReport, HjError> {
    if !layout.extra.is_empty() || gamma.len() != layout.dof() + 1 {
        return Err(HjError::Invalid("time-dependent sections need [γ_t, γ_1…γ_n] over a plain cotangent layout".into()));
    }
    let q: Vec<&str> = std::iter::once(time).chain(layout.q.iter().map(String::as_str)).collect();
    let p: Vec<&str> = std::iter::once(energy).chain(layout.p.iter().map(String::as_str)).collect();
    let ext = CotangentLayout::new(&q, &p, &[])?;
    let he = h + Expr::sym(energy);
    let base = ext.base();
    let section = ext.section(gamma, &[])?;
    let he_on = section.compose(&he);
    let mut a = Assembly::new("time-dependent", &base, probe, section.compose(h));
    a.pre.push(closedness("dγ = 0", &base, gamma, probe));
    a.residual_form("dHeg", "d(H^e∘γ)", grad(&he_on, &layout.q), &layout.q);
    a.extra_exprs.push(("He_on_gamma".into(), he_on));
    let s = canonical(CanonicalKind::Symplectic, &ext)?.structure;
    let x = field_of(&DynamicsSpec::hamiltonian(s, he), probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

/// `d(H∘σ) + σ*β = 0` for the forced field `ι_XΩ_Q = dH + β`.
pub fn hj_forced(layout: &CotangentLayout, h: &Expr, beta: &KForm, sigma: &[Expr], probe: &Probe) -> Result<HJReport, HjError> {
    dim_check(layout, sigma, 0)?;
    if beta.chart() != &layout.chart() || beta.degree() != 1 {
        return Err(HjError::Invalid("β must be a one-form on the cotangent chart".into()));
    }
    if !layout.is_semibasic(beta) {
        return Err(HjError::NotSemibasic(beta.to_string()));
    }
    let base = layout.base();
    let section = layout.section(sigma, &[])?;
    let h_on = section.compose(h);
    let pulled = section.pullback(beta)?.one_form_comps();
    let mut a = Assembly::new("forced", &base, probe, h_on.clone());
    a.pre.push(closedness("dσ = 0", &base, sigma, probe));
    let comps: Vec<Expr> = grad(&h_on, base.coords()).into_iter().zip(pulled).map(|(d, b)| d + b).collect();
    a.residual_form("dHs_plus_beta", "d(H∘σ) + σ*β", comps, base.coords());
    let s = canonical(CanonicalKind::Symplectic, layout)?.structure;
    let spec = DynamicsSpec::new(s, h.clone(), Variant::Forced { beta: beta.clone(), layout: Some(layout.clone()) });
    let x = field_of(&spec, probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

/// `d(H∘γ) = c γ*Θ_Q` for the conformal field `X_H + cZ`.
pub fn hj_conformal(layout: &CotangentLayout, h: &Expr, c: &Expr, gamma: &[Expr], probe: &Probe) -> Result<HJReport, HjError> {
    dim_check(layout, gamma, 0)?;
    let base = layout.base();
    let section = layout.section(gamma, &[])?;
    let h_on = section.compose(h);
    let theta = layout.theta();
    let pulled = section.pullback(&theta)?.one_form_comps();
    let comps: Vec<Expr> = grad(&h_on, base.coords()).into_iter().zip(&pulled).map(|(d, t)| d - c * t).collect();

    let mut a = Assembly::new("conformal", &base, probe, h_on.clone());
    a.pre.push(closedness("dγ = 0", &base, gamma, probe));
    let forced_beta = theta.scale(&-c);
    let forced = section.pullback(&forced_beta)?.one_form_comps();
    let diff: Vec<Expr> = grad(&h_on, base.coords()).into_iter().zip(forced).zip(&comps).map(|((d, b), r)| d + b - r).collect();
    a.pre.push(form_vanishes("agrees with forced residual, β = −cΘ_Q", &KForm::one_form(&base, diff), &a.probe));
    a.residual_form("dHg_minus_cTheta", "d(H∘γ) − cγ*Θ_Q", comps, base.coords());
    let s = canonical(CanonicalKind::Symplectic, layout)?.structure;
    let spec = DynamicsSpec::new(s, h.clone(), Variant::Conformal { c: c.clone(), theta });
    let x = field_of(&spec, probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

/// Cosymplectic problem on `T*Q × ℝ_t` with structure `(dt, Ω_Q)` and the
/// evolution field `∂t + X_H`; `gamma` has components `γ_j(q, t)`.
///
/// Also records the residual with the `∂γ/∂t` term dropped as
/// `extra.stationary_residual`.
pub fn hj_cosymplectic(layout: &CotangentLayout, h: &Expr, gamma: &[Expr], probe: &Probe) -> Result<HJReport, HjError> {
    dim_check(layout, gamma, 1)?;
    let t = &layout.extra[0];
    let base_q = layout.base();
    let ext = layout.extended_base();
    let section = SectionMap::new(&ext, &layout.chart(), &fibers(layout, gamma))?;
    let h_on = section.compose(h);
    let mut a = Assembly::new("cosymplectic", &ext, probe, h_on.clone());
    a.pre.push(closedness("d_Qγ_t = 0", &base_q, gamma, probe));
    let hp: Vec<Expr> = layout.p.iter().map(|p| section.compose(&h.diff(p))).collect();
    let mut stationary = Vec::new();
    for (j, qj) in layout.q.iter().enumerate() {
        let transport = Expr::add_all(layout.q.iter().zip(&hp).map(|(qi, hpi)| hpi * gamma[j].diff(qi)));
        let st = transport + section.compose(&h.diff(qj));
        let full = gamma[j].diff(t) + &st;
        a.residual(format!("lc.{}", layout.p[j]), format!("∂tγ_{0} + H_p·∂γ_{0} + H_q{0}", j + 1), full);
        stationary.push(st);
    }
    for (j, st) in stationary.into_iter().enumerate() {
        a.extra_exprs.push((format!("stationary_residual.{}", layout.p[j]), st));
    }
    let s = canonical(CanonicalKind::CosymplecticTime, layout)?.structure;
    let x = field_of(&DynamicsSpec::new(s, h.clone(), Variant::Evolution), probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

/// LCS problem for `Ω_ϑ = Ω_Q + ϑ∧Θ_Q`: precondition `d_ϑγ = 0`, residual
/// `d_ϑ(H∘γ) = d(H∘γ) − (H∘γ)ϑ`.
pub fn hj_lcs(layout: &CotangentLayout, h: &Expr, vartheta: &[Expr], gamma: &[Expr], probe: &Probe) -> Result<HJReport, HjError> {
    dim_check(layout, gamma, 0)?;
    let base = layout.base();
    let mut bp = probe.clone();
    bp.chart = base.clone();
    let th = KForm::one_form(&base, vartheta.to_vec());
    let closed = form_vanishes("dϑ = 0", &th.d(), &bp);
    if closed.verdict == Verdict::Fail {
        return Err(HjError::NotClosed(closed.witness.unwrap_or_default()));
    }
    let section = layout.section(gamma, &[])?;
    let h_on = section.compose(h);
    let mut a = Assembly::new("lcs", &base, probe, h_on.clone());
    a.pre.push(closed);
    let g = KForm::one_form(&base, gamma.to_vec());
    a.pre.push(form_vanishes("d_ϑγ = 0", &g.d_theta(&th)?, &bp));
    let comps: Vec<Expr> = grad(&h_on, base.coords()).into_iter().zip(vartheta).map(|(d, t)| d - &h_on * t).collect();
    a.residual_form("dtheta_Hg", "d_ϑ(H∘γ)", comps, base.coords());
    let s = canonical(CanonicalKind::Lcs(vartheta.to_vec()), layout)?.structure;
    let x = field_of(&DynamicsSpec::hamiltonian(s, h.clone()), probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

/// Coisotropic-family precondition: `d_Qγ = 0` and `∂γ/∂z = σγ` with `σ`
/// fitted pointwise by least squares.
fn coisotropic_family(a: &mut Assembly, layout: &CotangentLayout, gamma: &[Expr], probe: &Probe) {
    let z = &layout.extra[0];
    a.pre.push(closedness("d_Qγ = 0", &layout.base(), gamma, probe));
    let dz: Vec<Expr> = gamma.iter().map(|g| g.diff(z)).collect();
    let gg = Expr::add_all(gamma.iter().map(|g| g * g));
    let gdz = Expr::add_all(gamma.iter().zip(&dz).map(|(g, d)| g * d));
    let sigma = gdz / gg;
    let misfit: Vec<Expr> = gamma.iter().zip(&dz).map(|(g, d)| d - &sigma * g).collect();
    let params = &a.probe.params;
    let refs: Vec<&Expr> = misfit.iter().collect();
    let pts = a.probe.points_for(&refs);
    let mut worst: (f64, Option<Point>) = (0.0, None);
    for p in &pts {
        for m in &misfit {
            let v = m.evaluate(p, params).map_or(f64::INFINITY, f64::abs);
            if v > worst.0 {
                worst = (v, Some(p.clone()));
            }
        }
    }
    let verdict = if pts.is_empty() || worst.0 > 1e-9 {
        Verdict::Fail
    } else if misfit.iter().all(|m| is_zero_symbolic(m) == Some(true)) {
        Verdict::Pass
    } else {
        Verdict::PointwisePass
    };
    let witness = (verdict == Verdict::Fail).then(|| match worst.1 {
        Some(p) => format!("least-squares misfit {:e} at {}", worst.0, p),
        None => "no sample points".into(),
    });
    a.pre.push(Check::new("L_∂zγ = σγ", verdict, witness));
}

fn contact_layout(layout: &CotangentLayout, gamma: &[Expr]) -> Result<(Structure, SectionMap), HjError> {
    dim_check(layout, gamma, 1)?;
    let s = canonical(CanonicalKind::ContactExtended, layout)?.structure;
    let section = SectionMap::new(&layout.extended_base(), &layout.chart(), &fibers(layout, gamma))?;
    Ok((s, section))
}

/// Approach I on `T*Q × ℝ_z` for the contact Hamiltonian field: sections
/// `γ_i(q, z)` over `Q × ℝ`.
pub fn hj_contact_i(layout: &CotangentLayout, h: &Expr, gamma: &[Expr], probe: &Probe) -> Result<HJReport, HjError> {
    let (s, section) = contact_layout(layout, gamma)?;
    let z = &layout.extra[0];
    let h_on = section.compose(h);
    let mut a = Assembly::new("contact-I", section.base(), probe, h_on.clone());
    coisotropic_family(&mut a, layout, gamma, probe);
    let c = |e: &Expr| section.compose(e);
    let hp: Vec<Expr> = layout.p.iter().map(|p| c(&h.diff(p))).collect();
    let gamma_o = c(&h.diff(z)) + Expr::add_all(hp.iter().zip(gamma).map(|(hpi, gi)| hpi * gi.diff(z)));
    for (j, qj) in layout.q.iter().enumerate() {
        let r = c(&h.diff(qj)) + Expr::add_all(hp.iter().zip(gamma).map(|(hpi, gi)| hpi * gi.diff(qj))) + &gamma[j] * &gamma_o
            - &h_on * gamma[j].diff(z);
        a.residual(format!("contact.{}", qj), format!("contact HJ [d{}]", qj), r);
    }
    let strong = &h_on - Expr::add_all(gamma.iter().zip(&hp).map(|(g, hpi)| g * hpi));
    a.extra_exprs.push(("strong_solution_gap".into(), strong));
    let x = field_of(&DynamicsSpec::hamiltonian(s, h.clone()), probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

/// Legendrian sections `q ↦ (q, γ_i(q), γ_z(q))`. `gamma` holds `γ_i`; `gz` is `γ_z`.
fn legendrian(layout: &CotangentLayout, gamma: &[Expr], gz: &Expr, probe: &Probe) -> Result<(SectionMap, Check), HjError> {
    dim_check(layout, gamma, 1)?;
    let mut fib = fibers(layout, gamma);
    fib.push((layout.extra[0].as_str(), gz.clone()));
    let section = SectionMap::new(&layout.base(), &layout.chart(), &fib)?;
    let base = layout.base();
    let mismatch: Vec<Expr> = gamma.iter().zip(&layout.q).map(|(g, q)| g - gz.diff(q)).collect();
    let check = form_vanishes("γ_i = ∂γ_z/∂qⁱ", &KForm::one_form(&base, mismatch), &{
        let mut p = probe.clone();
        p.chart = base;
        p
    });
    Ok((section, check))
}

/// Approach II: Legendrian section with residual `H∘γ − k`.
pub fn hj_contact_ii(layout: &CotangentLayout, h: &Expr, gamma: &[Expr], gz: &Expr, k: Option<f64>, probe: &Probe) -> Result<HJReport, HjError> {
    let (section, legendre) = legendrian(layout, gamma, gz, probe)?;
    let s = canonical(CanonicalKind::ContactExtended, layout)?.structure;
    let h_on = section.compose(h);
    let mut a = Assembly::new("contact-II", section.base(), probe, h_on.clone());
    a.pre.push(legendre);
    let kv = k.unwrap_or(0.0);
    a.residual("H_on_gamma_minus_k".into(), "H∘γ − k".into(), &h_on - Expr::float(kv));
    if k.is_some() {
        a.extra_exprs.push(("H_on_gamma".into(), h_on.clone()));
        if kv != 0.0 {
            a.notes.push("relatedness of X_H with a Legendrian section requires H∘γ = 0, since η(X_H) = −H".into());
        }
    }
    let x = field_of(&DynamicsSpec::hamiltonian(s, h.clone()), probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

/// Approach I for the evolution field: `d_Q(H∘γ) + γ_o γ*Θ_Q = 0`.
pub fn hj_evolution_i(layout: &CotangentLayout, h: &Expr, gamma: &[Expr], probe: &Probe) -> Result<HJReport, HjError> {
    let (s, section) = contact_layout(layout, gamma)?;
    let z = &layout.extra[0];
    let h_on = section.compose(h);
    let mut a = Assembly::new("evolution-I", section.base(), probe, h_on.clone());
    coisotropic_family(&mut a, layout, gamma, probe);
    let hp: Vec<Expr> = layout.p.iter().map(|p| section.compose(&h.diff(p))).collect();
    let gamma_o = section.compose(&h.diff(z)) + Expr::add_all(hp.iter().zip(gamma).map(|(hpi, gi)| hpi * gi.diff(z)));
    let comps: Vec<Expr> = layout.q.iter().zip(gamma).map(|(q, g)| h_on.diff(q) + &gamma_o * g).collect();
    a.residual_form("evolution", "d_Q(H∘γ) + γ_oγ*Θ_Q", comps, &layout.q);
    let x = field_of(&DynamicsSpec::new(s, h.clone(), Variant::Evolution), probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

/// Approach II for the evolution field with `γ = j¹f`: `d(H∘j¹f) = 0`.
pub fn hj_evolution_ii(layout: &CotangentLayout, h: &Expr, f: &Expr, probe: &Probe) -> Result<HJReport, HjError> {
    let gamma: Vec<Expr> = layout.q.iter().map(|q| f.diff(q)).collect();
    let (section, legendre) = legendrian(layout, &gamma, f, probe)?;
    let s = canonical(CanonicalKind::ContactExtended, layout)?.structure;
    let h_on = section.compose(h);
    let base = layout.base();
    let mut a = Assembly::new("evolution-II", &base, probe, h_on.clone());
    a.pre.push(legendre);
    a.residual_form("dHj1f", "d(H∘j¹f)", grad(&h_on, base.coords()), base.coords());
    let x = field_of(&DynamicsSpec::new(s, h.clone(), Variant::Evolution), probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NhMode {
    /// `d(H∘σ)` annihilates the constraint distribution.
    Ideal,
    /// `d(H∘σ) = 0`, valid for bracket-generating distributions.
    Complete,
}

/// Nonholonomic problem for a section `σ` of `T*Q` into `M = {Ψ = 0}`.
pub fn hj_nonholonomic(sys: &ConstrainedSystem, sigma: &[Expr], mode: NhMode, probe: &Probe) -> Result<HJReport, HjError> {
    let layout = sys.layout();
    dim_check(layout, sigma, 0)?;
    let base = layout.base();
    let mut bp = probe.clone();
    bp.chart = base.clone();
    let section = layout.section(sigma, &[])?;
    let cs = &sys.constraints;
    for (a, psi) in cs.momentum_constraints(&sys.hamiltonian).iter().enumerate() {
        let c = scalar_vanishes(&format!("Ψ{}∘σ = 0", a + 1), &section.compose(psi), &base, &bp);
        if c.verdict == Verdict::Fail {
            return Err(HjError::OffConstraint(c.witness.unwrap_or_default()));
        }
    }
    let h_on = section.compose(&sys.hamiltonian);
    let mut a = Assembly::new(
        match mode {
            NhMode::Ideal => "nonholonomic",
            NhMode::Complete => "nonholonomic-complete",
        },
        &base,
        probe,
        h_on.clone(),
    );
    a.pre.push(Check::new("σ(Q) ⊆ M", Verdict::Pass, None));
    let dist = cs.distribution()?;
    let dsigma = KForm::one_form(&base, sigma.to_vec()).d();
    for i in 0..dist.len() {
        for j in i + 1..dist.len() {
            let v = dsigma.eval(&[&dist[i], &dist[j]]);
            a.pre.push(scalar_vanishes(&format!("dσ(X{}, X{}) = 0", i + 1, j + 1), &v, &base, &bp));
        }
    }
    match mode {
        NhMode::Ideal => {
            for (i, x) in dist.iter().enumerate() {
                a.residual(format!("ideal.X{}", i + 1), format!("⟨d(H∘σ), X{}⟩", i + 1), x.apply(&h_on));
            }
        }
        NhMode::Complete => {
            a.residual_form("dHs", "d(H∘σ)", grad(&h_on, base.coords()), base.coords());
            let g = bracket_generating(&dist, &bp, layout.dof())?;
            a.extras.insert("bracket_generating".into(), if g.generating { 1.0 } else { 0.0 });
            if !g.generating {
                a.notes.push(format!(
                    "distribution is not bracket generating (rank {} at {}); d(H∘σ) = 0 is then only sufficient",
                    g.min_rank,
                    g.witness.map(|p| p.to_string()).unwrap_or_default()
                ));
            }
        }
    }
    let x = sys.projected_field();
    a.related_to(&x, &section)?;
    a.finish()
}

/// Algebroid formulation on `D*` with fiber coordinates `fiber`: precondition
/// `d^Dψ = 0`, residual `d^D(h∘ψ)`, relatedness against the linear
/// almost-Poisson Hamiltonian field of `h`.
pub fn hj_algebroid(alg: &AlmostLieAlgebroid, fiber: &[&str], h: &Expr, psi: &[Expr], probe: &Probe) -> Result<HJReport, HjError> {
    if psi.len() != alg.rank() {
        return Err(HjError::Invalid(format!("ψ needs {} components", alg.rank())));
    }
    let lap = alg.dual(fiber)?;
    let base = alg.base.clone();
    let total = lap.chart();
    let fib: Vec<(&str, Expr)> = fiber.iter().copied().zip(psi.iter().cloned()).collect();
    let section = SectionMap::new(&base, &total, &fib)?;
    let h_on = section.compose(h);
    let mut a = Assembly::new("algebroid", &base, probe, h_on.clone());
    let dpsi = alg.almost_differential(&AlgebroidForm::one_form(psi.to_vec()))?;
    let mut bp = probe.clone();
    bp.chart = base.clone();
    let mut closed = Check::new("d^Dψ = 0", Verdict::Pass, None);
    for (idx, e) in dpsi.terms() {
        let c = structures::scalar_vanishes("d^Dψ = 0", e, &base, &bp);
        if c.verdict != Verdict::Pass && closed.verdict != Verdict::Fail {
            closed.verdict = c.verdict;
            closed.witness = c.witness.map(|w| format!("component {:?}: {}", idx, w));
        }
    }
    a.pre.push(closed);
    let dh = alg.almost_differential(&AlgebroidForm::function(alg.rank(), h_on.clone()))?;
    for i in 0..alg.rank() {
        a.residual(format!("dD_hpsi.{}", i + 1), format!("d^D(h∘ψ) [X^{}]", i + 1), dh.get(&[i]));
    }
    let x = field_of(&DynamicsSpec::hamiltonian(Structure::LinearAlmostPoisson(lap), h.clone()), probe, &mut a)?;
    a.related_to(&x, &section)?;
    a.finish()
}

#[cfg(test)]
mod tests;
