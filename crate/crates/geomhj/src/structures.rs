//! Geometric structures, their validation, and distinguished vector fields.

use crate::exterior::linalg::{self, ExprMatrix};
use crate::exterior::{CotangentLayout, ExteriorError, KForm, Multivector, VectorField};
use crate::expr::{check_zero, expand, Chart, Expr, Probe, Verdict};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StructureError {
    #[error("{kind} structure needs {parity} dimension, chart has {dim}")]
    Parity { kind: &'static str, parity: &'static str, dim: usize },
    #[error("operation needs a {wanted} structure, got {got}")]
    WrongKind { wanted: &'static str, got: &'static str },
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("{0}")]
    Invalid(String),
}

/// Dual of an almost Lie algebroid: coordinates `(qⁱ, p_α)` with structure
/// functions `c[γ][α][β] = C^γ_{αβ}` and anchor `rho[i][α] = ρⁱ_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearAlmostPoisson {
    pub base: Chart,
    pub fiber: Vec<String>,
    pub c: Vec<Vec<Vec<Expr>>>,
    pub rho: Vec<Vec<Expr>>,
}

impl LinearAlmostPoisson {
    pub fn rank(&self) -> usize {
        self.fiber.len()
    }

    pub fn chart(&self) -> Chart {
        let all: Vec<&String> = self.base.coords().iter().chain(&self.fiber).collect();
        Chart::new(&all)
    }

    /// `Λ = ρⁱ_α ∂qⁱ∧∂p_α − ½ C^γ_{αβ} p_γ ∂p_α∧∂p_β`.
    pub fn bivector(&self) -> Multivector {
        let ch = self.chart();
        let n = self.base.dim();
        let m = self.rank();
        let mut terms = Vec::new();
        for i in 0..n {
            for a in 0..m {
                terms.push((vec![i, n + a], self.rho[i][a].clone()));
            }
        }
        for a in 0..m {
            for b in a + 1..m {
                let s = Expr::add_all((0..m).map(|g| &self.c[g][a][b] * Expr::sym(&self.fiber[g])));
                terms.push((vec![n + a, n + b], -s));
            }
        }
        Multivector::from_terms(&ch, 2, terms)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Structure {
    Symplectic { omega: KForm },
    Poisson { lambda: Multivector },
    Cosymplectic { eta: KForm, omega: KForm },
    Contact { eta: KForm },
    Lcs { omega: KForm, theta: KForm },
    Jacobi { lambda: Multivector, z: VectorField },
    AlmostPoisson { lambda: Multivector },
    LinearAlmostPoisson(LinearAlmostPoisson),
}

impl Structure {
    pub fn kind(&self) -> &'static str {
        match self {
            Structure::Symplectic { .. } => "symplectic",
            Structure::Poisson { .. } => "poisson",
            Structure::Cosymplectic { .. } => "cosymplectic",
            Structure::Contact { .. } => "contact",
            Structure::Lcs { .. } => "lcs",
            Structure::Jacobi { .. } => "jacobi",
            Structure::AlmostPoisson { .. } => "almost-poisson",
            Structure::LinearAlmostPoisson(_) => "linear-almost-poisson",
        }
    }

    pub fn chart(&self) -> Chart {
        match self {
            Structure::Symplectic { omega } | Structure::Lcs { omega, .. } => omega.chart().clone(),
            Structure::Cosymplectic { eta, .. } | Structure::Contact { eta } => eta.chart().clone(),
            Structure::Poisson { lambda } | Structure::Jacobi { lambda, .. } | Structure::AlmostPoisson { lambda } => {
                lambda.chart().clone()
            }
            Structure::LinearAlmostPoisson(l) => l.chart(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    pub witness: Option<String>,
}

impl Check {
    pub fn new(name: &str, verdict: Verdict, witness: Option<String>) -> Check {
        Check { name: name.to_string(), verdict, witness }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail).collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn verdict(&self) -> Verdict {
        self.checks.iter().fold(Verdict::Pass, |v, c| v.and(c.verdict))
    }

    pub fn extend(&mut self, o: ValidationReport) {
        self.checks.extend(o.checks);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{:<28} {}", c.name, c.verdict)?;
            if let Some(w) = &c.witness {
                write!(f, "  [{}]", w)?;
            }
            writeln!(f)?;
        }
        write!(f, "overall: {}", self.verdict())
    }
}

fn probe_on(chart: &Chart, probe: &Probe) -> Probe {
    let mut p = probe.clone();
    p.chart = chart.clone();
    p
}

/// Component-wise vanishing of a form.
pub fn form_vanishes(name: &str, w: &KForm, probe: &Probe) -> Check {
    let (v, wit) = w.check_zero(&probe_on(w.chart(), probe));
    let witness = wit.map(|(idx, pt, val)| {
        let legs: Vec<String> = idx.iter().map(|&i| format!("d{}", w.chart().name(i))).collect();
        format!("{} component {} = {:e} at {}", legs.join("∧"), w.get(&idx), val, pt)
    });
    Check::new(name, v, witness)
}

pub fn multivector_vanishes(name: &str, a: &Multivector, probe: &Probe) -> Check {
    let (v, wit) = a.check_zero(&probe_on(a.chart(), probe));
    let witness = wit.map(|(idx, pt, val)| {
        let legs: Vec<String> = idx.iter().map(|&i| format!("∂{}", a.chart().name(i))).collect();
        format!("{} component {} = {:e} at {}", legs.join("∧"), a.get(&idx), val, pt)
    });
    Check::new(name, v, witness)
}

pub fn field_vanishes(name: &str, x: &VectorField, probe: &Probe) -> Check {
    let (v, wit) = x.check_zero(&probe_on(x.chart(), probe));
    let witness = wit.map(|(i, pt, val)| format!("∂/∂{} component = {:e} at {}", x.chart().name(i), val, pt));
    Check::new(name, v, witness)
}

pub fn scalar_vanishes(name: &str, e: &Expr, chart: &Chart, probe: &Probe) -> Check {
    let r = check_zero(e, &probe_on(chart, probe));
    let witness = (r.verdict == Verdict::Fail).then(|| match (&r.witness, &r.error) {
        (_, Some(err)) => err.to_string(),
        (Some(pt), None) => format!("{} = {:e} at {}", e, r.max_abs, pt),
        (None, None) => e.to_string(),
    });
    Check::new(name, r.verdict, witness)
}

/// Nonvanishing of a scalar: symbolic for nonzero constants, else at sample points
/// against `1e-12 · scale`.
pub fn nonvanishing(name: &str, e: &Expr, scale: f64, chart: &Chart, probe: &Probe) -> Check {
    let e = expand(e);
    if let Some(v) = e.as_f64() {
        let verdict = if v != 0.0 { Verdict::Pass } else { Verdict::Fail };
        return Check::new(name, verdict, (v == 0.0).then(|| "identically zero".to_string()));
    }
    let probe = probe_on(chart, probe);
    let pts = probe.sbox.points(chart.coords(), probe.count, probe.seed);
    for p in pts {
        match e.evaluate(&p, &probe.params) {
            Ok(v) if v.abs() > 1e-12 * scale => {}
            Ok(v) => return Check::new(name, Verdict::Fail, Some(format!("value {:e} at {}", v, p))),
            Err(err) => return Check::new(name, Verdict::Fail, Some(format!("{} at {}", err, p))),
        }
    }
    Check::new(name, Verdict::PointwisePass, None)
}

fn parity(kind: &'static str, dim: usize, even: bool) -> Result<(), StructureError> {
    if dim.is_multiple_of(2) == even {
        Ok(())
    } else {
        Err(StructureError::Parity { kind, parity: if even { "even" } else { "odd" }, dim })
    }
}

fn matrix_scale(m: &ExprMatrix, chart: &Chart, probe: &Probe) -> f64 {
    let pts = probe.sbox.points(chart.coords(), 1, probe.seed);
    let mut s: f64 = 1.0;
    for row in m {
        for e in row {
            if let Ok(v) = e.evaluate(&pts[0], &probe.params) {
                s = s.max(v.abs());
            }
        }
    }
    s
}

fn top_coefficient(w: &KForm) -> Expr {
    let n = w.chart().dim();
    w.get(&(0..n).collect::<Vec<_>>())
}

fn power(w: &KForm, k: usize) -> Result<KForm, ExteriorError> {
    let mut acc = KForm::function(w.chart(), Expr::one());
    for _ in 0..k {
        acc = acc.wedge(w)?;
    }
    Ok(acc)
}

/// Check every defining identity of `s`.
pub fn validate(s: &Structure, probe: &Probe) -> Result<ValidationReport, StructureError> {
    let ch = s.chart();
    let dim = ch.dim();
    let mut r = ValidationReport::default();
    match s {
        Structure::Symplectic { omega } => {
            parity("symplectic", dim, true)?;
            r.push(form_vanishes("closed (dΩ = 0)", &omega.d(), probe));
            let m = omega.matrix();
            let sc = matrix_scale(&m, &ch, probe).powi(dim as i32);
            r.push(nonvanishing("nondegenerate (det Ω ≠ 0)", &linalg::det(&m), sc, &ch, probe));
        }
        Structure::Poisson { lambda } => {
            r.push(multivector_vanishes("[Λ,Λ] = 0", &lambda.schouten(lambda)?, probe));
        }
        Structure::Cosymplectic { eta, omega } => {
            parity("cosymplectic", dim, false)?;
            r.push(form_vanishes("dη = 0", &eta.d(), probe));
            r.push(form_vanishes("dΩ = 0", &omega.d(), probe));
            let vol = eta.wedge(&power(omega, dim / 2)?)?;
            r.push(nonvanishing("η∧Ωⁿ ≠ 0", &top_coefficient(&vol), 1.0, &ch, probe));
        }
        Structure::Contact { eta } => {
            parity("contact", dim, false)?;
            let vol = eta.wedge(&power(&eta.d(), dim / 2)?)?;
            r.push(nonvanishing("η∧(dη)ⁿ ≠ 0", &top_coefficient(&vol), 1.0, &ch, probe));
        }
        Structure::Lcs { omega, theta } => {
            parity("lcs", dim, true)?;
            r.push(form_vanishes("dθ = 0", &theta.d(), probe));
            r.push(form_vanishes("d_θΩ = 0", &omega.d_theta(theta)?, probe));
            let m = omega.matrix();
            let sc = matrix_scale(&m, &ch, probe).powi(dim as i32);
            r.push(nonvanishing("nondegenerate (det Ω ≠ 0)", &linalg::det(&m), sc, &ch, probe));
        }
        Structure::Jacobi { lambda, z } => {
            let zl = Multivector::vector(z).wedge(lambda)?.scale(&Expr::int(2));
            r.push(multivector_vanishes("[Λ,Λ] = 2Z∧Λ", &lambda.schouten(lambda)?.sub(&zl), probe));
            r.push(multivector_vanishes("[Z,Λ] = 0", &Multivector::vector(z).schouten(lambda)?, probe));
        }
        Structure::AlmostPoisson { .. } => {
            r.push(Check::new("antisymmetry", Verdict::Pass, None));
        }
        Structure::LinearAlmostPoisson(l) => {
            let m = l.rank();
            let mut v = Verdict::Pass;
            let mut witness = None;
            for g in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        let e = &l.c[g][a][b] + &l.c[g][b][a];
                        let c = scalar_vanishes("", &e, &ch, probe);
                        if c.verdict == Verdict::Fail && witness.is_none() {
                            witness = Some(format!("C^{}_{{{}{}}} + C^{}_{{{}{}}} = {}", g, a, b, g, b, a, e));
                        }
                        v = v.and(c.verdict);
                    }
                }
            }
            r.push(Check::new("C antisymmetric", v, witness));
        }
    }
    Ok(r)
}

/// Matrix `N` inverting `X ↦ ι_XΩ + η(X)η`, so that `♯α = N α`.
pub fn flat_inverse(eta: &KForm, omega: &KForm) -> Result<ExprMatrix, StructureError> {
    let m = omega.matrix();
    let e = eta.one_form_comps();
    let n = m.len();
    let b: ExprMatrix = (0..n).map(|i| (0..n).map(|j| &m[j][i] + &e[i] * &e[j]).collect()).collect();
    linalg::inverse(&b).ok_or_else(|| {
        StructureError::Exterior(ExteriorError::Degenerate { point: "everywhere".into(), det: 0.0 })
    })
}

/// Reeb field: `ι_Rη = 1` and `ι_R dη = 0` (contact) or `ι_RΩ = 0` (cosymplectic).
pub fn reeb(s: &Structure) -> Result<VectorField, StructureError> {
    let (eta, omega) = match s {
        Structure::Contact { eta } => (eta, eta.d()),
        Structure::Cosymplectic { eta, omega } => (eta, omega.clone()),
        _ => return Err(StructureError::WrongKind { wanted: "contact or cosymplectic", got: s.kind() }),
    };
    let n = flat_inverse(eta, &omega)?;
    let comps = linalg::mat_vec(&n, &eta.one_form_comps()).iter().map(expand).collect();
    Ok(VectorField::new(eta.chart(), comps))
}

/// Back-substitution checks for a Reeb field.
pub fn reeb_checks(s: &Structure, r: &VectorField, probe: &Probe) -> Result<ValidationReport, StructureError> {
    let (eta, second, label) = match s {
        Structure::Contact { eta } => (eta, eta.d(), "ι_R dη = 0"),
        Structure::Cosymplectic { eta, omega } => (eta, omega.clone(), "ι_RΩ = 0"),
        _ => return Err(StructureError::WrongKind { wanted: "contact or cosymplectic", got: s.kind() }),
    };
    let mut rep = ValidationReport::default();
    let one = eta.interior(r)?.scalar() - Expr::one();
    rep.push(scalar_vanishes("ι_Rη = 1", &one, eta.chart(), probe));
    rep.push(form_vanishes(label, &second.interior(r)?, probe));
    Ok(rep)
}

/// Contact Hamiltonian field: `ι_Xη = −H`, `ι_X dη = dH − R(H)η`.
pub fn contact_field(eta: &KForm, h: &Expr) -> Result<VectorField, StructureError> {
    let ch = eta.chart();
    let deta = eta.d();
    let n = flat_inverse(eta, &deta)?;
    let r = VectorField::new(ch, linalg::mat_vec(&n, &eta.one_form_comps()));
    let rh = r.apply(h);
    let dh = KForm::differential(ch, h).one_form_comps();
    let e = eta.one_form_comps();
    let rhs: Vec<Expr> = dh.iter().zip(&e).map(|(a, b)| a - (&rh + h) * b).collect();
    Ok(VectorField::new(ch, linalg::mat_vec(&n, &rhs)))
}

/// Lee field `Z_θ` with `ι_{Z_θ}Ω = θ`, plus the checks `L_Zθ = 0`, `L_ZΩ = 0`.
pub fn lee_field(s: &Structure, probe: &Probe) -> Result<(VectorField, ValidationReport), StructureError> {
    let Structure::Lcs { omega, theta } = s else {
        return Err(StructureError::WrongKind { wanted: "lcs", got: s.kind() });
    };
    let z = omega.sharp(theta)?.expanded();
    let mut rep = ValidationReport::default();
    rep.push(form_vanishes("ι_ZΩ = θ", &omega.interior(&z)?.sub(theta), probe));
    rep.push(form_vanishes("L_Zθ = 0", &theta.lie(&z)?, probe));
    rep.push(form_vanishes("L_ZΩ = 0", &omega.lie(&z)?, probe));
    Ok((z, rep))
}

/// Canonical structures on cotangent bundles and their extensions.
#[derive(Clone, Debug, PartialEq)]
pub enum CanonicalKind {
    /// `Ω_Q` on `T*Q`.
    Symplectic,
    /// `η_Q = dz − p_i dqⁱ` on `T*Q × ℝ`.
    ContactExtended,
    /// `(dt, Ω_Q)` on `T*Q × ℝ`.
    CosymplecticTime,
    /// `(dt, Ω_H)` with `Ω_H = Ω_Q + dH∧dt`.
    CosymplecticH(Expr),
    /// `Ω_θ = Ω_Q + θ∧Θ_Q` for a closed `θ` on `Q` (components over `Q`).
    Lcs(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Canonical {
    pub layout: CotangentLayout,
    pub structure: Structure,
    /// Liouville form `Θ_Q`.
    pub theta_q: KForm,
    /// Liouville field `p_i ∂/∂p_i`.
    pub liouville: VectorField,
}

pub fn canonical(kind: CanonicalKind, layout: &CotangentLayout) -> Result<Canonical, StructureError> {
    let needs_extra = |name: &str, want: usize| {
        if layout.extra.len() == want {
            Ok(())
        } else {
            Err(StructureError::Invalid(format!(
                "{} needs {} extra coordinate(s), chart has dimension {}",
                name,
                want,
                2 * layout.dof() + layout.extra.len()
            )))
        }
    };
    let ch = layout.chart();
    let structure = match kind {
        CanonicalKind::Symplectic => {
            needs_extra("symplectic", 0)?;
            Structure::Symplectic { omega: layout.omega() }
        }
        CanonicalKind::ContactExtended => {
            needs_extra("contact", 1)?;
            let dz = KForm::coordinate(&ch, &layout.extra[0]);
            Structure::Contact { eta: dz.sub(&layout.theta()) }
        }
        CanonicalKind::CosymplecticTime => {
            needs_extra("cosymplectic", 1)?;
            Structure::Cosymplectic { eta: KForm::coordinate(&ch, &layout.extra[0]), omega: layout.omega() }
        }
        CanonicalKind::CosymplecticH(h) => {
            needs_extra("cosymplectic", 1)?;
            let dt = KForm::coordinate(&ch, &layout.extra[0]);
            let omega = layout.omega().add(&KForm::differential(&ch, &h).wedge(&dt)?);
            Structure::Cosymplectic { eta: dt, omega }
        }
        CanonicalKind::Lcs(theta) => {
            needs_extra("lcs", 0)?;
            if theta.len() != layout.dof() {
                return Err(StructureError::Invalid("θ needs one component per position".into()));
            }
            for t in &theta {
                for s in t.free_symbols() {
                    if layout.p.contains(&s) {
                        return Err(StructureError::Invalid("θ must be a form on Q".into()));
                    }
                }
            }
            let th = layout.lift_one_form(&theta);
            let omega = layout.omega().add(&th.wedge(&layout.theta())?);
            Structure::Lcs { omega, theta: th }
        }
    };
    Ok(Canonical { layout: layout.clone(), structure, theta_q: layout.theta(), liouville: layout.liouville() })
}

/// Jacobi pair of a contact form: `Λ(α,β) = dη(♯α, ♯β)` and `Z = −R`.
pub fn contact_to_jacobi(s: &Structure) -> Result<Structure, StructureError> {
    let Structure::Contact { eta } = s else {
        return Err(StructureError::WrongKind { wanted: "contact", got: s.kind() });
    };
    let deta = eta.d();
    let n = flat_inverse(eta, &deta)?;
    let lam = linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&n), &deta.matrix()), &n);
    let lam: ExprMatrix = lam.iter().map(|row| row.iter().map(expand).collect()).collect();
    let r = reeb(s)?;
    Ok(Structure::Jacobi {
        lambda: Multivector::bivector_from_matrix(eta.chart(), &lam),
        z: r.scale(&Expr::int(-1)),
    })
}

/// Check `♯_Λ(α) = ♯α − α(R)R` entrywise on the coordinate coframe.
pub fn contact_sharp_check(contact: &Structure, jacobi: &Structure, probe: &Probe) -> Result<Check, StructureError> {
    let (Structure::Contact { eta }, Structure::Jacobi { lambda, .. }) = (contact, jacobi) else {
        return Err(StructureError::WrongKind { wanted: "contact and jacobi", got: contact.kind() });
    };
    let n = flat_inverse(eta, &eta.d())?;
    let r = reeb(contact)?;
    let dim = eta.chart().dim();
    let mut v = Verdict::Pass;
    let mut witness = None;
    for i in 0..dim {
        for j in 0..dim {
            let e = lambda.get(&[i, j]) - (&n[i][j] - r.comp(i) * r.comp(j));
            let c = scalar_vanishes("", &e, eta.chart(), probe);
            if c.verdict == Verdict::Fail && witness.is_none() {
                witness = c.witness;
            }
            v = v.and(c.verdict);
        }
    }
    Ok(Check::new("♯_Λ(α) = ♯α − α(R)R", v, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::SampleBox;

    fn probe(ch: &Chart) -> Probe {
        Probe::new(ch.clone()).with_box(SampleBox::new())
    }

    #[test]
    fn contact_reeb_and_jacobi_pair() {
        let l = CotangentLayout::standard(1, &["z"]);
        let c = canonical(CanonicalKind::ContactExtended, &l).unwrap();
        let ch = l.chart();
        assert!(validate(&c.structure, &probe(&ch)).unwrap().passed());
        let r = reeb(&c.structure).unwrap();
        assert_eq!(r, VectorField::basis(&ch, 2));
        let j = contact_to_jacobi(&c.structure).unwrap();
        let Structure::Jacobi { lambda, z } = &j else { panic!() };
        let want = Multivector::from_terms(&ch, 2, [(vec![0, 1], Expr::one()), (vec![2, 1], Expr::sym("p"))]);
        assert_eq!(lambda, &want);
        assert_eq!(z, &r.scale(&Expr::int(-1)));
        assert!(validate(&j, &probe(&ch)).unwrap().passed());
        assert!(contact_sharp_check(&c.structure, &j, &probe(&ch)).unwrap().verdict.ok());
    }

    #[test]
    fn parity_is_enforced() {
        let l = CotangentLayout::standard(1, &[]);
        let eta = KForm::coordinate(&l.chart(), "q");
        let err = validate(&Structure::Contact { eta }, &probe(&l.chart())).unwrap_err();
        assert!(matches!(err, StructureError::Parity { .. }));
    }

    #[test]
    fn non_conformal_lcs_fails_with_witness() {
        let l = CotangentLayout::standard(2, &[]);
        let ch = l.chart();
        let theta = l.lift_one_form(&[Expr::sym("q1"), Expr::zero()]);
        let s = Structure::Lcs { omega: l.omega(), theta };
        let r = validate(&s, &probe(&ch)).unwrap();
        let f = r.failures();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].name, "d_θΩ = 0");
        assert!(f[0].witness.is_some());
    }

    #[test]
    fn cosymplectic_reeb_of_free_omega_h() {
        let l = CotangentLayout::standard(1, &["t"]);
        let c = canonical(CanonicalKind::CosymplecticH(Expr::sym("p")), &l).unwrap();
        let ch = l.chart();
        let r = reeb(&c.structure).unwrap();
        assert_eq!(r.comps(), &[Expr::one(), Expr::zero(), Expr::one()]);
        assert!(reeb_checks(&c.structure, &r, &probe(&ch)).unwrap().passed());
    }

    #[test]
    fn lee_field_of_gcs_form() {
        let l = CotangentLayout::standard(1, &[]);
        let c = canonical(CanonicalKind::Lcs(vec![Expr::one()]), &l).unwrap();
        let (z, _) = lee_field(&c.structure, &probe(&l.chart())).unwrap();
        assert_eq!(z.comps(), &[Expr::zero(), Expr::int(-1)]);

        let l = CotangentLayout::standard(2, &[]);
        let ch = l.chart();
        let c = canonical(CanonicalKind::Lcs(vec![Expr::one(), Expr::zero()]), &l).unwrap();
        assert!(validate(&c.structure, &probe(&ch)).unwrap().passed());
        let (z, rep) = lee_field(&c.structure, &probe(&ch)).unwrap();
        assert!(rep.passed(), "{}", rep);
        assert_eq!(z, VectorField::basis(&ch, 2).scale(&Expr::int(-1)));
    }
}
