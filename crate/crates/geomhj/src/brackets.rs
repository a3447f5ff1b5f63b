//! Brackets of functions realized from structures, and the identity audit that
//! classifies them.

use crate::exterior::linalg::{self, ExprMatrix};
use crate::exterior::{CotangentLayout, KForm, Multivector, VectorField};
use crate::expr::{check_zero, expand, Chart, Expr, Point, Probe, Verdict};
use crate::structures::{self, Check, Structure, StructureError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

type BinaryMap = Arc<dyn Fn(&Expr, &Expr) -> Expr + Send + Sync>;

#[derive(Clone)]
enum Imp {
    Bivector(Multivector),
    /// `{F,G} = Λ(dF,dG) + G·Z(F) − F·Z(G)`.
    Jacobi { lambda: Multivector, z: VectorField },
    /// `{F,G}^c = ι_{[X_F,X_G]}η` with the Jacobi pair kept for cross-checks.
    Contact { eta: KForm, n: ExprMatrix, reeb: VectorField, lambda: Multivector, z: VectorField },
    Evolution { q: Vec<String>, p: Vec<String>, s: String },
    Custom(BinaryMap),
}

/// A bilinear bracket of functions on a chart.
#[derive(Clone)]
pub struct Bracket {
    chart: Chart,
    kind: String,
    imp: Imp,
}

impl fmt::Debug for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bracket").field("chart", &self.chart).field("kind", &self.kind).finish()
    }
}

impl Bracket {
    pub fn from_bivector(kind: &str, lambda: Multivector) -> Bracket {
        Bracket { chart: lambda.chart().clone(), kind: kind.to_string(), imp: Imp::Bivector(lambda) }
    }

    pub fn from_jacobi_pair(kind: &str, lambda: Multivector, z: VectorField) -> Bracket {
        Bracket { chart: lambda.chart().clone(), kind: kind.to_string(), imp: Imp::Jacobi { lambda, z } }
    }

    /// Bracket given by an arbitrary binary map.
    pub fn custom(chart: &Chart, kind: &str, f: impl Fn(&Expr, &Expr) -> Expr + Send + Sync + 'static) -> Bracket {
        Bracket { chart: chart.clone(), kind: kind.to_string(), imp: Imp::Custom(Arc::new(f)) }
    }

    /// Evolution bracket on `T*Q × ℝ`:
    /// `{f,g} = f_{p_i} g_{q_i} − f_{q_i} g_{p_i} − f_z p_i g_{p_i} + g_z p_i f_{p_i}`.
    pub fn evolution(layout: &CotangentLayout) -> Result<Bracket, StructureError> {
        if layout.extra.len() != 1 {
            return Err(StructureError::Invalid("evolution bracket needs exactly one extra coordinate".into()));
        }
        Ok(Bracket {
            chart: layout.chart(),
            kind: "evolution".into(),
            imp: Imp::Evolution { q: layout.q.clone(), p: layout.p.clone(), s: layout.extra[0].clone() },
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    /// Bivector part, when the bracket has one.
    pub fn bivector(&self) -> Option<&Multivector> {
        match &self.imp {
            Imp::Bivector(l) | Imp::Jacobi { lambda: l, .. } | Imp::Contact { lambda: l, .. } => Some(l),
            _ => None,
        }
    }

    /// Vector field of a Jacobi pair, when the bracket has one.
    pub fn jacobi_field(&self) -> Option<&VectorField> {
        match &self.imp {
            Imp::Jacobi { z, .. } | Imp::Contact { z, .. } => Some(z),
            _ => None,
        }
    }

    /// `{f, g}`.
    pub fn apply(&self, f: &Expr, g: &Expr) -> Expr {
        let out = match &self.imp {
            Imp::Bivector(l) => l.eval_functions(&[f, g]),
            Imp::Jacobi { lambda, z } => jacobi_pair_bracket(lambda, z, f, g),
            Imp::Contact { eta, n, reeb, .. } => {
                let xf = contact_field_with(eta, n, reeb, f);
                let xg = contact_field_with(eta, n, reeb, g);
                let c = xf.lie_bracket(&xg).expect("same chart");
                eta.interior(&c).expect("one-form").scalar()
            }
            Imp::Evolution { q, p, s } => {
                let mut terms = Vec::new();
                for (qi, pi) in q.iter().zip(p) {
                    terms.push(f.diff(pi) * g.diff(qi));
                    terms.push(-(f.diff(qi) * g.diff(pi)));
                }
                let lf = Expr::add_all(p.iter().map(|pi| Expr::sym(pi) * f.diff(pi)));
                let lg = Expr::add_all(p.iter().map(|pi| Expr::sym(pi) * g.diff(pi)));
                terms.push(-(f.diff(s) * lg));
                terms.push(g.diff(s) * lf);
                Expr::add_all(terms)
            }
            Imp::Custom(m) => m(f, g),
        };
        expand(&out)
    }

    /// `{F,G}` through the Jacobi pair, for contact brackets the second realization.
    pub fn apply_jacobi_pair(&self, f: &Expr, g: &Expr) -> Option<Expr> {
        match &self.imp {
            Imp::Jacobi { lambda, z } | Imp::Contact { lambda, z, .. } => {
                Some(expand(&jacobi_pair_bracket(lambda, z, f, g)))
            }
            _ => None,
        }
    }
}

fn jacobi_pair_bracket(lambda: &Multivector, z: &VectorField, f: &Expr, g: &Expr) -> Expr {
    lambda.eval_functions(&[f, g]) + g * z.apply(f) - f * z.apply(g)
}

fn contact_field_with(eta: &KForm, n: &ExprMatrix, reeb: &VectorField, h: &Expr) -> VectorField {
    let ch = eta.chart();
    let rh = reeb.apply(h);
    let dh = KForm::differential(ch, h).one_form_comps();
    let rhs: Vec<Expr> = dh.iter().zip(eta.one_form_comps()).map(|(a, b)| a - (&rh + h) * b).collect();
    VectorField::new(ch, linalg::mat_vec(n, &rhs))
}

/// Bracket of functions determined by a structure.
pub fn bracket_of(s: &Structure) -> Result<Bracket, StructureError> {
    let ch = s.chart();
    Ok(match s {
        Structure::Symplectic { omega } => {
            let lam = Multivector::bivector_from_matrix(&ch, &expanded(&omega.sharp_matrix()?));
            Bracket::from_bivector("symplectic", lam)
        }
        Structure::Poisson { lambda } => Bracket::from_bivector("poisson", lambda.clone()),
        Structure::AlmostPoisson { lambda } => Bracket::from_bivector("almost-poisson", lambda.clone()),
        Structure::LinearAlmostPoisson(l) => Bracket::from_bivector("linear-almost-poisson", l.bivector()),
        Structure::Cosymplectic { eta, omega } => {
            let n = structures::flat_inverse(eta, omega)?;
            let lam = linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&n), &omega.matrix()), &n);
            Bracket::from_bivector("cosymplectic", Multivector::bivector_from_matrix(&ch, &expanded(&lam)))
        }
        Structure::Jacobi { lambda, z } => Bracket::from_jacobi_pair("jacobi", lambda.clone(), z.clone()),
        Structure::Lcs { omega, theta } => {
            let lam = Multivector::bivector_from_matrix(&ch, &expanded(&omega.sharp_matrix()?));
            let z = omega.sharp(theta)?.expanded().scale(&Expr::int(-1));
            Bracket::from_jacobi_pair("lcs", lam, z)
        }
        Structure::Contact { eta } => {
            let Structure::Jacobi { lambda, z } = structures::contact_to_jacobi(s)? else {
                unreachable!("contact_to_jacobi returns a Jacobi pair")
            };
            let n = structures::flat_inverse(eta, &eta.d())?;
            let reeb = structures::reeb(s)?;
            Bracket {
                chart: ch,
                kind: "contact".into(),
                imp: Imp::Contact { eta: eta.clone(), n, reeb, lambda, z },
            }
        }
    })
}

fn expanded(m: &ExprMatrix) -> ExprMatrix {
    m.iter().map(|r| r.iter().map(expand).collect()).collect()
}

/// `{F,{H,G}} + {H,{G,F}} + {G,{F,H}}`.
pub fn jacobiator(b: &Bracket, f: &Expr, h: &Expr, g: &Expr) -> Expr {
    expand(&Expr::add_all([
        b.apply(f, &b.apply(h, g)),
        b.apply(h, &b.apply(g, f)),
        b.apply(g, &b.apply(f, h)),
    ]))
}

/// `{F,GH} − G{F,H} − H{F,G}`.
pub fn leibniz_defect(b: &Bracket, f: &Expr, g: &Expr, h: &Expr) -> Expr {
    let gh = g * h;
    expand(&(b.apply(f, &gh) - g * b.apply(f, h) - h * b.apply(f, g)))
}

/// Random polynomial with four terms of total degree ≤ 3 and integer coefficients in `[−3, 3]`.
pub fn random_polynomial(chart: &Chart, rng: &mut impl Rng) -> Expr {
    let n = chart.dim();
    let mut terms = Vec::new();
    for _ in 0..4 {
        let mut c = 0;
        while c == 0 {
            c = rng.gen_range(-3..=3);
        }
        let deg = rng.gen_range(0..=3);
        let mut t = vec![Expr::int(c)];
        for _ in 0..deg {
            t.push(Expr::sym(chart.name(rng.gen_range(0..n))));
        }
        terms.push(Expr::mul_all(t));
    }
    expand(&Expr::add_all(terms))
}

/// Seeded random polynomial triples.
pub fn random_triples(chart: &Chart, count: usize, seed: u64) -> Vec<[Expr; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            [random_polynomial(chart, &mut rng), random_polynomial(chart, &mut rng), random_polynomial(chart, &mut rng)]
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Poisson,
    Jacobi,
    AlmostPoisson,
    LeibnizOnly,
    Unclassified,
}

impl Classification {
    /// Position in the hierarchy given which identities hold.
    pub fn from_identities(antisymmetry: bool, leibniz: bool, jacobi: bool) -> Classification {
        match (antisymmetry, leibniz, jacobi) {
            (true, true, true) => Classification::Poisson,
            (true, false, true) => Classification::Jacobi,
            (true, true, false) => Classification::AlmostPoisson,
            (false, true, _) => Classification::LeibnizOnly,
            _ => Classification::Unclassified,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Poisson => "Poisson",
            Classification::Jacobi => "Jacobi",
            Classification::AlmostPoisson => "almost-Poisson",
            Classification::LeibnizOnly => "Leibniz-only",
            Classification::Unclassified => "unclassified",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityAudit {
    pub structure: String,
    pub antisymmetry: Check,
    pub leibniz: Check,
    pub jacobi: Check,
    pub label: Classification,
}

impl IdentityAudit {
    pub fn header() -> String {
        format!("{:<24} {:<16} {:<16} {:<16} {}", "structure", "antisymmetry", "Leibniz", "Jacobi", "classification")
    }

    pub fn row(&self) -> String {
        format!(
            "{:<24} {:<16} {:<16} {:<16} {}",
            self.structure,
            mark(&self.antisymmetry),
            mark(&self.leibniz),
            mark(&self.jacobi),
            self.label
        )
    }
}

fn mark(c: &Check) -> String {
    if c.verdict.ok() {
        format!("✓ ({})", c.verdict)
    } else {
        "✗".to_string()
    }
}

impl fmt::Display for IdentityAudit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", IdentityAudit::header())?;
        write!(f, "{}", self.row())?;
        for c in [&self.antisymmetry, &self.leibniz, &self.jacobi] {
            if let Some(w) = &c.witness {
                write!(f, "\n  {} witness: {}", c.name, w)?;
            }
        }
        Ok(())
    }
}

fn run_identity(
    name: &str,
    triples: &[[Expr; 3]],
    probe: &Probe,
    identity: impl Fn(&Expr, &Expr, &Expr) -> Expr,
) -> Check {
    let mut v = Verdict::Pass;
    for [f, g, h] in triples {
        let e = identity(f, g, h);
        let r = check_zero(&e, probe);
        v = v.and(r.verdict);
        if r.verdict == Verdict::Fail {
            let at = r.witness.as_ref().map_or_else(String::new, |p: &Point| format!(" at {}", p));
            let w = format!("F = {}, G = {}, H = {}: residual {:e}{}", f, g, h, r.max_abs, at);
            return Check::new(name, Verdict::Fail, Some(w));
        }
    }
    Check::new(name, v, None)
}

/// Antisymmetry, Leibniz and Jacobi suites over `probe.count` seeded polynomial triples.
pub fn audit_bracket(b: &Bracket, probe: &Probe) -> IdentityAudit {
    let mut probe = probe.clone();
    probe.chart = b.chart().clone();
    let triples = random_triples(b.chart(), probe.count, probe.seed);
    let antisymmetry = run_identity("antisymmetry", &triples, &probe, |f, g, _| expand(&(b.apply(f, g) + b.apply(g, f))));
    let leibniz = run_identity("Leibniz", &triples, &probe, |f, g, h| leibniz_defect(b, f, g, h));
    let jacobi = run_identity("Jacobi", &triples, &probe, |f, g, h| jacobiator(b, f, g, h));
    let label = Classification::from_identities(antisymmetry.verdict.ok(), leibniz.verdict.ok(), jacobi.verdict.ok());
    IdentityAudit { structure: b.kind().to_string(), antisymmetry, leibniz, jacobi, label }
}

pub fn identity_audit(s: &Structure, probe: &Probe) -> Result<IdentityAudit, StructureError> {
    Ok(audit_bracket(&bracket_of(s)?, probe))
}

/// Agreement of the commutator and Jacobi-pair realizations of a contact bracket
/// on seeded polynomial pairs.
pub fn contact_realizations_check(b: &Bracket, probe: &Probe) -> Check {
    let name = "ι_{[X_F,X_H]}η = Jacobi-pair bracket";
    if !matches!(b.imp, Imp::Contact { .. }) {
        return Check::new(name, Verdict::Fail, Some(format!("{} bracket is not contact", b.kind())));
    }
    let mut probe = probe.clone();
    probe.chart = b.chart().clone();
    let triples = random_triples(b.chart(), probe.count, probe.seed ^ 0xc0);
    run_identity(name, &triples, &probe, |f, h, _| {
        expand(&(b.apply(f, h) - b.apply_jacobi_pair(f, h).expect("contact pair")))
    })
}
