//! Linear velocity constraints on cotangent bundles, the projector onto the
//! constraint manifold, the nonholonomic bracket, bracket generation, and the
//! almost differential of an almost Lie algebroid.

use crate::brackets::Bracket;
use crate::exterior::linalg::{self, ExprMatrix};
use crate::exterior::{increasing, CotangentLayout, ExteriorError, KForm, VectorField};
use crate::expr::{expand, is_zero_symbolic, Chart, Compiled, Expr, Params, Point, Probe, Verdict};
use crate::structures::{Check, LinearAlmostPoisson, ValidationReport};
use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NonholonomicError {
    #[error("compatibility matrix is singular ({witness})")]
    Singular { witness: String },
    #[error("constraint forms are dependent at {point}")]
    Dependent { point: String },
    #[error("basis mismatch: {0}")]
    Basis(String),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("{0}")]
    Invalid(String),
}

/// Constraints `ψᵃ_i(q) q̇ⁱ = 0` on `Q`, seen from `T*Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    layout: CotangentLayout,
    psi: Vec<Vec<Expr>>,
}

impl ConstraintSet {
    /// `psi[a][i] = ψᵃ_i`, each depending on positions only.
    pub fn new(layout: &CotangentLayout, psi: Vec<Vec<Expr>>) -> Result<ConstraintSet, NonholonomicError> {
        let n = layout.dof();
        if psi.len() >= n {
            return Err(NonholonomicError::Invalid(format!("{} constraints on {} degrees of freedom", psi.len(), n)));
        }
        if !layout.extra.is_empty() {
            return Err(NonholonomicError::Invalid("constraints live on a plain cotangent chart".into()));
        }
        for row in &psi {
            if row.len() != n {
                return Err(NonholonomicError::Invalid("each constraint needs one component per position".into()));
            }
            for e in row {
                if let Some(s) = e.free_symbols().into_iter().find(|s| layout.p.contains(s)) {
                    return Err(NonholonomicError::Invalid(format!("constraint depends on momentum `{}`", s)));
                }
            }
        }
        Ok(ConstraintSet { layout: layout.clone(), psi })
    }

    pub fn layout(&self) -> &CotangentLayout {
        &self.layout
    }

    pub fn count(&self) -> usize {
        self.psi.len()
    }

    pub fn components(&self) -> &[Vec<Expr>] {
        &self.psi
    }

    /// `ψ̄ᵃ` on `Q`.
    pub fn base_forms(&self) -> Vec<KForm> {
        let ch = self.layout.base();
        self.psi.iter().map(|r| KForm::one_form(&ch, r.clone())).collect()
    }

    /// Generators `σᵃ` of `F⁰`, lifted to `T*Q`.
    pub fn codistribution(&self) -> Vec<KForm> {
        self.psi.iter().map(|r| self.layout.lift_one_form(r)).collect()
    }

    /// `Ψᵃ = ψᵃ_i ∂H/∂p_i`.
    pub fn momentum_constraints(&self, h: &Expr) -> Vec<Expr> {
        self.psi
            .iter()
            .map(|r| expand(&Expr::add_all(r.iter().zip(&self.layout.p).map(|(c, p)| c * h.diff(p)))))
            .collect()
    }

    /// `Zᵃ = ψᵃ_i ∂/∂p_i`.
    pub fn orthogonal_fields(&self) -> Vec<VectorField> {
        let ch = self.layout.chart();
        let n = self.layout.dof();
        self.psi
            .iter()
            .map(|r| {
                let mut c = vec![Expr::zero(); 2 * n];
                c[n..].clone_from_slice(r);
                VectorField::new(&ch, c)
            })
            .collect()
    }

    /// Pointwise independence of the constraint forms.
    pub fn independence(&self, probe: &Probe) -> Check {
        let base = self.layout.base();
        let pts = probe.sbox.points(base.coords(), probe.count, probe.seed);
        for p in &pts {
            let rows: Result<Vec<Vec<f64>>, _> =
                self.psi.iter().map(|r| r.iter().map(|e| e.evaluate(p, &probe.params)).collect()).collect();
            match rows {
                Ok(rows) if linalg::rank(&rows, 1e-10) == self.count() => {}
                Ok(_) => return Check::new("ψ independent", Verdict::Fail, Some(format!("rank drops at {}", p))),
                Err(e) => return Check::new("ψ independent", Verdict::Fail, Some(format!("{} at {}", e, p))),
            }
        }
        Check::new("ψ independent", Verdict::PointwisePass, None)
    }

    /// Generators of the distribution `N = ker ψ` on `Q`, from symbolic
    /// elimination on a pivot set whose minor is a nonzero constant when possible.
    pub fn distribution(&self) -> Result<Vec<VectorField>, NonholonomicError> {
        let n = self.layout.dof();
        let k = self.count();
        let base = self.layout.base();
        if k == 0 {
            return Ok((0..n).map(|i| VectorField::basis(&base, i)).collect());
        }
        let mut subsets = increasing(n, k);
        subsets.reverse();
        let minor = |cols: &[usize]| -> ExprMatrix {
            self.psi.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect()
        };
        let pick = subsets
            .iter()
            .find(|s| linalg::det(&minor(s)).as_f64().is_some_and(|d| d != 0.0))
            .or_else(|| subsets.iter().find(|s| !linalg::det(&minor(s)).is_zero()))
            .ok_or_else(|| NonholonomicError::Dependent { point: "everywhere".into() })?;
        let inv = linalg::inverse(&minor(pick)).expect("nonzero minor");
        let mut out = Vec::new();
        for f in (0..n).filter(|i| !pick.contains(i)) {
            let col: Vec<Expr> = self.psi.iter().map(|r| r[f].clone()).collect();
            let solved = linalg::mat_vec(&inv, &col);
            let mut c = vec![Expr::zero(); n];
            c[f] = Expr::one();
            for (slot, v) in pick.iter().zip(solved) {
                c[*slot] = expand(&-v);
            }
            out.push(VectorField::new(&base, c));
        }
        Ok(out)
    }
}

fn omega_pair(layout: &CotangentLayout, x: &VectorField, y: &VectorField) -> Expr {
    let n = layout.dof();
    Expr::add_all((0..n).map(|i| x.comp(i) * y.comp(n + i) - x.comp(n + i) * y.comp(i)))
}

/// `X_F` for the canonical symplectic form: `ι_{X_F}Ω_Q = dF`.
fn canonical_field(layout: &CotangentLayout, f: &Expr) -> VectorField {
    let ch = layout.chart();
    let mut c: Vec<Expr> = layout.p.iter().map(|p| f.diff(p)).collect();
    c.extend(layout.q.iter().map(|q| -f.diff(q)));
    VectorField::new(&ch, c)
}

fn canonical_bracket(layout: &CotangentLayout, f: &Expr, g: &Expr) -> Expr {
    Expr::add_all(layout.q.iter().zip(&layout.p).map(|(q, p)| f.diff(q) * g.diff(p) - f.diff(p) * g.diff(q)))
}

/// A constrained Hamiltonian system `(Ω_Q, H, ψ)` with invertible compatibility matrix.
#[derive(Clone, Debug)]
pub struct ConstrainedSystem {
    pub constraints: ConstraintSet,
    pub hamiltonian: Expr,
    /// `Ψᵃ`.
    pub psi: Vec<Expr>,
    /// `Zᵃ`.
    pub z: Vec<VectorField>,
    /// `C^{ab} = Zᵃ(Ψᵇ)`.
    pub c: ExprMatrix,
    /// `C_{ab}`.
    pub c_inv: ExprMatrix,
}

/// `C^{ab} = Zᵃ(Ψᵇ)`, with the invertibility check on the sample box.
pub fn compatibility_matrix(cs: &ConstraintSet, h: &Expr, probe: &Probe) -> Result<ExprMatrix, NonholonomicError> {
    let psi = cs.momentum_constraints(h);
    let z = cs.orthogonal_fields();
    let c: ExprMatrix = z.iter().map(|za| psi.iter().map(|pb| expand(&za.apply(pb))).collect()).collect();
    if c.is_empty() {
        return Ok(c);
    }
    let d = linalg::det(&c);
    if d.is_zero() || is_zero_symbolic(&d) == Some(true) {
        return Err(NonholonomicError::Singular { witness: "determinant vanishes identically".into() });
    }
    let ch = cs.layout.chart();
    for p in probe.sbox.points(ch.coords(), probe.count, probe.seed) {
        match d.evaluate(&p, &probe.params) {
            Ok(v) if v.abs() > 1e-12 => {}
            Ok(v) => return Err(NonholonomicError::Singular { witness: format!("det = {:e} at {}", v, p) }),
            Err(e) => return Err(NonholonomicError::Singular { witness: format!("{} at {}", e, p) }),
        }
    }
    Ok(c)
}

impl ConstrainedSystem {
    pub fn new(cs: &ConstraintSet, h: &Expr, probe: &Probe) -> Result<ConstrainedSystem, NonholonomicError> {
        let c = compatibility_matrix(cs, h, probe)?;
        let c_inv = if c.is_empty() { Vec::new() } else { linalg::inverse(&c).expect("checked determinant") };
        Ok(ConstrainedSystem {
            constraints: cs.clone(),
            hamiltonian: h.clone(),
            psi: cs.momentum_constraints(h),
            z: cs.orthogonal_fields(),
            c,
            c_inv,
        })
    }

    pub fn layout(&self) -> &CotangentLayout {
        &self.constraints.layout
    }

    pub fn chart(&self) -> Chart {
        self.layout().chart()
    }

    /// Multipliers `C_{ab} X(Ψᵇ)`.
    fn multipliers(&self, x: &VectorField) -> Vec<Expr> {
        let xs: Vec<Expr> = self.psi.iter().map(|p| x.apply(p)).collect();
        linalg::mat_vec(&self.c_inv, &xs)
    }

    /// `P(X) = X − C_{ab} X(Ψᵇ) Zᵃ`.
    pub fn project(&self, x: &VectorField) -> VectorField {
        let mut out = x.clone();
        for (mu, za) in self.multipliers(x).iter().zip(&self.z) {
            out = out.sub(&za.scale(mu));
        }
        out.expanded()
    }

    pub fn unconstrained_field(&self) -> VectorField {
        canonical_field(self.layout(), &self.hamiltonian).expanded()
    }

    /// `X_{H,M} = P(X_H)`.
    pub fn projected_field(&self) -> VectorField {
        self.project(&self.unconstrained_field())
    }

    /// `{F₁,F₂}_nh = Ω_Q(P X_{F₁}, P X_{F₂})`.
    pub fn bracket_value(&self, f: &Expr, g: &Expr) -> Expr {
        let l = self.layout();
        let pf = self.project(&canonical_field(l, f));
        let pg = self.project(&canonical_field(l, g));
        omega_pair(l, &pf, &pg)
    }

    /// Four-term local expansion with the signs and fourth term as printed in the
    /// reference (`Z^c` read for the unbound index of the last term).
    pub fn printed_expansion(&self, f: &Expr, g: &Expr) -> Expr {
        let l = self.layout();
        let k = self.psi.len();
        let zf: Vec<Expr> = self.z.iter().map(|z| z.apply(f)).collect();
        let zg: Vec<Expr> = self.z.iter().map(|z| z.apply(g)).collect();
        let mut terms = vec![canonical_bracket(l, f, g)];
        for a in 0..k {
            for b in 0..k {
                let cab = &self.c_inv[a][b];
                terms.push(cab * &zg[a] * canonical_bracket(l, f, &self.psi[b]));
                terms.push(-(cab * &zf[a] * canonical_bracket(l, g, &self.psi[b])));
                for c in 0..k {
                    for d in 0..k {
                        let pbd = canonical_bracket(l, &self.psi[b], &self.psi[d]);
                        terms.push(cab * &self.c_inv[c][d] * pbd * &zf[a] * &zg[c]);
                    }
                }
            }
        }
        Expr::add_all(terms)
    }

    /// Expansion obtained by substituting the projector into `Ω_Q(P X_F, P X_G)`:
    /// `{F,G} − C_{ab}{Ψᵇ,G} Zᵃ(F) + C_{ab}{Ψᵇ,F} Zᵃ(G)`.
    pub fn derived_expansion(&self, f: &Expr, g: &Expr) -> Expr {
        let l = self.layout();
        let k = self.psi.len();
        let mut terms = vec![canonical_bracket(l, f, g)];
        for a in 0..k {
            for b in 0..k {
                let cab = &self.c_inv[a][b];
                terms.push(-(cab * canonical_bracket(l, &self.psi[b], g) * self.z[a].apply(f)));
                terms.push(cab * canonical_bracket(l, &self.psi[b], f) * self.z[a].apply(g));
            }
        }
        Expr::add_all(terms)
    }

    /// The nonholonomic bracket as a [`Bracket`].
    pub fn bracket(&self) -> Bracket {
        let sys = Arc::new(self.clone());
        Bracket::custom(&self.chart(), "nonholonomic", move |f, g| sys.bracket_value(f, g))
    }

    /// Seeded points of the sample box moved onto `M = {Ψ = 0}` by Gauss–Newton
    /// steps in the momenta.
    pub fn points_on_m(&self, probe: &Probe) -> Vec<Point> {
        let l = self.layout();
        let ch = l.chart();
        let slots: Vec<&str> = ch.coords().iter().map(String::as_str).collect();
        let psi: Vec<Expr> = self.psi.iter().map(|e| e.bind(&probe.params)).collect();
        let jac: Vec<Expr> =
            psi.iter().flat_map(|e| l.p.iter().map(move |p| expand(&e.diff(p)))).collect();
        let (Ok(f), Ok(j)) = (Compiled::new(&psi, &slots), Compiled::new(&jac, &slots)) else {
            return Vec::new();
        };
        let n = l.dof();
        let k = psi.len();
        let mut out = Vec::new();
        for p in probe.sbox.points(ch.coords(), probe.count, probe.seed) {
            let mut x = ch.values(&p);
            let mut ok = k == 0;
            for _ in 0..50 {
                if k == 0 {
                    break;
                }
                let (Ok(r), Ok(jv)) = (f.eval(&x), j.eval(&x)) else { break };
                let norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if norm < 1e-14 {
                    ok = true;
                    break;
                }
                let jm = DMatrix::from_row_slice(k, n, &jv);
                let Ok(pinv) = jm.pseudo_inverse(1e-14) else { break };
                let step = pinv * DVector::from_vec(r);
                for i in 0..n {
                    x[n + i] -= step[i];
                }
            }
            if ok {
                out.push(ch.point(&x));
            }
        }
        out
    }

    /// Tangency, reaction-force and idempotency checks for `X_{H,M}`.
    pub fn field_checks(&self, probe: &Probe) -> Result<ValidationReport, NonholonomicError> {
        let l = self.layout();
        let ch = l.chart();
        let x = self.projected_field();
        let pts = self.points_on_m(probe);
        let mut rep = ValidationReport::default();
        let tangency: Vec<Expr> = self.psi.iter().map(|p| x.apply(p)).collect();
        rep.push(vanishes_at("X_{H,M}(Ψᵃ) = 0 on M", &tangency, &pts, probe));

        let omega = l.omega();
        let r = omega.interior(&x)?.sub(&KForm::differential(&ch, &self.hamiltonian));
        let mut annihilated: Vec<VectorField> = (0..l.dof()).map(|i| VectorField::basis(&ch, l.dof() + i)).collect();
        for v in self.constraints.distribution()? {
            let mut c = v.comps().to_vec();
            c.extend(vec![Expr::zero(); l.dof()]);
            annihilated.push(VectorField::new(&ch, c));
        }
        let reaction: Vec<Expr> = annihilated.iter().map(|y| r.eval(&[y])).collect();
        rep.push(vanishes_at("ι_XΩ − dH ∈ F⁰ on M", &reaction, &pts, probe));

        let mut idem = Vec::new();
        for i in 0..ch.dim() {
            let e = VectorField::basis(&ch, i);
            let pe = self.project(&e);
            idem.extend(self.project(&pe).sub(&pe).comps().iter().cloned());
        }
        let box_pts = probe.sbox.points(ch.coords(), probe.count, probe.seed);
        rep.push(vanishes_at("P² = P", &idem, &box_pts, probe));
        Ok(rep)
    }

    /// `{Ψᵃ, F}_nh = 0` on `M` for each coordinate function `F`.
    pub fn casimir_check(&self, probe: &Probe) -> Check {
        let pts = self.points_on_m(probe);
        let vals: Vec<Expr> = self
            .psi
            .iter()
            .flat_map(|p| self.chart().symbols().into_iter().map(move |f| (p.clone(), f)))
            .map(|(p, f)| self.bracket_value(&p, &f))
            .collect();
        vanishes_at("Ψᵃ Casimir on M", &vals, &pts, probe)
    }

    /// `X_{H,M}(F) = {F, H}_nh` on `M` for each coordinate function `F`.
    pub fn field_bracket_check(&self, probe: &Probe) -> Check {
        let x = self.projected_field();
        let pts = self.points_on_m(probe);
        let vals: Vec<Expr> =
            self.chart().symbols().iter().map(|f| x.apply(f) - self.bracket_value(f, &self.hamiltonian)).collect();
        vanishes_at("X_{H,M}(F) = {F,H}_nh on M", &vals, &pts, probe)
    }
}

/// Pointwise vanishing of every expression at the given points, relative to
/// `1 + Σ|terms|`.
pub fn vanishes_at(name: &str, exprs: &[Expr], pts: &[Point], probe: &Probe) -> Check {
    if pts.is_empty() {
        return Check::new(name, Verdict::Fail, Some("no sample points".into()));
    }
    for e in exprs {
        let e = e.bind(&probe.params);
        if e.is_zero() {
            continue;
        }
        for p in pts {
            let v = match e.evaluate(p, &probe.params) {
                Ok(v) => v,
                Err(err) => return Check::new(name, Verdict::Fail, Some(format!("{} at {}", err, p))),
            };
            let scale = 1.0 + magnitude(&e, p, &probe.params);
            if v.abs() / scale > probe.rel_tol {
                return Check::new(name, Verdict::Fail, Some(format!("value {:e} at {}", v, p)));
            }
        }
    }
    Check::new(name, Verdict::PointwisePass, None)
}

fn magnitude(e: &Expr, p: &Point, params: &Params) -> f64 {
    match e.node() {
        crate::expr::Node::Add(v) => v.iter().map(|t| t.evaluate(p, params).map_or(0.0, f64::abs)).sum(),
        _ => e.evaluate(p, params).map_or(0.0, f64::abs),
    }
}

/// Outcome of a bracket-generation test.
#[derive(Clone, Debug, PartialEq)]
pub struct Generation {
    pub generating: bool,
    /// Smallest rank seen over the sample points.
    pub min_rank: usize,
    pub witness: Option<Point>,
}

/// Whether iterated Lie brackets of `fields` up to `depth` span the tangent space
/// at every sample point.
pub fn bracket_generating(fields: &[VectorField], probe: &Probe, depth: usize) -> Result<Generation, NonholonomicError> {
    let Some(first) = fields.first() else {
        return Err(NonholonomicError::Invalid("no generators".into()));
    };
    if depth == 0 {
        return Err(NonholonomicError::Invalid("depth must be at least 1".into()));
    }
    let ch = first.chart().clone();
    let mut all: Vec<VectorField> = fields.to_vec();
    let mut layer: Vec<VectorField> = fields.to_vec();
    for _ in 1..depth {
        let mut next = Vec::new();
        for x in fields {
            for y in &layer {
                let b = x.lie_bracket(y)?.expanded();
                if !b.is_zero() {
                    next.push(b);
                }
            }
        }
        all.extend(next.iter().cloned());
        layer = next;
    }
    let mut gen = Generation { generating: true, min_rank: ch.dim(), witness: None };
    for p in probe.sbox.points(ch.coords(), probe.count, probe.seed) {
        let rows: Vec<Vec<f64>> = all.iter().filter_map(|x| x.evaluate(&p, &probe.params).ok()).collect();
        let r = linalg::rank(&rows, 1e-10);
        if r < gen.min_rank {
            gen.min_rank = r;
            gen.witness = Some(p.clone());
        }
        if r < ch.dim() {
            gen.generating = false;
        }
    }
    Ok(gen)
}

/// Almost Lie algebroid `(D, [·,·]_D, ρ_D)` in a local basis `X_α`:
/// `[X_α, X_β] = C^γ_{αβ} X_γ`, `ρ(X_α) = ρⁱ_α ∂/∂qⁱ`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlmostLieAlgebroid {
    pub base: Chart,
    /// `c[γ][α][β] = C^γ_{αβ}`.
    pub c: Vec<Vec<Vec<Expr>>>,
    /// `rho[i][α] = ρⁱ_α`.
    pub rho: Vec<Vec<Expr>>,
}

impl AlmostLieAlgebroid {
    pub fn new(base: &Chart, c: Vec<Vec<Vec<Expr>>>, rho: Vec<Vec<Expr>>) -> Result<AlmostLieAlgebroid, NonholonomicError> {
        let m = c.len();
        let shape_ok = c.iter().all(|g| g.len() == m && g.iter().all(|r| r.len() == m))
            && rho.len() == base.dim()
            && rho.iter().all(|r| r.len() == m);
        if !shape_ok {
            return Err(NonholonomicError::Basis("structure functions and anchor have inconsistent shapes".into()));
        }
        for g in &c {
            for a in 0..m {
                for b in 0..m {
                    if !expand(&(&g[a][b] + &g[b][a])).is_zero() {
                        return Err(NonholonomicError::Invalid("structure functions must be antisymmetric".into()));
                    }
                }
            }
        }
        Ok(AlmostLieAlgebroid { base: base.clone(), c, rho })
    }

    /// Tangent bundle: `ρ = id`, `C = 0`.
    pub fn tangent(base: &Chart) -> AlmostLieAlgebroid {
        let n = base.dim();
        let rho = (0..n).map(|i| (0..n).map(|a| if i == a { Expr::one() } else { Expr::zero() }).collect()).collect();
        AlmostLieAlgebroid { base: base.clone(), c: vec![vec![vec![Expr::zero(); n]; n]; n], rho }
    }

    pub fn rank(&self) -> usize {
        self.c.len()
    }

    /// Linear almost-Poisson structure on the dual with fiber coordinates `fiber`.
    pub fn dual(&self, fiber: &[&str]) -> Result<LinearAlmostPoisson, NonholonomicError> {
        if fiber.len() != self.rank() {
            return Err(NonholonomicError::Basis(format!("{} fiber names for rank {}", fiber.len(), self.rank())));
        }
        Ok(LinearAlmostPoisson {
            base: self.base.clone(),
            fiber: fiber.iter().map(|s| s.to_string()).collect(),
            c: self.c.clone(),
            rho: self.rho.clone(),
        })
    }

    /// `d^D` on sections of `Λᵏ D*`:
    /// `(d^Dω)_{α₀…α_k} = Σ_i (−1)^i ρ(X_{α_i}) ω_{…α̂_i…} + Σ_{i<j} (−1)^{i+j} C^γ_{α_iα_j} ω_{γ…α̂_i…α̂_j…}`.
    pub fn almost_differential(&self, w: &AlgebroidForm) -> Result<AlgebroidForm, NonholonomicError> {
        let m = self.rank();
        if w.rank != m {
            return Err(NonholonomicError::Basis(format!("form over rank {} basis, algebroid has rank {}", w.rank, m)));
        }
        let k = w.degree;
        let mut out = AlgebroidForm::zero(m, k + 1);
        for idx in increasing(m, k + 1) {
            let mut terms = Vec::new();
            for i in 0..=k {
                let mut rest = idx.clone();
                let a = rest.remove(i);
                let comp = w.get(&rest);
                let anchor = Expr::add_all(self.base.coords().iter().enumerate().map(|(l, q)| &self.rho[l][a] * comp.diff(q)));
                terms.push(sign(i) * anchor);
                for j in i + 1..=k {
                    let b = idx[j];
                    let mut rest: Vec<usize> = idx.clone();
                    rest.remove(j);
                    rest.remove(i);
                    for g in 0..m {
                        let mut full = vec![g];
                        full.extend(&rest);
                        terms.push(sign(i + j) * &self.c[g][a][b] * w.get(&full));
                    }
                }
            }
            out.set(&idx, expand(&Expr::add_all(terms)));
        }
        Ok(out)
    }
}

fn sign(k: usize) -> Expr {
    Expr::int(if k.is_multiple_of(2) { 1 } else { -1 })
}

/// Section `Σ ω_I X^I` of `Λᵏ D*` over increasing index tuples.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebroidForm {
    pub rank: usize,
    pub degree: usize,
    comps: BTreeMap<Vec<usize>, Expr>,
}

impl AlgebroidForm {
    pub fn zero(rank: usize, degree: usize) -> AlgebroidForm {
        AlgebroidForm { rank, degree, comps: BTreeMap::new() }
    }

    pub fn function(rank: usize, f: Expr) -> AlgebroidForm {
        let mut w = AlgebroidForm::zero(rank, 0);
        w.set(&[], f);
        w
    }

    /// `ψ = ψ_γ X^γ`.
    pub fn one_form(comps: Vec<Expr>) -> AlgebroidForm {
        let mut w = AlgebroidForm::zero(comps.len(), 1);
        for (g, c) in comps.into_iter().enumerate() {
            w.set(&[g], c);
        }
        w
    }

    /// Component at any index tuple, with the permutation sign.
    pub fn get(&self, idx: &[usize]) -> Expr {
        match crate::exterior::normalize(idx) {
            None => Expr::zero(),
            Some((sorted, s)) => self.comps.get(&sorted).map_or_else(Expr::zero, |e| Expr::int(s) * e),
        }
    }

    pub fn set(&mut self, idx: &[usize], e: Expr) {
        if e.is_zero() {
            self.comps.remove(idx);
        } else {
            self.comps.insert(idx.to_vec(), e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.comps.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }
}

impl fmt::Display for AlgebroidForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|(idx, e)| {
                let legs: Vec<String> = idx.iter().map(|i| format!("X^{}", i + 1)).collect();
                if idx.is_empty() {
                    e.to_string()
                } else {
                    format!("({}) {}", e, legs.join("∧"))
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::{audit_bracket, Classification};
    use crate::expr::{parse, SampleBox};

    fn free_particle() -> (CotangentLayout, ConstraintSet, Expr) {
        let l = CotangentLayout::new(&["x", "y", "z"], &["px", "py", "pz"], &[] as &[&str]).unwrap();
        let e = |s: &str| parse(s, l.chart().coords(), &["m"]).unwrap();
        let cs = ConstraintSet::new(&l, vec![vec![e("-y"), e("0"), e("1")]]).unwrap();
        (l.clone(), cs, e("(px^2 + py^2 + pz^2)/(2*m)"))
    }

    fn params() -> Params {
        [("m".to_string(), 1.0)].into()
    }

    #[test]
    fn free_particle_fields_and_matrix() {
        let (l, cs, h) = free_particle();
        let ch = l.chart();
        let z = &cs.orthogonal_fields()[0];
        assert_eq!(z.to_string(), "(-y) ∂/∂px + ∂/∂pz");
        let probe = Probe::new(ch.clone()).with_params(params());
        let c = compatibility_matrix(&cs, &h, &probe).unwrap();
        let want = parse("(1 + y^2)/m", ch.coords(), &["m"]).unwrap();
        assert_eq!(expand(&(&c[0][0] - want)), Expr::zero());
        let dist = cs.distribution().unwrap();
        assert_eq!(dist.len(), 2);
        assert_eq!(dist[0].comps(), &[Expr::one(), Expr::zero(), Expr::sym("y")]);
        assert_eq!(dist[1].comps(), &[Expr::zero(), Expr::one(), Expr::zero()]);
    }

    #[test]
    fn projected_field_is_tangent_and_compatible() {
        let (l, cs, h) = free_particle();
        let probe = Probe::new(l.chart()).with_params(params());
        let sys = ConstrainedSystem::new(&cs, &h, &probe).unwrap();
        let rep = sys.field_checks(&probe).unwrap();
        assert!(rep.passed(), "{}", rep);
        assert!(sys.casimir_check(&probe).verdict.ok());
        assert!(sys.field_bracket_check(&probe).verdict.ok());
    }

    #[test]
    fn bracket_expansions() {
        let (l, cs, h) = free_particle();
        let probe = Probe::new(l.chart()).with_params(params());
        let sys = ConstrainedSystem::new(&cs, &h, &probe).unwrap();
        let (x, px) = (Expr::sym("x"), Expr::sym("px"));
        let want = parse("1/(1 + y^2)", l.chart().coords(), &[] as &[&str]).unwrap();
        let pts = sys.points_on_m(&probe);
        assert_eq!(pts.len(), 20);
        let gap = sys.bracket_value(&x, &px) - want;
        assert!(vanishes_at("", &[gap], &pts, &probe).verdict.ok());
        let derived = sys.bracket_value(&x, &px) - sys.derived_expansion(&x, &px);
        assert!(vanishes_at("", &[derived], &pts, &probe).verdict.ok());
        let printed = sys.bracket_value(&x, &px) - sys.printed_expansion(&x, &px);
        assert!(!vanishes_at("", &[printed], &pts, &probe).verdict.ok());
    }

    #[test]
    fn nonholonomic_bracket_is_almost_poisson() {
        let (l, cs, h) = free_particle();
        let probe = Probe::new(l.chart()).with_params(params());
        let sys = ConstrainedSystem::new(&cs, &h, &probe).unwrap();
        let a = audit_bracket(&sys.bracket(), &probe);
        assert_eq!(a.label, Classification::AlmostPoisson, "{}", a);
    }

    #[test]
    fn singular_and_unconstrained_cases() {
        let l = CotangentLayout::standard(2, &[]);
        let probe = Probe::new(l.chart());
        let cs = ConstraintSet::new(&l, vec![vec![Expr::one(), Expr::zero()]]).unwrap();
        let err = compatibility_matrix(&cs, &Expr::sym("q1"), &probe).unwrap_err();
        assert!(matches!(err, NonholonomicError::Singular { .. }));

        let free = ConstraintSet::new(&l, vec![]).unwrap();
        let h = parse("p1^2 + q2*p2", l.chart().coords(), &[] as &[&str]).unwrap();
        let sys = ConstrainedSystem::new(&free, &h, &probe).unwrap();
        assert_eq!(sys.projected_field(), sys.unconstrained_field());
        let (f, g) = (Expr::sym("q1"), h.clone());
        assert_eq!(expand(&sys.bracket_value(&f, &g)), expand(&canonical_bracket(&l, &f, &g)));
    }

    #[test]
    fn bracket_generation() {
        let ch = Chart::new(&["x", "y", "z"]);
        let probe = Probe::new(ch.clone()).with_box(SampleBox::new());
        let a = VectorField::new(&ch, vec![Expr::one(), Expr::zero(), Expr::sym("y")]);
        let b = VectorField::basis(&ch, 1);
        assert!(bracket_generating(&[a.clone(), b.clone()], &probe, 2).unwrap().generating);
        assert!(!bracket_generating(&[a, b], &probe, 1).unwrap().generating);
        let plane = Chart::new(&["x", "y"]);
        let probe = Probe::new(plane.clone());
        let dx = VectorField::basis(&plane, 0);
        assert!(!bracket_generating(std::slice::from_ref(&dx), &probe, 4).unwrap().generating);
        assert!(bracket_generating(&[dx, VectorField::basis(&plane, 1)], &probe, 1).unwrap().generating);
    }

    #[test]
    fn almost_differential() {
        let base = Chart::new(&["q1", "q2"]);
        let t = AlmostLieAlgebroid::tangent(&base);
        let f = parse("q1^2*q2", base.coords(), &[] as &[&str]).unwrap();
        let df = t.almost_differential(&AlgebroidForm::function(2, f.clone())).unwrap();
        assert_eq!(df.get(&[0]), f.diff("q1"));
        assert_eq!(df.get(&[1]), f.diff("q2"));
        let ddf = t.almost_differential(&df).unwrap();
        assert!(ddf.is_zero());
        let c0 = t.almost_differential(&AlgebroidForm::function(2, Expr::int(5))).unwrap();
        assert!(c0.is_zero());

        let base = Chart::new(&["x"]);
        let eps = |g: usize, a: usize, b: usize| -> Expr {
            let cyc = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];
            if cyc.contains(&(a, b, g)) {
                Expr::one()
            } else if cyc.contains(&(b, a, g)) {
                Expr::int(-1)
            } else {
                Expr::zero()
            }
        };
        let c = (0..3).map(|g| (0..3).map(|a| (0..3).map(|b| eps(g, a, b)).collect()).collect()).collect();
        let alg = AlmostLieAlgebroid::new(&base, c, vec![vec![Expr::zero(); 3]]).unwrap();
        let psi = AlgebroidForm::one_form(vec![Expr::zero(), Expr::zero(), Expr::one()]);
        let d = alg.almost_differential(&psi).unwrap();
        assert_eq!(d.get(&[0, 1]), Expr::int(-1));
        assert!(d.get(&[0, 2]).is_zero() && d.get(&[1, 2]).is_zero());
    }
}
