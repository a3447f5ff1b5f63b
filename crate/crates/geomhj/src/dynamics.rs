//! Hamiltonian-type vector fields on every structure, a fixed-step RK4
//! integrator, and flow diagnostics.

use crate::brackets::bracket_of;
use crate::exterior::linalg::{self, ExprMatrix};
use crate::exterior::{CotangentLayout, ExteriorError, KForm, VectorField};
use crate::expr::{expand, Chart, Compiled, EvalError, Expr, Params, Point, Probe, Verdict};
use crate::structures::{
    self, field_vanishes, form_vanishes, scalar_vanishes, Check, Structure, StructureError, ValidationReport,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DynamicsError {
    #[error("variant `{variant}` is not available on a {kind} structure")]
    Mismatch { variant: &'static str, kind: &'static str },
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("step must be positive, got {0}")]
    Step(f64),
    #[error("evaluation failed at t = {t}, state {state}: {source}")]
    Domain { t: f64, state: String, source: EvalError },
    #[error("{0}")]
    Invalid(String),
}

impl From<EvalError> for DynamicsError {
    fn from(e: EvalError) -> Self {
        DynamicsError::Domain { t: f64::NAN, state: String::new(), source: e }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Variant {
    Hamiltonian,
    Gradient,
    Evolution,
    /// `ι_XΩ = dH − cΘ` with `Ω = −dΘ`.
    Conformal { c: Expr, theta: KForm },
    /// `ι_XΩ − dH = β`; semibasicity is checked when a cotangent layout is given.
    Forced { beta: KForm, layout: Option<CotangentLayout> },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Hamiltonian => "hamiltonian",
            Variant::Gradient => "gradient",
            Variant::Evolution => "evolution",
            Variant::Conformal { .. } => "conformal",
            Variant::Forced { .. } => "forced",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsSpec {
    pub structure: Structure,
    pub hamiltonian: Expr,
    pub variant: Variant,
}

impl DynamicsSpec {
    pub fn new(structure: Structure, hamiltonian: Expr, variant: Variant) -> DynamicsSpec {
        DynamicsSpec { structure, hamiltonian, variant }
    }

    pub fn hamiltonian(structure: Structure, h: Expr) -> DynamicsSpec {
        DynamicsSpec::new(structure, h, Variant::Hamiltonian)
    }

    pub fn chart(&self) -> Chart {
        self.structure.chart()
    }
}

/// A constructed field with its back-substitution checks.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub field: VectorField,
    pub checks: ValidationReport,
}

fn reeb_pair(s: &Structure) -> Option<(&KForm, KForm)> {
    match s {
        Structure::Contact { eta } => Some((eta, eta.d())),
        Structure::Cosymplectic { eta, omega } => Some((eta, omega.clone())),
        _ => None,
    }
}

fn solve(n: &ExprMatrix, ch: &Chart, rhs: &KForm) -> VectorField {
    VectorField::new(ch, linalg::mat_vec(n, &rhs.one_form_comps())).expanded()
}

/// Symbolic vector field of `spec` with every defining identity re-checked.
pub fn vector_field(spec: &DynamicsSpec, probe: &Probe) -> Result<Field, DynamicsError> {
    let s = &spec.structure;
    let h = &spec.hamiltonian;
    let ch = s.chart();
    let dh = KForm::differential(&ch, h);
    let mismatch = || DynamicsError::Mismatch { variant: spec.variant.name(), kind: s.kind() };
    let mut rep = ValidationReport::default();

    let field = match (&spec.variant, s) {
        (Variant::Hamiltonian, Structure::Symplectic { omega }) => {
            let x = omega.sharp(&dh)?.expanded();
            rep.push(form_vanishes("ι_XΩ = dH", &omega.interior(&x)?.sub(&dh), probe));
            x
        }
        (Variant::Conformal { c, theta }, Structure::Symplectic { omega }) => {
            rep.push(form_vanishes("Ω = −dΘ", &omega.add(&theta.d()), probe));
            let x = omega.sharp(&dh.sub(&theta.scale(c)))?.expanded();
            rep.push(form_vanishes("ι_XΩ = dH − cΘ", &omega.interior(&x)?.sub(&dh).add(&theta.scale(c)), probe));
            rep.push(form_vanishes("L_XΩ = cΩ", &omega.lie(&x)?.sub(&omega.scale(c)), probe));
            x
        }
        (Variant::Forced { beta, layout }, Structure::Symplectic { omega }) => {
            let semibasic = match layout {
                Some(l) if l.chart() == ch => {
                    let v = if l.is_semibasic(beta) { Verdict::Pass } else { Verdict::Fail };
                    Check::new("β semibasic", v, (v == Verdict::Fail).then(|| format!("β = {} has dp legs", beta)))
                }
                _ => Check::new("β semibasic (unchecked)", Verdict::PointwisePass, None),
            };
            rep.push(semibasic);
            let x = omega.sharp(&dh.add(beta))?.expanded();
            rep.push(form_vanishes("ι_XΩ − dH = β", &omega.interior(&x)?.sub(&dh).sub(beta), probe));
            x
        }
        (Variant::Hamiltonian, Structure::Lcs { omega, theta }) => {
            let rhs = dh.sub(&theta.scale(h));
            let x = omega.sharp(&rhs)?.expanded();
            rep.push(form_vanishes("ι_XΩ = d_θH", &omega.interior(&x)?.sub(&rhs), probe));
            x
        }
        (
            Variant::Hamiltonian,
            Structure::Poisson { .. }
            | Structure::AlmostPoisson { .. }
            | Structure::LinearAlmostPoisson(_)
            | Structure::Jacobi { .. },
        ) => {
            let b = bracket_of(s)?;
            let lam = b.bivector().expect("bivector bracket");
            let mut x = lam.sharp(&dh);
            if let Some(z) = b.jacobi_field() {
                x = x.add(&z.scale(h));
            }
            let x = x.expanded();
            for xi in ch.symbols() {
                let mut want = b.apply(&xi, h);
                if let Some(z) = b.jacobi_field() {
                    want = want + &xi * z.apply(h);
                }
                let name = format!("X_H({}) = bracket", xi);
                rep.push(scalar_vanishes(&name, &(x.apply(&xi) - want), &ch, probe));
            }
            x
        }
        (Variant::Hamiltonian, Structure::Contact { eta }) => {
            let x = structures::contact_field(eta, h)?.expanded();
            let r = structures::reeb(s)?;
            let rh = r.apply(h);
            rep.push(scalar_vanishes("ι_Xη = −H", &(eta.interior(&x)?.scalar() + h), &ch, probe));
            let want = dh.sub(&eta.scale(&rh));
            rep.push(form_vanishes("ι_X dη = dH − R(H)η", &eta.d().interior(&x)?.sub(&want), probe));
            x
        }
        (Variant::Hamiltonian, Structure::Cosymplectic { eta, omega }) => {
            let n = structures::flat_inverse(eta, omega)?;
            let rh = structures::reeb(s)?.apply(h);
            let rhs = dh.sub(&eta.scale(&rh));
            let x = solve(&n, &ch, &rhs);
            rep.push(form_vanishes("ι_XΩ = dH − R(H)η", &omega.interior(&x)?.sub(&rhs), probe));
            rep.push(scalar_vanishes("ι_Xη = 0", &eta.interior(&x)?.scalar(), &ch, probe));
            x
        }
        (Variant::Gradient, Structure::Cosymplectic { .. } | Structure::Contact { .. }) => {
            let (eta, omega) = reeb_pair(s).expect("reeb pair");
            let n = structures::flat_inverse(eta, &omega)?;
            let x = solve(&n, &ch, &dh);
            let back = omega.interior(&x)?.add(&eta.scale(&eta.interior(&x)?.scalar()));
            rep.push(form_vanishes("ι_XΩ + η(X)η = dH", &back.sub(&dh), probe));
            x
        }
        (Variant::Evolution, Structure::Cosymplectic { eta, omega }) => {
            let n = structures::flat_inverse(eta, omega)?;
            let r = structures::reeb(s)?;
            let rhs = dh.sub(&eta.scale(&r.apply(h)));
            let x = solve(&n, &ch, &rhs).add(&r).expanded();
            rep.push(form_vanishes("ι_EΩ = dH − R(H)η", &omega.interior(&x)?.sub(&rhs), probe));
            let one = eta.interior(&x)?.scalar() - Expr::one();
            rep.push(scalar_vanishes("ι_Eη = 1", &one, &ch, probe));
            x
        }
        (Variant::Evolution, Structure::Contact { eta }) => {
            let deta = eta.d();
            let n = structures::flat_inverse(eta, &deta)?;
            let rh = structures::reeb(s)?.apply(h);
            let rhs = dh.sub(&eta.scale(&rh));
            let x = solve(&n, &ch, &rhs);
            rep.push(form_vanishes("L_εη = dH − R(H)η", &eta.lie(&x)?.sub(&rhs), probe));
            rep.push(scalar_vanishes("η(ε) = 0", &eta.interior(&x)?.scalar(), &ch, probe));
            x
        }
        _ => return Err(mismatch()),
    };
    Ok(Field { field, checks: rep })
}

/// `ε_H − X_H − H·R` for a contact structure.
pub fn evolution_decomposition_gap(s: &Structure, h: &Expr, probe: &Probe) -> Result<Check, DynamicsError> {
    let ev = vector_field(&DynamicsSpec::new(s.clone(), h.clone(), Variant::Evolution), probe)?.field;
    let xh = vector_field(&DynamicsSpec::hamiltonian(s.clone(), h.clone()), probe)?.field;
    let r = structures::reeb(s)?;
    Ok(field_vanishes("ε_H = X_H + H·R", &ev.sub(&xh).sub(&r.scale(h)).expanded(), probe))
}

/// Numeric evaluator of a field with parameters bound.
pub struct CompiledField {
    chart: Chart,
    code: Compiled,
}

impl CompiledField {
    pub fn new(x: &VectorField, params: &Params) -> Result<CompiledField, EvalError> {
        let comps: Vec<Expr> = x.comps().iter().map(|c| c.bind(params)).collect();
        let slots: Vec<&str> = x.chart().coords().iter().map(String::as_str).collect();
        Ok(CompiledField { chart: x.chart().clone(), code: Compiled::new(&comps, &slots)? })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.code.eval(x)
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub chart: Chart,
    pub times: Vec<f64>,
    /// One array per chart coordinate.
    pub values: Vec<Vec<f64>>,
    pub diagnostics: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }

    pub fn point(&self, k: usize) -> Point {
        self.chart.point(&self.state(k))
    }

    pub fn last(&self) -> Point {
        self.point(self.len() - 1)
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.chart
            .index_of(name)
            .map(|i| self.values[i].as_slice())
            .or_else(|| self.diagnostics.get(name).map(Vec::as_slice))
    }

    /// CSV with header `t,<coords...>,<diagnostics...>` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in self.chart.coords() {
            out.push(',');
            out.push_str(c);
        }
        for k in self.diagnostics.keys() {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for k in 0..self.len() {
            write!(out, "{:.16e}", self.times[k]).unwrap();
            for v in self.values.iter().chain(self.diagnostics.values()) {
                write!(out, ",{:.16e}", v.get(k).copied().unwrap_or(f64::NAN)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn state_string(chart: &Chart, x: &[f64]) -> String {
    chart.point(x).to_string()
}

fn grid(t1: f64, dt: f64) -> Result<(usize, f64), DynamicsError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::Step(dt));
    }
    if !(t1 >= 0.0) || !t1.is_finite() {
        return Err(DynamicsError::Invalid(format!("final time must be non-negative, got {}", t1)));
    }
    let n = (t1 / dt).round().max(if t1 > 0.0 { 1.0 } else { 0.0 }) as usize;
    Ok((n, if n == 0 { 0.0 } else { t1 / n as f64 }))
}

/// Classical RK4 for an autonomous system on `R^d`.
fn rk4<F>(f: F, x0: Vec<f64>, n: usize, h: f64, mut visit: impl FnMut(usize, &[f64])) -> Result<(), (usize, Vec<f64>, EvalError)>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, EvalError>,
{
    let mut x = x0;
    visit(0, &x);
    let d = x.len();
    let shift = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { (0..d).map(|i| x[i] + s * k[i]).collect() };
    for step in 0..n {
        let fail = |e| (step, x.clone(), e);
        let k1 = f(&x).map_err(fail)?;
        let k2 = f(&shift(&x, &k1, h / 2.0)).map_err(fail)?;
        let k3 = f(&shift(&x, &k2, h / 2.0)).map_err(fail)?;
        let k4 = f(&shift(&x, &k3, h)).map_err(fail)?;
        for i in 0..d {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        visit(step + 1, &x);
    }
    Ok(())
}

/// Integrate `X` from `x0` over `[0, t1]` with fixed step close to `dt`.
pub fn integrate(x: &VectorField, x0: &Point, t1: f64, dt: f64, params: &Params) -> Result<Trajectory, DynamicsError> {
    match integrate_partial(x, x0, t1, dt, params)? {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`integrate`], but a domain error mid-flow returns the steps computed
/// so far together with the error.
pub fn integrate_partial(
    x: &VectorField,
    x0: &Point,
    t1: f64,
    dt: f64,
    params: &Params,
) -> Result<(Trajectory, Option<DynamicsError>), DynamicsError> {
    let (n, h) = grid(t1, dt)?;
    let ch = x.chart().clone();
    let f = CompiledField::new(x, params)?;
    let start = ch.values(x0);
    let mut values = vec![Vec::with_capacity(n + 1); ch.dim()];
    let mut times = Vec::with_capacity(n + 1);
    let res = rk4(|s| f.eval(s), start, n, h, |k, s| {
        times.push(k as f64 * h);
        for (col, v) in values.iter_mut().zip(s) {
            col.push(*v);
        }
    });
    let err = res
        .err()
        .map(|(k, s, e)| DynamicsError::Domain { t: k as f64 * h, state: state_string(&ch, &s), source: e });
    Ok((Trajectory { chart: ch, times, values, diagnostics: BTreeMap::new() }, err))
}

/// States and tangent maps `Dφ_t` from integrating `X` with its variational equation.
pub fn integrate_variational(
    x: &VectorField,
    x0: &Point,
    t1: f64,
    dt: f64,
    params: &Params,
) -> Result<(Trajectory, Vec<Vec<f64>>), DynamicsError> {
    let (n, h) = grid(t1, dt)?;
    let ch = x.chart().clone();
    let d = ch.dim();
    let mut exprs: Vec<Expr> = x.comps().iter().map(|c| c.bind(params)).collect();
    for i in 0..d {
        for c in ch.coords() {
            exprs.push(expand(&x.comp(i).diff(c)).bind(params));
        }
    }
    let slots: Vec<&str> = ch.coords().iter().map(String::as_str).collect();
    let code = Compiled::new(&exprs, &slots)?;
    let rhs = |s: &[f64]| -> Result<Vec<f64>, EvalError> {
        let v = code.eval(&s[..d])?;
        let mut out = v[..d].to_vec();
        let jac = &v[d..];
        let m = &s[d..];
        for i in 0..d {
            for j in 0..d {
                out.push((0..d).map(|k| jac[i * d + k] * m[k * d + j]).sum());
            }
        }
        Ok(out)
    };
    let mut start = ch.values(x0);
    for i in 0..d {
        for j in 0..d {
            start.push(if i == j { 1.0 } else { 0.0 });
        }
    }
    let mut values = vec![Vec::with_capacity(n + 1); d];
    let mut maps = Vec::with_capacity(n + 1);
    rk4(rhs, start, n, h, |_, s| {
        for (col, v) in values.iter_mut().zip(s) {
            col.push(*v);
        }
        maps.push(s[d..].to_vec());
    })
    .map_err(|(k, s, e)| DynamicsError::Domain { t: k as f64 * h, state: state_string(&ch, &s[..d]), source: e })?;
    let times = (0..=n).map(|k| k as f64 * h).collect();
    Ok((Trajectory { chart: ch, times, values, diagnostics: BTreeMap::new() }, maps))
}

fn eval_series(e: &Expr, traj: &Trajectory, params: &Params) -> Result<Vec<f64>, DynamicsError> {
    let slots: Vec<&str> = traj.chart.coords().iter().map(String::as_str).collect();
    let code = e.bind(params).compile(&slots)?;
    (0..traj.len())
        .map(|k| {
            let s = traj.state(k);
            code.eval(&s).map(|v| v[0]).map_err(|err| DynamicsError::Domain {
                t: traj.times[k],
                state: state_string(&traj.chart, &s),
                source: err,
            })
        })
        .collect()
}

/// Central differences, one-sided at the ends.
fn derivative(v: &[f64], t: &[f64]) -> Vec<f64> {
    let n = v.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            let (a, b) = if k == 0 {
                (0, 1)
            } else if k == n - 1 {
                (n - 2, n - 1)
            } else {
                (k - 1, k + 1)
            };
            (v[b] - v[a]) / (t[b] - t[a])
        })
        .collect()
}

fn interior(v: &[f64]) -> &[f64] {
    if v.len() > 2 {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

fn det(m: &[f64], d: usize) -> f64 {
    nalgebra::DMatrix::from_row_slice(d, d, m).determinant()
}

/// Per-step series for the laws attached to `spec`: `energy_drift` always;
/// `dissipation_residual` and `contact_measure_log` for contact Hamiltonian flows;
/// `conformal_residual` for conformal flows. Finite-difference residuals are
/// reported on interior steps only, with endpoints set to zero.
pub fn diagnostics(
    spec: &DynamicsSpec,
    field: &VectorField,
    traj: &Trajectory,
    params: &Params,
) -> Result<BTreeMap<String, Vec<f64>>, DynamicsError> {
    let mut out = BTreeMap::new();
    let hs = eval_series(&spec.hamiltonian, traj, params)?;
    out.insert("energy_drift".to_string(), hs.iter().map(|v| v - hs[0]).collect());
    let t1 = traj.times.last().copied().unwrap_or(0.0);
    let dt = if traj.len() > 1 { traj.times[1] - traj.times[0] } else { 1.0 };
    let x0 = traj.point(0);
    let d = traj.chart.dim();
    let central = |v: Vec<f64>| -> Vec<f64> {
        let n = v.len();
        v.into_iter().enumerate().map(|(k, x)| if k == 0 || k + 1 == n { 0.0 } else { x }).collect()
    };

    match (&spec.variant, &spec.structure) {
        (Variant::Hamiltonian, Structure::Contact { eta }) => {
            let r = structures::reeb(&spec.structure)?;
            let rh = eval_series(&expand(&r.apply(&spec.hamiltonian)), traj, params)?;
            let dh = derivative(&hs, &traj.times);
            let res = (0..traj.len()).map(|k| (dh[k] + rh[k] * hs[k]).abs()).collect();
            out.insert("dissipation_residual".to_string(), central(res));

            let n = (d - 1) / 2;
            let vol = eta.d();
            let mut top = KForm::function(eta.chart(), Expr::one());
            for _ in 0..n {
                top = top.wedge(&vol)?;
            }
            let rho = top.wedge(eta)?.get(&(0..d).collect::<Vec<_>>());
            let rho = eval_series(&expand(&rho), traj, params)?;
            let (_, maps) = integrate_variational(field, &x0, t1, dt, params)?;
            let logs: Vec<f64> = (0..traj.len())
                .map(|k| (rho[k] * det(&maps[k], d)).abs().ln() - (n as f64 + 1.0) * hs[k].abs().ln())
                .collect();
            out.insert("contact_measure_log".to_string(), logs.iter().map(|v| v - logs[0]).collect());
        }
        (Variant::Conformal { c, .. }, Structure::Symplectic { omega }) => {
            let c = c.bind(params).as_f64().ok_or_else(|| {
                DynamicsError::Invalid(format!("conformal factor `{}` is not a number after binding", c))
            })?;
            let (_, maps) = integrate_variational(field, &x0, t1, dt, params)?;
            let m = omega.matrix();
            let cells: Vec<Vec<Vec<f64>>> = m
                .iter()
                .map(|row| row.iter().map(|e| eval_series(e, traj, params)).collect::<Result<_, _>>())
                .collect::<Result<_, _>>()?;
            // Pairing P_ij(t) = Ω_{φ_t(x0)}(Dφ_t e_i, Dφ_t e_j).
            let pairing = |k: usize, i: usize, j: usize| -> f64 {
                let j_map = &maps[k];
                let mut s = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        s += cells[a][b][k] * j_map[a * d + i] * j_map[b * d + j];
                    }
                }
                s
            };
            let mut res = vec![0.0; traj.len()];
            for i in 0..d {
                for j in i + 1..d {
                    let p: Vec<f64> = (0..traj.len()).map(|k| pairing(k, i, j)).collect();
                    let dp = derivative(&p, &traj.times);
                    for k in 0..traj.len() {
                        res[k] = f64::max(res[k], (dp[k] - c * p[k]).abs() / (1.0 + p[k].abs()));
                    }
                }
            }
            out.insert("conformal_residual".to_string(), central(res));
        }
        _ => {}
    }
    Ok(out)
}

/// Largest absolute entry of a diagnostic series, ignoring the endpoints.
pub fn max_abs_interior(v: &[f64]) -> f64 {
    interior(v).iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::structures::{canonical, CanonicalKind};

    fn e(s: &str, ch: &Chart) -> Expr {
        parse(s, ch.coords(), &["c"]).unwrap()
    }

    #[test]
    fn oscillator_field_and_period() {
        let l = CotangentLayout::standard(1, &[]);
        let ch = l.chart();
        let s = canonical(CanonicalKind::Symplectic, &l).unwrap().structure;
        let spec = DynamicsSpec::hamiltonian(s, e("(p^2 + q^2)/2", &ch));
        let f = vector_field(&spec, &Probe::new(ch.clone())).unwrap();
        assert!(f.checks.passed());
        assert_eq!(f.field.comps(), &[e("p", &ch), e("-q", &ch)]);
        let x0 = ch.point(&[1.0, 0.0]);
        let tr = integrate(&f.field, &x0, 2.0 * std::f64::consts::PI, 1e-3, &Params::new()).unwrap();
        let end = tr.state(tr.len() - 1);
        assert!((end[0] - 1.0).abs() < 1e-6 && end[1].abs() < 1e-6, "{:?}", end);
        let d = diagnostics(&spec, &f.field, &tr, &Params::new()).unwrap();
        assert!(max_abs_interior(&d["energy_drift"]) < 1e-8);
    }

    #[test]
    fn contact_field_and_dissipation() {
        let l = CotangentLayout::standard(1, &["z"]);
        let ch = l.chart();
        let s = canonical(CanonicalKind::ContactExtended, &l).unwrap().structure;
        let spec = DynamicsSpec::hamiltonian(s.clone(), e("p^2/2 + z", &ch));
        let probe = Probe::new(ch.clone());
        let f = vector_field(&spec, &probe).unwrap();
        assert!(f.checks.passed(), "{}", f.checks);
        assert_eq!(f.field.comps(), &[e("p", &ch), e("-p", &ch), expand(&e("p^2/2 - z", &ch))]);
        let tr = integrate(&f.field, &ch.point(&[0.0, 1.0, 0.0]), 2.0, 1e-3, &Params::new()).unwrap();
        let d = diagnostics(&spec, &f.field, &tr, &Params::new()).unwrap();
        assert!(max_abs_interior(&d["dissipation_residual"]) < 1e-6);
        assert!(max_abs_interior(&d["contact_measure_log"]) < 1e-8);
        assert!(evolution_decomposition_gap(&s, &spec.hamiltonian, &probe).unwrap().verdict.ok());
    }

    #[test]
    fn conformal_momentum_grows_exponentially() {
        let l = CotangentLayout::standard(1, &[]);
        let ch = l.chart();
        let c = canonical(CanonicalKind::Symplectic, &l).unwrap();
        let variant = Variant::Conformal { c: Expr::sym("c"), theta: c.theta_q.clone() };
        let spec = DynamicsSpec::new(c.structure, e("p^2/2", &ch), variant);
        let params: Params = [("c".to_string(), 0.3)].into();
        let probe = Probe::new(ch.clone()).with_params(params.clone());
        let f = vector_field(&spec, &probe).unwrap();
        assert!(f.checks.passed(), "{}", f.checks);
        let tr = integrate(&f.field, &ch.point(&[0.0, 1.0]), 1.0, 1e-3, &params).unwrap();
        let p = tr.series("p").unwrap();
        assert!((p[p.len() - 1] - 0.3f64.exp()).abs() < 1e-6);
        let d = diagnostics(&spec, &f.field, &tr, &params).unwrap();
        assert!(max_abs_interior(&d["conformal_residual"]) < 1e-6);
    }

    #[test]
    fn poisson_energy_is_conserved() {
        let ch = Chart::new(&["x", "y", "z"]);
        let lam = crate::exterior::Multivector::from_terms(
            &ch,
            2,
            [(vec![0, 1], e("z", &ch)), (vec![1, 2], e("x", &ch)), (vec![2, 0], e("y", &ch))],
        );
        let spec = DynamicsSpec::hamiltonian(Structure::Poisson { lambda: lam }, e("x^2 + 2*y^2 + 3*z^2", &ch));
        let f = vector_field(&spec, &Probe::new(ch.clone())).unwrap();
        assert!(f.checks.passed());
        let tr = integrate(&f.field, &ch.point(&[1.0, 0.5, 0.2]), 1.0, 1e-3, &Params::new()).unwrap();
        let d = diagnostics(&spec, &f.field, &tr, &Params::new()).unwrap();
        assert!(max_abs_interior(&d["energy_drift"]) < 1e-8);
    }

    #[test]
    fn variant_mismatch_and_bad_step() {
        let l = CotangentLayout::standard(1, &[]);
        let s = canonical(CanonicalKind::Symplectic, &l).unwrap().structure;
        let spec = DynamicsSpec::new(s, Expr::sym("p"), Variant::Evolution);
        assert!(matches!(vector_field(&spec, &Probe::new(l.chart())), Err(DynamicsError::Mismatch { .. })));
        let x = VectorField::basis(&l.chart(), 0);
        let err = integrate(&x, &l.chart().point(&[0.0, 0.0]), 1.0, 0.0, &Params::new()).unwrap_err();
        assert_eq!(err, DynamicsError::Step(0.0));
    }

    #[test]
    fn cosymplectic_evolution_is_reeb_of_omega_h() {
        let l = CotangentLayout::standard(1, &["t"]);
        let ch = l.chart();
        let h = e("p^2/2 + t*q^2", &ch);
        let base = canonical(CanonicalKind::CosymplecticTime, &l).unwrap().structure;
        let probe = Probe::new(ch.clone());
        let ev = vector_field(&DynamicsSpec::new(base.clone(), h.clone(), Variant::Evolution), &probe).unwrap();
        assert!(ev.checks.passed(), "{}", ev.checks);
        let omega_h = canonical(CanonicalKind::CosymplecticH(h.clone()), &l).unwrap().structure;
        assert_eq!(ev.field, structures::reeb(&omega_h).unwrap());
        let grad = vector_field(&DynamicsSpec::new(base.clone(), h.clone(), Variant::Gradient), &probe).unwrap();
        let ham = vector_field(&DynamicsSpec::hamiltonian(base.clone(), h.clone()), &probe).unwrap();
        assert!(grad.checks.passed() && ham.checks.passed());
        let r = structures::reeb(&base).unwrap();
        let gap = grad.field.sub(&ham.field).sub(&r.scale(&r.apply(&h))).expanded();
        assert!(gap.is_zero());
    }

    #[test]
    fn csv_layout() {
        let ch = Chart::new(&["q"]);
        let x = VectorField::new(&ch, vec![Expr::one()]);
        let tr = integrate(&x, &ch.point(&[0.0]), 1.0, 0.5, &Params::new()).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,q");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "5.0000000000000000e-1,5.0000000000000000e-1");
    }
}
