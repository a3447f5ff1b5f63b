//! Turn a parsed [`ScenarioConfig`] into library objects.

use crate::config::{OdeSpec, OdeTarget, ScenarioConfig, SectionSpec, StructureKind};
use anyhow::{anyhow, bail, Context, Result};
use geomhj::dynamics::{self, DynamicsSpec, Field, Variant};
use geomhj::expr::{Expr, Probe, SampleBox};
use geomhj::exterior::KForm;
use geomhj::hj::oracle::{adaptive_fit, rk4_at};
use geomhj::hj::{self, HJReport};
use geomhj::nonholonomic::{ConstrainedSystem, ConstraintSet};
use geomhj::structures::{canonical, CanonicalKind, Structure};
use std::cell::Cell;

/// Highest Chebyshev degree tried when fitting an ODE-defined component.
const FIT_MAX_DEGREE: usize = 96;
const FIT_TAIL_TOL: f64 = 1e-14;

pub fn probe(cfg: &ScenarioConfig, sbox: &SampleBox) -> Probe {
    let mut p = Probe::new(cfg.layout.chart()).with_box(sbox.clone()).with_params(cfg.params.clone()).with_seed(cfg.seed);
    p.count = cfg.tol.samples;
    p
}

pub fn structure(cfg: &ScenarioConfig) -> Result<Structure> {
    let l = &cfg.layout;
    let ch = l.chart();
    let s = &cfg.structure;
    let st = match s.kind {
        StructureKind::Symplectic | StructureKind::Nonholonomic => canonical(CanonicalKind::Symplectic, l)?.structure,
        StructureKind::Lcs => canonical(CanonicalKind::Lcs(s.theta.clone().expect("checked on load")), l)?.structure,
        StructureKind::Contact => match &s.eta {
            Some(eta) => Structure::Contact { eta: one_form(cfg, eta)? },
            None => canonical(CanonicalKind::ContactExtended, l)?.structure,
        },
        StructureKind::Cosymplectic => match &s.eta {
            Some(eta) => Structure::Cosymplectic { eta: one_form(cfg, eta)?, omega: l.omega() },
            None => canonical(CanonicalKind::CosymplecticTime, l)?.structure,
        },
    };
    debug_assert_eq!(st.chart(), ch);
    Ok(st)
}

fn one_form(cfg: &ScenarioConfig, comps: &[Expr]) -> Result<KForm> {
    let ch = cfg.layout.chart();
    if comps.len() != ch.dim() {
        bail!("one-form needs {} components ({}), got {}", ch.dim(), ch.coords().join(", "), comps.len());
    }
    Ok(KForm::one_form(&ch, comps.to_vec()))
}

pub fn constrained_system(cfg: &ScenarioConfig, probe: &Probe) -> Result<ConstrainedSystem> {
    let cs = ConstraintSet::new(&cfg.layout, cfg.structure.constraints.clone())?;
    Ok(ConstrainedSystem::new(&cs, &cfg.hamiltonian, probe)?)
}

/// Field variant from the command line, the file, or the structure default.
pub fn variant_name(cfg: &ScenarioConfig, flag: Option<&str>) -> String {
    flag.map(str::to_string).or_else(|| cfg.dynamics.variant.clone()).unwrap_or_else(|| {
        match cfg.structure.kind {
            StructureKind::Cosymplectic => "evolution",
            StructureKind::Symplectic if cfg.dynamics.c.is_some() => "conformal",
            StructureKind::Symplectic if cfg.dynamics.beta.is_some() => "forced",
            _ => "hamiltonian",
        }
        .to_string()
    })
}

pub fn variant(cfg: &ScenarioConfig, name: &str) -> Result<Variant> {
    Ok(match name {
        "hamiltonian" => Variant::Hamiltonian,
        "gradient" => Variant::Gradient,
        "evolution" => Variant::Evolution,
        "conformal" => {
            let c = cfg.dynamics.c.clone().ok_or_else(|| anyhow!("conformal variant needs [dynamics] c"))?;
            Variant::Conformal { c, theta: cfg.layout.theta() }
        }
        "forced" => {
            let beta = cfg.dynamics.beta.as_ref().ok_or_else(|| anyhow!("forced variant needs [dynamics] beta"))?;
            Variant::Forced { beta: one_form(cfg, beta)?, layout: Some(cfg.layout.clone()) }
        }
        other => bail!("unknown variant `{}` (hamiltonian, gradient, evolution, conformal, forced)", other),
    })
}

/// The dynamics a config describes, for field printing and flows.
pub struct Dynamics {
    pub spec: DynamicsSpec,
    pub field: Field,
}

pub fn dynamics(cfg: &ScenarioConfig, variant_flag: Option<&str>, probe: &Probe) -> Result<Dynamics> {
    let name = variant_name(cfg, variant_flag);
    let st = structure(cfg)?;
    if cfg.structure.kind == StructureKind::Nonholonomic {
        if name != "hamiltonian" {
            bail!("variant `{}` is not available on a nonholonomic system", name);
        }
        let sys = constrained_system(cfg, probe)?;
        let field = Field { field: sys.projected_field(), checks: sys.field_checks(probe)? };
        return Ok(Dynamics { spec: DynamicsSpec::hamiltonian(st, cfg.hamiltonian.clone()), field });
    }
    let spec = DynamicsSpec::new(st, cfg.hamiltonian.clone(), variant(cfg, &name)?);
    let field = dynamics::vector_field(&spec, probe)?;
    Ok(Dynamics { spec, field })
}

/// A section with every component in closed form.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub name: String,
    pub evaluator: &'static str,
    pub gamma: Vec<Expr>,
    pub gamma_t: Option<Expr>,
    pub gz: Option<Expr>,
    pub f: Option<Expr>,
    pub spec: SectionSpec,
}

impl Resolved {
    /// Same section with `delta` added to its first free component.
    pub fn perturbed(&self, delta: &Expr) -> Resolved {
        let mut r = self.clone();
        match r.evaluator {
            "evolution-ii" => r.f = r.f.map(|f| f + delta),
            "contact-ii" => r.gz = r.gz.map(|g| g + delta),
            "nonholonomic" if r.gamma.len() > 1 => r.gamma[1] = &r.gamma[1] + delta,
            _ => r.gamma[0] = &r.gamma[0] + delta,
        }
        r
    }
}

/// Evaluators whose input shape matches `s`.
pub fn candidates(cfg: &ScenarioConfig, s: &SectionSpec, variant_flag: Option<&str>) -> Vec<&'static str> {
    if let Some(e) = &s.evaluator {
        return crate::config::EVALUATORS.iter().copied().filter(|x| x == e).collect();
    }
    let target = s.ode.as_ref().map(|o| o.target);
    match cfg.structure.kind {
        StructureKind::Symplectic if s.gamma_t.is_some() => vec!["tdep"],
        StructureKind::Symplectic if cfg.dynamics.c.is_some() => vec!["conformal"],
        StructureKind::Symplectic if cfg.dynamics.beta.is_some() => vec!["forced"],
        StructureKind::Symplectic => vec!["symplectic"],
        StructureKind::Cosymplectic => vec!["cosymplectic"],
        StructureKind::Lcs => vec!["lcs"],
        StructureKind::Nonholonomic => vec!["nonholonomic"],
        StructureKind::Contact => {
            let pair = if s.f.is_some() || target == Some(OdeTarget::F) {
                vec!["evolution-ii"]
            } else if s.gz.is_some() || target == Some(OdeTarget::Gz) {
                vec!["contact-ii"]
            } else {
                vec!["contact-i", "evolution-i"]
            };
            let wanted = variant_flag.map(str::to_string).or_else(|| cfg.dynamics.variant.clone());
            match wanted.as_deref() {
                Some("evolution") => pair.into_iter().filter(|e| e.starts_with("evolution")).collect(),
                Some("hamiltonian") => pair.into_iter().filter(|e| e.starts_with("contact")).collect(),
                _ => pair,
            }
        }
    }
}

/// Numerical solution of the section ODE fitted by a Chebyshev polynomial in the position.
pub fn solve_ode(cfg: &ScenarioConfig, ode: &OdeSpec) -> Result<Expr> {
    let mut slots = vec![ode.var.as_str()];
    slots.extend(ode.state.iter().map(String::as_str));
    let rhs = ode.rhs.bind(&cfg.params).compile(&slots).context("ODE right-hand side")?;
    let order = ode.state.len();
    let field = |x: f64, y: &[f64]| -> Vec<f64> {
        let mut args = vec![x];
        args.extend_from_slice(y);
        let top = rhs.eval(&args).map(|v| v[0]).unwrap_or(f64::NAN);
        let mut out: Vec<f64> = y[1..].to_vec();
        out.push(top);
        out
    };
    let (a, b) = ode.interval;
    let failed = Cell::new(false);
    let fit = adaptive_fit(
        |nodes| {
            let states = rk4_at(field, ode.start, &ode.initial, nodes, ode.dt);
            states
                .iter()
                .map(|s| {
                    if !s[0].is_finite() {
                        failed.set(true);
                    }
                    s[0]
                })
                .collect()
        },
        a,
        b,
        FIT_MAX_DEGREE,
        FIT_TAIL_TOL,
    );
    if failed.get() || order == 0 {
        bail!("ODE solution leaves the domain of its right-hand side on [{}, {}]", a, b);
    }
    Ok(fit.to_expr(&ode.var))
}

pub fn resolve(cfg: &ScenarioConfig, s: &SectionSpec, variant_flag: Option<&str>) -> Result<Resolved> {
    let found = candidates(cfg, s, variant_flag);
    let evaluator = match found.as_slice() {
        [one] => *one,
        [] => bail!("section `{}`: no evaluator matches a {} structure", s.name, cfg.structure.kind.name()),
        many => bail!(
            "section `{}` is ambiguous: matches {}; set `evaluator` or pass --variant",
            s.name,
            many.join(", ")
        ),
    };
    let mut gamma = s.gamma.clone();
    let mut gz = s.gz.clone();
    let mut f = s.f.clone();
    if let Some(ode) = &s.ode {
        let fit = solve_ode(cfg, ode).with_context(|| format!("section `{}`", s.name))?;
        match ode.target {
            OdeTarget::Gamma => gamma.push(fit),
            OdeTarget::Gz => {
                if gamma.is_empty() {
                    gamma.push(fit.diff(&ode.var));
                }
                gz = Some(fit);
            }
            OdeTarget::F => f = Some(fit),
        }
    }
    if evaluator == "contact-ii" && gamma.is_empty() {
        if let Some(g) = &gz {
            gamma = cfg.layout.q.iter().map(|q| g.diff(q)).collect();
        }
    }
    Ok(Resolved { name: s.name.clone(), evaluator, gamma, gamma_t: s.gamma_t.clone(), gz, f, spec: s.clone() })
}

pub fn run_hj(cfg: &ScenarioConfig, r: &Resolved, probe: &Probe) -> Result<HJReport> {
    let l = &cfg.layout;
    let h = &cfg.hamiltonian;
    let g = &r.gamma;
    let need = |what: Option<&Expr>, key: &str| what.cloned().ok_or_else(|| anyhow!("section `{}` needs `{}`", r.name, key));
    let report = match r.evaluator {
        "symplectic" => hj::hj_symplectic(l, h, g, r.spec.energy, probe)?,
        "tdep" => {
            let mut full = vec![need(r.gamma_t.as_ref(), "gamma_t")?];
            full.extend(g.iter().cloned());
            hj::hj_tdep(l, &r.spec.time, &r.spec.energy_var, h, &full, probe)?
        }
        "forced" => {
            let beta = cfg.dynamics.beta.as_ref().ok_or_else(|| anyhow!("forced evaluator needs [dynamics] beta"))?;
            hj::hj_forced(l, h, &one_form(cfg, beta)?, g, probe)?
        }
        "conformal" => {
            let c = cfg.dynamics.c.clone().ok_or_else(|| anyhow!("conformal evaluator needs [dynamics] c"))?;
            hj::hj_conformal(l, h, &c, g, probe)?
        }
        "cosymplectic" => hj::hj_cosymplectic(l, h, g, probe)?,
        "lcs" => {
            let th = cfg.structure.theta.as_ref().ok_or_else(|| anyhow!("lcs evaluator needs [structure] theta"))?;
            hj::hj_lcs(l, h, th, g, probe)?
        }
        "contact-i" => hj::hj_contact_i(l, h, g, probe)?,
        "contact-ii" => hj::hj_contact_ii(l, h, g, &need(r.gz.as_ref(), "gz")?, r.spec.k, probe)?,
        "evolution-i" => hj::hj_evolution_i(l, h, g, probe)?,
        "evolution-ii" => hj::hj_evolution_ii(l, h, &need(r.f.as_ref(), "f")?, probe)?,
        "nonholonomic" => {
            let sys = constrained_system(cfg, probe)?;
            hj::hj_nonholonomic(&sys, g, r.spec.mode, probe)?
        }
        other => bail!("unknown evaluator `{}`", other),
    };
    Ok(report.with_tol(cfg.tol.residual).with_relatedness_tol(cfg.tol.relatedness))
}

/// Sections selected by name, approach, or the `default` flag.
pub fn select<'a>(cfg: &'a ScenarioConfig, name: Option<&str>, approach: Option<&str>) -> Result<Vec<&'a SectionSpec>> {
    if cfg.sections.is_empty() {
        bail!("config declares no [section] to check");
    }
    if let Some(n) = name {
        return cfg
            .sections
            .iter()
            .find(|s| s.name == n)
            .map(|s| vec![s])
            .ok_or_else(|| anyhow!("no section `{}` (have: {})", n, section_names(cfg)));
    }
    let picked: Vec<&SectionSpec> = cfg
        .sections
        .iter()
        .filter(|s| s.default)
        .filter(|s| approach.is_none_or(|a| s.approach() == Some(a)))
        .collect();
    if picked.is_empty() {
        bail!("no default section matches approach {} (have: {})", approach.unwrap_or("any"), section_names(cfg));
    }
    Ok(picked)
}

fn section_names(cfg: &ScenarioConfig) -> String {
    cfg.sections.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", ")
}
