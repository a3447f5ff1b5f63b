//! Command implementations. Each writes its human-readable output to `out`
//! and returns whether every check passed.

use crate::config::{ScenarioConfig, StructureKind};
use crate::problem::{self, Resolved};
use crate::scenario;
use anyhow::{anyhow, bail, Context, Result};
use geomhj::brackets::{audit_bracket, identity_audit, IdentityAudit};
use geomhj::dynamics::{self, integrate_partial, max_abs_interior};
use geomhj::exterior::VectorField;
use geomhj::hj::HJReport;
use geomhj::structures::{self, reeb, Structure, ValidationReport};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Options shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub approach: Option<String>,
    pub variant: Option<String>,
    pub section: Option<String>,
    pub check: bool,
}

impl Options {
    /// Apply command-line overrides to a loaded config.
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.tol {
            cfg.tol.residual = t;
        }
    }
}

pub fn render_field(x: &VectorField) -> String {
    let mut s = String::new();
    for (c, e) in x.chart().coords().iter().zip(x.comps()) {
        writeln!(s, "d{}/dt = {}", c, e).unwrap();
    }
    s
}

pub fn validate(cfg: &ScenarioConfig, _opts: &Options, out: &mut dyn Write) -> Result<bool> {
    let probe = problem::probe(cfg, &cfg.sbox);
    let st = problem::structure(cfg)?;
    let mut report: ValidationReport =
        structures::validate(&st, &probe).with_context(|| format!("{} structure", cfg.structure.kind.name()))?;
    writeln!(out, "scenario: {}", cfg.name)?;
    writeln!(out, "structure: {} on ({})", cfg.structure.kind.name(), cfg.coords().join(", "))?;
    match (&st, cfg.structure.kind) {
        (_, StructureKind::Nonholonomic) => {
            let sys = problem::constrained_system(cfg, &probe)?;
            report.push(sys.constraints.independence(&probe));
            report.extend(sys.field_checks(&probe)?);
            for (a, z) in sys.z.iter().enumerate() {
                writeln!(out, "Z{} = {}", a + 1, z)?;
            }
        }
        (Structure::Symplectic { omega }, _) => {
            let exact = omega.add(&cfg.layout.theta().d());
            report.push(structures::form_vanishes("exact (Ω = −dΘ)", &exact, &probe));
            writeln!(out, "Liouville field: {}", cfg.layout.liouville())?;
        }
        (Structure::Contact { .. } | Structure::Cosymplectic { .. }, _) => {
            let r = reeb(&st)?;
            report.extend(structures::reeb_checks(&st, &r, &probe)?);
            writeln!(out, "Reeb field: {}", r)?;
        }
        (Structure::Lcs { .. }, _) => {
            let (z, checks) = structures::lee_field(&st, &probe)?;
            report.extend(checks);
            writeln!(out, "Lee field: {}", z)?;
        }
        _ => {}
    }
    writeln!(out, "{}", report)?;
    let ok = report.passed();
    writeln!(out, "validate: {}", if ok { "PASS" } else { "FAIL" })?;
    Ok(ok)
}

pub fn vf(cfg: &ScenarioConfig, opts: &Options, out: &mut dyn Write) -> Result<bool> {
    let probe = problem::probe(cfg, &cfg.sbox);
    let d = problem::dynamics(cfg, opts.variant.as_deref(), &probe)?;
    let name = problem::variant_name(cfg, opts.variant.as_deref());
    writeln!(out, "# {} field of {}", name, cfg.name)?;
    write!(out, "{}", render_field(&d.field.field))?;
    if opts.check {
        writeln!(out, "{}", d.field.checks)?;
        return Ok(d.field.checks.passed());
    }
    Ok(true)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn flow(cfg: &ScenarioConfig, opts: &Options, out: &mut dyn Write) -> Result<bool> {
    let fs = cfg.flow.as_ref().ok_or_else(|| anyhow!("config has no [flow] section"))?;
    if !(fs.dt > 0.0) || !fs.dt.is_finite() {
        bail!("flow step must be positive, got dt = {}", fs.dt);
    }
    if !(fs.t1 >= 0.0) || !fs.t1.is_finite() {
        bail!("final time must be non-negative, got t1 = {}", fs.t1);
    }
    let probe = problem::probe(cfg, &cfg.sbox);
    let d = problem::dynamics(cfg, opts.variant.as_deref(), &probe)?;
    let ch = cfg.layout.chart();
    let x0 = ch.point(&fs.x0);
    let (mut traj, err) = integrate_partial(&d.field.field, &x0, fs.t1, fs.dt, &cfg.params)?;
    if err.is_none() {
        traj.diagnostics = dynamics::diagnostics(&d.spec, &d.field.field, &traj, &cfg.params)?;
    }
    let csv = traj.to_csv();
    match opts.out.as_ref().or(cfg.output.csv.as_ref()) {
        Some(path) => {
            write_file(path, &csv)?;
            writeln!(out, "wrote {} rows to {}", traj.len(), path.display())?;
        }
        None => write!(out, "{}", csv)?,
    }
    if let Some(e) = err {
        writeln!(out, "flow stopped: {}", e)?;
        return Ok(false);
    }
    for (k, v) in &traj.diagnostics {
        let m = if k == "energy_drift" { v.iter().fold(0.0f64, |m, x| m.max(x.abs())) } else { max_abs_interior(v) };
        writeln!(out, "max |{}| = {:e}", k, m)?;
    }
    Ok(true)
}

/// HJ reports for the selected sections, in file order.
pub fn hj_reports(cfg: &ScenarioConfig, opts: &Options) -> Result<Vec<(Resolved, HJReport)>> {
    let picked = problem::select(cfg, opts.section.as_deref(), opts.approach.as_deref())?;
    let mut out = Vec::new();
    for s in picked {
        let r = problem::resolve(cfg, s, opts.variant.as_deref())?;
        let probe = problem::probe(cfg, &s.sbox);
        let rep = problem::run_hj(cfg, &r, &probe).with_context(|| format!("section `{}`", s.name))?;
        out.push((r, rep));
    }
    Ok(out)
}

/// Flat report text; several sections get one `[name]` block each.
pub fn flat_reports(reports: &[(Resolved, HJReport)]) -> String {
    if let [(_, rep)] = reports {
        return rep.to_flat();
    }
    let mut flat = String::new();
    for (r, rep) in reports {
        writeln!(flat, "[{}]", r.name).unwrap();
        flat.push_str(&rep.to_flat());
        flat.push('\n');
    }
    flat
}

pub fn hj(cfg: &ScenarioConfig, opts: &Options, out: &mut dyn Write) -> Result<bool> {
    let reports = hj_reports(cfg, opts)?;
    let mut ok = true;
    for (r, rep) in &reports {
        ok &= rep.verdict().ok();
        writeln!(out, "== section {} ({}) ==", r.name, r.evaluator)?;
        if let Some(n) = &r.spec.note {
            writeln!(out, "note: {}", n)?;
        }
        writeln!(out, "{}", rep)?;
    }
    if let Some(path) = opts.out.as_ref().or(cfg.output.report.as_ref()) {
        write_file(path, &flat_reports(&reports))?;
        writeln!(out, "wrote report to {}", path.display())?;
    }
    writeln!(out, "hj: {}", if ok { "PASS" } else { "FAIL" })?;
    Ok(ok)
}

pub fn audit_of(cfg: &ScenarioConfig) -> Result<IdentityAudit> {
    let probe = problem::probe(cfg, &cfg.sbox);
    if cfg.structure.kind == StructureKind::Nonholonomic {
        let sys = problem::constrained_system(cfg, &probe)?;
        return Ok(audit_bracket(&sys.bracket(), &probe));
    }
    Ok(identity_audit(&problem::structure(cfg)?, &probe)?)
}

pub fn audit(cfg: &ScenarioConfig, _opts: &Options, out: &mut dyn Write) -> Result<bool> {
    let a = audit_of(cfg)?;
    writeln!(out, "{}", a)?;
    let ok = cfg.expected.audit.as_ref().is_none_or(|want| a.label.to_string().eq_ignore_ascii_case(want));
    if let Some(want) = &cfg.expected.audit {
        writeln!(out, "expected classification: {} ({})", want, if ok { "match" } else { "MISMATCH" })?;
    }
    Ok(ok)
}

pub fn scenario_list(out: &mut dyn Write) -> Result<bool> {
    for b in scenario::BUILTINS {
        let cfg = scenario::load(b.name)?;
        writeln!(out, "{:<20} {}", b.name, cfg.summary)?;
    }
    Ok(true)
}

/// validate → vf → flow → hj → audit, compared against the expected verdicts.
pub fn scenario_run(name: &str, opts: &Options, out: &mut dyn Write) -> Result<bool> {
    let mut cfg = scenario::load(name)?;
    opts.apply(&mut cfg);
    let mut ok = true;
    let mut sink = Vec::new();
    let mut step = |label: &str, passed: bool, expected: Option<bool>, out: &mut dyn Write| -> Result<()> {
        let want = expected.unwrap_or(true);
        let good = passed == want;
        ok &= good;
        writeln!(
            out,
            "{:<9} {:<5} (expected {}){}",
            label,
            if passed { "PASS" } else { "FAIL" },
            if want { "PASS" } else { "FAIL" },
            if good { "" } else { "  <-- unexpected" }
        )?;
        Ok(())
    };
    writeln!(out, "scenario {}: {}", cfg.name, cfg.summary)?;
    let v = validate(&cfg, opts, &mut sink)?;
    step("validate", v, cfg.expected.validate, out)?;
    let quiet = Options { check: true, out: None, ..opts.clone() };
    let f = vf(&cfg, &quiet, &mut sink)?;
    step("vf", f, None, out)?;
    let flow_opts = Options { out: opts.out.as_ref().map(|d| d.join(format!("{}.csv", cfg.name))), ..opts.clone() };
    if cfg.flow.is_some() {
        let mut csv_sink = Vec::new();
        let fl = flow(&cfg, &flow_opts, &mut csv_sink)?;
        step("flow", fl, None, out)?;
    }
    let reports = hj_reports(&cfg, opts)?;
    for (r, rep) in &reports {
        let want = r.spec.expect_pass && cfg.expected.hj.unwrap_or(true);
        step(&format!("hj:{}", r.name), rep.verdict().ok(), Some(want), out)?;
    }
    if let Some(dir) = &opts.out {
        write_file(&dir.join(format!("{}.report", cfg.name)), &flat_reports(&reports))?;
    }
    let a = audit_of(&cfg)?;
    let audit_ok = cfg.expected.audit.as_ref().is_none_or(|w| a.label.to_string().eq_ignore_ascii_case(w));
    writeln!(out, "{:<9} {:<5} ({})", "audit", a.label, if audit_ok { "as expected" } else { "MISMATCH" })?;
    ok &= audit_ok;
    Ok(ok)
}
