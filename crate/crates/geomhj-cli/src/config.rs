//! INI scenario files.
//!
//! Layout of a file:
//!
//! ```ini
//! [scenario]        name, summary, seed
//! [chart]           q, p, extra      (comma-separated coordinate names)
//! [parameters]      name = value
//! [structure]       kind, theta, eta, constraints
//! [hamiltonian]     H
//! [dynamics]        variant, c, beta
//! [box]             coord = lo, hi
//! [tolerances]      residual, relatedness, samples
//! [flow]            x0, t1, dt
//! [output]          csv, report
//! [expected]        validate, hj, audit
//! [section.NAME]    evaluator, gamma, gamma_t, gz, f, k, energy, mode, box.<coord>, ode.*
//! ```
//!
//! Expressions are double-quoted strings in the `geomhj::expr` grammar.

use geomhj::expr::{parse, Expr, Params, SampleBox};
use geomhj::exterior::CotangentLayout;
use geomhj::hj::NhMode;
use ini::Ini;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{}[{section}] {key}: {msg}", line.map(|l| format!("line {}: ", l)).unwrap_or_default())]
    Value { section: String, key: String, line: Option<usize>, msg: String },
    #[error("missing key `{key}` in [{section}]")]
    Missing { section: String, key: String },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureKind {
    Symplectic,
    Cosymplectic,
    Contact,
    Lcs,
    Nonholonomic,
}

impl StructureKind {
    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Symplectic => "symplectic",
            StructureKind::Cosymplectic => "cosymplectic",
            StructureKind::Contact => "contact",
            StructureKind::Lcs => "lcs",
            StructureKind::Nonholonomic => "nonholonomic",
        }
    }
}

#[derive(Clone, Debug)]
pub struct StructureSpec {
    pub kind: StructureKind,
    /// Lee form components over the positions (LCS).
    pub theta: Option<Vec<Expr>>,
    /// Explicit one-form over the whole chart replacing the canonical `η`.
    pub eta: Option<Vec<Expr>>,
    /// Constraint rows `ψᵃ_i` over the positions (nonholonomic).
    pub constraints: Vec<Vec<Expr>>,
}

#[derive(Clone, Debug)]
pub struct DynamicsConfig {
    /// Field variant named in the file, if any.
    pub variant: Option<String>,
    pub c: Option<Expr>,
    pub beta: Option<Vec<Expr>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    pub relatedness: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSettings {
    pub x0: Vec<f64>,
    pub t1: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Default)]
pub struct Expected {
    pub validate: Option<bool>,
    pub hj: Option<bool>,
    pub audit: Option<String>,
}

/// What an ODE-defined section component is fitted into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OdeTarget {
    Gamma,
    Gz,
    F,
}

/// Scalar ODE `y⁽ⁿ⁾ = rhs(x, y, …, y⁽ⁿ⁻¹⁾)` in companion form.
#[derive(Clone, Debug)]
pub struct OdeSpec {
    pub rhs: Expr,
    pub var: String,
    pub state: Vec<String>,
    pub start: f64,
    pub initial: Vec<f64>,
    pub interval: (f64, f64),
    pub dt: f64,
    pub target: OdeTarget,
}

#[derive(Clone, Debug)]
pub struct SectionSpec {
    pub name: String,
    pub evaluator: Option<String>,
    /// Run when no section is named explicitly.
    pub default: bool,
    pub expect_pass: bool,
    pub gamma: Vec<Expr>,
    pub gamma_t: Option<Expr>,
    pub gz: Option<Expr>,
    pub f: Option<Expr>,
    pub k: Option<f64>,
    pub energy: Option<f64>,
    pub time: String,
    pub energy_var: String,
    pub mode: NhMode,
    pub sbox: SampleBox,
    pub ode: Option<OdeSpec>,
    pub note: Option<String>,
}

impl SectionSpec {
    /// Approach tag matched by `--approach`.
    pub fn approach(&self) -> Option<&'static str> {
        let ode_ii = matches!(self.ode.as_ref().map(|o| o.target), Some(OdeTarget::Gz | OdeTarget::F));
        match self.evaluator.as_deref() {
            Some("contact-i" | "evolution-i") => Some("I"),
            Some("contact-ii" | "evolution-ii") => Some("II"),
            Some(_) => None,
            None if self.gz.is_some() || self.f.is_some() || ode_ii => Some("II"),
            None => Some("I"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub name: String,
    pub summary: String,
    pub seed: u64,
    pub layout: CotangentLayout,
    pub param_names: Vec<String>,
    pub params: Params,
    pub structure: StructureSpec,
    pub hamiltonian: Expr,
    pub dynamics: DynamicsConfig,
    pub sbox: SampleBox,
    pub tol: Tolerances,
    pub flow: Option<FlowSettings>,
    pub output: Outputs,
    pub expected: Expected,
    pub sections: Vec<SectionSpec>,
}

/// Raw file text with section/key line lookup for error messages.
struct Source<'a> {
    text: &'a str,
    ini: Ini,
}

impl<'a> Source<'a> {
    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        let mut cur = String::new();
        for (i, line) in self.text.lines().enumerate() {
            let t = line.trim();
            if let Some(name) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                cur = name.trim().to_string();
            } else if cur == section {
                if let Some((k, _)) = t.split_once('=') {
                    if k.trim() == key {
                        return Some(i + 1);
                    }
                }
            }
        }
        None
    }

    fn err(&self, section: &str, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::Value {
            section: section.into(),
            key: key.into(),
            line: self.line_of(section, key),
            msg: msg.into(),
        }
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.get_from(Some(section), key).map(str::trim).filter(|s| !s.is_empty())
    }

    fn require(&self, section: &str, key: &str) -> Result<&str, ConfigError> {
        self.get(section, key)
            .ok_or_else(|| ConfigError::Missing { section: section.into(), key: key.into() })
    }

    fn number(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(section, key)
            .map(|s| parse_number(s).map_err(|m| self.err(section, key, m)))
            .transpose()
    }

    fn numbers(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(section, key)
            .map(|s| split_list(s, ',').iter().map(|v| parse_number(v)).collect::<Result<Vec<_>, _>>())
            .transpose()
            .map_err(|m| self.err(section, key, m))
    }

    fn expr(&self, section: &str, key: &str, coords: &[String], params: &[String]) -> Result<Option<Expr>, ConfigError> {
        self.get(section, key)
            .map(|s| parse(s, coords, params).map_err(|e| self.err(section, key, e.to_string())))
            .transpose()
    }

    fn exprs(
        &self,
        section: &str,
        key: &str,
        coords: &[String],
        params: &[String],
    ) -> Result<Option<Vec<Expr>>, ConfigError> {
        let Some(s) = self.get(section, key) else { return Ok(None) };
        split_list(s, ',')
            .iter()
            .map(|v| parse(v, coords, params).map_err(|e| self.err(section, key, e.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn flag(&self, section: &str, key: &str) -> Result<Option<bool>, ConfigError> {
        self.get(section, key)
            .map(|s| match s.to_ascii_lowercase().as_str() {
                "true" | "yes" | "pass" | "1" => Ok(true),
                "false" | "no" | "fail" | "0" => Ok(false),
                other => Err(self.err(section, key, format!("expected a boolean or pass/fail, got `{}`", other))),
            })
            .transpose()
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    let t = s.trim();
    t.parse::<f64>().or_else(|_| {
        // Allow simple constant expressions such as `1/2` or `-pi`.
        parse(t, &[] as &[&str], &[] as &[&str])
            .ok()
            .and_then(|e| e.eval_map(&Params::new()).ok())
            .ok_or_else(|| format!("`{}` is not a number", t))
    })
}

fn split_list(s: &str, sep: char) -> Vec<String> {
    s.split(sep).map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()
}

fn names(s: Option<&str>) -> Vec<String> {
    s.map(|v| split_list(v, ',')).unwrap_or_default()
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<ScenarioConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        ScenarioConfig::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| ConfigError::Syntax { line: e.line, msg: e.msg.into() })?;
        let src = Source { text, ini };

        let name = src.get("scenario", "name").unwrap_or("unnamed").to_string();
        let summary = src.get("scenario", "summary").unwrap_or("").to_string();
        let seed = match src.get("scenario", "seed") {
            Some(s) => s.parse::<u64>().map_err(|_| src.err("scenario", "seed", "expected a non-negative integer"))?,
            None => DEFAULT_SEED,
        };

        let q = names(src.get("chart", "q"));
        let p = names(src.get("chart", "p"));
        let extra = names(src.get("chart", "extra"));
        if q.is_empty() {
            return Err(ConfigError::Missing { section: "chart".into(), key: "q".into() });
        }
        let layout = CotangentLayout::new(&q, &p, &extra).map_err(|e| src.err("chart", "p", e.to_string()))?;
        let coords: Vec<String> = layout.chart().coords().to_vec();

        let mut params = Params::new();
        let mut param_names = Vec::new();
        if let Some(sec) = src.ini.section(Some("parameters")) {
            for (k, v) in sec.iter() {
                if coords.iter().any(|c| c == k) {
                    return Err(src.err("parameters", k, "parameter shadows a chart coordinate"));
                }
                let x = parse_number(v).map_err(|m| src.err("parameters", k, m))?;
                params.insert(k.to_string(), x);
                param_names.push(k.to_string());
            }
        }

        let kind = match src.require("structure", "kind")?.to_ascii_lowercase().as_str() {
            "symplectic" => StructureKind::Symplectic,
            "cosymplectic" => StructureKind::Cosymplectic,
            "contact" => StructureKind::Contact,
            "lcs" => StructureKind::Lcs,
            "nonholonomic" => StructureKind::Nonholonomic,
            other => {
                return Err(src.err(
                    "structure",
                    "kind",
                    format!("unknown kind `{}` (symplectic, cosymplectic, contact, lcs, nonholonomic)", other),
                ))
            }
        };
        let theta = src.exprs("structure", "theta", &layout.q, &param_names)?;
        let eta = src.exprs("structure", "eta", &coords, &param_names)?;
        let mut constraints = Vec::new();
        if let Some(s) = src.get("structure", "constraints") {
            for row in split_list(s, ';') {
                let r = split_list(&row, ',')
                    .iter()
                    .map(|v| parse(v, &layout.q, &param_names))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| src.err("structure", "constraints", e.to_string()))?;
                constraints.push(r);
            }
        }
        match kind {
            StructureKind::Lcs if theta.is_none() => {
                return Err(ConfigError::Missing { section: "structure".into(), key: "theta".into() })
            }
            StructureKind::Nonholonomic if constraints.is_empty() => {
                return Err(ConfigError::Missing { section: "structure".into(), key: "constraints".into() })
            }
            _ => {}
        }
        let structure = StructureSpec { kind, theta, eta, constraints };

        let hamiltonian = src
            .expr("hamiltonian", "H", &coords, &param_names)?
            .ok_or_else(|| ConfigError::Missing { section: "hamiltonian".into(), key: "H".into() })?;

        let dynamics = DynamicsConfig {
            variant: src.get("dynamics", "variant").map(str::to_ascii_lowercase),
            c: src.expr("dynamics", "c", &coords, &param_names)?,
            beta: src.exprs("dynamics", "beta", &coords, &param_names)?,
        };

        let mut sbox = SampleBox::new();
        if let Some(sec) = src.ini.section(Some("box")) {
            for (k, _) in sec.iter() {
                let (lo, hi) = interval(&src, "box", k)?;
                sbox = sbox.with(k, lo, hi);
            }
        }

        let tol = Tolerances {
            residual: src.number("tolerances", "residual")?.unwrap_or(geomhj::hj::RESIDUAL_TOL),
            relatedness: src.number("tolerances", "relatedness")?.unwrap_or(geomhj::hj::RELATEDNESS_TOL),
            samples: match src.number("tolerances", "samples")? {
                Some(n) if n >= 1.0 && n.fract() == 0.0 => n as usize,
                Some(_) => return Err(src.err("tolerances", "samples", "expected a positive integer")),
                None => 20,
            },
        };

        let flow = match src.numbers("flow", "x0")? {
            Some(x0) => {
                if x0.len() != coords.len() {
                    return Err(src.err(
                        "flow",
                        "x0",
                        format!("expected {} values ({}), got {}", coords.len(), coords.join(", "), x0.len()),
                    ));
                }
                let t1 = src.number("flow", "t1")?.ok_or_else(|| ConfigError::Missing {
                    section: "flow".into(),
                    key: "t1".into(),
                })?;
                let dt = src.number("flow", "dt")?.unwrap_or(1e-3);
                Some(FlowSettings { x0, t1, dt })
            }
            None => None,
        };

        let output = Outputs {
            csv: src.get("output", "csv").map(PathBuf::from),
            report: src.get("output", "report").map(PathBuf::from),
        };
        let expected = Expected {
            validate: src.flag("expected", "validate")?,
            hj: src.flag("expected", "hj")?,
            audit: src.get("expected", "audit").map(str::to_string),
        };

        let mut sections = Vec::new();
        let headers: Vec<String> = src.ini.sections().flatten().map(str::to_string).collect();
        for h in &headers {
            let Some(sname) = h.strip_prefix("section.").or((h == "section").then_some("default")) else { continue };
            sections.push(section(&src, h, sname, &layout, &param_names, &sbox)?);
        }

        for s in &sections {
            check_section_shape(&src, s, &layout, kind)?;
        }

        Ok(ScenarioConfig {
            name,
            summary,
            seed,
            layout,
            param_names,
            params,
            structure,
            hamiltonian,
            dynamics,
            sbox,
            tol,
            flow,
            output,
            expected,
            sections,
        })
    }

    pub fn coords(&self) -> Vec<String> {
        self.layout.chart().coords().to_vec()
    }
}

fn interval(src: &Source, section: &str, key: &str) -> Result<(f64, f64), ConfigError> {
    let v = src.numbers(section, key)?.unwrap_or_default();
    match v.as_slice() {
        [lo, hi] if lo <= hi => Ok((*lo, *hi)),
        [_, _] => Err(src.err(section, key, "empty interval")),
        _ => Err(src.err(section, key, "expected `lo, hi`")),
    }
}

fn section(
    src: &Source,
    header: &str,
    name: &str,
    layout: &CotangentLayout,
    params: &[String],
    global: &SampleBox,
) -> Result<SectionSpec, ConfigError> {
    let time = src.get(header, "time").unwrap_or("t").to_string();
    let energy_var = src.get(header, "energy_var").unwrap_or("e").to_string();
    let mut coords: Vec<String> = layout.q.iter().chain(&layout.extra).cloned().collect();
    let evaluator = src.get(header, "evaluator").map(|s| s.to_ascii_lowercase());
    if evaluator.as_deref() == Some("tdep") && !coords.contains(&time) {
        coords.insert(0, time.clone());
    }
    let mut sbox = global.clone();
    if let Some(sec) = src.ini.section(Some(header)) {
        for (k, _) in sec.iter() {
            if let Some(c) = k.strip_prefix("box.") {
                let (lo, hi) = interval(src, header, k)?;
                sbox = sbox.with(c, lo, hi);
            }
        }
    }
    let mode = match src.get(header, "mode").map(str::to_ascii_lowercase).as_deref() {
        None | Some("complete") => NhMode::Complete,
        Some("ideal") => NhMode::Ideal,
        Some(other) => return Err(src.err(header, "mode", format!("unknown mode `{}` (ideal, complete)", other))),
    };

    let ode = match src.get(header, "ode") {
        None => None,
        Some(_) => {
            if layout.dof() != 1 {
                return Err(src.err(header, "ode", "ODE-defined sections need a single position coordinate"));
            }
            let var = layout.q[0].clone();
            let state = names(src.get(header, "ode.state"));
            let state = if state.is_empty() { vec!["y".to_string()] } else { state };
            let mut ode_coords = vec![var.clone()];
            ode_coords.extend(state.iter().cloned());
            let rhs = src.expr(header, "ode", &ode_coords, params)?.expect("present");
            let initial = src.numbers(header, "ode.initial")?.ok_or_else(|| ConfigError::Missing {
                section: header.into(),
                key: "ode.initial".into(),
            })?;
            if initial.len() != state.len() {
                return Err(src.err(header, "ode.initial", format!("expected {} values", state.len())));
            }
            let (a, b) = match src.get(header, "ode.interval") {
                Some(_) => interval(src, header, "ode.interval")?,
                None => sbox.range(&var),
            };
            let start = src.number(header, "ode.start")?.unwrap_or(a);
            if start > a {
                return Err(src.err(header, "ode.start", "integration must start at or before the fit interval"));
            }
            let dt = src.number(header, "ode.dt")?.unwrap_or(1e-4);
            if !(dt > 0.0) {
                return Err(src.err(header, "ode.dt", "step must be positive"));
            }
            let target = match src.get(header, "ode.target").unwrap_or("gamma") {
                "gamma" => OdeTarget::Gamma,
                "gz" => OdeTarget::Gz,
                "f" => OdeTarget::F,
                other => return Err(src.err(header, "ode.target", format!("unknown target `{}` (gamma, gz, f)", other))),
            };
            Some(OdeSpec { rhs, var, state, start, initial, interval: (a, b), dt, target })
        }
    };

    Ok(SectionSpec {
        name: name.to_string(),
        evaluator,
        default: src.flag(header, "default")?.unwrap_or(true),
        expect_pass: src.flag(header, "expect")?.unwrap_or(true),
        gamma: src.exprs(header, "gamma", &coords, params)?.unwrap_or_default(),
        gamma_t: src.expr(header, "gamma_t", &coords, params)?,
        gz: src.expr(header, "gz", &coords, params)?,
        f: src.expr(header, "f", &coords, params)?,
        k: src.number(header, "k")?,
        energy: src.number(header, "energy")?,
        time,
        energy_var,
        mode,
        sbox,
        ode,
        note: src.get(header, "note").map(str::to_string),
    })
}

pub const EVALUATORS: &[&str] = &[
    "symplectic",
    "tdep",
    "forced",
    "conformal",
    "cosymplectic",
    "lcs",
    "contact-i",
    "contact-ii",
    "evolution-i",
    "evolution-ii",
    "nonholonomic",
];

fn check_section_shape(src: &Source, s: &SectionSpec, layout: &CotangentLayout, _kind: StructureKind) -> Result<(), ConfigError> {
    let header = if s.name == "default" && src.ini.section(Some("section")).is_some() {
        "section".to_string()
    } else {
        format!("section.{}", s.name)
    };
    if let Some(e) = &s.evaluator {
        if !EVALUATORS.contains(&e.as_str()) {
            return Err(src.err(&header, "evaluator", format!("unknown evaluator `{}` ({})", e, EVALUATORS.join(", "))));
        }
    }
    let fitted_gamma = matches!(s.ode.as_ref().map(|o| o.target), Some(OdeTarget::Gamma));
    let n = s.gamma.len() + usize::from(fitted_gamma);
    let target = s.ode.as_ref().map(|o| o.target);
    let derived = s.f.is_some() || matches!(target, Some(OdeTarget::F))
        || ((s.gz.is_some() || matches!(target, Some(OdeTarget::Gz))) && s.gamma.is_empty());
    if !derived && n != layout.dof() {
        return Err(src.err(
            &header,
            "gamma",
            format!("expected {} component(s) ({}), got {}", layout.dof(), layout.p.join(", "), n),
        ));
    }
    for g in s.gamma.iter().chain(&s.gz).chain(&s.f).chain(&s.gamma_t) {
        if let Some(bad) = g.free_symbols().into_iter().find(|v| layout.p.contains(v)) {
            return Err(src.err(&header, "gamma", format!("section components cannot depend on the momentum `{}`", bad)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[chart]\nq = x\np = y\n\n[parameters]\na = 2\n\n[structure]\nkind = symplectic\n\n[hamiltonian]\nH = \"a*x*y\"\n";

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = ScenarioConfig::from_str(BASE).unwrap();
        assert_eq!(cfg.name, "unnamed");
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.coords(), ["x", "y"]);
        assert_eq!(cfg.structure.kind, StructureKind::Symplectic);
        assert_eq!(cfg.param_names, ["a"]);
        assert!(cfg.flow.is_none());
    }

    #[test]
    fn missing_chart_is_reported() {
        let err = ScenarioConfig::from_str("[structure]\nkind = symplectic\n").unwrap_err();
        assert!(matches!(err, ConfigError::Missing { ref key, .. } if key == "q"), "{err}");
    }

    #[test]
    fn parameter_cannot_shadow_a_coordinate() {
        let err = ScenarioConfig::from_str(&BASE.replace("a = 2", "x = 2")).unwrap_err();
        assert!(err.to_string().contains("shadows"), "{err}");
        assert!(err.to_string().starts_with("line 6"), "{err}");
    }

    #[test]
    fn bad_seed_and_interval_are_value_errors() {
        let err = ScenarioConfig::from_str(&format!("[scenario]\nseed = -1\n\n{BASE}")).unwrap_err();
        assert!(matches!(err, ConfigError::Value { .. }), "{err}");
        let err = ScenarioConfig::from_str(&format!("{BASE}\n[box]\nx = 1, 0\n")).unwrap_err();
        assert!(err.to_string().contains("empty interval"), "{err}");
    }

    #[test]
    fn section_approach_follows_its_components() {
        let text = format!("{BASE}\n[section.one]\ngamma = \"x\"\n");
        let cfg = ScenarioConfig::from_str(&text).unwrap();
        assert_eq!(cfg.sections.len(), 1);
        assert_eq!(cfg.sections[0].name, "one");
        assert_eq!(cfg.sections[0].approach(), Some("I"));
    }
}
