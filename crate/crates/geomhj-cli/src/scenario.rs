//! The bundled scenario files.

use crate::config::ScenarioConfig;
use anyhow::{anyhow, Context, Result};

pub struct Builtin {
    pub name: &'static str,
    pub text: &'static str,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin { name: "host-parasite", text: include_str!("../scenarios/host-parasite.ini") },
    Builtin { name: "damped-oscillator", text: include_str!("../scenarios/damped-oscillator.ini") },
    Builtin { name: "gaussian-isokinetic", text: include_str!("../scenarios/gaussian-isokinetic.ini") },
    Builtin { name: "parachute", text: include_str!("../scenarios/parachute.ini") },
    Builtin { name: "free-particle-nh", text: include_str!("../scenarios/free-particle-nh.ini") },
];

pub fn find(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

pub fn load(name: &str) -> Result<ScenarioConfig> {
    let b = find(name).ok_or_else(|| {
        let names: Vec<&str> = BUILTINS.iter().map(|b| b.name).collect();
        anyhow!("no builtin scenario `{}` (have: {})", name, names.join(", "))
    })?;
    ScenarioConfig::from_str(b.text).with_context(|| format!("builtin scenario `{}`", name))
}
