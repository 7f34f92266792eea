//! Scenario files: a small INI dialect with `[section]` headers and
//! `key = value` lines. Parsing is strict (unknown or duplicate keys are
//! errors), serialization is canonical (fixed section order, deterministic
//! float text), and every scenario has a stable identity hash computed from
//! the sorted `section.key=value` lines.

use crate::grid::fmt_f64;
use crate::model::{
    BoundaryCondition, InitialProfile, MaterialParams, Profile, Scenario,
};
use crate::solver::SolverConfig;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("duplicate key '{0}'")]
    DuplicateKey(String),
    #[error("missing required key '{0}'")]
    MissingKey(String),
    #[error("key '{key}': {message}")]
    BadValue { key: String, message: String },
}

const KNOWN_KEYS: &[&str] = &[
    "domain.dim",
    "domain.extent",
    "lens.min",
    "lens.max",
    "materials.plus.lambda",
    "materials.plus.rho",
    "materials.plus.b",
    "materials.plus.delta",
    "materials.plus.k",
    "materials.minus.lambda",
    "materials.minus.rho",
    "materials.minus.b",
    "materials.minus.delta",
    "materials.minus.k",
    "physics.q",
    "grid.n",
    "time.dt",
    "time.T",
    "bc.type",
    "bc.neumann_profile",
    "bc.neumann_amplitude",
    "initial.u0_profile",
    "initial.u0_amplitude",
    "initial.u1_profile",
    "initial.u1_amplitude",
    "source.mms",
    "solver.picard_tol",
    "solver.picard_max_iters",
    "solver.linear_tol",
    "solver.linear_max_iters",
    "solver.degeneracy_floor",
    "output.snapshot_stride",
];

fn split_sections(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line: lineno + 1,
                message: format!("unterminated section header '{line}'"),
            })?;
            section = name.trim().to_string();
            if section.is_empty() {
                return Err(ConfigError::Syntax {
                    line: lineno + 1,
                    message: "empty section name".into(),
                });
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: lineno + 1,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        if section.is_empty() {
            return Err(ConfigError::Syntax {
                line: lineno + 1,
                message: "key outside of any [section]".into(),
            });
        }
        let full = format!("{}.{}", section, key.trim());
        if !KNOWN_KEYS.contains(&full.as_str()) {
            return Err(ConfigError::UnknownKey(full));
        }
        if map.insert(full.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError::DuplicateKey(full));
        }
    }
    Ok(map)
}

struct Fields {
    map: BTreeMap<String, String>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<String, ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::MissingKey(key.to_string()))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ConfigError> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| ConfigError::BadValue {
            key: key.to_string(),
            message: format!("cannot parse '{raw}'"),
        })
    }

    fn parse_or<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                message: format!("cannot parse '{raw}'"),
            }),
        }
    }
}

fn parse_components(key: &str, raw: &str, dim: usize) -> Result<[f64; 2], ConfigError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != dim {
        return Err(ConfigError::BadValue {
            key: key.to_string(),
            message: format!("expected {dim} comma-separated components, got {}", parts.len()),
        });
    }
    let mut out = [0.0; 2];
    for (r, p) in parts.iter().enumerate() {
        out[r] = p.parse().map_err(|_| ConfigError::BadValue {
            key: key.to_string(),
            message: format!("cannot parse component '{p}'"),
        })?;
    }
    Ok(out)
}

fn parse_profile(key: &str, raw: &str) -> Result<Profile, ConfigError> {
    Profile::from_name(raw).ok_or_else(|| ConfigError::BadValue {
        key: key.to_string(),
        message: format!("unknown profile '{raw}'"),
    })
}

fn parse_material(f: &mut Fields, side: &str) -> Result<Option<MaterialParams>, ConfigError> {
    let prefix = format!("materials.{side}");
    let keys = ["lambda", "rho", "b", "delta", "k"];
    let present: Vec<bool> =
        keys.iter().map(|k| f.map.contains_key(&format!("{prefix}.{k}"))).collect();
    if present.iter().all(|&p| !p) {
        return Ok(None);
    }
    if !present.iter().all(|&p| p) {
        let missing = keys[present.iter().position(|&p| !p).unwrap()];
        return Err(ConfigError::MissingKey(format!("{prefix}.{missing}")));
    }
    Ok(Some(MaterialParams {
        lambda: f.parse(&format!("{prefix}.lambda"))?,
        rho: f.parse(&format!("{prefix}.rho"))?,
        b: f.parse(&format!("{prefix}.b"))?,
        delta: f.parse(&format!("{prefix}.delta"))?,
        k: f.parse(&format!("{prefix}.k"))?,
    }))
}

/// Parses a scenario file. Structural problems (syntax, unknown keys,
/// unparseable values, missing required keys) are errors here; physical
/// admissibility is a separate pass through
/// [`crate::model::validate_scenario`].
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let mut f = Fields { map: split_sections(text)? };

    let dim: usize = f.parse("domain.dim")?;
    if dim != 1 && dim != 2 {
        return Err(ConfigError::BadValue {
            key: "domain.dim".into(),
            message: format!("must be 1 or 2, got {dim}"),
        });
    }
    let extent = parse_components("domain.extent", &f.require("domain.extent")?, dim)?;

    let lens_min = f.take("lens.min");
    let lens_max = f.take("lens.max");
    let lens = match (lens_min, lens_max) {
        (None, None) => None,
        (Some(lo), Some(hi)) => Some((
            parse_components("lens.min", &lo, dim)?,
            parse_components("lens.max", &hi, dim)?,
        )),
        (Some(_), None) => return Err(ConfigError::MissingKey("lens.max".into())),
        (None, Some(_)) => return Err(ConfigError::MissingKey("lens.min".into())),
    };

    let minus = parse_material(&mut f, "minus")?
        .ok_or_else(|| ConfigError::MissingKey("materials.minus.lambda".into()))?;
    let plus = parse_material(&mut f, "plus")?;
    if lens.is_some() && plus.is_none() {
        return Err(ConfigError::MissingKey("materials.plus.lambda".into()));
    }

    let bc = match f.take("bc.type").as_deref().unwrap_or("dirichlet") {
        "dirichlet" => {
            for k in ["bc.neumann_profile", "bc.neumann_amplitude"] {
                if f.map.contains_key(k) {
                    return Err(ConfigError::BadValue {
                        key: k.into(),
                        message: "only meaningful when bc.type = neumann".into(),
                    });
                }
            }
            BoundaryCondition::Dirichlet
        }
        "neumann" => BoundaryCondition::Neumann {
            profile: parse_profile("bc.neumann_profile", &f.require("bc.neumann_profile")?)?,
            amplitude: f.parse("bc.neumann_amplitude")?,
        },
        other => {
            return Err(ConfigError::BadValue {
                key: "bc.type".into(),
                message: format!("must be 'dirichlet' or 'neumann', got '{other}'"),
            })
        }
    };

    let initial = |f: &mut Fields, which: &str| -> Result<InitialProfile, ConfigError> {
        let pkey = format!("initial.{which}_profile");
        let akey = format!("initial.{which}_amplitude");
        let profile = match f.take(&pkey) {
            Some(raw) => parse_profile(&pkey, &raw)?,
            None => Profile::Zero,
        };
        let amplitude = f.parse_or(&akey, 0.0)?;
        Ok(InitialProfile { profile, amplitude })
    };
    let u0 = initial(&mut f, "u0")?;
    let u1 = initial(&mut f, "u1")?;

    let scenario = Scenario {
        dim,
        extent,
        lens,
        material_plus: plus.unwrap_or(minus),
        material_minus: minus,
        q: f.parse("physics.q")?,
        bc,
        u0,
        u1,
        source_mms: f.take("source.mms"),
        grid_n: f.parse("grid.n")?,
        dt: f.parse("time.dt")?,
        t_end: f.parse("time.T")?,
        solver: SolverConfig {
            picard_tol: f.parse_or("solver.picard_tol", 1e-12)?,
            picard_max_iters: f.parse_or("solver.picard_max_iters", 50)?,
            linear_tol: f.parse_or("solver.linear_tol", 1e-12)?,
            linear_max_iters: match f.take("solver.linear_max_iters") {
                None => None,
                Some(raw) => Some(raw.parse().map_err(|_| ConfigError::BadValue {
                    key: "solver.linear_max_iters".into(),
                    message: format!("cannot parse '{raw}'"),
                })?),
            },
            degeneracy_floor: f.parse_or("solver.degeneracy_floor", 0.1)?,
        },
        snapshot_stride: f.parse_or("output.snapshot_stride", 1)?,
    };
    debug_assert!(f.map.is_empty(), "unconsumed keys: {:?}", f.map.keys());
    Ok(scenario)
}

fn components_text(v: &[f64; 2], dim: usize) -> String {
    (0..dim).map(|r| fmt_f64(v[r])).collect::<Vec<_>>().join(", ")
}

/// Canonical `section.key=value` lines, sorted. This is both the hash
/// input and the source for [`scenario_to_text`], so two scenarios hash
/// equal exactly when their canonical files are byte-equal.
pub fn canonical_lines(s: &Scenario) -> Vec<String> {
    let mut lines = Vec::new();
    let mut push = |k: &str, v: String| lines.push(format!("{k}={v}"));
    push("domain.dim", s.dim.to_string());
    push("domain.extent", components_text(&s.extent, s.dim));
    if let Some((lo, hi)) = &s.lens {
        push("lens.min", components_text(lo, s.dim));
        push("lens.max", components_text(hi, s.dim));
    }
    let mut material = |side: &str, m: &MaterialParams| {
        push(&format!("materials.{side}.lambda"), fmt_f64(m.lambda));
        push(&format!("materials.{side}.rho"), fmt_f64(m.rho));
        push(&format!("materials.{side}.b"), fmt_f64(m.b));
        push(&format!("materials.{side}.delta"), fmt_f64(m.delta));
        push(&format!("materials.{side}.k"), fmt_f64(m.k));
    };
    material("minus", &s.material_minus);
    if s.lens.is_some() {
        material("plus", &s.material_plus);
    }
    push("physics.q", fmt_f64(s.q));
    push("grid.n", s.grid_n.to_string());
    push("time.dt", fmt_f64(s.dt));
    push("time.T", fmt_f64(s.t_end));
    match s.bc {
        BoundaryCondition::Dirichlet => push("bc.type", "dirichlet".into()),
        BoundaryCondition::Neumann { profile, amplitude } => {
            push("bc.type", "neumann".into());
            push("bc.neumann_profile", profile.name().into());
            push("bc.neumann_amplitude", fmt_f64(amplitude));
        }
    }
    push("initial.u0_profile", s.u0.profile.name().into());
    push("initial.u0_amplitude", fmt_f64(s.u0.amplitude));
    push("initial.u1_profile", s.u1.profile.name().into());
    push("initial.u1_amplitude", fmt_f64(s.u1.amplitude));
    if let Some(name) = &s.source_mms {
        push("source.mms", name.clone());
    }
    push("solver.picard_tol", fmt_f64(s.solver.picard_tol));
    push("solver.picard_max_iters", s.solver.picard_max_iters.to_string());
    push("solver.linear_tol", fmt_f64(s.solver.linear_tol));
    if let Some(m) = s.solver.linear_max_iters {
        push("solver.linear_max_iters", m.to_string());
    }
    push("solver.degeneracy_floor", fmt_f64(s.solver.degeneracy_floor));
    push("output.snapshot_stride", s.snapshot_stride.to_string());
    lines.sort();
    lines
}

/// Hex SHA-256 over the sorted canonical lines, one per line with a
/// trailing newline each.
pub fn scenario_hash(s: &Scenario) -> String {
    let mut hasher = Sha256::new();
    for line in canonical_lines(s) {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Renders the scenario as a parseable file grouped by section.
pub fn scenario_to_text(s: &Scenario) -> String {
    let mut by_section: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for line in canonical_lines(s) {
        let (key, value) = line.split_once('=').expect("canonical lines are key=value");
        let (section, field) = key.rsplit_once('.').expect("keys are section.field");
        by_section
            .entry(section.to_string())
            .or_default()
            .push((field.to_string(), value.to_string()));
    }
    // Readable fixed order, physics before numerics before bookkeeping.
    let order = [
        "domain",
        "lens",
        "materials.minus",
        "materials.plus",
        "physics",
        "grid",
        "time",
        "bc",
        "initial",
        "source",
        "solver",
        "output",
    ];
    let mut out = String::new();
    for section in order {
        if let Some(entries) = by_section.get(section) {
            out.push_str(&format!("[{section}]\n"));
            for (field, value) in entries {
                out.push_str(&format!("{field} = {value}\n"));
            }
            out.push('\n');
        }
    }
    out.trim_end().to_string() + "\n"
}
