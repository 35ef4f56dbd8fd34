//! Typed job files and their structural validation.
//!
//! A job file is one JSON object with fields `command`, `parameters`,
//! `output`, `seed`, and optionally `schema_version`. [`schema_validate`]
//! walks the whole document and reports *every* problem at once, each
//! tagged with the dotted path of the offending field, so a batch user
//! fixes a file in a single round trip. Module preconditions that are
//! checkable from the file alone (dimension floors, decreasing ε lists,
//! grid shapes) are enforced here, before any computation starts.

use std::fmt;

use hrlab_core::geometry::{Dimension, DomainSpec, PotentialSpec};
use hrlab_core::identities::CheckTarget;
use hrlab_core::quadrature::GridSpec;
use hrlab_core::rayleigh::FamilyKind;
use hrlab_core::supersolution::SupersolutionAnsatz;
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

/// Version stamped into every JSON output and accepted in job files.
pub const SCHEMA_VERSION: u64 = 1;

const TOP_LEVEL_KEYS: [&str; 5] = ["schema_version", "command", "parameters", "output", "seed"];

/// Largest ambient dimension any command accepts; guards against jobs that
/// would allocate absurd coordinate vectors.
pub const MAX_DIMENSION: u32 = 64;

/// One structural problem in a job file, located by a dotted path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Which subcommand a job file drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Constants,
    Certify,
    RayleighSweep,
    EigEstimate,
    CheckIdentities,
}

impl CommandKind {
    pub const ALL: [CommandKind; 5] = [
        CommandKind::Constants,
        CommandKind::Certify,
        CommandKind::RayleighSweep,
        CommandKind::EigEstimate,
        CommandKind::CheckIdentities,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Constants => "constants",
            CommandKind::Certify => "certify",
            CommandKind::RayleighSweep => "rayleigh-sweep",
            CommandKind::EigEstimate => "eig-estimate",
            CommandKind::CheckIdentities => "check-identities",
        }
    }

    pub fn from_name(name: &str) -> Option<CommandKind> {
        CommandKind::ALL.iter().copied().find(|c| c.name() == name)
    }
}

/// A fully validated job: every field typed, every file-checkable
/// precondition already enforced.
#[derive(Debug, Clone)]
pub struct JobConfig {
    pub command: CommandKind,
    pub output: String,
    pub seed: u64,
    pub params: CommandParams,
}

/// Typed command parameters, one variant per subcommand.
#[derive(Debug, Clone)]
pub enum CommandParams {
    Constants {
        d_min: u32,
        d_max: u32,
    },
    Certify(Box<CertifySpec>),
    RayleighSweep {
        family: FamilyKind,
        d: Dimension,
        eps: Vec<f64>,
        cutoff_radius: f64,
    },
    EigEstimate {
        d: Dimension,
        nodes: usize,
        delta: f64,
        outer_radius: f64,
    },
    CheckIdentities {
        /// `None` runs every check defined in dimension `d`.
        which: Option<CheckTarget>,
        d: Dimension,
        count: u32,
    },
}

/// What a certify job verifies; the fields mirror the engine entry points.
#[derive(Debug, Clone)]
pub enum CertifySpec {
    Hardy {
        d: Dimension,
        potential: PotentialSpec,
        ansatz: SupersolutionAnsatz,
        domain: DomainSpec,
        grid: GridSpec,
    },
    Rellich {
        d: Dimension,
        potential: PotentialSpec,
        ansatz: SupersolutionAnsatz,
        grid: GridSpec,
    },
    FallLocal {
        d: Dimension,
        r: f64,
        /// Falls back to the standard local grid when absent.
        grid: Option<GridSpec>,
    },
}

impl CertifySpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            CertifySpec::Hardy { .. } => "hardy",
            CertifySpec::Rellich { .. } => "rellich",
            CertifySpec::FallLocal { .. } => "fall-local",
        }
    }

    pub fn dimension(&self) -> Dimension {
        match self {
            CertifySpec::Hardy { d, .. }
            | CertifySpec::Rellich { d, .. }
            | CertifySpec::FallLocal { d, .. } => *d,
        }
    }
}

/// Validate a raw job file and parse it into a typed [`JobConfig`].
///
/// Collects all violations instead of stopping at the first.
pub fn schema_validate(raw: &str) -> Result<JobConfig, Vec<Violation>> {
    let value: Value = match serde_json::from_str(raw) {
        Ok(v) => v,
        Err(e) => return Err(vec![Violation::new("$", format!("not valid JSON: {e}"))]),
    };
    let Some(root) = value.as_object() else {
        return Err(vec![Violation::new("$", "job file must be a JSON object")]);
    };

    let mut v: Vec<Violation> = Vec::new();
    for key in root.keys() {
        if !TOP_LEVEL_KEYS.contains(&key.as_str()) {
            v.push(Violation::new(key.clone(), "unknown field"));
        }
    }
    if let Some(version) = root.get("schema_version") {
        if version.as_u64() != Some(SCHEMA_VERSION) {
            v.push(Violation::new(
                "schema_version",
                format!("must be the integer {SCHEMA_VERSION}"),
            ));
        }
    }

    let command = match root.get("command") {
        None => {
            v.push(Violation::new("command", "required field is missing"));
            None
        }
        Some(Value::String(s)) => {
            let parsed = CommandKind::from_name(s);
            if parsed.is_none() {
                v.push(Violation::new(
                    "command",
                    format!("unknown command {s:?}; expected one of {}", name_list(&CommandKind::ALL.map(CommandKind::name))),
                ));
            }
            parsed
        }
        Some(_) => {
            v.push(Violation::new("command", "must be a string"));
            None
        }
    };

    let output = match root.get("output") {
        None => {
            v.push(Violation::new("output", "required field is missing"));
            None
        }
        Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
        Some(_) => {
            v.push(Violation::new("output", "must be a non-empty path string"));
            None
        }
    };

    let seed = match root.get("seed") {
        None => {
            v.push(Violation::new("seed", "required field is missing"));
            None
        }
        Some(value) => match value.as_u64() {
            Some(s) => Some(s),
            None => {
                v.push(Violation::new("seed", "must be a nonnegative integer"));
                None
            }
        },
    };

    let params = match (command, root.get("parameters")) {
        (_, None) => {
            v.push(Violation::new("parameters", "required field is missing"));
            None
        }
        (Some(command), Some(Value::Object(p))) => validate_params(command, p, &mut v),
        (Some(_), Some(_)) => {
            v.push(Violation::new("parameters", "must be an object"));
            None
        }
        // Without a command there is no schema to check the parameters
        // against; the command violation is already recorded.
        (None, Some(_)) => None,
    };

    match (command, output, seed, params) {
        (Some(command), Some(output), Some(seed), Some(params)) if v.is_empty() => {
            Ok(JobConfig { command, output, seed, params })
        }
        _ => {
            debug_assert!(!v.is_empty());
            Err(v)
        }
    }
}

fn name_list(names: &[&str]) -> String {
    names.iter().map(|n| format!("{n:?}")).collect::<Vec<_>>().join(", ")
}

fn reject_unknown(p: &Map<String, Value>, allowed: &[&str], v: &mut Vec<Violation>) {
    for key in p.keys() {
        if !allowed.contains(&key.as_str()) {
            v.push(Violation::new(format!("parameters.{key}"), "unknown field"));
        }
    }
}

fn required_integer(
    p: &Map<String, Value>,
    key: &str,
    lo: u64,
    hi: u64,
    v: &mut Vec<Violation>,
) -> Option<u64> {
    let path = || format!("parameters.{key}");
    match p.get(key) {
        None => {
            v.push(Violation::new(path(), "required field is missing"));
            None
        }
        Some(value) => match value.as_u64() {
            Some(n) if (lo..=hi).contains(&n) => Some(n),
            _ => {
                v.push(Violation::new(path(), format!("must be an integer in [{lo}, {hi}]")));
                None
            }
        },
    }
}

fn required_positive_number(p: &Map<String, Value>, key: &str, v: &mut Vec<Violation>) -> Option<f64> {
    match p.get(key) {
        None => {
            v.push(Violation::new(format!("parameters.{key}"), "required field is missing"));
            None
        }
        Some(value) => positive_number(value, &format!("parameters.{key}"), v),
    }
}

fn positive_number(value: &Value, path: &str, v: &mut Vec<Violation>) -> Option<f64> {
    match value.as_f64() {
        Some(x) if x > 0.0 && x.is_finite() => Some(x),
        _ => {
            v.push(Violation::new(path, "must be a finite positive number"));
            None
        }
    }
}

fn required_string<'a>(
    p: &'a Map<String, Value>,
    key: &str,
    v: &mut Vec<Violation>,
) -> Option<&'a str> {
    match p.get(key) {
        None => {
            v.push(Violation::new(format!("parameters.{key}"), "required field is missing"));
            None
        }
        Some(Value::String(s)) => Some(s),
        Some(_) => {
            v.push(Violation::new(format!("parameters.{key}"), "must be a string"));
            None
        }
    }
}

/// Deserialize a required sub-object into its domain type; shape errors are
/// reported at the field's path.
fn required_shape<T: DeserializeOwned>(
    p: &Map<String, Value>,
    key: &str,
    v: &mut Vec<Violation>,
) -> Option<T> {
    match p.get(key) {
        None => {
            v.push(Violation::new(format!("parameters.{key}"), "required field is missing"));
            None
        }
        Some(value) => shape(value, &format!("parameters.{key}"), v),
    }
}

fn shape<T: DeserializeOwned>(value: &Value, path: &str, v: &mut Vec<Violation>) -> Option<T> {
    match serde_json::from_value(value.clone()) {
        Ok(t) => Some(t),
        Err(e) => {
            v.push(Violation::new(path, format!("does not match the expected shape: {e}")));
            None
        }
    }
}

fn forbid(p: &Map<String, Value>, keys: &[&str], why: &str, v: &mut Vec<Violation>) {
    for key in keys {
        if p.contains_key(*key) {
            v.push(Violation::new(format!("parameters.{key}"), why.to_string()));
        }
    }
}

fn dimension_field(
    p: &Map<String, Value>,
    min: u32,
    context: &str,
    v: &mut Vec<Violation>,
) -> Option<Dimension> {
    let raw = required_integer(p, "d", 2, u64::from(MAX_DIMENSION), v)?;
    let d = Dimension::new(raw as u32).expect("range-checked above");
    if d.get() < min {
        v.push(Violation::new("parameters.d", format!("{context} requires d >= {min}")));
        return None;
    }
    Some(d)
}

fn validate_params(
    command: CommandKind,
    p: &Map<String, Value>,
    v: &mut Vec<Violation>,
) -> Option<CommandParams> {
    match command {
        CommandKind::Constants => {
            reject_unknown(p, &["d_min", "d_max"], v);
            let d_min = required_integer(p, "d_min", 2, u64::from(MAX_DIMENSION), v);
            let d_max = required_integer(p, "d_max", 2, u64::from(MAX_DIMENSION), v);
            let (d_min, d_max) = (d_min?, d_max?);
            if d_max < d_min {
                v.push(Violation::new("parameters.d_max", "must be at least d_min"));
                return None;
            }
            Some(CommandParams::Constants { d_min: d_min as u32, d_max: d_max as u32 })
        }
        CommandKind::Certify => validate_certify(p, v).map(|spec| CommandParams::Certify(Box::new(spec))),
        CommandKind::RayleighSweep => {
            reject_unknown(p, &["family", "d", "eps", "cutoff_r"], v);
            let family = match required_string(p, "family", v) {
                Some(name) => {
                    let parsed = family_from_name(name);
                    if parsed.is_none() {
                        v.push(Violation::new(
                            "parameters.family",
                            format!(
                                "unknown family {name:?}; expected one of {}",
                                name_list(&["hardy-interior", "half-space", "hardy-rellich"])
                            ),
                        ));
                    }
                    parsed
                }
                None => None,
            };
            let min_d = match family {
                Some(FamilyKind::HalfSpace) => 2,
                _ => 3,
            };
            let d = dimension_field(p, min_d, "this minimizing family", v);
            let eps = validate_eps_list(p, v);
            let cutoff_radius = match p.get("cutoff_r") {
                None => Some(1.0),
                Some(value) => positive_number(value, "parameters.cutoff_r", v),
            };
            Some(CommandParams::RayleighSweep {
                family: family?,
                d: d?,
                eps: eps?,
                cutoff_radius: cutoff_radius?,
            })
        }
        CommandKind::EigEstimate => {
            reject_unknown(p, &["d", "nodes", "delta", "r_outer"], v);
            let d = dimension_field(p, 3, "the eigenvalue estimate", v);
            let nodes = required_integer(p, "nodes", 8, 1_000_000, v);
            let delta = required_positive_number(p, "delta", v);
            let outer = required_positive_number(p, "r_outer", v);
            if let (Some(delta), Some(outer)) = (delta, outer) {
                if outer <= delta {
                    v.push(Violation::new(
                        "parameters.r_outer",
                        "must exceed the inner truncation radius delta",
                    ));
                    return None;
                }
            }
            Some(CommandParams::EigEstimate {
                d: d?,
                nodes: nodes? as usize,
                delta: delta?,
                outer_radius: outer?,
            })
        }
        CommandKind::CheckIdentities => {
            reject_unknown(p, &["which", "d", "count"], v);
            let which = match p.get("which") {
                None => Some(None),
                Some(Value::String(s)) if s == "all" => Some(None),
                Some(Value::String(s)) => match CheckTarget::from_name(s) {
                    Some(t) => Some(Some(t)),
                    None => {
                        v.push(Violation::new(
                            "parameters.which",
                            format!(
                                "unknown check {s:?}; expected \"all\" or one of {}",
                                name_list(&CheckTarget::ALL.map(|t| t.name()))
                            ),
                        ));
                        None
                    }
                },
                Some(_) => {
                    v.push(Violation::new("parameters.which", "must be a string"));
                    None
                }
            };
            let min_d = match which {
                Some(Some(t)) => t.min_dimension(),
                // "all" silently skips checks whose floor exceeds d, so any
                // valid dimension is acceptable.
                _ => 2,
            };
            let d = dimension_field(p, min_d, "the requested check", v);
            let count = required_integer(p, "count", 1, 100_000, v);
            Some(CommandParams::CheckIdentities { which: which?, d: d?, count: count? as u32 })
        }
    }
}

fn validate_certify(p: &Map<String, Value>, v: &mut Vec<Violation>) -> Option<CertifySpec> {
    reject_unknown(p, &["kind", "d", "grid", "potential", "ansatz", "domain", "r"], v);
    let kind = match required_string(p, "kind", v) {
        Some(s @ ("hardy" | "rellich" | "fall-local")) => Some(s.to_string()),
        Some(other) => {
            v.push(Violation::new(
                "parameters.kind",
                format!(
                    "unknown certificate kind {other:?}; expected one of {}",
                    name_list(&["hardy", "rellich", "fall-local"])
                ),
            ));
            None
        }
        None => None,
    };

    match kind?.as_str() {
        "hardy" => {
            let d = dimension_field(p, 2, "second-order certification", v);
            let potential: Option<PotentialSpec> = required_shape(p, "potential", v);
            let ansatz: Option<SupersolutionAnsatz> = required_shape(p, "ansatz", v);
            let domain: Option<DomainSpec> = required_shape(p, "domain", v);
            let grid: Option<GridSpec> = required_shape(p, "grid", v);
            forbid(p, &["r"], "only valid for kind \"fall-local\"", v);
            let (d, potential, ansatz, domain, grid) = (d?, potential?, ansatz?, domain?, grid?);
            check_semantics("parameters.potential", potential.validate(d), v);
            check_semantics("parameters.ansatz", ansatz.validate(d), v);
            check_semantics("parameters.domain", domain.validate(d), v);
            check_semantics("parameters.grid", grid.validate(), v);
            if !v.is_empty() {
                return None;
            }
            Some(CertifySpec::Hardy { d, potential, ansatz, domain, grid })
        }
        "rellich" => {
            let d = dimension_field(p, 5, "fourth-order certification", v);
            let potential: Option<PotentialSpec> = required_shape(p, "potential", v);
            let ansatz: Option<SupersolutionAnsatz> = required_shape(p, "ansatz", v);
            let grid: Option<GridSpec> = required_shape(p, "grid", v);
            forbid(p, &["domain"], "only valid for kind \"hardy\"", v);
            forbid(p, &["r"], "only valid for kind \"fall-local\"", v);
            let (d, potential, ansatz, grid) = (d?, potential?, ansatz?, grid?);
            check_semantics("parameters.potential", potential.validate(d), v);
            check_semantics("parameters.ansatz", ansatz.validate(d), v);
            check_semantics("parameters.grid", grid.validate(), v);
            if !v.is_empty() {
                return None;
            }
            Some(CertifySpec::Rellich { d, potential, ansatz, grid })
        }
        "fall-local" => {
            let d = dimension_field(p, 3, "the local boundary certificate", v);
            forbid(
                p,
                &["potential", "ansatz", "domain"],
                "implied by kind \"fall-local\"; remove this field",
                v,
            );
            let r = match p.get("r") {
                None => {
                    v.push(Violation::new("parameters.r", "required field is missing"));
                    None
                }
                Some(value) => match value.as_f64() {
                    Some(x) if x > 0.0 && x < 1.0 => Some(x),
                    _ => {
                        v.push(Violation::new(
                            "parameters.r",
                            "must be a number strictly between 0 and 1",
                        ));
                        None
                    }
                },
            };
            let grid: Option<Option<GridSpec>> = match p.get("grid") {
                None => Some(None),
                Some(value) => shape::<GridSpec>(value, "parameters.grid", v).map(Some),
            };
            if let Some(Some(g)) = &grid {
                check_semantics("parameters.grid", g.validate(), v);
            }
            let (d, r, grid) = (d?, r?, grid?);
            if !v.is_empty() {
                return None;
            }
            Some(CertifySpec::FallLocal { d, r, grid })
        }
        _ => unreachable!("kind is range-checked above"),
    }
}

/// Record a domain-type precondition failure at the field's path.
fn check_semantics(path: &str, result: hrlab_core::Result<()>, v: &mut Vec<Violation>) {
    if let Err(e) = result {
        v.push(Violation::new(path, e.to_string()));
    }
}

fn validate_eps_list(p: &Map<String, Value>, v: &mut Vec<Violation>) -> Option<Vec<f64>> {
    let value = match p.get("eps") {
        None => {
            v.push(Violation::new("parameters.eps", "required field is missing"));
            return None;
        }
        Some(value) => value,
    };
    let Some(raw) = value.as_array() else {
        v.push(Violation::new("parameters.eps", "must be an array of numbers"));
        return None;
    };
    if raw.is_empty() {
        v.push(Violation::new("parameters.eps", "must not be empty"));
        return None;
    }
    let mut eps = Vec::with_capacity(raw.len());
    let mut all_ok = true;
    for (i, entry) in raw.iter().enumerate() {
        match positive_number(entry, &format!("parameters.eps[{i}]"), v) {
            Some(x) => eps.push(x),
            None => all_ok = false,
        }
    }
    if !all_ok {
        return None;
    }
    for (i, pair) in eps.windows(2).enumerate() {
        if pair[1] >= pair[0] {
            v.push(Violation::new(
                "parameters.eps",
                format!(
                    "the sweep needs a strictly decreasing list: entry {} ({}) does not drop below entry {} ({})",
                    i + 1,
                    pair[1],
                    i,
                    pair[0]
                ),
            ));
            return None;
        }
    }
    Some(eps)
}

pub fn family_from_name(name: &str) -> Option<FamilyKind> {
    match name {
        "hardy-interior" => Some(FamilyKind::HardyInterior),
        "half-space" => Some(FamilyKind::HalfSpace),
        "hardy-rellich" => Some(FamilyKind::HardyRellich),
        _ => None,
    }
}

pub fn family_name(kind: FamilyKind) -> &'static str {
    match kind {
        FamilyKind::HardyInterior => "hardy-interior",
        FamilyKind::HalfSpace => "half-space",
        FamilyKind::HardyRellich => "hardy-rellich",
    }
}
