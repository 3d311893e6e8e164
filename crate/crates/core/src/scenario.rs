//! Scenario files: `key=value` lines, `base` lines and `[graphing NAME]` sections.
//!
//! ```text
//! name=thmgen_reference
//! base atom=y weight=1
//! depth=22
//! groups=0
//! length=3
//! epsilons=1/2,1/4,1/8
//! basis=cyclic
//! probe.epsilon=1/8
//! checks=a2,property-ii
//! ```
//!
//! Keys containing a dot other than `probe.*` are kept verbatim as check
//! parameters.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::generators::BasisPlan;
use crate::graphing::Graphing;
use crate::measure::BaseSpace;
use crate::rational::{fmt_rational, parse_rational, Dyadic, Rational};

/// Settings for the density probe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeParams {
    pub epsilon: Rational,
    pub max_len: usize,
    pub memory_cap: usize,
    pub target_depth: u32,
    /// Schedule length for the probe, if different from the main one.
    pub length: Option<usize>,
    /// Working depth for the probe, if different from the main one.
    pub depth: Option<u32>,
}

impl Default for ProbeParams {
    fn default() -> Self {
        ProbeParams {
            epsilon: Dyadic::new(1, 3).to_rational(),
            max_len: 40,
            memory_cap: 1 << 32,
            target_depth: 2,
            length: None,
            depth: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub base: BaseSpace,
    pub depth: u32,
    /// Group index of each atom.
    pub groups: Vec<usize>,
    pub length: usize,
    pub epsilons: Vec<Rational>,
    pub basis: BasisPlan,
    pub probe: ProbeParams,
    pub graphings: Vec<(String, Graphing)>,
    /// Check-specific `prefix.key=value` settings.
    pub params: BTreeMap<String, String>,
    pub checks: Vec<String>,
}

impl Scenario {
    /// A single-atom scenario with `ε_k = 2^{-k}` and no checks.
    pub fn new(name: impl Into<String>, base: BaseSpace, depth: u32, length: usize) -> Self {
        let atoms = base.len();
        Scenario {
            name: name.into(),
            base,
            depth,
            groups: vec![0; atoms],
            length,
            epsilons: crate::generators::halving_epsilons(length),
            basis: BasisPlan::CyclicAtoms,
            probe: ProbeParams::default(),
            graphings: Vec::new(),
            params: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    /// Parsed check parameter, or `default` when absent.
    pub fn param_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.param(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value `{raw}` for `{key}`"))),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::default().run(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = Vec::new();
        out.push(format!("name={}", self.name));
        out.extend(self.base.to_lines());
        out.push(format!("depth={}", self.depth));
        out.push(format!("groups={}", join(self.groups.iter())));
        out.push(format!("length={}", self.length));
        out.push(format!("epsilons={}", join(self.epsilons.iter().map(fmt_rational))));
        out.push(format!("basis={}", basis_to_string(&self.basis)));
        let p = &self.probe;
        out.push(format!("probe.epsilon={}", fmt_rational(&p.epsilon)));
        out.push(format!("probe.max_len={}", p.max_len));
        out.push(format!("probe.memory_cap={}", p.memory_cap));
        out.push(format!("probe.target_depth={}", p.target_depth));
        if let Some(l) = p.length {
            out.push(format!("probe.length={l}"));
        }
        if let Some(d) = p.depth {
            out.push(format!("probe.depth={d}"));
        }
        for (k, v) in &self.params {
            out.push(format!("{k}={v}"));
        }
        out.push(format!("checks={}", self.checks.join(",")));
        for (name, g) in &self.graphings {
            out.push(String::new());
            out.push(format!("[graphing {name}]"));
            let text = g.to_text(&self.base);
            out.extend(
                text.lines()
                    .filter(|l| !l.starts_with("base "))
                    .map(str::to_string),
            );
        }
        let mut s = out.join("\n");
        s.push('\n');
        s
    }
}

/// Scenario files shipped with the crate, by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("thmgen_reference", include_str!("../scenarios/thmgen_reference.scn")),
    ("rank_reference", include_str!("../scenarios/rank_reference.scn")),
    ("cost_reference", include_str!("../scenarios/cost_reference.scn")),
    ("free_reference", include_str!("../scenarios/free_reference.scn")),
    ("foundations", include_str!("../scenarios/foundations.scn")),
];

pub fn bundled(name: &str) -> Option<Scenario> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::parse(text).expect("bundled scenarios parse"))
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn basis_to_string(plan: &BasisPlan) -> String {
    match plan {
        BasisPlan::CyclicAtoms => "cyclic".into(),
        BasisPlan::Whole => "whole".into(),
        BasisPlan::Explicit(sets) => format!(
            "explicit:{}",
            sets.iter().map(|s| join(s.iter())).collect::<Vec<_>>().join(";")
        ),
    }
}

fn parse_basis(s: &str) -> std::result::Result<BasisPlan, String> {
    match s {
        "cyclic" => Ok(BasisPlan::CyclicAtoms),
        "whole" => Ok(BasisPlan::Whole),
        _ => {
            let body = s
                .strip_prefix("explicit:")
                .ok_or_else(|| format!("unknown basis `{s}`"))?;
            body.split(';')
                .map(|set| parse_list::<usize>(set))
                .collect::<std::result::Result<_, _>>()
                .map(BasisPlan::Explicit)
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad list item `{t}`")))
        .collect()
}

fn parse_one<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim().parse().map_err(|_| format!("bad value `{s}`"))
}

#[derive(Default)]
struct Parser {
    name: Option<String>,
    atoms: Vec<(String, Rational)>,
    depth: Option<u32>,
    groups: Option<Vec<usize>>,
    length: Option<usize>,
    epsilons: Option<Vec<Rational>>,
    basis: Option<BasisPlan>,
    probe: ProbeParams,
    params: BTreeMap<String, String>,
    checks: Vec<String>,
    sections: Vec<(String, usize, Vec<String>)>,
}

fn at(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl Parser {
    fn run(mut self, text: &str) -> Result<Scenario> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = raw.trim();
            let indent = raw.len() - raw.trim_start().len() + 1;
            if let Some(section) = self.sections.last_mut() {
                if !trimmed.starts_with('[') {
                    section.2.push(raw.to_string());
                    continue;
                }
            }
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(header) = trimmed.strip_prefix('[') {
                let inner = header
                    .strip_suffix(']')
                    .ok_or_else(|| at(line_no, raw.len(), "unterminated section header"))?;
                let name = inner
                    .strip_prefix("graphing ")
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| at(line_no, indent + 1, format!("unknown section `[{inner}]`")))?;
                self.sections.push((name.to_string(), line_no, Vec::new()));
                continue;
            }
            if trimmed.starts_with("base ") {
                let atom = BaseSpace::parse_line(trimmed).map_err(|e| at(line_no, indent, e.to_string()))?;
                self.atoms.push(atom);
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| at(line_no, indent, format!("expected key=value, found `{trimmed}`")))?;
            let value_col = indent + key.len() + 1;
            self.set(key.trim(), value.trim())
                .map_err(|m| at(line_no, value_col, m))?;
        }
        self.finish()
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "name" => self.name = Some(value.to_string()),
            "depth" => self.depth = Some(parse_one(value)?),
            "groups" => self.groups = Some(parse_list(value)?),
            "length" => self.length = Some(parse_one(value)?),
            "epsilons" => {
                self.epsilons = Some(
                    value
                        .split(',')
                        .map(|v| parse_rational(v).map_err(|e| e.to_string()))
                        .collect::<std::result::Result<_, _>>()?,
                )
            }
            "basis" => self.basis = Some(parse_basis(value)?),
            "checks" => {
                self.checks = value
                    .split(',')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .map(str::to_string)
                    .collect()
            }
            "probe.epsilon" => self.probe.epsilon = parse_rational(value).map_err(|e| e.to_string())?,
            "probe.max_len" => self.probe.max_len = parse_one(value)?,
            "probe.memory_cap" => self.probe.memory_cap = parse_one(value)?,
            "probe.target_depth" => self.probe.target_depth = parse_one(value)?,
            "probe.length" => self.probe.length = Some(parse_one(value)?),
            "probe.depth" => self.probe.depth = Some(parse_one(value)?),
            _ if key.contains('.') && !key.starts_with("probe.") => {
                self.params.insert(key.to_string(), value.to_string());
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    fn finish(self) -> Result<Scenario> {
        let missing = |k: &str| at(0, 0, format!("missing `{k}`"));
        let base = BaseSpace::new(self.atoms).map_err(|e| at(0, 0, e.to_string()))?;
        let depth = self.depth.ok_or_else(|| missing("depth"))?;
        let length = self.length.unwrap_or(1);
        let groups = self.groups.unwrap_or_else(|| vec![0; base.len()]);
        if groups.len() != base.len() {
            return Err(missing(&format!("one group index per atom ({})", base.len())));
        }
        let epsilons = self
            .epsilons
            .unwrap_or_else(|| crate::generators::halving_epsilons(length));
        let mut graphings = Vec::new();
        let base_lines = base.to_lines().join("\n");
        for (name, line_no, body) in self.sections {
            let text = format!("{base_lines}\n{}", body.join("\n"));
            let offset = base.len();
            let (_, g) = Graphing::parse(&text).map_err(|e| match e {
                Error::Parse { line, column, message } => at(line_no + line - offset, column, message),
                other => at(line_no, 1, other.to_string()),
            })?;
            graphings.push((name, g));
        }
        Ok(Scenario {
            name: self.name.unwrap_or_else(|| "unnamed".into()),
            base,
            depth,
            groups,
            length,
            epsilons,
            basis: self.basis.unwrap_or(BasisPlan::CyclicAtoms),
            probe: self.probe,
            graphings,
            params: self.params,
            checks: self.checks,
        })
    }
}
