//! Line-oriented problem description: `[section]` headers, `key = value`
//! entries and `#` comments.

use std::collections::BTreeMap;

use crate::data::{BoundaryData, BumpShape, Profile, ProfileTerm, Source, TimeProfile};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::grid::Grid;
use crate::isotherm::{IsothermKind, IsothermModel};
use crate::system::SystemProblem;
use crate::trajectory::{SolverConfig, SolverMode};

const SECTIONS: [&str; 8] = ["domain", "isotherm", "species", "initial", "boundary", "forcing", "solver", "output"];

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub cells: Vec<usize>,
    pub extent: Vec<f64>,
    pub origin: Vec<f64>,
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn grid(&self) -> Result<Grid> {
        match self.dim() {
            1 => Grid::new_1d(self.extent[0], self.cells[0], self.origin[0]),
            _ => Grid::new_2d(
                [self.extent[0], self.extent[1]],
                [self.cells[0], self.cells[1]],
                [self.origin[0], self.origin[1]],
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForcingSpec {
    /// `None` means no forcing.
    pub term: Option<ProfileTerm>,
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotOutput {
    All,
    Final,
    None,
}

impl SnapshotOutput {
    fn as_str(&self) -> &'static str {
        match self {
            SnapshotOutput::All => "all",
            SnapshotOutput::Final => "final",
            SnapshotOutput::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub snapshots: SnapshotOutput,
    pub prefix: String,
}

/// Fully resolved problem description; every default is explicit.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub domain: DomainSpec,
    pub isotherm: IsothermKind,
    pub inversion_tol: f64,
    pub n_species: usize,
    /// Declared data bound `M`.
    pub bound: Option<f64>,
    pub initial: Vec<Profile>,
    pub boundary: BoundaryData,
    pub forcing: Vec<ForcingSpec>,
    pub t_start: f64,
    pub horizon: f64,
    pub solver: SolverConfig,
    pub output: OutputSpec,
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// `word k=v k=v`, with positional words kept in order.
struct Value<'a> {
    line: usize,
    words: Vec<&'a str>,
    named: BTreeMap<&'a str, &'a str>,
}

impl<'a> Value<'a> {
    fn new(e: &'a Entry) -> Result<Self> {
        let mut words = Vec::new();
        let mut named = BTreeMap::new();
        for tok in e.value.split_whitespace() {
            match tok.split_once('=') {
                Some((k, v)) => {
                    if named.insert(k, v).is_some() {
                        return Err(syntax(e.line, format!("parameter `{k}` given twice")));
                    }
                }
                None => words.push(tok),
            }
        }
        if words.is_empty() && named.is_empty() {
            return Err(syntax(e.line, format!("empty value for `{}`", e.key)));
        }
        Ok(Self { line: e.line, words, named })
    }

    fn head(&self) -> Result<&'a str> {
        self.words.first().copied().ok_or_else(|| syntax(self.line, "missing keyword"))
    }

    fn only(&self, allowed: &[&str], max_words: usize) -> Result<()> {
        if self.words.len() > max_words {
            return Err(syntax(self.line, format!("unexpected token `{}`", self.words[max_words])));
        }
        if let Some(k) = self.named.keys().find(|k| !allowed.contains(k)) {
            return Err(syntax(self.line, format!("unknown parameter `{k}`")));
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Result<f64> {
        let v = self.named.get(key).ok_or_else(|| syntax(self.line, format!("missing parameter `{key}`")))?;
        number(self.line, v)
    }

    fn word_number(&self, i: usize) -> Result<f64> {
        let w = self.words.get(i).ok_or_else(|| syntax(self.line, "missing numeric value"))?;
        number(self.line, w)
    }

    fn coords(&self, key: &str, dim: usize) -> Result<[f64; 2]> {
        let v = self.named.get(key).ok_or_else(|| syntax(self.line, format!("missing parameter `{key}`")))?;
        let xs = numbers(self.line, v)?;
        if xs.len() != dim {
            return Err(syntax(self.line, format!("`{key}` needs {dim} coordinate(s)")));
        }
        Ok([xs[0], xs.get(1).copied().unwrap_or(0.0)])
    }

    fn window(&self) -> Result<Option<(f64, f64)>> {
        match self.named.get("window") {
            None => Ok(None),
            Some(v) => {
                let xs = numbers(self.line, v)?;
                if xs.len() != 2 {
                    return Err(syntax(self.line, "`window` needs two times t0,t1"));
                }
                Ok(Some((xs[0], xs[1])))
            }
        }
    }
}

fn number(line: usize, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| syntax(line, format!("`{s}` is not a number")))
}

fn numbers(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| number(line, x)).collect()
}

fn integer(line: usize, s: &str) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| syntax(line, format!("`{s}` is not a nonnegative integer")))
}

fn optional(line: usize, s: &str) -> Result<Option<f64>> {
    if s.trim() == "none" {
        Ok(None)
    } else {
        number(line, s).map(Some)
    }
}

fn boolean(line: usize, s: &str) -> Result<bool> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(syntax(line, format!("`{other}` is not true/false"))),
    }
}

/// Splits the text into sections; rejects unknown sections and keys.
fn tokenize(text: &str) -> Result<BTreeMap<&'static str, Vec<Entry>>> {
    let mut out: BTreeMap<&'static str, Vec<Entry>> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| syntax(line, "unterminated section header"))?.trim();
            let sec = SECTIONS.iter().copied().find(|s| *s == name).ok_or_else(|| syntax(line, format!("unknown section [{name}]")))?;
            if out.contains_key(sec) {
                return Err(syntax(line, format!("section [{sec}] appears twice")));
            }
            out.insert(sec, Vec::new());
            current = Some(sec);
            continue;
        }
        let sec = current.ok_or_else(|| syntax(line, "entry before the first section header"))?;
        let (key, value) = body.split_once('=').ok_or_else(|| syntax(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(syntax(line, format!("malformed key `{key}`")));
        }
        if !key_allowed(sec, key) {
            return Err(syntax(line, format!("unknown key `{key}` in [{sec}]")));
        }
        let entries = out.get_mut(sec).expect("section inserted");
        if !repeatable(sec) && entries.iter().any(|e| e.key == key) {
            return Err(syntax(line, format!("key `{key}` given twice in [{sec}]")));
        }
        entries.push(Entry { line, key: key.to_string(), value: value.to_string() });
    }
    Ok(out)
}

fn species_key(key: &str, prefix: char) -> Option<usize> {
    let rest = key.strip_prefix(prefix)?;
    if rest.is_empty() || rest.starts_with('0') || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

fn key_allowed(sec: &str, key: &str) -> bool {
    match sec {
        "domain" => ["dim", "cells", "extent", "origin"].contains(&key),
        "isotherm" => ["isotherm", "inversion_tol"].contains(&key),
        "species" => ["count", "bound"].contains(&key),
        "initial" => species_key(key, 'u').is_some(),
        "boundary" => key == "type" || species_key(key, 'z').is_some(),
        "forcing" => species_key(key, 'f').is_some(),
        "solver" => [
            "t_start",
            "horizon",
            "mode",
            "safety",
            "eps_supp",
            "snapshots",
            "collar_cells",
            "center",
            "regularize_eps",
            "phi_table",
            "max_dt",
        ]
        .contains(&key),
        "output" => ["snapshots", "prefix"].contains(&key),
        _ => false,
    }
}

fn repeatable(sec: &str) -> bool {
    sec == "initial"
}

fn required<'a>(map: &'a BTreeMap<&str, Vec<Entry>>, sec: &str, key: &str) -> Result<&'a Entry> {
    lookup(map, sec, key).ok_or_else(|| syntax(0, format!("missing required key `{key}` in [{sec}]")))
}

fn lookup<'a>(map: &'a BTreeMap<&str, Vec<Entry>>, sec: &str, key: &str) -> Option<&'a Entry> {
    map.get(sec).and_then(|es| es.iter().find(|e| e.key == key))
}

fn parse_isotherm(e: &Entry) -> Result<IsothermKind> {
    let v = Value::new(e)?;
    match v.head()? {
        "freundlich" => {
            v.only(&["p", "phi"], 1)?;
            Ok(IsothermKind::Freundlich { p: v.get("p")?, phi: v.get("phi")? })
        }
        "powerlaw" => {
            v.only(&["m"], 1)?;
            Ok(IsothermKind::PowerLaw { m: v.get("m")? })
        }
        "linear" => {
            v.only(&[], 1)?;
            Ok(IsothermKind::Linear)
        }
        other => Err(syntax(e.line, format!("unknown isotherm `{other}` (freundlich, powerlaw, linear)"))),
    }
}

fn parse_shape(line: usize, s: Option<&&str>) -> Result<BumpShape> {
    match s.copied() {
        None | Some("cosine") => Ok(BumpShape::Cosine),
        Some("indicator") => Ok(BumpShape::Indicator),
        Some(other) => Err(syntax(line, format!("unknown bump profile `{other}` (cosine, indicator)"))),
    }
}

/// Parses a profile term; `Ok(None)` for `zero`.
fn parse_term(v: &Value<'_>, dim: usize, extra: &[&str]) -> Result<Option<ProfileTerm>> {
    let allow = |base: &[&'static str]| -> Vec<&str> { base.iter().copied().chain(extra.iter().copied()).collect() };
    match v.head()? {
        "zero" => {
            v.only(&allow(&[]), 1)?;
            Ok(None)
        }
        "constant" => {
            v.only(&allow(&[]), 2)?;
            Ok(Some(ProfileTerm::Constant(v.word_number(1)?)))
        }
        "bump" => {
            v.only(&allow(&["center", "radius", "height", "profile"]), 1)?;
            Ok(Some(ProfileTerm::Bump {
                center: v.coords("center", dim)?,
                radius: v.get("radius")?,
                height: v.get("height")?,
                shape: parse_shape(v.line, v.named.get("profile"))?,
            }))
        }
        "barenblatt" => {
            v.only(&allow(&["m", "c", "t0", "center"]), 1)?;
            Ok(Some(ProfileTerm::Barenblatt {
                m: v.get("m")?,
                c: v.get("c")?,
                t0: v.get("t0")?,
                center: v.coords("center", dim)?,
            }))
        }
        other => Err(syntax(v.line, format!("unknown profile `{other}` (zero, constant, bump, barenblatt)"))),
    }
}

fn parse_time_profile(e: &Entry) -> Result<TimeProfile> {
    let v = Value::new(e)?;
    let head = v.head()?;
    match head {
        "constant" => {
            v.only(&[], 2)?;
            Ok(TimeProfile::Constant(v.word_number(1)?))
        }
        "linear" => {
            v.only(&["start", "slope"], 1)?;
            Ok(TimeProfile::Linear { start: v.get("start")?, slope: v.get("slope")? })
        }
        _ => {
            v.only(&[], 1)?;
            Ok(TimeProfile::Constant(number(e.line, head)?))
        }
    }
}

fn species_index(e: &Entry, prefix: char, n: usize) -> Result<usize> {
    let i = species_key(&e.key, prefix).expect("key validated");
    if i > n {
        return Err(Error::Invalid(format!("line {}: `{}` refers to species {i} but count = {n}", e.line, e.key)));
    }
    Ok(i - 1)
}

/// Parses and validates a problem description.
pub fn parse_spec(text: &str) -> Result<ProblemSpec> {
    let map = tokenize(text)?;

    let cells_e = required(&map, "domain", "cells")?;
    let cells: Vec<usize> = cells_e.value.split(',').map(|s| integer(cells_e.line, s)).collect::<Result<_>>()?;
    if !(1..=2).contains(&cells.len()) {
        return Err(syntax(cells_e.line, "`cells` needs one or two entries"));
    }
    let dim = cells.len();
    if let Some(e) = lookup(&map, "domain", "dim") {
        if integer(e.line, &e.value)? != dim {
            return Err(Error::Invalid(format!("line {}: dim does not match the number of cell counts", e.line)));
        }
    }
    let axis_values = |key: &str, default: Option<f64>| -> Result<Vec<f64>> {
        match (lookup(&map, "domain", key), default) {
            (Some(e), _) => {
                let xs = numbers(e.line, &e.value)?;
                if xs.len() != dim {
                    return Err(syntax(e.line, format!("`{key}` needs {dim} entr{}", if dim == 1 { "y" } else { "ies" })));
                }
                Ok(xs)
            }
            (None, Some(d)) => Ok(vec![d; dim]),
            (None, None) => Err(syntax(0, format!("missing required key `{key}` in [domain]"))),
        }
    };
    let domain = DomainSpec { cells, extent: axis_values("extent", None)?, origin: axis_values("origin", Some(0.0))? };

    let isotherm = parse_isotherm(required(&map, "isotherm", "isotherm")?)?;
    let inversion_tol = match lookup(&map, "isotherm", "inversion_tol") {
        Some(e) => number(e.line, &e.value)?,
        None => IsothermModel::new(isotherm)?.inversion_tol(),
    };

    let count_e = required(&map, "species", "count")?;
    let n = integer(count_e.line, &count_e.value)?;
    if n == 0 {
        return Err(Error::Invalid("species count must be at least 1".into()));
    }
    let bound = lookup(&map, "species", "bound").map(|e| optional(e.line, &e.value)).transpose()?.flatten();

    let mut initial = vec![Profile::zero(); n];
    for e in map.get("initial").map(Vec::as_slice).unwrap_or(&[]) {
        let i = species_index(e, 'u', n)?;
        if let Some(term) = parse_term(&Value::new(e)?, dim, &[])? {
            initial[i].0.push(term);
        }
    }

    let kind = lookup(&map, "boundary", "type").map(|e| (e.line, e.value.as_str()));
    let z_entries = map.get("boundary").map(|es| es.iter().filter(|e| e.key != "type").collect::<Vec<_>>()).unwrap_or_default();
    let boundary = match kind {
        None | Some((_, "vacuum")) => {
            if let Some(e) = z_entries.first() {
                return Err(Error::Invalid(format!("line {}: boundary values need `type = dirichlet`", e.line)));
            }
            BoundaryData::Vacuum
        }
        Some((_, "dirichlet")) => {
            let mut z = vec![TimeProfile::Constant(0.0); n];
            for e in z_entries {
                z[species_index(e, 'z', n)?] = parse_time_profile(e)?;
            }
            BoundaryData::Dirichlet(z)
        }
        Some((line, other)) => return Err(syntax(line, format!("unknown boundary type `{other}` (vacuum, dirichlet)"))),
    };

    let mut forcing = vec![ForcingSpec { term: None, window: None }; n];
    for e in map.get("forcing").map(Vec::as_slice).unwrap_or(&[]) {
        let i = species_index(e, 'f', n)?;
        let v = Value::new(e)?;
        forcing[i] = ForcingSpec { term: parse_term(&v, dim, &["window"])?, window: v.window()? };
    }

    let solver_num = |key: &str, default: f64| -> Result<f64> {
        lookup(&map, "solver", key).map_or(Ok(default), |e| number(e.line, &e.value))
    };
    let solver_opt = |key: &str| -> Result<Option<f64>> {
        lookup(&map, "solver", key).map_or(Ok(None), |e| optional(e.line, &e.value))
    };
    let solver_int = |key: &str, default: usize| -> Result<usize> {
        lookup(&map, "solver", key).map_or(Ok(default), |e| integer(e.line, &e.value))
    };
    let horizon_e = required(&map, "solver", "horizon")?;
    let horizon = number(horizon_e.line, &horizon_e.value)?;
    let t_start = solver_num("t_start", 0.0)?;
    let defaults = SolverConfig::default();
    let mode = match lookup(&map, "solver", "mode") {
        None => defaults.mode,
        Some(e) => match e.value.as_str() {
            "coupled" => SolverMode::Coupled,
            "decomposed" => SolverMode::Decomposed,
            other => return Err(syntax(e.line, format!("unknown solver mode `{other}` (coupled, decomposed)"))),
        },
    };
    let center = match lookup(&map, "solver", "center") {
        None => None,
        Some(e) if e.value.trim() == "none" => None,
        Some(e) => {
            let xs = numbers(e.line, &e.value)?;
            if xs.len() != dim {
                return Err(syntax(e.line, format!("`center` needs {dim} coordinate(s)")));
            }
            Some([xs[0], xs.get(1).copied().unwrap_or(0.0)])
        }
    };
    let solver = SolverConfig {
        safety: solver_num("safety", defaults.safety)?,
        eps_supp: solver_num("eps_supp", defaults.eps_supp)?,
        snapshots: solver_int("snapshots", defaults.snapshots)?,
        mode,
        collar_cells: solver_int("collar_cells", defaults.collar_cells)?,
        center,
        regularize_eps: solver_opt("regularize_eps")?,
        phi_table: lookup(&map, "solver", "phi_table").map_or(Ok(defaults.phi_table), |e| boolean(e.line, &e.value))?,
        max_dt: solver_opt("max_dt")?,
    };

    let output = OutputSpec {
        snapshots: match lookup(&map, "output", "snapshots") {
            None => SnapshotOutput::All,
            Some(e) => match e.value.as_str() {
                "all" => SnapshotOutput::All,
                "final" => SnapshotOutput::Final,
                "none" => SnapshotOutput::None,
                other => return Err(syntax(e.line, format!("unknown snapshot output `{other}` (all, final, none)"))),
            },
        },
        prefix: match lookup(&map, "output", "prefix") {
            None => "run".to_string(),
            Some(e) => {
                let p = e.value.trim();
                if p.is_empty() || !p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return Err(syntax(e.line, "prefix may contain only letters, digits, `_` and `-`"));
                }
                p.to_string()
            }
        },
    };

    let spec = ProblemSpec {
        domain,
        isotherm,
        inversion_tol,
        n_species: n,
        bound,
        initial,
        boundary,
        forcing,
        t_start,
        horizon,
        solver,
        output,
    };
    spec.build()?;
    Ok(spec)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

impl ProblemSpec {
    pub fn model(&self) -> Result<IsothermModel> {
        IsothermModel::new(self.isotherm)?.with_inversion_tol(self.inversion_tol)
    }

    /// Builds and validates the solver inputs.
    pub fn build(&self) -> Result<(SystemProblem, SolverConfig)> {
        let grid = self.domain.grid()?;
        let model = self.model()?;
        for p in &self.initial {
            p.validate()?;
        }
        for f in &self.forcing {
            if let Some(t) = f.term {
                Profile(vec![t]).validate()?;
            }
        }
        let problem = SystemProblem {
            grid,
            isotherm: model,
            initial: self.initial.iter().map(|p| p.evaluate(grid)).collect(),
            forcing: self
                .forcing
                .iter()
                .map(|f| match f.term {
                    Some(t) => Source::new(Profile(vec![t]).evaluate(grid), f.window),
                    None => Source::zero(grid),
                })
                .collect(),
            boundary: self.boundary.clone(),
            t_start: self.t_start,
            horizon: self.horizon,
            bound: self.bound,
        };
        problem.validate()?;
        self.solver.validate()?;
        Ok((problem, self.solver.clone()))
    }

    /// Canonical text with every default written out; parses back to `self`.
    pub fn emit(&self) -> String {
        let dim = self.domain.dim();
        let coords = |c: [f64; 2]| join(&c[..dim]);
        let term = |t: &ProfileTerm| match *t {
            ProfileTerm::Constant(v) => format!("constant {}", fmt_f64(v)),
            ProfileTerm::Bump { center, radius, height, shape } => format!(
                "bump center={} radius={} height={} profile={}",
                coords(center),
                fmt_f64(radius),
                fmt_f64(height),
                match shape {
                    BumpShape::Cosine => "cosine",
                    BumpShape::Indicator => "indicator",
                }
            ),
            ProfileTerm::Barenblatt { m, c, t0, center } => format!(
                "barenblatt m={} c={} t0={} center={}",
                fmt_f64(m),
                fmt_f64(c),
                fmt_f64(t0),
                coords(center)
            ),
        };
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_f64);
        let mut s = String::new();
        s.push_str("[domain]\n");
        s.push_str(&format!("dim = {dim}\n"));
        s.push_str(&format!(
            "cells = {}\n",
            self.domain.cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
        ));
        s.push_str(&format!("extent = {}\n", join(&self.domain.extent)));
        s.push_str(&format!("origin = {}\n", join(&self.domain.origin)));
        s.push_str("\n[isotherm]\n");
        s.push_str(&match self.isotherm {
            IsothermKind::Freundlich { p, phi } => format!("isotherm = freundlich p={} phi={}\n", fmt_f64(p), fmt_f64(phi)),
            IsothermKind::PowerLaw { m } => format!("isotherm = powerlaw m={}\n", fmt_f64(m)),
            IsothermKind::Linear => "isotherm = linear\n".to_string(),
        });
        s.push_str(&format!("inversion_tol = {}\n", fmt_f64(self.inversion_tol)));
        s.push_str("\n[species]\n");
        s.push_str(&format!("count = {}\nbound = {}\n", self.n_species, opt(self.bound)));
        s.push_str("\n[initial]\n");
        for (i, p) in self.initial.iter().enumerate() {
            if p.0.is_empty() {
                s.push_str(&format!("u{} = zero\n", i + 1));
            }
            for t in &p.0 {
                s.push_str(&format!("u{} = {}\n", i + 1, term(t)));
            }
        }
        s.push_str("\n[boundary]\n");
        match &self.boundary {
            BoundaryData::Vacuum => s.push_str("type = vacuum\n"),
            BoundaryData::Dirichlet(z) => {
                s.push_str("type = dirichlet\n");
                for (i, p) in z.iter().enumerate() {
                    let v = match *p {
                        TimeProfile::Constant(c) => format!("constant {}", fmt_f64(c)),
                        TimeProfile::Linear { start, slope } => {
                            format!("linear start={} slope={}", fmt_f64(start), fmt_f64(slope))
                        }
                    };
                    s.push_str(&format!("z{} = {v}\n", i + 1));
                }
            }
        }
        s.push_str("\n[forcing]\n");
        for (i, f) in self.forcing.iter().enumerate() {
            let mut v = f.term.as_ref().map_or_else(|| "zero".to_string(), term);
            if let Some((a, b)) = f.window {
                v.push_str(&format!(" window={},{}", fmt_f64(a), fmt_f64(b)));
            }
            s.push_str(&format!("f{} = {v}\n", i + 1));
        }
        let c = &self.solver;
        s.push_str("\n[solver]\n");
        s.push_str(&format!("t_start = {}\n", fmt_f64(self.t_start)));
        s.push_str(&format!("horizon = {}\n", fmt_f64(self.horizon)));
        s.push_str(&format!("mode = {}\n", c.mode.as_str()));
        s.push_str(&format!("safety = {}\n", fmt_f64(c.safety)));
        s.push_str(&format!("eps_supp = {}\n", fmt_f64(c.eps_supp)));
        s.push_str(&format!("snapshots = {}\n", c.snapshots));
        s.push_str(&format!("collar_cells = {}\n", c.collar_cells));
        s.push_str(&format!("center = {}\n", c.center.map_or_else(|| "none".to_string(), coords)));
        s.push_str(&format!("regularize_eps = {}\n", opt(c.regularize_eps)));
        s.push_str(&format!("phi_table = {}\n", c.phi_table));
        s.push_str(&format!("max_dt = {}\n", opt(c.max_dt)));
        s.push_str("\n[output]\n");
        s.push_str(&format!("snapshots = {}\nprefix = {}\n", self.output.snapshots.as_str(), self.output.prefix));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[domain]
cells = 100
extent = 10
origin = -5

[isotherm]
isotherm = powerlaw m=2

[species]
count = 1

[initial]
u1 = bump center=0 radius=1 height=1

[solver]
horizon = 0.5
";

    fn exit_code(text: &str) -> i32 {
        parse_spec(text).unwrap_err().exit_code()
    }

    #[test]
    fn minimal_spec_fills_defaults() {
        let spec = parse_spec(MINIMAL).unwrap();
        assert_eq!(spec.domain.origin, vec![-5.0]);
        assert_eq!(spec.boundary, BoundaryData::Vacuum);
        assert_eq!(spec.solver, SolverConfig::default());
        assert_eq!(spec.output.prefix, "run");
        assert_eq!(spec.forcing[0].term, None);
        assert!(matches!(spec.initial[0].0[0], ProfileTerm::Bump { shape: BumpShape::Cosine, .. }));
    }

    #[test]
    fn emit_round_trip() {
        let spec = parse_spec(MINIMAL).unwrap();
        let text = spec.emit();
        assert_eq!(parse_spec(&text).unwrap(), spec);
        assert_eq!(parse_spec(&text).unwrap().emit(), text);
    }

    #[test]
    fn semantic_errors() {
        let bad_p = MINIMAL.replace("powerlaw m=2", "freundlich p=1.5 phi=0.2");
        let err = parse_spec(&bad_p).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("Freundlich exponent p must be in (0,1)"));
        let neg = MINIMAL.replace("height=1", "height=-1");
        let err = parse_spec(&neg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("nonnegative"));
        assert_eq!(exit_code(&MINIMAL.replace("u1 =", "u2 =")), 3);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let unknown = MINIMAL.replace("origin = -5", "origin = -5\nwidth = 3");
        match parse_spec(&unknown).unwrap_err() {
            Error::Parse { line, message } => {
                assert_eq!(line, 5);
                assert!(message.contains("unknown key"));
            }
            e => panic!("{e}"),
        }
        assert_eq!(exit_code(&MINIMAL.replace("[solver]", "[solve]")), 2);
        assert_eq!(exit_code(&MINIMAL.replace("horizon = 0.5", "horizon 0.5")), 2);
        assert_eq!(exit_code(&MINIMAL.replace("radius=1", "radius=one")), 2);
        assert_eq!(exit_code(&MINIMAL.replace("height=1", "height=1 width=2")), 2);
        assert_eq!(exit_code(&MINIMAL.replace("horizon = 0.5", "")), 2);
        assert_eq!(exit_code(&format!("count = 1\n{MINIMAL}")), 2);
    }

    #[test]
    fn full_vocabulary() {
        let text = "\
[domain]
dim = 2
cells = 20,10
extent = 2,1
[isotherm]
isotherm = freundlich p=0.5 phi=0.3  # trailing comment
inversion_tol = 1e-12
[species]
count = 2
bound = 2
[initial]
u1 = bump center=0.5,0.5 radius=0.3 height=1 profile=indicator
u1 = constant 0.1
u2 = barenblatt m=2 c=0.5 t0=1 center=1.5,0.5
[boundary]
type = dirichlet
z1 = 0.1
z2 = linear start=0 slope=0.5
[forcing]
f2 = constant 0.2 window=0,0.1
[solver]
t_start = 0.5
horizon = 0.01
mode = decomposed
center = 1,0.5
regularize_eps = 1e-6
phi_table = true
max_dt = 1e-3
[output]
snapshots = final
prefix = box_2d
";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.initial[0].0.len(), 2);
        assert_eq!(spec.forcing[1].window, Some((0.0, 0.1)));
        assert_eq!(spec.boundary, BoundaryData::Dirichlet(vec![TimeProfile::Constant(0.1), TimeProfile::Linear { start: 0.0, slope: 0.5 }]));
        assert_eq!(spec.solver.mode, SolverMode::Decomposed);
        assert_eq!(parse_spec(&spec.emit()).unwrap(), spec);
        let (problem, config) = spec.build().unwrap();
        assert_eq!(problem.grid.dim(), 2);
        assert_eq!(config.center, Some([1.0, 0.5]));
    }
}
