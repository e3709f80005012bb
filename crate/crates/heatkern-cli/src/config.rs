//! INI-style run configuration: `[section]` headers, `key = value` lines, `#`/`;` comments.
//!
//! Arrays are comma-separated reals, matrices are semicolon-separated rows.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Task {
    Asymptotics,
    Oracle,
    Compare,
    Report,
}

impl Task {
    pub fn parse(s: &str) -> Option<Task> {
        Some(match s {
            "asymptotics" => Task::Asymptotics,
            "oracle" => Task::Oracle,
            "compare" => Task::Compare,
            "report" => Task::Report,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Asymptotics => "asymptotics",
            Task::Oracle => "oracle",
            Task::Compare => "compare",
            Task::Report => "report",
        }
    }

    /// Whether the task evaluates tolerances.
    pub fn checks_tolerance(self) -> bool {
        matches!(self, Task::Compare | Task::Report)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Sphere { dim: usize, radius: f64 },
    Torus { periods: Vec<f64> },
    Interval { length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symbol {
    Laplace,
    OneForm { coupling: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Dirichlet,
    Neumann,
    DirichletNeumann,
    Robin(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub geometric: bool,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / n;
                if self.geometric {
                    self.start * (self.stop / self.start).powf(s)
                } else {
                    self.start + (self.stop - self.start) * s
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Option<Task>,
    pub geometry: Geometry,
    /// Constant potential; a `1×1` matrix for scalar input.
    pub potential: Vec<Vec<f64>>,
    pub symbol: Symbol,
    pub boundary: Option<Boundary>,
    /// Highest order kept in the asymptotic partial sum; the model default when absent.
    pub order: Option<usize>,
    pub grid: Grid,
    pub tolerance: Option<Tolerance>,
    pub format: Format,
    pub path: Option<String>,
}

/// One `key = value` entry with its source line.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

/// Raw parse: section name → key → entry. Keys before any header live in section `""`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ini {
    pub sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl Ini {
    pub fn parse(text: &str) -> Result<Ini, CliError> {
        let mut ini = Ini::default();
        let mut current = String::new();
        ini.sections.insert(current.clone(), BTreeMap::new());
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::config(line, "", "section header is missing ']'"))?
                    .trim()
                    .to_ascii_lowercase();
                if name.is_empty() || !name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_') {
                    return Err(CliError::config(line, &name, "invalid section name"));
                }
                if ini.sections.contains_key(&name) {
                    return Err(CliError::config(line, &name, "duplicate section"));
                }
                ini.sections.insert(name.clone(), BTreeMap::new());
                current = name;
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| CliError::config(line, "", "expected 'key = value'"))?;
            let key = key.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(CliError::config(line, "", "empty key"));
            }
            let section = ini.sections.get_mut(&current).expect("current section exists");
            if section.contains_key(&key) {
                return Err(CliError::config(line, &qualified(&current, &key), "duplicate key"));
            }
            section.insert(key, Entry { value: value.trim().to_string(), line });
        }
        Ok(ini)
    }
}

fn strip_comment(line: &str) -> &str {
    // ';' separates matrix rows, so it only starts a comment at the beginning of a line.
    if line.trim_start().starts_with(';') {
        return "";
    }
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

const KNOWN: &[(&str, &[&str])] = &[
    ("", &["task"]),
    ("run", &["task"]),
    ("geometry", &["kind", "dimension", "radius", "periods", "length"]),
    ("operator", &["potential", "symbol", "coupling", "order"]),
    ("boundary", &["bc", "robin"]),
    ("grid", &["start", "stop", "count", "geometric"]),
    ("tolerance", &["abs", "rel"]),
    ("output", &["format", "path"]),
];

/// Typed access to one section with line-aware diagnostics.
struct Section<'a> {
    name: &'a str,
    entries: Option<&'a BTreeMap<String, Entry>>,
    line: usize,
}

impl<'a> Section<'a> {
    fn raw(&self, key: &str) -> Option<&'a Entry> {
        self.entries.and_then(|e| e.get(key))
    }

    fn field(&self, key: &str) -> String {
        qualified(self.name, key)
    }

    fn err(&self, key: &str, line: Option<usize>, msg: impl Into<String>) -> CliError {
        CliError::config(line.unwrap_or(self.line), &self.field(key), msg)
    }

    fn required<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, CliError> {
        match self.raw(key) {
            Some(e) => parse(&e.value).map_err(|m| self.err(key, Some(e.line), m)),
            None => Err(self.err(key, None, "missing required field")),
        }
    }

    fn optional<T>(&self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            Some(e) => parse(&e.value).map(Some).map_err(|m| self.err(key, Some(e.line), m)),
            None => Ok(None),
        }
    }

    /// Error located at the line of `key`, or at the section end when absent.
    fn at(&self, key: &str, msg: impl Into<String>) -> CliError {
        self.err(key, self.raw(key).map(|e| e.line), msg)
    }

    fn check<T>(&self, key: &str, value: T, ok: bool, msg: &str) -> Result<T, CliError> {
        if ok {
            Ok(value)
        } else {
            Err(self.at(key, msg))
        }
    }
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite real number, got {s:?}")),
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim().parse::<usize>().map_err(|_| format!("expected a non-negative integer, got {s:?}"))
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {s:?}")),
    }
}

pub fn parse_array(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Err("expected a comma-separated list of reals".into());
    }
    s.split(',').map(parse_real).collect()
}

pub fn parse_matrix(s: &str) -> Result<Vec<Vec<f64>>, String> {
    let rows: Vec<Vec<f64>> = s.split(';').map(parse_array).collect::<Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(format!(
            "expected a square matrix, got {n} rows of lengths {:?}",
            rows.iter().map(Vec::len).collect::<Vec<_>>()
        ));
    }
    let asymmetric = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).find(|&(i, j)| rows[i][j] != rows[j][i]);
    if let Some((i, j)) = asymmetric {
        return Err(format!("matrix must be symmetric: entry ({i},{j}) differs from ({j},{i})"));
    }
    Ok(rows)
}

fn word(s: &str) -> Result<String, String> {
    Ok(s.trim().to_ascii_lowercase())
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let ini = Ini::parse(text)?;
        for (name, entries) in &ini.sections {
            let known = KNOWN.iter().find(|(s, _)| s == name);
            let Some((_, keys)) = known else {
                let line = entries.values().map(|e| e.line).min().unwrap_or(0);
                return Err(CliError::config(line, name, "unknown section"));
            };
            for (key, e) in entries {
                if !keys.contains(&key.as_str()) {
                    return Err(CliError::config(e.line, &qualified(name, key), "unknown field"));
                }
            }
        }
        let last_line = text.lines().count();
        let section = |name: &'static str| Section { name, entries: ini.sections.get(name), line: last_line };

        let top = section("");
        let run = section("run");
        let task_parse = |s: &str| Task::parse(s.trim()).ok_or_else(|| format!("unknown task {s:?}"));
        let task = match (top.optional("task", task_parse)?, run.optional("task", task_parse)?) {
            (Some(_), Some(_)) => return Err(run.err("task", None, "task given twice")),
            (a, b) => a.or(b),
        };

        let g = section("geometry");
        let kind = g.required("kind", word)?;
        let geometry = match kind.as_str() {
            "sphere" => {
                let dim = g.required("dimension", parse_usize)?;
                let dim = g.check("dimension", dim, dim == 2 || dim == 3, "sphere dimension must be 2 or 3")?;
                let radius = g.optional("radius", parse_real)?.unwrap_or(1.0);
                let radius = g.check("radius", radius, radius > 0.0, "radius must be positive")?;
                Geometry::Sphere { dim, radius }
            }
            "torus" | "circle" => {
                let periods = g.required("periods", parse_array)?;
                let ok = !periods.is_empty() && periods.len() <= 3 && periods.iter().all(|&p| p > 0.0);
                let periods = g.check("periods", periods, ok, "need one to three positive periods")?;
                if kind == "circle" && periods.len() != 1 {
                    return Err(g.at("periods", "a circle has exactly one period"));
                }
                if let Some(d) = g.optional("dimension", parse_usize)? {
                    g.check("dimension", (), d == periods.len(), "dimension must equal the number of periods")?;
                }
                Geometry::Torus { periods }
            }
            "interval" => {
                let length = g.required("length", parse_real)?;
                let length = g.check("length", length, length > 0.0, "length must be positive")?;
                if let Some(d) = g.optional("dimension", parse_usize)? {
                    g.check("dimension", (), d == 1, "an interval has dimension 1")?;
                }
                Geometry::Interval { length }
            }
            other => {
                return Err(g.at("kind", format!("unknown geometry kind {other:?}")));
            }
        };

        let op = section("operator");
        let potential = op.optional("potential", parse_matrix)?.unwrap_or_else(|| vec![vec![0.0]]);
        let symbol = match op.optional("symbol", word)?.as_deref() {
            None | Some("laplace") => {
                if op.raw("coupling").is_some() {
                    return Err(op.at("coupling", "coupling needs symbol = one_form"));
                }
                Symbol::Laplace
            }
            Some("one_form") => {
                let coupling = op.optional("coupling", parse_real)?.unwrap_or(1.0);
                let coupling = op.check("coupling", coupling, coupling > -1.0, "coupling must exceed -1")?;
                if !matches!(geometry, Geometry::Torus { .. }) {
                    return Err(op.at("symbol", "one_form symbol needs a torus"));
                }
                if potential.len() != 1 {
                    return Err(op.at("potential", "one_form takes a scalar potential"));
                }
                Symbol::OneForm { coupling }
            }
            Some(other) => {
                return Err(op.at("symbol", format!("unknown symbol {other:?}")));
            }
        };
        let order = op.optional("order", parse_usize)?;
        let max_order = if matches!(symbol, Symbol::OneForm { .. }) { 1 } else { 4 };
        let msg = format!("order must be at most {max_order} for this model");
        let order = op.check("order", order, order.is_none_or(|k| k <= max_order), &msg)?;

        let b = section("boundary");
        let boundary = match b.optional("bc", word)?.as_deref() {
            None => None,
            Some(kind) => Some(match kind {
                "dd" | "dirichlet" => Boundary::Dirichlet,
                "nn" | "neumann" => Boundary::Neumann,
                "dn" => Boundary::DirichletNeumann,
                "robin" => Boundary::Robin(b.required("robin", parse_real)?),
                other => return Err(b.at("bc", format!("unknown boundary condition {other:?}"))),
            }),
        };
        if b.raw("robin").is_some() && !matches!(boundary, Some(Boundary::Robin(_))) {
            return Err(b.at("robin", "robin constant needs bc = robin"));
        }
        match (&geometry, boundary) {
            (Geometry::Interval { .. }, None) => {
                return Err(b.err("bc", None, "an interval needs a boundary condition"))
            }
            (Geometry::Interval { .. }, Some(_)) => {
                if potential.len() != 1 {
                    return Err(op.at("potential", "intervals take a scalar potential"));
                }
            }
            (_, Some(_)) => return Err(b.at("bc", "only intervals have a boundary")),
            _ => {}
        }

        let gr = section("grid");
        let start = gr.required("start", parse_real)?;
        let start = gr.check("start", start, start > 0.0, "t must be positive")?;
        let stop = gr.optional("stop", parse_real)?.unwrap_or(start);
        let stop = gr.check("stop", stop, stop >= start, "stop must be at least start")?;
        let count = gr.optional("count", parse_usize)?.unwrap_or(1);
        let count = gr.check("count", count, (1..=10_000).contains(&count), "count must be between 1 and 10000")?;
        let geometric = gr.optional("geometric", parse_bool)?.unwrap_or(true);
        let grid = Grid { start, stop, count, geometric };

        let tol = section("tolerance");
        let tolerance = if tol.entries.is_some() {
            let abs = tol.required("abs", parse_real)?;
            let abs = tol.check("abs", abs, abs > 0.0, "tolerance must be positive")?;
            let rel = tol.required("rel", parse_real)?;
            let rel = tol.check("rel", rel, rel > 0.0, "tolerance must be positive")?;
            Some(Tolerance { abs, rel })
        } else {
            None
        };

        let out = section("output");
        let format = match out.optional("format", word)?.as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(out.at("format", format!("unknown format {other:?}"))),
        };
        let path = out.optional("path", |s| Ok(s.trim().to_string()))?;

        Ok(RunConfig { task, geometry, potential, symbol, boundary, order, grid, tolerance, format, path })
    }

    /// Resolves the task from the command line against the config file.
    pub fn resolve_task(&self, cli: Task) -> Result<Task, CliError> {
        match self.task {
            Some(t) if t != cli => {
                Err(CliError::Validation(format!("config declares task {t} but {cli} was requested")))
            }
            _ => {
                if cli.checks_tolerance() && self.tolerance.is_none() {
                    return Err(CliError::Validation(format!("task {cli} needs a [tolerance] section")));
                }
                Ok(cli)
            }
        }
    }
}
