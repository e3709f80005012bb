//! Task execution and deterministic rendering.

use rayon::prelude::*;
use serde_json::{json, Map, Number, Value};

use heatkern::hmds::HeatTraceExpansion;
use heatkern::spectra::fit_expansion;

use crate::config::{Format, RunConfig, Task, Tolerance};
use crate::error::CliError;
use crate::model::Model;

pub const SCHEMA_LINE: &str = "# heatkern-schema=1";

/// Seventeen significant digits in scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: f64,
    pub asymptotic: Option<f64>,
    pub oracle: Option<f64>,
}

impl Row {
    pub fn abs_err(&self) -> Option<f64> {
        Some((self.asymptotic? - self.oracle?).abs())
    }

    pub fn rel_err(&self) -> Option<f64> {
        let o = self.oracle?;
        Some(if o == 0.0 { self.abs_err()? } else { self.abs_err()? / o.abs() })
    }

    /// Within `abs + rel·|oracle|`.
    pub fn within(&self, tol: &Tolerance) -> bool {
        match (self.abs_err(), self.oracle) {
            (Some(e), Some(o)) => e <= tol.abs + tol.rel * o.abs(),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub first_failing_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedCoefficient {
    pub exponent: f64,
    pub asymptotic: f64,
    pub fitted: f64,
    pub fit_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub task: Task,
    pub rows: Vec<Row>,
    pub expansion: Option<HeatTraceExpansion>,
    pub summary: Option<Summary>,
    pub coefficients: Vec<FittedCoefficient>,
}

impl RunResult {
    /// 0 on success, 2 on a tolerance breach.
    pub fn exit_code(&self) -> i32 {
        match &self.summary {
            Some(Summary { first_failing_t: Some(_), .. }) => 2,
            _ => 0,
        }
    }
}

/// Parallelism bound from `HEATKERN_THREADS`, if set.
pub fn thread_limit() -> Result<Option<usize>, CliError> {
    match std::env::var("HEATKERN_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("HEATKERN_THREADS must be a positive integer, got {v:?}"))),
        },
    }
}

pub fn execute(task: Task, cfg: &RunConfig, threads: Option<usize>) -> Result<RunResult, CliError> {
    let task = cfg.resolve_task(task)?;
    let model = Model::build(cfg)?;
    let order = cfg.order.unwrap_or_else(|| model.default_order());
    let expansion = match task {
        Task::Oracle => None,
        _ => Some(model.expansion(order)?),
    };
    let grid = cfg.grid.points();
    if task == Task::Report {
        let p = expansion.as_ref().map_or(0, |e| e.terms().iter().filter(|t| t.coefficient != 0.0).count());
        if !cfg.grid.geometric || grid.len() < 2 * p {
            return Err(CliError::Validation(format!(
                "report fits {p} coefficients and needs a geometric grid of at least {} points",
                2 * p
            )));
        }
    }
    let want_oracle = task != Task::Asymptotics;
    let eval = |&t: &f64| -> Result<Row, CliError> {
        Ok(Row {
            t,
            asymptotic: expansion.as_ref().map(|e| e.eval(t)),
            oracle: if want_oracle { Some(model.oracle(t)?) } else { None },
        })
    };
    let rows: Vec<Row> = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("cannot start thread pool: {e}")))?
            .install(|| grid.par_iter().map(eval).collect::<Result<_, _>>())?,
        None => grid.par_iter().map(eval).collect::<Result<_, _>>()?,
    };
    if rows.iter().any(|r| r.oracle.is_some_and(|v| !v.is_finite()) || r.asymptotic.is_some_and(|v| !v.is_finite())) {
        return Err(CliError::Validation("non-finite trace value on the grid".into()));
    }

    let summary = task.checks_tolerance().then(|| {
        let tol = cfg.tolerance.expect("resolved tasks with tolerance checks carry one");
        Summary {
            max_abs_err: rows.iter().filter_map(Row::abs_err).fold(0.0, f64::max),
            max_rel_err: rows.iter().filter_map(Row::rel_err).fold(0.0, f64::max),
            first_failing_t: rows.iter().find(|r| !r.within(&tol)).map(|r| r.t),
        }
    });

    let mut coefficients = Vec::new();
    if task == Task::Report {
        let exp = expansion.as_ref().expect("report evaluates the expansion");
        let kept: Vec<_> = exp.terms().iter().filter(|t| t.coefficient != 0.0).collect();
        let samples: Vec<(f64, f64)> =
            rows.iter().map(|r| (r.t, r.oracle.expect("report evaluates the oracle"))).collect();
        let exponents: Vec<f64> = kept.iter().map(|t| t.exponent()).collect();
        let fit = fit_expansion(&samples, exp.dim, &exponents)?;
        for (j, term) in kept.iter().enumerate() {
            coefficients.push(FittedCoefficient {
                exponent: term.exponent(),
                asymptotic: term.coefficient,
                fitted: fit.coefficients[j],
                fit_error: fit.errors[j],
            });
        }
    }
    Ok(RunResult { task, rows, expansion, summary, coefficients })
}

fn columns(task: Task) -> &'static [&'static str] {
    match task {
        Task::Asymptotics => &["t", "asymptotic"],
        Task::Oracle => &["t", "oracle"],
        Task::Compare | Task::Report => &["t", "asymptotic", "oracle", "abs_err", "rel_err"],
    }
}

fn row_values(task: Task, r: &Row) -> Vec<f64> {
    let mut v = vec![r.t];
    match task {
        Task::Asymptotics => v.extend(r.asymptotic),
        Task::Oracle => v.extend(r.oracle),
        Task::Compare | Task::Report => {
            v.extend(r.asymptotic);
            v.extend(r.oracle);
            v.extend(r.abs_err());
            v.extend(r.rel_err());
        }
    }
    v
}

pub fn render(result: &RunResult, format: Format) -> String {
    match format {
        Format::Csv => render_csv(result),
        Format::Json => render_json(result),
    }
}

pub fn status_line(summary: &Summary) -> String {
    match summary.first_failing_t {
        None => "status=pass".to_string(),
        Some(t) => format!("status=breach first_failing_t={}", fmt_real(t)),
    }
}

fn render_csv(result: &RunResult) -> String {
    let mut out = String::new();
    out.push_str(SCHEMA_LINE);
    out.push('\n');
    out.push_str(&format!("# task={}\n", result.task));
    out.push_str(&columns(result.task).join(","));
    out.push('\n');
    for r in &result.rows {
        let cells: Vec<String> = row_values(result.task, r).into_iter().map(fmt_real).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    if let Some(s) = &result.summary {
        out.push_str(&format!("summary,,,{},{}\n", fmt_real(s.max_abs_err), fmt_real(s.max_rel_err)));
        out.push_str(&format!("# {}\n", status_line(s)));
    }
    if !result.coefficients.is_empty() {
        out.push_str("\nexponent,asymptotic,fitted,fit_error\n");
        for c in &result.coefficients {
            let cells = [c.exponent, c.asymptotic, c.fitted, c.fit_error].map(fmt_real);
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    out
}

fn num(x: f64) -> Value {
    Value::Number(fmt_real(x).parse::<Number>().expect("formatted finite real is a JSON number"))
}

fn render_json(result: &RunResult) -> String {
    let cols = columns(result.task);
    let rows: Vec<Value> = result
        .rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            for (name, v) in cols.iter().zip(row_values(result.task, r)) {
                m.insert(name.to_string(), num(v));
            }
            Value::Object(m)
        })
        .collect();
    let mut doc = Map::new();
    doc.insert("schema".into(), json!(1));
    doc.insert("task".into(), json!(result.task.name()));
    doc.insert("columns".into(), json!(cols));
    doc.insert("rows".into(), Value::Array(rows));
    if let Some(exp) = &result.expansion {
        let terms: Vec<Value> = exp
            .terms()
            .iter()
            .map(|t| json!({ "exponent": num(t.exponent()), "coefficient": num(t.coefficient) }))
            .collect();
        doc.insert("expansion".into(), Value::Array(terms));
    }
    if let Some(s) = &result.summary {
        doc.insert(
            "summary".into(),
            json!({
                "max_abs_err": num(s.max_abs_err),
                "max_rel_err": num(s.max_rel_err),
                "status": if s.first_failing_t.is_some() { "breach" } else { "pass" },
                "first_failing_t": s.first_failing_t.map_or(Value::Null, num),
            }),
        );
    }
    if !result.coefficients.is_empty() {
        let cs: Vec<Value> = result
            .coefficients
            .iter()
            .map(|c| {
                json!({
                    "exponent": num(c.exponent),
                    "asymptotic": num(c.asymptotic),
                    "fitted": num(c.fitted),
                    "fit_error": num(c.fit_error),
                })
            })
            .collect();
        doc.insert("coefficients".into(), Value::Array(cs));
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
    s.push('\n');
    s
}
