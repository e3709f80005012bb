use heatkern::spectra::sphere_trace;
use heatkern_cli::config::{Ini, RunConfig};
use heatkern_cli::{run_text, CliError, Task};
use proptest::prelude::*;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn heatkern(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heatkern"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("HEATKERN_THREADS", n),
        None => cmd.env_remove("HEATKERN_THREADS"),
    };
    cmd.output().expect("binary runs")
}

/// Unit-S² trace coefficients of `(4πt)^{-1}·4π Σ c_k t^k`.
const S2: [f64; 5] = [1.0, 1.0 / 3.0, 1.0 / 15.0, 4.0 / 315.0, 1.0 / 315.0];

/// Independent partial sum `t^{-1} Σ_{j≤order} t^j Σ_{k+l=j} c_k (−q)^l / l!`.
fn s2_partial_sum(q: f64, order: usize, t: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..=order {
        let mut cj = 0.0;
        let mut fact = 1.0;
        for l in 0..=j {
            if l > 0 {
                fact *= l as f64;
            }
            cj += S2[j - l] * (-q).powi(l as i32) / fact;
        }
        s += cj * t.powi(j as i32);
    }
    s / t
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn sphere_config(q: f64, order: usize, start: f64, stop: f64, count: i64, abs: f64, rel: f64) -> String {
    format!(
        "task = compare\n[geometry]\nkind = sphere\ndimension = 2\n[operator]\npotential = {q}\norder = {order}\n\
         [grid]\nstart = {start:e}\nstop = {stop:e}\ncount = {count}\n[tolerance]\nabs = {abs:e}\nrel = {rel:e}\n"
    )
}

#[test]
fn sphere_fixture_passes_with_expected_columns() {
    let out = heatkern(&["compare", "--config", fixture("sphere-s2-compare.ini").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# heatkern-schema=1\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["t", "asymptotic", "oracle", "abs_err", "rel_err"]);
    assert_eq!(rows.len(), 1 + 12 + 1);
    assert_eq!(rows.last().unwrap()[0], "summary");
    for r in &rows[1..13] {
        let v: Vec<f64> = r.iter().map(|s| s.parse().unwrap()).collect();
        let (t, asym, oracle) = (v[0], v[1], v[2]);
        assert!((asym - s2_partial_sum(0.25, 3, t)).abs() < 1e-12 * asym, "t={t}");
        let exact = sphere_trace(2, 1.0, t).unwrap() * (-0.25 * t).exp();
        assert!((oracle - exact).abs() < 1e-13 * exact);
        assert!((v[3] - (asym - oracle).abs()).abs() <= 1e-16 * oracle);
        // Every value carries 17 significant digits.
        assert!(r.iter().all(|s| s.split('e').next().unwrap().trim_start_matches('-').len() == 18));
    }
}

#[test]
fn negative_t_is_a_validation_error() {
    let out = heatkern(&["compare", "--config", fixture("negative-t.ini").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 8") && err.contains("grid.start"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn tightened_tolerance_breaches_at_first_failing_t() {
    let path = fixture("sphere-s2-tight.ini");
    let out = heatkern(&["compare", "--config", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let cfg = RunConfig::from_file(&path).unwrap();
    let tol = cfg.tolerance.unwrap();
    let first = cfg
        .grid
        .points()
        .into_iter()
        .find(|&t| {
            let exact = sphere_trace(2, 1.0, t).unwrap() * (-0.25 * t).exp();
            (s2_partial_sum(0.25, 1, t) - exact).abs() > tol.abs + tol.rel * exact
        })
        .expect("fixture must breach");
    let needle = format!("first_failing_t={first:.16e}");
    assert!(String::from_utf8_lossy(&out.stdout).contains(&needle));
    assert!(String::from_utf8_lossy(&out.stderr).contains(&needle));
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    for name in ["sphere-s2-compare.ini", "sphere-s2-tight.ini"] {
        let p = fixture(name);
        let args = ["compare", "--config", p.to_str().unwrap()];
        let a = heatkern(&args, None);
        let b = heatkern(&args, Some("1"));
        let c = heatkern(&args, Some("3"));
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.stdout, c.stdout);
    }
    let bad = heatkern(&["compare", "--config", fixture("sphere-s2-compare.ini").to_str().unwrap()], Some("zero"));
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn out_flag_overrides_config_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    let configured = dir.path().join("configured.json");
    let text = std::fs::read_to_string(fixture("sphere-s2-compare.ini"))
        .unwrap()
        .replace("format = csv", &format!("format = json\npath = {}", configured.display()));
    std::fs::write(&cfg, text).unwrap();

    let out = heatkern(&["compare", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let first = std::fs::read(&configured).unwrap();

    let override_path = dir.path().join("override.json");
    let out = heatkern(&["compare", "--config", cfg.to_str().unwrap(), "--out", override_path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&override_path).unwrap(), first);

    let doc: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 12);
    assert_eq!(doc["summary"]["status"], "pass");
    let t0 = doc["rows"][0]["t"].to_string();
    assert_eq!(t0, "1.0000000000000000e-3");
}

#[test]
fn unreadable_config_and_bad_arguments() {
    let out = heatkern(&["compare", "--config", "/nonexistent/run.ini"], None);
    assert_eq!(out.status.code(), Some(1));
    let out = heatkern(&["frobnicate", "--config", "x.ini"], None);
    assert_eq!(out.status.code(), Some(1));
    // Task mismatch between the command line and the file.
    let out = heatkern(&["oracle", "--config", fixture("sphere-s2-compare.ini").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
}

fn config_error(text: &str) -> (usize, String) {
    match RunConfig::parse(text) {
        Err(CliError::Config { line, field, .. }) => (line, field),
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn parser_diagnostics_name_line_and_field() {
    let base = sphere_config(0.0, 2, 1e-3, 1e-2, 4, 1e-6, 1e-6);
    assert!(RunConfig::parse(&base).is_ok());
    assert_eq!(
        config_error(&base.replace("dimension = 2", "dimension = 2\ncolour = red")),
        (5, "geometry.colour".into())
    );
    assert_eq!(config_error(&base.replace("[grid]", "[grid")), (8, "".into()));
    assert_eq!(config_error(&base.replace("count = 4", "count = four")), (11, "grid.count".into()));
    assert_eq!(config_error(&base.replace("order = 2", "order = 2\norder = 3")), (8, "operator.order".into()));
    assert_eq!(config_error(&base.replace("[tolerance]", "[tolerances]")).1, "tolerances");
    assert_eq!(config_error(&base.replace("abs = 1e-6", "abs = 0")).1, "tolerance.abs");
    assert_eq!(config_error(&base.replace("kind = sphere", "sphere")), (3, "".into()));
    assert_eq!(config_error(&base.replace("dimension = 2", "dimension = 5")).1, "geometry.dimension");
    assert_eq!(config_error(&base.replace("order = 2", "order = 9")).1, "operator.order");
    assert_eq!(config_error(&base.replace("potential = 0", "potential = 1, 2; 3")).1, "operator.potential");
    assert_eq!(config_error(&base.replace("potential = 0", "potential = 1, 2; 3, 4")).1, "operator.potential");
    let missing = base.replace("start = 1e-3\n", "");
    assert_eq!(config_error(&missing).1, "grid.start");
}

#[test]
fn parser_handles_comments_arrays_and_matrices() {
    let text = "; leading comment\n# another\n[geometry] # trailing\nkind = torus\nperiods = 1.0, 2.5 # two periods\n\
                [operator]\npotential = 0.5, 0.1; 0.1, -0.2\n[grid]\nstart = 0.01\n";
    let ini = Ini::parse(text).unwrap();
    assert_eq!(ini.sections["geometry"]["periods"].line, 5);
    let cfg = RunConfig::parse(text).unwrap();
    assert_eq!(cfg.potential, vec![vec![0.5, 0.1], vec![0.1, -0.2]]);
    assert_eq!(cfg.grid.points(), vec![0.01]);
    assert!(cfg.task.is_none());
}

#[test]
fn asymptotics_and_oracle_tasks() {
    let text = sphere_config(0.0, 2, 1e-3, 1e-2, 3, 1e-6, 1e-6).replace("task = compare\n", "");
    let (code, out) = run_text(Task::Asymptotics, &text, None);
    assert_eq!(code, 0);
    let rows = csv_rows(&out.unwrap());
    assert_eq!(rows[0], ["t", "asymptotic"]);
    assert_eq!(rows.len(), 4);
    let (code, out) = run_text(Task::Oracle, &text, Some(2));
    assert_eq!(code, 0);
    assert_eq!(csv_rows(&out.unwrap())[0], ["t", "oracle"]);
    let no_tol = text.replace("[tolerance]\nabs = 1e-6\nrel = 1e-6\n", "");
    assert_eq!(run_text(Task::Compare, &no_tol, None).0, 1);
    assert_eq!(run_text(Task::Oracle, &no_tol, None).0, 0);
}

#[test]
fn interval_models_track_their_oracles() {
    for (bc, extra) in [("dd", ""), ("nn", ""), ("dn", ""), ("robin", "robin = 0.7\n"), ("robin", "robin = -1.3\n")] {
        let text = format!(
            "[geometry]\nkind = interval\nlength = 3.0\n[boundary]\nbc = {bc}\n{extra}[operator]\npotential = 0.3\norder = 4\n\
             [grid]\nstart = 1e-3\nstop = 1e-2\ncount = 5\n[tolerance]\nabs = 1e-9\nrel = 1e-9\n"
        );
        let (code, out) = run_text(Task::Compare, &text, None);
        assert_eq!(code, 0, "{bc} {extra}: {out:?}");
    }
    let missing_bc = "[geometry]\nkind = interval\nlength = 1\n[grid]\nstart = 0.1\n";
    assert_eq!(config_error(missing_bc).1, "boundary.bc");
}

#[test]
fn torus_models() {
    let laplace =
        "[geometry]\nkind = torus\nperiods = 1.0, 2.0\n[operator]\npotential = 0.5, 0.1; 0.1, -0.2\norder = 4\n\
                   [grid]\nstart = 1e-3\nstop = 1e-2\ncount = 4\n[tolerance]\nabs = 1e-8\nrel = 1e-10\n";
    assert_eq!(run_text(Task::Compare, laplace, None).0, 0);
    let one_form = "[geometry]\nkind = torus\nperiods = 1.0, 1.0\n[operator]\nsymbol = one_form\ncoupling = 1.0\npotential = 0.5\n\
                    [grid]\nstart = 1e-3\nstop = 1e-2\ncount = 6\n[tolerance]\nabs = 1e-3\nrel = 1e-4\n";
    let (code, out) = run_text(Task::Report, one_form, None);
    assert_eq!(code, 0);
    let out = out.unwrap();
    let coeff_block = out.split("exponent,asymptotic,fitted,fit_error\n").nth(1).unwrap();
    let a0: Vec<f64> = coeff_block.lines().next().unwrap().split(',').map(|s| s.parse().unwrap()).collect();
    assert!((a0[1] - 3.0 / (8.0 * std::f64::consts::PI)).abs() < 1e-12);
    assert!((a0[2] - a0[1]).abs() < 1e-5);
    assert_eq!(
        config_error(&one_form.replace("order", "x").replace("coupling = 1.0", "coupling = 1.0\norder = 2")).1,
        "operator.order"
    );
    // Too few points for the report fit.
    assert_eq!(run_text(Task::Report, &one_form.replace("count = 6", "count = 3"), None).0, 1);
}

/// Mutations applied to a valid sphere config.
#[derive(Debug, Clone)]
struct Mutation {
    start: f64,
    stop_factor: f64,
    count: i64,
    abs: f64,
    rel: f64,
    order: usize,
    q: f64,
}

fn mutation() -> impl Strategy<Value = Mutation> {
    (
        prop_oneof![4 => 1e-4f64..0.2, 1 => -0.1f64..=0.0],
        prop_oneof![4 => 1.0f64..50.0, 1 => 0.1f64..1.0],
        prop_oneof![4 => 1i64..8, 1 => -2i64..=0],
        prop_oneof![4 => 1e-12f64..1e-2, 1 => -1e-3f64..=0.0],
        prop_oneof![4 => 1e-12f64..1e-2, 1 => -1e-3f64..=0.0],
        0usize..6,
        -1.0f64..1.0,
    )
        .prop_map(|(start, stop_factor, count, abs, rel, order, q)| Mutation {
            start,
            stop_factor,
            count,
            abs,
            rel,
            order,
            q,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn exit_codes_partition_outcomes(m in mutation()) {
        let stop = m.start * m.stop_factor;
        let text = sphere_config(m.q, m.order, m.start, stop, m.count, m.abs, m.rel);
        let invalid = m.start <= 0.0 || stop < m.start || m.count < 1 || m.abs <= 0.0 || m.rel <= 0.0 || m.order > 4;
        let (code, out) = run_text(Task::Compare, &text, None);
        if invalid {
            prop_assert_eq!(code, 1, "{:?}", out);
            return Ok(());
        }
        let cfg = RunConfig::parse(&text).unwrap();
        // Predict the verdict independently and skip razor-edge cases.
        let mut breach = false;
        for t in cfg.grid.points() {
            let exact = sphere_trace(2, 1.0, t).unwrap() * (-m.q * t).exp();
            let err = (s2_partial_sum(m.q, m.order, t) - exact).abs();
            let bound = m.abs + m.rel * exact;
            prop_assume!((err - bound).abs() > 1e-9 * bound);
            breach |= err > bound;
        }
        prop_assert_eq!(code, if breach { 2 } else { 0 });
        prop_assert!(out.is_ok());
    }

    #[test]
    fn garbage_lines_never_escape_the_exit_code_set(line in "[a-z\\[\\]=;# .0-9-]{0,20}", at in 0usize..20) {
        let base = sphere_config(0.1, 2, 1e-3, 1e-2, 3, 1e-6, 1e-6);
        let mut lines: Vec<&str> = base.lines().collect();
        let at = at.min(lines.len());
        lines.insert(at, &line);
        let text = lines.join("\n");
        let (code, out) = run_text(Task::Compare, &text, None);
        prop_assert!(code == 0 || code == 1 || code == 2);
        prop_assert_eq!(code == 1, out.is_err());
        let again = run_text(Task::Compare, &text, None);
        prop_assert_eq!(code, again.0);
        if let (Ok(a), Ok(b)) = (&out, &again.1) {
            prop_assert_eq!(a, b);
        }
    }
}
