//! Runs a scenario and writes its report.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::generators::{find_generator, Context, Job, Outcome, Status, Table};
use crate::scenario::Scenario;
use crate::ScenarioError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Directory for the report and CSV sidecars; nothing is written when unset.
    pub out_dir: Option<PathBuf>,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    /// Worker threads; defaults to rayon's choice.
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub generator: String,
    pub seed: u64,
    pub status: Status,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    pub details: Value,
    #[serde(skip)]
    pub table: Option<Table>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub verified: usize,
    pub refuted: usize,
    pub inconclusive: usize,
    pub error: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub scenario: String,
    pub seed: u64,
    pub config: Value,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
    pub exit_code: i32,
    pub elapsed_ms: u64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Seed for the `i`-th check of a scenario.
pub fn check_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn config_echo(s: &Scenario, ctx: &Context) -> Value {
    json!({
        "domain": s.domain,
        "order": s.order,
        "ideal": s.ideal,
        "caps": {
            "deriv_cap": ctx.cfg.deriv_cap,
            "probes": ctx.cfg.probes,
            "grid": ctx.cfg.grid,
            "max_joins": ctx.cfg.max_joins,
            "quadrature_order": ctx.quad.order,
            "quadrature_subdivisions": ctx.quad.subdivisions,
            "extra_points": s.caps.extra_points,
        },
        "csv": s.csv,
    })
}

fn run_job(job: &Job, ctx: &Context) -> Outcome {
    match catch_unwind(AssertUnwindSafe(|| job(ctx))) {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => Outcome {
            status: Status::Error,
            details: json!({ "error": format!("{e:#}") }),
            table: None,
        },
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            Outcome {
                status: Status::Error,
                details: json!({ "error": msg }),
                table: None,
            }
        }
    }
}

/// Validates every check, runs them (in parallel when `jobs` allows) and
/// assembles the report in declared order. Input problems surface as
/// errors before anything runs.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<Report, ScenarioError> {
    let seed = opts.seed.unwrap_or(s.seed);
    let ctx = Context {
        domain: s.open_set()?,
        order: s.index_order(),
        ideal: s.ideal_descriptor()?,
        cfg: s.membership_config()?,
        quad: s.quadrature()?,
        seed,
    };
    let mut names = std::collections::BTreeSet::new();
    let jobs: Vec<Job> = s
        .checks
        .iter()
        .map(|c| {
            if !names.insert(file_stem(&c.name)) {
                return Err(ScenarioError::Invalid(format!("duplicate check name `{}`", c.name)));
            }
            let g = find_generator(&c.generator).ok_or_else(|| ScenarioError::UnknownGenerator(c.generator.clone()))?;
            g.prepare(&c.params)
                .map_err(|e| ScenarioError::Invalid(format!("check `{}`: {e}", c.name)))
        })
        .collect::<Result<_, _>>()?;

    let start = Instant::now();
    let run_all = || -> Vec<(Outcome, u64)> {
        jobs.par_iter()
            .enumerate()
            .map(|(i, job)| {
                let ctx = Context {
                    seed: check_seed(seed, i),
                    ..ctx.clone()
                };
                log::info!("running check `{}`", s.checks[i].name);
                let t = Instant::now();
                let out = run_job(job, &ctx);
                let ms = t.elapsed().as_millis() as u64;
                log::debug!("check `{}`: {} in {ms} ms", s.checks[i].name, out.status.as_str());
                (out, ms)
            })
            .collect()
    };
    let outcomes = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ScenarioError::Invalid(format!("thread pool: {e}")))?
            .install(run_all),
        None => run_all(),
    };

    let mut summary = Summary::default();
    let checks: Vec<CheckReport> = s
        .checks
        .iter()
        .zip(outcomes)
        .enumerate()
        .map(|(i, (c, (o, ms)))| {
            match o.status {
                Status::Verified => summary.verified += 1,
                Status::Refuted => summary.refuted += 1,
                Status::Inconclusive => summary.inconclusive += 1,
                Status::Error => summary.error += 1,
            }
            let csv = (s.csv && o.table.is_some())
                .then(|| format!("{}.{}.csv", file_stem(&s.name), file_stem(&c.name)));
            CheckReport {
                name: c.name.clone(),
                generator: c.generator.clone(),
                seed: check_seed(seed, i),
                status: o.status,
                elapsed_ms: ms,
                csv,
                details: o.details,
                table: o.table,
            }
        })
        .collect();
    let exit_code = if summary.refuted + summary.error > 0 { 1 } else { 0 };
    let report = Report {
        tool: "foam",
        version: VERSION,
        scenario: s.name.clone(),
        seed,
        config: config_echo(s, &ctx),
        checks,
        summary,
        exit_code,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    if let Some(dir) = &opts.out_dir {
        write_outputs(&report, dir)?;
    }
    Ok(report)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |e| ScenarioError::Io(path.display().to_string(), e)
}

/// Writes `bytes` to a temporary file in the target directory and renames it
/// into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ScenarioError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| ScenarioError::Io(path.display().to_string(), e.error))?;
    Ok(())
}

fn csv_bytes(t: &Table) -> Result<Vec<u8>, ScenarioError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| ScenarioError::Invalid(format!("csv: {e}"));
    w.write_record(&t.header).map_err(err)?;
    for r in &t.rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| ScenarioError::Invalid(format!("csv: {e}")))
}

pub fn report_path(dir: &Path, scenario: &str) -> PathBuf {
    dir.join(format!("{}.report.json", file_stem(scenario)))
}

fn write_outputs(r: &Report, dir: &Path) -> Result<(), ScenarioError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    for c in &r.checks {
        if let (Some(name), Some(t)) = (&c.csv, &c.table) {
            write_atomic(&dir.join(name), &csv_bytes(t)?)?;
        }
    }
    write_atomic(&report_path(dir, &r.scenario), r.to_json().as_bytes())
}

/// The report with every `elapsed_ms` field removed.
pub fn without_timings(mut v: Value) -> Value {
    fn strip(v: &mut Value) {
        match v {
            Value::Object(m) => {
                m.remove("elapsed_ms");
                m.values_mut().for_each(strip);
            }
            Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    strip(&mut v);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"{
        "name": "unit test",
        "domain": {"boxes": [[[-1, 1]]]},
        "order": "nat",
        "ideal": {"sigma": {"kind": "points", "points": [[0.0]]}},
        "csv": true,
        "checks": [
            {"name": "zero", "generator": "zero"},
            {"name": "one", "generator": "diagonal", "params": {"psi": "(const 1)"}},
            {"name": "off", "generator": "off_diagonal", "params": {"psis": ["(coord 0)", "(const 2)"]}}
        ]
    }"#;

    #[test]
    fn runs_in_order_and_writes_files() {
        let s = Scenario::from_json(TEXT).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            jobs: Some(2),
            ..Default::default()
        };
        let r = run_scenario(&s, &opts).unwrap();
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["zero", "one", "off"]);
        assert_eq!(r.checks[1].status, Status::Refuted);
        assert_eq!(r.exit_code, 1);
        assert!(report_path(dir.path(), "unit test").exists());
        assert!(dir.path().join("unit_test.off.csv").exists());
        let again = run_scenario(&s, &RunOptions::default()).unwrap();
        let a = without_timings(serde_json::to_value(&r).unwrap());
        let b = without_timings(serde_json::to_value(&again).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn input_errors_stop_the_run() {
        let unknown = TEXT.replace("\"zero\"}", "\"nope\"}");
        let s = Scenario::from_json(&unknown).unwrap();
        assert!(matches!(run_scenario(&s, &RunOptions::default()), Err(ScenarioError::UnknownGenerator(_))));
        let dup = TEXT.replace("\"one\"", "\"zero\"");
        let s = Scenario::from_json(&dup).unwrap();
        assert!(matches!(run_scenario(&s, &RunOptions::default()), Err(ScenarioError::Invalid(_))));
    }
}
