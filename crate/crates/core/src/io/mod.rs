//! Problem files, run orchestration and output files.

pub mod spec;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{
    check_persistence, comparison_monitor, divide_rule_experiment, fit_growth_exponent, persistence_csv,
    report_header, support_series,
};
use crate::barenblatt::Barenblatt;
use crate::data::{BoundaryData, Source};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::grid::Grid;
use crate::isotherm::{IsothermKind, IsothermModel};
use crate::system::{solve_system, SystemProblem};
use crate::trajectory::{RunTrajectory, SolverConfig};

pub use spec::{parse_spec, ProblemSpec, SnapshotOutput};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Written last into every output directory; its presence marks completion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    /// SHA-256 of the resolved problem text.
    pub spec_hash: String,
    pub output_dir: String,
    pub files: Vec<String>,
    pub wall_clock_seconds: f64,
    pub steps: usize,
    pub abort_reason: Option<String>,
}

pub fn spec_hash(resolved: &str) -> String {
    hex::encode(Sha256::digest(resolved.as_bytes()))
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
    started: Instant,
    subcommand: String,
    hash: String,
}

impl Output {
    fn create(dir: &Path, subcommand: &str, hash: String) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let manifest = dir.join("manifest.json");
        if manifest.exists() {
            fs::remove_file(manifest)?;
        }
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), started: Instant::now(), subcommand: subcommand.into(), hash })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(self, steps: usize, abort_reason: Option<String>) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            subcommand: self.subcommand,
            spec_hash: self.hash,
            output_dir: self.dir.display().to_string(),
            files: self.files,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            steps,
            abort_reason,
        };
        fs::write(self.dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(manifest)
    }

    /// Records an abort in the manifest and passes the error on.
    fn abort<T>(self, err: Error) -> Result<T> {
        self.finish(0, Some(err.to_string()))?;
        Err(err)
    }
}

fn load(spec_path: &Path) -> Result<(ProblemSpec, String)> {
    let text = fs::read_to_string(spec_path)?;
    let spec = parse_spec(&text)?;
    let resolved = spec.emit();
    Ok((spec, resolved))
}

fn write_trajectory(
    out: &mut Output,
    traj: &RunTrajectory,
    model: &IsothermModel,
    name: &str,
    snapshots: SnapshotOutput,
) -> Result<()> {
    out.write(&format!("{name}_diagnostics.csv"), &traj.diagnostics_csv())?;
    let indices: Vec<usize> = match snapshots {
        SnapshotOutput::All => (0..traj.snapshots.len()).collect(),
        SnapshotOutput::Final => vec![traj.snapshots.len() - 1],
        SnapshotOutput::None => vec![],
    };
    for k in indices {
        out.write(&format!("{name}_snapshot_{k:04}.csv"), &traj.snapshot_csv(k, model))?;
    }
    Ok(())
}

fn write_support_reports(out: &mut Output, traj: &RunTrajectory, name: &str) -> Result<usize> {
    let eps = traj.eps_supp;
    let series = support_series(traj, eps, traj.center);
    out.write(&format!("{name}_support.csv"), &series.to_csv())?;
    let violations = check_persistence(traj, eps);
    out.write(&format!("{name}_persistence.csv"), &persistence_csv(traj, eps, &violations))?;
    Ok(violations.len())
}

fn comparison_report(traj: &RunTrajectory, m_bound: f64, horizon: f64) -> String {
    let c = comparison_monitor(traj, m_bound, horizon);
    let mut s = report_header("comparison", &[("M", fmt_f64(m_bound)), ("T", fmt_f64(horizon))]);
    s.push_str("sup_w,bound,pass\n");
    let _ = writeln!(s, "{},{},{}", fmt_f64(c.sup_w), fmt_f64(c.bound), c.pass);
    s
}

/// `run`: solves the problem and writes diagnostics, snapshots and reports.
pub fn run(spec_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let (spec, resolved) = load(spec_path)?;
    let (problem, config) = spec.build()?;
    let mut out = Output::create(out_dir, "run", spec_hash(&resolved))?;
    out.write("resolved.spec", &resolved)?;
    let traj = match solve_system(&problem, &config) {
        Ok(t) => t,
        Err(e) => return out.abort(e),
    };
    let prefix = spec.output.prefix.clone();
    write_trajectory(&mut out, &traj, &problem.isotherm, &prefix, spec.output.snapshots)?;
    if problem.boundary.is_vacuum() {
        write_support_reports(&mut out, &traj, &prefix)?;
    }
    if let Some(m) = problem.bound {
        out.write(&format!("{prefix}_comparison.csv"), &comparison_report(&traj, m, problem.horizon))?;
    }
    out.finish(traj.steps, None)
}

/// `persistence`: runs a vacuum-boundary problem and reports support
/// persistence and growth. Violations are reported, not treated as errors.
pub fn persistence(spec_path: &Path, out_dir: &Path) -> Result<(RunManifest, usize)> {
    let (spec, resolved) = load(spec_path)?;
    let (problem, config) = spec.build()?;
    if !problem.boundary.is_vacuum() {
        return Err(Error::Invalid("persistence checks need `type = vacuum` boundary data".into()));
    }
    let mut out = Output::create(out_dir, "persistence", spec_hash(&resolved))?;
    out.write("resolved.spec", &resolved)?;
    let traj = match solve_system(&problem, &config) {
        Ok(t) => t,
        Err(e) => return out.abort(e),
    };
    let prefix = spec.output.prefix.clone();
    write_trajectory(&mut out, &traj, &problem.isotherm, &prefix, spec.output.snapshots)?;
    let violations = write_support_reports(&mut out, &traj, &prefix)?;
    Ok((out.finish(traj.steps, None)?, violations))
}

/// Splits species `1..=k` and `k+1..=N` of a problem into two blocks.
pub fn split_problem(problem: &SystemProblem, k: usize) -> Result<(SystemProblem, SystemProblem)> {
    let n = problem.n_species();
    if k == 0 || k >= n {
        return Err(Error::Invalid(format!("split must satisfy 1 <= k < N = {n}, got {k}")));
    }
    let part = |range: std::ops::Range<usize>| SystemProblem {
        initial: problem.initial[range.clone()].to_vec(),
        forcing: problem.forcing[range.clone()].to_vec(),
        boundary: match &problem.boundary {
            BoundaryData::Vacuum => BoundaryData::Vacuum,
            BoundaryData::Dirichlet(z) => BoundaryData::Dirichlet(z[range].to_vec()),
        },
        ..problem.clone()
    };
    Ok((part(0..k), part(k..n)))
}

/// `divide-rule`: full system versus the two blocks split after species `k`.
pub fn divide_rule(spec_path: &Path, out_dir: &Path, split: usize) -> Result<RunManifest> {
    let (spec, resolved) = load(spec_path)?;
    let (problem, config) = spec.build()?;
    let (hat, check) = split_problem(&problem, split)?;
    let mut out = Output::create(out_dir, "divide-rule", spec_hash(&resolved))?;
    out.write("resolved.spec", &resolved)?;
    let outcome = match divide_rule_experiment(&hat, &check, &config) {
        Ok(o) => o,
        Err(e) => return out.abort(e),
    };
    let prefix = spec.output.prefix.clone();
    for (suffix, traj) in [("full", &outcome.full), ("hat", &outcome.hat), ("check", &outcome.check)] {
        write_trajectory(&mut out, traj, &problem.isotherm, &format!("{prefix}_{suffix}"), spec.output.snapshots)?;
    }
    out.write(&format!("{prefix}_divide_rule.csv"), &outcome.report.to_csv())?;
    out.finish(outcome.report.steps, None)
}

/// `check-isotherm`: structure report as CSV.
pub fn check_isotherm(kind: IsothermKind, s_min: f64, s_max: f64, samples: usize) -> Result<String> {
    let model = IsothermModel::new(kind)?;
    Ok(model.check_structure(s_min, s_max, samples)?.to_csv())
}

/// One Barenblatt benchmark run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub m: f64,
    pub cells: usize,
    pub dt: f64,
    pub steps: usize,
    pub l1_error: f64,
    pub lambda_fit: f64,
    pub lambda_exact: f64,
    pub persistence_violations: usize,
    pub mass_drift: f64,
}

/// Setup shared by the benchmark: `C = 1`, starting time 1, box `[-10, 10]`,
/// final time 8 (m = 2) or 16 (otherwise).
pub fn barenblatt_problem(m: f64, cells: usize) -> Result<(SystemProblem, Barenblatt)> {
    let grid = Grid::new_1d(20.0, cells, -10.0)?;
    let exact = Barenblatt::new(m, 1, 1.0, [0.0, 0.0])?;
    let t_end = if m == 2.0 { 8.0 } else { 16.0 };
    let problem = SystemProblem {
        grid,
        isotherm: IsothermModel::power_law(m)?,
        initial: vec![exact.field(grid, 1.0)],
        forcing: vec![Source::zero(grid)],
        boundary: BoundaryData::Vacuum,
        t_start: 1.0,
        horizon: t_end - 1.0,
        bound: None,
    };
    Ok((problem, exact))
}

pub fn barenblatt_benchmark(m: f64, cells: usize) -> Result<(BenchmarkRow, RunTrajectory)> {
    let (problem, exact) = barenblatt_problem(m, cells)?;
    let config = SolverConfig { snapshots: 200, center: Some([0.0, 0.0]), ..Default::default() };
    let traj = solve_system(&problem, &config)?;
    let last = traj.final_snapshot();
    let reference = exact.field(problem.grid, traj.t_end);
    let l1_error = last.species[0]
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * problem.grid.cell_volume();
    let fit = fit_growth_exponent(&support_series(&traj, config.eps_supp, [0.0, 0.0]), 0.0)?;
    let m0 = traj.diagnostics[0].mass;
    let mass_drift = traj.diagnostics.iter().map(|d| ((d.mass - m0) / m0).abs()).fold(0.0, f64::max);
    let row = BenchmarkRow {
        m,
        cells,
        dt: traj.dt,
        steps: traj.steps,
        l1_error,
        lambda_fit: fit.lambda,
        lambda_exact: exact.growth_exponent(),
        persistence_violations: check_persistence(&traj, config.eps_supp).len(),
        mass_drift,
    };
    Ok((row, traj))
}

/// `benchmark`: Barenblatt suite over exponents and grid levels.
pub fn benchmark(out_dir: &Path, exponents: &[f64], levels: &[usize]) -> Result<(RunManifest, Vec<BenchmarkRow>)> {
    let mut out = Output::create(out_dir, "benchmark", spec_hash(&format!("{exponents:?}{levels:?}")))?;
    let mut rows = Vec::new();
    let mut steps = 0;
    let mut csv = report_header(
        "barenblatt_benchmark",
        &[("c", fmt_f64(1.0)), ("t0", fmt_f64(1.0)), ("domain", "-10,10".into()), ("eps_supp", fmt_f64(1e-8))],
    );
    csv.push_str("m,cells,dt,steps,l1_error,lambda_fit,lambda_exact,persistence_violations,mass_drift\n");
    for &m in exponents {
        for &cells in levels {
            let (row, traj) = match barenblatt_benchmark(m, cells) {
                Ok(r) => r,
                Err(e) => return out.abort(e),
            };
            steps += row.steps;
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{}",
                fmt_f64(m),
                cells,
                fmt_f64(row.dt),
                row.steps,
                fmt_f64(row.l1_error),
                fmt_f64(row.lambda_fit),
                fmt_f64(row.lambda_exact),
                row.persistence_violations,
                fmt_f64(row.mass_drift)
            );
            out.write(&format!("barenblatt_m{m}_n{cells}_diagnostics.csv"), &traj.diagnostics_csv())?;
            rows.push(row);
        }
    }
    out.write("benchmark.csv", &csv)?;
    Ok((out.finish(steps, None)?, rows))
}
