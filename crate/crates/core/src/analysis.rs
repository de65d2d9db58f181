//! Free-boundary experiments and diagnostics computed from run trajectories.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{sum_sources, BoundaryData, Source};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::grid::{Field, Grid};
use crate::isotherm::IsothermModel;
use crate::scalar::run_dt;
use crate::system::{build_stepper, SystemProblem};
use crate::trajectory::{
    check_collar, collar_cells, step_count, step_time, Recorder, RunTrajectory, SolverConfig, Stepper,
};

/// `# report=<name> params=k=v;k=v` header line.
pub fn report_header(name: &str, params: &[(&str, String)]) -> String {
    let p: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("# report={name} params={}\n", p.join(";"))
}

/// Thresholded support radii of `w` and of each species over the snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportSeries {
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    pub cells: Vec<usize>,
    /// `species_radii[i][k]`: radius of species `i` at snapshot `k`.
    pub species_radii: Vec<Vec<f64>>,
    /// `(snapshot, species)` pairs where `supp u_i` is not inside `supp w`.
    pub containment_violations: Vec<(usize, usize)>,
    pub eps_supp: f64,
    pub center: [f64; 2],
}

impl SupportSeries {
    pub fn to_csv(&self) -> String {
        let mut out = report_header(
            "support_series",
            &[("eps_supp", fmt_f64(self.eps_supp)), ("center", format!("{},{}", fmt_f64(self.center[0]), fmt_f64(self.center[1])))],
        );
        out.push_str("t,radius,cells");
        for i in 1..=self.species_radii.len() {
            let _ = write!(out, ",radius_{i}");
        }
        out.push('\n');
        for k in 0..self.times.len() {
            let _ = write!(out, "{},{},{}", fmt_f64(self.times[k]), fmt_f64(self.radii[k]), self.cells[k]);
            for r in &self.species_radii {
                let _ = write!(out, ",{}", fmt_f64(r[k]));
            }
            out.push('\n');
        }
        out
    }
}

pub fn support_series(traj: &RunTrajectory, eps_supp: f64, center: [f64; 2]) -> SupportSeries {
    let mut series = SupportSeries {
        times: Vec::new(),
        radii: Vec::new(),
        cells: Vec::new(),
        species_radii: vec![Vec::new(); traj.n_species],
        containment_violations: Vec::new(),
        eps_supp,
        center,
    };
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let w = snap.w();
        let sw = w.support(eps_supp, center);
        series.times.push(snap.t);
        series.radii.push(sw.radius);
        series.cells.push(sw.cells.len());
        for (i, u) in snap.species.iter().enumerate() {
            let su = u.support(eps_supp, center);
            series.species_radii[i].push(su.radius);
            if su.cells.iter().any(|c| sw.cells.binary_search(c).is_err()) {
                series.containment_violations.push((k, i));
            }
        }
    }
    series
}

/// Fit `R(t) = R0 + C1 t^lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub c1: f64,
    pub lambda: f64,
    pub r0: f64,
    pub samples: usize,
    /// First time used by the fit.
    pub t_min: f64,
}

impl GrowthFit {
    pub fn radius(&self, t: f64) -> f64 {
        self.r0 + self.c1 * t.powf(self.lambda)
    }
}

/// Least-squares fit of `log(R - R0)` against `log t`, after discarding the
/// first 20% of the samples.
pub fn fit_growth_exponent(series: &SupportSeries, r0: f64) -> Result<GrowthFit> {
    let n = series.times.len();
    let skip = n / 5;
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.radii)
        .skip(skip)
        .filter(|(t, r)| **t > 0.0 && **r > r0)
        .map(|(t, r)| (t.ln(), (r - r0).ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::Analysis(format!("growth fit needs at least 5 samples with R > R0, got {}", pts.len())));
    }
    let (first, last) = (pts[0].1, pts[pts.len() - 1].1);
    if !(last > first) {
        return Err(Error::Analysis("support radius does not grow over the fitted range".into()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Analysis("growth fit needs distinct sample times".into()));
    }
    let lambda = sxy / sxx;
    Ok(GrowthFit { c1: (my - lambda * mx).exp(), lambda, r0, samples: pts.len(), t_min: pts[0].0.exp() })
}

/// Snapshot pair whose support shrank.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceViolation {
    pub from: usize,
    pub to: usize,
    pub t_from: f64,
    pub t_to: f64,
    /// Cells in the earlier support missing from the later one.
    pub lost_cells: Vec<usize>,
}

/// Empty iff `supp w(t_k) ⊆ supp w(t_{k+1})` for every consecutive pair.
pub fn check_persistence(traj: &RunTrajectory, eps_supp: f64) -> Vec<PersistenceViolation> {
    let center = traj.center;
    let supports: Vec<Vec<usize>> = traj.snapshots.iter().map(|s| s.w().support(eps_supp, center).cells).collect();
    let mut out = Vec::new();
    for k in 1..supports.len() {
        let lost: Vec<usize> =
            supports[k - 1].iter().copied().filter(|c| supports[k].binary_search(c).is_err()).collect();
        if !lost.is_empty() {
            out.push(PersistenceViolation {
                from: k - 1,
                to: k,
                t_from: traj.snapshots[k - 1].t,
                t_to: traj.snapshots[k].t,
                lost_cells: lost,
            });
        }
    }
    out
}

pub fn persistence_csv(traj: &RunTrajectory, eps_supp: f64, violations: &[PersistenceViolation]) -> String {
    let mut out = report_header(
        "persistence",
        &[("eps_supp", fmt_f64(eps_supp)), ("snapshots", traj.snapshots.len().to_string())],
    );
    out.push_str("t_from,t_to,lost_cells\n");
    for v in violations {
        let _ = writeln!(out, "{},{},{}", fmt_f64(v.t_from), fmt_f64(v.t_to), v.lost_cells.len());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationSample {
    pub step: usize,
    pub t: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivideRuleReport {
    /// First time the thresholded supports of the two block densities meet;
    /// `None` if they never do.
    pub touch_time: Option<f64>,
    pub touch_step: Option<usize>,
    /// Sup deviation between the full system and the stacked blocks before the touch.
    pub pre_touch_max_dev: f64,
    /// Deviation at every step from the touch on.
    pub post_touch: Vec<DeviationSample>,
    /// Initial distance between the block supports (infinite if one block vanishes).
    pub separation: f64,
    pub m_bound: f64,
    pub tolerance: f64,
    pub eps_supp: f64,
    pub dt: f64,
    pub steps: usize,
}

impl DivideRuleReport {
    pub fn pre_touch_ok(&self) -> bool {
        self.pre_touch_max_dev <= self.tolerance
    }

    /// Largest deviation within `steps` steps after the touch.
    pub fn post_touch_max(&self, steps: usize) -> f64 {
        let Some(t0) = self.touch_step else { return 0.0 };
        self.post_touch.iter().filter(|s| s.step - t0 <= steps).map(|s| s.deviation).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let touch = self.touch_time.map(fmt_f64).unwrap_or_else(|| "inf".into());
        let mut out = report_header(
            "divide_rule",
            &[
                ("eps_supp", fmt_f64(self.eps_supp)),
                ("dt", fmt_f64(self.dt)),
                ("M", fmt_f64(self.m_bound)),
                ("tolerance", fmt_f64(self.tolerance)),
                ("separation", fmt_f64(self.separation)),
            ],
        );
        out.push_str("quantity,step,t,value\n");
        let _ = writeln!(out, "touch_time,{},{touch},{touch}", self.touch_step.map_or("-1".into(), |s| s.to_string()));
        let _ = writeln!(out, "pre_touch_max_dev,,,{}", fmt_f64(self.pre_touch_max_dev));
        let _ = writeln!(out, "pre_touch_ok,,,{}", self.pre_touch_ok());
        for s in &self.post_touch {
            let _ = writeln!(out, "post_touch_dev,{},{},{}", s.step, fmt_f64(s.t), fmt_f64(s.deviation));
        }
        out
    }
}

/// Result of a divide-and-rule run: the report and the three trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct DivideRuleOutcome {
    pub report: DivideRuleReport,
    pub full: RunTrajectory,
    pub hat: RunTrajectory,
    pub check: RunTrajectory,
}

fn exact_support(fields: &[Field]) -> Vec<usize> {
    let grid = *fields[0].grid();
    (0..grid.len()).filter(|&i| fields.iter().any(|u| u.values()[i] > 0.0)).collect()
}

fn min_distance(grid: &Grid, a: &[usize], b: &[usize]) -> f64 {
    let mut d = f64::INFINITY;
    for &i in a {
        for &j in b {
            d = d.min(grid.distance(grid.center(i), grid.center(j)));
        }
    }
    d
}

/// Stacks the two blocks into one system.
pub fn combine_blocks(hat: &SystemProblem, check: &SystemProblem) -> Result<SystemProblem> {
    if hat.grid != check.grid
        || hat.isotherm != check.isotherm
        || hat.t_start != check.t_start
        || hat.horizon != check.horizon
    {
        return Err(Error::Analysis("blocks must share grid, isotherm and time interval".into()));
    }
    if !(hat.boundary.is_vacuum() && check.boundary.is_vacuum()) {
        return Err(Error::Analysis("divide-and-rule runs emulate the Cauchy problem (vacuum boundary)".into()));
    }
    let bound = match (hat.bound, check.bound) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    Ok(SystemProblem {
        grid: hat.grid,
        isotherm: hat.isotherm.clone(),
        initial: hat.initial.iter().chain(&check.initial).cloned().collect(),
        forcing: hat.forcing.iter().chain(&check.forcing).cloned().collect(),
        boundary: BoundaryData::Vacuum,
        t_start: hat.t_start,
        horizon: hat.horizon,
        bound,
    })
}

/// Runs the full system and the two blocks in lockstep with a common step,
/// tracking when the block supports meet and how far the full solution
/// departs from the stacked block solutions.
pub fn divide_rule_experiment(
    hat: &SystemProblem,
    check: &SystemProblem,
    config: &SolverConfig,
) -> Result<DivideRuleOutcome> {
    config.validate()?;
    let full = combine_blocks(hat, check)?;
    full.validate()?;
    if !hat.isotherm.is_degenerate() {
        return Err(Error::Analysis(
            "divide-and-rule needs a degenerate isotherm (Phi'(0) = 0); finite propagation fails otherwise".into(),
        ));
    }
    let grid = full.grid;
    let (sa, sb) = (exact_support(&hat.initial), exact_support(&check.initial));
    let separation = min_distance(&grid, &sa, &sb);
    if sa.iter().any(|c| sb.binary_search(c).is_ok()) {
        return Err(Error::Analysis("initial supports of the two blocks overlap".into()));
    }

    let m_bound = full.comparison_bound();
    let model = config.effective_model(&full.isotherm, m_bound)?;
    let dt = run_dt(&model, m_bound, &grid, config)?;
    let total = step_count(full.horizon, dt);
    let t_start = full.t_start;
    let t_end = t_start + full.horizon;
    let k = hat.n_species();

    let problems = [&full, hat, check];
    let mut steppers: Vec<Box<dyn Stepper + '_>> =
        problems.iter().map(|p| build_stepper(p, &model, config.mode)).collect();
    let mut recorders: Vec<Recorder<'_>> = problems
        .iter()
        .map(|p| Recorder::new(&model, grid, p.n_species(), t_start, dt, total, config))
        .collect();
    let collar = collar_cells(&grid, config.collar_cells);

    let eps = config.eps_supp;
    let mut report = DivideRuleReport {
        touch_time: None,
        touch_step: None,
        pre_touch_max_dev: 0.0,
        post_touch: Vec::new(),
        separation,
        m_bound,
        tolerance: 1e-9 * m_bound,
        eps_supp: eps,
        dt,
        steps: total,
    };
    let mut measure = |step: usize, t: f64, st: [&[Field]; 3]| {
        let mut dev: f64 = 0.0;
        for (i, u) in st[0].iter().enumerate() {
            let b = if i < k { &st[1][i] } else { &st[2][i - k] };
            for (x, y) in u.values().iter().zip(b.values()) {
                dev = dev.max((x - y).abs());
            }
        }
        if report.touch_step.is_none() {
            let touching = (0..grid.len()).any(|c| {
                let wh: f64 = st[1].iter().map(|u| u.values()[c]).sum();
                let wc: f64 = st[2].iter().map(|u| u.values()[c]).sum();
                wh > eps && wc > eps
            });
            if touching {
                report.touch_step = Some(step);
                report.touch_time = Some(t);
            }
        }
        if report.touch_step.is_some() {
            report.post_touch.push(DeviationSample { step, t, deviation: dev });
        } else {
            report.pre_touch_max_dev = report.pre_touch_max_dev.max(dev);
        }
    };

    for n in 0..total {
        let t = step_time(t_start, t_end, dt, n, total);
        let t_next = step_time(t_start, t_end, dt, n + 1, total);
        for s in &steppers {
            check_collar(&collar, s.state(), eps, t)?;
        }
        for (r, s) in recorders.iter_mut().zip(&steppers) {
            r.observe(n, t, s.state(), t_next - t, false);
        }
        measure(n, t, [steppers[0].state(), steppers[1].state(), steppers[2].state()]);
        for (r, s) in recorders.iter_mut().zip(steppers.iter_mut()) {
            s.advance(t, t_next - t)?;
            r.note_drift(s.drift());
        }
    }
    for s in &steppers {
        check_collar(&collar, s.state(), eps, t_end)?;
    }
    for (r, s) in recorders.iter_mut().zip(&steppers) {
        r.observe(total, t_end, s.state(), 0.0, true);
    }
    measure(total, t_end, [steppers[0].state(), steppers[1].state(), steppers[2].state()]);
    drop(steppers);

    let mut trajs = recorders.into_iter().map(|r| r.finish(total, t_end));
    let (full_t, hat_t, check_t) = (trajs.next().unwrap(), trajs.next().unwrap(), trajs.next().unwrap());
    Ok(DivideRuleOutcome { report, full: full_t, hat: hat_t, check: check_t })
}

/// Time-integrated squared gradient norms, reported as `L^2` norms.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyNorms {
    /// `||grad Phi(w)||_{L^2(Q_T)}` over the whole box.
    pub w_norm: f64,
    /// `||grad(rho u_i)||_{L^2(Q'_T)}` on the interior window.
    pub species: Vec<f64>,
    pub margin: usize,
}

/// Gradient norms from a trajectory. The `w` norm uses the per-step
/// accumulation of the run; the species norms integrate the snapshots with
/// the trapezoid rule on the window at least `margin` cells from the boundary.
pub fn energy_norms(traj: &RunTrajectory, model: &IsothermModel, margin: usize) -> Result<EnergyNorms> {
    if margin < 2 {
        return Err(Error::Analysis(format!("interior margin must be at least 2 cells, got {margin}")));
    }
    let grid = traj.grid;
    if grid.window_len(margin) < 2 {
        return Err(Error::Analysis(format!("interior window with margin {margin} is empty")));
    }
    let w_norm = traj.diagnostics.last().map_or(0.0, |d| d.cum_grad_energy).max(0.0).sqrt();
    let mut rates: Vec<Vec<f64>> = Vec::with_capacity(traj.snapshots.len());
    let mut q = vec![0.0; grid.len()];
    for snap in &traj.snapshots {
        let w = snap.w();
        let rho: Vec<f64> = w.values().iter().map(|&v| model.rho_unchecked(v.max(0.0))).collect();
        rates.push(
            snap.species
                .iter()
                .map(|u| {
                    for ((qc, r), v) in q.iter_mut().zip(&rho).zip(u.values()) {
                        *qc = r * v;
                    }
                    grid.gradient_energy_window(&q, margin)
                })
                .collect(),
        );
    }
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    let species = (0..traj.n_species)
        .map(|i| trapezoid(&times, |k| rates[k][i]).max(0.0).sqrt())
        .collect();
    Ok(EnergyNorms { w_norm, species, margin })
}

fn trapezoid(times: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for k in 1..times.len() {
        acc += 0.5 * (times[k] - times[k - 1]) * (f(k - 1) + f(k));
    }
    acc
}

/// Smooth test function for the very weak formulation.
pub trait TestFunction {
    fn value(&self, x: [f64; 2], t: f64) -> f64;
    fn time_derivative(&self, x: [f64; 2], t: f64) -> f64;
    fn laplacian(&self, x: [f64; 2], t: f64) -> f64;
    /// Ball `(center, radius)` containing the spatial support.
    fn spatial_support(&self) -> ([f64; 2], f64);
}

/// `phi(x,t) = A (1 - |x-c|^2/R^2)_+^4 (1 - (t - t0)/(t1 - t0))^2` for
/// `t0 <= t <= t1`, zero after `t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpTestFunction {
    pub center: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
    pub t0: f64,
    pub t1: f64,
    pub dim: usize,
}

impl BumpTestFunction {
    fn q(&self, x: [f64; 2]) -> f64 {
        let mut r2 = 0.0;
        for a in 0..self.dim {
            r2 += (x[a] - self.center[a]).powi(2);
        }
        r2 / (self.radius * self.radius)
    }

    fn time_factor(&self, t: f64) -> (f64, f64) {
        let len = self.t1 - self.t0;
        let s = (t - self.t0) / len;
        if s >= 1.0 {
            (0.0, 0.0)
        } else {
            ((1.0 - s).powi(2), -2.0 * (1.0 - s) / len)
        }
    }
}

impl TestFunction for BumpTestFunction {
    fn value(&self, x: [f64; 2], t: f64) -> f64 {
        let q = self.q(x);
        if q >= 1.0 {
            return 0.0;
        }
        self.amplitude * (1.0 - q).powi(4) * self.time_factor(t).0
    }

    fn time_derivative(&self, x: [f64; 2], t: f64) -> f64 {
        let q = self.q(x);
        if q >= 1.0 {
            return 0.0;
        }
        self.amplitude * (1.0 - q).powi(4) * self.time_factor(t).1
    }

    fn laplacian(&self, x: [f64; 2], t: f64) -> f64 {
        let q = self.q(x);
        if q >= 1.0 {
            return 0.0;
        }
        let r2 = q * self.radius * self.radius;
        let r4 = self.radius.powi(4);
        let g1 = -4.0 * (1.0 - q).powi(3);
        let g2 = 12.0 * (1.0 - q).powi(2);
        let spatial = g2 * 4.0 * r2 / r4 + g1 * 2.0 * self.dim as f64 / (self.radius * self.radius);
        self.amplitude * spatial * self.time_factor(t).0
    }

    fn spatial_support(&self) -> ([f64; 2], f64) {
        (self.center, self.radius)
    }
}

/// Discrete very weak residual per species:
/// `int int (u_i phi_t + rho u_i Laplacian(phi) + f_i phi) + int u_i(t_start) phi(t_start)`,
/// with midpoint quadrature in space and the trapezoid rule over snapshots.
/// The test function must vanish at the final time of the run.
pub fn weak_residual(
    traj: &RunTrajectory,
    model: &IsothermModel,
    forcing: &[Source],
    phi: &dyn TestFunction,
) -> Result<Vec<f64>> {
    let grid = traj.grid;
    if forcing.len() != traj.n_species {
        return Err(Error::Analysis("one forcing term per species is required".into()));
    }
    let (c, r) = phi.spatial_support();
    for axis in 0..grid.dim() {
        let lo = grid.origin()[axis];
        let hi = lo + grid.extent()[axis];
        if c[axis] - r <= lo || c[axis] + r >= hi {
            return Err(Error::Analysis("test function support touches the boundary".into()));
        }
    }
    let vol = grid.cell_volume();
    let centers: Vec<[f64; 2]> = (0..grid.len()).map(|i| grid.center(i)).collect();
    let mut f = vec![0.0; grid.len()];
    let mut integrands: Vec<Vec<f64>> = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let w = snap.w();
        let rho: Vec<f64> = w.values().iter().map(|&v| model.rho_unchecked(v.max(0.0))).collect();
        let t = snap.t;
        let dphi: Vec<(f64, f64, f64)> =
            centers.iter().map(|&x| (phi.value(x, t), phi.time_derivative(x, t), phi.laplacian(x, t))).collect();
        let mut row = Vec::with_capacity(traj.n_species);
        for (i, u) in snap.species.iter().enumerate() {
            sum_sources(std::slice::from_ref(&forcing[i]), t, &mut f);
            let mut acc = 0.0;
            for (idx, &v) in u.values().iter().enumerate() {
                let (p, pt, pl) = dphi[idx];
                acc += v * pt + rho[idx] * v * pl + f[idx] * p;
            }
            row.push(acc * vol);
        }
        integrands.push(row);
    }
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    let first = &traj.snapshots[0];
    Ok((0..traj.n_species)
        .map(|i| {
            let initial: f64 = first.species[i]
                .values()
                .iter()
                .zip(&centers)
                .map(|(v, &x)| v * phi.value(x, first.t))
                .sum::<f64>()
                * vol;
            trapezoid(&times, |k| integrands[k][i]) + initial
        })
        .collect())
}

/// Parabolic interior window for the Hölder probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderWindow {
    /// Minimum distance of sampled points from the boundary.
    pub d_prime: f64,
    /// Only snapshots with `t >= t_start + tau` are sampled.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub window: HolderWindow,
    pub t_end: f64,
    /// Sup of `|u(x,t) - u(y,s)| / (|x-y| + |t-s|^(1/2))^alpha` over the samples.
    pub quotient: f64,
    pub pairs: usize,
}

/// Sampled parabolic Hölder quotient of species `species` (or of `w` when
/// `None`). Each draw contributes a same-time pair and a cross-time pair.
pub fn holder_modulus(
    traj: &RunTrajectory,
    species: Option<usize>,
    alpha: f64,
    window: HolderWindow,
    sample_pairs: usize,
    seed: u64,
) -> Result<HolderEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Analysis(format!("Hölder exponent must be in (0,1], got {alpha}")));
    }
    if !(window.d_prime > 0.0 && window.tau > 0.0) {
        return Err(Error::Analysis("Hölder window needs d' > 0 and tau > 0".into()));
    }
    if let Some(i) = species {
        if i >= traj.n_species {
            return Err(Error::Analysis(format!("species index {i} out of range")));
        }
    }
    let grid = traj.grid;
    let cells: Vec<usize> = (0..grid.len())
        .filter(|&idx| {
            let x = grid.center(idx);
            (0..grid.dim()).all(|a| {
                let lo = grid.origin()[a];
                x[a] - lo >= window.d_prime && lo + grid.extent()[a] - x[a] >= window.d_prime
            })
        })
        .collect();
    let snaps: Vec<usize> =
        (0..traj.snapshots.len()).filter(|&k| traj.snapshots[k].t >= traj.t_start + window.tau).collect();
    if cells.len() < 2 || snaps.is_empty() {
        return Err(Error::Analysis("Hölder window contains no sample points".into()));
    }
    let fields: Vec<Field> = snaps
        .iter()
        .map(|&k| match species {
            Some(i) => traj.snapshots[k].species[i].clone(),
            None => traj.snapshots[k].w(),
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut quotient: f64 = 0.0;
    let mut pairs = 0;
    for _ in 0..sample_pairs {
        let (a, b) = (cells[rng.gen_range(0..cells.len())], cells[rng.gen_range(0..cells.len())]);
        let (ka, kb) = (rng.gen_range(0..fields.len()), rng.gen_range(0..fields.len()));
        let dx = grid.distance(grid.center(a), grid.center(b));
        for (k1, k2) in [(ka, ka), (ka, kb)] {
            let dt = (traj.snapshots[snaps[k1]].t - traj.snapshots[snaps[k2]].t).abs();
            let d = dx + dt.sqrt();
            if d == 0.0 {
                continue;
            }
            let du = (fields[k1].values()[a] - fields[k2].values()[b]).abs();
            quotient = quotient.max(du / d.powf(alpha));
            pairs += 1;
        }
    }
    Ok(HolderEstimate { alpha, window, t_end: traj.t_end, quotient, pairs })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonCheck {
    pub sup_w: f64,
    /// `M (1 + T)`.
    pub bound: f64,
    pub pass: bool,
}

/// Checks `sup w <= M (1 + T) + 1e-8` over every step of the run.
pub fn comparison_monitor(traj: &RunTrajectory, m_bound: f64, horizon: f64) -> ComparisonCheck {
    let snap_max = traj.diagnostics.iter().map(|d| d.sup_w).fold(f64::NEG_INFINITY, f64::max);
    let sup_w = traj.monitors.max_w.max(snap_max);
    let bound = m_bound * (1.0 + horizon);
    ComparisonCheck { sup_w, bound, pass: sup_w <= bound + 1e-8 }
}
