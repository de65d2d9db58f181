//! Solver configuration, run trajectories and the shared explicit time loop.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::grid::{Field, Grid, DEFAULT_EPS_SUPP};
use crate::isotherm::IsothermModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMode {
    /// All species advanced with the pressure of the current `sum u_i`.
    Coupled,
    /// `w` advanced by the scalar scheme; species advanced with the pressure
    /// frozen from that independently carried `w`.
    Decomposed,
}

impl SolverMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverMode::Coupled => "coupled",
            SolverMode::Decomposed => "decomposed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Fraction of the explicit stability limit, in (0, 1].
    pub safety: f64,
    pub eps_supp: f64,
    /// Approximate number of snapshots per run (plus the initial one).
    pub snapshots: usize,
    pub mode: SolverMode,
    /// Cauchy emulation aborts when the support comes this close (in cells)
    /// to the box boundary.
    pub collar_cells: usize,
    /// Centre used for support radii; defaults to the domain midpoint.
    pub center: Option<[f64; 2]>,
    /// Replace the nonlinearity by its Lipschitz regularization.
    pub regularize_eps: Option<f64>,
    /// Evaluate `Phi` through a lookup table in the time loop.
    pub phi_table: bool,
    /// Optional cap on the time step.
    pub max_dt: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            safety: 0.5,
            eps_supp: DEFAULT_EPS_SUPP,
            snapshots: 50,
            mode: SolverMode::Coupled,
            collar_cells: 3,
            center: None,
            regularize_eps: None,
            phi_table: false,
            max_dt: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::Invalid(format!("CFL safety must be in (0,1], got {}", self.safety)));
        }
        if !(self.eps_supp > 0.0) {
            return Err(Error::Invalid(format!("support threshold must be positive, got {}", self.eps_supp)));
        }
        if self.snapshots == 0 {
            return Err(Error::Invalid("snapshot count must be positive".into()));
        }
        if let Some(dt) = self.max_dt {
            if !(dt > 0.0) {
                return Err(Error::Invalid(format!("max_dt must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    /// Model actually used in the time loop.
    pub(crate) fn effective_model(&self, model: &IsothermModel, s_max: f64) -> Result<IsothermModel> {
        let mut m = match self.regularize_eps {
            Some(eps) => model.regularize(eps)?,
            None => model.clone(),
        };
        if self.phi_table && s_max > 0.0 {
            m = m.with_phi_table(s_max, 4096)?;
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub species: Vec<Field>,
}

impl Snapshot {
    /// `w = sum_i u_i`.
    pub fn w(&self) -> Field {
        Field::sum(*self.species[0].grid(), &self.species)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesDiagnostics {
    pub mass: f64,
    pub sup: f64,
    /// `sum_steps dt * ||grad(rho u_i)||^2` up to this time.
    pub cum_grad_energy_rho_u: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub mass: f64,
    pub sup_w: f64,
    pub inf_w: f64,
    pub energy_psi: f64,
    /// `sum_steps dt * ||grad Phi(w)||^2` up to this time.
    pub cum_grad_energy: f64,
    pub support_radius: f64,
    pub species: Vec<SpeciesDiagnostics>,
}

/// Per-step extrema collected during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitors {
    pub min_density: f64,
    pub max_w: f64,
    /// Largest `||sum u_i - w||_inf` between the species and the separately
    /// advanced `w` (decomposed mode only).
    pub max_track_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrajectory {
    pub grid: Grid,
    pub n_species: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    pub eps_supp: f64,
    pub center: [f64; 2],
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticsRow>,
    pub monitors: Monitors,
}

impl RunTrajectory {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory always holds the initial snapshot")
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("t,mass,sup_w,inf_w,energy_Psi,cum_grad_energy,support_radius");
        for i in 1..=self.n_species {
            let _ = write!(out, ",mass_{i},sup_{i},grad_energy_rho_u{i}");
        }
        out.push('\n');
        for row in &self.diagnostics {
            let fields = [row.t, row.mass, row.sup_w, row.inf_w, row.energy_psi, row.cum_grad_energy, row.support_radius];
            let mut line: Vec<String> = fields.iter().map(|v| fmt_f64(*v)).collect();
            for s in &row.species {
                line.push(fmt_f64(s.mass));
                line.push(fmt_f64(s.sup));
                line.push(fmt_f64(s.cum_grad_energy_rho_u));
            }
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Snapshot file: a `# t=.. dim=.. cells=.. h=.. species=..` header, then
    /// `i[,j],x[,y],u1,...,uN,w,rho` per cell.
    pub fn snapshot_csv(&self, index: usize, model: &IsothermModel) -> String {
        let snap = &self.snapshots[index];
        let g = &self.grid;
        let join_usize = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let join_f64 = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",");
        let mut out = format!(
            "# t={} dim={} cells={} h={} species={}\n",
            fmt_f64(snap.t),
            g.dim(),
            join_usize(g.cells()),
            join_f64(g.h()),
            self.n_species
        );
        let w = snap.w();
        for idx in 0..g.len() {
            let (i, j) = g.coords(idx);
            let x = g.center(idx);
            let mut cols = vec![i.to_string()];
            if g.dim() == 2 {
                cols.push(j.to_string());
            }
            cols.push(fmt_f64(x[0]));
            if g.dim() == 2 {
                cols.push(fmt_f64(x[1]));
            }
            for u in &snap.species {
                cols.push(fmt_f64(u.values()[idx]));
            }
            let wv = w.values()[idx];
            cols.push(fmt_f64(wv));
            cols.push(fmt_f64(model.rho_unchecked(wv.max(0.0))));
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }
}

/// Collects snapshots, diagnostics and monitors while a run advances.
pub(crate) struct Recorder<'a> {
    model: &'a IsothermModel,
    grid: Grid,
    n_species: usize,
    t_start: f64,
    dt: f64,
    eps_supp: f64,
    center: [f64; 2],
    cadence: usize,
    cum_w: f64,
    cum_species: Vec<f64>,
    snapshots: Vec<Snapshot>,
    diagnostics: Vec<DiagnosticsRow>,
    monitors: Monitors,
    last_step: Option<usize>,
    // scratch
    w: Vec<f64>,
    q: Vec<f64>,
    rho: Vec<f64>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(
        model: &'a IsothermModel,
        grid: Grid,
        n_species: usize,
        t_start: f64,
        dt: f64,
        total_steps: usize,
        config: &SolverConfig,
    ) -> Self {
        let cadence = total_steps.div_ceil(config.snapshots).max(1);
        Self {
            model,
            grid,
            n_species,
            t_start,
            dt,
            eps_supp: config.eps_supp,
            center: config.center.unwrap_or_else(|| grid.midpoint()),
            cadence,
            cum_w: 0.0,
            cum_species: vec![0.0; n_species],
            snapshots: Vec::new(),
            diagnostics: Vec::new(),
            monitors: Monitors { min_density: f64::INFINITY, max_w: f64::NEG_INFINITY, max_track_drift: 0.0 },
            last_step: None,
            w: vec![0.0; grid.len()],
            q: vec![0.0; grid.len()],
            rho: vec![0.0; grid.len()],
        }
    }

    fn fill_w(&mut self, state: &[Field]) {
        let w = &mut self.w;
        w.copy_from_slice(state[0].values());
        for u in &state[1..] {
            for (a, b) in w.iter_mut().zip(u.values()) {
                *a += b;
            }
        }
    }

    /// Records the state at `step`; `dt_next` is the step about to be taken
    /// (0 for the final state).
    pub(crate) fn observe(&mut self, step: usize, t: f64, state: &[Field], dt_next: f64, is_final: bool) {
        self.fill_w(state);
        for u in state {
            self.monitors.min_density = self.monitors.min_density.min(u.min());
        }
        let max_w = self.w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.monitors.max_w = self.monitors.max_w.max(max_w);
        for (r, &w) in self.rho.iter_mut().zip(&self.w) {
            *r = self.model.rho_unchecked(w.max(0.0));
        }

        if (step % self.cadence == 0 || is_final) && self.last_step != Some(step) {
            self.push_snapshot(step, t, state);
        }

        if dt_next > 0.0 {
            for (q, (r, w)) in self.q.iter_mut().zip(self.rho.iter().zip(&self.w)) {
                *q = r * w;
            }
            self.cum_w += dt_next * self.grid.gradient_energy_window(&self.q, 0);
            for (i, u) in state.iter().enumerate() {
                for (q, (r, v)) in self.q.iter_mut().zip(self.rho.iter().zip(u.values())) {
                    *q = r * v;
                }
                self.cum_species[i] += dt_next * self.grid.gradient_energy_window(&self.q, 0);
            }
        }
    }

    fn push_snapshot(&mut self, step: usize, t: f64, state: &[Field]) {
        let vol = self.grid.cell_volume();
        let mut support_radius: f64 = 0.0;
        let mut energy = 0.0;
        for (idx, &w) in self.w.iter().enumerate() {
            energy += self.model.psi_unchecked(w);
            if w > self.eps_supp {
                support_radius = support_radius.max(self.grid.distance(self.grid.center(idx), self.center));
            }
        }
        let species = state
            .iter()
            .zip(&self.cum_species)
            .map(|(u, &cum)| SpeciesDiagnostics { mass: u.integrate(), sup: u.max(), cum_grad_energy_rho_u: cum })
            .collect();
        self.diagnostics.push(DiagnosticsRow {
            t,
            mass: self.w.iter().sum::<f64>() * vol,
            sup_w: self.w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            inf_w: self.w.iter().copied().fold(f64::INFINITY, f64::min),
            energy_psi: energy * vol,
            cum_grad_energy: self.cum_w,
            support_radius,
            species,
        });
        self.snapshots.push(Snapshot { step, t, species: state.to_vec() });
        self.last_step = Some(step);
    }

    pub(crate) fn note_drift(&mut self, drift: f64) {
        self.monitors.max_track_drift = self.monitors.max_track_drift.max(drift);
    }

    pub(crate) fn finish(self, steps: usize, t_end: f64) -> RunTrajectory {
        RunTrajectory {
            grid: self.grid,
            n_species: self.n_species,
            t_start: self.t_start,
            t_end,
            dt: self.dt,
            steps,
            eps_supp: self.eps_supp,
            center: self.center,
            snapshots: self.snapshots,
            diagnostics: self.diagnostics,
            monitors: self.monitors,
        }
    }
}

/// A time integrator over a list of nonnegative fields.
pub(crate) trait Stepper {
    fn state(&self) -> &[Field];
    fn advance(&mut self, t: f64, dt: f64) -> Result<()>;
    /// Distance between `sum u_i` and any separately carried `w`.
    fn drift(&self) -> f64 {
        0.0
    }
}

/// Number of steps of size `dt` needed to cover `horizon`; the last step is
/// shortened to land exactly on the final time.
pub(crate) fn step_count(horizon: f64, dt: f64) -> usize {
    ((horizon / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

pub(crate) fn step_time(t_start: f64, t_end: f64, dt: f64, n: usize, total: usize) -> f64 {
    if n >= total {
        t_end
    } else {
        t_start + n as f64 * dt
    }
}

/// Cells within `collar` cells of the boundary.
pub(crate) fn collar_cells(grid: &Grid, collar: usize) -> Vec<usize> {
    (0..grid.len()).filter(|&idx| grid.cells_to_boundary(idx) < collar).collect()
}

pub(crate) fn check_collar(collar: &[usize], state: &[Field], eps: f64, t: f64) -> Result<()> {
    for &idx in collar {
        let w: f64 = state.iter().map(|u| u.values()[idx]).sum();
        if w > eps {
            return Err(Error::BoundaryContact { t, cell: idx, value: w });
        }
    }
    Ok(())
}

pub(crate) struct LoopSpec<'a> {
    pub model: &'a IsothermModel,
    pub grid: Grid,
    pub t_start: f64,
    pub horizon: f64,
    pub dt: f64,
    pub cauchy: bool,
}

impl<S: Stepper + ?Sized> Stepper for Box<S> {
    fn state(&self) -> &[Field] {
        (**self).state()
    }

    fn advance(&mut self, t: f64, dt: f64) -> Result<()> {
        (**self).advance(t, dt)
    }

    fn drift(&self) -> f64 {
        (**self).drift()
    }
}

/// Runs `stepper` from `t_start` to `t_start + horizon`.
pub(crate) fn integrate<S: Stepper>(stepper: &mut S, spec: LoopSpec<'_>, config: &SolverConfig) -> Result<RunTrajectory> {
    let total = step_count(spec.horizon, spec.dt);
    let t_end = spec.t_start + spec.horizon;
    let n_species = stepper.state().len();
    let mut recorder = Recorder::new(spec.model, spec.grid, n_species, spec.t_start, spec.dt, total, config);
    let collar = if spec.cauchy { collar_cells(&spec.grid, config.collar_cells) } else { Vec::new() };

    for n in 0..total {
        let t = step_time(spec.t_start, t_end, spec.dt, n, total);
        let t_next = step_time(spec.t_start, t_end, spec.dt, n + 1, total);
        check_collar(&collar, stepper.state(), config.eps_supp, t)?;
        recorder.observe(n, t, stepper.state(), t_next - t, false);
        stepper.advance(t, t_next - t)?;
        recorder.note_drift(stepper.drift());
    }
    check_collar(&collar, stepper.state(), config.eps_supp, t_end)?;
    recorder.observe(total, t_end, stepper.state(), 0.0, true);
    Ok(recorder.finish(total, t_end))
}
