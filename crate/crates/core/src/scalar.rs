//! Explicit finite-volume integrator for the scalar equation
//! `w_t = Laplacian(Phi(w)) + F`, with Dirichlet data imposed on `Phi(w)`.

use crate::data::{sum_sources, BoundaryData, Source};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::isotherm::IsothermModel;
use crate::trajectory::{integrate, LoopSpec, RunTrajectory, SolverConfig, Stepper};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarProblem {
    pub grid: Grid,
    pub isotherm: IsothermModel,
    pub w0: Field,
    /// Forcing terms, summed in order.
    pub forcing: Vec<Source>,
    /// Boundary data; `Phi(w)` is set to the sum of the profiles.
    pub boundary: BoundaryData,
    pub t_start: f64,
    pub horizon: f64,
    /// Declared data bound `M`, checked against the data when present.
    pub bound: Option<f64>,
}

impl ScalarProblem {
    pub fn validate(&self) -> Result<()> {
        if self.w0.grid() != &self.grid || self.forcing.iter().any(|f| f.profile.grid() != &self.grid) {
            return Err(Error::Invalid("all fields must live on the problem grid".into()));
        }
        if self.w0.min() < 0.0 || !self.w0.is_finite() {
            return Err(Error::Invalid("initial density must be finite and nonnegative".into()));
        }
        for f in &self.forcing {
            f.validate()?;
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite() && self.t_start.is_finite()) {
            return Err(Error::Invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        let t_end = self.t_start + self.horizon;
        if let BoundaryData::Dirichlet(p) = &self.boundary {
            self.boundary.validate(p.len(), self.t_start, t_end)?;
        }
        if let Some(m) = self.bound {
            let data_max = self
                .w0
                .max()
                .max(self.forcing.iter().map(Source::sup).fold(0.0, f64::max))
                .max(self.boundary.max_total(self.t_start, t_end));
            if data_max > m {
                return Err(Error::Invalid(format!("data exceed the declared bound M={m} (max {data_max})")));
            }
        }
        Ok(())
    }

    /// `max(sup w0, sup beta(g^D)) + T sup F`, the comparison bound on `w`.
    pub fn comparison_bound(&self) -> f64 {
        let t_end = self.t_start + self.horizon;
        let boundary = self.isotherm.beta_unchecked(self.boundary.max_total(self.t_start, t_end));
        let forcing: f64 = self.forcing.iter().map(Source::sup).sum();
        self.w0.max().max(boundary).max(0.0) + self.horizon * forcing
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflStep {
    pub dt: f64,
    /// `sup Phi'` on `[0, M]`.
    pub lipschitz: f64,
    /// Set when `Phi'` vanishes on the whole range and the fallback step was used.
    pub degenerate: bool,
}

/// Explicit step `safety / (2 L sum_axis 1/h^2)` with `L = sup_{[0,M]} Phi'`.
pub fn cfl_dt(model: &IsothermModel, m_bound: f64, grid: &Grid, safety: f64) -> Result<CflStep> {
    if !(m_bound > 0.0 && m_bound.is_finite()) {
        return Err(Error::Domain(format!("CFL bound M must be positive, got {m_bound}")));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::Domain(format!("CFL safety must be in (0,1], got {safety}")));
    }
    const SAMPLES: usize = 64;
    let mut lipschitz = model.phi_prime(m_bound)?;
    for k in 0..=SAMPLES {
        lipschitz = lipschitz.max(model.phi_prime(m_bound * k as f64 / SAMPLES as f64)?);
    }
    let inv_h2: f64 = grid.h().iter().map(|h| 1.0 / (h * h)).sum();
    if lipschitz == 0.0 {
        let h_min = grid.h().iter().copied().fold(f64::INFINITY, f64::min);
        return Ok(CflStep { dt: safety * h_min * h_min, lipschitz, degenerate: true });
    }
    Ok(CflStep { dt: safety / (2.0 * lipschitz * inv_h2), lipschitz, degenerate: false })
}

/// Largest step keeping the update monotone for the current state, using
/// that `Phi'` is nondecreasing. Boundary-adjacent cells carry the extra
/// ghost reflection weight.
pub(crate) fn positivity_limit(grid: &Grid, w: &[f64], model: &IsothermModel) -> Result<f64> {
    let mut max_inner: f64 = 0.0;
    let mut max_edge: f64 = 0.0;
    for (idx, &v) in w.iter().enumerate() {
        if grid.cells_to_boundary(idx) == 0 {
            max_edge = max_edge.max(v);
        } else {
            max_inner = max_inner.max(v);
        }
    }
    let rate = (model.phi_prime(max_inner.max(0.0))? * grid.diagonal_weight(false))
        .max(model.phi_prime(max_edge.max(0.0))? * grid.diagonal_weight(true));
    Ok(if rate > 0.0 { 1.0 / rate } else { f64::INFINITY })
}

pub(crate) fn check_dt(grid: &Grid, w: &[f64], model: &IsothermModel, dt: f64) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let limit = positivity_limit(grid, w, model)?;
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    Ok(dt / limit)
}

/// Advances `w` in place by one step. `q` and `lap` are scratch buffers.
pub(crate) fn advance_w(
    grid: &Grid,
    model: &IsothermModel,
    w: &mut [f64],
    forcing: &[f64],
    g: f64,
    dt: f64,
    q: &mut [f64],
    lap: &mut [f64],
) {
    for (qi, &wi) in q.iter_mut().zip(w.iter()) {
        *qi = model.rho_unchecked(wi) * wi;
    }
    grid.laplacian_uniform(q, g, lap);
    for ((wi, li), fi) in w.iter_mut().zip(lap.iter()).zip(forcing) {
        *wi = *wi + dt * li + dt * fi;
    }
}

/// One forward Euler step `w + dt Laplacian(Phi(w)) + dt F` with `Phi(w) = g`
/// on the boundary faces. Refuses steps that break positivity.
pub fn step_w(w: &Field, forcing: &Field, g: f64, model: &IsothermModel, dt: f64) -> Result<Field> {
    Ok(step_w_report(w, forcing, g, model, dt)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub min: f64,
    pub max: f64,
    /// `dt` relative to the positivity limit of the pre-step state.
    pub cfl_ratio: f64,
    pub mass_before: f64,
    pub mass_after: f64,
}

pub fn step_w_report(
    w: &Field,
    forcing: &Field,
    g: f64,
    model: &IsothermModel,
    dt: f64,
) -> Result<(Field, StepReport)> {
    let grid = *w.grid();
    if forcing.grid() != &grid {
        return Err(Error::Invalid("forcing lives on a different grid".into()));
    }
    if w.min() < 0.0 || forcing.min() < 0.0 || !(g >= 0.0) {
        return Err(Error::Domain("density, forcing and boundary value must be nonnegative".into()));
    }
    let cfl_ratio = check_dt(&grid, w.values(), model, dt)?;
    let mut next = w.clone();
    let mut q = vec![0.0; grid.len()];
    let mut lap = vec![0.0; grid.len()];
    advance_w(&grid, model, next.values_mut(), forcing.values(), g, dt, &mut q, &mut lap);
    let report = StepReport {
        dt,
        min: next.min(),
        max: next.max(),
        cfl_ratio,
        mass_before: w.integrate(),
        mass_after: next.integrate(),
    };
    Ok((next, report))
}

struct ScalarStepper<'a> {
    problem: &'a ScalarProblem,
    model: &'a IsothermModel,
    state: [Field; 1],
    forcing: Vec<f64>,
    q: Vec<f64>,
    lap: Vec<f64>,
}

impl Stepper for ScalarStepper<'_> {
    fn state(&self) -> &[Field] {
        &self.state
    }

    fn advance(&mut self, t: f64, dt: f64) -> Result<()> {
        let grid = self.problem.grid;
        check_dt(&grid, self.state[0].values(), self.model, dt)?;
        sum_sources(&self.problem.forcing, t, &mut self.forcing);
        let g = self.problem.boundary.total(t);
        advance_w(&grid, self.model, self.state[0].values_mut(), &self.forcing, g, dt, &mut self.q, &mut self.lap);
        Ok(())
    }
}

/// Time step used for a problem with comparison bound `m_bound`.
pub(crate) fn run_dt(model: &IsothermModel, m_bound: f64, grid: &Grid, config: &SolverConfig) -> Result<f64> {
    let mut dt = f64::INFINITY;
    if m_bound > 0.0 {
        let cfl = cfl_dt(model, m_bound, grid, config.safety)?;
        dt = cfl.dt;
        if !cfl.degenerate {
            // boundary cells carry weight 3/h^2, so safety above 2/3 needs a cap
            dt = dt.min(1.0 / (cfl.lipschitz * grid.diagonal_weight(true)));
        }
    }
    if let Some(cap) = config.max_dt {
        dt = dt.min(cap);
    }
    if !dt.is_finite() {
        // Zero data: any step is stable.
        let h_min = grid.h().iter().copied().fold(f64::INFINITY, f64::min);
        dt = config.safety * h_min * h_min;
    }
    Ok(dt)
}

/// Solves the scalar problem; the trajectory holds a single field `w`.
pub fn solve_scalar(problem: &ScalarProblem, config: &SolverConfig) -> Result<RunTrajectory> {
    problem.validate()?;
    config.validate()?;
    let m_bound = problem.comparison_bound();
    let model = config.effective_model(&problem.isotherm, m_bound)?;
    let dt = run_dt(&model, m_bound, &problem.grid, config)?;
    let n = problem.grid.len();
    let mut stepper = ScalarStepper {
        problem,
        model: &model,
        state: [problem.w0.clone()],
        forcing: vec![0.0; n],
        q: vec![0.0; n],
        lap: vec![0.0; n],
    };
    let spec = LoopSpec {
        model: &model,
        grid: problem.grid,
        t_start: problem.t_start,
        horizon: problem.horizon,
        dt,
        cauchy: problem.boundary.is_vacuum(),
    };
    integrate(&mut stepper, spec, config)
}
