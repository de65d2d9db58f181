//! Explicit integrator for the N-species system `d_t u_i = Laplacian(rho(w) u_i) + f_i`
//! with `w = sum_i u_i`, in coupled and decomposed form.

use crate::data::{sum_sources, BoundaryData, Source};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::isotherm::IsothermModel;
use crate::scalar::{advance_w, check_dt, run_dt, ScalarProblem};
use crate::trajectory::{integrate, LoopSpec, RunTrajectory, SolverConfig, SolverMode, Stepper};

/// Species densities at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesState {
    pub u: Vec<Field>,
    pub t: f64,
}

impl SpeciesState {
    pub fn new(u: Vec<Field>, t: f64) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::Invalid("state needs at least one species".into()));
        }
        let grid = *u[0].grid();
        if u.iter().any(|f| f.grid() != &grid) {
            return Err(Error::Invalid("species live on different grids".into()));
        }
        Ok(Self { u, t })
    }

    pub fn n_species(&self) -> usize {
        self.u.len()
    }

    pub fn grid(&self) -> Grid {
        *self.u[0].grid()
    }

    /// `w = sum_i u_i`, summed in species order.
    pub fn w(&self) -> Field {
        Field::sum(self.grid(), &self.u)
    }

    pub fn rho(&self, model: &IsothermModel) -> Field {
        self.w().map(|w| model.rho_unchecked(w.max(0.0)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemProblem {
    pub grid: Grid,
    pub isotherm: IsothermModel,
    pub initial: Vec<Field>,
    /// One source per species.
    pub forcing: Vec<Source>,
    pub boundary: BoundaryData,
    pub t_start: f64,
    pub horizon: f64,
    pub bound: Option<f64>,
}

impl SystemProblem {
    pub fn n_species(&self) -> usize {
        self.initial.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_species();
        if n == 0 {
            return Err(Error::Invalid("problem needs at least one species".into()));
        }
        if self.forcing.len() != n {
            return Err(Error::Invalid(format!("{} forcing terms for {n} species", self.forcing.len())));
        }
        if self.initial.iter().any(|u| u.grid() != &self.grid) {
            return Err(Error::Invalid("initial data must live on the problem grid".into()));
        }
        for (i, u) in self.initial.iter().enumerate() {
            if !u.is_finite() || u.min() < 0.0 {
                return Err(Error::Invalid(format!("initial density of species {} must be finite and nonnegative", i + 1)));
            }
        }
        if let BoundaryData::Dirichlet(p) = &self.boundary {
            if p.len() != n {
                return Err(Error::Invalid(format!("boundary data has {} profiles for {n} species", p.len())));
            }
        }
        if let Some(m) = self.bound {
            for (i, (u, f)) in self.initial.iter().zip(&self.forcing).enumerate() {
                if u.max() > m || f.sup() > m {
                    return Err(Error::Invalid(format!("data of species {} exceed the declared bound M={m}", i + 1)));
                }
            }
        }
        self.scalar_reduction().validate()
    }

    /// Problem for `w = sum_i u_i`: `w0 = sum u0_i`, `F = sum f_i`, `g^D = |z^D|_1`.
    pub fn scalar_reduction(&self) -> ScalarProblem {
        ScalarProblem {
            grid: self.grid,
            isotherm: self.isotherm.clone(),
            w0: Field::sum(self.grid, &self.initial),
            forcing: self.forcing.clone(),
            boundary: self.boundary.clone(),
            t_start: self.t_start,
            horizon: self.horizon,
            bound: None,
        }
    }

    /// Comparison bound on `w`, shared with the scalar reduction.
    pub fn comparison_bound(&self) -> f64 {
        self.scalar_reduction().comparison_bound()
    }

    /// Relabels species: species `k` of the result is species `perm[k]` here.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_species();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Invalid(format!("{perm:?} is not a permutation of {n} species")));
        }
        let boundary = match &self.boundary {
            BoundaryData::Vacuum => BoundaryData::Vacuum,
            BoundaryData::Dirichlet(p) => BoundaryData::Dirichlet(perm.iter().map(|&k| p[k]).collect()),
        };
        Ok(Self {
            initial: perm.iter().map(|&k| self.initial[k].clone()).collect(),
            forcing: perm.iter().map(|&k| self.forcing[k].clone()).collect(),
            boundary,
            ..self.clone()
        })
    }

    pub fn initial_state(&self) -> SpeciesState {
        SpeciesState { u: self.initial.clone(), t: self.t_start }
    }
}

/// Boundary data expressed for the scalar and density formulations.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTranslation {
    /// Boundary value of `Phi(w)`: `|z^D|_1`.
    pub g: f64,
    /// `w_b = beta(g)`.
    pub w_b: f64,
    /// `u_{i,b} = z^D_i / rho(w_b)` (0 when `g = 0`).
    pub u_b: Vec<f64>,
}

pub fn boundary_translate(model: &IsothermModel, z_d: &[f64]) -> Result<BoundaryTranslation> {
    for &z in z_d {
        if !(z >= 0.0) {
            return Err(Error::Domain(format!("boundary concentration must be nonnegative, got {z}")));
        }
    }
    let g: f64 = z_d.iter().sum();
    let w_b = model.beta(g)?;
    let u_b = if g > 0.0 {
        let rho = model.rho(w_b)?;
        z_d.iter().map(|z| z / rho).collect()
    } else {
        vec![0.0; z_d.len()]
    };
    Ok(BoundaryTranslation { g, w_b, u_b })
}

/// Advances every species with the shared coefficient `rho` and boundary
/// values `z_d` imposed on `rho u_i`.
fn advance_species(
    grid: &Grid,
    u: &mut [Field],
    rho: &[f64],
    forcing: &[&[f64]],
    z_d: &[f64],
    dt: f64,
    q: &mut [f64],
    lap: &mut [f64],
) {
    for ((ui, fi), &zi) in u.iter_mut().zip(forcing).zip(z_d) {
        for ((qc, r), v) in q.iter_mut().zip(rho).zip(ui.values()) {
            *qc = r * v;
        }
        grid.laplacian_uniform(q, zi, lap);
        for ((v, l), f) in ui.values_mut().iter_mut().zip(lap.iter()).zip(fi.iter()) {
            *v = *v + dt * l + dt * f;
        }
    }
}

fn check_inputs(state: &SpeciesState, forcing: &[Field], z_d: &[f64]) -> Result<()> {
    let n = state.n_species();
    if forcing.len() != n || z_d.len() != n {
        return Err(Error::Invalid(format!("expected {n} forcing fields and boundary values")));
    }
    if forcing.iter().any(|f| f.grid() != &state.grid()) {
        return Err(Error::Invalid("forcing lives on a different grid".into()));
    }
    if state.u.iter().chain(forcing).any(|f| f.min() < 0.0) || z_d.iter().any(|z| !(*z >= 0.0)) {
        return Err(Error::Domain("densities, forcing and boundary data must be nonnegative".into()));
    }
    Ok(())
}

/// One explicit step with `rho = rho(sum_j u_j)` from the pre-step state.
pub fn step_coupled(
    state: &SpeciesState,
    forcing: &[Field],
    z_d: &[f64],
    model: &IsothermModel,
    dt: f64,
) -> Result<SpeciesState> {
    check_inputs(state, forcing, z_d)?;
    let grid = state.grid();
    let w = state.w();
    check_dt(&grid, w.values(), model, dt)?;
    let rho: Vec<f64> = w.values().iter().map(|&v| model.rho_unchecked(v)).collect();
    let f: Vec<&[f64]> = forcing.iter().map(Field::values).collect();
    let mut u = state.u.clone();
    let (mut q, mut lap) = (vec![0.0; grid.len()], vec![0.0; grid.len()]);
    advance_species(&grid, &mut u, &rho, &f, z_d, dt, &mut q, &mut lap);
    Ok(SpeciesState { u, t: state.t + dt })
}

/// One step of the decomposed scheme: `w` is advanced by the scalar update,
/// then each species with `rho` frozen from the pre-step `w`. Returns the new
/// state and the new `w`.
pub fn step_decomposed(
    state: &SpeciesState,
    w: &Field,
    forcing: &[Field],
    z_d: &[f64],
    model: &IsothermModel,
    dt: f64,
) -> Result<(SpeciesState, Field)> {
    check_inputs(state, forcing, z_d)?;
    let grid = state.grid();
    if w.grid() != &grid || w.min() < 0.0 {
        return Err(Error::Invalid("carried w must be nonnegative on the state grid".into()));
    }
    check_dt(&grid, w.values(), model, dt)?;
    let rho: Vec<f64> = w.values().iter().map(|&v| model.rho_unchecked(v)).collect();
    let f_total = Field::sum(grid, forcing);
    let g: f64 = total_in_order(z_d);
    let (mut q, mut lap) = (vec![0.0; grid.len()], vec![0.0; grid.len()]);
    let mut w_next = w.clone();
    advance_w(&grid, model, w_next.values_mut(), f_total.values(), g, dt, &mut q, &mut lap);
    let f: Vec<&[f64]> = forcing.iter().map(Field::values).collect();
    let mut u = state.u.clone();
    advance_species(&grid, &mut u, &rho, &f, z_d, dt, &mut q, &mut lap);
    Ok((SpeciesState { u, t: state.t + dt }, w_next))
}

fn total_in_order(z: &[f64]) -> f64 {
    z.iter().skip(1).fold(z.first().copied().unwrap_or(0.0), |a, b| a + b)
}

/// Concentrations `z = rho(w) u`; vacuum cells map to 0.
pub fn concentration_view(state: &SpeciesState, model: &IsothermModel) -> Vec<Field> {
    let rho = state.rho(model);
    state
        .u
        .iter()
        .map(|u| {
            let vals = u.values().iter().zip(rho.values()).map(|(v, r)| v * r).collect();
            Field::from_values(state.grid(), vals).expect("finite product of finite fields")
        })
        .collect()
}

struct Buffers {
    w: Vec<f64>,
    rho: Vec<f64>,
    forcing: Vec<Vec<f64>>,
    forcing_total: Vec<f64>,
    z_d: Vec<f64>,
    q: Vec<f64>,
    lap: Vec<f64>,
}

impl Buffers {
    fn new(n_cells: usize, n_species: usize) -> Self {
        Self {
            w: vec![0.0; n_cells],
            rho: vec![0.0; n_cells],
            forcing: vec![vec![0.0; n_cells]; n_species],
            forcing_total: vec![0.0; n_cells],
            z_d: vec![0.0; n_species],
            q: vec![0.0; n_cells],
            lap: vec![0.0; n_cells],
        }
    }

    fn load(&mut self, problem: &SystemProblem, t: f64) {
        for (buf, src) in self.forcing.iter_mut().zip(&problem.forcing) {
            sum_sources(std::slice::from_ref(src), t, buf);
        }
        self.z_d = problem.boundary.species_values(t, problem.n_species());
    }
}

fn sum_into(out: &mut [f64], fields: &[Field]) {
    out.copy_from_slice(fields[0].values());
    for u in &fields[1..] {
        for (a, b) in out.iter_mut().zip(u.values()) {
            *a += b;
        }
    }
}

struct CoupledStepper<'a> {
    problem: &'a SystemProblem,
    model: &'a IsothermModel,
    u: Vec<Field>,
    buf: Buffers,
}

impl Stepper for CoupledStepper<'_> {
    fn state(&self) -> &[Field] {
        &self.u
    }

    fn advance(&mut self, t: f64, dt: f64) -> Result<()> {
        let grid = self.problem.grid;
        let b = &mut self.buf;
        sum_into(&mut b.w, &self.u);
        check_dt(&grid, &b.w, self.model, dt)?;
        for (r, &w) in b.rho.iter_mut().zip(&b.w) {
            *r = self.model.rho_unchecked(w);
        }
        b.load(self.problem, t);
        let f: Vec<&[f64]> = b.forcing.iter().map(Vec::as_slice).collect();
        advance_species(&grid, &mut self.u, &b.rho, &f, &b.z_d, dt, &mut b.q, &mut b.lap);
        Ok(())
    }
}

struct DecomposedStepper<'a> {
    problem: &'a SystemProblem,
    model: &'a IsothermModel,
    u: Vec<Field>,
    w: Vec<f64>,
    buf: Buffers,
}

impl Stepper for DecomposedStepper<'_> {
    fn state(&self) -> &[Field] {
        &self.u
    }

    fn advance(&mut self, t: f64, dt: f64) -> Result<()> {
        let grid = self.problem.grid;
        let b = &mut self.buf;
        check_dt(&grid, &self.w, self.model, dt)?;
        for (r, &w) in b.rho.iter_mut().zip(&self.w) {
            *r = self.model.rho_unchecked(w);
        }
        b.load(self.problem, t);
        sum_sources(&self.problem.forcing, t, &mut b.forcing_total);
        let g = self.problem.boundary.total(t);
        advance_w(&grid, self.model, &mut self.w, &b.forcing_total, g, dt, &mut b.q, &mut b.lap);
        let f: Vec<&[f64]> = b.forcing.iter().map(Vec::as_slice).collect();
        advance_species(&grid, &mut self.u, &b.rho, &f, &b.z_d, dt, &mut b.q, &mut b.lap);
        Ok(())
    }

    fn drift(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (idx, &w) in self.w.iter().enumerate() {
            let mut s = self.u[0].values()[idx];
            for u in &self.u[1..] {
                s += u.values()[idx];
            }
            worst = worst.max((s - w).abs());
        }
        worst
    }
}

pub(crate) fn build_stepper<'a>(
    problem: &'a SystemProblem,
    model: &'a IsothermModel,
    mode: SolverMode,
) -> Box<dyn Stepper + 'a> {
    let buf = Buffers::new(problem.grid.len(), problem.n_species());
    match mode {
        SolverMode::Coupled => Box::new(CoupledStepper { problem, model, u: problem.initial.clone(), buf }),
        SolverMode::Decomposed => {
            let w = Field::sum(problem.grid, &problem.initial).into_values();
            Box::new(DecomposedStepper { problem, model, u: problem.initial.clone(), w, buf })
        }
    }
}

/// Solves the system in the mode selected by `config`.
pub fn solve_system(problem: &SystemProblem, config: &SolverConfig) -> Result<RunTrajectory> {
    problem.validate()?;
    config.validate()?;
    let m_bound = problem.comparison_bound();
    let model = config.effective_model(&problem.isotherm, m_bound)?;
    let dt = run_dt(&model, m_bound, &problem.grid, config)?;
    let spec = LoopSpec {
        model: &model,
        grid: problem.grid,
        t_start: problem.t_start,
        horizon: problem.horizon,
        dt,
        cauchy: problem.boundary.is_vacuum(),
    };
    let mut stepper = build_stepper(problem, &model, config.mode);
    integrate(&mut stepper, spec, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{BumpShape, Profile, ProfileTerm, TimeProfile};
    use crate::scalar::{solve_scalar, step_w};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pme2() -> IsothermModel {
        IsothermModel::power_law(2.0).unwrap()
    }

    fn hand_state() -> SpeciesState {
        let g = Grid::new_1d(5.0, 5, 0.0).unwrap();
        let u = Field::from_values(g, vec![0.0, 0.0, 0.5, 0.0, 0.0]).unwrap();
        SpeciesState::new(vec![u.clone(), u], 0.0).unwrap()
    }

    #[test]
    fn translate_examples() {
        let zero = boundary_translate(&pme2(), &[0.0, 0.0]).unwrap();
        assert_eq!(zero.g, 0.0);
        assert_eq!(zero.u_b, vec![0.0, 0.0]);
        let t = boundary_translate(&pme2(), &[0.18, 0.18]).unwrap();
        assert_relative_eq!(t.g, 0.36, max_relative = 1e-15);
        assert_relative_eq!(t.w_b, 0.6, max_relative = 1e-12);
        for u in &t.u_b {
            assert_relative_eq!(*u, 0.3, max_relative = 1e-12);
        }
        assert_relative_eq!(t.u_b.iter().sum::<f64>(), t.w_b, max_relative = 1e-12);
        let f = IsothermModel::freundlich(0.5, 0.5).unwrap();
        let single = boundary_translate(&f, &[0.7]).unwrap();
        assert_eq!(single.w_b, f.beta(0.7).unwrap());
        assert_relative_eq!(single.u_b[0], single.w_b, max_relative = 1e-12);
        assert!(boundary_translate(&f, &[-0.1]).is_err());
    }

    #[test]
    fn hand_stencil_both_modes() {
        let s = hand_state();
        let g = s.grid();
        let zeros = vec![Field::zeros(g), Field::zeros(g)];
        let coupled = step_coupled(&s, &zeros, &[0.0, 0.0], &pme2(), 0.1).unwrap();
        let (decomposed, w) = step_decomposed(&s, &s.w(), &zeros, &[0.0, 0.0], &pme2(), 0.1).unwrap();
        let expected = [0.0, 0.05, 0.4, 0.05, 0.0];
        for u in coupled.u.iter().chain(&decomposed.u) {
            for (a, b) in u.values().iter().zip(expected) {
                assert_relative_eq!(*a, b, max_relative = 1e-15);
            }
        }
        let scalar = step_w(&s.w(), &Field::zeros(g), 0.0, &pme2(), 0.1).unwrap();
        assert_eq!(coupled.w(), scalar);
        assert_eq!(w, scalar);
        assert_eq!(coupled.u[0], coupled.u[1]);
        assert_relative_eq!(coupled.t, 0.1);
    }

    #[test]
    fn zero_species_stays_zero() {
        let mut s = hand_state();
        s.u[1] = Field::zeros(s.grid());
        let zeros = vec![Field::zeros(s.grid()); 2];
        let mut cur = s;
        for _ in 0..5 {
            cur = step_coupled(&cur, &zeros, &[0.0, 0.0], &pme2(), 0.1).unwrap();
        }
        assert!(cur.u[1].values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn coupled_refuses_unstable_step() {
        let s = hand_state();
        let zeros = vec![Field::zeros(s.grid()); 2];
        assert!(matches!(step_coupled(&s, &zeros, &[0.0, 0.0], &pme2(), 1.0), Err(Error::Cfl { .. })));
    }

    #[test]
    fn concentration_examples() {
        let g = Grid::new_1d(3.0, 3, 0.0).unwrap();
        let u1 = Field::from_values(g, vec![3.0, 0.0, 0.0]).unwrap();
        let s = SpeciesState::new(vec![u1, Field::zeros(g)], 0.0).unwrap();
        let z = concentration_view(&s, &pme2());
        assert_relative_eq!(z[0].values()[0], 9.0, max_relative = 1e-14);
        assert_eq!(z[1].values()[0], 0.0);
        assert_eq!(z[0].values()[1], 0.0);
        let fz = concentration_view(&s, &IsothermModel::freundlich(0.5, 0.5).unwrap());
        assert_relative_eq!(fz[0].values()[0], 4.0, max_relative = 1e-10);
    }

    fn bump(grid: Grid, c: f64, r: f64, h: f64) -> Field {
        Profile(vec![ProfileTerm::Bump { center: [c, 0.0], radius: r, height: h, shape: BumpShape::Cosine }]).evaluate(grid)
    }

    fn two_species(model: IsothermModel, boundary: BoundaryData) -> SystemProblem {
        let grid = Grid::new_1d(4.0, 80, -2.0).unwrap();
        SystemProblem {
            grid,
            isotherm: model,
            initial: vec![bump(grid, -0.4, 0.6, 1.0), bump(grid, 0.3, 0.5, 0.6)],
            forcing: vec![Source::zero(grid), Source::new(bump(grid, 0.0, 0.3, 0.2), Some((0.0, 0.02)))],
            boundary,
            t_start: 0.0,
            horizon: 0.05,
            bound: None,
        }
    }

    #[test]
    fn zero_problem_gives_zero_trajectory() {
        let mut p = two_species(pme2(), BoundaryData::Vacuum);
        p.initial = vec![Field::zeros(p.grid); 2];
        p.forcing = vec![Source::zero(p.grid); 2];
        let traj = solve_system(&p, &SolverConfig::default()).unwrap();
        for s in &traj.snapshots {
            assert!(s.species.iter().all(|u| u.values().iter().all(|v| *v == 0.0)));
        }
    }

    #[test]
    fn modes_agree_and_sum_matches_scalar() {
        let model = IsothermModel::freundlich(0.5, 0.3).unwrap();
        let p = two_species(model, BoundaryData::Dirichlet(vec![TimeProfile::Constant(0.01), TimeProfile::Constant(0.02)]));
        let coupled = solve_system(&p, &SolverConfig::default()).unwrap();
        let decomposed =
            solve_system(&p, &SolverConfig { mode: SolverMode::Decomposed, ..Default::default() }).unwrap();
        let scalar = solve_scalar(&p.scalar_reduction(), &SolverConfig::default()).unwrap();
        let w0 = p.scalar_reduction().w0.max();
        assert!(decomposed.monitors.max_track_drift <= 1e-12 * w0);
        for ((a, b), s) in coupled.snapshots.iter().zip(&decomposed.snapshots).zip(&scalar.snapshots) {
            let wa = a.w();
            for (x, y) in wa.values().iter().zip(s.species[0].values()) {
                assert!((x - y).abs() <= 1e-12 * w0);
            }
            for (ua, ub) in a.species.iter().zip(&b.species) {
                for (x, y) in ua.values().iter().zip(ub.values()) {
                    assert!((x - y).abs() <= 1e-9 * w0);
                }
            }
        }
    }

    #[test]
    fn single_species_matches_scalar_bitwise() {
        let grid = Grid::new_1d(4.0, 60, -2.0).unwrap();
        let model = IsothermModel::freundlich(0.4, 0.1).unwrap();
        let p = SystemProblem {
            grid,
            isotherm: model,
            initial: vec![bump(grid, 0.0, 0.8, 1.0)],
            forcing: vec![Source::new(bump(grid, 0.2, 0.3, 0.5), Some((0.0, 0.01)))],
            boundary: BoundaryData::Dirichlet(vec![TimeProfile::Linear { start: 0.0, slope: 0.5 }]),
            t_start: 0.0,
            horizon: 0.03,
            bound: None,
        };
        let scalar = solve_scalar(&p.scalar_reduction(), &SolverConfig::default()).unwrap();
        for mode in [SolverMode::Coupled, SolverMode::Decomposed] {
            let sys = solve_system(&p, &SolverConfig { mode, ..Default::default() }).unwrap();
            assert_eq!(sys.snapshots, scalar.snapshots);
            assert_eq!(sys.diagnostics_csv(), scalar.diagnostics_csv());
        }
    }

    #[test]
    fn symmetric_species_stay_equal() {
        let grid = Grid::new_1d(4.0, 60, -2.0).unwrap();
        let u = bump(grid, 0.1, 0.7, 0.8);
        let p = SystemProblem {
            grid,
            isotherm: pme2(),
            initial: vec![u.clone(), u],
            forcing: vec![Source::zero(grid); 2],
            boundary: BoundaryData::Vacuum,
            t_start: 0.0,
            horizon: 0.1,
            bound: None,
        };
        let traj = solve_system(&p, &SolverConfig::default()).unwrap();
        for s in &traj.snapshots {
            assert_eq!(s.species[0], s.species[1]);
        }
    }

    #[test]
    fn permutation_and_domination() {
        let p = two_species(pme2(), BoundaryData::Dirichlet(vec![TimeProfile::Constant(0.0), TimeProfile::Constant(0.03)]));
        let q = p.permuted(&[1, 0]).unwrap();
        assert!(p.permuted(&[0, 0]).is_err());
        let a = solve_system(&p, &SolverConfig::default()).unwrap();
        let b = solve_system(&q, &SolverConfig::default()).unwrap();
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(sa.species[0], sb.species[1]);
            assert_eq!(sa.species[1], sb.species[0]);
            let w = sa.w();
            for u in &sa.species {
                assert!(u.values().iter().zip(w.values()).all(|(x, y)| *x >= 0.0 && x <= y));
            }
        }
    }

    #[test]
    fn rejects_bad_problems() {
        let mut p = two_species(pme2(), BoundaryData::Vacuum);
        p.forcing.pop();
        assert!(p.validate().is_err());
        let mut p = two_species(pme2(), BoundaryData::Vacuum);
        p.bound = Some(0.5);
        assert!(p.validate().is_err());
        let p = two_species(pme2(), BoundaryData::Dirichlet(vec![TimeProfile::Constant(0.1)]));
        assert!(p.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn coupled_step_sums_to_scalar_step(
            a in proptest::collection::vec(0.0f64..1.0, 10),
            b in proptest::collection::vec(0.0f64..1.0, 10),
            z in (0.0f64..0.3, 0.0f64..0.3),
        ) {
            let grid = Grid::new_1d(1.0, 10, 0.0).unwrap();
            let model = IsothermModel::freundlich(0.6, 0.2).unwrap();
            let s = SpeciesState::new(vec![Field::from_values(grid, a).unwrap(), Field::from_values(grid, b).unwrap()], 0.0).unwrap();
            let w = s.w();
            let dt = crate::scalar::cfl_dt(&model, w.max().max(model.beta(z.0 + z.1).unwrap()), &grid, 0.5).unwrap().dt;
            let zeros = vec![Field::zeros(grid); 2];
            let next = step_coupled(&s, &zeros, &[z.0, z.1], &model, dt).unwrap();
            let scalar = step_w(&w, &Field::zeros(grid), z.0 + z.1, &model, dt).unwrap();
            for (x, y) in next.w().values().iter().zip(scalar.values()) {
                prop_assert!((x - y).abs() <= 1e-14 * w.max().max(1.0));
            }
            prop_assert!(next.u.iter().all(|u| u.min() >= 0.0));
        }
    }
}
