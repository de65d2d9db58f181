use proptest::prelude::*;
use sorption::{
    cfl_dt, solve_system, step_coupled, step_decomposed, step_w, BoundaryData, Field, Grid, IsothermModel,
    SolverConfig, SolverMode, Source, SpeciesState, SystemProblem, TimeProfile,
};

fn model_strategy() -> impl Strategy<Value = IsothermModel> {
    prop_oneof![
        (0.2f64..0.9, 0.0f64..0.8).prop_map(|(p, phi)| IsothermModel::freundlich(p, phi).unwrap()),
        (1.2f64..4.0).prop_map(|m| IsothermModel::power_law(m).unwrap()),
        Just(IsothermModel::linear()),
    ]
}

/// Species on a 12-cell line, each cell zero with some probability.
fn species_strategy(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], 12),
        n,
    )
}

fn state(values: &[Vec<f64>]) -> SpeciesState {
    let grid = Grid::new_1d(1.2, 12, 0.0).unwrap();
    let u = values.iter().map(|v| Field::from_values(grid, v.clone()).unwrap()).collect();
    SpeciesState::new(u, 0.0).unwrap()
}

fn stable_dt(model: &IsothermModel, s: &SpeciesState, f_sup: f64, g: f64) -> f64 {
    let m = s.w().max().max(model.beta(g).unwrap()) + f_sup + 1e-3;
    cfl_dt(model, m, &s.grid(), 0.6).unwrap().dt
}

fn sup_diff(a: &Field, b: &Field) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn species_sum_follows_scalar_step(
        model in model_strategy(),
        u in species_strategy(3),
        f in prop::collection::vec(0.0f64..0.5, 3),
        z in prop::collection::vec(0.0f64..0.5, 3),
    ) {
        let s = state(&u);
        let grid = s.grid();
        let forcing: Vec<Field> = f.iter().map(|&v| Field::constant(grid, v)).collect();
        let g: f64 = z.iter().sum();
        let dt = stable_dt(&model, &s, f.iter().sum(), g);
        let next = step_coupled(&s, &forcing, &z, &model, dt).unwrap();
        let w_next = step_w(&s.w(), &Field::sum(grid, &forcing), g, &model, dt).unwrap();
        let scale = 1.0 + w_next.max();
        prop_assert!(sup_diff(&next.w(), &w_next) <= 1e-12 * scale);
        for ui in &next.u {
            prop_assert!(ui.min() >= 0.0);
        }
    }

    #[test]
    fn decomposed_step_matches_coupled_step(
        model in model_strategy(),
        u in species_strategy(2),
        z in prop::collection::vec(0.0f64..0.5, 2),
    ) {
        let s = state(&u);
        let grid = s.grid();
        let forcing = vec![Field::zeros(grid); 2];
        let dt = stable_dt(&model, &s, 0.0, z.iter().sum());
        let coupled = step_coupled(&s, &forcing, &z, &model, dt).unwrap();
        let (decomposed, w) = step_decomposed(&s, &s.w(), &forcing, &z, &model, dt).unwrap();
        for (a, b) in coupled.u.iter().zip(&decomposed.u) {
            prop_assert_eq!(a.values(), b.values());
        }
        prop_assert!(sup_diff(&w, &coupled.w()) <= 1e-12 * (1.0 + w.max()));
    }

    #[test]
    fn relabelling_species_relabels_the_step(
        model in model_strategy(),
        u in species_strategy(3),
        z in prop::collection::vec(0.0f64..0.5, 3),
    ) {
        let s = state(&u);
        let grid = s.grid();
        let forcing = vec![Field::zeros(grid); 3];
        let dt = stable_dt(&model, &s, 0.0, z.iter().sum());
        let next = step_coupled(&s, &forcing, &z, &model, dt).unwrap();
        let perm = [2, 0, 1];
        let pu: Vec<Vec<f64>> = perm.iter().map(|&k| u[k].clone()).collect();
        let pz: Vec<f64> = perm.iter().map(|&k| z[k]).collect();
        let pnext = step_coupled(&state(&pu), &forcing, &pz, &model, dt).unwrap();
        for (k, &src) in perm.iter().enumerate() {
            prop_assert!(sup_diff(&pnext.u[k], &next.u[src]) <= 1e-13 * (1.0 + next.u[src].max()));
        }
    }

    #[test]
    fn ordered_species_stay_ordered(
        model in model_strategy(),
        base in prop::collection::vec(0.0f64..1.0, 12),
        extra in prop::collection::vec(0.0f64..0.5, 12),
        z in 0.0f64..0.3,
    ) {
        let upper: Vec<f64> = base.iter().zip(&extra).map(|(a, b)| a + b).collect();
        let s = state(&[base, upper]);
        let grid = s.grid();
        let forcing = vec![Field::zeros(grid); 2];
        let zd = [z, z + 0.1];
        let dt = stable_dt(&model, &s, 0.0, 2.0 * z + 0.1);
        let next = step_coupled(&s, &forcing, &zd, &model, dt).unwrap();
        for (lo, hi) in next.u[0].values().iter().zip(next.u[1].values()) {
            prop_assert!(lo <= hi);
        }
    }
}

#[test]
fn empty_species_never_fills_in() {
    let grid = Grid::new_1d(6.0, 60, -3.0).unwrap();
    let bump = Field::from_fn(grid, |x| (1.0 - x[0] * x[0]).max(0.0));
    let problem = SystemProblem {
        grid,
        isotherm: IsothermModel::freundlich(0.5, 0.2).unwrap(),
        initial: vec![bump, Field::zeros(grid)],
        forcing: vec![Source::zero(grid); 2],
        boundary: BoundaryData::Vacuum,
        t_start: 0.0,
        horizon: 0.2,
        bound: None,
    };
    for mode in [SolverMode::Coupled, SolverMode::Decomposed] {
        let traj = solve_system(&problem, &SolverConfig { mode, ..Default::default() }).unwrap();
        for snap in &traj.snapshots {
            assert!(snap.species[1].values().iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn dirichlet_run_relaxes_to_boundary_state() {
    let grid = Grid::new_1d(1.0, 20, 0.0).unwrap();
    let model = IsothermModel::freundlich(0.5, 0.5).unwrap();
    let z = [0.2, 0.6];
    let problem = SystemProblem {
        grid,
        isotherm: model.clone(),
        initial: vec![Field::zeros(grid); 2],
        forcing: vec![Source::zero(grid); 2],
        boundary: BoundaryData::Dirichlet(z.iter().map(|&v| TimeProfile::Constant(v)).collect()),
        t_start: 0.0,
        horizon: 3.0,
        bound: None,
    };
    let traj = solve_system(&problem, &SolverConfig::default()).unwrap();
    let last = traj.final_snapshot();
    // steady state: u_i = z_i * beta(g) / g
    let g: f64 = z.iter().sum();
    let ratio = model.beta(g).unwrap() / g;
    for (ui, zi) in last.species.iter().zip(z) {
        for &v in ui.values() {
            assert!((v - zi * ratio).abs() < 1e-6, "{v} vs {}", zi * ratio);
        }
    }
}

#[test]
fn large_safety_factor_still_completes_with_wall_data() {
    let grid = Grid::new_2d([1.0, 1.0], [12, 12], [0.0, 0.0]).unwrap();
    let problem = SystemProblem {
        grid,
        isotherm: IsothermModel::power_law(2.0).unwrap(),
        initial: vec![Field::constant(grid, 0.5)],
        forcing: vec![Source::zero(grid)],
        boundary: BoundaryData::Dirichlet(vec![TimeProfile::Constant(1.0)]),
        t_start: 0.0,
        horizon: 0.05,
        bound: None,
    };
    let traj = solve_system(&problem, &SolverConfig { safety: 1.0, ..Default::default() }).unwrap();
    assert!(traj.monitors.min_density >= 0.0);
}
