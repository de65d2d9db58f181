//! Finite-volume solver and diagnostics for multicomponent degenerate
//! diffusion `d_t u = Laplacian(Phi(|u|_1)/|u|_1 u) + f` arising from
//! competitive Freundlich adsorption.

pub mod analysis;
pub mod barenblatt;
pub mod data;
pub mod error;
pub mod grid;
pub mod io;
pub mod isotherm;
pub mod root;
pub mod scalar;
pub mod system;
pub mod trajectory;

pub use barenblatt::Barenblatt;
pub use data::{BoundaryData, BumpShape, Profile, ProfileTerm, Source, TimeProfile};
pub use error::{Error, Result};
pub use grid::{Field, Grid, Support};
pub use isotherm::{IsothermKind, IsothermModel, StructureReport};
pub use scalar::{cfl_dt, solve_scalar, step_w, step_w_report, CflStep, ScalarProblem, StepReport};
pub use system::{
    boundary_translate, concentration_view, solve_system, step_coupled, step_decomposed, BoundaryTranslation,
    SpeciesState, SystemProblem,
};
pub use trajectory::{DiagnosticsRow, Monitors, RunTrajectory, Snapshot, SolverConfig, SolverMode};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
