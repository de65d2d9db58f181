//! Initial, forcing and boundary data descriptors.

use crate::barenblatt::Barenblatt;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Scalar function of time used for boundary concentrations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    Constant(f64),
    /// `start + slope * t` (absolute time).
    Linear { start: f64, slope: f64 },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant(v) => v,
            TimeProfile::Linear { start, slope } => start + slope * t,
        }
    }

    pub fn max_on(&self, t0: f64, t1: f64) -> f64 {
        self.value(t0).max(self.value(t1))
    }

    pub fn min_on(&self, t0: f64, t1: f64) -> f64 {
        self.value(t0).min(self.value(t1))
    }
}

/// Boundary data for the species concentrations.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    /// Homogeneous Dirichlet box emulating the Cauchy problem.
    Vacuum,
    /// One concentration profile per species, imposed on every face.
    Dirichlet(Vec<TimeProfile>),
}

impl BoundaryData {
    pub fn is_vacuum(&self) -> bool {
        matches!(self, BoundaryData::Vacuum)
    }

    /// Per-species boundary concentrations at time `t`.
    pub fn species_values(&self, t: f64, n_species: usize) -> Vec<f64> {
        match self {
            BoundaryData::Vacuum => vec![0.0; n_species],
            BoundaryData::Dirichlet(profiles) => profiles.iter().map(|p| p.value(t)).collect(),
        }
    }

    /// `|z^D|_1` at time `t`, summed in species order.
    pub fn total(&self, t: f64) -> f64 {
        match self {
            BoundaryData::Vacuum => 0.0,
            BoundaryData::Dirichlet(profiles) => {
                let mut acc = 0.0;
                for (k, p) in profiles.iter().enumerate() {
                    acc = if k == 0 { p.value(t) } else { acc + p.value(t) };
                }
                acc
            }
        }
    }

    /// Upper bound for `|z^D|_1` over `[t0, t1]`.
    pub fn max_total(&self, t0: f64, t1: f64) -> f64 {
        match self {
            BoundaryData::Vacuum => 0.0,
            BoundaryData::Dirichlet(profiles) => profiles.iter().map(|p| p.max_on(t0, t1)).sum(),
        }
    }

    pub(crate) fn validate(&self, n_species: usize, t0: f64, t1: f64) -> Result<()> {
        if let BoundaryData::Dirichlet(profiles) = self {
            if profiles.len() != n_species {
                return Err(Error::Invalid(format!(
                    "boundary data has {} profiles for {n_species} species",
                    profiles.len()
                )));
            }
            for (i, p) in profiles.iter().enumerate() {
                let lo = p.min_on(t0, t1);
                if !(lo >= 0.0) || !p.max_on(t0, t1).is_finite() {
                    return Err(Error::Invalid(format!(
                        "boundary concentration of species {} must stay nonnegative on the run interval",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpShape {
    /// `h/2 (1 + cos(pi d / r))` inside the ball.
    Cosine,
    Indicator,
}

/// One additive term of a spatial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileTerm {
    Constant(f64),
    Bump { center: [f64; 2], radius: f64, height: f64, shape: BumpShape },
    /// Self-similar porous-medium profile at time `t0`.
    Barenblatt { m: f64, c: f64, t0: f64, center: [f64; 2] },
}

impl ProfileTerm {
    fn validate(&self) -> Result<()> {
        match *self {
            ProfileTerm::Constant(v) => {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Invalid(format!("constant profile must be nonnegative, got {v}")));
                }
            }
            ProfileTerm::Bump { radius, height, .. } => {
                if !(height >= 0.0 && height.is_finite()) {
                    return Err(Error::Invalid(format!("bump height must be nonnegative, got {height}")));
                }
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Invalid(format!("bump radius must be positive, got {radius}")));
                }
            }
            ProfileTerm::Barenblatt { m, c, t0, .. } => {
                if !(m > 1.0 && c > 0.0 && t0 > 0.0) {
                    return Err(Error::Invalid("barenblatt profile needs m > 1, c > 0, t0 > 0".into()));
                }
            }
        }
        Ok(())
    }

    fn value(&self, grid: &Grid, x: [f64; 2]) -> f64 {
        match *self {
            ProfileTerm::Constant(v) => v,
            ProfileTerm::Bump { center, radius, height, shape } => {
                let d = grid.distance(x, center);
                if d >= radius {
                    0.0
                } else {
                    match shape {
                        BumpShape::Cosine => 0.5 * height * (1.0 + (std::f64::consts::PI * d / radius).cos()),
                        BumpShape::Indicator => height,
                    }
                }
            }
            ProfileTerm::Barenblatt { m, c, t0, center } => {
                Barenblatt::new(m, grid.dim(), c, center).map(|b| b.value(x, t0)).unwrap_or(0.0)
            }
        }
    }
}

/// Sum of profile terms; an empty profile is identically zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Profile(pub Vec<ProfileTerm>);

impl Profile {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        self.0.iter().try_for_each(ProfileTerm::validate)
    }

    pub fn evaluate(&self, grid: Grid) -> Field {
        Field::from_fn(grid, |x| self.0.iter().map(|t| t.value(&grid, x)).sum())
    }
}

/// Forcing term: a fixed spatial profile, optionally active only on
/// `[t0, t1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub profile: Field,
    pub window: Option<(f64, f64)>,
}

impl Source {
    pub fn zero(grid: Grid) -> Self {
        Self { profile: Field::zeros(grid), window: None }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { profile: Field::constant(grid, value), window: None }
    }

    pub fn new(profile: Field, window: Option<(f64, f64)>) -> Self {
        Self { profile, window }
    }

    pub fn is_active(&self, t: f64) -> bool {
        match self.window {
            None => true,
            Some((t0, t1)) => t >= t0 && t < t1,
        }
    }

    pub fn sup(&self) -> f64 {
        self.profile.max().max(0.0)
    }

    /// Integral of the source over `[t0, t1]` per unit cell value.
    pub fn active_duration(&self, t0: f64, t1: f64) -> f64 {
        match self.window {
            None => t1 - t0,
            Some((a, b)) => (b.min(t1) - a.max(t0)).max(0.0),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.profile.min() < 0.0 || !self.profile.is_finite() {
            return Err(Error::Invalid("forcing must be finite and nonnegative".into()));
        }
        if let Some((a, b)) = self.window {
            if !(a < b) {
                return Err(Error::Invalid(format!("forcing window [{a}, {b}) is empty")));
            }
        }
        Ok(())
    }
}

/// Writes `sum_i f_i(t)` into `out`, summing in species order.
pub(crate) fn sum_sources(sources: &[Source], t: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut first = true;
    for s in sources {
        let active = s.is_active(t);
        if first {
            if active {
                out.copy_from_slice(s.profile.values());
            }
            first = false;
        } else if active {
            for (o, v) in out.iter_mut().zip(s.profile.values()) {
                *o += v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_bump_shape() {
        let g = Grid::new_1d(4.0, 4, -2.0).unwrap();
        let p = Profile(vec![ProfileTerm::Bump {
            center: [0.0, 0.0],
            radius: 1.0,
            height: 2.0,
            shape: BumpShape::Cosine,
        }]);
        let f = p.evaluate(g);
        // centres at -1.5, -0.5, 0.5, 1.5
        assert_eq!(f.values()[0], 0.0);
        assert!((f.values()[1] - 1.0).abs() < 1e-15);
        assert!((f.values()[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_negative_data() {
        assert!(Profile(vec![ProfileTerm::Constant(-1.0)]).validate().is_err());
        let bc = BoundaryData::Dirichlet(vec![TimeProfile::Linear { start: 1.0, slope: -1.0 }]);
        assert!(bc.validate(1, 0.0, 2.0).is_err());
        assert!(bc.validate(1, 0.0, 0.5).is_ok());
    }

    #[test]
    fn windowed_sources_sum() {
        let g = Grid::new_1d(1.0, 3, 0.0).unwrap();
        let a = Source::new(Field::constant(g, 1.0), Some((0.0, 1.0)));
        let b = Source::constant(g, 2.0);
        let mut out = vec![0.0; 3];
        sum_sources(&[a.clone(), b.clone()], 0.5, &mut out);
        assert_eq!(out, vec![3.0; 3]);
        sum_sources(&[a, b], 1.0, &mut out);
        assert_eq!(out, vec![2.0; 3]);
    }
}
