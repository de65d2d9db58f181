//! Closed-form self-similar source solution of the porous medium equation
//! `u_t = Laplacian(u^m)`, used as an accuracy oracle.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barenblatt {
    m: f64,
    dim: usize,
    c: f64,
    center: [f64; 2],
}

impl Barenblatt {
    pub fn new(m: f64, dim: usize, c: f64, center: [f64; 2]) -> Result<Self> {
        if !(m > 1.0) || !(c > 0.0) || !(1..=2).contains(&dim) {
            return Err(Error::Invalid(format!("barenblatt needs m > 1, c > 0, dim in {{1,2}} (m={m}, c={c})")));
        }
        Ok(Self { m, dim, c, center })
    }

    /// Amplitude decay exponent `n / (n(m-1) + 2)`.
    pub fn alpha(&self) -> f64 {
        let n = self.dim as f64;
        n / (n * (self.m - 1.0) + 2.0)
    }

    /// Front growth exponent `1 / (n(m-1) + 2)`.
    pub fn growth_exponent(&self) -> f64 {
        self.alpha() / self.dim as f64
    }

    fn k(&self) -> f64 {
        let n = self.dim as f64;
        self.alpha() * (self.m - 1.0) / (2.0 * self.m * n)
    }

    pub fn value(&self, x: [f64; 2], t: f64) -> f64 {
        let mut r2 = 0.0;
        for axis in 0..self.dim {
            let d = x[axis] - self.center[axis];
            r2 += d * d;
        }
        let beta = self.growth_exponent();
        let core = self.c - self.k() * r2 * t.powf(-2.0 * beta);
        if core <= 0.0 {
            0.0
        } else {
            t.powf(-self.alpha()) * core.powf(1.0 / (self.m - 1.0))
        }
    }

    /// Radius of the support at time `t`.
    pub fn radius(&self, t: f64) -> f64 {
        (self.c / self.k()).sqrt() * t.powf(self.growth_exponent())
    }

    pub fn field(&self, grid: Grid, t: f64) -> Field {
        Field::from_fn(grid, |x| self.value(x, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic_case() {
        let b = Barenblatt::new(2.0, 1, 1.0, [0.0, 0.0]).unwrap();
        assert!((b.alpha() - 1.0 / 3.0).abs() < 1e-15);
        assert!((b.radius(1.0) - 12f64.sqrt()).abs() < 1e-12);
        assert_eq!(b.value([0.0, 0.0], 1.0), 1.0);
        assert_eq!(b.value([4.0, 0.0], 1.0), 0.0);
    }

    #[test]
    fn satisfies_pde_pointwise() {
        // Finite-difference residual of u_t - (u^m)_xx inside the support.
        for (m, dim) in [(2.0, 1), (3.0, 1), (2.0, 2)] {
            let b = Barenblatt::new(m, dim, 1.0, [0.0, 0.0]).unwrap();
            let (t, x) = (2.0, [0.7, 0.4]);
            let e = 1e-4;
            let ut = (b.value(x, t + e) - b.value(x, t - e)) / (2.0 * e);
            let pow = |y: [f64; 2]| b.value(y, t).powf(m);
            let mut lap = 0.0;
            for axis in 0..dim {
                let mut xp = x;
                let mut xm = x;
                xp[axis] += e;
                xm[axis] -= e;
                lap += (pow(xp) - 2.0 * pow(x) + pow(xm)) / (e * e);
            }
            assert!((ut - lap).abs() < 1e-5, "m={m} dim={dim}: {ut} vs {lap}");
        }
    }

    #[test]
    fn mass_is_conserved() {
        let b = Barenblatt::new(3.0, 1, 1.0, [0.0, 0.0]).unwrap();
        let g = Grid::new_1d(40.0, 40000, -20.0).unwrap();
        let m1 = b.field(g, 1.0).integrate();
        let m2 = b.field(g, 5.0).integrate();
        assert!((m1 - m2).abs() < 1e-6 * m1);
    }
}
