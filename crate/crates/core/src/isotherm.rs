//! Adsorption isotherm algebra.
//!
//! A model is described by the scalar forward map `beta` (concentration sum to
//! density sum). Everything the solver needs is derived from it: the inverse
//! `phi`, the pressure `rho(w) = phi(w)/w`, the energy density
//! `psi(s) = int_0^s phi`, and the vector maps between concentrations and
//! densities. Derivatives of `phi` are obtained analytically through the
//! inverse function rule.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::root::invert_increasing;

/// Default relative tolerance for the inversion of `beta`.
pub const DEFAULT_INVERSION_TOL: f64 = 1e-12;

/// Relative slack used when comparing sampled structural ratios against their
/// nominal bounds.
const STRUCTURE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsothermKind {
    /// `beta(r) = phi r + (1 - phi) r^p`.
    Freundlich { p: f64, phi: f64 },
    /// `Phi(s) = s^m`, i.e. `beta(r) = r^(1/m)`.
    PowerLaw { m: f64 },
    /// `beta(r) = r`.
    Linear,
}

impl IsothermKind {
    fn validate(&self) -> Result<()> {
        match *self {
            IsothermKind::Freundlich { p, phi } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Domain(format!("Freundlich exponent p must be in (0,1), got {p}")));
                }
                if !(0.0..1.0).contains(&phi) {
                    return Err(Error::Domain(format!("Freundlich porosity phi must be in [0,1), got {phi}")));
                }
            }
            IsothermKind::PowerLaw { m } => {
                if !(m >= 1.0 && m.is_finite()) {
                    return Err(Error::Domain(format!("power-law exponent m must be >= 1, got {m}")));
                }
            }
            IsothermKind::Linear => {}
        }
        Ok(())
    }

    fn beta(&self, r: f64) -> f64 {
        match *self {
            IsothermKind::Freundlich { p, phi } => phi * r + (1.0 - phi) * r.powf(p),
            IsothermKind::PowerLaw { m } => {
                if m == 2.0 {
                    r.sqrt()
                } else if m == 1.0 {
                    r
                } else {
                    r.powf(1.0 / m)
                }
            }
            IsothermKind::Linear => r,
        }
    }

    fn beta_prime(&self, r: f64) -> f64 {
        match *self {
            IsothermKind::Freundlich { p, phi } => {
                if r == 0.0 {
                    f64::INFINITY
                } else {
                    phi + (1.0 - phi) * p * r.powf(p - 1.0)
                }
            }
            IsothermKind::PowerLaw { m } => {
                if m == 1.0 {
                    1.0
                } else if r == 0.0 {
                    f64::INFINITY
                } else {
                    r.powf(1.0 / m - 1.0) / m
                }
            }
            IsothermKind::Linear => 1.0,
        }
    }

    fn beta_second(&self, r: f64) -> f64 {
        match *self {
            IsothermKind::Freundlich { p, phi } => (1.0 - phi) * p * (p - 1.0) * r.powf(p - 2.0),
            IsothermKind::PowerLaw { m } => {
                if m == 1.0 {
                    0.0
                } else {
                    (1.0 / m) * (1.0 / m - 1.0) * r.powf(1.0 / m - 2.0)
                }
            }
            IsothermKind::Linear => 0.0,
        }
    }

    fn phi(&self, s: f64, tol: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        match *self {
            IsothermKind::Freundlich { p, phi } => {
                if phi == 0.0 {
                    return Ok(s.powf(1.0 / p));
                }
                // beta(r) <= max(r, r^p) gives the lower end, beta(r) >= phi r
                // and beta(r) >= (1 - phi) r^p the upper end.
                let (lo, cap) = if s <= 1.0 { (s.powf(1.0 / p), 1.0) } else { (s, f64::INFINITY) };
                let hi = (s / phi).min((s / (1.0 - phi)).powf(1.0 / p)).min(cap).max(lo);
                invert_increasing(|r| self.beta(r), |r| self.beta_prime(r), s, lo, hi, tol)
            }
            IsothermKind::PowerLaw { m } => Ok(int_pow(s, m)),
            IsothermKind::Linear => Ok(s),
        }
    }

    fn phi_prime_at_zero(&self) -> f64 {
        match *self {
            IsothermKind::Freundlich { .. } => 0.0,
            IsothermKind::PowerLaw { m } => {
                if m == 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            IsothermKind::Linear => 1.0,
        }
    }

    fn phi_prime(&self, s: f64, tol: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(self.phi_prime_at_zero());
        }
        match *self {
            IsothermKind::Freundlich { .. } => Ok(1.0 / self.beta_prime(self.phi(s, tol)?)),
            IsothermKind::PowerLaw { m } => Ok(if m == 1.0 { 1.0 } else { m * int_pow(s, m - 1.0) }),
            IsothermKind::Linear => Ok(1.0),
        }
    }

    fn phi_second(&self, s: f64, tol: f64) -> Result<f64> {
        match *self {
            IsothermKind::Freundlich { p, phi } => {
                if s == 0.0 {
                    // Leading order: -beta''/beta'^3 ~ r^(1 - 2p).
                    return Ok(if p < 0.5 {
                        0.0
                    } else if p == 0.5 {
                        (1.0 - p) / ((1.0 - phi).powi(2) * p * p)
                    } else {
                        f64::INFINITY
                    });
                }
                let r = self.phi(s, tol)?;
                let d1 = self.beta_prime(r);
                Ok(-self.beta_second(r) / (d1 * d1 * d1))
            }
            IsothermKind::PowerLaw { m } => {
                if m == 1.0 {
                    Ok(0.0)
                } else if s == 0.0 {
                    Ok(if m < 2.0 {
                        f64::INFINITY
                    } else if m == 2.0 {
                        2.0
                    } else {
                        0.0
                    })
                } else {
                    Ok(m * (m - 1.0) * int_pow(s, m - 2.0))
                }
            }
            IsothermKind::Linear => Ok(0.0),
        }
    }

    fn psi(&self, s: f64, tol: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        match *self {
            IsothermKind::Freundlich { p, phi } => {
                // int_0^s Phi = s Phi(s) - int_0^{Phi(s)} beta.
                let r = self.phi(s, tol)?;
                Ok(s * r - 0.5 * phi * r * r - (1.0 - phi) * r.powf(p + 1.0) / (p + 1.0))
            }
            IsothermKind::PowerLaw { m } => Ok(int_pow(s, m + 1.0) / (m + 1.0)),
            IsothermKind::Linear => Ok(0.5 * s * s),
        }
    }
}

/// `s^e`, exact for small integer exponents.
fn int_pow(s: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && (0.0..=16.0).contains(&e) {
        s.powi(e as i32)
    } else {
        s.powf(e)
    }
}

/// Globally Lipschitz modification of a model outside `[eps, 1/eps]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Window {
    eps: f64,
    phi_lo: f64,
    s_hi: f64,
    phi_hi: f64,
    slope_hi: f64,
    psi_lo: f64,
    psi_base_lo: f64,
    psi_hi: f64,
}

/// Monotone cubic lookup table for `Phi` on a log-spaced grid.
#[derive(Debug, Clone)]
pub struct PhiTable {
    ln_lo: f64,
    dln: f64,
    s: Vec<f64>,
    phi: Vec<f64>,
    // Slope-limited endpoint derivatives per interval.
    d0: Vec<f64>,
    d1: Vec<f64>,
}

impl PhiTable {
    fn build(kind: &IsothermKind, window: Option<&Window>, tol: f64, s_max: f64, nodes: usize) -> Result<Self> {
        if !(s_max > 0.0) || nodes < 4 {
            return Err(Error::Domain(format!("lookup table needs s_max > 0 and >= 4 nodes (got {s_max}, {nodes})")));
        }
        let s_lo = s_max * 1e-12;
        let ln_lo = s_lo.ln();
        let dln = (s_max.ln() - ln_lo) / (nodes - 1) as f64;
        let mut s = Vec::with_capacity(nodes);
        let mut phi = Vec::with_capacity(nodes);
        let mut slope = Vec::with_capacity(nodes);
        for k in 0..nodes {
            let sk = if k + 1 == nodes { s_max } else { (ln_lo + k as f64 * dln).exp() };
            s.push(sk);
            phi.push(eval_phi(kind, window, sk, tol)?);
            slope.push(eval_phi_prime(kind, window, sk, tol)?);
        }
        let mut d0 = Vec::with_capacity(nodes - 1);
        let mut d1 = Vec::with_capacity(nodes - 1);
        for k in 0..nodes - 1 {
            let secant = (phi[k + 1] - phi[k]) / (s[k + 1] - s[k]);
            let (mut a, mut b) = (slope[k], slope[k + 1]);
            if secant > 0.0 {
                let (alpha, beta) = (a / secant, b / secant);
                let norm = alpha * alpha + beta * beta;
                if norm > 9.0 {
                    let tau = 3.0 / norm.sqrt();
                    a = tau * alpha * secant;
                    b = tau * beta * secant;
                }
            } else {
                a = 0.0;
                b = 0.0;
            }
            d0.push(a);
            d1.push(b);
        }
        Ok(Self { ln_lo, dln, s, phi, d0, d1 })
    }

    fn eval(&self, x: f64) -> Option<f64> {
        let n = self.s.len();
        if x < self.s[0] || x > self.s[n - 1] {
            return None;
        }
        let mut k = ((x.ln() - self.ln_lo) / self.dln) as usize;
        k = k.min(n - 2);
        if x < self.s[k] && k > 0 {
            k -= 1;
        } else if x > self.s[k + 1] && k + 2 < n {
            k += 1;
        }
        let width = self.s[k + 1] - self.s[k];
        let t = (x - self.s[k]) / width;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(h00 * self.phi[k] + h10 * width * self.d0[k] + h01 * self.phi[k + 1] + h11 * width * self.d1[k])
    }
}

fn eval_phi(kind: &IsothermKind, window: Option<&Window>, s: f64, tol: f64) -> Result<f64> {
    match window {
        Some(w) if s <= w.eps => Ok(w.phi_lo * s / w.eps),
        Some(w) if s > w.s_hi => Ok(w.phi_hi + w.slope_hi * (s - w.s_hi)),
        _ => kind.phi(s, tol),
    }
}

fn eval_phi_prime(kind: &IsothermKind, window: Option<&Window>, s: f64, tol: f64) -> Result<f64> {
    match window {
        Some(w) if s < w.eps => Ok(w.phi_lo / w.eps),
        Some(w) if s > w.s_hi => Ok(w.slope_hi),
        _ => kind.phi_prime(s, tol),
    }
}

/// Nonlinearity of the multicomponent adsorption model.
#[derive(Debug, Clone)]
pub struct IsothermModel {
    kind: IsothermKind,
    window: Option<Window>,
    inversion_tol: f64,
    cache: Option<Arc<PhiTable>>,
}

impl PartialEq for IsothermModel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.window == other.window && self.inversion_tol == other.inversion_tol
    }
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and nonnegative, got {x}")))
    }
}

impl IsothermModel {
    pub fn new(kind: IsothermKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, window: None, inversion_tol: DEFAULT_INVERSION_TOL, cache: None })
    }

    pub fn freundlich(p: f64, phi: f64) -> Result<Self> {
        Self::new(IsothermKind::Freundlich { p, phi })
    }

    pub fn power_law(m: f64) -> Result<Self> {
        Self::new(IsothermKind::PowerLaw { m })
    }

    pub fn linear() -> Self {
        Self::new(IsothermKind::Linear).expect("linear model is always valid")
    }

    pub fn with_inversion_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Domain(format!("inversion tolerance must be in (0,1), got {tol}")));
        }
        self.inversion_tol = tol;
        Ok(self)
    }

    pub fn kind(&self) -> IsothermKind {
        self.kind
    }

    pub fn inversion_tol(&self) -> f64 {
        self.inversion_tol
    }

    /// Regularization parameter, if this model was produced by [`Self::regularize`].
    pub fn regularization(&self) -> Option<f64> {
        self.window.map(|w| w.eps)
    }

    pub fn has_table(&self) -> bool {
        self.cache.is_some()
    }

    /// Structural constant `a` the model is designed to satisfy
    /// (`1 <= s Phi'/Phi <= 1/a`).
    pub fn nominal_a(&self) -> f64 {
        match self.kind {
            IsothermKind::Freundlich { p, .. } => p,
            IsothermKind::PowerLaw { m } => 1.0 / m,
            IsothermKind::Linear => 1.0,
        }
    }

    /// Degeneracy exponent `m` of the slow-diffusion condition.
    pub fn nominal_m(&self) -> f64 {
        match self.kind {
            IsothermKind::Freundlich { p, .. } => 1.0 / p,
            IsothermKind::PowerLaw { m } => m,
            IsothermKind::Linear => 1.0,
        }
    }

    /// True when `Phi'(0) = 0` (slow diffusion, finite propagation speed).
    pub fn is_degenerate(&self) -> bool {
        self.phi_prime_at_zero() == 0.0
    }

    fn phi_prime_at_zero(&self) -> f64 {
        match self.window {
            Some(w) => w.phi_lo / w.eps,
            None => self.kind.phi_prime_at_zero(),
        }
    }

    pub fn beta(&self, r: f64) -> Result<f64> {
        check_nonneg("concentration", r)?;
        Ok(self.beta_unchecked(r))
    }

    pub(crate) fn beta_unchecked(&self, r: f64) -> f64 {
        match self.window {
            Some(w) if r <= w.phi_lo => r * w.eps / w.phi_lo,
            Some(w) if r > w.phi_hi => w.s_hi + (r - w.phi_hi) / w.slope_hi,
            _ => self.kind.beta(r),
        }
    }

    pub fn beta_prime(&self, r: f64) -> Result<f64> {
        check_nonneg("concentration", r)?;
        Ok(match self.window {
            Some(w) if r < w.phi_lo => w.eps / w.phi_lo,
            Some(w) if r > w.phi_hi => 1.0 / w.slope_hi,
            _ => self.kind.beta_prime(r),
        })
    }

    pub fn phi(&self, s: f64) -> Result<f64> {
        check_nonneg("density", s)?;
        eval_phi(&self.kind, self.window.as_ref(), s, self.inversion_tol)
    }

    pub fn phi_prime(&self, s: f64) -> Result<f64> {
        check_nonneg("density", s)?;
        if s == 0.0 {
            return Ok(self.phi_prime_at_zero());
        }
        eval_phi_prime(&self.kind, self.window.as_ref(), s, self.inversion_tol)
    }

    pub fn phi_second(&self, s: f64) -> Result<f64> {
        check_nonneg("density", s)?;
        match self.window {
            Some(w) if s < w.eps || s > w.s_hi => Ok(0.0),
            _ => self.kind.phi_second(s, self.inversion_tol),
        }
    }

    /// Pressure coefficient `Phi(w)/w`, with the limit `Phi'(0)` at vacuum.
    pub fn rho(&self, w: f64) -> Result<f64> {
        check_nonneg("density", w)?;
        if w == 0.0 {
            return Ok(self.phi_prime_at_zero());
        }
        Ok(self.phi(w)? / w)
    }

    /// Energy density `int_0^s Phi`.
    pub fn psi(&self, s: f64) -> Result<f64> {
        check_nonneg("density", s)?;
        let tol = self.inversion_tol;
        match self.window {
            Some(w) if s <= w.eps => Ok(0.5 * w.phi_lo * s * s / w.eps),
            Some(w) if s > w.s_hi => {
                let ds = s - w.s_hi;
                Ok(w.psi_hi + w.phi_hi * ds + 0.5 * w.slope_hi * ds * ds)
            }
            Some(w) => Ok(w.psi_lo + self.kind.psi(s, tol)? - w.psi_base_lo),
            None => self.kind.psi(s, tol),
        }
    }

    /// `Phi` for values already known to be nonnegative. Uses the lookup
    /// table when one is attached.
    pub(crate) fn phi_unchecked(&self, s: f64) -> f64 {
        if let Some(table) = &self.cache {
            if let Some(v) = table.eval(s) {
                return v;
            }
        }
        match eval_phi(&self.kind, self.window.as_ref(), s, self.inversion_tol) {
            Ok(v) => v,
            Err(Error::Inversion { lo, hi, .. }) => 0.5 * (lo + hi),
            Err(_) => f64::NAN,
        }
    }

    pub(crate) fn rho_unchecked(&self, w: f64) -> f64 {
        if w == 0.0 {
            self.phi_prime_at_zero()
        } else {
            self.phi_unchecked(w) / w
        }
    }

    pub(crate) fn psi_unchecked(&self, s: f64) -> f64 {
        self.psi(s.max(0.0)).unwrap_or(f64::NAN)
    }

    /// Density vector `b(z) = B(|z|_1) z`.
    pub fn map_b(&self, z: &[f64]) -> Result<Vec<f64>> {
        for &zi in z {
            check_nonneg("concentration component", zi)?;
        }
        let r: f64 = z.iter().sum();
        if r == 0.0 {
            return Ok(vec![0.0; z.len()]);
        }
        let factor = self.beta_unchecked(r) / r;
        Ok(z.iter().map(|zi| factor * zi).collect())
    }

    /// Concentration vector `z = Phi(|u|_1)/|u|_1 u`.
    pub fn map_b_inverse(&self, u: &[f64]) -> Result<Vec<f64>> {
        for &ui in u {
            check_nonneg("density component", ui)?;
        }
        let w: f64 = u.iter().sum();
        let rho = self.rho(w)?;
        Ok(u.iter().map(|ui| rho * ui).collect())
    }

    /// Globally Lipschitz approximation that coincides with the model on
    /// `[eps, 1/eps]`.
    ///
    /// Below `eps` the extension is the chord through the origin, above
    /// `1/eps` it is the tangent line; both keep `Phi_eps(0) = 0` and a
    /// positive slope.
    pub fn regularize(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Domain(format!("regularization eps must be in (0,1), got {eps}")));
        }
        let tol = self.inversion_tol;
        let s_hi = 1.0 / eps;
        let phi_lo = self.kind.phi(eps, tol)?;
        let phi_hi = self.kind.phi(s_hi, tol)?;
        let slope_hi = self.kind.phi_prime(s_hi, tol)?;
        let psi_lo = 0.5 * phi_lo * eps;
        let psi_base_lo = self.kind.psi(eps, tol)?;
        let psi_hi = psi_lo + self.kind.psi(s_hi, tol)? - psi_base_lo;
        if !(phi_lo > 0.0 && slope_hi > 0.0) {
            return Err(Error::Domain(format!("model has no positive slope on [{eps}, {s_hi}]")));
        }
        Ok(Self {
            kind: self.kind,
            window: Some(Window { eps, phi_lo, s_hi, phi_hi, slope_hi, psi_lo, psi_base_lo, psi_hi }),
            inversion_tol: tol,
            cache: None,
        })
    }

    /// Attaches a log-spaced lookup table for `Phi` on `[1e-12 s_max, s_max]`.
    /// Arguments outside the table range fall back to the exact inversion.
    pub fn with_phi_table(mut self, s_max: f64, nodes: usize) -> Result<Self> {
        let table = PhiTable::build(&self.kind, self.window.as_ref(), self.inversion_tol, s_max, nodes)?;
        self.cache = Some(Arc::new(table));
        Ok(self)
    }

    /// Samples the structural hypotheses on `n_samples` log-spaced densities
    /// in `[s_min, s_max]`.
    pub fn check_structure(&self, s_min: f64, s_max: f64, n_samples: usize) -> Result<StructureReport> {
        if !(s_min > 0.0 && s_max > s_min && s_max.is_finite()) || n_samples < 2 {
            return Err(Error::Domain(format!(
                "structure check needs 0 < s_min < s_max and n_samples >= 2 (got [{s_min}, {s_max}], {n_samples})"
            )));
        }
        let a_declared = self.nominal_a();
        let m_used = self.nominal_m();
        let exponent = (m_used + 1.0) / m_used;
        let log_lo = s_min.ln();
        let step = (s_max.ln() - log_lo) / (n_samples - 1) as f64;

        let mut beta_prime_min = f64::INFINITY;
        let mut increasing = true;
        let mut ratio_min = f64::INFINITY;
        let mut ratio_max = f64::NEG_INFINITY;
        let mut h3_min = f64::INFINITY;
        let mut sm_constant = f64::INFINITY;
        let mut prev_r = f64::NEG_INFINITY;
        for k in 0..n_samples {
            let s = if k + 1 == n_samples { s_max } else { (log_lo + k as f64 * step).exp() };
            let r = self.phi(s)?;
            let d1 = self.phi_prime(s)?;
            let d2 = self.phi_second(s)?;
            let bp = self.beta_prime(r)?;
            beta_prime_min = beta_prime_min.min(bp);
            if !(r > prev_r) {
                increasing = false;
            }
            prev_r = r;
            let ratio = s * d1 / r;
            ratio_min = ratio_min.min(ratio);
            ratio_max = ratio_max.max(ratio);
            h3_min = h3_min.min(s * d2 / d1);
            sm_constant = sm_constant.min(self.psi(s)? / r.powf(exponent));
        }
        let a_lower = 1.0 / ratio_max;
        let h1_ok = increasing && beta_prime_min > 0.0;
        let a_h2_ok = ratio_min >= 1.0 - STRUCTURE_SLACK && a_lower >= a_declared * (1.0 - STRUCTURE_SLACK);
        let h3_ok = h3_min >= -1.0 / a_declared;
        let sm_ok = m_used > 1.0 && sm_constant > 0.0 && sm_constant.is_finite();
        Ok(StructureReport {
            range: (s_min, s_max),
            samples: n_samples,
            h1_ok,
            beta_prime_min,
            ratio_min,
            ratio_max,
            a_declared,
            a_lower,
            a_h2_ok,
            h3_min,
            h3_ok,
            m_used,
            sm_constant,
            sm_ok,
            persistence_abar: ratio_min - 1.0,
        })
    }
}

/// Sampled structural constants. All values are infima/suprema over the
/// sampled range only.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub range: (f64, f64),
    pub samples: usize,
    pub h1_ok: bool,
    pub beta_prime_min: f64,
    /// Extremes of `s Phi'(s) / Phi(s)`.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub a_declared: f64,
    /// `inf Phi / (s Phi')`.
    pub a_lower: f64,
    pub a_h2_ok: bool,
    /// `inf s Phi'' / Phi'`.
    pub h3_min: f64,
    pub h3_ok: bool,
    pub m_used: f64,
    /// `inf Psi(s) / Phi(s)^((m+1)/m)`, equivalently `inf f(r) / r^((m+1)/m)`.
    pub sm_constant: f64,
    pub sm_ok: bool,
    /// `inf s Phi'/Phi - 1`; positive values give support persistence.
    pub persistence_abar: f64,
}

impl StructureReport {
    pub fn all_ok(&self) -> bool {
        self.h1_ok && self.a_h2_ok && self.h3_ok && self.sm_ok
    }

    /// CSV with columns `property, range_lo, range_hi, value, pass`.
    pub fn to_csv(&self) -> String {
        let rows: [(&str, f64, bool); 8] = [
            ("H1_beta_prime_min", self.beta_prime_min, self.h1_ok),
            ("H2_ratio_min", self.ratio_min, self.ratio_min >= 1.0 - STRUCTURE_SLACK),
            ("H2_ratio_max", self.ratio_max, self.a_h2_ok),
            ("H2_a_lower", self.a_lower, self.a_h2_ok),
            ("H3_min", self.h3_min, self.h3_ok),
            ("Sm_m", self.m_used, self.m_used > 1.0),
            ("Sm_constant", self.sm_constant, self.sm_ok),
            ("persistence_abar", self.persistence_abar, self.persistence_abar > 0.0),
        ];
        let mut out = String::from("property,range_lo,range_hi,value,pass\n");
        for (name, value, pass) in rows {
            let _ = writeln!(
                out,
                "{name},{},{},{},{pass}",
                crate::fmt_f64(self.range.0),
                crate::fmt_f64(self.range.1),
                crate::fmt_f64(value)
            );
        }
        out
    }
}
