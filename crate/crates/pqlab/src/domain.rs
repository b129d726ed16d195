//! Shared domain types: exponent pairs, component domains, eigenpairs,
//! union models, and the exact dilation law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and caps shared across the solvers. All of these are plain
/// data; override fields as needed before passing a config down.
#[derive(Debug, Clone)]
pub struct Config {
    /// Absolute tolerance of the adaptive ODE integrator.
    pub ode_abs_tol: f64,
    /// Relative tolerance of the adaptive ODE integrator.
    pub ode_rel_tol: f64,
    /// Zero crossings are refined by bisection until |u| falls below this.
    pub zero_refine_tol: f64,
    /// Projected-gradient norm threshold for the variational minimizer.
    pub pg_norm_tol: f64,
    /// Objective decrease over 50 iterations below this declares convergence.
    pub objective_stall_tol: f64,
    /// Iteration cap for the variational minimizer.
    pub max_minimize_iters: usize,
    /// Relative tolerance for the bisection in mu (radial eigenvalues).
    pub mu_bisect_rel_tol: f64,
    /// Number of uniform samples in reported eigenfunction profiles.
    pub profile_points: usize,
    /// Relative tolerance for deduplicating enumerated spectrum values.
    /// Zero keeps everything except bitwise duplicates; the accumulation
    /// tables rely on distinguishing values a few ulp apart.
    pub dedup_rel_tol: f64,
    /// Cap on the number of selections visited by the spectrum enumeration.
    pub enumeration_budget: u64,
    /// Seed for the optional random restarts of the variational minimizer.
    pub restart_seed: u64,
    /// Number of random restarts (0 = deterministic sine start only).
    pub random_restarts: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            ode_abs_tol: 1e-13,
            ode_rel_tol: 1e-13,
            zero_refine_tol: 1e-10,
            pg_norm_tol: 1e-8,
            objective_stall_tol: 1e-12,
            max_minimize_iters: 200_000,
            mu_bisect_rel_tol: 1e-13,
            profile_points: 2048,
            dedup_rel_tol: 0.0,
            enumeration_budget: 10_000_000,
            restart_seed: 0,
            random_restarts: 0,
        }
    }
}

/// How the exponent pair is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMode {
    /// 1 < q < p, the regime of every structural result here.
    Strict,
    /// 1 < q = p, used only to validate the solvers against the classical
    /// p-Laplacian where closed forms exist.
    Calibration,
}

/// The exponent pair (p, q) with its validation mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    p: f64,
    q: f64,
    mode: ExponentMode,
}

impl Exponents {
    pub fn new(p: f64, q: f64, mode: ExponentMode) -> Result<Self> {
        let e = Exponents { p, q, mode };
        e.validate()?;
        Ok(e)
    }

    /// Strict-mode pair, requires 1 < q < p.
    pub fn strict(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, ExponentMode::Strict)
    }

    /// Calibration pair with q = p.
    pub fn calibration(p: f64) -> Result<Self> {
        Self::new(p, p, ExponentMode::Calibration)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.p.is_finite() || !self.q.is_finite() {
            return Err(Error::InvalidExponents("p and q must be finite".into()));
        }
        if self.q <= 1.0 {
            return Err(Error::InvalidExponents(format!("q = {} violates q > 1", self.q)));
        }
        match self.mode {
            ExponentMode::Strict => {
                if self.q >= self.p {
                    return Err(Error::InvalidExponents(format!(
                        "strict mode requires q < p, got q = {}, p = {}",
                        self.q, self.p
                    )));
                }
            }
            ExponentMode::Calibration => {
                if self.q != self.p {
                    return Err(Error::InvalidExponents(format!(
                        "calibration mode requires q = p, got q = {}, p = {}",
                        self.q, self.p
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mode(&self) -> ExponentMode {
        self.mode
    }

    pub fn is_calibration(&self) -> bool {
        self.mode == ExponentMode::Calibration
    }

    /// The exponent q/(p-q) governing the combination formula. Strict only.
    pub fn combination_exponent(&self) -> f64 {
        debug_assert!(self.mode == ExponentMode::Strict);
        self.q / (self.p - self.q)
    }
}

/// A connected component: an interval of given length or a ball of given
/// radius and dimension. Positions are deliberately not modeled; disjointness
/// of a union is an assumption, not data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ComponentDomain {
    Interval { length: f64 },
    Ball { radius: f64, dim: u32 },
}

impl ComponentDomain {
    pub fn interval(length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidDomain(format!("interval length {} must be > 0", length)));
        }
        Ok(ComponentDomain::Interval { length })
    }

    pub fn ball(radius: f64, dim: u32) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidDomain(format!("ball radius {} must be > 0", radius)));
        }
        if dim < 1 {
            return Err(Error::InvalidDomain("ball dimension must be >= 1".into()));
        }
        Ok(ComponentDomain::Ball { radius, dim })
    }

    /// Ambient dimension N; 1 for intervals.
    pub fn dim(&self) -> u32 {
        match self {
            ComponentDomain::Interval { .. } => 1,
            ComponentDomain::Ball { dim, .. } => *dim,
        }
    }

    /// Length of the 1D radial/axial parameterization used for profiles.
    pub fn extent(&self) -> f64 {
        match self {
            ComponentDomain::Interval { length } => *length,
            ComponentDomain::Ball { radius, .. } => *radius,
        }
    }

    /// The dilated domain t * Omega.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidScale(t));
        }
        Ok(match self {
            ComponentDomain::Interval { length } => ComponentDomain::Interval { length: length * t },
            ComponentDomain::Ball { radius, dim } => {
                ComponentDomain::Ball { radius: radius * t, dim: *dim }
            }
        })
    }
}

/// Which route produced an eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Shooting,
    Variational,
    ClosedForm,
    Rescaled,
}

/// One eigenvalue of one component, with its sampled eigenfunction profile.
///
/// The profile is sampled on a uniform grid over the component (the radial
/// coordinate for balls) and normalized to unit L^q norm under the grid's
/// trapezoid quadrature, including the r^{N-1} surface weight for balls.
#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub domain: ComponentDomain,
    pub exponents: Exponents,
    /// 1-based index; for 1D domains, index - 1 = number of interior zeros.
    pub index: usize,
    pub value: f64,
    pub profile: Vec<f64>,
    pub method: Method,
}

impl EigenPair {
    /// Uniform grid the profile is sampled on.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.profile.len();
        let ext = self.domain.extent();
        (0..n).map(|i| ext * i as f64 / (n - 1) as f64).collect()
    }
}

/// Geometric tail rule: radii r_i = r0 * rho^i continuing past the explicit
/// component list. Geometric decay makes the compactness condition automatic.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailRule {
    pub r0: f64,
    pub rho: f64,
    pub dim: u32,
}

impl TailRule {
    pub fn new(r0: f64, rho: f64, dim: u32) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidDomain(format!("tail r0 = {} must be > 0", r0)));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidDomain(format!("tail rho = {} must lie in (0,1)", rho)));
        }
        if dim < 1 {
            return Err(Error::InvalidDomain("tail dimension must be >= 1".into()));
        }
        Ok(TailRule { r0, rho, dim })
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.r0 * self.rho.powi(i as i32)
    }

    /// Ratio of consecutive compactness summands r_i^{pq/(p-q)+N}.
    pub fn summand_ratio(&self, exponents: &Exponents) -> f64 {
        self.rho.powf(compactness_exponent(exponents, self.dim))
    }
}

/// An ordered disjoint union of components, optionally continued by a
/// geometric tail of shrinking balls.
#[derive(Debug, Clone, Serialize)]
pub struct UnionModel {
    pub components: Vec<ComponentDomain>,
    pub tail_rule: Option<TailRule>,
    pub n_max: usize,
}

impl UnionModel {
    pub fn finite(components: Vec<ComponentDomain>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidDomain("union needs at least one component".into()));
        }
        let n_max = components.len();
        Ok(UnionModel { components, tail_rule: None, n_max })
    }

    pub fn with_tail(tail: TailRule, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidDomain("truncation n_max must be >= 1".into()));
        }
        let components = (0..n_max)
            .map(|i| ComponentDomain::ball(tail.radius(i), tail.dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(UnionModel { components, tail_rule: Some(tail), n_max })
    }
}

/// Exponent of the dilation law: eigenvalues of t * Omega are those of Omega
/// times t^{N - p - Np/q}.
pub fn dilation_exponent(exponents: &Exponents, dim: u32) -> f64 {
    let n = dim as f64;
    n - exponents.p() - n * exponents.p() / exponents.q()
}

/// Exponent of the compactness summand r_i^{pq/(p-q) + N}. Strict mode only.
pub fn compactness_exponent(exponents: &Exponents, dim: u32) -> f64 {
    let (p, q) = (exponents.p(), exponents.q());
    p * q / (p - q) + dim as f64
}

/// Eigenvalue of the dilated domain t * Omega under the dilation law.
pub fn scale_eigenvalue_with(
    exponents: &Exponents,
    lambda: f64,
    domain: &ComponentDomain,
    t: f64,
) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidScale(t));
    }
    Ok(lambda * t.powf(dilation_exponent(exponents, domain.dim())))
}

/// Trapezoid L^q norm of samples on a uniform grid of spacing h, with an
/// optional power weight x^{N-1} (surface measure factor for radial profiles;
/// `weight` carries the unit-sphere area already multiplied in).
pub fn trapezoid_lq_norm(values: &[f64], grid: &[f64], q: f64, weight_dim: u32, sphere_area: f64) -> f64 {
    debug_assert_eq!(values.len(), grid.len());
    let n = values.len();
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let h = grid[i + 1] - grid[i];
        let f0 = integrand_q(values[i], grid[i], q, weight_dim);
        let f1 = integrand_q(values[i + 1], grid[i + 1], q, weight_dim);
        acc += 0.5 * h * (f0 + f1);
    }
    (sphere_area * acc).powf(1.0 / q)
}

fn integrand_q(u: f64, x: f64, q: f64, weight_dim: u32) -> f64 {
    let w = if weight_dim > 1 { x.powi(weight_dim as i32 - 1) } else { 1.0 };
    u.abs().powf(q) * w
}

/// Surface area of the unit sphere in R^N (2 for N = 1).
pub fn unit_sphere_area(dim: u32) -> f64 {
    let n = dim as f64;
    2.0 * std::f64::consts::PI.powf(n / 2.0) / statrs::function::gamma::gamma(n / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_rejects_q_equal_p() {
        assert!(matches!(
            Exponents::new(2.0, 2.0, ExponentMode::Strict),
            Err(Error::InvalidExponents(_))
        ));
    }

    #[test]
    fn strict_accepts_ordered_pair() {
        assert!(Exponents::strict(3.0, 2.0).is_ok());
    }

    #[test]
    fn calibration_accepts_equal_pair() {
        assert!(Exponents::new(2.0, 2.0, ExponentMode::Calibration).is_ok());
    }

    #[test]
    fn calibration_rejects_distinct_pair() {
        assert!(Exponents::new(3.0, 2.0, ExponentMode::Calibration).is_err());
    }

    #[test]
    fn q_below_one_rejected() {
        assert!(Exponents::strict(2.0, 0.5).is_err());
    }

    #[test]
    fn scale_identity() {
        let e = Exponents::strict(3.0, 2.0).unwrap();
        let d = ComponentDomain::interval(1.0).unwrap();
        let lam = 35.0;
        assert_eq!(scale_eigenvalue_with(&e, lam, &d, 1.0).unwrap(), lam);
    }

    #[test]
    fn scale_classical_laplacian() {
        // N = 1, p = q = 2, t = 2 halves the frequency twice: lambda / 4.
        let e = Exponents::calibration(2.0).unwrap();
        let d = ComponentDomain::interval(1.0).unwrap();
        let scaled = scale_eigenvalue_with(&e, 1.0, &d, 2.0).unwrap();
        assert!((scaled - 0.25).abs() < 1e-15);
    }

    #[test]
    fn scale_rejects_nonpositive_t() {
        let e = Exponents::strict(3.0, 2.0).unwrap();
        let d = ComponentDomain::interval(1.0).unwrap();
        assert!(matches!(scale_eigenvalue_with(&e, 1.0, &d, 0.0), Err(Error::InvalidScale(_))));
        assert!(matches!(scale_eigenvalue_with(&e, 1.0, &d, -2.0), Err(Error::InvalidScale(_))));
    }

    #[test]
    fn compactness_exponent_matches_hand_value() {
        // p = 3, q = 2, N = 1: pq/(p-q) + N = 6 + 1 = 7.
        let e = Exponents::strict(3.0, 2.0).unwrap();
        assert!((compactness_exponent(&e, 1) - 7.0).abs() < 1e-15);
    }

    #[test]
    fn unit_sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((unit_sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn tail_rule_guards_rho() {
        assert!(TailRule::new(0.5, 1.0, 1).is_err());
        assert!(TailRule::new(0.5, 0.5, 1).is_ok());
    }
}
