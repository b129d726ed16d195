//! Shooting solver for the eigenvalue sequence of a single interval or ball.
//!
//! The second-order equation is integrated as a first-order system in the
//! flux variable w = |u'|^{p-2} u', which stays smooth where the raw second
//! derivative degenerates (p != 2). A third state component accumulates the
//! L^q mass, so nodal-segment norms come out of the same integration.
//!
//! For intervals a single reference integration with mu = 1 suffices: the
//! two-parameter rescaling u -> A u(Bx) with A^{p-q} B^p = 1 maps it onto any
//! length and any eigenvalue index. Balls of dimension N >= 2 are solved by
//! bisection in the trial eigenvalue, counting interior zeros.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::domain::{
    trapezoid_lq_norm, unit_sphere_area, ComponentDomain, Config, EigenPair, Exponents, Method,
};
use crate::error::{Error, Result};
use crate::ode::{bisect_zero, DenseStep, Dopri5, State, Trajectory};

/// Geometry of the reduced 1D problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    Line,
    Radial(u32),
}

/// Result of one shooting integration.
#[derive(Debug, Clone)]
pub struct ShootingSolution {
    pub exponents: Exponents,
    pub geometry: Geometry,
    pub mu: f64,
    pub trajectory: Trajectory,
    /// Refined positions of the sign changes of u, in increasing order.
    pub zeros: Vec<f64>,
    /// Integral of |u|^q (times r^{N-1} in the radial case) over each nodal
    /// segment, segment j ending at zeros[j].
    pub segment_q_norms: Vec<f64>,
    /// Start of the integration (0 for the line, a small offset for radial).
    pub x_start: f64,
    start_state: State,
}

impl ShootingSolution {
    /// (u, w, accumulated q-mass) at x, falling back to the series start
    /// below the first grid point.
    pub fn eval(&self, x: f64) -> State {
        if x <= self.x_start {
            return self.start_state;
        }
        self.trajectory.eval(x)
    }

    pub fn u(&self, x: f64) -> f64 {
        self.eval(x)[0]
    }

    /// Accumulated integral of the q-integrand from the start up to x.
    pub fn q_mass(&self, x: f64) -> f64 {
        self.eval(x)[2]
    }

    /// Conserved energy E = (p-1)/p |u'|^p + mu |u|^q / q (line case).
    pub fn energy(&self, x: f64) -> f64 {
        let p = self.exponents.p();
        let q = self.exponents.q();
        let s = self.eval(x);
        let du_p = s[1].abs().powf(p / (p - 1.0));
        (p - 1.0) / p * du_p + self.mu * s[0].abs().powf(q) / q
    }

    /// Maximum relative deviation of the energy over `samples` points.
    pub fn energy_deviation(&self, samples: usize) -> f64 {
        let e0 = self.energy(self.x_start);
        let x1 = self.trajectory.x_end;
        let mut dev: f64 = 0.0;
        for i in 0..=samples {
            let x = self.x_start + (x1 - self.x_start) * i as f64 / samples as f64;
            dev = dev.max((self.energy(x) - e0).abs() / e0);
        }
        dev
    }

    /// Number of zeros strictly inside (0, x_cut).
    pub fn zeros_before(&self, x_cut: f64) -> usize {
        self.zeros.iter().filter(|z| **z < x_cut).count()
    }
}

fn line_rhs(exponents: &Exponents, mu: f64) -> impl Fn(f64, &State) -> State {
    let p = exponents.p();
    let q = exponents.q();
    let inv = 1.0 / (p - 1.0);
    move |_x, y| {
        let du = y[1].abs().powf(inv).copysign(y[1]);
        let f = y[0].abs().powf(q - 1.0).copysign(y[0]);
        [du, -mu * f, y[0].abs().powf(q)]
    }
}

fn radial_rhs(exponents: &Exponents, dim: u32, mu: f64) -> impl Fn(f64, &State) -> State {
    let p = exponents.p();
    let q = exponents.q();
    let inv = 1.0 / (p - 1.0);
    let nm1 = (dim - 1) as f64;
    move |r, y| {
        let du = y[1].abs().powf(inv).copysign(y[1]);
        let f = y[0].abs().powf(q - 1.0).copysign(y[0]);
        [du, -nm1 / r * y[1] - mu * f, y[0].abs().powf(q) * r.powf(nm1)]
    }
}

/// Integrate the shooting ODE until `target_zeros` sign changes of u have
/// been bracketed and refined, or until x_max when a horizon is given.
fn shoot(
    exponents: &Exponents,
    geometry: Geometry,
    mu: f64,
    target_zeros: usize,
    x_max: Option<f64>,
    cfg: &Config,
) -> Result<ShootingSolution> {
    let p = exponents.p();
    let ode = Dopri5::new(cfg.ode_abs_tol, cfg.ode_rel_tol);

    let (x0, y0): (f64, State) = match geometry {
        Geometry::Line => (0.0, [0.0, 1.0, 0.0]),
        Geometry::Radial(dim) => {
            // Regular-singular start: u ~ 1 - c r^{p'} with the constant fixed
            // by balancing leading orders of (r^{N-1} w)' = -mu r^{N-1} u^{q-1}.
            let n = dim as f64;
            let scale = x_max.expect("radial shoot needs a horizon");
            let r0 = 1e-6 * scale;
            let pprime = p / (p - 1.0);
            let c = (p - 1.0) / p * (mu / n).powf(1.0 / (p - 1.0));
            let u0 = 1.0 - c * r0.powf(pprime);
            let w0 = -mu * r0 / n;
            let m0 = r0.powf(n) / n;
            (r0, [u0, w0, m0])
        }
    };

    // Horizon: the line solution is periodic with half-period of order one
    // for mu = 1; a generous multiple of the zero target bounds the search.
    let horizon = x_max.unwrap_or(20.0 * (target_zeros as f64 + 1.0).max(10.0));

    let mut zeros: Vec<f64> = Vec::new();
    let mut segment_q_norms: Vec<f64> = Vec::new();
    let mut last_mass = y0[2];
    let mut prev = (x0, y0[0]);
    let tol = cfg.zero_refine_tol;

    let result = match geometry {
        Geometry::Line => ode.integrate(line_rhs(exponents, mu), x0, y0, horizon, |step| {
            scan_step(step, &mut prev, &mut zeros, &mut segment_q_norms, &mut last_mass, tol);
            target_zeros > 0 && zeros.len() >= target_zeros
        }),
        Geometry::Radial(dim) => {
            ode.integrate(radial_rhs(exponents, dim, mu), x0, y0, horizon, |step| {
                scan_step(step, &mut prev, &mut zeros, &mut segment_q_norms, &mut last_mass, tol);
                target_zeros > 0 && zeros.len() >= target_zeros
            })
        }
    };
    let trajectory = result?;

    if target_zeros > 0 && zeros.len() < target_zeros {
        return Err(Error::NoZeroFound { horizon, found: zeros.len(), wanted: target_zeros });
    }

    Ok(ShootingSolution {
        exponents: *exponents,
        geometry,
        mu,
        trajectory,
        zeros,
        segment_q_norms,
        x_start: x0,
        start_state: y0,
    })
}

/// Check one accepted step for sign changes of u, refining each by bisection
/// on the dense output. Subdivides the step so closely spaced zeros are not
/// skipped.
fn scan_step(
    step: &DenseStep,
    prev: &mut (f64, f64),
    zeros: &mut Vec<f64>,
    segment_q_norms: &mut Vec<f64>,
    last_mass: &mut f64,
    tol: f64,
) {
    const SUBS: usize = 8;
    let mut xa = prev.0.max(step.x0);
    let mut ua = prev.1;
    for j in 1..=SUBS {
        let xb = step.x0 + step.h * j as f64 / SUBS as f64;
        let ub = step.eval(xb)[0];
        let crossed = (ua > 0.0 && ub <= 0.0) || (ua < 0.0 && ub >= 0.0);
        if crossed {
            let z = bisect_zero(step, 0, xa, xb, tol);
            let mass = step.eval(z)[2];
            zeros.push(z);
            segment_q_norms.push(mass - *last_mass);
            *last_mass = mass;
        }
        xa = xb;
        ua = ub;
    }
    *prev = (xa, ua);
}

type CacheKey = (u64, u64, Geometry);
type Cache = Mutex<HashMap<CacheKey, Arc<ShootingSolution>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Reference integration with mu = 1, memoized per (p, q, geometry). The
/// cached solution is extended transparently when more zeros are requested.
pub fn reference_shoot(
    exponents: &Exponents,
    geometry: Geometry,
    min_zeros: usize,
    cfg: &Config,
) -> Result<Arc<ShootingSolution>> {
    exponents.validate()?;
    let key = (exponents.p().to_bits(), exponents.q().to_bits(), geometry);
    {
        let guard = cache().lock().unwrap();
        if let Some(sol) = guard.get(&key) {
            if sol.zeros.len() >= min_zeros {
                return Ok(Arc::clone(sol));
            }
        }
    }
    let x_max = match geometry {
        Geometry::Line => None,
        Geometry::Radial(_) => Some(50.0 * (min_zeros as f64 + 1.0)),
    };
    let sol = Arc::new(shoot(exponents, geometry, 1.0, min_zeros.max(1), x_max, cfg)?);
    cache().lock().unwrap().insert(key, Arc::clone(&sol));
    Ok(sol)
}

/// Half-period pi_p of the p-sine: the first eigenvalue of the classical
/// 1D p-Laplacian on (0, L) is (k pi_p / L)^p.
pub fn pi_p(p: f64) -> f64 {
    use std::f64::consts::PI;
    2.0 * PI * (p - 1.0).powf(1.0 / p) / (p * (PI / p).sin())
}

/// k-th eigenvalue and profile of the interval (0, L).
pub fn interval_eigenvalue(exponents: &Exponents, length: f64, k: usize, cfg: &Config) -> Result<EigenPair> {
    exponents.validate()?;
    if !(length > 0.0) {
        return Err(Error::InvalidDomain(format!("interval length {} must be > 0", length)));
    }
    if k < 1 {
        return Err(Error::InvalidDomain("eigenvalue index k must be >= 1".into()));
    }
    let p = exponents.p();
    let q = exponents.q();
    let reference = reference_shoot(exponents, Geometry::Line, k, cfg)?;
    let z_k = reference.zeros[k - 1];
    let scale_b = z_k / length;

    let (lambda, amp) = if exponents.is_calibration() {
        // q = p: the L^q factor is trivial and lambda = B^p independent of
        // amplitude; the profile is normalized after sampling either way.
        (scale_b.powf(p), 1.0)
    } else {
        let amp = scale_b.powf(-p / (p - q));
        let i_k: f64 = reference.segment_q_norms[..k].iter().sum();
        let norm_q_pow_q = amp.powf(q) / scale_b * i_k;
        (norm_q_pow_q.powf((q - p) / q), amp)
    };

    let n = cfg.profile_points;
    let mut profile: Vec<f64> = (0..n)
        .map(|i| {
            let x = length * i as f64 / (n - 1) as f64;
            amp * reference.u((scale_b * x).min(z_k))
        })
        .collect();
    normalize_profile(&mut profile, length, q, 1, 1.0);

    Ok(EigenPair {
        domain: ComponentDomain::Interval { length },
        exponents: *exponents,
        index: k,
        value: lambda,
        profile,
        method: Method::Shooting,
    })
}

fn normalize_profile(profile: &mut [f64], extent: f64, q: f64, weight_dim: u32, sphere_area: f64) {
    let n = profile.len();
    let grid: Vec<f64> = (0..n).map(|i| extent * i as f64 / (n - 1) as f64).collect();
    let norm = trapezoid_lq_norm(profile, &grid, q, weight_dim, sphere_area);
    // Canonical representative: positive near the left/center.
    let sign = profile
        .iter()
        .find(|v| v.abs() > 1e-12)
        .map(|v| v.signum())
        .unwrap_or(1.0);
    for v in profile.iter_mut() {
        *v *= sign / norm;
    }
}

/// k-th radial eigenvalue of the N-ball of radius r. N = 1 reduces to the
/// interval of length 2r.
pub fn ball_eigenvalue_radial(
    exponents: &Exponents,
    radius: f64,
    dim: u32,
    k: usize,
    cfg: &Config,
) -> Result<EigenPair> {
    exponents.validate()?;
    if dim < 1 {
        return Err(Error::InvalidDomain("ball dimension must be >= 1".into()));
    }
    if dim == 1 {
        return interval_eigenvalue(exponents, 2.0 * radius, k, cfg);
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidDomain(format!("ball radius {} must be > 0", radius)));
    }
    if k < 1 {
        return Err(Error::InvalidDomain("eigenvalue index k must be >= 1".into()));
    }

    let p = exponents.p();
    let q = exponents.q();
    let geometry = Geometry::Radial(dim);
    let count = |mu: f64| -> Result<usize> {
        let sol = shoot(exponents, geometry, mu, 0, Some(radius), cfg)?;
        Ok(sol.zeros_before(radius * (1.0 - 1e-12)))
    };

    // Geometric sweep to bracket the k-th radial eigenvalue, then bisection;
    // the interior zero count is monotone in mu.
    let mut mu_lo = 1.0;
    let mut guard = 0;
    while count(mu_lo)? >= k {
        mu_lo *= 0.25;
        guard += 1;
        if guard > 200 {
            return Err(Error::BracketFailure { mu_lo, mu_hi: 1.0 });
        }
    }
    let mut mu_hi = mu_lo;
    guard = 0;
    while count(mu_hi)? < k {
        mu_hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::BracketFailure { mu_lo, mu_hi });
        }
    }
    while (mu_hi - mu_lo) / mu_hi > cfg.mu_bisect_rel_tol {
        let mid = 0.5 * (mu_lo + mu_hi);
        if count(mid)? < k {
            mu_lo = mid;
        } else {
            mu_hi = mid;
        }
    }
    let mu = 0.5 * (mu_lo + mu_hi);

    let sol = shoot(exponents, geometry, mu, 0, Some(radius), cfg)?;
    let area = unit_sphere_area(dim);
    let mass = sol.q_mass(radius);
    let norm_q = (area * mass).powf(1.0 / q);
    let lambda = if exponents.is_calibration() { mu } else { mu * norm_q.powf(q - p) };

    let n = cfg.profile_points;
    let pprime = p / (p - 1.0);
    let c = (p - 1.0) / p * (mu / dim as f64).powf(1.0 / (p - 1.0));
    let mut profile: Vec<f64> = (0..n)
        .map(|i| {
            let s = radius * i as f64 / (n - 1) as f64;
            if s <= sol.x_start {
                1.0 - c * s.powf(pprime)
            } else {
                sol.u(s)
            }
        })
        .collect();
    normalize_profile(&mut profile, radius, q, dim, area);

    Ok(EigenPair {
        domain: ComponentDomain::Ball { radius, dim },
        exponents: *exponents,
        index: k,
        value: lambda,
        profile,
        method: Method::Shooting,
    })
}

/// Dispatch on the component kind.
pub fn component_eigenvalue(
    exponents: &Exponents,
    domain: &ComponentDomain,
    k: usize,
    cfg: &Config,
) -> Result<EigenPair> {
    match domain {
        ComponentDomain::Interval { length } => interval_eigenvalue(exponents, *length, k, cfg),
        ComponentDomain::Ball { radius, dim } => {
            ball_eigenvalue_radial(exponents, *radius, *dim, k, cfg)
        }
    }
}
