//! Independent verification path: direct discretized minimization of the
//! Rayleigh-type quotient on an interval, plus residual checks of candidate
//! eigenpairs against the discrete operator.
//!
//! Nothing here touches the shooting machinery; agreement between the two
//! routes is what the cross-validation tests assert.

use serde::Serialize;

use crate::domain::{Config, Exponents};
use crate::error::{Error, Result};

/// Samples of a function on a uniform grid over [0, L] with zero boundary
/// values; only the M interior values are stored.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteProfile {
    pub length: f64,
    pub interior: Vec<f64>,
}

impl DiscreteProfile {
    pub fn grid_spacing(&self) -> f64 {
        self.length / (self.interior.len() as f64 + 1.0)
    }

    /// Trapezoid L^q norm; boundary values vanish so only interior nodes
    /// contribute, each with weight h.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let h = self.grid_spacing();
        let s: f64 = self.interior.iter().map(|u| u.abs().powf(q)).sum();
        (h * s).powf(1.0 / q)
    }

    /// Exact projection to the L^q unit sphere by scalar rescaling.
    pub fn project(&mut self, q: f64) {
        let n = self.lq_norm(q);
        for u in &mut self.interior {
            *u /= n;
        }
    }
}

/// Dirichlet p-energy of the forward differences: sum_j h |du/h|^p over the
/// M+1 cells, with the boundary zeros included as cell endpoints.
fn p_energy(profile: &[f64], h: f64, p: f64) -> f64 {
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &u in profile {
        acc += ((u - prev) / h).abs().powf(p);
        prev = u;
    }
    acc += (prev / h).abs().powf(p);
    acc * h
}

/// Gradient of the p-energy. At cells with zero difference the subgradient 0
/// is used; those form a measure-zero set and do not disturb descent.
fn p_energy_gradient(profile: &[f64], h: f64, p: f64, grad: &mut [f64]) {
    let m = profile.len();
    let flux = |d: f64| d.abs().powf(p - 1.0).copysign(d);
    let mut d_prev = flux(profile[0] / h);
    for j in 0..m {
        let d_next = flux(((if j + 1 < m { profile[j + 1] } else { 0.0 }) - profile[j]) / h);
        grad[j] = p * (d_prev - d_next);
        d_prev = d_next;
    }
}

/// Minimize the discretized Dirichlet p-energy over the discrete L^q unit
/// sphere by spectral projected gradient descent with backtracking, starting
/// from the projected sine bump. Returns the converged objective (the first
/// eigenvalue estimate) and the positive minimizer.
pub fn minimize_first(
    exponents: &Exponents,
    length: f64,
    m: usize,
    cfg: &Config,
) -> Result<(f64, DiscreteProfile)> {
    exponents.validate()?;
    if m < 64 {
        return Err(Error::InvalidInput(format!("grid size M = {} must be >= 64", m)));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidDomain(format!("interval length {} must be > 0", length)));
    }
    let init: Vec<f64> = (1..=m)
        .map(|j| (std::f64::consts::PI * j as f64 / (m as f64 + 1.0)).sin())
        .collect();
    let (value, profile) = minimize_from(exponents, length, init, cfg)?;

    let mut best = (value, profile);
    if cfg.random_restarts > 0 {
        // Deterministic low-cost restarts from perturbed sine bumps; a simple
        // LCG keeps the dependency surface flat and the seed reproducible.
        let mut state = cfg.restart_seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        for _ in 0..cfg.random_restarts {
            let init: Vec<f64> = (1..=m)
                .map(|j| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let noise = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                    (std::f64::consts::PI * j as f64 / (m as f64 + 1.0)).sin() + 0.3 * noise
                })
                .collect();
            if let Ok((v, p)) = minimize_from(exponents, length, init, cfg) {
                if v < best.0 {
                    best = (v, p);
                }
            }
        }
    }
    Ok(best)
}

fn minimize_from(
    exponents: &Exponents,
    length: f64,
    init: Vec<f64>,
    cfg: &Config,
) -> Result<(f64, DiscreteProfile)> {
    let p = exponents.p();
    let q = exponents.q();
    let m = init.len();
    let h = length / (m as f64 + 1.0);

    let mut u = DiscreteProfile { length, interior: init };
    u.project(q);

    let mut grad = vec![0.0; m];
    let mut grad_tan = vec![0.0; m];
    let mut obj = p_energy(&u.interior, h, p);
    let mut history = std::collections::VecDeque::with_capacity(51);

    for iter in 0..cfg.max_minimize_iters {
        p_energy_gradient(&u.interior, h, p, &mut grad);

        // Tangent projection: remove the component along the constraint
        // normal n_j = q h |u_j|^{q-2} u_j.
        let mut gn = 0.0;
        let mut nn = 0.0;
        for j in 0..m {
            let n_j = q * h * u.interior[j].abs().powf(q - 1.0).copysign(u.interior[j]);
            gn += grad[j] * n_j;
            nn += n_j * n_j;
        }
        let factor = if nn > 0.0 { gn / nn } else { 0.0 };
        for j in 0..m {
            let n_j = q * h * u.interior[j].abs().powf(q - 1.0).copysign(u.interior[j]);
            grad_tan[j] = grad[j] - factor * n_j;
        }
        // Scale to the L2 norm of the functional gradient (entries are O(h)).
        let pg_norm = (grad_tan.iter().map(|g| g * g).sum::<f64>() / h).sqrt();

        history.push_back(obj);
        if history.len() > 51 {
            history.pop_front();
        }
        // For p > 2 the discrete Hessian degenerates at nodes where the
        // difference quotient vanishes, so the projected-gradient norm floors
        // orders of magnitude above zero while the objective is converged to
        // rounding level. Either signal terminates.
        let stalled = history.len() == 51
            && (history.front().unwrap() - obj).abs() < cfg.objective_stall_tol * obj.max(1.0);
        if pg_norm < cfg.pg_norm_tol || stalled {
            let positive = canonical_positive(u);
            return Ok((obj, positive));
        }

        // Newton-type direction: solve K z = g_tan with K the tridiagonal
        // linearization of the discrete p-Laplacian at the current iterate,
        // K = (p/h) tridiag(-c_j, c_{j-1}+c_j, -c_j), c = (p-1)|d|^{p-2}.
        // The cell weights degenerate (p > 2) or blow up (p < 2) where the
        // difference quotient vanishes; clamping them keeps K well
        // conditioned without changing the stationary points. Iteration
        // counts stay flat in M, unlike plain gradient steps.
        let mut d_prev = u.interior[0] / h;
        let mut s0 = d_prev.abs();
        for j in 0..m {
            let d = ((if j + 1 < m { u.interior[j + 1] } else { 0.0 }) - u.interior[j]) / h;
            s0 = s0.max(d.abs());
        }
        let c_ref = (p - 1.0) * s0.powf(p - 2.0);
        let cell = |d: f64| ((p - 1.0) * d.abs().powf(p - 2.0)).clamp(1e-8 * c_ref, 1e8 * c_ref);
        // Thomas solve, accumulating the factorization in place.
        let mut diag = vec![0.0; m];
        let mut rhs = grad_tan.clone();
        let mut c_prev = cell(d_prev);
        let mut off = vec![0.0; m];
        for j in 0..m {
            let d = ((if j + 1 < m { u.interior[j + 1] } else { 0.0 }) - u.interior[j]) / h;
            let c_next = cell(d);
            diag[j] = p / h * (c_prev + c_next);
            off[j] = -p / h * c_next;
            c_prev = c_next;
            d_prev = d;
        }
        let _ = d_prev;
        for j in 1..m {
            let w = off[j - 1] / diag[j - 1];
            diag[j] -= w * off[j - 1];
            rhs[j] -= w * rhs[j - 1];
        }
        let mut z = vec![0.0; m];
        z[m - 1] = rhs[m - 1] / diag[m - 1];
        for j in (0..m - 1).rev() {
            z[j] = (rhs[j] - off[j] * z[j + 1]) / diag[j];
        }

        // Non-monotone backtracking (Grippo look-back over the recent
        // objectives) on the projected trial point; monotone tests reject
        // useful steps near the minimizer.
        let f_ref = history.iter().copied().fold(obj, f64::max);
        let mut t = 1.0;
        let gz: f64 = grad_tan.iter().zip(&z).map(|(g, zi)| g * zi).sum::<f64>().max(0.0);
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial = u.clone();
            for j in 0..m {
                trial.interior[j] -= t * z[j];
            }
            trial.project(q);
            let trial_obj = p_energy(&trial.interior, h, p);
            if trial_obj <= f_ref - 1e-4 * t * gz {
                u = trial;
                obj = trial_obj;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Line search exhausted: the objective cannot be decreased below
            // the recent window even by tiny steps, i.e. numerical
            // stationarity. Reject only if the run is still far from flat.
            if history.len() == 51
                && (history.front().unwrap() - obj).abs() < 1e6 * cfg.objective_stall_tol * obj.max(1.0)
            {
                let positive = canonical_positive(u);
                return Ok((obj, positive));
            }
            return Err(Error::NoConvergence { iterations: iter });
        }
    }
    Err(Error::NoConvergence { iterations: cfg.max_minimize_iters })
}

/// The energy is even in u; return the positive representative.
fn canonical_positive(mut u: DiscreteProfile) -> DiscreteProfile {
    let sum: f64 = u.interior.iter().sum();
    if sum < 0.0 {
        for v in &mut u.interior {
            *v = -*v;
        }
    }
    u
}

/// Linear interpolation of interior samples (zero boundary) onto a grid of
/// `m` interior points over the same length.
fn interpolate_interior(coarse: &DiscreteProfile, m: usize) -> Vec<f64> {
    let mc = coarse.interior.len();
    (1..=m)
        .map(|j| {
            let s = j as f64 / (m as f64 + 1.0) * (mc as f64 + 1.0);
            let i = (s.floor() as usize).min(mc);
            let frac = s - i as f64;
            let u0 = if i == 0 { 0.0 } else { coarse.interior[i - 1] };
            let u1 = if i >= mc { 0.0 } else { coarse.interior[i] };
            u0 + frac * (u1 - u0)
        })
        .collect()
}

/// Discrete residual of a candidate eigenpair under the three-point discrete
/// p-Laplacian, measured in the h-weighted l2 norm. The global L^q norm
/// entering the equation defaults to the profile's own norm; for combined
/// eigenfunctions checked per component, pass the norm of the full union
/// function via [`residual_with_norm`].
pub fn residual(exponents: &Exponents, lambda: f64, profile: &DiscreteProfile) -> f64 {
    residual_with_norm(exponents, lambda, profile, profile.lq_norm(exponents.q()))
}

pub fn residual_with_norm(
    exponents: &Exponents,
    lambda: f64,
    profile: &DiscreteProfile,
    global_lq_norm: f64,
) -> f64 {
    residual_masked(exponents, lambda, profile, global_lq_norm, 0.0)
}

/// Residual restricted to nodes whose neighboring difference quotients stay
/// above `slope_cut` times the largest one. The p-Laplacian degenerates at
/// critical points of u (for p != 2 the eigenfunction is not C^2 there), so
/// the three-point scheme carries an O(1) defect on the O(h) neighborhood of
/// each peak and the full-domain residual decays only like sqrt(h). Away
/// from the degeneracy the scheme is second order; pass a fixed cut
/// (e.g. 0.1) to measure that.
pub fn residual_masked(
    exponents: &Exponents,
    lambda: f64,
    profile: &DiscreteProfile,
    global_lq_norm: f64,
    slope_cut: f64,
) -> f64 {
    let p = exponents.p();
    let q = exponents.q();
    let h = profile.grid_spacing();
    let m = profile.interior.len();
    let flux = |d: f64| d.abs().powf(p - 1.0).copysign(d);
    let nf = global_lq_norm.powf(p - q);
    let diff = |j: usize| {
        // Difference quotient of cell j (between nodes j-1 and j, with the
        // boundary zeros at each end).
        let right = if j < m { profile.interior[j] } else { 0.0 };
        let left = if j > 0 { profile.interior[j - 1] } else { 0.0 };
        (right - left) / h
    };
    let d_max = (0..=m).map(|j| diff(j).abs()).fold(0.0f64, f64::max);
    let cut = slope_cut * d_max;
    let mut acc = 0.0;
    for j in 0..m {
        let d_left = diff(j);
        let d_right = diff(j + 1);
        if d_left.abs() < cut || d_right.abs() < cut {
            continue;
        }
        let u = profile.interior[j];
        let lap = (flux(d_right) - flux(d_left)) / h;
        let rhs = lambda * nf * u.abs().powf(q - 1.0).copysign(u);
        let r = -lap - rhs;
        acc += h * r * r;
    }
    acc.sqrt()
}

/// Richardson extrapolation of minimize_first over a ladder of grid sizes.
/// Estimates the convergence order from the last three values and
/// extrapolates the finest pair. Returns (extrapolated lambda, order).
pub fn richardson_first(
    exponents: &Exponents,
    length: f64,
    grid_sizes: &[usize],
    cfg: &Config,
) -> Result<(f64, f64)> {
    if grid_sizes.len() < 3 {
        return Err(Error::InvalidInput("need at least three grid sizes".into()));
    }
    // Ladder with warm starts: each grid begins from the interpolated coarser
    // minimizer. Cold starts on fine grids cost iterations roughly like M^2;
    // warm starts leave only high-frequency error, which the BB iteration
    // removes quickly.
    let mut values = Vec::with_capacity(grid_sizes.len());
    let mut prev: Option<DiscreteProfile> = None;
    for &m in grid_sizes {
        let (v, profile) = match &prev {
            None => minimize_first(exponents, length, m, cfg)?,
            Some(coarse) => {
                minimize_from(exponents, length, interpolate_interior(coarse, m), cfg)?
            }
        };
        values.push(v);
        prev = Some(profile);
    }
    let n = values.len();
    let (v1, v2, v3) = (values[n - 3], values[n - 2], values[n - 1]);
    let ratio = (v1 - v2) / (v2 - v3);
    let order = if ratio > 1.0 { ratio.log2() } else { 2.0 };
    let factor = 2.0f64.powf(order) - 1.0;
    Ok((v3 + (v3 - v2) / factor, order))
}
