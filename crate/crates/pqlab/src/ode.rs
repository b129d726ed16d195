//! Adaptive Dormand-Prince 5(4) integrator with dense output.
//!
//! The state dimension is fixed at 3: the solvers integrate (u, w, accumulated
//! L^q mass) as one system. Dense output uses the standard quartic continuous
//! extension, which is what the zero refinement bisects on.

use crate::error::{Error, Result};

pub const DIM: usize = 3;
pub type State = [f64; DIM];

// Butcher tableau, Dormand & Prince (1980).
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// Error coefficients b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output coefficients (Hairer, Norsett & Wanner, DOPRI5).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// One accepted step with its dense-output polynomial.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub x0: f64,
    pub h: f64,
    rcont: [State; 5],
}

impl DenseStep {
    pub fn x1(&self) -> f64 {
        self.x0 + self.h
    }

    /// Evaluate the continuous extension at x in [x0, x0 + h].
    pub fn eval(&self, x: f64) -> State {
        let theta = (x - self.x0) / self.h;
        let th1 = 1.0 - theta;
        let mut y = [0.0; DIM];
        for i in 0..DIM {
            y[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + th1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + th1 * self.rcont[4][i])));
        }
        y
    }
}

/// A complete trajectory of accepted steps.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub steps: Vec<DenseStep>,
    pub x_end: f64,
    pub y_end: State,
}

impl Trajectory {
    /// Evaluate via binary search over steps; x clamped to the covered range.
    pub fn eval(&self, x: f64) -> State {
        let idx = self
            .steps
            .partition_point(|s| s.x1() < x)
            .min(self.steps.len() - 1);
        self.steps[idx].eval(x)
    }

    pub fn x_start(&self) -> f64 {
        self.steps.first().map(|s| s.x0).unwrap_or(self.x_end)
    }
}

pub struct Dopri5 {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Dopri5 { abs_tol, rel_tol, max_steps: 2_000_000 }
    }

    /// Integrate y' = f(x, y) from (x0, y0) until `stop` returns true for an
    /// accepted step or x reaches x_max. `stop` sees each accepted dense step.
    pub fn integrate<F, S>(
        &self,
        f: F,
        x0: f64,
        y0: State,
        x_max: f64,
        mut stop: S,
    ) -> Result<Trajectory>
    where
        F: Fn(f64, &State) -> State,
        S: FnMut(&DenseStep) -> bool,
    {
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        let mut h = self.initial_step(&f, x, &y, &k1, x_max - x0);
        let mut steps = Vec::new();
        let mut nsteps = 0usize;

        while x < x_max {
            if nsteps >= self.max_steps {
                return Err(Error::StepFailure(format!(
                    "step budget {} exhausted at x = {}",
                    self.max_steps, x
                )));
            }
            nsteps += 1;
            if x + h > x_max {
                h = x_max - x;
            }
            let (y_new, err, ks) = self.attempt(&f, x, &y, &k1, h);
            if err <= 1.0 {
                let step = self.dense_step(x, h, &y, &y_new, &ks);
                let k_next = ks[6];
                x += h;
                y = y_new;
                k1 = k_next;
                let done = stop(&step);
                steps.push(step);
                if done {
                    break;
                }
            }
            // Standard step-size controller with safety factor 0.9.
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h *= fac;
            if !h.is_finite() || h.abs() < 1e-300 {
                return Err(Error::StepFailure(format!("step size underflow at x = {}", x)));
            }
        }

        if steps.is_empty() {
            return Err(Error::StepFailure("no step accepted".into()));
        }
        Ok(Trajectory { steps, x_end: x, y_end: y })
    }

    fn attempt<F>(&self, f: &F, x: f64, y: &State, k1: &State, h: f64) -> (State, f64, [State; 7])
    where
        F: Fn(f64, &State) -> State,
    {
        let mut ks = [[0.0; DIM]; 7];
        ks[0] = *k1;
        let stage = |ks: &[State; 7], coeffs: &[f64]| -> State {
            let mut yt = *y;
            for i in 0..DIM {
                let mut acc = 0.0;
                for (j, a) in coeffs.iter().enumerate() {
                    acc += a * ks[j][i];
                }
                yt[i] += h * acc;
            }
            yt
        };
        ks[1] = f(x + C[1] * h, &stage(&ks, &A2));
        ks[2] = f(x + C[2] * h, &stage(&ks, &A3));
        ks[3] = f(x + C[3] * h, &stage(&ks, &A4));
        ks[4] = f(x + C[4] * h, &stage(&ks, &A5));
        ks[5] = f(x + C[5] * h, &stage(&ks, &A6));
        let y_new = stage(&ks, &A7);
        ks[6] = f(x + h, &y_new);

        let mut err_sq = 0.0;
        for i in 0..DIM {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * ks[j][i];
            }
            e *= h;
            let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / DIM as f64).sqrt();
        (y_new, err.max(1e-30), ks)
    }

    fn dense_step(&self, x: f64, h: f64, y: &State, y_new: &State, ks: &[State; 7]) -> DenseStep {
        let mut rcont = [[0.0; DIM]; 5];
        for i in 0..DIM {
            let ydiff = y_new[i] - y[i];
            let bspl = h * ks[0][i] - ydiff;
            rcont[0][i] = y[i];
            rcont[1][i] = ydiff;
            rcont[2][i] = bspl;
            rcont[3][i] = ydiff - h * ks[6][i] - bspl;
            let mut acc = 0.0;
            for j in 0..7 {
                acc += D[j] * ks[j][i];
            }
            rcont[4][i] = h * acc;
        }
        DenseStep { x0: x, h, rcont }
    }

    fn initial_step<F>(&self, f: &F, x: f64, y: &State, k1: &State, span: f64) -> f64
    where
        F: Fn(f64, &State) -> State,
    {
        // Crude h0 from the norms of y and y', refined by one Euler probe.
        let norm = |v: &State| v.iter().map(|a| a * a).sum::<f64>().sqrt();
        let d0 = norm(y).max(1e-10);
        let d1 = norm(k1).max(1e-10);
        let mut h0 = 0.01 * d0 / d1;
        h0 = h0.min(span.abs() * 0.1).max(1e-10);
        let mut y1 = *y;
        for i in 0..DIM {
            y1[i] += h0 * k1[i];
        }
        let k2 = f(x + h0, &y1);
        let mut d2 = 0.0;
        for i in 0..DIM {
            d2 += (k2[i] - k1[i]) * (k2[i] - k1[i]);
        }
        let d2 = d2.sqrt() / h0;
        let h1 = if d1.max(d2) > 1e-15 {
            (0.01 / d1.max(d2)).powf(0.2)
        } else {
            (h0 * 1e-3).max(1e-6)
        };
        (100.0 * h0).min(h1).min(span.abs())
    }
}

/// Find x in [a, b] with component `comp` of the dense step vanishing, by
/// bisection on the dense output. Requires a sign change over [a, b].
pub fn bisect_zero(step: &DenseStep, comp: usize, a: f64, b: f64, tol: f64) -> f64 {
    let mut lo = a;
    let mut hi = b;
    let mut f_lo = step.eval(lo)[comp];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = step.eval(mid)[comp];
        if f_mid.abs() < tol || (hi - lo) < f64::EPSILON * mid.abs().max(1.0) {
            return mid;
        }
        if (f_lo < 0.0) == (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_x: f64, y: &State) -> State {
        [y[1], -y[0], y[0] * y[0]]
    }

    #[test]
    fn integrates_harmonic_oscillator() {
        let ode = Dopri5::new(1e-12, 1e-12);
        let traj = ode
            .integrate(harmonic, 0.0, [0.0, 1.0, 0.0], 10.0, |_| false)
            .unwrap();
        let y = traj.y_end;
        assert!((y[0] - 10.0f64.sin()).abs() < 1e-9);
        assert!((y[1] - 10.0f64.cos()).abs() < 1e-9);
        // Third component accumulates int sin^2 = x/2 - sin(2x)/4.
        let exact = 5.0 - (20.0f64).sin() / 4.0;
        assert!((y[2] - exact).abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_solution_inside_steps() {
        let ode = Dopri5::new(1e-12, 1e-12);
        let traj = ode
            .integrate(harmonic, 0.0, [0.0, 1.0, 0.0], 6.0, |_| false)
            .unwrap();
        for i in 0..=60 {
            let x = 0.1 * i as f64;
            let y = traj.eval(x);
            assert!((y[0] - x.sin()).abs() < 1e-8, "x = {}", x);
        }
    }

    #[test]
    fn bisection_finds_pi() {
        let ode = Dopri5::new(1e-12, 1e-12);
        let mut zero = None;
        let mut prev = (0.0, 0.0);
        ode.integrate(harmonic, 0.0, [0.0, 1.0, 0.0], 4.0, |step| {
            let (xa, ua) = prev;
            let ub = step.eval(step.x1())[0];
            if xa > 0.0 && ua > 0.0 && ub <= 0.0 {
                zero = Some(bisect_zero(step, 0, step.x0.max(xa), step.x1(), 1e-12));
                prev = (step.x1(), ub);
                return true;
            }
            prev = (step.x1(), ub);
            false
        })
        .unwrap();
        let z = zero.expect("sign change");
        assert!((z - std::f64::consts::PI).abs() < 1e-9);
    }
}
