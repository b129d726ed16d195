//! Closed-form quantities used as independent oracles by the integration
//! suites. Everything here comes from the first integral of the profile ODE
//! and Beta-function quadrature, not from the solvers under test.
//! Shared between suites; not every suite uses every helper.
#![allow(dead_code)]

use statrs::function::gamma::ln_gamma;

pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Peak height of the mu = 1 reference bump: energy conservation with
/// u(0) = 0, u'(0) = 1 gives (p-1)/p |u'|^p + |u|^q / q = (p-1)/p.
pub fn peak_height(p: f64, q: f64) -> f64 {
    (q * (p - 1.0) / p).powf(1.0 / q)
}

/// First zero of the mu = 1 reference bump. Separating the first integral
/// and substituting t = (u/u_max)^q turns the half period into a Beta
/// integral: z1 = 2 u_max B(1/q, 1 - 1/p) / q.
pub fn first_zero(p: f64, q: f64) -> f64 {
    let umax = peak_height(p, q);
    2.0 * umax * beta(1.0 / q, 1.0 - 1.0 / p) / q
}

/// q-mass of one bump, int_0^{z1} |u|^q dx, by the same substitution.
pub fn bump_q_mass(p: f64, q: f64) -> f64 {
    let umax = peak_height(p, q);
    2.0 * umax.powf(q + 1.0) * beta((q + 1.0) / q, 1.0 - 1.0 / p) / q
}

/// k-th eigenvalue of the interval (0, L), 1 < q < p, in closed form.
/// The k-bump reference profile on (0, k z1) is rescaled by u -> A u(B x)
/// with B = k z1 / L and A = B^{-p/(p-q)}, which maps it onto (0, L) while
/// keeping mu = 1; the eigenvalue is then ||u||_q^{q-p}.
pub fn interval_lambda(p: f64, q: f64, length: f64, k: usize) -> f64 {
    let z1 = first_zero(p, q);
    let scale_b = k as f64 * z1 / length;
    let amp = scale_b.powf(-p / (p - q));
    let norm_q_pow_q = amp.powf(q) / scale_b * k as f64 * bump_q_mass(p, q);
    norm_q_pow_q.powf((q - p) / q)
}

pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
