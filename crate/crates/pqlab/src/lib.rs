//! Numerical laboratory for the (p,q)-eigenvalue problem of the p-Laplacian
//! with an L^q-normalized right-hand side, on intervals, balls, and disjoint
//! unions of both.
//!
//! The crate has three layers:
//!
//! - solvers for a single component: a shooting method on the equivalent ODE
//!   ([`shoot`]) cross-checked by direct constrained minimization of the
//!   Rayleigh-type quotient ([`oracle`]);
//! - the exact combination calculus for disjoint unions ([`calculus`]):
//!   combined eigenvalues, eigenfunction coefficients, first eigenvalues of
//!   finite and infinite unions, and bounded spectrum enumeration;
//! - report builders ([`report`]) reproducing, at desk scale, a spectrum
//!   with countably many accumulation points and a union whose first
//!   eigenvalue is not isolated.

pub mod calculus;
pub mod domain;
pub mod error;
pub mod ode;
pub mod oracle;
pub mod report;
pub mod shoot;
pub mod svg;

pub use domain::{ComponentDomain, Config, EigenPair, ExponentMode, Exponents, Method, UnionModel};
pub use error::{Error, Result};
