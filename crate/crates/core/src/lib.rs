//! Simulation and analysis toolkit for N point vortices on a sphere.
//!
//! The same dynamics is exposed at four levels, connected by explicit maps:
//!
//! * [`sphere`] — positions on the sphere and the classical vortex equations;
//! * [`lifted`] — the lift to C^{2xN} through the Hopf fibration, with the
//!   momentum maps J, K, L and M;
//! * [`liepoisson`] — the U(2)-reduced Lie-Poisson dynamics on the dual of
//!   u(N)_Gamma, with its Casimir family;
//! * [`shape`] — the torus-reduced shape coordinates (s_i, mu_ij), their
//!   Poisson structure, constraints and Hamiltonian.
//!
//! [`timeint`] integrates any level with invariant monitoring, and
//! [`stability`] runs the energy-Casimir analysis of the tetrahedron
//! relative equilibrium.

pub mod error;
pub mod geometry;
pub mod lifted;
pub mod liepoisson;
pub mod pairs;
pub mod parallel;
pub mod sample;
pub mod shape;
pub mod sphere;
pub mod stability;
pub mod timeint;

pub use error::{Result, VortexError};
pub use num_complex::Complex64;
pub use geometry::{SpinorPair, Vec3};
pub use liepoisson::{AlgebraElement, AlgebraPoint};
pub use lifted::LiftedState;
pub use shape::ShapePoint;
pub use sphere::{Circulations, SphereState};
pub use stability::{EnergyCasimirSpec, StabilityReport, Verdict};
pub use timeint::{IntegratorConfig, Method, Monitor, TrajectoryRecord};
