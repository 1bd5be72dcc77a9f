//! Lifted vortex dynamics in C^{2xN} and the momentum maps living on it:
//! J (torus), K (U(2)), L (U(D_Gamma)) and the per-vortex su(2) map M.
//!
//! The flow is Gamma_i phidot_i = -(i/2) dH/dphi_i^*, a Schroedinger-like
//! equation whose Hopf projection reproduces the sphere dynamics.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Result, VortexError};
use crate::geometry::{hopf_lift, hopf_project, SpinorPair, Vec3};
use crate::liepoisson::AlgebraPoint;
use crate::pairs::pairs;
use crate::sphere::{Circulations, SphereState};
use crate::timeint::{Monitor, VectorField};

/// Columns of the 2xN matrix Phi: one spinor per vortex.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedState {
    pub columns: Vec<SpinorPair>,
}

impl LiftedState {
    pub fn new(columns: Vec<SpinorPair>) -> Self {
        Self { columns }
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    /// Lift a sphere configuration with fiber phase 0 for every vortex.
    pub fn from_sphere(state: &SphereState, _c: &Circulations) -> Result<Self> {
        Self::from_sphere_with_phases(state, &vec![0.0; state.n()])
    }

    /// Lift with an explicit fiber phase per vortex.
    pub fn from_sphere_with_phases(state: &SphereState, phases: &[f64]) -> Result<Self> {
        if phases.len() != state.n() {
            return Err(VortexError::DimensionMismatch {
                context: "lift phases",
                expected: state.n(),
                got: phases.len(),
            });
        }
        let columns = state
            .positions
            .iter()
            .zip(phases)
            .map(|(x, &theta)| hopf_lift(x, theta))
            .collect::<Result<_>>()?;
        Ok(Self { columns })
    }

    /// Hopf projection of every column.
    pub fn project(&self) -> SphereState {
        SphereState::new(self.columns.iter().map(hopf_project).collect())
    }

    /// Check |phi_i|^2 = R within 1e-9 R.
    pub fn validate(&self, c: &Circulations) -> Result<()> {
        if self.n() != c.n() {
            return Err(VortexError::DimensionMismatch {
                context: "lifted state",
                expected: c.n(),
                got: self.n(),
            });
        }
        for (i, phi) in self.columns.iter().enumerate() {
            if (phi.norm_sq() - c.radius).abs() > 1e-9 * c.radius {
                return Err(VortexError::InvalidState(format!(
                    "column {i} off the 3-sphere: |phi|^2 = {}, R = {}",
                    phi.norm_sq(),
                    c.radius
                )));
            }
        }
        Ok(())
    }

    /// Flat chart [Re z_1, Im z_1, Re u_1, Im u_1, Re z_2, ...].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(4 * self.n());
        for phi in &self.columns {
            y.extend_from_slice(&[phi.z.re, phi.z.im, phi.u.re, phi.u.im]);
        }
        y
    }

    pub fn from_flat(y: &[f64]) -> Self {
        assert_eq!(y.len() % 4, 0);
        Self {
            columns: y
                .chunks_exact(4)
                .map(|c| SpinorPair::new(Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3])))
                .collect(),
        }
    }
}

/// Squared C^2 distance of the projections: (|phi_i|^2+|phi_j|^2)^2 - 4 |phi_i^* phi_j|^2.
fn lifted_dist2(a: &SpinorPair, b: &SpinorPair) -> f64 {
    let s = a.norm_sq() + b.norm_sq();
    s * s - 4.0 * a.inner(b).norm_sqr()
}

/// Lifted Hamiltonian H(Phi) = -1/(4 pi R^2) sum Gamma_i Gamma_j ln D_ij with
/// D_ij the squared distance of the Hopf projections.
pub fn hamiltonian_lifted(state: &LiftedState, c: &Circulations) -> Result<f64> {
    let mut h = 0.0;
    for (i, j) in pairs(state.n()) {
        let d = lifted_dist2(&state.columns[i], &state.columns[j]);
        if d <= 0.0 {
            return Err(VortexError::LiftedCollision { i, j });
        }
        h += c.gamma[i] * c.gamma[j] * d.ln();
    }
    Ok(-h / (4.0 * PI * c.radius * c.radius))
}

/// Wirtinger gradient dH/dphi_i^*, fixed by the convention
/// dH = 2 Re <dH/dphi^*, dphi>.
pub fn wirtinger_gradient(state: &LiftedState, c: &Circulations) -> Result<Vec<SpinorPair>> {
    let n = state.n();
    let pref = -1.0 / (4.0 * PI * c.radius * c.radius);
    let mut grad = vec![SpinorPair::from_re(0.0, 0.0); n];
    for (i, j) in pairs(n) {
        let (pi, pj) = (&state.columns[i], &state.columns[j]);
        let d = lifted_dist2(pi, pj);
        if d <= 0.0 {
            return Err(VortexError::LiftedCollision { i, j });
        }
        let gg = c.gamma[i] * c.gamma[j] * pref / d;
        let s = pi.norm_sq() + pj.norm_sq();
        // d D_ij / d phi_i^* = 2 s phi_i - 4 (phi_j^* phi_i) phi_j
        let ji = pj.inner(pi);
        grad[i].z += gg * (2.0 * s * pi.z - 4.0 * ji * pj.z);
        grad[i].u += gg * (2.0 * s * pi.u - 4.0 * ji * pj.u);
        let ij = pi.inner(pj);
        grad[j].z += gg * (2.0 * s * pj.z - 4.0 * ij * pi.z);
        grad[j].u += gg * (2.0 * s * pj.u - 4.0 * ij * pi.u);
    }
    Ok(grad)
}

/// Column velocities phidot_i = -(i R / (2 Gamma_i)) dH/dphi_i^*.
///
/// The R factor converts the plain Wirtinger gradient into the functional
/// derivative taken with the weighted one-form (whose coefficient is 2/R);
/// it is pinned by the requirement that the Hopf projection of this flow
/// reproduces the sphere dynamics for every radius.
pub fn rhs_lifted(state: &LiftedState, c: &Circulations) -> Result<Vec<SpinorPair>> {
    let grad = wirtinger_gradient(state, c)?;
    Ok(grad
        .into_iter()
        .zip(&c.gamma)
        .map(|(g, gamma)| {
            let f = Complex64::new(0.0, -0.5 * c.radius / gamma);
            SpinorPair::new(f * g.z, f * g.u)
        })
        .collect())
}

/// Torus momentum map J(Phi) = -(2/R) (Gamma_1 |phi_1|^2, ..., Gamma_N |phi_N|^2).
pub fn momentum_j(state: &LiftedState, c: &Circulations) -> Vec<f64> {
    state
        .columns
        .iter()
        .zip(&c.gamma)
        .map(|(phi, g)| -2.0 / c.radius * g * phi.norm_sq())
        .collect()
}

/// U(2) momentum map K(Phi) = -(i/R) Phi D_Gamma Phi^*, a 2x2 anti-Hermitian matrix.
pub fn momentum_k(state: &LiftedState, c: &Circulations) -> Matrix2<Complex64> {
    let mut m = Matrix2::zeros();
    for (phi, g) in state.columns.iter().zip(&c.gamma) {
        // phi phi^* outer product
        m[(0, 0)] += g * phi.z * phi.z.conj();
        m[(0, 1)] += g * phi.z * phi.u.conj();
        m[(1, 0)] += g * phi.u * phi.z.conj();
        m[(1, 1)] += g * phi.u * phi.u.conj();
    }
    m * Complex64::new(0.0, -1.0 / c.radius)
}

/// U(D_Gamma) momentum map L(Phi) = -(i/R) Phi^* Phi in lambda coordinates:
/// lambda_i = sqrt(2) |phi_i|^2 / R, lambda_ij = 2 phi_i^* phi_j / R.
pub fn momentum_l(state: &LiftedState, c: &Circulations) -> AlgebraPoint {
    let n = state.n();
    let diag = state
        .columns
        .iter()
        .map(|phi| 2.0f64.sqrt() * phi.norm_sq() / c.radius)
        .collect();
    let off = pairs(n)
        .map(|(i, j)| 2.0 / c.radius * state.columns[i].inner(&state.columns[j]))
        .collect();
    AlgebraPoint::new(diag, off)
}

/// Per-vortex su(2) momentum map M(phi) = (gamma / R) hopf_project(phi).
pub fn momentum_m(phi: &SpinorPair, gamma: f64, radius: f64) -> Vec3 {
    gamma / radius * hopf_project(phi)
}

/// Vector field over the flat chart of [`LiftedState`].
pub struct LiftedField {
    c: Circulations,
}

impl LiftedField {
    pub fn new(c: Circulations) -> Self {
        Self { c }
    }
}

impl VectorField for LiftedField {
    fn dim(&self) -> usize {
        4 * self.c.n()
    }

    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        let state = LiftedState::from_flat(y);
        let vel = rhs_lifted(&state, &self.c)?;
        for (chunk, v) in dydt.chunks_exact_mut(4).zip(vel) {
            chunk[0] = v.z.re;
            chunk[1] = v.z.im;
            chunk[2] = v.u.re;
            chunk[3] = v.u.im;
        }
        Ok(())
    }
}

/// Monitors for the lifted level: H, the N entries of J and the four real
/// entries of K (Im K11, Re K12, Im K12, Im K22).
pub fn monitors(c: &Circulations) -> Vec<Monitor> {
    let mut out = Vec::new();
    let cc = c.clone();
    out.push(Monitor::new("H", move |y: &[f64]| {
        hamiltonian_lifted(&LiftedState::from_flat(y), &cc).unwrap_or(f64::NAN)
    }));
    for i in 0..c.n() {
        let cc = c.clone();
        out.push(Monitor::new(format!("J_{}", i + 1), move |y: &[f64]| {
            momentum_j(&LiftedState::from_flat(y), &cc)[i]
        }));
    }
    type Entry = fn(&Matrix2<Complex64>) -> f64;
    let entries: [(&str, Entry); 4] = [
        ("K_1", |k| k[(0, 0)].im),
        ("K_2", |k| k[(0, 1)].re),
        ("K_3", |k| k[(0, 1)].im),
        ("K_4", |k| k[(1, 1)].im),
    ];
    for (name, extract) in entries {
        let cc = c.clone();
        out.push(Monitor::new(name, move |y: &[f64]| {
            extract(&momentum_k(&LiftedState::from_flat(y), &cc))
        }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::random_sphere_state;
    use crate::sphere::{hamiltonian_sphere, rhs_sphere};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn circulations(gs: &[f64], r: f64) -> Circulations {
        Circulations::new(gs.to_vec(), r).unwrap()
    }

    fn random_lifted(c: &Circulations, seed: u64) -> LiftedState {
        let state = random_sphere_state(c, seed);
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xabcd);
        let phases: Vec<f64> = (0..c.n()).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        LiftedState::from_sphere_with_phases(&state, &phases).unwrap()
    }

    #[test]
    fn single_vortex_is_stationary() {
        let c = circulations(&[1.5], 1.0);
        let state = LiftedState::new(vec![SpinorPair::from_re(1.0, 0.0)]);
        assert_eq!(hamiltonian_lifted(&state, &c).unwrap(), 0.0);
        let vel = rhs_lifted(&state, &c).unwrap();
        assert_eq!(vel[0], SpinorPair::from_re(0.0, 0.0));
    }

    #[test]
    fn antipodal_pair_phase_drift_projects_to_zero() {
        let c = circulations(&[2.0, 2.0 * PI], 1.0);
        let state = LiftedState::new(vec![
            SpinorPair::from_re(1.0, 0.0),
            SpinorPair::from_re(0.0, 1.0),
        ]);
        assert_relative_eq!(
            hamiltonian_lifted(&state, &c).unwrap(),
            -(4.0f64).ln(),
            max_relative = 1e-14
        );
        let vel = rhs_lifted(&state, &c).unwrap();
        // phidot_i is a purely imaginary multiple of phi_i
        for (phi, v) in state.columns.iter().zip(&vel) {
            let ratio = if phi.z.norm() > 0.5 { v.z / phi.z } else { v.u / phi.u };
            assert!(ratio.re.abs() < 1e-15, "phase drift only, got {ratio}");
            let proj = crate::geometry::hopf_differential(phi, v);
            assert!(proj.norm() < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_matches_sphere_hamiltonian() {
        let c = circulations(&[1.0, -2.0, 0.7], 1.6);
        for seed in 0..20 {
            let lifted = random_lifted(&c, seed);
            let h_lift = hamiltonian_lifted(&lifted, &c).unwrap();
            let h_sphere = hamiltonian_sphere(&lifted.project(), &c).unwrap();
            assert_relative_eq!(h_lift, h_sphere, max_relative = 1e-12);
        }
    }

    #[test]
    fn lifted_collision_is_reported() {
        let c = circulations(&[1.0, 1.0], 1.0);
        let phi = SpinorPair::from_re(1.0, 0.0);
        let state = LiftedState::new(vec![phi, phi]);
        assert_eq!(
            hamiltonian_lifted(&state, &c),
            Err(VortexError::LiftedCollision { i: 0, j: 1 })
        );
    }

    #[test]
    fn wirtinger_gradient_matches_finite_differences() {
        let c = circulations(&[1.0, -2.0, 0.7], 1.0);
        let lifted = random_lifted(&c, 3);
        let grad = wirtinger_gradient(&lifted, &c).unwrap();
        let y0 = lifted.to_flat();
        let h = 1e-6;
        for k in 0..y0.len() {
            let mut plus = y0.clone();
            plus[k] += h;
            let mut minus = y0.clone();
            minus[k] -= h;
            let fd = (hamiltonian_lifted(&LiftedState::from_flat(&plus), &c).unwrap()
                - hamiltonian_lifted(&LiftedState::from_flat(&minus), &c).unwrap())
                / (2.0 * h);
            // dH = 2 Re <grad, dphi>: each flat coordinate moves one real or
            // imaginary part, so the analytic value is 2 Re / 2 Im of grad
            let (i, comp) = (k / 4, k % 4);
            let g = &grad[i];
            let analytic = match comp {
                0 => 2.0 * g.z.re,
                1 => 2.0 * g.z.im,
                2 => 2.0 * g.u.re,
                _ => 2.0 * g.u.im,
            };
            assert_relative_eq!(fd, analytic, max_relative = 1e-6, epsilon = 1e-10);
        }
    }

    #[test]
    fn projected_velocities_match_sphere_rhs() {
        for r in [1.0, 2.0] {
            let c = circulations(&[1.0, -2.0, 0.7], r);
            for seed in 0..10 {
                let lifted = random_lifted(&c, seed);
                let vel = rhs_lifted(&lifted, &c).unwrap();
                let sphere_vel = rhs_sphere(&lifted.project(), &c).unwrap();
                for i in 0..3 {
                    let projected = crate::geometry::hopf_differential(&lifted.columns[i], &vel[i]);
                    assert!(
                        (projected - sphere_vel[i]).norm() <= 1e-10,
                        "R={r}, vortex {i}: {projected:?} vs {:?}",
                        sphere_vel[i]
                    );
                }
            }
        }
    }

    #[test]
    fn momentum_j_values() {
        let c = circulations(&[1.0, -2.0], 1.3);
        let state = LiftedState::from_sphere(&random_sphere_state(&c, 1), &c).unwrap();
        // on the constraint set J = -2 Gamma
        let j = momentum_j(&state, &c);
        assert_relative_eq!(j[0], -2.0, max_relative = 1e-12);
        assert_relative_eq!(j[1], 4.0, max_relative = 1e-12);

        let zero = LiftedState::new(vec![SpinorPair::from_re(0.0, 0.0); 2]);
        assert_eq!(momentum_j(&zero, &c), vec![0.0, 0.0]);
    }

    #[test]
    fn momentum_k_examples() {
        let r: f64 = 2.0;
        let gamma = 1.7;
        let c = circulations(&[gamma], r);
        let state = LiftedState::new(vec![SpinorPair::from_re(r.sqrt(), 0.0)]);
        let k = momentum_k(&state, &c);
        assert_abs_diff_eq!((k[(0, 0)] - Complex64::new(0.0, -gamma)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k[(0, 1)].norm(), 0.0);
        assert_abs_diff_eq!(k[(1, 1)].norm(), 0.0);

        // anti-Hermitian for random states
        let c = circulations(&[1.0, -2.0, 0.7], 1.0);
        let state = random_lifted(&c, 8);
        let k = momentum_k(&state, &c);
        let residual = (k + k.adjoint()).norm();
        assert!(residual <= 1e-14);
    }

    #[test]
    fn momentum_l_coordinates() {
        let c = circulations(&[1.0, 2.0, 3.0], 1.4);
        let state = LiftedState::from_sphere(&random_sphere_state(&c, 2), &c).unwrap();
        let lam = momentum_l(&state, &c);
        for i in 0..3 {
            assert_relative_eq!(lam.diag[i], 2.0f64.sqrt(), max_relative = 1e-12);
        }
        for (p, (i, j)) in pairs(3).enumerate() {
            let expected = 2.0 / c.radius * state.columns[i].inner(&state.columns[j]);
            assert_abs_diff_eq!((lam.off[p] - expected).norm(), 0.0);
        }

        // orthogonal columns give vanishing off-diagonal entries
        let c2 = circulations(&[1.0, 1.0], 1.0);
        let ortho = LiftedState::new(vec![
            SpinorPair::from_re(1.0, 0.0),
            SpinorPair::from_re(0.0, 1.0),
        ]);
        let lam = momentum_l(&ortho, &c2);
        assert_eq!(lam.off[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn momentum_m_is_scaled_projection() {
        let r: f64 = 2.0;
        let phi = SpinorPair::from_re(r.sqrt(), 0.0);
        let m = momentum_m(&phi, 1.5, r);
        assert_abs_diff_eq!((m - Vec3::new(0.0, 0.0, 1.5)).norm(), 0.0, epsilon = 1e-15);
        let phi = SpinorPair::from_re(0.0, r.sqrt());
        let m = momentum_m(&phi, 1.5, r);
        assert_abs_diff_eq!((m - Vec3::new(0.0, 0.0, -1.5)).norm(), 0.0, epsilon = 1e-15);

        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..10 {
            let phi = SpinorPair::new(
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
            let m = momentum_m(&phi, 0.7, 1.3);
            let expected = 0.7 / 1.3 * hopf_project(&phi);
            assert_abs_diff_eq!((m - expected).norm(), 0.0, epsilon = 1e-15);
        }
    }
}
