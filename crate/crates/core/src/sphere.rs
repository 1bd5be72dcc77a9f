//! Direct dynamics of N point vortices on the sphere of radius R: vector
//! field, Hamiltonians, the R^3 Poisson bracket, the moment of vorticity and
//! the equations of relative motion.

use std::f64::consts::PI;

use crate::error::{Result, VortexError};
use crate::geometry::Vec3;
use crate::pairs::{pair_count, pair_index, pairs};
use crate::timeint::{Monitor, VectorField};

/// Vortex strengths together with the sphere radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Circulations {
    pub gamma: Vec<f64>,
    pub radius: f64,
}

impl Circulations {
    pub fn new(gamma: Vec<f64>, radius: f64) -> Result<Self> {
        let c = Self { gamma, radius };
        c.validate()?;
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.gamma.len()
    }

    /// Collision threshold on the Euclidean chord.
    pub fn collision_eps(&self) -> f64 {
        1e-8 * self.radius
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_empty() {
            return Err(VortexError::DimensionMismatch {
                context: "circulations",
                expected: 1,
                got: 0,
            });
        }
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return Err(VortexError::BadRadius(self.radius));
        }
        for (i, g) in self.gamma.iter().enumerate() {
            if *g == 0.0 || !g.is_finite() {
                return Err(VortexError::ZeroCirculation { i });
            }
        }
        Ok(())
    }
}

/// Positions of the N vortices on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereState {
    pub positions: Vec<Vec3>,
}

impl SphereState {
    pub fn new(positions: Vec<Vec3>) -> Self {
        Self { positions }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Check radius residency (1e-9 R) and pairwise separation.
    pub fn validate(&self, c: &Circulations) -> Result<()> {
        if self.n() != c.n() {
            return Err(VortexError::DimensionMismatch {
                context: "sphere state",
                expected: c.n(),
                got: self.n(),
            });
        }
        let r = c.radius;
        for (i, x) in self.positions.iter().enumerate() {
            if (x.norm() - r).abs() > 1e-9 * r {
                return Err(VortexError::InvalidState(format!(
                    "vortex {i} off the sphere: |x| = {}, R = {r}",
                    x.norm()
                )));
            }
        }
        check_separation(&self.positions, c)?;
        Ok(())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(3 * self.n());
        for x in &self.positions {
            y.extend_from_slice(&[x[0], x[1], x[2]]);
        }
        y
    }

    pub fn from_flat(y: &[f64]) -> Self {
        assert_eq!(y.len() % 3, 0);
        Self {
            positions: y.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect(),
        }
    }
}

fn check_separation(xs: &[Vec3], c: &Circulations) -> Result<()> {
    let eps = c.collision_eps();
    for (i, j) in pairs(xs.len()) {
        let dist = (xs[i] - xs[j]).norm();
        if dist <= eps {
            return Err(VortexError::Collision { i, j, dist });
        }
    }
    Ok(())
}

/// Vortex velocities: xdot_i = 1/(2 pi R) sum_j Gamma_j (x_j x x_i) / l_ij^2.
///
/// Every velocity is tangent to the sphere. Errors on collision.
pub fn rhs_sphere(state: &SphereState, c: &Circulations) -> Result<Vec<Vec3>> {
    let xs = &state.positions;
    check_separation(xs, c)?;
    let pref = 1.0 / (2.0 * PI * c.radius);
    let mut vel = vec![Vec3::zeros(); xs.len()];
    for (i, v) in vel.iter_mut().enumerate() {
        let mut acc = Vec3::zeros();
        for (j, xj) in xs.iter().enumerate() {
            if j == i {
                continue;
            }
            let l2 = (xs[i] - xj).norm_squared();
            acc += c.gamma[j] / l2 * xj.cross(&xs[i]);
        }
        *v = pref * acc;
    }
    Ok(vel)
}

/// Hamiltonian in the ambient R^3 form: -1/(4 pi R^2) sum Gamma_i Gamma_j ln l_ij^2.
pub fn hamiltonian_sphere(state: &SphereState, c: &Circulations) -> Result<f64> {
    let xs = &state.positions;
    check_separation(xs, c)?;
    let mut h = 0.0;
    for (i, j) in pairs(xs.len()) {
        h += c.gamma[i] * c.gamma[j] * (xs[i] - xs[j]).norm_squared().ln();
    }
    Ok(-h / (4.0 * PI * c.radius * c.radius))
}

/// Intrinsic form of the Hamiltonian, restricted to the sphere:
/// -1/(4 pi R^2) sum Gamma_i Gamma_j ln(2 (R^2 - x_i . x_j)).
///
/// Agrees with [`hamiltonian_sphere`] when every |x_i| = R.
pub fn hamiltonian_sphere_intrinsic(state: &SphereState, c: &Circulations) -> Result<f64> {
    let xs = &state.positions;
    check_separation(xs, c)?;
    let r2 = c.radius * c.radius;
    let mut h = 0.0;
    for (i, j) in pairs(xs.len()) {
        h += c.gamma[i] * c.gamma[j] * (2.0 * (r2 - xs[i].dot(&xs[j]))).ln();
    }
    Ok(-h / (4.0 * PI * r2))
}

/// Gradient of the R^3 Hamiltonian with respect to each position.
pub fn hamiltonian_sphere_gradient(state: &SphereState, c: &Circulations) -> Result<Vec<Vec3>> {
    let xs = &state.positions;
    check_separation(xs, c)?;
    let pref = -1.0 / (4.0 * PI * c.radius * c.radius);
    let mut grad = vec![Vec3::zeros(); xs.len()];
    for (i, g) in grad.iter_mut().enumerate() {
        let mut acc = Vec3::zeros();
        for (j, xj) in xs.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = xs[i] - xj;
            acc += c.gamma[i] * c.gamma[j] * 2.0 / d.norm_squared() * d;
        }
        *g = pref * acc;
    }
    Ok(grad)
}

/// Moment of vorticity I = (1/R) sum Gamma_i x_i, the SO(3) momentum map.
pub fn moment_of_vorticity(state: &SphereState, c: &Circulations) -> Vec3 {
    let mut acc = Vec3::zeros();
    for (g, x) in c.gamma.iter().zip(&state.positions) {
        acc += *g * x;
    }
    acc / c.radius
}

/// Equations of relative motion: d(l_ij^2)/dt for every pair i < j,
/// indexed lexicographically.
///
/// d/dt l_ij^2 = 1/(pi R) sum_{k != i,j} Gamma_k V_ijk (1/l_jk^2 - 1/l_ki^2).
pub fn relative_rhs(state: &SphereState, c: &Circulations) -> Result<Vec<f64>> {
    let xs = &state.positions;
    check_separation(xs, c)?;
    let n = xs.len();
    let pref = 1.0 / (PI * c.radius);
    let mut out = vec![0.0; pair_count(n)];
    for (i, j) in pairs(n) {
        let mut acc = 0.0;
        for (k, xk) in xs.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            let v_ijk = xs[i].dot(&xs[j].cross(xk));
            let l_jk2 = (xs[j] - xk).norm_squared();
            let l_ki2 = (xk - xs[i]).norm_squared();
            acc += c.gamma[k] * v_ijk * (1.0 / l_jk2 - 1.0 / l_ki2);
        }
        out[pair_index(i, j, n)] = pref * acc;
    }
    Ok(out)
}

/// The R^3 Poisson bracket
/// {F, H}(x) = sum_i (R / Gamma_i) x_i . (dF/dx_i x dH/dx_i)
/// evaluated on supplied gradients.
pub fn poisson_bracket_r3(
    grad_f: &[Vec3],
    grad_h: &[Vec3],
    state: &SphereState,
    c: &Circulations,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..state.n() {
        acc += c.radius / c.gamma[i] * state.positions[i].dot(&grad_f[i].cross(&grad_h[i]));
    }
    acc
}

/// Vector field over the flat chart [x1_1, x1_2, x1_3, x2_1, ...].
pub struct SphereField {
    c: Circulations,
}

impl SphereField {
    pub fn new(c: Circulations) -> Self {
        Self { c }
    }
}

impl VectorField for SphereField {
    fn dim(&self) -> usize {
        3 * self.c.n()
    }

    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        let state = SphereState::from_flat(y);
        let vel = rhs_sphere(&state, &self.c)?;
        for (chunk, v) in dydt.chunks_exact_mut(3).zip(vel) {
            chunk[0] = v[0];
            chunk[1] = v[1];
            chunk[2] = v[2];
        }
        Ok(())
    }
}

/// Post-step renormalization: rescale any vortex whose radius drifted more
/// than 1e-10 R back onto the sphere, returning how many were touched.
pub fn radius_projection(c: &Circulations) -> impl Fn(&mut [f64]) -> usize + Sync {
    let r = c.radius;
    move |y: &mut [f64]| {
        let mut count = 0;
        for x in y.chunks_exact_mut(3) {
            let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if (norm - r).abs() > 1e-10 * r && norm > 0.0 {
                let f = r / norm;
                x[0] *= f;
                x[1] *= f;
                x[2] *= f;
                count += 1;
            }
        }
        count
    }
}

/// Invariant monitors for the sphere level: H and the three components of I.
pub fn monitors(c: &Circulations) -> Vec<Monitor> {
    let mut out = Vec::new();
    let cc = c.clone();
    out.push(Monitor::new("H", move |y: &[f64]| {
        hamiltonian_sphere(&SphereState::from_flat(y), &cc).unwrap_or(f64::NAN)
    }));
    for a in 0..3 {
        let cc = c.clone();
        out.push(Monitor::new(format!("I_{}", a + 1), move |y: &[f64]| {
            moment_of_vorticity(&SphereState::from_flat(y), &cc)[a]
        }));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::random_sphere_state;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn circulations(gs: &[f64], r: f64) -> Circulations {
        Circulations::new(gs.to_vec(), r).unwrap()
    }

    #[test]
    fn validation_rejects_bad_input() {
        assert!(Circulations::new(vec![], 1.0).is_err());
        assert!(Circulations::new(vec![1.0, 0.0], 1.0).is_err());
        assert!(Circulations::new(vec![1.0], -1.0).is_err());
        let c = circulations(&[1.0, 1.0], 1.0);
        let off = SphereState::new(vec![Vec3::new(0.0, 0.0, 1.1), Vec3::new(1.0, 0.0, 0.0)]);
        assert!(off.validate(&c).is_err());
    }

    #[test]
    fn single_vortex_is_stationary() {
        let c = circulations(&[2.0], 1.0);
        let state = SphereState::new(vec![Vec3::new(0.0, 0.0, 1.0)]);
        assert_eq!(rhs_sphere(&state, &c).unwrap(), vec![Vec3::zeros()]);
        assert_eq!(hamiltonian_sphere(&state, &c).unwrap(), 0.0);
        assert!(relative_rhs(&state, &c).unwrap().is_empty());
    }

    #[test]
    fn antipodal_pair_is_stationary() {
        let c = circulations(&[1.0, 3.0], 1.0);
        let state = SphereState::new(vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0)]);
        let vel = rhs_sphere(&state, &c).unwrap();
        assert_eq!(vel, vec![Vec3::zeros(), Vec3::zeros()]);
    }

    #[test]
    fn two_vortex_hand_computation() {
        // Gamma = (2 pi, 2 pi), x1 = e1, x2 = e2: x2 x x1 = -e3, l^2 = 2, so
        // xdot_1 = -e3/2; by the same formula xdot_2 = +e3/2 (their sum keeps
        // the moment of vorticity constant).
        let c = circulations(&[2.0 * PI, 2.0 * PI], 1.0);
        let state = SphereState::new(vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]);
        let vel = rhs_sphere(&state, &c).unwrap();
        assert_abs_diff_eq!((vel[0] - Vec3::new(0.0, 0.0, -0.5)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((vel[1] - Vec3::new(0.0, 0.0, 0.5)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn collision_is_detected_with_pair() {
        let c = circulations(&[1.0, 1.0], 1.0);
        let x = Vec3::new(0.0, 0.0, 1.0);
        let state = SphereState::new(vec![x, x + Vec3::new(1e-12, 0.0, 0.0)]);
        match rhs_sphere(&state, &c) {
            Err(VortexError::Collision { i: 0, j: 1, .. }) => {}
            other => panic!("expected collision, got {other:?}"),
        }
    }

    #[test]
    fn velocities_are_tangent() {
        let c = circulations(&[1.0, -2.0, 0.7, 3.0], 2.0);
        let state = random_sphere_state(&c, 42);
        let vel = rhs_sphere(&state, &c).unwrap();
        for (x, v) in state.positions.iter().zip(&vel) {
            assert!(x.dot(v).abs() <= 1e-12 * c.radius * c.radius);
        }
    }

    #[test]
    fn hamiltonian_antipodal_value() {
        // Gamma1 Gamma2 = 4 pi, R = 1, l^2 = 4 -> H = -ln 4
        let c = circulations(&[2.0, 2.0 * PI], 1.0);
        let state = SphereState::new(vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0)]);
        assert_relative_eq!(
            hamiltonian_sphere(&state, &c).unwrap(),
            -(4.0f64).ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn hamiltonian_forms_agree_on_sphere() {
        let c = circulations(&[1.0, -2.0, 0.7], 1.7);
        let state = random_sphere_state(&c, 5);
        let a = hamiltonian_sphere(&state, &c).unwrap();
        let b = hamiltonian_sphere_intrinsic(&state, &c).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn moment_of_vorticity_examples() {
        let c = circulations(&[0.5], 2.0);
        let state = SphereState::new(vec![Vec3::new(0.0, 0.0, 2.0)]);
        assert_eq!(moment_of_vorticity(&state, &c), Vec3::new(0.0, 0.0, 0.5));

        // regular tetrahedron with equal circulations sums to zero
        let c = circulations(&[1.0, 1.0, 1.0, 1.0], 3.0);
        let state = crate::stability::tetrahedron_sphere_state(3.0);
        assert!(moment_of_vorticity(&state, &c).norm() < 1e-14);

        let c = circulations(&[1.0, -2.0, 0.7], 1.0);
        let state = random_sphere_state(&c, 9);
        let hand = (state.positions[0] * 1.0 + state.positions[1] * -2.0
            + state.positions[2] * 0.7)
            / 1.0;
        assert_abs_diff_eq!(
            (moment_of_vorticity(&state, &c) - hand).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn relative_motion_trivial_cases() {
        let c = circulations(&[1.0, 2.0], 1.0);
        let state = SphereState::new(vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)]);
        assert_eq!(relative_rhs(&state, &c).unwrap(), vec![0.0]);

        // equilateral triangle on the equator: reciprocal terms cancel
        let c = circulations(&[1.0, 2.0, -0.5], 1.0);
        let ang = 2.0 * PI / 3.0;
        let state = SphereState::new(
            (0..3)
                .map(|k| Vec3::new((k as f64 * ang).cos(), (k as f64 * ang).sin(), 0.0))
                .collect(),
        );
        for v in relative_rhs(&state, &c).unwrap() {
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn relative_motion_matches_finite_difference() {
        use crate::timeint::{integrate, IntegratorConfig, Method};
        for seed in [1u64, 2, 3] {
            let c = circulations(&[1.0, -2.0, 0.7], 1.0);
            let state = random_sphere_state(&c, seed);
            let rel = relative_rhs(&state, &c).unwrap();

            // centered finite difference of l_ij^2 along the flow
            let delta = 1e-4;
            let field = SphereField::new(c.clone());
            let cfg = IntegratorConfig {
                method: Method::Rk4 { dt: delta / 4.0 },
                t_end: delta,
                sample_stride: usize::MAX,
            };
            let l2 = |fwd: bool| -> Vec<f64> {
                let y0 = if fwd {
                    state.to_flat()
                } else {
                    // integrate the time-reversed field
                    state.to_flat()
                };
                let rev = crate::timeint::FnField {
                    dim: field.dim(),
                    f: |t: f64, y: &[f64], dydt: &mut [f64]| {
                        field.eval(t, y, dydt)?;
                        if !fwd {
                            dydt.iter_mut().for_each(|v| *v = -*v);
                        }
                        Ok(())
                    },
                };
                let rec = integrate(&rev, &y0, &cfg, &[], None).unwrap();
                let s = SphereState::from_flat(rec.states.last().unwrap());
                pairs(3)
                    .map(|(i, j)| (s.positions[i] - s.positions[j]).norm_squared())
                    .collect()
            };
            let plus = l2(true);
            let minus = l2(false);
            for (idx, r) in rel.iter().enumerate() {
                let fd = (plus[idx] - minus[idx]) / (2.0 * delta);
                assert!(
                    (fd - r).abs() <= 1e-6 * (1.0 + r.abs()),
                    "pair {idx}: fd {fd} vs analytic {r}"
                );
            }
        }
    }

    #[test]
    fn bracket_antisymmetry_and_coordinate_example() {
        let c = circulations(&[1.0, 0.5], 1.0);
        let state = SphereState::new(vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0)]);
        let g = vec![Vec3::new(0.3, -0.2, 0.9), Vec3::new(0.1, 0.0, -0.4)];
        assert_eq!(poisson_bracket_r3(&g, &g, &state, &c), 0.0);

        // F = x1^1, H = x1^2 at x1 = (0, 0, R): R x1 . (e1 x e2) = R^2
        let r = 2.0;
        let c = circulations(&[1.0], r);
        let state = SphereState::new(vec![Vec3::new(0.0, 0.0, r)]);
        let gf = vec![Vec3::new(1.0, 0.0, 0.0)];
        let gh = vec![Vec3::new(0.0, 1.0, 0.0)];
        assert_eq!(poisson_bracket_r3(&gf, &gh, &state, &c), r * r);
    }

    #[test]
    fn flow_is_hamiltonian_for_the_bracket() {
        // xdot_i^a = {x_i^a, H} with the analytic gradient of H
        let c = circulations(&[1.0, -2.0, 0.7], 1.3);
        let state = random_sphere_state(&c, 11);
        let vel = rhs_sphere(&state, &c).unwrap();
        let grad_h = hamiltonian_sphere_gradient(&state, &c).unwrap();
        for i in 0..3 {
            for a in 0..3 {
                let mut grad_f = vec![Vec3::zeros(); 3];
                grad_f[i][a] = 1.0;
                let br = poisson_bracket_r3(&grad_f, &grad_h, &state, &c);
                assert_relative_eq!(br, vel[i][a], max_relative = 1e-12, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = circulations(&[1.0, -2.0, 0.7], 1.0);
        let state = random_sphere_state(&c, 21);
        let grad = hamiltonian_sphere_gradient(&state, &c).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            for a in 0..3 {
                let mut plus = state.clone();
                plus.positions[i][a] += h;
                let mut minus = state.clone();
                minus.positions[i][a] -= h;
                let fd = (hamiltonian_sphere(&plus, &c).unwrap()
                    - hamiltonian_sphere(&minus, &c).unwrap())
                    / (2.0 * h);
                assert_relative_eq!(fd, grad[i][a], max_relative = 1e-6, epsilon = 1e-9);
            }
        }
    }
}
