//! Energy-Casimir stability analysis of the tetrahedron relative
//! equilibrium: equilibrium data, the Lyapunov candidate, its numerical
//! Hessian in the shape chart, the closed-form leading principal minors and
//! the resulting verdict.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, VortexError};
use crate::geometry::Vec3;
use crate::parallel::map_collect;
use crate::shape::{casimir_shape_c2, f_constraints, shape_hamiltonian, ShapePoint};
use crate::sphere::{Circulations, SphereState};

/// A regular tetrahedron configuration on the sphere of radius `r`.
///
/// Base coordinates for R = 3 are x1 = (2 sqrt2, 0, -1),
/// x2 = (-sqrt2, sqrt6, -1), x3 = (-sqrt2, -sqrt6, -1), x4 = (0, 0, 3),
/// which give six equal chords of length sqrt(24); everything is scaled by
/// r / 3.
pub fn tetrahedron_sphere_state(r: f64) -> SphereState {
    let s2 = 2.0f64.sqrt();
    let s6 = 6.0f64.sqrt();
    let f = r / 3.0;
    SphereState::new(vec![
        f * Vec3::new(2.0 * s2, 0.0, -1.0),
        f * Vec3::new(-s2, s6, -1.0),
        f * Vec3::new(-s2, -s6, -1.0),
        f * Vec3::new(0.0, 0.0, 3.0),
    ])
}

/// The tetrahedron relative equilibrium in shape coordinates:
/// s = (4/3, 4/3, 4/3), mu_12 = mu_23 = 8i/(3 sqrt3), mu_13 = -8i/(3 sqrt3).
pub fn tetrahedron_equilibrium() -> ShapePoint {
    let v = 8.0 / (3.0 * 3.0f64.sqrt());
    ShapePoint::new(
        vec![4.0 / 3.0; 3],
        vec![
            Complex64::new(0.0, v),
            Complex64::new(0.0, -v),
            Complex64::new(0.0, v),
        ],
    )
}

/// The scalar functions entering the Lyapunov candidate, together with the
/// derivative data needed to check the first-variation conditions and to
/// evaluate the closed-form minors.
/// Scalar function of the Casimir offset.
pub type PhiFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
/// Scalar function of the three constraint values.
pub type PsiFn = Box<dyn Fn(&[f64; 3]) -> f64 + Send + Sync>;

pub struct EnergyCasimirSpec {
    pub phi: PhiFn,
    pub psi: PsiFn,
    /// Phi'(0); must equal -3/2 for the equilibrium to be critical.
    pub phi_deriv_at_zero: f64,
    /// Phi''(0); the closed-form minors assume 0.
    pub phi_second_at_zero: f64,
    /// DPsi(0); must vanish.
    pub psi_grad_at_zero: [f64; 3],
    /// Diagonal of D^2 Psi(0).
    pub psi_hessian_diag_at_zero: [f64; 3],
    /// Whether the off-diagonal second derivatives of Psi vanish at 0 (the
    /// closed-form minors assume they do).
    pub psi_hessian_offdiag_zero: bool,
}

impl Default for EnergyCasimirSpec {
    /// Phi(x) = -(3/2) x and Psi(y) = y1^2 + y2^2 + y3^2.
    fn default() -> Self {
        Self {
            phi: Box::new(|x| -1.5 * x),
            psi: Box::new(|y| y[0] * y[0] + y[1] * y[1] + y[2] * y[2]),
            phi_deriv_at_zero: -1.5,
            phi_second_at_zero: 0.0,
            psi_grad_at_zero: [0.0; 3],
            psi_hessian_diag_at_zero: [2.0; 3],
            psi_hessian_offdiag_zero: true,
        }
    }
}

impl EnergyCasimirSpec {
    /// Default Phi with Psi(y) = sum (d_i / 2) y_i^2, whose Hessian diagonal
    /// is exactly `diag`.
    pub fn with_psi_diag(diag: [f64; 3]) -> Self {
        Self {
            psi: Box::new(move |y| {
                0.5 * (diag[0] * y[0] * y[0] + diag[1] * y[1] * y[1] + diag[2] * y[2] * y[2])
            }),
            psi_hessian_diag_at_zero: diag,
            ..Self::default()
        }
    }

    /// First-variation conditions Phi'(0) = -3/2 and DPsi(0) = 0.
    pub fn check_critical(&self) -> Result<()> {
        if (self.phi_deriv_at_zero + 1.5).abs() > 1e-12 {
            return Err(VortexError::NotCriticalFamily("Phi'(0) must be -3/2"));
        }
        if self.psi_grad_at_zero.iter().any(|g| g.abs() > 1e-12) {
            return Err(VortexError::NotCriticalFamily("DPsi(0) must vanish"));
        }
        Ok(())
    }
}

fn require_four(c: &Circulations) -> Result<()> {
    if c.n() != 4 {
        return Err(VortexError::RequiresFourVortices(c.n()));
    }
    Ok(())
}

/// Lyapunov candidate
/// E(zeta) = H(zeta) + (1/(pi R^2)) [ Phi(C2 - C2|_e)/8 + (3/256) Psi(f_12, f_13, f_23) ].
pub fn energy_casimir(
    zeta: &ShapePoint,
    c: &Circulations,
    spec: &EnergyCasimirSpec,
) -> Result<f64> {
    require_four(c)?;
    let h = shape_hamiltonian(zeta, c)?;
    let c2 = casimir_shape_c2(zeta, c)?;
    let c2_e = casimir_shape_c2(&tetrahedron_equilibrium(), c)?;
    let f = f_constraints(zeta)?;
    let psi_arg = [f[0], f[1], f[2]];
    Ok(h + ((spec.phi)(c2 - c2_e) / 8.0 + 3.0 / 256.0 * (spec.psi)(&psi_arg))
        / (PI * c.radius * c.radius))
}

/// Norm of the central-difference gradient of E at the equilibrium
/// (step 1e-6 per coordinate).
pub fn energy_gradient_norm(c: &Circulations, spec: &EnergyCasimirSpec) -> Result<f64> {
    require_four(c)?;
    let z0 = tetrahedron_equilibrium().to_flat();
    let h = 1e-6;
    let mut acc = 0.0;
    for k in 0..z0.len() {
        let mut plus = z0.clone();
        plus[k] += h;
        let mut minus = z0.clone();
        minus[k] -= h;
        let d = (energy_casimir(&ShapePoint::from_flat(4, &plus), c, spec)?
            - energy_casimir(&ShapePoint::from_flat(4, &minus), c, spec)?)
            / (2.0 * h);
        acc += d * d;
    }
    Ok(acc.sqrt())
}

/// Second-difference Hessian of E at the equilibrium in the chart
/// (s_1, s_2, s_3, Re mu_12, Im mu_12, Re mu_13, Im mu_13, Re mu_23, Im mu_23),
/// with per-coordinate step 1e-4 max(1, |coord|), Richardson-refined from the
/// h and 2h stencils, then symmetrized.
pub fn energy_hessian(c: &Circulations, spec: &EnergyCasimirSpec) -> Result<DMatrix<f64>> {
    require_four(c)?;
    let z0 = tetrahedron_equilibrium().to_flat();
    let dim = z0.len();
    let steps: Vec<f64> = z0.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();

    let eval = |offsets: &[(usize, f64)]| -> Result<f64> {
        let mut z = z0.clone();
        for &(k, dz) in offsets {
            z[k] += dz;
        }
        energy_casimir(&ShapePoint::from_flat(4, &z), c, spec)
    };
    let e0 = eval(&[])?;

    let stencil = |scale: f64| -> Result<DMatrix<f64>> {
        // upper triangle entries, evaluated independently
        let entries: Vec<(usize, usize)> = (0..dim)
            .flat_map(|a| (a..dim).map(move |b| (a, b)))
            .collect();
        let values = map_collect(entries.clone(), |(a, b)| -> Result<f64> {
            let (ha, hb) = (steps[a] * scale, steps[b] * scale);
            if a == b {
                Ok((eval(&[(a, ha)])? - 2.0 * e0 + eval(&[(a, -ha)])?) / (ha * ha))
            } else {
                Ok((eval(&[(a, ha), (b, hb)])? - eval(&[(a, ha), (b, -hb)])?
                    - eval(&[(a, -ha), (b, hb)])?
                    + eval(&[(a, -ha), (b, -hb)])?)
                    / (4.0 * ha * hb))
            }
        });
        let mut m = DMatrix::zeros(dim, dim);
        for ((a, b), v) in entries.into_iter().zip(values) {
            let v = v?;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
        Ok(m)
    };

    let d1 = stencil(1.0)?;
    let d2 = stencil(2.0)?;
    // second-order truncation: T = (4 D(h) - D(2h)) / 3
    let refined = (d1 * 4.0 - d2) / 3.0;
    Ok((&refined + refined.transpose()) / 2.0)
}

/// Leading principal minors of a square matrix.
pub fn leading_minors(m: &DMatrix<f64>) -> Vec<f64> {
    (1..=m.nrows())
        .map(|k| m.view((0, 0), (k, k)).clone_owned().determinant())
        .collect()
}

/// Closed forms of the nine leading principal minors of
/// A = (256/9) pi R^2 D^2 E(zeta_e), assuming Phi''(0) = 0 and a diagonal
/// Psi Hessian.
pub fn hessian_minors_closed(gamma: &[f64; 4], psi_diag: &[f64; 3]) -> Result<[f64; 9]> {
    for (i, g) in gamma.iter().enumerate() {
        if *g == 0.0 {
            return Err(VortexError::ZeroCirculation { i });
        }
    }
    let [g1, g2, g3, g4] = *gamma;
    let [p11, p22, p33] = *psi_diag;
    let d1 = g1 * (g2 + g3 + g4);
    let d2 = g1 * g2 * (g3 + g4) * (g1 + g2 + g3 + g4);
    let d3 = g1
        * g2
        * g3
        * (g1 * g1 * g4
            + g4 * (g2 + g3 + g4) * (g2 + g3 + g4)
            + 2.0 * g1 * (g4 * (g3 + g4) + g2 * (2.0 * g3 + g4)));
    let prod = g1 * g2 * g3 * g4;
    let d4 = d3 * p11 / 3.0;
    let d5 = d2 * prod * p11;
    let d6 = d5 * p22 / 3.0;
    let d7 = d1 * prod * prod * p11 * p22;
    let d8 = d7 * p33 / 3.0;
    let d9 = (d7 / d1) * prod * p33;
    Ok([d1, d2, d3, d4, d5, d6, d7, d8, d9])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The scaled Hessian is positive definite: nonlinear (Lyapunov)
    /// stability of the shape equilibrium.
    Stable,
    /// The method is silent (indefinite or degenerate Hessian).
    Inconclusive,
}

/// Outcome of [`analyze_tetrahedron`].
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub gamma: [f64; 4],
    pub radius: f64,
    /// Central-difference gradient norm of E at the equilibrium.
    pub gradient_norm: f64,
    /// Scaled Hessian A = (256/9) pi R^2 D^2 E(zeta_e), symmetrized.
    pub hessian: DMatrix<f64>,
    /// Eigenvalues of A in ascending order.
    pub eigenvalues: Vec<f64>,
    pub minors_numeric: [f64; 9],
    /// Closed-form minors; `None` when the Lyapunov functions violate the
    /// assumptions behind them (nonzero Phi'' or off-diagonal Psi Hessian).
    pub minors_closed: Option<[f64; 9]>,
    /// Whether d1..d3 match the closed forms within 1e-5 relative.
    pub minors_match_d123: bool,
    /// Largest relative deviation across all nine minors, when closed forms
    /// are available. If this exceeds the tolerance the verdict still stands
    /// on the eigenvalues alone.
    pub minors_max_rel_dev: Option<f64>,
    pub verdict: Verdict,
}

/// Full energy-Casimir analysis for one set of circulations.
pub fn analyze_tetrahedron(
    gamma: [f64; 4],
    radius: f64,
    spec: &EnergyCasimirSpec,
) -> Result<StabilityReport> {
    spec.check_critical()?;
    let c = Circulations::new(gamma.to_vec(), radius)?;
    let gradient_norm = energy_gradient_norm(&c, spec)?;
    let hess = energy_hessian(&c, spec)?;
    let a = &hess * (256.0 / 9.0 * PI * radius * radius);

    let mut eigenvalues: Vec<f64> = a
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let numeric = leading_minors(&a);
    let minors_numeric: [f64; 9] = numeric.try_into().expect("9x9 Hessian");

    let closed_ok = spec.phi_second_at_zero == 0.0 && spec.psi_hessian_offdiag_zero;
    let minors_closed = if closed_ok {
        Some(hessian_minors_closed(&gamma, &spec.psi_hessian_diag_at_zero)?)
    } else {
        None
    };
    let rel_dev = |num: f64, cl: f64| (num - cl).abs() / cl.abs().max(1e-300);
    let minors_match_d123 = minors_closed
        .map(|cl| (0..3).all(|k| rel_dev(minors_numeric[k], cl[k]) <= 1e-5))
        .unwrap_or(false);
    let minors_max_rel_dev = minors_closed.map(|cl| {
        (0..9)
            .map(|k| rel_dev(minors_numeric[k], cl[k]))
            .fold(0.0, f64::max)
    });

    let verdict = if eigenvalues[0] > 0.0 {
        Verdict::Stable
    } else {
        Verdict::Inconclusive
    };

    Ok(StabilityReport {
        gamma,
        radius,
        gradient_norm,
        hessian: a,
        eigenvalues,
        minors_numeric,
        minors_closed,
        minors_match_d123,
        minors_max_rel_dev,
        verdict,
    })
}

/// Analyze a sweep of circulation vectors with the default spec; samples run
/// concurrently when the `parallel` feature is enabled.
pub fn analyze_many(gammas: &[[f64; 4]], radius: f64) -> Vec<Result<StabilityReport>> {
    map_collect(gammas.to_vec(), move |g| {
        analyze_tetrahedron(g, radius, &EnergyCasimirSpec::default())
    })
}
