//! Hopf map between C^2 and R^3, the su(2) <-> R^3 identification, and the
//! C^2/R^3 vector identities used by every other module.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Result, VortexError};

/// Position or tangent vector in R^3.
pub type Vec3 = nalgebra::Vector3<f64>;

/// One vortex's lifted coordinates phi = (z, u) in C^2.
///
/// When the spinor represents a vortex on the sphere of radius R, the squared
/// norm |z|^2 + |u|^2 equals R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorPair {
    pub z: Complex64,
    pub u: Complex64,
}

impl SpinorPair {
    pub fn new(z: Complex64, u: Complex64) -> Self {
        Self { z, u }
    }

    pub fn from_re(z: f64, u: f64) -> Self {
        Self {
            z: Complex64::new(z, 0.0),
            u: Complex64::new(u, 0.0),
        }
    }

    /// Squared C^2 norm |z|^2 + |u|^2.
    pub fn norm_sq(&self) -> f64 {
        self.z.norm_sqr() + self.u.norm_sqr()
    }

    /// Hermitian inner product phi_a^* phi_b (conjugate-linear in `self`).
    pub fn inner(&self, other: &SpinorPair) -> Complex64 {
        self.z.conj() * other.z + self.u.conj() * other.u
    }

    /// Multiply both components by the unit phase e^{i theta}.
    pub fn phased(&self, theta: f64) -> SpinorPair {
        let p = Complex64::from_polar(1.0, theta);
        SpinorPair {
            z: self.z * p,
            u: self.u * p,
        }
    }
}

/// Hopf projection x = (2 Re(conj(z) u), 2 Im(conj(z) u), |z|^2 - |u|^2).
///
/// Satisfies |x| = |z|^2 + |u|^2 and is invariant under a common phase.
pub fn hopf_project(phi: &SpinorPair) -> Vec3 {
    let zu = phi.z.conj() * phi.u;
    Vec3::new(2.0 * zu.re, 2.0 * zu.im, phi.z.norm_sqr() - phi.u.norm_sqr())
}

/// Differential of the Hopf projection: the R^3 velocity of `hopf_project`
/// along a C^2 velocity `dphi` at `phi`.
pub fn hopf_differential(phi: &SpinorPair, dphi: &SpinorPair) -> Vec3 {
    // d(conj(z) u) = conj(dz) u + conj(z) du
    let d_zu = dphi.z.conj() * phi.u + phi.z.conj() * dphi.u;
    let d3 = 2.0 * (phi.z.conj() * dphi.z).re - 2.0 * (phi.u.conj() * dphi.u).re;
    Vec3::new(2.0 * d_zu.re, 2.0 * d_zu.im, d3)
}

/// Section of the Hopf bundle: returns phi with `hopf_project(phi) = x` and
/// fiber phase `theta`.
///
/// Branches on the sign of x3 so the square root argument is at least |x|
/// and the division never cancels. Errors on the zero vector.
pub fn hopf_lift(x: &Vec3, theta: f64) -> Result<SpinorPair> {
    let r = x.norm();
    if r == 0.0 {
        return Err(VortexError::DegeneratePoint);
    }
    let base = if x[2] >= 0.0 {
        let z = ((r + x[2]) / 2.0).sqrt();
        let u = Complex64::new(x[0], x[1]) / (2.0 * z);
        SpinorPair {
            z: Complex64::new(z, 0.0),
            u,
        }
    } else {
        // southern hemisphere: |u| stays away from zero instead
        let u = ((r - x[2]) / 2.0).sqrt();
        let z = Complex64::new(x[0], -x[1]) / (2.0 * u);
        SpinorPair {
            z,
            u: Complex64::new(u, 0.0),
        }
    };
    Ok(base.phased(theta))
}

/// The two pair identities relating C^2 inner products to R^3 geometry:
/// returns `(dot, dist2)` with
/// `dot  = 2 |phi_a^* phi_b|^2 - |phi_a|^2 |phi_b|^2`
/// `dist2 = (|phi_a|^2 + |phi_b|^2)^2 - 4 |phi_a^* phi_b|^2`,
/// equal to the dot product and squared distance of the Hopf projections.
pub fn pair_identities(phi_a: &SpinorPair, phi_b: &SpinorPair) -> (f64, f64) {
    let ab2 = phi_a.inner(phi_b).norm_sqr();
    let na = phi_a.norm_sq();
    let nb = phi_b.norm_sq();
    let dot = 2.0 * ab2 - na * nb;
    let dist2 = (na + nb) * (na + nb) - 4.0 * ab2;
    (dot, dist2)
}

/// Triple product (phi_a^* phi_b)(phi_c^* phi_a)(phi_b^* phi_c).
///
/// Its imaginary part is one quarter of the R^3 triple product of the
/// projections; on a common sphere |phi|^2 = R its real part equals
/// (R/2)(|phi_a^* phi_b|^2 + |phi_c^* phi_a|^2 + |phi_b^* phi_c|^2 - R^2).
pub fn triple_product_c2(
    phi_a: &SpinorPair,
    phi_b: &SpinorPair,
    phi_c: &SpinorPair,
) -> Complex64 {
    phi_a.inner(phi_b) * phi_c.inner(phi_a) * phi_b.inner(phi_c)
}

/// Identification of R^3 with su(2): xi -> sum_j xi_j tau_j where
/// tau_1, tau_2, tau_3 are -i/2 times the Pauli matrices, so that
/// [tau_i, tau_j] = tau_k for even permutations.
pub fn su2_from_vec(xi: &Vec3) -> Matrix2<Complex64> {
    let half = Complex64::new(0.0, -0.5);
    Matrix2::new(
        half * xi[2],
        half * Complex64::new(xi[0], -xi[1]),
        half * Complex64::new(xi[0], xi[1]),
        half * -xi[2],
    )
}

/// Inverse of [`su2_from_vec`]. Errors unless the matrix is anti-Hermitian
/// and traceless (within `1e-12` of the matrix scale).
pub fn vec_from_su2(m: &Matrix2<Complex64>) -> Result<Vec3> {
    let scale = m.iter().map(|e| e.norm()).fold(0.0, f64::max).max(1.0);
    let tol = 1e-12 * scale;
    let anti = (m[(0, 0)] + m[(0, 0)].conj()).norm()
        + (m[(1, 1)] + m[(1, 1)].conj()).norm()
        + (m[(0, 1)] + m[(1, 0)].conj()).norm();
    if anti > tol {
        return Err(VortexError::InvalidMatrix("not anti-Hermitian"));
    }
    if (m[(0, 0)] + m[(1, 1)]).norm() > tol {
        return Err(VortexError::InvalidMatrix("not traceless"));
    }
    // m = -(i/2) [[x3, x1 - i x2], [x1 + i x2, -x3]]
    let two_i = Complex64::new(0.0, 2.0);
    let x3 = (two_i * m[(0, 0)]).re;
    let w = two_i * m[(1, 0)]; // x1 + i x2
    Ok(Vec3::new(w.re, w.im, x3))
}

/// Inner product <xi, eta> = 2 tr(xi^* eta) used to identify su(2)^* and
/// u(N)_Gamma^* with the corresponding algebras.
pub fn algebra_inner_2x2(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> f64 {
    let t = (a.adjoint() * b).trace();
    2.0 * t.re
}
