//! Shape coordinates for the torus-reduced dynamics: the squared last-column
//! moduli s_i = |lambda_iN|^2, the triple products mu_ij, the constraint
//! functions f_ij, the shape Hamiltonian, the reduced Poisson structure and
//! the shape vector field.
//!
//! The Poisson tensor and vector field are obtained by pushing the
//! lambda-level structure through the quotient map along the phase-zero
//! section lambda_iN = sqrt(s_i), lambda_kl = mu_kl / sqrt(s_k s_l); the
//! closed-form brackets are kept as cross-checks in the tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, VortexError};
use crate::liepoisson::{lp_poisson_tensor, lp_rhs, AlgebraPoint};
use crate::pairs::{pair_count, pair_index, pairs};
use crate::sphere::{Circulations, SphereState};
use crate::timeint::{Monitor, VectorField};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Admissibility margin for s_i in (EPS, 4 - EPS) and |mu_ij| >= EPS.
pub const ADMISSIBILITY_EPS: f64 = 1e-10;

/// Reduced shape point zeta = (s_1..s_{N-1}; mu_ij for 1 <= i < j <= N-1).
///
/// The same layout doubles as a tangent vector of the shape chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapePoint {
    pub s: Vec<f64>,
    pub mu: Vec<Complex64>,
}

impl ShapePoint {
    pub fn new(s: Vec<f64>, mu: Vec<Complex64>) -> Self {
        assert_eq!(mu.len(), pair_count(s.len()));
        Self { s, mu }
    }

    /// Number of vortices N (one more than the number of s coordinates).
    pub fn n_vortices(&self) -> usize {
        self.s.len() + 1
    }

    /// Dimension of the flat chart: (N-1)^2.
    pub fn dim(n_vortices: usize) -> usize {
        let m = n_vortices - 1;
        m + 2 * pair_count(m)
    }

    /// Flat chart [s_1..s_{N-1}, Re mu_12, Im mu_12, ...].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(Self::dim(self.n_vortices()));
        y.extend_from_slice(&self.s);
        for m in &self.mu {
            y.push(m.re);
            y.push(m.im);
        }
        y
    }

    pub fn from_flat(n_vortices: usize, y: &[f64]) -> Self {
        let m = n_vortices - 1;
        assert_eq!(y.len(), Self::dim(n_vortices));
        let s = y[..m].to_vec();
        let mu = y[m..]
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        Self { s, mu }
    }

    /// Admissibility: s_i in (eps, 4 - eps) and |mu_ij| >= eps.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vortices();
        for (i, &s) in self.s.iter().enumerate() {
            if s <= ADMISSIBILITY_EPS {
                return Err(VortexError::AntipodalPair { i, j: n - 1 });
            }
            if s >= 4.0 - ADMISSIBILITY_EPS {
                return Err(VortexError::InvalidState(format!(
                    "vortex {i} collides with vortex {} (s = {s})",
                    n - 1
                )));
            }
        }
        for (p, (i, j)) in pairs(n - 1).enumerate() {
            if self.mu[p].norm() < ADMISSIBILITY_EPS {
                return Err(VortexError::AntipodalPair { i, j });
            }
        }
        Ok(())
    }

    pub fn norm(&self) -> f64 {
        self.to_flat().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Extract shape coordinates from a sphere configuration via
/// s_i = 4 - l_iN^2 / R^2, Re mu_ij = |lambda_ij|^2 + s_i + s_j - 4 and
/// Im mu_ij = 2 V_ijN / R^3.
pub fn shape_from_sphere(state: &SphereState, c: &Circulations) -> Result<ShapePoint> {
    state.validate(c)?;
    let n = state.n();
    if n < 2 {
        return Err(VortexError::DimensionMismatch {
            context: "shape coordinates need at least two vortices",
            expected: 2,
            got: n,
        });
    }
    let xs = &state.positions;
    let r2 = c.radius * c.radius;
    let last = n - 1;

    let lam_sq = |i: usize, j: usize| 4.0 - (xs[i] - xs[j]).norm_squared() / r2;

    let mut s = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let v = lam_sq(i, last);
        if v <= ADMISSIBILITY_EPS {
            return Err(VortexError::AntipodalPair { i, j: last });
        }
        s.push(v);
    }
    let mut mu = Vec::with_capacity(pair_count(n - 1));
    for (i, j) in pairs(n - 1) {
        let lij = lam_sq(i, j);
        if lij <= ADMISSIBILITY_EPS {
            return Err(VortexError::AntipodalPair { i, j });
        }
        let re = lij + s[i] + s[j] - 4.0;
        let im = 2.0 * xs[i].dot(&xs[j].cross(&xs[last])) / (r2 * c.radius);
        mu.push(Complex64::new(re, im));
    }
    Ok(ShapePoint { s, mu })
}

/// Shape coordinates of a lambda-level point (s_i = |lambda_iN|^2,
/// mu_ij = lambda_ij conj(lambda_iN) lambda_jN).
pub fn shape_from_lambda(lam: &AlgebraPoint) -> ShapePoint {
    let n = lam.n();
    let last = n - 1;
    let s = (0..n - 1).map(|i| lam.entry(i, last).norm_sqr()).collect();
    let mu = pairs(n - 1)
        .map(|(i, j)| lam.entry(i, j) * lam.entry(i, last).conj() * lam.entry(j, last))
        .collect();
    ShapePoint { s, mu }
}

/// Phase-zero section of the quotient: the lambda point with
/// lambda_i = sqrt2, lambda_iN = sqrt(s_i) and
/// lambda_kl = mu_kl / sqrt(s_k s_l).
pub fn lambda_from_shape(zeta: &ShapePoint, c: &Circulations) -> Result<AlgebraPoint> {
    let n = zeta.n_vortices();
    if n != c.n() {
        return Err(VortexError::DimensionMismatch {
            context: "shape point",
            expected: c.n(),
            got: n,
        });
    }
    zeta.validate()?;
    let last = n - 1;
    let mut lam = AlgebraPoint::zeros(n);
    lam.diag = vec![SQRT2; n];
    for (i, &s) in zeta.s.iter().enumerate() {
        lam.off[pair_index(i, last, n)] = Complex64::new(s.sqrt(), 0.0);
    }
    for (p, (k, l)) in pairs(n - 1).enumerate() {
        lam.off[pair_index(k, l, n)] = zeta.mu[p] / (zeta.s[k] * zeta.s[l]).sqrt();
    }
    Ok(lam)
}

/// Constraint functions f_ij = Re mu_ij - |mu_ij|^2/(s_i s_j) - s_i - s_j + 4,
/// zero on shapes realized by sphere configurations, indexed over pairs
/// 1 <= i < j <= N-1.
pub fn f_constraints(zeta: &ShapePoint) -> Result<Vec<f64>> {
    let m = zeta.s.len();
    for (i, &s) in zeta.s.iter().enumerate() {
        if s == 0.0 {
            return Err(VortexError::InvalidIndex(if i == 0 {
                "s_1 must be nonzero"
            } else {
                "s_i must be nonzero"
            }));
        }
    }
    Ok(pairs(m)
        .enumerate()
        .map(|(p, (i, j))| {
            let mu = zeta.mu[p];
            mu.re - mu.norm_sqr() / (zeta.s[i] * zeta.s[j]) - zeta.s[i] - zeta.s[j] + 4.0
        })
        .collect())
}

/// Shape Hamiltonian
/// H(zeta) = -1/(4 pi R^2) [ sum_{i<j<=N-1} G_i G_j ln(R^2 (4 - |mu_ij|^2/(s_i s_j)))
///                          + G_N sum_i G_i ln(R^2 (4 - s_i)) ].
pub fn shape_hamiltonian(zeta: &ShapePoint, c: &Circulations) -> Result<f64> {
    let n = zeta.n_vortices();
    if n != c.n() {
        return Err(VortexError::DimensionMismatch {
            context: "shape point",
            expected: c.n(),
            got: n,
        });
    }
    let r2 = c.radius * c.radius;
    let last = n - 1;
    let mut h = 0.0;
    for (p, (i, j)) in pairs(n - 1).enumerate() {
        let arg = 4.0 - zeta.mu[p].norm_sqr() / (zeta.s[i] * zeta.s[j]);
        if arg <= 0.0 {
            return Err(VortexError::LogDomain { i, j });
        }
        h += c.gamma[i] * c.gamma[j] * (r2 * arg).ln();
    }
    for (i, &s) in zeta.s.iter().enumerate() {
        let arg = 4.0 - s;
        if arg <= 0.0 {
            return Err(VortexError::LogDomain { i, j: last });
        }
        h += c.gamma[last] * c.gamma[i] * (r2 * arg).ln();
    }
    Ok(-h / (4.0 * std::f64::consts::PI * r2))
}

/// The second Casimir in shape variables:
/// C2 = sum G_i^2 + 1/2 sum_{i<j<=N-1} G_i G_j |mu_ij|^2/(s_i s_j)
///    + (G_N / 2) sum_i G_i s_i.
pub fn casimir_shape_c2(zeta: &ShapePoint, c: &Circulations) -> Result<f64> {
    let n = zeta.n_vortices();
    if n != c.n() {
        return Err(VortexError::DimensionMismatch {
            context: "shape point",
            expected: c.n(),
            got: n,
        });
    }
    for &s in &zeta.s {
        if s == 0.0 {
            return Err(VortexError::InvalidIndex("s_i must be nonzero"));
        }
    }
    let last = n - 1;
    let mut acc: f64 = c.gamma.iter().map(|g| g * g).sum();
    for (p, (i, j)) in pairs(n - 1).enumerate() {
        acc += 0.5 * c.gamma[i] * c.gamma[j] * zeta.mu[p].norm_sqr() / (zeta.s[i] * zeta.s[j]);
    }
    for (i, &s) in zeta.s.iter().enumerate() {
        acc += 0.5 * c.gamma[last] * c.gamma[i] * s;
    }
    Ok(acc)
}

/// Jacobian of the shape chart with respect to the flat lambda chart,
/// evaluated at `lam`. Rows follow the shape layout, columns the
/// [`AlgebraPoint`] flat layout.
fn shape_jacobian(lam: &AlgebraPoint) -> DMatrix<f64> {
    let n = lam.n();
    let last = n - 1;
    let rows = ShapePoint::dim(n);
    let cols = n * n;
    let mut jac = DMatrix::zeros(rows, cols);
    // column index of Re / Im of the lambda pair (i, j)
    let col_re = |i: usize, j: usize| n + 2 * pair_index(i, j, n);

    // s_i = (Re l_iN)^2 + (Im l_iN)^2
    for i in 0..n - 1 {
        let w = lam.entry(i, last);
        jac[(i, col_re(i, last))] = 2.0 * w.re;
        jac[(i, col_re(i, last) + 1)] = 2.0 * w.im;
    }
    // mu_kl = p conj(q) r with p = l_kl, q = l_kN, r = l_lN
    for (pr, (k, l)) in pairs(n - 1).enumerate() {
        let row_re = (n - 1) + 2 * pr;
        let p = lam.entry(k, l);
        let q = lam.entry(k, last);
        let r = lam.entry(l, last);
        let i = Complex64::new(0.0, 1.0);
        let set = |jac: &mut DMatrix<f64>, col: usize, d: Complex64| {
            jac[(row_re, col)] = d.re;
            jac[(row_re + 1, col)] = d.im;
        };
        set(&mut jac, col_re(k, l), q.conj() * r);
        set(&mut jac, col_re(k, l) + 1, i * q.conj() * r);
        set(&mut jac, col_re(k, last), p * r);
        set(&mut jac, col_re(k, last) + 1, -i * p * r);
        set(&mut jac, col_re(l, last), p * q.conj());
        set(&mut jac, col_re(l, last) + 1, i * p * q.conj());
    }
    jac
}

/// Shape vector field: the pushforward of the Lie-Poisson field through the
/// quotient map, evaluated on the phase-zero section.
pub fn shape_rhs(zeta: &ShapePoint, c: &Circulations) -> Result<ShapePoint> {
    let lam = lambda_from_shape(zeta, c)?;
    let lam_dot = lp_rhs(&lam, c)?;
    let jac = shape_jacobian(&lam);
    let flat = jac * nalgebra::DVector::from_vec(lam_dot.to_flat());
    Ok(ShapePoint::from_flat(zeta.n_vortices(), flat.as_slice()))
}

/// Poisson tensor of the shape chart at `zeta`: J P J^T with P the
/// lambda-level tensor on the section.
pub fn shape_poisson_tensor(zeta: &ShapePoint, c: &Circulations) -> Result<DMatrix<f64>> {
    let lam = lambda_from_shape(zeta, c)?;
    let p = lp_poisson_tensor(&lam, c)?;
    let jac = shape_jacobian(&lam);
    Ok(&jac * p * jac.transpose())
}

/// Shape coordinate label: a squared modulus s_i or a complex mu_ij.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeCoord {
    S(usize),
    Mu(usize, usize),
}

/// Poisson bracket of two shape coordinates, complex-valued for mu entries:
/// {f, mu} = {f, Re mu} + i {f, Im mu} and bilinear extension for {mu, mu}.
pub fn shape_bracket(
    a: ShapeCoord,
    b: ShapeCoord,
    zeta: &ShapePoint,
    c: &Circulations,
) -> Result<Complex64> {
    let t = shape_poisson_tensor(zeta, c)?;
    let m = zeta.s.len();
    let idx = |coord: ShapeCoord| -> Result<(usize, Option<usize>)> {
        match coord {
            ShapeCoord::S(i) if i < m => Ok((i, None)),
            ShapeCoord::Mu(i, j) if i < j && j < m => {
                let base = m + 2 * pair_index(i, j, m);
                Ok((base, Some(base + 1)))
            }
            _ => Err(VortexError::InvalidIndex("shape coordinate out of range")),
        }
    };
    let (ar, ai) = idx(a)?;
    let (br, bi) = idx(b)?;
    let entry = |x: usize, y: usize| t[(x, y)];
    let val = match (ai, bi) {
        (None, None) => Complex64::new(entry(ar, br), 0.0),
        (None, Some(bim)) => Complex64::new(entry(ar, br), entry(ar, bim)),
        (Some(aim), None) => Complex64::new(entry(ar, br), entry(aim, br)),
        (Some(aim), Some(bim)) => Complex64::new(
            entry(ar, br) - entry(aim, bim),
            entry(ar, bim) + entry(aim, br),
        ),
    };
    Ok(val)
}

/// Project Re mu_ij onto the constraint set f_ij = 0 by picking the root of
/// the per-pair quadratic closest to the current value. Errors if a pair has
/// no real root.
pub fn project_constraints(zeta: &ShapePoint) -> Result<ShapePoint> {
    let m = zeta.s.len();
    let mut out = zeta.clone();
    for (p, (i, j)) in pairs(m).enumerate() {
        let d = zeta.s[i] * zeta.s[j];
        let im2 = zeta.mu[p].im * zeta.mu[p].im;
        // Re^2 - D Re + Im^2 + D (s_i + s_j - 4) = 0
        let disc = d * d - 4.0 * (im2 + d * (zeta.s[i] + zeta.s[j] - 4.0));
        if disc < 0.0 {
            return Err(VortexError::InvalidState(format!(
                "constraint f_{}_{} has no real root",
                i + 1,
                j + 1
            )));
        }
        let sq = disc.sqrt();
        let r1 = 0.5 * (d + sq);
        let r2 = 0.5 * (d - sq);
        let cur = zeta.mu[p].re;
        let re = if (r1 - cur).abs() <= (r2 - cur).abs() {
            r1
        } else {
            r2
        };
        out.mu[p].re = re;
    }
    Ok(out)
}

/// Vector field over the flat shape chart (dimension (N-1)^2).
pub struct ShapeField {
    c: Circulations,
}

impl ShapeField {
    pub fn new(c: Circulations) -> Self {
        Self { c }
    }
}

impl VectorField for ShapeField {
    fn dim(&self) -> usize {
        ShapePoint::dim(self.c.n())
    }

    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        let zeta = ShapePoint::from_flat(self.c.n(), y);
        let dot = shape_rhs(&zeta, &self.c)?;
        dydt.copy_from_slice(&dot.to_flat());
        Ok(())
    }
}

/// Monitors for the shape level: H, C2 and every constraint f_i_j.
pub fn monitors(c: &Circulations) -> Vec<Monitor> {
    let n = c.n();
    let mut out = Vec::new();
    let cc = c.clone();
    out.push(Monitor::new("H", move |y: &[f64]| {
        shape_hamiltonian(&ShapePoint::from_flat(cc.n(), y), &cc).unwrap_or(f64::NAN)
    }));
    let cc = c.clone();
    out.push(Monitor::new("C2", move |y: &[f64]| {
        casimir_shape_c2(&ShapePoint::from_flat(cc.n(), y), &cc).unwrap_or(f64::NAN)
    }));
    for (p, (i, j)) in pairs(n - 1).enumerate() {
        let cc = c.clone();
        out.push(Monitor::new(
            format!("f_{}_{}", i + 1, j + 1),
            move |y: &[f64]| {
                f_constraints(&ShapePoint::from_flat(cc.n(), y))
                    .map(|f| f[p])
                    .unwrap_or(f64::NAN)
            },
        ));
    }
    out
}
