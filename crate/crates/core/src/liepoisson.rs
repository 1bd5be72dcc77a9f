//! The Lie algebra u(N)_Gamma and its dual: modified bracket, ad*, the
//! coordinate Lie-Poisson bracket, the collective Hamiltonian, the reduced
//! vector field and the Casimir family with the Faddeev-LeVerrier
//! dependence check.
//!
//! Points and elements are stored in the orthonormal-basis coordinates
//! (lambda_1..lambda_N; lambda_ij for i < j), packed into the anti-Hermitian
//! matrix -(i/2) [[sqrt2 l_1, l_12, ...], [conj(l_12), sqrt2 l_2, ...], ...]
//! when matrix arithmetic is needed. Entries with i >= j follow the extended
//! convention lambda_ji = conj(lambda_ij), lambda_ii = sqrt2 lambda_i.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, VortexError};
use crate::pairs::{pair_count, pair_index, pairs};
use crate::sphere::Circulations;
use crate::timeint::{Monitor, VectorField};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Element of u(N)_Gamma^* in basis coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraPoint {
    /// lambda_i, the coefficients of the diagonal basis elements.
    pub diag: Vec<f64>,
    /// lambda_ij for i < j in lexicographic order.
    pub off: Vec<Complex64>,
}

/// Elements of u(N)_Gamma share the coordinate layout of dual points.
pub type AlgebraElement = AlgebraPoint;

impl AlgebraPoint {
    pub fn new(diag: Vec<f64>, off: Vec<Complex64>) -> Self {
        assert_eq!(off.len(), pair_count(diag.len()));
        Self { diag, off }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![Complex64::new(0.0, 0.0); pair_count(n)],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Extended entry lambda_ij for arbitrary indices.
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.off[pair_index(i, j, self.n())],
            Greater => self.off[pair_index(j, i, self.n())].conj(),
            Equal => Complex64::new(SQRT2 * self.diag[i], 0.0),
        }
    }

    /// Packed anti-Hermitian matrix -(i/2) [sqrt2 l_i on the diagonal, l_ij above].
    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let n = self.n();
        let half_i = Complex64::new(0.0, -0.5);
        DMatrix::from_fn(n, n, |r, c| half_i * self.entry(r, c))
    }

    /// Inverse of [`Self::to_matrix`]. Errors if the matrix is not anti-Hermitian
    /// within `1e-12` of its scale.
    pub fn from_matrix(m: &DMatrix<Complex64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(VortexError::InvalidMatrix("not square"));
        }
        let scale = m.iter().map(|e| e.norm()).fold(0.0, f64::max).max(1.0);
        if (m + m.adjoint()).norm() > 1e-12 * scale * n as f64 {
            return Err(VortexError::InvalidMatrix("not anti-Hermitian"));
        }
        let two_i = Complex64::new(0.0, 2.0);
        let diag = (0..n).map(|i| (two_i * m[(i, i)]).re / SQRT2).collect();
        let off = pairs(n).map(|(i, j)| two_i * m[(i, j)]).collect();
        Ok(Self { diag, off })
    }

    /// Flat real chart [lambda_1..lambda_N, Re l_12, Im l_12, ...].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.n() * self.n());
        y.extend_from_slice(&self.diag);
        for w in &self.off {
            y.push(w.re);
            y.push(w.im);
        }
        y
    }

    pub fn from_flat(n: usize, y: &[f64]) -> Self {
        assert_eq!(y.len(), n * n);
        let diag = y[..n].to_vec();
        let off = y[n..]
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        Self { diag, off }
    }

    /// Coordinate 2-norm (the norm induced by <a, b> = 2 tr(a^* b)).
    pub fn norm(&self) -> f64 {
        algebra_inner(self, self).sqrt()
    }
}

/// Inner product <a, b> = 2 tr(a^* b); the basis coordinates are orthonormal
/// for it, so this is the flat-chart dot product.
pub fn algebra_inner(a: &AlgebraPoint, b: &AlgebraPoint) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.diag.iter().zip(&b.diag) {
        acc += x * y;
    }
    for (x, y) in a.off.iter().zip(&b.off) {
        acc += x.re * y.re + x.im * y.im;
    }
    acc
}

fn check_dims(a: &AlgebraPoint, c: &Circulations, context: &'static str) -> Result<()> {
    if a.n() != c.n() {
        return Err(VortexError::DimensionMismatch {
            context,
            expected: c.n(),
            got: a.n(),
        });
    }
    Ok(())
}

fn d_gamma_inv(c: &Circulations) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        c.n(),
        c.gamma.iter().map(|g| Complex64::new(1.0 / g, 0.0)),
    ))
}

fn d_gamma(c: &Circulations) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        c.n(),
        c.gamma.iter().map(|g| Complex64::new(*g, 0.0)),
    ))
}

/// Modified Lie bracket [xi, eta]_Gamma = xi D^-1 eta - eta D^-1 xi.
pub fn bracket_gamma(
    xi: &AlgebraElement,
    eta: &AlgebraElement,
    c: &Circulations,
) -> Result<AlgebraElement> {
    check_dims(xi, c, "bracket_gamma xi")?;
    check_dims(eta, c, "bracket_gamma eta")?;
    let (xm, em, dinv) = (xi.to_matrix(), eta.to_matrix(), d_gamma_inv(c));
    let m = &xm * &dinv * &em - &em * &dinv * &xm;
    AlgebraPoint::from_matrix(&m)
}

/// Coadjoint representation ad*_xi lambda = lambda xi D^-1 - D^-1 xi lambda.
pub fn ad_star(
    xi: &AlgebraElement,
    lam: &AlgebraPoint,
    c: &Circulations,
) -> Result<AlgebraPoint> {
    check_dims(xi, c, "ad_star xi")?;
    check_dims(lam, c, "ad_star lambda")?;
    let (xm, lm, dinv) = (xi.to_matrix(), lam.to_matrix(), d_gamma_inv(c));
    let m = &lm * &xm * &dinv - &dinv * &xm * &lm;
    AlgebraPoint::from_matrix(&m)
}

/// Coordinate index into u(N)_Gamma^*: a diagonal entry or an off-diagonal
/// complex coordinate (any i != j, using the extended-entry convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpCoord {
    Diag(usize),
    Off(usize, usize),
}

/// Lie-Poisson bracket of two coordinate functions evaluated at `lam`.
///
/// All cases reduce to the extended-entry formula
/// {l_ab, l_cd} = i (delta_ad l_cb / Gamma_a - delta_bc l_ad / Gamma_b),
/// with a diagonal coordinate entering as l_ii / sqrt2.
pub fn lp_bracket(a: LpCoord, b: LpCoord, lam: &AlgebraPoint, c: &Circulations) -> Result<Complex64> {
    let n = c.n();
    let check = |i: usize, j: usize| -> Result<()> {
        if i >= n || j >= n {
            return Err(VortexError::InvalidIndex("lp_bracket index out of range"));
        }
        if i == j {
            return Err(VortexError::InvalidIndex(
                "off-diagonal coordinate needs i != j",
            ));
        }
        Ok(())
    };
    let (ab, fa) = match a {
        LpCoord::Diag(i) => {
            if i >= n {
                return Err(VortexError::InvalidIndex("lp_bracket index out of range"));
            }
            ((i, i), 1.0 / SQRT2)
        }
        LpCoord::Off(i, j) => {
            check(i, j)?;
            ((i, j), 1.0)
        }
    };
    let (cd, fb) = match b {
        LpCoord::Diag(i) => {
            if i >= n {
                return Err(VortexError::InvalidIndex("lp_bracket index out of range"));
            }
            ((i, i), 1.0 / SQRT2)
        }
        LpCoord::Off(i, j) => {
            check(i, j)?;
            ((i, j), 1.0)
        }
    };
    Ok(fa * fb * ext_bracket(ab, cd, lam, c))
}

/// {l_ab, l_cd} for extended entries.
fn ext_bracket(
    (a, b): (usize, usize),
    (c_, d): (usize, usize),
    lam: &AlgebraPoint,
    c: &Circulations,
) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    if a == d {
        acc += lam.entry(c_, b) / c.gamma[a];
    }
    if b == c_ {
        acc -= lam.entry(a, d) / c.gamma[b];
    }
    i * acc
}

/// Index of a real coordinate of the flat chart of [`AlgebraPoint`].
fn flat_coords(n: usize) -> Vec<(LpCoord, bool)> {
    // (coordinate, takes_imaginary_part)
    let mut v: Vec<(LpCoord, bool)> = (0..n).map(|i| (LpCoord::Diag(i), false)).collect();
    for (i, j) in pairs(n) {
        v.push((LpCoord::Off(i, j), false));
        v.push((LpCoord::Off(i, j), true));
    }
    v
}

/// Poisson tensor over the flat real chart: P_ab = {y_a, y_b}(lam).
pub fn lp_poisson_tensor(lam: &AlgebraPoint, c: &Circulations) -> Result<DMatrix<f64>> {
    check_dims(lam, c, "lp_poisson_tensor")?;
    let n = c.n();
    let coords = flat_coords(n);
    let dim = coords.len();
    let mut p = DMatrix::zeros(dim, dim);
    for (ia, &(ca, im_a)) in coords.iter().enumerate() {
        for (ib, &(cb, im_b)) in coords.iter().enumerate().skip(ia + 1) {
            let val = real_bracket(ca, im_a, cb, im_b, lam, c)?;
            p[(ia, ib)] = val;
            p[(ib, ia)] = -val;
        }
    }
    Ok(p)
}

/// Bracket of two real coordinate functions (Re or Im parts of complex
/// coordinates, or diagonal entries).
fn real_bracket(
    a: LpCoord,
    im_a: bool,
    b: LpCoord,
    im_b: bool,
    lam: &AlgebraPoint,
    c: &Circulations,
) -> Result<f64> {
    let conj_of = |x: LpCoord| match x {
        LpCoord::Diag(i) => LpCoord::Diag(i),
        LpCoord::Off(i, j) => LpCoord::Off(j, i),
    };
    // B = {w_a, w_b}, C = {w_a, conj(w_b)}
    let bb = lp_bracket(a, b, lam, c)?;
    let cc = lp_bracket(a, conj_of(b), lam, c)?;
    Ok(match (im_a, im_b) {
        // {Re a, Re b} = Re(B + C) / 2
        (false, false) => 0.5 * (bb.re + cc.re),
        // {Re a, Im b} = (Im B - Im C) / 2
        (false, true) => 0.5 * (bb.im - cc.im),
        // {Im a, Re b} = Im(B + C) / 2
        (true, false) => 0.5 * (bb.im + cc.im),
        // {Im a, Im b} = Re(C - B) / 2
        (true, true) => 0.5 * (cc.re - bb.re),
    })
}

/// Collective Hamiltonian h(lambda) = -1/(4 pi R^2) sum_{i<j} Gamma_i Gamma_j
/// ln(R^2 ((lambda_i + lambda_j)^2 / 2 - |lambda_ij|^2)).
pub fn collective_h(lam: &AlgebraPoint, c: &Circulations) -> Result<f64> {
    check_dims(lam, c, "collective_h")?;
    let r2 = c.radius * c.radius;
    let mut h = 0.0;
    for (i, j) in pairs(lam.n()) {
        let g = pair_log_arg(lam, i, j);
        if g <= 0.0 {
            return Err(VortexError::LogDomain { i, j });
        }
        h += c.gamma[i] * c.gamma[j] * (r2 * g).ln();
    }
    Ok(-h / (4.0 * PI * r2))
}

fn pair_log_arg(lam: &AlgebraPoint, i: usize, j: usize) -> f64 {
    let s = lam.diag[i] + lam.diag[j];
    0.5 * s * s - lam.entry(i, j).norm_sqr()
}

/// Analytic functional derivative dh/dlambda as an algebra element.
pub fn grad_h(lam: &AlgebraPoint, c: &Circulations) -> Result<AlgebraElement> {
    check_dims(lam, c, "grad_h")?;
    let n = lam.n();
    let pref = -1.0 / (4.0 * PI * c.radius * c.radius);
    let mut out = AlgebraPoint::zeros(n);
    for (i, j) in pairs(n) {
        let g = pair_log_arg(lam, i, j);
        if g <= 0.0 {
            return Err(VortexError::LogDomain { i, j });
        }
        let w = c.gamma[i] * c.gamma[j] / g;
        let s = lam.diag[i] + lam.diag[j];
        out.diag[i] += pref * w * s;
        out.diag[j] += pref * w * s;
        // d/d(Re, Im) of -|l_ij|^2 inside the log
        out.off[pair_index(i, j, n)] += -2.0 * pref * w * lam.entry(i, j);
    }
    Ok(out)
}

/// Central finite-difference functional derivative; debug fallback for
/// [`grad_h`].
pub fn grad_h_fd(lam: &AlgebraPoint, c: &Circulations, step: f64) -> Result<AlgebraElement> {
    check_dims(lam, c, "grad_h_fd")?;
    let n = lam.n();
    let y0 = lam.to_flat();
    let mut g = vec![0.0; y0.len()];
    for k in 0..y0.len() {
        let mut plus = y0.clone();
        plus[k] += step;
        let mut minus = y0.clone();
        minus[k] -= step;
        g[k] = (collective_h(&AlgebraPoint::from_flat(n, &plus), c)?
            - collective_h(&AlgebraPoint::from_flat(n, &minus), c)?)
            / (2.0 * step);
    }
    Ok(AlgebraPoint::from_flat(n, &g))
}

/// Lie-Poisson vector field lambdadot = ad*_{dh/dlambda} lambda.
pub fn lp_rhs(lam: &AlgebraPoint, c: &Circulations) -> Result<AlgebraPoint> {
    ad_star(&grad_h(lam, c)?, lam, c)
}

/// Casimir C_j(lambda) = tr((i D_Gamma lambda)^j); real for every j.
pub fn casimir(lam: &AlgebraPoint, j: usize, c: &Circulations) -> Result<f64> {
    check_dims(lam, c, "casimir")?;
    if j == 0 {
        return Err(VortexError::InvalidIndex("casimir order must be >= 1"));
    }
    let a = casimir_base_matrix(lam, c);
    Ok(matrix_power_trace(&a, j).re)
}

/// i D_Gamma lambda, the matrix whose power traces are the Casimirs.
pub fn casimir_base_matrix(lam: &AlgebraPoint, c: &Circulations) -> DMatrix<Complex64> {
    (d_gamma(c) * lam.to_matrix()) * Complex64::new(0.0, 1.0)
}

fn matrix_power_trace(a: &DMatrix<Complex64>, j: usize) -> Complex64 {
    let mut p = a.clone();
    for _ in 1..j {
        p = &p * a;
    }
    p.trace()
}

/// Gradient of C_j in the flat real chart, from
/// dC_j(dl) = j tr((i D l)^{j-1} i D dl).
pub fn casimir_gradient(lam: &AlgebraPoint, j: usize, c: &Circulations) -> Result<Vec<f64>> {
    check_dims(lam, c, "casimir_gradient")?;
    if j == 0 {
        return Err(VortexError::InvalidIndex("casimir order must be >= 1"));
    }
    let n = lam.n();
    let a = casimir_base_matrix(lam, c);
    let mut apow = DMatrix::<Complex64>::identity(n, n);
    for _ in 1..j {
        apow = &apow * &a;
    }
    let lead = (&apow * d_gamma(c)) * Complex64::new(0.0, j as f64);
    // pair with each basis direction
    let dim = n * n;
    let mut grad = vec![0.0; dim];
    for (k, g) in grad.iter_mut().enumerate() {
        let mut unit = vec![0.0; dim];
        unit[k] = 1.0;
        let basis = AlgebraPoint::from_flat(n, &unit).to_matrix();
        *g = (&lead * basis).trace().re;
    }
    Ok(grad)
}

/// Faddeev-LeVerrier characteristic polynomial coefficients c_1..c_N with
/// the sign convention p(x) = x^N - c_1 x^{N-1} - ... - c_N.
pub fn faddeev_leverrier(a: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(VortexError::InvalidMatrix("not a nonempty square matrix"));
    }
    let mut coeffs = Vec::with_capacity(n);
    let mut ak = a.clone();
    for k in 1..=n {
        let ck = ak.trace() / k as f64;
        coeffs.push(ck);
        if k < n {
            let bk = &ak - DMatrix::from_diagonal_element(n, n, ck);
            ak = a * bk;
        }
    }
    Ok(coeffs)
}

/// Residual of the trace identity tr(A^N) = sum_{m<N} c_m tr(A^{N-m}) + N c_N,
/// normalized by the magnitude of tr(A^N). This is the numerical form of the
/// dependence of C_N on the lower-order Casimirs.
pub fn casimir_dependence_residual(a: &DMatrix<Complex64>) -> Result<f64> {
    let n = a.nrows();
    let coeffs = faddeev_leverrier(a)?;
    let traces: Vec<Complex64> = (1..=n).map(|k| matrix_power_trace(a, k)).collect();
    let mut recon = Complex64::new(n as f64, 0.0) * coeffs[n - 1];
    for m in 1..n {
        recon += coeffs[m - 1] * traces[n - m - 1];
    }
    let scale = traces[n - 1].norm().max(1.0);
    Ok((traces[n - 1] - recon).norm() / scale)
}

/// Vector field over the flat chart of [`AlgebraPoint`] (dimension N^2).
pub struct LiePoissonField {
    c: Circulations,
}

impl LiePoissonField {
    pub fn new(c: Circulations) -> Self {
        Self { c }
    }
}

impl VectorField for LiePoissonField {
    fn dim(&self) -> usize {
        self.c.n() * self.c.n()
    }

    fn eval(&self, _t: f64, y: &[f64], dydt: &mut [f64]) -> Result<()> {
        let lam = AlgebraPoint::from_flat(self.c.n(), y);
        let dot = lp_rhs(&lam, &self.c)?;
        dydt.copy_from_slice(&dot.to_flat());
        Ok(())
    }
}

/// Monitors for the Lie-Poisson level: h and the Casimirs C_1..C_N.
pub fn monitors(c: &Circulations) -> Vec<Monitor> {
    let n = c.n();
    let mut out = Vec::new();
    let cc = c.clone();
    out.push(Monitor::new("h", move |y: &[f64]| {
        collective_h(&AlgebraPoint::from_flat(cc.n(), y), &cc).unwrap_or(f64::NAN)
    }));
    for j in 1..=n {
        let cc = c.clone();
        out.push(Monitor::new(format!("C{j}"), move |y: &[f64]| {
            casimir(&AlgebraPoint::from_flat(cc.n(), y), j, &cc).unwrap_or(f64::NAN)
        }));
    }
    out
}
