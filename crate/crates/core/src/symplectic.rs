//! 4×4 real linear algebra in the section basis `(e_φ, e_s, e_ρ, e_u)`.
//!
//! The symplectic form is `ω = dρ∧dφ + ds∧du`, whose matrix `J` satisfies
//! `ω(x, y) = xᵀ J y`. Every matrix the crate calls symplectic obeys
//! `Mᵀ J M = J` for this `J`.

use std::f64::consts::TAU;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::DoubleDouble;

pub const PHI: usize = 0;
pub const S: usize = 1;
pub const RHO: usize = 2;
pub const U: usize = 3;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed angular difference `a - b` reduced to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

/// A point of the Poincaré section, components ordered `(φ, s, ρ, u)`.
///
/// `φ` is kept in `[0, 2π)`; every constructor and arithmetic helper wraps it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Vec4 {
    phi: f64,
    s: f64,
    rho: f64,
    u: f64,
}

impl Vec4 {
    pub fn new(phi: f64, s: f64, rho: f64, u: f64) -> Self {
        Vec4 {
            phi: wrap_angle(phi),
            s,
            rho,
            u,
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.phi, self.s, self.rho, self.u]
    }

    /// Adds a tangent vector; the angle wraps.
    pub fn offset(self, d: [f64; 4]) -> Self {
        Vec4::new(self.phi + d[0], self.s + d[1], self.rho + d[2], self.u + d[3])
    }

    /// Tangent vector from `other` to `self`, with the φ-component reduced to `(-π, π]`.
    pub fn displacement_from(self, other: Vec4) -> [f64; 4] {
        [
            angle_diff(self.phi, other.phi),
            self.s - other.s,
            self.rho - other.rho,
            self.u - other.u,
        ]
    }
}

impl From<[f64; 4]> for Vec4 {
    fn from(a: [f64; 4]) -> Self {
        Vec4::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Vec4> for [f64; 4] {
    fn from(v: Vec4) -> Self {
        v.to_array()
    }
}

/// Dense 4×4 real matrix, row-major, `m[i][j]` with `i, j ∈ {φ, s, ρ, u}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const fn zero() -> Self {
        Mat4([[0.0; 4]; 4])
    }

    pub const fn identity() -> Self {
        Mat4([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
    }

    pub fn diag(d: [f64; 4]) -> Self {
        let mut m = Mat4::zero();
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    /// Builds a matrix from 16 row-major entries.
    pub fn from_row_major(entries: &[f64]) -> Result<Self> {
        if entries.len() != 16 {
            return Err(Error::Parse(format!(
                "expected 16 matrix entries, got {}",
                entries.len()
            )));
        }
        let mut m = Mat4::zero();
        for (k, v) in entries.iter().enumerate() {
            m.0[k / 4][k % 4] = *v;
        }
        Ok(m)
    }

    pub fn row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for i in 0..4 {
            out[4 * i..4 * i + 4].copy_from_slice(&self.0[i]);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Mat4::zero();
        for i in 0..4 {
            for j in 0..4 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn apply(&self, v: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn sub(&self, other: &Mat4) -> Mat4 {
        let mut d = *self;
        for i in 0..4 {
            for j in 0..4 {
                d.0[i][j] -= other.0[i][j];
            }
        }
        d
    }

    pub fn scale(&self, k: f64) -> Mat4 {
        let mut d = *self;
        d.0.iter_mut().flatten().for_each(|v| *v *= k);
        d
    }

    pub(crate) fn to_nalgebra(self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.0[i][j])
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Mul for Mat4 {
    type Output = Mat4;

    fn mul(self, rhs: Mat4) -> Mat4 {
        mat_mul(&self, &rhs)
    }
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = Mat4::zero();
    for i in 0..4 {
        for j in 0..4 {
            c.0[i][j] = (0..4).map(|k| a.0[i][k] * b.0[k][j]).sum();
        }
    }
    c
}

/// The matrix `J` of `ω = dρ∧dφ + ds∧du`.
pub fn symplectic_form() -> Mat4 {
    let mut j = Mat4::zero();
    j[(RHO, PHI)] = 1.0;
    j[(PHI, RHO)] = -1.0;
    j[(S, U)] = 1.0;
    j[(U, S)] = -1.0;
    j
}

/// Max-norm of `mᵀ J m − J`.
pub fn symplectic_residual(m: &Mat4) -> f64 {
    let j = symplectic_form();
    (m.transpose() * j * *m).sub(&j).max_abs()
}

pub fn is_symplectic(m: &Mat4, tol: f64) -> bool {
    let r = symplectic_residual(m);
    m.is_finite() && r.is_finite() && r <= tol
}

/// `m⁻¹ = J⁻¹ mᵀ J = −J mᵀ J` for symplectic `m`.
///
/// Only signs and positions change, so the result is exact in floating point.
pub fn symplectic_inverse(m: &Mat4) -> Mat4 {
    let j = symplectic_form();
    (j * m.transpose() * j).scale(-1.0)
}

/// Chordal distance on the Riemann sphere.
pub fn chordal_distance(z: Complex64, w: Complex64) -> f64 {
    // hypot keeps huge moduli from overflowing to inf/inf
    2.0 * ((z - w).norm() / 1f64.hypot(z.norm())) / 1f64.hypot(w.norm())
}

/// Greedy nearest-pair matching of two multisets under the chordal metric.
///
/// Returns the largest distance among the matched pairs.
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets must have equal size");
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for _ in 0..a.len() {
        let mut best = (f64::INFINITY, 0, 0);
        for (i, za) in a.iter().enumerate().filter(|(i, _)| !used_a[*i]) {
            for (j, zb) in b.iter().enumerate().filter(|(j, _)| !used_b[*j]) {
                let d = chordal_distance(*za, *zb);
                if d < best.0 || best.0.is_nan() {
                    best = (d, i, j);
                }
            }
        }
        used_a[best.1] = true;
        used_b[best.2] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// Four eigenvalues with their distances to the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: [Complex64; 4],
    pub unit_circle_distances: [f64; 4],
}

impl Spectrum {
    pub fn from_eigenvalues(eigenvalues: [Complex64; 4]) -> Self {
        Spectrum {
            eigenvalues,
            unit_circle_distances: eigenvalues.map(|z| (z.norm() - 1.0).abs()),
        }
    }

    pub fn min_unit_circle_distance(&self) -> f64 {
        self.unit_circle_distances
            .iter()
            .fold(f64::INFINITY, |a, b| a.min(*b))
    }

    /// Coefficients `c0..c4` of `∏ (x − zᵢ)`, leading coefficient first.
    pub fn characteristic_coefficients(&self) -> [Complex64; 5] {
        poly_from_roots(&self.eigenvalues)
    }
}

pub fn poly_from_roots(roots: &[Complex64; 4]) -> [Complex64; 5] {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, ck) in c.iter().enumerate() {
            next[k] += ck;
            next[k + 1] -= ck * r;
        }
        c = next;
    }
    [c[0], c[1], c[2], c[3], c[4]]
}

const SCHUR_MAX_ITER: usize = 500;

/// Shifts tried, in units of the matrix scale, when the Francis iteration stalls.
const SCHUR_RETRY_SHIFTS: [f64; 4] = [0.3183, -0.5772, 0.7071, -1.4142];

/// Parlett–Reinsch balancing: a similarity by powers of two (hence exact)
/// that equalises row and column norms. Transition matrices mix entries of
/// size `λⁿ` and `λ⁻ⁿ`, and balancing shrinks the norm that bounds the Schur
/// error by orders of magnitude.
fn balance(m: &Mat4) -> Mat4 {
    let mut a = m.0;
    loop {
        let mut converged = true;
        for i in 0..4 {
            let (mut c, mut r) = (0.0, 0.0);
            for j in (0..4).filter(|&j| j != i) {
                c += a[j][i].abs();
                r += a[i][j].abs();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c >= r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if c + r < 0.95 * total {
                converged = false;
                for j in 0..4 {
                    a[i][j] /= f;
                    a[j][i] *= f;
                }
            }
        }
        if converged {
            return Mat4(a);
        }
    }
}

/// Eigenvalues by the real Schur form of the balanced matrix.
///
/// Spectra symmetric under `z ↦ −z` can stall the plain Francis double shift;
/// the decomposition is then retried on `m + σI` and the shift removed.
fn schur_eigenvalues(m: &Mat4) -> Result<[Complex64; 4]> {
    let balanced = balance(m);
    // the unbalanced matrix is a fallback for the rare stall on the balanced one
    [balanced, *m]
        .iter()
        .find_map(|b| {
            let a = b.to_nalgebra();
            let scale = b.max_abs().max(f64::MIN_POSITIVE);
            std::iter::once(0.0).chain(SCHUR_RETRY_SHIFTS).find_map(|k| {
                let sigma = k * scale;
                let shifted = a + Matrix4::identity() * sigma;
                let schur = nalgebra::Schur::try_new(shifted, f64::EPSILON, SCHUR_MAX_ITER)?;
                let ev = schur.complex_eigenvalues();
                Some([ev[0], ev[1], ev[2], ev[3]].map(|z| z - sigma))
            })
        })
        .or_else(|| complex_schur_eigenvalues(&balanced))
        .ok_or_else(|| Error::InvalidParameter("dense eigenvalue iteration did not converge".into()))
}

/// Complex Schur form of `m + iσI`. Two conjugate pairs with equal imaginary
/// parts stall the real iteration under every real shift; an imaginary shift
/// separates them.
fn complex_schur_eigenvalues(m: &Mat4) -> Option<[Complex64; 4]> {
    let a = m.to_nalgebra().map(|v| Complex64::new(v, 0.0));
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    SCHUR_RETRY_SHIFTS.iter().find_map(|k| {
        let sigma = Complex64::new(0.0, k * scale);
        let schur = nalgebra::Schur::try_new(a + Matrix4::identity() * sigma, f64::EPSILON, SCHUR_MAX_ITER)?;
        let ev = schur.eigenvalues()?;
        Some([ev[0], ev[1], ev[2], ev[3]].map(|z| z - sigma))
    })
}

/// Eigenvalues from a general-purpose dense routine (real Schur form).
///
/// Independent of the palindromic pipeline; used as the oracle for every
/// spectral claim.
pub fn dense_eigenvalues(m: &Mat4) -> Result<Spectrum> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(Spectrum::from_eigenvalues(schur_eigenvalues(m)?))
}

/// Complex double-double, enough for exact-ish evaluation of `det(m − zI)`.
#[derive(Debug, Clone, Copy)]
struct ComplexDd {
    re: DoubleDouble,
    im: DoubleDouble,
}

impl ComplexDd {
    const ZERO: ComplexDd = ComplexDd {
        re: DoubleDouble::new(0.0),
        im: DoubleDouble::new(0.0),
    };

    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
}

impl Add for ComplexDd {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ComplexDd {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for ComplexDd {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        ComplexDd {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for ComplexDd {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        ComplexDd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

/// Laplace expansion of the minor on `rows × cols`, where `cols` is a bit set
/// with as many members as `rows` has entries.
fn minor(a: &[[ComplexDd; 4]; 4], rows: &[usize], cols: u8) -> ComplexDd {
    let Some((&r, rest)) = rows.split_first() else {
        return ComplexDd {
            re: DoubleDouble::new(1.0),
            im: DoubleDouble::new(0.0),
        };
    };
    let mut acc = ComplexDd::ZERO;
    let mut negate = false;
    for c in (0..4).filter(|c| cols & (1 << c) != 0) {
        let term = a[r][c] * minor(a, rest, cols & !(1 << c));
        acc = if negate { acc - term } else { acc + term };
        negate = !negate;
    }
    acc
}

/// `det(m − zI)` and its first two derivatives in `z`, in double-double arithmetic.
fn char_det_derivatives(m: &Mat4, z: Complex64) -> [Complex64; 3] {
    let mut a = [[ComplexDd::ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            a[i][j].re = DoubleDouble::new(m.0[i][j]);
        }
        a[i][i].re = a[i][i].re - DoubleDouble::new(z.re);
        a[i][i].im = DoubleDouble::new(-z.im);
    }
    let det = minor(&a, &[0, 1, 2, 3], 0b1111);
    let mut slope = ComplexDd::ZERO;
    for (i, rest) in [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]].iter().enumerate() {
        slope = slope - minor(&a, rest, 0b1111 & !(1 << i));
    }
    let mut curve = ComplexDd::ZERO;
    for i in 0..4 {
        for j in i + 1..4 {
            let rest: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
            curve = curve + minor(&a, &rest, 0b1111 & !(1 << i) & !(1 << j));
        }
    }
    [det.to_c64(), slope.to_c64(), curve.to_c64() * 2.0]
}

fn char_det_and_slope(m: &Mat4, z: Complex64) -> (Complex64, Complex64) {
    let [d, s, _] = char_det_derivatives(m, z);
    (d, s)
}

const POLISH_STEPS: usize = 12;

/// Newton refinement of a Schur estimate on `det(m − z I)`.
///
/// The Schur error scales with the normwise condition, which for the highly
/// non-normal transition matrices is far larger than the error the entries of
/// `m` actually carry. Evaluating the determinant from the entries restores
/// the lost digits. The estimate is kept when Newton fails to reduce the
/// determinant or moves further than half the chordal distance `sep` to the
/// nearest other estimate, so two estimates never merge into one root.
fn polish(m: &Mat4, z0: Complex64, sep: f64) -> Complex64 {
    let (d0, _) = char_det_and_slope(m, z0);
    if d0 == Complex64::new(0.0, 0.0) {
        return z0;
    }
    let mut z = z0;
    for _ in 0..POLISH_STEPS {
        let (d, slope) = char_det_and_slope(m, z);
        if d == Complex64::new(0.0, 0.0) || slope == Complex64::new(0.0, 0.0) {
            break;
        }
        let step = d / slope;
        if !step.is_finite() {
            return z0;
        }
        z -= step;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm() {
            break;
        }
    }
    if z0.im == 0.0 {
        z.im = 0.0;
    }
    let (d, _) = char_det_and_slope(m, z);
    if chordal_distance(z0, z) <= 0.5 * sep && d.norm() <= d0.norm() {
        z
    } else {
        z0
    }
}

/// Estimates closer than this, relative to their modulus, are refined as a pair.
const CLUSTER_RADIUS: f64 = 1e-4;

fn relative_gap(z: Complex64, w: Complex64) -> f64 {
    (z - w).norm() / z.norm().max(w.norm()).max(f64::MIN_POSITIVE)
}

/// Joint refinement of two estimates around a nearly double root, by the
/// roots of the quadratic Taylor model of `det(m − zI)` about their midpoint.
///
/// Newton on a single estimate cannot turn a complex pair into two close real
/// roots; the quadratic model can. Returns `None` when the model does not
/// reduce the determinant at both new points.
fn polish_pair(m: &Mat4, z0: Complex64, z1: Complex64) -> Option<(Complex64, Complex64)> {
    let conjugate = z0 == z1.conj() && z0.im != 0.0;
    let mut c = (z0 + z1) / 2.0;
    let mut roots = (z0, z1);
    for _ in 0..POLISH_STEPS {
        if conjugate {
            c.im = 0.0;
        }
        let [f, f1, f2] = char_det_derivatives(m, c);
        let a = f2 / 2.0;
        if a == Complex64::new(0.0, 0.0) {
            return None;
        }
        let disc = (f1 * f1 - a * f * 4.0).sqrt();
        let (t0, t1) = (-(f1 + disc) / (a * 2.0), -(f1 - disc) / (a * 2.0));
        if !(t0.is_finite() && t1.is_finite()) {
            return None;
        }
        roots = (c + t0, c + t1);
        let shift = (t0 + t1) / 2.0;
        c += shift;
        if shift.norm() <= 4.0 * f64::EPSILON * c.norm() {
            break;
        }
    }
    if conjugate {
        // real coefficients: a pair is either conjugate or two real roots
        if roots.0.im.abs() <= 4.0 * f64::EPSILON * roots.0.norm() {
            roots.0.im = 0.0;
            roots.1.im = 0.0;
        } else {
            roots.1 = roots.0.conj();
        }
    }
    let before = char_det_and_slope(m, z0).0.norm().max(char_det_and_slope(m, z1).0.norm());
    let after = char_det_and_slope(m, roots.0).0.norm().max(char_det_and_slope(m, roots.1).0.norm());
    let mid = (z0 + z1) / 2.0;
    let reach = 10.0 * relative_gap(z0, z1).max(f64::EPSILON);
    (after <= before && relative_gap(mid, roots.0) <= reach && relative_gap(mid, roots.1) <= reach)
        .then_some(roots)
}

fn polish_all(m: &Mat4, estimates: [Complex64; 4]) -> [Complex64; 4] {
    let dist = |i: usize, j: usize| chordal_distance(estimates[i], estimates[j]);
    let neighbours =
        |i: usize| (0..4).filter(move |&j| j != i && relative_gap(estimates[i], estimates[j]) < CLUSTER_RADIUS);
    let mut out = estimates;
    let mut done = [false; 4];
    for i in 0..4 {
        let close: Vec<usize> = neighbours(i).collect();
        if let [j] = close[..] {
            if !done[i] && neighbours(j).count() == 1 {
                if let Some((a, b)) = polish_pair(m, estimates[i], estimates[j]) {
                    (out[i], out[j]) = (a, b);
                }
                done[i] = true;
                done[j] = true;
            }
        }
    }
    for i in (0..4).filter(|&i| !done[i]) {
        let sep = (0..4)
            .filter(|&j| j != i)
            .map(|j| dist(i, j))
            .fold(f64::INFINITY, f64::min);
        out[i] = polish(m, estimates[i], sep);
    }
    out
}

const SPLIT_BAND: f64 = 1e-3;

/// Dense eigenvalues of a symplectic matrix with full relative accuracy at
/// both ends of the spectrum.
///
/// A Schur decomposition has absolute error of order `ε‖m‖`, which swamps
/// eigenvalues near `λⁿ` once `‖m‖ ≈ λ⁻ⁿ`. The eigenvalues inside the unit
/// disc are therefore taken as reciprocals of the large eigenvalues of the
/// exact inverse `−J mᵀ J`. Falls back to the plain decomposition when the two
/// halves do not have matching counts. Each eigenvalue is finally polished by
/// Newton steps on `det(m − zI)` evaluated in double-double.
pub fn symplectic_dense_eigenvalues(m: &Mat4) -> Result<Spectrum> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut direct = schur_eigenvalues(m)?;
    let inverse = schur_eigenvalues(&symplectic_inverse(m))?;

    let mut small: Vec<usize> = (0..4)
        .filter(|&i| direct[i].norm() < 1.0 - SPLIT_BAND)
        .collect();
    let mut large_inv: Vec<Complex64> = inverse
        .iter()
        .copied()
        .filter(|w| w.norm() > 1.0 + SPLIT_BAND)
        .collect();
    if !small.is_empty() && small.len() == large_inv.len() {
        small.sort_by(|&a, &b| direct[a].norm().total_cmp(&direct[b].norm()));
        large_inv.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        for (slot, w) in small.into_iter().zip(large_inv) {
            direct[slot] = w.inv();
        }
    }
    Ok(Spectrum::from_eigenvalues(polish_all(m, direct)))
}

/// `σ_min(m − zI) / ‖m‖₂`, the normwise backward error of an approximate eigenvalue.
pub fn eigenvalue_backward_error(m: &Mat4, z: Complex64) -> f64 {
    let a = m.to_nalgebra().map(|v| Complex64::new(v, 0.0));
    let shifted = a - Matrix4::<Complex64>::identity() * z;
    let sv = shifted.singular_values();
    let norm = m.to_nalgebra().singular_values().max();
    sv.min() / norm.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn same_multiset(got: &[Complex64], want: &[Complex64], tol: f64) -> bool {
        match_multisets(got, want) <= tol
    }

    #[test]
    fn identity_and_j_products() {
        assert_eq!(Mat4::identity() * Mat4::identity(), Mat4::identity());
        let j = symplectic_form();
        assert_eq!(j * j, Mat4::identity().scale(-1.0));
        assert_eq!(j.transpose(), j.scale(-1.0));
    }

    #[test]
    fn df_squared_by_hand() {
        // Df_l(ν=1, λ=0.5)
        let mut df = Mat4::diag([1.0, 0.5, 1.0, 2.0]);
        df[(PHI, RHO)] = 1.0;
        let sq = df * df;
        let mut want = Mat4::diag([1.0, 0.25, 1.0, 4.0]);
        want[(PHI, RHO)] = 2.0;
        assert_eq!(sq, want);
    }

    #[test]
    fn symplectic_examples() {
        assert!(is_symplectic(&Mat4::identity(), 1e-12));
        assert!(is_symplectic(&Mat4::diag([1.0, 0.5, 1.0, 2.0]), 1e-12));
        let bad = Mat4::diag([2.0, 1.0, 1.0, 1.0]);
        assert!(!is_symplectic(&bad, 1e-12));
        // (2e_φ)ᵀ J e_ρ = -2 instead of -1
        assert_eq!(symplectic_residual(&bad), 1.0);
        assert!(!is_symplectic(&Mat4::identity().scale(f64::NAN), 1.0));
    }

    #[test]
    fn symplectic_inverse_is_inverse() {
        let mut m = Mat4::diag([1.0, 0.25, 1.0, 4.0]);
        m[(PHI, RHO)] = 2.0;
        m[(RHO, PHI)] = 1.0;
        m[(RHO, RHO)] = 3.0;
        assert!(is_symplectic(&m, 1e-14));
        let prod = m * symplectic_inverse(&m);
        assert!(prod.sub(&Mat4::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn dense_eigenvalues_examples() {
        let d = dense_eigenvalues(&Mat4::diag([1.0, 0.25, 1.0, 4.0])).unwrap();
        assert!(same_multiset(
            &d.eigenvalues,
            &[c(1.0, 0.0), c(1.0, 0.0), c(0.25, 0.0), c(4.0, 0.0)],
            1e-14
        ));

        // Π(δ=1)·Df_l² for ν=1, λ=0.5
        let m = Mat4([
            [1.0, 0.0, 2.0, 0.0],
            [0.0, 0.25, 0.0, 0.0],
            [1.0, 0.0, 3.0, 0.0],
            [0.0, 0.0, 0.0, 4.0],
        ]);
        let r3 = 3f64.sqrt();
        let d = dense_eigenvalues(&m).unwrap();
        assert!(same_multiset(
            &d.eigenvalues,
            &[c(4.0, 0.0), c(0.25, 0.0), c(2.0 + r3, 0.0), c(2.0 - r3, 0.0)],
            1e-13
        ));

        // rotation by π/2 in the (s,u) plane
        let mut rot = Mat4::identity();
        rot[(S, S)] = 0.0;
        rot[(U, U)] = 0.0;
        rot[(S, U)] = -1.0;
        rot[(U, S)] = 1.0;
        let d = dense_eigenvalues(&rot).unwrap();
        assert!(same_multiset(
            &d.eigenvalues,
            &[c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0), c(1.0, 0.0)],
            1e-14
        ));
        assert!(d.min_unit_circle_distance() < 1e-14);
    }

    #[test]
    fn dense_eigenvalues_reject_nan() {
        let mut m = Mat4::identity();
        m[(S, U)] = f64::NAN;
        assert_eq!(dense_eigenvalues(&m), Err(Error::NonFinite));
    }

    #[test]
    fn reciprocal_split_recovers_tiny_eigenvalues() {
        // block-diagonal with eigenvalues {2^40, 2^-40, 2±√3}
        let big = 2f64.powi(40);
        let mut m = Mat4::diag([1.0, 1.0 / big, 3.0, big]);
        m[(PHI, RHO)] = 2.0;
        m[(RHO, PHI)] = 1.0;
        // mix the blocks with a symplectic swap so Schur sees a full matrix
        let swap = Mat4([
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]);
        assert!(is_symplectic(&swap, 0.0));
        let m = swap * m * swap;
        let sp = symplectic_dense_eigenvalues(&m).unwrap();
        let r3 = 3f64.sqrt();
        let want = [c(big, 0.0), c(1.0 / big, 0.0), c(2.0 + r3, 0.0), c(2.0 - r3, 0.0)];
        for w in want {
            let closest = sp
                .eigenvalues
                .iter()
                .map(|z| (z - w).norm() / w.norm())
                .fold(f64::INFINITY, f64::min);
            assert!(closest < 1e-12, "missing {w}: {:?}", sp.eigenvalues);
        }
    }

    #[test]
    fn chordal_matching() {
        let a = [c(1.0, 0.0), c(1e9, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
        let b = [c(0.0, -1.0), c(0.0, 1.0), c(1e9 * (1.0 + 1e-12), 0.0), c(1.0, 0.0)];
        assert!(match_multisets(&a, &b) < 1e-15);
        assert!(chordal_distance(c(0.0, 0.0), c(1e300, 0.0)) > 1.99);
    }

    #[test]
    fn angles_wrap() {
        assert_eq!(wrap_angle(TAU), 0.0);
        assert!(wrap_angle(-1e-18) < TAU);
        let v = Vec4::new(-0.5, 1.0, 2.0, 3.0);
        assert!((v.phi() - (TAU - 0.5)).abs() < 1e-15);
        assert!((angle_diff(0.05, TAU - 0.02) - 0.07).abs() < 1e-15);
        let js = serde_json::to_string(&v).unwrap();
        let back: Vec4 = serde_json::from_str(&js).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn backward_error_of_exact_eigenvalue_is_tiny() {
        let m = Mat4::diag([1.0, 0.25, 1.0, 4.0]);
        assert!(eigenvalue_backward_error(&m, c(4.0, 0.0)) < 1e-15);
        assert!(eigenvalue_backward_error(&m, c(3.0, 0.0)) > 0.1);
    }

    #[test]
    fn equal_imaginary_pairs_do_not_stall() {
        // spectrum ±0.953 ± 0.302i: the real Schur iteration stalls on it
        let m = Mat4([
            [0.0, 0.0, 0.0, 1.25],
            [-0.1666782766666351, 0.0, 0.6876502225669274, 0.0],
            [0.0, 0.8, 0.0, -0.49295083511659177],
            [1.2311491259563643, 0.0, 0.9203360665279483, 0.0],
        ]);
        let s = symplectic_dense_eigenvalues(&m).unwrap();
        let (re, im) = (0.9533331202832678, 0.3019204560326586);
        let want = [c(re, im), c(re, -im), c(-re, im), c(-re, -im)];
        assert!(match_multisets(&s.eigenvalues, &want) < 1e-12, "{:?}", s.eigenvalues);
    }

    #[test]
    fn close_real_pair_is_resolved() {
        // eigenvalues 1 ± 8.8e-8; Schur alone returns a complex pair 1 ± 1.7e-6 i
        let m = Mat4([
            [1.0, -2.6171661159036265e-8, 14.591360562162489, 1187224.1050330994],
            [0.15547549508255676, 1.6516335868610292e-7, 2.079317137649438, -259977.8049301037],
            [0.0, -2.149731499744034e-8, 1.0, 975181.9115860261],
            [0.0, -1.3826818808986824e-7, 0.0, 6272254.74386307],
        ]);
        let s = symplectic_dense_eigenvalues(&m).unwrap();
        let want = [
            c(1.0000000881777926, 0.0),
            c(0.9999999118222151, 0.0),
            c(6272254.743863078, 0.0),
            c(1.5943229999999979e-7, 0.0),
        ];
        assert!(match_multisets(&s.eigenvalues, &want) < 1e-9, "{:?}", s.eigenvalues);
    }

    #[test]
    fn non_normal_middle_pair_is_accurate() {
        // ‖m‖ ≈ 5e13; plain Schur misplaces the eigenvalue near 31.68 by 1e-3
        let m = Mat4([
            [0.4256274162078646, 9.623137023656538e-15, 19.10877266647292, -40334931098163.42],
            [0.0, 2.1636318431147617e-14, 1.0482586280557356, -44323571483265.43],
            [0.6660939991498478, -1.5753215689502843e-14, 30.761256056991094, 0.0],
            [0.6061527684147237, -1.4335597248757454e-14, 26.90000093040881, 46218583960217.62],
        ]);
        let s = symplectic_dense_eigenvalues(&m).unwrap();
        let want = [
            c(31.68431127703301, 0.0),
            c(0.03156136143394316, 0.0),
            c(46218583960217.086, 0.0),
            c(2.1636318431147864e-14, 0.0),
        ];
        assert!(match_multisets(&s.eigenvalues, &want) < 1e-12, "{:?}", s.eigenvalues);
    }
}
