//! The transition matrix `M = Π·Df_lⁿ` and its spectrum.
//!
//! For symplectic `M` the characteristic polynomial is palindromic,
//! `x⁴ + A x³ + B x² + A x + 1`, and the substitution `S = x + 1/x` reduces it
//! to `S² + A S + (B − 2) = 0` followed by `x² − S x + 1 = 0` for each root.
//!
//! Three independent computations meet here: the closed-form `A(n)`, `B(n)`
//! read off the blocks of `Π`, the trace identities applied to the assembled
//! matrix, and a dense eigenvalue routine. [`full_report`] runs all three and
//! fails with `OracleMismatch` when they disagree.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use num_rational::BigRational;

use crate::config::{PrecisionMode, RunConfig};
use crate::error::{Error, Result};
use crate::homoclinic::HomoclinicMatrix;
use crate::linear_model::{d_f_l_pow_in, d_f_l_pow_unchecked, LinearModelParams};
use crate::precision::{check_guard, DoubleDouble, Ext, Field};
use crate::symplectic::{
    mat_mul, match_multisets, symplectic_dense_eigenvalues, Mat4, Spectrum, PHI, RHO, S, U,
};

/// Relative agreement required between closed-form and trace coefficients.
pub const COEFF_TOL: f64 = 1e-9;
/// Chordal agreement required between solver and oracle eigenvalues.
pub const EIGEN_MATCH_TOL: f64 = 1e-6;
/// Palindromic tolerance of the trace oracle.
pub const PALINDROMIC_TOL: f64 = 1e-8;

/// `x⁴ + a x³ + b x² + a x + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PalindromicQuartic {
    pub a: f64,
    pub b: f64,
}

impl PalindromicQuartic {
    pub fn new(a: f64, b: f64) -> Self {
        PalindromicQuartic { a, b }
    }

    /// Coefficients, leading first.
    pub fn coefficients(&self) -> [f64; 5] {
        [1.0, self.a, self.b, self.a, 1.0]
    }

    /// `P(1)` and `P(−1)` computed from the coefficients.
    pub fn unit_values(&self) -> UnitValues {
        UnitValues {
            at_one: self.b + 2.0 * self.a + 2.0,
            at_minus_one: self.b - 2.0 * self.a + 2.0,
        }
    }
}

/// `P(1) = det(I − M)` and `P(−1) = det(I + M)`.
///
/// Roots `S` near `±2` are recovered from these values instead of from `A` and
/// `B`, which would carry an absolute error of order `ε·|A|` into `S ∓ 2` and
/// `√ε` into the eigenvalues near `±1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitValues {
    pub at_one: f64,
    pub at_minus_one: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    HyperbolicReal,
    HyperbolicComplex,
    NonHyperbolicElliptic,
    NonHyperbolicParabolic,
    Mixed,
}

impl Classification {
    pub fn is_hyperbolic(self) -> bool {
        matches!(
            self,
            Classification::HyperbolicReal | Classification::HyperbolicComplex
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            Classification::HyperbolicReal => "HyperbolicReal",
            Classification::HyperbolicComplex => "HyperbolicComplex",
            Classification::NonHyperbolicElliptic => "NonHyperbolicElliptic",
            Classification::NonHyperbolicParabolic => "NonHyperbolicParabolic",
            Classification::Mixed => "Mixed",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Which independent eigenvalue check was run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenCheck {
    /// Multiset match against a dense Schur decomposition.
    Dense,
    /// Relative Newton step on the trace-oracle polynomial at each eigenvalue.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResiduals {
    /// Largest relative gap between closed-form and trace coefficients.
    pub coefficients: f64,
    /// Chordal matching distance or largest relative Newton step.
    pub eigenvalues: f64,
    pub eigen_check: EigenCheck,
}

/// One row of spectral output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub n: u32,
    #[serde(rename = "A")]
    pub a_n: f64,
    #[serde(rename = "B")]
    pub b_n: f64,
    /// `[S₁, S₂]` with `|S₁| ≤ |S₂|`; absent when the palindromic pipeline was skipped.
    #[serde(rename = "S_roots")]
    pub s_roots: Option<[Complex64; 2]>,
    /// Reciprocal pairs: `[x(S₁), 1/x(S₁), x(S₂), 1/x(S₂)]`.
    pub eigenvalues: [Complex64; 4],
    pub classification: Classification,
    pub min_unit_circle_distance: f64,
    pub unit_circle_distances: [f64; 4],
    pub oracle_residuals: OracleResiduals,
    pub precision: PrecisionMode,
}

impl SpectrumReport {
    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_eigenvalues(self.eigenvalues)
    }
}

type FMat<F> = [[F; 4]; 4];

fn to_field<F: Field>(m: &Mat4) -> FMat<F> {
    std::array::from_fn(|i| std::array::from_fn(|j| F::from_f64(m[(i, j)])))
}

fn mat_mul_in<F: Field>(a: &FMat<F>, b: &FMat<F>) -> FMat<F> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            (1..4).fold(a[i][0].clone() * b[0][j].clone(), |acc, k| {
                acc + a[i][k].clone() * b[k][j].clone()
            })
        })
    })
}

fn det3<F: Field>(m: &FMat<F>, r: [usize; 3], c: [usize; 3]) -> F {
    let e = |i: usize, j: usize| m[r[i]][c[j]].clone();
    e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
        - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
}

fn complement(k: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut idx = 0;
    for i in (0..4).filter(|&i| i != k) {
        out[idx] = i;
        idx += 1;
    }
    out
}

fn det4<F: Field>(m: &FMat<F>) -> F {
    (0..4).fold(F::zero(), |acc, j| {
        let minor = det3(m, [1, 2, 3], complement(j));
        let term = m[0][j].clone() * minor;
        if j % 2 == 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

fn shifted<F: Field>(m: &FMat<F>, x: f64) -> FMat<F> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let v = -m[i][j].clone();
            if i == j {
                v + F::from_f64(x)
            } else {
                v
            }
        })
    })
}

/// `det(xI − M)` coefficients `[1, c₃, c₂, c₁, c₀]` from traces and principal minors.
fn char_poly_in<F: Field>(m: &FMat<F>) -> [F; 5] {
    let tr = (1..4).fold(m[0][0].clone(), |acc, i| acc + m[i][i].clone());
    let mut tr2 = F::zero();
    for i in 0..4 {
        for j in 0..4 {
            tr2 = tr2 + m[i][j].clone() * m[j][i].clone();
        }
    }
    let two = F::from_f64(2.0);
    let c2 = (tr.clone() * tr.clone() - tr2) / two;
    let minors = (0..4).fold(F::zero(), |acc, k| {
        let idx = complement(k);
        acc + det3(m, idx, idx)
    });
    [F::one(), -tr, c2, -minors, det4(m)]
}

fn unit_values_in<F: Field>(m: &FMat<F>) -> UnitValues {
    UnitValues {
        at_one: det4(&shifted(m, 1.0)).to_f64(),
        // det(−I − M) = det(I + M) in even dimension
        at_minus_one: det4(&shifted(m, -1.0)).to_f64(),
    }
}

fn rel_diff(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1.0)
}

/// `Π·Df_lⁿ` in doubles, guarded for standard precision.
pub fn transition_matrix(h: &HomoclinicMatrix, p: &LinearModelParams, n: u32) -> Result<Mat4> {
    let df = crate::linear_model::d_f_l_pow(p, n)?;
    Ok(mat_mul(h.matrix(), &df))
}

/// `Π·Df_lⁿ` with entries in `F`.
pub fn transition_matrix_in<F: Field>(
    h: &HomoclinicMatrix,
    p: &LinearModelParams,
    n: u32,
) -> [[F; 4]; 4] {
    mat_mul_in(&to_field(h.matrix()), &d_f_l_pow_in(p, n))
}

/// `A(n)` and `B(n)` in closed form from the blocks of `Π`, evaluated in `F`.
pub fn closed_form_coeffs_in<F: Field>(h: &HomoclinicMatrix, p: &LinearModelParams, n: u32) -> (F, F) {
    let m = h.matrix();
    let e = |i: usize, j: usize| F::from_f64(m[(i, j)]);
    let (a11, a12, a21, a22) = (e(PHI, PHI), e(PHI, S), e(S, PHI), e(S, S));
    let (b11, b12, b21, b22) = (e(PHI, RHO), e(PHI, U), e(S, RHO), e(S, U));
    let (c11, c12, c21, c22) = (e(RHO, PHI), e(RHO, S), e(U, PHI), e(U, S));
    let (d11, d12, d21, d22) = (e(RHO, RHO), e(RHO, U), e(U, RHO), e(U, U));

    let ln = F::from_f64(p.lambda).powu(n);
    let lmn = F::one() / ln.clone();
    let nnu = F::from_u32(n) * F::from_f64(p.nu);
    let delta = c11.clone() * d22.clone() - d12.clone() * c21.clone();
    let det_a = a11.clone() * a22.clone() - a12 * a21.clone();
    let det_d = d11.clone() * d22.clone() - d12 * d21;

    let a = -(d22.clone() * lmn.clone())
        - ln.clone() * a22.clone()
        - nnu.clone() * c11.clone()
        - a11.clone()
        - d11.clone();
    let small = det_a + a22.clone() * d11.clone() - c12.clone() * b21
        + nnu.clone() * (a22.clone() * c11.clone() - c12 * a21);
    let large = det_d + a11.clone() * d22.clone() - c21 * b12 + nnu * delta;
    let constant = a11 * d11 + a22 * d22 - c22 * b22 - c11 * b11;
    let b = ln * small + lmn * large + constant;
    (a, b)
}

/// `A(n)`, `B(n)` in closed form, in doubles.
pub fn closed_form_coeffs(
    h: &HomoclinicMatrix,
    p: &LinearModelParams,
    n: u32,
) -> Result<PalindromicQuartic> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be a positive integer".into()));
    }
    check_guard(p.lambda, n, PrecisionMode::Standard)?;
    let (a, b) = closed_form_coeffs_in::<f64>(h, p, n);
    Ok(PalindromicQuartic { a, b })
}

/// Permanent of `|m|` on the given rows and columns.
fn abs_permanent(m: &Mat4, rows: &[usize], cols: &[usize]) -> f64 {
    let Some((&r, rows)) = rows.split_first() else {
        return 1.0;
    };
    (0..cols.len())
        .map(|k| {
            let rest: Vec<usize> = cols.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, c)| *c).collect();
            m[(r, cols[k])].abs() * abs_permanent(m, rows, &rest)
        })
        .sum()
}

/// Size of the terms summed into `c₁` and `c₀`: the permanents of `|m|` over
/// the principal 3×3 blocks and over the whole matrix.
///
/// Rounding the entries of `m` perturbs each coefficient by about `ε` times
/// this size, which can dwarf the coefficient itself when the large terms cancel.
fn term_magnitudes(m: &Mat4) -> [f64; 2] {
    let minors = (0..4)
        .map(|k| {
            let idx = complement(k);
            abs_permanent(m, &idx, &idx)
        })
        .sum();
    let all = [0, 1, 2, 3];
    [minors, abs_permanent(m, &all, &all)]
}

fn check_palindromic(c: &[f64; 5], magnitudes: [f64; 2]) -> Result<()> {
    let c1_c3 = (c[3] - c[1]).abs() / c[1].abs().max(magnitudes[0]).max(1.0);
    let c0_c4 = (c[4] - 1.0).abs() / magnitudes[1].max(1.0);
    if c1_c3 <= PALINDROMIC_TOL && c0_c4 <= PALINDROMIC_TOL {
        Ok(())
    } else {
        Err(Error::NotPalindromic { c1_c3, c0_c4 })
    }
}

/// Characteristic coefficients of `m` from traces, evaluated in double-double
/// arithmetic on the given entries.
pub fn char_poly(m: &Mat4) -> [f64; 5] {
    char_poly_in::<DoubleDouble>(&to_field(m)).map(|c| c.to_f64())
}

/// `A = −tr M`, `B = (tr(M)² − tr(M²))/2`, after checking that the remaining
/// coefficients are palindromic.
pub fn trace_coeffs(m: &Mat4) -> Result<PalindromicQuartic> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let c = char_poly(m);
    check_palindromic(&c, term_magnitudes(m))?;
    Ok(PalindromicQuartic { a: c[1], b: c[2] })
}

/// `P(±1)` of `m` in double-double arithmetic.
pub fn unit_values(m: &Mat4) -> UnitValues {
    unit_values_in::<DoubleDouble>(&to_field(m))
}

/// Roots of `z² + b z + c` (real coefficients), smaller modulus first.
pub(crate) fn real_quadratic(b: f64, c: f64) -> [Complex64; 2] {
    if c == 0.0 {
        return [Complex64::new(0.0, 0.0), Complex64::new(-b, 0.0)];
    }
    let scale = b.abs().max(c.abs().sqrt());
    let bs = b / scale;
    let cs = c / scale / scale;
    let disc = bs * bs - 4.0 * cs;
    if disc >= 0.0 {
        let q = -0.5 * (bs + bs.signum() * disc.sqrt()) * scale;
        [Complex64::new(c / q, 0.0), Complex64::new(q, 0.0)]
    } else {
        let re = -0.5 * bs * scale;
        let im = 0.5 * (-disc).sqrt() * scale;
        [Complex64::new(re, -im), Complex64::new(re, im)]
    }
}

/// An S-root, optionally stored as `center + t` with `center = ±2` so that a
/// tiny offset survives.
#[derive(Debug, Clone, Copy)]
struct SRoot {
    value: Complex64,
    offset: Option<(f64, Complex64)>,
}

const ANCHOR_BAND: f64 = 0.5;

fn anchor(roots: &mut [SRoot; 2], a: f64, center: f64, value_at_unit: f64) {
    let near: Vec<usize> = (0..2)
        .filter(|&k| roots[k].value.im == 0.0 && (roots[k].value.re - center).abs() < ANCHOR_BAND)
        .collect();
    if near.is_empty() {
        return;
    }
    // S = center + t turns S² + AS + (B−2) into t² + (A + 2·center)t + P(center/2)
    let t = real_quadratic(a + 2.0 * center, value_at_unit);
    let pick = |target: Complex64| {
        if (t[0] - target).norm() <= (t[1] - target).norm() {
            (t[0], t[1])
        } else {
            (t[1], t[0])
        }
    };
    let (first, other) = pick(roots[near[0]].value - center);
    let mut assign = |k: usize, tk: Complex64| {
        roots[k] = SRoot {
            value: tk + center,
            offset: Some((center, tk)),
        };
    };
    assign(near[0], first);
    if let Some(&k) = near.get(1) {
        assign(k, other);
    }
}

/// Solution of `x² − S x + 1 = 0`, larger modulus first; the second is the reciprocal of the first.
fn reciprocal_pair(root: &SRoot) -> [Complex64; 2] {
    if let Some((center, t)) = root.offset {
        // x = u + y with u = center/2: y² − t y − u t = 0
        let u = center / 2.0;
        let d = (t * t + 4.0 * u * t).sqrt();
        let x1 = [(t + d) * 0.5, (t - d) * 0.5]
            .map(|y| y + u)
            .into_iter()
            .max_by(|p, q| p.norm().total_cmp(&q.norm()))
            .expect("two candidates");
        if t.im == 0.0 && (t.re * (t.re + 4.0 * u)) < 0.0 {
            // elliptic: both on the unit circle, conjugate to each other
            return [x1, x1.conj()];
        }
        return [x1, x1.inv()];
    }
    let s = root.value;
    if s.im == 0.0 {
        let s = s.re;
        let r = (s - 2.0).abs().sqrt() * (s + 2.0).abs().sqrt();
        if s.abs() >= 2.0 {
            let sign = if s >= 0.0 { 1.0 } else { -1.0 };
            let x1 = 0.5 * (s + sign * r);
            return [Complex64::new(x1, 0.0), Complex64::new(1.0 / x1, 0.0)];
        }
        let x = Complex64::new(0.5 * s, 0.5 * r);
        return [x, x.conj()];
    }
    // any square root of S² − 4 will do; the product form avoids overflow
    let d = (s - 2.0).sqrt() * (s + 2.0).sqrt();
    let x1 = if (s + d).norm() >= (s - d).norm() {
        (s + d) * 0.5
    } else {
        (s - d) * 0.5
    };
    [x1, x1.inv()]
}

/// S-roots and eigenvalues, using `P(±1)` to resolve roots near `±2`.
pub fn solve_palindromic_anchored(q: &PalindromicQuartic, unit: &UnitValues) -> ([Complex64; 2], [Complex64; 4]) {
    let s = real_quadratic(q.a, q.b - 2.0);
    let mut roots = s.map(|value| SRoot {
        value,
        offset: None,
    });
    anchor(&mut roots, q.a, 2.0, unit.at_one);
    anchor(&mut roots, q.a, -2.0, unit.at_minus_one);
    let p1 = reciprocal_pair(&roots[0]);
    let p2 = reciprocal_pair(&roots[1]);
    ([roots[0].value, roots[1].value], [p1[0], p1[1], p2[0], p2[1]])
}

/// Solves `S² + A S + (B − 2) = 0`, then `x² − S x + 1 = 0` for each root.
pub fn solve_palindromic(q: &PalindromicQuartic) -> ([Complex64; 2], [Complex64; 4]) {
    solve_palindromic_anchored(q, &q.unit_values())
}

/// Labels a spectrum against the unit circle.
///
/// `s_roots` is optional so that spectra from the dense fallback can be
/// classified by their eigenvalues alone.
pub fn classify(
    eigenvalues: &[Complex64; 4],
    s_roots: Option<&[Complex64; 2]>,
    tol_hyp: f64,
) -> Classification {
    let spectrum = Spectrum::from_eigenvalues(*eigenvalues);
    let min_d = spectrum.min_unit_circle_distance();
    let real_s = |s: &Complex64| s.im == 0.0;
    let all_real = match s_roots {
        Some(s) => s.iter().all(real_s),
        None => eigenvalues.iter().all(|z| z.im.abs() <= tol_hyp * z.norm().max(1.0)),
    };
    if min_d > tol_hyp {
        return if all_real {
            Classification::HyperbolicReal
        } else {
            Classification::HyperbolicComplex
        };
    }
    let one = Complex64::new(1.0, 0.0);
    let near_unit = eigenvalues
        .iter()
        .any(|z| (z - one).norm() <= tol_hyp || (z + one).norm() <= tol_hyp);
    let s_near_two = s_roots.is_some_and(|s| {
        s.iter()
            .any(|r| real_s(r) && (r.re.abs() - 2.0).abs() <= tol_hyp)
    });
    if near_unit || s_near_two {
        return Classification::NonHyperbolicParabolic;
    }
    let elliptic = match s_roots {
        Some(s) => s.iter().any(|r| real_s(r) && r.re.abs() < 2.0),
        None => spectrum.unit_circle_distances.iter().any(|d| *d <= tol_hyp),
    };
    if elliptic {
        Classification::NonHyperbolicElliptic
    } else {
        Classification::Mixed
    }
}

/// Relative Newton step `|P(z)/(z·P'(z))|`, evaluated on the reversed
/// polynomial at `1/z` when `|z| > 1` to keep powers bounded.
fn newton_step(c: &[f64; 5], z: Complex64) -> f64 {
    let (coeffs, w) = if z.norm() > 1.0 {
        ([c[4], c[3], c[2], c[1], c[0]], z.inv())
    } else {
        (*c, z)
    };
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for ck in coeffs {
        dp = dp * w + p;
        p = p * w + ck;
    }
    if p.norm() == 0.0 {
        return 0.0;
    }
    (p / (dp * w)).norm()
}

struct Pipeline {
    closed: PalindromicQuartic,
    traced: [f64; 5],
    unit: UnitValues,
}

fn pipeline<C: Field, T: Field>(h: &HomoclinicMatrix, p: &LinearModelParams, n: u32, m: &FMat<T>) -> Pipeline {
    let (a, b) = closed_form_coeffs_in::<C>(h, p, n);
    Pipeline {
        closed: PalindromicQuartic::new(a.to_f64(), b.to_f64()),
        traced: char_poly_in(m).map(|c| c.to_f64()),
        unit: unit_values_in(m),
    }
}

fn dense_fallback(m: &Mat4, n: u32, cfg: &RunConfig) -> Result<SpectrumReport> {
    let spectrum = symplectic_dense_eigenvalues(m)?;
    let c = char_poly(m);
    Ok(SpectrumReport {
        n,
        a_n: c[1],
        b_n: c[2],
        s_roots: None,
        eigenvalues: spectrum.eigenvalues,
        classification: classify(&spectrum.eigenvalues, None, cfg.tolerances.tol_hyp),
        min_unit_circle_distance: spectrum.min_unit_circle_distance(),
        unit_circle_distances: spectrum.unit_circle_distances,
        oracle_residuals: OracleResiduals {
            coefficients: 0.0,
            eigenvalues: 0.0,
            eigen_check: EigenCheck::Dense,
        },
        precision: cfg.precision_mode,
    })
}

/// Closed-form coefficients, trace cross-check, palindromic solve, eigenvalue
/// cross-check and classification for `Π·Df_lⁿ`.
///
/// Standard precision checks eigenvalues against the dense oracle; the
/// extended and exact modes, whose `n` may put `‖M‖` beyond what a double
/// Schur decomposition resolves, check each eigenvalue by a Newton step on the
/// trace-oracle polynomial instead.
pub fn full_report(
    h: &HomoclinicMatrix,
    p: &LinearModelParams,
    n: u32,
    cfg: &RunConfig,
) -> Result<SpectrumReport> {
    p.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be a positive integer".into()));
    }
    let mode = cfg.precision_mode;
    check_guard(p.lambda, n, mode)?;
    if !h.is_symplectic() {
        let m = mat_mul(h.matrix(), &d_f_l_pow_unchecked(p, n));
        return dense_fallback(&m, n, cfg);
    }

    let (pipe, m_f64) = match mode {
        PrecisionMode::Standard => {
            let m = mat_mul(h.matrix(), &d_f_l_pow_unchecked(p, n));
            (pipeline::<f64, DoubleDouble>(h, p, n, &to_field(&m)), Some(m))
        }
        PrecisionMode::Extended => {
            let m = transition_matrix_in::<Ext>(h, p, n);
            (pipeline::<Ext, Ext>(h, p, n, &m), None)
        }
        PrecisionMode::ExactRational => {
            let m = transition_matrix_in::<BigRational>(h, p, n);
            (pipeline::<BigRational, BigRational>(h, p, n, &m), None)
        }
    };
    // entries computed in extended or exact arithmetic carry no rounding to excuse
    let magnitudes = m_f64.as_ref().map_or([0.0; 2], term_magnitudes);
    check_palindromic(&pipe.traced, magnitudes)?;

    let coeff_residual = rel_diff(pipe.closed.a, pipe.traced[1]).max(rel_diff(pipe.closed.b, pipe.traced[2]));
    if !(coeff_residual <= COEFF_TOL) {
        return Err(Error::OracleMismatch {
            check: "coefficients",
            residual: coeff_residual,
            tol: COEFF_TOL,
        });
    }

    let (s_roots, eigenvalues) = solve_palindromic_anchored(&pipe.closed, &pipe.unit);

    let (eigen_residual, eigen_check) = match m_f64 {
        Some(m) => {
            let dense = symplectic_dense_eigenvalues(&m)?;
            (match_multisets(&eigenvalues, &dense.eigenvalues), EigenCheck::Dense)
        }
        None => (
            eigenvalues
                .iter()
                .map(|z| newton_step(&pipe.traced, *z))
                .fold(0.0, f64::max),
            EigenCheck::Newton,
        ),
    };
    if !(eigen_residual <= EIGEN_MATCH_TOL) {
        return Err(Error::OracleMismatch {
            check: "eigenvalues",
            residual: eigen_residual,
            tol: EIGEN_MATCH_TOL,
        });
    }

    let spectrum = Spectrum::from_eigenvalues(eigenvalues);
    Ok(SpectrumReport {
        n,
        a_n: pipe.closed.a,
        b_n: pipe.closed.b,
        s_roots: Some(s_roots),
        eigenvalues,
        classification: classify(&eigenvalues, Some(&s_roots), cfg.tolerances.tol_hyp),
        min_unit_circle_distance: spectrum.min_unit_circle_distance(),
        unit_circle_distances: spectrum.unit_circle_distances,
        oracle_residuals: OracleResiduals {
            coefficients: coeff_residual,
            eigenvalues: eigen_residual,
            eigen_check,
        },
        precision: mode,
    })
}
