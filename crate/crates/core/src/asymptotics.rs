//! Large-`n` behaviour of the real eigenvalues, and the one-parameter family of
//! shear homoclinic matrices whose spectrum factors exactly.
//!
//! For a strongly transverse `Π` with torsion the transition spectrum becomes
//! real and hyperbolic for large `n`, with
//!
//! ```text
//! |x₂| ~ |d₂₂| λ⁻ⁿ          |x₁| ~ n |ν| |Δ| / |d₂₂|
//! ```
//!
//! and `x₃ = 1/x₁`, `x₄ = 1/x₂`. Only the moduli are asserted; the sign of
//! `x₁` against `nνΔ/d₂₂` is measured and reported per table.
//!
//! The shear family `Π(δ) = I + δ·E_{ρφ}` gives the exact factorization
//! `P(x) = (x² − (δnν + 2)x + 1)(x² − (λⁿ + λ⁻ⁿ)x + 1)`. A variant of this law
//! with `λ²ⁿ + λ⁻ⁿ` in the second factor circulates; [`special_case_factor`]
//! measures how far that variant is from the traced polynomial.

use serde::Serialize;

use crate::config::{PrecisionMode, RunConfig};
use crate::error::{Error, Result};
use crate::homoclinic::{transversality_report, HomoclinicMatrix};
use crate::linear_model::LinearModelParams;
use crate::precision::check_guard;
use crate::spectrum::{char_poly, full_report, trace_coeffs, transition_matrix, Classification};
use crate::symplectic::{Mat4, PHI, RHO};

/// `Π(δ)`: the identity with `δ` in the `(ρ, φ)` slot.
pub fn special_case_matrix(delta: f64) -> HomoclinicMatrix {
    let mut m = Mat4::identity();
    m[(RHO, PHI)] = delta;
    HomoclinicMatrix::new(m).expect("shears are symplectic")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialCaseParams {
    pub delta: f64,
    pub p: LinearModelParams,
    pub n: u32,
}

/// `(x² − first·x + 1)(x² − second·x + 1)` against the traced polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialCaseFactors {
    /// `δnν + 2`.
    pub first: f64,
    /// `λⁿ + λ⁻ⁿ`.
    pub second: f64,
    /// Largest per-coefficient relative gap of the product to the trace oracle.
    pub residual: f64,
    /// `λ²ⁿ + λ⁻ⁿ`, the circulating variant of the second factor.
    pub printed_second: f64,
    /// The same gap with `printed_second` in place of `second`.
    pub printed_residual: f64,
}

/// Coefficients of `(x² − s₁x + 1)(x² − s₂x + 1)`, leading first.
pub fn expand_factors(s1: f64, s2: f64) -> [f64; 5] {
    let a = -(s1 + s2);
    [1.0, a, 2.0 + s1 * s2, a, 1.0]
}

fn coefficient_gap(x: &[f64; 5], y: &[f64; 5]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(1.0))
        .fold(0.0, f64::max)
}

/// Per-coefficient tolerance of the factorization check.
pub const FACTOR_TOL: f64 = 1e-9;

pub fn special_case_factor(sc: &SpecialCaseParams) -> Result<SpecialCaseFactors> {
    check_guard(sc.p.lambda, sc.n, PrecisionMode::Standard)?;
    let ln = sc.p.lambda.powi(sc.n as i32);
    let lmn = sc.p.lambda.powi(-(sc.n as i32));
    let first = sc.delta * sc.n as f64 * sc.p.nu + 2.0;
    let second = ln + lmn;
    let printed_second = ln * ln + lmn;

    let m = transition_matrix(&special_case_matrix(sc.delta), &sc.p, sc.n)?;
    trace_coeffs(&m)?;
    let traced = char_poly(&m);
    let residual = coefficient_gap(&expand_factors(first, second), &traced);
    let printed_residual = coefficient_gap(&expand_factors(first, printed_second), &traced);
    if !(residual <= FACTOR_TOL) {
        return Err(Error::FactorizationMismatch { residual });
    }
    Ok(SpecialCaseFactors {
        first,
        second,
        residual,
        printed_second,
        printed_residual,
    })
}

/// Whether both factors have `|S| > 2 + tol_hyp`; requires `δ ≠ 0` and `ν ≠ 0`.
pub fn special_case_hyperbolicity(sc: &SpecialCaseParams, tol_hyp: f64) -> Result<bool> {
    let f = special_case_factor(sc)?;
    Ok(sc.delta != 0.0
        && sc.p.nu != 0.0
        && f.first.abs() > 2.0 + tol_hyp
        && f.second.abs() > 2.0 + tol_hyp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub n: u32,
    pub x1: f64,
    pub x2: f64,
    /// `nνΔ/d₂₂`.
    pub x1_model: f64,
    /// `d₂₂λ⁻ⁿ`.
    pub x2_model: f64,
    pub ratio1: f64,
    pub ratio2: f64,
    pub classification: Classification,
}

impl AsymptoticRow {
    pub fn deviation1(&self) -> f64 {
        (self.ratio1.abs() - 1.0).abs()
    }

    pub fn deviation2(&self) -> f64 {
        (self.ratio2.abs() - 1.0).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsTable {
    pub rows: Vec<AsymptoticRow>,
    /// `+1` if every `x₁` has the sign of `nνΔ/d₂₂`, `−1` if every one has the opposite sign, `0` otherwise.
    pub x1_sign: i8,
}

impl AsymptoticsTable {
    pub fn last(&self) -> Option<&AsymptoticRow> {
        self.rows.last()
    }
}

/// Eigenvalue table against the two asymptotic models.
///
/// `S₂` is the S-root nearest `−A(n)`, `S₁` the other one; `x₂` and `x₁` are
/// the larger-modulus eigenvalues of the corresponding reciprocal pairs.
pub fn asymptotic_table(
    h: &HomoclinicMatrix,
    p: &LinearModelParams,
    n_list: &[u32],
    cfg: &RunConfig,
) -> Result<AsymptoticsTable> {
    let tr = transversality_report(h, cfg.tolerances.tol_rank);
    if !tr.strongly_transverse {
        return Err(Error::NotStronglyTransverse {
            delta: tr.delta,
            d22: tr.d22,
        });
    }
    if !p.torsion().with_torsion {
        return Err(Error::NotWithTorsion);
    }
    let rows = n_list
        .iter()
        .map(|&n| asymptotic_row(h, p, n, tr.delta, cfg))
        .collect::<Result<Vec<_>>>()?;
    let x1_sign = if rows.iter().all(|r| r.ratio1 > 0.0) {
        1
    } else if rows.iter().all(|r| r.ratio1 < 0.0) {
        -1
    } else {
        0
    };
    Ok(AsymptoticsTable { rows, x1_sign })
}

fn asymptotic_row(
    h: &HomoclinicMatrix,
    p: &LinearModelParams,
    n: u32,
    delta: f64,
    cfg: &RunConfig,
) -> Result<AsymptoticRow> {
    let r = full_report(h, p, n, cfg)?;
    let Some(s) = r.s_roots.filter(|_| r.classification == Classification::HyperbolicReal) else {
        return Err(Error::NotYetHyperbolic { n });
    };
    let target = -r.a_n;
    let k2 = if (s[0].re - target).abs() < (s[1].re - target).abs() { 0 } else { 1 };
    let k1 = 1 - k2;
    let x1 = r.eigenvalues[2 * k1].re;
    let x2 = r.eigenvalues[2 * k2].re;
    let d22 = h.d22();
    let x1_model = n as f64 * p.nu * delta / d22;
    let x2_model = d22 * p.lambda.powi(-(n as i32));
    Ok(AsymptoticRow {
        n,
        x1,
        x2,
        x1_model,
        x2_model,
        ratio1: x1 / x1_model,
        ratio2: x2 / x2_model,
        classification: r.classification,
    })
}

/// Linear scan of classifications over `1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnsetScan {
    pub classifications: Vec<(u32, Classification)>,
    /// Smallest `n` from which every scanned classification satisfies the target.
    pub n0: Option<u32>,
}

pub fn onset_scan(
    h: &HomoclinicMatrix,
    p: &LinearModelParams,
    n_max: u32,
    cfg: &RunConfig,
    target: impl Fn(Classification) -> bool,
) -> Result<OnsetScan> {
    let classifications = (1..=n_max)
        .map(|n| full_report(h, p, n, cfg).map(|r| (n, r.classification)))
        .collect::<Result<Vec<_>>>()?;
    let n0 = classifications
        .iter()
        .rposition(|(_, c)| !target(*c))
        .map_or(Some(1), |i| classifications.get(i + 1).map(|(n, _)| *n));
    Ok(OnsetScan {
        classifications,
        n0: n0.filter(|_| n_max > 0),
    })
}

/// Evidence that a deviation sequence shrinks with `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Trend {
    pub first: f64,
    pub last: f64,
    /// Least-squares slope of deviation against `n`.
    pub slope: f64,
    /// The same slope over the last five samples.
    pub tail_slope: f64,
    /// Largest deviation over the last five samples; a tail at rounding
    /// level has nothing left to improve.
    pub tail_peak: f64,
    /// Largest deviation in the sequence.
    pub peak: f64,
    pub samples: usize,
}

/// Deviations at or below this are rounding, not an asymptotic error.
pub const ROUNDING_FLOOR: f64 = 1e-12;

const TAIL: usize = 5;

impl Trend {
    /// At least 5 samples and a negative fitted slope, both overall and over
    /// the tail. The raw first sample is not compared: a ratio that happens
    /// to pass near 1 at the onset says nothing about convergence.
    pub fn improving(&self) -> bool {
        self.samples >= TAIL && self.slope < 0.0 && (self.tail_slope < 0.0 || self.tail_peak <= ROUNDING_FLOOR)
    }

    /// Improving, or exact to rounding over the whole sequence.
    pub fn converging(&self) -> bool {
        self.improving() || (self.samples >= TAIL && self.peak <= ROUNDING_FLOOR)
    }
}

fn fitted_slope(points: &[(u32, f64)]) -> f64 {
    let k = points.len() as f64;
    let mean_n = points.iter().map(|(n, _)| *n as f64).sum::<f64>() / k;
    let mean_d = points.iter().map(|(_, d)| d).sum::<f64>() / k;
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), (n, d)| {
        let dn = *n as f64 - mean_n;
        (num + dn * (d - mean_d), den + dn * dn)
    });
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn trend(points: &[(u32, f64)]) -> Option<Trend> {
    let (first, last) = (points.first()?, points.last()?);
    let tail = &points[points.len().saturating_sub(TAIL)..];
    Some(Trend {
        first: first.1,
        last: last.1,
        slope: fitted_slope(points),
        tail_slope: fitted_slope(tail),
        tail_peak: tail.iter().map(|(_, d)| *d).fold(0.0, f64::max),
        peak: points.iter().map(|(_, d)| *d).fold(0.0, f64::max),
        samples: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::solve_palindromic;
    use crate::spectrum::PalindromicQuartic;
    use crate::symplectic::is_symplectic;

    fn params(nu: f64, lambda: f64) -> LinearModelParams {
        LinearModelParams::new(0.0, nu, lambda).unwrap()
    }

    fn sc(delta: f64, nu: f64, lambda: f64, n: u32) -> SpecialCaseParams {
        SpecialCaseParams {
            delta,
            p: params(nu, lambda),
            n,
        }
    }

    #[test]
    fn special_case_matrix_examples() {
        assert_eq!(special_case_matrix(0.0), HomoclinicMatrix::identity());
        for delta in [1.0, -3.0, 1e6] {
            assert!(is_symplectic(special_case_matrix(delta).matrix(), 0.0));
        }
        let r = transversality_report(&special_case_matrix(1.0), 1e-9);
        assert!(r.strongly_transverse);
        assert_eq!((r.delta, r.d22), (1.0, 1.0));
    }

    #[test]
    fn factor_examples() {
        let f = special_case_factor(&sc(1.0, 1.0, 0.5, 2)).unwrap();
        assert_eq!((f.first, f.second), (4.0, 4.25));
        assert_eq!(expand_factors(f.first, f.second), [1.0, -8.25, 19.0, -8.25, 1.0]);
        assert_eq!(f.residual, 0.0);
        assert!(f.printed_residual > 1e-3);

        let f = special_case_factor(&sc(0.0, 1.0, 0.5, 7)).unwrap();
        assert_eq!(f.first, 2.0);
        let f = special_case_factor(&sc(1.0, 0.0, 0.5, 7)).unwrap();
        assert_eq!(f.first, 2.0);
    }

    #[test]
    fn closed_s_roots_are_recovered() {
        for (delta, nu, lambda, n) in [(1.0, 1.0, 0.5, 2), (-3.0, 0.5, 0.3, 9), (1.0, 2.0, 0.8, 40)] {
            let f = special_case_factor(&sc(delta, nu, lambda, n)).unwrap();
            let c = expand_factors(f.first, f.second);
            let (s, _) = solve_palindromic(&PalindromicQuartic::new(c[1], c[2]));
            let mut got = [s[0].re, s[1].re];
            let mut want = [f.first, f.second];
            got.sort_by(f64::total_cmp);
            want.sort_by(f64::total_cmp);
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() <= 1e-10 * w.abs().max(1.0), "{got:?} {want:?}");
            }
        }
    }

    #[test]
    fn hyperbolicity_examples() {
        let t = 1e-7;
        for n in 1..=46 {
            assert!(special_case_hyperbolicity(&sc(1.0, 1.0, 0.5, n), t).unwrap());
            assert!(!special_case_hyperbolicity(&sc(0.0, 1.0, 0.5, n), t).unwrap());
        }
        assert!(!special_case_hyperbolicity(&sc(1.0, -1.0, 0.5, 2), t).unwrap());
        assert!(!special_case_hyperbolicity(&sc(1.0, -1.0, 0.5, 4), t).unwrap());
        for n in 5..=46 {
            assert!(special_case_hyperbolicity(&sc(1.0, -1.0, 0.5, n), t).unwrap());
        }
        let cfg = RunConfig::default();
        for (delta, nu) in [(1.0, -1.0), (-1.0, 1.0), (1.0, 1.0), (0.0, 1.0)] {
            for n in 1..=46 {
                let s = sc(delta, nu, 0.5, n);
                let r = full_report(&special_case_matrix(delta), &s.p, n, &cfg).unwrap();
                assert_eq!(
                    special_case_hyperbolicity(&s, t).unwrap(),
                    r.classification.is_hyperbolic(),
                    "delta={delta} nu={nu} n={n}"
                );
            }
        }
    }

    #[test]
    fn table_examples() {
        let cfg = RunConfig::default();
        let h = special_case_matrix(1.0);
        let p = params(1.0, 0.5);
        let t = asymptotic_table(&h, &p, &[2, 20], &cfg).unwrap();
        assert!((t.rows[0].x2 - 4.0).abs() < 1e-12);
        assert!((t.rows[0].ratio2 - 1.0).abs() < 1e-12);
        let row = t.rows[1];
        assert!(row.x1 < 22.0 && row.x1 > 21.9);
        assert!((row.ratio1 - 1.1).abs() < 0.01);
        assert_eq!(t.x1_sign, 1);
        assert!(matches!(
            asymptotic_table(&h, &params(0.0, 0.5), &[5], &cfg),
            Err(Error::NotWithTorsion)
        ));
        assert!(matches!(
            asymptotic_table(&HomoclinicMatrix::identity(), &p, &[5], &cfg),
            Err(Error::NotStronglyTransverse { .. })
        ));
        // ν = −1 puts S₁ = 0 at n = 2
        assert!(matches!(
            asymptotic_table(&h, &params(-1.0, 0.5), &[2], &cfg),
            Err(Error::NotYetHyperbolic { n: 2 })
        ));
    }

    #[test]
    fn onset_and_trend() {
        let cfg = RunConfig::default();
        let scan = onset_scan(&special_case_matrix(1.0), &params(-1.0, 0.5), 46, &cfg, |c| {
            c == Classification::HyperbolicReal
        })
        .unwrap();
        assert_eq!(scan.n0, Some(5));
        let scan = onset_scan(&special_case_matrix(0.0), &params(1.0, 0.5), 20, &cfg, |c| c.is_hyperbolic()).unwrap();
        assert_eq!(scan.n0, None);

        let t = trend(&[(1, 0.5), (2, 0.3), (3, 0.35), (4, 0.1), (5, 0.05)]).unwrap();
        assert!(t.improving());
        let t = trend(&[(1, 0.5), (2, 0.3), (3, 0.35), (4, 0.1)]).unwrap();
        assert!(!t.improving());
        // a lucky first sample does not hide the decay that follows
        let t = trend(&[(1, 0.004), (2, 0.8), (3, 0.5), (4, 0.2), (5, 0.1), (6, 0.05), (7, 0.03)]).unwrap();
        assert!(t.improving());
        let t = trend(&[(1, 0.9), (2, 0.5), (3, 0.2), (4, 0.1), (5, 0.1), (6, 0.2), (7, 0.3)]).unwrap();
        assert!(!t.improving());
        let mut settled = vec![(1, 0.3), (2, 1e-3), (3, 1e-8)];
        settled.extend((4..=9).map(|n| (n, if n % 2 == 0 { 0.0 } else { 2e-16 })));
        assert!(trend(&settled).unwrap().improving());
        let flat: Vec<(u32, f64)> = (1..=6).map(|n| (n, if n % 2 == 0 { 2e-16 } else { 0.0 })).collect();
        let t = trend(&flat).unwrap();
        assert!(!t.improving() && t.converging());
        let t = trend(&[(1, 0.1), (2, 0.1), (3, 0.1), (4, 0.1), (5, 0.1)]).unwrap();
        assert!(!t.converging());
    }
}
