//! The linear part of the Poincaré map near the torus, for three degrees of
//! freedom:
//!
//! ```text
//! f_l(φ, s, ρ, u) = (φ + ω + νρ, λs, ρ, λ⁻¹u)
//! ```
//!
//! `ω` only rotates the angle and never enters `Df_l`, so it plays no part in
//! the spectral modules.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::config::PrecisionMode;
use crate::error::{Error, Result};
use crate::precision::{check_guard, Field};
use crate::symplectic::{Mat4, Vec4, PHI, RHO, S, U};

/// `2π · (√5 − 1)/2`, a badly approximable rotation per return.
pub const GOLDEN_OMEGA: f64 = TAU * 0.618_033_988_749_894_9;

/// Torus data `(ω, ν, λ)` of the sectioned linear model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModelParams {
    pub omega: f64,
    pub nu: f64,
    pub lambda: f64,
}

/// Whether the torus twists: `ν ≠ 0`, tested exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TorsionFlag {
    pub with_torsion: bool,
}

impl LinearModelParams {
    pub fn new(omega: f64, nu: f64, lambda: f64) -> Result<Self> {
        let p = LinearModelParams { omega, nu, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0, 1), got {}",
                self.lambda
            )));
        }
        if !self.nu.is_finite() || !self.omega.is_finite() {
            return Err(Error::InvalidParameter("omega and nu must be finite".into()));
        }
        Ok(())
    }

    pub fn torsion(&self) -> TorsionFlag {
        TorsionFlag {
            with_torsion: self.nu != 0.0,
        }
    }
}

pub fn apply_f_l(p: &LinearModelParams, z: Vec4) -> Vec4 {
    Vec4::new(
        z.phi() + p.omega + p.nu * z.rho(),
        p.lambda * z.s(),
        z.rho(),
        z.u() / p.lambda,
    )
}

/// `f_lⁿ(z)` in closed form.
pub fn iterate_f_l(p: &LinearModelParams, z: Vec4, n: u32) -> Vec4 {
    let k = n as f64;
    let ln = p.lambda.powi(n as i32);
    Vec4::new(
        z.phi() + k * (p.omega + p.nu * z.rho()),
        ln * z.s(),
        z.rho(),
        z.u() / ln,
    )
}

pub fn d_f_l(p: &LinearModelParams) -> Mat4 {
    let mut m = Mat4::diag([1.0, p.lambda, 1.0, 1.0 / p.lambda]);
    m[(PHI, RHO)] = p.nu;
    m
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be a positive integer".into()));
    }
    Ok(())
}

/// `Df_lⁿ` in closed form, guarded for standard precision.
pub fn d_f_l_pow(p: &LinearModelParams, n: u32) -> Result<Mat4> {
    check_n(n)?;
    check_guard(p.lambda, n, PrecisionMode::Standard)?;
    Ok(d_f_l_pow_unchecked(p, n))
}

pub(crate) fn d_f_l_pow_unchecked(p: &LinearModelParams, n: u32) -> Mat4 {
    let mut m = Mat4::diag([1.0, p.lambda.powi(n as i32), 1.0, p.lambda.powi(-(n as i32))]);
    m[(PHI, RHO)] = n as f64 * p.nu;
    m
}

/// `Df_lⁿ` with entries in an arbitrary [`Field`]; `λ⁻ⁿ` is formed as `1/λⁿ`.
pub fn d_f_l_pow_in<F: Field>(p: &LinearModelParams, n: u32) -> [[F; 4]; 4] {
    let mut m: [[F; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| F::zero()));
    let ln = F::from_f64(p.lambda).powu(n);
    m[PHI][PHI] = F::one();
    m[S][S] = ln.clone();
    m[RHO][RHO] = F::one();
    m[U][U] = F::one() / ln;
    m[PHI][RHO] = F::from_u32(n) * F::from_f64(p.nu);
    m
}

const RATIONAL_DENOMINATOR_LIMIT: u64 = 10_000;

/// Warns when `ω/2π` sits within `1e-12` of a rational with a small denominator.
///
/// Resonant rotations make the angle-alignment sets of the return-time domains
/// thin or empty.
pub fn rotation_number_warning(omega: f64) -> Option<String> {
    let x = omega / TAU;
    (1..=RATIONAL_DENOMINATOR_LIMIT).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() < 1e-12).then(|| {
            format!("omega/2pi = {x} is rational ({p}/{q}) to within 1e-12; return-time domains may be degenerate")
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::DoubleDouble;
    use crate::symplectic::{is_symplectic, mat_mul};
    use proptest::prelude::*;

    fn params(omega: f64, nu: f64, lambda: f64) -> LinearModelParams {
        LinearModelParams::new(omega, nu, lambda).unwrap()
    }

    fn close(a: Vec4, b: Vec4, tol: f64) -> bool {
        a.displacement_from(b).iter().all(|d| d.abs() <= tol)
    }

    #[test]
    fn f_l_examples() {
        let p = params(0.0, 1.0, 0.5);
        assert_eq!(apply_f_l(&p, Vec4::new(0.0, 1.0, 0.0, 1.0)), Vec4::new(0.0, 0.5, 0.0, 2.0));
        let p = params(0.1, 2.0, 0.5);
        let z = apply_f_l(&p, Vec4::new(0.0, 0.0, 0.3, 0.0));
        assert!(close(z, Vec4::new(0.7, 0.0, 0.3, 0.0), 1e-15));
        let p = params(0.0, 3.0, 0.2);
        let torus_point = Vec4::new(1.234, 0.0, 0.0, 0.0);
        assert_eq!(apply_f_l(&p, torus_point), torus_point);
    }

    #[test]
    fn differential_examples() {
        assert_eq!(d_f_l(&params(0.0, 0.0, 0.5)), Mat4::diag([1.0, 0.5, 1.0, 2.0]));
        let m = d_f_l(&params(0.0, 1.0, 0.5));
        assert_eq!(
            m,
            Mat4([
                [1.0, 0.0, 1.0, 0.0],
                [0.0, 0.5, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 2.0],
            ])
        );
        for (nu, lambda) in [(1.0, 0.5), (-3.0, 0.9), (0.0, 0.01), (1e3, 0.3)] {
            assert!(is_symplectic(&d_f_l(&params(0.0, nu, lambda)), 1e-12));
        }
    }

    #[test]
    fn power_examples() {
        let p = params(0.0, 1.0, 0.5);
        assert_eq!(d_f_l_pow(&p, 1).unwrap(), d_f_l(&p));
        let m = d_f_l_pow(&p, 2).unwrap();
        assert_eq!((m[(PHI, RHO)], m[(S, S)], m[(U, U)]), (2.0, 0.25, 4.0));
        let p0 = params(0.0, 0.0, 0.5);
        assert_eq!(
            d_f_l_pow(&p0, 10).unwrap(),
            Mat4::diag([1.0, 2f64.powi(-10), 1.0, 2f64.powi(10)])
        );
        assert!(matches!(d_f_l_pow(&p, 47), Err(Error::ConditioningExceeded { .. })));
        assert!(d_f_l_pow(&p, 0).is_err());
    }

    #[test]
    fn generic_power_matches() {
        let p = params(0.0, 0.7, 0.3);
        let dd: [[DoubleDouble; 4]; 4] = d_f_l_pow_in(&p, 20);
        let f = d_f_l_pow(&p, 20).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let rel = (dd[i][j].to_f64() - f[(i, j)]).abs() / f[(i, j)].abs().max(1.0);
                assert!(rel < 1e-15);
            }
        }
    }

    #[test]
    fn invalid_params() {
        assert!(LinearModelParams::new(0.0, 1.0, 1.0).is_err());
        assert!(LinearModelParams::new(0.0, 1.0, 0.0).is_err());
        assert!(LinearModelParams::new(0.0, f64::NAN, 0.5).is_err());
        assert!(!params(0.0, 0.0, 0.5).torsion().with_torsion);
        assert!(params(0.0, -1e-300, 0.5).torsion().with_torsion);
    }

    #[test]
    fn rotation_warning() {
        assert!(rotation_number_warning(TAU * 0.25).is_some());
        assert!(rotation_number_warning(TAU * 3.0 / 7.0).is_some());
        assert!(rotation_number_warning(GOLDEN_OMEGA).is_none());
    }

    proptest! {
        #[test]
        fn power_equals_repeated_product(nu in -5.0f64..5.0, lambda in 0.05f64..0.95, n in 1u32..40) {
            let p = params(0.0, nu, lambda);
            prop_assume!(n <= crate::precision::max_n(lambda, PrecisionMode::Standard));
            let closed = d_f_l_pow(&p, n).unwrap();
            let df = d_f_l(&p);
            let folded = (1..n).fold(df, |acc, _| mat_mul(&acc, &df));
            for i in 0..4 {
                for j in 0..4 {
                    let scale = closed[(i, j)].abs().max(1.0);
                    prop_assert!((closed[(i, j)] - folded[(i, j)]).abs() <= 1e-10 * scale);
                }
            }
            prop_assert!(is_symplectic(&closed, 1e-9));
        }

        #[test]
        fn iterates_agree_with_affine_form(
            omega in 0.0f64..6.0, nu in -3.0f64..3.0, lambda in 0.2f64..0.9,
            phi in 0.0f64..6.28, s in -1.0f64..1.0, rho in -1.0f64..1.0, u in -1.0f64..1.0,
            n in 1u32..25,
        ) {
            prop_assume!(n <= crate::precision::max_n(lambda, PrecisionMode::Standard));
            let p = params(omega, nu, lambda);
            let z = Vec4::new(phi, s, rho, u);
            let iterated = (0..n).fold(z, |acc, _| apply_f_l(&p, acc));
            let closed = iterate_f_l(&p, z, n);
            let m = d_f_l_pow(&p, n).unwrap();
            let lin = m.apply(z.to_array());
            let affine = Vec4::new(lin[0] + n as f64 * omega, lin[1], lin[2], lin[3]);
            let scale = 1.0 + z.u().abs() / lambda.powi(n as i32);
            for d in iterated.displacement_from(closed) {
                prop_assert!(d.abs() <= 1e-10 * scale);
            }
            for d in affine.displacement_from(closed) {
                prop_assert!(d.abs() <= 1e-10 * scale);
            }
        }
    }
}
