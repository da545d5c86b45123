//! The homoclinic matrix `Π` and the transversality hierarchy.
//!
//! In the basis `(e_φ, e_s, e_ρ, e_u)` the matrix splits into 2×2 blocks
//!
//! ```text
//!     ⎛ A  B ⎞        A = rows {φ,s} × cols {φ,s}   B = rows {φ,s} × cols {ρ,u}
//! Π = ⎝ C  D ⎠        C = rows {ρ,u} × cols {φ,s}   D = rows {ρ,u} × cols {ρ,u}
//! ```
//!
//! Locally the unstable manifold of the torus at `p⁻` is tangent to
//! `span{e_φ, e_u}` and the stable manifold at `p⁺` to `span{e_φ, e_s}`. `Π` is
//! transverse when the image of the first plus the second fills the section,
//! which happens exactly when `Δ = c₁₁d₂₂ − d₁₂c₂₁ ≠ 0`.
//!
//! Both manifolds are foliated by one-dimensional Fenichel fibers; the unstable
//! fiber through a torus point is the `u`-axis. `d₂₂ ≠ 0` says that `Π` carries
//! that fiber transversally across the invariant hyperplane `{u = 0}`.

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::symplectic::{symplectic_residual, Mat4, PHI, RHO, S, U};

/// The four 2×2 blocks of `Π`; `a[i][j]` is `a_{i+1, j+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Blocks {
    pub a: [[f64; 2]; 2],
    pub b: [[f64; 2]; 2],
    pub c: [[f64; 2]; 2],
    pub d: [[f64; 2]; 2],
}

/// A 4×4 homoclinic matrix, symplectic unless built with [`HomoclinicMatrix::unchecked`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomoclinicMatrix {
    pi: Mat4,
    symplectic: bool,
}

impl HomoclinicMatrix {
    /// Validates finiteness and symplecticity at the default `tol_spec`.
    pub fn new(pi: Mat4) -> Result<Self> {
        Self::with_tolerance(pi, Tolerances::default().tol_spec)
    }

    pub fn with_tolerance(pi: Mat4, tol_spec: f64) -> Result<Self> {
        if !pi.is_finite() {
            return Err(Error::NonFinite);
        }
        let residual = symplectic_residual(&pi);
        if !(residual <= tol_spec) {
            return Err(Error::NonSymplectic {
                residual,
                tol: tol_spec,
            });
        }
        Ok(HomoclinicMatrix {
            pi,
            symplectic: true,
        })
    }

    /// Skips the symplecticity requirement. Spectral operations on such a
    /// matrix fall back to the dense oracle instead of the palindromic solver.
    pub fn unchecked(pi: Mat4) -> Self {
        let symplectic = symplectic_residual(&pi) <= Tolerances::default().tol_spec;
        HomoclinicMatrix { pi, symplectic }
    }

    pub fn identity() -> Self {
        HomoclinicMatrix {
            pi: Mat4::identity(),
            symplectic: true,
        }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.pi
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic
    }

    pub fn blocks(&self) -> Blocks {
        let m = &self.pi;
        let block = |r: usize, c: usize| {
            [
                [m[(r, c)], m[(r, c + 1)]],
                [m[(r + 1, c)], m[(r + 1, c + 1)]],
            ]
        };
        Blocks {
            a: block(PHI, PHI),
            b: block(PHI, RHO),
            c: block(RHO, PHI),
            d: block(RHO, RHO),
        }
    }

    pub fn d22(&self) -> f64 {
        self.pi[(U, U)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransversalityReport {
    pub delta: f64,
    pub transverse: bool,
    pub strongly_transverse: bool,
    pub d22: f64,
}

/// `Δ = det [[c₁₁, d₁₂], [c₂₁, d₂₂]]`.
pub fn transversality_delta(h: &HomoclinicMatrix) -> f64 {
    let m = h.matrix();
    m[(RHO, PHI)] * m[(U, U)] - m[(RHO, U)] * m[(U, PHI)]
}

/// Columns `(Π e_φ, Π e_u, e_φ, e_s)`: the image of `T W⁻` next to `T W⁺`.
pub fn tangent_span_matrix(h: &HomoclinicMatrix) -> Mat4 {
    let m = h.matrix();
    let mut k = Mat4::zero();
    for i in 0..4 {
        k[(i, 0)] = m[(i, PHI)];
        k[(i, 1)] = m[(i, U)];
    }
    k[(PHI, 2)] = 1.0;
    k[(S, 3)] = 1.0;
    k
}

/// Singular values of [`tangent_span_matrix`], largest first.
pub fn tangent_span_singular_values(h: &HomoclinicMatrix) -> [f64; 4] {
    let sv = tangent_span_matrix(h).to_nalgebra().singular_values();
    let mut out = [sv[0], sv[1], sv[2], sv[3]];
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

/// Numerical-rank test of `Π(T_{p⁻}W⁻) + T_{p⁺}W⁺ = T_{p⁺}S`.
///
/// Full rank means every singular value exceeds `tol_rank · σ_max`.
pub fn is_transverse_rank_oracle(h: &HomoclinicMatrix, tol_rank: f64) -> bool {
    let sv = tangent_span_singular_values(h);
    sv[3] > tol_rank * sv[0]
}

/// Range of `|Δ|` inside which the determinant test and the rank oracle may
/// legitimately disagree: `[tol_rank / σ_max⁴, tol_rank · σ_max⁴]` for the
/// singular values of [`tangent_span_matrix`].
pub fn rank_disagreement_band(h: &HomoclinicMatrix, tol_rank: f64) -> (f64, f64) {
    let k = tangent_span_singular_values(h)[0].powi(4);
    (tol_rank / k, tol_rank * k)
}

/// Whether the determinant test and the rank oracle agree, or `|Δ|` lies in the band.
pub fn transversality_tests_consistent(h: &HomoclinicMatrix, tol_rank: f64) -> bool {
    let delta = transversality_delta(h).abs();
    let (lo, hi) = rank_disagreement_band(h, tol_rank);
    (delta > tol_rank) == is_transverse_rank_oracle(h, tol_rank) || (lo..=hi).contains(&delta)
}

pub fn transversality_report(h: &HomoclinicMatrix, tol_rank: f64) -> TransversalityReport {
    let delta = transversality_delta(h);
    let d22 = h.d22();
    let transverse = delta.abs() > tol_rank;
    TransversalityReport {
        delta,
        transverse,
        strongly_transverse: transverse && d22.abs() > tol_rank,
        d22,
    }
}

/// Whether `Π` maps the unstable fiber direction `e_u` across `{u = 0}`.
pub fn fenichel_leaf_test(h: &HomoclinicMatrix) -> bool {
    h.d22() != 0.0
}
