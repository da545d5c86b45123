//! Seeded random symplectic matrices built from elementary generators.
//!
//! Generators (all symplectic for `ω = dρ∧dφ + ds∧du`):
//! `(φ,ρ)` shears in both directions, `(s,u)` shears in both directions,
//! the `(s,u)` scaling `diag(1, k, 1, 1/k)`, the plane swap
//! `e_φ ↔ e_u, e_ρ ↔ e_s`, and two cross shears `(ρ, s) += a·(u, φ)` and
//! `(φ, u) += a·(s, ρ)` that couple the angle-action and hyperbolic planes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::homoclinic::{transversality_delta, HomoclinicMatrix};
use crate::symplectic::{mat_mul, Mat4, PHI, RHO, S, U};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    PhiRhoShear,
    RhoPhiShear,
    SuShear,
    UsShear,
    SuScaling,
    Swap,
    CrossActionShear,
    CrossAngleShear,
}

impl Generator {
    pub const ALL: [Generator; 8] = [
        Generator::PhiRhoShear,
        Generator::RhoPhiShear,
        Generator::SuShear,
        Generator::UsShear,
        Generator::SuScaling,
        Generator::Swap,
        Generator::CrossActionShear,
        Generator::CrossAngleShear,
    ];

    /// The generator matrix; `a` is the shear amount or `ln k` for the scaling.
    pub fn matrix(self, a: f64) -> Mat4 {
        let mut m = Mat4::identity();
        match self {
            Generator::PhiRhoShear => m[(PHI, RHO)] = a,
            Generator::RhoPhiShear => m[(RHO, PHI)] = a,
            Generator::SuShear => m[(S, U)] = a,
            Generator::UsShear => m[(U, S)] = a,
            Generator::SuScaling => {
                m[(S, S)] = a.exp();
                m[(U, U)] = (-a).exp();
            }
            Generator::CrossActionShear => {
                m[(RHO, U)] = a;
                m[(S, PHI)] = a;
            }
            Generator::CrossAngleShear => {
                m[(PHI, S)] = a;
                m[(U, RHO)] = a;
            }
            Generator::Swap => {
                m = Mat4::zero();
                m[(U, PHI)] = 1.0;
                m[(S, RHO)] = 1.0;
                m[(RHO, S)] = 1.0;
                m[(PHI, U)] = 1.0;
            }
        }
        m
    }
}

/// Shape of the random products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    /// Number of generator factors per matrix.
    pub factors: usize,
    /// Shear amounts and log-scalings are uniform in `[-magnitude, magnitude]`.
    pub magnitude: f64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            factors: 8,
            magnitude: 1.0,
        }
    }
}

pub fn random_symplectic<R: Rng>(rng: &mut R, cfg: &EnsembleConfig) -> Mat4 {
    (0..cfg.factors).fold(Mat4::identity(), |acc, _| {
        let g = Generator::ALL[rng.random_range(0..Generator::ALL.len())];
        let a = rng.random_range(-cfg.magnitude..=cfg.magnitude);
        mat_mul(&g.matrix(a), &acc)
    })
}

/// `count` random symplectic homoclinic matrices from `seed`.
pub fn symplectic_ensemble(count: usize, seed: u64, cfg: &EnsembleConfig) -> Vec<HomoclinicMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            HomoclinicMatrix::new(random_symplectic(&mut rng, cfg))
                .expect("generator products are symplectic")
        })
        .collect()
}

/// Acceptance window for strongly transverse samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseFilter {
    pub min_abs_delta: f64,
    pub min_abs_d22: f64,
    pub max_entry: f64,
}

impl Default for TransverseFilter {
    fn default() -> Self {
        TransverseFilter {
            min_abs_delta: 0.25,
            min_abs_d22: 0.25,
            max_entry: 4.0,
        }
    }
}

/// Rejection-samples strongly transverse matrices (`|Δ|`, `|d₂₂|` bounded away from 0).
pub fn strongly_transverse_ensemble(
    count: usize,
    seed: u64,
    cfg: &EnsembleConfig,
    filter: &TransverseFilter,
) -> Vec<HomoclinicMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let m = random_symplectic(&mut rng, cfg);
        let h = HomoclinicMatrix::new(m).expect("generator products are symplectic");
        if transversality_delta(&h).abs() >= filter.min_abs_delta
            && h.d22().abs() >= filter.min_abs_d22
            && m.max_abs() <= filter.max_entry
        {
            out.push(h);
        }
    }
    out
}

/// A fixed integer witness with `d₂₂ = 0` and `Δ = 1`: the plane swap after an `(s,u)` shear of −1.
pub fn d22_zero_witness() -> HomoclinicMatrix {
    let m = mat_mul(
        &Generator::Swap.matrix(0.0),
        &Generator::SuShear.matrix(-1.0),
    );
    HomoclinicMatrix::new(m).expect("integer witness is symplectic")
}

/// Random symplectic matrices with `d₂₂ = 0` exactly and `Δ ≥ filter.min_abs_delta > 0`.
///
/// A `u += a·s` shear applied on the left cancels `d₂₂`; a final
/// `diag(-1, 1, -1, 1)` flips the sign of `Δ` when needed.
pub fn d22_zero_ensemble(
    count: usize,
    seed: u64,
    cfg: &EnsembleConfig,
    filter: &TransverseFilter,
) -> Vec<HomoclinicMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let r = random_symplectic(&mut rng, cfg);
        if r[(S, U)].abs() < 0.1 {
            continue;
        }
        let a = -r[(U, U)] / r[(S, U)];
        let mut m = mat_mul(&Generator::UsShear.matrix(a), &r);
        m[(U, U)] = 0.0;
        let Ok(h) = HomoclinicMatrix::new(m) else {
            continue;
        };
        let delta = transversality_delta(&h);
        if delta.abs() < filter.min_abs_delta || m.max_abs() > filter.max_entry {
            continue;
        }
        let h = if delta < 0.0 {
            let flip = Mat4::diag([-1.0, 1.0, -1.0, 1.0]);
            HomoclinicMatrix::new(mat_mul(&flip, &m)).expect("sign flip is symplectic")
        } else {
            h
        };
        out.push(h);
    }
    out
}
