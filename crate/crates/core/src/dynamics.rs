//! Orbits of the linear model near a homoclinic excursion.
//!
//! A point `z` near `p⁺` returns close to `p⁻` after `n` iterates of `f_l`
//! when `z ∈ D_n`; the transverse map sends it there, and the homoclinic map
//! `Γ_l(p⁻ + w) = p⁺ + Π·w` brings it back near `p⁺`. In the window chart
//! `W_μ(c) = μc + p⁺` the composite is
//!
//! ```text
//! Δ_l(c) = Π·Df_lⁿ·c + Π·q/μ,   q = (φ⁺ + nω − φ⁻, λⁿs⁺, 0, −u⁻)
//! ```
//!
//! which is affine wherever the return time `n` is locally constant.
//!
//! `V±` are closed coordinate boxes of one radius around `p±`, with the angle
//! measured along the circle. The window domain is
//! `C = {|c_φ| + |c_s| ≤ 1, |c_ρ| + |c_u| ≤ 1}`.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::PrecisionMode;
use crate::error::{Error, Result};
use crate::homoclinic::HomoclinicMatrix;
use crate::linear_model::{iterate_f_l, LinearModelParams};
use crate::precision::{check_guard, max_n};
use crate::symplectic::{angle_diff, Mat4, Vec4};

/// Homoclinic points, box radius and window scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// `(φ⁺, s⁺, 0, 0)`: first point of the orbit on the local stable manifold.
    pub p_plus: Vec4,
    /// `(φ⁻, 0, 0, u⁻)`: last point of the orbit on the local unstable manifold.
    pub p_minus: Vec4,
    pub radius: f64,
    pub mu: f64,
}

impl WindowConfig {
    pub fn new(p_plus: Vec4, p_minus: Vec4, radius: f64, mu: f64) -> Result<Self> {
        let w = WindowConfig {
            p_plus,
            p_minus,
            radius,
            mu,
        };
        w.validate()?;
        Ok(w)
    }

    /// Radius `0.1·min(|s⁺|, |u⁻|)`.
    pub fn default_radius(p_plus: Vec4, p_minus: Vec4) -> f64 {
        0.1 * p_plus.s().abs().min(p_minus.u().abs())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.p_plus.rho() != 0.0 || self.p_plus.u() != 0.0 {
            return bad("p_plus must have rho = u = 0");
        }
        if self.p_minus.s() != 0.0 || self.p_minus.rho() != 0.0 {
            return bad("p_minus must have s = rho = 0");
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad("radius must be positive");
        }
        if !(self.mu > 0.0 && self.mu <= self.radius) {
            return bad("mu must satisfy 0 < mu <= radius");
        }
        Ok(())
    }
}

/// One passage `V⁺ → V⁻`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnRecord {
    pub n: u32,
    pub entry_point: Vec4,
    pub exit_point: Vec4,
}

/// Closed box of half-width `radius`, angular distance on `φ`.
pub fn in_box(center: Vec4, radius: f64, z: Vec4) -> bool {
    z.displacement_from(center).iter().all(|d| d.abs() <= radius)
}

/// `z ∈ V⁺` and `f_lⁿ(z) ∈ V⁻`.
pub fn dn_membership(w: &WindowConfig, p: &LinearModelParams, z: Vec4, n: u32) -> Result<bool> {
    check_guard(p.lambda, n, PrecisionMode::Standard)?;
    if n == 0 || !in_box(w.p_plus, w.radius, z) {
        return Ok(false);
    }
    Ok(in_box(w.p_minus, w.radius, iterate_f_l(p, z, n)))
}

/// Every `n ≤ n_max` with `z ∈ D_n`.
pub fn return_times(w: &WindowConfig, p: &LinearModelParams, z: Vec4, n_max: u32) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        if dn_membership(w, p, z, n)? {
            out.push(n);
        }
    }
    Ok(out)
}

/// `n_max` defaults to the standard-precision guard for `λ`.
pub fn default_n_max(p: &LinearModelParams) -> u32 {
    max_n(p.lambda, PrecisionMode::Standard)
}

/// `ψ_l(z) = f_lⁿ(z)` for the smallest `n ≤ n_max` with `z ∈ D_n`.
pub fn transverse_map(w: &WindowConfig, p: &LinearModelParams, z: Vec4, n_max: u32) -> Result<(Vec4, u32)> {
    for n in 1..=n_max {
        if dn_membership(w, p, z, n)? {
            return Ok((iterate_f_l(p, z, n), n));
        }
    }
    Err(Error::NotInDomain { n_max })
}

/// `Γ_l(z) = p⁺ + Π·(z − p⁻)`.
pub fn homoclinic_map_l(h: &HomoclinicMatrix, w: &WindowConfig, z: Vec4) -> Vec4 {
    let d = z.displacement_from(w.p_minus);
    let image = h.matrix().apply(d);
    w.p_plus.offset(image)
}

/// `c ∈ C`.
pub fn in_window(c: [f64; 4]) -> bool {
    c[0].abs() + c[1].abs() <= 1.0 && c[2].abs() + c[3].abs() <= 1.0
}

/// `W_μ(c) = μc + p⁺`.
pub fn window_chart(w: &WindowConfig, c: [f64; 4]) -> Vec4 {
    w.p_plus.offset(c.map(|x| w.mu * x))
}

/// `W_μ⁻¹(z) = (z − p⁺)/μ`.
pub fn window_chart_inv(w: &WindowConfig, z: Vec4) -> [f64; 4] {
    z.displacement_from(w.p_plus).map(|x| x / w.mu)
}

/// `Δ_l(c)` and the return time used. The image may leave `C`.
pub fn window_map_l(
    h: &HomoclinicMatrix,
    w: &WindowConfig,
    p: &LinearModelParams,
    c: [f64; 4],
    n_max: u32,
) -> Result<([f64; 4], u32)> {
    if !in_window(c) {
        return Err(Error::OutsideWindow);
    }
    let (z, n) = transverse_map(w, p, window_chart(w, c), n_max)?;
    Ok((window_chart_inv(w, homoclinic_map_l(h, w, z)), n))
}

/// Up to `k` successive window returns from `c`; stops when the orbit leaves
/// the return domain or the window.
pub fn itinerary(
    h: &HomoclinicMatrix,
    w: &WindowConfig,
    p: &LinearModelParams,
    c: [f64; 4],
    k: usize,
    n_max: u32,
) -> Vec<ReturnRecord> {
    let mut out = Vec::new();
    let mut c = c;
    while out.len() < k {
        let Ok((next, n)) = window_map_l(h, w, p, c, n_max) else {
            break;
        };
        let entry = window_chart(w, c);
        out.push(ReturnRecord {
            n,
            entry_point: entry,
            exit_point: iterate_f_l(p, entry, n),
        });
        c = next;
    }
    out
}

/// A uniform sample of `C`.
pub fn sample_window<R: Rng>(rng: &mut R) -> [f64; 4] {
    loop {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..=1.0));
        if in_window(c) {
            return c;
        }
    }
}

/// Seeded random search for a start point whose itinerary has at least `min_len` returns.
pub fn search_long_itinerary(
    h: &HomoclinicMatrix,
    w: &WindowConfig,
    p: &LinearModelParams,
    min_len: usize,
    seed: u64,
    attempts: usize,
    n_max: u32,
) -> Option<([f64; 4], Vec<ReturnRecord>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..attempts).find_map(|_| {
        let c = sample_window(&mut rng);
        let it = itinerary(h, w, p, c, min_len, n_max);
        (it.len() >= min_len).then_some((c, it))
    })
}

/// Central-difference Jacobian of `Δ_l` at `c` with step `step` in window
/// coordinates. Fails unless the return time is the same at every stencil point.
pub fn finite_difference_jacobian(
    h: &HomoclinicMatrix,
    w: &WindowConfig,
    p: &LinearModelParams,
    c: [f64; 4],
    step: f64,
    n_max: u32,
) -> Result<(Mat4, u32)> {
    let (_, n) = window_map_l(h, w, p, c, n_max)?;
    let mut jac = Mat4::zero();
    for j in 0..4 {
        let mut plus = c;
        let mut minus = c;
        plus[j] += step;
        minus[j] -= step;
        let (fp, np) = window_map_l(h, w, p, plus, n_max)?;
        let (fm, nm) = window_map_l(h, w, p, minus, n_max)?;
        if np != n || nm != n {
            return Err(Error::InvalidParameter(format!(
                "return time changes inside the stencil at {c:?}"
            )));
        }
        for i in 0..4 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    Ok((jac, n))
}

/// Window coordinates of each entry point of an itinerary.
pub fn window_orbit(w: &WindowConfig, records: &[ReturnRecord]) -> Vec<[f64; 4]> {
    records
        .iter()
        .map(|r| window_chart_inv(w, r.entry_point))
        .collect()
}

/// Geometric-mean growth of the `u` window coordinate, measured from the
/// fixed point of the affine return map.
///
/// Requires at least two records sharing one return time. With constant `n`
/// the deviation from the fixed point evolves by `Π·Df_lⁿ` exactly, so the
/// rate approaches the dominant eigenvalue modulus.
pub fn measured_u_expansion(
    h: &HomoclinicMatrix,
    w: &WindowConfig,
    p: &LinearModelParams,
    records: &[ReturnRecord],
) -> Option<f64> {
    let n = records.first()?.n;
    if records.len() < 2 || records.iter().any(|r| r.n != n) {
        return None;
    }
    let lin = (*h.matrix() * crate::linear_model::d_f_l_pow_unchecked(p, n)).to_nalgebra();
    let q = [
        angle_diff(w.p_plus.phi() + n as f64 * p.omega, w.p_minus.phi()),
        p.lambda.powi(n as i32) * w.p_plus.s(),
        0.0,
        -w.p_minus.u(),
    ];
    let offset = h.matrix().apply(q).map(|x| x / w.mu);
    let fixed = (Matrix4::identity() - lin).lu().solve(&Vector4::from(offset))?;
    let orbit = window_orbit(w, records);
    let dev = |c: &[f64; 4]| (c[3] - fixed[3]).abs();
    let (first, last) = (dev(&orbit[0]), dev(orbit.last()?));
    if first == 0.0 {
        return None;
    }
    Some((last / first).powf(1.0 / (orbit.len() - 1) as f64))
}

/// Window with `φ⁺ = 0`, `φ⁻ = 2` and `ω = 1`, tuned for the shear matrix
/// `Π(1)` with `ν = 1`, `λ = 1/2`: points near the fixed point of the affine
/// return map come back after exactly `n = 2` iterates for many rounds.
pub fn engineered_window() -> (WindowConfig, LinearModelParams) {
    let w = WindowConfig::new(
        Vec4::new(0.0, 0.12, 0.0, 0.0),
        Vec4::new(2.0, 0.0, 0.0, 0.3),
        0.15,
        0.12,
    )
    .expect("valid window");
    let p = LinearModelParams::new(1.0, 1.0, 0.5).expect("valid params");
    (w, p)
}

/// The fixed point of the affine return map of [`engineered_window`] for `n = 2`.
pub fn engineered_fixed_point() -> [f64; 4] {
    let (w, _) = engineered_window();
    [0.0, w.p_plus.s() / (3.0 * w.mu), 0.0, w.p_minus.u() / (3.0 * w.mu)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::special_case_matrix;
    use crate::linear_model::{apply_f_l, GOLDEN_OMEGA};
    use crate::spectrum::transition_matrix;
    use std::f64::consts::TAU;

    fn window(phi_minus: f64) -> WindowConfig {
        let p_plus = Vec4::new(0.5, 0.4, 0.0, 0.0);
        let p_minus = Vec4::new(phi_minus, 0.0, 0.0, 0.3);
        let r = WindowConfig::default_radius(p_plus, p_minus);
        WindowConfig::new(p_plus, p_minus, r, r / 2.0).unwrap()
    }

    #[test]
    fn box_examples() {
        let c = Vec4::new(1.0, 0.2, -0.3, 0.4);
        assert!(in_box(c, 0.1, c));
        assert!(!in_box(c, 0.1, c.offset([0.0, 0.2, 0.0, 0.0])));
        let c = Vec4::new(0.05, 0.0, 0.0, 0.0);
        assert!(in_box(c, 0.1, Vec4::new(TAU - 0.02, 0.0, 0.0, 0.0)));
    }

    #[test]
    fn config_validation() {
        let w = window(1.0);
        assert!((w.radius - 0.03).abs() < 1e-15);
        let bad = WindowConfig::new(Vec4::new(0.0, 0.1, 0.1, 0.0), w.p_minus, 0.1, 0.05);
        assert!(bad.is_err());
        assert!(WindowConfig::new(w.p_plus, w.p_minus, 0.1, 0.2).is_err());
    }

    /// `n`, `ω` with `φ⁺ + nω ≡ φ⁻`, and the point `p⁺ + λⁿu⁻ e_u`.
    fn aligned(n: u32) -> (WindowConfig, LinearModelParams, Vec4) {
        let w = window(2.0);
        let omega = (w.p_minus.phi() - w.p_plus.phi()) / n as f64;
        let p = LinearModelParams::new(omega, 1.0, 0.5).unwrap();
        let z = w.p_plus.offset([0.0, 0.0, 0.0, 0.5f64.powi(n as i32) * w.p_minus.u()]);
        (w, p, z)
    }

    #[test]
    fn dn_examples() {
        let p = LinearModelParams::new(GOLDEN_OMEGA, 1.0, 0.5).unwrap();
        let w = window(2.0);
        for n in 1..=46 {
            assert!(!dn_membership(&w, &p, w.p_plus, n).unwrap());
        }
        let (w, p, z) = aligned(6);
        assert!(dn_membership(&w, &p, z, 6).unwrap());
        // the u-coordinate overshoots from here on
        for n in 7..=46 {
            assert!(!dn_membership(&w, &p, z, n).unwrap());
        }
        assert!(matches!(dn_membership(&w, &p, z, 47), Err(Error::ConditioningExceeded { .. })));
    }

    #[test]
    fn transverse_map_examples() {
        let (w, p, z) = aligned(6);
        let (image, n) = transverse_map(&w, &p, z, 46).unwrap();
        assert_eq!(n, 6);
        assert!((image.u() - w.p_minus.u()).abs() < 1e-15);
        assert_eq!(
            transverse_map(&w, &p, w.p_plus, 46),
            Err(Error::NotInDomain { n_max: 46 })
        );
    }

    #[test]
    fn doubling_u_shifts_return_time() {
        let w = window(2.0);
        let p = LinearModelParams::new(0.0, 0.0, 0.5).unwrap();
        // ω = 0 and φ⁺ ≠ φ⁻ leave no alignment; use a window over φ⁺ instead
        let w = WindowConfig::new(w.p_plus, Vec4::new(w.p_plus.phi(), 0.0, 0.0, 0.3), w.radius, w.mu).unwrap();
        for n in 5..=20u32 {
            let z = w.p_plus.offset([0.0, 0.0, 0.0, 0.5f64.powi(n as i32) * 0.3]);
            let doubled = w.p_plus.offset([0.0, 0.0, 0.0, 2.0 * z.u()]);
            let scan = |z: Vec4| return_times(&w, &p, z, 46).unwrap();
            let (t, td) = (scan(z), scan(doubled));
            assert_eq!(t.first(), Some(&n));
            assert_eq!(td.first(), Some(&(n - 1)));
            assert_eq!(transverse_map(&w, &p, doubled, 46).unwrap().1, n - 1);
        }
    }

    #[test]
    fn homoclinic_map_examples() {
        let w = window(2.0);
        let id = HomoclinicMatrix::identity();
        assert_eq!(homoclinic_map_l(&id, &w, w.p_minus), w.p_plus);
        let z = homoclinic_map_l(&id, &w, w.p_minus.offset([0.0, 0.0, 0.0, 1.0]));
        assert_eq!(z, w.p_plus.offset([0.0, 0.0, 0.0, 1.0]));
        let z = homoclinic_map_l(&special_case_matrix(1.0), &w, w.p_minus.offset([1.0, 0.0, 0.0, 0.0]));
        let want = w.p_plus.offset([1.0, 0.0, 1.0, 0.0]);
        assert!(z.displacement_from(want).iter().all(|d| d.abs() < 1e-15));
    }

    #[test]
    fn window_map_is_affine_with_transition_linear_part() {
        let h = special_case_matrix(1.0);
        let (w, p) = engineered_window();
        let m = transition_matrix(&h, &p, 2).unwrap();
        let base = engineered_fixed_point();
        for offset in [[0.0, 0.0, 0.0, 0.0], [0.01, -0.05, 0.002, 0.03], [-0.02, 0.1, -0.004, -0.1]] {
            let c: [f64; 4] = std::array::from_fn(|i| base[i] + offset[i]);
            let (jac, n) = finite_difference_jacobian(&h, &w, &p, c, 1e-6 * w.mu, 46).unwrap();
            assert_eq!(n, 2);
            let err = jac.sub(&m).max_abs() / m.max_abs();
            assert!(err < 1e-6, "{err}");
        }
    }

    #[test]
    fn fixed_point_is_fixed() {
        let h = special_case_matrix(1.0);
        let (w, p) = engineered_window();
        let c = engineered_fixed_point();
        let (image, n) = window_map_l(&h, &w, &p, c, 46).unwrap();
        assert_eq!(n, 2);
        for i in 0..4 {
            assert!((image[i] - c[i]).abs() < 1e-12, "{image:?} {c:?}");
        }
    }

    #[test]
    fn itinerary_examples() {
        let h = special_case_matrix(1.0);
        let (w, p) = engineered_window();
        let mut c = engineered_fixed_point();
        c[3] += 1e-4;
        assert!(itinerary(&h, &w, &p, c, 0, 46).is_empty());
        let it = itinerary(&h, &w, &p, c, 6, 46);
        assert_eq!(it.len(), 6);
        for r in &it {
            assert_eq!(r.n, 2);
            let stepped = (0..r.n).fold(r.entry_point, |z, _| apply_f_l(&p, z));
            assert!(stepped.displacement_from(r.exit_point).iter().all(|d| d.abs() < 1e-10));
        }
        let rate = measured_u_expansion(&h, &w, &p, &it).unwrap();
        assert!((rate - 4.0).abs() < 1e-6, "{rate}");

        // the stable-manifold point escapes at once
        assert!(itinerary(&h, &w, &p, [0.0; 4], 5, 46).is_empty());
        assert_eq!(window_map_l(&h, &w, &p, [0.0; 4], 46), Err(Error::NotInDomain { n_max: 46 }));
        assert_eq!(window_map_l(&h, &w, &p, [1.0, 1.0, 0.0, 0.0], 46), Err(Error::OutsideWindow));
    }

    #[test]
    fn random_search_replays() {
        let h = special_case_matrix(1.0);
        let (w, p) = engineered_window();
        let (c, it) = search_long_itinerary(&h, &w, &p, 3, 7, 200_000, 46).expect("long itinerary");
        assert!(it.len() >= 3);
        assert_eq!(itinerary(&h, &w, &p, c, 3, 46), it);
    }
}
