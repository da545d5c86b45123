//! Scalar types for the coefficient pipeline and the conditioning guard.
//!
//! `λ⁻ⁿ` dominates every entry of the transition matrix, so each precision
//! mode admits `n` only while `λ⁻ⁿ` stays below a fixed power of two.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::config::PrecisionMode;
use crate::error::{Error, Result};

/// Ring operations plus exact conversion from binary64.
pub trait Field:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Exact for every finite input.
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_u32(n: u32) -> Self {
        Self::from_f64(n as f64)
    }

    fn powu(&self, mut n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            n >>= 1;
        }
        acc
    }
}

impl Field for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powu(&self, n: u32) -> Self {
        self.powi(n as i32)
    }
}

/// Unevaluated sum `hi + lo` of two doubles (≈106-bit significand).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const fn new(hi: f64) -> Self {
        DoubleDouble { hi, lo: 0.0 }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        DoubleDouble::renorm(s, e + f)
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        DoubleDouble::renorm(p, e + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for DoubleDouble {
    type Output = Self;

    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * DoubleDouble::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * DoubleDouble::new(q2);
        let q3 = r.hi / o.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        DoubleDouble { hi: q1, lo: q2 } + DoubleDouble::new(q3)
    }
}

impl Field for DoubleDouble {
    fn from_f64(x: f64) -> Self {
        DoubleDouble::new(x)
    }

    fn to_f64(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Working precision of [`Ext`], in bits.
pub const EXTENDED_BITS: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

/// Software float with a 256-bit significand.
#[derive(Debug, Clone)]
pub struct Ext(pub BigFloat);

impl Add for Ext {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Ext(self.0.add(&o.0, EXTENDED_BITS, RM))
    }
}

impl Sub for Ext {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        Ext(self.0.sub(&o.0, EXTENDED_BITS, RM))
    }
}

impl Mul for Ext {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        Ext(self.0.mul(&o.0, EXTENDED_BITS, RM))
    }
}

impl Div for Ext {
    type Output = Self;

    fn div(self, o: Self) -> Self {
        Ext(self.0.div(&o.0, EXTENDED_BITS, RM))
    }
}

impl Neg for Ext {
    type Output = Self;

    fn neg(self) -> Self {
        Ext(self.0.neg())
    }
}

impl Field for Ext {
    fn from_f64(x: f64) -> Self {
        Ext(BigFloat::from_f64(x, EXTENDED_BITS))
    }

    fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, exponent, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        // normalized mantissa 0.1xxx… stored least significant word first
        let top = *words.last().expect("non-zero mantissa") as f64;
        let e = exponent as i32 - 64;
        let mag = if e < -1000 {
            top * 2f64.powi(-1000) * 2f64.powi(e + 1000)
        } else {
            top * 2f64.powi(e)
        };
        match sign {
            Sign::Neg => -mag,
            Sign::Pos => mag,
        }
    }

    fn powu(&self, n: u32) -> Self {
        Ext(self.0.powi(n as usize, EXTENDED_BITS, RM))
    }
}

impl Field for BigRational {
    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite input")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }

    fn one() -> Self {
        BigRational::from_integer(BigInt::from(1))
    }
}

/// `log₂` of the largest admissible `λ⁻ⁿ` in each mode.
///
/// Standard mode reserves 6 bits of the 52-bit fraction; extended mode keeps
/// the trace oracle's `tr(M)² − tr(M²)` cancellation above 130 bits; exact
/// mode is limited only by solving the S-quadratic in binary64.
pub fn guard_log2(mode: PrecisionMode) -> f64 {
    match mode {
        PrecisionMode::Standard => 46.0,
        PrecisionMode::Extended => 120.0,
        PrecisionMode::ExactRational => 500.0,
    }
}

const N_CAP: u32 = 1_000_000;

/// Largest `n` with `λ⁻ⁿ ≤ 2^guard_log2(mode)`.
pub fn max_n(lambda: f64, mode: PrecisionMode) -> u32 {
    let rate = -lambda.log2();
    if !(rate > 0.0) {
        return 0;
    }
    let n = (guard_log2(mode) / rate + 1e-9).floor();
    if n >= N_CAP as f64 {
        N_CAP
    } else {
        n as u32
    }
}

/// Fails with `ConditioningExceeded` when `n` is beyond the guard of `mode`.
pub fn check_guard(lambda: f64, n: u32, mode: PrecisionMode) -> Result<()> {
    let max = max_n(lambda, mode);
    if n <= max {
        return Ok(());
    }
    let required = [PrecisionMode::Extended, PrecisionMode::ExactRational]
        .into_iter()
        .find(|m| n <= max_n(lambda, *m))
        .unwrap_or(PrecisionMode::ExactRational);
    Err(Error::ConditioningExceeded {
        lambda,
        n,
        max_n: max,
        mode,
        required,
    })
}
