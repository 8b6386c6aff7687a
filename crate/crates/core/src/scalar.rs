//! Scalar abstraction shared by every algorithm in the crate.
//!
//! Algorithms are written once against [`Scalar`] and run either on the
//! precision-tracked p-adic type [`crate::Padic`] or on exact rationals
//! [`Exact`]. Operations that need transcendental p-adic functions
//! (logarithms, Teichmüller lifts) require the narrower [`PadicField`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Result;

/// Valuation used for "known to arbitrary precision".
pub const INF: i64 = 1 << 40;

/// A field of characteristic zero equipped with a p-adic valuation and a
/// notion of absolute precision.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// The prime p.
    const PRIME: u64;

    /// Embeds an integer.
    fn from_i64(n: i64) -> Self;

    /// Embeds an arbitrary-size integer.
    fn from_bigint(n: &BigInt) -> Self;

    /// Embeds `num / den`; panics when `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Embeds an exact rational.
    fn from_bigrational(q: &BigRational) -> Self {
        Self::from_bigint(q.numer()) / Self::from_bigint(q.denom())
    }

    /// p-adic valuation, or `None` when the value is indistinguishable from zero.
    fn valuation(&self) -> Option<i64>;

    /// Absolute precision: the value is known modulo p^abs_prec. [`INF`] when exact.
    fn abs_prec(&self) -> i64;

    /// Forgets every digit at or beyond p^k.
    fn with_abs_prec(&self, k: i64) -> Self;

    /// Multiplicative inverse, `None` for (indistinguishable from) zero.
    fn inv(&self) -> Option<Self>;

    /// `binom(self, m)` for `m = 0..=m_max`.
    fn binom_row(&self, m_max: usize) -> Vec<Self>;

    /// Exact rational representative of the known digits.
    fn to_bigrational(&self) -> BigRational;

    /// Relative precision (number of known significant digits); [`INF`] when exact.
    fn rel_prec(&self) -> i64 {
        match self.valuation() {
            Some(v) => self.abs_prec().saturating_sub(v).min(INF),
            None => 0,
        }
    }

    /// True when the valuation is non-negative (or the value is zero).
    fn is_integral(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    /// Valuation with zero mapped to its absolute precision.
    fn val_or_prec(&self) -> i64 {
        self.valuation().unwrap_or_else(|| self.abs_prec())
    }

    /// Integer power by repeated squaring.
    fn pow_u(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// Integer power allowing negative exponents; panics on zero base with e < 0.
    fn pow_i(&self, e: i64) -> Self {
        if e >= 0 {
            self.pow_u(e as u64)
        } else {
            self.inv().expect("negative power of zero").pow_u(e.unsigned_abs())
        }
    }

    /// JSON rendering `{"val": decimal-string, "prec": N, "p": p, "digits": [...]}`.
    fn to_json(&self) -> serde_json::Value {
        let q = self.to_bigrational();
        let val = if q.is_integer() {
            q.numer().to_string()
        } else {
            format!("{}/{}", q.numer(), q.denom())
        };
        let prec = self.abs_prec();
        serde_json::json!({
            "val": val,
            "prec": if prec >= INF { serde_json::Value::String("exact".into()) } else { prec.into() },
            "p": Self::PRIME,
            "digits": padic_digits(&q, Self::PRIME, prec.min(self.val_or_prec() + 12)),
        })
    }
}

/// Scalars supporting the transcendental p-adic functions of the calculus.
pub trait PadicField: Scalar + Copy {
    /// Largest relative precision representable.
    fn cap() -> u32;

    /// Teichmüller lift ω(a) of a nonzero residue.
    fn teichmuller(a: i64) -> Result<Self>;

    /// p-adic logarithm of a 1-unit.
    fn log_one_unit(&self) -> Result<Self>;
}

/// p-adic valuation of a nonzero big integer.
pub fn vp_bigint(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn vp_rational(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        None
    } else {
        Some(vp_bigint(q.numer(), p) - vp_bigint(q.denom(), p))
    }
}

/// Little-endian p-adic digits of `q` from its valuation up to (excluding) p^upto.
pub fn padic_digits(q: &BigRational, p: u64, upto: i64) -> Vec<u64> {
    let Some(v) = vp_rational(q, p) else {
        return Vec::new();
    };
    let count = (upto - v).clamp(0, 64) as u32;
    if count == 0 {
        return Vec::new();
    }
    let pb = BigInt::from(p);
    let modulus = pb.pow(count);
    let pv = pb.pow(v.unsigned_abs() as u32);
    let (num, den) = if v >= 0 {
        (q.numer() / &pv, q.denom().clone())
    } else {
        (q.numer().clone(), q.denom() / &pv)
    };
    let den_inv = mod_inverse(&den.mod_floor(&modulus), &modulus).expect("unit denominator");
    let mut u = (num * den_inv).mod_floor(&modulus);
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let (q2, r) = u.div_rem(&pb);
        out.push(r.to_u64().unwrap_or(0));
        u = q2;
    }
    out
}

/// Inverse of `a` modulo `m` for big integers.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else if (-&e.gcd).is_one() {
        Some((-e.x).mod_floor(m))
    } else {
        None
    }
}

/// Exact rational scalar carrying the prime used for valuations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exact<const P: u64>(pub BigRational);

impl<const P: u64> Debug for Exact<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u64> std::fmt::Display for Exact<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

macro_rules! exact_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl<const P: u64> $tr for Exact<P> {
            type Output = Self;
            fn $m(self, rhs: Self) -> Self {
                Exact(self.0 $op rhs.0)
            }
        }
    };
}
exact_binop!(Add, add, +);
exact_binop!(Sub, sub, -);
exact_binop!(Mul, mul, *);
exact_binop!(Div, div, /);

impl<const P: u64> Neg for Exact<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Exact(-self.0)
    }
}

impl<const P: u64> Zero for Exact<P> {
    fn zero() -> Self {
        Exact(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl<const P: u64> One for Exact<P> {
    fn one() -> Self {
        Exact(BigRational::one())
    }
}

impl<const P: u64> Scalar for Exact<P> {
    const PRIME: u64 = P;

    fn from_i64(n: i64) -> Self {
        Exact(BigRational::from_integer(BigInt::from(n)))
    }

    fn from_bigint(n: &BigInt) -> Self {
        Exact(BigRational::from_integer(n.clone()))
    }

    fn from_bigrational(q: &BigRational) -> Self {
        Exact(q.clone())
    }

    fn valuation(&self) -> Option<i64> {
        vp_rational(&self.0, P)
    }

    fn abs_prec(&self) -> i64 {
        INF
    }

    fn with_abs_prec(&self, _k: i64) -> Self {
        self.clone()
    }

    fn inv(&self) -> Option<Self> {
        if self.0.is_zero() {
            None
        } else {
            Some(Exact(self.0.recip()))
        }
    }

    fn binom_row(&self, m_max: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(m_max + 1);
        let mut cur = BigRational::one();
        out.push(Exact(cur.clone()));
        for m in 1..=m_max {
            let num = &self.0 - BigRational::from_integer(BigInt::from(m as i64 - 1));
            cur = cur * num / BigRational::from_integer(BigInt::from(m as i64));
            out.push(Exact(cur.clone()));
        }
        out
    }

    fn to_bigrational(&self) -> BigRational {
        self.0.clone()
    }
}

impl<const P: u64> Exact<P> {
    /// Absolute value of numerator and denominator sizes, useful for diagnostics.
    pub fn height_bits(&self) -> u64 {
        self.0.numer().abs().bits().max(self.0.denom().bits())
    }
}
