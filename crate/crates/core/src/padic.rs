//! Precision-tracked p-adic numbers.
//!
//! A nonzero [`Padic`] is `unit * p^val` where `unit` is a p-adic unit known
//! modulo `p^rel`. A zero carries only the absolute precision to which it is
//! known (stored in `val`). Arithmetic follows the usual loss rules: sums are
//! known to the smaller absolute precision, products and quotients to the
//! smaller relative precision.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{vp_bigint, PadicField, Scalar, INF};

const fn cap_for(p: u64) -> u32 {
    let limit: u64 = 1 << 63;
    let mut r = 0u32;
    let mut acc: u64 = 1;
    while acc <= limit / p {
        acc *= p;
        r += 1;
    }
    r
}

const fn pow_table(p: u64) -> [u64; 64] {
    let mut t = [0u64; 64];
    let cap = cap_for(p);
    let mut i = 0;
    let mut acc: u64 = 1;
    while i <= cap as usize {
        t[i] = acc;
        if i < cap as usize {
            acc *= p;
        }
        i += 1;
    }
    t
}

/// A p-adic number with tracked precision, for an odd prime `P`.
#[derive(Clone, Copy)]
pub struct Padic<const P: u64> {
    unit: u64,
    val: i64,
    rel: u32,
}

fn sat(v: i64) -> i64 {
    v.clamp(-INF, INF)
}

impl<const P: u64> Padic<P> {
    /// Largest relative precision representable for this prime.
    pub const CAP: u32 = cap_for(P);
    const POW: [u64; 64] = pow_table(P);

    fn modulus(r: u32) -> u64 {
        Self::POW[r as usize]
    }

    /// Zero known modulo `p^abs`.
    pub fn zero_to(abs: i64) -> Self {
        Padic {
            unit: 0,
            val: sat(abs),
            rel: 0,
        }
    }

    /// Builds `n * p^val` with `n` known modulo `p^rel`.
    pub fn from_parts(n: u128, val: i64, rel: u32) -> Self {
        let rel = rel.min(Self::CAP);
        if rel == 0 {
            return Self::zero_to(val);
        }
        let m = Self::modulus(rel) as u128;
        let mut n = n % m;
        if n == 0 {
            return Self::zero_to(val + rel as i64);
        }
        let mut v = 0u32;
        while n.is_multiple_of(P as u128) {
            n /= P as u128;
            v += 1;
        }
        let rel = rel - v;
        Padic {
            unit: (n % Self::modulus(rel) as u128) as u64,
            val: sat(val + v as i64),
            rel,
        }
    }

    /// Builds a signed integer `n * p^val` known to relative precision `rel`.
    pub fn from_signed_parts(n: i128, val: i64, rel: u32) -> Self {
        let rel = rel.min(Self::CAP);
        let m = Self::modulus(rel) as i128;
        Self::from_parts(n.rem_euclid(m.max(1)) as u128, val, rel)
    }

    /// Exact integer.
    pub fn from_i128(n: i128) -> Self {
        if n == 0 {
            return Self::zero_to(INF);
        }
        let mut n = n;
        let mut v = 0i64;
        while n % P as i128 == 0 {
            n /= P as i128;
            v += 1;
        }
        Self::from_signed_parts(n, v, Self::CAP)
    }

    /// The unit part, known modulo `p^rel`.
    pub fn unit(&self) -> u64 {
        self.unit
    }

    /// Relative precision in digits.
    pub fn rel(&self) -> u32 {
        self.rel
    }

    /// Valuation of a nonzero value, or absolute precision of a zero.
    pub fn raw_val(&self) -> i64 {
        self.val
    }

    fn abs(&self) -> i64 {
        if self.rel == 0 {
            self.val
        } else {
            sat(self.val + self.rel as i64)
        }
    }

    /// Integer representative in `[0, p^abs)` for an integral value; `None`
    /// if the value is not integral or its representative overflows `i128`.
    pub fn integer_rep(&self) -> Option<(i128, i64)> {
        if self.rel == 0 {
            return if self.val >= 0 { Some((0, self.val)) } else { None };
        }
        if self.val < 0 {
            return None;
        }
        let abs = self.abs();
        if abs > 80 {
            return None;
        }
        let pv = (P as i128).checked_pow(self.val as u32)?;
        Some(((self.unit as i128).checked_mul(pv)?, abs))
    }

    fn ext_inverse(unit: u64, m: u64) -> u64 {
        let e = (unit as i128).extended_gcd(&(m as i128));
        debug_assert_eq!(e.gcd.abs(), 1);
        let x = if e.gcd == 1 { e.x } else { -e.x };
        x.rem_euclid(m as i128) as u64
    }

    /// Little-endian digits of the unit part.
    pub fn digits(&self) -> Vec<u64> {
        let mut u = self.unit;
        (0..self.rel)
            .map(|_| {
                let d = u % P;
                u /= P;
                d
            })
            .collect()
    }

    /// Binomial coefficients for an integral upper argument, computed on its
    /// integer representative. A value known modulo p^A gives binom(a, m)
    /// correct modulo p^(A - floor(log_p m)).
    fn integral_binom_row(&self, m_max: usize) -> Vec<Self> {
        let abs = self.abs_prec();
        let a_known = abs.min(3 * Self::CAP as i64);
        let rep: BigInt = if self.rel == 0 {
            BigInt::zero()
        } else {
            let pb = BigInt::from(P);
            let m = pb.pow(a_known as u32);
            (BigInt::from(self.unit) * pb.pow(self.val as u32)).mod_floor(&m)
        };
        let cap = Self::CAP;
        let cap_mod = Self::modulus(cap) as u128;
        let mut out = Vec::with_capacity(m_max + 1);
        out.push(Self::one());
        let mut big_v: i64 = 0;
        let mut unit: u128 = 1;
        let mut exact_zero = false;
        let mut log_m: i64 = 0;
        let mut next_pow: u64 = P;
        for m in 1..=m_max {
            if m as u64 >= next_pow {
                log_m += 1;
                next_pow = next_pow.saturating_mul(P);
            }
            let factor = &rep - BigInt::from(m - 1);
            if factor.is_zero() {
                exact_zero = true;
            }
            if exact_zero {
                out.push(Self::zero_to((a_known - log_m).min(INF)));
                continue;
            }
            let fv = vp_bigint(&factor, P);
            let fu = (factor / BigInt::from(P).pow(fv as u32))
                .mod_floor(&BigInt::from(cap_mod))
                .to_u128()
                .unwrap_or(0);
            let mut mm = m as u64;
            let mut dv = 0i64;
            while mm.is_multiple_of(P) {
                mm /= P;
                dv += 1;
            }
            let dinv = Self::ext_inverse(mm % cap_mod as u64, cap_mod as u64) as u128;
            big_v += fv - dv;
            unit = unit * fu % cap_mod * dinv % cap_mod;
            let prec_abs = a_known - log_m;
            let rel = (prec_abs - big_v).clamp(0, cap as i64) as u32;
            out.push(Self::from_parts(unit, big_v, rel));
        }
        out
    }
}

impl<const P: u64> fmt::Debug for Padic<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<const P: u64> fmt::Display for Padic<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rel == 0 {
            if self.val >= INF {
                write!(f, "0")
            } else {
                write!(f, "O({}^{})", P, self.val)
            }
        } else if self.val == 0 {
            write!(f, "{} + O({}^{})", self.unit, P, self.abs())
        } else {
            write!(f, "{}*{}^{} + O({}^{})", self.unit, P, self.val, P, self.abs())
        }
    }
}

impl<const P: u64> Add for Padic<P> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        if self.rel == 0 {
            return o.with_abs_prec(self.val);
        }
        if o.rel == 0 {
            return self.with_abs_prec(o.val);
        }
        let abs = self.abs().min(o.abs());
        let v = self.val.min(o.val);
        if abs <= v {
            return Self::zero_to(abs);
        }
        let w = (abs - v) as u32;
        let m = Self::modulus(w) as u128;
        let lift = |x: &Self| -> u128 {
            let shift = x.val - v;
            if shift >= w as i64 {
                0
            } else {
                (x.unit as u128 % m) * Self::modulus(shift as u32) as u128 % m
            }
        };
        let s = (lift(&self) + lift(&o)) % m;
        Self::from_parts(s, v, w)
    }
}

impl<const P: u64> Neg for Padic<P> {
    type Output = Self;
    fn neg(self) -> Self {
        if self.rel == 0 {
            return self;
        }
        let m = Self::modulus(self.rel);
        Padic {
            unit: (m - self.unit) % m,
            ..self
        }
    }
}

impl<const P: u64> Sub for Padic<P> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<const P: u64> Mul for Padic<P> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        match (self.rel, o.rel) {
            (0, 0) => Self::zero_to(self.val + o.val),
            (0, _) => Self::zero_to(self.val + o.val),
            (_, 0) => Self::zero_to(self.val + o.val),
            _ => {
                let rel = self.rel.min(o.rel);
                let m = Self::modulus(rel) as u128;
                let u = (self.unit as u128 % m) * (o.unit as u128 % m) % m;
                Padic {
                    unit: u as u64,
                    val: sat(self.val + o.val),
                    rel,
                }
            }
        }
    }
}

impl<const P: u64> Div for Padic<P> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o
            .inv()
            .expect("division by a p-adic number indistinguishable from zero")
    }
}

impl<const P: u64> PartialEq for Padic<P> {
    fn eq(&self, o: &Self) -> bool {
        (*self - *o).rel == 0
    }
}

impl<const P: u64> Zero for Padic<P> {
    fn zero() -> Self {
        Self::zero_to(INF)
    }
    fn is_zero(&self) -> bool {
        self.rel == 0
    }
}

impl<const P: u64> One for Padic<P> {
    fn one() -> Self {
        Padic {
            unit: 1,
            val: 0,
            rel: Self::CAP,
        }
    }
}

impl<const P: u64> Scalar for Padic<P> {
    const PRIME: u64 = P;

    fn from_i64(n: i64) -> Self {
        Self::from_i128(n as i128)
    }

    fn from_bigint(n: &BigInt) -> Self {
        if n.is_zero() {
            return Self::zero();
        }
        let v = vp_bigint(n, P);
        let m = BigInt::from(Self::modulus(Self::CAP));
        let u = (n / BigInt::from(P).pow(v as u32)).mod_floor(&m);
        Self::from_parts(u.to_u128().unwrap_or(0), v, Self::CAP)
    }

    fn valuation(&self) -> Option<i64> {
        if self.rel == 0 {
            None
        } else {
            Some(self.val)
        }
    }

    fn abs_prec(&self) -> i64 {
        self.abs()
    }

    fn with_abs_prec(&self, k: i64) -> Self {
        if self.rel == 0 {
            return Self::zero_to(self.val.min(k));
        }
        if k >= self.abs() {
            return *self;
        }
        if k <= self.val {
            return Self::zero_to(k);
        }
        let rel = (k - self.val) as u32;
        Padic {
            unit: self.unit % Self::modulus(rel),
            val: self.val,
            rel,
        }
    }

    fn inv(&self) -> Option<Self> {
        if self.rel == 0 {
            return None;
        }
        let m = Self::modulus(self.rel);
        Some(Padic {
            unit: Self::ext_inverse(self.unit, m),
            val: -self.val,
            rel: self.rel,
        })
    }

    fn binom_row(&self, m_max: usize) -> Vec<Self> {
        if self.is_integral() && self.abs_prec() >= 0 {
            return self.integral_binom_row(m_max);
        }
        let mut out = Vec::with_capacity(m_max + 1);
        let mut cur = Self::one();
        out.push(cur);
        for m in 1..=m_max {
            cur = cur * (*self - Self::from_i64(m as i64 - 1)) / Self::from_i64(m as i64);
            out.push(cur);
        }
        out
    }

    fn to_bigrational(&self) -> BigRational {
        if self.rel == 0 {
            return BigRational::zero();
        }
        let pb = BigInt::from(P);
        let u = BigRational::from_integer(BigInt::from(self.unit));
        if self.val >= 0 {
            u * BigRational::from_integer(pb.pow(self.val as u32))
        } else {
            u / BigRational::from_integer(pb.pow((-self.val) as u32))
        }
    }
}

impl<const P: u64> PadicField for Padic<P> {
    fn cap() -> u32 {
        Self::CAP
    }

    fn teichmuller(a: i64) -> Result<Self> {
        if P < 3 || !is_small_prime(P) {
            return Err(Error::InvalidPrime(P));
        }
        let r = a.rem_euclid(P as i64);
        if r == 0 {
            return Err(Error::InvalidUnit(a));
        }
        let mut x = Self::from_i64(r);
        for _ in 0..=Self::CAP {
            let y = x.pow_u(P);
            if y.unit == x.unit && y.val == x.val {
                return Ok(x);
            }
            x = y;
        }
        Ok(x)
    }

    fn log_one_unit(&self) -> Result<Self> {
        let y = *self - Self::one();
        let vy = match y.valuation() {
            None => return Ok(Self::zero_to(y.abs_prec())),
            Some(v) => v,
        };
        if vy < 1 || self.valuation() != Some(0) {
            return Err(Error::Domain(format!("{self} is not a 1-unit")));
        }
        let target = y.abs_prec().min(vy + Self::CAP as i64);
        let mut sum = Self::zero();
        let mut pw = Self::one();
        let mut n: i64 = 1;
        loop {
            let log_n = ilog(n as u64, P) as i64;
            if n * vy - log_n >= target {
                break;
            }
            pw = pw * y;
            let term = pw / Self::from_i64(n);
            sum = if n % 2 == 1 { sum + term } else { sum - term };
            n += 1;
        }
        Ok(sum.with_abs_prec(target))
    }
}

/// floor(log_p n) for n >= 1.
pub fn ilog(n: u64, p: u64) -> u32 {
    let mut k = 0;
    let mut acc = p;
    while acc <= n {
        k += 1;
        acc = acc.saturating_mul(p);
        if acc == u64::MAX {
            break;
        }
    }
    k
}

/// True for the odd primes this build supports at runtime.
pub fn is_small_prime(p: u64) -> bool {
    p >= 3 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// `binom(a, m)` for a p-adic upper argument.
///
/// Integral arguments lose `floor(log_p m)` digits of absolute precision;
/// other arguments lose `v_p(m!)` relative digits. Fails when no digit survives.
pub fn padic_binom<S: Scalar>(a: &S, m: usize) -> Result<S> {
    let row = a.binom_row(m);
    let b = row[m].clone();
    if b.abs_prec() <= 0 && b.valuation().is_none() && a.abs_prec() < INF {
        return Err(Error::PrecisionExhausted(format!("binom(a, {m}) has no known digit")));
    }
    Ok(b)
}

/// Teichmüller lift of a residue modulo p.
pub fn teichmuller<S: PadicField>(a: i64) -> Result<S> {
    S::teichmuller(a)
}

/// p-adic logarithm of a 1-unit.
pub fn log_one_unit<S: PadicField>(x: &S) -> Result<S> {
    x.log_one_unit()
}

#[cfg(test)]
mod tests {
    use super::*;
    type Q3 = Padic<3>;
    type Q5 = Padic<5>;

    #[test]
    fn caps_fit_in_a_word() {
        assert_eq!(Q3::CAP, 39);
        assert_eq!(Q5::CAP, 27);
        assert_eq!(Padic::<7>::CAP, 22);
    }

    #[test]
    fn integer_arithmetic() {
        let a = Q5::from_i64(6);
        let b = Q5::from_i64(15);
        assert_eq!(a + b, Q5::from_i64(21));
        assert_eq!(a * b, Q5::from_i64(90));
        assert_eq!(b - b, Q5::zero());
        assert_eq!((b / Q5::from_i64(5)).valuation(), Some(0));
        assert_eq!(Q5::from_ratio(1, 25).valuation(), Some(-2));
    }

    #[test]
    fn precision_of_sums() {
        let a = Q3::from_i64(1).with_abs_prec(5);
        let b = Q3::from_i64(3).with_abs_prec(10);
        assert_eq!((a + b).abs_prec(), 5);
        let c = (a - Q3::from_i64(1)).valuation();
        assert_eq!(c, None);
    }

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller::<Q5>(1).unwrap(), Q5::one());
        assert_eq!(teichmuller::<Q5>(4).unwrap(), -Q5::one());
        let w = teichmuller::<Q5>(2).unwrap().with_abs_prec(3);
        assert_eq!(w, Q5::from_i64(57).with_abs_prec(3));
        assert_eq!(w.digits(), vec![2, 1, 2]);
        assert!(teichmuller::<Q5>(10).is_err());
    }

    #[test]
    fn binom_examples() {
        let u = Q5::from_i64(6);
        assert_eq!(padic_binom(&u, 0).unwrap(), Q5::one());
        assert_eq!(padic_binom(&u, 1).unwrap(), u);
        assert_eq!(padic_binom(&u, 2).unwrap(), Q5::from_i64(15));
        let half = Q5::from_ratio(1, 2);
        assert_eq!(padic_binom(&half, 2).unwrap(), Q5::from_ratio(-1, 8));
    }

    #[test]
    fn log_examples() {
        assert_eq!(Q3::one().log_one_unit().unwrap(), Q3::zero());
        let u = Q3::from_i64(4);
        let l = u.log_one_unit().unwrap();
        assert_eq!(l.valuation(), Some(1));
        let l2 = (u * u).log_one_unit().unwrap();
        assert_eq!(l2, l + l);
        assert!(Q3::from_i64(2).log_one_unit().is_err());
    }
}
