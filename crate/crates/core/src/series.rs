//! Dense truncated power series in `π` and in `X`.
//!
//! A series stores its coefficients of degrees `0..=high` together with a
//! description of the unrepresented tail: either it is known to vanish
//! ([`Tail::Exact`], i.e. the series is a polynomial), or its coefficients obey
//! a valuation envelope ([`Tail::Bounded`]), or nothing is known. Operations
//! whose low-degree output depends on the unknown tail (evaluation, `ψ`, the
//! Mellin transform, division by `X − c`) fold the envelope into the
//! precision of the affected coefficients.

use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use serde_json::json;

use crate::error::{Error, Result};
use crate::padic::ilog;
use crate::scalar::{Scalar, INF};

/// Marker for series in the variable `π`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PiRing;
/// Marker for series in the variable `X = γ − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct XRing;

/// Names the variable of a series ring.
pub trait Ring: Copy + fmt::Debug + Send + Sync + 'static {
    /// Short ring tag used in JSON output.
    const TAG: &'static str;
    /// Variable name used in printing.
    const VAR: &'static str;
}
impl Ring for PiRing {
    const TAG: &'static str = "pi";
    const VAR: &'static str = "π";
}
impl Ring for XRing {
    const TAG: &'static str = "x";
    const VAR: &'static str = "X";
}

/// Lower bound `v(c_n) ≥ val − slope·⌊log_p(n+1)⌋`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub val: i64,
    pub slope: i64,
}

impl Envelope {
    /// Bound at degree `n`.
    pub fn at(&self, n: usize, p: u64) -> i64 {
        self.val - self.slope * ilog(n as u64 + 1, p) as i64
    }

    /// Pointwise minimum of two envelopes (valid for both).
    pub fn min(self, o: Envelope) -> Envelope {
        Envelope {
            val: self.val.min(o.val),
            slope: self.slope.max(o.slope),
        }
    }
}

/// What is known about coefficients beyond the represented degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// All further coefficients vanish.
    Exact,
    /// Further coefficients obey the envelope.
    Bounded(Envelope),
    /// Nothing is known.
    Unknown,
}

/// A truncated power series over `S` in the variable named by `R`.
#[derive(Clone)]
pub struct Series<S, R> {
    coeffs: Vec<S>,
    tail: Tail,
    _ring: PhantomData<R>,
}

/// Series in `π`, modelling elements of A⁺, B⁺ and B⁺_rig.
pub type PiSeries<S> = Series<S, PiRing>;
/// Series in `X`, modelling elements of Λ(Γ_1) and H(Γ_1).
pub type XSeries<S> = Series<S, XRing>;

/// `binom(n, k)` for `0 ≤ k ≤ n ≤ n_max` as scalars, by Pascal's rule.
pub fn binomial_table<S: Scalar>(n_max: usize, k_max: usize) -> Vec<Vec<S>> {
    let mut rows: Vec<Vec<S>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let width = n.min(k_max) + 1;
        let mut row = Vec::with_capacity(width);
        for k in 0..width {
            if k == 0 || k == n {
                row.push(S::one());
            } else {
                let prev = &rows[n - 1];
                let a = prev[k - 1].clone();
                let b = if k < prev.len() { prev[k].clone() } else { S::zero() };
                row.push(a + b);
            }
        }
        rows.push(row);
    }
    rows
}

impl<S: Scalar, R: Ring> Series<S, R> {
    /// Series with the given coefficients and tail.
    pub fn new(mut coeffs: Vec<S>, tail: Tail) -> Self {
        if coeffs.is_empty() {
            coeffs.push(S::zero());
        }
        Series {
            coeffs,
            tail,
            _ring: PhantomData,
        }
    }

    /// Polynomial with the given coefficients.
    pub fn polynomial(coeffs: Vec<S>) -> Self {
        Self::new(coeffs, Tail::Exact)
    }

    /// The constant series `c`.
    pub fn constant(c: S) -> Self {
        Self::polynomial(vec![c])
    }

    /// The zero series.
    pub fn zero() -> Self {
        Self::constant(S::zero())
    }

    /// The unit series `1`.
    pub fn one() -> Self {
        Self::constant(S::one())
    }

    /// The variable itself.
    pub fn var() -> Self {
        Self::polynomial(vec![S::zero(), S::one()])
    }

    /// Series from integer coefficients.
    pub fn from_i64s(cs: &[i64]) -> Self {
        Self::polynomial(cs.iter().map(|&c| S::from_i64(c)).collect())
    }

    /// Highest represented degree.
    pub fn high(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Tail description.
    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Represented coefficients.
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of degree `n`; zero beyond the end of a polynomial.
    pub fn coeff(&self, n: usize) -> Option<S> {
        if n < self.coeffs.len() {
            Some(self.coeffs[n].clone())
        } else if self.tail == Tail::Exact {
            Some(S::zero())
        } else {
            None
        }
    }

    /// Degree through which coefficients are known (unbounded for polynomials).
    pub fn eff_high(&self) -> usize {
        if self.tail == Tail::Exact {
            usize::MAX
        } else {
            self.high()
        }
    }

    /// True when the tail is known to vanish.
    pub fn is_polynomial(&self) -> bool {
        self.tail == Tail::Exact
    }

    /// Lower bound on the valuation of the coefficient of degree `n > high`.
    pub fn tail_bound(&self, n: usize) -> i64 {
        match self.tail {
            Tail::Exact => INF,
            Tail::Bounded(e) => e.at(n, S::PRIME),
            Tail::Unknown => -INF,
        }
    }

    /// Smallest lower bound on the valuation of any represented coefficient.
    pub fn min_known_valuation(&self) -> i64 {
        self.coeffs.iter().map(|c| c.val_or_prec()).min().unwrap_or(INF)
    }

    /// An envelope valid for every coefficient, represented or not.
    pub fn whole_envelope(&self) -> Option<Envelope> {
        let known = Envelope {
            val: self.min_known_valuation(),
            slope: 0,
        };
        match self.tail {
            Tail::Exact => Some(known),
            Tail::Bounded(e) => Some(known.min(e)),
            Tail::Unknown => None,
        }
    }

    /// True when all coefficients (including the tail) are known integral.
    pub fn is_integral(&self) -> bool {
        matches!(self.whole_envelope(), Some(e) if e.val >= 0 && e.slope == 0)
    }

    /// Keeps degrees `0..=deg`; dropped coefficients move into the tail envelope.
    pub fn truncate(&self, deg: usize) -> Self {
        if deg >= self.high() {
            return self.clone();
        }
        let dropped = Envelope {
            val: self.coeffs[deg + 1..]
                .iter()
                .map(|c| c.val_or_prec())
                .min()
                .unwrap_or(INF),
            slope: 0,
        };
        let tail = match self.tail {
            Tail::Exact => Tail::Bounded(dropped),
            Tail::Bounded(e) => Tail::Bounded(e.min(dropped)),
            Tail::Unknown => Tail::Unknown,
        };
        Series::new(self.coeffs[..=deg].to_vec(), tail)
    }

    /// Keeps degrees `0..=deg` and the current tail description. Valid when
    /// the tail envelope bounds every coefficient of the series, not only
    /// those beyond the represented degree.
    pub fn truncate_keeping_tail(&self, deg: usize) -> Self {
        if deg >= self.high() || self.tail == Tail::Exact {
            return self.truncate(deg);
        }
        Series::new(self.coeffs[..=deg].to_vec(), self.tail)
    }

    /// Replaces the tail description.
    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    /// Caps the absolute precision of every coefficient at `k`.
    pub fn with_abs_prec(&self, k: i64) -> Self {
        Series::new(self.coeffs.iter().map(|c| c.with_abs_prec(k)).collect(), self.tail)
    }

    /// Smallest absolute precision among coefficients `0..=upto`.
    pub fn guaranteed_precision(&self, upto: usize) -> i64 {
        self.coeffs
            .iter()
            .take(upto + 1)
            .map(|c| c.abs_prec())
            .min()
            .unwrap_or(INF)
    }

    /// Compares with `other` on degrees `0..=upto`: returns the smallest
    /// absolute precision of the difference, or `None` if some coefficient of
    /// the difference is known to be nonzero.
    pub fn agreement(&self, other: &Self, upto: usize) -> Option<i64> {
        let mut prec = INF;
        for n in 0..=upto {
            let (a, b) = (self.coeff(n)?, other.coeff(n)?);
            let d = a - b;
            if d.valuation().is_some() {
                return None;
            }
            prec = prec.min(d.abs_prec());
        }
        Some(prec)
    }

    /// Coefficientwise map preserving the tail.
    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Series::new(self.coeffs.iter().map(f).collect(), self.tail)
    }

    /// Multiplies by a scalar.
    pub fn scale(&self, c: &S) -> Self {
        let tail = match self.tail {
            Tail::Bounded(e) => match c.valuation() {
                Some(v) => Tail::Bounded(Envelope {
                    val: e.val.saturating_add(v),
                    slope: e.slope,
                }),
                None => Tail::Bounded(Envelope {
                    val: c.abs_prec().saturating_add(e.val),
                    slope: e.slope,
                }),
            },
            t => t,
        };
        Series::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(), tail)
    }

    /// Sum.
    pub fn add_series(&self, o: &Self) -> Self {
        let h = self.eff_high().min(o.eff_high());
        if h == usize::MAX {
            let n = self.coeffs.len().max(o.coeffs.len());
            let cs = (0..n).map(|i| self.coeff(i).unwrap() + o.coeff(i).unwrap()).collect();
            return Series::polynomial(cs);
        }
        let cs = (0..=h).map(|i| self.coeff(i).unwrap() + o.coeff(i).unwrap()).collect();
        let tail = match (self.whole_envelope(), o.whole_envelope()) {
            (Some(a), Some(b)) => Tail::Bounded(a.min(b)),
            _ => Tail::Unknown,
        };
        Series::new(cs, tail)
    }

    /// Product.
    pub fn mul_series(&self, o: &Self) -> Self {
        let hf = self.eff_high();
        let hg = o.eff_high();
        let exact = hf == usize::MAX && hg == usize::MAX;
        let h = if exact { self.high() + o.high() } else { hf.min(hg) };
        let mut cs = vec![S::zero(); h + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(h + 1) {
            if a.is_zero() && a.abs_prec() >= INF {
                continue;
            }
            let jmax = (h - i).min(o.coeffs.len() - 1);
            for j in 0..=jmax {
                cs[i + j] = cs[i + j].clone() + a.clone() * o.coeffs[j].clone();
            }
        }
        if exact {
            return Series::polynomial(cs);
        }
        let tail = match (self.whole_envelope(), o.whole_envelope()) {
            (Some(a), Some(b)) => Tail::Bounded(Envelope {
                val: a.val.saturating_add(b.val),
                slope: a.slope + b.slope,
            }),
            _ => Tail::Unknown,
        };
        Series::new(cs, tail)
    }

    /// Integer power.
    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul_series(self);
        }
        acc
    }

    /// `f(g)` for `g` with zero constant term.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if g.coeffs[0].valuation().is_some() {
            return Err(Error::CompositionDomain);
        }
        let g = {
            let mut cs = g.coeffs.clone();
            cs[0] = S::zero();
            Series::<S, R>::new(cs, g.tail)
        };
        let hf = self.eff_high();
        let hg = g.eff_high();
        let exact = hf == usize::MAX && hg == usize::MAX;
        let h = if exact {
            self.high() * g.high().max(1)
        } else {
            hf.min(hg)
        };
        let top = self.high().min(h);
        let mut acc: Vec<S> = vec![S::zero(); h + 1];
        acc[0] = self.coeffs[top].clone();
        for m in (0..top).rev() {
            let mut next = vec![S::zero(); h + 1];
            for (i, a) in acc.iter().enumerate() {
                if a.is_zero() && a.abs_prec() >= INF {
                    continue;
                }
                for j in 1..=(h - i).min(g.coeffs.len() - 1) {
                    next[i + j] = next[i + j].clone() + a.clone() * g.coeffs[j].clone();
                }
            }
            next[0] = next[0].clone() + self.coeffs[m].clone();
            acc = next;
        }
        if exact {
            return Ok(Series::polynomial(acc));
        }
        let tail = match (g.is_integral(), self.whole_envelope()) {
            (true, Some(e)) => Tail::Bounded(e),
            _ => Tail::Unknown,
        };
        Ok(Series::new(acc, tail))
    }

    /// Multiplicative inverse known through degree `deg` (and through the
    /// represented degree for non-polynomials).
    pub fn invert(&self, deg: usize) -> Result<Self> {
        let f0inv = self.coeffs[0].inv().ok_or(Error::NonUnit)?;
        let h = deg.min(self.eff_high());
        let mut g: Vec<S> = Vec::with_capacity(h + 1);
        g.push(f0inv.clone());
        for n in 1..=h {
            let mut s = S::zero();
            for i in 1..=n.min(self.coeffs.len() - 1) {
                s = s + self.coeffs[i].clone() * g[n - i].clone();
            }
            g.push(-(s * f0inv.clone()));
        }
        let normalized = self.scale(&f0inv);
        let tail = match normalized.whole_envelope() {
            Some(e)
                if e.slope == 0 && e.val >= 0 && {
                    let mut t = normalized.clone();
                    t.coeffs[0] = S::zero();
                    t.whole_envelope().is_some_and(|e| e.val >= 0 && e.slope == 0)
                } =>
            {
                Tail::Bounded(Envelope {
                    val: f0inv.val_or_prec(),
                    slope: 0,
                })
            }
            _ => Tail::Unknown,
        };
        Ok(Series::new(g, tail))
    }

    /// Quotient by the variable to the power `k`, which must divide.
    pub fn var_power_divide(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        for n in 0..k {
            match self.coeff(n) {
                Some(c) if c.valuation().is_none() => {}
                _ => return Err(Error::NotDivisible(k)),
            }
        }
        if k > self.high() {
            return if self.tail == Tail::Exact {
                Ok(Self::zero())
            } else {
                Err(Error::PrecisionExhausted("no coefficient left after division".into()))
            };
        }
        let tail = match self.tail {
            Tail::Bounded(e) => Tail::Bounded(Envelope {
                val: e.val - e.slope * (ilog(k as u64 + 1, S::PRIME) as i64 + 1),
                slope: e.slope,
            }),
            t => t,
        };
        Ok(Series::new(self.coeffs[k..].to_vec(), tail))
    }

    /// Product with the variable to the power `k`.
    pub fn var_power_mul(&self, k: usize) -> Self {
        let mut cs = vec![S::zero(); k];
        cs.extend(self.coeffs.iter().cloned());
        let tail = match self.tail {
            Tail::Bounded(e) => Tail::Bounded(Envelope {
                val: e.val,
                slope: e.slope,
            }),
            t => t,
        };
        Series::new(cs, tail)
    }

    /// Formal derivative with respect to the variable.
    pub fn derivative(&self) -> Self {
        if self.high() == 0 {
            return match self.tail {
                Tail::Exact => Self::zero(),
                _ => Series::new(vec![S::zero()], Tail::Unknown),
            };
        }
        let cs = (1..=self.high())
            .map(|n| self.coeffs[n].clone() * S::from_i64(n as i64))
            .collect();
        let tail = match self.tail {
            Tail::Bounded(e) => Tail::Bounded(Envelope {
                val: e.val - e.slope,
                slope: e.slope,
            }),
            t => t,
        };
        Series::new(cs, tail)
    }

    /// Value at a point of positive valuation (or any point for polynomials).
    /// The unknown tail is folded into the precision of the result.
    pub fn eval(&self, x: &S) -> Result<S> {
        let mut acc = S::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        if self.tail == Tail::Exact {
            return Ok(acc);
        }
        let w = x.val_or_prec();
        if w <= 0 {
            return Err(Error::PrecisionExhausted(
                "evaluation of a truncated series at a point of non-positive valuation".into(),
            ));
        }
        let err = self.tail_error(|n| n as i64 * w);
        Ok(acc.with_abs_prec(err))
    }

    /// `min_{n > high} (tail_bound(n) + weight(n))`, scanning far enough for
    /// the weight to dominate the envelope.
    pub fn tail_error(&self, weight: impl Fn(usize) -> i64) -> i64 {
        match self.tail {
            Tail::Exact => INF,
            Tail::Unknown => -INF,
            Tail::Bounded(_) => {
                let start = self.high() + 1;
                let mut best = INF;
                let mut n = start;
                let mut last_improve = start;
                while n < start + 4096 {
                    let b = self.tail_bound(n).saturating_add(weight(n));
                    if b < best {
                        best = b;
                        last_improve = n;
                    }
                    if n > last_improve + 64 && n > 2 * start + 64 {
                        break;
                    }
                    n += 1;
                }
                best
            }
        }
    }

    /// Quotient `h` with `f = (var − c)·h`, requiring `f(c) = 0` to precision.
    pub fn div_linear(&self, c: &S) -> Result<Self> {
        let h = self.high();
        if h == 0 {
            let r = self.coeffs[0].clone();
            if let (Some(v), Tail::Exact) = (r.valuation(), self.tail) {
                return Err(Error::InexactDivision(v));
            }
        }
        let vc = c.val_or_prec();
        if self.tail != Tail::Exact && vc <= 0 {
            return Err(Error::PrecisionExhausted(
                "division by var − c with c a unit needs an exact polynomial".into(),
            ));
        }
        let rem = self.eval(c)?;
        if let Some(v) = rem.valuation() {
            return Err(Error::InexactDivision(v));
        }
        if h == 0 {
            return Ok(match self.tail {
                Tail::Exact => Self::zero(),
                _ => Series::new(vec![S::zero()], Tail::Unknown),
            });
        }
        let mut q = vec![S::zero(); h];
        q[h - 1] = self.coeffs[h].clone();
        for n in (0..h - 1).rev() {
            q[n] = self.coeffs[n + 1].clone() + c.clone() * q[n + 1].clone();
        }
        if self.tail == Tail::Exact {
            return Ok(Series::polynomial(q));
        }
        let q = q
            .into_iter()
            .enumerate()
            .map(|(n, a)| {
                let err = self.tail_error(|m| (m - n - 1) as i64 * vc);
                a.with_abs_prec(err)
            })
            .collect();
        let tail = match self.whole_envelope() {
            Some(e) => Tail::Bounded(Envelope {
                val: e.val.saturating_sub(e.slope),
                slope: e.slope,
            }),
            None => Tail::Unknown,
        };
        Ok(Series::new(q, tail))
    }

    /// Remainder of Weierstrass division by a distinguished polynomial `g`
    /// (monic, all lower coefficients of positive valuation). Division is
    /// contractive for the Gauss norm at the radius of the largest root of
    /// `g`, whose valuation is `ρ = min_i v(g_i)/(deg g − i)`; the unknown
    /// tail therefore contributes with valuation at least `⌊(n − i)·ρ⌋` to
    /// the coefficient of degree `i`.
    pub fn weierstrass_rem(&self, g: &[S]) -> Result<Vec<S>> {
        let d = g.len() - 1;
        if d == 0 {
            return Ok(Vec::new());
        }
        if g[d] != S::one() || g[..d].iter().any(|c| c.val_or_prec() < 1) {
            return Err(Error::Domain("divisor is not a distinguished polynomial".into()));
        }
        let mut r: Vec<S> = self.coeffs.clone();
        if r.len() < d {
            r.resize(d, S::zero());
        }
        for n in (d..r.len()).rev() {
            let c = r[n].clone();
            if c.is_zero() && c.abs_prec() >= INF {
                continue;
            }
            for (i, gi) in g.iter().enumerate().take(d) {
                let idx = n - d + i;
                r[idx] = r[idx].clone() - c.clone() * gi.clone();
            }
            r[n] = S::zero();
        }
        r.truncate(d);
        if self.tail != Tail::Exact {
            // ρ = num/den, the smallest ratio v(g_i)/(d − i)
            let (mut num, mut den) = (INF, 1i64);
            for (i, gi) in g.iter().enumerate().take(d) {
                let (a, b) = (gi.val_or_prec().min(INF), (d - i) as i64);
                if a.saturating_mul(den) < num.saturating_mul(b) {
                    (num, den) = (a, b);
                }
            }
            for (i, c) in r.iter_mut().enumerate() {
                let err = self.tail_error(|n| ((n - i) as i64).saturating_mul(num) / den);
                *c = c.with_abs_prec(err);
            }
        }
        Ok(r)
    }

    /// JSON rendering `{"ring": ..., "low": 0, "high": ..., "coeffs": [...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "ring": R::TAG,
            "low": 0,
            "high": self.high(),
            "tail": match self.tail {
                Tail::Exact => json!("exact"),
                Tail::Bounded(e) => json!({"val": e.val, "slope": e.slope}),
                Tail::Unknown => json!("unknown"),
            },
            "coeffs": self.coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }

    /// Valuation profile of the first `n` coefficients (`None` for zero).
    pub fn valuation_profile(&self, n: usize) -> Vec<Option<i64>> {
        self.coeffs.iter().take(n).map(|c| c.valuation()).collect()
    }
}

impl<S: Scalar, R: Ring> fmt::Debug for Series<S, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<S: Scalar, R: Ring> fmt::Display for Series<S, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = self.coeffs.len().min(8);
        let mut first = true;
        for (n, c) in self.coeffs.iter().take(shown).enumerate() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "({c:?})")?,
                1 => write!(f, "({c:?}){}", R::VAR)?,
                _ => write!(f, "({c:?}){}^{n}", R::VAR)?,
            }
        }
        match self.tail {
            Tail::Exact if shown == self.coeffs.len() => Ok(()),
            _ => write!(f, " + O({}^{})", R::VAR, shown.max(self.high() + 1)),
        }
    }
}

impl<S: Scalar, R: Ring> PartialEq for Series<S, R> {
    /// Agreement on all degrees represented in both, at the known precision.
    fn eq(&self, o: &Self) -> bool {
        let upto = self.eff_high().min(o.eff_high());
        let upto = if upto == usize::MAX {
            self.high().max(o.high())
        } else {
            upto
        };
        self.agreement(o, upto).is_some()
    }
}

impl<'a, S: Scalar, R: Ring> Add<&'a Series<S, R>> for &'a Series<S, R> {
    type Output = Series<S, R>;
    fn add(self, o: &'a Series<S, R>) -> Series<S, R> {
        self.add_series(o)
    }
}

impl<'a, S: Scalar, R: Ring> Sub<&'a Series<S, R>> for &'a Series<S, R> {
    type Output = Series<S, R>;
    fn sub(self, o: &'a Series<S, R>) -> Series<S, R> {
        self.add_series(&-o)
    }
}

impl<'a, S: Scalar, R: Ring> Mul<&'a Series<S, R>> for &'a Series<S, R> {
    type Output = Series<S, R>;
    fn mul(self, o: &'a Series<S, R>) -> Series<S, R> {
        self.mul_series(o)
    }
}

impl<S: Scalar, R: Ring> Neg for &Series<S, R> {
    type Output = Series<S, R>;
    fn neg(self) -> Series<S, R> {
        self.map(|c| -c.clone())
    }
}

impl<S: Scalar> PiSeries<S> {
    /// Quotient by `π^k` (all coefficients below `k` must vanish).
    pub fn pi_power_divide(&self, k: usize) -> Result<Self> {
        self.var_power_divide(k)
    }

    /// `t = log(1+π)` through degree `deg`.
    pub fn log_one_plus_var(deg: usize) -> Self {
        log_series(deg)
    }

    /// `q = φ(π)/π = ((1+π)^p − 1)/π`, a polynomial of degree `p − 1`.
    pub fn q() -> Self {
        let p = S::PRIME as usize;
        let row = binomial_table::<S>(p, p);
        Series::polynomial((1..=p).map(|i| row[p][i].clone()).collect())
    }
}

impl<S: Scalar> XSeries<S> {
    /// `log(1+X)` through degree `deg`.
    pub fn log_one_plus_var(deg: usize) -> Self {
        log_series(deg)
    }
}

fn log_series<S: Scalar, R: Ring>(deg: usize) -> Series<S, R> {
    let mut cs = vec![S::zero()];
    for n in 1..=deg.max(1) {
        let c = S::from_ratio(if n % 2 == 1 { 1 } else { -1 }, n as i64);
        cs.push(c);
    }
    Series::new(cs, Tail::Bounded(Envelope { val: 0, slope: 1 }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Exact3, Padic3, Scalar};
    use num_traits::{One, Zero};

    type P3 = PiSeries<Padic3>;
    type E3 = PiSeries<Exact3>;
    type X3 = XSeries<Padic3>;

    #[test]
    fn compose_identity_and_frobenius() {
        let f = E3::from_i64s(&[1, 2, 3, 4]);
        assert_eq!(f.compose(&E3::var()).unwrap(), f);
        let phi_pi = E3::from_i64s(&[0, 3, 3, 1]);
        let c = E3::var().compose(&phi_pi).unwrap();
        assert_eq!(c.coeffs(), phi_pi.coeffs());
        assert!(f.compose(&E3::from_i64s(&[1, 1])).is_err());
    }

    #[test]
    fn div_linear_examples() {
        let c = Padic3::from_i64(3);
        let f = X3::polynomial(vec![-(c * c), Padic3::zero(), Padic3::one()]);
        let h = f.div_linear(&c).unwrap();
        assert_eq!(h, X3::polynomial(vec![c, Padic3::one()]));
        let g = X3::from_i64s(&[1, 1]);
        assert!(g.div_linear(&Padic3::one()).is_err());
    }

    #[test]
    fn invert_examples() {
        let f = P3::from_i64s(&[1, 1]);
        let g = f.invert(10).unwrap();
        for n in 0..=10 {
            assert_eq!(g.coeff(n).unwrap(), Padic3::from_i64(if n % 2 == 0 { 1 } else { -1 }));
        }
        let q = P3::q();
        let qi = q.invert(20).unwrap();
        assert_eq!(qi.coeff(0).unwrap(), Padic3::from_ratio(1, 3));
        let prod = &q * &qi;
        assert_eq!(prod.truncate(20), P3::one().truncate(20));
        assert!(P3::var().invert(5).is_err());
    }

    #[test]
    fn pi_power_divide_examples() {
        let f = P3::from_i64s(&[0, 0, 1]);
        assert_eq!(f.pi_power_divide(2).unwrap(), P3::one());
        let t = P3::log_one_plus_var(20);
        let u = t.pi_power_divide(1).unwrap();
        assert_eq!(u.coeff(0).unwrap(), Padic3::one());
        assert!(P3::from_i64s(&[1, 1]).pi_power_divide(1).is_err());
    }

    #[test]
    fn weierstrass_remainder_of_multiple_vanishes() {
        let q = P3::q();
        let f = &q * &P3::from_i64s(&[2, 5, 7, 1]);
        let r = f.weierstrass_rem(q.coeffs()).unwrap();
        assert!(r.iter().all(|c| c.valuation().is_none()));
        let r1 = P3::one().weierstrass_rem(q.coeffs()).unwrap();
        assert_eq!(r1[0], Padic3::one());
    }
}
