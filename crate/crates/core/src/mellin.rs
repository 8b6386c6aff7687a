//! The operators `φ`, `ψ` and `Γ` on π-series, the Mellin transform between
//! X-series and the `ψ = 0` part, evaluation at powers of the cyclotomic
//! character, and the distinguished elements `ℓ_i`, `δ_i`, `𝔫_k`, `λ_k`.
//!
//! `γ` is fixed with `χ(γ) = u = 1 + p`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::padic::ilog;
use crate::scalar::{PadicField, Scalar, INF};
use crate::series::{binomial_table, Envelope, PiSeries, Ring, Series, Tail, XSeries};

/// The chosen topological generator of `Γ_1` through its character value.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaScale<S> {
    /// `u = χ(γ) = 1 + p`.
    pub u: S,
    /// `log_p(u)`.
    pub log_u: S,
}

impl<S: PadicField> GammaScale<S> {
    /// The scale for `u = 1 + p`.
    pub fn new() -> Self {
        let u = S::from_i64(1 + S::PRIME as i64);
        let log_u = u.log_one_unit().expect("1 + p is a one-unit");
        GammaScale { u, log_u }
    }
}

impl<S: PadicField> Default for GammaScale<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// The integer `u^j = (1+p)^j`.
pub fn u_power_int(p: u64, j: usize) -> BigInt {
    BigInt::from(1 + p).pow(j as u32)
}

/// The scalar `u^s` for any integer `s`.
pub fn u_power<S: Scalar>(s: i64) -> S {
    let u = S::from_i64(1 + S::PRIME as i64);
    u.pow_i(s)
}

/// A character `η = χ_0^s` of `Δ`, named by its exponent modulo `p − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CharacterIndex {
    /// Exponent `0 ≤ s ≤ p − 2`.
    pub s: u64,
    /// The prime.
    pub p: u64,
}

impl CharacterIndex {
    /// Validated index.
    pub fn new(s: u64, p: u64) -> Result<Self> {
        if s + 2 > p {
            return Err(Error::Domain(format!("character index {s} outside 0..={}", p - 2)));
        }
        Ok(CharacterIndex { s, p })
    }

    /// Whether `χ_0^i = η`.
    pub fn matches(&self, i: i64) -> bool {
        i.rem_euclid(self.p as i64 - 1) as u64 == self.s
    }
}

/// Three-valued outcome of a precision-limited check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Indeterminate,
}

impl Outcome {
    /// Lower-case label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Indeterminate => "indeterminate",
        }
    }

    /// Conjunction (any fail wins, then any indeterminate).
    pub fn and(self, o: Outcome) -> Outcome {
        use Outcome::*;
        match (self, o) {
            (Fail, _) | (_, Fail) => Fail,
            (Indeterminate, _) | (_, Indeterminate) => Indeterminate,
            _ => Pass,
        }
    }
}

/// `φ(π) = (1+π)^p − 1`.
pub fn phi_pi<S: Scalar>() -> PiSeries<S> {
    let p = S::PRIME as usize;
    let row = binomial_table::<S>(p, p);
    let mut cs = row[p].clone();
    cs[0] = S::zero();
    PiSeries::polynomial(cs)
}

/// `φ(f) = f((1+π)^p − 1)`, known through `min(deg, known degree of f)`.
pub fn phi<S: Scalar>(f: &PiSeries<S>, deg: usize) -> PiSeries<S> {
    f.compose(&phi_pi()).expect("φ(π) has zero constant term").truncate(deg)
}

/// Coefficients in the basis `(1+π)^j` of a polynomial given in the basis `π^n`.
pub fn to_one_plus_basis<S: Scalar>(c: &[S]) -> Vec<S> {
    let h = c.len().saturating_sub(1);
    let tab = binomial_table::<S>(h, h);
    (0..=h)
        .map(|j| {
            let mut acc = S::zero();
            for (n, cn) in c.iter().enumerate().skip(j) {
                let term = cn.clone() * tab[n][j].clone();
                acc = if (n - j) % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        })
        .collect()
}

/// `ψ(f)`: the component `f_0` of `f = Σ_{i<p} (1+π)^i φ(f_i)`.
/// Output is known through degree `⌊high/p⌋`.
pub fn psi<S: Scalar>(f: &PiSeries<S>) -> PiSeries<S> {
    let p = S::PRIME as usize;
    let b = to_one_plus_basis(f.coeffs());
    let h_out = f.high() / p;
    let tab = binomial_table::<S>(h_out, h_out);
    let mut out = vec![S::zero(); h_out + 1];
    for i in 0..=h_out {
        let bj = &b[p * i];
        if bj.is_zero() && bj.abs_prec() >= INF {
            continue;
        }
        for (e, o) in out.iter_mut().enumerate().take(i + 1) {
            *o = o.clone() + bj.clone() * tab[i][e].clone();
        }
    }
    if f.is_polynomial() {
        return PiSeries::polynomial(out);
    }
    for (e, o) in out.iter_mut().enumerate() {
        let err = f.tail_error(|n| ((n / p) as i64 - e as i64).max(0));
        *o = o.with_abs_prec(err);
    }
    let tail = match f.whole_envelope() {
        Some(w) => Tail::Bounded(Envelope {
            val: w.val - w.slope,
            slope: w.slope,
        }),
        None => Tail::Unknown,
    };
    PiSeries::new(out, tail)
}

/// `γ_a(f) = f((1+π)^a − 1)` for a p-adic unit `a`.
pub fn gamma_act<S: Scalar>(a: &S, f: &PiSeries<S>, deg: usize) -> Result<PiSeries<S>> {
    if a.valuation() != Some(0) {
        return Err(Error::Domain("the Γ-action needs a p-adic unit".into()));
    }
    let mut g = a.binom_row(deg.max(1));
    g[0] = S::zero();
    let g = PiSeries::new(g, Tail::Bounded(Envelope { val: 0, slope: 0 }));
    Ok(f.compose(&g)?.truncate(deg))
}

/// Rows `(1+π)^{u^j}` for `j = 0..=j_max`, each through degree `deg`.
pub fn gamma_orbit_rows<S: Scalar>(j_max: usize, deg: usize) -> Vec<Vec<S>> {
    (0..=j_max)
        .map(|j| S::from_bigint(&u_power_int(S::PRIME, j)).binom_row(deg))
        .collect()
}

/// Images `𝔐(X^n)` for `n = 0..=n_max` through degree `deg`.
pub fn mellin_monomials<S: Scalar>(n_max: usize, deg: usize) -> Vec<Vec<S>> {
    let rows = gamma_orbit_rows::<S>(n_max, deg);
    let tab = binomial_table::<S>(n_max, n_max);
    (0..=n_max)
        .map(|n| {
            let mut col = vec![S::zero(); deg + 1];
            for j in 0..=n {
                let c = tab[n][j].clone();
                let neg = (n - j) % 2 == 1;
                for (e, x) in col.iter_mut().enumerate() {
                    let t = c.clone() * rows[j][e].clone();
                    *x = if neg { x.clone() - t } else { x.clone() + t };
                }
            }
            col
        })
        .collect()
}

/// The Mellin transform `f ↦ f(γ − 1)·(1+π)`, through degree `deg`.
pub fn mellin<S: Scalar>(f: &XSeries<S>, deg: usize) -> PiSeries<S> {
    let c = to_one_plus_basis(f.coeffs());
    let rows = gamma_orbit_rows::<S>(f.high(), deg);
    let mut out = vec![S::zero(); deg + 1];
    for (j, cj) in c.iter().enumerate() {
        if cj.is_zero() && cj.abs_prec() >= INF {
            continue;
        }
        for (e, o) in out.iter_mut().enumerate() {
            *o = o.clone() + cj.clone() * rows[j][e].clone();
        }
    }
    let p = S::PRIME as usize;
    if !f.is_polynomial() {
        for (e, o) in out.iter_mut().enumerate() {
            let err = f.tail_error(|n| (n as i64 - (e / p) as i64).max(0));
            *o = o.with_abs_prec(err);
        }
    }
    let tail = match f.whole_envelope() {
        Some(w) => Tail::Bounded(w),
        None => Tail::Unknown,
    };
    PiSeries::new(out, tail)
}

/// Whether every represented coefficient is indistinguishable from zero.
fn vanishes<S: Scalar>(f: &PiSeries<S>) -> bool {
    f.coeffs().iter().all(|c| c.valuation().is_none())
}

/// Checks that `g` lies in `(1+π)φ(B⁺)`, the Mellin image of the `Γ_1` part.
pub fn check_gamma1_component<S: Scalar>(g: &PiSeries<S>) -> Result<()> {
    if !vanishes(&psi(g)) {
        return Err(Error::NotPsiZero);
    }
    let p = S::PRIME as i64;
    for i in 2..p {
        let w = S::from_i64(-i).binom_row(g.high());
        let shifted = g.mul_series(&PiSeries::new(w, Tail::Bounded(Envelope { val: 0, slope: 0 })));
        if !vanishes(&psi(&shifted)) {
            return Err(Error::NotInGamma1Component);
        }
    }
    Ok(())
}

/// Result of inverting the Mellin transform.
#[derive(Clone, Debug)]
pub struct InverseMellin<S: Scalar> {
    /// The preimage, degrees `0..=dx`.
    pub f: XSeries<S>,
    /// Sum of pivot valuations lost during elimination.
    pub pivot_loss: i64,
}

/// Solves `𝔐(f) = g` for `f` of degree at most `dx`, by valuation-pivoted
/// elimination on the represented degrees of `g`, validated by a roundtrip.
pub fn inverse_mellin<S: Scalar>(g: &PiSeries<S>, dx: usize) -> Result<InverseMellin<S>> {
    check_gamma1_component(g)?;
    let deg = g.high();
    if dx > deg {
        return Err(Error::Domain(format!("X-degree {dx} exceeds π-degree {deg}")));
    }
    let cols = mellin_monomials::<S>(dx, deg);
    let mut a = Matrix::<S>::zeros(deg + 1, dx + 1);
    for (n, col) in cols.iter().enumerate() {
        for (e, x) in col.iter().enumerate() {
            a.set(e, n, x.clone());
        }
    }
    let (x, residual, loss) = a.solve(g.coeffs()).map_err(|_| Error::NotInImage(-1))?;
    if let Some(bad) = residual.iter().filter_map(|r| r.valuation()).min() {
        return Err(Error::NotInImage(bad));
    }
    let f = XSeries::polynomial(x);
    let back = mellin(&f, deg);
    for e in 0..=deg {
        let d = back.coeffs()[e].clone() - g.coeffs()[e].clone();
        if let Some(v) = d.valuation() {
            return Err(Error::NotInImage(v));
        }
    }
    Ok(InverseMellin { f, pivot_loss: loss })
}

/// `f(u^s − 1)`.
pub fn eval_at_chi_power<S: Scalar>(f: &XSeries<S>, s: u32) -> Result<S> {
    let x = u_power::<S>(s as i64) - S::one();
    f.eval(&x)
}

/// Stirling numbers of the second kind `S(s, e)` for `e = 0..=s`.
pub fn stirling2_row(s: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for n in 1..=s {
        let mut next = vec![BigInt::zero(); n + 1];
        for (e, slot) in next.iter_mut().enumerate().skip(1) {
            let a = if e < n {
                &row[e] * BigInt::from(e)
            } else {
                BigInt::zero()
            };
            *slot = a + &row[e - 1];
        }
        row = next;
    }
    row
}

/// The value at `π = 0` of `((1+π)·d/dπ)^s g`. For `g = 𝔐(f)` this equals
/// `f(u^s − 1)`.
pub fn eval_mellin_at_chi_power<S: Scalar>(g: &PiSeries<S>, s: u32) -> Result<S> {
    let s = s as usize;
    if g.eff_high() < s {
        return Err(Error::PrecisionExhausted(format!(
            "evaluation at χ^{s} needs π-degree {s}, only {} known",
            g.high()
        )));
    }
    let st = stirling2_row(s);
    let mut fact = BigInt::one();
    let mut acc = S::zero();
    for (e, se) in st.iter().enumerate() {
        if e > 0 {
            fact *= BigInt::from(e);
        }
        if se.is_zero() {
            continue;
        }
        acc = acc + S::from_bigint(&(se * &fact)) * g.coeff(e).expect("within known degree");
    }
    Ok(acc)
}

/// `t = log(1+π)`.
pub fn t_series<S: Scalar>(deg: usize) -> PiSeries<S> {
    PiSeries::log_one_plus_var(deg)
}

/// The operator `(1+π)·t·d/dπ`, through which `ℓ_0` acts on `B⁺_rig`.
pub fn t_nabla<S: Scalar>(g: &PiSeries<S>) -> PiSeries<S> {
    let dg = g.derivative();
    let one_plus = PiSeries::from_i64s(&[1, 1]);
    let t = t_series::<S>(dg.high());
    (&(&one_plus * &dg) * &t).truncate(dg.high())
}

/// The distinguished elements of `H(Γ_1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialKind {
    /// `ℓ_i = log(1+X)/log u − i`.
    Ell,
    /// `δ_i = ℓ_i/(X + 1 − u^i)`.
    Delta,
    /// `𝔫_k = (log u)^k δ_{k−1}⋯δ_0`.
    FrakN,
    /// `λ_k = ℓ_0⋯ℓ_{k−1}`.
    Lambda,
}

impl std::str::FromStr for SpecialKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ell" => Ok(SpecialKind::Ell),
            "delta" => Ok(SpecialKind::Delta),
            "frak_n" => Ok(SpecialKind::FrakN),
            "lambda" => Ok(SpecialKind::Lambda),
            _ => Err(Error::Usage(format!("unknown special element {s}"))),
        }
    }
}

/// `ℓ_i` through degree `dx`.
pub fn ell<S: PadicField>(i: i64, dx: usize) -> XSeries<S> {
    let g = GammaScale::<S>::new();
    let inv = g.log_u.inv().expect("log u is nonzero");
    let l = XSeries::<S>::log_one_plus_var(dx).scale(&inv);
    &l - &XSeries::constant(S::from_i64(i))
}

/// `δ_i` through degree `dx − 1`.
pub fn delta<S: PadicField>(i: i64, dx: usize) -> Result<XSeries<S>> {
    let c = u_power::<S>(i) - S::one();
    let headroom = S::cap() as usize + 2 * ilog(dx as u64 + 2, S::PRIME) as usize + 4;
    Ok(ell::<S>(i, dx + headroom).div_linear(&c)?.truncate_keeping_tail(dx))
}

/// `𝔫_k = (log u)^k δ_{k−1}⋯δ_0`.
pub fn frak_n<S: PadicField>(k: usize, dx: usize) -> Result<XSeries<S>> {
    let g = GammaScale::<S>::new();
    let mut acc = XSeries::<S>::one();
    for i in 0..k {
        acc = &acc * &delta::<S>(i as i64, dx)?;
    }
    Ok(acc.scale(&g.log_u.pow_u(k as u64)))
}

/// `λ_k = ℓ_0⋯ℓ_{k−1}`.
pub fn lambda<S: PadicField>(k: usize, dx: usize) -> XSeries<S> {
    let mut acc = XSeries::<S>::one();
    for i in 0..k {
        acc = &acc * &ell::<S>(i as i64, dx);
    }
    acc
}

/// The named element through degree about `dx`.
pub fn special_element<S: PadicField>(kind: SpecialKind, index: i64, dx: usize) -> Result<XSeries<S>> {
    match kind {
        SpecialKind::Ell => Ok(ell(index, dx)),
        SpecialKind::Delta => delta(index, dx),
        SpecialKind::FrakN | SpecialKind::Lambda if index < 0 => {
            Err(Error::Domain("index must be non-negative".into()))
        }
        SpecialKind::FrakN => frak_n(index as usize, dx),
        SpecialKind::Lambda => Ok(lambda(index as usize, dx)),
    }
}

/// Whether `π^k` divides `g`, judged on the represented low-degree coefficients.
pub fn pi_divisible<S: Scalar>(g: &PiSeries<S>, k: usize) -> Outcome {
    let mut out = Outcome::Pass;
    for n in 0..k {
        match g.coeff(n) {
            None => return Outcome::Indeterminate,
            Some(c) if c.valuation().is_some() => return Outcome::Fail,
            Some(c) if c.abs_prec() < 1 => out = Outcome::Indeterminate,
            _ => {}
        }
    }
    out
}

/// Whether `t^k` divides `g` as formal power series (`t/π` is a formal unit).
pub fn t_divisible<S: Scalar>(g: &PiSeries<S>, k: usize) -> Outcome {
    pi_divisible(g, k)
}

/// Growth heuristic for membership in `B⁺_rig`: on coefficients whose
/// valuation is known, `v(c_n) ≥ v_0 − allowance·(⌊log_p(n+1)⌋ + 1)` where
/// `v_0` is the smallest valuation among the first `p` coefficients.
/// Indeterminate when fewer than `2p` coefficients carry information.
pub fn bounded_growth<S: Scalar, R: Ring>(g: &Series<S, R>, allowance: i64) -> Outcome {
    let p = S::PRIME;
    let known: Vec<(usize, i64)> = g
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.abs_prec() >= 1 || c.valuation().is_some())
        .map(|(n, c)| (n, c.val_or_prec()))
        .collect();
    if known.len() < 2 * p as usize {
        return Outcome::Indeterminate;
    }
    let v0 = known
        .iter()
        .take_while(|(n, _)| *n < p as usize)
        .map(|&(_, v)| v)
        .min()
        .unwrap_or(0);
    for &(n, v) in &known {
        if v < v0 - allowance * (ilog(n as u64 + 1, p) as i64 + 1) {
            return Outcome::Fail;
        }
    }
    Outcome::Pass
}

/// Report of the annihilator checks for a given `k`.
#[derive(Clone, Debug)]
pub struct AnnihilatorReport {
    pub k: usize,
    /// `t^k` divides `𝔐(λ_k f)`.
    pub lambda_divisible: Outcome,
    /// `φ(π)^k 𝔐(δ_{k−1}⋯δ_0 f)/t^k` passes the growth heuristic.
    pub delta_variant: Outcome,
    /// Smallest absolute precision met in the checked coefficients.
    pub precision_used: i64,
}

impl AnnihilatorReport {
    /// Combined outcome.
    pub fn outcome(&self) -> Outcome {
        self.lambda_divisible.and(self.delta_variant)
    }
}

/// Runs both annihilator checks for `f` at level `k` with π-degree `deg`.
pub fn annihilator_check<S: PadicField>(k: usize, f: &XSeries<S>, deg: usize) -> Result<AnnihilatorReport> {
    let dx = f.high().max(deg / S::PRIME as usize + S::cap() as usize);
    if k == 0 {
        return Ok(AnnihilatorReport {
            k,
            lambda_divisible: Outcome::Pass,
            delta_variant: Outcome::Pass,
            precision_used: INF,
        });
    }
    let lf = &lambda::<S>(k, dx) * f;
    let g = mellin(&lf, deg);
    let lambda_divisible = t_divisible(&g, k);
    let mut dprod = XSeries::<S>::one();
    for i in 0..k {
        dprod = &dprod * &delta::<S>(i as i64, dx)?;
    }
    let h = mellin(&(&dprod * f), deg);
    let t_over_pi = t_series::<S>(deg + 1).pi_power_divide(1)?;
    let pi_over_t = t_over_pi.invert(deg)?;
    let q = PiSeries::<S>::q();
    let factor = (&q * &pi_over_t).pow(k);
    let y = (&h * &factor).truncate(deg);
    let delta_variant = bounded_growth(&y, k as i64 + 1);
    let precision_used = g.guaranteed_precision(k.saturating_sub(1));
    Ok(AnnihilatorReport {
        k,
        lambda_divisible,
        delta_variant,
        precision_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Exact3, Padic3};

    type E = Exact3;
    type P = Padic3;

    #[test]
    fn phi_examples() {
        let f = PiSeries::<E>::var();
        assert_eq!(phi(&f, 10).coeffs(), PiSeries::<E>::from_i64s(&[0, 3, 3, 1]).coeffs());
        assert_eq!(phi(&PiSeries::<E>::one(), 10), PiSeries::one());
        let t = t_series::<P>(30);
        let pt = phi(&t, 30);
        assert_eq!(pt.truncate(25), t.scale(&P::from_i64(3)).truncate(25));
    }

    #[test]
    fn psi_examples() {
        assert!(psi(&PiSeries::<E>::from_i64s(&[1, 1]))
            .coeffs()
            .iter()
            .all(|c| c.is_zero()));
        assert_eq!(psi(&PiSeries::<E>::one()), PiSeries::one());
        let f = PiSeries::<E>::from_i64s(&[2, -1, 4, 5]);
        assert_eq!(psi(&phi(&f, 100)), f);
    }

    #[test]
    fn gamma_and_mellin_examples() {
        let t = t_series::<P>(30);
        let u = P::from_i64(4);
        let gt = gamma_act(&u, &t, 30).unwrap();
        assert_eq!(gt.truncate(20), t.scale(&u).truncate(20));
        assert!(gamma_act(&P::from_i64(3), &t, 10).is_err());
        let m1 = mellin(&XSeries::<E>::one(), 5);
        assert_eq!(m1.coeffs()[..2], [E::from_i64(1), E::from_i64(1)]);
        let inv = inverse_mellin(&PiSeries::<P>::from_i64s(&[1, 1]), 0).unwrap();
        assert_eq!(inv.f, XSeries::one());
        assert!(matches!(
            inverse_mellin(&PiSeries::<P>::var(), 0),
            Err(Error::NotPsiZero)
        ));
    }

    #[test]
    fn special_values() {
        let l0 = ell::<P>(0, 20);
        assert!(l0.coeff(0).unwrap().valuation().is_none());
        assert_eq!(frak_n::<P>(0, 20).unwrap(), XSeries::one());
        assert_eq!(frak_n::<P>(1, 20).unwrap().coeff(0).unwrap(), P::one());
        let l2 = ell::<P>(2, 20);
        assert!(eval_at_chi_power(&l2, 2).unwrap().valuation().is_none());
        let x = XSeries::<P>::var();
        assert_eq!(eval_at_chi_power(&x, 1).unwrap(), P::from_i64(3));
    }

    #[test]
    fn stirling_rows() {
        let r: Vec<i64> = stirling2_row(4).iter().map(|b| i64::try_from(b).unwrap()).collect();
        assert_eq!(r, vec![0, 1, 7, 6, 1]);
    }
}
