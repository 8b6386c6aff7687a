//! Randomized verification suites shared by the command line and the tests.
//!
//! Each suite returns named checks with an [`Outcome`] and the smallest
//! guaranteed precision met. Reports list checks sorted by id, so the order
//! in which items run does not affect the output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::Result;
use crate::interpolation::{random_conditions, random_poly, InterpolationModule, Poly};
use crate::matrix::Matrix;
use crate::mellin::{
    annihilator_check, ell, eval_at_chi_power, eval_mellin_at_chi_power, gamma_act, inverse_mellin, mellin, phi, psi,
    t_divisible, Outcome,
};
use crate::phi_module::{p_pow, FilteredPhiModule};
use crate::profile::PrecisionProfile;
use crate::scalar::{PadicField, Scalar, INF};
use crate::series::{PiSeries, XSeries};

/// Digits required by the operator and Mellin suites.
pub const REQUIRED_DIGITS: i64 = 10;

/// One named check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: String,
    pub outcome: Outcome,
    /// Smallest guaranteed precision met, `None` when not applicable.
    pub precision: Option<i64>,
    pub detail: Value,
}

impl Check {
    pub fn new(id: impl Into<String>, outcome: Outcome, precision: Option<i64>, detail: Value) -> Self {
        Check {
            id: id.into(),
            outcome,
            precision,
            detail,
        }
    }

    /// A check that holds or fails outright.
    pub fn boolean(id: impl Into<String>, ok: bool, detail: Value) -> Self {
        Check::new(id, if ok { Outcome::Pass } else { Outcome::Fail }, None, detail)
    }

    pub fn to_json(&self) -> Value {
        json!({"id": self.id, "outcome": self.outcome.label(), "precision": self.precision, "detail": self.detail})
    }
}

/// A collection of checks.
#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
    }

    /// Conjunction of all outcomes.
    pub fn outcome(&self) -> Outcome {
        self.checks.iter().fold(Outcome::Pass, |acc, c| acc.and(c.outcome))
    }

    /// Smallest precision reported by any check.
    pub fn precision(&self) -> Option<i64> {
        self.checks.iter().filter_map(|c| c.precision).min()
    }

    /// The check with the given id.
    pub fn get(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// Checks sorted by id.
    pub fn sorted(&self) -> Vec<Check> {
        let mut v = self.checks.clone();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.sorted().iter().map(Check::to_json).collect())
    }
}

/// Tally of repeated trials of one identity.
#[derive(Default)]
struct Tally {
    cases: usize,
    passed: usize,
    undecided: usize,
    min_precision: i64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            min_precision: INF,
            ..Default::default()
        }
    }

    /// Records an agreement result: `None` means a known discrepancy.
    fn record(&mut self, agreement: Option<i64>) {
        self.cases += 1;
        match agreement {
            Some(prec) if prec >= REQUIRED_DIGITS => {
                self.passed += 1;
                self.min_precision = self.min_precision.min(prec);
            }
            Some(prec) => {
                self.undecided += 1;
                self.min_precision = self.min_precision.min(prec);
            }
            None => {}
        }
    }

    fn check(&self, id: String) -> Check {
        let outcome = if self.passed == self.cases {
            Outcome::Pass
        } else if self.passed + self.undecided == self.cases {
            Outcome::Indeterminate
        } else {
            Outcome::Fail
        };
        Check::new(
            id,
            outcome,
            Some(self.min_precision),
            json!({"cases": self.cases, "passed": self.passed, "undecided": self.undecided}),
        )
    }
}

/// Agreement of a series with zero through degree `upto`.
fn vanishing<S: Scalar, R: crate::series::Ring>(f: &crate::series::Series<S, R>, upto: usize) -> Option<i64> {
    let zero = crate::series::Series::<S, R>::polynomial(vec![S::zero(); upto + 1]);
    f.truncate(upto).agreement(&zero, upto)
}

fn random_pi<S: Scalar>(rng: &mut ChaCha8Rng, deg: usize) -> PiSeries<S> {
    PiSeries::polynomial((0..=deg).map(|_| S::from_i64(rng.gen_range(-40..40))).collect())
}

fn random_x<S: Scalar>(rng: &mut ChaCha8Rng, deg: usize) -> XSeries<S> {
    XSeries::polynomial((0..=deg).map(|_| S::from_i64(rng.gen_range(-40..40))).collect())
}

/// A random integer prime to `p` in `[1, 200]`.
fn random_unit<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    loop {
        let a: i64 = rng.gen_range(1..=200);
        if a % S::PRIME as i64 != 0 {
            return S::from_i64(a);
        }
    }
}

/// `ψ∘φ = id`, `ψ((1+π)φ(f)) = 0`, and `γ_a∘φ = φ∘γ_a` on random
/// polynomials of degree `D/p`.
pub fn operators_suite<S: Scalar>(profile: &PrecisionProfile, seed: u64, cases: usize) -> Result<SuiteReport> {
    let p = S::PRIME as usize;
    let d = profile.d;
    let dm = d / p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut inv, mut kill, mut comm) = (Tally::new(), Tally::new(), Tally::new());
    let one_plus_pi = PiSeries::<S>::from_i64s(&[1, 1]);
    for _ in 0..cases {
        let f = random_pi::<S>(&mut rng, dm);
        let pf = phi(&f, d);
        inv.record(psi(&pf).truncate(dm).agreement(&f, dm));
        kill.record(vanishing(&psi(&(&one_plus_pi * &pf)), dm - 1));
        let a = random_unit::<S>(&mut rng);
        let lhs = gamma_act(&a, &pf, d)?;
        let rhs = phi(&gamma_act(&a, &f, d)?, d);
        comm.record(lhs.agreement(&rhs, d));
    }
    let tag = format!("operators/p{p}");
    let mut r = SuiteReport::default();
    r.push(inv.check(format!("{tag}/psi_phi_identity")));
    r.push(kill.check(format!("{tag}/psi_kills_one_plus_pi_phi")));
    r.push(comm.check(format!("{tag}/gamma_commutes_with_phi")));
    Ok(r)
}

/// Roundtrip `𝔐^{−1}∘𝔐 = id` and the two evaluations of `f(u^s − 1)`.
pub fn mellin_suite<S: Scalar>(profile: &PrecisionProfile, seed: u64, cases: usize, s_max: u32) -> Result<SuiteReport> {
    let p = S::PRIME;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut round, mut dual) = (Tally::new(), Tally::new());
    for _ in 0..cases {
        let f = random_x::<S>(&mut rng, profile.dx);
        let g = mellin(&f, profile.d);
        match inverse_mellin(&g, profile.dx) {
            Ok(back) => round.record(back.f.agreement(&f, profile.dx)),
            Err(_) => round.record(None),
        }
        for s in 0..=s_max {
            let a = eval_at_chi_power(&f, s)?;
            let b = eval_mellin_at_chi_power(&g, s)?;
            let prec = a.abs_prec().min(b.abs_prec());
            dual.record(match (a.clone() - b).valuation() {
                None => Some(prec),
                Some(v) if v >= REQUIRED_DIGITS => Some(v.min(prec)),
                Some(_) => None,
            });
        }
    }
    let mut r = SuiteReport::default();
    r.push(round.check(format!("mellin/p{p}/roundtrip")));
    r.push(dual.check(format!("mellin/p{p}/dual_path_evaluation")));
    Ok(r)
}

/// The annihilator checks for `k = 1..=k_max` on random `f`, plus the
/// negative control that `ℓ_1` alone does not make `𝔐(ℓ_1 f)` divisible by `t`.
pub fn annihilator_suite<S: PadicField>(
    profile: &PrecisionProfile,
    seed: u64,
    cases: usize,
    k_max: usize,
) -> Result<SuiteReport> {
    let p = S::PRIME;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deg = profile.d;
    let mut r = SuiteReport::default();
    let fs: Vec<XSeries<S>> = (0..cases).map(|_| random_x::<S>(&mut rng, 10)).collect();
    for k in 1..=k_max {
        let (mut lam, mut del) = (Outcome::Pass, Outcome::Pass);
        let mut prec = INF;
        for f in &fs {
            let rep = annihilator_check(k, f, deg)?;
            lam = lam.and(rep.lambda_divisible);
            del = del.and(rep.delta_variant);
            prec = prec.min(rep.precision_used);
        }
        r.push(Check::new(
            format!("annihilator/p{p}/k{k}/lambda_divisible"),
            lam,
            Some(prec),
            json!({"cases": cases}),
        ));
        r.push(Check::new(
            format!("annihilator/p{p}/k{k}/delta_variant"),
            del,
            Some(prec),
            json!({"cases": cases}),
        ));
    }
    let mut rejected = true;
    for f in &fs {
        let g = mellin(&(&ell::<S>(1, f.high() + 20) * f), deg);
        rejected &= t_divisible(&g, 1) == Outcome::Fail;
    }
    r.push(Check::boolean(
        format!("annihilator/p{p}/wrong_product_rejected"),
        rejected,
        json!({"cases": cases}),
    ));
    Ok(r)
}

/// Random interpolation modules: determinant, brute-force membership
/// against basis membership, and projection generators.
pub fn interpolation_suite<S: Scalar>(seed: u64, modules: usize, tuples: usize) -> Result<SuiteReport> {
    let p = S::PRIME;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut det_ok, mut decided, mut agreed, mut undecided, mut divides) = (0usize, 0usize, 0usize, 0usize, true);
    for _ in 0..modules {
        let d = rng.gen_range(2..=3);
        let count = rng.gen_range(0..=3);
        let s = InterpolationModule::<S>::build(d, random_conditions(&mut rng, d, count))?;
        if s.det_unit().is_ok() {
            det_ok += 1;
        }
        let images: Vec<_> = (0..d).map(|c| s.projection_image(c)).collect::<Result<_>>()?;
        for _ in 0..tuples {
            let member = rng.gen_bool(0.5);
            let f: Vec<Poly<S>> = if member {
                let c: Vec<Poly<S>> = (0..d).map(|_| random_poly(&mut rng, 2)).collect();
                s.combine(&c)
            } else {
                (0..d).map(|_| random_poly(&mut rng, 4)).collect()
            };
            match (s.satisfies(&f), s.contains(&f)) {
                (Ok(a), Ok(b)) => {
                    decided += 1;
                    if a == b {
                        agreed += 1;
                    }
                }
                _ => undecided += 1,
            }
            if member {
                for img in &images {
                    for &j in &img.j {
                        let x = &s.conditions[j].x;
                        divides &= f[img.coord].eval(x)?.valuation().is_none();
                    }
                }
            }
        }
    }
    let total = modules * tuples;
    let membership = if agreed < decided {
        Outcome::Fail
    } else if (decided as f64) < 0.99 * total as f64 {
        Outcome::Indeterminate
    } else {
        Outcome::Pass
    };
    let mut r = SuiteReport::default();
    r.push(Check::boolean(
        format!("interpolation/p{p}/determinant"),
        det_ok == modules,
        json!({"modules": modules, "matching": det_ok}),
    ));
    r.push(Check::new(
        format!("interpolation/p{p}/membership"),
        membership,
        None,
        json!({"tuples": total, "decided": decided, "agreed": agreed, "undecided": undecided}),
    ));
    r.push(Check::boolean(
        format!("interpolation/p{p}/projection_generators_divide"),
        divides,
        json!({}),
    ));
    Ok(r)
}

/// `(1 − φ)^{−1}(1 − p^{−1}φ^{−1})` by direct matrix inversion.
pub fn ratio_by_inversion<S: Scalar>(phi: &Matrix<S>) -> Result<Matrix<S>> {
    let id = Matrix::identity(phi.rows());
    let pinv = S::from_i64(S::PRIME as i64).inv().expect("p is nonzero");
    let left = (&id - phi).inverse()?;
    let right = &id - &phi.inverse()?.scale(&pinv);
    Ok(&left * &right)
}

/// For modular data: every relation `c_2 L_2 = c_1 L_1` against the line
/// `V_{j,η}` built by direct inversion, and the `X = 0` relation pulled back
/// through `M(0) = A^T`.
pub fn relations_suite<S: Scalar>(m: &FilteredPhiModule<S>) -> Result<SuiteReport> {
    let md = m
        .modular
        .ok_or_else(|| crate::error::Error::Domain("relations need modular data".into()))?;
    let (p, k, ap) = (S::PRIME as i64, md.k, md.ap);
    let tag = format!("relations/p{p}/k{k}/ap{ap}");
    let mut r = SuiteReport::default();
    for j in 0..=k - 2 {
        let (c2, c1) = m.derive_relation(j)?;
        let closed = c2 == S::from_i64(-ap) + p_pow::<S>(j + 1) + p_pow::<S>(k - 1 - j) && c1 == S::from_i64(p - 1);
        let line = ratio_by_inversion(&m.twisted_phi(j))?
            .inverse()?
            .mul_vec(&m.fil_basis(j)[0]);
        let holds = (c2 * line[0].clone() + c1 * line[1].clone()).valuation().is_none();
        r.push(Check::boolean(format!("{tag}/j{j}"), closed && holds, json!({"j": j})));
    }
    let line = ratio_by_inversion(&m.twisted_phi(0))?
        .inverse()?
        .mul_vec(&m.fil_basis(0)[0]);
    let w0 = m.a.inverse()?.mul_vec(&line);
    let pk2 = p_pow::<S>(k - 2);
    let target = [S::one() + pk2.clone() - S::from_i64(ap), pk2 * S::from_i64(p - 1)];
    let cross = w0[0].clone() * target[1].clone() - w0[1].clone() * target[0].clone();
    r.push(Check::boolean(
        format!("{tag}/x0_display"),
        cross.valuation().is_none(),
        json!({"W0": [w0[0].to_json(), w0[1].to_json()]}),
    ));
    Ok(r)
}
