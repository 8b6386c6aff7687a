//! Images of the Coleman maps of a modular form at a supersingular prime,
//! described as interpolation modules: the lines `W_i` at `X = u^i − 1`,
//! their classification into `I_1`, `I_2`, `I_3`, the generators `X_1`,
//! `X_2`, the weight-two functional `ρ`, and formal membership tests.
//!
//! Pairs `(F, G)` are row vectors; `(F, G)·M` gives the coordinates
//! `(−L_2, L_1)` in the basis `ν`. All statements concern the module cut out
//! by the interpolation conditions.

use serde_json::json;

use crate::error::{Error, Result};
use crate::interpolation::{x_minus, Condition, InterpolationModule, Poly, ProjectionImage};
use crate::matrix::Matrix;
use crate::mellin::{bounded_growth, lambda, u_power, CharacterIndex, Outcome};
use crate::padic::ilog;
use crate::phi_module::FilteredPhiModule;
use crate::profile::PrecisionProfile;
use crate::scalar::{PadicField, Scalar};
use crate::series::XSeries;
use crate::wach::{build_wach, log_matrix, LogMatrix, WachKind};

/// Digits of margin required to call a coordinate nonzero.
pub const MARGIN: i64 = 3;

/// `X − u^i + 1`.
pub fn chi_point<S: PadicField>(i: i64) -> S {
    u_power::<S>(i) - S::one()
}

/// `X_k = ∏_{j=0}^{k−2} (X − u^j + 1)`.
pub fn x_k<S: PadicField>(k: i64) -> Poly<S> {
    (0..=k - 2).fold(Poly::one(), |acc, j| &acc * &x_minus(&chi_point::<S>(j)))
}

/// Which coordinate a condition constrains.
#[derive(Clone, Debug, PartialEq)]
pub enum ConditionType<S> {
    /// `F(x_i) = 0`.
    FirstVanishes,
    /// `G(x_i) = 0`.
    SecondVanishes,
    /// `F(x_i) = r·G(x_i)` with `r ≠ 0`.
    Ratio(S),
}

/// The image description for one `(p, k, a_p, η)`.
#[derive(Clone, Debug)]
pub struct ColemanImageData<S: Scalar> {
    pub p: u64,
    pub k: i64,
    pub ap: i64,
    pub eta: CharacterIndex,
    /// Condition `i` sits at `u^i − 1` with line `W_i` (one row).
    pub conditions: Vec<Condition<S>>,
    pub types: Vec<ConditionType<S>>,
    pub i1: Vec<usize>,
    pub i2: Vec<usize>,
    pub i3: Vec<usize>,
    /// `r_i` for `i ∈ I_3`.
    pub r: Vec<(usize, S)>,
    pub x1: Poly<S>,
    pub x2: Poly<S>,
    /// Change of basis applied to `(F, G)`, if any.
    pub basis_change: Option<Matrix<S>>,
    /// Smallest absolute precision among the computed line generators.
    pub precision: i64,
    pub log_matrix: LogMatrix<S>,
}

/// Whether a coordinate is zero, nonzero, or too close to call.
fn classify_coordinate<S: Scalar>(c: &S, prec: i64) -> Result<bool> {
    match c.valuation() {
        None => Ok(true),
        Some(v) if v <= prec - MARGIN => Ok(false),
        Some(v) => Err(Error::Indeterminate(format!(
            "coordinate of valuation {v} is within {MARGIN} digits of the precision {prec}"
        ))),
    }
}

/// The Wach datum matching a modular module.
fn wach_kind_for<S: Scalar>(m: &FilteredPhiModule<S>) -> Result<WachKind> {
    let md = m
        .modular
        .ok_or_else(|| Error::Domain("image conditions need modular data".into()))?;
    match (md.k, md.ap) {
        (2, ap) => Ok(WachKind::Weight2 { ap }),
        (k, 0) => Ok(WachKind::Ap0 { k }),
        (k, ap) => Err(Error::Domain(format!(
            "no validated Wach datum for k = {k}, a_p = {ap}"
        ))),
    }
}

/// Image conditions for a modular form with the Weil bound enforced.
pub fn image_conditions<S: PadicField>(
    k: i64,
    ap: i64,
    eta: u64,
    profile: &PrecisionProfile,
) -> Result<ColemanImageData<S>> {
    let m = FilteredPhiModule::<S>::build_modular(k, ap)?;
    image_conditions_module(&m, eta, profile)
}

/// Image conditions for a given modular module; the log-matrix is built
/// from the matching Wach datum.
pub fn image_conditions_module<S: PadicField>(
    m: &FilteredPhiModule<S>,
    eta: u64,
    profile: &PrecisionProfile,
) -> Result<ColemanImageData<S>> {
    let eta = CharacterIndex::new(eta, S::PRIME)?;
    let wach = build_wach::<S>(wach_kind_for(m)?, profile)?;
    let l = log_matrix(&wach, profile)?;
    image_conditions_for(m, eta, l, None)
}

/// Re-runs the classification after the change of basis `B`.
pub fn rebase<S: PadicField>(
    m: &FilteredPhiModule<S>,
    data: &ColemanImageData<S>,
    b: Matrix<S>,
) -> Result<ColemanImageData<S>> {
    image_conditions_for(m, data.eta, data.log_matrix.clone(), Some(b))
}

/// Image conditions from an explicit module and log-matrix, optionally
/// after the change of basis `(F′, G′) = (F, G)·B` (so `M′ = B^{−1}M`).
pub fn image_conditions_for<S: PadicField>(
    m: &FilteredPhiModule<S>,
    eta: CharacterIndex,
    l: LogMatrix<S>,
    basis_change: Option<Matrix<S>>,
) -> Result<ColemanImageData<S>> {
    let md = m
        .modular
        .ok_or_else(|| Error::Domain("image conditions need modular data".into()))?;
    let mut conditions = Vec::new();
    let mut types = Vec::new();
    let (mut i1, mut i2, mut i3, mut r) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut precision = i64::MAX;
    for i in 0..=md.k - 2 {
        let mut mi = l.value_at_chi_power(i as u32)?;
        if let Some(b) = &basis_change {
            mi = &b.inverse()? * &mi;
        }
        let inv = mi
            .inverse()
            .map_err(|_| Error::TheoremViolation(format!("M(u^{i} − 1) is singular")))?;
        let v = m.v_subspace(i, eta)?;
        if v.len() != 1 {
            return Err(Error::Consistency(format!("V_({i},η) has dimension {}", v.len())));
        }
        let w = inv.vec_mul(&v[0]);
        let prec = w.iter().map(|c| c.abs_prec()).min().unwrap_or(i64::MAX);
        precision = precision.min(prec);
        let (z0, z1) = (classify_coordinate(&w[0], prec)?, classify_coordinate(&w[1], prec)?);
        let idx = i as usize;
        let (line, ty) = match (z0, z1) {
            (true, true) => return Err(Error::Consistency(format!("W_{i} is zero"))),
            (true, false) => {
                i1.push(idx);
                (vec![S::zero(), S::one()], ConditionType::FirstVanishes)
            }
            (false, true) => {
                i2.push(idx);
                (vec![S::one(), S::zero()], ConditionType::SecondVanishes)
            }
            (false, false) => {
                let ratio = w[0] / w[1];
                i3.push(idx);
                r.push((idx, ratio));
                (vec![ratio, S::one()], ConditionType::Ratio(ratio))
            }
        };
        conditions.push(Condition {
            x: chi_point::<S>(i),
            v: vec![line],
        });
        types.push(ty);
    }
    let x1 = i1
        .iter()
        .fold(Poly::one(), |acc, &i| &acc * &x_minus(&chi_point::<S>(i as i64)));
    let x2 = i2
        .iter()
        .fold(Poly::one(), |acc, &i| &acc * &x_minus(&chi_point::<S>(i as i64)));
    Ok(ColemanImageData {
        p: S::PRIME,
        k: md.k,
        ap: md.ap,
        eta,
        conditions,
        types,
        i1,
        i2,
        i3,
        r,
        x1,
        x2,
        basis_change,
        precision,
        log_matrix: l,
    })
}

/// Generators of the coordinate projections and the induced module.
#[derive(Clone, Debug)]
pub struct ImageGenerators<S: Scalar> {
    pub module: InterpolationModule<S>,
    pub first: ProjectionImage<S>,
    pub second: ProjectionImage<S>,
    /// `X_1·X_2` divides `X_k`.
    pub divides_x_k: bool,
}

/// Builds the interpolation module of the conditions, its projection
/// images, and checks them against the classification.
pub fn classify_and_generators<S: PadicField>(data: &ColemanImageData<S>) -> Result<ImageGenerators<S>> {
    if data.i1.iter().any(|i| data.i2.contains(i)) {
        return Err(Error::TheoremViolation("I_1 and I_2 overlap".into()));
    }
    let module = InterpolationModule::build(2, data.conditions.clone())?;
    let first = module.projection_image(0)?;
    let second = module.projection_image(1)?;
    if first.j != data.i1 || second.j != data.i2 {
        return Err(Error::Consistency(
            "projection images disagree with the classification".into(),
        ));
    }
    let mut q = x_k::<S>(data.k);
    let mut divides_x_k = true;
    for &i in data.i1.iter().chain(&data.i2) {
        match q.div_linear(&chi_point::<S>(i as i64)) {
            Ok(next) => q = next,
            Err(_) => divides_x_k = false,
        }
    }
    Ok(ImageGenerators {
        module,
        first,
        second,
        divides_x_k,
    })
}

/// The functional `ρ` on `(F(0), G(0))` for weight two, oriented so that its
/// kernel is the image condition at `X = 0` for the trivial character:
/// `ρ(F, G) = (2 − a_p)·G(0) − (p − 1)·F(0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rho<S> {
    pub coeff_f: S,
    pub coeff_g: S,
}

impl<S: Scalar> Rho<S> {
    /// `ρ` applied to a pair of values.
    pub fn apply(&self, f0: &S, g0: &S) -> S {
        self.coeff_f.clone() * f0.clone() + self.coeff_g.clone() * g0.clone()
    }

    /// A generator of the kernel.
    pub fn kernel(&self) -> Vec<S> {
        vec![self.coeff_g.clone(), -self.coeff_f.clone()]
    }

    /// Coefficients in the order `(g, h) = (G, F)` of the `ρ(g, h)` display.
    pub fn as_gh(&self) -> (S, S) {
        (self.coeff_g.clone(), self.coeff_f.clone())
    }
}

/// `ρ` for weight two, checked against the computed image condition.
pub fn rho_weight2<S: PadicField>(ap: i64, profile: &PrecisionProfile) -> Result<Rho<S>> {
    let p = S::PRIME as i64;
    let rho = Rho {
        coeff_f: S::from_i64(-(p - 1)),
        coeff_g: S::from_i64(2 - ap),
    };
    let data = image_conditions::<S>(2, ap, 0, profile)?;
    check_rho(&rho, &data)?;
    Ok(rho)
}

/// Checks that the kernel of `ρ` is the line `W_0`.
pub fn check_rho<S: Scalar>(rho: &Rho<S>, data: &ColemanImageData<S>) -> Result<()> {
    let w = &data.conditions[0].v[0];
    let ker = rho.kernel();
    let cross = w[0].clone() * ker[1].clone() - w[1].clone() * ker[0].clone();
    if cross.valuation().is_some() {
        return Err(Error::Consistency(
            "kernel of ρ differs from the image condition at X = 0".into(),
        ));
    }
    Ok(())
}

/// `(F, G)·M`.
pub fn apply_log_matrix<S: Scalar>(f: &XSeries<S>, g: &XSeries<S>, l: &LogMatrix<S>) -> (XSeries<S>, XSeries<S>) {
    let m = &l.m;
    let a = &(f * m.get(0, 0)) + &(g * m.get(1, 0));
    let b = &(f * m.get(0, 1)) + &(g * m.get(1, 1));
    (a, b)
}

/// Result of one condition test.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResult {
    pub i: usize,
    pub holds: bool,
    /// Valuation of the defect when nonzero.
    pub defect_valuation: Option<i64>,
    /// Precision to which the defect was computed.
    pub precision: i64,
}

/// Membership of `(F, G)` in the module cut out by the conditions.
#[derive(Clone, Debug)]
pub struct MembershipReport {
    pub results: Vec<ConditionResult>,
}

impl MembershipReport {
    /// All conditions hold.
    pub fn member(&self) -> bool {
        self.results.iter().all(|r| r.holds)
    }
}

/// Evaluates every condition on `(F, G)`.
pub fn check_membership<S: Scalar>(
    f: &XSeries<S>,
    g: &XSeries<S>,
    data: &ColemanImageData<S>,
) -> Result<MembershipReport> {
    let mut results = Vec::new();
    for (i, c) in data.conditions.iter().enumerate() {
        let (fx, gx) = (f.eval(&c.x)?, g.eval(&c.x)?);
        let w = &c.v[0];
        let defect = fx * w[1].clone() - gx * w[0].clone();
        results.push(ConditionResult {
            i,
            holds: defect.valuation().is_none(),
            defect_valuation: defect.valuation(),
            precision: defect.abs_prec(),
        });
    }
    Ok(MembershipReport { results })
}

/// The identity `det M·X_k ≐ λ_{k−1}`: the quotient of `det M` by
/// `λ_{k−1}/X_k` has nonzero constant term and bounded growth.
pub fn det_factorization_check<S: PadicField>(data: &ColemanImageData<S>) -> Result<Outcome> {
    let dx = data.log_matrix.profile.dx;
    // Division by `X − c` with `v(c) = 1` costs precision in the top
    // degrees, so `λ` is computed well past `dx` first.
    let headroom = (data.k as usize) * (S::cap() as usize + 2 * ilog(dx as u64 + 2, S::PRIME) as usize + 4);
    let mut lam = lambda::<S>((data.k - 1) as usize, dx + headroom);
    for i in 0..=data.k - 2 {
        lam = lam.div_linear(&chi_point::<S>(i))?;
    }
    let lam = lam.truncate_keeping_tail(dx);
    let det = data.log_matrix.m.det().truncate_keeping_tail(dx);
    let quotient = (&det * &lam.invert(dx)?).truncate_keeping_tail(dx);
    if quotient.coeffs()[0].valuation().is_none() {
        return Ok(Outcome::Fail);
    }
    Ok(bounded_growth(&quotient, 1))
}

impl<S: Scalar> ColemanImageData<S> {
    /// JSON report.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "p": self.p,
            "k": self.k,
            "ap": self.ap,
            "eta": self.eta.s,
            "I1": self.i1,
            "I2": self.i2,
            "I3": self.i3,
            "r": self.r.iter().map(|(i, r)| json!({"i": i, "r": r.to_json()})).collect::<Vec<_>>(),
            "X1": self.x1.to_json(),
            "X2": self.x2.to_json(),
            "conditions": self.conditions.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "basis_change": self.basis_change.as_ref().map(|b| b.to_json()),
            "precision": self.precision,
            "scope": "image of the condition module; equality with the Coleman image is not recomputed",
        })
    }
}
