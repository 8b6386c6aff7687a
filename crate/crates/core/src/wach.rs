//! Wach-module data, the embedding into `B⁺_rig ⊗ Dcris`, the log-matrix,
//! Hodge–Tate weight recovery and elementary-divisor checks.
//!
//! Every datum is stored as `(P̃, Ã, s)`: the Wach φ-matrix is
//! `P = q^{−s}·P̃` and the crystalline Frobenius is `A = p^{−s}·Ã`, with
//! `P̃(0) = Ã`. Columns hold images: `φ(n_j) = Σ_i P_ij n_i`. The embedding
//! `E` (column `j` = coordinates of `n_j` in the basis `ν`) solves
//! `A·φ(E) = E·P`, which after clearing denominators reads
//! `q^s·Ã·φ(E) = p^s·E·P̃`.

use serde_json::json;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mellin::{
    bounded_growth, check_gamma1_component, eval_mellin_at_chi_power, frak_n, phi_pi, u_power, Outcome,
};
use crate::phi_module::{p_pow, FilteredPhiModule};
use crate::profile::PrecisionProfile;
use crate::scalar::{PadicField, Scalar, INF};
use crate::series::{Envelope, PiSeries, Ring, Series, Tail, XSeries};

/// Square matrix of series.
#[derive(Clone, Debug)]
pub struct SeriesMatrix<S: Scalar, R: Ring> {
    pub entries: Vec<Vec<Series<S, R>>>,
}

/// Matrix of π-series.
pub type PiMatrix<S> = SeriesMatrix<S, crate::series::PiRing>;
/// Matrix of X-series.
pub type XMatrix<S> = SeriesMatrix<S, crate::series::XRing>;

impl<S: Scalar, R: Ring> SeriesMatrix<S, R> {
    /// Matrix from rows of series.
    pub fn from_rows(entries: Vec<Vec<Series<S, R>>>) -> Self {
        SeriesMatrix { entries }
    }

    /// Constant matrix.
    pub fn constant(m: &Matrix<S>) -> Self {
        SeriesMatrix {
            entries: m
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(Series::constant).collect())
                .collect(),
        }
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> &Series<S, R> {
        &self.entries[i][j]
    }

    /// Entrywise map.
    pub fn map(&self, f: impl Fn(&Series<S, R>) -> Series<S, R>) -> Self {
        SeriesMatrix {
            entries: self.entries.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }

    /// Fallible entrywise map.
    pub fn try_map(&self, f: impl Fn(&Series<S, R>) -> Result<Series<S, R>>) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(&f).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMatrix { entries })
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        let d = self.dim();
        SeriesMatrix {
            entries: (0..d)
                .map(|i| (0..d).map(|j| self.entries[j][i].clone()).collect())
                .collect(),
        }
    }

    /// Product.
    pub fn mul(&self, o: &Self) -> Self {
        let d = self.dim();
        let entries = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let mut acc = &self.entries[i][0] * &o.entries[0][j];
                        for l in 1..d {
                            acc = &acc + &(&self.entries[i][l] * &o.entries[l][j]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        SeriesMatrix { entries }
    }

    /// Determinant by cofactor expansion (small dimensions).
    pub fn det(&self) -> Series<S, R> {
        det_rows(&self.entries)
    }

    /// Adjugate.
    pub fn adjugate(&self) -> Self {
        let d = self.dim();
        if d == 1 {
            return SeriesMatrix {
                entries: vec![vec![Series::one()]],
            };
        }
        let mut out = vec![vec![Series::zero(); d]; d];
        for i in 0..d {
            for j in 0..d {
                let minor: Vec<Vec<Series<S, R>>> = (0..d)
                    .filter(|&r| r != i)
                    .map(|r| (0..d).filter(|&c| c != j).map(|c| self.entries[r][c].clone()).collect())
                    .collect();
                let c = det_rows(&minor);
                out[j][i] = if (i + j) % 2 == 0 { c } else { -&c };
            }
        }
        SeriesMatrix { entries: out }
    }

    /// Value of each entry at the variable `0`.
    pub fn at_zero(&self) -> Matrix<S> {
        Matrix::from_rows(
            self.entries
                .iter()
                .map(|r| r.iter().map(|s| s.coeffs()[0].clone()).collect())
                .collect(),
        )
    }

    /// Value of each entry at a point.
    pub fn eval(&self, x: &S) -> Result<Matrix<S>> {
        let rows = self
            .entries
            .iter()
            .map(|r| r.iter().map(|s| s.eval(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_rows(rows))
    }

    /// Coefficient matrix of degree `n`.
    pub fn coeff_matrix(&self, n: usize) -> Matrix<S> {
        Matrix::from_rows(
            self.entries
                .iter()
                .map(|r| r.iter().map(|s| s.coeff(n).unwrap_or_else(S::zero)).collect())
                .collect(),
        )
    }

    /// Smallest represented degree among entries.
    pub fn high(&self) -> usize {
        self.entries.iter().flatten().map(|s| s.eff_high()).min().unwrap_or(0)
    }

    /// JSON rendering.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|r| serde_json::Value::Array(r.iter().map(|s| s.to_json()).collect()))
                .collect(),
        )
    }
}

fn det_rows<S: Scalar, R: Ring>(m: &[Vec<Series<S, R>>]) -> Series<S, R> {
    match m.len() {
        0 => Series::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        d => {
            let mut acc = Series::zero();
            for j in 0..d {
                let minor: Vec<Vec<Series<S, R>>> = (1..d)
                    .map(|r| (0..d).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
                    .collect();
                let term = &m[0][j] * &det_rows(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Which built-in (or custom) Wach datum to construct.
#[derive(Clone, Debug, PartialEq)]
pub enum WachKind {
    /// Rank one, `P = q^{−r}`, `A = p^{−r}`.
    Twist(i64),
    /// `P̃ = [[0, −1], [q^{k−1}, 0]]`.
    Ap0 { k: i64 },
    /// `P̃ = [[0, −1], [q, a_p]]`.
    Weight2 { ap: i64 },
    /// User-supplied `P̃` with integer polynomial entries, shift `s`, and
    /// expected Hodge–Tate weights.
    Custom {
        p_tilde: Vec<Vec<Vec<i64>>>,
        shift: i64,
        weights: Vec<i64>,
    },
}

impl WachKind {
    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            WachKind::Twist(r) => format!("twist({r})"),
            WachKind::Ap0 { k } => format!("ap0(k={k})"),
            WachKind::Weight2 { ap } => format!("weight2(ap={ap})"),
            WachKind::Custom { .. } => "custom".into(),
        }
    }
}

/// Validated Wach-module data.
#[derive(Clone, Debug)]
pub struct WachModuleData<S: Scalar> {
    /// Constructor used.
    pub kind: WachKind,
    /// `P̃`, polynomial entries.
    pub p_tilde: PiMatrix<S>,
    /// The filtered φ-module (`a = Ã = P̃(0)`, `shift = s`, declared weights).
    pub base: FilteredPhiModule<S>,
}

/// `q^e` as a polynomial.
pub fn q_power<S: Scalar>(e: usize) -> PiSeries<S> {
    PiSeries::<S>::q().pow(e)
}

impl<S: Scalar> WachModuleData<S> {
    /// Builds the datum without running the validation suite.
    pub fn assemble(kind: WachKind) -> Result<Self> {
        let poly = |c: &[i64]| PiSeries::<S>::from_i64s(c);
        let (p_tilde, base) = match &kind {
            WachKind::Twist(r) => {
                if *r < 0 {
                    return Err(Error::InvalidWachData(format!("twist weight {r} is negative")));
                }
                let base = FilteredPhiModule::custom(Matrix::identity(1), *r, vec![*r], vec![vec![S::one()]])?;
                (PiMatrix::from_rows(vec![vec![PiSeries::one()]]), base)
            }
            WachKind::Ap0 { k } => {
                let base = FilteredPhiModule::modular_formal(*k, 0)?;
                let pt = PiMatrix::from_rows(vec![
                    vec![PiSeries::zero(), poly(&[-1])],
                    vec![q_power::<S>((*k - 1) as usize), PiSeries::zero()],
                ]);
                (pt, base)
            }
            WachKind::Weight2 { ap } => {
                let base = FilteredPhiModule::modular_formal(2, *ap)?;
                let pt = PiMatrix::from_rows(vec![
                    vec![PiSeries::zero(), poly(&[-1])],
                    vec![PiSeries::q(), poly(&[*ap])],
                ]);
                (pt, base)
            }
            WachKind::Custom {
                p_tilde,
                shift,
                weights,
            } => {
                let d = p_tilde.len();
                if d == 0 || p_tilde.iter().any(|r| r.len() != d) || weights.len() != d {
                    return Err(Error::InvalidWachData(
                        "custom matrix is not square of the weight count".into(),
                    ));
                }
                let pt = PiMatrix::from_rows(p_tilde.iter().map(|r| r.iter().map(|c| poly(c)).collect()).collect());
                let a0 = pt.at_zero();
                if a0.det().valuation().is_none() {
                    return Err(Error::InvalidWachData("P(0) is singular".into()));
                }
                let flag = (0..d)
                    .map(|i| (0..d).map(|j| if i == j { S::one() } else { S::zero() }).collect())
                    .collect();
                let base = FilteredPhiModule::custom(a0, *shift, weights.clone(), flag)?;
                (pt, base)
            }
        };
        Ok(WachModuleData { kind, p_tilde, base })
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.p_tilde.dim()
    }

    /// Weight shift `s`.
    pub fn shift(&self) -> i64 {
        self.base.shift
    }

    /// `Ã = P̃(0)`.
    pub fn a_tilde(&self) -> &Matrix<S> {
        &self.base.a
    }

    /// `A = p^{−s}·Ã`, the Frobenius on `Dcris(V)`.
    pub fn a_v(&self) -> Matrix<S> {
        self.base.a.scale(&p_pow::<S>(-self.shift()))
    }

    /// Exponent `e = d·s − Σ r_j` of `q` in `det P̃`.
    pub fn det_exponent(&self) -> i64 {
        self.dim() as i64 * self.shift() - self.base.jumps.iter().sum::<i64>()
    }

    /// Checks `P̃(0) = Ã`.
    pub fn check_lift(&self) -> Result<()> {
        if self.p_tilde.at_zero().agreement(&self.base.a).is_none() {
            return Err(Error::InvalidWachData("P(0) differs from A".into()));
        }
        Ok(())
    }

    /// Checks `det P̃ = unit·q^e` with `e = d·s − Σ r_j`.
    pub fn check_det(&self) -> Result<()> {
        let e = self.det_exponent();
        if e < 0 {
            return Err(Error::InvalidWachData(format!(
                "weights exceed the shift budget (e = {e})"
            )));
        }
        let det = self.p_tilde.det();
        let qe = q_power::<S>(e as usize);
        let rem = det.weierstrass_rem(qe.coeffs())?;
        if rem.iter().any(|c| c.valuation().is_some()) {
            return Err(Error::InvalidWachData(format!("det P is not divisible by q^{e}")));
        }
        if det.coeffs()[0].valuation() != Some(e) {
            return Err(Error::InvalidWachData(format!("det P / q^{e} is not a unit")));
        }
        Ok(())
    }

    /// Checks `N ⊆ φ*N`: every entry of `q^s·adj(P̃)` is divisible by `q^e`.
    pub fn check_stability(&self) -> Result<()> {
        let e = self.det_exponent().max(0) as usize;
        let qs = q_power::<S>(self.shift().max(0) as usize);
        let qe = q_power::<S>(e);
        let adj = self.p_tilde.adjugate();
        for row in &adj.entries {
            for x in row {
                let y = &qs * x;
                let rem = y.weierstrass_rem(qe.coeffs())?;
                if rem.iter().any(|c| c.valuation().is_some()) {
                    return Err(Error::InvalidWachData("N is not contained in φ*N".into()));
                }
            }
        }
        Ok(())
    }

    /// JSON summary.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "kind": self.kind.label(),
            "P_tilde": self.p_tilde.to_json(),
            "A_tilde": self.base.a.to_json(),
            "shift": self.shift(),
            "weights": self.base.jumps,
        })
    }
}

/// Coefficients `[φ(π)^m]_n` for `m, n ≤ deg`.
fn phi_pi_powers<S: Scalar>(deg: usize) -> Vec<Vec<S>> {
    let fp = phi_pi::<S>();
    let mut out = Vec::with_capacity(deg + 1);
    let mut cur = vec![S::zero(); deg + 1];
    cur[0] = S::one();
    out.push(cur.clone());
    for _ in 1..=deg {
        let mut next = vec![S::zero(); deg + 1];
        for (i, a) in cur.iter().enumerate() {
            if a.is_zero() && a.abs_prec() >= INF {
                continue;
            }
            for (j, b) in fp.coeffs().iter().enumerate().skip(1) {
                if i + j > deg {
                    break;
                }
                next[i + j] = next[i + j].clone() + a.clone() * b.clone();
            }
        }
        out.push(next.clone());
        cur = next;
    }
    out
}

/// Solves `p^n·Ã·X − X·Ã = R`.
fn sylvester<S: Scalar>(a: &Matrix<S>, n: usize, r: &Matrix<S>) -> Result<Matrix<S>> {
    let d = a.rows();
    let pn = p_pow::<S>(n as i64);
    let mut l = Matrix::<S>::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            for m in 0..d {
                // coefficient of X[m][j] in (p^n Ã X)[i][j]
                let x = l.get(i * d + j, m * d + j).clone() + pn.clone() * a.get(i, m).clone();
                l.set(i * d + j, m * d + j, x);
                // coefficient of X[i][m] in (X Ã)[i][j]
                let y = l.get(i * d + j, i * d + m).clone() - a.get(m, j).clone();
                l.set(i * d + j, i * d + m, y);
            }
        }
    }
    let rhs: Vec<S> = (0..d * d).map(|k| r.get(k / d, k % d).clone()).collect();
    let inv = l.inverse().map_err(|_| Error::Resonance(n))?;
    let x = inv.mul_vec(&rhs);
    Ok(Matrix::new(d, d, x))
}

/// The embedding matrix `E` with `E(0) = 1` and `q^s·Ã·φ(E) = p^s·E·P̃`,
/// solved degree by degree through `p^n·Ã·E_n − E_n·Ã = R_n`.
pub fn embedding_matrix<S: Scalar>(w: &WachModuleData<S>, deg: usize) -> Result<PiMatrix<S>> {
    let d = w.dim();
    let s = w.shift().max(0) as usize;
    let a = w.a_tilde().clone();
    let qs = q_power::<S>(s);
    let ps = p_pow::<S>(s as i64);
    let ps_inv = ps.inv().expect("p^s is nonzero");
    let phipow = phi_pi_powers::<S>(deg);
    let pt: Vec<Matrix<S>> = (0..=deg).map(|n| w.p_tilde.coeff_matrix(n)).collect();
    let qsc: Vec<S> = (0..=deg).map(|n| qs.coeff(n).unwrap_or_else(S::zero)).collect();
    let mut e: Vec<Matrix<S>> = vec![Matrix::identity(d)];
    // φ(E)_n for n already solved
    let mut phi_e: Vec<Matrix<S>> = vec![Matrix::identity(d)];
    for n in 1..=deg {
        // Σ_{m<n} E_m [φ(π)^m]_n
        let mut partial = Matrix::<S>::zeros(d, d);
        for (m, em) in e.iter().enumerate() {
            let c = &phipow[m][n];
            if c.is_zero() && c.abs_prec() >= INF {
                continue;
            }
            partial = &partial + &em.scale(c);
        }
        // p^s Σ_{c≥1} E_{n−c} P̃_c
        let mut ep = Matrix::<S>::zeros(d, d);
        for c in 1..=n {
            if pt[c].min_valuation() >= INF {
                continue;
            }
            ep = &ep + &(&e[n - c] * &pt[c]);
        }
        let ep = ep.scale(&ps);
        // Σ_{a≥1} (q^s)_a Ã φ(E)_{n−a}
        let mut qphi = Matrix::<S>::zeros(d, d);
        for (aa, qa) in qsc.iter().enumerate().take(n + 1).skip(1) {
            if qa.is_zero() && qa.abs_prec() >= INF {
                continue;
            }
            qphi = &qphi + &(&a * &phi_e[n - aa]).scale(qa);
        }
        let rhs = &(&ep - &qphi) - &(&a * &partial).scale(&ps);
        let en = sylvester(&a, n, &rhs.scale(&ps_inv))?;
        let phi_en = &partial + &en.scale(&p_pow::<S>(n as i64));
        e.push(en);
        phi_e.push(phi_en);
    }
    let entries = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| PiSeries::new((0..=deg).map(|n| e[n].get(i, j).clone()).collect(), Tail::Unknown))
                .collect()
        })
        .collect();
    Ok(PiMatrix::from_rows(entries))
}

/// Residual `q^s·Ã·φ(E) − p^s·E·P̃` through degree `deg`, as the smallest
/// valuation among its coefficients (`None` when it vanishes at precision).
pub fn embedding_residual<S: Scalar>(w: &WachModuleData<S>, e: &PiMatrix<S>, deg: usize) -> Option<i64> {
    let s = w.shift().max(0) as usize;
    let lhs = SeriesMatrix::constant(w.a_tilde()).mul(&e.map(|x| crate::mellin::phi(x, deg)));
    let lhs = lhs.map(|x| (&q_power::<S>(s) * x).truncate(deg));
    let rhs = e.mul(&w.p_tilde).map(|x| x.scale(&p_pow::<S>(s as i64)).truncate(deg));
    let mut worst: Option<i64> = None;
    for i in 0..w.dim() {
        for j in 0..w.dim() {
            let diff = &lhs.entries[i][j] - &rhs.entries[i][j];
            for c in diff.coeffs().iter().take(deg + 1) {
                if let Some(v) = c.valuation() {
                    worst = Some(worst.map_or(v, |x: i64| x.min(v)));
                }
            }
        }
    }
    worst
}

/// The distributions `z_m = 𝔐^{−1}((1+π)·φ(π)^m)` through X-degree `dx`,
/// for `m = 0, 1, …` until every coefficient is indistinguishable from zero
/// for three consecutive `m` (or `m_max` is reached).
///
/// `(1+π)φ(π)^m = Σ_j binom(m,j)(−1)^{m−j}(1+π)^{1+pj}` and
/// `(1+π)^{1+pj} = 𝔐((1+X)^{s_j})` with `s_j = log(1+pj)/log u`, so `z_m` is
/// the `m`-th forward difference of `j ↦ (1+X)^{s_j}`.
pub fn phi_pi_power_preimages<S: PadicField>(dx: usize, m_max: usize) -> Vec<Vec<S>> {
    let p = S::PRIME as i64;
    let log_u = S::from_i64(1 + p).log_one_unit().expect("u is a 1-unit");
    let mut diffs: Vec<Vec<S>> = (0..=m_max)
        .map(|j| {
            let s = S::from_i64(1 + p * j as i64).log_one_unit().expect("1+pj is a 1-unit") / log_u;
            s.binom_row(dx)
        })
        .collect();
    let mut out = Vec::new();
    let mut quiet = 0;
    for _ in 0..=m_max {
        let z = diffs[0].clone();
        quiet = if z.iter().all(|c| c.valuation().is_none()) {
            quiet + 1
        } else {
            0
        };
        out.push(z);
        if quiet >= 3 || diffs.len() == 1 {
            break;
        }
        diffs = diffs
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| *a - *b).collect())
            .collect();
    }
    out
}

/// Invariant checks recorded with a log-matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LogMatrixChecks {
    /// `M(0) = A^T` at working precision.
    pub m0_is_a_transpose: bool,
    /// Every `(1+π)φ(E)`-entry passes the `ψ = 0` and `Γ_1`-component tests.
    pub gamma1_component: bool,
    /// Smallest precision to which `𝔐(M_ij)` reproduces the π-side, or
    /// `None` when the roundtrip disagrees.
    pub roundtrip_precision: Option<i64>,
}

/// The log-matrix `M` with `(1+π)φ(n_i) = Σ_j M_ij·((1+π) ⊗ ν_j)`.
#[derive(Clone, Debug)]
pub struct LogMatrix<S: Scalar> {
    /// The prime.
    pub p: u64,
    /// Label of the Wach datum.
    pub label: String,
    /// `M`, entries in X-degrees `0..=DX`.
    pub m: XMatrix<S>,
    /// `𝔐(M)`: entry `(i, j)` is the `ν_j`-coordinate of `(1+π)φ(n_i)`.
    pub mellin_side: PiMatrix<S>,
    /// Frobenius on `Dcris(V)`.
    pub a_v: Matrix<S>,
    /// Hodge–Tate weights.
    pub weights: Vec<i64>,
    /// Weight shift of the datum.
    pub shift: i64,
    /// Profile used.
    pub profile: PrecisionProfile,
    /// Invariant checks.
    pub checks: LogMatrixChecks,
}

/// π-degree through which the Mellin side is expanded and checked.
fn mellin_side_degree(profile: &PrecisionProfile, p: u64) -> usize {
    profile.d.min(p as usize * profile.dx)
}

/// Computes the log-matrix of a Wach datum.
pub fn log_matrix<S: PadicField>(w: &WachModuleData<S>, profile: &PrecisionProfile) -> Result<LogMatrix<S>> {
    let d = w.dim();
    let dx = profile.dx;
    let dpi = profile.d;
    let e = embedding_matrix(w, dpi)?;
    let a_v = w.a_v();
    let z = phi_pi_power_preimages::<S>(dx, dpi);
    // M_il[n] = Σ_m (A_V E_m)_{li} z_m[n]
    let mut coeffs = vec![vec![vec![S::zero(); dx + 1]; d]; d];
    let mut e_floor = INF;
    for (m, zm) in z.iter().enumerate() {
        let ae = &a_v * &e.coeff_matrix(m);
        e_floor = e_floor.min(ae.min_valuation());
        for i in 0..d {
            for l in 0..d {
                let c = ae.get(l, i);
                for (n, zn) in zm.iter().enumerate() {
                    coeffs[i][l][n] = coeffs[i][l][n] + *c * *zn;
                }
            }
        }
    }
    // terms beyond the last computed m: z_m vanishes to the precision of the
    // last row, and A_V·E_m stays above the smallest valuation seen so far
    let cutoff = z
        .last()
        .map(|zm| zm.iter().map(|c| c.abs_prec()).min().unwrap_or(INF))
        .unwrap_or(INF);
    let tail_err = cutoff.saturating_add(e_floor.min(0));
    let slope = w.shift().max(*w.base.jumps.iter().max().unwrap_or(&0)).max(0);
    let p = S::PRIME;
    let entries: Vec<Vec<XSeries<S>>> = coeffs
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|cs| {
                    let cs: Vec<S> = cs.into_iter().map(|c| c.with_abs_prec(tail_err)).collect();
                    let env = fitted_envelope(&cs, slope, p);
                    XSeries::new(cs, Tail::Bounded(env))
                })
                .collect()
        })
        .collect();
    let m = XMatrix::from_rows(entries);

    // Mellin side: (1+π)·(A_V φ(E))^T
    let deg = mellin_side_degree(profile, p);
    let one_plus = PiSeries::<S>::from_i64s(&[1, 1]);
    let phi_e = e.map(|x| crate::mellin::phi(x, deg));
    let side = SeriesMatrix::constant(&a_v)
        .mul(&phi_e)
        .transpose()
        .map(|x| (&one_plus * x).truncate(deg));

    let m0_is_a_transpose = m.at_zero().agreement(&a_v.transpose()).is_some();
    let gamma1_component = side.entries.iter().flatten().all(|g| check_gamma1_component(g).is_ok());
    let mut roundtrip: Option<i64> = Some(INF);
    for i in 0..d {
        for j in 0..d {
            let back = crate::mellin::mellin(m.get(i, j), deg);
            let upto = deg.min(p as usize * dx / 2);
            roundtrip = match (roundtrip, back.agreement(side.get(i, j), upto)) {
                (Some(a), Some(b)) => Some(a.min(b)),
                _ => None,
            };
        }
    }
    let checks = LogMatrixChecks {
        m0_is_a_transpose,
        gamma1_component,
        roundtrip_precision: roundtrip,
    };
    if !checks.m0_is_a_transpose {
        return Err(Error::Consistency("M(0) differs from A^T".into()));
    }
    if !checks.gamma1_component {
        return Err(Error::NotInGamma1Component);
    }
    Ok(LogMatrix {
        p,
        label: w.kind.label(),
        m,
        mellin_side: side,
        a_v,
        weights: w.base.jumps.clone(),
        shift: w.shift(),
        profile: *profile,
        checks,
    })
}

impl<S: Scalar> LogMatrix<S> {
    /// Dimension.
    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    /// `M(u^s − 1)`, read off the Mellin side through `((1+π)d/dπ)^s`.
    pub fn value_at_chi_power(&self, s: u32) -> Result<Matrix<S>> {
        let rows = self
            .mellin_side
            .entries
            .iter()
            .map(|r| {
                r.iter()
                    .map(|g| eval_mellin_at_chi_power(g, s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_rows(rows))
    }

    /// Smallest absolute precision among the coefficients of `M`.
    pub fn precision(&self) -> i64 {
        self.m
            .entries
            .iter()
            .flatten()
            .map(|s| s.guaranteed_precision(s.high()))
            .min()
            .unwrap_or(INF)
    }

    /// JSON rendering.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "p": self.p,
            "data": self.label,
            "profile": self.profile.to_json(),
            "M": self.m.to_json(),
            "A": self.a_v.to_json(),
            "shift": self.shift,
            "weights": self.weights,
            "precision": self.precision(),
            "checks": {
                "M0_equals_A_transpose": self.checks.m0_is_a_transpose,
                "gamma1_component": self.checks.gamma1_component,
                "roundtrip_precision": self.checks.roundtrip_precision,
            },
        })
    }
}

/// Inverse of a series matrix with invertible constant term, through `deg`.
pub fn invert_series_matrix<S: Scalar>(m: &PiMatrix<S>, deg: usize) -> Result<PiMatrix<S>> {
    let det_inv = m.det().truncate(deg).invert(deg)?;
    Ok(m.adjugate().map(|x| (x * &det_inv).truncate(deg)))
}

/// The embedding matrix by iterating `E ↦ p^{−s}·Ã·φ(E)·q^s·P̃^{−1}` from
/// `E = 1`. The iteration contracts p-adically, so it runs until two
/// consecutive iterates agree or `max_iter` is reached.
pub fn embedding_matrix_telescoping<S: Scalar>(
    w: &WachModuleData<S>,
    deg: usize,
    max_iter: usize,
) -> Result<PiMatrix<S>> {
    let d = w.dim();
    let s = w.shift().max(0) as usize;
    let qs = q_power::<S>(s);
    let right = invert_series_matrix(&w.p_tilde, deg)?.map(|x| (&qs * x).truncate(deg).scale(&p_pow::<S>(-(s as i64))));
    let left = SeriesMatrix::constant(w.a_tilde());
    let mut e = SeriesMatrix::constant(&Matrix::<S>::identity(d)).map(|x| {
        let mut cs = vec![S::zero(); deg + 1];
        cs[0] = x.coeffs()[0].clone();
        PiSeries::new(cs, Tail::Unknown)
    });
    for _ in 0..max_iter {
        let next = left
            .mul(&e.map(|x| crate::mellin::phi(x, deg)))
            .mul(&right)
            .map(|x| x.truncate(deg));
        let stable = (0..d).all(|i| (0..d).all(|j| next.get(i, j).agreement(e.get(i, j), deg).is_some()));
        e = next;
        if stable {
            return Ok(e);
        }
    }
    Err(Error::PrecisionExhausted(format!(
        "telescoping product did not stabilise in {max_iter} steps"
    )))
}

/// `F = Ẽ^{−1}` for the unshifted datum, from `F·Ã = P̃·φ(F)` with
/// `F(0) = 1`, solved degree by degree through `p^n·Ã·F_n − F_n·Ã = R_n`.
pub fn inverse_embedding<S: Scalar>(w: &WachModuleData<S>, deg: usize) -> Result<PiMatrix<S>> {
    let d = w.dim();
    let a = w.a_tilde().clone();
    let phipow = phi_pi_powers::<S>(deg);
    let pt: Vec<Matrix<S>> = (0..=deg).map(|n| w.p_tilde.coeff_matrix(n)).collect();
    let mut f: Vec<Matrix<S>> = vec![Matrix::identity(d)];
    let mut phi_f: Vec<Matrix<S>> = vec![Matrix::identity(d)];
    for n in 1..=deg {
        let mut partial = Matrix::<S>::zeros(d, d);
        for (m, fm) in f.iter().enumerate() {
            let c = &phipow[m][n];
            if c.is_zero() && c.abs_prec() >= INF {
                continue;
            }
            partial = &partial + &fm.scale(c);
        }
        let mut rhs = &a * &partial;
        for c in 1..=n {
            if pt[c].min_valuation() >= INF {
                continue;
            }
            rhs = &rhs + &(&pt[c] * &phi_f[n - c]);
        }
        let fnn = sylvester(&a, n, &-&rhs)?;
        let phi_fn = &partial + &fnn.scale(&p_pow::<S>(n as i64));
        f.push(fnn);
        phi_f.push(phi_fn);
    }
    let slope = w.shift().max(0);
    let p = S::PRIME;
    let entries = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let cs: Vec<S> = (0..=deg).map(|n| f[n].get(i, j).clone()).collect();
                    PiSeries::new(cs.clone(), Tail::Bounded(fitted_envelope(&cs, slope, p)))
                })
                .collect()
        })
        .collect();
    Ok(PiMatrix::from_rows(entries))
}

/// The envelope `val − slope·⌊log_p(n+1)⌋` with the largest `val` that the
/// given coefficients satisfy. Used as a growth hypothesis for the unknown
/// tail of a series known to lie in `B⁺_rig` with order at most `slope`.
pub fn fitted_envelope<S: Scalar>(cs: &[S], slope: i64, p: u64) -> Envelope {
    let val = cs
        .iter()
        .enumerate()
        .map(|(n, c)| c.val_or_prec() + slope * crate::padic::ilog(n as u64 + 1, p) as i64)
        .min()
        .unwrap_or(0);
    Envelope { val, slope }
}

/// Outcome of the Hodge filtration recovery.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeReport {
    /// Recovered Hodge–Tate weights of `V`, sorted.
    pub weights: Vec<i64>,
    /// `dim{c : φ(c) ∈ q^j·Ñ}` for `j = 0..=s+1` (unshifted datum).
    pub dims: Vec<usize>,
    /// Smallest absolute precision among the remainders used.
    pub precision: i64,
}

/// Recovers the Hodge–Tate weights from `q`-divisibility: for the unshifted
/// datum, `c ∈ Q_p^d` lies in `Fil^j` when every coordinate of `F·Ã·c` is
/// divisible by `q^j`. A weight `w̃` of the unshifted datum is a weight
/// `s − w̃` of `V`.
pub fn hodge_filtration<S: Scalar>(w: &WachModuleData<S>, profile: &PrecisionProfile) -> Result<HodgeReport> {
    let d = w.dim();
    let s = w.shift().max(0);
    let p = S::PRIME as usize;
    let deg = profile.d;
    let jmax = (s + 1) as usize;
    if deg < (p - 1) * jmax {
        return Err(Error::Indeterminate(format!("π-degree {deg} cannot separate q^{jmax}")));
    }
    let f = inverse_embedding(w, deg)?;
    let fa = f.mul(&SeriesMatrix::constant(w.a_tilde()));
    let mut dims = vec![d];
    let mut precision = INF;
    for j in 1..=jmax {
        let g = q_power::<S>(j);
        let width = j * (p - 1);
        let mut rows = vec![vec![S::zero(); d]; d * width];
        for col in 0..d {
            for l in 0..d {
                let rem = fa.get(l, col).weierstrass_rem(g.coeffs())?;
                for (i, c) in rem.into_iter().enumerate() {
                    precision = precision.min(c.abs_prec());
                    rows[l * width + i][col] = c;
                }
            }
        }
        let rank = Matrix::from_rows(rows).rank();
        dims.push(d - rank);
    }
    if precision < 1 {
        return Err(Error::Indeterminate(format!(
            "q-remainders known only to precision {precision}"
        )));
    }
    if dims.windows(2).any(|x| x[1] > x[0]) || *dims.last().unwrap_or(&0) != 0 {
        return Err(Error::Indeterminate(format!(
            "filtration dimensions {dims:?} are not a flag"
        )));
    }
    let mut weights = Vec::with_capacity(d);
    for j in 0..jmax {
        for _ in 0..(dims[j] - dims[j + 1]) {
            weights.push(s - j as i64);
        }
    }
    weights.sort_unstable();
    Ok(HodgeReport {
        weights,
        dims,
        precision,
    })
}

/// Builds a Wach datum and runs the validation suite: `P̃(0) = Ã`, the
/// determinant budget, `N ⊆ φ*N`, a residual-free embedding solve, and
/// recovery of the declared weights.
pub fn build_wach<S: Scalar>(kind: WachKind, profile: &PrecisionProfile) -> Result<WachModuleData<S>> {
    let w = WachModuleData::assemble(kind)?;
    w.check_lift()?;
    w.check_det()?;
    w.check_stability()?;
    let deg = profile.dx.min(profile.d);
    let e = embedding_matrix(&w, deg)?;
    if let Some(v) = embedding_residual(&w, &e, deg) {
        return Err(Error::InvalidWachData(format!("embedding residual has valuation {v}")));
    }
    let h = hodge_filtration(&w, profile)?;
    if h.weights != w.base.jumps {
        return Err(Error::InvalidWachData(format!(
            "recovered weights {:?} differ from declared {:?}",
            h.weights, w.base.jumps
        )));
    }
    Ok(w)
}

/// Number of successive exact divisions of `f` by `X − x` (at most `max`).
pub fn vanishing_order<S: Scalar>(f: &XSeries<S>, x: &S, max: usize) -> Result<usize> {
    let mut g = f.clone();
    for k in 0..max {
        if g.eval(x)?.valuation().is_some() {
            return Ok(k);
        }
        g = g.div_linear(x)?;
    }
    Ok(max)
}

/// Vanishing data of `det M` at one point `u^i − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroCheck {
    pub i: u32,
    /// Vanishing order of `det M` found by successive division.
    pub observed: usize,
    /// Order predicted by `∏ 𝔫_{r_j}`.
    pub predicted: usize,
    /// Some entry of `M(u^i − 1)` is nonzero.
    pub some_entry_nonzero: bool,
}

/// Elementary-divisor report for a log-matrix.
#[derive(Clone, Debug)]
pub struct DivisorReport<S: Scalar> {
    /// One entry per `0 ≤ i < r_d`.
    pub zeros: Vec<ZeroCheck>,
    /// The constant term of `det M / ∏ 𝔫_{r_j}` is nonzero.
    pub quotient_constant_nonzero: bool,
    /// Growth heuristic on the quotient (allowance 1).
    pub quotient_growth: Outcome,
    /// `det M / ∏ 𝔫_{r_j}` as a formal series.
    pub quotient: XSeries<S>,
}

impl<S: Scalar> DivisorReport<S> {
    /// Combined outcome of the sub-checks.
    pub fn outcome(&self) -> Outcome {
        let zeros_ok = self
            .zeros
            .iter()
            .all(|z| z.observed == z.predicted && z.some_entry_nonzero);
        let base = if zeros_ok && self.quotient_constant_nonzero {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        base.and(self.quotient_growth)
    }

    /// `Ok` on a pass, a theorem violation otherwise.
    pub fn into_result(self) -> Result<Self> {
        match self.outcome() {
            Outcome::Pass => Ok(self),
            Outcome::Fail => Err(Error::TheoremViolation(format!(
                "elementary divisors: {}",
                self.summary()
            ))),
            Outcome::Indeterminate => Err(Error::Indeterminate(format!("elementary divisors: {}", self.summary()))),
        }
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        let z: Vec<String> = self
            .zeros
            .iter()
            .map(|z| {
                format!(
                    "i={}: order {} (predicted {}), entry nonzero {}",
                    z.i, z.observed, z.predicted, z.some_entry_nonzero
                )
            })
            .collect();
        format!(
            "[{}]; quotient constant nonzero {}; quotient growth {}",
            z.join(", "),
            self.quotient_constant_nonzero,
            self.quotient_growth.label()
        )
    }

    /// JSON rendering.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "outcome": self.outcome().label(),
            "zeros": self.zeros.iter().map(|z| json!({
                "i": z.i,
                "observed_order": z.observed,
                "predicted_order": z.predicted,
                "some_entry_nonzero": z.some_entry_nonzero,
            })).collect::<Vec<_>>(),
            "quotient_constant_nonzero": self.quotient_constant_nonzero,
            "quotient_growth": self.quotient_growth.label(),
        })
    }
}

/// `∏_j 𝔫_{r_j}` through X-degree `dx`.
pub fn frak_n_product<S: PadicField>(weights: &[i64], dx: usize) -> Result<XSeries<S>> {
    let mut acc = XSeries::<S>::one();
    for &r in weights {
        acc = (&acc * &frak_n::<S>(r.max(0) as usize, dx)?).truncate_keeping_tail(dx);
    }
    Ok(acc)
}

/// `𝔫_k(u^i − 1)` in closed form: `ℓ_m(u^i − 1) = i − m`, so
/// `δ_m(u^i − 1) = (i − m)/(u^i − u^m)` for `m ≠ i` and `1/(u^i·log u)` for
/// `m = i`.
pub fn frak_n_value<S: PadicField>(k: u32, i: u32) -> S {
    let p = S::PRIME as i64;
    let log_u = S::from_i64(1 + p).log_one_unit().expect("u is a 1-unit");
    let ui = u_power::<S>(i as i64);
    let mut acc = S::one();
    for m in 0..k {
        let factor = if m == i {
            (ui * log_u).inv().expect("u^i log u is nonzero")
        } else {
            S::from_i64(i as i64 - m as i64) / (ui - u_power::<S>(m as i64))
        };
        acc = acc * factor * log_u;
    }
    acc
}

/// Checks that `det M` and `∏ 𝔫_{r_j}` are associates: equal vanishing
/// orders at `u^i − 1` for `0 ≤ i < r_d`, a quotient with nonzero constant
/// term and bounded growth, and (for `d = 2`, `r_1 = 0`) a nonzero entry of
/// `M` at each tested point.
pub fn divisor_check<S: PadicField>(l: &LogMatrix<S>) -> Result<DivisorReport<S>> {
    let dx = l.profile.dx;
    let det = l.m.det().truncate_keeping_tail(dx);
    let prod = frak_n_product::<S>(&l.weights, dx)?;
    let r_max = l.weights.iter().copied().max().unwrap_or(0).max(0) as u32;
    let mut zeros = Vec::new();
    for i in 0..r_max {
        let x = u_power::<S>(i as i64) - S::one();
        let value: S = l
            .weights
            .iter()
            .map(|&r| frak_n_value::<S>(r.max(0) as u32, i))
            .fold(S::one(), |a, b| a * b);
        let predicted = if value.valuation().is_some() {
            0
        } else {
            vanishing_order(&prod, &x, 4)?
        };
        let observed = vanishing_order(&det, &x, 4)?;
        let value = l.value_at_chi_power(i)?;
        let some_entry_nonzero = (0..l.dim()).any(|a| (0..l.dim()).any(|b| value.get(a, b).valuation().is_some()));
        zeros.push(ZeroCheck {
            i,
            observed,
            predicted,
            some_entry_nonzero,
        });
    }
    let quotient = (&det * &prod.invert(dx)?).truncate(dx);
    let quotient_constant_nonzero = quotient.coeffs()[0].valuation().is_some();
    let quotient_growth = bounded_growth(&quotient, 1);
    Ok(DivisorReport {
        zeros,
        quotient_constant_nonzero,
        quotient_growth,
        quotient,
    })
}
