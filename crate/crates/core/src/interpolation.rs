//! Submodules of `Λ^d` cut out by interpolation conditions
//! `(F_1(x_i), …, F_d(x_i)) ∈ V_i`, with polynomial bases built by induction
//! on the number of conditions, membership tests, projection images and the
//! rank-two change of basis that removes coordinate-type conditions.
//!
//! Points `x_i` lie in the maximal ideal, so every `X − x_i` is a
//! distinguished polynomial: divisibility in `Λ` of a polynomial by it is
//! decided by evaluation, and all quotients stay polynomial.

use serde_json::json;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::series::XSeries;

/// Polynomials in `X` (series with an exactly known, vanishing tail).
pub type Poly<S> = XSeries<S>;

/// `X − x`.
pub fn x_minus<S: Scalar>(x: &S) -> Poly<S> {
    Poly::polynomial(vec![-x.clone(), S::one()])
}

/// One condition: the value at `x` must lie in the row span of `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Condition<S> {
    pub x: S,
    /// Row basis of `V` (possibly empty, meaning `V = 0`).
    pub v: Vec<Vec<S>>,
}

impl<S: Scalar> Condition<S> {
    /// `dim V`.
    pub fn dim(&self) -> usize {
        if self.v.is_empty() {
            0
        } else {
            Matrix::from_rows(self.v.clone()).rank()
        }
    }

    /// Whether a vector lies in `V`.
    pub fn contains(&self, w: &[S]) -> bool {
        if w.iter().all(|c| c.valuation().is_none()) {
            return true;
        }
        if self.v.is_empty() {
            return false;
        }
        let mut rows = self.v.clone();
        rows.push(w.to_vec());
        Matrix::from_rows(rows).rank() == self.dim()
    }

    /// JSON rendering.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "x": self.x.to_json(),
            "V": self.v.iter().map(|r| r.iter().map(|c| c.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// A module `S ⊆ Λ^d` with a polynomial basis (rows of `basis`).
#[derive(Clone, Debug)]
pub struct InterpolationModule<S: Scalar> {
    pub d: usize,
    pub conditions: Vec<Condition<S>>,
    /// Row `k` is the `k`-th basis element.
    pub basis: Vec<Vec<Poly<S>>>,
}

/// Completes the rows of `v` (assumed independent) to a basis of `S^d` by
/// adding standard vectors greedily; the added rows come last.
fn complete_basis<S: Scalar>(v: &[Vec<S>], d: usize) -> Vec<Vec<S>> {
    let mut rows: Vec<Vec<S>> = v.to_vec();
    for j in 0..d {
        if rows.len() == d {
            break;
        }
        let mut e = vec![S::zero(); d];
        e[j] = S::one();
        let mut trial = rows.clone();
        trial.push(e);
        if Matrix::from_rows(trial.clone()).rank() == trial.len() {
            rows = trial;
        }
    }
    rows
}

/// Independent rows spanning the same space as `v`.
fn independent_rows<S: Scalar>(v: &[Vec<S>]) -> Vec<Vec<S>> {
    let mut out: Vec<Vec<S>> = Vec::new();
    for r in v {
        let mut trial = out.clone();
        trial.push(r.clone());
        if Matrix::from_rows(trial.clone()).rank() == trial.len() {
            out = trial;
        }
    }
    out
}

/// Polynomial matrix product `a·b`.
fn poly_mat_mul<S: Scalar>(a: &[Vec<Poly<S>>], b: &[Vec<Poly<S>>]) -> Vec<Vec<Poly<S>>> {
    let n = b.len();
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| (0..n).fold(Poly::zero(), |acc, l| &acc + &(&row[l] * &b[l][j])))
                .collect()
        })
        .collect()
}

/// Determinant of a square polynomial matrix by cofactor expansion.
pub fn poly_det<S: Scalar>(m: &[Vec<Poly<S>>]) -> Poly<S> {
    match m.len() {
        0 => Poly::one(),
        1 => m[0][0].clone(),
        d => {
            let mut acc = Poly::zero();
            for j in 0..d {
                let minor: Vec<Vec<Poly<S>>> = (1..d)
                    .map(|r| (0..d).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
                    .collect();
                let term = &m[0][j] * &poly_det(&minor);
                acc = if j % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

/// Adjugate of a square polynomial matrix.
fn poly_adjugate<S: Scalar>(m: &[Vec<Poly<S>>]) -> Vec<Vec<Poly<S>>> {
    let d = m.len();
    if d == 1 {
        return vec![vec![Poly::one()]];
    }
    let mut out = vec![vec![Poly::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let minor: Vec<Vec<Poly<S>>> = (0..d)
                .filter(|&r| r != i)
                .map(|r| (0..d).filter(|&c| c != j).map(|c| m[r][c].clone()).collect())
                .collect();
            let c = poly_det(&minor);
            out[j][i] = if (i + j) % 2 == 0 { c } else { -&c };
        }
    }
    out
}

/// Evaluates a polynomial matrix at a point.
fn poly_mat_eval<S: Scalar>(m: &[Vec<Poly<S>>], x: &S) -> Result<Matrix<S>> {
    let rows = m
        .iter()
        .map(|r| r.iter().map(|f| f.eval(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Matrix::from_rows(rows))
}

/// Vanishing order of a polynomial at `x`, capped at `max`.
fn order_at<S: Scalar>(f: &Poly<S>, x: &S, max: usize) -> Result<usize> {
    let mut g = f.clone();
    for k in 0..max {
        if g.eval(x)?.valuation().is_some() {
            return Ok(k);
        }
        if g.coeffs().iter().all(|c| c.valuation().is_none()) {
            return Ok(max);
        }
        g = g.div_linear(x)?;
    }
    Ok(max)
}

/// Basis of the module cut out by one condition: the rows of `V` followed
/// by `(X − x)` times a completion of `V` to a basis.
fn base_case<S: Scalar>(d: usize, x: &S, v: &[Vec<S>]) -> Vec<Vec<Poly<S>>> {
    let v = independent_rows(v);
    let w = complete_basis(&v, d);
    let lin = x_minus(x);
    w.iter()
        .enumerate()
        .map(|(k, row)| {
            row.iter()
                .map(|c| {
                    let cst = Poly::constant(c.clone());
                    if k < v.len() {
                        cst
                    } else {
                        &lin * &cst
                    }
                })
                .collect()
        })
        .collect()
}

impl<S: Scalar> InterpolationModule<S> {
    /// Builds a basis by induction: the current basis `B` evaluated at the
    /// next point is invertible, the next condition is pulled back through
    /// `B(x_m)^{−1}`, and its base-case basis multiplies `B` on the left.
    pub fn build(d: usize, conditions: Vec<Condition<S>>) -> Result<Self> {
        for (i, c) in conditions.iter().enumerate() {
            if c.x.val_or_prec() < 1 {
                return Err(Error::Domain(format!("point {i} is not in the maximal ideal")));
            }
            if c.v.iter().any(|r| r.len() != d) {
                return Err(Error::Domain(format!("condition {i} has vectors of the wrong length")));
            }
            for (j, o) in conditions.iter().enumerate().take(i) {
                if (c.x.clone() - o.x.clone()).valuation().is_none() {
                    return Err(Error::DuplicatePoint(i.max(j)));
                }
            }
        }
        let mut basis: Vec<Vec<Poly<S>>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { Poly::one() } else { Poly::zero() })
                    .collect()
            })
            .collect();
        for c in &conditions {
            let at = poly_mat_eval(&basis, &c.x)?;
            let inv = at
                .inverse()
                .map_err(|_| Error::Consistency("basis is singular at a fresh point".into()))?;
            let pulled: Vec<Vec<S>> = c.v.iter().map(|r| inv.vec_mul(r)).collect();
            let step = base_case(d, &c.x, &pulled);
            basis = poly_mat_mul(&step, &basis);
        }
        Ok(InterpolationModule { d, conditions, basis })
    }

    /// `det` of the basis matrix.
    pub fn det(&self) -> Poly<S> {
        poly_det(&self.basis)
    }

    /// `∏ (X − x_i)^{codim V_i}`.
    pub fn expected_det(&self) -> Poly<S> {
        let mut acc = Poly::one();
        for c in &self.conditions {
            for _ in 0..(self.d - c.dim()) {
                acc = &acc * &x_minus(&c.x);
            }
        }
        acc
    }

    /// The unit `κ` with `det = κ·∏(X − x_i)^{codim V_i}`, or an error when
    /// the quotient is not a nonzero constant.
    pub fn det_unit(&self) -> Result<S> {
        let mut q = self.det();
        for c in &self.conditions {
            for _ in 0..(self.d - c.dim()) {
                q = q.div_linear(&c.x)?;
            }
        }
        let cs = q.coeffs();
        if cs.iter().skip(1).any(|c| c.valuation().is_some()) || cs[0].valuation().is_none() {
            return Err(Error::Consistency(
                "det(S) is not a unit multiple of the expected product".into(),
            ));
        }
        Ok(cs[0].clone())
    }

    /// Whether a tuple satisfies every condition (direct evaluation).
    pub fn satisfies(&self, f: &[Poly<S>]) -> Result<bool> {
        for c in &self.conditions {
            let w = f.iter().map(|g| g.eval(&c.x)).collect::<Result<Vec<_>>>()?;
            if !c.contains(&w) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Coefficients `c` with `c·B = f` when they exist in `Λ^d` (then they
    /// are polynomials), found through `f·adj(B)` and exact division by
    /// `det B`.
    pub fn solve(&self, f: &[Poly<S>]) -> Result<Option<Vec<Poly<S>>>> {
        let adj = poly_adjugate(&self.basis);
        let g: Vec<Poly<S>> = (0..self.d)
            .map(|j| (0..self.d).fold(Poly::zero(), |acc, l| &acc + &(&f[l] * &adj[l][j])))
            .collect();
        let kappa = self.det_unit()?;
        let kinv = kappa.inv().expect("unit is invertible");
        let mut out = Vec::with_capacity(self.d);
        for gj in g {
            let mut q = gj;
            for c in &self.conditions {
                let n = self.d - c.dim();
                if order_at(&q, &c.x, n)? < n {
                    return Ok(None);
                }
                for _ in 0..n {
                    q = q.div_linear(&c.x)?;
                }
            }
            out.push(q.scale(&kinv));
        }
        let back: Vec<Poly<S>> = (0..self.d)
            .map(|j| (0..self.d).fold(Poly::zero(), |acc, k| &acc + &(&out[k] * &self.basis[k][j])))
            .collect();
        let deg = back.iter().chain(f).map(|p| p.high()).max().unwrap_or(0);
        if back.iter().zip(f).any(|(a, b)| a.agreement(b, deg).is_none()) {
            return Err(Error::Consistency("basis solution does not reproduce the tuple".into()));
        }
        Ok(Some(out))
    }

    /// Membership through the basis.
    pub fn contains(&self, f: &[Poly<S>]) -> Result<bool> {
        Ok(self.solve(f)?.is_some())
    }

    /// `Λ`-combination of the basis rows.
    pub fn combine(&self, c: &[Poly<S>]) -> Vec<Poly<S>> {
        (0..self.d)
            .map(|j| (0..self.d).fold(Poly::zero(), |acc, k| &acc + &(&c[k] * &self.basis[k][j])))
            .collect()
    }

    /// Image of the projection to coordinate `coord`.
    pub fn projection_image(&self, coord: usize) -> Result<ProjectionImage<S>> {
        let j: Vec<usize> = self
            .conditions
            .iter()
            .enumerate()
            .filter(|(_, c)| c.v.iter().all(|r| r[coord].valuation().is_none()))
            .map(|(i, _)| i)
            .collect();
        let generator = j
            .iter()
            .fold(Poly::one(), |acc, &i| &acc * &x_minus(&self.conditions[i].x));
        // prescribed values at each point, then Lagrange interpolation
        let mut values: Vec<Vec<S>> = Vec::with_capacity(self.conditions.len());
        for (i, c) in self.conditions.iter().enumerate() {
            if j.contains(&i) {
                values.push(vec![S::zero(); self.d]);
                continue;
            }
            let v =
                c.v.iter()
                    .find(|r| r[coord].valuation().is_some())
                    .expect("condition not in J");
            let g = generator.eval(&c.x)?;
            let scale = g / v[coord].clone();
            values.push(v.iter().map(|a| a.clone() * scale.clone()).collect());
        }
        let xs: Vec<S> = self.conditions.iter().map(|c| c.x.clone()).collect();
        let mut witness: Vec<Poly<S>> = (0..self.d)
            .map(|k| lagrange(&xs, &values.iter().map(|v| v[k].clone()).collect::<Vec<_>>()))
            .collect();
        witness[coord] = generator.clone();
        if !self.satisfies(&witness)? {
            return Err(Error::Consistency("projection witness violates a condition".into()));
        }
        Ok(ProjectionImage {
            coord,
            j,
            generator,
            witness,
        })
    }

    /// JSON rendering.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "d": self.d,
            "conditions": self.conditions.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "basis": self.basis.iter().map(|r| r.iter().map(|f| f.to_json()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Lagrange interpolation through `(x_i, y_i)`.
pub fn lagrange<S: Scalar>(xs: &[S], ys: &[S]) -> Poly<S> {
    let mut acc = Poly::zero();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        let mut basis = Poly::constant(yi.clone());
        for (k, xk) in xs.iter().enumerate() {
            if k != i {
                let den = (xi.clone() - xk.clone()).inv().expect("points are distinct");
                basis = (&basis * &x_minus(xk)).scale(&den);
            }
        }
        acc = &acc + &basis;
    }
    acc
}

/// The image `∏_{i∈J}(X − x_i)·Λ` of a coordinate projection.
#[derive(Clone, Debug)]
pub struct ProjectionImage<S: Scalar> {
    pub coord: usize,
    /// Conditions whose `V_i` lies in the coordinate hyperplane.
    pub j: Vec<usize>,
    pub generator: Poly<S>,
    /// An element of `S` whose `coord`-entry is the generator.
    pub witness: Vec<Poly<S>>,
}

impl<S: Scalar> ProjectionImage<S> {
    /// JSON rendering.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "coord": self.coord,
            "J": self.j,
            "generator": self.generator.to_json(),
            "witness": self.witness.iter().map(|f| f.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// The rank-two change of basis `(F′, G′) = (F, G)·[[1, e_2], [e_1, 1]]`
/// with `e_1 = e_2 = p^m` for the least `m ≥ 1` avoiding `e_1 e_2 = 1`,
/// `e_1 = −r_i` and `e_2 = −r_i^{−1}`. Returns the matrix and the new ratios
/// `r′_i = (e_1 + r_i)/(e_2 r_i + 1)`.
pub fn change_basis<S: Scalar>(r_list: &[S]) -> Result<(Matrix<S>, Vec<S>)> {
    if r_list.iter().any(|r| r.valuation().is_none()) {
        return Err(Error::Domain("ratios must be nonzero".into()));
    }
    let p = S::from_i64(S::PRIME as i64);
    let mut e = S::one();
    for _ in 0..64 {
        e = e * p.clone();
        let bad = (e.clone() * e.clone() - S::one()).valuation().is_none()
            || r_list.iter().any(|r| {
                (e.clone() + r.clone()).valuation().is_none()
                    || (e.clone() * r.clone() + S::one()).valuation().is_none()
            });
        if bad {
            continue;
        }
        let a = Matrix::from_rows(vec![vec![S::one(), e.clone()], vec![e.clone(), S::one()]]);
        let rp = r_list
            .iter()
            .map(|r| (e.clone() + r.clone()) / (e.clone() * r.clone() + S::one()))
            .collect();
        return Ok((a, rp));
    }
    Err(Error::Consistency("no admissible e_1 = e_2 = p^m found".into()))
}

/// A random small integer scalar in `[−b, b]`.
fn small<S: Scalar, G: rand::Rng>(rng: &mut G, b: i64) -> S {
    S::from_i64(rng.gen_range(-b..=b))
}

/// Random polynomial of degree at most `deg` with small integer coefficients.
pub fn random_poly<S: Scalar, G: rand::Rng>(rng: &mut G, deg: usize) -> Poly<S> {
    Poly::polynomial((0..=deg).map(|_| small(rng, 9)).collect())
}

/// Random conditions: distinct points `p·k` and subspaces of random
/// dimension spanned by small integer vectors.
pub fn random_conditions<S: Scalar, G: rand::Rng>(rng: &mut G, d: usize, count: usize) -> Vec<Condition<S>> {
    let p = S::PRIME as i64;
    let mut ks: Vec<i64> = Vec::new();
    while ks.len() < count {
        let k = rng.gen_range(-20..=20);
        if !ks.contains(&k) {
            ks.push(k);
        }
    }
    ks.into_iter()
        .map(|k| {
            let dim = rng.gen_range(0..d);
            let v = independent_rows(
                &(0..dim)
                    .map(|_| (0..d).map(|_| small(rng, 5)).collect())
                    .collect::<Vec<Vec<S>>>(),
            );
            Condition {
                x: S::from_i64(p * k),
                v,
            }
        })
        .collect()
}
