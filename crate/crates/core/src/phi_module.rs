//! Filtered φ-modules over `Q_p`: the crystalline data of a modular form at a
//! supersingular prime, rational functions of `φ`, the subspaces `V_{i,η}`,
//! and the linear relations they impose at characters `χ^j`.
//!
//! The module stores a matrix `A` (column `j` holds the coordinates of the
//! image of `ν_j`) together with a weight shift `s`: Frobenius on `Dcris(V)`
//! is `p^{−s}·A`, and on the twist `Dcris(V(−i))` it is `p^{i−s}·A`. For
//! modular data `A = [[0, −1], [p^{k−1}, a_p]]` and `s = k − 1`.

use serde_json::json;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::mellin::CharacterIndex;
use crate::scalar::Scalar;

/// Parameters of a modular form relevant at `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModularData {
    pub k: i64,
    pub ap: i64,
}

/// A filtered φ-module with a flag basis adapted to its filtration.
#[derive(Clone, Debug)]
pub struct FilteredPhiModule<S> {
    /// The prime.
    pub p: u64,
    /// Frobenius matrix up to the weight shift (columns are images).
    pub a: Matrix<S>,
    /// Weight shift `s`.
    pub shift: i64,
    /// Hodge–Tate weights `r_1 ≤ … ≤ r_d`.
    pub jumps: Vec<i64>,
    /// Flag basis: `Fil^{−i}` is spanned by the first `n_i` vectors.
    pub flag: Vec<Vec<S>>,
    /// Modular metadata when built from a form.
    pub modular: Option<ModularData>,
}

/// `p^e` as a scalar (negative exponents allowed).
pub fn p_pow<S: Scalar>(e: i64) -> S {
    S::from_i64(S::PRIME as i64).pow_i(e)
}

impl<S: Scalar> FilteredPhiModule<S> {
    /// The rank-two module attached to a weight-`k` form with Hecke
    /// eigenvalue `a_p` at a supersingular prime `p`.
    pub fn build_modular(k: i64, ap: i64) -> Result<Self> {
        let p = S::PRIME as i64;
        if k < 2 {
            return Err(Error::InvalidForm(format!("weight {k} is below 2")));
        }
        if ap % p != 0 {
            return Err(Error::OrdinaryUnsupported);
        }
        let bound = 4 * (p as i128).pow((k - 1) as u32);
        if (ap as i128) * (ap as i128) >= bound {
            return Err(Error::InvalidForm(format!(
                "a_p = {ap} violates the Weil bound for k = {k}, p = {p}"
            )));
        }
        Self::modular_formal(k, ap)
    }

    /// The same filtered φ-module without the Weil-bound test: only `k ≥ 2`
    /// and `p | a_p` are required. Such data need not come from a modular
    /// form but is still weakly admissible with weights `{0, k−1}`.
    pub fn modular_formal(k: i64, ap: i64) -> Result<Self> {
        let p = S::PRIME as i64;
        if k < 2 {
            return Err(Error::InvalidForm(format!("weight {k} is below 2")));
        }
        if ap % p != 0 {
            return Err(Error::OrdinaryUnsupported);
        }
        let a = Matrix::from_rows(vec![
            vec![S::zero(), -S::one()],
            vec![p_pow::<S>(k - 1), S::from_i64(ap)],
        ]);
        Ok(FilteredPhiModule {
            p: S::PRIME,
            a,
            shift: k - 1,
            jumps: vec![0, k - 1],
            flag: vec![vec![S::one(), S::zero()], vec![S::zero(), S::one()]],
            modular: Some(ModularData { k, ap }),
        })
    }

    /// A module from explicit data. Jumps are sorted; the flag must be a basis.
    pub fn custom(a: Matrix<S>, shift: i64, mut jumps: Vec<i64>, flag: Vec<Vec<S>>) -> Result<Self> {
        let d = a.rows();
        if a.cols() != d || jumps.len() != d || flag.len() != d || flag.iter().any(|v| v.len() != d) {
            return Err(Error::Domain("inconsistent dimensions in φ-module data".into()));
        }
        if a.det().valuation().is_none() {
            return Err(Error::Singular);
        }
        if Matrix::from_rows(flag.clone()).det().valuation().is_none() {
            return Err(Error::Domain("flag vectors are not a basis".into()));
        }
        jumps.sort_unstable();
        Ok(FilteredPhiModule {
            p: S::PRIME,
            a,
            shift,
            jumps,
            flag,
            modular: None,
        })
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// `n_i = dim Fil^{−i} = #{j : r_j ≤ i}`.
    pub fn n_i(&self, i: i64) -> usize {
        self.jumps.iter().filter(|&&r| r <= i).count()
    }

    /// Basis of `Fil^{−i}` as coordinate vectors.
    pub fn fil_basis(&self, i: i64) -> Vec<Vec<S>> {
        self.flag[..self.n_i(i)].to_vec()
    }

    /// Frobenius on `Dcris(V(−i))`: `p^{i−s}·A`.
    pub fn twisted_phi(&self, i: i64) -> Matrix<S> {
        self.a.scale(&p_pow::<S>(i - self.shift))
    }

    /// Checks `A² − a_p A + p^{k−1} = 0` for modular data.
    pub fn check_hecke_relation(&self) -> Result<()> {
        let Some(m) = self.modular else { return Ok(()) };
        let a2 = &self.a * &self.a;
        let lhs = &(&a2 - &self.a.scale(&S::from_i64(m.ap))) + &Matrix::identity(2).scale(&p_pow::<S>(m.k - 1));
        if lhs.agreement(&Matrix::zeros(2, 2)).is_none() {
            return Err(Error::Consistency("Hecke relation fails".into()));
        }
        Ok(())
    }

    /// The matrix of `(1 − φ)^{−1}(1 − p^{−1}φ^{−1})` on `Dcris(V(−i))`.
    pub fn one_minus_phi_ratio(&self, i: i64) -> Result<Matrix<S>> {
        one_minus_phi_ratio(&self.twisted_phi(i))
    }

    /// Basis of `V_{i,η}` (column coordinate vectors).
    pub fn v_subspace(&self, i: i64, eta: CharacterIndex) -> Result<Vec<Vec<S>>> {
        let fil = self.fil_basis(i);
        let m = if eta.matches(i) {
            self.one_minus_phi_ratio(i)?.inverse()?
        } else {
            self.a.clone()
        };
        Ok(fil.iter().map(|v| m.mul_vec(v)).collect())
    }

    /// The coefficients `(c_2, c_1) = (−a_p + p^{j+1} + p^{k−1−j}, p − 1)` of
    /// the relation `c_2·L_2 = c_1·L_1` at `χ^j`, checked against the line
    /// `V_{j,η}` with `η = χ_0^j` in the coordinates `(−L_2, L_1)`.
    pub fn derive_relation(&self, j: i64) -> Result<(S, S)> {
        let m = self
            .modular
            .ok_or_else(|| Error::Domain("relation needs modular data".into()))?;
        if j < 0 || j > m.k - 2 {
            return Err(Error::Domain(format!("j = {j} outside 0..={}", m.k - 2)));
        }
        let p = self.p as i64;
        let c2 = S::from_i64(-m.ap) + p_pow::<S>(j + 1) + p_pow::<S>(m.k - 1 - j);
        let c1 = S::from_i64(p - 1);
        let eta = CharacterIndex::new(j.rem_euclid(p - 1) as u64, self.p)?;
        let line = self.v_subspace(j, eta)?;
        let w = &line[0];
        let check = c2.clone() * w[0].clone() + c1.clone() * w[1].clone();
        if check.valuation().is_some() {
            return Err(Error::Consistency(format!(
                "relation at j = {j} disagrees with V_(j,η)"
            )));
        }
        Ok((c2, c1))
    }

    /// JSON rendering.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "p": self.p,
            "k": self.modular.map(|m| m.k),
            "ap": self.modular.map(|m| m.ap),
            "shift": self.shift,
            "A": self.a.to_json(),
            "jumps": self.jumps,
        })
    }
}

/// `(1 − φ)^{−1}(1 − p^{−1}φ^{−1})` for a matrix `φ`. In dimension two it
/// is the closed expression
/// `((1+a+pb)φ + a(1+a+pb) + b(p−1)) / (pb(1+a+b))` with `φ² + aφ + b = 0`;
/// in dimension one the same expression with `(a, b) = (−2c, c²)`.
/// Larger dimensions fall back to direct inversion.
pub fn one_minus_phi_ratio<S: Scalar>(phi: &Matrix<S>) -> Result<Matrix<S>> {
    let d = phi.rows();
    let p = S::from_i64(S::PRIME as i64);
    let (a, b) = match d {
        1 => {
            let c = phi.get(0, 0).clone();
            (-(c.clone() + c.clone()), c.clone() * c)
        }
        2 => (-(phi.get(0, 0).clone() + phi.get(1, 1).clone()), phi.det()),
        _ => {
            let id = Matrix::identity(d);
            let left = (&id - phi)
                .inverse()
                .map_err(|_| Error::EigenvalueInPZ("eigenvalue 1".into()))?;
            let phinv = phi.inverse()?;
            let right = &id - &phinv.scale(&p.inv().expect("p is nonzero"));
            return Ok(&left * &right);
        }
    };
    let s = S::one() + a.clone() + b.clone();
    if s.valuation().is_none() {
        return Err(Error::EigenvalueInPZ("φ has eigenvalue 1".into()));
    }
    if b.valuation().is_none() {
        return Err(Error::Singular);
    }
    let c = S::one() + a.clone() + p.clone() * b.clone();
    let den = p.clone() * b.clone() * s;
    let shift = (a * c.clone() + b * (p - S::one())) / den.clone();
    let lin = c / den;
    let id = Matrix::<S>::identity(d);
    Ok(&phi.scale(&lin) + &id.scale(&shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Exact3, One, Zero};

    type E = Exact3;

    #[test]
    fn modular_examples() {
        let m = FilteredPhiModule::<E>::build_modular(2, 0).unwrap();
        assert_eq!(m.a.transpose(), Matrix::from_i64s(&[&[0, 3], &[-1, 0]]));
        m.check_hecke_relation().unwrap();
        let m4 = FilteredPhiModule::<E>::build_modular(4, 3).unwrap();
        let ns: Vec<usize> = (0..6).map(|i| m4.n_i(i)).collect();
        assert_eq!(ns, vec![1, 1, 1, 2, 2, 2]);
        assert!(matches!(
            FilteredPhiModule::<E>::build_modular(2, 1),
            Err(Error::OrdinaryUnsupported)
        ));
        assert!(matches!(
            FilteredPhiModule::<E>::build_modular(2, 6),
            Err(Error::InvalidForm(_))
        ));
    }

    #[test]
    fn relation_example() {
        let m = FilteredPhiModule::<E>::build_modular(2, 0).unwrap();
        let (c2, c1) = m.derive_relation(0).unwrap();
        assert_eq!((c2, c1), (E::from_i64(6), E::from_i64(2)));
    }

    #[test]
    fn ratio_in_dimension_one() {
        let c = E::from_ratio(2, 5);
        let r = one_minus_phi_ratio(&Matrix::from_rows(vec![vec![c.clone()]])).unwrap();
        let expect = (E::one() - (E::from_i64(3) * c.clone()).inv().unwrap()) / (E::one() - c);
        assert_eq!(r.get(0, 0), &expect);
    }

    #[test]
    fn eigenvalue_one_is_rejected() {
        let a = Matrix::<E>::from_i64s(&[&[0, -1], &[3, 4]]);
        let m = FilteredPhiModule::custom(
            a,
            0,
            vec![0, 1],
            vec![vec![E::one(), E::zero()], vec![E::zero(), E::one()]],
        )
        .unwrap();
        assert!(matches!(m.one_minus_phi_ratio(0), Err(Error::EigenvalueInPZ(_))));
    }
}
