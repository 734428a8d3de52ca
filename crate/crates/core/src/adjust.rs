//! Decomposition of layer vectors into brackets of horizontal vectors.
//!
//! A target `Z_j ∈ V_j` is written as `Σ_n [X_{n1},…,X_{nj}]` by taking the
//! shortest preimage `u` of `Z_j` in `V₁^{⊗j}` and splitting every
//! coefficient `α` of an elementary tensor evenly across its `j` factors.
//! A full vector is handled layer by layer, each layer correcting the error
//! left in it by the group product of the previous ones.

use std::collections::BTreeMap;
use std::ops::Add;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::algebra::{GVec, GradedAlgebra, MultiIndex};
use crate::bch::{bch_product, iterated_group_commutator};
use crate::error::{Error, Result};
use crate::popp::PoppMetric;
use crate::scalar::{format_f64, format_rational, Rational, Scalar};

/// A nonnegative length, kept exact whenever every summand was.
#[derive(Debug, Clone, PartialEq)]
pub struct Length {
    pub value: f64,
    pub exact: Option<Rational>,
}

impl Length {
    pub fn zero() -> Self {
        Length { value: 0.0, exact: Some(Rational::zero()) }
    }

    /// `√q` for a nonnegative rational `q`.
    pub fn sqrt_of(q: &Rational) -> Self {
        let exact = q.sqrt_exact();
        let value = match &exact {
            Some(r) => r.to_f64(),
            None => q.to_f64().max(0.0).sqrt(),
        };
        Length { value, exact }
    }

    pub fn scale(&self, t: &Rational) -> Self {
        Length { value: self.value * t.abs().to_f64(), exact: self.exact.as_ref().map(|e| e * t.abs()) }
    }

    pub fn report(&self) -> LengthReport {
        LengthReport { value: format_f64(self.value), exact: self.exact.as_ref().map(format_rational) }
    }
}

impl Add for Length {
    type Output = Length;

    fn add(self, other: Length) -> Length {
        let exact = match (self.exact, other.exact) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Length { value: self.value + other.value, exact }
    }
}

impl std::iter::Sum for Length {
    fn sum<I: Iterator<Item = Length>>(iter: I) -> Length {
        iter.fold(Length::zero(), Add::add)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthReport {
    pub value: String,
    pub exact: Option<String>,
}

/// `‖P₁x‖₁²`; layer 1 carries the standard scalar product.
pub fn horizontal_norm_sq(alg: &GradedAlgebra, x: &GVec<Rational>) -> Rational {
    x.0[..alg.d1()].iter().fold(Rational::zero(), |acc, c| acc + c * c)
}

pub fn horizontal_norm(alg: &GradedAlgebra, x: &GVec<Rational>) -> Length {
    Length::sqrt_of(&horizontal_norm_sq(alg, x))
}

/// Rows `(X_{n1},…,X_{nj})` of horizontal vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalSet {
    pub layer: usize,
    pub rows: Vec<Vec<GVec<Rational>>>,
}

impl HorizontalSet {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn live_rows(&self) -> impl Iterator<Item = &Vec<GVec<Rational>>> {
        self.rows.iter().filter(|r| r.iter().all(|x| !x.is_zero()))
    }

    /// `y = ∏_n [X_{n1},…,X_{nj}]_c`.
    pub fn y(&self, alg: &GradedAlgebra) -> Result<GVec<Rational>> {
        let mut acc = alg.zero();
        for row in self.live_rows() {
            let c = if row.len() == 1 { row[0].clone() } else { iterated_group_commutator(alg, row)? };
            acc = bch_product(alg, &acc, &c)?;
        }
        Ok(acc)
    }

    /// `Y = Σ_n [X_{n1},…,X_{nj}]`.
    pub fn big_y(&self, alg: &GradedAlgebra) -> Result<GVec<Rational>> {
        let mut acc = alg.zero();
        for row in self.live_rows() {
            acc = acc.add(&alg.iterated_bracket(row)?);
        }
        Ok(acc)
    }

    /// `Σ_{n,i} ‖X_{ni}‖₁`.
    pub fn d_com(&self, alg: &GradedAlgebra) -> Length {
        self.rows.iter().flatten().map(|x| horizontal_norm(alg, x)).sum()
    }

    /// `ν² = Σ_n ∏_i ‖X_{ni}‖₁²`, exact.
    pub fn nu_sq(&self, alg: &GradedAlgebra) -> Rational {
        self.rows
            .iter()
            .map(|row| row.iter().fold(Rational::one(), |acc, x| acc * horizontal_norm_sq(alg, x)))
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn nu(&self, alg: &GradedAlgebra) -> Length {
        Length::sqrt_of(&self.nu_sq(alg))
    }

    /// Largest relative spread of factor norms within a row.
    pub fn balance_defect(&self, alg: &GradedAlgebra) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.rows {
            let norms: Vec<f64> = row.iter().map(|x| horizontal_norm(alg, x).value).collect();
            let hi = norms.iter().cloned().fold(0.0, f64::max);
            let lo = norms.iter().cloned().fold(f64::INFINITY, f64::min);
            if hi > 0.0 {
                worst = worst.max((hi - lo) / hi);
            }
        }
        worst
    }

    /// `A_l = P_l(y)` for `l = j+1…k`.
    pub fn error_vectors(&self, alg: &GradedAlgebra) -> Result<BTreeMap<usize, Vec<Rational>>> {
        let y = self.y(alg)?;
        ((self.layer + 1)..=alg.step()).map(|l| Ok((l, alg.project_layer(&y, l)?))).collect()
    }

    /// `{t X_{ni}}`, adjusted to `t^j Z_j` whenever `self` is adjusted to `Z_j`.
    pub fn rescaled(&self, t: &Rational) -> Self {
        HorizontalSet { layer: self.layer, rows: self.rows.iter().map(|r| r.iter().map(|x| x.scale(t)).collect()).collect() }
    }

    pub fn report(&self, alg: &GradedAlgebra) -> serde_json::Value {
        let rows: Vec<Vec<Vec<String>>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.0[..alg.d1()].iter().map(format_rational).collect()).collect())
            .collect();
        serde_json::json!({
            "layer": self.layer,
            "rows": rows,
            "d_com": self.d_com(alg).report(),
            "nu": self.nu(alg).report(),
        })
    }
}

/// Verified conditions of a set adjusted to `Z_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustmentCheck {
    pub sum_exact: bool,
    pub nu: f64,
    pub target_norm: f64,
    pub norm_rel_error: f64,
    pub balance_rel_error: f64,
}

impl AdjustmentCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.sum_exact && self.norm_rel_error <= tol && self.balance_rel_error <= tol
    }
}

pub fn check_adjusted(
    alg: &GradedAlgebra,
    popp: &PoppMetric,
    set: &HorizontalSet,
    target: &[Rational],
) -> Result<AdjustmentCheck> {
    let j = set.layer;
    let z = alg.inject(j, target)?;
    let sum_exact = set.big_y(alg)? == z;
    let nu = set.nu(alg).value;
    let target_norm = popp.layer_norm(j, target)?;
    let norm_rel_error = if target_norm == 0.0 { nu } else { (nu - target_norm).abs() / target_norm };
    Ok(AdjustmentCheck { sum_exact, nu, target_norm, norm_rel_error, balance_rel_error: set.balance_defect(alg) })
}

/// Split `α` into `j` factors of (nearly) equal magnitude whose product is
/// exactly `α`: the sign goes on the first factor, the last one absorbs
/// the rounding of the root.
fn balanced_factors(alpha: &Rational, j: usize) -> Vec<Rational> {
    if j == 1 {
        return vec![alpha.clone()];
    }
    let r = alpha.abs().root_approx(j as u32);
    let mut out = Vec::with_capacity(j);
    let first = if alpha.is_negative() { -r.clone() } else { r.clone() };
    let mut prod = first.clone();
    out.push(first);
    for _ in 1..j - 1 {
        out.push(r.clone());
        prod *= &r;
    }
    out.push(alpha / prod);
    out
}

/// Set adjusted to the layer-`j` vector `z`; `N = d₁^j` rows, zero rows
/// included. For `j = 1` the rows are `{Z₁, 0, …, 0}` with `N = d₁`.
pub fn adjust_to_layer_vector(
    alg: &GradedAlgebra,
    popp: &PoppMetric,
    j: usize,
    z: &[Rational],
) -> Result<HorizontalSet> {
    alg.layer_range(j)?;
    if z.len() != alg.dims()[j - 1] {
        return Err(Error::AlgebraMismatch { expected: alg.dims()[j - 1], got: z.len() });
    }
    let d1 = alg.d1();
    if j == 1 {
        let mut rows = vec![vec![alg.inject(1, z)?]];
        rows.extend((1..d1).map(|_| vec![alg.zero()]));
        return Ok(HorizontalSet { layer: 1, rows });
    }
    let u = popp.minimal_preimage(j, z)?;
    let rows = MultiIndex::new(d1, j)
        .zip(&u)
        .map(|(idx, alpha)| {
            if alpha.is_zero() {
                return vec![alg.zero(); j];
            }
            balanced_factors(alpha, j)
                .into_iter()
                .zip(&idx)
                .map(|(c, &s)| {
                    let mut x = alg.zero::<Rational>();
                    x.0[s] = c;
                    x
                })
                .collect()
        })
        .collect();
    let set = HorizontalSet { layer: j, rows };
    let nu = set.nu(alg).value;
    let target = popp.layer_norm(j, z)?;
    if (nu - target).abs() > 1e-9 * target.max(f64::MIN_POSITIVE) {
        return Err(Error::Certificate(format!("norm condition fails at layer {j}: nu = {nu}, |Z| = {target}")));
    }
    Ok(set)
}

/// Sets `S⁽¹⁾…S⁽ᵏ⁾` whose `y`-product reconstructs a target `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedTuple {
    pub target: GVec<Rational>,
    pub sets: Vec<HorizontalSet>,
    /// `∏_{m≤j} y(S⁽ᵐ⁾)` for `j = 1…k`.
    pub prefixes: Vec<GVec<Rational>>,
}

impl AdjustedTuple {
    pub fn step(&self) -> usize {
        self.sets.len()
    }

    /// `B_l^(j) = P_l(∏_{m≤j} y(S⁽ᵐ⁾))` for `j < l`.
    pub fn error_vector(&self, alg: &GradedAlgebra, l: usize, j: usize) -> Result<Vec<Rational>> {
        if j == 0 || j >= l || l > self.step() {
            return Err(Error::LayerOutOfRange { layer: l, step: self.step() });
        }
        alg.project_layer(&self.prefixes[j - 1], l)
    }

    /// `d_com^(k) = Σ_j d_com(S⁽ʲ⁾)`.
    pub fn d_com_k(&self, alg: &GradedAlgebra) -> Length {
        self.sets.iter().map(|s| s.d_com(alg)).sum()
    }

    /// Endpoint of the full product, which equals the target.
    pub fn product(&self) -> &GVec<Rational> {
        self.prefixes.last().expect("at least one layer")
    }
}

pub fn adjust_tuple(alg: &GradedAlgebra, popp: &PoppMetric, z: &GVec<Rational>) -> Result<AdjustedTuple> {
    alg.check(z)?;
    let mut prefix = alg.zero::<Rational>();
    let mut sets = Vec::with_capacity(alg.step());
    let mut prefixes = Vec::with_capacity(alg.step());
    for j in 1..=alg.step() {
        let want = alg.project_layer(z, j)?;
        let have = alg.project_layer(&prefix, j)?;
        let residual: Vec<Rational> = want.iter().zip(&have).map(|(a, b)| a - b).collect();
        let set = adjust_to_layer_vector(alg, popp, j, &residual)?;
        prefix = bch_product(alg, &prefix, &set.y(alg)?)?;
        for l in 1..=j {
            if alg.project_layer(&prefix, l)? != alg.project_layer(z, l)? {
                return Err(Error::Certificate(format!("prefix product disagrees with the target in layer {l}")));
            }
        }
        sets.push(set);
        prefixes.push(prefix.clone());
    }
    Ok(AdjustedTuple { target: z.clone(), sets, prefixes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{builtin_family, Family};
    use crate::popp::build_popp;
    use crate::scalar::{q, qi};

    #[test]
    fn balanced_factors_multiply_exactly() {
        for (a, j) in [(q(1, 2), 3), (q(-7, 3), 2), (qi(8), 3), (q(-1, 5), 4)] {
            let f = balanced_factors(&a, j);
            assert_eq!(f.iter().fold(qi(1), |acc, x| acc * x), a);
            let m: Vec<f64> = f.iter().map(|x| x.abs().to_f64()).collect();
            assert!(m.iter().all(|x| (x - m[0]).abs() < 1e-14 * m[0]));
        }
        assert_eq!(balanced_factors(&qi(8), 3), vec![qi(2), qi(2), qi(2)]);
    }

    #[test]
    fn heisenberg_center() {
        let h = builtin_family(&Family::Heisenberg(1)).unwrap();
        let p = build_popp(&h).unwrap();
        let s = adjust_to_layer_vector(&h, &p, 2, &[qi(2)]).unwrap();
        assert_eq!(s.n_rows(), 4);
        assert_eq!(s.rows[1], vec![h.x(1), h.x(2)]);
        assert_eq!(s.rows[2], vec![h.x::<Rational>(2).neg(), h.x(1)]);
        assert!(s.rows[0].iter().all(GVec::is_zero));
        assert_eq!(s.y(&h).unwrap(), h.x::<Rational>(3).scale(&qi(2)));
        let chk = check_adjusted(&h, &p, &s, &[qi(2)]).unwrap();
        assert!(chk.holds(1e-12), "{chk:?}");
        assert_eq!(s.d_com(&h).exact, Some(qi(4)));
    }

    #[test]
    fn unit_center_dcom() {
        let h = builtin_family(&Family::Heisenberg(1)).unwrap();
        let p = build_popp(&h).unwrap();
        let s = adjust_to_layer_vector(&h, &p, 2, &[qi(1)]).unwrap();
        assert!((s.d_com(&h).value - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        let t = adjust_tuple(&h, &p, &h.x(3)).unwrap();
        assert_eq!(t.product(), &h.x(3));
        assert!((t.d_com_k(&h).value - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_targets() {
        let e = builtin_family(&Family::Engel).unwrap();
        let p = build_popp(&e).unwrap();
        let s = adjust_to_layer_vector(&e, &p, 3, &[qi(0)]).unwrap();
        assert_eq!(s.d_com(&e), Length::zero());
        let t = adjust_tuple(&e, &p, &e.zero()).unwrap();
        assert!(t.prefixes.iter().all(GVec::is_zero));
    }

    #[test]
    fn engel_top_layer() {
        let e = builtin_family(&Family::Engel).unwrap();
        let p = build_popp(&e).unwrap();
        let s = adjust_to_layer_vector(&e, &p, 3, &[qi(1)]).unwrap();
        assert_eq!(s.n_rows(), 8);
        assert_eq!(s.big_y(&e).unwrap(), e.x(4));
        let chk = check_adjusted(&e, &p, &s, &[qi(1)]).unwrap();
        assert!(chk.holds(1e-12), "{chk:?}");
        let norm = horizontal_norm(&e, &s.rows[1][0]).value;
        assert!((norm - 0.5f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let t = adjust_tuple(&e, &p, &e.x(4)).unwrap();
        assert_eq!(t.product(), &e.x(4));
        assert!(t.sets[0].d_com(&e).value == 0.0 && t.sets[1].d_com(&e).value == 0.0);
    }

    #[test]
    fn layer_one_set() {
        let e = builtin_family(&Family::Engel).unwrap();
        let p = build_popp(&e).unwrap();
        let s = adjust_to_layer_vector(&e, &p, 1, &[qi(3), qi(4)]).unwrap();
        assert_eq!(s.y(&e).unwrap(), s.big_y(&e).unwrap());
        assert_eq!(s.d_com(&e).exact, Some(qi(5)));
        assert!(s.error_vectors(&e).unwrap().values().all(|v| v.iter().all(Zero::is_zero)));
    }

    #[test]
    fn engel_tuple_prefixes() {
        let e = builtin_family(&Family::Engel).unwrap();
        let p = build_popp(&e).unwrap();
        let z = GVec(vec![q(1, 3), q(-1, 2), q(2, 7), q(5, 11)]);
        let t = adjust_tuple(&e, &p, &z).unwrap();
        assert_eq!(t.product(), &z);
        let b32 = t.error_vector(&e, 3, 2).unwrap();
        let b31 = t.error_vector(&e, 3, 1).unwrap();
        assert_eq!(b31, vec![qi(0)]);
        assert_eq!(b32.len(), 1);
        assert!(t.error_vector(&e, 2, 2).is_err());
    }
}
