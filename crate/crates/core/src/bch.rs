//! Truncated Baker–Campbell–Hausdorff group law.
//!
//! Group elements are Lie algebra vectors in exponential coordinates of the
//! first kind. Products and commutators are evaluated by substituting into
//! coefficient tables computed once in the free associative algebra.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::json;

use crate::algebra::{work_cap, GVec, GradedAlgebra};
use crate::error::{Error, Result};
use crate::free::Tensor;
use crate::scalar::{format_rational, qi, Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Beta,
    Gamma,
}

/// Coefficients of right-nested brackets `[x_{i₁},…,x_{i_p}]` (1-based
/// indices). Beta tables omit the linear terms `Σ x_n`; gamma tables omit
/// the leading bracket `[x₁,…,x_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub kind: TableKind,
    /// `N` for beta tables, `j` for gamma tables.
    pub arity: usize,
    pub k: usize,
    pub entries: BTreeMap<Vec<usize>, Rational>,
    terms: Vec<(Vec<usize>, Rational, f64)>,
}

impl CoeffTable {
    fn new(kind: TableKind, arity: usize, k: usize, entries: BTreeMap<Vec<usize>, Rational>) -> Self {
        let terms = entries
            .iter()
            .map(|(idx, c)| (idx.iter().map(|i| i - 1).collect(), c.clone(), Scalar::to_f64(c)))
            .collect();
        CoeffTable { kind, arity, k, entries, terms }
    }

    pub fn get(&self, idx: &[usize]) -> Rational {
        self.entries.get(idx).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<_> =
            self.entries.iter().map(|(idx, c)| json!({"idx": idx, "coeff": format_rational(c)})).collect();
        match self.kind {
            TableKind::Beta => json!({"kind": "beta", "N": self.arity, "k": self.k, "entries": entries}),
            TableKind::Gamma => json!({"kind": "gamma", "j": self.arity, "k": self.k, "entries": entries}),
        }
    }

    /// `Σ c·[x_{i₁},…,x_{i_p}]` over the table entries.
    pub fn substitute<S: Scalar>(&self, alg: &GradedAlgebra, xs: &[GVec<S>]) -> Result<GVec<S>> {
        for x in xs {
            alg.check(x)?;
        }
        if xs.len() != self.arity {
            return Err(Error::ArityOutOfRange { arity: xs.len(), step: self.arity });
        }
        let mut memo: HashMap<&[usize], GVec<S>> = HashMap::new();
        let mut out = alg.zero::<S>();
        for (idx, c, cf) in &self.terms {
            if idx.len() > alg.step() {
                continue;
            }
            let v = nested(alg, xs, idx, &mut memo);
            let c = if S::EXACT { S::from_q(c) } else { S::from_real(*cf) };
            out.add_scaled(&c, &v);
        }
        Ok(out)
    }
}

fn nested<'a, S: Scalar>(
    alg: &GradedAlgebra,
    xs: &[GVec<S>],
    idx: &'a [usize],
    memo: &mut HashMap<&'a [usize], GVec<S>>,
) -> GVec<S> {
    if idx.len() == 1 {
        return xs[idx[0]].clone();
    }
    if let Some(v) = memo.get(idx) {
        return v.clone();
    }
    let inner = nested(alg, xs, &idx[1..], memo);
    let v = if inner.is_zero() || xs[idx[0]].is_zero() {
        alg.zero()
    } else {
        alg.bracket_unchecked(&xs[idx[0]], &inner)
    };
    memo.insert(idx, v.clone());
    v
}

type Cache = Mutex<HashMap<(TableKind, usize, usize), Arc<CoeffTable>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn check_cap(letters: usize, k: usize) -> Result<()> {
    let cap = work_cap();
    let work = (letters as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if work > cap || letters > u16::MAX as usize {
        return Err(Error::CapExceeded { work, cap });
    }
    Ok(())
}

fn memoized(kind: TableKind, arity: usize, k: usize, build: impl FnOnce() -> CoeffTable) -> Arc<CoeffTable> {
    // the lock is held while building so each table is computed once
    let mut guard = cache().lock().unwrap_or_else(|e| e.into_inner());
    guard.entry((kind, arity, k)).or_insert_with(|| Arc::new(build())).clone()
}

/// Canonical coefficients of `log(e^{x₁}⋯e^{x_N})` beyond the linear part.
pub fn beta_table(n: usize, k: usize) -> Result<Arc<CoeffTable>> {
    if n == 0 || k == 0 {
        return Err(Error::EmptyProduct);
    }
    check_cap(n, k)?;
    Ok(memoized(TableKind::Beta, n, k, || {
        let mut g = Tensor::one();
        for i in 0..n {
            g = g.mul(&Tensor::letter(i as u16).exp(k), k);
        }
        let entries = to_entries(g.log(k).dsw_coefficients(), 2);
        CoeffTable::new(TableKind::Beta, n, k, entries)
    }))
}

/// Canonical coefficients of `log ψ_j(x₁,…,x_j) − [x₁,…,x_j]`.
pub fn gamma_table(j: usize, k: usize) -> Result<Arc<CoeffTable>> {
    if j < 2 || j > k {
        return Err(Error::ArityOutOfRange { arity: j, step: k });
    }
    check_cap(j, k)?;
    Ok(memoized(TableKind::Gamma, j, k, || {
        let mut h = Tensor::letter((j - 1) as u16).exp(k);
        for i in (0..j - 1).rev() {
            let x = Tensor::letter(i as u16);
            h = x
                .exp(k)
                .mul(&h, k)
                .mul(&x.scale(&qi(-1)).exp(k), k)
                .mul(&h.inverse(k), k);
        }
        let log = h.log(k);
        debug_assert!(log.terms.keys().all(|w| w.len() >= j));
        let entries = to_entries(log.dsw_coefficients(), j + 1);
        CoeffTable::new(TableKind::Gamma, j, k, entries)
    }))
}

fn to_entries(coeffs: BTreeMap<Vec<u16>, Rational>, min_len: usize) -> BTreeMap<Vec<usize>, Rational> {
    coeffs
        .into_iter()
        .filter(|(w, _)| w.len() >= min_len)
        .map(|(w, c)| (w.iter().map(|&l| l as usize + 1).collect(), c))
        .collect()
}

/// `(β̃, γ̃)`: the largest `|β|` over brackets of length `2..=k` for
/// `N = d₁^j` factors, and `max(1, max_m Σ_{|idx| = m} |γ|)`.
pub fn max_coeff_constants(d1: usize, j: usize, k: usize) -> Result<(Rational, Rational)> {
    let n = (d1 as u128).checked_pow(j as u32).filter(|&n| n <= usize::MAX as u128).ok_or(Error::CapExceeded {
        work: u128::MAX,
        cap: work_cap(),
    })? as usize;
    let beta = beta_table(n, k)?;
    let beta_max = beta.entries.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero);
    let mut gamma_max = qi(1);
    if j >= 2 && j <= k {
        let gamma = gamma_table(j, k)?;
        let mut per_len: BTreeMap<usize, Rational> = BTreeMap::new();
        for (idx, c) in &gamma.entries {
            *per_len.entry(idx.len()).or_insert_with(Rational::zero) += c.abs();
        }
        if let Some(m) = per_len.into_values().max() {
            gamma_max = gamma_max.max(m);
        }
    }
    Ok((beta_max, gamma_max))
}

pub fn bch_product<S: Scalar>(alg: &GradedAlgebra, x: &GVec<S>, y: &GVec<S>) -> Result<GVec<S>> {
    alg.check(x)?;
    alg.check(y)?;
    if x.is_zero() {
        return Ok(y.clone());
    }
    if y.is_zero() {
        return Ok(x.clone());
    }
    let mut out = x.add(y);
    if alg.step() >= 2 {
        let table = beta_table(2, alg.step())?;
        out = out.add(&table.substitute(alg, &[x.clone(), y.clone()])?);
    }
    Ok(out)
}

/// Left fold of [`bch_product`].
pub fn product_fold<S: Scalar>(alg: &GradedAlgebra, xs: &[GVec<S>]) -> Result<GVec<S>> {
    let (first, rest) = xs.split_first().ok_or(Error::EmptyProduct)?;
    alg.check(first)?;
    rest.iter().try_fold(first.clone(), |acc, x| bch_product(alg, &acc, x))
}

pub fn group_inverse<S: Scalar>(x: &GVec<S>) -> GVec<S> {
    x.neg()
}

/// `[x,y]_c = x·y·x⁻¹·y⁻¹`.
pub fn group_commutator<S: Scalar>(alg: &GradedAlgebra, x: &GVec<S>, y: &GVec<S>) -> Result<GVec<S>> {
    product_fold(alg, &[x.clone(), y.clone(), x.neg(), y.neg()])
}

/// `ψ_n(x₁,…,x_n) = [x₁, ψ_{n−1}(x₂,…,x_n)]_c`.
pub fn iterated_group_commutator<S: Scalar>(alg: &GradedAlgebra, xs: &[GVec<S>]) -> Result<GVec<S>> {
    if xs.len() < 2 {
        return Err(Error::ArityTooSmall(xs.len()));
    }
    for x in xs {
        alg.check(x)?;
    }
    let mut acc = xs[xs.len() - 1].clone();
    for x in xs[..xs.len() - 1].iter().rev() {
        acc = group_commutator(alg, x, &acc)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{builtin_family, Family};
    use crate::scalar::q;

    #[test]
    fn beta_two_factor_values() {
        let t = beta_table(2, 2).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(&[1, 2]), q(1, 2));
        let t = beta_table(2, 3).unwrap();
        assert_eq!(t.get(&[1, 1, 2]), q(1, 12));
        assert_eq!(t.get(&[2, 1, 2]), q(-1, 12));
        assert!(beta_table(1, 5).unwrap().is_empty());
    }

    #[test]
    fn gamma_edge_cases() {
        assert!(gamma_table(2, 2).unwrap().is_empty());
        assert!(gamma_table(3, 3).unwrap().is_empty());
        assert!(!gamma_table(2, 3).unwrap().is_empty());
        assert_eq!(gamma_table(1, 3).unwrap_err(), Error::ArityOutOfRange { arity: 1, step: 3 });
        assert_eq!(gamma_table(4, 3).unwrap_err(), Error::ArityOutOfRange { arity: 4, step: 3 });
    }

    #[test]
    fn two_step_constants() {
        let (b, g) = max_coeff_constants(2, 2, 2).unwrap();
        assert_eq!((b, g), (q(1, 2), qi(1)));
        let (b, g) = max_coeff_constants(2, 3, 3).unwrap();
        assert!(b > qi(0));
        assert_eq!(g, qi(1));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(beta_table(100, 3), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn heisenberg_product() {
        let h = builtin_family(&Family::Heisenberg(1)).unwrap();
        let p = bch_product::<Rational>(&h, &h.x(1), &h.x(2)).unwrap();
        assert_eq!(p, GVec(vec![qi(1), qi(1), q(1, 2)]));
        let c = product_fold::<Rational>(&h, &[h.x(1), h.x(2), h.x::<Rational>(1).neg(), h.x::<Rational>(2).neg()]).unwrap();
        assert_eq!(c, h.x(3));
        assert_eq!(group_commutator::<Rational>(&h, &h.x(1), &h.x(2)).unwrap(), h.x(3));
    }

    #[test]
    fn engel_commutator() {
        let e = builtin_family(&Family::Engel).unwrap();
        let v = iterated_group_commutator::<Rational>(&e, &[e.x(1), e.x(1), e.x(2)]).unwrap();
        assert_eq!(v, e.x(4));
        assert_eq!(iterated_group_commutator::<Rational>(&e, &[e.x(1)]), Err(Error::ArityTooSmall(1)));
    }

    #[test]
    fn gamma_substitution_matches_fold() {
        let f = builtin_family(&Family::FreeNilpotent { d: 2, k: 3 }).unwrap();
        let xs: Vec<GVec> = vec![
            GVec(vec![q(1, 2), q(-2, 3), qi(0), qi(0), qi(0)]),
            GVec(vec![q(3, 5), qi(1), qi(0), qi(0), qi(0)]),
        ];
        let direct = iterated_group_commutator(&f, &xs).unwrap();
        let table = gamma_table(2, 3).unwrap();
        let via = f.iterated_bracket(&xs).unwrap().add(&table.substitute(&f, &xs).unwrap());
        assert_eq!(direct, via);
    }

    #[test]
    fn json_export_shape() {
        let v = beta_table(2, 3).unwrap().to_json();
        assert_eq!(v["kind"], "beta");
        assert_eq!(v["N"], 2);
        assert!(v["entries"].as_array().unwrap().iter().any(|e| e["idx"] == json!([1, 1, 2]) && e["coeff"] == "1/12"));
    }
}
