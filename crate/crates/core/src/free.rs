//! Truncated free associative algebra over the rationals.
//!
//! Elements are finite sums of words in letters `0..n`; every product drops
//! words longer than the truncation degree. Lie polynomials live inside this
//! algebra as combinations of commutators, which is how the BCH tables and
//! the Hall basis of the free nilpotent algebras are computed.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::scalar::{qi, Rational};

pub type Word = Vec<u16>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tensor {
    pub terms: BTreeMap<Word, Rational>,
}

impl Tensor {
    pub fn zero() -> Self {
        Tensor::default()
    }

    pub fn one() -> Self {
        Tensor::word(Vec::new())
    }

    pub fn letter(i: u16) -> Self {
        Tensor::word(vec![i])
    }

    pub fn word(w: Word) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(w, Rational::one());
        Tensor { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &[u16]) -> Rational {
        self.terms.get(w).cloned().unwrap_or_else(Rational::zero)
    }

    fn push(&mut self, w: Word, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &Tensor) {
        if c.is_zero() {
            return;
        }
        for (w, x) in &other.terms {
            self.push(w.clone(), c * x);
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.add_scaled(&Rational::one(), other);
        out
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.add_scaled(&-Rational::one(), other);
        out
    }

    pub fn scale(&self, c: &Rational) -> Tensor {
        let mut out = Tensor::zero();
        out.add_scaled(c, self);
        out
    }

    /// Product truncated at word length `k`.
    pub fn mul(&self, other: &Tensor, k: usize) -> Tensor {
        let mut acc: BTreeMap<Word, Rational> = BTreeMap::new();
        for (u, a) in &self.terms {
            if u.len() > k {
                continue;
            }
            for (v, b) in &other.terms {
                if u.len() + v.len() > k {
                    continue;
                }
                let mut w = Vec::with_capacity(u.len() + v.len());
                w.extend_from_slice(u);
                w.extend_from_slice(v);
                *acc.entry(w).or_insert_with(Rational::zero) += a * b;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Tensor { terms: acc }
    }

    pub fn commutator(&self, other: &Tensor, k: usize) -> Tensor {
        self.mul(other, k).sub(&other.mul(self, k))
    }

    pub fn truncate(&self, k: usize) -> Tensor {
        Tensor { terms: self.terms.iter().filter(|(w, _)| w.len() <= k).map(|(w, c)| (w.clone(), c.clone())).collect() }
    }

    pub fn homogeneous(&self, degree: usize) -> Tensor {
        Tensor {
            terms: self.terms.iter().filter(|(w, _)| w.len() == degree).map(|(w, c)| (w.clone(), c.clone())).collect(),
        }
    }

    fn without_constant(&self) -> Tensor {
        Tensor { terms: self.terms.iter().filter(|(w, _)| !w.is_empty()).map(|(w, c)| (w.clone(), c.clone())).collect() }
    }

    /// `exp(x)` for `x` without constant term.
    pub fn exp(&self, k: usize) -> Tensor {
        debug_assert!(self.coeff(&[]).is_zero());
        let mut out = Tensor::one();
        let mut power = Tensor::one();
        for m in 1..=k {
            power = power.mul(self, k).scale(&Rational::new(1.into(), (m as i64).into()));
            if power.is_zero() {
                break;
            }
            out = out.add(&power);
        }
        out
    }

    /// `log(g)` for `g` with constant term 1.
    pub fn log(&self, k: usize) -> Tensor {
        debug_assert!(self.coeff(&[]).is_one());
        let u = self.without_constant();
        let mut out = Tensor::zero();
        let mut power = Tensor::one();
        for m in 1..=k {
            power = power.mul(&u, k);
            if power.is_zero() {
                break;
            }
            let sign = if m % 2 == 1 { 1 } else { -1 };
            out.add_scaled(&Rational::new(sign.into(), (m as i64).into()), &power);
        }
        out
    }

    /// Inverse of an element with constant term 1.
    pub fn inverse(&self, k: usize) -> Tensor {
        let u = self.without_constant().scale(&qi(-1));
        let mut out = Tensor::one();
        let mut power = Tensor::one();
        for _ in 1..=k {
            power = power.mul(&u, k);
            if power.is_zero() {
                break;
            }
            out = out.add(&power);
        }
        out
    }

    /// `Σ c_w / |w| · [w₁,[w₂,…,w_p]]` over the words of `self`: the
    /// Dynkin–Specht–Wever rewrite, which returns a Lie polynomial unchanged
    /// when read as a combination of right-nested brackets. The constant
    /// term is dropped.
    pub fn dsw_coefficients(&self) -> BTreeMap<Word, Rational> {
        let mut out: BTreeMap<Word, Rational> = BTreeMap::new();
        for (w, c) in &self.terms {
            if w.is_empty() {
                continue;
            }
            let c = c / qi(w.len() as i64);
            let mut key = w.clone();
            let p = key.len();
            let c = if p >= 2 && key[p - 2] == key[p - 1] {
                continue;
            } else if p >= 2 && key[p - 2] > key[p - 1] {
                key.swap(p - 2, p - 1);
                -c
            } else {
                c
            };
            *out.entry(key).or_insert_with(Rational::zero) += c;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }
}

/// Right-nested bracket `[w₁,[w₂,…,w_p]]` expanded as a tensor.
pub fn right_nested(word: &[u16]) -> Tensor {
    let k = word.len();
    let Some((&last, rest)) = word.split_last() else {
        return Tensor::zero();
    };
    let mut acc = Tensor::letter(last);
    for &l in rest.iter().rev() {
        acc = Tensor::letter(l).commutator(&acc, k);
    }
    acc
}

/// Lyndon words of length at most `k` over `d` letters, in lexicographic
/// order (Duval's algorithm).
pub fn lyndon_words(d: u16, k: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if d == 0 || k == 0 {
        return out;
    }
    let mut w: Vec<u16> = vec![0];
    loop {
        out.push(w.clone());
        let m = w.len();
        while w.len() < k {
            let c = w[w.len() - m];
            w.push(c);
        }
        while let Some(&last) = w.last() {
            if last == d - 1 {
                w.pop();
            } else {
                break;
            }
        }
        let Some(last) = w.last_mut() else { break };
        *last += 1;
    }
    out
}

pub fn is_lyndon(w: &[u16]) -> bool {
    !w.is_empty() && (1..w.len()).all(|i| w < &w[i..])
}

/// Standard factorization `w = uv` with `v` the longest proper Lyndon suffix.
pub fn standard_factorization(w: &[u16]) -> Option<(&[u16], &[u16])> {
    (1..w.len()).find(|&i| is_lyndon(&w[i..])).map(|i| (&w[..i], &w[i..]))
}

/// Standard bracketing `P(w) = [P(u), P(v)]` of a Lyndon word.
pub fn standard_bracketing(w: &[u16]) -> Tensor {
    match standard_factorization(w) {
        None => Tensor::word(w.to_vec()),
        Some((u, v)) => standard_bracketing(u).commutator(&standard_bracketing(v), w.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn lyndon_enumeration() {
        let words = lyndon_words(2, 4);
        let expected: Vec<Word> =
            vec![vec![0], vec![0, 0, 0, 1], vec![0, 0, 1], vec![0, 0, 1, 1], vec![0, 1], vec![0, 1, 1], vec![0, 1, 1, 1], vec![1]];
        assert_eq!(words, expected);
        assert!(words.iter().all(|w| is_lyndon(w)));
        assert!(!is_lyndon(&[0, 1, 0, 1]));
    }

    #[test]
    fn exp_log_round_trip() {
        let x = Tensor::letter(0).add(&Tensor::letter(1).scale(&q(1, 3)));
        let back = x.exp(4).log(4);
        assert_eq!(back, x);
    }

    #[test]
    fn bch_degree_two_and_three() {
        let k = 3;
        let g = Tensor::letter(0).exp(k).mul(&Tensor::letter(1).exp(k), k);
        let z = g.log(k);
        let (a, b) = (Tensor::letter(0), Tensor::letter(1));
        let ab = a.commutator(&b, k);
        let expected = a
            .add(&b)
            .add(&ab.scale(&q(1, 2)))
            .add(&a.commutator(&ab, k).scale(&q(1, 12)))
            .sub(&b.commutator(&ab, k).scale(&q(1, 12)));
        assert_eq!(z, expected);
    }

    #[test]
    fn dsw_recovers_bracket() {
        let t = right_nested(&[0, 0, 1]);
        let c = t.dsw_coefficients();
        assert_eq!(c.len(), 1);
        assert_eq!(c[&vec![0, 0, 1]], qi(1));
    }

    #[test]
    fn inverse_is_inverse() {
        let g = Tensor::letter(0).add(&Tensor::letter(1)).exp(3);
        assert_eq!(g.mul(&g.inverse(3), 3), Tensor::one());
    }

    #[test]
    fn standard_bracketing_has_lyndon_minimum() {
        for w in lyndon_words(3, 4) {
            let p = standard_bracketing(&w);
            let (min, c) = p.terms.iter().next().unwrap();
            assert_eq!(min, &w);
            assert_eq!(c, &qi(1));
        }
    }
}
