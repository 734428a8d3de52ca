//! Sparse polynomials with nonnegative float coefficients in the formal
//! variables `b₁…b_k`.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::scalar::format_f64;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl QPoly {
    pub fn zero(nvars: usize) -> Self {
        QPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = QPoly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// `c · b_i^e` with `i` 1-based.
    pub fn monomial(nvars: usize, i: usize, e: u32, c: f64) -> Self {
        let mut exps = vec![0; nvars];
        exps[i - 1] = e;
        let mut p = QPoly::zero(nvars);
        p.add_term(exps, c);
        p
    }

    /// `b₁ + … + b_k`.
    /// `b₁ + … + b_upto` in `nvars` variables.
    pub fn variable_sum(nvars: usize, upto: usize) -> Self {
        let mut p = QPoly::zero(nvars);
        for i in 1..=upto.min(nvars) {
            p = p.add(&QPoly::monomial(nvars, i, 1, 1.0));
        }
        p
    }

    fn add_term(&mut self, exps: Vec<u32>, c: f64) {
        if c != 0.0 {
            *self.terms.entry(exps).or_insert(0.0) += c;
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> QPoly {
        let mut out = QPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        let mut out = QPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> QPoly {
        let mut out = QPoly::constant(self.nvars, 1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, b: &[f64]) -> f64 {
        assert_eq!(b.len(), self.nvars, "wrong number of variables");
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(b).map(|(&k, x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn eval_at_ones(&self) -> f64 {
        self.terms.values().sum()
    }

    pub fn constant_term(&self) -> f64 {
        self.terms.get(&vec![0; self.nvars]).copied().unwrap_or(0.0)
    }

    pub fn min_coeff(&self) -> Option<f64> {
        self.terms.values().copied().reduce(f64::min)
    }

    /// Total degrees present.
    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|e| e.iter().sum()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Highest variable index (1-based) with a positive exponent.
    pub fn max_variable(&self) -> usize {
        self.terms.keys().filter_map(|e| e.iter().rposition(|&x| x > 0)).max().map_or(0, |i| i + 1)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> =
            self.terms.iter().map(|(e, c)| json!({"exponents": e, "coeff": format_f64(*c)})).collect();
        json!(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let s = QPoly::variable_sum(2, 2);
        let sq = s.pow(2);
        assert_eq!(sq.eval(&[1.0, 2.0]), 9.0);
        assert_eq!(sq.degrees(), vec![2]);
        assert_eq!(sq.constant_term(), 0.0);
        assert_eq!(sq.eval_at_ones(), 4.0);
        let m = QPoly::monomial(3, 2, 2, 0.5);
        assert_eq!(m.eval(&[7.0, 2.0, 9.0]), 2.0);
        assert_eq!(m.max_variable(), 2);
        assert!(QPoly::zero(2).is_zero());
        assert_eq!(QPoly::constant(2, 3.0).pow(0).eval(&[5.0, 5.0]), 1.0);
    }
}
