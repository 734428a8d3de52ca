//! Piecewise-horizontal paths built from commutator words.
//!
//! A path is a list of horizontal segments; segment `X` moves the current
//! point `g` to `g·exp(X)` along a one-parameter subgroup, at length
//! `‖X‖₁`. Endpoints are exact BCH folds.

use serde::Serialize;

use crate::adjust::{adjust_tuple, horizontal_norm, AdjustedTuple, HorizontalSet, Length, LengthReport};
use crate::algebra::{GVec, GradedAlgebra};
use crate::bch::bch_product;
use crate::error::{Error, Result};
use crate::popp::PoppMetric;
use crate::scalar::{Rational, Scalar};

/// One letter of a commutator word: factor `index` (1-based), possibly
/// inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

/// Letters of `[x₁,[x₂,…,x_j]_c]_c`, expanded through
/// `[a,b]_c = a·b·a⁻¹·b⁻¹`.
pub fn commutator_word(j: usize) -> Vec<Letter> {
    fn build(first: usize, j: usize) -> Vec<Letter> {
        if first == j {
            return vec![Letter { index: j, inverse: false }];
        }
        let inner = build(first + 1, j);
        let inner_inv: Vec<Letter> =
            inner.iter().rev().map(|l| Letter { index: l.index, inverse: !l.inverse }).collect();
        let mut w = Vec::with_capacity(2 * inner.len() + 2);
        w.push(Letter { index: first, inverse: false });
        w.extend_from_slice(&inner);
        w.push(Letter { index: first, inverse: true });
        w.extend(inner_inv);
        w
    }
    if j == 0 {
        return Vec::new();
    }
    build(1, j)
}

/// The commutator word of a row as concrete horizontal segments. Zero
/// letters are dropped.
pub fn word_of_commutator(row: &[GVec<Rational>]) -> Vec<GVec<Rational>> {
    commutator_word(row.len())
        .into_iter()
        .map(|l| if l.inverse { row[l.index - 1].neg() } else { row[l.index - 1].clone() })
        .filter(|x| !x.is_zero())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalPath {
    pub segments: Vec<GVec<Rational>>,
    pub endpoint: GVec<Rational>,
    pub length: Length,
}

impl HorizontalPath {
    pub fn new(alg: &GradedAlgebra, segments: Vec<GVec<Rational>>) -> Result<Self> {
        let mut endpoint = alg.zero();
        for s in &segments {
            alg.check(s)?;
            if !alg.is_horizontal(s) {
                return Err(Error::Certificate("path segment is not horizontal".into()));
            }
            endpoint = bch_product(alg, &endpoint, s)?;
        }
        let length = segments.iter().map(|s| horizontal_norm(alg, s)).sum();
        Ok(HorizontalPath { segments, endpoint, length })
    }

    /// Concatenation of the rows of every set, rows with a zero factor
    /// skipped (their commutator is the identity).
    pub fn from_sets(alg: &GradedAlgebra, sets: &[HorizontalSet]) -> Result<Self> {
        let mut segments = Vec::new();
        for set in sets {
            for row in &set.rows {
                if row.iter().any(GVec::is_zero) {
                    continue;
                }
                segments.extend(word_of_commutator(row));
            }
        }
        Self::new(alg, segments)
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Point reached after each segment.
    pub fn waypoints(&self, alg: &GradedAlgebra) -> Result<Vec<GVec<Rational>>> {
        let mut g = alg.zero();
        let mut out = Vec::with_capacity(self.segments.len());
        for s in &self.segments {
            g = bch_product(alg, &g, s)?;
            out.push(g.clone());
        }
        Ok(out)
    }

    /// Endpoint recomputed in binary floating point.
    pub fn endpoint_f64(&self, alg: &GradedAlgebra) -> Result<GVec<f64>> {
        let mut g = alg.zero::<f64>();
        for s in &self.segments {
            g = bch_product(alg, &g, &s.to_f64())?;
        }
        Ok(g)
    }
}

pub fn path_from_tuple(alg: &GradedAlgebra, tuple: &AdjustedTuple) -> Result<HorizontalPath> {
    HorizontalPath::from_sets(alg, &tuple.sets)
}

/// `2^{k−1}·d`.
pub fn dcc_upper_from_dcom(k: usize, d: f64) -> f64 {
    if k == 0 {
        return d;
    }
    2f64.powi(k as i32 - 1) * d
}

/// An explicit path ending exactly at the target, with its length as the
/// certified bound on `d_cc(0, target)`.
#[derive(Debug, Clone)]
pub struct DccCertificate {
    pub tuple: AdjustedTuple,
    pub path: HorizontalPath,
    pub d_com_k: Length,
}

impl DccCertificate {
    pub fn bound(&self) -> &Length {
        &self.path.length
    }

    /// `2^{k−1}·d_com^(k)` for the generating tuple.
    pub fn dcom_bound(&self) -> f64 {
        dcc_upper_from_dcom(self.tuple.step(), self.d_com_k.value)
    }

    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            segments: self.path.len(),
            length: self.path.length.report(),
            d_com_k: self.d_com_k.report(),
            dcom_bound: crate::scalar::format_f64(self.dcom_bound()),
            endpoint_exact: self.path.endpoint == self.tuple.target,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub segments: usize,
    pub length: LengthReport,
    pub d_com_k: LengthReport,
    pub dcom_bound: String,
    pub endpoint_exact: bool,
}

/// Relative slack allowed when comparing float renderings of quantities
/// that satisfy an inequality exactly.
const ROUNDING_SLACK: f64 = 1e-12;

pub fn certified_dcc_upper(alg: &GradedAlgebra, popp: &PoppMetric, z: &GVec<Rational>) -> Result<DccCertificate> {
    let tuple = adjust_tuple(alg, popp, z)?;
    let path = path_from_tuple(alg, &tuple)?;
    if &path.endpoint != z {
        return Err(Error::Certificate("path endpoint differs from the target".into()));
    }
    let d_com_k = tuple.d_com_k(alg);
    let cert = DccCertificate { tuple, path, d_com_k };
    if cert.path.length.value > cert.dcom_bound() * (1.0 + ROUNDING_SLACK) {
        return Err(Error::Certificate(format!(
            "path length {} exceeds 2^(k-1) d_com = {}",
            cert.path.length.value,
            cert.dcom_bound()
        )));
    }
    Ok(cert)
}

/// `‖P₁x‖₁`, a lower bound for `d_cc(0, x)`.
pub fn dcc_lower_bound(alg: &GradedAlgebra, x: &GVec<Rational>) -> Length {
    horizontal_norm(alg, x)
}

/// Relative distance between a float endpoint and an exact target.
pub fn relative_error(x: &GVec<f64>, target: &GVec<Rational>) -> f64 {
    let scale = target.0.iter().map(|c| c.to_f64().abs()).fold(1e-300, f64::max);
    x.0.iter().zip(&target.0).map(|(a, b)| (a - b.to_f64()).abs()).fold(0.0, f64::max) / scale
}
