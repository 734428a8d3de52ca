//! JSON structure-constant documents.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{GVec, GradedAlgebra};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Rational, RationalInput, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    #[serde(default)]
    pub name: String,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub brackets: Vec<BracketSpec>,
    /// Optional Gram matrix of the layer-1 scalar product in the declared
    /// basis; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram1: Option<Vec<Vec<RationalInput>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketSpec {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub out: Vec<OutTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutTerm {
    pub layer: usize,
    pub idx: usize,
    pub coeff: RationalInput,
}

/// Parse and validate a document: parse, antisymmetry, grading, Jacobi,
/// generation, in that order.
pub fn load_algebra(json: &str) -> Result<GradedAlgebra> {
    let spec: AlgebraSpec = serde_json::from_str(json)?;
    spec.build()
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<GradedAlgebra> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::Parse("dims must be a nonempty list of positive integers".into()));
        }
        let offsets: Vec<usize> = std::iter::once(0)
            .chain(self.dims.iter().scan(0, |acc, d| {
                *acc += d;
                Some(*acc)
            }))
            .collect();
        let global = |(layer, idx): (usize, usize)| -> Result<usize> {
            if layer == 0 || layer > self.dims.len() || idx == 0 || idx > self.dims[layer - 1] {
                return Err(Error::Parse(format!("basis element ({layer}, {idx}) does not exist")));
            }
            Ok(offsets[layer - 1] + idx - 1)
        };

        // keyed by the unordered pair; remembers which order supplied it
        let mut table: BTreeMap<(usize, usize), (bool, BTreeMap<usize, Rational>)> = BTreeMap::new();
        for br in &self.brackets {
            let (a, b) = (global(br.a)?, global(br.b)?);
            let mut out: BTreeMap<usize, Rational> = BTreeMap::new();
            for t in &br.out {
                let o = global((t.layer, t.idx))?;
                *out.entry(o).or_insert_with(Rational::zero) += t.coeff.to_rational()?;
            }
            out.retain(|_, c| !c.is_zero());
            if a == b {
                if !out.is_empty() {
                    return Err(Error::AntisymmetryViolation { a: br.a, b: br.b });
                }
                continue;
            }
            let flipped = a > b;
            let key = if flipped { (b, a) } else { (a, b) };
            let normalized: BTreeMap<usize, Rational> =
                out.into_iter().map(|(o, c)| (o, if flipped { -c } else { c })).collect();
            match table.get(&key) {
                None => {
                    table.insert(key, (flipped, normalized));
                }
                Some((prev_flipped, _)) if *prev_flipped == flipped => {
                    return Err(Error::Parse(format!("bracket of {:?} and {:?} listed twice", br.a, br.b)));
                }
                Some((_, prev)) => {
                    if *prev != normalized {
                        return Err(Error::AntisymmetryViolation { a: br.a, b: br.b });
                    }
                }
            }
        }
        let plain = table.into_iter().map(|(k, (_, v))| (k, v)).collect();
        let name = if self.name.is_empty() { "custom".to_string() } else { self.name.clone() };
        let alg = GradedAlgebra::from_structure(name, self.dims.clone(), plain)?;
        alg.validate()?;
        match &self.gram1 {
            None => Ok(alg),
            Some(rows) => {
                let g = rows
                    .iter()
                    .map(|r| r.iter().map(RationalInput::to_rational).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                absorb_gram(&alg, &g)
            }
        }
    }
}

/// Re-express the algebra in a basis of layer 1 that is orthonormal for the
/// given Gram matrix. Uses `G = L D Lᵀ`; the new basis is the columns of
/// `L^{-T} D^{-1/2}`, exact when every pivot of `D` is a rational square.
fn absorb_gram(alg: &GradedAlgebra, g: &[Vec<Rational>]) -> Result<GradedAlgebra> {
    let d1 = alg.d1();
    if g.len() != d1 || g.iter().any(|r| r.len() != d1) {
        return Err(Error::Parse(format!("gram1 must be {d1}x{d1}")));
    }
    for i in 0..d1 {
        for j in 0..i {
            if g[i][j] != g[j][i] {
                return Err(Error::Parse("gram1 is not symmetric".into()));
            }
        }
    }
    let mut l = Matrix::<Rational>::identity(d1);
    let mut diag = vec![Rational::zero(); d1];
    for j in 0..d1 {
        let mut dj = g[j][j].clone();
        for m in 0..j {
            dj -= &l[(j, m)] * &l[(j, m)] * &diag[m];
        }
        if dj <= Rational::zero() {
            return Err(Error::Parse("gram1 is not positive definite".into()));
        }
        for i in j + 1..d1 {
            let mut s = g[i][j].clone();
            for m in 0..j {
                s -= &l[(i, m)] * &l[(j, m)] * &diag[m];
            }
            l[(i, j)] = s / &dj;
        }
        diag[j] = dj;
    }
    let lt_inv = l.transpose().inverse().ok_or(Error::SingularBasis)?;
    let scales: Vec<Rational> =
        diag.iter().map(|d| Rational::one() / d.sqrt_exact().unwrap_or_else(|| d.root_approx(2))).collect();
    let new_basis: Vec<GVec> = (0..d1)
        .map(|c| {
            let mut v = alg.zero::<Rational>();
            for r in 0..d1 {
                v.0[r] = &lt_inv[(r, c)] * &scales[c];
            }
            v
        })
        .collect();
    let vector = |i: usize| -> GVec {
        if i < d1 {
            new_basis[i].clone()
        } else {
            alg.x(i + 1)
        }
    };
    let n = alg.dim();
    let mut table = BTreeMap::new();
    for a in 0..n {
        for b in a + 1..n {
            if alg.layer_of(a) + alg.layer_of(b) > alg.step() {
                continue;
            }
            let v = alg.bracket_unchecked(&vector(a), &vector(b));
            let out: BTreeMap<usize, Rational> =
                v.0.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
            if !out.is_empty() {
                table.insert((a, b), out);
            }
        }
    }
    let changed = GradedAlgebra::from_structure(alg.name(), alg.dims().to_vec(), table)?;
    changed.validate()?;
    Ok(changed)
}
