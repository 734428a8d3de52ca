//! Stratified nilpotent Lie algebras given by rational structure constants.
//!
//! Basis vectors are addressed either globally (0-based index into the full
//! coordinate vector, layer 1 first) or as `(layer, idx)` pairs with both
//! parts 1-based, which is the form used in files and reports.

mod families;
mod spec;

use std::collections::BTreeMap;
use std::ops::Range;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{format_rational, Rational, Scalar};

pub use families::{builtin_family, witt_dimension, work_cap, Family, DEFAULT_WORK_CAP};
pub use spec::{load_algebra, AlgebraSpec, BracketSpec, OutTerm};

/// A Lie algebra element in graded coordinates. It doubles as a group
/// element through exponential coordinates of the first kind.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GVec<S = Rational>(pub Vec<S>);

impl<S: Scalar> GVec<S> {
    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        GVec(self.0.iter().zip(&other.0).map(|(a, b)| a.clone() + b.clone()).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        GVec(self.0.iter().zip(&other.0).map(|(a, b)| a.clone() - b.clone()).collect())
    }

    pub fn neg(&self) -> Self {
        GVec(self.0.iter().map(|a| -a.clone()).collect())
    }

    pub fn scale(&self, t: &S) -> Self {
        GVec(self.0.iter().map(|a| a.clone() * t.clone()).collect())
    }

    pub fn add_scaled(&mut self, t: &S, other: &Self) {
        if t.is_zero() {
            return;
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            if !b.is_zero() {
                *a = a.clone() + t.clone() * b.clone();
            }
        }
    }

    pub fn to_f64(&self) -> GVec<f64> {
        GVec(self.0.iter().map(Scalar::to_f64).collect())
    }

    pub fn convert<T: Scalar>(&self) -> GVec<T>
    where
        S: Into<Rational>,
    {
        GVec(self.0.iter().map(|x| T::from_q(&x.clone().into())).collect())
    }
}

impl GVec<Rational> {
    pub fn from_rational<T: Scalar>(&self) -> GVec<T> {
        GVec(self.0.iter().map(T::from_q).collect())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(format_rational).collect()
    }
}

/// Output of a structure-constant pair: `coeff` times basis vector `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub index: usize,
    pub coeff: Rational,
    pub coeff_f64: f64,
}

/// Nonzero bracket `[e_a, e_b]` for global indices `a < b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketEntry {
    pub a: usize,
    pub b: usize,
    pub out: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradedAlgebra {
    name: String,
    dims: Vec<usize>,
    offsets: Vec<usize>,
    layer_of: Vec<usize>,
    entries: Vec<BracketEntry>,
}

impl GradedAlgebra {
    /// Assemble an algebra from structure constants on global indices
    /// (`a < b`). Checks the grading but not Jacobi or generation; see
    /// [`GradedAlgebra::validate`].
    pub fn from_structure(
        name: impl Into<String>,
        dims: Vec<usize>,
        table: BTreeMap<(usize, usize), BTreeMap<usize, Rational>>,
    ) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::Parse("dims must be a nonempty list of positive integers".into()));
        }
        let mut offsets = vec![0];
        for d in &dims {
            offsets.push(offsets.last().unwrap() + d);
        }
        let n = *offsets.last().unwrap();
        let layer_of: Vec<usize> = (0..n)
            .map(|i| offsets.iter().rposition(|&o| o <= i).unwrap() + 1)
            .collect();
        let pair = |g: usize| (layer_of[g], g - offsets[layer_of[g] - 1] + 1);
        let mut entries = Vec::new();
        for ((a, b), outs) in table {
            if a >= n || b >= n {
                return Err(Error::Parse(format!("basis index out of range in pair ({a}, {b})")));
            }
            if a == b {
                if outs.values().any(|c| !c.is_zero()) {
                    return Err(Error::AntisymmetryViolation { a: pair(a), b: pair(b) });
                }
                continue;
            }
            let (a, b, sign) = if a < b { (a, b, false) } else { (b, a, true) };
            let mut out = Vec::new();
            for (o, c) in outs {
                if c.is_zero() {
                    continue;
                }
                if o >= n {
                    return Err(Error::Parse(format!("output index {o} out of range")));
                }
                let want = layer_of[a] + layer_of[b];
                if layer_of[o] != want {
                    return Err(Error::GradingViolation { a: pair(a), b: pair(b), out_layer: layer_of[o] });
                }
                let c = if sign { -c } else { c };
                out.push(Term { index: o, coeff_f64: Scalar::to_f64(&c), coeff: c });
            }
            if !out.is_empty() {
                entries.push(BracketEntry { a, b, out });
            }
        }
        entries.sort_by_key(|e| (e.a, e.b));
        Ok(GradedAlgebra { name: name.into(), dims, offsets, layer_of, entries })
    }

    /// Jacobi identity on all basis triples, then generation by layer 1.
    pub fn validate(&self) -> Result<()> {
        self.check_jacobi()?;
        self.check_bracket_generating()
    }

    pub fn check_jacobi(&self) -> Result<()> {
        let n = self.dim();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if self.layer_of[a] + self.layer_of[b] + self.layer_of[c] > self.step() {
                        continue;
                    }
                    let (x, y, z): (GVec, GVec, GVec) = (self.basis_global(a), self.basis_global(b), self.basis_global(c));
                    let j = self
                        .bracket_unchecked(&x, &self.bracket_unchecked(&y, &z))
                        .add(&self.bracket_unchecked(&y, &self.bracket_unchecked(&z, &x)))
                        .add(&self.bracket_unchecked(&z, &self.bracket_unchecked(&x, &y)));
                    if !j.is_zero() {
                        return Err(Error::JacobiViolation {
                            triple: [self.pair_of(a), self.pair_of(b), self.pair_of(c)],
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_bracket_generating(&self) -> Result<()> {
        for layer in 2..=self.step() {
            let m = self.phi_matrix(layer)?;
            let rank = m.rank();
            if rank < self.dims[layer - 1] {
                return Err(Error::NotBracketGenerating { layer, rank, dim: self.dims[layer - 1] });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn step(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn d1(&self) -> usize {
        self.dims[0]
    }

    /// Hausdorff dimension `Σ i·d_i`.
    pub fn hausdorff_dim(&self) -> usize {
        self.dims.iter().enumerate().map(|(i, d)| (i + 1) * d).sum()
    }

    pub fn entries(&self) -> &[BracketEntry] {
        &self.entries
    }

    /// Global index range of layer `l` (1-based).
    pub fn layer_range(&self, l: usize) -> Result<Range<usize>> {
        self.check_layer(l)?;
        Ok(self.offsets[l - 1]..self.offsets[l])
    }

    pub fn layer_of(&self, global: usize) -> usize {
        self.layer_of[global]
    }

    pub fn pair_of(&self, global: usize) -> (usize, usize) {
        let l = self.layer_of[global];
        (l, global - self.offsets[l - 1] + 1)
    }

    pub fn global_index(&self, layer: usize, idx: usize) -> Result<usize> {
        self.check_layer(layer)?;
        if idx == 0 || idx > self.dims[layer - 1] {
            return Err(Error::Parse(format!("basis index {idx} out of range for layer {layer}")));
        }
        Ok(self.offsets[layer - 1] + idx - 1)
    }

    fn check_layer(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.step() {
            return Err(Error::LayerOutOfRange { layer: l, step: self.step() });
        }
        Ok(())
    }

    pub fn check<S: Scalar>(&self, v: &GVec<S>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::AlgebraMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }

    pub fn zero<S: Scalar>(&self) -> GVec<S> {
        GVec(vec![S::zero(); self.dim()])
    }

    fn basis_global<S: Scalar>(&self, g: usize) -> GVec<S> {
        let mut v = self.zero();
        v.0[g] = S::one();
        v
    }

    /// Basis vector `X_(layer, idx)`, both 1-based.
    pub fn basis<S: Scalar>(&self, layer: usize, idx: usize) -> Result<GVec<S>> {
        Ok(self.basis_global(self.global_index(layer, idx)?))
    }

    /// Basis vector by 1-based global position, matching the `X₁, X₂, …`
    /// numbering across layers.
    pub fn x<S: Scalar>(&self, i: usize) -> GVec<S> {
        assert!(i >= 1 && i <= self.dim(), "basis index {i} out of range");
        self.basis_global(i - 1)
    }

    pub fn bracket<S: Scalar>(&self, u: &GVec<S>, v: &GVec<S>) -> Result<GVec<S>> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.bracket_unchecked(u, v))
    }

    pub(crate) fn bracket_unchecked<S: Scalar>(&self, u: &GVec<S>, v: &GVec<S>) -> GVec<S> {
        let mut out = self.zero::<S>();
        for e in &self.entries {
            let (ua, ub, va, vb) = (&u.0[e.a], &u.0[e.b], &v.0[e.a], &v.0[e.b]);
            let mut w = S::zero();
            if !ua.is_zero() && !vb.is_zero() {
                w = ua.clone() * vb.clone();
            }
            if !ub.is_zero() && !va.is_zero() {
                w = w - ub.clone() * va.clone();
            }
            if w.is_zero() {
                continue;
            }
            for t in &e.out {
                let c = if S::EXACT { S::from_q(&t.coeff) } else { S::from_real(t.coeff_f64) };
                out.0[t.index] = out.0[t.index].clone() + c * w.clone();
            }
        }
        out
    }

    /// Right-nested bracket `[u₁,[u₂,[…,u_j]]]`; zero when `j` exceeds the
    /// step.
    pub fn iterated_bracket<S: Scalar>(&self, us: &[GVec<S>]) -> Result<GVec<S>> {
        for u in us {
            self.check(u)?;
        }
        let Some(last) = us.last() else {
            return Err(Error::EmptyProduct);
        };
        if us.len() > self.step() {
            return Ok(self.zero());
        }
        let mut acc = last.clone();
        for u in us[..us.len() - 1].iter().rev() {
            if acc.is_zero() {
                break;
            }
            acc = self.bracket_unchecked(u, &acc);
        }
        Ok(acc)
    }

    /// `δ_t`: scales layer `j` by `t^j`.
    pub fn dilate<S: Scalar>(&self, t: &S, v: &GVec<S>) -> Result<GVec<S>> {
        self.check(v)?;
        if *t <= S::zero() {
            return Err(Error::NonpositiveScale);
        }
        let mut out = v.clone();
        let mut pow = S::one();
        for l in 1..=self.step() {
            pow = pow * t.clone();
            for i in self.offsets[l - 1]..self.offsets[l] {
                out.0[i] = out.0[i].clone() * pow.clone();
            }
        }
        Ok(out)
    }

    /// `P_l`: the layer-`l` block of `v`.
    pub fn project_layer<S: Scalar>(&self, v: &GVec<S>, l: usize) -> Result<Vec<S>> {
        self.check(v)?;
        Ok(v.0[self.layer_range(l)?].to_vec())
    }

    /// `P_l(v)` as a full-length vector.
    pub fn layer_part<S: Scalar>(&self, v: &GVec<S>, l: usize) -> Result<GVec<S>> {
        let range = self.layer_range(l)?;
        self.check(v)?;
        let mut out = self.zero();
        out.0[range.clone()].clone_from_slice(&v.0[range]);
        Ok(out)
    }

    /// Embed layer-`l` coordinates into the full algebra.
    pub fn inject<S: Scalar>(&self, l: usize, coords: &[S]) -> Result<GVec<S>> {
        let range = self.layer_range(l)?;
        if coords.len() != range.len() {
            return Err(Error::AlgebraMismatch { expected: range.len(), got: coords.len() });
        }
        let mut out = self.zero();
        out.0[range].clone_from_slice(coords);
        Ok(out)
    }

    pub fn is_horizontal<S: Scalar>(&self, v: &GVec<S>) -> bool {
        v.0[self.offsets[1].min(v.len())..].iter().all(Zero::is_zero)
    }

    /// Smallest layer with a nonzero coordinate.
    pub fn leading_layer<S: Scalar>(&self, v: &GVec<S>) -> Option<usize> {
        v.0.iter().position(|x| !x.is_zero()).map(|i| self.layer_of[i])
    }

    /// Column `s` of `M_i` is `φ_i` of the `s`-th elementary tensor of
    /// `V₁^{⊗i}` in lexicographic multi-index order.
    pub fn phi_matrix(&self, layer: usize) -> Result<Matrix<Rational>> {
        self.check_layer(layer)?;
        let d1 = self.d1();
        let range = self.layer_range(layer)?;
        let cols = d1.pow(layer as u32);
        let mut m = Matrix::zeros(range.len(), cols);
        for (s, idx) in MultiIndex::new(d1, layer).enumerate() {
            let xs: Vec<GVec<Rational>> = idx.iter().map(|&i| self.basis_global(i)).collect();
            let v = self.iterated_bracket(&xs)?;
            for (r, g) in range.clone().enumerate() {
                m[(r, s)] = v.0[g].clone();
            }
        }
        Ok(m)
    }

    pub fn to_spec(&self) -> AlgebraSpec {
        AlgebraSpec {
            name: self.name.clone(),
            dims: self.dims.clone(),
            brackets: self
                .entries
                .iter()
                .map(|e| BracketSpec {
                    a: self.pair_of(e.a),
                    b: self.pair_of(e.b),
                    out: e
                        .out
                        .iter()
                        .map(|t| {
                            let (layer, idx) = self.pair_of(t.index);
                            OutTerm { layer, idx, coeff: format_rational(&t.coeff).into() }
                        })
                        .collect(),
                })
                .collect(),
            gram1: None,
        }
    }

    pub fn summary(&self) -> AlgebraSummary {
        AlgebraSummary {
            name: self.name.clone(),
            dims: self.dims.clone(),
            step: self.step(),
            hausdorff_dim: self.hausdorff_dim(),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AlgebraSummary {
    pub name: String,
    pub dims: Vec<usize>,
    pub step: usize,
    pub hausdorff_dim: usize,
}

/// Lexicographic enumeration of `{0..base}^len`.
#[derive(Debug, Clone)]
pub struct MultiIndex {
    base: usize,
    current: Option<Vec<usize>>,
}

impl MultiIndex {
    pub fn new(base: usize, len: usize) -> Self {
        MultiIndex { base, current: (base > 0 || len == 0).then(|| vec![0; len]) }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.current.take()?;
        let mut nxt = cur.clone();
        let mut pos = nxt.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            nxt[pos] += 1;
            if nxt[pos] < self.base {
                self.current = Some(nxt);
                break;
            }
            nxt[pos] = 0;
        }
        Some(cur)
    }
}
