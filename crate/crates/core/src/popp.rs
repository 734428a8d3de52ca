//! Popp scalar products.
//!
//! Layer `i` inherits the quotient norm of `V₁^{⊗i}` through the surjection
//! `φ_i`, whose matrix in the elementary tensor basis is `M_i`. Its Gram
//! matrix is `G_i = (M_i M_iᵀ)^{-1}` and the shortest preimage of `v` is
//! `M_iᵀ G_i v`.

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::algebra::{GVec, GradedAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, Matrix};
use crate::scalar::{format_f64, format_rational, Rational, Scalar};

#[derive(Debug, Clone)]
pub struct PoppMetric {
    dims: Vec<usize>,
    phi: Vec<Matrix<Rational>>,
    gram: Vec<Matrix<Rational>>,
    gram_det: Vec<Rational>,
    chol: Vec<Matrix<f64>>,
}

pub fn build_popp(alg: &GradedAlgebra) -> Result<PoppMetric> {
    PoppMetric::new(alg)
}

impl PoppMetric {
    pub fn new(alg: &GradedAlgebra) -> Result<Self> {
        let mut phi = Vec::new();
        let mut gram = Vec::new();
        let mut gram_det = Vec::new();
        let mut chol = Vec::new();
        for layer in 1..=alg.step() {
            let m = if layer == 1 { Matrix::identity(alg.d1()) } else { alg.phi_matrix(layer)? };
            let mmt = m.mul(&m.transpose());
            let g = mmt.inverse().ok_or_else(|| Error::NotBracketGenerating {
                layer,
                rank: m.rank(),
                dim: alg.dims()[layer - 1],
            })?;
            let l = cholesky(&g.map(Scalar::to_f64)).ok_or_else(|| Error::NotBracketGenerating {
                layer,
                rank: m.rank(),
                dim: alg.dims()[layer - 1],
            })?;
            gram_det.push(g.determinant());
            phi.push(m);
            gram.push(g);
            chol.push(l);
        }
        Ok(PoppMetric { dims: alg.dims().to_vec(), phi, gram, gram_det, chol })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn step(&self) -> usize {
        self.dims.len()
    }

    fn check_layer(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.step() {
            return Err(Error::LayerOutOfRange { layer: i, step: self.step() });
        }
        Ok(())
    }

    fn check_len(&self, i: usize, len: usize) -> Result<()> {
        self.check_layer(i)?;
        if len != self.dims[i - 1] {
            return Err(Error::AlgebraMismatch { expected: self.dims[i - 1], got: len });
        }
        Ok(())
    }

    /// `M_i`, of shape `d_i × d₁^i`.
    pub fn phi(&self, i: usize) -> Result<&Matrix<Rational>> {
        self.check_layer(i)?;
        Ok(&self.phi[i - 1])
    }

    /// `G_i`.
    pub fn gram(&self, i: usize) -> Result<&Matrix<Rational>> {
        self.check_layer(i)?;
        Ok(&self.gram[i - 1])
    }

    /// Lower Cholesky factor `L_i` of `G_i`; the columns of `L_i^{-T}` are
    /// an orthonormal frame of layer `i`.
    pub fn cholesky_factor(&self, i: usize) -> Result<&Matrix<f64>> {
        self.check_layer(i)?;
        Ok(&self.chol[i - 1])
    }

    /// `vᵀ G_i v`, exact in rational mode.
    pub fn layer_norm_sq<S: Scalar>(&self, i: usize, v: &[S]) -> Result<S> {
        self.check_len(i, v.len())?;
        let g = &self.gram[i - 1];
        let mut acc = S::zero();
        for (a, va) in v.iter().enumerate() {
            if va.is_zero() {
                continue;
            }
            for (b, vb) in v.iter().enumerate() {
                if vb.is_zero() || g[(a, b)].is_zero() {
                    continue;
                }
                acc = acc + va.clone() * S::from_q(&g[(a, b)]) * vb.clone();
            }
        }
        Ok(acc)
    }

    /// `‖v‖_i = √(vᵀ G_i v)`.
    pub fn layer_norm<S: Scalar>(&self, i: usize, v: &[S]) -> Result<f64> {
        Ok(self.layer_norm_sq(i, v)?.to_f64().max(0.0).sqrt())
    }

    /// Norm of the layer-`i` part of a full vector.
    pub fn norm_of_layer<S: Scalar>(&self, alg: &GradedAlgebra, x: &GVec<S>, i: usize) -> Result<f64> {
        self.layer_norm(i, &alg.project_layer(x, i)?)
    }

    /// Exact square root of `vᵀ G_i v` when it is a rational square.
    pub fn layer_norm_exact(&self, i: usize, v: &[Rational]) -> Result<Option<Rational>> {
        Ok(self.layer_norm_sq(i, v)?.sqrt_exact())
    }

    /// `u = M_iᵀ G_i v`, the shortest tensor with `φ_i(u) = v`.
    pub fn minimal_preimage(&self, i: usize, v: &[Rational]) -> Result<Vec<Rational>> {
        self.check_len(i, v.len())?;
        let gv = self.gram[i - 1].mul_vec(v);
        Ok(self.phi[i - 1].transpose().mul_vec(&gv))
    }

    /// Coordinates of `v` in the orthonormal frame of layer `i` (`L_iᵀ v`).
    pub fn frame_coords(&self, i: usize, v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(i, v.len())?;
        Ok(self.chol[i - 1].transpose().mul_vec(v))
    }

    /// Layer vector with the given coordinates in the orthonormal frame
    /// (`L_i^{-T} c`).
    pub fn from_frame_coords(&self, i: usize, c: &[f64]) -> Result<Vec<f64>> {
        self.check_len(i, c.len())?;
        let lt = self.chol[i - 1].transpose();
        let n = c.len();
        let mut v = vec![0.0; n];
        for r in (0..n).rev() {
            let mut s = c[r];
            for j in r + 1..n {
                s -= lt[(r, j)] * v[j];
            }
            v[r] = s / lt[(r, r)];
        }
        Ok(v)
    }

    /// Covolume of the parallelepiped spanned by `basis`:
    /// `|det B| · √(∏ det G_i)`.
    pub fn covolume(&self, basis: &[GVec<Rational>]) -> Result<f64> {
        let n: usize = self.dims.iter().sum();
        if basis.len() != n {
            return Err(Error::AlgebraMismatch { expected: n, got: basis.len() });
        }
        for b in basis {
            if b.len() != n {
                return Err(Error::AlgebraMismatch { expected: n, got: b.len() });
            }
        }
        let cols: Vec<Vec<Rational>> = basis.iter().map(|b| b.0.clone()).collect();
        let det = Matrix::from_columns(&cols).determinant();
        if det.is_zero() {
            return Err(Error::SingularBasis);
        }
        Ok(det.to_f64().abs() * self.density())
    }

    /// Popp volume of the unit cube of the declared basis, `√(∏ det G_i)`.
    pub fn density(&self) -> f64 {
        let prod = self.gram_det.iter().fold(Rational::one(), |acc, d| acc * d);
        match prod.sqrt_exact() {
            Some(r) => r.to_f64(),
            None => prod.to_f64().sqrt(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mat = |m: &Matrix<Rational>| -> Vec<Vec<String>> {
            (0..m.rows).map(|i| m.row(i).iter().map(format_rational).collect()).collect()
        };
        let layers: Vec<Value> = (0..self.step())
            .map(|i| {
                let frame: Vec<Vec<String>> = (0..self.dims[i])
                    .map(|c| {
                        let mut e = vec![0.0; self.dims[i]];
                        e[c] = 1.0;
                        let v = self.from_frame_coords(i + 1, &e).unwrap_or_default();
                        v.into_iter().map(format_f64).collect()
                    })
                    .collect();
                json!({
                    "layer": i + 1,
                    "dim": self.dims[i],
                    "phi": mat(&self.phi[i]),
                    "gram": mat(&self.gram[i]),
                    "frame_columns": frame,
                })
            })
            .collect();
        json!({"dims": self.dims, "layers": layers, "density": format_f64(self.density())})
    }
}

/// `ω_d`, the volume of the Euclidean unit ball in dimension `d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    if d <= 20 {
        let mut w = if d % 2 == 0 { 1.0 } else { 2.0 };
        let mut m = if d % 2 == 0 { 2 } else { 3 };
        while m <= d {
            w *= 2.0 * std::f64::consts::PI / m as f64;
            m += 2;
        }
        w
    } else {
        let h = d as f64 / 2.0;
        std::f64::consts::PI.powf(h) / statrs::function::gamma::gamma(h + 1.0)
    }
}

/// `∏ r_i^{d_i} ω_{d_i}`.
pub fn popp_box_volume(radii: &[f64], dims: &[usize]) -> Result<f64> {
    if radii.len() != dims.len() {
        return Err(Error::AlgebraMismatch { expected: dims.len(), got: radii.len() });
    }
    if radii.iter().any(|&r| r.is_nan() || r <= 0.0) {
        return Err(Error::NonpositiveRadius);
    }
    Ok(radii.iter().zip(dims).map(|(&r, &d)| r.powi(d as i32) * unit_ball_volume(d)).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{builtin_family, Family};
    use crate::scalar::{q, qi};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn heisenberg_gram() {
        let h = builtin_family(&Family::Heisenberg(1)).unwrap();
        let p = build_popp(&h).unwrap();
        assert_eq!(p.phi(2).unwrap().data, vec![qi(0), qi(1), qi(-1), qi(0)]);
        assert_eq!(p.gram(2).unwrap().data, vec![q(1, 2)]);
        assert!((p.layer_norm(2, &[qi(1)]).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((p.layer_norm(2, &[qi(3)]).unwrap() - 3.0 * FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(p.minimal_preimage(2, &[qi(1)]).unwrap(), vec![qi(0), q(1, 2), q(-1, 2), qi(0)]);
        assert_eq!(p.layer_norm(1, &[qi(3), qi(4)]).unwrap(), 5.0);
        assert_eq!(p.layer_norm(1, &[qi(0), qi(0)]).unwrap(), 0.0);
        assert!(matches!(p.layer_norm(3, &[qi(1)]), Err(Error::LayerOutOfRange { .. })));
    }

    #[test]
    fn engel_top_layer() {
        let e = builtin_family(&Family::Engel).unwrap();
        let p = build_popp(&e).unwrap();
        assert_eq!(p.gram(3).unwrap().data, vec![q(1, 2)]);
    }

    #[test]
    fn unit_balls() {
        assert_eq!(unit_ball_volume(0), 1.0);
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        let h = 21.0 / 2.0;
        let direct = PI.powf(h) / statrs::function::gamma::gamma(h + 1.0);
        assert!((unit_ball_volume(21) - direct).abs() < 1e-14);
        let rec20 = unit_ball_volume(20);
        let gam20 = PI.powi(10) / statrs::function::gamma::gamma(11.0);
        assert!((rec20 - gam20).abs() / gam20 < 1e-13);
    }

    #[test]
    fn box_volume_values() {
        let v = popp_box_volume(&[0.5, 1.0 / 512.0], &[2, 1]).unwrap();
        assert!((v - PI / 1024.0).abs() < 1e-18);
        assert_eq!(popp_box_volume(&[1.0], &[1]).unwrap(), 2.0);
        assert_eq!(popp_box_volume(&[0.0], &[1]), Err(Error::NonpositiveRadius));
    }

    #[test]
    fn covolume_of_standard_basis() {
        let h = builtin_family(&Family::Heisenberg(1)).unwrap();
        let p = build_popp(&h).unwrap();
        let basis: Vec<GVec> = (1..=3).map(|i| h.x(i)).collect();
        assert!((p.covolume(&basis).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        let mut doubled = basis.clone();
        doubled[0] = doubled[0].scale(&qi(2));
        assert!((p.covolume(&doubled).unwrap() - 2.0 * FRAC_1_SQRT_2).abs() < 1e-15);
        let singular = vec![basis[0].clone(), basis[0].clone(), basis[2].clone()];
        assert_eq!(p.covolume(&singular), Err(Error::SingularBasis));
    }

    #[test]
    fn frame_round_trip() {
        let f = builtin_family(&Family::FreeNilpotent { d: 2, k: 3 }).unwrap();
        let p = build_popp(&f).unwrap();
        let v = [0.3, -1.2];
        let c = p.frame_coords(3, &v).unwrap();
        let back = p.from_frame_coords(3, &c).unwrap();
        assert!((back[0] - v[0]).abs() < 1e-14 && (back[1] - v[1]).abs() < 1e-14);
        let n2: f64 = c.iter().map(|x| x * x).sum();
        let vq: Vec<Rational> = v.iter().map(|&x| Rational::from_real(x)).collect();
        assert!((n2.sqrt() - p.layer_norm(3, &vq).unwrap()).abs() < 1e-14);
    }
}
