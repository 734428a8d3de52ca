//! Quantitative bounds: the combinatorial distance estimates, the error
//! constants `θ_j`, the error polynomials `Q_{lj}`, the box radii
//! `ε₁…ε_k` and the systolic constant `C = 2·D^{−1/Q}`.

mod qpoly;

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::Signed;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bch::{beta_table, max_coeff_constants};
use crate::error::{Error, Result};
use crate::popp::popp_box_volume;
use crate::scalar::{format_f64, Scalar};

pub use qpoly::QPoly;

/// `j · d₁^{(2j−1)/2} · ν^{1/j}`.
pub fn dcom_layer_bound(j: usize, d1: usize, nu: f64) -> f64 {
    if nu <= 0.0 {
        return 0.0;
    }
    j as f64 * (d1 as f64).powf((2 * j - 1) as f64 / 2.0) * nu.powf(1.0 / j as f64)
}

/// Coefficient of the layer-`j` combinatorial distance bound; the first
/// layer is exact (`d_com = ‖Z₁‖₁`).
fn layer_coefficient(j: usize, d1: usize) -> f64 {
    if j == 1 {
        1.0
    } else {
        dcom_layer_bound(j, d1, 1.0)
    }
}

/// `θ_j = 8^k · d₁^{jk} · β̃ · γ̃^k`.
pub fn theta(j: usize, d1: usize, k: usize, beta_t: f64, gamma_t: f64) -> f64 {
    8f64.powi(k as i32) * (d1 as f64).powi((j * k) as i32) * beta_t * gamma_t.powi(k as i32)
}

/// `θ_j` with the canonical table constants.
pub fn theta_for(d1: usize, j: usize, k: usize) -> Result<f64> {
    let (b, g) = max_coeff_constants(d1, j, k)?;
    Ok(theta(j, d1, k, b.to_f64(), g.to_f64()))
}

/// `2^{p∧q}`, the factor in `‖[Z_p,Z_q]‖ ≤ 2^{p∧q}‖Z_p‖‖Z_q‖`.
pub fn bracket_norm_factor(p: usize, q: usize) -> f64 {
    2f64.powi(p.min(q) as i32)
}

/// Factor for a right-nested bracket of homogeneous pieces of degrees
/// `m₁…m_q`: the two-term bound applied from the inside out.
pub fn nesting_factor(ms: &[usize]) -> f64 {
    let mut tail = 0;
    let mut f = 1.0;
    for (i, &m) in ms.iter().enumerate().rev() {
        if i + 1 < ms.len() {
            f *= bracket_norm_factor(m, tail);
        }
        tail += m;
    }
    f
}

/// All compositions of `total` into `parts` positive integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if total < parts {
        return Vec::new();
    }
    let mut out = Vec::new();
    for first in 1..=total - (parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Error polynomials `Q_{lj}` for `1 ≤ j < l ≤ k`, with the `θ_j` used to
/// build them.
#[derive(Debug, Clone)]
pub struct QTable {
    pub d1: usize,
    pub k: usize,
    pub thetas: BTreeMap<usize, f64>,
    polys: BTreeMap<(usize, usize), QPoly>,
}

impl QTable {
    /// `Q_{lj}`; the zero polynomial outside `1 ≤ j < l ≤ k`.
    pub fn get(&self, l: usize, j: usize) -> QPoly {
        self.polys.get(&(l, j)).cloned().unwrap_or_else(|| QPoly::zero(self.k))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &QPoly)> {
        self.polys.iter()
    }

    pub fn to_json(&self) -> Value {
        let polys: Vec<Value> =
            self.polys.iter().map(|((l, j), p)| json!({"l": l, "j": j, "terms": p.to_json()})).collect();
        let thetas: BTreeMap<String, String> =
            self.thetas.iter().map(|(j, t)| (j.to_string(), format_f64(*t))).collect();
        json!({"d1": self.d1, "k": self.k, "theta": thetas, "polynomials": polys})
    }
}

type QCache = Mutex<HashMap<(usize, usize), Arc<QTable>>>;

/// Builds `Q_{l,j+1}` from `Q_{·,j}` by bounding every term of
/// `log(exp X · exp Y)` where `X` is the `j`-th prefix product and `Y` the
/// `y`-vector of the next set: linear terms `B_l^(j)` and `A_l`, plus each
/// table bracket split into homogeneous pieces.
pub fn q_polynomials(d1: usize, k: usize) -> Result<Arc<QTable>> {
    static CACHE: OnceLock<QCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = guard.get(&(d1, k)) {
        return Ok(t.clone());
    }
    let table = Arc::new(build_q_table(d1, k)?);
    guard.insert((d1, k), table.clone());
    Ok(table)
}

fn build_q_table(d1: usize, k: usize) -> Result<QTable> {
    let mut polys: BTreeMap<(usize, usize), QPoly> = BTreeMap::new();
    let mut thetas = BTreeMap::new();
    for l in 2..=k {
        polys.insert((l, 1), QPoly::zero(k));
    }
    if k < 3 {
        return Ok(QTable { d1, k, thetas, polys });
    }
    let alpha = beta_table(2, k)?;
    for j in 1..=k - 2 {
        let jp = j + 1;
        let w = QPoly::monomial(k, jp, jp as u32, 1.0).add(&polys[&(jp, j)]);
        let th = theta_for(d1, jp, k)?;
        thetas.insert(jp, th);
        let w1 = w.eval_at_ones();
        let sum_b = QPoly::variable_sum(k, jp);
        let a_bound = |m: usize| sum_b.pow(m as u32).scale(th * w1.powf(m as f64 / jp as f64));
        let slot = |letter: usize, m: usize| -> Option<QPoly> {
            match letter {
                1 if m <= j => Some(QPoly::monomial(k, m, m as u32, 1.0)),
                1 => Some(polys[&(m, j)].clone()),
                _ if m <= j => None,
                _ if m == jp => Some(w.clone()),
                _ => Some(a_bound(m)),
            }
        };
        let mut next = BTreeMap::new();
        for l in jp + 1..=k {
            let mut q = polys[&(l, j)].add(&a_bound(l));
            for (idx, a) in &alpha.entries {
                if idx.len() > l {
                    continue;
                }
                let a = a.abs().to_f64();
                for comp in compositions(l, idx.len()) {
                    let mut term = QPoly::constant(k, a * nesting_factor(&comp));
                    let mut live = true;
                    for (&letter, &m) in idx.iter().zip(&comp) {
                        match slot(letter, m) {
                            Some(p) => term = term.mul(&p),
                            None => {
                                live = false;
                                break;
                            }
                        }
                    }
                    if live {
                        q = q.add(&term);
                    }
                }
            }
            next.insert((l, jp), q);
        }
        polys.extend(next);
    }
    Ok(QTable { d1, k, thetas, polys })
}

/// Record of one level of the radius recursion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelTrace {
    pub level: usize,
    /// Scale applied to the radii of the lower layers.
    pub t: f64,
    pub eps_hat: f64,
    /// Radii of the lower layers before scaling.
    pub eps_tilde: Vec<f64>,
    /// `Q_{m,m−1}` at the scaled lower radii.
    pub q_value: f64,
    /// Bound on `d_com^(m)` over the box.
    pub prefix_bound: f64,
    /// `prefix_bound − 2^{1−m}`, nonpositive.
    pub residual: f64,
}

/// Radii `ε₁…ε_k` of the box `∏ B^{d_i}(ε_i)` inside the unit ball.
///
/// Levels 1 and 2 are fixed (`ε₁ = 1/2`, `ε₂ = 1/(64d₁³)`). Level `m ≥ 3`
/// scales the lower radii by `T^i` so that the lower part of `d_com` uses
/// half of the budget `2^{1−m}`, then bisects for the top radius `ε̂_m`.
pub fn epsilon_constants(d1: usize, k: usize) -> Result<(Vec<f64>, Vec<LevelTrace>)> {
    if k == 0 || d1 == 0 {
        return Err(Error::UnsupportedParams("need d1 >= 1 and k >= 1".into()));
    }
    if k == 1 {
        let trace = LevelTrace {
            level: 1,
            t: 1.0,
            eps_hat: 1.0,
            eps_tilde: Vec::new(),
            q_value: 0.0,
            prefix_bound: 1.0,
            residual: 0.0,
        };
        return Ok((vec![1.0], vec![trace]));
    }
    let table = q_polynomials(d1, k)?;
    let d1f = d1 as f64;
    let mut eps = vec![0.5, 1.0 / (64.0 * d1f.powi(3))];
    let mut bound = eps[0] + layer_coefficient(2, d1) * eps[1].sqrt();
    let mut trace = vec![LevelTrace {
        level: 2,
        t: 1.0,
        eps_hat: eps[1],
        eps_tilde: vec![eps[0]],
        q_value: 0.0,
        prefix_bound: bound,
        residual: bound - 1.0,
    }];
    for m in 3..=k {
        let budget = 0.5f64.powi(m as i32 - 1);
        let cm = layer_coefficient(m, d1);
        let q = table.get(m, m - 1);
        let roots = |e: &[f64], t: f64| -> Vec<f64> {
            let mut b = vec![0.0; k];
            for (i, x) in e.iter().enumerate() {
                b[i] = t * x.powf(1.0 / (i + 1) as f64);
            }
            b
        };
        let q1 = q.eval(&roots(&eps, 1.0));
        let mut t = (budget / 2.0 / bound).min(1.0);
        if q1 > 0.0 {
            t = t.min(budget / 4.0 / (cm * q1.powf(1.0 / m as f64)));
        }
        while cm * q.eval(&roots(&eps, t)).powf(1.0 / m as f64) > budget / 4.0 {
            t *= 1.0 - 1e-12;
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::RecursionFailure { level: m, reason: format!("no positive scale T (got {t})") });
        }
        let qt = q.eval(&roots(&eps, t));
        let excess = |e: f64| cm * (e + qt).powf(1.0 / m as f64) - budget / 2.0;
        let eps_hat = if excess(1.0) <= 0.0 {
            1.0
        } else {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let r = excess(mid);
                if r <= 0.0 {
                    lo = mid;
                    if r > -1e-15 {
                        break;
                    }
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if !(eps_hat > 0.0) {
            return Err(Error::RecursionFailure { level: m, reason: "no positive top radius".into() });
        }
        let eps_tilde = eps.clone();
        for (i, e) in eps.iter_mut().enumerate() {
            *e *= t.powi(i as i32 + 1);
        }
        eps.push(eps_hat);
        bound = t * bound + cm * (eps_hat + qt).powf(1.0 / m as f64);
        trace.push(LevelTrace {
            level: m,
            t,
            eps_hat,
            eps_tilde,
            q_value: qt,
            prefix_bound: bound,
            residual: bound - budget,
        });
    }
    Ok((eps, trace))
}

/// `Σ_j 2^{j−1} · c_j · (ε_j + Q_{j,j−1}(ε₁, √ε₂, …))^{1/j}`: a bound on
/// the length of the synthesized path for any target in the box.
pub fn path_length_bound(eps: &[f64], d1: usize, table: &QTable) -> f64 {
    let k = eps.len();
    let b: Vec<f64> = eps.iter().enumerate().map(|(i, e)| e.powf(1.0 / (i + 1) as f64)).collect();
    (1..=k)
        .map(|j| {
            let q = if j >= 2 { table.get(j, j - 1).eval(&b) } else { 0.0 };
            2f64.powi(j as i32 - 1) * layer_coefficient(j, d1) * (eps[j - 1] + q).powf(1.0 / j as f64)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxConstants {
    pub dims: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub hausdorff_dim: usize,
    pub d: f64,
    pub c: f64,
    pub length_bound: f64,
    pub trace: Vec<LevelTrace>,
}

impl BoxConstants {
    pub fn step(&self) -> usize {
        self.dims.len()
    }

    pub fn to_json(&self) -> Value {
        let exact: Vec<Option<String>> = self
            .epsilon
            .iter()
            .map(|&e| {
                let r = crate::scalar::Rational::from_real(e);
                (r.denom().bits() <= 64).then(|| crate::scalar::format_rational(&r))
            })
            .collect();
        let trace: Vec<Value> = self
            .trace
            .iter()
            .map(|t| {
                json!({
                    "level": t.level,
                    "T": format_f64(t.t),
                    "eps_hat": format_f64(t.eps_hat),
                    "eps_tilde": t.eps_tilde.iter().map(|&x| format_f64(x)).collect::<Vec<_>>(),
                    "q_value": format_f64(t.q_value),
                    "prefix_bound": format_f64(t.prefix_bound),
                    "residual": format_f64(t.residual),
                })
            })
            .collect();
        json!({
            "dims": self.dims,
            "epsilon": self.epsilon.iter().map(|&x| format_f64(x)).collect::<Vec<_>>(),
            "epsilon_exact": exact,
            "Q": self.hausdorff_dim,
            "D": format_f64(self.d),
            "C": format_f64(self.c),
            "length_bound": format_f64(self.length_bound),
            "trace": trace,
        })
    }
}

/// `ε`, `Q = Σ i·d_i`, `D = ∏ ε_i^{d_i} ω_{d_i}` and `C = 2·D^{−1/Q}`.
pub fn box_constants(dims: &[usize]) -> Result<BoxConstants> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::Parse("dims must be a nonempty list of positive integers".into()));
    }
    let (d1, k) = (dims[0], dims.len());
    let (epsilon, trace) = epsilon_constants(d1, k)?;
    let length_bound = if k == 1 { epsilon[0] } else { path_length_bound(&epsilon, d1, &*q_polynomials(d1, k)?) };
    if length_bound > 1.0 {
        return Err(Error::Certificate(format!("box radii give path length bound {length_bound} > 1")));
    }
    let (hausdorff_dim, d, c) = global_constants(dims, &epsilon)?;
    Ok(BoxConstants { dims: dims.to_vec(), epsilon, hausdorff_dim, d, c, length_bound, trace })
}

/// `(Q, D, C)` for given radii.
pub fn global_constants(dims: &[usize], eps: &[f64]) -> Result<(usize, f64, f64)> {
    let q: usize = dims.iter().enumerate().map(|(i, d)| (i + 1) * d).sum();
    let d = popp_box_volume(eps, dims)?;
    let c = 2.0 * d.powf(-1.0 / q as f64);
    Ok((q, d, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn layer_bound_values() {
        let v = dcom_layer_bound(2, 2, std::f64::consts::FRAC_1_SQRT_2);
        assert!((v - 2.0 * 2f64.powf(1.5) * 2f64.powf(-0.25)).abs() < 1e-12);
        assert!((v - 4.7568).abs() < 1e-4);
        assert_eq!(dcom_layer_bound(3, 2, 0.0), 0.0);
        let nu = 0.3;
        assert!((dcom_layer_bound(2, 5, nu) - 2.0 * 5f64.powf(1.5) * nu.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn theta_values() {
        assert_eq!(theta(2, 2, 2, 0.5, 1.0), 512.0);
        assert!(theta(2, 3, 3, 0.5, 1.0) > theta(2, 2, 3, 0.5, 1.0));
    }

    #[test]
    fn nesting_factors() {
        assert_eq!(nesting_factor(&[1, 1]), 2.0);
        assert_eq!(nesting_factor(&[1, 2]), 2.0);
        assert_eq!(nesting_factor(&[2, 1, 1]), 2.0 * 4.0);
        assert_eq!(nesting_factor(&[3]), 1.0);
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
    }

    #[test]
    fn q_table_structure() {
        let t = q_polynomials(2, 2).unwrap();
        assert!(t.get(2, 1).is_zero());
        assert!(t.iter().all(|(_, p)| p.is_zero()));
        let t = q_polynomials(2, 3).unwrap();
        let q32 = t.get(3, 2);
        assert!(!q32.is_zero());
        assert_eq!(q32.constant_term(), 0.0);
        assert_eq!(q32.degrees(), vec![3]);
        assert!(q32.max_variable() <= 2);
        assert!(q32.min_coeff().unwrap() > 0.0);
        let again = build_q_table(2, 3).unwrap();
        assert_eq!(again.get(3, 2), q32);
    }

    #[test]
    fn two_step_radii() {
        let (eps, _) = epsilon_constants(2, 2).unwrap();
        assert_eq!(eps, vec![0.5, 1.0 / 512.0]);
        let c = box_constants(&[2, 1]).unwrap();
        assert_eq!(c.hausdorff_dim, 4);
        assert!((c.d - PI / 1024.0).abs() < 1e-18);
        assert!((c.c - 2.0 * (1024.0 / PI).powf(0.25)).abs() < 1e-12);
        assert!((c.c - 8.498).abs() < 1e-3);
        assert!(c.length_bound <= 1.0);
    }

    #[test]
    fn abelian_radii() {
        let c = box_constants(&[1]).unwrap();
        assert_eq!(c.epsilon, vec![1.0]);
        assert_eq!(c.c, 1.0);
        let c3 = box_constants(&[3]).unwrap();
        assert!((c3.d - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn engel_radii() {
        let c = box_constants(&[2, 1, 1]).unwrap();
        assert_eq!(c.hausdorff_dim, 7);
        assert_eq!(c.epsilon.len(), 3);
        assert!(c.epsilon.iter().all(|&e| e > 0.0));
        let last = c.trace.last().unwrap();
        assert!(last.residual <= 1e-12);
        assert!(c.length_bound <= 1.0);
    }
}
