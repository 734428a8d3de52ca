//! Randomized checks of the norm estimates; each returns a summary line or
//! the first violation.
#![allow(dead_code)]

use carnot_core::adjust::{adjust_to_layer_vector, adjust_tuple};
use carnot_core::algebra::{builtin_family, Family};
use carnot_core::certificates::{bracket_norm_factor, dcom_layer_bound, q_polynomials, theta_for};
use carnot_core::popp::{build_popp, PoppMetric};
use carnot_core::{GVec, GradedAlgebra, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const REL: f64 = 1e-9;

pub fn fixtures() -> Vec<(GradedAlgebra, PoppMetric)> {
    [Family::Heisenberg(1), Family::Heisenberg(2), Family::Engel, Family::FreeNilpotent { d: 2, k: 3 }]
        .iter()
        .map(|f| {
            let a = builtin_family(f).unwrap();
            let p = build_popp(&a).unwrap();
            (a, p)
        })
        .collect()
}

pub fn rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.random_range(-30i64..=30).into(), rng.random_range(1i64..=8).into())
}

pub fn layer_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<Rational> {
    loop {
        let v: Vec<Rational> = (0..d).map(|_| rational(rng)).collect();
        if v.iter().any(|c| *c != Rational::from_integer(0.into())) {
            return v;
        }
    }
}

/// Tracks the largest `lhs / rhs` over all draws.
struct Worst(f64, usize);

impl Worst {
    fn check(&mut self, lhs: f64, rhs: f64, what: impl FnOnce() -> String) -> Result<(), String> {
        self.1 += 1;
        if rhs > 0.0 {
            self.0 = self.0.max(lhs / rhs);
        }
        if lhs <= rhs * (1.0 + REL) + 1e-300 {
            Ok(())
        } else {
            Err(format!("{}: {lhs:e} > {rhs:e}", what()))
        }
    }

    fn summary(&self) -> String {
        format!("{} checks, max lhs/rhs = {:.3e}", self.1, self.0)
    }
}

/// `‖[Z_p,Z_q]‖ ≤ 2^{p∧q}‖Z_p‖‖Z_q‖`.
pub fn bracket_bound(draws: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst(0.0, 0);
    for (alg, popp) in fixtures() {
        let k = alg.step();
        for _ in 0..draws {
            let p = rng.random_range(1..k);
            let q = rng.random_range(1..=k - p);
            let zp = alg.inject(p, &layer_vector(&mut rng, alg.dims()[p - 1])).unwrap();
            let zq = alg.inject(q, &layer_vector(&mut rng, alg.dims()[q - 1])).unwrap();
            let br = alg.bracket(&zp, &zq).unwrap();
            let lhs = popp.norm_of_layer(&alg, &br, p + q).unwrap();
            let rhs = bracket_norm_factor(p, q)
                * popp.norm_of_layer(&alg, &zp, p).unwrap()
                * popp.norm_of_layer(&alg, &zq, q).unwrap();
            worst.check(lhs, rhs, || format!("{} p={p} q={q}", alg.name()))?;
        }
    }
    Ok(worst.summary())
}

/// `d_com ≤ j d₁^{(2j−1)/2} ν^{1/j}` for sets adjusted to random targets.
pub fn dcom_bound(draws: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst(0.0, 0);
    for (alg, popp) in fixtures() {
        for _ in 0..draws {
            let j = rng.random_range(1..=alg.step());
            let z = layer_vector(&mut rng, alg.dims()[j - 1]);
            let set = adjust_to_layer_vector(&alg, &popp, j, &z).map_err(|e| e.to_string())?;
            let nu = set.nu(&alg).value;
            let bound = if j == 1 { nu } else { dcom_layer_bound(j, alg.d1(), nu) };
            worst.check(set.d_com(&alg).value, bound, || format!("{} d_com j={j}", alg.name()))?;
        }
    }
    Ok(worst.summary())
}

/// `‖A_l‖ ≤ θ_j ν^{l/j}`.
pub fn single_set_error_bound(draws: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst(0.0, 0);
    for (alg, popp) in fixtures() {
        let k = alg.step();
        if k < 3 {
            continue;
        }
        for _ in 0..draws {
            let j = rng.random_range(2..k);
            let z = layer_vector(&mut rng, alg.dims()[j - 1]);
            let set = adjust_to_layer_vector(&alg, &popp, j, &z).map_err(|e| e.to_string())?;
            let nu = set.nu(&alg).value;
            let theta = theta_for(alg.d1(), j, k).map_err(|e| e.to_string())?;
            for (l, a) in set.error_vectors(&alg).map_err(|e| e.to_string())? {
                let lhs = popp.layer_norm(l, &a).unwrap();
                worst.check(lhs, theta * nu.powf(l as f64 / j as f64), || format!("{} A_{l} j={j}", alg.name()))?;
            }
        }
    }
    Ok(worst.summary())
}

/// `‖B_l^(j)‖ ≤ Q_{lj}(ν₁, √ν₂, …)` for the prefixes of random targets.
pub fn prefix_error_bound(draws: usize, seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst(0.0, 0);
    for (alg, popp) in fixtures() {
        let k = alg.step();
        let table = q_polynomials(alg.d1(), k).map_err(|e| e.to_string())?;
        for _ in 0..draws {
            let z = GVec((0..alg.dim()).map(|_| rational(&mut rng)).collect());
            let tuple = adjust_tuple(&alg, &popp, &z).map_err(|e| e.to_string())?;
            let b: Vec<f64> =
                (1..=k).map(|i| popp.norm_of_layer(&alg, &z, i).unwrap().powf(1.0 / i as f64)).collect();
            for l in 2..=k {
                for j in 1..l {
                    let lhs = popp.layer_norm(l, &tuple.error_vector(&alg, l, j).unwrap()).unwrap();
                    worst.check(lhs, table.get(l, j).eval(&b), || format!("{} B_{l}^({j})", alg.name()))?;
                }
            }
        }
    }
    Ok(worst.summary())
}
