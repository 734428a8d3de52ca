//! Independent oracles shared by the test suites.
#![allow(dead_code)]

use carnot_core::algebra::MultiIndex;
use carnot_core::bch::bch_product;
use carnot_core::{GVec, GradedAlgebra, Rational, Scalar};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<Rational>>;

pub fn zeros(n: usize) -> Mat {
    vec![vec![Rational::zero(); n]; n]
}

pub fn mat_add(a: &Mat, b: &Mat, s: &Rational) -> Mat {
    a.iter().zip(b).map(|(r, t)| r.iter().zip(t).map(|(x, y)| x + y * s).collect()).collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut c = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                c[i][j] += &a[i][k] * &b[k][j];
            }
        }
    }
    c
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rational::one();
    }
    m
}

pub fn expm(x: &Mat) -> Mat {
    let n = x.len();
    let (mut acc, mut pow) = (identity(n), identity(n));
    for i in 1..n {
        pow = mat_mul(&pow, x);
        acc = mat_add(&acc, &pow, &Rational::new(1.into(), (1..=i as i64).product::<i64>().into()));
    }
    acc
}

pub fn logm(m: &Mat) -> Mat {
    let n = m.len();
    let y = mat_add(m, &identity(n), &-Rational::one());
    let (mut acc, mut pow) = (zeros(n), identity(n));
    for i in 1..n {
        pow = mat_mul(&pow, &y);
        let sign = if i % 2 == 1 { 1 } else { -1 };
        acc = mat_add(&acc, &pow, &Rational::new(sign.into(), (i as i64).into()));
    }
    acc
}

/// `E_{ij}` sums giving a faithful representation of each fixture.
pub fn representation(alg: &GradedAlgebra) -> (usize, Vec<Vec<(usize, usize)>>) {
    match alg.dims() {
        [2, 1] => (3, vec![vec![(0, 1)], vec![(1, 2)], vec![(0, 2)]]),
        [2, 1, 1] => (4, vec![vec![(0, 1), (1, 2)], vec![(2, 3)], vec![(1, 3)], vec![(0, 3)]]),
        d => panic!("no representation for dims {d:?}"),
    }
}

pub fn to_matrix(alg: &GradedAlgebra, x: &GVec) -> Mat {
    let (n, gens) = representation(alg);
    let mut m = zeros(n);
    for (c, pos) in x.0.iter().zip(&gens) {
        for &(i, j) in pos {
            m[i][j] += c;
        }
    }
    m
}

pub fn from_matrix(alg: &GradedAlgebra, m: &Mat) -> GVec {
    let (_, gens) = representation(alg);
    // The listed entries of each generator are disjoint, so the first one
    // reads off the coefficient.
    let x = GVec(gens.iter().map(|pos| m[pos[0].0][pos[0].1].clone()).collect());
    assert_eq!(&to_matrix(alg, &x), m, "matrix is not in the image of the representation");
    x
}

/// Columns `[X_{i₁},[X_{i₂},…]]` of the layer-`j` bracket map, built by
/// bracketing basis vectors directly.
pub fn bracket_columns(alg: &GradedAlgebra, j: usize) -> Vec<Vec<f64>> {
    let range = alg.layer_range(j).unwrap();
    MultiIndex::new(alg.d1(), j)
        .map(|idx| {
            let xs: Vec<carnot_core::GVec> = idx.iter().map(|&i| alg.x(i + 1)).collect();
            alg.iterated_bracket(&xs).unwrap().0[range.clone()].iter().map(|c| c.to_f64()).collect()
        })
        .collect()
}

/// Minimal-norm solution of `M u = z` by Gram–Schmidt on the rows of `M`:
/// the minimizer is the unique solution in the row space.
pub fn least_squares_norm(cols: &[Vec<f64>], z: &[f64]) -> f64 {
    let rows: Vec<Vec<f64>> = (0..z.len()).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // Orthonormal basis q of the row space with rows = R q.
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r = vec![vec![0.0; z.len()]; z.len()];
    for (i, row) in rows.iter().enumerate() {
        let mut v = row.clone();
        for (k, qk) in q.iter().enumerate() {
            let c = dot(row, qk);
            r[i][k] = c;
            v.iter_mut().zip(qk).for_each(|(a, b)| *a -= c * b);
        }
        let n = dot(&v, &v).sqrt();
        r[i][q.len()] = n;
        q.push(v.into_iter().map(|a| a / n).collect());
    }
    // u = Σ a_k q_k with R a = z (lower triangular).
    let mut a = vec![0.0; z.len()];
    for i in 0..z.len() {
        let s: f64 = (0..i).map(|k| r[i][k] * a[k]).sum();
        a[i] = (z[i] - s) / r[i][i];
    }
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}


/// Greedy reduction modulo a lattice by left multiplication: `gens[i]` has
/// leading coordinate `i` equal to 1 and zeros before it, and is applied
/// until coordinate `i` lies in `[-1/2, 1/2)`. Returns the representative
/// and the number of moves made.
pub fn reduce_greedy(alg: &GradedAlgebra, gens: &[GVec<f64>], x: &GVec<f64>) -> (GVec<f64>, usize) {
    let mut x = x.clone();
    let mut moves = 0;
    for (i, g) in gens.iter().enumerate() {
        let inv = g.neg();
        while x.0[i] >= 0.5 {
            x = bch_product(alg, &inv, &x).unwrap();
            moves += 1;
        }
        while x.0[i] < -0.5 {
            x = bch_product(alg, g, &x).unwrap();
            moves += 1;
        }
    }
    (x, moves)
}

/// Lebesgue volume of the greedy fundamental domain, estimated from the
/// fraction of uniform samples in `∏[-w_i, w_i]` that need no reduction.
pub fn mc_fundamental_volume(
    alg: &GradedAlgebra,
    gens: &[GVec<f64>],
    half_width: &[f64],
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = 0usize;
    for _ in 0..samples {
        let x = GVec(half_width.iter().map(|w| rng.random_range(-w..*w)).collect());
        let (r, moves) = reduce_greedy(alg, gens, &x);
        assert!(r.0.iter().all(|c| (-0.5..0.5).contains(c)), "reduction left the domain: {r:?}");
        if moves == 0 {
            inside += 1;
        }
    }
    let box_vol: f64 = half_width.iter().map(|w| 2.0 * w).product();
    box_vol * inside as f64 / samples as f64
}
