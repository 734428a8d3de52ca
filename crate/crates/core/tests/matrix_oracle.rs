//! BCH products against exp/log of strictly upper triangular matrices.

use carnot_core::algebra::{builtin_family, Family};
use carnot_core::bch::{bch_product, product_fold};
use carnot_core::{GVec, Rational};
use num_traits::One;
use proptest::prelude::*;

#[path = "support/oracles.rs"]
mod oracles;
use oracles::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn element(n: usize) -> impl Strategy<Value = GVec> {
    prop::collection::vec(rational(), n).prop_map(GVec)
}

#[test]
fn representations_preserve_brackets() {
    for fam in [Family::Heisenberg(1), Family::Engel] {
        let alg = builtin_family(&fam).unwrap();
        let n = alg.dim();
        for a in 1..=n {
            for b in 1..=n {
                let (x, y) = (to_matrix(&alg, &alg.x(a)), to_matrix(&alg, &alg.x(b)));
                let comm = mat_add(&mat_mul(&x, &y), &mat_mul(&y, &x), &-Rational::one());
                let br = alg.bracket(&alg.x(a), &alg.x(b)).unwrap();
                assert_eq!(comm, to_matrix(&alg, &br), "[X{a}, X{b}] in {fam}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn heisenberg_product_matches_matrices(x in element(3), y in element(3)) {
        let h = builtin_family(&Family::Heisenberg(1)).unwrap();
        let m = mat_mul(&expm(&to_matrix(&h, &x)), &expm(&to_matrix(&h, &y)));
        prop_assert_eq!(bch_product(&h, &x, &y).unwrap(), from_matrix(&h, &logm(&m)));
    }

    #[test]
    fn engel_product_matches_matrices(x in element(4), y in element(4)) {
        let e = builtin_family(&Family::Engel).unwrap();
        let m = mat_mul(&expm(&to_matrix(&e, &x)), &expm(&to_matrix(&e, &y)));
        prop_assert_eq!(bch_product(&e, &x, &y).unwrap(), from_matrix(&e, &logm(&m)));
    }

    #[test]
    fn heisenberg_associative(x in element(3), y in element(3), z in element(3)) {
        let h = builtin_family(&Family::Heisenberg(1)).unwrap();
        let l = bch_product(&h, &bch_product(&h, &x, &y).unwrap(), &z).unwrap();
        let r = bch_product(&h, &x, &bch_product(&h, &y, &z).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn engel_associative(x in element(4), y in element(4), z in element(4)) {
        let e = builtin_family(&Family::Engel).unwrap();
        let l = bch_product(&e, &bch_product(&e, &x, &y).unwrap(), &z).unwrap();
        let r = bch_product(&e, &x, &bch_product(&e, &y, &z).unwrap()).unwrap();
        prop_assert_eq!(&l, &r);
        let m = mat_mul(&mat_mul(&expm(&to_matrix(&e, &x)), &expm(&to_matrix(&e, &y))), &expm(&to_matrix(&e, &z)));
        prop_assert_eq!(product_fold(&e, &[x, y, z]).unwrap(), from_matrix(&e, &logm(&m)));
    }
}
