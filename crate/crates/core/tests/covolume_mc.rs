use carnot_core::bch::group_commutator;
use carnot_core::lattice::integer_heisenberg;
use carnot_core::popp::build_popp;
use carnot_core::GVec;

#[path = "support/oracles.rs"]
mod oracles;

#[test]
fn heisenberg_covolume_matches_sampled_domain() {
    let lat = integer_heisenberg().unwrap();
    let alg = lat.algebra();
    let popp = build_popp(alg).unwrap();
    let a: GVec<f64> = lat.generators()[0].to_f64();
    let b: GVec<f64> = lat.generators()[1].to_f64();
    let c = group_commutator(alg, &a, &b).unwrap();
    let lebesgue = oracles::mc_fundamental_volume(alg, &[a, b, c], &[1.0, 1.0, 1.5], 1_000_000, 9);
    let estimate = lebesgue * popp.density();
    let exact = lat.covolume(&popp).unwrap();
    assert!((estimate - exact).abs() <= 0.05 * exact, "{estimate} vs {exact}");
}
