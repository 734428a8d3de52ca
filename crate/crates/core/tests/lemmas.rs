#[path = "support/lemmas.rs"]
mod lemmas;

const DRAWS: usize = 200;

#[test]
fn bracket_of_layers_is_bounded() {
    lemmas::bracket_bound(DRAWS, 1).unwrap();
}

#[test]
fn combinatorial_distance_is_bounded() {
    lemmas::dcom_bound(DRAWS, 2).unwrap();
}

#[test]
fn single_set_errors_are_bounded() {
    lemmas::single_set_error_bound(DRAWS, 3).unwrap();
}

#[test]
fn prefix_errors_are_bounded() {
    lemmas::prefix_error_bound(DRAWS, 4).unwrap();
}
