use levymult::matrix_decomp::riesz_matrix;
use levymult::multiplier_apply::{estimate_operator_norm, NormSearch};
use levymult::symbol::Symbol;

#[test]
#[ignore = "the default search budget reaches about 1.36 at p = 3"]
fn riesz_norm_estimate_exceeds_1_8() {
    let s = Symbol::quadratic_form(&riesz_matrix(2), None).unwrap();
    let r = estimate_operator_norm(&s, 3.0, &NormSearch::for_dim(2)).unwrap();
    assert!(r.ratio > 1.8, "ratio {}", r.ratio);
}
