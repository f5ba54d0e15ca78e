use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::levy_measure::{Atom, JumpModulator, LevyMeasure, SphericalPair};
use crate::matrix_decomp::riesz_matrix;
use crate::quadrature::QuadOptions;
use crate::symbol::{riesz_product, Provenance};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn riesz() -> Symbol {
    Symbol::quadratic_form(&riesz_matrix(2), None).unwrap()
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn pseudo_random(dim: usize, n: usize, length: f64, seed: u64) -> GridFunction {
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let values = (0..n.pow(dim as u32)).map(|_| c(next(), next())).collect();
    GridFunction::new(dim, n, length, values).unwrap()
}

#[test]
fn naive_dft_agrees_with_fft() {
    let g = pseudo_random(3, 4, 2.0, 7);
    let mut fast = g.values().to_vec();
    GridFft::new(3, 4).forward(&mut fast);
    for (k, want) in fast.iter().enumerate() {
        let xi = g.frequency(k);
        let mut sum = c(0.0, 0.0);
        for (j, v) in g.values().iter().enumerate() {
            // DFT phases are relative to the first grid point
            let x: Vec<f64> = g.point(j).iter().map(|t| t + 1.0).collect();
            let phase: f64 = xi.iter().zip(&x).map(|(a, b)| a * b).sum();
            sum += v * Complex64::from_polar(1.0, phase);
        }
        assert!((sum - want).norm() < 1e-12);
    }
}

#[test]
fn identity_round_trip() {
    let g = pseudo_random(2, 32, 5.0, 1);
    let out = apply(&Symbol::constant(2, c(1.0, 0.0)), &g).unwrap();
    assert!(max_diff(&g, &out) < 1e-13);
}

#[test]
fn riesz_product_on_single_wave() {
    let g = GridFunction::from_fn(2, 16, 2.0 * PI, |x| c((x[0] + x[1]).cos(), 0.0)).unwrap();
    let out = apply(&riesz(), &g).unwrap();
    assert!(max_diff(&out, &g.scale(c(-1.0, 0.0))) < 1e-13);
}

#[test]
fn plane_wave_picks_up_symbol_value() {
    // e^{i(k,x)} has transform supported at ξ = -k
    let g = GridFunction::from_fn(2, 16, 2.0 * PI, |x| Complex64::from_polar(1.0, 2.0 * x[0] - 3.0 * x[1])).unwrap();
    let s = Symbol::from_fn(2, Provenance::ClosedForm, 1.0, |xi| c(xi[0], xi[1]));
    let out = apply(&s, &g).unwrap();
    assert!(max_diff(&out, &g.scale(c(-2.0, 3.0))) < 1e-12);
}

#[test]
fn dimension_mismatch() {
    let g = pseudo_random(1, 8, 1.0, 2);
    assert!(matches!(apply(&riesz(), &g), Err(crate::Error::DimensionMismatch { .. })));
}

#[test]
fn general_symbol_with_unit_modulators_is_identity_off_zero() {
    let v = LevyMeasure::atomic(vec![Atom::new(vec![0.3, 0.1], 1.0), Atom::new(vec![-0.2, 0.45], 0.5)]).unwrap();
    let s = Symbol::general(Some(&v), &JumpModulator::one(), &SphericalPair::empty(), &QuadOptions::default())
        .unwrap();
    let g = pseudo_random(2, 16, 2.0 * PI, 3);
    let mult = Multiplier::for_grid(&s, &g).unwrap();
    let out = mult.apply(&g).unwrap();
    // the zero frequency is removed: the output is g minus its mean
    let mean = g.values().iter().sum::<Complex64>() / g.len() as f64;
    let centered = g.with_values(g.values().iter().map(|v| v - mean).collect()).unwrap();
    assert!(max_diff(&out, &centered) < 1e-13);
    assert!(mult.table()[1..].iter().all(|m| (m - c(1.0, 0.0)).norm() < 1e-14));
}

#[test]
fn gaussian_lp_norm() {
    for dim in [1, 2] {
        let w: f64 = 1.3;
        let g = GridFunction::from_fn(dim, 256, 40.0, |x| {
            c((-x.iter().map(|t| t * t).sum::<f64>() / (2.0 * w * w)).exp(), 0.0)
        })
        .unwrap();
        for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
            let want = (2.0 * PI * w * w / p).powf(dim as f64 / 2.0).powf(1.0 / p);
            assert!((lp_norm(&g, p) - want).abs() < 1e-6, "d {dim} p {p}");
        }
        assert_abs_diff_eq!(lp_norm(&g, f64::INFINITY), 1.0, epsilon = 1e-15);
    }
}

#[test]
fn indicator_norm() {
    // 4 of 16 cells set to 1 on a box of side 8: mass 4 · (1/2) = 2
    let mut values = vec![c(0.0, 0.0); 16];
    for v in &mut values[6..10] {
        *v = c(1.0, 0.0);
    }
    let g = GridFunction::new(1, 16, 8.0, values).unwrap();
    for p in [1.0, 2.0, 3.5] {
        assert_abs_diff_eq!(lp_norm(&g, p), 2f64.powf(1.0 / p), epsilon = 1e-14);
    }
}

#[test]
fn constant_symbol_ratio_is_one() {
    let s = Symbol::constant(2, c(1.0, 0.0));
    let search = NormSearch {
        n: 32,
        trials: 8,
        iterations: 20,
        ..NormSearch::for_dim(2)
    };
    for p in [1.5, 3.0] {
        let r = estimate_operator_norm(&s, p, &search).unwrap();
        assert_abs_diff_eq!(r.ratio, 1.0, epsilon = 1e-12);
        assert!(!r.discretization_suspect);
    }
}

#[test]
fn p_two_ratio_is_lattice_sup() {
    let s = Symbol::from_fn(2, Provenance::ClosedForm, 1.0, |xi| {
        c((xi[0] - 1.0).cos() * 0.7, (xi[1] * 0.3).sin() * 0.2)
    });
    let search = NormSearch {
        n: 32,
        trials: 8,
        iterations: 30,
        ..NormSearch::for_dim(2)
    };
    let r = estimate_operator_norm(&s, 2.0, &search).unwrap();
    assert!((r.ratio - r.symbol_sup).abs() < 1e-10);
    assert_eq!(r.bound, 1.0);
}

#[test]
fn riesz_product_bracket_on_small_grid() {
    let search = NormSearch {
        n: 64,
        trials: 16,
        iterations: 150,
        seed: 3,
        ..NormSearch::for_dim(2)
    };
    let r = estimate_operator_norm(&riesz(), 3.0, &search).unwrap();
    assert!(r.ratio >= 1.0 && r.ratio <= 2.0 + 1e-6, "ratio {}", r.ratio);
    assert_eq!(r.bound, 2.0);
    assert!(!r.discretization_suspect);
    assert!((r.output_norm / r.input_norm - r.ratio).abs() < 1e-9);
}

#[test]
fn estimate_is_reproducible() {
    let search = NormSearch {
        n: 32,
        trials: 6,
        iterations: 25,
        seed: 11,
        ..NormSearch::for_dim(2)
    };
    let a = estimate_operator_norm(&riesz(), 1.5, &search).unwrap();
    let b = estimate_operator_norm(&riesz(), 1.5, &search).unwrap();
    assert_eq!(a, b);
}

#[test]
fn invalid_exponent() {
    let search = NormSearch::for_dim(2);
    assert!(estimate_operator_norm(&riesz(), 1.0, &search).is_err());
}

#[test]
fn binary_round_trip() {
    let g = pseudo_random(2, 8, 3.5, 4);
    let mut buf = Vec::new();
    g.write_binary(&mut buf).unwrap();
    assert_eq!(buf.len(), 24 + 16 * 64);
    assert_eq!(&buf[..8], &2u64.to_le_bytes());
    let back = GridFunction::read_binary(&buf[..]).unwrap();
    assert_eq!(back, g);
    assert!(GridFunction::read_binary(&buf[..buf.len() - 1]).is_err());
}

#[test]
fn csv_round_trip() {
    for dim in [1, 2] {
        let g = pseudo_random(dim, 8, 3.5, 5);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = GridFunction::read_csv(&buf[..]).unwrap();
        assert_eq!(back.n(), 8);
        assert!((back.length() - 3.5).abs() < 1e-12);
        assert_eq!(back.values(), g.values());
    }
    assert!(pseudo_random(3, 4, 1.0, 6).write_csv(Vec::new()).is_err());
}

#[test]
fn grid_shape_is_validated() {
    assert!(GridFunction::zeros(2, 6, 1.0).is_err());
    assert!(GridFunction::zeros(2, 2, 1.0).is_err());
    assert!(GridFunction::new(1, 4, 1.0, vec![c(f64::NAN, 0.0); 4]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn apply_is_linear(s1 in 0u64..1000, s2 in 0u64..1000, a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let g = pseudo_random(2, 16, 6.0, s1);
        let h = pseudo_random(2, 16, 6.0, s2);
        let mult = Multiplier::for_grid(&riesz(), &g).unwrap();
        let lhs = mult.apply(&g.combine(c(a, 0.0), &h, c(0.0, b)).unwrap()).unwrap();
        let rhs = mult.apply(&g).unwrap().combine(c(a, 0.0), &mult.apply(&h).unwrap(), c(0.0, b)).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) < 1e-12);
    }

    #[test]
    fn plancherel_bound(seed in 0u64..1000) {
        let g = pseudo_random(2, 16, 6.0, seed);
        let out = apply(&riesz(), &g).unwrap();
        prop_assert!(lp_norm(&out, 2.0) <= lp_norm(&g, 2.0) * (1.0 + 1e-12));
    }

    #[test]
    fn lp_norm_is_homogeneous(seed in 0u64..1000, re in -5.0..5.0f64, im in -5.0..5.0f64, p in 1.0..6.0f64) {
        let g = pseudo_random(1, 32, 2.0, seed);
        let k = c(re, im);
        prop_assert!((lp_norm(&g.scale(k), p) - k.norm() * lp_norm(&g, p)).abs() < 1e-12 * (1.0 + k.norm() * lp_norm(&g, p)));
    }
}

#[test]
fn riesz_table_matches_closed_form() {
    let mult = Multiplier::new(&riesz(), 2, 8, 3.0).unwrap();
    for (idx, m) in mult.table().iter().enumerate() {
        let xi = crate::multiplier_apply::grid::lattice_frequency(2, 8, 3.0, idx);
        assert_eq!(*m, riesz_product(&xi));
    }
}
