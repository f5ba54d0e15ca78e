use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::levy_measure::{Atom, RadialMeasure};
use crate::matrix_decomp::{decompose, riesz_matrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_xi(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-5.0..5.0)).collect()
}

#[test]
fn unit_modulator_gives_one() {
    let v = LevyMeasure::atomic(vec![Atom::new(vec![1.0, 0.2], 0.7), Atom::new(vec![-0.4, 1.5], 2.0)]).unwrap();
    let pair = SphericalPair::new(SpectralMeasure::coordinate_directions(2), vec![c(1.0, 0.0); 2], false).unwrap();
    let s = Symbol::general(Some(&v), &JumpModulator::one(), &pair, &QuadOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let xi = random_xi(&mut rng, 2);
        assert_abs_diff_eq!(s.eval(&xi).unwrap().re, 1.0, epsilon = 1e-13);
    }
    assert_eq!(s.eval(&[0.0, 0.0]).unwrap(), c(0.0, 0.0));
}

#[test]
fn zero_denominator_gives_zero() {
    // cos(ξ·z) = 1 on the lattice ξ ∈ 2πℤ
    let v = LevyMeasure::single_atom(vec![1.0], 1.0).unwrap();
    let s = Symbol::general(Some(&v), &JumpModulator::one(), &SphericalPair::empty(), &QuadOptions::default())
        .unwrap();
    assert_eq!(s.eval(&[2.0 * PI]).unwrap(), c(0.0, 0.0));
    assert_abs_diff_eq!(s.eval(&[1.0]).unwrap().re, 1.0, epsilon = 1e-15);
}

#[test]
fn dimension_mismatch_is_reported() {
    let s = Symbol::marcinkiewicz(1.0, 3, 0, &QuadOptions::default()).unwrap();
    assert_eq!(
        s.eval(&[1.0, 2.0]),
        Err(Error::DimensionMismatch { expected: 3, found: 2 })
    );
}

#[test]
fn riesz_matrix_routes_agree() {
    let a = riesz_matrix(2);
    let direct = Symbol::quadratic_form(&a, None).unwrap();
    let dec = decompose(&a, 1.0).unwrap();
    let via_pair = dec.symbol(&QuadOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let xi = random_xi(&mut rng, 2);
        let want = riesz_product(&xi);
        assert_eq!(direct.eval(&xi).unwrap(), want);
        assert!((via_pair.eval(&xi).unwrap() - want).norm() < 1e-10);
    }
}

#[test]
fn asymmetric_matrix_is_rejected() {
    let mut a = riesz_matrix(2);
    a[(0, 1)] = c(0.5, 0.0);
    assert!(matches!(Symbol::quadratic_form(&a, None), Err(Error::AsymmetricInput(_))));
}

#[test]
fn quadratic_form_with_weight_matrix() {
    let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let b = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
    let s = Symbol::quadratic_form(&a, Some(&b)).unwrap();
    let v = s.eval(&[1.0, 1.0]).unwrap();
    assert!((v - c(0.2, 0.2)).norm() < 1e-15);
}

fn harmonic_circle(arcs: usize, order: f64) -> SphericalPair {
    SphericalPair::uniform_circle(arcs, 1.0, false, |s| Complex64::from_polar(1.0, -order * s)).unwrap()
}

#[test]
fn stable_circle_matches_closed_form() {
    let pair = harmonic_circle(4096, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = QuadOptions::default();
    for alpha in [0.5, 1.0, 1.5] {
        let s = Symbol::stable(alpha, &pair, &opts).unwrap();
        for _ in 0..10 {
            let xi = random_xi(&mut rng, 2);
            let err = (s.eval(&xi).unwrap() - stable_circle(alpha, &xi)).norm();
            assert!(err < 1e-6, "alpha {alpha}: {err}");
        }
    }
}

#[test]
fn stable_symbol_equals_general_symbol_of_stable_measure() {
    let spectral = SpectralMeasure::atoms(vec![
        Atom::new(vec![1.0, 0.0], 0.4),
        Atom::new(vec![0.6, -0.8], 1.1),
        Atom::new(vec![0.0, 1.0], 0.7),
    ])
    .unwrap();
    let values = vec![c(0.3, -0.4), c(-1.0, 0.0), c(0.0, 0.9)];
    let pair = SphericalPair::new(spectral.clone(), values.clone(), false).unwrap();
    let opts = QuadOptions::default();
    for alpha in [0.5, 1.2, 1.9] {
        let direct = Symbol::stable(alpha, &pair, &opts).unwrap();
        let v = LevyMeasure::stable(alpha, spectral.clone()).unwrap();
        let phi = JumpModulator::angular(values.clone()).unwrap();
        let general = Symbol::general(Some(&v), &phi, &SphericalPair::empty(), &opts).unwrap();
        for xi in [[0.3, 2.0], [-4.0, 1.0]] {
            let err = (direct.eval(&xi).unwrap() - general.eval(&xi).unwrap()).norm();
            assert!(err < 1e-9, "alpha {alpha}: {err}");
        }
    }
}

#[test]
fn beta_identity_holds() {
    for alpha in [0.5, 1.0, 1.5] {
        let b = beta_identity(alpha, &QuadOptions::with_tolerances(1e-13, 1e-15)).unwrap();
        assert!(b.error() < 1e-9, "alpha {alpha}: {}", b.error());
        assert_abs_diff_eq!(b.ratio(), alpha / (alpha + 2.0), epsilon = 1e-9);
    }
}

#[test]
fn marcinkiewicz_matches_closed_form() {
    let opts = QuadOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for alpha in [0.7, 1.0, 1.8] {
        for index in 0..3 {
            let s = Symbol::marcinkiewicz(alpha, 3, index, &opts).unwrap();
            for _ in 0..10 {
                let xi = random_xi(&mut rng, 3);
                let want = marcinkiewicz(alpha, index, &xi);
                assert_abs_diff_eq!(s.eval(&xi).unwrap().re, want, epsilon = 1e-14);
            }
        }
    }
}

#[test]
fn tempered_coordinates_match_closed_form() {
    let opts = QuadOptions::default();
    for index in 0..2 {
        let values = (0..2).map(|k| c(if k == index { 1.0 } else { 0.0 }, 0.0)).collect();
        let pair = SphericalPair::new(SpectralMeasure::coordinate_directions(2), values, false).unwrap();
        let s = Symbol::tempered(&pair, &opts).unwrap();
        for xi in [[0.3f64, 2.0], [-4.0, 1e-3], [0.0, 1.0], [1e-200, 5.0]] {
            let want = tempered_coordinate(index, &[if xi[0].abs() < LOG_KERNEL_ZERO { 0.0 } else { xi[0] }, xi[1]]);
            assert_abs_diff_eq!(s.eval(&xi).unwrap().re, want, epsilon = 1e-14);
        }
        assert_eq!(s.eval(&[0.0, 0.0]).unwrap(), c(0.0, 0.0));
    }
}

#[test]
fn laplace_identity() {
    let opts = QuadOptions::with_tolerances(1e-12, 1e-14);
    for s in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let got = laplace_one_minus_cos_over_x(s, &opts).unwrap();
        let want = 0.5 * (1.0 / (s * s)).ln_1p();
        assert!((got - want).abs() < 1e-8, "s {s}: {got} vs {want}");
    }
}

#[test]
fn exp_over_r_measure_gives_log_one_plus_square() {
    // ∫₀^∞ (1 - cos(sr)) e^{-r}/r dr = ½ ln(1 + s²)
    let spectral = SpectralMeasure::atoms(vec![Atom::new(vec![1.0, 0.0], 1.0), Atom::new(vec![0.0, 1.0], 2.0)])
        .unwrap();
    let values = vec![c(1.0, 0.0), c(0.0, -1.0)];
    let v = LevyMeasure::polar(RadialMeasure::ExpOverR, spectral).unwrap();
    let opts = QuadOptions::default();
    let s = Symbol::general(Some(&v), &JumpModulator::angular(values.clone()).unwrap(), &SphericalPair::empty(), &opts)
        .unwrap();
    for xi in [[0.5f64, 2.0], [3.0, -0.1]] {
        let w1 = 0.5 * (xi[0] * xi[0]).ln_1p();
        let w2 = 2.0 * 0.5 * (xi[1] * xi[1]).ln_1p();
        let want = (values[0] * w1 + values[1] * w2) / (w1 + w2);
        assert!((s.eval(&xi).unwrap() - want).norm() < 1e-9);
    }
}

#[test]
fn ratio_of_two_atom_measures() {
    let z1 = vec![1.0, 0.0];
    let z2 = vec![0.3, 0.9];
    let nu2 = LevyMeasure::atomic(vec![Atom::new(z1.clone(), 1.0), Atom::new(z2.clone(), 1.0)]).unwrap();
    let nu1 = LevyMeasure::atomic(vec![Atom::new(z1.clone(), 1.0)]).unwrap();
    let opts = QuadOptions::default();
    let s = Symbol::ratio(&nu1, &nu2, &opts).unwrap();
    let xi = [0.8, -1.3];
    let a = 1.0 - (0.8f64).cos();
    let b = 1.0 - (0.24f64 - 1.17).cos();
    assert_abs_diff_eq!(s.eval(&xi).unwrap().re, a / (a + b), epsilon = 1e-14);

    let half = LevyMeasure::atomic(vec![Atom::new(z1.clone(), 0.5), Atom::new(z2, 0.5)]).unwrap();
    let s = Symbol::ratio(&half, &nu2, &opts).unwrap();
    assert_abs_diff_eq!(s.eval(&xi).unwrap().re, 0.5, epsilon = 1e-15);

    let heavy = LevyMeasure::atomic(vec![Atom::new(z1, 1.5)]).unwrap();
    assert!(matches!(Symbol::ratio(&heavy, &nu2, &opts), Err(Error::DominationViolated(_))));
}

#[test]
fn truncated_single_atom() {
    let v = LevyMeasure::single_atom(vec![0.5, 0.5], 2.0).unwrap();
    let phi = JumpModulator::constant(c(0.0, 0.8)).unwrap();
    let u = 0.3;
    let s = Symbol::truncated(&v, &phi, u, &QuadOptions::default()).unwrap();
    let xi = [1.0, 2.0];
    let k = 1.0 - (1.5f64).cos();
    let want = c(0.0, 0.8) * (1.0 - (-2.0 * u * 2.0 * k).exp());
    assert!((s.eval(&xi).unwrap() - want).norm() < 1e-15);
    assert!(matches!(s.provenance(), Provenance::Truncated { .. }));
}

#[test]
fn sphere_limit_is_second_order() {
    let pair = harmonic_circle(64, 2.0);
    let xis: Vec<Vec<f64>> = circle_points(7, 1.3);
    let r = sphere_limit_check(&pair, &[1e-1, 1e-2, 1e-3], &xis, &QuadOptions::default()).unwrap();
    let order = r.order.unwrap();
    assert!((1.9..=2.1).contains(&order), "order {order}");
    assert!(r.decreasing);
}

#[test]
fn config_round_trip() {
    let text = r#"{"kind": "quadratic_form", "a": {"re": [[0, -1], [-1, 0]]}}"#;
    let cfg = SymbolConfig::from_json(text).unwrap();
    let s = cfg.build(&QuadOptions::default()).unwrap();
    assert_eq!(s.eval(&[1.0, 1.0]).unwrap(), c(-1.0, 0.0));
    let again: SymbolConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(again, cfg);

    let text = r#"{"kind": "decomposition", "a": {"re": [[1, 0], [0, -1]], "im": [[0, -1], [-1, 0]]},
                   "operator_norm_bound": 1.5}"#;
    let s = SymbolConfig::from_json(text).unwrap().build(&QuadOptions::default()).unwrap();
    let xi = [0.4, -0.9];
    assert!((s.eval(&xi).unwrap() - beurling_ahlfors(&xi)).norm() < 1e-12);

    assert!(SymbolConfig::from_json(r#"{"kind": "nope"}"#).is_err());
}

fn unit_disc() -> impl Strategy<Value = Complex64> {
    (0.0..=1.0f64, 0.0..(2.0 * PI)).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn atomic_triple() -> impl Strategy<Value = (LevyMeasure, JumpModulator, SphericalPair)> {
    let atom = (prop::collection::vec(-3.0..3.0f64, 2), 0.01..5.0f64, unit_disc());
    let dir = (0.0..(2.0 * PI), 0.0..3.0f64, unit_disc());
    (prop::collection::vec(atom, 1..6), prop::collection::vec(dir, 0..4)).prop_filter_map(
        "origin atom",
        |(atoms, dirs)| {
            if atoms.iter().any(|(z, _, _)| z[0] == 0.0 && z[1] == 0.0) {
                return None;
            }
            let v = LevyMeasure::atomic(atoms.iter().map(|(z, m, _)| Atom::new(z.clone(), *m)).collect()).ok()?;
            let phi = JumpModulator::table(atoms.iter().map(|a| a.2).collect()).ok()?;
            let spectral = SpectralMeasure::atoms(
                dirs.iter().map(|(t, m, _)| Atom::new(vec![t.cos(), t.sin()], *m)).collect(),
            )
            .ok()?;
            let pair = SphericalPair::new(spectral, dirs.iter().map(|d| d.2).collect(), false).ok()?;
            Some((v, phi, pair))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn general_symbol_is_bounded((v, phi, pair) in atomic_triple(), x in -20.0..20.0f64, y in -20.0..20.0f64) {
        let s = Symbol::general(Some(&v), &phi, &pair, &QuadOptions::default()).unwrap();
        let m = s.eval(&[x, y]).unwrap();
        prop_assert!(m.norm() <= 1.0 + 1e-12);
        let p = s.pieces(&[x, y]).unwrap();
        prop_assert!(p.denominator >= 0.0);
        prop_assert!(p.numerator.norm() <= p.denominator * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn symbol_is_even((v, phi, pair) in atomic_triple(), x in -20.0..20.0f64, y in -20.0..20.0f64) {
        let s = Symbol::general(Some(&v), &phi, &pair, &QuadOptions::default()).unwrap();
        prop_assert_eq!(s.eval(&[x, y]).unwrap(), s.eval(&[-x, -y]).unwrap());
    }

    #[test]
    fn ratio_lies_in_unit_interval(masses in prop::collection::vec((0.01..3.0f64, 0.0..=1.0f64), 1..6),
                                   x in -10.0..10.0f64) {
        let nu2 = LevyMeasure::atomic(masses.iter().enumerate()
            .map(|(k, (m, _))| Atom::new(vec![k as f64 + 0.5], *m)).collect()).unwrap();
        let nu1 = LevyMeasure::atomic(masses.iter().enumerate()
            .map(|(k, (m, f))| Atom::new(vec![k as f64 + 0.5], m * f)).collect()).unwrap();
        let s = Symbol::ratio(&nu1, &nu2, &QuadOptions::default()).unwrap();
        let m = s.eval(&[x]).unwrap();
        prop_assert!(m.im == 0.0 && (0.0..=1.0).contains(&m.re));
    }
}
