mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabilcert_core::blocks::{block_matrix, full_row_block, lower_bound_p, BlockMatrix};
use stabilcert_core::certifier::{
    certify_condition_iii, stability_threshold, toeplitz_block_certify, Verdict,
};
use stabilcert_core::geometry::{cutoff_psi0, relative_separation, CutoffMultiplier, IndexSet, WindowOp};
use stabilcert_core::operator::{Coeffs, OperatorSpec, Rational};
use stabilcert_core::oracle::{certified_symbol_analysis, symbol_eval, SymbolVerdict};
use stabilcert_core::scalar::{lp_norm, PNorm, Scalar};

use common::*;

fn p_norm() -> impl Strategy<Value = PNorm> {
    prop_oneof![Just(PNorm::One), Just(PNorm::Two), Just(PNorm::Inf)]
}

fn small_block(seed: u64) -> BlockMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.gen_range(1..7);
    let cols = rng.gen_range(1..6);
    random_real_block(&mut rng, rows, cols)
}

fn bound(m: &BlockMatrix, p: PNorm) -> f64 {
    lower_bound_p(m, p).unwrap().lower_bound
}

/// Real Toeplitz or real periodic spec with a dominant diagonal, so most
/// draws certify.
fn dominant_spec(seed: u64) -> OperatorSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Coeffs::new();
    let main = rng.gen_range(3.0..6.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    c.insert(0, re(main));
    for _ in 0..rng.gen_range(1..3) {
        let k = rng.gen_range(-2..=2i64);
        if k != 0 {
            c.insert(k, re(rng.gen_range(-0.6..0.6)));
        }
    }
    if rng.gen_bool(0.3) {
        let q = rng.gen_range(1..4);
        let weights = (0..q).map(|_| re(rng.gen_range(0.8..1.2))).collect();
        OperatorSpec::periodic(c, weights).unwrap()
    } else {
        OperatorSpec::Toeplitz { coeffs: c }
    }
}

fn band_toeplitz(seed: u64) -> (OperatorSpec, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=2u64);
    let mut c = Coeffs::new();
    for j in 0..=k as i64 {
        c.insert(j, re(rng.gen_range(-3.0..3.0)));
    }
    c.insert(0, re(rng.gen_range(3.0..6.0)));
    (OperatorSpec::Toeplitz { coeffs: c }, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn window_is_idempotent_and_open(lo in -8i64..0, len in 1i64..16, y in -6.0f64..6.0, n in 1u64..5) {
        let set = IndexSet::integer_window(lo, lo + len);
        let c: Vec<f64> = (0..set.len()).map(|i| 1.0 + i as f64).collect();
        let w = WindowOp::new(vec![y], n);
        let once = w.apply(&set, &c);
        prop_assert_eq!(&w.apply(&set, &once), &once);
        for (x, v) in set.coords().iter().zip(&once) {
            if (x - y).abs() >= n as f64 {
                prop_assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn cutoff_weights(x in -20.0f64..20.0, t in -3i64..3, n in 1u64..6) {
        let center = (t * n as i64) as f64;
        let w = CutoffMultiplier::new(vec![center], n).weight(&[x]);
        prop_assert!((0.0..=1.0).contains(&w));
        let dist = (x - center).abs();
        if dist <= n as f64 / 2.0 {
            prop_assert_eq!(w, 1.0);
        }
        if dist >= n as f64 {
            prop_assert_eq!(w, 0.0);
        }
    }

    #[test]
    fn psi0_lipschitz_and_sandwich(x in prop::collection::vec(-1.5f64..1.5, 1..=2), dy in prop::collection::vec(-0.3f64..0.3, 2)) {
        let d = x.len();
        let y: Vec<f64> = x.iter().zip(&dy).map(|(a, b)| a + b).collect();
        let dist = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!((cutoff_psi0(&x) - cutoff_psi0(&y)).abs() <= 2.0 * d as f64 * dist + 1e-15);
        let inner = x.iter().all(|v| v.abs() <= 0.5);
        let outer = x.iter().all(|v| v.abs() < 1.0);
        let psi = cutoff_psi0(&x);
        let (lo, hi) = (f64::from(u8::from(inner)), f64::from(u8::from(outer)));
        prop_assert!(lo <= psi && psi <= hi);
    }

    #[test]
    fn integer_window_separation(l in 0i64..30) {
        let pts: Vec<Vec<f64>> = (-l..=l).map(|k| vec![k as f64]).collect();
        prop_assert_eq!(relative_separation(&pts, 1).unwrap(), 1.0);
    }

    #[test]
    fn partition_bounds(seed in any::<u64>(), n in 1u64..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = IndexSet::integer_window(-12, 12);
        let c = random_vector(&mut rng, set.len());
        for p in [1.0, 1.5, 2.0, 3.0] {
            let norm = lp_norm(&c, p);
            let narrow = partition_norm(&set, &c, n, n, p);
            prop_assert!(norm <= narrow * (1.0 + 1e-12) && narrow <= 2f64.powf(1.0 / p) * norm * (1.0 + 1e-12));
            let wide = partition_norm(&set, &c, n, 4 * n, p);
            prop_assert!(4f64.powf(1.0 / p) * norm <= wide * (1.0 + 1e-12));
            prop_assert!(wide <= (5.0 + 2f64.powf(1.0 - p)).powf(1.0 / p) * norm * (1.0 + 1e-12));
        }
        let sup = lp_norm(&c, f64::INFINITY);
        prop_assert_eq!(partition_norm(&set, &c, n, n, f64::INFINITY), sup);
        prop_assert_eq!(partition_norm(&set, &c, n, 4 * n, f64::INFINITY), sup);
    }

    #[test]
    fn profile_sums_to_c_norm(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = if seed % 3 == 0 { random_dense(&mut rng) } else { random_lattice(&mut rng) };
        prop_assert_eq!(spec.diagonal_profile().total(), spec.c_norm());
        prop_assert!(spec.diagonal_profile().iter().all(|(_, v)| v >= 0.0));
    }

    #[test]
    fn truncation_is_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_lattice(&mut rng);
        let mut last = 0.0;
        for i in 0..=12 {
            let s = i as f64 * 0.5;
            let v = spec.truncate(s).c_norm();
            prop_assert!(v >= last);
            last = v;
        }
        let beyond = spec.support_radius() + 1.0;
        prop_assert_eq!(spec.truncate(beyond).c_norm(), spec.c_norm());
        prop_assert_eq!(spec.tail_beyond(beyond).c_norm(), 0.0);
    }

    #[test]
    fn tradeoff_decays(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_lattice(&mut rng);
        let r = spec.support_radius();
        let c = r * spec.c_norm();
        for n in [8u64, 16, 64, 256] {
            let t = spec.truncation_tradeoff(n, 1).unwrap().value;
            prop_assert!(t <= c / n as f64 + 1e-12, "N={} value {} > {}", n, t, c / n as f64);
        }
    }

    #[test]
    fn twisted_periodicity(seed in any::<u64>(), q in 1i64..7, j in -20i64..20, dj in -3i64..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rng.gen_range(0..q);
        let spec = OperatorSpec::twisted(random_coeffs(&mut rng, 3, true), Rational::new(r, q).unwrap());
        let (a, b) = (j as f64, (j + dj) as f64);
        let qf = q as f64;
        prop_assert_eq!(spec.entry_at(a + qf, b + qf).unwrap(), spec.entry_at(a, b).unwrap());
    }

    #[test]
    fn bound_is_sound_and_tight(seed in any::<u64>(), p in p_norm()) {
        let m = small_block(seed);
        let rep = lower_bound_p(&m, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..1000 {
            let c = random_vector(&mut rng, m.ncols());
            prop_assert!(rep.lower_bound <= m.gain(&c, p.as_f64()) + 1e-12);
        }
        let w = rep.witness.expect("exact methods return a witness");
        prop_assert!((m.gain(&w, p.as_f64()) - rep.lower_bound).abs() <= 1e-8);
    }

    #[test]
    fn gram_matches_power_iteration(seed in any::<u64>()) {
        let m = small_block(seed);
        let b = bound(&m, PNorm::Two);
        prop_assert!((b * b - power_iteration_min_gram(&m)).abs() <= 1e-10);
    }

    #[test]
    fn monotone_under_rows_and_columns(seed in any::<u64>(), p in p_norm()) {
        let m = small_block(seed);
        let base = bound(&m, p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let row = random_vector(&mut rng, m.ncols());
        prop_assert!(bound(&m.with_row(99.0, &row), p) >= base - 1e-12);
        if m.ncols() > 1 {
            let j = rng.gen_range(0..m.ncols());
            prop_assert!(bound(&m.without_col(j), p) >= base - 1e-12);
        }
    }

    #[test]
    fn scaling_and_zero_padding(seed in any::<u64>(), p in p_norm(), t in -4.0f64..4.0) {
        let m = small_block(seed);
        let base = bound(&m, p);
        let scaled = bound(&m.scaled(Complex64::new(t, 0.0)), p);
        prop_assert!((scaled - t.abs() * base).abs() <= 1e-10 * (1.0 + base));
        let zero = vec![Scalar::default(); m.ncols()];
        let padded = m.with_row(98.0, &zero).with_row(-98.0, &zero);
        prop_assert!((bound(&padded, p) - base).abs() <= 1e-10 * (1.0 + base));
    }

    #[test]
    fn twisted_blocks_repeat(seed in any::<u64>(), n in 2u64..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = rng.gen_range(1..5i64);
        let spec = OperatorSpec::twisted(random_coeffs(&mut rng, 2, false), Rational::new(rng.gen_range(0..q), q).unwrap());
        let c = (n as i64 * rng.gen_range(-3..3)) as f64;
        let a = block_matrix(&spec, c, n).unwrap();
        let b = block_matrix(&spec, c + (q as u64 * n) as f64, n).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            prop_assert!((x - y).norm() <= 1e-15);
        }
    }

    #[test]
    fn symbol_is_periodic(seed in any::<u64>(), xi in -10.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_coeffs(&mut rng, 4, true);
        let a = symbol_eval(&c, xi);
        let b = symbol_eval(&c, xi + 2.0 * std::f64::consts::PI);
        prop_assert!((a - b).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificate_is_sound(seed in any::<u64>(), p in p_norm(), n0 in prop_oneof![Just(4u64), Just(8)]) {
        let spec = dominant_spec(seed);
        let cert = certify_condition_iii(&spec, p, n0).unwrap();
        prop_assume!(cert.verdict == Verdict::CertifiedStable);
        let half = 2 * n0 as i64;
        let (cols, rows) = apply_sets(&spec, -half, half);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
        for _ in 0..1000 {
            let c = random_vector(&mut rng, cols.len());
            let ac = spec.apply(&cols, &c, &rows).unwrap();
            let (lhs, norm) = (lp_norm(&ac, p.as_f64()), lp_norm(&c, p.as_f64()));
            prop_assert!(lhs >= (cert.c1_lower - 1e-9) * norm);
            prop_assert!(lhs <= (cert.c2_upper + 1e-9) * norm);
        }
    }

    #[test]
    fn threshold_decreases(seed in any::<u64>(), p in p_norm()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_lattice(&mut rng);
        let start = spec.support_radius().ceil() as u64 + 1;
        let mut last = f64::INFINITY;
        for n in start..start + 40 {
            let t = stability_threshold(&spec, p, n).unwrap().value;
            prop_assert!(t <= last * (1.0 + 1e-12));
            last = t;
        }
        let far = stability_threshold(&spec, p, 1 << 20).unwrap().value;
        prop_assert!(far <= 1e-4 * (1.0 + spec.c_norm()));
    }

    #[test]
    fn band_routes_agree_on_alpha(seed in any::<u64>(), p in p_norm(), extra in 1u64..6) {
        let (spec, k) = band_toeplitz(seed);
        let n0 = k + extra;
        let band = toeplitz_block_certify(&spec, p, n0).unwrap();
        let general = certify_condition_iii(&spec, p, n0).unwrap();
        if band.alpha_exact && general.alpha_exact {
            prop_assert!((band.alpha - general.alpha).abs() <= 1e-10);
        }
        // the band threshold is never smaller, so a band certificate implies a general one
        prop_assert!(band.threshold >= general.threshold - 1e-12);
        if band.verdict == Verdict::CertifiedStable {
            prop_assert_eq!(general.verdict, Verdict::CertifiedStable);
        }
        if (band.threshold - general.threshold).abs() <= 1e-12 {
            prop_assert_eq!(band.verdict, general.verdict);
        }
    }
}

/// The full row block at the origin is the block used at every center of a
/// Toeplitz spec, so its bound is the `α` of both routes.
#[test]
fn band_alpha_is_full_row_block() {
    let spec = OperatorSpec::toeplitz([(0, 4.0), (1, -1.5)]);
    for p in PNorm::ALL {
        let cert = toeplitz_block_certify(&spec, p, 6).unwrap();
        let m = full_row_block(&spec, 0.0, 6).unwrap();
        assert!((bound(&m, p) - cert.alpha).abs() <= 1e-12);
    }
}

#[test]
fn symbol_bound_holds_on_fine_grid() {
    use rayon::prelude::*;
    const GRID: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for _ in 0..200 {
        let spec = random_integer_toeplitz(&mut rng);
        let coeffs = spec.coeffs().unwrap();
        let a = certified_symbol_analysis(coeffs);
        if a.verdict != SymbolVerdict::CertifiedStable {
            continue;
        }
        let step = 2.0 * std::f64::consts::PI / GRID as f64;
        let min = (0..GRID)
            .into_par_iter()
            .map(|i| symbol_eval(coeffs, i as f64 * step).norm())
            .reduce(|| f64::INFINITY, f64::min);
        assert!(min >= a.min_modulus_lower_bound, "{coeffs:?}: grid min {min} < bound {}", a.min_modulus_lower_bound);
        checked += 1;
    }
    assert!(checked > 100);
}
