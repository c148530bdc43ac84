#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use stabilcert_core::blocks::BlockMatrix;
use stabilcert_core::geometry::{psi_multiply, IndexSet};
use stabilcert_core::operator::{Coeffs, DenseWindow, OperatorSpec};
use stabilcert_core::scalar::{lp_norm, Scalar};

pub fn re(x: f64) -> Scalar {
    Complex64::new(x, 0.0)
}

/// Smallest eigenvalue of `MᴴM` by power iteration on `G` and then on
/// `λ_max·I − G`, finishing with a Rayleigh quotient.
pub fn power_iteration_min_gram(m: &BlockMatrix) -> f64 {
    let n = m.ncols();
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            g[a * n + b] = (0..m.nrows()).map(|i| m.get(i, a).conj() * m.get(i, b)).sum();
        }
    }
    let apply = |shift: f64, v: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|a| {
                let gv: Complex64 = (0..n).map(|b| g[a * n + b] * v[b]).sum();
                v[a] * shift - gv
            })
            .collect()
    };
    let rayleigh = |shift: f64, v: &[Complex64]| -> f64 {
        let w = apply(shift, v);
        let num: Complex64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        num.re / v.iter().map(|a| a.norm_sqr()).sum::<f64>()
    };
    let iterate = |shift: f64, sign: f64| -> f64 {
        let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.3 - 0.05 * i as f64)).collect();
        let mut last = f64::NAN;
        for it in 0..2_000_000 {
            let w: Vec<Complex64> = apply(shift, &v).into_iter().map(|x| x * sign).collect();
            let norm = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            v = w.into_iter().map(|x| x / norm).collect();
            if it % 64 == 0 {
                let r = sign * rayleigh(shift, &v);
                if (r - last).abs() <= 1e-15 * r.abs().max(1.0) {
                    return r;
                }
                last = r;
            }
        }
        sign * rayleigh(shift, &v)
    };
    // largest eigenvalue of G: iterate with −(0·I − G) = G
    let lambda_max = iterate(0.0, -1.0);
    let top = iterate(lambda_max, 1.0);
    lambda_max - top
}

pub fn random_real_block<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> BlockMatrix {
    let d: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    BlockMatrix::from_real(rows, cols, &d).unwrap()
}

pub fn random_coeffs<R: Rng>(rng: &mut R, max_radius: i64, complex: bool) -> Coeffs {
    let count = rng.gen_range(1..=4);
    let mut c = Coeffs::new();
    for _ in 0..count {
        let k = rng.gen_range(-max_radius..=max_radius);
        let v = if complex {
            Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
        } else {
            re(rng.gen_range(-2.0..2.0))
        };
        c.insert(k, v);
    }
    c
}

/// Integer coefficients on at most five consecutive offsets.
pub fn random_integer_toeplitz<R: Rng>(rng: &mut R) -> OperatorSpec {
    let width = rng.gen_range(1..=5);
    let lo = rng.gen_range(-2..=0);
    let mut c = Coeffs::new();
    for k in lo..lo + width {
        let v = rng.gen_range(-4..=4);
        if v != 0 {
            c.insert(k, re(v as f64));
        }
    }
    if c.is_empty() {
        c.insert(0, re(1.0));
    }
    OperatorSpec::Toeplitz { coeffs: c }
}

pub fn random_points<R: Rng>(rng: &mut R, count: usize, span: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = Vec::new();
    while xs.len() < count {
        // quarter-integer grid keeps bucketing boundaries in play
        let x = (rng.gen_range(-span..span) * 4.0).round() / 4.0;
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs
}

pub fn random_dense<R: Rng>(rng: &mut R) -> OperatorSpec {
    let (nr, nc) = (rng.gen_range(2..8), rng.gen_range(2..8));
    let rows = IndexSet::line(random_points(rng, nr, 4.0)).unwrap();
    let cols = IndexSet::line(random_points(rng, nc, 4.0)).unwrap();
    let mut entries = Vec::new();
    for i in 0..rows.len() {
        for j in 0..cols.len() {
            if rng.gen_bool(0.6) {
                entries.push((i, j, re(rng.gen_range(-2.0..2.0))));
            }
        }
    }
    OperatorSpec::DenseWindow(DenseWindow::new(rows, cols, entries).unwrap())
}

pub fn random_lattice<R: Rng>(rng: &mut R) -> OperatorSpec {
    use stabilcert_core::operator::Rational;
    match rng.gen_range(0..3) {
        0 => {
            let complex = rng.gen_bool(0.3);
            OperatorSpec::Toeplitz {
                coeffs: random_coeffs(rng, 3, complex),
            }
        }
        1 => {
            let q = rng.gen_range(1..6);
            OperatorSpec::twisted(random_coeffs(rng, 3, false), Rational::new(rng.gen_range(0..q), q).unwrap())
        }
        _ => {
            let q = rng.gen_range(1..4);
            let weights = (0..q).map(|_| re(rng.gen_range(-2.0..2.0))).collect();
            OperatorSpec::periodic(random_coeffs(rng, 3, false), weights).unwrap()
        }
    }
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<Scalar> {
    (0..len).map(|_| re(rng.gen_range(-1.0..1.0))).collect()
}

pub fn random_set<R: Rng>(rng: &mut R, dim: usize, count: usize) -> IndexSet {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    while pts.len() < count {
        let p: Vec<f64> = (0..dim).map(|_| (rng.gen_range(-10.0..10.0f64) * 4.0).round() / 4.0).collect();
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    IndexSet::new(dim, &pts).unwrap()
}

/// Every center of `N·Z^d` whose open box of half-width `scale` meets the set.
pub fn centers(set: &IndexSet, step: u64, scale: u64) -> Vec<Vec<f64>> {
    let dim = set.dim();
    let s = step as f64;
    let reach = scale as f64;
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in set.points() {
        for i in 0..dim {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let ranges: Vec<(i64, i64)> = (0..dim)
        .map(|i| (((lo[i] - reach) / s).floor() as i64, ((hi[i] + reach) / s).ceil() as i64))
        .collect();
    let mut out = Vec::new();
    let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        out.push(idx.iter().map(|&t| t as f64 * s).collect());
        let mut i = 0;
        while i < dim {
            idx[i] += 1;
            if idx[i] <= ranges[i].1 {
                break;
            }
            idx[i] = ranges[i].0;
            i += 1;
        }
        if i == dim {
            return out;
        }
    }
}

/// `(Σ_n ‖Ψ_n^{scale} c‖_p^p)^{1/p}` over `n ∈ step·Z^d`, or the sup for `p = ∞`.
pub fn partition_norm(set: &IndexSet, c: &[Scalar], step: u64, scale: u64, p: f64) -> f64 {
    let parts: Vec<f64> = centers(set, step, scale)
        .iter()
        .map(|n| lp_norm(&psi_multiply(set, c, n, scale), p))
        .collect();
    lp_norm(&parts, p)
}

/// `inf_{0≤s≤N} ‖A_N − A_s‖_C + (2ds/N)‖A_s‖_C` over real `s`, evaluated at
/// `s = 0` and at the right limits of every offset magnitude below `N`.
pub fn commutator_bound(spec: &OperatorSpec, n: u64, offsets: &[f64]) -> f64 {
    let nf = n as f64;
    let a_n = spec.truncate(nf);
    let mut best = a_n.c_norm();
    for &t in offsets {
        if t < nf {
            let a_s = spec.truncate_closed(t);
            let v = a_n.tail_beyond(t).c_norm() + 2.0 * t / nf * a_s.c_norm();
            best = best.min(v);
        }
    }
    best
}

pub fn offset_magnitudes(spec: &OperatorSpec) -> Vec<f64> {
    match spec {
        OperatorSpec::DenseWindow(w) => w
            .entries()
            .map(|(i, j, _)| (w.rows().coords()[i] - w.cols().coords()[j]).abs())
            .collect(),
        _ => spec.coeffs().unwrap().keys().map(|k| k.unsigned_abs() as f64).collect(),
    }
}

/// Column set, row set covering every reachable row, for applying `A` to
/// vectors supported on `lo..=hi` (lattice kinds) or on all columns (dense).
pub fn apply_sets(spec: &OperatorSpec, lo: i64, hi: i64) -> (IndexSet, IndexSet) {
    match spec {
        OperatorSpec::DenseWindow(w) => (w.cols().clone(), w.rows().clone()),
        _ => {
            let r = spec.support_radius() as i64;
            (IndexSet::integer_window(lo, hi), IndexSet::integer_window(lo - r, hi + r))
        }
    }
}
